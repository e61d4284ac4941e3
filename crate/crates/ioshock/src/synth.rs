//! Deterministic synthetic IO tables for tests, benchmarks, and demos.
//!
//! Real Eurostat tables cannot be redistributed, so the synthetic generator
//! produces economies with the same shape: dense weighted flows with heavy
//! right tails, self loops, and a value-added margin that keeps the
//! technical-coefficient matrix strictly invertible (every column of flows
//! is covered by production, so column sums of the coefficients stay below
//! one).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::iotable::IOTable;
use crate::linalg::DenseMatrix;

/// Shared synthetic sector classification: `sector_00`, `sector_01`, ...
pub fn sector_labels(count: usize) -> Vec<String> {
    (0..count).map(|i| format!("sector_{i:02}")).collect()
}

/// Generates a synthetic country table. Identical arguments always produce
/// an identical table (ChaCha8 keyed by `seed`), independent of platform.
///
/// `density` is the probability of each directed inter-sector link; weights
/// are log-uniform over three decades so strength distributions are skewed
/// like the real data.
pub fn synthetic_table(
    country: &str,
    year: i32,
    sectors: usize,
    density: f64,
    seed: u64,
) -> IOTable {
    assert!(sectors >= 2, "need at least two sectors");
    assert!((0.0..=1.0).contains(&density));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flows = DenseMatrix::zeros(sectors, sectors);
    for i in 0..sectors {
        for j in 0..sectors {
            if i == j {
                if rng.random_bool(0.5) {
                    let w = 10f64.powf(rng.random_range(-1.0..1.5));
                    flows.set(i, j, w);
                }
            } else if rng.random_bool(density) {
                let w = 10f64.powf(rng.random_range(-1.0..2.0));
                flows.set(i, j, w);
            }
        }
    }
    // final demand covers the trade imbalance plus a value-added margin, so
    // production dominates every column sum of the flow matrix
    let mut demand = Vec::with_capacity(sectors);
    for j in 0..sectors {
        let row = flows.row_sum(j);
        let col = flows.col_sum(j);
        let margin = rng.random_range(20.0..200.0);
        demand.push((col - row).max(0.0) + margin);
    }
    IOTable::new(country, year, sector_labels(sectors), flows, demand, None)
        .expect("generated table is valid by construction")
}

/// A batch of synthetic countries sharing the sector classification, named
/// `C00`, `C01`, ...
pub fn synthetic_batch(countries: usize, sectors: usize, base_seed: u64) -> Vec<IOTable> {
    (0..countries)
        .map(|i| {
            synthetic_table(
                &format!("C{i:02}"),
                2005,
                sectors,
                0.6,
                base_seed.wrapping_add(i as u64),
            )
        })
        .collect()
}
