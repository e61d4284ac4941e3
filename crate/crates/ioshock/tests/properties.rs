//! Property tests over randomly generated tables and matrices.

use std::collections::BTreeSet;

use proptest::prelude::*;

use ioshock::analysis::ccdf;
use ioshock::diffusion::{
    demand_shock, link_cascade, sweep_all_seeds, ShockParams, SweepSpec,
};
use ioshock::iotable::{parse_io_table, write_io_table, IONetwork, IOTable, SectorId};
use ioshock::linalg::{self, DenseMatrix, LeontiefSystem};
use ioshock::netstats::{self, PathMode};

fn entry() -> impl Strategy<Value = f64> {
    prop_oneof![
        3 => Just(0.0),
        4 => (1u32..5000).prop_map(|v| v as f64 / 100.0),
    ]
}

fn flows(s: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(entry(), s), s)
}

fn demand(s: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((100u32..10_000).prop_map(|v| v as f64 / 100.0), s)
}

fn table(max_s: usize) -> impl Strategy<Value = IOTable> {
    (2..=max_s).prop_flat_map(|s| {
        (flows(s), demand(s)).prop_map(move |(z, base)| {
            let m = DenseMatrix::from_rows(&z).unwrap();
            // demand covers the trade imbalance, as in real tables where
            // value added is nonnegative; this keeps (I - theta) invertible
            let d: Vec<f64> = (0..s)
                .map(|j| base[j] + (m.col_sum(j) - m.row_sum(j)).max(0.0))
                .collect();
            let labels = (0..s).map(|i| format!("S{i}")).collect();
            IOTable::new("XX", 2005, labels, m, d, None)
                .expect("strictly positive demand keeps every row consistent")
        })
    })
}

fn cascade_params() -> impl Strategy<Value = ShockParams> {
    ((5u32..80), (5u32..80)).prop_map(|(f, c)| {
        ShockParams::new(f as f64 / 100.0, c as f64 / 100.0).unwrap()
    })
}

#[test]
fn parses_full_size_table() {
    // a full 59-sector economy round-trips through the CSV schema
    let table = ioshock::synth::synthetic_table("BIG", 2005, 59, 0.6, 99);
    let mut buf = Vec::new();
    write_io_table(&table, &mut buf).unwrap();
    let reparsed = parse_io_table(buf.as_slice(), "BIG", 2005).unwrap();
    assert_eq!(reparsed.sector_count(), 59);
    assert_eq!(table, reparsed);
}

/// Independent closure-operator oracle for the link cascade's final hit set.
fn closure_hit_set(t: &IOTable, seed: usize, p: ShockParams) -> BTreeSet<usize> {
    let z = t.flows();
    let x = t.production();
    let alpha = p.alpha();
    let mut hit: BTreeSet<usize> = BTreeSet::from([seed]);
    loop {
        let newly: Vec<usize> = (0..t.sector_count())
            .filter(|h| !hit.contains(h))
            .filter(|&h| {
                let exposure: f64 = hit.iter().map(|&k| z.get(h, k) + z.get(k, h)).sum();
                exposure > alpha * x[h]
            })
            .collect();
        if newly.is_empty() {
            break;
        }
        hit.extend(newly);
    }
    hit.remove(&seed);
    hit
}

proptest! {
    #[test]
    fn parse_write_parse_is_bit_exact(t in table(8)) {
        let mut buf = Vec::new();
        write_io_table(&t, &mut buf).unwrap();
        let reparsed = parse_io_table(buf.as_slice(), t.country(), t.year()).unwrap();
        prop_assert_eq!(&t, &reparsed);
    }

    #[test]
    fn consistency_residual_is_tiny_on_valid_tables(t in table(10)) {
        prop_assert!(t.max_consistency_residual() <= 1e-6);
    }

    #[test]
    fn solve_reproduces_rhs(
        rows in (2usize..12),
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = rows;
        let mut a = DenseMatrix::zeros(n, n);
        for i in 0..n {
            let mut off_sum = 0.0;
            for j in 0..n {
                if i != j {
                    let v = rng.random_range(-1.0..1.0);
                    a.set(i, j, v);
                    off_sum += v.abs();
                }
            }
            // diagonally dominant, hence well-conditioned enough
            a.set(i, i, off_sum + rng.random_range(1.0..2.0));
        }
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-100.0..100.0)).collect();
        let y = linalg::solve(&a, &b).unwrap();
        let ay = a.matvec(&y);
        let bound = 1e-9 * (1.0 + b.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        for (p, q) in ay.iter().zip(&b) {
            prop_assert!((p - q).abs() <= bound);
        }
    }

    #[test]
    fn leontief_dominates_identity_entrywise(t in table(10)) {
        let system = LeontiefSystem::new(t.flows(), t.production()).unwrap();
        let l = system.leontief();
        for i in 0..l.rows() {
            prop_assert!(l.get(i, i) >= 1.0 - 1e-12);
            for j in 0..l.cols() {
                prop_assert!(l.get(i, j) >= -1e-12);
            }
        }
    }

    #[test]
    fn density_is_invariant_under_relabeling(t in table(8), shift in 0usize..8) {
        let s = t.sector_count();
        let perm: Vec<usize> = (0..s).map(|i| (i + shift) % s).collect();
        let mut permuted = DenseMatrix::zeros(s, s);
        for i in 0..s {
            for j in 0..s {
                permuted.set(perm[i], perm[j], t.flows().get(i, j));
            }
        }
        let original = IONetwork::from_weights(t.flows().clone());
        let relabeled = IONetwork::from_weights(permuted);
        prop_assert_eq!(netstats::density(&original), netstats::density(&relabeled));
        prop_assert_eq!(
            netstats::bilateral_density(&original),
            netstats::bilateral_density(&relabeled)
        );
    }

    #[test]
    fn strengths_swap_under_transposition(t in table(8)) {
        let a = netstats::degree_strength_profiles(&IONetwork::from_weights(t.flows().clone()));
        let b = netstats::degree_strength_profiles(&IONetwork::from_weights(t.flows().transpose()));
        prop_assert_eq!(a.in_strength, b.out_strength);
        prop_assert_eq!(a.out_strength, b.in_strength);
    }

    #[test]
    fn hits_authorities_equal_transposed_hubs(
        s in 2usize..8,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        // strictly positive weights keep the dominant eigenvector unique
        let rows: Vec<Vec<f64>> = (0..s)
            .map(|_| (0..s).map(|_| rng.random_range(0.1..10.0)).collect())
            .collect();
        let z = DenseMatrix::from_rows(&rows).unwrap();
        let direct = netstats::weighted_hits(&z, 1e-13, 100_000).unwrap();
        let transposed = netstats::weighted_hits(&z.transpose(), 1e-13, 100_000).unwrap();
        for (a, h) in direct.authority.iter().zip(&transposed.hub) {
            prop_assert!((a - h).abs() < 1e-8);
        }
        for (h, a) in direct.hub.iter().zip(&transposed.authority) {
            prop_assert!((h - a).abs() < 1e-8);
        }
    }

    #[test]
    fn apl_never_exceeds_diameter(t in table(10)) {
        let net = t.network();
        for mode in [PathMode::Directed, PathMode::Undirected] {
            if let Ok((diameter, apl)) = netstats::shortest_path_stats(&net, mode) {
                prop_assert!(apl <= diameter as f64);
            }
        }
    }

    #[test]
    fn demand_avalanche_counts_positive_leontief_column(t in table(10)) {
        let system = LeontiefSystem::new(t.flows(), t.production()).unwrap();
        for seed in t.sector_ids() {
            let sizes: Vec<usize> = [1e-3, 1.0, 1e3]
                .iter()
                .map(|&size| demand_shock(&system, seed, size).avalanche_size)
                .collect();
            let positive = (0..t.sector_count())
                .filter(|&i| system.leontief().get(i, seed.0) > 0.0)
                .count();
            prop_assert_eq!(sizes[0], positive);
            prop_assert_eq!(sizes[1], positive);
            prop_assert_eq!(sizes[2], positive);
        }
    }

    #[test]
    fn link_cascade_is_alpha_invariant(t in table(10), p in cascade_params()) {
        let f = p.reduction();
        let c = p.capacity_share();
        for seed in t.sector_ids() {
            let base = link_cascade(&t, seed, p).unwrap();
            for lambda in [0.5, 1.25] {
                let (fs, cs) = (lambda * f, lambda * c);
                if fs >= 1.0 || cs >= 1.0 {
                    continue;
                }
                let scaled = link_cascade(&t, seed, ShockParams::new(fs, cs).unwrap()).unwrap();
                prop_assert_eq!(base.hit_set(), scaled.hit_set());
                for (sector, round) in base.hits() {
                    prop_assert_eq!(scaled.hit_round(sector), Some(round));
                }
            }
        }
    }

    #[test]
    fn link_cascade_grows_as_threshold_share_falls(t in table(10)) {
        let f = 0.6;
        let shares = [0.8, 0.4, 0.2, 0.1, 0.05];
        for seed in t.sector_ids() {
            let mut previous: Option<BTreeSet<usize>> = None;
            for &c in &shares {
                let hit: BTreeSet<usize> =
                    link_cascade(&t, seed, ShockParams::new(f, c).unwrap())
                        .unwrap()
                        .hit_set()
                        .into_iter()
                        .map(|s| s.0)
                        .collect();
                if let Some(prev) = &previous {
                    prop_assert!(prev.is_subset(&hit));
                }
                previous = Some(hit);
            }
        }
    }

    #[test]
    fn link_cascade_equals_closure_oracle(t in table(6), p in cascade_params()) {
        for seed in t.sector_ids() {
            let sim: BTreeSet<usize> = link_cascade(&t, seed, p)
                .unwrap()
                .hit_set()
                .into_iter()
                .map(|s| s.0)
                .collect();
            prop_assert_eq!(sim, closure_hit_set(&t, seed.0, p));
        }
    }

    #[test]
    fn link_cascade_weights_follow_hit_counts(t in table(8), p in cascade_params()) {
        for seed in t.sector_ids() {
            let r = link_cascade(&t, seed, p).unwrap();
            // hit rounds are positive, bounded by the round counter, and the
            // seed is never part of the hit set
            prop_assert!(!r.was_hit(seed));
            for (_, round) in r.hits() {
                prop_assert!(round >= 1 && round <= r.rounds);
            }
            let keep = 1.0 - p.reduction();
            let hit = |s: usize| s == seed.0 || r.was_hit(SectorId(s));
            for i in 0..t.sector_count() {
                for j in 0..t.sector_count() {
                    let endpoint_hits = if i == j {
                        usize::from(hit(i))
                    } else {
                        usize::from(hit(i)) + usize::from(hit(j))
                    };
                    let expected = t.flows().get(i, j) * keep.powi(endpoint_hits as i32);
                    let got = r.final_weights.get(i, j);
                    prop_assert!((got - expected).abs() <= 1e-9 * (1.0 + expected));
                }
            }
        }
    }

    #[test]
    fn ccdf_is_a_non_increasing_step_function(sizes in prop::collection::vec(0usize..40, 1..50)) {
        let points = ccdf(&sizes);
        prop_assert_eq!(points[0].1, 1.0);
        for pair in points.windows(2) {
            prop_assert!(pair[1].1 <= pair[0].1);
            prop_assert_eq!(pair[1].0, pair[0].0 + 1);
        }
    }

    #[test]
    fn lower_alpha_ccdf_dominates(t in table(10)) {
        // the two headline scenarios: alpha = 2/3 vs alpha = 1/7
        let high = ShockParams::new(0.6, 0.4).unwrap();
        let low = ShockParams::new(0.7, 0.1).unwrap();
        let sizes = |p: ShockParams| -> Vec<usize> {
            sweep_all_seeds(&t, &SweepSpec::LinkCascade(p))
                .outcomes
                .iter()
                .map(|o| o.avalanche_size().unwrap())
                .collect()
        };
        let hi = ccdf(&sizes(high));
        let lo = ccdf(&sizes(low));
        // tabulated curves cover contiguous thresholds; extend with the
        // defining limits P(X >= k) = 1 below and 0 above
        let eval = |points: &[(usize, f64)], k: usize| -> f64 {
            let Some(&(first, _)) = points.first() else {
                return 0.0;
            };
            let last = points.last().unwrap().0;
            if k < first {
                1.0
            } else if k > last {
                0.0
            } else {
                points[k - first].1
            }
        };
        let max_k = hi.last().map(|p| p.0).unwrap_or(0).max(lo.last().map(|p| p.0).unwrap_or(0));
        for k in 0..=max_k {
            prop_assert!(eval(&lo, k) + 1e-12 >= eval(&hi, k), "k={k}");
        }
    }
}
