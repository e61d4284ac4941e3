//! Shock-diffusion models on IO networks.
//!
//! Three mechanisms are implemented:
//!
//! 1. **Final-demand shocks** ([`demand_shock`]): a negative demand shock in
//!    one sector changes production by `-size * L[:, seed]` where `L` is the
//!    total-requirements matrix. The avalanche counts sectors whose
//!    production strictly falls; it is independent of the shock size.
//! 2. **Link cascades** ([`link_cascade`]): progressive threshold cascade.
//!    A hit sector scales its row and column of the flow matrix by `1 - f`.
//!    In each synchronous round, every unhit sector compares its cumulative
//!    total-strength change against the share `c` of its capacity (its
//!    production) and is hit on strict excess. Because each link incident to
//!    an unhit sector is rescaled at most once before that sector can be
//!    hit, outcomes depend on `(c, f)` only through `alpha = c / f`.
//! 3. **Production cascades** ([`production_cascade`]): same rounds, but
//!    after each round's link updates the production vector is re-solved
//!    from the updated technical coefficients with final demand fixed, and
//!    the new (lower) capacities are used as thresholds in the next round.
//!
//! Cascades are progressive: once hit, a sector is never hit again. Each
//! run owns a private copy of the flow matrix, so sweeps parallelize over
//! seeds with no shared mutable state.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::iotable::{IOTable, SectorId};
use crate::linalg::{
    self, DenseMatrix, LeontiefSystem, LinalgError, SPECTRAL_RADIUS_LIMIT,
};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DiffusionError {
    #[error("invalid shock parameters: {0}")]
    InvalidParams(String),
    #[error("seed sector {seed} out of range for {sectors} sectors")]
    SeedOutOfRange { seed: usize, sectors: usize },
    #[error("sector {sector} has zero production but positive incident flow; its threshold is undefined")]
    ZeroCapacity { sector: usize },
    #[error("production update failed at round {round}: {source}")]
    ProductionUpdate { round: usize, source: LinalgError },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Cascade parameters: link-reduction fraction `f` and capacity-threshold
/// share `c`, both in the open unit interval. Propagation depends on them
/// only through the resilience ratio `alpha = c / f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockParams {
    reduction: f64,
    capacity_share: f64,
}

impl ShockParams {
    pub fn new(reduction: f64, capacity_share: f64) -> Result<Self, DiffusionError> {
        if !(reduction > 0.0 && reduction < 1.0) {
            return Err(DiffusionError::InvalidParams(format!(
                "link reduction f must lie in (0, 1), got {reduction}"
            )));
        }
        if !(capacity_share > 0.0 && capacity_share < 1.0) {
            return Err(DiffusionError::InvalidParams(format!(
                "capacity share c must lie in (0, 1), got {capacity_share}"
            )));
        }
        Ok(Self {
            reduction,
            capacity_share,
        })
    }

    /// Link-reduction fraction `f`.
    pub fn reduction(&self) -> f64 {
        self.reduction
    }

    /// Capacity-threshold share `c`.
    pub fn capacity_share(&self) -> f64 {
        self.capacity_share
    }

    /// Resilience ratio `alpha = c / f`.
    pub fn alpha(&self) -> f64 {
        self.capacity_share / self.reduction
    }
}

/// Outcome of a final-demand shock from one seed sector.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandShockResult {
    pub seed: SectorId,
    /// Production change per sector, `-size * L[:, seed]`.
    pub delta_x: Vec<f64>,
    /// Number of sectors with strictly negative production change
    /// (the seed included).
    pub avalanche_size: usize,
}

/// Final-demand shock through the total-requirements matrix.
pub fn demand_shock(
    system: &LeontiefSystem,
    seed: SectorId,
    shock_size: f64,
) -> DemandShockResult {
    assert!(shock_size > 0.0, "shock size must be positive");
    let s = system.sector_count();
    assert!(seed.0 < s, "seed sector out of range");
    let delta_x: Vec<f64> = (0..s)
        .map(|i| -shock_size * system.leontief().get(i, seed.0))
        .collect();
    let avalanche_size = delta_x.iter().filter(|v| **v < 0.0).count();
    DemandShockResult {
        seed,
        delta_x,
        avalanche_size,
    }
}

/// Whether a cascade ran to quiescence or was cut short by a failed
/// production solve.
#[derive(Debug, Clone, PartialEq)]
pub enum CascadeStatus {
    Complete,
    Aborted {
        round: usize,
        error: DiffusionError,
    },
}

impl CascadeStatus {
    pub fn is_complete(&self) -> bool {
        matches!(self, CascadeStatus::Complete)
    }
}

/// Per-seed cascade outcome. The seed itself is excluded from the hit set
/// and from the avalanche size.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeResult {
    pub seed: SectorId,
    hit_round: BTreeMap<SectorId, usize>,
    /// Index of the last round that added sectors; 0 when nothing was hit.
    pub rounds: usize,
    pub final_weights: DenseMatrix,
    /// Production at termination (production cascades only).
    pub final_production: Option<Vec<f64>>,
    pub status: CascadeStatus,
}

impl CascadeResult {
    pub fn avalanche_size(&self) -> usize {
        self.hit_round.len()
    }

    pub fn was_hit(&self, sector: SectorId) -> bool {
        self.hit_round.contains_key(&sector)
    }

    /// Round in which `sector` was hit, if it was.
    pub fn hit_round(&self, sector: SectorId) -> Option<usize> {
        self.hit_round.get(&sector).copied()
    }

    /// Hit sectors in index order with their hit rounds.
    pub fn hits(&self) -> impl Iterator<Item = (SectorId, usize)> + '_ {
        self.hit_round.iter().map(|(s, r)| (*s, *r))
    }

    pub fn hit_set(&self) -> Vec<SectorId> {
        self.hit_round.keys().copied().collect()
    }
}

/// Scales `sector`'s row and column by `keep`, touching the diagonal once.
fn scale_sector(z: &mut DenseMatrix, sector: usize, keep: f64) {
    let s = z.rows();
    for j in 0..s {
        let v = z.get(sector, j) * keep;
        z.set(sector, j, v);
    }
    for i in 0..s {
        if i != sector {
            let v = z.get(i, sector) * keep;
            z.set(i, sector, v);
        }
    }
}

fn total_strength(z: &DenseMatrix, sector: usize) -> f64 {
    z.row_sum(sector) + z.col_sum(sector)
}

fn recompute_production(
    z: &DenseMatrix,
    previous_production: &[f64],
    final_demand: &[f64],
) -> Result<Vec<f64>, LinalgError> {
    let theta = linalg::technical_coefficients(z, previous_production)?;
    let radius = linalg::spectral_radius_estimate(&theta)?;
    if radius >= SPECTRAL_RADIUS_LIMIT {
        return Err(LinalgError::Singular {
            spectral_radius: Some(radius),
        });
    }
    linalg::solve(&linalg::identity_minus(&theta), final_demand)
}

/// Threshold cascade with link updating; production stays fixed.
pub fn link_cascade(
    table: &IOTable,
    seed: SectorId,
    params: ShockParams,
) -> Result<CascadeResult, DiffusionError> {
    run_cascade(table, seed, params, false)
}

/// Threshold cascade with per-round production re-equilibration.
pub fn production_cascade(
    table: &IOTable,
    seed: SectorId,
    params: ShockParams,
) -> Result<CascadeResult, DiffusionError> {
    run_cascade(table, seed, params, true)
}

fn run_cascade(
    table: &IOTable,
    seed: SectorId,
    params: ShockParams,
    update_production: bool,
) -> Result<CascadeResult, DiffusionError> {
    let s = table.sector_count();
    if seed.0 >= s {
        return Err(DiffusionError::SeedOutOfRange {
            seed: seed.0,
            sectors: s,
        });
    }
    let mut z = table.flows().clone();
    for h in 0..s {
        if h != seed.0 && table.production()[h] == 0.0 && total_strength(&z, h) > 0.0 {
            return Err(DiffusionError::ZeroCapacity { sector: h });
        }
    }
    let pre_strength: Vec<f64> = (0..s).map(|i| total_strength(&z, i)).collect();
    let mut capacity = table.production().to_vec();
    let mut hit = vec![false; s];
    hit[seed.0] = true;
    let keep = 1.0 - params.reduction();
    scale_sector(&mut z, seed.0, keep);

    let mut hit_round = BTreeMap::new();
    let mut rounds = 0usize;
    let mut final_production = None;
    let mut status = CascadeStatus::Complete;

    if update_production {
        match recompute_production(&z, &capacity, table.final_demand()) {
            Ok(x) => {
                final_production = Some(x.clone());
                capacity = x;
            }
            Err(source) => {
                return Ok(CascadeResult {
                    seed,
                    hit_round,
                    rounds,
                    final_weights: z,
                    final_production,
                    status: CascadeStatus::Aborted {
                        round: 0,
                        error: DiffusionError::ProductionUpdate { round: 0, source },
                    },
                });
            }
        }
    }

    for round in 1..=s {
        let newly: Vec<usize> = (0..s)
            .filter(|&h| {
                if hit[h] {
                    return false;
                }
                let change = (pre_strength[h] - total_strength(&z, h)).abs();
                change > params.capacity_share() * capacity[h]
            })
            .collect();
        if newly.is_empty() {
            break;
        }
        for &h in &newly {
            hit[h] = true;
            hit_round.insert(SectorId(h), round);
        }
        for &h in &newly {
            scale_sector(&mut z, h, keep);
        }
        rounds = round;
        if update_production {
            match recompute_production(&z, &capacity, table.final_demand()) {
                Ok(x) => {
                    final_production = Some(x.clone());
                    capacity = x;
                }
                Err(source) => {
                    status = CascadeStatus::Aborted {
                        round,
                        error: DiffusionError::ProductionUpdate { round, source },
                    };
                    break;
                }
            }
        }
    }

    Ok(CascadeResult {
        seed,
        hit_round,
        rounds,
        final_weights: z,
        final_production,
        status,
    })
}

/// Which model a sweep runs, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepSpec {
    Demand { shock_size: f64 },
    LinkCascade(ShockParams),
    ProductionCascade(ShockParams),
}

impl SweepSpec {
    /// CLI-facing model number: 1 demand, 2 link cascade, 3 production
    /// cascade.
    pub fn model_index(&self) -> u8 {
        match self {
            SweepSpec::Demand { .. } => 1,
            SweepSpec::LinkCascade(_) => 2,
            SweepSpec::ProductionCascade(_) => 3,
        }
    }

    pub fn params(&self) -> Option<ShockParams> {
        match self {
            SweepSpec::Demand { .. } => None,
            SweepSpec::LinkCascade(p) | SweepSpec::ProductionCascade(p) => Some(*p),
        }
    }

    pub fn shock_size(&self) -> Option<f64> {
        match self {
            SweepSpec::Demand { shock_size } => Some(*shock_size),
            _ => None,
        }
    }
}

/// Per-seed entry of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum SeedOutcome {
    Demand(DemandShockResult),
    Cascade(CascadeResult),
    Failed {
        seed: SectorId,
        error: DiffusionError,
    },
}

impl SeedOutcome {
    pub fn seed(&self) -> SectorId {
        match self {
            SeedOutcome::Demand(r) => r.seed,
            SeedOutcome::Cascade(r) => r.seed,
            SeedOutcome::Failed { seed, .. } => *seed,
        }
    }

    /// Avalanche size for successful runs; aborted cascades and failures
    /// yield `None` so partial results never bias distributions.
    pub fn avalanche_size(&self) -> Option<usize> {
        match self {
            SeedOutcome::Demand(r) => Some(r.avalanche_size),
            SeedOutcome::Cascade(r) if r.status.is_complete() => Some(r.avalanche_size()),
            _ => None,
        }
    }

    /// Error statuses: outright failures and aborted cascades.
    pub fn error(&self) -> Option<&DiffusionError> {
        match self {
            SeedOutcome::Failed { error, .. } => Some(error),
            SeedOutcome::Cascade(CascadeResult {
                status: CascadeStatus::Aborted { error, .. },
                ..
            }) => Some(error),
            _ => None,
        }
    }
}

/// All per-seed outcomes of one model run over one table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub outcomes: Vec<SeedOutcome>,
}

/// Runs the model once per listed seed. Every run starts from the pristine
/// table; seeds are independent and execute in parallel. Per-seed errors are
/// recorded without aborting the sweep.
pub fn sweep_seeds(table: &IOTable, spec: &SweepSpec, seeds: &[SectorId]) -> SweepResult {
    let outcomes = match spec {
        SweepSpec::Demand { shock_size } => {
            match LeontiefSystem::new(table.flows(), table.production()) {
                Ok(system) => seeds
                    .par_iter()
                    .map(|&seed| SeedOutcome::Demand(demand_shock(&system, seed, *shock_size)))
                    .collect(),
                Err(e) => seeds
                    .iter()
                    .map(|&seed| SeedOutcome::Failed {
                        seed,
                        error: DiffusionError::Linalg(e.clone()),
                    })
                    .collect(),
            }
        }
        SweepSpec::LinkCascade(params) => seeds
            .par_iter()
            .map(|&seed| match link_cascade(table, seed, *params) {
                Ok(r) => SeedOutcome::Cascade(r),
                Err(error) => SeedOutcome::Failed { seed, error },
            })
            .collect(),
        SweepSpec::ProductionCascade(params) => seeds
            .par_iter()
            .map(|&seed| match production_cascade(table, seed, *params) {
                Ok(r) => SeedOutcome::Cascade(r),
                Err(error) => SeedOutcome::Failed { seed, error },
            })
            .collect(),
    };
    SweepResult {
        spec: *spec,
        outcomes,
    }
}

/// [`sweep_seeds`] over every sector of the table.
pub fn sweep_all_seeds(table: &IOTable, spec: &SweepSpec) -> SweepResult {
    let seeds: Vec<SectorId> = table.sector_ids().collect();
    sweep_seeds(table, spec, &seeds)
}
