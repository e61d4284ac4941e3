//! Weighted directed input-output (IO) networks built from sectoral flow
//! tables, plus the machinery to study how shocks travel across them.
//!
//! The crate is organized around the pipeline the CLI drives:
//!
//! * [`iotable`]: parse and validate country flow tables, derive production,
//!   expose the network view.
//! * [`linalg`]: dense kernels: LU solve/inverse, power iteration, and the
//!   total-requirements (Leontief) system.
//! * [`netstats`]: topology statistics: density, path lengths, degree and
//!   strength profiles, neighbor averages, assortativity, HITS centrality.
//! * [`diffusion`]: the three shock models: final-demand shocks through the
//!   total-requirements matrix, threshold cascades with link updating, and
//!   cascades with per-round production re-equilibration.
//! * [`analysis`]: avalanche-size distributions, coefficients of variation,
//!   CCDFs, trigger sectors, and cross-country centrality correlations.
//! * [`export`]: versioned JSON/CSV schemas for every report the CLI writes.
//! * [`synth`]: deterministic synthetic table generator for tests and
//!   benchmarks (the real Eurostat tables are not redistributable).

pub mod analysis;
pub mod diffusion;
pub mod export;
pub mod iotable;
pub mod linalg;
pub mod netstats;
pub mod synth;

mod util;

pub use analysis::{AvalancheReport, CentralityCorrelation};
pub use diffusion::{CascadeResult, DemandShockResult, ShockParams, SweepResult, SweepSpec};
pub use iotable::{IONetwork, IOTable, SectorId};
pub use linalg::{DenseMatrix, LeontiefSystem};
pub use netstats::{HitsScores, NodeScores, PathMode, TopologySummary};
