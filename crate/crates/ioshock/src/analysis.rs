//! Distribution statistics over per-seed diffusion results: coefficient of
//! variation, largest/smallest avalanches with their trigger sectors, CCDFs,
//! resilience parameter sweeps, and cross-country centrality correlations.
//!
//! The CCDF convention is `P(X >= k)` over integer avalanche sizes, tabulated
//! at every integer from the smallest to the largest observed size, so the
//! first point is always 1.0.

use thiserror::Error;

use crate::diffusion::{self, ShockParams, SweepResult, SweepSpec};
use crate::iotable::{IOTable, SectorId};
use crate::util::{mean, pearson, sample_stddev};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AnalysisError {
    #[error("no successful per-seed results to summarize")]
    EmptyResults,
    #[error("cross-country aggregation needs at least 2 countries, got {0}")]
    TooFewCountries(usize),
    #[error("country {country} has a sector classification that does not match {reference}")]
    LabelMismatch { country: String, reference: String },
}

/// Per-country avalanche-size distribution summary for one model run.
#[derive(Debug, Clone, PartialEq)]
pub struct AvalancheReport {
    pub country: String,
    pub spec: SweepSpec,
    /// Avalanche size per successfully simulated seed, in seed order.
    pub sizes: Vec<(SectorId, usize)>,
    /// Seeds whose run failed or aborted, with the error rendered.
    pub failed: Vec<(SectorId, String)>,
    pub mean_size: f64,
    /// Sample coefficient of variation (stddev with n-1 divisor over mean);
    /// undefined when the mean is zero or fewer than two sizes exist.
    pub cov: Option<f64>,
    pub max_size: usize,
    pub min_size: usize,
    /// Seeds attaining the largest avalanche.
    pub max_triggers: Vec<SectorId>,
    /// Seeds attaining the smallest avalanche.
    pub min_triggers: Vec<SectorId>,
    /// `(k, P(X >= k))` for every integer `k` between the observed extremes.
    pub ccdf: Vec<(usize, f64)>,
}

/// Counter-cumulative distribution `P(X >= k)` at each integer threshold
/// from `min(sizes)` to `max(sizes)`.
pub fn ccdf(sizes: &[usize]) -> Vec<(usize, f64)> {
    if sizes.is_empty() {
        return Vec::new();
    }
    let lo = *sizes.iter().min().unwrap();
    let hi = *sizes.iter().max().unwrap();
    let n = sizes.len() as f64;
    (lo..=hi)
        .map(|k| {
            let at_least = sizes.iter().filter(|&&s| s >= k).count();
            (k, at_least as f64 / n)
        })
        .collect()
}

/// Distribution summary of one sweep. Failed seeds are listed, not counted.
pub fn summarize(sweep: &SweepResult, country: &str) -> Result<AvalancheReport, AnalysisError> {
    let mut sizes = Vec::new();
    let mut failed = Vec::new();
    for outcome in &sweep.outcomes {
        match outcome.avalanche_size() {
            Some(size) => sizes.push((outcome.seed(), size)),
            None => {
                let reason = outcome
                    .error()
                    .map(|e| e.to_string())
                    .unwrap_or_else(|| "unknown failure".to_string());
                failed.push((outcome.seed(), reason));
            }
        }
    }
    if sizes.is_empty() {
        return Err(AnalysisError::EmptyResults);
    }
    // statistics run over sorted sizes so the summary is bitwise invariant
    // under any permutation of the per-seed results
    let mut raw: Vec<usize> = sizes.iter().map(|(_, s)| *s).collect();
    raw.sort_unstable();
    let as_f64: Vec<f64> = raw.iter().map(|&s| s as f64).collect();
    let mean_size = mean(&as_f64);
    let cov = match sample_stddev(&as_f64) {
        Some(sd) if mean_size > 0.0 => Some(sd / mean_size),
        _ => None,
    };
    let max_size = *raw.iter().max().unwrap();
    let min_size = *raw.iter().min().unwrap();
    let max_triggers = sizes
        .iter()
        .filter(|(_, s)| *s == max_size)
        .map(|(seed, _)| *seed)
        .collect();
    let min_triggers = sizes
        .iter()
        .filter(|(_, s)| *s == min_size)
        .map(|(seed, _)| *seed)
        .collect();
    Ok(AvalancheReport {
        country: country.to_string(),
        spec: sweep.spec,
        ccdf: ccdf(&raw),
        sizes,
        failed,
        mean_size,
        cov,
        max_size,
        min_size,
        max_triggers,
        min_triggers,
    })
}

/// Which cascade mechanism a resilience sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CascadeKind {
    Link,
    Production,
}

impl CascadeKind {
    fn spec(&self, params: ShockParams) -> SweepSpec {
        match self {
            CascadeKind::Link => SweepSpec::LinkCascade(params),
            CascadeKind::Production => SweepSpec::ProductionCascade(params),
        }
    }
}

/// One avalanche report per `(f, c)` grid point, each tagged with its
/// parameters via the report's sweep spec.
pub fn resilience_sweep(
    table: &IOTable,
    country: &str,
    grid: &[ShockParams],
    kind: CascadeKind,
) -> Result<Vec<AvalancheReport>, AnalysisError> {
    grid.iter()
        .map(|&params| {
            let sweep = diffusion::sweep_all_seeds(table, &kind.spec(params));
            summarize(&sweep, country)
        })
        .collect()
}

/// Per-country inputs to the cross-country aggregation.
#[derive(Debug, Clone, Copy)]
pub struct CountryCentrality<'a> {
    pub report: &'a AvalancheReport,
    /// Sector labels, indexed by sector id; the classification must be
    /// shared across all countries.
    pub labels: &'a [String],
    pub hub: &'a [f64],
    pub authority: &'a [f64],
}

/// One sector row of the cross-country table.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCountryRow {
    pub label: String,
    /// Cross-country mean of the avalanche size this sector triggers.
    pub mean_size: f64,
    /// Standard error of that mean.
    pub stderr_size: f64,
    /// Mean log10 hub score over countries with a positive score.
    pub mean_log_hub: Option<f64>,
    pub hub_zero_countries: usize,
    pub mean_log_authority: Option<f64>,
    pub authority_zero_countries: usize,
    /// Number of countries contributing a size for this sector.
    pub countries: usize,
}

/// Cross-country centrality table plus the headline correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityCorrelation {
    pub rows: Vec<CrossCountryRow>,
    /// Pearson correlation of mean log hub score vs mean avalanche size.
    pub hub_pearson: Option<f64>,
    /// Pearson correlation of mean log authority score vs mean size.
    pub authority_pearson: Option<f64>,
    pub country_count: usize,
}

/// Aggregates per-sector avalanche sizes and centrality scores across
/// countries sharing one sector classification. Label sets must match
/// exactly; mismatches are errors, not silent intersections.
pub fn correlate_centrality(
    entries: &[CountryCentrality<'_>],
) -> Result<CentralityCorrelation, AnalysisError> {
    if entries.len() < 2 {
        return Err(AnalysisError::TooFewCountries(entries.len()));
    }
    let reference = entries[0];
    let mut ref_sorted: Vec<&String> = reference.labels.iter().collect();
    ref_sorted.sort();
    for entry in &entries[1..] {
        let mut sorted: Vec<&String> = entry.labels.iter().collect();
        sorted.sort();
        if sorted != ref_sorted {
            return Err(AnalysisError::LabelMismatch {
                country: entry.report.country.clone(),
                reference: reference.report.country.clone(),
            });
        }
    }

    let mut rows = Vec::with_capacity(reference.labels.len());
    for label in reference.labels {
        let mut sizes = Vec::new();
        let mut log_hubs = Vec::new();
        let mut hub_zeros = 0usize;
        let mut log_auths = Vec::new();
        let mut auth_zeros = 0usize;
        for entry in entries {
            let idx = entry
                .labels
                .iter()
                .position(|l| l == label)
                .expect("label sets verified equal");
            if let Some((_, size)) = entry
                .report
                .sizes
                .iter()
                .find(|(seed, _)| seed.0 == idx)
            {
                sizes.push(*size as f64);
            }
            let hub = entry.hub[idx];
            if hub > 0.0 {
                log_hubs.push(hub.log10());
            } else {
                hub_zeros += 1;
            }
            let auth = entry.authority[idx];
            if auth > 0.0 {
                log_auths.push(auth.log10());
            } else {
                auth_zeros += 1;
            }
        }
        if sizes.is_empty() {
            continue;
        }
        let mean_size = mean(&sizes);
        let stderr_size = sample_stddev(&sizes)
            .map(|sd| sd / (sizes.len() as f64).sqrt())
            .unwrap_or(0.0);
        rows.push(CrossCountryRow {
            label: label.clone(),
            mean_size,
            stderr_size,
            mean_log_hub: (!log_hubs.is_empty()).then(|| mean(&log_hubs)),
            hub_zero_countries: hub_zeros,
            mean_log_authority: (!log_auths.is_empty()).then(|| mean(&log_auths)),
            authority_zero_countries: auth_zeros,
            countries: sizes.len(),
        });
    }

    let paired = |pick: &dyn Fn(&CrossCountryRow) -> Option<f64>| -> Option<f64> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for row in &rows {
            if let Some(x) = pick(row) {
                xs.push(x);
                ys.push(row.mean_size);
            }
        }
        pearson(&xs, &ys)
    };
    let hub_pearson = paired(&|r| r.mean_log_hub);
    let authority_pearson = paired(&|r| r.mean_log_authority);
    Ok(CentralityCorrelation {
        rows,
        hub_pearson,
        authority_pearson,
        country_count: entries.len(),
    })
}
