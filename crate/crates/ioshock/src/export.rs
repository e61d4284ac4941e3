//! Versioned serialization schemas for everything the CLI writes.
//!
//! JSON reports are nested [`CountryReportFile`] documents carrying a
//! `schema_version` field; CSV exports are flat with stable column orders
//! (documented on each writer). Floats are written with shortest round-trip
//! formatting everywhere, so identical inputs always serialize to identical
//! bytes.

use std::io;

use serde::{Deserialize, Serialize};

use crate::analysis::{AvalancheReport, CentralityCorrelation};
use crate::diffusion::SweepSpec;
use crate::iotable::IOTable;
use crate::netstats::{NodeScores, PathMode, TopologySummary};

pub const SCHEMA_VERSION: u32 = 1;

/// Nested per-country report for one model run at one parameter point.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CountryReportFile {
    pub schema_version: u32,
    pub country: String,
    pub year: i32,
    /// 1 = demand shock, 2 = link cascade, 3 = production cascade.
    pub model: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shock_size: Option<f64>,
    pub labels: Vec<String>,
    pub sizes: Vec<SeedSize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failed: Vec<FailedSeed>,
    pub mean_size: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cov: Option<f64>,
    pub max_size: usize,
    pub min_size: usize,
    pub max_triggers: Vec<String>,
    pub min_triggers: Vec<String>,
    pub ccdf: Vec<CcdfPoint>,
    /// HITS scores of the pristine network, for cross-country correlation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hub_scores: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub authority_scores: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SeedSize {
    pub seed: usize,
    pub label: String,
    pub size: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FailedSeed {
    pub seed: usize,
    pub label: String,
    pub error: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CcdfPoint {
    pub size: usize,
    pub fraction: f64,
}

impl CountryReportFile {
    pub fn build(
        report: &AvalancheReport,
        table: &IOTable,
        hits: Option<&crate::netstats::HitsScores>,
    ) -> Self {
        let label = |seed: crate::iotable::SectorId| table.label(seed).to_string();
        Self {
            schema_version: SCHEMA_VERSION,
            country: report.country.clone(),
            year: table.year(),
            model: report.spec.model_index(),
            f: report.spec.params().map(|p| p.reduction()),
            c: report.spec.params().map(|p| p.capacity_share()),
            alpha: report.spec.params().map(|p| p.alpha()),
            shock_size: report.spec.shock_size(),
            labels: table.labels().to_vec(),
            sizes: report
                .sizes
                .iter()
                .map(|(seed, size)| SeedSize {
                    seed: seed.0,
                    label: label(*seed),
                    size: *size,
                })
                .collect(),
            failed: report
                .failed
                .iter()
                .map(|(seed, error)| FailedSeed {
                    seed: seed.0,
                    label: label(*seed),
                    error: error.clone(),
                })
                .collect(),
            mean_size: report.mean_size,
            cov: report.cov,
            max_size: report.max_size,
            min_size: report.min_size,
            max_triggers: report.max_triggers.iter().map(|s| label(*s)).collect(),
            min_triggers: report.min_triggers.iter().map(|s| label(*s)).collect(),
            ccdf: report
                .ccdf
                .iter()
                .map(|&(size, fraction)| CcdfPoint { size, fraction })
                .collect(),
            hub_scores: hits.map(|h| h.hub.clone()),
            authority_scores: hits.map(|h| h.authority.clone()),
            generated_at: None,
        }
    }

    pub fn to_json_pretty(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn from_json(data: &str) -> serde_json::Result<Self> {
        serde_json::from_str(data)
    }

    /// Reconstructs the sweep spec from the stored model number and
    /// parameters. `None` when the fields are inconsistent.
    pub fn spec(&self) -> Option<SweepSpec> {
        match self.model {
            1 => Some(SweepSpec::Demand {
                shock_size: self.shock_size?,
            }),
            2 => crate::diffusion::ShockParams::new(self.f?, self.c?)
                .ok()
                .map(SweepSpec::LinkCascade),
            3 => crate::diffusion::ShockParams::new(self.f?, self.c?)
                .ok()
                .map(SweepSpec::ProductionCascade),
            _ => None,
        }
    }

    /// Rebuilds the in-memory report, for aggregation over stored files.
    pub fn to_report(&self) -> Option<AvalancheReport> {
        use crate::iotable::SectorId;
        let spec = self.spec()?;
        let by_label = |label: &String| -> Option<SectorId> {
            self.labels.iter().position(|l| l == label).map(SectorId)
        };
        Some(AvalancheReport {
            country: self.country.clone(),
            spec,
            sizes: self
                .sizes
                .iter()
                .map(|s| (SectorId(s.seed), s.size))
                .collect(),
            failed: self
                .failed
                .iter()
                .map(|f| (SectorId(f.seed), f.error.clone()))
                .collect(),
            mean_size: self.mean_size,
            cov: self.cov,
            max_size: self.max_size,
            min_size: self.min_size,
            max_triggers: self.max_triggers.iter().filter_map(by_label).collect(),
            min_triggers: self.min_triggers.iter().filter_map(by_label).collect(),
            ccdf: self.ccdf.iter().map(|p| (p.size, p.fraction)).collect(),
        })
    }
}

/// Per-country statistics JSON document.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CountryStatsFile {
    pub schema_version: u32,
    pub country: String,
    pub year: i32,
    pub sectors: usize,
    pub path_mode: PathMode,
    pub topology: TopologySummary,
    pub labels: Vec<String>,
    pub isolated: Vec<bool>,
    pub self_loops: Vec<bool>,
    pub scores: NodeScores,
}

impl CountryStatsFile {
    pub fn build(
        table: &IOTable,
        summary: &TopologySummary,
        mode: PathMode,
        scores: &NodeScores,
    ) -> Self {
        let net = table.network();
        let s = table.sector_count();
        Self {
            schema_version: SCHEMA_VERSION,
            country: table.country().to_string(),
            year: table.year(),
            sectors: s,
            path_mode: mode,
            topology: summary.clone(),
            labels: table.labels().to_vec(),
            isolated: (0..s).map(|i| net.is_isolated(i)).collect(),
            self_loops: (0..s).map(|i| net.has_self_loop(i)).collect(),
            scores: scores.clone(),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("stats serialize");
        out.push('\n');
        out
    }
}

/// Identifier suffix for a parameter point, used in directory names:
/// `f<f>_c<c>` for cascades, `shock_<size>` for demand shocks.
pub fn param_dir_name(spec: &SweepSpec) -> String {
    match spec {
        SweepSpec::Demand { shock_size } => format!("shock_{shock_size}"),
        SweepSpec::LinkCascade(p) | SweepSpec::ProductionCascade(p) => {
            format!("f{}_c{}", p.reduction(), p.capacity_share())
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_else(|| "NA".to_string())
}

/// Per-seed CSV: `seed,label,size,status`. Failed seeds carry an empty size
/// and the error in `status`.
pub fn write_seed_csv(
    report: &AvalancheReport,
    table: &IOTable,
    writer: impl io::Write,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["seed", "label", "size", "status"])?;
    let mut rows: Vec<(usize, String, String, String)> = report
        .sizes
        .iter()
        .map(|(seed, size)| {
            (
                seed.0,
                table.label(*seed).to_string(),
                size.to_string(),
                "ok".to_string(),
            )
        })
        .chain(report.failed.iter().map(|(seed, error)| {
            (
                seed.0,
                table.label(*seed).to_string(),
                String::new(),
                error.clone(),
            )
        }))
        .collect();
    rows.sort_by_key(|r| r.0);
    for (seed, label, size, status) in rows {
        w.write_record([seed.to_string(), label, size, status])?;
    }
    w.flush()?;
    Ok(())
}

/// CCDF CSV: `size,fraction`.
pub fn write_ccdf_csv(report: &AvalancheReport, writer: impl io::Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["size", "fraction"])?;
    for (size, fraction) in &report.ccdf {
        w.write_record([size.to_string(), fraction.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Country-level statistics CSV columns, in order.
pub const COUNTRY_STATS_COLUMNS: [&str; 13] = [
    "country",
    "year",
    "sectors",
    "isolated",
    "density",
    "bilateral_density",
    "diameter",
    "average_path_length",
    "path_mode",
    "degree_assortativity",
    "strength_assortativity",
    "annd_degree_correlation",
    "anns_strength_correlation",
];

pub struct CountryStatsRow<'a> {
    pub table: &'a IOTable,
    pub summary: &'a TopologySummary,
    pub mode: PathMode,
    pub scores: &'a NodeScores,
}

/// Writes `countries.csv`: one row per country, columns as in
/// [`COUNTRY_STATS_COLUMNS`].
pub fn write_country_stats_csv(
    rows: &[CountryStatsRow<'_>],
    writer: impl io::Write,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(COUNTRY_STATS_COLUMNS)?;
    for row in rows {
        let mode = match row.mode {
            PathMode::Directed => "directed",
            PathMode::Undirected => "undirected",
        };
        w.write_record([
            row.table.country().to_string(),
            row.table.year().to_string(),
            row.table.sector_count().to_string(),
            row.summary.isolated_count.to_string(),
            row.summary.density.to_string(),
            row.summary.bilateral_density.to_string(),
            row.summary.diameter.to_string(),
            row.summary.average_path_length.to_string(),
            mode.to_string(),
            fmt_opt(row.scores.assortativity.degree),
            fmt_opt(row.scores.assortativity.strength),
            fmt_opt(row.scores.neighbor_averages.degree_correlation),
            fmt_opt(row.scores.neighbor_averages.strength_correlation),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-node statistics CSV columns, in order.
pub const NODE_STATS_COLUMNS: [&str; 12] = [
    "sector",
    "label",
    "isolated",
    "self_loop",
    "in_degree",
    "out_degree",
    "in_strength",
    "out_strength",
    "annd",
    "anns",
    "hub",
    "authority",
];

/// Writes `nodes.csv` for one country: one row per sector.
pub fn write_node_stats_csv(
    table: &IOTable,
    scores: &NodeScores,
    writer: impl io::Write,
) -> csv::Result<()> {
    let net = table.network();
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(NODE_STATS_COLUMNS)?;
    for i in 0..table.sector_count() {
        w.write_record([
            i.to_string(),
            table.labels()[i].clone(),
            net.is_isolated(i).to_string(),
            net.has_self_loop(i).to_string(),
            scores.degrees.in_degree[i].to_string(),
            scores.degrees.out_degree[i].to_string(),
            scores.degrees.in_strength[i].to_string(),
            scores.degrees.out_strength[i].to_string(),
            fmt_opt(scores.neighbor_averages.annd[i]),
            fmt_opt(scores.neighbor_averages.anns[i]),
            scores.hits.hub[i].to_string(),
            scores.hits.authority[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Cross-country table CSV: one row per sector label.
pub const CROSS_COUNTRY_COLUMNS: [&str; 8] = [
    "label",
    "mean_size",
    "stderr_size",
    "mean_log_hub",
    "hub_zero_countries",
    "mean_log_authority",
    "authority_zero_countries",
    "countries",
];

pub fn write_cross_country_csv(
    correlation: &CentralityCorrelation,
    writer: impl io::Write,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CROSS_COUNTRY_COLUMNS)?;
    for row in &correlation.rows {
        w.write_record([
            row.label.clone(),
            row.mean_size.to_string(),
            row.stderr_size.to_string(),
            fmt_opt(row.mean_log_hub),
            row.hub_zero_countries.to_string(),
            fmt_opt(row.mean_log_authority),
            row.authority_zero_countries.to_string(),
            row.countries.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Headline correlation coefficients as a small JSON document.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CorrelationSummary {
    pub schema_version: u32,
    pub countries: usize,
    pub hub_pearson: Option<f64>,
    pub authority_pearson: Option<f64>,
}

impl CorrelationSummary {
    pub fn new(c: &CentralityCorrelation) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            countries: c.country_count,
            hub_pearson: c.hub_pearson,
            authority_pearson: c.authority_pearson,
        }
    }
}

/// Country summary CSV (one row per country and parameter point), with
/// optional metadata passthrough columns appended after the fixed set.
pub const SUMMARY_BASE_COLUMNS: [&str; 13] = [
    "country",
    "model",
    "f",
    "c",
    "alpha",
    "shock_size",
    "mean_size",
    "cov",
    "max_size",
    "max_triggers",
    "min_size",
    "min_triggers",
    "failed_seeds",
];

/// One country-level summary line, detached from live tables so it can be
/// rebuilt from report files alone.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub country: String,
    pub model: u8,
    pub f: Option<f64>,
    pub c: Option<f64>,
    pub alpha: Option<f64>,
    pub shock_size: Option<f64>,
    pub mean_size: f64,
    pub cov: Option<f64>,
    pub max_size: usize,
    pub max_triggers: Vec<String>,
    pub min_size: usize,
    pub min_triggers: Vec<String>,
    pub failed: usize,
    /// Metadata passthrough cells, aligned with the extra header columns.
    pub extra: Vec<String>,
}

impl SummaryRow {
    pub fn from_report(
        report: &AvalancheReport,
        labels: &[String],
        extra: Vec<String>,
    ) -> Self {
        let name = |s: &crate::iotable::SectorId| labels[s.0].clone();
        Self {
            country: report.country.clone(),
            model: report.spec.model_index(),
            f: report.spec.params().map(|p| p.reduction()),
            c: report.spec.params().map(|p| p.capacity_share()),
            alpha: report.spec.params().map(|p| p.alpha()),
            shock_size: report.spec.shock_size(),
            mean_size: report.mean_size,
            cov: report.cov,
            max_size: report.max_size,
            max_triggers: report.max_triggers.iter().map(name).collect(),
            min_size: report.min_size,
            min_triggers: report.min_triggers.iter().map(name).collect(),
            failed: report.failed.len(),
            extra,
        }
    }

    pub fn from_file(file: &CountryReportFile, extra: Vec<String>) -> Self {
        Self {
            country: file.country.clone(),
            model: file.model,
            f: file.f,
            c: file.c,
            alpha: file.alpha,
            shock_size: file.shock_size,
            mean_size: file.mean_size,
            cov: file.cov,
            max_size: file.max_size,
            max_triggers: file.max_triggers.clone(),
            min_size: file.min_size,
            min_triggers: file.min_triggers.clone(),
            failed: file.failed.len(),
            extra,
        }
    }
}

pub fn write_summary_csv(
    rows: &[SummaryRow],
    extra_columns: &[String],
    writer: impl io::Write,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = SUMMARY_BASE_COLUMNS.iter().map(|c| c.to_string()).collect();
    header.extend(extra_columns.iter().cloned());
    w.write_record(&header)?;
    for row in rows {
        let mut record = vec![
            row.country.clone(),
            row.model.to_string(),
            fmt_opt(row.f),
            fmt_opt(row.c),
            fmt_opt(row.alpha),
            fmt_opt(row.shock_size),
            row.mean_size.to_string(),
            fmt_opt(row.cov),
            row.max_size.to_string(),
            row.max_triggers.join("|"),
            row.min_size.to_string(),
            row.min_triggers.join("|"),
            row.failed.to_string(),
        ];
        record.extend(row.extra.iter().cloned());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Trigger-sector table CSV (one row per country): the sectors attaining the
/// largest and smallest avalanches with their sizes.
pub const TRIGGER_COLUMNS: [&str; 6] = [
    "country",
    "largest_triggers",
    "largest_size",
    "smallest_triggers",
    "smallest_size",
    "failed_seeds",
];

pub fn write_trigger_csv(rows: &[SummaryRow], writer: impl io::Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TRIGGER_COLUMNS)?;
    for row in rows {
        w.write_record([
            row.country.clone(),
            row.max_triggers.join("|"),
            row.max_size.to_string(),
            row.min_triggers.join("|"),
            row.min_size.to_string(),
            row.failed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Demand-shock production-change matrix CSV: rows are affected sectors,
/// one column per seed sector.
pub fn write_delta_matrix_csv(
    labels: &[String],
    columns: &[(usize, &[f64])],
    writer: impl io::Write,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["sector".to_string()];
    header.extend(columns.iter().map(|(seed, _)| format!("seed_{seed}")));
    w.write_record(&header)?;
    for (i, label) in labels.iter().enumerate() {
        let mut record = vec![label.clone()];
        record.extend(columns.iter().map(|(_, delta)| delta[i].to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}
