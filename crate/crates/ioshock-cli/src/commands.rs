//! The four subcommands, exposed as library functions so tests drive them
//! directly.
//!
//! All report files are written atomically (temp file + rename in the target
//! directory). Input tables may carry a sidecar manifest `<stem>.json` with
//! `country`, `year`, and `currency`; without one, the file stem is used as
//! the country code and the year defaults to 0.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use ioshock::analysis::{
    correlate_centrality, summarize, AvalancheReport, CountryCentrality,
};
use ioshock::diffusion::{sweep_seeds, SeedOutcome, SweepSpec};
use ioshock::export::{
    self, param_dir_name, CorrelationSummary, CountryReportFile, CountryStatsFile,
    CountryStatsRow, SummaryRow,
};
use ioshock::iotable::{parse_io_table, IOTable, SectorId, TableManifest};
use ioshock::netstats::{
    self, topology_summary, NodeScores, HITS_MAX_ITERS, HITS_TOL,
};

use crate::config::{ReportConfig, SimulateConfig, StatsConfig};
use crate::CliError;

/// Loads a table plus its optional sidecar manifest.
pub fn load_table(path: &Path) -> Result<IOTable, CliError> {
    let manifest_path = path.with_extension("json");
    let manifest: Option<TableManifest> = if manifest_path.exists() {
        let text = std::fs::read_to_string(&manifest_path)
            .map_err(CliError::io(&manifest_path))?;
        Some(serde_json::from_str(&text).map_err(|e| {
            CliError::Data(format!("{}: bad manifest: {e}", manifest_path.display()))
        })?)
    } else {
        None
    };
    let (country, year) = match &manifest {
        Some(m) => (m.country.clone(), m.year),
        None => (
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "unknown".to_string()),
            0,
        ),
    };
    let file = std::fs::File::open(path).map_err(CliError::io(path))?;
    parse_io_table(std::io::BufReader::new(file), &country, year).map_err(|source| {
        CliError::Table {
            path: path.to_path_buf(),
            source,
        }
    })
}

/// Writes `bytes` to `path` atomically, creating parent directories.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    let parent = parent.unwrap_or(Path::new("."));
    std::fs::create_dir_all(parent).map_err(CliError::io(parent))?;
    let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(CliError::io(parent))?;
    tmp.write_all(bytes).map_err(CliError::io(path))?;
    tmp.persist(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

// ---------------------------------------------------------------------------
// validate

#[derive(Debug)]
pub struct FileValidation {
    pub path: PathBuf,
    pub result: Result<ValidationOk, CliError>,
}

#[derive(Debug)]
pub struct ValidationOk {
    pub country: String,
    pub sectors: usize,
    pub max_residual: f64,
}

/// Parses each table and reports the production-identity residuals.
pub fn cmd_validate(inputs: &[PathBuf]) -> Vec<FileValidation> {
    inputs
        .iter()
        .map(|path| {
            let result = load_table(path).map(|table| ValidationOk {
                country: table.country().to_string(),
                sectors: table.sector_count(),
                max_residual: table.max_consistency_residual(),
            });
            FileValidation {
                path: path.clone(),
                result,
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// stats

#[derive(Debug)]
pub struct StatsOutcome {
    pub countries: Vec<String>,
}

/// Writes topology statistics: `stats/countries.csv` plus per-country node
/// exports. Errors propagate; a bad table fails the whole command.
pub fn cmd_stats(config: &StatsConfig) -> Result<StatsOutcome, CliError> {
    let mut loaded: Vec<(IOTable, ioshock::netstats::TopologySummary, NodeScores)> = Vec::new();
    for path in &config.inputs {
        let table = load_table(path)?;
        let net = table.network();
        let summary = topology_summary(&net, config.path_mode)
            .map_err(|e| CliError::Numeric(format!("{}: {e}", table.country())))?;
        let scores = netstats::node_scores(&net)
            .map_err(|e| CliError::Numeric(format!("{}: {e}", table.country())))?;
        loaded.push((table, summary, scores));
    }

    let stats_dir = config.out.join("stats");
    if config.format.csv() {
        let rows: Vec<CountryStatsRow<'_>> = loaded
            .iter()
            .map(|(table, summary, scores)| CountryStatsRow {
                table,
                summary,
                mode: config.path_mode,
                scores,
            })
            .collect();
        let mut buf = Vec::new();
        export::write_country_stats_csv(&rows, &mut buf)
            .map_err(|e| CliError::Data(e.to_string()))?;
        write_atomic(&stats_dir.join("countries.csv"), &buf)?;
    }
    for (table, summary, scores) in &loaded {
        let dir = stats_dir.join(table.country());
        if config.format.csv() {
            let mut buf = Vec::new();
            export::write_node_stats_csv(table, scores, &mut buf)
                .map_err(|e| CliError::Data(e.to_string()))?;
            write_atomic(&dir.join("nodes.csv"), &buf)?;
        }
        if config.format.json() {
            let file = CountryStatsFile::build(table, summary, config.path_mode, scores);
            write_atomic(&dir.join("nodes.json"), file.to_json_pretty().as_bytes())?;
        }
    }
    Ok(StatsOutcome {
        countries: loaded
            .iter()
            .map(|(t, _, _)| t.country().to_string())
            .collect(),
    })
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Debug)]
pub struct SimulateOutcome {
    pub succeeded: Vec<String>,
    /// Per-country or per-aggregate failures; the batch continues past them.
    pub failures: Vec<(String, CliError)>,
    pub cross_country_written: usize,
}

struct CountryRun {
    table: IOTable,
    hits: Option<ioshock::netstats::HitsScores>,
    reports: Vec<(SweepSpec, AvalancheReport)>,
}

/// Runs every configured parameter point of one model over every input
/// country and writes the report tree. Per-country failures are isolated:
/// the batch continues and the outcome lists them.
pub fn cmd_simulate(config: &SimulateConfig) -> Result<SimulateOutcome, CliError> {
    let metadata = config
        .metadata
        .as_deref()
        .map(MetadataTable::load)
        .transpose()?;
    let mut failures: Vec<(String, CliError)> = Vec::new();
    let mut runs: Vec<CountryRun> = Vec::new();

    for path in &config.inputs {
        let table = match load_table(path) {
            Ok(t) => t,
            Err(e) => {
                failures.push((path.display().to_string(), e));
                continue;
            }
        };
        let country = table.country().to_string();
        let seeds: Vec<SectorId> = if config.seeds.is_empty() {
            table.sector_ids().collect()
        } else {
            match config
                .seeds
                .iter()
                .map(|label| {
                    table.sector_by_label(label).ok_or_else(|| {
                        CliError::Data(format!("{country}: unknown seed sector {label:?}"))
                    })
                })
                .collect::<Result<Vec<_>, _>>()
            {
                Ok(seeds) => seeds,
                Err(e) => {
                    failures.push((country, e));
                    continue;
                }
            }
        };
        // centrality of the pristine network, embedded in reports for the
        // cross-country export; undefined weights just omit the scores
        let hits = netstats::hits_scores(&table.network(), HITS_TOL, HITS_MAX_ITERS).ok();

        let mut reports = Vec::new();
        let mut country_failed = false;
        for spec in &config.specs {
            let sweep = sweep_seeds(&table, spec, &seeds);
            match summarize(&sweep, &country) {
                Ok(report) => {
                    if let Err(e) =
                        write_country_report(config, &table, spec, &sweep, &report, hits.as_ref())
                    {
                        failures.push((country.clone(), e));
                        country_failed = true;
                        break;
                    }
                    reports.push((*spec, report));
                }
                Err(e) => {
                    let detail = sweep
                        .outcomes
                        .iter()
                        .find_map(|o| o.error().map(|err| err.to_string()))
                        .unwrap_or_else(|| e.to_string());
                    failures.push((
                        format!("{country} ({})", param_dir_name(spec)),
                        CliError::Numeric(detail),
                    ));
                }
            }
        }
        if !country_failed && !reports.is_empty() {
            runs.push(CountryRun {
                table,
                hits,
                reports,
            });
        }
    }

    // aggregate exports
    let extra_columns = metadata
        .as_ref()
        .map(|m| m.columns.clone())
        .unwrap_or_default();
    let mut summary_rows: Vec<SummaryRow> = Vec::new();
    for run in &runs {
        let extra = metadata
            .as_ref()
            .map(|m| m.extra_for(run.table.country()))
            .unwrap_or_default();
        for (_, report) in &run.reports {
            summary_rows.push(SummaryRow::from_report(
                report,
                run.table.labels(),
                extra.clone(),
            ));
        }
    }
    if config.format.csv() && !summary_rows.is_empty() {
        let mut buf = Vec::new();
        export::write_summary_csv(&summary_rows, &extra_columns, &mut buf)
            .map_err(|e| CliError::Data(e.to_string()))?;
        write_atomic(&config.out.join("summary.csv"), &buf)?;
    }

    let mut cross_country_written = 0;
    for (index, spec) in config.specs.iter().enumerate() {
        let name = format!("model{}_{}", spec.model_index(), param_dir_name(spec));
        if config.format.csv() {
            let rows: Vec<SummaryRow> = runs
                .iter()
                .filter_map(|run| {
                    run.reports.get(index).map(|(_, report)| {
                        SummaryRow::from_report(report, run.table.labels(), Vec::new())
                    })
                })
                .collect();
            if !rows.is_empty() {
                let mut buf = Vec::new();
                export::write_trigger_csv(&rows, &mut buf)
                    .map_err(|e| CliError::Data(e.to_string()))?;
                write_atomic(&config.out.join("triggers").join(format!("{name}.csv")), &buf)?;
            }
        }

        let entries: Vec<CountryCentrality<'_>> = runs
            .iter()
            .filter_map(|run| {
                let hits = run.hits.as_ref()?;
                let (_, report) = run.reports.get(index)?;
                Some(CountryCentrality {
                    report,
                    labels: run.table.labels(),
                    hub: &hits.hub,
                    authority: &hits.authority,
                })
            })
            .collect();
        if entries.len() >= 2 {
            match correlate_centrality(&entries) {
                Ok(correlation) => {
                    write_cross_country(config, &name, &correlation)?;
                    cross_country_written += 1;
                }
                Err(e) => failures.push((name.clone(), CliError::Data(e.to_string()))),
            }
        }
    }

    Ok(SimulateOutcome {
        succeeded: runs.iter().map(|r| r.table.country().to_string()).collect(),
        failures,
        cross_country_written,
    })
}

fn write_country_report(
    config: &SimulateConfig,
    table: &IOTable,
    spec: &SweepSpec,
    sweep: &ioshock::diffusion::SweepResult,
    report: &AvalancheReport,
    hits: Option<&ioshock::netstats::HitsScores>,
) -> Result<(), CliError> {
    let dir = config
        .out
        .join(table.country())
        .join(format!("model{}", spec.model_index()))
        .join(param_dir_name(spec));
    if config.format.json() {
        let mut file = CountryReportFile::build(report, table, hits);
        if config.timestamp {
            let now = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs().to_string())
                .unwrap_or_default();
            file.generated_at = Some(now);
        }
        write_atomic(&dir.join("report.json"), file.to_json_pretty().as_bytes())?;
    }
    if config.format.csv() {
        let mut buf = Vec::new();
        export::write_seed_csv(report, table, &mut buf)
            .map_err(|e| CliError::Data(e.to_string()))?;
        write_atomic(&dir.join("seeds.csv"), &buf)?;

        let mut buf = Vec::new();
        export::write_ccdf_csv(report, &mut buf).map_err(|e| CliError::Data(e.to_string()))?;
        write_atomic(&dir.join("ccdf.csv"), &buf)?;

        if matches!(spec, SweepSpec::Demand { .. }) {
            let columns: Vec<(usize, &[f64])> = sweep
                .outcomes
                .iter()
                .filter_map(|o| match o {
                    SeedOutcome::Demand(r) => Some((r.seed.0, r.delta_x.as_slice())),
                    _ => None,
                })
                .collect();
            let mut buf = Vec::new();
            export::write_delta_matrix_csv(table.labels(), &columns, &mut buf)
                .map_err(|e| CliError::Data(e.to_string()))?;
            write_atomic(&dir.join("delta_x.csv"), &buf)?;
        }
    }
    Ok(())
}

fn write_cross_country(
    config: &SimulateConfig,
    name: &str,
    correlation: &ioshock::analysis::CentralityCorrelation,
) -> Result<(), CliError> {
    let dir = config.out.join("cross_country");
    if config.format.csv() {
        let mut buf = Vec::new();
        export::write_cross_country_csv(correlation, &mut buf)
            .map_err(|e| CliError::Data(e.to_string()))?;
        write_atomic(&dir.join(format!("{name}.csv")), &buf)?;
    }
    if config.format.json() {
        let summary = CorrelationSummary::new(correlation);
        let mut json = serde_json::to_string_pretty(&summary)
            .map_err(|e| CliError::Data(e.to_string()))?;
        json.push('\n');
        write_atomic(
            &dir.join(format!("{name}.correlation.json")),
            json.as_bytes(),
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// report

#[derive(Debug)]
pub struct ReportOutcome {
    pub report_files: usize,
    pub groups: usize,
    pub cross_country_written: usize,
}

/// Scans an output tree for `report.json` files and rebuilds the aggregate
/// exports (summary, triggers, cross-country tables).
pub fn cmd_report(config: &ReportConfig) -> Result<ReportOutcome, CliError> {
    let metadata = config
        .metadata
        .as_deref()
        .map(MetadataTable::load)
        .transpose()?;
    let mut paths: Vec<PathBuf> = walkdir::WalkDir::new(&config.out)
        .into_iter()
        .filter_map(|entry| entry.ok())
        .filter(|entry| entry.file_type().is_file() && entry.file_name() == "report.json")
        .map(|entry| entry.into_path())
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Data(format!(
            "no report.json files under {}",
            config.out.display()
        )));
    }

    let mut groups: BTreeMap<String, Vec<CountryReportFile>> = BTreeMap::new();
    for path in &paths {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        let file = CountryReportFile::from_json(&text)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let spec = file.spec().ok_or_else(|| {
            CliError::Data(format!(
                "{}: inconsistent model/parameter fields",
                path.display()
            ))
        })?;
        let key = format!("model{}_{}", file.model, param_dir_name(&spec));
        groups.entry(key).or_default().push(file);
    }

    let extra_columns = metadata
        .as_ref()
        .map(|m| m.columns.clone())
        .unwrap_or_default();
    let mut summary_rows = Vec::new();
    let mut cross_country_written = 0;
    for (name, files) in &mut groups {
        files.sort_by(|a, b| a.country.cmp(&b.country));
        let rows: Vec<SummaryRow> = files
            .iter()
            .map(|f| {
                let extra = metadata
                    .as_ref()
                    .map(|m| m.extra_for(&f.country))
                    .unwrap_or_default();
                SummaryRow::from_file(f, extra)
            })
            .collect();
        summary_rows.extend(rows.iter().cloned());
        let mut buf = Vec::new();
        export::write_trigger_csv(&rows, &mut buf).map_err(|e| CliError::Data(e.to_string()))?;
        write_atomic(&config.out.join("triggers").join(format!("{name}.csv")), &buf)?;

        let reports: Vec<(usize, AvalancheReport)> = files
            .iter()
            .enumerate()
            .filter(|(_, f)| f.hub_scores.is_some() && f.authority_scores.is_some())
            .filter_map(|(i, f)| f.to_report().map(|r| (i, r)))
            .collect();
        let entries: Vec<CountryCentrality<'_>> = reports
            .iter()
            .map(|(i, report)| CountryCentrality {
                report,
                labels: &files[*i].labels,
                hub: files[*i].hub_scores.as_deref().unwrap(),
                authority: files[*i].authority_scores.as_deref().unwrap(),
            })
            .collect();
        if entries.len() >= 2 {
            let correlation = correlate_centrality(&entries)
                .map_err(|e| CliError::Data(e.to_string()))?;
            let dir = config.out.join("cross_country");
            let mut buf = Vec::new();
            export::write_cross_country_csv(&correlation, &mut buf)
                .map_err(|e| CliError::Data(e.to_string()))?;
            write_atomic(&dir.join(format!("{name}.csv")), &buf)?;
            let summary = CorrelationSummary::new(&correlation);
            let mut json = serde_json::to_string_pretty(&summary)
                .map_err(|e| CliError::Data(e.to_string()))?;
            json.push('\n');
            write_atomic(
                &dir.join(format!("{name}.correlation.json")),
                json.as_bytes(),
            )?;
            cross_country_written += 1;
        }
    }
    let mut buf = Vec::new();
    export::write_summary_csv(&summary_rows, &extra_columns, &mut buf)
        .map_err(|e| CliError::Data(e.to_string()))?;
    write_atomic(&config.out.join("summary.csv"), &buf)?;

    Ok(ReportOutcome {
        report_files: paths.len(),
        groups: groups.len(),
        cross_country_written,
    })
}

// ---------------------------------------------------------------------------
// metadata passthrough

/// Per-country metadata CSV: first column `country`, remaining columns are
/// passed through to summary exports verbatim.
#[derive(Debug, Clone)]
pub struct MetadataTable {
    pub columns: Vec<String>,
    rows: Vec<(String, Vec<String>)>,
}

impl MetadataTable {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let headers = reader
            .headers()
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
            .clone();
        let mut iter = headers.iter();
        if iter.next().map(|h| h.to_ascii_lowercase()) != Some("country".to_string()) {
            return Err(CliError::Data(format!(
                "{}: first metadata column must be 'country'",
                path.display()
            )));
        }
        let columns: Vec<String> = iter.map(|h| h.to_string()).collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            let mut cells = record.iter().map(|c| c.to_string());
            let country = cells.next().unwrap_or_default();
            let mut values: Vec<String> = cells.collect();
            values.resize(columns.len(), String::new());
            rows.push((country, values));
        }
        Ok(Self { columns, rows })
    }

    /// Passthrough cells for a country; empty cells when it is not listed.
    pub fn extra_for(&self, country: &str) -> Vec<String> {
        self.rows
            .iter()
            .find(|(c, _)| c == country)
            .map(|(_, values)| values.clone())
            .unwrap_or_else(|| vec![String::new(); self.columns.len()])
    }
}
