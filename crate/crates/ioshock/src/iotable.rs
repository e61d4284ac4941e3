//! Country input-output tables: parsing, validation, and the weighted
//! directed network view.
//!
//! The on-disk format is one CSV per country-year. Header row:
//! `sector,<label_1>,...,<label_S>,final_demand[,production]`, then S data
//! rows; row i carries the flows from sector i to every column sector, the
//! final demand `d_i`, and optionally the stated production `x_i`. Decimal
//! point, no thousands separators, UTF-8. A stated production column is
//! authoritative: it is checked against `x = Z 1 + d` (not recomputed), so
//! data errors surface instead of being silently repaired.

use std::collections::HashSet;
use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::DenseMatrix;

/// Per-row relative tolerance for the production identity `x = Z 1 + d`.
pub const CONSISTENCY_REL_TOL: f64 = 1e-6;

/// Index of a sector within one table. Dense in `[0, S)`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct SectorId(pub usize);

impl std::fmt::Display for SectorId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("missing header row")]
    MissingHeader,
    #[error("bad header: {0}")]
    BadHeader(String),
    #[error("table has {found} sectors; at least 2 are required")]
    TooFewSectors { found: usize },
    #[error("duplicate sector label {label:?}")]
    DuplicateLabel { label: String },
    #[error("data row {row}: label {found:?} does not match header label {expected:?}")]
    RowLabelMismatch {
        row: usize,
        expected: String,
        found: String,
    },
    #[error("data row {row}: expected {expected} fields, found {found}")]
    FieldCount {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("data row {row}, column {col}: cannot parse {value:?} as a number")]
    ParseValue {
        row: usize,
        col: usize,
        value: String,
    },
    #[error("data row {row}, column {col}: negative value {value}")]
    NegativeValue { row: usize, col: usize, value: f64 },
    #[error("data row {row}, column {col}: non-finite value")]
    NonFiniteValue { row: usize, col: usize },
    #[error("expected {expected} data rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error(
        "sector {sector} ({label:?}): stated production {stated} disagrees with flows + final demand {computed} (relative residual {residual:e} > {tol:e})"
    )]
    Inconsistent {
        sector: usize,
        label: String,
        stated: f64,
        computed: f64,
        residual: f64,
        tol: f64,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// One country's sectoral economy: flows `Z`, final demand `d`, production
/// `x`, and sector labels. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct IOTable {
    country: String,
    year: i32,
    labels: Vec<String>,
    flows: DenseMatrix,
    final_demand: Vec<f64>,
    production: Vec<f64>,
}

impl IOTable {
    /// Validates and assembles a table. When `production` is `None` it is
    /// computed from the identity `x = Z 1 + d`; when stated, it is checked
    /// against that identity within [`CONSISTENCY_REL_TOL`] per row.
    pub fn new(
        country: impl Into<String>,
        year: i32,
        labels: Vec<String>,
        flows: DenseMatrix,
        final_demand: Vec<f64>,
        production: Option<Vec<f64>>,
    ) -> Result<Self, TableError> {
        let s = labels.len();
        if s < 2 {
            return Err(TableError::TooFewSectors { found: s });
        }
        if !flows.is_square() || flows.rows() != s || final_demand.len() != s {
            return Err(TableError::Dimension(format!(
                "{s} labels, {}x{} flow matrix, {} demand entries",
                flows.rows(),
                flows.cols(),
                final_demand.len()
            )));
        }
        let mut seen = HashSet::new();
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(TableError::DuplicateLabel {
                    label: label.clone(),
                });
            }
        }
        for i in 0..s {
            for j in 0..s {
                let v = flows.get(i, j);
                if v < 0.0 {
                    return Err(TableError::NegativeValue {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
        }
        for (i, &d) in final_demand.iter().enumerate() {
            if !d.is_finite() {
                return Err(TableError::NonFiniteValue { row: i, col: s });
            }
            if d < 0.0 {
                return Err(TableError::NegativeValue {
                    row: i,
                    col: s,
                    value: d,
                });
            }
        }
        let computed = production_from_flows(&flows, &final_demand)?;
        let production = match production {
            None => computed,
            Some(stated) => {
                if stated.len() != s {
                    return Err(TableError::Dimension(format!(
                        "production has {} entries, expected {s}",
                        stated.len()
                    )));
                }
                for (i, &x) in stated.iter().enumerate() {
                    if !x.is_finite() {
                        return Err(TableError::NonFiniteValue { row: i, col: s + 1 });
                    }
                    if x < 0.0 {
                        return Err(TableError::NegativeValue {
                            row: i,
                            col: s + 1,
                            value: x,
                        });
                    }
                    let residual = (x - computed[i]).abs() / 1.0f64.max(x.abs());
                    if residual > CONSISTENCY_REL_TOL {
                        return Err(TableError::Inconsistent {
                            sector: i,
                            label: labels[i].clone(),
                            stated: x,
                            computed: computed[i],
                            residual,
                            tol: CONSISTENCY_REL_TOL,
                        });
                    }
                }
                stated
            }
        };
        Ok(Self {
            country: country.into(),
            year,
            labels,
            flows,
            final_demand,
            production,
        })
    }

    pub fn country(&self) -> &str {
        &self.country
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn sector_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, sector: SectorId) -> &str {
        &self.labels[sector.0]
    }

    pub fn sector_ids(&self) -> impl Iterator<Item = SectorId> {
        (0..self.labels.len()).map(SectorId)
    }

    /// Resolves a sector by its label.
    pub fn sector_by_label(&self, label: &str) -> Option<SectorId> {
        self.labels.iter().position(|l| l == label).map(SectorId)
    }

    pub fn flows(&self) -> &DenseMatrix {
        &self.flows
    }

    pub fn final_demand(&self) -> &[f64] {
        &self.final_demand
    }

    pub fn production(&self) -> &[f64] {
        &self.production
    }

    /// Largest per-row relative residual of `x - Z 1 - d`.
    pub fn max_consistency_residual(&self) -> f64 {
        let computed = production_from_flows(&self.flows, &self.final_demand)
            .expect("dimensions validated at construction");
        self.production
            .iter()
            .zip(&computed)
            .map(|(x, c)| (x - c).abs() / 1.0f64.max(x.abs()))
            .fold(0.0, f64::max)
    }

    /// Weighted directed network view of the flow matrix.
    pub fn network(&self) -> IONetwork {
        IONetwork::from_weights(self.flows.clone())
    }
}

/// Production from the identity `x_i = sum_j z_ij + d_i`.
pub fn production_from_flows(
    flows: &DenseMatrix,
    final_demand: &[f64],
) -> Result<Vec<f64>, TableError> {
    if !flows.is_square() || flows.rows() != final_demand.len() {
        return Err(TableError::Dimension(format!(
            "flow matrix is {}x{} but demand has length {}",
            flows.rows(),
            flows.cols(),
            final_demand.len()
        )));
    }
    Ok((0..flows.rows())
        .map(|i| flows.row_sum(i) + final_demand[i])
        .collect())
}

/// Weighted directed graph view of a flow matrix: binary adjacency excludes
/// self loops, which are tracked separately, and sectors with zero total
/// incident weight are flagged isolated. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct IONetwork {
    weights: DenseMatrix,
    adjacency: Vec<bool>,
    self_loop: Vec<bool>,
    isolated: Vec<bool>,
}

impl IONetwork {
    pub fn from_weights(weights: DenseMatrix) -> Self {
        assert!(weights.is_square(), "network weights must be square");
        let s = weights.rows();
        let mut adjacency = vec![false; s * s];
        let mut self_loop = vec![false; s];
        let mut isolated = vec![true; s];
        for i in 0..s {
            for j in 0..s {
                let w = weights.get(i, j);
                if w > 0.0 {
                    isolated[i] = false;
                    isolated[j] = false;
                    if i == j {
                        self_loop[i] = true;
                    } else {
                        adjacency[i * s + j] = true;
                    }
                }
            }
        }
        Self {
            weights,
            adjacency,
            self_loop,
            isolated,
        }
    }

    pub fn node_count(&self) -> usize {
        self.weights.rows()
    }

    pub fn weights(&self) -> &DenseMatrix {
        &self.weights
    }

    /// Binary adjacency, self loops excluded.
    #[inline]
    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.adjacency[from * self.node_count() + to]
    }

    pub fn has_self_loop(&self, node: usize) -> bool {
        self.self_loop[node]
    }

    pub fn is_isolated(&self, node: usize) -> bool {
        self.isolated[node]
    }

    pub fn isolated_count(&self) -> usize {
        self.isolated.iter().filter(|i| **i).count()
    }

    /// Directed edges (self loops excluded) with their weights.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let s = self.node_count();
        (0..s).flat_map(move |i| {
            (0..s)
                .filter(move |&j| self.has_edge(i, j))
                .map(move |j| (i, j, self.weights.get(i, j)))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().filter(|e| **e).count()
    }
}

/// Parses a table from CSV following the schema in the module docs.
pub fn parse_io_table(
    reader: impl io::Read,
    country: &str,
    year: i32,
) -> Result<IOTable, TableError> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = csv_reader.records();

    let header = match records.next() {
        Some(r) => r?,
        None => return Err(TableError::MissingHeader),
    };
    let fields: Vec<&str> = header.iter().collect();
    if fields.first().map(|f| f.to_ascii_lowercase()) != Some("sector".to_string()) {
        return Err(TableError::BadHeader(format!(
            "first header cell must be 'sector', found {:?}",
            fields.first().unwrap_or(&"")
        )));
    }
    let has_production =
        matches!(fields.last(), Some(last) if last.eq_ignore_ascii_case("production"));
    let tail = if has_production { 2 } else { 1 };
    if fields.len() < 1 + 2 + tail {
        return Err(TableError::TooFewSectors {
            found: fields.len().saturating_sub(1 + tail),
        });
    }
    let demand_col = fields.len() - tail;
    if !fields[demand_col].eq_ignore_ascii_case("final_demand") {
        return Err(TableError::BadHeader(format!(
            "expected 'final_demand' in column {demand_col}, found {:?}",
            fields[demand_col]
        )));
    }
    let labels: Vec<String> = fields[1..demand_col].iter().map(|f| f.to_string()).collect();
    let s = labels.len();

    let expected_fields = 1 + s + tail;
    let mut flows = DenseMatrix::zeros(s, s);
    let mut final_demand = Vec::with_capacity(s);
    let mut production = if has_production {
        Some(Vec::with_capacity(s))
    } else {
        None
    };

    let mut row = 0usize;
    for record in records {
        let record = record?;
        if record.len() == 1 && record[0].is_empty() {
            continue; // trailing blank line
        }
        if row >= s {
            return Err(TableError::RowCount {
                expected: s,
                found: row + 1,
            });
        }
        if record.len() != expected_fields {
            return Err(TableError::FieldCount {
                row,
                expected: expected_fields,
                found: record.len(),
            });
        }
        let label = &record[0];
        if label != labels[row] {
            return Err(TableError::RowLabelMismatch {
                row,
                expected: labels[row].clone(),
                found: label.to_string(),
            });
        }
        let parse = |col: usize, raw: &str| -> Result<f64, TableError> {
            raw.parse::<f64>().map_err(|_| TableError::ParseValue {
                row,
                col,
                value: raw.to_string(),
            })
        };
        for j in 0..s {
            let v = parse(j, &record[1 + j])?;
            if !v.is_finite() {
                return Err(TableError::NonFiniteValue { row, col: j });
            }
            if v < 0.0 {
                return Err(TableError::NegativeValue {
                    row,
                    col: j,
                    value: v,
                });
            }
            flows.set(row, j, v);
        }
        final_demand.push(parse(s, &record[1 + s])?);
        if let Some(prod) = production.as_mut() {
            prod.push(parse(s + 1, &record[2 + s])?);
        }
        row += 1;
    }
    if row != s {
        return Err(TableError::RowCount {
            expected: s,
            found: row,
        });
    }
    IOTable::new(country, year, labels, flows, final_demand, production)
}

/// Serializes a table to the CSV schema, always including the production
/// column. Values are written with shortest round-trip formatting, so
/// parse -> write -> parse is bit-exact.
pub fn write_io_table(table: &IOTable, writer: impl io::Write) -> Result<(), TableError> {
    let mut w = csv::Writer::from_writer(writer);
    let s = table.sector_count();
    let mut header = Vec::with_capacity(s + 3);
    header.push("sector".to_string());
    header.extend(table.labels().iter().cloned());
    header.push("final_demand".to_string());
    header.push("production".to_string());
    w.write_record(&header)?;
    for i in 0..s {
        let mut record = Vec::with_capacity(s + 3);
        record.push(table.labels()[i].clone());
        for j in 0..s {
            record.push(table.flows().get(i, j).to_string());
        }
        record.push(table.final_demand()[i].to_string());
        record.push(table.production()[i].to_string());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Sidecar manifest carried next to a table CSV.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct TableManifest {
    pub country: String,
    pub year: i32,
    #[serde(default)]
    pub currency: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_sector_csv() -> &'static str {
        "sector,A,B,final_demand\nA,0,10,20\nB,5,0,10\n"
    }

    #[test]
    fn parses_two_sector_table_and_derives_production() {
        let table = parse_io_table(two_sector_csv().as_bytes(), "XX", 2005).unwrap();
        assert_eq!(table.sector_count(), 2);
        assert_eq!(table.production(), &[30.0, 15.0]);
        assert_eq!(table.final_demand(), &[20.0, 10.0]);
        assert_eq!(table.flows().get(0, 1), 10.0);
    }

    #[test]
    fn stated_production_is_kept_when_consistent() {
        let csv = "sector,A,B,final_demand,production\nA,0,10,20,30.000001\nB,5,0,10,15\n";
        let table = parse_io_table(csv.as_bytes(), "XX", 2005).unwrap();
        // authoritative stated value, not the recomputed one
        assert_eq!(table.production()[0], 30.000001);
    }

    #[test]
    fn inconsistent_production_is_rejected() {
        let csv = "sector,A,B,final_demand,production\nA,0,10,20,31\nB,5,0,10,15\n";
        let err = parse_io_table(csv.as_bytes(), "XX", 2005).unwrap_err();
        match err {
            TableError::Inconsistent { sector, .. } => assert_eq!(sector, 0),
            other => panic!("expected consistency error, got {other}"),
        }
    }

    #[test]
    fn negative_flow_reports_position() {
        let csv = "sector,A,B,final_demand\nA,0,-1,20\nB,5,0,10\n";
        let err = parse_io_table(csv.as_bytes(), "XX", 2005).unwrap_err();
        match err {
            TableError::NegativeValue { row, col, value } => {
                assert_eq!((row, col), (0, 1));
                assert_eq!(value, -1.0);
            }
            other => panic!("expected negative-value error, got {other}"),
        }
    }

    #[test]
    fn wrong_field_count_reports_row() {
        let csv = "sector,A,B,final_demand\nA,0,10,20\nB,5,0\n";
        let err = parse_io_table(csv.as_bytes(), "XX", 2005).unwrap_err();
        assert!(matches!(err, TableError::FieldCount { row: 1, .. }));
    }

    #[test]
    fn single_sector_table_is_rejected() {
        let csv = "sector,A,final_demand\nA,0,20\n";
        let err = parse_io_table(csv.as_bytes(), "XX", 2005).unwrap_err();
        assert!(matches!(err, TableError::TooFewSectors { .. }));
    }

    #[test]
    fn missing_final_demand_header_is_rejected() {
        let csv = "sector,A,B,demand\nA,0,10,20\nB,5,0,10\n";
        let err = parse_io_table(csv.as_bytes(), "XX", 2005).unwrap_err();
        assert!(matches!(err, TableError::BadHeader(_)));
    }

    #[test]
    fn row_label_mismatch_is_rejected() {
        let csv = "sector,A,B,final_demand\nA,0,10,20\nC,5,0,10\n";
        let err = parse_io_table(csv.as_bytes(), "XX", 2005).unwrap_err();
        assert!(matches!(err, TableError::RowLabelMismatch { row: 1, .. }));
    }

    #[test]
    fn duplicate_labels_are_rejected() {
        let csv = "sector,A,A,final_demand\nA,0,10,20\nA,5,0,10\n";
        let err = parse_io_table(csv.as_bytes(), "XX", 2005).unwrap_err();
        assert!(matches!(err, TableError::DuplicateLabel { .. }));
    }

    #[test]
    fn production_helper_examples() {
        let z = DenseMatrix::zeros(3, 3);
        assert_eq!(
            production_from_flows(&z, &[1.0, 2.0, 3.0]).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
        let z = DenseMatrix::from_rows(&[vec![0.0, 10.0], vec![5.0, 0.0]]).unwrap();
        assert_eq!(
            production_from_flows(&z, &[20.0, 10.0]).unwrap(),
            vec![30.0, 15.0]
        );
        // three-sector cycle
        let z = DenseMatrix::from_rows(&[
            vec![0.0, 10.0, 0.0],
            vec![0.0, 0.0, 10.0],
            vec![10.0, 0.0, 0.0],
        ])
        .unwrap();
        assert_eq!(
            production_from_flows(&z, &[5.0, 5.0, 5.0]).unwrap(),
            vec![15.0, 15.0, 15.0]
        );
    }

    #[test]
    fn network_view_self_loops_only() {
        let z = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let net = IONetwork::from_weights(z);
        assert_eq!(net.edge_count(), 0);
        assert!(net.has_self_loop(0) && net.has_self_loop(1));
        assert!(!net.is_isolated(0) && !net.is_isolated(1));
    }

    #[test]
    fn network_view_two_sector() {
        let z = DenseMatrix::from_rows(&[vec![0.0, 10.0], vec![5.0, 0.0]]).unwrap();
        let net = IONetwork::from_weights(z);
        assert!(net.has_edge(0, 1) && net.has_edge(1, 0));
        assert!(!net.has_self_loop(0));
        assert_eq!(net.edge_count(), 2);
    }

    #[test]
    fn network_view_flags_isolated_sector() {
        let z = DenseMatrix::from_rows(&[
            vec![0.0, 3.0, 0.0],
            vec![4.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        let net = IONetwork::from_weights(z);
        assert!(net.is_isolated(2));
        assert!(!net.is_isolated(0));
        assert_eq!(net.isolated_count(), 1);
    }

    #[test]
    fn no_edge_where_flow_is_zero() {
        let z = DenseMatrix::from_rows(&[vec![0.0, 0.0], vec![7.0, 0.0]]).unwrap();
        let net = IONetwork::from_weights(z);
        assert!(!net.has_edge(0, 1));
        assert!(net.has_edge(1, 0));
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let csv = "sector,A,B,final_demand,production\nA,0.125,10.7,20.3,31.125\nB,5.055,0,10,15.055\n";
        let table = parse_io_table(csv.as_bytes(), "XX", 2005).unwrap();
        let mut buf = Vec::new();
        write_io_table(&table, &mut buf).unwrap();
        let reparsed = parse_io_table(buf.as_slice(), "XX", 2005).unwrap();
        assert_eq!(table, reparsed);
    }
}
