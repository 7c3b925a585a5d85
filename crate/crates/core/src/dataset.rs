//! Typed tabular data with stable row identity.
//!
//! Columns are either categorical (string tokens, interned to integer codes)
//! or numerical (finite `f64`). Every cell may also be missing. Datasets are
//! immutable after construction; all downstream modules operate on projected
//! views that drop rows with missing values in the projected columns only.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("duplicate column name '{0}' in header")]
    DuplicateHeader(String),
    #[error("row {row} has {got} fields, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },
    #[error("column '{column}' row {row}: '{value}' is not a finite number")]
    BadNumber { column: String, row: usize, value: String },
    #[error("unknown column '{0}'")]
    UnknownColumn(String),
    #[error("projection requires at least one column")]
    EmptyProjection,
    #[error("schema line {line}: {msg}")]
    BadSchema { line: usize, msg: String },
}

/// The two supported column types. Fixed at load time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Categorical,
    Numerical,
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnKind::Categorical => write!(f, "categorical"),
            ColumnKind::Numerical => write!(f, "numerical"),
        }
    }
}

/// A single cell value, borrowed from its column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell<'a> {
    Category(&'a str),
    Real(f64),
    Missing,
}

impl fmt::Display for Cell<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Category(s) => write!(f, "{s}"),
            Cell::Real(v) => write!(f, "{v}"),
            Cell::Missing => Ok(()),
        }
    }
}

enum ColumnData {
    /// Token codes index into `pool`; `None` is a missing cell.
    Categorical { codes: Vec<Option<u32>>, pool: Vec<String> },
    Numerical(Vec<Option<f64>>),
}

/// A named, typed column. All non-missing cells match the column's kind.
pub struct Column {
    name: String,
    data: ColumnData,
}

impl Column {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ColumnKind {
        match self.data {
            ColumnData::Categorical { .. } => ColumnKind::Categorical,
            ColumnData::Numerical(_) => ColumnKind::Numerical,
        }
    }

    pub fn len(&self) -> usize {
        match &self.data {
            ColumnData::Categorical { codes, .. } => codes.len(),
            ColumnData::Numerical(cells) => cells.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell(&self, row: usize) -> Cell<'_> {
        match &self.data {
            ColumnData::Categorical { codes, pool } => match codes[row] {
                Some(code) => Cell::Category(&pool[code as usize]),
                None => Cell::Missing,
            },
            ColumnData::Numerical(cells) => match cells[row] {
                Some(v) => Cell::Real(v),
                None => Cell::Missing,
            },
        }
    }

    pub fn is_missing(&self, row: usize) -> bool {
        matches!(self.cell(row), Cell::Missing)
    }
}

/// Per-column kind declarations plus the token that marks a missing cell.
/// Columns not covered by the schema are type-inferred at load time.
#[derive(Debug, Clone, Default)]
pub struct Schema {
    kinds: HashMap<String, ColumnKind>,
    missing_tokens: HashMap<String, String>,
    /// Missing token for columns without their own entry. Defaults to "".
    pub default_missing_token: String,
}

impl Schema {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, column: &str, kind: ColumnKind) -> &mut Self {
        self.kinds.insert(column.to_string(), kind);
        self
    }

    pub fn declare_with_missing(&mut self, column: &str, kind: ColumnKind, missing: &str) -> &mut Self {
        self.kinds.insert(column.to_string(), kind);
        self.missing_tokens.insert(column.to_string(), missing.to_string());
        self
    }

    pub fn declared_kind(&self, column: &str) -> Option<ColumnKind> {
        self.kinds.get(column).copied()
    }

    fn missing_token(&self, column: &str) -> &str {
        self.missing_tokens
            .get(column)
            .map(String::as_str)
            .unwrap_or(&self.default_missing_token)
    }

    /// Parses the sidecar format: one `name:kind[:missing_token]` per line,
    /// `#` starts a comment line, blank lines ignored.
    pub fn parse(text: &str) -> Result<Self, DataError> {
        let mut schema = Schema::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.splitn(3, ':');
            let name = parts.next().unwrap_or("").trim();
            let kind = parts.next().map(str::trim);
            let missing = parts.next();
            if name.is_empty() {
                return Err(DataError::BadSchema { line: i + 1, msg: "empty column name".into() });
            }
            let kind = match kind {
                Some("categorical") | Some("cat") => ColumnKind::Categorical,
                Some("numerical") | Some("num") => ColumnKind::Numerical,
                Some(other) => {
                    return Err(DataError::BadSchema {
                        line: i + 1,
                        msg: format!("unknown kind '{other}' (expected categorical|numerical)"),
                    })
                }
                None => {
                    return Err(DataError::BadSchema { line: i + 1, msg: "missing kind".into() })
                }
            };
            match missing {
                Some(tok) => schema.declare_with_missing(name, kind, tok),
                None => schema.declare(name, kind),
            };
        }
        Ok(schema)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DataError> {
        let mut text = String::new();
        BufReader::new(File::open(path)?).read_to_string(&mut text)?;
        Self::parse(&text)
    }
}

/// An immutable table of named columns sharing one row count.
/// Row ids are 0-based positions and remain stable for the dataset's lifetime.
pub struct Dataset {
    columns: Vec<Column>,
    by_name: HashMap<String, usize>,
    n_rows: usize,
}

impl Dataset {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> impl Iterator<Item = &Column> {
        self.columns.iter()
    }

    pub fn column(&self, name: &str) -> Result<&Column, DataError> {
        self.by_name
            .get(name)
            .map(|&i| &self.columns[i])
            .ok_or_else(|| DataError::UnknownColumn(name.to_string()))
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.by_name.contains_key(name)
    }

    /// Loads an RFC-4180-style CSV with a header row. Columns declared in the
    /// schema get their declared kind; the rest are inferred: numerical iff
    /// every non-missing cell parses as a finite float, categorical otherwise.
    pub fn load_csv(path: impl AsRef<Path>, schema: Option<&Schema>) -> Result<Self, DataError> {
        let file = File::open(path.as_ref())?;
        Self::from_reader(BufReader::new(file), schema)
    }

    pub fn from_csv_str(text: &str, schema: Option<&Schema>) -> Result<Self, DataError> {
        Self::from_reader(text.as_bytes(), schema)
    }

    fn from_reader<R: Read>(reader: R, schema: Option<&Schema>) -> Result<Self, DataError> {
        let default_schema = Schema::default();
        let schema = schema.unwrap_or(&default_schema);

        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);

        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        {
            let mut seen = HashMap::new();
            for name in &headers {
                if seen.insert(name.clone(), ()).is_some() {
                    return Err(DataError::DuplicateHeader(name.clone()));
                }
            }
        }

        let mut raw: Vec<Vec<String>> = headers.iter().map(|_| Vec::new()).collect();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != headers.len() {
                return Err(DataError::RaggedRow {
                    row: i + 1,
                    got: record.len(),
                    expected: headers.len(),
                });
            }
            for (col, field) in raw.iter_mut().zip(record.iter()) {
                col.push(field.to_string());
            }
        }

        let n_rows = raw.first().map_or(0, Vec::len);
        let mut columns = Vec::with_capacity(headers.len());
        for (name, cells) in headers.into_iter().zip(raw) {
            let missing = schema.missing_token(&name);
            let kind = match schema.declared_kind(&name) {
                Some(kind) => kind,
                None => infer_kind(&cells, missing),
            };
            columns.push(build_column(name, kind, cells, missing)?);
        }

        Dataset::from_columns(columns, n_rows)
    }

    fn from_columns(columns: Vec<Column>, n_rows: usize) -> Result<Self, DataError> {
        let mut by_name = HashMap::new();
        for (i, col) in columns.iter().enumerate() {
            debug_assert_eq!(col.len(), n_rows);
            if by_name.insert(col.name.clone(), i).is_some() {
                return Err(DataError::DuplicateHeader(col.name.clone()));
            }
        }
        Ok(Dataset { columns, by_name, n_rows })
    }

    /// Writes the dataset back to CSV. Missing cells render as the column's
    /// missing token, so a reload with the same schema round-trips.
    pub fn write_csv(&self, path: impl AsRef<Path>, schema: Option<&Schema>) -> Result<(), DataError> {
        let file = File::create(path.as_ref())?;
        self.write_csv_to(BufWriter::new(file), schema)
    }

    pub fn to_csv_string(&self, schema: Option<&Schema>) -> Result<String, DataError> {
        let mut buf = Vec::new();
        self.write_csv_to(&mut buf, schema)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    fn write_csv_to<W: Write>(&self, writer: W, schema: Option<&Schema>) -> Result<(), DataError> {
        let default_schema = Schema::default();
        let schema = schema.unwrap_or(&default_schema);
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        let mut record = Vec::with_capacity(self.columns.len());
        for row in 0..self.n_rows {
            record.clear();
            for col in &self.columns {
                record.push(match col.cell(row) {
                    Cell::Category(s) => s.to_string(),
                    Cell::Real(v) => format_real(v),
                    Cell::Missing => schema.missing_token(&col.name).to_string(),
                });
            }
            wtr.write_record(&record)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Restricts the dataset to `vars`, dropping every row that has a missing
    /// cell in any of them. Row order is preserved; `kept_row_ids` maps view
    /// rows back to original row ids and is strictly increasing.
    pub fn project_complete(&self, vars: &[&str]) -> Result<Projection, DataError> {
        if vars.is_empty() {
            return Err(DataError::EmptyProjection);
        }
        let cols: Vec<&Column> = vars.iter().map(|v| self.column(v)).collect::<Result<_, _>>()?;
        let kept: Vec<usize> = (0..self.n_rows)
            .filter(|&row| cols.iter().all(|c| !c.is_missing(row)))
            .collect();

        let columns = cols
            .into_iter()
            .map(|col| {
                let data = match &col.data {
                    ColumnData::Numerical(cells) => {
                        ProjectedData::Numerical(kept.iter().map(|&r| cells[r].unwrap()).collect())
                    }
                    ColumnData::Categorical { codes, pool } => ProjectedData::Categorical {
                        codes: kept.iter().map(|&r| codes[r].unwrap()).collect(),
                        labels: pool.clone(),
                    },
                };
                ProjectedColumn { name: col.name.clone(), data }
            })
            .collect();

        Ok(Projection { columns, kept_row_ids: kept })
    }

    /// Builds a corrupted copy with `replace(row)` overriding cells of one
    /// column. Used by error injection; everything else is bit-identical.
    pub(crate) fn with_replaced_cells(
        &self,
        column: &str,
        replace: &HashMap<usize, f64>,
        replace_cat: &HashMap<usize, String>,
    ) -> Result<Dataset, DataError> {
        let target = self.column(column)?.name.clone();
        let columns = self
            .columns
            .iter()
            .map(|col| {
                let data = match &col.data {
                    ColumnData::Numerical(cells) => {
                        let mut cells = cells.clone();
                        if col.name == target {
                            for (&row, &v) in replace {
                                cells[row] = Some(v);
                            }
                        }
                        ColumnData::Numerical(cells)
                    }
                    ColumnData::Categorical { codes, pool } => {
                        let mut codes = codes.clone();
                        let mut pool = pool.clone();
                        if col.name == target {
                            for (row, tok) in replace_cat {
                                let code = intern(&mut pool, tok);
                                codes[*row] = Some(code);
                            }
                        }
                        ColumnData::Categorical { codes, pool }
                    }
                };
                Column { name: col.name.clone(), data }
            })
            .collect();
        Dataset::from_columns(columns, self.n_rows)
    }
}

/// Column slices from [`Dataset::project_complete`]: dense (no missing cells),
/// in original row order.
pub struct Projection {
    pub columns: Vec<ProjectedColumn>,
    pub kept_row_ids: Vec<usize>,
}

impl Projection {
    pub fn n_rows(&self) -> usize {
        self.kept_row_ids.len()
    }

    pub fn column(&self, name: &str) -> Option<&ProjectedColumn> {
        self.columns.iter().find(|c| c.name == name)
    }
}

pub struct ProjectedColumn {
    pub name: String,
    pub data: ProjectedData,
}

pub enum ProjectedData {
    Numerical(Vec<f64>),
    Categorical { codes: Vec<u32>, labels: Vec<String> },
}

impl ProjectedColumn {
    pub fn kind(&self) -> ColumnKind {
        match self.data {
            ProjectedData::Numerical(_) => ColumnKind::Numerical,
            ProjectedData::Categorical { .. } => ColumnKind::Categorical,
        }
    }

    pub fn as_numerical(&self) -> Option<&[f64]> {
        match &self.data {
            ProjectedData::Numerical(v) => Some(v),
            _ => None,
        }
    }
}

fn format_real(v: f64) -> String {
    // Shortest representation that round-trips through f64.
    let mut s = format!("{v}");
    if s.parse::<f64>() != Ok(v) {
        s = format!("{v:e}");
    }
    s
}

fn infer_kind(cells: &[String], missing: &str) -> ColumnKind {
    let all_numeric = cells
        .iter()
        .filter(|c| c.as_str() != missing && !c.trim().is_empty())
        .all(|c| c.trim().parse::<f64>().map_or(false, f64::is_finite));
    if all_numeric {
        ColumnKind::Numerical
    } else {
        ColumnKind::Categorical
    }
}

fn intern(pool: &mut Vec<String>, token: &str) -> u32 {
    match pool.iter().position(|t| t == token) {
        Some(i) => i as u32,
        None => {
            pool.push(token.to_string());
            (pool.len() - 1) as u32
        }
    }
}

fn build_column(name: String, kind: ColumnKind, cells: Vec<String>, missing: &str) -> Result<Column, DataError> {
    let data = match kind {
        ColumnKind::Numerical => {
            let mut out = Vec::with_capacity(cells.len());
            for (row, cell) in cells.iter().enumerate() {
                if cell.as_str() == missing || cell.trim().is_empty() {
                    out.push(None);
                    continue;
                }
                match cell.trim().parse::<f64>() {
                    Ok(v) if v.is_finite() => out.push(Some(v)),
                    _ => {
                        return Err(DataError::BadNumber { column: name, row: row + 1, value: cell.clone() })
                    }
                }
            }
            ColumnData::Numerical(out)
        }
        ColumnKind::Categorical => {
            let mut pool = Vec::new();
            let mut index: HashMap<String, u32> = HashMap::new();
            let mut codes = Vec::with_capacity(cells.len());
            for cell in &cells {
                let token = cell.trim();
                if cell.as_str() == missing || token.is_empty() {
                    codes.push(None);
                    continue;
                }
                let code = *index.entry(token.to_string()).or_insert_with(|| {
                    pool.push(token.to_string());
                    (pool.len() - 1) as u32
                });
                codes.push(Some(code));
            }
            ColumnData::Categorical { codes, pool }
        }
    };
    Ok(Column { name, data })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infers_kinds_by_parseability() {
        let ds = Dataset::from_csv_str("a,b\n1,x\n2,y\n", None).unwrap();
        assert_eq!(ds.n_rows(), 2);
        assert_eq!(ds.column("a").unwrap().kind(), ColumnKind::Numerical);
        assert_eq!(ds.column("b").unwrap().kind(), ColumnKind::Categorical);
    }

    #[test]
    fn empty_token_becomes_missing() {
        let ds = Dataset::from_csv_str("a\n1\n\n3\n", None).unwrap();
        let col = ds.column("a").unwrap();
        assert_eq!(col.cell(0), Cell::Real(1.0));
        assert_eq!(col.cell(1), Cell::Missing);
        assert_eq!(col.cell(2), Cell::Real(3.0));
    }

    #[test]
    fn duplicate_header_rejected() {
        let err = Dataset::from_csv_str("a,a\n1,2\n", None).unwrap_err();
        assert!(matches!(err, DataError::DuplicateHeader(_)));
    }

    #[test]
    fn ragged_row_rejected() {
        let err = Dataset::from_csv_str("a,b\n1,2\n3\n", None).unwrap_err();
        assert!(matches!(err, DataError::RaggedRow { row: 2, .. }));
    }

    #[test]
    fn custom_missing_token() {
        let mut schema = Schema::new();
        schema.declare_with_missing("a", ColumnKind::Numerical, "NA");
        let ds = Dataset::from_csv_str("a\n1\nNA\n", Some(&schema)).unwrap();
        assert_eq!(ds.column("a").unwrap().cell(1), Cell::Missing);
    }

    #[test]
    fn declared_kind_overrides_inference() {
        let mut schema = Schema::new();
        schema.declare("a", ColumnKind::Categorical);
        let ds = Dataset::from_csv_str("a\n1\n2\n", Some(&schema)).unwrap();
        assert_eq!(ds.column("a").unwrap().kind(), ColumnKind::Categorical);
        assert_eq!(ds.column("a").unwrap().cell(0), Cell::Category("1"));
    }

    #[test]
    fn declared_numerical_rejects_garbage() {
        let mut schema = Schema::new();
        schema.declare("a", ColumnKind::Numerical);
        let err = Dataset::from_csv_str("a\nfoo\n", Some(&schema)).unwrap_err();
        assert!(matches!(err, DataError::BadNumber { .. }));
    }

    #[test]
    fn nan_token_is_not_numeric() {
        let ds = Dataset::from_csv_str("a\nNaN\n1\n", None).unwrap();
        assert_eq!(ds.column("a").unwrap().kind(), ColumnKind::Categorical);
    }

    #[test]
    fn project_drops_rows_with_missing() {
        let ds = Dataset::from_csv_str("a,b\n1,x\n,y\n3,z\n", None).unwrap();
        let proj = ds.project_complete(&["a", "b"]).unwrap();
        assert_eq!(proj.kept_row_ids, vec![0, 2]);
        assert_eq!(proj.column("a").unwrap().as_numerical().unwrap(), &[1.0, 3.0]);
    }

    #[test]
    fn project_complete_identity_when_no_missing() {
        let ds = Dataset::from_csv_str("a,b\n1,x\n2,y\n", None).unwrap();
        let proj = ds.project_complete(&["a"]).unwrap();
        assert_eq!(proj.kept_row_ids, vec![0, 1]);
    }

    #[test]
    fn project_rejects_empty_and_unknown() {
        let ds = Dataset::from_csv_str("a\n1\n", None).unwrap();
        assert!(matches!(ds.project_complete(&[]), Err(DataError::EmptyProjection)));
        assert!(matches!(ds.project_complete(&["zz"]), Err(DataError::UnknownColumn(_))));
    }

    #[test]
    fn kept_row_ids_strictly_increasing() {
        let ds = Dataset::from_csv_str("a\n1\n\n2\n\n3\n", None).unwrap();
        let proj = ds.project_complete(&["a"]).unwrap();
        assert!(proj.kept_row_ids.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn csv_round_trip() {
        let text = "a,b,c\n1,x,0.5\n,y y,\n3,\"q,z\",2e-3\n";
        let ds = Dataset::from_csv_str(text, None).unwrap();
        let written = ds.to_csv_string(None).unwrap();
        let ds2 = Dataset::from_csv_str(&written, None).unwrap();
        assert_eq!(ds.n_rows(), ds2.n_rows());
        for col in ds.columns() {
            let col2 = ds2.column(col.name()).unwrap();
            assert_eq!(col.kind(), col2.kind());
            for row in 0..ds.n_rows() {
                assert_eq!(col.cell(row), col2.cell(row), "{}[{row}]", col.name());
            }
        }
    }

    #[test]
    fn schema_sidecar_parses() {
        let schema = Schema::parse("# comment\na:numerical\nb:categorical:NA\n").unwrap();
        assert_eq!(schema.declared_kind("a"), Some(ColumnKind::Numerical));
        assert_eq!(schema.declared_kind("b"), Some(ColumnKind::Categorical));
        assert_eq!(schema.missing_token("b"), "NA");
        assert_eq!(schema.missing_token("a"), "");
    }

    #[test]
    fn schema_rejects_bad_kind() {
        assert!(matches!(Schema::parse("a:float\n"), Err(DataError::BadSchema { line: 1, .. })));
    }
}
