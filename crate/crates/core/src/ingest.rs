//! CSV ingestion into typed column tables.
//!
//! A column is numeric when every cell that is neither a missing token nor a
//! declared not-applicable code parses as a number; otherwise it is
//! categorical. Original and synthetic files loaded together through
//! [`load_dataset`] share one inferred schema, so a column never ends up
//! numeric in one file and categorical in another.

use std::borrow::Cow;
use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabulate::Q_SEPARATOR;

/// Label used for missing cells wherever a level has to be rendered.
pub const MISSING_LABEL: &str = "NA";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Categorical,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    /// Numeric sentinels kept as their own category (e.g. `-8` for "not applicable").
    pub na_codes: Vec<f64>,
    pub missing_tokens: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    /// Index into the owning column's label registry.
    Label(u32),
    Number(f64),
    Code(f64),
    Missing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    schema: ColumnSchema,
    labels: Vec<String>,
    cells: Vec<Cell>,
}

/// Renders a number the way it appears in levels and CSV output.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        // avoid "-0"
        return "0".to_string();
    }
    format!("{v}")
}

impl Column {
    pub fn categorical<I, S>(name: impl Into<String>, values: I) -> Result<Self>
    where
        I: IntoIterator<Item = Option<S>>,
        S: AsRef<str>,
    {
        let name = name.into();
        let mut registry = LabelRegistry::default();
        let mut cells = Vec::new();
        for v in values {
            match v {
                Some(s) => {
                    let s = s.as_ref();
                    if s.contains(Q_SEPARATOR) {
                        return Err(Error::Schema(format!(
                            "column `{name}`: level `{s}` contains the separator `{Q_SEPARATOR}`"
                        )));
                    }
                    cells.push(Cell::Label(registry.intern(s)));
                }
                None => cells.push(Cell::Missing),
            }
        }
        Ok(Column {
            schema: ColumnSchema {
                name,
                kind: ColumnKind::Categorical,
                na_codes: Vec::new(),
                missing_tokens: default_missing_tokens(),
            },
            labels: registry.labels,
            cells,
        })
    }

    /// Numeric column; values equal to one of `na_codes` become code cells.
    pub fn numeric<I>(name: impl Into<String>, values: I, na_codes: Vec<f64>) -> Self
    where
        I: IntoIterator<Item = Option<f64>>,
    {
        let cells = values
            .into_iter()
            .map(|v| match v {
                None => Cell::Missing,
                Some(x) if na_codes.contains(&x) => Cell::Code(x),
                Some(x) => Cell::Number(x),
            })
            .collect();
        Column {
            schema: ColumnSchema {
                name: name.into(),
                kind: ColumnKind::Numeric,
                na_codes,
                missing_tokens: default_missing_tokens(),
            },
            labels: Vec::new(),
            cells,
        }
    }

    pub(crate) fn from_parts(schema: ColumnSchema, labels: Vec<String>, cells: Vec<Cell>) -> Self {
        Column { schema, labels, cells }
    }

    pub fn name(&self) -> &str {
        &self.schema.name
    }

    pub fn kind(&self) -> ColumnKind {
        self.schema.kind
    }

    pub fn schema(&self) -> &ColumnSchema {
        &self.schema
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn is_missing(&self, row: usize) -> bool {
        matches!(self.cells[row], Cell::Missing)
    }

    /// Level string of a cell as used in tabulation ("NA" for missing).
    pub fn level(&self, row: usize) -> Cow<'_, str> {
        match self.cells[row] {
            Cell::Label(id) => Cow::Borrowed(self.labels[id as usize].as_str()),
            Cell::Number(v) | Cell::Code(v) => Cow::Owned(format_number(v)),
            Cell::Missing => Cow::Borrowed(MISSING_LABEL),
        }
    }

    /// Text written to CSV for a cell.
    fn csv_text(&self, row: usize) -> Cow<'_, str> {
        match self.cells[row] {
            Cell::Missing => Cow::Borrowed(self.schema.missing_tokens.first().map(String::as_str).unwrap_or("")),
            _ => self.level(row),
        }
    }

    pub(crate) fn select(&self, rows: &[usize]) -> Column {
        Column {
            schema: self.schema.clone(),
            labels: self.labels.clone(),
            cells: rows.iter().map(|&r| self.cells[r]).collect(),
        }
    }
}

#[derive(Default)]
struct LabelRegistry {
    labels: Vec<String>,
    index: HashMap<String, u32>,
}

impl LabelRegistry {
    fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.index.get(s) {
            return id;
        }
        let id = self.labels.len() as u32;
        self.labels.push(s.to_string());
        self.index.insert(s.to_string(), id);
        id
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnTable {
    columns: Vec<Column>,
    n_rows: usize,
}

impl ColumnTable {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let n_rows = columns.first().map(Column::len).unwrap_or(0);
        let mut seen = std::collections::HashSet::new();
        for c in &columns {
            if c.len() != n_rows {
                return Err(Error::Schema(format!(
                    "column `{}` has {} cells, expected {n_rows}",
                    c.name(),
                    c.len()
                )));
            }
            if !seen.insert(c.name()) {
                return Err(Error::Schema(format!("duplicate column `{}`", c.name())));
            }
        }
        Ok(ColumnTable { columns, n_rows })
    }

    /// Builds a table from in-memory string records using the same typing rules as CSV loading.
    pub fn from_records<S: AsRef<str>>(header: &[S], rows: &[Vec<S>], options: &LoadOptions) -> Result<Self> {
        let raw = RawTable {
            path: PathBuf::from("<memory>"),
            header: header.iter().map(|h| h.as_ref().to_string()).collect(),
            rows: rows
                .iter()
                .map(|r| r.iter().map(|c| c.as_ref().to_string()).collect())
                .collect(),
        };
        raw.check_shape()?;
        let kinds = raw.infer_kinds(options)?;
        raw.into_table(options, &kinds)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn names(&self) -> Vec<&str> {
        self.columns.iter().map(Column::name).collect()
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name() == name)
    }

    pub fn require(&self, name: &str) -> Result<&Column> {
        self.column(name)
            .ok_or_else(|| Error::Schema(format!("unknown column `{name}`")))
    }

    pub fn schema(&self) -> Vec<&ColumnSchema> {
        self.columns.iter().map(Column::schema).collect()
    }

    /// Copy of the table restricted to `rows`, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> ColumnTable {
        ColumnTable {
            columns: self.columns.iter().map(|c| c.select(rows)).collect(),
            n_rows: rows.len(),
        }
    }

    /// Replaces the column with the same name.
    pub fn replace_column(&mut self, column: Column) -> Result<()> {
        if column.len() != self.n_rows {
            return Err(Error::Schema(format!(
                "replacement column `{}` has {} cells, expected {}",
                column.name(),
                column.len(),
                self.n_rows
            )));
        }
        let slot = self
            .columns
            .iter_mut()
            .find(|c| c.name() == column.name())
            .ok_or_else(|| Error::Schema(format!("unknown column `{}`", column.name())))?;
        *slot = column;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticSet {
    replicates: Vec<ColumnTable>,
}

impl SyntheticSet {
    pub fn new(replicates: Vec<ColumnTable>) -> Result<Self> {
        let first = replicates
            .first()
            .ok_or_else(|| Error::Empty("synthetic set needs at least one replicate".into()))?;
        let names = first.names();
        let kinds: Vec<_> = first.columns().iter().map(Column::kind).collect();
        for (i, r) in replicates.iter().enumerate().skip(1) {
            if r.names() != names {
                return Err(Error::Schema(format!(
                    "replicate {} columns {:?} differ from replicate 1 columns {:?}",
                    i + 1,
                    r.names(),
                    names
                )));
            }
            let rk: Vec<_> = r.columns().iter().map(Column::kind).collect();
            if rk != kinds {
                return Err(Error::Schema(format!(
                    "replicate {} column types differ from replicate 1",
                    i + 1
                )));
            }
        }
        Ok(SyntheticSet { replicates })
    }

    pub fn replicates(&self) -> &[ColumnTable] {
        &self.replicates
    }

    pub fn m(&self) -> usize {
        self.replicates.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnHint {
    pub name: String,
    #[serde(default)]
    pub kind: Option<ColumnKind>,
    #[serde(default)]
    pub na_codes: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub delimiter: u8,
    pub missing_tokens: Vec<String>,
    pub hints: Vec<ColumnHint>,
}

pub fn default_missing_tokens() -> Vec<String> {
    vec![String::new(), MISSING_LABEL.to_string()]
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            delimiter: b',',
            missing_tokens: default_missing_tokens(),
            hints: Vec::new(),
        }
    }
}

impl LoadOptions {
    fn hint(&self, name: &str) -> Option<&ColumnHint> {
        self.hints.iter().find(|h| h.name == name)
    }

    fn is_missing(&self, s: &str) -> bool {
        let t = s.trim();
        self.missing_tokens.iter().any(|m| m == s || m == t)
    }
}

/// Strict number parsing: optional sign, digits with an optional fractional
/// part, optional exponent. `inf`, `nan` and friends are rejected.
pub fn parse_number(s: &str) -> Option<f64> {
    let t = s.trim();
    let body = t.strip_prefix(['+', '-']).unwrap_or(t);
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], Some(&body[i + 1..])),
        None => (body, None),
    };
    let (int, frac) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    let digits = |x: &str| x.bytes().all(|b| b.is_ascii_digit());
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !digits(int) || !digits(frac) {
        return None;
    }
    if let Some(e) = exponent {
        let e = e.strip_prefix(['+', '-']).unwrap_or(e);
        if e.is_empty() || !digits(e) {
            return None;
        }
    }
    t.parse().ok()
}

struct RawTable {
    path: PathBuf,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl RawTable {
    fn read(path: &Path, options: &LoadOptions) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(options.delimiter)
            .has_headers(false)
            .flexible(true)
            .from_reader(std::io::BufReader::new(file));
        let mut records = reader.records();
        let header: Vec<String> = match records.next() {
            Some(rec) => rec
                .map_err(|source| Error::Csv {
                    path: path.to_path_buf(),
                    source,
                })?
                .iter()
                .map(|h| h.trim().to_string())
                .collect(),
            None => {
                return Err(Error::Header {
                    path: path.to_path_buf(),
                    message: "file is empty, expected a header row".into(),
                })
            }
        };
        let mut rows = Vec::new();
        for rec in records {
            let rec = rec.map_err(|source| Error::Csv {
                path: path.to_path_buf(),
                source,
            })?;
            rows.push(rec.iter().map(str::to_string).collect());
        }
        let raw = RawTable {
            path: path.to_path_buf(),
            header,
            rows,
        };
        raw.check_shape()?;
        Ok(raw)
    }

    fn check_shape(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for h in &self.header {
            if h.is_empty() {
                return Err(Error::Header {
                    path: self.path.clone(),
                    message: "empty column name".into(),
                });
            }
            if !seen.insert(h.as_str()) {
                return Err(Error::Header {
                    path: self.path.clone(),
                    message: format!("duplicate column `{h}`"),
                });
            }
        }
        for (i, r) in self.rows.iter().enumerate() {
            if r.len() != self.header.len() {
                return Err(Error::RaggedRow {
                    path: self.path.clone(),
                    row: i + 2,
                    expected: self.header.len(),
                    found: r.len(),
                });
            }
        }
        Ok(())
    }

    fn check_hints(&self, options: &LoadOptions) -> Result<()> {
        for h in &options.hints {
            if !self.header.contains(&h.name) {
                return Err(Error::Header {
                    path: self.path.clone(),
                    message: format!("schema names column `{}` which is not in the header", h.name),
                });
            }
        }
        Ok(())
    }

    fn infer_kinds(&self, options: &LoadOptions) -> Result<Vec<ColumnKind>> {
        self.check_hints(options)?;
        Ok((0..self.header.len())
            .map(|c| {
                let name = &self.header[c];
                if let Some(kind) = options.hint(name).and_then(|h| h.kind) {
                    return kind;
                }
                let numeric = self.rows.iter().all(|r| {
                    let v = &r[c];
                    options.is_missing(v) || parse_number(v).is_some()
                });
                if numeric {
                    ColumnKind::Numeric
                } else {
                    ColumnKind::Categorical
                }
            })
            .collect())
    }

    fn into_table(self, options: &LoadOptions, kinds: &[ColumnKind]) -> Result<ColumnTable> {
        let n_rows = self.rows.len();
        let mut columns = Vec::with_capacity(self.header.len());
        for (c, name) in self.header.iter().enumerate() {
            let na_codes = options.hint(name).map(|h| h.na_codes.clone()).unwrap_or_default();
            let kind = kinds[c];
            if kind == ColumnKind::Categorical && !na_codes.is_empty() {
                return Err(Error::Schema(format!(
                    "{}: na_codes given for column `{name}`, which is not numeric",
                    self.path.display()
                )));
            }
            let schema = ColumnSchema {
                name: name.clone(),
                kind,
                na_codes,
                missing_tokens: options.missing_tokens.clone(),
            };
            let mut registry = LabelRegistry::default();
            let mut cells = Vec::with_capacity(n_rows);
            for (r, row) in self.rows.iter().enumerate() {
                let v = row[c].as_str();
                let cell = if options.is_missing(v) {
                    Cell::Missing
                } else {
                    match kind {
                        ColumnKind::Numeric => match parse_number(v) {
                            Some(x) if schema.na_codes.contains(&x) => Cell::Code(x),
                            Some(x) => Cell::Number(x),
                            None => {
                                return Err(Error::Cell {
                                    path: self.path.clone(),
                                    row: r + 2,
                                    column: name.clone(),
                                    message: format!("`{v}` is not a number"),
                                })
                            }
                        },
                        ColumnKind::Categorical => {
                            if v.contains(Q_SEPARATOR) {
                                return Err(Error::Cell {
                                    path: self.path.clone(),
                                    row: r + 2,
                                    column: name.clone(),
                                    message: format!("level `{v}` contains the separator `{Q_SEPARATOR}`"),
                                });
                            }
                            Cell::Label(registry.intern(v))
                        }
                    }
                };
                cells.push(cell);
            }
            columns.push(Column::from_parts(schema, registry.labels, cells));
        }
        Ok(ColumnTable { columns, n_rows })
    }
}

pub fn load_table(path: impl AsRef<Path>, options: &LoadOptions) -> Result<ColumnTable> {
    let raw = RawTable::read(path.as_ref(), options)?;
    let kinds = raw.infer_kinds(options)?;
    raw.into_table(options, &kinds)
}

pub fn load_synthetic_set<P: AsRef<Path>>(paths: &[P], options: &LoadOptions) -> Result<SyntheticSet> {
    if paths.is_empty() {
        return Err(Error::Config("at least one synthetic file is required".into()));
    }
    let raws = paths
        .iter()
        .map(|p| RawTable::read(p.as_ref(), options))
        .collect::<Result<Vec<_>>>()?;
    check_same_header(&raws)?;
    let kinds = unify_kinds(&raws, options)?;
    let tables = raws
        .into_iter()
        .map(|r| r.into_table(options, &kinds))
        .collect::<Result<Vec<_>>>()?;
    SyntheticSet::new(tables)
}

/// Loads the original table and every synthetic replicate with one shared
/// type inference, so levels render identically across files.
pub fn load_dataset<P: AsRef<Path>>(
    orig: impl AsRef<Path>,
    syn: &[P],
    options: &LoadOptions,
) -> Result<(ColumnTable, SyntheticSet)> {
    if syn.is_empty() {
        return Err(Error::Config("at least one synthetic file is required".into()));
    }
    let orig_raw = RawTable::read(orig.as_ref(), options)?;
    let syn_raws = syn
        .iter()
        .map(|p| RawTable::read(p.as_ref(), options))
        .collect::<Result<Vec<_>>>()?;
    check_same_header(&syn_raws)?;

    let mut kinds = HashMap::<String, ColumnKind>::new();
    for raw in std::iter::once(&orig_raw).chain(syn_raws.iter()) {
        for (name, kind) in raw.header.iter().zip(raw.infer_kinds(options)?) {
            let e = kinds.entry(name.clone()).or_insert(kind);
            if kind == ColumnKind::Categorical {
                *e = ColumnKind::Categorical;
            }
        }
    }
    let kinds_for = |raw: &RawTable| -> Vec<ColumnKind> { raw.header.iter().map(|h| kinds[h]).collect() };
    let orig_kinds = kinds_for(&orig_raw);
    let orig_table = orig_raw.into_table(options, &orig_kinds)?;
    let syn_tables = syn_raws
        .into_iter()
        .map(|r| {
            let k = kinds_for(&r);
            r.into_table(options, &k)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((orig_table, SyntheticSet::new(syn_tables)?))
}

fn check_same_header(raws: &[RawTable]) -> Result<()> {
    if let Some(first) = raws.first() {
        for r in &raws[1..] {
            if r.header != first.header {
                return Err(Error::Schema(format!(
                    "column mismatch across replicates: {} has {:?}, {} has {:?}",
                    first.path.display(),
                    first.header,
                    r.path.display(),
                    r.header
                )));
            }
        }
    }
    Ok(())
}

fn unify_kinds(raws: &[RawTable], options: &LoadOptions) -> Result<Vec<ColumnKind>> {
    let mut kinds = raws[0].infer_kinds(options)?;
    for r in &raws[1..] {
        for (k, other) in kinds.iter_mut().zip(r.infer_kinds(options)?) {
            if other == ColumnKind::Categorical {
                *k = ColumnKind::Categorical;
            }
        }
    }
    Ok(kinds)
}

pub fn write_table<W: Write>(table: &ColumnTable, writer: W, delimiter: u8) -> Result<()> {
    let to_err = |e: csv::Error| Error::Csv {
        path: PathBuf::from("<output>"),
        source: e,
    };
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(writer);
    w.write_record(table.names()).map_err(to_err)?;
    for row in 0..table.n_rows() {
        w.write_record(table.columns().iter().map(|c| c.csv_text(row).into_owned()))
            .map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

pub fn write_table_path(table: &ColumnTable, path: impl AsRef<Path>, delimiter: u8) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_table(table, std::io::BufWriter::new(file), delimiter)
}
