//! CSV node/edge tables in, CSV out.
//!
//! A column is quantitative iff every non-empty cell parses as a finite
//! number; overrides win. Edge rows reference nodes through a key column,
//! which is always read as nominal text.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, IngestError, Result};
use crate::model::dataset::MISSING_CODE;
use crate::model::{Column, ColumnData, ColumnKind, Dataset, Edge, RowId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeColumns {
    pub source: String,
    pub target: String,
    /// Weight column; when unset, a column named `weight` is used if present.
    #[serde(default)]
    pub weight: Option<String>,
}

impl Default for EdgeColumns {
    fn default() -> Self {
        EdgeColumns {
            source: "source".into(),
            target: "target".into(),
            weight: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestOptions {
    pub edge_columns: EdgeColumns,
    pub key_column: Option<String>,
    pub type_overrides: BTreeMap<String, ColumnKind>,
    /// Reservoir-sample this many node rows.
    pub sample: Option<usize>,
    pub sample_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestConfig {
    pub node_file: PathBuf,
    #[serde(default)]
    pub edge_file: Option<PathBuf>,
    #[serde(flatten)]
    pub options: IngestOptions,
}

impl IngestConfig {
    pub fn nodes(path: impl Into<PathBuf>) -> Self {
        IngestConfig {
            node_file: path.into(),
            edge_file: None,
            options: IngestOptions::default(),
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>, IngestError> {
    File::open(path).map(BufReader::new).map_err(|source| IngestError::Io {
        file: path.display().to_string(),
        source,
    })
}

pub fn ingest_csv(config: &IngestConfig) -> Result<Dataset> {
    let nodes = open(&config.node_file)?;
    let edges = config.edge_file.as_deref().map(open).transpose()?;
    ingest_readers(nodes, edges, &config.options)
}

pub fn ingest_readers<N: Read, E: Read>(
    nodes: N,
    edges: Option<E>,
    options: &IngestOptions,
) -> Result<Dataset> {
    if edges.is_some() && options.key_column.is_none() {
        return Err(IngestError::KeyColumnRequired.into());
    }
    let mut overrides = options.type_overrides.clone();
    if edges.is_some() {
        if let Some(key) = &options.key_column {
            overrides.insert(key.clone(), ColumnKind::Nominal);
        }
    }
    let columns = read_nodes(nodes, &overrides, options.sample, options.sample_seed)?;
    let key_index = match &options.key_column {
        Some(k) => Some(
            columns
                .iter()
                .position(|c| c.name() == k)
                .ok_or_else(|| IngestError::MissingColumn {
                    file: "nodes".into(),
                    column: k.clone(),
                })?,
        ),
        None => None,
    };
    let edges = match (edges, key_index) {
        (Some(reader), Some(k)) => Some(read_edges(reader, &columns[k], options)?),
        _ => None,
    };
    let dataset = Dataset::new(columns, edges)?;
    match &options.key_column {
        Some(k) => dataset.with_key_column(k.clone()),
        None => Ok(dataset),
    }
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(r)
}

fn parse_error(file: &str, e: csv::Error) -> IngestError {
    let line = e.position().map_or(0, |p| p.line());
    let (field, message) = match e.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            (*len as usize, format!("expected {expected_len} fields, found {len}"))
        }
        csv::ErrorKind::Utf8 { err, .. } => (err.field() + 1, err.to_string()),
        _ => (0, e.to_string()),
    };
    IngestError::Parse {
        file: file.into(),
        line,
        field,
        message,
    }
}

fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

struct ColumnBuilder {
    name: String,
    forced: Option<ColumnKind>,
    dictionary: Vec<String>,
    index: HashMap<String, u32>,
    codes: Vec<u32>,
    numbers: Option<Vec<f64>>,
}

impl ColumnBuilder {
    fn new(name: String, forced: Option<ColumnKind>) -> Self {
        ColumnBuilder {
            name,
            forced,
            dictionary: Vec::new(),
            index: HashMap::new(),
            codes: Vec::new(),
            numbers: (forced != Some(ColumnKind::Nominal)).then(Vec::new),
        }
    }

    fn push(&mut self, cell: &str) {
        if let Some(nums) = &mut self.numbers {
            if cell.is_empty() {
                nums.push(f64::NAN);
            } else if let Some(x) = parse_number(cell) {
                nums.push(x);
            } else if self.forced == Some(ColumnKind::Quantitative) {
                nums.push(f64::NAN);
            } else {
                self.numbers = None;
            }
        }
        if self.forced == Some(ColumnKind::Quantitative) {
            return;
        }
        let code = if cell.is_empty() {
            MISSING_CODE
        } else if let Some(&c) = self.index.get(cell) {
            c
        } else {
            let c = self.dictionary.len() as u32;
            self.dictionary.push(cell.to_owned());
            self.index.insert(cell.to_owned(), c);
            c
        };
        self.codes.push(code);
    }

    fn finish(self) -> Column {
        match self.numbers {
            Some(nums) if self.forced != Some(ColumnKind::Nominal) => Column::quantitative(self.name, nums),
            _ => Column::new(
                self.name,
                ColumnData::Nominal {
                    dictionary: self.dictionary,
                    codes: self.codes,
                },
            ),
        }
    }
}

fn read_nodes<R: Read>(
    reader: R,
    overrides: &BTreeMap<String, ColumnKind>,
    sample: Option<usize>,
    seed: u64,
) -> Result<Vec<Column>> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(|e| parse_error("nodes", e))?.clone();
    let mut builders: Vec<ColumnBuilder> = headers
        .iter()
        .map(|h| ColumnBuilder::new(h.to_owned(), overrides.get(h).copied()))
        .collect();
    for name in overrides.keys() {
        if !headers.iter().any(|h| h == name) {
            return Err(IngestError::MissingColumn {
                file: "nodes".into(),
                column: name.clone(),
            }
            .into());
        }
    }
    let mut record = csv::StringRecord::new();
    match sample {
        None => {
            while rdr
                .read_record(&mut record)
                .map_err(|e| parse_error("nodes", e))?
            {
                for (b, cell) in builders.iter_mut().zip(record.iter()) {
                    b.push(cell);
                }
            }
        }
        Some(n) => {
            // Algorithm R, then restore file order.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut reservoir: Vec<(u64, csv::StringRecord)> = Vec::with_capacity(n);
            let mut seen = 0u64;
            while rdr
                .read_record(&mut record)
                .map_err(|e| parse_error("nodes", e))?
            {
                if reservoir.len() < n {
                    reservoir.push((seen, record.clone()));
                } else {
                    let j = rng.random_range(0..=seen);
                    if (j as usize) < n {
                        reservoir[j as usize] = (seen, record.clone());
                    }
                }
                seen += 1;
            }
            reservoir.sort_by_key(|(i, _)| *i);
            for (_, rec) in &reservoir {
                for (b, cell) in builders.iter_mut().zip(rec.iter()) {
                    b.push(cell);
                }
            }
        }
    }
    Ok(builders.into_iter().map(ColumnBuilder::finish).collect())
}

fn read_edges<R: Read>(reader: R, key: &Column, options: &IngestOptions) -> Result<Vec<Edge>> {
    let ColumnData::Nominal { dictionary, codes } = key.data() else {
        unreachable!("key column is read as nominal");
    };
    let mut row_of_code = vec![RowId::MAX; dictionary.len()];
    for (row, &code) in codes.iter().enumerate() {
        if code == MISSING_CODE {
            continue;
        }
        if row_of_code[code as usize] != RowId::MAX {
            return Err(IngestError::DuplicateKey {
                key: dictionary[code as usize].clone(),
                line: row as u64 + 2,
            }
            .into());
        }
        row_of_code[code as usize] = row as RowId;
    }
    let lookup: HashMap<&str, RowId> = dictionary
        .iter()
        .map(String::as_str)
        .zip(row_of_code.iter().copied())
        .collect();

    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(|e| parse_error("edges", e))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn {
                file: "edges".into(),
                column: name.to_owned(),
            })
    };
    let cols = &options.edge_columns;
    let (si, ti) = (find(&cols.source)?, find(&cols.target)?);
    let wi = match &cols.weight {
        Some(w) => Some(find(w)?),
        None => headers.iter().position(|h| h == "weight"),
    };
    let sampled = options.sample.is_some();
    let mut edges = Vec::new();
    let mut record = csv::StringRecord::new();
    while rdr
        .read_record(&mut record)
        .map_err(|e| parse_error("edges", e))?
    {
        let line = record.position().map_or(0, |p| p.line());
        let resolve = |k: &str| -> Result<Option<RowId>, IngestError> {
            match lookup.get(k) {
                Some(&r) => Ok(Some(r)),
                None if sampled => Ok(None),
                None => Err(IngestError::UnknownKey {
                    key: k.to_owned(),
                    line,
                }),
            }
        };
        let (Some(source), Some(target)) = (resolve(&record[si])?, resolve(&record[ti])?) else {
            continue;
        };
        let weight = match wi.map(|i| &record[i]) {
            None | Some("") => 1.0,
            Some(w) => match parse_number(w) {
                Some(x) if x >= 0.0 => x,
                _ => {
                    return Err(IngestError::BadWeight {
                        value: w.to_owned(),
                        line,
                    }
                    .into())
                }
            },
        };
        edges.push(Edge {
            source,
            target,
            weight,
        });
    }
    Ok(edges)
}

/// Computed column appended to an export.
pub struct ExtraColumn<'a> {
    pub name: String,
    pub value: Box<dyn Fn(RowId) -> String + 'a>,
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out)
}

fn csv_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Writes the given rows with every original column plus `extras`.
pub fn write_rows_csv<W: Write>(
    dataset: &Dataset,
    rows: &[RowId],
    extras: &[ExtraColumn<'_>],
    out: W,
) -> Result<()> {
    let mut w = csv_writer(out);
    let header: Vec<&str> = dataset
        .columns()
        .iter()
        .map(Column::name)
        .chain(extras.iter().map(|e| e.name.as_str()))
        .collect();
    w.write_record(&header).map_err(csv_io)?;
    let mut num = String::new();
    for &r in rows {
        for c in dataset.columns() {
            match c.data() {
                ColumnData::Nominal { dictionary, codes } => match codes[r as usize] {
                    MISSING_CODE => w.write_field(""),
                    code => w.write_field(&dictionary[code as usize]),
                },
                ColumnData::Quantitative(v) => {
                    let x = v[r as usize];
                    num.clear();
                    if !x.is_nan() {
                        use std::fmt::Write as _;
                        let _ = write!(num, "{x}");
                    }
                    w.write_field(&num)
                }
            }
            .map_err(csv_io)?;
        }
        for e in extras {
            w.write_field((e.value)(r)).map_err(csv_io)?;
        }
        w.write_record(None::<&[u8]>).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_nodes_csv<W: Write>(dataset: &Dataset, out: W) -> Result<()> {
    let rows: Vec<RowId> = (0..dataset.row_count() as RowId).collect();
    write_rows_csv(dataset, &rows, &[], out)
}

/// Writes `source,target,weight` using the key column's values.
pub fn write_edges_csv<W: Write>(dataset: &Dataset, out: W) -> Result<()> {
    let edges = dataset.edges().ok_or(Error::NoEdges)?;
    let key = dataset
        .key_column()
        .and_then(|k| dataset.column(k))
        .ok_or_else(|| Error::InvalidDataset("edges without a key column".into()))?;
    let mut w = csv_writer(out);
    w.write_record(["source", "target", "weight"]).map_err(csv_io)?;
    for e in edges {
        let s = key.value(e.source).to_csv_field();
        let t = key.value(e.target).to_csv_field();
        w.write_record([s.as_ref(), t.as_ref(), &format!("{}", e.weight)])
            .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}
