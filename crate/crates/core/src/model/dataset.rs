use std::borrow::Cow;
use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::RowId;

/// Label of the category that collects missing values.
pub const MISSING_LABEL: &str = "∅";

/// Dictionary code of a missing nominal value.
pub const MISSING_CODE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Nominal,
    Quantitative,
}

/// Dictionary-encoded strings or raw numbers. Missing numbers are NaN.
#[derive(Debug, Clone)]
pub enum ColumnData {
    Nominal {
        dictionary: Vec<String>,
        codes: Vec<u32>,
    },
    Quantitative(Vec<f64>),
}

/// A single cell, borrowed from its column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value<'a> {
    Missing,
    Text(&'a str),
    Number(f64),
}

impl Value<'_> {
    pub fn to_csv_field(self) -> Cow<'static, str> {
        match self {
            Value::Missing => Cow::Borrowed(""),
            Value::Text(s) => Cow::Owned(s.to_owned()),
            Value::Number(x) => Cow::Owned(format_number(x)),
        }
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_number(x: f64) -> String {
    format!("{x}")
}

#[derive(Debug)]
pub struct Column {
    name: String,
    data: ColumnData,
    stats: OnceLock<NumericStats>,
}

/// Cached summary of a quantitative column.
#[derive(Debug, Clone, Default)]
pub(crate) struct NumericStats {
    pub range: Option<(f64, f64)>,
    pub distinct: Vec<f64>,
}

impl Clone for Column {
    fn clone(&self) -> Self {
        Column {
            name: self.name.clone(),
            data: self.data.clone(),
            stats: OnceLock::new(),
        }
    }
}

impl PartialEq for Column {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.kind() == other.kind()
            && self.len() == other.len()
            && (0..self.len() as RowId).all(|r| match (self.value(r), other.value(r)) {
                (Value::Number(a), Value::Number(b)) => a.to_bits() == b.to_bits() || a == b,
                (a, b) => a == b,
            })
    }
}

impl Column {
    pub fn new(name: impl Into<String>, data: ColumnData) -> Self {
        Column {
            name: name.into(),
            data,
            stats: OnceLock::new(),
        }
    }

    /// Builds a nominal column; empty strings become missing.
    pub fn nominal<I, S>(name: impl Into<String>, values: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut dictionary = Vec::new();
        let mut index: HashMap<String, u32> = HashMap::new();
        let codes = values
            .into_iter()
            .map(|v| {
                let v = v.as_ref();
                if v.is_empty() {
                    return MISSING_CODE;
                }
                if let Some(&c) = index.get(v) {
                    return c;
                }
                let c = dictionary.len() as u32;
                dictionary.push(v.to_owned());
                index.insert(v.to_owned(), c);
                c
            })
            .collect();
        Column::new(name, ColumnData::Nominal { dictionary, codes })
    }

    pub fn quantitative(name: impl Into<String>, values: Vec<f64>) -> Self {
        Column::new(name, ColumnData::Quantitative(values))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn data(&self) -> &ColumnData {
        &self.data
    }

    pub fn kind(&self) -> ColumnKind {
        match self.data {
            ColumnData::Nominal { .. } => ColumnKind::Nominal,
            ColumnData::Quantitative(_) => ColumnKind::Quantitative,
        }
    }

    pub fn len(&self) -> usize {
        match &self.data {
            ColumnData::Nominal { codes, .. } => codes.len(),
            ColumnData::Quantitative(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, row: RowId) -> Value<'_> {
        match &self.data {
            ColumnData::Nominal { dictionary, codes } => match codes[row as usize] {
                MISSING_CODE => Value::Missing,
                c => Value::Text(&dictionary[c as usize]),
            },
            ColumnData::Quantitative(v) => {
                let x = v[row as usize];
                if x.is_nan() {
                    Value::Missing
                } else {
                    Value::Number(x)
                }
            }
        }
    }

    pub(crate) fn stats(&self) -> &NumericStats {
        self.stats.get_or_init(|| match &self.data {
            ColumnData::Quantitative(v) => {
                let mut distinct: Vec<f64> = v.iter().copied().filter(|x| !x.is_nan()).collect();
                distinct.sort_unstable_by(f64::total_cmp);
                distinct.dedup();
                let range = distinct.first().zip(distinct.last()).map(|(a, b)| (*a, *b));
                NumericStats { range, distinct }
            }
            ColumnData::Nominal { .. } => NumericStats::default(),
        })
    }

    /// Observed (min, max) of a quantitative column, ignoring missing values.
    pub fn numeric_range(&self) -> Option<(f64, f64)> {
        self.stats().range
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: RowId,
    pub target: RowId,
    pub weight: f64,
}

/// Immutable columnar table with an optional edge list between its rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    row_count: usize,
    edges: Option<Vec<Edge>>,
    key_column: Option<String>,
}

impl Dataset {
    pub fn new(columns: Vec<Column>, edges: Option<Vec<Edge>>) -> Result<Self> {
        let row_count = columns.first().map_or(0, Column::len);
        for c in &columns {
            if c.len() != row_count {
                return Err(Error::InvalidDataset(format!(
                    "column `{}` has {} values, expected {row_count}",
                    c.name(),
                    c.len()
                )));
            }
        }
        for (i, c) in columns.iter().enumerate() {
            if columns[..i].iter().any(|o| o.name() == c.name()) {
                return Err(Error::InvalidDataset(format!(
                    "duplicate column `{}`",
                    c.name()
                )));
            }
        }
        if row_count > RowId::MAX as usize {
            return Err(Error::InvalidDataset("too many rows".into()));
        }
        if let Some(edges) = &edges {
            for e in edges {
                if e.source as usize >= row_count || e.target as usize >= row_count {
                    return Err(Error::InvalidDataset(format!(
                        "edge {} -> {} out of range",
                        e.source, e.target
                    )));
                }
                if !(e.weight >= 0.0 && e.weight.is_finite()) {
                    return Err(Error::InvalidDataset(format!(
                        "edge weight {} is not a non-negative number",
                        e.weight
                    )));
                }
            }
        }
        Ok(Dataset {
            columns,
            row_count,
            edges,
            key_column: None,
        })
    }

    /// Names the column whose values identify rows in the edge table.
    pub fn with_key_column(mut self, name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if self.column(&name).is_none() {
            return Err(Error::UnknownAttribute(name));
        }
        self.key_column = Some(name);
        Ok(self)
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name() == name)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name() == name)
    }

    pub fn require_column(&self, name: &str) -> Result<&Column> {
        self.column(name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_owned()))
    }

    pub fn edges(&self) -> Option<&[Edge]> {
        self.edges.as_deref()
    }

    pub fn has_edges(&self) -> bool {
        self.edges.is_some()
    }

    pub fn key_column(&self) -> Option<&str> {
        self.key_column.as_deref()
    }

    pub fn summary(&self) -> DatasetSummary {
        DatasetSummary {
            row_count: self.row_count,
            columns: self
                .columns
                .iter()
                .map(|c| ColumnSummary {
                    name: c.name().to_owned(),
                    kind: c.kind(),
                })
                .collect(),
            has_edges: self.has_edges(),
            edge_count: self.edges.as_ref().map_or(0, Vec::len),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub name: String,
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub row_count: usize,
    pub columns: Vec<ColumnSummary>,
    pub has_edges: bool,
    pub edge_count: usize,
}
