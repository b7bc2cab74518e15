//! Attribute configuration and the row-to-category mapping derived from it.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::dataset::{format_number, Column, ColumnData, ColumnKind, MISSING_CODE, MISSING_LABEL};
use crate::model::{Pile, RowId};

/// Bin count used when a quantitative attribute is pivoted without explicit bins.
pub const DEFAULT_BIN_COUNT: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "order", content = "categories", rename_all = "snake_case")]
pub enum SortOrder {
    Alphabetical,
    Numerical,
    Explicit(Vec<String>),
}

/// Bins are `[e_i, e_{i+1})`; the last one is open towards +∞.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Binning {
    EqualWidth { bins: usize },
    ExplicitEdges { edges: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: ColumnKind,
    pub sort_order: SortOrder,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binning: Option<Binning>,
}

impl AttributeSpec {
    pub fn default_for(column: &Column) -> Self {
        let kind = column.kind();
        AttributeSpec {
            name: column.name().to_owned(),
            kind,
            sort_order: match kind {
                ColumnKind::Nominal => SortOrder::Alphabetical,
                ColumnKind::Quantitative => SortOrder::Numerical,
            },
            binning: None,
        }
    }

    pub fn validate(&self, column: &Column) -> Result<()> {
        if self.name != column.name() {
            return Err(Error::InvalidSpec(format!(
                "spec for `{}` applied to column `{}`",
                self.name,
                column.name()
            )));
        }
        match (column.kind(), self.kind) {
            (ColumnKind::Nominal, ColumnKind::Quantitative) => {
                return Err(Error::InvalidSpec(format!(
                    "nominal column `{}` cannot be treated as quantitative",
                    self.name
                )))
            }
            (_, ColumnKind::Nominal) if self.binning.is_some() => {
                return Err(Error::InvalidSpec(format!(
                    "binning requires a quantitative view of `{}`",
                    self.name
                )))
            }
            _ => {}
        }
        match &self.binning {
            Some(Binning::EqualWidth { bins: 0 }) => {
                return Err(Error::InvalidBins("bin count must be positive".into()))
            }
            Some(Binning::ExplicitEdges { edges }) => validate_edges(edges, column)?,
            _ => {}
        }
        if let SortOrder::Explicit(order) = &self.sort_order {
            let raw = RawCategories::build(column, self);
            let expected: HashSet<&str> = raw.labels.iter().map(String::as_str).collect();
            let given: HashSet<&str> = order.iter().map(String::as_str).collect();
            if given.len() != order.len() || given != expected {
                return Err(Error::InvalidSortOrder(format!(
                    "explicit order for `{}` must be a permutation of its {} categories",
                    self.name,
                    expected.len()
                )));
            }
        }
        Ok(())
    }
}

fn validate_edges(edges: &[f64], column: &Column) -> Result<()> {
    if edges.is_empty() {
        return Err(Error::InvalidBins("at least one edge is required".into()));
    }
    if edges.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidBins("edges must be finite".into()));
    }
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidBins("edges must be strictly increasing".into()));
    }
    if let Some((min, _)) = column.numeric_range() {
        if min < edges[0] {
            return Err(Error::InvalidBins(format!(
                "value {} lies below the first edge {}",
                format_number(min),
                format_number(edges[0])
            )));
        }
    }
    Ok(())
}

/// Resolves the bin edges a quantitative column is pivoted with.
pub fn resolve_edges(column: &Column, binning: Option<&Binning>) -> Vec<f64> {
    match binning {
        Some(Binning::ExplicitEdges { edges }) => edges.clone(),
        Some(Binning::EqualWidth { bins }) => equal_width_edges(column, *bins),
        None => equal_width_edges(column, DEFAULT_BIN_COUNT),
    }
}

fn equal_width_edges(column: &Column, bins: usize) -> Vec<f64> {
    let Some((min, max)) = column.numeric_range() else {
        return Vec::new();
    };
    if min == max || bins <= 1 {
        return vec![min];
    }
    let span = max - min;
    let mut edges: Vec<f64> = (0..bins)
        .map(|i| min + span * i as f64 / bins as f64)
        .collect();
    edges.dedup();
    edges
}

pub fn bin_label(edges: &[f64], i: usize) -> String {
    match edges.get(i + 1) {
        Some(hi) => format!("[{}, {})", format_number(edges[i]), format_number(*hi)),
        None => format!("[{}, ∞)", format_number(edges[i])),
    }
}

/// Index of the bin holding `x`; values below the first edge land in bin 0.
fn bin_of(edges: &[f64], x: f64) -> usize {
    edges.partition_point(|e| *e <= x).saturating_sub(1)
}

/// Category labels before sorting and piling, with the raw-code mapping.
struct RawCategories {
    labels: Vec<String>,
    /// Sort key for numerical ordering.
    numeric: Vec<Option<f64>>,
    mapping: RawMapping,
}

enum RawMapping {
    Dictionary,
    Distinct(Vec<f64>),
    Bins(Vec<f64>),
}

impl RawCategories {
    fn build(column: &Column, spec: &AttributeSpec) -> Self {
        match (column.data(), spec.kind) {
            (ColumnData::Nominal { dictionary, .. }, _) => RawCategories {
                labels: dictionary.clone(),
                numeric: dictionary.iter().map(|s| s.trim().parse::<f64>().ok()).collect(),
                mapping: RawMapping::Dictionary,
            },
            (ColumnData::Quantitative(_), ColumnKind::Nominal) => {
                let distinct = column.stats().distinct.clone();
                RawCategories {
                    labels: distinct.iter().map(|x| format_number(*x)).collect(),
                    numeric: distinct.iter().map(|x| Some(*x)).collect(),
                    mapping: RawMapping::Distinct(distinct),
                }
            }
            (ColumnData::Quantitative(_), ColumnKind::Quantitative) => {
                let edges = resolve_edges(column, spec.binning.as_ref());
                RawCategories {
                    labels: (0..edges.len()).map(|i| bin_label(&edges, i)).collect(),
                    numeric: edges.iter().map(|e| Some(*e)).collect(),
                    mapping: RawMapping::Bins(edges),
                }
            }
        }
    }

    fn sorted_order(&self, order: &SortOrder) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.labels.len()).collect();
        let alpha = |a: &usize, b: &usize| self.labels[*a].cmp(&self.labels[*b]);
        match order {
            SortOrder::Alphabetical => idx.sort_by(alpha),
            SortOrder::Numerical => idx.sort_by(|a, b| match (self.numeric[*a], self.numeric[*b]) {
                (Some(x), Some(y)) => x.total_cmp(&y).then_with(|| alpha(a, b)),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => alpha(a, b),
            }),
            SortOrder::Explicit(list) => {
                let pos: HashMap<&str, usize> =
                    list.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
                idx.sort_by(|a, b| {
                    let pa = pos.get(self.labels[*a].as_str()).copied().unwrap_or(usize::MAX);
                    let pb = pos.get(self.labels[*b].as_str()).copied().unwrap_or(usize::MAX);
                    pa.cmp(&pb).then_with(|| alpha(a, b))
                });
            }
        }
        idx
    }
}

/// Ordered categories of one attribute within one substrate, piles applied.
///
/// Every row maps to exactly one category; missing values map to the
/// trailing [`MISSING_LABEL`] category (or the pile that absorbed it).
#[derive(Debug, Clone)]
pub struct Categories<'a> {
    attribute: String,
    column: &'a Column,
    labels: Vec<String>,
    piled: Vec<bool>,
    /// Raw code -> final category; the last slot is the missing category.
    raw_to_cat: Vec<u32>,
    mapping: Mapping,
}

#[derive(Debug, Clone)]
enum Mapping {
    Dictionary,
    Distinct(Vec<f64>),
    Bins(Vec<f64>),
}

impl<'a> Categories<'a> {
    pub fn new(column: &'a Column, spec: &AttributeSpec, piles: &[&Pile]) -> Self {
        let raw = RawCategories::build(column, spec);
        let order = raw.sorted_order(&spec.sort_order);
        let missing_raw = raw.labels.len();
        // Unpiled sequence: sorted raw categories, then the missing category.
        let seq: Vec<(usize, &str)> = order
            .iter()
            .map(|&i| (i, raw.labels[i].as_str()))
            .chain(std::iter::once((missing_raw, MISSING_LABEL)))
            .collect();

        let pile_of: HashMap<&str, usize> = piles
            .iter()
            .enumerate()
            .flat_map(|(p, pile)| pile.categories.iter().map(move |c| (c.as_str(), p)))
            .collect();
        let mut labels = Vec::with_capacity(seq.len());
        let mut piled = Vec::with_capacity(seq.len());
        let mut pile_cat: Vec<Option<u32>> = vec![None; piles.len()];
        let mut raw_to_cat = vec![0u32; missing_raw + 1];
        for (raw_idx, label) in seq {
            let cat = match pile_of.get(label) {
                Some(&p) => *pile_cat[p].get_or_insert_with(|| {
                    labels.push(piles[p].name.clone());
                    piled.push(true);
                    (labels.len() - 1) as u32
                }),
                None => {
                    labels.push(label.to_owned());
                    piled.push(false);
                    (labels.len() - 1) as u32
                }
            };
            raw_to_cat[raw_idx] = cat;
        }
        let mapping = match raw.mapping {
            RawMapping::Dictionary => Mapping::Dictionary,
            RawMapping::Distinct(v) => Mapping::Distinct(v),
            RawMapping::Bins(e) => Mapping::Bins(e),
        };
        Categories {
            attribute: spec.name.clone(),
            column,
            labels,
            piled,
            raw_to_cat,
            mapping,
        }
    }

    pub fn attribute(&self) -> &str {
        &self.attribute
    }

    /// All categories in axis order, including ones absent from any row set.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn is_piled(&self, category: usize) -> bool {
        self.piled[category]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Category index of a row.
    #[inline]
    pub fn of(&self, row: RowId) -> u32 {
        let missing = self.raw_to_cat.len() - 1;
        let raw = match (&self.mapping, self.column.data()) {
            (Mapping::Dictionary, ColumnData::Nominal { codes, .. }) => match codes[row as usize] {
                MISSING_CODE => missing,
                c => c as usize,
            },
            (Mapping::Distinct(values), ColumnData::Quantitative(v)) => {
                let x = v[row as usize];
                if x.is_nan() {
                    missing
                } else {
                    values.partition_point(|d| d.total_cmp(&x) == Ordering::Less)
                }
            }
            (Mapping::Bins(edges), ColumnData::Quantitative(v)) => {
                let x = v[row as usize];
                if x.is_nan() || edges.is_empty() {
                    missing
                } else {
                    bin_of(edges, x)
                }
            }
            _ => unreachable!("mapping built from this column"),
        };
        self.raw_to_cat[raw]
    }
}

/// Category labels of an attribute in axis order (no piles), missing excluded.
pub fn category_labels(column: &Column, spec: &AttributeSpec) -> Vec<String> {
    let raw = RawCategories::build(column, spec);
    raw.sorted_order(&spec.sort_order)
        .into_iter()
        .map(|i| raw.labels[i].clone())
        .collect()
}
