use serde::{Deserialize, Serialize};

use crate::model::RowId;

/// Strictly increasing list of row indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RowSet(Vec<RowId>);

impl RowSet {
    pub fn new() -> Self {
        RowSet(Vec::new())
    }

    pub fn all(row_count: usize) -> Self {
        RowSet((0..row_count as RowId).collect())
    }

    /// Wraps rows that are already sorted and unique.
    pub fn from_sorted(rows: Vec<RowId>) -> Self {
        debug_assert!(rows.windows(2).all(|w| w[0] < w[1]));
        RowSet(rows)
    }

    pub fn from_unsorted(mut rows: Vec<RowId>) -> Self {
        rows.sort_unstable();
        rows.dedup();
        RowSet(rows)
    }

    pub fn as_slice(&self) -> &[RowId] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<RowId> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, row: RowId) -> bool {
        self.0.binary_search(&row).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = RowId> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &RowSet) -> RowSet {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        RowSet(out)
    }

    pub fn difference(&self, other: &RowSet) -> RowSet {
        let b = &other.0;
        let mut j = 0;
        let out = self
            .0
            .iter()
            .copied()
            .filter(|&x| {
                while j < b.len() && b[j] < x {
                    j += 1;
                }
                !(j < b.len() && b[j] == x)
            })
            .collect();
        RowSet(out)
    }

    pub fn intersection(&self, other: &RowSet) -> RowSet {
        let b = &other.0;
        let mut j = 0;
        let out = self
            .0
            .iter()
            .copied()
            .filter(|&x| {
                while j < b.len() && b[j] < x {
                    j += 1;
                }
                j < b.len() && b[j] == x
            })
            .collect();
        RowSet(out)
    }

    pub fn is_disjoint(&self, other: &RowSet) -> bool {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn is_subset(&self, other: &RowSet) -> bool {
        self.difference(other).is_empty()
    }
}

impl FromIterator<RowId> for RowSet {
    fn from_iter<I: IntoIterator<Item = RowId>>(iter: I) -> Self {
        RowSet::from_unsorted(iter.into_iter().collect())
    }
}
