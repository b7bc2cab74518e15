//! Supernode and superlink derivation.
//!
//! Supernodes are a pure function of a substrate's live rows, its axis
//! stacks, its piles and the attribute specs. Each axis level contributes
//! the categories that occur among the live rows; the grid is the cross
//! product of those levels, and every non-empty cell becomes a supernode.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{Exec, REDUCE_CHUNK};
use crate::model::{
    Axis, Categories, Dataset, FacetKey, FacetValue, RowId, RowSet, SculptState, Substrate,
    SubstrateId,
};

/// Grids with at most this many cells are grouped by counting sort.
const DENSE_CELL_LIMIT: u64 = 1 << 22;

/// One nesting level of an axis: the categories present among live rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisLevel {
    pub attribute: String,
    pub labels: Vec<String>,
    pub piled: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Supernode {
    pub key: FacetKey,
    pub rows: RowSet,
    pub count: usize,
    /// Leaf column of the grid, counted from the left.
    pub column: usize,
    /// Leaf row of the grid, counted from the top.
    pub row: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Superlink {
    pub source: FacetKey,
    pub target: FacetKey,
    /// Positions of the endpoints in [`Grid::nodes`].
    pub source_node: usize,
    pub target_node: usize,
    pub weight: f64,
    pub edge_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub substrate: SubstrateId,
    pub horizontal: Vec<AxisLevel>,
    pub vertical: Vec<AxisLevel>,
    /// Non-empty cells, column-major.
    pub nodes: Vec<Supernode>,
}

fn leaf_count(levels: &[AxisLevel]) -> usize {
    levels.iter().map(|l| l.labels.len()).product()
}

impl Grid {
    pub fn levels(&self, axis: Axis) -> &[AxisLevel] {
        match axis {
            Axis::Horizontal => &self.horizontal,
            Axis::Vertical => &self.vertical,
        }
    }

    /// Leaf columns (N_x).
    pub fn n_columns(&self) -> usize {
        leaf_count(&self.horizontal)
    }

    /// Leaf rows (N_y).
    pub fn n_rows(&self) -> usize {
        leaf_count(&self.vertical)
    }

    pub fn leaf_count(&self, axis: Axis) -> usize {
        leaf_count(self.levels(axis))
    }

    /// Category path of a leaf position along one axis.
    pub fn path(&self, axis: Axis, mut leaf: usize) -> Vec<FacetValue> {
        let levels = self.levels(axis);
        let mut out = vec![FacetValue::new("", ""); levels.len()];
        for (i, level) in levels.iter().enumerate().rev() {
            let n = level.labels.len();
            out[i] = FacetValue::new(level.attribute.clone(), level.labels[leaf % n].clone());
            leaf /= n;
        }
        out
    }

    pub fn cell_key(&self, column: usize, row: usize) -> FacetKey {
        FacetKey {
            horizontal: self.path(Axis::Horizontal, column),
            vertical: self.path(Axis::Vertical, row),
        }
    }

    /// Leaf position of a category path, if every category is on the grid.
    pub fn leaf_of(&self, axis: Axis, path: &[FacetValue]) -> Option<usize> {
        let levels = self.levels(axis);
        if levels.len() != path.len() {
            return None;
        }
        let mut leaf = 0;
        for (level, fv) in levels.iter().zip(path) {
            if level.attribute != fv.attribute {
                return None;
            }
            let i = level.labels.iter().position(|l| *l == fv.category)?;
            leaf = leaf * level.labels.len() + i;
        }
        Some(leaf)
    }

    /// (column, row) of a key that names a grid cell.
    pub fn position_of(&self, key: &FacetKey) -> Option<(usize, usize)> {
        Some((
            self.leaf_of(Axis::Horizontal, &key.horizontal)?,
            self.leaf_of(Axis::Vertical, &key.vertical)?,
        ))
    }

    pub fn node(&self, key: &FacetKey) -> Option<&Supernode> {
        let (c, r) = self.position_of(key)?;
        let idx = self
            .nodes
            .binary_search_by(|n| (n.column, n.row).cmp(&(c, r)))
            .ok()?;
        Some(&self.nodes[idx])
    }

    pub fn max_count(&self) -> usize {
        self.nodes.iter().map(|n| n.count).max().unwrap_or(0)
    }
}

/// Categories for every axis level, outermost first, horizontal then vertical.
pub(crate) fn level_categories<'a>(
    dataset: &'a Dataset,
    state: &SculptState,
    sub: &Substrate,
) -> Result<Vec<(Axis, Categories<'a>)>> {
    sub.h_axis
        .iter()
        .map(|a| (Axis::Horizontal, a))
        .chain(sub.v_axis.iter().map(|a| (Axis::Vertical, a)))
        .map(|(axis, a)| {
            let column = dataset.require_column(a)?;
            let spec = state.spec(a)?;
            Ok((axis, Categories::new(column, spec, &sub.piles_for(a))))
        })
        .collect()
}

/// Which categories of `cats` occur among `rows`.
pub(crate) fn presence(exec: Exec, rows: &[RowId], cats: &[&Categories<'_>]) -> Vec<Vec<bool>> {
    let init: Vec<Vec<bool>> = cats.iter().map(|c| vec![false; c.len()]).collect();
    exec.fold_chunks(
        rows,
        init.clone(),
        |chunk| {
            let mut seen = init.clone();
            for &r in chunk {
                for (l, c) in cats.iter().enumerate() {
                    seen[l][c.of(r) as usize] = true;
                }
            }
            seen
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                for (p, q) in x.iter_mut().zip(y) {
                    *p |= q;
                }
            }
            a
        },
    )
}

/// Per-category row counts of one attribute among `rows`.
pub(crate) fn category_counts(exec: Exec, rows: &[RowId], cats: &Categories<'_>) -> Vec<usize> {
    let n = cats.len();
    exec.fold_chunks(
        rows,
        vec![0usize; n],
        |chunk| {
            let mut c = vec![0usize; n];
            for &r in chunk {
                c[cats.of(r) as usize] += 1;
            }
            c
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    )
}

pub fn derive_grid(dataset: &Dataset, state: &SculptState, id: SubstrateId) -> Result<Grid> {
    derive_grid_with(Exec::default(), dataset, state, id)
}

pub fn derive_grid_with(
    exec: Exec,
    dataset: &Dataset,
    state: &SculptState,
    id: SubstrateId,
) -> Result<Grid> {
    let sub = state.substrate(id)?;
    let levels = level_categories(dataset, state, sub)?;
    let live = sub.live.as_slice();
    let cats: Vec<&Categories<'_>> = levels.iter().map(|(_, c)| c).collect();
    let present = presence(exec, live, &cats);

    // Global category -> position among present categories.
    let local: Vec<Vec<u32>> = present
        .iter()
        .map(|p| {
            let mut next = 0;
            p.iter()
                .map(|&on| {
                    if on {
                        next += 1;
                        next - 1
                    } else {
                        u32::MAX
                    }
                })
                .collect()
        })
        .collect();
    let mut horizontal = Vec::new();
    let mut vertical = Vec::new();
    for ((axis, c), p) in levels.iter().zip(&present) {
        let level = AxisLevel {
            attribute: c.attribute().to_owned(),
            labels: (0..c.len())
                .filter(|&i| p[i])
                .map(|i| c.labels()[i].clone())
                .collect(),
            piled: (0..c.len()).filter(|&i| p[i]).map(|i| c.is_piled(i)).collect(),
        };
        match axis {
            Axis::Horizontal => horizontal.push(level),
            Axis::Vertical => vertical.push(level),
        }
    }
    let mut grid = Grid {
        substrate: id,
        horizontal,
        vertical,
        nodes: Vec::new(),
    };
    if live.is_empty() {
        return Ok(grid);
    }

    let dims: Vec<u64> = grid
        .horizontal
        .iter()
        .chain(&grid.vertical)
        .map(|l| l.labels.len() as u64)
        .collect();
    let total = dims
        .iter()
        .try_fold(1u64, |acc, &d| acc.checked_mul(d));
    let groups: Vec<(u64, Vec<RowId>)> = match total {
        Some(total) => {
            let cell_of = |r: &RowId| {
                cats.iter()
                    .zip(&local)
                    .zip(&dims)
                    .fold(0u64, |acc, ((c, loc), &d)| acc * d + loc[c.of(*r) as usize] as u64)
            };
            if total <= DENSE_CELL_LIMIT {
                let ids: Vec<u32> = exec.map(live, |r| cell_of(r) as u32);
                group_dense(live, &ids, total as usize)
            } else {
                let mut pairs: Vec<(u64, RowId)> = exec.map(live, |r| (cell_of(r), *r));
                exec.sort_unstable(&mut pairs);
                group_sorted(pairs)
            }
        }
        None => {
            return Err(Error::InvalidParameter(
                "grid has more cells than can be addressed".into(),
            ))
        }
    };

    let n_rows = grid.n_rows() as u64;
    grid.nodes = groups
        .into_iter()
        .map(|(cell, rows)| {
            let column = (cell / n_rows) as usize;
            let row = (cell % n_rows) as usize;
            Supernode {
                key: grid.cell_key(column, row),
                count: rows.len(),
                rows: RowSet::from_sorted(rows),
                column,
                row,
            }
        })
        .collect();
    Ok(grid)
}

fn group_dense(live: &[RowId], ids: &[u32], total: usize) -> Vec<(u64, Vec<RowId>)> {
    let mut counts = vec![0usize; total];
    for &id in ids {
        counts[id as usize] += 1;
    }
    let mut groups: Vec<Vec<RowId>> = counts.iter().map(|&c| Vec::with_capacity(c)).collect();
    for (&r, &id) in live.iter().zip(ids) {
        groups[id as usize].push(r);
    }
    groups
        .into_iter()
        .enumerate()
        .filter(|(_, g)| !g.is_empty())
        .map(|(i, g)| (i as u64, g))
        .collect()
}

fn group_sorted(pairs: Vec<(u64, RowId)>) -> Vec<(u64, Vec<RowId>)> {
    let mut out: Vec<(u64, Vec<RowId>)> = Vec::new();
    for (cell, r) in pairs {
        match out.last_mut() {
            Some((c, rows)) if *c == cell => rows.push(r),
            _ => out.push((cell, vec![r])),
        }
    }
    out
}

/// Supernodes of a substrate, column-major.
pub fn supernodes_of(dataset: &Dataset, state: &SculptState, id: SubstrateId) -> Result<Vec<Supernode>> {
    Ok(derive_grid(dataset, state, id)?.nodes)
}

pub fn superlinks_of(dataset: &Dataset, nodes: &[Supernode]) -> Result<Vec<Superlink>> {
    superlinks_of_with(Exec::default(), dataset, nodes)
}

/// Aggregates raw edges between supernodes. Edges with an endpoint outside
/// the given nodes are skipped.
pub fn superlinks_of_with(
    exec: Exec,
    dataset: &Dataset,
    nodes: &[Supernode],
) -> Result<Vec<Superlink>> {
    let edges = dataset.edges().ok_or(Error::NoEdges)?;
    let mut owner = vec![u32::MAX; dataset.row_count()];
    for (i, n) in nodes.iter().enumerate() {
        for r in n.rows.iter() {
            owner[r as usize] = i as u32;
        }
    }
    let partials = exec.map_chunks(edges, REDUCE_CHUNK, |chunk| {
        let mut acc: HashMap<(u32, u32), (f64, u64)> = HashMap::new();
        for e in chunk {
            let (s, t) = (owner[e.source as usize], owner[e.target as usize]);
            if s != u32::MAX && t != u32::MAX {
                let slot = acc.entry((s, t)).or_insert((0.0, 0));
                slot.0 += e.weight;
                slot.1 += 1;
            }
        }
        acc
    });
    // A stable sort keeps equal pairs in chunk order, so sums do not depend
    // on hash order or on how chunks were scheduled.
    let mut pairs: Vec<((u32, u32), (f64, u64))> = Vec::new();
    for part in partials {
        let mut part: Vec<_> = part.into_iter().collect();
        part.sort_unstable_by_key(|(k, _)| *k);
        pairs.extend(part);
    }
    pairs.sort_by_key(|(k, _)| *k);
    let mut merged: Vec<((u32, u32), (f64, u64))> = Vec::new();
    for (k, (w, n)) in pairs {
        match merged.last_mut() {
            Some((last, slot)) if *last == k => {
                slot.0 += w;
                slot.1 += n;
            }
            _ => merged.push((k, (w, n))),
        }
    }
    Ok(merged
        .into_iter()
        .map(|((s, t), (weight, edge_count))| Superlink {
            source: nodes[s as usize].key.clone(),
            target: nodes[t as usize].key.clone(),
            source_node: s as usize,
            target_node: t as usize,
            weight,
            edge_count,
        })
        .collect())
}
