//! The sculpting operations as transitions on [`SculptState`].
//!
//! Pivot and partition are one transition: placing an attribute on an axis
//! both splits every supernode by that attribute and lays the pieces out
//! along the axis. Every transition validates before it mutates, so a
//! failed operation leaves the state untouched.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::grid::{category_counts, derive_grid_with, presence, Grid};
use crate::model::{
    AttributeSpec, Axis, Categories, Dataset, FacetKey, FacetValue, Pile, RowSet, SculptState,
    Substrate, SubstrateId,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SelectionScope {
    /// Individual grid cells.
    Nodes { keys: Vec<FacetKey> },
    /// Whole rows of the grid, named by vertical-axis categories.
    RowFacet { facets: Vec<FacetValue> },
    /// Whole columns of the grid, named by horizontal-axis categories.
    ColumnFacet { facets: Vec<FacetValue> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub substrate: SubstrateId,
    #[serde(flatten)]
    pub scope: SelectionScope,
}

impl Selection {
    pub fn nodes(substrate: SubstrateId, keys: Vec<FacetKey>) -> Self {
        Selection {
            substrate,
            scope: SelectionScope::Nodes { keys },
        }
    }

    pub fn facets(substrate: SubstrateId, axis: Axis, facets: Vec<FacetValue>) -> Self {
        let scope = match axis {
            Axis::Horizontal => SelectionScope::ColumnFacet { facets },
            Axis::Vertical => SelectionScope::RowFacet { facets },
        };
        Selection { substrate, scope }
    }

    /// Shorthand for several categories of one attribute.
    pub fn categories<I, S>(substrate: SubstrateId, axis: Axis, attribute: &str, categories: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Selection::facets(
            substrate,
            axis,
            categories
                .into_iter()
                .map(|c| FacetValue::new(attribute, c))
                .collect(),
        )
    }

    fn facet_axis(&self) -> Option<(Axis, &[FacetValue])> {
        match &self.scope {
            SelectionScope::Nodes { .. } => None,
            SelectionScope::RowFacet { facets } => Some((Axis::Vertical, facets)),
            SelectionScope::ColumnFacet { facets } => Some((Axis::Horizontal, facets)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewFlag {
    Links,
    Arrows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OpKind {
    PivotPartition {
        substrate: SubstrateId,
        axis: Axis,
        attribute: String,
    },
    Unpartition {
        substrate: SubstrateId,
        axis: Axis,
        attribute: String,
    },
    Peek {
        substrate: SubstrateId,
        attribute: String,
    },
    ClearPeek {
        substrate: SubstrateId,
    },
    Pile {
        selection: Selection,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    Project {
        selection: Selection,
    },
    Prune {
        selection: Selection,
    },
    PruneByFrequency {
        substrate: SubstrateId,
        attribute: String,
        min_count: usize,
    },
    Configure {
        spec: AttributeSpec,
    },
    ToggleView {
        substrate: SubstrateId,
        flag: ViewFlag,
        enabled: bool,
    },
}

/// One log entry: a transition plus when it was issued.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SculptOp {
    #[serde(flatten)]
    pub kind: OpKind,
    /// Milliseconds since the Unix epoch; informational only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl From<OpKind> for SculptOp {
    fn from(kind: OpKind) -> Self {
        SculptOp {
            kind,
            timestamp: None,
        }
    }
}

impl OpKind {
    pub fn name(&self) -> &'static str {
        match self {
            OpKind::PivotPartition { .. } => "pivot_partition",
            OpKind::Unpartition { .. } => "unpartition",
            OpKind::Peek { .. } => "peek",
            OpKind::ClearPeek { .. } => "clear_peek",
            OpKind::Pile { .. } => "pile",
            OpKind::Project { .. } => "project",
            OpKind::Prune { .. } => "prune",
            OpKind::PruneByFrequency { .. } => "prune_by_frequency",
            OpKind::Configure { .. } => "configure",
            OpKind::ToggleView { .. } => "toggle_view",
        }
    }

    /// Short human-readable description for the interaction log.
    pub fn describe(&self) -> String {
        fn facets(sel: &Selection) -> String {
            match &sel.scope {
                SelectionScope::Nodes { keys } => format!("{} node(s)", keys.len()),
                SelectionScope::RowFacet { facets } | SelectionScope::ColumnFacet { facets } => facets
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(", "),
            }
        }
        match self {
            OpKind::PivotPartition { axis, attribute, .. } => format!("partition {axis} by {attribute}"),
            OpKind::Unpartition { axis, attribute, .. } => format!("remove {attribute} from {axis}"),
            OpKind::Peek { attribute, .. } => format!("peek {attribute}"),
            OpKind::ClearPeek { .. } => "clear peek".into(),
            OpKind::Pile { selection, name } => match name {
                Some(n) => format!("pile {} as \"{n}\"", facets(selection)),
                None => format!("pile {}", facets(selection)),
            },
            OpKind::Project { selection } => format!("project {}", facets(selection)),
            OpKind::Prune { selection } => format!("prune {}", facets(selection)),
            OpKind::PruneByFrequency { attribute, min_count, .. } => {
                format!("prune {attribute} categories with fewer than {min_count} rows")
            }
            OpKind::Configure { spec } => format!("configure {}", spec.name),
            OpKind::ToggleView { flag, enabled, .. } => format!(
                "{} {}",
                if *enabled { "show" } else { "hide" },
                match flag {
                    ViewFlag::Links => "links",
                    ViewFlag::Arrows => "arrows",
                }
            ),
        }
    }
}

/// What an applied operation produced, beyond the state change itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Applied {
    /// Substrate created by a projection.
    pub created: Option<SubstrateId>,
}

impl SculptState {
    pub fn apply(&mut self, dataset: &Dataset, op: &OpKind) -> Result<Applied> {
        self.apply_with(Exec::default(), dataset, op)
    }

    pub fn apply_with(&mut self, exec: Exec, dataset: &Dataset, op: &OpKind) -> Result<Applied> {
        let mut created = None;
        match op {
            OpKind::PivotPartition { substrate, axis, attribute } => {
                self.pivot_partition(dataset, *substrate, *axis, attribute)?
            }
            OpKind::Unpartition { substrate, axis, attribute } => {
                self.unpartition(*substrate, *axis, attribute)?
            }
            OpKind::Peek { substrate, attribute } => self.peek(dataset, *substrate, attribute)?,
            OpKind::ClearPeek { substrate } => self.substrate_mut(*substrate)?.peek = None,
            OpKind::Pile { selection, name } => self.pile(exec, dataset, selection, name.as_deref())?,
            OpKind::Project { selection } => created = Some(self.project(exec, dataset, selection)?),
            OpKind::Prune { selection } => self.prune(exec, dataset, selection)?,
            OpKind::PruneByFrequency { substrate, attribute, min_count } => {
                self.prune_by_frequency(exec, dataset, *substrate, attribute, *min_count)?
            }
            OpKind::Configure { spec } => self.configure(exec, dataset, spec)?,
            OpKind::ToggleView { substrate, flag, enabled } => {
                if *flag == ViewFlag::Links && *enabled && !dataset.has_edges() {
                    return Err(Error::NoEdges);
                }
                let s = self.substrate_mut(*substrate)?;
                match flag {
                    ViewFlag::Links => s.show_links = *enabled,
                    ViewFlag::Arrows => s.show_arrows = *enabled,
                }
            }
        }
        Ok(Applied { created })
    }

    pub fn pivot_partition(
        &mut self,
        dataset: &Dataset,
        id: SubstrateId,
        axis: Axis,
        attribute: &str,
    ) -> Result<()> {
        dataset.require_column(attribute)?;
        let s = self.substrate_mut(id)?;
        if s.axis_of(attribute).is_some() {
            return Err(Error::AlreadyPartitioned(attribute.to_owned()));
        }
        s.axis_mut(axis).push(attribute.to_owned());
        Ok(())
    }

    pub fn unpartition(&mut self, id: SubstrateId, axis: Axis, attribute: &str) -> Result<()> {
        let stack = self.substrate_mut(id)?.axis_mut(axis);
        let pos = stack
            .iter()
            .position(|a| a == attribute)
            .ok_or_else(|| Error::NotOnAxis {
                attribute: attribute.to_owned(),
                axis,
            })?;
        stack.remove(pos);
        Ok(())
    }

    pub fn peek(&mut self, dataset: &Dataset, id: SubstrateId, attribute: &str) -> Result<()> {
        dataset.require_column(attribute)?;
        self.substrate_mut(id)?.peek = Some(attribute.to_owned());
        Ok(())
    }

    /// Rows covered by a selection.
    pub fn resolve_selection(&self, dataset: &Dataset, selection: &Selection) -> Result<RowSet> {
        self.resolve_selection_with(Exec::default(), dataset, selection)
    }

    pub fn resolve_selection_with(
        &self,
        exec: Exec,
        dataset: &Dataset,
        selection: &Selection,
    ) -> Result<RowSet> {
        let sub = self.substrate(selection.substrate)?;
        match &selection.scope {
            SelectionScope::Nodes { keys } => {
                let grid = derive_grid_with(exec, dataset, self, sub.id)?;
                let mut rows = RowSet::new();
                for key in keys {
                    if grid.position_of(key).is_none() {
                        return Err(Error::DanglingKey(key.to_string()));
                    }
                    if let Some(node) = grid.node(key) {
                        rows = rows.union(&node.rows);
                    }
                }
                Ok(rows)
            }
            SelectionScope::RowFacet { facets } | SelectionScope::ColumnFacet { facets } => {
                let axis = selection.facet_axis().map(|(a, _)| a).expect("facet scope");
                let (cats, wanted) = self.facet_filter(exec, dataset, sub, axis, facets)?;
                Ok(RowSet::from_sorted(exec.filter(sub.live.as_slice(), |&r| {
                    cats.iter()
                        .zip(&wanted)
                        .any(|(c, w)| w.contains(&c.of(r)))
                })))
            }
        }
    }

    /// Categories per selected attribute, after checking each facet names a
    /// label currently on the grid.
    fn facet_filter<'a>(
        &self,
        exec: Exec,
        dataset: &'a Dataset,
        sub: &Substrate,
        axis: Axis,
        facets: &[FacetValue],
    ) -> Result<(Vec<Categories<'a>>, Vec<HashSet<u32>>)> {
        let attrs: BTreeSet<&str> = facets.iter().map(|f| f.attribute.as_str()).collect();
        let mut cats = Vec::new();
        let mut wanted = Vec::new();
        for attr in attrs {
            if !sub.axis(axis).iter().any(|a| a == attr) {
                return Err(Error::DanglingKey(format!("`{attr}` is not on the {axis} axis")));
            }
            let c = Categories::new(dataset.require_column(attr)?, self.spec(attr)?, &sub.piles_for(attr));
            let present = presence(exec, sub.live.as_slice(), &[&c]).remove(0);
            let mut set = HashSet::new();
            for f in facets.iter().filter(|f| f.attribute == attr) {
                match c.position(&f.category) {
                    Some(i) if present[i] => {
                        set.insert(i as u32);
                    }
                    _ => return Err(Error::DanglingKey(f.to_string())),
                }
            }
            cats.push(c);
            wanted.push(set);
        }
        Ok((cats, wanted))
    }

    pub fn pile(
        &mut self,
        exec: Exec,
        dataset: &Dataset,
        selection: &Selection,
        name: Option<&str>,
    ) -> Result<()> {
        let Some((axis, facets)) = selection.facet_axis() else {
            return Err(Error::InvalidPile(
                "piling needs a row or column facet selection".into(),
            ));
        };
        let attribute = match facets.first() {
            Some(f) => f.attribute.clone(),
            None => return Err(Error::InvalidPile("nothing selected".into())),
        };
        if facets.iter().any(|f| f.attribute != attribute) {
            return Err(Error::InvalidPile(
                "categories must come from one attribute".into(),
            ));
        }
        let sub = self.substrate(selection.substrate)?;
        // Validates that every facet is on the grid.
        let (cats, _) = self.facet_filter(exec, dataset, sub, axis, facets)?;
        let cats = &cats[0];
        let selected: Vec<&str> = {
            let mut seen = HashSet::new();
            facets
                .iter()
                .map(|f| f.category.as_str())
                .filter(|c| seen.insert(*c))
                .collect()
        };
        if selected.len() < 2 {
            return Err(Error::InvalidPile("at least two categories are needed".into()));
        }

        // Selecting an existing pile re-piles its constituents.
        let mut absorbed = Vec::new();
        let mut constituents = Vec::new();
        for label in &selected {
            match sub
                .piles
                .iter()
                .position(|p| p.attribute == attribute && p.name == *label)
            {
                Some(i) => {
                    absorbed.push(i);
                    constituents.extend(sub.piles[i].categories.iter().cloned());
                }
                None => constituents.push((*label).to_owned()),
            }
        }

        let base = match name {
            Some(n) if !n.trim().is_empty() => n.trim().to_owned(),
            _ => selected.join(" + "),
        };
        let taken: HashSet<&str> = cats
            .labels()
            .iter()
            .map(String::as_str)
            .filter(|l| !selected.contains(l))
            .collect();
        let mut pile_name = base;
        while taken.contains(pile_name.as_str()) {
            pile_name.push_str(" (pile)");
        }

        let s = self.substrate_mut(selection.substrate)?;
        let mut i = 0;
        s.piles.retain(|_| {
            i += 1;
            !absorbed.contains(&(i - 1))
        });
        s.piles.push(Pile {
            attribute,
            categories: constituents,
            name: pile_name,
        });
        Ok(())
    }

    pub fn project(&mut self, exec: Exec, dataset: &Dataset, selection: &Selection) -> Result<SubstrateId> {
        let rows = self.resolve_selection_with(exec, dataset, selection)?;
        if rows.is_empty() {
            return Err(Error::EmptySelection);
        }
        let id = SubstrateId(self.next_substrate);
        let name = match &selection.scope {
            SelectionScope::Nodes { keys } if keys.len() == 1 => keys[0].to_string(),
            SelectionScope::Nodes { .. } => format!("Selection {}", id.0),
            SelectionScope::RowFacet { facets } | SelectionScope::ColumnFacet { facets } => facets
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(", "),
        };
        let source = self.substrate_mut(selection.substrate)?;
        source.live = source.live.difference(&rows);
        self.substrates.push(Substrate::new(id, name, rows));
        self.next_substrate += 1;
        Ok(id)
    }

    pub fn prune(&mut self, exec: Exec, dataset: &Dataset, selection: &Selection) -> Result<()> {
        let rows = self.resolve_selection_with(exec, dataset, selection)?;
        if rows.is_empty() {
            return Err(Error::EmptySelection);
        }
        let s = self.substrate_mut(selection.substrate)?;
        s.live = s.live.difference(&rows);
        s.pruned = s.pruned.union(&rows);
        Ok(())
    }

    pub fn prune_by_frequency(
        &mut self,
        exec: Exec,
        dataset: &Dataset,
        id: SubstrateId,
        attribute: &str,
        min_count: usize,
    ) -> Result<()> {
        if min_count == 0 {
            return Err(Error::InvalidParameter("min_count must be positive".into()));
        }
        let column = dataset.require_column(attribute)?;
        let sub = self.substrate(id)?;
        let cats = Categories::new(column, self.spec(attribute)?, &sub.piles_for(attribute));
        let counts = category_counts(exec, sub.live.as_slice(), &cats);
        let rare: Vec<bool> = counts.iter().map(|&c| c < min_count).collect();
        let rows = RowSet::from_sorted(exec.filter(sub.live.as_slice(), |&r| rare[cats.of(r) as usize]));
        let s = self.substrate_mut(id)?;
        s.live = s.live.difference(&rows);
        s.pruned = s.pruned.union(&rows);
        Ok(())
    }

    /// Replaces an attribute's spec. Pile constituents that no longer name a
    /// category are dropped, as are piles left with fewer than two.
    pub fn configure(&mut self, _exec: Exec, dataset: &Dataset, spec: &AttributeSpec) -> Result<()> {
        let column = dataset.require_column(&spec.name)?;
        spec.validate(column)?;
        let labels: HashSet<String> = crate::model::attribute::category_labels(column, spec)
            .into_iter()
            .chain(std::iter::once(crate::model::MISSING_LABEL.to_owned()))
            .collect();
        let slot = self
            .specs
            .iter_mut()
            .find(|s| s.name == spec.name)
            .ok_or_else(|| Error::UnknownAttribute(spec.name.clone()))?;
        *slot = spec.clone();
        for s in &mut self.substrates {
            for p in s.piles.iter_mut().filter(|p| p.attribute == spec.name) {
                p.categories.retain(|c| labels.contains(c));
            }
            s.piles
                .retain(|p| p.attribute != spec.name || p.categories.len() >= 2);
        }
        Ok(())
    }

    /// Category histogram of an attribute over a substrate's live rows.
    pub fn histogram(&self, dataset: &Dataset, id: SubstrateId, attribute: &str) -> Result<Vec<(String, usize)>> {
        let column = dataset.require_column(attribute)?;
        let sub = self.substrate(id)?;
        let cats = Categories::new(column, self.spec(attribute)?, &sub.piles_for(attribute));
        let counts = category_counts(Exec::default(), sub.live.as_slice(), &cats);
        Ok(cats
            .labels()
            .iter()
            .cloned()
            .zip(counts)
            .filter(|(_, n)| *n > 0)
            .collect())
    }
}

/// Keys of the grid cells in one facet, for building node selections.
pub fn facet_cells(grid: &Grid, axis: Axis, facet: &FacetValue) -> Vec<FacetKey> {
    let along = grid.leaf_count(axis);
    let across = grid.leaf_count(axis.cross());
    (0..along)
        .filter(|&i| grid.path(axis, i).contains(facet))
        .flat_map(|i| {
            (0..across).map(move |j| match axis {
                Axis::Horizontal => grid.cell_key(i, j),
                Axis::Vertical => grid.cell_key(j, i),
            })
        })
        .collect()
}

impl Axis {
    pub fn cross(self) -> Axis {
        match self {
            Axis::Horizontal => Axis::Vertical,
            Axis::Vertical => Axis::Horizontal,
        }
    }
}
