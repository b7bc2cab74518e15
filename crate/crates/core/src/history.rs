//! The interaction log and the session that owns it.
//!
//! The log is the source of truth: the current state always equals the
//! initial state with `entries[..cursor]` replayed on top. Undo rebuilds
//! from the nearest snapshot at or below the new cursor; redo re-applies a
//! single entry.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::grid::{derive_grid_with, superlinks_of_with, Grid, Superlink};
use crate::ingest::{write_rows_csv, ExtraColumn};
use crate::layout::{compute_layout, GridLayout};
use crate::model::{
    AttributeSpec, Axis, Categories, Dataset, RowSet, SculptState, SubstrateId, Substrate,
};
use crate::ops::{Applied, OpKind, SculptOp, Selection, ViewFlag};

/// A snapshot is kept every this many log entries.
pub const SNAPSHOT_INTERVAL: usize = 10;

/// Suffix of the companion column written for piled attributes.
pub const PILED_SUFFIX: &str = "__piled";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OperationLog {
    pub entries: Vec<SculptOp>,
    pub cursor: usize,
}

impl OperationLog {
    pub fn can_undo(&self) -> bool {
        self.cursor > 0
    }

    pub fn can_redo(&self) -> bool {
        self.cursor < self.entries.len()
    }

    /// Entries up to the cursor.
    pub fn applied(&self) -> &[SculptOp] {
        &self.entries[..self.cursor]
    }
}

/// Serialized form of a session: enough to rebuild it from the same data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub version: u32,
    pub row_count: usize,
    pub log: OperationLog,
}

/// Replays operations from the initial state of `dataset`.
pub fn replay<'a, I>(dataset: &Dataset, ops: I) -> Result<SculptState>
where
    I: IntoIterator<Item = &'a SculptOp>,
{
    let mut state = SculptState::initial(dataset);
    for op in ops {
        state.apply(dataset, &op.kind)?;
    }
    Ok(state)
}

#[derive(Debug, Clone)]
pub struct Session {
    dataset: Arc<Dataset>,
    initial: SculptState,
    state: SculptState,
    log: OperationLog,
    /// (cursor, state at that cursor), ascending.
    snapshots: Vec<(usize, SculptState)>,
    exec: Exec,
}

impl Session {
    pub fn new(dataset: Arc<Dataset>) -> Self {
        let initial = SculptState::initial(&dataset);
        Session {
            state: initial.clone(),
            initial,
            dataset,
            log: OperationLog::default(),
            snapshots: Vec::new(),
            exec: Exec::default(),
        }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    /// Rebuilds a saved session. Entries past the cursor stay redoable.
    pub fn from_log(dataset: Arc<Dataset>, saved: SessionLog) -> Result<Self> {
        if saved.row_count != dataset.row_count() {
            return Err(Error::InvalidParameter(format!(
                "log was recorded on {} rows, dataset has {}",
                saved.row_count,
                dataset.row_count()
            )));
        }
        if saved.log.cursor > saved.log.entries.len() {
            return Err(Error::InvalidParameter("log cursor out of range".into()));
        }
        let mut session = Session::new(dataset);
        for op in &saved.log.entries[..saved.log.cursor] {
            session.apply(op.clone())?;
        }
        session.log.entries = saved.log.entries;
        Ok(session)
    }

    pub fn to_log(&self) -> SessionLog {
        SessionLog {
            version: 1,
            row_count: self.dataset.row_count(),
            log: self.log.clone(),
        }
    }

    pub fn dataset(&self) -> &Arc<Dataset> {
        &self.dataset
    }

    pub fn state(&self) -> &SculptState {
        &self.state
    }

    pub fn log(&self) -> &OperationLog {
        &self.log
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn substrates(&self) -> &[Substrate] {
        &self.state.substrates
    }

    pub fn substrate(&self, id: SubstrateId) -> Result<&Substrate> {
        self.state.substrate(id)
    }

    pub fn digest(&self) -> String {
        self.state.digest()
    }

    /// Executes an operation and records it, discarding any redo tail.
    pub fn apply(&mut self, op: impl Into<SculptOp>) -> Result<Applied> {
        let op = op.into();
        let applied = self.state.apply_with(self.exec, &self.dataset, &op.kind)?;
        self.log.entries.truncate(self.log.cursor);
        self.snapshots.retain(|(c, _)| *c <= self.log.cursor);
        self.log.entries.push(op);
        self.log.cursor += 1;
        if self.log.cursor.is_multiple_of(SNAPSHOT_INTERVAL) {
            self.snapshots.push((self.log.cursor, self.state.clone()));
        }
        Ok(applied)
    }

    pub fn undo(&mut self) -> Result<()> {
        if !self.log.can_undo() {
            return Err(Error::NothingToUndo);
        }
        self.rebuild(self.log.cursor - 1)
    }

    pub fn redo(&mut self) -> Result<()> {
        if !self.log.can_redo() {
            return Err(Error::NothingToRedo);
        }
        let op = &self.log.entries[self.log.cursor];
        self.state.apply_with(self.exec, &self.dataset, &op.kind)?;
        self.log.cursor += 1;
        Ok(())
    }

    /// Moves to any point of the log, as the log dropdown does.
    pub fn goto(&mut self, cursor: usize) -> Result<()> {
        if cursor > self.log.entries.len() {
            return Err(Error::InvalidParameter(format!(
                "cursor {cursor} beyond {} entries",
                self.log.entries.len()
            )));
        }
        if cursor >= self.log.cursor {
            while self.log.cursor < cursor {
                self.redo()?;
            }
            Ok(())
        } else {
            self.rebuild(cursor)
        }
    }

    fn rebuild(&mut self, cursor: usize) -> Result<()> {
        let (start, mut state) = self
            .snapshots
            .iter()
            .rev()
            .find(|(c, _)| *c <= cursor)
            .map(|(c, s)| (*c, s.clone()))
            .unwrap_or_else(|| (0, self.initial.clone()));
        for op in &self.log.entries[start..cursor] {
            state.apply_with(self.exec, &self.dataset, &op.kind)?;
        }
        self.state = state;
        self.log.cursor = cursor;
        Ok(())
    }

    pub fn pivot_partition(&mut self, substrate: SubstrateId, axis: Axis, attribute: &str) -> Result<()> {
        self.apply(OpKind::PivotPartition {
            substrate,
            axis,
            attribute: attribute.to_owned(),
        })
        .map(drop)
    }

    pub fn unpartition(&mut self, substrate: SubstrateId, axis: Axis, attribute: &str) -> Result<()> {
        self.apply(OpKind::Unpartition {
            substrate,
            axis,
            attribute: attribute.to_owned(),
        })
        .map(drop)
    }

    pub fn peek(&mut self, substrate: SubstrateId, attribute: &str) -> Result<()> {
        self.apply(OpKind::Peek {
            substrate,
            attribute: attribute.to_owned(),
        })
        .map(drop)
    }

    pub fn clear_peek(&mut self, substrate: SubstrateId) -> Result<()> {
        self.apply(OpKind::ClearPeek { substrate }).map(drop)
    }

    pub fn pile(&mut self, selection: Selection, name: Option<&str>) -> Result<()> {
        self.apply(OpKind::Pile {
            selection,
            name: name.map(str::to_owned),
        })
        .map(drop)
    }

    pub fn project(&mut self, selection: Selection) -> Result<SubstrateId> {
        let applied = self.apply(OpKind::Project { selection })?;
        Ok(applied.created.expect("projection creates a substrate"))
    }

    pub fn prune(&mut self, selection: Selection) -> Result<()> {
        self.apply(OpKind::Prune { selection }).map(drop)
    }

    pub fn prune_by_frequency(&mut self, substrate: SubstrateId, attribute: &str, min_count: usize) -> Result<()> {
        self.apply(OpKind::PruneByFrequency {
            substrate,
            attribute: attribute.to_owned(),
            min_count,
        })
        .map(drop)
    }

    pub fn configure_attribute(&mut self, spec: AttributeSpec) -> Result<()> {
        self.apply(OpKind::Configure { spec }).map(drop)
    }

    pub fn set_view(&mut self, substrate: SubstrateId, flag: ViewFlag, enabled: bool) -> Result<()> {
        self.apply(OpKind::ToggleView {
            substrate,
            flag,
            enabled,
        })
        .map(drop)
    }

    pub fn resolve_selection(&self, selection: &Selection) -> Result<RowSet> {
        self.state
            .resolve_selection_with(self.exec, &self.dataset, selection)
    }

    pub fn grid(&self, substrate: SubstrateId) -> Result<Grid> {
        derive_grid_with(self.exec, &self.dataset, &self.state, substrate)
    }

    pub fn superlinks(&self, grid: &Grid) -> Result<Vec<Superlink>> {
        superlinks_of_with(self.exec, &self.dataset, &grid.nodes)
    }

    pub fn histogram(&self, substrate: SubstrateId, attribute: &str) -> Result<Vec<(String, usize)>> {
        self.state.histogram(&self.dataset, substrate, attribute)
    }

    pub fn layout(&self, substrate: SubstrateId, width: f64, height: f64) -> Result<GridLayout> {
        let sub = self.substrate(substrate)?;
        let grid = self.grid(substrate)?;
        let links = if sub.show_links && self.dataset.has_edges() {
            Some(self.superlinks(&grid)?)
        } else {
            None
        };
        compute_layout(
            self.exec,
            &self.dataset,
            &self.state,
            &grid,
            links.as_deref(),
            width,
            height,
        )
    }

    /// Writes a substrate's live rows as CSV, ascending by row index.
    pub fn write_csv<W: Write>(&self, substrate: SubstrateId, out: W) -> Result<()> {
        let sub = self.substrate(substrate)?;
        let mut piled_attrs: Vec<&str> = Vec::new();
        for c in self.dataset.columns() {
            if sub.piles.iter().any(|p| p.attribute == c.name()) {
                piled_attrs.push(c.name());
            }
        }
        let cats: Vec<Categories<'_>> = piled_attrs
            .iter()
            .map(|a| {
                Ok(Categories::new(
                    self.dataset.require_column(a)?,
                    self.state.spec(a)?,
                    &sub.piles_for(a),
                ))
            })
            .collect::<Result<_>>()?;
        let extras: Vec<ExtraColumn<'_>> = cats
            .iter()
            .map(|c| ExtraColumn {
                name: format!("{}{PILED_SUFFIX}", c.attribute()),
                value: Box::new(move |r| c.labels()[c.of(r) as usize].clone()),
            })
            .collect();
        write_rows_csv(&self.dataset, sub.live.as_slice(), &extras, out)
    }

    pub fn export_csv(&self, substrate: SubstrateId) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_csv(substrate, &mut buf)?;
        Ok(buf)
    }
}
