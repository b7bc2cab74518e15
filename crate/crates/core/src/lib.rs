//! Aggregate query sculpting.
//!
//! A dataset starts out as a single aggregate mark, the one supernode of the
//! "Main" substrate. Six operations refine it: pivot/partition place an
//! attribute on an axis, peek shows a distribution inside each mark, pile
//! merges categories, project moves rows to a new substrate, and prune
//! hides rows. Every operation is logged and can be undone.
//!
//! ```
//! use std::sync::Arc;
//! use aqs_core::{Axis, Column, Dataset, Session, MAIN_SUBSTRATE};
//!
//! let data = Dataset::new(vec![Column::nominal("cylinders", ["4", "8", "6", "4"])], None).unwrap();
//! let mut session = Session::new(Arc::new(data));
//! session.pivot_partition(MAIN_SUBSTRATE, Axis::Horizontal, "cylinders").unwrap();
//! let counts: Vec<usize> = session.grid(MAIN_SUBSTRATE).unwrap().nodes.iter().map(|n| n.count).collect();
//! assert_eq!(counts, [2, 1, 1]);
//! ```

pub mod error;
pub mod exec;
pub mod grid;
pub mod history;
pub mod ingest;
pub mod layout;
pub mod model;
pub mod ops;

pub use error::{Error, IngestError, Result};
pub use exec::Exec;
pub use grid::{derive_grid, superlinks_of, supernodes_of, AxisLevel, Grid, Superlink, Supernode};
pub use history::{replay, OperationLog, Session, SessionLog};
pub use ingest::{ingest_csv, ingest_readers, IngestConfig, IngestOptions};
pub use layout::{axis_label_tree, compute_layout, hover_highlight_model, GridLayout, HoverHighlight};
pub use model::{
    AttributeSpec, Axis, Binning, Column, ColumnKind, Dataset, Edge, FacetKey, FacetValue, Pile,
    RowSet, SculptState, SortOrder, Substrate, SubstrateId, MAIN_SUBSTRATE,
};
pub use ops::{OpKind, SculptOp, Selection, SelectionScope, ViewFlag};
