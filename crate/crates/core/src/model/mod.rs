//! Immutable dataset plus the sculpting state derived from it.

pub mod attribute;
pub mod dataset;
pub mod facet;
pub mod rowset;
pub mod substrate;

pub use attribute::{AttributeSpec, Binning, Categories, SortOrder};
pub use dataset::{Column, ColumnData, ColumnKind, Dataset, DatasetSummary, Edge, Value, MISSING_LABEL};
pub use facet::{Axis, FacetKey, FacetValue};
pub use rowset::RowSet;
pub use substrate::{Pile, SculptState, Substrate, SubstrateId, SubstrateSummary, MAIN_SUBSTRATE};

/// Index of a row in the dataset.
pub type RowId = u32;
