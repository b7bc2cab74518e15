use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{AttributeSpec, Axis, Dataset, RowSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubstrateId(pub u32);

impl fmt::Display for SubstrateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::str::FromStr for SubstrateId {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(SubstrateId)
    }
}

/// Categories of one attribute merged into a single named category.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pile {
    pub attribute: String,
    pub categories: Vec<String>,
    pub name: String,
}

/// One sculpting surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Substrate {
    pub id: SubstrateId,
    pub name: String,
    pub live: RowSet,
    pub pruned: RowSet,
    pub h_axis: Vec<String>,
    pub v_axis: Vec<String>,
    pub piles: Vec<Pile>,
    pub peek: Option<String>,
    pub show_links: bool,
    pub show_arrows: bool,
}

impl Substrate {
    pub fn new(id: SubstrateId, name: impl Into<String>, live: RowSet) -> Self {
        Substrate {
            id,
            name: name.into(),
            live,
            pruned: RowSet::new(),
            h_axis: Vec::new(),
            v_axis: Vec::new(),
            piles: Vec::new(),
            peek: None,
            show_links: false,
            show_arrows: false,
        }
    }

    pub fn axis(&self, axis: Axis) -> &[String] {
        match axis {
            Axis::Horizontal => &self.h_axis,
            Axis::Vertical => &self.v_axis,
        }
    }

    pub(crate) fn axis_mut(&mut self, axis: Axis) -> &mut Vec<String> {
        match axis {
            Axis::Horizontal => &mut self.h_axis,
            Axis::Vertical => &mut self.v_axis,
        }
    }

    /// Axis holding `attribute`, if partitioned.
    pub fn axis_of(&self, attribute: &str) -> Option<Axis> {
        if self.h_axis.iter().any(|a| a == attribute) {
            Some(Axis::Horizontal)
        } else if self.v_axis.iter().any(|a| a == attribute) {
            Some(Axis::Vertical)
        } else {
            None
        }
    }

    pub fn piles_for(&self, attribute: &str) -> Vec<&Pile> {
        self.piles.iter().filter(|p| p.attribute == attribute).collect()
    }

    pub fn summary(&self) -> SubstrateSummary {
        SubstrateSummary {
            id: self.id,
            name: self.name.clone(),
            live_rows: self.live.len(),
            pruned_rows: self.pruned.len(),
            h_axis: self.h_axis.clone(),
            v_axis: self.v_axis.clone(),
            piles: self.piles.clone(),
            peek: self.peek.clone(),
            show_links: self.show_links,
            show_arrows: self.show_arrows,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstrateSummary {
    pub id: SubstrateId,
    pub name: String,
    pub live_rows: usize,
    pub pruned_rows: usize,
    pub h_axis: Vec<String>,
    pub v_axis: Vec<String>,
    pub piles: Vec<Pile>,
    pub peek: Option<String>,
    pub show_links: bool,
    pub show_arrows: bool,
}

/// Everything the sculpting operations change; the dataset stays outside.
#[derive(Debug, Clone, PartialEq)]
pub struct SculptState {
    pub specs: Vec<AttributeSpec>,
    pub substrates: Vec<Substrate>,
    pub next_substrate: u32,
}

pub const MAIN_SUBSTRATE: SubstrateId = SubstrateId(0);

impl SculptState {
    /// The initial state: one "Main" substrate holding every row.
    pub fn initial(dataset: &Dataset) -> Self {
        SculptState {
            specs: dataset.columns().iter().map(AttributeSpec::default_for).collect(),
            substrates: vec![Substrate::new(
                MAIN_SUBSTRATE,
                "Main",
                RowSet::all(dataset.row_count()),
            )],
            next_substrate: 1,
        }
    }

    pub fn substrate(&self, id: SubstrateId) -> Result<&Substrate> {
        self.substrates
            .iter()
            .find(|s| s.id == id)
            .ok_or(Error::UnknownSubstrate(id))
    }

    pub(crate) fn substrate_mut(&mut self, id: SubstrateId) -> Result<&mut Substrate> {
        self.substrates
            .iter_mut()
            .find(|s| s.id == id)
            .ok_or(Error::UnknownSubstrate(id))
    }

    pub fn spec(&self, attribute: &str) -> Result<&AttributeSpec> {
        self.specs
            .iter()
            .find(|s| s.name == attribute)
            .ok_or_else(|| Error::UnknownAttribute(attribute.to_owned()))
    }

    /// SHA-256 over a canonical encoding of the whole state.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        let mut put = |bytes: &[u8]| {
            h.update((bytes.len() as u64).to_le_bytes());
            h.update(bytes);
        };
        for spec in &self.specs {
            put(&serde_json::to_vec(spec).expect("spec serializes"));
        }
        put(&self.next_substrate.to_le_bytes());
        for s in &self.substrates {
            put(&s.id.0.to_le_bytes());
            put(s.name.as_bytes());
            for set in [&s.live, &s.pruned] {
                let bytes: Vec<u8> = set.iter().flat_map(u32::to_le_bytes).collect();
                put(&bytes);
            }
            let view = (&s.h_axis, &s.v_axis, &s.piles, &s.peek, s.show_links, s.show_arrows);
            put(&serde_json::to_vec(&view).expect("view serializes"));
        }
        hex::encode(h.finalize())
    }

    /// Checks that substrates partition the dataset rows.
    pub fn check_conservation(&self, row_count: usize) -> Result<()> {
        let mut seen = vec![false; row_count];
        for s in &self.substrates {
            if !s.live.is_disjoint(&s.pruned) {
                return Err(Error::InvalidDataset(format!(
                    "substrate {} has rows both live and pruned",
                    s.id
                )));
            }
            for r in s.live.iter().chain(s.pruned.iter()) {
                let slot = seen.get_mut(r as usize).ok_or_else(|| {
                    Error::InvalidDataset(format!("row {r} out of range"))
                })?;
                if *slot {
                    return Err(Error::InvalidDataset(format!(
                        "row {r} appears in more than one place"
                    )));
                }
                *slot = true;
            }
        }
        match seen.iter().position(|s| !s) {
            Some(r) => Err(Error::InvalidDataset(format!("row {r} was lost"))),
            None => Ok(()),
        }
    }
}
