use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Horizontal,
    Vertical,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Horizontal => "horizontal",
            Axis::Vertical => "vertical",
        })
    }
}

impl std::str::FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "h" | "horizontal" | "x" | "column" => Ok(Axis::Horizontal),
            "v" | "vertical" | "y" | "row" => Ok(Axis::Vertical),
            other => Err(format!("unknown axis `{other}`")),
        }
    }
}

/// One (attribute, category) pair at one nesting level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FacetValue {
    pub attribute: String,
    pub category: String,
}

impl FacetValue {
    pub fn new(attribute: impl Into<String>, category: impl Into<String>) -> Self {
        FacetValue {
            attribute: attribute.into(),
            category: category.into(),
        }
    }
}

impl fmt::Display for FacetValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.attribute, self.category)
    }
}

/// Grid cell identity: the category path along each axis, outermost first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FacetKey {
    pub horizontal: Vec<FacetValue>,
    pub vertical: Vec<FacetValue>,
}

impl FacetKey {
    pub fn axis(&self, axis: Axis) -> &[FacetValue] {
        match axis {
            Axis::Horizontal => &self.horizontal,
            Axis::Vertical => &self.vertical,
        }
    }

    pub fn get(&self, attribute: &str) -> Option<&str> {
        self.horizontal
            .iter()
            .chain(&self.vertical)
            .find(|f| f.attribute == attribute)
            .map(|f| f.category.as_str())
    }
}

impl fmt::Display for FacetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |vals: &[FacetValue]| {
            vals.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "h[{}] v[{}]", join(&self.horizontal), join(&self.vertical))
    }
}
