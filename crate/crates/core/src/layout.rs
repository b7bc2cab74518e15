//! Renderer-agnostic geometry for one substrate.
//!
//! Cell sizing: with `N_x` leaf columns and `N_y` leaf rows on a
//! `width × height` canvas,
//!
//! ```text
//! S    = min(width / N_x, height / N_y)
//! cell = S        if S >= MIN_CELL_SIZE
//!      = MIN_CELL_SIZE otherwise, and the drawing surface grows to
//!        (N_x · MIN_CELL_SIZE) × (N_y · MIN_CELL_SIZE), to be scrolled.
//! ```
//!
//! `cell` is the size of a grid cell; marks are drawn with a diameter of
//! [`NODE_DIAMETER_RATIO`] × `cell` so neighbours never touch.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::grid::{category_counts, AxisLevel, Grid, Superlink};
use crate::model::{Axis, Categories, Dataset, FacetKey, SculptState, SubstrateId};

/// Smallest cell size in pixels (α).
pub const MIN_CELL_SIZE: f64 = 5.0;
pub const NODE_DIAMETER_RATIO: f64 = 0.8;
/// Counts are printed inside marks from this cell size up.
pub const COUNT_LABEL_MIN_CELL: f64 = 24.0;
/// Arc control point offset, as a fraction of the chord length.
pub const LINK_BULGE: f64 = 0.15;
pub const LINK_OPACITY: f64 = 0.3;
pub const LINK_COLOR: &str = "#d3d3d3";
pub const LINK_MIN_THICKNESS: f64 = 1.0;
/// Hover colour of links leaving the hovered node.
pub const ORIGIN_COLOR: &str = "#c8a2e8";
/// Hover colour of links entering the hovered node.
pub const INCOMING_COLOR: &str = "#a6e3a1";
/// Grids above this many cells only list their non-empty cells.
pub const MAX_LAYOUT_CELLS: usize = 1 << 20;
/// Approximate glyph width used to decide whether attribute names fit.
const CHAR_WIDTH: f64 = 7.0;

const RAMP_LOW: [u8; 3] = [0xde, 0xeb, 0xf7];
const RAMP_HIGH: [u8; 3] = [0x08, 0x51, 0x9c];
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellGeometry {
    pub cell_size: f64,
    pub surface_width: f64,
    pub surface_height: f64,
    /// The surface is larger than the canvas and needs scrolling.
    pub extended: bool,
}

/// Cell size and drawing surface for an `n_x × n_y` grid.
pub fn cell_geometry(canvas_width: f64, canvas_height: f64, n_x: usize, n_y: usize) -> CellGeometry {
    let (nx, ny) = (n_x.max(1) as f64, n_y.max(1) as f64);
    let s = (canvas_width / nx).min(canvas_height / ny);
    if s < MIN_CELL_SIZE {
        CellGeometry {
            cell_size: MIN_CELL_SIZE,
            surface_width: nx * MIN_CELL_SIZE,
            surface_height: ny * MIN_CELL_SIZE,
            extended: true,
        }
    } else {
        CellGeometry {
            cell_size: s,
            surface_width: canvas_width,
            surface_height: canvas_height,
            extended: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeekSlice {
    pub category: String,
    pub count: usize,
    pub fraction: f64,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMark {
    pub key: FacetKey,
    pub column: usize,
    pub row: usize,
    pub cx: f64,
    pub cy: f64,
    pub count: usize,
    /// count / max count, in [0, 1].
    pub color_value: f64,
    pub color: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peek: Option<Vec<PeekSlice>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSpan {
    pub category: String,
    pub piled: bool,
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelLevel {
    pub attribute: String,
    pub level: usize,
    pub show_name: bool,
    pub spans: Vec<LabelSpan>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkMark {
    pub id: usize,
    pub source: FacetKey,
    pub target: FacetKey,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    /// Quadratic control point.
    pub cx: f64,
    pub cy: f64,
    pub self_loop: bool,
    pub weight: f64,
    pub edge_count: u64,
    pub thickness: f64,
    pub arrow: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkStyle {
    pub color: String,
    pub opacity: f64,
    pub origin_color: String,
    pub incoming_color: String,
}

impl Default for LinkStyle {
    fn default() -> Self {
        LinkStyle {
            color: LINK_COLOR.into(),
            opacity: LINK_OPACITY,
            origin_color: ORIGIN_COLOR.into(),
            incoming_color: INCOMING_COLOR.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridLayout {
    pub substrate: SubstrateId,
    pub canvas_width: f64,
    pub canvas_height: f64,
    pub surface_width: f64,
    pub surface_height: f64,
    pub extended: bool,
    pub n_x: usize,
    pub n_y: usize,
    pub cell_size: f64,
    pub node_radius: f64,
    pub show_counts: bool,
    pub max_count: usize,
    pub peek: Option<String>,
    pub empty_cells_omitted: bool,
    pub cells: Vec<CellMark>,
    pub h_labels: Vec<LabelLevel>,
    pub v_labels: Vec<LabelLevel>,
    pub show_links: bool,
    pub show_arrows: bool,
    pub link_style: LinkStyle,
    pub links: Vec<LinkMark>,
}

impl GridLayout {
    pub fn cell(&self, key: &FacetKey) -> Option<&CellMark> {
        self.cells.iter().find(|c| &c.key == key)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("layout serializes")
    }
}

fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let c: Vec<u8> = RAMP_LOW
        .iter()
        .zip(RAMP_HIGH)
        .map(|(&a, b)| (a as f64 + (b as f64 - a as f64) * t).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

pub fn palette_color(category_index: usize) -> &'static str {
    PALETTE[category_index % PALETTE.len()]
}

/// Nested label spans of one axis laid over `extent` pixels.
///
/// Level 0 holds the outermost attribute; each span of level `i` covers
/// exactly the spans of level `i + 1` nested in it.
pub fn axis_label_tree(grid: &Grid, axis: Axis, extent: f64) -> Vec<LabelLevel> {
    if grid.nodes.is_empty() {
        return Vec::new();
    }
    label_levels(grid.levels(axis), extent, axis == Axis::Vertical)
}

fn label_levels(levels: &[AxisLevel], extent: f64, vertical: bool) -> Vec<LabelLevel> {
    let leaves: usize = levels.iter().map(|l| l.labels.len()).product();
    if leaves == 0 {
        return Vec::new();
    }
    let pitch = extent / leaves as f64;
    let mut spans_so_far = 1usize;
    levels
        .iter()
        .enumerate()
        .map(|(i, level)| {
            let d = level.labels.len();
            let count = spans_so_far * d;
            let per_span = leaves / count;
            spans_so_far = count;
            let width = per_span as f64 * pitch;
            let spans = (0..count)
                .map(|s| LabelSpan {
                    category: level.labels[s % d].clone(),
                    piled: level.piled[s % d],
                    start: (s * per_span) as f64 * pitch,
                    end: ((s + 1) * per_span) as f64 * pitch,
                })
                .collect();
            let show_name = if vertical {
                i == 0
            } else {
                width * d as f64 >= CHAR_WIDTH * level.attribute.chars().count() as f64
            };
            LabelLevel {
                attribute: level.attribute.clone(),
                level: i,
                show_name,
                spans,
            }
        })
        .collect()
}

/// Geometry of `grid` on a `canvas_width × canvas_height` card body.
pub fn compute_layout(
    exec: Exec,
    dataset: &Dataset,
    state: &SculptState,
    grid: &Grid,
    links: Option<&[Superlink]>,
    canvas_width: f64,
    canvas_height: f64,
) -> Result<GridLayout> {
    if !(canvas_width > 0.0 && canvas_height > 0.0 && canvas_width.is_finite() && canvas_height.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "canvas must be positive, got {canvas_width}×{canvas_height}"
        )));
    }
    let sub = state.substrate(grid.substrate)?;
    let (n_x, n_y) = if grid.nodes.is_empty() {
        (0, 0)
    } else {
        (grid.n_columns(), grid.n_rows())
    };
    let geom = cell_geometry(canvas_width, canvas_height, n_x, n_y);
    let col_pitch = geom.surface_width / n_x.max(1) as f64;
    let row_pitch = geom.surface_height / n_y.max(1) as f64;
    let center = |c: usize, r: usize| ((c as f64 + 0.5) * col_pitch, (r as f64 + 0.5) * row_pitch);
    let max_count = grid.max_count();
    let color_value = |count: usize| {
        if max_count == 0 {
            0.0
        } else {
            count as f64 / max_count as f64
        }
    };

    let peek_slices: Vec<Option<Vec<PeekSlice>>> = match &sub.peek {
        Some(attr) => {
            let column = dataset.require_column(attr)?;
            let cats = Categories::new(column, state.spec(attr)?, &sub.piles_for(attr));
            let count_node = |rows: &[u32], inner: Exec| {
                let counts = category_counts(inner, rows, &cats);
                let total: usize = counts.iter().sum();
                Some(
                    counts
                        .iter()
                        .enumerate()
                        .filter(|(_, n)| **n > 0)
                        .map(|(i, &n)| PeekSlice {
                            category: cats.labels()[i].clone(),
                            count: n,
                            fraction: n as f64 / total as f64,
                            color: palette_color(i).to_owned(),
                        })
                        .collect(),
                )
            };
            if grid.nodes.len() < 64 {
                grid.nodes
                    .iter()
                    .map(|n| count_node(n.rows.as_slice(), exec))
                    .collect()
            } else {
                exec.map(&grid.nodes, |n| count_node(n.rows.as_slice(), Exec::Sequential))
            }
        }
        None => vec![None; grid.nodes.len()],
    };

    let mark = |node_idx: Option<usize>, column: usize, row: usize| {
        let (cx, cy) = center(column, row);
        let (key, count, peek) = match node_idx {
            Some(i) => {
                let n = &grid.nodes[i];
                (n.key.clone(), n.count, peek_slices[i].clone())
            }
            None => (grid.cell_key(column, row), 0, None),
        };
        CellMark {
            key,
            column,
            row,
            cx,
            cy,
            count,
            color_value: color_value(count),
            color: ramp(color_value(count)),
            peek,
        }
    };
    let total_cells = n_x.saturating_mul(n_y);
    let empty_cells_omitted = total_cells > MAX_LAYOUT_CELLS;
    let cells: Vec<CellMark> = if grid.nodes.is_empty() {
        Vec::new()
    } else if empty_cells_omitted {
        (0..grid.nodes.len())
            .map(|i| mark(Some(i), grid.nodes[i].column, grid.nodes[i].row))
            .collect()
    } else {
        let mut next = 0;
        let mut out = Vec::with_capacity(total_cells);
        for c in 0..n_x {
            for r in 0..n_y {
                let hit = grid
                    .nodes
                    .get(next)
                    .filter(|n| n.column == c && n.row == r)
                    .map(|_| next);
                if hit.is_some() {
                    next += 1;
                }
                out.push(mark(hit, c, r));
            }
        }
        out
    };

    let node_radius = geom.cell_size * NODE_DIAMETER_RATIO / 2.0;
    let links: Vec<LinkMark> = match links {
        Some(links) if sub.show_links => {
            let max_w = links.iter().map(|l| l.weight).fold(0.0, f64::max);
            let max_thick = node_radius.max(LINK_MIN_THICKNESS);
            links
                .iter()
                .enumerate()
                .map(|(id, l)| {
                    let s = &grid.nodes[l.source_node];
                    let t = &grid.nodes[l.target_node];
                    let (x1, y1) = center(s.column, s.row);
                    let (x2, y2) = center(t.column, t.row);
                    let self_loop = l.source_node == l.target_node;
                    let (cx, cy) = if self_loop {
                        (x1, y1 - 3.0 * node_radius)
                    } else {
                        let (mx, my) = ((x1 + x2) / 2.0, (y1 + y2) / 2.0);
                        (mx - (y2 - y1) * LINK_BULGE, my + (x2 - x1) * LINK_BULGE)
                    };
                    let thickness = if max_w > 0.0 {
                        LINK_MIN_THICKNESS + (max_thick - LINK_MIN_THICKNESS) * l.weight / max_w
                    } else {
                        LINK_MIN_THICKNESS
                    };
                    LinkMark {
                        id,
                        source: l.source.clone(),
                        target: l.target.clone(),
                        x1,
                        y1,
                        x2,
                        y2,
                        cx,
                        cy,
                        self_loop,
                        weight: l.weight,
                        edge_count: l.edge_count,
                        thickness,
                        arrow: sub.show_arrows,
                    }
                })
                .collect()
        }
        _ => Vec::new(),
    };

    let h_labels = axis_label_tree(grid, Axis::Horizontal, geom.surface_width);
    let v_labels = axis_label_tree(grid, Axis::Vertical, geom.surface_height);

    Ok(GridLayout {
        substrate: grid.substrate,
        canvas_width,
        canvas_height,
        surface_width: geom.surface_width,
        surface_height: geom.surface_height,
        extended: geom.extended,
        n_x,
        n_y,
        cell_size: geom.cell_size,
        node_radius,
        show_counts: geom.cell_size >= COUNT_LABEL_MIN_CELL,
        max_count,
        peek: sub.peek.clone(),
        empty_cells_omitted,
        cells,
        h_labels,
        v_labels,
        show_links: sub.show_links && dataset.has_edges(),
        show_arrows: sub.show_arrows,
        link_style: LinkStyle::default(),
        links,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRef {
    pub level: usize,
    pub span: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoverHighlight {
    pub key: FacetKey,
    pub count: usize,
    pub h_labels: Vec<LabelRef>,
    pub v_labels: Vec<LabelRef>,
    /// Links leaving the node, drawn in [`ORIGIN_COLOR`].
    pub origin: Vec<usize>,
    /// Links entering the node, drawn in [`INCOMING_COLOR`].
    pub incoming: Vec<usize>,
}

fn label_refs(levels: &[LabelLevel], leaf: usize, leaves: usize) -> Vec<LabelRef> {
    levels
        .iter()
        .map(|l| LabelRef {
            level: l.level,
            span: leaf / (leaves / l.spans.len()),
        })
        .collect()
}

/// What to emphasise while `key` is hovered.
pub fn hover_highlight_model(layout: &GridLayout, key: &FacetKey) -> Result<HoverHighlight> {
    let cell = layout
        .cell(key)
        .ok_or_else(|| Error::DanglingKey(key.to_string()))?;
    Ok(HoverHighlight {
        key: key.clone(),
        count: cell.count,
        h_labels: label_refs(&layout.h_labels, cell.column, layout.n_x),
        v_labels: label_refs(&layout.v_labels, cell.row, layout.n_y),
        origin: layout
            .links
            .iter()
            .filter(|l| &l.source == key)
            .map(|l| l.id)
            .collect(),
        incoming: layout
            .links
            .iter()
            .filter(|l| &l.target == key)
            .map(|l| l.id)
            .collect(),
    })
}
