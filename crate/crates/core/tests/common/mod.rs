#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use aqs_core::model::{ColumnData, MISSING_LABEL};
use aqs_core::{
    AttributeSpec, Axis, Binning, Column, ColumnKind, Dataset, Edge, FacetKey, OpKind, RowSet,
    SculptState, Selection, Session, SortOrder, SubstrateId, ViewFlag,
};
use rand::seq::IndexedRandom;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

/// A random table of nominal and integer-valued quantitative columns.
///
/// Quantitative columns get explicit integer bin edges so the oracle can
/// recompute bins without floating-point doubt.
pub fn random_table<R: Rng>(rng: &mut R, max_rows: usize, max_attrs: usize, max_cats: usize) -> (Dataset, Vec<AttributeSpec>) {
    let rows = rng.random_range(1..=max_rows);
    let attrs = rng.random_range(1..=max_attrs);
    let mut columns = Vec::new();
    let mut specs = Vec::new();
    for a in 0..attrs {
        let name = format!("a{a}");
        let missing = if rng.random_bool(0.3) { 0.05 } else { 0.0 };
        if rng.random_bool(0.25) {
            let values: Vec<f64> = (0..rows)
                .map(|_| {
                    if rng.random_bool(missing) {
                        f64::NAN
                    } else {
                        rng.random_range(0..100) as f64
                    }
                })
                .collect();
            let bins = rng.random_range(1..max_cats.max(2));
            let mut edges: Vec<f64> = (1..100).map(|x| x as f64).collect::<Vec<_>>()
                .choose_multiple(rng, bins - 1)
                .copied()
                .collect();
            edges.push(0.0);
            edges.sort_by(f64::total_cmp);
            let column = Column::quantitative(name.clone(), values);
            let mut spec = AttributeSpec::default_for(&column);
            spec.binning = Some(Binning::ExplicitEdges { edges });
            columns.push(column);
            specs.push(spec);
        } else {
            let cats = rng.random_range(1..=max_cats);
            let values: Vec<String> = (0..rows)
                .map(|_| {
                    if rng.random_bool(missing) {
                        String::new()
                    } else {
                        format!("c{}", rng.random_range(0..cats))
                    }
                })
                .collect();
            let column = Column::nominal(name.clone(), values);
            specs.push(AttributeSpec::default_for(&column));
            columns.push(column);
        }
    }
    (Dataset::new(columns, None).unwrap(), specs)
}

/// Adds random integer- or real-weighted edges to a table.
pub fn with_random_edges<R: Rng>(rng: &mut R, dataset: &Dataset, max_edges: usize, integer: bool) -> Dataset {
    let n = dataset.row_count() as u32;
    let count = rng.random_range(0..=max_edges);
    let edges = (0..count)
        .map(|_| Edge {
            source: rng.random_range(0..n),
            target: rng.random_range(0..n),
            weight: if integer {
                rng.random_range(0..20) as f64
            } else {
                rng.random::<f64>() * 10.0
            },
        })
        .collect();
    Dataset::new(dataset.columns().to_vec(), Some(edges)).unwrap()
}

pub fn session_with_specs(dataset: Dataset, specs: &[AttributeSpec]) -> Session {
    let mut s = Session::new(Arc::new(dataset));
    for spec in specs {
        if spec != s.state().spec(&spec.name).unwrap() {
            s.configure_attribute(spec.clone()).unwrap();
        }
    }
    s
}

/// Random disjoint horizontal and vertical attribute stacks.
pub fn random_axes<R: Rng>(rng: &mut R, dataset: &Dataset) -> (Vec<String>, Vec<String>) {
    let mut names: Vec<String> = dataset.columns().iter().map(|c| c.name().to_owned()).collect();
    let take = rng.random_range(0..=names.len());
    names = names.choose_multiple(rng, take).cloned().collect();
    let split = rng.random_range(0..=names.len());
    let v = names.split_off(split);
    (names, v)
}

/// Category label of `row` for `spec`, computed directly from raw values.
pub fn oracle_label(column: &Column, spec: &AttributeSpec, row: u32) -> String {
    match (column.data(), spec.kind) {
        (ColumnData::Nominal { dictionary, codes }, _) => match codes[row as usize] {
            u32::MAX => MISSING_LABEL.to_owned(),
            c => dictionary[c as usize].clone(),
        },
        (ColumnData::Quantitative(v), ColumnKind::Nominal) => {
            let x = v[row as usize];
            if x.is_nan() {
                MISSING_LABEL.to_owned()
            } else {
                format!("{x}")
            }
        }
        (ColumnData::Quantitative(v), ColumnKind::Quantitative) => {
            let x = v[row as usize];
            if x.is_nan() {
                return MISSING_LABEL.to_owned();
            }
            let Some(Binning::ExplicitEdges { edges }) = &spec.binning else {
                panic!("oracle needs explicit edges");
            };
            let mut i = 0;
            while i + 1 < edges.len() && edges[i + 1] <= x {
                i += 1;
            }
            match edges.get(i + 1) {
                Some(hi) => format!("[{}, {})", edges[i], hi),
                None => format!("[{}, ∞)", edges[i]),
            }
        }
    }
}

/// Naive nested group-by: row sets keyed by the label tuple along each axis.
pub fn oracle_group_by(
    dataset: &Dataset,
    specs: &[AttributeSpec],
    live: &RowSet,
    h: &[String],
    v: &[String],
) -> BTreeMap<(Vec<String>, Vec<String>), Vec<u32>> {
    let label = |attr: &String, row: u32| {
        let spec = specs.iter().find(|s| &s.name == attr).unwrap();
        oracle_label(dataset.column(attr).unwrap(), spec, row)
    };
    let mut groups: BTreeMap<(Vec<String>, Vec<String>), Vec<u32>> = BTreeMap::new();
    for row in live.iter() {
        let hk = h.iter().map(|a| label(a, row)).collect();
        let vk = v.iter().map(|a| label(a, row)).collect();
        groups.entry((hk, vk)).or_default().push(row);
    }
    groups
}

pub fn key_labels(key: &FacetKey) -> (Vec<String>, Vec<String>) {
    (
        key.horizontal.iter().map(|f| f.category.clone()).collect(),
        key.vertical.iter().map(|f| f.category.clone()).collect(),
    )
}

fn random_categories<R: Rng>(rng: &mut R, labels: &[String], at_least: usize) -> Option<Vec<String>> {
    if labels.len() < at_least {
        return None;
    }
    let k = rng.random_range(at_least..=labels.len());
    Some(labels.choose_multiple(rng, k).cloned().collect())
}

/// A random selection over the current grid of `substrate`.
pub fn random_selection<R: Rng>(rng: &mut R, session: &Session, substrate: SubstrateId) -> Option<Selection> {
    let grid = session.grid(substrate).ok()?;
    if grid.nodes.is_empty() {
        return None;
    }
    let axis = if rng.random_bool(0.5) { Axis::Horizontal } else { Axis::Vertical };
    let levels = grid.levels(axis);
    if levels.is_empty() || rng.random_bool(0.4) {
        let k = rng.random_range(1..=grid.nodes.len().min(4));
        let keys = grid.nodes.choose_multiple(rng, k).map(|n| n.key.clone()).collect();
        return Some(Selection::nodes(substrate, keys));
    }
    let level = levels.choose(rng)?;
    let cats = random_categories(rng, &level.labels, 1)?;
    Some(Selection::categories(substrate, axis, &level.attribute, cats))
}

/// A random operation; it may be one that fails its preconditions.
pub fn random_op<R: Rng>(rng: &mut R, session: &Session) -> Option<OpKind> {
    let state = session.state();
    let sub = state.substrates.choose(rng)?;
    let substrate = sub.id;
    let attrs: Vec<String> = session.dataset().columns().iter().map(|c| c.name().to_owned()).collect();
    let attr = attrs.choose(rng)?.clone();
    let axis = if rng.random_bool(0.5) { Axis::Horizontal } else { Axis::Vertical };
    Some(match rng.random_range(0..13) {
        0..=2 => OpKind::PivotPartition { substrate, axis, attribute: attr },
        3 => {
            let placed: Vec<(Axis, String)> = sub
                .h_axis
                .iter()
                .map(|a| (Axis::Horizontal, a.clone()))
                .chain(sub.v_axis.iter().map(|a| (Axis::Vertical, a.clone())))
                .collect();
            let (axis, attribute) = placed.choose(rng).cloned().unwrap_or((axis, attr));
            OpKind::Unpartition { substrate, axis, attribute }
        }
        4 => OpKind::Peek { substrate, attribute: attr },
        5 => OpKind::ClearPeek { substrate },
        6 => {
            let grid = session.grid(substrate).ok()?;
            let levels = grid.levels(axis);
            let level = levels.choose(rng)?;
            let cats = random_categories(rng, &level.labels, 2)?;
            let name = rng.random_bool(0.5).then(|| format!("p{}", rng.random_range(0..3)));
            OpKind::Pile {
                selection: Selection::categories(substrate, axis, &level.attribute, cats),
                name,
            }
        }
        7 | 8 => OpKind::Project { selection: random_selection(rng, session, substrate)? },
        9 => OpKind::Prune { selection: random_selection(rng, session, substrate)? },
        10 => OpKind::PruneByFrequency {
            substrate,
            attribute: attr,
            min_count: rng.random_range(1..20),
        },
        11 => {
            let column = session.dataset().column(&attr)?;
            let mut spec = state.spec(&attr).ok()?.clone();
            match rng.random_range(0..3) {
                0 => spec.sort_order = SortOrder::Alphabetical,
                1 => spec.sort_order = SortOrder::Numerical,
                _ if column.kind() == ColumnKind::Quantitative && spec.kind == ColumnKind::Quantitative => {
                    spec.binning = Some(Binning::ExplicitEdges {
                        edges: vec![0.0, rng.random_range(1..50) as f64, rng.random_range(50..100) as f64],
                    });
                }
                _ => spec.sort_order = SortOrder::Numerical,
            }
            OpKind::Configure { spec }
        }
        _ => OpKind::ToggleView {
            substrate,
            flag: if rng.random_bool(0.5) { ViewFlag::Arrows } else { ViewFlag::Links },
            enabled: rng.random_bool(0.5),
        },
    })
}

/// Rows per supernode, keyed by facet labels, for comparing derivations.
pub fn counts_by_key(dataset: &Dataset, state: &SculptState, substrate: SubstrateId) -> BTreeMap<String, usize> {
    aqs_core::supernodes_of(dataset, state, substrate)
        .unwrap()
        .into_iter()
        .map(|n| (n.key.to_string(), n.count))
        .collect()
}
