mod common;

use std::sync::Arc;

use aqs_core::{replay, Axis, Column, Dataset, Selection, Session, MAIN_SUBSTRATE};
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn undo_then_redo_restores_state(seed in any::<u64>(), ops in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (ds, specs) = random_table(&mut rng, 300, 4, 6);
        let mut s = session_with_specs(ds, &specs);
        for _ in 0..ops {
            if let Some(op) = random_op(&mut rng, &s) {
                let _ = s.apply(op);
            }
        }
        let end = s.state().clone();
        let applied = s.log().cursor;
        for _ in 0..applied {
            s.undo().unwrap();
        }
        prop_assert!(s.undo().is_err());
        for _ in 0..applied {
            s.redo().unwrap();
        }
        prop_assert_eq!(s.state(), &end);
        prop_assert_eq!(replay(s.dataset(), s.log().applied()).unwrap(), end);
    }

    #[test]
    fn facet_selection_is_union_of_its_cells(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (ds, specs) = random_table(&mut rng, 500, 3, 5);
        let (h, v) = random_axes(&mut rng, &ds);
        let mut s = session_with_specs(ds, &specs);
        for a in &h {
            s.pivot_partition(MAIN_SUBSTRATE, Axis::Horizontal, a).unwrap();
        }
        for a in &v {
            s.pivot_partition(MAIN_SUBSTRATE, Axis::Vertical, a).unwrap();
        }
        let grid = s.grid(MAIN_SUBSTRATE).unwrap();
        for axis in [Axis::Horizontal, Axis::Vertical] {
            for level in grid.levels(axis) {
                for label in &level.labels {
                    let sel = Selection::categories(MAIN_SUBSTRATE, axis, &level.attribute, [label]);
                    let rows = s.resolve_selection(&sel).unwrap();
                    let keys: Vec<_> = grid
                        .nodes
                        .iter()
                        .filter(|n| n.key.get(&level.attribute) == Some(label.as_str()))
                        .map(|n| n.key.clone())
                        .collect();
                    let by_nodes = s.resolve_selection(&Selection::nodes(MAIN_SUBSTRATE, keys)).unwrap();
                    prop_assert_eq!(rows, by_nodes);
                }
            }
        }
    }

    #[test]
    fn layout_is_a_pure_function(seed in any::<u64>(), w in 50.0f64..2000.0, h in 50.0f64..2000.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (ds, specs) = random_table(&mut rng, 500, 4, 6);
        let mut s = session_with_specs(ds, &specs);
        for _ in 0..10 {
            if let Some(op) = random_op(&mut rng, &s) {
                let _ = s.apply(op);
            }
        }
        for sub in s.state().substrates.clone() {
            let a = s.layout(sub.id, w, h).unwrap();
            let restored = Session::from_log(s.dataset().clone(), s.to_log()).unwrap();
            let b = restored.layout(sub.id, w, h).unwrap();
            prop_assert_eq!(a.to_json(), b.to_json());
            let total: usize = a.cells.iter().map(|c| c.count).sum();
            prop_assert_eq!(total, sub.live.len());
        }
    }
}

#[test]
fn pivot_order_only_changes_nesting() {
    let ds = Dataset::new(
        vec![
            Column::nominal("a", ["x", "y", "x", "y", "x"]),
            Column::nominal("b", ["p", "p", "q", "q", "q"]),
        ],
        None,
    )
    .unwrap();
    let ds = Arc::new(ds);
    let mut ab = Session::new(ds.clone());
    ab.pivot_partition(MAIN_SUBSTRATE, Axis::Horizontal, "a").unwrap();
    ab.pivot_partition(MAIN_SUBSTRATE, Axis::Horizontal, "b").unwrap();
    let mut ba = Session::new(ds);
    ba.pivot_partition(MAIN_SUBSTRATE, Axis::Horizontal, "b").unwrap();
    ba.pivot_partition(MAIN_SUBSTRATE, Axis::Horizontal, "a").unwrap();
    let mut x: Vec<_> = ab.grid(MAIN_SUBSTRATE).unwrap().nodes.into_iter().map(|n| n.rows.into_vec()).collect();
    let mut y: Vec<_> = ba.grid(MAIN_SUBSTRATE).unwrap().nodes.into_iter().map(|n| n.rows.into_vec()).collect();
    x.sort();
    y.sort();
    assert_eq!(x, y);
}
