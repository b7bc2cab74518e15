use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;

use aqs_core::ingest::{EdgeColumns, IngestOptions};
use aqs_core::{ingest_csv, ingest_readers, superlinks_of, supernodes_of, ColumnKind, Error, IngestConfig, IngestError, SculptState, MAIN_SUBSTRATE};

/// An income-census-like table: 14 attributes, mixed kinds, some missing.
fn census_csv(rows: usize) -> String {
    let work = ["Private", "Self-emp", "Federal-gov", "Local-gov", "State-gov"];
    let edu = ["Bachelors", "HS-grad", "Masters", "Some-college", "Doctorate", "11th"];
    let marital = ["Married", "Never-married", "Divorced", "Widowed"];
    let occupation = ["Tech-support", "Craft-repair", "Sales", "Exec-managerial", "Other-service"];
    let relation = ["Husband", "Wife", "Own-child", "Unmarried"];
    let race = ["White", "Black", "Asian-Pac-Islander", "Other"];
    let country = ["United-States", "Mexico", "Philippines", "Germany", "Canada"];
    let mut out = String::from(
        "age,workclass,fnlwgt,education,education-num,marital-status,occupation,relationship,race,sex,capital-gain,hours-per-week,native-country,income\n",
    );
    let mut x = 12345u64;
    let mut next = |n: u64| {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (x >> 33) % n
    };
    for _ in 0..rows {
        let pick = |xs: &[&str], i: u64| xs[i as usize % xs.len()].to_owned();
        let occ = if next(50) == 0 { String::new() } else { pick(&occupation, next(5)) };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            17 + next(73),
            pick(&work, next(5)),
            10_000 + next(1_000_000),
            pick(&edu, next(6)),
            1 + next(16),
            pick(&marital, next(4)),
            occ,
            pick(&relation, next(4)),
            pick(&race, next(4)),
            if next(2) == 0 { "Male" } else { "Female" },
            if next(10) == 0 { next(99_999) } else { 0 },
            1 + next(99),
            pick(&country, next(5)),
            if next(4) == 0 { ">50K" } else { "<=50K" },
        )
        .unwrap();
    }
    out
}

#[test]
fn census_sized_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("adult.csv");
    fs::write(&path, census_csv(45_222)).unwrap();
    let ds = ingest_csv(&IngestConfig::nodes(&path)).unwrap();
    assert_eq!(ds.row_count(), 45_222);
    assert_eq!(ds.columns().len(), 14);
    let kinds: BTreeMap<&str, ColumnKind> = ds.columns().iter().map(|c| (c.name(), c.kind())).collect();
    assert_eq!(kinds["age"], ColumnKind::Quantitative);
    assert_eq!(kinds["hours-per-week"], ColumnKind::Quantitative);
    assert_eq!(kinds["occupation"], ColumnKind::Nominal);
    assert_eq!(kinds["income"], ColumnKind::Nominal);
    assert!(!ds.has_edges());

    let state = SculptState::initial(&ds);
    let nodes = supernodes_of(&ds, &state, MAIN_SUBSTRATE).unwrap();
    assert!(matches!(superlinks_of(&ds, &nodes), Err(Error::NoEdges)));
}

#[test]
fn mpg_is_inferred_quantitative() {
    let ds = ingest_readers("name,mpg\na,10\nb,20.5\nc,31\n".as_bytes(), None::<&[u8]>, &IngestOptions::default()).unwrap();
    assert_eq!(ds.column("mpg").unwrap().kind(), ColumnKind::Quantitative);
    assert_eq!(ds.column("name").unwrap().kind(), ColumnKind::Nominal);
}

#[test]
fn edge_file_joins_on_the_key_column() {
    let dir = tempfile::tempdir().unwrap();
    let nodes = dir.path().join("papers.csv");
    let edges = dir.path().join("cites.csv");
    fs::write(&nodes, "doi,track\n10,InfoVis\n11,VAST\n12,InfoVis\n").unwrap();
    fs::write(&edges, "from,to,n\n10,11,2\n12,11,1.5\n11,10,1\n").unwrap();
    let mut config = IngestConfig::nodes(&nodes);
    config.edge_file = Some(edges);
    config.options.key_column = Some("doi".into());
    config.options.edge_columns = EdgeColumns {
        source: "from".into(),
        target: "to".into(),
        weight: Some("n".into()),
    };
    let ds = ingest_csv(&config).unwrap();
    assert_eq!(ds.column("doi").unwrap().kind(), ColumnKind::Nominal);
    let e = ds.edges().unwrap();
    assert_eq!(e.len(), 3);
    assert_eq!((e[1].source, e[1].target, e[1].weight), (2, 1, 1.5));

    let state = SculptState::initial(&ds);
    let nodes = supernodes_of(&ds, &state, MAIN_SUBSTRATE).unwrap();
    let links = superlinks_of(&ds, &nodes).unwrap();
    assert_eq!(links.len(), 1);
    assert_eq!(links[0].weight, 4.5);
}

#[test]
fn errors_name_the_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let err = ingest_csv(&IngestConfig::nodes(&missing)).unwrap_err();
    assert!(matches!(err, Error::Ingest(IngestError::Io { .. })));
    assert!(err.to_string().contains("nope.csv"));

    let ragged = "a,b\n1,2\n3\n";
    let err = ingest_readers(ragged.as_bytes(), None::<&[u8]>, &IngestOptions::default()).unwrap_err();
    match err {
        Error::Ingest(IngestError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
}

#[test]
fn sampling_keeps_file_order() {
    let csv = census_csv(5_000);
    let options = IngestOptions {
        sample: Some(500),
        sample_seed: 42,
        ..IngestOptions::default()
    };
    let a = ingest_readers(csv.as_bytes(), None::<&[u8]>, &options).unwrap();
    let b = ingest_readers(csv.as_bytes(), None::<&[u8]>, &options).unwrap();
    assert_eq!(a.row_count(), 500);
    assert_eq!(a, b);
    let full = ingest_readers(csv.as_bytes(), None::<&[u8]>, &IngestOptions::default()).unwrap();
    let fnl = |ds: &aqs_core::Dataset, r: u32| ds.column("fnlwgt").unwrap().value(r).to_csv_field().into_owned();
    let all: Vec<String> = (0..5_000).map(|r| fnl(&full, r)).collect();
    let mut last = 0;
    for r in 0..500 {
        let pos = all[last..].iter().position(|v| *v == fnl(&a, r)).unwrap();
        last += pos + 1;
    }
}
