use capcast_core::{fixtures, load_records, save_records, Ceilings, Error, Format};
use tempfile::TempDir;

#[test]
fn save_and_load_both_formats() {
    let ds = fixtures::agentic();
    let dir = TempDir::new().unwrap();
    for (name, format) in [("a.csv", Format::Csv), ("a.json", Format::Json)] {
        let path = dir.path().join(name);
        save_records(&ds, &path, format).unwrap();
        let back = load_records(&path, format, ds.ceilings().clone()).unwrap();
        assert_eq!(back, ds);
        assert_eq!(Format::from_path(&path), Some(format));
    }
}

#[test]
fn missing_file_reports_path() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("absent.csv");
    let err = load_records(&path, Format::Csv, Ceilings::default()).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains("absent.csv"), "{err}");
}

#[test]
fn ceiling_violation_in_file_is_rejected() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(
        &path,
        "model_id,release_date,benchmark:rebench\nm,2024-01-01,1.5\n",
    )
    .unwrap();
    assert!(load_records(&path, Format::Csv, Ceilings::default()).is_err());
    let ok = load_records(
        &path,
        Format::Csv,
        Ceilings::default().with("rebench", 1.67),
    )
    .unwrap();
    assert_eq!(ok.len(), 1);
}
