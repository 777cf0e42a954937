use std::collections::BTreeMap;

use cuspwave::analysis::ConvergenceRecord;
use cuspwave::Shape;
use cuspwave_cli::emit::{ConstantsUsed, Metadata};
use cuspwave_cli::{emit_table, presets, read_json_table, ExperimentConfig, TableFormat, TableRow};

fn record(m: u32) -> ConvergenceRecord {
    ConvergenceRecord {
        m,
        e_m: -0.780_204_613_086_453,
        e_ref: -0.780_488_563_859,
        raw_error: 2.839_507_725_47e-4,
        predicted_error: 2.867_595e-4,
        corrected_error: -2.808_774e-6,
        psi_at_nuclei: vec![1.193_658_796_850_587_6, 1.193_658_796_691_921_7],
        residual_coupling: Some(2.8e-4),
        tail_fit: None,
    }
}

fn metadata() -> Metadata {
    let config = ExperimentConfig::load("fig1_z2").unwrap();
    Metadata {
        tool: "cuspwave".into(),
        version: "test".into(),
        timestamp: "2026-01-01T00:00:00Z".into(),
        experiment: "convergence".into(),
        table: "convergence".into(),
        config,
        constants: ConstantsUsed {
            a: 2.509_382_711_751_091_4,
            spherical_prefactor: 0.17,
            cubic_prefactor: 0.10,
            shape: Shape::Cubic,
            prefactor_used: 0.10,
        },
        slopes: BTreeMap::from([("raw_error".to_string(), -2.87)]),
        reference: vec![],
        failures: vec![],
        partial: false,
    }
}

#[test]
fn one_record_gives_header_and_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    emit_table(&[record(16)], TableFormat::Csv, &path, &metadata()).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("M,E_M,E_ref,raw_error"));
}

#[test]
fn csv_columns_match_schema_fields() {
    // every serialized field of the record gets exactly one column
    let fields = match serde_json::to_value(record(8)).unwrap() {
        serde_json::Value::Object(map) => map.len(),
        _ => unreachable!(),
    };
    assert_eq!(ConvergenceRecord::header().len(), fields);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    emit_table(
        &[record(8), record(12)],
        TableFormat::Csv,
        &path,
        &metadata(),
    )
    .unwrap();
    let mut reader = csv::Reader::from_path(&path).unwrap();
    assert_eq!(reader.headers().unwrap().len(), fields);
    for row in reader.records() {
        assert_eq!(row.unwrap().len(), fields);
    }
}

#[test]
fn csv_keeps_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let r = record(16);
    emit_table(
        std::slice::from_ref(&r),
        TableFormat::Csv,
        &path,
        &metadata(),
    )
    .unwrap();
    let mut reader = csv::Reader::from_path(&path).unwrap();
    let row = reader.records().next().unwrap().unwrap();
    assert_eq!(row[1].parse::<f64>().unwrap(), r.e_m);
    let psi: Vec<f64> = row[6].split(';').map(|v| v.parse().unwrap()).collect();
    assert_eq!(psi, r.psi_at_nuclei);
    assert_eq!(&row[8], "");
}

#[test]
fn json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    let records = vec![record(8), record(12), record(16)];
    let meta = metadata();
    emit_table(&records, TableFormat::Json, &path, &meta).unwrap();
    let (back_meta, back): (Metadata, Vec<ConvergenceRecord>) = read_json_table(&path).unwrap();
    assert_eq!(back, records);
    assert_eq!(back_meta, meta);
}

#[test]
fn empty_table_and_unwritable_path_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    let none: Vec<ConvergenceRecord> = vec![];
    assert!(emit_table(
        &none,
        TableFormat::Csv,
        &dir.path().join("x.csv"),
        &metadata()
    )
    .is_err());
    let bad = dir.path().join("missing").join("x.csv");
    assert!(emit_table(&[record(4)], TableFormat::Csv, &bad, &metadata()).is_err());
}

#[test]
fn every_preset_parses() {
    for name in presets::names() {
        let cfg = ExperimentConfig::load(name).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(!cfg.discretization.cutoffs.is_empty());
    }
}

#[test]
fn config_errors_name_the_field() {
    let base = presets::get("fig1_z2").unwrap();
    let cases = [
        (
            base.replace("cutoffs = [8, 12, 16, 20, 24, 32]", "cutoffs = []"),
            "discretization.cutoffs",
        ),
        (
            base.replace("cutoffs = [8, 12, 16, 20, 24, 32]", "cutoffs = [8, 8]"),
            "discretization.cutoffs",
        ),
        (base.replace("m_ref = 48", "m_ref = 32"), "reference.m_ref"),
        (base.replace("edge = 2.0", "edge = -1.0"), "cell.edge"),
        (
            base.replace("residual_tol = 1e-8", "residual_tol = 0.0"),
            "solver",
        ),
    ];
    for (text, field) in cases {
        let err = ExperimentConfig::from_toml_str(&text, "case").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains(field), "{err}");
    }
    // parse failures carry the line
    let err = ExperimentConfig::from_toml_str(&base.replace("edge = 2.0", "edge = 2.0.0"), "case")
        .unwrap_err();
    assert!(err.to_string().contains("line"), "{err}");
    let err =
        ExperimentConfig::from_toml_str(&format!("{base}\n[extra]\nx = 1\n"), "case").unwrap_err();
    assert!(err.to_string().contains("extra"), "{err}");
}
