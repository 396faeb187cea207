use std::process::Command;

use majorant_cli::{emit_table, run_study, Format, StudyConfig, CSV_HEADER};

fn small(n: usize, p2: Vec<usize>) -> StudyConfig {
    StudyConfig {
        n: vec![n],
        p2,
        ..StudyConfig::default()
    }
}

#[test]
fn table1_shape_on_the_20x20_mesh() {
    let report = run_study(&small(20, vec![1, 2, 3])).unwrap();
    assert!(report.failures.is_empty());
    let counts: Vec<(usize, usize, usize)> = report.rows.iter().map(|r| (r.n1, r.p2, r.n2)).collect();
    assert_eq!(counts, [(441, 1, 1240), (441, 2, 4080), (441, 3, 8520)]);
    for r in &report.rows {
        assert!(r.ieff >= 1.0);
        assert!((r.maj * r.maj - r.maj_sq).abs() <= 1e-12 * r.maj_sq);
    }
}

#[test]
fn quadratic_scalar_space_counts() {
    let cfg = StudyConfig { p1: 2, ..small(20, vec![1]) };
    let report = run_study(&cfg).unwrap();
    assert_eq!(report.rows[0].n1, 1681);
    assert_eq!(report.rows[0].n2, 1240);
}

#[test]
fn flux_degree_trend() {
    let report = run_study(&StudyConfig { k1: 2, k2: 3, ..small(8, vec![1, 2, 3]) }).unwrap();
    let rows = &report.rows;
    for w in rows.windows(2) {
        assert!(w[1].maj <= w[0].maj);
        assert!(w[1].equi < w[0].equi / 3.0);
        assert!(w[1].ieff < w[0].ieff);
    }
    // The dual part settles near the error instead of decreasing strictly.
    assert!((rows[2].dual / rows[1].dual - 1.0).abs() < 0.05);
}

#[test]
fn empty_flux_list_gives_empty_output() {
    let report = run_study(&small(4, vec![])).unwrap();
    assert!(report.rows.is_empty() && report.failures.is_empty());
    assert_eq!(emit_table(&report.rows, Format::Csv), "");
}

#[test]
fn invalid_config_is_rejected() {
    assert!(run_study(&small(4, vec![5])).is_err());
}

#[test]
fn failing_row_does_not_stop_the_study() {
    // Rules stop at degree 12, so every row fails but the study still returns.
    let cfg = StudyConfig { n: vec![3, 4], quad_degree: Some(13), ..small(3, vec![1, 2]) };
    let report = run_study(&cfg).unwrap();
    assert!(report.rows.is_empty());
    assert_eq!(report.failures.len(), 4);
}

#[test]
fn csv_round_trip() {
    let report = run_study(&small(5, vec![1, 2])).unwrap();
    let csv = emit_table(&report.rows, Format::Csv);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    for (line, row) in lines.zip(&report.rows) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 10);
        assert_eq!(cols[0].parse::<usize>().unwrap(), row.n1);
        assert_eq!(cols[1].parse::<usize>().unwrap(), row.p2);
        assert_eq!(cols[2].parse::<usize>().unwrap(), row.n2);
        assert_eq!(cols[3].parse::<usize>().unwrap(), row.k);
        for (text, value) in [(cols[4], row.maj_sq), (cols[5], row.dual), (cols[6], row.equi), (cols[8], row.maj), (cols[9], row.beta)] {
            let parsed: f64 = text.parse().unwrap();
            assert!((parsed - value).abs() <= 5e-3 * value.abs(), "{text} vs {value}");
        }
        let ieff: f64 = cols[7].parse().unwrap();
        assert!((ieff - row.ieff).abs() <= 5e-5);
    }
}

#[test]
fn markdown_has_eight_columns() {
    let report = run_study(&small(4, vec![1])).unwrap();
    let md = emit_table(&report.rows, Format::Markdown);
    let lines: Vec<&str> = md.lines().collect();
    assert_eq!(lines.len(), 3);
    for line in lines {
        assert_eq!(line.matches('|').count(), 9, "{line}");
    }
}

#[test]
fn repeated_runs_are_bit_identical() {
    let cfg = StudyConfig { k1: 2, k2: 3, ..small(6, vec![1, 2]) };
    assert_eq!(run_study(&cfg).unwrap(), run_study(&cfg).unwrap());
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_majorant"))
}

#[test]
fn cli_study_with_flags() {
    let out = binary()
        .args(["study", "--nx", "4", "--p2", "1,2", "--k1", "2", "--k2", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("25,1,56,"));
    assert!(String::from_utf8(out.stderr).unwrap().contains("k1 = 2"));
}

#[test]
fn cli_config_file_and_output_path() {
    let dir = std::env::temp_dir().join(format!("majorant-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("study.json");
    let table = dir.join("table.md");
    std::fs::write(&config, r#"{"n": [3], "p2": [1], "format": "markdown"}"#).unwrap();
    let status = binary()
        .args(["study", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&table)
        .status()
        .unwrap();
    assert!(status.success());
    let md = std::fs::read_to_string(&table).unwrap();
    assert!(md.starts_with("| N1 | p2 |"));
    assert!(md.contains("| 16 | 1 | 33 |"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn cli_reports_failures_with_nonzero_exit() {
    let status = binary()
        .args(["study", "--nx", "3", "--p2", "1", "--quad-degree", "13"])
        .status()
        .unwrap();
    assert!(!status.success());
    let status = binary().args(["study", "--nx", "3", "--p2", "7"]).status().unwrap();
    assert!(!status.success());
}

#[test]
fn cli_mesh_dump() {
    let out = binary().args(["mesh", "--nx", "1"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("vertices 4"));
    assert!(text.contains("triangles 2"));
    assert!(text.contains("edges 5"));
}
