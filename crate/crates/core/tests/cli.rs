use std::fs;

use ris_vlc::cli::{run, EXIT_DOMAIN, EXIT_IO, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ris-vlc").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err, false);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.push("--json");
    let r = cli(&a);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    ris_vlc::datasets::validate_report_value(&v).unwrap();
    v
}

fn result(v: &Value, key: &str) -> f64 {
    v["results"][key]["value"]
        .as_f64()
        .unwrap_or_else(|| panic!("missing {key}"))
}

#[test]
fn simulate_enhanced_reports_table_power() {
    let v = json(&[
        "simulate",
        "--mode",
        "enhanced",
        "--e0",
        "0.4",
        "--device",
        "3t2mb-4",
        "--tx-power",
        "6",
    ]);
    assert!((result(&v, "pd_power") - 6.0037).abs() < 1e-12);
    assert_eq!(v["results"]["pd_state"], "Linear");
    assert_eq!(v["results"]["pd_power"]["unit"], "mW");
    assert_eq!(v["command"], "simulate");

    let r = cli(&[
        "simulate",
        "--mode",
        "enhanced",
        "--e0",
        "0.4",
        "--device",
        "3t2mb-4",
        "--tx-power",
        "6",
    ]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.stdout.contains("6.0037 mW"));
    assert!(!r.stdout.contains("\x1b["));
}

#[test]
fn simulate_relay_at_range_sits_at_sensitivity() {
    let v = json(&[
        "simulate",
        "--mode",
        "relay",
        "--e0",
        "1.2",
        "--tx-power",
        "6",
        "--d-ris-pd",
        "6.57",
    ]);
    assert!((result(&v, "pd_power") - 6.0).abs() < 1e-3);
    assert!(result(&v, "range_margin").abs() < 0.02);
}

#[test]
fn simulate_saturation_boundary() {
    let v = json(&[
        "--pd-sat",
        "6.01",
        "simulate",
        "--mode",
        "enhanced",
        "--e0",
        "1.2",
        "--tx-power",
        "6",
    ]);
    assert_eq!(v["results"]["pd_state"], "Saturated");
}

#[test]
fn enhanced_mode_rejects_ris_pd_distance() {
    let r = cli(&[
        "simulate",
        "--mode",
        "enhanced",
        "--e0",
        "0.4",
        "--tx-power",
        "6",
        "--d-ris-pd",
        "1",
    ]);
    assert_eq!(r.code, EXIT_USAGE);
    assert!(r.stderr.contains("--d-ris-pd"), "{}", r.stderr);
}

#[test]
fn relaxed_cell_below_threshold_voltage() {
    let v = json(&[
        "simulate",
        "--mode",
        "enhanced",
        "--e0",
        "0.4",
        "--tx-power",
        "6",
        "--v-applied",
        "0",
    ]);
    assert_eq!(v["results"]["device_state"], "Relaxed");
    assert!((result(&v, "pd_power") - 5.76).abs() < 1e-12);
    assert_eq!(v["results"]["pd_state"], "BelowSensitivity");
    assert!(result(&v, "range_margin") < 0.0);
}

#[test]
fn out_of_curve_field_is_a_domain_error() {
    let r = cli(&[
        "simulate",
        "--mode",
        "enhanced",
        "--e0",
        "1.3",
        "--tx-power",
        "6",
    ]);
    assert_eq!(r.code, EXIT_DOMAIN);
    assert!(r.stderr.contains("e0_v_per_um"), "{}", r.stderr);
}

#[test]
fn tune_feasible_and_infeasible() {
    let v = json(&["tune", "--device", "3t2mb-8-tnf", "--target-range", "6.0"]);
    assert_eq!(result(&v, "knot_field"), 0.9);
    let r = cli(&["tune", "--device", "3t2mb-8-tnf", "--target-range", "6.0"]);
    assert!(r.stdout.contains("0.9 V/um"));

    let r = cli(&["tune", "--device", "3t2mb-8-tnf", "--target-range", "7.0"]);
    assert_eq!(r.code, EXIT_DOMAIN);
    assert!(
        r.stderr.contains("infeasible") && r.stderr.contains("6.56"),
        "{}",
        r.stderr
    );
    assert!(r.stdout.is_empty());
}

#[test]
fn peak_and_fit_defaults() {
    assert_eq!(
        result(&json(&["peak", "--device", "3t2mb-4"]), "peak_field"),
        0.5
    );
    let z = result(&json(&["fit-air"]), "zeta_air_db_per_m");
    assert!((0.0041..=0.0045).contains(&z));
}

#[test]
fn validate_table_runs_with_no_flags() {
    let v = json(&["validate-table"]);
    let rows = v["results"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 48);
    assert_eq!(result(&v, "range_mismatches"), 0.0);
    let last = rows.last().unwrap();
    assert_eq!(last["flags"], serde_json::json!(["GainMismatch"]));
}

#[test]
fn sweep_rows_match_individual_simulations() {
    let r = cli(&[
        "sweep",
        "--device",
        "3t2mb-8",
        "--e0-from",
        "0.1",
        "--e0-to",
        "1.2",
        "--e0-step",
        "0.05",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let mut lines = r.stdout.lines();
    assert_eq!(lines.next(), Some("e0_v_per_um,pe_mw,gain_db,range_m"));
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 23);
    for row in &rows {
        let v = json(&[
            "simulate",
            "--device",
            "3t2mb-8",
            "--mode",
            "enhanced",
            "--e0",
            &row[0],
            "--tx-power",
            "6",
        ]);
        assert_eq!(
            row[1].parse::<f64>().unwrap(),
            result(&v, "pd_power"),
            "e0 {}",
            row[0]
        );
        assert_eq!(row[2].parse::<f64>().unwrap(), result(&v, "ris_gain"));
        assert_eq!(row[3].parse::<f64>().unwrap(), result(&v, "range_margin"));
    }
}

#[test]
fn sweep_rejects_bad_grid() {
    assert_eq!(
        cli(&[
            "sweep",
            "--e0-from",
            "0.1",
            "--e0-to",
            "1.2",
            "--e0-step",
            "0"
        ])
        .code,
        EXIT_USAGE
    );
    assert_eq!(
        cli(&[
            "sweep",
            "--e0-from",
            "1.0",
            "--e0-to",
            "0.5",
            "--e0-step",
            "0.1"
        ])
        .code,
        EXIT_USAGE
    );
    // grid leaves the tabulated range
    assert_eq!(
        cli(&[
            "sweep",
            "--e0-from",
            "1.0",
            "--e0-to",
            "1.5",
            "--e0-step",
            "0.1"
        ])
        .code,
        EXIT_DOMAIN
    );
}

#[test]
fn usage_errors() {
    assert_eq!(cli(&[]).code, EXIT_USAGE);
    assert_eq!(cli(&["bogus"]).code, EXIT_USAGE);
    let r = cli(&["--zeta-air", "-1", "peak"]);
    assert_eq!(r.code, EXIT_USAGE);
    assert!(r.stderr.contains("--zeta-air"));
    let r = cli(&["--pd-sens", "12", "peak"]);
    assert_eq!(r.code, EXIT_USAGE);
    let r = cli(&["--device", "no-such-device", "peak"]);
    assert_eq!(r.code, EXIT_USAGE);
    assert!(r.stderr.contains("no-such-device"));
    assert_eq!(cli(&["--help"]).code, EXIT_OK);
}

#[test]
fn missing_rows_file_is_io_error() {
    let r = cli(&["fit-air", "--rows", "/nonexistent/rows.csv"]);
    assert_eq!(r.code, EXIT_IO);
    assert!(r.stderr.contains("/nonexistent/rows.csv"));
}

#[test]
fn rows_file_feeds_fit_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    fs::write(
        &path,
        "mixture,e0_v_per_um,pe_mw,gain_db,range_m\n3t2mb-8-tnf,1.2,6.0391,0.0195,6.56\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let z = result(&json(&["fit-air", "--rows", p]), "zeta_air_db_per_m");
    assert!((z - 0.00430026).abs() < 1e-7);
    let v = json(&["validate-table", "--rows", p]);
    assert_eq!(result(&v, "gain_mismatches"), 1.0);

    fs::write(&path, "mixture,e0,pe\nx,1,2\n").unwrap();
    let r = cli(&["fit-air", "--rows", p]);
    assert_eq!(r.code, EXIT_USAGE);
    assert!(r
        .stderr
        .contains("mixture,e0_v_per_um,pe_mw,gain_db,range_m"));
}

#[test]
fn csv_device_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    fs::write(
        &path,
        "# digitised\ne0_v_per_um,transmittance_percent\n0.1,100.02\n0.2,100.045\n",
    )
    .unwrap();
    let v = json(&[
        "--device",
        path.to_str().unwrap(),
        "simulate",
        "--mode",
        "enhanced",
        "--e0",
        "0.15",
        "--tx-power",
        "6",
    ]);
    assert!((result(&v, "ris_transmittance") - 1.000325).abs() < 1e-12);

    fs::write(&path, "e0_v_per_um,transmittance_ratio\n0.2,1\n0.1,1\n").unwrap();
    let r = cli(&["--device", path.to_str().unwrap(), "peak"]);
    assert_eq!(r.code, EXIT_USAGE);
    assert!(r.stderr.contains("row 2"), "{}", r.stderr);
}

#[test]
fn output_file_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let r = cli(&["--output", p.to_str().unwrap(), "fit-air"]);
        assert_eq!(r.code, EXIT_OK);
    }
    let (x, y) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(x, y);
    let v: Value = serde_json::from_slice(&x).unwrap();
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["results"]["zeta_air_db_per_m"]["unit"], "dB/m");

    let same = |args: &[&str]| {
        let one = cli(args);
        let two = cli(args);
        assert_eq!(one.stdout, two.stdout);
    };
    same(&[
        "sweep",
        "--e0-from",
        "0.1",
        "--e0-to",
        "1.2",
        "--e0-step",
        "0.1",
        "--json",
    ]);
    same(&[
        "simulate",
        "--mode",
        "relay",
        "--e0",
        "0.7",
        "--tx-power",
        "7",
        "--d-tx-ris",
        "20",
        "--d-ris-pd",
        "1",
        "--json",
    ]);
}

#[test]
fn sweep_output_file_holds_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("sweep.csv");
    let r = cli(&[
        "--output",
        p.to_str().unwrap(),
        "sweep",
        "--e0-from",
        "0.1",
        "--e0-to",
        "0.3",
        "--e0-step",
        "0.1",
    ]);
    assert_eq!(r.code, EXIT_OK);
    assert_eq!(fs::read_to_string(&p).unwrap(), r.stdout);
}

#[test]
fn failed_runs_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("out.json");
    let s = p.to_str().unwrap();
    assert_eq!(
        cli(&["--output", s, "tune", "--target-range", "-1"]).code,
        EXIT_USAGE
    );
    assert_eq!(
        cli(&["--output", s, "tune", "--target-range", "7"]).code,
        EXIT_DOMAIN
    );
    assert_eq!(
        cli(&[
            "--output",
            s,
            "simulate",
            "--mode",
            "nope",
            "--e0",
            "1",
            "--tx-power",
            "1"
        ])
        .code,
        EXIT_USAGE
    );
    assert!(!p.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn unwritable_output_is_io_error() {
    let r = cli(&["--output", "/nonexistent-dir/out.json", "fit-air"]);
    assert_eq!(r.code, EXIT_IO);
    assert!(r.stderr.contains("/nonexistent-dir"));
}
