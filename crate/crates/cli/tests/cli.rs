use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delta-tunnel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Header plus rows of parsed fields.
fn read_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn transmit_row(args: &[&str]) -> (f64, f64, f64, String) {
    let out = run(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = read_csv(&stdout(&out));
    assert_eq!(header, ["A", "B", "T", "abs_err", "T_apr", "regime"]);
    assert_eq!(rows.len(), 1);
    let get = |n| column(&header, &rows, n)[0];
    (get("A"), get("B"), get("T"), rows[0][5].clone())
}

#[test]
fn transmit_reports() {
    let (_, _, t, regime) = transmit_row(&["transmit", "--A", "1", "--B", "1e-6"]);
    assert!((t - 0.5).abs() <= 1e-4);
    assert_eq!(regime, "PLANE_WAVE");

    let (a, b, _, _) = transmit_row(&[
        "transmit", "--s", "1", "--rho", "0", "--xc", "15", "--p0", "2", "--Z", "2",
    ]);
    assert!((a - 1.0).abs() < 1e-15 && (b - 0.125).abs() < 1e-15);

    let (_, _, t, _) = transmit_row(&["transmit", "--A", "1", "--B", "1"]);
    assert!((0.43..=0.47).contains(&t));
}

#[test]
fn transmit_rejects_inconsistent_input() {
    assert_eq!(run(&["transmit", "--A", "1"]).status.code(), Some(2));
    assert_eq!(
        run(&["transmit", "--A", "1", "--B", "1", "--p0", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["transmit", "--A", "-1", "--B", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["transmit", "--A", "1", "--B", "0.1", "--rel-tol", "0.5"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn mass_and_hbar_convert_and_reach_the_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let status = run(&[
        "transmit",
        "--s",
        "1",
        "--xc",
        "15",
        "--p0",
        "4",
        "--Z",
        "1",
        "--mass",
        "2",
        "--hbar",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let (header, rows) = read_csv(&fs::read_to_string(&out).unwrap());
    // p0 -> 2, Z -> 0.5: A = 1/16, B = 1/8
    assert!((column(&header, &rows, "A")[0] - 0.0625).abs() < 1e-15);
    assert!((column(&header, &rows, "B")[0] - 0.125).abs() < 1e-15);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("t.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["units"]["mass"], 2.0);
    assert_eq!(meta["units"]["hbar"], 2.0);
    assert_eq!(meta["natural_units"]["p0"], 2.0);
    assert_eq!(meta["parameters"]["p0"], 4.0);
}

#[test]
fn evolve_free_packet_peaks_at_the_classical_position() {
    let out = run(&[
        "evolve", "--s", "1", "--rho", "0", "--xc", "10", "--p0", "2", "--Z", "0", "--t", "3",
        "--n", "4001",
    ]);
    assert!(out.status.success());
    let (header, rows) = read_csv(&stdout(&out));
    assert_eq!(header, ["t", "x", "re_psi", "im_psi", "density"]);
    let x = column(&header, &rows, "x");
    let d = column(&header, &rows, "density");
    let peak = (0..d.len()).max_by(|&i, &j| d[i].total_cmp(&d[j])).unwrap();
    assert!((x[peak] - 4.0).abs() <= x[1] - x[0]);
    let re = column(&header, &rows, "re_psi");
    let im = column(&header, &rows, "im_psi");
    assert!((re[peak] * re[peak] + im[peak] * im[peak] - d[peak]).abs() < 1e-15);
}

#[test]
fn evolve_conserves_probability_and_writes_long_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("psi.csv");
    let status = run(&[
        "evolve",
        "--s",
        "1",
        "--rho",
        "0.5",
        "--xc",
        "10",
        "--p0",
        "2",
        "--Z",
        "2",
        "--t",
        "0,20",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let (header, rows) = read_csv(&fs::read_to_string(&out).unwrap());
    let t = column(&header, &rows, "t");
    let x = column(&header, &rows, "x");
    let d = column(&header, &rows, "density");
    for time in [0.0, 20.0] {
        let idx: Vec<usize> = (0..t.len()).filter(|&i| t[i] == time).collect();
        let dx = x[idx[1]] - x[idx[0]];
        let sum: f64 = idx.iter().map(|&i| d[i]).sum::<f64>() * dx;
        assert!((0.999..=1.001).contains(&sum), "t={time}: {sum}");
    }
    assert!(dir.path().join("psi.meta.json").exists());
}

#[test]
fn evolve_per_time_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("psi.csv");
    let status = run(&[
        "evolve",
        "--s",
        "1",
        "--xc",
        "10",
        "--p0",
        "2",
        "--Z",
        "1",
        "--t",
        "1",
        "--t",
        "4",
        "--layout",
        "per-time",
        "--n",
        "500",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    for k in 0..2 {
        let text = fs::read_to_string(dir.path().join(format!("psi_t{k}.csv"))).unwrap();
        let (header, rows) = read_csv(&text);
        assert_eq!(header, ["x", "re_psi", "im_psi", "density"]);
        assert_eq!(rows.len(), 500);
    }
    assert!(!out.exists());
}

#[test]
fn evolve_validation_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("psi.csv");
    let o = out.to_str().unwrap();
    let missing_p0 = run(&[
        "evolve", "--s", "1", "--xc", "10", "--Z", "2", "--t", "3", "--out", o,
    ]);
    assert_eq!(missing_p0.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&missing_p0.stderr).is_empty());
    assert!(!out.exists());
    let negative_time = run(&[
        "evolve", "--s", "1", "--xc", "10", "--p0", "2", "--Z", "2", "--t", "-1", "--out", o,
    ]);
    assert_eq!(negative_time.status.code(), Some(2));
    let overlap = run(&[
        "evolve", "--s", "1", "--xc", "2", "--p0", "2", "--Z", "2", "--t", "1", "--out", o,
    ]);
    assert_eq!(overlap.status.code(), Some(2));
    assert!(!out.exists());
    let allowed = run(&[
        "evolve",
        "--s",
        "1",
        "--xc",
        "2",
        "--p0",
        "2",
        "--Z",
        "2",
        "--t",
        "1",
        "--allow-overlap",
    ]);
    assert!(allowed.status.success());
}

#[test]
fn output_is_deterministic_and_round_trip_safe() {
    let args = [
        "evolve", "--s", "1.3", "--rho", "-0.7", "--xc", "12", "--p0", "1.7", "--Z", "0.9", "--t",
        "5",
    ];
    let a = run(&args).stdout;
    let b = run(&args).stdout;
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let field = text.lines().nth(100).unwrap().split(',').nth(2).unwrap();
    let (mantissa, _) = field.split_once('e').unwrap();
    assert_eq!(mantissa.trim_start_matches('-').replace('.', "").len(), 17);
    let v: f64 = field.parse().unwrap();
    assert_eq!(format!("{v:.16e}"), field);
}

#[test]
fn sweep_defaults_and_modes() {
    let out = run(&["sweep"]);
    assert!(out.status.success());
    let (header, rows) = read_csv(&stdout(&out));
    assert_eq!(header, ["A", "B", "T", "abs_err"]);
    assert_eq!(rows.len(), 4 * 60);
    let b = column(&header, &rows, "B");
    assert!((b[0] - 1e-3).abs() < 1e-15 && (b[59] - 1e2).abs() < 1e-10);

    let out = run(&["sweep", "--mode", "fig2"]);
    let (header, rows) = read_csv(&stdout(&out));
    assert_eq!(header, ["A", "B", "T", "T_apr", "ratio"]);
    assert!(column(&header, &rows, "ratio")
        .iter()
        .all(|r| (0.7..=1.3).contains(r)));

    let out = run(&["sweep", "--A", "1", "--b-max", "1"]);
    let (header, rows) = read_csv(&stdout(&out));
    let t = column(&header, &rows, "T");
    let spread =
        t.iter().cloned().fold(f64::MIN, f64::max) - t.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread <= 0.06);

    assert_eq!(run(&["sweep", "--b-min", "0"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--mode", "fig3"]).status.code(), Some(2));
}

#[test]
fn config_file_fills_flags_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    fs::write(&config, r#"{"s": 1, "rho": 0, "xc": 15, "p0": 2, "Z": 4}"#).unwrap();
    let c = config.to_str().unwrap();
    let (a, b, _, _) = transmit_row(&["--config", c, "transmit"]);
    assert!((a - 4.0).abs() < 1e-15 && (b - 0.125).abs() < 1e-15);
    let (a, _, _, _) = transmit_row(&["transmit", "--config", c, "--Z", "2"]);
    assert!((a - 1.0).abs() < 1e-15);

    fs::write(&config, r#"{"nonsense": 3}"#).unwrap();
    assert_eq!(
        run(&["transmit", "--config", c, "--A", "1", "--B", "1"])
            .status
            .code(),
        Some(2)
    );
    fs::write(&config, "[1, 2]").unwrap();
    assert_eq!(run(&["transmit", "--config", c]).status.code(), Some(2));
    let missing = dir.path().join("absent.json");
    assert_eq!(
        run(&["transmit", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_coarse_grid_fails_with_diagnostic() {
    let out = run(&["verify", "--n", "256"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stdout(&out).contains("FAIL"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("too coarse"));
}

#[test]
fn verify_default_and_free_cases_pass() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("verify.csv");
    let out = run(&["verify", "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let (header, rows) = read_csv(&fs::read_to_string(&report).unwrap());
    assert_eq!(
        header,
        [
            "check",
            "value",
            "reference",
            "delta",
            "tolerance",
            "status"
        ]
    );
    assert!(rows.len() >= 8 && rows.iter().all(|r| r[5] == "PASS"));
    assert!(Path::new(&dir.path().join("verify.meta.json")).exists());

    let free = run(&["verify", "--Z", "0"]);
    assert_eq!(free.status.code(), Some(0), "{}", stdout(&free));
}
