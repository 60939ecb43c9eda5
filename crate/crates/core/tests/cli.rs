use std::process::{Command, Output};

use psed::harness::{load_csv, DetectorKind};

fn psed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psed")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SMALL: [&str; 8] = [
    "--n_r", "8", "--n_t", "8", "--detectors", "MF,LMMSE,PSED-LMMSE", "--snr_db_grid", "0:5:10",
];

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let mut args = SMALL.to_vec();
        args.extend(["--trials", "30", "--master_seed", "5", "--output", out.to_str().unwrap()]);
        let o = psed(&[&["sweep-ser"], args.as_slice()].concat());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ra, rb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ra, rb);
    let parsed = load_csv(&a).unwrap();
    assert_eq!(parsed.rows.len(), 3 * 3);
    assert!(parsed.rows.iter().all(|r| r.trials == 30 && r.seed == 5));
    assert_eq!(parsed.rows[0].detector, DetectorKind::Mf);
}

#[test]
fn config_file_keys_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(
        &cfg,
        "n_r = 8\nn_t = 8\ndetectors = [\"LMMSE\", \"PSED-LMMSE\"]\nsnr_db_grid = [4.0]\ntrials = 7\nmaster_seed = 3\n\n[psed]\nK = 2\nL = 2\n",
    )
    .unwrap();
    let o = psed(&["sweep-ser", "--config", cfg.to_str().unwrap(), "--trials", "4", "--psed.K", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "detector,n_r,n_t,snr_db,trials,symbol_errors,ser,mse,seed");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("LMMSE,8,8,4.000000000e0,4,"));
    assert!(lines[2].ends_with(",3"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let o = psed(&["sweep-ser", "--n_r", "16", "--n_t", "16", "--detectors", "ML", "--trials", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ML"));

    let o = psed(&["sweep-ser", "--n_r", "8", "--n_t", "8", "--detectors", "ZF"]);
    assert_eq!(o.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "n_r = 8\nmystery = true\n").unwrap();
    let o = psed(&["sweep-ser", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_with_three_and_leave_a_log() {
    // a wide channel at an absurd SNR makes the LMMSE Gram matrix numerically singular
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("wide.csv");
    let o = psed(&[
        "sweep-ser", "--n_r", "4", "--n_t", "8", "--detectors", "LMMSE", "--snr_db_grid", "400",
        "--trials", "3", "--output", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let parsed = load_csv(&out).unwrap();
    assert_eq!(parsed.rows[0].trials, 0);
    let log = std::fs::read_to_string(dir.path().join("wide.csv.flagged.csv")).unwrap();
    assert_eq!(log.lines().count(), 4);
    assert!(log.contains("dropped"));
}

#[test]
fn complexity_rows() {
    let o = psed(&["complexity", "--sizes", "32x32", "--detectors", "MF,LMMSE,PSED-LMMSE"]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "detector,n_r,n_t,K,L,total\nMF,32,32,0,0,1024\nLMMSE,32,32,0,0,77968\nPSED-LMMSE,32,32,4,2,88096\n"
    );
}

#[test]
fn analyze_emits_one_row_per_grid_point() {
    let o = psed(&["analyze", "--beta", "1", "--snr_db_grid", "0,10,20"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(2).unwrap().starts_with("1.000000000e1,1.000000000e0,"));
}

#[test]
fn sweep_mse_defaults_to_bpsk_and_adds_analytic_columns() {
    let o = psed(&["sweep-mse", "--n_r", "16", "--n_t", "16", "--snr_db_grid", "10", "--trials", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("detector,n_r,n_t,snr_db,trials,symbol_errors,ser,mse,seed,mse_conv_asymptotic,mse_psed_closed_form\n"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn rip_of_a_loaded_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.txt");
    // two orthonormal columns and their normalised sum
    let r = std::f64::consts::FRAC_1_SQRT_2;
    std::fs::write(&m, format!("# 2x3\n1 0 {r}\n0 1i {r}i\n")).unwrap();
    let o = psed(&["rip", "--matrix", m.to_str().unwrap(), "--K", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..3], &["2", "3", "1"]);
    assert!(row[3].parse::<f64>().unwrap().abs() < 1e-12);
    assert_eq!(&row[4..], &["3", "true"]);

    let o = psed(&["rip", "--n_r", "6", "--n_t", "8", "--K", "2", "--seed", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().nth(1).unwrap().ends_with(",28,true"));

    assert_eq!(psed(&["rip", "--matrix", "/nonexistent/m.txt", "--K", "1"]).status.code(), Some(2));
}
