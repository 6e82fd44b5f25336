use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use matterwave::cli::CurveFile;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_matterwave"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn propagate_table_is_deterministic_and_saturated() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["propagate", "--out", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let bytes = std::fs::read(a.join("propagate.csv")).unwrap();
    assert_eq!(bytes, std::fs::read(b.join("propagate.csv")).unwrap());

    let f = CurveFile::read(&a.join("propagate.csv")).unwrap();
    assert_eq!(
        f.columns,
        ["t", "B", "R", "mu_pure", "sigma_xx", "sigma_pp", "sigma_xp", "det"]
    );
    assert!(f.meta("tool").unwrap().starts_with("matterwave "));
    assert_eq!(f.meta("packet.b"), Some("1e-7"));
    let big_b = f.column("B").unwrap();
    assert!(big_b.windows(2).all(|w| w[1] > w[0]));
    let hbar = 1.054571817e-34;
    for det in f.column("det").unwrap() {
        assert!((det / (hbar * hbar / 4.0) - 1.0).abs() < 1e-12);
    }
    assert_eq!(f.column("R").unwrap()[0], f64::INFINITY);
}

#[test]
fn flags_override_config_and_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# test\ncurves.points = 20\ncoherence.delta_kx = 1e6\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    let o = run(&[
        "curves",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--dkx",
        "2e6",
        "--vz",
        "188",
        "--kernel",
        "tophat",
        "--theta-convention",
        "sigma",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["width", "sigma_xp", "gouy"] {
        let f = CurveFile::read(&out.join(format!("{name}.csv"))).unwrap();
        assert_eq!(f.rows.len(), 20);
        assert_eq!(f.meta("coherence.delta_kx"), Some("2e6"));
        assert_eq!(f.meta("detector.kernel"), Some("tophat"));
        assert_eq!(f.meta("output.theta_convention"), Some("sigma"));
        assert!(f.meta("derived.theta_rad").is_some());
        let svg = std::fs::read_to_string(out.join(format!("{name}.svg"))).unwrap();
        assert!(svg.contains("<polyline"));
    }
}

#[test]
fn fit_recovers_shipped_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["fit", s(&data("synthetic_c70.csv")), "--out", s(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let f = CurveFile::read(&dir.path().join("fit.csv")).unwrap();
    let dk = f.column("delta_kx_per_m").unwrap()[0];
    assert!((dk / 9e6 - 1.0).abs() < 1e-4, "{dk}");
    let report = std::fs::read_to_string(dir.path().join("fit_report.txt")).unwrap();
    for needle in [
        "slit mapping",
        "vdW narrowing",
        "deconvolution    on",
        "converged        yes",
    ] {
        assert!(report.contains(needle), "missing `{needle}`");
    }

    // 1% noise: the estimate must lie within three reported standard errors
    let o = run(&[
        "fit",
        s(&data("synthetic_c70_noisy.csv")),
        "--out",
        s(dir.path()),
    ]);
    assert!(o.status.success());
    let f = CurveFile::read(&dir.path().join("fit.csv")).unwrap();
    let dk = f.column("delta_kx_per_m").unwrap()[0];
    let se = f.column("delta_kx_stderr_per_m").unwrap()[0];
    assert!(se > 0.0 && (dk - 9e6).abs() < 3.0 * se, "{dk} +/- {se}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "# nothing\n").unwrap();
    assert_eq!(
        run(&["fit", s(&empty), "--out", s(dir.path())])
            .status
            .code(),
        Some(2)
    );

    let garbled = dir.path().join("garbled.csv");
    std::fs::write(&garbled, "1e-6,2e-5,0\n1e-6,x,0\n").unwrap();
    let o = run(&["fit", s(&garbled), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("garbled.csv:2"));

    let one = dir.path().join("one.csv");
    std::fs::write(&one, "1e-6,1.5e-5,0,1\n").unwrap();
    assert_eq!(
        run(&["fit", s(&one), "--out", s(dir.path())]).status.code(),
        Some(3)
    );

    let bad_cfg = dir.path().join("bad.cfg");
    std::fs::write(&bad_cfg, "packet.b = -1\n").unwrap();
    assert_eq!(
        run(&["propagate", "--config", s(&bad_cfg), "--out", s(dir.path())])
            .status
            .code(),
        Some(1)
    );

    let typo = dir.path().join("typo.cfg");
    std::fs::write(&typo, "packet.bb = 1e-7\n").unwrap();
    assert_eq!(
        run(&["constants", "--config", s(&typo)]).status.code(),
        Some(2)
    );
}

#[test]
fn oracle_verify_passes_and_degrades_on_coarse_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ok");
    let o = run(&["oracle-verify", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(out.join("oracle_report.csv")).unwrap();
    let rows: Vec<&str> = table
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert!(rows.len() > 20 && rows.iter().all(|r| r.ends_with(",pass")));

    // δk = 0 ensemble rows reproduce the pure rows
    let pick = |case: &str, q: &str| -> Vec<f64> {
        rows.iter()
            .map(|r| r.split(',').collect::<Vec<_>>())
            .filter(|c| c[0] == case && c[1] == q)
            .map(|c| c[3].parse().unwrap())
            .collect()
    };
    let pure_xp = pick("pure", "sigma_xp");
    let mixed_xp = pick("mixed dk=0e0", "sigma_xp");
    assert_eq!(pure_xp.len(), mixed_xp.len());
    for (p, m) in pure_xp.iter().zip(&mixed_xp) {
        assert!((p / m - 1.0).abs() < 1e-14);
    }

    let cfg = dir.path().join("coarse.cfg");
    std::fs::write(&cfg, "oracle.grid_n = 256\noracle.half_span_m = 1e-3\n").unwrap();
    let coarse = dir.path().join("coarse");
    let o = run(&["oracle-verify", "--config", s(&cfg), "--out", s(&coarse)]);
    assert_eq!(o.status.code(), Some(4));
    let table = std::fs::read_to_string(coarse.join("oracle_report.csv")).unwrap();
    assert!(table.contains(",fail"));
}

#[test]
fn constants_table() {
    let o = run(&["constants", "--vz", "188"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for needle in [
        "hbar",
        "1.054571817e-34",
        "tau_b",
        "de_broglie_wavelength",
        "theta (sqrt2-sigma)",
    ] {
        assert!(text.contains(needle), "missing `{needle}`");
    }
}

#[test]
fn synth_round_trips_through_fit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    let o = run(&["synth", s(&path), "--dkx", "4e6"]);
    assert!(o.status.success());
    let o = run(&["fit", s(&path), "--out", s(dir.path()), "--dkx", "4e6"]);
    assert!(o.status.success());
    let f = CurveFile::read(&dir.path().join("fit.csv")).unwrap();
    assert!((f.column("delta_kx_per_m").unwrap()[0] / 4e6 - 1.0).abs() < 1e-4);
}
