use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use phasevar_cli::config::Method;
use phasevar_cli::sweep::evaluate;
use phasevar_core::SchemeModel;

fn phasevar(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phasevar"))
        .args(args)
        .current_dir(cwd)
        .env_remove("PHASEVAR_OUT_DIR")
        .output()
        .unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn sweep_counts_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = phasevar(
        &["sweep", "--scheme", "heterodyne", "--method", "exact,asymptotic", "--out", "het.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("het.csv")).unwrap();
    assert!(text.starts_with("scheme,method,nbar,variance,z,mu,n0,cutoff,tail_mass,notes\n"));
    assert!(!text.contains('\r'));
    let rs = rows(&dir.path().join("het.csv"));
    assert_eq!(rs.len(), 32);
    assert!(rs.iter().all(|r| r.len() == 10));
    assert!(rs[..16].iter().all(|r| r[1] == "exact"));
    assert!(rs[16..].iter().all(|r| r[1] == "asymptotic"));
    // parsed values are bit-identical to a direct library call
    let direct = evaluate(&SchemeModel::heterodyne(), &Method::Exact, 100.0, 1e-6);
    let row = rs.iter().find(|r| r[1] == "exact" && r[2].parse::<f64>().unwrap() == direct.nbar).unwrap();
    assert_eq!(row[3].parse::<f64>().unwrap(), direct.variance.unwrap());
    assert_eq!(row[4].parse::<f64>().unwrap(), direct.z.unwrap());
}

#[test]
fn output_independent_of_threads() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["sweep", "--scheme", "markII,canonical", "--method", "exact,squeezed", "--nbar-max", "300"];
    let mut a = base.to_vec();
    a.extend(["--threads", "1", "--out", "a.csv"]);
    let mut b = base.to_vec();
    b.extend(["--threads", "4", "--out", "b.csv"]);
    assert_eq!(phasevar(&a, dir.path()).status.code(), Some(0));
    assert_eq!(phasevar(&b, dir.path()).status.code(), Some(0));
    assert_eq!(
        fs::read(dir.path().join("a.csv")).unwrap(),
        fs::read(dir.path().join("b.csv")).unwrap()
    );
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.cfg"),
        "scheme = markI\nmethod = asymptotic\nnbar_min = 100\nnbar_max = 1e6\npoints_per_decade = 1\nout = from_file.csv\n",
    )
    .unwrap();
    let out = phasevar(&["sweep", "--config", "run.cfg", "--nbar-max", "1000"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rs = rows(&dir.path().join("from_file.csv"));
    assert_eq!(rs.len(), 2);
    assert!(rs.iter().all(|r| r[0] == "markI" && r[1] == "asymptotic"));
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["sweep", "--scheme", "homodyne"],
        vec!["sweep", "--method", "guess"],
        vec!["sweep", "--nbar-min", "100", "--nbar-max", "10"],
        vec!["sweep", "--scheme", "table:0.125:0.5"],
        vec!["sweep", "--config", "missing.cfg"],
        vec!["sweep", "--plot", "pie"],
        vec!["frobnicate"],
    ] {
        let out = phasevar(&args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn failed_points_exit_1_and_are_annotated() {
    let dir = tempfile::tempdir().unwrap();
    let out = phasevar(
        &["sweep", "--scheme", "power:0.1:2.5", "--nbar-max", "100", "--out", "bad.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let rs = rows(&dir.path().join("bad.csv"));
    assert!(rs.iter().all(|r| r[9] == "error:invalid_scheme" && r[3].is_empty()));
}

#[test]
fn skips_carry_reason_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = phasevar(
        &["sweep", "--scheme", "canonical", "--method", "continuum,asymptotic", "--nbar-max", "100", "--out", "s.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let rs = rows(&dir.path().join("s.csv"));
    assert!(rs.iter().all(|r| r[9].starts_with("skip:")));
    assert!(rs.iter().any(|r| r[9] == "skip:below_continuum_range"));
    assert!(rs.iter().any(|r| r[9] == "skip:no_power_law"));
}

#[test]
fn out_dir_override() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("results");
    let out = Command::new(env!("CARGO_BIN_EXE_phasevar"))
        .args(["sweep", "--method", "asymptotic", "--out", "het.csv", "--plot", "loglog_variance"])
        .current_dir(dir.path())
        .env("PHASEVAR_OUT_DIR", &target)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(target.join("het.csv").exists());
    assert!(target.join("het_loglog_variance.svg").exists());
}

#[test]
fn plots_are_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let out = phasevar(
        &[
            "sweep", "--scheme", "heterodyne", "--method", "exact", "--nbar-max", "1000", "--out", "h.csv", "--plot",
            "loglog_variance,z_vs_nbar",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    for kind in ["loglog_variance", "z_vs_nbar"] {
        let text = fs::read_to_string(dir.path().join(format!("h_{kind}.svg"))).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        let polylines = doc.descendants().filter(|n| n.has_tag_name("polyline")).count();
        assert_eq!(polylines, 1);
        let asymptotes: Vec<_> = doc
            .descendants()
            .filter(|n| n.has_tag_name("line") && n.attribute("class") == Some("asymptote"))
            .collect();
        if kind == "z_vs_nbar" {
            assert_eq!(asymptotes.len(), 1);
            assert_eq!(asymptotes[0].attribute("data-value"), Some("0.5"));
        } else {
            assert!(asymptotes.is_empty());
        }
    }
}

#[test]
fn mark_ii_continuum_z_approaches_asymptote() {
    let dir = tempfile::tempdir().unwrap();
    let out = phasevar(
        &[
            "sweep", "--scheme", "markII", "--method", "continuum", "--nbar-min", "1e5", "--nbar-max", "1e8",
            "--points-per-decade", "1", "--out", "m2.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let z: Vec<f64> = rows(&dir.path().join("m2.csv")).iter().map(|r| r[4].parse().unwrap()).collect();
    let target = 15f64.sqrt() / 8.0;
    assert_eq!(z.len(), 4);
    assert!(z.windows(2).all(|w| (w[1] - target).abs() < (w[0] - target).abs()));
}

#[test]
fn truncated_and_squeezed_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let out = phasevar(&["truncated", "--nbar-min", "1", "--nbar-max", "100", "--points-per-decade", "1", "--out", "t.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rs = rows(&dir.path().join("t.csv"));
    assert_eq!(rs.len(), 3);
    assert!(rs.iter().all(|r| r[1] == "truncated" && r[9].starts_with("law=")));

    let out = phasevar(&["squeezed", "--nbar-min", "100", "--nbar-max", "100", "--out", "q.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rs = rows(&dir.path().join("q.csv"));
    assert_eq!(rs.len(), 1);
    assert!(rs[0][6].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn compare_and_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = phasevar(
        &["compare", "--method", "exact,squeezed,asymptotic", "--nbar-min", "100", "--nbar-max", "1000", "--points-per-decade", "1", "--out", "c.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let rs = rows(&dir.path().join("c.csv"));
    assert_eq!(rs.len(), 4);
    for r in &rs {
        assert_eq!(r[4], "exact");
        let d: f64 = r[6].parse().unwrap();
        assert!(d.abs() < 0.05, "{r:?}");
    }

    let out = phasevar(&["check", "--scheme", "heterodyne,markII"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("PASS ")));
    assert!(text.contains("appendix_sum"));
}
