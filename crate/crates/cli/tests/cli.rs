use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use iqme_cli::{read_table, RunManifest};

fn iqme(dir: &Path, args: &[&str]) -> Output {
    iqme_with_threads(dir, args, None)
}

fn iqme_with_threads(dir: &Path, args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_iqme"));
    cmd.arg("--out").arg(dir).args(args);
    match threads {
        Some(t) => cmd.env(iqme_cli::THREADS_ENV, t),
        None => cmd.env_remove(iqme_cli::THREADS_ENV),
    };
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (header, rows) = read_table(path).unwrap();
    let k = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

#[test]
fn help_and_argument_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&iqme(dir.path(), &["--help"])), 0);
    assert_eq!(code(&iqme(dir.path(), &["markov", "--case", "v"])), 2);
    assert_eq!(code(&iqme(dir.path(), &["markov", "--gamma-prime", "0.9"])), 2);
    assert_eq!(code(&iqme(dir.path(), &["circuit", "--theta", "0.1pi", "--metric", "hm"])), 2);
    assert_eq!(code(&iqme(dir.path(), &["circuit", "--theta", "0.1pi", "--n", "7"])), 2);
    assert_eq!(code(&iqme_with_threads(dir.path(), &["markov", "--case", "i"], Some("zero"))), 2);
}

#[test]
fn calibrate_writes_report_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let first = iqme(dir.path(), &["calibrate"]);
    let status = code(&first);
    assert!(status == 0 || status == 3, "{}", String::from_utf8_lossy(&first.stderr));
    let csv = dir.path().join("calibration.csv");
    let bytes = fs::read(&csv).unwrap();
    let (header, rows) = read_table(&csv).unwrap();
    assert_eq!(rows.len(), 32);
    assert_eq!(header.len(), 9 + 16);
    let selected = header.iter().position(|h| h == "selected").unwrap();
    assert_eq!(rows.iter().filter(|r| r[selected] == "true").count(), 1);
    assert!(dir.path().join("interpretation.json").exists());
    assert!(dir.path().join("calibration.manifest.json").exists());

    assert_eq!(code(&iqme(dir.path(), &["calibrate"])), status);
    assert_eq!(fs::read(&csv).unwrap(), bytes);
}

#[test]
fn literal_rates_are_reported_unphysical() {
    let dir = tempfile::tempdir().unwrap();
    let out = iqme(dir.path(), &["calibrate", "--rate-rule", "literal"]);
    assert_eq!(code(&out), 3);
    let (header, rows) = read_table(&dir.path().join("calibration.csv")).unwrap();
    let physical = header.iter().position(|h| h == "physical").unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r[physical] == "false"));
    assert!(!dir.path().join("interpretation.json").exists());
}

#[test]
fn markov_case_curves_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = iqme(dir.path(), &["markov", "--case", "iv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = dir.path().join("markov_case_iv_sld.csv");
    let (header, rows) = read_table(&csv).unwrap();
    assert_eq!(header, ["tau", "yA", "zA", "ellA", "dA", "RA", "yB", "zB", "ellB", "dB", "RB"]);
    assert_eq!(rows.len(), 1001);
    let ell = column(&csv, "ellA");
    let residue = column(&csv, "RA");
    assert_eq!(ell[0], 0.0);
    assert!(ell.windows(2).all(|w| w[1] >= w[0]));
    assert!((residue[0] - ell[ell.len() - 1]).abs() < 1e-12);

    let side: RunManifest =
        serde_json::from_str(&fs::read_to_string(dir.path().join("markov_case_iv_sld.manifest.json")).unwrap()).unwrap();
    assert_eq!(side.command, "markov");
    assert!(side.interpretation.is_some());
    let results = side.results.unwrap();
    assert_eq!(results["iqme"]["kind"], "no_crossing");
    assert!(side.calibration.unwrap().get("passed").is_some());
}

#[test]
fn markov_explicit_states_with_negative_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let out = iqme(
        dir.path(),
        &["markov", "--gamma-prime", "0.52", "--a", "-0.95,-0.25", "--b", "0,0", "--metric", "wy", "--universal"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = dir.path().join("markov_custom_wy.csv");
    assert_eq!(column(&csv, "yA")[0], -0.95);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("universal IQME"));
}

#[test]
fn map_cells_never_fall_below_the_geodesic() {
    let dir = tempfile::tempdir().unwrap();
    let out = iqme(dir.path(), &["markov-map", "--spacing", "0.1", "--gamma-prime", "0.52", "--svg", "--speeds"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = dir.path().join("markov_map_sld_g0.52.csv");
    let excess = column(&csv, "excess");
    assert!(!excess.is_empty());
    assert!(excess.iter().all(|&e| e >= -1e-6));
    let y = column(&csv, "y");
    let z = column(&csv, "z");
    assert!(y.iter().zip(&z).all(|(y, z)| y * y + z * z < 1.0));
    let speed = column(&dir.path().join("markov_map_sld_g0.52_speed.csv"), "speed_clipped");
    assert!(speed.iter().all(|&s| s <= 3.0));
    assert!(fs::read_to_string(dir.path().join("markov_map_sld_g0.52.svg")).unwrap().contains("<rect"));
}

#[test]
fn circuit_outputs_are_thread_count_independent() {
    let args = ["circuit", "--n", "8", "--theta", "0.1pi,0.5pi", "--trajectories", "40", "--seed", "3"];
    let one = tempfile::tempdir().unwrap();
    let many = tempfile::tempdir().unwrap();
    assert_eq!(code(&iqme_with_threads(one.path(), &args, Some("1"))), 0);
    assert_eq!(code(&iqme_with_threads(many.path(), &args, Some("8"))), 0);
    let stem = "circuit_neel_n8_site_sld";
    for name in ["0.1pi", "0.5pi", "summary", "verdicts"] {
        let file = format!("{stem}_{name}.csv");
        let a = fs::read(one.path().join(&file)).unwrap();
        let b = fs::read(many.path().join(&file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
    let (header, rows) = read_table(&one.path().join(format!("{stem}_0.1pi.csv"))).unwrap();
    assert_eq!(header, ["step", "mean_ell", "std_err", "residue"]);
    assert_eq!(rows.len(), 21);
}

#[test]
fn ferro_zero_tilt_has_zero_length() {
    let dir = tempfile::tempdir().unwrap();
    let out = iqme(dir.path(), &["circuit", "--n", "6", "--family", "ferro", "--theta", "0", "--trajectories", "5"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let ell = column(&dir.path().join("circuit_ferro_n6_site_sld_0pi.csv"), "mean_ell");
    assert!(ell.iter().all(|&l| l == 0.0));
}
