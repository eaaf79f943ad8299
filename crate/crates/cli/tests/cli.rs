use std::path::Path;
use std::process::{Command, Output};

use vcd_core::eval::KpiReport;
use vcd_core::sim::{generate_scenario, PresetOptions, RoomClass};

fn vcd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vcd")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = vcd(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

/// Two four-second meetings at 5 fps.
fn scenarios(dir: &Path) -> String {
    let opts = PresetOptions { duration: 4.0, fps: 5.0, ..PresetOptions::default() };
    let sc = dir.join("scenarios");
    std::fs::create_dir(&sc).unwrap();
    for (class, seed) in [(RoomClass::Small, 1), (RoomClass::Medium, 2)] {
        let s = generate_scenario(class, seed, &opts).unwrap();
        std::fs::write(sc.join(format!("{}.toml", s.name)), s.to_canonical()).unwrap();
    }
    sc.to_str().unwrap().to_string()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn no_arguments_prints_usage() {
    let o = vcd(&[]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn bad_flags_are_rejected() {
    assert!(!vcd(&["run", "--scenario", "a.toml", "--dataset", "d"]).status.success());
    assert!(!vcd(&["evaluate", "--fps", "-1", "--out", "x"]).status.success());
    assert!(!vcd(&["ablate", "--component", "camera"]).status.success());
    let o = vcd(&["ablate", "--out", "x"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("--component"));
}

#[test]
fn simulate_writes_datasets() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = scenarios(tmp.path());
    let out = p(tmp.path(), "data");
    ok(&["simulate", "--scenario", &sc, "--out", &out]);
    let mut names: Vec<String> =
        std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    assert_eq!(names.len(), 2);
    let ds = vcd_core::io::Dataset::open(&Path::new(&out).join(&names[0])).unwrap();
    assert_eq!(ds.truth.len(), 20);
}

#[test]
fn train_run_evaluate() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = scenarios(tmp.path());
    let model = p(tmp.path(), "model.txt");
    let stdout = ok(&["train", "--scenario", &sc, "--out", &model]);
    assert!(stdout.contains("stumps"));
    vcd_core::asd::AdaBoostModel::from_text(&std::fs::read_to_string(&model).unwrap()).unwrap();

    let report = p(tmp.path(), "report.txt");
    ok(&["evaluate", "--scenario", &sc, "--model", &model, "--out", &report]);
    let r = KpiReport::from_text(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r.total.frames, 40);

    let one = Path::new(&sc).join("small-01.toml");
    let run_dir = p(tmp.path(), "run");
    ok(&["run", "--scenario", one.to_str().unwrap(), "--model", &model, "--out", &run_dir]);
    for f in ["decisions.csv", "predictions.csv", "report.txt", "timings.csv"] {
        assert!(Path::new(&run_dir).join(f).is_file(), "{f}");
    }
    let decisions = std::fs::read_to_string(Path::new(&run_dir).join("decisions.csv")).unwrap();
    assert_eq!(vcd_core::io::parse_decisions(&decisions).unwrap().len(), 20);

    let bench = ok(&["bench", "--scenario", one.to_str().unwrap(), "--model", &model]);
    assert!(bench.contains("compute"));
}

#[test]
fn cross_validation_needs_no_model() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = scenarios(tmp.path());
    let report = p(tmp.path(), "cv.txt");
    let stdout = ok(&["evaluate", "--scenario", &sc, "--folds", "2", "--out", &report]);
    assert!(stdout.contains("fold 1"));
    KpiReport::from_text(&std::fs::read_to_string(&report).unwrap()).unwrap();
}

#[test]
fn run_without_a_model_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = scenarios(tmp.path());
    let one = Path::new(&sc).join("small-01.toml");
    let o = vcd(&["run", "--scenario", one.to_str().unwrap(), "--out", &p(tmp.path(), "r")]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("--model"));
}
