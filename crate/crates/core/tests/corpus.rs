//! The fuzz seeds double as well-formed examples of every input format.

use std::path::PathBuf;

use vcd_core::asd::AdaBoostModel;
use vcd_core::eval::KpiReport;
use vcd_core::io::*;
use vcd_core::pipeline::PipelineConfig;
use vcd_core::sim::parse_scenario;

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fuzz/corpus")).join(target);
    let mut v: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    assert!(!v.is_empty(), "no seeds in {}", dir.display());
    v.into_iter().map(|p| (p.clone(), std::fs::read(p).unwrap())).collect()
}

fn text(b: &[u8]) -> &str {
    std::str::from_utf8(b).unwrap()
}

#[test]
fn scenario_seeds() {
    for (p, b) in seeds("scenario") {
        let s = parse_scenario(text(&b)).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert_eq!(parse_scenario(&s.to_canonical()).unwrap(), s);
    }
}

#[test]
fn config_seeds() {
    for (p, b) in seeds("config") {
        let c = PipelineConfig::from_toml(text(&b)).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert_eq!(PipelineConfig::from_toml(&c.to_toml()).unwrap(), c);
    }
}

#[test]
fn model_seeds() {
    for (p, b) in seeds("model") {
        let m = AdaBoostModel::from_text(text(&b)).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert_eq!(AdaBoostModel::from_text(&m.to_text()).unwrap(), m);
    }
}

#[test]
fn media_seeds() {
    for (p, b) in seeds("wav") {
        decode_wav(&b).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
    for (p, b) in seeds("pgm") {
        decode_pgm(&b, 0.0).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
    for (p, b) in seeds("depth_text") {
        parse_depth_text(text(&b), 0.0).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}

#[test]
fn record_seeds() {
    for (p, b) in seeds("records") {
        let t = text(&b[1..]);
        let ok = match b[0] % 5 {
            0 => parse_truth(t).map(|_| ()),
            1 => parse_predictions(t).map(|_| ()),
            2 => parse_decisions(t).map(|_| ()),
            3 => parse_annotations(t).map(|_| ()),
            _ => parse_features(t).map(|_| ()),
        };
        ok.unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}

#[test]
fn report_seeds() {
    for (p, b) in seeds("kpi_report") {
        let r = KpiReport::from_text(text(&b)).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert_eq!(KpiReport::from_text(&r.to_text()).unwrap(), r);
    }
}
