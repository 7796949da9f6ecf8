use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;
use warplab::conedim::{ratio_curve_from_csv, CapacityEstimate, MetricSample};
use warplab::scales::{profiles_from_csv, MonotoneTrace, SlopeScales};
use warplab::volume::{estimate_iv_sv, GrowthCurve};
use warplab::{build_oscillating_warp, WarpFunction};

struct Run {
    dir: TempDir,
}

impl Run {
    fn new() -> Self {
        Run {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    fn config(&self, mut cfg: Value) -> PathBuf {
        if cfg.get("output_dir").is_none() {
            cfg["output_dir"] = json!(self.out());
        }
        let path = self.dir.path().join("config.json");
        std::fs::write(&path, cfg.to_string()).unwrap();
        path
    }

    fn exec(&self, cfg: Value, command: &str) -> Output {
        self.exec_env(cfg, command, &[])
    }

    fn exec_env(&self, cfg: Value, command: &str, env: &[(&str, &str)]) -> Output {
        let path = self.config(cfg);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_warplab"));
        cmd.arg(&path).args(["--command", command]);
        for (k, v) in env {
            cmd.env(k, v);
        }
        cmd.output().unwrap()
    }

    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.out().join(name)).unwrap()
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&self.read(name)).unwrap()
    }
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn euclid2() -> Value {
    json!({ "manifold": { "kind": "euclidean", "n": 2 } })
}

fn osc(n_stages: usize) -> Value {
    json!({ "manifold": { "kind": "oscillating", "n": 2, "n_stages": n_stages, "schedule_cap": 1e40 } })
}

fn small_sample(mut cfg: Value) -> Value {
    cfg["grids"] = json!({ "sample": { "r": 1.0, "big_r": 1.0, "nt": 12, "ntheta": 12 } });
    cfg
}

#[test]
fn validate_euclidean_plane() {
    let run = Run::new();
    let out = run.exec(euclid2(), "validate");
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = run.json("validate.json");
    assert_eq!(v["bishop_max_ratio"].as_f64().unwrap(), 1.0);
    assert_eq!(v["passed"], json!(true));
    assert_eq!(v["curvature"]["negatives"], json!(0));
    let meta = run.json("meta.json");
    assert_eq!(meta["command"], json!("validate"));
    assert!(meta["wall_time_s"].as_f64().is_some());
    assert_eq!(meta["config"]["manifold"]["kind"], json!("euclidean"));
}

#[test]
fn growth_orders_oscillate() {
    let run = Run::new();
    let out = run.exec(osc(3), "growth-orders");
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let curve = GrowthCurve::from_csv(&run.read("growth_orders.csv")).unwrap();
    let (tail_min, tail_max) = estimate_iv_sv(&curve, 0.9).unwrap();
    assert!(tail_min <= 1.35, "{tail_min}");
    assert!(tail_max >= 1.65, "{tail_max}");
    let summary = run.json("orders.json");
    assert_eq!(summary["tail_min"].as_f64().unwrap(), tail_min);
    assert_eq!(summary["windows"].as_array().unwrap().len(), 6);
}

#[test]
fn build_warp_round_trips() {
    let run = Run::new();
    assert_eq!(code(&run.exec(osc(3), "build-warp")), 0);
    let w = WarpFunction::from_json(&run.read("warp.json")).unwrap();
    assert_eq!(w, build_oscillating_warp(3, 1e40).unwrap());
    assert_eq!(run.json("warp_report.json")["violations"], json!([]));
}

fn outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn identical_configs_give_identical_csv() {
    for (cfg, command) in [
        (small_sample(euclid2()), "capacity"),
        (small_sample(osc(1)), "cone-sample"),
        (osc(2), "slope-scales"),
        (osc(2), "profile"),
    ] {
        let (a, b) = (Run::new(), Run::new());
        assert_eq!(code(&a.exec(cfg.clone(), command)), 0);
        assert_eq!(
            code(&b.exec_env(cfg, command, &[("WARPLAB_THREADS", "1")])),
            0
        );
        let (fa, fb) = (outputs(&a.out()), outputs(&b.out()));
        assert!(!fa.is_empty());
        assert_eq!(fa, fb, "{command}");
    }
}

#[test]
fn outputs_reparse() {
    let run = Run::new();
    let cfg = small_sample(osc(2));
    for command in [
        "cone-sample",
        "capacity",
        "slope-scales",
        "profile",
        "diam-ratio",
        "volume-curve",
    ] {
        let out = run.exec(cfg.clone(), command);
        assert_eq!(
            code(&out),
            0,
            "{command}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let sample =
        MetricSample::from_csv(&run.read("points.csv"), &run.read("dist.csv"), 1.0).unwrap();
    assert_eq!(sample.len(), 1 + 11 * 12);
    assert_eq!(run.json("ray.json")["points"], json!(sample.len()));
    let est: CapacityEstimate = serde_json::from_str(&run.read("capacity.json")).unwrap();
    assert_eq!(est.to_csv(), run.read("capacity.csv"));
    let trace = MonotoneTrace::from_csv(&run.read("trace.csv")).unwrap();
    let scales = SlopeScales::from_csv(&run.read("slope_scales.csv")).unwrap();
    assert!(scales.scales.iter().all(|r| trace.xs().contains(r)));
    let profiles = profiles_from_csv(&run.read("profile.csv")).unwrap();
    assert_eq!(profiles.len(), 16);
    assert_eq!(run.json("profile.json")["bound"]["violations"], json!(0));
    let ratios = ratio_curve_from_csv(&run.read("diam_ratio.csv")).unwrap();
    assert!(ratios.iter().all(|&(_, q)| q > 0.0 && q <= 2.0 + 1e-12));
    GrowthCurve::from_csv(&run.read("volume_curve.csv")).unwrap();
    for line in run.read("dist.csv").lines().skip(1).take(5) {
        let d = line.rsplit(',').next().unwrap();
        assert_eq!(
            d.split('e').next().unwrap().replace(['.', '-'], "").len(),
            17,
            "{d}"
        );
    }
}

#[test]
fn exit_codes() {
    let run = Run::new();
    let bad_gamma = json!({ "manifold": { "kind": "power", "n": 2, "gamma": 1.5 } });
    assert_eq!(code(&run.exec(bad_gamma, "validate")), 2);
    let low_dim = json!({ "manifold": { "kind": "euclidean", "n": 1 } });
    assert_eq!(code(&run.exec(low_dim, "validate")), 2);
    let unknown = json!({ "manifold": { "kind": "euclidean", "n": 2 }, "colour": 3 });
    assert_eq!(code(&run.exec(unknown, "validate")), 2);
    let mut zero_tol = euclid2();
    zero_tol["tolerances"] = json!({ "shooting": 0.0 });
    assert_eq!(code(&run.exec(zero_tol, "validate")), 2);
    assert_eq!(
        code(&run.exec_env(euclid2(), "validate", &[("WARPLAB_THREADS", "zero")])),
        2
    );

    let capped = json!({ "manifold": { "kind": "oscillating", "n": 2, "n_stages": 3, "schedule_cap": 100.0 } });
    assert_eq!(code(&run.exec(capped, "build-warp")), 3);
    let mut too_far = small_sample(euclid2());
    too_far["grids"]["sample"]["r"] = json!(1e13);
    assert_eq!(code(&run.exec(too_far, "cone-sample")), 3);

    let cone_tip = json!({ "manifold": { "kind": "power", "n": 2, "gamma": 0.5 } });
    let out = run.exec(cone_tip, "validate");
    assert_eq!(code(&out), 1);
    assert_eq!(run.json("validate.json")["passed"], json!(false));

    let missing = Command::new(env!("CARGO_BIN_EXE_warplab"))
        .args(["/nonexistent/config.json", "--command", "validate"])
        .output()
        .unwrap();
    assert_eq!(code(&missing), 2);
    let no_command = Command::new(env!("CARGO_BIN_EXE_warplab"))
        .arg("x.json")
        .output()
        .unwrap();
    assert_eq!(code(&no_command), 2);
}

#[test]
fn capped_power_validates() {
    let run = Run::new();
    let cfg = json!({ "manifold": { "kind": "power", "n": 3, "gamma": 0.5, "capped": true, "t_max": 1e9 } });
    let out = run.exec(cfg, "validate");
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn plane_is_not_reported_as_ray() {
    let run = Run::new();
    assert_eq!(code(&run.exec(small_sample(euclid2()), "cone-sample")), 0);
    let ray = run.json("ray.json");
    assert_eq!(ray["ray_limit"], json!(false));
    assert!((ray["distortion"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}
