use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use warplab::conedim::{
    diameter_ratio_curve, ratio_curve_csv, ray_distortion, sample_rescaled_ball,
    upper_box_dimension_seeded,
};
use warplab::geodesy::{RotSymManifold, GEODESY_T_LIMIT};
use warplab::scales::{log_volume_trace, profiles_to_csv, renormalized_profile, slope_scales};
use warplab::volume::{
    check_bishop, check_bishop_gromov, check_yau_linear, estimate_iv_sv, growth_curve, log_spaced,
    GrowthCurve,
};
use warplab::warp::{fast_window, slow_window};
use warplab::{Error, Magnitude};

use crate::config::RunConfig;
use crate::{Command, Failure};

const GROWTH_POINTS: usize = 400;
const WINDOW_POINTS: usize = 200;
const DIAM_POINTS: usize = 60;
const VALIDATE_POINTS: usize = 300;
const DEFAULT_RAY_TOL: f64 = 0.1;

struct Outputs<'a> {
    dir: &'a Path,
}

impl Outputs<'_> {
    fn write(&self, name: &str, contents: &str) -> Result<(), Failure> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
    }

    fn json(&self, name: &str, value: &impl Serialize) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable output");
        text.push('\n');
        self.write(name, &text)
    }
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<(), Failure> {
    let start = Instant::now();
    std::fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| Failure::Config(format!("cannot create {}: {e}", cfg.output_dir.display())))?;
    let out = Outputs {
        dir: &cfg.output_dir,
    };
    let m = cfg.manifold()?;
    let result = match command {
        Command::BuildWarp => build_warp(&m, &out),
        Command::VolumeCurve => volume_curve(&m, cfg, &out),
        Command::GrowthOrders => growth_orders(&m, cfg, &out),
        Command::SlopeScales => slope_scales_cmd(&m, cfg, &out).map(|_| ()),
        Command::Profile => profile(&m, cfg, &out),
        Command::Capacity => capacity(&m, cfg, &out),
        Command::ConeSample => cone_sample(&m, cfg, &out),
        Command::DiamRatio => diam_ratio(&m, cfg, &out),
        Command::Validate => validate(&m, cfg, &out),
    };
    let meta = json!({
        "command": command,
        "config": cfg,
        "versions": { "warplab": env!("CARGO_PKG_VERSION") },
        "threads": rayon::current_num_threads(),
        "wall_time_s": start.elapsed().as_secs_f64(),
        "status": match &result {
            Ok(()) => "ok".to_string(),
            Err(e) => e.to_string(),
        },
    });
    out.json("meta.json", &meta)?;
    result
}

fn radius_grid(
    m: &RotSymManifold,
    cfg: &RunConfig,
    default_lo: f64,
    default_n: usize,
    cap: Magnitude,
) -> Vec<Magnitude> {
    let top = m.t_max().min(cap);
    match &cfg.grids.radius {
        Some(g) => log_spaced(g.lo, g.hi.unwrap_or(top), g.n),
        None => log_spaced(default_lo, top, default_n),
    }
}

fn growth_grid(m: &RotSymManifold, cfg: &RunConfig) -> Vec<Magnitude> {
    radius_grid(m, cfg, std::f64::consts::E, GROWTH_POINTS, m.t_max())
}

fn build_warp(m: &RotSymManifold, out: &Outputs) -> Result<(), Failure> {
    out.write("warp.json", &m.warp().to_json())?;
    out.json("warp_report.json", &m.warp().report())
}

fn volume_curve(m: &RotSymManifold, cfg: &RunConfig, out: &Outputs) -> Result<(), Failure> {
    let curve = growth_curve(m, &growth_grid(m, cfg))?;
    out.write("volume_curve.csv", &curve.to_csv())
}

#[derive(Serialize)]
struct WindowOrders {
    stage: usize,
    kind: &'static str,
    lo: Magnitude,
    hi: Magnitude,
    min_order: f64,
    max_order: f64,
}

fn window_orders(m: &RotSymManifold) -> Result<Vec<WindowOrders>, Failure> {
    let w = m.warp();
    let mut rows = Vec::new();
    for stage in 1..=w.n_stages() {
        for (kind, window) in [
            ("slow", slow_window(w, stage)),
            ("fast", fast_window(w, stage)),
        ] {
            let Some((lo, hi)) = window else { continue };
            let curve = growth_curve(m, &log_spaced(lo, hi, WINDOW_POINTS))?;
            let (min_order, max_order) = estimate_iv_sv(&curve, 1.0)?;
            rows.push(WindowOrders {
                stage,
                kind,
                lo,
                hi,
                min_order,
                max_order,
            });
        }
    }
    Ok(rows)
}

fn growth_orders(m: &RotSymManifold, cfg: &RunConfig, out: &Outputs) -> Result<(), Failure> {
    let curve = growth_curve(m, &growth_grid(m, cfg))?;
    let (tail_min, tail_max) = estimate_iv_sv(&curve, cfg.grids.tail_fraction)?;
    out.write("growth_orders.csv", &curve.to_csv())?;
    out.json(
        "orders.json",
        &json!({
            "tail_fraction": cfg.grids.tail_fraction,
            "tail_min": tail_min,
            "tail_max": tail_max,
            "windows": window_orders(m)?,
        }),
    )
}

struct ScalesRun {
    k: f64,
    scales: Vec<f64>,
}

fn slope_scales_cmd(
    m: &RotSymManifold,
    cfg: &RunConfig,
    out: &Outputs,
) -> Result<ScalesRun, Failure> {
    let g = &cfg.grids;
    let top = m.t_max().ln();
    let xs: Vec<f64> = (0..)
        .map(|i| 1.0 + g.trace_step * i as f64)
        .take_while(|&x| x <= top)
        .collect();
    if xs.len() < 2 {
        return Err(Failure::Domain(Error::Domain(format!(
            "T_max = {} leaves no trace above R = e",
            m.t_max()
        ))));
    }
    let trace = log_volume_trace(m, &xs)?;
    let k = match g.slope_k {
        Some(k) => k,
        None => {
            let curve = GrowthCurve {
                entries: xs
                    .iter()
                    .zip(trace.values())
                    .map(|(&x, &f)| warplab::volume::GrowthEntry {
                        r: Magnitude::from_ln(x),
                        vol: Magnitude::from_ln(f),
                        order: f / x,
                    })
                    .collect(),
            };
            estimate_iv_sv(&curve, g.tail_fraction)?.0 + 1.0 / g.slope_l
        }
    };
    let found = slope_scales(&trace, k, g.slope_l, g.slope_t_step)?;
    out.write("trace.csv", &trace.to_csv())?;
    out.write("slope_scales.csv", &found.to_csv())?;
    Ok(ScalesRun {
        k,
        scales: found.scales,
    })
}

fn profile(m: &RotSymManifold, cfg: &RunConfig, out: &Outputs) -> Result<(), Failure> {
    let g = &cfg.grids;
    let (centers, k) = match &g.profile_centers {
        Some(c) => (c.clone(), g.slope_k),
        None => {
            let run = slope_scales_cmd(m, cfg, out)?;
            let n = run.scales.len();
            let take = g.profile_max_centers.min(n);
            let picked = (0..take)
                .map(|i| {
                    Magnitude::from_ln(
                        run.scales[if take > 1 {
                            i * (n - 1) / (take - 1)
                        } else {
                            0
                        }],
                    )
                })
                .collect();
            (picked, Some(run.k))
        }
    };
    let profiles = centers
        .iter()
        .map(|&r| Ok((r, renormalized_profile(m, r, &g.profile_radii)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    out.write("profile.csv", &profiles_to_csv(&profiles))?;
    let summary = k.map(|k| {
        let exponent = k + 2.0 / g.slope_l;
        let gaps: Vec<f64> = profiles
            .iter()
            .flat_map(|(_, p)| {
                p.iter()
                    .map(move |&(big_r, q)| q.ln() - exponent * big_r.ln())
            })
            .collect();
        json!({
            "k": k,
            "bound_exponent": exponent,
            "max_log_gap": gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            "violations": gaps.iter().filter(|&&g| g > 0.0).count(),
        })
    });
    out.json(
        "profile.json",
        &json!({ "centers": centers.len(), "bound": summary }),
    )
}

fn sample(m: &RotSymManifold, cfg: &RunConfig) -> Result<warplab::conedim::MetricSample, Failure> {
    let s = &cfg.grids.sample;
    Ok(sample_rescaled_ball(m, s.r, s.big_r, (s.nt, s.ntheta))?)
}

fn capacity(m: &RotSymManifold, cfg: &RunConfig, out: &Outputs) -> Result<(), Failure> {
    let sample = sample(m, cfg)?;
    let diam = sample.diameter();
    let e = &cfg.grids.eps;
    let range = (e.lo.unwrap_or(0.02 * diam), e.hi.unwrap_or(0.2 * diam));
    let est = upper_box_dimension_seeded(&sample, range, e.n, cfg.seed)?;
    out.write("capacity.csv", &est.to_csv())?;
    out.json("capacity.json", &est)?;
    match cfg.tolerances.regression_stderr {
        Some(tol) if !(est.slope_stderr <= tol) => Err(Failure::Validation(format!(
            "slope standard error {:.4e} exceeds {tol:.4e}",
            est.slope_stderr
        ))),
        _ => Ok(()),
    }
}

fn cone_sample(m: &RotSymManifold, cfg: &RunConfig, out: &Outputs) -> Result<(), Failure> {
    let sample = sample(m, cfg)?;
    let s = &cfg.grids.sample;
    let tol = cfg.grids.ray_tol.unwrap_or(DEFAULT_RAY_TOL);
    let sphere_bound = std::f64::consts::PI * m.warp().eval_f64(s.r * s.big_r) / s.r;
    let distortion = ray_distortion(&sample);
    out.write("points.csv", &sample.points_csv())?;
    out.write("dist.csv", &sample.dist_csv())?;
    out.json(
        "ray.json",
        &json!({
            "r": s.r,
            "big_r": s.big_r,
            "scale": sample.scale(),
            "points": sample.len(),
            "diameter": sample.diameter(),
            "distortion": distortion,
            "sphere_diameter_bound": sphere_bound,
            "tol": tol,
            "ray_limit": distortion <= tol,
        }),
    )
}

fn diam_ratio(m: &RotSymManifold, cfg: &RunConfig, out: &Outputs) -> Result<(), Failure> {
    let grid: Vec<f64> = radius_grid(m, cfg, 1.0, DIAM_POINTS, Magnitude::new(GEODESY_T_LIMIT))
        .iter()
        .map(|r| r.to_f64())
        .collect();
    let curve = diameter_ratio_curve(m, &grid)?;
    out.write("diam_ratio.csv", &ratio_curve_csv(&curve))
}

fn validate(m: &RotSymManifold, cfg: &RunConfig, out: &Outputs) -> Result<(), Failure> {
    let w = m.warp();
    let report = w.report();
    let grid = radius_grid(m, cfg, 1e-3, VALIDATE_POINTS, m.t_max());
    let bishop = check_bishop(m, &grid)?;
    let yau = check_yau_linear(m, &grid)?;
    let bishop_gromov = check_bishop_gromov(m, &grid)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (lo, hi) = (grid[0].ln(), w.t_max().ln());
    let mut negatives = 0usize;
    let mut min_curvature = f64::INFINITY;
    let mut taken = 0;
    while taken < cfg.grids.curvature_samples {
        let t = Magnitude::from_ln(rng.gen_range(lo..hi));
        match w.curvature_range(t) {
            Ok((a, b)) => {
                taken += 1;
                min_curvature = min_curvature.min(a.min(b));
                if a < 0.0 || b < 0.0 {
                    negatives += 1;
                }
            }
            Err(Error::Breakpoint(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }

    let mut failures = report.violations.clone();
    if bishop > 1.0 + 1e-9 {
        failures.push(format!("bishop ratio {bishop} > 1"));
    }
    if !(yau > 0.0) {
        failures.push(format!("yau ratio {yau} not positive"));
    }
    if !bishop_gromov {
        failures.push("vol(B_R)/R^n increases somewhere on the grid".into());
    }
    if negatives > 0 {
        failures.push(format!(
            "{negatives} samples with negative curvature bounds"
        ));
    }
    out.json(
        "validate.json",
        &json!({
            "bishop_max_ratio": bishop,
            "yau_min_ratio": yau,
            "bishop_gromov": bishop_gromov,
            "curvature": { "samples": taken, "negatives": negatives, "min_bound": min_curvature },
            "warp_report": report,
            "failures": failures,
            "passed": failures.is_empty(),
        }),
    )?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(failures.join("; ")))
    }
}
