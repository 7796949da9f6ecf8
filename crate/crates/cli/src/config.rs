use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use warplab::geodesy::{RotSymManifold, ShootingConfig};
use warplab::quad::QuadConfig;
use warplab::{build_oscillating_warp, Magnitude, WarpFunction};

use crate::Failure;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub manifold: ManifoldSpec,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ManifoldSpec {
    Euclidean {
        n: usize,
        #[serde(default = "default_t_max")]
        t_max: Magnitude,
    },
    /// `t^gamma`; `capped` replaces it by `t` on `[0, 1]` for a smooth pole.
    Power {
        n: usize,
        gamma: f64,
        #[serde(default = "default_t_max")]
        t_max: Magnitude,
        #[serde(default)]
        capped: bool,
    },
    /// `schedule_cap` bounds `ln R_j` of the breakpoint schedule.
    Oscillating {
        n: usize,
        n_stages: usize,
        schedule_cap: f64,
    },
}

fn default_t_max() -> Magnitude {
    Magnitude::new(1e12)
}

/// Log-spaced radii; `hi` defaults to the largest admissible radius.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiusGrid {
    pub lo: Magnitude,
    pub hi: Option<Magnitude>,
    pub n: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    pub radius: Option<RadiusGrid>,
    /// Share of the grid (from the top) used for tail-min/tail-max orders.
    pub tail_fraction: f64,
    /// Spacing of `x = ln R` in volume traces.
    pub trace_step: f64,
    pub slope_k: Option<f64>,
    pub slope_l: f64,
    /// Spacing of the `t` grid in the slope condition.
    pub slope_t_step: f64,
    pub profile_centers: Option<Vec<Magnitude>>,
    pub profile_max_centers: usize,
    pub profile_radii: Vec<f64>,
    pub sample: SampleGrid,
    pub eps: EpsGrid,
    pub ray_tol: Option<f64>,
    pub curvature_samples: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            radius: None,
            tail_fraction: 0.9,
            trace_step: 0.05,
            slope_k: None,
            slope_l: 3.0,
            slope_t_step: 0.05,
            profile_centers: None,
            profile_max_centers: 16,
            profile_radii: [1.0f64, 1.5, 2.0, 2.5, 3.0]
                .iter()
                .map(|t| t.exp())
                .collect(),
            sample: SampleGrid::default(),
            eps: EpsGrid::default(),
            ray_tol: None,
            curvature_samples: 1000,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleGrid {
    pub r: f64,
    pub big_r: f64,
    pub nt: usize,
    pub ntheta: usize,
}

impl Default for SampleGrid {
    fn default() -> Self {
        SampleGrid {
            r: 1.0,
            big_r: 1.0,
            nt: 40,
            ntheta: 40,
        }
    }
}

/// Packing scales; unset bounds are `0.02` and `0.2` times the sample diameter.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpsGrid {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub n: usize,
}

impl Default for EpsGrid {
    fn default() -> Self {
        EpsGrid {
            lo: None,
            hi: None,
            n: 10,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub quad_abs: f64,
    pub quad_rel: f64,
    pub shooting: f64,
    /// Largest acceptable standard error of the box-dimension slope.
    pub regression_stderr: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        let s = ShootingConfig::default();
        Tolerances {
            quad_abs: s.quad.abs_tol,
            quad_rel: s.quad.rel_tol,
            shooting: s.sweep_tol,
            regression_stderr: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| Failure::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), Failure> {
        let bad = |m: String| Err(Failure::Config(m));
        let n = match self.manifold {
            ManifoldSpec::Euclidean { n, .. } | ManifoldSpec::Oscillating { n, .. } => n,
            ManifoldSpec::Power { n, gamma, .. } => {
                if !(gamma > 0.0 && gamma <= 1.0) {
                    return bad(format!("gamma = {gamma} outside (0, 1]"));
                }
                n
            }
        };
        if n < 2 {
            return bad(format!("dimension n = {n} must be at least 2"));
        }
        let t = &self.tolerances;
        let positive = [
            t.quad_abs,
            t.quad_rel,
            t.shooting,
            t.regression_stderr.unwrap_or(1.0),
        ];
        if positive.iter().any(|&x| !(x > 0.0)) {
            return bad("all tolerances must be positive".into());
        }
        let g = &self.grids;
        if !(g.tail_fraction > 0.0 && g.tail_fraction <= 1.0) {
            return bad(format!(
                "tail_fraction = {} outside (0, 1]",
                g.tail_fraction
            ));
        }
        if !(g.trace_step > 0.0 && g.slope_t_step > 0.0) {
            return bad("trace and slope steps must be positive".into());
        }
        Ok(())
    }

    pub fn manifold(&self) -> Result<RotSymManifold, Failure> {
        let (n, warp) = match &self.manifold {
            ManifoldSpec::Euclidean { n, t_max } => (*n, WarpFunction::euclidean(*t_max)?),
            ManifoldSpec::Power {
                n,
                gamma,
                t_max,
                capped: false,
            } => (*n, WarpFunction::power(*gamma, *t_max)?),
            ManifoldSpec::Power {
                n,
                gamma,
                t_max,
                capped: true,
            } => (*n, WarpFunction::capped_power(*gamma, *t_max)?),
            ManifoldSpec::Oscillating {
                n,
                n_stages,
                schedule_cap,
            } => (*n, build_oscillating_warp(*n_stages, *schedule_cap)?),
        };
        let t = &self.tolerances;
        let shooting = ShootingConfig {
            sweep_tol: t.shooting,
            quad: QuadConfig {
                abs_tol: t.quad_abs,
                rel_tol: t.quad_rel,
                ..ShootingConfig::default().quad
            },
            ..ShootingConfig::default()
        };
        Ok(RotSymManifold::new(n, warp)?.with_shooting(shooting))
    }
}
