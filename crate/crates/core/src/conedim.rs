//! Finite samples of rescaled balls `B_R(p)` in `r^{-1} M`, their packing
//! numbers and box-counting dimension, sphere diameter ratios, and a
//! distortion test for closeness to a ray.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geodesy::{ReducedPoint, RotSymManifold};

/// Largest number of distance-matrix entries a sample may hold.
pub const MATRIX_CAP: usize = 20_000_000;
/// Samples up to this size are packed exactly.
pub const EXACT_LIMIT: usize = 24;
pub const RESTARTS: usize = 32;
pub const DEFAULT_SEED: u64 = 0x5EED_CAFE;
/// Grid used by [`detect_ray_limit`].
pub const RAY_SAMPLE_COUNTS: (usize, usize) = (24, 24);

/// Points with a full symmetric matrix of (rescaled) distances.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSample {
    points: Vec<ReducedPoint>,
    scale: f64,
    dist: Vec<f64>,
}

impl MetricSample {
    /// Wraps a row-major `n x n` matrix, checking symmetry and the diagonal.
    pub fn from_matrix(points: Vec<ReducedPoint>, scale: f64, dist: Vec<f64>) -> Result<Self> {
        let n = points.len();
        if dist.len() != n * n {
            return domain(format!(
                "matrix has {} entries, expected {}",
                dist.len(),
                n * n
            ));
        }
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return domain(format!("nonzero diagonal at {i}"));
            }
            for j in 0..i {
                let d = dist[i * n + j];
                if !(d >= 0.0) || d != dist[j * n + i] {
                    return domain(format!("matrix not symmetric nonnegative at ({i}, {j})"));
                }
            }
        }
        Ok(MetricSample {
            points,
            scale,
            dist,
        })
    }

    /// Points of the real line with the absolute-difference metric.
    pub fn on_line(xs: &[f64]) -> Self {
        let n = xs.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = (xs[i] - xs[j]).abs();
            }
        }
        let points = xs.iter().map(|&t| ReducedPoint { t, theta: 0.0 }).collect();
        MetricSample {
            points,
            scale: 1.0,
            dist,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ReducedPoint] {
        &self.points
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.dist[i * n..(i + 1) * n]
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Largest `(d_ik - d_ij - d_jk) / d_ik` over all triples.
    pub fn max_triangle_excess(&self) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let dik = self.dist(i, k);
                    if dik > 0.0 {
                        worst = worst.max((dik - self.dist(i, j) - self.dist(j, k)) / dik);
                    }
                }
            }
        }
        worst
    }

    pub fn points_csv(&self) -> String {
        let mut s = String::from("t,theta\n");
        for p in &self.points {
            writeln!(s, "{:.16e},{:.16e}", p.t, p.theta).unwrap();
        }
        s
    }

    /// Upper triangle `i < j`, row-major.
    pub fn dist_csv(&self) -> String {
        let n = self.len();
        let mut s = String::from("i,j,dist\n");
        for i in 0..n {
            for j in i + 1..n {
                writeln!(s, "{i},{j},{:.16e}", self.dist(i, j)).unwrap();
            }
        }
        s
    }

    pub fn from_csv(points_csv: &str, dist_csv: &str, scale: f64) -> Result<Self> {
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("{e}: {s:?}")))
        };
        let points = points_csv
            .lines()
            .skip(1)
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let (t, th) = l
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("bad row {l:?}")))?;
                Ok(ReducedPoint {
                    t: num(t)?,
                    theta: num(th)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let n = points.len();
        let mut dist = vec![0.0; n * n];
        for l in dist_csv.lines().skip(1).filter(|l| !l.trim().is_empty()) {
            let cols: Vec<&str> = l.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Parse(format!("bad row {l:?}")));
            }
            let i: usize = cols[0]
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("{e}")))?;
            let j: usize = cols[1]
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("{e}")))?;
            if i >= n || j >= n {
                return Err(Error::Parse(format!("index out of range in {l:?}")));
            }
            let d = num(cols[2])?;
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
        Self::from_matrix(points, scale, dist).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Product grid over `t in [0, r R]`, `theta in [0, pi]` (the pole appears
/// once), with distances divided by `r`.
pub fn sample_rescaled_ball(
    m: &RotSymManifold,
    r: f64,
    big_r: f64,
    counts: (usize, usize),
) -> Result<MetricSample> {
    let (nt, nth) = counts;
    if !(r > 0.0 && big_r > 0.0) || nt == 0 || nth == 0 {
        return domain("sample needs r > 0, R > 0 and nonempty grids");
    }
    let top = r * big_r;
    if !(top <= m.t_max_f64()) {
        return domain(format!(
            "r R = {top:e} exceeds the solver range {:e}",
            m.t_max_f64()
        ));
    }
    let ts = linspace(0.0, top, nt);
    let thetas = linspace(0.0, std::f64::consts::PI, nth);
    let mut points = Vec::new();
    // (t index, theta index) per point
    let mut index = Vec::new();
    for (i, &t) in ts.iter().enumerate() {
        if t == 0.0 {
            points.push(ReducedPoint { t, theta: 0.0 });
            index.push((i, 0));
        } else {
            for (j, &theta) in thetas.iter().enumerate() {
                points.push(ReducedPoint { t, theta });
                index.push((i, j));
            }
        }
    }
    let n = points.len();
    let entries = n.saturating_mul(n);
    if entries > MATRIX_CAP {
        return Err(Error::SizeCap {
            entries,
            cap: MATRIX_CAP,
        });
    }
    let pairs: Vec<(usize, usize)> = (0..nt).flat_map(|a| (a..nt).map(move |b| (a, b))).collect();
    let table = pairs
        .par_iter()
        .map(|&(a, b)| m.distances(ts[a], ts[b], &thetas))
        .collect::<Result<Vec<_>>>()?;
    let pair_slot = |a: usize, b: usize| {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        // rows before a hold nt, nt - 1, ... entries
        a * nt - a * a.saturating_sub(1) / 2 + (b - a)
    };
    let mut dist = vec![0.0; entries];
    for p in 0..n {
        for q in p + 1..n {
            let (ia, ja) = index[p];
            let (ib, jb) = index[q];
            let k = ja.abs_diff(jb);
            let d = table[pair_slot(ia, ib)][k] / r;
            dist[p * n + q] = d;
            dist[q * n + p] = d;
        }
    }
    Ok(MetricSample {
        points,
        scale: r,
        dist,
    })
}

/// Farthest-point insertion radii from several seeded starts; the first
/// `1 + #{radii >= eps}` points of each traversal are `eps`-separated.
#[derive(Clone, Debug)]
pub struct PackingProfile {
    radii: Vec<Vec<f64>>,
}

impl PackingProfile {
    pub fn new(sample: &MetricSample, restarts: usize, seed: u64) -> Self {
        let n = sample.len();
        if n == 0 {
            return PackingProfile { radii: Vec::new() };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let starts: Vec<usize> = (0..restarts.max(1)).map(|_| rng.gen_range(0..n)).collect();
        let radii = starts
            .par_iter()
            .map(|&s| {
                let mut mind = sample.row(s).to_vec();
                mind[s] = f64::NEG_INFINITY;
                let mut out = Vec::new();
                loop {
                    let (j, r) = mind.iter().copied().enumerate().fold(
                        (usize::MAX, f64::NEG_INFINITY),
                        |acc, (j, d)| if d > acc.1 { (j, d) } else { acc },
                    );
                    if j == usize::MAX || r <= 0.0 {
                        break;
                    }
                    out.push(r);
                    mind[j] = f64::NEG_INFINITY;
                    for (m, &d) in mind.iter_mut().zip(sample.row(j)) {
                        if *m > d {
                            *m = d;
                        }
                    }
                }
                out
            })
            .collect();
        PackingProfile { radii }
    }

    pub fn count(&self, eps: f64) -> usize {
        self.radii
            .iter()
            .map(|rs| 1 + rs.partition_point(|&r| r >= eps))
            .max()
            .unwrap_or(0)
    }
}

/// Size of the largest `eps`-separated subset (pairwise distance `>= eps`),
/// by branch and bound. Requires at most [`EXACT_LIMIT`] points.
pub fn exact_capacity(sample: &MetricSample, eps: f64) -> Result<usize> {
    let n = sample.len();
    if n > EXACT_LIMIT {
        return domain(format!(
            "exact packing limited to {EXACT_LIMIT} points, got {n}"
        ));
    }
    let conflicts: Vec<u32> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && sample.dist(i, j) < eps)
                .fold(0u32, |m, j| m | (1 << j))
        })
        .collect();
    fn search(cands: u32, size: usize, conflicts: &[u32], best: &mut usize) {
        if cands == 0 {
            *best = (*best).max(size);
            return;
        }
        if size + cands.count_ones() as usize <= *best {
            return;
        }
        let v = cands.trailing_zeros() as usize;
        let bit = 1u32 << v;
        search(cands & !bit & !conflicts[v], size + 1, conflicts, best);
        search(cands & !bit, size, conflicts, best);
    }
    let mut best = 0;
    let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    search(all, 0, &conflicts, &mut best);
    Ok(best)
}

/// `eps`-capacity: exact for small samples, otherwise the best farthest-point
/// packing over [`RESTARTS`] seeded starts (a lower bound).
pub fn capacity(sample: &MetricSample, eps: f64) -> usize {
    capacity_seeded(sample, eps, DEFAULT_SEED)
}

pub fn capacity_seeded(sample: &MetricSample, eps: f64, seed: u64) -> usize {
    if sample.len() <= EXACT_LIMIT {
        return exact_capacity(sample, eps).expect("within exact limit");
    }
    PackingProfile::new(sample, RESTARTS, seed).count(eps)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub eps_grid: Vec<f64>,
    pub counts: Vec<usize>,
    /// Least-squares slope of `ln count` against `ln(1/eps)`.
    pub dim_slope: f64,
    pub intercept: f64,
    /// Root-mean-square regression residual.
    pub residual: f64,
    /// Standard error of the slope.
    pub slope_stderr: f64,
}

impl CapacityEstimate {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("eps,count\n");
        for (e, c) in self.eps_grid.iter().zip(&self.counts) {
            writeln!(s, "{e:.16e},{c}").unwrap();
        }
        s
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({
            "dim_slope": self.dim_slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "slope_stderr": self.slope_stderr,
        }))
        .expect("json")
    }
}

/// Fits `ln y = a + slope ln(1/eps)`.
fn regress(xs: &[f64], ys: &[f64]) -> (f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = if n > 2.0 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    (slope, intercept, (sse / n).sqrt(), stderr)
}

/// Packing counts on `n_eps` log-spaced scales in `[lo, hi]` and the
/// regression slope estimating the upper box dimension.
pub fn upper_box_dimension(
    sample: &MetricSample,
    eps_range: (f64, f64),
    n_eps: usize,
) -> Result<CapacityEstimate> {
    upper_box_dimension_seeded(sample, eps_range, n_eps, DEFAULT_SEED)
}

pub fn upper_box_dimension_seeded(
    sample: &MetricSample,
    eps_range: (f64, f64),
    n_eps: usize,
    seed: u64,
) -> Result<CapacityEstimate> {
    if sample.len() <= 1 {
        return Err(Error::DegenerateRegression(
            "sample has at most one point".into(),
        ));
    }
    let (lo, hi) = eps_range;
    let diam = sample.diameter();
    if !(lo > 0.0 && lo < hi && hi < diam) {
        return domain(format!(
            "need 0 < lo < hi < diameter = {diam}, got ({lo}, {hi})"
        ));
    }
    if n_eps < 4 {
        return domain("need at least 4 scales");
    }
    let eps_grid: Vec<f64> = (0..n_eps)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n_eps - 1) as f64))
        .collect();
    let counts: Vec<usize> = if sample.len() <= EXACT_LIMIT {
        eps_grid
            .iter()
            .map(|&e| exact_capacity(sample, e).expect("small"))
            .collect()
    } else {
        let profile = PackingProfile::new(sample, RESTARTS, seed);
        eps_grid.iter().map(|&e| profile.count(e)).collect()
    };
    if counts.iter().all(|&c| c == counts[0]) {
        return Err(Error::DegenerateRegression(format!(
            "all counts equal {}",
            counts[0]
        )));
    }
    let xs: Vec<f64> = eps_grid.iter().map(|e| -e.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let (dim_slope, intercept, residual, slope_stderr) = regress(&xs, &ys);
    Ok(CapacityEstimate {
        eps_grid,
        counts,
        dim_slope,
        intercept,
        residual,
        slope_stderr,
    })
}

/// `(R, diam(dB_R(p)) / R)` for each grid radius.
pub fn diameter_ratio_curve(m: &RotSymManifold, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    grid.par_iter()
        .map(|&r| Ok((r, m.sphere_diameter(r)? / r)))
        .collect()
}

pub fn ratio_curve_from_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    crate::scales::read_pairs(text, "R,ratio")
}

pub fn ratio_curve_csv(curve: &[(f64, f64)]) -> String {
    let mut s = String::from("R,ratio\n");
    for (r, q) in curve {
        writeln!(s, "{r:.16e},{q:.16e}").unwrap();
    }
    s
}

/// Largest `|d(x, y) - |t_x - t_y| / r|` over the sample: the distortion of
/// the radial projection onto `[0, R]`.
pub fn ray_distortion(sample: &MetricSample) -> f64 {
    let n = sample.len();
    let r = sample.scale();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let radial = (sample.points[i].t - sample.points[j].t).abs() / r;
            worst = worst.max((sample.dist(i, j) - radial).abs());
        }
    }
    worst
}

/// Whether the rescaled ball `B_R(p)` in `r^{-1} M` is `tol`-close to the
/// segment `[0, R]` via radial projection.
pub fn detect_ray_limit(m: &RotSymManifold, r: f64, big_r: f64, tol: f64) -> Result<bool> {
    detect_ray_limit_with(m, r, big_r, tol, RAY_SAMPLE_COUNTS)
}

pub fn detect_ray_limit_with(
    m: &RotSymManifold,
    r: f64,
    big_r: f64,
    tol: f64,
    counts: (usize, usize),
) -> Result<bool> {
    let sample = sample_rescaled_ball(m, r, big_r, counts)?;
    Ok(ray_distortion(&sample) <= tol)
}
