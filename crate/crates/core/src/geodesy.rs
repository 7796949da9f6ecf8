//! Distances on `M = [0, T) x S^{n-1}` with metric `dt^2 + f(t)^2 ds^2`.
//!
//! Two points at radii `t1`, `t2` separated by angle `theta` on the sphere
//! span a totally geodesic meridian plane `dt^2 + f(t)^2 dphi^2`, so every
//! distance reduces to this 2D problem. Geodesics there satisfy Clairaut's
//! relation `f^2 phi' = c`; the radius along a geodesic is convex, so it is
//! either monotone between the endpoints or dips to a turning radius `t*` with
//! `f(t*) = c`.
//!
//! Integrals are taken in the variable `s = arccosh(f / c)`, in which both
//! the angular sweep and the length excess are smooth up to the turning point.
//! Chords integrate in closed form; power pieces use adaptive Gauss-Kronrod.
//!
//! A single shooting parameter covers the monotone branch and turning
//! geodesics from vanishingly shallow dips down to `t* = 10^-9 t_min`. All
//! roots of `sweep = theta` bracketed on a scan are refined and the shortest
//! resulting path wins, together with the path through the pole.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{domain, Error, Result};
use crate::magnitude::Magnitude;
use crate::quad::{integrate, QuadConfig};
use crate::warp::{PieceKind, WarpFunction};

/// Largest radius the `f64` solver accepts.
pub const GEODESY_T_LIMIT: f64 = 1e290;

const TURN_DECADES: f64 = 9.0;

#[derive(Clone, Debug, PartialEq)]
pub struct RotSymManifold {
    n: usize,
    warp: WarpFunction,
    shooting: ShootingConfig,
}

/// A point up to rotation: radius and angle from the reference meridian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedPoint {
    pub t: f64,
    pub theta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShootingConfig {
    /// Samples per segment of the shooting parameter (monotone, shallow
    /// turning, deep turning) used to bracket roots.
    pub scan_points: usize,
    pub max_iter: usize,
    /// Root-finding stops once `|sweep - theta|` is below this.
    pub sweep_tol: f64,
    pub quad: QuadConfig,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        ShootingConfig {
            scan_points: 32,
            max_iter: 200,
            sweep_tol: 1e-13,
            quad: QuadConfig {
                abs_tol: 1e-14,
                rel_tol: 1e-12,
                max_intervals: 400,
            },
        }
    }
}

impl RotSymManifold {
    pub fn new(n: usize, warp: WarpFunction) -> Result<Self> {
        if n < 2 {
            return domain(format!("dimension {n} < 2"));
        }
        Ok(RotSymManifold {
            n,
            warp,
            shooting: ShootingConfig::default(),
        })
    }

    /// Replaces the solver settings used by [`Self::distance`] and friends.
    pub fn with_shooting(mut self, cfg: ShootingConfig) -> Self {
        self.shooting = cfg;
        self
    }

    pub fn shooting(&self) -> &ShootingConfig {
        &self.shooting
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn warp(&self) -> &WarpFunction {
        &self.warp
    }

    pub fn t_max(&self) -> Magnitude {
        self.warp.t_max()
    }

    /// Largest radius usable by the distance solver.
    pub fn t_max_f64(&self) -> f64 {
        self.t_max().to_f64().min(GEODESY_T_LIMIT)
    }

    fn check_radius(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) || t > self.t_max_f64() {
            return domain(format!("radius {t} outside [0, {:e}]", self.t_max_f64()));
        }
        Ok(())
    }

    /// Geodesic distance between `(t1, 0)` and `(t2, theta)`.
    pub fn distance(&self, t1: f64, t2: f64, theta: f64) -> Result<f64> {
        self.distance_with(t1, t2, theta, &self.shooting)
    }

    pub fn distance_with(&self, t1: f64, t2: f64, theta: f64, cfg: &ShootingConfig) -> Result<f64> {
        Ok(self.distances_with(t1, t2, &[theta], cfg)?[0])
    }

    pub fn distance_between(&self, a: ReducedPoint, b: ReducedPoint) -> Result<f64> {
        self.distance(a.t, b.t, (a.theta - b.theta).abs())
    }

    /// Distances from `(t1, 0)` to `(t2, theta_k)` for several angles, sharing
    /// one scan of the shooting parameter.
    pub fn distances(&self, t1: f64, t2: f64, thetas: &[f64]) -> Result<Vec<f64>> {
        self.distances_with(t1, t2, thetas, &self.shooting)
    }

    pub fn distances_with(
        &self,
        t1: f64,
        t2: f64,
        thetas: &[f64],
        cfg: &ShootingConfig,
    ) -> Result<Vec<f64>> {
        self.check_radius(t1)?;
        self.check_radius(t2)?;
        for &th in thetas {
            if !(0.0..=std::f64::consts::PI).contains(&th) {
                return domain(format!("angle {th} outside [0, pi]"));
            }
        }
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let radial = hi - lo;
        let through_pole = hi + lo;
        if lo == 0.0 {
            return Ok(vec![hi; thetas.len()]);
        }
        if thetas.iter().all(|&th| th == 0.0) {
            return Ok(vec![radial; thetas.len()]);
        }
        let shooter = Shooter {
            m: self,
            lo,
            hi,
            cfg,
        };
        let per = cfg.scan_points.max(4);
        let taus: Vec<f64> = std::iter::once(0.0)
            .chain(
                (0..3).flat_map(|seg| (1..=per).map(move |k| seg as f64 + k as f64 / per as f64)),
            )
            .collect();
        let n = taus.len() - 1;
        let sweeps = taus
            .iter()
            .map(|&tau| shooter.sweep(tau))
            .collect::<Result<Vec<_>>>()?;

        thetas
            .iter()
            .map(|&theta| {
                if theta == 0.0 {
                    return Ok(radial);
                }
                let mut best = through_pole;
                for k in 0..n {
                    let (ha, hb) = (sweeps[k] - theta, sweeps[k + 1] - theta);
                    let root = if ha == 0.0 {
                        Some(taus[k])
                    } else if ha * hb < 0.0 {
                        Some(shooter.refine(taus[k], ha, taus[k + 1], hb, theta)?)
                    } else {
                        None
                    };
                    if let Some(tau) = root {
                        best = best.min(shooter.evaluate(tau)?.length);
                    }
                }
                if sweeps[n] == theta {
                    best = best.min(shooter.evaluate(taus[n])?.length);
                }
                Ok(best.clamp(radial, through_pole))
            })
            .collect()
    }

    /// Diameter of the distance sphere of radius `r` about the pole.
    pub fn sphere_diameter(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return domain("sphere_diameter requires R > 0");
        }
        self.distance(r, r, std::f64::consts::PI)
    }

    /// `R_cut - d((t, theta), gamma(R_cut))` for the ray `gamma` along `theta = 0`.
    pub fn busemann(&self, t: f64, theta: f64, r_cut: f64) -> Result<f64> {
        if !(r_cut >= 10.0 * t) {
            return domain(format!(
                "R_cut = {r_cut} must be at least 10 t = {}",
                10.0 * t
            ));
        }
        Ok(r_cut - self.distance(t, r_cut, theta)?)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GeodesicCandidate {
    pub sweep: f64,
    pub length: f64,
}

/// Geodesic family between radii `lo <= hi`.
struct Shooter<'a> {
    m: &'a RotSymManifold,
    lo: f64,
    hi: f64,
    cfg: &'a ShootingConfig,
}

/// Configuration of one Clairaut geodesic. Integrals start at `anchor`, where
/// `f(anchor) - c = gap >= 0`; a turning geodesic dips `delta = lo - anchor`
/// below the lower endpoint, kept separately so tiny dips stay exact.
#[derive(Clone, Copy, Debug)]
struct Branch {
    anchor: f64,
    delta: f64,
    c: f64,
    gap: f64,
    turning: bool,
}

/// Smallest `ln(delta / lo)` on the shallow turning segment.
const SHALLOW_LN_SPAN: f64 = 738.0;

impl Shooter<'_> {
    /// `p in [0, 1]`: monotone with `c = p f(lo)`. `p in (1, 2]`: turning with
    /// `ln(delta / lo) = -ln 2 - 738 (2 - p)^4`. `p in (2, 3]`: turning with
    /// `t*` log-uniform from `lo / 2` down to `lo 10^-9`.
    fn branch(&self, p: f64) -> Branch {
        let w = &self.m.warp;
        let lo = self.lo;
        if p <= 1.0 {
            let f_lo = w.eval_f64(lo);
            return Branch {
                anchor: lo,
                delta: 0.0,
                c: p * f_lo,
                gap: (1.0 - p) * f_lo,
                turning: false,
            };
        }
        let (anchor, delta) = if p <= 2.0 {
            let ln_rho = -std::f64::consts::LN_2 - SHALLOW_LN_SPAN * (2.0 - p).powi(4);
            let delta = lo * ln_rho.exp();
            (lo - delta, delta)
        } else {
            let ln_ratio = -std::f64::consts::LN_2
                + (p - 2.0) * (std::f64::consts::LN_2 - TURN_DECADES * std::f64::consts::LN_10);
            let anchor = lo * ln_ratio.exp();
            (anchor, lo - anchor)
        };
        Branch {
            anchor,
            delta,
            c: w.eval_f64(anchor),
            gap: 0.0,
            turning: true,
        }
    }

    fn candidate(&self, p: f64) -> Result<GeodesicCandidate> {
        let br = self.branch(p);
        if br.c == 0.0 {
            return Ok(GeodesicCandidate {
                sweep: 0.0,
                length: self.hi - self.lo,
            });
        }
        let span = self.hi - self.lo;
        let marks = [br.delta, br.delta + span];
        let acc = clairaut_integrals(&self.m.warp, &br, &marks, &self.cfg.quad)?;
        let (s_lo, e_lo) = acc[0];
        let (s_hi, e_hi) = acc[1];
        if br.turning {
            // two legs share [anchor, lo]
            Ok(GeodesicCandidate {
                sweep: s_lo + s_hi,
                length: 2.0 * br.delta + span + e_lo + e_hi,
            })
        } else {
            Ok(GeodesicCandidate {
                sweep: s_hi,
                length: span + e_hi,
            })
        }
    }

    fn sweep(&self, tau: f64) -> Result<f64> {
        Ok(self.candidate(tau)?.sweep)
    }

    fn evaluate(&self, tau: f64) -> Result<GeodesicCandidate> {
        self.candidate(tau)
    }

    /// Illinois regula falsi on `sweep(tau) - theta`.
    fn refine(&self, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64, theta: f64) -> Result<f64> {
        for _ in 0..self.cfg.max_iter {
            let mut x = (a * fb - b * fa) / (fb - fa);
            if !(x > a.min(b) && x < a.max(b)) {
                x = 0.5 * (a + b);
            }
            let fx = self.sweep(x)? - theta;
            if fx.abs() <= self.cfg.sweep_tol
                || (b - a).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300)
            {
                return Ok(x);
            }
            if fx * fb < 0.0 {
                a = b;
                fa = fb;
            } else {
                fa *= 0.5;
            }
            b = x;
            fb = fx;
        }
        Err(Error::IterationLimit(format!(
            "shooting for theta = {theta} between radii {} and {} did not converge",
            self.lo, self.hi
        )))
    }
}

/// `arccosh(1 + x)` without cancellation near 0 or overflow for huge `x`.
fn acosh1p(x: f64) -> f64 {
    if x > 1e8 {
        (2.0 * (x + 1.0)).ln()
    } else {
        (x + (x * (2.0 + x)).sqrt()).ln_1p()
    }
}

fn ln_cosh(s: f64) -> f64 {
    s + (-2.0 * s).exp().ln_1p() - std::f64::consts::LN_2
}

/// Cumulative `(sweep, excess)` from `br.anchor` to each mark, given as
/// ascending offsets from the anchor. Sweep is `int c / (f sqrt(f^2 - c^2)) dt`
/// and excess is `int (f / sqrt(f^2 - c^2) - 1) dt`.
fn clairaut_integrals(
    warp: &WarpFunction,
    br: &Branch,
    marks: &[f64],
    quad: &QuadConfig,
) -> Result<Vec<(f64, f64)>> {
    let pieces = warp.pieces();
    let last = pieces.len() - 1;
    let c = br.c;
    let anchor = br.anchor;
    let mut out = Vec::with_capacity(marks.len());
    let mut sweep = 0.0;
    let mut excess = 0.0;
    let mut x = 0.0;
    // f(anchor + x) - c
    let mut d = br.gap;
    let mut s_x = acosh1p(d / c);
    let mut idx = warp.piece_index_f64(anchor).unwrap_or(last);
    for &mark in marks {
        while x < mark {
            let p = &pieces[idx];
            let end = if idx == last {
                f64::INFINITY
            } else {
                p.end.to_f64() - anchor
            };
            let y = end.min(mark);
            if y <= x {
                idx += 1;
                continue;
            }
            let d_y = d + p.increment_f64(anchor + x, y - x);
            let s_y = acosh1p(d_y / c);
            let (ds, de) = match p.kind {
                PieceKind::Linear { slope, .. } => {
                    let sigma = slope.to_f64();
                    if sigma == 0.0 {
                        let f = c + d;
                        let q = (d * (2.0 * c + d)).sqrt();
                        ((y - x) * c / (f * q), (y - x) * c * c / (q * (f + q)))
                    } else {
                        let shrink = -(s_x - s_y).exp_m1() * (-s_x).exp();
                        let sw = 2.0 / sigma * (shrink / (1.0 + (-s_x - s_y).exp())).atan();
                        (sw, c / sigma * shrink)
                    }
                }
                PieceKind::Power { gamma } => power_piece(gamma, c, s_x, s_y, quad)?,
            };
            sweep += ds;
            excess += de;
            x = y;
            d = d_y;
            s_x = s_y;
            if y >= end {
                idx += 1;
            }
        }
        out.push((sweep, excess));
    }
    Ok(out)
}

/// Sweep and excess over a power piece `f = t^gamma` between `s_x` and `s_y`.
fn power_piece(gamma: f64, c: f64, s_x: f64, s_y: f64, quad: &QuadConfig) -> Result<(f64, f64)> {
    if s_y <= s_x {
        return Ok((0.0, 0.0));
    }
    let inv = 1.0 / gamma;
    let ln_c = c.ln();
    let ln_k_sweep = (inv - 1.0) * ln_c - gamma.ln();
    let m_sweep = inv - 2.0;
    let ln_k_excess = inv * ln_c - gamma.ln();
    let m_excess = inv - 1.0;
    let sweep = if m_sweep == 0.0 {
        ln_k_sweep.exp() * (s_y - s_x)
    } else {
        integrate(
            |s| (ln_k_sweep + m_sweep * ln_cosh(s)).exp(),
            s_x,
            s_y,
            quad,
        )?
        .value
    };
    let excess = integrate(
        |s| (ln_k_excess + m_excess * ln_cosh(s) - s).exp(),
        s_x,
        s_y,
        quad,
    )?
    .value;
    Ok((sweep, excess))
}

/// Resolution of the Dijkstra oracle grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    /// Number of radial steps between `t_lo` and the larger endpoint radius.
    pub nt: usize,
    /// Number of angular steps across `[0, theta]`; `0` picks the count that
    /// makes cells at the outer radius roughly square.
    pub nphi: usize,
    /// Stencil offsets `(di, dj)` satisfy `|di|, dj <= stencil_radius`.
    pub stencil_radius: i32,
    pub t_lo: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            nt: 160,
            nphi: 0,
            stencil_radius: 8,
            t_lo: 0.0,
        }
    }
}

fn gcd(mut a: i32, mut b: i32) -> i32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_804_939_476_142_360_184,
    0.525_532_409_916_328_985_817_739_049_189_246,
    0.796_666_477_413_626_739_591_553_936_475_830,
    0.960_289_856_497_536_231_683_560_868_569_473,
];
const GL8_W: [f64; 4] = [
    0.362_683_783_378_361_982_965_150_449_277_196,
    0.313_706_645_877_887_287_337_962_201_986_601,
    0.222_381_034_453_374_470_544_355_994_426_241,
    0.101_228_536_290_376_259_152_531_354_309_962,
];

struct Dist(f64);
impl PartialEq for Dist {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o).is_eq()
    }
}
impl Eq for Dist {}
impl PartialOrd for Dist {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Dist {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

/// Shortest path between `(t1, 0)` and `(t2, theta)` in a `(t, phi)` grid
/// graph whose edges are straight coordinate segments weighted by their
/// metric length. An upper bound on the true distance that converges under
/// refinement; used to cross-check [`RotSymManifold::distance`].
pub fn dijkstra_distance(
    m: &RotSymManifold,
    t1: f64,
    t2: f64,
    theta: f64,
    spec: &GridSpec,
) -> Result<f64> {
    m.check_radius(t1)?;
    m.check_radius(t2)?;
    if spec.nt == 0 || spec.stencil_radius < 1 {
        return domain("grid needs nt >= 1 and stencil radius >= 1");
    }
    let t_top = t1.max(t2);
    let t_lo = spec.t_lo.clamp(0.0, t1.min(t2));
    let mut rows: Vec<f64> = (0..=spec.nt)
        .map(|i| t_lo + (t_top - t_lo) * i as f64 / spec.nt as f64)
        .collect();
    rows.extend([t1, t2]);
    rows.sort_by(f64::total_cmp);
    rows.dedup();
    let nphi = if theta == 0.0 {
        0
    } else if spec.nphi > 0 {
        spec.nphi
    } else {
        let dt = (t_top - t_lo) / spec.nt as f64;
        let cells = (theta * m.warp().eval_f64(0.5 * (t_lo + t_top)) / dt).round();
        cells.clamp(8.0, 8.0 * spec.nt as f64) as usize
    };
    let dphi = if nphi == 0 { 0.0 } else { theta / nphi as f64 };
    let cols = nphi + 1;
    let r = spec.stencil_radius;
    let stencil: Vec<(i32, i32)> = (0..=r)
        .flat_map(|dj| (-r..=r).map(move |di| (di, dj)))
        .filter(|&(di, dj)| (di, dj) != (0, 0) && gcd(di, dj) == 1)
        .filter(|&(_, dj)| nphi > 0 || dj == 0)
        .collect();
    let warp = m.warp();
    let nrows = rows.len();
    // weights[i * |stencil| + k]: metric length of the segment from row i along stencil k
    let mut weights = vec![f64::INFINITY; nrows * stencil.len()];
    for i in 0..nrows {
        for (k, &(di, dj)) in stencil.iter().enumerate() {
            let j = i as i64 + di as i64;
            if j < 0 || j >= nrows as i64 {
                continue;
            }
            let (ta, tb) = (rows[i], rows[j as usize]);
            let dt = tb - ta;
            let dp = dj as f64 * dphi;
            let mut len = 0.0;
            for (x, w) in GL8_X.iter().zip(GL8_W) {
                for u in [0.5 * (1.0 - x), 0.5 * (1.0 + x)] {
                    let f = warp.eval_f64(ta + u * dt);
                    len += 0.5 * w * dt.hypot(f * dp);
                }
            }
            weights[i * stencil.len() + k] = len;
        }
    }
    let node = |i: usize, j: usize| i * cols + j;
    let row_of = |t: f64| {
        rows.iter()
            .position(|&x| x == t)
            .expect("endpoint row inserted")
    };
    let (src, dst) = (node(row_of(t1), 0), node(row_of(t2), nphi));
    let mut dist = vec![f64::INFINITY; nrows * cols];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Reverse((Dist(0.0), src)));
    while let Some(Reverse((Dist(du), u))) = heap.pop() {
        if u == dst {
            return Ok(du);
        }
        if du > dist[u] {
            continue;
        }
        let (i, j) = (u / cols, u % cols);
        for (k, &(di, dj)) in stencil.iter().enumerate() {
            let w = weights[i * stencil.len() + k];
            let jj = j + dj as usize;
            if !w.is_finite() || jj >= cols {
                continue;
            }
            let ii = (i as i64 + di as i64) as usize;
            let v = node(ii, jj);
            let nd = du + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((Dist(nd), v)));
            }
        }
    }
    Err(Error::Domain("grid target unreachable".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn euclid() -> RotSymManifold {
        RotSymManifold::new(2, WarpFunction::euclidean(1e6).unwrap()).unwrap()
    }

    fn law_of_cosines(a: f64, b: f64, th: f64) -> f64 {
        (a * a + b * b - 2.0 * a * b * th.cos()).max(0.0).sqrt()
    }

    #[test]
    fn planar_triangle() {
        let d = euclid().distance(3.0, 4.0, PI / 2.0).unwrap();
        assert!((d - 5.0).abs() < 1e-10, "{d}");
    }

    #[test]
    fn planar_distances_on_a_grid() {
        let m = euclid();
        for &(a, b) in &[(1.0, 1.0), (0.3, 2.0), (5.0, 0.01), (10.0, 9.0)] {
            let thetas: Vec<f64> = (0..=20).map(|k| PI * k as f64 / 20.0).collect();
            let ds = m.distances(a, b, &thetas).unwrap();
            for (&th, &d) in thetas.iter().zip(&ds) {
                let exact = law_of_cosines(a, b, th);
                assert!(
                    (d - exact).abs() <= 1e-9 * exact.max(1.0),
                    "{a} {b} {th}: {d} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn same_meridian_is_radial() {
        let m = RotSymManifold::new(3, WarpFunction::capped_power(0.5, 1e4).unwrap()).unwrap();
        assert_eq!(m.distance(7.0, 2.0, 0.0).unwrap(), 5.0);
    }

    #[test]
    fn antipodal_unit_points() {
        let d = euclid().sphere_diameter(1.0).unwrap();
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn square_root_sphere_diameter_is_bounded() {
        let m = RotSymManifold::new(2, WarpFunction::power(0.5, 1e5).unwrap()).unwrap();
        let r = 1e4;
        let d = m.sphere_diameter(r).unwrap();
        assert!(d <= PI * 100.0 && d > 0.0, "{d}");
    }

    #[test]
    fn planar_busemann_is_height() {
        let m = euclid();
        let b = m.busemann(1.0, PI / 3.0, 1e4).unwrap();
        assert!((b - 0.5).abs() < 1e-3, "{b}");
        assert_eq!(m.busemann(2.0, 0.0, 100.0).unwrap(), 2.0);
    }

    #[test]
    fn domain_errors() {
        let m = euclid();
        assert!(matches!(m.distance(-1.0, 1.0, 0.1), Err(Error::Domain(_))));
        assert!(matches!(m.distance(1.0, 2e6, 0.1), Err(Error::Domain(_))));
        assert!(matches!(m.distance(1.0, 1.0, 4.0), Err(Error::Domain(_))));
        assert!(matches!(m.busemann(1.0, 0.1, 5.0), Err(Error::Domain(_))));
        assert!(RotSymManifold::new(1, WarpFunction::euclidean(1.0).unwrap()).is_err());
    }

    #[test]
    fn dijkstra_approximates_planar_distance() {
        let m = euclid();
        let d = dijkstra_distance(&m, 3.0, 4.0, PI / 2.0, &GridSpec::default()).unwrap();
        assert!((5.0 - 1e-9..5.0 * 1.01).contains(&d), "{d}");
    }

    #[test]
    fn dijkstra_uses_the_pole() {
        let m = euclid();
        let d = dijkstra_distance(&m, 3.0, 4.0, PI, &GridSpec::default()).unwrap();
        assert!((d - 7.0).abs() < 1e-9, "{d}");
    }
}
