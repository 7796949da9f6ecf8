//! Volumes of metric balls about the pole and comparison-geometry checks.
//!
//! `vol(B_R(p)) = |S^{n-1}| int_0^R f(t)^{n-1} dt`, integrated piecewise in
//! closed form. `omega_n` is the volume of the Euclidean unit `n`-ball and
//! `|S^{n-1}| = n omega_n`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geodesy::RotSymManifold;
use crate::magnitude::Magnitude;

/// Relative slack for the comparison checks.
pub const COMPARISON_SLACK: f64 = 1e-9;

/// Volume of the Euclidean unit `n`-ball.
pub fn unit_ball_volume(n: usize) -> f64 {
    let (mut even, mut odd) = (1.0, 2.0);
    if n == 0 {
        return even;
    }
    let mut k = 1;
    while k < n {
        k += 1;
        if k % 2 == 0 {
            even *= 2.0 * std::f64::consts::PI / k as f64;
        } else {
            odd *= 2.0 * std::f64::consts::PI / k as f64;
        }
    }
    if n.is_multiple_of(2) {
        even
    } else {
        odd
    }
}

/// Area of the unit sphere `S^{n-1}`.
pub fn sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// `vol(B_R(p))` for `0 < R <= T_max`.
pub fn ball_volume(m: &RotSymManifold, r: impl Into<Magnitude>) -> Result<Magnitude> {
    let r = r.into();
    if r.is_zero() || r > m.t_max() {
        return domain(format!("ball radius {r} outside (0, {}]", m.t_max()));
    }
    let power = (m.dim() - 1) as u32;
    let mut total = Magnitude::ZERO;
    for p in m.warp().pieces() {
        if p.start >= r {
            break;
        }
        total = total + p.integral_of_power(p.start, p.end.min(r), power);
    }
    Ok(total * sphere_area(m.dim()))
}

/// `n` radii with equally spaced logarithms between `lo` and `hi`.
pub fn log_spaced(lo: impl Into<Magnitude>, hi: impl Into<Magnitude>, n: usize) -> Vec<Magnitude> {
    let (lo, hi) = (lo.into(), hi.into());
    let (a, b) = (lo.ln(), hi.ln());
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| match i {
                0 => lo,
                i if i == n - 1 => hi,
                _ => Magnitude::from_ln(a + (b - a) * i as f64 / (n - 1) as f64),
            })
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthEntry {
    pub r: Magnitude,
    pub vol: Magnitude,
    pub order: f64,
}

/// Samples of the volume order function `ln vol(B_R) / ln R`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GrowthCurve {
    pub entries: Vec<GrowthEntry>,
}

fn check_grid(grid: &[Magnitude]) -> Result<()> {
    if grid.iter().any(|r| *r <= Magnitude::ONE) {
        return domain("growth grid radii must exceed 1");
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return domain("growth grid must be strictly increasing");
    }
    Ok(())
}

pub fn growth_curve(m: &RotSymManifold, grid: &[Magnitude]) -> Result<GrowthCurve> {
    check_grid(grid)?;
    let entries = grid
        .par_iter()
        .map(|&r| {
            let vol = ball_volume(m, r)?;
            Ok(GrowthEntry {
                r,
                vol,
                order: vol.ln() / r.ln(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GrowthCurve { entries })
}

impl GrowthCurve {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn orders(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.order).collect()
    }

    /// CSV with header `R,vol,order`; radii beyond `f64` range are written
    /// as decimal scientific notation with a wide exponent.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("R,vol,order\n");
        for e in &self.entries {
            writeln!(s, "{},{},{:.16e}", e.r, e.vol, e.order).expect("write to string");
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("R,vol,order") {
            return Err(Error::Parse("missing R,vol,order header".into()));
        }
        let entries = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let cols: Vec<&str> = l.split(',').collect();
                if cols.len() != 3 {
                    return Err(Error::Parse(format!("bad row {l:?}")));
                }
                let parse = |s: &str| {
                    s.trim()
                        .parse::<Magnitude>()
                        .map_err(|e| Error::Parse(e.to_string()))
                };
                Ok(GrowthEntry {
                    r: parse(cols[0])?,
                    vol: parse(cols[1])?,
                    order: cols[2]
                        .trim()
                        .parse()
                        .map_err(|e| Error::Parse(format!("{e}")))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GrowthCurve { entries })
    }
}

/// `(min, max)` of the order over the last `ceil(tail_fraction * len)` entries:
/// finite surrogates for the lower and upper volume growth orders.
pub fn estimate_iv_sv(curve: &GrowthCurve, tail_fraction: f64) -> Result<(f64, f64)> {
    if curve.is_empty() {
        return Err(Error::EmptyCurve);
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return domain(format!("tail fraction {tail_fraction} outside (0, 1]"));
    }
    let take = ((tail_fraction * curve.len() as f64).ceil() as usize).clamp(1, curve.len());
    let tail = &curve.entries[curve.len() - take..];
    let iv = tail.iter().map(|e| e.order).fold(f64::INFINITY, f64::min);
    let sv = tail
        .iter()
        .map(|e| e.order)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((iv, sv))
}

fn volumes(m: &RotSymManifold, grid: &[Magnitude]) -> Result<Vec<Magnitude>> {
    grid.par_iter().map(|&r| ball_volume(m, r)).collect()
}

/// Largest `vol(B_R) / (omega_n R^n)` over the grid; at most 1 under
/// nonnegative curvature.
pub fn check_bishop(m: &RotSymManifold, grid: &[Magnitude]) -> Result<f64> {
    let n = m.dim() as f64;
    let w = unit_ball_volume(m.dim());
    let vols = volumes(m, grid)?;
    Ok(grid
        .iter()
        .zip(vols)
        .map(|(r, v)| (v / (r.powf(n) * w)).to_f64())
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Smallest `vol(B_R) / R` over grid radii `R >= 1`.
pub fn check_yau_linear(m: &RotSymManifold, grid: &[Magnitude]) -> Result<f64> {
    let rs: Vec<Magnitude> = grid
        .iter()
        .copied()
        .filter(|r| *r >= Magnitude::ONE)
        .collect();
    if rs.is_empty() {
        return domain("no grid radius >= 1");
    }
    let vols = volumes(m, &rs)?;
    Ok(rs
        .iter()
        .zip(vols)
        .map(|(r, v)| (v / *r).to_f64())
        .fold(f64::INFINITY, f64::min))
}

/// Whether `vol(B_R) / R^n` is nonincreasing along an increasing radius list,
/// up to [`COMPARISON_SLACK`].
pub fn bishop_gromov_holds(n: usize, samples: &[(Magnitude, Magnitude)]) -> bool {
    let ln_ratio: Vec<f64> = samples
        .iter()
        .map(|(r, v)| v.ln() - n as f64 * r.ln())
        .collect();
    ln_ratio.windows(2).all(|w| w[1] <= w[0] + COMPARISON_SLACK)
}

pub fn check_bishop_gromov(m: &RotSymManifold, grid: &[Magnitude]) -> Result<bool> {
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return domain("grid must be strictly increasing");
    }
    let vols = volumes(m, grid)?;
    let samples: Vec<_> = grid.iter().copied().zip(vols).collect();
    Ok(bishop_gromov_holds(m.dim(), &samples))
}

/// Reference radii on which the stable-growth sandwich is verified.
pub fn stable_growth_reference_grid(r: f64, big_r: f64) -> Vec<Magnitude> {
    let top = (r * big_r).max(1.0);
    if top <= 1.0 {
        return vec![Magnitude::ONE];
    }
    log_spaced(1.0, top, 65)
}

/// `vol(B_{R r}) / vol(B_r)` after verifying `C1 <= vol(B_s) / s^k <= C2` on
/// [`stable_growth_reference_grid`]. A stable growth of order `k` bounds the
/// result by `(C2 / C1) R^k`.
pub fn stable_growth_check(
    m: &RotSymManifold,
    k: f64,
    c1: f64,
    c2: f64,
    big_r: f64,
    r: f64,
) -> Result<f64> {
    if !(big_r >= 1.0) || !(r > 0.0) || !(c1 > 0.0 && c1 <= c2) {
        return domain("stable growth check needs R >= 1, r > 0, 0 < C1 <= C2");
    }
    for s in stable_growth_reference_grid(r, big_r) {
        let q = (ball_volume(m, s)? / s.powf(k)).to_f64();
        if q < c1 * (1.0 - COMPARISON_SLACK) || q > c2 * (1.0 + COMPARISON_SLACK) {
            return Err(Error::PreconditionViolation(format!(
                "vol(B_s)/s^k = {q} at s = {s} outside [{c1}, {c2}]"
            )));
        }
    }
    let top = ball_volume(m, Magnitude::new(big_r) * Magnitude::new(r))?;
    Ok((top / ball_volume(m, r)?).to_f64())
}

/// Honest `(C1, C2)` for order `k`: the extremes of `vol(B_s) / s^k` on the
/// reference grid.
pub fn measured_growth_constants(
    m: &RotSymManifold,
    k: f64,
    r: f64,
    big_r: f64,
) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in stable_growth_reference_grid(r, big_r) {
        let q = (ball_volume(m, s)? / s.powf(k)).to_f64();
        lo = lo.min(q);
        hi = hi.max(q);
    }
    Ok((lo, hi))
}
