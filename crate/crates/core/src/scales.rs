//! Slope scales of nondecreasing traces and renormalized volume profiles.
//!
//! For a nondecreasing `F` with `F(s_i) <= k s_i` along some divergent `s_i`,
//! there are arbitrarily large `r` with `F(r + t) - F(r) <= (k + 1/l) t` for
//! all `t in [1, l]`. [`slope_scales`] finds every sampled `r` with that
//! property on a sampled trace, interpolating linearly between samples.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::geodesy::RotSymManifold;
use crate::magnitude::{Magnitude, ParseMagnitudeError};
use crate::volume::ball_volume;

pub const DEFAULT_T_STEP: f64 = 0.05;

/// Samples `(x_i, F_i)` with `1 <= x_0 < x_1 < ...` and `F` nondecreasing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotoneTrace {
    xs: Vec<f64>,
    fs: Vec<f64>,
}

impl MonotoneTrace {
    pub fn new(xs: Vec<f64>, fs: Vec<f64>) -> Result<Self> {
        if xs.len() != fs.len() || xs.len() < 2 {
            return domain("trace needs at least two (x, F) pairs of equal length");
        }
        if !(xs[0] >= 1.0) {
            return domain(format!("trace abscissae must be >= 1, got {}", xs[0]));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return domain("trace abscissae must be strictly increasing");
        }
        if fs.iter().any(|f| !f.is_finite()) || fs.windows(2).any(|w| w[1] < w[0]) {
            return domain("trace values must be finite and nondecreasing");
        }
        Ok(MonotoneTrace { xs, fs })
    }

    /// Samples `F` at the given abscissae.
    pub fn from_fn(xs: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let fs = xs.iter().map(|&x| f(x)).collect();
        Self::new(xs, fs)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.fs
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,F\n");
        for (x, f) in self.xs.iter().zip(&self.fs) {
            writeln!(s, "{x:.16e},{f:.16e}").unwrap();
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (xs, fs) = read_pairs(text, "x,F")?.into_iter().unzip();
        Self::new(xs, fs)
    }

    pub fn span(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().expect("nonempty"))
    }

    /// Piecewise linear interpolation on segment `i`, the largest index with
    /// `x_i <= x` (clamped to the first and last segments).
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let i = self
            .xs
            .partition_point(|&xi| xi <= x)
            .saturating_sub(1)
            .min(n - 2);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (f0, f1) = (self.fs[i], self.fs[i + 1]);
        f0 + (f1 - f0) * (x - x0) / (x1 - x0)
    }
}

/// `x -> ln vol(B_{e^x}(p))` sampled at `xs`.
pub fn log_volume_trace(m: &RotSymManifold, xs: &[f64]) -> Result<MonotoneTrace> {
    let fs = xs
        .par_iter()
        .map(|&x| Ok(ball_volume(m, Magnitude::from_ln(x))?.ln()))
        .collect::<Result<Vec<_>>>()?;
    MonotoneTrace::new(xs.to_vec(), fs)
}

/// `{1, 1 + step, ...}` below `l`, followed by `l` itself.
pub fn t_grid(l: f64, step: f64) -> Vec<f64> {
    let mut ts = Vec::new();
    let mut k = 0usize;
    loop {
        let t = 1.0 + k as f64 * step;
        if t >= l - 1e-12 {
            break;
        }
        ts.push(t);
        k += 1;
    }
    ts.push(l);
    ts
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeScales {
    pub k: f64,
    pub l: f64,
    pub step: f64,
    /// Candidates examined: sample abscissae `r` with `r + l` inside the trace.
    pub candidates: usize,
    pub scales: Vec<f64>,
}

impl SlopeScales {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# k={:.16e}", self.k).unwrap();
        writeln!(s, "# l={:.16e}", self.l).unwrap();
        writeln!(s, "# step={:.16e}", self.step).unwrap();
        writeln!(s, "# candidates={}", self.candidates).unwrap();
        s.push_str("r\n");
        for r in &self.scales {
            writeln!(s, "{r:.16e}").unwrap();
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut meta = std::collections::HashMap::new();
        let mut scales = Vec::new();
        let mut seen_header = false;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(kv) = line.strip_prefix('#') {
                if let Some((k, v)) = kv.trim().split_once('=') {
                    meta.insert(k.to_string(), v.to_string());
                }
            } else if !seen_header {
                if line != "r" {
                    return Err(Error::Parse(format!("expected header r, got {line:?}")));
                }
                seen_header = true;
            } else {
                scales.push(line.parse().map_err(|e| Error::Parse(format!("{e}")))?);
            }
        }
        let get = |k: &str| -> Result<f64> {
            meta.get(k)
                .ok_or_else(|| Error::Parse(format!("missing # {k}")))?
                .parse()
                .map_err(|e| Error::Parse(format!("{e}")))
        };
        Ok(SlopeScales {
            k: get("k")?,
            l: get("l")?,
            step: get("step")?,
            candidates: get("candidates")? as usize,
            scales,
        })
    }
}

/// Every sample abscissa `r` with `r + l` inside the trace such that
/// `F(r + t) - F(r) <= (k + 1/l) t` for each `t` in [`t_grid`]`(l, step)`.
pub fn slope_scales(trace: &MonotoneTrace, k: f64, l: f64, step: f64) -> Result<SlopeScales> {
    if !(l > 1.0) {
        return domain(format!("window l = {l} must exceed 1"));
    }
    if !(step > 0.0) {
        return domain("t-grid step must be positive");
    }
    let (lo, hi) = trace.span();
    let candidates: Vec<f64> = trace.xs.iter().copied().filter(|&r| r + l <= hi).collect();
    if candidates.is_empty() {
        return Err(Error::WindowExceedsTrace {
            window: l,
            span: hi - lo,
        });
    }
    let ts = t_grid(l, step);
    let bound = k + 1.0 / l;
    let scales = candidates
        .par_iter()
        .copied()
        .filter(|&r| {
            let f0 = trace.interpolate(r);
            ts.iter()
                .all(|&t| trace.interpolate(r + t) - f0 <= bound * t)
        })
        .collect();
    Ok(SlopeScales {
        k,
        l,
        step,
        candidates: candidates.len(),
        scales,
    })
}

/// `(R, vol(B_{R r}) / vol(B_r))` for each `R` in the grid.
pub fn renormalized_profile(
    m: &RotSymManifold,
    r: impl Into<Magnitude>,
    grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let r = r.into();
    if grid.iter().any(|&x| !(x >= 1.0)) {
        return domain("profile grid entries must be >= 1");
    }
    let base = ball_volume(m, r)?;
    grid.par_iter()
        .map(|&big_r| Ok((big_r, (ball_volume(m, r * big_r)? / base).to_f64())))
        .collect()
}

pub fn profile_to_csv(profile: &[(f64, f64)]) -> String {
    let mut s = String::from("R,ratio\n");
    for (r, q) in profile {
        writeln!(s, "{r:.16e},{q:.16e}").unwrap();
    }
    s
}

pub fn profile_from_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    read_pairs(text, "R,ratio")
}

/// Profiles at several centers `r`, one `r,R,ratio` row per sample.
pub fn profiles_to_csv(profiles: &[(Magnitude, Vec<(f64, f64)>)]) -> String {
    let mut s = String::from("r,R,ratio\n");
    for (r, profile) in profiles {
        for (big_r, q) in profile {
            writeln!(s, "{r},{big_r:.16e},{q:.16e}").unwrap();
        }
    }
    s
}

/// A center radius with its `(R, ratio)` pairs.
pub type ProfileRow = (Magnitude, Vec<(f64, f64)>);

pub fn profiles_from_csv(text: &str) -> Result<Vec<ProfileRow>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("r,R,ratio") {
        return Err(Error::Parse("missing r,R,ratio header".into()));
    }
    let mut out: Vec<ProfileRow> = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::Parse(format!("bad row {line:?}")));
        }
        let r: Magnitude = cols[0]
            .trim()
            .parse()
            .map_err(|e: ParseMagnitudeError| Error::Parse(e.to_string()))?;
        let row = (parse_f64(cols[1])?, parse_f64(cols[2])?);
        match out.last_mut() {
            Some((last, rows)) if *last == r => rows.push(row),
            _ => out.push((r, vec![row])),
        }
    }
    Ok(out)
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|e| Error::Parse(format!("{e}: {s:?}")))
}

/// Two-column numeric CSV with the given header.
pub(crate) fn read_pairs(text: &str, header: &str) -> Result<Vec<(f64, f64)>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(header) {
        return Err(Error::Parse(format!("missing {header} header")));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (a, b) = l
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad row {l:?}")))?;
            Ok((parse_f64(a)?, parse_f64(b)?))
        })
        .collect()
}
