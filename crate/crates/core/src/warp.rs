//! Piecewise concave warping functions `f` for metrics `dt^2 + f(t)^2 ds^2`.
//!
//! A [`WarpFunction`] is a list of [`WarpPiece`]s, each either a power
//! `t^gamma` or a line `slope * t + intercept`, tiling `[0, T_max]`. The
//! oscillating construction alternates slow windows `t^{1/(l+1)}` and fast
//! windows `t^{1 - 1/(l+1)}` joined by chords; see [`build_oscillating_warp`].
//!
//! Radii are [`Magnitude`]s because the breakpoint schedule squares at every
//! step and leaves `f64` range after a couple of stages.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::magnitude::Magnitude;

/// Tolerance on normalized (log-ratio) comparisons in the join criterion.
pub const JOIN_TOL: f64 = 1e-12;
/// Relative lattice resolution of [`find_join_point`].
pub const JOIN_REL_TOL: f64 = 1e-9;
/// Allowed relative mismatch of values at a shared breakpoint.
pub const CONTINUITY_TOL: f64 = 1e-9;

const MAX_DOUBLINGS: usize = 128;
const MAX_LOG_RATIO: f64 = 1e7;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PieceKind {
    Power {
        gamma: f64,
    },
    Linear {
        slope: Magnitude,
        intercept: Magnitude,
    },
}

/// One analytic piece of a warp on the closed interval `[start, end]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WarpPiece {
    pub kind: PieceKind,
    pub start: Magnitude,
    pub end: Magnitude,
}

impl WarpPiece {
    pub fn power(gamma: f64, start: Magnitude, end: Magnitude) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::InvalidWarp(format!(
                "power exponent {gamma} outside (0, 1]"
            )));
        }
        Self::checked(PieceKind::Power { gamma }, start, end)
    }

    pub fn linear(
        slope: Magnitude,
        intercept: Magnitude,
        start: Magnitude,
        end: Magnitude,
    ) -> Result<Self> {
        Self::checked(PieceKind::Linear { slope, intercept }, start, end)
    }

    /// The line through `(b, yb)` and `(c, yc)`, restricted to `[b, c]`.
    pub fn chord(b: Magnitude, yb: Magnitude, c: Magnitude, yc: Magnitude) -> Result<Self> {
        let rise = yc
            .checked_sub(yb)
            .ok_or_else(|| Error::InvalidWarp("chord would decrease".into()))?;
        let run = c
            .checked_sub(b)
            .filter(|r| !r.is_zero())
            .ok_or_else(|| Error::InvalidWarp("chord has empty domain".into()))?;
        let slope = rise / run;
        let intercept = yb.checked_sub(slope * b).ok_or_else(|| {
            Error::InvalidWarp("chord has negative intercept (not concave)".into())
        })?;
        Self::linear(slope, intercept, b, c)
    }

    fn checked(kind: PieceKind, start: Magnitude, end: Magnitude) -> Result<Self> {
        if !(start < end) {
            return Err(Error::InvalidWarp(format!(
                "empty piece domain [{start}, {end}]"
            )));
        }
        Ok(WarpPiece { kind, start, end })
    }

    pub fn contains(&self, t: Magnitude) -> bool {
        self.start <= t && t <= self.end
    }

    pub fn value(&self, t: Magnitude) -> Magnitude {
        match self.kind {
            PieceKind::Power { gamma } => t.powf(gamma),
            PieceKind::Linear { slope, intercept } => slope * t + intercept,
        }
    }

    pub fn value_f64(&self, t: f64) -> f64 {
        match self.kind {
            PieceKind::Power { gamma } => t.powf(gamma),
            PieceKind::Linear { slope, intercept } => slope.to_f64() * t + intercept.to_f64(),
        }
    }

    /// `f'(t)` inside the piece.
    pub fn derivative(&self, t: Magnitude) -> Magnitude {
        match self.kind {
            PieceKind::Power { gamma } => t.powf(gamma - 1.0) * gamma,
            PieceKind::Linear { slope, .. } => slope,
        }
    }

    pub fn derivative_f64(&self, t: f64) -> f64 {
        match self.kind {
            PieceKind::Power { gamma } => gamma * t.powf(gamma - 1.0),
            PieceKind::Linear { slope, .. } => slope.to_f64(),
        }
    }

    /// `-f''(t) / f(t)` inside the piece.
    pub fn neg_second_over_value(&self, t: Magnitude) -> Magnitude {
        match self.kind {
            PieceKind::Power { gamma } => Magnitude::new(gamma * (1.0 - gamma)) / (t * t),
            PieceKind::Linear { .. } => Magnitude::ZERO,
        }
    }

    /// `f(t0 + dt) - f(t0)` without cancellation when `dt` is small.
    pub fn increment_f64(&self, t0: f64, dt: f64) -> f64 {
        match self.kind {
            PieceKind::Power { gamma } => {
                if t0 == 0.0 {
                    dt.powf(gamma)
                } else {
                    t0.powf(gamma) * (gamma * (dt / t0).ln_1p()).exp_m1()
                }
            }
            PieceKind::Linear { slope, .. } => slope.to_f64() * dt,
        }
    }

    /// Solves `f(t) = y` on this piece (no range check).
    pub fn inverse_f64(&self, y: f64) -> f64 {
        match self.kind {
            PieceKind::Power { gamma } => y.powf(1.0 / gamma),
            PieceKind::Linear { slope, intercept } => (y - intercept.to_f64()) / slope.to_f64(),
        }
    }

    /// `int_a^b f(t)^m dt` in closed form, for `start <= a <= b <= end`.
    pub fn integral_of_power(&self, a: Magnitude, b: Magnitude, m: u32) -> Magnitude {
        if !(a < b) {
            return Magnitude::ZERO;
        }
        let mf = m as f64;
        match self.kind {
            PieceKind::Power { gamma } => {
                // (b^p - a^p) / p
                let p = gamma * mf + 1.0;
                let (la, lb) = (a.ln(), b.ln());
                Magnitude::from_ln(p * lb + (-(p * (la - lb)).exp_m1()).ln() - p.ln())
            }
            PieceKind::Linear { slope, .. } => {
                let y0 = self.value(a);
                let y1 = self.value(b);
                let width = b.checked_sub(a).unwrap_or(Magnitude::ZERO);
                if slope.is_zero() {
                    return y0.powf(mf) * width;
                }
                let n = mf + 1.0;
                if y0.is_zero() {
                    return y1.powf(n) / (slope * Magnitude::new(n));
                }
                // y0^n * expm1(n L) / (n s) with L = ln(y1 / y0) = ln1p(s w / y0)
                let x = slope * width / y0;
                let l = if x.ln() > 30.0 {
                    x.ln() + (1.0 / x.to_f64()).ln_1p()
                } else {
                    x.to_f64().ln_1p()
                };
                if l == 0.0 {
                    return y0.powf(mf) * width;
                }
                let z = n * l;
                let ln_expm1 = z + (-(-z).exp_m1()).ln();
                Magnitude::from_ln(n * y0.ln() + ln_expm1 - n.ln() - slope.ln())
            }
        }
    }
}

/// Concave, nondecreasing warping function tiling `[0, T_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WarpFunction {
    pieces: Vec<WarpPiece>,
    schedule: Vec<Magnitude>,
    n_stages: usize,
}

/// Invariant residuals of a warp. Produced by [`WarpFunction::report`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WarpReport {
    /// Largest `|f_left(b) - f_right(b)| / f(b)` over interior breakpoints.
    pub max_continuity_residual: f64,
    /// Smallest `ln(left slope) - ln(right slope)`; negative means a convex kink.
    pub min_log_slope_drop: f64,
    pub starts_at_origin: bool,
    pub tiles_domain: bool,
    pub schedule_ok: bool,
    pub violations: Vec<String>,
}

impl WarpReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `(R + 1)^2 + 1`, the strict lower bound for the next breakpoint.
pub fn schedule_bound(prev: Magnitude) -> Magnitude {
    let s = prev + Magnitude::ONE;
    s * s + Magnitude::ONE
}

/// `(R + 1)^2 + 2`, nudged upward if rounding would tie it with the bound.
fn schedule_floor(prev: Magnitude) -> Magnitude {
    let s = prev + Magnitude::ONE;
    let floor = s * s + Magnitude::new(2.0);
    let bound = schedule_bound(prev);
    if floor > bound {
        floor
    } else {
        bound.next_up()
    }
}

/// True iff `R_{j+1} > (R_j + 1)^2 + 1` for every consecutive pair.
pub fn schedule_holds(schedule: &[Magnitude]) -> bool {
    schedule.windows(2).all(|w| w[1] > schedule_bound(w[0]))
}

impl WarpFunction {
    /// Builds a warp from explicit pieces and validates every invariant.
    pub fn from_parts(
        pieces: Vec<WarpPiece>,
        schedule: Vec<Magnitude>,
        n_stages: usize,
    ) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidWarp("no pieces".into()));
        }
        let warp = WarpFunction {
            pieces,
            schedule,
            n_stages,
        };
        let report = warp.report();
        if !report.is_valid() {
            return Err(Error::InvalidWarp(report.violations.join("; ")));
        }
        Ok(warp)
    }

    /// `f(t) = t` on `[0, t_max]`.
    pub fn euclidean(t_max: impl Into<Magnitude>) -> Result<Self> {
        let piece = WarpPiece::linear(
            Magnitude::ONE,
            Magnitude::ZERO,
            Magnitude::ZERO,
            t_max.into(),
        )?;
        Self::from_parts(vec![piece], Vec::new(), 0)
    }

    /// `f(t) = t^gamma` on `[0, t_max]`. The pole is singular for `gamma < 1`.
    pub fn power(gamma: f64, t_max: impl Into<Magnitude>) -> Result<Self> {
        let piece = WarpPiece::power(gamma, Magnitude::ZERO, t_max.into())?;
        Self::from_parts(vec![piece], Vec::new(), 0)
    }

    /// `f(t) = t` on `[0, 1]` and `t^gamma` on `[1, t_max]`: a smooth-pole
    /// version of [`WarpFunction::power`].
    pub fn capped_power(gamma: f64, t_max: impl Into<Magnitude>) -> Result<Self> {
        let one = Magnitude::ONE;
        let t_max = t_max.into();
        let pieces = vec![
            WarpPiece::linear(one, Magnitude::ZERO, Magnitude::ZERO, one)?,
            WarpPiece::power(gamma, one, t_max)?,
        ];
        Self::from_parts(pieces, Vec::new(), 0)
    }

    pub fn pieces(&self) -> &[WarpPiece] {
        &self.pieces
    }

    pub fn schedule(&self) -> &[Magnitude] {
        &self.schedule
    }

    pub fn n_stages(&self) -> usize {
        self.n_stages
    }

    pub fn t_max(&self) -> Magnitude {
        self.pieces.last().expect("warp has pieces").end
    }

    /// Interior junctions between consecutive pieces.
    pub fn breakpoints(&self) -> impl Iterator<Item = Magnitude> + '_ {
        self.pieces.windows(2).map(|w| w[0].end)
    }

    /// Index of the first piece whose domain contains `t`.
    pub fn piece_index(&self, t: Magnitude) -> Option<usize> {
        if t > self.t_max() {
            return None;
        }
        let i = self.pieces.partition_point(|p| p.end < t);
        (i < self.pieces.len()).then_some(i)
    }

    pub fn piece_index_f64(&self, t: f64) -> Option<usize> {
        if !(t >= 0.0) {
            return None;
        }
        self.piece_index(Magnitude::new(t))
    }

    fn check_domain(&self, t: Magnitude) -> Result<usize> {
        self.piece_index(t)
            .ok_or_else(|| Error::Domain(format!("t = {t} outside [0, {}]", self.t_max())))
    }

    pub fn eval(&self, t: impl Into<Magnitude>) -> Result<Magnitude> {
        let t = t.into();
        let i = self.check_domain(t)?;
        Ok(self.pieces[i].value(t))
    }

    /// `f64` evaluation for the geodesic solver. `t` must be in range.
    pub fn eval_f64(&self, t: f64) -> f64 {
        let i = self.piece_index_f64(t).unwrap_or(self.pieces.len() - 1);
        self.pieces[i].value_f64(t)
    }

    /// One-sided derivatives `(f'(t-), f'(t+))`.
    pub fn eval_slopes(&self, t: impl Into<Magnitude>) -> Result<(Magnitude, Magnitude)> {
        let t = t.into();
        let i = self.check_domain(t)?;
        let here = self.pieces[i].derivative(t);
        if self.pieces[i].end == t && i + 1 < self.pieces.len() {
            return Ok((here, self.pieces[i + 1].derivative(t)));
        }
        if t.is_zero() {
            return Ok((here, here));
        }
        Ok((here, here))
    }

    /// Bounds `(-f''/f, (1 - f'^2)/f^2)` on the sectional curvatures at `t`.
    pub fn curvature_range(&self, t: impl Into<Magnitude>) -> Result<(f64, f64)> {
        let t = t.into();
        if t.is_zero() {
            return domain("curvature_range requires t > 0");
        }
        let i = self.check_domain(t)?;
        if self.breakpoints().any(|b| b.rel_diff(t) < 1e-12) {
            return Err(Error::Breakpoint(t.to_f64()));
        }
        let piece = &self.pieces[i];
        let f = piece.value(t);
        let fp = piece.derivative(t);
        let low = piece.neg_second_over_value(t).to_f64();
        let fp2 = (fp * fp).to_f64();
        let num = 1.0 - fp2;
        let high = if num == 0.0 {
            0.0
        } else {
            num.signum() * (Magnitude::new(num.abs()) / (f * f)).to_f64()
        };
        Ok((low, high))
    }

    /// Inverse of `f` on `[0, f(T_max)]`, in `f64`.
    pub fn inverse_f64(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let i = self
            .pieces
            .partition_point(|p| p.value(p.end).to_f64() < y)
            .min(self.pieces.len() - 1);
        let p = &self.pieces[i];
        p.inverse_f64(y).clamp(p.start.to_f64(), p.end.to_f64())
    }

    /// Checks every structural invariant and reports residuals.
    pub fn report(&self) -> WarpReport {
        let mut violations = Vec::new();
        let starts_at_origin =
            self.pieces[0].start.is_zero() && self.pieces[0].value(Magnitude::ZERO).is_zero();
        if !starts_at_origin {
            violations.push("f(0) != 0 or domain does not start at 0".to_string());
        }
        let mut tiles_domain = true;
        let mut max_res: f64 = 0.0;
        let mut min_drop = f64::INFINITY;
        for (k, w) in self.pieces.windows(2).enumerate() {
            let (l, r) = (&w[0], &w[1]);
            if l.end != r.start {
                tiles_domain = false;
                violations.push(format!("gap between pieces {k} and {}", k + 1));
                continue;
            }
            let b = l.end;
            let (fl, fr) = (l.value(b), r.value(b));
            let res = fl.rel_diff(fr);
            max_res = max_res.max(res);
            if res >= CONTINUITY_TOL {
                violations.push(format!("discontinuity {res:.3e} at breakpoint {b}"));
            }
            let drop = l.derivative(b).ln() - r.derivative(b).ln();
            min_drop = min_drop.min(drop);
            if drop < -JOIN_TOL {
                violations.push(format!("convex kink at {b} (log slope drop {drop:.3e})"));
            }
        }
        for p in &self.pieces {
            if !(p.start < p.end) {
                tiles_domain = false;
                violations.push(format!("empty piece [{}, {}]", p.start, p.end));
            }
            match p.kind {
                PieceKind::Power { gamma } if !(gamma > 0.0 && gamma <= 1.0) => {
                    violations.push(format!("power exponent {gamma} outside (0, 1]"));
                }
                PieceKind::Linear { slope, intercept }
                    if slope.is_zero() && intercept.is_zero() =>
                {
                    violations.push("identically zero piece".into());
                }
                _ => {}
            }
        }
        let schedule_ok = schedule_holds(&self.schedule);
        if !schedule_ok {
            violations.push("schedule violates R_{j+1} > (R_j + 1)^2 + 1".into());
        }
        WarpReport {
            max_continuity_residual: max_res,
            min_log_slope_drop: min_drop,
            starts_at_origin,
            tiles_domain,
            schedule_ok,
            violations,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&WarpDto::from(self)).expect("warp serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let dto: WarpDto = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        dto.try_into()
    }
}

fn join_exponents_ok(alpha: f64, beta: f64) -> Result<()> {
    for (name, e) in [("alpha", alpha), ("beta", beta)] {
        if !(e > 0.0 && e <= 1.0) {
            return domain(format!("{name} = {e} outside (0, 1]"));
        }
    }
    Ok(())
}

/// Join criterion with `c = b * e^u`, all in logarithms.
///
/// Both log-ratios are rearranged so that `ln b` only enters through
/// `(alpha - beta) ln b`, keeping them accurate for `u` near the lattice step.
fn join_holds_ln(alpha: f64, beta: f64, ln_b: f64, u: f64) -> bool {
    // ln(b^alpha) - ln(c^beta)
    let d = (alpha - beta) * ln_b - beta * u;
    if d >= 0.0 {
        // chord is flat or falling, below the positive lower bound
        return false;
    }
    let ln_rise_factor = (-d.exp_m1()).ln();
    let ln_run_factor = (-(-u).exp_m1()).ln();
    let lower_gap = beta.ln() - ln_rise_factor + ln_run_factor;
    let upper_gap =
        (beta - alpha) * ln_b + (beta - 1.0) * u + ln_rise_factor - ln_run_factor - alpha.ln();
    lower_gap <= JOIN_TOL && upper_gap <= JOIN_TOL
}

/// Whether the chord joining `t^alpha` at `b` to `t^beta` at `c` keeps the
/// glued function concave: `beta c^{beta-1} <= (c^beta - b^alpha)/(c - b) <= alpha b^{alpha-1}`.
///
/// Comparisons are made on log-ratios with tolerance [`JOIN_TOL`].
pub fn check_concave_join(
    alpha: f64,
    beta: f64,
    b: impl Into<Magnitude>,
    c: impl Into<Magnitude>,
) -> Result<bool> {
    join_exponents_ok(alpha, beta)?;
    let (b, c) = (b.into(), c.into());
    if b.is_zero() || !(b < c) {
        return domain(format!("join requires 0 < b < c, got b = {b}, c = {c}"));
    }
    let u = match (b.as_linear(), c.as_linear()) {
        (Some(bl), Some(cl)) => ((cl - bl) / bl).ln_1p(),
        _ => c.ln() - b.ln(),
    };
    Ok(join_holds_ln(alpha, beta, b.ln(), u))
}

/// Least `c` (to relative tolerance [`JOIN_REL_TOL`]) from which the join
/// criterion holds, found by doubling `ln(c/b)` and then bisecting.
pub fn find_join_point(alpha: f64, beta: f64, b: impl Into<Magnitude>) -> Result<Magnitude> {
    join_exponents_ok(alpha, beta)?;
    let b = b.into();
    if b.is_zero() {
        return domain("find_join_point requires b > 0");
    }
    let ln_b = b.ln();
    let holds = |u: f64| join_holds_ln(alpha, beta, ln_b, u);
    let u0 = JOIN_REL_TOL.ln_1p();

    let first_true_from = |mut u: f64| -> Result<(f64, f64)> {
        let mut below = 0.0;
        for _ in 0..MAX_DOUBLINGS {
            if u > MAX_LOG_RATIO {
                break;
            }
            if holds(u) {
                return Ok((below, u));
            }
            below = u;
            u *= 2.0;
        }
        Err(Error::IterationLimit(format!(
            "no join point for alpha={alpha}, beta={beta}, b={b} below c = b * e^{MAX_LOG_RATIO}"
        )))
    };

    let (mut lo, mut hi) = first_true_from(u0)?;
    loop {
        while hi - lo > JOIN_REL_TOL {
            let mid = 0.5 * (lo + hi);
            if holds(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        // Everything above `hi` on the doubling lattice must qualify too.
        let mut failure = None;
        let mut w = hi;
        for _ in 0..48 {
            w *= 2.0;
            if w > MAX_LOG_RATIO {
                break;
            }
            if !holds(w) {
                failure = Some(w);
            }
        }
        match failure {
            None => break,
            Some(w) => {
                let (_, next) = first_true_from(w)?;
                lo = w;
                hi = next;
            }
        }
    }
    Ok(Magnitude::from_ln(ln_b + hi))
}

fn window_exponent(j: usize) -> f64 {
    debug_assert!(j % 2 == 1);
    if j % 4 == 1 {
        let l = j.div_ceil(4);
        1.0 / (l as f64 + 1.0)
    } else {
        let l = (j + 1) / 4;
        1.0 - 1.0 / (l as f64 + 1.0)
    }
}

/// Oscillating warp with `n_stages` slow/fast window pairs.
///
/// `f(t) = t` on `[0, 1]`; for stage `l`, `f = t^{1/(l+1)}` on
/// `[R_{4l-3}+1, R_{4l-2}-1]` and `f = t^{1-1/(l+1)}` on `[R_{4l-1}+1, R_{4l}-1]`,
/// with chords in between. Each breakpoint is the larger of `(R_{j-1}+1)^2 + 2`
/// and the join threshold for the chord ending at `R_j + 1`.
///
/// `max_log_radius` caps `ln R_j`; exceeding it is [`Error::CapExceeded`].
pub fn build_oscillating_warp(n_stages: usize, max_log_radius: f64) -> Result<WarpFunction> {
    if n_stages == 0 {
        return domain("n_stages must be at least 1");
    }
    let one = Magnitude::ONE;
    let mut schedule = vec![one];
    let mut pieces = vec![WarpPiece::linear(
        one,
        Magnitude::ZERO,
        Magnitude::ZERO,
        one,
    )?];
    let mut prev_exp = 1.0;
    let mut prev_end = one;
    for j in 1..=4 * n_stages {
        let floor = schedule_floor(schedule[j - 1]);
        let r_j = if j % 2 == 1 {
            let exp = window_exponent(j);
            let join = find_join_point(prev_exp, exp, prev_end)?;
            let r = floor.max(join.checked_sub(one).unwrap_or(Magnitude::ZERO));
            let start = r + one;
            if !check_concave_join(prev_exp, exp, prev_end, start)? {
                return Err(Error::InvalidWarp(format!(
                    "join into window {j} is not concave"
                )));
            }
            pieces.push(WarpPiece::chord(
                prev_end,
                prev_end.powf(prev_exp),
                start,
                start.powf(exp),
            )?);
            r
        } else {
            let exp = window_exponent(j - 1);
            let start = schedule[j - 1] + one;
            let end = floor.checked_sub(one).expect("floor exceeds one");
            pieces.push(WarpPiece::power(exp, start, end)?);
            prev_exp = exp;
            prev_end = end;
            floor
        };
        if r_j.ln() > max_log_radius {
            return Err(Error::CapExceeded(format!(
                "ln R_{j} = {:.6e} exceeds cap {max_log_radius:.6e} before stage {} completed",
                r_j.ln(),
                j.div_ceil(4)
            )));
        }
        schedule.push(r_j);
    }
    WarpFunction::from_parts(pieces, schedule, n_stages)
}

/// Power exponent of the slow window of stage `l`.
pub fn slow_exponent(l: usize) -> f64 {
    1.0 / (l as f64 + 1.0)
}

/// Power exponent of the fast window of stage `l`.
pub fn fast_exponent(l: usize) -> f64 {
    1.0 - 1.0 / (l as f64 + 1.0)
}

/// Slow window `[R_{4l-3}+1, R_{4l-2}-1]` of stage `l` (1-based).
pub fn slow_window(warp: &WarpFunction, l: usize) -> Option<(Magnitude, Magnitude)> {
    window(warp, 4 * l - 3)
}

/// Fast window `[R_{4l-1}+1, R_{4l}-1]` of stage `l` (1-based).
pub fn fast_window(warp: &WarpFunction, l: usize) -> Option<(Magnitude, Magnitude)> {
    window(warp, 4 * l - 1)
}

fn window(warp: &WarpFunction, j: usize) -> Option<(Magnitude, Magnitude)> {
    if j == 0 {
        return None;
    }
    let s = warp.schedule();
    let lo = *s.get(j)? + Magnitude::ONE;
    let hi = s.get(j + 1)?.checked_sub(Magnitude::ONE)?;
    Some((lo, hi))
}

#[derive(Serialize, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum PieceTag {
    Power,
    Linear,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ParamsDto {
    Power {
        gamma: f64,
    },
    Linear {
        slope: Magnitude,
        intercept: Magnitude,
    },
}

#[derive(Serialize, Deserialize)]
struct PieceDto {
    kind: PieceTag,
    params: ParamsDto,
    domain: [Magnitude; 2],
}

#[derive(Serialize, Deserialize)]
struct WarpDto {
    n_stages: usize,
    schedule: Vec<Magnitude>,
    pieces: Vec<PieceDto>,
}

impl From<&WarpFunction> for WarpDto {
    fn from(w: &WarpFunction) -> Self {
        WarpDto {
            n_stages: w.n_stages,
            schedule: w.schedule.clone(),
            pieces: w
                .pieces
                .iter()
                .map(|p| {
                    let (kind, params) = match p.kind {
                        PieceKind::Power { gamma } => (PieceTag::Power, ParamsDto::Power { gamma }),
                        PieceKind::Linear { slope, intercept } => {
                            (PieceTag::Linear, ParamsDto::Linear { slope, intercept })
                        }
                    };
                    PieceDto {
                        kind,
                        params,
                        domain: [p.start, p.end],
                    }
                })
                .collect(),
        }
    }
}

impl TryFrom<WarpDto> for WarpFunction {
    type Error = Error;

    fn try_from(dto: WarpDto) -> Result<Self> {
        let pieces = dto
            .pieces
            .into_iter()
            .map(|p| {
                let [a, b] = p.domain;
                match (p.kind, p.params) {
                    (PieceTag::Power, ParamsDto::Power { gamma }) => WarpPiece::power(gamma, a, b),
                    (PieceTag::Linear, ParamsDto::Linear { slope, intercept }) => {
                        WarpPiece::linear(slope, intercept, a, b)
                    }
                    _ => Err(Error::Parse("piece kind does not match its params".into())),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        WarpFunction::from_parts(pieces, dto.schedule, dto.n_stages)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn explicit_join_at_sixteen_is_concave() {
        // 1/8 <= 2/14 <= 1
        assert!(check_concave_join(1.0, 0.5, 2.0, 16.0).unwrap());
    }

    #[test]
    fn same_exponent_joins_always_hold() {
        for gamma in [0.1, 0.25, 0.5, 0.9, 1.0] {
            for (b, c) in [(0.5, 0.7), (2.0, 3.0), (10.0, 1e6), (1e100, 1e101)] {
                assert!(
                    check_concave_join(gamma, gamma, b, c).unwrap(),
                    "{gamma} {b} {c}"
                );
            }
        }
    }

    #[test]
    fn falling_chord_is_rejected() {
        // 101^{1/3} - 100^{1/2} < 0
        assert!(!check_concave_join(0.5, 1.0 / 3.0, 100.0, 101.0).unwrap());
    }

    #[test]
    fn join_domain_errors() {
        assert!(matches!(
            check_concave_join(1.0, 0.5, 3.0, 3.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            check_concave_join(1.0, 0.5, 4.0, 3.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            check_concave_join(1.5, 0.5, 1.0, 3.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            check_concave_join(1.0, 0.0, 1.0, 3.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            find_join_point(1.0, 0.5, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn join_point_for_the_first_chord() {
        let c = find_join_point(1.0, 0.5, 2.0).unwrap().to_f64();
        // closed form of the binding lower bound: sqrt(c) = 2 + sqrt(2)
        let exact = (2.0 + 2f64.sqrt()).powi(2);
        assert!(c <= 16.0);
        assert!(close(c, exact, 2e-9), "{c} vs {exact}");
    }

    #[test]
    fn join_point_for_equal_exponents_is_one_lattice_step() {
        let c = find_join_point(0.5, 0.5, 10.0).unwrap().to_f64();
        assert!(c > 10.0 && c - 10.0 <= 10.0 * 1.01e-9, "{c}");
    }

    #[test]
    fn euclidean_warp_is_identity() {
        let w = WarpFunction::euclidean(100.0).unwrap();
        for t in [0.0, 0.5, 3.0, 99.0, 100.0] {
            assert_eq!(w.eval(t).unwrap().to_f64(), t);
        }
        assert!(matches!(w.eval(100.5), Err(Error::Domain(_))));
        assert_eq!(w.curvature_range(3.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn curvature_of_square_root() {
        let w = WarpFunction::power(0.5, 100.0).unwrap();
        let (lo, hi) = w.curvature_range(4.0).unwrap();
        assert!(
            close(lo, 1.0 / 64.0, 1e-14) && close(hi, 15.0 / 64.0, 1e-14),
            "{lo} {hi}"
        );
    }

    #[test]
    fn curvature_of_shallow_line() {
        let s = 0.25;
        let p = WarpPiece::linear(
            Magnitude::new(s),
            Magnitude::new(2.0),
            Magnitude::ZERO,
            Magnitude::new(10.0),
        )
        .unwrap();
        // Not a valid warp on its own (f(0) != 0) but the formula is local.
        let f = 2.0 + s * 3.0;
        assert_eq!(p.neg_second_over_value(Magnitude::new(3.0)).to_f64(), 0.0);
        let w = WarpFunction::capped_power(0.5, 50.0).unwrap();
        let (_, hi) = w.curvature_range(9.0).unwrap();
        assert!(close(hi, (1.0 - 1.0 / 36.0) / 9.0, 1e-14));
        assert!((1.0 - s * s) / (f * f) > 0.0);
    }

    #[test]
    fn curvature_rejects_junctions() {
        let w = WarpFunction::capped_power(0.5, 50.0).unwrap();
        assert!(matches!(w.curvature_range(1.0), Err(Error::Breakpoint(_))));
        assert!(matches!(w.curvature_range(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn slopes_at_a_junction() {
        let w = WarpFunction::capped_power(0.5, 50.0).unwrap();
        let (l, r) = w.eval_slopes(1.0).unwrap();
        assert_eq!(l.to_f64(), 1.0);
        assert_eq!(r.to_f64(), 0.5);
    }

    #[test]
    fn zero_stages_is_rejected() {
        assert!(matches!(
            build_oscillating_warp(0, 1e9),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn one_stage_under_a_billion() {
        let w = build_oscillating_warp(1, 1e9f64.ln()).unwrap();
        assert_eq!(w.schedule().len(), 5);
        assert_eq!(w.eval(0.5).unwrap().to_f64(), 0.5);
        let s = w.schedule();
        assert!(s[2] > schedule_bound(s[1]));
        let (a, b) = slow_window(&w, 1).unwrap();
        let mid = 0.5 * (a.to_f64() + b.to_f64());
        assert!(close(w.eval(mid).unwrap().to_f64(), mid.sqrt(), 1e-15));
        assert!(w.report().is_valid());
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            build_oscillating_warp(2, 20.0),
            Err(Error::CapExceeded(_))
        ));
    }

    #[test]
    fn linear_integral_matches_direct_formula() {
        let p = WarpPiece::linear(
            Magnitude::new(0.3),
            Magnitude::new(0.7),
            Magnitude::ZERO,
            Magnitude::new(10.0),
        )
        .unwrap();
        let (a, b) = (2.0, 7.0);
        for m in 1..4u32 {
            let n = m as f64 + 1.0;
            let exact = ((0.3 * b + 0.7f64).powf(n) - (0.3 * a + 0.7f64).powf(n)) / (n * 0.3);
            let got = p
                .integral_of_power(Magnitude::new(a), Magnitude::new(b), m)
                .to_f64();
            assert!(close(got, exact, 1e-13), "m={m}: {got} vs {exact}");
        }
    }

    #[test]
    fn json_rejects_mismatched_kind() {
        let s = r#"{"n_stages":0,"schedule":[],"pieces":[{"kind":"power","params":{"slope":1,"intercept":0},"domain":[0,1]}]}"#;
        assert!(matches!(WarpFunction::from_json(s), Err(Error::Parse(_))));
    }
}
