use std::f64::consts::PI;

use proptest::prelude::*;
use warplab::geodesy::RotSymManifold;
use warplab::volume::{
    ball_volume, bishop_gromov_holds, check_bishop, check_bishop_gromov, check_yau_linear,
    estimate_iv_sv, growth_curve, log_spaced, sphere_area, stable_growth_check, unit_ball_volume,
    GrowthCurve,
};
use warplab::warp::{slow_exponent, slow_window};
use warplab::{build_oscillating_warp, Error, Magnitude, WarpFunction};

#[allow(clippy::too_many_arguments)]
fn simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (depth < 44 && (left + right - whole).abs() <= 15.0 * tol) {
        left + right + (left + right - whole) / 15.0
    } else {
        simpson(f, a, m, fa, flm, fm, tol / 2.0, depth - 1)
            + simpson(f, m, b, fm, frm, fb, tol / 2.0, depth - 1)
    }
}

fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    simpson(&f, a, b, fa, fm, fb, tol, 50)
}

/// Integral of `f^(n-1)` over `[0, r]`, split at the kinks of `f`.
fn profile_integral(w: &WarpFunction, n: usize, r: f64) -> f64 {
    let mut knots: Vec<f64> = std::iter::once(0.0)
        .chain(
            w.breakpoints()
                .map(|b| b.to_f64())
                .filter(|&b| b > 0.0 && b < r),
        )
        .collect();
    knots.push(r);
    knots
        .windows(2)
        .map(|k| {
            adaptive_simpson(
                |t| w.eval_f64(t).powi(n as i32 - 1),
                k[0],
                k[1],
                1e-14 * r.powi(n as i32),
            )
        })
        .sum()
}

#[test]
fn unit_balls() {
    let known = [
        1.0,
        2.0,
        PI,
        4.0 * PI / 3.0,
        PI * PI / 2.0,
        8.0 * PI * PI / 15.0,
    ];
    for (n, v) in known.iter().enumerate() {
        assert!((unit_ball_volume(n) - v).abs() < 1e-14 * v);
    }
    assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
}

#[test]
fn closed_forms_match_quadrature() {
    let warps = [
        WarpFunction::capped_power(0.5, 1e5).unwrap(),
        build_oscillating_warp(1, 1e4).unwrap(),
        WarpFunction::capped_power(0.3, 1e5).unwrap(),
    ];
    let radii = log_spaced(1e-2, 1e3, 100);
    for w in warps {
        for n in 2..=4 {
            let m = RotSymManifold::new(n, w.clone()).unwrap();
            for r in &radii {
                let r = r.to_f64();
                let want = sphere_area(n) * profile_integral(&w, n, r);
                let got = ball_volume(&m, r).unwrap().to_f64();
                assert!(
                    (got / want - 1.0).abs() < 1e-8,
                    "n={n} r={r}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn paraboloid_volume() {
    let m = RotSymManifold::new(2, WarpFunction::power(0.5, 1e12).unwrap()).unwrap();
    for r in [0.1f64, 1.0, 37.0, 1e6, 1e12] {
        let want = 4.0 * PI / 3.0 * r.powf(1.5);
        let got = ball_volume(&m, r).unwrap().to_f64();
        assert!((got / want - 1.0).abs() < 1e-12, "{got} vs {want}");
    }
}

#[test]
fn slow_windows_bound_volume() {
    let w = build_oscillating_warp(3, 1e4).unwrap();
    for n in 2..=4 {
        let m = RotSymManifold::new(n, w.clone()).unwrap();
        for l in 1..=3 {
            let (_, end) = slow_window(&w, l).unwrap();
            let exp = 1.0 + (n as f64 - 1.0) * slow_exponent(l);
            let bound = end.powf(exp) * sphere_area(n);
            let vol = ball_volume(&m, end).unwrap();
            assert!(
                vol <= bound,
                "n={n} l={l}: ln vol {} > ln bound {}",
                vol.ln(),
                bound.ln()
            );
        }
    }
}

#[test]
fn radius_outside_domain() {
    let m = RotSymManifold::new(2, WarpFunction::euclidean(10.0).unwrap()).unwrap();
    assert!(matches!(ball_volume(&m, 11.0), Err(Error::Domain(_))));
    assert!(matches!(ball_volume(&m, 0.0), Err(Error::Domain(_))));
    assert!(growth_curve(&m, &[Magnitude::new(0.5)]).is_err());
    assert!(matches!(
        estimate_iv_sv(&GrowthCurve::default(), 0.5),
        Err(Error::EmptyCurve)
    ));
}

#[test]
fn comparison_checks_on_constructible_warps() {
    let warps = [
        WarpFunction::euclidean(1e9).unwrap(),
        WarpFunction::capped_power(0.4, 1e9).unwrap(),
        build_oscillating_warp(1, 1e4).unwrap(),
    ];
    for w in warps {
        let grid = log_spaced(1e-3, w.t_max(), 120);
        for n in [2, 3, 6] {
            let m = RotSymManifold::new(n, w.clone()).unwrap();
            assert!(check_bishop(&m, &grid).unwrap() <= 1.0 + 1e-9);
            assert!(check_yau_linear(&m, &grid).unwrap() > 0.0);
            assert!(check_bishop_gromov(&m, &grid).unwrap());
        }
    }
}

#[test]
fn bishop_gromov_flags_convex_growth() {
    // vol(B_R) of dt^2 + (t + t^2)^2 dphi^2 in closed form
    let samples: Vec<(Magnitude, Magnitude)> = [0.5, 1.0, 2.0, 4.0]
        .iter()
        .map(|&r: &f64| {
            (
                Magnitude::new(r),
                Magnitude::new(2.0 * PI * (r * r / 2.0 + r.powi(3) / 3.0)),
            )
        })
        .collect();
    assert!(!bishop_gromov_holds(2, &samples));
    let flat: Vec<_> = samples
        .iter()
        .map(|&(r, _)| (r, r.powf(2.0) * PI))
        .collect();
    assert!(bishop_gromov_holds(2, &flat));
}

#[test]
fn stable_growth_on_the_plane() {
    let m = RotSymManifold::new(2, WarpFunction::euclidean(1e9).unwrap()).unwrap();
    let ratio = stable_growth_check(&m, 2.0, 3.0, 3.2, 50.0, 7.0).unwrap();
    assert!((ratio - 2500.0).abs() < 1e-9 * 2500.0);
    assert!(matches!(
        stable_growth_check(&m, 2.0, 3.2, 3.3, 50.0, 7.0),
        Err(Error::PreconditionViolation(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn growth_curve_csv_round_trip(lo in 0.1f64..5.0, span in 0.5f64..40.0, n in 1usize..30) {
        let m = RotSymManifold::new(3, build_oscillating_warp(2, 1e4).unwrap()).unwrap();
        let grid = log_spaced(Magnitude::from_ln(lo), Magnitude::from_ln(lo + span), n);
        let curve = growth_curve(&m, &grid).unwrap();
        prop_assert_eq!(GrowthCurve::from_csv(&curve.to_csv()).unwrap(), curve.clone());
        let (iv, sv) = estimate_iv_sv(&curve, 0.5).unwrap();
        prop_assert!(iv <= sv);
        prop_assert!(curve.orders().iter().all(|&o| o > 0.0));
    }

    #[test]
    fn volume_is_increasing(a in -3.0f64..200.0, d in 1e-6f64..50.0, n in 2usize..6) {
        let m = RotSymManifold::new(n, build_oscillating_warp(2, 1e4).unwrap()).unwrap();
        let v1 = ball_volume(&m, Magnitude::from_ln(a)).unwrap();
        let v2 = ball_volume(&m, Magnitude::from_ln(a + d)).unwrap();
        prop_assert!(v1 < v2);
    }
}
