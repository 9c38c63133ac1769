//! Closed-form quadratures and constants: the travel-time integral I, the
//! constant C and its argmax, the boundary-weighted constants C(v0), the
//! eta root functions, and the analytic lower/upper bounds built from them.
//!
//! Every integral is evaluated after the substitution w = sqrt(v - v_min),
//! which removes the inverse-square-root endpoint singularity; infinite
//! upper limits are folded onto [0, 1] by u = 1/w, so no truncation error
//! enters at all. Outer maximizations solve d/dv = 0 with the derivative
//! taken under the integral sign, which pins the argmax to near machine
//! precision instead of the sqrt(eps) a direct search would give.

use std::sync::OnceLock;

use crate::quad::integrate;
use crate::{Error, Result};

const QUAD_TOL: f64 = 1e-14;

/// I(v0, v_min): travel-time bound integral. `v0 = None` means +infinity.
///
/// In the w-form the integrand is 1/sqrt(w^4 + 3 v w^2 + 3 v^2 + 1/2),
/// positive for every real v.
pub fn integral_i(v0: Option<f64>, v_min: f64) -> Result<f64> {
    let g = |w: f64| {
        let w2 = w * w;
        1.0 / (w2 * w2 + 3.0 * v_min * w2 + 3.0 * v_min * v_min + 0.5).sqrt()
    };
    // image of the tail w in [1, W) under u = 1/w
    let h = |u: f64| {
        let u2 = u * u;
        1.0 / (1.0 + 3.0 * v_min * u2 + (3.0 * v_min * v_min + 0.5) * u2 * u2).sqrt()
    };
    match v0 {
        Some(v0) if v0 <= v_min => Ok(0.0),
        Some(v0) => {
            let w_up = (v0 - v_min).sqrt();
            if w_up <= 1.0 {
                integrate(g, 0.0, w_up, QUAD_TOL)
            } else {
                Ok(integrate(g, 0.0, 1.0, QUAD_TOL)? + integrate(h, 1.0 / w_up, 1.0, QUAD_TOL)?)
            }
        }
        None => Ok(integrate(g, 0.0, 1.0, QUAD_TOL)? + integrate(h, 0.0, 1.0, QUAD_TOL)?),
    }
}

/// I_nu for nu = +-1 (or any nonzero nu), from the rational form
/// 2 * integral of dv / sqrt(v^4 + 3 nu v^2 + 3 nu^2). This is a route
/// independent of [`integral_i`], used to cross-check it.
pub fn i_nu(nu: f64) -> Result<f64> {
    if nu == 0.0 {
        return Err(Error::Domain("i_nu requires nu != 0".into()));
    }
    let g = |v: f64| {
        let v2 = v * v;
        1.0 / (v2 * v2 + 3.0 * nu * v2 + 3.0 * nu * nu).sqrt()
    };
    let h = |u: f64| {
        let u2 = u * u;
        1.0 / (1.0 + 3.0 * nu * u2 + 3.0 * nu * nu * u2 * u2).sqrt()
    };
    Ok(2.0 * (integrate(g, 0.0, 1.0, QUAD_TOL)? + integrate(h, 0.0, 1.0, QUAD_TOL)?))
}

fn d_integral_i_dv(v: f64) -> Result<f64> {
    let dg = |w: f64| {
        let w2 = w * w;
        let base = w2 * w2 + 3.0 * v * w2 + 3.0 * v * v + 0.5;
        -(1.5 * w2 + 3.0 * v) * base.powf(-1.5)
    };
    let dh = |u: f64| {
        let u2 = u * u;
        let u4 = u2 * u2;
        let base = 1.0 + 3.0 * v * u2 + (3.0 * v * v + 0.5) * u4;
        -(1.5 * u2 + 3.0 * v * u4) * base.powf(-1.5)
    };
    Ok(integrate(dg, 0.0, 1.0, QUAD_TOL)? + integrate(dh, 0.0, 1.0, QUAD_TOL)?)
}

/// The constant C, its argmax v_min^max, the transformed argmax
/// x_max = 1/(2 (v_min^max)^2), and C0 = C(0).
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ConstantBundle {
    pub c: f64,
    pub v_min_max: f64,
    pub x_max: f64,
    pub c0: f64,
}

static BUNDLE: OnceLock<ConstantBundle> = OnceLock::new();

/// Compute (once) and cache the constant bundle.
pub fn constants() -> &'static ConstantBundle {
    BUNDLE.get_or_init(|| {
        // all extrema live in (-sqrt(2/3), 0); the derivative bracket is safe
        let lo = -0.70;
        let hi = -0.05;
        let f_lo = d_integral_i_dv(lo).expect("quadrature misconfigured");
        let f_hi = d_integral_i_dv(hi).expect("quadrature misconfigured");
        let v_star = crate::opt::brent_root(
            |v| d_integral_i_dv(v).expect("quadrature misconfigured"),
            lo,
            hi,
            f_lo,
            f_hi,
            1e-14,
            0.0,
        );
        let c = integral_i(None, v_star).expect("quadrature misconfigured");
        let c0 = c_of_detail(Some(0.0)).expect("quadrature misconfigured").value;
        ConstantBundle {
            c,
            v_min_max: v_star,
            x_max: 1.0 / (2.0 * v_star * v_star),
            c0,
        }
    })
}

pub fn capital_c() -> f64 {
    constants().c
}

/// The maximized boundary integral and where the inner supremum sits.
#[derive(Debug, Clone, Copy)]
pub struct COfReport {
    pub value: f64,
    pub x_max: f64,
    /// More than one local maximum was detected on the scan grid.
    pub multiple_maxima: bool,
}

fn c_of_value(v0: Option<f64>, x: f64) -> Result<f64> {
    let scale = (2.0 * x).powf(0.25);
    let g = |w: f64| {
        let w2 = w * w;
        1.0 / (w2 * w2 - 3.0 * w2 + 3.0 + x).sqrt()
    };
    let val = match v0 {
        Some(v0) => {
            let s = (2.0 * x).sqrt();
            let arg = 1.0 + v0 * s;
            if arg <= 0.0 {
                return Ok(0.0);
            }
            let upper = arg.sqrt();
            if upper <= 1.0 {
                integrate(g, 0.0, upper, QUAD_TOL)?
            } else {
                let h = |u: f64| {
                    let u2 = u * u;
                    1.0 / (1.0 - 3.0 * u2 + (3.0 + x) * u2 * u2).sqrt()
                };
                integrate(g, 0.0, 1.0, QUAD_TOL)? + integrate(h, 1.0 / upper, 1.0, QUAD_TOL)?
            }
        }
        None => {
            let h = |u: f64| {
                let u2 = u * u;
                1.0 / (1.0 - 3.0 * u2 + (3.0 + x) * u2 * u2).sqrt()
            };
            integrate(g, 0.0, 1.0, QUAD_TOL)? + integrate(h, 0.0, 1.0, QUAD_TOL)?
        }
    };
    Ok(scale * val)
}

fn c_of_dx(v0: Option<f64>, x: f64) -> Result<f64> {
    let scale = (2.0 * x).powf(0.25);
    let d_scale = 0.5 * (2.0 * x).powf(-0.75);
    let g = |w: f64| {
        let w2 = w * w;
        1.0 / (w2 * w2 - 3.0 * w2 + 3.0 + x).sqrt()
    };
    let dg = |w: f64| {
        let w2 = w * w;
        -0.5 * (w2 * w2 - 3.0 * w2 + 3.0 + x).powf(-1.5)
    };
    let (j, dj) = match v0 {
        Some(v0) => {
            let s = (2.0 * x).sqrt();
            let arg = 1.0 + v0 * s;
            if arg <= 0.0 {
                return Ok(0.0);
            }
            let upper = arg.sqrt();
            let d_upper = v0 / (2.0 * upper * s);
            let (j, dj_interior) = if upper <= 1.0 {
                (
                    integrate(g, 0.0, upper, QUAD_TOL)?,
                    integrate(dg, 0.0, upper, QUAD_TOL)?,
                )
            } else {
                let h = |u: f64| {
                    let u2 = u * u;
                    1.0 / (1.0 - 3.0 * u2 + (3.0 + x) * u2 * u2).sqrt()
                };
                let dh = |u: f64| {
                    let u2 = u * u;
                    let u4 = u2 * u2;
                    -0.5 * u4 * (1.0 - 3.0 * u2 + (3.0 + x) * u4).powf(-1.5)
                };
                (
                    integrate(g, 0.0, 1.0, QUAD_TOL)? + integrate(h, 1.0 / upper, 1.0, QUAD_TOL)?,
                    integrate(dg, 0.0, 1.0, QUAD_TOL)?
                        + integrate(dh, 1.0 / upper, 1.0, QUAD_TOL)?
                        + h(1.0 / upper) / (upper * upper) * d_upper,
                )
            };
            // Leibniz boundary term from the moving upper limit
            let boundary = if upper <= 1.0 { g(upper) * d_upper } else { 0.0 };
            (j, dj_interior + boundary)
        }
        None => {
            let h = |u: f64| {
                let u2 = u * u;
                1.0 / (1.0 - 3.0 * u2 + (3.0 + x) * u2 * u2).sqrt()
            };
            let dh = |u: f64| {
                let u2 = u * u;
                let u4 = u2 * u2;
                -0.5 * u4 * (1.0 - 3.0 * u2 + (3.0 + x) * u4).powf(-1.5)
            };
            (
                integrate(g, 0.0, 1.0, QUAD_TOL)? + integrate(h, 0.0, 1.0, QUAD_TOL)?,
                integrate(dg, 0.0, 1.0, QUAD_TOL)? + integrate(dh, 0.0, 1.0, QUAD_TOL)?,
            )
        }
    };
    Ok(d_scale * j + scale * dj)
}

/// sup over x > 0 (with v0 sqrt(2x) > -1) of the boundary integral.
/// Strictly increasing in v0 with limits 0 and C.
pub fn c_of(v0: Option<f64>) -> Result<f64> {
    Ok(c_of_detail(v0)?.value)
}

pub fn c_of_detail(v0: Option<f64>) -> Result<COfReport> {
    // scan a log grid for local maxima of the value, then pin each by a
    // derivative root; the supremum is not assumed unimodal
    let x_hi = match v0 {
        Some(v) if v < 0.0 => 1.0 / (2.0 * v * v) * (1.0 - 1e-12),
        _ => 1.0e4,
    };
    let x_lo = (1e-3f64).min(x_hi / 1e6);
    let n = 96;
    let mut xs = Vec::with_capacity(n);
    let (llo, lhi) = (x_lo.ln(), x_hi.ln());
    for i in 0..n {
        xs.push((llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp());
    }
    let vals: Vec<f64> = xs.iter().map(|&x| c_of_value(v0, x).unwrap_or(0.0)).collect();
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    for i in 1..n - 1 {
        if vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1] && vals[i] > 0.0 {
            let (a, b) = (xs[i - 1], xs[i + 1]);
            let da = c_of_dx(v0, a)?;
            let db = c_of_dx(v0, b)?;
            let x_star = if da > 0.0 && db < 0.0 {
                crate::opt::brent_root(|x| c_of_dx(v0, x).unwrap_or(f64::NAN), a, b, da, db, 1e-13, 0.0)
            } else {
                xs[i]
            };
            peaks.push((x_star, c_of_value(v0, x_star)?));
        }
    }
    if peaks.is_empty() {
        // no interior peak resolved on the grid; fall back to the best point
        let (i, &v) = vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        peaks.push((xs[i], v));
    }
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    let multiple = peaks.len() > 1 && (peaks[1].0 - peaks[0].0).abs() > 1e-6 * peaks[0].0;
    Ok(COfReport {
        value: peaks[0].1,
        x_max: peaks[0].0,
        multiple_maxima: multiple,
    })
}

/// Root of eta^5 - |x0| eta = scale * C(weight / eta^2) on eta > 0; with no
/// weight the right side is the constant C itself.
pub fn eta_root(x0: f64, weight: Option<f64>) -> Result<f64> {
    eta_root_scaled(x0, weight, 1.0)
}

pub fn eta_root_scaled(x0: f64, weight: Option<f64>, scale: f64) -> Result<f64> {
    if x0 > 0.0 {
        return Err(Error::Domain("eta root is defined for x0 <= 0".into()));
    }
    let absx = x0.abs();
    let rhs = |eta: f64| -> Result<f64> {
        match weight {
            None => Ok(scale * capital_c()),
            Some(y0) => Ok(scale * c_of(Some(y0 / (eta * eta)))?),
        }
    };
    let phi = |eta: f64| -> Result<f64> { Ok(eta.powi(5) - absx * eta - rhs(eta)?) };
    // the polynomial part is increasing right of (|x0|/5)^(1/4) and phi is
    // negative there; expand upward until positive, then bracket
    let mut lo = (absx / 5.0).powf(0.25).max(1e-4);
    let mut f_lo = phi(lo)?;
    if f_lo > 0.0 {
        // can only happen for tiny scale*C; walk down
        for _ in 0..200 {
            lo *= 0.5;
            f_lo = phi(lo)?;
            if f_lo <= 0.0 {
                break;
            }
        }
    }
    let mut hi = lo.max(1.0);
    let mut f_hi = phi(hi)?;
    for _ in 0..200 {
        if f_hi > 0.0 {
            break;
        }
        hi *= 2.0;
        f_hi = phi(hi)?;
    }
    if f_lo * f_hi > 0.0 {
        return Err(Error::BracketFailure("eta root bracket not found".into()));
    }
    let root = crate::opt::brent_root(
        |eta| phi(eta).unwrap_or(f64::NAN),
        lo,
        hi,
        f_lo,
        f_hi,
        1e-15,
        1e-13,
    );
    Ok(root)
}

/// Which inequality chain a [`BoundPair`] instantiates.
#[derive(Debug, Clone, Copy)]
pub enum BoundQuery {
    /// Two-sided bound on X_min(x0), with the small-|x0| fallback.
    XMin { x0: f64 },
    /// Same chain for X_-(x0).
    XMinus { x0: f64 },
    /// Two-sided bound on X(x0); a computed X_min(x0) sharpens the lower side.
    X { x0: f64, x_min_value: Option<f64> },
    /// Two-sided bound on X_min(x0, y0) through the weighted eta root.
    XMinXY { x0: f64, y0: f64 },
    /// Sandwich for Z(x0, y0, y_up); needs the computed X_min(x0, y0).
    Z { x0: f64, y0: f64, y_up: f64, x_min_xy: f64 },
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
    pub kind: &'static str,
}

fn x_min_lower(x0: f64) -> f64 {
    let c = capital_c();
    let x_hat = -(c / 4.0).powf(0.8);
    if x0 <= x_hat {
        x0 - c / x0.abs().powf(0.25)
    } else {
        -5.0 * (c / 4.0).powf(0.8)
    }
}

pub fn bounds_report(query: BoundQuery) -> Result<BoundPair> {
    let c = capital_c();
    match query {
        BoundQuery::XMin { x0 } | BoundQuery::XMinus { x0 } => {
            if x0 > 0.0 {
                return Err(Error::Domain("bounds require x0 <= 0".into()));
            }
            let eta = eta_root(x0, None)?;
            let kind = if matches!(query, BoundQuery::XMin { .. }) { "x_min" } else { "x_minus" };
            Ok(BoundPair { lower: x_min_lower(x0), upper: -eta.powi(4), kind })
        }
        BoundQuery::X { x0, x_min_value } => {
            if x0 > 0.0 {
                return Err(Error::Domain("bounds require x0 <= 0".into()));
            }
            let scaled = x0 / 2f64.powf(0.8);
            let upper = x0 - 2f64.powf(0.8) * c / eta_root(scaled, None)?;
            let lower = match x_min_value {
                Some(m) => m - c / m.abs().powf(0.25),
                None => x_min_lower(x0) - c / eta_root(x0, None)?,
            };
            Ok(BoundPair { lower, upper, kind: "x" })
        }
        BoundQuery::XMinXY { x0, y0 } => {
            if x0 >= 0.0 {
                return Err(Error::Domain("the |x0|^(-1/4) form needs x0 < 0".into()));
            }
            let absx = x0.abs();
            let upper_abs = absx + c_of(Some(y0 / absx.sqrt()))? / absx.powf(0.25);
            let eta = eta_root(x0, Some(y0))?;
            Ok(BoundPair { lower: -upper_abs, upper: -eta.powi(4), kind: "x_min_xy" })
        }
        BoundQuery::Z { x0, y0, y_up, x_min_xy } => {
            if x_min_xy >= 0.0 {
                return Err(Error::Domain("Z bounds need a negative X_min(x0, y0)".into()));
            }
            let m = x_min_xy.abs();
            let v_up = y_up / m.sqrt();
            let lower = -(m + c_of(Some(v_up))? / m.powf(0.25));
            let eta = eta_root_scaled(x0, Some(y0.min(y_up)), 2.0)?;
            Ok(BoundPair { lower, upper: -eta.powi(4), kind: "z" })
        }
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    #[test]
    fn empty_interval_is_zero() {
        for v in [-2.0, 0.0, 1.5] {
            assert_eq!(integral_i(Some(v), v).unwrap(), 0.0);
        }
    }

    #[test]
    fn constant_c_and_argmax() {
        let b = constants();
        assert!((b.c - 2.32470720434237566).abs() / b.c < 1e-13, "C = {}", b.c);
        assert!((b.v_min_max - (-0.22600387635302095)).abs() < 1e-10, "v* = {}", b.v_min_max);
        assert!((b.x_max - 9.78899773742578347).abs() < 1e-8, "x_max = {}", b.x_max);
    }

    #[test]
    fn estimate_against_independent_quadrature() {
        // I(inf, v_min) < I_nu / (2 sqrt(|v_min|)) at |v_min| = 1, with I_nu
        // computed from the rational form as the independent route
        let lhs = integral_i(None, 1.0).unwrap();
        let rhs = i_nu(1.0).unwrap() / 2.0;
        assert!(lhs < rhs, "lhs = {lhs}, rhs = {rhs}");
        let lhs_neg = integral_i(None, -1.0).unwrap();
        let rhs_neg = i_nu(-1.0).unwrap() / 2.0;
        assert!(lhs_neg < rhs_neg);
    }

    #[test]
    fn boundary_constant_and_inner_argmax() {
        let r = c_of_detail(Some(0.0)).unwrap();
        assert!((r.value - 0.69663587640019346).abs() < 1e-12, "C(0) = {}", r.value);
        assert!((r.x_max - 2.04124321493909675).abs() < 1e-8, "x_max = {}", r.x_max);
        assert!(!r.multiple_maxima);
        // transformed argmax coordinate of the same maximum
        let v_implied = -1.0 / (2.0 * r.x_max).sqrt();
        assert!((v_implied - (-0.49492298670007907)).abs() < 1e-10, "v = {v_implied}");
    }

    #[test]
    fn c_of_interpolates_between_zero_and_c() {
        let c = capital_c();
        let mut prev = 0.0;
        for v0 in [-5.0, -2.0, -0.5, 0.0, 0.5, 2.0, 5.0] {
            let val = c_of(Some(v0)).unwrap();
            assert!(val > prev, "not increasing at v0 = {v0}");
            assert!(val < c);
            prev = val;
        }
        let inf = c_of(None).unwrap();
        assert!((inf - c).abs() < 1e-10, "C(inf) = {inf} vs C = {c}");
    }

    #[test]
    fn eta_roots_match_reference_values() {
        let c = capital_c();
        assert!((eta_root(0.0, None).unwrap() - c.powf(0.2)).abs() < 1e-12);
        assert!((eta_root(-1.0, None).unwrap() - 1.293282706).abs() < 1e-8);
        assert!((eta_root(-(2f64.powf(-0.8)), None).unwrap() - 1.249215473).abs() < 1e-8);
    }

    #[test]
    fn eta_residual_is_tiny() {
        let c = capital_c();
        for x0 in [-9.5, -3.0, -0.7, -0.05, 0.0] {
            let eta = eta_root(x0, None).unwrap();
            let res = (eta.powi(5) - x0.abs() * eta - c).abs();
            assert!(res < 1e-12, "residual {res} at x0 = {x0}");
        }
    }

    #[test]
    fn printed_bounds_at_zero_and_minus_one() {
        let b0 = bounds_report(BoundQuery::XMin { x0: 0.0 }).unwrap();
        assert!((b0.upper - (-1.963788033)).abs() < 1e-8);
        assert!((b0.lower - (-3.239042305)).abs() < 1e-8);
        let bx0 = bounds_report(BoundQuery::X { x0: 0.0, x_min_value: None }).unwrap();
        assert!((bx0.upper - (-3.419153556)).abs() < 1e-8);
        let b1 = bounds_report(BoundQuery::XMin { x0: -1.0 }).unwrap();
        assert!((b1.lower - (-3.324707204)).abs() < 1e-8);
        assert!((b1.upper - (-2.797524387)).abs() < 1e-8);
        let bx1 = bounds_report(BoundQuery::X { x0: -1.0, x_min_value: Some(-2.853690013) }).unwrap();
        assert!((bx1.lower - (-4.642303753)).abs() < 1e-7);
        assert!((bx1.upper - (-4.240073805)).abs() < 1e-7);
    }
}
