//! Embedded Dormand-Prince 5(4) stepper with step-size control and
//! sub-step event localization.
//!
//! Events are located by root-finding over the sub-step length: a candidate
//! crossing inside an accepted step is polished by re-taking a single RK
//! step of trial size from the stored step start. That keeps the event
//! state at full integrator accuracy without relying on the order of a
//! dense-output interpolant.

use crate::opt::brent_root;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// difference between the 5th and 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

#[derive(Debug, Clone, Copy)]
pub struct StepOut<const N: usize> {
    pub y: [f64; N],
    pub err: f64,
    /// FSAL slope at the step end, reusable as the next k1.
    pub k_end: [f64; N],
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

/// One Dormand-Prince 5(4) step of (signed) size `h` from `(x, y)` with the
/// slope `k1 = f(x, y)` already known. `tol_scale` feeds the error norm.
pub fn dp5_step<const N: usize, F>(
    f: &F,
    x: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> StepOut<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k2 = f(x + C2 * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = f(x + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(x + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(
        x + C5 * h,
        &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = f(
        x + h,
        &axpy(
            y,
            h,
            &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ),
    );
    let y5 = axpy(
        y,
        h,
        &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
    );
    let k7 = f(x + h, &y5);
    let mut err = 0.0;
    for i in 0..N {
        let e = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = abs_tol + rel_tol * y[i].abs().max(y5[i].abs());
        let r = e / sc;
        err += r * r;
    }
    let err = (err / N as f64).sqrt();
    StepOut { y: y5, err, k_end: k7 }
}

/// Result of advancing one accepted adaptive step.
pub struct Accepted<const N: usize> {
    pub h: f64,
    pub y: [f64; N],
    pub k_end: [f64; N],
    pub h_next: f64,
}

/// Take one accepted step starting from `(x, y)` with slope `k1`, shrinking
/// the trial size until the error estimate passes. Returns `None` when the
/// step size underflows (integrator cannot meet the tolerance).
#[allow(clippy::too_many_arguments)]
pub fn advance<const N: usize, F>(
    f: &F,
    x: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h_try: f64,
    h_cap: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Option<Accepted<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let dir = h_try.signum();
    let mut h = h_try.abs().min(h_cap.abs()).max(1e-300) * dir;
    for _ in 0..60 {
        if h.abs() < 1e3 * f64::EPSILON * x.abs().max(1.0) {
            return None;
        }
        let out = dp5_step(f, x, y, k1, h, rel_tol, abs_tol);
        let bad = !out.err.is_finite() || out.y.iter().any(|v| !v.is_finite());
        if bad {
            h *= 0.25;
            continue;
        }
        if out.err <= 1.0 {
            let factor = if out.err == 0.0 {
                5.0
            } else {
                (0.9 * out.err.powf(-0.2)).clamp(0.2, 5.0)
            };
            return Some(Accepted {
                h,
                y: out.y,
                k_end: out.k_end,
                h_next: h * factor,
            });
        }
        let factor = (0.9 * out.err.powf(-0.2)).clamp(0.1, 0.9);
        h *= factor;
    }
    None
}

/// Locate a root of `g` along the accepted step `(x0, y0) -> (x0+h, y1)`.
///
/// `g0` and `g1` must straddle zero. Returns `(x_event, y_event)` with the
/// abscissa resolved to `xtol`.
#[allow(clippy::too_many_arguments)]
pub fn locate_event<const N: usize, F, G>(
    f: &F,
    x0: f64,
    y0: &[f64; N],
    k1: &[f64; N],
    h: f64,
    g: &G,
    g0: f64,
    g1: f64,
    xtol: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> (f64, [f64; N])
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    G: Fn(f64, &[f64; N]) -> f64,
{
    let state_at = |theta: f64| -> [f64; N] {
        if theta <= 0.0 {
            return *y0;
        }
        dp5_step(f, x0, y0, k1, theta * h, rel_tol, abs_tol).y
    };
    let phi = |theta: f64| -> f64 {
        let y = state_at(theta);
        g(x0 + theta * h, &y)
    };
    let theta = brent_root(phi, 0.0, 1.0, g0, g1, (xtol / h.abs()).min(0.25), 0.0);
    let y = state_at(theta);
    (x0 + theta * h, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    // y' = y, exact exponential
    #[test]
    fn exponential_to_tolerance() {
        let f = |_x: f64, y: &[f64; 1]| [y[0]];
        let mut x = 0.0;
        let mut y = [1.0];
        let mut k1 = f(x, &y);
        let mut h = 1e-3f64;
        while x < 1.0 {
            let cap = 1.0 - x;
            let acc = advance(&f, x, &y, &k1, h.min(cap), cap, 1e-12, 1e-12).unwrap();
            x += acc.h;
            y = acc.y;
            k1 = acc.k_end;
            h = acc.h_next;
        }
        assert!((y[0] - std::f64::consts::E).abs() < 1e-10);
    }

    // event on y(x) = 0 for harmonic oscillator: first zero of cos at pi/2
    #[test]
    fn event_location_matches_analytic_zero() {
        let f = |_x: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut x = 0.0;
        let mut y = [1.0, 0.0];
        let mut k1 = f(x, &y);
        let mut h = 1e-2f64;
        loop {
            let acc = advance(&f, x, &y, &k1, h, 10.0, 1e-12, 1e-12).unwrap();
            let g0 = y[0];
            let g1 = acc.y[0];
            if g0 > 0.0 && g1 <= 0.0 {
                let (xe, ye) = locate_event(
                    &f,
                    x,
                    &y,
                    &k1,
                    acc.h,
                    &|_x, s: &[f64; 2]| s[0],
                    g0,
                    g1,
                    1e-13,
                    1e-12,
                    1e-12,
                );
                assert!((xe - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
                assert!((ye[1] + 1.0).abs() < 1e-10);
                break;
            }
            x += acc.h;
            y = acc.y;
            k1 = acc.k_end;
            h = acc.h_next;
        }
    }
}
