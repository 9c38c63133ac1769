//! Spacing between the two zeros that bracket a solution's negative
//! minimum, on either side of the anchor point, and its suprema over
//! levels and over the pole family.

use serde::Serialize;

use crate::integrate::{
    integrate_from_pole, integrate_ivp, Direction, SolveConfig, Trajectory,
};
use crate::level::{slope_f, Side};
use crate::opt::{polish_extremum, scan_minimize_expanding};
use crate::{Error, Result};

/// The zero pair bracketing a negative minimum, with z2 < z1 understood as
/// positions relative to the minimum (z2 on its far side).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ZeroPair {
    pub z1: f64,
    pub z2: f64,
    pub slope1: f64,
    pub slope2: f64,
    pub side: Side,
}

impl ZeroPair {
    pub fn spacing(&self) -> f64 {
        (self.z1 - self.z2).abs()
    }
}

/// Extract the two zeros bracketing the (unique) negative minimum from a
/// trajectory's event list.
pub fn zero_pair(t: &Trajectory, side: Side) -> Result<ZeroPair> {
    let (x_min, y_min) = t
        .minimum()
        .ok_or_else(|| Error::Domain("trajectory has no interior minimum".into()))?;
    if y_min >= 0.0 {
        return Err(Error::Domain(format!(
            "no zeros: the minimum value {y_min} is nonnegative"
        )));
    }
    let zeros = t.zeros();
    let below = zeros.iter().rfind(|e| e.x < x_min);
    let above = zeros.iter().find(|e| e.x > x_min);
    match (below, above) {
        (Some(lo), Some(hi)) => Ok(ZeroPair {
            z1: hi.x,
            z2: lo.x,
            slope1: hi.payload,
            slope2: lo.payload,
            side,
        }),
        _ => Err(Error::Domain("minimum is not bracketed by two zeros".into())),
    }
}

/// Zero spacing of the solution through (x0, y0) with minimum value
/// y_l < 0 on the given side. For y0 = 0 the anchor itself is the nearer
/// zero; for y0 < 0 the zeros straddle the anchor.
pub fn delta_level(x0: f64, y0: f64, y_l: f64, side: Side, cfg: &SolveConfig) -> Result<f64> {
    if y_l >= 0.0 {
        return Err(Error::Domain("zero spacing needs a negative level".into()));
    }
    if y_l >= y0 {
        return Err(Error::Domain("level must lie below the anchor value".into()));
    }
    let slope = slope_f(x0, y0, y_l, side, cfg)?;
    let (march, back) = match side {
        Side::MinLeft => (Direction::Left, Direction::Right),
        Side::MinRight => (Direction::Right, Direction::Left),
    };
    let traj = integrate_ivp(x0, y0, slope, march, cfg)?;
    let (x_min, _) = traj
        .minimum()
        .ok_or_else(|| Error::Domain("no minimum on the requested side".into()))?;
    // the far zero, past the minimum
    let far = traj
        .zeros()
        .iter()
        .find(|e| match side {
            Side::MinLeft => e.x < x_min,
            Side::MinRight => e.x > x_min,
        })
        .map(|e| e.x)
        .ok_or_else(|| Error::Domain("far zero not found".into()))?;
    // the near zero: between anchor and minimum for y0 > 0, the anchor for
    // y0 = 0, across the anchor for y0 < 0
    let near = if y0 > 0.0 {
        traj.zeros()
            .iter()
            .find(|e| match side {
                Side::MinLeft => e.x > x_min,
                Side::MinRight => e.x < x_min,
            })
            .map(|e| e.x)
            .ok_or_else(|| Error::Domain("near zero not found".into()))?
    } else if y0 == 0.0 {
        x0
    } else {
        let cross = integrate_ivp(x0, y0, slope, back, cfg)?;
        cross
            .zeros()
            .first()
            .map(|e| e.x)
            .ok_or_else(|| Error::Domain("no zero across the anchor".into()))?
    };
    Ok((near - far).abs())
}

/// Supremum of the spacing, with the optimizer and its witness trajectory.
#[derive(Debug, Clone)]
pub struct SpacingResult {
    pub value: f64,
    /// Optimal level (for [`delta_sup`]) or pole parameter (for
    /// [`delta_pole_sup`]).
    pub arg: f64,
    pub witness: Trajectory,
    pub multiple_optima: bool,
}

/// Supremum of the spacing over levels at fixed anchor data.
pub fn delta_sup(x0: f64, y0: f64, side: Side, cfg: &SolveConfig) -> Result<SpacingResult> {
    let f = |y_l: f64| {
        if y_l >= y0.min(0.0) - 1e-9 {
            f64::INFINITY
        } else {
            -delta_level(x0, y0, y_l, side, cfg).unwrap_or(f64::NEG_INFINITY)
        }
    };
    let hi = y0.min(0.0) - 1e-3;
    let lo = hi - 4.0 * (1.0 + x0.abs()).sqrt();
    let report = scan_minimize_expanding(&f, lo, hi, 48, 1e-9, 10);
    let y_l_star = polish_extremum(&f, report.best().arg, 1e-3);
    let value = delta_level(x0, y0, y_l_star, side, cfg)?;
    let slope = slope_f(x0, y0, y_l_star, side, cfg)?;
    let march = match side {
        Side::MinLeft => Direction::Left,
        Side::MinRight => Direction::Right,
    };
    let witness = integrate_ivp(x0, y0, slope, march, cfg)?;
    Ok(SpacingResult {
        value,
        arg: y_l_star,
        witness,
        multiple_optima: report.multiple(),
    })
}

/// Supremum of the spacing over the pole family launched at x0.
pub fn delta_pole_sup(x0: f64, side: Side, cfg: &SolveConfig) -> Result<SpacingResult> {
    let march = match side {
        Side::MinLeft => Direction::Left,
        Side::MinRight => Direction::Right,
    };
    let spacing_of = |v: f64| -> Result<f64> {
        let t = integrate_from_pole(x0, v, march, cfg)?;
        Ok(zero_pair(&t, side)?.spacing())
    };
    let f = |v: f64| -spacing_of(v).unwrap_or(f64::NEG_INFINITY);
    let report = scan_minimize_expanding(&f, -4.0, 4.0, 64, 1e-9, 12);
    let v_star = polish_extremum(&f, report.best().arg, 1e-3);
    let witness = integrate_from_pole(x0, v_star, march, cfg)?;
    let value = zero_pair(&witness, side)?.spacing();
    Ok(SpacingResult {
        value,
        arg: v_star,
        witness,
        multiple_optima: report.multiple(),
    })
}
