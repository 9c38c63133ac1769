//! Level parametrization of solutions: initial slopes from prescribed
//! minimum values, the symmetry defect, the pole-parameter <-> minimum-value
//! bijection, and the per-level pole/minimum abscissa functions.
//!
//! A solution regular at x0 <= 0 is pinned down by its value y0 there and
//! its minimum value y_l (the level) instead of its slope; the slope
//! realizing a given level is unique and monotone in the level, which makes
//! every map here a bracketed one-dimensional root find around the
//! integrator.

use serde::Serialize;

use crate::integrate::{
    integrate_from_pole, integrate_from_pole_opts, integrate_ivp_opts, Direction, MarchOpts,
    SolveConfig, Trajectory,
};
use crate::opt::brent_root;
use crate::{Error, Result};

/// Which side of x0 the prescribed minimum (or zero pair) lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    MinLeft,
    MinRight,
}

impl Side {
    fn direction(self) -> Direction {
        match self {
            Side::MinLeft => Direction::Left,
            Side::MinRight => Direction::Right,
        }
    }
}

/// Pole datum (x_pole, v) with v the patch variable at the pole; the fourth
/// Laurent coefficient there is c = v/7.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PoleDatum {
    pub x_pole: f64,
    pub v: f64,
}

/// Minimum of the solution through (x0, y0) with the given initial slope,
/// searched on the given side. The march stops at the minimum event.
pub(crate) fn achieved_min(
    x0: f64,
    y0: f64,
    slope: f64,
    side: Side,
    cfg: &SolveConfig,
) -> Result<(f64, f64)> {
    let opts = MarchOpts { stop_at_minimum: true, ..Default::default() };
    let traj = integrate_ivp_opts(x0, y0, slope, side.direction(), cfg, opts)?;
    traj.minimum()
        .ok_or_else(|| Error::BracketFailure(format!("no minimum reached from ({x0}, {y0})")))
}

pub(crate) fn achieved_min_abscissa(
    x0: f64,
    y0: f64,
    slope: f64,
    cfg: &SolveConfig,
) -> Result<f64> {
    Ok(achieved_min(x0, y0, slope, Side::MinLeft, cfg)?.0)
}

/// Initial slope at x0 making the solution's minimum on the chosen side
/// equal y_l. Nonnegative for MinLeft, nonpositive for MinRight; unique and
/// strictly monotone in the level.
pub fn slope_f(x0: f64, y0: f64, y_l: f64, side: Side, cfg: &SolveConfig) -> Result<f64> {
    if y_l == y0 {
        return Ok(0.0);
    }
    if y_l > y0 {
        // continuous prolongation across the diagonal: swap the roles of the
        // initial value and the level and flip the side
        let flipped = match side {
            Side::MinLeft => Side::MinRight,
            Side::MinRight => Side::MinLeft,
        };
        return slope_f(x0, y_l, y0, flipped, cfg);
    }
    let sgn = match side {
        Side::MinLeft => 1.0,
        Side::MinRight => -1.0,
    };
    let g = |mu: f64| -> Result<f64> { Ok(achieved_min(x0, y0, mu, side, cfg)?.1 - y_l) };
    let g0 = y0 - y_l; // slope zero leaves the minimum at (x0, y0)
    let mut hi = sgn;
    let mut g_hi = g(hi)?;
    let mut iter = 0;
    while g_hi > 0.0 {
        hi *= 2.0;
        iter += 1;
        if iter > 60 {
            return Err(Error::BracketFailure(format!("level {y_l} unreachable from ({x0}, {y0})")));
        }
        g_hi = g(hi)?;
    }
    // the slope can reach ~2 y0^(3/2); only a machine-level bracket keeps
    // the achieved level pinned at large y0, so let brent hit its eps floor
    let xtol = 0.0;
    let ftol = 1e-11 * (1.0 + y_l.abs());
    let root = brent_root(|mu| g(mu).unwrap_or(f64::NAN), 0.0, hi, g0, g_hi, xtol, ftol);
    Ok(root)
}

/// Symmetry defect f(x0; y0, y_l) - f(x0; -y_l, -y0).
pub fn delta_sym(x0: f64, y0: f64, y_l: f64, side: Side, cfg: &SolveConfig) -> Result<f64> {
    Ok(slope_f(x0, y0, y_l, side, cfg)? - slope_f(x0, -y_l, -y0, side, cfg)?)
}

/// Minimum value and abscissa of the solution launched left from pole data.
pub fn level_from_pole(p: PoleDatum, cfg: &SolveConfig) -> Result<(f64, f64)> {
    let opts = MarchOpts { stop_at_minimum: true, ..Default::default() };
    let traj = integrate_from_pole_opts(p.x_pole, p.v, Direction::Left, cfg, opts)?;
    let (x_min, y_l) = traj
        .minimum()
        .ok_or_else(|| Error::BracketFailure("pole launch found no minimum".into()))?;
    Ok((y_l, x_min))
}

fn level_from_pole_right(p: PoleDatum, cfg: &SolveConfig) -> Result<(f64, f64)> {
    let opts = MarchOpts { stop_at_minimum: true, ..Default::default() };
    let traj = integrate_from_pole_opts(p.x_pole, p.v, Direction::Right, cfg, opts)?;
    let (x_min, y_l) = traj
        .minimum()
        .ok_or_else(|| Error::BracketFailure("pole launch found no minimum".into()))?;
    Ok((y_l, x_min))
}

fn invert_level_map<F>(mut level_of_v: F, y_l: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    // the level grows monotonically with v and covers the whole line
    let g = |v: f64, f: &mut F| -> Result<f64> { Ok(f(v)? - y_l) };
    let mut lo = -1.0;
    let mut hi = 1.0;
    let mut g_lo = g(lo, &mut level_of_v)?;
    let mut g_hi = g(hi, &mut level_of_v)?;
    let mut iter = 0;
    while g_lo > 0.0 {
        hi = lo;
        g_hi = g_lo;
        lo *= 2.0;
        g_lo = g(lo, &mut level_of_v)?;
        iter += 1;
        if iter > 60 {
            return Err(Error::BracketFailure("level inversion bracket overflow".into()));
        }
    }
    while g_hi < 0.0 {
        lo = hi;
        g_lo = g_hi;
        hi *= 2.0;
        g_hi = g(hi, &mut level_of_v)?;
        iter += 1;
        if iter > 60 {
            return Err(Error::BracketFailure("level inversion bracket overflow".into()));
        }
    }
    let xtol = 1e-13 * (1.0 + hi.abs());
    let ftol = 1e-10 * (1.0 + y_l.abs());
    Ok(brent_root(
        |v| g(v, &mut level_of_v).unwrap_or(f64::NAN),
        lo,
        hi,
        g_lo,
        g_hi,
        xtol,
        ftol,
    ))
}

/// Pole parameter of the left-launched solution with minimum value y_l,
/// inverse of [`level_from_pole`] in its first component.
pub fn v_from_level(x_pole: f64, y_l: f64, cfg: &SolveConfig) -> Result<f64> {
    invert_level_map(|v| Ok(level_from_pole(PoleDatum { x_pole, v }, cfg)?.0), y_l)
}

/// Right-launched counterpart of [`v_from_level`].
pub fn v_from_level_right(x_pole: f64, y_l: f64, cfg: &SolveConfig) -> Result<f64> {
    invert_level_map(|v| Ok(level_from_pole_right(PoleDatum { x_pole, v }, cfg)?.0), y_l)
}

/// Minimum abscissa of the solution with a pole at x0 and minimum value y_l
/// (the infimum over all solutions regular at x0 with that level).
pub fn cal_x_min(x0: f64, y_l: f64, cfg: &SolveConfig) -> Result<f64> {
    if x0 > 0.0 {
        return Err(Error::Domain("cal_x_min needs x0 <= 0".into()));
    }
    let v = v_from_level(x0, y_l, cfg)?;
    Ok(level_from_pole(PoleDatum { x_pole: x0, v }, cfg)?.1)
}

/// Left pole of the solution with a right pole at x0 and minimum value y_l
/// (the infimum of interval left ends over that level).
pub fn cal_x(x0: f64, y_l: f64, cfg: &SolveConfig) -> Result<f64> {
    if x0 > 0.0 {
        return Err(Error::Domain("cal_x needs x0 <= 0".into()));
    }
    let traj = cal_x_witness(x0, y_l, cfg)?;
    Ok(traj.interval.a)
}

pub(crate) fn cal_x_witness(x0: f64, y_l: f64, cfg: &SolveConfig) -> Result<Trajectory> {
    let v = v_from_level(x0, y_l, cfg)?;
    integrate_from_pole(x0, v, Direction::Left, cfg)
}

/// Minimum abscissa and right pole of the solution with a left pole at x0
/// and minimum value y_l (the supremum over solutions regular at x0).
/// Inverse to [`cal_x`]: x0 = cal_x(var_xi(x0, y_l).1, y_l).
pub fn var_xi(x0: f64, y_l: f64, cfg: &SolveConfig) -> Result<(f64, f64)> {
    let traj = var_xi_witness(x0, y_l, cfg)?;
    let (x_min, _) = traj
        .minimum()
        .ok_or_else(|| Error::Domain("right-launched solution has no interior minimum".into()))?;
    let (xp, _) = traj
        .right_pole()
        .ok_or_else(|| Error::Domain("right-launched solution has no right pole".into()))?;
    Ok((x_min, xp))
}

pub(crate) fn var_xi_witness(x0: f64, y_l: f64, cfg: &SolveConfig) -> Result<Trajectory> {
    let v = v_from_level_right(x0, y_l, cfg)?;
    integrate_from_pole(x0, v, Direction::Right, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SolveConfig {
        SolveConfig::default()
    }

    #[test]
    fn tabulated_slopes() {
        let f = slope_f(0.0, 0.2, 0.1, Side::MinLeft, &cfg()).unwrap();
        assert!((f - 0.270736).abs() < 1e-6, "f = {f}");
        let f2 = slope_f(-2.0, 600.0, -300.0, Side::MinLeft, &cfg()).unwrap();
        assert!((f2 - 31176.973126).abs() < 1e-4, "f = {f2}");
    }

    #[test]
    fn slope_vanishes_on_the_diagonal() {
        for (x0, y0) in [(0.0, 0.3), (-2.0, -1.0), (-5.0, 10.0)] {
            assert_eq!(slope_f(x0, y0, y0, Side::MinLeft, &cfg()).unwrap(), 0.0);
        }
    }

    #[test]
    fn right_side_slope_is_negative_and_hits_level() {
        let mu = slope_f(-2.0, 1.0, 0.5, Side::MinRight, &cfg()).unwrap();
        assert!(mu < 0.0);
        let (xm, ym) = achieved_min(-2.0, 1.0, mu, Side::MinRight, &cfg()).unwrap();
        assert!(xm > -2.0);
        assert!((ym - 0.5).abs() < 1e-9);
    }

    #[test]
    fn symmetry_defect_values() {
        let d = delta_sym(0.0, 0.2, 0.1, Side::MinLeft, &cfg()).unwrap();
        assert!((d - 0.004050).abs() < 1e-6, "delta = {d}");
        let d2 = delta_sym(-3.0, 10.0, -5.0, Side::MinLeft, &cfg()).unwrap();
        assert!((d2 - 0.022622).abs() < 1e-6, "delta = {d2}");
        // exact zeros on the (anti)diagonal
        for (y0, yl) in [(0.7, 0.7), (0.7, -0.7)] {
            let d = delta_sym(-1.0, y0, yl, Side::MinLeft, &cfg()).unwrap();
            assert!(d.abs() < 1e-9, "delta = {d}");
        }
    }

    #[test]
    fn pole_to_level_matches_tables() {
        let (yl, xm) = level_from_pole(PoleDatum { x_pole: 0.0, v: 0.125565964 }, &cfg()).unwrap();
        assert!((yl - (-0.307468294)).abs() < 1e-6);
        assert!((xm - (-2.055703500)).abs() < 1e-6);
        let (yl, xm) = level_from_pole(PoleDatum { x_pole: 0.0, v: 0.0 }, &cfg()).unwrap();
        assert!((yl - (-0.423460899)).abs() < 1e-6);
        assert!((xm - (-2.044984309)).abs() < 1e-6);
        let (yl, xm) = level_from_pole(PoleDatum { x_pole: -1.0, v: -0.064360748 }, &cfg()).unwrap();
        assert!((yl - (-0.381066130)).abs() < 1e-6);
        assert!((xm - (-2.853609725)).abs() < 1e-6);
    }

    #[test]
    fn level_inversion_round_trips() {
        let v = v_from_level(0.0, -0.307468294, &cfg()).unwrap();
        assert!((v - 0.125565964).abs() < 1e-7, "v = {v}");
        let v2 = v_from_level(-1.0, -1.5, &cfg()).unwrap();
        let (yl, _) = level_from_pole(PoleDatum { x_pole: -1.0, v: v2 }, &cfg()).unwrap();
        assert!((yl - (-1.5)).abs() < 1e-9);
        let v3 = v_from_level(0.0, -0.741427, &cfg()).unwrap();
        assert!((v3 - (-0.518045)).abs() < 1e-5, "v = {v3}");
    }

    #[test]
    fn level_pole_min_reproduces_tables_and_monotonicity() {
        let a = cal_x_min(0.0, -0.307468294, &cfg()).unwrap();
        assert!((a - (-2.055703500)).abs() < 1e-7);
        let b = cal_x_min(0.0, -0.423460899, &cfg()).unwrap();
        assert!((b - (-2.044984309)).abs() < 1e-7);
        let m1 = cal_x_min(-1.0, -0.3, &cfg()).unwrap();
        let m2 = cal_x_min(0.0, -0.3, &cfg()).unwrap();
        assert!(m1 < m2);
    }

    #[test]
    fn level_pole_left_end_reproduces_tables() {
        let a = cal_x(0.0, -0.322633511, &cfg()).unwrap();
        assert!((a - (-3.915285797)).abs() < 1e-7, "a = {a}");
        let b = cal_x(0.0, -0.423460899, &cfg()).unwrap();
        assert!((b - (-3.902470099)).abs() < 1e-7, "b = {b}");
        let c = cal_x(-1.0, -0.381066130, &cfg()).unwrap();
        assert!((c - (-4.589970403)).abs() < 1e-7, "c = {c}");
    }

    #[test]
    fn right_family_inverts_left_family() {
        // var_xi at the tabulated left pole of the maximal solution
        let (xi_min, xi) = var_xi(-3.915285797, -0.338834697, &cfg()).unwrap();
        assert!((xi_min - (-2.055297172)).abs() < 1e-6, "xi_min = {xi_min}");
        assert!((xi - (-0.000570546)).abs() < 1e-5, "xi = {xi}");
        // inverse identity through cal_x
        let (_, xi) = var_xi(-5.0, -1.0, &cfg()).unwrap();
        let back = cal_x(xi, -1.0, &cfg()).unwrap();
        assert!((back - (-5.0)).abs() < 1e-8, "back = {back}");
        // the shared-level identity between the two minimum abscissas
        let x = cal_x(0.0, -0.5, &cfg()).unwrap();
        let (xi_min, _) = var_xi(x, -0.5, &cfg()).unwrap();
        let direct = cal_x_min(0.0, -0.5, &cfg()).unwrap();
        assert!((xi_min - direct).abs() < 1e-8);
    }
}
