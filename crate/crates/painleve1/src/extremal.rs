//! The global extremal functions: X_min (leftmost minimum), X_- (leftmost
//! pole under zero initial slope), X (left end of the shortest possible
//! interval of existence), their right-side inverses Xi_min and Xi, and the
//! maximal solution realizing X.
//!
//! Each one is a one-dimensional optimization of a level function over the
//! pole parameter (or over the initial value, for X_-). The scan+refine
//! machinery reports multiple local optima instead of silently picking one;
//! uniqueness is conjectural for the minimum-side functions.

use std::sync::OnceLock;

use crate::integrate::{integrate_from_pole, integrate_ivp, Direction, SolveConfig, Trajectory};
use crate::level::PoleDatum;
use crate::opt::{polish_extremum, scan_minimize_expanding};
use crate::{Error, Result};

/// Value of an extremal function together with the optimizer and the
/// trajectory realizing it.
#[derive(Debug, Clone)]
pub struct ExtremalResult {
    pub value: f64,
    /// Optimal level y_l for X and X_min, optimal initial value y0 for X_-,
    /// optimal level for the Xi pair.
    pub arg: f64,
    pub witness: Trajectory,
    /// Distinct local optima were detected by the multi-start scan.
    pub multiple_optima: bool,
}

fn optimize_pole_family<F>(x0: f64, _cfg: &SolveConfig, eval: F) -> Result<(f64, bool)>
where
    F: Fn(f64) -> Result<f64> + Copy,
{
    let f = |v: f64| eval(v).unwrap_or(f64::INFINITY);
    // the useful |y_l| is capped by the decay of the pole gap, but the
    // matching v range grows like |x0|^(3/2); expand until interior
    let half = 4.0f64.max(x0.abs().powf(1.5) / 4.0);
    let report = scan_minimize_expanding(f, -half, half, 64, 1e-9, 14);
    let v0 = report.best().arg;
    let width = 1e-3f64.max(v0.abs() * 1e-4);
    let v_star = polish_extremum(f, v0, width);
    Ok((v_star, report.multiple()))
}

/// X_min(x0): infimum of minimum abscissas over all solutions regular at
/// x0 with nonnegative slope; realized by a pole solution.
pub fn x_min_fn(x0: f64, cfg: &SolveConfig) -> Result<ExtremalResult> {
    let x0 = clamp_nonpositive(x0)?;
    let eval = |v: f64| {
        Ok(crate::level::level_from_pole(PoleDatum { x_pole: x0, v }, cfg)?.1)
    };
    let (v_star, multiple) = optimize_pole_family(x0, cfg, eval)?;
    let witness = integrate_from_pole(x0, v_star, Direction::Left, cfg)?;
    let (x_min, y_l) = witness.minimum().ok_or_else(no_minimum)?;
    Ok(ExtremalResult { value: x_min, arg: y_l, witness, multiple_optima: multiple })
}

/// X(x0): infimum of interval left ends over all solutions regular at x0;
/// realized by the (unique) maximal solution with interval (X(x0), x0).
pub fn x_fn(x0: f64, cfg: &SolveConfig) -> Result<ExtremalResult> {
    let x0 = clamp_nonpositive(x0)?;
    let eval = |v: f64| {
        let t = integrate_from_pole(x0, v, Direction::Left, cfg)?;
        t.left_pole()
            .map(|(x, _)| x)
            .ok_or_else(|| Error::Domain("pole family member lost its left pole".into()))
    };
    let (v_star, multiple) = optimize_pole_family(x0, cfg, eval)?;
    let witness = integrate_from_pole(x0, v_star, Direction::Left, cfg)?;
    let value = witness.interval.a;
    let arg = witness.minimum().ok_or_else(no_minimum)?.1;
    Ok(ExtremalResult { value, arg, witness, multiple_optima: multiple })
}

/// X_-(x0): infimum of interval left ends over solutions with y'(x0) = 0;
/// the infimum over nonpositive slopes is achieved at slope zero.
pub fn x_minus_fn(x0: f64, cfg: &SolveConfig) -> Result<ExtremalResult> {
    let x0 = clamp_nonpositive(x0)?;
    let eval = |y0: f64| -> Result<f64> {
        let t = integrate_ivp(x0, y0, 0.0, Direction::Left, cfg)?;
        t.left_pole()
            .map(|(x, _)| x)
            .ok_or_else(|| Error::Domain("zero-slope solution lost its left pole".into()))
    };
    let f = |y0: f64| eval(y0).unwrap_or(f64::INFINITY);
    let half = 3.0 * (1.0 + x0.abs()).sqrt();
    let report = scan_minimize_expanding(f, -half, half, 64, 1e-9, 12);
    let y0_star = polish_extremum(f, report.best().arg, 1e-3f64.max(report.best().arg.abs() * 1e-4));
    let witness = integrate_ivp(x0, y0_star, 0.0, Direction::Left, cfg)?;
    Ok(ExtremalResult {
        value: witness.interval.a,
        arg: y0_star,
        witness,
        multiple_optima: report.multiple(),
    })
}

/// The two right-side inverse functions at x0 <= X(0): Xi_min (supremum of
/// minimum abscissas over right solutions, inverse of X_-) and Xi (supremum
/// of interval right ends, inverse of X).
pub fn xi_fns(x0: f64, cfg: &SolveConfig) -> Result<(ExtremalResult, ExtremalResult)> {
    let edge = x_at_zero(cfg);
    // accept the boundary itself when given to finite precision
    let x0 = if x0 > edge && x0 - edge < 1e-6 { edge } else { x0 };
    if x0 > edge {
        return Err(Error::Domain(format!("xi functions need x0 <= X(0) = {edge}")));
    }
    let eval_min = |v: f64| -> Result<f64> {
        let t = integrate_from_pole(x0, v, Direction::Right, cfg)?;
        Ok(-t.minimum().ok_or_else(no_minimum)?.0)
    };
    let eval_end = |v: f64| -> Result<f64> {
        let t = integrate_from_pole(x0, v, Direction::Right, cfg)?;
        Ok(-t.right_pole().map(|(x, _)| x).ok_or_else(no_minimum)?)
    };
    let (v_min_star, mult_min) = optimize_pole_family(x0, cfg, eval_min)?;
    let (v_end_star, mult_end) = optimize_pole_family(x0, cfg, eval_end)?;
    let w_min = integrate_from_pole(x0, v_min_star, Direction::Right, cfg)?;
    let w_end = integrate_from_pole(x0, v_end_star, Direction::Right, cfg)?;
    let xi_min = ExtremalResult {
        value: w_min.minimum().ok_or_else(no_minimum)?.0,
        arg: w_min.minimum().unwrap().1,
        witness: w_min,
        multiple_optima: mult_min,
    };
    let xi = ExtremalResult {
        value: w_end.interval.b,
        arg: w_end.minimum().ok_or_else(no_minimum)?.1,
        witness: w_end,
        multiple_optima: mult_end,
    };
    Ok((xi_min, xi))
}

/// The unique solution with interval of existence (X(x0), x0).
pub fn maximal_solution(x0: f64, cfg: &SolveConfig) -> Result<Trajectory> {
    Ok(x_fn(x0, cfg)?.witness)
}

/// X(0), cached: the right end of the Xi domain.
pub fn x_at_zero(cfg: &SolveConfig) -> f64 {
    static X0: OnceLock<f64> = OnceLock::new();
    *X0.get_or_init(|| x_fn(0.0, cfg).expect("X(0) evaluation failed").value)
}

// round-trip compositions land a few ulps past the boundary; forgive that
fn clamp_nonpositive(x0: f64) -> Result<f64> {
    if x0 > 1e-6 {
        Err(Error::Domain("extremal functions are defined for x0 <= 0".into()))
    } else {
        Ok(x0.min(0.0))
    }
}

fn no_minimum() -> Error {
    Error::Domain("witness trajectory has no interior minimum".into())
}
