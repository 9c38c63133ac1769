//! Dirichlet boundary-value solvability on segments of the non-positive
//! semi-axis: the boundary function Z, its level-resolved crossing function,
//! the 0/1/2 solution count, two-branch shooting for both solutions, and
//! intersection counting for integral curves.
//!
//! Z(x0, y0, y_up) is the leftmost abscissa where any solution through
//! (x0, y0) attains the value y_up. It is computed through the level
//! parametrization: for each level y_l the crossing sits on the far side of
//! the solution's minimum, and the crossing abscissa has a unique interior
//! minimum over levels, attained at the level of the maximal solution of
//! the segment.

use serde::Serialize;

use crate::integrate::{
    integrate_both, integrate_ivp_opts, Direction, MarchOpts, SolveConfig, Trajectory,
};
use crate::level::{slope_f, Side};
use crate::opt::{brent_root, polish_extremum, scan_minimize_expanding};
use crate::{Error, Result};

/// Two boundary points with x1 < x0 <= 0.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BvpProblem {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y_up: f64,
}

impl BvpProblem {
    pub fn new(x0: f64, y0: f64, x1: f64, y_up: f64) -> Result<Self> {
        if !(x1 < x0 && x0 <= 0.0) {
            return Err(Error::Domain("boundary points need x1 < x0 <= 0".into()));
        }
        Ok(BvpProblem { x0, y0, x1, y_up })
    }
}

/// Solutions of a boundary problem, with the Z value that decided the count.
#[derive(Debug, Clone, Serialize)]
pub struct BvpOutcome {
    pub count: usize,
    pub solutions: Vec<Trajectory>,
    pub z_value: f64,
    /// Initial slopes at x0 of the returned solutions.
    pub slopes: Vec<f64>,
}

/// Declared-equal tolerance for the x1 = Z boundary case of the trichotomy.
pub const TIE_TOL: f64 = 1e-9;

/// Crossing abscissa of the level y_up on the far (left-of-minimum) branch
/// of the solution through (x0, y0) with minimum value y_l left of x0.
///
/// The matching case y_l = y0 returns x0 by convention.
pub fn cal_z(x0: f64, y0: f64, y_up: f64, y_l: f64, cfg: &SolveConfig) -> Result<f64> {
    if y_l > y0.min(y_up) {
        return Err(Error::Domain(format!(
            "level y_l = {y_l} must not exceed min(y0, y_up) = {}",
            y0.min(y_up)
        )));
    }
    if y_l == y0 {
        return Ok(x0);
    }
    let slope = slope_f(x0, y0, y_l, Side::MinLeft, cfg)?;
    if y_l == y_up {
        // tangent crossing exactly at the minimum
        return crate::level::achieved_min_abscissa(x0, y0, slope, cfg);
    }
    let opts = MarchOpts { watch_level: Some(y_up), ..Default::default() };
    let traj = integrate_ivp_opts(x0, y0, slope, Direction::Left, cfg, opts)?;
    let (x_min, _) = traj
        .minimum()
        .ok_or_else(|| Error::Domain("level solution has no minimum left of x0".into()))?;
    traj.level_crossings
        .iter()
        .map(|c| c.0)
        .find(|&x| x < x_min)
        .ok_or_else(|| Error::Domain(format!("level {y_up} not crossed left of the minimum")))
}

/// Z value with the optimal level, the slope at x0, and the witness
/// trajectory (the maximal solution of the segment [Z, x0]).
#[derive(Debug, Clone)]
pub struct ZResult {
    pub value: f64,
    pub y_l: f64,
    pub slope: f64,
    pub witness: Trajectory,
}

/// Z(x0, y0, y_up): infimum over all solutions through (x0, y0) of the
/// abscissa where the value y_up is attained. The witness solution achieves
/// its global minimum inside [Z, x0].
pub fn z_fn(x0: f64, y0: f64, y_up: f64, cfg: &SolveConfig) -> Result<ZResult> {
    if x0 > 0.0 {
        return Err(Error::Domain("z_fn needs x0 <= 0".into()));
    }
    let cap = y0.min(y_up);
    let f = |y_l: f64| {
        if y_l >= cap {
            f64::INFINITY
        } else {
            cal_z(x0, y0, y_up, y_l, cfg).unwrap_or(f64::INFINITY)
        }
    };
    // the optimal level is the (negative) minimum value of the segment's
    // maximal solution, well below min(y0, y_up, 0)
    let hi = cap.min(0.0) - 1e-3 * (1.0 + cap.abs().min(1.0));
    let lo = hi - 6.0 * (1.0 + x0.abs()).sqrt();
    let report = scan_minimize_expanding(&f, lo, hi, 48, 1e-9, 12);
    let y_l_star = polish_extremum(&f, report.best().arg, 1e-3);
    let value = cal_z(x0, y0, y_up, y_l_star, cfg)?;
    let slope = slope_f(x0, y0, y_l_star, Side::MinLeft, cfg)?;
    let witness = left_trajectory(x0, y0, slope, cfg)?;
    Ok(ZResult { value, y_l: y_l_star, slope, witness })
}

/// The 0/1/2 trichotomy on x1 against Z(x0, y0, y_up).
pub fn count_solutions(p: &BvpProblem, cfg: &SolveConfig) -> Result<usize> {
    let z = z_fn(p.x0, p.y0, p.y_up, cfg)?.value;
    Ok(count_against_z(p.x1, z))
}

pub fn count_against_z(x1: f64, z: f64) -> usize {
    if (x1 - z).abs() <= TIE_TOL {
        1
    } else if x1 < z {
        0
    } else {
        2
    }
}

/// Value at x1 of the solution through (x0, y0) with the given slope;
/// infinite when a pole interrupts the march.
pub(crate) fn shoot_value(x0: f64, y0: f64, slope: f64, x1: f64, cfg: &SolveConfig) -> f64 {
    let opts = MarchOpts { clip: Some(x1), ..Default::default() };
    match integrate_ivp_opts(x0, y0, slope, Direction::Left, cfg, opts) {
        Ok(t) => t.end_state.map(|s| s.y).unwrap_or(f64::INFINITY),
        Err(_) => f64::INFINITY,
    }
}

/// Solve the boundary problem. With two solutions, the boundary value as a
/// function of the initial slope is U-shaped over the surviving slope
/// window, so both roots are bracketed from its minimizer outward; the
/// lower branch is cross-checked against the level-space root of the
/// crossing function, which decreases monotonically to Z.
pub fn solve_bvp(p: &BvpProblem, cfg: &SolveConfig) -> Result<BvpOutcome> {
    let z = z_fn(p.x0, p.y0, p.y_up, cfg)?;
    let count = count_against_z(p.x1, z.value);
    if count == 0 {
        return Ok(BvpOutcome { count, solutions: vec![], z_value: z.value, slopes: vec![] });
    }
    if count == 1 {
        check_residual(p, z.slope, cfg)?;
        return Ok(BvpOutcome {
            count,
            solutions: vec![z.witness],
            z_value: z.value,
            slopes: vec![z.slope],
        });
    }

    let r = |mu: f64| shoot_value(p.x0, p.y0, mu, p.x1, cfg) - p.y_up;
    let mu_min = {
        let f = |mu: f64| shoot_value(p.x0, p.y0, mu, p.x1, cfg);
        let half = 2.0 + 2.0 * z.slope.abs();
        let report = scan_minimize_expanding(f, z.slope - half, z.slope + half, 48, 1e-9, 8);
        polish_extremum(f, report.best().arg, 1e-3 * (1.0 + report.best().arg.abs()))
    };
    if r(mu_min) > 0.0 {
        return Err(Error::ToleranceFailure(format!(
            "interior count is 2 but the shooting minimum misses the level by {}",
            r(mu_min)
        )));
    }
    let upper_slope = bracket_root_outward(&r, mu_min, -1.0)?;
    let lower_slope = bracket_root_outward(&r, mu_min, 1.0)?;
    // cross-check the lower branch against the level-space root
    let lower_level_slope = lower_branch_by_level(p, z.y_l, cfg)?;
    if (lower_level_slope - lower_slope).abs() > 1e-6 * (1.0 + lower_slope.abs()) {
        return Err(Error::ToleranceFailure(format!(
            "slope-space and level-space lower roots disagree: {lower_slope} vs {lower_level_slope}"
        )));
    }
    for mu in [upper_slope, lower_slope] {
        check_residual(p, mu, cfg)?;
    }
    let sols = vec![
        left_trajectory(p.x0, p.y0, upper_slope, cfg)?,
        left_trajectory(p.x0, p.y0, lower_slope, cfg)?,
    ];
    Ok(BvpOutcome {
        count,
        solutions: sols,
        z_value: z.value,
        slopes: vec![upper_slope, lower_slope],
    })
}

/// Root of r on one side of the shooting minimizer (r < 0 there, +inf far
/// out where the pole reaches x1).
fn bracket_root_outward(r: &dyn Fn(f64) -> f64, mu_min: f64, side: f64) -> Result<f64> {
    let mut step = 0.25 * (1.0 + mu_min.abs());
    let mut inner = mu_min;
    let mut outer = mu_min + side * step;
    let mut r_outer = r(outer);
    let mut iter = 0;
    while r_outer <= 0.0 {
        inner = outer;
        step *= 2.0;
        outer = mu_min + side * step;
        r_outer = r(outer);
        iter += 1;
        if iter > 60 {
            return Err(Error::BracketFailure("no sign change on shooting branch".into()));
        }
    }
    let r_inner = r(inner);
    if r_inner > 0.0 {
        return Err(Error::BracketFailure("shooting bracket lost the root".into()));
    }
    // r jumps to +inf where the pole enters; bisect on the sign first, then
    // the finite piece is smooth enough for brent
    let finite = |mu: f64| {
        let v = r(mu);
        if v.is_finite() {
            v
        } else {
            f64::MAX
        }
    };
    Ok(brent_root(finite, inner, outer, r_inner, r_outer.min(f64::MAX), 1e-13, 1e-10))
}

/// Lower-branch slope found in level space: the level whose far-branch
/// crossing of y_up sits exactly at x1.
fn lower_branch_by_level(p: &BvpProblem, y_lm: f64, cfg: &SolveConfig) -> Result<f64> {
    let g = |y_l: f64| -> f64 {
        cal_z(p.x0, p.y0, p.y_up, y_l, cfg)
            .map(|zx| zx - p.x1)
            .unwrap_or(f64::NAN)
    };
    // crossing decreases from x0 toward Z as the level rises to the optimum
    let mut hi = y_lm;
    let g_hi = g(hi);
    if g_hi > 0.0 {
        return Err(Error::BracketFailure(
            "optimal level does not reach past x1; trichotomy disagrees".into(),
        ));
    }
    let mut lo = y_lm - 1.0;
    let mut g_lo = g(lo);
    let mut iter = 0;
    while g_lo < 0.0 {
        hi = lo;
        lo = y_lm - (y_lm - lo) * 2.0;
        g_lo = g(lo);
        iter += 1;
        if iter > 60 {
            return Err(Error::BracketFailure("level-space bracket overflow".into()));
        }
    }
    let y_l = brent_root(g, lo, hi, g_lo, g(hi), 1e-13, 1e-11);
    slope_f(p.x0, p.y0, y_l, Side::MinLeft, cfg)
}

fn left_trajectory(x0: f64, y0: f64, slope: f64, cfg: &SolveConfig) -> Result<Trajectory> {
    match integrate_both(x0, y0, slope, cfg) {
        Ok(t) => Ok(t),
        // the right side may be pole-free; the left part carries the segment
        Err(Error::SpanExceeded { .. }) => {
            integrate_ivp_opts(x0, y0, slope, Direction::Left, cfg, MarchOpts::default())
        }
        Err(e) => Err(e),
    }
}

fn check_residual(p: &BvpProblem, slope: f64, cfg: &SolveConfig) -> Result<()> {
    let res = (shoot_value(p.x0, p.y0, slope, p.x1, cfg) - p.y_up).abs();
    if res > 1e-8 {
        return Err(Error::ToleranceFailure(format!(
            "boundary residual {res} at slope {slope}"
        )));
    }
    Ok(())
}

/// Leftmost minimum abscissa over all solutions through (x0, y0) with
/// nonnegative slope: the anchored form of the global X_min, realized by a
/// one-dimensional minimization over the level.
pub fn x_min_xy(x0: f64, y0: f64, cfg: &SolveConfig) -> Result<(f64, f64)> {
    let f = |y_l: f64| {
        if y_l >= y0 {
            return f64::INFINITY;
        }
        slope_f(x0, y0, y_l, Side::MinLeft, cfg)
            .and_then(|mu| crate::level::achieved_min(x0, y0, mu, Side::MinLeft, cfg))
            .map(|(x, _)| x)
            .unwrap_or(f64::INFINITY)
    };
    let hi = y0 - 1e-3 * (1.0 + y0.abs());
    let lo = hi - 6.0 * (1.0 + x0.abs()).sqrt();
    let report = scan_minimize_expanding(&f, lo, hi, 48, 1e-9, 10);
    let y_l_star = polish_extremum(&f, report.best().arg, 1e-3);
    Ok((f(y_l_star), y_l_star))
}

/// Count intersections of two solutions inside the window, including the
/// shared-pole (point at infinity) convention at the window ends.
///
/// The finite part marches the joint four-dimensional system from the right
/// edge and counts sign changes of the difference. A margin of one patch
/// radius is kept from any pole end, where the leading Laurent terms keep
/// the difference single-signed.
pub fn intersection_count(
    a: &Trajectory,
    b: &Trajectory,
    window: (f64, f64),
    cfg: &SolveConfig,
) -> Result<usize> {
    let (alpha, beta) = window;
    // the negated form also rejects NaN windows
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(alpha < beta) {
        return Err(Error::Domain("window must be nonempty".into()));
    }
    let mut count = 0;
    let margin = 0.30;
    let shared_pole = |end_a: Option<(f64, f64)>, end_b: Option<(f64, f64)>, at: f64| -> bool {
        match (end_a, end_b) {
            (Some((xa, _)), Some((xb, _))) => (xa - xb).abs() <= 1e-9 && (xa - at).abs() <= 1e-6,
            _ => false,
        }
    };
    let mut lo = alpha;
    let mut hi = beta;
    if shared_pole(a.left_pole(), b.left_pole(), alpha) {
        count += 1;
        lo = alpha + margin;
    } else {
        lo = lo.max(a.interval.a + 0.5 * margin).max(b.interval.a + 0.5 * margin);
    }
    if shared_pole(a.right_pole(), b.right_pole(), beta) {
        count += 1;
        hi = beta - margin;
    } else {
        hi = hi.min(a.interval.b - 0.5 * margin).min(b.interval.b - 0.5 * margin);
    }
    if hi - lo < 1e-6 {
        return Ok(count);
    }
    let sa = crate::integrate::state_at(&a.origin, hi, cfg)?;
    let sb = crate::integrate::state_at(&b.origin, hi, cfg)?;
    let f = |x: f64, s: &[f64; 4]| [s[1], 6.0 * s[0] * s[0] - x, s[3], 6.0 * s[2] * s[2] - x];
    let mut x = hi;
    let mut s = [sa.y, sa.dy, sb.y, sb.dy];
    let mut k1 = f(x, &s);
    let mut h = -1e-6;
    let mut diff = s[0] - s[2];
    while x > lo + 1e-12 {
        let cap = x - lo;
        let acc = crate::ode::advance(&f, x, &s, &k1, h, cap, cfg.rk_rel_tol, cfg.rk_abs_tol)
            .ok_or(Error::StepFailure { x })?;
        x += acc.h;
        s = acc.y;
        k1 = acc.k_end;
        h = acc.h_next;
        let d = s[0] - s[2];
        if diff * d < 0.0 {
            count += 1;
        }
        if d != 0.0 {
            diff = d;
        }
        // past this size both branches are pinned to their poles
        if s[0].abs() > 1e6 || s[2].abs() > 1e6 {
            break;
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremal::{x_fn, x_min_fn};
    use crate::integrate::{integrate_from_pole, Direction, SolveConfig};

    fn cfg() -> SolveConfig {
        SolveConfig::default()
    }

    #[test]
    fn matching_level_returns_x0() {
        for (x0, y0, yup) in [(0.0, 0.5, 1.0), (-2.0, 1.5, 2.0)] {
            let z = cal_z(x0, y0, yup, y0, &cfg()).unwrap();
            assert_eq!(z, x0);
        }
    }

    #[test]
    fn crossing_lies_between_the_pole_bound_and_x0() {
        let z = cal_z(0.0, 0.5, 0.5, -0.3, &cfg()).unwrap();
        let xl = crate::level::cal_x(0.0, -0.3, &cfg()).unwrap();
        assert!(xl < z && z < 0.0, "z = {z}, cal_x = {xl}");
    }

    #[test]
    fn crossing_is_monotone_in_the_boundary_value() {
        let z1 = cal_z(0.0, 0.5, 1.0, -0.3, &cfg()).unwrap();
        let z0 = cal_z(0.0, 0.5, 0.5, -0.3, &cfg()).unwrap();
        assert!(z1 < z0, "z(y_up=1) = {z1} vs z(y_up=0.5) = {z0}");
    }

    #[test]
    fn z_sits_between_x_and_x0() {
        let z = z_fn(0.0, 1.0, 1.0, &cfg()).unwrap();
        let x = x_fn(0.0, &cfg()).unwrap().value;
        assert!(x < z.value && z.value < 0.0, "Z = {}", z.value);
    }

    #[test]
    fn large_boundaries_drive_z_toward_x() {
        let x0val = x_fn(0.0, &cfg()).unwrap().value;
        let mut prev = 0.0;
        for y in [1e2, 1e3, 1e4] {
            let z = z_fn(0.0, y, y, &cfg()).unwrap().value;
            assert!(z < prev, "not decreasing at y = {y}");
            prev = z;
        }
        assert!((prev - x0val).abs() < 2e-2, "Z(1e4) = {prev} vs X(0) = {x0val}");
    }

    #[test]
    fn trichotomy_counts() {
        // -5 < X(0) <= Z, so nothing reaches x1 = -5
        let p = BvpProblem::new(0.0, 0.2, -5.0, 0.1).unwrap();
        assert_eq!(count_solutions(&p, &cfg()).unwrap(), 0);
        let p2 = BvpProblem::new(0.0, 1.0, -1.0, 1.0).unwrap();
        assert_eq!(count_solutions(&p2, &cfg()).unwrap(), 2);
        // exactly on the boundary
        let z = z_fn(0.0, 0.7, 0.4, &cfg()).unwrap().value;
        let p3 = BvpProblem::new(0.0, 0.7, z, 0.4).unwrap();
        assert_eq!(count_solutions(&p3, &cfg()).unwrap(), 1);
    }

    #[test]
    fn two_solutions_with_small_residuals() {
        let p = BvpProblem::new(0.0, 1.0, -1.0, 1.0).unwrap();
        let out = solve_bvp(&p, &cfg()).unwrap();
        assert_eq!(out.count, 2);
        assert_eq!(out.solutions.len(), 2);
        for mu in &out.slopes {
            let res = (shoot_value(0.0, 1.0, *mu, -1.0, &cfg()) - 1.0).abs();
            assert!(res < 1e-8, "residual {res}");
        }
        // both boundary points are intersections; none may appear strictly
        // between them
        let eps = 1e-3;
        let interior = intersection_count(
            &out.solutions[0],
            &out.solutions[1],
            (p.x1 + eps, p.x0 - eps),
            &cfg(),
        )
        .unwrap();
        assert_eq!(interior, 0);
    }

    #[test]
    fn one_solution_case_returns_the_witness() {
        let z = z_fn(0.0, 0.7, 0.4, &cfg()).unwrap();
        let p = BvpProblem::new(0.0, 0.7, z.value, 0.4).unwrap();
        let out = solve_bvp(&p, &cfg()).unwrap();
        assert_eq!(out.count, 1);
        assert!((out.slopes[0] - z.slope).abs() < 1e-9);
    }

    #[test]
    fn slopes_straddle_the_maximal_solution() {
        // Z(0, 0.2, 0.5) = -1.9939 by brute-force slope sweep, so any
        // x1 in (Z, 0) admits exactly two solutions
        let p = BvpProblem::new(0.0, 0.2, -1.5, 0.5).unwrap();
        let z = z_fn(0.0, 0.2, 0.5, &cfg()).unwrap();
        assert!((z.value - (-1.9939)).abs() < 1e-3, "Z = {}", z.value);
        let out = solve_bvp(&p, &cfg()).unwrap();
        assert_eq!(out.count, 2);
        assert!(out.slopes[0] < z.slope && z.slope < out.slopes[1]);
    }

    #[test]
    fn tabulated_family_intersections_stay_within_two() {
        // members of the pole family at the origin share the pole there
        let a = integrate_from_pole(0.0, 0.110489160, Direction::Left, &cfg()).unwrap();
        let b = integrate_from_pole(0.0, 0.0, Direction::Left, &cfg()).unwrap();
        let window = (a.interval.a.max(b.interval.a), 0.0);
        let n = intersection_count(&a, &b, window, &cfg()).unwrap();
        assert!((1..=2).contains(&n), "count = {n}");
        let c = x_min_fn(0.0, &cfg()).unwrap().witness;
        let w2 = (a.interval.a.max(c.interval.a), 0.0);
        let n2 = intersection_count(&a, &c, w2, &cfg()).unwrap();
        assert!(n2 <= 2);
    }
}
