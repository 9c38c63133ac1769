//! Scalar root finding and 1-D minimization used by the shooting and
//! extremal-function layers.

/// Brent's method on a sign-changing bracket `[a, b]`.
///
/// `fa` and `fb` must have opposite signs (a zero endpoint is returned
/// as-is). Iterates until the bracket shrinks below `xtol` or the residual
/// magnitude drops below `ftol`.
pub fn brent_root<F>(mut f: F, a: f64, b: f64, fa: f64, fb: f64, xtol: f64, ftol: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    debug_assert!(fa * fb < 0.0, "brent_root needs a sign change");
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.abs() > fc.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 || fb.abs() < ftol {
            return b;
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min(e * q / 2.0 * 2.0) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 {
            d
        } else if xm > 0.0 {
            tol1
        } else {
            -tol1
        };
        fb = f(b);
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    b
}

/// Golden-section minimization on `[a, b]`, returning `(x_min, f_min)`.
pub fn golden_min<F>(mut f: F, a: f64, b: f64, xtol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    const R: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = if a < b { (a, b) } else { (b, a) };
    let mut x1 = b - R * (b - a);
    let mut x2 = a + R * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..400 {
        if (b - a).abs() <= xtol * (1.0 + x1.abs().max(x2.abs())) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - R * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + R * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// A local minimum found by [`scan_minimize`].
#[derive(Debug, Clone, Copy)]
pub struct LocalMin {
    pub arg: f64,
    pub value: f64,
}

/// Outcome of a grid scan plus golden-section refinement.
///
/// `minima` holds every refined local minimum, best first. More than one
/// entry separated by over 1e-6 in the argument means the scanned function
/// is not unimodal on the window; callers surface that instead of silently
/// picking one.
#[derive(Debug, Clone)]
pub struct ScanReport {
    pub minima: Vec<LocalMin>,
}

impl ScanReport {
    pub fn best(&self) -> LocalMin {
        self.minima[0]
    }

    pub fn multiple(&self) -> bool {
        self.minima
            .iter()
            .skip(1)
            .any(|m| (m.arg - self.minima[0].arg).abs() > 1e-6)
    }
}

/// Evaluate `f` on an `n`-point grid over `[lo, hi]`, refine every interior
/// grid dip by golden section, and rank the results.
///
/// Non-finite values on the grid are skipped, so the window may safely
/// overhang the domain of `f`.
pub fn scan_minimize<F>(mut f: F, lo: f64, hi: f64, n: usize, xtol: f64) -> ScanReport
where
    F: FnMut(f64) -> f64,
{
    let n = n.max(4);
    let step = (hi - lo) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut minima = Vec::new();
    for i in 0..n {
        let v = vals[i];
        if !v.is_finite() {
            continue;
        }
        let left_up = i == 0 || !vals[i - 1].is_finite() || vals[i - 1] >= v;
        let right_up = i == n - 1 || !vals[i + 1].is_finite() || vals[i + 1] >= v;
        if left_up && right_up {
            let a = if i == 0 { xs[0] } else { xs[i - 1] };
            let b = if i == n - 1 { xs[n - 1] } else { xs[i + 1] };
            let (arg, value) = golden_min(&mut f, a, b, xtol);
            if value.is_finite() {
                minima.push(LocalMin { arg, value });
            }
        }
    }
    if minima.is_empty() {
        // every grid point failed; report the least-bad endpoint
        let (i, v) = vals
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, v)| (i, *v))
            .unwrap();
        minima.push(LocalMin { arg: xs[i], value: v });
    }
    // merge refinements that collapsed onto the same minimum
    minima.sort_by(|a, b| a.value.total_cmp(&b.value));
    let mut merged: Vec<LocalMin> = Vec::new();
    for m in minima {
        if merged.iter().all(|k| (k.arg - m.arg).abs() > 1e-8) {
            merged.push(m);
        }
    }
    ScanReport { minima: merged }
}

/// Refine a local extremizer by root-finding the central-difference
/// derivative around `center`. The difference step is wide enough to keep
/// integrator noise out of the derivative sign, so this localizes the
/// argument far below the sqrt(noise/curvature) floor of value-comparison
/// searches.
pub fn polish_extremum<F>(mut f: F, center: f64, width: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    let h = 3e-6 * (1.0 + center.abs());
    let mut g = |v: f64| f(v + h) - f(v - h);
    let mut lo = center - width;
    let mut hi = center + width;
    let mut g_lo = g(lo);
    let mut g_hi = g(hi);
    if !(g_lo.is_finite() && g_hi.is_finite()) {
        return center;
    }
    // shrink toward center until the derivative changes sign
    for _ in 0..30 {
        if g_lo * g_hi < 0.0 {
            let xtol = 1e-10 * (1.0 + center.abs());
            return brent_root(&mut g, lo, hi, g_lo, g_hi, xtol, 0.0);
        }
        if g_lo.abs() < g_hi.abs() {
            hi = 0.5 * (hi + center);
            g_hi = g(hi);
        } else {
            lo = 0.5 * (lo + center);
            g_lo = g(lo);
        }
        if (hi - lo).abs() < 4.0 * h {
            break;
        }
    }
    center
}

/// Expand `[lo, hi]` outward (doubling) until the scan minimum sits strictly
/// inside, then return the refined report. Guards outer optimizations whose
/// natural argument scale varies with the inputs.
pub fn scan_minimize_expanding<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    n: usize,
    xtol: f64,
    max_doublings: usize,
) -> ScanReport
where
    F: FnMut(f64) -> f64,
{
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..max_doublings {
        let report = scan_minimize(&mut f, lo, hi, n, xtol);
        let arg = report.best().arg;
        let span = hi - lo;
        let edge = span / (n as f64);
        if arg - lo < edge {
            lo -= span;
            continue;
        }
        if hi - arg < edge {
            hi += span;
            continue;
        }
        return report;
    }
    scan_minimize(&mut f, lo, hi, n, xtol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cubic_root() {
        let f = |x: f64| x * x * x - 2.0;
        let r = brent_root(f, 1.0, 2.0, f(1.0), f(2.0), 1e-14, 0.0);
        assert!((r - 2.0f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn golden_min_quartic() {
        let (x, v) = golden_min(|x| (x - 0.3).powi(4) + 1.0, -2.0, 2.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-3);
        assert!((v - 1.0).abs() < 1e-11);
    }

    #[test]
    fn scan_reports_two_minima() {
        let f = |x: f64| (x * x - 1.0).powi(2); // minima at +-1
        let report = scan_minimize(f, -2.0, 2.0, 33, 1e-10);
        assert!(report.multiple());
        assert!(report.minima.len() >= 2);
    }

    #[test]
    fn polish_beats_grid_resolution() {
        let f = |x: f64| (x - 0.123456789).powi(2);
        let x = polish_extremum(f, 0.12, 0.05);
        assert!((x - 0.123456789).abs() < 1e-9);
    }
}
