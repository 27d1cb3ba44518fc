//! Bracketing root finders and a golden-section minimizer.

use crate::error::{Error, Result};

/// Converged root with bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: u32,
}

/// Brent's method (zeroin). `f` returns the function value and, optionally,
/// its derivative; when a derivative is available a Newton step is taken
/// in place of the interpolation step whenever it lands safely inside the
/// current bracket and passes Brent's progress test.
pub fn brent<F>(mut f: F, a: f64, b: f64, xtol: f64, max_iter: u32) -> Result<Root>
where
    F: FnMut(f64) -> Result<(f64, Option<f64>)>,
{
    let (fa, da) = f(a)?;
    let (fb, db) = f(b)?;
    brent_from(&mut f, (a, fa, da), (b, fb, db), xtol, max_iter)
}

/// Same as [`brent`] with the bracket values already known.
pub fn brent_from<F>(
    f: &mut F,
    lo: (f64, f64, Option<f64>),
    hi: (f64, f64, Option<f64>),
    xtol: f64,
    max_iter: u32,
) -> Result<Root>
where
    F: FnMut(f64) -> Result<(f64, Option<f64>)>,
{
    let (mut a, mut fa, mut da) = lo;
    let (mut b, mut fb, mut db) = hi;
    if fa == 0.0 {
        return Ok(Root {
            x: a,
            fx: fa,
            iterations: 0,
        });
    }
    if fb == 0.0 {
        return Ok(Root {
            x: b,
            fx: fb,
            iterations: 0,
        });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::RootFinding(format!(
            "interval [{a}, {b}] does not bracket a root (f = {fa}, {fb})"
        )));
    }
    let (mut c, mut fc, mut dc) = (a, fa, da);
    let mut d = b - a;
    let mut e = d;
    for iter in 1..=max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            dc = da;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
            da = db;
            db = dc;
            dc = da;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(Root {
                x: b,
                fx: fb,
                iterations: iter,
            });
        }
        let newton = db
            .filter(|g| *g != 0.0 && g.is_finite())
            .map(|g| -fb / g)
            .filter(|s| s.signum() == m.signum() && s.abs() < 0.9 * m.abs() && s.abs() < 0.5 * e.abs());
        if let Some(step) = newton {
            e = d;
            d = step;
        } else if e.abs() < tol || fa.abs() <= fb.abs() {
            d = m;
            e = m;
        } else {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < 3.0 * m * q - (tol * q).abs() && p < (0.5 * e * q).abs() {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        }
        a = b;
        fa = fb;
        da = db;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        let (v, g) = f(b)?;
        fb = v;
        db = g;
    }
    Err(Error::RootFinding(format!(
        "no convergence after {max_iter} iterations (bracket [{b}, {c}])"
    )))
}

/// A few bisection halvings followed by Brent, for brackets found on a
/// coarse scan where the function may be far from linear.
pub fn bisect_then_brent<F>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<Root>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(Root { x: a, fx: 0.0, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: 0.0, iterations: 0 });
    }
    for _ in 0..4 {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(Root { x: mid, fx: 0.0, iterations: 0 });
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    let mut g = |x: f64| Ok((f(x), None));
    brent_from(&mut g, (a, fa, None), (b, fb, None), xtol, 200)
}

/// Golden-section search for a minimum of a unimodal `f` on `[a, b]`.
pub fn golden_minimize<F>(mut f: F, a: f64, b: f64, xtol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a, b);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
