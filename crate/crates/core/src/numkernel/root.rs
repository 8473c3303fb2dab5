use super::Tolerance;
use crate::error::{Error, Result};

/// A root together with the final sign-change bracket that contains it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracketed {
    pub root: f64,
    pub lo: f64,
    pub hi: f64,
    pub evaluations: usize,
}

/// Root of `f` on `[lo, hi]`; see [`find_root_bracketed`].
pub fn find_root<F: FnMut(f64) -> f64>(f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<f64> {
    find_root_bracketed(f, lo, hi, tol).map(|b| b.root)
}

/// Brent's method: inverse quadratic / secant steps, falling back to
/// bisection whenever the interpolated step is not clearly inside the bracket.
///
/// Stops when `|f(x)| <= abs_tol` or when the bracket is no wider than
/// `rel_tol * |x| + abs_tol` (or a few ulps of `x`). Iterates never leave
/// `[lo, hi]`.
pub fn find_root_bracketed<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: Tolerance,
) -> Result<Bracketed> {
    if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
        return Err(Error::Domain("find_root requires finite lo < hi"));
    }
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let mut fb = f(b);
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::Domain("function is NaN at a bracket endpoint"));
    }
    if fa == 0.0 {
        return Ok(Bracketed {
            root: a,
            lo: a,
            hi: a,
            evaluations: 2,
        });
    }
    if fb == 0.0 {
        return Ok(Bracketed {
            root: b,
            lo: b,
            hi: b,
            evaluations: 2,
        });
    }
    if (fa > 0.0) == (fb > 0.0) {
        return Err(Error::Bracket {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }

    let mut c = b;
    let mut fc = fb;
    let mut d = b - a;
    let mut e = d;
    for iter in 0..tol.max_iter() {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if libm::fabs(fc) < libm::fabs(fb) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * libm::fabs(b)
            + 0.5 * (tol.rel_tol() * libm::fabs(b) + tol.abs_tol());
        let xm = 0.5 * (c - b);
        if libm::fabs(xm) <= tol1 || fb == 0.0 || libm::fabs(fb) <= tol.abs_tol() {
            return Ok(Bracketed {
                root: b,
                lo: b.min(c),
                hi: b.max(c),
                evaluations: iter + 2,
            });
        }
        if libm::fabs(e) >= tol1 && libm::fabs(fa) > libm::fabs(fb) {
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
            p = libm::fabs(p);
            let min1 = 3.0 * xm * q - libm::fabs(tol1 * q);
            let min2 = libm::fabs(e * q);
            if 2.0 * p < min1.min(min2) {
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
        b += if libm::fabs(d) > tol1 {
            d
        } else {
            libm::copysign(tol1, xm)
        };
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::Domain(
                "function evaluated to NaN inside the bracket",
            ));
        }
    }
    Err(Error::Convergence {
        what: "root finding",
        estimate: b,
        error: libm::fabs(c - b),
    })
}
