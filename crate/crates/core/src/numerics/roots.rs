use crate::error::{Error, Result};

pub const DEFAULT_ROOT_TOL: f64 = 1e-8;

const MAX_ITER: usize = 500;

/// Root of `f` on a sign-changing bracket `[lo, hi]`.
///
/// Bisection guarded Illinois steps: each iterate is a secant point of the
/// current bracket, with the stale endpoint's value halved whenever the same
/// side is retained twice, and a plain bisection whenever the secant stalls.
/// Stops once `|f(x)| <= tol` or the bracket collapses to machine precision.
pub fn find_root<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut fa = f(a);
    let mut fb = f(b);
    if !(fa.is_finite() && fb.is_finite()) || fa * fb > 0.0 {
        return Err(Error::NotBracketed {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
        });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }

    let mut side = 0i8;
    let mut last_width = b - a;
    for _ in 0..MAX_ITER {
        let width = b - a;
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !(x > a && x < b) || width > 0.5 * last_width {
            x = 0.5 * (a + b);
        }
        last_width = width;
        let fx = f(x);
        if fx.abs() <= tol || width <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
            return Ok(x);
        }
        if (fx < 0.0) == (fa < 0.0) {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (a + b))
}
