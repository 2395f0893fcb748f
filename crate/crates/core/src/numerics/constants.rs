//! Procedure constants: Bechhofer's `h`, Rinott's `h_R` and the KN `eta`.

use std::collections::HashMap;
use std::f64::consts::SQRT_2;
use std::sync::{Mutex, OnceLock};

use super::dist::{normal_cdf, normal_pdf, StudentT};
use super::quadrature::Quadrature;
use super::roots::find_root;
use crate::error::{Error, Result};

const CONSTANT_TOL: f64 = 1e-13;

/// A computed constant together with the residual of its defining equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solved {
    pub value: f64,
    pub residual: f64,
}

fn check_k_alpha(k: usize, alpha: f64) -> Result<()> {
    if k < 2 {
        return Err(Error::config("k", format!("need at least 2 alternatives, got {k}")));
    }
    let upper = 1.0 - 1.0 / k as f64;
    if !(alpha > 0.0 && alpha <= upper) {
        return Err(Error::config(
            "alpha",
            format!("need 0 < alpha <= 1 - 1/k = {upper}, got {alpha}"),
        ));
    }
    Ok(())
}

/// Probability that the maximum of `k - 1` standard normals with common
/// correlation 1/2 stays below `h`.
pub fn equicorrelated_max_cdf(k: usize, h: f64) -> f64 {
    let e = (k - 1) as i32;
    Quadrature::standard().integrate(|w| normal_pdf(w) * normal_cdf(w + SQRT_2 * h).powi(e))
}

/// `(1 - alpha)` quantile of the maximum of `k - 1` equicorrelated (rho = 1/2)
/// standard normals; the constant of Bechhofer's single-stage sample size.
pub fn bechhofer_h(k: usize, alpha: f64) -> Result<f64> {
    bechhofer_h_solved(k, alpha).map(|s| s.value)
}

pub fn bechhofer_h_solved(k: usize, alpha: f64) -> Result<Solved> {
    check_k_alpha(k, alpha)?;
    let target = 1.0 - alpha;
    let f = |h: f64| equicorrelated_max_cdf(k, h) - target;
    if f(0.0) >= -CONSTANT_TOL {
        return Ok(Solved { value: 0.0, residual: f(0.0).abs() });
    }
    let hi = expand_bracket(f, 1.0)?;
    let value = find_root(f, 0.0, hi, CONSTANT_TOL)?.max(0.0);
    Ok(Solved {
        value,
        residual: f(value).abs(),
    })
}

/// Rinott's integral `∫ Ψ^{k-1}(t + h) ψ(t) dt` with `Ψ, ψ` the Student-t cdf
/// and pdf on `n0 - 1` degrees of freedom.
///
/// Evaluated in probability space (`t = Ψ^{-1}(u)`) so that heavy tails at
/// small `n0` need no truncation.
pub struct RinottIntegral {
    dist: StudentT,
    exponent: i32,
    rule: Vec<(f64, f64)>,
}

impl RinottIntegral {
    pub fn new(k: usize, n0: u64) -> Result<Self> {
        if k < 2 {
            return Err(Error::config("k", format!("need at least 2 alternatives, got {k}")));
        }
        if n0 < 2 {
            return Err(Error::config("n0", format!("need n0 >= 2, got {n0}")));
        }
        let dist = StudentT::new(n0 - 1)?;
        let rule = Quadrature::standard()
            .rule_on(0.0, 1.0)
            .map(|(u, w)| dist.quantile(u).map(|t| (t, w)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dist,
            exponent: (k - 1) as i32,
            rule,
        })
    }

    pub fn eval(&self, h: f64) -> f64 {
        self.rule
            .iter()
            .map(|&(t, w)| w * self.dist.cdf(t + h).powi(self.exponent))
            .sum()
    }
}

type RinottKey = (usize, u64, u64);

fn rinott_cache() -> &'static Mutex<HashMap<RinottKey, Solved>> {
    static CACHE: OnceLock<Mutex<HashMap<RinottKey, Solved>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Rinott's two-stage constant `h_R`, memoized by `(k, n0, alpha)`.
pub fn rinott_h(k: usize, n0: u64, alpha: f64) -> Result<f64> {
    rinott_h_solved(k, n0, alpha).map(|s| s.value)
}

pub fn rinott_h_solved(k: usize, n0: u64, alpha: f64) -> Result<Solved> {
    check_k_alpha(k, alpha)?;
    let key = (k, n0, alpha.to_bits());
    if let Some(hit) = rinott_cache().lock().expect("cache poisoned").get(&key) {
        return Ok(*hit);
    }
    let integral = RinottIntegral::new(k, n0)?;
    let target = 1.0 - alpha;
    let f = |h: f64| integral.eval(h) - target;
    if f(0.0) >= -CONSTANT_TOL {
        return Ok(Solved { value: 0.0, residual: f(0.0).abs() });
    }
    let hi = expand_bracket(f, 1.0)?;
    let value = find_root(f, 0.0, hi, CONSTANT_TOL)?.max(0.0);
    let solved = Solved {
        value,
        residual: f(value).abs(),
    };
    rinott_cache()
        .lock()
        .expect("cache poisoned")
        .insert(key, solved);
    Ok(solved)
}

/// KN constant `eta = ((2 alpha / (k - 1))^(-2 / (n0 - 1)) - 1) / 2`.
pub fn kn_eta(k: usize, n0: u64, alpha: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::config("k", format!("need at least 2 alternatives, got {k}")));
    }
    if n0 < 2 {
        return Err(Error::config("n0", format!("need n0 >= 2, got {n0}")));
    }
    let base = 2.0 * alpha / (k - 1) as f64;
    if !(alpha > 0.0 && base < 1.0) {
        return Err(Error::config(
            "alpha",
            format!("need 0 < alpha < (k - 1)/2, got {alpha}"),
        ));
    }
    let exponent = -2.0 / (n0 - 1) as f64;
    Ok(0.5 * (base.powf(exponent) - 1.0))
}

/// `h^2 = 2 eta (n0 - 1)`.
pub fn kn_h2(k: usize, n0: u64, alpha: f64) -> Result<f64> {
    Ok(2.0 * kn_eta(k, n0, alpha)? * (n0 - 1) as f64)
}

fn expand_bracket<F: Fn(f64) -> f64>(f: F, start: f64) -> Result<f64> {
    let mut hi = start;
    for _ in 0..64 {
        if f(hi) >= 0.0 {
            return Ok(hi);
        }
        hi *= 2.0;
    }
    Err(Error::NotBracketed {
        lo: 0.0,
        hi,
        f_lo: f(0.0),
        f_hi: f(hi),
    })
}
