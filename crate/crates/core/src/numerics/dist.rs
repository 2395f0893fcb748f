//! Standard normal and Student-t distribution functions.

use std::f64::consts::{PI, SQRT_2};

use super::roots::find_root;
use super::special::{beta_reg, erfc, ln_gamma};
use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Inverse of [`normal_cdf`] on the open unit interval.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("normal quantile needs 0 < p < 1, got {p}")));
    }
    if p > 0.5 {
        // 1 - p is exact here
        return Ok(-lower_quantile(1.0 - p));
    }
    Ok(lower_quantile(p))
}

fn lower_quantile(p: f64) -> f64 {
    let mut x = acklam(p);
    // Halley refinement against the accurate cdf
    for _ in 0..2 {
        let e = normal_cdf(x) - p;
        let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// Acklam's rational approximation (relative error below 1.2e-9). Used
/// unrefined for variate generation.
pub(crate) fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Standard Student-t distribution with `dof` degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudentT {
    dof: f64,
    ln_norm: f64,
}

impl StudentT {
    pub fn new(dof: u64) -> Result<Self> {
        if dof == 0 {
            return Err(Error::domain("student-t degrees of freedom must be >= 1"));
        }
        let nu = dof as f64;
        let ln_norm = ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln();
        Ok(Self { dof: nu, ln_norm })
    }

    pub fn dof(&self) -> u64 {
        self.dof as u64
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let nu = self.dof;
        (self.ln_norm - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let nu = self.dof;
        let x2 = x * x;
        let tail = 0.5 * beta_reg(0.5 * nu, 0.5, nu / (nu + x2), x2 / (nu + x2));
        if x > 0.0 {
            1.0 - tail
        } else {
            tail
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("t quantile needs 0 < p < 1, got {p}")));
        }
        if p == 0.5 {
            return Ok(0.0);
        }
        if p < 0.5 {
            return Ok(-self.quantile(1.0 - p)?);
        }
        let f = |x: f64| self.cdf(x) - p;
        let mut hi = normal_quantile(p)?.max(1.0) * 2.0;
        while f(hi) < 0.0 {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::domain(format!("t quantile overflow at p = {p}")));
            }
        }
        find_root(f, 0.0, hi, 1e-15)
    }
}

pub fn t_pdf(x: f64, dof: u64) -> Result<f64> {
    Ok(StudentT::new(dof)?.pdf(x))
}

pub fn t_cdf(x: f64, dof: u64) -> Result<f64> {
    Ok(StudentT::new(dof)?.cdf(x))
}

pub fn t_quantile(p: f64, dof: u64) -> Result<f64> {
    StudentT::new(dof)?.quantile(p)
}
