//! Special functions: gamma-family constants, chi means, sphere areas and the
//! shifted-norm function `γ_k(c) = E‖ξ + c‖` for a standard normal ξ in R^k.
//!
//! Quantities that contain `Γ(m/2)` or `2^{m/2}` are returned as [`LogValue`]
//! because they overflow `f64` jointly once `m` reaches a few hundred.

use std::f64::consts::{LN_2, PI, SQRT_2};
use std::ops::{Div, Mul};

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::Moments;
use crate::stream::{self, tag};

/// A signed real stored as `sign · exp(log_magnitude)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub log_magnitude: f64,
    pub sign: i8,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        log_magnitude: f64::NEG_INFINITY,
        sign: 0,
    };
    pub const ONE: LogValue = LogValue {
        log_magnitude: 0.0,
        sign: 1,
    };

    pub fn from_log(log_magnitude: f64) -> LogValue {
        LogValue { log_magnitude, sign: 1 }
    }

    pub fn from_f64(x: f64) -> LogValue {
        if x == 0.0 {
            LogValue::ZERO
        } else {
            LogValue {
                log_magnitude: x.abs().ln(),
                sign: if x > 0.0 { 1 } else { -1 },
            }
        }
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.log_magnitude.exp()
        }
    }

    pub fn is_finite(self) -> bool {
        self.sign == 0 || self.log_magnitude.is_finite()
    }

    pub fn powf(self, p: f64) -> LogValue {
        assert!(self.sign >= 0, "fractional power of a negative LogValue");
        if self.sign == 0 {
            return LogValue::ZERO;
        }
        LogValue::from_log(self.log_magnitude * p)
    }

    pub fn scale(self, x: f64) -> LogValue {
        self * LogValue::from_f64(x)
    }
}

impl Mul for LogValue {
    type Output = LogValue;
    fn mul(self, rhs: LogValue) -> LogValue {
        let sign = self.sign * rhs.sign;
        if sign == 0 {
            return LogValue::ZERO;
        }
        LogValue {
            log_magnitude: self.log_magnitude + rhs.log_magnitude,
            sign,
        }
    }
}

impl Div for LogValue {
    type Output = LogValue;
    fn div(self, rhs: LogValue) -> LogValue {
        assert!(rhs.sign != 0, "division by a zero LogValue");
        if self.sign == 0 {
            return LogValue::ZERO;
        }
        LogValue {
            log_magnitude: self.log_magnitude - rhs.log_magnitude,
            sign: self.sign * rhs.sign,
        }
    }
}

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(libm::lgamma_r(x).0)
}

fn ln_gamma_unchecked(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// Standard normal CDF, via the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Inverse of [`normal_cdf`] on (0, 1).
///
/// Acklam's rational approximation followed by one Halley step against
/// [`normal_cdf`].
pub fn normal_quantile(p: f64) -> f64 {
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

    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let x = if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    };
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// `ln E‖ξ_k‖ = ln(√2 Γ((k+1)/2) / Γ(k/2))`.
pub fn ln_chi_mean(k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("chi_mean requires k >= 1"));
    }
    let k = k as f64;
    Ok(0.5 * LN_2 + ln_gamma_unchecked((k + 1.0) / 2.0) - ln_gamma_unchecked(k / 2.0))
}

/// Mean norm of a standard normal vector in R^k.
pub fn chi_mean(k: usize) -> Result<f64> {
    ln_chi_mean(k).map(f64::exp)
}

/// Surface area `σ_{m−1} = 2π^{m/2}/Γ(m/2)` of the unit sphere in R^m.
pub fn sphere_area(m: usize) -> Result<LogValue> {
    if m == 0 {
        return Err(Error::domain("sphere_area requires m >= 1"));
    }
    let half = m as f64 / 2.0;
    Ok(LogValue::from_log(LN_2 + half * PI.ln() - ln_gamma_unchecked(half)))
}

/// `L_m = ∏_{j=1}^m E‖ξ_j‖`, accumulated factor by factor.
pub fn l_m(m: usize) -> Result<LogValue> {
    if m == 0 {
        return Err(Error::domain("l_m requires m >= 1"));
    }
    let mut acc = 0.0;
    for j in 1..=m {
        acc += ln_chi_mean(j)?;
    }
    Ok(LogValue::from_log(acc))
}

/// Closed form `2^{(m+1)/2} Γ((m+1)/2) / √(2π)` of [`l_m`].
pub fn l_m_closed_form(m: usize) -> Result<LogValue> {
    if m == 0 {
        return Err(Error::domain("l_m requires m >= 1"));
    }
    let a = (m as f64 + 1.0) / 2.0;
    Ok(LogValue::from_log(
        a * LN_2 + ln_gamma_unchecked(a) - 0.5 * (2.0 * PI).ln(),
    ))
}

/// Sample budget for Monte Carlo evaluation of `γ_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McBudget {
    pub samples: u64,
    pub seed: u64,
}

impl Default for McBudget {
    fn default() -> Self {
        McBudget {
            samples: 100_000,
            seed: 0,
        }
    }
}

/// A value of `γ_k` with its Monte Carlo standard error (zero when exact).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaEstimate {
    pub value: f64,
    pub stderr: f64,
}

const BLOCK: u64 = 4096;

/// Average `f(ξ)` over `budget.samples` standard normal vectors in R^k.
///
/// Sample `s` always comes from block `s / BLOCK` of the stream keyed by
/// `(seed, k)`, so two calls with the same budget see the same ξ's
/// (common random numbers) whatever `f` is.
pub(crate) fn normal_vector_average<F>(k: usize, budget: McBudget, f: F) -> Moments
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n_blocks = budget.samples.div_ceil(BLOCK);
    let blocks: Vec<Moments> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream::keyed_rng(budget.seed, &[tag::GAMMA, k as u64, b]);
            let count = BLOCK.min(budget.samples - b * BLOCK);
            let mut xi = vec![0.0; k];
            let mut m = Moments::default();
            for _ in 0..count {
                for x in xi.iter_mut() {
                    *x = StandardNormal.sample(&mut rng);
                }
                m.push(f(&xi));
            }
            m
        })
        .collect();
    Moments::merge_all(&blocks)
}

fn check_gamma_args(k: usize, c: f64) -> Result<()> {
    if k == 0 {
        return Err(Error::domain("γ_k requires k >= 1"));
    }
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::domain(format!(
            "γ_k takes the norm of the shift, which must be finite and >= 0; got {c}"
        )));
    }
    Ok(())
}

/// Exact `γ_1(c) = √(2/π) e^{−c²/2} + c(2Φ(c) − 1)`.
pub fn gamma_shifted_1d(c: f64) -> f64 {
    let c = c.abs();
    (2.0 / PI).sqrt() * (-0.5 * c * c).exp() + c * (2.0 * normal_cdf(c) - 1.0)
}

/// `γ_k(c) = E‖ξ + c‖` where only `c = ‖c‖` matters.
///
/// Closed form for `k = 1`; Monte Carlo with reported standard error otherwise.
pub fn gamma_shifted(k: usize, c: f64, budget: McBudget) -> Result<GammaEstimate> {
    check_gamma_args(k, c)?;
    if k == 1 {
        return Ok(GammaEstimate {
            value: gamma_shifted_1d(c),
            stderr: 0.0,
        });
    }
    let m = normal_vector_average(k, budget, |xi| shifted_norm(xi, c));
    Ok(GammaEstimate {
        value: m.mean,
        stderr: m.stderr(),
    })
}

/// `‖ξ + c·e₁‖`.
#[inline]
pub(crate) fn shifted_norm(xi: &[f64], c: f64) -> f64 {
    let first = xi[0] + c;
    let rest: f64 = xi[1..].iter().map(|x| x * x).sum();
    (first * first + rest).sqrt()
}

/// Upper envelope `γ_k(0)·(1 + c²/(2k))`.
pub fn gamma_bound(k: usize, c: f64) -> Result<f64> {
    check_gamma_args(k, c)?;
    Ok(chi_mean(k)? * (1.0 + c * c / (2.0 * k as f64)))
}

/// Central second difference of `a ↦ γ_k(a·e₁)` at zero with step `step`.
///
/// The `+step` and `−step` evaluations share every sample, so the first-order
/// noise cancels per sample and the estimate is usable at small steps.
pub fn gamma_curvature_at_zero(k: usize, step: f64, budget: McBudget) -> Result<GammaEstimate> {
    check_gamma_args(k, step)?;
    if step == 0.0 {
        return Err(Error::domain("finite-difference step must be positive"));
    }
    let m = normal_vector_average(k, budget, |xi| {
        (shifted_norm(xi, step) + shifted_norm(xi, -step) - 2.0 * shifted_norm(xi, 0.0)) / (step * step)
    });
    Ok(GammaEstimate {
        value: m.mean,
        stderr: m.stderr(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn log_gamma_known_values() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-15);
        assert!(log_gamma(2.0).unwrap().abs() < 1e-15);
        assert!((log_gamma(0.5).unwrap() - 0.5 * PI.ln()).abs() < 1e-14);
        assert!((log_gamma(6.0).unwrap() - 120f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn log_gamma_matches_factorial_sums() {
        // ln Γ(n) = Σ_{j<n} ln j, and ln Γ(n + 1/2) = ln √π + Σ ln(j − 1/2).
        let mut ln_fact = 0.0;
        let mut ln_half = 0.5 * PI.ln();
        for n in 1..=10_000usize {
            if n >= 3 {
                assert!(rel(log_gamma(n as f64).unwrap(), ln_fact) < 1e-13, "n = {n}");
            }
            if n >= 2 {
                assert!(
                    rel(log_gamma(n as f64 + 0.5).unwrap(), ln_half + (n as f64 - 0.5).ln()) < 1e-13,
                    "n = {n}"
                );
            }
            ln_fact += (n as f64).ln();
            ln_half += (n as f64 - 0.5).ln();
        }
    }

    #[test]
    fn log_gamma_rejects_nonpositive() {
        assert!(matches!(log_gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(log_gamma(-1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn normal_cdf_and_quantile() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-14);
        assert!((normal_cdf(-3.0) - 0.001_349_898_031_630_094_6).abs() < 1e-14);
        for &p in &[1e-10, 0.01, 0.3, 0.5, 0.77, 0.999] {
            assert!((normal_cdf(normal_quantile(p)) - p).abs() < 1e-15 * (1.0 + p / 1e-3));
        }
    }

    #[test]
    fn chi_mean_small_k() {
        assert!(rel(chi_mean(1).unwrap(), (2.0 / PI).sqrt()) < 1e-14);
        assert!(rel(chi_mean(2).unwrap(), (PI / 2.0).sqrt()) < 1e-14);
        assert!(rel(chi_mean(3).unwrap(), 2.0 * (2.0 / PI).sqrt()) < 1e-14);
        assert!(chi_mean(0).is_err());
    }

    #[test]
    fn sphere_area_values_and_recursion() {
        assert!(rel(sphere_area(2).unwrap().to_f64(), 2.0 * PI) < 1e-14);
        assert!(rel(sphere_area(3).unwrap().to_f64(), 4.0 * PI) < 1e-14);
        // |S^{n-1}| = 2π |S^{n-3}| / (n − 2), starting from |S^0| = 2, |S^1| = 2π.
        let mut ln_area = [2f64.ln(), (2.0 * PI).ln()];
        for n in 3..=100usize {
            let next = (2.0 * PI).ln() + ln_area[(n - 3) % 2] - ((n - 2) as f64).ln();
            ln_area[(n - 1) % 2] = next;
        }
        let got = sphere_area(100).unwrap();
        assert!((got.log_magnitude - ln_area[1]).abs() < 1e-12);
        assert!(sphere_area(0).is_err());
    }

    #[test]
    fn l_m_product_and_closed_form() {
        assert!(rel(l_m(1).unwrap().to_f64(), (2.0 / PI).sqrt()) < 1e-14);
        assert!((l_m(2).unwrap().to_f64() - 1.0).abs() < 1e-14);
        let brute: f64 = (1..=5).map(|j| chi_mean(j).unwrap()).product();
        assert!(rel(l_m(5).unwrap().to_f64(), brute) < 1e-13);
        for m in 1..=200 {
            let a = l_m(m).unwrap().log_magnitude;
            let b = l_m_closed_form(m).unwrap().log_magnitude;
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "m = {m}");
        }
    }

    #[test]
    fn gamma_shifted_closed_form_at_zero() {
        assert!(
            rel(
                gamma_shifted(1, 0.0, McBudget::default()).unwrap().value,
                (2.0 / PI).sqrt()
            ) < 1e-15
        );
        assert!(gamma_shifted(1, -0.5, McBudget::default()).is_err());
        assert!(gamma_shifted(0, 0.5, McBudget::default()).is_err());
    }

    #[test]
    fn gamma_shifted_zero_shift_is_chi_mean() {
        let est = gamma_shifted(
            3,
            0.0,
            McBudget {
                samples: 200_000,
                seed: 3,
            },
        )
        .unwrap();
        assert!((est.value - chi_mean(3).unwrap()).abs() < 4.0 * est.stderr);
    }

    #[test]
    fn gamma_shifted_is_deterministic() {
        let b = McBudget {
            samples: 10_000,
            seed: 99,
        };
        assert_eq!(gamma_shifted(4, 1.5, b).unwrap(), gamma_shifted(4, 1.5, b).unwrap());
    }

    #[test]
    fn gamma_bound_values() {
        assert!(rel(gamma_bound(1, 0.0).unwrap(), (2.0 / PI).sqrt()) < 1e-15);
        assert!(rel(gamma_bound(2, 2.0).unwrap(), (PI / 2.0).sqrt() * 2.0) < 1e-14);
        assert!(rel(gamma_bound(10, 1.0).unwrap(), chi_mean(10).unwrap() * 1.05) < 1e-14);
    }

    #[test]
    fn log_value_arithmetic() {
        let a = LogValue::from_f64(-3.0);
        let b = LogValue::from_f64(0.5);
        assert!(((a * b).to_f64() + 1.5).abs() < 1e-15);
        assert!(((a / b).to_f64() + 6.0).abs() < 1e-14);
        assert_eq!((a * LogValue::ZERO).to_f64(), 0.0);
        assert!((LogValue::from_f64(4.0).powf(0.5).to_f64() - 2.0).abs() < 1e-15);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            // exp(ln x) carries |ln x|·ε relative error, so the 1e-14 round trip
            // is asserted where |ln x| <= 69.
            fn log_value_round_trip(x in prop_oneof![1e-30f64..1e30, -1e30f64..-1e-30]) {
                let back = LogValue::from_f64(x).to_f64();
                prop_assert!((back - x).abs() <= 1e-14 * x.abs());
            }

            #[test]
            fn log_value_product_adds_logs(x in 1e-100f64..1e100, y in -1e100f64..-1e-100) {
                let p = LogValue::from_f64(x) * LogValue::from_f64(y);
                prop_assert_eq!(p.sign, -1);
                prop_assert!((p.to_f64() - x * y).abs() <= 1e-13 * (x * y).abs());
            }
        }
    }
}
