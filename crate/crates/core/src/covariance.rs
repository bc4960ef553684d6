//! Noise covariance model.
//!
//! Each noise component `X_i` has covariance `E[X_i(s)X_i(t)] = Q(⟨s,t⟩)` for a
//! polynomial `Q(u) = Σ c_k u^k` with nonnegative coefficients. The auxiliary
//! functions
//!
//! ```text
//! q(u) = Q'(u)/Q(u)
//! r(u) = (Q Q'' − Q'²)/Q²
//! h(u) = 1 + u·r(u)/q(u)
//! ```
//!
//! govern the law of the normalised gradient. `h` is evaluated through the
//! identity `h = N/(Q Q')` with `N(u) = ½ Σ_{a,b} c_a c_b (a−b)² u^{a+b−1}`,
//! which has nonnegative coefficients and so involves no cancellation.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize;
use crate::poly;

/// Where a covariance polynomial came from; used only to echo the textbook
/// constants next to the computed ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum QFamily {
    ShubSmale { degree: usize },
    RealRoots { alphas: Vec<f64> },
    Power { base: Vec<f64>, exponent: usize },
    Custom,
}

/// Covariance polynomial `Q(u) = Σ c_k u^k`.
///
/// Serialises as the JSON array of coefficients, lowest degree first.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", try_from = "Vec<f64>")]
pub struct CovarianceQ {
    coeffs: Vec<f64>,
    family: QFamily,
    profile: RadialProfile,
}

impl PartialEq for CovarianceQ {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl From<CovarianceQ> for Vec<f64> {
    fn from(q: CovarianceQ) -> Vec<f64> {
        q.coeffs
    }
}

impl TryFrom<Vec<f64>> for CovarianceQ {
    type Error = Error;
    fn try_from(coeffs: Vec<f64>) -> Result<Self> {
        CovarianceQ::new(coeffs)
    }
}

impl CovarianceQ {
    pub fn new(coeffs: Vec<f64>) -> Result<CovarianceQ> {
        CovarianceQ::with_family(coeffs, QFamily::Custom)
    }

    fn with_family(coeffs: Vec<f64>, family: QFamily) -> Result<CovarianceQ> {
        if coeffs.len() < 2 {
            return Err(Error::validation(
                "covariance polynomial needs degree >= 1 (at least two coefficients)",
            ));
        }
        if let Some((k, c)) = coeffs.iter().enumerate().find(|(_, c)| !c.is_finite() || **c < 0.0) {
            return Err(Error::validation(format!(
                "covariance coefficient c_{k} = {c} must be finite and nonnegative"
            )));
        }
        let d = coeffs.len() - 1;
        if coeffs[d] <= 0.0 {
            return Err(Error::validation(format!(
                "leading coefficient c_{d} must be positive (effective degree)"
            )));
        }
        if coeffs[0] <= 0.0 {
            return Err(Error::validation("c_0 must be positive so that Q(u) > 0 for u >= 0"));
        }
        let profile = RadialProfile::new(&coeffs);
        Ok(CovarianceQ {
            coeffs,
            family,
            profile,
        })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn family(&self) -> &QFamily {
        &self.family
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    /// `Q(u)`.
    pub fn eval(&self, u: f64) -> f64 {
        poly::eval_compensated(&self.coeffs, u)
    }

    /// Constants `(D, E)` the textbook analysis names for this family, if any.
    pub fn reference_bounds(&self) -> Option<(f64, Option<f64>)> {
        let d = self.degree() as f64;
        match &self.family {
            QFamily::ShubSmale { .. } => Some((d, Some(0.0))),
            QFamily::RealRoots { alphas } => {
                let top = alphas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                Some((d, Some(d * (top - 1.0))))
            }
            QFamily::Power { .. } => Some((d, None)),
            QFamily::Custom => None,
        }
    }
}

/// Kostlan–Shub–Smale covariance `(1 + u)^d`.
pub fn shub_smale_q(d: usize) -> Result<CovarianceQ> {
    if d == 0 {
        return Err(Error::domain(
            "Shub–Smale degree must be >= 1; constant noise has no root structure",
        ));
    }
    let mut coeffs = vec![1.0; d + 1];
    for k in 1..=d {
        coeffs[k] = coeffs[k - 1] * (d - k + 1) as f64 / k as f64;
    }
    // Binomials are exact integers in f64 for every practical d.
    for c in coeffs.iter_mut() {
        *c = c.round();
    }
    CovarianceQ::with_family(coeffs, QFamily::ShubSmale { degree: d })
}

/// `Q(u) = ∏ (u + α_k)` with `1 <= α_1 <= … <= α_d`.
pub fn real_roots_q(alphas: &[f64]) -> Result<CovarianceQ> {
    if alphas.is_empty() {
        return Err(Error::domain("real_roots_q needs at least one root"));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a >= 1.0) || !a.is_finite()) {
        return Err(Error::domain(format!(
            "root parameter α = {a} is below 1; rescale space by √α_1 (a homothety leaves the \
             root count unchanged) so that every α_k >= 1"
        )));
    }
    if alphas.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::domain("root parameters must be sorted ascending"));
    }
    let coeffs = alphas.iter().fold(vec![1.0], |acc, &a| poly::multiply(&acc, &[a, 1.0]));
    CovarianceQ::with_family(
        coeffs,
        QFamily::RealRoots {
            alphas: alphas.to_vec(),
        },
    )
}

/// `Q(u) = B(u)^l` for a base polynomial `B` of degree ν whose coefficients
/// satisfy `0 < b_k <= ((ν−k+1)/k)·b_{k−1}`.
pub fn power_family_q(base: &[f64], l: usize) -> Result<CovarianceQ> {
    if l == 0 {
        return Err(Error::domain("power exponent l must be >= 1"));
    }
    if base.len() < 2 {
        return Err(Error::domain("base polynomial must have degree >= 1"));
    }
    let nu = base.len() - 1;
    if let Some((k, b)) = base.iter().enumerate().find(|(_, b)| !(**b > 0.0) || !b.is_finite()) {
        return Err(Error::validation(format!(
            "base coefficient b_{k} = {b} must be strictly positive"
        )));
    }
    for k in 1..=nu {
        let cap = (nu - k + 1) as f64 / k as f64 * base[k - 1];
        if base[k] > cap {
            return Err(Error::validation(format!(
                "base coefficient condition fails at k = {k}: b_{k} = {} > ((ν−k+1)/k)·b_{} = {cap}",
                base[k],
                k - 1
            )));
        }
    }
    let coeffs = poly::power(base, l);
    debug_assert_eq!(coeffs.len() - 1, nu * l);
    CovarianceQ::with_family(
        coeffs,
        QFamily::Power {
            base: base.to_vec(),
            exponent: l,
        },
    )
}

/// Pointwise values of `q`, `r`, `h` at one `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub q: f64,
    pub r: f64,
    pub h: f64,
}

/// The rational functions `q`, `r`, `h` of a covariance polynomial.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    q0: Vec<f64>,
    q1: Vec<f64>,
    q2: Vec<f64>,
    h_num: Vec<f64>,
}

impl RadialProfile {
    fn new(c: &[f64]) -> RadialProfile {
        let q1 = poly::derivative(c);
        let q2 = poly::derivative(&q1);
        let d = c.len() - 1;
        // N(u) = Σ_{a<b} c_a c_b (b−a)² u^{a+b−1}
        let mut h_num = vec![0.0; 2 * d];
        for a in 0..=d {
            for b in (a + 1)..=d {
                let gap = (b - a) as f64;
                h_num[a + b - 1] += c[a] * c[b] * gap * gap;
            }
        }
        RadialProfile {
            q0: c.to_vec(),
            q1,
            q2,
            h_num,
        }
    }

    pub fn degree(&self) -> usize {
        self.q0.len() - 1
    }

    fn check(&self, u: f64) -> Result<(f64, f64)> {
        if !(u >= 0.0) {
            return Err(Error::domain(format!(
                "profile functions are defined for u >= 0, got {u}"
            )));
        }
        let q = poly::eval_compensated(&self.q0, u);
        let dq = poly::eval_compensated(&self.q1, u);
        if dq == 0.0 {
            return Err(Error::domain(format!(
                "Q_u vanishes at u = {u}; q and h are undefined there"
            )));
        }
        Ok((q, dq))
    }

    pub fn q(&self, u: f64) -> Result<f64> {
        let (q, dq) = self.check(u)?;
        Ok(dq / q)
    }

    pub fn r(&self, u: f64) -> Result<f64> {
        let (q, dq) = self.check(u)?;
        let ddq = poly::eval_compensated(&self.q2, u);
        Ok((q * ddq - dq * dq) / (q * q))
    }

    pub fn h(&self, u: f64) -> Result<f64> {
        let (q, dq) = self.check(u)?;
        Ok(poly::eval_compensated(&self.h_num, u) / (q * dq))
    }

    pub fn at(&self, u: f64) -> Result<ProfilePoint> {
        let (q, dq) = self.check(u)?;
        let ddq = poly::eval_compensated(&self.q2, u);
        Ok(ProfilePoint {
            q: dq / q,
            r: (q * ddq - dq * dq) / (q * q),
            h: poly::eval_compensated(&self.h_num, u) / (q * dq),
        })
    }

    /// `(1 + u)·q(u)`.
    pub fn q_weighted(&self, u: f64) -> Result<f64> {
        Ok((1.0 + u) * self.q(u)?)
    }

    /// `(1 + u)·h(u)`.
    pub fn h_weighted(&self, u: f64) -> Result<f64> {
        Ok((1.0 + u) * self.h(u)?)
    }

    /// `lim_{u→∞} (1+u) q(u) = d`.
    pub fn q_weighted_limit(&self) -> f64 {
        self.degree() as f64
    }

    /// `lim_{u→∞} (1+u) h(u) = c_{d−1}/(d·c_d)`.
    pub fn h_weighted_limit(&self) -> f64 {
        let d = self.degree();
        self.q0[d - 1] / (d as f64 * self.q0[d])
    }

    /// Coefficients of `D·Q(u) − (1+u)Q'(u)`; all nonnegative certifies
    /// `(1+u)q(u) <= D` for every `u >= 0`.
    pub fn excess_numerator(&self, big_d: f64) -> Vec<f64> {
        let d = self.degree();
        (0..=d)
            .map(|k| {
                let lower = if k < d { (k + 1) as f64 * self.q0[k + 1] } else { 0.0 };
                let same = k as f64 * self.q0[k];
                big_d * self.q0[k] - (lower + same)
            })
            .collect()
    }
}

/// The `m` independent noise components.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    qs: Vec<Arc<CovarianceQ>>,
    hyp: OnceLock<HypothesisReport>,
}

impl PartialEq for NoiseModel {
    fn eq(&self, other: &Self) -> bool {
        self.qs == other.qs
    }
}

impl NoiseModel {
    /// Every component shares the same covariance.
    pub fn uniform(q: CovarianceQ, m: usize) -> Result<NoiseModel> {
        if m == 0 {
            return Err(Error::domain("noise model needs m >= 1"));
        }
        let q = Arc::new(q);
        Ok(NoiseModel {
            qs: vec![q; m],
            hyp: OnceLock::new(),
        })
    }

    pub fn from_components(qs: Vec<CovarianceQ>) -> Result<NoiseModel> {
        if qs.is_empty() {
            return Err(Error::domain("noise model needs m >= 1"));
        }
        Ok(NoiseModel {
            qs: qs.into_iter().map(Arc::new).collect(),
            hyp: OnceLock::new(),
        })
    }

    pub fn m(&self) -> usize {
        self.qs.len()
    }

    pub fn component(&self, i: usize) -> &CovarianceQ {
        &self.qs[i]
    }

    pub fn components(&self) -> impl Iterator<Item = &CovarianceQ> {
        self.qs.iter().map(|q| q.as_ref())
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.qs.iter().map(|q| q.degree()).collect()
    }

    /// Distinct covariances with multiplicities, in order of first appearance.
    pub fn distinct(&self) -> Vec<(&CovarianceQ, usize)> {
        let mut out: Vec<(&CovarianceQ, usize)> = Vec::new();
        for q in &self.qs {
            match out.iter_mut().find(|(p, _)| *p == q.as_ref()) {
                Some((_, n)) => *n += 1,
                None => out.push((q.as_ref(), 1)),
            }
        }
        out
    }

    /// True when every component has the same `h` (checked on the default
    /// grid); cached through [`NoiseModel::hypotheses`].
    pub fn shares_h(&self) -> Result<bool> {
        Ok(self.hypotheses()?.h1_holds)
    }

    /// Hypothesis report on the default grid, computed on first use.
    pub fn hypotheses(&self) -> Result<&HypothesisReport> {
        if let Some(h) = self.hyp.get() {
            return Ok(h);
        }
        let report = check_hypotheses(self, DEFAULT_GRID_MAX, DEFAULT_GRID_N)?;
        Ok(self.hyp.get_or_init(|| report))
    }
}

pub const DEFAULT_GRID_MAX: f64 = 1e3;
pub const DEFAULT_GRID_N: usize = 4096;

/// Uniform bounds on the weighted profile functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    /// `D_i = sup_u (1+u) q_i(u)`.
    #[serde(rename = "D")]
    pub d: Vec<f64>,
    /// `E_i = sup_u (1+u)(D_i − (1+u) q_i(u))`.
    #[serde(rename = "E")]
    pub e: Vec<f64>,
    pub q_lower: f64,
    pub h_lower: f64,
    pub h_upper: f64,
    pub h1_holds: bool,
    pub h2_holds: bool,
    /// Whether `(1+u)q_i <= D_i` was certified from polynomial coefficients
    /// (rather than only on the grid).
    pub d_certified: Vec<bool>,
    /// The family's textbook `(D_i, E_i)` where one exists.
    pub reference_d: Vec<Option<f64>>,
    pub reference_e: Vec<Option<f64>>,
    pub failures: Vec<String>,
    pub grid: String,
}

impl HypothesisReport {
    pub fn d_max(&self) -> f64 {
        self.d.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn e_max(&self) -> f64 {
        self.e.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `F̄ = max_i E_i / D_i`.
    pub fn f_bar(&self) -> f64 {
        self.d
            .iter()
            .zip(&self.e)
            .map(|(d, e)| e / d)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

struct Bounds {
    d: f64,
    e: f64,
    certified: bool,
    q_inf: f64,
    h_inf: f64,
    h_sup: f64,
    h_on_grid: Vec<f64>,
    failure: Option<String>,
}

fn component_bounds(q: &CovarianceQ, grid: &[f64]) -> Result<Bounds> {
    let p = q.profile();
    let mut qw = Vec::with_capacity(grid.len());
    let mut hw = Vec::with_capacity(grid.len());
    for &u in grid {
        let pt = p.at(u)?;
        if pt.h < -1e-10 {
            return Err(Error::validation(format!(
                "h(u) = {} < 0 at u = {u}; the covariance cannot be valid",
                pt.h
            )));
        }
        qw.push((1.0 + u) * pt.q);
        hw.push((1.0 + u) * pt.h);
    }
    let sup_of = |f: &dyn Fn(f64) -> f64, vals: &[f64]| -> f64 {
        let idx = argmax(vals);
        let lo = grid[idx.saturating_sub(1)];
        let hi = grid[(idx + 1).min(grid.len() - 1)];
        let refined = optimize::golden_max(f, lo, hi, 200).1;
        vals[idx].max(refined)
    };
    let qfun = |u: f64| p.q_weighted(u).unwrap_or(f64::NAN);
    let hfun = |u: f64| p.h_weighted(u).unwrap_or(f64::NAN);
    let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();

    let q_limit = p.q_weighted_limit();
    let h_limit = p.h_weighted_limit();
    let q_sup = sup_of(&qfun, &qw).max(q_limit);
    let q_inf = (-sup_of(&|u| -qfun(u), &neg(&qw))).min(q_limit);
    let h_sup = sup_of(&hfun, &hw).max(h_limit);
    let h_inf = (-sup_of(&|u| -hfun(u), &neg(&hw))).min(h_limit);

    // D must equal the degree: any larger constant leaves D − (1+u)q bounded
    // away from zero while E/(1+u) → 0.
    let numerator = p.excess_numerator(q_limit);
    let certified = numerator.iter().all(|&c| c >= 0.0);
    let mut failure = None;
    let d = if certified || q_sup <= q_limit * (1.0 + 1e-12) {
        q_limit
    } else {
        failure = Some(format!(
            "(1+u)q(u) reaches {q_sup} > degree {q_limit}; no finite E satisfies the q-bound"
        ));
        q_sup
    };
    let e = if failure.is_some() {
        f64::INFINITY
    } else {
        // (1+u)(D − (1+u)q) = (1+u)·numerator(u)/Q(u), cancellation-free.
        let ew = |u: f64| (1.0 + u) * poly::eval_compensated(&numerator, u) / q.eval(u);
        let vals: Vec<f64> = grid.iter().map(|&u| ew(u)).collect();
        let dd = q.degree();
        let e_limit = numerator[dd - 1] / q.coeffs()[dd];
        sup_of(&ew, &vals).max(e_limit).max(0.0)
    };
    Ok(Bounds {
        d,
        e,
        certified,
        q_inf,
        h_inf,
        h_sup,
        h_on_grid: hw,
        failure,
    })
}

fn argmax(v: &[f64]) -> usize {
    let mut idx = 0;
    for (k, x) in v.iter().enumerate() {
        if *x > v[idx] {
            idx = k;
        }
    }
    idx
}

/// Check the common-`h` hypothesis and compute the uniform q/h bounds on a
/// log-spaced grid over `[0, grid_max]`, refined around extrema and closed
/// with the analytic limits at infinity.
pub fn check_hypotheses(model: &NoiseModel, grid_max: f64, grid_n: usize) -> Result<HypothesisReport> {
    if !(grid_max > 0.0) || grid_n < 8 {
        return Err(Error::domain(
            "hypothesis grid needs grid_max > 0 and at least 8 points",
        ));
    }
    let grid = optimize::log_grid(grid_max * 1e-9, grid_max, grid_n - 1, true);
    let distinct = model.distinct();
    let mut per_distinct = Vec::with_capacity(distinct.len());
    for (q, _) in &distinct {
        per_distinct.push(component_bounds(q, &grid)?);
    }

    let mut h1_holds = true;
    let reference = &per_distinct[0].h_on_grid;
    for b in &per_distinct[1..] {
        let agrees = reference
            .iter()
            .zip(&b.h_on_grid)
            .all(|(x, y)| (x - y).abs() <= 1e-10 * x.abs().max(y.abs()).max(1e-300));
        if !agrees {
            h1_holds = false;
        }
    }

    let mut report = HypothesisReport {
        d: Vec::with_capacity(model.m()),
        e: Vec::with_capacity(model.m()),
        q_lower: f64::INFINITY,
        h_lower: f64::INFINITY,
        h_upper: f64::NEG_INFINITY,
        h1_holds,
        h2_holds: true,
        d_certified: Vec::with_capacity(model.m()),
        reference_d: Vec::with_capacity(model.m()),
        reference_e: Vec::with_capacity(model.m()),
        failures: Vec::new(),
        grid: format!(
            "u = 0 plus {} log-spaced points on [{:e}, {:e}], golden-section refinement, limits at infinity",
            grid_n - 1,
            grid_max * 1e-9,
            grid_max
        ),
    };
    for b in &per_distinct {
        report.q_lower = report.q_lower.min(b.q_inf);
        report.h_lower = report.h_lower.min(b.h_inf);
        report.h_upper = report.h_upper.max(b.h_sup);
        if let Some(f) = &b.failure {
            report.failures.push(f.clone());
        }
    }
    for q in model.components() {
        let idx = distinct.iter().position(|(p, _)| *p == q).expect("component is listed");
        let b = &per_distinct[idx];
        report.d.push(b.d);
        report.e.push(b.e);
        report.d_certified.push(b.certified);
        let reference = q.reference_bounds();
        report.reference_d.push(reference.map(|r| r.0));
        report.reference_e.push(reference.and_then(|r| r.1));
    }
    if !h1_holds {
        report
            .failures
            .push("h differs between components (common-h hypothesis)".into());
    }
    if !(report.q_lower > 0.0) {
        report
            .failures
            .push(format!("inf (1+u)q(u) = {} is not positive", report.q_lower));
    }
    if !(report.h_lower > 0.0) {
        report
            .failures
            .push(format!("inf (1+u)h(u) = {} is not positive", report.h_lower));
    }
    report.h2_holds =
        report.failures.iter().all(|f| f.starts_with("h differs")) && report.e.iter().all(|e| e.is_finite());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn shub_smale_binomials() {
        assert_eq!(shub_smale_q(1).unwrap().coeffs(), &[1.0, 1.0]);
        assert_eq!(shub_smale_q(2).unwrap().coeffs(), &[1.0, 2.0, 1.0]);
        assert_eq!(shub_smale_q(4).unwrap().coeffs(), &[1.0, 4.0, 6.0, 4.0, 1.0]);
        assert!(matches!(shub_smale_q(0), Err(Error::Domain(_))));
    }

    #[test]
    fn real_roots_expansion() {
        assert_eq!(real_roots_q(&[1.0, 1.0]).unwrap().coeffs(), &[1.0, 2.0, 1.0]);
        assert_eq!(real_roots_q(&[1.0, 2.0]).unwrap().coeffs(), &[2.0, 3.0, 1.0]);
        assert_eq!(
            real_roots_q(&[2.0, 3.0, 4.0]).unwrap().coeffs(),
            &[24.0, 26.0, 9.0, 1.0]
        );
        let err = real_roots_q(&[0.5, 2.0]).unwrap_err().to_string();
        assert!(err.contains("homothety"), "{err}");
    }

    #[test]
    fn power_family() {
        assert_eq!(power_family_q(&[1.0, 1.0], 3).unwrap().coeffs(), &[1.0, 3.0, 3.0, 1.0]);
        assert_eq!(power_family_q(&[1.0, 2.0, 0.5], 1).unwrap().coeffs(), &[1.0, 2.0, 0.5]);
        let sq = power_family_q(&[1.0, 2.0, 0.5], 2).unwrap();
        assert_eq!(sq.coeffs(), &[1.0, 4.0, 5.0, 2.0, 0.25]);
        assert_eq!(sq.degree(), 4);
        let err = power_family_q(&[1.0, 2.0, 1.5], 2).unwrap_err().to_string();
        assert!(err.contains("k = 2"), "{err}");
    }

    #[test]
    fn rejects_bad_coefficients() {
        assert!(CovarianceQ::new(vec![1.0]).is_err());
        assert!(CovarianceQ::new(vec![1.0, -1.0, 1.0]).is_err());
        assert!(CovarianceQ::new(vec![1.0, 1.0, 0.0]).is_err());
        assert!(CovarianceQ::new(vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn profile_point_values() {
        let q3 = shub_smale_q(3).unwrap();
        let p0 = q3.profile().at(0.0).unwrap();
        assert!(close(p0.q, 3.0, 1e-15) && close(p0.h, 1.0, 1e-15));
        let p1 = q3.profile().at(1.0).unwrap();
        assert!(close(p1.q, 1.5, 1e-15) && close(p1.h, 0.5, 1e-15));
        let rr = real_roots_q(&[1.0, 2.0]).unwrap();
        assert!(close(rr.profile().q(0.0).unwrap(), 1.5, 1e-15));
    }

    #[test]
    fn h_matches_definition() {
        let q = real_roots_q(&[1.0, 2.5, 4.0]).unwrap();
        for &u in &[0.0, 0.1, 1.0, 3.0, 17.0] {
            let pt = q.profile().at(u).unwrap();
            let direct = 1.0 + u * pt.r / pt.q;
            assert!(close(pt.h, direct, 1e-12), "u = {u}");
        }
    }

    #[test]
    fn vanishing_derivative_is_an_error() {
        let q = CovarianceQ::new(vec![1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(q.profile().q(0.0), Err(Error::Domain(_))));
        assert!(q.profile().q(0.5).is_ok());
    }

    #[test]
    fn serializes_as_coefficient_array() {
        let q = shub_smale_q(2).unwrap();
        assert_eq!(serde_json::to_string(&q).unwrap(), "[1.0,2.0,1.0]");
        let back: CovarianceQ = serde_json::from_str("[2.0,3.0,1.0]").unwrap();
        assert_eq!(back, real_roots_q(&[1.0, 2.0]).unwrap());
        assert!(serde_json::from_str::<CovarianceQ>("[1.0,-2.0]").is_err());
    }

    #[test]
    fn hypotheses_shub_smale() {
        let model = NoiseModel::uniform(shub_smale_q(3).unwrap(), 2).unwrap();
        let r = check_hypotheses(&model, DEFAULT_GRID_MAX, DEFAULT_GRID_N).unwrap();
        assert_eq!(r.d, vec![3.0, 3.0]);
        assert_eq!(r.e, vec![0.0, 0.0]);
        assert!(close(r.q_lower, 3.0, 1e-12));
        assert!(close(r.h_lower, 1.0, 1e-12) && close(r.h_upper, 1.0, 1e-12));
        assert!(r.h1_holds && r.h2_holds);
    }

    #[test]
    fn hypotheses_real_roots() {
        let model = NoiseModel::uniform(real_roots_q(&[1.0, 2.0]).unwrap(), 3).unwrap();
        let r = check_hypotheses(&model, DEFAULT_GRID_MAX, DEFAULT_GRID_N).unwrap();
        assert!(r.d.iter().all(|&d| d == 2.0));
        assert!(r.d_certified.iter().all(|&c| c));
        // (1+u)(2 − (1+u)q) = (1+u)/(u+2) → 1.
        assert!(r.e.iter().all(|&e| close(e, 1.0, 1e-9)));
        assert_eq!(r.reference_d[0], Some(2.0));
        assert_eq!(r.reference_e[0], Some(2.0));
        assert!(r.e[0] <= r.reference_e[0].unwrap());
        assert!(r.h2_holds);
    }

    #[test]
    fn mixed_model_breaks_common_h() {
        let model =
            NoiseModel::from_components(vec![shub_smale_q(2).unwrap(), real_roots_q(&[1.0, 2.0]).unwrap()]).unwrap();
        // At u = 1: 1/2 versus (6/5)(1/4 + 2/9) = 0.5666…
        let h_rr = model.component(1).profile().h(1.0).unwrap();
        assert!(close(h_rr, 1.2 * (0.25 + 2.0 / 9.0), 1e-14));
        let r = check_hypotheses(&model, DEFAULT_GRID_MAX, DEFAULT_GRID_N).unwrap();
        assert!(!r.h1_holds);
    }

    #[test]
    fn weighted_limits() {
        for d in 1..=8 {
            let q = shub_smale_q(d).unwrap();
            let p = q.profile();
            let u = 1e6;
            assert!((p.q_weighted(u).unwrap() - d as f64).abs() < 1e-9);
            assert!((p.h_weighted(u).unwrap() - p.h_weighted_limit()).abs() < 1e-5);
            assert!(close(p.h_weighted_limit(), 1.0, 1e-15));
        }
        let q = real_roots_q(&[1.0, 3.0, 5.0]).unwrap();
        let p = q.profile();
        let lim = q.coeffs()[2] / (3.0 * q.coeffs()[3]);
        assert!(close(p.h_weighted_limit(), lim, 1e-15));
        assert!((p.h_weighted(1e6).unwrap() - lim).abs() < 1e-4);
    }

    #[test]
    fn shub_smale_identities_on_grid() {
        for d in 1..=6 {
            let p = shub_smale_q(d).unwrap();
            for u in optimize::log_grid(1e-6, 1e3, 200, true) {
                assert!(close(p.profile().q_weighted(u).unwrap(), d as f64, 1e-12));
                assert!(close(p.profile().h_weighted(u).unwrap(), 1.0, 1e-12));
            }
        }
    }

    #[test]
    fn real_roots_h_closed_form() {
        let alphas = [1.0, 1.5, 4.0];
        let q = real_roots_q(&alphas).unwrap();
        for u in optimize::log_grid(1e-6, 1e3, 200, true) {
            let qq: f64 = alphas.iter().map(|a| 1.0 / (u + a)).sum();
            let h: f64 = alphas.iter().map(|a| a / ((u + a) * (u + a))).sum::<f64>() / qq;
            assert!(close(q.profile().q(u).unwrap(), qq, 1e-12));
            assert!(close(q.profile().h(u).unwrap(), h, 1e-12));
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn h_is_nonnegative(coeffs in prop::collection::vec(0.0f64..10.0, 1..7), lead in 0.1f64..5.0, c0 in 0.1f64..5.0, c1 in 0.01f64..5.0) {
                let mut c = vec![c0, c1];
                c.extend(coeffs);
                c.push(lead);
                let q = CovarianceQ::new(c).unwrap();
                for u in optimize::log_grid(1e-6, 1e4, 64, true) {
                    prop_assert!(q.profile().h(u).unwrap() >= 0.0);
                }
            }
        }
    }
}
