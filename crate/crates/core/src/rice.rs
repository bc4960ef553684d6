//! Kac–Rice engines.
//!
//! For radially symmetric integrands the expected root count reduces to
//!
//! ```text
//! E N = A_m · σ_{m−1} · ∫_0^∞ ρ^{m−1} ∏√q_i(ρ²) · E_h(ρ²) · damping(ρ) dρ,
//! A_m = Γ(m/2) / (√2 · π^{(m+1)/2}),
//! ```
//!
//! where `E_h(x) = E[(Σ h_i(x) ξ_i²)^{1/2}]`. With a common `h` this is
//! `√h(x)·E‖ξ_m‖`. `A_m = (2π)^{−m/2} L_{m−1}` comes from writing
//! `E|det| = √h · L_m` and is the normalisation that makes the Kostlan case
//! come out as `√(∏ d_i)`.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{CovarianceQ, HypothesisReport, NoiseModel};
use crate::error::{Error, Result};
use crate::estimate::{McEstimate, Method, Moments};
use crate::poly;
use crate::quadrature::{self, half_line_point, integrate_log, kronrod_nodes, Tolerance};
use crate::signal::{damping_lower_bound, DampingKind, RadialField, SignalComponent, SignalSpec, SnrReport};
use crate::special::{gamma_shifted_1d, ln_chi_mean, log_gamma, sphere_area};
use crate::stream::{self, tag};

/// Where the radial integral stops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialCutoff {
    /// Integrate over `[0, R]` only.
    Fixed(f64),
    /// Integrate the whole half-line and report the radius beyond which the
    /// integrand carries less than this fraction of the total.
    TailMass(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub cutoff: RadialCutoff,
    /// Draws used for `E_h` when the `h_i` differ.
    pub e_h_samples: u64,
    pub seed: u64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            abs_tol: 1e-300,
            rel_tol: 1e-10,
            max_subdivisions: 4000,
            cutoff: RadialCutoff::TailMass(1e-9),
            e_h_samples: 10_000,
            seed: 0,
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::validation("quadrature tolerances must be positive"));
        }
        match self.cutoff {
            RadialCutoff::Fixed(r) if !(r > 0.0) || !r.is_finite() => Err(Error::validation(format!(
                "fixed cutoff radius must be positive and finite, got {r}"
            ))),
            RadialCutoff::TailMass(e) if !(e > 0.0 && e < 0.1) => {
                Err(Error::validation(format!("tail mass must lie in (0, 0.1), got {e}")))
            }
            _ => Ok(()),
        }
    }

    fn tolerance(&self) -> Tolerance {
        Tolerance {
            abs: 0.0,
            rel: self.rel_tol,
            max_subdivisions: self.max_subdivisions,
            initial_panels: 16,
        }
    }

    fn upper(&self) -> f64 {
        match self.cutoff {
            RadialCutoff::Fixed(r) => r,
            RadialCutoff::TailMass(_) => f64::INFINITY,
        }
    }
}

/// `ln A_m` with `A_m = Γ(m/2)/(√2·π^{(m+1)/2})`.
pub fn ln_normalization(m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("dimension must be >= 1"));
    }
    Ok(log_gamma(m as f64 / 2.0)? - 0.5 * std::f64::consts::LN_2 - 0.5 * (m as f64 + 1.0) * std::f64::consts::PI.ln())
}

fn ln_prefactor(m: usize) -> Result<f64> {
    Ok(ln_normalization(m)? + sphere_area(m)?.log_magnitude)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EhMethod {
    /// All `h_i` coincide: `E_h = √h · E‖ξ_m‖`.
    ClosedForm,
    /// Monte Carlo with common random numbers across radii.
    MonteCarlo,
}

/// A computed expectation. `value` may overflow for large `m`; `ln_value`
/// does not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub value: f64,
    pub ln_value: f64,
    /// Quadrature error estimate (absolute).
    pub abs_err: f64,
    /// Monte Carlo standard error; zero for deterministic evaluations.
    pub stderr: f64,
    pub e_h: EhMethod,
    /// Radius beyond which the integrand carries less than the configured
    /// tail mass (or the fixed cutoff).
    pub radius: f64,
}

/// Distinct `(q, multiplicity)` pairs plus the `h` grouping.
struct Components<'a> {
    m: usize,
    qs: Vec<(&'a CovarianceQ, usize)>,
    common_h: bool,
}

impl<'a> Components<'a> {
    fn new(model: &'a NoiseModel) -> Result<Components<'a>> {
        Ok(Components {
            m: model.m(),
            qs: model.distinct(),
            common_h: model.hypotheses()?.h1_holds,
        })
    }

    /// `(m−1) ln ρ + ½ Σ ln q_i(ρ²)`.
    fn ln_base(&self, rho: f64) -> f64 {
        let u = rho * rho;
        let ln_rho = if self.m == 1 {
            0.0
        } else {
            (self.m - 1) as f64 * rho.ln()
        };
        let mut acc = ln_rho;
        for (q, n) in &self.qs {
            acc += 0.5 * *n as f64 * q.profile().q(u).map_or(f64::NAN, f64::ln);
        }
        acc
    }

    fn h(&self, rho: f64) -> Vec<f64> {
        self.qs
            .iter()
            .map(|(q, _)| q.profile().h(rho * rho).unwrap_or(f64::NAN))
            .collect()
    }
}

/// Radius past which the integral (given by its final panels in the
/// half-line variable) has less than `eps` of its total mass.
fn tail_radius(panels: &[(f64, f64, f64)], eps: f64) -> f64 {
    let mut sorted = panels.to_vec();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    let total: f64 = sorted.iter().map(|p| p.2).sum();
    let target = eps * total;
    let mut tail = 0.0;
    for &(a, b, v) in sorted.iter().rev() {
        if tail + v >= target {
            // mass taken as uniform in `s` across the crossing panel
            let frac = if v > 0.0 {
                ((tail + v - target) / v).clamp(0.0, 1.0)
            } else {
                0.0
            };
            return half_line_point(0.0, a + frac * (b - a)).0;
        }
        tail += v;
    }
    0.0
}

/// Integrate `exp(ln_f)` over `[0, upper)` with panels in the half-line
/// variable when `upper` is infinite.
fn radial_integral<F: Fn(f64) -> f64>(
    ln_f: F,
    settings: &QuadratureSettings,
) -> Result<(quadrature::LogIntegral, f64)> {
    let upper = settings.upper();
    let res = integrate_log(&ln_f, 0.0, upper, None, settings.tolerance())?;
    let radius = match settings.cutoff {
        RadialCutoff::Fixed(r) => r,
        RadialCutoff::TailMass(eps) => tail_radius(&res.inner.panels, eps),
    };
    Ok((res, radius))
}

/// Nodes `(ρ, weight)` of the final partition, with the half-line Jacobian
/// folded into the weight.
fn panel_nodes(panels: &[(f64, f64, f64)], infinite: bool) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(panels.len() * 15);
    for &(a, b, _) in panels {
        for (x, w) in kronrod_nodes(a, b) {
            if infinite {
                if x >= 1.0 {
                    continue;
                }
                let (rho, jac) = half_line_point(0.0, x);
                out.push((rho, w * jac));
            } else {
                out.push((x, w));
            }
        }
    }
    out
}

/// Chi-square draws `S_{g,k}` with `n_g` degrees of freedom, one stream per
/// group.
fn chi_square_draws(groups: &[usize], samples: u64, seed: u64) -> Vec<Vec<f64>> {
    groups
        .iter()
        .enumerate()
        .map(|(g, &n)| {
            let mut rng = stream::keyed_rng(seed, &[tag::E_H, g as u64]);
            (0..samples)
                .map(|_| {
                    (0..n)
                        .map(|_| {
                            let x: f64 = StandardNormal.sample(&mut rng);
                            x * x
                        })
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// Expected root count of the centered system (all `P_i ≡ 0`).
pub fn centered_expectation(model: &NoiseModel, settings: &QuadratureSettings) -> Result<Expectation> {
    settings.validate()?;
    let comps = Components::new(model)?;
    let m = comps.m;
    let ln_pre = ln_prefactor(m)?;
    if comps.common_h {
        let h0 = comps.qs[0].0;
        let ln_chi = ln_chi_mean(m)?;
        let ln_f = |rho: f64| comps.ln_base(rho) + 0.5 * h0.profile().h(rho * rho).map_or(f64::NAN, f64::ln) + ln_chi;
        let (res, radius) = radial_integral(ln_f, settings)?;
        let ln_value = res.log_value + ln_pre;
        return Ok(Expectation {
            value: ln_value.exp(),
            ln_value,
            abs_err: res.rel_err * ln_value.exp(),
            stderr: 0.0,
            e_h: EhMethod::ClosedForm,
            radius,
        });
    }

    let n = settings.e_h_samples.max(2);
    let groups: Vec<usize> = comps.qs.iter().map(|(_, k)| *k).collect();
    let draws = chi_square_draws(&groups, n, settings.seed);
    let e_h = |rho: f64| {
        let h = comps.h(rho);
        let mut acc = 0.0;
        for k in 0..n as usize {
            let s: f64 = h.iter().zip(&draws).map(|(hg, d)| hg * d[k]).sum();
            acc += s.sqrt();
        }
        acc / n as f64
    };
    let ln_f = |rho: f64| comps.ln_base(rho) + e_h(rho).ln();
    let (res, radius) = radial_integral(ln_f, settings)?;
    // Per-draw integrals on the final partition give the Monte Carlo error.
    let nodes = panel_nodes(&res.inner.panels, settings.upper().is_infinite());
    let weighted: Vec<(Vec<f64>, f64)> = nodes
        .iter()
        .map(|&(rho, w)| (comps.h(rho), w * (comps.ln_base(rho) - res.shift).exp()))
        .filter(|(_, w)| *w > 0.0 && w.is_finite())
        .collect();
    let per_draw: Vec<f64> = (0..n as usize)
        .into_par_iter()
        .map(|k| {
            weighted
                .iter()
                .map(|(h, w)| w * h.iter().zip(&draws).map(|(hg, d)| hg * d[k]).sum::<f64>().sqrt())
                .sum()
        })
        .collect();
    let mom = Moments::from_slice(&per_draw);
    let scale = (ln_pre + res.shift).exp();
    let ln_value = res.log_value + ln_pre;
    Ok(Expectation {
        value: ln_value.exp(),
        ln_value,
        abs_err: res.rel_err * ln_value.exp(),
        stderr: mom.stderr() * scale,
        e_h: EhMethod::MonteCarlo,
        radius,
    })
}

/// `√(∏ d_i)`, the Kostlan closed form.
pub fn kostlan_closed_form(degrees: &[usize]) -> f64 {
    (0.5 * degrees.iter().map(|&d| (d as f64).ln()).sum::<f64>()).exp()
}

/// Univariate coefficients of an `m = 1` signal.
fn univariate(signal: &SignalComponent) -> Result<Vec<f64>> {
    let p = signal.to_polynomial(0, 1)?;
    let mut c = vec![0.0; p.degree() + 1];
    for (j, a) in p.terms() {
        c[j.entries()[0] as usize] += a;
    }
    Ok(c)
}

/// Exact `E N` for `m = 1`:
///
/// ```text
/// ∫_R √(q h) · γ_1(|g'(t)|/√(q h)) · φ(g(t)) dt,   g = P/√Q(t²)
/// ```
///
/// with everything evaluated at `t²` and `φ` the standard normal density.
pub fn perturbed_exact_1d(signal: &SignalSpec, q: &CovarianceQ, settings: &QuadratureSettings) -> Result<Expectation> {
    settings.validate()?;
    if signal.m() != 1 {
        return Err(Error::domain(format!(
            "perturbed_exact_1d needs a single equation, got {}",
            signal.m()
        )));
    }
    let model = NoiseModel::uniform(q.clone(), 1)?;
    signal.validate(&model)?;
    let p = univariate(&signal.components[0])?;
    let dp = poly::derivative(&p);
    let dq = poly::derivative(q.coeffs());
    let f = |t: f64| -> f64 {
        let u = t * t;
        let qv = q.eval(u);
        let pt = q.profile().at(u).expect("profile defined for u >= 0");
        let sq = qv.sqrt();
        let pv = poly::eval_compensated(&p, t);
        let g = pv / sq;
        // g' = (P' − P·t·q)/√Q
        let qq = poly::eval_compensated(&dq, u) / qv;
        let gp = (poly::eval_compensated(&dp, t) - pv * t * qq) / sq;
        let scale = (pt.q * pt.h).sqrt();
        if scale == 0.0 {
            return 0.0;
        }
        scale * gamma_shifted_1d(gp.abs() / scale) * (-0.5 * g * g).exp() / (2.0 * std::f64::consts::PI).sqrt()
    };
    let both = |t: f64| f(t) + f(-t);
    let tol = settings.tolerance();
    let (integral, radius) = match settings.cutoff {
        RadialCutoff::Fixed(r) => (quadrature::integrate(both, 0.0, r, tol)?, r),
        RadialCutoff::TailMass(eps) => {
            let res = quadrature::integrate_half_line(both, 0.0, tol)?;
            let radius = tail_radius(&res.panels, eps);
            (res, radius)
        }
    };
    Ok(Expectation {
        value: integral.value,
        ln_value: integral.value.ln(),
        abs_err: integral.abs_err,
        stderr: 0.0,
        e_h: EhMethod::ClosedForm,
        radius,
    })
}

/// Budget for [`perturbed_radial_mc`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialMcSettings {
    /// Number of 15-point Kronrod panels, uniform in the half-line variable.
    pub panels: usize,
    pub det_samples: u64,
    pub seed: u64,
}

impl Default for RadialMcSettings {
    fn default() -> Self {
        RadialMcSettings {
            panels: 64,
            det_samples: 10_000,
            seed: 0,
        }
    }
}

/// First-column cofactors of `[v | B]` with `v`, `B` standard normal.
///
/// Only columns `2..m` of the Jacobian matter for the cofactors, and their
/// law does not depend on the radius, so one set serves every node.
fn cofactor_draws(m: usize, samples: u64, seed: u64) -> Vec<Vec<f64>> {
    (0..samples)
        .into_par_iter()
        .map(|k| {
            if m == 1 {
                return vec![1.0];
            }
            let mut rng = stream::keyed_rng(seed, &[tag::DETERMINANT, m as u64, k]);
            let entries: Vec<f64> = (0..m * m).map(|_| StandardNormal.sample(&mut rng)).collect();
            // Row-major fill of Mᵀ: row c of Mᵀ is column c of M.
            let mt = DMatrix::from_row_slice(m, m, &entries);
            let lu = mt.lu();
            let det = lu.determinant();
            let mut e1 = DVector::zeros(m);
            e1[0] = 1.0;
            match lu.solve(&e1) {
                Some(y) => y.iter().map(|v| v * det).collect(),
                None => vec![0.0; m],
            }
        })
        .collect()
}

/// Monte Carlo Kac–Rice evaluation for radial signals in any dimension.
///
/// At radius ρ the normalised Jacobian `T` has rows `ζ_i + α_i` with
/// `α_i = (g_i'(ρ)/√q_i, 0, …, 0)` and `Var ζ_i = diag(h_i, 1, …, 1)`.
/// Expanding `det T` along the radial column, it is Gaussian given the other
/// columns with mean `Σ α_i C_i` and variance `Σ h_i C_i²` (`C` the
/// cofactors), so `E|det T|` is averaged in closed form over that column and
/// by Monte Carlo over the rest. Each draw's integral is formed over all
/// nodes; the estimate and its standard error come from those integrals.
pub fn perturbed_radial_mc(signal: &SignalSpec, model: &NoiseModel, budget: &RadialMcSettings) -> Result<McEstimate> {
    signal.validate(model)?;
    if !signal.all_radial() {
        return Err(Error::domain(
            "perturbed_radial_mc needs every equation radial (or zero); use the bound chain for other signals",
        ));
    }
    if budget.det_samples < 2 || budget.panels == 0 {
        return Err(Error::validation(
            "radial Monte Carlo needs >= 2 samples and >= 1 panel",
        ));
    }
    let m = model.m();
    let fields: Vec<Option<RadialField>> = signal
        .components
        .iter()
        .zip(model.components())
        .map(|(c, q)| match c {
            SignalComponent::Radial { d, r } => RadialField::new(*d, *r, q).map(Some),
            _ => Ok(None),
        })
        .collect::<Result<_>>()?;
    let ln_pre = sphere_area(m)?.log_magnitude - 0.5 * m as f64 * (2.0 * std::f64::consts::PI).ln();

    struct Node {
        weight: f64,
        alpha: Vec<f64>,
        h: Vec<f64>,
    }
    let mut nodes = Vec::with_capacity(budget.panels * 15);
    for p in 0..budget.panels {
        let a = p as f64 / budget.panels as f64;
        let b = (p + 1) as f64 / budget.panels as f64;
        for (s, w) in kronrod_nodes(a, b) {
            let (rho, jac) = half_line_point(0.0, s);
            let u = rho * rho;
            let mut ln_w = ln_pre + w.ln() + jac.ln();
            if m > 1 {
                ln_w += (m - 1) as f64 * rho.ln();
            }
            let mut alpha = Vec::with_capacity(m);
            let mut h = Vec::with_capacity(m);
            let mut damp = 0.0;
            for (field, q) in fields.iter().zip(model.components()) {
                let pt = q.profile().at(u)?;
                ln_w += 0.5 * pt.q.ln();
                h.push(pt.h);
                match field {
                    Some(f) => {
                        let g = f.g(rho);
                        damp += g * g;
                        alpha.push(f.g_prime(rho) / pt.q.sqrt());
                    }
                    None => alpha.push(0.0),
                }
            }
            ln_w -= 0.5 * damp;
            let weight = ln_w.exp();
            if weight > 0.0 && weight.is_finite() {
                nodes.push(Node { weight, alpha, h });
            }
        }
    }

    let cof = cofactor_draws(m, budget.det_samples, budget.seed);
    let per_draw: Vec<f64> = cof
        .par_iter()
        .map(|c| {
            nodes
                .iter()
                .map(|nd| {
                    let mean: f64 = nd.alpha.iter().zip(c).map(|(a, ci)| a * ci).sum();
                    let var: f64 = nd.h.iter().zip(c).map(|(h, ci)| h * ci * ci).sum();
                    let sd = var.sqrt();
                    if sd == 0.0 {
                        nd.weight * mean.abs()
                    } else {
                        nd.weight * sd * gamma_shifted_1d(mean.abs() / sd)
                    }
                })
                .sum()
        })
        .collect();
    let mom = Moments::from_slice(&per_draw);
    Ok(McEstimate::from_moments(&mom, budget.seed, Method::RadialRice))
}

/// `∫_lo^hi ρ^{m−1}/(1+ρ²)^{(m+1)/2} dρ` by quadrature (`hi` may be infinite).
pub fn radial_beta_integral(m: usize, lo: f64, hi: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("dimension must be >= 1"));
    }
    let mf = m as f64;
    let ln_f = |rho: f64| {
        let lr = if m == 1 { 0.0 } else { (mf - 1.0) * rho.ln() };
        lr - 0.5 * (mf + 1.0) * rho.mul_add(rho, 1.0).ln()
    };
    let tol = Tolerance {
        rel: 1e-12,
        ..Tolerance::default()
    };
    let res = integrate_log(ln_f, lo, hi, None, tol)?;
    Ok(res.log_value.exp())
}

/// `√π·Γ(m/2)/(2·Γ((m+1)/2))`, the same integral over `[0, ∞)`.
pub fn radial_beta_closed_form(m: usize) -> Result<f64> {
    let mf = m as f64;
    Ok((0.5 * std::f64::consts::PI.ln() + log_gamma(mf / 2.0)? - log_gamma((mf + 1.0) / 2.0)?).exp() / 2.0)
}

/// `(π/2)·(r²/(1+r²))^{(m−1)/2}`, an upper bound for the integral over `[0, r]`.
pub fn radial_beta_head_bound(m: usize, r: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 * (r * r / (1.0 + r * r)).powf((m as f64 - 1.0) / 2.0)
}

/// Every computable quantity of the perturbed upper-bound chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundChain {
    pub m: usize,
    pub r0: f64,
    pub ell: f64,
    /// `(h̄/h̲)^{1/2}·exp((m A_m/q̲ + m B_m/(h̲ q̲))/2)`.
    pub s_m: f64,
    /// Centered integrand times `exp(−½ Σ P_i²/Q_i)`, over all of `R^m`.
    #[serde(rename = "H_m")]
    pub h_m: f64,
    /// The part of `H_m` inside the ball of radius `r0`.
    #[serde(rename = "H_m_inner")]
    pub h1_part: f64,
    #[serde(rename = "H_m_outer")]
    pub h2_part: f64,
    /// `exp(−ℓ m/2)·E N^X`, which dominates the outer part.
    #[serde(rename = "H_m_outer_bound")]
    pub h2_bound: f64,
    /// Inner part with the damping dropped and `q_i`, `h` bounded by
    /// `D_i/(1+ρ²)`, `h̄/(1+ρ²)`; radial integral by quadrature.
    #[serde(rename = "H_m_inner_bound")]
    pub h1_bound: f64,
    /// Same with the radial integral replaced by `(π/2)(r0²/(1+r0²))^{(m−1)/2}`.
    #[serde(rename = "H_m_inner_bound_closed")]
    pub h1_bound_closed: f64,
    /// `C_1·√m·(r0²/(r0²+½))^{m/2}·E N^X`; valid only for `m >= m0`.
    #[serde(rename = "H_m_inner_bound_asymptotic")]
    pub h1_bound_asymptotic: f64,
    /// `π e² (h̄/h̲)^{1/2} √(1+r0²)/r0`.
    pub c1: f64,
    /// `E N^X`.
    pub centered: f64,
    /// `s_m · H_m`, an upper bound for `E N^{P+X}`.
    pub final_bound: f64,
    /// How the damping factor was handled; anything but `exact` makes `H_m`
    /// an upper bound of the true value.
    pub damping: DampingKind,
}

/// Check the hypotheses the bound chain relies on.
pub fn require_hypotheses(hyp: &HypothesisReport, snr: &SnrReport) -> Result<()> {
    if !hyp.h1_holds {
        return Err(Error::Hypothesis(
            "common-h hypothesis fails: the h_i differ between equations".into(),
        ));
    }
    if !hyp.h2_holds {
        return Err(Error::Hypothesis(format!(
            "uniform q/h bounds fail: {}",
            hyp.failures.join("; ")
        )));
    }
    if !snr.h3_holds {
        return Err(Error::Hypothesis(
            "signal-over-noise aggregates A_m, B_m are not finite".into(),
        ));
    }
    if !snr.h4_holds {
        return Err(Error::Hypothesis(format!(
            "lower signal-over-noise bound fails: ell = {} at r0 = {}",
            snr.ell, snr.r0
        )));
    }
    Ok(())
}

/// Evaluate the upper-bound chain after checking every hypothesis it needs.
pub fn bound_chain(
    signal: &SignalSpec,
    model: &NoiseModel,
    snr: &SnrReport,
    hyp: &HypothesisReport,
    settings: &QuadratureSettings,
) -> Result<BoundChain> {
    require_hypotheses(hyp, snr)?;
    bound_chain_unchecked(signal, model, snr, hyp, settings)
}

/// The chain without the hypothesis gate. The identity `final_bound >=
/// E N^{P+X}` only needs the uniform `q`/`h` bounds; the `ℓ`-based tail
/// bound is meaningless (but still computed) when `ℓ = 0`.
pub fn bound_chain_unchecked(
    signal: &SignalSpec,
    model: &NoiseModel,
    snr: &SnrReport,
    hyp: &HypothesisReport,
    settings: &QuadratureSettings,
) -> Result<BoundChain> {
    settings.validate()?;
    signal.validate(model)?;
    if !hyp.h1_holds {
        return Err(Error::Hypothesis(
            "common-h hypothesis fails: the h_i differ between equations".into(),
        ));
    }
    let comps = Components::new(model)?;
    let m = comps.m;
    let mf = m as f64;
    let r0 = snr.r0;
    let ln_pre = ln_prefactor(m)?;
    let h0 = comps.qs[0].0;
    let ln_chi = ln_chi_mean(m)?;
    let ln_centered_f =
        |rho: f64| comps.ln_base(rho) + 0.5 * h0.profile().h(rho * rho).map_or(f64::NAN, f64::ln) + ln_chi;

    let centered = centered_expectation(model, settings)?;
    let mut worst = DampingKind::Exact;
    let ln_damped = |rho: f64| -> f64 {
        let (d, _) = damping_lower_bound(signal, model, rho).unwrap_or((0.0, DampingKind::Dropped));
        ln_centered_f(rho) - 0.5 * d
    };
    // A probe of the damping kind; it depends on the component types only.
    if let Ok((_, k)) = damping_lower_bound(signal, model, r0) {
        worst = worst.max(k);
    }

    let tol = settings.tolerance();
    let shift = quadrature::log_peak(&ln_centered_f, 0.0, r0.max(1.0) * 4.0, 2048);
    let inner = integrate_log(ln_damped, 0.0, r0, Some(shift), tol)?;
    let outer = integrate_log(ln_damped, r0, f64::INFINITY, Some(shift), tol)?;
    let scale = (ln_pre + shift).exp();
    let h1_part = inner.inner.value * scale;
    let h2_part = outer.inner.value * scale;
    let h_m = h1_part + h2_part;

    let ratio = hyp.h_upper / hyp.h_lower;
    let s_m = ratio.sqrt() * (0.5 * (mf * snr.a_m / hyp.q_lower + mf * snr.b_m / (hyp.h_lower * hyp.q_lower))).exp();
    let h2_bound = (-0.5 * snr.ell * mf).exp() * centered.value;

    let ln_d: f64 = hyp.d.iter().map(|d| 0.5 * d.ln()).sum();
    let ln_inner_pre = ln_pre + 0.5 * hyp.h_upper.ln() + ln_chi + ln_d;
    let h1_bound = (ln_inner_pre).exp() * radial_beta_integral(m, 0.0, r0)?;
    let h1_bound_closed = (ln_inner_pre).exp() * radial_beta_head_bound(m, r0);
    let c1 = std::f64::consts::PI * std::f64::consts::E.powi(2) * ratio.sqrt() * (1.0 + r0 * r0).sqrt() / r0;
    let h1_bound_asymptotic = c1 * mf.sqrt() * (r0 * r0 / (r0 * r0 + 0.5)).powf(mf / 2.0) * centered.value;

    Ok(BoundChain {
        m,
        r0,
        ell: snr.ell,
        s_m,
        h_m,
        h1_part,
        h2_part,
        h2_bound,
        h1_bound,
        h1_bound_closed,
        h1_bound_asymptotic,
        c1,
        centered: centered.value,
        final_bound: s_m * h_m,
        damping: worst,
    })
}

/// Radius enclosing all but `eps` of the centered expected root count.
pub fn centered_tail_radius(model: &NoiseModel, eps: f64) -> Result<f64> {
    let settings = QuadratureSettings {
        cutoff: RadialCutoff::TailMass(eps),
        rel_tol: 1e-8,
        ..QuadratureSettings::default()
    };
    Ok(centered_expectation(model, &settings)?.radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::{real_roots_q, shub_smale_q};
    use crate::signal::{snr_report, SearchSettings};
    use crate::special::chi_mean;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn kostlan_examples() {
        let s = QuadratureSettings::default();
        let one = NoiseModel::uniform(shub_smale_q(4).unwrap(), 1).unwrap();
        assert!(rel(centered_expectation(&one, &s).unwrap().value, 2.0) < 1e-6);
        let three = NoiseModel::uniform(shub_smale_q(2).unwrap(), 3).unwrap();
        assert!(rel(centered_expectation(&three, &s).unwrap().value, 8f64.sqrt()) < 1e-6);
        let mixed = NoiseModel::from_components(vec![shub_smale_q(2).unwrap(), shub_smale_q(3).unwrap()]).unwrap();
        let e = centered_expectation(&mixed, &s).unwrap();
        assert_eq!(e.e_h, EhMethod::ClosedForm);
        assert!(rel(e.value, 6f64.sqrt()) < 1e-6);
        let lin = NoiseModel::uniform(shub_smale_q(1).unwrap(), 1).unwrap();
        assert!((centered_expectation(&lin, &s).unwrap().value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn normalization_is_consistent_with_l_m() {
        for m in 1..=30 {
            let lhs = ln_normalization(m).unwrap();
            let rhs = -0.5 * m as f64 * (2.0 * std::f64::consts::PI).ln()
                + if m > 1 {
                    crate::special::l_m(m - 1).unwrap().log_magnitude
                } else {
                    0.0
                };
            assert!((lhs - rhs).abs() < 1e-12, "m={m}");
        }
    }

    #[test]
    fn mixed_h_uses_monte_carlo() {
        let model =
            NoiseModel::from_components(vec![shub_smale_q(2).unwrap(), real_roots_q(&[1.0, 2.0]).unwrap()]).unwrap();
        let e = centered_expectation(&model, &QuadratureSettings::default()).unwrap();
        assert_eq!(e.e_h, EhMethod::MonteCarlo);
        assert!(e.stderr > 0.0 && e.stderr < 1e-2 * e.value);
        // Same result through the radial Monte Carlo engine (zero signal).
        let mc = perturbed_radial_mc(&SignalSpec::zero(2), &model, &RadialMcSettings::default()).unwrap();
        let combined = (e.stderr.powi(2) + mc.stderr.powi(2)).sqrt();
        assert!(
            (e.value - mc.mean).abs() < 4.0 * combined,
            "{} vs {} ± {combined}",
            e.value,
            mc.mean
        );
    }

    #[test]
    fn exact_1d_limits() {
        let s = QuadratureSettings::default();
        for d in 1..=6 {
            let q = shub_smale_q(d).unwrap();
            let v = perturbed_exact_1d(&SignalSpec::zero(1), &q, &s).unwrap().value;
            assert!(rel(v, (d as f64).sqrt()) < 1e-6, "d={d}: {v}");
        }
        let q = shub_smale_q(2).unwrap();
        let small = SignalSpec::separable(1, &[-1e-4, 0.0, 1e-4]);
        let v = perturbed_exact_1d(&small, &q, &s).unwrap().value;
        assert!((v - 2f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn radial_mc_matches_exact_1d() {
        let q = shub_smale_q(2).unwrap();
        let model = NoiseModel::uniform(q.clone(), 1).unwrap();
        let sig = SignalSpec::radial(1, 2, 1.0);
        let exact = perturbed_exact_1d(&sig, &q, &QuadratureSettings::default())
            .unwrap()
            .value;
        let mc = perturbed_radial_mc(&sig, &model, &RadialMcSettings::default()).unwrap();
        assert!(
            (mc.mean - exact).abs() <= (4.0 * mc.stderr).max(1e-8),
            "{} vs {exact}",
            mc.mean
        );
    }

    #[test]
    fn radial_mc_zero_signal_m2() {
        let model = NoiseModel::uniform(shub_smale_q(2).unwrap(), 2).unwrap();
        let mc = perturbed_radial_mc(&SignalSpec::zero(2), &model, &RadialMcSettings::default()).unwrap();
        assert!((mc.mean - 2.0).abs() < 4.0 * mc.stderr, "{} ± {}", mc.mean, mc.stderr);
    }

    #[test]
    fn beta_integral() {
        for m in 1..=50 {
            let q = radial_beta_integral(m, 0.0, f64::INFINITY).unwrap();
            let c = radial_beta_closed_form(m).unwrap();
            assert!(rel(q, c) < 1e-9, "m={m}");
            assert!(q > (-2.0f64).exp() / (m as f64).sqrt());
        }
        assert!(rel(radial_beta_closed_form(1).unwrap(), std::f64::consts::FRAC_PI_2) < 1e-15);
        for m in 1..=20 {
            assert!(radial_beta_integral(m, 0.0, 2.0).unwrap() <= radial_beta_head_bound(m, 2.0));
        }
    }

    #[test]
    fn chain_for_zero_signal_is_rejected_and_radial_is_consistent() {
        let model = NoiseModel::uniform(shub_smale_q(2).unwrap(), 2).unwrap();
        let hyp = model.hypotheses().unwrap().clone();
        let ss = SearchSettings::default();
        let zero = SignalSpec::zero(2);
        let snr0 = snr_report(&zero, &model, 2.0, &ss).unwrap();
        assert!(matches!(
            bound_chain(&zero, &model, &snr0, &hyp, &QuadratureSettings::default()),
            Err(Error::Hypothesis(_))
        ));

        let sig = SignalSpec::radial(2, 2, 1.0);
        let snr = snr_report(&sig, &model, 2.0, &ss).unwrap();
        let chain = bound_chain(&sig, &model, &snr, &hyp, &QuadratureSettings::default()).unwrap();
        assert_eq!(chain.damping, DampingKind::Exact);
        assert!(chain.h_m < chain.centered);
        assert!(chain.h2_part <= chain.h2_bound);
        assert!(chain.h1_part <= chain.h1_bound * (1.0 + 1e-9));
        assert!(chain.h1_bound <= chain.h1_bound_closed * (1.0 + 1e-12));
        assert!((chain.h2_bound - (-0.36f64).exp() * 2.0).abs() < 1e-6);
        assert!(rel(chain.final_bound, chain.s_m * chain.h_m) < 1e-15);
        let mc = perturbed_radial_mc(&sig, &model, &RadialMcSettings::default()).unwrap();
        assert!(mc.mean <= chain.final_bound + 4.0 * mc.stderr);
    }

    #[test]
    fn zero_signal_chain_reduces_to_centered() {
        let model = NoiseModel::uniform(shub_smale_q(3).unwrap(), 2).unwrap();
        let hyp = model.hypotheses().unwrap().clone();
        let zero = SignalSpec::zero(2);
        let snr = snr_report(&zero, &model, 1.0, &SearchSettings::default()).unwrap();
        let chain = bound_chain_unchecked(&zero, &model, &snr, &hyp, &QuadratureSettings::default()).unwrap();
        assert!(rel(chain.h_m, chain.centered) < 1e-8);
        assert!(rel(chain.s_m, 1.0) < 1e-12);
        assert!(rel(chain.h1_part + chain.h2_part, chain.h_m) < 1e-14);
    }

    #[test]
    fn radial_formula_matches_planar_tensor_quadrature() {
        let model = NoiseModel::from_components(vec![shub_smale_q(2).unwrap(), shub_smale_q(3).unwrap()]).unwrap();
        let radial = centered_expectation(&model, &QuadratureSettings::default())
            .unwrap()
            .value;
        // Cartesian integration of the same integrand over the plane.
        let a2 = ln_normalization(2).unwrap().exp();
        let chi2 = chi_mean(2).unwrap();
        let q2 = shub_smale_q(2).unwrap();
        let q3 = shub_smale_q(3).unwrap();
        let f = |x: f64, y: f64| {
            let u = x * x + y * y;
            let (p2, p3) = (q2.profile().at(u).unwrap(), q3.profile().at(u).unwrap());
            a2 * (p2.q * p3.q).sqrt() * p2.h.sqrt() * chi2
        };
        let tol = Tolerance {
            rel: 1e-12,
            ..Tolerance::default()
        };
        let inner = |x: f64| quadrature::integrate_half_line(|y| f(x, y), 0.0, tol).unwrap().value;
        let quadrant = quadrature::integrate_half_line(inner, 0.0, tol).unwrap().value;
        assert!(rel(4.0 * quadrant, radial) < 1e-8, "{} vs {radial}", 4.0 * quadrant);
    }

    #[test]
    fn radial_mc_budget_ladder_converges() {
        let model = NoiseModel::uniform(shub_smale_q(2).unwrap(), 3).unwrap();
        let sig = SignalSpec::radial(3, 2, 1.0);
        let runs: Vec<McEstimate> = [100u64, 1_000, 10_000]
            .iter()
            .map(|&n| {
                perturbed_radial_mc(
                    &sig,
                    &model,
                    &RadialMcSettings {
                        det_samples: n,
                        seed: 11,
                        ..RadialMcSettings::default()
                    },
                )
                .unwrap()
            })
            .collect();
        for w in runs.windows(2) {
            let comb = (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
            assert!((w[0].mean - w[1].mean).abs() < 4.0 * comb);
        }
    }
}
