//! Deterministic signals `P_1, …, P_m` and the signal-over-noise functionals
//!
//! ```text
//! H(P,Q)   = sup_t (1+‖t‖)  ‖∇g(t)‖
//! K(P,Q)   = sup_t (1+‖t‖²) |∂_ρ g(t)|
//! L(P,Q,r) = inf_{‖t‖≥r} g(t)²
//! ```
//!
//! of the normalised field `g = P/√Q(‖t‖²)`.
//!
//! Radial signals reduce to one variable and are computed to grid-plus-golden
//! accuracy. Separable signals `T(t_i)` reduce to the half-plane
//! `(t_i, ‖t_rest‖)`. Dense signals are searched from quasi-random starts and
//! reported as one-sided estimates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{CovarianceQ, NoiseModel};
use crate::ensemble::{enumerate, MultiIndex, SampledPolynomial};
use crate::error::{Error, Result};
use crate::optimize;
use crate::poly;

/// One equation of the signal system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum SignalComponent {
    /// `‖t‖^d − r^d` with `d` even.
    Radial {
        d: usize,
        r: f64,
    },
    /// `T(t_i)` for the equation's own coordinate `i`; `coeffs` lowest first.
    Separable {
        coeffs: Vec<f64>,
    },
    Dense {
        poly: SampledPolynomial,
    },
    Zero,
}

impl SignalComponent {
    pub fn is_zero(&self) -> bool {
        match self {
            SignalComponent::Zero => true,
            SignalComponent::Separable { coeffs } => coeffs.iter().all(|c| *c == 0.0),
            SignalComponent::Dense { poly } => poly.terms().iter().all(|(_, a)| *a == 0.0),
            SignalComponent::Radial { .. } => false,
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            SignalComponent::Radial { d, .. } => *d,
            SignalComponent::Separable { coeffs } => poly::trim(coeffs, 0.0).len().saturating_sub(1),
            SignalComponent::Dense { poly } => poly.degree(),
            SignalComponent::Zero => 0,
        }
    }

    /// Value and gradient at `t` when this is equation `i`.
    pub fn value_and_gradient(&self, i: usize, t: &[f64]) -> Result<(f64, Vec<f64>)> {
        let m = t.len();
        match self {
            SignalComponent::Zero => Ok((0.0, vec![0.0; m])),
            SignalComponent::Radial { d, r } => {
                let rho2: f64 = t.iter().map(|x| x * x).sum();
                let half = (*d / 2) as i32;
                let value = rho2.powi(half) - r.powi(*d as i32);
                let scale = if half == 0 {
                    0.0
                } else {
                    *d as f64 * rho2.powi(half - 1)
                };
                Ok((value, t.iter().map(|x| scale * x).collect()))
            }
            SignalComponent::Separable { coeffs } => {
                if i >= m {
                    return Err(Error::domain("separable equation index exceeds the dimension"));
                }
                let mut grad = vec![0.0; m];
                grad[i] = poly::eval_compensated(&poly::derivative(coeffs), t[i]);
                Ok((poly::eval_compensated(coeffs, t[i]), grad))
            }
            SignalComponent::Dense { poly } => poly.value_and_gradient(t),
        }
    }

    pub fn value(&self, i: usize, t: &[f64]) -> Result<f64> {
        Ok(self.value_and_gradient(i, t)?.0)
    }

    /// The component as an explicit polynomial in `m` variables.
    pub fn to_polynomial(&self, i: usize, m: usize) -> Result<SampledPolynomial> {
        match self {
            SignalComponent::Zero => SampledPolynomial::zero(m, 0),
            SignalComponent::Dense { poly } => {
                if poly.m() != m {
                    return Err(Error::domain(format!(
                        "dense signal has {} variables, system has {m}",
                        poly.m()
                    )));
                }
                Ok(poly.clone())
            }
            SignalComponent::Separable { coeffs } => {
                let d = coeffs.len().saturating_sub(1);
                let terms = coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, &c)| {
                        let mut j = vec![0u32; m];
                        j[i] = k as u32;
                        (MultiIndex::new(j), c)
                    })
                    .collect();
                SampledPolynomial::from_terms(m, d, terms)
            }
            SignalComponent::Radial { d, r } => {
                // (Σ t_h²)^{d/2} = Σ_{‖k‖=d/2} (d/2)!/k! · t^{2k}
                let half = d / 2;
                let ln_fact = |n: u32| crate::special::log_gamma(n as f64 + 1.0).expect("positive");
                let mut terms: Vec<(MultiIndex, f64)> = enumerate(m, half)
                    .into_iter()
                    .filter(|k| k.norm() == half)
                    .map(|k| {
                        let ln_c = ln_fact(half as u32) - k.entries().iter().map(|&e| ln_fact(e)).sum::<f64>();
                        let j = MultiIndex::new(k.entries().iter().map(|e| 2 * e).collect());
                        (j, ln_c.exp().round())
                    })
                    .collect();
                terms.push((MultiIndex::zero(m), -r.powi(*d as i32)));
                SampledPolynomial::from_terms(m, *d, terms)
            }
        }
    }
}

/// The signal system, one component per equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SignalSpec {
    pub components: Vec<SignalComponent>,
}

impl SignalSpec {
    pub fn zero(m: usize) -> SignalSpec {
        SignalSpec {
            components: vec![SignalComponent::Zero; m],
        }
    }

    pub fn radial(m: usize, d: usize, r: f64) -> SignalSpec {
        SignalSpec {
            components: vec![SignalComponent::Radial { d, r }; m],
        }
    }

    pub fn separable(m: usize, coeffs: &[f64]) -> SignalSpec {
        SignalSpec {
            components: vec![
                SignalComponent::Separable {
                    coeffs: coeffs.to_vec()
                };
                m
            ],
        }
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    pub fn all_radial(&self) -> bool {
        self.components
            .iter()
            .all(|c| matches!(c, SignalComponent::Radial { .. } | SignalComponent::Zero))
    }

    /// Value of every equation at `t`.
    pub fn evaluate(&self, t: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().enumerate().map(|(i, c)| c.value(i, t)).collect()
    }

    /// Check lengths and degrees against the noise model.
    pub fn validate(&self, model: &NoiseModel) -> Result<()> {
        if self.m() != model.m() {
            return Err(Error::domain(format!(
                "signal has {} equations, noise model has {}",
                self.m(),
                model.m()
            )));
        }
        for (i, (c, q)) in self.components.iter().zip(model.components()).enumerate() {
            check_component(c, q, model.m()).map_err(|e| match e {
                Error::Domain(msg) => Error::Domain(format!("equation {}: {msg}", i + 1)),
                other => other,
            })?;
        }
        Ok(())
    }
}

fn check_component(c: &SignalComponent, q: &CovarianceQ, m: usize) -> Result<()> {
    match c {
        SignalComponent::Zero => Ok(()),
        SignalComponent::Radial { d, r } => {
            if *d == 0 || d % 2 != 0 {
                return Err(Error::domain(format!(
                    "radial signal exponent must be even and positive, got {d}"
                )));
            }
            if !(*r >= 0.0) || !r.is_finite() {
                return Err(Error::domain(format!(
                    "radial signal radius must be finite and >= 0, got {r}"
                )));
            }
            if *d != q.degree() {
                return Err(Error::domain(format!(
                    "signal degree {d} differs from noise degree {}",
                    q.degree()
                )));
            }
            Ok(())
        }
        SignalComponent::Separable { coeffs } => {
            if coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::domain("separable signal coefficients must be finite"));
            }
            if c.degree() > q.degree() {
                return Err(Error::domain(format!(
                    "signal degree {} exceeds noise degree {}",
                    c.degree(),
                    q.degree()
                )));
            }
            Ok(())
        }
        SignalComponent::Dense { poly } => {
            if poly.m() != m {
                return Err(Error::domain(format!(
                    "dense signal has {} variables, expected {m}",
                    poly.m()
                )));
            }
            if poly.degree() > q.degree() {
                return Err(Error::domain(format!(
                    "signal degree {} exceeds noise degree {}",
                    poly.degree(),
                    q.degree()
                )));
            }
            Ok(())
        }
    }
}

/// How much a reported sup/inf can be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    /// Closed form, or a one/two-dimensional search resolved to optimizer
    /// precision.
    Exact,
    /// Multi-start search; the true sup may be larger.
    LowerEstimate,
    /// Multi-start search; the true inf may be smaller.
    UpperEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    pub value: f64,
    pub kind: EstimateKind,
}

impl FunctionalValue {
    fn exact(value: f64) -> FunctionalValue {
        FunctionalValue {
            value,
            kind: EstimateKind::Exact,
        }
    }
}

/// Search resolution for the functionals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSettings {
    /// Points on the log-spaced radial grid.
    pub grid_n: usize,
    pub rho_max: f64,
    /// Angular points for the separable half-plane search.
    pub angles: usize,
    /// Quasi-random starts for dense signals.
    pub starts: usize,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings {
            grid_n: 4096,
            rho_max: 1e4,
            angles: 129,
            starts: 64,
        }
    }
}

/// Radii at which K is evaluated start here: the radial direction is
/// undefined at the origin.
pub const K_EXCLUDED_RADIUS: f64 = 1e-12;

fn radial_grid(settings: &SearchSettings, from: f64) -> Vec<f64> {
    let lo = from.max(1e-6);
    optimize::log_grid(lo, settings.rho_max.max(lo * 10.0), settings.grid_n.max(8), from == 0.0)
}

/// `g(ρ) = (ρ^d − r^d)/√Q(ρ²)` and its derivative for a radial signal.
///
/// The derivative is evaluated as
/// `g' = ρ^{d−1} S(ρ²)/Q^{3/2} + r^d ρ Q'(ρ²)/Q^{3/2}` with
/// `S(u) = Σ (d−k) c_k u^k`; every term is nonnegative, so there is no
/// cancellation and `g` is nondecreasing.
#[derive(Debug, Clone)]
pub struct RadialField<'a> {
    d: usize,
    r: f64,
    q: &'a CovarianceQ,
    s: Vec<f64>,
    dq: Vec<f64>,
}

impl<'a> RadialField<'a> {
    pub fn new(d: usize, r: f64, q: &'a CovarianceQ) -> Result<RadialField<'a>> {
        check_component(&SignalComponent::Radial { d, r }, q, 1)?;
        let s = q.coeffs().iter().enumerate().map(|(k, c)| (d - k) as f64 * c).collect();
        Ok(RadialField {
            d,
            r,
            q,
            s,
            dq: poly::derivative(q.coeffs()),
        })
    }

    pub fn signal_radius(&self) -> f64 {
        self.r
    }

    fn ln_pow(x: f64, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            k as f64 * x.ln()
        }
    }

    pub fn g(&self, rho: f64) -> f64 {
        let ln_q = self.q.eval(rho * rho).ln();
        let a = (Self::ln_pow(rho, self.d) - 0.5 * ln_q).exp();
        let b = (Self::ln_pow(self.r, self.d) - 0.5 * ln_q).exp();
        a - b
    }

    pub fn g_prime(&self, rho: f64) -> f64 {
        let u = rho * rho;
        let ln_q32 = 1.5 * self.q.eval(u).ln();
        let s = poly::eval_compensated(&self.s, u);
        let first = if s > 0.0 {
            (Self::ln_pow(rho, self.d - 1) + s.ln() - ln_q32).exp()
        } else {
            0.0
        };
        let dq = poly::eval_compensated(&self.dq, u);
        let second = if self.r > 0.0 && rho > 0.0 && dq > 0.0 {
            (Self::ln_pow(self.r, self.d) + rho.ln() + dq.ln() - ln_q32).exp()
        } else {
            0.0
        };
        first + second
    }

    /// `inf_{ρ ≥ r} g(ρ)²`: zero up to the signal radius, then `g(r)²`.
    pub fn lower_snr(&self, r: f64) -> f64 {
        if r <= self.r {
            0.0
        } else {
            self.g(r).powi(2)
        }
    }
}

/// Normalised separable field on the half-plane `(x, s)`, `x = t_i`,
/// `s = ‖t_rest‖ >= 0`.
struct SeparableField<'a> {
    t: &'a [f64],
    dt: Vec<f64>,
    q: &'a CovarianceQ,
}

impl<'a> SeparableField<'a> {
    fn new(t: &'a [f64], q: &'a CovarianceQ) -> SeparableField<'a> {
        SeparableField {
            t,
            dt: poly::derivative(t),
            q,
        }
    }

    /// `(‖∇g‖, ∂_ρ g)` at `(x, s)`.
    fn grad(&self, x: f64, s: f64) -> (f64, f64) {
        let u = x * x + s * s;
        let qv = self.q.eval(u);
        let qq = self.q.profile().q(u).unwrap_or(f64::NAN);
        let tv = poly::eval_compensated(self.t, x);
        let dtv = poly::eval_compensated(&self.dt, x);
        let along = dtv - tv * qq * x;
        let across = -tv * qq * s;
        let norm = along.hypot(across) / qv.sqrt();
        let rho = u.sqrt();
        let radial = if rho > 0.0 {
            (dtv * x / rho - tv * qq * rho) / qv.sqrt()
        } else {
            0.0
        };
        (norm, radial)
    }

    fn value_sq(&self, x: f64, s: f64) -> f64 {
        let tv = poly::eval_compensated(self.t, x);
        tv * tv / self.q.eval(x * x + s * s)
    }
}

fn weight_h(rho: f64) -> f64 {
    1.0 + rho
}

fn weight_k(rho: f64) -> f64 {
    1.0 + rho * rho
}

#[derive(Clone, Copy)]
enum Which {
    H,
    K,
}

fn sup_radial(field: &RadialField, which: Which, settings: &SearchSettings) -> f64 {
    let (lo, w): (f64, fn(f64) -> f64) = match which {
        Which::H => (0.0, weight_h),
        Which::K => (K_EXCLUDED_RADIUS, weight_k),
    };
    let grid = radial_grid(settings, if lo == 0.0 { 0.0 } else { 1e-6 });
    let f = |rho: f64| {
        let rho = rho.max(lo);
        w(rho) * field.g_prime(rho).abs()
    };
    let (_, best) = optimize::grid_sup(f, &grid);
    // Near the excluded ball the weight is ~1 and g' is continuous, so the
    // value at the inner radius closes the gap below the grid.
    best.max(f(lo))
}

fn sup_separable(field: &SeparableField, m: usize, which: Which, settings: &SearchSettings) -> f64 {
    let eval = |x: f64, s: f64| {
        let rho = x.hypot(s);
        let (norm, radial) = field.grad(x, s);
        match which {
            Which::H => weight_h(rho) * norm,
            Which::K => {
                if rho < K_EXCLUDED_RADIUS {
                    f64::NEG_INFINITY
                } else {
                    weight_k(rho) * radial.abs()
                }
            }
        }
    };
    let grid = radial_grid(settings, 0.0);
    if m == 1 {
        let f_pos = |rho: f64| eval(rho, 0.0);
        let f_neg = |rho: f64| eval(-rho, 0.0);
        return optimize::grid_sup(f_pos, &grid)
            .1
            .max(optimize::grid_sup(f_neg, &grid).1);
    }
    let n_phi = settings.angles.max(3);
    let coarse: Vec<f64> = grid.iter().step_by((grid.len() / 512).max(1)).cloned().collect();
    let mut candidates: Vec<(f64, f64, f64)> = coarse
        .par_iter()
        .flat_map_iter(|&rho| {
            (0..n_phi).map(move |k| {
                let phi = std::f64::consts::PI * k as f64 / (n_phi - 1) as f64;
                let (x, s) = (rho * phi.cos(), rho * phi.sin());
                (x, s, 0.0)
            })
        })
        .map(|(x, s, _)| (x, s, eval(x, s)))
        .collect();
    candidates.sort_by(|a, b| b.2.total_cmp(&a.2));
    candidates
        .iter()
        .take(8)
        .map(|&(x, s, _)| {
            let scale = 0.1 * (1.0 + x.hypot(s));
            optimize::compass_max(
                |p| eval(p[0], p[1]),
                |p| {
                    p[1] = p[1].abs();
                },
                &[x, s],
                scale,
                1e-12 * scale,
                20_000,
            )
            .1
        })
        .fold(candidates[0].2, f64::max)
}

fn start_point(index: usize, m: usize) -> Vec<f64> {
    optimize::halton(index as u64, m)
        .into_iter()
        .map(|u| (std::f64::consts::PI * (u - 0.5)).tan())
        .collect()
}

fn dense_grad(p: &SampledPolynomial, q: &CovarianceQ, t: &[f64]) -> (f64, Vec<f64>, f64) {
    let (v, gp) = p.value_and_gradient(t).expect("dimension checked");
    let u: f64 = t.iter().map(|x| x * x).sum();
    let qv = q.eval(u);
    let qq = q.profile().q(u).unwrap_or(f64::NAN);
    let inv = 1.0 / qv.sqrt();
    let grad = gp.iter().zip(t).map(|(g, x)| (g - v * qq * x) * inv).collect();
    (v * inv, grad, u.sqrt())
}

fn sup_dense(p: &SampledPolynomial, q: &CovarianceQ, which: Which, settings: &SearchSettings) -> f64 {
    let m = p.m();
    let rho_max = settings.rho_max;
    let objective = |t: &[f64]| {
        let (_, grad, rho) = dense_grad(p, q, t);
        match which {
            Which::H => weight_h(rho) * grad.iter().map(|g| g * g).sum::<f64>().sqrt(),
            Which::K => {
                if rho < K_EXCLUDED_RADIUS {
                    f64::NEG_INFINITY
                } else {
                    let radial: f64 = grad.iter().zip(t).map(|(g, x)| g * x).sum::<f64>() / rho;
                    weight_k(rho) * radial.abs()
                }
            }
        }
    };
    let project = |t: &mut [f64]| clamp_norm(t, 0.0, rho_max);
    (0..settings.starts.max(1))
        .into_par_iter()
        .map(|k| {
            let start = start_point(k, m);
            let step = 0.25 * (1.0 + norm(&start));
            optimize::compass_max(objective, project, &start, step, 1e-10 * step, 20_000).1
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

fn norm(t: &[f64]) -> f64 {
    t.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn clamp_norm(t: &mut [f64], lo: f64, hi: f64) {
    let n = norm(t);
    if n == 0.0 {
        if lo > 0.0 {
            t[0] = lo;
        }
        return;
    }
    let target = n.clamp(lo, hi);
    if target != n {
        let s = target / n;
        t.iter_mut().for_each(|x| *x *= s);
    }
}

fn functional_sup(
    p: &SignalComponent,
    q: &CovarianceQ,
    m: usize,
    which: Which,
    settings: &SearchSettings,
) -> Result<FunctionalValue> {
    check_component(p, q, m)?;
    if p.is_zero() {
        return Ok(FunctionalValue::exact(0.0));
    }
    match p {
        SignalComponent::Zero => Ok(FunctionalValue::exact(0.0)),
        SignalComponent::Radial { d, r } => {
            let field = RadialField::new(*d, *r, q)?;
            Ok(FunctionalValue::exact(sup_radial(&field, which, settings)))
        }
        SignalComponent::Separable { coeffs } => {
            let field = SeparableField::new(coeffs, q);
            Ok(FunctionalValue::exact(sup_separable(&field, m, which, settings)))
        }
        SignalComponent::Dense { poly } => Ok(FunctionalValue {
            value: sup_dense(poly, q, which, settings),
            kind: EstimateKind::LowerEstimate,
        }),
    }
}

/// `H(P, Q) = sup_t (1+‖t‖)‖∇(P/√Q(‖t‖²))‖` for one equation of an
/// `m`-variable system.
pub fn functional_h(
    p: &SignalComponent,
    q: &CovarianceQ,
    m: usize,
    settings: &SearchSettings,
) -> Result<FunctionalValue> {
    functional_sup(p, q, m, Which::H, settings)
}

/// `K(P, Q) = sup_{t≠0} (1+‖t‖²)|∂_ρ(P/√Q(‖t‖²))|`.
pub fn functional_k(
    p: &SignalComponent,
    q: &CovarianceQ,
    m: usize,
    settings: &SearchSettings,
) -> Result<FunctionalValue> {
    functional_sup(p, q, m, Which::K, settings)
}

/// `L(P, Q, r) = inf_{‖t‖≥r} P(t)²/Q(‖t‖²)`.
///
/// `L` is nondecreasing in `r` because the domain shrinks, so a value at `r`
/// bounds every larger radius from below.
pub fn functional_l(
    p: &SignalComponent,
    q: &CovarianceQ,
    m: usize,
    r: f64,
    settings: &SearchSettings,
) -> Result<FunctionalValue> {
    check_component(p, q, m)?;
    if !(r > 0.0) {
        return Err(Error::domain(format!("L needs a positive radius, got {r}")));
    }
    match p {
        SignalComponent::Zero => Ok(FunctionalValue::exact(0.0)),
        SignalComponent::Radial { d, r: rs } => Ok(FunctionalValue::exact(RadialField::new(*d, *rs, q)?.lower_snr(r))),
        SignalComponent::Separable { coeffs } => {
            if m >= 2 || p.is_zero() {
                // Hold t_i fixed and let the other coordinates grow: Q(‖t‖²)
                // grows without bound while T(t_i) does not change.
                return Ok(FunctionalValue::exact(0.0));
            }
            let field = SeparableField::new(coeffs, q);
            let grid = radial_grid(settings, r);
            let (_, pos) = optimize::grid_inf(|x| field.value_sq(x, 0.0), &grid);
            let (_, neg) = optimize::grid_inf(|x| field.value_sq(-x, 0.0), &grid);
            let tail = coeffs.last().map_or(0.0, |c| c * c) / q.coeffs().last().unwrap();
            let tail = if p.degree() == q.degree() { tail } else { 0.0 };
            Ok(FunctionalValue::exact(pos.min(neg).min(tail)))
        }
        SignalComponent::Dense { poly } => {
            let m = poly.m();
            let rho_max = settings.rho_max;
            let objective = |t: &[f64]| {
                let (g, _, _) = dense_grad(poly, q, t);
                -g * g
            };
            let project = |t: &mut [f64]| clamp_norm(t, r, rho_max);
            let best = (0..settings.starts.max(1))
                .into_par_iter()
                .map(|k| {
                    let start = start_point(k, m);
                    let step = 0.25 * (r + norm(&start));
                    -optimize::compass_max(objective, project, &start, step, 1e-10 * step, 20_000).1
                })
                .collect::<Vec<f64>>()
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            Ok(FunctionalValue {
                value: best.max(0.0),
                kind: EstimateKind::UpperEstimate,
            })
        }
    }
}

/// Signal-over-noise summary of a system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrReport {
    pub m: usize,
    pub r0: f64,
    #[serde(rename = "H")]
    pub h: Vec<f64>,
    #[serde(rename = "K")]
    pub k: Vec<f64>,
    /// `L(P_i, Q_i, r0)`.
    #[serde(rename = "L")]
    pub l: Vec<f64>,
    #[serde(rename = "A_m")]
    pub a_m: f64,
    #[serde(rename = "B_m")]
    pub b_m: f64,
    pub ell: f64,
    /// Advisory only: the H/K aggregates are finite. Decay in `m` must be
    /// judged from a sweep.
    pub h3_holds: bool,
    pub h4_holds: bool,
    /// Worst estimate kind among the H/K values and among the L values.
    pub hk_kind: EstimateKind,
    pub l_kind: EstimateKind,
}

fn worst(kinds: impl Iterator<Item = EstimateKind>, bad: EstimateKind) -> EstimateKind {
    let mut out = EstimateKind::Exact;
    for k in kinds {
        if k == bad {
            out = bad;
        }
    }
    out
}

/// `A_m = (1/m) Σ H_i²/i` (equations numbered from 1).
pub fn aggregate(values: &[f64]) -> f64 {
    let m = values.len() as f64;
    values
        .iter()
        .enumerate()
        .map(|(i, v)| v * v / (i + 1) as f64)
        .sum::<f64>()
        / m
}

pub fn snr_report(signal: &SignalSpec, model: &NoiseModel, r0: f64, settings: &SearchSettings) -> Result<SnrReport> {
    signal.validate(model)?;
    if !(r0 > 0.0) {
        return Err(Error::domain(format!("r0 must be positive, got {r0}")));
    }
    let m = model.m();
    // Equal (component, covariance) pairs give equal values; compute each once.
    let mut cache: Vec<(&SignalComponent, &CovarianceQ, [FunctionalValue; 3])> = Vec::new();
    let mut rows = Vec::with_capacity(m);
    for (c, q) in signal.components.iter().zip(model.components()) {
        let hit = cache.iter().find(|(cc, qq, _)| *cc == c && *qq == q).map(|e| e.2);
        let vals = match hit {
            Some(v) => v,
            None => {
                let v = [
                    functional_h(c, q, m, settings)?,
                    functional_k(c, q, m, settings)?,
                    functional_l(c, q, m, r0, settings)?,
                ];
                cache.push((c, q, v));
                v
            }
        };
        rows.push(vals);
    }
    let h: Vec<f64> = rows.iter().map(|r| r[0].value).collect();
    let k: Vec<f64> = rows.iter().map(|r| r[1].value).collect();
    let l: Vec<f64> = rows.iter().map(|r| r[2].value).collect();
    let ell = l.iter().cloned().fold(f64::INFINITY, f64::min);
    let a_m = aggregate(&h);
    let b_m = aggregate(&k);
    Ok(SnrReport {
        m,
        r0,
        a_m,
        b_m,
        ell,
        h3_holds: a_m.is_finite() && b_m.is_finite(),
        h4_holds: ell > 0.0,
        hk_kind: worst(
            rows.iter().flat_map(|r| [r[0].kind, r[1].kind]),
            EstimateKind::LowerEstimate,
        ),
        l_kind: worst(rows.iter().map(|r| r[2].kind), EstimateKind::UpperEstimate),
        h,
        k,
        l,
    })
}

/// `A_m`, `B_m`, `ℓ` across a list of dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrSweep {
    pub reports: Vec<SnrReport>,
    /// Least-squares slope of `ln A_m` against `ln m` (over positive values);
    /// negative slopes indicate decay.
    pub a_slope: Option<f64>,
    pub b_slope: Option<f64>,
}

fn log_slope(points: impl Iterator<Item = (f64, f64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

pub fn snr_sweep<F>(m_list: &[usize], r0: f64, settings: &SearchSettings, build: F) -> Result<SnrSweep>
where
    F: Fn(usize) -> Result<(SignalSpec, NoiseModel)>,
{
    if m_list.is_empty() {
        return Err(Error::validation("m list is empty"));
    }
    let mut reports = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let (signal, model) = build(m)?;
        reports.push(snr_report(&signal, &model, r0, settings)?);
    }
    Ok(SnrSweep {
        a_slope: log_slope(reports.iter().map(|r| (r.m as f64, r.a_m))),
        b_slope: log_slope(reports.iter().map(|r| (r.m as f64, r.b_m))),
        reports,
    })
}

/// How a lower bound on `Σ P_i²/Q_i` over a sphere was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingKind {
    /// The sum is constant on spheres and computed exactly.
    Exact,
    /// Separable terms bounded from below through a Lagrangian relaxation.
    Relaxed,
    /// Dense terms dropped (bounded below by zero).
    Dropped,
}

/// `min_{|x|≤ρ} T(x)²/Qc − λx²` over the critical points of the polynomial.
fn separable_piece(t: &[f64], qc: f64, lambda: f64, rho: f64) -> f64 {
    let phi = |x: f64| {
        let v = poly::eval_compensated(t, x);
        v * v / qc - lambda * x * x
    };
    let mut crit = poly::multiply(t, &poly::derivative(t));
    if crit.len() < 2 {
        crit.resize(2, 0.0);
    }
    crit[1] -= lambda * qc;
    let mut best = phi(rho).min(phi(-rho));
    for (re, _) in poly::companion_roots(&crit) {
        best = best.min(phi(re.clamp(-rho, rho)));
    }
    best
}

/// Lower bound on `inf_{‖t‖=ρ} Σ_i P_i(t)²/Q_i(ρ²)`.
pub fn damping_lower_bound(signal: &SignalSpec, model: &NoiseModel, rho: f64) -> Result<(f64, DampingKind)> {
    let m = model.m();
    let u = rho * rho;
    let mut total = 0.0;
    let mut kind = DampingKind::Exact;
    let mut separable: Vec<(&[f64], f64)> = Vec::new();
    for (c, q) in signal.components.iter().zip(model.components()) {
        match c {
            SignalComponent::Zero => {}
            SignalComponent::Radial { d, r } => {
                total += RadialField::new(*d, *r, q)?.g(rho).powi(2);
            }
            SignalComponent::Separable { coeffs } => separable.push((coeffs, q.eval(u))),
            SignalComponent::Dense { .. } => kind = DampingKind::Dropped,
        }
    }
    if separable.is_empty() {
        return Ok((total, kind));
    }
    if m == 1 {
        let (t, qc) = separable[0];
        let v = poly::eval_compensated(t, rho)
            .powi(2)
            .min(poly::eval_compensated(t, -rho).powi(2));
        return Ok((total + v / qc, kind));
    }
    // Σ_sep x_i² ≤ ρ² (equality when every coordinate carries a separable
    // equation, which also admits negative multipliers).
    let covers_all = separable.len() == m;
    let dual = |lambda: f64| {
        lambda * u
            + separable
                .iter()
                .map(|(t, qc)| separable_piece(t, *qc, lambda, rho))
                .sum::<f64>()
    };
    let at_edge: f64 = separable
        .iter()
        .map(|(t, qc)| {
            poly::eval_compensated(t, rho)
                .powi(2)
                .max(poly::eval_compensated(t, -rho).powi(2))
                / qc
        })
        .sum();
    let at_zero: f64 = separable
        .iter()
        .map(|(t, qc)| t.first().map_or(0.0, |c| c * c) / qc)
        .sum();
    let n_sep = separable.len() as f64;
    let hi = if n_sep > 1.0 && u > 0.0 {
        at_edge / ((n_sep - 1.0) * u)
    } else {
        0.0
    };
    let lo = if covers_all && u > 0.0 { -at_zero / u } else { 0.0 };
    let best = if hi > lo {
        optimize::golden_max(dual, lo, hi, 200).1
    } else {
        dual(0.0)
    };
    let relaxed = best.max(dual(0.0)).max(0.0);
    Ok((total + relaxed, kind.max(DampingKind::Relaxed)))
}
