//! Explicit constants for the geometric decay bound `E N^{P+X} <= C θ^m E N^X`
//! and the tables built from them.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{HypothesisReport, NoiseModel};
use crate::error::{Error, Result};
use crate::rice::{centered_expectation, QuadratureSettings};
use crate::signal::SnrReport;

pub const M0_SCAN_LIMIT: u64 = 1_000_000;
pub const TAU_GRID_START: f64 = 1e-3;
pub const TAU_GRID_FACTOR: f64 = 1.1;
const TAU_GRID_STEPS: i32 = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub r0: f64,
    pub ell: f64,
    pub theta1: f64,
    pub theta: f64,
    /// `F̄ = max_i E_i/D_i`.
    #[serde(rename = "F_bar")]
    pub f_bar: f64,
    /// Whether `F̄ <= Ē/q̲` holds, as it must under the hypotheses.
    pub f_bar_sane: bool,
    pub tau: f64,
    /// Grid index `k` of `τ = 1e-3·1.1^k`; `None` when `F̄ = 0` and `τ = 1`.
    pub tau_index: Option<i32>,
    pub m0: u64,
    /// `m0` with `π/2` in place of `π` in the head condition.
    pub m0_half_pi: u64,
    /// `m0` from `e^{c1} m^{c1+½} <= κ^m`, `c1 = 8D̄²`, `κ = 3/(4√2) + ½`.
    pub m0_alternative: Option<u64>,
    #[serde(rename = "C")]
    pub c: f64,
    /// `C` with `(h̄/h̲)^{1/2}` in place of `h̄/h̲`.
    #[serde(rename = "C_sqrt_ratio")]
    pub c_sqrt_ratio: f64,
    pub theta_symbolic: Option<String>,
    #[serde(rename = "C_symbolic")]
    pub c_symbolic: Option<String>,
    /// Dimensions with a supplied signal-over-noise report. Beyond the
    /// largest, the per-equation maxima are carried forward.
    pub supplied_m: Vec<usize>,
}

/// `θ1 = max{r0/√(r0²+½), e^{−ℓ/2}}`.
pub fn theta1(r0: f64, ell: f64) -> f64 {
    (r0 / (r0 * r0 + 0.5).sqrt()).max((-ell / 2.0).exp())
}

/// `F̄/(1+τ²r0²) < 1/(2(1+r0²))`.
pub fn tau_condition(f_bar: f64, tau: f64, r0: f64) -> bool {
    f_bar / (1.0 + tau * tau * r0 * r0) < 0.5 / (1.0 + r0 * r0)
}

/// Smallest grid value `1e-3·1.1^k` satisfying [`tau_condition`].
pub fn select_tau(f_bar: f64, r0: f64) -> Result<(f64, Option<i32>)> {
    if f_bar == 0.0 {
        return Ok((1.0, None));
    }
    if !f_bar.is_finite() || f_bar < 0.0 {
        return Err(Error::Infeasible(format!("F_bar = {f_bar} admits no tau")));
    }
    for k in 0..=TAU_GRID_STEPS {
        let tau = TAU_GRID_START * TAU_GRID_FACTOR.powi(k);
        if tau_condition(f_bar, tau, r0) {
            return Ok((tau, Some(k)));
        }
    }
    Err(Error::Infeasible(format!(
        "no tau on the grid satisfies F_bar/(1+tau^2 r0^2) < 1/(2(1+r0^2)) with F_bar = {f_bar}, r0 = {r0}"
    )))
}

/// Inputs to the `m0` conditions, in log form where that avoids overflow.
#[derive(Debug, Clone, Copy)]
pub struct M0Inputs {
    pub q_lower: f64,
    pub h_lower: f64,
    pub theta1: f64,
    pub theta: f64,
    pub tau: f64,
    pub r0: f64,
}

/// `(m A_m/q̲ + m B_m/(h̲q̲))/2 + m ln θ1 + ½ ln m <= m ln θ`.
pub fn decay_condition(inp: &M0Inputs, m: u64, a_m: f64, b_m: f64) -> bool {
    let mf = m as f64;
    let lhs =
        0.5 * (mf * a_m / inp.q_lower + mf * b_m / (inp.h_lower * inp.q_lower)) + mf * inp.theta1.ln() + 0.5 * mf.ln();
    lhs <= mf * inp.theta.ln()
}

/// `prefactor·(τ²r0²/(1+τ²r0²))^{(m−1)/2} < e^{−2}/√m`, with prefactor `π`
/// or `π/2`.
pub fn head_condition(inp: &M0Inputs, m: u64, prefactor: f64) -> bool {
    let mf = m as f64;
    let x = inp.tau * inp.tau * inp.r0 * inp.r0;
    let lhs = prefactor.ln() + 0.5 * (mf - 1.0) * (x / (1.0 + x)).ln();
    lhs < -2.0 - 0.5 * mf.ln()
}

/// `H_n` (harmonic number).
fn harmonic(n: u64) -> f64 {
    if n < 20 {
        return (1..=n).map(|i| 1.0 / i as f64).sum();
    }
    let x = n as f64;
    x.ln() + 0.577_215_664_901_532_9 + 0.5 / x - 1.0 / (12.0 * x * x) + 1.0 / (120.0 * x.powi(4))
        - 1.0 / (252.0 * x.powi(6))
}

/// `A_m`, `B_m` for any `m`. Below the largest supplied dimension the
/// per-equation values of the nearest report at or above `m` are truncated
/// to `m` equations. Beyond it, equations `i > M` are given the largest
/// per-equation value seen, which is exact for uniform families and an
/// overestimate otherwise.
fn aggregates_at(snr: &BTreeMap<usize, SnrReport>, m: u64) -> (f64, f64) {
    let partial = |v: &[f64], n: usize| {
        v.iter()
            .take(n)
            .enumerate()
            .map(|(i, x)| x * x / (i + 1) as f64)
            .sum::<f64>()
    };
    if let Some((_, rep)) = snr.range((m as usize)..).next() {
        let n = m as usize;
        return (partial(&rep.h, n) / m as f64, partial(&rep.k, n) / m as f64);
    }
    let (&big_m, rep) = snr.iter().next_back().expect("non-empty");
    let tail = harmonic(m) - harmonic(big_m as u64);
    let max_sq = |v: &[f64]| v.iter().map(|x| x * x).fold(0.0, f64::max);
    let a = (partial(&rep.h, big_m) + max_sq(&rep.h) * tail) / m as f64;
    let b = (partial(&rep.k, big_m) + max_sq(&rep.k) * tail) / m as f64;
    (a, b)
}

fn scan_m0(inp: &M0Inputs, snr: &BTreeMap<usize, SnrReport>, prefactor: f64) -> Option<u64> {
    (1..=M0_SCAN_LIMIT).find(|&m| {
        let (a, b) = aggregates_at(snr, m);
        decay_condition(inp, m, a, b) && head_condition(inp, m, prefactor)
    })
}

/// Least `m` with `c1 + (c1+½) ln m <= m ln κ`.
pub fn alternative_m0(d_bar: f64) -> Option<u64> {
    let c1 = 8.0 * d_bar * d_bar;
    let ln_kappa = (3.0 / (4.0 * 2f64.sqrt()) + 0.5).ln();
    (1..=M0_SCAN_LIMIT).find(|&m| c1 + (c1 + 0.5) * (m as f64).ln() <= m as f64 * ln_kappa)
}

pub fn compute_constants(
    hyp: &HypothesisReport,
    snr_by_m: &BTreeMap<usize, SnrReport>,
    r0: f64,
) -> Result<BoundConstants> {
    if snr_by_m.is_empty() {
        return Err(Error::validation("at least one signal-over-noise report is required"));
    }
    if !hyp.h2_holds {
        return Err(Error::Hypothesis(format!(
            "uniform q/h bounds fail: {}",
            hyp.failures.join("; ")
        )));
    }
    for rep in snr_by_m.values() {
        if r0 < rep.r0 {
            return Err(Error::validation(format!(
                "r0 = {r0} is below the radius {} used for the report at m = {}",
                rep.r0, rep.m
            )));
        }
    }
    let ell = snr_by_m.values().map(|r| r.ell).fold(f64::INFINITY, f64::min);
    if !(ell > 0.0) {
        return Err(Error::Hypothesis(format!(
            "lower signal-over-noise bound fails: ell = {ell}"
        )));
    }
    let th1 = theta1(r0, ell);
    let theta = (1.0 + th1) / 2.0;
    let f_bar = hyp.f_bar();
    let f_bar_sane = f_bar <= hyp.e_max() / hyp.q_lower * (1.0 + 1e-12) + 1e-15;
    let (tau, tau_index) = select_tau(f_bar, r0)?;
    let inp = M0Inputs {
        q_lower: hyp.q_lower,
        h_lower: hyp.h_lower,
        theta1: th1,
        theta,
        tau,
        r0,
    };
    let m0 = scan_m0(&inp, snr_by_m, std::f64::consts::PI).ok_or_else(|| {
        Error::Infeasible(format!(
            "no m <= {M0_SCAN_LIMIT} satisfies both threshold conditions (theta1 = {th1}, tau = {tau})"
        ))
    })?;
    let m0_half_pi = scan_m0(&inp, snr_by_m, std::f64::consts::FRAC_PI_2).unwrap_or(m0);
    let ratio = hyp.h_upper / hyp.h_lower;
    let geo = (1.0 + r0 * r0).sqrt() / r0;
    let c = 30.0 * ratio * geo;
    let c_sqrt_ratio = 30.0 * ratio.sqrt() * geo;
    Ok(BoundConstants {
        r0,
        ell,
        theta1: th1,
        theta,
        f_bar,
        f_bar_sane,
        tau,
        tau_index,
        m0,
        m0_half_pi,
        m0_alternative: alternative_m0(hyp.d_max()),
        c,
        c_sqrt_ratio,
        theta_symbolic: symbolic::theta(r0, ell),
        c_symbolic: symbolic::c(r0, ratio),
        supplied_m: snr_by_m.keys().copied().collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    pub ln_value: f64,
    /// `m >= m0`.
    pub valid: bool,
}

/// `C θ^m · centered`.
pub fn bound_value(constants: &BoundConstants, m: usize, centered: f64) -> BoundValue {
    bound_value_ln(constants, m, centered.ln())
}

pub fn bound_value_ln(constants: &BoundConstants, m: usize, ln_centered: f64) -> BoundValue {
    let ln_value = constants.c.ln() + m as f64 * constants.theta.ln() + ln_centered;
    BoundValue {
        value: ln_value.exp(),
        ln_value,
        valid: m as u64 >= constants.m0,
    }
}

/// What the unperturbed system `P = 0` looks like, for annotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalRoots {
    Unknown,
    /// A whole sphere of solutions.
    Infinite,
    /// `d^m` isolated solutions.
    PowerOfDegree(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub m: usize,
    pub centered: f64,
    pub ln_centered: f64,
    pub bound: f64,
    pub ln_bound: f64,
    /// `C θ^m`.
    pub ratio: f64,
    pub ln_ratio: f64,
    pub valid: bool,
    /// Root count of `P = 0`: `"inf"`, a number, or `d^m` when it overflows.
    pub signal_roots: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTable {
    pub theta: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub m0: u64,
    pub rows: Vec<DecayRow>,
}

fn annotate(kind: SignalRoots, m: usize) -> Option<String> {
    match kind {
        SignalRoots::Unknown => None,
        SignalRoots::Infinite => Some("inf".into()),
        SignalRoots::PowerOfDegree(d) => {
            let v = (d as f64).powi(m as i32);
            if v < 9.007e15 {
                Some(format!("{}", v as u64))
            } else {
                Some(format!("{d}^{m}"))
            }
        }
    }
}

/// Centered expectation, bound and ratio for each `m`. The noise model for a
/// given `m` comes from `family`.
pub fn decay_table<F>(
    constants: &BoundConstants,
    family: F,
    m_list: &[usize],
    signal_roots: SignalRoots,
    settings: &QuadratureSettings,
) -> Result<DecayTable>
where
    F: Fn(usize) -> Result<NoiseModel> + Sync,
{
    if m_list.is_empty() {
        return Err(Error::validation("m list is empty"));
    }
    if m_list.windows(2).any(|w| w[0] >= w[1]) || m_list[0] == 0 {
        return Err(Error::validation("m list must be strictly ascending and positive"));
    }
    let rows = m_list
        .par_iter()
        .map(|&m| {
            let model = family(m)?;
            if model.m() != m {
                return Err(Error::validation(format!(
                    "family returned m = {} for m = {m}",
                    model.m()
                )));
            }
            let e = centered_expectation(&model, settings)?;
            let b = bound_value_ln(constants, m, e.ln_value);
            let ln_ratio = constants.c.ln() + m as f64 * constants.theta.ln();
            Ok(DecayRow {
                m,
                centered: e.value,
                ln_centered: e.ln_value,
                bound: b.value,
                ln_bound: b.ln_value,
                ratio: ln_ratio.exp(),
                ln_ratio,
                valid: b.valid,
                signal_roots: annotate(signal_roots, m),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecayTable {
        theta: constants.theta,
        c: constants.c,
        m0: constants.m0,
        rows,
    })
}

impl DecayTable {
    pub const CSV_HEADER: [&'static str; 9] = [
        "m",
        "centered",
        "bound",
        "ratio",
        "valid(m>=m0)",
        "ln_centered",
        "ln_bound",
        "ln_ratio",
        "signal_roots",
    ];

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.m.to_string(),
                r.centered.to_string(),
                r.bound.to_string(),
                r.ratio.to_string(),
                r.valid.to_string(),
                r.ln_centered.to_string(),
                r.ln_bound.to_string(),
                r.ln_ratio.to_string(),
                r.signal_roots.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Exact forms of `θ` and `C` when `r0²`, `ℓ` and `h̄/h̲` are simple rationals.
mod symbolic {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    /// `p/q` with `q <= 10_000` matching `x` to near machine precision.
    pub(super) fn rational(x: f64) -> Option<(u64, u64)> {
        if !(x >= 0.0) || !x.is_finite() {
            return None;
        }
        let (mut h0, mut h1, mut k0, mut k1) = (0u64, 1u64, 1u64, 0u64);
        let mut y = x;
        for _ in 0..40 {
            let a = y.floor();
            if a > 1e12 {
                break;
            }
            let a = a as u64;
            let h2 = a.checked_mul(h1)?.checked_add(h0)?;
            let k2 = a.checked_mul(k1)?.checked_add(k0)?;
            if k2 > 10_000 {
                break;
            }
            (h0, h1, k0, k1) = (h1, h2, k1, k2);
            if (h1 as f64 / k1 as f64 - x).abs() <= 4.0 * f64::EPSILON * x.max(1.0) {
                return Some((h1, k1));
            }
            let frac = y - a as f64;
            if frac == 0.0 {
                break;
            }
            y = 1.0 / frac;
        }
        None
    }

    /// `√n = k√s` with `s` squarefree.
    fn surd(n: u64) -> (u64, u64) {
        let (mut k, mut s) = (1u64, n);
        let mut f = 2u64;
        while f * f <= s {
            while s % (f * f) == 0 {
                s /= f * f;
                k *= f;
            }
            f += 1;
        }
        (k, s)
    }

    fn fmt_surd(k: u64, s: u64) -> String {
        match (k, s) {
            (_, 1) => k.to_string(),
            (1, _) => format!("√{s}"),
            _ => format!("{k}√{s}"),
        }
    }

    fn fmt_ratio(p: u64, q: u64) -> String {
        if q == 1 {
            p.to_string()
        } else {
            format!("{p}/{q}")
        }
    }

    /// `θ = (1+θ1)/2`.
    pub(super) fn theta(r0: f64, ell: f64) -> Option<String> {
        let (p, q) = rational(r0 * r0)?;
        let geometric = r0 / (r0 * r0 + 0.5).sqrt();
        if geometric >= (-ell / 2.0).exp() {
            // θ1 = √(2p(2p+q))/(2p+q)
            let den = 2 * p + q;
            let (k, s) = surd(2 * p * den);
            if s == 1 {
                let (a, b) = (den + k, 2 * den);
                let g = gcd(a, b);
                return Some(fmt_ratio(a / g, b / g));
            }
            let g = gcd(gcd(den, k), 2 * den);
            Some(format!("({} + {})/{}", den / g, fmt_surd(k / g, s), 2 * den / g))
        } else {
            let (a, b) = rational(ell)?;
            let g = gcd(a, 2 * b);
            Some(format!("(1 + e^(-{}))/2", fmt_ratio(a / g, 2 * b / g)))
        }
    }

    /// `C = 30·ratio·√((1+r0²)/r0²)` with `r0² = p/q`: `30·ratio·√((p+q)p)/p`.
    pub(super) fn c(r0: f64, ratio: f64) -> Option<String> {
        let (p, q) = rational(r0 * r0)?;
        let (a, b) = rational(ratio)?;
        let (k, s) = surd((p + q) * p);
        let num = 30u64.checked_mul(a)?.checked_mul(k)?;
        let den = p.checked_mul(b)?;
        let g = gcd(num, den);
        let (num, den) = (num / g, den / g);
        let body = fmt_surd(num, s);
        Some(if den == 1 { body } else { format!("{body}/{den}") })
    }
}
