//! Gaussian polynomial ensembles: multi-indices, the coefficient law
//! `Var(a_j) = c_{‖j‖}·‖j‖!/j!`, sampling, and evaluation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{CovarianceQ, NoiseModel};
use crate::error::{Error, Result};
use crate::poly::CompensatedSum;
use crate::special::{log_gamma, normal_quantile};
use crate::stream::{self, tag};

/// Largest number of dense coefficients a sampled polynomial may carry.
pub const MAX_TERMS: usize = 8008;

/// Exponent vector `j = (j_1, …, j_m)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> MultiIndex {
        MultiIndex(entries)
    }

    pub fn zero(m: usize) -> MultiIndex {
        MultiIndex(vec![0; m])
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `‖j‖ = Σ j_h`.
    pub fn norm(&self) -> usize {
        self.0.iter().map(|&x| x as usize).sum()
    }

    /// `ln(‖j‖!/(j_1!⋯j_m!))`.
    fn ln_multinomial(&self) -> f64 {
        let ln_fact = |n: usize| log_gamma(n as f64 + 1.0).expect("positive argument");
        ln_fact(self.norm()) - self.0.iter().map(|&x| ln_fact(x as usize)).sum::<f64>()
    }
}

/// `C(m + d, d)`, the number of multi-indices in `m` variables with `‖j‖ <= d`.
pub fn count_multi_indices(m: usize, d: usize) -> u128 {
    let mut acc: u128 = 1;
    for k in 1..=d as u128 {
        acc = acc * (m as u128 + k) / k;
    }
    acc
}

/// Every multi-index in `m` variables with `‖j‖ <= d`, in lexicographic order.
/// The position in this list is the index's rank.
pub fn enumerate(m: usize, d: usize) -> Vec<MultiIndex> {
    fn rec(prefix: &mut Vec<u32>, m: usize, budget: u32, out: &mut Vec<MultiIndex>) {
        if prefix.len() == m {
            out.push(MultiIndex(prefix.clone()));
            return;
        }
        for j in 0..=budget {
            prefix.push(j);
            rec(prefix, m, budget - j, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(m), m, d as u32, &mut out);
    out
}

/// `Var(a_j) = c_{‖j‖}·‖j‖!/j!`.
pub fn coefficient_variance(q: &CovarianceQ, j: &MultiIndex) -> Result<f64> {
    let n = j.norm();
    if n > q.degree() {
        return Err(Error::domain(format!(
            "multi-index of total degree {n} exceeds the covariance degree {}",
            q.degree()
        )));
    }
    let c = q.coeffs()[n];
    if c == 0.0 {
        return Ok(0.0);
    }
    Ok((c.ln() + j.ln_multinomial()).exp())
}

/// Polynomial in `m` variables with a coefficient for every `‖j‖ <= d`,
/// stored in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPolynomial {
    m: usize,
    d: usize,
    terms: Vec<(MultiIndex, f64)>,
}

#[derive(Serialize, Deserialize)]
struct PolynomialRepr {
    d: usize,
    coeffs: Vec<(MultiIndex, f64)>,
}

impl Serialize for SampledPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolynomialRepr {
            d: self.d,
            coeffs: self.terms.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SampledPolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = PolynomialRepr::deserialize(de)?;
        let m = repr
            .coeffs
            .first()
            .map(|(j, _)| j.dim())
            .ok_or_else(|| serde::de::Error::custom("polynomial needs at least one coefficient"))?;
        SampledPolynomial::from_terms(m, repr.d, repr.coeffs).map_err(serde::de::Error::custom)
    }
}

impl SampledPolynomial {
    pub fn zero(m: usize, d: usize) -> Result<SampledPolynomial> {
        if m == 0 {
            return Err(Error::domain("polynomial needs at least one variable"));
        }
        let n = count_multi_indices(m, d);
        if n > MAX_TERMS as u128 {
            return Err(Error::Unsupported(format!(
                "dense storage of degree {d} in {m} variables needs {n} coefficients (limit {MAX_TERMS})"
            )));
        }
        Ok(SampledPolynomial {
            m,
            d,
            terms: enumerate(m, d).into_iter().map(|j| (j, 0.0)).collect(),
        })
    }

    /// Dense polynomial from a (possibly sparse) list of terms; repeated
    /// indices add up.
    pub fn from_terms(m: usize, d: usize, terms: Vec<(MultiIndex, f64)>) -> Result<SampledPolynomial> {
        let mut p = SampledPolynomial::zero(m, d)?;
        for (j, v) in terms {
            if j.dim() != m {
                return Err(Error::validation(format!(
                    "multi-index {:?} has {} entries, expected {m}",
                    j.entries(),
                    j.dim()
                )));
            }
            if j.norm() > d {
                return Err(Error::validation(format!(
                    "multi-index {:?} has total degree {} > {d}",
                    j.entries(),
                    j.norm()
                )));
            }
            if !v.is_finite() {
                return Err(Error::validation(format!(
                    "coefficient of {:?} is not finite",
                    j.entries()
                )));
            }
            let rank = p.rank(&j).expect("index within degree");
            p.terms[rank].1 += v;
        }
        Ok(p)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &[(MultiIndex, f64)] {
        &self.terms
    }

    pub fn rank(&self, j: &MultiIndex) -> Option<usize> {
        self.terms.binary_search_by(|(k, _)| k.cmp(j)).ok()
    }

    pub fn coefficient(&self, j: &MultiIndex) -> f64 {
        self.rank(j).map_or(0.0, |r| self.terms[r].1)
    }

    /// `self + other` where both share `m`; the result has the larger degree.
    pub fn add(&self, other: &SampledPolynomial) -> Result<SampledPolynomial> {
        if self.m != other.m {
            return Err(Error::domain(
                "cannot add polynomials in different numbers of variables",
            ));
        }
        let d = self.d.max(other.d);
        let terms = self.terms.iter().chain(&other.terms).cloned().collect();
        SampledPolynomial::from_terms(self.m, d, terms)
    }

    fn powers(&self, t: &[f64]) -> Result<Vec<Vec<f64>>> {
        if t.len() != self.m {
            return Err(Error::domain(format!(
                "point has dimension {}, polynomial has {} variables",
                t.len(),
                self.m
            )));
        }
        Ok(t.iter()
            .map(|&x| {
                let mut row = Vec::with_capacity(self.d + 1);
                let mut acc = 1.0;
                for _ in 0..=self.d {
                    row.push(acc);
                    acc *= x;
                }
                row
            })
            .collect())
    }

    /// `Σ a_j t^j`.
    pub fn evaluate(&self, t: &[f64]) -> Result<f64> {
        let pw = self.powers(t)?;
        let mut sum = CompensatedSum::default();
        for (j, a) in &self.terms {
            if *a == 0.0 {
                continue;
            }
            let mono: f64 = j
                .entries()
                .iter()
                .enumerate()
                .map(|(h, &e)| pw[h][e as usize])
                .product();
            sum.add(a * mono);
        }
        Ok(sum.value())
    }

    /// `∇ Σ a_j t^j`, term by term.
    pub fn gradient(&self, t: &[f64]) -> Result<Vec<f64>> {
        Ok(self.value_and_gradient(t)?.1)
    }

    pub fn value_and_gradient(&self, t: &[f64]) -> Result<(f64, Vec<f64>)> {
        let pw = self.powers(t)?;
        let mut value = CompensatedSum::default();
        let mut grad = vec![CompensatedSum::default(); self.m];
        for (j, a) in &self.terms {
            if *a == 0.0 {
                continue;
            }
            let e = j.entries();
            let mono: f64 = e.iter().enumerate().map(|(h, &x)| pw[h][x as usize]).product();
            value.add(a * mono);
            for k in 0..self.m {
                if e[k] == 0 {
                    continue;
                }
                let mut term = a * e[k] as f64 * pw[k][e[k] as usize - 1];
                for (h, &x) in e.iter().enumerate() {
                    if h != k {
                        term *= pw[h][x as usize];
                    }
                }
                grad[k].add(term);
            }
        }
        Ok((value.value(), grad.iter().map(|s| s.value()).collect()))
    }
}

/// One draw of the noise system `X_1, …, X_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSystem {
    pub m: usize,
    pub seed: u64,
    pub polys: Vec<SampledPolynomial>,
}

impl SampledSystem {
    pub fn evaluate(&self, t: &[f64]) -> Result<Vec<f64>> {
        self.polys.iter().map(|p| p.evaluate(t)).collect()
    }
}

/// Draw every coefficient `a_j^{(i)}` independently from
/// `N(0, c_{‖j‖}·‖j‖!/j!)`. Coefficient `(i, j)` is the inverse-CDF image of
/// the uniform keyed by `(seed, i, rank(j))`.
pub fn sample_system(model: &NoiseModel, seed: u64) -> Result<SampledSystem> {
    let m = model.m();
    let mut polys = Vec::with_capacity(m);
    for (i, q) in model.components().enumerate() {
        let mut p = SampledPolynomial::zero(m, q.degree())?;
        let draws: Vec<f64> = p
            .terms
            .par_iter()
            .enumerate()
            .map(|(rank, (j, _))| {
                let sd = coefficient_variance(q, j).expect("index within degree").sqrt();
                let u = stream::keyed_unit(seed, &[tag::COEFFICIENT, i as u64, rank as u64]);
                sd * normal_quantile(u)
            })
            .collect();
        for (term, v) in p.terms.iter_mut().zip(draws) {
            term.1 = v;
        }
        polys.push(p);
    }
    Ok(SampledSystem { m, seed, polys })
}
