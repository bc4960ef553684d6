//! Empirical root counts: exact for one variable, Newton-seeded for two.

use std::io::Write;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{Float, One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::NoiseModel;
use crate::ensemble::{sample_system, SampledPolynomial, SampledSystem};
use crate::error::{Error, Result};
use crate::estimate::{McEstimate, Method, Moments};
use crate::poly;
use crate::signal::SignalSpec;
use crate::stream::{derive_key, tag};

/// Coefficients below this magnitude are treated as zero when trimming.
pub const TRIM_THRESHOLD: f64 = 1e-300;

/// Exact integer image of float coefficients: all are scaled by the same
/// power of two.
pub fn to_integer_poly(coeffs: &[f64]) -> Vec<BigInt> {
    let decoded: Vec<(u64, i16, i8)> = coeffs.iter().map(|c| c.integer_decode()).collect();
    let e_min = decoded
        .iter()
        .filter(|(m, _, _)| *m != 0)
        .map(|(_, e, _)| *e)
        .min()
        .unwrap_or(0);
    decoded
        .iter()
        .map(|&(mant, exp, sign)| {
            if mant == 0 {
                return BigInt::zero();
            }
            let v = BigInt::from(mant) << (exp - e_min) as usize;
            if sign < 0 {
                -v
            } else {
                v
            }
        })
        .collect()
}

fn strip(mut p: Vec<BigInt>) -> Vec<BigInt> {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn primitive(p: Vec<BigInt>) -> Vec<BigInt> {
    let g = p.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if g.is_zero() || g.is_one() {
        return p;
    }
    p.into_iter().map(|c| c / &g).collect()
}

/// `lc(b)^s · a mod b` over the integers, together with `s`.
fn pseudo_remainder(a: &[BigInt], b: &[BigInt]) -> (Vec<BigInt>, u32) {
    let mut r = a.to_vec();
    let lb = b.last().expect("nonzero divisor").clone();
    let db = b.len() - 1;
    let mut steps = 0;
    while r.len() > db && !r.is_empty() {
        let lr = r.last().unwrap().clone();
        let shift = r.len() - 1 - db;
        for c in r.iter_mut() {
            *c *= &lb;
        }
        for (k, bk) in b.iter().enumerate() {
            r[k + shift] -= &lr * bk;
        }
        steps += 1;
        r = strip(r);
    }
    (r, steps)
}

fn sign_changes(signs: impl Iterator<Item = Sign>) -> usize {
    let mut last = Sign::NoSign;
    let mut changes = 0;
    for s in signs {
        if s == Sign::NoSign {
            continue;
        }
        if last != Sign::NoSign && s != last {
            changes += 1;
        }
        last = s;
    }
    changes
}

/// Number of distinct real roots of an integer polynomial, from its Sturm
/// sequence built with primitive pseudo-remainders.
pub fn count_real_roots_exact(coeffs: &[BigInt]) -> Result<usize> {
    let p = primitive(strip(coeffs.to_vec()));
    if p.is_empty() {
        return Err(Error::Degenerate(
            "the zero polynomial has infinitely many roots".into(),
        ));
    }
    if p.len() == 1 {
        return Ok(0);
    }
    let dp: Vec<BigInt> = p.iter().enumerate().skip(1).map(|(k, c)| c * BigInt::from(k)).collect();
    let mut chain = vec![p, primitive(dp)];
    loop {
        let n = chain.len();
        let (rem, steps) = pseudo_remainder(&chain[n - 2], &chain[n - 1]);
        if rem.is_empty() {
            break;
        }
        // The true remainder is rem / lc^steps; the next entry is its negative.
        let lead_negative = chain[n - 1].last().unwrap().is_negative() && steps % 2 == 1;
        let next: Vec<BigInt> = if lead_negative {
            rem
        } else {
            rem.into_iter().map(|c| -c).collect()
        };
        chain.push(primitive(next));
    }
    let at_pos = sign_changes(chain.iter().map(|q| q.last().unwrap().sign()));
    let at_neg = sign_changes(chain.iter().map(|q| {
        let s = q.last().unwrap().sign();
        if (q.len() - 1) % 2 == 1 {
            -s
        } else {
            s
        }
    }));
    Ok(at_neg - at_pos)
}

/// `p(t − c)` for an integer shift `c`.
pub fn shift_integer_poly(coeffs: &[BigInt], c: i64) -> Vec<BigInt> {
    // Horner on polynomials: p(t − c) = (((a_n)(t − c) + a_{n−1})(t − c) + …).
    let c = BigInt::from(c);
    let mut out: Vec<BigInt> = Vec::new();
    for a in coeffs.iter().rev() {
        let mut next = vec![BigInt::zero(); out.len() + 1];
        for (k, v) in out.iter().enumerate() {
            next[k + 1] += v;
            next[k] -= v * &c;
        }
        next[0] += a;
        out = next;
    }
    out
}

fn trimmed(coeffs: &[f64]) -> Result<&[f64]> {
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::domain("coefficients must be finite"));
    }
    let c = poly::trim(coeffs, TRIM_THRESHOLD);
    if c.is_empty() {
        return Err(Error::Degenerate(
            "the zero polynomial has infinitely many roots".into(),
        ));
    }
    Ok(c)
}

/// Exact count of distinct real roots (ascending coefficients).
pub fn count_roots_1d(coeffs: &[f64]) -> Result<usize> {
    count_real_roots_exact(&to_integer_poly(trimmed(coeffs)?))
}

/// Real companion-matrix eigenvalues; fast but not exact near double roots.
pub fn count_roots_companion(coeffs: &[f64]) -> Result<usize> {
    Ok(poly::companion_real_roots(trimmed(coeffs)?).len())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Newton2dSettings {
    /// Seeds per axis are `grid_factor · max degree`.
    pub grid_factor: usize,
    /// Relative residual against the absolute-value evaluation.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for Newton2dSettings {
    fn default() -> Self {
        Newton2dSettings {
            grid_factor: 8,
            tol: 1e-10,
            max_iter: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Count2d {
    pub count: usize,
    pub roots: Vec<[f64; 2]>,
    pub seeds: usize,
    /// Seeds that used up the iteration budget inside the search region.
    pub exhausted: usize,
    /// More than 1% of seeds exhausted.
    pub warning: bool,
}

/// Bivariate polynomial as `(i, j, a)` with values, gradient and the
/// absolute-value evaluation in one pass.
struct Bivariate {
    terms: Vec<(usize, usize, f64)>,
    d: usize,
}

impl Bivariate {
    /// Dehomogenisation of `p` in projective chart `chart`: 0 is the affine
    /// plane itself, 1 sets `x = 1` with variables `(w, y)` and 2 sets
    /// `y = 1` with variables `(w, x)`, where `w` is the homogenising
    /// coordinate.
    fn chart(p: &SampledPolynomial, chart: usize) -> Bivariate {
        let d = p.degree();
        Bivariate {
            terms: p
                .terms()
                .iter()
                .filter(|(_, a)| *a != 0.0)
                .map(|(j, a)| {
                    let (i, k) = (j.entries()[0] as usize, j.entries()[1] as usize);
                    let w = d - i - k;
                    match chart {
                        0 => (i, k, *a),
                        1 => (w, k, *a),
                        _ => (w, i, *a),
                    }
                })
                .collect(),
            d,
        }
    }

    fn eval(&self, x: f64, y: f64, px: &mut [f64], py: &mut [f64]) -> (f64, f64, f64, f64) {
        px[0] = 1.0;
        py[0] = 1.0;
        for k in 1..=self.d {
            px[k] = px[k - 1] * x;
            py[k] = py[k - 1] * y;
        }
        let (mut v, mut gx, mut gy, mut scale) = (0.0, 0.0, 0.0, 0.0);
        for &(i, j, a) in &self.terms {
            let mono = px[i] * py[j];
            v += a * mono;
            scale += (a * mono).abs();
            if i > 0 {
                gx += a * i as f64 * px[i - 1] * py[j];
            }
            if j > 0 {
                gy += a * j as f64 * px[i] * py[j - 1];
            }
        }
        (v, gx, gy, scale)
    }
}

enum Outcome {
    Root([f64; 2]),
    Exhausted,
    Lost,
}

/// Scaled residual `Σ (f_i/S_i)²` with `S_i` the absolute-value evaluation.
fn merit(f: &[Bivariate; 2], x: f64, y: f64, px: &mut [f64], py: &mut [f64]) -> f64 {
    let (v1, _, _, s1) = f[0].eval(x, y, px, py);
    let (v2, _, _, s2) = f[1].eval(x, y, px, py);
    (v1 / s1.max(f64::MIN_POSITIVE)).powi(2) + (v2 / s2.max(f64::MIN_POSITIVE)).powi(2)
}

/// Newton with backtracking on the scaled residual. Seeds that stall at a
/// non-root minimum of the residual, hit a singular Jacobian or leave the
/// search region are lost; only seeds still improving when the budget runs
/// out count as exhausted.
fn newton(
    f: &[Bivariate; 2],
    start: [f64; 2],
    limit: f64,
    s: &Newton2dSettings,
    px: &mut [f64],
    py: &mut [f64],
) -> Outcome {
    let [mut x, mut y] = start;
    let mut converged_steps = 0;
    for _ in 0..s.max_iter {
        let (v1, a, b, s1) = f[0].eval(x, y, px, py);
        let (v2, c, d, s2) = f[1].eval(x, y, px, py);
        let det = a * d - b * c;
        let jn = a.abs().max(b.abs()) * c.abs().max(d.abs());
        if !(det.abs() > 1e-14 * jn) {
            return Outcome::Lost;
        }
        let dx = (d * v1 - b * v2) / det;
        let dy = (a * v2 - c * v1) / det;
        if v1.abs() <= s.tol * s1 && v2.abs() <= s.tol * s2 {
            converged_steps += 1;
            // One more full step polishes the last digits.
            if converged_steps > 1 {
                return Outcome::Root([x, y]);
            }
            x -= dx;
            y -= dy;
            continue;
        }
        let phi = (v1 / s1).powi(2) + (v2 / s2).powi(2);
        let mut lambda = 1.0;
        loop {
            let (nx, ny) = (x - lambda * dx, y - lambda * dy);
            if nx.abs() <= limit && ny.abs() <= limit && merit(f, nx, ny, px, py) < (1.0 - 1e-4 * lambda) * phi {
                x = nx;
                y = ny;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-10 {
                return Outcome::Lost;
            }
        }
    }
    Outcome::Exhausted
}

fn polys_for(system: &SampledSystem, signal: &SignalSpec) -> Result<Vec<SampledPolynomial>> {
    if signal.m() != system.m {
        return Err(Error::validation(format!(
            "signal has {} equations, system has {}",
            signal.m(),
            system.m
        )));
    }
    system
        .polys
        .iter()
        .zip(&signal.components)
        .enumerate()
        .map(|(i, (p, c))| {
            if c.is_zero() {
                Ok(p.clone())
            } else {
                p.add(&c.to_polynomial(i, system.m)?)
            }
        })
        .collect()
}

/// Isolated real solutions of `P + X = 0` in `[−R, R]²`; `R` may be
/// infinite.
///
/// The search runs in the three affine charts of the projective plane, each
/// restricted to `[−1, 1]²`, which together cover every real point. Newton is
/// started from the cell centres of a `k × k` grid in each chart and the roots
/// found are mapped back to the plane and deduplicated, so roots far from the
/// origin are found as reliably as those near it.
pub fn count_roots_2d(
    system: &SampledSystem,
    signal: &SignalSpec,
    box_r: f64,
    settings: &Newton2dSettings,
) -> Result<Count2d> {
    if system.m != 2 {
        return Err(Error::Unsupported(format!(
            "two-variable counting needs m = 2, got {}",
            system.m
        )));
    }
    if !(box_r > 0.0) {
        return Err(Error::validation("box radius must be positive"));
    }
    let polys = polys_for(system, signal)?;
    let dmax = polys[0].degree().max(polys[1].degree()).max(1);
    let k = settings.grid_factor * dmax;
    let cell = 2.0 / k as f64;
    let mut px = vec![0.0; dmax + 1];
    let mut py = vec![0.0; dmax + 1];
    let mut roots: Vec<[f64; 2]> = Vec::new();
    let mut exhausted = 0;
    for chart in 0..3 {
        let f = [Bivariate::chart(&polys[0], chart), Bivariate::chart(&polys[1], chart)];
        for a in 0..k {
            for b in 0..k {
                let u = -1.0 + (a as f64 + 0.5) * cell;
                let v = -1.0 + (b as f64 + 0.5) * cell;
                match newton(&f, [u, v], 4.0, settings, &mut px, &mut py) {
                    Outcome::Root([u, v]) => {
                        // Each chart owns the points whose other coordinates are
                        // at most one in size; overlaps are removed below.
                        if u.abs() > 1.0 + 1e-9 || v.abs() > 1.0 + 1e-9 {
                            continue;
                        }
                        let r = match chart {
                            0 => [u, v],
                            1 => [1.0 / u, v / u],
                            _ => [v / u, 1.0 / u],
                        };
                        if !(r[0].is_finite() && r[1].is_finite() && r[0].abs() <= box_r && r[1].abs() <= box_r) {
                            continue;
                        }
                        let norm = r[0].hypot(r[1]);
                        let dup = roots
                            .iter()
                            .any(|q| (q[0] - r[0]).hypot(q[1] - r[1]) <= 1e-6 * (1.0 + norm));
                        if !dup {
                            roots.push(r);
                        }
                    }
                    Outcome::Exhausted => exhausted += 1,
                    Outcome::Lost => {}
                }
            }
        }
    }
    roots.sort_by(|p, q| p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1])));
    let seeds = 3 * k * k;
    Ok(Count2d {
        count: roots.len(),
        roots,
        seeds,
        exhausted,
        warning: exhausted * 100 > seeds,
    })
}

/// Options for [`mc_expected_roots_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McOptions {
    /// `Sturm` or `Companion` for one variable; ignored for two.
    pub method_1d: Method,
    pub newton: Newton2dSettings,
    /// Restricts two-variable counting to `[−R, R]²`; the default counts
    /// every real root.
    pub box_r: Option<f64>,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            method_1d: Method::Sturm,
            newton: Newton2dSettings::default(),
            box_r: None,
        }
    }
}

/// One replicate of a Monte Carlo root count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Replicate {
    pub replicate: u64,
    pub seed: u64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRun {
    pub estimate: McEstimate,
    pub replicates: Vec<Replicate>,
    /// Box half-width used for two variables; `None` counts the whole plane.
    pub box_r: Option<f64>,
    /// Replicates whose Newton search raised a warning.
    pub newton_warnings: u64,
}

impl McRun {
    pub fn write_replicates_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["replicate", "seed", "count"])?;
        for r in &self.replicates {
            w.write_record([r.replicate.to_string(), r.seed.to_string(), r.count.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Seed of replicate `r` under the run seed.
pub fn replicate_seed(seed: u64, r: u64) -> u64 {
    derive_key(seed, &[tag::REPLICATE, r])
}

pub fn mc_expected_roots(model: &NoiseModel, signal: &SignalSpec, n: u64, seed: u64) -> Result<McRun> {
    mc_expected_roots_with(model, signal, n, seed, &McOptions::default())
}

/// Sample `n` systems `P + X`, count real roots of each and average.
pub fn mc_expected_roots_with(
    model: &NoiseModel,
    signal: &SignalSpec,
    n: u64,
    seed: u64,
    opts: &McOptions,
) -> Result<McRun> {
    let m = model.m();
    if m > 2 {
        return Err(Error::Unsupported(format!(
            "empirical counting supports m = 1 or 2, got {m}; use the analytic expectation or the bound chain"
        )));
    }
    if n < 100 {
        return Err(Error::validation(format!(
            "at least 100 replicates are required, got {n}"
        )));
    }
    signal.validate(model)?;
    let degrees = model.degrees();
    let bezout: u64 = degrees.iter().map(|&d| d as u64).product();
    let box_r = if m == 2 { opts.box_r } else { None };
    let method = if m == 1 { opts.method_1d } else { Method::Subdivision };
    if m == 1 && !matches!(method, Method::Sturm | Method::Companion) {
        return Err(Error::validation("one-variable counting uses sturm or companion"));
    }

    let results: Vec<(Replicate, bool)> = (0..n)
        .into_par_iter()
        .map(|r| {
            let rs = replicate_seed(seed, r);
            let system = sample_system(model, rs)?;
            let (count, warned) = if m == 1 {
                let p = &polys_for(&system, signal)?[0];
                let mut c = vec![0.0; p.degree() + 1];
                for (j, a) in p.terms() {
                    c[j.entries()[0] as usize] += a;
                }
                let c = trimmed(&c)?;
                let count = match method {
                    Method::Companion => count_roots_companion(c)?,
                    _ => count_roots_1d(c)?,
                };
                let deg = c.len() - 1;
                if count % 2 != deg % 2 {
                    return Err(Error::Degenerate(format!(
                        "replicate {r}: {count} roots for degree {deg} breaks parity (repeated root?)"
                    )));
                }
                (count as u64, false)
            } else {
                let res = count_roots_2d(&system, signal, box_r.unwrap_or(f64::INFINITY), &opts.newton)?;
                (res.count as u64, res.warning)
            };
            if count > bezout {
                return Err(Error::Degenerate(format!(
                    "replicate {r}: {count} roots exceed the Bezout number {bezout}"
                )));
            }
            Ok((
                Replicate {
                    replicate: r,
                    seed: rs,
                    count,
                },
                warned,
            ))
        })
        .collect::<Result<_>>()?;
    let counts: Vec<f64> = results.iter().map(|(r, _)| r.count as f64).collect();
    let mom = Moments::from_slice(&counts);
    Ok(McRun {
        estimate: McEstimate::from_moments(&mom, seed, method),
        newton_warnings: results.iter().filter(|(_, w)| *w).count() as u64,
        replicates: results.into_iter().map(|(r, _)| r).collect(),
        box_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::shub_smale_q;
    use crate::ensemble::MultiIndex;
    use crate::signal::SignalComponent;
    use proptest::prelude::*;

    fn bi(terms: &[(u32, u32, f64)], d: usize) -> SampledPolynomial {
        SampledPolynomial::from_terms(
            2,
            d,
            terms
                .iter()
                .map(|&(i, j, a)| (MultiIndex::new(vec![i, j]), a))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn small_univariate_cases() {
        assert_eq!(count_roots_1d(&[1.0, 0.0, 1.0]).unwrap(), 0);
        assert_eq!(count_roots_1d(&[-1.0, 0.0, 1.0]).unwrap(), 2);
        assert_eq!(count_roots_1d(&[0.0, -3.0, 0.0, 1.0]).unwrap(), 3);
        assert_eq!(count_roots_companion(&[0.0, -3.0, 0.0, 1.0]).unwrap(), 3);
        // (t − 1)²(t + 2): distinct roots counted once.
        assert_eq!(count_roots_1d(&[2.0, -3.0, 0.0, 1.0]).unwrap(), 2);
        assert_eq!(count_roots_1d(&[5.0]).unwrap(), 0);
        assert!(matches!(count_roots_1d(&[0.0, 0.0]), Err(Error::Degenerate(_))));
        assert_eq!(count_roots_1d(&[-1.0, 0.0, 1.0, 1e-320]).unwrap(), 2);
    }

    #[test]
    fn sturm_agrees_with_companion_on_random_polynomials() {
        use rand::Rng;
        let mut rng = crate::stream::keyed_rng(5, &[tag::TEST]);
        for _ in 0..1000 {
            let deg = rng.random_range(1..=8);
            let c: Vec<f64> = (0..=deg).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert_eq!(count_roots_1d(&c).unwrap(), count_roots_companion(&c).unwrap(), "{c:?}");
        }
    }

    proptest! {
        #[test]
        fn translation_invariance(c in proptest::collection::vec(-1000i64..1000, 2..8), shift in prop::sample::select(vec![-10i64, -1, 1, 10])) {
            let p: Vec<BigInt> = c.iter().map(|&v| BigInt::from(v)).collect();
            prop_assume!(!p.last().unwrap().is_zero());
            let a = count_real_roots_exact(&p).unwrap();
            let b = count_real_roots_exact(&shift_integer_poly(&p, shift)).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn parity(c in proptest::collection::vec(-1.0f64..1.0, 2..10)) {
            prop_assume!(c.last().unwrap().abs() > 1e-3);
            let n = count_roots_1d(&c).unwrap();
            let deg = c.len() - 1;
            prop_assert_eq!(n % 2, deg % 2);
        }
    }

    #[test]
    fn shift_is_exact() {
        // t² − 1 shifted by 1: t² − 2t.
        let p = vec![BigInt::from(-1), BigInt::zero(), BigInt::one()];
        assert_eq!(
            shift_integer_poly(&p, 1),
            vec![BigInt::zero(), BigInt::from(-2), BigInt::one()]
        );
    }

    #[test]
    fn planar_examples() {
        let zero = SampledSystem {
            m: 2,
            seed: 0,
            polys: vec![bi(&[], 2), bi(&[], 2)],
        };
        let grid = SignalSpec {
            components: vec![
                SignalComponent::Dense {
                    poly: bi(&[(2, 0, 1.0), (0, 0, -1.0)], 2),
                },
                SignalComponent::Dense {
                    poly: bi(&[(0, 2, 1.0), (0, 0, -1.0)], 2),
                },
            ],
        };
        let res = count_roots_2d(&zero, &grid, 10.0, &Newton2dSettings::default()).unwrap();
        assert_eq!(res.count, 4);
        assert!(!res.warning);
        let lin = SignalSpec {
            components: vec![
                SignalComponent::Dense {
                    poly: bi(&[(1, 0, 1.0), (0, 1, -1.0)], 1),
                },
                SignalComponent::Dense {
                    poly: bi(&[(1, 0, 1.0), (0, 1, 1.0)], 1),
                },
            ],
        };
        let zero1 = SampledSystem {
            m: 2,
            seed: 0,
            polys: vec![bi(&[], 1), bi(&[], 1)],
        };
        let res = count_roots_2d(&zero1, &lin, 10.0, &Newton2dSettings::default()).unwrap();
        assert_eq!(res.count, 1);
        assert!(res.roots[0][0].abs() < 1e-12 && res.roots[0][1].abs() < 1e-12);
    }

    #[test]
    fn kostlan_means() {
        let model = NoiseModel::uniform(shub_smale_q(4).unwrap(), 1).unwrap();
        let run = mc_expected_roots(&model, &SignalSpec::zero(1), 4000, 3).unwrap();
        assert!(run.estimate.covers(2.0, 4.0), "{:?}", run.estimate);
        let model = NoiseModel::uniform(shub_smale_q(2).unwrap(), 2).unwrap();
        let run = mc_expected_roots(&model, &SignalSpec::zero(2), 300, 3).unwrap();
        assert!(run.estimate.covers(2.0, 4.0), "{:?}", run.estimate);
        assert!(run.replicates.iter().all(|r| r.count <= 4));
    }

    #[test]
    fn deterministic_and_guarded() {
        let model = NoiseModel::uniform(shub_smale_q(3).unwrap(), 1).unwrap();
        let a = mc_expected_roots(&model, &SignalSpec::zero(1), 200, 9).unwrap();
        let b = mc_expected_roots(&model, &SignalSpec::zero(1), 200, 9).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            mc_expected_roots(&model, &SignalSpec::zero(1), 50, 9),
            Err(Error::Validation(_))
        ));
        let m3 = NoiseModel::uniform(shub_smale_q(2).unwrap(), 3).unwrap();
        assert!(matches!(
            mc_expected_roots(&m3, &SignalSpec::zero(3), 200, 9),
            Err(Error::Unsupported(_))
        ));
        let mut buf = Vec::new();
        a.write_replicates_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("replicate,seed,count\n"));
    }
}
