//! Two-variable root counts checked against the Sylvester resultant of a
//! pair of quadratics, whose real roots in `x` match the real solutions one
//! to one for generic systems.

use noisyroots::covariance::{shub_smale_q, NoiseModel};
use noisyroots::ensemble::{sample_system, SampledPolynomial};
use noisyroots::poly::multiply;
use noisyroots::rootcount::{count_roots_1d, count_roots_2d, replicate_seed, Newton2dSettings};
use noisyroots::signal::SignalSpec;

/// Coefficient of `y^k` as a polynomial in `x`, lowest degree first.
fn y_coefficient(p: &SampledPolynomial, k: u32) -> Vec<f64> {
    let mut c = vec![0.0; 3];
    for (j, a) in p.terms() {
        if j.entries()[1] == k {
            c[j.entries()[0] as usize] += a;
        }
    }
    c
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0))
        .collect()
}

/// Real solutions of `f = g = 0` for quadratics in `(x, y)`.
fn resultant_count(f: &SampledPolynomial, g: &SampledPolynomial) -> usize {
    let a: Vec<Vec<f64>> = (0..3).map(|k| y_coefficient(f, k)).collect();
    let b: Vec<Vec<f64>> = (0..3).map(|k| y_coefficient(g, k)).collect();
    let p = sub(&multiply(&a[2], &b[0]), &multiply(&a[0], &b[2]));
    let q = sub(&multiply(&a[2], &b[1]), &multiply(&a[1], &b[2]));
    let s = sub(&multiply(&a[1], &b[0]), &multiply(&a[0], &b[1]));
    count_roots_1d(&sub(&multiply(&p, &p), &multiply(&q, &s))).unwrap()
}

fn check(signal: &SignalSpec, seed: u64, n: u64) {
    let model = NoiseModel::uniform(shub_smale_q(2).unwrap(), 2).unwrap();
    let mut total = 0;
    for r in 0..n {
        let sys = sample_system(&model, replicate_seed(seed, r)).unwrap();
        let f = sys.polys[0]
            .add(&signal.components[0].to_polynomial(0, 2).unwrap())
            .unwrap();
        let g = sys.polys[1]
            .add(&signal.components[1].to_polynomial(1, 2).unwrap())
            .unwrap();
        let exact = resultant_count(&f, &g);
        let got = count_roots_2d(&sys, signal, f64::INFINITY, &Newton2dSettings::default()).unwrap();
        assert_eq!(got.count, exact, "replicate {r}: roots {:?}", got.roots);
        total += exact;
    }
    assert!(total > 0);
}

#[test]
fn zero_signal_counts_match_resultant() {
    check(&SignalSpec::zero(2), 2024, 400);
}

#[test]
fn radial_signal_counts_match_resultant() {
    check(&SignalSpec::radial(2, 2, 1.0), 7, 300);
}

#[test]
fn separable_signal_counts_match_resultant() {
    check(&SignalSpec::separable(2, &[-1.0, 0.0, 1.0]), 11, 300);
}

#[test]
fn box_restricts_to_nearby_roots() {
    let model = NoiseModel::uniform(shub_smale_q(2).unwrap(), 2).unwrap();
    let signal = SignalSpec::zero(2);
    for r in 0..50 {
        let sys = sample_system(&model, replicate_seed(3, r)).unwrap();
        let all = count_roots_2d(&sys, &signal, f64::INFINITY, &Newton2dSettings::default()).unwrap();
        let boxed = count_roots_2d(&sys, &signal, 1.0, &Newton2dSettings::default()).unwrap();
        let inside = all
            .roots
            .iter()
            .filter(|p| p[0].abs() <= 1.0 && p[1].abs() <= 1.0)
            .count();
        assert_eq!(boxed.count, inside);
    }
}
