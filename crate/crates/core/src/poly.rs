//! Univariate polynomial helpers. Coefficients are stored lowest degree first.

#[inline]
pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
pub(crate) fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Compensated Horner evaluation (error-free transformations on each step);
/// the result is as accurate as plain Horner in twice the working precision.
pub fn eval_compensated(coeffs: &[f64], x: f64) -> f64 {
    let Some((&last, rest)) = coeffs.split_last() else {
        return 0.0;
    };
    let mut s = last;
    let mut c = 0.0f64;
    for &a in rest.iter().rev() {
        let (p, pi) = two_prod(s, x);
        let (sn, sigma) = two_sum(p, a);
        s = sn;
        c = c.mul_add(x, pi + sigma);
    }
    s + c
}

/// Plain Horner evaluation.
#[inline]
pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &a| acc.mul_add(x, a))
}

pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect()
}

pub fn multiply(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn power(base: &[f64], exponent: usize) -> Vec<f64> {
    (0..exponent).fold(vec![1.0], |acc, _| multiply(&acc, base))
}

/// Trim trailing coefficients with magnitude at most `threshold`.
pub fn trim(coeffs: &[f64], threshold: f64) -> &[f64] {
    let mut n = coeffs.len();
    while n > 0 && coeffs[n - 1].abs() <= threshold {
        n -= 1;
    }
    &coeffs[..n]
}

/// All complex roots as `(re, im)` pairs, from the eigenvalues of the
/// companion matrix. Returns an empty list for constants.
pub fn companion_roots(coeffs: &[f64]) -> Vec<(f64, f64)> {
    let c = trim(coeffs, 0.0);
    if c.len() < 2 {
        return Vec::new();
    }
    let n = c.len() - 1;
    let lead = c[n];
    let mut mat = nalgebra::DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        mat[(0, k)] = -c[n - 1 - k] / lead;
    }
    for k in 1..n {
        mat[(k, k - 1)] = 1.0;
    }
    mat.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect()
}

/// Real roots (sorted) among the companion eigenvalues, classified real when
/// `|Im| <= 1e−8·(1 + |Re|)`.
pub fn companion_real_roots(coeffs: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = companion_roots(coeffs)
        .into_iter()
        .filter(|(re, im)| im.abs() <= 1e-8 * (1.0 + re.abs()))
        .map(|(re, _)| re)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.sum, x);
        self.sum = s;
        self.carry += e;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_beats_cancellation() {
        // (x − 1)^7 expanded, evaluated next to its root.
        let c = [-1.0, 7.0, -21.0, 35.0, -35.0, 21.0, -7.0, 1.0];
        let x = 1.0 + 1e-3;
        let exact = (x - 1.0f64).powi(7);
        let got = eval_compensated(&c, x);
        assert!((got - exact).abs() < 1e-27, "{got:e}");
    }

    #[test]
    fn multiply_and_power() {
        assert_eq!(multiply(&[1.0, 1.0], &[2.0, 1.0]), vec![2.0, 3.0, 1.0]);
        assert_eq!(power(&[1.0, 1.0], 4), vec![1.0, 4.0, 6.0, 4.0, 1.0]);
        assert_eq!(derivative(&[5.0, 3.0, 2.0]), vec![3.0, 4.0]);
    }

    #[test]
    fn companion_finds_real_roots() {
        let r = companion_real_roots(&[0.0, -3.0, 0.0, 1.0]);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([-(3f64.sqrt()), 0.0, 3f64.sqrt()]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(companion_real_roots(&[1.0, 0.0, 1.0]).is_empty());
        assert!(companion_real_roots(&[4.0]).is_empty());
    }

    #[test]
    fn compensated_sum() {
        let mut s = CompensatedSum::default();
        for x in [1e16, 1.0, -1e16, 1.0] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }
}
