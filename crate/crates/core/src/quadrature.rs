//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals and
//! on half-lines, plus a log-domain wrapper for integrands whose magnitude
//! does not fit in `f64`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// The fifteen Kronrod abscissae and weights mapped onto `[a, b]`.
pub fn kronrod_nodes(a: f64, b: f64) -> [(f64, f64); 15] {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); 15];
    for k in 0..7 {
        out[2 * k] = (center - half * XGK[k], half * WGK[k]);
        out[2 * k + 1] = (center + half * XGK[k], half * WGK[k]);
    }
    out[14] = (center, half * WGK[7]);
    out
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for k in 0..7 {
        let dx = half * XGK[k];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[k] * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_subdivisions: usize,
    pub initial_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 0.0,
            rel: 1e-11,
            max_subdivisions: 4000,
            initial_panels: 16,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Integral {
    pub value: f64,
    pub abs_err: f64,
    /// Final partition `(a, b, contribution)` sorted by `a`.
    pub panels: Vec<(f64, f64, f64)>,
}

/// Integrate `f` over `[a, b]` to `max(tol.abs, tol.rel·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("integrate needs finite limits; use integrate_half_line"));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            abs_err: 0.0,
            panels: Vec::new(),
        });
    }
    let n0 = tol.initial_panels.max(1);
    let width = (b - a) / n0 as f64;
    let mut heap = BinaryHeap::with_capacity(n0 + tol.max_subdivisions);
    let (mut total, mut total_err) = (0.0, 0.0);
    for k in 0..n0 {
        let lo = a + width * k as f64;
        let hi = if k + 1 == n0 { b } else { lo + width };
        let (value, err) = gk15(&f, lo, hi);
        total += value;
        total_err += err;
        heap.push(Panel {
            a: lo,
            b: hi,
            value,
            err,
        });
    }
    let mut splits = 0;
    loop {
        if !total.is_finite() {
            return Err(Error::NonConvergence {
                message: "integrand produced a non-finite value".into(),
                achieved: f64::INFINITY,
            });
        }
        let target = tol.abs.max(tol.rel * total.abs());
        if total_err <= target {
            break;
        }
        if splits >= tol.max_subdivisions {
            return Err(Error::NonConvergence {
                message: format!("adaptive quadrature exhausted {splits} subdivisions"),
                achieved: total_err / total.abs().max(f64::MIN_POSITIVE),
            });
        }
        let worst = heap.pop().expect("heap holds every panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split further in floating point; accept it.
            heap.push(Panel { err: 0.0, ..worst });
            total_err -= worst.err;
            continue;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
        splits += 1;
    }
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    // Re-sum in a fixed order so the result does not depend on heap history.
    let value = panels.iter().map(|p| p.value).sum();
    let abs_err = panels.iter().map(|p| p.err).sum();
    Ok(Integral {
        value,
        abs_err,
        panels: panels.iter().map(|p| (p.a, p.b, p.value)).collect(),
    })
}

/// Map `s ∈ [0, 1)` onto `[lo, ∞)` by `ρ = lo + s/(1 − s)`.
#[inline]
pub fn half_line_point(lo: f64, s: f64) -> (f64, f64) {
    let one_minus = 1.0 - s;
    (lo + s / one_minus, 1.0 / (one_minus * one_minus))
}

/// Inverse of [`half_line_point`].
#[inline]
pub fn half_line_param(lo: f64, rho: f64) -> f64 {
    let x = rho - lo;
    x / (1.0 + x)
}

/// Integrate `f` over `[lo, ∞)`; panels are reported in the `s` variable.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, lo: f64, tol: Tolerance) -> Result<Integral> {
    integrate(
        |s| {
            if s >= 1.0 {
                return 0.0;
            }
            let (rho, jac) = half_line_point(lo, s);
            let v = f(rho) * jac;
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Integral of `exp(log_f)` returned as `(ln I, relative error)`.
#[derive(Debug, Clone)]
pub struct LogIntegral {
    pub log_value: f64,
    pub rel_err: f64,
    /// Shift subtracted from `log_f` before exponentiating.
    pub shift: f64,
    pub inner: Integral,
}

/// Largest value of `log_f` over a uniform sample of `[a, b]`.
pub fn log_peak<F: Fn(f64) -> f64>(log_f: &F, a: f64, b: f64, samples: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for k in 0..=samples {
        let x = a + (b - a) * (k as f64 + 0.5) / (samples as f64 + 1.0);
        let v = log_f(x);
        if v > best {
            best = v;
        }
    }
    best
}

/// Integrate `exp(log_f)` over `[a, b]` (finite) or `[a, ∞)` when `b` is
/// infinite, scaling by a shared `shift` that the caller may fix so several
/// pieces can be added in linear space.
pub fn integrate_log<F: Fn(f64) -> f64>(
    log_f: F,
    a: f64,
    b: f64,
    shift: Option<f64>,
    tol: Tolerance,
) -> Result<LogIntegral> {
    let infinite = b.is_infinite();
    let shift = match shift {
        Some(s) => s,
        None => {
            let peak = if infinite {
                log_peak(
                    &|s: f64| log_f(half_line_point(a, s).0) + half_line_point(a, s).1.ln(),
                    0.0,
                    1.0,
                    2048,
                )
            } else {
                log_peak(&log_f, a, b, 2048)
            };
            if peak.is_finite() {
                peak
            } else {
                0.0
            }
        }
    };
    let f = |x: f64| {
        let v = log_f(x) - shift;
        if v == f64::NEG_INFINITY {
            0.0
        } else {
            v.exp()
        }
    };
    let inner = if infinite {
        integrate_half_line(f, a, tol)?
    } else {
        integrate(f, a, b, tol)?
    };
    Ok(LogIntegral {
        log_value: inner.value.ln() + shift,
        rel_err: inner.abs_err / inner.value.abs().max(f64::MIN_POSITIVE),
        shift,
        inner,
    })
}
