//! Grid-plus-refinement extremum search used for the sup/inf functionals.

/// Log-spaced grid on `[lo, hi]` (both > 0) with `n` points, preceded by `0`
/// when `include_zero` is set.
pub fn log_grid(lo: f64, hi: f64, n: usize, include_zero: bool) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (llo, lhi) = (lo.ln(), hi.ln());
    let mut out = Vec::with_capacity(n + 1);
    if include_zero {
        out.push(0.0);
    }
    for k in 0..n {
        let t = k as f64 / (n - 1) as f64;
        out.push((llo + t * (lhi - llo)).exp());
    }
    // Pin the end points exactly.
    let first = usize::from(include_zero);
    out[first] = lo;
    *out.last_mut().unwrap() = hi;
    out
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximisation of a unimodal `f` on `[a, b]`; returns the best
/// point seen together with its value.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let mut best = (a, f(a));
    let fb = f(b);
    if fb > best.1 {
        best = (b, fb);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc > best.1 {
            best = (c, fc);
        }
        if fd > best.1 {
            best = (d, fd);
        }
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc > best.1 {
        best = (c, fc);
    }
    if fd > best.1 {
        best = (d, fd);
    }
    best
}

/// Supremum of `f` over the sorted grid, refined by golden section around the
/// best grid point. Returns `(argmax, max)`.
pub fn grid_sup<F: Fn(f64) -> f64>(f: F, grid: &[f64]) -> (f64, f64) {
    let mut idx = 0;
    let mut best = f64::NEG_INFINITY;
    for (k, &x) in grid.iter().enumerate() {
        let v = f(x);
        if v > best {
            best = v;
            idx = k;
        }
    }
    let lo = grid[idx.saturating_sub(1)];
    let hi = grid[(idx + 1).min(grid.len() - 1)];
    if hi > lo {
        let refined = golden_max(&f, lo, hi, 200);
        if refined.1 > best {
            return refined;
        }
    }
    (grid[idx], best)
}

/// Infimum counterpart of [`grid_sup`].
pub fn grid_inf<F: Fn(f64) -> f64>(f: F, grid: &[f64]) -> (f64, f64) {
    let (x, v) = grid_sup(|x| -f(x), grid);
    (x, -v)
}

/// Compass (pattern) search maximising `f` from `start`. `project` maps a
/// trial point back onto the feasible set.
pub fn compass_max<F, P>(
    f: F,
    project: P,
    start: &[f64],
    step0: f64,
    min_step: f64,
    max_evals: usize,
) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
    P: Fn(&mut [f64]),
{
    let m = start.len();
    let mut x = start.to_vec();
    project(&mut x);
    let mut fx = f(&x);
    let mut step = step0;
    let mut evals = 1;
    let mut trial = vec![0.0; m];
    while step > min_step && evals < max_evals {
        let mut improved = false;
        for axis in 0..m {
            for dir in [1.0, -1.0] {
                trial.copy_from_slice(&x);
                trial[axis] += dir * step;
                project(&mut trial);
                let ft = f(&trial);
                evals += 1;
                if ft > fx {
                    x.copy_from_slice(&trial);
                    fx = ft;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

/// Halton point `index` in `dim` dimensions (bases are the first primes).
pub fn halton(index: u64, dim: usize) -> Vec<f64> {
    const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    (0..dim)
        .map(|d| {
            let base = PRIMES[d % PRIMES.len()];
            let mut f = 1.0;
            let mut r = 0.0;
            let mut i = index + 1;
            while i > 0 {
                f /= base as f64;
                r += f * (i % base) as f64;
                i /= base;
            }
            r
        })
        .collect()
}
