//! Acceptance gate: one PASS/FAIL line per criterion, tolerances pinned here.
//! Runs without the libtest harness so the lines always reach stdout.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use noisyroots::covariance::{shub_smale_q, NoiseModel};
use noisyroots::ensemble::{coefficient_variance, enumerate, sample_system};
use noisyroots::estimate::Moments;
use noisyroots::rice::{
    bound_chain, centered_expectation, perturbed_exact_1d, perturbed_radial_mc, radial_beta_closed_form,
    radial_beta_integral, QuadratureSettings, RadialMcSettings,
};
use noisyroots::rootcount::mc_expected_roots;
use noisyroots::signal::{snr_report, SearchSettings, SignalSpec};
use noisyroots::special::{chi_mean, gamma_bound, gamma_curvature_at_zero, gamma_shifted, McBudget};
use noisyroots::theorem2::{compute_constants, decay_condition, decay_table, head_condition, M0Inputs, SignalRoots};

const Z: f64 = 4.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn within_time(o: Outcome, start: Instant, limit: Duration) -> Outcome {
    let t = start.elapsed();
    outcome(
        o.pass && t < limit,
        format!("{}; {:.2}s (limit {}s)", o.detail, t.as_secs_f64(), limit.as_secs()),
    )
}

fn kostlan_oracle() -> Outcome {
    let start = Instant::now();
    let s = QuadratureSettings::default();
    let mut cases = Vec::new();
    for m in 1..=8 {
        for d in 1..=5 {
            cases.push(vec![d; m]);
        }
    }
    // Mixed degrees as well.
    for m in 2..=8 {
        cases.push((0..m).map(|i| 1 + i % 5).collect());
    }
    let mut worst: f64 = 0.0;
    for degs in &cases {
        let model = NoiseModel::from_components(degs.iter().map(|&d| shub_smale_q(d).unwrap()).collect()).unwrap();
        let v = centered_expectation(&model, &s).unwrap().value;
        let exact = degs.iter().map(|&d| d as f64).product::<f64>().sqrt();
        worst = worst.max(rel(v, exact));
    }
    within_time(
        outcome(
            worst < 1e-6,
            format!("{} cases, worst rel err {worst:.2e} (tol 1e-6)", cases.len()),
        ),
        start,
        Duration::from_secs(30),
    )
}

fn worked_constants() -> Outcome {
    let start = Instant::now();
    let ss = SearchSettings::default();
    let mut snr = BTreeMap::new();
    for m in [1usize, 2, 4, 8] {
        let model = NoiseModel::uniform(shub_smale_q(2).unwrap(), m).unwrap();
        snr.insert(m, snr_report(&SignalSpec::radial(m, 2, 1.0), &model, 2.0, &ss).unwrap());
    }
    let hyp = NoiseModel::uniform(shub_smale_q(2).unwrap(), 8)
        .unwrap()
        .hypotheses()
        .unwrap()
        .clone();
    let c = compute_constants(&hyp, &snr, 2.0).unwrap();
    let theta = (3.0 + 2.0 * 2f64.sqrt()) / 6.0;
    let big_c = 15.0 * 5f64.sqrt();
    let mut ok = rel(c.theta, theta) < 1e-12 && rel(c.c, big_c) < 1e-12;
    let mut worst_ell: f64 = 0.0;
    for d in [2usize, 4, 6, 8, 10] {
        let model = NoiseModel::uniform(shub_smale_q(d).unwrap(), 1).unwrap();
        let ell = snr_report(&SignalSpec::radial(1, d, 1.0), &model, 2.0, &ss)
            .unwrap()
            .ell;
        let expect = if d <= 4 {
            9.0 / 25.0
        } else {
            (2f64.powi(d as i32) - 1.0).powi(2) / 5f64.powi(d as i32)
        };
        worst_ell = worst_ell.max(rel(ell, expect));
    }
    ok &= worst_ell < 1e-12;
    within_time(
        outcome(
            ok,
            format!(
                "theta rel {:.1e}, C rel {:.1e}, ell worst rel {worst_ell:.1e} (tol 1e-12)",
                rel(c.theta, theta),
                rel(c.c, big_c)
            ),
        ),
        start,
        Duration::from_secs(1),
    )
}

fn kac_monte_carlo() -> Outcome {
    let start = Instant::now();
    let model = NoiseModel::uniform(shub_smale_q(4).unwrap(), 1).unwrap();
    let run = mc_expected_roots(&model, &SignalSpec::zero(1), 20_000, 2024).unwrap();
    let e = run.estimate;
    within_time(
        outcome(
            e.covers(2.0, Z),
            format!("mean {:.4} ± {:.4} (target 2, {Z} stderr, sturm)", e.mean, e.stderr),
        ),
        start,
        Duration::from_secs(60),
    )
}

fn planar_monte_carlo() -> Outcome {
    let start = Instant::now();
    let model = NoiseModel::uniform(shub_smale_q(2).unwrap(), 2).unwrap();
    let run = mc_expected_roots(&model, &SignalSpec::zero(2), 2000, 2024).unwrap();
    let e = run.estimate;
    within_time(
        outcome(
            e.covers(2.0, Z),
            format!(
                "mean {:.4} ± {:.4} (target 2, {Z} stderr), whole plane, newton warnings {}",
                e.mean, e.stderr, run.newton_warnings
            ),
        ),
        start,
        Duration::from_secs(600),
    )
}

fn perturbed_exactness() -> Outcome {
    let q = shub_smale_q(2).unwrap();
    let s = QuadratureSettings::default();
    let sig = SignalSpec::separable(1, &[-1.0, 0.0, 1.0]);
    let exact = perturbed_exact_1d(&sig, &q, &s).unwrap().value;
    let model = NoiseModel::uniform(q.clone(), 1).unwrap();
    let mc = mc_expected_roots(&model, &sig, 100_000, 77).unwrap().estimate;
    let small = perturbed_exact_1d(&SignalSpec::separable(1, &[-1e-4, 0.0, 1e-4]), &q, &s)
        .unwrap()
        .value;
    let gap = (small - 2f64.sqrt()).abs();
    outcome(
        mc.covers(exact, Z) && gap < 1e-3,
        format!(
            "exact {exact:.5} vs MC {:.5} ± {:.5} ({Z} stderr); lambda=1e-4 gap to sqrt2 {gap:.1e} (tol 1e-3)",
            mc.mean, mc.stderr
        ),
    )
}

fn proof_chain() -> Outcome {
    let ss = SearchSettings::default();
    let s = QuadratureSettings::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for m in [1usize, 2] {
        let model = NoiseModel::uniform(shub_smale_q(2).unwrap(), m).unwrap();
        let sig = SignalSpec::radial(m, 2, 1.0);
        let snr = snr_report(&sig, &model, 2.0, &ss).unwrap();
        let chain = bound_chain(&sig, &model, &snr, model.hypotheses().unwrap(), &s).unwrap();
        let rice = perturbed_radial_mc(
            &sig,
            &model,
            &RadialMcSettings {
                seed: 5,
                ..Default::default()
            },
        )
        .unwrap();
        let count = mc_expected_roots(&model, &sig, 2000, 5).unwrap().estimate;
        let tail = (-snr.ell * m as f64 / 2.0).exp() * chain.centered;
        ok &= rice.mean <= chain.final_bound + Z * rice.stderr;
        ok &= count.mean <= chain.final_bound + Z * count.stderr;
        ok &= chain.h2_part <= tail;
        parts.push(format!(
            "m={m}: rice {:.4}, count {:.4} <= s_m H_m {:.4}; outer {:.4} <= {:.4}",
            rice.mean, count.mean, chain.final_bound, chain.h2_part, tail
        ));
    }
    outcome(ok, parts.join("; "))
}

fn beta_integral() -> Outcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for m in 1..=50 {
        let q = radial_beta_integral(m, 0.0, f64::INFINITY).unwrap();
        let c = radial_beta_closed_form(m).unwrap();
        worst = worst.max(rel(q, c));
        ok &= q > (-2.0f64).exp() / (m as f64).sqrt();
    }
    ok &= worst < 1e-9;
    outcome(
        ok,
        format!("m=1..50 above e^-2/sqrt(m); worst rel err vs closed form {worst:.1e} (tol 1e-9)"),
    )
}

fn gamma_suite() -> Outcome {
    let budget = McBudget {
        samples: 200_000,
        seed: 31,
    };
    let mut ok = true;
    let mut worst_z: f64 = 0.0;
    for k in 2..=20 {
        let g = gamma_shifted(k, 0.0, budget).unwrap();
        let z = (g.value - chi_mean(k).unwrap()).abs() / g.stderr;
        worst_z = worst_z.max(z);
    }
    ok &= worst_z <= Z;
    let mut bound_ok = true;
    for k in [1usize, 2, 5, 10] {
        for c in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let g = gamma_shifted(k, c, budget).unwrap();
            bound_ok &= g.value <= gamma_bound(k, c).unwrap() + Z * g.stderr + 1e-14;
        }
    }
    ok &= bound_ok;
    let mut worst_curv: f64 = 0.0;
    let mut curv_ok = true;
    for k in [2usize, 3, 5, 10] {
        let est = gamma_curvature_at_zero(k, 1e-2, budget).unwrap();
        let target = chi_mean(k).unwrap() / k as f64;
        curv_ok &= (est.value - target).abs() <= 1e-3 * target + Z * est.stderr;
        worst_curv = worst_curv.max(rel(est.value, target));
    }
    ok &= curv_ok;
    outcome(
        ok,
        format!(
            "chi mean worst z {worst_z:.2} (<= {Z}); envelope holds {bound_ok}; curvature worst rel {worst_curv:.1e} (1e-3 + {Z} stderr)"
        ),
    )
}

fn coefficient_law() -> Outcome {
    let q = shub_smale_q(3).unwrap();
    let model = NoiseModel::uniform(q.clone(), 2).unwrap();
    let n = 20_000u64;
    let systems: Vec<_> = (0..n).map(|s| sample_system(&model, s).unwrap()).collect();
    let idx = enumerate(2, 3);
    let mut var_ok = 0;
    for j in &idx {
        let xs: Vec<f64> = systems.iter().map(|s| s.polys[0].coefficient(j).powi(2)).collect();
        let m = Moments::from_slice(&xs);
        let target = coefficient_variance(&q, j).unwrap();
        if (m.mean - target).abs() <= Z * m.stderr() {
            var_ok += 1;
        }
    }
    let pairs: Vec<([f64; 2], [f64; 2])> = (0..10)
        .map(|i| {
            let a = i as f64 * 0.37;
            (
                [a.cos() * 0.8, a.sin() * 0.5],
                [(a + 1.0).cos(), -(a * 0.5).sin() * 0.7],
            )
        })
        .collect();
    let mut cov_ok = 0;
    for (s, t) in &pairs {
        let xs: Vec<f64> = systems
            .iter()
            .map(|sys| sys.polys[1].evaluate(s).unwrap() * sys.polys[1].evaluate(t).unwrap())
            .collect();
        let m = Moments::from_slice(&xs);
        let target = q.eval(s[0] * t[0] + s[1] * t[1]);
        if (m.mean - target).abs() <= Z * m.stderr() {
            cov_ok += 1;
        }
    }
    outcome(
        var_ok == idx.len() && cov_ok == pairs.len(),
        format!(
            "variance within {Z} stderr on {var_ok}/{} multi-indices; covariance on {cov_ok}/{} point pairs ({n} draws)",
            idx.len(),
            pairs.len()
        ),
    )
}

fn geometric_decay() -> Outcome {
    let ss = SearchSettings::default();
    let mut snr = BTreeMap::new();
    for m in [1usize, 2, 4, 8, 16] {
        let model = NoiseModel::uniform(shub_smale_q(2).unwrap(), m).unwrap();
        snr.insert(m, snr_report(&SignalSpec::radial(m, 2, 1.0), &model, 2.0, &ss).unwrap());
    }
    let hyp = NoiseModel::uniform(shub_smale_q(2).unwrap(), 16)
        .unwrap()
        .hypotheses()
        .unwrap()
        .clone();
    let c = compute_constants(&hyp, &snr, 2.0).unwrap();
    let m_list: Vec<usize> = (1..=40).chain([100, 250, 500, 1000]).collect();
    let table = decay_table(
        &c,
        |m| NoiseModel::uniform(shub_smale_q(2).unwrap(), m),
        &m_list,
        SignalRoots::Infinite,
        &QuadratureSettings::default(),
    )
    .unwrap();
    let mut worst_ratio: f64 = 0.0;
    for w in table.rows.windows(2).filter(|w| w[1].m == w[0].m + 1) {
        worst_ratio = worst_ratio.max(rel((w[1].ln_ratio - w[0].ln_ratio).exp(), c.theta));
    }
    let finite = table
        .rows
        .iter()
        .all(|r| r.ln_bound.is_finite() && r.ln_centered.is_finite());
    let inp = M0Inputs {
        q_lower: hyp.q_lower,
        h_lower: hyp.h_lower,
        theta1: c.theta1,
        theta: c.theta,
        tau: c.tau,
        r0: c.r0,
    };
    // A_m, B_m for the uniform family are exact at every m.
    let agg = |m: usize| {
        let model = NoiseModel::uniform(shub_smale_q(2).unwrap(), m).unwrap();
        let r = snr_report(&SignalSpec::radial(m, 2, 1.0), &model, 2.0, &ss).unwrap();
        (r.a_m, r.b_m)
    };
    let both = |m: u64| {
        let (a, b) = agg(m as usize);
        decay_condition(&inp, m, a, b) && head_condition(&inp, m, std::f64::consts::PI)
    };
    let minimal = both(c.m0) && !both(c.m0 - 1);
    let ok = worst_ratio < 1e-12 && finite && minimal;
    outcome(
        ok,
        format!(
            "ratio(m+1)/ratio(m) vs theta worst rel {worst_ratio:.1e} (tol 1e-12); m0 = {} minimal {minimal}; finite to m = 1000 {finite}",
            c.m0
        ),
    )
}

fn determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_noisyroots");
    let dir = std::env::temp_dir().join(format!("noisyroots-acc-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.json");
    std::fs::write(
        &cfg,
        r#"{"noise": {"family": "shub_smale", "degree": 2}, "signal": {"kind": "radial", "r": 1.0},
            "m": [1, 2], "replicates": 300, "det_samples": 2000}"#,
    )
    .unwrap();
    let mut all = true;
    let mut checked = Vec::new();
    for (cmd, fmt) in [("mc", "json"), ("mc", "csv"), ("expect", "json"), ("bound", "csv")] {
        let outs: Vec<Vec<u8>> = ["1", "4"]
            .iter()
            .map(|t| {
                Command::new(exe)
                    .args([
                        cmd,
                        "--config",
                        cfg.to_str().unwrap(),
                        "--seed",
                        "99",
                        "--format",
                        fmt,
                        "--threads",
                        t,
                    ])
                    .output()
                    .unwrap()
                    .stdout
            })
            .collect();
        let same = outs[0] == outs[1] && !outs[0].is_empty();
        all &= same;
        checked.push(format!("{cmd}/{fmt}:{same}"));
    }
    let _ = std::fs::remove_dir_all(&dir);
    outcome(
        all,
        format!("byte-identical across --threads 1 and 4: {}", checked.join(" ")),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        (
            "1 centered expectation equals sqrt(prod d) for m<=8, d<=5",
            kostlan_oracle,
        ),
        ("2 worked constants theta, C and ell", worked_constants),
        ("3 one-variable Monte Carlo mean for d=4", kac_monte_carlo),
        ("4 two-variable Monte Carlo mean for d=(2,2)", planar_monte_carlo),
        ("5 exact perturbed expectation in one variable", perturbed_exactness),
        ("6 upper-bound chain dominates Monte Carlo", proof_chain),
        ("7 radial beta integral lower bound and closed form", beta_integral),
        ("8 shifted chi-mean suite", gamma_suite),
        ("9 coefficient variances and covariance", coefficient_law),
        ("10 geometric decay table and m0 minimality", geometric_decay),
        ("11 CLI output independent of thread count", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {} failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
