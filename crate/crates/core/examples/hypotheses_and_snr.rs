//! Check the covariance hypotheses of several noise families and report
//! signal-over-noise functionals for radial and separable signals.

use noisyroots::covariance::{real_roots_q, shub_smale_q, CovarianceQ, NoiseModel};
use noisyroots::signal::{snr_report, snr_sweep, SearchSettings, SignalSpec};

fn main() -> noisyroots::Result<()> {
    let families: Vec<(&str, CovarianceQ)> = vec![
        ("shub-smale d=3", shub_smale_q(3)?),
        ("real roots (1, 2)", real_roots_q(&[1.0, 2.0])?),
        ("custom 1 + u + u³", CovarianceQ::new(vec![1.0, 1.0, 0.0, 1.0])?),
    ];
    for (name, q) in &families {
        let model = NoiseModel::uniform(q.clone(), 2)?;
        let h = model.hypotheses()?;
        println!(
            "{name}: D {:?} E {:?} q_lower {:.4} h in [{:.4}, {:.4}] h1 {} h2 {}",
            h.d, h.e, h.q_lower, h.h_lower, h.h_upper, h.h1_holds, h.h2_holds
        );
        for f in &h.failures {
            println!("  failure: {f}");
        }
    }

    let search = SearchSettings::default();
    let model = NoiseModel::uniform(shub_smale_q(2)?, 3)?;
    for signal in [
        SignalSpec::radial(3, 2, 1.0),
        SignalSpec::separable(3, &[-1.0, 0.0, 1.0]),
    ] {
        let r = snr_report(&signal, &model, 2.0, &search)?;
        println!(
            "H {:?}\n  K {:?}\n  A_m {:.4} B_m {:.4} ell {:.4} ({:?}/{:?})",
            r.h, r.k, r.a_m, r.b_m, r.ell, r.hk_kind, r.l_kind
        );
    }

    let sweep = snr_sweep(&[1, 2, 4, 8, 16], 2.0, &search, |m| {
        Ok((
            SignalSpec::separable(m, &[-1.0, 0.0, 1.0]),
            NoiseModel::uniform(shub_smale_q(2)?, m)?,
        ))
    })?;
    for r in &sweep.reports {
        println!("m = {:>2}: A_m {:.4} B_m {:.4}", r.m, r.a_m, r.b_m);
    }
    println!("log-log slopes: A {:?} B {:?}", sweep.a_slope, sweep.b_slope);
    Ok(())
}
