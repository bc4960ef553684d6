//! Real solutions of random systems of two equations in two unknowns, found
//! by Newton's method over the projective plane, and their average count.

use noisyroots::covariance::{shub_smale_q, NoiseModel};
use noisyroots::ensemble::sample_system;
use noisyroots::rootcount::{count_roots_2d, mc_expected_roots, Newton2dSettings};
use noisyroots::signal::SignalSpec;

fn main() -> noisyroots::Result<()> {
    let model = NoiseModel::uniform(shub_smale_q(2)?, 2)?;
    let zero = SignalSpec::zero(2);
    for seed in 0..3 {
        let sys = sample_system(&model, seed)?;
        let c = count_roots_2d(&sys, &zero, f64::INFINITY, &Newton2dSettings::default())?;
        println!("seed {seed}: {} roots from {} seeds", c.count, c.seeds);
        for r in &c.roots {
            let v = sys.evaluate(r)?;
            println!("  ({:>10.5}, {:>10.5})  residual {:.1e}", r[0], r[1], v[0].hypot(v[1]));
        }
    }

    let run = mc_expected_roots(&model, &zero, 1000, 1)?;
    println!(
        "mean over 1000 systems: {:.3} ± {:.3} (exact 2)",
        run.estimate.mean, run.estimate.stderr
    );

    let signal = SignalSpec::radial(2, 2, 1.0);
    let run = mc_expected_roots(&model, &signal, 1000, 1)?;
    println!(
        "with ‖t‖² − 1 added: {:.3} ± {:.3}",
        run.estimate.mean, run.estimate.stderr
    );
    Ok(())
}
