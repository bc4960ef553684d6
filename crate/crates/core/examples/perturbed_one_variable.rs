//! One polynomial in one variable with a deterministic part: the exact
//! expected root count next to an empirical Sturm count.

use noisyroots::covariance::{shub_smale_q, NoiseModel};
use noisyroots::rice::{centered_expectation, perturbed_exact_1d, QuadratureSettings};
use noisyroots::rootcount::mc_expected_roots;
use noisyroots::signal::SignalSpec;

fn main() -> noisyroots::Result<()> {
    let q = shub_smale_q(2)?;
    let model = NoiseModel::uniform(q.clone(), 1)?;
    let settings = QuadratureSettings::default();
    println!("no signal: {:.6}", centered_expectation(&model, &settings)?.value);

    println!("{:>8} {:>10} {:>18}", "scale", "exact", "count (4000 draws)");
    for scale in [0.0, 0.5, 1.0, 2.0, 4.0] {
        // P(t) = scale·(t² − 1) has two roots at ±1.
        let signal = SignalSpec::separable(1, &[-scale, 0.0, scale]);
        let exact = perturbed_exact_1d(&signal, &q, &settings)?;
        let mc = mc_expected_roots(&model, &signal, 4000, 17)?;
        println!(
            "{scale:>8.1} {:>10.5} {:>11.4} ± {:.4}",
            exact.value, mc.estimate.mean, mc.estimate.stderr
        );
    }
    Ok(())
}
