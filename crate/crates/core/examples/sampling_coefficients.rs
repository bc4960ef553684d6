//! Draw random polynomial systems and compare empirical coefficient
//! variances with the ones the covariance function prescribes.

use noisyroots::covariance::{real_roots_q, NoiseModel};
use noisyroots::ensemble::{coefficient_variance, enumerate, sample_system};
use noisyroots::estimate::Moments;

fn main() -> noisyroots::Result<()> {
    let q = real_roots_q(&[1.0, 3.0])?;
    let model = NoiseModel::uniform(q.clone(), 2)?;
    let draws = 20_000;
    let systems = (0..draws)
        .map(|s| sample_system(&model, s))
        .collect::<noisyroots::Result<Vec<_>>>()?;

    println!("{:>8} {:>10} {:>10} {:>8}", "index", "variance", "sample", "z");
    for j in enumerate(2, q.degree()) {
        let expected = coefficient_variance(&q, &j)?;
        let mut sq = Moments::default();
        for s in &systems {
            sq.push(s.polys[0].coefficient(&j).powi(2));
        }
        let z = (sq.mean - expected) / sq.stderr();
        println!(
            "{:>8} {expected:>10.4} {:>10.4} {z:>8.2}",
            format!("{:?}", j.entries()),
            sq.mean
        );
    }

    // Values at two points are correlated through q(⟨s, t⟩).
    let (s, t) = ([0.3, -0.5], [1.0, 0.2]);
    let mut prod = Moments::default();
    for sys in &systems {
        prod.push(sys.polys[0].evaluate(&s)? * sys.polys[0].evaluate(&t)?);
    }
    let dot = s[0] * t[0] + s[1] * t[1];
    println!(
        "E f(s) f(t) = {:.4} ± {:.4}, q(⟨s,t⟩) = {:.4}",
        prod.mean,
        prod.stderr(),
        q.eval(dot)
    );
    Ok(())
}
