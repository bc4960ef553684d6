//! Expected number of real roots of a centered random system, for the
//! Kostlan ensemble (where the answer is `√(d_1⋯d_m)`) and for other
//! covariance families.

use noisyroots::covariance::{power_family_q, real_roots_q, shub_smale_q, NoiseModel};
use noisyroots::rice::{centered_expectation, kostlan_closed_form, QuadratureSettings};

fn main() -> noisyroots::Result<()> {
    let settings = QuadratureSettings::default();

    println!("Kostlan systems");
    for degrees in [vec![4], vec![2, 2, 2], vec![2, 3], vec![3, 3, 3, 3, 3]] {
        let qs = degrees
            .iter()
            .map(|&d| shub_smale_q(d))
            .collect::<noisyroots::Result<Vec<_>>>()?;
        let model = NoiseModel::from_components(qs)?;
        let e = centered_expectation(&model, &settings)?;
        println!(
            "  degrees {:?}: {:.12} (closed form {:.12}, E_h {:?})",
            degrees,
            e.value,
            kostlan_closed_form(&degrees),
            e.e_h
        );
    }

    // q(u) = (1 + u)(1 + 2u) has real roots; the answer is no longer a
    // square root of a degree product.
    let q = real_roots_q(&[1.0, 2.0])?;
    for m in [1, 2, 5] {
        let e = centered_expectation(&NoiseModel::uniform(q.clone(), m)?, &settings)?;
        println!("real-roots q, m = {m}: {:.8} ± {:.1e}", e.value, e.abs_err);
    }

    let q = power_family_q(&[1.0, 1.0, 0.5], 2)?;
    let e = centered_expectation(&NoiseModel::uniform(q, 3)?, &settings)?;
    println!("power family (1 + u + u²/2)², m = 3: {:.8}", e.value);

    // Large m stays finite because the integrand lives in the log domain.
    let e = centered_expectation(&NoiseModel::uniform(shub_smale_q(2)?, 400)?, &settings)?;
    println!(
        "d = 2, m = 400: ln E = {:.6} (expect {:.6})",
        e.ln_value,
        200.0 * 2f64.ln()
    );
    Ok(())
}
