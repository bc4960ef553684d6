//! The shifted chi mean `γ_k(c) = E‖ξ + c‖` and the quantities built on it.

use noisyroots::special::{
    chi_mean, gamma_bound, gamma_curvature_at_zero, gamma_shifted, l_m, l_m_closed_form, McBudget,
};

fn main() -> noisyroots::Result<()> {
    let budget = McBudget {
        samples: 200_000,
        seed: 3,
    };
    println!(
        "{:>3} {:>6} {:>10} {:>10} {:>10}",
        "k", "c", "gamma", "stderr", "envelope"
    );
    for k in [1, 2, 5, 20] {
        for c in [0.0, 0.5, 2.0] {
            let g = gamma_shifted(k, c, budget)?;
            println!(
                "{k:>3} {c:>6.1} {:>10.5} {:>10.1e} {:>10.5}",
                g.value,
                g.stderr,
                gamma_bound(k, c)?
            );
        }
    }
    for k in [1, 3, 10] {
        let curv = gamma_curvature_at_zero(k, 1e-2, budget)?;
        println!(
            "k = {k}: curvature {:.4} ± {:.4}, chi mean {:.6}",
            curv.value,
            curv.stderr,
            chi_mean(k)?
        );
    }
    for m in [1, 10, 100] {
        println!(
            "ln L_{m}: {:.10} (closed form {:.10})",
            l_m(m)?.log_magnitude,
            l_m_closed_form(m)?.log_magnitude
        );
    }
    Ok(())
}
