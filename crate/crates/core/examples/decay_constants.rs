//! Constants of the geometric decay bound for `P_i = ‖t‖² − 1` under
//! degree-2 Kostlan noise, followed by the decay table as CSV on stdout.

use std::collections::BTreeMap;

use noisyroots::covariance::{shub_smale_q, NoiseModel};
use noisyroots::rice::QuadratureSettings;
use noisyroots::signal::{snr_report, SearchSettings, SignalSpec};
use noisyroots::theorem2::{bound_value, compute_constants, decay_table, SignalRoots};

fn main() -> noisyroots::Result<()> {
    let r0 = 2.0;
    let search = SearchSettings::default();
    let mut reports = BTreeMap::new();
    for m in [1, 2, 4, 8, 16] {
        let model = NoiseModel::uniform(shub_smale_q(2)?, m)?;
        reports.insert(m, snr_report(&SignalSpec::radial(m, 2, 1.0), &model, r0, &search)?);
    }
    let hyp = NoiseModel::uniform(shub_smale_q(2)?, 1)?.hypotheses()?.clone();
    let k = compute_constants(&hyp, &reports, r0)?;
    eprintln!(
        "theta = {} = {:.6}, C = {} = {:.4}, ell = {}, tau = {}, m0 = {} (alternative {:?})",
        k.theta_symbolic.as_deref().unwrap_or("?"),
        k.theta,
        k.c_symbolic.as_deref().unwrap_or("?"),
        k.c,
        k.ell,
        k.tau,
        k.m0,
        k.m0_alternative
    );
    let b = bound_value(&k, 1000, 1000f64.sqrt());
    eprintln!(
        "bound at m = 1000 for a centered count of √1000: {:.3e} (valid {})",
        b.value, b.valid
    );

    let m_list: Vec<usize> = vec![1, 2, 5, 10, 50, 100, 613, 1000];
    let table = decay_table(
        &k,
        |m| NoiseModel::uniform(shub_smale_q(2)?, m),
        &m_list,
        SignalRoots::Infinite,
        &QuadratureSettings::default(),
    )?;
    table.write_csv(std::io::stdout())?;
    Ok(())
}
