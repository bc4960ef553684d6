//! Command-line front end. The binary is a thin wrapper around [`main_with_args`].

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::covariance::{
    power_family_q, real_roots_q, shub_smale_q, CovarianceQ, HypothesisReport, NoiseModel, QFamily,
};
use crate::error::{Error, Result};
use crate::estimate::McEstimate;
use crate::rice::{
    bound_chain, centered_expectation, kostlan_closed_form, perturbed_exact_1d, perturbed_radial_mc, BoundChain,
    QuadratureSettings, RadialMcSettings,
};
use crate::rootcount::{count_roots_1d, mc_expected_roots_with, McOptions};
use crate::signal::{snr_report, SearchSettings, SignalComponent, SignalSpec, SnrReport};
use crate::theorem2::{compute_constants, decay_table, BoundConstants, SignalRoots};

pub const SCHEMA_VERSION: u32 = 1;

pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 2;
    pub const HYPOTHESIS: i32 = 3;
    pub const NUMERICAL: i32 = 4;
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Hypothesis(_) | Error::Infeasible(_) => exit::HYPOTHESIS,
        Error::NonConvergence { .. } => exit::NUMERICAL,
        _ => exit::VALIDATION,
    }
}

/// Noise covariance, shared by every equation unless `mixed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    ShubSmale {
        degree: usize,
    },
    RealRoots {
        alphas: Vec<f64>,
    },
    Power {
        base: Vec<f64>,
        exponent: usize,
    },
    Custom {
        coeffs: Vec<f64>,
    },
    /// One entry per equation; fixes `m`.
    Mixed {
        components: Vec<NoiseSpec>,
    },
}

impl NoiseSpec {
    fn q(&self) -> Result<CovarianceQ> {
        match self {
            NoiseSpec::ShubSmale { degree } => shub_smale_q(*degree),
            NoiseSpec::RealRoots { alphas } => real_roots_q(alphas),
            NoiseSpec::Power { base, exponent } => power_family_q(base, *exponent),
            NoiseSpec::Custom { coeffs } => CovarianceQ::new(coeffs.clone()),
            NoiseSpec::Mixed { .. } => Err(Error::validation("noise: mixed components cannot be nested")),
        }
    }

    pub fn model(&self, m: usize) -> Result<NoiseModel> {
        let prefix = |e: Error| match e {
            Error::Validation(s) => Error::Validation(format!("noise: {s}")),
            Error::Domain(s) => Error::Validation(format!("noise: {s}")),
            other => other,
        };
        match self {
            NoiseSpec::Mixed { components } => {
                if components.len() != m {
                    return Err(Error::validation(format!(
                        "noise.components: {} entries but m = {m}",
                        components.len()
                    )));
                }
                let qs = components
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        c.q().map_err(|e| match e {
                            Error::Validation(s) | Error::Domain(s) => {
                                Error::Validation(format!("noise.components[{i}]: {s}"))
                            }
                            other => other,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                NoiseModel::from_components(qs).map_err(prefix)
            }
            _ => NoiseModel::uniform(self.q().map_err(prefix)?, m).map_err(prefix),
        }
    }

    fn fixed_m(&self) -> Option<usize> {
        match self {
            NoiseSpec::Mixed { components } => Some(components.len()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalConfig {
    Zero,
    /// `‖t‖^{d_i} − r^{d_i}` with `d_i` the noise degree of equation `i`.
    Radial {
        r: f64,
    },
    /// `T(t_i)` in every equation.
    Separable {
        coeffs: Vec<f64>,
    },
    /// Explicit per-equation components; fixes `m`.
    Explicit {
        components: Vec<SignalComponent>,
    },
}

impl SignalConfig {
    pub fn build(&self, model: &NoiseModel) -> Result<SignalSpec> {
        let m = model.m();
        let spec = match self {
            SignalConfig::Zero => SignalSpec::zero(m),
            SignalConfig::Radial { r } => SignalSpec {
                components: model
                    .degrees()
                    .into_iter()
                    .map(|d| SignalComponent::Radial { d, r: *r })
                    .collect(),
            },
            SignalConfig::Separable { coeffs } => SignalSpec::separable(m, coeffs),
            SignalConfig::Explicit { components } => {
                if components.len() != m {
                    return Err(Error::validation(format!(
                        "signal.components: {} entries but m = {m}",
                        components.len()
                    )));
                }
                SignalSpec {
                    components: components.clone(),
                }
            }
        };
        spec.validate(model).map_err(|e| match e {
            Error::Validation(s) | Error::Domain(s) => Error::Validation(format!("signal: {s}")),
            other => other,
        })?;
        Ok(spec)
    }

    fn fixed_m(&self) -> Option<usize> {
        match self {
            SignalConfig::Explicit { components } => Some(components.len()),
            _ => None,
        }
    }

    /// What `P = 0` looks like, for decay-table annotation.
    fn roots(&self) -> SignalRoots {
        match self {
            SignalConfig::Radial { r } if *r > 0.0 => SignalRoots::Infinite,
            SignalConfig::Separable { coeffs } => {
                let c = crate::poly::trim(coeffs, 0.0);
                match count_roots_1d(c) {
                    Ok(n) if c.len() > 1 && n == c.len() - 1 => SignalRoots::PowerOfDegree(n),
                    _ => SignalRoots::Unknown,
                }
            }
            _ => SignalRoots::Unknown,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Sample systems and count roots (m = 1, 2).
    Count,
    /// Monte Carlo Kac–Rice integration (radial signals, any m).
    RadialRice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Format,
    pub path: Option<PathBuf>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            format: Format::Json,
            path: None,
        }
    }
}

/// Everything a run needs. Every random stream derives from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub noise: NoiseSpec,
    pub signal: SignalConfig,
    pub m: Vec<usize>,
    pub r0: f64,
    pub seed: u64,
    pub replicates: u64,
    pub estimator: Estimator,
    pub det_samples: u64,
    pub radial_panels: usize,
    pub quadrature: QuadratureSettings,
    pub search: SearchSettings,
    pub mc: McOptions,
    /// Dimensions for the decay table; defaults to `m`.
    pub decay_m: Option<Vec<usize>>,
    /// Per-replicate counts; `{m}` in the path is replaced by the dimension.
    pub replicates_csv: Option<PathBuf>,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            noise: NoiseSpec::ShubSmale { degree: 2 },
            signal: SignalConfig::Zero,
            m: vec![1, 2, 3],
            r0: 2.0,
            seed: 0,
            replicates: 2000,
            estimator: Estimator::Count,
            det_samples: 10_000,
            radial_panels: 64,
            quadrature: QuadratureSettings::default(),
            search: SearchSettings::default(),
            mc: McOptions::default(),
            decay_m: None,
            replicates_csv: None,
            output: OutputConfig::default(),
        }
    }
}

fn check_ascending(name: &str, list: &[usize]) -> Result<()> {
    if list.is_empty() {
        return Err(Error::validation(format!("{name}: list is empty")));
    }
    for (i, w) in list.windows(2).enumerate() {
        if w[0] >= w[1] {
            return Err(Error::validation(format!(
                "{name}[{}]: list must be strictly ascending",
                i + 1
            )));
        }
    }
    if list[0] == 0 {
        return Err(Error::validation(format!("{name}[0]: dimensions start at 1")));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Validation(format!("{}: {}", e.path(), e.inner())))
    }

    pub fn validate(&self) -> Result<()> {
        check_ascending("m", &self.m)?;
        if let Some(d) = &self.decay_m {
            check_ascending("decay_m", d)?;
        }
        for fixed in [self.noise.fixed_m(), self.signal.fixed_m()].into_iter().flatten() {
            if self.m != [fixed] {
                return Err(Error::validation(format!(
                    "m: must be [{fixed}] for the given per-equation lists"
                )));
            }
        }
        if !(self.r0 > 0.0 && self.r0.is_finite()) {
            return Err(Error::validation("r0: must be positive and finite"));
        }
        if self.det_samples < 2 {
            return Err(Error::validation("det_samples: need at least 2"));
        }
        if self.radial_panels == 0 {
            return Err(Error::validation("radial_panels: need at least 1"));
        }
        self.quadrature
            .validate()
            .map_err(|e| Error::validation(format!("quadrature: {e}")))?;
        if let Some(p) = &self.replicates_csv {
            if self.m.len() > 1 && !p.to_string_lossy().contains("{m}") {
                return Err(Error::validation(
                    "replicates_csv: needs a {m} placeholder when several dimensions are given",
                ));
            }
        }
        Ok(())
    }

    fn quad(&self) -> QuadratureSettings {
        QuadratureSettings {
            seed: self.seed,
            ..self.quadrature
        }
    }

    fn model(&self, m: usize) -> Result<NoiseModel> {
        self.noise.model(m)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "noisyroots",
    version,
    about = "Expected number of real roots of random polynomial systems"
)]
pub struct Cli {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Comma-separated dimensions, overriding the config.
    #[arg(long, global = true, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    pub emit_config: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Expected root count of the centered system for each m.
    Expect,
    /// Hypotheses, signal-over-noise, constants and the decay table.
    Bound,
    /// Monte Carlo estimate with analytic comparisons.
    Mc,
    /// Exact expected root count for one perturbed equation.
    Exact1d,
    /// The decay constants only.
    Constants,
    /// Covariance bounds and signal-over-noise reports.
    Hyp,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Expect => "expect",
            Command::Bound => "bound",
            Command::Mc => "mc",
            Command::Exact1d => "exact1d",
            Command::Constants => "constants",
            Command::Hyp => "hyp",
        }
    }
}

/// A finished command: the JSON body, the primary CSV table and the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub body: serde_json::Map<String, Value>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub exit: i32,
}

impl Report {
    fn new(header: &[&str]) -> Report {
        Report {
            body: serde_json::Map::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            exit: exit::OK,
        }
    }

    fn insert(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.body.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn render(&self, command: Command, config: &RunConfig, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Json => {
                let mut obj = serde_json::Map::new();
                obj.insert("schema_version".into(), json!(SCHEMA_VERSION));
                obj.insert("command".into(), json!(command.name()));
                obj.insert("config".into(), serde_json::to_value(config)?);
                for (k, v) in &self.body {
                    obj.insert(k.clone(), v.clone());
                }
                let mut out = serde_json::to_vec_pretty(&Value::Object(obj))?;
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.header)?;
                for r in &self.rows {
                    w.write_record(r)?;
                }
                w.into_inner().map_err(|e| Error::Io(e.into_error()))
            }
        }
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn all_shub_smale(model: &NoiseModel) -> bool {
    model
        .components()
        .all(|q| matches!(q.family(), QFamily::ShubSmale { .. }))
}

fn cmd_expect(cfg: &RunConfig) -> Result<Report> {
    let mut rep = Report::new(&[
        "m",
        "expected_roots_centered",
        "ln_expected_roots_centered",
        "quadrature_abs_err",
        "mc_stderr",
        "e_h_method",
        "closed_form_sqrt_prod_degrees",
        "tail_radius",
    ]);
    let mut rows = Vec::new();
    for &m in &cfg.m {
        let model = cfg.model(m)?;
        let e = centered_expectation(&model, &cfg.quad())?;
        let closed = all_shub_smale(&model).then(|| kostlan_closed_form(&model.degrees()));
        rep.rows.push(vec![
            m.to_string(),
            num(e.value),
            num(e.ln_value),
            num(e.abs_err),
            num(e.stderr),
            serde_json::to_value(e.e_h)?.as_str().unwrap_or_default().to_string(),
            opt(closed),
            num(e.radius),
        ]);
        rows.push(json!({ "m": m, "centered": e, "closed_form_sqrt_prod_degrees": closed }));
    }
    rep.insert("rows", rows)?;
    Ok(rep)
}

/// Hypothesis failures, by name.
fn failures(hyp: &HypothesisReport, snr: &[&SnrReport]) -> Vec<String> {
    let mut out = Vec::new();
    if !hyp.h1_holds {
        out.push("H1: the h functions differ between equations".to_string());
    }
    if !hyp.h2_holds {
        out.push(format!("H2: {}", hyp.failures.join("; ")));
    }
    for s in snr {
        if !s.h3_holds {
            out.push(format!("H3: non-finite signal-over-noise aggregates at m = {}", s.m));
        }
        if !s.h4_holds {
            out.push(format!("H4: ell = {} at r0 = {} for m = {}", s.ell, s.r0, s.m));
        }
    }
    out
}

struct Analysis {
    hyp: HypothesisReport,
    snr: BTreeMap<usize, SnrReport>,
}

fn analyse(cfg: &RunConfig) -> Result<Analysis> {
    let top = *cfg.m.last().expect("validated");
    let hyp = cfg.model(top)?.hypotheses()?.clone();
    let mut snr = BTreeMap::new();
    for &m in &cfg.m {
        let model = cfg.model(m)?;
        let signal = cfg.signal.build(&model)?;
        snr.insert(m, snr_report(&signal, &model, cfg.r0, &cfg.search)?);
    }
    Ok(Analysis { hyp, snr })
}

fn hyp_rows(rep: &mut Report, hyp: &HypothesisReport) {
    for i in 0..hyp.d.len() {
        rep.rows.push(vec![
            i.to_string(),
            num(hyp.d[i]),
            num(hyp.e[i]),
            opt(hyp.reference_d[i]),
            opt(hyp.reference_e[i]),
            hyp.d_certified[i].to_string(),
            num(hyp.q_lower),
            num(hyp.h_lower),
            num(hyp.h_upper),
            hyp.h1_holds.to_string(),
            hyp.h2_holds.to_string(),
        ]);
    }
}

const HYP_HEADER: [&str; 11] = [
    "equation",
    "D",
    "E",
    "reference_D",
    "reference_E",
    "D_certified",
    "q_lower",
    "h_lower",
    "h_upper",
    "h1_holds",
    "h2_holds",
];

fn cmd_hyp(cfg: &RunConfig) -> Result<Report> {
    let a = analyse(cfg)?;
    let mut rep = Report::new(&HYP_HEADER);
    hyp_rows(&mut rep, &a.hyp);
    rep.insert("hypotheses", &a.hyp)?;
    rep.insert("signal_over_noise", a.snr.values().collect::<Vec<_>>())?;
    rep.insert("failures", failures(&a.hyp, &a.snr.values().collect::<Vec<_>>()))?;
    Ok(rep)
}

fn constants_rows(rep: &mut Report, c: &BoundConstants) {
    let mut push = |k: &str, v: String| rep.rows.push(vec![k.to_string(), v]);
    push("r0", num(c.r0));
    push("ell", num(c.ell));
    push("theta1", num(c.theta1));
    push("theta", num(c.theta));
    push("theta_symbolic", c.theta_symbolic.clone().unwrap_or_default());
    push("F_bar", num(c.f_bar));
    push("tau", num(c.tau));
    push("m0", c.m0.to_string());
    push("m0_half_pi", c.m0_half_pi.to_string());
    push(
        "m0_alternative",
        c.m0_alternative.map(|v| v.to_string()).unwrap_or_default(),
    );
    push("C", num(c.c));
    push("C_symbolic", c.c_symbolic.clone().unwrap_or_default());
    push("C_sqrt_ratio", num(c.c_sqrt_ratio));
}

/// Hypothesis gate shared by `constants` and `bound`. Returns `None` after
/// filling the report when a hypothesis fails.
fn gated(cfg: &RunConfig, rep: &mut Report) -> Result<Option<(Analysis, BoundConstants)>> {
    let a = analyse(cfg)?;
    rep.insert("hypotheses", &a.hyp)?;
    rep.insert("signal_over_noise", a.snr.values().collect::<Vec<_>>())?;
    let fails = failures(&a.hyp, &a.snr.values().collect::<Vec<_>>());
    if !fails.is_empty() {
        rep.insert("status", "hypothesis_failure")?;
        rep.insert("failures", &fails)?;
        rep.header = vec!["failure".into()];
        rep.rows = fails.into_iter().map(|f| vec![f]).collect();
        rep.exit = exit::HYPOTHESIS;
        return Ok(None);
    }
    let c = compute_constants(&a.hyp, &a.snr, cfg.r0)?;
    rep.insert("status", "ok")?;
    rep.insert("constants", &c)?;
    Ok(Some((a, c)))
}

fn cmd_constants(cfg: &RunConfig) -> Result<Report> {
    let mut rep = Report::new(&["name", "value"]);
    if let Some((_, c)) = gated(cfg, &mut rep)? {
        constants_rows(&mut rep, &c);
    }
    Ok(rep)
}

fn cmd_bound(cfg: &RunConfig) -> Result<Report> {
    let mut rep = Report::new(&crate::theorem2::DecayTable::CSV_HEADER);
    let Some((a, c)) = gated(cfg, &mut rep)? else {
        return Ok(rep);
    };
    let decay_m = cfg.decay_m.clone().unwrap_or_else(|| cfg.m.clone());
    let table = decay_table(&c, |m| cfg.model(m), &decay_m, cfg.signal.roots(), &cfg.quad())?;
    let mut chains: Vec<BoundChain> = Vec::new();
    for &m in &cfg.m {
        let model = cfg.model(m)?;
        let signal = cfg.signal.build(&model)?;
        chains.push(bound_chain(&signal, &model, &a.snr[&m], &a.hyp, &cfg.quad())?);
    }
    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    for r in reader.records() {
        rep.rows.push(r?.iter().map(str::to_string).collect());
    }
    rep.insert("decay_table", &table)?;
    rep.insert("bound_chain", &chains)?;
    Ok(rep)
}

fn replicate_path(template: &Path, m: usize) -> PathBuf {
    PathBuf::from(template.to_string_lossy().replace("{m}", &m.to_string()))
}

fn cmd_mc(cfg: &RunConfig) -> Result<Report> {
    let mut rep = Report::new(&[
        "m",
        "estimator",
        "method",
        "mean",
        "stderr",
        "n_replicates",
        "seed",
        "ci95_low",
        "ci95_high",
        "closed_form_sqrt_prod_degrees",
        "exact_rice_1d",
        "radial_rice_mc",
        "radial_rice_mc_stderr",
        "bound_chain_final",
        "newton_warnings",
        "box_r",
    ]);
    let mut rows = Vec::new();
    for &m in &cfg.m {
        let model = cfg.model(m)?;
        let signal = cfg.signal.build(&model)?;
        let radial_ok = signal.all_radial();
        let rice_mc = |seed| -> Result<McEstimate> {
            perturbed_radial_mc(
                &signal,
                &model,
                &RadialMcSettings {
                    panels: cfg.radial_panels,
                    det_samples: cfg.det_samples,
                    seed,
                },
            )
        };
        let (estimate, newton_warnings, box_r) = match cfg.estimator {
            Estimator::Count => {
                let run = mc_expected_roots_with(&model, &signal, cfg.replicates, cfg.seed, &cfg.mc)?;
                if let Some(t) = &cfg.replicates_csv {
                    let f = std::fs::File::create(replicate_path(t, m))?;
                    run.write_replicates_csv(std::io::BufWriter::new(f))?;
                }
                (run.estimate, Some(run.newton_warnings), run.box_r)
            }
            Estimator::RadialRice => (rice_mc(cfg.seed)?, None, None),
        };
        let closed = (signal.is_zero() && all_shub_smale(&model)).then(|| kostlan_closed_form(&model.degrees()));
        let exact = if m == 1 {
            Some(perturbed_exact_1d(&signal, model.component(0), &cfg.quad())?.value)
        } else {
            None
        };
        let rice = if radial_ok && cfg.estimator == Estimator::Count {
            Some(rice_mc(cfg.seed)?)
        } else {
            None
        };
        let chain = if radial_ok && !signal.is_zero() {
            let snr = snr_report(&signal, &model, cfg.r0, &cfg.search)?;
            match bound_chain(&signal, &model, &snr, model.hypotheses()?, &cfg.quad()) {
                Ok(c) => Some(c.final_bound),
                Err(Error::Hypothesis(_)) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        let (lo, hi) = estimate.interval(1.96);
        rep.rows.push(vec![
            m.to_string(),
            serde_json::to_value(cfg.estimator)?
                .as_str()
                .unwrap_or_default()
                .to_string(),
            serde_json::to_value(estimate.method)?
                .as_str()
                .unwrap_or_default()
                .to_string(),
            num(estimate.mean),
            num(estimate.stderr),
            estimate.n_replicates.to_string(),
            estimate.seed.to_string(),
            num(lo),
            num(hi),
            opt(closed),
            opt(exact),
            opt(rice.as_ref().map(|r| r.mean)),
            opt(rice.as_ref().map(|r| r.stderr)),
            opt(chain),
            newton_warnings.map(|w| w.to_string()).unwrap_or_default(),
            opt(box_r),
        ]);
        rows.push(json!({
            "m": m,
            "estimate": estimate,
            "closed_form_sqrt_prod_degrees": closed,
            "exact_rice_1d": exact,
            "radial_rice_mc": rice,
            "bound_chain_final": chain,
            "newton_warnings": newton_warnings,
            "box_r": box_r,
        }));
    }
    rep.insert("rows", rows)?;
    Ok(rep)
}

fn cmd_exact1d(cfg: &RunConfig) -> Result<Report> {
    if cfg.m != [1] {
        return Err(Error::validation("m: exact1d needs m = [1]"));
    }
    let model = cfg.model(1)?;
    let signal = cfg.signal.build(&model)?;
    let e = perturbed_exact_1d(&signal, model.component(0), &cfg.quad())?;
    let centered = centered_expectation(&model, &cfg.quad())?;
    let mut rep = Report::new(&[
        "m",
        "expected_roots",
        "quadrature_abs_err",
        "expected_roots_centered",
        "tail_radius",
    ]);
    rep.rows.push(vec![
        "1".into(),
        num(e.value),
        num(e.abs_err),
        num(centered.value),
        num(e.radius),
    ]);
    rep.insert("exact", &e)?;
    rep.insert("centered", &centered)?;
    Ok(rep)
}

pub fn run_command(command: Command, cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    match command {
        Command::Expect => cmd_expect(cfg),
        Command::Bound => cmd_bound(cfg),
        Command::Mc => cmd_mc(cfg),
        Command::Exact1d => cmd_exact1d(cfg),
        Command::Constants => cmd_constants(cfg),
        Command::Hyp => cmd_hyp(cfg),
    }
}

/// Merge the config file and flag overrides.
pub fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| Error::validation(format!("config: {}: {e}", p.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(f) = cli.format {
        cfg.output.format = f;
    }
    if let Some(o) = &cli.out {
        cfg.output.path = Some(o.clone());
    }
    if let Some(m) = &cli.m {
        cfg.m = m.clone();
    }
    Ok(cfg)
}

fn emit(bytes: &[u8], path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<i32> {
    let cfg = resolve(cli)?;
    if cli.emit_config {
        let mut bytes = serde_json::to_vec_pretty(&cfg)?;
        bytes.push(b'\n');
        emit(&bytes, None)?;
        return Ok(exit::OK);
    }
    let work = || -> Result<i32> {
        let rep = run_command(cli.command, &cfg)?;
        emit(
            &rep.render(cli.command, &cfg, cfg.output.format)?,
            cfg.output.path.as_deref(),
        )?;
        Ok(rep.exit)
    };
    match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::validation(format!("threads: {e}")))?
            .install(work),
        None => work(),
    }
}

/// Parse arguments, run, report errors on stderr; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::VALIDATION } else { exit::OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_paths() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
        let err = RunConfig::from_json(r#"{"quadrature": {"rel_tol": "x"}}"#).unwrap_err();
        assert!(err.to_string().contains("quadrature.rel_tol"), "{err}");
        let err = RunConfig::from_json(r#"{"bogus": 1}"#).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn validation_messages() {
        let mut cfg = RunConfig {
            m: vec![],
            ..RunConfig::default()
        };
        assert!(cfg.validate().unwrap_err().to_string().contains("m: list is empty"));
        cfg.m = vec![1, 3, 2];
        assert!(cfg.validate().unwrap_err().to_string().contains("m[2]"));
    }

    #[test]
    fn expect_reports_closed_form() {
        let rep = run_command(Command::Expect, &RunConfig::default()).unwrap();
        for (row, m) in rep.rows.iter().zip(1..) {
            let v: f64 = row[1].parse().unwrap();
            let c: f64 = row[6].parse().unwrap();
            assert!((v - 2f64.powf(m as f64 / 2.0)).abs() < 1e-6 * c);
        }
    }

    #[test]
    fn bound_gate() {
        let zero = RunConfig::default();
        let rep = run_command(Command::Bound, &zero).unwrap();
        assert_eq!(rep.exit, exit::HYPOTHESIS);
        let cfg = RunConfig {
            signal: SignalConfig::Radial { r: 1.0 },
            m: vec![1, 2, 4],
            ..RunConfig::default()
        };
        let rep = run_command(Command::Bound, &cfg).unwrap();
        assert_eq!(rep.exit, exit::OK);
        let c = &rep.body["constants"];
        assert_eq!(c["theta_symbolic"], "(3 + 2√2)/6");
        assert_eq!(c["C_symbolic"], "15√5");
    }
}
