use rayon::prelude::*;
use serde::Serialize;

use qcap_core::channels::{classify, make_channel, ChannelInfoReport};
use qcap_core::code_fidelity::fidelity_lower_bound_states;
use qcap_core::montecarlo::stream_rng;
use qcap_core::random_coding::{
    averaged_fidelity_bound, ensemble_report, exact_average_d2, haar_moment_suite, hamming_rate_curve, sample_code,
    upper_bound_d2, EnsembleReport, HammingCurve, MomentReport,
};
use qcap_core::typicality::{
    achievable_rate_demo, kraus_distribution, typical_set_decay, verify_reduced_channels, DecayFit, RateDemo,
    ReducedChannelReport, TypicalSetReport,
};
use qcap_core::{BoundReport, EnsembleSpec, Error, KrausChannel, Limits, Result};

use crate::output::{json, Table};
use crate::{Cli, Command, Format};

const DEFAULT_EPSILON: f64 = 0.1;
const DEFAULT_N_MIN: usize = 1;
const DEFAULT_N_MAX: usize = 8;

/// Fully resolved run parameters. The thread count is left out on purpose:
/// output must be byte-identical for any `--threads`.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub channel: String,
    pub code_dim: Option<usize>,
    pub rate: Option<f64>,
    pub n_min: Option<usize>,
    pub n_max: Option<usize>,
    pub epsilon: Option<f64>,
    pub samples: Option<usize>,
    pub seed: u64,
    pub format: Format,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config: &'a RunConfig,
    quantity: &'static str,
    result: T,
}

pub fn load_channel(arg: &str) -> Result<KrausChannel> {
    match arg.strip_prefix("builtin:") {
        Some(spec) => make_channel(spec),
        None => KrausChannel::from_json(&std::fs::read_to_string(arg)?),
    }
}

fn required<T>(value: Option<T>, flag: &str, cmd: Command) -> Result<T> {
    value.ok_or_else(|| {
        let name = serde_json::to_value(cmd)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        Error::InvalidParameter(format!("--{flag} is required for `{name}`"))
    })
}

fn block_lengths(cfg: &RunConfig) -> Result<Vec<usize>> {
    let (lo, hi) = (cfg.n_min.unwrap_or(DEFAULT_N_MIN), cfg.n_max.unwrap_or(DEFAULT_N_MAX));
    if lo == 0 || lo > hi {
        return Err(Error::InvalidParameter(format!("bad block-length range {lo}..={hi}")));
    }
    Ok((lo..=hi).collect())
}

fn resolve(cli: &Cli, ch: &KrausChannel) -> Result<RunConfig> {
    let mut cfg = RunConfig {
        command: cli.command,
        channel: cli.channel.clone(),
        code_dim: None,
        rate: None,
        n_min: None,
        n_max: None,
        epsilon: None,
        samples: None,
        seed: cli.seed,
        format: cli.format,
    };
    match cli.command {
        Command::Info => {}
        Command::Bound => {
            cfg.code_dim = Some(required(cli.code_dim, "code-dim", cli.command)?);
            cfg.samples = Some(cli.samples.unwrap_or(1));
        }
        Command::Ensemble => {
            cfg.code_dim = Some(required(cli.code_dim, "code-dim", cli.command)?);
            cfg.samples = Some(cli.samples.unwrap_or(1000));
        }
        Command::Moments => {
            cfg.code_dim = Some(cli.code_dim.unwrap_or(ch.input_dim().div_ceil(2)));
            cfg.samples = Some(cli.samples.unwrap_or(10_000));
        }
        Command::Typicality => {
            cfg.n_min = Some(cli.n_min.unwrap_or(DEFAULT_N_MIN));
            cfg.n_max = Some(cli.n_max.unwrap_or(DEFAULT_N_MAX));
            cfg.epsilon = Some(cli.epsilon.unwrap_or(DEFAULT_EPSILON));
        }
        Command::RateDemo => {
            cfg.rate = Some(required(cli.rate, "rate", cli.command)?);
            cfg.n_min = Some(cli.n_min.unwrap_or(DEFAULT_N_MIN));
            cfg.n_max = Some(cli.n_max.unwrap_or(DEFAULT_N_MAX));
            cfg.epsilon = Some(cli.epsilon.unwrap_or(DEFAULT_EPSILON));
        }
    }
    if cfg.samples == Some(0) {
        return Err(Error::InvalidParameter("--samples must be at least 1".into()));
    }
    Ok(cfg)
}

pub fn execute(cli: &Cli) -> Result<String> {
    let ch = load_channel(&cli.channel)?;
    let cfg = resolve(cli, &ch)?;
    match cfg.command {
        Command::Info => info(&cfg, &ch),
        Command::Bound => bound(&cfg, &ch),
        Command::Ensemble => ensemble(&cfg, &ch),
        Command::Moments => moments(&cfg, &ch),
        Command::Typicality => typicality(&cfg, &ch),
        Command::RateDemo => rate_demo(&cfg, &ch),
    }
}

/// CSV body preceded by a `# config {...}` comment line.
fn csv(cfg: &RunConfig, table: &Table) -> Result<String> {
    Ok(format!("# config {}\n{}", serde_json::to_string(cfg)?, table.render()))
}

fn envelope<T: Serialize>(cfg: &RunConfig, quantity: &'static str, result: T) -> Result<String> {
    json(&Envelope {
        config: cfg,
        quantity,
        result,
    })
}

fn info(cfg: &RunConfig, ch: &KrausChannel) -> Result<String> {
    let r: ChannelInfoReport = classify(ch)?;
    match cfg.format {
        Format::Json => envelope(cfg, "channel classification and information quantities", r),
        Format::Csv => {
            let mut t = Table::new(vec![
                "name",
                "input_dim",
                "output_dim",
                "kraus_count",
                "length",
                "trace_preserving",
                "unital",
                "uniform",
                "output_entropy",
                "entropy_exchange",
                "coherent_information",
            ]);
            t.push(vec![
                r.name.as_deref().unwrap_or("").into(),
                r.input_dim.into(),
                r.output_dim.into(),
                r.kraus_count.into(),
                r.length.into(),
                r.is_trace_preserving.into(),
                r.is_unital.into(),
                r.is_uniform.into(),
                r.output_entropy.into(),
                r.entropy_exchange.into(),
                r.coherent_information.into(),
            ]);
            csv(cfg, &t)
        }
    }
}

#[derive(Serialize)]
struct BoundRun {
    ambient_dim: usize,
    code_dim: usize,
    /// Closed-form ensemble average of the bound, for reference.
    averaged_fidelity_bound: f64,
    exact_average_d2: Option<f64>,
    upper_bound_d2: f64,
    codes: Vec<BoundReport>,
}

/// Bound for one sampled code. The state form is undefined when almost nothing is transmitted.
fn bound_for_code(ch: &KrausChannel, k: usize, seed: u64, index: u64) -> Result<BoundReport> {
    let code = sample_code(ch.input_dim(), k, &mut stream_rng(seed, index))?;
    match fidelity_lower_bound_states(&code, ch) {
        Err(Error::DegenerateTransmission(_)) => qcap_core::code_fidelity::fidelity_lower_bound_kraus(&code, ch),
        other => other,
    }
}

fn bound(cfg: &RunConfig, ch: &KrausChannel) -> Result<String> {
    let (k, samples) = (cfg.code_dim.unwrap(), cfg.samples.unwrap());
    let m = ch.input_dim();
    if k == 0 || k > m {
        return Err(Error::InvalidParameter(format!(
            "code dimension {k} must be in 1..={m}"
        )));
    }
    let codes = (0..samples as u64)
        .into_par_iter()
        .map(|i| bound_for_code(ch, k, cfg.seed, i))
        .collect::<Result<Vec<_>>>()?;
    let run = BoundRun {
        ambient_dim: m,
        code_dim: k,
        averaged_fidelity_bound: averaged_fidelity_bound(ch, k),
        exact_average_d2: if m >= 2 { Some(exact_average_d2(ch, k)?) } else { None },
        upper_bound_d2: upper_bound_d2(ch),
        codes,
    };
    match cfg.format {
        Format::Json => envelope(cfg, "fidelity lower bound for sampled codes", run),
        Format::Csv => {
            let mut t = Table::new(vec![
                "code",
                "p",
                "trace_norm_d",
                "frobenius_d_sq",
                "bound_kraus",
                "bound_states",
            ]);
            for (i, r) in run.codes.iter().enumerate() {
                t.push(vec![
                    i.into(),
                    r.p.into(),
                    r.trace_norm_d.into(),
                    r.frobenius_d_sq.into(),
                    r.bound_kraus.into(),
                    r.bound_states.into(),
                ]);
            }
            csv(cfg, &t)
        }
    }
}

fn ensemble(cfg: &RunConfig, ch: &KrausChannel) -> Result<String> {
    let spec = EnsembleSpec::new(ch.input_dim(), cfg.code_dim.unwrap(), cfg.samples.unwrap(), cfg.seed)?;
    let r: EnsembleReport = ensemble_report(ch, &spec)?;
    match cfg.format {
        Format::Json => envelope(cfg, "random-code ensemble statistics against closed forms", r),
        Format::Csv => {
            let mut t = Table::new(vec!["statistic", "mean", "std_error", "reference", "relation", "holds"]);
            let e = &r.estimates;
            t.push(vec![
                "bound".into(),
                e.bound.mean.into(),
                e.bound.std_error.into(),
                r.averaged_fidelity_bound.into(),
                ">=".into(),
                r.bound_above_averaged_bound.into(),
            ]);
            t.push(vec![
                "d_trace_norm".into(),
                e.d_trace_norm.mean.into(),
                e.d_trace_norm.std_error.into(),
                r.trace_norm_majorant.into(),
                "<=".into(),
                r.trace_norm_below_majorant.into(),
            ]);
            t.push(vec![
                "d_frobenius_sq".into(),
                e.d_frobenius_sq.mean.into(),
                e.d_frobenius_sq.std_error.into(),
                r.exact_average_d2.into(),
                "==".into(),
                r.d2_matches_closed_form.into(),
            ]);
            csv(cfg, &t)
        }
    }
}

fn moments(cfg: &RunConfig, ch: &KrausChannel) -> Result<String> {
    let r: MomentReport = haar_moment_suite(ch.input_dim(), cfg.code_dim.unwrap(), cfg.samples.unwrap(), cfg.seed)?;
    match cfg.format {
        Format::Json => envelope(cfg, "Haar moments of random unitaries against exact values", r),
        Format::Csv => {
            let mut t = Table::new(vec!["moment", "estimate", "std_error", "target", "z_score", "pass"]);
            for c in &r.moments {
                t.push(vec![
                    c.name.as_str().into(),
                    c.estimate.mean.into(),
                    c.estimate.std_error.into(),
                    c.target.into(),
                    c.z_score.into(),
                    c.pass.into(),
                ]);
            }
            csv(cfg, &t)
        }
    }
}

#[derive(Serialize)]
struct TypicalityRun {
    kraus_weights: Vec<f64>,
    sequences: Vec<TypicalSetReport>,
    sequence_decay: DecayFit,
    reduced_channels: Vec<ReducedChannelReport>,
    transmission_decay: DecayFit,
    exact_relations_hold: bool,
}

fn typicality(cfg: &RunConfig, ch: &KrausChannel) -> Result<String> {
    let ns = block_lengths(cfg)?;
    let eps = cfg.epsilon.unwrap();
    let limits = Limits::default();
    let dist = kraus_distribution(&ch.diagonalize())?;
    let (sequences, sequence_decay) = typical_set_decay(&dist, eps, &ns)?;
    let (reduced_channels, transmission_decay) = verify_reduced_channels(ch, &ns, eps, &limits)?;
    let run = TypicalityRun {
        kraus_weights: dist.weights().to_vec(),
        exact_relations_hold: reduced_channels.iter().all(ReducedChannelReport::exact_relations_hold),
        sequences,
        sequence_decay,
        reduced_channels,
        transmission_decay,
    };
    match cfg.format {
        Format::Json => envelope(cfg, "typical Kraus sequences and reduced block channels", run),
        Format::Csv => {
            let mut t = Table::new(vec![
                "n",
                "typical_count",
                "count_bound",
                "typical_mass",
                "reduced_length",
                "length_bound",
                "subspace_rank",
                "transmission",
                "transmission_floor",
                "frobenius_sq",
                "frobenius_bound",
                "relations_hold",
            ]);
            for (s, r) in run.sequences.iter().zip(&run.reduced_channels) {
                t.push(vec![
                    s.n.into(),
                    s.typical_count.into(),
                    s.count_bound.into(),
                    s.mass.into(),
                    r.length.into(),
                    r.length_bound.into(),
                    r.subspace_rank.into(),
                    r.transmission.into(),
                    r.transmission_floor.into(),
                    r.frobenius_sq.into(),
                    r.frobenius_bound.into(),
                    r.exact_relations_hold().into(),
                ]);
            }
            csv(cfg, &t)
        }
    }
}

#[derive(Serialize)]
struct RateRun {
    demo: RateDemo,
    /// Only for unital channels.
    hamming: Option<HammingCurve>,
}

fn rate_demo(cfg: &RunConfig, ch: &KrausChannel) -> Result<String> {
    let ns = block_lengths(cfg)?;
    let (rate, eps) = (cfg.rate.unwrap(), cfg.epsilon.unwrap());
    let demo = achievable_rate_demo(ch, rate, eps, &ns, &Limits::default())?;
    let hamming = if classify(ch)?.is_unital {
        Some(hamming_rate_curve(ch, rate, ns[0], ns[ns.len() - 1])?)
    } else {
        None
    };
    let run = RateRun { demo, hamming };
    match cfg.format {
        Format::Json => envelope(cfg, "averaged fidelity bound for block codes at a fixed rate", run),
        Format::Csv => {
            let mut t = Table::new(vec![
                "n",
                "code_dim",
                "reduced_length",
                "transmission",
                "penalty",
                "bound",
                "penalty_ratio",
                "unital_bound",
            ]);
            for (i, r) in run.demo.rows.iter().enumerate() {
                let ratio = if i == 0 { None } else { run.demo.penalty_ratios[i - 1] };
                let unital = run.hamming.as_ref().map(|h| h.rows[i].bound);
                t.push(vec![
                    r.n.into(),
                    r.code_dim.into(),
                    r.reduced_length.into(),
                    r.transmission.into(),
                    r.penalty.into(),
                    r.bound.into(),
                    ratio.into(),
                    unital.into(),
                ]);
            }
            csv(cfg, &t)
        }
    }
}
