mod config;
mod format;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pcfi::coherence::{
    coherence_search, coherence_two_qubit, unitary_bound_generator, unitary_certificate, CoherenceMode,
    UnitaryBoundMode,
};
use pcfi::estimation::{classical_fi, mle_simulation, outcome_distribution};
use pcfi::io::{self, ChannelJson};
use pcfi::lincore::partial_trace_b;
use pcfi::qsd::{discrimination_equivalence_check, helstrom, pgm_success};
use pcfi::resource::validate_channel;
use pcfi::{presets, DensityMatrix, Error, PioChannel, Result};

use config::{ConfigFile, OutputFormat, RunConfig};
use format::{sig6, Table};

const AFTER_HELP: &str = "\
CSV layouts (numbers carry 6 significant digits; use --output-format json for full precision):
  fisher              outcome,probability,derivative   then a final row  fisher_information,<F>,
  coherence           value,mode
  reproduce-examples  examples.csv: label,fi_postselective,unitary_bound_full,unitary_bound_fixed1
                      fig1.csv:     label,x,fi_postselective,unitary_qfi
  qsd                 quantity,value
  mle                 quantity,value

Exit codes: 0 success, 2 invalid input (error JSON on stderr), 3 domain error such as zero Fisher information.
Configuration: --config FILE or the PCFI_CONFIG environment variable names a key = value file; flags win.";

#[derive(Parser, Debug)]
#[command(name = "pcfi", version, about = "Partial coherence through Fisher information", after_help = AFTER_HELP)]
struct Cli {
    /// key = value configuration file (overrides PCFI_CONFIG)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    output_format: Option<OutputFormat>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Auto,
    TwoQubit,
    Search,
    UnitaryBound,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Outcome distribution and Fisher information of a state under a channel
    Fisher {
        state: PathBuf,
        channel: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        eps0: f64,
    },
    /// Coherence value with a certificate channel
    Coherence {
        state: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
        /// Fix the unitary-bound generator to |i><i| (1-based); default searches all binary generators
        #[arg(long)]
        index: Option<usize>,
        /// Write the certificate channel JSON here
        #[arg(long)]
        certificate_out: Option<PathBuf>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        groups_max: Option<usize>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        step_tolerance: Option<f64>,
        #[arg(long)]
        continuous_deriv: bool,
    },
    /// Recompute the three built-in example states and write examples.csv and fig1.csv
    ReproduceExamples {
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Discrimination bounds for an ensemble
    Qsd {
        ensemble: PathBuf,
        #[arg(long)]
        check_equivalence: bool,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Maximum-likelihood estimation against the Cramer-Rao bound
    Mle {
        state: PathBuf,
        channel: PathBuf,
        #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
        eps_true: f64,
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::from(if e.is_domain_error() { 3 } else { 2 })
        }
    }
}

fn run(cli: Cli) -> Result<String> {
    let mut cfg = RunConfig::from_file(ConfigFile::discover(cli.config.as_deref())?);
    if let Some(f) = cli.output_format {
        cfg.output_format = f;
    }
    if let Some(s) = cli.seed {
        cfg.set_seed(s);
    }
    match cli.command {
        Command::Fisher { state, channel, eps0 } => cmd_fisher(&cfg, &state, &channel, eps0),
        Command::Coherence {
            state,
            mode,
            index,
            certificate_out,
            restarts,
            groups_max,
            max_iters,
            step_tolerance,
            continuous_deriv,
        } => {
            let s = &mut cfg.search;
            if let Some(v) = restarts {
                s.n_restarts = v;
            }
            if groups_max.is_some() {
                s.n_groups_max = groups_max;
            }
            if let Some(v) = max_iters {
                s.max_iters = v;
            }
            if let Some(v) = step_tolerance {
                s.step_tolerance = v;
            }
            s.continuous_deriv |= continuous_deriv;
            cmd_coherence(&cfg, &state, mode, index, certificate_out.as_deref())
        }
        Command::ReproduceExamples { out } => cmd_reproduce_examples(&cfg, &out),
        Command::Qsd { ensemble, check_equivalence, samples } => cmd_qsd(&cfg, &ensemble, check_equivalence, samples),
        Command::Mle { state, channel, eps_true, shots, trials } => {
            cmd_mle(&cfg, &state, &channel, eps_true, shots, trials)
        }
    }
}

fn load_state(cfg: &RunConfig, path: &Path) -> Result<DensityMatrix> {
    io::read_density(path, &cfg.tolerances)
}

fn load_channel(cfg: &RunConfig, path: &Path) -> Result<PioChannel> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    io::channel_from_json(&text, cfg.tol_channel)
}

fn check_dims(rho: &DensityMatrix, ch: &PioChannel) -> Result<()> {
    if rho.dim_a() != ch.dim_a() {
        return Err(Error::DimensionMismatch(format!(
            "state has dim_a = {}, channel acts on {}",
            rho.dim_a(),
            ch.dim_a()
        )));
    }
    Ok(())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn cmd_fisher(cfg: &RunConfig, state: &Path, channel: &Path, eps0: f64) -> Result<String> {
    let rho = load_state(cfg, state)?;
    let ch = load_channel(cfg, channel)?;
    check_dims(&rho, &ch)?;
    let dist = outcome_distribution(&ch, &rho, eps0)?;
    let fi = classical_fi(&dist);
    Ok(match cfg.output_format {
        OutputFormat::Json => pretty(&json!({
            "eps0": eps0,
            "fisher_information": fi,
            "probabilities": dist.probs,
            "derivatives": dist.dprobs,
        })),
        OutputFormat::Csv => {
            let mut t = Table::new(&["outcome", "probability", "derivative"]);
            for (l, (p, dp)) in dist.probs.iter().zip(&dist.dprobs).enumerate() {
                t.row(vec![(l + 1).to_string(), sig6(*p), sig6(*dp)]);
            }
            t.row(vec!["fisher_information".into(), sig6(fi), String::new()]);
            t.render()
        }
    })
}

fn cmd_coherence(
    cfg: &RunConfig,
    state: &Path,
    mode: ModeArg,
    index: Option<usize>,
    certificate_out: Option<&Path>,
) -> Result<String> {
    let rho = load_state(cfg, state)?;
    let mut extra = serde_json::Map::new();
    let (value, mode, certificate) = match mode {
        ModeArg::UnitaryBound => {
            let ub_mode = match index {
                None => UnitaryBoundMode::Full,
                Some(0) => return Err(Error::IndexOutOfRange("--index is 1-based".into())),
                Some(i) => UnitaryBoundMode::FixedIndex(i - 1),
            };
            let (value, d) = unitary_bound_generator(&rho, ub_mode)?;
            let cert = unitary_certificate(&partial_trace_b(&rho), &d)?;
            extra.insert("generator".into(), json!(d));
            (value, CoherenceMode::UnitaryBound, cert)
        }
        ModeArg::TwoQubit => unpack(coherence_two_qubit(&rho)?),
        ModeArg::Search => unpack(coherence_search(&rho, &cfg.search)?),
        ModeArg::Auto if rho.dim_a() == 2 => unpack(coherence_two_qubit(&rho)?),
        ModeArg::Auto => unpack(coherence_search(&rho, &cfg.search)?),
    };
    validate_channel(&certificate, cfg.tol_channel)?;
    let cert_json = serde_json::to_value(ChannelJson::from(&certificate)).expect("channel serializes");
    if let Some(path) = certificate_out {
        write_file(path, &pretty(&cert_json))?;
        extra.insert("certificate_path".into(), json!(path.display().to_string()));
    }
    Ok(match cfg.output_format {
        OutputFormat::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("value".into(), json!(value));
            obj.insert("mode".into(), json!(mode.as_str()));
            obj.extend(extra);
            obj.insert("certificate".into(), cert_json);
            pretty(&Value::Object(obj))
        }
        OutputFormat::Csv => {
            let mut t = Table::new(&["value", "mode"]);
            t.row(vec![sig6(value), mode.as_str().into()]);
            t.render()
        }
    })
}

fn unpack(r: pcfi::coherence::CoherenceResult) -> (f64, CoherenceMode, PioChannel) {
    (r.value, r.mode, r.certificate)
}

struct ExampleRow {
    label: &'static str,
    fi: f64,
    full: f64,
    fixed1: f64,
}

fn example_rows() -> Result<Vec<ExampleRow>> {
    let ch = presets::example1_channel();
    let states = [("E1", presets::rho1()), ("E2", presets::rho2()), ("E3", presets::rho3())];
    states
        .into_iter()
        .map(|(label, rho)| {
            Ok(ExampleRow {
                label,
                fi: pcfi::estimation::channel_fi(&ch, &rho, 0.0)?,
                full: unitary_bound_generator(&rho, UnitaryBoundMode::Full)?.0,
                fixed1: unitary_bound_generator(&rho, UnitaryBoundMode::FixedIndex(0))?.0,
            })
        })
        .collect()
}

fn cmd_reproduce_examples(cfg: &RunConfig, out: &Path) -> Result<String> {
    let rows = example_rows()?;
    std::fs::create_dir_all(out).map_err(|e| Error::InvalidArgument(format!("{}: {e}", out.display())))?;

    let mut examples = Table::new(&["label", "fi_postselective", "unitary_bound_full", "unitary_bound_fixed1"]);
    let mut fig = Table::new(&["label", "x", "fi_postselective", "unitary_qfi"]);
    for (k, r) in rows.iter().enumerate() {
        examples.row(vec![r.label.into(), sig6(r.fi), sig6(r.full), sig6(r.fixed1)]);
        fig.row(vec![r.label.into(), (k + 1).to_string(), sig6(r.fi), sig6(r.fixed1)]);
    }
    let examples_path = out.join("examples.csv");
    let fig_path = out.join("fig1.csv");
    write_file(&examples_path, &examples.render())?;
    write_file(&fig_path, &fig.render())?;

    Ok(match cfg.output_format {
        OutputFormat::Json => pretty(&json!({
            "examples_csv": examples_path.display().to_string(),
            "fig1_csv": fig_path.display().to_string(),
            "rows": rows.iter().map(|r| json!({
                "label": r.label,
                "fi_postselective": r.fi,
                "unitary_bound_full": r.full,
                "unitary_bound_fixed1": r.fixed1,
            })).collect::<Vec<_>>(),
        })),
        OutputFormat::Csv => examples.render(),
    })
}

fn cmd_qsd(cfg: &RunConfig, ensemble: &Path, check: bool, samples: usize) -> Result<String> {
    let ens = io::read_ensemble(ensemble)?;
    let h = if ens.len() == 2 { Some(helstrom(&ens)?) } else { None };
    let pgm = pgm_success(&ens)?;
    let report = if check {
        Some(discrimination_equivalence_check(&ens, samples, cfg.seed)?)
    } else {
        None
    };
    Ok(match cfg.output_format {
        OutputFormat::Json => {
            let mut obj = json!({
                "n_states": ens.len(),
                "dim": ens.dim(),
                "helstrom": h,
                "pgm_success": pgm,
            });
            if let Some(r) = &report {
                obj["equivalence"] = json!({
                    "samples": r.samples,
                    "max_deviation": r.max_deviation,
                    "prior_deviation": r.prior_deviation,
                    "povm_deviation": r.povm_deviation,
                    "best_success": r.best_success,
                });
            }
            pretty(&obj)
        }
        OutputFormat::Csv => {
            let mut t = Table::new(&["quantity", "value"]);
            t.row(vec!["n_states".into(), ens.len().to_string()]);
            t.row(vec!["dim".into(), ens.dim().to_string()]);
            t.row(vec!["helstrom".into(), h.map(sig6).unwrap_or_default()]);
            t.row(vec!["pgm_success".into(), sig6(pgm)]);
            if let Some(r) = &report {
                t.row(vec!["samples".into(), r.samples.to_string()]);
                t.row(vec!["max_deviation".into(), sig6(r.max_deviation)]);
                t.row(vec!["prior_deviation".into(), sig6(r.prior_deviation)]);
                t.row(vec!["povm_deviation".into(), sig6(r.povm_deviation)]);
                t.row(vec!["best_success".into(), sig6(r.best_success)]);
            }
            t.render()
        }
    })
}

fn cmd_mle(cfg: &RunConfig, state: &Path, channel: &Path, eps_true: f64, shots: u64, trials: usize) -> Result<String> {
    let rho = load_state(cfg, state)?;
    let ch = load_channel(cfg, channel)?;
    check_dims(&rho, &ch)?;
    let r = mle_simulation(&ch, &rho, eps_true, shots, trials, cfg.seed)?;
    Ok(match cfg.output_format {
        OutputFormat::Json => pretty(&json!({
            "eps_true": eps_true,
            "shots": shots,
            "trials": trials,
            "seed": cfg.seed,
            "fisher_information": r.fisher_information,
            "mean": r.mean,
            "variance": r.variance,
            "crb": r.crb,
            "ratio": r.ratio(),
        })),
        OutputFormat::Csv => {
            let mut t = Table::new(&["quantity", "value"]);
            t.row(vec!["fisher_information".into(), sig6(r.fisher_information)]);
            t.row(vec!["mean".into(), sig6(r.mean)]);
            t.row(vec!["variance".into(), sig6(r.variance)]);
            t.row(vec!["crb".into(), sig6(r.crb)]);
            t.row(vec!["ratio".into(), sig6(r.ratio())]);
            t.render()
        }
    })
}
