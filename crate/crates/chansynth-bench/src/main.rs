use chansynth::parse_channel_spec;
use chansynth_bench::report::{emit_entropy, emit_exactness, emit_rate, EmitFormat};
use chansynth_bench::{
    run_entropy_check, run_exactness, run_rate_sweep, BenchError, ExperimentConfig, SchemeSelector,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

/// Experiment harness for exact channel synthesis.
#[derive(Parser)]
#[command(name = "chansynth-bench", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    #[value(name = "two-stage")]
    TwoStage,
    Baseline,
    Both,
}

impl From<SchemeArg> for SchemeSelector {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::TwoStage => SchemeSelector::TwoStage,
            SchemeArg::Baseline => SchemeSelector::Baseline,
            SchemeArg::Both => SchemeSelector::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for EmitFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => EmitFormat::Csv,
            FormatArg::Json => EmitFormat::Json,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Channel spec file (JSON with x_size, y_size, px, pyx as decimal strings).
    #[arg(long)]
    channel: PathBuf,
    /// Blocklengths, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Quantizer step in bits.
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    /// Monte Carlo trials per configuration.
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Master seed; per-trial seeds are derived from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "two-stage")]
    scheme: SchemeArg,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Subcommand)]
enum Cmd {
    /// Chi-square goodness of fit of the synthesized joint distribution.
    Exactness {
        #[command(flatten)]
        common: CommonArgs,
        /// GOF significance level; PASS requires p above it.
        #[arg(long, default_value_t = 0.001)]
        significance: f64,
        /// Negative control: corrupt the decoded index so the test must FAIL.
        #[arg(long)]
        corrupt_decoder: bool,
    },
    /// Mean rate vs exact bounds across blocklengths.
    RateSweep {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Exact entropy tables and max-entropy bound verification.
    EntropyCheck {
        #[command(flatten)]
        common: CommonArgs,
        /// Also dump the exact gamma pmf per n as
        /// `<path>.n<N>.csv` (bin_index, bin_value, probability).
        #[arg(long)]
        dump_pmf: Option<PathBuf>,
    },
}

fn config_of(common: &CommonArgs) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(common.n.clone(), common.trials, common.seed);
    cfg.delta = common.delta;
    cfg.scheme = common.scheme.into();
    cfg
}

fn load_channel(path: &PathBuf) -> Result<chansynth::Dmc, BenchError> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_channel_spec(&text)?)
}

fn run(cli: Cli) -> Result<bool, BenchError> {
    match cli.cmd {
        Cmd::Exactness {
            common,
            significance,
            corrupt_decoder,
        } => {
            let dmc = load_channel(&common.channel)?;
            let mut cfg = config_of(&common);
            cfg.significance = significance;
            cfg.corrupt_decoder = corrupt_decoder;
            let report = run_exactness(&dmc, &cfg)?;
            for r in &report.rows {
                println!(
                    "exactness {} n={}: chi2={:.4} dof={} p={:.6} -> {}",
                    r.scheme,
                    r.n,
                    r.stat,
                    r.dof,
                    r.p_value,
                    if r.pass { "PASS" } else { "FAIL" }
                );
            }
            if let Some(out) = &common.out {
                emit_exactness(&report, out, common.format.into())?;
            }
            Ok(report.all_pass())
        }
        Cmd::RateSweep { common } => {
            let dmc = load_channel(&common.channel)?;
            let cfg = config_of(&common);
            let report = run_rate_sweep(&dmc, &cfg)?;
            for r in &report.rows {
                println!(
                    "rate {} n={}: mean={:.6} bits/sym (se {:.6}), I={:.6}, bound={:.6}, redundancy={:.6}",
                    r.scheme, r.n, r.mean_rate, r.stderr, r.mi, r.bound, r.redundancy
                );
            }
            for f in &report.fits {
                println!(
                    "fit {}: redundancy ~ {:.4} * log2(n)/n + {:.4} / n",
                    f.scheme, f.log_coeff, f.const_coeff
                );
            }
            if let Some(out) = &common.out {
                emit_rate(&report, out, common.format.into())?;
            }
            Ok(report.all_within_bound())
        }
        Cmd::EntropyCheck { common, dump_pmf } => {
            let dmc = load_channel(&common.channel)?;
            let cfg = config_of(&common);
            let report = run_entropy_check(&dmc, &cfg)?;
            if let Some(stem) = &dump_pmf {
                let q = chansynth::Quantizer::new(common.delta).map_err(BenchError::from)?;
                for &n in &common.n {
                    let pmf =
                        chansynth::llr::gamma_marginal(&dmc, &q, n).map_err(BenchError::from)?;
                    let path = stem.with_file_name(format!(
                        "{}.n{n}.csv",
                        stem.file_stem().and_then(|s| s.to_str()).unwrap_or("pmf")
                    ));
                    chansynth_bench::report::emit_pmf(&pmf, &q, &path)?;
                }
            }
            for r in &report.rows {
                println!(
                    "entropy n={}: H(G)={:.6} H(g1)={:.6} H(g2)={:.6} H(gg)={:.6} H(triple)={:.6} bounds_ok={}",
                    r.n, r.h_gamma, r.h_gbar1, r.h_gbar2, r.h_ggbar, r.h_triple, r.bounds_ok
                );
            }
            println!(
                "H(Gamma) ~ {:.4} * log2(n) + {:.4}",
                report.slope, report.intercept
            );
            for g in &report.geometric {
                println!(
                    "geometric p={}: H={:.6} <= {:.6}: {}",
                    g.p, g.entropy, g.bound, g.ok
                );
            }
            if let Some(out) = &common.out {
                emit_entropy(&report, out, common.format.into())?;
            }
            Ok(report.all_ok())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
