//! Experiment drivers: distributional exactness testing, rate/redundancy
//! sweeps, and entropy-bound verification.
//!
//! Trials are embarrassingly parallel: each gets a seed derived from
//! `(master seed, scheme tag, n, trial index)` and aggregation uses integer
//! sums only, so identical configurations produce identical results
//! regardless of thread scheduling.

use crate::report::{
    EntropyReport, EntropyRow, ExactnessReport, ExactnessRow, GeometricRow, RateFit, RateReport,
    RateRow,
};
use crate::stats::{chi_square_gof, fit_line, fit_two_basis};
use chansynth::dmc::Dmc;
use chansynth::llr::{shannon_entropy, GammaTables, Quantizer};
use chansynth::sampler::DiscreteCdf;
use chansynth::scheme::{Scheme, SchemeConfig, SchemeError, SchemeMode};
use chansynth::stream::{derive_seed, Prng};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{cells} joint cells exceed the exactness-test limit of {limit}")]
    CellCountTooLarge { cells: usize, limit: usize },
    #[error("invalid experiment config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Llr(#[from] chansynth::llr::LlrError),
    #[error(transparent)]
    Dmc(#[from] chansynth::dmc::DmcError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

/// Joint-cell budget for exactness testing.
pub const MAX_EXACTNESS_CELLS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    TwoStage,
    Baseline,
}

impl SchemeKind {
    pub fn tag(self) -> &'static str {
        match self {
            SchemeKind::TwoStage => "two-stage",
            SchemeKind::Baseline => "baseline",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeSelector {
    TwoStage,
    Baseline,
    Both,
}

impl SchemeSelector {
    pub fn kinds(self) -> Vec<SchemeKind> {
        match self {
            SchemeSelector::TwoStage => vec![SchemeKind::TwoStage],
            SchemeSelector::Baseline => vec![SchemeKind::Baseline],
            SchemeSelector::Both => vec![SchemeKind::TwoStage, SchemeKind::Baseline],
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n_list: Vec<usize>,
    pub delta: f64,
    pub trials: u64,
    pub seed: u64,
    pub scheme: SchemeSelector,
    pub significance: f64,
    pub corrupt_decoder: bool,
}

impl ExperimentConfig {
    pub fn new(n_list: Vec<usize>, trials: u64, seed: u64) -> Self {
        ExperimentConfig {
            n_list,
            delta: 0.5,
            trials,
            seed,
            scheme: SchemeSelector::TwoStage,
            significance: 0.001,
            corrupt_decoder: false,
        }
    }

    fn validate(&self) -> Result<(), BenchError> {
        if self.n_list.is_empty() {
            return Err(BenchError::BadConfig("empty n list".into()));
        }
        if self.trials < 1 {
            return Err(BenchError::BadConfig("trials must be >= 1".into()));
        }
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(BenchError::BadConfig(format!(
                "significance {} outside (0, 1)",
                self.significance
            )));
        }
        Ok(())
    }
}

fn trial_seed(master: u64, tag: &str, n: usize, trial: u64) -> u64 {
    let domain = format!("{tag}/n{n}");
    derive_seed(master, domain.as_bytes(), trial + 1)
}

fn sample_xseq(source: &mut Prng, x_cdf: &DiscreteCdf<usize>, n: usize) -> Vec<usize> {
    (0..n).map(|_| x_cdf.sample(source.next_unit())).collect()
}

fn seq_index(seq: &[usize], base: usize) -> usize {
    seq.iter().fold(0usize, |acc, &s| acc * base + s)
}

fn build_scheme(dmc: &Dmc, n: usize, delta: f64) -> Result<Scheme, BenchError> {
    let mut cfg = SchemeConfig::new(dmc.clone(), n);
    cfg.delta = delta;
    cfg.mode = SchemeMode::Auto;
    Ok(Scheme::new(cfg)?)
}

/// Exact joint counts of the target `p_{X^n} p_{Y^n|X^n}`, scaled to `trials`.
fn expected_joint_counts(dmc: &Dmc, n: usize, trials: u64) -> Vec<f64> {
    let (xs, ys) = (dmc.x_size(), dmc.y_size());
    let (xt, yt) = (xs.pow(n as u32), ys.pow(n as u32));
    let mut expected = vec![0.0; xt * yt];
    for xi in 0..xt {
        let mut xseq = vec![0usize; n];
        let mut rem = xi;
        for k in (0..n).rev() {
            xseq[k] = rem % xs;
            rem /= xs;
        }
        let px: f64 = xseq.iter().map(|&x| dmc.px()[x]).product();
        if px == 0.0 {
            continue;
        }
        for yi in 0..yt {
            let mut rem = yi;
            let mut pyx = 1.0;
            for k in (0..n).rev() {
                pyx *= dmc.pyx(xseq[k])[rem % ys];
                rem /= ys;
            }
            expected[xi * yt + yi] = trials as f64 * px * pyx;
        }
    }
    expected
}

/// Runs end-to-end encode/decode trials for each blocklength and scheme and
/// chi-square-tests the empirical joint `(X^n, Y^n)` against the exact target.
pub fn run_exactness(dmc: &Dmc, cfg: &ExperimentConfig) -> Result<ExactnessReport, BenchError> {
    cfg.validate()?;
    let x_cdf = DiscreteCdf::from_probs(dmc.px().iter().copied().enumerate());
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        let cells = dmc
            .x_size()
            .checked_pow(n as u32)
            .and_then(|a| a.checked_mul(dmc.y_size().checked_pow(n as u32)?))
            .unwrap_or(usize::MAX);
        if cells > MAX_EXACTNESS_CELLS {
            return Err(BenchError::CellCountTooLarge {
                cells,
                limit: MAX_EXACTNESS_CELLS,
            });
        }
        let expected = expected_joint_counts(dmc, n, cfg.trials);
        let scheme = build_scheme(dmc, n, cfg.delta)?;
        let yt = dmc.y_size().pow(n as u32);
        for kind in cfg.scheme.kinds() {
            let counts = (0..cfg.trials)
                .into_par_iter()
                .try_fold(
                    || vec![0u64; cells],
                    |mut acc, trial| -> Result<Vec<u64>, BenchError> {
                        let seed = trial_seed(cfg.seed, kind.tag(), n, trial);
                        let mut source = Prng::new(seed, b"source");
                        let xseq = sample_xseq(&mut source, &x_cdf, n);
                        let mut private = Prng::new(seed, b"private");
                        let yseq = match kind {
                            SchemeKind::TwoStage => {
                                let (tr, _) =
                                    scheme.encode_with_seed(seed, &xseq, &mut private)?;
                                if cfg.corrupt_decoder {
                                    scheme.decode_with_seed_corrupted(seed, &tr.bits)?
                                } else {
                                    scheme.decode_with_seed(seed, &tr.bits)?
                                }
                            }
                            SchemeKind::Baseline => {
                                let (tr, _) =
                                    scheme.baseline_encode_with_seed(seed, &xseq, &mut private)?;
                                scheme.baseline_decode_with_seed(seed, &tr.bits)?
                            }
                        };
                        let idx = seq_index(&xseq, dmc.x_size()) * yt
                            + seq_index(&yseq, dmc.y_size());
                        acc[idx] += 1;
                        Ok(acc)
                    },
                )
                .try_reduce(
                    || vec![0u64; cells],
                    |mut a, b| {
                        for (x, y) in a.iter_mut().zip(b) {
                            *x += y;
                        }
                        Ok(a)
                    },
                )?;
            let gof = chi_square_gof(&counts, &expected, 5.0);
            rows.push(ExactnessRow {
                scheme: kind.tag().to_string(),
                n,
                trials: cfg.trials,
                cells: gof.cells,
                stat: gof.stat,
                dof: gof.dof,
                p_value: gof.p_value,
                pass: gof.p_value > cfg.significance,
            });
        }
    }
    Ok(ExactnessReport {
        significance: cfg.significance,
        corrupt_decoder: cfg.corrupt_decoder,
        rows,
    })
}

/// Rate-bound terms of the two-stage scheme, total bits for blocklength `n`:
/// `n I + [H(Gamma) if nonsingular] + 2 H(triple) + 7 delta + 3 + 2 log2 e`,
/// plus 2 bits of prefix-code slack.
pub fn two_stage_bound_bits(scheme: &Scheme) -> f64 {
    let n = scheme.config().n as f64;
    let mi = scheme.config().dmc.mutual_information();
    let h_gamma = scheme.tables().marginal().entropy();
    let h_triple = scheme.tables().triple_marginal().entropy();
    let gamma_term = if scheme.is_singular_mode() { 0.0 } else { h_gamma };
    n * mi
        + gamma_term
        + 2.0 * h_triple
        + 7.0 * scheme.quantizer().delta()
        + 3.0
        + 2.0 * std::f64::consts::LOG2_E
        + 2.0
}

/// Baseline bound, total bits: `log2 M_base + log2 e + 1` plus one bit of
/// code slack.
pub fn baseline_bound_bits(scheme: &Scheme) -> f64 {
    scheme.baseline_ceiling().log2() + std::f64::consts::LOG2_E + 2.0
}

/// Measures mean transcript length per symbol over `trials` sampled inputs
/// at each blocklength, against the exact bound columns.
pub fn run_rate_sweep(dmc: &Dmc, cfg: &ExperimentConfig) -> Result<RateReport, BenchError> {
    cfg.validate()?;
    let x_cdf = DiscreteCdf::from_probs(dmc.px().iter().copied().enumerate());
    let mi = dmc.mutual_information();
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        let scheme = build_scheme(dmc, n, cfg.delta)?;
        // Exact worst-case audit of the auxiliary ceilings for this n.
        scheme.audit_aux_ceilings()?;
        let h_gamma = scheme.tables().marginal().entropy();
        for kind in cfg.scheme.kinds() {
            let (total, total_sq) = (0..cfg.trials)
                .into_par_iter()
                .try_fold(
                    || (0u128, 0u128),
                    |(sum, sum_sq), trial| -> Result<(u128, u128), BenchError> {
                        let seed = trial_seed(cfg.seed, kind.tag(), n, trial);
                        let mut source = Prng::new(seed, b"source");
                        let xseq = sample_xseq(&mut source, &x_cdf, n);
                        let mut private = Prng::new(seed, b"private");
                        let len = match kind {
                            SchemeKind::TwoStage => {
                                scheme.sample_rate_trial(&xseq, &mut private)?.total()
                            }
                            SchemeKind::Baseline => {
                                scheme.baseline_rate_trial(&mut private)?.total()
                            }
                        } as u128;
                        Ok((sum + len, sum_sq + len * len))
                    },
                )
                .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
            let t = cfg.trials as f64;
            let mean_len = total as f64 / t;
            let var_len = (total_sq as f64 / t - mean_len * mean_len).max(0.0);
            let nf = n as f64;
            let mean_rate = mean_len / nf;
            let stderr = (var_len / t).sqrt() / nf;
            let bound = match kind {
                SchemeKind::TwoStage => two_stage_bound_bits(&scheme) / nf,
                SchemeKind::Baseline => baseline_bound_bits(&scheme) / nf,
            };
            rows.push(RateRow {
                scheme: kind.tag().to_string(),
                n,
                trials: cfg.trials,
                mean_rate,
                stderr,
                mi,
                h_gamma_over_n: h_gamma / nf,
                bound,
                redundancy: mean_rate - mi,
            });
        }
    }
    let mut fits = Vec::new();
    for kind in cfg.scheme.kinds() {
        let pts: Vec<&RateRow> = rows.iter().filter(|r| r.scheme == kind.tag()).collect();
        if pts.len() >= 2 {
            let us: Vec<f64> = pts.iter().map(|r| (r.n as f64).log2() / r.n as f64).collect();
            let vs: Vec<f64> = pts.iter().map(|r| 1.0 / r.n as f64).collect();
            let ys: Vec<f64> = pts.iter().map(|r| r.redundancy).collect();
            let (cu, cv) = fit_two_basis(&us, &vs, &ys);
            fits.push(RateFit {
                scheme: kind.tag().to_string(),
                log_coeff: cu,
                const_coeff: cv,
            });
        }
    }
    Ok(RateReport {
        delta: cfg.delta,
        rows,
        fits,
    })
}

/// Entropy of a geometric law with success probability `p`, by direct series
/// summation until the remaining mass is below `tail`.
pub fn geometric_entropy_series(p: f64, tail: f64) -> f64 {
    let q = 1.0 - p;
    let mut h = 0.0;
    let mut prob = p;
    let mut mass = 0.0;
    while 1.0 - mass > tail {
        h -= prob * prob.log2();
        mass += prob;
        prob *= q;
    }
    h
}

/// Exact entropies of gamma and the side-information triple per blocklength,
/// with the max-entropy bounds they must satisfy.
pub fn run_entropy_check(dmc: &Dmc, cfg: &ExperimentConfig) -> Result<EntropyReport, BenchError> {
    cfg.validate()?;
    let q = Quantizer::new(cfg.delta)?;
    let log2e = std::f64::consts::LOG2_E;
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        let tables = GammaTables::build(dmc, &q, n)?;
        let h_gamma = tables.marginal().entropy();
        let tm = tables.triple_marginal();
        let h = |coord: usize| shannon_entropy(tm.coordinate_marginal(coord).values().copied());
        let (h_g1, h_g2, h_gg) = (h(0), h(1), h(2));
        let bound_g12 = (h_gamma + cfg.delta / 2.0).log2() + log2e;
        let bound_gg = (h_g1 + h_g2 + cfg.delta / 2.0).log2() + log2e;
        let tol = 1e-12;
        rows.push(EntropyRow {
            n,
            h_gamma,
            h_gbar1: h_g1,
            h_gbar2: h_g2,
            h_ggbar: h_gg,
            h_triple: tm.entropy(),
            bound_gbar: bound_g12,
            bound_ggbar: bound_gg,
            bounds_ok: h_g1 <= bound_g12 + tol && h_g2 <= bound_g12 + tol && h_gg <= bound_gg + tol,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).log2()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.h_gamma).collect();
    let (intercept, slope) = if rows.len() >= 2 {
        fit_line(&xs, &ys)
    } else {
        (f64::NAN, f64::NAN)
    };
    let geometric = [0.5, 0.1, 0.01]
        .into_iter()
        .map(|p| {
            let h = geometric_entropy_series(p, 1e-9);
            let bound = (1.0 / p).log2() + log2e;
            GeometricRow {
                p,
                entropy: h,
                bound,
                ok: h <= bound + 1e-9,
            }
        })
        .collect();
    Ok(EntropyReport {
        delta: cfg.delta,
        rows,
        slope,
        intercept,
        geometric,
    })
}
