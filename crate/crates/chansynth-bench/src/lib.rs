//! Experiment harness for the channel synthesis toolkit.
//!
//! Three experiments, each exposed as a library call and a CLI verb:
//! - exactness: end-to-end encode/decode trials, chi-square goodness of fit
//!   of the empirical joint against the exact target channel;
//! - rate-sweep: mean transcript length per symbol across blocklengths with
//!   exact bound columns and a redundancy fit in `log2(n)/n` and `1/n`;
//! - entropy-check: exact entropies of the quantized LLR and its
//!   side-information triple against their max-entropy bounds.

pub mod experiments;
pub mod report;
pub mod stats;

pub use experiments::{
    run_entropy_check, run_exactness, run_rate_sweep, BenchError, ExperimentConfig, SchemeKind,
    SchemeSelector,
};
pub use report::{EmitFormat, EntropyReport, ExactnessReport, RateReport};
