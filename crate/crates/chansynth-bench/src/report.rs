//! Report structures and CSV/JSON emission.
//!
//! Emission is deterministic: fixed column orders, decimals printed with 12
//! significant digits in CSV, and exact shortest-roundtrip floats in JSON so
//! a parsed report reproduces the original.

use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExactnessRow {
    pub scheme: String,
    pub n: usize,
    pub trials: u64,
    pub cells: usize,
    pub stat: f64,
    pub dof: usize,
    pub p_value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExactnessReport {
    pub significance: f64,
    pub corrupt_decoder: bool,
    pub rows: Vec<ExactnessRow>,
}

impl ExactnessReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RateRow {
    pub scheme: String,
    pub n: usize,
    pub trials: u64,
    pub mean_rate: f64,
    pub stderr: f64,
    pub mi: f64,
    pub h_gamma_over_n: f64,
    pub bound: f64,
    pub redundancy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RateFit {
    pub scheme: String,
    /// Coefficient on `log2(n) / n` in the redundancy fit.
    pub log_coeff: f64,
    /// Coefficient on `1 / n`.
    pub const_coeff: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RateReport {
    pub delta: f64,
    pub rows: Vec<RateRow>,
    pub fits: Vec<RateFit>,
}

impl RateReport {
    /// Every row within its exact bound plus Monte Carlo slack.
    pub fn all_within_bound(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.mean_rate <= r.bound + 3.0 * r.stderr)
    }

    pub fn fit_for(&self, scheme: &str) -> Option<&RateFit> {
        self.fits.iter().find(|f| f.scheme == scheme)
    }

    pub fn row(&self, scheme: &str, n: usize) -> Option<&RateRow> {
        self.rows.iter().find(|r| r.scheme == scheme && r.n == n)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EntropyRow {
    pub n: usize,
    pub h_gamma: f64,
    pub h_gbar1: f64,
    pub h_gbar2: f64,
    pub h_ggbar: f64,
    pub h_triple: f64,
    /// Max-entropy bound shared by gbar1 and gbar2.
    pub bound_gbar: f64,
    pub bound_ggbar: f64,
    pub bounds_ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GeometricRow {
    pub p: f64,
    pub entropy: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EntropyReport {
    pub delta: f64,
    pub rows: Vec<EntropyRow>,
    /// Regression slope of `H(Gamma)` against `log2 n`.
    pub slope: f64,
    pub intercept: f64,
    pub geometric: Vec<GeometricRow>,
}

impl EntropyReport {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.bounds_ok) && self.geometric.iter().all(|g| g.ok)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Json,
}

/// 12 significant digits, deterministic.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    format!("{:.11e}", x)
}

fn write_file(path: &Path, body: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(body.as_bytes())
}

/// The documented rate-sweep CSV schema. With more than one scheme in the
/// report, one file is written per scheme, suffixed with the scheme tag.
pub fn rate_csv(report: &RateReport, scheme: &str) -> String {
    let mut out = String::from("n,trials,mean_rate,stderr,mi,h_gamma_over_n,bound,redundancy\n");
    for r in report.rows.iter().filter(|r| r.scheme == scheme) {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.n,
            r.trials,
            fmt12(r.mean_rate),
            fmt12(r.stderr),
            fmt12(r.mi),
            fmt12(r.h_gamma_over_n),
            fmt12(r.bound),
            fmt12(r.redundancy),
        ));
    }
    out
}

/// Serializes a gamma pmf as `bin_index,bin_value,probability` rows.
pub fn pmf_csv(pmf: &chansynth::GammaPmf, q: &chansynth::Quantizer) -> String {
    let mut out = String::from("bin_index,bin_value,probability\n");
    for (bin, p) in pmf.iter() {
        out.push_str(&format!("{},{},{}\n", bin.0, fmt12(q.value(bin)), fmt12(p)));
    }
    out
}

pub fn emit_pmf(
    pmf: &chansynth::GammaPmf,
    q: &chansynth::Quantizer,
    path: &Path,
) -> std::io::Result<()> {
    write_file(path, &pmf_csv(pmf, q))
}

pub fn exactness_csv(report: &ExactnessReport) -> String {
    let mut out = String::from("scheme,n,trials,cells,stat,dof,p_value,pass\n");
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.scheme,
            r.n,
            r.trials,
            r.cells,
            fmt12(r.stat),
            r.dof,
            fmt12(r.p_value),
            r.pass,
        ));
    }
    out
}

pub fn entropy_csv(report: &EntropyReport) -> String {
    let mut out = String::from(
        "n,h_gamma,h_gbar1,h_gbar2,h_ggbar,h_triple,bound_gbar,bound_ggbar,bounds_ok\n",
    );
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.n,
            fmt12(r.h_gamma),
            fmt12(r.h_gbar1),
            fmt12(r.h_gbar2),
            fmt12(r.h_ggbar),
            fmt12(r.h_triple),
            fmt12(r.bound_gbar),
            fmt12(r.bound_ggbar),
            r.bounds_ok,
        ));
    }
    out
}

fn scheme_tags(report: &RateReport) -> Vec<String> {
    let mut tags: Vec<String> = Vec::new();
    for r in &report.rows {
        if !tags.contains(&r.scheme) {
            tags.push(r.scheme.clone());
        }
    }
    tags
}

fn with_tag(path: &Path, tag: &str) -> std::path::PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}.{tag}.{ext}"))
}

pub fn emit_rate(report: &RateReport, path: &Path, format: EmitFormat) -> std::io::Result<()> {
    match format {
        EmitFormat::Json => write_file(path, &serde_json::to_string_pretty(report)?),
        EmitFormat::Csv => {
            let tags = scheme_tags(report);
            if tags.len() <= 1 {
                let tag = tags.first().map(String::as_str).unwrap_or("two-stage");
                write_file(path, &rate_csv(report, tag))
            } else {
                for tag in tags {
                    write_file(&with_tag(path, &tag), &rate_csv(report, &tag))?;
                }
                Ok(())
            }
        }
    }
}

pub fn emit_exactness(
    report: &ExactnessReport,
    path: &Path,
    format: EmitFormat,
) -> std::io::Result<()> {
    match format {
        EmitFormat::Json => write_file(path, &serde_json::to_string_pretty(report)?),
        EmitFormat::Csv => write_file(path, &exactness_csv(report)),
    }
}

pub fn emit_entropy(
    report: &EntropyReport,
    path: &Path,
    format: EmitFormat,
) -> std::io::Result<()> {
    match format {
        EmitFormat::Json => write_file(path, &serde_json::to_string_pretty(report)?),
        EmitFormat::Csv => write_file(path, &entropy_csv(report)),
    }
}
