//! Finite discrete memoryless channels.
//!
//! A [`Dmc`] couples an input distribution `p_X` with a row-stochastic channel
//! matrix `p_{Y|X}` over finite alphabets and exposes the exact single-letter
//! quantities the synthesis scheme is built on: the output marginal, the
//! base-2 log-likelihood ratio table, mutual information, the LLR variance,
//! and the singularity classifier.
//!
//! All logarithms are base 2; every information quantity is in bits.

use serde::Deserialize;
use thiserror::Error;

/// Tolerance for probability vectors summing to one.
pub const STOCHASTIC_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum DmcError {
    #[error("empty alphabet: {0}")]
    EmptyAlphabet(&'static str),
    #[error("negative entry {value} at {place}")]
    NegativeEntry { place: String, value: f64 },
    #[error("{place} sums to {sum}, off by more than {STOCHASTIC_TOL}")]
    NonStochastic { place: String, sum: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("channel spec: {0}")]
    Spec(String),
}

/// Counterexample to singularity: output `y` is reachable from both `x1` and
/// `x2` with different conditional likelihoods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SingularityWitness {
    pub y: usize,
    pub x1: usize,
    pub x2: usize,
}

/// A validated discrete memoryless channel with its input distribution.
#[derive(Debug, Clone)]
pub struct Dmc {
    px: Vec<f64>,
    pyx: Vec<Vec<f64>>,
    py: Vec<f64>,
}

/// Per-symbol base-2 log-likelihood ratios `lam(x, y) = log2(p(y|x) / p(y))`,
/// defined exactly on the support of the joint distribution.
#[derive(Debug, Clone)]
pub struct LlrTable {
    lam: Vec<Vec<f64>>,
    support: Vec<Vec<bool>>,
}

impl LlrTable {
    /// The LLR at `(x, y)`, or `None` off the joint support.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        if self.support[x][y] {
            Some(self.lam[x][y])
        } else {
            None
        }
    }

    #[inline]
    pub fn in_support(&self, x: usize, y: usize) -> bool {
        self.support[x][y]
    }

    /// Largest LLR over the joint support.
    pub fn max_llr(&self) -> f64 {
        let mut m = f64::NEG_INFINITY;
        for (row, srow) in self.lam.iter().zip(&self.support) {
            for (&v, &s) in row.iter().zip(srow) {
                if s && v > m {
                    m = v;
                }
            }
        }
        m
    }
}

fn check_vector(v: &[f64], place: &str) -> Result<(), DmcError> {
    let mut sum = 0.0;
    for (i, &p) in v.iter().enumerate() {
        if p < 0.0 || !p.is_finite() {
            return Err(DmcError::NegativeEntry {
                place: format!("{place}[{i}]"),
                value: p,
            });
        }
        sum += p;
    }
    if (sum - 1.0).abs() > STOCHASTIC_TOL {
        return Err(DmcError::NonStochastic {
            place: place.to_string(),
            sum,
        });
    }
    Ok(())
}

impl Dmc {
    /// Validates `(px, pyx)` and caches the output marginal.
    pub fn new(px: Vec<f64>, pyx: Vec<Vec<f64>>) -> Result<Self, DmcError> {
        if px.is_empty() {
            return Err(DmcError::EmptyAlphabet("px"));
        }
        if pyx.len() != px.len() {
            return Err(DmcError::Dimension(format!(
                "pyx has {} rows for {} input symbols",
                pyx.len(),
                px.len()
            )));
        }
        let y_size = pyx[0].len();
        if y_size == 0 {
            return Err(DmcError::EmptyAlphabet("pyx row"));
        }
        check_vector(&px, "px")?;
        for (x, row) in pyx.iter().enumerate() {
            if row.len() != y_size {
                return Err(DmcError::Dimension(format!(
                    "pyx row {x} has {} entries, expected {y_size}",
                    row.len()
                )));
            }
            check_vector(row, &format!("pyx[{x}]"))?;
        }
        let mut py = vec![0.0; y_size];
        for (x, row) in pyx.iter().enumerate() {
            for (y, &p) in row.iter().enumerate() {
                py[y] += px[x] * p;
            }
        }
        Ok(Dmc { px, pyx, py })
    }

    #[inline]
    pub fn x_size(&self) -> usize {
        self.px.len()
    }

    #[inline]
    pub fn y_size(&self) -> usize {
        self.py.len()
    }

    #[inline]
    pub fn px(&self) -> &[f64] {
        &self.px
    }

    #[inline]
    pub fn pyx(&self, x: usize) -> &[f64] {
        &self.pyx[x]
    }

    /// Output marginal `p_Y(y) = sum_x p_X(x) p_{Y|X}(y|x)`.
    #[inline]
    pub fn marginal_y(&self) -> &[f64] {
        &self.py
    }

    #[inline]
    pub fn joint(&self, x: usize, y: usize) -> f64 {
        self.px[x] * self.pyx[x][y]
    }

    /// Base-2 LLR table over the joint support.
    pub fn llr_table(&self) -> LlrTable {
        let mut lam = vec![vec![0.0; self.y_size()]; self.x_size()];
        let mut support = vec![vec![false; self.y_size()]; self.x_size()];
        for x in 0..self.x_size() {
            for y in 0..self.y_size() {
                if self.joint(x, y) > 0.0 {
                    support[x][y] = true;
                    lam[x][y] = (self.pyx[x][y] / self.py[y]).log2();
                }
            }
        }
        LlrTable { lam, support }
    }

    /// `I(X;Y)` in bits.
    pub fn mutual_information(&self) -> f64 {
        let mut mi = 0.0;
        for x in 0..self.x_size() {
            for y in 0..self.y_size() {
                let pxy = self.joint(x, y);
                if pxy > 0.0 {
                    mi += pxy * (self.pyx[x][y] / self.py[y]).log2();
                }
            }
        }
        mi
    }

    /// Variance of the single-letter LLR under the joint distribution, in bits^2.
    pub fn llr_sigma2(&self) -> f64 {
        let mi = self.mutual_information();
        let mut m2 = 0.0;
        for x in 0..self.x_size() {
            for y in 0..self.y_size() {
                let pxy = self.joint(x, y);
                if pxy > 0.0 {
                    let lam = (self.pyx[x][y] / self.py[y]).log2();
                    m2 += pxy * lam * lam;
                }
            }
        }
        (m2 - mi * mi).max(0.0)
    }

    /// Whether the LLR is a deterministic function of the output: every output
    /// reachable from two positive-probability inputs must be reached with the
    /// same conditional likelihood. Returns a witness when nonsingular.
    pub fn is_singular(&self) -> (bool, Option<SingularityWitness>) {
        for y in 0..self.y_size() {
            for x1 in 0..self.x_size() {
                for x2 in (x1 + 1)..self.x_size() {
                    if self.px[x1] * self.px[x2] == 0.0 {
                        continue;
                    }
                    let (a, b) = (self.pyx[x1][y], self.pyx[x2][y]);
                    if a * b > 0.0 && (a - b).abs() > STOCHASTIC_TOL {
                        return (false, Some(SingularityWitness { y, x1, x2 }));
                    }
                }
            }
        }
        (true, None)
    }

    /// Binary symmetric channel with flip probability `eps`, uniform input.
    pub fn bsc(eps: f64) -> Result<Self, DmcError> {
        Dmc::new(
            vec![0.5, 0.5],
            vec![vec![1.0 - eps, eps], vec![eps, 1.0 - eps]],
        )
    }

    /// Binary erasure channel with erasure probability `eps`, uniform input;
    /// output alphabet is `{0, 1, erasure}`.
    pub fn bec(eps: f64) -> Result<Self, DmcError> {
        Dmc::new(
            vec![0.5, 0.5],
            vec![vec![1.0 - eps, 0.0, eps], vec![0.0, 1.0 - eps, eps]],
        )
    }

    /// Noiseless identity channel on `k` symbols, uniform input.
    pub fn identity(k: usize) -> Result<Self, DmcError> {
        let px = vec![1.0 / k as f64; k];
        let pyx = (0..k)
            .map(|x| (0..k).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
            .collect();
        Dmc::new(px, pyx)
    }
}

#[derive(Deserialize)]
struct ChannelSpec {
    x_size: usize,
    y_size: usize,
    px: Vec<String>,
    pyx: Vec<Vec<String>>,
}

/// Parses the channel spec text format: a JSON document with `x_size`,
/// `y_size`, `px` (decimal strings) and `pyx` (rows of decimal strings).
pub fn parse_channel_spec(text: &str) -> Result<Dmc, DmcError> {
    let spec: ChannelSpec =
        serde_json::from_str(text).map_err(|e| DmcError::Spec(e.to_string()))?;
    if spec.px.len() != spec.x_size {
        return Err(DmcError::Spec(format!(
            "px has {} entries, x_size is {}",
            spec.px.len(),
            spec.x_size
        )));
    }
    if spec.pyx.len() != spec.x_size {
        return Err(DmcError::Spec(format!(
            "pyx has {} rows, x_size is {}",
            spec.pyx.len(),
            spec.x_size
        )));
    }
    let parse = |s: &str, place: &str| -> Result<f64, DmcError> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| DmcError::Spec(format!("bad decimal {s:?} in {place}")))
    };
    let px = spec
        .px
        .iter()
        .map(|s| parse(s, "px"))
        .collect::<Result<Vec<_>, _>>()?;
    let mut pyx = Vec::with_capacity(spec.x_size);
    for (x, row) in spec.pyx.iter().enumerate() {
        if row.len() != spec.y_size {
            return Err(DmcError::Spec(format!(
                "pyx row {x} has {} entries, y_size is {}",
                row.len(),
                spec.y_size
            )));
        }
        pyx.push(
            row.iter()
                .map(|s| parse(s, "pyx"))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    Dmc::new(px, pyx)
}
