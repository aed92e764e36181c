//! Exact distributions of the quantized blockwise log-likelihood ratio.
//!
//! For a blocklength `n`, the LLR sum `sum_i lam(x_i, Y_i)` conditioned on an
//! input sequence depends on the sequence only through its empirical type, so
//! conditional laws are computed by enumerating per-symbol output count
//! vectors with exact multinomial weights and convolving across input
//! symbols. Binning happens once per distinct accumulated sum, after the
//! convolution, so identical multisets of LLR terms land in the same bin and
//! boundary collisions are detected rather than silently tie-broken.
//!
//! On top of the conditional and marginal laws of the quantized LLR `Gamma`,
//! this module derives the side-information variables transmitted by the
//! auxiliary scheme: the quantized negative log-probabilities of `Gamma`
//! under the conditional and marginal laws (`g1`, `g2`) and of the induced
//! `(g1, g2)` pair (`gg`).

use crate::dmc::Dmc;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LlrError {
    #[error("quantizer step must be positive and finite, got {0}")]
    InvalidDelta(f64),
    #[error("value {value} indistinguishable from a bin edge at delta {delta}; choose a different delta")]
    BinBoundaryAmbiguity { value: f64, delta: f64 },
    #[error("conditioning on zero-probability event: {0}")]
    ZeroProbabilityConditioning(String),
    #[error("invalid type: {0}")]
    BadType(String),
    #[error("llr sum is not finite")]
    NonFinite,
}

/// Signed quantizer bin index; the bin covers `[j*delta, (j+1)*delta)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bin(pub i64);

/// Uniform left-closed quantizer with step `delta` (bits).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantizer {
    delta: f64,
}

impl Quantizer {
    pub fn new(delta: f64) -> Result<Self, LlrError> {
        if !delta.is_finite() || delta <= 0.0 {
            return Err(LlrError::InvalidDelta(delta));
        }
        Ok(Quantizer { delta })
    }

    #[inline]
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Left endpoint of the bin, `j * delta`.
    #[inline]
    pub fn value(&self, bin: Bin) -> f64 {
        bin.0 as f64 * self.delta
    }

    /// Maps `v` to the bin with `j*delta <= v < (j+1)*delta`.
    ///
    /// Values that are exactly representable lattice points map to their own
    /// bin; values within 1e-9 of a bin edge without being exact are rejected
    /// as ambiguous, since platforms could disagree on the side.
    pub fn quantize(&self, v: f64) -> Result<Bin, LlrError> {
        if !v.is_finite() {
            return Err(LlrError::NonFinite);
        }
        let r = v / self.delta;
        if r.abs() >= 9.0e15 {
            return Err(LlrError::NonFinite);
        }
        let nearest = r.round();
        if r == nearest {
            return Ok(Bin(r as i64));
        }
        if (r - nearest).abs() < 1e-9 {
            return Err(LlrError::BinBoundaryAmbiguity {
                value: v,
                delta: self.delta,
            });
        }
        Ok(Bin(r.floor() as i64))
    }
}

/// Finite pmf over quantizer bins; atoms are strictly positive.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GammaPmf {
    atoms: BTreeMap<i64, f64>,
}

impl GammaPmf {
    pub fn from_atoms(atoms: BTreeMap<i64, f64>) -> Self {
        GammaPmf { atoms }
    }

    #[inline]
    pub fn prob(&self, bin: Bin) -> f64 {
        self.atoms.get(&bin.0).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Bin, f64)> + '_ {
        self.atoms.iter().map(|(&j, &p)| (Bin(j), p))
    }

    #[inline]
    pub fn support_len(&self) -> usize {
        self.atoms.len()
    }

    pub fn total(&self) -> f64 {
        self.atoms.values().sum()
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        shannon_entropy(self.atoms.values().copied())
    }

    /// Expectation of the bin left endpoints.
    pub fn mean_value(&self, q: &Quantizer) -> f64 {
        self.iter().map(|(b, p)| p * q.value(b)).sum()
    }
}

/// Entropy in bits of an arbitrary collection of probabilities.
pub fn shannon_entropy(probs: impl Iterator<Item = f64>) -> f64 {
    probs
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

/// Empirical type of an input sequence: per-symbol occurrence counts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct XType {
    counts: Vec<u32>,
}

impl XType {
    pub fn new(counts: Vec<u32>) -> Self {
        XType { counts }
    }

    pub fn from_sequence(xseq: &[usize], x_size: usize) -> Self {
        let mut counts = vec![0u32; x_size];
        for &x in xseq {
            counts[x] += 1;
        }
        XType { counts }
    }

    #[inline]
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }
}

/// The side-information triple for one `(type, gamma)` pair: quantized
/// negative log-probabilities of gamma under the conditional law (`g1`), the
/// marginal law (`g2`), and of the `(g1, g2)` pair under the conditional law
/// (`gg`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BarTriple {
    pub g1: Bin,
    pub g2: Bin,
    pub gg: Bin,
}

impl BarTriple {
    #[inline]
    pub fn key(&self) -> (i64, i64, i64) {
        (self.g1.0, self.g2.0, self.gg.0)
    }

    pub fn from_key(k: (i64, i64, i64)) -> Self {
        BarTriple {
            g1: Bin(k.0),
            g2: Bin(k.1),
            gg: Bin(k.2),
        }
    }

    /// `gbar = g2 - g1` in bits; may be negative.
    #[inline]
    pub fn gbar_value(&self, q: &Quantizer) -> f64 {
        q.value(self.g2) - q.value(self.g1)
    }
}

/// Exact joint pmf of the side-information triple.
#[derive(Debug, Clone, Default)]
pub struct TriplePmf {
    atoms: BTreeMap<(i64, i64, i64), f64>,
}

impl TriplePmf {
    pub fn iter(&self) -> impl Iterator<Item = (BarTriple, f64)> + '_ {
        self.atoms.iter().map(|(&k, &p)| (BarTriple::from_key(k), p))
    }

    pub fn prob(&self, t: &BarTriple) -> f64 {
        self.atoms.get(&t.key()).copied().unwrap_or(0.0)
    }

    #[inline]
    pub fn support_len(&self) -> usize {
        self.atoms.len()
    }

    pub fn total(&self) -> f64 {
        self.atoms.values().sum()
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(self.atoms.values().copied())
    }

    /// Marginal pmf of one coordinate (0 -> g1, 1 -> g2, 2 -> gg).
    pub fn coordinate_marginal(&self, coord: usize) -> BTreeMap<i64, f64> {
        let mut out = BTreeMap::new();
        for (&(a, b, c), &p) in &self.atoms {
            let k = [a, b, c][coord];
            *out.entry(k).or_insert(0.0) += p;
        }
        out
    }
}

/// Exact binomial coefficient in u128, or `None` on overflow.
fn binom_u128(n: u32, k: u32) -> Option<u128> {
    let k = k.min(n - k.min(n));
    let mut c: u128 = 1;
    for i in 1..=u128::from(k) {
        c = c.checked_mul(u128::from(n) - u128::from(k) + i)? / i;
    }
    Some(c)
}

/// Multinomial coefficient `total! / prod parts!` as f64; exact through u128
/// with a log-space fallback for very large counts.
fn multinomial_coeff(total: u32, parts: &[u32]) -> f64 {
    let exact = (|| {
        let mut c: u128 = 1;
        let mut rem = total;
        for &p in parts {
            c = c.checked_mul(binom_u128(rem, p)?)?;
            rem -= p;
        }
        Some(c)
    })();
    match exact {
        Some(c) => c as f64,
        None => {
            let log2_fact = |m: u32| -> f64 { (2..=m).map(|j| f64::from(j).log2()).sum() };
            let mut l = log2_fact(total);
            for &p in parts {
                l -= log2_fact(p);
            }
            l.exp2()
        }
    }
}

/// Probability that an i.i.d. draw of length `t.n()` from `px` has type `t`.
pub fn type_probability(dmc: &Dmc, t: &XType) -> f64 {
    let counts = t.counts();
    let n = t.n() as u32;
    let mut p = multinomial_coeff(n, counts);
    for (x, &c) in counts.iter().enumerate() {
        if c > 0 {
            p *= dmc.px()[x].powi(c as i32);
        }
    }
    p
}

/// All types of blocklength `n` supported on `{x : px(x) > 0}`, in
/// lexicographic count order.
pub fn enumerate_types(dmc: &Dmc, n: usize) -> Vec<XType> {
    let live: Vec<usize> = (0..dmc.x_size()).filter(|&x| dmc.px()[x] > 0.0).collect();
    let mut out = Vec::new();
    let mut counts = vec![0u32; dmc.x_size()];
    fn rec(
        live: &[usize],
        pos: usize,
        left: u32,
        counts: &mut Vec<u32>,
        out: &mut Vec<XType>,
    ) {
        if pos + 1 == live.len() {
            counts[live[pos]] = left;
            out.push(XType::new(counts.clone()));
            counts[live[pos]] = 0;
            return;
        }
        for c in 0..=left {
            counts[live[pos]] = c;
            rec(live, pos + 1, left - c, counts, out);
        }
        counts[live[pos]] = 0;
    }
    if !live.is_empty() {
        rec(&live, 0, n as u32, &mut counts, &mut out);
    }
    out
}

/// Distribution of an accumulated LLR sum before binning: `(sum, prob)` pairs
/// with distinct sums, sorted ascending.
type SumDist = Vec<(f64, f64)>;

fn merge_into(map: &mut BTreeMap<u64, (f64, f64)>, sum: f64, prob: f64) {
    // Keyed by the total-order bit pattern so equal f64 sums merge exactly.
    let key = {
        let b = sum.to_bits();
        // Flip to make the bit pattern order-preserving for signed floats.
        if b >> 63 == 1 {
            !b
        } else {
            b ^ (1 << 63)
        }
    };
    let e = map.entry(key).or_insert((sum, 0.0));
    e.1 += prob;
}

/// LLR-sum distribution contributed by `count` i.i.d. uses of input `x`.
fn symbol_sum_dist(dmc: &Dmc, x: usize, count: u32) -> SumDist {
    let lam = dmc.llr_table();
    let live: Vec<usize> = (0..dmc.y_size())
        .filter(|&y| dmc.pyx(x)[y] > 0.0)
        .collect();
    let mut map = BTreeMap::new();
    let mut parts = vec![0u32; live.len()];
    #[allow(clippy::too_many_arguments)]
    fn rec(
        dmc: &Dmc,
        lam: &crate::dmc::LlrTable,
        x: usize,
        live: &[usize],
        pos: usize,
        left: u32,
        parts: &mut Vec<u32>,
        map: &mut BTreeMap<u64, (f64, f64)>,
    ) {
        if pos + 1 == live.len() {
            parts[pos] = left;
            let total: u32 = parts.iter().sum();
            let mut prob = multinomial_coeff(total, parts);
            let mut sum = 0.0;
            for (i, &y) in live.iter().enumerate() {
                if parts[i] > 0 {
                    prob *= dmc.pyx(x)[y].powi(parts[i] as i32);
                    sum += f64::from(parts[i]) * lam.get(x, y).expect("live output");
                }
            }
            if prob > 0.0 {
                merge_into(map, sum, prob);
            }
            parts[pos] = 0;
            return;
        }
        for c in 0..=left {
            parts[pos] = c;
            rec(dmc, lam, x, live, pos + 1, left - c, parts, map);
        }
        parts[pos] = 0;
    }
    rec(dmc, &lam, x, &live, 0, count, &mut parts, &mut map);
    map.into_values().collect()
}

fn convolve(a: &SumDist, b: &SumDist) -> SumDist {
    let mut map = BTreeMap::new();
    for &(sa, pa) in a {
        for &(sb, pb) in b {
            merge_into(&mut map, sa + sb, pa * pb);
        }
    }
    map.into_values().collect()
}

fn validate_type(dmc: &Dmc, n: usize, t: &XType) -> Result<(), LlrError> {
    if t.counts().len() != dmc.x_size() {
        return Err(LlrError::BadType(format!(
            "type over {} symbols for an alphabet of {}",
            t.counts().len(),
            dmc.x_size()
        )));
    }
    if t.n() != n {
        return Err(LlrError::BadType(format!(
            "type has n = {}, expected {n}",
            t.n()
        )));
    }
    for (x, &c) in t.counts().iter().enumerate() {
        if c > 0 && dmc.px()[x] == 0.0 {
            return Err(LlrError::BadType(format!(
                "symbol {x} has zero source probability"
            )));
        }
    }
    Ok(())
}

/// Unbinned LLR-sum distribution conditioned on the type.
pub fn llr_sum_dist_given_xtype(dmc: &Dmc, n: usize, t: &XType) -> Result<SumDist, LlrError> {
    validate_type(dmc, n, t)?;
    let mut acc: SumDist = vec![(0.0, 1.0)];
    for (x, &c) in t.counts().iter().enumerate() {
        if c > 0 {
            let sd = symbol_sum_dist(dmc, x, c);
            acc = convolve(&acc, &sd);
        }
    }
    Ok(acc)
}

/// Unbinned LLR-sum distribution marginalized over the source.
pub fn llr_sum_dist(dmc: &Dmc, n: usize) -> Result<SumDist, LlrError> {
    let mut map = BTreeMap::new();
    for t in enumerate_types(dmc, n) {
        let w = type_probability(dmc, &t);
        if w == 0.0 {
            continue;
        }
        for (s, p) in llr_sum_dist_given_xtype(dmc, n, &t)? {
            merge_into(&mut map, s, w * p);
        }
    }
    Ok(map.into_values().collect())
}

fn bin_sum_dist(q: &Quantizer, dist: &SumDist) -> Result<GammaPmf, LlrError> {
    let mut atoms = BTreeMap::new();
    for &(s, p) in dist {
        let bin = q.quantize(s)?;
        *atoms.entry(bin.0).or_insert(0.0) += p;
    }
    Ok(GammaPmf { atoms })
}

/// Exact pmf of the quantized LLR conditioned on an input sequence of type `t`.
pub fn gamma_given_xtype(
    dmc: &Dmc,
    q: &Quantizer,
    n: usize,
    t: &XType,
) -> Result<GammaPmf, LlrError> {
    bin_sum_dist(q, &llr_sum_dist_given_xtype(dmc, n, t)?)
}

/// Exact marginal pmf of the quantized LLR at blocklength `n`.
pub fn gamma_marginal(dmc: &Dmc, q: &Quantizer, n: usize) -> Result<GammaPmf, LlrError> {
    bin_sum_dist(q, &llr_sum_dist(dmc, n)?)
}

/// Per-class tables for one `(g1, g2)` value of a fixed type.
#[derive(Debug, Clone)]
pub struct ClassTable {
    /// `p_{g1,g2 | type}` of this class.
    pub prob: f64,
    /// Quantized negative log of `prob`.
    pub gg: Bin,
    /// `p_{Gamma | type, g1, g2}`: the conditional restricted to the class.
    pub cond_gamma: GammaPmf,
}

/// All per-type derived tables.
#[derive(Debug, Clone)]
pub struct TypeTables {
    pub type_prob: f64,
    /// `p_{Gamma | type}`.
    pub cond: GammaPmf,
    /// gamma bin -> g1 bin.
    pub g1_of_bin: BTreeMap<i64, Bin>,
    /// `(g1, g2)` -> class tables.
    pub classes: BTreeMap<(i64, i64), ClassTable>,
}

/// Precomputed exact distributions for a `(channel, quantizer, blocklength)`
/// configuration: the marginal law of the quantized LLR, per-type conditional
/// laws, and everything needed to form and invert the side-information triple.
#[derive(Debug, Clone)]
pub struct GammaTables {
    n: usize,
    quantizer: Quantizer,
    marginal: GammaPmf,
    /// gamma bin -> g2 bin (marginal is type-independent).
    g2_of_bin: BTreeMap<i64, Bin>,
    types: BTreeMap<XType, TypeTables>,
    triple_marginal: TriplePmf,
}

impl GammaTables {
    pub fn build(dmc: &Dmc, q: &Quantizer, n: usize) -> Result<Self, LlrError> {
        if n == 0 {
            return Err(LlrError::BadType("blocklength must be >= 1".into()));
        }
        let mut conds: Vec<(XType, f64, GammaPmf)> = Vec::new();
        for t in enumerate_types(dmc, n) {
            let w = type_probability(dmc, &t);
            if w == 0.0 {
                continue;
            }
            let cond = gamma_given_xtype(dmc, q, n, &t)?;
            conds.push((t, w, cond));
        }

        let mut marg_atoms: BTreeMap<i64, f64> = BTreeMap::new();
        for (_, w, cond) in &conds {
            for (bin, p) in cond.iter() {
                *marg_atoms.entry(bin.0).or_insert(0.0) += w * p;
            }
        }
        let marginal = GammaPmf { atoms: marg_atoms };

        let mut g2_of_bin = BTreeMap::new();
        for (bin, p) in marginal.iter() {
            g2_of_bin.insert(bin.0, q.quantize(-p.log2())?);
        }

        let mut types = BTreeMap::new();
        let mut triple_atoms: BTreeMap<(i64, i64, i64), f64> = BTreeMap::new();
        for (t, w, cond) in conds {
            let mut g1_of_bin = BTreeMap::new();
            let mut class_members: BTreeMap<(i64, i64), Vec<(i64, f64)>> = BTreeMap::new();
            for (bin, p) in cond.iter() {
                let g1 = q.quantize(-p.log2())?;
                let g2 = g2_of_bin[&bin.0];
                g1_of_bin.insert(bin.0, g1);
                class_members
                    .entry((g1.0, g2.0))
                    .or_default()
                    .push((bin.0, p));
            }
            let mut classes = BTreeMap::new();
            for (key, members) in class_members {
                let prob: f64 = members.iter().map(|&(_, p)| p).sum();
                let gg = q.quantize(-prob.log2())?;
                let cond_gamma = GammaPmf {
                    atoms: members.iter().map(|&(b, p)| (b, p / prob)).collect(),
                };
                *triple_atoms.entry((key.0, key.1, gg.0)).or_insert(0.0) += w * prob;
                classes.insert(
                    key,
                    ClassTable {
                        prob,
                        gg,
                        cond_gamma,
                    },
                );
            }
            types.insert(
                t,
                TypeTables {
                    type_prob: w,
                    cond,
                    g1_of_bin,
                    classes,
                },
            );
        }

        Ok(GammaTables {
            n,
            quantizer: *q,
            marginal,
            g2_of_bin,
            types,
            triple_marginal: TriplePmf {
                atoms: triple_atoms,
            },
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn quantizer(&self) -> &Quantizer {
        &self.quantizer
    }

    /// `p_Gamma`, the auxiliary-codebook proposal law.
    #[inline]
    pub fn marginal(&self) -> &GammaPmf {
        &self.marginal
    }

    pub fn type_tables(&self, t: &XType) -> Result<&TypeTables, LlrError> {
        self.types.get(t).ok_or_else(|| {
            LlrError::ZeroProbabilityConditioning(format!("type {:?} has no mass", t.counts()))
        })
    }

    pub fn types(&self) -> impl Iterator<Item = (&XType, &TypeTables)> {
        self.types.iter()
    }

    /// `p_{Gamma | type}`.
    pub fn conditional(&self, t: &XType) -> Result<&GammaPmf, LlrError> {
        Ok(&self.type_tables(t)?.cond)
    }

    /// g2 bin of a marginal-support gamma bin.
    pub fn g2_of(&self, gamma: Bin) -> Result<Bin, LlrError> {
        self.g2_of_bin.get(&gamma.0).copied().ok_or_else(|| {
            LlrError::ZeroProbabilityConditioning(format!(
                "gamma bin {} outside marginal support",
                gamma.0
            ))
        })
    }

    /// The side-information triple for `(type, gamma)`.
    pub fn bar_triple(&self, t: &XType, gamma: Bin) -> Result<BarTriple, LlrError> {
        let tt = self.type_tables(t)?;
        let g1 = *tt.g1_of_bin.get(&gamma.0).ok_or_else(|| {
            LlrError::ZeroProbabilityConditioning(format!(
                "gamma bin {} has zero conditional probability",
                gamma.0
            ))
        })?;
        let g2 = self.g2_of(gamma)?;
        let gg = tt.classes[&(g1.0, g2.0)].gg;
        Ok(BarTriple { g1, g2, gg })
    }

    /// Exact marginal pmf of the triple over source types and gamma.
    #[inline]
    pub fn triple_marginal(&self) -> &TriplePmf {
        &self.triple_marginal
    }

    /// `p_{Gamma | type, g1, g2}`: the conditional restricted to the class of
    /// the triple and renormalized.
    pub fn cond_gamma_given_triple(
        &self,
        t: &XType,
        triple: &BarTriple,
    ) -> Result<&GammaPmf, LlrError> {
        let tt = self.type_tables(t)?;
        let class = tt
            .classes
            .get(&(triple.g1.0, triple.g2.0))
            .ok_or_else(|| {
                LlrError::ZeroProbabilityConditioning(format!(
                    "class ({}, {}) has zero probability for this type",
                    triple.g1.0, triple.g2.0
                ))
            })?;
        if class.gg != triple.gg {
            return Err(LlrError::ZeroProbabilityConditioning(format!(
                "gg bin {} inconsistent with class (expected {})",
                triple.gg.0, class.gg.0
            )));
        }
        Ok(&class.cond_gamma)
    }

    pub fn class(&self, t: &XType, g1: Bin, g2: Bin) -> Result<&ClassTable, LlrError> {
        self.type_tables(t)?
            .classes
            .get(&(g1.0, g2.0))
            .ok_or_else(|| {
                LlrError::ZeroProbabilityConditioning(format!(
                    "class ({}, {}) has zero probability for this type",
                    g1.0, g2.0
                ))
            })
    }
}
