//! Two-stage exact channel synthesis.
//!
//! The encoder first simulates the quantized-LLR channel (the auxiliary
//! scheme): it draws the side-information triple from its conditional law,
//! sends it losslessly with a Huffman code, then rejection-samples a gamma
//! realization from a common-randomness codebook drawn from the gamma
//! marginal, sending the accepted index with a Golomb code matched to the
//! ceiling. The primary scheme then rejection-samples the output sequence
//! from a codebook drawn from `p_{Y^n | Gamma}` (singular channels) or
//! `p_{Y^n}` (nonsingular), again Golomb-coding the index. The decoder
//! recomputes every ceiling from decoded side information and regenerates
//! the accepted codewords from the shared seed.
//!
//! All ceilings are powers of two of quantized quantities:
//! `tau_aux = 2^(gbar + 3*delta + gg)`, `tau_s = 2^(gamma - gbar + 2*delta)`,
//! `tau_ns = 2^(gamma + g1 + 2*delta)`.

use crate::bits::{BitReader, BitString, BitsError};
use crate::codes::{CodeError, GolombCode, HuffmanCode};
use crate::dmc::{Dmc, LlrTable};
use crate::llr::{BarTriple, Bin, GammaTables, LlrError, Quantizer, XType};
use crate::sampler::{
    rs_sample, AcceptRule, Codebook, DiscreteCdf, DiscreteCodebook, FilteredSeqCodebook,
    SamplerError, SeqCodebook,
};
use crate::stream::Prng;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("input symbol {0} has zero source probability")]
    ZeroProbabilitySymbol(usize),
    #[error("input sequence has length {got}, expected {want}")]
    BadLength { got: usize, want: usize },
    #[error("force-singular mode requires a singular channel")]
    NotSingular,
    #[error("transcript has {0} trailing bits")]
    MalformedBitstream(usize),
    #[error(transparent)]
    Llr(#[from] LlrError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Bits(#[from] BitsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeMode {
    /// Resolve the proposal from the channel's singularity.
    Auto,
    /// Use the gamma-conditional proposal; invalid for nonsingular channels.
    ForceSingular,
    /// Use the output-marginal proposal; valid for every channel.
    ForceNonsingular,
}

#[derive(Debug, Clone)]
pub struct SchemeConfig {
    pub dmc: Dmc,
    pub n: usize,
    pub delta: f64,
    pub mode: SchemeMode,
    pub seed: u64,
    pub iteration_limit: u64,
}

pub const DEFAULT_ITERATION_LIMIT: u64 = 1_000_000_000;

impl SchemeConfig {
    pub fn new(dmc: Dmc, n: usize) -> Self {
        SchemeConfig {
            dmc,
            n,
            delta: 0.5,
            mode: SchemeMode::Auto,
            seed: 0,
            iteration_limit: DEFAULT_ITERATION_LIMIT,
        }
    }
}

/// Which proposal the primary scheme used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Proposal {
    #[serde(rename = "conditional-on-gamma")]
    ConditionalOnGamma,
    #[serde(rename = "output-marginal")]
    OutputMarginal,
}

/// One encoded message: the triple, K and J segments back to back.
#[derive(Debug, Clone)]
pub struct Transcript {
    pub bits: BitString,
    pub len_triple: usize,
    pub len_k: usize,
    pub len_j: usize,
}

/// Full record of one encode run.
#[derive(Debug, Clone, Serialize)]
pub struct SchemeTrace {
    pub gamma_bin: i64,
    /// Triple values in bits (bin left endpoints).
    pub g1: f64,
    pub g2: f64,
    pub gg: f64,
    pub tau_aux: f64,
    pub tau: f64,
    #[serde(rename = "K")]
    pub k: u64,
    #[serde(rename = "J")]
    pub j: u64,
    pub len_triple: usize,
    #[serde(rename = "len_K")]
    pub len_k: usize,
    #[serde(rename = "len_J")]
    pub len_j: usize,
    pub proposal: Proposal,
    /// The accepted output sequence (what the decoder will reproduce).
    #[serde(skip)]
    pub accepted: Vec<usize>,
}

/// Segment lengths of one trial, for rate measurement.
#[derive(Debug, Clone, Copy)]
pub struct TrialLengths {
    pub len_triple: usize,
    pub len_k: usize,
    pub len_j: usize,
}

impl TrialLengths {
    #[inline]
    pub fn total(&self) -> usize {
        self.len_triple + self.len_k + self.len_j
    }
}

struct TypeCdfs {
    cond: DiscreteCdf<i64>,
    class_targets: BTreeMap<(i64, i64), DiscreteCdf<i64>>,
}

/// A ready-to-run synthesis scheme for one `(channel, n, delta)` configuration.
///
/// Construction precomputes every exact distribution; `encode`/`decode` are
/// then pure in `(seed, inputs)` and safe to call from many threads.
pub struct Scheme {
    cfg: SchemeConfig,
    quantizer: Quantizer,
    tables: GammaTables,
    singular: bool,
    huffman: HuffmanCode<(i64, i64, i64)>,
    lam: LlrTable,
    /// Per-output LLR for singular channels (NaN where unreachable).
    lam_y: Option<Vec<f64>>,
    y_cdf: DiscreteCdf<usize>,
    marginal_cdf: DiscreteCdf<i64>,
    type_cdfs: BTreeMap<XType, TypeCdfs>,
}

fn primary_domain(gamma: Bin) -> Vec<u8> {
    let mut d = b"primary/".to_vec();
    d.extend_from_slice(&gamma.0.to_le_bytes());
    d
}

/// Exact inverse-CDF sample of a geometric law with success probability `p`
/// (support 1, 2, ...), from one uniform variate. 128 bits of headroom: the
/// mean is the rejection-sampling ceiling, which can exceed u64 range.
pub fn geometric_index(u: f64, p: f64) -> u128 {
    if p >= 1.0 {
        return 1;
    }
    let k = ((1.0 - u).ln() / (-p).ln_1p()).ceil();
    if k < 1.0 {
        1
    } else {
        k as u128
    }
}

fn golomb_for_ceiling(tau: f64) -> Result<GolombCode, CodeError> {
    if tau <= 1.0 {
        GolombCode::new(1)
    } else {
        GolombCode::for_success_prob(1.0 / tau)
    }
}

impl Scheme {
    pub fn new(cfg: SchemeConfig) -> Result<Self, SchemeError> {
        let quantizer = Quantizer::new(cfg.delta)?;
        let channel_singular = cfg.dmc.is_singular().0;
        let singular = match cfg.mode {
            SchemeMode::Auto => channel_singular,
            SchemeMode::ForceSingular => {
                if !channel_singular {
                    return Err(SchemeError::NotSingular);
                }
                true
            }
            SchemeMode::ForceNonsingular => false,
        };
        let tables = GammaTables::build(&cfg.dmc, &quantizer, cfg.n)?;
        let triple_pmf: Vec<((i64, i64, i64), f64)> = tables
            .triple_marginal()
            .iter()
            .map(|(t, p)| (t.key(), p))
            .collect();
        let huffman = HuffmanCode::build(&triple_pmf)?;
        let lam = cfg.dmc.llr_table();
        let lam_y = if singular {
            let v = (0..cfg.dmc.y_size())
                .map(|y| {
                    (0..cfg.dmc.x_size())
                        .find(|&x| cfg.dmc.joint(x, y) > 0.0)
                        .and_then(|x| lam.get(x, y))
                        .unwrap_or(f64::NAN)
                })
                .collect();
            Some(v)
        } else {
            None
        };
        let y_cdf = DiscreteCdf::from_probs(
            cfg.dmc
                .marginal_y()
                .iter()
                .enumerate()
                .map(|(y, &p)| (y, p)),
        );
        let marginal_cdf =
            DiscreteCdf::from_probs(tables.marginal().iter().map(|(b, p)| (b.0, p)));
        let mut type_cdfs = BTreeMap::new();
        for (t, tt) in tables.types() {
            let cond = DiscreteCdf::from_probs(tt.cond.iter().map(|(b, p)| (b.0, p)));
            let class_targets = tt
                .classes
                .iter()
                .map(|(&key, class)| {
                    (
                        key,
                        DiscreteCdf::from_probs(class.cond_gamma.iter().map(|(b, p)| (b.0, p))),
                    )
                })
                .collect();
            type_cdfs.insert(
                t.clone(),
                TypeCdfs {
                    cond,
                    class_targets,
                },
            );
        }
        Ok(Scheme {
            cfg,
            quantizer,
            tables,
            singular,
            huffman,
            lam,
            lam_y,
            y_cdf,
            marginal_cdf,
            type_cdfs,
        })
    }

    #[inline]
    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    #[inline]
    pub fn quantizer(&self) -> &Quantizer {
        &self.quantizer
    }

    #[inline]
    pub fn tables(&self) -> &GammaTables {
        &self.tables
    }

    /// Whether the primary proposal conditions on gamma.
    #[inline]
    pub fn is_singular_mode(&self) -> bool {
        self.singular
    }

    /// `tau_aux = 2^(gbar + 3*delta + gg)`.
    pub fn tau_aux(&self, triple: &BarTriple) -> f64 {
        let q = &self.quantizer;
        (triple.gbar_value(q) + 3.0 * q.delta() + q.value(triple.gg)).exp2()
    }

    /// Primary ceiling: `2^(gamma - gbar + 2*delta)` when conditioning on
    /// gamma, `2^(gamma + g1 + 2*delta)` otherwise.
    pub fn tau_primary(&self, gamma: Bin, triple: &BarTriple) -> f64 {
        let q = &self.quantizer;
        let gamma_v = q.value(gamma);
        if self.singular {
            (gamma_v - triple.gbar_value(q) + 2.0 * q.delta()).exp2()
        } else {
            (gamma_v + q.value(triple.g1) + 2.0 * q.delta()).exp2()
        }
    }

    fn validate_input(&self, xseq: &[usize]) -> Result<XType, SchemeError> {
        if xseq.len() != self.cfg.n {
            return Err(SchemeError::BadLength {
                got: xseq.len(),
                want: self.cfg.n,
            });
        }
        for &x in xseq {
            if x >= self.cfg.dmc.x_size() || self.cfg.dmc.px()[x] == 0.0 {
                return Err(SchemeError::ZeroProbabilitySymbol(x));
            }
        }
        Ok(XType::from_sequence(xseq, self.cfg.dmc.x_size()))
    }

    /// Quantized LLR bin of an output sequence alone; defined for singular
    /// channels. Accumulates `count * lam` per output symbol in symbol order,
    /// mirroring the table computation.
    fn gamma_bin_of_output(&self, yseq: &[usize]) -> Option<Bin> {
        let lam_y = self.lam_y.as_ref().expect("singular mode");
        let mut counts = vec![0u32; self.cfg.dmc.y_size()];
        for &y in yseq {
            counts[y] += 1;
        }
        let mut sum = 0.0;
        for (y, &c) in counts.iter().enumerate() {
            if c > 0 {
                let l = lam_y[y];
                if l.is_nan() {
                    return None;
                }
                sum += f64::from(c) * l;
            }
        }
        // An ambiguous bin here means the draw straddles an edge the tables
        // never produced; treating it as a mismatch keeps both sides aligned.
        self.quantizer.quantize(sum).ok()
    }

    /// Target/proposal likelihood ratio of the primary scheme at `yseq`,
    /// given the input sequence and the gamma realization. Zero off the
    /// target support (including gamma-bin mismatches).
    pub fn primary_lr(
        &self,
        xseq: &[usize],
        gamma: Bin,
        yseq: &[usize],
    ) -> Result<f64, SchemeError> {
        let t = self.validate_input(xseq)?;
        if yseq.len() != xseq.len() {
            return Err(SchemeError::BadLength {
                got: yseq.len(),
                want: xseq.len(),
            });
        }
        let cond_p = self.tables.conditional(&t)?.prob(gamma);
        if cond_p == 0.0 {
            return Err(SchemeError::Llr(LlrError::ZeroProbabilityConditioning(
                format!("gamma bin {} for this type", gamma.0),
            )));
        }
        let marg_p = self.tables.marginal().prob(gamma);
        Ok(self.lr_at(xseq, gamma, cond_p, marg_p, yseq))
    }

    /// Ratio evaluation with the per-trace constants already resolved.
    fn lr_at(&self, xseq: &[usize], gamma: Bin, cond_p: f64, marg_p: f64, yseq: &[usize]) -> f64 {
        let x_size = self.cfg.dmc.x_size();
        let y_size = self.cfg.dmc.y_size();
        let mut counts = vec![0u32; x_size * y_size];
        for (&x, &y) in xseq.iter().zip(yseq) {
            if !self.lam.in_support(x, y) {
                return 0.0;
            }
            counts[x * y_size + y] += 1;
        }
        let mut sum = 0.0;
        for x in 0..x_size {
            let mut sub = 0.0;
            for y in 0..y_size {
                let c = counts[x * y_size + y];
                if c > 0 {
                    sub += f64::from(c) * self.lam.get(x, y).expect("support");
                }
            }
            sum += sub;
        }
        match self.quantizer.quantize(sum) {
            Ok(bin) if bin == gamma => {
                if self.singular {
                    sum.exp2() * marg_p / cond_p
                } else {
                    sum.exp2() / cond_p
                }
            }
            _ => 0.0,
        }
    }

    /// Encode under the configured common-randomness seed.
    pub fn encode(
        &self,
        xseq: &[usize],
        prng: &mut Prng,
    ) -> Result<(Transcript, SchemeTrace), SchemeError> {
        self.encode_with_seed(self.cfg.seed, xseq, prng)
    }

    /// Encode with an explicit seed (per-trial seeds in sweeps).
    pub fn encode_with_seed(
        &self,
        seed: u64,
        xseq: &[usize],
        prng: &mut Prng,
    ) -> Result<(Transcript, SchemeTrace), SchemeError> {
        let t = self.validate_input(xseq)?;
        let tcdfs = self.type_cdfs.get(&t).ok_or_else(|| {
            LlrError::ZeroProbabilityConditioning("input type has no mass".into())
        })?;

        // Ghost draw fixes the side-information triple with its exact
        // conditional law; the transmitted gamma is re-drawn below.
        let ghost = Bin(tcdfs.cond.sample(prng.next_unit()));
        let triple = self.tables.bar_triple(&t, ghost)?;

        let mut bits = BitString::new();
        let len_triple = self.huffman.encode(&triple.key(), &mut bits)?;

        // Auxiliary scheme: target p_{Gamma | type, g1, g2}, proposal p_Gamma.
        let tau_aux = self.tau_aux(&triple);
        let class = self.tables.class(&t, triple.g1, triple.g2)?;
        let aux_cb = DiscreteCodebook::new(seed, b"aux", &self.marginal_cdf);
        let marginal = self.tables.marginal();
        let aux_rule = AcceptRule {
            ratio: |&g: &i64| class.cond_gamma.prob(Bin(g)) / marginal.prob(Bin(g)),
            ceiling: tau_aux,
        };
        let aux = rs_sample(&aux_cb, &aux_rule, prng, self.cfg.iteration_limit)?;
        let gamma = Bin(aux.item);
        let golomb_aux = golomb_for_ceiling(tau_aux)?;
        let len_k = golomb_aux.encode(aux.index.into(), &mut bits)?;

        // Primary scheme.
        let tau = self.tau_primary(gamma, &triple);
        let cond_p = self.tables.conditional(&t)?.prob(gamma);
        let marg_p = marginal.prob(gamma);
        let cb = self.primary_codebook(seed, gamma);
        let rule = AcceptRule {
            ratio: |y: &Vec<usize>| self.lr_at(xseq, gamma, cond_p, marg_p, y),
            ceiling: tau,
        };
        let primary = match &cb {
            PrimaryCodebook::Conditional(c) => rs_sample(c, &rule, prng, self.cfg.iteration_limit),
            PrimaryCodebook::Marginal(c) => rs_sample(c, &rule, prng, self.cfg.iteration_limit),
        }?;
        let golomb = golomb_for_ceiling(tau)?;
        let len_j = golomb.encode(primary.index.into(), &mut bits)?;

        let q = &self.quantizer;
        let trace = SchemeTrace {
            gamma_bin: gamma.0,
            g1: q.value(triple.g1),
            g2: q.value(triple.g2),
            gg: q.value(triple.gg),
            tau_aux,
            tau,
            k: aux.index,
            j: primary.index,
            len_triple,
            len_k,
            len_j,
            proposal: if self.singular {
                Proposal::ConditionalOnGamma
            } else {
                Proposal::OutputMarginal
            },
            accepted: primary.item,
        };
        Ok((
            Transcript {
                bits,
                len_triple,
                len_k,
                len_j,
            },
            trace,
        ))
    }

    /// The primary-stage proposal codebook for a given gamma realization:
    /// `p_{Y^n | Gamma}` realized by filtering `p_{Y^n}` draws on the gamma
    /// bin (singular mode), or plain `p_{Y^n}` (nonsingular).
    pub fn primary_codebook(&self, seed: u64, gamma: Bin) -> PrimaryCodebook<'_> {
        let domain = primary_domain(gamma);
        if self.singular {
            PrimaryCodebook::Conditional(FilteredSeqCodebook::new(
                seed,
                &domain,
                &self.y_cdf,
                self.cfg.n,
                Box::new(move |y: &[usize]| self.gamma_bin_of_output(y) == Some(gamma)),
                self.cfg.iteration_limit,
            ))
        } else {
            PrimaryCodebook::Marginal(SeqCodebook::new(seed, &domain, &self.y_cdf, self.cfg.n))
        }
    }

    /// Decode under the configured seed.
    pub fn decode(&self, bits: &BitString) -> Result<Vec<usize>, SchemeError> {
        self.decode_with_seed(self.cfg.seed, bits)
    }

    pub fn decode_with_seed(&self, seed: u64, bits: &BitString) -> Result<Vec<usize>, SchemeError> {
        self.decode_impl(seed, bits, 0)
    }

    /// Negative-control hook: decodes with the primary index shifted, which
    /// must break distributional exactness. Guards goodness-of-fit harnesses
    /// against vacuous passes.
    pub fn decode_with_seed_corrupted(
        &self,
        seed: u64,
        bits: &BitString,
    ) -> Result<Vec<usize>, SchemeError> {
        self.decode_impl(seed, bits, 1)
    }

    fn decode_impl(
        &self,
        seed: u64,
        bits: &BitString,
        index_shift: u64,
    ) -> Result<Vec<usize>, SchemeError> {
        let mut reader = BitReader::new(bits);
        let triple = BarTriple::from_key(self.huffman.decode(&mut reader)?);
        let tau_aux = self.tau_aux(&triple);
        let golomb_aux = golomb_for_ceiling(tau_aux)?;
        let k = u64::try_from(golomb_aux.decode(&mut reader)?)
            .map_err(|_| CodeError::MalformedBitstream("index K out of range".into()))?;
        let aux_cb = DiscreteCodebook::new(seed, b"aux", &self.marginal_cdf);
        let gamma = Bin(aux_cb.item(k)?);

        let tau = self.tau_primary(gamma, &triple);
        let golomb = golomb_for_ceiling(tau)?;
        let j = u64::try_from(golomb.decode(&mut reader)?.saturating_add(index_shift.into()))
            .map_err(|_| CodeError::MalformedBitstream("index J out of range".into()))?;
        let cb = self.primary_codebook(seed, gamma);
        let y = match &cb {
            PrimaryCodebook::Conditional(c) => c.item(j),
            PrimaryCodebook::Marginal(c) => c.item(j),
        }?;
        if reader.remaining() != 0 {
            return Err(SchemeError::MalformedBitstream(reader.remaining()));
        }
        Ok(y)
    }

    /// Samples the per-stage laws the full scheme induces and returns only
    /// the segment lengths. Distributionally identical to measuring
    /// `encode` (the accepted index is independent of the accepted item and
    /// exactly geometric given the trace), but costs O(1) per trial instead
    /// of a number of codebook draws exponential in `n I(X;Y)`.
    pub fn sample_rate_trial(
        &self,
        xseq: &[usize],
        prng: &mut Prng,
    ) -> Result<TrialLengths, SchemeError> {
        let t = self.validate_input(xseq)?;
        let tcdfs = self.type_cdfs.get(&t).ok_or_else(|| {
            LlrError::ZeroProbabilityConditioning("input type has no mass".into())
        })?;
        let ghost = Bin(tcdfs.cond.sample(prng.next_unit()));
        let triple = self.tables.bar_triple(&t, ghost)?;
        let len_triple = self
            .huffman
            .codeword_len(&triple.key())
            .expect("triple in marginal support");

        let tau_aux = self.tau_aux(&triple);
        let k = geometric_index(prng.next_unit(), (1.0 / tau_aux).min(1.0));
        let len_k = golomb_for_ceiling(tau_aux)?.len(k);

        let gamma = Bin(
            tcdfs.class_targets[&(triple.g1.0, triple.g2.0)].sample(prng.next_unit()),
        );
        let tau = self.tau_primary(gamma, &triple);
        let j = geometric_index(prng.next_unit(), (1.0 / tau).min(1.0));
        let len_j = golomb_for_ceiling(tau)?.len(j);

        Ok(TrialLengths {
            len_triple,
            len_k,
            len_j,
        })
    }

    /// One-stage baseline ceiling: `2^(n * max-support-LLR)`, computable by
    /// both sides from the channel alone.
    pub fn baseline_ceiling(&self) -> f64 {
        (self.cfg.n as f64 * self.lam.max_llr()).exp2()
    }

    /// One-stage baseline: rejection-sample `y^n ~ p_{Y^n|X^n}` directly
    /// against a `p_{Y^n}` codebook and Golomb-code the index.
    pub fn baseline_encode(
        &self,
        xseq: &[usize],
        prng: &mut Prng,
    ) -> Result<(Transcript, Vec<usize>), SchemeError> {
        self.baseline_encode_with_seed(self.cfg.seed, xseq, prng)
    }

    pub fn baseline_encode_with_seed(
        &self,
        seed: u64,
        xseq: &[usize],
        prng: &mut Prng,
    ) -> Result<(Transcript, Vec<usize>), SchemeError> {
        self.validate_input(xseq)?;
        let m_base = self.baseline_ceiling();
        let cb = SeqCodebook::new(seed, b"baseline", &self.y_cdf, self.cfg.n);
        let rule = AcceptRule {
            ratio: |y: &Vec<usize>| self.llr_ratio_plain(xseq, y),
            ceiling: m_base,
        };
        let got = rs_sample(&cb, &rule, prng, self.cfg.iteration_limit)?;
        let mut bits = BitString::new();
        let len_j = golomb_for_ceiling(m_base)?.encode(got.index.into(), &mut bits)?;
        Ok((
            Transcript {
                bits,
                len_triple: 0,
                len_k: 0,
                len_j,
            },
            got.item,
        ))
    }

    pub fn baseline_decode(&self, bits: &BitString) -> Result<Vec<usize>, SchemeError> {
        self.baseline_decode_with_seed(self.cfg.seed, bits)
    }

    pub fn baseline_decode_with_seed(
        &self,
        seed: u64,
        bits: &BitString,
    ) -> Result<Vec<usize>, SchemeError> {
        let m_base = self.baseline_ceiling();
        let mut reader = BitReader::new(bits);
        let j = u64::try_from(golomb_for_ceiling(m_base)?.decode(&mut reader)?)
            .map_err(|_| CodeError::MalformedBitstream("index J out of range".into()))?;
        let cb = SeqCodebook::new(seed, b"baseline", &self.y_cdf, self.cfg.n);
        let y = cb.item(j)?;
        if reader.remaining() != 0 {
            return Err(SchemeError::MalformedBitstream(reader.remaining()));
        }
        Ok(y)
    }

    /// Length-only baseline trial; the index law given the input is exactly
    /// geometric with mean `baseline_ceiling()`.
    pub fn baseline_rate_trial(&self, prng: &mut Prng) -> Result<TrialLengths, SchemeError> {
        let m_base = self.baseline_ceiling();
        let j = geometric_index(prng.next_unit(), (1.0 / m_base).min(1.0));
        let len_j = golomb_for_ceiling(m_base)?.len(j);
        Ok(TrialLengths {
            len_triple: 0,
            len_k: 0,
            len_j,
        })
    }

    /// `p_{Y^n|X^n}(y|x) / p_{Y^n}(y)` with no gamma conditioning.
    fn llr_ratio_plain(&self, xseq: &[usize], yseq: &[usize]) -> f64 {
        let mut sum = 0.0;
        for (&x, &y) in xseq.iter().zip(yseq) {
            match self.lam.get(x, y) {
                Some(l) => sum += l,
                None => return 0.0,
            }
        }
        sum.exp2()
    }

    /// Exact worst-case audit of the auxiliary ceilings: for every type and
    /// side-information class, the maximum target/proposal ratio over the
    /// gamma support must stay below `tau_aux`.
    pub fn audit_aux_ceilings(&self) -> Result<(), SchemeError> {
        for (_, tt) in self.tables.types() {
            for (&(g1, g2), class) in &tt.classes {
                let triple = BarTriple::from_key((g1, g2, class.gg.0));
                let tau_aux = self.tau_aux(&triple);
                for (bin, p) in class.cond_gamma.iter() {
                    let ratio = p / self.tables.marginal().prob(bin);
                    if ratio > tau_aux * (1.0 + crate::sampler::CEILING_TOL) {
                        return Err(SchemeError::Sampler(SamplerError::CeilingViolation {
                            ratio,
                            ceiling: tau_aux,
                        }));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Predicate deciding whether a raw proposal draw belongs to the codebook.
pub type SeqFilter<'a> = Box<dyn Fn(&[usize]) -> bool + 'a>;

/// The primary proposal: filtered (singular) or plain i.i.d. (nonsingular).
pub enum PrimaryCodebook<'a> {
    Conditional(FilteredSeqCodebook<'a, SeqFilter<'a>>),
    Marginal(SeqCodebook<'a>),
}

impl PrimaryCodebook<'_> {
    pub fn item(&self, i: u64) -> Result<Vec<usize>, SamplerError> {
        match self {
            PrimaryCodebook::Conditional(c) => c.item(i),
            PrimaryCodebook::Marginal(c) => c.item(i),
        }
    }
}
