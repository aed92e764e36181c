//! Rejection sampling against deterministically re-derivable codebooks.
//!
//! A codebook is a lazily indexed i.i.d. sequence from a proposal law, keyed
//! by `(seed, domain)` so that encoder and decoder regenerate identical
//! entries from common randomness. [`rs_sample`] walks the codebook with an
//! explicit likelihood-ratio ceiling `M`: entry `i` is accepted when an
//! encoder-private uniform falls below `ratio(item_i) / M`, which makes the
//! accepted index geometric with mean `M` and the accepted item exactly
//! target-distributed.

use crate::stream::{Prng, StreamView};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SamplerError {
    #[error("likelihood ratio {ratio} exceeds ceiling {ceiling}")]
    CeilingViolation { ratio: f64, ceiling: f64 },
    #[error("no acceptance within {0} iterations")]
    IterationLimit(u64),
    #[error("ceiling {0} is not a valid LR bound (must be >= 1 and finite)")]
    InvalidCeiling(f64),
}

/// Inverse-CDF table over atoms in a fixed order.
#[derive(Debug, Clone)]
pub struct DiscreteCdf<T: Copy> {
    items: Vec<(T, f64)>,
}

impl<T: Copy> DiscreteCdf<T> {
    /// Builds from `(atom, probability)` pairs; the given order is the
    /// inversion order and must be identical on both sides of the channel.
    pub fn from_probs(pairs: impl IntoIterator<Item = (T, f64)>) -> Self {
        let mut cum = 0.0;
        let items = pairs
            .into_iter()
            .map(|(t, p)| {
                cum += p;
                (t, cum)
            })
            .collect();
        DiscreteCdf { items }
    }

    /// Maps a uniform variate in [0, 1) to an atom.
    #[inline]
    pub fn sample(&self, u: f64) -> T {
        let idx = self.items.partition_point(|&(_, c)| c <= u);
        self.items[idx.min(self.items.len() - 1)].0
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// A deterministic, lazily indexable i.i.d. codebook.
pub trait Codebook {
    type Item;

    /// The codeword at 1-based index `i`; a pure function of the codebook's
    /// `(seed, domain, i)`.
    fn item(&self, i: u64) -> Result<Self::Item, SamplerError>;

    /// Sequential walk `item(1), item(2), ...`; implementations whose `item`
    /// involves scanning override this with an incremental version.
    fn items(&self) -> Box<dyn Iterator<Item = Result<Self::Item, SamplerError>> + '_>
    where
        Self: Sized,
    {
        Box::new((1u64..).map(move |i| self.item(i)))
    }
}

/// Codebook of single atoms drawn by inverse CDF, one stream word per entry.
pub struct DiscreteCodebook<'a, T: Copy> {
    view: StreamView,
    cdf: &'a DiscreteCdf<T>,
}

impl<'a, T: Copy> DiscreteCodebook<'a, T> {
    pub fn new(seed: u64, domain: &[u8], cdf: &'a DiscreteCdf<T>) -> Self {
        DiscreteCodebook {
            view: StreamView::new(seed, domain),
            cdf,
        }
    }
}

impl<T: Copy> Codebook for DiscreteCodebook<'_, T> {
    type Item = T;

    #[inline]
    fn item(&self, i: u64) -> Result<T, SamplerError> {
        Ok(self.cdf.sample(self.view.unit(i)))
    }
}

/// Codebook of length-`n` sequences drawn i.i.d. per symbol, consuming `n`
/// stream words per entry.
pub struct SeqCodebook<'a> {
    view: StreamView,
    symbol_cdf: &'a DiscreteCdf<usize>,
    n: usize,
}

impl<'a> SeqCodebook<'a> {
    pub fn new(seed: u64, domain: &[u8], symbol_cdf: &'a DiscreteCdf<usize>, n: usize) -> Self {
        SeqCodebook {
            view: StreamView::new(seed, domain),
            symbol_cdf,
            n,
        }
    }

    #[inline]
    fn draw(&self, raw: u64) -> Vec<usize> {
        let base = (raw - 1) * self.n as u64;
        (0..self.n as u64)
            .map(|k| self.symbol_cdf.sample(self.view.unit(base + k + 1)))
            .collect()
    }
}

impl Codebook for SeqCodebook<'_> {
    type Item = Vec<usize>;

    #[inline]
    fn item(&self, i: u64) -> Result<Vec<usize>, SamplerError> {
        Ok(self.draw(i))
    }
}

/// Sequence codebook restricted to draws satisfying a predicate; the index
/// counts accepted entries only. Both sides run the same filter over the same
/// raw stream, so indices stay aligned while discards cost only common
/// randomness.
pub struct FilteredSeqCodebook<'a, F: Fn(&[usize]) -> bool> {
    inner: SeqCodebook<'a>,
    filter: F,
    scan_limit: u64,
}

impl<'a, F: Fn(&[usize]) -> bool> FilteredSeqCodebook<'a, F> {
    pub fn new(
        seed: u64,
        domain: &[u8],
        symbol_cdf: &'a DiscreteCdf<usize>,
        n: usize,
        filter: F,
        scan_limit: u64,
    ) -> Self {
        FilteredSeqCodebook {
            inner: SeqCodebook::new(seed, domain, symbol_cdf, n),
            filter,
            scan_limit,
        }
    }
}

impl<F: Fn(&[usize]) -> bool> Codebook for FilteredSeqCodebook<'_, F> {
    type Item = Vec<usize>;

    fn item(&self, i: u64) -> Result<Vec<usize>, SamplerError> {
        let mut seen = 0u64;
        for raw in 1..=self.scan_limit {
            let y = self.inner.draw(raw);
            if (self.filter)(&y) {
                seen += 1;
                if seen == i {
                    return Ok(y);
                }
            }
        }
        Err(SamplerError::IterationLimit(self.scan_limit))
    }

    fn items(&self) -> Box<dyn Iterator<Item = Result<Vec<usize>, SamplerError>> + '_> {
        let mut raw = 0u64;
        Box::new(std::iter::from_fn(move || loop {
            raw += 1;
            if raw > self.scan_limit {
                return Some(Err(SamplerError::IterationLimit(self.scan_limit)));
            }
            let y = self.inner.draw(raw);
            if (self.filter)(&y) {
                return Some(Ok(y));
            }
        }))
    }
}

/// Acceptance rule: a target/proposal likelihood ratio and its ceiling.
pub struct AcceptRule<F> {
    pub ratio: F,
    pub ceiling: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleResult<T> {
    /// 1-based accepted index; geometric with mean equal to the ceiling.
    pub index: u64,
    pub item: T,
}

/// Relative slack on ceiling checks; ceilings are derived with at least a
/// whole quantizer step to spare, so anything past rounding noise is a logic
/// error upstream.
pub const CEILING_TOL: f64 = 1e-9;

/// Walks the codebook and returns the first entry whose acceptance test
/// passes. `urand` must be independent of the codebook stream.
pub fn rs_sample<C, F>(
    cb: &C,
    rule: &AcceptRule<F>,
    urand: &mut Prng,
    iteration_limit: u64,
) -> Result<SampleResult<C::Item>, SamplerError>
where
    C: Codebook,
    F: Fn(&C::Item) -> f64,
{
    if !rule.ceiling.is_finite() || rule.ceiling < 1.0 {
        return Err(SamplerError::InvalidCeiling(rule.ceiling));
    }
    for (i, item) in (1u64..).zip(cb.items()) {
        if i > iteration_limit {
            return Err(SamplerError::IterationLimit(iteration_limit));
        }
        let item = item?;
        let ratio = (rule.ratio)(&item);
        if ratio > rule.ceiling * (1.0 + CEILING_TOL) {
            return Err(SamplerError::CeilingViolation {
                ratio,
                ceiling: rule.ceiling,
            });
        }
        if urand.next_unit() * rule.ceiling < ratio {
            return Ok(SampleResult { index: i, item });
        }
    }
    unreachable!("codebook iterators are infinite")
}
