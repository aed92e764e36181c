//! Prefix-free entropy codes: Golomb codes for geometric index laws and a
//! deterministic Huffman code for finite side-information alphabets.
//!
//! Golomb parameters follow the classical Gallager–van Voorhis optimality
//! rule. Huffman construction uses a fixed tie-break (lowest probability
//! first, then lexicographically smallest contained support element) so that
//! encoder and decoder build identical codebooks independently.

use crate::bits::{BitReader, BitString, BitsError};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodeError {
    #[error("parameter outside domain: {0}")]
    DomainError(String),
    #[error("empty support")]
    EmptySupport,
    #[error("malformed bitstream: {0}")]
    MalformedBitstream(String),
    #[error(transparent)]
    Bits(#[from] BitsError),
}

/// Optimal Golomb parameter for a geometric law with success probability `p`:
/// the unique `m >= 1` with `(1-p)^m + (1-p)^(m+1) <= 1 < (1-p)^(m-1) + (1-p)^m`.
///
/// Parameters are 128-bit: rejection-sampling ceilings grow like
/// `2^(n I(X;Y))`, which pushes past u64 at moderate blocklengths.
pub fn golomb_param_for(p: f64) -> Result<u128, CodeError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(CodeError::DomainError(format!(
            "success probability {p} not in (0, 1)"
        )));
    }
    if p < 1e-36 {
        return Err(CodeError::DomainError(format!(
            "success probability {p} too small for a representable parameter"
        )));
    }
    // ln(1-p) evaluated without cancellation; q^m = exp(m ln(1-p)) stays
    // accurate for parameters far beyond i32 exponents.
    let ln_q = (-p).ln_1p();
    let q = 1.0 - p;
    let ok = |m: u128| (m as f64 * ln_q).exp() * (1.0 + q) <= 1.0;
    // The predicate is monotone in m; bracket then bisect for the minimal m.
    let mut hi = {
        let guess = ((1.0 + q).ln() / -ln_q).ceil();
        if guess.is_finite() && guess >= 1.0 {
            guess as u128
        } else {
            1
        }
    };
    while !ok(hi) {
        hi = hi.saturating_mul(2);
    }
    let mut lo = 1u128;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// Golomb code over positive integers `k >= 1`: unary quotient
/// (`q` ones, one zero) followed by the truncated-binary remainder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GolombCode {
    m: u128,
    bits_hi: u32,
    cutoff: u128,
}

impl GolombCode {
    pub fn new(m: u128) -> Result<Self, CodeError> {
        if m < 1 {
            return Err(CodeError::DomainError("golomb m must be >= 1".into()));
        }
        let bits_hi = 128 - (m - 1).leading_zeros().min(127);
        let bits_hi = if m == 1 { 0 } else { bits_hi.max(1) };
        let cutoff = (1u128 << bits_hi) - m;
        Ok(GolombCode { m, bits_hi, cutoff })
    }

    /// Golomb code with parameter optimal for geometric success probability `p`.
    pub fn for_success_prob(p: f64) -> Result<Self, CodeError> {
        GolombCode::new(golomb_param_for(p)?)
    }

    #[inline]
    pub fn m(&self) -> u128 {
        self.m
    }

    pub fn encode(&self, k: u128, out: &mut BitString) -> Result<usize, CodeError> {
        if k < 1 {
            return Err(CodeError::DomainError("golomb indices are 1-based".into()));
        }
        let v = k - 1;
        let quot = v / self.m;
        let rem = v % self.m;
        let before = out.len();
        for _ in 0..quot {
            out.push(true);
        }
        out.push(false);
        if self.m > 1 {
            if rem < self.cutoff {
                out.push_bits_wide(rem, self.bits_hi - 1);
            } else {
                out.push_bits_wide(rem + self.cutoff, self.bits_hi);
            }
        }
        Ok(out.len() - before)
    }

    pub fn decode(&self, r: &mut BitReader) -> Result<u128, CodeError> {
        let mut quot: u128 = 0;
        while r.read_bit()? {
            quot += 1;
            if quot > (1 << 64) {
                return Err(CodeError::MalformedBitstream(
                    "unary run exceeds sane bounds".into(),
                ));
            }
        }
        let rem = if self.m == 1 {
            0
        } else {
            let hi = r.read_bits_wide(self.bits_hi - 1)?;
            if hi < self.cutoff {
                hi
            } else {
                (hi << 1 | u128::from(r.read_bit()?)) - self.cutoff
            }
        };
        Ok(quot * self.m + rem + 1)
    }

    /// Codeword length in bits for `k`.
    pub fn len(&self, k: u128) -> usize {
        debug_assert!(k >= 1);
        let v = k - 1;
        let rem_bits = if self.m == 1 {
            0
        } else if v % self.m < self.cutoff {
            self.bits_hi - 1
        } else {
            self.bits_hi
        };
        (v / self.m) as usize + 1 + rem_bits as usize
    }
}

#[derive(Debug, Clone)]
enum HuffNode {
    Leaf(u32),
    Branch(u32, u32),
}

/// Prefix-free Huffman code over a finite ordered support.
///
/// A single-atom support uses the zero-length codeword convention: encoding
/// emits nothing and decoding consumes nothing.
#[derive(Debug, Clone)]
pub struct HuffmanCode<K: Ord + Clone> {
    symbols: Vec<K>,
    codewords: Vec<BitString>,
    nodes: Vec<HuffNode>,
    root: u32,
}

impl<K: Ord + Clone> HuffmanCode<K> {
    /// Builds the code from a pmf over a finite support.
    ///
    /// Merging always picks the two lowest-probability subtrees; ties are
    /// broken by the lexicographically smallest support element contained in
    /// the subtree, and the smaller of the pair becomes the 0-branch.
    pub fn build(pmf: &[(K, f64)]) -> Result<Self, CodeError> {
        if pmf.is_empty() {
            return Err(CodeError::EmptySupport);
        }
        if pmf.iter().any(|(_, p)| p.is_nan() || *p <= 0.0) {
            return Err(CodeError::DomainError("pmf atoms must be positive".into()));
        }
        let mut entries: Vec<(K, f64)> = pmf.to_vec();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(CodeError::DomainError("duplicate support element".into()));
        }

        let symbols: Vec<K> = entries.iter().map(|(k, _)| k.clone()).collect();

        // (prob, index of smallest contained symbol, node); min_sym values
        // are distinct across live subtrees, so the order is total and the
        // merge sequence is fully determined.
        struct Item {
            prob: f64,
            min_sym: u32,
            node: u32,
        }
        impl PartialEq for Item {
            fn eq(&self, other: &Self) -> bool {
                self.prob.total_cmp(&other.prob).is_eq() && self.min_sym == other.min_sym
            }
        }
        impl Eq for Item {}
        impl Ord for Item {
            fn cmp(&self, other: &Self) -> std::cmp::Ordering {
                // Reversed: BinaryHeap is a max-heap, we pop the minimum.
                other
                    .prob
                    .total_cmp(&self.prob)
                    .then(other.min_sym.cmp(&self.min_sym))
            }
        }
        impl PartialOrd for Item {
            fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
                Some(self.cmp(other))
            }
        }
        let mut nodes: Vec<HuffNode> = Vec::new();
        let mut heap = std::collections::BinaryHeap::with_capacity(entries.len());
        for (i, (_, p)) in entries.iter().enumerate() {
            nodes.push(HuffNode::Leaf(i as u32));
            heap.push(Item {
                prob: *p,
                min_sym: i as u32,
                node: i as u32,
            });
        }
        while heap.len() > 1 {
            let a = heap.pop().unwrap();
            let b = heap.pop().unwrap();
            let merged = Item {
                prob: a.prob + b.prob,
                min_sym: a.min_sym.min(b.min_sym),
                node: nodes.len() as u32,
            };
            nodes.push(HuffNode::Branch(a.node, b.node));
            heap.push(merged);
        }
        let root = heap.pop().unwrap().node;

        let mut codewords = vec![BitString::new(); symbols.len()];
        if symbols.len() > 1 {
            let mut stack = vec![(root, BitString::new())];
            while let Some((n, prefix)) = stack.pop() {
                match nodes[n as usize] {
                    HuffNode::Leaf(s) => codewords[s as usize] = prefix,
                    HuffNode::Branch(a, b) => {
                        let mut pa = prefix.clone();
                        pa.push(false);
                        stack.push((a, pa));
                        let mut pb = prefix;
                        pb.push(true);
                        stack.push((b, pb));
                    }
                }
            }
        }
        Ok(HuffmanCode {
            symbols,
            codewords,
            nodes,
            root,
        })
    }

    pub fn encode(&self, key: &K, out: &mut BitString) -> Result<usize, CodeError> {
        let i = self
            .symbols
            .binary_search(key)
            .map_err(|_| CodeError::DomainError("symbol outside code support".into()))?;
        out.extend(&self.codewords[i]);
        Ok(self.codewords[i].len())
    }

    pub fn decode(&self, r: &mut BitReader) -> Result<K, CodeError> {
        let mut n = self.root;
        loop {
            match self.nodes[n as usize] {
                HuffNode::Leaf(s) => return Ok(self.symbols[s as usize].clone()),
                HuffNode::Branch(a, b) => {
                    n = if r.read_bit()? { b } else { a };
                }
            }
        }
    }

    pub fn codeword_len(&self, key: &K) -> Option<usize> {
        self.symbols
            .binary_search(key)
            .ok()
            .map(|i| self.codewords[i].len())
    }

    /// Codeword lengths in support order.
    pub fn lengths(&self) -> Vec<usize> {
        self.codewords.iter().map(BitString::len).collect()
    }

    pub fn max_depth(&self) -> usize {
        self.lengths().into_iter().max().unwrap_or(0)
    }

    /// Expected codeword length under `pmf`, in bits.
    pub fn expected_length(&self, pmf: &[(K, f64)]) -> f64 {
        pmf.iter()
            .map(|(k, p)| p * self.codeword_len(k).expect("symbol in support") as f64)
            .sum()
    }
}

/// Exact dyadic Kraft sum `sum 2^-len` of a length profile, as a fraction
/// `numerator / 2^shift`. Panics if lengths exceed 120 bits.
pub fn kraft_sum_dyadic(lengths: &[usize]) -> (u128, u32) {
    let shift = lengths.iter().copied().max().unwrap_or(0) as u32;
    assert!(shift <= 120, "length profile too deep for exact dyadic sum");
    let num = lengths
        .iter()
        .map(|&l| 1u128 << (shift - l as u32))
        .sum::<u128>();
    (num, shift)
}
