//! Brute-force oracle: every distribution the type-class DP produces,
//! recomputed by direct enumeration over all `(x^n, y^n)` sequence pairs.
//!
//! Independent of the DP path on purpose: per-sequence LLR sums accumulate
//! position by position, type weights come from summing sequence
//! probabilities rather than multinomial formulas, and conditionals are
//! cross-checked for agreement across sequences of the same type.

use chansynth::dmc::Dmc;
use chansynth::llr::Quantizer;
use std::collections::BTreeMap;

pub type Pmf = BTreeMap<i64, f64>;

pub struct BruteType {
    pub weight: f64,
    pub cond: Pmf,
    pub triple_of_bin: BTreeMap<i64, (i64, i64, i64)>,
    pub class_prob: BTreeMap<(i64, i64), f64>,
    pub cond_given_class: BTreeMap<(i64, i64), Pmf>,
}

pub struct BruteForce {
    pub marginal: Pmf,
    pub types: BTreeMap<Vec<u32>, BruteType>,
    pub triple_marginal: BTreeMap<(i64, i64, i64), f64>,
}

fn sequences(size: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * size);
        for s in &out {
            for v in 0..size {
                let mut t = s.clone();
                t.push(v);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

pub fn brute_force(dmc: &Dmc, q: &Quantizer, n: usize) -> BruteForce {
    let lam = dmc.llr_table();
    let mut conds: BTreeMap<Vec<u32>, (f64, Pmf)> = BTreeMap::new();

    for xseq in sequences(dmc.x_size(), n) {
        let px: f64 = xseq.iter().map(|&x| dmc.px()[x]).product();
        if px == 0.0 {
            continue;
        }
        let mut cond: Pmf = BTreeMap::new();
        for yseq in sequences(dmc.y_size(), n) {
            let pyx: f64 = xseq.iter().zip(&yseq).map(|(&x, &y)| dmc.pyx(x)[y]).product();
            if pyx == 0.0 {
                continue;
            }
            let mut sum = 0.0;
            for (&x, &y) in xseq.iter().zip(&yseq) {
                sum += lam.get(x, y).expect("support");
            }
            let bin = q.quantize(sum).expect("clean test configuration");
            *cond.entry(bin.0).or_insert(0.0) += pyx;
        }
        let mut counts = vec![0u32; dmc.x_size()];
        for &x in &xseq {
            counts[x] += 1;
        }
        match conds.get_mut(&counts) {
            None => {
                conds.insert(counts, (px, cond));
            }
            Some((w, stored)) => {
                // The conditional law must depend on the sequence only
                // through its type.
                assert_eq!(stored.len(), cond.len());
                for (bin, p) in &cond {
                    assert!(
                        (stored[bin] - p).abs() < 1e-12,
                        "same-type sequences disagree at bin {bin}"
                    );
                }
                *w += px;
            }
        }
    }

    let mut marginal: Pmf = BTreeMap::new();
    for (w, cond) in conds.values() {
        for (&bin, &p) in cond {
            *marginal.entry(bin).or_insert(0.0) += w * p;
        }
    }

    let g2_of: BTreeMap<i64, i64> = marginal
        .iter()
        .map(|(&bin, &p)| (bin, q.quantize(-p.log2()).expect("clean").0))
        .collect();

    let mut types = BTreeMap::new();
    let mut triple_marginal: BTreeMap<(i64, i64, i64), f64> = BTreeMap::new();
    for (counts, (weight, cond)) in conds {
        let g1_of: BTreeMap<i64, i64> = cond
            .iter()
            .map(|(&bin, &p)| (bin, q.quantize(-p.log2()).expect("clean").0))
            .collect();
        let mut class_prob: BTreeMap<(i64, i64), f64> = BTreeMap::new();
        for (&bin, &p) in &cond {
            *class_prob.entry((g1_of[&bin], g2_of[&bin])).or_insert(0.0) += p;
        }
        let gg_of: BTreeMap<(i64, i64), i64> = class_prob
            .iter()
            .map(|(&k, &p)| (k, q.quantize(-p.log2()).expect("clean").0))
            .collect();
        let mut triple_of_bin = BTreeMap::new();
        let mut cond_given_class: BTreeMap<(i64, i64), Pmf> = BTreeMap::new();
        for (&bin, &p) in &cond {
            let key = (g1_of[&bin], g2_of[&bin]);
            triple_of_bin.insert(bin, (key.0, key.1, gg_of[&key]));
            cond_given_class
                .entry(key)
                .or_default()
                .insert(bin, p / class_prob[&key]);
        }
        for (&key, &p) in &class_prob {
            *triple_marginal
                .entry((key.0, key.1, gg_of[&key]))
                .or_insert(0.0) += weight * p;
        }
        types.insert(
            counts,
            BruteType {
                weight,
                cond,
                triple_of_bin,
                class_prob,
                cond_given_class,
            },
        );
    }

    BruteForce {
        marginal,
        types,
        triple_marginal,
    }
}

pub fn assert_pmf_close(label: &str, got: &Pmf, want: &Pmf, tol: f64) {
    assert_eq!(
        got.len(),
        want.len(),
        "{label}: support sizes differ ({} vs {})",
        got.len(),
        want.len()
    );
    for (bin, p) in want {
        let g = got.get(bin).copied().unwrap_or(f64::NAN);
        assert!(
            (g - p).abs() <= tol,
            "{label}: bin {bin} has {g}, oracle {p}"
        );
    }
}
