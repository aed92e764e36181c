//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its headline numbers and asserting the stated tolerances and runtime
//! budgets. Criteria serialize on a global lock so the timings are honest.
//!
//! Raw sweep CSVs are archived under the cargo target tmpdir for inspection.

mod oracle;

use chansynth::dmc::Dmc;
use chansynth::llr::{enumerate_types, type_probability, Quantizer};
use chansynth::sampler::{rs_sample, AcceptRule, DiscreteCdf, DiscreteCodebook};
use chansynth::scheme::{Scheme, SchemeConfig};
use chansynth::stream::{derive_seed, Prng};
use chansynth_bench::report::{emit_rate, EmitFormat};
use chansynth_bench::stats::chi_square_gof;
use chansynth_bench::{run_entropy_check, run_exactness, run_rate_sweep, ExperimentConfig, SchemeSelector};
use rayon::prelude::*;
use std::sync::Mutex;
use std::time::Instant;

static SERIAL: Mutex<()> = Mutex::new(());

fn channels_under_test() -> Vec<(&'static str, Dmc)> {
    vec![
        ("bsc(0.11)", Dmc::bsc(0.11).unwrap()),
        ("bsc(0.3)", Dmc::bsc(0.3).unwrap()),
        ("bsc(0.5)", Dmc::bsc(0.5).unwrap()),
        ("bec(0.5)", Dmc::bec(0.5).unwrap()),
        ("identity", Dmc::identity(2).unwrap()),
    ]
}

fn scheme_for(dmc: &Dmc, n: usize) -> Scheme {
    Scheme::new(SchemeConfig::new(dmc.clone(), n)).unwrap()
}

#[test]
fn criterion_1_rejection_sampler_law() {
    let _lock = SERIAL.lock().unwrap();
    let started = Instant::now();

    let target = [0.5f64, 0.3, 0.2];
    let proposal = [1.0f64 / 3.0, 1.0 / 3.0, 1.0 / 3.0];
    let m = 2.0;
    let trials: u64 = 1_000_000;
    let max_i: u64 = 20;
    let cdf = DiscreteCdf::from_probs(proposal.iter().copied().enumerate());

    let (counts, sum_i, sum_i2) = (0..trials)
        .into_par_iter()
        .fold(
            || (vec![0u64; 3 * (max_i as usize + 1)], 0u128, 0u128),
            |(mut counts, si, si2), trial| {
                let seed = derive_seed(101, b"rs-law", trial + 1);
                let cb = DiscreteCodebook::new(seed, b"cb", &cdf);
                let rule = AcceptRule {
                    ratio: |&s: &usize| target[s] / proposal[s],
                    ceiling: m,
                };
                let mut urand = Prng::new(seed, b"private");
                let got = rs_sample(&cb, &rule, &mut urand, 10_000_000).unwrap();
                let i_cell = (got.index.min(max_i + 1) - 1) as usize;
                counts[got.item * (max_i as usize + 1) + i_cell] += 1;
                (
                    counts,
                    si + u128::from(got.index),
                    si2 + u128::from(got.index) * u128::from(got.index),
                )
            },
        )
        .reduce(
            || (vec![0u64; 3 * (max_i as usize + 1)], 0, 0),
            |a, b| {
                let mut counts = a.0;
                for (x, y) in counts.iter_mut().zip(b.0) {
                    *x += y;
                }
                (counts, a.1 + b.1, a.2 + b.2)
            },
        );

    // Joint law: Pr(item = s, I = i) = P*(s)/M (1 - 1/M)^(i-1), tail beyond
    // max_i bucketed per atom.
    let mut expected = vec![0.0f64; 3 * (max_i as usize + 1)];
    for s in 0..3usize {
        for i in 1..=max_i {
            expected[s * (max_i as usize + 1) + i as usize - 1] =
                trials as f64 * target[s] / m * (1.0 - 1.0 / m).powi(i as i32 - 1);
        }
        expected[s * (max_i as usize + 1) + max_i as usize] =
            trials as f64 * target[s] * (1.0 - 1.0 / m).powi(max_i as i32);
    }
    let gof = chi_square_gof(&counts, &expected, 5.0);
    assert!(
        gof.p_value > 0.001,
        "joint (item, index) law rejected: {gof:?}"
    );

    let mean_i = sum_i as f64 / trials as f64;
    let var_i = (sum_i2 as f64 / trials as f64 - mean_i * mean_i).max(0.0);
    let se = (var_i / trials as f64).sqrt();
    assert!(
        (mean_i - m).abs() <= 3.0 * se,
        "E[I] = {mean_i}, want {m} within {}",
        3.0 * se
    );

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "runtime {elapsed:?} >= 30 s");
    println!(
        "criterion 1 (rejection-sampler law): PASS  chi2 p = {:.4}, E[I] = {:.4} (M = {m}), {:.1?}",
        gof.p_value, mean_i, elapsed
    );
}

#[test]
fn criterion_2_exact_synthesis() {
    let _lock = SERIAL.lock().unwrap();
    let started = Instant::now();

    let mut cfg = ExperimentConfig::new(vec![1, 2], 1_000_000, 20_260_808);
    cfg.scheme = SchemeSelector::TwoStage;
    let mut lines = Vec::new();
    for (name, dmc) in channels_under_test() {
        let report = run_exactness(&dmc, &cfg).expect("exactness run");
        for row in &report.rows {
            assert!(
                row.pass,
                "{name} n={} failed GOF: p = {}",
                row.n, row.p_value
            );
            lines.push(format!("{name} n={} p={:.4}", row.n, row.p_value));
        }
    }

    // Negative control: a corrupted decoder must fail the same test.
    let mut corrupt_cfg = ExperimentConfig::new(vec![1], 200_000, 20_260_808);
    corrupt_cfg.corrupt_decoder = true;
    let control = run_exactness(&Dmc::bsc(0.11).unwrap(), &corrupt_cfg).expect("control run");
    assert!(
        !control.rows[0].pass,
        "corrupted decoder unexpectedly passed: {:?}",
        control.rows[0]
    );

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 900.0,
        "runtime {elapsed:?} >= 15 min"
    );
    println!(
        "criterion 2 (exact synthesis): PASS  [{}], negative control p = {:.2e}, {:.1?}",
        lines.join("; "),
        control.rows[0].p_value,
        elapsed
    );
}

#[test]
fn criterion_3_ceiling_validity() {
    let _lock = SERIAL.lock().unwrap();
    let started = Instant::now();

    // Criteria 1, 2, 4 and 6 run every trial through rs_sample, which turns
    // any ratio above its ceiling into a hard error; their passing is the
    // Monte Carlo half of this criterion. Here the ceilings are additionally
    // audited exactly: worst-case auxiliary ratios over every type and
    // side-information class at sweep blocklengths, and exhaustive primary
    // ratios over all (x^n, gamma, y^n) at small n.
    for dmc in [Dmc::bsc(0.11).unwrap(), Dmc::bec(0.5).unwrap()] {
        for n in [8usize, 16, 32, 64] {
            scheme_for(&dmc, n).audit_aux_ceilings().unwrap();
        }
    }

    let mut audited = 0u64;
    for (_, dmc) in channels_under_test() {
        for n in [1usize, 2, 3] {
            let scheme = scheme_for(&dmc, n);
            let tables = scheme.tables();
            for xseq in all_sequences(dmc.x_size(), n) {
                if xseq.iter().any(|&x| dmc.px()[x] == 0.0) {
                    continue;
                }
                let t = chansynth::llr::XType::from_sequence(&xseq, dmc.x_size());
                let cond = tables.conditional(&t).unwrap().clone();
                for (gamma, _) in cond.iter() {
                    let triple = tables.bar_triple(&t, gamma).unwrap();
                    let tau = scheme.tau_primary(gamma, &triple);
                    for yseq in all_sequences(dmc.y_size(), n) {
                        let ratio = scheme.primary_lr(&xseq, gamma, &yseq).unwrap();
                        assert!(
                            ratio <= tau * (1.0 + 1e-9),
                            "primary ratio {ratio} above tau {tau}"
                        );
                        audited += 1;
                    }
                }
            }
        }
    }

    let elapsed = started.elapsed();
    println!(
        "criterion 3 (ceiling validity): PASS  exact aux audits + {audited} exhaustive primary ratios, {:.1?}",
        elapsed
    );
}

fn all_sequences(size: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..size).map(move |v| {
                    let mut t = s.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

fn sweep(dmc: &Dmc, selector: SchemeSelector) -> chansynth_bench::RateReport {
    let mut cfg = ExperimentConfig::new(vec![8, 16, 32, 64], 10_000, 414);
    cfg.scheme = selector;
    run_rate_sweep(dmc, &cfg).expect("rate sweep")
}

#[test]
fn criterion_4_rate_bound_conformance() {
    let _lock = SERIAL.lock().unwrap();
    let started = Instant::now();

    let artifacts = std::path::Path::new(env!("CARGO_TARGET_TMPDIR"));
    let mut lines = Vec::new();
    for (name, dmc, file) in [
        ("bsc(0.11)", Dmc::bsc(0.11).unwrap(), "rate_bsc11.csv"),
        ("bec(0.5)", Dmc::bec(0.5).unwrap(), "rate_bec50.csv"),
    ] {
        let report = sweep(&dmc, SchemeSelector::TwoStage);
        for row in &report.rows {
            assert!(
                row.mean_rate <= row.bound + 3.0 * row.stderr,
                "{name} n={}: mean {} above bound {} + 3se",
                row.n,
                row.mean_rate,
                row.bound
            );
            lines.push(format!(
                "{name} n={}: {:.4} <= {:.4}",
                row.n, row.mean_rate, row.bound
            ));
        }
        emit_rate(&report, &artifacts.join(file), EmitFormat::Csv).unwrap();
    }

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 1800.0,
        "runtime {elapsed:?} >= 30 min"
    );
    println!(
        "criterion 4 (rate-bound conformance): PASS  [{}], CSVs in {}, {:.1?}",
        lines.join("; "),
        artifacts.display(),
        elapsed
    );
}

#[test]
fn criterion_5_entropy_bound_suite() {
    let _lock = SERIAL.lock().unwrap();
    let started = Instant::now();

    let cfg = ExperimentConfig::new(vec![4, 8, 16, 32, 64], 1, 0);
    let report = run_entropy_check(&Dmc::bsc(0.11).unwrap(), &cfg).expect("entropy check");
    for row in &report.rows {
        assert!(row.bounds_ok, "entropy bounds violated at n={}", row.n);
    }
    assert!(
        (0.3..=0.6).contains(&report.slope),
        "H(Gamma) regression slope {} outside [0.3, 0.6]",
        report.slope
    );
    for g in &report.geometric {
        assert!(
            g.ok,
            "geometric entropy bound violated at p={}: {} > {}",
            g.p, g.entropy, g.bound
        );
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "runtime {elapsed:?} >= 5 min");
    println!(
        "criterion 5 (entropy-bound suite): PASS  slope = {:.4}, geometric H ok at p = 0.5/0.1/0.01, {:.1?}",
        report.slope, elapsed
    );
}

#[test]
fn criterion_6_singular_dichotomy_trend() {
    let _lock = SERIAL.lock().unwrap();
    let started = Instant::now();

    let artifacts = std::path::Path::new(env!("CARGO_TARGET_TMPDIR"));
    let bsc = sweep(&Dmc::bsc(0.11).unwrap(), SchemeSelector::Both);
    let bec = sweep(&Dmc::bec(0.5).unwrap(), SchemeSelector::TwoStage);
    emit_rate(&bsc, &artifacts.join("dichotomy_bsc11.csv"), EmitFormat::Csv).unwrap();
    emit_rate(&bec, &artifacts.join("dichotomy_bec50.csv"), EmitFormat::Csv).unwrap();

    let c_bsc = bsc.fit_for("two-stage").unwrap().log_coeff;
    let c_bec = bec.fit_for("two-stage").unwrap().log_coeff;
    assert!(
        c_bec <= c_bsc - 0.25,
        "log-coefficient gap too small: bec {c_bec} vs bsc {c_bsc}"
    );

    let two_stage_64 = bsc.row("two-stage", 64).unwrap().mean_rate;
    let baseline_64 = bsc.row("baseline", 64).unwrap().mean_rate;
    assert!(
        two_stage_64 <= baseline_64,
        "two-stage {two_stage_64} above baseline {baseline_64} at n=64"
    );

    let elapsed = started.elapsed();
    println!(
        "criterion 6 (singular/nonsingular dichotomy): PASS  c_bec = {:.3} <= c_bsc - 0.25 = {:.3}; \
         two-stage {:.4} <= baseline {:.4} at n=64, CSVs in {}, {:.1?}",
        c_bec,
        c_bsc - 0.25,
        two_stage_64,
        baseline_64,
        artifacts.display(),
        elapsed
    );
}

#[test]
fn criterion_7_oracle_equivalence() {
    let _lock = SERIAL.lock().unwrap();
    let started = Instant::now();

    let q = Quantizer::new(0.5).unwrap();
    let asym = Dmc::new(
        vec![0.5, 0.3, 0.2],
        vec![
            vec![0.7, 0.2, 0.1],
            vec![0.1, 0.6, 0.3],
            vec![0.2, 0.3, 0.5],
        ],
    )
    .unwrap();
    let configs: Vec<(&str, Dmc, Vec<usize>)> = vec![
        ("bsc(0.11)", Dmc::bsc(0.11).unwrap(), vec![1, 2, 3, 4, 5, 6]),
        ("bsc(0.5)", Dmc::bsc(0.5).unwrap(), vec![1, 2, 3, 4]),
        ("bec(0.5)", Dmc::bec(0.5).unwrap(), vec![1, 2, 3, 4, 5]),
        ("identity", Dmc::identity(2).unwrap(), vec![1, 2, 3, 4]),
        ("asym3x3", asym, vec![1, 2, 3]),
    ];

    let mut compared = 0u64;
    for (name, dmc, ns) in &configs {
        for &n in ns {
            let brute = oracle::brute_force(dmc, &q, n);
            let tables = chansynth::llr::GammaTables::build(dmc, &q, n).unwrap();

            let got: oracle::Pmf = tables.marginal().iter().map(|(b, p)| (b.0, p)).collect();
            oracle::assert_pmf_close(
                &format!("{name} n={n} marginal"),
                &got,
                &brute.marginal,
                1e-9,
            );
            compared += 1;

            for t in enumerate_types(dmc, n) {
                let w = type_probability(dmc, &t);
                if w == 0.0 {
                    continue;
                }
                let bt = &brute.types[t.counts()];
                // Multinomial type weight against summed sequence probabilities.
                assert!(
                    (w - bt.weight).abs() <= 1e-12,
                    "{name} n={n} type weight {:?}: {w} vs {}",
                    t.counts(),
                    bt.weight
                );
                for (&class, &p) in &bt.class_prob {
                    let got = tables
                        .class(&t, chansynth::llr::Bin(class.0), chansynth::llr::Bin(class.1))
                        .unwrap()
                        .prob;
                    assert!(
                        (got - p).abs() <= 1e-9,
                        "{name} n={n} class prob {class:?}: {got} vs {p}"
                    );
                }
                let cond: oracle::Pmf = tables
                    .conditional(&t)
                    .unwrap()
                    .iter()
                    .map(|(b, p)| (b.0, p))
                    .collect();
                oracle::assert_pmf_close(
                    &format!("{name} n={n} cond {:?}", t.counts()),
                    &cond,
                    &bt.cond,
                    1e-9,
                );
                compared += 1;

                for (&bin, want_triple) in &bt.triple_of_bin {
                    let got = tables.bar_triple(&t, chansynth::llr::Bin(bin)).unwrap();
                    assert_eq!(
                        got.key(),
                        *want_triple,
                        "{name} n={n} triple at bin {bin}"
                    );
                }
                for (&class, want) in &bt.cond_given_class {
                    let triple = chansynth::llr::BarTriple::from_key((
                        class.0,
                        class.1,
                        bt.triple_of_bin
                            .iter()
                            .find(|(_, tr)| (tr.0, tr.1) == class)
                            .unwrap()
                            .1
                             .2,
                    ));
                    let got: oracle::Pmf = tables
                        .cond_gamma_given_triple(&t, &triple)
                        .unwrap()
                        .iter()
                        .map(|(b, p)| (b.0, p))
                        .collect();
                    oracle::assert_pmf_close(
                        &format!("{name} n={n} class {class:?}"),
                        &got,
                        want,
                        1e-9,
                    );
                    compared += 1;
                }
            }

            let got_tm: std::collections::BTreeMap<(i64, i64, i64), f64> = tables
                .triple_marginal()
                .iter()
                .map(|(t, p)| (t.key(), p))
                .collect();
            assert_eq!(got_tm.len(), brute.triple_marginal.len());
            for (k, p) in &brute.triple_marginal {
                let g = got_tm.get(k).copied().unwrap_or(f64::NAN);
                assert!(
                    (g - p).abs() <= 1e-9,
                    "{name} n={n} triple marginal at {k:?}: {g} vs {p}"
                );
            }
            compared += 1;
        }
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "runtime {elapsed:?} >= 2 min");
    println!(
        "criterion 7 (oracle equivalence): PASS  {compared} pmfs matched atomwise at 1e-9, {:.1?}",
        elapsed
    );
}

#[test]
fn criterion_8_coding_infrastructure() {
    let _lock = SERIAL.lock().unwrap();
    let started = Instant::now();
    use chansynth::bits::{BitReader, BitString};
    use chansynth::codes::{kraft_sum_dyadic, GolombCode, HuffmanCode};

    // Golomb roundtrip identity on exhaustive small ranges.
    for m in [1u128, 2, 3, 5, 7, 8, 16] {
        let code = GolombCode::new(m).unwrap();
        let mut out = BitString::new();
        for k in 1..=2000u128 {
            code.encode(k, &mut out).unwrap();
        }
        let mut r = BitReader::new(&out);
        for k in 1..=2000u128 {
            assert_eq!(code.decode(&mut r).unwrap(), k, "golomb m={m}");
        }
        assert_eq!(r.remaining(), 0);
    }

    // Golomb Kraft sums: exact over whole quotient groups plus a geometric
    // tail below 1e-12.
    for m in [1u128, 2, 3] {
        let code = GolombCode::new(m).unwrap();
        let groups = 40u32;
        let lens: Vec<usize> = (1..=u128::from(groups) * m).map(|k| code.len(k)).collect();
        let (num, shift) = kraft_sum_dyadic(&lens);
        let full = 1u128 << shift;
        let tail = full - num;
        assert_eq!(tail, 1u128 << (shift - groups), "m={m} partial Kraft sum");
        assert!((tail as f64 / full as f64) < 1e-12);
    }

    // Huffman: deterministic build, roundtrip, exact Kraft equality, and
    // optimality against exhaustive search over all prefix codes.
    let mut prng = Prng::new(88, b"criterion8");
    let mut optimality_checks = 0u64;
    for support in 2usize..=5 {
        for _ in 0..40 {
            let weights: Vec<f64> = (0..support).map(|_| prng.next_unit() + 1e-3).collect();
            let total: f64 = weights.iter().sum();
            let pmf: Vec<(u32, f64)> = weights
                .iter()
                .enumerate()
                .map(|(i, w)| (i as u32, w / total))
                .collect();
            let code = HuffmanCode::build(&pmf).unwrap();

            let mut out = BitString::new();
            let syms: Vec<u32> = (0..200).map(|_| (prng.next_u64() % support as u64) as u32).collect();
            for s in &syms {
                code.encode(s, &mut out).unwrap();
            }
            let mut r = BitReader::new(&out);
            for s in &syms {
                assert_eq!(code.decode(&mut r).unwrap(), *s);
            }

            let (num, shift) = kraft_sum_dyadic(&code.lengths());
            assert_eq!(num, 1u128 << shift, "Kraft equality");

            let best = exhaustive_optimal_expected_length(&pmf);
            let got = code.expected_length(&pmf);
            assert!(
                got <= best + 1e-9,
                "huffman {got} above exhaustive optimum {best} for {pmf:?}"
            );
            optimality_checks += 1;
        }
    }

    let elapsed = started.elapsed();
    println!(
        "criterion 8 (coding infrastructure): PASS  {optimality_checks} exhaustive optimality checks, {:.1?}",
        elapsed
    );
}

/// Minimum expected length over every prefix-free code on the support:
/// enumerate depth profiles of all full binary trees and assign sorted
/// probabilities to sorted depths.
fn exhaustive_optimal_expected_length(pmf: &[(u32, f64)]) -> f64 {
    fn profiles(leaves: usize) -> Vec<Vec<usize>> {
        if leaves == 1 {
            return vec![vec![0]];
        }
        let mut out = std::collections::BTreeSet::new();
        for left in 1..leaves {
            for lp in profiles(left) {
                for rp in profiles(leaves - left) {
                    let mut p: Vec<usize> = lp
                        .iter()
                        .chain(rp.iter())
                        .map(|d| d + 1)
                        .collect();
                    p.sort_unstable();
                    out.insert(p);
                }
            }
        }
        out.into_iter().collect()
    }
    let mut probs: Vec<f64> = pmf.iter().map(|&(_, p)| p).collect();
    probs.sort_by(|a, b| b.total_cmp(a));
    let mut best = f64::INFINITY;
    for profile in profiles(probs.len()) {
        // Largest probability on the shortest depth.
        let len: f64 = probs
            .iter()
            .zip(profile.iter())
            .map(|(p, d)| p * *d as f64)
            .sum();
        best = best.min(len);
    }
    best
}
