//! Statistics for the harness: chi-square goodness of fit with tail-bucket
//! aggregation, and small least-squares fits.

/// Lanczos approximation (g = 7, 9 coefficients), published values.
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma `P(a, x)`: series for `x < a + 1`,
/// Lentz continued fraction otherwise.
pub fn reg_lower_gamma(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "bad incomplete gamma arguments");
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        // Series: P(a,x) = gamma(a,x)/Gamma(a).
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..500 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        sum * (-x + a * x.ln() - ln_gamma(a)).exp()
    } else {
        1.0 - reg_upper_gamma_cf(a, x)
    }
}

fn reg_upper_gamma_cf(a: f64, x: f64) -> f64 {
    // Modified Lentz on the standard continued fraction for Q(a,x).
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Upper-tail p-value of a chi-square statistic with `dof` degrees of freedom.
pub fn chi_square_pvalue(stat: f64, dof: f64) -> f64 {
    if dof <= 0.0 {
        return 1.0;
    }
    if stat <= 0.0 {
        return 1.0;
    }
    let a = dof / 2.0;
    let x = stat / 2.0;
    if x < a + 1.0 {
        (1.0 - reg_lower_gamma(a, x)).clamp(0.0, 1.0)
    } else {
        reg_upper_gamma_cf(a, x).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GofResult {
    pub stat: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Cells actually tested after aggregation.
    pub cells: usize,
}

/// Pearson chi-square against expected counts, merging cells with expected
/// count below `min_expected` into one pooled bucket (the standard validity
/// condition). A positive observation in a zero-expected cell is an
/// impossible event and yields `p_value = 0`.
pub fn chi_square_gof(observed: &[u64], expected: &[f64], min_expected: f64) -> GofResult {
    assert_eq!(observed.len(), expected.len());
    let mut stat = 0.0;
    let mut cells = 0usize;
    let mut pooled_obs = 0u64;
    let mut pooled_exp = 0.0;
    for (&o, &e) in observed.iter().zip(expected) {
        if e == 0.0 {
            if o > 0 {
                return GofResult {
                    stat: f64::INFINITY,
                    dof: observed.len().saturating_sub(1),
                    p_value: 0.0,
                    cells: observed.len(),
                };
            }
            continue;
        }
        if e < min_expected {
            pooled_obs += o;
            pooled_exp += e;
        } else {
            let d = o as f64 - e;
            stat += d * d / e;
            cells += 1;
        }
    }
    if pooled_exp > 0.0 {
        let d = pooled_obs as f64 - pooled_exp;
        stat += d * d / pooled_exp;
        cells += 1;
    }
    if cells < 2 {
        return GofResult {
            stat,
            dof: 0,
            p_value: 1.0,
            cells,
        };
    }
    let dof = cells - 1;
    GofResult {
        stat,
        dof,
        p_value: chi_square_pvalue(stat, dof as f64),
        cells,
    }
}

/// Least squares fit `y = intercept + slope * x`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    (intercept, slope)
}

/// Least squares fit `y = cu * u + cv * v` (no intercept).
pub fn fit_two_basis(us: &[f64], vs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert!(us.len() == vs.len() && vs.len() == ys.len());
    let suu: f64 = us.iter().map(|u| u * u).sum();
    let svv: f64 = vs.iter().map(|v| v * v).sum();
    let suv: f64 = us.iter().zip(vs).map(|(u, v)| u * v).sum();
    let suy: f64 = us.iter().zip(ys).map(|(u, y)| u * y).sum();
    let svy: f64 = vs.iter().zip(ys).map(|(v, y)| v * y).sum();
    let det = suu * svv - suv * suv;
    let cu = (suy * svv - svy * suv) / det;
    let cv = (svy * suu - suy * suv) / det;
    (cu, cv)
}
