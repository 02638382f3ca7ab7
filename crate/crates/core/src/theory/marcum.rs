use crate::error::{Error, Result};

/// Beyond this separation of `a` and `b` the result is 0 or 1 to within
/// `exp(-800)`.
const SATURATION: f64 = 40.0;

/// `ln(m!)`: exact sum for small `m`, Stirling series otherwise.
fn ln_factorial(m: usize) -> f64 {
    if m < 20 {
        return (2..=m).map(|k| (k as f64).ln()).sum();
    }
    let x = m as f64;
    let x2 = x * x;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x2)
        + 1.0 / (1260.0 * x * x2 * x2)
}

/// Poisson(`mean`) probabilities for `0..=k_max`, anchored at the mode and
/// extended by the ratio recursion in both directions.
fn poisson_pmf(mean: f64, k_max: usize) -> Vec<f64> {
    let mut pmf = vec![0.0; k_max + 1];
    if mean == 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    let mode = (mean.floor() as usize).min(k_max);
    pmf[mode] = (-mean + mode as f64 * mean.ln() - ln_factorial(mode)).exp();
    for k in (0..mode).rev() {
        pmf[k] = pmf[k + 1] * (k + 1) as f64 / mean;
    }
    for k in mode + 1..=k_max {
        pmf[k] = pmf[k - 1] * mean / k as f64;
    }
    pmf
}

/// First-order Marcum Q function `Q1(a, b)`, the right tail beyond `b^2` of a
/// non-central chi-square with two degrees of freedom and non-centrality
/// `a^2`.
///
/// Evaluated as a Poisson(`a^2/2`) mixture of Gamma(`k+1`) upper tails at
/// `b^2/2`; the Gamma tail equals `P(Poisson(b^2/2) <= k)`.
pub fn marcum_q1(a: f64, b: f64) -> Result<f64> {
    if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::invalid(format!("Marcum Q1 needs finite a, b >= 0 (got {a}, {b})")));
    }
    if b == 0.0 || a - b > SATURATION {
        return Ok(1.0);
    }
    if b - a > SATURATION {
        return Ok(0.0);
    }
    let lam = a * a / 2.0;
    let x = b * b / 2.0;
    if lam == 0.0 {
        return Ok((-x).exp());
    }
    let k_max = (lam + 12.0 * lam.sqrt() + 60.0).ceil() as usize;
    let k_top = k_max.max((x + 12.0 * x.sqrt() + 60.0).ceil() as usize);
    let weights = poisson_pmf(lam, k_max);
    let tails = poisson_pmf(x, k_top);
    if a <= b {
        let mut cdf = 0.0;
        let mut sum = 0.0;
        for (w, t) in weights.iter().zip(&tails) {
            cdf += t;
            sum += w * cdf.min(1.0);
        }
        return Ok(sum.clamp(0.0, 1.0));
    }
    // Near one: accumulate the complement from the upper Poisson tails.
    let mut sf = vec![0.0; k_top + 1];
    for k in (0..k_top).rev() {
        sf[k] = sf[k + 1] + tails[k + 1];
    }
    let miss: f64 = weights.iter().zip(&sf).map(|(w, s)| w * s).sum();
    Ok((1.0 - miss).clamp(0.0, 1.0))
}
