use crate::error::{Error, Result};

/// CFAR threshold `gamma = -2 ln(1 - (1 - P_f)^(1/(N+cp)))` on the maximum of
/// `N + cp` independent chi-square(2) statistics.
pub fn compute_threshold(p_f: f64, n: usize, cp: usize) -> Result<f64> {
    if !(p_f > 0.0 && p_f < 1.0) {
        return Err(Error::config(format!("false-alarm probability {p_f} outside (0, 1)")));
    }
    let len = (n + cp) as f64;
    if len == 0.0 {
        return Err(Error::config("empty block"));
    }
    // 1 - (1 - p)^(1/L) without cancellation.
    let tail = -((-p_f).ln_1p() / len).exp_m1();
    Ok(-2.0 * tail.ln())
}

/// `P(max <= gamma) = (1 - exp(-gamma/2))^(N+cp)` under the null hypothesis.
pub fn max_statistic_cdf(gamma: f64, n: usize, cp: usize) -> f64 {
    ((n + cp) as f64 * (-(-gamma / 2.0).exp()).ln_1p()).exp()
}
