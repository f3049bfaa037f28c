//! Closed-form power of the two FWER procedures for a single non-null
//! hypothesis among m - 1 nulls, unit-variance normal test statistics.

use crate::error::{ReplError, Result};
use crate::numeric::{std_normal_isf, std_normal_sf};
use crate::types::check_levels;

/// Relative size below which trailing binomial terms are dropped.
const TAIL_CUTOFF: f64 = 1e-16;

/// Power of Bonferroni at level α on the maximum of the two p-values:
/// Φ̃(z_{1−α/m} − μ11)·Φ̃(z_{1−α/m} − μ21).
pub fn analytic_power_bonf_max(mu11: f64, mu21: f64, m: usize, alpha: f64) -> Result<f64> {
    if m == 0 {
        return Err(ReplError::Domain("m must be positive".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ReplError::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let z = std_normal_isf(alpha / m as f64)?;
    Ok(std_normal_sf(z - mu11) * std_normal_sf(z - mu21))
}

fn ln_binomial_pmf(n: usize, j: usize, ln_p: f64, ln_q: f64) -> f64 {
    let (n, j) = (n as f64, j as f64);
    libm::lgamma(n + 1.0) - libm::lgamma(j + 1.0) - libm::lgamma(n - j + 1.0) + j * ln_p + (n - j) * ln_q
}

/// Power of the two-stage Bonferroni procedure at (α1, α):
/// Σ_k PCS(k)·Φ̃(z_{1−(α−α1)/k} − μ21), where PCS(k) is the probability that
/// the non-null is selected along with exactly k − 1 nulls.
pub fn analytic_power_two_stage(mu11: f64, mu21: f64, m: usize, alpha1: f64, alpha: f64) -> Result<f64> {
    if m == 0 {
        return Err(ReplError::Domain("m must be positive".into()));
    }
    check_levels(alpha1, alpha)?;
    let p0 = alpha1 / m as f64;
    let select = std_normal_sf(std_normal_isf(p0)? - mu11);
    if select == 0.0 {
        return Ok(0.0);
    }
    let (ln_p, ln_q) = (p0.ln(), (-p0).ln_1p());
    let n = m - 1;
    let mode = ((n + 1) as f64 * p0).floor() as usize;
    let mut mass = 0.0;
    let mut power = 0.0;
    for j in 0..=n {
        let pmf = ln_binomial_pmf(n, j, ln_p, ln_q).exp();
        mass += pmf;
        let k = j + 1;
        power += pmf * std_normal_sf(std_normal_isf((alpha - alpha1) / k as f64)? - mu21);
        if j > mode && pmf < TAIL_CUTOFF * mass {
            break;
        }
    }
    Ok(select * power)
}
