//! Scalar numerics: the standard normal distribution, even-df chi-square
//! tails, harmonic sums, and the two level solvers used by the dependence
//! modifications and the oracle calibration.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{ReplError, Result};

/// Largest k accepted by [`harmonic`].
pub const HARMONIC_MAX: usize = 100_000_000;

/// Standard normal CDF Φ(x).
///
/// Tails beyond the subnormal range return the smallest positive double
/// rather than 0, so a finite argument never yields a zero probability.
pub fn std_normal_cdf(x: f64) -> f64 {
    floor_tail(0.5 * libm::erfc(-x * FRAC_1_SQRT_2), x.is_finite())
}

/// Standard normal right tail 1 − Φ(x), accurate in the upper tail.
pub fn std_normal_sf(x: f64) -> f64 {
    floor_tail(0.5 * libm::erfc(x * FRAC_1_SQRT_2), x.is_finite())
}

fn floor_tail(v: f64, finite: bool) -> f64 {
    if v == 0.0 && finite {
        f64::from_bits(1)
    } else {
        v
    }
}

/// Inverse of [`std_normal_cdf`].
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(ReplError::Domain(format!(
            "normal quantile needs p in (0, 1), got {p}"
        )));
    }
    Ok(quantile_unchecked(p))
}

/// Upper quantile z with 1 − Φ(z) = p, without forming 1 − p.
pub fn std_normal_isf(p: f64) -> Result<f64> {
    std_normal_quantile(p).map(|z| -z)
}

/// Quantile for p already known to lie in (0, 1).
pub(crate) fn quantile_unchecked(p: f64) -> f64 {
    if p > 0.5 {
        // 1 - p is exact here
        return -quantile_unchecked(1.0 - p);
    }
    let x = wichura_as241(p);
    // one Halley step on Φ(x) - p
    let e = std_normal_cdf(x) - p;
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    let refined = x - u / (1.0 + 0.5 * x * u);
    if refined.is_finite() {
        refined
    } else {
        x
    }
}

fn poly(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

// Wichura (1988), algorithm AS 241 (PPND16).
fn wichura_as241(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_608,
        133.141_667_891_784_377_45,
        1_971.590_950_306_551_442_7,
        13_731.693_765_509_461_125,
        45_921.953_931_549_871_457,
        67_265.770_927_008_700_853,
        33_430.575_583_588_128_105,
        2_509.080_928_730_122_672_7,
    ];
    const B: [f64; 8] = [
        1.0,
        42.313_330_701_600_911_252,
        687.187_007_492_057_908_3,
        5_394.196_021_424_751_107_7,
        21_213.794_301_586_595_867,
        39_307.895_800_092_710_61,
        28_729.085_735_721_942_674,
        5_226.495_278_852_545_925,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34,
        4.630_337_846_156_545_295_9,
        5.769_497_221_460_691_405_5,
        3.647_848_324_763_204_605_04,
        1.270_458_252_452_368_382_58,
        0.241_780_725_177_450_611_77,
        0.022_723_844_989_269_184_583_3,
        7.745_450_142_783_414_076_4e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87,
        1.676_384_830_183_803_849_4,
        0.689_767_334_985_100_004_55,
        0.148_103_976_427_480_074_59,
        0.015_198_666_563_616_457_196_6,
        5.475_938_084_995_344_946e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_2,
        5.463_784_911_164_114_369_9,
        1.784_826_539_917_291_335_8,
        0.296_560_571_828_504_891_23,
        0.026_532_189_526_576_123_093,
        0.001_242_660_947_388_078_438_6,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        0.599_832_206_555_887_937_69,
        0.136_929_880_922_735_805_31,
        0.014_875_361_290_850_614_852_5,
        7.868_691_311_456_132_591e-4,
        1.846_318_317_510_054_681_8e-5,
        1.421_511_758_316_445_888_7e-7,
        2.044_263_103_389_939_785_64e-15,
    ];

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Chi-square survival function for even degrees of freedom:
/// exp(−x/2) Σ_{k<df/2} (x/2)^k / k!, evaluated in log space.
pub fn chisq_survival_even_df(x: f64, df: u32) -> Result<f64> {
    if df == 0 || df % 2 != 0 {
        return Err(ReplError::Domain(format!(
            "degrees of freedom must be a positive even integer, got {df}"
        )));
    }
    if x.is_nan() || x < 0.0 {
        return Err(ReplError::Domain(format!("chi-square statistic must be >= 0, got {x}")));
    }
    Ok(ln_chisq_survival_even(x / 2.0, df / 2).exp().clamp(0.0, 1.0))
}

/// ln of exp(−h) Σ_{k<n} h^k / k!.
fn ln_chisq_survival_even(half_x: f64, n: u32) -> f64 {
    if half_x == 0.0 {
        return 0.0;
    }
    if half_x.is_infinite() {
        return f64::NEG_INFINITY;
    }
    let ln_h = half_x.ln();
    let mut ln_terms = Vec::with_capacity(n as usize);
    let mut ln_fact = 0.0;
    for k in 0..n {
        if k > 0 {
            ln_fact += f64::from(k).ln();
        }
        ln_terms.push(f64::from(k) * ln_h - ln_fact);
    }
    let top = ln_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = ln_terms.iter().map(|t| (t - top).exp()).sum();
    (-half_x + top + s.ln()).min(0.0)
}

/// Fisher's combination of two p-values: P(χ²₄ ≥ −2(ln p1 + ln p2)).
///
/// A zero p-value saturates the combination at zero.
pub fn fisher_combined_pvalue(p1: f64, p2: f64) -> f64 {
    if p1 <= 0.0 || p2 <= 0.0 {
        return 0.0;
    }
    let half_x = -(p1.ln() + p2.ln());
    ln_chisq_survival_even(half_x.max(0.0), 2).exp().clamp(0.0, 1.0)
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Harmonic number H_k = Σ_{i=1..k} 1/i (H_0 = 0), summed exactly with
/// compensation.
pub fn harmonic(k: usize) -> Result<f64> {
    if k > HARMONIC_MAX {
        return Err(ReplError::Capacity {
            requested: k,
            max: HARMONIC_MAX,
        });
    }
    let mut acc = CompensatedSum::default();
    for i in 1..=k {
        acc.add(1.0 / i as f64);
    }
    Ok(acc.value())
}

/// Prefix table of harmonic numbers, grown on demand up to a fixed maximum.
#[derive(Debug, Clone)]
pub struct HarmonicCache {
    max: usize,
    prefix: Vec<f64>,
    acc: CompensatedSum,
}

impl HarmonicCache {
    pub fn new(max: usize) -> Self {
        Self {
            max,
            prefix: vec![0.0],
            acc: CompensatedSum::default(),
        }
    }

    /// Cache filled up to `k` at construction.
    pub fn filled(max: usize, k: usize) -> Result<Self> {
        let mut cache = Self::new(max);
        cache.extend_to(k)?;
        Ok(cache)
    }

    pub fn max(&self) -> usize {
        self.max
    }

    /// Largest k currently stored.
    pub fn len(&self) -> usize {
        self.prefix.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn extend_to(&mut self, k: usize) -> Result<()> {
        if k > self.max {
            return Err(ReplError::Capacity {
                requested: k,
                max: self.max,
            });
        }
        self.prefix.reserve(k.saturating_sub(self.len()));
        for i in self.prefix.len()..=k {
            self.acc.add(1.0 / i as f64);
            self.prefix.push(self.acc.value());
        }
        Ok(())
    }

    /// H_k, extending the table if needed.
    pub fn get(&mut self, k: usize) -> Result<f64> {
        self.extend_to(k)?;
        Ok(self.prefix[k])
    }

    /// H_k from the already-filled part of the table.
    pub fn value(&self, k: usize) -> Option<f64> {
        self.prefix.get(k).copied()
    }
}

impl Default for HarmonicCache {
    fn default() -> Self {
        Self::new(10_000_000)
    }
}

/// Shrunken primary level for arbitrary primary-study dependence when every
/// followed-up hypothesis has p1 <= t: the largest x with
/// x · (1 + H_{⌈t·m/x − 1⌉}) = q1.
///
/// The left-hand side is piecewise linear in x between breakpoints of the
/// ceiling, so candidates x_k = q1 / (1 + H_k) are tried for k = 0, 1, ...
/// and the first k whose ceiling value equals k is returned.
pub fn solve_q1_tilde_thresholded(q1: f64, m: usize, t: f64) -> Result<f64> {
    if !(q1 > 0.0 && q1 < 1.0) {
        return Err(ReplError::Domain(format!("q1 must lie in (0, 1), got {q1}")));
    }
    if m == 0 {
        return Err(ReplError::Domain("m must be positive".into()));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(ReplError::Domain(format!("t must lie in (0, 1), got {t}")));
    }
    let limit = q1 / (1.0 + harmonic(m - 1)?);
    if t >= limit {
        return Err(ReplError::Applicability(format!(
            "threshold t = {t} is not below q1 / (1 + H_(m-1)) = {limit:.6e}; \
             use the harmonic (item 1) modification instead"
        )));
    }
    let tm = t * m as f64;
    let mut h = CompensatedSum::default();
    let mut k = 0usize;
    loop {
        let x = q1 / (1.0 + h.value());
        let ceiling = (tm / x - 1.0).ceil();
        // ceiling(k) - k drops by at most one per step, so it reaches zero
        if ceiling <= k as f64 {
            return Ok(x);
        }
        k += 1;
        h.add(1.0 / k as f64);
    }
}

/// Level q' at which the oracle-calibrated two-stage procedure runs as
/// (q', 2q'): the positive root of f00·q'² + (f01 + 1)·q' = q for w1 in
/// {0, 1}, and of f00·(q'/2)² + (f01 + 1)·q'/2 = q/2 for w1 = 0.5.
pub fn solve_oracle_qprime(f00: f64, f01: f64, q: f64, w1: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f00) || !(0.0..=1.0).contains(&f01) {
        return Err(ReplError::Domain(format!(
            "fractions must lie in [0, 1], got f00 = {f00}, f01 = {f01}"
        )));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(ReplError::Domain(format!("q must lie in (0, 1), got {q}")));
    }
    let positive_root = |rhs: f64| {
        let b = f01 + 1.0;
        // 2c / (b + sqrt(b² + 4ac)): stable, and reduces to c / b when a = 0
        2.0 * rhs / (b + (b * b + 4.0 * f00 * rhs).sqrt())
    };
    if w1 == 0.0 || w1 == 1.0 {
        Ok(positive_root(q))
    } else if w1 == 0.5 {
        Ok(2.0 * positive_root(0.5 * q))
    } else {
        Err(ReplError::Domain(format!(
            "oracle calibration is defined for w1 in {{0, 0.5, 1}}, got {w1}"
        )))
    }
}
