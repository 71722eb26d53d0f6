//! Paired and unpaired significance tests reported next to the robustness
//! metric: McNemar exact and chi-square on discordant pairs, log-scale Wald
//! odds-ratio intervals, pooled two-proportion z-tests, and the star labels
//! used in accuracy tables.

use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, DiscreteCDF, Normal};
use thiserror::Error;

/// Discordant pair counts: `n10` items correct on the original and wrong on
/// the variant, `n01` the reverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiscordantCounts {
    pub n10: u64,
    pub n01: u64,
}

impl DiscordantCounts {
    pub fn new(n10: u64, n01: u64) -> Self {
        DiscordantCounts { n10, n01 }
    }

    /// Count discordant pairs from aligned binary outcome vectors.
    pub fn from_pairs(original: &[u8], variant: &[u8]) -> Self {
        let mut counts = DiscordantCounts { n10: 0, n01: 0 };
        for (&o, &v) in original.iter().zip(variant) {
            match (o, v) {
                (1, 0) => counts.n10 += 1,
                (0, 1) => counts.n01 += 1,
                _ => {}
            }
        }
        counts
    }

    pub fn total(&self) -> u64 {
        self.n10 + self.n01
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("no discordant pairs: the chi-square statistic is undefined")]
    NoDiscordantPairs,
    #[error("odds ratio undefined for a zero count; apply continuity correction manually")]
    ZeroCount,
    #[error("p-value {0} outside [0,1]")]
    BadPValue(f64),
    #[error("alpha must lie in (0,1)")]
    BadAlpha,
    #[error("invalid proportion inputs: k={k}, n={n}")]
    BadProportion { k: u64, n: u64 },
}

/// Two-sided exact McNemar test:
/// `p = min(1, 2 P(Binomial(n10+n01, 1/2) <= min(n10, n01)))`,
/// and `p = 1` when there are no discordant pairs.
pub fn mcnemar_exact(counts: DiscordantCounts) -> f64 {
    let n = counts.total();
    if n == 0 {
        return 1.0;
    }
    let binomial = Binomial::new(0.5, n).expect("valid binomial");
    (2.0 * binomial.cdf(counts.n10.min(counts.n01))).min(1.0)
}

/// Continuity-corrected McNemar chi-square. The corrected difference
/// `|n10 - n01| - 1` is floored at zero, so symmetric counts give a zero
/// statistic (p = 1) and the statistic agrees with the exact test to within
/// 0.01 once `n10 + n01 >= 25`.
pub fn mcnemar_chi2(counts: DiscordantCounts) -> Result<(f64, f64), StatsError> {
    let n = counts.total();
    if n == 0 {
        return Err(StatsError::NoDiscordantPairs);
    }
    let corrected = (counts.n10.abs_diff(counts.n01) as f64 - 1.0).max(0.0);
    let statistic = corrected * corrected / n as f64;
    let chi2 = ChiSquared::new(1.0).expect("1 df");
    Ok((statistic, 1.0 - chi2.cdf(statistic)))
}

/// Discordant odds ratio `theta = n10/n01` with the log-scale Wald interval
/// `exp(ln theta +- z_{alpha/2} sqrt(1/n10 + 1/n01))`.
pub fn odds_ratio_ci(
    counts: DiscordantCounts,
    alpha: f64,
) -> Result<(f64, f64, f64), StatsError> {
    if counts.n10 == 0 || counts.n01 == 0 {
        return Err(StatsError::ZeroCount);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::BadAlpha);
    }
    let theta = counts.n10 as f64 / counts.n01 as f64;
    let se = (1.0 / counts.n10 as f64 + 1.0 / counts.n01 as f64).sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let z = normal.inverse_cdf(1.0 - alpha / 2.0);
    let log_theta = theta.ln();
    Ok((theta, (log_theta - z * se).exp(), (log_theta + z * se).exp()))
}

/// Pooled-variance two-proportion z-test with normal two-sided p-value.
/// A degenerate pooled proportion (0 or 1) yields `(0, 1)`.
pub fn two_prop_z(k1: u64, n1: u64, k2: u64, n2: u64) -> Result<(f64, f64), StatsError> {
    for (k, n) in [(k1, n1), (k2, n2)] {
        if n == 0 || k > n {
            return Err(StatsError::BadProportion { k, n });
        }
    }
    let pooled = (k1 + k2) as f64 / (n1 + n2) as f64;
    if pooled == 0.0 || pooled == 1.0 {
        return Ok((0.0, 1.0));
    }
    let p1 = k1 as f64 / n1 as f64;
    let p2 = k2 as f64 / n2 as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    let z = (p1 - p2) / se;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p = (2.0 * (1.0 - normal.cdf(z.abs()))).min(1.0);
    Ok((z, p))
}

/// Significance stars: `***` p<0.01, `**` p<0.05, `*` p<0.1, strict
/// inequalities (p = 0.05 earns a single star).
pub fn star_label(p: f64) -> Result<&'static str, StatsError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(StatsError::BadPValue(p));
    }
    Ok(if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    })
}
