use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Beta, ContinuousCDF, Normal};

use super::{NetError, PhysicalNetwork};

/// Quantile at `u` of the failure-probability distribution with the given
/// moments: a moment-matched Beta when one exists, otherwise a Gaussian
/// truncated to `[0, 1]`.
pub fn failure_quantile(mean: f64, variance: f64, u: f64) -> f64 {
    if variance <= 0.0 {
        return mean.clamp(0.0, 1.0);
    }
    let u = u.clamp(f64::EPSILON, 1.0 - f64::EPSILON);
    let k = mean * (1.0 - mean) / variance - 1.0;
    if mean > 0.0 && mean < 1.0 && k > 0.0 {
        if let Ok(beta) = Beta::new(mean * k, (1.0 - mean) * k) {
            let x = beta.inverse_cdf(u);
            if x.is_finite() {
                return x.clamp(0.0, 1.0);
            }
        }
    }
    let sd = variance.sqrt();
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    let lo = std.cdf((0.0 - mean) / sd);
    let hi = std.cdf((1.0 - mean) / sd);
    if hi - lo <= f64::EPSILON {
        return mean.clamp(0.0, 1.0);
    }
    (mean + sd * std.inverse_cdf(lo + u * (hi - lo))).clamp(0.0, 1.0)
}

/// Uniform in the open interval (0, 1) from 53 random bits.
pub(crate) fn open_unit(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

/// Redraws the failure probability of every NF-enabled node. Nodes are
/// visited in declaration order and each consumes one uniform from a
/// ChaCha8 stream seeded with `seed`, so the same seed yields coupled draws
/// for different means.
pub fn sample_failure_probs(
    network: &PhysicalNetwork,
    mean: f64,
    variance: f64,
    seed: u64,
) -> Result<PhysicalNetwork, NetError> {
    if !(mean > 0.0 && mean < 1.0) {
        return Err(NetError::InvalidMean(mean));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(network.with_failure_probs(|node| {
        if node.is_nf_enabled() {
            failure_quantile(mean, variance, open_unit(&mut rng))
        } else {
            node.failure_prob
        }
    }))
}
