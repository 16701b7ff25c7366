//! Trust aggregation schemes used as comparison baselines.
//!
//! - Linear opinion pooling: weighted mean of recommendations, then a fixed
//!   weighted blend with the direct trust.
//! - Entropy-based probability model: trust concatenation along a path,
//!   Beta-parameter summation across parallel paths, entropy mapping.
//! - Subjective logic: `(b, d, u, a)` opinions with the standard discounting
//!   and consensus operators.
//! - Logistic mapping of a linear score.
//!
//! The subjective-logic operators follow the usual textbook definitions:
//! discounting `b = b1·b2, d = b1·d2, u = d1 + u1 + b1·u2, a = a2`, and
//! consensus normalised by `κ = u1 + u2 − u1·u2`.

use serde::{Deserialize, Serialize};

use crate::{check_unit, Error, Result, NORMALIZATION_TOLERANCE};

/// Guard on the consensus normaliser `κ`; both opinions are dogmatic below it.
pub const DOGMATIC_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearPoolConfig {
    pub direct_weight: f64,
    pub indirect_weight: f64,
}

impl Default for LinearPoolConfig {
    fn default() -> Self {
        Self {
            direct_weight: 0.5,
            indirect_weight: 0.5,
        }
    }
}

impl LinearPoolConfig {
    pub fn new(direct_weight: f64, indirect_weight: f64) -> Result<Self> {
        check_unit("direct weight", direct_weight)?;
        check_unit("indirect weight", indirect_weight)?;
        let sum = direct_weight + indirect_weight;
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self {
            direct_weight,
            indirect_weight,
        })
    }
}

/// Weighted mean of recommendations. Weights are renormalised to sum to one.
pub fn linear_pool(recommendations: &[f64], weights: &[f64]) -> Result<f64> {
    if recommendations.is_empty() {
        return Err(Error::NoEvidence);
    }
    if weights.len() != recommendations.len() {
        return Err(Error::LengthMismatch {
            features: recommendations.len(),
            coefficients: weights.len(),
        });
    }
    for &w in weights {
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "weight",
                value: w,
                reason: "must be nonnegative",
            });
        }
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::NoEvidence);
    }
    let mut pooled = 0.0;
    for (&t, &w) in recommendations.iter().zip(weights) {
        pooled += w / total * check_unit("recommendation", t)?;
    }
    // Keep rounding from pushing a convex combination outside its inputs.
    let (lo, hi) = recommendations
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| {
            (lo.min(t), hi.max(t))
        });
    Ok(pooled.clamp(lo, hi))
}

/// [`linear_pool`] with uniform weights `1/N`.
pub fn linear_pool_uniform(recommendations: &[f64]) -> Result<f64> {
    linear_pool(recommendations, &vec![1.0; recommendations.len()])
}

pub fn linear_combined(direct: f64, pooled_indirect: f64, cfg: &LinearPoolConfig) -> Result<f64> {
    check_unit("direct trust", direct)?;
    check_unit("pooled indirect trust", pooled_indirect)?;
    Ok(cfg.direct_weight * direct + cfg.indirect_weight * pooled_indirect)
}

/// Trust concatenation through one recommender:
/// `p1·p2 + (1 − p1)(1 − p2)`.
pub fn concat_prob(p_recommender: f64, p_target: f64) -> Result<f64> {
    check_unit("recommender probability", p_recommender)?;
    check_unit("target probability", p_target)?;
    Ok(p_recommender * p_target + (1.0 - p_recommender) * (1.0 - p_target))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaEvidence {
    alpha: f64,
    beta: f64,
}

impl BetaEvidence {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be positive",
                });
            }
        }
        Ok(Self { alpha, beta })
    }

    /// Beta parameters for probability `p` backed by `weight` pseudo-observations
    /// on top of a uniform prior: `(p·w + 1, (1 − p)·w + 1)`.
    pub fn from_probability(p: f64, weight: f64) -> Result<Self> {
        check_unit("probability", p)?;
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "pseudo-evidence weight",
                value: weight,
                reason: "must be nonnegative",
            });
        }
        Self::new(p * weight + 1.0, (1.0 - p) * weight + 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Merges parallel paths by summing their Beta parameters.
pub fn multipath_merge(paths: &[BetaEvidence]) -> Result<BetaEvidence> {
    if paths.is_empty() {
        return Err(Error::NoEvidence);
    }
    let (alpha, beta) = paths.iter().fold((0.0, 0.0), |(a, b), e| (a + e.alpha, b + e.beta));
    BetaEvidence::new(alpha, beta)
}

pub fn beta_expectation(e: &BetaEvidence) -> f64 {
    e.alpha / (e.alpha + e.beta)
}

/// Entropy trust on `[-1, 1]`: `1 − H(p)` above one half, `H(p) − 1` below.
pub fn entropy_trust_signed(p: f64) -> Result<f64> {
    check_unit("probability", p)?;
    let h = crate::trust::binary_entropy(p);
    Ok(if p >= 0.5 { 1.0 - h } else { h - 1.0 })
}

/// Subjective-logic binomial opinion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Opinion {
    pub belief: f64,
    pub disbelief: f64,
    pub uncertainty: f64,
    pub base_rate: f64,
}

impl Opinion {
    pub fn new(belief: f64, disbelief: f64, uncertainty: f64, base_rate: f64) -> Result<Self> {
        check_unit("belief", belief)?;
        check_unit("disbelief", disbelief)?;
        check_unit("uncertainty", uncertainty)?;
        check_unit("base rate", base_rate)?;
        let sum = belief + disbelief + uncertainty;
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self {
            belief,
            disbelief,
            uncertainty,
            base_rate,
        })
    }

    pub fn vacuous(base_rate: f64) -> Self {
        Self {
            belief: 0.0,
            disbelief: 0.0,
            uncertainty: 1.0,
            base_rate,
        }
    }

    /// Opinion holding a scalar trust with a fixed uncertainty `u0`:
    /// `b = t(1 − u0)`, `d = (1 − t)(1 − u0)`, `u = u0`.
    pub fn from_trust(trust: f64, uncertainty: f64, base_rate: f64) -> Result<Self> {
        check_unit("trust", trust)?;
        check_unit("uncertainty", uncertainty)?;
        let committed = 1.0 - uncertainty;
        Self::new(trust * committed, (1.0 - trust) * committed, uncertainty, base_rate)
    }

    pub fn expectation(&self) -> f64 {
        opinion_expectation(self)
    }
}

pub fn opinion_expectation(o: &Opinion) -> f64 {
    o.belief + o.base_rate * o.uncertainty
}

/// Discounts `target` (the recommender's opinion of the target) by
/// `recommender` (our opinion of the recommender).
pub fn discount(recommender: &Opinion, target: &Opinion) -> Opinion {
    Opinion {
        belief: recommender.belief * target.belief,
        disbelief: recommender.belief * target.disbelief,
        uncertainty: recommender.disbelief + recommender.uncertainty + recommender.belief * target.uncertainty,
        base_rate: target.base_rate,
    }
}

/// Consensus of two independent opinions. The base rate is taken from `o1`.
pub fn consensus(o1: &Opinion, o2: &Opinion) -> Result<Opinion> {
    let kappa = o1.uncertainty + o2.uncertainty - o1.uncertainty * o2.uncertainty;
    if kappa <= DOGMATIC_EPSILON {
        return Err(Error::DogmaticConsensus);
    }
    Ok(Opinion {
        belief: (o1.belief * o2.uncertainty + o2.belief * o1.uncertainty) / kappa,
        disbelief: (o1.disbelief * o2.uncertainty + o2.disbelief * o1.uncertainty) / kappa,
        uncertainty: o1.uncertainty * o2.uncertainty / kappa,
        base_rate: o1.base_rate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitModel {
    pub coefficients: Vec<f64>,
    pub features: Vec<f64>,
}

impl LogitModel {
    pub fn new(coefficients: Vec<f64>, features: Vec<f64>) -> Result<Self> {
        if coefficients.len() != features.len() {
            return Err(Error::LengthMismatch {
                features: features.len(),
                coefficients: coefficients.len(),
            });
        }
        Ok(Self { coefficients, features })
    }

    pub fn score(&self) -> f64 {
        self.features.iter().zip(&self.coefficients).map(|(x, b)| x * b).sum()
    }
}

/// Logistic trust `1 / (1 + e^(−xᵀβ))`.
pub fn logit_map(model: &LogitModel) -> f64 {
    logistic(model.score())
}

pub fn logistic(score: f64) -> f64 {
    1.0 / (1.0 + (-score).exp())
}
