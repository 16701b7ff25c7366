//! Dempster-Shafer evidence over the two-element frame `{T, ¬T}`.
//!
//! The power set has four members: the empty set, `{T}`, `{¬T}` and the
//! whole frame `{T, ¬T}` (uncertainty). A [`MassFunction`] stores the three
//! non-empty masses; the empty set always carries zero.

use serde::{Deserialize, Serialize};

use crate::trust::NodeId;
use crate::{check_unit, Error, Result, NORMALIZATION_TOLERANCE};

/// Below this value of `1 - K` Dempster normalisation is treated as undefined.
pub const TOTAL_CONFLICT_EPSILON: f64 = 1e-12;

/// A member of the power set of `{T, ¬T}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FocalSet {
    Empty,
    Trusted,
    Untrusted,
    Either,
}

impl FocalSet {
    pub const ALL: [FocalSet; 4] = [
        FocalSet::Empty,
        FocalSet::Trusted,
        FocalSet::Untrusted,
        FocalSet::Either,
    ];

    fn bits(self) -> u8 {
        match self {
            FocalSet::Empty => 0b00,
            FocalSet::Trusted => 0b01,
            FocalSet::Untrusted => 0b10,
            FocalSet::Either => 0b11,
        }
    }

    pub fn is_subset_of(self, other: FocalSet) -> bool {
        self.bits() & !other.bits() == 0
    }

    pub fn intersects(self, other: FocalSet) -> bool {
        self.bits() & other.bits() != 0
    }
}

/// Basic probability assignment over `{T, ¬T}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassFunction {
    trusted: f64,
    untrusted: f64,
    uncertain: f64,
}

impl MassFunction {
    /// The vacuous assignment: all mass on the whole frame.
    pub const VACUOUS: MassFunction = MassFunction {
        trusted: 0.0,
        untrusted: 0.0,
        uncertain: 1.0,
    };

    pub fn new(trusted: f64, untrusted: f64, uncertain: f64) -> Result<Self> {
        check_unit("m(T)", trusted)?;
        check_unit("m(¬T)", untrusted)?;
        check_unit("m(T,¬T)", uncertain)?;
        let sum = trusted + untrusted + uncertain;
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self {
            trusted,
            untrusted,
            uncertain,
        })
    }

    pub fn trusted(&self) -> f64 {
        self.trusted
    }

    pub fn untrusted(&self) -> f64 {
        self.untrusted
    }

    pub fn uncertain(&self) -> f64 {
        self.uncertain
    }

    pub fn mass(&self, set: FocalSet) -> f64 {
        match set {
            FocalSet::Empty => 0.0,
            FocalSet::Trusted => self.trusted,
            FocalSet::Untrusted => self.untrusted,
            FocalSet::Either => self.uncertain,
        }
    }

    /// Pignistic probability of `{T}`: uncertainty split evenly.
    pub fn pignistic_trust(&self) -> f64 {
        self.trusted + 0.5 * self.uncertain
    }
}

/// Sum of the masses of every non-empty subset of `set`.
pub fn belief(m: &MassFunction, set: FocalSet) -> f64 {
    FocalSet::ALL
        .iter()
        .filter(|p| **p != FocalSet::Empty && p.is_subset_of(set))
        .map(|p| m.mass(*p))
        .sum()
}

/// Sum of the masses of every subset intersecting `set`.
pub fn plausibility(m: &MassFunction, set: FocalSet) -> f64 {
    FocalSet::ALL
        .iter()
        .filter(|p| p.intersects(set))
        .map(|p| m.mass(*p))
        .sum()
}

/// Normalised absolute difference `|a - b| / (|a| + |b|)`, with `dissim(0, 0) = 0`.
pub fn dissimilarity(a: f64, b: f64) -> Result<f64> {
    check_unit("a", a)?;
    check_unit("b", b)?;
    let denom = a.abs() + b.abs();
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((a - b).abs() / denom)
}

/// Mass assignment for the requester's own (direct) trust.
///
/// At or above `gamma` the trust is mass on `{T}`; below it, `1 - trust` is
/// mass on `{¬T}`. The remainder goes to uncertainty in both cases.
pub fn direct_bpa(direct_trust: f64, gamma: f64) -> Result<MassFunction> {
    check_unit("direct trust", direct_trust)?;
    check_unit("gamma", gamma)?;
    Ok(if direct_trust >= gamma {
        MassFunction {
            trusted: direct_trust,
            untrusted: 0.0,
            uncertain: 1.0 - direct_trust,
        }
    } else {
        MassFunction {
            trusted: 0.0,
            untrusted: 1.0 - direct_trust,
            uncertain: direct_trust,
        }
    })
}

/// Mass assignment for an indirect trust: the dissimilarity becomes
/// uncertainty and the rest goes to `{T}` or `{¬T}` by the side of `gamma`.
pub fn indirect_bpa(idt: f64, dissim: f64, gamma: f64) -> Result<MassFunction> {
    check_unit("indirect trust", idt)?;
    check_unit("dissimilarity", dissim)?;
    check_unit("gamma", gamma)?;
    let agree = 1.0 - dissim;
    Ok(if idt >= gamma {
        MassFunction {
            trusted: agree,
            untrusted: 0.0,
            uncertain: dissim,
        }
    } else {
        MassFunction {
            trusted: 0.0,
            untrusted: agree,
            uncertain: dissim,
        }
    })
}

/// Mass falling on the empty set when `m1` and `m2` are intersected.
pub fn conflict(m1: &MassFunction, m2: &MassFunction) -> f64 {
    m1.trusted * m2.untrusted + m1.untrusted * m2.trusted
}

/// Dempster's rule of combination.
pub fn combine(m1: &MassFunction, m2: &MassFunction) -> Result<MassFunction> {
    let k = conflict(m1, m2);
    let norm = 1.0 - k;
    if norm < TOTAL_CONFLICT_EPSILON {
        return Err(Error::TotalConflict { conflict: k });
    }
    let trusted = m1.trusted * m2.trusted + m1.trusted * m2.uncertain + m1.uncertain * m2.trusted;
    let untrusted = m1.untrusted * m2.untrusted + m1.untrusted * m2.uncertain + m1.uncertain * m2.untrusted;
    let uncertain = m1.uncertain * m2.uncertain;
    Ok(MassFunction {
        trusted: (trusted / norm).clamp(0.0, 1.0),
        untrusted: (untrusted / norm).clamp(0.0, 1.0),
        uncertain: (uncertain / norm).clamp(0.0, 1.0),
    })
}

/// How a fused mass function is collapsed to a single trust value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombinedScalar {
    /// `belief({T})`, i.e. the fused `m(T)`.
    #[default]
    Belief,
    /// `m(T) + m(T,¬T) / 2`.
    Pignistic,
}

impl CombinedScalar {
    pub fn apply(self, m: &MassFunction) -> f64 {
        match self {
            CombinedScalar::Belief => belief(m, FocalSet::Trusted),
            CombinedScalar::Pignistic => m.pignistic_trust(),
        }
    }
}

/// A recommendation about some target as received by the requester.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub recommender: NodeId,
    /// Trust of the target as reported by the recommender.
    pub reported: f64,
    /// Reported trust discounted by the requester's trust in the recommender.
    pub indirect: f64,
}

impl Recommendation {
    pub fn weighted(recommender: NodeId, trust_in_recommender: f64, reported: f64) -> Result<Self> {
        Ok(Self {
            recommender,
            reported,
            indirect: crate::trust::indirect_trust(trust_in_recommender, reported)?,
        })
    }

    /// Recommendation taken at face value.
    pub fn raw(recommender: NodeId, reported: f64) -> Result<Self> {
        Self::weighted(recommender, 1.0, reported)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionInput {
    pub direct_trust: f64,
    pub recommendations: Vec<Recommendation>,
    pub gamma: f64,
    pub scalar: CombinedScalar,
}

impl FusionInput {
    pub fn new(direct_trust: f64, gamma: f64) -> Self {
        Self {
            direct_trust,
            recommendations: Vec::new(),
            gamma,
            scalar: CombinedScalar::Belief,
        }
    }

    pub fn with_indirect(mut self, idts: impl IntoIterator<Item = f64>) -> Result<Self> {
        for (i, idt) in idts.into_iter().enumerate() {
            self.recommendations.push(Recommendation::raw(NodeId(i as u32), idt)?);
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fused {
    pub trust: f64,
    pub mass: MassFunction,
    /// Number of pairwise combinations performed.
    pub combinations: usize,
}

/// Fuses the direct trust with every recommendation, in list order.
///
/// Each recommendation's dissimilarity is measured against the direct trust.
/// With no recommendations the result is the direct mass function itself.
pub fn fuse(input: &FusionInput) -> Result<Fused> {
    let mut mass = direct_bpa(input.direct_trust, input.gamma)?;
    for rec in &input.recommendations {
        let dissim = dissimilarity(input.direct_trust, rec.indirect)?;
        mass = combine(&mass, &indirect_bpa(rec.indirect, dissim, input.gamma)?)?;
    }
    Ok(Fused {
        trust: input.scalar.apply(&mass),
        mass,
        combinations: input.recommendations.len(),
    })
}
