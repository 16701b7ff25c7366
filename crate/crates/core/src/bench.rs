//! Star-topology attacker sweep.
//!
//! An evaluator holds a direct trust of one target and receives
//! recommendations about it. The sweep raises the number of lying
//! recommenders from 0 to `n_recommenders` and records, for each scheme,
//! the aggregated trust at every step.

use std::fmt;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::aggregators::{self, BetaEvidence, LinearPoolConfig, Opinion};
use crate::dst::{self, CombinedScalar, FusionInput, Recommendation};
use crate::trust::{self, NodeId};
use crate::{check_unit, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    DsTrust,
    LinearPool,
    SubjectiveLogic,
    EntropyModel,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::DsTrust,
        Scheme::LinearPool,
        Scheme::SubjectiveLogic,
        Scheme::EntropyModel,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::DsTrust => "ds_trust",
            Scheme::LinearPool => "linear_pool",
            Scheme::SubjectiveLogic => "subjective_logic",
            Scheme::EntropyModel => "entropy_model",
        }
    }

    /// One-line description of how the scheme is wired onto the star topology.
    pub fn wiring(self) -> &'static str {
        match self {
            Scheme::DsTrust => {
                "direct bpa folded with one dissimilarity-classified bpa per indirect trust (Dempster), scalar per combined_scalar"
            }
            Scheme::LinearPool => {
                "uniform mean of indirect trusts, then direct_weight*direct + indirect_weight*pooled; direct only without recommendations"
            }
            Scheme::SubjectiveLogic => {
                "direct opinion, then consensus with discount(recommender opinion, recommendation opinion) per recommender; expectation b + a*u"
            }
            Scheme::EntropyModel => {
                "Beta(p*w+1, (1-p)*w+1) for the direct path and for concat(recommender, recommendation) per path, summed, expectation mapped through the [0,1] entropy trust"
            }
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sch| sch.as_str() == s)
            .ok_or_else(|| Error::UnknownScheme(s.to_owned()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attack {
    /// Liars report low trust of a well-behaved target.
    Badmouth,
    /// Liars report high trust of a misbehaving target.
    BallotStuff,
}

impl Attack {
    pub fn as_str(self) -> &'static str {
        match self {
            Attack::Badmouth => "badmouth",
            Attack::BallotStuff => "ballot_stuff",
        }
    }
}

impl fmt::Display for Attack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Attack {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "badmouth" => Ok(Attack::Badmouth),
            "ballot_stuff" => Ok(Attack::BallotStuff),
            other => Err(Error::InvalidOverride {
                key: "attack".into(),
                reason: format!("expected badmouth or ballot_stuff, got `{other}`"),
            }),
        }
    }
}

/// Who is recommending at sweep point `k`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Population {
    /// Only the `k` liars recommend; `k = 0` is the direct trust alone.
    #[default]
    AttackersOnly,
    /// `k` liars plus `n_recommenders - k` honest recommenders.
    FixedPool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_recommenders: usize,
    pub attack: Attack,
    pub population: Population,
    pub lie_value: f64,
    pub honest_value: f64,
    pub direct_trust_of_target: f64,
    pub recommender_trust: f64,
    pub gamma: f64,
    pub schemes: Vec<Scheme>,
    pub combined_scalar: CombinedScalar,
    pub linear: LinearPoolConfig,
    /// Uncertainty `u0` of opinions built from scalar trusts.
    pub opinion_uncertainty: f64,
    pub opinion_base_rate: f64,
    /// Pseudo-observation count behind each Beta conversion.
    pub beta_weight: f64,
}

impl SweepConfig {
    pub fn for_attack(attack: Attack) -> Self {
        let (lie, truth) = match attack {
            Attack::Badmouth => (0.1, 0.9),
            Attack::BallotStuff => (0.9, 0.1),
        };
        Self {
            n_recommenders: 20,
            attack,
            population: Population::AttackersOnly,
            lie_value: lie,
            honest_value: truth,
            direct_trust_of_target: truth,
            recommender_trust: 1.0,
            gamma: 0.5,
            schemes: Scheme::ALL.to_vec(),
            combined_scalar: CombinedScalar::Belief,
            linear: LinearPoolConfig::default(),
            opinion_uncertainty: 0.1,
            opinion_base_rate: 0.5,
            beta_weight: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("lie_value", self.lie_value)?;
        check_unit("honest_value", self.honest_value)?;
        check_unit("direct_trust_of_target", self.direct_trust_of_target)?;
        check_unit("recommender_trust", self.recommender_trust)?;
        check_unit("opinion_uncertainty", self.opinion_uncertainty)?;
        check_unit("opinion_base_rate", self.opinion_base_rate)?;
        LinearPoolConfig::new(self.linear.direct_weight, self.linear.indirect_weight)?;
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                value: self.gamma,
                reason: "must lie in (0, 1)",
            });
        }
        if !(self.beta_weight >= 0.0 && self.beta_weight.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "beta_weight",
                value: self.beta_weight,
                reason: "must be nonnegative",
            });
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |reason: String| Error::InvalidOverride {
            key: key.to_owned(),
            reason,
        };
        let real = || -> Result<f64> { value.trim().parse::<f64>().map_err(|e| bad(format!("`{value}`: {e}"))) };
        match key.trim() {
            "n_recommenders" => {
                self.n_recommenders = value.trim().parse().map_err(|e| bad(format!("`{value}`: {e}")))?
            }
            "attack" => self.attack = value.trim().parse()?,
            "population" => {
                self.population = match value.trim() {
                    "attackers_only" => Population::AttackersOnly,
                    "fixed_pool" => Population::FixedPool,
                    other => return Err(bad(format!("expected attackers_only or fixed_pool, got `{other}`"))),
                }
            }
            "combined_scalar" => {
                self.combined_scalar = match value.trim() {
                    "belief" => CombinedScalar::Belief,
                    "pignistic" => CombinedScalar::Pignistic,
                    other => return Err(bad(format!("expected belief or pignistic, got `{other}`"))),
                }
            }
            "schemes" => self.schemes = parse_scheme_list(value)?,
            "lie_value" => self.lie_value = real()?,
            "honest_value" => self.honest_value = real()?,
            "direct_trust_of_target" | "direct_trust" => self.direct_trust_of_target = real()?,
            "recommender_trust" => self.recommender_trust = real()?,
            "gamma" => self.gamma = real()?,
            "direct_weight" => {
                let w = real()?;
                self.linear = LinearPoolConfig {
                    direct_weight: w,
                    indirect_weight: 1.0 - w,
                };
            }
            "opinion_uncertainty" => self.opinion_uncertainty = real()?,
            "opinion_base_rate" => self.opinion_base_rate = real()?,
            "beta_weight" => self.beta_weight = real()?,
            other => return Err(bad(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Reported recommendations at sweep point `attackers`, liars first.
    pub fn recommendations_at(&self, attackers: usize) -> Vec<f64> {
        let mut recs = vec![self.lie_value; attackers];
        if self.population == Population::FixedPool {
            recs.extend(std::iter::repeat_n(
                self.honest_value,
                self.n_recommenders.saturating_sub(attackers),
            ));
        }
        recs
    }
}

/// Parses a comma-separated scheme list such as `ds_trust,linear_pool`.
pub fn parse_scheme_list(list: &str) -> Result<Vec<Scheme>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub scheme: Scheme,
    pub attack: Attack,
    /// `(attacker count, aggregated trust)`, attacker count strictly increasing.
    pub points: Vec<(usize, f64)>,
    pub crossing_index: Option<usize>,
}

/// Aggregated trust of one scheme given the direct trust and the reported
/// recommendations.
pub fn evaluate_scheme(cfg: &SweepConfig, scheme: Scheme, reported: &[f64]) -> Result<f64> {
    let direct = cfg.direct_trust_of_target;
    match scheme {
        Scheme::DsTrust => {
            let recommendations = reported
                .iter()
                .enumerate()
                .map(|(i, &r)| Recommendation::weighted(NodeId(i as u32), cfg.recommender_trust, r))
                .collect::<Result<Vec<_>>>()?;
            let input = FusionInput {
                direct_trust: direct,
                recommendations,
                gamma: cfg.gamma,
                scalar: cfg.combined_scalar,
            };
            Ok(dst::fuse(&input)?.trust)
        }
        Scheme::LinearPool => {
            if reported.is_empty() {
                return Ok(direct);
            }
            let indirect = reported
                .iter()
                .map(|&r| trust::indirect_trust(cfg.recommender_trust, r))
                .collect::<Result<Vec<_>>>()?;
            let pooled = aggregators::linear_pool_uniform(&indirect)?;
            aggregators::linear_combined(direct, pooled, &cfg.linear)
        }
        Scheme::SubjectiveLogic => {
            let u0 = cfg.opinion_uncertainty;
            let a = cfg.opinion_base_rate;
            let recommender = Opinion::from_trust(cfg.recommender_trust, u0, a)?;
            let mut acc = Opinion::from_trust(direct, u0, a)?;
            for &r in reported {
                let path = aggregators::discount(&recommender, &Opinion::from_trust(r, u0, a)?);
                acc = aggregators::consensus(&acc, &path)?;
            }
            Ok(acc.expectation())
        }
        Scheme::EntropyModel => {
            let w = cfg.beta_weight;
            let mut paths = vec![BetaEvidence::from_probability(direct, w)?];
            for &r in reported {
                let p = aggregators::concat_prob(cfg.recommender_trust, r)?;
                paths.push(BetaEvidence::from_probability(p, w)?);
            }
            let merged = aggregators::multipath_merge(&paths)?;
            trust::entropy_trust(aggregators::beta_expectation(&merged))
        }
    }
}

/// Runs every configured scheme over attacker counts `0..=n_recommenders`.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepCurve>> {
    cfg.validate()?;
    cfg.schemes
        .iter()
        .map(|&scheme| {
            let points = (0..=cfg.n_recommenders)
                .map(|k| Ok((k, evaluate_scheme(cfg, scheme, &cfg.recommendations_at(k))?)))
                .collect::<Result<Vec<_>>>()?;
            let crossing = crossing_index(&points, cfg.gamma, cfg.attack);
            Ok(SweepCurve {
                scheme,
                attack: cfg.attack,
                points,
                crossing_index: crossing,
            })
        })
        .collect()
}

/// First attacker count at which the trust lands on the wrong side of `gamma`:
/// below it under badmouthing, at or above it under ballot-stuffing.
pub fn crossing_index(points: &[(usize, f64)], gamma: f64, attack: Attack) -> Option<usize> {
    points
        .iter()
        .find(|(_, t)| match attack {
            Attack::Badmouth => *t < gamma,
            Attack::BallotStuff => *t >= gamma,
        })
        .map(|(k, _)| *k)
}

pub const CURVE_HEADER: &str = "scheme,attack,attackers,trust";

pub fn write_curves_to<W: Write>(curves: &[SweepCurve], mut out: W) -> io::Result<()> {
    writeln!(out, "{CURVE_HEADER}")?;
    for curve in curves {
        for (k, t) in &curve.points {
            writeln!(out, "{},{},{},{:.6}", curve.scheme, curve.attack, k, t)?;
        }
    }
    out.flush()
}

pub fn write_curves(curves: &[SweepCurve], path: impl AsRef<Path>) -> io::Result<()> {
    let file = std::fs::File::create(path)?;
    write_curves_to(curves, io::BufWriter::new(file))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub scheme: Scheme,
    pub attack: Attack,
    pub attackers: usize,
    pub trust: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct CurveParseError {
    pub line: usize,
    pub reason: String,
}

/// Parses a curves CSV as produced by [`write_curves`].
pub fn parse_curves(text: &str) -> std::result::Result<Vec<CurveRow>, CurveParseError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == CURVE_HEADER => {}
        _ => {
            return Err(CurveParseError {
                line: 1,
                reason: format!("expected header `{CURVE_HEADER}`"),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let err = |reason: String| CurveParseError { line: line_no, reason };
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let [scheme, attack, attackers, trust] = fields[..] else {
            return Err(err(format!("expected 4 fields, found {}", fields.len())));
        };
        let trust: f64 = trust.parse().map_err(|e| err(format!("trust: {e}")))?;
        if !trust.is_finite() {
            return Err(err(format!("trust `{trust}` is not finite")));
        }
        rows.push(CurveRow {
            scheme: scheme.parse().map_err(|e: Error| err(e.to_string()))?,
            attack: attack.parse().map_err(|e: Error| err(e.to_string()))?,
            attackers: attackers.parse().map_err(|e| err(format!("attackers: {e}")))?,
            trust,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(points: &[f64]) -> Vec<(usize, f64)> {
        points.iter().copied().enumerate().collect()
    }

    #[test]
    fn crossing_examples() {
        let mut falling: Vec<f64> = (0..=10).map(|k| 0.95 - 0.04 * k as f64).collect();
        falling.extend([0.49, 0.4, 0.3]);
        assert_eq!(crossing_index(&curve(&falling), 0.5, Attack::Badmouth), Some(11));
        assert_eq!(crossing_index(&curve(&[0.9; 21]), 0.5, Attack::Badmouth), None);
        assert_eq!(
            crossing_index(&curve(&[0.1, 0.3, 0.5]), 0.5, Attack::BallotStuff),
            Some(2)
        );
    }

    #[test]
    fn default_sweep_shape() {
        let curves = run_sweep(&SweepConfig::for_attack(Attack::Badmouth)).unwrap();
        assert_eq!(curves.len(), 4);
        for c in &curves {
            assert_eq!(c.points.len(), 21);
            assert!(c.points.windows(2).all(|w| w[0].0 < w[1].0));
        }
    }

    #[test]
    fn ds_trust_single_badmouther_stays_trusted() {
        let cfg = SweepConfig::for_attack(Attack::Badmouth);
        let t = evaluate_scheme(&cfg, Scheme::DsTrust, &cfg.recommendations_at(1)).unwrap();
        assert!(t > 0.5);
    }

    #[test]
    fn ds_trust_agreeing_evidence_never_lowers_belief() {
        let mut cfg = SweepConfig::for_attack(Attack::Badmouth);
        cfg.population = Population::FixedPool;
        let t = evaluate_scheme(&cfg, Scheme::DsTrust, &cfg.recommendations_at(0)).unwrap();
        assert!(t >= cfg.direct_trust_of_target);
    }

    #[test]
    fn fixed_pool_fills_with_honest() {
        let mut cfg = SweepConfig::for_attack(Attack::Badmouth);
        cfg.population = Population::FixedPool;
        let recs = cfg.recommendations_at(3);
        assert_eq!(recs.len(), 20);
        assert_eq!(recs.iter().filter(|&&r| r == 0.1).count(), 3);
        assert_eq!(SweepConfig::for_attack(Attack::Badmouth).recommendations_at(3).len(), 3);
    }

    #[test]
    fn overrides() {
        let mut cfg = SweepConfig::for_attack(Attack::Badmouth);
        cfg.apply_override("direct_trust", "0.8").unwrap();
        cfg.apply_override("schemes", "ds_trust, linear_pool").unwrap();
        cfg.apply_override("population", "fixed_pool").unwrap();
        assert_eq!(cfg.direct_trust_of_target, 0.8);
        assert_eq!(cfg.schemes, vec![Scheme::DsTrust, Scheme::LinearPool]);
        assert!(cfg.apply_override("gamma", "abc").is_err());
        assert!(cfg.apply_override("nope", "1").is_err());
        assert!(cfg.apply_override("schemes", "logit").is_err());
    }

    #[test]
    fn unknown_scheme_is_rejected() {
        assert_eq!(
            "logit_trust".parse::<Scheme>(),
            Err(Error::UnknownScheme("logit_trust".into()))
        );
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut cfg = SweepConfig::for_attack(Attack::Badmouth);
        cfg.lie_value = 1.5;
        assert!(run_sweep(&cfg).is_err());
    }

    #[test]
    fn empty_curve_list_writes_header_only() {
        let mut buf = Vec::new();
        write_curves_to(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CURVE_HEADER}\n"));
    }

    #[test]
    fn one_scheme_writes_22_lines() {
        let mut cfg = SweepConfig::for_attack(Attack::Badmouth);
        cfg.schemes = vec![Scheme::DsTrust];
        let curves = run_sweep(&cfg).unwrap();
        let mut buf = Vec::new();
        write_curves_to(&curves, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 22);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_curves("").is_err());
        assert!(parse_curves("scheme,attack,attackers,trust\nds_trust,badmouth,1").is_err());
        assert!(parse_curves("scheme,attack,attackers,trust\nds_trust,badmouth,x,0.5").is_err());
        assert!(parse_curves("scheme,attack,attackers,trust\nds_trust,badmouth,1,NaN").is_err());
        assert!(parse_curves("scheme,attack,attackers,trust\nfoo,badmouth,1,0.5").is_err());
    }
}
