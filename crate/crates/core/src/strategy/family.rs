//! Parametric strategy families for synthesising pools offline.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Attitude, Behavior, Fault, Observation, Origin, StepMeter, Strategy, StrategyPool};
use crate::error::{Error, Result};
use crate::game::Action;
use crate::seed::{self, StreamRng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RealDist {
    Fixed(f64),
    /// Uniform on `[lo, hi]`.
    Uniform([f64; 2]),
    Choice(Vec<f64>),
}

impl RealDist {
    fn check(&self, name: &str, lo: f64, hi: f64) -> Result<()> {
        let ok = |v: f64| (lo..=hi).contains(&v);
        let valid = match self {
            RealDist::Fixed(v) => ok(*v),
            RealDist::Uniform([a, b]) => ok(*a) && ok(*b) && a <= b,
            RealDist::Choice(vs) => !vs.is_empty() && vs.iter().all(|v| ok(*v)),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::params(format!("{name}: {self:?} must lie in [{lo}, {hi}]")))
        }
    }

    fn sample(&self, rng: &mut StreamRng) -> f64 {
        match self {
            RealDist::Fixed(v) => *v,
            RealDist::Uniform([a, b]) if a == b => *a,
            RealDist::Uniform([a, b]) => rng.random_range(*a..=*b),
            RealDist::Choice(vs) => vs[rng.random_range(0..vs.len())],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntDist {
    Fixed(usize),
    /// Uniform on the inclusive range `[lo, hi]`.
    Uniform([usize; 2]),
    Choice(Vec<usize>),
}

impl IntDist {
    fn check(&self, name: &str, min: usize) -> Result<()> {
        let valid = match self {
            IntDist::Fixed(v) => *v >= min,
            IntDist::Uniform([a, b]) => *a >= min && a <= b,
            IntDist::Choice(vs) => !vs.is_empty() && vs.iter().all(|v| *v >= min),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::params(format!("{name}: {self:?} must be >= {min}")))
        }
    }

    fn sample(&self, rng: &mut StreamRng) -> usize {
        match self {
            IntDist::Fixed(v) => *v,
            IntDist::Uniform([a, b]) => rng.random_range(*a..=*b),
            IntDist::Choice(vs) => vs[rng.random_range(0..vs.len())],
        }
    }
}

/// A family of strategies with the distributions its parameters are drawn from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    AllC,
    AllD,
    Rnd { p: RealDist },
    Reciprocator { threshold: RealDist, forgiveness: RealDist },
    GrimTrigger { tolerance: RealDist },
    EndgameDefector { horizon: IntDist, threshold: RealDist },
    StockGuardian { guard: RealDist, threshold: RealDist },
    Rota { period: IntDist, punish: bool },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedFamily {
    #[serde(default = "one")]
    pub weight: f64,
    pub family: Family,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub gene_tag: String,
    pub attitude: Attitude,
    pub families: Vec<WeightedFamily>,
}

impl FamilyConfig {
    pub fn single(gene_tag: impl Into<String>, attitude: Attitude, family: Family) -> Self {
        FamilyConfig {
            gene_tag: gene_tag.into(),
            attitude,
            families: vec![WeightedFamily { weight: 1.0, family }],
        }
    }
}

impl Family {
    fn check(&self) -> Result<()> {
        match self {
            Family::AllC | Family::AllD => Ok(()),
            Family::Rnd { p } => p.check("p", 0.0, 1.0),
            Family::Reciprocator {
                threshold,
                forgiveness,
            } => {
                threshold.check("threshold", 0.0, 1.0)?;
                forgiveness.check("forgiveness", 0.0, 1.0)
            }
            Family::GrimTrigger { tolerance } => tolerance.check("tolerance", 0.0, 1.0),
            Family::EndgameDefector { horizon, threshold } => {
                horizon.check("horizon", 0)?;
                threshold.check("threshold", 0.0, 1.0)
            }
            Family::StockGuardian { guard, threshold } => {
                guard.check("guard", 0.0, 1.0)?;
                threshold.check("threshold", 0.0, 1.0)
            }
            Family::Rota { period, .. } => period.check("period", 1),
        }
    }

    fn instantiate(&self, rng: &mut StreamRng) -> (String, Box<dyn Behavior>) {
        use super::Reference;
        match self {
            Family::AllC => ("all_c".into(), Box::new(Reference::AllC)),
            Family::AllD => ("all_d".into(), Box::new(Reference::AllD)),
            Family::Rnd { p } => {
                let p = p.sample(rng);
                (format!("rnd(p={p:.3})"), Box::new(Reference::Rnd(p)))
            }
            Family::Reciprocator {
                threshold,
                forgiveness,
            } => {
                let b = Reciprocator {
                    threshold: threshold.sample(rng),
                    forgiveness: forgiveness.sample(rng),
                };
                (
                    format!("reciprocator(t={:.3},f={:.3})", b.threshold, b.forgiveness),
                    Box::new(b),
                )
            }
            Family::GrimTrigger { tolerance } => {
                let b = GrimTrigger::new(tolerance.sample(rng));
                (format!("grim(tol={:.3})", b.tolerance), Box::new(b))
            }
            Family::EndgameDefector { horizon, threshold } => {
                let b = EndgameDefector {
                    horizon: horizon.sample(rng),
                    threshold: threshold.sample(rng),
                };
                (
                    format!("endgame(h={},t={:.3})", b.horizon, b.threshold),
                    Box::new(b),
                )
            }
            Family::StockGuardian { guard, threshold } => {
                let b = StockGuardian {
                    guard: guard.sample(rng),
                    threshold: threshold.sample(rng),
                };
                (
                    format!("guardian(g={:.3},t={:.3})", b.guard, b.threshold),
                    Box::new(b),
                )
            }
            Family::Rota { period, punish } => {
                let b = RotaFollower {
                    period: period.sample(rng),
                    punish: *punish,
                };
                (format!("rota(p={},punish={})", b.period, b.punish), Box::new(b))
            }
        }
    }
}

/// Draws `size` strategies from the configured families. Member `i` uses its
/// own sub-stream, so pools are reproducible and prefix-stable in `size`.
pub fn synth_pool(config: &FamilyConfig, size: usize, seed: u64) -> Result<StrategyPool> {
    if config.families.is_empty() {
        return Err(Error::params("family list is empty"));
    }
    if size == 0 {
        return Err(Error::params("pool size must be >= 1"));
    }
    for wf in &config.families {
        wf.family.check()?;
    }
    let weights = WeightedIndex::new(config.families.iter().map(|f| f.weight))
        .map_err(|e| Error::params(format!("family weights: {e}")))?;
    let members = (0..size)
        .map(|i| {
            let mut rng = seed::stream(seed, &[seed::TAG_POOL, i as u64]);
            let family = &config.families[weights.sample(&mut rng)].family;
            let (label, behavior) = family.instantiate(&mut rng);
            Strategy::new(format!("{label}#{i}"), Origin::Parametric, behavior)
        })
        .collect();
    StrategyPool::new(config.gene_tag.clone(), config.attitude, members)
}

fn reciprocate(obs: &Observation<'_>, threshold: f64) -> bool {
    obs.opponent_coop_fraction_last()
        .is_none_or(|f| f >= threshold)
}

/// Cooperates first, then whenever at least `threshold` of opponents
/// cooperated last round; otherwise forgives with probability `forgiveness`.
#[derive(Clone, Debug, PartialEq)]
pub struct Reciprocator {
    pub threshold: f64,
    pub forgiveness: f64,
}

impl Behavior for Reciprocator {
    fn decide(
        &mut self,
        obs: &Observation<'_>,
        rng: &mut StreamRng,
        meter: &mut StepMeter,
    ) -> Result<Action, Fault> {
        meter.charge(1)?;
        if reciprocate(obs, self.threshold) {
            return Ok(Action::C);
        }
        Ok(Action::from_cooperate(
            self.forgiveness > 0.0 && rng.random_bool(self.forgiveness),
        ))
    }

    fn box_clone(&self) -> Box<dyn Behavior> {
        Box::new(self.clone())
    }
}

/// Cooperates until a round in which more than `tolerance` of opponents
/// defected, then defects for the rest of the game.
#[derive(Clone, Debug, PartialEq)]
pub struct GrimTrigger {
    pub tolerance: f64,
    triggered: bool,
}

impl GrimTrigger {
    pub fn new(tolerance: f64) -> Self {
        GrimTrigger {
            tolerance,
            triggered: false,
        }
    }
}

impl Behavior for GrimTrigger {
    fn decide(
        &mut self,
        obs: &Observation<'_>,
        _rng: &mut StreamRng,
        meter: &mut StepMeter,
    ) -> Result<Action, Fault> {
        meter.charge(1)?;
        if let Some(f) = obs.opponent_coop_fraction_last() {
            if 1.0 - f > self.tolerance {
                self.triggered = true;
            }
        }
        Ok(Action::from_cooperate(!self.triggered))
    }

    fn box_clone(&self) -> Box<dyn Behavior> {
        Box::new(GrimTrigger::new(self.tolerance))
    }
}

/// Reciprocates until the last `horizon` rounds, then defects.
#[derive(Clone, Debug, PartialEq)]
pub struct EndgameDefector {
    pub horizon: usize,
    pub threshold: f64,
}

impl Behavior for EndgameDefector {
    fn decide(
        &mut self,
        obs: &Observation<'_>,
        _rng: &mut StreamRng,
        meter: &mut StepMeter,
    ) -> Result<Action, Fault> {
        meter.charge(1)?;
        if obs.rounds_remaining() < self.horizon {
            return Ok(Action::D);
        }
        Ok(Action::from_cooperate(reciprocate(obs, self.threshold)))
    }

    fn box_clone(&self) -> Box<dyn Behavior> {
        Box::new(self.clone())
    }
}

/// Cooperates whenever the stock is at or below `guard` of capacity,
/// otherwise reciprocates. Outside the Common Pool it is a plain reciprocator.
#[derive(Clone, Debug, PartialEq)]
pub struct StockGuardian {
    pub guard: f64,
    pub threshold: f64,
}

impl Behavior for StockGuardian {
    fn decide(
        &mut self,
        obs: &Observation<'_>,
        _rng: &mut StreamRng,
        meter: &mut StepMeter,
    ) -> Result<Action, Fault> {
        meter.charge(1)?;
        if obs.stock_fraction().is_some_and(|f| f <= self.guard) {
            return Ok(Action::C);
        }
        Ok(Action::from_cooperate(reciprocate(obs, self.threshold)))
    }

    fn box_clone(&self) -> Box<dyn Behavior> {
        Box::new(self.clone())
    }
}

/// Follows a private schedule: player `i` cooperates in round `t` iff
/// `(i + t) % period == 0`. With `punish`, defects after any round in which
/// some player broke that schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct RotaFollower {
    pub period: usize,
    pub punish: bool,
}

impl RotaFollower {
    fn scheduled(&self, player: usize, round: usize) -> bool {
        (player + round).is_multiple_of(self.period)
    }
}

impl Behavior for RotaFollower {
    fn decide(
        &mut self,
        obs: &Observation<'_>,
        _rng: &mut StreamRng,
        meter: &mut StepMeter,
    ) -> Result<Action, Fault> {
        meter.charge(1)?;
        if self.punish {
            if let Some(last) = obs.last_round() {
                meter.charge(last.actions.len() as u64)?;
                let t = obs.round_index - 1;
                let broken = last
                    .actions
                    .iter()
                    .enumerate()
                    .any(|(i, a)| self.scheduled(i, t) && !a.is_cooperate());
                if broken {
                    return Ok(Action::D);
                }
            }
        }
        Ok(Action::from_cooperate(
            self.scheduled(obs.my_index, obs.round_index),
        ))
    }

    fn box_clone(&self) -> Box<dyn Behavior> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{play_game, GameKind, GameParams};
    use crate::strategy::{make_reference, Reference};

    fn cfg(family: Family) -> FamilyConfig {
        FamilyConfig::single("synthetic", Attitude::Collective, family)
    }

    #[test]
    fn constant_family() {
        let pool = synth_pool(&cfg(Family::AllD), 512, 3).unwrap();
        assert_eq!(pool.len(), 512);
        assert!(pool.members.iter().all(|s| s.label.starts_with("all_d")));
    }

    #[test]
    fn reproducible_given_seed() {
        let c = cfg(Family::Rnd {
            p: RealDist::Uniform([0.0, 1.0]),
        });
        let a = synth_pool(&c, 100, 9).unwrap();
        let b = synth_pool(&c, 100, 9).unwrap();
        let labels = |p: &StrategyPool| p.members.iter().map(|s| s.label.clone()).collect::<Vec<_>>();
        assert_eq!(labels(&a), labels(&b));
        let other = synth_pool(&c, 100, 10).unwrap();
        assert_ne!(labels(&a), labels(&other));
    }

    #[test]
    fn endgame_defectors_open_with_c_and_close_with_d() {
        let c = cfg(Family::EndgameDefector {
            horizon: IntDist::Uniform([1, 5]),
            threshold: RealDist::Uniform([0.0, 1.0]),
        });
        let pool = synth_pool(&c, 64, 5).unwrap();
        let params = GameParams::new(4);
        let all_c = make_reference(Reference::AllC, 4).unwrap();
        for (i, member) in pool.members.iter().enumerate() {
            let players = [member, &all_c, &all_c, &all_c];
            let g = play_game(GameKind::PublicGoods, &params, &players, i as u64).unwrap();
            assert_eq!(g.rounds[0].actions[0], Action::C, "{}", member.label);
            assert_eq!(g.rounds[params.rounds - 1].actions[0], Action::D, "{}", member.label);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let empty = FamilyConfig {
            gene_tag: "x".into(),
            attitude: Attitude::Exploitative,
            families: vec![],
        };
        assert!(synth_pool(&empty, 4, 0).is_err());
        assert!(synth_pool(&cfg(Family::AllC), 0, 0).is_err());
        let bad = cfg(Family::Rnd {
            p: RealDist::Uniform([0.5, 1.5]),
        });
        assert!(synth_pool(&bad, 4, 0).is_err());
        let bad = cfg(Family::Rota {
            period: IntDist::Fixed(0),
            punish: true,
        });
        assert!(synth_pool(&bad, 4, 0).is_err());
    }

    #[test]
    fn rota_followers_break_down_without_coordination() {
        // Each player follows its own schedule; with period 2 and punishment,
        // a group of rota followers coordinates only by accident of indexing.
        let rota = Strategy::new(
            "rota",
            Origin::Parametric,
            Box::new(RotaFollower {
                period: 2,
                punish: true,
            }),
        );
        let all_d = make_reference(Reference::AllD, 4).unwrap();
        let params = GameParams::new(4);
        let g = play_game(GameKind::CollectiveRisk, &params, &[&rota, &rota, &all_d, &all_d], 0).unwrap();
        // round 0: player 0 scheduled, player 2 (AllD) scheduled but defects
        assert_eq!(g.rounds[0].actions[0], Action::C);
        assert!(g.rounds[1..].iter().all(|r| r.actions[0] == Action::D && r.actions[1] == Action::D));
    }

    #[test]
    fn grim_trigger_resets_between_games() {
        let grim = Strategy::new("grim", Origin::Parametric, Box::new(GrimTrigger::new(0.0)));
        let all_d = make_reference(Reference::AllD, 2).unwrap();
        let all_c = make_reference(Reference::AllC, 2).unwrap();
        let params = GameParams::new(2).with_rounds(3);
        let g = play_game(GameKind::CommonPool, &params, &[&grim, &all_d], 0).unwrap();
        assert_eq!(g.rounds[2].actions[0], Action::D);
        let g = play_game(GameKind::CommonPool, &params, &[&grim, &all_c], 0).unwrap();
        assert!(g.rounds.iter().all(|r| r.actions[0] == Action::C));
    }

    #[test]
    fn config_json() {
        let json = r#"{"gene_tag":"mix","attitude":"exploitative","families":[
            {"weight":2,"family":{"kind":"reciprocator","threshold":{"uniform":[0.2,0.8]},"forgiveness":{"fixed":0.1}}},
            {"family":{"kind":"rota","period":{"choice":[2,3]},"punish":true}}]}"#;
        let c: FamilyConfig = serde_json::from_str(json).unwrap();
        assert_eq!(c.families[1].weight, 1.0);
        synth_pool(&c, 20, 1).unwrap();
    }
}
