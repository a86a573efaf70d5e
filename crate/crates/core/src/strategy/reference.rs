use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Behavior, Fault, Observation, Origin, StepMeter, Strategy};
use crate::error::{Error, Result};
use crate::game::Action;
use crate::seed::StreamRng;

/// The fixed strategies used as landmarks in fingerprint space.
///
/// `CC(t)` opens with C and afterwards cooperates iff at least `t` opponents
/// cooperated last round; `CD(t)` opens with D and afterwards defects iff at
/// least `t` opponents cooperated last round.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Reference {
    AllC,
    AllD,
    Rnd(f64),
    CC(usize),
    CD(usize),
}

impl Reference {
    /// AllC, AllD, Rnd at quarter steps, and CC/CD for every threshold.
    pub fn default_set(n_players: usize) -> Vec<Reference> {
        let mut set = vec![Reference::AllC, Reference::AllD];
        set.extend([0.0, 0.25, 0.5, 0.75, 1.0].map(Reference::Rnd));
        for t in 0..n_players {
            set.push(Reference::CC(t));
        }
        for t in 0..n_players {
            set.push(Reference::CD(t));
        }
        set
    }
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reference::AllC => f.write_str("A-C"),
            Reference::AllD => f.write_str("A-D"),
            Reference::Rnd(p) => write!(f, "Rnd({p})"),
            Reference::CC(t) => write!(f, "CC({t})"),
            Reference::CD(t) => write!(f, "CD({t})"),
        }
    }
}

impl Behavior for Reference {
    fn decide(
        &mut self,
        obs: &Observation<'_>,
        rng: &mut StreamRng,
        meter: &mut StepMeter,
    ) -> Result<Action, Fault> {
        meter.charge(1)?;
        Ok(match *self {
            Reference::AllC => Action::C,
            Reference::AllD => Action::D,
            Reference::Rnd(p) => Action::from_cooperate(rng.random_bool(p)),
            Reference::CC(t) => match obs.opponent_cooperators_last() {
                None => Action::C,
                Some(c) => Action::from_cooperate(c >= t),
            },
            Reference::CD(t) => match obs.opponent_cooperators_last() {
                None => Action::D,
                Some(c) => Action::from_cooperate(c < t),
            },
        })
    }

    fn box_clone(&self) -> Box<dyn Behavior> {
        Box::new(*self)
    }
}

/// Builds a reference strategy for games with `n_players` players.
pub fn make_reference(spec: Reference, n_players: usize) -> Result<Strategy> {
    match spec {
        Reference::Rnd(p) if !(0.0..=1.0).contains(&p) => {
            return Err(Error::params(format!("Rnd probability {p} outside [0, 1]")));
        }
        Reference::CC(t) | Reference::CD(t) if t >= n_players => {
            return Err(Error::params(format!(
                "threshold {t} outside 0..{} for {n_players} players",
                n_players.saturating_sub(1)
            )));
        }
        _ => {}
    }
    Ok(Strategy::new(
        spec.to_string(),
        Origin::Reference,
        Box::new(spec),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{GameKind, GameParams, RoundRecord};
    use crate::seed;

    fn decide_after(spec: Reference, n: usize, opp_coops: Option<usize>) -> Action {
        let params = GameParams::new(n).with_rounds(5);
        let history: Vec<RoundRecord> = opp_coops
            .map(|c| {
                let mut acts = vec![Action::D; n];
                for a in acts.iter_mut().skip(1).take(c) {
                    *a = Action::C;
                }
                vec![RoundRecord::new(acts, vec![0.0; n], None, None)]
            })
            .unwrap_or_default();
        let obs = Observation {
            kind: GameKind::PublicGoods,
            params: &params,
            round_index: history.len(),
            my_index: 0,
            history: &history,
            current_stock: None,
        };
        let mut s = spec;
        s.decide(&obs, &mut seed::stream(0, &[]), &mut StepMeter::new(10))
            .unwrap()
    }

    #[test]
    fn named_examples() {
        assert_eq!(decide_after(Reference::CC(2), 4, None), Action::C);
        assert_eq!(decide_after(Reference::CC(2), 4, Some(1)), Action::D);
        assert_eq!(decide_after(Reference::CD(1), 4, Some(2)), Action::D);
        assert_eq!(decide_after(Reference::CD(1), 4, None), Action::D);
    }

    #[test]
    fn threshold_table_is_exhaustive() {
        for n in 2..=8 {
            for t in 0..n {
                for c in 0..n {
                    let cc = decide_after(Reference::CC(t), n, Some(c));
                    let cd = decide_after(Reference::CD(t), n, Some(c));
                    assert_eq!(cc == Action::C, c >= t, "CC({t}) c={c} n={n}");
                    assert_eq!(cd == Action::D, c >= t, "CD({t}) c={c} n={n}");
                }
            }
        }
    }

    #[test]
    fn parameter_checks() {
        assert!(make_reference(Reference::Rnd(1.2), 4).is_err());
        assert!(make_reference(Reference::Rnd(-0.1), 4).is_err());
        assert!(make_reference(Reference::CC(4), 4).is_err());
        assert!(make_reference(Reference::CD(3), 4).is_ok());
        assert_eq!(make_reference(Reference::AllC, 4).unwrap().label, "A-C");
    }

    #[test]
    fn default_set_contents() {
        let set = Reference::default_set(4);
        assert_eq!(set.len(), 2 + 5 + 8);
        for spec in set {
            make_reference(spec, 4).unwrap();
        }
    }
}
