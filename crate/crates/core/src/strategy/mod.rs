//! Strategies: the decision interface, reference strategies, parametric
//! families, declarative policy files and the admission gate.

mod family;
mod policy;
mod pool;
mod reference;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::game::{Action, GameKind, GameParams, RoundRecord};
use crate::seed::StreamRng;

pub use family::{synth_pool, Family, FamilyConfig, IntDist, RealDist, WeightedFamily};
pub use family::{EndgameDefector, GrimTrigger, Reciprocator, RotaFollower, StockGuardian};
pub use policy::{Comparison, Operand, PolicyRule, PolicySpec, Predicate, Quantity};
pub use pool::{load_pool, parse_pool, PolicyFile, StrategyPool, POLICY_SCHEMA_VERSION};
pub use reference::{make_reference, Reference};
pub use validate::{admit_pool, validate_strategy, Admission, ValidationReport};

/// Everything a strategy may see when choosing its action for `round_index`.
///
/// `history` holds completed rounds only; the in-progress round's
/// simultaneous choices are never visible.
#[derive(Clone, Copy, Debug)]
pub struct Observation<'a> {
    pub kind: GameKind,
    pub params: &'a GameParams,
    pub round_index: usize,
    pub my_index: usize,
    pub history: &'a [RoundRecord],
    pub current_stock: Option<f64>,
}

impl<'a> Observation<'a> {
    pub fn last_round(&self) -> Option<&'a RoundRecord> {
        self.history.last()
    }

    pub fn is_first_round(&self) -> bool {
        self.round_index == 0
    }

    pub fn is_last_round(&self) -> bool {
        self.round_index + 1 == self.params.rounds
    }

    /// Rounds still to be played after the current one.
    pub fn rounds_remaining(&self) -> usize {
        self.params.rounds - self.round_index - 1
    }

    pub fn opponents(&self) -> usize {
        self.params.n - 1
    }

    pub fn opponent_cooperators_last(&self) -> Option<usize> {
        self.last_round().map(|r| r.opponent_cooperators(self.my_index))
    }

    pub fn opponent_coop_fraction_last(&self) -> Option<f64> {
        self.opponent_cooperators_last()
            .map(|c| c as f64 / self.opponents() as f64)
    }

    pub fn own_last_action(&self) -> Option<Action> {
        self.last_round().map(|r| r.actions[self.my_index])
    }

    /// Fraction of all opponent decisions so far that were `C`.
    pub fn opponent_coop_rate(&self) -> Option<f64> {
        if self.history.is_empty() {
            return None;
        }
        let coop: usize = self
            .history
            .iter()
            .map(|r| r.opponent_cooperators(self.my_index))
            .sum();
        Some(coop as f64 / (self.history.len() * self.opponents()) as f64)
    }

    pub fn own_coop_rate(&self) -> Option<f64> {
        if self.history.is_empty() {
            return None;
        }
        let coop = self
            .history
            .iter()
            .filter(|r| r.actions[self.my_index].is_cooperate())
            .count();
        Some(coop as f64 / self.history.len() as f64)
    }

    /// Current stock over carrying capacity (Common Pool only).
    pub fn stock_fraction(&self) -> Option<f64> {
        self.current_stock.map(|s| s / self.params.capacity)
    }
}

/// A strategy failing to produce an action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, thiserror::Error)]
pub enum Fault {
    #[error("step budget of {limit} exceeded")]
    BudgetExceeded { limit: u64 },
    #[error("evaluation trapped: {0}")]
    Trap(String),
    #[error("invalid action: {0}")]
    InvalidAction(String),
}

/// Counts rule and predicate evaluations for one decision.
#[derive(Clone, Debug)]
pub struct StepMeter {
    used: u64,
    limit: u64,
}

impl StepMeter {
    pub fn new(limit: u64) -> Self {
        StepMeter { used: 0, limit }
    }

    #[inline]
    pub fn charge(&mut self, steps: u64) -> Result<(), Fault> {
        self.used = self.used.saturating_add(steps);
        if self.used > self.limit {
            Err(Fault::BudgetExceeded { limit: self.limit })
        } else {
            Ok(())
        }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn reset(&mut self) {
        self.used = 0;
    }
}

/// A decision rule. Implementations may keep state between rounds of one
/// game; the engine hands every game a fresh clone.
pub trait Behavior: fmt::Debug + Send + Sync {
    fn decide(
        &mut self,
        obs: &Observation<'_>,
        rng: &mut StreamRng,
        meter: &mut StepMeter,
    ) -> Result<Action, Fault>;

    fn box_clone(&self) -> Box<dyn Behavior>;

    /// Faults that can be shown possible from the rule's structure alone.
    /// Built-in behaviours have none.
    fn audit(&self, _kind: GameKind, _params: &GameParams) -> Vec<String> {
        Vec::new()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Reference,
    Parametric,
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attitude {
    #[serde(alias = "Collective")]
    Collective,
    #[serde(alias = "Exploitative")]
    Exploitative,
}

impl fmt::Display for Attitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Attitude::Collective => "collective",
            Attitude::Exploitative => "exploitative",
        })
    }
}

#[derive(Debug)]
pub struct Strategy {
    pub label: String,
    pub origin: Origin,
    behavior: Box<dyn Behavior>,
}

impl Clone for Strategy {
    fn clone(&self) -> Self {
        Strategy {
            label: self.label.clone(),
            origin: self.origin,
            behavior: self.behavior.box_clone(),
        }
    }
}

impl Strategy {
    pub fn new(label: impl Into<String>, origin: Origin, behavior: Box<dyn Behavior>) -> Self {
        Strategy {
            label: label.into(),
            origin,
            behavior,
        }
    }

    pub fn audit(&self, kind: GameKind, params: &GameParams) -> Vec<String> {
        self.behavior.audit(kind, params)
    }

    /// A fresh copy of the decision rule, with no in-game state.
    pub fn instantiate(&self) -> Box<dyn Behavior> {
        self.behavior.box_clone()
    }
}
