//! The three social dilemmas and the iterated game loop.

mod bounds;
mod io;
mod payoff;
mod play;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bounds::{welfare_bounds, welfare_bounds_with, BoundsSearch, WelfareBounds};
pub use io::{read_rounds_csv, write_rounds_csv, RoundCsvRow};
pub use payoff::{cpr_round, crd_payoffs, pgg_payoffs, regrow, remaining_stock, round_payoffs};
pub use play::play_game;

/// Default per-decision step budget handed to every strategy.
pub const DEFAULT_STEP_BUDGET: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameKind {
    #[serde(alias = "pgg")]
    PublicGoods,
    #[serde(alias = "crd")]
    CollectiveRisk,
    #[serde(alias = "cpr")]
    CommonPool,
}

impl GameKind {
    pub const ALL: [GameKind; 3] = [
        GameKind::PublicGoods,
        GameKind::CollectiveRisk,
        GameKind::CommonPool,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            GameKind::PublicGoods => "pgg",
            GameKind::CollectiveRisk => "crd",
            GameKind::CommonPool => "cpr",
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for GameKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pgg" | "public_goods" | "publicgoods" => Ok(GameKind::PublicGoods),
            "crd" | "collective_risk" | "collectiverisk" => Ok(GameKind::CollectiveRisk),
            "cpr" | "common_pool" | "commonpool" => Ok(GameKind::CommonPool),
            other => Err(Error::params(format!("unknown game `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    C,
    D,
}

impl Action {
    #[inline]
    pub fn is_cooperate(self) -> bool {
        self == Action::C
    }

    #[inline]
    pub fn from_cooperate(cooperate: bool) -> Self {
        if cooperate {
            Action::C
        } else {
            Action::D
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::C => "C",
            Action::D => "D",
        })
    }
}

/// Parameters shared by all three games.
///
/// `k` is the PGG multiplication factor or the CRD benefit; the CPR carrying
/// capacity lives in its own field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameParams {
    pub n: usize,
    pub rounds: usize,
    pub k: f64,
    pub m: usize,
    pub capacity: f64,
    #[serde(default = "default_step_budget")]
    pub step_budget: u64,
}

fn default_step_budget() -> u64 {
    DEFAULT_STEP_BUDGET
}

impl GameParams {
    /// Defaults: 20 rounds, k = 2, m = floor(n/2), capacity = 4n.
    pub fn new(n: usize) -> Self {
        GameParams {
            n,
            rounds: 20,
            k: 2.0,
            m: n / 2,
            capacity: 4.0 * n as f64,
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }

    pub fn with_rounds(mut self, rounds: usize) -> Self {
        self.rounds = rounds;
        self
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k = k;
        self
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    pub fn with_capacity(mut self, capacity: f64) -> Self {
        self.capacity = capacity;
        self
    }

    pub fn with_step_budget(mut self, budget: u64) -> Self {
        self.step_budget = budget;
        self
    }

    pub fn validate(&self, kind: GameKind) -> Result<()> {
        if self.n < 2 {
            return Err(Error::params(format!("n = {} (need n >= 2)", self.n)));
        }
        if self.rounds < 1 {
            return Err(Error::params("rounds must be >= 1"));
        }
        match kind {
            GameKind::PublicGoods => {
                if !(self.k > 1.0 && self.k < self.n as f64) {
                    return Err(Error::params(format!(
                        "public goods needs 1 < k < n, got k = {} with n = {}",
                        self.k, self.n
                    )));
                }
            }
            GameKind::CollectiveRisk => {
                if self.m < 1 || self.m > self.n {
                    return Err(Error::params(format!(
                        "collective risk needs 1 <= m <= n, got m = {} with n = {}",
                        self.m, self.n
                    )));
                }
                if !self.k.is_finite() || self.k < 0.0 {
                    return Err(Error::params(format!("k = {} must be finite and >= 0", self.k)));
                }
            }
            GameKind::CommonPool => {
                if !(self.capacity > 0.0 && self.capacity.is_finite()) {
                    return Err(Error::params(format!(
                        "capacity = {} must be positive",
                        self.capacity
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Game parameters with the group size left open. Unset `m` and `capacity`
/// take their size-dependent defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsTemplate {
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default = "default_k")]
    pub k: f64,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub capacity: Option<f64>,
    #[serde(default = "default_step_budget")]
    pub step_budget: u64,
}

fn default_rounds() -> usize {
    20
}

fn default_k() -> f64 {
    2.0
}

impl Default for ParamsTemplate {
    fn default() -> Self {
        ParamsTemplate {
            rounds: default_rounds(),
            k: default_k(),
            m: None,
            capacity: None,
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }
}

impl ParamsTemplate {
    pub fn for_size(&self, n: usize) -> GameParams {
        let mut p = GameParams::new(n)
            .with_rounds(self.rounds)
            .with_k(self.k)
            .with_step_budget(self.step_budget);
        if let Some(m) = self.m {
            p.m = m;
        }
        if let Some(c) = self.capacity {
            p.capacity = c;
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub actions: Vec<Action>,
    pub payoffs: Vec<f64>,
    /// Number of `C` in `actions`.
    pub cooperators: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stock_before: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stock_after: Option<f64>,
}

impl RoundRecord {
    pub fn new(
        actions: Vec<Action>,
        payoffs: Vec<f64>,
        stock_before: Option<f64>,
        stock_after: Option<f64>,
    ) -> Self {
        let cooperators = actions.iter().filter(|a| a.is_cooperate()).count();
        RoundRecord {
            actions,
            payoffs,
            cooperators,
            stock_before,
            stock_after,
        }
    }

    /// Cooperators among everyone except `player`.
    #[inline]
    pub fn opponent_cooperators(&self, player: usize) -> usize {
        self.cooperators - usize::from(self.actions[player].is_cooperate())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameResult {
    pub kind: GameKind,
    pub params: GameParams,
    pub labels: Vec<String>,
    pub rounds: Vec<RoundRecord>,
    pub totals: Vec<f64>,
    pub normalized: Vec<f64>,
    pub mean_welfare: f64,
}

impl GameResult {
    pub(crate) fn from_rounds(
        kind: GameKind,
        params: GameParams,
        labels: Vec<String>,
        rounds: Vec<RoundRecord>,
    ) -> Self {
        let n = params.n;
        let mut totals = vec![0.0; n];
        for record in &rounds {
            for (t, p) in totals.iter_mut().zip(&record.payoffs) {
                *t += p;
            }
        }
        let r = rounds.len() as f64;
        let normalized: Vec<f64> = totals.iter().map(|t| t / r).collect();
        let mean_welfare = totals.iter().sum::<f64>() / (n as f64 * r);
        GameResult {
            kind,
            params,
            labels,
            rounds,
            totals,
            normalized,
            mean_welfare,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_player_count() {
        let p = GameParams::new(7);
        assert_eq!(p.m, 3);
        assert_eq!(p.capacity, 28.0);
        assert_eq!(p.rounds, 20);
        assert_eq!(p.k, 2.0);
    }

    #[test]
    fn validation_per_kind() {
        assert!(GameParams::new(2).validate(GameKind::PublicGoods).is_err());
        assert!(GameParams::new(4).validate(GameKind::PublicGoods).is_ok());
        assert!(GameParams::new(4).with_m(0).validate(GameKind::CollectiveRisk).is_err());
        assert!(GameParams::new(4).with_m(5).validate(GameKind::CollectiveRisk).is_err());
        assert!(GameParams::new(2).validate(GameKind::CollectiveRisk).is_ok());
        assert!(GameParams::new(4).with_capacity(0.0).validate(GameKind::CommonPool).is_err());
        assert!(GameParams::new(1).validate(GameKind::CommonPool).is_err());
        assert!(GameParams::new(4).with_rounds(0).validate(GameKind::CommonPool).is_err());
    }

    #[test]
    fn kind_parses_short_and_long_names() {
        assert_eq!("PGG".parse::<GameKind>().unwrap(), GameKind::PublicGoods);
        assert_eq!("common_pool".parse::<GameKind>().unwrap(), GameKind::CommonPool);
        assert!("ipd".parse::<GameKind>().is_err());
        let k: GameKind = serde_json::from_str("\"crd\"").unwrap();
        assert_eq!(k, GameKind::CollectiveRisk);
    }
}
