//! Declarative policies: an ordered rule list over a closed predicate set.
//!
//! A policy is evaluated first-match: the first rule whose predicate holds
//! supplies the cooperation probability, otherwise `default_prob` applies.
//! Every predicate and quantity node charges the step meter; quantities that
//! scan history charge one step per completed round.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Behavior, Fault, Observation, StepMeter};
use crate::game::{Action, GameKind, GameParams};
use crate::seed::StreamRng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub label: String,
    #[serde(default)]
    pub rules: Vec<PolicyRule>,
    pub default_prob: Operand,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyRule {
    pub when: Predicate,
    pub cooperate_prob: Operand,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pred", rename_all = "snake_case", deny_unknown_fields)]
pub enum Predicate {
    Always,
    FirstRound,
    LastRound,
    OwnLast { action: Action },
    AnyOpponentDefectedEver,
    Compare {
        lhs: Operand,
        op: Comparison,
        rhs: Operand,
    },
    All { of: Vec<Predicate> },
    Any { of: Vec<Predicate> },
    Not { of: Box<Predicate> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
}

impl Comparison {
    fn holds(self, a: f64, b: f64) -> bool {
        match self {
            Comparison::Lt => a < b,
            Comparison::Le => a <= b,
            Comparison::Gt => a > b,
            Comparison::Ge => a >= b,
            Comparison::Eq => a == b,
            Comparison::Ne => a != b,
        }
    }
}

/// Numeric observables, tagged by `"q"` in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "q", rename_all = "snake_case", deny_unknown_fields)]
pub enum Quantity {
    Const { value: f64 },
    RoundIndex,
    /// Rounds left after the current one; 0 in the last round.
    RoundsRemaining,
    Rounds,
    Players,
    OppCoopsLast,
    OppCoopFracLast,
    OppCoopRate,
    OwnCoopRate,
    OwnLastCoop,
    StockFrac,
    Ratio { num: Box<Operand>, den: Box<Operand> },
    Diff { a: Box<Operand>, b: Box<Operand> },
    Sum { of: Vec<Operand> },
    Product { of: Vec<Operand> },
}

/// A quantity in operand position. A bare JSON number is shorthand for a constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "serde_json::Value", into = "serde_json::Value")]
pub struct Operand(pub Quantity);

impl Operand {
    pub fn constant(value: f64) -> Self {
        Operand(Quantity::Const { value })
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.0 {
            Quantity::Const { value } => Some(value),
            _ => None,
        }
    }

    /// `None` when the observable does not exist yet (round 0, or no stock).
    fn eval(&self, obs: &Observation<'_>, meter: &mut StepMeter) -> Result<Option<f64>, Fault> {
        meter.charge(1)?;
        Ok(match &self.0 {
            Quantity::Const { value } => Some(*value),
            Quantity::RoundIndex => Some(obs.round_index as f64),
            Quantity::RoundsRemaining => Some(obs.rounds_remaining() as f64),
            Quantity::Rounds => Some(obs.params.rounds as f64),
            Quantity::Players => Some(obs.params.n as f64),
            Quantity::OppCoopsLast => obs.opponent_cooperators_last().map(|c| c as f64),
            Quantity::OppCoopFracLast => obs.opponent_coop_fraction_last(),
            Quantity::OppCoopRate => {
                meter.charge(obs.history.len() as u64)?;
                obs.opponent_coop_rate()
            }
            Quantity::OwnCoopRate => {
                meter.charge(obs.history.len() as u64)?;
                obs.own_coop_rate()
            }
            Quantity::OwnLastCoop => obs
                .own_last_action()
                .map(|a| if a.is_cooperate() { 1.0 } else { 0.0 }),
            Quantity::StockFrac => obs.stock_fraction(),
            Quantity::Ratio { num, den } => {
                let (Some(n), Some(d)) = (num.eval(obs, meter)?, den.eval(obs, meter)?) else {
                    return Ok(None);
                };
                if d == 0.0 {
                    return Err(Fault::Trap(format!(
                        "division by zero in ratio at round {}",
                        obs.round_index
                    )));
                }
                Some(n / d)
            }
            Quantity::Diff { a, b } => match (a.eval(obs, meter)?, b.eval(obs, meter)?) {
                (Some(a), Some(b)) => Some(a - b),
                _ => None,
            },
            Quantity::Sum { of } => fold(of, obs, meter, 0.0, |x, y| x + y)?,
            Quantity::Product { of } => fold(of, obs, meter, 1.0, |x, y| x * y)?,
        })
    }
}

impl From<Quantity> for Operand {
    fn from(q: Quantity) -> Self {
        Operand(q)
    }
}

impl From<f64> for Operand {
    fn from(v: f64) -> Self {
        Operand::constant(v)
    }
}

impl TryFrom<serde_json::Value> for Operand {
    type Error = String;

    fn try_from(v: serde_json::Value) -> Result<Self, String> {
        match v {
            serde_json::Value::Number(n) => n
                .as_f64()
                .map(Operand::constant)
                .ok_or_else(|| format!("number {n} is not representable")),
            other => serde_json::from_value::<Quantity>(other)
                .map(Operand)
                .map_err(|e| e.to_string()),
        }
    }
}

impl From<Operand> for serde_json::Value {
    fn from(op: Operand) -> Self {
        match op.0 {
            Quantity::Const { value } => serde_json::json!(value),
            other => serde_json::to_value(other).unwrap_or(serde_json::Value::Null),
        }
    }
}

fn fold(
    items: &[Operand],
    obs: &Observation<'_>,
    meter: &mut StepMeter,
    init: f64,
    op: fn(f64, f64) -> f64,
) -> Result<Option<f64>, Fault> {
    let mut acc = Some(init);
    for q in items {
        let v = q.eval(obs, meter)?;
        acc = acc.zip(v).map(|(a, b)| op(a, b));
    }
    Ok(acc)
}

impl Predicate {
    pub fn holds(&self, obs: &Observation<'_>, meter: &mut StepMeter) -> Result<bool, Fault> {
        meter.charge(1)?;
        Ok(match self {
            Predicate::Always => true,
            Predicate::FirstRound => obs.is_first_round(),
            Predicate::LastRound => obs.is_last_round(),
            Predicate::OwnLast { action } => obs.own_last_action() == Some(*action),
            Predicate::AnyOpponentDefectedEver => {
                meter.charge(obs.history.len() as u64)?;
                let opponents = obs.opponents();
                obs.history
                    .iter()
                    .any(|r| r.opponent_cooperators(obs.my_index) < opponents)
            }
            Predicate::Compare { lhs, op, rhs } => {
                match (lhs.eval(obs, meter)?, rhs.eval(obs, meter)?) {
                    (Some(a), Some(b)) => op.holds(a, b),
                    _ => false,
                }
            }
            Predicate::All { of } => {
                for p in of {
                    if !p.holds(obs, meter)? {
                        return Ok(false);
                    }
                }
                true
            }
            Predicate::Any { of } => {
                for p in of {
                    if p.holds(obs, meter)? {
                        return Ok(true);
                    }
                }
                false
            }
            Predicate::Not { of } => !of.holds(obs, meter)?,
        })
    }
}

impl PolicySpec {
    /// Structural checks done at load time: non-empty label and constant
    /// probabilities inside [0, 1].
    pub fn check(&self) -> Result<(), String> {
        if self.label.trim().is_empty() {
            return Err("empty label".into());
        }
        let probs = self
            .rules
            .iter()
            .enumerate()
            .map(|(i, r)| (format!("rules[{i}].cooperate_prob"), &r.cooperate_prob))
            .chain(std::iter::once(("default_prob".to_string(), &self.default_prob)));
        for (field, p) in probs {
            if let Some(v) = p.as_const() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(format!("{field} = {v} outside [0, 1]"));
                }
            }
        }
        Ok(())
    }

    fn cooperate_probability(
        &self,
        obs: &Observation<'_>,
        meter: &mut StepMeter,
    ) -> Result<f64, Fault> {
        let chosen = self
            .rules
            .iter()
            .map(|r| (r.when.holds(obs, meter), &r.cooperate_prob))
            .find_map(|(hit, p)| match hit {
                Ok(true) => Some(Ok(p)),
                Ok(false) => None,
                Err(e) => Some(Err(e)),
            })
            .unwrap_or(Ok(&self.default_prob))?;
        match chosen.eval(obs, meter)? {
            Some(p) if (0.0..=1.0).contains(&p) => Ok(p),
            Some(p) => Err(Fault::InvalidAction(format!(
                "cooperation probability {p} outside [0, 1] at round {}",
                obs.round_index
            ))),
            None => Err(Fault::InvalidAction(format!(
                "cooperation probability undefined at round {}",
                obs.round_index
            ))),
        }
    }
}

/// Closed interval bound on a quantity, plus whether it can be undefined.
#[derive(Clone, Copy, Debug)]
struct Bound {
    lo: f64,
    hi: f64,
    maybe_none: bool,
}

impl Bound {
    fn exact(v: f64) -> Self {
        Bound {
            lo: v,
            hi: v,
            maybe_none: false,
        }
    }

    fn range(lo: f64, hi: f64, maybe_none: bool) -> Self {
        Bound { lo, hi, maybe_none }
    }

    fn combine(self, other: Bound, op: fn(f64, f64) -> f64) -> Bound {
        let c = [
            op(self.lo, other.lo),
            op(self.lo, other.hi),
            op(self.hi, other.lo),
            op(self.hi, other.hi),
        ];
        let (lo, hi) = if c.iter().any(|x| x.is_nan()) {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else {
            (
                c.iter().copied().fold(f64::INFINITY, f64::min),
                c.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            )
        };
        Bound {
            lo,
            hi,
            maybe_none: self.maybe_none || other.maybe_none,
        }
    }
}

/// Static context for [`PolicySpec::audit`].
struct AuditCtx {
    rounds: f64,
    players: f64,
    history: u64,
    stock: bool,
}

impl Operand {
    fn bound(&self, cx: &AuditCtx, path: &str, findings: &mut Vec<String>) -> Bound {
        let last = cx.rounds - 1.0;
        let unit_late = Bound::range(0.0, 1.0, true);
        match &self.0 {
            Quantity::Const { value } => Bound::exact(*value),
            Quantity::RoundIndex | Quantity::RoundsRemaining => Bound::range(0.0, last, false),
            Quantity::Rounds => Bound::exact(cx.rounds),
            Quantity::Players => Bound::exact(cx.players),
            Quantity::OppCoopsLast => Bound::range(0.0, cx.players - 1.0, true),
            Quantity::OppCoopFracLast
            | Quantity::OppCoopRate
            | Quantity::OwnCoopRate
            | Quantity::OwnLastCoop => unit_late,
            Quantity::StockFrac => Bound::range(0.0, 1.0, !cx.stock),
            Quantity::Ratio { num, den } => {
                let n = num.bound(cx, &format!("{path}.num"), findings);
                let d = den.bound(cx, &format!("{path}.den"), findings);
                if d.lo <= 0.0 && d.hi >= 0.0 {
                    findings.push(format!("{path}: ratio denominator can be zero (range [{}, {}])", d.lo, d.hi));
                    return Bound::range(f64::NEG_INFINITY, f64::INFINITY, n.maybe_none || d.maybe_none);
                }
                n.combine(d, |a, b| a / b)
            }
            Quantity::Diff { a, b } => a
                .bound(cx, &format!("{path}.a"), findings)
                .combine(b.bound(cx, &format!("{path}.b"), findings), |x, y| x - y),
            Quantity::Sum { of } => of.iter().enumerate().fold(Bound::exact(0.0), |acc, (i, q)| {
                acc.combine(q.bound(cx, &format!("{path}.of[{i}]"), findings), |x, y| x + y)
            }),
            Quantity::Product { of } => of.iter().enumerate().fold(Bound::exact(1.0), |acc, (i, q)| {
                acc.combine(q.bound(cx, &format!("{path}.of[{i}]"), findings), |x, y| x * y)
            }),
        }
    }

    /// Largest number of steps one evaluation can charge.
    fn max_cost(&self, history: u64) -> u64 {
        1 + match &self.0 {
            Quantity::OppCoopRate | Quantity::OwnCoopRate => history,
            Quantity::Ratio { num, den } => num.max_cost(history) + den.max_cost(history),
            Quantity::Diff { a, b } => a.max_cost(history) + b.max_cost(history),
            Quantity::Sum { of } | Quantity::Product { of } => of.iter().map(|q| q.max_cost(history)).sum(),
            _ => 0,
        }
    }
}

impl Predicate {
    fn audit(&self, cx: &AuditCtx, path: &str, findings: &mut Vec<String>) {
        match self {
            Predicate::Compare { lhs, rhs, .. } => {
                lhs.bound(cx, &format!("{path}.lhs"), findings);
                rhs.bound(cx, &format!("{path}.rhs"), findings);
            }
            Predicate::All { of } | Predicate::Any { of } => {
                for (i, p) in of.iter().enumerate() {
                    p.audit(cx, &format!("{path}.of[{i}]"), findings);
                }
            }
            Predicate::Not { of } => of.audit(cx, &format!("{path}.of"), findings),
            _ => {}
        }
    }

    fn max_cost(&self, history: u64) -> u64 {
        1 + match self {
            Predicate::AnyOpponentDefectedEver => history,
            Predicate::Compare { lhs, rhs, .. } => lhs.max_cost(history) + rhs.max_cost(history),
            Predicate::All { of } | Predicate::Any { of } => of.iter().map(|p| p.max_cost(history)).sum(),
            Predicate::Not { of } => of.max_cost(history),
            _ => 0,
        }
    }
}

impl PolicySpec {
    /// Every way this policy could fault in a game of `kind` with `params`,
    /// found without playing: ratios whose denominator range contains zero,
    /// cooperation probabilities that can be undefined or leave [0, 1], and
    /// a worst-case step count above the budget. Bounds are conservative, so
    /// a guarded division is still reported.
    pub fn audit(&self, kind: GameKind, params: &GameParams) -> Vec<String> {
        let cx = AuditCtx {
            rounds: params.rounds as f64,
            players: params.n as f64,
            history: params.rounds.saturating_sub(1) as u64,
            stock: kind == GameKind::CommonPool,
        };
        let mut findings = Vec::new();
        let probs = self
            .rules
            .iter()
            .enumerate()
            .map(|(i, r)| (format!("rules[{i}].cooperate_prob"), &r.cooperate_prob))
            .chain(std::iter::once(("default_prob".to_string(), &self.default_prob)));
        let mut prob_cost = 0;
        for (path, p) in probs {
            let b = p.bound(&cx, &path, &mut findings);
            if b.maybe_none {
                findings.push(format!("{path}: can be undefined"));
            }
            if b.lo < 0.0 || b.hi > 1.0 {
                findings.push(format!("{path}: range [{}, {}] leaves [0, 1]", b.lo, b.hi));
            }
            prob_cost = prob_cost.max(p.max_cost(cx.history));
        }
        let mut cost = prob_cost;
        for (i, r) in self.rules.iter().enumerate() {
            r.when.audit(&cx, &format!("rules[{i}].when"), &mut findings);
            cost += r.when.max_cost(cx.history);
        }
        if cost > params.step_budget {
            findings.push(format!(
                "worst-case decision costs {cost} steps, budget is {}",
                params.step_budget
            ));
        }
        findings
    }
}

impl Behavior for PolicySpec {
    fn decide(
        &mut self,
        obs: &Observation<'_>,
        rng: &mut StreamRng,
        meter: &mut StepMeter,
    ) -> Result<Action, Fault> {
        let p = self.cooperate_probability(obs, meter)?;
        Ok(if p >= 1.0 {
            Action::C
        } else if p <= 0.0 {
            Action::D
        } else {
            Action::from_cooperate(rng.random_bool(p))
        })
    }

    fn box_clone(&self) -> Box<dyn Behavior> {
        Box::new(self.clone())
    }

    fn audit(&self, kind: GameKind, params: &GameParams) -> Vec<String> {
        PolicySpec::audit(self, kind, params)
    }
}
