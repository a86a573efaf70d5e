//! Pre-admission gate: a strategy must play randomised games against
//! reference opponents without faulting, within budget, and reproducibly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{make_reference, Fault, Reference, Strategy, StrategyPool};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::game::{play_game, Action, GameKind, GameParams};
use crate::seed;

const DETERMINISM_REPLAYS: usize = 8;
const MAX_RECORDED_FAULTS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub label: String,
    pub trials: usize,
    pub completed_games: usize,
    pub action_validity: bool,
    pub budget_compliance: bool,
    pub deterministic: bool,
    pub cooperation_rate: f64,
    pub faults: Vec<String>,
    /// Possible faults found by inspecting the rule without playing.
    pub audit: Vec<String>,
    pub passed: bool,
}

struct Trial {
    actions: Option<Vec<Action>>,
    fault: Option<Fault>,
}

fn random_opponent(rng: &mut seed::StreamRng, n: usize) -> Reference {
    match rng.random_range(0..5) {
        0 => Reference::AllC,
        1 => Reference::AllD,
        2 => Reference::Rnd(rng.random_range(0.0..=1.0)),
        3 => Reference::CC(rng.random_range(0..n)),
        _ => Reference::CD(rng.random_range(0..n)),
    }
}

fn run_trial(
    strategy: &Strategy,
    kind: GameKind,
    params: &GameParams,
    seed: u64,
    trial: usize,
) -> Result<Trial> {
    let n = params.n;
    let mut rng = seed::stream(seed, &[seed::TAG_VALIDATE, trial as u64]);
    let subject = rng.random_range(0..n);
    let opponents: Vec<Strategy> = (0..n - 1)
        .map(|_| make_reference(random_opponent(&mut rng, n), n))
        .collect::<Result<_>>()?;
    let mut players: Vec<&Strategy> = opponents.iter().collect();
    players.insert(subject, strategy);
    let game_seed = seed::derive(seed, &[seed::TAG_VALIDATE, trial as u64, seed::TAG_GAME]);
    match play_game(kind, params, &players, game_seed) {
        Ok(g) => Ok(Trial {
            actions: Some(g.rounds.iter().map(|r| r.actions[subject]).collect()),
            fault: None,
        }),
        Err(Error::StrategyFault { fault, .. }) => Ok(Trial {
            actions: None,
            fault: Some(fault),
        }),
        Err(e) => Err(e),
    }
}

/// Plays `trials` randomised games and reports the admission checks.
pub fn validate_strategy(
    strategy: &Strategy,
    kind: GameKind,
    params: &GameParams,
    trials: usize,
    seed: u64,
) -> Result<ValidationReport> {
    params.validate(kind)?;
    let trials = trials.max(1);
    let results: Vec<Trial> = (0..trials)
        .map(|t| run_trial(strategy, kind, params, seed, t))
        .collect::<Result<_>>()?;

    let mut deterministic = true;
    for (t, first) in results.iter().enumerate().take(DETERMINISM_REPLAYS) {
        let again = run_trial(strategy, kind, params, seed, t)?;
        if again.actions != first.actions || again.fault != first.fault {
            deterministic = false;
        }
    }

    let faults: Vec<&Fault> = results.iter().filter_map(|r| r.fault.as_ref()).collect();
    let budget_compliance = !faults
        .iter()
        .any(|f| matches!(f, Fault::BudgetExceeded { .. }));
    let action_validity = !faults
        .iter()
        .any(|f| matches!(f, Fault::Trap(_) | Fault::InvalidAction(_)));
    let played: Vec<&Vec<Action>> = results.iter().filter_map(|r| r.actions.as_ref()).collect();
    let decisions: usize = played.iter().map(|a| a.len()).sum();
    let coop: usize = played
        .iter()
        .map(|a| a.iter().filter(|x| x.is_cooperate()).count())
        .sum();
    let cooperation_rate = if decisions == 0 {
        0.0
    } else {
        coop as f64 / decisions as f64
    };
    let audit = strategy.audit(kind, params);
    let mut fault_msgs: Vec<String> = faults.iter().map(|f| f.to_string()).collect();
    fault_msgs.dedup();
    fault_msgs.truncate(MAX_RECORDED_FAULTS);

    Ok(ValidationReport {
        label: strategy.label.clone(),
        trials,
        completed_games: played.len(),
        action_validity,
        budget_compliance,
        deterministic,
        cooperation_rate,
        faults: fault_msgs,
        passed: action_validity && budget_compliance && deterministic && audit.is_empty(),
        audit,
    })
}

/// Outcome of gating a whole pool.
#[derive(Debug)]
pub struct Admission {
    pub reports: Vec<ValidationReport>,
    /// Indices of members that failed.
    pub rejected: Vec<usize>,
    /// The passing members, or `None` if every member failed.
    pub admitted: Option<StrategyPool>,
}

pub fn admit_pool(
    pool: &StrategyPool,
    kind: GameKind,
    params: &GameParams,
    trials: usize,
    seed: u64,
    exec: Exec,
) -> Result<Admission> {
    let reports = exec.try_map(pool.len(), |i| {
        validate_strategy(
            &pool.members[i],
            kind,
            params,
            trials,
            seed::derive(seed, &[i as u64]),
        )
    })?;
    let rejected: Vec<usize> = (0..pool.len()).filter(|&i| !reports[i].passed).collect();
    let members: Vec<Strategy> = pool
        .members
        .iter()
        .zip(&reports)
        .filter(|(_, r)| r.passed)
        .map(|(s, _)| s.clone())
        .collect();
    let admitted = if members.is_empty() {
        None
    } else {
        Some(StrategyPool::new(pool.gene_tag.clone(), pool.attitude, members)?)
    };
    Ok(Admission {
        reports,
        rejected,
        admitted,
    })
}
