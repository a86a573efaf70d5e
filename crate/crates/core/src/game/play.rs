use super::payoff::round_payoffs;
use super::{Action, GameKind, GameParams, GameResult, RoundRecord};
use crate::error::{Error, Result};
use crate::seed::{self, StreamRng};
use crate::strategy::{Observation, StepMeter, Strategy};

/// Plays one iterated game. Player `i` draws from its own stream derived
/// from `(seed, i)`; moves in a round are simultaneous.
pub fn play_game(
    kind: GameKind,
    params: &GameParams,
    strategies: &[&Strategy],
    seed: u64,
) -> Result<GameResult> {
    params.validate(kind)?;
    if strategies.len() != params.n {
        return Err(Error::LengthMismatch {
            expected: params.n,
            actual: strategies.len(),
        });
    }
    let mut agents: Vec<_> = strategies.iter().map(|s| s.instantiate()).collect();
    let mut rngs: Vec<StreamRng> = (0..params.n)
        .map(|i| seed::stream(seed, &[seed::TAG_PLAYER, i as u64]))
        .collect();

    let mut history: Vec<RoundRecord> = Vec::with_capacity(params.rounds);
    let mut stock = (kind == GameKind::CommonPool).then_some(params.capacity);
    let mut meter = StepMeter::new(params.step_budget);

    for round in 0..params.rounds {
        let mut actions: Vec<Action> = Vec::with_capacity(params.n);
        for (i, agent) in agents.iter_mut().enumerate() {
            let obs = Observation {
                kind,
                params,
                round_index: round,
                my_index: i,
                history: &history,
                current_stock: stock,
            };
            meter.reset();
            let action = agent
                .decide(&obs, &mut rngs[i], &mut meter)
                .map_err(|fault| Error::StrategyFault {
                    label: strategies[i].label.clone(),
                    player: i,
                    round,
                    fault,
                })?;
            actions.push(action);
        }
        let mut payoffs = Vec::with_capacity(params.n);
        let next = round_payoffs(kind, &actions, stock, params, &mut payoffs);
        history.push(RoundRecord::new(actions, payoffs, stock, next));
        stock = next;
    }

    let labels = strategies.iter().map(|s| s.label.clone()).collect();
    Ok(GameResult::from_rounds(kind, params.clone(), labels, history))
}
