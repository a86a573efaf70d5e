//! Behavioural fingerprints over canonical opponent histories, plus PCA and
//! the set-variation metrics used to compare strategy pools.
//!
//! Opponents are treated as exchangeable, so a history is the sequence of
//! opponent-cooperator counts per completed round. With `n` players there are
//! `n` possible counts per round and `sum_{t < rounds} n^t` decision nodes.

mod io;
mod linalg;
mod metrics;
mod pca;

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::game::{round_payoffs, Action, GameKind, GameParams, RoundRecord};
use crate::seed;
use crate::strategy::{Observation, StepMeter, Strategy};

pub use io::{read_matrix_csv, write_matrix_csv, write_projections_csv};
pub use linalg::symmetric_eigen;
pub use metrics::{cohens_d, mpd, participation_ratio, set_eigenvalues};
pub use pca::{pca, PcaResult};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DecisionNode {
    /// Opponent-cooperator count in each completed round.
    pub opponent_counts: Vec<usize>,
}

impl DecisionNode {
    /// Rounds already played when the decision is taken.
    pub fn depth(&self) -> usize {
        self.opponent_counts.len()
    }

    /// Column key: `h` for the opening decision, `h-3-1` after counts 3 then 1.
    pub fn key(&self) -> String {
        let mut s = String::from("h");
        for c in &self.opponent_counts {
            s.push('-');
            s.push_str(&c.to_string());
        }
        s
    }
}

impl fmt::Display for DecisionNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// Canonical node order: breadth-first by depth, lexicographic by counts
/// within a depth.
pub fn enumerate_nodes(n_players: usize, rounds: usize) -> Vec<DecisionNode> {
    let mut nodes = vec![DecisionNode {
        opponent_counts: Vec::new(),
    }];
    let mut layer_start = 0;
    for _ in 1..rounds {
        let layer_end = nodes.len();
        for i in layer_start..layer_end {
            for c in 0..n_players {
                let mut counts = nodes[i].opponent_counts.clone();
                counts.push(c);
                nodes.push(DecisionNode {
                    opponent_counts: counts,
                });
            }
        }
        layer_start = layer_end;
    }
    nodes
}

/// Cooperation rate of a strategy at each decision node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The game a fingerprint is taken in.
#[derive(Clone, Debug, PartialEq)]
pub struct FingerprintSpec {
    pub kind: GameKind,
    pub params: GameParams,
    pub rollouts: usize,
    pub exec: Exec,
}

impl FingerprintSpec {
    /// Four players, five rounds, 50 rollouts per node.
    pub fn new(kind: GameKind) -> Self {
        FingerprintSpec {
            kind,
            params: GameParams::new(4).with_rounds(5),
            rollouts: 50,
            exec: Exec::default(),
        }
    }

    pub fn nodes(&self) -> Vec<DecisionNode> {
        enumerate_nodes(self.params.n, self.params.rounds)
    }
}

/// Replays the forced branch to `node` and returns the subject's action there.
///
/// Opponent identities are drawn once per replay: the subject sits at a
/// random seat and in every round the first `count` opponents of a random
/// permutation cooperate. The subject's own earlier actions come from playing
/// forward along the branch; Common Pool stock is recomputed accordingly.
fn replay(
    strategy: &Strategy,
    spec: &FingerprintSpec,
    node: &DecisionNode,
    seed: u64,
    node_index: usize,
    rollout: usize,
) -> Result<Action, crate::strategy::Fault> {
    let params = &spec.params;
    let n = params.n;
    let path = [seed::TAG_REPLAY, node_index as u64, rollout as u64];
    let mut layout = seed::stream(seed, &path);
    let subject = layout.random_range(0..n);
    let mut opponents: Vec<usize> = (0..n).filter(|&i| i != subject).collect();
    opponents.shuffle(&mut layout);

    let mut rng = seed::stream(seed, &[seed::TAG_REPLAY, node_index as u64, rollout as u64, seed::TAG_PLAYER]);
    let mut agent = strategy.instantiate();
    let mut meter = StepMeter::new(params.step_budget);
    let mut history: Vec<RoundRecord> = Vec::with_capacity(node.depth());
    let mut stock = (spec.kind == GameKind::CommonPool).then_some(params.capacity);

    for round in 0..=node.depth() {
        let obs = Observation {
            kind: spec.kind,
            params,
            round_index: round,
            my_index: subject,
            history: &history,
            current_stock: stock,
        };
        meter.reset();
        let own = agent.decide(&obs, &mut rng, &mut meter)?;
        if round == node.depth() {
            return Ok(own);
        }
        let mut actions = vec![Action::D; n];
        actions[subject] = own;
        for &o in opponents.iter().take(node.opponent_counts[round]) {
            actions[o] = Action::C;
        }
        let mut payoffs = Vec::with_capacity(n);
        let next = round_payoffs(spec.kind, &actions, stock, params, &mut payoffs);
        history.push(RoundRecord::new(actions, payoffs, stock, next));
        stock = next;
    }
    unreachable!("loop returns at the node's depth")
}

/// Fingerprints one strategy. Deterministic given `seed`.
pub fn fingerprint(
    strategy: &Strategy,
    spec: &FingerprintSpec,
    nodes: &[DecisionNode],
    seed: u64,
) -> Result<FeatureVector> {
    spec.params.validate(spec.kind)?;
    if spec.rollouts == 0 {
        return Err(Error::params("rollouts must be >= 1"));
    }
    if let Some(bad) = nodes.iter().find(|nd| {
        nd.depth() >= spec.params.rounds || nd.opponent_counts.iter().any(|&c| c >= spec.params.n)
    }) {
        return Err(Error::params(format!(
            "node {bad} is not reachable with {} players and {} rounds",
            spec.params.n, spec.params.rounds
        )));
    }
    let values = spec.exec.try_map(nodes.len(), |i| {
        let mut coop = 0usize;
        for r in 0..spec.rollouts {
            let a = replay(strategy, spec, &nodes[i], seed, i, r).map_err(|fault| {
                Error::FingerprintFault {
                    label: strategy.label.clone(),
                    node: nodes[i].key(),
                    fault,
                }
            })?;
            coop += usize::from(a.is_cooperate());
        }
        Ok::<_, Error>(coop as f64 / spec.rollouts as f64)
    })?;
    Ok(FeatureVector { values })
}

/// One fingerprinted strategy with the set it belongs to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FingerprintRow {
    pub label: String,
    pub set: String,
    pub vector: FeatureVector,
}

/// A labelled fingerprint matrix in canonical node order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FingerprintSet {
    pub nodes: Vec<DecisionNode>,
    pub rows: Vec<FingerprintRow>,
}

impl FingerprintSet {
    pub fn vectors_of(&self, set: &str) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .filter(|r| r.set == set)
            .map(|r| r.vector.values.clone())
            .collect()
    }

    pub fn set_names(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for r in &self.rows {
            if !names.contains(&r.set) {
                names.push(r.set.clone());
            }
        }
        names
    }
}

/// Fingerprints many strategies; row `i` uses a seed derived from `(seed, i)`.
pub fn fingerprint_all(
    entries: &[(&str, &Strategy)],
    spec: &FingerprintSpec,
    seed: u64,
) -> Result<FingerprintSet> {
    let nodes = spec.nodes();
    let inner = FingerprintSpec {
        exec: Exec::Sequential,
        ..spec.clone()
    };
    let rows = spec.exec.try_map(entries.len(), |i| {
        let (set, strategy) = entries[i];
        let vector = fingerprint(strategy, &inner, &nodes, seed::derive(seed, &[i as u64]))?;
        Ok::<_, Error>(FingerprintRow {
            label: strategy.label.clone(),
            set: set.to_string(),
            vector,
        })
    })?;
    Ok(FingerprintSet { nodes, rows })
}
