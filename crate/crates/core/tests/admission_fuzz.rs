//! Strategies that pass the admission gate never abort a game.

use dilemma_core::game::{play_game, Action, GameKind, GameParams};
use dilemma_core::seed;
use dilemma_core::strategy::{
    make_reference, validate_strategy, Comparison, Operand, Origin, PolicyRule, PolicySpec,
    Predicate, Quantity, Reference, Strategy,
};
use rand::Rng;

type Rng8 = seed::StreamRng;

fn leaf(rng: &mut Rng8) -> Quantity {
    match rng.random_range(0..12) {
        0 => Quantity::Const {
            value: (rng.random_range(-4..=8) as f64) / 4.0,
        },
        1 => Quantity::RoundIndex,
        2 => Quantity::RoundsRemaining,
        3 => Quantity::Rounds,
        4 => Quantity::Players,
        5 => Quantity::OppCoopsLast,
        6 => Quantity::OppCoopFracLast,
        7 => Quantity::OppCoopRate,
        8 => Quantity::OwnCoopRate,
        9 => Quantity::OwnLastCoop,
        10 => Quantity::StockFrac,
        _ => Quantity::Const {
            value: rng.random_range(0.0..1.0),
        },
    }
}

fn quantity(rng: &mut Rng8, depth: u32) -> Operand {
    let q = if depth == 0 || rng.random_bool(0.5) {
        leaf(rng)
    } else {
        let pick = rng.random_range(0..4);
        let mut sub = || Box::new(quantity(rng, depth - 1));
        match pick {
            0 => Quantity::Ratio { num: sub(), den: sub() },
            1 => Quantity::Diff { a: sub(), b: sub() },
            2 => Quantity::Sum {
                of: vec![*sub(), *sub()],
            },
            _ => Quantity::Product {
                of: vec![*sub(), *sub()],
            },
        }
    };
    Operand(q)
}

fn predicate(rng: &mut Rng8, depth: u32) -> Predicate {
    let composite = depth > 0 && rng.random_bool(0.3);
    if composite {
        return match rng.random_range(0..3) {
            0 => Predicate::All {
                of: (0..rng.random_range(1..4)).map(|_| predicate(rng, depth - 1)).collect(),
            },
            1 => Predicate::Any {
                of: (0..rng.random_range(1..4)).map(|_| predicate(rng, depth - 1)).collect(),
            },
            _ => Predicate::Not {
                of: Box::new(predicate(rng, depth - 1)),
            },
        };
    }
    match rng.random_range(0..6) {
        0 => Predicate::Always,
        1 => Predicate::FirstRound,
        2 => Predicate::LastRound,
        3 => Predicate::OwnLast {
            action: if rng.random_bool(0.5) { Action::C } else { Action::D },
        },
        4 => Predicate::AnyOpponentDefectedEver,
        _ => Predicate::Compare {
            lhs: quantity(rng, 2),
            op: [
                Comparison::Lt,
                Comparison::Le,
                Comparison::Gt,
                Comparison::Ge,
                Comparison::Eq,
                Comparison::Ne,
            ][rng.random_range(0..6)],
            rhs: quantity(rng, 2),
        },
    }
}

fn probability(rng: &mut Rng8) -> Operand {
    if rng.random_bool(0.6) {
        Operand::constant([0.0, 0.25, 0.5, 1.0][rng.random_range(0..4)])
    } else {
        quantity(rng, 2)
    }
}

fn random_policy(rng: &mut Rng8, i: usize) -> PolicySpec {
    PolicySpec {
        label: format!("fuzz#{i}"),
        rules: (0..rng.random_range(0..4))
            .map(|_| PolicyRule {
                when: predicate(rng, 2),
                cooperate_prob: probability(rng),
            })
            .collect(),
        default_prob: probability(rng),
    }
}

#[test]
fn admitted_policies_never_abort() {
    let mut rng = seed::stream(2024, &[]);
    let target_games = 10_000;
    let mut games = 0;
    let mut admitted = 0;
    let mut rejected = 0;
    let mut i = 0;
    while games < target_games {
        i += 1;
        let kind = GameKind::ALL[rng.random_range(0..3)];
        let n = rng.random_range(3..8);
        let params = GameParams::new(n).with_rounds(rng.random_range(1..12));
        let spec = random_policy(&mut rng, i);
        if spec.check().is_err() {
            continue;
        }
        let s = Strategy::new(spec.label.clone(), Origin::File, Box::new(spec));
        let report = validate_strategy(&s, kind, &params, 16, i as u64).unwrap();
        if !report.passed {
            rejected += 1;
            continue;
        }
        admitted += 1;
        for g in 0..25 {
            let opponents: Vec<Strategy> = (0..n - 1)
                .map(|_| {
                    let r = match rng.random_range(0..4) {
                        0 => Reference::AllC,
                        1 => Reference::AllD,
                        2 => Reference::Rnd(rng.random_range(0.0..=1.0)),
                        _ => Reference::CC(rng.random_range(0..n)),
                    };
                    make_reference(r, n).unwrap()
                })
                .collect();
            let mut seats: Vec<&Strategy> = opponents.iter().collect();
            seats.insert(rng.random_range(0..n), &s);
            let result = play_game(kind, &params, &seats, seed::derive(i as u64, &[g]));
            assert!(result.is_ok(), "{} aborted: {:?}", s.label, result.err());
            games += 1;
        }
    }
    assert!(admitted >= 100 && rejected >= 100, "admitted {admitted}, rejected {rejected}");
}
