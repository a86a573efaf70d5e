use super::{Action, GameKind, GameParams};
use crate::error::{Error, Result};

fn check_len(actions: &[Action], params: &GameParams) -> Result<usize> {
    if actions.len() != params.n {
        return Err(Error::LengthMismatch {
            expected: params.n,
            actual: actions.len(),
        });
    }
    Ok(actions.iter().filter(|a| a.is_cooperate()).count())
}

#[inline]
fn defect_bonus(a: Action) -> f64 {
    if a.is_cooperate() {
        0.0
    } else {
        1.0
    }
}

/// Public Goods payoffs: every player receives `n_c * k / n`, defectors keep 1 more.
pub fn pgg_payoffs(actions: &[Action], params: &GameParams) -> Result<Vec<f64>> {
    params.validate(GameKind::PublicGoods)?;
    let n_c = check_len(actions, params)?;
    let mut out = Vec::with_capacity(actions.len());
    pgg_into(actions, n_c, params, &mut out);
    Ok(out)
}

/// Collective Risk payoffs: benefit `k` for everyone iff at least `m` cooperate.
pub fn crd_payoffs(actions: &[Action], params: &GameParams) -> Result<Vec<f64>> {
    params.validate(GameKind::CollectiveRisk)?;
    let n_c = check_len(actions, params)?;
    let mut out = Vec::with_capacity(actions.len());
    crd_into(actions, n_c, params, &mut out);
    Ok(out)
}

/// One Common Pool round: returns the payoffs and the stock entering the next round.
pub fn cpr_round(actions: &[Action], stock: f64, params: &GameParams) -> Result<(Vec<f64>, f64)> {
    params.validate(GameKind::CommonPool)?;
    let n_c = check_len(actions, params)?;
    if !(0.0..=params.capacity).contains(&stock) {
        return Err(Error::StockOutOfRange {
            stock,
            capacity: params.capacity,
        });
    }
    let mut out = Vec::with_capacity(actions.len());
    let next = cpr_into(actions, n_c, stock, params, &mut out);
    Ok((out, next))
}

/// Stock left after extraction: `stock * n_c / (2n)`.
#[inline]
pub fn remaining_stock(stock: f64, n_c: usize, n: usize) -> f64 {
    stock * n_c as f64 / (2 * n) as f64
}

/// Logistic regrowth capped at capacity.
#[inline]
pub fn regrow(remaining: f64, capacity: f64) -> f64 {
    (remaining + 2.0 * remaining * (1.0 - remaining / capacity)).min(capacity)
}

#[inline]
pub(crate) fn pgg_into(actions: &[Action], n_c: usize, params: &GameParams, out: &mut Vec<f64>) {
    let share = n_c as f64 * params.k / params.n as f64;
    out.extend(actions.iter().map(|&a| share + defect_bonus(a)));
}

#[inline]
pub(crate) fn crd_into(actions: &[Action], n_c: usize, params: &GameParams, out: &mut Vec<f64>) {
    let benefit = if n_c >= params.m { params.k } else { 0.0 };
    out.extend(actions.iter().map(|&a| benefit + defect_bonus(a)));
}

#[inline]
pub(crate) fn cpr_into(
    actions: &[Action],
    n_c: usize,
    stock: f64,
    params: &GameParams,
    out: &mut Vec<f64>,
) -> f64 {
    let share = stock / (2 * params.n) as f64;
    out.extend(actions.iter().map(|&a| share + share * defect_bonus(a)));
    regrow(remaining_stock(stock, n_c, params.n), params.capacity)
}

/// Payoffs for any game without re-validating parameters; `stock` is only
/// read for the Common Pool. Returns the next stock for CPR.
pub fn round_payoffs(
    kind: GameKind,
    actions: &[Action],
    stock: Option<f64>,
    params: &GameParams,
    out: &mut Vec<f64>,
) -> Option<f64> {
    let n_c = actions.iter().filter(|a| a.is_cooperate()).count();
    match kind {
        GameKind::PublicGoods => {
            pgg_into(actions, n_c, params, out);
            None
        }
        GameKind::CollectiveRisk => {
            crd_into(actions, n_c, params, out);
            None
        }
        GameKind::CommonPool => Some(cpr_into(
            actions,
            n_c,
            stock.unwrap_or(params.capacity),
            params,
            out,
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Action::{C, D};

    fn pgg6() -> GameParams {
        GameParams::new(6).with_k(2.0)
    }

    #[test]
    fn pgg_worked_examples() {
        assert_eq!(pgg_payoffs(&[D; 6], &pgg6()).unwrap(), vec![1.0; 6]);
        assert_eq!(pgg_payoffs(&[C; 6], &pgg6()).unwrap(), vec![2.0; 6]);
        let mixed = pgg_payoffs(&[C, C, C, D, D, D], &pgg6()).unwrap();
        assert_eq!(mixed, vec![1.0, 1.0, 1.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn pgg_matches_endowment_form() {
        // (1 - c_i) + (k/n) * sum c_j
        let p = GameParams::new(5).with_k(3.0);
        let acts = [C, D, D, C, D];
        let sum_c = 2.0;
        let expected: Vec<f64> = acts
            .iter()
            .map(|a| (if *a == C { 0.0 } else { 1.0 }) + 3.0 / 5.0 * sum_c)
            .collect();
        let got = pgg_payoffs(&acts, &p).unwrap();
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn crd_examples() {
        let p = GameParams::new(4).with_m(2).with_k(2.0);
        assert_eq!(crd_payoffs(&[C, C, D, D], &p).unwrap(), vec![2.0, 2.0, 3.0, 3.0]);
        assert_eq!(crd_payoffs(&[C, D, D, D], &p).unwrap(), vec![0.0, 1.0, 1.0, 1.0]);
        assert_eq!(crd_payoffs(&[C; 4], &p).unwrap(), vec![2.0; 4]);
    }

    #[test]
    fn cpr_examples() {
        let p = GameParams::new(4);
        let (pay, next) = cpr_round(&[C; 4], 16.0, &p).unwrap();
        assert_eq!(pay, vec![2.0; 4]);
        assert_eq!(next, 16.0);
        let (pay, next) = cpr_round(&[D; 4], 16.0, &p).unwrap();
        assert_eq!(pay, vec![4.0; 4]);
        assert_eq!(next, 0.0);
    }

    #[test]
    fn cpr_two_player_mixed_round() {
        // Independent route: S' = S - S(2n - n_c)/(2n), then logistic growth.
        let p = GameParams::new(2);
        let (s, n, n_c, cap) = (8.0_f64, 2.0_f64, 1.0_f64, 8.0_f64);
        let s_rem = s - s * (2.0 * n - n_c) / (2.0 * n);
        let oracle_next = f64::min(s_rem + 2.0 * s_rem * (1.0 - s_rem / cap), cap);
        assert_eq!(s_rem, 2.0);
        assert_eq!(oracle_next, 5.0);
        let (pay, next) = cpr_round(&[C, D], 8.0, &p).unwrap();
        assert_eq!(pay, vec![2.0, 4.0]);
        assert!((next - oracle_next).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let p = GameParams::new(4);
        assert!(matches!(
            pgg_payoffs(&[C; 3], &p),
            Err(Error::LengthMismatch { expected: 4, actual: 3 })
        ));
        assert!(matches!(crd_payoffs(&[C; 5], &p), Err(Error::LengthMismatch { .. })));
        assert!(matches!(
            cpr_round(&[C; 4], 17.0, &p),
            Err(Error::StockOutOfRange { .. })
        ));
        assert!(cpr_round(&[C; 4], -0.1, &p).is_err());
        assert!(pgg_payoffs(&[C; 4], &p.clone().with_k(4.0)).is_err());
    }

    fn actions_strategy(max_n: usize) -> impl Strategy<Value = Vec<Action>> {
        prop::collection::vec(prop::bool::ANY.prop_map(Action::from_cooperate), 2..max_n)
    }

    proptest! {
        #[test]
        fn payoffs_are_permutation_equivariant(acts in actions_strategy(12), rot in 0usize..12, stock_frac in 0.0f64..=1.0) {
            let n = acts.len();
            let rot = rot % n;
            let mut permuted = acts.clone();
            permuted.rotate_left(rot);
            let p = GameParams::new(n).with_k(1.5).with_m((n / 2).max(1));
            for kind in GameKind::ALL {
                let stock = Some(stock_frac * p.capacity);
                let mut a = Vec::new();
                let mut b = Vec::new();
                round_payoffs(kind, &acts, stock, &p, &mut a);
                round_payoffs(kind, &permuted, stock, &p, &mut b);
                a.rotate_left(rot);
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn payoff_ranges(acts in actions_strategy(12), stock_frac in 0.0f64..=1.0) {
            let n = acts.len();
            let n_c = acts.iter().filter(|a| a.is_cooperate()).count() as f64;
            let p = GameParams::new(n).with_k(1.5).with_m((n / 2).max(1));
            let pgg = pgg_payoffs(&acts, &p).unwrap();
            let share = n_c * 1.5 / n as f64;
            prop_assert!(pgg.iter().all(|&x| x >= share - 1e-12 && x <= share + 1.0 + 1e-12));
            let crd = crd_payoffs(&acts, &p).unwrap();
            prop_assert!(crd.iter().all(|&x| [0.0, 1.0, 1.5, 2.5].contains(&x)));
            let (cpr, next) = cpr_round(&acts, stock_frac * p.capacity, &p).unwrap();
            prop_assert!(cpr.iter().all(|&x| x >= 0.0));
            prop_assert!((0.0..=p.capacity).contains(&next));
        }

        #[test]
        fn next_stock_monotone_in_cooperators(n in 2usize..40, stock_frac in 0.0f64..=1.0) {
            let cap = 4.0 * n as f64;
            let stock = stock_frac * cap;
            let mut prev = -1.0;
            for n_c in 0..=n {
                let next = regrow(remaining_stock(stock, n_c, n), cap);
                prop_assert!(next >= prev);
                prop_assert!((0.0..=cap).contains(&next));
                prev = next;
            }
        }
    }
}
