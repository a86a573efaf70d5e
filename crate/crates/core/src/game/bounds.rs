//! Minimum and maximum achievable mean normalised welfare.
//!
//! PGG and CRD are round-separable, so the bounds are the extremes of the
//! single-round welfare over the cooperator count. CPR welfare depends on the
//! stock trajectory: mean per-round welfare with `n_c` cooperators at stock
//! `S` is `S (2n - n_c) / (2n^2)` and depends only on the count, so symmetric
//! count sequences cover every joint action sequence. Small instances are
//! enumerated exhaustively; larger ones run a frontier search that keeps the
//! Pareto front of (stock, accumulated welfare). Future welfare is monotone
//! in the stock, so a dominated state can never lead to a better bound and
//! the search is exact unless the front outgrows `beam_width`, in which case
//! the result is flagged approximate.

use serde::{Deserialize, Serialize};

use super::payoff::{regrow, remaining_stock};
use super::{Action, GameKind, GameParams};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WelfareBounds {
    pub min: f64,
    pub max: f64,
    pub approximate: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsSearch {
    /// Enumerate all `(n+1)^r` count sequences when at most this many.
    pub exhaustive_budget: u64,
    pub beam_width: usize,
}

impl Default for BoundsSearch {
    fn default() -> Self {
        BoundsSearch {
            exhaustive_budget: 1_000_000,
            beam_width: 4096,
        }
    }
}

pub fn welfare_bounds(kind: GameKind, params: &GameParams) -> Result<WelfareBounds> {
    welfare_bounds_with(kind, params, &BoundsSearch::default())
}

pub fn welfare_bounds_with(
    kind: GameKind,
    params: &GameParams,
    search: &BoundsSearch,
) -> Result<WelfareBounds> {
    params.validate(kind)?;
    Ok(match kind {
        GameKind::PublicGoods | GameKind::CollectiveRisk => separable_bounds(kind, params),
        GameKind::CommonPool => {
            let sequences = (params.n as u128 + 1).checked_pow(params.rounds as u32);
            if sequences.is_some_and(|s| s <= search.exhaustive_budget as u128) {
                cpr_exhaustive(params)
            } else {
                cpr_frontier(params, search.beam_width)
            }
        }
    })
}

fn separable_bounds(kind: GameKind, params: &GameParams) -> WelfareBounds {
    let n = params.n;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut payoffs = Vec::with_capacity(n);
    for n_c in 0..=n {
        let actions: Vec<Action> = (0..n).map(|i| Action::from_cooperate(i < n_c)).collect();
        payoffs.clear();
        super::round_payoffs(kind, &actions, None, params, &mut payoffs);
        let w = payoffs.iter().sum::<f64>() / n as f64;
        lo = lo.min(w);
        hi = hi.max(w);
    }
    WelfareBounds {
        min: lo,
        max: hi,
        approximate: false,
    }
}

/// Mean per-agent payoff of one CPR round.
#[inline]
fn cpr_round_welfare(stock: f64, n_c: usize, n: usize) -> f64 {
    let share = stock / (2 * n) as f64;
    (n_c as f64 * share + (n - n_c) as f64 * (share + share)) / n as f64
}

fn cpr_exhaustive(params: &GameParams) -> WelfareBounds {
    fn walk(params: &GameParams, round: usize, stock: f64, acc: f64, out: &mut (f64, f64)) {
        if round == params.rounds {
            out.0 = out.0.min(acc);
            out.1 = out.1.max(acc);
            return;
        }
        for n_c in 0..=params.n {
            let w = cpr_round_welfare(stock, n_c, params.n);
            let next = regrow(remaining_stock(stock, n_c, params.n), params.capacity);
            walk(params, round + 1, next, acc + w, out);
        }
    }
    let mut out = (f64::INFINITY, f64::NEG_INFINITY);
    walk(params, 0, params.capacity, 0.0, &mut out);
    let r = params.rounds as f64;
    WelfareBounds {
        min: out.0 / r,
        max: out.1 / r,
        approximate: false,
    }
}

fn cpr_frontier(params: &GameParams, beam_width: usize) -> WelfareBounds {
    let (max, t1) = frontier_search(params, beam_width, true);
    let (min, t2) = frontier_search(params, beam_width, false);
    let r = params.rounds as f64;
    WelfareBounds {
        min: min / r,
        max: max / r,
        approximate: t1 || t2,
    }
}

/// Returns the best accumulated welfare and whether the beam truncated.
fn frontier_search(params: &GameParams, beam_width: usize, maximize: bool) -> (f64, bool) {
    let n = params.n;
    let mut front: Vec<(f64, f64)> = vec![(params.capacity, 0.0)];
    let mut truncated = false;
    for _ in 0..params.rounds {
        let mut next: Vec<(f64, f64)> = Vec::with_capacity(front.len() * (n + 1));
        for &(stock, acc) in &front {
            for n_c in 0..=n {
                let w = cpr_round_welfare(stock, n_c, n);
                let s = regrow(remaining_stock(stock, n_c, n), params.capacity);
                next.push((s, acc + w));
            }
        }
        front = pareto(next, maximize);
        if front.len() > beam_width.max(2) {
            truncated = true;
            let keep = beam_width.max(2);
            let last = front.len() - 1;
            front = (0..keep).map(|j| front[j * last / (keep - 1)]).collect();
        }
    }
    let best = front.iter().map(|s| s.1);
    let v = if maximize {
        best.fold(f64::NEG_INFINITY, f64::max)
    } else {
        best.fold(f64::INFINITY, f64::min)
    };
    (v, truncated)
}

/// For maximisation a state is dominated by one with at least as much stock
/// and at least as much welfare; for minimisation, by one with no more of either.
fn pareto(mut states: Vec<(f64, f64)>, maximize: bool) -> Vec<(f64, f64)> {
    if maximize {
        states.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
    } else {
        states.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    }
    let mut out: Vec<(f64, f64)> = Vec::new();
    for s in states {
        let improves = match out.last() {
            None => true,
            Some(best) if maximize => s.1 > best.1,
            Some(best) => s.1 < best.1,
        };
        if improves {
            out.push(s);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::cpr_round;

    /// Brute force over every joint action profile per round (not just counts),
    /// using the public payoff functions.
    fn brute_force_cpr(params: &GameParams) -> (f64, f64) {
        let n = params.n;
        let profiles: Vec<Vec<Action>> = (0..1usize << n)
            .map(|mask| (0..n).map(|i| Action::from_cooperate(mask >> i & 1 == 1)).collect())
            .collect();
        fn go(p: &GameParams, prof: &[Vec<Action>], round: usize, stock: f64, acc: f64, out: &mut (f64, f64)) {
            if round == p.rounds {
                out.0 = out.0.min(acc);
                out.1 = out.1.max(acc);
                return;
            }
            for a in prof {
                let (pay, next) = cpr_round(a, stock, p).unwrap();
                go(p, prof, round + 1, next, acc + pay.iter().sum::<f64>(), out);
            }
        }
        let mut out = (f64::INFINITY, f64::NEG_INFINITY);
        go(params, &profiles, 0, params.capacity, 0.0, &mut out);
        let denom = (n * params.rounds) as f64;
        (out.0 / denom, out.1 / denom)
    }

    #[test]
    fn pgg_bounds() {
        let b = welfare_bounds(GameKind::PublicGoods, &GameParams::new(4).with_k(2.0)).unwrap();
        assert_eq!((b.min, b.max, b.approximate), (1.0, 2.0, false));
        let b = welfare_bounds(GameKind::PublicGoods, &GameParams::new(16).with_k(3.0)).unwrap();
        assert_eq!((b.min, b.max), (1.0, 3.0));
    }

    #[test]
    fn crd_bounds_by_scan() {
        let b = welfare_bounds(GameKind::CollectiveRisk, &GameParams::new(4)).unwrap();
        assert!((b.min - 0.75).abs() < 1e-12);
        assert!((b.max - 2.5).abs() < 1e-12);
    }

    #[test]
    fn cpr_small_matches_brute_force() {
        for (n, r) in [(2, 1), (2, 2), (2, 4), (3, 3), (4, 3)] {
            let p = GameParams::new(n).with_rounds(r);
            let b = welfare_bounds(GameKind::CommonPool, &p).unwrap();
            let (lo, hi) = brute_force_cpr(&p);
            assert!(!b.approximate);
            assert!((b.min - lo).abs() < 1e-9, "n={n} r={r}: {} vs {lo}", b.min);
            assert!((b.max - hi).abs() < 1e-9, "n={n} r={r}: {} vs {hi}", b.max);
        }
    }

    #[test]
    fn cpr_two_by_two_enumeration() {
        // All 9 count sequences for n=2, r=2 by hand-rolled recursion.
        let p = GameParams::new(2).with_rounds(2);
        let mut vals = Vec::new();
        for a in 0..=2usize {
            for b in 0..=2usize {
                let (p1, s1) = cpr_round(
                    &(0..2).map(|i| Action::from_cooperate(i < a)).collect::<Vec<_>>(),
                    8.0,
                    &p,
                )
                .unwrap();
                let (p2, _) = cpr_round(
                    &(0..2).map(|i| Action::from_cooperate(i < b)).collect::<Vec<_>>(),
                    s1,
                    &p,
                )
                .unwrap();
                vals.push((p1.iter().sum::<f64>() + p2.iter().sum::<f64>()) / 4.0);
            }
        }
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let b = welfare_bounds(GameKind::CommonPool, &p).unwrap();
        assert!((b.min - lo).abs() < 1e-12 && (b.max - hi).abs() < 1e-12);
        // all-D then nothing left; full cooperation then a final defection round
        assert!((lo - 2.0).abs() < 1e-12);
        assert!((hi - 3.0).abs() < 1e-12);
    }

    #[test]
    fn frontier_agrees_with_exhaustive() {
        for (n, r) in [(2, 6), (3, 5), (4, 6), (6, 4), (9, 4)] {
            let p = GameParams::new(n).with_rounds(r);
            let exact = welfare_bounds_with(
                GameKind::CommonPool,
                &p,
                &BoundsSearch { exhaustive_budget: u64::MAX, beam_width: 1 },
            )
            .unwrap();
            let frontier = welfare_bounds_with(
                GameKind::CommonPool,
                &p,
                &BoundsSearch { exhaustive_budget: 0, beam_width: 1 << 20 },
            )
            .unwrap();
            assert!(!frontier.approximate);
            assert!((exact.min - frontier.min).abs() < 1e-12, "n={n} r={r}");
            assert!((exact.max - frontier.max).abs() < 1e-12, "n={n} r={r}");
        }
    }

    #[test]
    fn large_cpr_bounds_bracket_known_trajectories() {
        let p = GameParams::new(64);
        let b = welfare_bounds(GameKind::CommonPool, &p).unwrap();
        // full cooperation for 19 rounds then universal defection: (19*2 + 4)/20
        assert!(b.max >= 2.1 - 1e-12);
        // universal defection in round one: 4 / 20
        assert!(b.min <= 0.2 + 1e-12);
        assert!(b.min >= 0.0 && b.max <= 4.0);
    }
}
