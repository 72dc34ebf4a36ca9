//! Per-player probability grids and payoff lattices: sizing formulas, exact
//! lattice projection, and grid-strategy enumeration/rounding.
//!
//! The probability grid of player `i` is `{0, 1/s_i, ..., 1}`; a grid mixed
//! strategy is stored as integer numerators over `s_i`. The payoff lattice is
//! the set of integer multiples of a spacing `tau'_i`, anchored at 0 so that
//! sums of lattice points are again lattice points (the partial-sum chains in
//! the CSP and the tree DP rely on this closure).

use crate::model::{clique_stats, GameDefinition, PlayerId, StructureStats};
use crate::ratio::{ceil_int, floor_int, round_half_up};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("epsilon must be positive")]
    EpsilonNonpositive,
    #[error("plan too large: {0}")]
    TooLarge(String),
    #[error("refined plan needs one clique ordering per player")]
    BadOrdering,
}

/// Which discretization scheme sized the plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Simple,
    Refined,
}

/// The uniform probability grid `{0, 1/s, ..., 1}` of one player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbabilityGrid {
    pub s: u64,
}

impl ProbabilityGrid {
    pub fn tau(&self) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::from(self.s))
    }
}

/// Integer-indexed payoff lattice with spacing `tau`; `value(k) = k * tau`.
/// `lo_index..=hi_index` covers the payoff interval the plan promised to
/// cover; index arithmetic itself is unbounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayoffLattice {
    pub tau: BigRational,
    pub lo_index: i64,
    pub hi_index: i64,
}

impl PayoffLattice {
    pub fn value(&self, index: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(index)) * &self.tau
    }
}

/// Result of projecting a value onto a lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Projection {
    pub index: i64,
    /// True when the value fell outside the covered interval and was clamped
    /// to the nearest endpoint.
    pub clamped: bool,
}

/// Nearest lattice point, exact halves rounding toward the larger value.
/// Values outside the covered interval clamp to the endpoint and set the
/// warning flag.
pub fn project(v: &BigRational, lattice: &PayoffLattice) -> Projection {
    let q = v / &lattice.tau;
    let k = round_half_up(&q).to_i64().expect("lattice index overflow");
    if k < lattice.lo_index {
        Projection { index: lattice.lo_index, clamped: true }
    } else if k > lattice.hi_index {
        Projection { index: lattice.hi_index, clamped: true }
    } else {
        Projection { index: k, clamped: false }
    }
}

/// Nearest lattice index without interval bounds (used by the partial-sum and
/// partial-expectation chains, whose intermediate values always stay within
/// half a step of representable sums).
pub fn project_unbounded(v: &BigRational, tau: &BigRational) -> i64 {
    let q = v / tau;
    round_half_up(&q).to_i64().expect("lattice index overflow")
}

/// One on-grid mixed strategy: integer numerators over denominator `s`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridMixedStrategy {
    pub player: PlayerId,
    pub s: u64,
    pub numerators: Vec<u64>,
}

impl GridMixedStrategy {
    pub fn new(player: PlayerId, s: u64, numerators: Vec<u64>) -> Self {
        debug_assert_eq!(numerators.iter().sum::<u64>(), s);
        GridMixedStrategy { player, s, numerators }
    }

    pub fn to_rationals(&self) -> Vec<BigRational> {
        self.numerators
            .iter()
            .map(|&n| BigRational::new(BigInt::from(n), BigInt::from(self.s)))
            .collect()
    }
}

/// Per-player plan: probability grid, payoff lattice, and the best-response
/// slack its variant's guarantee dictates.
#[derive(Debug, Clone)]
pub struct PlayerPlan {
    pub grid: ProbabilityGrid,
    pub lattice: PayoffLattice,
    /// Payoff-lattice point count minus one (sizing metadata).
    pub s_prime: u64,
    /// Slack of the best-response constraint for this player.
    pub br_slack: BigRational,
    /// All of the player's clique ranges vanish (or it owns no cliques): any
    /// strategy is a best response and chain constraints are skipped.
    pub indifferent: bool,
    /// Sum of the player's clique ranges (refined normalization denominator).
    pub sum_ranges: BigRational,
}

/// The full joint discretization: one grid and lattice per player.
#[derive(Debug, Clone)]
pub struct DiscretizationPlan {
    pub epsilon: BigRational,
    /// Epsilon used for probability-grid sizing; smaller than `epsilon` when
    /// the requested value exceeded the admissibility bound.
    pub epsilon_sizing: BigRational,
    pub variant: Variant,
    pub players: Vec<PlayerPlan>,
}

impl DiscretizationPlan {
    pub fn grid_of(&self, i: PlayerId) -> &ProbabilityGrid {
        &self.players[i].grid
    }

    pub fn lattice_of(&self, i: PlayerId) -> &PayoffLattice {
        &self.players[i].lattice
    }
}

/// `sum_C R_{j,C} (|C| - 1)` for each player: the weight its neighbors'
/// probability grids must resolve.
fn range_weights(game: &GameDefinition, stats: &StructureStats) -> Vec<BigRational> {
    (0..game.num_players())
        .map(|j| {
            let mut total = BigRational::zero();
            for &c in &stats.cliques_of[j] {
                let clique = &game.cliques[c];
                let cs = clique_stats(clique);
                let w = BigInt::from(clique.members.len() - 1);
                total += cs.range * BigRational::from_integer(w);
            }
            total
        })
        .collect()
}

/// Epsilon admissibility bound `2 min_j D_j / (kappa'_j - 1)`. Players whose
/// weighted range sum is zero impose no bound: their payoffs do not depend on
/// anyone's mixing, so no grid resolution is needed on their behalf.
fn epsilon_bound(stats: &StructureStats, weights: &[BigRational]) -> Option<BigRational> {
    let mut bound: Option<BigRational> = None;
    for (j, w) in weights.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        let denom = BigInt::from(stats.kappa_prime_i[j] - 1);
        let b = BigRational::from_integer(BigInt::from(2u32)) * w
            / BigRational::from_integer(denom);
        if bound.as_ref().is_none_or(|cur| b < *cur) {
            bound = Some(b);
        }
    }
    bound
}

fn probability_sizes(
    game: &GameDefinition,
    stats: &StructureStats,
    weights: &[BigRational],
    eps_sizing: &BigRational,
) -> Result<Vec<u64>, PlanError> {
    let mut sizes = Vec::with_capacity(game.num_players());
    for i in 0..game.num_players() {
        let max_weight = stats.affected[i]
            .iter()
            .map(|&j| weights[j].clone())
            .max()
            .unwrap_or_else(BigRational::zero);
        let m_i = BigRational::from_integer(BigInt::from(game.actions[i]));
        let six = BigRational::from_integer(BigInt::from(6u32));
        let s = ceil_int(&(six * m_i * max_weight / eps_sizing.clone()));
        let s = s.to_u64().ok_or_else(|| {
            PlanError::TooLarge(format!("probability grid for player {i} exceeds u64"))
        })?;
        if s > 1_000_000_000 {
            return Err(PlanError::TooLarge(format!(
                "probability grid for player {i} has {s} intervals"
            )));
        }
        sizes.push(s.max(1));
    }
    Ok(sizes)
}

/// Theorem-sized simple plan: `s_i = ceil(6 |A_i| max_j D_j / eps)` and
/// `tau'_i = eps / (3 kappa_i)`, with the payoff lattice covering
/// `[sum_C min(l,0), sum_C max(u,0)]`. Epsilon above the admissibility bound
/// is clamped for grid sizing only.
#[allow(clippy::needless_range_loop)] // player ids index several parallel tables
pub fn plan_simple(
    game: &GameDefinition,
    stats: &StructureStats,
    epsilon: &BigRational,
) -> Result<DiscretizationPlan, PlanError> {
    if !epsilon.is_positive() {
        return Err(PlanError::EpsilonNonpositive);
    }
    let weights = range_weights(game, stats);
    let eps_sizing = match epsilon_bound(stats, &weights) {
        Some(bound) if bound < *epsilon => bound,
        _ => epsilon.clone(),
    };
    let sizes = probability_sizes(game, stats, &weights, &eps_sizing)?;

    let two_thirds_eps =
        epsilon * BigRational::new(BigInt::from(2u32), BigInt::from(3u32));
    let mut players = Vec::with_capacity(game.num_players());
    for i in 0..game.num_players() {
        let kappa_i = stats.kappa_i[i];
        let mut lo = BigRational::zero();
        let mut hi = BigRational::zero();
        let mut sum_ranges = BigRational::zero();
        for &c in &stats.cliques_of[i] {
            let cs = clique_stats(&game.cliques[c]);
            if cs.l.is_negative() {
                lo += &cs.l;
            }
            if cs.u.is_positive() {
                hi += &cs.u;
            }
            sum_ranges += &cs.range;
        }
        let indifferent = kappa_i == 0 || sum_ranges.is_zero();
        let tau = if kappa_i == 0 {
            BigRational::one()
        } else {
            epsilon / BigRational::from_integer(BigInt::from(3 * kappa_i))
        };
        let lo_index = floor_int(&(&lo / &tau)).to_i64().ok_or_else(|| {
            PlanError::TooLarge(format!("payoff lattice for player {i} exceeds i64"))
        })?;
        let hi_index = ceil_int(&(&hi / &tau)).to_i64().ok_or_else(|| {
            PlanError::TooLarge(format!("payoff lattice for player {i} exceeds i64"))
        })?;
        let s_prime = (hi_index - lo_index) as u64;
        players.push(PlayerPlan {
            grid: ProbabilityGrid { s: sizes[i] },
            lattice: PayoffLattice { tau, lo_index, hi_index },
            s_prime,
            br_slack: two_thirds_eps.clone(),
            indifferent,
            sum_ranges,
        });
    }
    Ok(DiscretizationPlan {
        epsilon: epsilon.clone(),
        epsilon_sizing: eps_sizing,
        variant: Variant::Simple,
        players,
    })
}

/// Refined plan: same probability grids, but the payoff lattice is the
/// scale-normalized `[0, 1]` grid with
/// `tau'_i = eps / (3 sum_l R_{i,C^l} (|C^l| + kappa_i - l))` (rounded to
/// `1/s'` so the lattice hits 1 exactly), and the best-response slack shrinks
/// to `2 eps / (3 sum_C R_{i,C})`. `orders` gives each player's clique order
/// (indices into its `cliques_of` list).
#[allow(clippy::needless_range_loop)] // player ids index several parallel tables
pub fn plan_refined(
    game: &GameDefinition,
    stats: &StructureStats,
    epsilon: &BigRational,
    orders: &[Vec<usize>],
) -> Result<DiscretizationPlan, PlanError> {
    if !epsilon.is_positive() {
        return Err(PlanError::EpsilonNonpositive);
    }
    if orders.len() != game.num_players() {
        return Err(PlanError::BadOrdering);
    }
    let weights = range_weights(game, stats);
    let eps_sizing = match epsilon_bound(stats, &weights) {
        Some(bound) if bound < *epsilon => bound,
        _ => epsilon.clone(),
    };
    let sizes = probability_sizes(game, stats, &weights, &eps_sizing)?;

    let mut players = Vec::with_capacity(game.num_players());
    for i in 0..game.num_players() {
        let kappa_i = stats.kappa_i[i];
        if orders[i].len() != kappa_i {
            return Err(PlanError::BadOrdering);
        }
        // Weighted range sum with positional weights (|C^l| + kappa - l).
        let mut weighted = BigRational::zero();
        let mut sum_ranges = BigRational::zero();
        for (pos, &local) in orders[i].iter().enumerate() {
            let c = stats.cliques_of[i][local];
            let clique = &game.cliques[c];
            let cs = clique_stats(clique);
            let l = pos + 1;
            let w = BigInt::from(clique.members.len() + kappa_i - l);
            weighted += &cs.range * BigRational::from_integer(w);
            sum_ranges += &cs.range;
        }
        let indifferent = kappa_i == 0 || sum_ranges.is_zero();
        let (s_prime, br_slack) = if indifferent {
            (1u64, BigRational::zero())
        } else {
            let three = BigRational::from_integer(BigInt::from(3u32));
            let sp = ceil_int(&(&three * &weighted / epsilon)).to_u64().ok_or_else(|| {
                PlanError::TooLarge(format!("payoff lattice for player {i} exceeds u64"))
            })?;
            let slack = BigRational::from_integer(BigInt::from(2u32)) * epsilon
                / (&three * &sum_ranges);
            (sp.max(1), slack)
        };
        let tau = BigRational::new(BigInt::one(), BigInt::from(s_prime));
        players.push(PlayerPlan {
            grid: ProbabilityGrid { s: sizes[i] },
            lattice: PayoffLattice { tau, lo_index: 0, hi_index: s_prime as i64 },
            s_prime,
            br_slack,
            indifferent,
            sum_ranges,
        });
    }
    Ok(DiscretizationPlan {
        epsilon: epsilon.clone(),
        epsilon_sizing: eps_sizing,
        variant: Variant::Refined,
        players,
    })
}

/// Measured sizing ratios against the asymptotic bounds, for payoff ranges
/// bounded by a supplied constant `rho`.
#[derive(Debug, Clone)]
pub struct Claim1Row {
    pub player: PlayerId,
    pub s: u64,
    /// `s_i * eps / (m kappa' kappa)`; at most `6 rho` up to ceiling slack.
    pub ratio_s: BigRational,
    pub within_s: bool,
    pub s_prime: u64,
    /// `s'_i * eps / kappa^2`.
    pub ratio_s_prime: BigRational,
    pub within_s_prime: bool,
}

#[derive(Debug, Clone)]
pub struct Claim1Report {
    pub rows: Vec<Claim1Row>,
    pub all_within: bool,
}

/// Check the `s_i = O(m kappa' kappa / eps)` and `s'_i = O(kappa^2 / eps)`
/// size bounds with their explicit constants, given that every clique range
/// is bounded by `rho`.
pub fn claim1_bounds(
    game: &GameDefinition,
    stats: &StructureStats,
    plan: &DiscretizationPlan,
    rho: &BigRational,
) -> Claim1Report {
    let eps = &plan.epsilon_sizing;
    let m = BigRational::from_integer(BigInt::from(
        game.actions.iter().copied().max().unwrap_or(1),
    ));
    let kappa = BigRational::from_integer(BigInt::from(stats.kappa.max(1)));
    let kp = BigRational::from_integer(BigInt::from(stats.kappa_prime.max(1)));
    let six = BigRational::from_integer(BigInt::from(6u32));
    let three = BigRational::from_integer(BigInt::from(3u32));
    let one = BigRational::one();
    // Bound on the covered interval length of one clique under `rho`-bounded
    // ranges: measured directly as max(u,0) - min(l,0) over cliques.
    let mut rho_bar = BigRational::zero();
    for clique in &game.cliques {
        let cs = clique_stats(clique);
        let mut len = BigRational::zero();
        if cs.u.is_positive() {
            len += &cs.u;
        }
        if cs.l.is_negative() {
            len -= &cs.l;
        }
        if len > rho_bar {
            rho_bar = len;
        }
    }

    let mut rows = Vec::new();
    let mut all_within = true;
    for (i, pp) in plan.players.iter().enumerate() {
        let s = BigRational::from_integer(BigInt::from(pp.grid.s));
        let sp = BigRational::from_integer(BigInt::from(pp.s_prime));
        let ratio_s = &s * eps / (&m * &kp * &kappa);
        let s_bound = &six * &m * &kp * &kappa * rho / eps + &one;
        let within_s = s <= s_bound;
        let ratio_sp = &sp * eps / (&kappa * &kappa);
        let sp_bound = &three * &kappa * &kappa * &rho_bar / eps
            + BigRational::from_integer(BigInt::from(2u32));
        let within_sp = sp <= sp_bound;
        all_within &= within_s && within_sp;
        rows.push(Claim1Row {
            player: i,
            s: pp.grid.s,
            ratio_s,
            within_s,
            s_prime: pp.s_prime,
            ratio_s_prime: ratio_sp,
            within_s_prime: within_sp,
        });
    }
    Claim1Report { rows, all_within }
}

/// Number of grid strategies: `C(s + m - 1, m - 1)`.
pub fn count_grid_strategies(m: usize, s: u64) -> Option<u128> {
    let mut acc: u128 = 1;
    for i in 1..m as u128 {
        acc = acc.checked_mul(s as u128 + i)?;
        acc /= i;
    }
    Some(acc)
}

/// All compositions of `s` into `m` nonnegative parts, in ascending
/// lexicographic order of the numerator tuples.
pub fn enumerate_grid_strategies(m: usize, s: u64) -> Vec<Vec<u64>> {
    assert!(m >= 1);
    let mut out = Vec::new();
    let mut current = vec![0u64; m];
    fn rec(pos: usize, left: u64, current: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if pos + 1 == current.len() {
            current[pos] = left;
            out.push(current.clone());
            return;
        }
        for v in 0..=left {
            current[pos] = v;
            rec(pos + 1, left - v, current, out);
        }
    }
    rec(0, s, &mut current, &mut out);
    out
}

/// The grid strategy nearest to `p` in l-infinity distance, ties broken
/// toward the lexicographically larger numerator tuple. `p` must be a
/// probability vector.
pub fn nearest_grid_strategy(p: &[BigRational], s: u64) -> Vec<u64> {
    let s_int = BigInt::from(s);
    let targets: Vec<BigRational> = p
        .iter()
        .map(|v| v * BigRational::from_integer(s_int.clone()))
        .collect();

    // Candidate l-infinity radii (in numerator units): distances from each
    // target to its two neighboring integers.
    let mut candidates: Vec<BigRational> = Vec::new();
    for t in &targets {
        let fl = BigRational::from_integer(floor_int(t));
        let frac = t - &fl;
        candidates.push(frac.clone());
        if !frac.is_zero() {
            candidates.push(BigRational::one() - frac);
        }
    }
    candidates.sort();
    candidates.dedup();

    let bounds = |e: &BigRational| -> Option<(Vec<BigInt>, Vec<BigInt>)> {
        let mut los = Vec::with_capacity(targets.len());
        let mut his = Vec::with_capacity(targets.len());
        for t in &targets {
            let lo = ceil_int(&(t - e)).max(BigInt::zero());
            let hi = floor_int(&(t + e)).min(s_int.clone());
            if lo > hi {
                return None;
            }
            los.push(lo);
            his.push(hi);
        }
        let lo_sum: BigInt = los.iter().sum();
        let hi_sum: BigInt = his.iter().sum();
        if lo_sum <= s_int && s_int <= hi_sum {
            Some((los, his))
        } else {
            None
        }
    };

    let (los, his) = candidates
        .iter()
        .find_map(bounds)
        .expect("a feasible rounding always exists for a probability vector");

    // Greedy lexicographically-largest assignment within the optimal radius.
    let mut result = Vec::with_capacity(targets.len());
    let mut remaining = s_int;
    for a in 0..targets.len() {
        let later_lo: BigInt = los[a + 1..].iter().sum();
        let later_hi: BigInt = his[a + 1..].iter().sum();
        let mut n = his[a].clone().min(&remaining - &later_lo);
        let min_allowed = los[a].clone().max(&remaining - &later_hi);
        if n < min_allowed {
            n = min_allowed;
        }
        remaining -= &n;
        result.push(n.to_u64().expect("numerator fits u64"));
    }
    debug_assert_eq!(result.iter().sum::<u64>(), s);
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_game, LocalClique};
    use crate::ratio::{int, parse_rational, ratio};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn star_mp(d: usize) -> (GameDefinition, StructureStats) {
        let mp = vec![int(1), int(0), int(0), int(1)];
        let anti = vec![int(0), int(1), int(1), int(0)];
        let mut cliques = Vec::new();
        for leaf in 1..=d {
            cliques.push(LocalClique { owner: 0, members: vec![0, leaf], payoffs: mp.clone() });
            cliques.push(LocalClique { owner: leaf, members: vec![leaf, 0], payoffs: anti.clone() });
        }
        let game = GameDefinition { actions: vec![2; d + 1], cliques };
        let stats = validate_game(&game).unwrap();
        (game, stats)
    }

    #[test]
    fn star_plan_sizes_match_formula() {
        for (d, eps_text) in [(3usize, "0.1"), (10, "0.1"), (10, "0.05")] {
            let (game, stats) = star_mp(d);
            let eps = parse_rational(eps_text).unwrap();
            let plan = plan_simple(&game, &stats, &eps).unwrap();
            // Leaves answer to the center whose weighted range sum is d;
            // the center answers to leaves whose sum is 1.
            let twelve_d = int(12 * d as i64) / &eps;
            let expected_leaf = ceil_int(&twelve_d).to_u64().unwrap();
            let expected_center = ceil_int(&(int(12) / &eps)).to_u64().unwrap();
            for leaf in 1..=d {
                assert_eq!(plan.players[leaf].grid.s, expected_leaf);
            }
            assert_eq!(plan.players[0].grid.s, expected_center);
        }
    }

    #[test]
    fn star_plan_no_ceiling_slack_when_integral() {
        // 12d/eps integral: eps = 0.1, d = 5 -> s = 600 exactly.
        let (game, stats) = star_mp(5);
        let plan = plan_simple(&game, &stats, &ratio(1, 10)).unwrap();
        assert_eq!(plan.players[1].grid.s, 600);
    }

    #[test]
    fn leaf_lattice_spans_interval() {
        let (game, stats) = star_mp(3);
        let eps = ratio(1, 10);
        let plan = plan_simple(&game, &stats, &eps).unwrap();
        // Leaf: kappa = 1, tau' = eps/3, interval [0,1] -> 30 steps.
        let leaf = &plan.players[1];
        assert_eq!(leaf.lattice.tau, ratio(1, 30));
        assert_eq!(leaf.lattice.lo_index, 0);
        assert_eq!(leaf.lattice.hi_index, 30);
        assert_eq!(leaf.s_prime, 30);
        // s' = ceil(3 R kappa / eps) = 30 for R = 1, kappa = 1.
        let expected = ceil_int(&(int(3) / &eps)).to_u64().unwrap();
        assert_eq!(leaf.s_prime, expected);
    }

    #[test]
    fn epsilon_must_be_positive() {
        let (game, stats) = star_mp(2);
        assert!(matches!(
            plan_simple(&game, &stats, &int(0)),
            Err(PlanError::EpsilonNonpositive)
        ));
        assert!(matches!(
            plan_refined(&game, &stats, &int(-1), &[vec![], vec![], vec![]]),
            Err(PlanError::EpsilonNonpositive)
        ));
    }

    #[test]
    fn refined_plan_tau_matches_formula() {
        // Polymatrix player with kappa = d, all |C| = 2, all R = 1:
        // denominator 3 * sum_{l=1..d} (2 + d - l). For d = 1 this is 6.
        for d in [1usize, 2, 3] {
            let (game, stats) = star_mp(d);
            let orders: Vec<Vec<usize>> =
                (0..=d).map(|i| (0..stats.kappa_i[i]).collect()).collect();
            let eps = ratio(1, 10);
            let plan = plan_refined(&game, &stats, &eps, &orders).unwrap();
            let weighted: i64 = (1..=d as i64).map(|l| 2 + d as i64 - l).sum();
            let sp = ceil_int(&(int(3 * weighted) / &eps)).to_u64().unwrap();
            assert_eq!(plan.players[0].s_prime, sp, "d = {d}");
            assert_eq!(plan.players[0].lattice.tau, ratio(1, sp as i64));
            // Leaf: kappa = 1, |C| = 2, R = 1 -> tau' = eps/6.
            assert_eq!(plan.players[1].s_prime, 60);
            assert_eq!(plan.players[1].lattice.tau, ratio(1, 60));
        }
    }

    #[test]
    fn refined_plan_degenerate_ranges() {
        let game = GameDefinition {
            actions: vec![2, 2],
            cliques: vec![
                LocalClique { owner: 0, members: vec![0, 1], payoffs: vec![int(4); 4] },
                LocalClique { owner: 1, members: vec![1, 0], payoffs: vec![int(0); 4] },
            ],
        };
        let stats = validate_game(&game).unwrap();
        let plan = plan_refined(&game, &stats, &ratio(1, 4), &[vec![0], vec![0]]).unwrap();
        assert!(plan.players[0].indifferent);
        assert_eq!(plan.players[0].s_prime, 1); // two-point lattice
    }

    #[test]
    fn oversized_epsilon_is_clamped_for_sizing_only() {
        // Matching pennies: the admissibility bound is 2 min_j D_j = 2, so
        // eps = 4 sizes the grids as if eps were 2, while the plan keeps the
        // requested eps for slacks and lattices.
        let (game, stats) = star_mp(1);
        let eps = int(4);
        let plan = plan_simple(&game, &stats, &eps).unwrap();
        assert_eq!(plan.epsilon, eps);
        assert_eq!(plan.epsilon_sizing, int(2));
        assert_eq!(plan.players[1].grid.s, 6); // ceil(12 * 1 / 2)
        assert_eq!(plan.players[1].lattice.tau, eps / int(3));
    }

    #[test]
    fn claim1_star_ratios() {
        let (game, stats) = star_mp(10);
        let eps = ratio(1, 10);
        let plan = plan_simple(&game, &stats, &eps).unwrap();
        assert_eq!(plan.players[1].grid.s, 1200);
        let report = claim1_bounds(&game, &stats, &plan, &int(1));
        assert!(report.all_within);
        // ratio = 1200 * 0.1 / (2 * 2 * 10) = 3.
        assert_eq!(report.rows[1].ratio_s, int(3));

        // Doubling the degree doubles the leaf grid.
        let (game2, stats2) = star_mp(20);
        let plan2 = plan_simple(&game2, &stats2, &eps).unwrap();
        assert_eq!(plan2.players[1].grid.s, 2400);

        // Doubling epsilon halves it (up to ceiling).
        let plan3 = plan_simple(&game, &stats, &ratio(1, 5)).unwrap();
        assert_eq!(plan3.players[1].grid.s, 600);
    }

    #[test]
    fn projection_examples() {
        let lattice = PayoffLattice { tau: ratio(1, 3), lo_index: 0, hi_index: 3 };
        let p = project(&ratio(3, 10), &lattice);
        assert_eq!((p.index, p.clamped), (1, false));
        // Exactly on the lattice.
        let p = project(&ratio(2, 3), &lattice);
        assert_eq!((p.index, p.clamped), (2, false));
        // Exact tie breaks to the larger value.
        let lattice = PayoffLattice { tau: ratio(1, 2), lo_index: 0, hi_index: 2 };
        let p = project(&ratio(1, 4), &lattice);
        assert_eq!((p.index, p.clamped), (1, false));
        // Clamping.
        let p = project(&int(9), &lattice);
        assert!(p.clamped && p.index == 2);
    }

    #[test]
    fn projection_error_bound_randomized() {
        // 10^5 random rationals in range: |value(project(v)) - v| <= tau/2.
        let lattice = PayoffLattice { tau: ratio(1, 7), lo_index: -20, hi_index: 40 };
        let half_tau = &lattice.tau / int(2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100_000 {
            let v = ratio(rng.gen_range(-2000i64..=4000), rng.gen_range(1i64..=700));
            let v = v.min(lattice.value(lattice.hi_index)).max(lattice.value(lattice.lo_index));
            let p = project(&v, &lattice);
            assert!(!p.clamped);
            let err = (lattice.value(p.index) - &v).abs();
            assert!(err <= half_tau, "v={v} err={err}");
        }
    }

    #[test]
    fn lattice_addition_is_exact() {
        let lattice = PayoffLattice { tau: ratio(3, 17), lo_index: -5, hi_index: 9 };
        for k1 in -5i64..=9 {
            for k2 in -5i64..=9 {
                assert_eq!(
                    lattice.value(k1) + lattice.value(k2),
                    lattice.value(k1 + k2)
                );
            }
        }
    }

    #[test]
    fn enumerate_matches_examples() {
        assert_eq!(
            enumerate_grid_strategies(2, 2),
            vec![vec![0, 2], vec![1, 1], vec![2, 0]]
        );
        assert_eq!(enumerate_grid_strategies(3, 2).len(), 6);
        assert_eq!(enumerate_grid_strategies(1, 5), vec![vec![5]]);
    }

    #[test]
    fn enumerate_count_matches_stars_and_bars() {
        // Oracle: binomial via Pascal's triangle.
        fn binom(n: u64, k: u64) -> u128 {
            let mut row = vec![1u128];
            for _ in 0..n {
                let mut next = vec![1u128];
                for w in row.windows(2) {
                    next.push(w[0] + w[1]);
                }
                next.push(1);
                row = next;
            }
            row[k as usize]
        }
        for m in 1..=4usize {
            for s in 1..=20u64 {
                let count = enumerate_grid_strategies(m, s).len() as u128;
                assert_eq!(count, binom(s + m as u64 - 1, m as u64 - 1));
                assert_eq!(Some(count), count_grid_strategies(m, s));
            }
        }
    }

    #[test]
    fn every_enumerated_strategy_is_normalized() {
        for strat in enumerate_grid_strategies(4, 9) {
            assert_eq!(strat.iter().sum::<u64>(), 9);
        }
    }

    #[test]
    fn nearest_grid_examples() {
        // s = 3, p = (1/2, 1/2): ties toward the lexicographically larger.
        let p = [ratio(1, 2), ratio(1, 2)];
        assert_eq!(nearest_grid_strategy(&p, 3), vec![2, 1]);
        // Already on the grid: fixed point.
        let p = [ratio(1, 4), ratio(3, 4)];
        assert_eq!(nearest_grid_strategy(&p, 4), vec![1, 3]);
        // Even s keeps the uniform point.
        let p = [ratio(1, 2), ratio(1, 2)];
        assert_eq!(nearest_grid_strategy(&p, 4), vec![2, 2]);
    }

    proptest! {
        #[test]
        fn nearest_grid_is_optimal(nums in proptest::collection::vec(0u32..50, 2..4), s in 1u64..12) {
            let total: u32 = nums.iter().sum();
            prop_assume!(total > 0);
            let p: Vec<BigRational> =
                nums.iter().map(|&x| ratio(x as i64, total as i64)).collect();
            let chosen = nearest_grid_strategy(&p, s);
            let err = |q: &[u64]| -> BigRational {
                q.iter()
                    .zip(&p)
                    .map(|(&n, t)| (ratio(n as i64, s as i64) - t).abs())
                    .max()
                    .unwrap()
            };
            let chosen_err = err(&chosen);
            for alt in enumerate_grid_strategies(p.len(), s) {
                prop_assert!(chosen_err <= err(&alt));
            }
        }

        #[test]
        fn plan_sizes_monotone(d in 1usize..5, num in 1i64..20) {
            let (game, stats) = star_mp(d);
            let eps = ratio(num, 20);
            let eps2 = &eps / int(2);
            let plan = plan_simple(&game, &stats, &eps).unwrap();
            // Nonincreasing in epsilon.
            let plan_finer = plan_simple(&game, &stats, &eps2).unwrap();
            for i in 0..=d {
                prop_assert!(plan_finer.players[i].grid.s >= plan.players[i].grid.s);
                prop_assert!(plan_finer.players[i].s_prime >= plan.players[i].s_prime);
            }
            // Nondecreasing in the clique count.
            let (game_big, stats_big) = star_mp(d + 1);
            let plan_big = plan_simple(&game_big, &stats_big, &eps).unwrap();
            prop_assert!(plan_big.players[1].grid.s >= plan.players[1].grid.s);
            // Nondecreasing in the payoff ranges (scale all entries by 3).
            let mut wide = game.clone();
            for c in &mut wide.cliques {
                for v in &mut c.payoffs {
                    *v = &*v * int(3);
                }
            }
            let wide_stats = validate_game(&wide).unwrap();
            let plan_wide = plan_simple(&wide, &wide_stats, &eps).unwrap();
            for i in 0..=d {
                prop_assert!(plan_wide.players[i].grid.s >= plan.players[i].grid.s);
                prop_assert!(plan_wide.players[i].s_prime >= plan.players[i].s_prime);
            }
            // Nondecreasing in the action count: grow the center's actions
            // by padding each edge matrix with a duplicated row.
            let mut tall = game.clone();
            tall.actions[0] = 3;
            for c in &mut tall.cliques {
                if c.owner == 0 {
                    let row: Vec<BigRational> = c.payoffs[2..4].to_vec();
                    c.payoffs.extend(row);
                } else {
                    let col: Vec<BigRational> = vec![c.payoffs[1].clone(), c.payoffs[3].clone()];
                    c.payoffs = vec![
                        c.payoffs[0].clone(), c.payoffs[1].clone(), col[0].clone(),
                        c.payoffs[2].clone(), c.payoffs[3].clone(), col[1].clone(),
                    ];
                }
            }
            let tall_stats = validate_game(&tall).unwrap();
            let plan_tall = plan_simple(&tall, &tall_stats, &eps).unwrap();
            prop_assert!(plan_tall.players[0].grid.s >= plan.players[0].grid.s);
        }
    }
}
