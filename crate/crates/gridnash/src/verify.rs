//! Exact verification layer: best-response regret, the epsilon-equilibrium
//! predicate, and brute-force grid enumeration for tiny games.
//!
//! Everything here works on exact rationals straight from the game
//! definition; no discretized payoff ever enters. The solvers call into this
//! module to certify their outputs, and the test suites use it as the
//! independent oracle.

use crate::discretize::{count_grid_strategies, enumerate_grid_strategies, DiscretizationPlan, GridMixedStrategy};
use crate::model::{
    exact_expected_clique_payoff, GameDefinition, ModelError, PlayerId, StructureStats,
};
use num::rational::BigRational;
use num::Zero;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("joint grid has about {0} profiles, over the enumeration cap")]
    TooLarge(u128),
}

/// Per-player exact best-response regret against a mixed profile, plus the
/// epsilon verdicts.
#[derive(Debug, Clone)]
pub struct RegretReport {
    pub regrets: Vec<BigRational>,
    pub epsilon: BigRational,
    pub verdicts: Vec<bool>,
    pub overall: bool,
}

impl RegretReport {
    pub fn max_regret(&self) -> &BigRational {
        self.regrets
            .iter()
            .max()
            .expect("report covers at least one player")
    }
}

/// Expected payoff of every pure action of player `i` against the others'
/// mixed strategies, as exact rationals.
pub fn deviation_payoffs(
    game: &GameDefinition,
    stats: &StructureStats,
    i: PlayerId,
    profile: &[Vec<BigRational>],
) -> Result<Vec<BigRational>, ModelError> {
    let m = game.actions[i];
    let mut payoffs = vec![BigRational::zero(); m];
    for &c in &stats.cliques_of[i] {
        let clique = &game.cliques[c];
        let mixed: Vec<(PlayerId, &[BigRational])> = clique
            .members
            .iter()
            .filter(|&&p| p != i)
            .map(|&p| (p, profile[p].as_slice()))
            .collect();
        for (a, slot) in payoffs.iter_mut().enumerate() {
            *slot += exact_expected_clique_payoff(game, clique, &[(i, a)], &mixed)?;
        }
    }
    Ok(payoffs)
}

/// Exact regret of every player: best pure-deviation payoff minus expected
/// payoff at the profile. Verdicts use the weak inequality `regret <= eps`.
pub fn exact_regret(
    game: &GameDefinition,
    stats: &StructureStats,
    profile: &[Vec<BigRational>],
    epsilon: &BigRational,
) -> Result<RegretReport, VerifyError> {
    let n = game.num_players();
    if profile.len() != n {
        return Err(ModelError::DimensionMismatch(format!(
            "profile covers {} players, game has {n}",
            profile.len()
        ))
        .into());
    }
    for (i, p) in profile.iter().enumerate() {
        if p.len() != game.actions[i] {
            return Err(ModelError::DimensionMismatch(format!(
                "strategy for player {i} has {} entries, expected {}",
                p.len(),
                game.actions[i]
            ))
            .into());
        }
    }
    let mut regrets = Vec::with_capacity(n);
    for i in 0..n {
        let payoffs = deviation_payoffs(game, stats, i, profile)?;
        let expected: BigRational = payoffs
            .iter()
            .zip(&profile[i])
            .map(|(v, p)| v * p)
            .sum();
        let best = payoffs.into_iter().max().expect("player has actions");
        regrets.push(best - expected);
    }
    let verdicts: Vec<bool> = regrets.iter().map(|r| r <= epsilon).collect();
    let overall = verdicts.iter().all(|&v| v);
    Ok(RegretReport {
        regrets,
        epsilon: epsilon.clone(),
        verdicts,
        overall,
    })
}

/// True iff the profile is an epsilon-equilibrium (all regrets pass weakly).
pub fn is_eps_msne(
    game: &GameDefinition,
    stats: &StructureStats,
    profile: &[Vec<BigRational>],
    epsilon: &BigRational,
) -> Result<bool, VerifyError> {
    Ok(exact_regret(game, stats, profile, epsilon)?.overall)
}

/// Exhaustively test every joint grid profile of the plan and return all that
/// pass the exact regret check. Authoritative for the on-grid equilibrium
/// set; errors out (never truncates) when the joint grid exceeds `cap`.
pub fn brute_force_grid_equilibria(
    game: &GameDefinition,
    stats: &StructureStats,
    plan: &DiscretizationPlan,
    epsilon: &BigRational,
    cap: u128,
) -> Result<Vec<Vec<GridMixedStrategy>>, VerifyError> {
    let n = game.num_players();
    let mut total: u128 = 1;
    for i in 0..n {
        let c = count_grid_strategies(game.actions[i], plan.players[i].grid.s)
            .ok_or(VerifyError::TooLarge(u128::MAX))?;
        total = total.checked_mul(c).ok_or(VerifyError::TooLarge(u128::MAX))?;
    }
    if total > cap {
        return Err(VerifyError::TooLarge(total));
    }

    let per_player: Vec<Vec<Vec<u64>>> = (0..n)
        .map(|i| enumerate_grid_strategies(game.actions[i], plan.players[i].grid.s))
        .collect();
    let rationals: Vec<Vec<Vec<BigRational>>> = (0..n)
        .map(|i| {
            per_player[i]
                .iter()
                .map(|nums| {
                    GridMixedStrategy::new(i, plan.players[i].grid.s, nums.clone()).to_rationals()
                })
                .collect()
        })
        .collect();

    let mut found = Vec::new();
    let mut choice = vec![0usize; n];
    'outer: loop {
        let profile: Vec<Vec<BigRational>> = (0..n)
            .map(|i| rationals[i][choice[i]].clone())
            .collect();
        if exact_regret(game, stats, &profile, epsilon)?.overall {
            found.push(
                (0..n)
                    .map(|i| {
                        GridMixedStrategy::new(
                            i,
                            plan.players[i].grid.s,
                            per_player[i][choice[i]].clone(),
                        )
                    })
                    .collect(),
            );
        }
        for i in (0..n).rev() {
            choice[i] += 1;
            if choice[i] < per_player[i].len() {
                continue 'outer;
            }
            choice[i] = 0;
        }
        break;
    }
    Ok(found)
}
