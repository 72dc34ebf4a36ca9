//! The game-induced constraint satisfaction problem, in its simple
//! (partial-sum) and refined (scale-normalized partial sum plus partial
//! conditional expectation) forms, together with the constructive rounding of
//! an equilibrium onto the grid and a backtracking solver for tiny instances.
//!
//! Variables are integers: probability numerators over `s_i` for the `p`
//! variables, lattice indices for the `S` and `E` variables. The chain
//! constraints are functional (each `S`/`E` value is determined by earlier
//! variables), which the backtracking solver exploits by only branching on
//! the probability variables.

use crate::discretize::{
    nearest_grid_strategy, project_unbounded, DiscretizationPlan, GridMixedStrategy, Variant,
};
use crate::model::{
    clique_stats, GameClass, GameDefinition, ModelError, PlayerId, RootedTree, StructureStats,
};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CspError {
    #[error("plan does not match the requested construction: {0}")]
    PlanMismatch(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A CSP variable: probability numerator or payoff-lattice index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarKind {
    Prob {
        player: PlayerId,
        action: usize,
    },
    /// Partial sum over the player's first `l` ordered cliques, per action.
    PartialSum {
        player: PlayerId,
        l: usize,
        action: usize,
    },
    /// Refined only: partial conditional expectation of one clique after
    /// integrating out the first `t` non-owner members; `residual` holds the
    /// remaining members' actions in member order (owner first).
    PartialExp {
        player: PlayerId,
        clique: usize,
        t: usize,
        residual: Vec<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Grid { s: u64 },
    Lattice { lo: i64, hi: i64 },
}

#[derive(Debug, Clone)]
pub struct CspVariable {
    pub kind: VarKind,
    pub domain: Domain,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintKind {
    Normalization { player: PlayerId },
    BestResponse { player: PlayerId, action: usize },
    PartialSum { player: PlayerId, l: usize, action: usize },
    PartialExp { player: PlayerId, clique: usize, t: usize, residual: Vec<usize> },
}

#[derive(Debug, Clone)]
pub struct CspConstraint {
    pub kind: ConstraintKind,
    pub scope: Vec<usize>,
}

/// Clique order for one player: positions into `stats.cliques_of[player]`.
///
/// With a rooted tree at hand (polymatrix case) the order is the tree's
/// children order with the parent edge last, so the chain constraints line up
/// with the tree DP's messages. Otherwise the input order is kept; it only
/// needs to be fixed and consistent.
pub fn order_cliques(
    game: &GameDefinition,
    stats: &StructureStats,
    tree: Option<&RootedTree>,
    i: PlayerId,
) -> Vec<usize> {
    let locals = &stats.cliques_of[i];
    let tree = match tree {
        Some(t) if stats.class == GameClass::Polymatrix => t,
        _ => return (0..locals.len()).collect(),
    };
    let local_of_partner = |j: PlayerId| -> Option<usize> {
        locals
            .iter()
            .position(|&c| game.cliques[c].members.get(1) == Some(&j))
    };
    let mut order = Vec::with_capacity(locals.len());
    for &child in &tree.children[i] {
        if let Some(pos) = local_of_partner(child) {
            order.push(pos);
        }
    }
    let parent_pos = tree.parent[i].and_then(local_of_partner);
    for pos in 0..locals.len() {
        if Some(pos) != parent_pos && !order.contains(&pos) {
            order.push(pos);
        }
    }
    if let Some(pos) = parent_pos {
        order.push(pos);
    }
    order
}

/// Per-player clique orders for a whole game.
pub fn default_orders(
    game: &GameDefinition,
    stats: &StructureStats,
    tree: Option<&RootedTree>,
) -> Vec<Vec<usize>> {
    (0..game.num_players())
        .map(|i| order_cliques(game, stats, tree, i))
        .collect()
}

/// Values for every variable, aligned with `CspInstance::vars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CspAssignment {
    pub values: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckOutcome {
    Satisfied,
    Violated(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Satisfiable(CspAssignment),
    Infeasible,
    LimitExceeded,
}

/// Lookup from (clique position, elimination step, residual actions) to the
/// partial-expectation variable index.
type ExpIndex = HashMap<(usize, usize, Vec<usize>), usize>;

/// The materialized CSP: variables, constraints, and the game/plan data the
/// constraint predicates evaluate against.
#[derive(Debug, Clone)]
pub struct CspInstance {
    pub game: GameDefinition,
    pub stats: StructureStats,
    pub plan: DiscretizationPlan,
    pub orders: Vec<Vec<usize>>,
    pub vars: Vec<CspVariable>,
    pub constraints: Vec<CspConstraint>,
    prob_idx: Vec<Vec<usize>>,
    sum_idx: Vec<Vec<Vec<usize>>>,
    exp_idx: Vec<ExpIndex>,
}

/// Build the CSP induced by the game under the plan's variant.
#[allow(clippy::needless_range_loop)] // player ids index several parallel tables
pub fn build_csp(
    game: &GameDefinition,
    stats: &StructureStats,
    plan: &DiscretizationPlan,
    orders: &[Vec<usize>],
) -> Result<CspInstance, CspError> {
    let n = game.num_players();
    if plan.players.len() != n {
        return Err(CspError::PlanMismatch(format!(
            "plan covers {} players, game has {n}",
            plan.players.len()
        )));
    }
    if orders.len() != n {
        return Err(CspError::PlanMismatch(
            "one clique order per player required".into(),
        ));
    }
    for i in 0..n {
        let mut sorted = orders[i].clone();
        sorted.sort_unstable();
        if sorted != (0..stats.kappa_i[i]).collect::<Vec<_>>() {
            return Err(CspError::PlanMismatch(format!(
                "order for player {i} is not a permutation of its cliques"
            )));
        }
    }

    let mut vars = Vec::new();
    let mut prob_idx = vec![Vec::new(); n];
    for i in 0..n {
        for a in 0..game.actions[i] {
            prob_idx[i].push(vars.len());
            vars.push(CspVariable {
                kind: VarKind::Prob { player: i, action: a },
                domain: Domain::Grid { s: plan.players[i].grid.s },
                name: format!("p[{i}][{a}]"),
            });
        }
    }

    let mut sum_idx = vec![Vec::new(); n];
    let mut exp_idx: Vec<ExpIndex> = vec![HashMap::new(); n];
    for i in 0..n {
        let pp = &plan.players[i];
        if pp.indifferent {
            continue;
        }
        let lattice = &pp.lattice;
        // Chain sums can drift past the covered interval by half a step per
        // projected term; widen the declared domain accordingly.
        let slop = stats.kappa_i[i] as i64;
        let (lo, hi) = match plan.variant {
            Variant::Simple => (lattice.lo_index - slop, lattice.hi_index + slop),
            Variant::Refined => (lattice.lo_index, lattice.hi_index),
        };
        if plan.variant == Variant::Refined {
            for (pos, &local) in orders[i].iter().enumerate() {
                let c = stats.cliques_of[i][local];
                let clique = &game.cliques[c];
                let arity = clique.members.len();
                for t in 1..arity {
                    let residual_members: Vec<PlayerId> = std::iter::once(i)
                        .chain(clique.members[t + 1..].iter().copied())
                        .collect();
                    for residual in joint_actions(game, &residual_members) {
                        let key = (pos, t, residual.clone());
                        exp_idx[i].insert(key, vars.len());
                        vars.push(CspVariable {
                            kind: VarKind::PartialExp {
                                player: i,
                                clique: c,
                                t,
                                residual: residual.clone(),
                            },
                            domain: Domain::Lattice { lo, hi },
                            name: format!("E[{i}][{c}][{t}]{residual:?}"),
                        });
                    }
                }
            }
        }
        for l in 1..=stats.kappa_i[i] {
            let mut row = Vec::new();
            for a in 0..game.actions[i] {
                row.push(vars.len());
                vars.push(CspVariable {
                    kind: VarKind::PartialSum { player: i, l, action: a },
                    domain: Domain::Lattice { lo, hi },
                    name: format!("S[{i}][{l}][{a}]"),
                });
            }
            sum_idx[i].push(row);
        }
    }

    let mut constraints = Vec::new();
    for i in 0..n {
        constraints.push(CspConstraint {
            kind: ConstraintKind::Normalization { player: i },
            scope: prob_idx[i].clone(),
        });
        let pp = &plan.players[i];
        if pp.indifferent {
            // Trivially satisfied best response; kept so every player has one.
            constraints.push(CspConstraint {
                kind: ConstraintKind::BestResponse { player: i, action: 0 },
                scope: prob_idx[i].clone(),
            });
            continue;
        }
        if plan.variant == Variant::Refined {
            for (pos, &local) in orders[i].iter().enumerate() {
                let c = stats.cliques_of[i][local];
                let clique = &game.cliques[c];
                let arity = clique.members.len();
                for t in 1..arity {
                    let residual_members: Vec<PlayerId> = std::iter::once(i)
                        .chain(clique.members[t + 1..].iter().copied())
                        .collect();
                    let eliminated = clique.members[t];
                    for residual in joint_actions(game, &residual_members) {
                        let var = exp_idx[i][&(pos, t, residual.clone())];
                        let mut scope = vec![var];
                        scope.extend(prob_idx[eliminated].iter().copied());
                        if t > 1 {
                            for a_elim in 0..game.actions[eliminated] {
                                let mut prev = residual.clone();
                                prev.insert(1, a_elim);
                                scope.push(exp_idx[i][&(pos, t - 1, prev)]);
                            }
                        }
                        constraints.push(CspConstraint {
                            kind: ConstraintKind::PartialExp { player: i, clique: c, t, residual },
                            scope,
                        });
                    }
                }
            }
        }
        for l in 1..=stats.kappa_i[i] {
            let local = orders[i][l - 1];
            let c = stats.cliques_of[i][local];
            let clique = &game.cliques[c];
            for a in 0..game.actions[i] {
                let mut scope = vec![sum_idx[i][l - 1][a]];
                if l >= 2 {
                    scope.push(sum_idx[i][l - 2][a]);
                }
                match plan.variant {
                    Variant::Simple => {
                        for &member in &clique.members[1..] {
                            scope.extend(prob_idx[member].iter().copied());
                        }
                    }
                    Variant::Refined => {
                        if clique.members.len() >= 2 {
                            scope.push(exp_idx[i][&(l - 1, clique.members.len() - 1, vec![a])]);
                        }
                    }
                }
                constraints.push(CspConstraint {
                    kind: ConstraintKind::PartialSum { player: i, l, action: a },
                    scope,
                });
            }
        }
        for a in 0..game.actions[i] {
            let mut scope = prob_idx[i].clone();
            scope.extend(sum_idx[i][stats.kappa_i[i] - 1].iter().copied());
            constraints.push(CspConstraint {
                kind: ConstraintKind::BestResponse { player: i, action: a },
                scope,
            });
        }
    }

    Ok(CspInstance {
        game: game.clone(),
        stats: stats.clone(),
        plan: plan.clone(),
        orders: orders.to_vec(),
        vars,
        constraints,
        prob_idx,
        sum_idx,
        exp_idx,
    })
}

/// All joint actions of `members`, ascending lexicographically.
fn joint_actions(game: &GameDefinition, members: &[PlayerId]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &m in members {
        let mut next = Vec::with_capacity(out.len() * game.actions[m]);
        for prefix in &out {
            for a in 0..game.actions[m] {
                let mut row = prefix.clone();
                row.push(a);
                next.push(row);
            }
        }
        out = next;
    }
    out
}

/// Evaluates constraints against (partial) assignments, memoizing the
/// projected expected-payoff lookups.
type ProjCache<K> = RefCell<HashMap<K, i64>>;

struct Evaluator<'a> {
    csp: &'a CspInstance,
    mtilde: ProjCache<(usize, usize, Vec<u64>)>,
    einit: ProjCache<(usize, Vec<usize>, Vec<u64>)>,
}

impl<'a> Evaluator<'a> {
    fn new(csp: &'a CspInstance) -> Self {
        Evaluator {
            csp,
            mtilde: RefCell::new(HashMap::new()),
            einit: RefCell::new(HashMap::new()),
        }
    }

    fn grid_numerators(&self, values: &[Option<i64>], player: PlayerId) -> Option<Vec<u64>> {
        self.csp.prob_idx[player]
            .iter()
            .map(|&v| values[v].map(|x| x as u64))
            .collect()
    }

    /// Projected expected clique payoff for player `i` fixing its action,
    /// with all other members at their assigned grid strategies.
    fn m_tilde(
        &self,
        i: PlayerId,
        clique_idx: usize,
        a: usize,
        values: &[Option<i64>],
    ) -> Option<i64> {
        let clique = &self.csp.game.cliques[clique_idx];
        let mut key_nums = Vec::new();
        for &m in &clique.members[1..] {
            key_nums.extend(self.grid_numerators(values, m)?);
        }
        let key = (clique_idx, a, key_nums);
        if let Some(&v) = self.mtilde.borrow().get(&key) {
            return Some(v);
        }
        // Mechanical expectation over the assigned grid strategies;
        // normalization is the normalization constraint's business, not ours.
        let v = self.grid_expectation(clique, &[(i, a)], 1, values);
        let idx = project_unbounded(&v, &self.csp.plan.players[i].lattice.tau);
        self.mtilde.borrow_mut().insert(key, idx);
        Some(idx)
    }

    /// Expectation of a clique entry with `fixed` pinning some members and
    /// every member from position `from` onward mixing at its assigned grid
    /// strategy (weights `num/s`, no normalization check).
    fn grid_expectation(
        &self,
        clique: &crate::model::LocalClique,
        fixed: &[(PlayerId, usize)],
        from: usize,
        values: &[Option<i64>],
    ) -> BigRational {
        let free: Vec<PlayerId> = clique.members[from..]
            .iter()
            .copied()
            .filter(|m| fixed.iter().all(|(f, _)| f != m))
            .collect();
        let dims = self.csp.game.clique_dims(clique);
        let mut total = BigRational::zero();
        let mut actions: Vec<usize> = vec![0; free.len()];
        loop {
            let mut weight = BigRational::one();
            for (m, a) in free.iter().zip(&actions) {
                let num = values[self.csp.prob_idx[*m][*a]].expect("input assigned");
                let s = self.csp.plan.players[*m].grid.s;
                weight *= BigRational::new(BigInt::from(num), BigInt::from(s));
            }
            if !weight.is_zero() {
                let member_actions: Vec<usize> = clique
                    .members
                    .iter()
                    .map(|m| {
                        fixed
                            .iter()
                            .find(|(f, _)| f == m)
                            .map(|(_, a)| *a)
                            .unwrap_or_else(|| {
                                actions[free.iter().position(|x| x == m).unwrap()]
                            })
                    })
                    .collect();
                let idx = crate::model::LocalClique::flat_index(&dims, &member_actions);
                total += weight * &clique.payoffs[idx];
            }
            // Odometer over the free members' actions.
            let mut pos = free.len();
            loop {
                if pos == 0 {
                    return total;
                }
                pos -= 1;
                actions[pos] += 1;
                if actions[pos] < self.csp.game.actions[free[pos]] {
                    break;
                }
                actions[pos] = 0;
            }
        }
    }

    /// Refined initial expectation: integrate the first non-owner member out
    /// of the scale-normalized clique table. Zero-range cliques contribute 0.
    fn e_init(
        &self,
        i: PlayerId,
        clique_idx: usize,
        residual: &[usize],
        values: &[Option<i64>],
    ) -> Option<i64> {
        let clique = &self.csp.game.cliques[clique_idx];
        let eliminated = clique.members[1];
        let nums = self.grid_numerators(values, eliminated)?;
        let key = (clique_idx, residual.to_vec(), nums.clone());
        if let Some(&v) = self.einit.borrow().get(&key) {
            return Some(v);
        }
        let cs = clique_stats(clique);
        let value = if cs.range.is_zero() {
            BigRational::zero()
        } else {
            let residual_members: Vec<PlayerId> = std::iter::once(i)
                .chain(clique.members[2..].iter().copied())
                .collect();
            let fixed: Vec<(PlayerId, usize)> = residual_members
                .iter()
                .copied()
                .zip(residual.iter().copied())
                .collect();
            let raw = self.grid_expectation(clique, &fixed, 1, values);
            (raw - &cs.l) / &cs.range
        };
        let idx = project_unbounded(&value, &self.csp.plan.players[i].lattice.tau);
        self.einit.borrow_mut().insert(key, idx);
        Some(idx)
    }

    /// Value a functional (chain) variable is forced to, once its inputs are
    /// assigned.
    fn forced_value(&self, var: usize, values: &[Option<i64>]) -> Option<i64> {
        match &self.csp.vars[var].kind {
            VarKind::PartialSum { player, l, action } => {
                self.partial_sum_value(*player, *l, *action, values)
            }
            VarKind::PartialExp { player, clique, t, residual } => {
                self.partial_exp_value(*player, *clique, *t, residual, values)
            }
            VarKind::Prob { .. } => None,
        }
    }

    fn partial_exp_value(
        &self,
        i: PlayerId,
        clique_idx: usize,
        t: usize,
        residual: &[usize],
        values: &[Option<i64>],
    ) -> Option<i64> {
        if t == 1 {
            return self.e_init(i, clique_idx, residual, values);
        }
        let clique = &self.csp.game.cliques[clique_idx];
        let eliminated = clique.members[t];
        let nums = self.grid_numerators(values, eliminated)?;
        let pos = self.position_of(i, clique_idx);
        let mut acc = BigRational::zero();
        let s = BigInt::from(self.csp.plan.players[eliminated].grid.s);
        for (a_elim, &num) in nums.iter().enumerate() {
            if num == 0 {
                continue;
            }
            let mut prev = residual.to_vec();
            prev.insert(1, a_elim);
            let prev_var = self.csp.exp_idx[i][&(pos, t - 1, prev)];
            let prev_val = values[prev_var]?;
            acc += BigRational::new(BigInt::from(num), s.clone())
                * BigRational::from_integer(BigInt::from(prev_val));
        }
        // `acc` mixes lattice indices; round the mix back onto the lattice.
        crate::ratio::round_half_up(&acc).try_into().ok()
    }

    fn position_of(&self, i: PlayerId, clique_idx: usize) -> usize {
        let local = self.csp.stats.cliques_of[i]
            .iter()
            .position(|&c| c == clique_idx)
            .expect("clique belongs to player");
        self.csp.orders[i]
            .iter()
            .position(|&x| x == local)
            .expect("order covers clique")
    }

    fn partial_sum_value(
        &self,
        i: PlayerId,
        l: usize,
        action: usize,
        values: &[Option<i64>],
    ) -> Option<i64> {
        let local = self.csp.orders[i][l - 1];
        let clique_idx = self.csp.stats.cliques_of[i][local];
        let clique = &self.csp.game.cliques[clique_idx];
        match self.csp.plan.variant {
            Variant::Simple => {
                let m = self.m_tilde(i, clique_idx, action, values)?;
                if l == 1 {
                    Some(m)
                } else {
                    let prev = values[self.csp.sum_idx[i][l - 2][action]]?;
                    Some(m + prev)
                }
            }
            Variant::Refined => {
                let e_final = if clique.members.len() >= 2 {
                    values[self.csp.exp_idx[i][&(l - 1, clique.members.len() - 1, vec![action])]]?
                } else {
                    // Self-clique: project the scale-normalized entry.
                    let cs = clique_stats(clique);
                    if cs.range.is_zero() {
                        0
                    } else {
                        let raw = self.csp.game.clique_entry(clique, &[action]);
                        let v = (raw - &cs.l) / &cs.range;
                        project_unbounded(&v, &self.csp.plan.players[i].lattice.tau)
                    }
                };
                if l == 1 {
                    return Some(e_final);
                }
                let prev = values[self.csp.sum_idx[i][l - 2][action]]?;
                // Range-weighted mixing of the new expectation into the
                // running scale-normalized sum.
                let mut prefix = BigRational::zero();
                for r in 0..l - 1 {
                    let lc = self.csp.orders[i][r];
                    prefix +=
                        clique_stats(&self.csp.game.cliques[self.csp.stats.cliques_of[i][lc]])
                            .range;
                }
                let current = clique_stats(clique).range;
                let denom = &prefix + &current;
                if denom.is_zero() {
                    return Some(prev);
                }
                let mix = (&current * BigRational::from_integer(BigInt::from(e_final))
                    + &prefix * BigRational::from_integer(BigInt::from(prev)))
                    / denom;
                crate::ratio::round_half_up(&mix).try_into().ok()
            }
        }
    }

    /// Evaluate one constraint; `None` when its scope is incomplete.
    fn eval(&self, c: &CspConstraint, values: &[Option<i64>]) -> Option<bool> {
        match &c.kind {
            ConstraintKind::Normalization { player } => {
                let nums = self.grid_numerators(values, *player)?;
                Some(nums.iter().sum::<u64>() == self.csp.plan.players[*player].grid.s)
            }
            ConstraintKind::PartialSum { player, l, action } => {
                let expected = self.partial_sum_value(*player, *l, *action, values)?;
                let actual = values[self.csp.sum_idx[*player][*l - 1][*action]]?;
                Some(actual == expected)
            }
            ConstraintKind::PartialExp { player, clique, t, residual } => {
                let pos = self.position_of(*player, *clique);
                let var = self.csp.exp_idx[*player][&(pos, *t, residual.clone())];
                let expected = self.partial_exp_value(*player, *clique, *t, residual, values)?;
                Some(values[var]? == expected)
            }
            ConstraintKind::BestResponse { player, action } => {
                let i = *player;
                let pp = &self.csp.plan.players[i];
                if pp.indifferent {
                    return Some(true);
                }
                let nums = self.grid_numerators(values, i)?;
                let kappa = self.csp.stats.kappa_i[i];
                let last = &self.csp.sum_idx[i][kappa - 1];
                let s = BigInt::from(pp.grid.s);
                let mut lhs_num = BigInt::zero();
                for (a, &num) in nums.iter().enumerate() {
                    let sv = values[last[a]]?;
                    lhs_num += BigInt::from(num) * BigInt::from(sv);
                }
                // Compare sum_a p(a) S(a) >= S(action) - slack in lattice
                // index units.
                let lhs = BigRational::new(lhs_num, s.clone());
                let rhs_index = BigRational::from_integer(BigInt::from(values[last[*action]]?));
                let slack_idx = &pp.br_slack / &pp.lattice.tau;
                Some(lhs >= rhs_index - slack_idx)
            }
        }
    }
}

impl CspInstance {
    pub fn variant(&self) -> Variant {
        self.plan.variant
    }

    pub fn prob_var(&self, player: PlayerId, action: usize) -> usize {
        self.prob_idx[player][action]
    }

    pub fn sum_var(&self, player: PlayerId, l: usize, action: usize) -> usize {
        self.sum_idx[player][l - 1][action]
    }

    /// Extract the grid strategies from an assignment.
    pub fn p_part(&self, assignment: &CspAssignment) -> Vec<GridMixedStrategy> {
        (0..self.game.num_players())
            .map(|i| {
                let numerators: Vec<u64> = self.prob_idx[i]
                    .iter()
                    .map(|&v| assignment.values[v] as u64)
                    .collect();
                GridMixedStrategy { player: i, s: self.plan.players[i].grid.s, numerators }
            })
            .collect()
    }

    /// Evaluate every constraint with exact arithmetic.
    pub fn check_assignment(&self, assignment: &CspAssignment) -> CheckOutcome {
        let values: Vec<Option<i64>> = assignment.values.iter().map(|&v| Some(v)).collect();
        let eval = Evaluator::new(self);
        for (idx, c) in self.constraints.iter().enumerate() {
            match eval.eval(c, &values) {
                Some(true) => {}
                _ => return CheckOutcome::Violated(idx),
            }
        }
        CheckOutcome::Satisfied
    }

    /// Depth-first search in declared variable order with forward checking:
    /// chain variables are forced from their functional constraints, each
    /// constraint is checked as soon as its scope completes, and probability
    /// numerators prune on the running sum. Exhaustive within the node limit,
    /// so `Infeasible` is authoritative.
    pub fn solve_backtracking(&self, node_limit: u64) -> SolveOutcome {
        let mut first = None;
        let outcome = self.search(node_limit, &mut |asg| {
            first = Some(asg);
            true
        });
        match outcome {
            SearchEnd::Limit => SolveOutcome::LimitExceeded,
            _ => match first {
                Some(values) => SolveOutcome::Satisfiable(CspAssignment { values }),
                None => SolveOutcome::Infeasible,
            },
        }
    }

    /// All distinct probability parts of CSP solutions (exhaustive search;
    /// intended for tiny instances).
    pub fn enumerate_p_parts(&self, node_limit: u64) -> Option<BTreeSet<Vec<Vec<u64>>>> {
        let mut found = BTreeSet::new();
        let outcome = self.search(node_limit, &mut |values| {
            let asg = CspAssignment { values };
            found.insert(
                self.p_part(&asg)
                    .into_iter()
                    .map(|s| s.numerators)
                    .collect::<Vec<_>>(),
            );
            false
        });
        match outcome {
            SearchEnd::Limit => None,
            _ => Some(found),
        }
    }

    fn search(&self, node_limit: u64, on_solution: &mut dyn FnMut(Vec<i64>) -> bool) -> SearchEnd {
        let eval = Evaluator::new(self);
        let mut ready_at: Vec<Vec<usize>> = vec![Vec::new(); self.vars.len()];
        for (ci, c) in self.constraints.iter().enumerate() {
            if let Some(&last) = c.scope.iter().max() {
                ready_at[last].push(ci);
            }
        }
        let mut values: Vec<Option<i64>> = vec![None; self.vars.len()];
        let mut nodes = 0u64;
        self.dfs(0, &eval, &ready_at, &mut values, &mut nodes, node_limit, on_solution)
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        pos: usize,
        eval: &Evaluator,
        ready_at: &[Vec<usize>],
        values: &mut Vec<Option<i64>>,
        nodes: &mut u64,
        node_limit: u64,
        on_solution: &mut dyn FnMut(Vec<i64>) -> bool,
    ) -> SearchEnd {
        if pos == self.vars.len() {
            let stop = on_solution(values.iter().map(|v| v.unwrap()).collect());
            return if stop { SearchEnd::Stop } else { SearchEnd::Exhausted };
        }
        let candidates: Vec<i64> = match &self.vars[pos].kind {
            VarKind::Prob { player, action } => {
                let s = self.plan.players[*player].grid.s as i64;
                let assigned: i64 = self.prob_idx[*player]
                    .iter()
                    .filter_map(|&v| values[v])
                    .sum();
                let remaining = s - assigned;
                if remaining < 0 {
                    return SearchEnd::Exhausted;
                }
                let has_norm = self.constraints.iter().any(
                    |c| matches!(c.kind, ConstraintKind::Normalization { player: p } if p == *player),
                );
                if has_norm {
                    if *action + 1 == self.game.actions[*player] {
                        vec![remaining]
                    } else {
                        (0..=remaining).collect()
                    }
                } else {
                    (0..=s).collect()
                }
            }
            _ => match eval.forced_value(pos, values) {
                Some(v) => vec![v],
                None => unreachable!("chain variable evaluated before its inputs"),
            },
        };
        for v in candidates {
            *nodes += 1;
            if *nodes > node_limit {
                return SearchEnd::Limit;
            }
            if let Domain::Lattice { lo, hi } = self.vars[pos].domain {
                if v < lo || v > hi {
                    continue;
                }
            }
            values[pos] = Some(v);
            let mut ok = true;
            for &ci in &ready_at[pos] {
                if eval.eval(&self.constraints[ci], values) != Some(true) {
                    ok = false;
                    break;
                }
            }
            if ok {
                match self.dfs(pos + 1, eval, ready_at, values, nodes, node_limit, on_solution) {
                    SearchEnd::Exhausted => {}
                    end => {
                        values[pos] = None;
                        return end;
                    }
                }
            }
            values[pos] = None;
        }
        SearchEnd::Exhausted
    }

    /// The constructive rounding: snap each strategy to the nearest grid
    /// point in l-infinity distance (ties toward the lexicographically larger
    /// tuple), then build every chain value by its defining recursion.
    pub fn round_msne_to_assignment(
        &self,
        profile: &[Vec<BigRational>],
    ) -> Result<CspAssignment, CspError> {
        if profile.len() != self.game.num_players() {
            return Err(ModelError::DimensionMismatch(format!(
                "profile covers {} players, game has {}",
                profile.len(),
                self.game.num_players()
            ))
            .into());
        }
        let eval = Evaluator::new(self);
        let mut values: Vec<Option<i64>> = vec![None; self.vars.len()];
        for (i, p) in profile.iter().enumerate() {
            let nums = nearest_grid_strategy(p, self.plan.players[i].grid.s);
            for (a, &num) in nums.iter().enumerate() {
                values[self.prob_idx[i][a]] = Some(num as i64);
            }
        }
        for pos in 0..self.vars.len() {
            if values[pos].is_none() {
                values[pos] = Some(eval.forced_value(pos, &values).expect("inputs assigned"));
            }
        }
        Ok(CspAssignment { values: values.into_iter().map(|v| v.unwrap()).collect() })
    }
}

#[derive(Debug, PartialEq, Eq)]
enum SearchEnd {
    Stop,
    Exhausted,
    Limit,
}
