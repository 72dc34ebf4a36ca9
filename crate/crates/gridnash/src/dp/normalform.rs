//! Collection/assignment-pass solver for normal-form graphical games with
//! tree game graphs: each player owns a single clique equal to its
//! neighborhood.
//!
//! Instead of partial-sum vectors, nodes carry partial expectation tables:
//! starting from the projected (scale-normalized) local payoff table, each
//! child's mixed strategy is integrated out one at a time, projecting back
//! onto the `[0, 1]` lattice after every elimination. After all children are
//! gone the table is indexed by the player's and its parent's actions, and
//! the best-response check mixes those two directly.
//!
//! Internally every player's table is rescaled to `(x - l_i) / R_i`, matching
//! the refined discretization. In proven slack mode the feasibility slack is
//! `2 eps / (3 R_i)` plus one lattice step at non-root nodes (the budget for
//! the projections the direct parent/self mixing skips); in literal mode it
//! is the bare `eps / R_i`.

use super::reach::canonicalize;
use super::{slack_over_tau, DpError, EquilibriumProfile, SlackMode, SolveOptions};
use crate::discretize::{
    count_grid_strategies, enumerate_grid_strategies, DiscretizationPlan, GridMixedStrategy,
    Variant,
};
use crate::model::{clique_stats, GameDefinition, PlayerId, RootedTree, StructureStats};
use crate::ratio::round_half_up;
use crate::verify;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::Zero;
use std::collections::{BTreeSet, HashMap};

const MAX_GRID: u128 = 2_000_000;
const MAX_TABLE: usize = 1_000_000;

/// Feasibility bitmaps per non-root node, `g_self * parent_grid_len +
/// g_parent`, plus state accounting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalformMessages {
    pub t_tables: HashMap<PlayerId, Vec<bool>>,
    pub reach_states: u64,
}

struct NfCtx<'a> {
    game: &'a GameDefinition,
    tree: &'a RootedTree,
    plan: &'a DiscretizationPlan,
    grids: Vec<Vec<Vec<u64>>>,
    /// Clique members per player, owner first (the table axis order).
    members: Vec<Vec<PlayerId>>,
    /// Projected scale-normalized local payoff tables.
    e0: Vec<Vec<i64>>,
    slack_root: Vec<(i128, i128)>,
    slack_inner: Vec<(i128, i128)>,
    indifferent: Vec<bool>,
}

impl<'a> NfCtx<'a> {
    fn new(
        game: &'a GameDefinition,
        stats: &'a StructureStats,
        tree: &'a RootedTree,
        plan: &'a DiscretizationPlan,
        opts: SolveOptions,
    ) -> Result<Self, DpError> {
        if stats.kappa_i.iter().any(|&k| k != 1) {
            return Err(DpError::Unsupported(
                "normal-form solver needs one clique per player".into(),
            ));
        }
        if plan.variant != Variant::Refined {
            return Err(DpError::Unsupported(
                "normal-form solver uses the refined (scale-normalized) plan".into(),
            ));
        }
        let n = game.num_players();
        // Neighborhoods must be symmetric and match the tree arcs.
        for i in 0..n {
            for &j in &stats.neighborhoods[i] {
                if j != i && !stats.neighborhoods[j].contains(&i) {
                    return Err(DpError::Unsupported(format!(
                        "asymmetric neighborhood between players {i} and {j}"
                    )));
                }
            }
            let mut tree_nbrs: Vec<PlayerId> = tree.children[i].clone();
            if let Some(p) = tree.parent[i] {
                tree_nbrs.push(p);
            }
            tree_nbrs.push(i);
            tree_nbrs.sort_unstable();
            if tree_nbrs != stats.neighborhoods[i] {
                return Err(DpError::Unsupported(format!(
                    "tree arcs do not match the neighborhood of player {i}"
                )));
            }
        }

        let mut grids = Vec::with_capacity(n);
        for i in 0..n {
            let s = plan.players[i].grid.s;
            match count_grid_strategies(game.actions[i], s) {
                Some(c) if c <= MAX_GRID => {}
                _ => {
                    return Err(DpError::TooLarge(format!(
                        "player {i} has too many grid strategies (s = {s})"
                    )))
                }
            }
            grids.push(enumerate_grid_strategies(game.actions[i], s));
        }

        let mut members = Vec::with_capacity(n);
        let mut e0 = Vec::with_capacity(n);
        let mut slack_root = Vec::with_capacity(n);
        let mut slack_inner = Vec::with_capacity(n);
        let mut indifferent = Vec::with_capacity(n);
        let three = BigRational::from_integer(3.into());
        let two = BigRational::from_integer(2.into());
        for i in 0..n {
            let clique = &game.cliques[stats.cliques_of[i][0]];
            if clique.payoffs.len() > MAX_TABLE {
                return Err(DpError::TooLarge(format!(
                    "local payoff table of player {i} has {} entries",
                    clique.payoffs.len()
                )));
            }
            let cs = clique_stats(clique);
            let tau = &plan.players[i].lattice.tau;
            let table: Vec<i64> = if cs.range.is_zero() {
                vec![0; clique.payoffs.len()]
            } else {
                clique
                    .payoffs
                    .iter()
                    .map(|x| {
                        let v = (x - &cs.l) / &cs.range;
                        let q = &v / tau;
                        i64::try_from(round_half_up(&q)).expect("lattice index fits i64")
                    })
                    .collect()
            };
            indifferent.push(cs.range.is_zero());
            let (root_slack, inner_slack) = if cs.range.is_zero() {
                (BigRational::zero(), BigRational::zero())
            } else {
                match opts.slack {
                    SlackMode::Proven => {
                        let base = &two * &plan.epsilon / (&three * &cs.range);
                        (base.clone(), base + tau)
                    }
                    SlackMode::Literal => {
                        let base = &plan.epsilon / &cs.range;
                        (base.clone(), base)
                    }
                }
            };
            slack_root.push(slack_over_tau(&root_slack, tau)?);
            slack_inner.push(slack_over_tau(&inner_slack, tau)?);
            members.push(clique.members.clone());
            e0.push(table);
        }
        Ok(NfCtx {
            game,
            tree,
            plan,
            grids,
            members,
            e0,
            slack_root,
            slack_inner,
            indifferent,
        })
    }

    fn grid_len(&self, i: PlayerId) -> usize {
        self.grids[i].len()
    }

    /// Members still present in player `i`'s table after eliminating its
    /// first `l` children, in original member order.
    fn residual_members(&self, i: PlayerId, l: usize) -> Vec<PlayerId> {
        let eliminated: Vec<PlayerId> = self.tree.children[i].iter().take(l).copied().collect();
        self.members[i]
            .iter()
            .copied()
            .filter(|m| !eliminated.contains(m))
            .collect()
    }

    fn dims(&self, members: &[PlayerId]) -> Vec<usize> {
        members.iter().map(|&m| self.game.actions[m]).collect()
    }

    /// Integrate one member out of a table: mix its axis under the grid
    /// strategy `nums` and project every entry back onto the lattice.
    fn mix_out(
        &self,
        table: &[i64],
        members_in: &[PlayerId],
        victim: PlayerId,
        nums: &[u64],
        s: u64,
    ) -> Vec<i64> {
        let dims_in = self.dims(members_in);
        let pos = members_in.iter().position(|&m| m == victim).expect("member");
        let members_out: Vec<PlayerId> =
            members_in.iter().copied().filter(|&m| m != victim).collect();
        let dims_out = self.dims(&members_out);
        let out_len: usize = dims_out.iter().product::<usize>().max(1);
        let s_big = BigInt::from(s);
        let mut out = Vec::with_capacity(out_len);
        let mut idx_out = vec![0usize; dims_out.len()];
        loop {
            let mut acc = BigRational::zero();
            for (a_v, &num) in (0..dims_in[pos]).zip(nums.iter()) {
                if num == 0 {
                    continue;
                }
                let mut full = Vec::with_capacity(dims_in.len());
                full.extend_from_slice(&idx_out[..pos]);
                full.push(a_v);
                full.extend_from_slice(&idx_out[pos..]);
                let flat = flat_index(&dims_in, &full);
                acc += BigRational::new(BigInt::from(num), s_big.clone())
                    * BigRational::from_integer(BigInt::from(table[flat]));
            }
            out.push(i64::try_from(round_half_up(&acc)).expect("index fits i64"));
            if !odometer(&mut idx_out, &dims_out) {
                break;
            }
        }
        out
    }

    /// Reachable canonical expectation tables for node `i` at strategy `g_i`,
    /// level by level over the first `prefix` children.
    fn reach_levels(
        &self,
        tables: &HashMap<PlayerId, Vec<bool>>,
        i: PlayerId,
        g_i: usize,
        prefix: usize,
    ) -> Vec<BTreeSet<Vec<i64>>> {
        let mut levels = vec![BTreeSet::from([canonicalize(self.e0[i].clone())])];
        let mut members_in = self.members[i].clone();
        for &o in self.tree.children[i].iter().take(prefix) {
            let t = &tables[&o];
            let gl = self.grid_len(i);
            let s_o = self.plan.players[o].grid.s;
            let mut next = BTreeSet::new();
            for g_o in 0..self.grid_len(o) {
                if !t[g_o * gl + g_i] {
                    continue;
                }
                let nums = &self.grids[o][g_o];
                for table in levels.last().unwrap() {
                    let mixed = self.mix_out(table, &members_in, o, nums, s_o);
                    next.insert(canonicalize(mixed));
                }
            }
            members_in.retain(|&m| m != o);
            levels.push(next);
        }
        levels
    }

    /// Best-response check at an internal node: residual table over
    /// `(a_i, a_j)` with the player's axis first.
    #[allow(clippy::needless_range_loop)]
    fn b_inner(&self, i: PlayerId, g_i: usize, g_j: usize, j: PlayerId, table: &[i64]) -> bool {
        if self.indifferent[i] {
            return true;
        }
        let residual = self.residual_members(i, self.tree.children[i].len());
        debug_assert_eq!(residual.len(), 2);
        let i_first = residual[0] == i;
        debug_assert!(i_first, "owner is the first clique member");
        let m_i = self.game.actions[i];
        let m_j = self.game.actions[j];
        let n_i = &self.grids[i][g_i];
        let n_j = &self.grids[j][g_j];
        let s_i = self.plan.players[i].grid.s as i128;
        let s_j = self.plan.players[j].grid.s as i128;
        let (p, q) = self.slack_inner[i];
        let entry = |a: usize, b: usize| table[a * m_j + b] as i128;
        let mut both = 0i128;
        let mut row = vec![0i128; m_i];
        for (a, r) in row.iter_mut().enumerate() {
            for b in 0..m_j {
                *r += n_j[b] as i128 * entry(a, b);
            }
            both += n_i[a] as i128 * *r;
        }
        for &r in &row {
            if q * (s_i * r - both) > p * s_i * s_j {
                return false;
            }
        }
        true
    }

    /// Best-response check at a component root: residual table over `(a_i)`.
    fn b_root(&self, i: PlayerId, g_i: usize, table: &[i64]) -> bool {
        if self.indifferent[i] {
            return true;
        }
        let n_i = &self.grids[i][g_i];
        let s_i = self.plan.players[i].grid.s as i128;
        let (p, q) = self.slack_root[i];
        let weighted: i128 = n_i
            .iter()
            .zip(table)
            .map(|(&n, &x)| n as i128 * x as i128)
            .sum();
        table
            .iter()
            .all(|&x| q * (s_i * x as i128 - weighted) <= p * s_i)
    }
}

fn flat_index(dims: &[usize], idx: &[usize]) -> usize {
    let mut out = 0;
    for (d, a) in dims.iter().zip(idx) {
        out = out * d + a;
    }
    out
}

/// Advance a mixed-radix counter; false when it wraps to all zeros.
fn odometer(idx: &mut [usize], dims: &[usize]) -> bool {
    for pos in (0..idx.len()).rev() {
        idx[pos] += 1;
        if idx[pos] < dims[pos] {
            return true;
        }
        idx[pos] = 0;
    }
    false
}

/// Leaves-to-root collection pass for normal-form graphical games.
pub fn collect_normalform_messages(
    game: &GameDefinition,
    stats: &StructureStats,
    tree: &RootedTree,
    plan: &DiscretizationPlan,
    opts: SolveOptions,
) -> Result<NormalformMessages, DpError> {
    let ctx = NfCtx::new(game, stats, tree, plan, opts)?;
    let mut messages = NormalformMessages { t_tables: HashMap::new(), reach_states: 0 };
    collect_into(&ctx, &mut messages);
    Ok(messages)
}

fn collect_into(ctx: &NfCtx, messages: &mut NormalformMessages) {
    for i in ctx.tree.bottom_up() {
        let j = match ctx.tree.parent[i] {
            Some(j) => j,
            None => continue,
        };
        let g_i_len = ctx.grid_len(i);
        let g_j_len = ctx.grid_len(j);
        let mut table = vec![false; g_i_len * g_j_len];
        for g_i in 0..g_i_len {
            let levels =
                ctx.reach_levels(&messages.t_tables, i, g_i, ctx.tree.children[i].len());
            let reach = levels.last().unwrap();
            messages.reach_states += reach.len() as u64;
            for g_j in 0..g_j_len {
                let ok = reach.iter().any(|e| ctx.b_inner(i, g_i, g_j, j, e));
                table[g_i * g_j_len + g_j] = ok;
            }
        }
        messages.t_tables.insert(i, table);
    }
}

/// Solve a normal-form tree graphical game and certify the result with the
/// exact regret check.
pub fn solve_normalform_tree(
    game: &GameDefinition,
    stats: &StructureStats,
    tree: &RootedTree,
    plan: &DiscretizationPlan,
    opts: SolveOptions,
) -> Result<EquilibriumProfile, DpError> {
    let ctx = NfCtx::new(game, stats, tree, plan, opts)?;
    let mut messages = NormalformMessages { t_tables: HashMap::new(), reach_states: 0 };
    collect_into(&ctx, &mut messages);

    let n = game.num_players();
    let mut chosen: Vec<Option<usize>> = vec![None; n];
    let mut witnesses: Vec<Option<Vec<i64>>> = vec![None; n];
    for &root in &tree.component_roots {
        let mut found = None;
        'root: for g_r in 0..ctx.grid_len(root) {
            let levels =
                ctx.reach_levels(&messages.t_tables, root, g_r, tree.children[root].len());
            for state in levels.last().unwrap() {
                if ctx.b_root(root, g_r, state) {
                    found = Some((g_r, state.clone(), levels));
                    break 'root;
                }
            }
        }
        let (g_r, state, levels) = found.ok_or_else(|| DpError::InfeasibleAtRoot {
            root,
            detail: format!(
                "no on-grid strategy of the root admits a feasible expectation table \
                 (grid size {}, epsilon {})",
                ctx.grid_len(root),
                plan.epsilon
            ),
        })?;
        chosen[root] = Some(g_r);
        witnesses[root] = Some(state.clone());
        unwind(&ctx, &messages, root, g_r, state, levels, &mut chosen, &mut witnesses)?;
    }

    let strategies: Vec<GridMixedStrategy> = (0..n)
        .map(|i| {
            let g = chosen[i].expect("every player assigned");
            GridMixedStrategy::new(i, plan.players[i].grid.s, ctx.grids[i][g].clone())
        })
        .collect();
    let profile: Vec<Vec<BigRational>> = strategies.iter().map(|s| s.to_rationals()).collect();
    let regret = verify::exact_regret(game, stats, &profile, &plan.epsilon)?;
    if opts.slack == SlackMode::Proven && !regret.overall {
        return Err(DpError::CertificateFailed(format!(
            "regrets {:?} exceed epsilon {}",
            regret.regrets.iter().map(crate::ratio::format_rational).collect::<Vec<_>>(),
            plan.epsilon
        )));
    }
    Ok(EquilibriumProfile {
        strategies,
        epsilon: plan.epsilon.clone(),
        regret,
        plan: super::PlanSummary::of(plan),
        witnesses,
    })
}

#[allow(clippy::too_many_arguments)]
fn unwind(
    ctx: &NfCtx,
    messages: &NormalformMessages,
    i: PlayerId,
    g_i: usize,
    final_state: Vec<i64>,
    levels: Vec<BTreeSet<Vec<i64>>>,
    chosen: &mut Vec<Option<usize>>,
    witnesses: &mut Vec<Option<Vec<i64>>>,
) -> Result<(), DpError> {
    let mut state = final_state;
    for l in (1..=ctx.tree.children[i].len()).rev() {
        let o = ctx.tree.children[i][l - 1];
        let table = &messages.t_tables[&o];
        let gl = ctx.grid_len(i);
        let members_in = ctx.residual_members(i, l - 1);
        let s_o = ctx.plan.players[o].grid.s;
        let mut picked = None;
        'search: for g_o in 0..ctx.grid_len(o) {
            if !table[g_o * gl + g_i] {
                continue;
            }
            let nums = &ctx.grids[o][g_o];
            for prev in &levels[l - 1] {
                let mixed = canonicalize(ctx.mix_out(prev, &members_in, o, nums, s_o));
                if mixed == state {
                    picked = Some((g_o, prev.clone()));
                    break 'search;
                }
            }
        }
        let (g_o, prev) = picked.ok_or_else(|| {
            DpError::CertificateFailed(format!(
                "no expectation witness for child {o} of node {i} at level {l}"
            ))
        })?;
        chosen[o] = Some(g_o);

        let child_levels =
            ctx.reach_levels(&messages.t_tables, o, g_o, ctx.tree.children[o].len());
        let mut child_final = None;
        for s in child_levels.last().unwrap() {
            if ctx.b_inner(o, g_o, g_i, i, s) {
                child_final = Some(s.clone());
                break;
            }
        }
        let child_final = child_final.ok_or_else(|| {
            DpError::CertificateFailed(format!(
                "feasibility table said arc ({i}, {o}) is satisfiable at \
                 ({g_i}, {g_o}) but no witness exists"
            ))
        })?;
        witnesses[o] = Some(child_final.clone());
        unwind(ctx, messages, o, g_o, child_final, child_levels, chosen, witnesses)?;
        state = prev;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::default_orders;
    use crate::discretize::plan_refined;
    use crate::model::{validate_game, ChildOrder, LocalClique};
    use crate::ratio::{int, ratio};

    /// Matching pennies encoded as a graphical game: each player's single
    /// clique covers both players.
    fn matching_pennies_gg() -> (GameDefinition, StructureStats) {
        let game = GameDefinition {
            actions: vec![2, 2],
            cliques: vec![
                LocalClique {
                    owner: 0,
                    members: vec![0, 1],
                    payoffs: vec![int(1), int(0), int(0), int(1)],
                },
                LocalClique {
                    owner: 1,
                    members: vec![1, 0],
                    payoffs: vec![int(0), int(1), int(1), int(0)],
                },
            ],
        };
        let stats = validate_game(&game).unwrap();
        assert!(stats.kappa_i.iter().all(|&k| k == 1));
        (game, stats)
    }

    fn path3_game() -> (GameDefinition, StructureStats) {
        // Path 0 - 1 - 2: the middle player's table spans all three.
        let t0 = vec![ratio(1, 2), int(0), ratio(1, 4), int(1)];
        let t2 = vec![int(0), ratio(3, 4), int(1), ratio(1, 10)];
        let t1: Vec<BigRational> = (0..8).map(|k| ratio(k % 3, 4)).collect();
        let game = GameDefinition {
            actions: vec![2, 2, 2],
            cliques: vec![
                LocalClique { owner: 0, members: vec![0, 1], payoffs: t0 },
                LocalClique { owner: 1, members: vec![1, 0, 2], payoffs: t1 },
                LocalClique { owner: 2, members: vec![2, 1], payoffs: t2 },
            ],
        };
        let stats = validate_game(&game).unwrap();
        (game, stats)
    }

    #[test]
    fn pennies_as_graphical_game() {
        let (game, stats) = matching_pennies_gg();
        let tree = RootedTree::for_game(&game, 0, ChildOrder::Ascending).unwrap();
        let eps = ratio(1, 4);
        let orders = default_orders(&game, &stats, None);
        let plan = plan_refined(&game, &stats, &eps, &orders).unwrap();
        let profile =
            solve_normalform_tree(&game, &stats, &tree, &plan, SolveOptions::default()).unwrap();
        assert!(profile.regret.overall);
    }

    #[test]
    fn path_of_three_quarter() {
        let (game, stats) = path3_game();
        let tree = RootedTree::from_edges(3, &[(0, 1), (1, 2)], 0, ChildOrder::Ascending).unwrap();
        let eps = ratio(1, 4);
        let orders = default_orders(&game, &stats, None);
        let plan = plan_refined(&game, &stats, &eps, &orders).unwrap();
        let profile =
            solve_normalform_tree(&game, &stats, &tree, &plan, SolveOptions::default()).unwrap();
        assert!(profile.regret.overall);
    }

    #[test]
    fn constant_leaf_table_every_strategy_feasible() {
        // Leaf 1 has a constant local table: all of its strategies must be
        // feasible against every parent strategy.
        let game = GameDefinition {
            actions: vec![2, 2],
            cliques: vec![
                LocalClique {
                    owner: 0,
                    members: vec![0, 1],
                    payoffs: vec![int(1), int(0), int(0), int(1)],
                },
                LocalClique { owner: 1, members: vec![1, 0], payoffs: vec![ratio(1, 3); 4] },
            ],
        };
        let stats = validate_game(&game).unwrap();
        let tree = RootedTree::for_game(&game, 0, ChildOrder::Ascending).unwrap();
        let eps = ratio(1, 4);
        let orders = default_orders(&game, &stats, None);
        let plan = plan_refined(&game, &stats, &eps, &orders).unwrap();
        let msgs =
            collect_normalform_messages(&game, &stats, &tree, &plan, SolveOptions::default())
                .unwrap();
        assert!(msgs.t_tables[&1].iter().all(|&b| b));
    }

    #[test]
    fn single_player_game() {
        let game = GameDefinition {
            actions: vec![3],
            cliques: vec![LocalClique {
                owner: 0,
                members: vec![0],
                payoffs: vec![int(0), int(1), ratio(1, 2)],
            }],
        };
        let stats = validate_game(&game).unwrap();
        let tree = RootedTree::for_game(&game, 0, ChildOrder::Ascending).unwrap();
        let eps = ratio(1, 10);
        let orders = default_orders(&game, &stats, None);
        let plan = plan_refined(&game, &stats, &eps, &orders).unwrap();
        let profile =
            solve_normalform_tree(&game, &stats, &tree, &plan, SolveOptions::default()).unwrap();
        assert!(profile.regret.overall);
        // The best action is 1; the chosen strategy must put almost all mass
        // there.
        let nums = &profile.strategies[0].numerators;
        assert!(nums[1] > 0);
    }
}
