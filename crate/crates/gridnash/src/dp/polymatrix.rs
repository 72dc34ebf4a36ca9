//! Collection/assignment-pass solver for tree polymatrix games.
//!
//! For each arc (parent `j`, child `i`) the collection pass computes a
//! feasibility table over on-grid strategy pairs `(p_i, p_j)`: the entry is
//! feasible iff some partial-sum vector reachable from `i`'s children makes
//! `i`'s best-response check pass. Partial sums chain exactly on the payoff
//! lattice (`S_l(a_i) = Mt_{i,o_l}(a_i, p_{o_l}) + S_{l-1}(a_i)`), so states
//! are plain integer vectors. The assignment pass picks the first feasible
//! root strategy and unwinds witnesses by membership checks against
//! recomputed reachable sets, which keeps the stored messages small.

use super::reach::{canonicalize, ReachSet};
use super::{polymatrix_slack, slack_over_tau, DpError, EquilibriumProfile, SlackMode, SolveOptions};
use crate::discretize::{
    count_grid_strategies, enumerate_grid_strategies, nearest_grid_strategy, project_unbounded,
    DiscretizationPlan, GridMixedStrategy,
};
use crate::model::{GameClass, GameDefinition, LocalClique, PlayerId, RootedTree, StructureStats};
use crate::verify;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Per-player grid-strategy cap; beyond this the instance is best served by
/// a coarser epsilon.
const MAX_GRID: u128 = 4_000_000;

/// Collection-pass output: one feasibility bitmap per non-root node, indexed
/// `g_self * parent_grid_len + g_parent`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolymatrixMessages {
    pub t_tables: HashMap<PlayerId, Vec<bool>>,
    /// Total canonical states enumerated while building the tables
    /// (memory-accounting aid for the benchmark harness).
    pub reach_states: u64,
}

impl PolymatrixMessages {
    pub fn approx_bytes(&self) -> u64 {
        let table_bits: u64 = self.t_tables.values().map(|t| t.len() as u64).sum();
        table_bits / 8 + self.reach_states * 16
    }
}

struct Ctx<'a> {
    game: &'a GameDefinition,
    stats: &'a StructureStats,
    tree: &'a RootedTree,
    plan: &'a DiscretizationPlan,
    grids: Vec<Vec<Vec<u64>>>,
    /// slack / tau per player, reduced.
    slack_q: Vec<(i128, i128)>,
    /// Projected expected edge payoffs: `(i, j) -> [g_j * m_i + a_i]`,
    /// player i's payoff on edge {i,j} when j plays grid strategy g_j.
    mt: HashMap<(PlayerId, PlayerId), Vec<i64>>,
}

impl<'a> Ctx<'a> {
    fn new(
        game: &'a GameDefinition,
        stats: &'a StructureStats,
        tree: &'a RootedTree,
        plan: &'a DiscretizationPlan,
        opts: SolveOptions,
    ) -> Result<Self, DpError> {
        if stats.class != GameClass::Polymatrix {
            return Err(DpError::Unsupported(
                "polymatrix solver needs a polymatrix game".into(),
            ));
        }
        if plan.players.len() != game.num_players() {
            return Err(DpError::Unsupported("plan does not cover all players".into()));
        }
        let mut grids = Vec::with_capacity(game.num_players());
        for i in 0..game.num_players() {
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
        let slack = polymatrix_slack(&plan.epsilon, opts.slack);
        let mut slack_q = Vec::with_capacity(game.num_players());
        for pp in &plan.players {
            slack_q.push(slack_over_tau(&slack, &pp.lattice.tau)?);
        }

        let mut ctx = Ctx { game, stats, tree, plan, grids, slack_q, mt: HashMap::new() };
        for i in 0..game.num_players() {
            if let Some(j) = tree.parent[i] {
                ctx.build_edge_table(i, j);
                ctx.build_edge_table(j, i);
            }
        }
        Ok(ctx)
    }

    /// Fill `mt[(i, j)]`: i's projected expected payoff from the edge matrix
    /// it owns toward j, for every grid strategy of j.
    fn build_edge_table(&mut self, i: PlayerId, j: PlayerId) {
        let m_i = self.game.actions[i];
        let m_j = self.game.actions[j];
        let clique: Option<&LocalClique> =
            self.stats.edge_clique(i, j).map(|c| &self.game.cliques[c]);
        let tau = &self.plan.players[i].lattice.tau;
        let s_j = BigInt::from(self.plan.players[j].grid.s);
        let mut table = Vec::with_capacity(self.grids[j].len() * m_i);
        for nums in &self.grids[j] {
            for a_i in 0..m_i {
                let idx = match clique {
                    None => 0,
                    Some(cl) => {
                        let dims = self.game.clique_dims(cl);
                        let mut acc = BigRational::zero();
                        for (a_j, &num) in nums.iter().enumerate().take(m_j) {
                            if num == 0 {
                                continue;
                            }
                            let entry =
                                &cl.payoffs[LocalClique::flat_index(&dims, &[a_i, a_j])];
                            acc += BigRational::new(BigInt::from(num), s_j.clone()) * entry;
                        }
                        project_unbounded(&acc, tau)
                    }
                };
                table.push(idx);
            }
        }
        self.mt.insert((i, j), table);
    }

    fn grid_len(&self, i: PlayerId) -> usize {
        self.grids[i].len()
    }

    /// Increment vector contributed to parent `i`'s partial sum by child `o`
    /// playing grid strategy `g_o`.
    fn delta(&self, i: PlayerId, o: PlayerId, g_o: usize) -> Vec<i64> {
        let m = self.game.actions[i];
        self.mt[&(i, o)][g_o * m..(g_o + 1) * m].to_vec()
    }

    /// Feasible bounds on the best-response difference for a two-action
    /// player: the check passes iff `Y[1] - Y[0]` lies in the returned
    /// interval, where `Y` is the total (parent edge plus partial sum).
    fn feasible_interval(&self, i: PlayerId, g_i: usize) -> (i64, i64) {
        let nums = &self.grids[i][g_i];
        let s = self.plan.players[i].grid.s as i128;
        let (p, q) = self.slack_q[i];
        let lo = if nums[1] == 0 {
            i64::MIN / 4
        } else {
            div_ceil(-s * p, q * nums[1] as i128) as i64
        };
        let hi = if nums[0] == 0 {
            i64::MAX / 4
        } else {
            div_floor(s * p, q * nums[0] as i128) as i64
        };
        (lo, hi)
    }

    /// Best-response check for arbitrary action counts: for all `a`,
    /// `q (s Y_a - sum_b n_b Y_b) <= p s` with `Y = c + S` (`c` empty for the
    /// root form).
    fn b_feasible(&self, i: PlayerId, g_i: usize, c: Option<&[i64]>, state: &[i64]) -> bool {
        let nums = &self.grids[i][g_i];
        let s = self.plan.players[i].grid.s as i128;
        let (p, q) = self.slack_q[i];
        let mut weighted = 0i128;
        for (b, &n) in nums.iter().enumerate() {
            let y = state[b] as i128 + c.map_or(0, |c| c[b] as i128);
            weighted += n as i128 * y;
        }
        for (a, _) in nums.iter().enumerate() {
            let y = state[a] as i128 + c.map_or(0, |c| c[a] as i128);
            if q * (s * y - weighted) > p * s {
                return false;
            }
        }
        true
    }

    /// Reachable canonical partial-sum sets for node `i` at strategy `g_i`,
    /// level by level over the first `prefix` children. `tables` must hold
    /// the children's feasibility bitmaps.
    fn reach_levels(
        &self,
        tables: &HashMap<PlayerId, Vec<bool>>,
        i: PlayerId,
        g_i: usize,
        prefix: usize,
    ) -> Vec<ReachSet> {
        let m = self.game.actions[i];
        let mut levels = vec![ReachSet::zero(m)];
        for &o in self.tree.children[i].iter().take(prefix) {
            let t = &tables[&o];
            let gl = self.grid_len(i);
            let deltas: Vec<Vec<i64>> = (0..self.grid_len(o))
                .filter(|&g_o| t[g_o * gl + g_i])
                .map(|g_o| self.delta(i, o, g_o))
                .collect();
            let next = levels.last().unwrap().step(&deltas);
            levels.push(next);
        }
        levels
    }
}

fn div_floor(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    a.div_euclid(b)
}

fn div_ceil(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    -((-a).div_euclid(b))
}

/// Pareto-minimal elements under componentwise <=, input in any order.
fn pareto_min(points: Vec<Vec<i128>>) -> Vec<Vec<i128>> {
    let mut sorted = points;
    sorted.sort();
    sorted.dedup();
    let mut frontier: Vec<Vec<i128>> = Vec::new();
    'outer: for p in sorted {
        for f in &frontier {
            if f.iter().zip(&p).all(|(a, b)| a <= b) {
                continue 'outer;
            }
        }
        frontier.push(p);
    }
    frontier
}

/// Leaves-to-root collection pass: computes every arc's feasibility table.
pub fn collect_polymatrix_messages(
    game: &GameDefinition,
    stats: &StructureStats,
    tree: &RootedTree,
    plan: &DiscretizationPlan,
    opts: SolveOptions,
) -> Result<PolymatrixMessages, DpError> {
    let ctx = Ctx::new(game, stats, tree, plan, opts)?;
    let mut messages = PolymatrixMessages { t_tables: HashMap::new(), reach_states: 0 };
    collect_into(&ctx, &mut messages)?;
    Ok(messages)
}

fn collect_into(ctx: &Ctx, messages: &mut PolymatrixMessages) -> Result<(), DpError> {
    for i in ctx.tree.bottom_up() {
        let j = match ctx.tree.parent[i] {
            Some(j) => j,
            None => continue,
        };
        let g_i_len = ctx.grid_len(i);
        let g_j_len = ctx.grid_len(j);
        let m = ctx.game.actions[i];
        let mut table = vec![false; g_i_len * g_j_len];
        for g_i in 0..g_i_len {
            let levels = ctx.reach_levels(&messages.t_tables, i, g_i, ctx.tree.children[i].len());
            let reach = levels.last().unwrap();
            messages.reach_states += reach.len() as u64;
            if reach.is_empty() {
                continue;
            }
            if m == 2 {
                let (lo, hi) = ctx.feasible_interval(i, g_i);
                if let ReachSet::Delta(dset) = reach {
                    let mt = &ctx.mt[&(i, j)];
                    for g_j in 0..g_j_len {
                        let dc = mt[g_j * 2 + 1] - mt[g_j * 2];
                        if dset.any_in_range(lo.saturating_sub(dc), hi.saturating_sub(dc)) {
                            table[g_i * g_j_len + g_j] = true;
                        }
                    }
                    continue;
                }
            }
            // General case: Pareto frontier of the linear forms
            // L_a(S) = s S_a - sum_b n_b S_b, then a box query per
            // parent strategy.
            let nums = &ctx.grids[i][g_i];
            let s = ctx.plan.players[i].grid.s as i128;
            let (p, q) = ctx.slack_q[i];
            let l_vectors: Vec<Vec<i128>> = reach
                .iter_states()
                .map(|state| {
                    let weighted: i128 = nums
                        .iter()
                        .zip(&state)
                        .map(|(&n, &x)| n as i128 * x as i128)
                        .sum();
                    state
                        .iter()
                        .map(|&x| s * x as i128 - weighted)
                        .collect()
                })
                .collect();
            let frontier = pareto_min(l_vectors);
            let mt = &ctx.mt[&(i, j)];
            for g_j in 0..g_j_len {
                let c = &mt[g_j * m..(g_j + 1) * m];
                let t_c: i128 = nums
                    .iter()
                    .zip(c)
                    .map(|(&n, &x)| n as i128 * x as i128)
                    .sum();
                let rhs: Vec<i128> = c
                    .iter()
                    .map(|&c_a| s * p - q * (s * c_a as i128 - t_c))
                    .collect();
                let ok = frontier
                    .iter()
                    .any(|f| f.iter().zip(&rhs).all(|(&fa, &ra)| q * fa <= ra));
                if ok {
                    table[g_i * g_j_len + g_j] = true;
                }
            }
        }
        messages.t_tables.insert(i, table);
    }
    Ok(())
}

/// The reachable partial-sum vectors of `node` after its first
/// `children_prefix` children, at own strategy index `g_node`, in canonical
/// lexicographic order.
#[allow(clippy::too_many_arguments)]
pub fn reachable_partial_sums(
    game: &GameDefinition,
    stats: &StructureStats,
    tree: &RootedTree,
    plan: &DiscretizationPlan,
    opts: SolveOptions,
    messages: &PolymatrixMessages,
    node: PlayerId,
    children_prefix: usize,
    g_node: usize,
) -> Result<Vec<Vec<i64>>, DpError> {
    let ctx = Ctx::new(game, stats, tree, plan, opts)?;
    let levels = ctx.reach_levels(&messages.t_tables, node, g_node, children_prefix);
    Ok(levels.last().unwrap().iter_states().collect())
}

/// Solve a tree polymatrix game: collection pass, deterministic assignment
/// pass, then an exact-regret certificate before returning.
pub fn solve_polymatrix_tree(
    game: &GameDefinition,
    stats: &StructureStats,
    tree: &RootedTree,
    plan: &DiscretizationPlan,
    opts: SolveOptions,
) -> Result<EquilibriumProfile, DpError> {
    let ctx = Ctx::new(game, stats, tree, plan, opts)?;
    let mut messages = PolymatrixMessages { t_tables: HashMap::new(), reach_states: 0 };
    collect_into(&ctx, &mut messages)?;

    let n = game.num_players();
    let mut chosen: Vec<Option<usize>> = vec![None; n];
    let mut witnesses: Vec<Option<Vec<i64>>> = vec![None; n];
    for &root in &tree.component_roots {
        if tree.children[root].is_empty() {
            // Isolated player: uniform strategy (any is a best response).
            let m = game.actions[root];
            let uniform: Vec<BigRational> = (0..m)
                .map(|_| BigRational::new(BigInt::one(), BigInt::from(m)))
                .collect();
            let nums = nearest_grid_strategy(&uniform, plan.players[root].grid.s);
            let g = ctx.grids[root].iter().position(|x| *x == nums).expect("on grid");
            chosen[root] = Some(g);
            continue;
        }
        let mut found = None;
        'root: for g_r in 0..ctx.grid_len(root) {
            let levels =
                ctx.reach_levels(&messages.t_tables, root, g_r, tree.children[root].len());
            let hit = levels
                .last()
                .unwrap()
                .iter_states()
                .find(|state| ctx.b_feasible(root, g_r, None, state));
            if let Some(state) = hit {
                found = Some((g_r, state, levels));
                break 'root;
            }
        }
        let (g_r, state, levels) = found.ok_or_else(|| DpError::InfeasibleAtRoot {
            root,
            detail: format!(
                "no on-grid strategy of the root admits a feasible partial-sum witness \
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
    ctx: &Ctx,
    messages: &PolymatrixMessages,
    i: PlayerId,
    g_i: usize,
    final_state: Vec<i64>,
    levels: Vec<ReachSet>,
    chosen: &mut Vec<Option<usize>>,
    witnesses: &mut Vec<Option<Vec<i64>>>,
) -> Result<(), DpError> {
    let mut state = final_state;
    for l in (1..=ctx.tree.children[i].len()).rev() {
        let o = ctx.tree.children[i][l - 1];
        let table = &messages.t_tables[&o];
        let gl = ctx.grid_len(i);
        let mut picked = None;
        for g_o in 0..ctx.grid_len(o) {
            if !table[g_o * gl + g_i] {
                continue;
            }
            let delta = ctx.delta(i, o, g_o);
            let cand: Vec<i64> = state.iter().zip(&delta).map(|(s, d)| s - d).collect();
            let cand = canonicalize(cand);
            if levels[l - 1].contains(&cand) {
                picked = Some((g_o, cand));
                break;
            }
        }
        let (g_o, prev) = picked.ok_or_else(|| {
            DpError::CertificateFailed(format!(
                "no witness for child {o} of node {i} at level {l}; \
                 reachable-set bookkeeping is inconsistent"
            ))
        })?;
        chosen[o] = Some(g_o);

        // Descend: the child's own final partial sum is the first reachable
        // state that passes its best-response check against (g_o, g_i).
        let child_levels =
            ctx.reach_levels(&messages.t_tables, o, g_o, ctx.tree.children[o].len());
        let parent_slice = {
            let m = ctx.game.actions[o];
            ctx.mt[&(o, i)][g_i * m..(g_i + 1) * m].to_vec()
        };
        let mut child_final = None;
        for s in child_levels.last().unwrap().iter_states() {
            if ctx.b_feasible(o, g_o, Some(&parent_slice), &s) {
                child_final = Some(s);
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

/// Every joint grid profile accepted by the DP's feasibility structure
/// (unwound over all witnesses, not just the canonical one). Intended for
/// desk-scale cross-checks against the CSP solution set; `None` when the
/// profile set exceeds `cap`.
pub fn enumerate_polymatrix_profiles(
    game: &GameDefinition,
    stats: &StructureStats,
    tree: &RootedTree,
    plan: &DiscretizationPlan,
    opts: SolveOptions,
    cap: usize,
) -> Result<Option<BTreeSet<Vec<Vec<u64>>>>, DpError> {
    let ctx = Ctx::new(game, stats, tree, plan, opts)?;
    let mut messages = PolymatrixMessages { t_tables: HashMap::new(), reach_states: 0 };
    collect_into(&ctx, &mut messages)?;

    let mut per_component: Vec<Vec<BTreeMap<PlayerId, usize>>> = Vec::new();
    for &root in &tree.component_roots {
        let mut frags: Vec<BTreeMap<PlayerId, usize>> = Vec::new();
        if tree.children[root].is_empty() {
            for g in 0..ctx.grid_len(root) {
                frags.push(BTreeMap::from([(root, g)]));
            }
        } else {
            for g_r in 0..ctx.grid_len(root) {
                let sub = subtree_profiles(&ctx, &messages, root, g_r, None, cap)?;
                match sub {
                    None => return Ok(None),
                    Some(list) => frags.extend(list),
                }
                if frags.len() > cap {
                    return Ok(None);
                }
            }
        }
        per_component.push(frags);
    }

    // Cross product across components.
    let mut combos: Vec<BTreeMap<PlayerId, usize>> = vec![BTreeMap::new()];
    for frags in per_component {
        let mut next = Vec::new();
        for base in &combos {
            for frag in &frags {
                let mut merged = base.clone();
                merged.extend(frag.iter().map(|(k, v)| (*k, *v)));
                next.push(merged);
            }
        }
        combos = next;
        if combos.len() > cap {
            return Ok(None);
        }
    }

    let mut out = BTreeSet::new();
    for combo in combos {
        let profile: Vec<Vec<u64>> = (0..game.num_players())
            .map(|i| ctx.grids[i][combo[&i]].clone())
            .collect();
        out.insert(profile);
    }
    Ok(Some(out))
}

/// All assignments of the subtree rooted at `i` given its own strategy index
/// and (for non-roots) the parent's strategy index.
fn subtree_profiles(
    ctx: &Ctx,
    messages: &PolymatrixMessages,
    i: PlayerId,
    g_i: usize,
    parent: Option<(PlayerId, usize)>,
    cap: usize,
) -> Result<Option<Vec<BTreeMap<PlayerId, usize>>>, DpError> {
    let c = ctx.tree.children[i].len();
    let levels = ctx.reach_levels(&messages.t_tables, i, g_i, c);
    let parent_slice = parent.map(|(j, g_j)| {
        let m = ctx.game.actions[i];
        ctx.mt[&(i, j)][g_j * m..(g_j + 1) * m].to_vec()
    });

    let mut results: BTreeSet<BTreeMap<PlayerId, usize>> = BTreeSet::new();
    for final_state in levels.last().unwrap().iter_states() {
        if !ctx.b_feasible(i, g_i, parent_slice.as_deref(), &final_state) {
            continue;
        }
        // Enumerate all (child strategy, previous state) decompositions of
        // this final state, level by level.
        let mut partials: Vec<(Vec<i64>, BTreeMap<PlayerId, usize>)> =
            vec![(final_state.clone(), BTreeMap::new())];
        for l in (1..=c).rev() {
            let o = ctx.tree.children[i][l - 1];
            let table = &messages.t_tables[&o];
            let gl = ctx.grid_len(i);
            let mut next = Vec::new();
            for (state, assign) in &partials {
                for g_o in 0..ctx.grid_len(o) {
                    if !table[g_o * gl + g_i] {
                        continue;
                    }
                    let delta = ctx.delta(i, o, g_o);
                    let cand: Vec<i64> =
                        state.iter().zip(&delta).map(|(s, d)| s - d).collect();
                    let cand = canonicalize(cand);
                    if levels[l - 1].contains(&cand) {
                        let mut a = assign.clone();
                        a.insert(o, g_o);
                        next.push((cand, a));
                    }
                }
            }
            partials = next;
            if partials.len() > cap {
                return Ok(None);
            }
        }
        for (_, assign) in partials {
            // Expand each child's own subtree for its chosen strategy.
            let mut expansions: Vec<BTreeMap<PlayerId, usize>> =
                vec![BTreeMap::from([(i, g_i)])];
            for (&o, &g_o) in &assign {
                let subs = subtree_profiles(ctx, messages, o, g_o, Some((i, g_i)), cap)?;
                let subs = match subs {
                    None => return Ok(None),
                    Some(s) => s,
                };
                let mut next = Vec::new();
                for base in &expansions {
                    for sub in &subs {
                        let mut merged = base.clone();
                        merged.extend(sub.iter().map(|(k, v)| (*k, *v)));
                        next.push(merged);
                    }
                }
                expansions = next;
                if expansions.len() > cap {
                    return Ok(None);
                }
            }
            results.extend(expansions);
            if results.len() > cap {
                return Ok(None);
            }
        }
    }
    Ok(Some(results.into_iter().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp;
    use crate::discretize::plan_simple;
    use crate::model::{validate_game, ChildOrder, LocalClique};
    use crate::ratio::{int, ratio};

    fn matching_pennies() -> (GameDefinition, StructureStats) {
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
        (game, stats)
    }

    fn solve_default(
        game: &GameDefinition,
        stats: &StructureStats,
        eps: &BigRational,
    ) -> EquilibriumProfile {
        let tree = RootedTree::for_game(game, 0, ChildOrder::Ascending).unwrap();
        let plan = plan_simple(game, stats, eps).unwrap();
        solve_polymatrix_tree(game, stats, &tree, &plan, SolveOptions::default()).unwrap()
    }

    #[test]
    fn matching_pennies_small_epsilon() {
        let (game, stats) = matching_pennies();
        let profile = solve_default(&game, &stats, &ratio(1, 10));
        assert!(profile.regret.overall);
    }

    #[test]
    fn matching_pennies_coarse_grid() {
        let (game, stats) = matching_pennies();
        let tree = RootedTree::for_game(&game, 0, ChildOrder::Ascending).unwrap();
        let eps = ratio(1, 2);
        let mut plan = plan_simple(&game, &stats, &eps).unwrap();
        for pp in &mut plan.players {
            pp.grid.s = 2;
        }
        let profile =
            solve_polymatrix_tree(&game, &stats, &tree, &plan, SolveOptions::default()).unwrap();
        assert!(profile.regret.overall);
        // The joint grid search oracle agrees this profile is on the grid
        // equilibrium set.
        let eqs =
            verify::brute_force_grid_equilibria(&game, &stats, &plan, &eps, 1000).unwrap();
        let nums: Vec<Vec<u64>> =
            profile.strategies.iter().map(|s| s.numerators.clone()).collect();
        assert!(eqs
            .iter()
            .any(|p| p.iter().map(|s| s.numerators.clone()).collect::<Vec<_>>() == nums));
    }

    #[test]
    fn single_node_game_gets_uniform() {
        let game = GameDefinition { actions: vec![2], cliques: vec![] };
        let stats = validate_game(&game).unwrap();
        let profile = solve_default(&game, &stats, &ratio(1, 4));
        // The plan gives an isolated player a one-interval grid; the nearest
        // grid point to uniform under the lexicographic tie rule is (1, 0).
        assert_eq!(profile.strategies[0].s, 1);
        assert_eq!(profile.strategies[0].numerators, vec![1, 0]);
        assert!(profile.regret.regrets[0].is_zero());
    }

    #[test]
    fn five_node_star_tenth() {
        let mp = vec![int(1), int(0), int(0), int(1)];
        let anti = vec![int(0), int(1), int(1), int(0)];
        let mut cliques = Vec::new();
        for leaf in 1..=4 {
            cliques.push(LocalClique { owner: 0, members: vec![0, leaf], payoffs: mp.clone() });
            cliques
                .push(LocalClique { owner: leaf, members: vec![leaf, 0], payoffs: anti.clone() });
        }
        let game = GameDefinition { actions: vec![2; 5], cliques };
        let stats = validate_game(&game).unwrap();
        let norm = crate::model::normalize_polymatrix(&game, &stats).unwrap();
        let nstats = validate_game(&norm.game).unwrap();
        let tree = RootedTree::for_game(&norm.game, 0, ChildOrder::Ascending).unwrap();
        let plan = plan_simple(&norm.game, &nstats, &ratio(1, 10)).unwrap();
        let profile =
            solve_polymatrix_tree(&norm.game, &nstats, &tree, &plan, SolveOptions::default())
                .unwrap();
        assert!(profile.regret.overall);
    }

    #[test]
    fn message_locality() {
        // Two disjoint subtrees under the root; editing one leaf's payoffs
        // must leave the other subtree's message bit-identical.
        let mp = vec![int(1), int(0), int(0), int(1)];
        let anti = vec![int(0), int(1), int(1), int(0)];
        let mut cliques = Vec::new();
        for (a, b) in [(0usize, 1usize), (0, 2), (1, 3), (2, 4)] {
            cliques.push(LocalClique { owner: a, members: vec![a, b], payoffs: mp.clone() });
            cliques.push(LocalClique { owner: b, members: vec![b, a], payoffs: anti.clone() });
        }
        let game = GameDefinition { actions: vec![2; 5], cliques };
        let stats = validate_game(&game).unwrap();
        let tree = RootedTree::for_game(&game, 0, ChildOrder::Ascending).unwrap();
        let eps = ratio(1, 4);
        let plan = plan_simple(&game, &stats, &eps).unwrap();
        let before =
            collect_polymatrix_messages(&game, &stats, &tree, &plan, SolveOptions::default())
                .unwrap();

        let mut modified = game.clone();
        // Perturb the payoffs on the 2-4 edge (subtree of child 2).
        modified.cliques[7].payoffs = vec![ratio(1, 3), ratio(2, 3), int(1), int(0)];
        let mstats = validate_game(&modified).unwrap();
        let mplan = plan_simple(&modified, &mstats, &eps).unwrap();
        let after =
            collect_polymatrix_messages(&modified, &mstats, &tree, &mplan, SolveOptions::default())
                .unwrap();
        // The arc 3 -> 1 lives in the untouched subtree.
        assert_eq!(before.t_tables[&3], after.t_tables[&3]);
        assert_eq!(before.t_tables[&1], after.t_tables[&1]);
        // The modified subtree's own message is allowed to change; the leaf 4
        // sees different payoffs.
        assert_ne!(before.t_tables[&4], after.t_tables[&4]);
    }

    #[test]
    fn reachable_sums_boundary_and_growth() {
        let (game, stats) = matching_pennies();
        let tree = RootedTree::for_game(&game, 0, ChildOrder::Ascending).unwrap();
        let mut plan = plan_simple(&game, &stats, &ratio(1, 2)).unwrap();
        for pp in &mut plan.players {
            pp.grid.s = 2;
        }
        let msgs =
            collect_polymatrix_messages(&game, &stats, &tree, &plan, SolveOptions::default())
                .unwrap();
        // Zero children: the singleton zero vector.
        let zero = reachable_partial_sums(
            &game, &stats, &tree, &plan, SolveOptions::default(), &msgs, 0, 0, 1,
        )
        .unwrap();
        assert_eq!(zero, vec![vec![0, 0]]);
        // One child with three feasible strategies whose projected payoff
        // vectors differ: distinct canonical states appear.
        let one = reachable_partial_sums(
            &game, &stats, &tree, &plan, SolveOptions::default(), &msgs, 0, 1, 1,
        )
        .unwrap();
        assert!(one.len() >= 2, "got {one:?}");
    }

    #[test]
    fn payoff_equivalent_children_collapse_to_one_state() {
        // Child payoff matrices that are constant per own action: every
        // feasible child strategy maps to the same canonical delta.
        let game = GameDefinition {
            actions: vec![2, 2],
            cliques: vec![
                LocalClique { owner: 0, members: vec![0, 1], payoffs: vec![int(5); 4] },
                LocalClique {
                    owner: 1,
                    members: vec![1, 0],
                    payoffs: vec![int(0), int(1), int(1), int(0)],
                },
            ],
        };
        let stats = validate_game(&game).unwrap();
        let tree = RootedTree::for_game(&game, 0, ChildOrder::Ascending).unwrap();
        let mut plan = plan_simple(&game, &stats, &ratio(1, 2)).unwrap();
        for pp in &mut plan.players {
            pp.grid.s = 4;
        }
        let msgs =
            collect_polymatrix_messages(&game, &stats, &tree, &plan, SolveOptions::default())
                .unwrap();
        let states = reachable_partial_sums(
            &game, &stats, &tree, &plan, SolveOptions::default(), &msgs, 0, 1, 2,
        )
        .unwrap();
        assert_eq!(states.len(), 1);
    }

    #[test]
    fn interval_fast_path_agrees_with_generic_check() {
        // The collection pass decides two-action feasibility through the
        // difference interval; the assignment pass re-decides through the
        // generic check. They must agree entry for entry.
        for seed in 0..6u64 {
            let game = crate::gen::gen_random_tree_polymatrix(
                2,
                2,
                650_000 + seed,
                &crate::gen::PayoffRange::default(),
            );
            let stats = validate_game(&game).unwrap();
            let tree = RootedTree::for_game(&game, 0, ChildOrder::Ascending).unwrap();
            let mut plan = plan_simple(&game, &stats, &ratio(1, 3)).unwrap();
            for pp in &mut plan.players {
                pp.grid.s = pp.grid.s.min(12);
            }
            let ctx = Ctx::new(&game, &stats, &tree, &plan, SolveOptions::default()).unwrap();
            let i = 1; // the leaf; parent is 0
            for g_i in 0..ctx.grid_len(i) {
                let (lo, hi) = ctx.feasible_interval(i, g_i);
                for g_j in 0..ctx.grid_len(0) {
                    let c = ctx.delta(i, 0, g_j);
                    let dc = c[1] - c[0];
                    for ds in -40i64..=40 {
                        let state = vec![0, ds];
                        let generic = ctx.b_feasible(i, g_i, Some(&c), &state);
                        let fast = ds + dc >= lo && ds + dc <= hi;
                        assert_eq!(generic, fast, "seed {seed} g_i {g_i} g_j {g_j} ds {ds}");
                    }
                }
            }
        }
    }

    #[test]
    fn proven_messages_are_subset_of_literal() {
        // The literal slack (full epsilon) is weaker than the proven one
        // (two thirds), so every proven-feasible arc entry must stay
        // feasible under literal slack.
        for seed in 0..10u64 {
            let game = crate::gen::gen_random_tree_polymatrix(
                4,
                2,
                600_000 + seed,
                &crate::gen::PayoffRange::default(),
            );
            let stats = validate_game(&game).unwrap();
            let tree = RootedTree::for_game(&game, 0, ChildOrder::Ascending).unwrap();
            let plan = plan_simple(&game, &stats, &ratio(1, 4)).unwrap();
            let proven = collect_polymatrix_messages(
                &game,
                &stats,
                &tree,
                &plan,
                SolveOptions { slack: SlackMode::Proven },
            )
            .unwrap();
            let literal = collect_polymatrix_messages(
                &game,
                &stats,
                &tree,
                &plan,
                SolveOptions { slack: SlackMode::Literal },
            )
            .unwrap();
            for (node, table) in &proven.t_tables {
                let lit = &literal.t_tables[node];
                for (a, b) in table.iter().zip(lit) {
                    assert!(!a || *b, "seed {seed}: literal lost a proven-feasible entry");
                }
            }
        }
    }

    #[test]
    fn dp_profile_set_matches_csp_solutions() {
        let (game, stats) = matching_pennies();
        let tree = RootedTree::for_game(&game, 0, ChildOrder::Ascending).unwrap();
        let eps = ratio(1, 2);
        let mut plan = plan_simple(&game, &stats, &eps).unwrap();
        for pp in &mut plan.players {
            pp.grid.s = 3;
        }
        let dp_set = enumerate_polymatrix_profiles(
            &game, &stats, &tree, &plan, SolveOptions::default(), 100_000,
        )
        .unwrap()
        .unwrap();
        let orders = csp::default_orders(&game, &stats, Some(&tree));
        let instance = csp::build_csp(&game, &stats, &plan, &orders).unwrap();
        let csp_set = instance.enumerate_p_parts(50_000_000).unwrap();
        assert_eq!(dp_set, csp_set);
        assert!(!dp_set.is_empty());

        // Soundness: both sets sit inside the exact on-grid equilibrium set.
        let grid_eqs =
            verify::brute_force_grid_equilibria(&game, &stats, &plan, &eps, 10_000).unwrap();
        let grid_set: BTreeSet<Vec<Vec<u64>>> = grid_eqs
            .into_iter()
            .map(|p| p.into_iter().map(|s| s.numerators).collect())
            .collect();
        assert!(dp_set.is_subset(&grid_set));
    }
}
