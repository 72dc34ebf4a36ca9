//! Game representation: graphical multi-hypermatrix games (GMhGs), their
//! derived structural quantities, exact payoff evaluation, and payoff-scale
//! normalization for polymatrix games.
//!
//! A GMhG assigns each player a set of local cliques (hyperedges containing
//! the player) and one dense payoff hypermatrix per clique; the player's
//! local payoff is the sum of its clique entries. Polymatrix games are the
//! special case where every clique has exactly two members; normal-form
//! graphical games the case where every player owns exactly one clique.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

pub type PlayerId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("malformed game: {0}")]
    Malformed(String),
    #[error("operation requires a polymatrix game")]
    NotPolymatrix,
    #[error("strategy for player {0} does not sum to 1")]
    UnnormalizedStrategy(PlayerId),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("graph is not a forest of trees: {0}")]
    NotATree(String),
}

/// One local clique and its payoff hypermatrix for the owning player.
///
/// `payoffs` is dense and row-major in member order: the first member's
/// action varies slowest, the last member's fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalClique {
    pub owner: PlayerId,
    pub members: Vec<PlayerId>,
    pub payoffs: Vec<BigRational>,
}

impl LocalClique {
    /// Flat index of a joint action of the members, given per-member action
    /// counts in member order.
    pub fn flat_index(dims: &[usize], actions: &[usize]) -> usize {
        debug_assert_eq!(dims.len(), actions.len());
        let mut idx = 0;
        for (d, a) in dims.iter().zip(actions) {
            debug_assert!(a < d);
            idx = idx * d + a;
        }
        idx
    }
}

/// Exact min/max/spread of one clique's payoff entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueStats {
    pub u: BigRational,
    pub l: BigRational,
    pub range: BigRational,
}

/// Exact entry statistics of a clique hypermatrix.
pub fn clique_stats(clique: &LocalClique) -> CliqueStats {
    let mut it = clique.payoffs.iter();
    let first = it.next().cloned().unwrap_or_else(BigRational::zero);
    let mut lo = first.clone();
    let mut hi = first;
    for v in it {
        if *v < lo {
            lo = v.clone();
        }
        if *v > hi {
            hi = v.clone();
        }
    }
    CliqueStats {
        range: &hi - &lo,
        u: hi,
        l: lo,
    }
}

/// How the clique structure classifies the game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameClass {
    /// Every clique has exactly two members.
    Polymatrix,
    /// Every player owns exactly one clique (which then equals its
    /// neighborhood).
    NormalFormGraphical,
    General,
}

/// A game: per-player action counts and the list of local cliques.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameDefinition {
    /// Action count per player; players are identified by index.
    pub actions: Vec<usize>,
    pub cliques: Vec<LocalClique>,
}

impl GameDefinition {
    pub fn num_players(&self) -> usize {
        self.actions.len()
    }

    /// Action-count dimensions of a clique's members, in member order.
    pub fn clique_dims(&self, clique: &LocalClique) -> Vec<usize> {
        clique.members.iter().map(|&m| self.actions[m]).collect()
    }

    /// Payoff entry for a full joint action of the clique members.
    pub fn clique_entry<'a>(
        &self,
        clique: &'a LocalClique,
        member_actions: &[usize],
    ) -> &'a BigRational {
        let dims = self.clique_dims(clique);
        &clique.payoffs[LocalClique::flat_index(&dims, member_actions)]
    }
}

/// Structural quantities derived from the clique sets.
#[derive(Debug, Clone)]
pub struct StructureStats {
    /// Clique indices owned by each player, in input order.
    pub cliques_of: Vec<Vec<usize>>,
    /// Clique count per player.
    pub kappa_i: Vec<usize>,
    pub kappa: usize,
    /// Largest clique size per player (0 for players with no cliques).
    pub kappa_prime_i: Vec<usize>,
    pub kappa_prime: usize,
    /// Neighborhood of each player: union of its cliques, always containing
    /// the player itself, sorted ascending.
    pub neighborhoods: Vec<Vec<PlayerId>>,
    /// Players affected by each player: `j` is affected by `i` when `i` is in
    /// `j`'s neighborhood and `j != i`.
    pub affected: Vec<Vec<PlayerId>>,
    pub k_i: Vec<usize>,
    pub k: usize,
    pub class: GameClass,
    /// For polymatrix games: `(partner, clique index)` per player, one entry
    /// per owned edge, sorted by partner.
    pub edges_of: Vec<Vec<(PlayerId, usize)>>,
}

impl StructureStats {
    /// Clique index of the edge matrix `i` owns toward `j`, if any.
    pub fn edge_clique(&self, i: PlayerId, j: PlayerId) -> Option<usize> {
        self.edges_of[i]
            .iter()
            .find(|(p, _)| *p == j)
            .map(|(_, c)| *c)
    }
}

/// Validate all game invariants and derive structure statistics.
///
/// Fails with [`ModelError::Malformed`] when a clique is not owner-first, has
/// duplicate or out-of-range members, or has the wrong number of payoff
/// entries; also when a player has no actions.
pub fn validate_game(game: &GameDefinition) -> Result<StructureStats, ModelError> {
    let n = game.num_players();
    for (i, &m) in game.actions.iter().enumerate() {
        if m == 0 {
            return Err(ModelError::Malformed(format!("player {i} has no actions")));
        }
    }
    let mut cliques_of = vec![Vec::new(); n];
    for (idx, clique) in game.cliques.iter().enumerate() {
        if clique.owner >= n {
            return Err(ModelError::Malformed(format!(
                "clique {idx}: owner {} is not a player",
                clique.owner
            )));
        }
        if clique.members.first() != Some(&clique.owner) {
            return Err(ModelError::Malformed(format!(
                "clique {idx}: owner {} must be the first member",
                clique.owner
            )));
        }
        let mut seen = BTreeSet::new();
        for &m in &clique.members {
            if m >= n {
                return Err(ModelError::Malformed(format!(
                    "clique {idx}: member {m} is not a player"
                )));
            }
            if !seen.insert(m) {
                return Err(ModelError::Malformed(format!(
                    "clique {idx}: duplicate member {m}"
                )));
            }
        }
        let expected: usize = clique.members.iter().map(|&m| game.actions[m]).product();
        if clique.payoffs.len() != expected {
            return Err(ModelError::Malformed(format!(
                "clique {idx}: expected {expected} payoff entries, got {}",
                clique.payoffs.len()
            )));
        }
        cliques_of[clique.owner].push(idx);
    }

    let kappa_i: Vec<usize> = cliques_of.iter().map(|c| c.len()).collect();
    let kappa = kappa_i.iter().copied().max().unwrap_or(0);
    let kappa_prime_i: Vec<usize> = cliques_of
        .iter()
        .map(|cs| {
            cs.iter()
                .map(|&c| game.cliques[c].members.len())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let kappa_prime = kappa_prime_i.iter().copied().max().unwrap_or(0);

    let mut neighborhoods: Vec<BTreeSet<PlayerId>> = (0..n).map(|i| BTreeSet::from([i])).collect();
    for clique in &game.cliques {
        for &m in &clique.members {
            neighborhoods[clique.owner].insert(m);
        }
    }
    let mut affected = vec![Vec::new(); n];
    for (j, nbrs) in neighborhoods.iter().enumerate() {
        for &i in nbrs {
            if i != j {
                affected[i].push(j);
            }
        }
    }
    let neighborhoods: Vec<Vec<PlayerId>> =
        neighborhoods.into_iter().map(|s| s.into_iter().collect()).collect();
    let k_i: Vec<usize> = neighborhoods.iter().map(|nb| nb.len()).collect();
    let k = k_i.iter().copied().max().unwrap_or(1);

    let is_polymatrix =
        !game.cliques.is_empty() && game.cliques.iter().all(|c| c.members.len() == 2);
    let polymatrix_like = game.cliques.is_empty() || is_polymatrix;
    let is_graphical = kappa_i.iter().all(|&c| c == 1);
    let class = if polymatrix_like {
        GameClass::Polymatrix
    } else if is_graphical {
        GameClass::NormalFormGraphical
    } else {
        GameClass::General
    };

    let mut edges_of = vec![Vec::new(); n];
    if polymatrix_like {
        for (i, cs) in cliques_of.iter().enumerate() {
            for &c in cs {
                let partner = game.cliques[c].members[1];
                edges_of[i].push((partner, c));
            }
            edges_of[i].sort();
        }
    }

    Ok(StructureStats {
        cliques_of,
        kappa_i,
        kappa,
        kappa_prime_i,
        kappa_prime,
        neighborhoods,
        affected,
        k_i,
        k,
        class,
        edges_of,
    })
}

/// Exact local payoff of player `i` at a pure joint action (full profile).
pub fn exact_local_payoff(
    game: &GameDefinition,
    stats: &StructureStats,
    i: PlayerId,
    action: &[usize],
) -> BigRational {
    let mut total = BigRational::zero();
    for &c in &stats.cliques_of[i] {
        let clique = &game.cliques[c];
        let member_actions: Vec<usize> = clique.members.iter().map(|&m| action[m]).collect();
        total += game.clique_entry(clique, &member_actions);
    }
    total
}

/// Exact expected payoff of one clique with some members at fixed pure
/// actions and the rest mixing. `fixed` and `mixed` must partition the
/// members; each mixed strategy must sum to exactly 1.
pub fn exact_expected_clique_payoff(
    game: &GameDefinition,
    clique: &LocalClique,
    fixed: &[(PlayerId, usize)],
    mixed: &[(PlayerId, &[BigRational])],
) -> Result<BigRational, ModelError> {
    let fixed_map: BTreeMap<PlayerId, usize> = fixed.iter().copied().collect();
    let mixed_map: BTreeMap<PlayerId, &[BigRational]> = mixed.iter().copied().collect();
    for &m in &clique.members {
        match (fixed_map.contains_key(&m), mixed_map.get(&m)) {
            (true, None) => {}
            (false, Some(p)) => {
                if p.len() != game.actions[m] {
                    return Err(ModelError::DimensionMismatch(format!(
                        "strategy for player {m} has {} entries, expected {}",
                        p.len(),
                        game.actions[m]
                    )));
                }
                let total: BigRational = p.iter().cloned().sum();
                if !total.is_one() {
                    return Err(ModelError::UnnormalizedStrategy(m));
                }
            }
            _ => {
                return Err(ModelError::DimensionMismatch(format!(
                    "member {m} must appear in exactly one of fixed/mixed"
                )))
            }
        }
    }
    let dims = game.clique_dims(clique);
    let mut total = BigRational::zero();
    let mut actions = vec![0usize; clique.members.len()];
    expectation_rec(
        clique, &dims, &fixed_map, &mixed_map, 0, BigRational::one(), &mut actions, &mut total,
    );
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn expectation_rec(
    clique: &LocalClique,
    dims: &[usize],
    fixed: &BTreeMap<PlayerId, usize>,
    mixed: &BTreeMap<PlayerId, &[BigRational]>,
    pos: usize,
    weight: BigRational,
    actions: &mut Vec<usize>,
    total: &mut BigRational,
) {
    if pos == clique.members.len() {
        let idx = LocalClique::flat_index(dims, actions);
        *total += &weight * &clique.payoffs[idx];
        return;
    }
    let member = clique.members[pos];
    if let Some(&a) = fixed.get(&member) {
        actions[pos] = a;
        expectation_rec(clique, dims, fixed, mixed, pos + 1, weight, actions, total);
    } else {
        let p = mixed[&member];
        for (a, w) in p.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            actions[pos] = a;
            expectation_rec(
                clique,
                dims,
                fixed,
                mixed,
                pos + 1,
                &weight * w,
                actions,
                total,
            );
        }
    }
}

/// Per-player payoff bounds `(u_i, l_i)` of a polymatrix game:
/// `u_i = max_{a_i} sum_j max_{a_j} M_{i,j}(a_i, a_j)` and the symmetric
/// minimum. Runs in `|A_i| (deg_i + |A_i|)` time per player.
pub fn polymatrix_bounds(
    game: &GameDefinition,
    stats: &StructureStats,
    i: PlayerId,
) -> Result<(BigRational, BigRational), ModelError> {
    if stats.class != GameClass::Polymatrix {
        return Err(ModelError::NotPolymatrix);
    }
    let m = game.actions[i];
    let mut best_row = vec![BigRational::zero(); m];
    let mut worst_row = vec![BigRational::zero(); m];
    for &(_, c) in &stats.edges_of[i] {
        let clique = &game.cliques[c];
        let dims = game.clique_dims(clique);
        for a_i in 0..m {
            let mut row_max: Option<BigRational> = None;
            let mut row_min: Option<BigRational> = None;
            for a_j in 0..dims[1] {
                let v = &clique.payoffs[LocalClique::flat_index(&dims, &[a_i, a_j])];
                if row_max.as_ref().is_none_or(|x| v > x) {
                    row_max = Some(v.clone());
                }
                if row_min.as_ref().is_none_or(|x| v < x) {
                    row_min = Some(v.clone());
                }
            }
            best_row[a_i] += row_max.unwrap();
            worst_row[a_i] += row_min.unwrap();
        }
    }
    let u = best_row.into_iter().max().unwrap();
    let l = worst_row.into_iter().min().unwrap();
    Ok((u, l))
}

/// A polymatrix game rescaled so each non-degenerate player's local payoff
/// spreads exactly `[0, 1]`, with the per-player affine transforms recorded.
#[derive(Debug, Clone)]
pub struct NormalizedPolymatrix {
    pub game: GameDefinition,
    /// Players whose payoff was constant: their matrices were zeroed and any
    /// strategy is a best response.
    pub degenerate: Vec<PlayerId>,
    /// Multiplier applied to player i's payoffs (`1/(u_i - l_i)`, or 1 for
    /// degenerate players). Regrets in the original scale are regrets in the
    /// normalized scale divided by this factor.
    pub scale: Vec<BigRational>,
}

/// Affinely rescale each player of a polymatrix game so its total local
/// payoff spreads exactly `[0, 1]`. The shift `l_i` is spread uniformly over
/// the player's `d_i` edge matrices; individual entries may land outside
/// `[0, 1]`. Best-response sets are unchanged since each player's payoff is
/// transformed by a positive affine map.
#[allow(clippy::needless_range_loop)] // player ids index several parallel tables
pub fn normalize_polymatrix(
    game: &GameDefinition,
    stats: &StructureStats,
) -> Result<NormalizedPolymatrix, ModelError> {
    if stats.class != GameClass::Polymatrix {
        return Err(ModelError::NotPolymatrix);
    }
    let n = game.num_players();
    let mut out = game.clone();
    let mut degenerate = Vec::new();
    let mut scale = vec![BigRational::one(); n];
    for i in 0..n {
        if stats.edges_of[i].is_empty() {
            degenerate.push(i);
            continue;
        }
        let (u, l) = polymatrix_bounds(game, stats, i)?;
        let spread = &u - &l;
        if spread.is_zero() {
            for &(_, c) in &stats.edges_of[i] {
                for v in &mut out.cliques[c].payoffs {
                    *v = BigRational::zero();
                }
            }
            degenerate.push(i);
            continue;
        }
        let d_i = BigRational::from_integer(BigInt::from(stats.edges_of[i].len()));
        let shift = &l / &d_i;
        scale[i] = spread.recip();
        for &(_, c) in &stats.edges_of[i] {
            for v in &mut out.cliques[c].payoffs {
                *v = (&*v - &shift) * &scale[i];
            }
        }
    }
    Ok(NormalizedPolymatrix {
        game: out,
        degenerate,
        scale,
    })
}

/// Order in which a node's children are visited.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChildOrder {
    Ascending,
    Descending,
}

/// A rooted spanning tree (or forest) of the game's primal graph.
///
/// For disconnected games every component gets its own root; `root` is the
/// designated primary root. Every size-2 clique must be a tree edge.
#[derive(Debug, Clone)]
pub struct RootedTree {
    pub root: PlayerId,
    pub parent: Vec<Option<PlayerId>>,
    pub children: Vec<Vec<PlayerId>>,
    pub component_roots: Vec<PlayerId>,
}

impl RootedTree {
    /// Build the rooted tree of a game's interaction graph. For polymatrix
    /// games the edges are the size-2 cliques; for graphical games (one
    /// clique per player) they are the neighborhood pairs. Errors if a
    /// player owns two matrices for the same edge.
    pub fn for_game(
        game: &GameDefinition,
        root: PlayerId,
        order: ChildOrder,
    ) -> Result<Self, ModelError> {
        let n = game.num_players();
        let graphical = game.cliques.len() == n
            && (0..n).all(|i| game.cliques.iter().filter(|c| c.owner == i).count() == 1);
        let mut edges = Vec::new();
        let mut seen_edges = BTreeSet::new();
        for clique in &game.cliques {
            if clique.members.len() == 2 {
                let (a, b) = (clique.members[0], clique.members[1]);
                let key = (a.min(b), a.max(b));
                if !seen_edges.insert((clique.owner, key)) {
                    return Err(ModelError::NotATree(format!(
                        "player {} owns two matrices for edge {key:?}",
                        clique.owner
                    )));
                }
                edges.push((a, b));
            } else if graphical {
                for &m in &clique.members[1..] {
                    edges.push((clique.owner, m));
                }
            }
            // Larger cliques of general games ride on the polymatrix edges;
            // they impose no edges of their own here.
        }
        Self::from_edges(n, &edges, root, order)
    }

    /// Build a rooted spanning tree (or forest) from explicit undirected
    /// edges. Duplicate edges are merged; cycles are rejected.
    pub fn from_edges(
        n: usize,
        edges: &[(PlayerId, PlayerId)],
        root: PlayerId,
        order: ChildOrder,
    ) -> Result<Self, ModelError> {
        if root >= n {
            return Err(ModelError::Malformed(format!("root {root} is not a player")));
        }
        let mut adjacency: Vec<BTreeSet<PlayerId>> = vec![BTreeSet::new(); n];
        let mut edge_count = 0usize;
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(ModelError::Malformed(format!("bad edge ({a}, {b})")));
            }
            if adjacency[a].insert(b) {
                adjacency[b].insert(a);
                edge_count += 1;
            }
        }
        let mut parent = vec![None; n];
        let mut children: Vec<Vec<PlayerId>> = vec![Vec::new(); n];
        let mut visited = vec![false; n];
        let mut component_roots = Vec::new();
        let mut visit_count = 0usize;
        let mut start_order: Vec<PlayerId> = vec![root];
        start_order.extend((0..n).filter(|&i| i != root));
        for start in start_order {
            if visited[start] {
                continue;
            }
            component_roots.push(start);
            visited[start] = true;
            visit_count += 1;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                let mut kids: Vec<PlayerId> = adjacency[v]
                    .iter()
                    .copied()
                    .filter(|&w| w != parent[v].unwrap_or(usize::MAX))
                    .collect();
                kids.sort_unstable();
                if order == ChildOrder::Descending {
                    kids.reverse();
                }
                for w in kids {
                    if visited[w] {
                        return Err(ModelError::NotATree(format!(
                            "cycle through players {v} and {w}"
                        )));
                    }
                    visited[w] = true;
                    visit_count += 1;
                    parent[w] = Some(v);
                    children[v].push(w);
                    queue.push_back(w);
                }
            }
        }
        debug_assert_eq!(visit_count, n);
        debug_assert_eq!(edge_count, n - component_roots.len());
        Ok(RootedTree {
            root,
            parent,
            children,
            component_roots,
        })
    }

    /// Nodes in leaves-to-root order (children always precede parents).
    pub fn bottom_up(&self) -> Vec<PlayerId> {
        let mut order = Vec::with_capacity(self.parent.len());
        let mut stack: Vec<PlayerId> = self.component_roots.clone();
        while let Some(v) = stack.pop() {
            order.push(v);
            stack.extend(self.children[v].iter().copied());
        }
        order.reverse();
        order
    }
}

/// Test fixture: the worked three-neighbor star with parameterized 2x2 edge
/// matrices (same family as `gen::gen_example_player1`).
#[cfg(test)]
pub(crate) fn example_star_matrices(
    b: &BigRational,
    c: &BigRational,
    gamma: &BigRational,
) -> (Vec<BigRational>, Vec<BigRational>) {
    let one = BigRational::one();
    let two = crate::ratio::int(2);
    let m12 = vec![
        &one + &two * b,
        &one + &two * b - gamma,
        gamma - &two * c,
        -(&two * c),
    ];
    let m13 = vec![-b.clone(), -b - gamma, c + gamma, c.clone()];
    (m12, m13)
}
