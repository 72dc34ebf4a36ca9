//! Instance generators: matching-pennies stars, seeded random tree
//! polymatrix games (Pruefer construction), random path graphical games, and
//! the three-neighbor star fixture with parameterized payoffs.

use crate::model::{GameDefinition, LocalClique, PlayerId};
use crate::ratio::{int, parse_rational, ratio};
use num::rational::BigRational;
use num::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
}

/// Which endpoint of each star edge wants to match the other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpOrientation {
    CenterMatches,
    LeavesMatch,
}

impl MpOrientation {
    pub fn name(self) -> &'static str {
        match self {
            MpOrientation::CenterMatches => "center-matches",
            MpOrientation::LeavesMatch => "leaves-match",
        }
    }
}

/// Payoffs of the matcher and the mismatcher on success (both get 0
/// otherwise).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewardPair {
    pub matcher: BigRational,
    pub mismatcher: BigRational,
}

impl Default for RewardPair {
    fn default() -> Self {
        RewardPair { matcher: BigRational::one(), mismatcher: BigRational::one() }
    }
}

fn matcher_matrix(reward: &BigRational) -> Vec<BigRational> {
    // 1 if actions equal else 0, scaled.
    vec![reward.clone(), BigRational::zero(), BigRational::zero(), reward.clone()]
}

fn mismatcher_matrix(reward: &BigRational) -> Vec<BigRational> {
    vec![BigRational::zero(), reward.clone(), reward.clone(), BigRational::zero()]
}

/// An `n`-player star (center id 0) where every edge plays matching pennies
/// with the given orientation and success rewards.
pub fn gen_star_matching_pennies(
    n: usize,
    orientation: MpOrientation,
    reward: &RewardPair,
) -> GameDefinition {
    assert!(n >= 2, "a star needs a center and at least one leaf");
    let mut cliques = Vec::with_capacity(2 * (n - 1));
    for leaf in 1..n {
        let (center_payoffs, leaf_payoffs) = match orientation {
            MpOrientation::CenterMatches => {
                (matcher_matrix(&reward.matcher), mismatcher_matrix(&reward.mismatcher))
            }
            MpOrientation::LeavesMatch => {
                (mismatcher_matrix(&reward.mismatcher), matcher_matrix(&reward.matcher))
            }
        };
        cliques.push(LocalClique { owner: 0, members: vec![0, leaf], payoffs: center_payoffs });
        cliques.push(LocalClique { owner: leaf, members: vec![leaf, 0], payoffs: leaf_payoffs });
    }
    GameDefinition { actions: vec![2; n], cliques }
}

/// Payoff sampling range for the random generators: rationals on the grid
/// `lo + k (hi - lo) / denom`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayoffRange {
    pub lo: BigRational,
    pub hi: BigRational,
    pub denom: u64,
}

impl Default for PayoffRange {
    fn default() -> Self {
        PayoffRange { lo: BigRational::zero(), hi: BigRational::one(), denom: 100 }
    }
}

impl PayoffRange {
    fn sample(&self, rng: &mut ChaCha8Rng) -> BigRational {
        let k = rng.gen_range(0..=self.denom);
        &self.lo + (&self.hi - &self.lo) * ratio(k as i64, self.denom as i64)
    }
}

/// Uniform random labeled tree on `n` nodes from a Pruefer sequence drawn
/// from the seeded generator. Edges come back sorted.
fn random_tree_edges(n: usize, rng: &mut ChaCha8Rng) -> Vec<(PlayerId, PlayerId)> {
    match n {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1)],
        _ => {
            let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
            let mut degree = vec![1usize; n];
            for &v in &seq {
                degree[v] += 1;
            }
            let mut edges = Vec::with_capacity(n - 1);
            // Smallest-leaf decoding with a scan pointer.
            let mut ptr = 0;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            let mut leaf = ptr;
            for &v in &seq {
                edges.push((leaf.min(v), leaf.max(v)));
                degree[v] -= 1;
                if degree[v] == 1 && v < ptr {
                    leaf = v;
                } else {
                    ptr += 1;
                    while degree[ptr] != 1 {
                        ptr += 1;
                    }
                    leaf = ptr;
                }
            }
            let last = (0..n).rfind(|&v| degree[v] == 1 && v != leaf);
            edges.push((leaf.min(last.unwrap()), leaf.max(last.unwrap())));
            edges.sort_unstable();
            edges
        }
    }
}

/// Seeded random tree polymatrix game: a uniform random labeled tree where
/// each edge carries two independent `m x m` matrices with entries on the
/// declared payoff grid. Identical seeds give identical games.
pub fn gen_random_tree_polymatrix(
    n: usize,
    m: usize,
    seed: u64,
    range: &PayoffRange,
) -> GameDefinition {
    assert!(n >= 1 && m >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = random_tree_edges(n, &mut rng);
    let mut cliques = Vec::with_capacity(2 * edges.len());
    for &(a, b) in &edges {
        for (owner, partner) in [(a, b), (b, a)] {
            let payoffs: Vec<BigRational> =
                (0..m * m).map(|_| range.sample(&mut rng)).collect();
            cliques.push(LocalClique { owner, members: vec![owner, partner], payoffs });
        }
    }
    GameDefinition { actions: vec![m; n], cliques }
}

/// Seeded random normal-form graphical game on a path (every neighborhood
/// has at most three players); each player owns one table over its
/// neighborhood with entries on the payoff grid.
pub fn gen_random_path_graphical(
    n: usize,
    m: usize,
    seed: u64,
    range: &PayoffRange,
) -> GameDefinition {
    assert!(n >= 1 && m >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cliques = Vec::with_capacity(n);
    for i in 0..n {
        let mut members = vec![i];
        if i > 0 {
            members.push(i - 1);
        }
        if i + 1 < n {
            members.push(i + 1);
        }
        let len = m.pow(members.len() as u32);
        let payoffs: Vec<BigRational> = (0..len).map(|_| range.sample(&mut rng)).collect();
        cliques.push(LocalClique { owner: i, members, payoffs });
    }
    GameDefinition { actions: vec![m; n], cliques }
}

/// The worked star fixture: player 0 against neighbors 1..3 with
/// ```text
///   M_{0,1} = [[1+2b, 1+2b-g], [g-2c, -2c]]
///   M_{0,2} = M_{0,3} = [[-b, -b-g], [c+g, c]]
/// ```
/// for `b, c > 0` and `0 < g < 1/3`; the neighbors' own matrices are zero.
/// The summed local payoff of player 0 spreads exactly `[0, 1]`.
pub fn gen_example_player1(
    b: &BigRational,
    c: &BigRational,
    gamma: &BigRational,
) -> Result<GameDefinition, GenError> {
    if !b.is_positive() || !c.is_positive() {
        return Err(GenError::ParameterOutOfRange("b and c must be positive".into()));
    }
    let third = ratio(1, 3);
    if !gamma.is_positive() || *gamma >= third {
        return Err(GenError::ParameterOutOfRange(
            "gamma must lie strictly between 0 and 1/3".into(),
        ));
    }
    let one = BigRational::one();
    let two = int(2);
    let m01 = vec![
        &one + &two * b,
        &one + &two * b - gamma,
        gamma - &two * c,
        -(&two * c),
    ];
    let m02 = vec![-b.clone(), -b - gamma, c + gamma, c.clone()];
    let zeros = vec![BigRational::zero(); 4];
    let mut cliques = vec![
        LocalClique { owner: 0, members: vec![0, 1], payoffs: m01 },
        LocalClique { owner: 0, members: vec![0, 2], payoffs: m02.clone() },
        LocalClique { owner: 0, members: vec![0, 3], payoffs: m02 },
    ];
    for leaf in 1..=3 {
        cliques.push(LocalClique { owner: leaf, members: vec![leaf, 0], payoffs: zeros.clone() });
    }
    Ok(GameDefinition { actions: vec![2; 4], cliques })
}

/// Convenience wrapper taking decimal strings (used by the CLI).
pub fn gen_example_player1_str(b: &str, c: &str, gamma: &str) -> Result<GameDefinition, GenError> {
    let parse = |s: &str| {
        parse_rational(s).map_err(|e| GenError::ParameterOutOfRange(format!("{s:?}: {e}")))
    };
    gen_example_player1(&parse(b)?, &parse(c)?, &parse(gamma)?)
}

use num::Signed;
