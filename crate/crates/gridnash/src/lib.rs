//! Approximate mixed-strategy Nash equilibria for tree-structured graphical
//! multi-hypermatrix games.
//!
//! The pipeline: describe a game as a set of local-clique payoff hypermatrices
//! ([`model`]), build per-player probability grids and payoff lattices
//! ([`discretize`]), then either run the two-pass tree dynamic program
//! ([`dp`]) or materialize the induced constraint-satisfaction problem and
//! solve it by backtracking ([`csp`]). Every returned profile is certified by
//! an exact rational best-response regret check ([`verify`]) that is fully
//! independent of the discretized solvers.
//!
//! All payoff arithmetic is exact: payoffs are parsed from decimal strings
//! into big rationals and never touch floating point, so the feasibility
//! slack inequalities are decided exactly.
//!
//! # Example
//!
//! Solve a matching-pennies star for a 0.1-approximate equilibrium and check
//! the certificate:
//!
//! ```
//! use gridnash::discretize::plan_simple;
//! use gridnash::dp::{solve_polymatrix_tree, SolveOptions};
//! use gridnash::gen::{gen_star_matching_pennies, MpOrientation, RewardPair};
//! use gridnash::model::{normalize_polymatrix, validate_game, ChildOrder, RootedTree};
//! use gridnash::ratio::parse_rational;
//!
//! let epsilon = parse_rational("0.1").unwrap();
//! let game = gen_star_matching_pennies(5, MpOrientation::CenterMatches, &RewardPair::default());
//! let stats = validate_game(&game).unwrap();
//! let norm = normalize_polymatrix(&game, &stats).unwrap();
//! let nstats = validate_game(&norm.game).unwrap();
//! let tree = RootedTree::for_game(&norm.game, 0, ChildOrder::Ascending).unwrap();
//! let plan = plan_simple(&norm.game, &nstats, &epsilon).unwrap();
//!
//! let profile =
//!     solve_polymatrix_tree(&norm.game, &nstats, &tree, &plan, SolveOptions::default()).unwrap();
//! assert!(profile.regret.overall); // exact regrets within epsilon, certified
//! ```

pub mod bench;
pub mod cli;
pub mod csp;
pub mod discretize;
pub mod docs;
pub mod dp;
pub mod gen;
pub mod model;
pub mod ratio;
pub mod verify;

pub use discretize::{DiscretizationPlan, GridMixedStrategy, Variant};
pub use model::{GameDefinition, LocalClique, RootedTree, StructureStats};
pub use verify::RegretReport;
