//! Two-pass dynamic programming over a rooted tree: a collection pass sends
//! feasibility tables from the leaves to the root, an assignment pass unwinds
//! witnesses back down. One solver handles tree polymatrix games with
//! partial-sum vectors, one handles normal-form graphical games with partial
//! expectation tables.
//!
//! Messages record, per mixed-strategy pair `(p_i, p_j)` of a tree arc,
//! whether the subtree under `i` can be completed so that `i` best-responds
//! up to the slack. Partial sums are carried as integer lattice indices and
//! canonicalized up to an additive constant per vector, which both the
//! best-response and the chain checks are invariant to.

mod normalform;
mod polymatrix;
mod reach;

pub use normalform::{collect_normalform_messages, solve_normalform_tree, NormalformMessages};
pub use polymatrix::{
    collect_polymatrix_messages, enumerate_polymatrix_profiles, reachable_partial_sums,
    solve_polymatrix_tree, PolymatrixMessages,
};

use crate::discretize::{DiscretizationPlan, GridMixedStrategy, Variant};
use crate::model::{ModelError, PlayerId};
use crate::verify::{RegretReport, VerifyError};
use num::rational::BigRational;
use thiserror::Error;

/// Which best-response slack the feasibility checks use.
///
/// `Proven` budgets the slack as two thirds of epsilon, leaving one third for
/// the lattice projection error, so the exact-regret certificate follows
/// unconditionally. `Literal` uses the full epsilon as slack, which is the
/// textbook message-passing form; its outputs can miss the exact-epsilon
/// certificate by up to the projection budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SlackMode {
    #[default]
    Proven,
    Literal,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveOptions {
    pub slack: SlackMode,
}

#[derive(Debug, Error)]
pub enum DpError {
    /// No feasible strategy at the root. Under theorem sizing this cannot
    /// happen (an equilibrium always exists and rounds onto the grid), so it
    /// signals a sizing or arithmetic bug; the message carries diagnostics.
    #[error("no feasible assignment at root {root}: {detail}")]
    InfeasibleAtRoot { root: PlayerId, detail: String },
    /// The internal exact-regret certificate failed; always a bug.
    #[error("certificate check failed: {0}")]
    CertificateFailed(String),
    #[error("solver does not support this input: {0}")]
    Unsupported(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// Grid dimensions the solve ran with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanSummary {
    pub variant: Variant,
    pub s: Vec<u64>,
    pub s_prime: Vec<u64>,
}

impl PlanSummary {
    pub fn of(plan: &DiscretizationPlan) -> Self {
        PlanSummary {
            variant: plan.variant,
            s: plan.players.iter().map(|p| p.grid.s).collect(),
            s_prime: plan.players.iter().map(|p| p.s_prime).collect(),
        }
    }
}

/// A solved profile: one grid strategy per player plus the exact-regret
/// certificate computed before returning.
#[derive(Debug, Clone)]
pub struct EquilibriumProfile {
    pub strategies: Vec<GridMixedStrategy>,
    pub epsilon: BigRational,
    pub regret: RegretReport,
    pub plan: PlanSummary,
    /// Final canonical partial-sum (or partial-expectation) witness per
    /// player, where one was produced.
    pub witnesses: Vec<Option<Vec<i64>>>,
}

impl EquilibriumProfile {
    pub fn rational_profile(&self) -> Vec<Vec<BigRational>> {
        self.strategies.iter().map(|s| s.to_rationals()).collect()
    }
}

/// Slack divided by the lattice step, as a reduced `num/den` integer pair.
fn slack_over_tau(
    slack: &BigRational,
    tau: &BigRational,
) -> Result<(i128, i128), DpError> {
    let q = slack / tau;
    let num: i128 = q
        .numer()
        .try_into()
        .map_err(|_| DpError::TooLarge("slack ratio exceeds i128".into()))?;
    let den: i128 = q
        .denom()
        .try_into()
        .map_err(|_| DpError::TooLarge("slack ratio exceeds i128".into()))?;
    Ok((num, den))
}

/// Best-response slack in payoff units for the polymatrix solver.
fn polymatrix_slack(epsilon: &BigRational, mode: SlackMode) -> BigRational {
    match mode {
        SlackMode::Proven => epsilon * BigRational::new(2.into(), 3.into()),
        SlackMode::Literal => epsilon.clone(),
    }
}
