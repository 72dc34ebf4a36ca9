//! Versioned JSON documents: games, solved profiles, and exported CSP
//! instances. Payoffs travel as exact decimal or fraction strings and
//! round-trip losslessly; nothing here ever touches floating point.

use crate::csp::{self, CspInstance};
use crate::discretize::{
    DiscretizationPlan, GridMixedStrategy, PayoffLattice, PlayerPlan, ProbabilityGrid, Variant,
};
use crate::model::{GameDefinition, LocalClique, StructureStats};
use crate::ratio::{format_rational, parse_rational};
use crate::verify::RegretReport;
use num::rational::BigRational;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DocError {
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
}

fn schema_err<T>(path: impl Into<String>, message: impl Into<String>) -> Result<T, DocError> {
    Err(DocError::Schema { path: path.into(), message: message.into() })
}

// ---------------------------------------------------------------------------
// Game documents

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct PlayerDoc {
    pub id: usize,
    pub actions: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct CliqueDoc {
    pub owner: usize,
    pub members: Vec<usize>,
    /// Row-major in member order (first member varies slowest), as exact
    /// decimal or `num/den` strings.
    pub payoffs: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct GameDocument {
    pub schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
    pub players: Vec<PlayerDoc>,
    pub cliques: Vec<CliqueDoc>,
}

impl GameDocument {
    pub fn from_game(
        game: &GameDefinition,
        name: Option<String>,
        metadata: BTreeMap<String, String>,
    ) -> Self {
        GameDocument {
            schema_version: SCHEMA_VERSION,
            name,
            metadata,
            players: game
                .actions
                .iter()
                .enumerate()
                .map(|(id, &actions)| PlayerDoc { id, actions })
                .collect(),
            cliques: game
                .cliques
                .iter()
                .map(|c| CliqueDoc {
                    owner: c.owner,
                    members: c.members.clone(),
                    payoffs: c.payoffs.iter().map(format_rational).collect(),
                })
                .collect(),
        }
    }

    pub fn to_game(&self) -> Result<GameDefinition, DocError> {
        if self.schema_version != SCHEMA_VERSION {
            return schema_err(
                "/schema_version",
                format!("unsupported version {}", self.schema_version),
            );
        }
        let n = self.players.len();
        let mut actions = vec![0usize; n];
        for (idx, p) in self.players.iter().enumerate() {
            if p.id != idx {
                return schema_err(
                    format!("/players/{idx}/id"),
                    format!("players must be listed in id order; expected {idx}, got {}", p.id),
                );
            }
            if p.actions == 0 {
                return schema_err(format!("/players/{idx}/actions"), "at least one action");
            }
            actions[idx] = p.actions;
        }
        let mut cliques = Vec::with_capacity(self.cliques.len());
        for (ci, c) in self.cliques.iter().enumerate() {
            for (mi, &m) in c.members.iter().enumerate() {
                if m >= n {
                    return schema_err(
                        format!("/cliques/{ci}/members/{mi}"),
                        format!("player {m} does not exist"),
                    );
                }
            }
            let expected: usize = c.members.iter().map(|&m| actions[m]).product();
            if c.payoffs.len() != expected {
                return schema_err(
                    format!("/cliques/{ci}/payoffs"),
                    format!("expected {expected} entries, got {}", c.payoffs.len()),
                );
            }
            let mut payoffs = Vec::with_capacity(expected);
            for (pi, s) in c.payoffs.iter().enumerate() {
                match parse_rational(s) {
                    Ok(v) => payoffs.push(v),
                    Err(e) => {
                        return schema_err(format!("/cliques/{ci}/payoffs/{pi}"), e);
                    }
                }
            }
            cliques.push(LocalClique { owner: c.owner, members: c.members.clone(), payoffs });
        }
        Ok(GameDefinition { actions, cliques })
    }

    /// Canonical form: cliques sorted by (owner, members), payoff strings
    /// re-rendered from their parsed values.
    pub fn canonicalize(&self) -> Result<GameDocument, DocError> {
        let game = self.to_game()?;
        let mut order: Vec<usize> = (0..game.cliques.len()).collect();
        order.sort_by(|&a, &b| {
            let ca = &game.cliques[a];
            let cb = &game.cliques[b];
            (ca.owner, &ca.members).cmp(&(cb.owner, &cb.members))
        });
        let sorted = GameDefinition {
            actions: game.actions.clone(),
            cliques: order.into_iter().map(|i| game.cliques[i].clone()).collect(),
        };
        Ok(GameDocument::from_game(&sorted, self.name.clone(), self.metadata.clone()))
    }
}

/// Parse a game document (strict JSON) and return it with the game it
/// describes.
pub fn parse_game(text: &str) -> Result<(GameDocument, GameDefinition), DocError> {
    let doc: GameDocument = serde_json::from_str(text)
        .map_err(|e| DocError::Schema { path: "/".into(), message: e.to_string() })?;
    let game = doc.to_game()?;
    Ok((doc, game))
}

/// Serialize a game document in canonical form.
pub fn serialize_game(doc: &GameDocument) -> Result<String, DocError> {
    let canonical = doc.canonicalize()?;
    Ok(serde_json::to_string_pretty(&canonical).expect("document serializes") + "\n")
}

// ---------------------------------------------------------------------------
// Profile documents

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct StrategyDoc {
    pub id: usize,
    pub s: u64,
    pub numerators: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct RegretDoc {
    pub per_player: Vec<String>,
    pub epsilon: String,
    pub all_pass: bool,
    /// Payoff scale the regrets were computed in: `normalized` or `original`.
    pub scale: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ProvenanceDoc {
    pub solver: String,
    pub variant: String,
    pub root: usize,
    pub slack: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub payoff_scale: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ProfileDocument {
    pub schema_version: u32,
    pub epsilon: String,
    pub strategies: Vec<StrategyDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regret: Option<RegretDoc>,
    pub provenance: ProvenanceDoc,
}

impl ProfileDocument {
    pub fn new(
        strategies: &[GridMixedStrategy],
        epsilon: &BigRational,
        regret: Option<(&RegretReport, &str)>,
        provenance: ProvenanceDoc,
    ) -> Self {
        ProfileDocument {
            schema_version: SCHEMA_VERSION,
            epsilon: format_rational(epsilon),
            strategies: strategies
                .iter()
                .map(|g| StrategyDoc { id: g.player, s: g.s, numerators: g.numerators.clone() })
                .collect(),
            regret: regret.map(|(r, scale)| RegretDoc {
                per_player: r.regrets.iter().map(format_rational).collect(),
                epsilon: format_rational(&r.epsilon),
                all_pass: r.overall,
                scale: scale.to_string(),
            }),
            provenance,
        }
    }

    pub fn to_strategies(&self) -> Result<Vec<GridMixedStrategy>, DocError> {
        let mut out = Vec::with_capacity(self.strategies.len());
        for (idx, s) in self.strategies.iter().enumerate() {
            if s.id != idx {
                return schema_err(
                    format!("/strategies/{idx}/id"),
                    "strategies must be listed in player order",
                );
            }
            if s.numerators.iter().sum::<u64>() != s.s {
                return schema_err(
                    format!("/strategies/{idx}/numerators"),
                    format!("numerators must sum to {}", s.s),
                );
            }
            out.push(GridMixedStrategy {
                player: s.id,
                s: s.s,
                numerators: s.numerators.clone(),
            });
        }
        Ok(out)
    }

    pub fn epsilon(&self) -> Result<BigRational, DocError> {
        parse_rational(&self.epsilon).map_err(|e| DocError::Schema {
            path: "/epsilon".into(),
            message: e,
        })
    }
}

pub fn parse_profile(text: &str) -> Result<ProfileDocument, DocError> {
    serde_json::from_str(text)
        .map_err(|e| DocError::Schema { path: "/".into(), message: e.to_string() })
}

pub fn serialize_profile(doc: &ProfileDocument) -> String {
    serde_json::to_string_pretty(doc).expect("document serializes") + "\n"
}

// ---------------------------------------------------------------------------
// CSP documents

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct PlayerPlanDoc {
    pub s: u64,
    pub tau: String,
    pub lo_index: i64,
    pub hi_index: i64,
    pub s_prime: u64,
    pub br_slack: String,
    pub indifferent: bool,
    pub sum_ranges: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct PlanDoc {
    pub epsilon: String,
    pub epsilon_sizing: String,
    pub variant: String,
    pub players: Vec<PlayerPlanDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainDoc {
    Grid { s: u64 },
    Lattice { lo: i64, hi: i64 },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct VarDoc {
    pub name: String,
    pub domain: DomainDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ConstraintDoc {
    pub kind: String,
    pub player: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub action: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clique: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<Vec<usize>>,
    pub scope: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct CspDocument {
    pub schema_version: u32,
    pub epsilon: String,
    pub variant: String,
    pub game: GameDocument,
    pub plan: PlanDoc,
    pub clique_orders: Vec<Vec<usize>>,
    pub variables: Vec<VarDoc>,
    pub constraints: Vec<ConstraintDoc>,
}

fn variant_name(v: Variant) -> &'static str {
    match v {
        Variant::Simple => "simple",
        Variant::Refined => "refined",
    }
}

fn variant_from(name: &str) -> Result<Variant, DocError> {
    match name {
        "simple" => Ok(Variant::Simple),
        "refined" => Ok(Variant::Refined),
        other => schema_err("/variant", format!("unknown variant {other:?}")),
    }
}

pub fn plan_to_doc(plan: &DiscretizationPlan) -> PlanDoc {
    PlanDoc {
        epsilon: format_rational(&plan.epsilon),
        epsilon_sizing: format_rational(&plan.epsilon_sizing),
        variant: variant_name(plan.variant).to_string(),
        players: plan
            .players
            .iter()
            .map(|p| PlayerPlanDoc {
                s: p.grid.s,
                tau: format_rational(&p.lattice.tau),
                lo_index: p.lattice.lo_index,
                hi_index: p.lattice.hi_index,
                s_prime: p.s_prime,
                br_slack: format_rational(&p.br_slack),
                indifferent: p.indifferent,
                sum_ranges: format_rational(&p.sum_ranges),
            })
            .collect(),
    }
}

pub fn plan_from_doc(doc: &PlanDoc) -> Result<DiscretizationPlan, DocError> {
    let parse = |path: &str, s: &str| {
        parse_rational(s).map_err(|e| DocError::Schema { path: path.into(), message: e })
    };
    let mut players = Vec::with_capacity(doc.players.len());
    for (i, p) in doc.players.iter().enumerate() {
        players.push(PlayerPlan {
            grid: ProbabilityGrid { s: p.s },
            lattice: PayoffLattice {
                tau: parse(&format!("/plan/players/{i}/tau"), &p.tau)?,
                lo_index: p.lo_index,
                hi_index: p.hi_index,
            },
            s_prime: p.s_prime,
            br_slack: parse(&format!("/plan/players/{i}/br_slack"), &p.br_slack)?,
            indifferent: p.indifferent,
            sum_ranges: parse(&format!("/plan/players/{i}/sum_ranges"), &p.sum_ranges)?,
        });
    }
    Ok(DiscretizationPlan {
        epsilon: parse("/plan/epsilon", &doc.epsilon)?,
        epsilon_sizing: parse("/plan/epsilon_sizing", &doc.epsilon_sizing)?,
        variant: variant_from(&doc.variant)?,
        players,
    })
}

/// Export a CSP instance as a self-contained document: the game, the plan,
/// the clique orders, and the symbolic variable/constraint lists.
pub fn csp_to_document(instance: &CspInstance) -> CspDocument {
    let name_of = |idx: usize| instance.vars[idx].name.clone();
    let variables = instance
        .vars
        .iter()
        .map(|v| VarDoc {
            name: v.name.clone(),
            domain: match v.domain {
                csp::Domain::Grid { s } => DomainDoc::Grid { s },
                csp::Domain::Lattice { lo, hi } => DomainDoc::Lattice { lo, hi },
            },
        })
        .collect();
    let constraints = instance
        .constraints
        .iter()
        .map(|c| {
            let scope = c.scope.iter().map(|&v| name_of(v)).collect();
            match &c.kind {
                csp::ConstraintKind::Normalization { player } => ConstraintDoc {
                    kind: "normalization".into(),
                    player: *player,
                    action: None,
                    l: None,
                    clique: None,
                    t: None,
                    residual: None,
                    scope,
                },
                csp::ConstraintKind::BestResponse { player, action } => ConstraintDoc {
                    kind: "best_response".into(),
                    player: *player,
                    action: Some(*action),
                    l: None,
                    clique: None,
                    t: None,
                    residual: None,
                    scope,
                },
                csp::ConstraintKind::PartialSum { player, l, action } => ConstraintDoc {
                    kind: "partial_sum".into(),
                    player: *player,
                    action: Some(*action),
                    l: Some(*l),
                    clique: None,
                    t: None,
                    residual: None,
                    scope,
                },
                csp::ConstraintKind::PartialExp { player, clique, t, residual } => ConstraintDoc {
                    kind: "partial_exp".into(),
                    player: *player,
                    action: None,
                    l: None,
                    clique: Some(*clique),
                    t: Some(*t),
                    residual: Some(residual.clone()),
                    scope,
                },
            }
        })
        .collect();
    CspDocument {
        schema_version: SCHEMA_VERSION,
        epsilon: format_rational(&instance.plan.epsilon),
        variant: variant_name(instance.plan.variant).to_string(),
        game: GameDocument::from_game(&instance.game, None, BTreeMap::new()),
        plan: plan_to_doc(&instance.plan),
        clique_orders: instance.orders.clone(),
        variables,
        constraints,
    }
}

/// Rebuild a CSP instance from its document. The variables and constraints
/// are reconstructed from the embedded game and plan, then checked against
/// the document's lists.
pub fn csp_from_document(
    doc: &CspDocument,
) -> Result<(CspInstance, StructureStats), DocError> {
    let game = doc.game.to_game()?;
    let stats = crate::model::validate_game(&game).map_err(|e| DocError::Schema {
        path: "/game".into(),
        message: e.to_string(),
    })?;
    let plan = plan_from_doc(&doc.plan)?;
    let instance = csp::build_csp(&game, &stats, &plan, &doc.clique_orders).map_err(|e| {
        DocError::Schema { path: "/clique_orders".into(), message: e.to_string() }
    })?;
    if instance.vars.len() != doc.variables.len() {
        return schema_err(
            "/variables",
            format!(
                "document lists {} variables but the instance has {}",
                doc.variables.len(),
                instance.vars.len()
            ),
        );
    }
    for (i, (v, d)) in instance.vars.iter().zip(&doc.variables).enumerate() {
        if v.name != d.name {
            return schema_err(
                format!("/variables/{i}/name"),
                format!("expected {:?}, got {:?}", v.name, d.name),
            );
        }
    }
    Ok((instance, stats))
}

pub fn parse_csp(text: &str) -> Result<CspDocument, DocError> {
    serde_json::from_str(text)
        .map_err(|e| DocError::Schema { path: "/".into(), message: e.to_string() })
}

pub fn serialize_csp(doc: &CspDocument) -> String {
    serde_json::to_string_pretty(doc).expect("document serializes") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::plan_simple;
    use crate::gen;
    use crate::model::validate_game;
    use crate::ratio::ratio;

    #[test]
    fn game_round_trip_is_identity_on_canonical_form() {
        for seed in 0..100u64 {
            let game = gen::gen_random_tree_polymatrix(
                3 + (seed as usize % 5),
                2 + (seed as usize % 2),
                seed,
                &gen::PayoffRange::default(),
            );
            let doc = GameDocument::from_game(&game, Some(format!("fuzz-{seed}")), BTreeMap::new());
            let text = serialize_game(&doc).unwrap();
            let (parsed, _) = parse_game(&text).unwrap();
            let again = serialize_game(&parsed).unwrap();
            assert_eq!(text, again, "seed {seed}");
        }
    }

    #[test]
    fn decimal_strings_are_exact() {
        let text = r#"{
            "schema_version": 1,
            "players": [{"id": 0, "actions": 2}],
            "cliques": [{"owner": 0, "members": [0], "payoffs": ["0.1", "-3/7"]}]
        }"#;
        let (_, game) = parse_game(text).unwrap();
        assert_eq!(game.cliques[0].payoffs[0], ratio(1, 10));
        assert_eq!(game.cliques[0].payoffs[1], ratio(-3, 7));
    }

    #[test]
    fn wrong_payoff_count_is_schema_error_with_path() {
        let text = r#"{
            "schema_version": 1,
            "players": [{"id": 0, "actions": 2}, {"id": 1, "actions": 2}, {"id": 2, "actions": 2}],
            "cliques": [{"owner": 0, "members": [0, 1, 2], "payoffs": ["0","0","0","0","0","0","0"]}]
        }"#;
        match parse_game(text) {
            Err(DocError::Schema { path, message }) => {
                assert_eq!(path, "/cliques/0/payoffs");
                assert!(message.contains("expected 8"));
            }
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn profile_round_trip() {
        let strategies = vec![
            GridMixedStrategy::new(0, 4, vec![2, 2]),
            GridMixedStrategy::new(1, 4, vec![0, 4]),
        ];
        let doc = ProfileDocument::new(
            &strategies,
            &ratio(1, 10),
            None,
            ProvenanceDoc {
                solver: "polymatrix".into(),
                variant: "simple".into(),
                root: 0,
                slack: "proven".into(),
                seed: Some(7),
                payoff_scale: "normalized".into(),
            },
        );
        let text = serialize_profile(&doc);
        let parsed = parse_profile(&text).unwrap();
        assert_eq!(parsed, doc);
        assert_eq!(parsed.to_strategies().unwrap(), strategies);
    }

    #[test]
    fn csp_document_round_trip() {
        let game = gen::gen_star_matching_pennies(
            3,
            gen::MpOrientation::CenterMatches,
            &gen::RewardPair::default(),
        );
        let stats = validate_game(&game).unwrap();
        let plan = plan_simple(&game, &stats, &ratio(1, 2)).unwrap();
        let orders = crate::csp::default_orders(&game, &stats, None);
        let instance = crate::csp::build_csp(&game, &stats, &plan, &orders).unwrap();
        let doc = csp_to_document(&instance);
        let text = serialize_csp(&doc);
        let parsed = parse_csp(&text).unwrap();
        let (rebuilt, _) = csp_from_document(&parsed).unwrap();
        assert_eq!(rebuilt.vars.len(), instance.vars.len());
        assert_eq!(rebuilt.constraints.len(), instance.constraints.len());
    }
}
