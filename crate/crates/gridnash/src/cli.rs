//! Command-line interface: solve, verify, generate, csp export/solve, and
//! the star benchmark. Machine output goes to files or stdout; diagnostics
//! go to stderr.
//!
//! Exit codes: 0 success/verified, 1 verification failed, 2 input error,
//! 3 infeasible, 4 resource limit.

use crate::bench;
use crate::csp::{self, SolveOutcome};
use crate::discretize::{plan_refined, plan_simple};
use crate::docs::{self, ProvenanceDoc};
use crate::dp::{self, DpError, SlackMode, SolveOptions};
use crate::gen;
use crate::model::{
    normalize_polymatrix, validate_game, ChildOrder, GameClass, GameDefinition, RootedTree,
    StructureStats,
};
use crate::ratio::{format_rational, parse_rational};
use crate::verify;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num::rational::BigRational;
use num::Signed;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_LIMIT: i32 = 4;

#[derive(Parser)]
#[command(
    name = "gridnash",
    about = "Approximate Nash equilibria of tree polymatrix and graphical games \
             via joint probability/payoff discretization",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a game and emit a certified profile document.
    Solve(SolveArgs),
    /// Check a profile against a game with exact arithmetic.
    Verify(VerifyArgs),
    /// Write a generated instance to a game document.
    #[command(subcommand)]
    Generate(GenerateCmd),
    /// Export or solve the game-induced CSP.
    #[command(subcommand)]
    Csp(CspCmd),
    /// Runtime benchmarks.
    #[command(subcommand)]
    Bench(BenchCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Simple,
    Refined,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Polymatrix,
    Normalform,
}

#[derive(Clone, Copy, ValueEnum)]
enum SlackArg {
    Proven,
    Literal,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChildOrderArg {
    Asc,
    Desc,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Auto,
    Normalized,
    Original,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrientationArg {
    CenterMatches,
    LeavesMatch,
}

impl From<OrientationArg> for gen::MpOrientation {
    fn from(o: OrientationArg) -> Self {
        match o {
            OrientationArg::CenterMatches => gen::MpOrientation::CenterMatches,
            OrientationArg::LeavesMatch => gen::MpOrientation::LeavesMatch,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Game document to solve.
    #[arg(long)]
    game: PathBuf,
    /// Target additive approximation, e.g. 0.1 or 1/10.
    #[arg(long)]
    epsilon: String,
    /// Discretization variant (polymatrix solver: simple; normal-form
    /// solver: refined).
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Solver; defaults to polymatrix when every clique is an edge,
    /// normalform when every player owns one clique.
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
    /// Root player of the tree.
    #[arg(long, default_value_t = 0)]
    root: usize,
    /// Children visiting order.
    #[arg(long, value_enum, default_value = "asc")]
    child_order: ChildOrderArg,
    /// Best-response slack mode: proven keeps the exact-regret certificate;
    /// literal uses the bare epsilon for comparison runs.
    #[arg(long, value_enum, default_value = "proven")]
    slack: SlackArg,
    /// Output path for the profile document (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional path for a JSON dump of the collection-pass feasibility
    /// tables (polymatrix solver only).
    #[arg(long)]
    messages: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long)]
    profile: PathBuf,
    #[arg(long)]
    epsilon: String,
    /// Payoff scale to verify in; auto follows the profile's provenance.
    #[arg(long, value_enum, default_value = "auto")]
    scale: ScaleArg,
}

#[derive(Subcommand)]
enum GenerateCmd {
    /// Matching-pennies star with center 0.
    StarMp {
        /// Total number of players (center plus leaves).
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "center-matches")]
        orientation: OrientationArg,
        /// Matcher's success payoff.
        #[arg(long, default_value = "1")]
        matcher_reward: String,
        /// Mismatcher's success payoff.
        #[arg(long, default_value = "1")]
        mismatcher_reward: String,
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Seeded uniform random tree polymatrix game.
    RandomTree {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long)]
        seed: u64,
        /// Payoff grid lower bound.
        #[arg(long, default_value = "0")]
        lo: String,
        /// Payoff grid upper bound.
        #[arg(long, default_value = "1")]
        hi: String,
        /// Payoff grid denominator.
        #[arg(long, default_value_t = 100)]
        denom: u64,
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// The three-neighbor star fixture with parameterized payoffs.
    Example1 {
        #[arg(long, default_value = "1")]
        b: String,
        #[arg(long, default_value = "1")]
        c: String,
        #[arg(long, default_value = "0.1")]
        gamma: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum CspCmd {
    /// Materialize the game-induced CSP as a self-contained document.
    Export {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        epsilon: String,
        #[arg(long, value_enum, default_value = "simple")]
        variant: VariantArg,
        /// Root used to derive tree-consistent clique orders (polymatrix
        /// games on trees only; otherwise input order is kept).
        #[arg(long, default_value_t = 0)]
        root: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve an exported CSP by exhaustive backtracking.
    Solve {
        #[arg(long)]
        csp: PathBuf,
        #[arg(long, default_value_t = 10_000_000)]
        node_limit: u64,
        /// Output path for the satisfying profile (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Solve matching-pennies stars of growing degree and emit CSV.
    Star {
        /// Comma-separated center degrees, ascending (e.g. 10,25,50,100).
        #[arg(long)]
        sizes: String,
        #[arg(long)]
        epsilon: String,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long, value_enum, default_value = "center-matches")]
        orientation: OrientationArg,
        /// CSV output path (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own help/version output with code 0.
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Generate(cmd) => cmd_generate(cmd),
        Command::Csp(cmd) => cmd_csp(cmd),
        Command::Bench(cmd) => cmd_bench(cmd),
    }
}

fn fail(code: i32, message: impl std::fmt::Display) -> i32 {
    eprintln!("error: {message}");
    code
}

fn read_to_string(path: &Path) -> Result<String, i32> {
    fs::read_to_string(path).map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), i32> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_epsilon(text: &str) -> Result<BigRational, i32> {
    let eps =
        parse_rational(text).map_err(|e| fail(EXIT_INPUT, format!("bad epsilon: {e}")))?;
    if !eps.is_positive() {
        return Err(fail(EXIT_INPUT, "epsilon must be positive"));
    }
    Ok(eps)
}

fn load_game(path: &Path) -> Result<(docs::GameDocument, GameDefinition, StructureStats), i32> {
    let text = read_to_string(path)?;
    let (doc, game) =
        docs::parse_game(&text).map_err(|e| fail(EXIT_INPUT, e))?;
    let stats = validate_game(&game).map_err(|e| fail(EXIT_INPUT, e))?;
    Ok((doc, game, stats))
}

fn dp_exit_code(err: &DpError) -> i32 {
    match err {
        DpError::InfeasibleAtRoot { .. } | DpError::CertificateFailed(_) => EXIT_INFEASIBLE,
        DpError::TooLarge(_) => EXIT_LIMIT,
        _ => EXIT_INPUT,
    }
}

fn cmd_solve(args: SolveArgs) -> i32 {
    match solve_inner(args) {
        Ok(code) => code,
        Err(code) => code,
    }
}

fn solve_inner(args: SolveArgs) -> Result<i32, i32> {
    let epsilon = parse_epsilon(&args.epsilon)?;
    let (_, game, stats) = load_game(&args.game)?;
    let child_order = match args.child_order {
        ChildOrderArg::Asc => ChildOrder::Ascending,
        ChildOrderArg::Desc => ChildOrder::Descending,
    };
    let solver = match args.solver {
        Some(s) => s,
        None => {
            if stats.class == GameClass::Polymatrix {
                SolverArg::Polymatrix
            } else if stats.kappa_i.iter().all(|&k| k == 1) {
                SolverArg::Normalform
            } else {
                return Err(fail(
                    EXIT_INPUT,
                    "no tree solver for general multi-hypermatrix games; \
                     use `csp export` and `csp solve`",
                ));
            }
        }
    };
    let opts = SolveOptions {
        slack: match args.slack {
            SlackArg::Proven => SlackMode::Proven,
            SlackArg::Literal => SlackMode::Literal,
        },
    };
    let slack_name = match args.slack {
        SlackArg::Proven => "proven",
        SlackArg::Literal => "literal",
    };

    let (profile, variant_name, solver_name, scale) = match solver {
        SolverArg::Polymatrix => {
            if matches!(args.variant, Some(VariantArg::Refined)) {
                return Err(fail(
                    EXIT_INPUT,
                    "the polymatrix tree solver uses the simple variant",
                ));
            }
            if stats.class != GameClass::Polymatrix {
                return Err(fail(EXIT_INPUT, "game is not polymatrix"));
            }
            let norm = normalize_polymatrix(&game, &stats)
                .map_err(|e| fail(EXIT_INPUT, e))?;
            if !norm.degenerate.is_empty() {
                eprintln!(
                    "note: players {:?} have constant payoffs and are universally indifferent",
                    norm.degenerate
                );
            }
            let nstats = validate_game(&norm.game).map_err(|e| fail(EXIT_INPUT, e))?;
            let tree = RootedTree::for_game(&norm.game, args.root, child_order)
                .map_err(|e| fail(EXIT_INPUT, e))?;
            let plan = plan_simple(&norm.game, &nstats, &epsilon)
                .map_err(|e| fail(EXIT_INPUT, e))?;
            if let Some(path) = &args.messages {
                let messages =
                    dp::collect_polymatrix_messages(&norm.game, &nstats, &tree, &plan, opts)
                        .map_err(|e| fail(dp_exit_code(&e), e))?;
                let dump = messages_json(&tree, &messages);
                write_output(Some(path), &(dump.to_string() + "\n"))?;
            }
            let profile =
                dp::solve_polymatrix_tree(&norm.game, &nstats, &tree, &plan, opts)
                    .map_err(|e| fail(dp_exit_code(&e), e))?;
            (profile, "simple", "polymatrix", "normalized")
        }
        SolverArg::Normalform => {
            if matches!(args.variant, Some(VariantArg::Simple)) {
                return Err(fail(
                    EXIT_INPUT,
                    "the normal-form tree solver uses the refined variant",
                ));
            }
            if stats.kappa_i.iter().any(|&k| k != 1) {
                return Err(fail(EXIT_INPUT, "game is not a normal-form graphical game"));
            }
            let mut edges = Vec::new();
            for i in 0..game.num_players() {
                for &j in &stats.neighborhoods[i] {
                    if j > i {
                        edges.push((i, j));
                    }
                }
            }
            let tree = RootedTree::from_edges(game.num_players(), &edges, args.root, child_order)
                .map_err(|e| fail(EXIT_INPUT, e))?;
            let orders = csp::default_orders(&game, &stats, None);
            let plan = plan_refined(&game, &stats, &epsilon, &orders)
                .map_err(|e| fail(EXIT_INPUT, e))?;
            let profile = dp::solve_normalform_tree(&game, &stats, &tree, &plan, opts)
                .map_err(|e| fail(dp_exit_code(&e), e))?;
            (profile, "refined", "normalform", "original")
        }
    };

    let doc = docs::ProfileDocument::new(
        &profile.strategies,
        &epsilon,
        Some((&profile.regret, scale)),
        ProvenanceDoc {
            solver: solver_name.to_string(),
            variant: variant_name.to_string(),
            root: args.root,
            slack: slack_name.to_string(),
            seed: None,
            payoff_scale: scale.to_string(),
        },
    );
    write_output(args.out.as_deref(), &docs::serialize_profile(&doc))?;
    eprintln!(
        "solved: max regret {} <= epsilon {} ({} scale)",
        format_rational(profile.regret.max_regret()),
        format_rational(&epsilon),
        scale
    );
    Ok(EXIT_OK)
}

/// Per-arc feasibility bitmaps as JSON; no golden values exist for these,
/// the dump is for inspection and plotting.
fn messages_json(
    tree: &RootedTree,
    messages: &dp::PolymatrixMessages,
) -> serde_json::Value {
    let mut arcs = Vec::new();
    for (child, table) in {
        let mut items: Vec<_> = messages.t_tables.iter().collect();
        items.sort_by_key(|(k, _)| **k);
        items
    } {
        let parent = tree.parent[*child].expect("non-root has a parent");
        let bits: String = table.iter().map(|&b| if b { '1' } else { '0' }).collect();
        arcs.push(serde_json::json!({
            "child": child,
            "parent": parent,
            "feasible": bits,
        }));
    }
    serde_json::json!({
        "schema_version": 1,
        "reach_states": messages.reach_states,
        "arcs": arcs,
    })
}

fn cmd_verify(args: VerifyArgs) -> i32 {
    match verify_inner(args) {
        Ok(code) => code,
        Err(code) => code,
    }
}

fn verify_inner(args: VerifyArgs) -> Result<i32, i32> {
    let epsilon = parse_epsilon(&args.epsilon)?;
    let (_, game, stats) = load_game(&args.game)?;
    let text = read_to_string(&args.profile)?;
    let doc = docs::parse_profile(&text).map_err(|e| fail(EXIT_INPUT, e))?;
    let strategies = doc.to_strategies().map_err(|e| fail(EXIT_INPUT, e))?;
    let normalized = match args.scale {
        ScaleArg::Normalized => true,
        ScaleArg::Original => false,
        ScaleArg::Auto => doc.provenance.payoff_scale == "normalized",
    };
    let (game, stats) = if normalized {
        let norm = normalize_polymatrix(&game, &stats).map_err(|e| fail(EXIT_INPUT, e))?;
        let nstats = validate_game(&norm.game).map_err(|e| fail(EXIT_INPUT, e))?;
        (norm.game, nstats)
    } else {
        (game, stats)
    };
    let profile: Vec<Vec<BigRational>> = strategies.iter().map(|s| s.to_rationals()).collect();
    let report = verify::exact_regret(&game, &stats, &profile, &epsilon)
        .map_err(|e| fail(EXIT_INPUT, e))?;
    for (i, (r, ok)) in report.regrets.iter().zip(&report.verdicts).enumerate() {
        eprintln!(
            "player {i}: regret {} ({})",
            format_rational(r),
            if *ok { "pass" } else { "FAIL" }
        );
    }
    let verdict = serde_json::json!({
        "all_pass": report.overall,
        "epsilon": format_rational(&epsilon),
        "scale": if normalized { "normalized" } else { "original" },
        "regrets": report.regrets.iter().map(format_rational).collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&verdict).unwrap());
    Ok(if report.overall { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn cmd_generate(cmd: GenerateCmd) -> i32 {
    match generate_inner(cmd) {
        Ok(code) => code,
        Err(code) => code,
    }
}

fn generate_inner(cmd: GenerateCmd) -> Result<i32, i32> {
    let (game, name, metadata, out) = match cmd {
        GenerateCmd::StarMp { n, orientation, matcher_reward, mismatcher_reward, name, out } => {
            if n < 2 {
                return Err(fail(EXIT_INPUT, "star needs at least 2 players"));
            }
            let reward = gen::RewardPair {
                matcher: parse_rational(&matcher_reward)
                    .map_err(|e| fail(EXIT_INPUT, e))?,
                mismatcher: parse_rational(&mismatcher_reward)
                    .map_err(|e| fail(EXIT_INPUT, e))?,
            };
            let orientation: gen::MpOrientation = orientation.into();
            let game = gen::gen_star_matching_pennies(n, orientation, &reward);
            let metadata = BTreeMap::from([
                ("generator".to_string(), "star-mp".to_string()),
                ("orientation".to_string(), orientation.name().to_string()),
                ("n".to_string(), n.to_string()),
            ]);
            (game, name.or(Some(format!("star-mp-{n}"))), metadata, out)
        }
        GenerateCmd::RandomTree { n, m, seed, lo, hi, denom, name, out } => {
            if n < 1 || m < 2 || denom == 0 {
                return Err(fail(EXIT_INPUT, "need n >= 1, m >= 2, denom >= 1"));
            }
            let range = gen::PayoffRange {
                lo: parse_rational(&lo).map_err(|e| fail(EXIT_INPUT, e))?,
                hi: parse_rational(&hi).map_err(|e| fail(EXIT_INPUT, e))?,
                denom,
            };
            if range.lo > range.hi {
                return Err(fail(EXIT_INPUT, "payoff range is empty"));
            }
            let game = gen::gen_random_tree_polymatrix(n, m, seed, &range);
            let metadata = BTreeMap::from([
                ("generator".to_string(), "random-tree".to_string()),
                ("seed".to_string(), seed.to_string()),
                ("n".to_string(), n.to_string()),
                ("m".to_string(), m.to_string()),
                ("denom".to_string(), denom.to_string()),
            ]);
            (game, name.or(Some(format!("random-tree-{n}-{m}-{seed}"))), metadata, out)
        }
        GenerateCmd::Example1 { b, c, gamma, out } => {
            let game = gen::gen_example_player1_str(&b, &c, &gamma)
                .map_err(|e| fail(EXIT_INPUT, e))?;
            let metadata = BTreeMap::from([
                ("generator".to_string(), "example1".to_string()),
                ("b".to_string(), b),
                ("c".to_string(), c),
                ("gamma".to_string(), gamma),
            ]);
            (game, Some("example1".to_string()), metadata, out)
        }
    };
    let doc = docs::GameDocument::from_game(&game, name, metadata);
    let text = docs::serialize_game(&doc).map_err(|e| fail(EXIT_INPUT, e))?;
    write_output(Some(&out), &text)?;
    Ok(EXIT_OK)
}

fn cmd_csp(cmd: CspCmd) -> i32 {
    match csp_inner(cmd) {
        Ok(code) => code,
        Err(code) => code,
    }
}

fn csp_inner(cmd: CspCmd) -> Result<i32, i32> {
    match cmd {
        CspCmd::Export { game, epsilon, variant, root, out } => {
            let epsilon = parse_epsilon(&epsilon)?;
            let (_, game, stats) = load_game(&game)?;
            let tree = RootedTree::for_game(&game, root, ChildOrder::Ascending).ok();
            let orders = csp::default_orders(&game, &stats, tree.as_ref());
            let plan = match variant {
                VariantArg::Simple => plan_simple(&game, &stats, &epsilon),
                VariantArg::Refined => plan_refined(&game, &stats, &epsilon, &orders),
            }
            .map_err(|e| fail(EXIT_INPUT, e))?;
            let instance = csp::build_csp(&game, &stats, &plan, &orders)
                .map_err(|e| fail(EXIT_INPUT, e))?;
            let doc = docs::csp_to_document(&instance);
            write_output(Some(&out), &docs::serialize_csp(&doc))?;
            eprintln!(
                "exported {} variables, {} constraints",
                instance.vars.len(),
                instance.constraints.len()
            );
            Ok(EXIT_OK)
        }
        CspCmd::Solve { csp: path, node_limit, out } => {
            let text = read_to_string(&path)?;
            let doc = docs::parse_csp(&text).map_err(|e| fail(EXIT_INPUT, e))?;
            let (instance, stats) =
                docs::csp_from_document(&doc).map_err(|e| fail(EXIT_INPUT, e))?;
            match instance.solve_backtracking(node_limit) {
                SolveOutcome::Satisfiable(asg) => {
                    let strategies = instance.p_part(&asg);
                    let profile: Vec<Vec<BigRational>> =
                        strategies.iter().map(|s| s.to_rationals()).collect();
                    let report = verify::exact_regret(
                        &instance.game,
                        &stats,
                        &profile,
                        &instance.plan.epsilon,
                    )
                    .map_err(|e| fail(EXIT_INPUT, e))?;
                    let pdoc = docs::ProfileDocument::new(
                        &strategies,
                        &instance.plan.epsilon,
                        Some((&report, "original")),
                        ProvenanceDoc {
                            solver: "csp-backtracking".into(),
                            variant: doc.variant.clone(),
                            root: 0,
                            slack: "proven".into(),
                            seed: None,
                            payoff_scale: "original".into(),
                        },
                    );
                    write_output(out.as_deref(), &docs::serialize_profile(&pdoc))?;
                    eprintln!(
                        "satisfiable; exact max regret {}",
                        format_rational(report.max_regret())
                    );
                    Ok(EXIT_OK)
                }
                SolveOutcome::Infeasible => {
                    eprintln!("infeasible (exhaustive within the node limit)");
                    Ok(EXIT_INFEASIBLE)
                }
                SolveOutcome::LimitExceeded => {
                    eprintln!("node limit {node_limit} exceeded; result inconclusive");
                    Ok(EXIT_LIMIT)
                }
            }
        }
    }
}

fn cmd_bench(cmd: BenchCmd) -> i32 {
    match bench_inner(cmd) {
        Ok(code) => code,
        Err(code) => code,
    }
}

fn bench_inner(cmd: BenchCmd) -> Result<i32, i32> {
    match cmd {
        BenchCmd::Star { sizes, epsilon, repeats, orientation, out } => {
            let epsilon = parse_epsilon(&epsilon)?;
            let sizes: Vec<usize> = sizes
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|e| fail(EXIT_INPUT, format!("bad sizes list: {e}")))?;
            let report = bench::bench_star(&sizes, &epsilon, repeats, orientation.into())
                .map_err(|e| fail(EXIT_INPUT, e))?;
            let mut csv = Vec::new();
            bench::write_csv(&report, &mut csv).expect("vec write");
            write_output(out.as_deref(), &String::from_utf8(csv).unwrap())?;
            for row in &report.rows {
                eprintln!(
                    "k={} median={:.4}s s_leaf={} s_center={} table_bytes={}",
                    row.k, row.median_seconds, row.s_leaf, row.s_center, row.table_bytes
                );
            }
            if let Some(slope) = report.loglog_slope {
                println!("loglog_slope={slope:.4}");
            }
            Ok(EXIT_OK)
        }
    }
}
