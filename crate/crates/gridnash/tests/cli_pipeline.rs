//! End-to-end CLI checks: the generate -> solve -> verify chain, the CSP
//! export/solve path, the benchmark CSV format, and the documented exit
//! codes.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gridnash"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_solve_verify_chain() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("star5.json");
    let profile = dir.path().join("profile.json");

    let (code, _, _) = run(&["generate", "star-mp", "--n", "5", "--out", path_str(&game)]);
    assert_eq!(code, 0);

    let (code, _, stderr) = run(&[
        "solve",
        "--game",
        path_str(&game),
        "--epsilon",
        "0.1",
        "--out",
        path_str(&profile),
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    assert!(stderr.contains("max regret"));

    let (code, stdout, _) = run(&[
        "verify",
        "--game",
        path_str(&game),
        "--profile",
        path_str(&profile),
        "--epsilon",
        "0.1",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("\"all_pass\": true"));
}

#[test]
fn random_tree_chain_and_desc_order() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("tree.json");
    let profile = dir.path().join("profile.json");
    run(&[
        "generate", "random-tree", "--n", "7", "--m", "2", "--seed", "7", "--out",
        path_str(&game),
    ]);
    let (code, _, stderr) = run(&[
        "solve",
        "--game",
        path_str(&game),
        "--epsilon",
        "0.25",
        "--child-order",
        "desc",
        "--out",
        path_str(&profile),
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let (code, _, _) = run(&[
        "verify",
        "--game",
        path_str(&game),
        "--profile",
        path_str(&profile),
        "--epsilon",
        "0.25",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn solver_output_is_deterministic_across_processes() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("tree.json");
    run(&[
        "generate", "random-tree", "--n", "6", "--m", "2", "--seed", "5", "--out",
        path_str(&game),
    ]);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let (code, _, _) = run(&[
            "solve",
            "--game",
            path_str(&game),
            "--epsilon",
            "0.25",
            "--out",
            path_str(out),
        ]);
        assert_eq!(code, 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn verify_in_original_scale() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("star5.json");
    let profile = dir.path().join("profile.json");
    run(&["generate", "star-mp", "--n", "5", "--out", path_str(&game)]);
    run(&[
        "solve",
        "--game",
        path_str(&game),
        "--epsilon",
        "0.1",
        "--out",
        path_str(&profile),
    ]);
    let (code, stdout, _) = run(&[
        "verify",
        "--game",
        path_str(&game),
        "--profile",
        path_str(&profile),
        "--epsilon",
        "0.1",
        "--scale",
        "original",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("\"scale\": \"original\""));
}

#[test]
fn refined_csp_export_and_solve() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("pair.json");
    let cspfile = dir.path().join("refined.json");
    run(&["generate", "star-mp", "--n", "2", "--out", path_str(&game)]);
    let (code, _, _) = run(&[
        "csp",
        "export",
        "--game",
        path_str(&game),
        "--epsilon",
        "0.5",
        "--variant",
        "refined",
        "--out",
        path_str(&cspfile),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&cspfile).unwrap();
    assert!(text.contains("\"variant\": \"refined\""));
    assert!(text.contains("partial_exp"));
    let (code, _, stderr) = run(&[
        "csp",
        "solve",
        "--csp",
        path_str(&cspfile),
        "--node-limit",
        "500000000",
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
}

#[test]
fn generator_determinism_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let (code, _, _) = run(&[
            "generate",
            "random-tree",
            "--n",
            "6",
            "--m",
            "2",
            "--seed",
            "42",
            "--out",
            path_str(out),
        ]);
        assert_eq!(code, 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn broken_profile_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("pair.json");
    let profile = dir.path().join("profile.json");
    run(&["generate", "star-mp", "--n", "2", "--out", path_str(&game)]);
    let (code, _, _) = run(&[
        "solve",
        "--game",
        path_str(&game),
        "--epsilon",
        "0.25",
        "--out",
        path_str(&profile),
    ]);
    assert_eq!(code, 0);
    // Corrupt the profile: both players pure on action 0 (the mismatcher
    // then regrets a full unit).
    let text = std::fs::read_to_string(&profile).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    for strat in doc["strategies"].as_array_mut().unwrap() {
        let s = strat["s"].as_u64().unwrap();
        strat["numerators"] = serde_json::json!([s, 0]);
    }
    std::fs::write(&profile, serde_json::to_string(&doc).unwrap()).unwrap();
    let (code, stdout, stderr) = run(&[
        "verify",
        "--game",
        path_str(&game),
        "--profile",
        path_str(&profile),
        "--epsilon",
        "0.25",
    ]);
    assert_eq!(code, 1, "stdout: {stdout}");
    assert!(stderr.contains("FAIL"));
    assert!(stdout.contains("\"all_pass\": false"));
}

#[test]
fn nonpositive_epsilon_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("pair.json");
    run(&["generate", "star-mp", "--n", "2", "--out", path_str(&game)]);
    let (code, _, stderr) =
        run(&["solve", "--game", path_str(&game), "--epsilon", "0"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("positive"));
    let (code, _, _) = run(&["solve", "--game", path_str(&game), "--epsilon", "-0.5"]);
    assert_eq!(code, 2);
}

#[test]
fn missing_game_file_is_input_error() {
    let (code, _, _) = run(&["solve", "--game", "/nonexistent.json", "--epsilon", "0.5"]);
    assert_eq!(code, 2);
}

#[test]
fn csp_export_and_solve_chain() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("star3.json");
    let cspfile = dir.path().join("csp.json");
    let solution = dir.path().join("solution.json");
    run(&["generate", "star-mp", "--n", "3", "--out", path_str(&game)]);
    let (code, _, _) = run(&[
        "csp",
        "export",
        "--game",
        path_str(&game),
        "--epsilon",
        "0.5",
        "--out",
        path_str(&cspfile),
    ]);
    assert_eq!(code, 0);
    let (code, _, stderr) = run(&[
        "csp",
        "solve",
        "--csp",
        path_str(&cspfile),
        "--node-limit",
        "200000000",
        "--out",
        path_str(&solution),
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    assert!(stderr.contains("satisfiable"));

    // A tiny node limit is a resource-limit exit.
    let (code, _, _) = run(&["csp", "solve", "--csp", path_str(&cspfile), "--node-limit", "3"]);
    assert_eq!(code, 4);
}

#[test]
fn bench_csv_format() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bench.csv");
    let (code, stdout, _) = run(&[
        "bench",
        "star",
        "--sizes",
        "2,4",
        "--epsilon",
        "0.25",
        "--repeats",
        "2",
        "--out",
        path_str(&csv),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("loglog_slope="));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,median_seconds,s_leaf,s_center,table_bytes"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn example1_fixture_generates_and_exports() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("example1.json");
    let (code, _, _) = run(&["generate", "example1", "--out", path_str(&game)]);
    assert_eq!(code, 0);
    // Out-of-range gamma is rejected.
    let (code, _, _) = run(&[
        "generate",
        "example1",
        "--gamma",
        "1/3",
        "--out",
        path_str(&dir.path().join("bad.json")),
    ]);
    assert_eq!(code, 2);
}

#[test]
fn normalform_solver_via_cli() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("path.json");
    let profile = dir.path().join("profile.json");
    // No generator subcommand exists for graphical games; write the document
    // through the library.
    let g = gridnash::gen::gen_random_path_graphical(
        4,
        2,
        11,
        &gridnash::gen::PayoffRange::default(),
    );
    let doc = gridnash::docs::GameDocument::from_game(&g, None, Default::default());
    std::fs::write(&game, gridnash::docs::serialize_game(&doc).unwrap()).unwrap();
    let (code, _, stderr) = run(&[
        "solve",
        "--game",
        path_str(&game),
        "--epsilon",
        "0.25",
        "--out",
        path_str(&profile),
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let text = std::fs::read_to_string(&profile).unwrap();
    assert!(text.contains("\"solver\": \"normalform\""));
    let (code, _, _) = run(&[
        "verify",
        "--game",
        path_str(&game),
        "--profile",
        path_str(&profile),
        "--epsilon",
        "0.25",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn root_override() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("star5.json");
    let profile = dir.path().join("profile.json");
    run(&["generate", "star-mp", "--n", "5", "--out", path_str(&game)]);
    let (code, _, stderr) = run(&[
        "solve",
        "--game",
        path_str(&game),
        "--epsilon",
        "0.1",
        "--root",
        "2",
        "--out",
        path_str(&profile),
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let text = std::fs::read_to_string(&profile).unwrap();
    assert!(text.contains("\"root\": 2"));
}

#[test]
fn literal_slack_flag_runs() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("star4.json");
    let profile = dir.path().join("profile.json");
    run(&["generate", "star-mp", "--n", "4", "--out", path_str(&game)]);
    let (code, _, stderr) = run(&[
        "solve",
        "--game",
        path_str(&game),
        "--epsilon",
        "0.2",
        "--slack",
        "literal",
        "--out",
        path_str(&profile),
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let text = std::fs::read_to_string(&profile).unwrap();
    assert!(text.contains("\"slack\": \"literal\""));
}
