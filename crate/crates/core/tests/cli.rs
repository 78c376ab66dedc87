mod common;

use std::path::PathBuf;
use std::process::Command;

use halfblind::cli::run_cli;
use serde_json::Value;

use common::{fixture, fixture_path, FIXTURES};

fn run(args: &[&str]) -> halfblind::cli::CliOutput {
    let mut full = vec!["halfblind".to_string()];
    full.extend(args.iter().map(|a| a.to_string()));
    run_cli(full)
}

fn fx(name: &str) -> String {
    fixture_path(name).to_string_lossy().into_owned()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn check_fig1_human() {
    let out = run(&["check", &fx("fig1.hb")]);
    assert_eq!(out.code, 0);
    assert!(
        out.stdout
            .starts_with("leaktight: yes\nanswer: maxmin_one\nwitness: (a)#\n"),
        "{}",
        out.stdout
    );
    assert!(out.stderr.is_empty());
}

#[test]
fn check_fig2_json() {
    let out = run(&["check", &fx("fig2.hb"), "--json"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("\"answer\":\"not_maxmin_one\""));
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["leaktight"], Value::Bool(true));
    assert_eq!(v["witness_expr"], Value::Null);
}

#[test]
fn exit_codes_follow_the_answer() {
    let expect = [
        ("fig1.hb", 0),
        ("fig2.hb", 1),
        ("fig3_pa.hb", 2),
        ("fig4_gadget.hb", 0),
        ("fig5_game.hb", 2),
    ];
    for (name, code) in expect {
        assert_eq!(run(&["check", &fx(name)]).code, code, "{name}");
    }
    let out = run(&["check", &fx("fig2.hb"), "--max-beliefs", "3", "--json"]);
    assert_eq!(out.code, 3);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["answer"], "budget_exhausted");
    assert_eq!(v["leaktight"], Value::Null);
    assert!(v["budget"].as_str().unwrap().contains("cap 3"));
}

#[test]
fn human_and_json_agree() {
    for name in FIXTURES {
        let text = run(&["check", &fx(name)]);
        let json = run(&["check", &fx(name), "--json"]);
        assert_eq!(text.code, json.code);
        let v: Value = serde_json::from_str(&json.stdout).unwrap();
        let field = |key: &str| {
            text.stdout
                .lines()
                .find_map(|l| l.strip_prefix(&format!("{key}: ")))
                .map(str::to_string)
        };
        let leaktight = match &v["leaktight"] {
            Value::Bool(true) => "yes",
            Value::Bool(false) => "no",
            _ => "unknown",
        };
        assert_eq!(field("leaktight").as_deref(), Some(leaktight), "{name}");
        assert_eq!(field("answer").as_deref(), v["answer"].as_str(), "{name}");
        assert_eq!(
            field("witness").as_deref(),
            v["witness_expr"].as_str(),
            "{name}"
        );
        assert_eq!(
            field("beliefs"),
            Some(v["sizes"]["beliefs"].to_string()),
            "{name}"
        );
        assert_eq!(
            field("elements"),
            Some(v["sizes"]["elements"].to_string()),
            "{name}"
        );
        let leaks: Vec<String> = v["leaks"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| format!("({}, {})", p[0].as_str().unwrap(), p[1].as_str().unwrap()))
            .collect();
        let want = if leaks.is_empty() {
            "none".to_string()
        } else {
            leaks.join(" ")
        };
        assert_eq!(field("leaks"), Some(want), "{name}");
    }
}

#[test]
fn monoid_dump_prints_generators() {
    let g = fixture("fig2.hb");
    let out = run(&["monoid", &fx("fig2.hb"), "--dump"]);
    assert_eq!(out.code, 0);
    let block = out
        .stdout
        .split("\n\n")
        .find(|b| b.starts_with("belief 1: [a]"))
        .expect("generator a is dumped")
        .to_string()
        + "\n";
    for table in g.stationary_tables() {
        let m = g.support_matrix(0, &table).to_string();
        assert!(block.contains(&m), "missing\n{m}in\n{block}");
    }
    assert!(block.contains("1 0 0 1\n1 0 0 1\n0 0 1 0\n0 0 0 1\n"));
    assert!(
        out.stdout.contains("\nbeliefs: 7\nelements: 20\n"),
        "{}",
        out.stdout
    );
}

#[test]
fn monoid_json_sizes() {
    let out = run(&["monoid", &fx("fig3_pa.hb"), "--json"]);
    assert_eq!(out.code, 0);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["beliefs"], 32);
}

#[test]
fn eval_fig1() {
    let strategy = scratch(
        "alpha.strat",
        "step 1: 1=alpha\nstep 2: 1=alpha\nstep 3: 1=alpha\n",
    );
    let out = run(&[
        "eval",
        &fx("fig1.hb"),
        "--word",
        "aaa",
        "--strategy",
        strategy.to_str().unwrap(),
    ]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(out.stdout, "i: 1/8\nf: 7/8\nfinal: 7/8\n");

    let strategy = scratch("beta.strat", "step 1: 1=beta\n");
    let out = run(&[
        "eval",
        &fx("fig1.hb"),
        "--word",
        "a",
        "--strategy",
        strategy.to_str().unwrap(),
        "--json",
    ]);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["final_mass"], "1");

    let out = run(&["eval", &fx("fig1.hb"), "--word", "aab", "--json"]);
    assert_eq!(out.code, 4);
    assert!(out.stderr.contains('b'));
}

#[test]
fn eval_rejects_bad_strategy() {
    let strategy = scratch("bad.strat", "step 4: 1=alpha\n");
    let out = run(&[
        "eval",
        &fx("fig1.hb"),
        "--word",
        "aaa",
        "--strategy",
        strategy.to_str().unwrap(),
    ]);
    assert_eq!(out.code, 4);
    assert!(out.stdout.is_empty());
}

#[test]
fn maxmin_fig1() {
    let out = run(&["maxmin", &fx("fig1.hb"), "--max-len", "5"]);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout, "value: 31/32\nword: aaaaa\n");
    let out = run(&[
        "maxmin",
        &fx("fig2.hb"),
        "--max-len",
        "4",
        "--json",
        "--threads",
        "2",
    ]);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["value"], "7/32");
    let out = run(&["maxmin", &fx("fig1.hb"), "--max-len", "13"]);
    assert_eq!(out.code, 4);
}

#[test]
fn materialize() {
    let out = run(&["materialize", "--expr", "(a)#", "--n", "3"]);
    assert_eq!((out.code, out.stdout.as_str()), (0, "aaa\n"));
    let out = run(&[
        "materialize",
        "--expr",
        "(a (c1 c2 R)# Rbar)#",
        "--n",
        "2",
        "--game",
        &fx("fig5_game.hb"),
    ]);
    assert_eq!(
        out.stdout,
        "a c1 c2 R c1 c2 R Rbar a c1 c2 R c1 c2 R Rbar\n"
    );
    let out = run(&["materialize", "--expr", "((((a)#)#)#)#", "--n", "100"]);
    assert_eq!(out.code, 4);
}

#[test]
fn dot_export() {
    let out = run(&["dot", &fx("fig2.hb")]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.starts_with("digraph game {"));
    assert!(out.stdout.contains("f [shape=doublecircle]"));
}

#[test]
fn invalid_games_exit_4() {
    let fig1 = std::fs::read_to_string(fixture_path("fig1.hb")).unwrap();
    let bad = scratch("bad_sum.hb", &fig1.replace("2 1/2", "2 1/3"));
    let out = run(&["check", bad.to_str().unwrap()]);
    assert_eq!(out.code, 4);
    assert!(out.stderr.contains("line 10"), "{}", out.stderr);
    assert!(out.stdout.is_empty());

    let missing = scratch("missing.hb", &fig1.replace("trans f a 2 1\n", ""));
    let out = run(&["check", missing.to_str().unwrap()]);
    assert_eq!(out.code, 4);
    assert!(
        out.stderr.contains("missing maximizer action"),
        "{}",
        out.stderr
    );
}

#[test]
fn binary_reports_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_halfblind");
    let out = Command::new(exe)
        .args(["check", &fx("fig3_pa.hb")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stdout).unwrap().contains("leaks: "));
    let out = Command::new(exe).arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = Command::new(exe).args(["check"]).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
}
