use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use isac_market::sim::{read_results, RESULT_COLUMNS};

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isac-market"))
        .args(args)
        .current_dir(dir)
        .env_remove("ISAC_MARKET_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const SMALL: [&str; 6] = ["--n-mus", "6", "--n-bss", "2", "--n-targets", "2"];

fn gen(dir: &Path, name: &str, extra: &[&str]) -> Output {
    let mut args = vec!["gen", "-o", name];
    args.extend(SMALL);
    args.extend(extra);
    bin(&args, dir)
}

#[test]
fn gen_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&gen(dir.path(), "a.json", &["--seed", "3"])), 0);
    assert_eq!(code(&gen(dir.path(), "b.json", &["--seed", "3"])), 0);
    assert_eq!(code(&gen(dir.path(), "c.json", &["--seed", "4"])), 0);
    let read = |n: &str| fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.json"), read("b.json"));
    assert_ne!(read("a.json"), read("c.json"));
}

#[test]
fn seed_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "flag.json", &["--seed", "21"]);
    let o = Command::new(env!("CARGO_BIN_EXE_isac-market"))
        .args(["gen", "-o", "env.json"])
        .args(SMALL)
        .current_dir(dir.path())
        .env("ISAC_MARKET_SEED", "21")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(dir.path().join("flag.json")).unwrap(), fs::read(dir.path().join("env.json")).unwrap());
}

#[test]
fn run_writes_table_metadata_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["run", "--n-trials", "3", "--strategies", "frbank,greedy", "--out-dir", "out"];
    args.extend(SMALL);
    let o = bin(&args, dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    let rows = read_results(fs::File::open(out.join("results.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 6);
    let header = fs::read_to_string(out.join("results.csv")).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, RESULT_COLUMNS.join(","));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["n_trials"], 3);
    assert_eq!(meta["master_seed"], 7);
    let trace = fs::read_to_string(out.join("traces/frbank.jsonl")).unwrap();
    assert_eq!(trace.lines().count(), 3);
}

#[test]
fn sweep_adds_axis_columns() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "sweep",
        "--axis",
        "overbooking",
        "--values",
        "0,0.2",
        "--n-trials",
        "2",
        "--strategies",
        "hybrid_o",
        "--out-dir",
        "o",
        "--no-traces",
    ];
    args.extend(SMALL);
    let o = bin(&args, dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_results(fs::File::open(dir.path().join("o/results.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    let values: Vec<f64> = rows.iter().map(|r| r.axis.as_ref().unwrap().1).collect();
    assert_eq!(values, [0.0, 0.0, 0.2, 0.2]);
}

#[test]
fn verify_passes_a_clean_matching() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "s.json", &[]);
    let o = bin(&["verify", "--scenario", "s.json"], dir.path());
    let text = stdout(&o);
    assert_eq!(code(&o), 0, "{text}");
    for name in ["convergence", "feasibility", "no-blocking-eviction", "no-blocking-addition", "local-pareto"] {
        assert!(text.contains(&format!("PASS {name}")), "{text}");
    }
}

#[test]
fn corrupted_contract_names_the_constraint() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "s.json", &[]);
    let bad = r#"[{"client":{"Mu":0},"bs":0,"bandwidth":5000,"power":1.0,"pay":1.0,"pel_u":0.5,"pel_s":0.3}]"#;
    fs::write(dir.path().join("c.json"), bad).unwrap();
    let o = bin(&["verify", "--scenario", "s.json", "--contracts", "c.json"], dir.path());
    let text = stdout(&o);
    assert_eq!(code(&o), 1, "{text}");
    assert!(text.contains("FAIL bandwidth-bounds"), "{text}");
    assert!(text.contains("FAIL bandwidth-capacity"), "{text}");
}

#[test]
fn results_sanity_check_flags_out_of_range_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["run", "--n-trials", "2", "--out-dir", "o", "--no-traces"];
    args.extend(SMALL);
    assert_eq!(code(&bin(&args, dir.path())), 0);
    assert_eq!(code(&bin(&["verify", "--results", "o/results.csv"], dir.path())), 0);
    let path = dir.path().join("o/results.csv");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut cells: Vec<String> = lines[1].split(',').map(String::from).collect();
    let drlc = RESULT_COLUMNS.iter().position(|c| *c == "drlc").unwrap();
    cells[drlc] = "1.5".into();
    lines[1] = cells.join(",");
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    assert_eq!(code(&bin(&["verify", "--results", "o/results.csv"], dir.path())), 1);
}

#[test]
fn zero_users_is_an_empty_market() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["run", "--n-mus", "0", "--n-trials", "2", "--out-dir", "z", "--no-traces"], dir.path());
    assert_eq!(code(&o), 0);
    let rows = read_results(fs::File::open(dir.path().join("z/results.csv")).unwrap()).unwrap();
    assert!(rows.iter().all(|r| r.metrics.social_welfare == 0.0 && r.metrics.ni == 0.0));
    let o = bin(&["verify", "--n-mus", "0"], dir.path());
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS convergence: 1 rounds"));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(&bin(&["gen", "-o", "x.json", "--eua-bs", "missing.csv", "--eua-users", "missing.csv"], p)), 2);
    assert_eq!(code(&bin(&["run", "--strategies", "nonsense"], p)), 2);
    assert_eq!(code(&bin(&["sweep", "--axis", "overbooking", "--values", ""], p)), 2);
    assert_eq!(code(&bin(&["gen", "-o", "x.json", "--overbooking", "-0.5"], p)), 2);
    fs::write(p.join("broken.json"), "{ not json").unwrap();
    assert_eq!(code(&bin(&["verify", "--scenario", "broken.json"], p)), 2);
    fs::write(p.join("cfg.toml"), "n_mus = \"many\"").unwrap();
    assert_eq!(code(&bin(&["gen", "-o", "x.json", "--config", "cfg.toml"], p)), 2);
    assert_eq!(code(&bin(&["frobnicate"], p)), 2);
}
