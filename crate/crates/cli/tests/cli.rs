use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use nalgebra::DMatrix;
use panelcausal::panel::save_panel;
use panelcausal::validation::{simulate_var_panel, VarDgp};
use panelcausal::{CausalGraph, Panel, PanelLayout};
use sha2::{Digest, Sha256};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_panelcausal"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn var_panel(k: usize, n: usize, t: usize, seed: u64) -> Panel<f64> {
    let phi = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            0.4
        } else if j + 1 == i {
            0.2
        } else {
            0.0
        }
    });
    let dgp = VarDgp::new(vec![phi], DMatrix::identity(k, k)).with_fixed_effects(0.5);
    simulate_var_panel(&dgp, n, t, seed).unwrap()
}

fn write_wide(dir: &Path, name: &str, panel: &Panel<f64>) -> PathBuf {
    let path = dir.join(name);
    save_panel(panel, &path, PanelLayout::Wide).unwrap();
    path
}

fn eight_var_fixture(dir: &Path) -> PathBuf {
    write_wide(dir, "panel8.csv", &var_panel(8, 40, 25, 3))
}

#[test]
fn preprocess_tiny_panel_keeps_t_minus_one_rows_per_entity() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_wide(dir.path(), "tiny.csv", &var_panel(2, 3, 6, 1));
    let out_dir = dir.path().join("out");
    let out = run(&["preprocess", "-i", s(&input), "-o", s(&out_dir), "--layout", "wide"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for file in ["differenced.csv", "transformed.csv"] {
        let (header, rows) = read_csv(&out_dir.join(file));
        assert_eq!(header, ["entity", "year", "x1", "x2"]);
        let mut per_entity: BTreeMap<String, usize> = BTreeMap::new();
        for r in &rows {
            *per_entity.entry(r[0].clone()).or_default() += 1;
        }
        assert_eq!(per_entity.len(), 3);
        assert!(per_entity.values().all(|&c| c == 5), "{file}: {per_entity:?}");
    }
    let log: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("transform_log.json")).unwrap()).unwrap();
    assert_eq!(log["adf_results"].as_array().unwrap().len(), 2);
}

#[test]
fn preprocess_reconciles_sparse_country_panel() {
    // 209 countries x 25 years x 8 indicators; 41 countries mostly empty
    let dir = tempfile::tempdir().unwrap();
    let base = var_panel(8, 209, 25, 11);
    let sparse = Panel::from_fn(
        base.entities().to_vec(),
        (2000..2025).collect(),
        base.variables().to_vec(),
        |i, y, v| if i >= 168 && y % 5 != 0 { None } else { base.get(i, y, v) },
    )
    .unwrap();
    let input = write_wide(dir.path(), "countries.csv", &sparse);
    let out_dir = dir.path().join("out");
    let out = run(&["preprocess", "-i", s(&input), "-o", s(&out_dir), "--layout", "wide"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let log: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("transform_log.json")).unwrap()).unwrap();
    let steps = log["steps"].as_array().unwrap();
    let step = |op: &str| steps.iter().find(|s| s["operation"] == op).unwrap();
    let clean = step("clean");
    assert_eq!(clean["entities_in"], 209);
    assert_eq!(clean["entities_out"], 168);
    assert_eq!(clean["rows_in"], 5225);
    assert_eq!(clean["rows_out"], 4200);
    let diff = step("first_difference");
    assert_eq!(diff["rows_in"], 4200);
    assert_eq!(diff["rows_out"], 4032);
    assert_eq!(diff["rows_lost"], 168);
    let (_, rows) = read_csv(&out_dir.join("differenced.csv"));
    assert_eq!(rows.len(), 4032);
}

#[test]
fn missing_input_is_a_data_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no_such_panel.csv");
    let out = run(&["preprocess", "-i", s(&missing), "-o", s(&dir.path().join("out"))]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains(s(&missing)), "{}", stderr(&out));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "input = panel.csv\nbogus_key = 3\n").unwrap();
    let out = run(&["discover", "-c", s(&cfg)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("bogus_key"), "{}", stderr(&out));

    let out = run(&["discover", "--set", "nonsense=1"]);
    assert_eq!(code(&out), 1);
    let out = run(&["discover", "--alpha", "2"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("alpha"));
    let out = run(&["discover", "--no-such-flag"]);
    assert_eq!(code(&out), 1);
    let out = run(&["discover", "-o", s(dir.path())]);
    assert_eq!(code(&out), 1, "missing input is a usage error");
    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn malformed_panel_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "entity,year,x\na,2000,1\na,2000,2\n").unwrap();
    let out = run(&["discover", "-i", s(&input), "-o", s(&dir.path().join("out")), "--layout", "wide"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

fn discover(input: &Path, out_dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "discover",
        "-i",
        s(input),
        "-o",
        s(out_dir),
        "--layout",
        "wide",
        "--bootstrap-reps",
        "50",
        "--seed",
        "9",
    ];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn discover_writes_full_granger_matrix_and_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let input = eight_var_fixture(dir.path());
    let out_dir = dir.path().join("out");
    let out = discover(&input, &out_dir, &[]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let (header, rows) = read_csv(&out_dir.join("granger.csv"));
    assert_eq!(header.len(), 9);
    assert_eq!(rows.len(), 8);
    let mut filled = 0;
    for (i, row) in rows.iter().enumerate() {
        for (j, cell) in row[1..].iter().enumerate() {
            if i == j {
                assert!(cell.is_empty());
            } else {
                let p: f64 = cell.parse().unwrap();
                assert!((0.0..=1.0).contains(&p));
                filled += 1;
            }
        }
    }
    assert_eq!(filled, 56);

    let (header, rows) = read_csv(&out_dir.join("irf.csv"));
    assert_eq!(header, ["horizon", "impulse", "response", "value", "lower", "upper"]);
    assert_eq!(rows.len(), 11 * 64);
    assert!(rows.iter().all(|r| !r[4].is_empty() && !r[5].is_empty()));
    let (_, rows) = read_csv(&out_dir.join("fevd.csv"));
    assert_eq!(rows.len(), 11 * 64);
    for f in ["graph.json", "graph.dot", "network.json", "network.dot", "granger_tests.csv", "manifest.json"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    CausalGraph::from_json(&fs::read_to_string(out_dir.join("graph.json")).unwrap()).unwrap();
    assert!(!out_dir.join("lag_selection.csv").exists());
}

#[test]
fn irf_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_wide(dir.path(), "p.csv", &var_panel(3, 30, 20, 5));
    let mut digests = BTreeSet::new();
    for (i, threads) in ["1", "4", "4"].iter().enumerate() {
        let out_dir = dir.path().join(format!("run{i}"));
        let out = discover(&input, &out_dir, &["--threads", threads]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        digests.insert(Sha256::digest(fs::read(out_dir.join("irf.csv")).unwrap()).to_vec());
    }
    assert_eq!(digests.len(), 1);
}

#[test]
fn auto_lag_selection_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_wide(dir.path(), "p.csv", &var_panel(3, 30, 20, 6));
    let out_dir = dir.path().join("out");
    let out = discover(&input, &out_dir, &["-p", "auto", "--bootstrap-reps", "0"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (_, rows) = read_csv(&out_dir.join("lag_selection.csv"));
    assert_eq!(rows.len(), 4);
    assert_eq!(rows.iter().filter(|r| r[4] == "true").count(), 1);
    let (_, irf) = read_csv(&out_dir.join("irf.csv"));
    assert!(irf.iter().all(|r| r[4].is_empty()), "no bands without bootstrap");
}

#[test]
fn planted_structure_recovered_in_graph_json() {
    // autodependence 0.3 everywhere plus x1->x2, x2->x3 and x4->x5 at lag 1
    let mut phi = DMatrix::from_diagonal_element(5, 5, 0.3);
    phi[(1, 0)] = 0.4;
    phi[(2, 1)] = 0.4;
    phi[(4, 3)] = 0.4;
    let dgp = VarDgp::new(vec![phi.clone()], DMatrix::identity(5, 5));
    let dir = tempfile::tempdir().unwrap();
    let input = write_wide(dir.path(), "scm.csv", &simulate_var_panel(&dgp, 250, 25, 21).unwrap());
    let out_dir = dir.path().join("out");
    let out = discover(&input, &out_dir, &["--bootstrap-reps", "0", "--tau-max", "2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let g = CausalGraph::from_json(&fs::read_to_string(out_dir.join("graph.json")).unwrap()).unwrap();
    let found: BTreeSet<(String, String, usize)> =
        g.edges.iter().map(|e| (e.source.clone(), e.target.clone(), e.lag)).collect();
    let mut truth = BTreeSet::new();
    for i in 0..5 {
        for j in 0..5 {
            if phi[(i, j)] != 0.0 {
                truth.insert((format!("x{}", j + 1), format!("x{}", i + 1), 1));
            }
        }
    }
    let tp = found.intersection(&truth).count() as f64;
    let f1 = 2.0 * tp / (found.len() + truth.len()) as f64;
    assert!(f1 >= 0.8, "F1 {f1}: found {found:?}");
}

#[test]
fn manifest_records_config_seed_and_checksums() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_wide(dir.path(), "p.csv", &var_panel(3, 20, 15, 8));
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# discover run\ninput = p.csv\nlayout = wide\nseed = 42\nbootstrap_reps = 20\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&["discover", "-c", s(&cfg), "-o", s(&out_dir), "--horizon", "6"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "discover");
    assert_eq!(m["seed"], 42);
    assert_eq!(m["config"]["horizon"], "6", "flags override the file");
    assert_eq!(m["config"]["bootstrap_reps"], "20");
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    let expected = hex_digest(&fs::read(&input).unwrap());
    assert_eq!(m["inputs"][0]["sha256"], expected.as_str());
    let outputs: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(outputs.contains(&"irf.csv") && outputs.contains(&"granger.csv"));
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn validate_smoke_on_eight_variables() {
    let dir = tempfile::tempdir().unwrap();
    let input = eight_var_fixture(dir.path());
    let out_dir = dir.path().join("out");
    let start = Instant::now();
    let out = run(&[
        "validate",
        "-i",
        s(&input),
        "-o",
        s(&out_dir),
        "--layout",
        "wide",
        "--mc-reps",
        "10",
        "--permutation-reps",
        "10",
        "--tracked",
        "x1->x2",
        "--set",
        "split_year=12",
    ]);
    let elapsed = start.elapsed().as_secs_f64();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(elapsed < 60.0, "took {elapsed:.1}s");
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("validation.json")).unwrap()).unwrap();
    assert_eq!(v["mc"]["bias_target"], 0.15);
    assert_eq!(v["mc"]["coverage_target"][0], 0.93);
    assert_eq!(v["mc"]["coverage_target"][1], 0.96);
    assert!(v["mc"]["mean_abs_bias"].as_f64().unwrap() > 0.0);
    assert_eq!(v["permutation"]["reps"], 10);
    assert_eq!(v["robustness"].as_array().unwrap().len(), 7);
    let text = fs::read_to_string(out_dir.join("validation.txt")).unwrap();
    assert!(text.contains("Mean Abs. Bias") && text.contains("<0.15") && text.contains("93-96%"));
    assert!(text.contains("Permutation falsification"));
    assert!(text.contains("x1->x2"));
}

#[test]
fn validate_is_deterministic_under_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = BTreeSet::new();
    for i in 0..2 {
        let out_dir = dir.path().join(format!("v{i}"));
        let out = run(&[
            "validate",
            "-o",
            s(&out_dir),
            "--mc-reps",
            "10",
            "--set",
            "mc_entities=40",
            "--seed",
            "3",
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        outputs.insert(fs::read(out_dir.join("validation.json")).unwrap());
    }
    assert_eq!(outputs.len(), 1);
}

#[test]
fn analyze_graphs_and_groups() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_wide(dir.path(), "p.csv", &var_panel(3, 60, 20, 12));
    let disc = dir.path().join("disc");
    let out = discover(&input, &disc, &["--bootstrap-reps", "0"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let groups = dir.path().join("groups.csv");
    let mut text = String::from("entity,income_group\n");
    for i in 0..60 {
        let g = ["HIC", "UMIC", "LMIC"][i % 3];
        text.push_str(&format!("e{i:04},{g}\n"));
    }
    fs::write(&groups, text).unwrap();

    let out_dir = dir.path().join("out");
    let out = run(&[
        "analyze",
        "-i",
        s(&input),
        "-o",
        s(&out_dir),
        "--layout",
        "wide",
        "--granger-graph",
        s(&disc.join("network.json")),
        "--pcmci-graph",
        s(&disc.join("graph.json")),
        "--groups",
        s(&groups),
        "--tracked",
        "x1->x2",
        "--bootstrap-reps",
        "20",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = read_csv(&out_dir.join("centrality.csv"));
    assert_eq!(header, ["node", "in_degree", "out_degree", "total", "role"]);
    assert_eq!(rows.len(), 3);
    let (_, tiers) = read_csv(&out_dir.join("tiers.csv"));
    assert_eq!(tiers.len(), 3);
    assert!(tiers.iter().all(|r| ["T1", "T2", "T3"].contains(&r[1].as_str())));
    let (_, het) = read_csv(&out_dir.join("heterogeneity.csv"));
    let groups_seen: BTreeSet<&str> = het.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(groups_seen, BTreeSet::from(["HIC", "LMIC", "UMIC"]));
    assert!(het.iter().all(|r| r[1] == "x1" && r[2] == "x2" && r[3] != "0"));
    assert!(out_dir.join("heterogeneity.json").exists());
}

#[test]
fn failed_command_removes_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_wide(dir.path(), "p.csv", &var_panel(3, 20, 15, 13));
    let disc = dir.path().join("disc");
    assert_eq!(code(&discover(&input, &disc, &["--bootstrap-reps", "0"])), 0);
    let out_dir = dir.path().join("out");
    let missing_groups = dir.path().join("absent_groups.csv");
    let out = run(&[
        "analyze",
        "-i",
        s(&input),
        "-o",
        s(&out_dir),
        "--layout",
        "wide",
        "--granger-graph",
        s(&disc.join("network.json")),
        "--groups",
        s(&missing_groups),
    ]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("absent_groups.csv"));
    assert!(!out_dir.join("centrality.csv").exists());
    assert!(!out_dir.join("tiers.csv").exists());
}

#[test]
fn sweep_writes_tau_and_lag_tables() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_wide(dir.path(), "p.csv", &var_panel(4, 60, 20, 14));
    let out_dir = dir.path().join("out");
    let out = run(&[
        "sweep",
        "-i",
        s(&input),
        "-o",
        s(&out_dir),
        "--layout",
        "wide",
        "--tracked",
        "x1->x2",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (_, tau) = read_csv(&out_dir.join("sweep_tau.csv"));
    assert_eq!(tau.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["2", "3", "4"]);
    assert!(tau.iter().all(|r| r[8].is_empty()), "{tau:?}");
    let (header, lag) = read_csv(&out_dir.join("sweep_lag.csv"));
    assert_eq!(header[5], "x1->x2");
    assert_eq!(lag.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["VAR(1)", "VAR(2)", "VAR(3)"]);
}

#[test]
fn auto_preprocess_matches_explicit_preprocess() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_wide(dir.path(), "levels.csv", &var_panel(3, 30, 15, 15));
    let pre = dir.path().join("pre");
    assert_eq!(code(&run(&["preprocess", "-i", s(&input), "-o", s(&pre), "--layout", "wide"])), 0);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(code(&discover(&input, &a, &["--auto-preprocess"])), 0);
    assert_eq!(code(&discover(&pre.join("differenced.csv"), &b, &[])), 0);
    assert_eq!(fs::read(a.join("irf.csv")).unwrap(), fs::read(b.join("irf.csv")).unwrap());
}
