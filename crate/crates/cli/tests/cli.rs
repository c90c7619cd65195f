use std::path::Path;
use std::process::{Command, Output};

use krfactor::generate::gen_min_degree_instance;
use krfactor::io::{parse_cliques, write_cliques, write_graph, write_transversal_certificate};
use krfactor::pipeline::{gen_super_regular_instance, PlantedConfig};
use krfactor::solver::find_factor;
use krfactor::transversal::{build_b_pi, lift_factor, GraphFamily, PermutationBundle};
use krfactor::verify::verify_factor;
use krfactor::{PartiteGraph, RandomSeed, Vertex};
use krfactor_cli::sweep::trial_seed;
use serde_json::Value;

fn krfactor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_krfactor"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

/// Data rows of a sweep CSV, split into fields.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config={"));
    assert_eq!(
        lines.next().unwrap(),
        "mode,r,n,gamma,C,p,trials,successes,success_rate,seed,wall_ms"
    );
    lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn zero_trials_is_a_usage_error() {
    let o = krfactor(&["threshold-sweep", "--trials", "0"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("trials"));
    assert_eq!(code(&krfactor(&["threshold-sweep", "--bogus"])), 2);
}

#[test]
fn clamped_grid_matches_direct_search() {
    let (n, trials, seed) = (9, 30, 5);
    let o = krfactor(&[
        "threshold-sweep",
        "--n",
        "9",
        "--gamma",
        "0.1",
        "--c-grid",
        "50,100",
        "--trials",
        "30",
        "--seed",
        "5",
    ]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 2);
    // Direct search on the same hosts at p = 1.
    let direct = (0..trials)
        .filter(|&t| {
            let host =
                gen_min_degree_instance(3, n, 0.1, 0.0, trial_seed(seed, n, t).derive(0)).unwrap();
            find_factor(&host).is_some()
        })
        .count();
    assert_eq!(direct, trials);
    for row in rows {
        assert_eq!(row[5], "1");
        assert_eq!(row[7], direct.to_string());
        assert_eq!(row[8], "1");
    }
}

#[test]
fn sweeps_are_byte_identical_across_runs() {
    for format in ["csv", "json", "svg"] {
        let args = [
            "threshold-sweep",
            "--n",
            "6,9",
            "--trials",
            "20",
            "--seed",
            "3",
            "--format",
            format,
        ];
        let (a, b) = (krfactor(&args), krfactor(&args));
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{format}");
    }
}

#[test]
fn transversal_sweep_extremes() {
    let o = krfactor(&[
        "transversal-sweep",
        "--n",
        "4",
        "--edge-keep",
        "1",
        "--p-grid",
        "0,1",
        "--trials",
        "10",
    ]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0][0], "transversal");
    assert_eq!((rows[0][8].as_str(), rows[1][8].as_str()), ("0", "1"));
}

#[test]
fn transversal_rates_rise_along_the_grid() {
    let o = krfactor(&[
        "transversal-sweep",
        "--n",
        "9",
        "--gamma",
        "0.1",
        "--c-grid",
        "0.5,1,2,4,8",
        "--trials",
        "40",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["config"]["mode"], "transversal");
    let rates: Vec<f64> = doc["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["success_rate"].as_f64().unwrap())
        .collect();
    let sigma = |q: f64| (q * (1.0 - q) / 40.0).sqrt();
    for w in rates.windows(2) {
        assert!(
            w[1] + 2.0 * sigma(w[1]) >= w[0] - 2.0 * sigma(w[0]),
            "{rates:?}"
        );
    }
}

#[test]
fn pipeline_run_outcomes() {
    let o = krfactor(&["pipeline-run", "--p", "1", "--seed", "4"]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["report"]["success"], true);
    let (inst, _) = gen_super_regular_instance(
        3,
        2,
        30,
        0.6,
        3,
        RandomSeed::new(4),
        &PlantedConfig::default(),
    )
    .unwrap();
    let cliques: Vec<Vec<Vertex>> = doc["report"]["factor"]["cliques"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            c.as_array()
                .unwrap()
                .iter()
                .map(|v| v.as_u64().unwrap() as Vertex)
                .collect()
        })
        .collect();
    verify_factor(&inst.host, &cliques).unwrap();

    let failed = krfactor(&["pipeline-run", "--p", "0", "--seed", "4"]);
    assert_eq!(code(&failed), 1);
    let doc: Value = serde_json::from_slice(&failed.stdout).unwrap();
    assert_eq!(doc["report"]["failure"]["stage"], "round1_cover");
    assert!(String::from_utf8_lossy(&failed.stderr).contains("round1_cover"));

    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"host\": 3");
    assert_eq!(
        code(&krfactor(&["pipeline-run", "--p", "1", "--instance", &bad])),
        2
    );
    let planted = dir.path().join("inst.json").display().to_string();
    assert_eq!(
        code(&krfactor(&[
            "gen", "planted", "--seed", "4", "--out", &planted
        ])),
        0
    );
    let from_file = krfactor(&[
        "pipeline-run",
        "--p",
        "1",
        "--seed",
        "4",
        "--instance",
        &planted,
    ]);
    assert_eq!(code(&from_file), 0);
    let doc2: Value = serde_json::from_slice(&from_file.stdout).unwrap();
    assert_eq!(doc2["report"], doc_report(&o));
}

fn doc_report(o: &Output) -> Value {
    serde_json::from_slice::<Value>(&o.stdout).unwrap()["report"].clone()
}

#[test]
fn janson_report_values() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(
        dir.path(),
        "k222.txt",
        &write_graph(&PartiteGraph::complete(3, 2).unwrap()),
    );
    let o = krfactor(&[
        "janson-report",
        "--graph",
        &graph,
        "--p",
        "0.5",
        "--trials",
        "10000",
        "--seed",
        "2",
    ]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["lambda"].as_f64(), Some(1.0));
    assert_eq!(doc["delta_bar"].as_f64(), Some(2.125));
    // Var ≤ Δ̄ since every dependent pair contributes at most its joint
    // probability.
    let mean = doc["monte_carlo_mean"].as_f64().unwrap();
    assert!(
        (mean - 1.0).abs() <= 3.0 * (2.125f64 / 10_000.0).sqrt(),
        "mean {mean}"
    );

    let full = krfactor(&[
        "janson-report",
        "--graph",
        &graph,
        "--p",
        "1",
        "--trials",
        "50",
    ]);
    let doc: Value = serde_json::from_slice(&full.stdout).unwrap();
    assert_eq!(doc["monte_carlo_mean"].as_f64(), Some(8.0));
    assert_eq!(doc["clique_count"].as_u64(), Some(8));

    let big = write(
        dir.path(),
        "k444.txt",
        &write_graph(&PartiteGraph::complete(3, 4).unwrap()),
    );
    assert_eq!(
        code(&krfactor(&[
            "janson-report",
            "--graph",
            &big,
            "--max-cliques",
            "10"
        ])),
        1
    );
    let broken = write(dir.path(), "broken.txt", "3 2\n0 1\n");
    assert_eq!(code(&krfactor(&["janson-report", "--graph", &broken])), 2);
}

#[test]
fn verify_reports_first_violation() {
    let dir = tempfile::tempdir().unwrap();
    let g = PartiteGraph::complete(3, 2).unwrap();
    let graph = write(dir.path(), "g.txt", &write_graph(&g));
    let f = find_factor(&g).unwrap();
    let good = write(dir.path(), "good.txt", &write_cliques(f.cliques()));
    let o = krfactor(&["verify", "--graph", &graph, "--certificate", &good]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("ok"));

    let missing = write(dir.path(), "missing.txt", "0 2 4\n");
    let o = krfactor(&["verify", "--graph", &graph, "--certificate", &missing]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("coverage"));

    let overlap = write(dir.path(), "overlap.txt", "0 2 4\n0 3 5\n");
    let o = krfactor(&["verify", "--graph", &graph, "--certificate", &overlap]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("disjointness"));

    let garbage = write(dir.path(), "garbage.txt", "0 x 4\n");
    assert_eq!(
        code(&krfactor(&[
            "verify",
            "--graph",
            &graph,
            "--certificate",
            &garbage
        ])),
        2
    );
    assert_eq!(
        code(&krfactor(&[
            "verify",
            "--graph",
            "/nonexistent",
            "--certificate",
            &good
        ])),
        2
    );
    assert_eq!(
        parse_cliques(&std::fs::read_to_string(&good).unwrap())
            .unwrap()
            .len(),
        2
    );
}

#[test]
fn verify_transversal_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let fam_dir = dir.path().join("fam");
    let fam_path = fam_dir.display().to_string();
    assert_eq!(
        code(&krfactor(&[
            "gen",
            "family",
            "--n",
            "4",
            "--edge-keep",
            "1",
            "--out",
            &fam_path
        ])),
        0
    );
    let fam = GraphFamily::complete(3, 4).unwrap();
    let aux = build_b_pi(&fam, &PermutationBundle::random(3, 4, RandomSeed::new(1))).unwrap();
    let tf = lift_factor(&aux, &find_factor(&aux.graph).unwrap()).unwrap();
    let text = write_transversal_certificate(&tf);
    let cert = write(dir.path(), "cert.txt", &text);
    let manifest = fam_dir.join("family.txt").display().to_string();
    let o = krfactor(&["verify", "--family", &manifest, "--certificate", &cert]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));

    // Reuse one graph index for two edges.
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let edges: Vec<usize> = (0..lines.len())
        .filter(|&i| lines[i].starts_with("edge"))
        .collect();
    let first_idx = lines[edges[0]].rsplit(' ').next().unwrap().to_string();
    let mut parts: Vec<String> = lines[edges[1]].split(' ').map(str::to_string).collect();
    *parts.last_mut().unwrap() = first_idx;
    lines[edges[1]] = parts.join(" ");
    let bad = write(dir.path(), "bad.txt", &(lines.join("\n") + "\n"));
    let o = krfactor(&["verify", "--family", &manifest, "--certificate", &bad]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("violation"));
}

#[test]
fn generated_files_parse() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt").display().to_string();
    assert_eq!(
        code(&krfactor(&[
            "gen", "graph", "--n", "10", "--seed", "1", "--out", &g
        ])),
        0
    );
    let w = dir.path().join("w.txt").display().to_string();
    assert_eq!(
        code(&krfactor(&["gen", "witness", "--n", "4", "--out", &w])),
        0
    );
    let limits = krfactor::io::ParseLimits::default();
    let host = krfactor::io::parse_graph(&std::fs::read_to_string(&g).unwrap(), &limits).unwrap();
    assert_eq!(
        host,
        gen_min_degree_instance(3, 10, 0.2, 0.0, RandomSeed::new(1)).unwrap()
    );
    let witness =
        krfactor::io::parse_graph(&std::fs::read_to_string(&w).unwrap(), &limits).unwrap();
    assert!(find_factor(&witness).is_none());
    assert_eq!(
        code(&krfactor(&["gen", "graph", "--n", "10", "--gamma", "0.9"])),
        1
    );
}
