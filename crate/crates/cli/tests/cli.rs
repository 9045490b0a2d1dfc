use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use perclab::config::parse_config;
use perclab::run::RunReport;
use perclab::schema;

fn perclab(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_perclab"));
    cmd.args(args).env_remove("PERCLAB_WORKERS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run_ok(cfg: &Path, out: &Path, extra: &[&str]) -> (String, String, RunReport) {
    let mut args = vec!["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = perclab(&args, &[]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    let plot = fs::read_to_string(out.join("plot.dat")).unwrap();
    let report: RunReport =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    (csv, plot, report)
}

fn cell(csv: &str, row: usize, column: &str) -> String {
    let mut r = csv::Reader::from_reader(csv.as_bytes());
    let idx = r
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == column)
        .expect("column exists");
    r.records().nth(row).unwrap().unwrap()[idx].to_string()
}

const C4_THRESHOLD: &str = "\
[scenario]
kind = threshold
name = c4
seed = 11

[graph]
family = torus
side = 4
dim = 1

[estimator]
alpha = 0.5
samples = 100000
";

#[test]
fn c4_threshold_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c4.ini", C4_THRESHOLD);
    let (csv, _, _) = run_ok(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(csv.lines().next().unwrap(), schema::THRESHOLD);
    assert_eq!(
        schema::THRESHOLD,
        "scenario,family,n,m,alpha,p_hat,ci_lo,ci_hi,samples,seed"
    );
    let p: f64 = cell(&csv, 0, "p_hat").parse().unwrap();
    let exact = 1.0 - 2f64.powf(-0.25);
    assert!((p - exact).abs() < 0.01, "{p}");
    assert_eq!(cell(&csv, 0, "family"), "torus:side=4,dim=1");
    assert_eq!(cell(&csv, 0, "samples"), "100000");
}

#[test]
fn byte_identical_across_runs_and_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[scenario]\nkind = threshold\nseed = 3\n[graph]\nfamily = cycle_matching\nn = 2000\nseed = 1\n\
                [estimator]\nalpha = 0.05, 0.2\nsamples = 300\n";
    let cfg = write_config(dir.path(), "t.ini", text);
    let (csv1, plot1, r1) = run_ok(&cfg, &dir.path().join("a"), &["--workers", "1"]);
    let (csv2, plot2, r2) = run_ok(&cfg, &dir.path().join("b"), &["--workers", "4"]);
    let o = perclab(
        &[
            "run",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().join("c").to_str().unwrap(),
        ],
        &[("PERCLAB_WORKERS", "3")],
    );
    assert_eq!(o.status.code(), Some(0));
    let csv3 = fs::read_to_string(dir.path().join("c/results.csv")).unwrap();
    assert_eq!(csv1, csv2);
    assert_eq!(csv1, csv3);
    assert_eq!(plot1, plot2);
    assert_eq!((r1.workers, r2.workers), (1, 4));
    assert_eq!(r1.checksums, r2.checksums);
    assert_eq!(r1.payload, r2.payload);
}

#[test]
fn seed_override_changes_output_and_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[scenario]\nkind = theta\nseed = 3\n[graph]\nfamily = hypercube\ndim = 8\n[estimator]\np = 0.1, 0.2\nsamples = 200\n";
    let cfg = write_config(dir.path(), "t.ini", text);
    let (a, _, _) = run_ok(&cfg, &dir.path().join("a"), &[]);
    let (b, _, rb) = run_ok(&cfg, &dir.path().join("b"), &["--seed", "4"]);
    assert_ne!(a, b);
    assert_eq!(rb.config.seed, 4);
}

#[test]
fn report_echo_reparses_to_the_same_config() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{C4_THRESHOLD}\n[reference]\np_c_tree3 = 0.5 | critical probability of the 3-regular tree\n")
        .replace("samples = 100000", "samples = 500");
    let cfg = write_config(dir.path(), "c4.ini", &text);
    let out = dir.path().join("out");
    let (csv, plot, report) = run_ok(&cfg, &out, &[]);
    let reparsed = parse_config(&report.config_text).unwrap();
    assert_eq!(reparsed, report.config);
    assert_eq!(report.config.reference.len(), 1);
    assert_eq!(
        report.config.reference[0].provenance,
        "critical probability of the 3-regular tree"
    );

    // Re-running from the echo alone reproduces the data files.
    let echo = write_config(dir.path(), "echo.ini", &report.config_text);
    let (csv2, plot2, _) = run_ok(&echo, &dir.path().join("again"), &[]);
    assert_eq!((csv, plot), (csv2, plot2));
    let graph = report.graph.unwrap();
    assert_eq!((graph.n, graph.m), (4, 4));
    assert_eq!(report.estimator_defaults.bootstrap_resamples, 1000);
    assert_eq!(report.checksums.len(), 2);
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = C4_THRESHOLD
        .replace("alpha = 0.5", "alpha = 1.5")
        .replace("seed = 11", "seed = 11\nseed = 12");
    let cfg = write_config(dir.path(), "bad.ini", &bad);
    for sub in ["validate", "run"] {
        let o = perclab(&[sub, cfg.to_str().unwrap()], &[]);
        assert_eq!(o.status.code(), Some(2), "{sub}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains("line 5: duplicate key `seed`"), "{err}");
        assert!(err.contains("line 13: `alpha`"), "{err}");
    }
    let good = write_config(dir.path(), "good.ini", C4_THRESHOLD);
    let o = perclab(
        &["run", good.to_str().unwrap()],
        &[("PERCLAB_WORKERS", "many")],
    );
    assert_eq!(o.status.code(), Some(2));
    let o = perclab(&["validate", good.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0));
    let o = perclab(
        &["validate", dir.path().join("missing.ini").to_str().unwrap()],
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("two.txt"), "4 2\n0 1\n2 3\n").unwrap();
    let text = "[scenario]\nkind = resistance\nseed = 1\n[graph]\nfile = two.txt\n[estimator]\npairs = 4\n";
    let cfg = write_config(dir.path(), "r.ini", text);
    let o = perclab(&["validate", cfg.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0));
    let o = perclab(
        &[
            "run",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().join("o").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("scenario `resistance` (resistance)") && err.contains("disconnected"),
        "{err}"
    );

    // A malformed graph file is an input error.
    fs::write(dir.path().join("two.txt"), "4 2\n0 1\n").unwrap();
    let o = perclab(
        &[
            "run",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().join("o").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_result_set_writes_headers_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "e.ini",
        &C4_THRESHOLD.replace("alpha = 0.5", "alpha ="),
    );
    let (csv, plot, report) = run_ok(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(csv, format!("{}\n", schema::THRESHOLD));
    assert_eq!(plot, "# threshold estimates\n# alpha p_hat ci_lo ci_hi\n");
    assert_eq!(report.payload, serde_json::json!([]));
}

#[test]
fn gen_then_run_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("q4.txt");
    let o = perclab(
        &["gen", "hypercube", "dim=4", "--out", g.to_str().unwrap()],
        &[],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = fs::read_to_string(&g).unwrap();
    assert!(
        text.starts_with("# family=hypercube\n# dim=4\n16 32\n"),
        "{text}"
    );

    let o = perclab(
        &[
            "gen",
            "torus:side=5,dim=2",
            "--out",
            dir.path().join("t.txt").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    let o = perclab(
        &[
            "gen",
            "torus",
            "side=2",
            "dim=2",
            "--out",
            dir.path().join("x.txt").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(2));

    let cfg = write_config(
        dir.path(),
        "geo.ini",
        "[scenario]\nkind = geometry\nseed = 0\n[graph]\nfile = q4.txt\n[estimator]\nfraction = 0.25\n",
    );
    let (csv, _, report) = run_ok(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(csv.lines().next().unwrap(), schema::GEOMETRY);
    assert_eq!(report.graph.unwrap().family, "hypercube:dim=4");
    assert_eq!(cell(&csv, 0, "diameter"), "4");
    assert_eq!(cell(&csv, 0, "h_exact"), "1");
    assert_eq!(cell(&csv, 0, "transitive"), "true");
}

#[test]
fn every_kind_runs_with_its_pinned_header() {
    let cases = [
        (
            "theta",
            "family = torus\nside = 8\ndim = 2",
            "p = 0.3, 0.6\nsamples = 50",
            schema::THETA,
            "# p theta_hat stderr",
        ),
        (
            "uniqueness",
            "family = hypercube\ndim = 6",
            "p = 0.5\nc = 0.2\nsamples = 50",
            schema::UNIQUENESS,
            "# p unique_hat ci_lo ci_hi",
        ),
        (
            "gap",
            "family = torus\nside = 6\ndim = 2",
            "alpha1 = 0.1\nalpha2 = 0.5\nsamples = 50",
            schema::GAP,
            "# alpha1 alpha2 gap ci_lo ci_hi",
        ),
        (
            "window",
            "family = random_regular\nk = 3",
            "sizes = 100, 200, 400\np = 0.5\nsamples = 20",
            schema::WINDOW,
            "# n median_largest fitted",
        ),
        (
            "eit",
            "family = torus\nside = 6\ndim = 3",
            "u = 0, 0, 0\nv = 3, 3, 3\npairs = 2000",
            schema::EIT,
            "# k tail_count fitted",
        ),
        (
            "resistance",
            "family = torus\nside = 4\ndim = 2",
            "pairs = 5",
            schema::RESISTANCE,
            "# rank r_eff",
        ),
        (
            "prop1",
            "family = cayley\ngroup = cyclic\nm = 8",
            "p = 0.9\nc = 0.5\nsamples = 200\npairs = 5",
            schema::PROP1,
            "# u conn_hat",
        ),
    ];
    let dir = tempfile::tempdir().unwrap();
    for (kind, g, e, header, plot_cols) in cases {
        let text = format!("[scenario]\nkind = {kind}\nseed = 5\n[graph]\n{g}\n[estimator]\n{e}\n");
        let cfg = write_config(dir.path(), &format!("{kind}.ini"), &text);
        let (csv, plot, report) = run_ok(&cfg, &dir.path().join(kind), &[]);
        assert_eq!(csv.lines().next().unwrap(), header, "{kind}");
        assert!(csv.lines().count() >= 2, "{kind}");
        assert_eq!(plot.lines().nth(1).unwrap(), plot_cols, "{kind}");
        assert_eq!(report.kind, kind);
    }
    let cfg = write_config(
        dir.path(),
        "bounds.ini",
        "[scenario]\nkind = bounds\nseed = 0\n[estimator]\na_size = 1000000\nl = 10\nk = 3\neps = 0.5\n",
    );
    let (csv, plot, _) = run_ok(&cfg, &dir.path().join("bounds"), &[]);
    assert_eq!(csv.lines().next().unwrap(), schema::BOUNDS);
    assert_eq!(cell(&csv, 0, "n_paths_lb"), "50000/59049");
    assert_eq!(plot.lines().filter(|l| !l.starts_with('#')).count(), 10);
}

#[test]
fn window_slope_near_two_thirds() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[scenario]\nkind = window\nseed = 2\n[graph]\nfamily = cycle_matching\n\
                [estimator]\nsizes = 1000, 4000, 16000\np = 0.5\nsamples = 300\n";
    let cfg = write_config(dir.path(), "w.ini", text);
    let (csv, _, _) = run_ok(&cfg, &dir.path().join("out"), &[]);
    let slope: f64 = cell(&csv, 0, "slope").parse().unwrap();
    assert!((slope - 2.0 / 3.0).abs() < 0.1, "{slope}");
    assert_eq!(cell(&csv, 0, "sizes"), "1000 4000 16000");
}
