//! Scenario dispatch and artifact rendering.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use perclab_core::bounds::{prop1_verify, Thm1Bound};
use perclab_core::eit::eit_estimate;
use perclab_core::graph::families::{make_cycle_matching, make_random_regular};
use perclab_core::graph::{
    cheeger_report, concentration_diagnostic, read_graph, GeometryTags, EXACT_CHEEGER_MAX_N,
};
use perclab_core::resistance::resistance_profile;
use perclab_core::{
    eit, percolation, resistance, threshold, Error as CoreError, Family, Graph, Seed,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{ConfigErrors, EnsembleFamily, Estimator, ExperimentConfig, GraphSource};
use crate::schema;

/// Graphs up to this size get the full isoperimetric report in geometry
/// scenarios; beyond it only distances are computed.
pub const GEOMETRY_CHEEGER_MAX_N: usize = 4096;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigErrors),
    #[error("graph file {}: {reason}", path.display())]
    GraphFile { path: PathBuf, reason: String },
    #[error("scenario `{scenario}` ({kind}): {source}")]
    Scenario {
        scenario: String,
        kind: &'static str,
        source: CoreError,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("worker pool: {0}")]
    Pool(String),
}

impl RunError {
    /// 2 for anything wrong with the inputs, 3 for failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) | RunError::GraphFile { .. } => 2,
            RunError::Scenario { .. } | RunError::Io { .. } | RunError::Pool(_) => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphInfo {
    pub family: String,
    pub n: usize,
    pub m: usize,
}

/// Constants baked into the estimators, recorded so a report pins them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorDefaults {
    pub version: String,
    pub rng: String,
    pub rank_mapping: String,
    pub ci_level: f64,
    pub bootstrap_resamples: usize,
    pub max_never_crossed_fraction: f64,
    pub exact_law_max_edges: usize,
    pub exact_cheeger_max_n: usize,
    pub geometry_cheeger_max_n: usize,
    pub eit_min_cell_count: u64,
    pub eit_min_fit_points: usize,
    pub resistance_tol: f64,
    pub resistance_max_iter_factor: usize,
}

impl EstimatorDefaults {
    pub fn current() -> Self {
        EstimatorDefaults {
            version: env!("CARGO_PKG_VERSION").to_string(),
            rng: "chacha8; key = master seed, stream = sample index".into(),
            rank_mapping: "beta".into(),
            ci_level: threshold::DEFAULT_CI_LEVEL,
            bootstrap_resamples: threshold::BOOTSTRAP_RESAMPLES,
            max_never_crossed_fraction: threshold::MAX_NEVER_CROSSED,
            exact_law_max_edges: percolation::EXACT_MAX_EDGES,
            exact_cheeger_max_n: EXACT_CHEEGER_MAX_N,
            geometry_cheeger_max_n: GEOMETRY_CHEEGER_MAX_N,
            eit_min_cell_count: eit::MIN_CELL_COUNT,
            eit_min_fit_points: eit::MIN_FIT_POINTS,
            resistance_tol: resistance::DEFAULT_TOL,
            resistance_max_iter_factor: resistance::MAX_ITER_FACTOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub kind: String,
    pub config: ExperimentConfig,
    /// Canonical config text; parses back to `config`.
    pub config_text: String,
    pub graph: Option<GraphInfo>,
    /// SHA-256 of each data artifact.
    pub checksums: BTreeMap<String, String>,
    pub workers: usize,
    pub wall_clock_seconds: f64,
    pub estimator_defaults: EstimatorDefaults,
    pub payload: Value,
}

/// A finished run: the report plus the rendered artifacts it checksums.
#[derive(Debug, Clone)]
pub struct Run {
    pub report: RunReport,
    pub csv: String,
    pub plot: String,
}

pub const RESULTS_FILE: &str = "results.csv";
pub const REPORT_FILE: &str = "report.json";
pub const PLOT_FILE: &str = "plot.dat";

fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Loads the scenario's graph. Problems with a graph file are input errors.
pub fn load_graph(cfg: &ExperimentConfig, base_dir: &Path) -> Result<Option<Graph>, RunError> {
    match &cfg.graph {
        GraphSource::None | GraphSource::Ensemble(_) => Ok(None),
        GraphSource::Family(f) => f.build().map(Some).map_err(|e| scenario_err(cfg, e)),
        GraphSource::File(p) => {
            let path = base_dir.join(p);
            let text = fs::read_to_string(&path).map_err(|e| RunError::GraphFile {
                path: path.clone(),
                reason: e.to_string(),
            })?;
            read_graph(&text)
                .map(Some)
                .map_err(|e| RunError::GraphFile {
                    path,
                    reason: e.to_string(),
                })
        }
    }
}

fn scenario_err(cfg: &ExperimentConfig, source: CoreError) -> RunError {
    RunError::Scenario {
        scenario: cfg.name.clone(),
        kind: cfg.kind().as_str(),
        source,
    }
}

/// Runs a validated scenario on a pool of `workers` threads (0 = one per
/// core). Graph files resolve relative to `base_dir`.
pub fn run_scenario(
    cfg: &ExperimentConfig,
    base_dir: &Path,
    workers: usize,
) -> Result<Run, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    let start = Instant::now();
    let graph = load_graph(cfg, base_dir)?;
    let out = pool
        .install(|| execute(cfg, graph.as_ref()))
        .map_err(|e| scenario_err(cfg, e))?;
    let wall = start.elapsed().as_secs_f64();

    let mut checksums = BTreeMap::new();
    checksums.insert(RESULTS_FILE.to_string(), sha256_hex(out.csv.as_bytes()));
    checksums.insert(PLOT_FILE.to_string(), sha256_hex(out.plot.as_bytes()));
    let report = RunReport {
        scenario: cfg.name.clone(),
        kind: cfg.kind().as_str().to_string(),
        config: cfg.clone(),
        config_text: cfg.to_text(),
        graph: graph.as_ref().map(|g| GraphInfo {
            family: g.family().to_string(),
            n: g.n(),
            m: g.m(),
        }),
        checksums,
        workers: pool.current_num_threads(),
        wall_clock_seconds: wall,
        estimator_defaults: EstimatorDefaults::current(),
        payload: out.payload,
    };
    Ok(Run {
        report,
        csv: out.csv,
        plot: out.plot,
    })
}

/// Writes `results.csv`, `plot.dat` and `report.json` into `dir`.
pub fn emit_outputs(run: &Run, dir: &Path) -> Result<(), RunError> {
    let io = |path: PathBuf| move |source| RunError::Io { path, source };
    fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
    let write = |name: &str, data: &str| {
        let path = dir.join(name);
        fs::write(&path, data).map_err(io(path))
    };
    write(RESULTS_FILE, &run.csv)?;
    write(PLOT_FILE, &run.plot)?;
    let json = serde_json::to_string_pretty(&run.report).expect("report serializes");
    write(REPORT_FILE, &(json + "\n"))
}

struct Output {
    csv: String,
    plot: String,
    payload: Value,
}

struct Table {
    w: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(header: &str) -> Table {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header.split(',')).expect("in-memory write");
        Table { w }
    }

    fn row(&mut self, fields: &[String]) {
        self.w.write_record(fields).expect("in-memory write");
    }

    fn finish(self) -> String {
        String::from_utf8(self.w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

#[derive(Default)]
struct Plot {
    s: String,
}

impl Plot {
    /// One whitespace-separated block; blocks are separated by two blank
    /// lines so plotting tools can index them.
    fn block(&mut self, title: &str, columns: &[&str], rows: &[Vec<f64>]) {
        if !self.s.is_empty() {
            self.s.push_str("\n\n");
        }
        self.s
            .push_str(&format!("# {title}\n# {}\n", columns.join(" ")));
        for r in rows {
            let cells: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            self.s.push_str(&cells.join(" "));
            self.s.push('\n');
        }
    }
}

macro_rules! fields {
    ($($x:expr),* $(,)?) => { [$($x.to_string()),*] };
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

fn to_json<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("payload serializes")
}

fn execute(cfg: &ExperimentConfig, graph: Option<&Graph>) -> Result<Output, CoreError> {
    let seed = Seed(cfg.seed);
    let name = cfg.name.as_str();
    let g = || graph.expect("graph scenarios carry a graph");
    let fam = || g().family().to_string();
    let mut plot = Plot::default();

    let (csv, payload) = match &cfg.estimator {
        Estimator::Threshold {
            alpha,
            samples,
            ci_level,
        } => {
            let g = g();
            let est = if alpha.is_empty() {
                Vec::new()
            } else {
                threshold::estimate_thresholds(g, alpha, *samples, seed, *ci_level)?
            };
            let mut t = Table::new(schema::THRESHOLD);
            for e in &est {
                t.row(&fields![
                    name,
                    fam(),
                    g.n(),
                    g.m(),
                    e.alpha,
                    e.p_hat,
                    e.ci.0,
                    e.ci.1,
                    e.n_samples,
                    e.seed
                ]);
            }
            let rows: Vec<Vec<f64>> = est
                .iter()
                .map(|e| vec![e.alpha, e.p_hat, e.ci.0, e.ci.1])
                .collect();
            plot.block(
                "threshold estimates",
                &["alpha", "p_hat", "ci_lo", "ci_hi"],
                &rows,
            );
            (t.finish(), to_json(&est))
        }
        Estimator::Theta { p, samples } => {
            let g = g();
            let mut t = Table::new(schema::THETA);
            let curve = if p.is_empty() {
                None
            } else {
                Some(threshold::estimate_theta_curve(g, p, *samples, seed)?)
            };
            let mut rows = Vec::new();
            if let Some(c) = &curve {
                for i in 0..c.p_grid.len() {
                    t.row(&fields![
                        name,
                        fam(),
                        g.n(),
                        g.m(),
                        c.p_grid[i],
                        c.theta_hat[i],
                        c.stderr[i],
                        samples,
                        cfg.seed
                    ]);
                    rows.push(vec![c.p_grid[i], c.theta_hat[i], c.stderr[i]]);
                }
            }
            plot.block("theta_n(p)", &["p", "theta_hat", "stderr"], &rows);
            (t.finish(), to_json(&curve))
        }
        Estimator::Uniqueness { p, c, samples } => {
            let g = g();
            let pr = threshold::uniqueness_probability(g, *p, *c, *samples, seed)?;
            let mut t = Table::new(schema::UNIQUENESS);
            t.row(&fields![
                name,
                fam(),
                g.n(),
                g.m(),
                p,
                c,
                pr.estimate,
                pr.lo,
                pr.hi,
                samples,
                cfg.seed
            ]);
            plot.block(
                "uniqueness",
                &["p", "unique_hat", "ci_lo", "ci_hi"],
                &[vec![*p, pr.estimate, pr.lo, pr.hi]],
            );
            (
                t.finish(),
                json!({ "p": p, "c": c, "uniqueness": to_json(&pr) }),
            )
        }
        Estimator::Gap {
            alpha1,
            alpha2,
            samples,
        } => {
            let g = g();
            let e = threshold::threshold_gap(g, *alpha1, *alpha2, *samples, seed)?;
            let mut t = Table::new(schema::GAP);
            t.row(&fields![
                name,
                fam(),
                g.n(),
                g.m(),
                e.alpha1,
                e.alpha2,
                e.p_hat1,
                e.p_hat2,
                e.gap,
                e.ci.0,
                e.ci.1,
                e.n_samples,
                e.seed
            ]);
            plot.block(
                "threshold gap",
                &["alpha1", "alpha2", "gap", "ci_lo", "ci_hi"],
                &[vec![e.alpha1, e.alpha2, e.gap, e.ci.0, e.ci.1]],
            );
            (t.finish(), to_json(&e))
        }
        Estimator::Window { sizes, p, samples } => {
            let family = match graph_ensemble(cfg) {
                EnsembleFamily::CycleMatching => "cycle_matching".to_string(),
                EnsembleFamily::RandomRegular { k } => format!("random_regular:k={k}"),
            };
            let ens = graph_ensemble(cfg).clone();
            let fit = threshold::critical_window_exponent(
                move |n, s| match ens {
                    EnsembleFamily::CycleMatching => make_cycle_matching(n, s),
                    EnsembleFamily::RandomRegular { k } => make_random_regular(n, k, s),
                },
                sizes,
                *p,
                *samples,
                seed,
            )?;
            let sizes_s: Vec<String> = fit.n.iter().map(|n| n.to_string()).collect();
            let mut t = Table::new(schema::WINDOW);
            t.row(&fields![
                name,
                family,
                p,
                sizes_s.join(" "),
                fit.slope,
                fit.stderr,
                fit.r2,
                samples,
                cfg.seed
            ]);
            let intercept = fit
                .n
                .iter()
                .zip(&fit.medians)
                .map(|(&n, &m)| m.ln() - fit.slope * (n as f64).ln())
                .sum::<f64>()
                / fit.n.len() as f64;
            let rows: Vec<Vec<f64>> = fit
                .n
                .iter()
                .zip(&fit.medians)
                .map(|(&n, &m)| vec![n as f64, m, (intercept + fit.slope * (n as f64).ln()).exp()])
                .collect();
            plot.block(
                "median largest cluster",
                &["n", "median_largest", "fitted"],
                &rows,
            );
            (t.finish(), to_json(&fit))
        }
        Estimator::Eit { u, v, pairs } => {
            let g = g();
            let side = match g.family() {
                Family::Torus { side, .. } => *side,
                _ => return Err(CoreError::WrongFamily { expected: "torus" }),
            };
            let index = |xs: &[usize]| xs.iter().rev().fold(0usize, |acc, &x| acc * side + x);
            let (ui, vi) = (index(u), index(v));
            let r = eit_estimate(g, ui, vi, *pairs, seed)?;
            let mut t = Table::new(schema::EIT);
            let coords = |xs: &[usize]| {
                xs.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            t.row(&fields![
                name,
                fam(),
                g.n(),
                coords(u),
                coords(v),
                r.path_length,
                r.pairs_sampled,
                opt(r.c_hat),
                opt(r.c_hat_stderr),
                opt(r.fit_range.map(|f| f.0)),
                opt(r.fit_range.map(|f| f.1)),
                r.degenerate,
                r.reason.clone().unwrap_or_default(),
                cfg.seed
            ]);
            let rows: Vec<Vec<f64>> = r
                .tail_counts
                .iter()
                .enumerate()
                .map(|(k, &c)| {
                    let fitted = r
                        .c_hat
                        .map_or(f64::NAN, |ch| r.tail_counts[0] as f64 * ch.powi(k as i32));
                    vec![k as f64, c as f64, fitted]
                })
                .collect();
            plot.block("intersection tail", &["k", "tail_count", "fitted"], &rows);
            (t.finish(), to_json(&r))
        }
        Estimator::Resistance { pairs, tol } => {
            let g = g();
            let prof = resistance_profile(g, *pairs, seed, *tol)?;
            let mut t = Table::new(schema::RESISTANCE);
            for r in &prof.results {
                t.row(&fields![
                    name,
                    fam(),
                    g.n(),
                    g.m(),
                    r.u,
                    r.v,
                    r.r_eff,
                    r.iterations,
                    r.residual_norm,
                    cfg.seed
                ]);
            }
            let mut vals: Vec<f64> = prof.results.iter().map(|r| r.r_eff).collect();
            vals.sort_by(f64::total_cmp);
            let rows: Vec<Vec<f64>> = vals
                .iter()
                .enumerate()
                .map(|(i, &r)| vec![i as f64, r])
                .collect();
            plot.block("sorted effective resistance", &["rank", "r_eff"], &rows);
            (t.finish(), to_json(&prof))
        }
        Estimator::Bounds { a_size, l, k, eps } => {
            let b = Thm1Bound::compute(*a_size, *l, *k, *eps)?;
            let mut t = Table::new(schema::BOUNDS);
            t.row(&fields![
                name,
                a_size,
                l,
                k,
                eps,
                b.n_paths_lb,
                b.n_paths_lb_f64,
                b.failure_ub.ln,
                b.failure_ub.log10()
            ]);
            let mut rows = Vec::new();
            for li in 1..=*l {
                let bi = Thm1Bound::compute(*a_size, li, *k, *eps)?;
                rows.push(vec![li as f64, bi.n_paths_lb_f64, bi.failure_ub.log10()]);
            }
            plot.block(
                "bounds by path length",
                &["l", "n_paths_lb", "failure_ub_log10"],
                &rows,
            );
            (t.finish(), to_json(&b))
        }
        Estimator::Geometry { fraction } => {
            let g = g();
            let tags = GeometryTags::of(g)?;
            let conc = concentration_diagnostic(g, *fraction)?;
            let cheeger = if g.n() <= GEOMETRY_CHEEGER_MAX_N {
                Some(cheeger_report(g)?)
            } else {
                None
            };
            let ch = cheeger.as_ref();
            let mut t = Table::new(schema::GEOMETRY);
            t.row(&fields![
                name,
                fam(),
                g.n(),
                g.m(),
                g.min_degree(),
                g.max_degree(),
                tags.diameter.value,
                tags.diameter.exact,
                tags.diam_over_log_n,
                tags.below_cube_root,
                tags.below_n_over_log_n,
                tags.transitive_by_construction,
                conc.fraction,
                conc.set_distance,
                conc.ratio,
                opt(ch.and_then(|c| c.h_exact)),
                opt(ch.and_then(|c| c.h_spectral_lb)),
                opt(ch.and_then(|c| c.lambda2)),
                opt(ch.and_then(|c| c.delta_exact))
            ]);
            plot.block(
                "set distance vs diameter",
                &["fraction", "set_distance", "diameter"],
                &[vec![
                    conc.fraction,
                    conc.set_distance as f64,
                    tags.diameter.value as f64,
                ]],
            );
            (
                t.finish(),
                json!({ "tags": to_json(&tags), "concentration": to_json(&conc), "cheeger": to_json(&cheeger) }),
            )
        }
        Estimator::Prop1 {
            p,
            c,
            samples,
            pairs,
        } => {
            let spec = match g().family() {
                Family::Cayley { spec } => spec.clone(),
                _ => return Err(CoreError::WrongFamily { expected: "cayley" }),
            };
            let r = prop1_verify(&spec, *p, *c, *samples, *pairs, seed)?;
            let mut t = Table::new(schema::PROP1);
            t.row(&fields![
                name,
                fam(),
                r.order,
                p,
                c,
                samples,
                r.q_hat,
                r.q_lo,
                r.s_size,
                r.s_symmetric,
                r.s_generating,
                opt(r.diam_s),
                r.word_bound_slack,
                r.rhs,
                r.rhs_lo,
                r.min_pair_conn_hat,
                r.min_pair_stderr,
                r.pass,
                cfg.seed
            ]);
            let conn: Vec<Vec<f64>> = r
                .conn_hat
                .iter()
                .enumerate()
                .map(|(u, &x)| vec![u as f64, x])
                .collect();
            plot.block("connection to identity", &["u", "conn_hat"], &conn);
            plot.block("cut q_hat C / 2", &["cut"], &[vec![r.q_hat * c / 2.0]]);
            (t.finish(), to_json(&r))
        }
    };
    Ok(Output {
        csv,
        plot: plot.s,
        payload,
    })
}

fn graph_ensemble(cfg: &ExperimentConfig) -> &EnsembleFamily {
    match &cfg.graph {
        GraphSource::Ensemble(e) => e,
        _ => unreachable!("window configs always carry an ensemble family"),
    }
}
