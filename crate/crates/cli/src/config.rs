//! Scenario configuration: an INI-like file with one scenario per file.
//!
//! ```text
//! [scenario]
//! kind = threshold
//! seed = 1
//!
//! [graph]
//! family = torus
//! side = 64
//! dim = 2
//!
//! [estimator]
//! alpha = 0.1
//! samples = 400
//!
//! [reference]
//! p_c_tree3 = 0.5 | critical probability of the 3-regular tree
//! ```
//!
//! Lines starting with `#` or `;` are comments. Every problem in a file is
//! reported at once, each with the line it refers to.

use std::fmt;
use std::str::FromStr;

use perclab_core::{threshold, Error as CoreError, Family};
use serde::{Deserialize, Serialize};

pub const DEFAULT_OUT: &str = "perclab-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Threshold,
    Theta,
    Uniqueness,
    Gap,
    Window,
    Eit,
    Resistance,
    Bounds,
    Geometry,
    Prop1,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 10] = [
        ScenarioKind::Threshold,
        ScenarioKind::Theta,
        ScenarioKind::Uniqueness,
        ScenarioKind::Gap,
        ScenarioKind::Window,
        ScenarioKind::Eit,
        ScenarioKind::Resistance,
        ScenarioKind::Bounds,
        ScenarioKind::Geometry,
        ScenarioKind::Prop1,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Threshold => "threshold",
            ScenarioKind::Theta => "theta",
            ScenarioKind::Uniqueness => "uniqueness",
            ScenarioKind::Gap => "gap",
            ScenarioKind::Window => "window",
            ScenarioKind::Eit => "eit",
            ScenarioKind::Resistance => "resistance",
            ScenarioKind::Bounds => "bounds",
            ScenarioKind::Geometry => "geometry",
            ScenarioKind::Prop1 => "prop1",
        }
    }
}

impl FromStr for ScenarioKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or(())
    }
}

/// Families whose size varies within one scenario (window scaling runs).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum EnsembleFamily {
    CycleMatching,
    RandomRegular { k: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    None,
    Family(Family),
    /// Graph file, relative to the config file's directory.
    File(String),
    Ensemble(EnsembleFamily),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Estimator {
    Threshold {
        alpha: Vec<f64>,
        samples: usize,
        ci_level: f64,
    },
    Theta {
        p: Vec<f64>,
        samples: usize,
    },
    Uniqueness {
        p: f64,
        c: f64,
        samples: usize,
    },
    Gap {
        alpha1: f64,
        alpha2: f64,
        samples: usize,
    },
    Window {
        sizes: Vec<usize>,
        p: f64,
        samples: usize,
    },
    Eit {
        u: Vec<usize>,
        v: Vec<usize>,
        pairs: usize,
    },
    Resistance {
        pairs: usize,
        tol: f64,
    },
    Bounds {
        a_size: u64,
        l: u32,
        k: u64,
        eps: f64,
    },
    Geometry {
        fraction: f64,
    },
    Prop1 {
        p: f64,
        c: f64,
        samples: usize,
        pairs: usize,
    },
}

impl Estimator {
    pub fn kind(&self) -> ScenarioKind {
        match self {
            Estimator::Threshold { .. } => ScenarioKind::Threshold,
            Estimator::Theta { .. } => ScenarioKind::Theta,
            Estimator::Uniqueness { .. } => ScenarioKind::Uniqueness,
            Estimator::Gap { .. } => ScenarioKind::Gap,
            Estimator::Window { .. } => ScenarioKind::Window,
            Estimator::Eit { .. } => ScenarioKind::Eit,
            Estimator::Resistance { .. } => ScenarioKind::Resistance,
            Estimator::Bounds { .. } => ScenarioKind::Bounds,
            Estimator::Geometry { .. } => ScenarioKind::Geometry,
            Estimator::Prop1 { .. } => ScenarioKind::Prop1,
        }
    }
}

/// A literature constant carried alongside the run, never computed by it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub name: String,
    pub value: f64,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    pub out: String,
    pub graph: GraphSource,
    pub estimator: Estimator,
    pub reference: Vec<Reference>,
}

impl ExperimentConfig {
    pub fn kind(&self) -> ScenarioKind {
        self.estimator.kind()
    }

    /// Canonical text form; [`parse_config`] reads it back unchanged.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let kv =
            |s: &mut String, k: &str, v: &dyn fmt::Display| s.push_str(&format!("{k} = {v}\n"));
        s.push_str("[scenario]\n");
        kv(&mut s, "kind", &self.kind().as_str());
        kv(&mut s, "name", &self.name);
        kv(&mut s, "seed", &self.seed);
        kv(&mut s, "out", &self.out);
        match &self.graph {
            GraphSource::None => {}
            GraphSource::Family(f) => {
                s.push_str("\n[graph]\n");
                kv(&mut s, "family", &f.name());
                for (k, v) in f.params() {
                    kv(&mut s, &k, &v);
                }
            }
            GraphSource::File(path) => {
                s.push_str("\n[graph]\nfile = ");
                s.push_str(path);
                s.push('\n');
            }
            GraphSource::Ensemble(e) => {
                s.push_str("\n[graph]\n");
                match e {
                    EnsembleFamily::CycleMatching => kv(&mut s, "family", &"cycle_matching"),
                    EnsembleFamily::RandomRegular { k } => {
                        kv(&mut s, "family", &"random_regular");
                        kv(&mut s, "k", k);
                    }
                }
            }
        }
        s.push_str("\n[estimator]\n");
        match &self.estimator {
            Estimator::Threshold {
                alpha,
                samples,
                ci_level,
            } => {
                kv(&mut s, "alpha", &join(alpha));
                kv(&mut s, "samples", samples);
                kv(&mut s, "ci_level", ci_level);
            }
            Estimator::Theta { p, samples } => {
                kv(&mut s, "p", &join(p));
                kv(&mut s, "samples", samples);
            }
            Estimator::Uniqueness { p, c, samples } => {
                kv(&mut s, "p", p);
                kv(&mut s, "c", c);
                kv(&mut s, "samples", samples);
            }
            Estimator::Gap {
                alpha1,
                alpha2,
                samples,
            } => {
                kv(&mut s, "alpha1", alpha1);
                kv(&mut s, "alpha2", alpha2);
                kv(&mut s, "samples", samples);
            }
            Estimator::Window { sizes, p, samples } => {
                kv(&mut s, "sizes", &join(sizes));
                kv(&mut s, "p", p);
                kv(&mut s, "samples", samples);
            }
            Estimator::Eit { u, v, pairs } => {
                kv(&mut s, "u", &join(u));
                kv(&mut s, "v", &join(v));
                kv(&mut s, "pairs", pairs);
            }
            Estimator::Resistance { pairs, tol } => {
                kv(&mut s, "pairs", pairs);
                kv(&mut s, "tol", tol);
            }
            Estimator::Bounds { a_size, l, k, eps } => {
                kv(&mut s, "a_size", a_size);
                kv(&mut s, "l", l);
                kv(&mut s, "k", k);
                kv(&mut s, "eps", eps);
            }
            Estimator::Geometry { fraction } => kv(&mut s, "fraction", fraction),
            Estimator::Prop1 {
                p,
                c,
                samples,
                pairs,
            } => {
                kv(&mut s, "p", p);
                kv(&mut s, "c", c);
                kv(&mut s, "samples", samples);
                kv(&mut s, "pairs", pairs);
            }
        }
        if !self.reference.is_empty() {
            s.push_str("\n[reference]\n");
            for r in &self.reference {
                s.push_str(&format!("{} = {} | {}\n", r.name, r.value, r.provenance));
            }
        }
        s
    }
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every error found in one config file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

struct Entry {
    key: String,
    value: String,
    line: usize,
    used: bool,
}

struct Section {
    name: &'static str,
    line: Option<usize>,
    entries: Vec<Entry>,
}

const SECTIONS: [&str; 4] = ["scenario", "graph", "estimator", "reference"];

struct Parser {
    errors: Vec<ConfigError>,
}

impl Parser {
    fn err(&mut self, line: Option<usize>, message: impl Into<String>) {
        self.errors.push(ConfigError {
            line,
            message: message.into(),
        });
    }

    fn lex(&mut self, text: &str) -> Vec<Section> {
        let mut sections: Vec<Section> = SECTIONS
            .iter()
            .map(|&name| Section {
                name,
                line: None,
                entries: Vec::new(),
            })
            .collect();
        let mut current: Option<usize> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') || t.starts_with(';') {
                continue;
            }
            if let Some(inner) = t.strip_prefix('[') {
                let Some(name) = inner.strip_suffix(']').map(str::trim) else {
                    self.err(Some(line), format!("malformed section header `{t}`"));
                    current = None;
                    continue;
                };
                match SECTIONS.iter().position(|&s| s == name) {
                    Some(idx) => {
                        if let Some(first) = sections[idx].line {
                            self.err(
                                Some(line),
                                format!("section [{name}] repeated (first at line {first})"),
                            );
                        } else {
                            sections[idx].line = Some(line);
                        }
                        current = Some(idx);
                    }
                    None => {
                        self.err(Some(line), format!("unknown section [{name}]"));
                        current = None;
                    }
                }
                continue;
            }
            let Some((k, v)) = t.split_once('=') else {
                self.err(Some(line), format!("expected `key = value`, got `{t}`"));
                continue;
            };
            let (key, value) = (k.trim(), v.trim());
            if key.is_empty() {
                self.err(Some(line), "empty key");
                continue;
            }
            let Some(idx) = current else {
                self.err(Some(line), format!("key `{key}` outside a known section"));
                continue;
            };
            let sec = &mut sections[idx];
            if let Some(prev) = sec.entries.iter().find(|e| e.key == key) {
                let first = prev.line;
                self.err(
                    Some(line),
                    format!(
                        "duplicate key `{key}` in [{}] (lines {first} and {line})",
                        sec.name
                    ),
                );
                continue;
            }
            sec.entries.push(Entry {
                key: key.to_string(),
                value: value.to_string(),
                line,
                used: false,
            });
        }
        sections
    }

    fn take<'s>(&mut self, sec: &'s mut Section, key: &str) -> Option<(&'s str, usize)> {
        let e = sec.entries.iter_mut().find(|e| e.key == key)?;
        e.used = true;
        Some((e.value.as_str(), e.line))
    }

    fn parse_value<T: FromStr>(
        &mut self,
        key: &str,
        value: &str,
        line: usize,
        what: &str,
    ) -> Option<T> {
        match value.parse() {
            Ok(v) => Some(v),
            Err(_) => {
                self.err(
                    Some(line),
                    format!("`{key}`: expected {what}, got `{value}`"),
                );
                None
            }
        }
    }

    fn required<T: FromStr>(
        &mut self,
        sec: &mut Section,
        key: &str,
        what: &str,
    ) -> Option<(T, usize)> {
        match self.take(sec, key) {
            Some((v, line)) => {
                let v = v.to_string();
                self.parse_value(key, &v, line, what).map(|x| (x, line))
            }
            None => {
                self.err(
                    sec.line,
                    format!("missing required key `{key}` in [{}]", sec.name),
                );
                None
            }
        }
    }

    fn optional<T: FromStr>(
        &mut self,
        sec: &mut Section,
        key: &str,
        what: &str,
        default: T,
    ) -> Option<(T, Option<usize>)> {
        match self.take(sec, key) {
            Some((v, line)) => {
                let v = v.to_string();
                self.parse_value(key, &v, line, what)
                    .map(|x| (x, Some(line)))
            }
            None => Some((default, None)),
        }
    }

    fn list<T: FromStr>(
        &mut self,
        sec: &mut Section,
        key: &str,
        what: &str,
    ) -> Option<(Vec<T>, usize)> {
        let Some((v, line)) = self.take(sec, key) else {
            self.err(
                sec.line,
                format!("missing required key `{key}` in [{}]", sec.name),
            );
            return None;
        };
        let v = v.to_string();
        if v.is_empty() {
            return Some((Vec::new(), line));
        }
        let mut out = Vec::new();
        let mut ok = true;
        for item in v.split(',') {
            match self.parse_value(key, item.trim(), line, what) {
                Some(x) => out.push(x),
                None => ok = false,
            }
        }
        ok.then_some((out, line))
    }

    fn check(
        &mut self,
        cond: bool,
        line: Option<usize>,
        key: &str,
        msg: impl fmt::Display,
    ) -> bool {
        if !cond {
            self.err(line, format!("`{key}`: {msg}"));
        }
        cond
    }

    fn finish(&mut self, sec: &Section) {
        for e in sec.entries.iter().filter(|e| !e.used) {
            self.err(
                Some(e.line),
                format!("unknown key `{}` in [{}]", e.key, sec.name),
            );
        }
    }
}

fn in_unit_open_closed(x: f64) -> bool {
    x > 0.0 && x <= 1.0
}

fn in_unit_closed(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

const NUMBER: &str = "a number";
const COUNT: &str = "a non-negative integer";

/// Parses and validates a scenario file, returning every error found.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let mut ps = Parser { errors: Vec::new() };
    let mut secs = ps.lex(text);
    let [scenario, graph, estimator, reference] = &mut secs[..] else {
        unreachable!()
    };

    // [scenario]
    if scenario.line.is_none() {
        ps.err(None, "missing section [scenario]");
    }
    let kind = match ps.take(scenario, "kind") {
        Some((v, line)) => match v.parse::<ScenarioKind>() {
            Ok(k) => Some(k),
            Err(()) => {
                let known: Vec<&str> = ScenarioKind::ALL.iter().map(|k| k.as_str()).collect();
                ps.err(
                    Some(line),
                    format!(
                        "`kind`: unknown scenario kind `{v}` (expected one of {})",
                        known.join(", ")
                    ),
                );
                None
            }
        },
        None => {
            ps.err(scenario.line, "missing required key `kind` in [scenario]");
            None
        }
    };
    let seed = ps.required::<u64>(scenario, "seed", COUNT).map(|x| x.0);
    let name = ps
        .take(scenario, "name")
        .map(|(v, _)| v.to_string())
        .or_else(|| kind.map(|k| k.as_str().to_string()));
    let out = ps
        .take(scenario, "out")
        .map_or(DEFAULT_OUT.to_string(), |(v, _)| v.to_string());
    ps.finish(scenario);

    // [graph]
    let graph_src = kind.and_then(|k| parse_graph(&mut ps, graph, k));
    ps.finish(graph);

    // [estimator]
    let est = kind.and_then(|k| parse_estimator(&mut ps, estimator, k, graph_src.as_ref()));
    if kind.is_some() {
        ps.finish(estimator);
    }

    // [reference]
    let mut refs = Vec::new();
    for e in reference.entries.iter_mut() {
        e.used = true;
        let Some((val, prov)) = e.value.split_once('|') else {
            ps.err(
                Some(e.line),
                format!("`{}`: expected `value | provenance`", e.key),
            );
            continue;
        };
        let prov = prov.trim();
        if prov.is_empty() {
            ps.err(
                Some(e.line),
                format!("`{}`: provenance note is empty", e.key),
            );
            continue;
        }
        match val.trim().parse::<f64>() {
            Ok(value) if value.is_finite() => refs.push(Reference {
                name: e.key.clone(),
                value,
                provenance: prov.to_string(),
            }),
            _ => ps.err(
                Some(e.line),
                format!("`{}`: expected a number, got `{}`", e.key, val.trim()),
            ),
        }
    }

    if !ps.errors.is_empty() {
        ps.errors.sort_by_key(|e| e.line.unwrap_or(0));
        return Err(ConfigErrors(ps.errors));
    }
    Ok(ExperimentConfig {
        name: name.expect("set when kind parsed"),
        seed: seed.expect("no errors"),
        out,
        graph: graph_src.expect("no errors"),
        estimator: est.expect("no errors"),
        reference: refs,
    })
}

fn core_error_line(err: &CoreError, sec: &Section, fallback: usize) -> usize {
    if let CoreError::InvalidParameter { name, .. } = err {
        if let Some(e) = sec.entries.iter().find(|e| e.key == *name) {
            return e.line;
        }
    }
    fallback
}

fn parse_graph(ps: &mut Parser, sec: &mut Section, kind: ScenarioKind) -> Option<GraphSource> {
    if kind == ScenarioKind::Bounds {
        if let Some(line) = sec.line {
            ps.err(Some(line), "bounds scenarios take no [graph] section");
            return None;
        }
        return Some(GraphSource::None);
    }
    if sec.line.is_none() {
        ps.err(None, "missing section [graph]");
        return None;
    }
    let file = ps.take(sec, "file").map(|(v, l)| (v.to_string(), l));
    let family = ps.take(sec, "family").map(|(v, l)| (v.to_string(), l));
    match (file, family) {
        (Some((_, l)), Some(_)) => {
            ps.err(Some(l), "give either `file` or `family`, not both");
            None
        }
        (None, None) => {
            ps.err(sec.line, "[graph] needs `family` or `file`");
            None
        }
        (Some((path, line)), None) => {
            if matches!(
                kind,
                ScenarioKind::Window | ScenarioKind::Eit | ScenarioKind::Prop1
            ) {
                ps.err(
                    Some(line),
                    format!(
                        "{} scenarios need a generated family, not a file",
                        kind.as_str()
                    ),
                );
                return None;
            }
            if path.is_empty() {
                ps.err(Some(line), "`file`: empty path");
                return None;
            }
            Some(GraphSource::File(path))
        }
        (None, Some((name, line))) if kind == ScenarioKind::Window => match name.as_str() {
            "cycle_matching" => Some(GraphSource::Ensemble(EnsembleFamily::CycleMatching)),
            "random_regular" => {
                let (k, kl) = ps.required::<usize>(sec, "k", COUNT)?;
                ps.check(k >= 1, Some(kl), "k", "degree must be at least 1")
                    .then_some(GraphSource::Ensemble(EnsembleFamily::RandomRegular { k }))
            }
            other => {
                ps.err(
                    Some(line),
                    format!("`family`: window scenarios take cycle_matching or random_regular, got `{other}`"),
                );
                None
            }
        },
        (None, Some((name, line))) => {
            let params: Vec<(String, String)> = sec
                .entries
                .iter()
                .filter(|e| !e.used)
                .map(|e| (e.key.clone(), e.value.clone()))
                .collect();
            for e in sec.entries.iter_mut() {
                e.used = true;
            }
            let fam = Family::from_params(&name, &params).and_then(|f| f.validate().map(|_| f));
            let fam = match fam {
                Ok(f) => f,
                Err(e) => {
                    let l = core_error_line(&e, sec, line);
                    ps.err(Some(l), format!("[graph]: {e}"));
                    return None;
                }
            };
            let needed = match kind {
                ScenarioKind::Eit => Some("torus"),
                ScenarioKind::Prop1 => Some("cayley"),
                _ => None,
            };
            if let Some(needed) = needed {
                if fam.name() != needed {
                    ps.err(
                        Some(line),
                        format!(
                            "`family`: {} scenarios need a {needed} graph",
                            kind.as_str()
                        ),
                    );
                    return None;
                }
            }
            if fam.name() == "custom" {
                ps.err(Some(line), "`family`: custom graphs must come from a file");
                return None;
            }
            Some(GraphSource::Family(fam))
        }
    }
}

fn parse_estimator(
    ps: &mut Parser,
    sec: &mut Section,
    kind: ScenarioKind,
    graph: Option<&GraphSource>,
) -> Option<Estimator> {
    if sec.line.is_none() {
        ps.err(None, "missing section [estimator]");
        return None;
    }
    let samples = |ps: &mut Parser, sec: &mut Section| -> Option<usize> {
        let (n, l) = ps.required::<usize>(sec, "samples", COUNT)?;
        ps.check(n >= 1, Some(l), "samples", "need at least one sample")
            .then_some(n)
    };
    let prob = |ps: &mut Parser, sec: &mut Section, key: &str| -> Option<f64> {
        let (p, l) = ps.required::<f64>(sec, key, NUMBER)?;
        ps.check(
            in_unit_closed(p),
            Some(l),
            key,
            format!("{p} is out of range [0, 1]"),
        )
        .then_some(p)
    };
    let frac = |ps: &mut Parser, sec: &mut Section, key: &str| -> Option<f64> {
        let (a, l) = ps.required::<f64>(sec, key, NUMBER)?;
        ps.check(
            in_unit_open_closed(a),
            Some(l),
            key,
            format!("{a} is out of range (0, 1]"),
        )
        .then_some(a)
    };

    match kind {
        ScenarioKind::Threshold => {
            let alpha = ps.list::<f64>(sec, "alpha", NUMBER).and_then(|(xs, l)| {
                let bad: Vec<String> = xs
                    .iter()
                    .filter(|a| !in_unit_open_closed(**a))
                    .map(|a| a.to_string())
                    .collect();
                ps.check(
                    bad.is_empty(),
                    Some(l),
                    "alpha",
                    format!("{} out of range (0, 1]", bad.join(", ")),
                )
                .then_some(xs)
            });
            let samples = samples(ps, sec);
            let ci = ps
                .optional::<f64>(sec, "ci_level", NUMBER, threshold::DEFAULT_CI_LEVEL)
                .and_then(|(c, l)| {
                    ps.check(
                        c > 0.0 && c < 1.0,
                        l,
                        "ci_level",
                        format!("{c} is out of range (0, 1)"),
                    )
                    .then_some(c)
                });
            Some(Estimator::Threshold {
                alpha: alpha?,
                samples: samples?,
                ci_level: ci?,
            })
        }
        ScenarioKind::Theta => {
            let p = ps.list::<f64>(sec, "p", NUMBER).and_then(|(xs, l)| {
                let ok = xs.iter().all(|&p| in_unit_closed(p));
                ps.check(ok, Some(l), "p", "every value must lie in [0, 1]")
                    .then_some(())
                    .and_then(|_| {
                        ps.check(
                            xs.windows(2).all(|w| w[0] <= w[1]),
                            Some(l),
                            "p",
                            "grid must be non-decreasing",
                        )
                        .then_some(xs)
                    })
            });
            let samples = samples(ps, sec);
            Some(Estimator::Theta {
                p: p?,
                samples: samples?,
            })
        }
        ScenarioKind::Uniqueness => {
            let p = prob(ps, sec, "p");
            let c = frac(ps, sec, "c");
            let samples = samples(ps, sec);
            Some(Estimator::Uniqueness {
                p: p?,
                c: c?,
                samples: samples?,
            })
        }
        ScenarioKind::Gap => {
            let a1 = frac(ps, sec, "alpha1");
            let a2 = frac(ps, sec, "alpha2");
            let samples = samples(ps, sec);
            let (a1, a2) = (a1?, a2?);
            let line = sec
                .entries
                .iter()
                .find(|e| e.key == "alpha2")
                .map(|e| e.line);
            ps.check(
                a1 <= a2,
                line,
                "alpha2",
                format!("need alpha1 <= alpha2, got {a1} > {a2}"),
            )
            .then_some(Estimator::Gap {
                alpha1: a1,
                alpha2: a2,
                samples: samples?,
            })
        }
        ScenarioKind::Window => {
            let sizes = ps.list::<usize>(sec, "sizes", COUNT).and_then(|(xs, l)| {
                ps.check(
                    xs.len() >= 3,
                    Some(l),
                    "sizes",
                    "need at least three sizes for a fit",
                )
                .then_some(())?;
                let mut ok = true;
                if let Some(GraphSource::Ensemble(e)) = graph {
                    for &n in &xs {
                        let fam = match e {
                            EnsembleFamily::CycleMatching => Family::CycleMatching { n, seed: 0 },
                            EnsembleFamily::RandomRegular { k } => {
                                Family::RandomRegular { n, k: *k, seed: 0 }
                            }
                        };
                        if let Err(err) = fam.validate() {
                            ps.err(Some(l), format!("`sizes`: size {n}: {err}"));
                            ok = false;
                        }
                    }
                }
                ok.then_some(xs)
            });
            let p = prob(ps, sec, "p");
            let samples = samples(ps, sec);
            Some(Estimator::Window {
                sizes: sizes?,
                p: p?,
                samples: samples?,
            })
        }
        ScenarioKind::Eit => {
            let u = ps.list::<usize>(sec, "u", COUNT);
            let v = ps.list::<usize>(sec, "v", COUNT);
            let pairs = ps.required::<usize>(sec, "pairs", COUNT);
            let ((u, ul), (v, vl)) = (u?, v?);
            let mut ok = true;
            if let Some(GraphSource::Family(Family::Torus { side, dim })) = graph {
                for (key, xs, l) in [("u", &u, ul), ("v", &v, vl)] {
                    ok &= ps.check(
                        xs.len() == *dim,
                        Some(l),
                        key,
                        format!("need {dim} coordinates, got {}", xs.len()),
                    );
                    ok &= ps.check(
                        xs.iter().all(|&x| x < *side),
                        Some(l),
                        key,
                        format!("coordinates must be below {side}"),
                    );
                }
            }
            ok &= ps.check(u != v, Some(vl), "v", "endpoints must differ");
            let (pairs, pl) = pairs?;
            ok &= ps.check(pairs >= 1, Some(pl), "pairs", "need at least one pair");
            ok.then_some(Estimator::Eit { u, v, pairs })
        }
        ScenarioKind::Resistance => {
            let pairs = ps
                .required::<usize>(sec, "pairs", COUNT)
                .and_then(|(n, l)| {
                    ps.check(n >= 1, Some(l), "pairs", "need at least one pair")
                        .then_some(n)
                });
            let tol = ps
                .optional::<f64>(sec, "tol", NUMBER, perclab_core::resistance::DEFAULT_TOL)
                .and_then(|(t, l)| {
                    ps.check(
                        t > 0.0 && t < 1.0,
                        l,
                        "tol",
                        format!("{t} is out of range (0, 1)"),
                    )
                    .then_some(t)
                });
            Some(Estimator::Resistance {
                pairs: pairs?,
                tol: tol?,
            })
        }
        ScenarioKind::Bounds => {
            let a = ps.required::<u64>(sec, "a_size", COUNT);
            let l = ps.required::<u32>(sec, "l", COUNT);
            let k = ps.required::<u64>(sec, "k", COUNT);
            let eps = ps.required::<f64>(sec, "eps", NUMBER);
            let (a, al) = a?;
            let (l, ll) = l?;
            let (k, kl) = k?;
            let (eps, el) = eps?;
            let mut ok = ps.check(a >= 1, Some(al), "a_size", "must be at least 1");
            ok &= ps.check(l >= 1, Some(ll), "l", "must be at least 1");
            ok &= ps.check(k >= 1, Some(kl), "k", "must be at least 1");
            ok &= ps.check(
                eps > 0.0 && eps < 1.0,
                Some(el),
                "eps",
                format!("{eps} is out of range (0, 1)"),
            );
            ok.then_some(Estimator::Bounds {
                a_size: a,
                l,
                k,
                eps,
            })
        }
        ScenarioKind::Geometry => {
            let (f, l) = ps.optional::<f64>(sec, "fraction", NUMBER, 0.25)?;
            ps.check(
                f > 0.0 && f <= 0.5,
                l,
                "fraction",
                format!("{f} is out of range (0, 0.5]"),
            )
            .then_some(Estimator::Geometry { fraction: f })
        }
        ScenarioKind::Prop1 => {
            let p = prob(ps, sec, "p");
            let c = frac(ps, sec, "c");
            let samples = samples(ps, sec);
            let pairs = ps.optional::<usize>(sec, "pairs", COUNT, 100).map(|x| x.0);
            Some(Estimator::Prop1 {
                p: p?,
                c: c?,
                samples: samples?,
                pairs: pairs?,
            })
        }
    }
}
