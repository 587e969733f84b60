//! Built-in navigation scenarios, the exact-counting oracle and
//! reproducible simulation runners.
//!
//! Two regimes are provided:
//!
//! * **stationary**: one multiset of paths traversed in shuffled passes
//!   (Fisher–Yates per pass) until `draws_per_phase` sequences were ingested;
//! * **sequential**: several phases, each drawing `draws_per_phase` sequences
//!   i.i.d. uniformly from that phase's multiset only.
//!
//! Randomness comes from a SplitMix64 generator seeded with
//! [`RunConfig::seed`], so a report is byte-identical for identical inputs.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::abit::MarkovOrder;
use crate::abith::{HabitModel, ModelConfig, PathPrediction, PredictOptions};
use crate::probcore::{evidence, EvidenceDb, Window};
use crate::taskmodel;
use crate::{Error, Result};

/// One path of a scenario multiset with its number of copies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioPath {
    pub label: String,
    pub tokens: Vec<String>,
    pub copies: u32,
}

impl ScenarioPath {
    pub fn new(label: impl Into<String>, path: &str, copies: u32) -> Self {
        Self {
            label: label.into(),
            tokens: path.split_whitespace().map(str::to_string).collect(),
            copies,
        }
    }

    pub fn path_string(&self) -> String {
        self.tokens.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub name: String,
    pub phases: Vec<Vec<ScenarioPath>>,
}

impl Scenario {
    pub fn new(name: impl Into<String>, phases: Vec<Vec<ScenarioPath>>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::InvalidConfig("scenario needs at least one phase".into()));
        }
        for phase in &phases {
            if phase.is_empty() {
                return Err(Error::InvalidConfig("scenario phase without paths".into()));
            }
            for p in phase {
                if p.tokens.is_empty() {
                    return Err(Error::InvalidConfig(format!("path {} is empty", p.label)));
                }
                if p.copies == 0 {
                    return Err(Error::InvalidConfig(format!("path {} has 0 copies", p.label)));
                }
            }
        }
        Ok(Self {
            name: name.into(),
            phases,
        })
    }

    pub fn all_paths(&self) -> impl Iterator<Item = &ScenarioPath> {
        self.phases.iter().flatten()
    }

    /// Label of the scenario path with exactly these tokens.
    pub fn label_of(&self, names: &[String]) -> Option<&str> {
        self.all_paths()
            .find(|p| p.tokens == names)
            .map(|p| p.label.as_str())
    }
}

/// Ten menu paths, 13 sequences once copies are expanded.
pub fn stationary_scenario() -> Scenario {
    let rows = [
        ("1a 2a 3b 4b", 1),
        ("1a 2a 3b 4c", 3),
        ("1a 2b 3b 4b", 1),
        ("1a 2a 3a 4a", 2),
        ("1a 2a 3c 4a", 1),
        ("1b 2b 3b 4b", 1),
        ("1c 2b 3a", 1),
        ("1c 2b 3a 4b", 1),
        ("1c 2b 3a 4b 5c", 1),
        ("1d 2b 3a 4c 5d", 1),
    ];
    let paths = rows
        .iter()
        .enumerate()
        .map(|(i, (p, c))| ScenarioPath::new(format!("seq {}", i + 1), p, *c))
        .collect();
    Scenario::new("stationary", vec![paths]).expect("built-in scenario")
}

/// Twenty paths of a six-level menu, in four groups of five.
pub fn sequential_scenario() -> Scenario {
    let groups: [[&str; 5]; 4] = [
        [
            "#2 #21 #211 #2112",
            "#1 #11 #111",
            "#3 #33 #331",
            "#4 #42 #421 #4211",
            "#4 #42 #421 #4212 #42121",
        ],
        [
            "#2 #21 #211 #2111 #21112",
            "#3 #34 #3221",
            "#2 #22 #33 #331",
            "#2 #23 #233",
            "#2 #23 #232 #2321 #23211 #232111",
        ],
        [
            "#3 #32 #321",
            "#4 #41 #411 #4111",
            "#1 #11 #112 #1122 #21112",
            "#3 #31",
            "#2 #23 #232 #2322",
        ],
        [
            "#1 #11 #112 #1121 #11211 #112111",
            "#3 #32 #322 #3221",
            "#2 #23 #231",
            "#2 #21 #211 #2111 #21111",
            "#1 #11 #211 #2112",
        ],
    ];
    let phases = groups
        .iter()
        .enumerate()
        .map(|(g, paths)| {
            paths
                .iter()
                .enumerate()
                .map(|(i, p)| ScenarioPath::new(format!("g{}.{}", g + 1, i + 1), p, 1))
                .collect()
        })
        .collect();
    Scenario::new("sequential", phases).expect("built-in scenario")
}

/// Number of multiset sequences (copies included) of length `>= min_len`
/// starting with `prefix`.
fn prefix_count(multiset: &[ScenarioPath], prefix: &[String], min_len: usize) -> u64 {
    multiset
        .iter()
        .filter(|p| p.tokens.len() >= min_len && p.tokens.starts_with(prefix))
        .map(|p| u64::from(p.copies))
        .sum()
}

/// Exact conditional `N(prefix·t) / N(prefix)` for every position `n` of
/// `path`, both counts taken over sequences reaching rank `n`; 0 where the
/// prefix never reaches that rank.
pub fn oracle_conditionals(multiset: &[ScenarioPath], path: &[String]) -> Vec<f64> {
    (1..=path.len())
        .map(|n| {
            let before = prefix_count(multiset, &path[..n - 1], n);
            if before == 0 {
                0.0
            } else {
                prefix_count(multiset, &path[..n], n) as f64 / before as f64
            }
        })
        .collect()
}

/// Theoretical joint evidence of a complete multiset path. Paths that are
/// strict prefixes of other paths carry no joint evidence and yield the NaN
/// marker.
pub fn oracle_evidence(multiset: &[ScenarioPath], path: &[String]) -> Result<EvidenceDb> {
    if !multiset.iter().any(|p| p.tokens == path) {
        return Err(Error::PathNotInMultiset(path.join(" ")));
    }
    let is_prefix = multiset
        .iter()
        .any(|p| p.tokens.len() > path.len() && p.tokens[..path.len()] == *path);
    if is_prefix {
        return Ok(EvidenceDb::NAN);
    }
    let joint: f64 = oracle_conditionals(multiset, path).iter().product();
    evidence(joint)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    /// Sequences ingested per phase. Stationary runs use shuffled passes, so
    /// this is `passes × multiset size`.
    pub draws_per_phase: usize,
    pub window: Window,
    pub order: MarkovOrder,
    pub reserve: f64,
    pub p_min: f64,
    pub max_results: usize,
}

impl RunConfig {
    /// 300 shuffled passes over 13 sequences, window 200.
    pub fn stationary() -> Self {
        Self {
            seed: DEFAULT_SEED,
            draws_per_phase: 3900,
            window: Window::new(200.0).expect("valid window"),
            order: MarkovOrder::Unbounded,
            reserve: 0.5,
            p_min: 0.001,
            max_results: 16,
        }
    }

    /// 50 uniform draws per phase, window 32. `max_results` covers all 20
    /// scenario paths.
    pub fn sequential() -> Self {
        Self {
            seed: DEFAULT_SEED,
            draws_per_phase: 50,
            window: Window::new(32.0).expect("valid window"),
            order: MarkovOrder::Unbounded,
            reserve: 0.5,
            p_min: 0.001,
            max_results: 32,
        }
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            window: self.window,
            order: self.order,
            reserve: self.reserve,
        }
    }

    pub fn predict_options(&self) -> Result<PredictOptions> {
        PredictOptions::new(self.max_results, self.p_min)
    }

    fn validate(&self) -> Result<()> {
        if self.draws_per_phase == 0 {
            return Err(Error::InvalidConfig("draws_per_phase must be >= 1".into()));
        }
        self.model_config().params()?;
        self.predict_options()?;
        Ok(())
    }
}

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Stationary,
    Sequential,
}

/// Score of a scenario path against the model at the end of a phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PathScore {
    pub label: String,
    pub path: String,
    pub joint: f64,
    pub evidence: EvidenceDb,
}

/// Measured versus theoretical values for one predicted path.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    pub label: Option<String>,
    pub path: String,
    pub measured_steps: Vec<f64>,
    pub oracle_steps: Vec<f64>,
    pub measured: EvidenceDb,
    /// `None` when the path is not in the multiset (a recombination).
    pub oracle: Option<EvidenceDb>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReport {
    pub phase: usize,
    pub predictions: Vec<PathPrediction>,
    pub model_size: usize,
    pub max_len: usize,
    pub clock: u64,
    pub dot: String,
    pub path_scores: Vec<PathScore>,
    /// Stationary runs only.
    pub oracle: Vec<OracleComparison>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub scenario: Scenario,
    pub regime: Regime,
    pub config: RunConfig,
    pub phases: Vec<PhaseReport>,
}

/// A finished run: the report plus the final model.
#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub report: RunReport,
    pub model: HabitModel,
}

fn expand(multiset: &[ScenarioPath]) -> Vec<usize> {
    multiset
        .iter()
        .enumerate()
        .flat_map(|(i, p)| std::iter::repeat_n(i, p.copies as usize))
        .collect()
}

pub fn run_stationary(scenario: &Scenario, config: &RunConfig) -> Result<SimulationRun> {
    if scenario.phases.len() != 1 {
        return Err(Error::InvalidConfig(format!(
            "stationary runs need exactly one phase, scenario {} has {}",
            scenario.name,
            scenario.phases.len()
        )));
    }
    config.validate()?;
    let mut rng = SplitMix64::seed_from_u64(config.seed);
    let mut model = HabitModel::new(config.model_config())?;
    let multiset = &scenario.phases[0];
    let mut order = expand(multiset);
    let mut drawn = 0;
    while drawn < config.draws_per_phase {
        order.shuffle(&mut rng);
        for &i in &order {
            if drawn == config.draws_per_phase {
                break;
            }
            model.ingest(&multiset[i].tokens)?;
            drawn += 1;
        }
    }
    let phase = phase_report(&model, scenario, config, 1, Some(multiset))?;
    Ok(SimulationRun {
        report: RunReport {
            scenario: scenario.clone(),
            regime: Regime::Stationary,
            config: *config,
            phases: vec![phase],
        },
        model,
    })
}

pub fn run_sequential(scenario: &Scenario, config: &RunConfig) -> Result<SimulationRun> {
    if scenario.phases.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "sequential runs need at least two phases, scenario {} has {}",
            scenario.name,
            scenario.phases.len()
        )));
    }
    config.validate()?;
    let mut rng = SplitMix64::seed_from_u64(config.seed);
    let mut model = HabitModel::new(config.model_config())?;
    let mut phases = Vec::with_capacity(scenario.phases.len());
    for (idx, multiset) in scenario.phases.iter().enumerate() {
        let pool = expand(multiset);
        for _ in 0..config.draws_per_phase {
            let i = pool[rng.random_range(0..pool.len())];
            model.ingest(&multiset[i].tokens)?;
        }
        phases.push(phase_report(&model, scenario, config, idx + 1, None)?);
    }
    Ok(SimulationRun {
        report: RunReport {
            scenario: scenario.clone(),
            regime: Regime::Sequential,
            config: *config,
            phases,
        },
        model,
    })
}

fn phase_report(
    model: &HabitModel,
    scenario: &Scenario,
    config: &RunConfig,
    phase: usize,
    oracle_multiset: Option<&[ScenarioPath]>,
) -> Result<PhaseReport> {
    let opts = config.predict_options()?;
    let predictions = model.predict(&[], &opts);
    let graph = taskmodel::extract_ids(model, &[], &opts, taskmodel::DEFAULT_HIGHLIGHTS);
    let path_scores = scenario
        .all_paths()
        .map(|p| {
            let (joint, ev) = match model.score_names(&[] as &[&str], &p.tokens) {
                Some(s) => (s.joint, s.evidence),
                None => (0.0, evidence(0.0).expect("0 is a probability")),
            };
            PathScore {
                label: p.label.clone(),
                path: p.path_string(),
                joint,
                evidence: ev,
            }
        })
        .collect();
    let oracle = match oracle_multiset {
        Some(ms) => predictions
            .iter()
            .map(|pred| OracleComparison {
                label: scenario.label_of(&pred.names).map(str::to_string),
                path: pred.path_string(),
                measured_steps: pred.step_probs.clone(),
                oracle_steps: oracle_conditionals(ms, &pred.names),
                measured: pred.evidence,
                oracle: oracle_evidence(ms, &pred.names).ok(),
            })
            .collect(),
        None => Vec::new(),
    };
    Ok(PhaseReport {
        phase,
        predictions,
        model_size: model.model_size(),
        max_len: model.max_len(),
        clock: model.clock().0,
        dot: graph.to_dot(),
        path_scores,
        oracle,
    })
}

fn fmt_db(e: EvidenceDb) -> String {
    let db = e.db();
    if db.is_nan() {
        "NaN".into()
    } else if db.is_infinite() {
        if db > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{db:.2}")
    }
}

impl RunReport {
    /// Ranked-path tables in the `1a(0.62) 2a(0.87) -> (-5 dB)` layout.
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let regime = match self.regime {
            Regime::Stationary => "stationary",
            Regime::Sequential => "sequential",
        };
        let _ = writeln!(out, "scenario: {} ({regime}, {} phase(s))", self.scenario.name, self.phases.len());
        let _ = writeln!(
            out,
            "config: seed={} draws_per_phase={} window={} order={} reserve={} p_min={} max_results={}",
            c.seed, c.draws_per_phase, c.window, c.order, c.reserve, c.p_min, c.max_results
        );
        for ph in &self.phases {
            let _ = writeln!(out);
            let _ = writeln!(out, "== phase {} ==", ph.phase);
            let _ = writeln!(
                out,
                "model_size: {}  L_max: {}  clock: {}  predicted paths: {}",
                ph.model_size,
                ph.max_len,
                ph.clock,
                ph.predictions.len()
            );
            let _ = writeln!(out, "Rank\tPath\tLabel");
            for (i, pred) in ph.predictions.iter().enumerate() {
                let label = self.scenario.label_of(&pred.names).unwrap_or("?");
                let _ = writeln!(out, "{}\t{}\t{}", i + 1, pred.render(), label);
            }
            if !ph.oracle.is_empty() {
                let _ = writeln!(out, "Oracle comparison (measured dB / oracle dB, max step error)");
                for oc in &ph.oracle {
                    let max_err = oc
                        .measured_steps
                        .iter()
                        .zip(&oc.oracle_steps)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    let _ = writeln!(
                        out,
                        "{}\t{}\t{}\t{}\t{:.4}",
                        oc.label.as_deref().unwrap_or("?"),
                        oc.path,
                        fmt_db(oc.measured),
                        oc.oracle.map_or_else(|| "absent".to_string(), fmt_db),
                        max_err
                    );
                }
            }
            let _ = writeln!(out, "Scenario path scores");
            for s in &ph.path_scores {
                let _ = writeln!(out, "{}\t{}\t{}", s.label, s.path, fmt_db(s.evidence));
            }
        }
        out
    }

    /// Columns `phase rank path joint_probability evidence_db`, followed by
    /// a `model_size <phase> <size>` line for every phase.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("phase\trank\tpath\tjoint_probability\tevidence_db\n");
        for ph in &self.phases {
            for (i, pred) in ph.predictions.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{:e}\t{}",
                    ph.phase,
                    i + 1,
                    pred.path_string(),
                    pred.joint,
                    fmt_db(pred.evidence)
                );
            }
            let _ = writeln!(out, "model_size\t{}\t{}", ph.phase, ph.model_size);
        }
        out
    }
}
