//! Paired SA-versus-FV replications on synthetic landscapes or QAOA graphs.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::relative_error;
use super::BenchError;
use crate::annealer::SaParams;
use crate::fv::{fv_run, Event, FvConfig};
use crate::landscape::{read_landscape, synthesize, GridSpec, Landscape, SynthesisParams};
use crate::objective::{DomainBox, Objective, QaoaObjective, Shots, SyntheticObjective};
use crate::qaoa::{max_cut_oracle, random_graph, read_graph, QaoaProblem};
use crate::rng::{derive_path, derive_seed, Stream};

const FUNCTION_LABEL: u64 = 1;
const REPLICATION_LABEL: u64 = 2;
const ANSATZ_STREAM: u64 = 0;
const SA_STREAM: u64 = 1;
const FV_STREAM: u64 = 2;

/// Landscape draws tried per function before the ansatz rule is declared
/// infeasible.
pub const MAX_FUNCTION_RESAMPLES: u64 = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub grid_points: usize,
    pub domain_lo: [f64; 2],
    pub domain_hi: [f64; 2],
    pub functions: usize,
    /// `rng_seed` is ignored: each function derives its own from the master seed.
    pub synthesis: SynthesisParams,
    /// Replay a stored landscape instead of synthesizing `functions` new ones.
    pub landscape_in: Option<PathBuf>,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            grid_points: 100,
            domain_lo: [0.0, 0.0],
            domain_hi: [1.0, 1.0],
            functions: 10,
            synthesis: SynthesisParams::default(),
            landscape_in: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QaoaSpec {
    pub nodes: usize,
    pub layers: usize,
    /// `0` requests exact expectations.
    pub shots: u32,
    pub graphs: usize,
    pub graph_seed: u64,
    pub graph_in: Option<PathBuf>,
    /// Cut value treated as the worst possible estimate of the maximum.
    pub fworst: f64,
}

impl Default for QaoaSpec {
    fn default() -> Self {
        Self {
            nodes: 8,
            layers: 1,
            shots: 512,
            graphs: 1,
            graph_seed: 0,
            graph_in: None,
            fworst: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectiveSpec {
    Synthetic(SyntheticSpec),
    Qaoa(QaoaSpec),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnsatzRule {
    /// Grid points of nominal plateaus farther than `min_distance` from the
    /// global minimum (synthetic objectives only).
    BarrenGrid { min_distance: f64 },
    /// Uniform in the domain box.
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    pub objective: ObjectiveSpec,
    pub fv: FvConfig,
    pub sa: SaParams,
    pub replications: usize,
    pub ansatz: AnsatzRule,
    pub master_seed: u64,
    /// Give the SA and FV runs of a replication the same particle streams.
    pub shared_streams: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self::synthetic()
    }
}

impl ExperimentSpec {
    /// 10 functions at 70% nominal barren fraction, 10 particles, `α = 1`,
    /// 50 steps, full exploration, ansätze on plateaus at distance > 0.6.
    pub fn synthetic() -> Self {
        Self {
            objective: ObjectiveSpec::Synthetic(SyntheticSpec::default()),
            fv: FvConfig::default(),
            sa: SaParams::default(),
            replications: 10,
            ansatz: AnsatzRule::BarrenGrid { min_distance: 0.6 },
            master_seed: 0,
            shared_streams: false,
        }
    }

    /// One 8-node graph, `L = 1`, 512 shots, 10 particles, uniform ansätze.
    pub fn qaoa() -> Self {
        Self {
            objective: ObjectiveSpec::Qaoa(QaoaSpec::default()),
            ansatz: AnsatzRule::Uniform,
            ..Self::synthetic()
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        self.fv.validate()?;
        self.sa.validate().map_err(crate::fv::FvError::from)?;
        if self.replications == 0 {
            return Err(BenchError::Config("replications must be at least 1".into()));
        }
        match (&self.objective, self.ansatz) {
            (ObjectiveSpec::Qaoa(_), AnsatzRule::BarrenGrid { .. }) => {
                return Err(BenchError::Config("the barren-grid ansatz rule needs a synthetic objective".into()))
            }
            (_, AnsatzRule::BarrenGrid { min_distance }) if !(min_distance >= 0.0 && min_distance.is_finite()) => {
                return Err(BenchError::Config(format!("invalid ansatz min_distance {min_distance}")))
            }
            _ => {}
        }
        match &self.objective {
            ObjectiveSpec::Synthetic(s) => {
                if s.functions == 0 {
                    return Err(BenchError::Config("functions must be at least 1".into()));
                }
                let grid = GridSpec::new(s.domain_lo, s.domain_hi, s.grid_points)?;
                s.synthesis.validate(&grid)?;
            }
            ObjectiveSpec::Qaoa(q) => {
                if q.graphs == 0 || q.layers == 0 || q.nodes < 2 || q.nodes > crate::qaoa::MAX_QUBITS {
                    return Err(BenchError::Config(format!(
                        "QAOA needs graphs ≥ 1, layers ≥ 1 and 2 ≤ nodes ≤ {}",
                        crate::qaoa::MAX_QUBITS
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "SA")]
    Sa,
    #[serde(rename = "FV")]
    Fv,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Sa => "SA",
            Method::Fv => "FV",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "SA" => Ok(Method::Sa),
            "FV" => Ok(Method::Fv),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub function_id: usize,
    pub method: Method,
    pub replication: usize,
    /// Minimum found for synthetic objectives; best cut estimate for QAOA.
    pub best_value: f64,
    pub relative_error: f64,
    /// Evaluations charged by annealing steps.
    pub eval_count: u64,
    pub absorptions: usize,
    pub reinitializations: usize,
    pub reactivations: usize,
    pub seed: u64,
}

/// A record with the run details that do not go into the CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub record: RunRecord,
    pub events: Vec<Event>,
    pub calibration_evals: u64,
    pub per_particle_best: Vec<f64>,
    pub ansatze: Vec<Vec<f64>>,
}

/// A concrete benchmark function with its error normalization.
#[derive(Clone, Debug)]
pub enum Instance {
    Synthetic(Arc<Landscape>),
    Qaoa { problem: Arc<QaoaProblem>, shots: Shots, max_cut: f64, fworst: f64 },
}

impl Instance {
    pub fn objective(&self) -> Box<dyn Objective> {
        match self {
            Instance::Synthetic(l) => Box::new(SyntheticObjective::new(l.clone())),
            Instance::Qaoa { problem, shots, .. } => Box::new(QaoaObjective::new(problem.clone(), *shots)),
        }
    }

    pub fn domain(&self) -> DomainBox {
        match self {
            Instance::Synthetic(l) => {
                let g = l.grid();
                DomainBox::new(g.domain_lo.to_vec(), g.domain_hi.to_vec()).expect("grid domain is a valid box")
            }
            Instance::Qaoa { problem, .. } => problem.domain(),
        }
    }

    /// Optimal value in reporting units.
    pub fn fstar(&self) -> f64 {
        match self {
            Instance::Synthetic(l) => l.global_min_val(),
            Instance::Qaoa { max_cut, .. } => *max_cut,
        }
    }

    /// The worst possible estimate of the optimum, in reporting units.
    pub fn fworst(&self) -> f64 {
        match self {
            Instance::Synthetic(l) => l.max_value(),
            Instance::Qaoa { fworst, .. } => *fworst,
        }
    }

    /// Convert a minimized objective value to reporting units.
    pub fn report(&self, minimized: f64) -> f64 {
        match self {
            Instance::Synthetic(_) => minimized,
            Instance::Qaoa { .. } => -minimized,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchFunction {
    pub id: usize,
    pub instance: Instance,
    /// Seed that produced the landscape or graph.
    pub source_seed: u64,
}

fn eligible_cells(l: &Landscape, min_distance: f64) -> Vec<[f64; 2]> {
    let [mx, my] = l.global_min_pos();
    l.barren_cells()
        .into_iter()
        .map(|(i, j)| l.grid().point(i, j))
        .filter(|p| ((p[0] - mx).powi(2) + (p[1] - my).powi(2)).sqrt() > min_distance)
        .collect()
}

/// Draw `n` ansätze under `rule`.
pub fn draw_ansatze(instance: &Instance, rule: AnsatzRule, n: usize, rng: &mut Stream) -> Result<Vec<Vec<f64>>, BenchError> {
    match (rule, instance) {
        (AnsatzRule::Uniform, _) => {
            let domain = instance.domain();
            Ok((0..n).map(|_| domain.sample_uniform(rng)).collect())
        }
        (AnsatzRule::BarrenGrid { min_distance }, Instance::Synthetic(l)) => {
            let cells = eligible_cells(l, min_distance);
            if cells.is_empty() {
                return Err(BenchError::AnsatzInfeasible(format!(
                    "no nominal barren grid point lies farther than {min_distance} from the global minimum"
                )));
            }
            Ok((0..n).map(|_| cells[rng.index(cells.len())].to_vec()).collect())
        }
        (AnsatzRule::BarrenGrid { .. }, Instance::Qaoa { .. }) => {
            Err(BenchError::Config("the barren-grid ansatz rule needs a synthetic objective".into()))
        }
    }
}

fn feasible(instance: &Instance, rule: AnsatzRule) -> bool {
    match (rule, instance) {
        (AnsatzRule::BarrenGrid { min_distance }, Instance::Synthetic(l)) => !eligible_cells(l, min_distance).is_empty(),
        _ => true,
    }
}

/// Build the benchmark functions. Synthesized landscapes that admit no
/// ansatz are redrawn with the next derived seed.
pub fn prepare_functions(spec: &ExperimentSpec) -> Result<Vec<BenchFunction>, BenchError> {
    spec.validate()?;
    match &spec.objective {
        ObjectiveSpec::Synthetic(s) => {
            if let Some(path) = &s.landscape_in {
                let l = read_landscape(path)?;
                let instance = Instance::Synthetic(Arc::new(l));
                if !feasible(&instance, spec.ansatz) {
                    return Err(BenchError::AnsatzInfeasible(format!(
                        "the landscape in {} admits no ansatz under the configured rule",
                        path.display()
                    )));
                }
                let source_seed = match &instance {
                    Instance::Synthetic(l) => l.effective_seed(),
                    Instance::Qaoa { .. } => unreachable!(),
                };
                return Ok(vec![BenchFunction {
                    id: 0,
                    instance,
                    source_seed,
                }]);
            }
            let grid = GridSpec::new(s.domain_lo, s.domain_hi, s.grid_points)?;
            (0..s.functions)
                .into_par_iter()
                .map(|id| {
                    let base = derive_path(spec.master_seed, &[FUNCTION_LABEL, id as u64]);
                    for attempt in 0..MAX_FUNCTION_RESAMPLES {
                        let seed = derive_seed(base, attempt);
                        let params = SynthesisParams {
                            rng_seed: seed,
                            ..s.synthesis
                        };
                        let instance = Instance::Synthetic(Arc::new(synthesize(grid, params)?));
                        if feasible(&instance, spec.ansatz) {
                            return Ok(BenchFunction {
                                id,
                                instance,
                                source_seed: seed,
                            });
                        }
                    }
                    Err(BenchError::AnsatzInfeasible(format!(
                        "function {id}: {MAX_FUNCTION_RESAMPLES} landscapes in a row admit no ansatz"
                    )))
                })
                .collect()
        }
        ObjectiveSpec::Qaoa(q) => {
            let graphs = match &q.graph_in {
                Some(path) => vec![(read_graph(path)?, q.graph_seed)],
                None => (0..q.graphs)
                    .map(|id| {
                        let seed = if id == 0 { q.graph_seed } else { derive_seed(q.graph_seed, id as u64) };
                        Ok((random_graph(q.nodes, &mut Stream::new(seed))?, seed))
                    })
                    .collect::<Result<Vec<_>, BenchError>>()?,
            };
            graphs
                .into_iter()
                .enumerate()
                .map(|(id, (g, seed))| {
                    let (max_cut, _) = max_cut_oracle(&g)?;
                    Ok(BenchFunction {
                        id,
                        instance: Instance::Qaoa {
                            problem: Arc::new(QaoaProblem::new(g, q.layers)?),
                            shots: Shots::from_count(q.shots),
                            max_cut,
                            fworst: q.fworst,
                        },
                        source_seed: seed,
                    })
                })
                .collect()
        }
    }
}

fn run_one(
    f: &BenchFunction,
    spec: &ExperimentSpec,
    method: Method,
    replication: usize,
    seed: u64,
    ansatze: &[Vec<f64>],
) -> Result<RunOutput, BenchError> {
    let cfg = FvConfig {
        seed,
        ..match method {
            Method::Sa => spec.fv.sa_baseline(),
            Method::Fv => spec.fv,
        }
    };
    let obj = f.instance.objective();
    let out = fv_run(&cfg, obj.as_ref(), ansatze, &spec.sa)?;
    let best_value = f.instance.report(out.best_value);
    Ok(RunOutput {
        record: RunRecord {
            function_id: f.id,
            method,
            replication,
            best_value,
            relative_error: relative_error(best_value, f.instance.fstar(), f.instance.fworst())?,
            eval_count: out.optimizer_evals,
            absorptions: out.absorptions(),
            reinitializations: out.reinitializations(),
            reactivations: out.reactivations(),
            seed,
        },
        calibration_evals: out.calibration_evals,
        per_particle_best: out.per_particle_best.iter().map(|&v| f.instance.report(v)).collect(),
        events: out.events,
        ansatze: ansatze.to_vec(),
    })
}

/// The SA and FV runs of one replication, from shared ansätze.
pub fn run_replication(f: &BenchFunction, spec: &ExperimentSpec, replication: usize) -> Result<[RunOutput; 2], BenchError> {
    let rep_seed = derive_path(spec.master_seed, &[REPLICATION_LABEL, f.id as u64, replication as u64]);
    let ansatze = draw_ansatze(
        &f.instance,
        spec.ansatz,
        spec.fv.particles,
        &mut Stream::new(derive_seed(rep_seed, ANSATZ_STREAM)),
    )?;
    let sa_seed = derive_seed(rep_seed, SA_STREAM);
    let fv_seed = if spec.shared_streams { sa_seed } else { derive_seed(rep_seed, FV_STREAM) };
    Ok([
        run_one(f, spec, Method::Sa, replication, sa_seed, &ansatze)?,
        run_one(f, spec, Method::Fv, replication, fv_seed, &ansatze)?,
    ])
}

/// Every replication of every function, ordered by function, replication,
/// then method (SA before FV).
pub fn run_paired(spec: &ExperimentSpec, functions: &[BenchFunction]) -> Result<Vec<RunOutput>, BenchError> {
    spec.validate()?;
    let jobs: Vec<(usize, usize)> =
        (0..functions.len()).flat_map(|f| (0..spec.replications).map(move |r| (f, r))).collect();
    let pairs = jobs
        .into_par_iter()
        .map(|(f, r)| run_replication(&functions[f], spec, r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(pairs.into_iter().flatten().collect())
}

pub fn run_paired_experiment(spec: &ExperimentSpec) -> Result<(Vec<BenchFunction>, Vec<RunOutput>), BenchError> {
    let functions = prepare_functions(spec)?;
    let runs = run_paired(spec, &functions)?;
    Ok((functions, runs))
}
