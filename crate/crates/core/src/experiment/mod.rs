//! Weight sweeps, best-of-R selection and per-engine frontier reports.
//!
//! A sweep is a flat map over `(engine, weight, run)` tasks followed by an
//! ordered reduce, so its output does not depend on how many worker threads
//! execute the map.

pub mod persist;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bfa::{run_bfa, BfaParams, RunResult};
use crate::engines::{EngineConfig, EngineKind};
use crate::error::{Error, Result};
use crate::metrics::{self, PointSet};
use crate::problem::{aggregate, DecisionVector, ObjectiveVector, WeightVector};

/// Nadir used for every frontier hypervolume.
pub const HVI_REFERENCE: [f64; 4] = [0.0; 4];

/// Best-of-R count used when none is given.
pub const DEFAULT_RUNS_PER_WEIGHT: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub engine: EngineKind,
    pub weights: WeightVector,
    pub run_id: usize,
    pub seed: u64,
    pub decision: DecisionVector,
    pub objectives: ObjectiveVector,
    #[serde(rename = "F")]
    pub fitness: f64,
    pub aer: f64,
}

impl SolutionRecord {
    /// Recomputed `sum(w_i f_i)` minus the stored aggregate.
    pub fn aggregate_residual(&self) -> f64 {
        aggregate(&self.objectives, &self.weights) - self.fitness
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// One entry per engine; the `seed` field of each is replaced by the
    /// derived per-run seed.
    pub engines: Vec<EngineConfig>,
    pub weights: Vec<WeightVector>,
    pub runs_per_weight: usize,
    pub master_seed: u64,
    pub bfa: BfaParams,
    pub aer_threshold: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.engines.is_empty() {
            return Err(Error::Config("at least one engine is required".into()));
        }
        if self.weights.is_empty() {
            return Err(Error::Config("the weight list is empty".into()));
        }
        if self.runs_per_weight < 1 {
            return Err(Error::Config("runs per weight must be at least 1".into()));
        }
        if !(self.aer_threshold.is_finite() && self.aer_threshold >= 0.0) {
            return Err(Error::Config(format!(
                "AER threshold must be finite and non-negative (got {})",
                self.aer_threshold
            )));
        }
        for e in &self.engines {
            e.validate()?;
        }
        self.bfa.validate()
    }

    /// Number of optimizer runs the sweep performs.
    pub fn total_runs(&self) -> usize {
        self.engines.len() * self.weights.len() * self.runs_per_weight
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrontierReport {
    pub engine: EngineKind,
    /// Best-of-R record per weight, in weight order.
    pub solutions: Vec<SolutionRecord>,
    /// Best-so-far trace of each selected record.
    pub traces: Vec<Vec<f64>>,
    pub hvi: f64,
    pub best: SolutionRecord,
    pub median: SolutionRecord,
    pub worst: SolutionRecord,
    pub mean_aer: f64,
}

impl FrontierReport {
    /// Assembles a report from per-weight records.
    pub fn from_solutions(engine: EngineKind, solutions: Vec<SolutionRecord>, traces: Vec<Vec<f64>>) -> Result<Self> {
        if solutions.is_empty() {
            return Err(Error::Config("a frontier needs at least one solution".into()));
        }
        let hvi = frontier_hvi(&solutions)?;
        let (best, median, worst) = best_median_worst(&solutions);
        let mean_aer = solutions.iter().map(|s| s.aer).sum::<f64>() / solutions.len() as f64;
        Ok(FrontierReport {
            engine,
            solutions,
            traces,
            hvi,
            best,
            median,
            worst,
            mean_aer,
        })
    }

    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            engine: self.engine,
            hvi: self.hvi,
            mean_aer: self.mean_aer,
            best: self.best,
            median: self.median,
            worst: self.worst,
            n_solutions: self.solutions.len(),
        }
    }
}

/// Serialized per-engine summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub engine: EngineKind,
    pub hvi: f64,
    pub mean_aer: f64,
    pub best: SolutionRecord,
    pub median: SolutionRecord,
    pub worst: SolutionRecord,
    pub n_solutions: usize,
}

/// Hypervolume of the records' objective vectors above [`HVI_REFERENCE`].
pub fn frontier_hvi(records: &[SolutionRecord]) -> Result<f64> {
    let points = records.iter().map(|r| r.objectives.0.to_vec()).collect();
    let set = PointSet::new(4, points)?;
    metrics::hvi_exact(&set, &HVI_REFERENCE)
}

/// Best, lower-median and worst record by aggregate F.
///
/// Records are sorted ascending by F with ties kept in input order; the
/// median is element `(n - 1) / 2` of that order.
pub fn best_median_worst(records: &[SolutionRecord]) -> (SolutionRecord, SolutionRecord, SolutionRecord) {
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| records[a].fitness.total_cmp(&records[b].fitness));
    let n = order.len();
    (records[order[n - 1]], records[order[(n - 1) / 2]], records[order[0]])
}

/// All 4-tuples `minimum + k_i * step` that sum to one, in lexicographic order.
pub fn generate_weights(step: f64, minimum: f64) -> Result<Vec<WeightVector>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Lattice(format!("step must be positive (got {step})")));
    }
    if !(minimum.is_finite() && minimum >= 0.0) {
        return Err(Error::Lattice(format!("minimum must be non-negative (got {minimum})")));
    }
    let divisions = (1.0 / step).round();
    if ((1.0 / step) - divisions).abs() > 1e-9 || divisions < 1.0 {
        return Err(Error::Lattice(format!("1/step must be an integer (step = {step})")));
    }
    if 4.0 * minimum > 1.0 + 1e-9 {
        return Err(Error::Lattice(format!("4 x minimum = {} exceeds 1", 4.0 * minimum)));
    }
    let free = (1.0 - 4.0 * minimum) / step;
    let free_units = free.round();
    if (free - free_units).abs() > 1e-9 {
        return Err(Error::Lattice(format!(
            "no lattice point sums to 1 with step {step} and minimum {minimum}"
        )));
    }
    let free_units = free_units as usize;
    // When the minimum sits on the lattice, weights are exact ratios k/n.
    let min_units = minimum * divisions;
    let on_lattice = (min_units - min_units.round()).abs() <= 1e-9;
    let value = |k: usize| {
        if on_lattice {
            (min_units.round() + k as f64) / divisions
        } else {
            minimum + k as f64 * step
        }
    };
    let mut out = Vec::new();
    for a in 0..=free_units {
        for b in 0..=free_units - a {
            for c in 0..=free_units - a - b {
                let d = free_units - a - b - c;
                out.push(WeightVector::new([value(a), value(b), value(c), value(d)])?);
            }
        }
    }
    Ok(out)
}

/// SplitMix64 finalizer; a bijection on `u64`.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const ENGINE_BITS: u32 = 16;
const INDEX_BITS: u32 = 24;

/// Per-run seed.
///
/// The indices are packed into one word (engine: 16 bits, weight and run:
/// 24 bits each), XORed with the mixed master seed and mixed again. Both
/// steps are bijective, so distinct in-range index triples always receive
/// distinct seeds under one master seed.
pub fn derive_seed(master_seed: u64, engine: usize, weight: usize, run: usize) -> u64 {
    assert!(engine < 1 << ENGINE_BITS, "engine index {engine} out of range");
    assert!(weight < 1 << INDEX_BITS, "weight index {weight} out of range");
    assert!(run < 1 << INDEX_BITS, "run index {run} out of range");
    let packed = ((engine as u64) << (2 * INDEX_BITS)) | ((weight as u64) << INDEX_BITS) | run as u64;
    mix64(mix64(master_seed) ^ packed)
}

#[derive(Clone, Copy, Debug)]
struct Task {
    engine: usize,
    weight: usize,
    run: usize,
}

fn run_task(config: &ExperimentConfig, task: Task) -> Result<RunResult> {
    let mut engine = config.engines[task.engine];
    engine.seed = derive_seed(config.master_seed, task.engine, task.weight, task.run);
    run_bfa(config.weights[task.weight], &config.bfa, engine).map_err(|source| Error::Run {
        engine: engine.kind.to_string(),
        weight: task.weight,
        run: task.run,
        source: Box::new(source),
    })
}

/// Runs the whole protocol with `jobs` worker threads (1 = serial).
///
/// For every engine and weight the run with the highest F is kept (lowest
/// run id on ties) and its explorative rate computed; per-engine reports
/// follow in engine order.
pub fn run_sweep(config: &ExperimentConfig, jobs: usize) -> Result<Vec<FrontierReport>> {
    config.validate()?;
    let runs = config.runs_per_weight;
    let tasks: Vec<Task> = (0..config.engines.len())
        .flat_map(|engine| {
            (0..config.weights.len()).flat_map(move |weight| (0..runs).map(move |run| Task { engine, weight, run }))
        })
        .collect();

    let results: Vec<Result<RunResult>> = if jobs <= 1 {
        tasks.iter().map(|&t| run_task(config, t)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))?;
        pool.install(|| tasks.par_iter().map(|&t| run_task(config, t)).collect())
    };
    let results: Vec<RunResult> = results.into_iter().collect::<Result<_>>()?;

    let mut reports = Vec::with_capacity(config.engines.len());
    for (e, engine) in config.engines.iter().enumerate() {
        let mut solutions = Vec::with_capacity(config.weights.len());
        let mut traces = Vec::with_capacity(config.weights.len());
        for (w, weights) in config.weights.iter().enumerate() {
            let base = (e * config.weights.len() + w) * runs;
            let group = &results[base..base + runs];
            let mut chosen = 0;
            for (run, r) in group.iter().enumerate() {
                if r.fitness > group[chosen].fitness {
                    chosen = run;
                }
            }
            let best = &group[chosen];
            let aer = metrics::aer(&best.trace, config.aer_threshold).map_err(|source| Error::Run {
                engine: engine.kind.to_string(),
                weight: w,
                run: chosen,
                source: Box::new(source),
            })?;
            solutions.push(SolutionRecord {
                engine: engine.kind,
                weights: *weights,
                run_id: chosen,
                seed: best.seed,
                decision: best.decision,
                objectives: best.objectives,
                fitness: best.fitness,
                aer,
            });
            traces.push(best.trace.clone());
        }
        reports.push(FrontierReport::from_solutions(engine.kind, solutions, traces)?);
    }
    Ok(reports)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HviRank {
    pub rank: usize,
    pub engine: EngineKind,
    pub hvi: f64,
    pub tied_with_previous: bool,
    /// Percentage by which the leader's HVI exceeds this one.
    pub gap_vs_leader: Option<f64>,
    /// Percentage by which the next-better entry's HVI exceeds this one.
    pub gap_vs_previous: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AerRank {
    pub rank: usize,
    pub engine: EngineKind,
    pub mean_aer: f64,
    pub tied_with_previous: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub hvi_ranking: Vec<HviRank>,
    pub aer_ranking: Vec<AerRank>,
}

/// Stable descending order with competition ranks (1, 1, 3, ...).
fn rank_descending(values: &[f64]) -> Vec<(usize, usize, bool)> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut out: Vec<(usize, usize, bool)> = Vec::with_capacity(order.len());
    for (pos, &i) in order.iter().enumerate() {
        let tied = pos > 0 && values[order[pos - 1]] == values[i];
        let rank = if tied { out[pos - 1].1 } else { pos + 1 };
        out.push((i, rank, tied));
    }
    out
}

/// Ranks engines by HVI (with percentage gaps) and by mean AER.
pub fn compare(reports: &[ReportSummary]) -> Comparison {
    let hvis: Vec<f64> = reports.iter().map(|r| r.hvi).collect();
    let ranked = rank_descending(&hvis);
    let leader = ranked.first().map(|&(i, _, _)| hvis[i]);
    let mut hvi_ranking = Vec::with_capacity(ranked.len());
    for (pos, &(i, rank, tied)) in ranked.iter().enumerate() {
        let (gap_vs_leader, gap_vs_previous) = if pos == 0 {
            (None, None)
        } else {
            let previous = hvis[ranked[pos - 1].0];
            (
                leader.and_then(|l| metrics::hvi_percent_gap(l, hvis[i]).ok()),
                metrics::hvi_percent_gap(previous, hvis[i]).ok(),
            )
        };
        hvi_ranking.push(HviRank {
            rank,
            engine: reports[i].engine,
            hvi: hvis[i],
            tied_with_previous: tied,
            gap_vs_leader,
            gap_vs_previous,
        });
    }
    let aers: Vec<f64> = reports.iter().map(|r| r.mean_aer).collect();
    let aer_ranking = rank_descending(&aers)
        .into_iter()
        .map(|(i, rank, tied)| AerRank {
            rank,
            engine: reports[i].engine,
            mean_aer: aers[i],
            tied_with_previous: tied,
        })
        .collect();
    Comparison {
        hvi_ranking,
        aer_ranking,
    }
}
