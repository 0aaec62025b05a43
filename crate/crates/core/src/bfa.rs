//! Bacteria foraging optimizer.
//!
//! One run cycles through chemotactic generations until the global budget
//! `nt` is spent. After every `nc` generations the swarm reproduces; after
//! every `nc * nr` generations it also goes through elimination-dispersal.
//! All randomness (initial positions, tumble directions, dispersal) comes
//! from a single [`StochasticEngine`], so a run is a pure function of its
//! landscape, parameters and engine config.
//!
//! Fitness is maximized. Each bacterium carries an augmented cost
//! `fitness - J_cc(theta)` where `J_cc` is the cell-to-cell signalling term;
//! attractant wells (negative `J_cc`) raise the augmented cost near the swarm.
//! The archive of the best plain fitness lives outside the swarm and is never
//! lost to dispersal.

use serde::{Deserialize, Serialize};

use crate::engines::{EngineConfig, StochasticEngine};
use crate::error::{Error, Result};
use crate::problem::{
    clamp_unit, DecisionVector, Landscape, NormalizedPoint, ObjectiveVector, WeightVector, WeightedSandMould, DIMENSION,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BfaParams {
    /// Global cap on chemotactic generations.
    pub nt: usize,
    /// Population size.
    pub pop: usize,
    /// Extra swim moves allowed after a tumble.
    pub ns: usize,
    /// Generations between reproductions.
    pub nc: usize,
    /// Reproductions between elimination-dispersal events.
    pub nr: usize,
    /// Elimination-dispersal events per full cycle.
    pub ned: usize,
    pub w_rep: f64,
    pub w_att: f64,
    pub h_rep: f64,
    pub h_att: f64,
    /// Chemotactic step length in normalized units.
    pub step: f64,
    /// Per-bacterium dispersal probability.
    pub ped: f64,
    pub swarming: bool,
}

impl Default for BfaParams {
    fn default() -> Self {
        BfaParams {
            nt: 200,
            pop: 25,
            ns: 5,
            nc: 10,
            nr: 5,
            ned: 5,
            w_rep: 10.0,
            w_att: 0.2,
            h_rep: 0.1,
            h_att: 0.1,
            step: 0.05,
            ped: 0.25,
            swarming: true,
        }
    }
}

impl BfaParams {
    pub fn validate(&self) -> Result<()> {
        if self.nt < 1 {
            return Err(Error::Budget(self.nt));
        }
        for (name, v) in [("pop", self.pop), ("nc", self.nc), ("nr", self.nr), ("ned", self.ned)] {
            if v < 1 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::Config(format!("step must be positive (got {})", self.step)));
        }
        if !(0.0..=1.0).contains(&self.ped) {
            return Err(Error::Config(format!("ped must lie in [0, 1] (got {})", self.ped)));
        }
        for (name, v) in [
            ("w_rep", self.w_rep),
            ("w_att", self.w_att),
            ("h_rep", self.h_rep),
            ("h_att", self.h_att),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be finite and non-negative (got {v})"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bacterium {
    pub theta: NormalizedPoint,
    /// Augmented cost at `theta`.
    pub cost: f64,
    /// Sum of costs over chemotactic moves since the last reproduction.
    pub health: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestSoFar {
    pub theta: NormalizedPoint,
    pub fitness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwarmState {
    pub bacteria: Vec<Bacterium>,
    pub best: BestSoFar,
    /// Best-so-far fitness after each chemotactic generation.
    pub trace: Vec<f64>,
    pub evaluations: u64,
}

impl SwarmState {
    fn positions(&self) -> impl Iterator<Item = &NormalizedPoint> {
        self.bacteria.iter().map(|b| &b.theta)
    }

    /// Evaluates `theta`, updates the archive, and returns the augmented cost.
    fn evaluate<L: Landscape + ?Sized>(&mut self, landscape: &L, theta: &NormalizedPoint, params: &BfaParams) -> f64 {
        let fitness = landscape.fitness(theta);
        self.evaluations += 1;
        if fitness > self.best.fitness {
            self.best = BestSoFar { theta: *theta, fitness };
        }
        if params.swarming {
            fitness - swarming_term(theta, self.positions(), params)
        } else {
            fitness
        }
    }
}

/// Draws one point with a `sample_unit` per coordinate, A through D.
fn random_point(engine: &mut StochasticEngine) -> NormalizedPoint {
    let mut u = [0.0; DIMENSION];
    for slot in u.iter_mut() {
        *slot = engine.sample_unit();
    }
    clamp_unit(u)
}

/// Scatters `pop` bacteria, bacterium by bacterium, then evaluates them in
/// order. Health starts at zero.
pub fn initialize_swarm<L: Landscape + ?Sized>(
    landscape: &L,
    engine: &mut StochasticEngine,
    params: &BfaParams,
) -> Result<SwarmState> {
    params.validate()?;
    let positions: Vec<NormalizedPoint> = (0..params.pop).map(|_| random_point(engine)).collect();
    let mut swarm = SwarmState {
        bacteria: positions
            .iter()
            .map(|&theta| Bacterium {
                theta,
                cost: 0.0,
                health: 0.0,
            })
            .collect(),
        best: BestSoFar {
            theta: positions[0],
            fitness: f64::NEG_INFINITY,
        },
        trace: Vec::new(),
        evaluations: 0,
    };
    for (i, theta) in positions.iter().enumerate() {
        swarm.bacteria[i].cost = swarm.evaluate(landscape, theta, params);
    }
    Ok(swarm)
}

/// A unit direction built from four `sample_signed` draws.
///
/// An all-zero draw is discarded and redrawn.
pub fn tumble_direction(engine: &mut StochasticEngine) -> [f64; DIMENSION] {
    loop {
        let mut delta = [0.0; DIMENSION];
        for slot in delta.iter_mut() {
            *slot = engine.sample_signed();
        }
        if let Some(dir) = normalize(delta) {
            return dir;
        }
    }
}

fn normalize(delta: [f64; DIMENSION]) -> Option<[f64; DIMENSION]> {
    let norm = delta.iter().map(|d| d * d).sum::<f64>().sqrt();
    (norm > 0.0).then(|| delta.map(|d| d / norm))
}

/// Cell-to-cell signalling at `theta` given the swarm's positions:
/// `sum(-h_att * exp(-w_att * d2)) + sum(h_rep * exp(-w_rep * d2))`.
pub fn swarming_term<'a>(
    theta: &NormalizedPoint,
    positions: impl IntoIterator<Item = &'a NormalizedPoint>,
    params: &BfaParams,
) -> f64 {
    positions
        .into_iter()
        .map(|other| {
            let d2 = theta.squared_distance(other);
            -params.h_att * (-params.w_att * d2).exp() + params.h_rep * (-params.w_rep * d2).exp()
        })
        .sum()
}

/// Moves bacterium `index` one step along `dir`, re-evaluates it and adds the
/// new cost to its health.
pub fn chemotaxis_move<L: Landscape + ?Sized>(
    swarm: &mut SwarmState,
    index: usize,
    dir: &[f64; DIMENSION],
    landscape: &L,
    params: &BfaParams,
) {
    let old = *swarm.bacteria[index].theta.values();
    let mut next = [0.0; DIMENSION];
    for i in 0..DIMENSION {
        next[i] = old[i] + params.step * dir[i];
    }
    let theta = clamp_unit(next);
    swarm.bacteria[index].theta = theta;
    let cost = swarm.evaluate(landscape, &theta, params);
    let b = &mut swarm.bacteria[index];
    b.cost = cost;
    b.health += cost;
}

/// Tumbles and swims every bacterium once, then appends the archive value to
/// the trace. Returns the number of moves each bacterium made.
pub fn chemotaxis_generation<L: Landscape + ?Sized>(
    swarm: &mut SwarmState,
    engine: &mut StochasticEngine,
    landscape: &L,
    params: &BfaParams,
) -> Vec<usize> {
    let mut moves = vec![0; swarm.bacteria.len()];
    for (i, count) in moves.iter_mut().enumerate() {
        let dir = tumble_direction(engine);
        let mut last = swarm.bacteria[i].cost;
        chemotaxis_move(swarm, i, &dir, landscape, params);
        *count = 1;
        while *count <= params.ns && swarm.bacteria[i].cost > last {
            last = swarm.bacteria[i].cost;
            chemotaxis_move(swarm, i, &dir, landscape, params);
            *count += 1;
        }
    }
    swarm.trace.push(swarm.best.fitness);
    moves
}

/// Keeps the healthiest `ceil(S/2)` bacteria and clones them in rank order
/// back up to `S`. Ties keep list order. All health resets to zero.
pub fn reproduce(swarm: &mut SwarmState) {
    let size = swarm.bacteria.len();
    let mut ranked: Vec<usize> = (0..size).collect();
    // Stable sort: equal health keeps the lower index first.
    ranked.sort_by(|&a, &b| swarm.bacteria[b].health.total_cmp(&swarm.bacteria[a].health));
    let survivors = size.div_ceil(2);
    let mut next: Vec<Bacterium> = ranked[..survivors].iter().map(|&i| swarm.bacteria[i]).collect();
    for k in 0..size - survivors {
        next.push(next[k]);
    }
    for b in next.iter_mut() {
        b.health = 0.0;
    }
    swarm.bacteria = next;
}

/// Draws one `sample_unit` per bacterium; those below `ped` are moved to a
/// fresh random position and re-evaluated.
pub fn eliminate_disperse<L: Landscape + ?Sized>(
    swarm: &mut SwarmState,
    engine: &mut StochasticEngine,
    landscape: &L,
    params: &BfaParams,
) -> usize {
    let mut dispersed = 0;
    for i in 0..swarm.bacteria.len() {
        let u = engine.sample_unit();
        if u < params.ped || params.ped >= 1.0 {
            let theta = random_point(engine);
            swarm.bacteria[i].theta = theta;
            swarm.bacteria[i].cost = swarm.evaluate(landscape, &theta, params);
            dispersed += 1;
        }
    }
    dispersed
}

/// What happened during one generation.
#[derive(Clone, Debug, PartialEq)]
pub struct GenerationReport {
    pub generation: usize,
    pub moves: Vec<usize>,
    pub reproduced: bool,
    pub dispersed: Option<usize>,
    pub population: usize,
}

/// A stepwise optimizer over any [`Landscape`].
pub struct Forager<L> {
    landscape: L,
    params: BfaParams,
    engine: StochasticEngine,
    swarm: SwarmState,
    generation: usize,
}

impl<L: Landscape> Forager<L> {
    pub fn new(landscape: L, params: BfaParams, engine_config: EngineConfig) -> Result<Self> {
        params.validate()?;
        let mut engine = StochasticEngine::new(engine_config)?;
        let swarm = initialize_swarm(&landscape, &mut engine, &params)?;
        Ok(Forager {
            landscape,
            params,
            engine,
            swarm,
            generation: 0,
        })
    }

    pub fn swarm(&self) -> &SwarmState {
        &self.swarm
    }

    pub fn engine(&self) -> &StochasticEngine {
        &self.engine
    }

    pub fn landscape(&self) -> &L {
        &self.landscape
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn is_done(&self) -> bool {
        self.generation >= self.params.nt
    }

    /// One chemotactic generation plus whatever reproduction or dispersal
    /// falls due at its end. `None` once the budget is spent.
    pub fn step(&mut self) -> Option<GenerationReport> {
        if self.is_done() {
            return None;
        }
        let p = self.params;
        let moves = chemotaxis_generation(&mut self.swarm, &mut self.engine, &self.landscape, &p);
        self.generation += 1;
        let g = self.generation;
        let reproduced = g.is_multiple_of(p.nc);
        if reproduced {
            reproduce(&mut self.swarm);
        }
        let dispersed = g
            .is_multiple_of(p.nc * p.nr)
            .then(|| eliminate_disperse(&mut self.swarm, &mut self.engine, &self.landscape, &p));
        Some(GenerationReport {
            generation: g,
            moves,
            reproduced,
            dispersed,
            population: self.swarm.bacteria.len(),
        })
    }

    pub fn run(mut self) -> RunOutcome {
        while self.step().is_some() {}
        self.finish()
    }

    pub fn finish(self) -> RunOutcome {
        RunOutcome {
            best: self.swarm.best,
            trace: self.swarm.trace,
            evaluations: self.swarm.evaluations,
            engine_steps: self.engine.steps(),
            seed: self.engine.config().seed,
        }
    }
}

/// Result of a run on a generic landscape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub best: BestSoFar,
    pub trace: Vec<f64>,
    pub evaluations: u64,
    pub engine_steps: u64,
    pub seed: u64,
}

/// Result of a run on the weighted sand mould model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub theta: NormalizedPoint,
    pub decision: DecisionVector,
    pub objectives: ObjectiveVector,
    /// Aggregate fitness of the best point; equals the trace maximum.
    pub fitness: f64,
    pub trace: Vec<f64>,
    /// Explorative rate of the trace, once computed.
    pub aer: Option<f64>,
    pub evaluations: u64,
    pub engine_steps: u64,
    pub seed: u64,
}

/// Optimizes the sand mould model under one weight vector.
pub fn run_bfa(weights: WeightVector, params: &BfaParams, engine_config: EngineConfig) -> Result<RunResult> {
    let landscape = WeightedSandMould::new(weights);
    let outcome = Forager::new(landscape, *params, engine_config)?.run();
    let (decision, objectives, fitness) = landscape.solve_point(&outcome.best.theta);
    Ok(RunResult {
        theta: outcome.best.theta,
        decision,
        objectives,
        fitness,
        trace: outcome.trace,
        aer: None,
        evaluations: outcome.evaluations,
        engine_steps: outcome.engine_steps,
        seed: outcome.seed,
    })
}
