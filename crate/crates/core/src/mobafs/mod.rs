//! The bee swarm optimizer.
//!
//! Every iteration splits the population into scouts (a fixed random
//! fraction), experienced foragers (bees whose objective vector sits in the
//! archive) and onlookers (the rest). Foragers fly toward a rank-weighted
//! archive leader, onlookers toward a random forager, scouts land between two
//! random archive members. Each new position is decoded, repaired by the SAT
//! engine, evaluated and re-encoded, then merged into the archive.
//!
//! Randomness is drawn from ChaCha8 streams keyed by `(iteration, slot)` off
//! the master seed: slot `i` belongs to bee `i`, slot [`MASTER_SLOT`] to the
//! sequential steps (role split, truncation). Results therefore do not depend
//! on how the per-bee work is scheduled across threads.

pub mod archive;
pub mod position;

use std::collections::HashSet;
use std::sync::Mutex;
use std::time::Duration;
#[cfg(not(target_arch = "wasm32"))]
use std::time::Instant;
#[cfg(target_arch = "wasm32")]
use web_time::Instant;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model_io::AttributeTable;
use crate::objectives::{evaluate_with, ObjectiveVector};
use crate::preprocess::ReducedModel;
use crate::sat::{repair, RepairMode, Solver};

pub use archive::{
    assign_cells, grid_cells, select_leader, truncate_archive, update_archive, ArchiveEntry, GridCell,
    HasObjectives, LeaderSampler,
};
pub use position::{move_forager, move_onlooker, move_scout, MoveSemantics, Position};

pub const MASTER_SLOT: u64 = 0xFFFF_FFFF;

/// The RNG for `slot` in `iteration` (iteration 0 is initialization).
pub fn stream_rng(seed: u64, iteration: u64, slot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((iteration << 32) | (slot & 0xFFFF_FFFF));
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub population: usize,
    pub scout_fraction: f64,
    pub w_leader: f64,
    pub w_elite: f64,
    pub arch_size: usize,
    pub sections: u32,
    pub max_iter: Option<u64>,
    pub budget_seconds: Option<f64>,
    pub seed: u64,
    pub move_semantics: MoveSemantics,
    pub repair_mode: RepairMode,
    /// Worker threads for the per-bee map; `None` uses the ambient pool.
    pub workers: Option<usize>,
}

impl Default for RunParams {
    fn default() -> Self {
        RunParams {
            population: 3000,
            scout_fraction: 0.02,
            w_leader: 2.5,
            w_elite: 2.12,
            arch_size: 5000,
            sections: 10,
            max_iter: None,
            budget_seconds: Some(1800.0),
            seed: 0,
            move_semantics: MoveSemantics::WordArith,
            repair_mode: RepairMode::Full,
            workers: None,
        }
    }
}

impl RunParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.population < 1 {
            return bad("population must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.scout_fraction) {
            return bad(format!("scout fraction {} outside [0, 1)", self.scout_fraction));
        }
        if self.sections == 0 || self.sections > archive::MAX_SECTIONS {
            return bad(format!("sections {} outside 1..=254", self.sections));
        }
        if self.arch_size == 0 {
            return bad("archive size must be positive".into());
        }
        if !(self.w_leader.is_finite() && self.w_elite.is_finite()) {
            return bad("weights must be finite".into());
        }
        if let Some(b) = self.budget_seconds {
            if !b.is_finite() || b <= 0.0 {
                return bad(format!("budget {b} must be positive and finite"));
            }
        }
        if self.max_iter.is_none() && self.budget_seconds.is_none() {
            return bad("either max_iter or budget_seconds must bound the run".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Forager,
    Onlooker,
    Scout,
}

#[derive(Debug, Clone)]
pub struct Bee {
    pub position: Position,
    pub config: crate::configuration::Configuration,
    pub objectives: ObjectiveVector,
    pub role: Role,
}

impl HasObjectives for Bee {
    fn objectives(&self) -> &ObjectiveVector {
        &self.objectives
    }
}

impl Bee {
    /// Archive entries steer from the position of their repaired configuration.
    fn to_entry(&self, model: &ReducedModel) -> ArchiveEntry {
        ArchiveEntry {
            position: Position::encode(&self.config, model),
            config: self.config.clone(),
            objectives: self.objectives,
            group: 0,
            rank: 1,
        }
    }
}

/// Number of scouts: `ps·N` rounded, at least one unless `ps` is zero.
pub fn scout_count(population: usize, ps: f64) -> usize {
    if ps <= 0.0 || population == 0 {
        return 0;
    }
    ((ps * population as f64).round() as usize).clamp(1, population)
}

/// Splits the population into scouts, experienced foragers and onlookers.
pub fn partition_roles<T: HasObjectives, A: HasObjectives, R: Rng + ?Sized>(
    bees: &[T],
    archive: &[A],
    ps: f64,
    rng: &mut R,
) -> Vec<Role> {
    let in_archive: HashSet<&ObjectiveVector> = archive.iter().map(|e| e.objectives()).collect();
    let mut roles: Vec<Role> = bees
        .iter()
        .map(|b| {
            if in_archive.contains(b.objectives()) {
                Role::Forager
            } else {
                Role::Onlooker
            }
        })
        .collect();
    for i in index::sample(rng, bees.len(), scout_count(bees.len(), ps)) {
        roles[i] = Role::Scout;
    }
    roles
}

/// Serial over parallel cost ratio `(F + C + N) / ((F + C)/P + N)`; the
/// iteration count cancels.
pub fn predict_speedup(iterations: f64, population: f64, features: f64, constraints: f64, processors: f64) -> f64 {
    let serial = iterations * population * (features + constraints + population);
    let parallel = iterations * population * ((features + constraints) / processors + population);
    serial / parallel
}

#[derive(Debug, Clone, Copy)]
pub struct IterationStats {
    pub iteration: u64,
    pub archive_size: usize,
    pub foragers: usize,
    pub onlookers: usize,
    pub scouts: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub front: Vec<ArchiveEntry>,
    pub iterations: u64,
    pub elapsed: Duration,
    pub init_elapsed: Duration,
}

struct Context<'a> {
    params: &'a RunParams,
    model: &'a ReducedModel,
    attrs: &'a AttributeTable,
    solvers: Vec<Mutex<Solver>>,
}

impl Context<'_> {
    fn solver_slot(&self) -> usize {
        #[cfg(feature = "parallel")]
        {
            rayon::current_thread_index().unwrap_or(0) % self.solvers.len()
        }
        #[cfg(not(feature = "parallel"))]
        {
            0
        }
    }

    /// Decode, repair and evaluate one position. The bee keeps the position it
    /// moved to; only its configuration is repaired.
    fn realize(&self, position: Position, role: Role, rng: &mut ChaCha8Rng) -> Result<Bee> {
        let config = position.decode(self.model);
        let outcome = {
            let mut solver = self.solvers[self.solver_slot()]
                .lock()
                .expect("solver mutex poisoned");
            repair(config, self.model, &mut solver, rng, self.params.repair_mode)?
        };
        // Constants satisfy every declined clause and falsify every stripped
        // literal, so counting over the active clauses equals counting over the originals.
        let objectives = evaluate_with(&outcome.config, &self.model.active_clauses, self.attrs);
        Ok(Bee {
            position,
            config: outcome.config,
            objectives,
            role,
        })
    }

    fn map_bees<F>(&self, count: usize, f: F) -> Result<Vec<Bee>>
    where
        F: Fn(usize) -> Result<Bee> + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..count).into_par_iter().map(f).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..count).map(f).collect()
        }
    }
}

/// Runs the optimizer on a preprocessed, satisfiable model.
pub fn run(params: &RunParams, model: &ReducedModel, attrs: &AttributeTable) -> Result<RunResult> {
    run_with_observer(params, model, attrs, |_, _| {})
}

/// [`run`], calling `observe` after initialization and after every iteration.
pub fn run_with_observer<O>(
    params: &RunParams,
    model: &ReducedModel,
    attrs: &AttributeTable,
    observe: O,
) -> Result<RunResult>
where
    O: FnMut(&IterationStats, &[ArchiveEntry]) + Send,
{
    params.validate()?;
    #[cfg(feature = "parallel")]
    if let Some(workers) = params.workers {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidParams(e.to_string()))?;
        return pool.install(|| run_inner(params, model, attrs, observe));
    }
    run_inner(params, model, attrs, observe)
}

fn run_inner<O>(params: &RunParams, model: &ReducedModel, attrs: &AttributeTable, mut observe: O) -> Result<RunResult>
where
    O: FnMut(&IterationStats, &[ArchiveEntry]),
{
    let start = Instant::now();
    let mut probe = Solver::new(model.num_features(), &model.active_clauses);
    if probe.solve(&[]).is_none() {
        return Err(Error::NoSolution);
    }

    if model.num_free() == 0 {
        let config = model.base_configuration();
        let objectives = evaluate_with(&config, &model.active_clauses, attrs);
        let mut front = vec![ArchiveEntry {
            position: Position { words: Vec::new() },
            config,
            objectives,
            group: 0,
            rank: 1,
        }];
        assign_cells(&mut front, params.sections);
        let elapsed = start.elapsed();
        return Ok(RunResult {
            front,
            iterations: 0,
            elapsed,
            init_elapsed: elapsed,
        });
    }

    #[cfg(feature = "parallel")]
    let threads = rayon::current_num_threads();
    #[cfg(not(feature = "parallel"))]
    let threads = 1;
    let ctx = Context {
        params,
        model,
        attrs,
        solvers: (0..threads).map(|_| Mutex::new(probe.clone())).collect(),
    };
    let num_free = model.num_free();
    let n = params.population;
    let budget = params.budget_seconds.map(Duration::from_secs_f64);

    let mut bees = ctx.map_bees(n, |i| {
        let mut rng = stream_rng(params.seed, 0, i as u64);
        let p = Position::random(num_free, &mut rng);
        ctx.realize(p, Role::Onlooker, &mut rng)
    })?;
    let mut archive: Vec<ArchiveEntry> = Vec::new();
    update_archive(&mut archive, &bees, |b| b.to_entry(model));
    let mut master = stream_rng(params.seed, 0, MASTER_SLOT);
    archive = truncate_archive(archive, params.sections, params.arch_size, &mut master);
    assign_cells(&mut archive, params.sections);
    let init_elapsed = start.elapsed();
    observe(
        &IterationStats {
            iteration: 0,
            archive_size: archive.len(),
            foragers: 0,
            onlookers: n,
            scouts: 0,
            elapsed: init_elapsed,
        },
        &archive,
    );

    let mut iteration = 0u64;
    loop {
        if params.max_iter.is_some_and(|m| iteration >= m) {
            break;
        }
        if budget.is_some_and(|b| start.elapsed() >= b) {
            break;
        }
        iteration += 1;

        let mut master = stream_rng(params.seed, iteration, MASTER_SLOT);
        let roles = partition_roles(&bees, &archive, params.scout_fraction, &mut master);
        let foragers: Vec<usize> = (0..n).filter(|&i| roles[i] == Role::Forager).collect();
        let leaders = LeaderSampler::new(&archive);

        let previous = &bees;
        let archive_ref = &archive;
        let next = ctx.map_bees(n, |i| {
            let mut rng = stream_rng(params.seed, iteration, i as u64);
            let bee = &previous[i].position;
            let p = match roles[i] {
                Role::Forager => {
                    let leader = &archive_ref[leaders.sample(&mut rng)].position;
                    move_forager(bee, leader, params.w_leader, params.move_semantics, num_free, &mut rng)
                }
                Role::Onlooker => {
                    let elite = if foragers.is_empty() {
                        &archive_ref[leaders.sample(&mut rng)].position
                    } else {
                        &previous[foragers[rng.random_range(0..foragers.len())]].position
                    };
                    move_onlooker(bee, elite, params.w_elite, params.move_semantics, num_free, &mut rng)
                }
                Role::Scout => {
                    let b1 = &archive_ref[rng.random_range(0..archive_ref.len())].position;
                    let b2 = &archive_ref[rng.random_range(0..archive_ref.len())].position;
                    move_scout(b1, b2, num_free, &mut rng)
                }
            };
            ctx.realize(p, roles[i], &mut rng)
        })?;
        bees = next;

        update_archive(&mut archive, &bees, |b| b.to_entry(model));
        archive = truncate_archive(archive, params.sections, params.arch_size, &mut master);
        assign_cells(&mut archive, params.sections);

        let count = |r: Role| roles.iter().filter(|&&x| x == r).count();
        observe(
            &IterationStats {
                iteration,
                archive_size: archive.len(),
                foragers: count(Role::Forager),
                onlookers: count(Role::Onlooker),
                scouts: count(Role::Scout),
                elapsed: start.elapsed(),
            },
            &archive,
        );
    }

    Ok(RunResult {
        front: archive,
        iterations: iteration,
        elapsed: start.elapsed(),
        init_elapsed,
    })
}
