//! Binary particle swarm optimization.
//!
//! Each particle carries a boolean position and a real velocity. Every
//! iteration the velocity is pulled towards the particle's own best and a
//! topology-chosen neighbor's best, clamped, and squashed through a sigmoid
//! into per-bit probabilities from which a new position is sampled.
//!
//! Particles are updated in index order against live personal bests: a
//! particle updated later in an iteration already sees improvements made by
//! earlier ones. The global best is refreshed once per iteration, and the
//! run stops after `stagnation_window` consecutive iterations without a
//! strict improvement of the global best fitness.

mod update;

use thiserror::Error;

pub use update::{
    gc_adapt_rho, gc_velocity_update, inertia_at, position_update, sigmoid, velocity_update,
    RHO_MIN,
};

use crate::rng::{run_rng, SwarmRng, UnitDraw};
use crate::topology::{neighbor_best_gbest, Topology, TopologyError, TopologyKind, TopologyParams};
use crate::wcnf::{Assignment, WcnfError, WcnfInstance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SwarmError {
    #[error("invalid swarm configuration: {0}")]
    Config(String),
    #[error("vector has {found} components, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Instance(#[from] WcnfError),
}

/// Solver parameters. [`Default`] gives the 30-particle configuration with
/// `Vmax = 4`, inertia 0.9 decreasing by 0.0005 per iteration, and a
/// 1500-iteration stagnation window.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmConfig {
    pub swarm_size: usize,
    pub v_max: f64,
    pub v_min: f64,
    pub w_start: f64,
    pub w_decrement: f64,
    pub w_floor: f64,
    pub c1: f64,
    pub c2: f64,
    pub stagnation_window: usize,
    pub max_iterations: usize,
    pub gc_enabled: bool,
    pub gc_rho0: f64,
    pub gc_success_threshold: usize,
    pub gc_failure_threshold: usize,
    pub seed: u64,
    pub topology: TopologyParams,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            swarm_size: 30,
            v_max: 4.0,
            v_min: -4.0,
            w_start: 0.9,
            w_decrement: 0.0005,
            w_floor: 0.4,
            c1: 2.0,
            c2: 2.0,
            stagnation_window: 1500,
            max_iterations: 100_000,
            gc_enabled: false,
            gc_rho0: 1.0,
            gc_success_threshold: 15,
            gc_failure_threshold: 5,
            seed: 0,
            topology: TopologyParams::default(),
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<(), SwarmError> {
        let fail = |msg: String| Err(SwarmError::Config(msg));
        let finite = [
            self.v_max,
            self.v_min,
            self.w_start,
            self.w_decrement,
            self.w_floor,
            self.c1,
            self.c2,
            self.gc_rho0,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return fail("parameters must be finite".into());
        }
        if self.v_min >= self.v_max {
            return fail(format!("v_min {} must be below v_max {}", self.v_min, self.v_max));
        }
        if !(self.w_floor > 0.0 && self.w_floor <= self.w_start) {
            return fail(format!(
                "inertia floor {} must lie in (0, {}]",
                self.w_floor, self.w_start
            ));
        }
        if self.w_decrement < 0.0 {
            return fail("inertia decrement must be non-negative".into());
        }
        if self.swarm_size < 2 {
            return fail(format!("swarm size {} below 2", self.swarm_size));
        }
        if self.stagnation_window < 1 {
            return fail("stagnation window must be at least 1".into());
        }
        if self.max_iterations < 1 {
            return fail("max iterations must be at least 1".into());
        }
        if self.gc_rho0 <= 0.0 {
            return fail("initial rho must be positive".into());
        }
        if self.gc_success_threshold < 1 || self.gc_failure_threshold < 1 {
            return fail("rho adaptation thresholds must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Assignment,
    pub velocity: Vec<f64>,
    pub pbest_position: Assignment,
    pub pbest_fitness: u64,
}

/// Search-radius state of the guaranteed-convergence update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GcState {
    pub rho: f64,
    pub successes: usize,
    pub failures: usize,
}

impl GcState {
    pub fn new(rho: f64) -> Self {
        Self {
            rho,
            successes: 0,
            failures: 0,
        }
    }
}

/// Everything one run mutates. `R` is the draw source, normally [`SwarmRng`].
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState<R = SwarmRng> {
    pub particles: Vec<Particle>,
    pub global_best_position: Assignment,
    pub global_best_fitness: u64,
    pub iteration: usize,
    pub stagnation_counter: usize,
    pub gc: GcState,
    pub rng: R,
}

impl<R> SwarmState<R> {
    /// Same swarm, different draw source.
    pub fn with_rng<S>(self, rng: S) -> SwarmState<S> {
        SwarmState {
            particles: self.particles,
            global_best_position: self.global_best_position,
            global_best_fitness: self.global_best_fitness,
            iteration: self.iteration,
            stagnation_counter: self.stagnation_counter,
            gc: self.gc,
            rng,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub best_fitness: u64,
    pub best_assignment: Assignment,
    pub iterations_run: usize,
    /// True when the run ended on the stagnation window rather than `max_iterations`.
    pub converged: bool,
    /// `(completed iterations, global best)` at start and after each improvement.
    pub fitness_trace: Vec<(usize, u64)>,
}

/// Random swarm: each bit is true with probability 1/2 and each velocity
/// component uniform in `[v_min, v_max]`. Per particle, all position draws
/// come before all velocity draws.
pub fn init_swarm(instance: &WcnfInstance, config: &SwarmConfig) -> Result<SwarmState, SwarmError> {
    config.validate()?;
    let mut rng = run_rng(config.seed);
    let n = instance.num_vars();
    let span = config.v_max - config.v_min;
    let particles: Vec<Particle> = (0..config.swarm_size)
        .map(|_| {
            let position: Assignment = (0..n).map(|_| rng.unit() < 0.5).collect::<Vec<_>>().into();
            let velocity = (0..n).map(|_| config.v_min + span * rng.unit()).collect();
            let fitness = instance.satisfied_weight(position.bits());
            Particle {
                pbest_position: position.clone(),
                position,
                velocity,
                pbest_fitness: fitness,
            }
        })
        .collect();
    let best = neighbor_best_gbest(&particles);
    Ok(SwarmState {
        global_best_position: particles[best].pbest_position.clone(),
        global_best_fitness: particles[best].pbest_fitness,
        particles,
        iteration: 0,
        stagnation_counter: 0,
        gc: GcState::new(config.gc_rho0.clamp(RHO_MIN, config.v_max)),
        rng,
    })
}

/// Advances the swarm by one iteration. Returns whether the global best
/// fitness strictly improved.
///
/// When `gc_enabled`, the particle currently holding the best pbest (lowest
/// index on ties) moves by [`gc_velocity_update`] instead of the standard rule.
pub fn step<R: UnitDraw>(
    state: &mut SwarmState<R>,
    topology: &mut Topology,
    instance: &WcnfInstance,
    config: &SwarmConfig,
) -> Result<bool, SwarmError> {
    let scheduled_w = inertia_at(state.iteration, config);
    for i in 0..state.particles.len() {
        let w = topology
            .inertia_override(i, config.w_start, config.w_floor)
            .unwrap_or(scheduled_w);
        let velocity = if config.gc_enabled && neighbor_best_gbest(&state.particles) == i {
            let p = &state.particles[i];
            gc_velocity_update(p, &p.pbest_position, w, state.gc.rho, config, &mut state.rng)?
        } else {
            let nb = topology.neighbor_best(i, &state.particles);
            velocity_update(
                &state.particles[i],
                &state.particles[nb].pbest_position,
                w,
                config,
                &mut state.rng,
            )?
        };
        let position = position_update(&velocity, &mut state.rng);
        let fitness = instance.evaluate(&position)?;

        let p = &mut state.particles[i];
        p.velocity = velocity;
        p.position = position;
        if fitness > p.pbest_fitness {
            p.pbest_fitness = fitness;
            p.pbest_position.clone_from(&p.position);
        }
    }

    let best = neighbor_best_gbest(&state.particles);
    let improved = state.particles[best].pbest_fitness > state.global_best_fitness;
    if improved {
        state.global_best_fitness = state.particles[best].pbest_fitness;
        state
            .global_best_position
            .clone_from(&state.particles[best].pbest_position);
    }
    topology.post_iteration(&state.particles, state.iteration);
    if config.gc_enabled {
        gc_adapt_rho(&mut state.gc, improved, config);
    }
    state.iteration += 1;
    state.stagnation_counter = if improved {
        0
    } else {
        state.stagnation_counter + 1
    };
    Ok(improved)
}

/// Runs until the stagnation window elapses or `max_iterations` is reached.
pub fn run(instance: &WcnfInstance, kind: TopologyKind, config: &SwarmConfig) -> Result<RunResult, SwarmError> {
    run_observed(instance, kind, config, |_, _| {})
}

/// [`run`] with a callback after initialization and after every iteration.
pub fn run_observed<F>(
    instance: &WcnfInstance,
    kind: TopologyKind,
    config: &SwarmConfig,
    mut observe: F,
) -> Result<RunResult, SwarmError>
where
    F: FnMut(&SwarmState, &Topology),
{
    let mut state = init_swarm(instance, config)?;
    let mut topology = Topology::new(kind, &config.topology, config.swarm_size)?;
    let mut trace = vec![(0, state.global_best_fitness)];
    observe(&state, &topology);
    while state.stagnation_counter < config.stagnation_window && state.iteration < config.max_iterations {
        if step(&mut state, &mut topology, instance, config)? {
            trace.push((state.iteration, state.global_best_fitness));
        }
        observe(&state, &topology);
    }
    Ok(RunResult {
        best_fitness: state.global_best_fitness,
        best_assignment: state.global_best_position,
        iterations_run: state.iteration,
        converged: state.stagnation_counter >= config.stagnation_window,
        fitness_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::ConstantDraw;
    use crate::wcnf::{brute_force_optimum, generate_random, Clause, GeneratorParams};

    fn unit_instance() -> WcnfInstance {
        WcnfInstance::new(1, vec![Clause::new(vec![1], 5).unwrap()]).unwrap()
    }

    fn small_instance(seed: u64) -> WcnfInstance {
        generate_random(&GeneratorParams {
            num_vars: 12,
            num_clauses: 60,
            clause_len: 3,
            weight_lo: 1,
            weight_hi: 100,
            seed,
        })
        .unwrap()
    }

    fn quick(seed: u64, gc: bool) -> SwarmConfig {
        SwarmConfig {
            seed,
            gc_enabled: gc,
            stagnation_window: 60,
            max_iterations: 400,
            ..SwarmConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(SwarmConfig::default().validate().is_ok());
        let d = SwarmConfig::default();
        for bad in [
            SwarmConfig { v_min: 4.0, ..d.clone() },
            SwarmConfig { w_floor: 0.0, ..d.clone() },
            SwarmConfig { w_floor: 1.0, ..d.clone() },
            SwarmConfig { swarm_size: 1, ..d.clone() },
            SwarmConfig { stagnation_window: 0, ..d.clone() },
            SwarmConfig { gc_rho0: 0.0, ..d.clone() },
            SwarmConfig { c1: f64::NAN, ..d.clone() },
        ] {
            assert!(matches!(bad.validate(), Err(SwarmError::Config(_))), "{bad:?}");
        }
    }

    #[test]
    fn init_is_deterministic_and_consistent() {
        let inst = small_instance(3);
        let c = SwarmConfig { seed: 7, ..SwarmConfig::default() };
        let a = init_swarm(&inst, &c).unwrap();
        assert_eq!(a, init_swarm(&inst, &c).unwrap());
        assert_eq!(a.particles.len(), 30);
        let best = a.particles.iter().map(|p| p.pbest_fitness).max().unwrap();
        assert_eq!(a.global_best_fitness, best);
        for p in &a.particles {
            assert_eq!(p.pbest_position, p.position);
            assert_eq!(inst.evaluate(&p.pbest_position).unwrap(), p.pbest_fitness);
        }
    }

    #[test]
    fn init_velocities_in_bounds() {
        let inst = WcnfInstance::new(2, vec![Clause::new(vec![1, 2], 1).unwrap()]).unwrap();
        let s = init_swarm(&inst, &SwarmConfig { seed: 3, ..SwarmConfig::default() }).unwrap();
        assert!(s.particles.iter().flat_map(|p| &p.velocity).all(|v| (-4.0..=4.0).contains(v)));
    }

    #[test]
    fn degenerate_draws_clear_every_bit() {
        let inst = small_instance(1);
        for gc in [false, true] {
            let c = SwarmConfig { gc_enabled: gc, ..SwarmConfig::default() };
            let mut state = init_swarm(&inst, &c).unwrap();
            let anchor = state.particles[0].position.clone();
            let f = inst.evaluate(&anchor).unwrap();
            for p in &mut state.particles {
                p.position = anchor.clone();
                p.pbest_position = anchor.clone();
                p.pbest_fitness = f;
                p.velocity = vec![0.0; inst.num_vars()];
            }
            state.global_best_position = anchor.clone();
            state.global_best_fitness = f;
            let mut state = state.with_rng(ConstantDraw(0.5));
            let mut topo = Topology::GlobalBest;
            step(&mut state, &mut topo, &inst, &c).unwrap();
            for p in &state.particles {
                assert_eq!(p.position, Assignment::all(false, inst.num_vars()));
            }
        }
    }

    #[test]
    fn step_is_deterministic_and_monotone() {
        let inst = small_instance(2);
        let c = quick(11, true);
        let mut a = init_swarm(&inst, &c).unwrap();
        let mut b = a.clone();
        let mut ta = Topology::new(TopologyKind::AdaptiveHierarchy, &c.topology, 30).unwrap();
        let mut tb = ta.clone();
        for _ in 0..50 {
            let before = a.global_best_fitness;
            step(&mut a, &mut ta, &inst, &c).unwrap();
            step(&mut b, &mut tb, &inst, &c).unwrap();
            assert_eq!(a, b);
            assert_eq!(ta, tb);
            assert!(a.global_best_fitness >= before);
        }
    }

    #[test]
    fn pbest_stays_coherent() {
        let inst = small_instance(4);
        for kind in TopologyKind::ALL {
            for gc in [false, true] {
                run_observed(&inst, kind, &quick(5, gc), |s, _| {
                    let mut max = 0;
                    for p in &s.particles {
                        assert_eq!(inst.evaluate(&p.pbest_position).unwrap(), p.pbest_fitness);
                        max = max.max(p.pbest_fitness);
                    }
                    assert_eq!(s.global_best_fitness, max);
                    assert_eq!(inst.evaluate(&s.global_best_position).unwrap(), max);
                    assert!(s.gc.rho >= RHO_MIN && s.gc.rho <= 4.0);
                })
                .unwrap();
            }
        }
    }

    #[test]
    fn unit_clause_run_finds_optimum_and_converges() {
        for kind in TopologyKind::ALL {
            let r = run(&unit_instance(), kind, &SwarmConfig { seed: 1, ..SwarmConfig::default() }).unwrap();
            assert_eq!(r.best_fitness, 5);
            assert!(r.converged);
            assert_eq!(r.best_assignment, vec![true].into());
        }
    }

    #[test]
    fn iteration_cap_bounds_the_run() {
        let c = SwarmConfig {
            stagnation_window: 1,
            max_iterations: 10,
            ..SwarmConfig::default()
        };
        let r = run(&small_instance(1), TopologyKind::GlobalBest, &c).unwrap();
        assert!(r.iterations_run <= 10);

        let c = SwarmConfig {
            stagnation_window: 10_000,
            max_iterations: 25,
            ..SwarmConfig::default()
        };
        let r = run(&small_instance(1), TopologyKind::LocalBestRing, &c).unwrap();
        assert_eq!(r.iterations_run, 25);
        assert!(!r.converged);
    }

    #[test]
    fn runs_are_reproducible_and_bounded_by_oracle() {
        let inst = small_instance(6);
        let (opt, _) = brute_force_optimum(&inst).unwrap();
        for kind in TopologyKind::ALL {
            for gc in [false, true] {
                let a = run(&inst, kind, &quick(21, gc)).unwrap();
                assert_eq!(a, run(&inst, kind, &quick(21, gc)).unwrap());
                assert!(a.best_fitness <= opt);
                assert_eq!(inst.evaluate(&a.best_assignment).unwrap(), a.best_fitness);
                assert!(a.fitness_trace.windows(2).all(|w| w[0].1 < w[1].1 && w[0].0 < w[1].0));
                assert_eq!(a.fitness_trace.last().unwrap().1, a.best_fitness);
            }
        }
    }

    #[test]
    fn topology_errors_surface() {
        let c = SwarmConfig { swarm_size: 2, ..SwarmConfig::default() };
        assert!(matches!(
            run(&unit_instance(), TopologyKind::LocalBestRing, &c),
            Err(SwarmError::Topology(_))
        ));
    }
}
