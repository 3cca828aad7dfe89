//! Swarm neighborhoods.
//!
//! A topology answers one question per particle, "whose personal best pulls
//! on particle `i`?", and may restructure itself between iterations. Every
//! argmax breaks ties towards the lowest particle index.

mod hierarchy;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use hierarchy::{hierarchy_inertia, HierarchyTree, SwapRecord};

use crate::bpso::Particle;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("unknown topology {0:?}; expected one of gbest, lbest, grid, hierarchy")]
    UnknownKind(String),
    #[error("ring topology needs at least 3 particles, got {0}")]
    RingTooSmall(usize),
    #[error("grid {rows}x{cols} does not hold {swarm_size} particles")]
    GridShape {
        rows: usize,
        cols: usize,
        swarm_size: usize,
    },
    #[error("invalid hierarchy parameters: {0}")]
    Hierarchy(String),
}

/// Read access to personal-best fitness by particle index.
pub trait FitnessView {
    fn count(&self) -> usize;
    fn pbest(&self, i: usize) -> u64;
}

impl FitnessView for [u64] {
    fn count(&self) -> usize {
        self.len()
    }
    fn pbest(&self, i: usize) -> u64 {
        self[i]
    }
}

impl FitnessView for Vec<u64> {
    fn count(&self) -> usize {
        self.len()
    }
    fn pbest(&self, i: usize) -> u64 {
        self[i]
    }
}

impl FitnessView for [Particle] {
    fn count(&self) -> usize {
        self.len()
    }
    fn pbest(&self, i: usize) -> u64 {
        self[i].pbest_fitness
    }
}

impl FitnessView for Vec<Particle> {
    fn count(&self) -> usize {
        self.len()
    }
    fn pbest(&self, i: usize) -> u64 {
        self[i].pbest_fitness
    }
}

/// Index with the largest pbest among `candidates`; ties go to the lowest index.
fn argmax_of<F: FitnessView + ?Sized>(fitness: &F, candidates: impl IntoIterator<Item = usize>) -> usize {
    let mut best: Option<(u64, usize)> = None;
    for j in candidates {
        let f = fitness.pbest(j);
        best = match best {
            Some((bf, bj)) if bf > f || (bf == f && bj < j) => Some((bf, bj)),
            _ => Some((f, j)),
        };
    }
    best.expect("empty neighborhood").1
}

/// Best particle in the whole swarm.
pub fn neighbor_best_gbest<F: FitnessView + ?Sized>(fitness: &F) -> usize {
    argmax_of(fitness, 0..fitness.count())
}

/// Ring members influencing `i`: itself and its two cyclic neighbors.
pub fn ring_neighborhood(i: usize, n: usize) -> [usize; 3] {
    [(i + n - 1) % n, i, (i + 1) % n]
}

pub fn neighbor_best_ring<F: FitnessView + ?Sized>(i: usize, fitness: &F) -> usize {
    argmax_of(fitness, ring_neighborhood(i, fitness.count()))
}

/// Cell `i` plus its von Neumann neighbors on a non-wrapping `rows`×`cols`
/// grid, laid out row-major.
pub fn grid_neighborhood(i: usize, rows: usize, cols: usize) -> Vec<usize> {
    let (r, c) = (i / cols, i % cols);
    let mut out = Vec::with_capacity(5);
    out.push(i);
    if r > 0 {
        out.push(i - cols);
    }
    if r + 1 < rows {
        out.push(i + cols);
    }
    if c > 0 {
        out.push(i - 1);
    }
    if c + 1 < cols {
        out.push(i + 1);
    }
    out
}

pub fn neighbor_best_grid<F: FitnessView + ?Sized>(
    i: usize,
    fitness: &F,
    rows: usize,
    cols: usize,
) -> usize {
    argmax_of(fitness, grid_neighborhood(i, rows, cols))
}

/// Most nearly square `rows × cols = n` with `rows <= cols`.
pub fn near_square_shape(n: usize) -> (usize, usize) {
    let mut rows = (n as f64).sqrt() as usize;
    while rows > 1 && !n.is_multiple_of(rows) {
        rows -= 1;
    }
    let rows = rows.max(1);
    (rows, n / rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TopologyKind {
    GlobalBest,
    LocalBestRing,
    SquareGrid,
    AdaptiveHierarchy,
}

impl TopologyKind {
    pub const ALL: [TopologyKind; 4] = [
        TopologyKind::GlobalBest,
        TopologyKind::LocalBestRing,
        TopologyKind::SquareGrid,
        TopologyKind::AdaptiveHierarchy,
    ];

    /// Short name used on the command line and in plan files.
    pub fn name(self) -> &'static str {
        match self {
            TopologyKind::GlobalBest => "gbest",
            TopologyKind::LocalBestRing => "lbest",
            TopologyKind::SquareGrid => "grid",
            TopologyKind::AdaptiveHierarchy => "hierarchy",
        }
    }

    /// Label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            TopologyKind::GlobalBest => "GBest",
            TopologyKind::LocalBestRing => "LBest",
            TopologyKind::SquareGrid => "SquareGrid",
            TopologyKind::AdaptiveHierarchy => "AdaptiveHierarchy",
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TopologyKind {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TopologyKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| TopologyError::UnknownKind(s.to_string()))
    }
}

/// Kind-specific knobs. `grid_shape: None` picks [`near_square_shape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TopologyParams {
    pub grid_shape: Option<(usize, usize)>,
    pub start_degree: usize,
    pub min_degree: usize,
    pub adapt_interval: usize,
}

impl Default for TopologyParams {
    fn default() -> Self {
        Self {
            grid_shape: None,
            start_degree: 15,
            min_degree: 2,
            adapt_interval: 200,
        }
    }
}

/// A neighborhood with its run-local state.
#[derive(Debug, Clone, PartialEq)]
pub enum Topology {
    GlobalBest,
    LocalBestRing,
    SquareGrid { rows: usize, cols: usize },
    AdaptiveHierarchy(HierarchyTree),
}

impl Topology {
    pub fn new(kind: TopologyKind, params: &TopologyParams, swarm_size: usize) -> Result<Self, TopologyError> {
        Ok(match kind {
            TopologyKind::GlobalBest => Topology::GlobalBest,
            TopologyKind::LocalBestRing => {
                if swarm_size < 3 {
                    return Err(TopologyError::RingTooSmall(swarm_size));
                }
                Topology::LocalBestRing
            }
            TopologyKind::SquareGrid => {
                let (rows, cols) = params
                    .grid_shape
                    .unwrap_or_else(|| near_square_shape(swarm_size));
                if rows * cols != swarm_size || rows == 0 {
                    return Err(TopologyError::GridShape {
                        rows,
                        cols,
                        swarm_size,
                    });
                }
                Topology::SquareGrid { rows, cols }
            }
            TopologyKind::AdaptiveHierarchy => Topology::AdaptiveHierarchy(HierarchyTree::new(
                swarm_size,
                params.start_degree,
                params.min_degree,
                params.adapt_interval,
            )?),
        })
    }

    pub fn kind(&self) -> TopologyKind {
        match self {
            Topology::GlobalBest => TopologyKind::GlobalBest,
            Topology::LocalBestRing => TopologyKind::LocalBestRing,
            Topology::SquareGrid { .. } => TopologyKind::SquareGrid,
            Topology::AdaptiveHierarchy(_) => TopologyKind::AdaptiveHierarchy,
        }
    }

    /// Particle whose pbest influences particle `i`.
    pub fn neighbor_best<F: FitnessView + ?Sized>(&self, i: usize, fitness: &F) -> usize {
        match self {
            Topology::GlobalBest => neighbor_best_gbest(fitness),
            Topology::LocalBestRing => neighbor_best_ring(i, fitness),
            Topology::SquareGrid { rows, cols } => neighbor_best_grid(i, fitness, *rows, *cols),
            Topology::AdaptiveHierarchy(tree) => tree.neighbor_best(i),
        }
    }

    /// Particles other than `i` that `i` can be influenced by.
    pub fn neighbors(&self, i: usize, swarm_size: usize) -> Vec<usize> {
        let mut out: Vec<usize> = match self {
            Topology::GlobalBest => (0..swarm_size).collect(),
            Topology::LocalBestRing => ring_neighborhood(i, swarm_size).to_vec(),
            Topology::SquareGrid { rows, cols } => grid_neighborhood(i, *rows, *cols),
            Topology::AdaptiveHierarchy(tree) => vec![tree.neighbor_best(i)],
        };
        out.retain(|&j| j != i);
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Per-particle inertia when the topology overrides the global schedule.
    pub fn inertia_override(&self, i: usize, w_start: f64, w_floor: f64) -> Option<f64> {
        match self {
            Topology::AdaptiveHierarchy(tree) => {
                Some(hierarchy_inertia(tree.particle_depth(i), tree.height(), w_start, w_floor))
            }
            _ => None,
        }
    }

    /// Restructuring hook, called once after iteration `iteration` (0-based) completes.
    pub fn post_iteration<F: FitnessView + ?Sized>(&mut self, fitness: &F, iteration: usize) {
        if let Topology::AdaptiveHierarchy(tree) = self {
            tree.post_iteration(fitness, iteration);
        }
    }
}
