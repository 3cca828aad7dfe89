use super::{FitnessView, TopologyError};

/// One parent/child comparison made during a swap pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwapRecord {
    pub node: usize,
    pub parent_node: usize,
    pub child: usize,
    pub parent: usize,
    pub child_fitness: u64,
    pub parent_fitness: u64,
    pub swapped: bool,
}

/// Tree of particles stored as a breadth-first array of nodes.
///
/// Node 0 is the root; node `k > 0` hangs under node `(k - 1) / branch_degree`,
/// so a tree of the current degree is always filled breadth-first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierarchyTree {
    node_to_particle: Vec<usize>,
    particle_to_node: Vec<usize>,
    branch_degree: usize,
    start_degree: usize,
    min_degree: usize,
    adapt_interval: usize,
}

impl HierarchyTree {
    /// BFS-filled tree with particle `i` at node `i`. `adapt_interval == 0`
    /// disables degree adaptation.
    pub fn new(
        swarm_size: usize,
        start_degree: usize,
        min_degree: usize,
        adapt_interval: usize,
    ) -> Result<Self, TopologyError> {
        if swarm_size == 0 {
            return Err(TopologyError::Hierarchy("empty swarm".into()));
        }
        if start_degree < 2 {
            return Err(TopologyError::Hierarchy(format!(
                "start degree {start_degree} below 2"
            )));
        }
        if min_degree == 0 || min_degree > start_degree {
            return Err(TopologyError::Hierarchy(format!(
                "min degree {min_degree} must lie in 1..={start_degree}"
            )));
        }
        Ok(Self {
            node_to_particle: (0..swarm_size).collect(),
            particle_to_node: (0..swarm_size).collect(),
            branch_degree: start_degree,
            start_degree,
            min_degree,
            adapt_interval,
        })
    }

    pub fn len(&self) -> usize {
        self.node_to_particle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_to_particle.is_empty()
    }

    pub fn branch_degree(&self) -> usize {
        self.branch_degree
    }

    pub fn start_degree(&self) -> usize {
        self.start_degree
    }

    pub fn min_degree(&self) -> usize {
        self.min_degree
    }

    pub fn node_to_particle(&self) -> &[usize] {
        &self.node_to_particle
    }

    pub fn node_of(&self, particle: usize) -> usize {
        self.particle_to_node[particle]
    }

    pub fn particle_at(&self, node: usize) -> usize {
        self.node_to_particle[node]
    }

    pub fn parent_node(&self, node: usize) -> Option<usize> {
        (node > 0).then(|| (node - 1) / self.branch_degree)
    }

    pub fn children_nodes(&self, node: usize) -> std::ops::Range<usize> {
        let first = (node * self.branch_degree + 1).min(self.len());
        let last = (node * self.branch_degree + self.branch_degree + 1).min(self.len());
        first..last
    }

    pub fn node_depth(&self, mut node: usize) -> usize {
        let mut depth = 0;
        while let Some(p) = self.parent_node(node) {
            node = p;
            depth += 1;
        }
        depth
    }

    pub fn particle_depth(&self, particle: usize) -> usize {
        self.node_depth(self.node_of(particle))
    }

    /// Depth of the deepest node; the last BFS node is always deepest.
    pub fn height(&self) -> usize {
        self.node_depth(self.len() - 1)
    }

    /// Parent's occupant; the root influences itself.
    pub fn neighbor_best(&self, particle: usize) -> usize {
        match self.parent_node(self.node_of(particle)) {
            Some(p) => self.node_to_particle[p],
            None => particle,
        }
    }

    fn swap_nodes(&mut self, a: usize, b: usize) {
        self.node_to_particle.swap(a, b);
        self.particle_to_node[self.node_to_particle[a]] = a;
        self.particle_to_node[self.node_to_particle[b]] = b;
    }

    /// Breadth-first pass over non-root nodes: a child whose pbest strictly
    /// beats its parent's trades places with it. A promoted particle has
    /// already passed its new parent's comparison, so it climbs at most one
    /// level per pass.
    pub fn swap_pass<F: FitnessView + ?Sized>(&mut self, fitness: &F) -> Vec<SwapRecord> {
        let mut log = Vec::with_capacity(self.len().saturating_sub(1));
        for node in 1..self.len() {
            let parent_node = (node - 1) / self.branch_degree;
            let child = self.node_to_particle[node];
            let parent = self.node_to_particle[parent_node];
            let (child_fitness, parent_fitness) = (fitness.pbest(child), fitness.pbest(parent));
            let swapped = child_fitness > parent_fitness;
            if swapped {
                self.swap_nodes(node, parent_node);
            }
            log.push(SwapRecord {
                node,
                parent_node,
                child,
                parent,
                child_fitness,
                parent_fitness,
                swapped,
            });
        }
        log
    }

    /// Drops the branching degree by one (not below the minimum) and refills
    /// the tree best-first. Returns whether the degree changed.
    pub fn decrease_degree<F: FitnessView + ?Sized>(&mut self, fitness: &F) -> bool {
        if self.branch_degree <= self.min_degree {
            return false;
        }
        self.branch_degree -= 1;
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| fitness.pbest(b).cmp(&fitness.pbest(a)).then(a.cmp(&b)));
        for (node, &particle) in order.iter().enumerate() {
            self.node_to_particle[node] = particle;
            self.particle_to_node[particle] = node;
        }
        true
    }

    /// Swap pass, then a degree decrease every `adapt_interval` completed iterations.
    pub fn post_iteration<F: FitnessView + ?Sized>(&mut self, fitness: &F, iteration: usize) {
        self.swap_pass(fitness);
        if self.adapt_interval > 0 && (iteration + 1).is_multiple_of(self.adapt_interval) {
            self.decrease_degree(fitness);
        }
    }
}

/// Depth-linear inertia: `w_floor` at the root rising to `w_start` on the
/// deepest level.
pub fn hierarchy_inertia(node_depth: usize, tree_height: usize, w_start: f64, w_floor: f64) -> f64 {
    let span = tree_height.saturating_sub(node_depth) as f64;
    w_start - (w_start - w_floor) * span / tree_height.max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn depths(t: &HierarchyTree) -> Vec<usize> {
        (0..t.len()).map(|n| t.node_depth(n)).collect()
    }

    #[test]
    fn bfs_fill_degree_15() {
        let t = HierarchyTree::new(30, 15, 2, 200).unwrap();
        assert_eq!(t.height(), 2);
        for node in 1..=15 {
            assert_eq!(t.parent_node(node), Some(0));
        }
        // The 14 remaining nodes fill the first child's subtree.
        for node in 16..30 {
            assert_eq!(t.parent_node(node), Some(1));
        }
        assert_eq!(t.children_nodes(1), 16..30);
        assert_eq!(t.children_nodes(2), 30..30);
    }

    #[test]
    fn bfs_fill_degree_2_and_single() {
        let t = HierarchyTree::new(30, 2, 2, 0).unwrap();
        // Heap layout: depth of node k is floor(log2(k + 1)).
        let expected: Vec<usize> = (0..30usize).map(|k| (usize::BITS - 1 - (k + 1).leading_zeros()) as usize).collect();
        assert_eq!(depths(&t), expected);
        assert_eq!(t.height(), 4);

        let single = HierarchyTree::new(1, 15, 2, 200).unwrap();
        assert_eq!(single.height(), 0);
        assert_eq!(single.neighbor_best(0), 0);
    }

    #[test]
    fn parent_influence() {
        let t = HierarchyTree::new(30, 15, 2, 200).unwrap();
        assert_eq!(t.neighbor_best(0), 0);
        assert_eq!(t.neighbor_best(7), 0);
        assert_eq!(t.neighbor_best(20), 1);
    }

    #[test]
    fn swap_promotes_one_level_per_pass() {
        let mut t = HierarchyTree::new(7, 2, 2, 0).unwrap();
        // Particle 6 sits at depth 2 under node 2, which sits under the root.
        let mut f = vec![1u64; 7];
        f[6] = 10;
        t.swap_pass(&f);
        assert_eq!(t.node_of(6), 2);
        assert_eq!(t.neighbor_best(6), 0);
        t.swap_pass(&f);
        assert_eq!(t.node_of(6), 0);
        // Root's children now follow particle 6.
        for child in t.children_nodes(0) {
            assert_eq!(t.neighbor_best(t.particle_at(child)), 6);
        }
    }

    #[test]
    fn equal_fitness_leaves_tree_alone() {
        let mut t = HierarchyTree::new(30, 3, 2, 0).unwrap();
        let before = t.clone();
        let log = t.swap_pass(&vec![5u64; 30]);
        assert!(log.iter().all(|r| !r.swapped));
        assert_eq!(t, before);
    }

    #[test]
    fn degree_decrease_rebuilds_best_first() {
        let mut t = HierarchyTree::new(30, 15, 2, 200).unwrap();
        // Distinct fitnesses with the best particle at index 17.
        let f: Vec<u64> = (0..30u64).map(|i| (i * 11 + 3) % 30 + if i == 17 { 100 } else { 0 }).collect();
        for it in 0..199 {
            t.post_iteration(&f, it);
            assert_eq!(t.branch_degree(), 15);
        }
        t.post_iteration(&f, 199);
        assert_eq!(t.branch_degree(), 14);
        assert_eq!(t.particle_at(0), 17);
        let occupants: Vec<u64> = t.node_to_particle().iter().map(|&p| f[p]).collect();
        assert!(occupants.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn degree_never_drops_below_minimum() {
        let mut t = HierarchyTree::new(30, 4, 2, 1).unwrap();
        let f = vec![0u64; 30];
        for it in 0..10 {
            t.post_iteration(&f, it);
        }
        assert_eq!(t.branch_degree(), 2);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(HierarchyTree::new(0, 15, 2, 200).is_err());
        assert!(HierarchyTree::new(30, 1, 1, 200).is_err());
        assert!(HierarchyTree::new(30, 15, 16, 200).is_err());
        assert!(HierarchyTree::new(30, 15, 0, 200).is_err());
    }

    #[test]
    fn inertia_endpoints() {
        assert_eq!(hierarchy_inertia(4, 4, 0.9, 0.4), 0.9);
        assert_eq!(hierarchy_inertia(0, 4, 0.9, 0.4), 0.4);
        assert!((hierarchy_inertia(2, 4, 0.9, 0.4) - 0.65).abs() < 1e-15);
        // Single-node tree: the root is also the deepest level.
        assert_eq!(hierarchy_inertia(0, 0, 0.9, 0.4), 0.9);
    }
}
