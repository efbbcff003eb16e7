//! k-nearest PRM* roadmap with vertex-origin tagging.
//!
//! Vertices carry their origin: `Endpoint` (start/goal), `Sampled` (drawn by
//! the sampler) or `Optimized` (injected from an optimized path). Only
//! Sampled vertices count toward the k-nearest-neighbor rule, and the
//! sampler's neighbor candidates never include Optimized vertices, so the
//! Sampled subgraph built under interleaved optimization is identical to the
//! one plain PRM* would build from the same seed. New samples additionally
//! try their k nearest Optimized vertices, which is what makes injected
//! paths reachable.
//!
//! Shortest start-to-goal distances are maintained incrementally: the graph
//! only ever gains vertices and edges, so distance labels only decrease and
//! each insertion triggers a local Dijkstra relaxation from the new edge.
//! [`Roadmap::shortest_path`] recomputes from scratch (uniform-cost search);
//! both agree on cost and that agreement is tested.

use crate::budget::Clock;
use crate::environment::Scenario;
use crate::error::{Error, Result};
use crate::path::{Config, Path};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BinaryHeap, HashSet};

/// Relative improvement required before the expansion step yields a path;
/// rules out infinite loops on floating-point ties.
pub const EPS_IMPROVE: f64 = 1e-9;

/// Default slack for edge collision validation, matching the optimizer's
/// feasibility slack.
pub const DEFAULT_EDGE_TOLERANCE: f64 = 1e-8;

/// k(n) = ceil(k_RRG * ln(n + 1)) with k_RRG = e * (1 + 1/d), the standard
/// sufficient constant for asymptotic optimality of k-nearest PRM*.
pub fn k_of_n(n: usize, d: usize) -> usize {
    debug_assert!(n >= 1 && d >= 2);
    let k_rrg = std::f64::consts::E * (1.0 + 1.0 / d as f64);
    (k_rrg * ((n + 1) as f64).ln()).ceil() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Endpoint,
    Sampled,
    Optimized,
}

#[derive(Debug, Clone)]
pub struct Vertex {
    pub q: Config,
    pub origin: Origin,
    pub goal_flag: bool,
}

const NO_PARENT: usize = usize::MAX;

#[derive(Debug)]
pub struct Roadmap {
    vertices: Vec<Vertex>,
    adjacency: Vec<Vec<(usize, f64)>>,
    /// Undirected edges in insertion order.
    edge_log: Vec<(usize, usize)>,
    edge_set: HashSet<(usize, usize)>,
    /// Endpoint + Sampled vertex ids in insertion order; the sampler's
    /// neighbor candidates.
    sampling_index: Vec<usize>,
    optimized_index: Vec<usize>,
    sampled_count: usize,
    edge_tolerance: f64,
    // incremental shortest-path state (from the start vertex)
    dist: Vec<f64>,
    parent: Vec<usize>,
    goal_vertices: Vec<usize>,
    best_goal: Option<usize>,
}

struct HeapEntry {
    dist: f64,
    vertex: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.dist == other.dist && self.vertex == other.vertex
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // min-heap on (dist, vertex); distances are always finite here
        other
            .dist
            .partial_cmp(&self.dist)
            .expect("no NaN distances")
            .then(other.vertex.cmp(&self.vertex))
    }
}

/// Ordered view of the Sampled-side subgraph (Endpoint + Sampled vertices and
/// the edges among them), used to verify the supergraph property.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSubgraph {
    pub configs: Vec<Vec<f64>>,
    /// Edges as positions into `configs`, in insertion order.
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoadmapDump {
    pub vertices: Vec<DumpVertex>,
    pub edges: Vec<DumpEdge>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DumpVertex {
    pub id: usize,
    pub origin: Origin,
    pub goal: bool,
    pub q: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DumpEdge {
    pub u: usize,
    pub v: usize,
    pub length: f64,
}

impl Roadmap {
    /// Start vertex (and, for single-config goals, the goal vertex) seed the
    /// graph; a direct start-goal connection is attempted immediately.
    pub fn new(scenario: &Scenario, edge_tolerance: f64) -> Result<Self> {
        if !scenario
            .robot
            .static_feasible(&scenario.start, &scenario.obstacles)
        {
            return Err(Error::Scenario("start configuration is infeasible".into()));
        }
        let mut rm = Roadmap {
            vertices: Vec::new(),
            adjacency: Vec::new(),
            edge_log: Vec::new(),
            edge_set: HashSet::new(),
            sampling_index: Vec::new(),
            optimized_index: Vec::new(),
            sampled_count: 0,
            edge_tolerance,
            dist: Vec::new(),
            parent: Vec::new(),
            goal_vertices: Vec::new(),
            best_goal: None,
        };
        let start_is_goal = scenario.is_goal_config(&scenario.start);
        rm.insert_vertex(scenario.start.clone(), Origin::Endpoint, start_is_goal);
        rm.dist[0] = 0.0;
        if start_is_goal {
            rm.best_goal = Some(0);
        }
        if let crate::environment::GoalSpec::SingleConfig(goal) = &scenario.goal {
            if !scenario.robot.static_feasible(goal, &scenario.obstacles) {
                return Err(Error::Scenario("goal configuration is infeasible".into()));
            }
            rm.insert_vertex(goal.clone(), Origin::Endpoint, true);
            rm.try_connect(scenario, 1, 0)?;
        }
        Ok(rm)
    }

    fn insert_vertex(&mut self, q: Config, origin: Origin, goal_flag: bool) -> usize {
        let id = self.vertices.len();
        self.vertices.push(Vertex { q, origin, goal_flag });
        self.adjacency.push(Vec::new());
        self.dist.push(f64::INFINITY);
        self.parent.push(NO_PARENT);
        match origin {
            Origin::Endpoint | Origin::Sampled => {
                self.sampling_index.push(id);
                if origin == Origin::Sampled {
                    self.sampled_count += 1;
                }
            }
            Origin::Optimized => self.optimized_index.push(id),
        }
        if goal_flag {
            self.goal_vertices.push(id);
        }
        id
    }

    /// Validate the edge at checking resolution and insert it if collision
    /// free. Returns whether the edge was added.
    fn try_connect(&mut self, scenario: &Scenario, u: usize, v: usize) -> Result<bool> {
        if u == v {
            return Ok(false);
        }
        let key = (u.min(v), u.max(v));
        if self.edge_set.contains(&key) {
            return Ok(false);
        }
        let qu = &self.vertices[u].q;
        let qv = &self.vertices[v].q;
        let length = qu.distance(qv);
        let resolution = scenario.robot.checking_resolution(length);
        if !scenario
            .robot
            .edge_valid(qu, qv, &scenario.obstacles, resolution, self.edge_tolerance)?
        {
            return Ok(false);
        }
        self.insert_edge(u, v, length);
        Ok(true)
    }

    fn insert_edge(&mut self, u: usize, v: usize, length: f64) {
        self.adjacency[u].push((v, length));
        self.adjacency[v].push((u, length));
        self.edge_set.insert((u.min(v), u.max(v)));
        self.edge_log.push((u, v));
        self.relax_edge(u, v, length);
    }

    /// Local Dijkstra relaxation after inserting edge (u, v): distance labels
    /// only ever decrease on a growing graph, so propagating improvements
    /// from the new edge keeps every label exact.
    fn relax_edge(&mut self, u: usize, v: usize, length: f64) {
        let mut heap = BinaryHeap::new();
        if self.dist[u] + length < self.dist[v] {
            self.dist[v] = self.dist[u] + length;
            self.parent[v] = u;
            self.note_goal_improvement(v);
            heap.push(HeapEntry {
                dist: self.dist[v],
                vertex: v,
            });
        }
        if self.dist[v] + length < self.dist[u] {
            self.dist[u] = self.dist[v] + length;
            self.parent[u] = v;
            self.note_goal_improvement(u);
            heap.push(HeapEntry {
                dist: self.dist[u],
                vertex: u,
            });
        }
        while let Some(HeapEntry { dist, vertex }) = heap.pop() {
            if dist > self.dist[vertex] {
                continue;
            }
            for i in 0..self.adjacency[vertex].len() {
                let (next, w) = self.adjacency[vertex][i];
                let candidate = dist + w;
                if candidate < self.dist[next] {
                    self.dist[next] = candidate;
                    self.parent[next] = vertex;
                    self.note_goal_improvement(next);
                    heap.push(HeapEntry {
                        dist: candidate,
                        vertex: next,
                    });
                }
            }
        }
    }

    fn note_goal_improvement(&mut self, v: usize) {
        if self.vertices[v].goal_flag {
            let better = match self.best_goal {
                None => true,
                Some(cur) => self.dist[v] < self.dist[cur],
            };
            if better {
                self.best_goal = Some(v);
            }
        }
    }

    /// k nearest vertices to `q` among `index`, excluding `exclude`. Ties are
    /// broken by index position, which is identical across planning modes.
    fn k_nearest(&self, index: &[usize], q: &Config, k: usize, exclude: usize) -> Vec<usize> {
        let mut candidates: Vec<(f64, usize)> = index
            .iter()
            .enumerate()
            .filter(|(_, id)| **id != exclude)
            .map(|(pos, id)| (q.distance(&self.vertices[*id].q), pos))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| {
            a.0.partial_cmp(&b.0)
                .expect("finite distances")
                .then(a.1.cmp(&b.1))
        };
        if candidates.len() > k {
            candidates.select_nth_unstable_by(k - 1, cmp);
            candidates.truncate(k);
        }
        candidates.sort_unstable_by(cmp);
        candidates.into_iter().map(|(_, pos)| index[pos]).collect()
    }

    /// Draw one uniform configuration (always consuming exactly `dim` draws
    /// from the sampling stream), insert it if statically feasible, and
    /// attempt connections to its k nearest Sampled and k nearest Optimized
    /// vertices. Returns the new vertex id, or None on rejection.
    pub fn add_sample(&mut self, scenario: &Scenario, rng: &mut ChaCha8Rng) -> Result<Option<usize>> {
        let bounds = scenario.robot.sampling_bounds();
        let q = Config(
            bounds
                .iter()
                .map(|b| rng.gen_range(b[0]..b[1]))
                .collect::<Vec<f64>>(),
        );
        if !scenario.robot.static_feasible(&q, &scenario.obstacles) {
            return Ok(None);
        }
        let goal_flag = match scenario.goal {
            crate::environment::GoalSpec::SingleConfig(_) => false,
            crate::environment::GoalSpec::WorkspaceRegion { .. } => scenario.is_goal_config(&q),
        };
        let id = self.insert_vertex(q, Origin::Sampled, goal_flag);
        let k = k_of_n(self.sampled_count, scenario.dim().max(2));
        let sampled_neighbors =
            self.k_nearest(&self.sampling_index, &self.vertices[id].q.clone(), k, id);
        for nb in sampled_neighbors {
            self.try_connect(scenario, id, nb)?;
        }
        if !self.optimized_index.is_empty() {
            let optimized_neighbors =
                self.k_nearest(&self.optimized_index, &self.vertices[id].q.clone(), k, id);
            for nb in optimized_neighbors {
                self.try_connect(scenario, id, nb)?;
            }
        }
        Ok(Some(id))
    }

    /// Insert an optimized path: interior waypoints become Optimized
    /// vertices, consecutive waypoints are connected, endpoints unify with
    /// the existing Endpoint vertices. The path is re-validated at checking
    /// resolution first and rejected with a diagnostic if it fails.
    pub fn inject_path(&mut self, scenario: &Scenario, path: &Path) -> Result<()> {
        if path.waypoints.len() < 2 {
            return Err(Error::PathRejected("injected path needs >= 2 waypoints".into()));
        }
        for (i, w) in path.waypoints.windows(2).enumerate() {
            let length = w[0].distance(&w[1]);
            let resolution = scenario.robot.checking_resolution(length);
            let (min_value, worst) =
                scenario
                    .robot
                    .edge_min_clearance(&w[0], &w[1], &scenario.obstacles, resolution)?;
            if min_value < -self.edge_tolerance {
                return Err(Error::PathRejected(format!(
                    "edge {i} re-validates at clearance {min_value:e} ({worst:?}); \
                     optimizer tolerance and checker resolution disagree"
                )));
            }
        }

        let mut previous: Option<usize> = None;
        for wp in &path.waypoints {
            let id = if wp.0 == self.vertices[0].q.0 {
                0
            } else if matches!(scenario.goal, crate::environment::GoalSpec::SingleConfig(_))
                && wp.0 == self.vertices[1].q.0
            {
                1
            } else {
                let goal_flag = match scenario.goal {
                    crate::environment::GoalSpec::SingleConfig(_) => false,
                    crate::environment::GoalSpec::WorkspaceRegion { .. } => {
                        scenario.is_goal_config(wp)
                    }
                };
                self.insert_vertex(wp.clone(), Origin::Optimized, goal_flag)
            };
            if let Some(prev) = previous {
                if prev != id && !self.edge_set.contains(&(prev.min(id), prev.max(id))) {
                    let length = self.vertices[prev].q.distance(&self.vertices[id].q);
                    if length > 0.0 {
                        self.insert_edge(prev, id, length);
                    }
                }
            }
            previous = Some(id);
        }
        Ok(())
    }

    /// Cost of the best start-to-goal path currently in the graph.
    pub fn best_goal_cost(&self) -> Option<f64> {
        self.best_goal.map(|g| self.dist[g])
    }

    fn extract_path_to(&self, goal: usize) -> Path {
        let mut ids = vec![goal];
        let mut v = goal;
        while self.parent[v] != NO_PARENT {
            v = self.parent[v];
            ids.push(v);
        }
        debug_assert_eq!(v, 0, "path must trace back to the start vertex");
        ids.reverse();
        Path::new(ids.into_iter().map(|id| self.vertices[id].q.clone()).collect())
    }

    /// Minimum-length path from the start to any goal vertex via fresh
    /// uniform-cost search; None when disconnected.
    pub fn shortest_path(&self) -> Option<Path> {
        let n = self.vertices.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut parent = vec![NO_PARENT; n];
        let mut heap = BinaryHeap::new();
        dist[0] = 0.0;
        heap.push(HeapEntry { dist: 0.0, vertex: 0 });
        while let Some(HeapEntry { dist: d, vertex }) = heap.pop() {
            if d > dist[vertex] {
                continue;
            }
            for &(next, w) in &self.adjacency[vertex] {
                let candidate = d + w;
                if candidate < dist[next] {
                    dist[next] = candidate;
                    parent[next] = vertex;
                    heap.push(HeapEntry {
                        dist: candidate,
                        vertex: next,
                    });
                }
            }
        }
        let goal = self
            .goal_vertices
            .iter()
            .copied()
            .filter(|g| dist[*g].is_finite())
            .min_by(|a, b| {
                dist[*a]
                    .partial_cmp(&dist[*b])
                    .expect("finite")
                    .then(a.cmp(b))
            })?;
        let mut ids = vec![goal];
        let mut v = goal;
        while parent[v] != NO_PARENT {
            v = parent[v];
            ids.push(v);
        }
        ids.reverse();
        Some(Path::new(
            ids.into_iter().map(|id| self.vertices[id].q.clone()).collect(),
        ))
    }

    /// Sample until the roadmap contains a path strictly better than
    /// `best_cost` (relative margin [`EPS_IMPROVE`]) or the clock expires.
    /// At least one accepted sample separates consecutive returns, keeping
    /// global exploration going between optimization steps.
    pub fn expand_until_improved(
        &mut self,
        scenario: &Scenario,
        best_cost: f64,
        clock: &mut Clock,
        rng: &mut ChaCha8Rng,
    ) -> Result<Option<Path>> {
        let threshold = if best_cost.is_finite() {
            best_cost * (1.0 - EPS_IMPROVE)
        } else {
            f64::INFINITY
        };
        loop {
            if clock.expired() {
                return Ok(None);
            }
            clock.note_attempt();
            if self.add_sample(scenario, rng)?.is_some() {
                clock.note_accepted();
                if let Some(goal) = self.best_goal {
                    if self.dist[goal] < threshold {
                        return Ok(Some(self.extract_path_to(goal)));
                    }
                }
            }
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_log.len()
    }

    pub fn sampled_count(&self) -> usize {
        self.sampled_count
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edge_log.iter().map(|&(u, v)| {
            let w = self.adjacency[u]
                .iter()
                .find(|(x, _)| *x == v)
                .expect("logged edge exists")
                .1;
            (u, v, w)
        })
    }

    /// The Sampled-side subgraph in insertion order. Positions are stable
    /// across planning modes, so equal seeds must produce equal subgraphs
    /// whether or not optimized paths were injected in between.
    pub fn sampled_subgraph(&self) -> SampledSubgraph {
        let mut position = vec![usize::MAX; self.vertices.len()];
        for (pos, id) in self.sampling_index.iter().enumerate() {
            position[*id] = pos;
        }
        let configs = self
            .sampling_index
            .iter()
            .map(|id| self.vertices[*id].q.0.clone())
            .collect();
        let edges = self
            .edge_log
            .iter()
            .filter(|(u, v)| position[*u] != usize::MAX && position[*v] != usize::MAX)
            .map(|&(u, v)| (position[u], position[v]))
            .collect();
        SampledSubgraph { configs, edges }
    }

    pub fn dump(&self) -> RoadmapDump {
        RoadmapDump {
            vertices: self
                .vertices
                .iter()
                .enumerate()
                .map(|(id, v)| DumpVertex {
                    id,
                    origin: v.origin,
                    goal: v.goal_flag,
                    q: v.q.0.clone(),
                })
                .collect(),
            edges: self.edges().map(|(u, v, length)| DumpEdge { u, v, length }).collect(),
        }
    }

    pub fn dump_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.dump()).expect("dump serializes");
        s.push('\n');
        s
    }

    /// Re-validate every stored edge at checking resolution.
    pub fn revalidate_edges(&self, scenario: &Scenario) -> Result<bool> {
        for (u, v, _) in self.edges() {
            let qu = &self.vertices[u].q;
            let qv = &self.vertices[v].q;
            let resolution = scenario.robot.checking_resolution(qu.distance(qv));
            let (min_value, _) =
                scenario
                    .robot
                    .edge_min_clearance(qu, qv, &scenario.obstacles, resolution)?;
            if min_value < -self.edge_tolerance {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::Budget;
    use crate::environment::{generate_random_env, GoalSpec, RandomEnvParams};
    use crate::rng::{stream_rng, STREAM_SAMPLING};
    use approx::assert_relative_eq;

    fn sampling_rng(seed: u64) -> ChaCha8Rng {
        stream_rng(seed, STREAM_SAMPLING)
    }

    #[test]
    fn k_of_n_hand_values() {
        assert_eq!(k_of_n(1, 2), 3); // ceil(4.0774 * ln 2)
        assert_eq!(k_of_n(100, 2), 19); // ceil(4.0774 * ln 101)
    }

    #[test]
    fn k_of_n_is_monotone() {
        for d in 2..=8 {
            let mut prev = 0;
            for n in 1..2000 {
                let k = k_of_n(n, d);
                assert!(k >= prev, "k({n}, {d}) = {k} < {prev}");
                assert!(k >= 1);
                prev = k;
            }
        }
    }

    #[test]
    fn first_two_samples_connect_in_empty_box() {
        let s = generate_random_env(&RandomEnvParams::new(2, 0, 1)).unwrap();
        let mut rm = Roadmap::new(&s, DEFAULT_EDGE_TOLERANCE).unwrap();
        let mut rng = sampling_rng(s.seed);
        let a = rm.add_sample(&s, &mut rng).unwrap().unwrap();
        let b = rm.add_sample(&s, &mut rng).unwrap().unwrap();
        assert!(rm.edge_set.contains(&(a.min(b), a.max(b))));
    }

    #[test]
    fn rejected_samples_advance_the_stream_deterministically() {
        // one giant obstacle rejects most draws
        let mut s = generate_random_env(&RandomEnvParams::new(2, 0, 3)).unwrap();
        s.obstacles.push(crate::geometry::ObstaclePrimitive::Hypersphere {
            center: vec![0.5, 0.5],
            radius: 0.45,
        });
        let mut rm = Roadmap::new(&s, DEFAULT_EDGE_TOLERANCE).unwrap();
        let mut rng = sampling_rng(s.seed);
        let mut shadow = sampling_rng(s.seed);

        let mut rejections = 0;
        for _ in 0..50 {
            let before = rm.vertex_count();
            let out = rm.add_sample(&s, &mut rng).unwrap();
            // shadow consumes exactly dim draws per attempt
            let _: Vec<f64> = (0..2).map(|_| shadow.gen_range(0.0..1.0)).collect();
            if out.is_none() {
                assert_eq!(rm.vertex_count(), before);
                rejections += 1;
            }
        }
        assert!(rejections > 0, "expected some rejections");
        // both streams are now aligned
        use rand::Rng as _;
        assert_eq!(rng.gen::<u64>(), shadow.gen::<u64>());
    }

    #[test]
    fn shortest_path_picks_the_cheaper_route() {
        let s = generate_random_env(&RandomEnvParams::new(2, 0, 1)).unwrap();
        let mut rm = Roadmap::new(&s, DEFAULT_EDGE_TOLERANCE).unwrap();
        // construction added the direct start-goal edge (length 1.0); add a detour
        let detour = rm.insert_vertex(Config(vec![0.2, 0.5]), Origin::Sampled, false);
        let goal_q = rm.vertices[1].q.clone();
        let d0 = rm.vertices[0].q.distance(&rm.vertices[detour].q);
        let d1 = rm.vertices[detour].q.distance(&goal_q);
        rm.insert_edge(0, detour, d0);
        rm.insert_edge(detour, 1, d1);
        let p = rm.shortest_path().unwrap();
        assert_relative_eq!(p.length(), 1.0, epsilon = 1e-12);
        assert_eq!(p.waypoints.len(), 2);
    }

    #[test]
    fn shortest_path_none_when_disconnected() {
        let mut s = generate_random_env(&RandomEnvParams::new(2, 0, 1)).unwrap();
        // wall of obstacles separating start from goal, and drop the direct edge
        for i in 0..=12 {
            s.obstacles.push(crate::geometry::ObstaclePrimitive::Hypersphere {
                center: vec![i as f64 / 12.0, 0.5],
                radius: 0.1,
            });
        }
        let rm = Roadmap::new(&s, DEFAULT_EDGE_TOLERANCE).unwrap();
        assert!(rm.shortest_path().is_none());
        assert!(rm.best_goal_cost().is_none());
    }

    /// All simple start-to-goal paths by DFS; exponential, fine for tiny graphs.
    fn brute_force_best(rm: &Roadmap) -> Option<f64> {
        fn dfs(
            rm: &Roadmap,
            v: usize,
            cost: f64,
            visited: &mut Vec<bool>,
            best: &mut Option<f64>,
        ) {
            if rm.vertices[v].goal_flag {
                if best.map_or(true, |b| cost < b) {
                    *best = Some(cost);
                }
                // goal vertices can still be pass-through for region goals,
                // but any extension only lengthens the path; stop here.
                return;
            }
            for &(next, w) in &rm.adjacency[v] {
                if !visited[next] {
                    visited[next] = true;
                    dfs(rm, next, cost + w, visited, best);
                    visited[next] = false;
                }
            }
        }
        let mut visited = vec![false; rm.vertex_count()];
        visited[0] = true;
        let mut best = None;
        dfs(rm, 0, 0.0, &mut visited, &mut best);
        best
    }

    #[test]
    fn shortest_path_matches_brute_force_on_small_graphs() {
        for seed in 0..20u64 {
            let s = generate_random_env(&RandomEnvParams::new(2, 6, seed)).unwrap();
            let mut rm = Roadmap::new(&s, DEFAULT_EDGE_TOLERANCE).unwrap();
            let mut rng = sampling_rng(s.seed);
            while rm.vertex_count() < 10 {
                rm.add_sample(&s, &mut rng).unwrap();
            }
            let dijkstra = rm.shortest_path().map(|p| p.length());
            let brute = brute_force_best(&rm);
            match (dijkstra, brute) {
                (None, None) => {}
                (Some(a), Some(b)) => assert_relative_eq!(a, b, epsilon = 1e-9),
                other => panic!("search disagreement: {other:?}"),
            }
            // incremental labels agree with the fresh search
            if let Some(a) = dijkstra {
                assert_relative_eq!(rm.best_goal_cost().unwrap(), a, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn inject_path_shares_vertices_without_touching_sampled_counts() {
        let s = generate_random_env(&RandomEnvParams::new(2, 10, 4)).unwrap();
        let mut rm = Roadmap::new(&s, DEFAULT_EDGE_TOLERANCE).unwrap();
        let mut rng = sampling_rng(s.seed);
        let mut clock = Clock::new(Budget::Samples(5000));
        let p = rm
            .expand_until_improved(&s, f64::INFINITY, &mut clock, &mut rng)
            .unwrap()
            .expect("path in lightly cluttered box");
        let sampled_before = rm.sampled_count();
        let cost_before = rm.best_goal_cost().unwrap();

        rm.inject_path(&s, &p).unwrap();
        assert_eq!(rm.sampled_count(), sampled_before);
        assert_eq!(
            rm.optimized_index.len(),
            p.waypoints.len() - 2,
            "interior waypoints become Optimized vertices"
        );
        // the graph now contains that path, so the best cost cannot exceed it
        assert!(rm.best_goal_cost().unwrap() <= p.length() + 1e-12);
        assert!(rm.best_goal_cost().unwrap() <= cost_before + 1e-12);
        assert_relative_eq!(
            rm.shortest_path().unwrap().length(),
            rm.best_goal_cost().unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn inject_path_rejects_colliding_paths_with_diagnostics() {
        let s = generate_random_env(&RandomEnvParams::new(2, 25, 42)).unwrap();
        let mut rm = Roadmap::new(&s, DEFAULT_EDGE_TOLERANCE).unwrap();
        // a path that dives straight through the first obstacle's center
        let crate::geometry::ObstaclePrimitive::Hypersphere { center, .. } = &s.obstacles[0] else {
            unreachable!()
        };
        let goal = match &s.goal {
            GoalSpec::SingleConfig(g) => g.clone(),
            _ => unreachable!(),
        };
        let through = Path::new(vec![s.start.clone(), Config(center.clone()), goal]);
        let err = rm.inject_path(&s, &through).unwrap_err();
        assert!(matches!(err, Error::PathRejected(_)), "{err:?}");
        assert!(err.to_string().contains("clearance"), "{err}");
    }

    /// Theorem-style core check: sampling decisions never read Optimized
    /// state, so the Sampled subgraph is bit-identical with and without
    /// interleaved injections.
    #[test]
    fn sampled_subgraph_is_unaffected_by_injection() {
        let s = generate_random_env(&RandomEnvParams::new(2, 25, 9)).unwrap();

        let mut plain = Roadmap::new(&s, DEFAULT_EDGE_TOLERANCE).unwrap();
        let mut rng = sampling_rng(s.seed);
        for _ in 0..500 {
            plain.add_sample(&s, &mut rng).unwrap();
        }

        let mut interleaved = Roadmap::new(&s, DEFAULT_EDGE_TOLERANCE).unwrap();
        let mut rng = sampling_rng(s.seed);
        for i in 0..500 {
            interleaved.add_sample(&s, &mut rng).unwrap();
            if i % 50 == 49 {
                if let Some(p) = interleaved.shortest_path() {
                    interleaved.inject_path(&s, &p).unwrap();
                }
            }
        }

        assert!(interleaved.optimized_index.len() > plain.optimized_index.len());
        assert_eq!(plain.sampled_subgraph(), interleaved.sampled_subgraph());
    }

    #[test]
    fn expansion_returns_strictly_decreasing_costs() {
        let s = generate_random_env(&RandomEnvParams::new(2, 25, 6)).unwrap();
        let mut rm = Roadmap::new(&s, DEFAULT_EDGE_TOLERANCE).unwrap();
        let mut rng = sampling_rng(s.seed);
        let mut clock = Clock::new(Budget::Samples(4000));
        let mut best = f64::INFINITY;
        let mut costs = Vec::new();
        while let Some(p) = rm
            .expand_until_improved(&s, best, &mut clock, &mut rng)
            .unwrap()
        {
            let c = p.length();
            costs.push(c);
            assert!(c < best, "cost {c} did not beat {best}");
            best = c;
        }
        assert!(costs.len() >= 2, "expected several improvements, got {costs:?}");
        assert!(best >= 1.0 - 1e-9, "cost cannot beat the straight line");
    }

    #[test]
    fn expansion_cannot_beat_the_optimum() {
        let s = generate_random_env(&RandomEnvParams::new(2, 0, 2)).unwrap();
        let mut rm = Roadmap::new(&s, DEFAULT_EDGE_TOLERANCE).unwrap();
        let mut rng = sampling_rng(s.seed);
        let mut clock = Clock::new(Budget::Samples(300));
        let out = rm
            .expand_until_improved(&s, 1.0 + 1e-12, &mut clock, &mut rng)
            .unwrap();
        assert!(out.is_none(), "no path can beat cost 1.0 in the empty box");
        assert_eq!(clock.attempts(), 300);
    }

    #[test]
    fn stored_edges_revalidate(){
        let s = generate_random_env(&RandomEnvParams::new(2, 25, 12)).unwrap();
        let mut rm = Roadmap::new(&s, DEFAULT_EDGE_TOLERANCE).unwrap();
        let mut rng = sampling_rng(s.seed);
        for _ in 0..300 {
            rm.add_sample(&s, &mut rng).unwrap();
        }
        assert!(rm.revalidate_edges(&s).unwrap());
    }

    #[test]
    fn roadmap_build_is_deterministic() {
        let s = generate_random_env(&RandomEnvParams::new(3, 30, 8)).unwrap();
        let build = || {
            let mut rm = Roadmap::new(&s, DEFAULT_EDGE_TOLERANCE).unwrap();
            let mut rng = sampling_rng(s.seed);
            for _ in 0..400 {
                rm.add_sample(&s, &mut rng).unwrap();
            }
            rm.dump_json()
        };
        assert_eq!(build(), build());
    }
}
