use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::graph::{build_graph, BipartiteGraph};
use super::Permutation;
use crate::error::{Error, Result};
use crate::model::SparseDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn index(self) -> usize {
        self as usize
    }

    fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BisectionConfig {
    pub max_iters_per_level: usize,
    pub min_partition_size: usize,
    /// `None` means ⌈log₂ num_data⌉.
    pub max_depth: Option<usize>,
    /// Shuffle each partition with `seed` before the initial split instead
    /// of alternating vertices sorted by degree.
    pub shuffle: bool,
    pub seed: u64,
}

impl Default for BisectionConfig {
    fn default() -> Self {
        BisectionConfig {
            max_iters_per_level: 20,
            min_partition_size: 32,
            max_depth: None,
            shuffle: false,
            seed: 0,
        }
    }
}

impl BisectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters_per_level == 0 || self.min_partition_size == 0 || self.max_depth == Some(0) {
            return Err(Error::validation(
                "bisection iterations, partition size and depth must be positive",
            ));
        }
        Ok(())
    }
}

/// Cost trajectory of one bisection: the initial cost followed by the cost
/// after every accepted swap round.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelTrace {
    pub depth: usize,
    pub size: usize,
    pub costs: Vec<f64>,
    /// A round raised the cost and was undone.
    pub reverted: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RgbTrace {
    pub levels: Vec<LevelTrace>,
}

impl RgbTrace {
    pub fn is_monotone(&self) -> bool {
        self.levels
            .iter()
            .all(|l| l.costs.windows(2).all(|w| w[1] <= w[0]))
    }

    /// Initial and final cost of the root bisection.
    pub fn root_costs(&self) -> Option<(f64, f64)> {
        let root = self.levels.iter().find(|l| l.depth == 0)?;
        Some((*root.costs.first()?, *root.costs.last()?))
    }
}

struct Log2Table(Vec<f64>);

impl Log2Table {
    fn new(limit: usize) -> Self {
        Log2Table((0..=limit + 1).map(|i| (i.max(1) as f64).log2()).collect())
    }

    /// Estimated bits for `deg` neighbors spread over a side of `n` vertices.
    #[inline]
    fn cost(&self, deg: u32, n: usize) -> f64 {
        if deg == 0 {
            0.0
        } else {
            deg as f64 * (self.0[n] - self.0[deg as usize + 1])
        }
    }
}

/// Log-gap cost of a two-way split of every data vertex.
pub fn bisection_cost(assignment: &[Side], graph: &BipartiteGraph) -> f64 {
    let (log, degs, sizes) = side_degrees(assignment, graph);
    degs.iter()
        .map(|d| log.cost(d[0], sizes[0]) + log.cost(d[1], sizes[1]))
        .sum()
}

/// Per data vertex, the cost reduction from moving it to the other side
/// while both side sizes are held fixed. Two vertices with no document in
/// common change the cost by exactly the sum of their gains when swapped.
pub fn move_gains(assignment: &[Side], graph: &BipartiteGraph) -> Vec<f64> {
    let (log, degs, sizes) = side_degrees(assignment, graph);
    (0..graph.num_data())
        .map(|v| {
            let s = assignment[v];
            gain(&log, &degs, sizes, graph.documents(v), s)
        })
        .collect()
}

fn side_degrees(assignment: &[Side], graph: &BipartiteGraph) -> (Log2Table, Vec<[u32; 2]>, [usize; 2]) {
    assert_eq!(assignment.len(), graph.num_data(), "one side per data vertex");
    let mut sizes = [0usize; 2];
    for s in assignment {
        sizes[s.index()] += 1;
    }
    let degs = (0..graph.num_queries())
        .map(|q| {
            let mut d = [0u32; 2];
            for &v in graph.neighbors(q) {
                d[assignment[v as usize].index()] += 1;
            }
            d
        })
        .collect();
    (Log2Table::new(graph.num_data()), degs, sizes)
}

#[inline]
fn gain(log: &Log2Table, degs: &[[u32; 2]], sizes: [usize; 2], docs: &[u32], from: Side) -> f64 {
    let (s, t) = (from.index(), from.other().index());
    let mut g = 0.0;
    for &q in docs {
        let d = degs[q as usize];
        g += log.cost(d[s], sizes[s]) + log.cost(d[t], sizes[t])
            - log.cost(d[s] - 1, sizes[s])
            - log.cost(d[t] + 1, sizes[t]);
    }
    g
}

/// Reorders component IDs by recursive graph bisection.
pub fn rgb_reorder(ds: &SparseDataset, cfg: &BisectionConfig) -> Result<Permutation> {
    rgb_reorder_traced(ds, cfg).map(|(p, _)| p)
}

pub fn rgb_reorder_traced(ds: &SparseDataset, cfg: &BisectionConfig) -> Result<(Permutation, RgbTrace)> {
    cfg.validate()?;
    let graph = build_graph(ds);
    let n = graph.num_data();
    let max_depth = cfg
        .max_depth
        .unwrap_or_else(|| n.max(1).next_power_of_two().trailing_zeros() as usize);

    let mut state = State {
        graph: &graph,
        cfg,
        max_depth,
        log: Log2Table::new(n),
        side: vec![Side::Left; n],
        degs: vec![[0; 2]; graph.num_queries()],
        epoch: vec![0; graph.num_queries()],
        current_epoch: 0,
        touched: Vec::new(),
        gains: vec![0.0; n],
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        trace: RgbTrace::default(),
    };
    let mut order: Vec<u32> = (0..n as u32).collect();
    state.recurse(&mut order, 0);

    let dim = ds.dim() as usize;
    let mut forward = vec![u32::MAX; dim];
    for (new, &v) in order.iter().enumerate() {
        forward[graph.original_id(v as usize) as usize] = new as u32;
    }
    for (next, slot) in (n as u32..).zip(forward.iter_mut().filter(|s| **s == u32::MAX)) {
        *slot = next;
    }
    Ok((Permutation::new(forward)?, state.trace))
}

struct State<'a> {
    graph: &'a BipartiteGraph,
    cfg: &'a BisectionConfig,
    max_depth: usize,
    log: Log2Table,
    side: Vec<Side>,
    degs: Vec<[u32; 2]>,
    // documents touched by the current partition are stamped with its epoch
    epoch: Vec<u32>,
    current_epoch: u32,
    touched: Vec<u32>,
    gains: Vec<f64>,
    rng: ChaCha8Rng,
    trace: RgbTrace,
}

impl State<'_> {
    fn recurse(&mut self, vertices: &mut [u32], depth: usize) {
        if vertices.len() <= self.cfg.min_partition_size || depth >= self.max_depth || vertices.len() < 2 {
            vertices.sort_unstable();
            return;
        }
        let split = self.bisect(vertices, depth);
        let (left, right) = vertices.split_at_mut(split);
        self.recurse(left, depth + 1);
        self.recurse(right, depth + 1);
    }

    /// Splits `vertices` in place into a left and right half and returns the
    /// size of the left half.
    fn bisect(&mut self, vertices: &mut [u32], depth: usize) -> usize {
        let g = self.graph;
        if self.cfg.shuffle {
            vertices.shuffle(&mut self.rng);
        } else {
            vertices.sort_by(|&a, &b| g.degree(b as usize).cmp(&g.degree(a as usize)).then(a.cmp(&b)));
        }
        let mut left = Vec::with_capacity(vertices.len().div_ceil(2));
        let mut right = Vec::with_capacity(vertices.len() / 2);
        for (i, &v) in vertices.iter().enumerate() {
            if i % 2 == 0 {
                self.side[v as usize] = Side::Left;
                left.push(v);
            } else {
                self.side[v as usize] = Side::Right;
                right.push(v);
            }
        }
        let sizes = [left.len(), right.len()];

        self.current_epoch += 1;
        self.touched.clear();
        for &v in vertices.iter() {
            let s = self.side[v as usize].index();
            for &q in g.documents(v as usize) {
                let q = q as usize;
                if self.epoch[q] != self.current_epoch {
                    self.epoch[q] = self.current_epoch;
                    self.degs[q] = [0, 0];
                    self.touched.push(q as u32);
                }
                self.degs[q][s] += 1;
            }
        }

        let mut cost = self.partition_cost(sizes);
        let mut level = LevelTrace {
            depth,
            size: vertices.len(),
            costs: vec![cost],
            reverted: false,
        };
        for _ in 0..self.cfg.max_iters_per_level {
            for &v in left.iter().chain(right.iter()) {
                let s = self.side[v as usize];
                self.gains[v as usize] = gain(&self.log, &self.degs, sizes, g.documents(v as usize), s);
            }
            let gains = &self.gains;
            let by_gain = |a: &u32, b: &u32| gains[*b as usize].total_cmp(&gains[*a as usize]).then(a.cmp(b));
            left.sort_by(by_gain);
            right.sort_by(by_gain);
            let swaps = left
                .iter()
                .zip(&right)
                .take_while(|(&u, &w)| gains[u as usize] + gains[w as usize] > 0.0)
                .count();
            if swaps == 0 {
                break;
            }
            self.swap(&mut left, &mut right, swaps);
            let next = self.partition_cost(sizes);
            if next > cost {
                self.swap(&mut left, &mut right, swaps);
                level.reverted = true;
                break;
            }
            cost = next;
            level.costs.push(cost);
        }
        debug_assert!(level.costs.windows(2).all(|w| w[1] <= w[0]));
        self.trace.levels.push(level);

        let split = left.len();
        left.sort_unstable();
        right.sort_unstable();
        vertices[..split].copy_from_slice(&left);
        vertices[split..].copy_from_slice(&right);
        split
    }

    /// Exchanges the first `count` vertices of `left` and `right`.
    fn swap(&mut self, left: &mut [u32], right: &mut [u32], count: usize) {
        for i in 0..count {
            let (u, w) = (left[i], right[i]);
            self.move_vertex(u, Side::Right);
            self.move_vertex(w, Side::Left);
            left[i] = w;
            right[i] = u;
        }
    }

    fn move_vertex(&mut self, v: u32, to: Side) {
        let from = self.side[v as usize];
        self.side[v as usize] = to;
        for &q in self.graph.documents(v as usize) {
            let d = &mut self.degs[q as usize];
            d[from.index()] -= 1;
            d[to.index()] += 1;
        }
    }

    fn partition_cost(&self, sizes: [usize; 2]) -> f64 {
        self.touched
            .iter()
            .map(|&q| {
                let d = self.degs[q as usize];
                self.log.cost(d[0], sizes[0]) + self.log.cost(d[1], sizes[1])
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitstream::{self, BitCodec};
    use crate::model::{to_gaps, SparseVector};
    use crate::rgb::apply_permutation;
    use rand::Rng;

    fn doc(c: Vec<u32>) -> SparseVector {
        let n = c.len();
        SparseVector::new(c, vec![1.0; n]).unwrap()
    }

    fn gamma_bits(ds: &SparseDataset) -> u64 {
        ds.docs()
            .iter()
            .map(|d| bitstream::encoded_bits(to_gaps(d.components()).unwrap().as_slice(), BitCodec::Gamma))
            .sum()
    }

    #[test]
    fn cost_examples() {
        let ds = SparseDataset::from_docs(4, vec![doc(vec![])]).unwrap();
        assert_eq!(bisection_cost(&[], &build_graph(&ds)), 0.0);

        let ds = SparseDataset::from_docs(4, vec![doc(vec![0, 1, 2, 3])]).unwrap();
        let c = bisection_cost(&[Side::Left; 4], &build_graph(&ds));
        assert!((c - 4.0 * (4.0f64 / 5.0).log2()).abs() < 1e-12);
        assert!((c + 1.288).abs() < 1e-3);
    }

    #[test]
    fn gains_add_up_for_disjoint_swaps() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let docs = (0..6)
                .map(|_| {
                    let mut c: Vec<u32> = (0..16).filter(|_| rng.random_bool(0.3)).collect();
                    c.dedup();
                    doc(c)
                })
                .collect();
            let ds = SparseDataset::from_docs(16, docs).unwrap();
            let g = build_graph(&ds);
            let n = g.num_data();
            let side: Vec<Side> = (0..n)
                .map(|i| if i % 2 == 0 { Side::Left } else { Side::Right })
                .collect();
            let gains = move_gains(&side, &g);
            let before = bisection_cost(&side, &g);
            for u in (0..n).step_by(2) {
                for w in (1..n).step_by(2) {
                    let disjoint = g.documents(u).iter().all(|q| !g.documents(w).contains(q));
                    if !disjoint {
                        continue;
                    }
                    let mut swapped = side.clone();
                    swapped[u] = Side::Right;
                    swapped[w] = Side::Left;
                    let after = bisection_cost(&swapped, &g);
                    assert!((before - after - gains[u] - gains[w]).abs() < 1e-9);
                }
            }
        }
    }

    fn two_cluster(n: usize, seed: u64) -> SparseDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let docs = (0..n)
            .map(|i| {
                let parity = (i % 2) as u32;
                let mut c: Vec<u32> = (0..20).map(|_| 2 * rng.random_range(0..100) + parity).collect();
                c.sort_unstable();
                c.dedup();
                doc(c)
            })
            .collect();
        SparseDataset::from_docs(200, docs).unwrap()
    }

    #[test]
    fn two_clusters_are_separated() {
        let ds = two_cluster(400, 3);
        let (perm, trace) = rgb_reorder_traced(&ds, &BisectionConfig::default()).unwrap();
        assert!(trace.is_monotone());
        let (first, last) = trace.root_costs().unwrap();
        assert!(last < first);
        // the root split puts even IDs on one side and odd IDs on the other
        let evens_low = (0..200).step_by(2).all(|c| perm.map(c) < 100);
        let evens_high = (0..200).step_by(2).all(|c| perm.map(c) >= 100);
        assert!(evens_low || evens_high);
        let out = apply_permutation(&ds, &perm).unwrap();
        assert!(gamma_bits(&out) < gamma_bits(&ds));
        assert_eq!(apply_permutation(&out, &perm.inverse()).unwrap(), ds);
    }

    #[test]
    fn single_document_never_grows() {
        let ds = SparseDataset::from_docs(30522, vec![doc((0..119).map(|i| i * 251 + 3).collect())]).unwrap();
        let perm = rgb_reorder(&ds, &BisectionConfig::default()).unwrap();
        let out = apply_permutation(&ds, &perm).unwrap();
        assert!(gamma_bits(&out) <= gamma_bits(&ds));
        assert_eq!(out[0].components(), (0..119).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn unobserved_ids_trail_in_order() {
        let ds = SparseDataset::from_docs(10, vec![doc(vec![2, 7])]).unwrap();
        let perm = rgb_reorder(&ds, &BisectionConfig::default()).unwrap();
        let tail: Vec<u32> = [0, 1, 3, 4, 5, 6, 8, 9].iter().map(|&c| perm.map(c)).collect();
        assert_eq!(tail, [2, 3, 4, 5, 6, 7, 8, 9]);
        assert!(perm.map(2) < 2 && perm.map(7) < 2);
    }

    #[test]
    fn deterministic_and_config_checked() {
        let ds = two_cluster(100, 9);
        let cfg = BisectionConfig {
            shuffle: true,
            seed: 5,
            min_partition_size: 4,
            ..Default::default()
        };
        assert_eq!(rgb_reorder(&ds, &cfg).unwrap(), rgb_reorder(&ds, &cfg).unwrap());
        let empty = rgb_reorder(&SparseDataset::new(5), &BisectionConfig::default()).unwrap();
        assert!(empty.is_identity());
        let bad = BisectionConfig {
            max_iters_per_level: 0,
            ..Default::default()
        };
        assert!(rgb_reorder(&ds, &bad).is_err());
    }
}
