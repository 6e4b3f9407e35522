//! Measurements on sampled graphs: components, hop distances, layer
//! up-links, the ascending core set `U'_x` and its neighbourhood `N_x`.
//!
//! All node arguments and results are 0-based ranks unless a field says
//! otherwise.

mod dsu;

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphgen::{MultiGraph, NodeId};
use crate::layers::LayerStructure;

use dsu::DisjointSet;

const UNSEEN: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    /// Component id of every rank; ids follow the smallest member rank.
    pub labels: Vec<u32>,
    pub sizes: Vec<usize>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    /// Id of the largest component, smallest id on ties.
    pub fn giant(&self) -> Option<u32> {
        let mut best: Option<u32> = None;
        for (id, &s) in self.sizes.iter().enumerate() {
            if best.is_none_or(|b| s > self.sizes[b as usize]) {
                best = Some(id as u32);
            }
        }
        best
    }

    pub fn giant_size(&self) -> usize {
        self.giant().map_or(0, |g| self.sizes[g as usize])
    }

    pub fn members(&self, id: u32) -> Vec<NodeId> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == id)
            .map(|(r, _)| r as NodeId)
            .collect()
    }

    pub fn giant_members(&self) -> Vec<NodeId> {
        self.giant().map_or_else(Vec::new, |g| self.members(g))
    }
}

/// Connected components via union-find.
pub fn components(g: &MultiGraph) -> Components {
    let n = g.node_count();
    let mut dsu = DisjointSet::new(n);
    for &(u, v) in g.edges() {
        dsu.union(u, v);
    }
    let mut id_of_root = vec![UNSEEN; n];
    let mut labels = Vec::with_capacity(n);
    let mut sizes = Vec::new();
    for r in 0..n as u32 {
        let root = dsu.find(r) as usize;
        if id_of_root[root] == UNSEEN {
            id_of_root[root] = sizes.len() as u32;
            sizes.push(0);
        }
        let id = id_of_root[root];
        sizes[id as usize] += 1;
        labels.push(id);
    }
    Components { labels, sizes }
}

/// Reusable BFS state; resets only the touched entries between runs.
struct Bfs {
    dist: Vec<u32>,
    touched: Vec<NodeId>,
    queue: VecDeque<NodeId>,
}

impl Bfs {
    fn new(n: usize) -> Self {
        Self {
            dist: vec![UNSEEN; n],
            touched: Vec::new(),
            queue: VecDeque::new(),
        }
    }

    fn distance(&mut self, g: &MultiGraph, s: NodeId, t: NodeId) -> Option<u32> {
        if s == t {
            return Some(0);
        }
        for &v in &self.touched {
            self.dist[v as usize] = UNSEEN;
        }
        self.touched.clear();
        self.queue.clear();
        self.dist[s as usize] = 0;
        self.touched.push(s);
        self.queue.push_back(s);
        while let Some(u) = self.queue.pop_front() {
            let d = self.dist[u as usize] + 1;
            for &v in g.neighbors(u as usize) {
                if self.dist[v as usize] == UNSEEN {
                    if v == t {
                        return Some(d);
                    }
                    self.dist[v as usize] = d;
                    self.touched.push(v);
                    self.queue.push_back(v);
                }
            }
        }
        None
    }
}

fn check_rank(g: &MultiGraph, r: NodeId) -> Result<()> {
    if (r as usize) < g.node_count() {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange {
            index: r as u64 + 1,
            n: g.node_count() as u64,
        })
    }
}

/// Hop distance between two ranks; parallel edges and self-loops do not
/// matter. `None` when unreachable.
pub fn bfs_distance(g: &MultiGraph, s: NodeId, t: NodeId) -> Result<Option<u32>> {
    check_rank(g, s)?;
    check_rank(g, t)?;
    Ok(Bfs::new(g.node_count()).distance(g, s, t))
}

/// Hop distances from one source to every rank (`None` if unreachable).
pub fn bfs_all(g: &MultiGraph, s: NodeId) -> Result<Vec<Option<u32>>> {
    check_rank(g, s)?;
    let mut dist = vec![UNSEEN; g.node_count()];
    let mut queue = VecDeque::from([s]);
    dist[s as usize] = 0;
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u as usize) {
            if dist[v as usize] == UNSEEN {
                dist[v as usize] = dist[u as usize] + 1;
                queue.push_back(v);
            }
        }
    }
    Ok(dist
        .into_iter()
        .map(|d| (d != UNSEEN).then_some(d))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceSample {
    /// 1-based label.
    pub source: u64,
    /// 1-based label.
    pub target: u64,
    pub hops: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceSummary {
    pub samples: Vec<DistanceSample>,
    pub median: f64,
    pub mean: f64,
    pub max: u32,
    /// The hop bound the fraction below refers to.
    pub bound: u32,
    pub within_bound_fraction: f64,
}

/// Distances between `pairs` uniformly drawn pairs of distinct giant
/// component members. `bound` is the hop count the summary's fraction is
/// measured against (callers use `2 k* + 2`).
pub fn sample_distances(
    g: &MultiGraph,
    comps: &Components,
    pairs: usize,
    seed: u64,
    bound: u32,
) -> Result<DistanceSummary> {
    if pairs == 0 {
        return Err(Error::invalid("pairs", "need at least one pair"));
    }
    let giant = comps.giant_members();
    if giant.len() < 2 {
        return Err(Error::GiantTooSmall(giant.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen: Vec<(NodeId, NodeId)> = (0..pairs)
        .map(|_| {
            let a = rng.random_range(0..giant.len());
            let mut b = rng.random_range(0..giant.len() - 1);
            if b >= a {
                b += 1;
            }
            (giant[a], giant[b])
        })
        .collect();
    let n = g.node_count();
    let samples: Vec<DistanceSample> = chosen
        .into_par_iter()
        .map_init(
            || Bfs::new(n),
            |bfs, (s, t)| DistanceSample {
                source: s as u64 + 1,
                target: t as u64 + 1,
                hops: bfs
                    .distance(g, s, t)
                    .expect("members of one component are connected"),
            },
        )
        .collect();
    Ok(summarize(samples, bound))
}

fn summarize(samples: Vec<DistanceSample>, bound: u32) -> DistanceSummary {
    let mut hops: Vec<u32> = samples.iter().map(|s| s.hops).collect();
    hops.sort_unstable();
    let k = hops.len();
    let median = if k % 2 == 1 {
        hops[k / 2] as f64
    } else {
        (hops[k / 2 - 1] as f64 + hops[k / 2] as f64) / 2.0
    };
    DistanceSummary {
        median,
        mean: hops.iter().map(|&h| h as f64).sum::<f64>() / k as f64,
        max: *hops.last().expect("non-empty"),
        bound,
        within_bound_fraction: hops.iter().filter(|&&h| h <= bound).count() as f64 / k as f64,
        samples,
    }
}

fn fraction(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerUplink {
    pub j: usize,
    /// `|U_j \ U_{j−1}|`
    pub shell_size: usize,
    pub shell_linked: usize,
    pub shell_fraction: Option<f64>,
    pub layer_size: usize,
    /// Members of `U_j` with an edge to a different member of `U_{j−1}`.
    pub layer_linked: usize,
    pub layer_fraction: Option<f64>,
}

fn check_layers(g: &MultiGraph, layers: &LayerStructure) -> Result<()> {
    if g.node_count() as u64 != layers.n {
        return Err(Error::Domain(format!(
            "graph has {} nodes but layers were built for N = {}",
            g.node_count(),
            layers.n
        )));
    }
    Ok(())
}

/// Smallest neighbour rank other than the node itself.
fn min_other_neighbor(g: &MultiGraph) -> Vec<NodeId> {
    (0..g.node_count())
        .map(|r| {
            g.neighbors(r)
                .iter()
                .copied()
                .filter(|&v| v as usize != r)
                .min()
                .unwrap_or(UNSEEN)
        })
        .collect()
}

/// Per layer `j ≥ 1`, how many nodes of `U_j` (and of the new shell
/// `U_j \ U_{j−1}`) have an edge into `U_{j−1}`. Self-loops do not count.
pub fn layer_uplink_fractions(g: &MultiGraph, layers: &LayerStructure) -> Result<Vec<LayerUplink>> {
    check_layers(g, layers)?;
    let min_nb = min_other_neighbor(g);
    Ok((1..=layers.depth())
        .map(|j| {
            let upper = layers.cardinalities[j - 1] as usize;
            let size = layers.cardinalities[j] as usize;
            let linked = |r: &usize| (min_nb[*r] as usize) < upper;
            let layer_linked = (0..size).filter(linked).count();
            let shell = upper.min(size)..size;
            let shell_size = shell.len();
            let shell_linked = shell.filter(linked).count();
            LayerUplink {
                j,
                shell_size,
                shell_linked,
                shell_fraction: fraction(shell_linked, shell_size),
                layer_size: size,
                layer_linked,
                layer_fraction: fraction(layer_linked, size),
            }
        })
        .collect())
}

/// `U'_x`: members of `U_x` with a path to node 1 whose every hop moves
/// from a node to one of strictly smaller layer index, ending in `U_0`.
///
/// A node of smallest layer index `j` is good when `j = 0` or it has an
/// edge to a good member of `U_{j−1}`. Returned ranks are sorted.
pub fn core_ascending_set(
    g: &MultiGraph,
    layers: &LayerStructure,
    x: usize,
) -> Result<Vec<NodeId>> {
    check_layers(g, layers)?;
    if x > layers.depth() {
        return Err(Error::Domain(format!(
            "core depth {x} exceeds built depth {}",
            layers.depth()
        )));
    }
    let levels = layers.levels();
    let mut good = vec![false; g.node_count()];
    // levels are nondecreasing in rank, so rank order is level order
    for (r, level) in levels.iter().enumerate() {
        let Some(j) = *level else { break };
        if j > x {
            break;
        }
        good[r] = if j == 0 {
            true
        } else {
            let upper = layers.cardinalities[j - 1] as usize;
            g.neighbors(r)
                .iter()
                .any(|&v| (v as usize) < upper && v as usize != r && good[v as usize])
        };
    }
    let size = layers.cardinalities[x] as usize;
    Ok((0..size as NodeId).filter(|&r| good[r as usize]).collect())
}

/// `N_x`: the given set together with all its neighbours, sorted.
pub fn core_neighborhood(g: &MultiGraph, set: &[NodeId]) -> Result<Vec<NodeId>> {
    let mut mark = vec![false; g.node_count()];
    for &u in set {
        check_rank(g, u)?;
        mark[u as usize] = true;
        for &v in g.neighbors(u as usize) {
            mark[v as usize] = true;
        }
    }
    Ok(mark
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(r, _)| r as NodeId)
        .collect())
}

#[cfg(test)]
mod tests;
