//! Sampling the Poissonian multigraph and its plain-text file format.
//!
//! Node ranks inside [`MultiGraph`] are 0-based: rank `r` is the node with
//! label `r + 1`. The file format uses 1-based labels.

use std::io::{BufRead, Write};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Recorded in output metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha), one stream per row or edge block";

/// Above this node count the endpoint method is the default.
pub const PAIRWISE_MAX_N: u64 = 20_000;

const EDGE_BLOCK: usize = 1 << 16;
const TOTAL_STREAM: u64 = u64::MAX;
/// Means at or above this use the rejection sampler instead of inversion.
const INVERSION_MAX_MEAN: f64 = 30.0;

pub type NodeId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GenMethod {
    /// An independent Poisson count for every unordered pair, self-loops
    /// included.
    #[serde(rename = "pairwise")]
    Pairwise,
    /// `T ~ Poisson(L_N/2)` edges with endpoints drawn proportionally to
    /// capacity. Off-diagonal counts have the same law; self-loop means are
    /// halved.
    #[serde(rename = "endpoint-sampling")]
    EndpointSampling,
}

impl GenMethod {
    pub fn name(self) -> &'static str {
        match self {
            GenMethod::Pairwise => "pairwise",
            GenMethod::EndpointSampling => "endpoint-sampling",
        }
    }

    pub fn default_for(n: u64) -> Self {
        if n <= PAIRWISE_MAX_N {
            GenMethod::Pairwise
        } else {
            GenMethod::EndpointSampling
        }
    }
}

impl std::str::FromStr for GenMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pairwise" => Ok(GenMethod::Pairwise),
            "endpoint-sampling" | "endpoint" => Ok(GenMethod::EndpointSampling),
            other => Err(Error::invalid(
                "method",
                format!("unknown method `{other}`"),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub params: ModelParams,
    pub seed: u64,
    pub method: GenMethod,
}

impl GenSpec {
    pub fn new(params: ModelParams, seed: u64) -> Self {
        Self {
            params,
            seed,
            method: GenMethod::default_for(params.n()),
        }
    }

    pub fn with_method(mut self, method: GenMethod) -> Self {
        self.method = method;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Undirected multigraph with a flat edge list and a CSR adjacency index.
///
/// Edges are stored as `(u, v)` with `u ≤ v`, sorted. A self-loop appears
/// twice in its node's adjacency list, so adjacency lengths sum to
/// `2 · |edges|`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiGraph {
    n: usize,
    edges: Vec<(NodeId, NodeId)>,
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    pub seed: u64,
    pub method: Option<GenMethod>,
    pub tau: Option<f64>,
}

impl MultiGraph {
    /// Builds a graph from arbitrary 0-based edges.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<Self> {
        let mut list: Vec<(NodeId, NodeId)> = edges
            .into_iter()
            .map(|(u, v)| if u <= v { (u, v) } else { (v, u) })
            .collect();
        if let Some(&(_, v)) = list.iter().find(|&&(_, v)| v as usize >= n) {
            return Err(Error::IndexOutOfRange {
                index: v as u64 + 1,
                n: n as u64,
            });
        }
        list.sort_unstable();
        Ok(Self::from_sorted(n, list))
    }

    fn from_sorted(n: usize, edges: Vec<(NodeId, NodeId)>) -> Self {
        let mut degree = vec![0usize; n + 1];
        for &(u, v) in &edges {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0;
        offsets.push(0);
        for d in &degree[..n] {
            acc += d;
            offsets.push(acc);
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0; acc];
        for &(u, v) in &edges {
            targets[fill[u as usize]] = v;
            fill[u as usize] += 1;
            targets[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        Self {
            n,
            edges,
            offsets,
            targets,
            seed: 0,
            method: None,
            tau: None,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    /// Adjacency list of a rank, with multiplicity. Self-loops appear twice.
    pub fn neighbors(&self, rank: usize) -> &[NodeId] {
        &self.targets[self.offsets[rank]..self.offsets[rank + 1]]
    }

    /// Adjacency degree, self-loops counted twice.
    pub fn degree(&self, rank: usize) -> usize {
        self.offsets[rank + 1] - self.offsets[rank]
    }

    /// `Σ_j E_{i,j}`: incident edges with self-loops counted once. This is
    /// the quantity whose mean is `λ_i`.
    pub fn incident_edges(&self, rank: usize) -> usize {
        let loops = self
            .neighbors(rank)
            .iter()
            .filter(|&&v| v as usize == rank)
            .count()
            / 2;
        self.degree(rank) - loops
    }

    /// `E_{u,v}` for 0-based ranks.
    pub fn multiplicity(&self, u: NodeId, v: NodeId) -> usize {
        let key = if u <= v { (u, v) } else { (v, u) };
        let lo = self.edges.partition_point(|e| *e < key);
        let hi = self.edges.partition_point(|e| *e <= key);
        hi - lo
    }

    pub fn self_loop_count(&self) -> usize {
        self.edges.iter().filter(|(u, v)| u == v).count()
    }
}

fn row_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Poisson variate; inversion for small means, `rand_distr` otherwise.
fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean >= INVERSION_MAX_MEAN {
        return Poisson::new(mean)
            .expect("finite positive mean")
            .sample(rng) as u64;
    }
    let u: f64 = rng.random();
    let mut p = (-mean).exp();
    let mut cdf = p;
    let mut k = 0u64;
    while u >= cdf {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
        if p == 0.0 {
            break;
        }
    }
    k
}

/// Samples a graph. Output depends only on `(params, seed, method)`.
pub fn sample_graph(spec: &GenSpec) -> MultiGraph {
    let params = &spec.params;
    let caps = params.capacities();
    let total: f64 = caps.iter().rev().sum();
    let edges = match spec.method {
        GenMethod::Pairwise => sample_pairwise(&caps, total, spec.seed),
        GenMethod::EndpointSampling => sample_endpoints(&caps, total, spec.seed),
    };
    let mut g = MultiGraph::from_sorted(caps.len(), edges);
    g.seed = spec.seed;
    g.method = Some(spec.method);
    g.tau = Some(params.tau());
    g
}

fn sample_pairwise(caps: &[f64], total: f64, seed: u64) -> Vec<(NodeId, NodeId)> {
    let rows: Vec<Vec<(NodeId, NodeId)>> = (0..caps.len())
        .into_par_iter()
        .map(|i| {
            let mut rng = row_rng(seed, i as u64);
            let scale = caps[i] / total;
            let mut row = Vec::new();
            for (j, &cj) in caps.iter().enumerate().skip(i) {
                let k = poisson(&mut rng, scale * cj);
                for _ in 0..k {
                    row.push((i as NodeId, j as NodeId));
                }
            }
            row
        })
        .collect();
    rows.concat()
}

fn sample_endpoints(caps: &[f64], total: f64, seed: u64) -> Vec<(NodeId, NodeId)> {
    let count = poisson(&mut row_rng(seed, TOTAL_STREAM), total / 2.0) as usize;
    let picker = WeightedIndex::new(caps).expect("positive capacities");
    let blocks = count.div_ceil(EDGE_BLOCK);
    let mut edges: Vec<(NodeId, NodeId)> = (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = row_rng(seed, TOTAL_STREAM - 1 - b as u64);
            let len = EDGE_BLOCK.min(count - b * EDGE_BLOCK);
            let picker = &picker;
            (0..len)
                .map(move |_| {
                    let u = picker.sample(&mut rng) as NodeId;
                    let v = picker.sample(&mut rng) as NodeId;
                    if u <= v {
                        (u, v)
                    } else {
                        (v, u)
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    edges.par_sort_unstable();
    edges
}

/// Mean and spread of `Σ_j E_{i,j}` for one node over independent samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub mean: f64,
    pub stderr: f64,
    pub variance: f64,
    pub trials: usize,
}

/// Samples `trials` graphs with seeds `spec.seed, spec.seed + 1, ...` and
/// summarizes the incident-edge count of the 1-based `label`.
pub fn empirical_degree_check(spec: &GenSpec, label: u64, trials: usize) -> Result<DegreeStats> {
    spec.params.capacity(label)?;
    if trials < 2 {
        return Err(Error::invalid("trials", "need at least 2 trials"));
    }
    let rank = (label - 1) as usize;
    let samples: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let g = sample_graph(&spec.with_seed(spec.seed.wrapping_add(t)));
            g.incident_edges(rank) as f64
        })
        .collect();
    let (mean, variance) = mean_var(&samples);
    Ok(DegreeStats {
        mean,
        stderr: (variance / trials as f64).sqrt(),
        variance,
        trials,
    })
}

/// Mean and unbiased sample variance.
pub(crate) fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Writes the header line and one `u v` line per edge (1-based, `u ≤ v`).
pub fn write_graph<W: Write>(g: &MultiGraph, mut out: W) -> Result<()> {
    let method = g.method.map_or("unknown", GenMethod::name);
    let tau = g.tau.map_or_else(|| "nan".to_owned(), |t| t.to_string());
    writeln!(
        out,
        "N {} SEED {} METHOD {} TAU {}",
        g.n, g.seed, method, tau
    )?;
    for &(u, v) in &g.edges {
        writeln!(out, "{} {}", u + 1, v + 1)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_graph<R: BufRead>(input: R) -> Result<MultiGraph> {
    let mut lines = input.lines();
    let header = lines.next().ok_or(Error::Parse {
        line: 1,
        reason: "empty file".into(),
    })??;
    let bad_header = |reason: &str| Error::Parse {
        line: 1,
        reason: format!("{reason} in header `{header}`"),
    };
    let fields: Vec<&str> = header.split_ascii_whitespace().collect();
    if fields.len() != 8
        || fields[0] != "N"
        || fields[2] != "SEED"
        || fields[4] != "METHOD"
        || fields[6] != "TAU"
    {
        return Err(bad_header(
            "expected `N <n> SEED <seed> METHOD <name> TAU <tau>`",
        ));
    }
    let n: usize = fields[1]
        .parse()
        .map_err(|_| bad_header("bad node count"))?;
    let seed: u64 = fields[3].parse().map_err(|_| bad_header("bad seed"))?;
    let method = match fields[5] {
        "unknown" => None,
        m => Some(
            m.parse::<GenMethod>()
                .map_err(|_| bad_header("bad method"))?,
        ),
    };
    let tau: f64 = fields[7].parse().map_err(|_| bad_header("bad tau"))?;

    let mut edges = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        let lineno = k + 2;
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_ascii_whitespace();
        let mut label = || -> Result<NodeId> {
            let tok = it.next().ok_or(Error::Parse {
                line: lineno,
                reason: "expected two labels".into(),
            })?;
            let v: u64 = tok.parse().map_err(|_| Error::Parse {
                line: lineno,
                reason: format!("bad label `{tok}`"),
            })?;
            if v == 0 || v as usize > n {
                return Err(Error::Parse {
                    line: lineno,
                    reason: format!("label {v} outside 1..={n}"),
                });
            }
            Ok((v - 1) as NodeId)
        };
        let u = label()?;
        let v = label()?;
        if u > v {
            return Err(Error::Parse {
                line: lineno,
                reason: "edge not in `u <= v` order".into(),
            });
        }
        edges.push((u, v));
    }
    let mut g = MultiGraph::from_edges(n, edges)?;
    g.seed = seed;
    g.method = method;
    g.tau = if tau.is_nan() { None } else { Some(tau) };
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(n: u64, alpha: f64, seed: u64, method: GenMethod) -> GenSpec {
        GenSpec::new(ModelParams::from_alpha(n, alpha, 1.0).unwrap(), seed).with_method(method)
    }

    #[test]
    fn single_node_self_loop_mean_is_one() {
        let s = spec(1, 0.6, 0, GenMethod::Pairwise);
        let trials = 20_000u64;
        let counts: Vec<f64> = (0..trials)
            .map(|t| sample_graph(&s.with_seed(t)).edge_count() as f64)
            .collect();
        let (mean, var) = mean_var(&counts);
        let se = (var / trials as f64).sqrt();
        assert!((mean - 1.0).abs() < 4.0 * se, "mean {mean} se {se}");
        assert!(sample_graph(&s)
            .edges()
            .iter()
            .all(|&(u, v)| u == 0 && v == 0));
    }

    #[test]
    fn deterministic_per_seed() {
        for method in [GenMethod::Pairwise, GenMethod::EndpointSampling] {
            let s = spec(500, 0.6, 42, method);
            assert_eq!(sample_graph(&s).edges(), sample_graph(&s).edges());
            assert_ne!(
                sample_graph(&s).edges(),
                sample_graph(&s.with_seed(43)).edges()
            );
        }
    }

    #[test]
    fn independent_of_thread_count() {
        let s = spec(3000, 2.0 / 3.0, 9, GenMethod::Pairwise);
        let e = spec(3000, 2.0 / 3.0, 9, GenMethod::EndpointSampling);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let (a, b) = pool.install(|| (sample_graph(&s), sample_graph(&e)));
        assert_eq!(a.edges(), sample_graph(&s).edges());
        assert_eq!(b.edges(), sample_graph(&e).edges());
    }

    #[test]
    fn default_method_switches_at_threshold() {
        assert_eq!(GenMethod::default_for(20_000), GenMethod::Pairwise);
        assert_eq!(GenMethod::default_for(20_001), GenMethod::EndpointSampling);
    }

    #[test]
    fn degree_stats() {
        let s = spec(100, 2.0 / 3.0, 1000, GenMethod::Pairwise);
        let lam1 = s.params.capacity(1).unwrap();
        let d = empirical_degree_check(&s, 1, 10_000).unwrap();
        assert!((d.mean - lam1).abs() <= 4.0 * d.stderr, "{d:?} vs {lam1}");
        let ratio = d.variance / d.mean;
        assert!((0.8..=1.2).contains(&ratio), "{ratio}");
        let d = empirical_degree_check(&s, 100, 10_000).unwrap();
        assert!((d.mean - 1.0).abs() <= 4.0 * d.stderr);
        assert!(empirical_degree_check(&s, 101, 100).is_err());
    }

    #[test]
    fn expected_total_edges() {
        let p = ModelParams::from_alpha(200, 0.7, 1.0).unwrap();
        let l = p.total_capacity();
        let sq: f64 = p.capacities().iter().map(|c| c * c).sum();
        let expect = (l + sq / l) / 2.0;
        let s = GenSpec::new(p, 5).with_method(GenMethod::Pairwise);
        let trials = 2000u64;
        let counts: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|t| sample_graph(&s.with_seed(t)).edge_count() as f64)
            .collect();
        let (mean, var) = mean_var(&counts);
        let se = (var / trials as f64).sqrt();
        assert!(
            (mean - expect).abs() < 4.0 * se,
            "{mean} vs {expect} (se {se})"
        );
    }

    #[test]
    fn graph_file_format() {
        let g = sample_graph(&spec(1000, 0.6, 7, GenMethod::Pairwise));
        let mut buf = Vec::new();
        write_graph(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(first, "N 1000 SEED 7 METHOD pairwise TAU 2.666666666666667");
        assert!(!text.contains('\r'));
        for line in text.lines().skip(1) {
            let (u, v) = line.split_once(' ').unwrap();
            let (u, v): (u64, u64) = (u.parse().unwrap(), v.parse().unwrap());
            assert!(1 <= u && u <= v && v <= 1000);
        }
        let back = read_graph(buf.as_slice()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn read_rejects_malformed() {
        assert!(read_graph("".as_bytes()).is_err());
        assert!(read_graph("N 3 SEED 1 METHOD pairwise".as_bytes()).is_err());
        assert!(read_graph("N 3 SEED 1 METHOD pairwise TAU 2.5\n1 4\n".as_bytes()).is_err());
        assert!(read_graph("N 3 SEED 1 METHOD pairwise TAU 2.5\n2 1\n".as_bytes()).is_err());
        assert!(read_graph("N 3 SEED 1 METHOD pairwise TAU 2.5\n1\n".as_bytes()).is_err());
        let g = read_graph("N 3 SEED 1 METHOD bogus TAU 2.5\n".as_bytes());
        assert!(matches!(g, Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn from_edges_validates() {
        assert!(MultiGraph::from_edges(2, [(0, 2)]).is_err());
        let g = MultiGraph::from_edges(3, [(2, 0), (1, 1), (0, 2)]).unwrap();
        assert_eq!(g.edges(), &[(0, 2), (0, 2), (1, 1)]);
        assert_eq!(g.degree(1), 2);
        assert_eq!(g.incident_edges(1), 1);
        assert_eq!(g.multiplicity(2, 0), 2);
        assert_eq!(g.self_loop_count(), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn adjacency_consistent(
            n in 1u64..400,
            alpha in 0.5f64..0.95,
            seed in any::<u64>(),
            endpoint in any::<bool>(),
        ) {
            let method = if endpoint { GenMethod::EndpointSampling } else { GenMethod::Pairwise };
            let g = sample_graph(&spec(n, alpha, seed, method));
            let deg_sum: usize = (0..g.node_count()).map(|r| g.degree(r)).sum();
            prop_assert_eq!(deg_sum, 2 * g.edge_count());
            prop_assert!(g.edges().iter().all(|&(u, v)| u <= v && (v as u64) < n));
            prop_assert!(g.edges().windows(2).all(|w| w[0] <= w[1]));
            let mut buf = Vec::new();
            write_graph(&g, &mut buf).unwrap();
            prop_assert_eq!(read_graph(buf.as_slice()).unwrap(), g);
        }
    }
}
