//! Seeded Monte-Carlo runs that set graph measurements next to the
//! analytical bounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{expected_core_counts, p_layer_bounds, s_objective, BoundConfig};
use crate::error::{Error, Result};
use crate::graphgen::{mean_var, sample_graph, GenMethod, GenSpec, RNG_ALGORITHM};
use crate::graphops::{
    components, core_ascending_set, core_neighborhood, layer_uplink_fractions, sample_distances,
    DistanceSample, LayerUplink,
};
use crate::layers::{build_layers, k_star, LayerStructure};
use crate::model::ModelParams;

/// Number of standard errors a mean may fall below its bound.
pub const STDERR_SLACK: f64 = 3.0;

/// Extra hops allowed on top of `2 k*`.
pub const DISTANCE_SLACK: u32 = 2;

const DISTANCE_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: ModelParams,
    /// Defaults to [`GenMethod::default_for`].
    pub method: Option<GenMethod>,
    /// Core depth `x` for `U'_x` and `N_x`.
    pub x: usize,
    /// Sampled giant-component pairs; 0 skips distances.
    pub pairs: usize,
    pub bounds: BoundConfig,
}

impl SimConfig {
    pub fn new(params: ModelParams, x: usize) -> Self {
        Self {
            params,
            method: None,
            x,
            pairs: 1000,
            bounds: BoundConfig::default(),
        }
    }

    pub fn method(&self) -> GenMethod {
        self.method
            .unwrap_or_else(|| GenMethod::default_for(self.params.n()))
    }

    pub fn layers(&self) -> Result<LayerStructure> {
        if self.x == 0 {
            return Err(Error::invalid("x", "core depth must be at least 1"));
        }
        let depth = k_star(&self.params).unwrap_or(0).max(self.x);
        build_layers(&self.params, Some(depth))
    }

    /// `2 k* + 2`, or `None` when `k*` is undefined.
    pub fn distance_bound(&self) -> Option<u32> {
        k_star(&self.params)
            .ok()
            .map(|k| 2 * k as u32 + DISTANCE_SLACK)
    }
}

/// Measurements on one sampled graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub seed: u64,
    pub n: u64,
    pub tau: f64,
    pub l_value: f64,
    pub method: GenMethod,
    pub rng: String,
    pub edge_count: usize,
    pub k_star: Option<usize>,
    pub x: usize,
    pub component_count: usize,
    pub giant_size: usize,
    pub giant_fraction: f64,
    pub distance_samples: Vec<DistanceSample>,
    pub distance_median: Option<f64>,
    pub distance_mean: Option<f64>,
    pub distance_max: Option<u32>,
    pub distance_bound: Option<u32>,
    pub within_2kstar_fraction: Option<f64>,
    pub layer_uplink: Vec<LayerUplink>,
    /// `|U_x|`
    pub layer_x_size: u64,
    pub u_prime_size: usize,
    pub u_prime_volume: f64,
    pub n_x_size: usize,
    pub n_x_fraction: f64,
}

pub fn run_seed(cfg: &SimConfig, seed: u64) -> Result<SimReport> {
    let layers = cfg.layers()?;
    run_seed_with_layers(cfg, &layers, seed)
}

fn run_seed_with_layers(cfg: &SimConfig, layers: &LayerStructure, seed: u64) -> Result<SimReport> {
    let p = &cfg.params;
    let method = cfg.method();
    let g = sample_graph(&GenSpec::new(*p, seed).with_method(method));
    let comps = components(&g);
    let bound = cfg.distance_bound();

    let distances = if cfg.pairs > 0 && comps.giant_size() >= 2 {
        Some(sample_distances(
            &g,
            &comps,
            cfg.pairs,
            seed ^ DISTANCE_SALT,
            bound.unwrap_or(u32::MAX),
        )?)
    } else {
        None
    };

    let layer_uplink = layer_uplink_fractions(&g, layers)?;
    let u_prime = core_ascending_set(&g, layers, cfg.x)?;
    let caps_volume: f64 = u_prime
        .iter()
        .map(|&r| p.capacity(r as u64 + 1))
        .sum::<Result<f64>>()?;
    let n_x = core_neighborhood(&g, &u_prime)?;
    let n = p.n();

    Ok(SimReport {
        seed,
        n,
        tau: p.tau(),
        l_value: p.l_value(),
        method,
        rng: RNG_ALGORITHM.to_owned(),
        edge_count: g.edge_count(),
        k_star: layers.k_star,
        x: cfg.x,
        component_count: comps.count(),
        giant_size: comps.giant_size(),
        giant_fraction: comps.giant_size() as f64 / n as f64,
        distance_median: distances.as_ref().map(|d| d.median),
        distance_mean: distances.as_ref().map(|d| d.mean),
        distance_max: distances.as_ref().map(|d| d.max),
        distance_bound: bound,
        within_2kstar_fraction: distances
            .as_ref()
            .filter(|_| bound.is_some())
            .map(|d| d.within_bound_fraction),
        distance_samples: distances.map(|d| d.samples).unwrap_or_default(),
        layer_uplink,
        layer_x_size: layers.cardinalities[cfg.x],
        u_prime_size: u_prime.len(),
        u_prime_volume: caps_volume,
        n_x_size: n_x.len(),
        n_x_fraction: n_x.len() as f64 / n as f64,
    })
}

/// Runs every seed (concurrently) and returns reports sorted by seed.
pub fn sweep(cfg: &SimConfig, seeds: &[u64]) -> Result<Vec<SimReport>> {
    let layers = cfg.layers()?;
    let mut reports = seeds
        .par_iter()
        .map(|&s| run_seed_with_layers(cfg, &layers, s))
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by_key(|r| r.seed);
    Ok(reports)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStderr {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl MeanStderr {
    pub fn of(xs: &[f64]) -> Self {
        let (mean, var) = mean_var(xs);
        Self {
            mean,
            stderr: (var / xs.len() as f64).sqrt(),
            samples: xs.len(),
        }
    }

    /// `mean ≥ bound − STDERR_SLACK · stderr`
    pub fn dominates(&self, bound: f64) -> bool {
        self.mean >= bound - STDERR_SLACK * self.stderr
    }
}

/// One line of the cross-seed summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub metric: String,
    pub layer: Option<usize>,
    pub mean: f64,
    pub stderr: f64,
    pub bound: Option<f64>,
    /// `Some` when the row is checked: lower bounds must be met within
    /// [`STDERR_SLACK`] standard errors, distance medians must stay at or
    /// below the bound.
    pub passed: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub config: SimConfig,
    pub seeds: Vec<u64>,
    pub rows: Vec<AggregateRow>,
}

impl Aggregate {
    pub fn from_reports(cfg: &SimConfig, reports: &[SimReport]) -> Result<Self> {
        if reports.is_empty() {
            return Err(Error::invalid("seeds", "need at least one report"));
        }
        let p = &cfg.params;
        let layers = cfg.layers()?;
        let p_layer = p_layer_bounds(p, &cfg.bounds, &layers)?;
        let counts = expected_core_counts(p, &cfg.bounds, cfg.x, &layers)?;
        let n = p.n() as f64;
        let mut rows = Vec::new();
        let col = |f: &dyn Fn(&SimReport) -> f64| -> MeanStderr {
            MeanStderr::of(&reports.iter().map(f).collect::<Vec<_>>())
        };
        let checked = |metric: &str, layer, stat: MeanStderr, bound: f64| AggregateRow {
            metric: metric.to_owned(),
            layer,
            mean: stat.mean,
            stderr: stat.stderr,
            bound: Some(bound),
            passed: Some(stat.dominates(bound)),
        };
        let plain = |metric: &str, stat: MeanStderr| AggregateRow {
            metric: metric.to_owned(),
            layer: None,
            mean: stat.mean,
            stderr: stat.stderr,
            bound: None,
            passed: None,
        };

        rows.push(plain("giant_fraction", col(&|r| r.giant_fraction)));

        let check_depth = layers.k_star.unwrap_or(layers.depth());
        for b in &p_layer {
            let vals: Vec<f64> = reports
                .iter()
                .filter_map(|r| r.layer_uplink[b.j - 1].shell_fraction)
                .collect();
            if vals.is_empty() {
                continue;
            }
            let stat = MeanStderr::of(&vals);
            let mut row = checked("uplink_shell_fraction", Some(b.j), stat, b.value);
            if b.j > check_depth {
                row.passed = None;
            }
            rows.push(row);
        }

        rows.push(checked(
            "u_prime_size",
            Some(cfg.x),
            col(&|r| r.u_prime_size as f64),
            counts.u_prime,
        ));
        rows.push(checked(
            "u_prime_volume",
            Some(cfg.x),
            col(&|r| r.u_prime_volume),
            counts.volume,
        ));
        rows.push(checked(
            "n_x_size",
            Some(cfg.x),
            col(&|r| r.n_x_size as f64),
            counts.neighborhood,
        ));
        rows.push(checked(
            "n_x_fraction",
            Some(cfg.x),
            col(&|r| r.n_x_fraction),
            counts.neighborhood / n,
        ));
        let s_density = s_objective(p.n(), p.tau(), cfg.x, p.l_value())? / n;
        rows.push(AggregateRow {
            metric: "s_density".to_owned(),
            layer: Some(cfg.x),
            mean: s_density,
            stderr: 0.0,
            bound: None,
            passed: None,
        });

        let medians: Vec<f64> = reports.iter().filter_map(|r| r.distance_median).collect();
        if !medians.is_empty() {
            let stat = MeanStderr::of(&medians);
            let worst = medians.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let bound = cfg.distance_bound();
            rows.push(AggregateRow {
                metric: "distance_median".to_owned(),
                layer: None,
                mean: stat.mean,
                stderr: stat.stderr,
                bound: bound.map(f64::from),
                passed: bound.map(|b| worst <= b as f64),
            });
            let within: Vec<f64> = reports
                .iter()
                .filter_map(|r| r.within_2kstar_fraction)
                .collect();
            if !within.is_empty() {
                rows.push(plain("within_2kstar_fraction", MeanStderr::of(&within)));
            }
        }

        Ok(Self {
            config: *cfg,
            seeds: reports.iter().map(|r| r.seed).collect(),
            rows,
        })
    }

    pub fn row(&self, metric: &str, layer: Option<usize>) -> Option<&AggregateRow> {
        self.rows
            .iter()
            .find(|r| r.metric == metric && (layer.is_none() || r.layer == layer))
    }

    pub fn failures(&self) -> Vec<&AggregateRow> {
        self.rows
            .iter()
            .filter(|r| r.passed == Some(false))
            .collect()
    }

    pub fn all_passed(&self) -> bool {
        self.failures().is_empty()
    }
}
