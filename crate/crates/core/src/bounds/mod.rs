//! Analytical lower bounds on the core hierarchy and the simplified
//! objective `s(x, l)`.
//!
//! With `m = exp((3−τ) l)`,
//!
//! ```text
//! s(x, l) = N^{1 − (τ−2)^{x+1}/(τ−1)} · (1 − e^{−m})^x · m^{−(τ−2)/(3−τ)}
//! ```
//!
//! is a lower-bound estimate of the expected number of nodes that are in, or
//! adjacent to, a layer-`x` node with a layer-ascending path to node 1.
//! [`optimize`] maximizes it over integer `x` and real `l`.

mod golden;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layers::{build_layers, k_star_real, k_star_value, LayerStructure};
use crate::model::ModelParams;

use golden::golden_section_max;

/// Largest `y` with `1 − e^{−y} ≥ y/2`.
pub const HALF_LINEAR_LIMIT: f64 = 1.593_624_260_040_04;

/// Refinement tolerance in `l`.
pub const L_TOLERANCE: f64 = 1e-6;

fn check_tau(tau: f64) -> Result<()> {
    if tau > 2.0 && tau < 3.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("bounds need 2 < tau < 3, got {tau}")))
    }
}

/// The ratio `c_{j−1}/c` (and `c_x`) collapsed into one constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundConfig {
    pub c_ratio: f64,
}

impl BoundConfig {
    pub fn new(c_ratio: f64) -> Result<Self> {
        if c_ratio.is_finite() && c_ratio > 0.0 {
            Ok(Self { c_ratio })
        } else {
            Err(Error::invalid(
                "c_ratio",
                format!("need c_ratio > 0, got {c_ratio}"),
            ))
        }
    }
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self { c_ratio: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerLinkBound {
    pub j: usize,
    /// `1 − exp(−N^{β_j} V(U_{j−1}) / L_N)` with exact volumes.
    pub value: f64,
    /// `1 − exp(−c_ratio · e^l)`.
    pub simplified: f64,
    /// `U_{j−1}` was empty, so `value = 0`.
    pub empty_upper: bool,
}

/// Lower bound on the probability that a node of `U_j` links into `U_{j−1}`.
pub fn p_layer_bound(
    params: &ModelParams,
    cfg: &BoundConfig,
    j: usize,
    layers: &LayerStructure,
) -> Result<LayerLinkBound> {
    if j == 0 || j > layers.depth() {
        return Err(Error::Domain(format!(
            "layer index {j} outside 1..={}",
            layers.depth()
        )));
    }
    let upper = layers.volumes[j - 1];
    let empty_upper = layers.cardinalities[j - 1] == 0;
    let rate = layers.thresholds[j] * upper / layers.total_capacity;
    Ok(LayerLinkBound {
        j,
        value: if empty_upper { 0.0 } else { -(-rate).exp_m1() },
        simplified: -(-cfg.c_ratio * params.l_value().exp()).exp_m1(),
        empty_upper,
    })
}

pub fn p_layer_bounds(
    params: &ModelParams,
    cfg: &BoundConfig,
    layers: &LayerStructure,
) -> Result<Vec<LayerLinkBound>> {
    (1..=layers.depth())
        .map(|j| p_layer_bound(params, cfg, j, layers))
        .collect()
}

/// `p_0 = 1 − exp(−c_x e^{(3−τ) l})`.
pub fn p_zero(params: &ModelParams, cfg: &BoundConfig) -> f64 {
    let rate = cfg.c_ratio * ((3.0 - params.tau()) * params.l_value()).exp();
    -(-rate).exp_m1()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoreCountBounds {
    pub x: usize,
    pub p0: f64,
    /// `p_0^x |U_x|`, bound on `E|U'_x|`.
    pub u_prime: f64,
    /// `N^{β_x} p_0^x |U_x|`, bound on `E V(U'_x)`.
    pub volume: f64,
    /// `N^{β_x} N p_0^x |U_x| / (2 L_N)`, bound on `E|N_x|`.
    pub neighborhood: f64,
    /// `volume / L_N`.
    pub link_rate: f64,
    /// Whether `1 − e^{−V/L_N} ≥ V/(2 L_N)` holds at `link_rate`.
    pub half_linear_holds: bool,
}

pub fn expected_core_counts(
    params: &ModelParams,
    cfg: &BoundConfig,
    x: usize,
    layers: &LayerStructure,
) -> Result<CoreCountBounds> {
    if x == 0 || x > layers.depth() {
        return Err(Error::Domain(format!(
            "core depth {x} outside 1..={}",
            layers.depth()
        )));
    }
    let p0 = p_zero(params, cfg);
    let reach = p0.powi(x as i32);
    let card = layers.cardinalities[x] as f64;
    let u_prime = reach * card;
    let volume = layers.thresholds[x] * u_prime;
    let link_rate = volume / layers.total_capacity;
    Ok(CoreCountBounds {
        x,
        p0,
        u_prime,
        volume,
        neighborhood: params.n() as f64 * link_rate / 2.0,
        link_rate,
        half_linear_holds: link_rate <= HALF_LINEAR_LIMIT,
    })
}

/// `ln s(x, l)` for real `x`, computed in log space.
pub fn ln_s(n: u64, tau: f64, x: f64, l: f64) -> f64 {
    let m = ((3.0 - tau) * l).exp();
    let ln_n = (n as f64).ln();
    // ln(1 − e^{−m}) without cancellation
    let ln_reach = (-(-m).exp_m1()).ln();
    (1.0 - (tau - 2.0).powf(x + 1.0) / (tau - 1.0)) * ln_n + x * ln_reach - (tau - 2.0) * l
}

/// `s(x, l)`.
pub fn s_objective(n: u64, tau: f64, x: usize, l: f64) -> Result<f64> {
    check_tau(tau)?;
    if n == 0 {
        return Err(Error::invalid("n", "node count must be at least 1"));
    }
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::invalid("l", format!("need l > 0, got {l}")));
    }
    Ok(ln_s(n, tau, x as f64, l).exp())
}

/// Stationary point of `s` in `x` at fixed `m`: the root of
/// `∂ ln s / ∂x = (τ−2)^{x+1} a ln N / (τ−1) + ln(1 − e^{−m})` with
/// `a = −ln(τ−2)`, i.e.
///
/// ```text
/// x = ln ln N / a − ln((τ−1) q / a) / a − 1,   q = ln(1 / (1 − e^{−m}))
/// ```
///
/// The leading term is the pre-ceiling value of `k*`.
pub fn stationary_x(n: u64, tau: f64, m: f64) -> Result<f64> {
    check_tau(tau)?;
    if m.is_nan() || m <= 0.0 {
        return Err(Error::Domain(format!("need m > 0, got {m}")));
    }
    let lead = k_star_real(n, tau)?;
    let a = -(tau - 2.0).ln();
    let q = -(-(-m).exp()).ln_1p();
    let arg = (tau - 1.0) * q / a;
    if !(arg > 0.0 && arg.is_finite()) {
        return Err(Error::NoStationaryPoint(format!(
            "log argument {arg} at m = {m} is not positive"
        )));
    }
    Ok(lead - arg.ln() / a - 1.0)
}

/// `exp(−(τ−2) l)`, the large-`N` density of core neighbours.
pub fn asymptotic_density(tau: f64, l: f64) -> f64 {
    (-(tau - 2.0) * l).exp()
}

/// Search space of [`optimize`]: `x ∈ 1..=x_max`, `l` on a log-spaced grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Defaults to `3 k*(N)`.
    pub x_max: Option<usize>,
    pub l_min: f64,
    pub l_max: f64,
    pub l_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_max: None,
            l_min: 0.1,
            l_max: 10.0,
            l_points: 200,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.l_min > 0.0 && self.l_min.is_finite() && self.l_max.is_finite()) {
            return Err(Error::invalid(
                "grid-l",
                "l bounds must be finite with l_min > 0",
            ));
        }
        if self.l_max < self.l_min {
            return Err(Error::invalid("grid-l", "l_max must not be below l_min"));
        }
        if self.l_points == 0 {
            return Err(Error::invalid("grid-l", "need at least one l point"));
        }
        if self.l_points == 1 && self.l_max != self.l_min {
            return Err(Error::invalid(
                "grid-l",
                "a one-point grid needs l_min = l_max",
            ));
        }
        if self.x_max == Some(0) {
            return Err(Error::invalid("x", "x_max must be at least 1"));
        }
        Ok(())
    }

    pub fn l_values(&self) -> Vec<f64> {
        if self.l_points == 1 {
            return vec![self.l_min];
        }
        let (lo, hi) = (self.l_min.ln(), self.l_max.ln());
        let step = (hi - lo) / (self.l_points - 1) as f64;
        (0..self.l_points)
            .map(|k| {
                if k == 0 {
                    self.l_min
                } else if k + 1 == self.l_points {
                    self.l_max
                } else {
                    (lo + step * k as f64).exp()
                }
            })
            .collect()
    }

    pub fn resolve_x_max(&self, n: u64, tau: f64) -> usize {
        self.x_max
            .unwrap_or_else(|| 3 * k_star_value(n, tau).unwrap_or(1).max(1))
    }
}

impl std::str::FromStr for GridSpec {
    type Err = Error;

    /// Parses `min:max:points`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::invalid("grid-l", format!("expected min:max:points, got `{s}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let grid = GridSpec {
            x_max: None,
            l_min: parts[0].trim().parse().map_err(|_| bad())?,
            l_max: parts[1].trim().parse().map_err(|_| bad())?,
            l_points: parts[2].trim().parse().map_err(|_| bad())?,
        };
        grid.validate()?;
        Ok(grid)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub x: usize,
    pub l: f64,
    pub s: f64,
}

/// `s(x, l)` on every grid point, ordered by `(x, l)`.
pub fn s_surface(n: u64, tau: f64, grid: &GridSpec) -> Result<Vec<SurfacePoint>> {
    check_tau(tau)?;
    grid.validate()?;
    let ls = grid.l_values();
    let x_max = grid.resolve_x_max(n, tau);
    let points: Vec<(usize, f64)> = (1..=x_max)
        .flat_map(|x| ls.iter().map(move |&l| (x, l)))
        .collect();
    Ok(points
        .into_par_iter()
        .map(|(x, l)| SurfacePoint {
            x,
            l,
            s: ln_s(n, tau, x as f64, l).exp(),
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub x_star: usize,
    /// Refined by golden-section search around the best grid point.
    pub l_star: f64,
    pub s_value: f64,
    /// Best grid point before refinement.
    pub grid_x_star: usize,
    pub grid_l_star: f64,
    pub grid_s_max: f64,
    /// [`stationary_x`] at `m(l*)`, when it exists.
    pub stationary_x_real: Option<f64>,
    /// `⌊stationary_x⌋ ≤ x* ≤ ⌈stationary_x⌉`.
    pub x_consistent: bool,
    /// Best `l` for `x*` sits at an end of the `l` grid.
    pub l_on_boundary: bool,
    /// `x* = x_max` with `x_max > 1`.
    pub x_on_boundary: bool,
}

impl Optimum {
    pub fn on_boundary(&self) -> bool {
        self.l_on_boundary || self.x_on_boundary
    }
}

/// Grid search over `(x, l)` followed by golden-section refinement in `l`
/// for every `x`; the best refined pair wins. Ties go to the smaller `x`,
/// then the smaller `l`.
pub fn optimize(n: u64, tau: f64, grid: &GridSpec) -> Result<Optimum> {
    let surface = s_surface(n, tau, grid)?;
    optimize_surface(n, tau, grid, &surface)
}

pub fn optimize_surface(
    n: u64,
    tau: f64,
    grid: &GridSpec,
    surface: &[SurfacePoint],
) -> Result<Optimum> {
    let ls = grid.l_values();
    let x_max = grid.resolve_x_max(n, tau);
    let per_x = ls.len();
    debug_assert_eq!(surface.len(), x_max * per_x);

    let mut grid_best = surface[0];
    for p in surface {
        if p.s > grid_best.s {
            grid_best = *p;
        }
    }

    struct Refined {
        x: usize,
        l: f64,
        ln_s: f64,
        grid_index: usize,
    }

    let refined: Vec<Refined> = (1..=x_max)
        .into_par_iter()
        .map(|x| {
            let row = &surface[(x - 1) * per_x..x * per_x];
            let mut best = 0;
            for (k, p) in row.iter().enumerate() {
                if p.s > row[best].s {
                    best = k;
                }
            }
            let (l, v) = if per_x == 1 {
                (ls[0], ln_s(n, tau, x as f64, ls[0]))
            } else {
                let lo = ls[best.saturating_sub(1)];
                let hi = ls[(best + 1).min(per_x - 1)];
                let (l, v) = golden_section_max(|l| ln_s(n, tau, x as f64, l), lo, hi, L_TOLERANCE);
                let on_grid = ln_s(n, tau, x as f64, ls[best]);
                if on_grid >= v {
                    (ls[best], on_grid)
                } else {
                    (l, v)
                }
            };
            Refined {
                x,
                l,
                ln_s: v,
                grid_index: best,
            }
        })
        .collect();

    let mut win = &refined[0];
    for r in &refined[1..] {
        if r.ln_s > win.ln_s {
            win = r;
        }
    }

    let m = ((3.0 - tau) * win.l).exp();
    let stationary = stationary_x(n, tau, m).ok();
    let x_consistent = stationary.is_some_and(|sx| {
        let x = win.x as f64;
        sx.floor() <= x && x <= sx.ceil()
    });

    Ok(Optimum {
        x_star: win.x,
        l_star: win.l,
        s_value: win.ln_s.exp(),
        grid_x_star: grid_best.x,
        grid_l_star: grid_best.l,
        grid_s_max: grid_best.s,
        stationary_x_real: stationary,
        x_consistent,
        l_on_boundary: per_x > 1 && (win.grid_index == 0 || win.grid_index + 1 == per_x),
        x_on_boundary: x_max > 1 && win.x == x_max,
    })
}

/// Everything the bounds module reports for one parameter set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub params: ModelParams,
    pub config: BoundConfig,
    pub grid: GridSpec,
    pub layers: LayerStructure,
    pub p_layer: Vec<LayerLinkBound>,
    /// `p_0` at the configured `l`.
    pub p0: f64,
    pub s_surface: Vec<SurfacePoint>,
    pub optimum: Optimum,
    pub x_star: usize,
    pub l_star: f64,
    pub s_max: f64,
    /// `s_max / N`.
    pub density: f64,
    /// `exp(−(τ−2) l*)`.
    pub asymptotic_density: f64,
    /// `exp(−(τ−2) l)` at the configured `l`.
    pub asymptotic_density_configured: f64,
    /// Exact-volume bounds at `x*` and the configured `l`.
    pub core_counts: CoreCountBounds,
    /// `s(x*, l)` at the configured `l`, next to `core_counts.neighborhood`.
    pub s_at_configured_l: f64,
}

/// Builds layers to depth `max(k*, x*)` and evaluates every bound.
pub fn bound_report(
    params: &ModelParams,
    cfg: &BoundConfig,
    grid: &GridSpec,
) -> Result<BoundReport> {
    let n = params.n();
    let tau = params.tau();
    check_tau(tau)?;
    let surface = s_surface(n, tau, grid)?;
    let optimum = optimize_surface(n, tau, grid, &surface)?;
    let depth = optimum
        .x_star
        .max(crate::layers::k_star(params).unwrap_or(1));
    let layers = build_layers(params, Some(depth))?;
    let p_layer = p_layer_bounds(params, cfg, &layers)?;
    let core_counts = expected_core_counts(params, cfg, optimum.x_star, &layers)?;
    Ok(BoundReport {
        params: *params,
        config: *cfg,
        grid: *grid,
        p0: p_zero(params, cfg),
        s_at_configured_l: s_objective(n, tau, optimum.x_star, params.l_value())?,
        layers,
        p_layer,
        s_surface: surface,
        x_star: optimum.x_star,
        l_star: optimum.l_star,
        s_max: optimum.s_value,
        density: optimum.s_value / n as f64,
        asymptotic_density: asymptotic_density(tau, optimum.l_star),
        asymptotic_density_configured: asymptotic_density(tau, params.l_value()),
        core_counts,
        optimum,
    })
}
