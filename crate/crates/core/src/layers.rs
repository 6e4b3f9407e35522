//! The `β_j` recursion and the nested upper layers `U_j`.
//!
//! `β_0 = 1/(τ−1) + ε/(τ−2)`, `β_j = (τ−2) β_{j−1} + ε` with `ε = l / ln N`.
//! Layer `U_j` holds every node whose capacity reaches `N^{β_j}`, and
//! `U_0 = {1}` by definition. Because capacities decrease with the label,
//! each layer is a prefix `{1, ..., |U_j|}` of the labels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// `ε(N) = l(N) / ln N`.
pub fn epsilon_of(params: &ModelParams) -> Result<f64> {
    if params.n() < 2 {
        return Err(Error::Domain(format!(
            "epsilon needs N >= 2 (ln N > 0), got N = {}",
            params.n()
        )));
    }
    Ok(params.l_value() / (params.n() as f64).ln())
}

/// `β_0..=β_depth` for an explicit `ε`. `ε = 0` is allowed here.
pub fn beta_recursion(tau: f64, epsilon: f64, depth: usize) -> Vec<f64> {
    let mut betas = Vec::with_capacity(depth + 1);
    let mut b = 1.0 / (tau - 1.0) + epsilon / (tau - 2.0);
    betas.push(b);
    for _ in 0..depth {
        b = (tau - 2.0) * b + epsilon;
        betas.push(b);
    }
    betas
}

pub fn beta_sequence(params: &ModelParams, depth: usize) -> Result<Vec<f64>> {
    Ok(beta_recursion(params.tau(), epsilon_of(params)?, depth))
}

/// Fixed point `ε / (3 − τ)` of the affine map.
pub fn beta_fixed_point(tau: f64, epsilon: f64) -> f64 {
    epsilon / (3.0 - tau)
}

/// `⌈ln ln N / (−ln(τ−2))⌉` as a real before the ceiling.
pub fn k_star_real(n: u64, tau: f64) -> Result<f64> {
    if n < 16 {
        return Err(Error::Domain(format!("k* needs N >= 16, got N = {n}")));
    }
    if !(tau > 2.0 && tau < 3.0) {
        return Err(Error::Domain(format!("k* needs 2 < tau < 3, got {tau}")));
    }
    Ok((n as f64).ln().ln() / -(tau - 2.0).ln())
}

pub fn k_star_value(n: u64, tau: f64) -> Result<usize> {
    Ok(k_star_real(n, tau)?.ceil() as usize)
}

/// Height of the layer hierarchy, `k*(N)`.
pub fn k_star(params: &ModelParams) -> Result<usize> {
    k_star_value(params.n(), params.tau())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerStructure {
    pub n: u64,
    pub tau: f64,
    pub alpha: f64,
    pub l_value: f64,
    pub epsilon: f64,
    /// `L_N` by direct summation.
    pub total_capacity: f64,
    /// `k*(N)`, absent when `N < 16`.
    pub k_star: Option<usize>,
    pub betas: Vec<f64>,
    /// `N^{β_j}`.
    pub thresholds: Vec<f64>,
    /// `|U_j|` by direct count of `{i : λ_i ≥ N^{β_j}}` (`|U_0| = 1`).
    pub cardinalities: Vec<u64>,
    /// `⌊N^{1−(τ−1)β_j}⌋` clamped to `[0, N]` (`1` at `j = 0`).
    pub closed_form_cardinalities: Vec<u64>,
    /// `V(U_j)`, exact capacity sums.
    pub volumes: Vec<f64>,
    /// `V_0(U_j) = N^{1−(τ−2)β_j} − N^{β_j}`.
    pub volume_lower_bounds: Vec<f64>,
    /// Layers where closed form and direct count differ by exactly one node.
    pub threshold_ties: Vec<usize>,
    /// Layers `j > 0` that are empty.
    pub empty_layers: Vec<usize>,
}

impl LayerStructure {
    pub fn depth(&self) -> usize {
        self.betas.len() - 1
    }

    /// The core `C = U_{k*}`, as its cardinality.
    pub fn core_size(&self) -> Option<u64> {
        self.k_star.and_then(|k| self.cardinalities.get(k).copied())
    }

    /// Whether the 1-based label lies in `U_j`.
    pub fn contains(&self, j: usize, label: u64) -> bool {
        label >= 1 && label <= self.cardinalities[j]
    }

    /// Smallest layer index of every node (index `rank = label − 1`), or
    /// `None` for nodes outside `U_depth` and every shallower layer.
    pub fn levels(&self) -> Vec<Option<usize>> {
        let mut levels = vec![None; self.n as usize];
        let mut assigned = 0usize;
        for (j, &card) in self.cardinalities.iter().enumerate() {
            let card = card as usize;
            // layers are prefixes, so only ranks beyond the widest prefix so
            // far are new
            if card > assigned {
                for slot in &mut levels[assigned..card] {
                    *slot = Some(j);
                }
                assigned = card;
            }
        }
        levels
    }
}

/// Builds `U_0..=U_depth`; `depth` defaults to `k*(N)`.
pub fn build_layers(params: &ModelParams, depth: Option<usize>) -> Result<LayerStructure> {
    let k_star = k_star(params).ok();
    let depth = match depth {
        Some(d) => d,
        None => k_star.ok_or_else(|| {
            Error::Domain(format!(
                "default depth k* is undefined for N = {}; pass an explicit depth",
                params.n()
            ))
        })?,
    };
    let epsilon = epsilon_of(params)?;
    let betas = beta_recursion(params.tau(), epsilon, depth);

    let n = params.n();
    let nf = n as f64;
    let tau = params.tau();
    let caps = params.capacities();
    let mut prefix = Vec::with_capacity(caps.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &c in &caps {
        acc += c;
        prefix.push(acc);
    }

    let mut thresholds = Vec::with_capacity(depth + 1);
    let mut cardinalities = Vec::with_capacity(depth + 1);
    let mut closed = Vec::with_capacity(depth + 1);
    let mut volumes = Vec::with_capacity(depth + 1);
    let mut lower = Vec::with_capacity(depth + 1);
    let mut ties = Vec::new();
    let mut empty = Vec::new();

    for (j, &beta) in betas.iter().enumerate() {
        let threshold = nf.powf(beta);
        thresholds.push(threshold);
        lower.push(nf.powf(1.0 - (tau - 2.0) * beta) - threshold);
        if j == 0 {
            cardinalities.push(1);
            closed.push(1);
            volumes.push(caps[0]);
            continue;
        }
        let direct = caps.partition_point(|&c| c >= threshold) as u64;
        let cf = nf.powf(1.0 - (tau - 1.0) * beta).floor().clamp(0.0, nf) as u64;
        match direct.abs_diff(cf) {
            0 => {}
            1 => ties.push(j),
            d => return Err(Error::Domain(format!(
                "layer {j}: closed-form cardinality {cf} and direct count {direct} differ by {d}"
            ))),
        }
        if direct == 0 {
            empty.push(j);
        }
        cardinalities.push(direct);
        closed.push(cf);
        volumes.push(prefix[direct as usize]);
    }

    Ok(LayerStructure {
        n,
        tau,
        alpha: params.alpha(),
        l_value: params.l_value(),
        epsilon,
        total_capacity: prefix[n as usize],
        k_star,
        betas,
        thresholds,
        cardinalities,
        closed_form_cardinalities: closed,
        volumes,
        volume_lower_bounds: lower,
        threshold_ties: ties,
        empty_layers: empty,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LLL_1E5: f64 = 0.893_419_306_564_683;

    fn params(n: u64, tau: f64, l: f64) -> ModelParams {
        ModelParams::new(n, tau, l).unwrap()
    }

    #[test]
    fn epsilon_examples() {
        let n = 10f64.exp().round() as u64;
        let e = epsilon_of(&params(n, 2.5, 1.0)).unwrap();
        assert!((e - 1.0 / (n as f64).ln()).abs() < 1e-15);
        assert!((e - 0.1).abs() < 1e-4);
        let e = epsilon_of(&params(100_000, 2.5, LLL_1E5)).unwrap();
        assert!((e - 0.077_601_414_973_374_3).abs() < 1e-12);
        let e2 = epsilon_of(&params(100_000, 2.5, 2.0 * LLL_1E5)).unwrap();
        assert!((e2 - 2.0 * e).abs() < 1e-15);
        assert!(epsilon_of(&params(1, 2.5, 1.0)).is_err());
    }

    #[test]
    fn beta_examples() {
        let b = beta_sequence(&params(100_000, 2.5, LLL_1E5), 1).unwrap();
        assert!((b[0] - 0.821_869_496_613_415_3).abs() < 1e-12);
        assert!((b[1] - 0.488_536_163_280_081_9).abs() < 1e-12);

        let geo = beta_recursion(2.5, 0.0, 6);
        for (j, b) in geo.iter().enumerate() {
            assert!((b - (2.0 / 3.0) * 0.5f64.powi(j as i32)).abs() < 1e-15);
        }

        let eps = 0.07;
        let fp = beta_fixed_point(2.5, eps);
        assert!(((2.5 - 2.0) * fp + eps - fp).abs() < 1e-15);
    }

    #[test]
    fn k_star_examples() {
        assert_eq!(k_star(&params(100_000, 2.5, 1.0)).unwrap(), 4);
        assert_eq!(k_star(&params(1000, 2.5, 1.0)).unwrap(), 3);
        assert_eq!(k_star(&params(10_000, 2.5, 1.0)).unwrap(), 4);
        assert!(k_star(&params(15, 2.5, 1.0)).is_err());
        let mut prev = 0;
        for e in 2..=12 {
            let k = k_star_value(10u64.pow(e), 2.5).unwrap();
            assert!(k >= prev);
            prev = k;
        }
    }

    #[test]
    fn build_layers_example() {
        let ls = build_layers(&params(100_000, 2.5, LLL_1E5), None).unwrap();
        assert_eq!(ls.depth(), 4);
        assert_eq!(ls.cardinalities[0], 1);
        assert!((ls.volumes[0] - 1e5f64.powf(2.0 / 3.0)).abs() < 1e-9);
        assert_eq!(ls.cardinalities[1], 21);
        assert_eq!(ls.closed_form_cardinalities[1], 21);
        assert_eq!(ls.core_size(), Some(ls.cardinalities[4]));
    }

    #[test]
    fn levels_follow_prefixes() {
        let ls = build_layers(&params(2000, 2.5, 1.0), Some(5)).unwrap();
        let levels = ls.levels();
        assert_eq!(levels[0], Some(0));
        for (rank, lvl) in levels.iter().enumerate() {
            let label = rank as u64 + 1;
            match lvl {
                Some(j) => {
                    assert!(ls.contains(*j, label));
                    assert!((0..*j).all(|k| !ls.contains(k, label)));
                }
                None => assert!((0..=5).all(|k| !ls.contains(k, label))),
            }
        }
    }

    proptest! {
        #[test]
        fn layer_invariants(
            n in 16u64..60_000,
            tau in 2.05f64..2.95,
            l in 0.05f64..3.0,
            depth in 0usize..12,
        ) {
            let p = params(n, tau, l);
            let ls = build_layers(&p, Some(depth)).unwrap();
            let caps = p.capacities();
            let fp = beta_fixed_point(tau, ls.epsilon);

            // recomputed recursion
            let mut b = 1.0 / (tau - 1.0) + ls.epsilon / (tau - 2.0);
            prop_assert!((ls.betas[0] - b).abs() < 1e-12);
            for j in 1..=depth {
                b = (tau - 2.0) * ls.betas[j - 1] + ls.epsilon;
                prop_assert!((ls.betas[j] - b).abs() < 1e-12);
                if ls.betas[j - 1] > fp {
                    prop_assert!(ls.betas[j] < ls.betas[j - 1]);
                }
            }

            for j in 1..=depth {
                // direct-count oracle: linear scan
                let count = caps.iter().filter(|&&c| c >= ls.thresholds[j]).count() as u64;
                prop_assert_eq!(count, ls.cardinalities[j]);
                prop_assert!(ls.cardinalities[j].abs_diff(ls.closed_form_cardinalities[j]) <= 1);
                let card = ls.cardinalities[j] as f64;
                prop_assert!(ls.volumes[j] >= ls.thresholds[j] * card * (1.0 - 1e-12));
                if ls.volume_lower_bounds[j] > 0.0 {
                    prop_assert!(ls.volumes[j] >= ls.volume_lower_bounds[j] * (1.0 - 1e-12));
                }
                if ls.betas[j] <= ls.betas[j - 1] && j > 1 {
                    prop_assert!(ls.cardinalities[j] >= ls.cardinalities[j - 1]);
                }
            }
        }
    }
}
