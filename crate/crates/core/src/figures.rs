//! Data series behind the two reproduction plots: the optimal core
//! parameters across `N`, and `s(x*, l)` as a function of `l`.

use serde::{Deserialize, Serialize};

use crate::bounds::{optimize, s_objective, GridSpec};
use crate::error::Result;
use crate::layers::k_star_real;
use crate::model::iterated_ln;

/// `N = 10^{k+1}` for `k = 1..=9`.
pub fn fig1_sizes() -> Vec<u64> {
    (2..=10).map(|e| 10u64.pow(e)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig1Row {
    pub n: u64,
    /// Optimal integer core depth `x*`.
    pub x: f64,
    /// `ln ln N / ln(1/(τ−2))`
    pub loglog_scaled: f64,
    /// Optimal `l*`.
    pub l: f64,
    pub lll: f64,
    pub llll: f64,
}

impl Fig1Row {
    pub fn series(&self) -> [f64; 5] {
        [self.x, self.loglog_scaled, self.l, self.lll, self.llll]
    }

    /// Whether the five series are non-increasing in listed order; `None`
    /// when one of them is undefined.
    pub fn ordered(&self) -> Option<bool> {
        let s = self.series();
        s.iter()
            .all(|v| v.is_finite())
            .then(|| s.windows(2).all(|w| w[0] >= w[1]))
    }
}

pub fn fig1(tau: f64, grid: &GridSpec) -> Result<Vec<Fig1Row>> {
    fig1_sizes()
        .into_iter()
        .map(|n| {
            let opt = optimize(n, tau, grid)?;
            let nf = n as f64;
            Ok(Fig1Row {
                n,
                x: opt.x_star as f64,
                loglog_scaled: k_star_real(n, tau)?,
                l: opt.l_star,
                lll: iterated_ln(nf, 3),
                llll: iterated_ln(nf, 4),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig2 {
    pub n: u64,
    pub tau: f64,
    pub x_star: usize,
    pub l_star: f64,
    /// `(l, s(x*, l))` over the `l` grid.
    pub rows: Vec<(f64, f64)>,
    pub argmax: usize,
}

impl Fig2 {
    /// The maximum is strictly above both grid ends.
    pub fn has_interior_max(&self) -> bool {
        let last = self.rows.len() - 1;
        let peak = self.rows[self.argmax].1;
        self.argmax > 0 && self.argmax < last && peak > self.rows[0].1 && peak > self.rows[last].1
    }
}

pub fn fig2(n: u64, tau: f64, grid: &GridSpec) -> Result<Fig2> {
    let opt = optimize(n, tau, grid)?;
    let rows = grid
        .l_values()
        .into_iter()
        .map(|l| Ok((l, s_objective(n, tau, opt.x_star, l)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut argmax = 0;
    for (k, r) in rows.iter().enumerate() {
        if r.1 > rows[argmax].1 {
            argmax = k;
        }
    }
    Ok(Fig2 {
        n,
        tau,
        x_star: opt.x_star,
        l_star: opt.l_star,
        rows,
        argmax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig1_known_points() {
        let rows = fig1(2.5, &GridSpec::default()).unwrap();
        assert_eq!(rows.len(), 9);
        assert_eq!(rows[0].n, 100);
        let r5 = rows.iter().find(|r| r.n == 100_000).unwrap();
        assert!((r5.loglog_scaled - 3.525_182_567_587_084).abs() < 1e-12);
        let r2 = rows[0];
        assert!(
            (r2.llll - (-0.859_384_420_389_173_1)).abs() < 1e-9,
            "{}",
            r2.llll
        );
        assert!(r2.ordered().is_some());
        for r in rows.iter().filter(|r| r.n >= 1000) {
            assert_eq!(r.ordered(), Some(true), "{r:?}");
        }
    }

    #[test]
    fn fig2_peak() {
        let f = fig2(100_000, 2.5, &GridSpec::default()).unwrap();
        assert!(f.has_interior_max());
        assert!(f.rows.iter().all(|r| r.1 > 0.0));
        assert_eq!(f.rows.len(), 200);
    }
}
