//! Statistical checks on the two sampling methods.

use powerlaw_core::graphgen::{sample_graph, GenMethod, GenSpec, MultiGraph};
use powerlaw_core::model::ModelParams;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const TRIALS: u64 = 10_000;

fn draws(p: ModelParams, method: GenMethod, base: u64) -> Vec<MultiGraph> {
    let spec = GenSpec::new(p, base).with_method(method);
    (0..TRIALS)
        .into_par_iter()
        .map(|t| sample_graph(&spec.with_seed(base + t)))
        .collect()
}

/// Two-sample chi-square homogeneity test on count histograms; bins are
/// merged from the top until every expected cell count is at least 5.
fn homogeneity_p_value(a: &[usize], b: &[usize]) -> f64 {
    let top = a.iter().chain(b).copied().max().unwrap_or(0);
    let hist = |xs: &[usize]| {
        let mut h = vec![0f64; top + 1];
        for &x in xs {
            h[x] += 1.0;
        }
        h
    };
    let (mut ha, mut hb) = (hist(a), hist(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let total = na + nb;
    while ha.len() > 1 {
        let last = ha.len() - 1;
        let col = ha[last] + hb[last];
        if col * na.min(nb) / total >= 5.0 {
            break;
        }
        ha[last - 1] += ha[last];
        hb[last - 1] += hb[last];
        ha.pop();
        hb.pop();
    }
    if ha.len() < 2 {
        return 1.0;
    }
    let mut stat = 0.0;
    for (&x, &y) in ha.iter().zip(&hb) {
        let col = x + y;
        let ea = col * na / total;
        let eb = col * nb / total;
        stat += (x - ea).powi(2) / ea + (y - eb).powi(2) / eb;
    }
    let df = (ha.len() - 1) as f64;
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}

#[test]
fn methods_agree_off_diagonal() {
    let p = ModelParams::from_alpha(50, 0.6, 1.0).unwrap();
    let pw = draws(p, GenMethod::Pairwise, 0);
    let ep = draws(p, GenMethod::EndpointSampling, 1_000_000);
    for (u, v) in [(0u32, 1u32), (0, 10), (1, 2), (3, 30), (20, 49)] {
        let a: Vec<usize> = pw.iter().map(|g| g.multiplicity(u, v)).collect();
        let b: Vec<usize> = ep.iter().map(|g| g.multiplicity(u, v)).collect();
        let pv = homogeneity_p_value(&a, &b);
        assert!(pv > 0.001, "pair ({u}, {v}): p = {pv}");
    }
}

#[test]
fn pair_mean_and_self_loop_intensity() {
    let p = ModelParams::from_alpha(50, 0.6, 1.0).unwrap();
    let total = p.total_capacity();
    let stats = |xs: Vec<f64>| {
        let k = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / k;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1.0);
        (m, (v / k).sqrt())
    };
    let pw = draws(p, GenMethod::Pairwise, 7);
    let (m, se) = stats(pw.iter().map(|g| g.multiplicity(0, 1) as f64).collect());
    let lam = p.edge_mean_with(1, 2, total).unwrap();
    assert!((m - lam).abs() < 4.0 * se);

    // node 1's self-loop: λ_1²/L_N pairwise, half that with endpoint sampling
    let loop_mean = p.edge_mean_with(1, 1, total).unwrap();
    let (m, se) = stats(pw.iter().map(|g| g.multiplicity(0, 0) as f64).collect());
    assert!((m - loop_mean).abs() < 4.0 * se, "{m} vs {loop_mean}");
    let ep = draws(p, GenMethod::EndpointSampling, 7);
    let (m, se) = stats(ep.iter().map(|g| g.multiplicity(0, 0) as f64).collect());
    assert!(
        (m - loop_mean / 2.0).abs() < 4.0 * se,
        "{m} vs {}",
        loop_mean / 2.0
    );
}

#[test]
fn homogeneity_test_detects_shift() {
    let a: Vec<usize> = (0..5000).map(|i| i % 3).collect();
    let b: Vec<usize> = (0..5000)
        .map(|i| (i % 3) + usize::from(i % 5 == 0))
        .collect();
    assert!(homogeneity_p_value(&a, &b) < 1e-6);
    assert!(homogeneity_p_value(&a, &a) > 0.99);
}
