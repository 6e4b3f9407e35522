use std::fs;

use anyhow::{Context, Result};
use powerlaw_core::bounds::{bound_report, expected_core_counts, optimize, BoundConfig};
use powerlaw_core::figures::{fig1 as fig1_rows, fig2 as fig2_series};
use powerlaw_core::graphgen::{sample_graph, write_graph, GenSpec, RNG_ALGORITHM};
use powerlaw_core::layers::build_layers;
use powerlaw_core::model::ModelParams;
use powerlaw_core::sim::{sweep, Aggregate, SimConfig};
use serde::Serialize;
use serde_json::json;

use crate::output::{csv_bytes, sig12, write_atomic, Sink};
use crate::{parse_seeds, BoundsArgs, Fig1Args, Fig2Args, GenerateArgs, SimulateArgs};

fn announce<T: Serialize>(command: &str, config: &T) -> Result<()> {
    let line = serde_json::to_string(&json!({ "command": command, "config": config }))?;
    eprintln!("{line}");
    Ok(())
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn generate(a: &GenerateArgs) -> Result<bool> {
    let params = ModelParams::new(a.n, a.tau, 1.0)?;
    let mut spec = GenSpec::new(params, a.seed);
    if let Some(m) = a.method {
        spec = spec.with_method(m);
    }
    announce(
        "generate",
        &json!({
            "n": a.n,
            "tau": a.tau,
            "seed": a.seed,
            "method": spec.method.name(),
            "rng": RNG_ALGORITHM,
            "out": a.out,
        }),
    )?;
    let g = sample_graph(&spec);
    let mut buf = Vec::new();
    write_graph(&g, &mut buf)?;
    Sink::new(a.out.as_deref()).write(&buf)?;
    eprintln!(
        "nodes {} edges {} seed {} self_loops {}",
        g.node_count(),
        g.edge_count(),
        a.seed,
        g.self_loop_count()
    );
    Ok(true)
}

pub fn bounds(a: &BoundsArgs) -> Result<bool> {
    let params = a.model.params()?;
    let cfg = BoundConfig::new(a.c_ratio)?;
    let grid = a.grid.grid()?;
    let effective = json!({
        "n": params.n(),
        "tau": params.tau(),
        "alpha": params.alpha(),
        "l": params.l_value(),
        "c_ratio": cfg.c_ratio,
        "grid": grid,
        "x": a.x,
    });
    announce("bounds", &effective)?;
    let report = bound_report(&params, &cfg, &grid)?;
    let at_x = match a.x {
        Some(x) => {
            let layers = build_layers(&params, Some(x.max(report.layers.depth())))?;
            Some(expected_core_counts(&params, &cfg, x, &layers)?)
        }
        None => None,
    };
    let range = params.communication_range_check(&Default::default());
    let doc = json!({
        "config": effective,
        "k_star": report.layers.k_star,
        "x_star": report.x_star,
        "l_star": report.l_star,
        "s_max": report.s_max,
        "density": report.density,
        "communication_range": range,
        "core_counts_at_x": at_x,
        "report": report,
    });
    Sink::new(a.out.as_deref()).write(&json_bytes(&doc)?)?;

    let opt = &report.optimum;
    let ok = !opt.on_boundary() && opt.x_consistent;
    if !ok {
        eprintln!(
            "check: optimum x*={} l*={} boundary(x={}, l={}) stationary-consistent={}",
            opt.x_star, opt.l_star, opt.x_on_boundary, opt.l_on_boundary, opt.x_consistent
        );
    }
    Ok(ok || !a.check)
}

pub fn fig1(a: &Fig1Args) -> Result<bool> {
    let grid = a.grid.grid()?;
    announce("fig1", &json!({ "tau": a.tau, "grid": grid }))?;
    let rows = fig1_rows(a.tau, &grid)?;
    let body = csv_bytes(
        &["n", "x", "loglog_scaled", "l", "lll", "llll"],
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                sig12(r.x),
                sig12(r.loglog_scaled),
                sig12(r.l),
                sig12(r.lll),
                sig12(r.llll),
            ]
        }),
    )?;
    Sink::new(a.out.as_deref()).write(&body)?;
    let mut ok = true;
    for r in rows.iter().filter(|r| r.n >= 1000) {
        if r.ordered() == Some(false) {
            eprintln!("check: series not ordered at N={}", r.n);
            ok = false;
        }
    }
    Ok(ok || !a.check)
}

pub fn fig2(a: &Fig2Args) -> Result<bool> {
    let grid = a.grid.grid()?;
    announce("fig2", &json!({ "n": a.n, "tau": a.tau, "grid": grid }))?;
    let f = fig2_series(a.n, a.tau, &grid)?;
    let body = csv_bytes(
        &["l", "s"],
        f.rows.iter().map(|&(l, s)| vec![sig12(l), sig12(s)]),
    )?;
    Sink::new(a.out.as_deref()).write(&body)?;
    eprintln!(
        "x* {} l* {} peak at l {}",
        f.x_star,
        sig12(f.l_star),
        sig12(f.rows[f.argmax].0)
    );
    let ok = f.has_interior_max();
    if !ok {
        eprintln!("check: no interior maximum on the l grid");
    }
    Ok(ok || !a.check)
}

pub fn simulate(a: &SimulateArgs) -> Result<bool> {
    let params = a.model.params()?;
    let bounds = BoundConfig::new(a.c_ratio)?;
    let seeds = match (&a.seeds, a.seed) {
        (Some(spec), _) => parse_seeds(spec)?,
        (None, Some(s)) => vec![s],
        (None, None) => vec![0],
    };
    let x = match a.x {
        Some(x) => x,
        None => {
            optimize(params.n(), params.tau(), &a.grid.grid()?)
                .context("choosing x from the optimizer; pass --x for this N")?
                .x_star
        }
    };
    let cfg = SimConfig {
        params,
        method: a.method,
        x,
        pairs: a.pairs,
        bounds,
    };
    let effective = json!({
        "n": params.n(),
        "tau": params.tau(),
        "alpha": params.alpha(),
        "l": params.l_value(),
        "x": x,
        "pairs": a.pairs,
        "method": cfg.method().name(),
        "rng": RNG_ALGORITHM,
        "c_ratio": bounds.c_ratio,
        "seeds": seeds,
    });
    announce("simulate", &effective)?;

    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_atomic(&a.out.join("config.json"), &json_bytes(&effective)?)?;
    let reports = sweep(&cfg, &seeds)?;
    for r in &reports {
        write_atomic(
            &a.out.join(format!("seed_{}.json", r.seed)),
            &json_bytes(r)?,
        )?;
    }
    let agg = Aggregate::from_reports(&cfg, &reports)?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    let body = csv_bytes(
        &["metric", "layer", "mean", "stderr", "bound", "passed"],
        agg.rows.iter().map(|r| {
            vec![
                r.metric.clone(),
                opt(r.layer.map(|j| j.to_string())),
                sig12(r.mean),
                sig12(r.stderr),
                opt(r.bound.map(sig12)),
                opt(r.passed.map(|p| p.to_string())),
            ]
        }),
    )?;
    write_atomic(&a.out.join("aggregate.csv"), &body)?;

    let failures = agg.failures();
    for f in &failures {
        eprintln!(
            "check: {} layer {:?} mean {} bound {:?}",
            f.metric,
            f.layer,
            sig12(f.mean),
            f.bound
        );
    }
    eprintln!(
        "{} seeds, {} rows, {} failed checks",
        seeds.len(),
        agg.rows.len(),
        failures.len()
    );
    Ok(failures.is_empty() || !a.check)
}
