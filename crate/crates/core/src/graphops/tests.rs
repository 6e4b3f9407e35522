use super::*;
use crate::layers::build_layers;
use crate::model::ModelParams;

fn graph(n: usize, edges: &[(NodeId, NodeId)]) -> MultiGraph {
    MultiGraph::from_edges(n, edges.iter().copied()).unwrap()
}

#[test]
fn edgeless_components() {
    let c = components(&graph(5, &[]));
    assert_eq!(c.count(), 5);
    assert!(c.sizes.iter().all(|&s| s == 1));
    assert_eq!(c.giant(), Some(0));
}

#[test]
fn triangle_component() {
    let c = components(&graph(3, &[(0, 1), (1, 2), (2, 0)]));
    assert_eq!(c.count(), 1);
    assert_eq!(c.giant_size(), 3);
}

#[test]
fn distances_on_small_graphs() {
    let path = graph(3, &[(0, 1), (1, 2)]);
    assert_eq!(bfs_distance(&path, 0, 2).unwrap(), Some(2));
    assert_eq!(bfs_distance(&path, 2, 0).unwrap(), Some(2));
    assert_eq!(bfs_distance(&path, 1, 1).unwrap(), Some(0));
    let split = graph(4, &[(0, 1), (2, 3), (2, 2), (0, 1)]);
    assert_eq!(bfs_distance(&split, 0, 3).unwrap(), None);
    assert!(bfs_distance(&split, 0, 4).is_err());
}

#[test]
fn complete_graph_distances_are_one() {
    let n = 12;
    let edges: Vec<_> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    let g = graph(n as usize, &edges);
    let c = components(&g);
    let d = sample_distances(&g, &c, 200, 3, 10).unwrap();
    assert!(d
        .samples
        .iter()
        .all(|s| s.hops == 1 && s.source != s.target));
    assert_eq!(d.median, 1.0);
    assert_eq!(d.within_bound_fraction, 1.0);
}

#[test]
fn sample_distances_errors() {
    let g = graph(3, &[]);
    let c = components(&g);
    assert!(matches!(
        sample_distances(&g, &c, 10, 0, 4),
        Err(Error::GiantTooSmall(1))
    ));
    let g = graph(2, &[(0, 1)]);
    assert!(sample_distances(&g, &components(&g), 0, 0, 4).is_err());
}

#[test]
fn distance_sampling_is_deterministic() {
    let p = ModelParams::new(2000, 2.5, 1.0).unwrap();
    let g = crate::graphgen::sample_graph(&crate::graphgen::GenSpec::new(p, 11));
    let c = components(&g);
    let a = sample_distances(&g, &c, 300, 5, 8).unwrap();
    let b = sample_distances(&g, &c, 300, 5, 8).unwrap();
    assert_eq!(a, b);
}

fn fixture_layers() -> LayerStructure {
    // N = 2000, τ = 2.5, l = 1 gives nested prefixes of sizes 1, 6, ...
    build_layers(&ModelParams::new(2000, 2.5, 1.0).unwrap(), Some(4)).unwrap()
}

#[test]
fn uplink_isolated_and_star() {
    let ls = fixture_layers();
    let n = ls.n as usize;
    let none = layer_uplink_fractions(&graph(n, &[]), &ls).unwrap();
    for u in &none {
        assert_eq!(u.layer_linked, 0);
        assert!(u.shell_fraction.is_none_or(|f| f == 0.0));
    }
    let top = ls.cardinalities[ls.depth()] as NodeId;
    let star: Vec<_> = (1..top).map(|v| (0, v)).collect();
    let all = layer_uplink_fractions(&graph(n, &star), &ls).unwrap();
    for u in &all {
        if u.shell_size > 0 {
            assert_eq!(u.shell_fraction, Some(1.0));
        }
        // node 1 has no edge into U_0 = {1}; deeper layers reach it via the star
        let expect = if u.j == 1 {
            u.layer_size - 1
        } else {
            u.layer_size
        };
        assert_eq!(u.layer_linked, expect);
    }
    assert!(layer_uplink_fractions(&graph(10, &[]), &ls).is_err());
}

#[test]
fn ascending_set_basics() {
    let ls = fixture_layers();
    let n = ls.n as usize;
    let empty = graph(n, &[]);
    for x in 0..=ls.depth() {
        assert_eq!(core_ascending_set(&empty, &ls, x).unwrap(), vec![0]);
    }
    assert!(core_ascending_set(&empty, &ls, ls.depth() + 1).is_err());

    // chain 1 <- shell1 node <- shell2 node, plus a shell2 node linked only
    // to another shell2 node, which is not ascending
    let s1 = ls.cardinalities[0] as NodeId;
    let s2 = ls.cardinalities[1] as NodeId;
    let s2b = s2 + 1;
    assert!((s2b as u64) < ls.cardinalities[2]);
    let g = graph(n, &[(0, s1), (s1, s2), (s2, s2b)]);
    let up = core_ascending_set(&g, &ls, 2).unwrap();
    assert_eq!(up, vec![0, s1, s2]);
    assert_eq!(core_ascending_set(&g, &ls, 1).unwrap(), vec![0, s1]);
}

#[test]
fn neighbourhood_basics() {
    let g = graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
    assert!(core_neighborhood(&g, &[]).unwrap().is_empty());
    assert_eq!(core_neighborhood(&g, &[0]).unwrap(), vec![0, 1, 2, 3, 4]);
    assert_eq!(core_neighborhood(&g, &[1]).unwrap(), vec![0, 1]);
    assert!(core_neighborhood(&g, &[7]).is_err());
}

#[test]
fn ascending_paths_are_short_on_sampled_graphs() {
    for seed in 0..5 {
        let p = ModelParams::new(2000, 2.5, 0.8).unwrap();
        let ls = build_layers(&p, Some(6)).unwrap();
        let g = crate::graphgen::sample_graph(&crate::graphgen::GenSpec::new(p, seed));
        for x in 1..=6 {
            let up = core_ascending_set(&g, &ls, x).unwrap();
            assert!(up.iter().all(|&r| (r as u64) < ls.cardinalities[x]));
            let dist = bfs_all(&g, 0).unwrap();
            for &r in &up {
                assert!(dist[r as usize].is_some_and(|d| d as usize <= x));
            }
            let nx = core_neighborhood(&g, &up).unwrap();
            assert!(up.iter().all(|r| nx.binary_search(r).is_ok()));
        }
    }
}
