//! Fixture graphs shared by the integration tests.
#![allow(dead_code)]

use balanced_core::generators::{
    gen_complete, gen_cycle, gen_erdos_renyi, gen_glued_paths, gen_path, gen_star, load_named,
};
use balanced_core::Graph;

pub struct Fixture {
    pub name: String,
    pub graph: Graph,
}

fn fixture(name: impl Into<String>, graph: Graph) -> Fixture {
    Fixture {
        name: name.into(),
        graph,
    }
}

/// Paths, a star, cycles, complete graphs, glued paths, the catalog graphs
/// and twenty seeded G(50, 0.1) samples.
pub fn fixtures() -> Vec<Fixture> {
    let mut out = vec![
        fixture("P3", gen_path(3).unwrap()),
        fixture("P5", gen_path(5).unwrap()),
        fixture("K1,3", gen_star(3).unwrap()),
    ];
    out.extend((4..=8).map(|n| fixture(format!("C{n}"), gen_cycle(n).unwrap())));
    out.extend((3..=8).map(|n| fixture(format!("K{n}"), gen_complete(n).unwrap())));
    for m in [2, 3, 5] {
        for ell in [1, 2, 10] {
            out.push(fixture(format!("glued({m},{ell})"), gen_glued_paths(m, ell).unwrap().graph));
        }
    }
    for name in ["frucht", "dodecahedral", "desargues", "petersen"] {
        out.push(fixture(name, load_named(name).unwrap()));
    }
    out.extend((0..20).map(|seed| fixture(format!("ER(50,0.1)#{seed}"), gen_erdos_renyi(50, 0.1, seed).unwrap())));
    out
}

/// Small fixtures for expensive property checks.
pub fn small_fixtures() -> Vec<Fixture> {
    fixtures().into_iter().filter(|f| f.graph.n() <= 12).collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for at in 0..=p.len() {
            let mut q = p.clone();
            q.insert(at, n - 1);
            out.push(q);
        }
    }
    out
}

/// One representative of every isomorphism class of connected graphs on
/// `n` vertices, found by exhausting edge subsets of `K_n` and keeping the
/// subsets that are minimal among their relabellings.
pub fn connected_graphs(n: usize) -> Vec<Graph> {
    assert!((1..=7).contains(&n), "exhaustive enumeration is for tiny n");
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let mut index = vec![vec![0; n]; n];
    for (i, &(u, v)) in pairs.iter().enumerate() {
        index[u][v] = i;
        index[v][u] = i;
    }
    let perms = permutations(n);
    let relabel: Vec<Vec<usize>> = perms
        .iter()
        .map(|p| pairs.iter().map(|&(u, v)| index[p[u]][p[v]]).collect())
        .collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let canonical = relabel.iter().all(|map| {
            let image = (0..pairs.len())
                .filter(|&i| mask >> i & 1 == 1)
                .fold(0u32, |acc, i| acc | 1 << map[i]);
            image >= mask
        });
        if !canonical {
            continue;
        }
        let edges: Vec<(usize, usize)> = (0..pairs.len()).filter(|&i| mask >> i & 1 == 1).map(|i| pairs[i]).collect();
        if let Ok(g) = Graph::from_edges(n, &edges) {
            out.push(g);
        }
    }
    out
}
