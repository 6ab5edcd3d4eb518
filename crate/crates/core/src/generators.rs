//! Test graphs, random graphs and point clouds.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64`, whose output
//! stream is fixed by the ChaCha8 algorithm and does not depend on the
//! platform. Gaussian samples use `rand_distr::StandardNormal`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::io::parse_edge_list;

fn at_least(what: &'static str, value: usize, min: usize) -> Result<()> {
    if value < min {
        return Err(Error::SizeTooSmall { what, value, min });
    }
    Ok(())
}

pub fn gen_path(n: usize) -> Result<Graph> {
    at_least("path length", n, 2)?;
    let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    Graph::from_edges(n, &edges)
}

pub fn gen_cycle(n: usize) -> Result<Graph> {
    at_least("cycle length", n, 3)?;
    let edges: Vec<_> = (0..n).map(|v| (v, (v + 1) % n)).collect();
    Graph::from_edges(n, &edges)
}

pub fn gen_complete(n: usize) -> Result<Graph> {
    at_least("complete graph order", n, 2)?;
    let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    Graph::from_edges(n, &edges)
}

/// Star with center 0 and leaves `1..=n_leaves`.
pub fn gen_star(n_leaves: usize) -> Result<Graph> {
    at_least("star leaves", n_leaves, 1)?;
    let edges: Vec<_> = (1..=n_leaves).map(|v| (0, v)).collect();
    Graph::from_edges(n_leaves + 1, &edges)
}

/// `rows x cols` grid, vertex `r * cols + c`.
pub fn gen_grid(rows: usize, cols: usize) -> Result<Graph> {
    at_least("grid rows", rows, 1)?;
    at_least("grid columns", cols, 1)?;
    at_least("grid size", rows * cols, 2)?;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1));
            }
            if r + 1 < rows {
                edges.push((v, v + cols));
            }
        }
    }
    Graph::from_edges(rows * cols, &edges)
}

/// `paths` internally disjoint paths between two hubs.
#[derive(Debug, Clone)]
pub struct GluedPaths {
    pub graph: Graph,
    pub hubs: (usize, usize),
    /// Per path, the central interior vertex nearer to the first hub.
    pub midpoints: Vec<usize>,
    /// Per path, both central interior vertices (nearer first hub, nearer second).
    pub centers: Vec<(usize, usize)>,
}

/// Glues `paths` paths with `2 * half_len + 1` edges each at both ends.
///
/// Hubs are vertices 0 and 1; path `i` has interior vertices
/// `2 + 2 * half_len * i ..` listed from hub 0 towards hub 1.
pub fn gen_glued_paths(paths: usize, half_len: usize) -> Result<GluedPaths> {
    at_least("glued path count", paths, 2)?;
    at_least("glued path half-length", half_len, 1)?;
    let interior = 2 * half_len;
    let n = 2 + interior * paths;
    let mut edges = Vec::with_capacity(paths * (interior + 1));
    let mut midpoints = Vec::with_capacity(paths);
    let mut centers = Vec::with_capacity(paths);
    for i in 0..paths {
        let first = 2 + interior * i;
        edges.push((0, first));
        for j in 1..interior {
            edges.push((first + j - 1, first + j));
        }
        edges.push((first + interior - 1, 1));
        midpoints.push(first + half_len - 1);
        centers.push((first + half_len - 1, first + half_len));
    }
    Ok(GluedPaths {
        graph: Graph::from_edges(n, &edges)?,
        hubs: (0, 1),
        midpoints,
        centers,
    })
}

pub const ER_MAX_ATTEMPTS: usize = 100;

/// Seeded `G(n, p)`, resampled with seeds `seed, seed + 1, ...` until
/// connected.
///
/// Each pair `u < v` in lexicographic order consumes one `f64` draw and is
/// an edge when the draw is below `p`.
pub fn gen_erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    at_least("random graph order", n, 2)?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("edge probability {p} not in (0, 1]")));
    }
    for attempt in 0..ER_MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        match Graph::from_edges(n, &edges) {
            Ok(g) => return Ok(g),
            Err(Error::Disconnected { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoConnectedSample {
        attempts: ER_MAX_ATTEMPTS,
    })
}

/// Points in `R^dim`, stored row-major, with optional per-point metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub dim: usize,
    pub coords: Vec<f64>,
    pub metadata_names: Vec<String>,
    /// Row-major, `metadata_names.len()` values per point.
    pub metadata: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(Error::InvalidParameter(format!(
                "{} coordinates do not form points of dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coordinate".into()));
        }
        Ok(PointCloud {
            dim,
            coords,
            metadata_names: Vec::new(),
            metadata: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Metadata column `name`, if present.
    pub fn metadata_column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.metadata_names.len();
        let j = self.metadata_names.iter().position(|c| c == name)?;
        Some((0..self.len()).map(|i| self.metadata[i * k + j]).collect())
    }
}

/// `n_per_cluster` isotropic Gaussian samples around each center.
pub fn gen_gaussian_clouds(n_per_cluster: usize, centers: &[Vec<f64>], stddev: f64, seed: u64) -> Result<PointCloud> {
    let dim = centers
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidParameter("no cluster centers".into()))?;
    if centers.iter().any(|c| c.len() != dim) {
        return Err(Error::InvalidParameter("centers differ in dimension".into()));
    }
    if !(stddev > 0.0) {
        return Err(Error::InvalidParameter(format!("standard deviation {stddev} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(n_per_cluster * centers.len() * dim);
    for center in centers {
        for _ in 0..n_per_cluster {
            for &c in center {
                let z: f64 = rng.sample(StandardNormal);
                coords.push(c + stddev * z);
            }
        }
    }
    PointCloud::new(dim, coords)
}

/// Swiss roll `(t cos t, h, t sin t)` with `t = 1.5 pi (1 + 2 u)` and
/// `h = 21 v` for independent uniforms `u, v`. Metadata columns `t`, `h`.
pub fn gen_swiss_roll(n: usize, seed: u64) -> Result<PointCloud> {
    at_least("swiss roll size", n, 10)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(3 * n);
    let mut metadata = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let t = 1.5 * std::f64::consts::PI * (1.0 + 2.0 * rng.random::<f64>());
        let h = 21.0 * rng.random::<f64>();
        coords.extend([t * t.cos(), h, t * t.sin()]);
        metadata.extend([t, h]);
    }
    let mut cloud = PointCloud::new(3, coords)?;
    cloud.metadata_names = vec!["t".into(), "h".into()];
    cloud.metadata = metadata;
    Ok(cloud)
}

/// Symmetrized k-nearest-neighbor graph: `u ~ v` when either is among the
/// other's `k` nearest points. Distance ties go to the smaller index.
pub fn knn_graph(cloud: &PointCloud, k: usize) -> Result<Graph> {
    let n = cloud.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!("k = {k} must be in 1..{n}")));
    }
    let lists = knn_lists(cloud, k);
    let edges: Vec<(usize, usize)> = lists
        .iter()
        .enumerate()
        .flat_map(|(i, l)| l.iter().map(move |&j| (i, j)))
        .collect();
    Graph::from_edges(n, &edges).map_err(|e| match e {
        Error::Disconnected { .. } => Error::KnnDisconnected { k },
        other => other,
    })
}

/// The `k` nearest other points of every point, nearest first, distance
/// ties to the smaller index.
pub fn knn_lists(cloud: &PointCloud, k: usize) -> Vec<Vec<usize>> {
    let n = cloud.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let p = cloud.point(i);
            let mut cand: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let q = cloud.point(j);
                    let d2 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
                    (d2, j)
                })
                .collect();
            let by_key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            let k = k.min(cand.len());
            if k > 0 && k < cand.len() {
                cand.select_nth_unstable_by(k - 1, by_key);
            }
            cand.truncate(k);
            cand.sort_by(by_key);
            cand.into_iter().map(|(_, j)| j).collect()
        })
        .collect()
}

const CATALOG: &[(&str, &str)] = &[
    ("desargues", include_str!("../data/desargues.txt")),
    ("dodecahedral", include_str!("../data/dodecahedral.txt")),
    ("frucht", include_str!("../data/frucht.txt")),
    ("petersen", include_str!("../data/petersen.txt")),
];

pub fn catalog_names() -> impl Iterator<Item = &'static str> {
    CATALOG.iter().map(|(name, _)| *name)
}

/// One of the bundled graphs: `desargues`, `dodecahedral`, `frucht`, `petersen`.
pub fn load_named(name: &str) -> Result<Graph> {
    let (_, text) = CATALOG
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::UnknownGraph(name.to_string()))?;
    parse_edge_list(text, None)
}
