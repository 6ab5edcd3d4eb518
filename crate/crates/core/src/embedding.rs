//! The explicit embedding `phi(v)_j = mu(w_j) d(w_j, v)` of a graph into
//! `l1(R^m)` given by a balanced measure on `m` vertices, its audits, and
//! the usual post-processing (dropping coordinates, centering, PCA).

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{format_rational, rational_to_f64};
use crate::graph::DistanceMatrix;
use crate::measure::{is_balanced, transport_costs, transport_costs_exact, VertexMeasure};

/// Audits accept deviations up to this amount.
pub const AUDIT_TOL: f64 = 1e-9;

/// Largest graph audited over all pairs; larger graphs are sampled.
pub const FULL_SCAN_MAX_N: usize = 5000;
pub const SAMPLED_PAIRS: usize = 1_000_000;
pub const AUDIT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    /// Support vertices `w_1 < ... < w_m`, one per column.
    pub support: Vec<usize>,
    pub weights: Vec<f64>,
    pub exact_weights: Option<Vec<BigRational>>,
    /// Upper bound on every row sum; attained on the support rows of an
    /// unreduced embedding.
    pub alpha: f64,
    pub alpha_exact: Option<BigRational>,
    /// Row-major `n x m`, row `v` is `phi(v)`.
    coords: Vec<f64>,
    n: usize,
    /// Set once columns have been dropped; the hyperplane property then no
    /// longer follows from balance.
    pub reduced: bool,
}

impl Embedding {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of coordinates `m`.
    pub fn dim(&self) -> usize {
        self.support.len()
    }

    pub fn row(&self, v: usize) -> &[f64] {
        let m = self.dim();
        &self.coords[v * m..(v + 1) * m]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|v| self.row(v).to_vec()).collect()
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.dim(), &self.coords)
    }

    pub fn column_labels(&self) -> Vec<String> {
        self.support.iter().map(|w| format!("w{w}")).collect()
    }

    fn from_columns(
        dist: &DistanceMatrix,
        support: Vec<usize>,
        weights: Vec<f64>,
        exact_weights: Option<Vec<BigRational>>,
    ) -> Self {
        let n = dist.n();
        let m = support.len();
        let mut coords = vec![0.0; n * m];
        coords.par_chunks_mut(m.max(1)).enumerate().for_each(|(v, row)| {
            for (j, &w) in support.iter().enumerate() {
                row[j] = weights[j] * dist.get(w, v) as f64;
            }
        });
        Embedding {
            support,
            weights,
            exact_weights,
            alpha: 0.0,
            alpha_exact: None,
            coords,
            n,
            reduced: false,
        }
    }
}

/// Builds the embedding of a balanced measure; `alpha` is its maximal
/// transport cost. Rejects measures that fail `is_balanced` at `tol`.
pub fn embed(dist: &DistanceMatrix, mu: &VertexMeasure, tol: f64) -> Result<Embedding> {
    let report = is_balanced(mu, dist, tol)?;
    if !report.is_balanced {
        let t = transport_costs(mu, dist)?;
        let vertex = report
            .support
            .iter()
            .copied()
            .find(|v| !report.argmax_set.contains(v))
            .unwrap_or(report.support[0]);
        return Err(Error::NotBalanced {
            vertex,
            cost: t[vertex],
            max: report.max_transport,
        });
    }
    embed_unchecked(dist, mu)
}

/// Builds the embedding without checking balance. The audits may then fail.
pub fn embed_unchecked(dist: &DistanceMatrix, mu: &VertexMeasure) -> Result<Embedding> {
    let support = mu.support();
    let weights = support.iter().map(|&w| mu.weight(w)).collect();
    let exact = mu.exact_weights().map(|e| support.iter().map(|&w| e[w].clone()).collect());
    let mut emb = Embedding::from_columns(dist, support, weights, exact);
    match transport_costs_exact(mu, dist)? {
        Some(t) => {
            let max = t.into_iter().max().unwrap();
            emb.alpha = rational_to_f64(&max);
            emb.alpha_exact = Some(max);
        }
        None => {
            emb.alpha = transport_costs(mu, dist)?.into_iter().fold(f64::NEG_INFINITY, f64::max);
        }
    }
    Ok(emb)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    /// `max ||phi(u) - phi(v)||_1 / d(u, v)` over the checked pairs.
    pub max_ratio: f64,
    pub violation_count: u64,
    pub worst_pair: Option<(usize, usize)>,
    pub pairs_checked: u64,
    pub sampled: bool,
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[derive(Clone, Copy)]
struct PairMax {
    ratio: f64,
    pair: Option<(usize, usize)>,
    violations: u64,
    count: u64,
}

impl PairMax {
    const EMPTY: PairMax = PairMax {
        ratio: 0.0,
        pair: None,
        violations: 0,
        count: 0,
    };

    fn push(mut self, u: usize, v: usize, ratio: f64) -> Self {
        if self.pair.is_none() || ratio > self.ratio {
            self.ratio = ratio;
            self.pair = Some((u, v));
        }
        self.violations += (ratio > 1.0 + AUDIT_TOL) as u64;
        self.count += 1;
        self
    }

    /// Associative merge that keeps the earlier pair on equal ratios, so
    /// the result does not depend on how rayon splits the work.
    fn merge(self, other: Self) -> Self {
        let take_other = match (self.pair, other.pair) {
            (None, _) => true,
            (_, None) => false,
            (Some(a), Some(b)) => other.ratio > self.ratio || (other.ratio == self.ratio && b < a),
        };
        let (ratio, pair) = if take_other {
            (other.ratio, other.pair)
        } else {
            (self.ratio, self.pair)
        };
        PairMax {
            ratio,
            pair,
            violations: self.violations + other.violations,
            count: self.count + other.count,
        }
    }
}

/// Checks `||phi(u) - phi(v)||_1 <= d(u, v)` over all pairs when
/// `n <= 5000`, else over a seeded sample of `10^6` pairs.
pub fn lipschitz_audit(emb: &Embedding, dist: &DistanceMatrix) -> Result<LipschitzReport> {
    lipschitz_audit_with(emb, dist, FULL_SCAN_MAX_N, SAMPLED_PAIRS, AUDIT_SEED)
}

pub fn lipschitz_audit_with(
    emb: &Embedding,
    dist: &DistanceMatrix,
    full_scan_max_n: usize,
    samples: usize,
    seed: u64,
) -> Result<LipschitzReport> {
    check_rows(emb, dist)?;
    let n = emb.n();
    let ratio = |u: usize, v: usize| l1(emb.row(u), emb.row(v)) / dist.get(u, v) as f64;
    let sampled = n > full_scan_max_n;
    let result = if sampled {
        let pairs = sample_pairs(n, samples, seed);
        pairs
            .par_iter()
            .fold(|| PairMax::EMPTY, |acc, &(u, v)| acc.push(u, v, ratio(u, v)))
            .reduce(|| PairMax::EMPTY, PairMax::merge)
    } else {
        (0..n)
            .into_par_iter()
            .map(|u| (u + 1..n).fold(PairMax::EMPTY, |acc, v| acc.push(u, v, ratio(u, v))))
            .reduce(|| PairMax::EMPTY, PairMax::merge)
    };
    Ok(LipschitzReport {
        max_ratio: result.ratio,
        violation_count: result.violations,
        worst_pair: result.pair,
        pairs_checked: result.count,
        sampled,
    })
}

/// Seeded pairs `u < v` drawn uniformly among distinct pairs.
fn sample_pairs(n: usize, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| loop {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            if u != v {
                break (u.min(v), u.max(v));
            }
        })
        .collect()
}

fn check_rows(emb: &Embedding, dist: &DistanceMatrix) -> Result<()> {
    if emb.n() != dist.n() {
        return Err(Error::DimensionMismatch {
            expected: dist.n(),
            got: emb.n(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneReport {
    /// `max |row_sum(w) - alpha|` over support vertices `w`.
    pub max_support_deviation: f64,
    /// Whether the deviation was computed in rational arithmetic.
    pub exact: bool,
    /// A single coordinate: the hyperplane is a point and carries no
    /// information.
    pub degenerate: bool,
    pub satisfied: bool,
}

/// Checks that the support rows lie on `x_1 + ... + x_m = alpha`.
pub fn hyperplane_check(emb: &Embedding, dist: &DistanceMatrix) -> Result<HyperplaneReport> {
    check_rows(emb, dist)?;
    let degenerate = emb.dim() == 1;
    if let (Some(weights), Some(alpha)) = (&emb.exact_weights, &emb.alpha_exact) {
        let worst = emb
            .support
            .par_iter()
            .map(|&v| {
                let sum: BigRational = emb
                    .support
                    .iter()
                    .zip(weights)
                    .map(|(&w, q)| q * BigInt::from(dist.get(w, v)))
                    .sum();
                (sum - alpha).abs()
            })
            .max()
            .unwrap_or_else(BigRational::zero);
        return Ok(HyperplaneReport {
            max_support_deviation: rational_to_f64(&worst),
            exact: true,
            degenerate,
            satisfied: worst.is_zero(),
        });
    }
    let worst = emb
        .support
        .iter()
        .map(|&v| (emb.row(v).iter().sum::<f64>() - emb.alpha).abs())
        .fold(0.0, f64::max);
    Ok(HyperplaneReport {
        max_support_deviation: worst,
        exact: false,
        degenerate,
        satisfied: worst <= AUDIT_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    /// Smallest, over support vertices `v`, of the mean `l_inf` distance
    /// from `phi(v)` to the support images (the `v` term included as 0).
    pub min_avg_linf: f64,
    /// `diam / (2m)`.
    pub bound: f64,
    pub satisfied: bool,
    /// Mean `l1` distance over all ordered support pairs, self-pairs included.
    pub mean_l1: f64,
    /// Per-vertex mean `l1` distances to the support, extremes.
    pub min_avg_l1: f64,
    pub max_avg_l1: f64,
    /// `max_avg_l1 * m / diam`: how far the separation exceeds the scale
    /// `diam / m`.
    pub sharpness_constant: f64,
}

/// Checks that support images are, on average, `diam / (2m)` apart in `l_inf`.
pub fn separation_check(emb: &Embedding, diam: u32) -> SeparationReport {
    let m = emb.dim();
    let stats: Vec<(f64, f64)> = emb
        .support
        .par_iter()
        .map(|&v| {
            let (sum_inf, sum_l1) = emb.support.iter().fold((0.0, 0.0), |(a, b), &w| {
                (a + linf(emb.row(v), emb.row(w)), b + l1(emb.row(v), emb.row(w)))
            });
            (sum_inf / m as f64, sum_l1 / m as f64)
        })
        .collect();
    let bound = diam as f64 / (2 * m) as f64;
    let min_avg_linf = stats.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let min_avg_l1 = stats.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let max_avg_l1 = stats.iter().map(|s| s.1).fold(0.0, f64::max);
    let mean_l1 = stats.iter().map(|s| s.1).sum::<f64>() / m as f64;
    SeparationReport {
        min_avg_linf,
        bound,
        satisfied: min_avg_linf >= bound - AUDIT_TOL,
        mean_l1,
        min_avg_l1,
        max_avg_l1,
        sharpness_constant: if diam == 0 { 0.0 } else { max_avg_l1 * m as f64 / diam as f64 },
    }
}

fn retain_columns(emb: &Embedding, keep: &[usize]) -> Result<Embedding> {
    if keep.is_empty() {
        return Err(Error::AllCoordinatesDropped);
    }
    let n = emb.n();
    let mut coords = Vec::with_capacity(n * keep.len());
    for v in 0..n {
        let row = emb.row(v);
        coords.extend(keep.iter().map(|&j| row[j]));
    }
    let exact_weights = emb
        .exact_weights
        .as_ref()
        .map(|e| keep.iter().map(|&j| e[j].clone()).collect::<Vec<_>>());
    let mut out = Embedding {
        support: keep.iter().map(|&j| emb.support[j]).collect(),
        weights: keep.iter().map(|&j| emb.weights[j]).collect(),
        exact_weights,
        alpha: 0.0,
        alpha_exact: None,
        coords,
        n,
        reduced: keep.len() < emb.dim() || emb.reduced,
    };
    out.alpha = (0..n)
        .map(|v| out.row(v).iter().sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(out)
}

/// Keeps the columns whose weight is at least `threshold`, without
/// renormalizing. `alpha` becomes the largest retained row sum.
pub fn drop_small_coordinates(emb: &Embedding, threshold: f64) -> Result<Embedding> {
    if threshold <= 0.0 {
        return Ok(emb.clone());
    }
    let keep: Vec<usize> = (0..emb.dim()).filter(|&j| emb.weights[j] >= threshold).collect();
    retain_columns(emb, &keep)
}

/// Keeps the `k` heaviest columns (ties to the smaller vertex), in
/// ascending vertex order.
pub fn keep_top_coordinates(emb: &Embedding, k: usize) -> Result<Embedding> {
    let mut order: Vec<usize> = (0..emb.dim()).collect();
    order.sort_by(|&a, &b| emb.weights[b].total_cmp(&emb.weights[a]).then(a.cmp(&b)));
    order.truncate(k);
    order.sort_unstable();
    retain_columns(emb, &order)
}

/// Projects every row onto `x_1 + ... + x_m = 0` by subtracting its mean.
pub fn center_project(points: &DMatrix<f64>) -> DMatrix<f64> {
    let m = points.ncols() as f64;
    let mut out = points.clone();
    for mut row in out.row_iter_mut() {
        let mean = row.sum() / m;
        row.add_scalar_mut(-mean);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    /// `n x target_dim` projected points.
    pub points: DMatrix<f64>,
    /// Principal axes as columns, `dim x target_dim`.
    pub components: DMatrix<f64>,
    pub explained_variance_ratio: Vec<f64>,
}

/// Projects mean-centered `points` onto their top `target_dim` principal
/// axes. Each axis is signed so that its largest-magnitude entry is positive.
pub fn pca_reduce(points: &DMatrix<f64>, target_dim: usize) -> Result<Pca> {
    let (n, dim) = points.shape();
    if target_dim > dim || target_dim == 0 {
        return Err(Error::InvalidParameter(format!(
            "target dimension {target_dim} not in 1..={dim}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("no points".into()));
    }
    let mean = points.row_mean();
    let mut centered = points.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let cov = centered.tr_mul(&centered) / (n.max(2) - 1) as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let total: f64 = eig.eigenvalues.iter().map(|l| l.max(0.0)).sum();
    let mut components = DMatrix::zeros(dim, target_dim);
    let mut ratios = Vec::with_capacity(target_dim);
    for (k, &i) in order.iter().take(target_dim).enumerate() {
        let mut axis = eig.eigenvectors.column(i).clone_owned();
        let lead = (0..dim).fold(0, |best, j| if axis[j].abs() > axis[best].abs() { j } else { best });
        if axis[lead] < 0.0 {
            axis.neg_mut();
        }
        components.set_column(k, &axis);
        ratios.push(if total > 0.0 { eig.eigenvalues[i].max(0.0) / total } else { 0.0 });
    }
    Ok(Pca {
        points: &centered * &components,
        components,
        explained_variance_ratio: ratios,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub pairs: u64,
    /// Pairs `u != v` mapped to the same point.
    pub collapsed_pairs: u64,
    /// Median of `d(u, v) / ||phi(u) - phi(v)||_1` over non-collapsed
    /// pairs; `None` when every pair collapsed.
    pub median_ratio: Option<f64>,
    /// Scale `c_G = 1 / median_ratio`, so the scaled median ratio is 1.
    pub c_g: Option<f64>,
    /// Fraction of non-collapsed pairs with scaled ratio in `[1/2, 3/2]`.
    pub in_band_fraction: f64,
    /// Lower edges of the scaled-ratio histogram bins; the last bin is open.
    pub bin_edges: Vec<f64>,
    pub histogram: Vec<u64>,
}

/// Distribution of `d / ||phi(u) - phi(v)||_1`, over all pairs if there are
/// at most `sample_pairs` of them, else over a seeded sample.
pub fn distortion_report(emb: &Embedding, dist: &DistanceMatrix, sample_pairs_count: usize, seed: u64) -> Result<DistortionReport> {
    check_rows(emb, dist)?;
    if sample_pairs_count == 0 {
        return Err(Error::InvalidParameter("sample_pairs must be positive".into()));
    }
    let n = emb.n();
    let total_pairs = n * n.saturating_sub(1) / 2;
    let pairs: Vec<(usize, usize)> = if total_pairs <= sample_pairs_count {
        (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect()
    } else {
        sample_pairs(n, sample_pairs_count, seed)
    };
    let mut ratios = Vec::with_capacity(pairs.len());
    let mut collapsed = 0;
    for &(u, v) in &pairs {
        let norm = l1(emb.row(u), emb.row(v));
        if norm == 0.0 {
            collapsed += 1;
        } else {
            ratios.push(dist.get(u, v) as f64 / norm);
        }
    }
    ratios.sort_by(f64::total_cmp);
    let median_ratio = match ratios.len() {
        0 => None,
        k if k % 2 == 1 => Some(ratios[k / 2]),
        k => Some(0.5 * (ratios[k / 2 - 1] + ratios[k / 2])),
    };
    let c_g = median_ratio.map(|r| 1.0 / r);
    let bin_edges: Vec<f64> = (0..12).map(|i| 0.25 * i as f64).collect();
    let mut histogram = vec![0u64; bin_edges.len()];
    let mut in_band = 0u64;
    for r in &ratios {
        let s = r * c_g.unwrap_or(1.0);
        in_band += (0.5..=1.5).contains(&s) as u64;
        let bin = ((s / 0.25).floor() as usize).min(bin_edges.len() - 1);
        histogram[bin] += 1;
    }
    Ok(DistortionReport {
        pairs: pairs.len() as u64,
        collapsed_pairs: collapsed,
        median_ratio,
        c_g,
        in_band_fraction: if ratios.is_empty() { 0.0 } else { in_band as f64 / ratios.len() as f64 },
        bin_edges,
        histogram,
    })
}

/// Spearman rank correlation with average ranks for ties.
pub fn rank_correlation(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(x: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
        let mut r = vec![0.0; x.len()];
        let mut start = 0;
        while start < idx.len() {
            let mut end = start + 1;
            while end < idx.len() && x[idx[end]] == x[idx[start]] {
                end += 1;
            }
            let avg = (start + end - 1) as f64 / 2.0;
            for &i in &idx[start..end] {
                r[i] = avg;
            }
            start = end;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Exact alpha rendered as `p/q`, if known.
pub fn alpha_string(emb: &Embedding) -> Option<String> {
    emb.alpha_exact.as_ref().map(format_rational)
}
