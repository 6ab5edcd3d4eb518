//! Probability measures on vertices: transport costs, the distance energy,
//! balance verification, exact refinement on a fixed support and
//! brute-force oracles for small graphs.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{format_rational, rational_to_f64, solve_augmented, ExactInt, IntSolution, Solve};
use crate::graph::DistanceMatrix;

/// Allowed deviation of a floating-point measure's total mass from 1.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Default tolerance for floating-point balance checks.
pub const DEFAULT_BALANCE_TOL: f64 = 1e-9;

/// A probability vector over the vertices `0..n`.
///
/// Measures produced by counting, refinement or the oracles also carry
/// their exact rational weights; checks on those run in exact arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexMeasure {
    weights: Vec<f64>,
    exact: Option<Vec<BigRational>>,
}

impl VertexMeasure {
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::NotProbability("no vertices".into()));
        }
        if let Some(v) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::NotProbability(format!(
                "weight {} at vertex {v}",
                weights[v]
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::NotProbability(format!("weights sum to {total}")));
        }
        Ok(VertexMeasure {
            weights,
            exact: None,
        })
    }

    pub fn from_rationals(exact: Vec<BigRational>) -> Result<Self> {
        if exact.is_empty() {
            return Err(Error::NotProbability("no vertices".into()));
        }
        if let Some(v) = exact.iter().position(|w| w.is_negative()) {
            return Err(Error::NotProbability(format!(
                "weight {} at vertex {v}",
                format_rational(&exact[v])
            )));
        }
        let total: BigRational = exact.iter().sum();
        if !total.is_one() {
            return Err(Error::NotProbability(format!(
                "weights sum to {}",
                format_rational(&total)
            )));
        }
        Ok(VertexMeasure {
            weights: exact.iter().map(rational_to_f64).collect(),
            exact: Some(exact),
        })
    }

    /// Normalized multiplicities `counts(v) / sum(counts)`.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::NotProbability("all counts are zero".into()));
        }
        let den = BigInt::from(total);
        Self::from_rationals(
            counts
                .iter()
                .map(|&c| BigRational::new(BigInt::from(c), den.clone()))
                .collect(),
        )
    }

    pub fn dirac(n: usize, v: usize) -> Result<Self> {
        let mut counts = vec![0; n];
        *counts.get_mut(v).ok_or(Error::BadVertex { vertex: v, n })? = 1;
        Self::from_counts(&counts)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_counts(&vec![1; n])
    }

    pub fn uniform_on(n: usize, vertices: &[usize]) -> Result<Self> {
        let mut counts = vec![0; n];
        for &v in vertices {
            *counts.get_mut(v).ok_or(Error::BadVertex { vertex: v, n })? = 1;
        }
        Self::from_counts(&counts)
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, v: usize) -> f64 {
        self.weights[v]
    }

    pub fn exact_weights(&self) -> Option<&[BigRational]> {
        self.exact.as_deref()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Vertices with strictly positive mass.
    pub fn support(&self) -> Vec<usize> {
        match &self.exact {
            Some(exact) => (0..self.n()).filter(|&v| exact[v].is_positive()).collect(),
            None => (0..self.n()).filter(|&v| self.weights[v] > 0.0).collect(),
        }
    }

    fn check_dim(&self, dist: &DistanceMatrix) -> Result<()> {
        if self.n() != dist.n() {
            return Err(Error::DimensionMismatch {
                expected: dist.n(),
                got: self.n(),
            });
        }
        Ok(())
    }
}

/// `T(w) = sum_u d(w, u) mu(u)` for every vertex `w`.
pub fn transport_costs(mu: &VertexMeasure, dist: &DistanceMatrix) -> Result<Vec<f64>> {
    mu.check_dim(dist)?;
    let support: Vec<(usize, f64)> = mu
        .weights
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, w)| w > 0.0)
        .collect();
    Ok((0..dist.n())
        .map(|w| {
            let row = dist.row(w);
            support.iter().map(|&(u, m)| row[u] as f64 * m).sum()
        })
        .collect())
}

/// Exact transport costs `T(w) = scaled[w] / scale` over a common denominator.
#[derive(Debug, Clone)]
struct ScaledCosts {
    scaled: Vec<BigInt>,
    scale: BigInt,
}

impl ScaledCosts {
    fn compute(exact: &[BigRational], dist: &DistanceMatrix) -> Self {
        let scale = exact
            .iter()
            .fold(<BigInt as One>::one(), |acc, w| acc.lcm(w.denom()));
        let numerators: Vec<(usize, BigInt)> = exact
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(u, w)| (u, w.numer() * (&scale / w.denom())))
            .collect();
        let small: Option<Vec<(usize, i64)>> = numerators
            .iter()
            .map(|(u, p)| p.to_i64().map(|p| (*u, p)))
            .collect();
        let scaled = match small {
            // i64 numerators times u16 distances summed over n <= 2^32 terms fit in i128
            Some(small) => (0..dist.n())
                .map(|w| {
                    let row = dist.row(w);
                    let s: i128 = small.iter().map(|&(u, p)| row[u] as i128 * p as i128).sum();
                    BigInt::from(s)
                })
                .collect(),
            None => (0..dist.n())
                .map(|w| {
                    let row = dist.row(w);
                    numerators
                        .iter()
                        .map(|(u, p)| p * BigInt::from(row[*u]))
                        .sum()
                })
                .collect(),
        };
        ScaledCosts { scaled, scale }
    }

    fn value(&self, w: usize) -> BigRational {
        BigRational::new(self.scaled[w].clone(), self.scale.clone())
    }
}

/// Exact transport costs of a rational measure, `None` for float-only measures.
pub fn transport_costs_exact(mu: &VertexMeasure, dist: &DistanceMatrix) -> Result<Option<Vec<BigRational>>> {
    mu.check_dim(dist)?;
    Ok(mu.exact.as_ref().map(|exact| {
        let costs = ScaledCosts::compute(exact, dist);
        (0..dist.n()).map(|w| costs.value(w)).collect()
    }))
}

/// The distance energy `J(mu) = <mu, D mu>`.
pub fn energy_quadratic(mu: &VertexMeasure, dist: &DistanceMatrix) -> Result<f64> {
    let t = transport_costs(mu, dist)?;
    Ok(t.iter().zip(&mu.weights).map(|(t, w)| t * w).sum())
}

pub fn energy_exact(mu: &VertexMeasure, dist: &DistanceMatrix) -> Result<Option<BigRational>> {
    let Some(costs) = transport_costs_exact(mu, dist)? else {
        return Ok(None);
    };
    let exact = mu.exact.as_ref().unwrap();
    Ok(Some(costs.iter().zip(exact).map(|(t, w)| t * w).sum()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub is_balanced: bool,
    /// Whether the verdict was reached in exact rational arithmetic.
    pub exact: bool,
    pub tolerance: f64,
    pub support: Vec<usize>,
    /// Vertices with `T(v) >= max T - tolerance`.
    pub argmax_set: Vec<usize>,
    pub max_transport: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_transport_exact: Option<String>,
    /// `max - min` of `T` over the support.
    pub support_spread: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_spread_exact: Option<String>,
}

/// Checks that every vertex carrying mass attains the maximal transport cost.
///
/// Exact measures are compared in rational arithmetic; with `tol == 0` the
/// comparison is an exact equality.
pub fn is_balanced(mu: &VertexMeasure, dist: &DistanceMatrix, tol: f64) -> Result<BalanceReport> {
    mu.check_dim(dist)?;
    let support = mu.support();
    if let Some(exact) = &mu.exact {
        let costs = ScaledCosts::compute(exact, dist);
        let max = costs.scaled.iter().max().unwrap().clone();
        let in_argmax = |w: usize| {
            let gap = &max - &costs.scaled[w];
            Zero::is_zero(&gap) || (tol > 0.0 && rational_to_f64(&BigRational::new(gap, costs.scale.clone())) <= tol)
        };
        let argmax_set: Vec<usize> = (0..dist.n()).filter(|&w| in_argmax(w)).collect();
        let support_min = support.iter().map(|&v| &costs.scaled[v]).min().unwrap();
        let support_max = support.iter().map(|&v| &costs.scaled[v]).max().unwrap();
        let max_q = BigRational::new(max.clone(), costs.scale.clone());
        let spread_q = BigRational::new(support_max - support_min, costs.scale.clone());
        return Ok(BalanceReport {
            is_balanced: support.iter().all(|&v| in_argmax(v)),
            exact: true,
            tolerance: tol,
            argmax_set,
            max_transport: rational_to_f64(&max_q),
            max_transport_exact: Some(format_rational(&max_q)),
            support_spread: rational_to_f64(&spread_q),
            support_spread_exact: Some(format_rational(&spread_q)),
            support,
        });
    }
    let t = transport_costs(mu, dist)?;
    let max = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let argmax_set: Vec<usize> = (0..dist.n()).filter(|&w| t[w] >= max - tol).collect();
    let (lo, hi) = support
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(t[v]), hi.max(t[v])));
    Ok(BalanceReport {
        is_balanced: support.iter().all(|&v| t[v] >= max - tol),
        exact: false,
        tolerance: tol,
        argmax_set,
        max_transport: max,
        max_transport_exact: None,
        support_spread: hi - lo,
        support_spread_exact: None,
        support,
    })
}

/// Linear term `2 <D mu, nu>` of `J(mu + eps nu)`.
///
/// `nu` must have zero total mass and be nonnegative off the support of
/// `mu`, so that `mu + eps nu` stays a probability measure for small `eps`.
pub fn directional_derivative(mu: &VertexMeasure, nu: &[f64], dist: &DistanceMatrix) -> Result<f64> {
    if nu.len() != mu.n() {
        return Err(Error::DimensionMismatch {
            expected: mu.n(),
            got: nu.len(),
        });
    }
    let total: f64 = nu.iter().sum();
    let scale: f64 = 1.0 + nu.iter().map(|x| x.abs()).sum::<f64>();
    if total.abs() > MASS_TOLERANCE * scale {
        return Err(Error::NotAdmissible(format!("total mass {total}")));
    }
    if let Some(v) = (0..nu.len()).find(|&v| nu[v] < 0.0 && mu.weights[v] <= 0.0) {
        return Err(Error::NotAdmissible(format!(
            "negative entry {} at vertex {v} outside the support",
            nu[v]
        )));
    }
    let t = transport_costs(mu, dist)?;
    Ok(2.0 * t.iter().zip(nu).map(|(t, x)| t * x).sum::<f64>())
}

/// Default mass threshold for reading a support off an empirical measure.
pub fn default_support_threshold(n: usize) -> f64 {
    (0.5 / n as f64).max(1e-3)
}

/// `{v : mu(v) > eps}`.
pub fn extract_support(mu: &VertexMeasure, eps: f64) -> Result<Vec<usize>> {
    let support: Vec<usize> = (0..mu.n()).filter(|&v| mu.weights[v] > eps).collect();
    if support.is_empty() {
        return Err(Error::EmptySupport(eps));
    }
    Ok(support)
}

/// A balanced measure obtained by solving the equal-cost system on a support.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub support: Vec<usize>,
    pub measure: VertexMeasure,
    /// The common transport cost on the support, which is also the maximum.
    pub level: BigRational,
    pub argmax_set: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum RefineFailure {
    EmptySupport,
    Singular,
    /// The most negative weight of the solution.
    NegativeWeight { vertex: usize, weight: f64 },
    /// The off-support vertex with the largest excess over the level.
    OffSupportViolation { vertex: usize, excess: f64 },
}

impl std::fmt::Display for RefineFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RefineFailure::EmptySupport => write!(f, "empty support"),
            RefineFailure::Singular => write!(f, "singular system"),
            RefineFailure::NegativeWeight { vertex, weight } => {
                write!(f, "negative weight {weight} at vertex {vertex}")
            }
            RefineFailure::OffSupportViolation { vertex, excess } => {
                write!(f, "vertex {vertex} outside the support exceeds the level by {excess}")
            }
        }
    }
}

/// Solution of the support system before it is turned into a measure.
struct SupportSolution<T> {
    /// Weights then level, over `denominator`.
    solution: IntSolution<T>,
    /// `T(w) * denominator` for every vertex.
    scaled_costs: Vec<T>,
}

/// Solves `(D mu)(v) = c` on `support`, `mu = 0` elsewhere, `sum mu = 1`.
/// `None` signals overflow of `T`.
fn solve_support<T: ExactInt>(
    dist: &DistanceMatrix,
    support: &[usize],
) -> Option<std::result::Result<SupportSolution<T>, RefineFailure>> {
    let k = support.len();
    let w = k + 2;
    let mut aug = Vec::with_capacity((k + 1) * w);
    for &s in support {
        let row = dist.row(s);
        aug.extend(support.iter().map(|&t| T::from_i64(row[t] as i64)));
        aug.push(T::from_i64(-1));
        aug.push(T::zero());
    }
    aug.extend(std::iter::repeat_n(T::one(), k));
    aug.push(T::zero());
    aug.push(T::one());

    let solution = match solve_augmented(aug, k + 1)? {
        Solve::Singular => return Some(Err(RefineFailure::Singular)),
        Solve::Unique(sol) => sol,
    };
    let den = &solution.denominator;
    let (weights, level) = solution.numerators.split_at(k);
    let level = &level[0];
    if let Some((i, p)) = weights
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_negative())
        .fold(None::<(usize, &T)>, |best, (i, p)| match best {
            Some((_, q)) if q <= p => best,
            _ => Some((i, p)),
        })
    {
        return Some(Err(RefineFailure::NegativeWeight {
            vertex: support[i],
            weight: p.to_f64() / den.to_f64(),
        }));
    }
    let mut scaled_costs = Vec::with_capacity(dist.n());
    let mut worst: Option<(usize, T)> = None;
    for v in 0..dist.n() {
        let row = dist.row(v);
        let mut acc = T::zero();
        for (&s, p) in support.iter().zip(weights) {
            acc = acc.add(&T::from_i64(row[s] as i64).mul(p)?)?;
        }
        if acc > *level {
            let excess = acc.sub(level)?;
            if worst.as_ref().is_none_or(|(_, e)| excess > *e) {
                worst = Some((v, excess));
            }
        }
        scaled_costs.push(acc);
    }
    if let Some((vertex, excess)) = worst {
        return Some(Err(RefineFailure::OffSupportViolation {
            vertex,
            excess: excess.to_f64() / den.to_f64(),
        }));
    }
    Some(Ok(SupportSolution {
        solution,
        scaled_costs,
    }))
}

fn finish_refinement<T: ExactInt>(n: usize, support: &[usize], sol: SupportSolution<T>) -> Refinement {
    let k = support.len();
    let rationals = sol.solution.to_rationals();
    let mut exact = vec![BigRational::zero(); n];
    for (&s, w) in support.iter().zip(&rationals[..k]) {
        exact[s] = w.clone();
    }
    let level_scaled = &sol.solution.numerators[k];
    let argmax_set = (0..n).filter(|&v| sol.scaled_costs[v] == *level_scaled).collect();
    Refinement {
        support: support.to_vec(),
        measure: VertexMeasure::from_rationals(exact).expect("support system enforces unit mass"),
        level: rationals[k].clone(),
        argmax_set,
    }
}

/// Exact balanced measure supported on (a subset of) `support`.
///
/// Solves the equal-transport-cost system in rational arithmetic, then
/// requires nonnegative weights and no vertex outside the support exceeding
/// the common level.
pub fn refine_on_support(dist: &DistanceMatrix, support: &[usize]) -> std::result::Result<Refinement, RefineFailure> {
    if support.is_empty() {
        return Err(RefineFailure::EmptySupport);
    }
    let mut support = support.to_vec();
    support.sort_unstable();
    support.dedup();
    if let Some(res) = solve_support::<i128>(dist, &support) {
        return res.map(|sol| finish_refinement(dist.n(), &support, sol));
    }
    solve_support::<BigInt>(dist, &support)
        .expect("BigInt arithmetic does not overflow")
        .map(|sol| finish_refinement(dist.n(), &support, sol))
}

/// Repairs a candidate support by single-vertex exchanges until the
/// support system yields a balanced measure.
///
/// Negative weights drop the most negative vertex, an off-support violation
/// adds the worst violator, and a singular system drops the vertex with the
/// least `hint` mass. Gives up after `max_iter` exchanges or on revisiting a
/// support.
pub fn repair_support(
    dist: &DistanceMatrix,
    start: &[usize],
    hint: &[f64],
    max_iter: usize,
) -> std::result::Result<Refinement, RefineFailure> {
    let mut support = start.to_vec();
    support.sort_unstable();
    support.dedup();
    let mut seen = HashSet::new();
    let mut last = RefineFailure::EmptySupport;
    for _ in 0..=max_iter {
        if !seen.insert(support.clone()) {
            break;
        }
        last = match refine_on_support(dist, &support) {
            Ok(r) => return Ok(r),
            Err(e) => e,
        };
        match &last {
            RefineFailure::EmptySupport => break,
            RefineFailure::NegativeWeight { vertex, .. } => support.retain(|v| v != vertex),
            RefineFailure::OffSupportViolation { vertex, .. } => {
                let at = support.partition_point(|v| v < vertex);
                support.insert(at, *vertex);
            }
            RefineFailure::Singular => {
                let weakest = support
                    .iter()
                    .copied()
                    .min_by(|&a, &b| hint[a].total_cmp(&hint[b]).then(b.cmp(&a)))
                    .unwrap();
                support.retain(|&v| v != weakest);
            }
        }
    }
    Err(last)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    /// Exhaustive search of the simplex grid with step `1 / resolution`.
    Grid { resolution: u32 },
    /// Refinement of every support with at most `max_size` vertices.
    Supports { max_size: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleMeasure {
    pub support: Vec<usize>,
    pub measure: VertexMeasure,
    pub energy: BigRational,
    /// Vertices attaining the maximal transport cost.
    pub argmax_set: Vec<usize>,
}

/// Largest grid instance: `n <= 8` and at most this many grid points.
pub const GRID_MAX_VERTICES: usize = 8;
pub const GRID_MIN_RESOLUTION: u32 = 40;
pub const GRID_MAX_POINTS: u64 = 200_000_000;
pub const SUPPORTS_MAX_SUBSETS: u64 = 50_000_000;

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n.saturating_sub(k));
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Brute-force balanced measures for desk-scale validation.
///
/// Grid mode returns every grid maximizer of `J`. Supports mode returns,
/// in lexicographic order of support, every measure whose support is
/// exactly one of the enumerated subsets.
pub fn brute_force_balanced(dist: &DistanceMatrix, mode: OracleMode) -> Result<Vec<OracleMeasure>> {
    match mode {
        OracleMode::Grid { resolution } => grid_maximizers(dist, resolution),
        OracleMode::Supports { max_size } => enumerate_supports(dist, max_size),
    }
}

fn grid_maximizers(dist: &DistanceMatrix, resolution: u32) -> Result<Vec<OracleMeasure>> {
    let n = dist.n();
    if resolution < GRID_MIN_RESOLUTION {
        return Err(Error::InvalidParameter(format!(
            "grid resolution 1/{resolution} is coarser than 1/{GRID_MIN_RESOLUTION}"
        )));
    }
    let points = binomial(resolution as u64 + n as u64 - 1, n as u64 - 1);
    if n > GRID_MAX_VERTICES || points > GRID_MAX_POINTS {
        return Err(Error::TooLarge(format!(
            "grid search on {n} vertices at resolution 1/{resolution} ({points} points)"
        )));
    }
    let mut search = GridSearch {
        dist,
        counts: vec![0; n],
        best: -1,
        maximizers: Vec::new(),
    };
    let mut partial = vec![0i64; n];
    search.descend(0, resolution, &mut partial, 0);
    let den = BigInt::from(resolution);
    let energy = BigRational::new(BigInt::from(search.best), &den * &den);
    search
        .maximizers
        .into_iter()
        .map(|counts| {
            let measure = VertexMeasure::from_counts(&counts.iter().map(|&c| c as u64).collect::<Vec<_>>())?;
            let argmax_set = is_balanced(&measure, dist, 0.0)?.argmax_set;
            Ok(OracleMeasure {
                support: measure.support(),
                measure,
                energy: energy.clone(),
                argmax_set,
            })
        })
        .collect()
}

struct GridSearch<'a> {
    dist: &'a DistanceMatrix,
    counts: Vec<u32>,
    best: i64,
    maximizers: Vec<Vec<u32>>,
}

impl GridSearch<'_> {
    /// `partial[w] = sum_{u < idx} d(w, u) counts[u]`; `energy` is the
    /// scaled energy of the coordinates fixed so far.
    fn descend(&mut self, idx: usize, remaining: u32, partial: &mut [i64], energy: i64) {
        let n = self.counts.len();
        if idx + 1 == n {
            let energy = energy + 2 * remaining as i64 * partial[idx];
            self.counts[idx] = remaining;
            if energy > self.best {
                self.best = energy;
                self.maximizers.clear();
            }
            if energy == self.best {
                self.maximizers.push(self.counts.clone());
            }
            return;
        }
        let row = self.dist.row(idx);
        let base = partial[idx];
        for c in 0..=remaining {
            self.counts[idx] = c;
            self.descend(idx + 1, remaining - c, partial, energy + 2 * c as i64 * base);
            for w in idx + 1..n {
                partial[w] += row[w] as i64;
            }
        }
        for w in idx + 1..n {
            partial[w] -= row[w] as i64 * (remaining as i64 + 1);
        }
    }
}

fn enumerate_supports(dist: &DistanceMatrix, max_size: usize) -> Result<Vec<OracleMeasure>> {
    let n = dist.n();
    let max_size = max_size.min(n);
    let subsets: u64 = (1..=max_size as u64).map(|k| binomial(n as u64, k)).fold(0, u64::saturating_add);
    if subsets > SUPPORTS_MAX_SUBSETS {
        return Err(Error::TooLarge(format!(
            "{subsets} supports of size <= {max_size} on {n} vertices"
        )));
    }
    let mut found: Vec<OracleMeasure> = (0..n)
        .into_par_iter()
        .flat_map_iter(|first| {
            let mut out = Vec::new();
            let mut subset = vec![first];
            visit_subsets(dist, &mut subset, max_size, &mut out);
            out
        })
        .collect();
    found.sort_by(|a, b| a.support.cmp(&b.support));
    Ok(found)
}

fn visit_subsets(dist: &DistanceMatrix, subset: &mut Vec<usize>, max_size: usize, out: &mut Vec<OracleMeasure>) {
    if let Ok(r) = refine_on_support(dist, subset) {
        // zero weights mean the measure belongs to a smaller subset
        if r.measure.support().len() == subset.len() {
            let energy = energy_exact(&r.measure, dist).unwrap().unwrap();
            out.push(OracleMeasure {
                support: r.support,
                measure: r.measure,
                energy,
                argmax_set: r.argmax_set,
            });
        }
    }
    if subset.len() == max_size {
        return;
    }
    let last = *subset.last().unwrap();
    for next in last + 1..dist.n() {
        subset.push(next);
        visit_subsets(dist, subset, max_size, out);
        subset.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{all_pairs_distances, Graph};

    fn q(p: i64, r: i64) -> BigRational {
        BigRational::new(p.into(), r.into())
    }

    fn dist(n: usize, edges: &[(usize, usize)]) -> DistanceMatrix {
        all_pairs_distances(&Graph::from_edges(n, edges).unwrap()).unwrap()
    }

    fn p3() -> DistanceMatrix {
        dist(3, &[(0, 1), (1, 2)])
    }

    fn star3() -> DistanceMatrix {
        dist(4, &[(0, 1), (0, 2), (0, 3)])
    }

    fn complete(n: usize) -> DistanceMatrix {
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        dist(n, &edges)
    }

    fn half_ends() -> VertexMeasure {
        VertexMeasure::from_rationals(vec![q(1, 2), q(0, 1), q(1, 2)]).unwrap()
    }

    #[test]
    fn measure_construction() {
        assert!(VertexMeasure::from_weights(vec![0.5, 0.4]).is_err());
        assert!(VertexMeasure::from_weights(vec![1.5, -0.5]).is_err());
        assert!(VertexMeasure::from_rationals(vec![q(1, 2), q(1, 3)]).is_err());
        let m = VertexMeasure::from_counts(&[2, 0, 2]).unwrap();
        assert_eq!(m, half_ends());
        assert_eq!(m.support(), vec![0, 2]);
    }

    #[test]
    fn transport_cost_examples() {
        let t = transport_costs(&half_ends(), &p3()).unwrap();
        assert_eq!(t, vec![1.0, 1.0, 1.0]);

        let d = p3();
        let t = transport_costs(&VertexMeasure::dirac(3, 1).unwrap(), &d).unwrap();
        assert_eq!(t, vec![1.0, 0.0, 1.0]);

        let leaves = VertexMeasure::uniform_on(4, &[1, 2, 3]).unwrap();
        let t = transport_costs_exact(&leaves, &star3()).unwrap().unwrap();
        assert_eq!(t, vec![q(1, 1), q(4, 3), q(4, 3), q(4, 3)]);

        let err = transport_costs(&half_ends(), &star3()).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 4, got: 3 });
    }

    #[test]
    fn energy_examples() {
        let d = p3();
        assert_eq!(energy_quadratic(&VertexMeasure::dirac(3, 0).unwrap(), &d).unwrap(), 0.0);
        assert_eq!(energy_exact(&half_ends(), &d).unwrap().unwrap(), q(1, 1));
        for n in 2..7 {
            let u = VertexMeasure::uniform(n).unwrap();
            assert_eq!(
                energy_exact(&u, &complete(n)).unwrap().unwrap(),
                q(n as i64 - 1, n as i64)
            );
        }
    }

    #[test]
    fn balance_examples() {
        let d = p3();
        let r = is_balanced(&half_ends(), &d, 0.0).unwrap();
        assert!(r.is_balanced && r.exact);
        assert_eq!(r.argmax_set, vec![0, 1, 2]);
        assert_eq!(r.max_transport_exact.as_deref(), Some("1"));

        let r = is_balanced(&VertexMeasure::uniform(3).unwrap(), &d, 0.0).unwrap();
        assert!(!r.is_balanced);
        assert_eq!(r.argmax_set, vec![0, 2]);
        assert_eq!(r.support_spread_exact.as_deref(), Some("1/3"));

        // same verdicts through the floating-point path
        let float = VertexMeasure::from_weights(vec![1.0 / 3.0; 3]).unwrap();
        let r = is_balanced(&float, &d, DEFAULT_BALANCE_TOL).unwrap();
        assert!(!r.is_balanced && !r.exact);
        assert!((r.support_spread - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn directional_derivative_examples() {
        let d = p3();
        assert_eq!(directional_derivative(&half_ends(), &[0.0; 3], &d).unwrap(), 0.0);
        assert_eq!(directional_derivative(&half_ends(), &[-1.0, 1.0, 0.0], &d).unwrap(), 0.0);
        let uniform = VertexMeasure::uniform(3).unwrap();
        let v = directional_derivative(&uniform, &[1.0, -1.0, 0.0], &d).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-12);

        // negative mass outside the support and unbalanced total mass
        assert!(directional_derivative(&half_ends(), &[1.0, -1.0, 0.0], &d).is_err());
        assert!(directional_derivative(&half_ends(), &[0.5, 0.0, 0.0], &d).is_err());
    }

    #[test]
    fn support_extraction() {
        let m = VertexMeasure::from_weights(vec![0.5, 0.0, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(extract_support(&m, 0.01).unwrap(), vec![0, 4]);
        let u = VertexMeasure::uniform(4).unwrap();
        assert_eq!(extract_support(&u, 0.3), Err(Error::EmptySupport(0.3)));
        let m = VertexMeasure::from_weights(vec![0.999, 0.001]).unwrap();
        assert_eq!(extract_support(&m, 0.01).unwrap(), vec![0]);
        assert_eq!(default_support_threshold(10), 0.05);
        assert_eq!(default_support_threshold(10_000), 1e-3);
    }

    #[test]
    fn refine_examples() {
        let r = refine_on_support(&p3(), &[0, 2]).unwrap();
        assert_eq!(r.measure, half_ends());
        assert_eq!(r.level, q(1, 1));

        let r = refine_on_support(&star3(), &[1, 2, 3]).unwrap();
        assert_eq!(r.measure, VertexMeasure::uniform_on(4, &[1, 2, 3]).unwrap());
        assert_eq!(r.level, q(4, 3));
        assert_eq!(r.argmax_set, vec![1, 2, 3]);

        // mu = (1/2, 1/2, 0) on {0, 1} leaves T(2) = 3/2 above the level 1/2
        assert_eq!(
            refine_on_support(&p3(), &[0, 1]),
            Err(RefineFailure::OffSupportViolation { vertex: 2, excess: 1.0 })
        );
        assert_eq!(refine_on_support(&p3(), &[]), Err(RefineFailure::EmptySupport));
    }

    #[test]
    fn refine_singletons() {
        assert!(matches!(
            refine_on_support(&p3(), &[1]),
            Err(RefineFailure::OffSupportViolation { .. })
        ));
        let single = all_pairs_distances(&Graph::from_edges(1, &[]).unwrap()).unwrap();
        let r = refine_on_support(&single, &[0]).unwrap();
        assert_eq!(r.measure, VertexMeasure::dirac(1, 0).unwrap());
    }

    #[test]
    fn refine_reports_singular_and_negative() {
        // C4: the distance matrix restricted to all four vertices is singular
        let c4 = dist(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert_eq!(refine_on_support(&c4, &[0, 1, 2, 3]), Err(RefineFailure::Singular));

        // star with its center: equal costs force mass -1/2 on the center
        assert_eq!(
            refine_on_support(&star3(), &[0, 1, 2, 3]),
            Err(RefineFailure::NegativeWeight { vertex: 0, weight: -0.5 })
        );

        // P4 on {0, 1, 3}: the middle vertex gets weight exactly zero
        let p4 = dist(4, &[(0, 1), (1, 2), (2, 3)]);
        let r = refine_on_support(&p4, &[0, 1, 3]).unwrap();
        assert_eq!(r.measure.support(), vec![0, 3]);
    }

    #[test]
    fn repair_moves_to_a_balanced_support() {
        let r = repair_support(&star3(), &[0, 1, 2, 3], &[0.1, 0.3, 0.3, 0.3], 16).unwrap();
        assert_eq!(r.support, vec![1, 2, 3]);

        let c4 = dist(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let r = repair_support(&c4, &[0, 1, 2, 3], &[0.3, 0.2, 0.3, 0.2], 16).unwrap();
        assert!(is_balanced(&r.measure, &c4, 0.0).unwrap().is_balanced);
    }

    #[test]
    fn supports_oracle_examples() {
        let found = brute_force_balanced(&p3(), OracleMode::Supports { max_size: 2 }).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].measure, half_ends());

        let found = brute_force_balanced(&complete(3), OracleMode::Supports { max_size: 3 }).unwrap();
        assert!(found
            .iter()
            .any(|m| m.measure == VertexMeasure::uniform(3).unwrap()));
    }

    #[test]
    fn grid_oracle_examples() {
        let found = brute_force_balanced(&p3(), OracleMode::Grid { resolution: 40 }).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].measure, half_ends());
        assert_eq!(found[0].energy, q(1, 1));

        let found = brute_force_balanced(&complete(4), OracleMode::Grid { resolution: 40 }).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].measure, VertexMeasure::uniform(4).unwrap());

        assert!(matches!(
            brute_force_balanced(&complete(9), OracleMode::Grid { resolution: 40 }),
            Err(Error::TooLarge(_))
        ));
        assert!(matches!(
            brute_force_balanced(&p3(), OracleMode::Grid { resolution: 10 }),
            Err(Error::InvalidParameter(_))
        ));
    }
}
