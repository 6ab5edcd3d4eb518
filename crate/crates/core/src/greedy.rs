//! Greedy remote-vertex selection with exact incremental bookkeeping.
//!
//! The state keeps, for every vertex `v`, the integer `S(v)`, the sum of
//! distances from `v` to the current list, together with the pair sum
//! `F_m = sum_{i,j} d(x_i, x_j)`. Appending `x` updates
//! `F <- F + 2 S(x)` and `S <- S + D[x]`, so a step costs `O(n)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BoundarySet, DistanceMatrix};
use crate::measure::{default_support_threshold, VertexMeasure};

/// How to pick among several vertices with the maximal distance sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    SmallestIndex,
    /// Smallest-index maximizer inside the boundary, falling back to the
    /// smallest index overall.
    PreferBoundary,
    /// Uniform choice among maximizers from a ChaCha8 stream.
    Seeded(u64),
}

#[derive(Debug, Clone)]
pub struct GreedyState<'a> {
    dist: &'a DistanceMatrix,
    sequence: Vec<usize>,
    counts: Vec<u64>,
    sums: Vec<u64>,
    pair_sum: u64,
    max_sum: u64,
    first_argmax: usize,
    tie_break: TieBreak,
    boundary_mask: Option<Vec<bool>>,
    rng: Option<ChaCha8Rng>,
}

impl<'a> GreedyState<'a> {
    pub fn new(dist: &'a DistanceMatrix, initial: &[usize]) -> Result<Self> {
        if initial.is_empty() {
            return Err(Error::EmptyInitialList);
        }
        let n = dist.n();
        if let Some(&vertex) = initial.iter().find(|&&v| v >= n) {
            return Err(Error::BadVertex { vertex, n });
        }
        let mut counts = vec![0u64; n];
        let mut sums = vec![0u64; n];
        for &x in initial {
            counts[x] += 1;
            for (s, &d) in sums.iter_mut().zip(dist.row(x)) {
                *s += d as u64;
            }
        }
        let pair_sum = initial.iter().map(|&x| sums[x]).sum();
        let (first_argmax, max_sum) = argmax(&sums);
        Ok(GreedyState {
            dist,
            sequence: initial.to_vec(),
            counts,
            sums,
            pair_sum,
            max_sum,
            first_argmax,
            tie_break: TieBreak::SmallestIndex,
            boundary_mask: None,
            rng: None,
        })
    }

    /// Sets the tie-break rule. [`TieBreak::PreferBoundary`] needs the
    /// boundary of the graph the distances came from.
    pub fn with_tie_break(mut self, tie_break: TieBreak, boundary: Option<&BoundarySet>) -> Result<Self> {
        match tie_break {
            TieBreak::PreferBoundary => {
                let b = boundary.ok_or_else(|| {
                    Error::InvalidParameter("boundary tie-break needs the graph boundary".into())
                })?;
                self.boundary_mask = Some(b.mask(self.dist.n()));
            }
            TieBreak::Seeded(seed) => self.rng = Some(ChaCha8Rng::seed_from_u64(seed)),
            TieBreak::SmallestIndex => {}
        }
        self.tie_break = tie_break;
        Ok(self)
    }

    pub fn dist(&self) -> &'a DistanceMatrix {
        self.dist
    }

    /// Length of the list.
    pub fn m(&self) -> usize {
        self.sequence.len()
    }

    pub fn sequence(&self) -> &[usize] {
        &self.sequence
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `S(v) = sum_i d(v, x_i)`.
    pub fn sums(&self) -> &[u64] {
        &self.sums
    }

    /// `F_m = sum_{i,j} d(x_i, x_j)`.
    pub fn pair_sum(&self) -> u64 {
        self.pair_sum
    }

    pub fn max_sum(&self) -> u64 {
        self.max_sum
    }

    /// All vertices attaining `max S`.
    pub fn maximizers(&self) -> Vec<usize> {
        (0..self.sums.len()).filter(|&v| self.sums[v] == self.max_sum).collect()
    }

    /// `E_m = F_m / (m (m - 1))`, undefined for `m = 1`.
    pub fn energy(&self) -> Option<f64> {
        let m = self.m() as f64;
        (self.m() >= 2).then(|| self.pair_sum as f64 / (m * (m - 1.0)))
    }

    /// `T_m(v) = S(v) / m`.
    pub fn transport_costs(&self) -> Vec<f64> {
        let m = self.m() as f64;
        self.sums.iter().map(|&s| s as f64 / m).collect()
    }

    pub fn max_transport(&self) -> f64 {
        self.max_sum as f64 / self.m() as f64
    }

    /// `|max_v T_m(v) - E_m|`.
    pub fn gap(&self) -> Option<f64> {
        self.energy().map(|e| (self.max_transport() - e).abs())
    }

    pub fn empirical_measure(&self) -> VertexMeasure {
        VertexMeasure::from_counts(&self.counts).expect("list is nonempty")
    }

    /// Recomputes `S` and `F` from the list alone.
    pub fn recompute(&self) -> (Vec<u64>, u64) {
        let n = self.dist.n();
        let mut sums = vec![0u64; n];
        for &x in &self.sequence {
            for (s, &d) in sums.iter_mut().zip(self.dist.row(x)) {
                *s += d as u64;
            }
        }
        let pair_sum = (0..n).map(|v| self.counts[v] * sums[v]).sum();
        (sums, pair_sum)
    }

    fn choose(&mut self) -> usize {
        match self.tie_break {
            TieBreak::SmallestIndex => self.first_argmax,
            TieBreak::PreferBoundary => {
                let mask = self.boundary_mask.as_ref().unwrap();
                (self.first_argmax..self.sums.len())
                    .find(|&v| mask[v] && self.sums[v] == self.max_sum)
                    .unwrap_or(self.first_argmax)
            }
            TieBreak::Seeded(_) => {
                let candidates = self.maximizers();
                let rng = self.rng.as_mut().unwrap();
                candidates[rng.random_range(0..candidates.len())]
            }
        }
    }

    /// Appends a vertex maximizing the distance sum and returns it.
    pub fn greedy_step(&mut self) -> Result<usize> {
        let x = self.choose();
        let overflow = Error::Overflow { steps: self.m() };
        self.pair_sum = self
            .sums[x]
            .checked_mul(2)
            .and_then(|twice| self.pair_sum.checked_add(twice))
            .ok_or(overflow)?;
        self.counts[x] += 1;
        self.sequence.push(x);
        let mut best = 0;
        let mut best_at = 0;
        for (v, (s, &d)) in self.sums.iter_mut().zip(self.dist.row(x)).enumerate() {
            *s += d as u64;
            if *s > best {
                best = *s;
                best_at = v;
            }
        }
        self.max_sum = best;
        self.first_argmax = best_at;
        Ok(x)
    }
}

fn argmax(values: &[u64]) -> (usize, u64) {
    values
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0), |(bi, bv), (i, v)| if v > bv { (i, v) } else { (bi, bv) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Greedy steps to take at most (not counting the initial list).
    pub max_steps: usize,
    /// Record the energy every `sample_every` steps; 0 disables the trace.
    pub sample_every: usize,
    /// Stop once `|max T_m - E_m| <= stop_gap`. Defaults to `1e-3 * diam`.
    pub stop_gap: Option<f64>,
    /// Do not stop before the list has this many entries. Defaults to
    /// `ceil(diam / stop_gap)`, the resolution at which `T_m` and `E_m`
    /// can move by less than the gap per step.
    pub min_len: Option<usize>,
    /// Mass threshold of the concentration diagnostic.
    pub concentration_eps: Option<f64>,
    /// Allowed shortfall of `T_m` below its maximum on heavy vertices.
    /// Defaults to `1e-2 * diam`.
    pub concentration_tol: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_steps: 100_000,
            sample_every: 100,
            stop_gap: None,
            min_len: None,
            concentration_eps: None,
            concentration_tol: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub m: usize,
    pub energy: f64,
    pub max_transport: f64,
}

/// Heavy vertices must nearly attain the maximal transport cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationCheck {
    pub eps_mass: f64,
    pub tolerance: f64,
    /// Vertices with `mu_m(v) > eps_mass` and `T_m(v) < max T_m - tolerance`.
    pub violators: Vec<usize>,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub steps: usize,
    pub m: usize,
    pub converged: bool,
    pub diam: u32,
    pub stop_gap: f64,
    /// `F_m`, the exact numerator of the energy.
    pub pair_sum: u64,
    /// `E_m = F_m / (m (m - 1))`.
    pub energy: f64,
    pub max_transport: f64,
    pub gap: f64,
    pub alpha_estimate: f64,
    pub trace: Vec<TracePoint>,
    pub concentration: ConcentrationCheck,
}

/// Iterates [`GreedyState::greedy_step`] until the gap criterion holds or
/// `max_steps` is reached. Running out of steps is reported, not an error.
pub fn run(state: &mut GreedyState<'_>, config: &RunConfig) -> Result<ConvergenceReport> {
    if config.max_steps == 0 {
        return Err(Error::InvalidParameter("max_steps must be at least 1".into()));
    }
    let diam = state.dist.diam();
    let final_len = (state.m() + config.max_steps) as u128;
    if final_len * final_len * diam as u128 > u64::MAX as u128 {
        return Err(Error::Overflow {
            steps: final_len as usize,
        });
    }
    let stop_gap = config.stop_gap.unwrap_or(1e-3 * diam as f64);
    let min_len = config.min_len.unwrap_or_else(|| {
        if stop_gap > 0.0 {
            (diam as f64 / stop_gap).ceil() as usize
        } else {
            usize::MAX
        }
    });
    let mut trace = Vec::new();
    let mut steps = 0;
    let mut converged = false;
    while steps < config.max_steps {
        state.greedy_step()?;
        steps += 1;
        let gap = state.gap().unwrap();
        if config.sample_every > 0 && steps % config.sample_every == 0 {
            trace.push(TracePoint {
                m: state.m(),
                energy: state.energy().unwrap(),
                max_transport: state.max_transport(),
            });
        }
        if state.m() >= min_len && gap <= stop_gap {
            converged = true;
            break;
        }
    }
    let n = state.dist.n();
    let eps_mass = config.concentration_eps.unwrap_or_else(|| default_support_threshold(n));
    let tolerance = config.concentration_tol.unwrap_or(1e-2 * diam as f64);
    let m = state.m() as f64;
    let max_t = state.max_transport();
    let violators: Vec<usize> = (0..n)
        .filter(|&v| state.counts[v] as f64 / m > eps_mass && (state.sums[v] as f64 / m) < max_t - tolerance)
        .collect();
    let energy = state.energy().unwrap();
    Ok(ConvergenceReport {
        steps,
        m: state.m(),
        converged,
        diam,
        stop_gap,
        pair_sum: state.pair_sum,
        energy,
        max_transport: max_t,
        gap: state.gap().unwrap(),
        alpha_estimate: energy,
        trace,
        concentration: ConcentrationCheck {
            eps_mass,
            tolerance,
            satisfied: violators.is_empty(),
            violators,
        },
    })
}
