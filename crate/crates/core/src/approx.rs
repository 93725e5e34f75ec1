//! Linear-time `(1 ± ε)` estimation of inversion and dominance counts.
//!
//! Three regimes, tried in order:
//! 1. capped counting with `K = N`, exact when it succeeds;
//! 2. red-blue cells with `K = ceil(N^1.5 log2 N)` and `N` pair samples drawn
//!    uniformly from the cell sample space of size `S`, reporting `X S / N`;
//! 3. `N` uniform pairs from `R x B`, reporting `X |R| |B| / N`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cells::{build_cells, Cell};
use crate::counting::{count_capped_ram, saturation_cap, CappedOutcome, RAM_PARAMS};
use crate::dominance::{dominates, reduce_inversions, Point, PointSet, ValueList};
use crate::iomodel::IoTally;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    ExactSmall,
    CellSampling,
    UniformSampling,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub regime: Regime,
    /// `S`, only in the cell sampling regime.
    pub sample_space: Option<u64>,
    /// `X`, dominating pairs among the samples.
    pub hits: u64,
    pub samples: u64,
    /// Relative error the regime targets.
    pub epsilon_bound: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SamplerError {
    #[error("the cells hold no red-blue pair")]
    EmptySampleSpace,
}

/// Walker/Vose alias table over integer weights. Column `i` keeps itself when
/// a uniform draw in `0..total` lands below `keep[i]` and its alias otherwise,
/// so every outcome has probability exactly `w_i / total`.
#[derive(Debug, Clone)]
struct AliasTable {
    keep: Vec<u128>,
    alias: Vec<usize>,
    total: u128,
}

impl AliasTable {
    fn new(weights: &[u64]) -> Option<Self> {
        let total: u128 = weights.iter().map(|&w| w as u128).sum();
        if total == 0 {
            return None;
        }
        let n = weights.len() as u128;
        let mut scaled: Vec<u128> = weights.iter().map(|&w| w as u128 * n).collect();
        let mut keep = vec![total; weights.len()];
        let mut alias: Vec<usize> = (0..weights.len()).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) =
            (0..weights.len()).partition(|&i| scaled[i] < total);
        while let (Some(s), Some(&l)) = (small.pop(), large.last()) {
            keep[s] = scaled[s];
            alias[s] = l;
            scaled[l] -= total - scaled[s];
            if scaled[l] < total {
                large.pop();
                small.push(l);
            }
        }
        Some(Self { keep, alias, total })
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> usize {
        let column = rng.random_range(0..self.keep.len());
        if rng.random_range(0..self.total) < self.keep[column] {
            column
        } else {
            self.alias[column]
        }
    }
}

/// Uniform sampler over the `S = sum |R_i| |B_i|` red-blue pairs of a cell
/// family.
#[derive(Debug, Clone)]
pub struct PairSampler<'c> {
    cells: &'c [Cell],
    table: AliasTable,
    sample_space: u64,
}

impl<'c> PairSampler<'c> {
    pub fn new(cells: &'c [Cell]) -> Result<Self, SamplerError> {
        let weights: Vec<u64> = cells.iter().map(Cell::weight).collect();
        let table = AliasTable::new(&weights).ok_or(SamplerError::EmptySampleSpace)?;
        Ok(Self {
            cells,
            table,
            sample_space: weights.iter().sum(),
        })
    }

    pub fn sample_space(&self) -> u64 {
        self.sample_space
    }

    pub fn weights(&self) -> Vec<u64> {
        self.cells.iter().map(Cell::weight).collect()
    }
}

/// Draws a cell with probability `|R_i||B_i| / S`, then a red and a blue point
/// of it uniformly. Returns `(r, b, i)`.
pub fn draw_cell_pair<R: Rng>(sampler: &PairSampler<'_>, rng: &mut R) -> (Point, Point, usize) {
    let i = sampler.table.draw(rng);
    let cell = &sampler.cells[i];
    let r = cell.red[rng.random_range(0..cell.red.len())];
    let b = cell.blue[rng.random_range(0..cell.blue.len())];
    (r, b, i)
}

/// Independent uniform red and blue points. Both sets must be nonempty.
pub fn draw_uniform_pair<R: Rng>(red: &[Point], blue: &[Point], rng: &mut R) -> (Point, Point) {
    let r = red[rng.random_range(0..red.len())];
    let b = blue[rng.random_range(0..blue.len())];
    (r, b)
}

pub fn estimate_inversions(list: &ValueList, seed: u64) -> Estimate {
    let (red, blue) = reduce_inversions(list);
    estimate_dominance(&red, &blue, seed)
}

/// Cap used for the cell sampling regime.
pub fn middle_cap(red: &PointSet, blue: &PointSet) -> u64 {
    let n = red.len().max(blue.len()) as f64;
    let k = (n.powf(1.5) * n.log2()).ceil() as u64;
    k.min(saturation_cap(red, blue)).max(1)
}

pub fn estimate_dominance(red: &PointSet, blue: &PointSet, seed: u64) -> Estimate {
    let n = red.len().max(blue.len()) as u64;
    let mut est = Estimate {
        value: 0.0,
        regime: Regime::ExactSmall,
        sample_space: None,
        hits: 0,
        samples: 0,
        epsilon_bound: 0.0,
        seed,
    };
    if red.is_empty() || blue.is_empty() {
        return est;
    }
    if let CappedOutcome::Exact(k) = count_capped_ram(red, blue, n.max(1)) {
        est.value = k as f64;
        return est;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nf = n as f64;
    est.samples = n;
    let cells = build_cells(red, blue, middle_cap(red, blue), &IoTally::new(RAM_PARAMS));
    if cells.is_success() {
        est.regime = Regime::CellSampling;
        est.epsilon_bound = nf.log2() / nf.powf(0.25);
        let Ok(sampler) = PairSampler::new(&cells.cells) else {
            // No pair lies in any cell, so no pair dominates.
            est.sample_space = Some(0);
            return est;
        };
        est.hits = (0..n)
            .filter(|_| {
                let (r, b, _) = draw_cell_pair(&sampler, &mut rng);
                dominates(&b, &r)
            })
            .count() as u64;
        est.sample_space = Some(sampler.sample_space());
        est.value = est.hits as f64 * sampler.sample_space() as f64 / nf;
        return est;
    }

    uniform_sampling(red, blue, est, &mut rng)
}

/// The uniform pair estimator alone, whatever the instance's regime.
pub fn estimate_uniform(red: &PointSet, blue: &PointSet, seed: u64) -> Estimate {
    let est = Estimate {
        value: 0.0,
        regime: Regime::UniformSampling,
        sample_space: None,
        hits: 0,
        samples: red.len().max(blue.len()) as u64,
        epsilon_bound: 0.0,
        seed,
    };
    if red.is_empty() || blue.is_empty() {
        return est;
    }
    uniform_sampling(red, blue, est, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn uniform_sampling(
    red: &PointSet,
    blue: &PointSet,
    mut est: Estimate,
    rng: &mut ChaCha8Rng,
) -> Estimate {
    let n = red.len().max(blue.len()) as u64;
    let nf = n as f64;
    est.regime = Regime::UniformSampling;
    est.samples = n;
    est.epsilon_bound = nf.powf(-0.25);
    est.hits = (0..n)
        .filter(|_| {
            let (r, b) = draw_uniform_pair(red.points(), blue.points(), rng);
            dominates(&b, &r)
        })
        .count() as u64;
    est.value = est.hits as f64 * (red.len() as f64 * blue.len() as f64) / nf;
    est
}
