//! Seeded instance generation with controlled inversion counts.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dominance::ValueList;
use crate::fenwick::Fenwick;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "param")]
pub enum Shape {
    Sorted,
    Reverse,
    RandomPermutation,
    /// Independent uniform reals in `[0, 1)`.
    RandomReal,
    /// A permutation with exactly `k` inversions.
    TargetInversions(u64),
    /// A permutation where the given fraction of positions copy the value of
    /// another random position.
    Duplicates(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InstanceSpec {
    pub n: usize,
    pub shape: Shape,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenerateError {
    #[error("k = {k} exceeds the {max} inversions possible for this length")]
    InfeasibleK { k: u64, max: u64 },
    #[error("duplicate fraction {0} is outside [0, 1]")]
    BadFraction(f64),
    #[error("length {0} is too large")]
    TooLong(usize),
}

pub fn max_inversions(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

pub fn generate(spec: &InstanceSpec) -> Result<ValueList, GenerateError> {
    let n = spec.n;
    if n > crate::dominance::MAX_LEN {
        return Err(GenerateError::TooLong(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let ranks = |perm: Vec<usize>| perm.into_iter().map(|v| v as f64).collect::<Vec<_>>();
    let values = match spec.shape {
        Shape::Sorted => (0..n).map(|i| i as f64).collect(),
        Shape::Reverse => (0..n).rev().map(|i| i as f64).collect(),
        Shape::RandomPermutation => {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(&mut rng);
            ranks(p)
        }
        Shape::RandomReal => (0..n).map(|_| rng.random::<f64>()).collect(),
        Shape::TargetInversions(k) => {
            let max = max_inversions(n);
            if k > max {
                return Err(GenerateError::InfeasibleK { k, max });
            }
            ranks(decode_inversion_table(&random_inversion_table(
                n, k, &mut rng,
            )))
        }
        Shape::Duplicates(fraction) => {
            if !(0.0..=1.0).contains(&fraction) {
                return Err(GenerateError::BadFraction(fraction));
            }
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(&mut rng);
            let copies = (fraction * n as f64).round() as usize;
            let mut positions: Vec<usize> = (0..n).collect();
            positions.shuffle(&mut rng);
            for &i in &positions[..copies.min(n)] {
                p[i] = p[rng.random_range(0..n)];
            }
            ranks(p)
        }
    };
    Ok(ValueList::new(values).expect("generated values are finite"))
}

/// Inversion table `b` with `0 <= b[i] <= n - 1 - i` and `sum(b) = k`.
///
/// Positions are filled in random order. Each takes a uniform amount between
/// what the unfilled positions cannot absorb and about twice its fair share of
/// the remainder, which spreads inversions over the whole list.
pub fn random_inversion_table<R: Rng>(n: usize, k: u64, rng: &mut R) -> Vec<u64> {
    assert!(k <= max_inversions(n), "infeasible inversion count");
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut table = vec![0u64; n];
    let mut rest_capacity = max_inversions(n);
    let mut remaining = k;
    for (filled, &i) in order.iter().enumerate() {
        let cap = (n - 1 - i) as u64;
        rest_capacity -= cap;
        let left = (n - filled) as u64;
        let lo = remaining.saturating_sub(rest_capacity);
        let hi = cap.min(remaining);
        let hi = hi.min(lo.max(2 * remaining / left));
        let b = rng.random_range(lo..=hi);
        table[i] = b;
        remaining -= b;
    }
    debug_assert_eq!(remaining, 0);
    table
}

/// Permutation of `0..n` whose element at position `i` exceeds exactly
/// `table[i]` of the elements after it.
pub fn decode_inversion_table(table: &[u64]) -> Vec<usize> {
    let mut free = Fenwick::ones(table.len());
    table
        .iter()
        .map(|&b| {
            let v = free.select(b);
            free.sub(v, 1);
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dominance::mergesort_count;

    fn gen(n: usize, shape: Shape, seed: u64) -> ValueList {
        generate(&InstanceSpec { n, shape, seed }).unwrap()
    }

    #[test]
    fn spec_examples() {
        assert_eq!(mergesort_count(&gen(10, Shape::Sorted, 0)).count, 0);
        assert_eq!(
            mergesort_count(&gen(10, Shape::TargetInversions(7), 0)).count,
            7
        );
        assert_eq!(mergesort_count(&gen(10, Shape::Reverse, 0)).count, 45);
    }

    #[test]
    fn target_counts_are_exact() {
        for n in [0usize, 1, 2, 5, 31, 200] {
            let max = max_inversions(n);
            for k in [0, 1, max / 3, max / 2, max.saturating_sub(1), max]
                .into_iter()
                .filter(|&k| k <= max)
            {
                for seed in 0..5 {
                    let l = gen(n, Shape::TargetInversions(k), seed);
                    assert_eq!(mergesort_count(&l).count, k, "n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn infeasible_and_bad_params() {
        let err = generate(&InstanceSpec {
            n: 10,
            shape: Shape::TargetInversions(46),
            seed: 0,
        });
        assert_eq!(err, Err(GenerateError::InfeasibleK { k: 46, max: 45 }));
        let err = generate(&InstanceSpec {
            n: 10,
            shape: Shape::Duplicates(1.5),
            seed: 0,
        });
        assert!(matches!(err, Err(GenerateError::BadFraction(_))));
    }

    #[test]
    fn decode_matches_definition() {
        let table = [2u64, 0, 1, 0];
        let p = decode_inversion_table(&table);
        assert_eq!(p, vec![2, 0, 3, 1]);
    }

    #[test]
    fn deterministic_per_seed() {
        for shape in [
            Shape::RandomPermutation,
            Shape::RandomReal,
            Shape::Duplicates(0.3),
        ] {
            assert_eq!(gen(100, shape, 9), gen(100, shape, 9));
            assert_ne!(gen(100, shape, 9), gen(100, shape, 10));
        }
    }

    #[test]
    fn duplicates_repeat_values() {
        let l = gen(1000, Shape::Duplicates(0.3), 1);
        let mut v = l.values().to_vec();
        v.sort_by(f64::total_cmp);
        v.dedup();
        assert!(v.len() < 850 && v.len() > 650, "{}", v.len());
    }

    #[test]
    fn targets_spread_over_the_list() {
        // A mid-range target should not pile all inversions into a prefix.
        let n = 4096;
        let l = gen(n, Shape::TargetInversions(20_000), 3);
        let v = l.values();
        let displaced = (0..n).filter(|&i| v[i] != i as f64).count();
        assert!(displaced > n / 4, "{displaced}");
    }
}
