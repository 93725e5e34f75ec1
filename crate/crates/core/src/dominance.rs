//! Domain types for red-blue dominance counting, the reduction from inversion
//! counting, and the reference counters every other module is checked against.
//!
//! A list `L` becomes two identical point sets holding `(i, L(i))`. A blue
//! point `b` dominates a red point `r` when `b` lies strictly to the right of
//! `r` and strictly below it. Values are compared together with a tiebreak
//! (the original index), so equal values never form a domination pair and
//! every coordinate is part of a strict total order.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fenwick::Fenwick;

/// Largest supported list length. Keeps every count below `2^62`.
pub const MAX_LEN: usize = 1 << 31;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InputError {
    #[error("value at position {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("list has {len} values, more than the supported {MAX_LEN}")]
    TooLong { len: usize },
    #[error("points are not strictly increasing in x at position {index}")]
    Unsorted { index: usize },
}

/// The input list `L(1..N)` of finite reals.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValueList {
    values: Vec<f64>,
}

impl ValueList {
    pub fn new(mut values: Vec<f64>) -> Result<Self, InputError> {
        if values.len() > MAX_LEN {
            return Err(InputError::TooLong { len: values.len() });
        }
        for (index, v) in values.iter_mut().enumerate() {
            if !v.is_finite() {
                return Err(InputError::NonFinite { index, value: *v });
            }
            // -0.0 and 0.0 compare equal as reals.
            if *v == 0.0 {
                *v = 0.0;
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `N(N-1)/2`, the largest possible inversion count for this length.
    pub fn max_inversions(&self) -> u64 {
        let n = self.len() as u64;
        n * n.saturating_sub(1) / 2
    }
}

impl TryFrom<Vec<f64>> for ValueList {
    type Error = InputError;

    fn try_from(values: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(values)
    }
}

/// A y-coordinate in the strict total order: value first, then tiebreak.
///
/// Tiebreaks are stored doubled. Points of the input always carry even
/// tiebreaks, which leaves the odd ones free for coordinates that must sit
/// strictly between two consecutive input keys (staircase corners).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Key {
    pub value: f64,
    pub tie: i64,
}

impl Key {
    pub const TOP: Key = Key {
        value: f64::INFINITY,
        tie: 0,
    };
    pub const BOTTOM: Key = Key {
        value: f64::NEG_INFINITY,
        tie: 0,
    };

    /// The key immediately above `self` and below every larger input key.
    pub fn just_above(self) -> Key {
        Key {
            value: self.value,
            tie: self.tie + 1,
        }
    }

    /// Point reflection through the origin; reverses the order.
    pub fn reflect(self) -> Key {
        Key {
            value: -self.value,
            tie: -self.tie,
        }
    }
}

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        // NaN never enters a key: ValueList rejects it and sentinels are
        // infinities.
        self.value
            .partial_cmp(&other.value)
            .expect("keys are never NaN")
            .then(self.tie.cmp(&other.tie))
    }
}

/// A position in the plane on the doubled grid. Input points occupy even x;
/// odd x and the `i64::MAX` sentinels are reserved for staircase corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Coord {
    pub x: i64,
    pub y: Key,
}

impl Coord {
    pub const X_INF: i64 = i64::MAX;

    pub fn reflect(self) -> Coord {
        Coord {
            x: -self.x,
            y: self.y.reflect(),
        }
    }

    /// Strict dominance: `self` is to the right of and below `other`.
    pub fn dominates(&self, other: &Coord) -> bool {
        self.x > other.x && self.y < other.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: u64,
    pub y: f64,
    pub tiebreak: u64,
}

impl Point {
    pub fn new(x: u64, y: f64, tiebreak: u64) -> Self {
        Self { x, y, tiebreak }
    }

    pub fn key(&self) -> Key {
        Key {
            value: self.y,
            tie: 2 * self.tiebreak as i64,
        }
    }

    pub fn coord(&self) -> Coord {
        Coord {
            x: 2 * self.x as i64,
            y: self.key(),
        }
    }
}

/// True iff blue point `b` dominates red point `r`: `x(b) > x(r)` and
/// `(y(b), tiebreak(b)) < (y(r), tiebreak(r))`.
pub fn dominates(b: &Point, r: &Point) -> bool {
    b.x > r.x && b.key() < r.key()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Color {
    Red,
    Blue,
}

/// Points of one color sorted strictly by x.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSet {
    points: Vec<Point>,
    color: Color,
}

impl PointSet {
    pub fn new(points: Vec<Point>, color: Color) -> Result<Self, InputError> {
        if let Some(index) = points.windows(2).position(|w| w[0].x >= w[1].x) {
            return Err(InputError::Unsorted { index: index + 1 });
        }
        Ok(Self { points, color })
    }

    /// Callers guarantee strict x order (subsequences of a valid set).
    pub(crate) fn from_sorted(points: Vec<Point>, color: Color) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0].x < w[1].x));
        Self { points, color }
    }

    pub fn empty(color: Color) -> Self {
        Self {
            points: Vec::new(),
            color,
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn color(&self) -> Color {
        self.color
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CountResult {
    pub count: u64,
}

impl From<u64> for CountResult {
    fn from(count: u64) -> Self {
        Self { count }
    }
}

/// Maps `L` to red and blue sets both equal to `{(i, L(i))}` with the
/// tiebreak set to the 1-based index.
pub fn reduce_inversions(list: &ValueList) -> (PointSet, PointSet) {
    let points: Vec<Point> = list
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| Point::new(i as u64 + 1, v, i as u64 + 1))
        .collect();
    (
        PointSet::from_sorted(points.clone(), Color::Red),
        PointSet::from_sorted(points, Color::Blue),
    )
}

/// Exhaustive `O(N_r * N_b)` enumeration of domination pairs.
pub fn brute_force_count(red: &PointSet, blue: &PointSet) -> CountResult {
    let mut count = 0;
    for b in blue.points() {
        for r in red.points() {
            if r.x >= b.x {
                break;
            }
            if b.key() < r.key() {
                count += 1;
            }
        }
    }
    CountResult { count }
}

/// Textbook merge-sort inversion counter on the raw values.
pub fn mergesort_count(list: &ValueList) -> CountResult {
    let mut values = list.values().to_vec();
    let mut scratch = vec![0.0; values.len()];
    CountResult {
        count: sort_count(&mut values, &mut scratch),
    }
}

fn sort_count(values: &mut [f64], scratch: &mut [f64]) -> u64 {
    let n = values.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (lo, hi) = values.split_at_mut(mid);
        let (slo, shi) = scratch.split_at_mut(mid);
        sort_count(lo, slo) + sort_count(hi, shi)
    };
    let (mut i, mut j, mut out) = (0, mid, 0);
    while i < mid && j < n {
        // Equal values are taken from the left run and never counted.
        if values[j] < values[i] {
            scratch[out] = values[j];
            count += (mid - i) as u64;
            j += 1;
        } else {
            scratch[out] = values[i];
            i += 1;
        }
        out += 1;
    }
    scratch[out..out + mid - i].copy_from_slice(&values[i..mid]);
    out += mid - i;
    scratch[out..out + n - j].copy_from_slice(&values[j..n]);
    values.copy_from_slice(&scratch[..n]);
    count
}

/// In-memory red-blue dominance count for two x-sorted slices.
///
/// Ranks are taken over the smaller side only, so the cost is
/// `O((N_r + N_b) log min(N_r, N_b))` comparisons.
pub fn count_pairs_ram(red: &[Point], blue: &[Point]) -> u64 {
    if red.is_empty() || blue.is_empty() {
        return 0;
    }
    if red.len() <= blue.len() {
        let mut keys: Vec<Key> = red.iter().map(Point::key).collect();
        keys.sort_unstable();
        let mut tree = Fenwick::new(keys.len());
        let mut inserted = 0u64;
        let mut ri = 0;
        let mut total = 0;
        for b in blue {
            while ri < red.len() && red[ri].x < b.x {
                let rank = keys.partition_point(|k| *k < red[ri].key());
                tree.add(rank, 1);
                inserted += 1;
                ri += 1;
            }
            let not_above = keys.partition_point(|k| *k <= b.key());
            total += inserted - tree.prefix(not_above);
        }
        total
    } else {
        let mut keys: Vec<Key> = blue.iter().map(Point::key).collect();
        keys.sort_unstable();
        let mut tree = Fenwick::new(keys.len());
        let mut bi = blue.len();
        let mut total = 0;
        for r in red.iter().rev() {
            while bi > 0 && blue[bi - 1].x > r.x {
                bi -= 1;
                let rank = keys.partition_point(|k| *k < blue[bi].key());
                tree.add(rank, 1);
            }
            total += tree.prefix(keys.partition_point(|k| *k < r.key()));
        }
        total
    }
}
