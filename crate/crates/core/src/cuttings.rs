//! `k`-shallow cuttings: monotone staircases over a point set.
//!
//! In the red orientation a coordinate `q` is counted against the base points
//! it dominates (base points up and to the left of `q`). The staircase
//! `c_1 d_1 c_2 ... d_{t-1} c_t` rises from left to right; every corner has
//! between `k` and `2k` base points in its upper-left quadrant, and the cell of
//! an outward corner `c_i` is that quadrant, `(-inf, x(c_i)) x (y(c_i), +inf)`.
//! A point inside some cell lies above the curve (shallow); everything else is
//! on or below it (deep).
//!
//! The blue orientation is the point reflection of the red one: cells are the
//! lower-right quadrants `(x(c_i), +inf) x (-inf, y(c_i))`, and counts are
//! taken over base points that dominate the coordinate.
//!
//! Construction is one left-to-right sweep. The first outward corner sits just
//! right of the `2k`-th point at `y = -inf`; from every outward corner the
//! curve climbs to the inward corner that leaves exactly `k` points in the
//! quadrant (a selection over the `2k`-point conflict list), then runs right
//! until the quadrant holds `2k` points again. If the points run out the last
//! outward corner is placed at `x = +inf`.

use serde::Serialize;

use crate::dominance::{Coord, Key, Point, PointSet};
use crate::iomodel::IoTally;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Red,
    Blue,
}

/// Where a query coordinate falls relative to a staircase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Inside the cell of this outward corner (above a red staircase, below a
    /// blue one). The leftmost containing cell is reported.
    Shallow(usize),
    /// On the curve or on the far side of it.
    Deep,
}

#[derive(Debug, Clone)]
pub struct StaircaseCutting {
    orientation: Orientation,
    k: usize,
    outward: Vec<Coord>,
    inward: Vec<Coord>,
    offsets: Vec<usize>,
    members: Vec<usize>,
}

impl StaircaseCutting {
    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of outward corners, `t`.
    pub fn len(&self) -> usize {
        self.outward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outward.is_empty()
    }

    /// Outward corners in increasing x.
    pub fn outward_corners(&self) -> &[Coord] {
        &self.outward
    }

    /// Inward corners in increasing x; one fewer than the outward corners.
    pub fn inward_corners(&self) -> &[Coord] {
        &self.inward
    }

    /// Indices into the base set of the points inside cell `i`, in x order.
    pub fn cell(&self, i: usize) -> &[usize] {
        &self.members[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn cell_sizes(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn classify(&self, q: &Point) -> Placement {
        self.classify_coord(q.coord())
    }

    pub fn classify_coord(&self, q: Coord) -> Placement {
        match self.orientation {
            Orientation::Red => {
                // Corners rise left to right, so the first corner right of q
                // has the lowest cell floor among those that could hold it.
                let i = self.outward.partition_point(|c| c.x <= q.x);
                match self.outward.get(i) {
                    Some(c) if c.y < q.y => Placement::Shallow(i),
                    _ => Placement::Deep,
                }
            }
            Orientation::Blue => {
                let left = self.outward.partition_point(|c| c.x < q.x);
                let j = self.outward[..left].partition_point(|c| c.y <= q.y);
                if j < left {
                    Placement::Shallow(j)
                } else {
                    Placement::Deep
                }
            }
        }
    }
}

/// Builds a `k`-shallow cutting on red points (cells are upper-left quadrants).
pub fn build_red_cutting(base: &PointSet, k: usize, tally: &IoTally) -> StaircaseCutting {
    assert!(k >= 1, "cutting parameter must be positive");
    let frame: Vec<Coord> = base.points().iter().map(Point::coord).collect();
    let sweep = sweep(&frame, k, tally);
    StaircaseCutting {
        orientation: Orientation::Red,
        k,
        outward: sweep.outward,
        inward: sweep.inward,
        offsets: sweep.offsets,
        members: sweep.members,
    }
}

/// Builds a `k`-shallow cutting on blue points (cells are lower-right
/// quadrants), by sweeping the reflected point set.
pub fn build_blue_cutting(base: &PointSet, k: usize, tally: &IoTally) -> StaircaseCutting {
    assert!(k >= 1, "cutting parameter must be positive");
    let n = base.len();
    let frame: Vec<Coord> = base
        .points()
        .iter()
        .rev()
        .map(|p| p.coord().reflect())
        .collect();
    let sweep = sweep(&frame, k, tally);

    let outward = sweep.outward.iter().rev().map(|c| c.reflect()).collect();
    let inward = sweep.inward.iter().rev().map(|c| c.reflect()).collect();
    let mut offsets = Vec::with_capacity(sweep.offsets.len());
    let mut members = Vec::with_capacity(sweep.members.len());
    offsets.push(0);
    for w in sweep.offsets.windows(2).rev() {
        members.extend(sweep.members[w[0]..w[1]].iter().rev().map(|&j| n - 1 - j));
        offsets.push(members.len());
    }
    StaircaseCutting {
        orientation: Orientation::Blue,
        k,
        outward,
        inward,
        offsets,
        members,
    }
}

struct Sweep {
    outward: Vec<Coord>,
    inward: Vec<Coord>,
    offsets: Vec<usize>,
    members: Vec<usize>,
}

fn sweep(pts: &[Coord], k: usize, tally: &IoTally) -> Sweep {
    let n = pts.len();
    tally.charge_scan::<Point>(n);
    let spill = !tally
        .params()
        .fits((2 * k as u64).saturating_mul(<Point as crate::iomodel::Record>::WORDS));

    let mut out = Sweep {
        outward: Vec::new(),
        inward: Vec::new(),
        offsets: vec![0],
        members: Vec::new(),
    };

    if n <= 2 * k {
        out.outward.push(Coord {
            x: Coord::X_INF,
            y: Key::BOTTOM,
        });
        out.members.extend(0..n);
        out.offsets.push(n);
        charge_output(&out, tally);
        return out;
    }

    let mut conflict: Vec<usize> = (0..2 * k).collect();
    let mut pos = 2 * k;
    let mut corner = Coord {
        x: pts[2 * k - 1].x + 1,
        y: Key::BOTTOM,
    };
    let mut keys = Vec::with_capacity(2 * k);
    'corners: loop {
        out.outward.push(corner);
        out.members.extend_from_slice(&conflict);
        out.offsets.push(out.members.len());

        // Climb: keep the k highest points of the conflict list.
        keys.clear();
        keys.extend(conflict.iter().map(|&i| pts[i].y));
        let nth = keys.len() - (k + 1);
        let (_, pivot, _) = keys.select_nth_unstable(nth);
        let floor = pivot.just_above();
        conflict.retain(|&i| pts[i].y > floor);
        debug_assert_eq!(conflict.len(), k);
        out.inward.push(Coord {
            x: corner.x,
            y: floor,
        });
        if spill {
            // Selection pass over the on-disk conflict list, then the pruned
            // list is written and read back for the next corner.
            tally.charge_scan::<Point>(2 * k);
            tally.charge_write::<Point>(k);
            tally.charge_scan::<Point>(k);
        }

        // Run right until the quadrant holds 2k points again.
        while pos < n {
            let p = pts[pos];
            pos += 1;
            if p.y > floor {
                conflict.push(pos - 1);
                if conflict.len() == 2 * k {
                    corner = Coord {
                        x: p.x + 1,
                        y: floor,
                    };
                    continue 'corners;
                }
            }
        }
        out.outward.push(Coord {
            x: Coord::X_INF,
            y: floor,
        });
        out.members.extend_from_slice(&conflict);
        out.offsets.push(out.members.len());
        break;
    }
    charge_output(&out, tally);
    out
}

fn charge_output(sweep: &Sweep, tally: &IoTally) {
    tally.charge_write::<Point>(sweep.outward.len() + sweep.inward.len());
    tally.charge_write::<Point>(sweep.members.len());
    tally.charge_write::<u64>(sweep.offsets.len());
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dominance::{reduce_inversions, Color, ValueList};
    use crate::iomodel::EmParams;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tally() -> IoTally {
        IoTally::new(EmParams::new(1024, 32).unwrap())
    }

    fn perm(n: usize, seed: u64) -> PointSet {
        let mut v: Vec<f64> = (0..n).map(|i| i as f64).collect();
        v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        reduce_inversions(&ValueList::new(v).unwrap()).0
    }

    /// Base points in the quadrant a corner counts, by enumeration.
    fn quadrant(c: &Coord, base: &PointSet, o: Orientation) -> usize {
        base.points()
            .iter()
            .filter(|p| match o {
                Orientation::Red => c.dominates(&p.coord()),
                Orientation::Blue => p.coord().dominates(c),
            })
            .count()
    }

    fn check_properties(cut: &StaircaseCutting, base: &PointSet) {
        let k = cut.k();
        let n = base.len();
        let o = cut.orientation();
        assert_eq!(cut.inward_corners().len() + 1, cut.len());
        assert!(cut.len() <= (n / k).max(1), "t={} n={n} k={k}", cut.len());
        for w in cut.outward_corners().windows(2) {
            assert!(w[0].x < w[1].x && w[0].y < w[1].y);
        }
        for c in cut.outward_corners().iter().chain(cut.inward_corners()) {
            let q = quadrant(c, base, o);
            if n > 2 * k {
                assert!(
                    (k..=2 * k).contains(&q),
                    "corner count {q} outside [{k}, {}]",
                    2 * k
                );
            } else {
                assert_eq!(q, n);
            }
        }
        for i in 0..cut.len() {
            let c = cut.outward_corners()[i];
            let want: Vec<usize> = (0..n)
                .filter(|&j| {
                    let p = base.points()[j].coord();
                    match o {
                        Orientation::Red => c.dominates(&p),
                        Orientation::Blue => p.dominates(&c),
                    }
                })
                .collect();
            assert_eq!(cut.cell(i), &want[..]);
        }
    }

    #[test]
    fn empty_base() {
        let base = PointSet::empty(Color::Red);
        let cut = build_red_cutting(&base, 3, &tally());
        assert_eq!(cut.len(), 1);
        assert!(cut.cell(0).is_empty());
        let cut = build_blue_cutting(&PointSet::empty(Color::Blue), 3, &tally());
        assert_eq!(cut.len(), 1);
    }

    #[test]
    fn k_at_least_n_gives_one_cell() {
        let base = perm(30, 1);
        for cut in [
            build_red_cutting(&base, 30, &tally()),
            build_blue_cutting(&base, 45, &tally()),
        ] {
            assert_eq!(cut.len(), 1);
            assert_eq!(cut.cell(0).len(), 30);
            for p in base.points() {
                assert_eq!(cut.classify(p), Placement::Shallow(0));
            }
        }
    }

    #[test]
    fn random_permutation_red_k10() {
        let base = perm(200, 7);
        let cut = build_red_cutting(&base, 10, &tally());
        check_properties(&cut, &base);
        assert!(cut.len() <= 40);
    }

    #[test]
    fn random_permutation_blue_k10() {
        let base = perm(200, 8);
        let cut = build_blue_cutting(&base, 10, &tally());
        check_properties(&cut, &base);
    }

    #[test]
    fn classify_examples() {
        let base = perm(100, 3);
        let cut = build_red_cutting(&base, 5, &tally());
        // Left of and above every corner: dominated by c_1.
        let q = Coord {
            x: -10,
            y: Key { value: 1e9, tie: 0 },
        };
        assert_eq!(cut.classify_coord(q), Placement::Shallow(0));
        for c in cut.outward_corners().iter().chain(cut.inward_corners()) {
            assert_eq!(cut.classify_coord(*c), Placement::Deep);
        }
        let blue = build_blue_cutting(&base, 5, &tally());
        for c in blue.outward_corners().iter().chain(blue.inward_corners()) {
            assert_eq!(blue.classify_coord(*c), Placement::Deep);
        }
    }

    #[test]
    fn deep_query_dominates_many() {
        let base = perm(120, 11);
        let k = 6;
        let cut = build_red_cutting(&base, k, &tally());
        let mut found = false;
        for x in 0..=121u64 {
            for y in 0..120 {
                let q = Point::new(x, y as f64 + 0.5, x).coord();
                let count = quadrant(&q, &base, Orientation::Red);
                if count > 2 * k {
                    found = true;
                    assert_eq!(cut.classify_coord(q), Placement::Deep);
                }
                if count < k {
                    assert!(matches!(cut.classify_coord(q), Placement::Shallow(_)));
                }
            }
        }
        assert!(found);
    }

    #[test]
    fn classify_reports_leftmost_containing_cell() {
        for seed in 0..20 {
            let base = perm(150, 100 + seed);
            let queries = perm(150, 200 + seed);
            for cut in [
                build_red_cutting(&base, 4, &tally()),
                build_blue_cutting(&base, 4, &tally()),
            ] {
                for q in queries.points() {
                    let c = q.coord();
                    let first =
                        cut.outward_corners()
                            .iter()
                            .position(|corner| match cut.orientation() {
                                Orientation::Red => corner.dominates(&c),
                                Orientation::Blue => c.dominates(corner),
                            });
                    match first {
                        Some(i) => assert_eq!(cut.classify(q), Placement::Shallow(i)),
                        None => assert_eq!(cut.classify(q), Placement::Deep),
                    }
                }
            }
        }
    }

    #[test]
    fn construction_is_linear_in_blocks() {
        let base = perm(4000, 5);
        for k in [1, 8, 64, 600] {
            let t = tally();
            build_red_cutting(&base, k, &t);
            let blocks = t.params().blocks_for(4000, 2);
            assert!(
                t.counts().total() <= 8 * blocks,
                "k={k} io={:?}",
                t.counts()
            );
        }
    }
}
