//! Red-blue cells for a cap `K`.
//!
//! Each recursion level with parameter `N` (halved every level) works on the
//! still-unresolved red set `R` and blue set `B`, using `k = ceil(2K / N)`:
//!
//! 1. A red cutting on `R`. Every blue point inside a cell is assigned to the
//!    leftmost such cell; that cell's red points are the reds in it. Deep
//!    blue points move on. More than `N / 2` deep blues means failure.
//! 2. A blue cutting on the deep blues. Every red point inside a (blue) cell
//!    is assigned to it, the cell's blue points being the deep blues in it.
//!    More than `N / 2` deep reds means failure.
//! 3. Recurse on deep reds against deep blues.
//!
//! Every domination pair ends up in exactly one cell. Failure can only happen
//! when the input holds more than `K` pairs. The recursion ends once either
//! side is empty; when `k` reaches half the red set the first cutting
//! degenerates to one cell holding everything, which empties the deep set.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::cuttings::{build_blue_cutting, build_red_cutting, Placement, StaircaseCutting};
use crate::dominance::{dominates, Color, Point, PointSet};
use crate::iomodel::IoTally;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    /// From the cutting on red points.
    Red,
    /// From the cutting on deep blue points.
    Blue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub kind: CellKind,
    pub level: usize,
    /// The level's `N`, which `K / N` bounds refer to.
    pub level_n: u64,
    pub red: Vec<Point>,
    pub blue: Vec<Point>,
}

impl Cell {
    /// `|R_i| * |B_i|`.
    pub fn weight(&self) -> u64 {
        self.red.len() as u64 * self.blue.len() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelSummary {
    pub level: usize,
    pub n: u64,
    pub k: u64,
    pub red: usize,
    pub blue: usize,
    pub red_corners: usize,
    pub blue_corners: usize,
    pub deep_blue: usize,
    pub deep_red: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RedBlueCells {
    pub cells: Vec<Cell>,
    pub cap: u64,
    pub outcome: Outcome,
    pub levels: Vec<LevelSummary>,
}

impl RedBlueCells {
    pub fn is_success(&self) -> bool {
        self.outcome == Outcome::Success
    }

    /// `S = sum |R_i| |B_i|`.
    pub fn sample_space(&self) -> u64 {
        self.cells.iter().map(Cell::weight).sum()
    }
}

/// `ceil(2K / N)`, at least one.
pub fn cutting_parameter(cap: u64, n: u64) -> u64 {
    let n = n.max(1) as u128;
    ((2 * cap as u128).div_ceil(n)).clamp(1, u64::MAX as u128) as u64
}

/// Builds red-blue cells with cap `K >= 1`.
///
/// The level parameter starts at `max(|R|, |B|)`. Failure is returned as
/// [`Outcome::Failure`] with the cells built so far.
pub fn build_cells(red: &PointSet, blue: &PointSet, cap: u64, tally: &IoTally) -> RedBlueCells {
    assert!(cap >= 1, "cap must be positive");
    let mut out = RedBlueCells {
        cells: Vec::new(),
        cap,
        outcome: Outcome::Success,
        levels: Vec::new(),
    };
    let mut reds = red.points().to_vec();
    let mut blues = blue.points().to_vec();
    let mut n = reds.len().max(blues.len()) as u64;
    let mut level = 0;

    while !reds.is_empty() && !blues.is_empty() {
        let k64 = cutting_parameter(cap, n);
        // A parameter at or above the set size behaves the same as any larger one.
        let k = k64.min(reds.len().max(blues.len()) as u64) as usize;
        let mut summary = LevelSummary {
            level,
            n,
            k: k64,
            red: reds.len(),
            blue: blues.len(),
            red_corners: 0,
            blue_corners: 0,
            deep_blue: 0,
            deep_red: 0,
        };

        let red_set = PointSet::from_sorted(reds, Color::Red);
        let red_cut = build_red_cutting(&red_set, k, tally);
        let (assigned, deep_blues) = assign(&red_cut, &blues, tally);
        summary.red_corners = red_cut.len();
        summary.deep_blue = deep_blues.len();
        if 2 * deep_blues.len() as u64 > n {
            out.levels.push(summary);
            out.outcome = Outcome::Failure;
            return out;
        }
        push_cells(
            &mut out.cells,
            CellKind::Red,
            level,
            n,
            &red_cut,
            red_set.points(),
            assigned,
        );

        if deep_blues.is_empty() {
            out.levels.push(summary);
            break;
        }

        let blue_set = PointSet::from_sorted(deep_blues, Color::Blue);
        let blue_cut = build_blue_cutting(&blue_set, k, tally);
        let (assigned, deep_reds) = assign(&blue_cut, red_set.points(), tally);
        summary.blue_corners = blue_cut.len();
        summary.deep_red = deep_reds.len();
        out.levels.push(summary);
        if 2 * deep_reds.len() as u64 > n {
            out.outcome = Outcome::Failure;
            return out;
        }
        push_cells(
            &mut out.cells,
            CellKind::Blue,
            level,
            n,
            &blue_cut,
            blue_set.points(),
            assigned,
        );

        reds = deep_reds;
        blues = blue_set.into_points();
        n /= 2;
        level += 1;
    }
    out
}

/// Classifies x-sorted queries against a cutting. Returns the shallow queries
/// grouped by cell and the deep ones in x order.
fn assign(
    cut: &StaircaseCutting,
    queries: &[Point],
    tally: &IoTally,
) -> (Vec<Vec<Point>>, Vec<Point>) {
    // Synchronized scan of queries and corners; outputs are written once.
    tally.charge_scan::<Point>(queries.len());
    tally.charge_scan::<Point>(cut.len());
    let mut cells = vec![Vec::new(); cut.len()];
    let mut deep = Vec::new();
    for q in queries {
        match cut.classify(q) {
            Placement::Shallow(i) => cells[i].push(*q),
            Placement::Deep => deep.push(*q),
        }
    }
    tally.charge_write::<Point>(queries.len());
    tally.charge_write::<u64>(cut.len() + 1);
    (cells, deep)
}

fn push_cells(
    cells: &mut Vec<Cell>,
    kind: CellKind,
    level: usize,
    level_n: u64,
    cut: &StaircaseCutting,
    base: &[Point],
    assigned: Vec<Vec<Point>>,
) {
    for (i, queries) in assigned.into_iter().enumerate() {
        let members = cut.cell(i);
        // Cells with an empty side hold no pairs.
        if queries.is_empty() || members.is_empty() {
            continue;
        }
        let own: Vec<Point> = members.iter().map(|&j| base[j]).collect();
        let (red, blue) = match kind {
            CellKind::Red => (own, queries),
            CellKind::Blue => (queries, own),
        };
        cells.push(Cell {
            kind,
            level,
            level_n,
            red,
            blue,
        });
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PropertyViolation {
    #[error("cells were built with outcome failure")]
    NotSuccessful,
    #[error("cell {cell} holds a point that is not in the input")]
    ForeignPoint { cell: usize },
    #[error("domination pair (r.x={red_x}, b.x={blue_x}) is in no cell")]
    PairMissing { red_x: u64, blue_x: u64 },
    #[error("domination pair (r.x={red_x}, b.x={blue_x}) is in {cells:?}")]
    PairDuplicated {
        red_x: u64,
        blue_x: u64,
        cells: Vec<usize>,
    },
}

/// Measured constants of a successful cell family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub cells: usize,
    /// `max_i min(|R_i|, |B_i|) / ceil(K / N_level)`.
    pub a_level: f64,
    /// `max_i min(|R_i|, |B_i|) / max(1, K / N)` with the top-level `N`.
    pub a_top: f64,
    /// `sum |R_i| / N`.
    pub c_red: f64,
    /// `sum |B_i| / N`.
    pub c_blue: f64,
    /// Domination pairs found across all cells; equals `K*` when B holds.
    pub pairs: u64,
}

/// Checks property B exactly by enumeration and measures the constants of
/// properties A and C. Intended for inputs of a few thousand points.
pub fn audit_cells(
    cells: &RedBlueCells,
    red: &PointSet,
    blue: &PointSet,
) -> Result<AuditReport, PropertyViolation> {
    if !cells.is_success() {
        return Err(PropertyViolation::NotSuccessful);
    }
    let n = red.len().max(blue.len()).max(1) as f64;
    let k = cells.cap as f64;
    let red_x: HashMap<u64, Point> = red.points().iter().map(|p| (p.x, *p)).collect();
    let blue_x: HashMap<u64, Point> = blue.points().iter().map(|p| (p.x, *p)).collect();

    let mut seen: HashMap<(u64, u64), Vec<usize>> = HashMap::new();
    let mut report = AuditReport {
        cells: cells.cells.len(),
        a_level: 0.0,
        a_top: 0.0,
        c_red: 0.0,
        c_blue: 0.0,
        pairs: 0,
    };
    let (mut sum_red, mut sum_blue) = (0usize, 0usize);
    for (i, cell) in cells.cells.iter().enumerate() {
        let foreign = cell.red.iter().any(|p| red_x.get(&p.x) != Some(p))
            || cell.blue.iter().any(|p| blue_x.get(&p.x) != Some(p));
        if foreign {
            return Err(PropertyViolation::ForeignPoint { cell: i });
        }
        let small = cell.red.len().min(cell.blue.len()) as f64;
        let level_unit = (cells.cap as f64 / cell.level_n.max(1) as f64)
            .ceil()
            .max(1.0);
        report.a_level = report.a_level.max(small / level_unit);
        report.a_top = report.a_top.max(small / (k / n).max(1.0));
        sum_red += cell.red.len();
        sum_blue += cell.blue.len();
        for b in &cell.blue {
            for r in &cell.red {
                if dominates(b, r) {
                    seen.entry((r.x, b.x)).or_default().push(i);
                }
            }
        }
    }
    report.c_red = sum_red as f64 / n;
    report.c_blue = sum_blue as f64 / n;

    let mut expected = 0u64;
    for b in blue.points() {
        for r in red.points() {
            if !dominates(b, r) {
                continue;
            }
            expected += 1;
            match seen.get(&(r.x, b.x)) {
                None => {
                    return Err(PropertyViolation::PairMissing {
                        red_x: r.x,
                        blue_x: b.x,
                    })
                }
                Some(c) if c.len() > 1 => {
                    return Err(PropertyViolation::PairDuplicated {
                        red_x: r.x,
                        blue_x: b.x,
                        cells: c.clone(),
                    })
                }
                Some(_) => {}
            }
        }
    }
    report.pairs = expected;
    Ok(report)
}
