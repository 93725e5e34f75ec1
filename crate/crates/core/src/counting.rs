//! Exact red-blue dominance counting.
//!
//! - [`count_nonadaptive`]: distribution-based counting in
//!   `O((N/B) log_{M/B}(min(N_r, N_b)/B))` I/Os.
//! - [`count_capped`]: red-blue cells for a cap `K`, then the distribution
//!   counter inside every cell; may fail when more than `K` pairs exist.
//! - [`count_adaptive`]: rounds of capped counting with doubly exponential caps
//!   `K_i = N B (M/B)^(2^i)` until one round succeeds.
//! - `_ram` variants of the last two for the RAM model.

use serde::Serialize;

use crate::cells::{build_cells, RedBlueCells};
use crate::dominance::{count_pairs_ram, CountResult, Key, Point, PointSet};
use crate::iomodel::{
    multiway_distribute, synchronized_scan, BlockedSeq, Cursor, EmParams, IoError, IoTally, Record,
};

/// Machine used when the I/O algorithms run in the RAM model.
pub const RAM_PARAMS: EmParams = match EmParams::new(64, 1) {
    Ok(p) => p,
    Err(_) => panic!("invalid RAM parameters"),
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "outcome", content = "count")]
pub enum CappedOutcome {
    Exact(u64),
    Failure,
}

impl CappedOutcome {
    pub fn exact(self) -> Option<u64> {
        match self {
            CappedOutcome::Exact(k) => Some(k),
            CappedOutcome::Failure => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdaptiveCount {
    pub count: u64,
    /// Rounds performed, `j`.
    pub rounds: u32,
    /// Cap used in each round.
    pub caps: Vec<u64>,
}

/// Caps `K_i = base * ratio^(2^i)` for `i = 1, 2, ...`, clamped to `N^2`.
/// Iteration stops after the first clamped cap.
#[derive(Debug, Clone)]
pub struct RoundSchedule {
    base: u64,
    ratio: u64,
    limit: u64,
    next: u32,
    done: bool,
}

impl RoundSchedule {
    /// `K_i = (N B) (M/B)^(2^i)`.
    pub fn external(n: u64, params: EmParams) -> Self {
        Self::new(
            n.saturating_mul(params.block()),
            params.blocks_in_memory(),
            n,
        )
    }

    /// `K_i = N 2^(2^i)`.
    pub fn ram(n: u64) -> Self {
        Self::new(n, 2, n)
    }

    fn new(base: u64, ratio: u64, n: u64) -> Self {
        Self {
            base: base.max(1),
            ratio: ratio.max(2),
            limit: n.saturating_mul(n).max(1),
            next: 1,
            done: false,
        }
    }

    pub fn cap(&self, round: u32) -> u64 {
        let exp = 1u128.checked_shl(round).filter(|e| *e < 64);
        let pow = exp.and_then(|e| (self.ratio as u128).checked_pow(e as u32));
        match pow.and_then(|p| p.checked_mul(self.base as u128)) {
            Some(k) if k < self.limit as u128 => k as u64,
            _ => self.limit,
        }
    }
}

impl Iterator for RoundSchedule {
    type Item = (u32, u64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let round = self.next;
        let cap = self.cap(round);
        self.done = cap >= self.limit;
        self.next += 1;
        Some((round, cap))
    }
}

/// Caps at or above this value cannot fail, so cells are skipped.
pub fn saturation_cap(red: &PointSet, blue: &PointSet) -> u64 {
    let n = red.len().max(blue.len()) as u64;
    n * n.saturating_sub(1) / 2
}

/// Buckets per distribution pass: `floor(sqrt(M/B))`, at least 2, with room
/// for the `2f` streams of the counting scan.
pub fn fanout(params: EmParams) -> Result<usize, IoError> {
    let limit = params.stream_limit();
    let f = (params.blocks_in_memory().isqrt() as usize)
        .max(2)
        .min(limit / 2);
    if f < 2 {
        return Err(IoError::MemoryTooSmall {
            mem: params.mem(),
            limit,
        });
    }
    Ok(f)
}

/// Non-adaptive distribution counter.
///
/// The smaller color is split by value into `f` contiguous buckets and the
/// other color is routed with the same splitters. One synchronized x-order
/// scan of all `2f` buckets counts every pair whose endpoints fall in
/// different buckets; pairs inside a bucket are counted recursively. A level
/// whose smaller side fits in memory is counted in memory.
pub fn count_nonadaptive(
    red: &PointSet,
    blue: &PointSet,
    tally: &IoTally,
) -> Result<CountResult, IoError> {
    let f = fanout(tally.params())?;
    let r = BlockedSeq::resident(tally, red.points().to_vec());
    let b = BlockedSeq::resident(tally, blue.points().to_vec());
    Ok(CountResult {
        count: count_seq(&r, &b, f)?,
    })
}

fn count_seq(
    red: &BlockedSeq<'_, Point>,
    blue: &BlockedSeq<'_, Point>,
    f: usize,
) -> Result<u64, IoError> {
    let (nr, nb) = (red.len(), blue.len());
    if nr == 0 || nb == 0 {
        return Ok(0);
    }
    let params = red.tally().params();
    let split_red = nr <= nb;
    let small = nr.min(nb) as u64;
    if params.fits(small * Point::WORDS) {
        return Ok(count_pairs_ram(&red.load(), &blue.load()));
    }

    // Splitter selection pass over the split side.
    let split = if split_red { red } else { blue };
    let mut keys: Vec<Key> = split.scan().map(Point::key).collect();
    keys.sort_unstable();
    let splitters: Vec<Key> = (1..f).map(|j| keys[j * keys.len() / f]).collect();
    let route = |p: &Point| splitters.partition_point(|s| *s <= p.key());

    let red_buckets = multiway_distribute(red, f, route)?;
    let blue_buckets = multiway_distribute(blue, f, route)?;
    let blue_sizes: Vec<u64> = blue_buckets.iter().map(|b| b.len() as u64).collect();

    // Blue streams first so that at equal x a blue point is visited before
    // the red one, which it does not dominate.
    let streams: Vec<&BlockedSeq<'_, Point>> =
        blue_buckets.iter().chain(red_buckets.iter()).collect();
    let mut seen = vec![0u64; f];
    let mut total = 0u64;
    synchronized_scan(
        &streams,
        |p| p.x,
        |s, _| {
            let is_blue = s < f;
            let bucket = if is_blue { s } else { s - f };
            match (split_red, is_blue) {
                // Reds seen so far in higher buckets lie above and to the left.
                (true, true) => total += seen[bucket + 1..].iter().sum::<u64>(),
                (true, false) => seen[bucket] += 1,
                // Blues not yet seen in lower buckets lie below and to the right.
                (false, true) => seen[bucket] += 1,
                (false, false) => {
                    total += (0..bucket).map(|l| blue_sizes[l] - seen[l]).sum::<u64>();
                }
            }
        },
    )?;

    for (r, b) in red_buckets.iter().zip(&blue_buckets) {
        total += count_seq(r, b, f)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy)]
enum CellCounter {
    Distribution(usize),
    Ram,
}

/// Counts the pairs inside every cell. Cells are laid out back to back in a
/// red stream and a blue stream; cells whose smaller side fits in memory are
/// read sequentially and counted in memory.
fn count_cells(
    cells: &RedBlueCells,
    tally: &IoTally,
    counter: CellCounter,
) -> Result<u64, IoError> {
    let params = tally.params();
    let mut red_cursor = Cursor::new::<Point>(tally);
    let mut blue_cursor = Cursor::new::<Point>(tally);
    let (mut red_at, mut blue_at) = (0usize, 0usize);
    let mut total = 0;
    for cell in &cells.cells {
        let (nr, nb) = (cell.red.len(), cell.blue.len());
        let small = nr.min(nb) as u64;
        match counter {
            CellCounter::Distribution(f) if !params.fits(small * Point::WORDS) => {
                let r = BlockedSeq::resident(tally, cell.red.clone());
                let b = BlockedSeq::resident(tally, cell.blue.clone());
                total += count_seq(&r, &b, f)?;
            }
            _ => {
                red_cursor.read(red_at..red_at + nr);
                blue_cursor.read(blue_at..blue_at + nb);
                total += count_pairs_ram(&cell.red, &cell.blue);
            }
        }
        red_at += nr;
        blue_at += nb;
    }
    Ok(total)
}

/// `K`-capped counting: exact whenever at most `K` pairs exist, otherwise
/// either exact or [`CappedOutcome::Failure`].
pub fn count_capped(
    red: &PointSet,
    blue: &PointSet,
    cap: u64,
    tally: &IoTally,
) -> Result<CappedOutcome, IoError> {
    let f = fanout(tally.params())?;
    if cap >= saturation_cap(red, blue) {
        return Ok(CappedOutcome::Exact(
            count_nonadaptive(red, blue, tally)?.count,
        ));
    }
    let cells = build_cells(red, blue, cap, tally);
    if !cells.is_success() {
        return Ok(CappedOutcome::Failure);
    }
    Ok(CappedOutcome::Exact(count_cells(
        &cells,
        tally,
        CellCounter::Distribution(f),
    )?))
}

/// Adaptive counting by rounds of [`count_capped`] with caps from
/// [`RoundSchedule::external`].
pub fn count_adaptive(
    red: &PointSet,
    blue: &PointSet,
    tally: &IoTally,
) -> Result<AdaptiveCount, IoError> {
    let n = red.len().max(blue.len()) as u64;
    let mut caps = Vec::new();
    for (_, cap) in RoundSchedule::external(n, tally.params()) {
        caps.push(cap);
        if let CappedOutcome::Exact(count) = count_capped(red, blue, cap, tally)? {
            return Ok(AdaptiveCount {
                count,
                rounds: caps.len() as u32,
                caps,
            });
        }
    }
    unreachable!("the last round's cap is saturated and cannot fail")
}

/// [`count_capped`] on the fixed small machine [`RAM_PARAMS`], without an
/// observable tally.
pub fn count_capped_ram(red: &PointSet, blue: &PointSet, cap: u64) -> CappedOutcome {
    let tally = IoTally::new(RAM_PARAMS);
    count_capped(red, blue, cap, &tally).expect("RAM parameters admit fanout 8")
}

/// Adaptive counting in the comparison model: rounds with `K_i = N 2^(2^i)`,
/// cells built in memory, and an in-memory comparison counter inside every
/// cell.
pub fn count_adaptive_ram(red: &PointSet, blue: &PointSet) -> AdaptiveCount {
    let n = red.len().max(blue.len()) as u64;
    let tally = IoTally::new(RAM_PARAMS);
    let mut caps = Vec::new();
    for (_, cap) in RoundSchedule::ram(n) {
        caps.push(cap);
        let count = if cap >= saturation_cap(red, blue) {
            Some(count_pairs_ram(red.points(), blue.points()))
        } else {
            let cells = build_cells(red, blue, cap, &tally);
            cells
                .is_success()
                .then(|| count_cells(&cells, &tally, CellCounter::Ram).expect("in-memory counting"))
        };
        if let Some(count) = count {
            return AdaptiveCount {
                count,
                rounds: caps.len() as u32,
                caps,
            };
        }
    }
    unreachable!("the last round's cap is saturated and cannot fail")
}
