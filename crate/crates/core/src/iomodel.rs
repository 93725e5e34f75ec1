//! Simulated external memory.
//!
//! A machine has `M` words of memory and a disk of `B`-word blocks. Data
//! lives in [`BlockedSeq`]s bound to one [`IoTally`]; every primitive charges
//! block transfers analytically as records cross block boundaries. Work on a
//! working set that fits in memory is free.
//!
//! Each open stream reserves two blocks (double buffering), so at most
//! `M / (2B)` streams may be open at once.

use std::cell::Cell;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dominance::Point;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IoError {
    #[error("invalid machine parameters M={mem}, B={block}: need B >= 1 and M >= 2B")]
    InvalidParams { mem: u64, block: u64 },
    #[error("fanout {fanout} exceeds the {limit} streams that fit in memory")]
    FanoutTooLarge { fanout: usize, limit: usize },
    #[error("{streams} streams exceed the {limit} that fit in memory")]
    TooManyStreams { streams: usize, limit: usize },
    #[error("memory of {mem} words holds {limit} streams; distribution needs at least 4")]
    MemoryTooSmall { mem: u64, limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EmParams {
    mem: u64,
    block: u64,
}

impl EmParams {
    pub const fn new(mem: u64, block: u64) -> Result<Self, IoError> {
        if block == 0 || mem < 2 * block {
            return Err(IoError::InvalidParams { mem, block });
        }
        Ok(Self { mem, block })
    }

    /// Words of main memory, `M`.
    pub fn mem(&self) -> u64 {
        self.mem
    }

    /// Words per block, `B`.
    pub fn block(&self) -> u64 {
        self.block
    }

    /// `M / B`.
    pub fn blocks_in_memory(&self) -> u64 {
        self.mem / self.block
    }

    /// Streams that can be open at once, `floor(M / 2B)`.
    pub fn stream_limit(&self) -> usize {
        (self.mem / (2 * self.block)) as usize
    }

    /// Whether a working set of `words` fits next to one double-buffered
    /// stream.
    pub fn fits(&self, words: u64) -> bool {
        words.saturating_add(2 * self.block) <= self.mem
    }

    /// Blocks occupied by `records` records of `width` words.
    pub fn blocks_for(&self, records: u64, width: u64) -> u64 {
        (records * width).div_ceil(self.block)
    }
}

/// Fixed-width record stored on the simulated disk.
pub trait Record: Clone {
    const WORDS: u64;
}

impl Record for Point {
    const WORDS: u64 = 2;
}

impl Record for u64 {
    const WORDS: u64 = 1;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IoCounts {
    pub reads: u64,
    pub writes: u64,
}

impl IoCounts {
    pub fn total(&self) -> u64 {
        self.reads + self.writes
    }
}

impl std::ops::Sub for IoCounts {
    type Output = IoCounts;

    fn sub(self, rhs: Self) -> Self::Output {
        IoCounts {
            reads: self.reads - rhs.reads,
            writes: self.writes - rhs.writes,
        }
    }
}

/// Block read/write counters for one single-threaded execution context.
#[derive(Debug)]
pub struct IoTally {
    params: EmParams,
    reads: Cell<u64>,
    writes: Cell<u64>,
}

impl IoTally {
    pub fn new(params: EmParams) -> Self {
        Self {
            params,
            reads: Cell::new(0),
            writes: Cell::new(0),
        }
    }

    pub fn params(&self) -> EmParams {
        self.params
    }

    pub fn reads(&self) -> u64 {
        self.reads.get()
    }

    pub fn writes(&self) -> u64 {
        self.writes.get()
    }

    pub fn counts(&self) -> IoCounts {
        IoCounts {
            reads: self.reads(),
            writes: self.writes(),
        }
    }

    pub fn charge_reads(&self, blocks: u64) {
        self.reads.set(self.reads.get() + blocks);
    }

    pub fn charge_writes(&self, blocks: u64) {
        self.writes.set(self.writes.get() + blocks);
    }

    /// Charge a full sequential read of `n` records of type `T`.
    pub fn charge_scan<T: Record>(&self, n: usize) {
        self.charge_reads(self.params.blocks_for(n as u64, T::WORDS));
    }

    /// Charge a full sequential write of `n` records of type `T`.
    pub fn charge_write<T: Record>(&self, n: usize) {
        self.charge_writes(self.params.blocks_for(n as u64, T::WORDS));
    }
}

/// A sequence of records on the simulated disk.
#[derive(Debug, Clone)]
pub struct BlockedSeq<'t, T> {
    records: Vec<T>,
    tally: &'t IoTally,
}

impl<'t, T: Record> BlockedSeq<'t, T> {
    /// Wraps records that are already on disk, such as the input. No charge.
    pub fn resident(tally: &'t IoTally, records: Vec<T>) -> Self {
        Self { records, tally }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn tally(&self) -> &'t IoTally {
        self.tally
    }

    pub fn blocks(&self) -> u64 {
        self.tally.params.blocks_for(self.len() as u64, T::WORDS)
    }

    /// Sequential scan; reads are charged as the cursor enters new blocks.
    pub fn scan(&self) -> Scan<'_, 't, T> {
        self.scan_range(0..self.len())
    }

    /// Scan of a contiguous slice of records, charging every block it touches.
    pub fn scan_range(&self, range: Range<usize>) -> Scan<'_, 't, T> {
        assert!(range.end <= self.len(), "scan range out of bounds");
        Scan {
            seq: self,
            pos: range.start,
            end: range.end,
            next_block: 0,
        }
    }

    /// Reads the whole sequence into memory.
    pub fn load(&self) -> Vec<T> {
        self.scan().cloned().collect()
    }

    /// Leaves the I/O model, handing back the records without a charge.
    pub fn into_records(self) -> Vec<T> {
        self.records
    }
}

pub struct Scan<'s, 't, T> {
    seq: &'s BlockedSeq<'t, T>,
    pos: usize,
    end: usize,
    /// First block not yet charged by this cursor.
    next_block: u64,
}

impl<'s, 't, T: Record> Iterator for Scan<'s, 't, T> {
    type Item = &'s T;

    fn next(&mut self) -> Option<Self::Item> {
        if self.pos >= self.end {
            return None;
        }
        let block = self.seq.tally.params.block;
        let first = self.pos as u64 * T::WORDS / block;
        let last = ((self.pos as u64 + 1) * T::WORDS - 1) / block;
        let from = first.max(self.next_block);
        if last >= from {
            self.seq.tally.charge_reads(last - from + 1);
            self.next_block = last + 1;
        }
        let item = &self.seq.records[self.pos];
        self.pos += 1;
        Some(item)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.end - self.pos;
        (n, Some(n))
    }
}

/// Sequential reader over a record layout that is only partly visited.
///
/// Each call reads a contiguous range; blocks already fetched by an earlier
/// range are not charged again, ranges must come in increasing order.
#[derive(Debug)]
pub struct Cursor<'t> {
    tally: &'t IoTally,
    width: u64,
    next_block: u64,
}

impl<'t> Cursor<'t> {
    pub fn new<T: Record>(tally: &'t IoTally) -> Self {
        Self {
            tally,
            width: T::WORDS,
            next_block: 0,
        }
    }

    pub fn read(&mut self, range: Range<usize>) {
        if range.is_empty() {
            return;
        }
        let block = self.tally.params.block;
        let first = range.start as u64 * self.width / block;
        let end = (range.end as u64 * self.width).div_ceil(block);
        let from = first.max(self.next_block);
        if end > from {
            self.tally.charge_reads(end - from);
            self.next_block = end;
        }
    }
}

/// Appends records, charging a write each time a block fills and one for the
/// final partial block.
#[derive(Debug)]
pub struct BlockedWriter<'t, T> {
    records: Vec<T>,
    tally: &'t IoTally,
    flushed: u64,
}

impl<'t, T: Record> BlockedWriter<'t, T> {
    pub fn new(tally: &'t IoTally) -> Self {
        Self {
            records: Vec::new(),
            tally,
            flushed: 0,
        }
    }

    pub fn push(&mut self, record: T) {
        self.records.push(record);
        let full = self.records.len() as u64 * T::WORDS / self.tally.params.block;
        if full > self.flushed {
            self.tally.charge_writes(full - self.flushed);
            self.flushed = full;
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn finish(self) -> BlockedSeq<'t, T> {
        let total = self
            .tally
            .params
            .blocks_for(self.records.len() as u64, T::WORDS);
        self.tally.charge_writes(total - self.flushed);
        BlockedSeq {
            records: self.records,
            tally: self.tally,
        }
    }
}

/// One distribution pass: routes every record to one of `fanout` outputs,
/// preserving input order within each output.
pub fn multiway_distribute<'t, T, F>(
    seq: &BlockedSeq<'t, T>,
    fanout: usize,
    mut router: F,
) -> Result<Vec<BlockedSeq<'t, T>>, IoError>
where
    T: Record,
    F: FnMut(&T) -> usize,
{
    let limit = seq.tally.params.stream_limit();
    if fanout > limit {
        return Err(IoError::FanoutTooLarge { fanout, limit });
    }
    let mut outputs: Vec<BlockedWriter<'t, T>> =
        (0..fanout).map(|_| BlockedWriter::new(seq.tally)).collect();
    for record in seq.scan() {
        let bucket = router(record);
        outputs[bucket].push(record.clone());
    }
    Ok(outputs.into_iter().map(BlockedWriter::finish).collect())
}

/// Merges several sequences by `key` (ties broken by stream position) and
/// hands every record to `visit` together with the index of its stream.
pub fn synchronized_scan<'t, T, K, KF, V>(
    seqs: &[&BlockedSeq<'t, T>],
    key: KF,
    mut visit: V,
) -> Result<(), IoError>
where
    T: Record,
    K: Ord,
    KF: Fn(&T) -> K,
    V: FnMut(usize, &T),
{
    let Some(first) = seqs.first() else {
        return Ok(());
    };
    let limit = first.tally.params.stream_limit();
    if seqs.len() > limit {
        return Err(IoError::TooManyStreams {
            streams: seqs.len(),
            limit,
        });
    }
    let mut scans: Vec<_> = seqs.iter().map(|s| s.scan().peekable()).collect();
    loop {
        let mut best: Option<(usize, K)> = None;
        for (i, scan) in scans.iter_mut().enumerate() {
            if let Some(&record) = scan.peek() {
                let k = key(record);
                if best.as_ref().is_none_or(|(_, bk)| k < *bk) {
                    best = Some((i, k));
                }
            }
        }
        let Some((i, _)) = best else {
            return Ok(());
        };
        let record = scans[i].next().expect("peeked");
        visit(i, record);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tally(mem: u64, block: u64) -> IoTally {
        IoTally::new(EmParams::new(mem, block).unwrap())
    }

    #[derive(Clone, Debug, PartialEq)]
    struct W1(u64);
    impl Record for W1 {
        const WORDS: u64 = 1;
    }

    #[derive(Clone, Debug)]
    struct W2(#[allow(dead_code)] u64);
    impl Record for W2 {
        const WORDS: u64 = 2;
    }

    #[test]
    fn params_validation() {
        assert!(EmParams::new(64, 32).is_ok());
        assert_eq!(
            EmParams::new(63, 32),
            Err(IoError::InvalidParams { mem: 63, block: 32 })
        );
        assert!(EmParams::new(8, 0).is_err());
        assert_eq!(EmParams::new(2048, 32).unwrap().stream_limit(), 32);
    }

    #[test]
    fn scan_charges_ceiling_of_blocks() {
        let t = tally(1024, 32);
        let empty: BlockedSeq<W1> = BlockedSeq::resident(&t, vec![]);
        assert_eq!(empty.scan().count(), 0);
        assert_eq!(t.reads(), 0);

        let one = BlockedSeq::resident(&t, vec![W1(7)]);
        assert_eq!(one.scan().count(), 1);
        assert_eq!(t.reads(), 1);

        let t = tally(1024, 32);
        let seq = BlockedSeq::resident(&t, (0..100).map(W2).collect());
        assert_eq!(seq.scan().count(), 100);
        assert_eq!(t.reads(), 7);
        assert_eq!(seq.blocks(), 7);
    }

    #[test]
    fn partial_scan_charges_only_touched_blocks() {
        let t = tally(64, 8);
        let seq = BlockedSeq::resident(&t, (0..64).map(W1).collect());
        assert_eq!(seq.scan().take(9).count(), 9);
        assert_eq!(t.reads(), 2);
        let t2 = tally(64, 8);
        let seq = BlockedSeq::resident(&t2, (0..64).map(W1).collect());
        assert_eq!(seq.scan_range(7..17).count(), 10);
        assert_eq!(t2.reads(), 3);
    }

    #[test]
    fn cursor_does_not_recharge_shared_blocks() {
        let t = tally(64, 8);
        let mut c = Cursor::new::<W1>(&t);
        c.read(0..3);
        c.read(3..10);
        assert_eq!(t.reads(), 2);
        c.read(30..31);
        assert_eq!(t.reads(), 3);
        c.read(31..32);
        assert_eq!(t.reads(), 3);
    }

    #[test]
    fn writer_charges_ceiling_on_finish() {
        let t = tally(64, 8);
        let mut w = BlockedWriter::new(&t);
        for i in 0..17 {
            w.push(W1(i));
        }
        assert_eq!(t.writes(), 2);
        let seq = w.finish();
        assert_eq!(t.writes(), 3);
        assert_eq!(seq.len(), 17);
    }

    #[test]
    fn distribute_single_bucket_copies() {
        let t = tally(64, 8);
        let seq = BlockedSeq::resident(&t, (0..20).map(W1).collect());
        let out = multiway_distribute(&seq, 1, |_| 0).unwrap();
        assert_eq!(out[0].clone().into_records(), seq.clone().into_records());
        assert_eq!(
            t.counts(),
            IoCounts {
                reads: 3,
                writes: 3
            }
        );
    }

    #[test]
    fn distribute_mod_four() {
        let t = tally(64, 8);
        let seq = BlockedSeq::resident(&t, (0..64).map(W1).collect());
        let out = multiway_distribute(&seq, 4, |r| (r.0 % 4) as usize).unwrap();
        for (i, bucket) in out.iter().enumerate() {
            assert_eq!(bucket.len(), 16);
            let recs = bucket.clone().into_records();
            assert!(recs.iter().all(|r| r.0 % 4 == i as u64));
            assert!(recs.windows(2).all(|w| w[0].0 < w[1].0));
        }
        // 64 / 8 reads; four buckets of 16 words, two blocks each.
        assert_eq!(
            t.counts(),
            IoCounts {
                reads: 8,
                writes: 8
            }
        );
    }

    #[test]
    fn distribute_rejects_large_fanout() {
        let t = tally(64, 8);
        let seq: BlockedSeq<W1> = BlockedSeq::resident(&t, vec![]);
        assert_eq!(
            multiway_distribute(&seq, 5, |_| 0).unwrap_err(),
            IoError::FanoutTooLarge {
                fanout: 5,
                limit: 4
            }
        );
    }

    #[test]
    fn synchronized_scan_merges_and_charges() {
        let t = tally(1024, 32);
        let empty: BlockedSeq<W1> = BlockedSeq::resident(&t, vec![]);
        let full = BlockedSeq::resident(&t, (0..32).map(W1).collect());
        synchronized_scan(&[&empty, &full], |r| r.0, |_, _| {}).unwrap();
        assert_eq!(t.reads(), 1);

        let t = tally(1024, 32);
        let a = BlockedSeq::resident(&t, (0..100).map(|i| W1(2 * i)).collect());
        let b = BlockedSeq::resident(&t, (0..100).map(|i| W1(2 * i + 1)).collect());
        let mut seen = Vec::new();
        synchronized_scan(&[&a, &b], |r| r.0, |s, r| seen.push((s, r.0))).unwrap();
        assert_eq!(t.reads(), 8);
        assert!(seen.windows(2).all(|w| w[0].1 < w[1].1));
        assert_eq!(seen[1], (1, 1));
    }

    #[test]
    fn synchronized_scan_stream_limit() {
        let t = tally(2048, 32);
        let seqs: Vec<BlockedSeq<W1>> = (0..3).map(|_| BlockedSeq::resident(&t, vec![])).collect();
        let refs: Vec<_> = seqs.iter().collect();
        assert!(synchronized_scan(&refs, |r| r.0, |_, _| {}).is_ok());

        let t = tally(64, 8);
        let seqs: Vec<BlockedSeq<W1>> = (0..5).map(|_| BlockedSeq::resident(&t, vec![])).collect();
        let refs: Vec<_> = seqs.iter().collect();
        assert_eq!(
            synchronized_scan(&refs, |r| r.0, |_, _| {}).unwrap_err(),
            IoError::TooManyStreams {
                streams: 5,
                limit: 4
            }
        );
    }
}
