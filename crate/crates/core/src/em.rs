//! External-memory mining engine.
//!
//! The pipeline mirrors the in-memory miner but stages its tuples in
//! fixed-width run files and sorts them with multiway external merge sort.
//! Suffix structures are built in memory and streamed straight into run
//! files, so the tuple stages never hold more than the configured budget of
//! record bytes at once: the run-formation array and one block buffer per
//! open run file are charged against the budget and the observed peak is
//! reported in `IoStats`. Both engines share the label semantics, the
//! alignment step, and the final emitter, so their output is byte-identical.
//!
//! With `budget_bytes = 2 * block_bytes` (the minimum accepted) a two-way
//! merge still needs three live blocks, so the instantaneous peak can exceed
//! the budget by one block; any budget of at least three blocks stays within
//! it.

use crate::mine::{
    emit_sorted, partition_intervals, validate_params, MineError, MinedPattern, Tuple5,
};
use crate::suffix::{LcpArray, SuffixArray};
use crate::text::{reverse_text, Text};
use std::cell::{Cell, RefCell};
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fs::{self, File};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::PathBuf;
use std::rc::Rc;

const RUN_MAGIC: [u8; 4] = *b"RUNF";
const RUN_VERSION: u8 = 1;
const HEADER_BYTES: usize = 16;

/// Smallest accepted block size; a block must hold at least one record of
/// the widest arity (five fields of eight bytes).
pub const MIN_BLOCK_BYTES: usize = 64;

#[derive(Debug, Clone)]
pub struct EmConfig {
    pub budget_bytes: usize,
    pub block_bytes: usize,
    pub tmp_dir: PathBuf,
}

impl EmConfig {
    pub fn validate(&self) -> Result<(), MineError> {
        if self.block_bytes < MIN_BLOCK_BYTES {
            return Err(MineError::Config(format!(
                "block size {} is below the minimum {}",
                self.block_bytes, MIN_BLOCK_BYTES
            )));
        }
        if self.budget_bytes < 2 * self.block_bytes {
            return Err(MineError::Config(format!(
                "budget {} holds fewer than two blocks of {} bytes",
                self.budget_bytes, self.block_bytes
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct IoStats {
    pub blocks_read: u64,
    pub blocks_written: u64,
    /// Highest number of live tuple-buffer bytes observed, counting the
    /// formation array and every open block buffer in record bytes.
    pub peak_buffer_bytes: usize,
}

pub(crate) struct EmSession {
    cfg: EmConfig,
    stats: RefCell<IoStats>,
    live: Cell<usize>,
    seq: Cell<u64>,
}

impl EmSession {
    fn new(cfg: EmConfig) -> Result<Rc<EmSession>, MineError> {
        cfg.validate()?;
        fs::create_dir_all(&cfg.tmp_dir)?;
        Ok(Rc::new(EmSession {
            cfg,
            stats: RefCell::new(IoStats::default()),
            live: Cell::new(0),
            seq: Cell::new(0),
        }))
    }

    fn alloc(&self, bytes: usize) {
        let live = self.live.get() + bytes;
        self.live.set(live);
        let mut s = self.stats.borrow_mut();
        if live > s.peak_buffer_bytes {
            s.peak_buffer_bytes = live;
        }
    }

    fn release(&self, bytes: usize) {
        self.live.set(self.live.get() - bytes);
    }

    fn note_read(&self) {
        self.stats.borrow_mut().blocks_read += 1;
    }

    fn note_write(&self) {
        self.stats.borrow_mut().blocks_written += 1;
    }

    fn next_path(&self) -> PathBuf {
        let id = self.seq.get();
        self.seq.set(id + 1);
        self.cfg.tmp_dir.join(format!("run-{id:06}.bin"))
    }

    fn stats(&self) -> IoStats {
        *self.stats.borrow()
    }
}

fn width_for(n: usize) -> u8 {
    if (n as u64) + 2 <= 1u64 << 32 {
        4
    } else {
        8
    }
}

/// A closed run file: fixed-width little-endian records behind a 16-byte
/// header (magic, version, arity, width, record count).
pub(crate) struct RunFile {
    path: PathBuf,
    arity: u8,
    width: u8,
    count: u64,
}

impl RunFile {
    #[cfg(test)]
    fn count(&self) -> u64 {
        self.count
    }

    fn record_bytes(&self) -> usize {
        self.arity as usize * self.width as usize
    }

    fn delete(self) -> Result<(), MineError> {
        fs::remove_file(&self.path)?;
        Ok(())
    }
}

pub(crate) struct RunWriter {
    sess: Rc<EmSession>,
    file: File,
    path: PathBuf,
    buf: Vec<u8>,
    arity: u8,
    width: u8,
    count: u64,
    open: bool,
}

impl RunWriter {
    pub(crate) fn create(sess: &Rc<EmSession>, arity: u8, width: u8) -> Result<RunWriter, MineError> {
        let path = sess.next_path();
        let mut file = File::create(&path)?;
        let mut header = [0u8; HEADER_BYTES];
        header[..4].copy_from_slice(&RUN_MAGIC);
        header[4] = RUN_VERSION;
        header[5] = arity;
        header[6] = width;
        file.write_all(&header)?;
        sess.note_write();
        sess.alloc(sess.cfg.block_bytes);
        Ok(RunWriter {
            sess: Rc::clone(sess),
            file,
            path,
            buf: Vec::with_capacity(sess.cfg.block_bytes),
            arity,
            width,
            count: 0,
            open: true,
        })
    }

    pub(crate) fn push(&mut self, rec: &[u64]) -> Result<(), MineError> {
        debug_assert_eq!(rec.len(), self.arity as usize);
        let rec_bytes = self.arity as usize * self.width as usize;
        if self.buf.len() + rec_bytes > self.sess.cfg.block_bytes {
            self.flush_block()?;
        }
        for &v in rec {
            match self.width {
                4 => self.buf.extend_from_slice(&(v as u32).to_le_bytes()),
                _ => self.buf.extend_from_slice(&v.to_le_bytes()),
            }
        }
        self.count += 1;
        Ok(())
    }

    fn flush_block(&mut self) -> Result<(), MineError> {
        if !self.buf.is_empty() {
            self.file.write_all(&self.buf)?;
            self.sess.note_write();
            self.buf.clear();
        }
        Ok(())
    }

    pub(crate) fn finish(mut self) -> Result<RunFile, MineError> {
        self.flush_block()?;
        self.file.seek(SeekFrom::Start(8))?;
        self.file.write_all(&self.count.to_le_bytes())?;
        self.sess.note_write();
        self.open = false;
        self.sess.release(self.sess.cfg.block_bytes);
        Ok(RunFile {
            path: self.path.clone(),
            arity: self.arity,
            width: self.width,
            count: self.count,
        })
    }
}

impl Drop for RunWriter {
    fn drop(&mut self) {
        if self.open {
            self.sess.release(self.sess.cfg.block_bytes);
        }
    }
}

pub(crate) struct RunReader {
    sess: Rc<EmSession>,
    file: File,
    buf: Vec<u8>,
    at: usize,
    remaining: u64,
    arity: usize,
    width: u8,
}

impl RunReader {
    pub(crate) fn open(sess: &Rc<EmSession>, run: &RunFile) -> Result<RunReader, MineError> {
        let mut file = File::open(&run.path)?;
        let mut header = [0u8; HEADER_BYTES];
        file.read_exact(&mut header)?;
        sess.note_read();
        if header[..4] != RUN_MAGIC {
            return Err(MineError::CorruptRun("bad magic".into()));
        }
        if header[4] != RUN_VERSION {
            return Err(MineError::CorruptRun(format!("unknown version {}", header[4])));
        }
        if header[5] != run.arity || header[6] != run.width {
            return Err(MineError::CorruptRun("arity or width mismatch".into()));
        }
        let count = u64::from_le_bytes(header[8..16].try_into().unwrap());
        if count != run.count {
            return Err(MineError::CorruptRun("record count mismatch".into()));
        }
        sess.alloc(sess.cfg.block_bytes);
        Ok(RunReader {
            sess: Rc::clone(sess),
            file,
            buf: Vec::new(),
            at: 0,
            remaining: count,
            arity: run.arity as usize,
            width: run.width,
        })
    }

    /// Reads the next record into `out` (length must equal the arity).
    /// Returns false at end of run.
    pub(crate) fn next_into(&mut self, out: &mut [u64]) -> Result<bool, MineError> {
        debug_assert_eq!(out.len(), self.arity);
        if self.remaining == 0 {
            return Ok(false);
        }
        let rec_bytes = self.arity * self.width as usize;
        if self.at == self.buf.len() {
            let per_block = (self.sess.cfg.block_bytes / rec_bytes).max(1);
            let want = (per_block as u64).min(self.remaining) as usize * rec_bytes;
            self.buf.resize(want, 0);
            self.file.read_exact(&mut self.buf)?;
            self.sess.note_read();
            self.at = 0;
        }
        for slot in out.iter_mut() {
            *slot = match self.width {
                4 => u32::from_le_bytes(self.buf[self.at..self.at + 4].try_into().unwrap())
                    as u64,
                _ => u64::from_le_bytes(self.buf[self.at..self.at + 8].try_into().unwrap()),
            };
            self.at += self.width as usize;
        }
        self.remaining -= 1;
        Ok(true)
    }
}

impl Drop for RunReader {
    fn drop(&mut self) {
        self.sess.release(self.sess.cfg.block_bytes);
    }
}

fn key_of(rec: &[u64], key_cols: &[usize]) -> Vec<u64> {
    key_cols.iter().map(|&c| rec[c]).collect()
}

/// Stable external merge sort of `input` by the listed columns
/// (lexicographically, ties keep input order). Consumes and deletes the
/// input run.
pub(crate) fn external_sort(
    input: RunFile,
    key_cols: &[usize],
    sess: &Rc<EmSession>,
) -> Result<RunFile, MineError> {
    let arity = input.arity;
    let width = input.width;
    let rec_bytes = input.record_bytes();
    let budget = sess.cfg.budget_bytes;
    let block = sess.cfg.block_bytes;
    // Formation keeps one reader block and one writer block live alongside
    // the array, so the array gets whatever the budget has left over.
    let cap_records = ((budget.saturating_sub(2 * block)) / rec_bytes).max(1);

    let mut runs: Vec<RunFile> = Vec::new();
    {
        let mut reader = RunReader::open(sess, &input)?;
        sess.alloc(cap_records * rec_bytes);
        let mut flat: Vec<u64> = Vec::with_capacity(cap_records * arity as usize);
        let mut rec = vec![0u64; arity as usize];
        let mut exhausted = false;
        while !exhausted {
            flat.clear();
            let mut loaded = 0usize;
            while loaded < cap_records {
                if reader.next_into(&mut rec)? {
                    flat.extend_from_slice(&rec);
                    loaded += 1;
                } else {
                    exhausted = true;
                    break;
                }
            }
            if loaded == 0 && !runs.is_empty() {
                break;
            }
            let mut order: Vec<u32> = (0..loaded as u32).collect();
            order.sort_by(|&a, &b| {
                let ra = &flat[a as usize * arity as usize..][..arity as usize];
                let rb = &flat[b as usize * arity as usize..][..arity as usize];
                key_of(ra, key_cols).cmp(&key_of(rb, key_cols))
            });
            let mut w = RunWriter::create(sess, arity, width)?;
            for &i in &order {
                w.push(&flat[i as usize * arity as usize..][..arity as usize])?;
            }
            runs.push(w.finish()?);
        }
        sess.release(cap_records * rec_bytes);
    }
    input.delete()?;

    let fan = (budget / block).saturating_sub(1).max(2);
    while runs.len() > 1 {
        let mut next: Vec<RunFile> = Vec::new();
        let mut pending = std::mem::take(&mut runs).into_iter().peekable();
        while pending.peek().is_some() {
            let group: Vec<RunFile> = pending.by_ref().take(fan).collect();
            if group.len() == 1 {
                next.extend(group);
            } else {
                next.push(merge_group(group, key_cols, sess)?);
            }
        }
        runs = next;
    }
    Ok(runs.pop().expect("sort always yields one run"))
}

fn merge_group(
    group: Vec<RunFile>,
    key_cols: &[usize],
    sess: &Rc<EmSession>,
) -> Result<RunFile, MineError> {
    let arity = group[0].arity;
    let width = group[0].width;
    let mut readers = Vec::with_capacity(group.len());
    for run in &group {
        readers.push(RunReader::open(sess, run)?);
    }
    let mut slots = vec![vec![0u64; arity as usize]; group.len()];
    let mut heap: BinaryHeap<Reverse<(Vec<u64>, usize)>> = BinaryHeap::new();
    for (i, reader) in readers.iter_mut().enumerate() {
        if reader.next_into(&mut slots[i])? {
            heap.push(Reverse((key_of(&slots[i], key_cols), i)));
        }
    }
    let mut w = RunWriter::create(sess, arity, width)?;
    while let Some(Reverse((_, i))) = heap.pop() {
        w.push(&slots[i])?;
        if readers[i].next_into(&mut slots[i])? {
            heap.push(Reverse((key_of(&slots[i], key_cols), i)));
        }
    }
    let merged = w.finish()?;
    drop(readers);
    for run in group {
        run.delete()?;
    }
    Ok(merged)
}

fn join_by_position(
    s4: RunFile,
    s2: RunFile,
    sess: &Rc<EmSession>,
) -> Result<RunFile, MineError> {
    let width = s4.width;
    let mut merged = RunWriter::create(sess, 5, width)?;
    {
        let mut r4 = RunReader::open(sess, &s4)?;
        let mut r2 = RunReader::open(sess, &s2)?;
        let mut rec4 = [0u64; 4];
        let mut rec2 = [0u64; 2];
        let mut have2 = r2.next_into(&mut rec2)?;
        while r4.next_into(&mut rec4)? {
            while have2 && rec2[0] < rec4[0] {
                have2 = r2.next_into(&mut rec2)?;
            }
            if !have2 || rec2[0] != rec4[0] {
                return Err(MineError::AlignmentMismatch { pos: rec4[0] as u32 });
            }
            merged.push(&[rec4[0], rec4[1], rec4[2], rec4[3], rec2[1]])?;
        }
    }
    let out = merged.finish()?;
    s4.delete()?;
    s2.delete()?;
    Ok(out)
}

struct Tuple5Stream {
    reader: RunReader,
}

impl Iterator for Tuple5Stream {
    type Item = Result<Tuple5, MineError>;

    fn next(&mut self) -> Option<Self::Item> {
        let mut rec = [0u64; 5];
        match self.reader.next_into(&mut rec) {
            Ok(false) => None,
            Ok(true) => Some(Ok([
                rec[0] as u32,
                rec[1] as u32,
                rec[2] as u32,
                rec[3] as u32,
                rec[4] as u32,
            ])),
            Err(e) => Some(Err(e)),
        }
    }
}

/// External-memory miner; output is identical to `mine_im`.
pub fn mine_em(
    t: &Text,
    tau: usize,
    m: usize,
    l: usize,
    r: usize,
    cfg: &EmConfig,
) -> Result<Vec<MinedPattern>, MineError> {
    mine_em_with_stats(t, tau, m, l, r, cfg).map(|(out, _)| out)
}

/// Like `mine_em`, also reporting I/O block counts and the peak number of
/// live tuple-buffer bytes.
pub fn mine_em_with_stats(
    t: &Text,
    tau: usize,
    m: usize,
    l: usize,
    r: usize,
    cfg: &EmConfig,
) -> Result<(Vec<MinedPattern>, IoStats), MineError> {
    validate_params(t, tau, m, l, r)?;
    let sess = EmSession::new(cfg.clone())?;
    let n = t.n();
    let width = width_for(n);

    let t4 = {
        let sa = SuffixArray::build(t);
        let isa = sa.invert();
        let lcp = LcpArray::build(t, &sa, &isa);
        let int = partition_intervals(&lcp, m);
        let sint = partition_intervals(&lcp, m + r);
        let mut w = RunWriter::create(&sess, 4, width)?;
        for rank in 1..=n {
            let p = sa.at(rank);
            if p <= n - m {
                w.push(&[p as u64, rank as u64, int[rank] as u64, sint[rank] as u64])?;
            }
        }
        w.finish()?
    };
    let t2 = {
        let tr = reverse_text(t);
        let sa = SuffixArray::build(&tr);
        let isa = sa.invert();
        let lcp = LcpArray::build(&tr, &sa, &isa);
        let rint = partition_intervals(&lcp, l);
        let mut w = RunWriter::create(&sess, 2, width)?;
        for j in 1..=n {
            w.push(&[(n + 1 - sa.at(j)) as u64, rint[j] as u64])?;
        }
        w.finish()?
    };

    let s4 = external_sort(t4, &[0], &sess)?;
    let s2 = external_sort(t2, &[0], &sess)?;
    let t5 = join_by_position(s4, s2, &sess)?;
    let s5 = external_sort(t5, &[2, 3, 4], &sess)?;

    let out = {
        let stream = Tuple5Stream { reader: RunReader::open(&sess, &s5)? };
        emit_sorted(t, tau, m, l, r, stream)?
    };
    s5.delete()?;
    Ok((out, sess.stats()))
}
