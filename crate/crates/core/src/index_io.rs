//! Binary serialization of counting indexes.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic        8   "CPCINDEX"
//! version      u16
//! flags        u8   bit0 = bounded
//! dollar       u8
//! hash         u8
//! pad          3    zero
//! original_n   u32
//! n_s          u32  length of the indexed string, terminator included
//! z            u32  parse size (0 for unbounded indexes)
//! bound        u32  0 for unbounded indexes
//! digest       32   sha256 of everything after this field
//! s            n_s bytes
//! nodes        u32 count, then per node:
//!                parent u32, edge_start u32, edge_len u32,
//!                kind u8 (0 internal / 1 full leaf / 2 cut leaf),
//!                cov_lo u32, cov_hi u32
//! d1, d2       u32 count, then per point: 5 coords u32 + multiplicity u32
//! lights       u32 count, then per light:
//!                u32 count, then per point: 3 coords u32 + multiplicity u32
//! ```
//!
//! Derived structure (preorder numbering, subtree ends, heavy paths, light
//! slots) is rebuilt on load rather than stored. Point sets are stored
//! collapsed and sorted, so saving a loaded index reproduces the input
//! byte for byte.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::hpd::decompose;
use crate::index::CpcIndex;
use crate::range_count::RangeCounter;
use crate::suffix_tree::{NodeRecord, SuffixTree, NO_NODE};
use crate::text::Text;

const MAGIC: [u8; 8] = *b"CPCINDEX";
const VERSION: u16 = 1;
const HEADER_LEN: usize = 64;
const DIGEST_OFFSET: usize = 32;

#[derive(Debug, thiserror::Error)]
pub enum IndexIoError {
    #[error("not an index file (bad magic)")]
    BadMagic,
    #[error("unsupported index format version {0}")]
    VersionMismatch(u16),
    #[error("corrupt index file: {0}")]
    Corrupt(&'static str),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn push_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn encode_counter5(out: &mut Vec<u8>, c: &RangeCounter<5>) {
    let (pts, mult) = c.collapsed();
    push_u32(out, pts.len() as u32);
    for (p, m) in pts.iter().zip(&mult) {
        for &x in p {
            push_u32(out, x);
        }
        push_u32(out, *m);
    }
}

fn encode_counter3(out: &mut Vec<u8>, c: &RangeCounter<3>) {
    let (pts, mult) = c.collapsed();
    push_u32(out, pts.len() as u32);
    for (p, m) in pts.iter().zip(&mult) {
        for &x in p {
            push_u32(out, x);
        }
        push_u32(out, *m);
    }
}

fn encode(idx: &CpcIndex) -> Vec<u8> {
    let mut body = Vec::new();
    body.extend_from_slice(idx.s.as_bytes());
    let recs = idx.st.to_records();
    push_u32(&mut body, recs.len() as u32);
    for r in &recs {
        push_u32(&mut body, r.parent);
        push_u32(&mut body, r.edge_start);
        push_u32(&mut body, r.edge_len);
        body.push(r.kind);
        push_u32(&mut body, r.cov_lo);
        push_u32(&mut body, r.cov_hi);
    }
    encode_counter5(&mut body, &idx.d1);
    encode_counter5(&mut body, &idx.d2);
    push_u32(&mut body, idx.d3.len() as u32);
    for c in &idx.d3 {
        encode_counter3(&mut body, c);
    }

    let mut out = Vec::with_capacity(HEADER_LEN + body.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(u8::from(idx.bound.is_some()));
    out.push(idx.s.dollar());
    out.push(idx.s.hash());
    out.extend_from_slice(&[0u8; 3]);
    push_u32(&mut out, idx.original_n);
    push_u32(&mut out, idx.s.n() as u32);
    push_u32(&mut out, idx.z);
    push_u32(&mut out, idx.bound.unwrap_or(0));
    debug_assert_eq!(out.len(), DIGEST_OFFSET);
    let digest = Sha256::digest(&body);
    out.extend_from_slice(&digest);
    debug_assert_eq!(out.len(), HEADER_LEN);
    out.extend_from_slice(&body);
    out
}

pub fn save_index<W: Write>(idx: &CpcIndex, w: &mut W) -> Result<(), IndexIoError> {
    w.write_all(&encode(idx))?;
    Ok(())
}

pub fn save_index_file(idx: &CpcIndex, path: &Path) -> Result<(), IndexIoError> {
    let mut w = BufWriter::new(File::create(path)?);
    save_index(idx, &mut w)?;
    w.flush()?;
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn bytes(&mut self, n: usize) -> Result<&'a [u8], IndexIoError> {
        if self.buf.len() - self.at < n {
            return Err(IndexIoError::Corrupt("truncated"));
        }
        let s = &self.buf[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, IndexIoError> {
        Ok(self.bytes(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, IndexIoError> {
        Ok(u32::from_le_bytes(self.bytes(4)?.try_into().unwrap()))
    }

    fn len_prefix(&mut self, record_bytes: usize) -> Result<usize, IndexIoError> {
        let count = self.u32()? as usize;
        if count.checked_mul(record_bytes).is_none_or(|need| self.buf.len() - self.at < need) {
            return Err(IndexIoError::Corrupt("length prefix exceeds file size"));
        }
        Ok(count)
    }
}

fn decode_counter5(cur: &mut Cursor) -> Result<RangeCounter<5>, IndexIoError> {
    let count = cur.len_prefix(24)?;
    let mut pts: Vec<[u32; 5]> = Vec::with_capacity(count);
    let mut mult: Vec<u32> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut p = [0u32; 5];
        for x in p.iter_mut() {
            *x = cur.u32()?;
        }
        let m = cur.u32()?;
        if m == 0 {
            return Err(IndexIoError::Corrupt("zero multiplicity"));
        }
        if pts.last().is_some_and(|last| *last >= p) {
            return Err(IndexIoError::Corrupt("points out of order"));
        }
        pts.push(p);
        mult.push(m);
    }
    Ok(RangeCounter::from_collapsed(pts, mult))
}

fn decode_counter3(cur: &mut Cursor) -> Result<RangeCounter<3>, IndexIoError> {
    let count = cur.len_prefix(16)?;
    let mut pts: Vec<[u32; 3]> = Vec::with_capacity(count);
    let mut mult: Vec<u32> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut p = [0u32; 3];
        for x in p.iter_mut() {
            *x = cur.u32()?;
        }
        let m = cur.u32()?;
        if m == 0 {
            return Err(IndexIoError::Corrupt("zero multiplicity"));
        }
        if pts.last().is_some_and(|last| *last >= p) {
            return Err(IndexIoError::Corrupt("points out of order"));
        }
        pts.push(p);
        mult.push(m);
    }
    Ok(RangeCounter::from_collapsed(pts, mult))
}

pub fn load_index<R: Read>(r: &mut R) -> Result<CpcIndex, IndexIoError> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    if buf.len() < 8 || buf[..8] != MAGIC {
        return Err(IndexIoError::BadMagic);
    }
    if buf.len() < HEADER_LEN {
        return Err(IndexIoError::Corrupt("truncated header"));
    }
    let version = u16::from_le_bytes(buf[8..10].try_into().unwrap());
    if version != VERSION {
        return Err(IndexIoError::VersionMismatch(version));
    }
    let mut cur = Cursor { buf: &buf, at: 10 };
    let flags = cur.u8()?;
    if flags > 1 {
        return Err(IndexIoError::Corrupt("unknown flags"));
    }
    let dollar = cur.u8()?;
    let hash = cur.u8()?;
    if cur.bytes(3)? != [0u8; 3] {
        return Err(IndexIoError::Corrupt("nonzero padding"));
    }
    let original_n = cur.u32()?;
    let n_s = cur.u32()? as usize;
    let z = cur.u32()?;
    let bound_raw = cur.u32()?;
    let digest: [u8; 32] = cur.bytes(32)?.try_into().unwrap();
    debug_assert_eq!(cur.at, HEADER_LEN);
    if Sha256::digest(&buf[HEADER_LEN..]).as_slice() != digest {
        return Err(IndexIoError::Corrupt("digest mismatch"));
    }
    let bound = match (flags, bound_raw) {
        (0, 0) => None,
        (0, _) => return Err(IndexIoError::Corrupt("bound set on unbounded index")),
        (_, 0) => return Err(IndexIoError::Corrupt("bounded index without bound")),
        (_, b) => Some(b),
    };

    let s_bytes = cur.bytes(n_s)?.to_vec();
    if s_bytes.last() != Some(&dollar) || s_bytes[..n_s - 1].contains(&dollar) {
        return Err(IndexIoError::Corrupt("terminator misplaced"));
    }
    let s = Text::from_parts(s_bytes, dollar, hash);

    let node_count = cur.len_prefix(21)?;
    let mut recs: Vec<NodeRecord> = Vec::with_capacity(node_count);
    for i in 0..node_count {
        let parent = cur.u32()?;
        let edge_start = cur.u32()?;
        let edge_len = cur.u32()?;
        let kind = cur.u8()?;
        let cov_lo = cur.u32()?;
        let cov_hi = cur.u32()?;
        if i == 0 && parent != NO_NODE {
            return Err(IndexIoError::Corrupt("first node is not a root"));
        }
        recs.push(NodeRecord { parent, edge_start, edge_len, kind, cov_lo, cov_hi });
    }
    let st = SuffixTree::assemble(n_s, &recs)
        .ok_or(IndexIoError::Corrupt("inconsistent tree records"))?;
    let d1 = decode_counter5(&mut cur)?;
    let d2 = decode_counter5(&mut cur)?;
    let light_count = cur.u32()? as usize;
    let hpd = decompose(&st);
    if light_count != hpd.lights().len() {
        return Err(IndexIoError::Corrupt("light table does not match tree"));
    }
    let mut d3 = Vec::with_capacity(light_count);
    for _ in 0..light_count {
        d3.push(decode_counter3(&mut cur)?);
    }
    if cur.at != buf.len() {
        return Err(IndexIoError::Corrupt("trailing bytes"));
    }
    let mut light_slot = vec![u32::MAX; st.node_count()];
    for (slot, &l) in hpd.lights().iter().enumerate() {
        light_slot[l as usize] = slot as u32;
    }
    let inf = s.n() as u32 + 1;
    Ok(CpcIndex { s, original_n, z, bound, st, hpd, d1, d2, d3, light_slot, inf })
}

pub fn load_index_file(path: &Path) -> Result<CpcIndex, IndexIoError> {
    load_index(&mut BufReader::new(File::open(path)?))
}
