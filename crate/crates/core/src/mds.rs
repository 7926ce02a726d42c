//! Systematic `(L, T)` MDS erasure code over GF(256).
//!
//! A file is zero-padded to a multiple of `T` bytes and split into `T`
//! systematic fragments. Parity fragments are GF(256) combinations taken
//! byte-by-byte across the `T` systematic fragments. Any `T` of the `L`
//! fragments reconstruct the file.
//!
//! The generator is `V * inv(V_top)` for the `L x T` Vandermonde matrix `V`
//! on the points `0, 1, .., L-1`, which makes the first `T` rows the
//! identity while keeping every `T`-row minor invertible. For `L = T + 1`
//! the single parity row is all ones, i.e. the XOR of the systematic
//! fragments.

use crate::gf256::{self, Matrix};
use crate::{Error, Result};

/// Upper bound on `L` for this field.
pub const MAX_FRAGMENTS: usize = 255;

const MAGIC: [u8; 4] = *b"MCFR";
const HEADER_LEN: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileBlob {
    pub id: usize,
    pub bytes: Vec<u8>,
}

impl FileBlob {
    pub fn new(id: usize, bytes: Vec<u8>) -> Self {
        FileBlob { id, bytes }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedFragment {
    pub file: usize,
    /// Position in `0..L`; `0..T` are systematic.
    pub index: usize,
    /// `T`
    pub data_fragments: usize,
    /// `L`
    pub total_fragments: usize,
    /// Length of the file before padding.
    pub original_len: usize,
    pub bytes: Vec<u8>,
}

impl CodedFragment {
    /// Serializes to the fragment file format: a header of five
    /// little-endian `u32` fields (magic `MCFR`, `L`, `T`, fragment index,
    /// original length) followed by the raw fragment bytes. The file id is
    /// not stored.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.bytes.len());
        out.extend_from_slice(&MAGIC);
        for v in [
            self.total_fragments,
            self.data_fragments,
            self.index,
            self.original_len,
        ] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        out.extend_from_slice(&self.bytes);
        out
    }

    pub fn from_bytes(file: usize, raw: &[u8]) -> Result<Self> {
        if raw.len() < HEADER_LEN {
            return Err(Error::CorruptFragment("truncated header".into()));
        }
        if raw[..4] != MAGIC {
            return Err(Error::CorruptFragment("bad magic".into()));
        }
        let field = |i: usize| {
            let at = 4 + 4 * i;
            u32::from_le_bytes(raw[at..at + 4].try_into().unwrap()) as usize
        };
        Ok(CodedFragment {
            file,
            total_fragments: field(0),
            data_fragments: field(1),
            index: field(2),
            original_len: field(3),
            bytes: raw[HEADER_LEN..].to_vec(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsCode {
    data: usize,
    total: usize,
    generator: Matrix,
}

impl MdsCode {
    pub fn new(data_fragments: usize, total_fragments: usize) -> Result<Self> {
        let (t, l) = (data_fragments, total_fragments);
        if t == 0 || t > l || l > MAX_FRAGMENTS {
            return Err(Error::UnsupportedCode { data: t, total: l });
        }
        let generator = if l <= t + 1 {
            (0..l)
                .map(|r| (0..t).map(|c| u8::from(r == t || r == c)).collect())
                .collect()
        } else {
            let vandermonde: Matrix = (0..l)
                .map(|r| (0..t).map(|c| gf256::pow(r as u8, c)).collect())
                .collect();
            let top_inv = gf256::invert(&vandermonde[..t].to_vec())
                .expect("Vandermonde rows on distinct points are independent");
            gf256::mat_mul(&vandermonde, &top_inv)
        };
        Ok(MdsCode {
            data: t,
            total: l,
            generator,
        })
    }

    pub fn data_fragments(&self) -> usize {
        self.data
    }

    pub fn total_fragments(&self) -> usize {
        self.total
    }

    pub fn encode(&self, file: &FileBlob) -> Result<Vec<CodedFragment>> {
        self.encode_aligned(file, 1)
    }

    /// Encodes with fragments whose length is a multiple of `align`; the
    /// file is zero-padded to a multiple of `T * align` bytes.
    pub fn encode_aligned(&self, file: &FileBlob, align: usize) -> Result<Vec<CodedFragment>> {
        if file.bytes.is_empty() {
            return Err(Error::EmptyFile);
        }
        let unit = self.data * align.max(1);
        let padded_len = file.bytes.len().div_ceil(unit) * unit;
        let frag_len = padded_len / self.data;
        let mut padded = file.bytes.clone();
        padded.resize(padded_len, 0);

        let systematic: Vec<&[u8]> = padded.chunks(frag_len).collect();
        Ok((0..self.total)
            .map(|index| {
                let bytes = if index < self.data {
                    systematic[index].to_vec()
                } else {
                    let mut acc = vec![0u8; frag_len];
                    for (coef, src) in self.generator[index].iter().zip(&systematic) {
                        gf256::mul_add_into(&mut acc, *coef, src);
                    }
                    acc
                };
                CodedFragment {
                    file: file.id,
                    index,
                    data_fragments: self.data,
                    total_fragments: self.total,
                    original_len: file.bytes.len(),
                    bytes,
                }
            })
            .collect())
    }

    /// Reconstructs the file from any `T` distinct fragments (extra
    /// fragments beyond the first `T` distinct indices are ignored).
    pub fn decode(&self, fragments: &[CodedFragment]) -> Result<FileBlob> {
        let mut chosen: Vec<&CodedFragment> = Vec::with_capacity(self.data);
        for f in fragments {
            if f.data_fragments != self.data || f.total_fragments != self.total {
                return Err(Error::CorruptFragment(format!(
                    "fragment uses a ({}, {}) code, expected ({}, {})",
                    f.total_fragments, f.data_fragments, self.total, self.data
                )));
            }
            if f.index >= self.total {
                return Err(Error::CorruptFragment(format!(
                    "fragment index {} out of range",
                    f.index
                )));
            }
            if chosen.len() < self.data && chosen.iter().all(|c| c.index != f.index) {
                chosen.push(f);
            }
        }
        if chosen.len() < self.data {
            return Err(Error::InsufficientFragments {
                have: chosen.len(),
                need: self.data,
            });
        }
        let first = chosen[0];
        let frag_len = first.bytes.len();
        for f in &chosen {
            if f.bytes.len() != frag_len || f.file != first.file || f.original_len != first.original_len {
                return Err(Error::CorruptFragment(
                    "fragments disagree on file, length or original size".into(),
                ));
            }
        }
        if first.original_len > frag_len * self.data {
            return Err(Error::CorruptFragment(
                "original length exceeds the coded payload".into(),
            ));
        }

        let sub: Matrix = chosen.iter().map(|f| self.generator[f.index].clone()).collect();
        let inverse = gf256::invert(&sub).expect("any T generator rows are independent");
        let mut out = vec![0u8; frag_len * self.data];
        for (row, dst) in inverse.iter().zip(out.chunks_mut(frag_len)) {
            for (coef, f) in row.iter().zip(&chosen) {
                gf256::mul_add_into(dst, *coef, &f.bytes);
            }
        }
        out.truncate(first.original_len);
        Ok(FileBlob::new(first.file, out))
    }
}

pub fn mds_encode(
    file: &FileBlob,
    data_fragments: usize,
    total_fragments: usize,
) -> Result<Vec<CodedFragment>> {
    MdsCode::new(data_fragments, total_fragments)?.encode(file)
}

pub fn mds_decode(
    fragments: &[CodedFragment],
    data_fragments: usize,
    total_fragments: usize,
) -> Result<FileBlob> {
    MdsCode::new(data_fragments, total_fragments)?.decode(fragments)
}
