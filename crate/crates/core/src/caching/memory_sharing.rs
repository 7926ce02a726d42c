use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::mobility::{check_inputs, group_level, mobility_deliver, mobility_place, user_decode};
use super::{MulticastMessage, Placement, UserSession};
use crate::coloring::Coloring;
use crate::combinatorics::binomial_u128;
use crate::mds::FileBlob;
use crate::topology::CellGrid;
use crate::{Error, Result};

/// Mobility placement at any cache size. With a non-integer level `t`, each
/// file is split into a `γ = ⌈t⌉ - t` share placed at level `⌊t⌋` and a
/// `1 - γ` share placed at level `⌈t⌉`, so the cache budget is met exactly.
#[derive(Debug, Clone)]
pub struct SharedPlacement {
    parts: Vec<Placement>,
    weights: Vec<BigRational>,
    original_lens: Vec<usize>,
    padded_len: usize,
    memory: BigRational,
}

/// Builds a [`SharedPlacement`]. Requires equal color groups when `t` is
/// not an integer.
pub fn mobility_place_shared(
    grid: &CellGrid,
    coloring: &Coloring,
    files: usize,
    memory: &BigRational,
    path_length: usize,
    library: &[FileBlob],
) -> Result<SharedPlacement> {
    check_inputs(grid, coloring, files, memory, path_length, library)?;
    let sizes = coloring.group_sizes();
    let integral = sizes
        .iter()
        .all(|&s| group_level(s, memory, files, path_length).is_integer());
    if integral {
        let p = mobility_place(grid, coloring, files, memory, path_length, library)?;
        return Ok(SharedPlacement {
            padded_len: p.padded_file_len(),
            original_lens: library.iter().map(|f| f.bytes.len()).collect(),
            parts: vec![p],
            weights: vec![BigRational::one()],
            memory: memory.clone(),
        });
    }
    if sizes.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::NonIntegerLevel {
            level: format!(
                "{} with unequal color groups {:?}",
                group_level(sizes[0], memory, files, path_length),
                sizes
            ),
        });
    }
    let khat = sizes[0];
    let t = group_level(khat, memory, files, path_length);
    if t > BigRational::from_integer(khat.into()) {
        return Err(Error::InvalidParameter(format!(
            "M = {memory} exceeds the fragment budget N/T"
        )));
    }
    let lo = t.floor();
    let hi = t.ceil();
    let gamma = &hi - &t;
    let level = |x: &BigRational| -> usize { x.to_integer().to_usize().expect("small level") };
    let (lo_u, hi_u) = (level(&lo), level(&hi));

    // memory giving level x: x N / (K̂ T)
    let mem_at = |x: usize| BigRational::new(BigInt::from(x * files), BigInt::from(khat * path_length));
    let unit = |x: usize| path_length * binomial_u128(khat as u64, x as u64) as usize;
    let chunk = unit(lo_u).lcm(&unit(hi_u));
    let p = gamma.numer().to_usize().expect("small ratio");
    let q = gamma.denom().to_usize().expect("small ratio");

    let max_len = library.iter().map(|f| f.bytes.len()).max().unwrap_or(0);
    let block = q * chunk;
    let padded_len = max_len.div_ceil(block).max(1) * block;
    let split = padded_len / q * p;

    let mut lower = Vec::with_capacity(files);
    let mut upper = Vec::with_capacity(files);
    for f in library {
        let mut bytes = f.bytes.clone();
        bytes.resize(padded_len, 0);
        upper.push(FileBlob::new(f.id, bytes.split_off(split)));
        lower.push(FileBlob::new(f.id, bytes));
    }
    let parts = vec![
        mobility_place(grid, coloring, files, &mem_at(lo_u), path_length, &lower)?,
        mobility_place(grid, coloring, files, &mem_at(hi_u), path_length, &upper)?,
    ];
    debug_assert_eq!(
        parts[0].padded_file_len() + parts[1].padded_file_len(),
        padded_len
    );
    Ok(SharedPlacement {
        parts,
        weights: vec![gamma.clone(), BigRational::one() - gamma],
        original_lens: library.iter().map(|f| f.bytes.len()).collect(),
        padded_len,
        memory: memory.clone(),
    })
}

impl SharedPlacement {
    pub fn parts(&self) -> &[Placement] {
        &self.parts
    }

    /// Share of each file handled by each part.
    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn padded_file_len(&self) -> usize {
        self.padded_len
    }

    /// Bytes stored at each SBS, summed over parts.
    pub fn stored_bytes(&self) -> Vec<usize> {
        let k = self.parts[0].num_sbs();
        (0..k)
            .map(|s| self.parts.iter().map(|p| p.caches()[s].stored_bytes()).sum())
            .collect()
    }

    /// Every SBS stores at most `M F` bytes.
    pub fn within_capacity(&self) -> bool {
        let cap = &self.memory * BigRational::from_integer(BigInt::from(self.padded_len));
        self.stored_bytes()
            .into_iter()
            .all(|b| BigRational::from_integer(BigInt::from(b)) <= cap)
    }

    /// Messages of one slot, one list per part.
    pub fn deliver(&self, sessions: &[UserSession], slot: usize) -> Result<Vec<Vec<MulticastMessage>>> {
        self.parts
            .iter()
            .map(|p| mobility_deliver(p, sessions, slot))
            .collect()
    }

    /// `messages[slot][part]`, as produced by [`SharedPlacement::deliver`].
    pub fn decode(&self, session: &UserSession, messages: &[Vec<Vec<MulticastMessage>>]) -> Result<FileBlob> {
        let mut bytes = Vec::with_capacity(self.padded_len);
        for (i, p) in self.parts.iter().enumerate() {
            let per_slot: Vec<Vec<MulticastMessage>> = messages
                .iter()
                .map(|slot| slot.get(i).cloned().unwrap_or_default())
                .collect();
            bytes.extend(user_decode(p, session, &per_slot)?.bytes);
        }
        let len = *self
            .original_lens
            .get(session.demand)
            .ok_or(Error::DemandOutOfRange {
                demand: session.demand,
                files: self.original_lens.len(),
            })?;
        bytes.truncate(len);
        Ok(FileBlob::new(session.demand, bytes))
    }

    /// Total backhaul bytes divided by the padded file length.
    pub fn normalized_load(&self, messages: &[Vec<Vec<MulticastMessage>>]) -> BigRational {
        let bytes: usize = messages.iter().flatten().flatten().map(|m| m.payload.len()).sum();
        if self.padded_len == 0 {
            return BigRational::zero();
        }
        BigRational::new(BigInt::from(bytes), BigInt::from(self.padded_len))
    }
}
