//! Placement and XOR-multicast delivery engines.
//!
//! All three access models share one engine. SBSs are partitioned into
//! cache groups; group `g` stores coded fragment `g` of every file with the
//! Maddah-Ali–Niesen placement at level `t_g`: the fragment is cut into
//! `C(|G_g|, t_g)` sub-files, one per `t_g`-subset `I` of the group, and SBS
//! `k` keeps sub-file `I` iff `k ∈ I`. Delivery inside a group sends, for
//! every `(t_g + 1)`-subset `S`, the XOR over active `s ∈ S` of the sub-file
//! `(d_s, S \ {s})`. A user served by SBS `s` peels every message that
//! targets it with the sub-files cached at `s`.
//!
//! - static single access: one group holding all `K` SBSs, no coding;
//! - static multi-access: `L` groups `{k : k mod L = l}`, files split into
//!   `L` plain fragments;
//! - mobility: one group per color, `(L, T)` MDS-coded fragments.

mod memory_sharing;
mod mn;
mod mobility;
mod multi_access;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;

use crate::combinatorics::{binomial_u128, k_subsets};
use crate::mds::{CodedFragment, FileBlob, MdsCode};
use crate::topology::{CellId, MobilityPath};
use crate::{Error, Result};

pub use memory_sharing::{mobility_place_shared, SharedPlacement};
pub use mn::{level_from_memory, mn_decode, mn_deliver, mn_place};
pub use mobility::{mobility_deliver, mobility_place, user_decode};
pub use multi_access::{cyclic_access, multi_access_decode, multi_access_deliver, multi_access_place};

/// Identity of one sub-file: fragment `fragment` of file `file`, cached by
/// exactly the SBSs in `subset`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubfileId {
    pub file: usize,
    pub fragment: usize,
    pub subset: Vec<CellId>,
}

impl fmt::Display for SubfileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let subset: Vec<String> = self.subset.iter().map(ToString::to_string).collect();
        write!(
            f,
            "W[file={}, fragment={}, subset={{{}}}]",
            self.file,
            self.fragment,
            subset.join(",")
        )
    }
}

/// Sub-files stored at one SBS.
#[derive(Debug, Clone)]
pub struct CacheContents {
    pub sbs: CellId,
    /// `M * F` with `F` the padded file length in bytes.
    pub capacity_bytes: BigRational,
    subfiles: BTreeMap<SubfileId, Vec<u8>>,
}

impl CacheContents {
    pub fn get(&self, id: &SubfileId) -> Option<&[u8]> {
        self.subfiles.get(id).map(Vec::as_slice)
    }

    pub fn subfile_ids(&self) -> impl Iterator<Item = &SubfileId> {
        self.subfiles.keys()
    }

    pub fn len(&self) -> usize {
        self.subfiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subfiles.is_empty()
    }

    pub fn stored_bytes(&self) -> usize {
        self.subfiles.values().map(Vec::len).sum()
    }

    pub fn within_capacity(&self) -> bool {
        BigRational::from_integer(BigInt::from(self.stored_bytes())) <= self.capacity_bytes
    }
}

/// Demand of each static user (user `k` sits at SBS `k`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandVector(pub Vec<usize>);

impl DemandVector {
    pub fn all_distinct(&self) -> bool {
        let mut v = self.0.clone();
        v.sort_unstable();
        v.windows(2).all(|w| w[0] != w[1])
    }
}

/// One receiving end of a multicast message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Target {
    pub sbs: CellId,
    pub user: usize,
}

/// XOR of `constituents` sent over the shared backhaul; `targets[i]`
/// wants `constituents[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulticastMessage {
    pub slot: usize,
    pub group: usize,
    pub round: usize,
    /// The `(t + 1)`-subset `S` of the group.
    pub subset: Vec<CellId>,
    pub targets: Vec<Target>,
    pub constituents: Vec<SubfileId>,
    pub payload: Vec<u8>,
}

/// A mobile user's download session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserSession {
    pub user: usize,
    pub demand: usize,
    pub path: MobilityPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    SingleAccess,
    MultiAccess { groups: usize },
    Mobility { data_fragments: usize, colors: usize },
}

/// One cache group and its sub-file layout.
#[derive(Debug, Clone)]
pub struct CacheGroup {
    pub fragment: usize,
    pub members: Vec<CellId>,
    pub level: usize,
    pub subsets: Vec<Vec<CellId>>,
    pub subfile_len: usize,
    rank: HashMap<Vec<CellId>, usize>,
}

impl CacheGroup {
    fn new(fragment: usize, members: Vec<CellId>, level: usize) -> Self {
        let subsets = if members.is_empty() {
            Vec::new()
        } else {
            k_subsets(&members, level)
        };
        let rank = subsets.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        CacheGroup {
            fragment,
            members,
            level,
            subsets,
            subfile_len: 0,
            rank,
        }
    }

    /// `C(|G|, t)`, the number of sub-files each fragment is cut into.
    pub fn split(&self) -> usize {
        self.subsets.len()
    }
}

/// Immutable placement: the server library, per-group layouts and the SBS
/// caches.
#[derive(Debug, Clone)]
pub struct Placement {
    scheme: Scheme,
    code: MdsCode,
    memory: BigRational,
    groups: Vec<CacheGroup>,
    group_of: Vec<Option<usize>>,
    library: Vec<Vec<CodedFragment>>,
    caches: Vec<CacheContents>,
    padded_len: usize,
}

impl Placement {
    /// Builds the placement. `groups[g]` caches coded fragment `g` at level
    /// `levels[g]`; `memory` is `M` in files.
    fn build(
        scheme: Scheme,
        sbs_count: usize,
        code: MdsCode,
        memory: BigRational,
        groups: Vec<(Vec<CellId>, usize)>,
        files: &[FileBlob],
    ) -> Result<Self> {
        if files.is_empty() {
            return Err(Error::InvalidParameter("library is empty".into()));
        }
        for (n, f) in files.iter().enumerate() {
            if f.id != n {
                return Err(Error::InvalidParameter(format!(
                    "file at position {n} has id {}; ids must be 0..N",
                    f.id
                )));
            }
        }
        let mut group_of = vec![None; sbs_count];
        let mut layouts = Vec::with_capacity(groups.len());
        for (g, (members, level)) in groups.into_iter().enumerate() {
            if level > members.len() {
                return Err(Error::InvalidParameter(format!(
                    "level {level} exceeds group {g} size {}",
                    members.len()
                )));
            }
            for &m in &members {
                if m >= sbs_count || group_of[m].replace(g).is_some() {
                    return Err(Error::InvalidParameter(format!(
                        "SBS {m} is out of range or in two groups"
                    )));
                }
            }
            layouts.push(CacheGroup::new(g, members, level));
        }

        let align = layouts
            .iter()
            .map(CacheGroup::split)
            .filter(|&s| s > 0)
            .fold(1usize, |a, s| a.lcm(&s));
        let library: Vec<Vec<CodedFragment>> = files
            .iter()
            .map(|f| code.encode_aligned(f, align))
            .collect::<Result<_>>()?;
        let frag_len = library[0][0].bytes.len();
        if library.iter().any(|fr| fr[0].bytes.len() != frag_len) {
            return Err(Error::InvalidParameter(
                "all files must pad to the same length".into(),
            ));
        }
        let padded_len = frag_len * code.data_fragments();
        for g in &mut layouts {
            g.subfile_len = if g.split() == 0 { 0 } else { frag_len / g.split() };
        }

        let capacity = &memory * BigRational::from_integer(BigInt::from(padded_len));
        let mut caches: Vec<CacheContents> = (0..sbs_count)
            .map(|sbs| CacheContents {
                sbs,
                capacity_bytes: capacity.clone(),
                subfiles: BTreeMap::new(),
            })
            .collect();
        for g in &layouts {
            for (rank, subset) in g.subsets.iter().enumerate() {
                for (n, frags) in library.iter().enumerate() {
                    let bytes = &frags[g.fragment].bytes[rank * g.subfile_len..(rank + 1) * g.subfile_len];
                    let id = SubfileId {
                        file: n,
                        fragment: g.fragment,
                        subset: subset.clone(),
                    };
                    for &k in subset {
                        caches[k].subfiles.insert(id.clone(), bytes.to_vec());
                    }
                }
            }
        }
        Ok(Placement {
            scheme,
            code,
            memory,
            groups: layouts,
            group_of,
            library,
            caches,
            padded_len,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn code(&self) -> &MdsCode {
        &self.code
    }

    /// `M`, in files.
    pub fn memory(&self) -> &BigRational {
        &self.memory
    }

    pub fn num_files(&self) -> usize {
        self.library.len()
    }

    pub fn num_sbs(&self) -> usize {
        self.caches.len()
    }

    pub fn groups(&self) -> &[CacheGroup] {
        &self.groups
    }

    pub fn group_of(&self, sbs: CellId) -> Option<usize> {
        self.group_of.get(sbs).copied().flatten()
    }

    pub fn caches(&self) -> &[CacheContents] {
        &self.caches
    }

    /// Padded file length `F` in bytes; rates are normalized by it.
    pub fn padded_file_len(&self) -> usize {
        self.padded_len
    }

    /// Number of equal pieces each file is cut into: `T * C(K̂, t)` for the
    /// mobility scheme, `L * C(K/L, t)` for multi-access, `C(K, t)` for
    /// single access.
    pub fn subpacketization(&self) -> usize {
        let finest = self
            .groups
            .iter()
            .map(|g| g.subfile_len)
            .filter(|&l| l > 0)
            .min()
            .unwrap_or(self.padded_len);
        self.padded_len / finest
    }

    /// Distinct sub-files stored across all caches for one file.
    pub fn stored_subfiles_per_file(&self) -> usize {
        self.groups.iter().map(CacheGroup::split).sum()
    }

    /// Server-side bytes of a sub-file.
    pub fn subfile(&self, id: &SubfileId) -> Option<&[u8]> {
        let g = self.groups.get(id.fragment)?;
        let rank = *g.rank.get(&id.subset)?;
        let frag = &self.library.get(id.file)?[id.fragment];
        Some(&frag.bytes[rank * g.subfile_len..(rank + 1) * g.subfile_len])
    }

    fn check_demand(&self, file: usize) -> Result<()> {
        if file < self.num_files() {
            Ok(())
        } else {
            Err(Error::DemandOutOfRange {
                demand: file,
                files: self.num_files(),
            })
        }
    }

    /// Coded delivery inside group `g`: one message per `(t + 1)`-subset
    /// that contains at least one active SBS. `active` maps SBS to the
    /// `(user, file)` it serves in this round.
    fn deliver_group(
        &self,
        g: usize,
        slot: usize,
        round: usize,
        active: &BTreeMap<CellId, (usize, usize)>,
    ) -> Vec<MulticastMessage> {
        let group = &self.groups[g];
        if active.is_empty() {
            return Vec::new();
        }
        k_subsets(&group.members, group.level + 1)
            .into_iter()
            .filter_map(|subset| {
                let mut targets = Vec::new();
                let mut constituents = Vec::new();
                let mut payload = vec![0u8; group.subfile_len];
                for &s in &subset {
                    let Some(&(user, file)) = active.get(&s) else {
                        continue;
                    };
                    let id = SubfileId {
                        file,
                        fragment: group.fragment,
                        subset: subset.iter().copied().filter(|&x| x != s).collect(),
                    };
                    let bytes = self.subfile(&id).expect("sub-file exists by construction");
                    payload.iter_mut().zip(bytes).for_each(|(p, b)| *p ^= b);
                    targets.push(Target { sbs: s, user });
                    constituents.push(id);
                }
                (!targets.is_empty()).then_some(MulticastMessage {
                    slot,
                    group: g,
                    round,
                    subset,
                    targets,
                    constituents,
                    payload,
                })
            })
            .collect()
    }

    /// Recovers the fragment cached by `sbs`'s group for `user`, using the
    /// cache of `sbs` and the messages of one slot.
    pub fn recover_fragment(
        &self,
        user: usize,
        file: usize,
        sbs: CellId,
        slot: usize,
        messages: &[MulticastMessage],
    ) -> Result<CodedFragment> {
        self.check_demand(file)?;
        let g = self
            .group_of(sbs)
            .ok_or_else(|| Error::InvalidParameter(format!("SBS {sbs} belongs to no cache group")))?;
        let group = &self.groups[g];
        let cache = &self.caches[sbs];
        let me = Target { sbs, user };

        // messages addressed to this user, by (t + 1)-subset
        let mut inbox: HashMap<&[CellId], Vec<(&MulticastMessage, usize)>> = HashMap::new();
        for m in messages {
            if m.slot != slot || m.group != g {
                continue;
            }
            if let Some(pos) = m.targets.iter().position(|t| *t == me) {
                inbox.entry(m.subset.as_slice()).or_default().push((m, pos));
            }
        }

        let mut bytes = Vec::with_capacity(group.subfile_len * group.split());
        for subset in &group.subsets {
            let want = SubfileId {
                file,
                fragment: group.fragment,
                subset: subset.clone(),
            };
            if subset.contains(&sbs) {
                let piece = cache.get(&want).ok_or_else(|| Error::Undecodable {
                    missing: want.clone(),
                })?;
                bytes.extend_from_slice(piece);
                continue;
            }
            let mut full = subset.clone();
            full.push(sbs);
            full.sort_unstable();
            let (msg, _) = inbox
                .get(full.as_slice())
                .and_then(|ms| ms.iter().find(|(m, pos)| m.constituents[*pos] == want))
                .ok_or_else(|| Error::Undecodable {
                    missing: want.clone(),
                })?;
            let mut piece = msg.payload.clone();
            for (t, other) in msg.targets.iter().zip(&msg.constituents) {
                if *t == me {
                    continue;
                }
                let known = cache.get(other).ok_or_else(|| Error::Undecodable {
                    missing: other.clone(),
                })?;
                piece.iter_mut().zip(known).for_each(|(p, k)| *p ^= k);
            }
            bytes.extend_from_slice(&piece);
        }
        let template = &self.library[file][group.fragment];
        Ok(CodedFragment {
            bytes,
            ..template.clone()
        })
    }

    /// Backhaul bytes of `messages` divided by the padded file length.
    pub fn normalized_load<'a>(
        &self,
        messages: impl IntoIterator<Item = &'a MulticastMessage>,
    ) -> BigRational {
        let bytes: usize = messages.into_iter().map(|m| m.payload.len()).sum();
        BigRational::new(BigInt::from(bytes), BigInt::from(self.padded_len))
    }

    /// Subfile counts as `u128`, for quick comparisons with the formulas.
    pub fn split_counts(&self) -> Vec<u128> {
        self.groups
            .iter()
            .map(|g| binomial_u128(g.members.len() as u64, g.level as u64))
            .collect()
    }
}
