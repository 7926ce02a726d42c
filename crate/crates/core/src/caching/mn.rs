use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::{DemandVector, MulticastMessage, Placement, Scheme};
use crate::mds::{FileBlob, MdsCode};
use crate::{Error, Result};

/// Caching level `t = M K / N`, which must be an integer for a direct
/// placement. Non-integer levels are handled by memory sharing.
pub fn level_from_memory(k: usize, memory: &BigRational, files: usize) -> Result<usize> {
    if files == 0 {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    if *memory < BigRational::zero() || *memory > BigRational::from_integer(files.into()) {
        return Err(Error::InvalidParameter(format!(
            "M = {memory} must lie in [0, N = {files}]"
        )));
    }
    let t = memory * BigRational::new(BigInt::from(k), BigInt::from(files));
    if !t.is_integer() {
        return Err(Error::NonIntegerLevel { level: t.to_string() });
    }
    Ok(t.to_integer().try_into().expect("t <= K"))
}

/// Single-access placement at level `t` over `k` SBSs.
pub fn mn_place(k: usize, files: usize, level: usize, library: &[FileBlob]) -> Result<Placement> {
    if k == 0 {
        return Err(Error::InvalidParameter("K must be positive".into()));
    }
    if level > k {
        return Err(Error::InvalidParameter(format!("t = {level} exceeds K = {k}")));
    }
    if library.len() != files {
        return Err(Error::InvalidParameter(format!(
            "expected {files} files, got {}",
            library.len()
        )));
    }
    let memory = BigRational::new(BigInt::from(level * files), BigInt::from(k));
    Placement::build(
        Scheme::SingleAccess,
        k,
        MdsCode::new(1, 1)?,
        memory,
        vec![((0..k).collect(), level)],
        library,
    )
}

/// Coded delivery with user `k` at SBS `k` requesting `demand.0[k]`.
pub fn mn_deliver(placement: &Placement, demand: &DemandVector) -> Result<Vec<MulticastMessage>> {
    if placement.scheme() != Scheme::SingleAccess {
        return Err(Error::InvalidParameter("placement is not single-access".into()));
    }
    if demand.0.len() != placement.num_sbs() {
        return Err(Error::InvalidParameter(format!(
            "demand vector has {} entries for {} users",
            demand.0.len(),
            placement.num_sbs()
        )));
    }
    let mut active = BTreeMap::new();
    for (k, &d) in demand.0.iter().enumerate() {
        placement.check_demand(d)?;
        active.insert(k, (k, d));
    }
    Ok(placement.deliver_group(0, 0, 0, &active))
}

/// Reconstructs the file of user `user` from its SBS cache and `messages`.
pub fn mn_decode(
    placement: &Placement,
    user: usize,
    demand: &DemandVector,
    messages: &[MulticastMessage],
) -> Result<FileBlob> {
    let file = *demand
        .0
        .get(user)
        .ok_or_else(|| Error::InvalidParameter(format!("no user {user}")))?;
    let fragment = placement.recover_fragment(user, file, user, 0, messages)?;
    placement.code().decode(&[fragment])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn library(n: usize, len: usize) -> Vec<FileBlob> {
        (0..n)
            .map(|i| FileBlob::new(i, (0..len).map(|b| (b * 7 + i * 31 + 1) as u8).collect()))
            .collect()
    }

    #[test]
    fn three_users_level_one() {
        let lib = library(3, 9);
        let p = mn_place(3, 3, 1, &lib).unwrap();
        assert_eq!(p.subpacketization(), 3);
        let ids: Vec<_> = p.caches()[1].subfile_ids().cloned().collect();
        assert_eq!(ids.len(), 3);
        assert!(ids.iter().all(|id| id.subset == vec![1]));
        let d = DemandVector(vec![2, 0, 1]);
        let msgs = mn_deliver(&p, &d).unwrap();
        assert_eq!(msgs.len(), 3);
        assert_eq!(p.normalized_load(&msgs), BigRational::from_integer(1.into()));
        for k in 0..3 {
            assert_eq!(mn_decode(&p, k, &d, &msgs).unwrap(), lib[d.0[k]]);
        }
    }

    #[test]
    fn extreme_levels() {
        let lib = library(2, 8);
        let p = mn_place(4, 2, 0, &lib).unwrap();
        assert!(p.caches().iter().all(|c| c.is_empty()));
        assert_eq!(p.subpacketization(), 1);
        let d = DemandVector(vec![0, 1, 1, 0]);
        let msgs = mn_deliver(&p, &d).unwrap();
        assert_eq!(msgs.len(), 4);
        assert_eq!(mn_decode(&p, 2, &d, &msgs).unwrap(), lib[1]);

        let p = mn_place(4, 2, 4, &lib).unwrap();
        assert!(p.caches().iter().all(|c| c.len() == 2 && c.within_capacity()));
        let msgs = mn_deliver(&p, &d).unwrap();
        assert!(msgs.is_empty());
        assert_eq!(mn_decode(&p, 1, &d, &msgs).unwrap(), lib[1]);
    }

    #[test]
    fn level_must_be_integer() {
        let m = BigRational::new(1.into(), 3.into());
        assert!(matches!(
            level_from_memory(4, &m, 2),
            Err(Error::NonIntegerLevel { .. })
        ));
        let m = BigRational::new(1.into(), 2.into());
        assert_eq!(level_from_memory(4, &m, 2).unwrap(), 1);
    }

    #[test]
    fn out_of_range_demand() {
        let lib = library(2, 4);
        let p = mn_place(2, 2, 1, &lib).unwrap();
        assert!(matches!(
            mn_deliver(&p, &DemandVector(vec![0, 5])),
            Err(Error::DemandOutOfRange { demand: 5, files: 2 })
        ));
    }
}
