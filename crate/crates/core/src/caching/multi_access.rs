use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{DemandVector, MulticastMessage, Placement, Scheme};
use crate::mds::{FileBlob, MdsCode};
use crate::topology::CellId;
use crate::{Error, Result};

/// Cyclic access: user `k` reaches SBSs `k, k+1, …, k+L-1 (mod K)`.
pub fn cyclic_access(k: usize, l: usize) -> Vec<Vec<CellId>> {
    (0..k).map(|u| (0..l).map(|j| (u + j) % k).collect()).collect()
}

/// Multi-access placement: SBSs split into `L` groups `{k : k mod L = l}`;
/// fragment `l` of each file is placed at level `t` inside group `l`.
pub fn multi_access_place(
    k: usize,
    l: usize,
    files: usize,
    level: usize,
    library: &[FileBlob],
) -> Result<Placement> {
    if l == 0 || k == 0 || !k.is_multiple_of(l) {
        return Err(Error::InvalidParameter(format!("L = {l} must divide K = {k}")));
    }
    if level > k / l {
        return Err(Error::InvalidParameter(format!(
            "t = {level} exceeds group size K/L = {}",
            k / l
        )));
    }
    if library.len() != files {
        return Err(Error::InvalidParameter(format!(
            "expected {files} files, got {}",
            library.len()
        )));
    }
    let groups = (0..l).map(|g| ((g..k).step_by(l).collect(), level)).collect();
    let memory = BigRational::new(BigInt::from(level * files), BigInt::from(k));
    Placement::build(
        Scheme::MultiAccess { groups: l },
        k,
        MdsCode::new(l, l)?,
        memory,
        groups,
        library,
    )
}

/// Delivery for cyclic multi-access. Round `l'` of group `l` serves SBS
/// `s ∈ G_l` with the demand of user `(s - l') mod K`.
pub fn multi_access_deliver(
    placement: &Placement,
    demand: &DemandVector,
    access: &[Vec<CellId>],
) -> Result<Vec<MulticastMessage>> {
    let Scheme::MultiAccess { groups: l } = placement.scheme() else {
        return Err(Error::InvalidParameter("placement is not multi-access".into()));
    };
    let k = placement.num_sbs();
    if demand.0.len() != k {
        return Err(Error::InvalidParameter(format!(
            "demand vector has {} entries for {k} users",
            demand.0.len()
        )));
    }
    if access != cyclic_access(k, l).as_slice() {
        return Err(Error::UnsupportedAccessPattern(
            "only the cyclic pattern (user k reaches SBS k..k+L-1 mod K) is supported".into(),
        ));
    }
    for &d in &demand.0 {
        placement.check_demand(d)?;
    }
    let mut out = Vec::new();
    for g in 0..l {
        for shift in 0..l {
            let active: BTreeMap<_, _> = placement.groups()[g]
                .members
                .iter()
                .map(|&s| {
                    let user = (s + k - shift) % k;
                    (s, (user, demand.0[user]))
                })
                .collect();
            out.extend(placement.deliver_group(g, 0, shift, &active));
        }
    }
    Ok(out)
}

/// User `user` collects one fragment from each SBS in its window and
/// decodes.
pub fn multi_access_decode(
    placement: &Placement,
    user: usize,
    demand: &DemandVector,
    messages: &[MulticastMessage],
) -> Result<FileBlob> {
    let Scheme::MultiAccess { groups: l } = placement.scheme() else {
        return Err(Error::InvalidParameter("placement is not multi-access".into()));
    };
    let k = placement.num_sbs();
    let file = *demand
        .0
        .get(user)
        .ok_or_else(|| Error::InvalidParameter(format!("no user {user}")))?;
    let fragments = (0..l)
        .map(|j| placement.recover_fragment(user, file, (user + j) % k, 0, messages))
        .collect::<Result<Vec<_>>>()?;
    placement.code().decode(&fragments)
}

#[cfg(test)]
mod tests {
    use super::super::mn::{mn_deliver, mn_place};
    use super::*;

    fn library(n: usize, len: usize) -> Vec<FileBlob> {
        (0..n)
            .map(|i| FileBlob::new(i, (0..len).map(|b| (b * 13 + i * 5) as u8).collect()))
            .collect()
    }

    #[test]
    fn four_users_two_groups() {
        let lib = library(4, 16);
        let p = multi_access_place(4, 2, 4, 1, &lib).unwrap();
        assert_eq!(p.subpacketization(), 4);
        assert_eq!(p.stored_subfiles_per_file(), 4);
        let d = DemandVector(vec![3, 1, 0, 2]);
        let msgs = multi_access_deliver(&p, &d, &cyclic_access(4, 2)).unwrap();
        assert_eq!(p.normalized_load(&msgs), BigRational::from_integer(1.into()));
        for u in 0..4 {
            assert_eq!(multi_access_decode(&p, u, &d, &msgs).unwrap(), lib[d.0[u]]);
        }
    }

    #[test]
    fn single_group_matches_single_access() {
        let lib = library(5, 10);
        let d = DemandVector(vec![4, 0, 2, 1, 3]);
        let ma = multi_access_place(5, 1, 5, 2, &lib).unwrap();
        let mn = mn_place(5, 5, 2, &lib).unwrap();
        let a = multi_access_deliver(&ma, &d, &cyclic_access(5, 1)).unwrap();
        let b = mn_deliver(&mn, &d).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(
                (&x.subset, &x.constituents, &x.payload),
                (&y.subset, &y.constituents, &y.payload)
            );
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let lib = library(3, 6);
        assert!(multi_access_place(5, 2, 3, 1, &lib).is_err());
        let p = multi_access_place(4, 2, 3, 1, &lib).unwrap();
        let mut access = cyclic_access(4, 2);
        access[0] = vec![0, 2];
        assert!(matches!(
            multi_access_deliver(&p, &DemandVector(vec![0, 1, 2, 0]), &access),
            Err(Error::UnsupportedAccessPattern(_))
        ));
    }
}
