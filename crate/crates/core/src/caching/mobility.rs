use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::{MulticastMessage, Placement, Scheme, UserSession};
use crate::coloring::{require_valid, Coloring};
use crate::mds::{FileBlob, MdsCode};
use crate::topology::CellGrid;
use crate::{Error, Result};

/// Per-group level `t_g = |G_g| M T / N`.
pub(super) fn group_level(
    size: usize,
    memory: &BigRational,
    files: usize,
    path_length: usize,
) -> BigRational {
    memory * BigRational::new(BigInt::from(size * path_length), BigInt::from(files))
}

/// Mobility-aware placement: files are `(L, T)` MDS-coded and color group
/// `l` holds fragment `l` of every file at level `t = K̂ M T / N`.
pub fn mobility_place(
    grid: &CellGrid,
    coloring: &Coloring,
    files: usize,
    memory: &BigRational,
    path_length: usize,
    library: &[FileBlob],
) -> Result<Placement> {
    check_inputs(grid, coloring, files, memory, path_length, library)?;
    require_valid(grid, coloring, path_length)?;
    let mut groups = Vec::with_capacity(coloring.num_colors());
    for members in coloring.groups() {
        let t = group_level(members.len(), memory, files, path_length);
        if !t.is_integer() {
            return Err(Error::NonIntegerLevel { level: t.to_string() });
        }
        let t: usize = t.to_integer().try_into().expect("bounded by group size");
        if t > members.len() {
            return Err(Error::InvalidParameter(format!(
                "M = {memory} exceeds the fragment budget N/T = {}/{path_length}",
                files
            )));
        }
        groups.push((members.clone(), t));
    }
    let l = coloring.num_colors();
    Placement::build(
        Scheme::Mobility {
            data_fragments: path_length,
            colors: l,
        },
        grid.len(),
        MdsCode::new(path_length, l)?,
        memory.clone(),
        groups,
        library,
    )
}

pub(super) fn check_inputs(
    grid: &CellGrid,
    coloring: &Coloring,
    files: usize,
    memory: &BigRational,
    path_length: usize,
    library: &[FileBlob],
) -> Result<()> {
    if coloring.num_cells() != grid.len() {
        return Err(Error::InvalidParameter(format!(
            "coloring covers {} cells, grid has {}",
            coloring.num_cells(),
            grid.len()
        )));
    }
    if path_length == 0 || path_length > coloring.num_colors() {
        return Err(Error::InvalidParameter(format!(
            "T = {path_length} must be in 1..=L = {}",
            coloring.num_colors()
        )));
    }
    if library.len() != files {
        return Err(Error::InvalidParameter(format!(
            "expected {files} files, got {}",
            library.len()
        )));
    }
    if *memory < BigRational::zero() {
        return Err(Error::InvalidParameter("M must be non-negative".into()));
    }
    Ok(())
}

/// Messages of slot `slot`. Every group runs coded delivery among its SBSs
/// for the users they currently host; SBSs with several users serve them
/// in successive rounds (ascending user id).
pub fn mobility_deliver(
    placement: &Placement,
    sessions: &[UserSession],
    slot: usize,
) -> Result<Vec<MulticastMessage>> {
    let Scheme::Mobility { colors, .. } = placement.scheme() else {
        return Err(Error::InvalidParameter("placement is not mobility-aware".into()));
    };
    let mut residents: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for s in sessions {
        placement.check_demand(s.demand)?;
        let &cell = s.path.cells.get(slot).ok_or_else(|| {
            Error::InvalidPath(format!(
                "user {} has a path of {} cells, slot {slot} requested",
                s.user,
                s.path.len()
            ))
        })?;
        if cell >= placement.num_sbs() {
            return Err(Error::InvalidCell {
                cell,
                cells: placement.num_sbs(),
            });
        }
        let color = placement.group_of(cell).expect("every cell has a color");
        if s.path.cells[..slot]
            .iter()
            .any(|&c| placement.group_of(c) == Some(color))
        {
            return Err(Error::Scheduling {
                user: s.user,
                slot,
                color,
            });
        }
        residents.entry(cell).or_default().push((s.user, s.demand));
    }
    residents.values_mut().for_each(|v| v.sort_unstable());
    let rounds = residents.values().map(Vec::len).max().unwrap_or(0);

    let mut out = Vec::new();
    for g in 0..colors {
        for round in 0..rounds {
            let active: BTreeMap<_, _> = placement.groups()[g]
                .members
                .iter()
                .filter_map(|s| residents.get(s).and_then(|r| r.get(round)).map(|&u| (*s, u)))
                .collect();
            out.extend(placement.deliver_group(g, slot, round, &active));
        }
    }
    Ok(out)
}

/// Recovers one fragment per slot from the serving SBS and its multicasts,
/// then MDS-decodes. `messages[τ]` holds the messages of slot `τ`.
pub fn user_decode(
    placement: &Placement,
    session: &UserSession,
    messages: &[Vec<MulticastMessage>],
) -> Result<FileBlob> {
    let Scheme::Mobility { data_fragments, .. } = placement.scheme() else {
        return Err(Error::InvalidParameter("placement is not mobility-aware".into()));
    };
    if session.path.len() < data_fragments || messages.len() < data_fragments {
        return Err(Error::InsufficientFragments {
            have: session.path.len().min(messages.len()),
            need: data_fragments,
        });
    }
    let fragments = (0..data_fragments)
        .map(|slot| {
            placement.recover_fragment(
                session.user,
                session.demand,
                session.path.cells[slot],
                slot,
                &messages[slot],
            )
        })
        .collect::<Result<Vec<_>>>()?;
    placement.code().decode(&fragments)
}
