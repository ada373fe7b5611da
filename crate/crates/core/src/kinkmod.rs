//! Kink counting and the parity-fixing path modifications.

use crate::error::{Error, Result};
use crate::lattice::{CellCoord, HeightMap, QubitPlane};
use crate::program::Basis;
use crate::routing::{from_levels, to_levels, Path3D, SegmentKind, Step};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Parity {
        if n % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KinkCount {
    pub count: usize,
    pub parity: Parity,
}

/// Counts vertical segments whose neighboring horizontal moves are
/// perpendicular.
pub fn count_kinks(path: &Path3D) -> KinkCount {
    let steps = path.steps();
    let mut count = 0;
    for seg in path.segments() {
        if seg.kind != SegmentKind::Vertical || seg.start == 0 || seg.end >= steps.len() {
            continue;
        }
        if let (Some(Step::Horizontal(a)), Some(Step::Horizontal(b))) =
            (steps[seg.start - 1], steps[seg.end])
        {
            if a.is_perpendicular(b) {
                count += 1;
            }
        }
    }
    KinkCount {
        count,
        parity: Parity::of(count),
    }
}

pub fn required_parity(basis: Basis) -> Parity {
    match basis {
        Basis::XX | Basis::ZZ => Parity::Even,
        Basis::Cnot => Parity::Odd,
    }
}

fn first_corner(cells: &[CellCoord]) -> Option<usize> {
    (1..cells.len().saturating_sub(1)).find(|&i| {
        let a = cells[i - 1].dir_to(cells[i]);
        let b = cells[i].dir_to(cells[i + 1]);
        matches!((a, b), (Some(a), Some(b)) if a.is_perpendicular(b))
    })
}

/// Flips the kink parity of a lifted path by editing the first corner from
/// the start end. Only raises voxels, so the result stays above the
/// terrain the input was lifted onto.
pub fn fix_kink_parity(path: &Path3D, _h: &HeightMap) -> Result<Path3D> {
    let (cells, mut levels) = to_levels(path)
        .ok_or_else(|| Error::NotApplicable("path is not a lifted projection".into()))?;
    let i = first_corner(&cells)
        .ok_or_else(|| Error::NotApplicable("path has no corner".into()))?;
    let before = count_kinks(path).parity;
    if levels[i - 1] < levels[i] {
        levels[i - 1] = levels[i];
    } else if levels[i - 1] > levels[i] {
        levels[i] = levels[i - 1];
        if count_kinks(&from_levels(&cells, &levels)).parity == before {
            levels[i - 1] += 1;
        }
    } else {
        levels[i - 1] += 1;
    }
    let out = from_levels(&cells, &levels);
    debug_assert_ne!(count_kinks(&out).parity, before);
    Ok(out)
}

/// Adds one kink to a corner-free path by detouring two consecutive cells
/// sideways and stepping the following move up a layer. `is_free` decides
/// whether a voxel outside the path may be used. Tries each position from
/// the start end, left before right.
pub fn twist_straight_path(
    plane: &QubitPlane,
    path: &Path3D,
    is_free: impl Fn(CellCoord, u32) -> bool,
) -> Option<Path3D> {
    let (cells, levels) = to_levels(path)?;
    if first_corner(&cells).is_some() {
        return None;
    }
    let n = cells.len();
    for i in 1..n.saturating_sub(3) {
        let l = levels[i - 1];
        if levels[i - 1..=i + 2].iter().any(|&x| x != l) {
            continue;
        }
        let d = cells[i].dir_to(cells[i + 1])?;
        for lateral in [d.left(), d.right()] {
            let (Some(a), Some(b)) = (
                plane.neighbor(cells[i], lateral),
                plane.neighbor(cells[i + 1], lateral),
            ) else {
                continue;
            };
            if !(is_free(a, l)
                && is_free(b, l)
                && is_free(cells[i + 1], l + 1)
                && is_free(cells[i + 2], l + 1))
            {
                continue;
            }
            let mut nc = cells[..=i].to_vec();
            nc.extend([a, b]);
            nc.extend_from_slice(&cells[i + 1..]);
            let mut nl = levels[..i].to_vec();
            nl.extend([l, l, l, l + 1]);
            nl.extend_from_slice(&levels[i + 2..]);
            return Some(from_levels(&nc, &nl));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_plane, VoxelCoord};
    use crate::routing::{lift_path, Path2D};

    fn c(x: u32, y: u32) -> CellCoord {
        CellCoord::new(x, y)
    }

    fn l_shape() -> Path2D {
        Path2D::new(vec![c(0, 0), c(1, 0), c(1, 1), c(1, 2), c(2, 2)])
    }

    #[test]
    fn flat_path_has_no_kinks() {
        let p = l_shape().at_layer(0);
        assert_eq!(count_kinks(&p), KinkCount { count: 0, parity: Parity::Even });
    }

    #[test]
    fn collinear_vertical_is_not_a_kink() {
        let p = Path3D::new(vec![
            VoxelCoord::new(0, 0, 0),
            VoxelCoord::new(1, 0, 0),
            VoxelCoord::new(1, 0, 1),
            VoxelCoord::new(2, 0, 1),
        ]);
        assert_eq!(count_kinks(&p).count, 0);
    }

    #[test]
    fn perpendicular_vertical_is_a_kink() {
        let p = Path3D::new(vec![
            VoxelCoord::new(0, 0, 0),
            VoxelCoord::new(1, 0, 0),
            VoxelCoord::new(1, 0, 1),
            VoxelCoord::new(1, 1, 1),
        ]);
        assert_eq!(count_kinks(&p).count, 1);
        assert_eq!(count_kinks(&p.reversed()).count, 1);
    }

    #[test]
    fn parity_requirements() {
        assert_eq!(required_parity(Basis::ZZ), Parity::Even);
        assert_eq!(required_parity(Basis::XX), Parity::Even);
        assert_eq!(required_parity(Basis::Cnot), Parity::Odd);
    }

    #[test]
    fn fix_flat_corner_adds_a_kink() {
        let plane = build_plane(2, 0).unwrap();
        let h = HeightMap::new(&plane);
        let p = l_shape().at_layer(0);
        let fixed = fix_kink_parity(&p, &h).unwrap();
        assert_eq!(count_kinks(&fixed).count, 1);
        assert!(fixed.len() <= p.len() + 2);
        assert_eq!(fixed.first().cell, p.first().cell);
        assert_eq!(fixed.last(), p.last());
    }

    #[test]
    fn fix_aligns_existing_kink() {
        let plane = build_plane(2, 0).unwrap();
        let mut h = HeightMap::new(&plane);
        h.set(c(1, 1), 1);
        h.set(c(1, 2), 1);
        h.set(c(2, 2), 1);
        let p = lift_path(&l_shape(), &h);
        assert_eq!(count_kinks(&p).count, 1);
        let fixed = fix_kink_parity(&p, &h).unwrap();
        assert_eq!(count_kinks(&fixed).count, 0);
        assert!(fixed.voxels.iter().all(|v| v.t >= h.get(v.cell)));
    }

    #[test]
    fn straight_path_is_not_applicable() {
        let plane = build_plane(3, 0).unwrap();
        let h = HeightMap::new(&plane);
        let p = Path2D::new(vec![c(0, 1), c(1, 1), c(2, 1), c(3, 1), c(4, 1)]).at_layer(0);
        assert!(matches!(fix_kink_parity(&p, &h), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn twist_adds_one_kink_and_four_voxels() {
        let plane = build_plane(3, 0).unwrap();
        let p = Path2D::new(vec![c(0, 1), c(1, 1), c(2, 1), c(3, 1), c(4, 1)]).at_layer(0);
        let twisted = twist_straight_path(&plane, &p, |_, _| true).unwrap();
        assert_eq!(count_kinks(&twisted).count, 1);
        assert_eq!(twisted.len(), p.len() + 4);
        assert_eq!(twisted.first(), p.first());
        assert_eq!(twisted.last(), p.last());
        assert!(twisted.steps().iter().all(Option::is_some));
    }

    #[test]
    fn walled_twist_fails() {
        let plane = build_plane(3, 0).unwrap();
        let p = Path2D::new(vec![c(0, 1), c(1, 1), c(2, 1), c(3, 1), c(4, 1)]).at_layer(0);
        assert!(twist_straight_path(&plane, &p, |cell, _| cell.y == 1).is_none());
    }
}
