//! Integer-pel motion: candidate lists, full search and compensation.

use crate::yuv::Plane;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct Mv {
    pub x: i32,
    pub y: i32,
}

impl Mv {
    pub const ZERO: Mv = Mv { x: 0, y: 0 };

    pub fn new(x: i32, y: i32) -> Self {
        Mv { x, y }
    }

    pub fn l1(self) -> u32 {
        self.x.unsigned_abs() + self.y.unsigned_abs()
    }

    /// Chroma displacement for 4:2:0 (floor halving).
    pub fn chroma(self) -> Mv {
        Mv {
            x: self.x >> 1,
            y: self.y >> 1,
        }
    }
}

impl std::ops::Sub for Mv {
    type Output = Mv;
    fn sub(self, o: Mv) -> Mv {
        Mv::new(self.x.wrapping_sub(o.x), self.y.wrapping_sub(o.y))
    }
}

impl std::ops::Add for Mv {
    type Output = Mv;
    fn add(self, o: Mv) -> Mv {
        Mv::new(self.x.wrapping_add(o.x), self.y.wrapping_add(o.y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MotionInfo {
    pub mv: Mv,
    pub ref_idx: u8,
}

/// Spatial neighbours of a CU; `None` when outside the tile, not yet coded
/// or intra. A0 is below-left, A1 left, B0 above-right, B1 above, B2
/// above-left.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Neighbors {
    pub a0: Option<MotionInfo>,
    pub a1: Option<MotionInfo>,
    pub b0: Option<MotionInfo>,
    pub b1: Option<MotionInfo>,
    pub b2: Option<MotionInfo>,
}

pub const MERGE_CANDIDATES: usize = 5;

/// Merge list: A1, B1, B0, A0, B2 without duplicates, then zero vectors
/// with increasing reference index (wrapping to 0 past the window).
pub fn merge_list(nb: &Neighbors, rn: usize) -> [MotionInfo; MERGE_CANDIDATES] {
    let mut list: Vec<MotionInfo> = Vec::with_capacity(MERGE_CANDIDATES);
    for c in [nb.a1, nb.b1, nb.b0, nb.a0, nb.b2].into_iter().flatten() {
        if !list.contains(&c) && list.len() < MERGE_CANDIDATES {
            list.push(c);
        }
    }
    let mut zero_idx = 0usize;
    while list.len() < MERGE_CANDIDATES {
        let r = if zero_idx < rn { zero_idx } else { 0 };
        list.push(MotionInfo {
            mv: Mv::ZERO,
            ref_idx: r as u8,
        });
        zero_idx += 1;
    }
    [list[0], list[1], list[2], list[3], list[4]]
}

fn pick(cands: &[Option<MotionInfo>], ref_idx: u8) -> Option<Mv> {
    cands
        .iter()
        .flatten()
        .find(|c| c.ref_idx == ref_idx)
        .or_else(|| cands.iter().flatten().next())
        .map(|c| c.mv)
}

/// Two motion-vector predictors: one from the left group (A0, A1), one
/// from the above group (B0, B1, B2), same reference preferred, no scaling.
pub fn amvp_list(nb: &Neighbors, ref_idx: u8) -> [Mv; 2] {
    let mut list = Vec::with_capacity(2);
    if let Some(mv) = pick(&[nb.a0, nb.a1], ref_idx) {
        list.push(mv);
    }
    if let Some(mv) = pick(&[nb.b0, nb.b1, nb.b2], ref_idx) {
        if !list.contains(&mv) {
            list.push(mv);
        }
    }
    while list.len() < 2 {
        list.push(Mv::ZERO);
    }
    [list[0], list[1]]
}

/// Block of `w`×`h` samples at (`x`, `y`) with coordinates clamped into the
/// plane (edge replication), row-major.
pub fn fetch_block(plane: &Plane, x: i64, y: i64, w: usize, h: usize) -> Vec<i32> {
    let mut out = Vec::with_capacity(w * h);
    let max_x = plane.width as i64 - 1;
    let max_y = plane.height as i64 - 1;
    for j in 0..h as i64 {
        let yy = (y + j).clamp(0, max_y) as usize;
        let row = plane.row(yy);
        for i in 0..w as i64 {
            out.push(row[(x + i).clamp(0, max_x) as usize] as i32);
        }
    }
    out
}

/// SAD between a source block and a reference block that lies inside the
/// plane; stops early once `bound` is exceeded.
pub fn sad_inside(src: &[u8], n: usize, reference: &Plane, x: usize, y: usize, bound: u32) -> u32 {
    let mut acc = 0u32;
    for j in 0..n {
        let r = &reference.row(y + j)[x..x + n];
        let s = &src[j * n..j * n + n];
        acc += r
            .iter()
            .zip(s)
            .map(|(&a, &b)| (a as i32 - b as i32).unsigned_abs())
            .sum::<u32>();
        if acc > bound {
            return acc;
        }
    }
    acc
}

/// Exhaustive integer search of ±`range` around the co-located block.
/// Candidates failing `valid` or leaving the plane are skipped. Ties go to
/// the smaller |mv| and then to the earlier raster position.
pub fn full_search(
    src: &[u8],
    n: usize,
    reference: &Plane,
    x0: usize,
    y0: usize,
    range: i32,
    mut valid: impl FnMut(Mv) -> bool,
) -> Option<(Mv, u32)> {
    let mut best: Option<(Mv, u32)> = None;
    for dy in -range..=range {
        for dx in -range..=range {
            let (x, y) = (x0 as i64 + dx as i64, y0 as i64 + dy as i64);
            if x < 0
                || y < 0
                || x as usize + n > reference.width
                || y as usize + n > reference.height
            {
                continue;
            }
            let mv = Mv::new(dx, dy);
            if !valid(mv) {
                continue;
            }
            let bound = best.map_or(u32::MAX, |b| b.1);
            let s = sad_inside(src, n, reference, x as usize, y as usize, bound);
            let better = match best {
                None => true,
                Some((bmv, bs)) => s < bs || (s == bs && mv.l1() < bmv.l1()),
            };
            if better {
                best = Some((mv, s));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(x: i32, y: i32, r: u8) -> Option<MotionInfo> {
        Some(MotionInfo {
            mv: Mv::new(x, y),
            ref_idx: r,
        })
    }

    #[test]
    fn empty_neighbourhood_lists() {
        let m = merge_list(&Neighbors::default(), 3);
        let refs: Vec<u8> = m.iter().map(|c| c.ref_idx).collect();
        assert_eq!(refs, vec![0, 1, 2, 0, 0]);
        assert!(m.iter().all(|c| c.mv == Mv::ZERO));
        assert_eq!(amvp_list(&Neighbors::default(), 0), [Mv::ZERO; 2]);
    }

    #[test]
    fn merge_order_and_pruning() {
        let nb = Neighbors {
            a1: mi(1, 0, 0),
            b1: mi(1, 0, 0),
            b0: mi(2, 2, 1),
            a0: None,
            b2: mi(-3, 0, 0),
        };
        let m = merge_list(&nb, 2);
        assert_eq!(m[0], mi(1, 0, 0).unwrap());
        assert_eq!(m[1], mi(2, 2, 1).unwrap());
        assert_eq!(m[2], mi(-3, 0, 0).unwrap());
        assert_eq!(m[3].mv, Mv::ZERO);
    }

    #[test]
    fn amvp_prefers_same_reference() {
        let nb = Neighbors {
            a0: mi(5, 5, 1),
            a1: mi(1, 1, 0),
            b1: mi(4, 0, 1),
            ..Default::default()
        };
        assert_eq!(amvp_list(&nb, 0), [Mv::new(1, 1), Mv::new(4, 0)]);
        assert_eq!(amvp_list(&nb, 1), [Mv::new(5, 5), Mv::new(4, 0)]);
        let dup = Neighbors {
            a1: mi(2, 2, 0),
            b1: mi(2, 2, 0),
            ..Default::default()
        };
        assert_eq!(amvp_list(&dup, 0), [Mv::new(2, 2), Mv::ZERO]);
    }

    fn textured(w: usize, h: usize, shift: usize) -> Plane {
        let mut p = Plane::new(w, h);
        for y in 0..h {
            for x in 0..w {
                let xs = x.wrapping_sub(shift);
                let v = (xs.wrapping_mul(37) ^ y.wrapping_mul(91)).wrapping_mul(2654435761) >> 7;
                p.set(x, y, (v % 251) as u8);
            }
        }
        p
    }

    #[test]
    fn static_and_shifted_search() {
        let r = textured(48, 48, 0);
        let src: Vec<u8> = (16..32).flat_map(|y| r.row(y)[16..32].to_vec()).collect();
        assert_eq!(full_search(&src, 16, &r, 16, 16, 4, |_| true), Some((Mv::ZERO, 0)));

        // content moves right by 2: the block now at x was at x - 2
        let cur = textured(48, 48, 2);
        let src: Vec<u8> = (16..32).flat_map(|y| cur.row(y)[16..32].to_vec()).collect();
        let (mv, s) = full_search(&src, 16, &r, 16, 16, 4, |_| true).unwrap();
        assert_eq!((mv, s), (Mv::new(-2, 0), 0));
        // exhaustive oracle
        let mut best = (u32::MAX, Mv::ZERO);
        for dy in -4..=4i32 {
            for dx in -4..=4i32 {
                let mut s = 0;
                for j in 0..16 {
                    for i in 0..16 {
                        s += (cur.get(16 + i, 16 + j) as i32
                            - r.get((16 + dx) as usize + i, (16 + dy) as usize + j) as i32)
                            .unsigned_abs();
                    }
                }
                if s < best.0 {
                    best = (s, Mv::new(dx, dy));
                }
            }
        }
        assert_eq!(best.1, mv);
    }

    #[test]
    fn search_respects_validity_and_bounds() {
        let r = textured(32, 32, 0);
        let src: Vec<u8> = (0..16).flat_map(|y| r.row(y)[0..16].to_vec()).collect();
        let got = full_search(&src, 16, &r, 0, 0, 4, |mv| mv != Mv::ZERO).unwrap();
        assert_ne!(got.0, Mv::ZERO);
        assert!(got.0.x >= 0 && got.0.y >= 0);
        assert!(full_search(&src, 16, &r, 0, 0, 4, |_| false).is_none());
    }

    #[test]
    fn fetch_clamps() {
        let r = textured(16, 16, 0);
        let b = fetch_block(&r, -5, -5, 2, 2);
        assert_eq!(b, vec![r.get(0, 0) as i32; 4]);
        let b = fetch_block(&r, 20, 3, 1, 1);
        assert_eq!(b, vec![r.get(15, 3) as i32]);
    }

    #[test]
    fn chroma_mv_floors() {
        assert_eq!(Mv::new(-3, 3).chroma(), Mv::new(-2, 1));
    }
}
