//! Frame geometry and the reconstruction state shared by encoder and
//! decoder. Both sides resolve syntax into predictions and rebuild pixels
//! through the same code, so a keyed decode reproduces the encoder's
//! reconstruction exactly.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::roi::TileGrid;
use crate::yuv::{Frame, Plane, PixelRegion};

use super::config::CodecConfig;
use super::cu::{FrameParams, PredSyntax};
use super::inter::{amvp_list, fetch_block, merge_list, MotionInfo, Mv, Neighbors};
use super::intra::{build_mpm_list, chroma_candidates, predict, rem_to_mode, RefSamples};
use super::transform::{dequantize_inverse, diag_scan, from_scan};

/// Block and tile geometry of one coded sequence.
#[derive(Debug, Clone)]
pub struct Layout {
    pub width: usize,
    pub height: usize,
    pub cu: usize,
    pub tu: usize,
    pub grid: TileGrid,
    pub cus_x: usize,
    pub cus_y: usize,
    /// CU origins (in CU units) in coding order: tiles in raster order,
    /// CUs in raster order inside each tile.
    pub order: Vec<(usize, usize)>,
}

impl Layout {
    pub fn new(width: usize, height: usize, cfg: &CodecConfig) -> Result<Self> {
        cfg.validate()?;
        if width == 0 || height == 0 || !width.is_multiple_of(cfg.cu_size) || !height.is_multiple_of(cfg.cu_size) {
            return Err(Error::Config(format!(
                "frame {width}x{height} must be a nonzero multiple of the {} px CU",
                cfg.cu_size
            )));
        }
        let grid = TileGrid::new(width, height, cfg.tile_w, cfg.tile_h)?;
        let cu = cfg.cu_size;
        let mut order = Vec::with_capacity((width / cu) * (height / cu));
        for row in 0..grid.rows {
            for col in 0..grid.cols {
                let t = grid.tile_region(col, row);
                for cy in (t.y1 / cu)..(t.y2 / cu) {
                    for cx in (t.x1 / cu)..(t.x2 / cu) {
                        order.push((cx, cy));
                    }
                }
            }
        }
        Ok(Layout {
            width,
            height,
            cu,
            tu: cfg.tu_size,
            grid,
            cus_x: width / cu,
            cus_y: height / cu,
            order,
        })
    }

    pub fn tile_of_cu(&self, cx: usize, cy: usize) -> usize {
        self.grid.tile_of(cx * self.cu, cy * self.cu)
    }

    pub fn frame_params(&self, inter: bool, rn: u32, max_dqp: u32) -> FrameParams {
        FrameParams {
            inter,
            rn,
            max_dqp,
            tu: self.tu,
            cu: self.cu,
        }
    }

    /// Frame-wide raster index of the `t`-th luma TU of CU (cx, cy).
    pub fn luma_tu_index(&self, cx: usize, cy: usize, t: usize) -> usize {
        let per_row = self.cu / self.tu;
        let x = cx * self.cu + (t % per_row) * self.tu;
        let y = cy * self.cu + (t / per_row) * self.tu;
        (y / self.tu) * (self.width / self.tu) + x / self.tu
    }

    pub fn luma_tu_count(&self) -> usize {
        (self.width / self.tu) * (self.height / self.tu)
    }
}

/// Samples a motion-compensated block actually reads after edge clamping,
/// as a luma-resolution rectangle.
pub fn luma_footprint(layout: &Layout, x: i64, y: i64, n: usize) -> PixelRegion {
    let cl = |v: i64, max: usize| v.clamp(0, max as i64 - 1) as usize;
    PixelRegion::new(
        cl(x, layout.width),
        cl(y, layout.height),
        cl(x + n as i64 - 1, layout.width) + 1,
        cl(y + n as i64 - 1, layout.height) + 1,
    )
}

/// Whether motion `mv` from CU (cx, cy) reads any pixel of an ROI tile of
/// the reference, in luma or (at half resolution) in chroma.
pub fn touches_roi(layout: &Layout, ref_roi: &[bool], cx: usize, cy: usize, mv: Mv) -> bool {
    if !ref_roi.iter().any(|&b| b) {
        return false;
    }
    let (x0, y0) = ((cx * layout.cu) as i64, (cy * layout.cu) as i64);
    let luma = luma_footprint(layout, x0 + mv.x as i64, y0 + mv.y as i64, layout.cu);
    let c = mv.chroma();
    let half = layout.cu / 2;
    let (cw, ch) = (layout.width / 2, layout.height / 2);
    let cl = |v: i64, max: usize| v.clamp(0, max as i64 - 1) as usize;
    let (cx0, cy0) = (x0 / 2 + c.x as i64, y0 / 2 + c.y as i64);
    let chroma = PixelRegion::new(
        2 * cl(cx0, cw),
        2 * cl(cy0, ch),
        2 * (cl(cx0 + half as i64 - 1, cw) + 1),
        2 * (cl(cy0 + half as i64 - 1, ch) + 1),
    );
    let g = &layout.grid;
    (0..g.rows).any(|row| {
        (0..g.cols).any(|col| {
            ref_roi[row * g.cols + col] && {
                let t = g.tile_region(col, row);
                t.intersects(&luma) || t.intersects(&chroma)
            }
        })
    })
}

/// Prediction choice with every index resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolved {
    Intra { luma: u8, chroma: u8 },
    Inter(MotionInfo),
}

#[derive(Debug, Clone, Copy, Default)]
struct CuState {
    coded: bool,
    intra_mode: Option<u8>,
    motion: Option<MotionInfo>,
}

/// Predicted samples of one CU: luma `cu`², then Cb and Cr `(cu/2)`².
pub struct CuPrediction {
    pub planes: [Vec<i32>; 3],
}

/// Reconstruction state of the frame being coded.
pub struct FrameState<'a> {
    pub layout: &'a Layout,
    pub recon: Frame,
    refs: &'a [Arc<Frame>],
    cus: Vec<CuState>,
}

pub fn clip_pixel(v: i32) -> u8 {
    v.clamp(0, 255) as u8
}

impl<'a> FrameState<'a> {
    pub fn new(layout: &'a Layout, refs: &'a [Arc<Frame>]) -> Self {
        FrameState {
            layout,
            recon: Frame::gray(layout.width, layout.height),
            refs,
            cus: vec![CuState::default(); layout.cus_x * layout.cus_y],
        }
    }

    pub fn rn(&self) -> u32 {
        self.refs.len() as u32
    }

    /// State of the neighbour at offset (dx, dy) if it is inside the frame,
    /// in the same tile and already coded.
    fn neighbour(&self, cx: usize, cy: usize, dx: isize, dy: isize) -> Option<&CuState> {
        let nx = cx as isize + dx;
        let ny = cy as isize + dy;
        if nx < 0 || ny < 0 || nx as usize >= self.layout.cus_x || ny as usize >= self.layout.cus_y {
            return None;
        }
        let (nx, ny) = (nx as usize, ny as usize);
        if self.layout.tile_of_cu(nx, ny) != self.layout.tile_of_cu(cx, cy) {
            return None;
        }
        let s = &self.cus[ny * self.layout.cus_x + nx];
        s.coded.then_some(s)
    }

    pub fn mpm(&self, cx: usize, cy: usize) -> [u8; 3] {
        let left = self.neighbour(cx, cy, -1, 0).and_then(|s| s.intra_mode);
        let above = self.neighbour(cx, cy, 0, -1).and_then(|s| s.intra_mode);
        build_mpm_list(left, above)
    }

    pub fn neighbors(&self, cx: usize, cy: usize) -> Neighbors {
        let m = |dx, dy| self.neighbour(cx, cy, dx, dy).and_then(|s| s.motion);
        Neighbors {
            a0: m(-1, 1),
            a1: m(-1, 0),
            b0: m(1, -1),
            b1: m(0, -1),
            b2: m(-1, -1),
        }
    }

    /// Reference samples around CU (cx, cy) in luma (`chroma == false`) or
    /// in one chroma plane.
    pub fn intra_refs(&self, cx: usize, cy: usize, plane: &Plane, chroma: bool) -> RefSamples {
        let s = if chroma { 2 } else { 1 };
        let n = self.layout.cu / s;
        let (x0, y0) = ((cx * n) as isize, (cy * n) as isize);
        let cu = self.layout.cu as isize;
        RefSamples::gather(n, x0, y0, |x, y| {
            if x < 0 || y < 0 || x as usize >= plane.width || y as usize >= plane.height {
                return None;
            }
            let (ncx, ncy) = ((x * s as isize) / cu, (y * s as isize) / cu);
            self.neighbour(cx, cy, ncx - cx as isize, ncy - cy as isize)
                .map(|_| plane.get(x as usize, y as usize))
        })
    }

    pub fn resolve(&self, cx: usize, cy: usize, pred: &PredSyntax) -> Result<Resolved> {
        Ok(match *pred {
            PredSyntax::Intra {
                mpm_flag,
                mpm_idx,
                rem,
                chroma,
            } => {
                let mpm = self.mpm(cx, cy);
                let luma = if mpm_flag {
                    *mpm.get(mpm_idx as usize)
                        .ok_or_else(|| Error::Corrupt(format!("MPM index {mpm_idx}")))?
                } else {
                    if rem > 31 {
                        return Err(Error::Corrupt(format!("mode remainder {rem}")));
                    }
                    rem_to_mode(rem, &mpm)
                };
                let cands = chroma_candidates(luma);
                let chroma = *cands
                    .get(chroma as usize)
                    .ok_or_else(|| Error::Corrupt(format!("chroma mode index {chroma}")))?;
                Resolved::Intra { luma, chroma }
            }
            PredSyntax::Merge { idx } => {
                let list = merge_list(&self.neighbors(cx, cy), self.refs.len());
                Resolved::Inter(
                    *list
                        .get(idx as usize)
                        .ok_or_else(|| Error::Corrupt(format!("merge index {idx}")))?,
                )
            }
            PredSyntax::Amvp {
                ref_idx,
                mvd,
                mvp_idx,
            } => {
                let preds = amvp_list(&self.neighbors(cx, cy), ref_idx);
                let p = *preds
                    .get(mvp_idx as usize)
                    .ok_or_else(|| Error::Corrupt(format!("MVP index {mvp_idx}")))?;
                Resolved::Inter(MotionInfo {
                    mv: p + mvd,
                    ref_idx,
                })
            }
        })
    }

    pub fn predict(&self, cx: usize, cy: usize, r: &Resolved) -> Result<CuPrediction> {
        let n = self.layout.cu;
        let h = n / 2;
        Ok(match *r {
            Resolved::Intra { luma, chroma } => {
                let y = predict(&self.intra_refs(cx, cy, &self.recon.y, false), luma);
                let u = predict(&self.intra_refs(cx, cy, &self.recon.u, true), chroma);
                let v = predict(&self.intra_refs(cx, cy, &self.recon.v, true), chroma);
                CuPrediction { planes: [y, u, v] }
            }
            Resolved::Inter(mi) => {
                let rf = self.refs.get(mi.ref_idx as usize).ok_or_else(|| {
                    Error::Corrupt(format!(
                        "reference {} with {} available",
                        mi.ref_idx,
                        self.refs.len()
                    ))
                })?;
                let (x0, y0) = ((cx * n) as i64, (cy * n) as i64);
                let c = mi.mv.chroma();
                let (cx0, cy0) = (x0 / 2 + c.x as i64, y0 / 2 + c.y as i64);
                CuPrediction {
                    planes: [
                        fetch_block(&rf.y, x0 + mi.mv.x as i64, y0 + mi.mv.y as i64, n, n),
                        fetch_block(&rf.u, cx0, cy0, h, h),
                        fetch_block(&rf.v, cx0, cy0, h, h),
                    ],
                }
            }
        })
    }

    /// Adds the dequantised residual to the prediction, writes the CU into
    /// the reconstruction and records its modes for later neighbours.
    pub fn commit(
        &mut self,
        cx: usize,
        cy: usize,
        pred: &CuPrediction,
        tus: &[Vec<i32>],
        qp: i32,
        r: &Resolved,
    ) {
        let l = self.layout;
        let tu = l.tu;
        let scan = diag_scan(tu);
        let mut t_idx = 0;
        for (p, (plane, pred)) in [&mut self.recon.y, &mut self.recon.u, &mut self.recon.v]
            .into_iter()
            .zip(&pred.planes)
            .enumerate()
        {
            let n = if p == 0 { l.cu } else { l.cu / 2 };
            let (x0, y0) = (cx * n, cy * n);
            let per = n / tu;
            for t in 0..per * per {
                let levels = &tus[t_idx];
                t_idx += 1;
                let res = dequantize_inverse(&from_scan(levels, &scan), tu, qp);
                let (tx, ty) = ((t % per) * tu, (t / per) * tu);
                for j in 0..tu {
                    for i in 0..tu {
                        let v = pred[(ty + j) * n + tx + i] + res[j * tu + i];
                        plane.set(x0 + tx + i, y0 + ty + j, clip_pixel(v));
                    }
                }
            }
        }
        let s = &mut self.cus[cy * l.cus_x + cx];
        s.coded = true;
        (s.intra_mode, s.motion) = match *r {
            Resolved::Intra { luma, .. } => (Some(luma), None),
            Resolved::Inter(mi) => (None, Some(mi)),
        };
    }
}

pub fn cu_qp(base: i32, dqp: i32) -> i32 {
    (base + dqp).clamp(0, 51)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coding_order_is_tile_major() {
        let cfg = CodecConfig::default().with_tile(32);
        let l = Layout::new(64, 48, &cfg).unwrap();
        assert_eq!(
            l.order,
            vec![(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (3, 0), (2, 1), (3, 1), (0, 2), (1, 2), (2, 2), (3, 2)]
        );
        assert!(Layout::new(40, 48, &cfg).is_err());
    }

    #[test]
    fn tu_indices_cover_frame() {
        let cfg = CodecConfig {
            tu_size: 4,
            ..Default::default()
        };
        let l = Layout::new(48, 32, &cfg).unwrap();
        let mut seen = vec![false; l.luma_tu_count()];
        for &(cx, cy) in &l.order {
            for t in 0..16 {
                let i = l.luma_tu_index(cx, cy, t);
                assert!(!std::mem::replace(&mut seen[i], true));
            }
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn roi_footprint_includes_chroma_and_clamping() {
        let cfg = CodecConfig::default().with_tile(16);
        let l = Layout::new(64, 64, &cfg).unwrap();
        let mut roi = vec![false; 16];
        roi[1] = true; // tile at x 16..32, y 0..16
        assert!(!touches_roi(&l, &roi, 0, 1, Mv::ZERO));
        assert!(touches_roi(&l, &roi, 0, 1, Mv::new(1, -1)));
        assert!(!touches_roi(&l, &roi, 0, 1, Mv::new(0, -1)));
        // far out of frame clamps onto the left column, away from the ROI
        assert!(!touches_roi(&l, &roi, 0, 2, Mv::new(-500, 0)));
        // chroma footprint of an odd mv reaches one chroma sample further
        roi = vec![false; 16];
        roi[2] = true; // x 32..48
        assert!(!touches_roi(&l, &roi, 1, 0, Mv::new(0, 0)));
        assert!(touches_roi(&l, &roi, 1, 0, Mv::new(1, 0)));
    }
}
