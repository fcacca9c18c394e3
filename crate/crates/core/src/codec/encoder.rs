//! Encoder: mode decision and reconstruction (`analyze`), then keyed or
//! plain bitstream emission (`emit`).
//!
//! Decisions depend only on the source, the configuration and the tile
//! classification, never on the key or level, so one analysis serves every
//! protection level and the plain stream.

use std::sync::Arc;

use rayon::prelude::*;

use crate::cipher::{CipherContext, CipherSession, Direction, ElementTransform, Identity, Level};
use crate::error::{Error, Result};
use crate::keystream::MasterKey;
use crate::roi::{classify_tiles, RoiMap, TileClassification, TileGrid};
use crate::scramble::{canny, classify_tus, scramble, CannyParams};
use crate::yuv::{Frame, Plane, VideoSequence};

use super::config::{CodecConfig, FrameType};
use super::container::{Container, ContainerHeader, FrameRecord};
use super::cu::{cipher_cu, code_cu, CuSyntax, PredSyntax};
use super::entropy::Writer;
use super::frame::{cu_qp, touches_roi, CuPrediction, FrameState, Layout, Resolved};
use super::inter::{amvp_list, fetch_block, full_search, merge_list, MotionInfo, Mv};
use super::intra::{chroma_candidates, mode_to_rem, predict, NUM_MODES};
use super::transform::{diag_scan, forward, quantize, to_scan};

/// One coded CU with its true (unencrypted, unscrambled) syntax.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CuRecord {
    pub cx: usize,
    pub cy: usize,
    pub roi: bool,
    pub syntax: CuSyntax,
}

#[derive(Debug, Clone)]
pub struct FrameAnalysis {
    pub frame_type: FrameType,
    /// Reference-window occupancy while the frame was coded.
    pub rn: u32,
    pub roi_tiles: Vec<bool>,
    pub cus: Vec<CuRecord>,
    /// Edge class of every luma TU, frame raster order.
    pub edge_tus: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub config: CodecConfig,
    pub width: usize,
    pub height: usize,
    pub frames: Vec<FrameAnalysis>,
    /// Encoder-side reconstruction, which a keyed decode must reproduce.
    pub recon: Vec<Frame>,
}

/// Tile classification of every frame from an ROI map.
pub fn classify_sequence(
    rois: &RoiMap,
    width: usize,
    height: usize,
    frames: usize,
    cfg: &CodecConfig,
) -> Result<Vec<TileClassification>> {
    let grid = TileGrid::new(width, height, cfg.tile_w, cfg.tile_h)?;
    Ok((0..frames).map(|f| classify_tiles(&grid, rois, f)).collect())
}

fn sad(a: &[i32], b: &[u8]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(&p, &s)| (p - s as i32).unsigned_abs() as u64)
        .sum()
}

fn block(plane: &Plane, x0: usize, y0: usize, n: usize) -> Vec<u8> {
    (0..n)
        .flat_map(|j| plane.row(y0 + j)[x0..x0 + n].iter().copied())
        .collect()
}

/// Deterministic per-CU delta QP in ±`spread`.
fn dqp_for(frame: usize, cx: usize, cy: usize, spread: u32) -> i32 {
    if spread == 0 {
        return 0;
    }
    let mut z = (frame as u64) << 40 ^ (cy as u64) << 20 ^ cx as u64;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    (z % (2 * spread as u64 + 1)) as i32 - spread as i32
}

struct RefEntry {
    frame: Arc<Frame>,
    roi: Vec<bool>,
}

struct CuSource {
    y: Vec<u8>,
    u: Vec<u8>,
    v: Vec<u8>,
}

fn residual_levels(src: &CuSource, pred: &CuPrediction, layout: &Layout, qp: i32) -> Vec<Vec<i32>> {
    let tu = layout.tu;
    let scan = diag_scan(tu);
    let mut tus = Vec::new();
    for (p, (s, pr)) in [&src.y, &src.u, &src.v].into_iter().zip(&pred.planes).enumerate() {
        let n = if p == 0 { layout.cu } else { layout.cu / 2 };
        let per = n / tu;
        for t in 0..per * per {
            let (tx, ty) = ((t % per) * tu, (t / per) * tu);
            let mut res = Vec::with_capacity(tu * tu);
            for j in 0..tu {
                for i in 0..tu {
                    let k = (ty + j) * n + tx + i;
                    res.push(s[k] as i32 - pr[k]);
                }
            }
            tus.push(to_scan(&quantize(&forward(&res, tu), tu, qp), &scan));
        }
    }
    tus
}

fn best_intra(st: &FrameState, cx: usize, cy: usize, src: &CuSource) -> (u8, u8, u64) {
    let refs_y = st.intra_refs(cx, cy, &st.recon.y, false);
    let (mut best_mode, mut best_sad) = (0u8, u64::MAX);
    for m in 0..NUM_MODES {
        let s = sad(&predict(&refs_y, m), &src.y);
        if s < best_sad {
            (best_mode, best_sad) = (m, s);
        }
    }
    let refs_u = st.intra_refs(cx, cy, &st.recon.u, true);
    let refs_v = st.intra_refs(cx, cy, &st.recon.v, true);
    let cands = chroma_candidates(best_mode);
    let (mut best_c, mut best_cs) = (0u8, u64::MAX);
    for (i, &m) in cands.iter().enumerate() {
        let s = sad(&predict(&refs_u, m), &src.u) + sad(&predict(&refs_v, m), &src.v);
        if s < best_cs {
            (best_c, best_cs) = (i as u8, s);
        }
    }
    (best_mode, best_c, best_sad)
}

fn intra_syntax(st: &FrameState, cx: usize, cy: usize, luma: u8, chroma: u8) -> PredSyntax {
    let mpm = st.mpm(cx, cy);
    match mode_to_rem(luma, &mpm) {
        None => PredSyntax::Intra {
            mpm_flag: true,
            mpm_idx: mpm.iter().position(|&m| m == luma).unwrap() as u8,
            rem: 0,
            chroma,
        },
        Some(rem) => PredSyntax::Intra {
            mpm_flag: false,
            mpm_idx: 0,
            rem,
            chroma,
        },
    }
}

/// Best inter choice as syntax, with its luma SAD.
fn best_inter(
    st: &FrameState,
    refs: &[RefEntry],
    cfg: &CodecConfig,
    cx: usize,
    cy: usize,
    roi: bool,
    src: &CuSource,
) -> Option<(PredSyntax, u64)> {
    let layout = st.layout;
    let n = layout.cu;
    let (x0, y0) = (cx * n, cy * n);
    let allowed = |r: usize, mv: Mv| roi || !touches_roi(layout, &refs[r].roi, cx, cy, mv);

    let mut search: Option<(usize, Mv, u64)> = None;
    for (r, e) in refs.iter().enumerate() {
        if let Some((mv, s)) =
            full_search(&src.y, n, &e.frame.y, x0, y0, cfg.search_range, |mv| allowed(r, mv))
        {
            if search.is_none_or(|b| (s as u64) < b.2) {
                search = Some((r, mv, s as u64));
            }
        }
    }

    let nb = st.neighbors(cx, cy);
    let mut merge: Option<(u8, u64)> = None;
    for (i, c) in merge_list(&nb, refs.len()).iter().enumerate() {
        if (c.ref_idx as usize) >= refs.len() || !allowed(c.ref_idx as usize, c.mv) {
            continue;
        }
        let p = fetch_block(
            &refs[c.ref_idx as usize].frame.y,
            x0 as i64 + c.mv.x as i64,
            y0 as i64 + c.mv.y as i64,
            n,
            n,
        );
        let s = sad(&p, &src.y);
        if merge.is_none_or(|b| s < b.1) {
            merge = Some((i as u8, s));
        }
    }

    if let Some((idx, ms)) = merge {
        if search.is_none_or(|s| ms <= s.2) {
            return Some((PredSyntax::Merge { idx }, ms));
        }
    }
    match search {
        Some((r, mv, s)) => {
            let preds = amvp_list(&nb, r as u8);
            let mvp_idx = if (mv - preds[1]).l1() < (mv - preds[0]).l1() { 1 } else { 0 };
            Some((
                PredSyntax::Amvp {
                    ref_idx: r as u8,
                    mvd: mv - preds[mvp_idx],
                    mvp_idx: mvp_idx as u8,
                },
                s,
            ))
        }
        None => None,
    }
}

/// Runs mode decision and reconstruction over the whole sequence.
pub fn analyze(
    seq: &VideoSequence,
    classes: &[TileClassification],
    cfg: &CodecConfig,
    canny_params: &CannyParams,
) -> Result<Analysis> {
    let (w, h) = (seq.spec.width, seq.spec.height);
    let layout = Layout::new(w, h, cfg)?;
    canny_params.validate()?;
    if classes.len() != seq.frames.len() {
        return Err(Error::SizeMismatch(classes.len(), seq.frames.len()));
    }
    let spread = cfg.dqp_spread.min(cfg.max_dqp);
    let mut window: Vec<RefEntry> = Vec::new();
    let mut frames = Vec::with_capacity(seq.frames.len());
    let mut recon = Vec::with_capacity(seq.frames.len());

    for (f, src_frame) in seq.frames.iter().enumerate() {
        let cls = &classes[f];
        if cls.grid != layout.grid {
            return Err(Error::Config(format!("frame {f}: tile classification grid differs from codec tiles")));
        }
        let frame_type = cfg.frame_type(f);
        let inter = frame_type == FrameType::Inter && !window.is_empty();
        let ref_frames: Vec<Arc<Frame>> = window.iter().map(|e| e.frame.clone()).collect();
        let rn = if inter { ref_frames.len() as u32 } else { 0 };
        let mut st = FrameState::new(&layout, if inter { &ref_frames } else { &[] });
        let mut cus = Vec::with_capacity(layout.order.len());

        for &(cx, cy) in &layout.order {
            let roi = cls.roi[layout.tile_of_cu(cx, cy)];
            let n = layout.cu;
            let src = CuSource {
                y: block(&src_frame.y, cx * n, cy * n, n),
                u: block(&src_frame.u, cx * n / 2, cy * n / 2, n / 2),
                v: block(&src_frame.v, cx * n / 2, cy * n / 2, n / 2),
            };
            let (luma, chroma, intra_sad) = best_intra(&st, cx, cy, &src);
            let mut pred_syntax = intra_syntax(&st, cx, cy, luma, chroma);
            if inter {
                if let Some((p, s)) = best_inter(&st, &window, cfg, cx, cy, roi, &src) {
                    if s <= 2 * intra_sad {
                        pred_syntax = p;
                    }
                }
            }
            let resolved = st.resolve(cx, cy, &pred_syntax)?;
            debug_assert!(match resolved {
                Resolved::Intra { luma: l, .. } => l == luma,
                Resolved::Inter(MotionInfo { ref_idx, .. }) => (ref_idx as u32) < rn,
            });
            let pred = st.predict(cx, cy, &resolved)?;
            let dqp = dqp_for(f, cx, cy, spread);
            let qp = cu_qp(cfg.qp, dqp);
            let tus = residual_levels(&src, &pred, &layout, qp);
            st.commit(cx, cy, &pred, &tus, qp, &resolved);
            cus.push(CuRecord {
                cx,
                cy,
                roi,
                syntax: CuSyntax {
                    dqp,
                    pred: pred_syntax,
                    tus,
                },
            });
        }

        let edge_tus = classify_tus(&canny(&src_frame.y, canny_params), cfg.tu_size);
        let rec = Arc::new(st.recon);
        window.insert(
            0,
            RefEntry {
                frame: rec.clone(),
                roi: cls.roi.clone(),
            },
        );
        window.truncate(cfg.max_ref_frames);
        recon.push((*rec).clone());
        frames.push(FrameAnalysis {
            frame_type,
            rn,
            roi_tiles: cls.roi.clone(),
            cus,
            edge_tus,
        });
    }
    Ok(Analysis {
        config: cfg.clone(),
        width: w,
        height: h,
        frames,
        recon,
    })
}

/// Key material for emission or decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Protection {
    pub key: MasterKey,
    pub level: Level,
    pub nonce: u64,
}

fn emit_frame(a: &Analysis, layout: &Layout, f: usize, prot: Option<Protection>) -> Result<Vec<u8>> {
    let fa = &a.frames[f];
    let mut t: Box<dyn ElementTransform> = match prot {
        Some(p) => Box::new(CipherSession::for_frame(p.key, p.nonce, f as u64, p.level, Direction::Encrypt)),
        None => Box::new(Identity),
    };
    let fp = layout.frame_params(fa.frame_type == FrameType::Inter && fa.rn > 0, fa.rn, a.config.max_dqp);
    let cctx = |roi| CipherContext {
        rn: fa.rn,
        max_dqp: a.config.max_dqp,
        roi,
    };
    let mut w = Writer::new(a.config.qp);
    for rec in &fa.cus {
        let mut syn = rec.syntax.clone();
        if rec.roi && t.scrambling() {
            for ti in 0..fp.luma_tus() {
                let unit = layout.luma_tu_index(rec.cx, rec.cy, ti);
                let params = t
                    .chaotic_params(f as u64, unit as u64)
                    .ok_or(Error::Contract("scrambling transform without chaotic parameters"))?;
                scramble(&mut syn.tus[ti], fa.edge_tus[unit], params)?;
            }
        }
        cipher_cu(&mut syn, t.as_mut(), &cctx(rec.roi))?;
        code_cu(&mut w, &mut syn, &fp)?;
    }
    Ok(w.finish().0)
}

/// Emits the bitstream for one protection setting (`None` = plain).
pub fn emit(a: &Analysis, prot: Option<Protection>) -> Result<Container> {
    let layout = Layout::new(a.width, a.height, &a.config)?;
    let payloads: Vec<Vec<u8>> = (0..a.frames.len())
        .into_par_iter()
        .map(|f| emit_frame(a, &layout, f, prot))
        .collect::<Result<_>>()?;
    let c = &a.config;
    let header = ContainerHeader {
        width: a.width as u32,
        height: a.height as u32,
        frame_count: a.frames.len() as u32,
        tile_w: c.tile_w as u16,
        tile_h: c.tile_h as u16,
        cu_size: c.cu_size as u8,
        tu_size: c.tu_size as u8,
        qp: c.qp as u8,
        max_dqp: c.max_dqp as u8,
        max_ref_frames: c.max_ref_frames as u8,
        level: prot.map(|p| p.level),
        nonce: prot.map_or(0, |p| p.nonce),
        gop: c.gop.clone(),
    };
    Ok(Container {
        header,
        frames: a
            .frames
            .iter()
            .zip(payloads)
            .map(|(fa, payload)| FrameRecord {
                roi_tiles: fa.roi_tiles.clone(),
                payload,
            })
            .collect(),
    })
}
