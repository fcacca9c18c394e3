//! Decoder. With the key it inverts the cipher and the scrambling; without
//! it (or on a plain stream) it parses and reconstructs the on-wire values
//! as they are.

use std::sync::Arc;

use crate::cipher::{CipherContext, CipherSession, Direction, ElementTransform, Identity};
use crate::error::{Error, Result};
use crate::keystream::MasterKey;
use crate::yuv::{Frame, VideoSequence, VideoSpec};

use super::config::FrameType;
use super::container::Container;
use super::cu::{cipher_cu, code_cu, CuSyntax};
use super::entropy::Reader;
use super::frame::{cu_qp, FrameState, Layout};
use crate::scramble::unscramble;

#[derive(Debug)]
pub struct FrameError {
    pub frame: usize,
    pub error: Error,
}

#[derive(Debug)]
pub struct Decoded {
    pub sequence: VideoSequence,
    /// Frames that failed to decode; each was replaced by the previous
    /// reconstruction (mid-gray for the first frame).
    pub errors: Vec<FrameError>,
}

fn decode_frame(
    c: &Container,
    layout: &Layout,
    f: usize,
    refs: &[Arc<Frame>],
    key: Option<MasterKey>,
) -> Result<Frame> {
    let h = &c.header;
    let cfg = h.codec_config();
    let rec = &c.frames[f];
    if rec.roi_tiles.len() != layout.grid.len() {
        return Err(Error::Container(format!("frame {f}: tile map size mismatch")));
    }
    let inter = cfg.frame_type(f) == FrameType::Inter && !refs.is_empty();
    let rn = if inter { refs.len() as u32 } else { 0 };
    let fp = layout.frame_params(inter, rn, cfg.max_dqp);
    let mut t: Box<dyn ElementTransform> = match (h.level, key) {
        (Some(level), Some(k)) => Box::new(CipherSession::for_frame(
            k,
            h.nonce,
            f as u64,
            level,
            Direction::Decrypt,
        )),
        _ => Box::new(Identity),
    };
    let mut st = FrameState::new(layout, if inter { refs } else { &[] });
    let mut r = Reader::new(&rec.payload, cfg.qp)?;
    for &(cx, cy) in &layout.order {
        let roi = rec.roi_tiles[layout.tile_of_cu(cx, cy)];
        let mut syn = CuSyntax::blank(&fp);
        code_cu(&mut r, &mut syn, &fp)?;
        let ctx = CipherContext {
            rn,
            max_dqp: cfg.max_dqp,
            roi,
        };
        cipher_cu(&mut syn, t.as_mut(), &ctx)?;
        if roi && t.scrambling() {
            for ti in 0..fp.luma_tus() {
                let unit = layout.luma_tu_index(cx, cy, ti);
                let params = t
                    .chaotic_params(f as u64, unit as u64)
                    .ok_or(Error::Contract("scrambling transform without chaotic parameters"))?;
                unscramble(&mut syn.tus[ti], params)?;
            }
        }
        if syn.dqp.unsigned_abs() > cfg.max_dqp {
            return Err(Error::Corrupt(format!("delta QP {} after decryption", syn.dqp)));
        }
        let resolved = st.resolve(cx, cy, &syn.pred)?;
        let pred = st.predict(cx, cy, &resolved)?;
        st.commit(cx, cy, &pred, &syn.tus, cu_qp(cfg.qp, syn.dqp), &resolved);
    }
    r.finish()?;
    Ok(st.recon)
}

/// Decodes every frame. Per-frame failures are reported, not fatal; only a
/// malformed header is.
pub fn decode(c: &Container, key: Option<MasterKey>) -> Result<Decoded> {
    let h = &c.header;
    let cfg = h.codec_config();
    let (w, hh) = (h.width as usize, h.height as usize);
    let layout = Layout::new(w, hh, &cfg)?;
    let spec = VideoSpec::new(w, hh, c.frames.len())?;
    let mut window: Vec<Arc<Frame>> = Vec::new();
    let mut frames = Vec::with_capacity(c.frames.len());
    let mut errors = Vec::new();
    for f in 0..c.frames.len() {
        let frame = match decode_frame(c, &layout, f, &window, key) {
            Ok(fr) => fr,
            Err(error) => {
                errors.push(FrameError { frame: f, error });
                window
                    .first()
                    .map(|p| (**p).clone())
                    .unwrap_or_else(|| Frame::gray(w, hh))
            }
        };
        let fr = Arc::new(frame);
        window.insert(0, fr.clone());
        window.truncate(cfg.max_ref_frames);
        frames.push(Arc::try_unwrap(fr).unwrap_or_else(|a| (*a).clone()));
    }
    Ok(Decoded {
        sequence: VideoSequence::new(spec, frames)?,
        errors,
    })
}
