//! On-disk bitstream container.
//!
//! Little-endian layout:
//!
//! ```text
//! "RSEL"            4 bytes
//! version           u16 (= 1)
//! width, height     u32, u32
//! frame_count       u32
//! tile_w, tile_h    u16, u16
//! cu_size, tu_size  u8, u8
//! qp, max_dqp       u8, u8
//! max_ref_frames    u8
//! level             u8 (0 none, 1 basic, 2 enhanced, 3 advanced)
//! nonce             u64
//! gop_len, gop      u8, ASCII
//! per frame:
//!   payload_len     u32
//!   roi tile map    ceil(tiles / 8) bytes, tile raster order, LSB first
//!   payload         payload_len bytes of arithmetic-coded data
//! ```

use std::path::Path;

use crate::cipher::Level;
use crate::error::{Error, Result};

use super::config::CodecConfig;

pub const MAGIC: &[u8; 4] = b"RSEL";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContainerHeader {
    pub width: u32,
    pub height: u32,
    pub frame_count: u32,
    pub tile_w: u16,
    pub tile_h: u16,
    pub cu_size: u8,
    pub tu_size: u8,
    pub qp: u8,
    pub max_dqp: u8,
    pub max_ref_frames: u8,
    pub level: Option<Level>,
    pub nonce: u64,
    pub gop: String,
}

impl ContainerHeader {
    pub fn codec_config(&self) -> CodecConfig {
        CodecConfig {
            qp: self.qp as i32,
            tile_w: self.tile_w as usize,
            tile_h: self.tile_h as usize,
            cu_size: self.cu_size as usize,
            tu_size: self.tu_size as usize,
            gop: self.gop.clone(),
            max_ref_frames: self.max_ref_frames as usize,
            max_dqp: self.max_dqp as u32,
            ..CodecConfig::default()
        }
    }

    pub fn tile_count(&self) -> usize {
        (self.width as usize).div_ceil(self.tile_w as usize)
            * (self.height as usize).div_ceil(self.tile_h as usize)
    }

    fn encoded_len(&self) -> usize {
        4 + 2 + 12 + 4 + 2 + 2 + 2 + 8 + 1 + self.gop.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameRecord {
    /// Tile classification the frame was coded with (side information,
    /// not part of the payload).
    pub roi_tiles: Vec<bool>,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Container {
    pub header: ContainerHeader,
    pub frames: Vec<FrameRecord>,
}

fn pack_bits(bits: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            out[i / 8] |= 1 << (i % 8);
        }
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            Error::Container(format!(
                "truncated at byte {} (need {n} more, have {})",
                self.pos,
                self.buf.len() - self.pos
            ))
        })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

impl Container {
    /// Sum of payload bytes over all frames (header and tile maps excluded).
    pub fn payload_bytes(&self) -> u64 {
        self.frames.iter().map(|f| f.payload.len() as u64).sum()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(h.encoded_len() + self.payload_bytes() as usize);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&h.width.to_le_bytes());
        out.extend_from_slice(&h.height.to_le_bytes());
        out.extend_from_slice(&h.frame_count.to_le_bytes());
        out.extend_from_slice(&h.tile_w.to_le_bytes());
        out.extend_from_slice(&h.tile_h.to_le_bytes());
        out.extend_from_slice(&[
            h.cu_size,
            h.tu_size,
            h.qp,
            h.max_dqp,
            h.max_ref_frames,
            h.level.map_or(0, Level::tag),
        ]);
        out.extend_from_slice(&h.nonce.to_le_bytes());
        out.push(h.gop.len() as u8);
        out.extend_from_slice(h.gop.as_bytes());
        for f in &self.frames {
            out.extend_from_slice(&(f.payload.len() as u32).to_le_bytes());
            out.extend_from_slice(&pack_bits(&f.roi_tiles));
            out.extend_from_slice(&f.payload);
        }
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let mut c = Cursor { buf, pos: 0 };
        if c.take(4)? != MAGIC {
            return Err(Error::Container("bad magic".into()));
        }
        let version = c.u16()?;
        if version != VERSION {
            return Err(Error::Container(format!("unsupported version {version}")));
        }
        let width = c.u32()?;
        let height = c.u32()?;
        let frame_count = c.u32()?;
        let tile_w = c.u16()?;
        let tile_h = c.u16()?;
        let cu_size = c.u8()?;
        let tu_size = c.u8()?;
        let qp = c.u8()?;
        let max_dqp = c.u8()?;
        let max_ref_frames = c.u8()?;
        let level = Level::from_tag(c.u8()?)?;
        let nonce = c.u64()?;
        let gop_len = c.u8()? as usize;
        let gop = String::from_utf8(c.take(gop_len)?.to_vec())
            .map_err(|_| Error::Container("gop is not ASCII".into()))?;
        let header = ContainerHeader {
            width,
            height,
            frame_count,
            tile_w,
            tile_h,
            cu_size,
            tu_size,
            qp,
            max_dqp,
            max_ref_frames,
            level,
            nonce,
            gop,
        };
        if tile_w == 0 || tile_h == 0 || width == 0 || height == 0 {
            return Err(Error::Container("zero dimension in header".into()));
        }
        header
            .codec_config()
            .validate()
            .map_err(|e| Error::Container(e.to_string()))?;
        let tiles = header.tile_count();
        let mut frames = Vec::with_capacity(frame_count.min(1 << 16) as usize);
        for _ in 0..frame_count {
            let len = c.u32()? as usize;
            let map = c.take(tiles.div_ceil(8))?;
            let roi_tiles = (0..tiles).map(|i| map[i / 8] >> (i % 8) & 1 == 1).collect();
            let payload = c.take(len)?.to_vec();
            frames.push(FrameRecord { roi_tiles, payload });
        }
        if c.pos != buf.len() {
            return Err(Error::Container(format!(
                "{} trailing bytes after last frame",
                buf.len() - c.pos
            )));
        }
        Ok(Container { header, frames })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<u64> {
        let bytes = self.to_bytes();
        std::fs::write(path.as_ref(), &bytes).map_err(|e| Error::io(path.as_ref(), e))?;
        Ok(bytes.len() as u64)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::from_bytes(&bytes)
    }
}
