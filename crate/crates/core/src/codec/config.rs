use crate::error::{Error, Result};
use crate::roi::CU_SIZE;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameType {
    Intra,
    Inter,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodecConfig {
    pub qp: i32,
    pub tile_w: usize,
    pub tile_h: usize,
    pub cu_size: usize,
    pub tu_size: usize,
    /// Frame-type pattern repeated over the sequence, e.g. "IBBB".
    pub gop: String,
    pub search_range: i32,
    pub max_ref_frames: usize,
    pub max_dqp: u32,
    /// Amplitude of the per-CU delta-QP perturbation (clamped to `max_dqp`).
    pub dqp_spread: u32,
}

impl Default for CodecConfig {
    fn default() -> Self {
        CodecConfig {
            qp: 32,
            tile_w: 32,
            tile_h: 32,
            cu_size: CU_SIZE,
            tu_size: 8,
            gop: "IBBB".into(),
            search_range: 8,
            max_ref_frames: 4,
            max_dqp: 12,
            dqp_spread: 3,
        }
    }
}

impl CodecConfig {
    pub fn with_qp(mut self, qp: i32) -> Self {
        self.qp = qp;
        self
    }

    pub fn with_tile(mut self, size: usize) -> Self {
        self.tile_w = size;
        self.tile_h = size;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(0..=51).contains(&self.qp) {
            return bad(format!("qp {} outside 0..=51", self.qp));
        }
        if self.cu_size != CU_SIZE {
            return bad(format!("cu_size must be {CU_SIZE}, got {}", self.cu_size));
        }
        if self.tile_w < self.cu_size
            || self.tile_h < self.cu_size
            || !self.tile_w.is_multiple_of(self.cu_size)
            || !self.tile_h.is_multiple_of(self.cu_size)
            || self.tile_w > u16::MAX as usize
            || self.tile_h > u16::MAX as usize
        {
            return bad(format!(
                "tile {}x{} must be multiples of the {} px CU",
                self.tile_w, self.tile_h, self.cu_size
            ));
        }
        if !matches!(self.tu_size, 4 | 8) {
            return bad(format!("tu_size must be 4 or 8, got {}", self.tu_size));
        }
        if !self.gop.starts_with('I')
            || self.gop.len() > 255
            || !self.gop.chars().all(|c| matches!(c, 'I' | 'P' | 'B'))
        {
            return bad(format!(
                "gop {:?} must start with I and use only I, P, B",
                self.gop
            ));
        }
        if !(0..=64).contains(&self.search_range) {
            return bad(format!("search_range {} outside 0..=64", self.search_range));
        }
        if !(1..=4).contains(&self.max_ref_frames) {
            return bad(format!("max_ref_frames {} outside 1..=4", self.max_ref_frames));
        }
        if !(1..=51).contains(&self.max_dqp) {
            return bad(format!("max_dqp {} outside 1..=51", self.max_dqp));
        }
        Ok(())
    }

    pub fn frame_type(&self, idx: usize) -> FrameType {
        match self.gop.as_bytes()[idx % self.gop.len()] {
            b'I' => FrameType::Intra,
            _ => FrameType::Inter,
        }
    }
}
