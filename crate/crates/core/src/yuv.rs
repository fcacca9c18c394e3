//! Raw planar 4:2:0 video I/O.
//!
//! Files carry no header: dimensions and frame count come from a
//! [`VideoSpec`]. Each frame is stored as the full Y plane followed by the
//! quarter-size U and V planes.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Dimensions and framing of a raw I420 sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VideoSpec {
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
    pub fps: u32,
    pub bit_depth: u8,
}

impl VideoSpec {
    pub fn new(width: usize, height: usize, frame_count: usize) -> Result<Self> {
        let spec = VideoSpec {
            width,
            height,
            frame_count,
            fps: 30,
            bit_depth: 8,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bit_depth != 8 {
            return Err(Error::InvalidSpec(format!(
                "only 8-bit input is supported, got {}-bit",
                self.bit_depth
            )));
        }
        if self.width < 16 || self.height < 16 {
            return Err(Error::InvalidSpec(format!(
                "dimensions {}x{} below the 16x16 minimum",
                self.width, self.height
            )));
        }
        if !self.width.is_multiple_of(2) || !self.height.is_multiple_of(2) {
            return Err(Error::InvalidSpec(format!(
                "dimensions {}x{} must be even for 4:2:0",
                self.width, self.height
            )));
        }
        if self.frame_count < 1 {
            return Err(Error::InvalidSpec("frame_count ≥ 1 violated".into()));
        }
        Ok(())
    }

    pub fn luma_size(&self) -> usize {
        self.width * self.height
    }

    pub fn chroma_width(&self) -> usize {
        self.width / 2
    }

    pub fn chroma_height(&self) -> usize {
        self.height / 2
    }

    pub fn frame_bytes(&self) -> usize {
        self.luma_size() * 3 / 2
    }

    pub fn total_bytes(&self) -> u64 {
        self.frame_bytes() as u64 * self.frame_count as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlaneKind {
    Y,
    U,
    V,
}

impl PlaneKind {
    pub const ALL: [PlaneKind; 3] = [PlaneKind::Y, PlaneKind::U, PlaneKind::V];

    pub fn is_chroma(self) -> bool {
        self != PlaneKind::Y
    }
}

/// A single 8-bit sample plane, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl Plane {
    pub fn new(width: usize, height: usize) -> Self {
        Plane {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Plane {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<u8>) -> Self {
        assert_eq!(data.len(), width * height, "plane data size mismatch");
        Plane {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    /// Sample at (x, y) with coordinates clamped into the plane.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.data[y * self.width..(y + 1) * self.width]
    }
}

/// One 4:2:0 picture.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub y: Plane,
    pub u: Plane,
    pub v: Plane,
}

impl Frame {
    pub fn new(width: usize, height: usize) -> Self {
        Frame {
            y: Plane::new(width, height),
            u: Plane::new(width / 2, height / 2),
            v: Plane::new(width / 2, height / 2),
        }
    }

    pub fn gray(width: usize, height: usize) -> Self {
        Frame {
            y: Plane::filled(width, height, 128),
            u: Plane::filled(width / 2, height / 2, 128),
            v: Plane::filled(width / 2, height / 2, 128),
        }
    }

    pub fn width(&self) -> usize {
        self.y.width
    }

    pub fn height(&self) -> usize {
        self.y.height
    }

    pub fn plane(&self, kind: PlaneKind) -> &Plane {
        match kind {
            PlaneKind::Y => &self.y,
            PlaneKind::U => &self.u,
            PlaneKind::V => &self.v,
        }
    }

    pub fn plane_mut(&mut self, kind: PlaneKind) -> &mut Plane {
        match kind {
            PlaneKind::Y => &mut self.y,
            PlaneKind::U => &mut self.u,
            PlaneKind::V => &mut self.v,
        }
    }

    fn conforms(&self, spec: &VideoSpec) -> bool {
        let (cw, ch) = (spec.chroma_width(), spec.chroma_height());
        self.y.width == spec.width
            && self.y.height == spec.height
            && self.y.data.len() == spec.luma_size()
            && self.u.width == cw
            && self.u.height == ch
            && self.u.data.len() == cw * ch
            && self.v.width == cw
            && self.v.height == ch
            && self.v.data.len() == cw * ch
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoSequence {
    pub spec: VideoSpec,
    pub frames: Vec<Frame>,
}

impl VideoSequence {
    pub fn new(spec: VideoSpec, frames: Vec<Frame>) -> Result<Self> {
        let seq = VideoSequence { spec, frames };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.frames.is_empty() {
            return Err(Error::InvalidSpec("frame_count ≥ 1 violated".into()));
        }
        if self.frames.len() != self.spec.frame_count {
            return Err(Error::InvalidSpec(format!(
                "spec declares {} frames, sequence holds {}",
                self.spec.frame_count,
                self.frames.len()
            )));
        }
        if let Some(i) = self.frames.iter().position(|f| !f.conforms(&self.spec)) {
            return Err(Error::InvalidSpec(format!(
                "frame {i} does not match {}x{}",
                self.spec.width, self.spec.height
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Half-open pixel rectangle `[x1, x2) × [y1, y2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PixelRegion {
    pub x1: usize,
    pub y1: usize,
    pub x2: usize,
    pub y2: usize,
}

impl PixelRegion {
    pub fn new(x1: usize, y1: usize, x2: usize, y2: usize) -> Self {
        PixelRegion { x1, y1, x2, y2 }
    }

    pub fn width(&self) -> usize {
        self.x2.saturating_sub(self.x1)
    }

    pub fn height(&self) -> usize {
        self.y2.saturating_sub(self.y1)
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn is_empty(&self) -> bool {
        self.x2 <= self.x1 || self.y2 <= self.y1
    }

    pub fn intersects(&self, other: &PixelRegion) -> bool {
        self.x1 < other.x2 && other.x1 < self.x2 && self.y1 < other.y2 && other.y1 < self.y2
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x1 && x < self.x2 && y >= self.y1 && y < self.y2
    }

    pub fn clip(&self, width: usize, height: usize) -> PixelRegion {
        PixelRegion {
            x1: self.x1.min(width),
            y1: self.y1.min(height),
            x2: self.x2.min(width),
            y2: self.y2.min(height),
        }
    }

    /// Chroma-plane region covering every chroma sample co-sited with this
    /// luma region: top-left rounds down, bottom-right rounds up.
    pub fn to_chroma(&self) -> PixelRegion {
        PixelRegion {
            x1: self.x1 / 2,
            y1: self.y1 / 2,
            x2: self.x2.div_ceil(2),
            y2: self.y2.div_ceil(2),
        }
    }

    fn check(&self, width: usize, height: usize) -> Result<()> {
        if self.x1 < self.x2 && self.y1 < self.y2 && self.x2 <= width && self.y2 <= height {
            Ok(())
        } else {
            Err(Error::RegionOutOfBounds {
                x1: self.x1,
                y1: self.y1,
                x2: self.x2,
                y2: self.y2,
                width,
                height,
            })
        }
    }
}

pub fn read_sequence(path: impl AsRef<Path>, spec: VideoSpec) -> Result<VideoSequence> {
    let path = path.as_ref();
    spec.validate()?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_sequence(&bytes, spec)
}

/// Splits an in-memory I420 byte buffer into frames.
pub fn parse_sequence(bytes: &[u8], spec: VideoSpec) -> Result<VideoSequence> {
    spec.validate()?;
    let expected = spec.total_bytes();
    if bytes.len() as u64 != expected {
        return Err(Error::Truncated {
            expected,
            actual: bytes.len() as u64,
        });
    }
    let (w, h) = (spec.width, spec.height);
    let (cw, ch) = (spec.chroma_width(), spec.chroma_height());
    let frames = bytes
        .chunks_exact(spec.frame_bytes())
        .map(|chunk| {
            let (y, rest) = chunk.split_at(w * h);
            let (u, v) = rest.split_at(cw * ch);
            Frame {
                y: Plane::from_vec(w, h, y.to_vec()),
                u: Plane::from_vec(cw, ch, u.to_vec()),
                v: Plane::from_vec(cw, ch, v.to_vec()),
            }
        })
        .collect();
    VideoSequence::new(spec, frames)
}

pub fn serialize_sequence(seq: &VideoSequence) -> Result<Vec<u8>> {
    seq.validate()?;
    let mut out = Vec::with_capacity(seq.spec.total_bytes() as usize);
    for f in &seq.frames {
        out.extend_from_slice(&f.y.data);
        out.extend_from_slice(&f.u.data);
        out.extend_from_slice(&f.v.data);
    }
    Ok(out)
}

/// Writes Y, U, V of each frame in order and returns the byte count.
pub fn write_sequence(seq: &VideoSequence, path: impl AsRef<Path>) -> Result<u64> {
    let path = path.as_ref();
    let bytes = serialize_sequence(seq)?;
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    Ok(bytes.len() as u64)
}

/// Row-major samples of `region` from one plane of `frame`.
///
/// `region` is given in luma coordinates; for chroma planes it is mapped with
/// [`PixelRegion::to_chroma`].
pub fn extract_region(frame: &Frame, region: PixelRegion, plane: PlaneKind) -> Result<Vec<u8>> {
    region.check(frame.width(), frame.height())?;
    let r = if plane.is_chroma() {
        region.to_chroma()
    } else {
        region
    };
    let p = frame.plane(plane);
    r.check(p.width, p.height)?;
    let mut out = Vec::with_capacity(r.area());
    for y in r.y1..r.y2 {
        out.extend_from_slice(&p.row(y)[r.x1..r.x2]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_frame(w: usize, h: usize) -> Frame {
        let mut f = Frame::new(w, h);
        for y in 0..h {
            for x in 0..w {
                f.y.set(x, y, ((x + 3 * y) % 256) as u8);
            }
        }
        for y in 0..h / 2 {
            for x in 0..w / 2 {
                f.u.set(x, y, (x * 2 + y) as u8);
                f.v.set(x, y, (200 - x - y) as u8);
            }
        }
        f
    }

    #[test]
    fn frame_byte_arithmetic() {
        let spec = VideoSpec::new(16, 16, 2).unwrap();
        assert_eq!(spec.total_bytes(), 768);
        let spec = VideoSpec::new(16, 16, 1).unwrap();
        assert_eq!(spec.total_bytes(), 384);
        let spec = VideoSpec::new(352, 288, 50).unwrap();
        assert_eq!(spec.total_bytes(), 7_603_200);
    }

    #[test]
    fn parse_two_frames() {
        let spec = VideoSpec::new(16, 16, 2).unwrap();
        let bytes: Vec<u8> = (0..768).map(|i| (i % 251) as u8).collect();
        let seq = parse_sequence(&bytes, spec).unwrap();
        assert_eq!(seq.len(), 2);
        assert_eq!(seq.frames[1].y.data[0], (384 % 251) as u8);
        assert_eq!(serialize_sequence(&seq).unwrap(), bytes);
    }

    #[test]
    fn truncated_by_one_byte() {
        let spec = VideoSpec::new(16, 16, 2).unwrap();
        let err = parse_sequence(&vec![0u8; 767], spec).unwrap_err();
        assert!(matches!(
            err,
            Error::Truncated {
                expected: 768,
                actual: 767
            }
        ));
    }

    #[test]
    fn empty_sequence_rejected() {
        assert!(VideoSpec::new(16, 16, 0).is_err());
        let spec = VideoSpec {
            frame_count: 0,
            ..VideoSpec::new(16, 16, 1).unwrap()
        };
        let err = VideoSequence::new(spec, vec![]).unwrap_err();
        assert!(err.to_string().contains("frame_count ≥ 1 violated"));
    }

    #[test]
    fn spec_rejects_odd_small_and_deep() {
        assert!(VideoSpec::new(15, 16, 1).is_err());
        assert!(VideoSpec::new(18, 17, 1).is_err());
        assert!(VideoSpec::new(8, 8, 1).is_err());
        let ten_bit = VideoSpec {
            bit_depth: 10,
            ..VideoSpec::new(16, 16, 1).unwrap()
        };
        assert!(ten_bit.validate().is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.yuv");
        let spec = VideoSpec::new(32, 16, 3).unwrap();
        let bytes: Vec<u8> = (0..spec.total_bytes()).map(|i| (i * 7 % 256) as u8).collect();
        fs::write(&path, &bytes).unwrap();
        let seq = read_sequence(&path, spec).unwrap();
        let out = dir.path().join("b.yuv");
        assert_eq!(write_sequence(&seq, &out).unwrap(), spec.total_bytes());
        assert_eq!(fs::read(&out).unwrap(), bytes);
    }

    #[test]
    fn write_reports_path_on_failure() {
        let spec = VideoSpec::new(16, 16, 1).unwrap();
        let seq = VideoSequence::new(spec, vec![Frame::gray(16, 16)]).unwrap();
        let err = write_sequence(&seq, "/nonexistent-dir/x.yuv").unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.yuv"));
    }

    #[test]
    fn full_frame_region_is_whole_plane() {
        let f = ramp_frame(32, 16);
        let all = PixelRegion::new(0, 0, 32, 16);
        assert_eq!(extract_region(&f, all, PlaneKind::Y).unwrap(), f.y.data);
        assert_eq!(extract_region(&f, all, PlaneKind::U).unwrap(), f.u.data);
        assert_eq!(extract_region(&f, all, PlaneKind::V).unwrap(), f.v.data);
    }

    #[test]
    fn single_sample_region() {
        let f = ramp_frame(16, 16);
        let r = PixelRegion::new(0, 0, 1, 1);
        assert_eq!(extract_region(&f, r, PlaneKind::Y).unwrap(), vec![f.y.get(0, 0)]);
    }

    #[test]
    fn small_region_matches_pixel_loop() {
        let f = ramp_frame(16, 16);
        let r = PixelRegion::new(5, 7, 8, 10);
        let mut naive = vec![];
        for y in 7..10 {
            for x in 5..8 {
                naive.push(((x + 3 * y) % 256) as u8);
            }
        }
        assert_eq!(extract_region(&f, r, PlaneKind::Y).unwrap(), naive);
    }

    #[test]
    fn chroma_mapping_rounds_outward() {
        let r = PixelRegion::new(3, 5, 9, 11);
        assert_eq!(r.to_chroma(), PixelRegion::new(1, 2, 5, 6));
        let f = ramp_frame(16, 16);
        assert_eq!(extract_region(&f, r, PlaneKind::U).unwrap().len(), 16);
    }

    #[test]
    fn out_of_bounds_region() {
        let f = ramp_frame(16, 16);
        assert!(matches!(
            extract_region(&f, PixelRegion::new(8, 8, 17, 12), PlaneKind::Y),
            Err(Error::RegionOutOfBounds { .. })
        ));
        assert!(extract_region(&f, PixelRegion::new(4, 4, 4, 8), PlaneKind::Y).is_err());
    }
}
