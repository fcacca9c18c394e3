//! Deterministic synthetic clips for tests, the self-test and the CLI.
//!
//! Textures are coordinate-addressed hash noise, so moving content is a
//! plain shift of the texture function. Sample values stay inside 16..=239
//! so that clipped garbage from a keyless decode is distinguishable from
//! real content.

use crate::error::Result;
use crate::roi::{RoiMap, RoiRecord};
use crate::yuv::{Frame, PixelRegion, Plane, VideoSequence, VideoSpec};

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash noise in [0, 1) at integer lattice point (x, y).
fn lattice(x: i64, y: i64, seed: u64) -> f64 {
    let h = mix(seed ^ mix((x as u64) << 32 ^ (y as u64 & 0xffff_ffff)));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Bilinear value noise with cell size `cell`, in [0, 1).
fn value_noise(x: f64, y: f64, cell: f64, seed: u64) -> f64 {
    let (fx, fy) = (x / cell, y / cell);
    let (x0, y0) = (fx.floor(), fy.floor());
    let (tx, ty) = (fx - x0, fy - y0);
    let (sx, sy) = (tx * tx * (3.0 - 2.0 * tx), ty * ty * (3.0 - 2.0 * ty));
    let (ix, iy) = (x0 as i64, y0 as i64);
    let a = lattice(ix, iy, seed);
    let b = lattice(ix + 1, iy, seed);
    let c = lattice(ix, iy + 1, seed);
    let d = lattice(ix + 1, iy + 1, seed);
    let top = a + (b - a) * sx;
    let bot = c + (d - c) * sx;
    top + (bot - top) * sy
}

fn to_sample(v: f64) -> u8 {
    v.round().clamp(16.0, 239.0) as u8
}

/// Smooth background texture at continuous position (x, y).
fn background(x: f64, y: f64, seed: u64) -> f64 {
    let n = 0.6 * value_noise(x, y, 24.0, seed) + 0.4 * value_noise(x, y, 7.0, seed ^ 1);
    60.0 + 110.0 * n
}

/// High-detail object texture with strong edges.
fn object(x: f64, y: f64, seed: u64) -> f64 {
    let cells = ((x / 6.0).floor() as i64 + (y / 6.0).floor() as i64) & 1;
    let blob = value_noise(x, y, 5.0, seed ^ 7);
    let fine = lattice(x.floor() as i64, y.floor() as i64, seed ^ 9);
    40.0 + 110.0 * cells as f64 + 60.0 * blob + 30.0 * fine
}

fn chroma_of(luma: f64, x: f64, y: f64, seed: u64, phase: f64) -> f64 {
    128.0 + 0.25 * (luma - 128.0) * phase + 40.0 * (value_noise(x, y, 9.0, seed) - 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectTrack {
    pub size: usize,
    pub start: (f64, f64),
    /// Pixels per frame.
    pub velocity: (f64, f64),
}

impl ObjectTrack {
    /// Integer bounds of the object in frame `f`, clipped to the frame.
    pub fn region(&self, f: usize, w: usize, h: usize) -> PixelRegion {
        let (x, y) = self.position(f);
        let x1 = (x.floor().max(0.0) as usize).min(w);
        let y1 = (y.floor().max(0.0) as usize).min(h);
        PixelRegion::new(x1, y1, (x1 + self.size).min(w), (y1 + self.size).min(h))
    }

    fn position(&self, f: usize) -> (f64, f64) {
        (
            (self.start.0 + self.velocity.0 * f as f64).floor(),
            (self.start.1 + self.velocity.1 * f as f64).floor(),
        )
    }
}

/// A panning textured background with one textured square moving over it.
/// Returns the clip and an ROI map that boxes the square in every frame.
pub fn moving_object_clip(
    width: usize,
    height: usize,
    frames: usize,
    track: ObjectTrack,
    pan: (f64, f64),
    seed: u64,
) -> Result<(VideoSequence, RoiMap)> {
    let spec = VideoSpec::new(width, height, frames)?;
    let mut out = Vec::with_capacity(frames);
    let mut records = Vec::with_capacity(frames);
    for f in 0..frames {
        let (ox, oy) = track.position(f);
        let (px, py) = (pan.0 * f as f64, pan.1 * f as f64);
        let region = track.region(f, width, height);
        let luma_at = |x: usize, y: usize| -> f64 {
            if region.contains(x, y) {
                object(x as f64 - ox, y as f64 - oy, seed ^ 0xabc)
            } else {
                background(x as f64 + px, y as f64 + py, seed)
            }
        };
        let mut y_plane = Plane::new(width, height);
        for y in 0..height {
            for x in 0..width {
                y_plane.set(x, y, to_sample(luma_at(x, y)));
            }
        }
        let (cw, ch) = (width / 2, height / 2);
        let mut u = Plane::new(cw, ch);
        let mut v = Plane::new(cw, ch);
        for y in 0..ch {
            for x in 0..cw {
                let l = luma_at(2 * x, 2 * y);
                let (sx, sy) = if region.contains(2 * x, 2 * y) {
                    (2.0 * x as f64 - ox, 2.0 * y as f64 - oy)
                } else {
                    (2.0 * x as f64 + px, 2.0 * y as f64 + py)
                };
                u.set(x, y, to_sample(chroma_of(l, sx, sy, seed ^ 0x11, 1.0)));
                v.set(x, y, to_sample(chroma_of(l, sx, sy, seed ^ 0x22, -1.0)));
            }
        }
        out.push(Frame { y: y_plane, u, v });
        if !region.is_empty() {
            records.push(RoiRecord {
                frame_idx: f,
                index: 0,
                region,
            });
        }
    }
    Ok((VideoSequence::new(spec, out)?, RoiMap::new(records)))
}

/// The 176×144 face-proxy clip: a 48 px textured square drifting across a
/// slowly panning background.
pub fn face_proxy(frames: usize, seed: u64) -> Result<(VideoSequence, RoiMap)> {
    moving_object_clip(
        176,
        144,
        frames,
        ObjectTrack {
            size: 48,
            start: (52.0, 40.0),
            velocity: (1.5, 0.75),
        },
        (0.5, 0.0),
        seed,
    )
}

/// A generic test clip of any CU-aligned size with an object covering
/// roughly a third of each dimension.
pub fn test_clip(width: usize, height: usize, frames: usize, seed: u64) -> Result<(VideoSequence, RoiMap)> {
    let size = (width.min(height) / 3).max(8);
    moving_object_clip(
        width,
        height,
        frames,
        ObjectTrack {
            size,
            start: (width as f64 / 3.0, height as f64 / 3.0),
            velocity: (1.0, 0.5),
        },
        (1.0, 0.0),
        seed,
    )
}
