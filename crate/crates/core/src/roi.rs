//! ROI coordinate files, tile grids and ROI tile classification.
//!
//! Coordinates are 0-based with the top-left corner inclusive and the
//! bottom-right corner exclusive. The file format is one record per line:
//!
//! ```text
//! # comment
//! 0:[0,(16,16,48,64)]
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::yuv::{PixelRegion, VideoSpec};

/// Coding unit edge length used throughout the codec.
pub const CU_SIZE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RoiRecord {
    pub frame_idx: usize,
    /// The bracketed index field of the record, kept verbatim.
    pub index: usize,
    pub region: PixelRegion,
}

/// All ROI records of a sequence, sorted by frame.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoiMap {
    records: Vec<RoiRecord>,
}

impl RoiMap {
    pub fn new(mut records: Vec<RoiRecord>) -> Self {
        records.sort();
        RoiMap { records }
    }

    pub fn records(&self) -> &[RoiRecord] {
        &self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn regions_for(&self, frame_idx: usize) -> Vec<PixelRegion> {
        let start = self.records.partition_point(|r| r.frame_idx < frame_idx);
        self.records[start..]
            .iter()
            .take_while(|r| r.frame_idx == frame_idx)
            .map(|r| r.region)
            .collect()
    }

    /// Checks every record against the sequence dimensions.
    pub fn bind(&self, spec: &VideoSpec) -> Result<()> {
        for r in &self.records {
            let g = r.region;
            if g.x2 > spec.width || g.y2 > spec.height {
                return Err(Error::RegionOutOfBounds {
                    x1: g.x1,
                    y1: g.y1,
                    x2: g.x2,
                    y2: g.y2,
                    width: spec.width,
                    height: spec.height,
                });
            }
        }
        Ok(())
    }
}

pub fn parse_roi_file(path: impl AsRef<Path>) -> Result<RoiMap> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_roi_str(&text)
}

pub fn parse_roi_str(text: &str) -> Result<RoiMap> {
    let mut records = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        records.push(parse_line(line, i + 1)?);
    }
    Ok(RoiMap::new(records))
}

/// Inverse of [`parse_roi_str`].
pub fn format_roi(map: &RoiMap) -> String {
    let mut out = String::new();
    for r in map.records() {
        let g = r.region;
        out += &format!("{}:[{},({},{},{},{})]\n", r.frame_idx, r.index, g.x1, g.y1, g.x2, g.y2);
    }
    out
}

fn parse_line(line: &str, lineno: usize) -> Result<RoiRecord> {
    let mut lx = Lexer {
        s: line.as_bytes(),
        pos: 0,
        line: lineno,
    };
    let frame = lx.number()?;
    lx.expect(b':')?;
    lx.expect(b'[')?;
    let index = lx.number()?;
    lx.expect(b',')?;
    lx.expect(b'(')?;
    let x1 = lx.number()?;
    lx.expect(b',')?;
    let y1 = lx.number()?;
    lx.expect(b',')?;
    let x2 = lx.number()?;
    lx.expect(b',')?;
    let y2 = lx.number()?;
    lx.expect(b')')?;
    lx.expect(b']')?;
    lx.end()?;
    if x2 <= x1 || y2 <= y1 {
        return Err(Error::DegenerateRegion {
            line: lineno,
            x1,
            y1,
            x2,
            y2,
        });
    }
    Ok(RoiRecord {
        frame_idx: frame as usize,
        index: index as usize,
        region: PixelRegion::new(x1 as usize, y1 as usize, x2 as usize, y2 as usize),
    })
}

struct Lexer<'a> {
    s: &'a [u8],
    pos: usize,
    line: usize,
}

impl Lexer<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::RoiParse {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn number(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(format!("expected integer at column {}", start + 1)));
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("integer overflow"))
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!(
                "expected '{}' at column {}",
                c as char,
                self.pos + 1
            )))
        }
    }

    fn end(&mut self) -> Result<()> {
        self.skip_ws();
        if self.pos == self.s.len() {
            Ok(())
        } else {
            Err(self.err(format!("trailing input at column {}", self.pos + 1)))
        }
    }
}

/// Uniform tile partition of a frame. Edge tiles are clipped to the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileGrid {
    pub frame_w: usize,
    pub frame_h: usize,
    pub tile_w: usize,
    pub tile_h: usize,
    pub cols: usize,
    pub rows: usize,
}

impl TileGrid {
    pub fn new(frame_w: usize, frame_h: usize, tile_w: usize, tile_h: usize) -> Result<Self> {
        if tile_w < CU_SIZE || tile_h < CU_SIZE || !tile_w.is_multiple_of(CU_SIZE) || !tile_h.is_multiple_of(CU_SIZE) {
            return Err(Error::Config(format!(
                "tile size {tile_w}x{tile_h} must be a multiple of {CU_SIZE} and at least {CU_SIZE}"
            )));
        }
        Ok(TileGrid {
            frame_w,
            frame_h,
            tile_w,
            tile_h,
            cols: frame_w.div_ceil(tile_w),
            rows: frame_h.div_ceil(tile_h),
        })
    }

    pub fn len(&self) -> usize {
        self.cols * self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn tile_region(&self, col: usize, row: usize) -> PixelRegion {
        PixelRegion::new(
            col * self.tile_w,
            row * self.tile_h,
            ((col + 1) * self.tile_w).min(self.frame_w),
            ((row + 1) * self.tile_h).min(self.frame_h),
        )
    }

    /// Tile index (row-major) containing pixel (x, y).
    pub fn tile_of(&self, x: usize, y: usize) -> usize {
        (y / self.tile_h) * self.cols + x / self.tile_w
    }
}

/// True iff the tile rectangle intersects any ROI rectangle.
pub fn mark_tile(tile: PixelRegion, rois: &[PixelRegion]) -> bool {
    rois.iter().any(|r| tile.intersects(r))
}

/// Per-frame ROI/non-ROI flag for every tile, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileClassification {
    pub grid: TileGrid,
    pub roi: Vec<bool>,
}

impl TileClassification {
    pub fn none(grid: TileGrid) -> Self {
        TileClassification {
            grid,
            roi: vec![false; grid.len()],
        }
    }

    pub fn all(grid: TileGrid) -> Self {
        TileClassification {
            grid,
            roi: vec![true; grid.len()],
        }
    }

    pub fn is_roi(&self, col: usize, row: usize) -> bool {
        self.roi[row * self.grid.cols + col]
    }

    pub fn is_roi_at(&self, x: usize, y: usize) -> bool {
        self.roi[self.grid.tile_of(x, y)]
    }

    pub fn any(&self) -> bool {
        self.roi.iter().any(|&b| b)
    }

    pub fn roi_tile_count(&self) -> usize {
        self.roi.iter().filter(|&&b| b).count()
    }
}

pub fn classify_tiles(grid: &TileGrid, rois: &RoiMap, frame_idx: usize) -> TileClassification {
    classify_regions(grid, &rois.regions_for(frame_idx))
}

pub fn classify_regions(grid: &TileGrid, regions: &[PixelRegion]) -> TileClassification {
    let mut roi = Vec::with_capacity(grid.len());
    for row in 0..grid.rows {
        for col in 0..grid.cols {
            roi.push(mark_tile(grid.tile_region(col, row), regions));
        }
    }
    TileClassification { grid: *grid, roi }
}

/// Coding units (raster index over the frame CU grid) that lie in ROI tiles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoiUnitSet {
    pub cu_size: usize,
    pub cu_cols: usize,
    pub cu_rows: usize,
    pub frame_w: usize,
    pub frame_h: usize,
    pub units: Vec<usize>,
}

impl RoiUnitSet {
    pub fn unit_region(&self, idx: usize) -> PixelRegion {
        let (c, r) = (idx % self.cu_cols, idx / self.cu_cols);
        PixelRegion::new(
            c * self.cu_size,
            r * self.cu_size,
            ((c + 1) * self.cu_size).min(self.frame_w),
            ((r + 1) * self.cu_size).min(self.frame_h),
        )
    }

    pub fn regions(&self) -> impl Iterator<Item = PixelRegion> + '_ {
        self.units.iter().map(|&i| self.unit_region(i))
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }
}

pub fn roi_unit_set(classification: &TileClassification, cu_size: usize) -> RoiUnitSet {
    let g = &classification.grid;
    debug_assert!(g.tile_w.is_multiple_of(cu_size) && g.tile_h.is_multiple_of(cu_size));
    let cu_cols = g.frame_w.div_ceil(cu_size);
    let cu_rows = g.frame_h.div_ceil(cu_size);
    let mut units = Vec::new();
    for r in 0..cu_rows {
        for c in 0..cu_cols {
            if classification.is_roi_at(c * cu_size, r * cu_size) {
                units.push(r * cu_cols + c);
            }
        }
    }
    RoiUnitSet {
        cu_size,
        cu_cols,
        cu_rows,
        frame_w: g.frame_w,
        frame_h: g.frame_h,
        units,
    }
}

/// Per-pixel boolean mask, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelMask {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl PixelMask {
    pub fn empty(width: usize, height: usize) -> Self {
        PixelMask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn fill(&mut self, r: PixelRegion) {
        let r = r.clip(self.width, self.height);
        for y in r.y1..r.y2 {
            self.bits[y * self.width + r.x1..y * self.width + r.x2].fill(true);
        }
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// The encrypted pixel set: every pixel inside an ROI tile.
pub fn pixel_mask(classification: &TileClassification) -> PixelMask {
    let g = &classification.grid;
    let mut mask = PixelMask::empty(g.frame_w, g.frame_h);
    for row in 0..g.rows {
        for col in 0..g.cols {
            if classification.is_roi(col, row) {
                mask.fill(g.tile_region(col, row));
            }
        }
    }
    mask
}

/// Union of ground-truth rectangles as a mask.
pub fn region_mask(width: usize, height: usize, regions: &[PixelRegion]) -> PixelMask {
    let mut mask = PixelMask::empty(width, height);
    for r in regions {
        mask.fill(*r);
    }
    mask
}
