//! Encryption-quality benchmark: fineness (IoU) and ROI perturbation
//! metrics, measured only over coding units inside encrypted tiles.

use std::path::Path;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::cipher::Level;
use crate::codec::Container;
use crate::error::{Error, Result};
use crate::roi::{
    pixel_mask, region_mask, roi_unit_set, PixelMask, RoiMap, RoiUnitSet, TileClassification,
    TileGrid,
};
use crate::scramble::{canny, CannyParams};
use crate::yuv::{Frame, VideoSequence};

/// ROI samples of one frame, unit by unit (Y, then Cb, then Cr of each).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoiPixelSets {
    pub ori: Vec<u8>,
    pub enc: Vec<u8>,
    /// Luma-only subsets, same unit order.
    pub ori_y: Vec<u8>,
    pub enc_y: Vec<u8>,
}

pub fn extract_roi_pixels(ori: &Frame, enc: &Frame, units: &RoiUnitSet) -> Result<RoiPixelSets> {
    if ori.width() != enc.width() || ori.height() != enc.height() {
        return Err(Error::SizeMismatch(ori.y.data.len(), enc.y.data.len()));
    }
    if ori.width() != units.frame_w || ori.height() != units.frame_h {
        return Err(Error::Metric("unit set does not match frame size"));
    }
    let mut s = RoiPixelSets::default();
    for r in units.regions() {
        let c = r.to_chroma();
        for y in r.y1..r.y2 {
            s.ori_y.extend_from_slice(&ori.y.row(y)[r.x1..r.x2]);
            s.enc_y.extend_from_slice(&enc.y.row(y)[r.x1..r.x2]);
        }
        s.ori.extend_from_slice(&s.ori_y[s.ori_y.len() - r.area()..]);
        s.enc.extend_from_slice(&s.enc_y[s.enc_y.len() - r.area()..]);
        for (po, pe) in [(&ori.u, &enc.u), (&ori.v, &enc.v)] {
            for y in c.y1..c.y2 {
                s.ori.extend_from_slice(&po.row(y)[c.x1..c.x2]);
                s.enc.extend_from_slice(&pe.row(y)[c.x1..c.x2]);
            }
        }
    }
    Ok(s)
}

fn check_pair(a: &[u8], b: &[u8]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::Metric("empty sample set"));
    }
    Ok(())
}

pub fn mse(a: &[u8], b: &[u8]) -> Result<f64> {
    check_pair(a, b)?;
    let sum: u64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum();
    Ok(sum as f64 / a.len() as f64)
}

/// Peak signal-to-noise ratio in dB; `+inf` for identical sets.
pub fn psnr(a: &[u8], b: &[u8]) -> Result<f64> {
    let m = mse(a, b)?;
    Ok(if m == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0f64 * 255.0 / m).log10()
    })
}

/// SSIM from global statistics of the two sets (population moments).
pub fn ssim(a: &[u8], b: &[u8]) -> Result<f64> {
    check_pair(a, b)?;
    let n = a.len() as f64;
    let (sa, sb) = a
        .iter()
        .zip(b)
        .fold((0u64, 0u64), |(x, y), (&p, &q)| (x + p as u64, y + q as u64));
    let (ma, mb) = (sa as f64 / n, sb as f64 / n);
    let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
    for (&p, &q) in a.iter().zip(b) {
        let (da, db) = (p as f64 - ma, q as f64 - mb);
        va += da * da;
        vb += db * db;
        cov += da * db;
    }
    let (va, vb, cov) = (va / n, vb / n, cov / n);
    let c1 = (0.01f64 * 255.0).powi(2);
    let c2 = (0.03f64 * 255.0).powi(2);
    Ok(((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2)))
}

/// Shannon entropy of the 256-bin histogram, in bits.
pub fn entropy(p: &[u8]) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::Metric("empty sample set"));
    }
    let mut hist = [0u64; 256];
    for &v in p {
        hist[v as usize] += 1;
    }
    let n = p.len() as f64;
    Ok(hist
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let q = c as f64 / n;
            -q * q.log2()
        })
        .sum())
}

pub fn npcr(a: &[u8], b: &[u8]) -> Result<f64> {
    check_pair(a, b)?;
    let diff = a.iter().zip(b).filter(|(x, y)| x != y).count();
    Ok(100.0 * diff as f64 / a.len() as f64)
}

pub fn uaci(a: &[u8], b: &[u8]) -> Result<f64> {
    check_pair(a, b)?;
    let sum: u64 = a.iter().zip(b).map(|(&x, &y)| x.abs_diff(y) as u64).sum();
    Ok(100.0 * sum as f64 / (255.0 * a.len() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdrValue {
    pub value: f64,
    /// Neither map had an edge pixel in the measured area.
    pub no_edges: bool,
}

/// Edge difference ratio of two binary edge maps over the pixels `within`.
pub fn edr_maps(pe: &[bool], ce: &[bool], within: &[bool]) -> Result<EdrValue> {
    if pe.len() != ce.len() || pe.len() != within.len() {
        return Err(Error::SizeMismatch(pe.len(), ce.len()));
    }
    let (mut num, mut den) = (0u64, 0u64);
    for ((&p, &c), &m) in pe.iter().zip(ce).zip(within) {
        if m {
            num += (p != c) as u64;
            den += p as u64 + c as u64;
        }
    }
    Ok(if den == 0 {
        EdrValue {
            value: 0.0,
            no_edges: true,
        }
    } else {
        EdrValue {
            value: num as f64 / den as f64,
            no_edges: false,
        }
    })
}

/// EDR between two frames' luma, restricted to `mask`. Edges are detected
/// on whole frames so that unit borders do not create artificial edges.
pub fn edr_frames(ori: &Frame, enc: &Frame, mask: &PixelMask, params: &CannyParams) -> Result<EdrValue> {
    if ori.y.width < 5 || ori.y.height < 5 {
        return Err(Error::Metric("EDR needs at least 5x5 samples"));
    }
    let pe = canny(&ori.y, params);
    let ce = canny(&enc.y, params);
    edr_maps(&pe.bits, &ce.bits, &mask.bits)
}

/// Intersection over union of two masks. Undefined when both are empty.
pub fn iou(e: &PixelMask, g: &PixelMask) -> Result<f64> {
    if e.width != g.width || e.height != g.height {
        return Err(Error::SizeMismatch(e.bits.len(), g.bits.len()));
    }
    let (mut inter, mut union) = (0u64, 0u64);
    for (&a, &b) in e.bits.iter().zip(&g.bits) {
        inter += (a && b) as u64;
        union += (a || b) as u64;
    }
    if union == 0 {
        return Err(Error::Metric("IoU undefined: no ROI and no encrypted region"));
    }
    Ok(inter as f64 / union as f64)
}

/// Mean over frames whose IoU is defined.
pub fn iou_avg(values: &[Option<f64>]) -> Result<f64> {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    if defined.is_empty() {
        return Err(Error::Metric("IoU undefined in every frame"));
    }
    Ok(defined.iter().sum::<f64>() / defined.len() as f64)
}

/// Relative payload growth in percent (headers and tile maps excluded).
pub fn bitrate_change(ori: &Container, enc: &Container) -> Result<f64> {
    let (a, b) = (&ori.header, &enc.header);
    let same = a.width == b.width
        && a.height == b.height
        && a.frame_count == b.frame_count
        && a.tile_w == b.tile_w
        && a.tile_h == b.tile_h
        && a.cu_size == b.cu_size
        && a.tu_size == b.tu_size
        && a.qp == b.qp
        && a.max_dqp == b.max_dqp
        && a.max_ref_frames == b.max_ref_frames
        && a.gop == b.gop;
    if !same {
        return Err(Error::Metric("containers differ in more than the cipher"));
    }
    let (so, se) = (ori.payload_bytes(), enc.payload_bytes());
    if so == 0 {
        return Err(Error::Metric("reference container has no payload"));
    }
    Ok(100.0 * (se as f64 - so as f64) / so as f64)
}

/// Which sequence supplies P_ori.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    /// Decode of the unencrypted container: isolates the cipher's effect
    /// from coding loss.
    PlainDecode,
    /// The uncompressed source.
    Source,
}

/// Operands of NPCR and UACI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NpcrMode {
    PlainVsCipher,
    /// Keyless decodes of two encryptions under different keys.
    TwoKeys,
}

pub struct EvalInputs<'a> {
    pub original: &'a VideoSequence,
    pub plain_decode: &'a VideoSequence,
    pub enc_decode: &'a VideoSequence,
    pub plain: &'a Container,
    pub enc: &'a Container,
    pub ground_truth: &'a RoiMap,
    pub canny: CannyParams,
    pub reference: Reference,
    /// Keyless decode of a second encryption; required for `TwoKeys`.
    pub second_decode: Option<&'a VideoSequence>,
    pub npcr_mode: NpcrMode,
}

fn ser_db<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) if x.is_infinite() => s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" }),
        Some(x) => s.serialize_f64(*x),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameMetrics {
    pub frame: usize,
    pub roi_units: usize,
    pub iou: Option<f64>,
    #[serde(serialize_with = "ser_db")]
    pub psnr_db: Option<f64>,
    pub ssim: Option<f64>,
    pub edr: Option<f64>,
    pub edr_no_edges: bool,
    pub entropy_orig_bits: Option<f64>,
    pub entropy_enc_bits: Option<f64>,
    pub npcr_pct: Option<f64>,
    pub uaci_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Averages {
    pub iou: Option<f64>,
    #[serde(serialize_with = "ser_db")]
    pub psnr_db: Option<f64>,
    pub ssim: Option<f64>,
    pub edr: Option<f64>,
    pub entropy_orig_bits: Option<f64>,
    pub entropy_enc_bits: Option<f64>,
    pub npcr_pct: Option<f64>,
    pub uaci_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub level: Option<String>,
    pub reference: Reference,
    pub npcr_mode: NpcrMode,
    pub frames_with_roi: usize,
    pub plain_payload_bytes: u64,
    pub enc_payload_bytes: u64,
    pub bitrate_change_pct: f64,
    pub average: Averages,
    pub frames: Vec<FrameMetrics>,
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn same_spec(a: &VideoSequence, b: &VideoSequence) -> Result<()> {
    if a.spec != b.spec {
        return Err(Error::Metric("sequences have different dimensions or lengths"));
    }
    Ok(())
}

pub fn evaluate_all(inp: &EvalInputs) -> Result<MetricReport> {
    same_spec(inp.original, inp.plain_decode)?;
    same_spec(inp.original, inp.enc_decode)?;
    let second = match inp.npcr_mode {
        NpcrMode::TwoKeys => {
            let s = inp
                .second_decode
                .ok_or(Error::Metric("two-key NPCR needs a second encrypted decode"))?;
            same_spec(inp.original, s)?;
            Some(s)
        }
        NpcrMode::PlainVsCipher => None,
    };
    let h = &inp.enc.header;
    if h.width as usize != inp.original.spec.width
        || h.height as usize != inp.original.spec.height
        || inp.enc.frames.len() != inp.original.len()
    {
        return Err(Error::Metric("container does not match the sequences"));
    }
    inp.canny.validate()?;
    let bitrate = bitrate_change(inp.plain, inp.enc)?;
    let (w, hgt) = (inp.original.spec.width, inp.original.spec.height);
    let grid = TileGrid::new(w, hgt, h.tile_w as usize, h.tile_h as usize)?;
    let reference = match inp.reference {
        Reference::PlainDecode => inp.plain_decode,
        Reference::Source => inp.original,
    };

    let frames: Vec<FrameMetrics> = (0..inp.original.len())
        .into_par_iter()
        .map(|f| -> Result<FrameMetrics> {
            let cls = TileClassification {
                grid,
                roi: inp.enc.frames[f].roi_tiles.clone(),
            };
            let enc_mask = pixel_mask(&cls);
            let gt = region_mask(w, hgt, &inp.ground_truth.regions_for(f));
            let iou_v = iou(&enc_mask, &gt).ok();
            let units = roi_unit_set(&cls, h.cu_size as usize);
            let mut m = FrameMetrics {
                frame: f,
                roi_units: units.len(),
                iou: iou_v,
                psnr_db: None,
                ssim: None,
                edr: None,
                edr_no_edges: false,
                entropy_orig_bits: None,
                entropy_enc_bits: None,
                npcr_pct: None,
                uaci_pct: None,
            };
            if units.is_empty() {
                return Ok(m);
            }
            let (ori, enc) = (&reference.frames[f], &inp.enc_decode.frames[f]);
            let sets = extract_roi_pixels(ori, enc, &units)?;
            m.psnr_db = Some(psnr(&sets.ori, &sets.enc)?);
            m.ssim = Some(ssim(&sets.ori_y, &sets.enc_y)?);
            let e = edr_frames(ori, enc, &enc_mask, &inp.canny)?;
            m.edr = Some(e.value);
            m.edr_no_edges = e.no_edges;
            m.entropy_orig_bits = Some(entropy(&sets.ori)?);
            m.entropy_enc_bits = Some(entropy(&sets.enc)?);
            let (a, b) = match second {
                Some(s) => (
                    sets.enc.clone(),
                    extract_roi_pixels(ori, &s.frames[f], &units)?.enc,
                ),
                None => (sets.ori, sets.enc),
            };
            m.npcr_pct = Some(npcr(&a, &b)?);
            m.uaci_pct = Some(uaci(&a, &b)?);
            Ok(m)
        })
        .collect::<Result<_>>()?;

    let average = Averages {
        iou: iou_avg(&frames.iter().map(|m| m.iou).collect::<Vec<_>>()).ok(),
        psnr_db: mean(frames.iter().map(|m| m.psnr_db)),
        ssim: mean(frames.iter().map(|m| m.ssim)),
        edr: mean(frames.iter().map(|m| m.edr)),
        entropy_orig_bits: mean(frames.iter().map(|m| m.entropy_orig_bits)),
        entropy_enc_bits: mean(frames.iter().map(|m| m.entropy_enc_bits)),
        npcr_pct: mean(frames.iter().map(|m| m.npcr_pct)),
        uaci_pct: mean(frames.iter().map(|m| m.uaci_pct)),
    };
    Ok(MetricReport {
        level: h.level.map(|l: Level| l.as_str().to_string()),
        reference: inp.reference,
        npcr_mode: inp.npcr_mode,
        frames_with_roi: frames.iter().filter(|m| m.roi_units > 0).count(),
        plain_payload_bytes: inp.plain.payload_bytes(),
        enc_payload_bytes: inp.enc.payload_bytes(),
        bitrate_change_pct: bitrate,
        average,
        frames,
    })
}

impl MetricReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Report(e.to_string()))
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let p = path.as_ref();
        std::fs::write(p, self.to_json()?).map_err(|e| Error::io(p, e))
    }

    /// One row per frame.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let p = path.as_ref();
        let mut w = csv::Writer::from_path(p).map_err(|e| Error::Report(e.to_string()))?;
        for row in &self.frames {
            w.serialize(row).map_err(|e| Error::Report(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(p, e))
    }

    /// Human-readable sequence summary.
    pub fn summary(&self) -> String {
        let f = |v: Option<f64>, prec: usize| match v {
            Some(x) if x.is_infinite() => "inf".to_string(),
            Some(x) => format!("{x:.prec$}"),
            None => "n/a".to_string(),
        };
        let a = &self.average;
        [
            format!("level:          {}", self.level.as_deref().unwrap_or("none")),
            format!("frames with ROI: {} / {}", self.frames_with_roi, self.frames.len()),
            format!("iou:            {}", f(a.iou, 4)),
            format!("psnr_db:        {}", f(a.psnr_db, 2)),
            format!("ssim:           {}", f(a.ssim, 4)),
            format!("edr:            {}", f(a.edr, 4)),
            format!(
                "entropy:        {} -> {}",
                f(a.entropy_orig_bits, 4),
                f(a.entropy_enc_bits, 4)
            ),
            format!("npcr:           {}%", f(a.npcr_pct, 4)),
            format!("uaci:           {}%", f(a.uaci_pct, 4)),
            format!("bitrate_change: {:.2}%", self.bitrate_change_pct),
        ]
        .join("\n")
    }
}
