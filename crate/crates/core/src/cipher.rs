//! Three-level element cipher.
//!
//! Every transform preserves the element's alphabet and, for the basic
//! level, the exact length of its bypass bins. Values are transformed before
//! binarization on the encoder side and after parsing on the decoder side;
//! both sides consume keystream draws in the same order.

use std::fmt;
use std::str::FromStr;

use crate::bitstream::{eg_decode, eg_encode, slice_reader};
use crate::error::{Error, Result};
use crate::keystream::{BitSource, ChaoticParams, KeystreamDrawer, MasterKey, StreamKey};
use crate::syntax::{ElementKind, SyntaxElement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Basic,
    Enhanced,
    Advanced,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Basic, Level::Enhanced, Level::Advanced];

    pub fn covers(self, kind: ElementKind) -> bool {
        use ElementKind::*;
        match kind {
            MvdSignH | MvdSignV | MvdValH | MvdValV | CoefSign | CoefRemaining | DqpSign
            | MergeIdx | RefFrmIdx => true,
            LumaIpmMpmIdx | LumaIpmRem | ChromaIpm | MvpIdx | DqpValue => self >= Level::Enhanced,
            _ => false,
        }
    }

    /// Whether luma coefficients of ROI CUs are edge-scrambled.
    pub fn scrambles(self) -> bool {
        self == Level::Advanced
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Basic => "basic",
            Level::Enhanced => "enhanced",
            Level::Advanced => "advanced",
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Level::Basic => 1,
            Level::Enhanced => 2,
            Level::Advanced => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Option<Level>> {
        match tag {
            0 => Ok(None),
            1 => Ok(Some(Level::Basic)),
            2 => Ok(Some(Level::Enhanced)),
            3 => Ok(Some(Level::Advanced)),
            t => Err(Error::Container(format!("unknown level tag {t}"))),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "basic" => Ok(Level::Basic),
            "enhanced" => Ok(Level::Enhanced),
            "advanced" => Ok(Level::Advanced),
            _ => Err(Error::Config(format!("unknown level {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Encrypt,
    Decrypt,
}

/// Per-element state the transforms need beyond the value itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CipherContext {
    /// Reference-window occupancy.
    pub rn: u32,
    pub max_dqp: u32,
    /// Whether the current CU lies in an ROI tile.
    pub roi: bool,
}

// Element ops. Each pair is an exact bijection on the element alphabet.

pub fn enc_bit(bit: u32, s: u32) -> u32 {
    (bit ^ s) & 1
}

pub fn enc_mvd_sign(bit: u32, s: u32) -> u32 {
    enc_bit(bit, s)
}

pub fn enc_coef_sign(bit: u32, s: u32) -> u32 {
    enc_bit(bit, s)
}

pub fn enc_dqp_sign(bit: u32, s: u32) -> u32 {
    enc_bit(bit, s)
}

pub fn enc_mvp_idx(idx: u32, s: u32) -> u32 {
    enc_bit(idx, s)
}

pub fn xor_bits(bits: &[bool], s: &[bool]) -> Vec<bool> {
    assert_eq!(bits.len(), s.len());
    bits.iter().zip(s).map(|(a, b)| a ^ b).collect()
}

fn add_mod(v: u32, s: u32, m: u32) -> u32 {
    (v + s) % m
}

fn sub_mod(v: u32, s: u32, m: u32) -> u32 {
    (v + m - s % m) % m
}

pub fn enc_merge_idx(idx: u32, s: u32) -> u32 {
    add_mod(idx, s, 5)
}

pub fn dec_merge_idx(idx: u32, s: u32) -> u32 {
    sub_mod(idx, s, 5)
}

/// Alphabet of the reference-index draw for a window of `rn` frames.
pub fn ref_idx_modulus(rn: u32) -> u32 {
    match rn {
        2 => 2,
        3 => 3,
        _ => 4,
    }
}

pub fn enc_ref_idx(v: u32, rn: u32, s: u32) -> u32 {
    match rn {
        0 | 1 => v,
        3 => add_mod(v, s, 3),
        _ => v ^ s,
    }
}

pub fn dec_ref_idx(v: u32, rn: u32, s: u32) -> u32 {
    match rn {
        3 => sub_mod(v, s, 3),
        _ => enc_ref_idx(v, rn, s),
    }
}

pub fn enc_mpm_idx(idx: u32, s: u32) -> u32 {
    add_mod(idx, s, 3)
}

pub fn dec_mpm_idx(idx: u32, s: u32) -> u32 {
    sub_mod(idx, s, 3)
}

pub fn enc_luma_ipm_rem(code: u32, s: u32) -> u32 {
    (code ^ s) & 31
}

pub fn enc_chroma_ipm(idx: u32, s: u32) -> u32 {
    add_mod(idx, s, 5)
}

pub fn dec_chroma_ipm(idx: u32, s: u32) -> u32 {
    sub_mod(idx, s, 5)
}

pub fn enc_dqp_value(dqp: i32, max_dqp: u32, s: u32) -> i32 {
    let m = 2 * max_dqp + 1;
    add_mod((dqp + max_dqp as i32) as u32, s, m) as i32 - max_dqp as i32
}

pub fn dec_dqp_value(dqp: i32, max_dqp: u32, s: u32) -> i32 {
    let m = 2 * max_dqp + 1;
    sub_mod((dqp + max_dqp as i32) as u32, s, m) as i32 - max_dqp as i32
}

/// Length of the bypass suffix the cipher may flip in an MVD magnitude
/// (the EG1 suffix of `|mvd| − 2`; magnitudes below 2 have none).
pub fn mvd_suffix_len(abs: u32) -> u32 {
    if abs < 2 {
        0
    } else {
        31 - abs.leading_zeros()
    }
}

/// XORs the EG_k information bits of `v` with `s`.
fn xor_eg_suffix(v: u32, k: u32, s: u128) -> Result<u32> {
    let cw = eg_encode(v, k)?;
    let n = cw.suffix().len();
    let mut bits = cw.bits.clone();
    for i in 0..n {
        bits[cw.suffix_start + i] ^= (s >> (n - 1 - i)) & 1 == 1;
    }
    eg_decode(k, slice_reader(&bits))
}

pub fn enc_mvd_suffix(abs: u32, s: u128) -> Result<u32> {
    if abs < 2 {
        return Ok(abs);
    }
    Ok(xor_eg_suffix(abs - 2, 1, s)? + 2)
}

pub const COEF_REM_PREFIX_CAP: u32 = 4;

/// cMax of the Rice part of a remaining level; larger values escape to EG_{k+1}.
pub fn coef_rem_cmax(k: u32) -> u32 {
    COEF_REM_PREFIX_CAP << k
}

/// Number of bypass suffix bits in a remaining-level codeword.
pub fn coef_rem_suffix_len(r: u32, k: u32) -> Result<u32> {
    let c_max = coef_rem_cmax(k);
    if r < c_max {
        Ok(k)
    } else {
        Ok(eg_encode(r - c_max, k + 1)?.suffix().len() as u32)
    }
}

pub fn enc_coef_suffix(r: u32, k: u32, s: u128) -> Result<u32> {
    let c_max = coef_rem_cmax(k);
    if r < c_max {
        let mask = (1u32 << k) - 1;
        Ok((r & !mask) | ((r ^ s as u32) & mask))
    } else {
        Ok(c_max + xor_eg_suffix(r - c_max, k + 1, s)?)
    }
}

/// Transform applied to every element in canonical order.
pub trait ElementTransform {
    fn transform(&mut self, el: &mut SyntaxElement, ctx: &CipherContext) -> Result<()>;

    /// Whether ROI luma coefficients are edge-scrambled by this transform.
    fn scrambling(&self) -> bool {
        false
    }

    /// Logistic-map seed for one luma TU; `None` when not scrambling.
    fn chaotic_params(&self, _frame: u64, _unit: u64) -> Option<ChaoticParams> {
        None
    }
}

/// Pass-through transform: plain encoding and keyless decoding.
#[derive(Debug, Default, Clone, Copy)]
pub struct Identity;

impl ElementTransform for Identity {
    fn transform(&mut self, _: &mut SyntaxElement, _: &CipherContext) -> Result<()> {
        Ok(())
    }
}

/// Counter blocks reserved per frame: 2^36, far more than a frame can draw.
pub const FRAME_SEGMENT_BITS: u32 = 36;

/// A keyed cipher session over one keystream.
pub struct CipherSession {
    key: StreamKey,
    drawer: KeystreamDrawer,
    level: Level,
    dir: Direction,
    draws: u64,
    trace: Option<Vec<(ElementKind, u128)>>,
}

impl CipherSession {
    pub fn new(key: StreamKey, level: Level, dir: Direction) -> Self {
        CipherSession {
            key,
            drawer: KeystreamDrawer::new(key),
            level,
            dir,
            draws: 0,
            trace: None,
        }
    }

    /// Session for one frame. Each frame owns a disjoint counter segment so
    /// frames can be coded independently and a damaged frame cannot
    /// desynchronise the ones after it.
    pub fn for_frame(key: MasterKey, nonce: u64, frame: u64, level: Level, dir: Direction) -> Self {
        assert!(frame < 1 << (63 - FRAME_SEGMENT_BITS), "frame index too large");
        let sk = StreamKey {
            key,
            nonce,
            counter: frame << FRAME_SEGMENT_BITS,
        };
        Self::new(sk, level, dir)
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn level(&self) -> Level {
        self.level
    }

    /// Number of keystream draws so far (one per transformed element part).
    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn trace(&self) -> Option<&[(ElementKind, u128)]> {
        self.trace.as_deref()
    }

    fn uniform(&mut self, kind: ElementKind, m: u32) -> u32 {
        let s = self.drawer.next_uniform(m);
        self.finish_draw(kind, s as u128);
        s
    }

    fn bits(&mut self, kind: ElementKind, n: u32) -> u128 {
        let s = self.drawer.next_bits(n);
        self.finish_draw(kind, s);
        s
    }

    fn finish_draw(&mut self, kind: ElementKind, s: u128) {
        self.drawer.next_element();
        self.draws += 1;
        if let Some(t) = self.trace.as_mut() {
            t.push((kind, s));
        }
    }

    fn check(v: i32, hi: i32, what: &'static str) -> Result<u32> {
        if (0..=hi).contains(&v) {
            Ok(v as u32)
        } else {
            Err(Error::Range {
                value: v as i64,
                what,
            })
        }
    }

    fn dqp(&mut self, dqp: i32, max_dqp: u32) -> Result<i32> {
        if max_dqp == 0 || dqp.unsigned_abs() > max_dqp {
            return Err(Error::Range {
                value: dqp as i64,
                what: "delta QP beyond MaxDQP",
            });
        }
        let dec = self.dir == Direction::Decrypt;
        let value_s = if self.level.covers(ElementKind::DqpValue) {
            Some(self.uniform(ElementKind::DqpValue, 2 * max_dqp + 1))
        } else {
            None
        };
        // encrypt: shift, then flip sign of the shifted value;
        // decrypt: unflip, then unshift. Draw order is the same both ways.
        let mut v = dqp;
        if !dec {
            if let Some(s) = value_s {
                v = enc_dqp_value(v, max_dqp, s);
            }
        }
        if v != 0 {
            let s = self.uniform(ElementKind::DqpSign, 2);
            if s == 1 {
                v = -v;
            }
        }
        if dec {
            if let Some(s) = value_s {
                v = dec_dqp_value(v, max_dqp, s);
            }
        }
        Ok(v)
    }
}

impl ElementTransform for CipherSession {
    fn scrambling(&self) -> bool {
        self.level.scrambles()
    }

    fn chaotic_params(&self, frame: u64, unit: u64) -> Option<ChaoticParams> {
        self.level
            .scrambles()
            .then(|| ChaoticParams::for_unit(self.key.key, self.key.nonce, frame, unit))
    }

    fn transform(&mut self, el: &mut SyntaxElement, ctx: &CipherContext) -> Result<()> {
        use ElementKind::*;
        if !ctx.roi {
            return Ok(());
        }
        if el.kind == DqpValue {
            el.value = self.dqp(el.value, ctx.max_dqp)?;
            return Ok(());
        }
        if !self.level.covers(el.kind) {
            return Ok(());
        }
        let dec = self.dir == Direction::Decrypt;
        let kind = el.kind;
        el.value = match kind {
            MvdSignH | MvdSignV | CoefSign | DqpSign | MvpIdx => {
                let v = Self::check(el.value, 1, "binary element")?;
                enc_bit(v, self.uniform(kind, 2)) as i32
            }
            MvdValH | MvdValV => {
                let v = Self::check(el.value, i32::MAX, "MVD magnitude")?;
                let n = mvd_suffix_len(v);
                if n == 0 {
                    v as i32
                } else {
                    let s = self.bits(kind, n);
                    enc_mvd_suffix(v, s)? as i32
                }
            }
            CoefRemaining => {
                let v = Self::check(el.value, i32::MAX, "remaining level")?;
                let n = coef_rem_suffix_len(v, el.param)?;
                if n == 0 {
                    v as i32
                } else {
                    let s = self.bits(kind, n);
                    enc_coef_suffix(v, el.param, s)? as i32
                }
            }
            MergeIdx => {
                let v = Self::check(el.value, 4, "merge index")?;
                let s = self.uniform(kind, 5);
                (if dec { dec_merge_idx(v, s) } else { enc_merge_idx(v, s) }) as i32
            }
            RefFrmIdx => {
                let rn = ctx.rn;
                if rn < 2 {
                    el.value
                } else {
                    let v = Self::check(el.value, rn as i32 - 1, "reference index")?;
                    let s = self.uniform(kind, ref_idx_modulus(rn));
                    (if dec {
                        dec_ref_idx(v, rn, s)
                    } else {
                        enc_ref_idx(v, rn, s)
                    }) as i32
                }
            }
            LumaIpmMpmIdx => {
                let v = Self::check(el.value, 2, "MPM index")?;
                let s = self.uniform(kind, 3);
                (if dec { dec_mpm_idx(v, s) } else { enc_mpm_idx(v, s) }) as i32
            }
            LumaIpmRem => {
                let v = Self::check(el.value, 31, "luma mode remainder")?;
                enc_luma_ipm_rem(v, self.uniform(kind, 32)) as i32
            }
            ChromaIpm => {
                let v = Self::check(el.value, 4, "chroma mode index")?;
                let s = self.uniform(kind, 5);
                (if dec {
                    dec_chroma_ipm(v, s)
                } else {
                    enc_chroma_ipm(v, s)
                }) as i32
            }
            _ => return Err(Error::Contract("level covers an element it cannot transform")),
        };
        Ok(())
    }
}
