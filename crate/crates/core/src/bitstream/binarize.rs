//! EG_k, TR_k and FL binarizations.
//!
//! Every codeword records where its suffix starts so that a caller can touch
//! only the information bits and leave the length-carrying prefix alone.
//! Decoders pull bits through a callback that receives the part and the
//! position within it, which lets the entropy layer pick a context or bypass
//! mode per bin.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Prefix,
    Suffix,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Codeword {
    pub bits: Vec<bool>,
    pub suffix_start: usize,
}

impl Codeword {
    pub fn prefix(&self) -> &[bool] {
        &self.bits[..self.suffix_start]
    }

    pub fn suffix(&self) -> &[bool] {
        &self.bits[self.suffix_start..]
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn part(&self, i: usize) -> (Part, usize) {
        if i < self.suffix_start {
            (Part::Prefix, i)
        } else {
            (Part::Suffix, i - self.suffix_start)
        }
    }

    pub fn to_string_bits(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

fn push_bits(out: &mut Vec<bool>, value: u64, n: u32) {
    for i in (0..n).rev() {
        out.push((value >> i) & 1 == 1);
    }
}

pub const MAX_EG_ORDER: u32 = 16;

/// k-th order Exp-Golomb: `n` zeros, a one, then `n + k` information bits.
pub fn eg_encode(v: u32, k: u32) -> Result<Codeword> {
    if k > MAX_EG_ORDER {
        return Err(Error::Range {
            value: k as i64,
            what: "EG order",
        });
    }
    if v >= 1 << 31 {
        return Err(Error::Range {
            value: v as i64,
            what: "EG value must be below 2^31",
        });
    }
    let w = v as u64 + (1u64 << k);
    let len = 64 - w.leading_zeros();
    let zeros = len - 1 - k;
    let mut bits = vec![false; zeros as usize];
    bits.push(true);
    let suffix_start = bits.len();
    push_bits(&mut bits, w, len - 1);
    Ok(Codeword { bits, suffix_start })
}

pub fn eg_decode(k: u32, mut read: impl FnMut(Part, usize) -> Result<bool>) -> Result<u32> {
    let mut zeros = 0u32;
    while !read(Part::Prefix, zeros as usize)? {
        zeros += 1;
        if zeros + k > 31 {
            return Err(Error::Corrupt("EG prefix too long".into()));
        }
    }
    let n = zeros + k;
    let mut w: u64 = 1;
    for i in 0..n {
        w = (w << 1) | read(Part::Suffix, i as usize)? as u64;
    }
    let v = w - (1u64 << k);
    if v >= 1 << 31 {
        return Err(Error::Corrupt("EG value overflow".into()));
    }
    Ok(v as u32)
}

/// k-th order truncated Rice with maximum `c_max`.
///
/// The unary prefix of `v >> k` is capped at `c_max >> k` ones. The k-bit
/// suffix follows an unsaturated prefix; a saturated prefix carries a suffix
/// only when `c_max` has non-zero low bits.
pub fn tr_encode(v: u32, k: u32, c_max: u32) -> Result<Codeword> {
    if v > c_max {
        return Err(Error::Range {
            value: v as i64,
            what: "TR value exceeds cMax",
        });
    }
    if k > 16 {
        return Err(Error::Range {
            value: k as i64,
            what: "TR rice parameter",
        });
    }
    let cap = c_max >> k;
    let pv = v >> k;
    let mut bits = vec![true; pv.min(cap) as usize];
    let mask = (1u32 << k) - 1;
    let has_suffix = if pv < cap {
        bits.push(false);
        k > 0
    } else {
        c_max & mask != 0
    };
    let suffix_start = bits.len();
    if has_suffix {
        push_bits(&mut bits, (v & mask) as u64, k);
    }
    Ok(Codeword { bits, suffix_start })
}

pub fn tr_decode(
    k: u32,
    c_max: u32,
    mut read: impl FnMut(Part, usize) -> Result<bool>,
) -> Result<u32> {
    let cap = c_max >> k;
    let mut pv = 0;
    while pv < cap && read(Part::Prefix, pv as usize)? {
        pv += 1;
    }
    let mask = (1u32 << k) - 1;
    let has_suffix = if pv < cap { k > 0 } else { c_max & mask != 0 };
    let mut low = 0;
    if has_suffix {
        for i in 0..k {
            low = (low << 1) | read(Part::Suffix, i as usize)? as u32;
        }
    }
    let v = (pv << k) | low;
    if v > c_max {
        return Err(Error::Corrupt(format!("TR value {v} exceeds cMax {c_max}")));
    }
    Ok(v)
}

/// Fixed length, MSB first. All bits are information bits.
pub fn fl_encode(v: u32, n_bits: u32) -> Result<Codeword> {
    if n_bits == 0 || n_bits > 32 || (n_bits < 32 && v >= 1 << n_bits) {
        return Err(Error::Range {
            value: v as i64,
            what: "FL value does not fit in n_bits",
        });
    }
    let mut bits = Vec::with_capacity(n_bits as usize);
    push_bits(&mut bits, v as u64, n_bits);
    Ok(Codeword {
        bits,
        suffix_start: 0,
    })
}

pub fn fl_decode(n_bits: u32, mut read: impl FnMut(Part, usize) -> Result<bool>) -> Result<u32> {
    let mut v = 0u32;
    for i in 0..n_bits {
        v = (v << 1) | read(Part::Suffix, i as usize)? as u32;
    }
    Ok(v)
}

/// Reads bits from a plain slice; used by tests and the self-test.
pub fn slice_reader(bits: &[bool]) -> impl FnMut(Part, usize) -> Result<bool> + '_ {
    let mut it = bits.iter();
    move |_, _| {
        it.next()
            .copied()
            .ok_or_else(|| Error::Corrupt("bin string exhausted".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exp-Golomb straight from the definition: group index by cumulative
    /// group sizes 2^k, 2^(k+1), ...
    fn eg_oracle(v: u32, k: u32) -> String {
        let mut group = 0;
        let mut base = 0u64;
        while v as u64 >= base + (1u64 << (k + group)) {
            base += 1u64 << (k + group);
            group += 1;
        }
        let mut s = "0".repeat(group as usize);
        s.push('1');
        let off = v as u64 - base;
        for i in (0..k + group).rev() {
            s.push(if (off >> i) & 1 == 1 { '1' } else { '0' });
        }
        s
    }

    fn tr_oracle(v: u32, k: u32, c_max: u32) -> String {
        let cap = c_max >> k;
        let pv = v >> k;
        let mut s = "1".repeat(pv.min(cap) as usize);
        if pv < cap {
            s.push('0');
        }
        let suffix = if pv < cap { k > 0 } else { c_max & ((1 << k) - 1) != 0 };
        if suffix {
            for i in (0..k).rev() {
                s.push(if (v >> i) & 1 == 1 { '1' } else { '0' });
            }
        }
        s
    }

    #[test]
    fn eg_examples() {
        assert_eq!(eg_encode(0, 0).unwrap().to_string_bits(), "1");
        assert_eq!(eg_encode(1, 0).unwrap().to_string_bits(), "010");
        assert_eq!(eg_encode(0, 1).unwrap().to_string_bits(), "10");
        let c = eg_encode(5, 1).unwrap();
        assert_eq!(c.to_string_bits(), "0111");
        assert_eq!(c.prefix(), &[false, true]);
    }

    #[test]
    fn eg_matches_oracle() {
        for k in 0..=3 {
            for v in 0..2000 {
                let c = eg_encode(v, k).unwrap();
                assert_eq!(c.to_string_bits(), eg_oracle(v, k), "v={v} k={k}");
                assert_eq!(eg_decode(k, slice_reader(&c.bits)).unwrap(), v);
            }
        }
    }

    #[test]
    fn eg_round_trip_exhaustive() {
        for k in 0..=3 {
            for v in 0..=(1u32 << 16) {
                let c = eg_encode(v, k).unwrap();
                assert_eq!(eg_decode(k, slice_reader(&c.bits)).unwrap(), v);
            }
        }
    }

    #[test]
    fn eg_rejects_and_detects() {
        assert!(eg_encode(1 << 31, 0).is_err());
        let zeros = vec![false; 40];
        assert!(matches!(
            eg_decode(0, slice_reader(&zeros)),
            Err(Error::Corrupt(_))
        ));
    }

    #[test]
    fn tr_examples() {
        assert_eq!(tr_encode(0, 0, 4).unwrap().to_string_bits(), "0");
        assert_eq!(tr_encode(4, 0, 4).unwrap().to_string_bits(), "1111");
        let c = tr_encode(3, 1, 8).unwrap();
        assert_eq!(c.prefix(), &[true, false]);
        assert_eq!(c.suffix(), &[true]);
        assert!(tr_encode(5, 0, 4).is_err());
    }

    #[test]
    fn tr_round_trip_grid() {
        for c_max in [0u32, 1, 2, 3, 4, 7, 8, 9, 15, 16, 31, 64, 100, 256] {
            for k in 0..=4 {
                for v in 0..=c_max.min(256) {
                    let c = tr_encode(v, k, c_max).unwrap();
                    assert_eq!(c.to_string_bits(), tr_oracle(v, k, c_max));
                    assert_eq!(
                        tr_decode(k, c_max, slice_reader(&c.bits)).unwrap(),
                        v,
                        "v={v} k={k} cmax={c_max}"
                    );
                }
            }
        }
    }

    #[test]
    fn fl_examples_and_round_trip() {
        assert_eq!(fl_encode(5, 3).unwrap().to_string_bits(), "101");
        assert_eq!(fl_encode(0, 1).unwrap().to_string_bits(), "0");
        assert_eq!(fl_encode(31, 5).unwrap().to_string_bits(), "11111");
        assert!(fl_encode(8, 3).is_err());
        for n in 1..=12 {
            for v in 0..(1u32 << n) {
                let c = fl_encode(v, n).unwrap();
                assert_eq!(c.len(), n as usize);
                assert_eq!(fl_decode(n, slice_reader(&c.bits)).unwrap(), v);
            }
        }
    }
}
