//! Binary arithmetic coder with adaptive regular bins and equiprobable
//! bypass bins (the H.265 M-coder: 9-bit range, 6-bit probability states).
//!
//! Output length is the number of renormalisation shifts plus the flush, so
//! it depends only on the regular-bin sequence and the number of bypass bins,
//! never on bypass bin values.

use super::bits::{BitReader, BitWriter};
use crate::error::{Error, Result};

const RANGE_LPS: [[u8; 4]; 64] = [
    [128, 176, 208, 240],
    [128, 167, 197, 227],
    [128, 158, 187, 216],
    [123, 150, 178, 205],
    [116, 142, 169, 195],
    [111, 135, 160, 185],
    [105, 128, 152, 175],
    [100, 122, 144, 166],
    [95, 116, 137, 158],
    [90, 110, 130, 150],
    [85, 104, 123, 142],
    [81, 99, 117, 135],
    [77, 94, 111, 128],
    [73, 89, 105, 122],
    [69, 85, 100, 116],
    [66, 80, 95, 110],
    [62, 76, 90, 104],
    [59, 72, 86, 99],
    [56, 69, 81, 94],
    [53, 65, 77, 89],
    [51, 62, 73, 85],
    [48, 59, 69, 80],
    [46, 56, 66, 76],
    [43, 53, 63, 72],
    [41, 50, 59, 69],
    [39, 48, 56, 65],
    [37, 45, 54, 62],
    [35, 43, 51, 59],
    [33, 41, 48, 56],
    [32, 39, 46, 53],
    [30, 37, 43, 50],
    [29, 35, 41, 48],
    [27, 33, 39, 45],
    [26, 31, 37, 43],
    [24, 30, 35, 41],
    [23, 28, 33, 39],
    [22, 27, 32, 37],
    [21, 26, 30, 35],
    [20, 24, 29, 33],
    [19, 23, 27, 31],
    [18, 22, 26, 30],
    [17, 21, 25, 28],
    [16, 20, 23, 27],
    [15, 19, 22, 25],
    [14, 18, 21, 24],
    [14, 17, 20, 23],
    [13, 16, 19, 22],
    [12, 15, 18, 21],
    [12, 14, 17, 20],
    [11, 14, 16, 19],
    [11, 13, 15, 18],
    [10, 12, 15, 17],
    [10, 12, 14, 16],
    [9, 11, 13, 15],
    [9, 11, 12, 14],
    [8, 10, 12, 14],
    [8, 9, 11, 13],
    [7, 9, 11, 12],
    [7, 9, 10, 12],
    [7, 8, 10, 11],
    [6, 8, 9, 11],
    [6, 7, 9, 10],
    [6, 7, 8, 9],
    [2, 2, 2, 2],
];

const TRANS_LPS: [u8; 64] = [
    0, 0, 1, 2, 2, 4, 4, 5, 6, 7, 8, 9, 9, 11, 11, 12, 13, 13, 15, 15, 16, 16, 18, 18, 19, 19, 21,
    21, 22, 22, 23, 24, 24, 25, 26, 26, 27, 27, 28, 29, 29, 30, 30, 30, 31, 32, 32, 33, 33, 33, 34,
    34, 35, 35, 35, 36, 36, 36, 37, 37, 37, 38, 38, 63,
];

#[inline]
fn trans_mps(state: u8) -> u8 {
    if state < 62 {
        state + 1
    } else {
        state
    }
}

/// Probability state of one context: LPS state index 0..=62 and the MPS value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContextState {
    pub state: u8,
    pub mps: bool,
}

impl ContextState {
    /// Linear initialisation from an 8-bit init value and the slice QP.
    pub fn init(init_value: u8, qp: i32) -> Self {
        let slope = (init_value as i32 >> 4) * 5 - 45;
        let offset = ((init_value as i32 & 15) << 3) - 16;
        let pre = (((slope * qp.clamp(0, 51)) >> 4) + offset).clamp(1, 126);
        if pre <= 63 {
            ContextState {
                state: (63 - pre) as u8,
                mps: false,
            }
        } else {
            ContextState {
                state: (pre - 64) as u8,
                mps: true,
            }
        }
    }

    #[inline]
    fn update(&mut self, bin: bool) {
        if bin == self.mps {
            self.state = trans_mps(self.state);
        } else {
            if self.state == 0 {
                self.mps = !self.mps;
            }
            self.state = TRANS_LPS[self.state as usize];
        }
    }
}

/// A bank of contexts addressed by id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextModel {
    states: Vec<ContextState>,
}

impl ContextModel {
    pub fn new(init_values: &[u8], qp: i32) -> Self {
        ContextModel {
            states: init_values
                .iter()
                .map(|&v| ContextState::init(v, qp))
                .collect(),
        }
    }

    /// `n` contexts all starting at p = 0.5.
    pub fn uniform(n: usize) -> Self {
        ContextModel {
            states: vec![
                ContextState {
                    state: 0,
                    mps: false
                };
                n
            ],
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    #[inline]
    pub fn get_mut(&mut self, id: usize) -> Result<&mut ContextState> {
        let n = self.states.len();
        self.states
            .get_mut(id)
            .ok_or_else(|| Error::Corrupt(format!("context id {id} not in model of {n}")))
    }
}

pub struct CabacEncoder {
    low: u32,
    range: u32,
    outstanding: u64,
    first_bit: bool,
    out: BitWriter,
}

impl Default for CabacEncoder {
    fn default() -> Self {
        Self::new()
    }
}

impl CabacEncoder {
    pub fn new() -> Self {
        CabacEncoder {
            low: 0,
            range: 510,
            outstanding: 0,
            first_bit: true,
            out: BitWriter::new(),
        }
    }

    #[inline]
    fn put_bit(&mut self, b: bool) {
        if self.first_bit {
            self.first_bit = false;
        } else {
            self.out.put(b);
        }
        while self.outstanding > 0 {
            self.out.put(!b);
            self.outstanding -= 1;
        }
    }

    #[inline]
    fn renorm(&mut self) {
        while self.range < 256 {
            if self.low < 256 {
                self.put_bit(false);
            } else if self.low >= 512 {
                self.low -= 512;
                self.put_bit(true);
            } else {
                self.low -= 256;
                self.outstanding += 1;
            }
            self.range <<= 1;
            self.low <<= 1;
        }
    }

    pub fn encode(&mut self, ctx: &mut ContextState, bin: bool) {
        let lps = RANGE_LPS[ctx.state as usize][((self.range >> 6) & 3) as usize] as u32;
        self.range -= lps;
        if bin != ctx.mps {
            self.low += self.range;
            self.range = lps;
        }
        ctx.update(bin);
        self.renorm();
    }

    pub fn encode_bypass(&mut self, bin: bool) {
        self.low <<= 1;
        if bin {
            self.low += self.range;
        }
        if self.low >= 1024 {
            self.put_bit(true);
            self.low -= 1024;
        } else if self.low < 512 {
            self.put_bit(false);
        } else {
            self.low -= 512;
            self.outstanding += 1;
        }
    }

    pub fn encode_terminate(&mut self, bin: bool) {
        self.range -= 2;
        if bin {
            self.low += self.range;
            self.flush();
        } else {
            self.renorm();
        }
    }

    fn flush(&mut self) {
        self.range = 2;
        self.renorm();
        self.put_bit((self.low >> 9) & 1 == 1);
        // the trailing 1 doubles as the stop bit
        self.out.put_bits(((self.low >> 7) & 3) | 1, 2);
    }

    /// Bits emitted so far, excluding any still pending on a carry.
    pub fn bits_written(&self) -> u64 {
        self.out.bit_len()
    }

    /// Codes the end-of-payload terminate bin, flushes and byte-aligns.
    pub fn finish(mut self) -> Payload {
        self.encode_terminate(true);
        let bit_len = self.out.bit_len();
        Payload {
            bytes: self.out.into_bytes(),
            bit_len,
        }
    }
}

pub struct CabacDecoder<'a> {
    range: u32,
    offset: u32,
    input: BitReader<'a>,
}

impl<'a> CabacDecoder<'a> {
    pub fn new(bytes: &'a [u8]) -> Result<Self> {
        let mut input = BitReader::new(bytes);
        let offset = input.get_bits(9)?;
        if offset >= 510 {
            return Err(Error::Corrupt("arithmetic decoder offset out of range".into()));
        }
        Ok(CabacDecoder {
            range: 510,
            offset,
            input,
        })
    }

    #[inline]
    fn renorm(&mut self) -> Result<()> {
        while self.range < 256 {
            self.range <<= 1;
            self.offset = (self.offset << 1) | self.input.get()? as u32;
        }
        Ok(())
    }

    pub fn decode(&mut self, ctx: &mut ContextState) -> Result<bool> {
        let lps = RANGE_LPS[ctx.state as usize][((self.range >> 6) & 3) as usize] as u32;
        self.range -= lps;
        let bin = if self.offset >= self.range {
            self.offset -= self.range;
            self.range = lps;
            !ctx.mps
        } else {
            ctx.mps
        };
        ctx.update(bin);
        self.renorm()?;
        Ok(bin)
    }

    pub fn decode_bypass(&mut self) -> Result<bool> {
        self.offset = (self.offset << 1) | self.input.get()? as u32;
        if self.offset >= self.range {
            self.offset -= self.range;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    pub fn decode_terminate(&mut self) -> Result<bool> {
        self.range -= 2;
        if self.offset >= self.range {
            Ok(true)
        } else {
            self.renorm()?;
            Ok(false)
        }
    }

    pub fn bits_consumed(&self) -> u64 {
        self.input.position()
    }
}

/// A coded, byte-aligned payload.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Payload {
    pub bytes: Vec<u8>,
    /// Coded length before zero padding.
    pub bit_len: u64,
}
