//! Binarization and two-mode binary arithmetic coding.

pub mod binarize;
pub mod bits;
pub mod cabac;

pub use binarize::{
    eg_decode, eg_encode, fl_decode, fl_encode, slice_reader, tr_decode, tr_encode, Codeword, Part,
};
pub use cabac::{CabacDecoder, CabacEncoder, ContextModel, ContextState, Payload};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinMode {
    Regular(u16),
    Bypass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bin {
    pub value: bool,
    pub mode: BinMode,
}

pub type BinString = Vec<Bin>;

/// Attaches a mode to every bit of a codeword.
pub fn to_bins(cw: &Codeword, mut mode: impl FnMut(Part, usize) -> BinMode) -> BinString {
    (0..cw.len())
        .map(|i| {
            let (part, j) = cw.part(i);
            Bin {
                value: cw.bits[i],
                mode: mode(part, j),
            }
        })
        .collect()
}

pub fn encode_bins(bins: &[Bin], ctx: &mut ContextModel) -> Result<Payload> {
    let mut enc = CabacEncoder::new();
    for b in bins {
        match b.mode {
            BinMode::Regular(id) => enc.encode(ctx.get_mut(id as usize)?, b.value),
            BinMode::Bypass => enc.encode_bypass(b.value),
        }
    }
    Ok(enc.finish())
}

/// Decodes one bin per entry of `modes`, then checks the end-of-payload bin.
pub fn decode_bins(payload: &Payload, modes: &[BinMode], ctx: &mut ContextModel) -> Result<Vec<bool>> {
    let mut dec = CabacDecoder::new(&payload.bytes)?;
    let mut out = Vec::with_capacity(modes.len());
    for m in modes {
        out.push(match *m {
            BinMode::Regular(id) => dec.decode(ctx.get_mut(id as usize)?)?,
            BinMode::Bypass => dec.decode_bypass()?,
        });
    }
    if !dec.decode_terminate()? {
        return Err(Error::Corrupt("missing end-of-payload bin".into()));
    }
    Ok(out)
}
