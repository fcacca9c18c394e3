//! Bin-level coding shared by the writer and the reader.
//!
//! Every syntax structure is coded by one function generic over [`BinIo`]:
//! the writer codes the value it is given, the reader ignores it and returns
//! what it parsed. Writer and reader therefore cannot drift apart.

use crate::bitstream::{
    eg_decode, eg_encode, fl_decode, fl_encode, tr_decode, tr_encode, BinMode, CabacDecoder,
    CabacEncoder, Codeword, ContextModel, Part,
};
use crate::error::{Error, Result};
use crate::syntax::ElementKind;

/// Context index layout.
pub mod ctx {
    pub const PRED_MODE: u16 = 0;
    pub const DQP: u16 = 1; // bin 0, then 2 for the rest
    pub const MPM_FLAG: u16 = 3;
    pub const MPM_IDX: u16 = 4; // 2 bins
    pub const CHROMA_IPM: u16 = 6; // 4 bins
    pub const MERGE_FLAG: u16 = 10;
    pub const MVD_GT0: u16 = 11;
    pub const MVD_GT1: u16 = 12;
    pub const MVP_IDX: u16 = 13;
    pub const REF_IDX: u16 = 14; // min(bin, 3)
    pub const CBF: u16 = 18; // luma, chroma
    pub const LAST_POS: u16 = 20; // plane class * 5 + min(bin, 4)
    pub const SIG: u16 = 30; // (plane class * 2 + size class) * 4 + diagonal class
    pub const GT1: u16 = 46; // plane class * 4 + state
    pub const GT2: u16 = 54; // plane class
    pub const COUNT: usize = 56;
}

/// Neutral initialisation value for every context.
pub const CTX_INIT: u8 = 154;

pub fn new_contexts(qp: i32) -> ContextModel {
    ContextModel::new(&[CTX_INIT; ctx::COUNT], qp)
}

pub trait BinIo {
    /// Codes (writer) or parses (reader) one bin.
    fn bin(&mut self, mode: BinMode, value: bool) -> Result<bool>;

    fn is_reader(&self) -> bool;

    /// Records a coded element value for tracing.
    fn note(&mut self, _kind: ElementKind, _value: i32) {}
}

pub struct Writer {
    enc: CabacEncoder,
    contexts: ContextModel,
    bins: u64,
    trace: Option<Vec<(ElementKind, i32)>>,
}

impl Writer {
    pub fn new(qp: i32) -> Self {
        Writer {
            enc: CabacEncoder::new(),
            contexts: new_contexts(qp),
            bins: 0,
            trace: None,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn bins(&self) -> u64 {
        self.bins
    }

    /// Terminates the payload and returns its bytes and element trace.
    pub fn finish(self) -> (Vec<u8>, Vec<(ElementKind, i32)>) {
        (self.enc.finish().bytes, self.trace.unwrap_or_default())
    }
}

impl BinIo for Writer {
    fn bin(&mut self, mode: BinMode, value: bool) -> Result<bool> {
        self.bins += 1;
        match mode {
            BinMode::Regular(id) => self.enc.encode(self.contexts.get_mut(id as usize)?, value),
            BinMode::Bypass => self.enc.encode_bypass(value),
        }
        Ok(value)
    }

    fn is_reader(&self) -> bool {
        false
    }

    fn note(&mut self, kind: ElementKind, value: i32) {
        if let Some(t) = self.trace.as_mut() {
            t.push((kind, value));
        }
    }
}

pub struct Reader<'a> {
    dec: CabacDecoder<'a>,
    contexts: ContextModel,
    trace: Option<Vec<(ElementKind, i32)>>,
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8], qp: i32) -> Result<Self> {
        Ok(Reader {
            dec: CabacDecoder::new(bytes)?,
            contexts: new_contexts(qp),
            trace: None,
        })
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    /// Checks the end-of-payload bin.
    pub fn finish(mut self) -> Result<Vec<(ElementKind, i32)>> {
        if !self.dec.decode_terminate()? {
            return Err(Error::Corrupt("missing end-of-payload bin".into()));
        }
        Ok(self.trace.unwrap_or_default())
    }
}

impl BinIo for Reader<'_> {
    fn bin(&mut self, mode: BinMode, _: bool) -> Result<bool> {
        match mode {
            BinMode::Regular(id) => self.dec.decode(self.contexts.get_mut(id as usize)?),
            BinMode::Bypass => self.dec.decode_bypass(),
        }
    }

    fn is_reader(&self) -> bool {
        true
    }

    fn note(&mut self, kind: ElementKind, value: i32) {
        if let Some(t) = self.trace.as_mut() {
            t.push((kind, value));
        }
    }
}

fn put_codeword<I: BinIo>(
    io: &mut I,
    cw: &Codeword,
    mode: &impl Fn(Part, usize) -> BinMode,
) -> Result<()> {
    for i in 0..cw.len() {
        let (p, j) = cw.part(i);
        io.bin(mode(p, j), cw.bits[i])?;
    }
    Ok(())
}

pub fn code_flag<I: BinIo>(io: &mut I, id: u16, v: bool) -> Result<bool> {
    io.bin(BinMode::Regular(id), v)
}

pub fn code_bypass_bit<I: BinIo>(io: &mut I, v: bool) -> Result<bool> {
    io.bin(BinMode::Bypass, v)
}

pub fn code_fl_bypass<I: BinIo>(io: &mut I, v: u32, n: u32) -> Result<u32> {
    let mode = |_: Part, _: usize| BinMode::Bypass;
    if io.is_reader() {
        fl_decode(n, |p, j| io.bin(mode(p, j), false))
    } else {
        put_codeword(io, &fl_encode(v, n)?, &mode)?;
        Ok(v)
    }
}

pub fn code_tr<I: BinIo>(
    io: &mut I,
    v: u32,
    k: u32,
    c_max: u32,
    mode: impl Fn(Part, usize) -> BinMode,
) -> Result<u32> {
    if io.is_reader() {
        tr_decode(k, c_max, |p, j| io.bin(mode(p, j), false))
    } else {
        put_codeword(io, &tr_encode(v, k, c_max)?, &mode)?;
        Ok(v)
    }
}

pub fn code_eg<I: BinIo>(
    io: &mut I,
    v: u32,
    k: u32,
    mode: impl Fn(Part, usize) -> BinMode,
) -> Result<u32> {
    if io.is_reader() {
        eg_decode(k, |p, j| io.bin(mode(p, j), false))
    } else {
        put_codeword(io, &eg_encode(v, k)?, &mode)?;
        Ok(v)
    }
}

/// Regular prefix with `prefix_ctx(bin)`, bypass suffix.
pub fn mixed(prefix_ctx: impl Fn(usize) -> u16) -> impl Fn(Part, usize) -> BinMode {
    move |p, j| match p {
        Part::Prefix => BinMode::Regular(prefix_ctx(j)),
        Part::Suffix => BinMode::Bypass,
    }
}

pub fn bypass(_: Part, _: usize) -> BinMode {
    BinMode::Bypass
}
