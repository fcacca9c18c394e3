//! Per-CU syntax: the coded structure, its bin coding and the element
//! cipher pass over it.

use crate::bitstream::BinMode;
use crate::cipher::{CipherContext, ElementTransform};
use crate::error::{Error, Result};
use crate::syntax::{ElementKind, SyntaxElement};

use super::entropy::{
    bypass, code_bypass_bit, code_eg, code_fl_bypass, code_flag, code_tr, ctx, mixed, BinIo,
};
use super::inter::Mv;
use super::transform::diag_scan;
use crate::cipher::{coef_rem_cmax, COEF_REM_PREFIX_CAP};

/// Largest MVD component magnitude a reader accepts.
pub const MAX_MVD: u32 = 1 << 14;
/// Largest remaining level a reader accepts.
pub const MAX_REMAINING: u32 = 1 << 16;
const GT1_CODED: usize = 8;
const MAX_RICE: u32 = COEF_REM_PREFIX_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredSyntax {
    Intra {
        mpm_flag: bool,
        /// Index into the MPM list when `mpm_flag`, else unused.
        mpm_idx: u8,
        /// Remainder code when not `mpm_flag`, else unused.
        rem: u8,
        /// Index into the chroma candidate list (4 = derived mode).
        chroma: u8,
    },
    Merge {
        idx: u8,
    },
    Amvp {
        ref_idx: u8,
        mvd: Mv,
        mvp_idx: u8,
    },
}

/// Coding-unit syntax. `tus` holds luma TUs in raster order, then Cb, then
/// Cr; each TU lists its levels in diagonal scan order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CuSyntax {
    pub dqp: i32,
    pub pred: PredSyntax,
    pub tus: Vec<Vec<i32>>,
}

/// Frame-level state the parser needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameParams {
    pub inter: bool,
    /// Reference-window occupancy.
    pub rn: u32,
    pub max_dqp: u32,
    pub tu: usize,
    pub cu: usize,
}

impl FrameParams {
    pub fn luma_tus(&self) -> usize {
        (self.cu / self.tu).pow(2)
    }

    pub fn chroma_tus(&self) -> usize {
        (self.cu / 2 / self.tu).pow(2)
    }

    pub fn tu_count(&self) -> usize {
        self.luma_tus() + 2 * self.chroma_tus()
    }

    pub fn is_luma(&self, tu_idx: usize) -> bool {
        tu_idx < self.luma_tus()
    }
}

impl CuSyntax {
    /// Empty placeholder for the reader to fill.
    pub fn blank(fp: &FrameParams) -> Self {
        CuSyntax {
            dqp: 0,
            pred: PredSyntax::Merge { idx: 0 },
            tus: vec![vec![0; fp.tu * fp.tu]; fp.tu_count()],
        }
    }
}

fn ceil_log2(v: u32) -> u32 {
    if v <= 1 {
        0
    } else {
        32 - (v - 1).leading_zeros()
    }
}

fn corrupt<T>(msg: String) -> Result<T> {
    Err(Error::Corrupt(msg))
}

pub fn rice_update(k: u32, r: u32) -> u32 {
    if (r >> k) >= 3 {
        (k + 1).min(MAX_RICE)
    } else {
        k
    }
}

/// For nonzero levels in coding order (reverse scan), the base subtracted
/// before a remaining level is coded, or `None` when the flags already fix
/// the magnitude. Only the thresholds |l| > 1 and |l| > 2 matter.
pub fn remaining_bases(abs: &[u32]) -> Vec<Option<u32>> {
    let gt2_at = abs.iter().take(GT1_CODED).position(|&a| a > 1);
    abs.iter()
        .enumerate()
        .map(|(j, &a)| {
            if j >= GT1_CODED {
                Some(1)
            } else if a <= 1 {
                None
            } else if Some(j) == gt2_at {
                (a > 2).then_some(3)
            } else {
                Some(2)
            }
        })
        .collect()
}

fn diag_class(pos: usize, n: usize) -> u16 {
    match pos % n + pos / n {
        0 => 0,
        1 => 1,
        2 | 3 => 2,
        _ => 3,
    }
}

/// Scan indices of nonzero levels, last first.
fn coding_order(levels: &[i32]) -> Vec<usize> {
    (0..levels.len()).rev().filter(|&i| levels[i] != 0).collect()
}

fn code_remaining<I: BinIo>(io: &mut I, r: u32, k: u32) -> Result<u32> {
    let c_max = coef_rem_cmax(k);
    let t = code_tr(io, r.min(c_max), k, c_max, bypass)?;
    if t < c_max {
        return Ok(t);
    }
    let esc = code_eg(io, r.saturating_sub(c_max), k + 1, bypass)?;
    let v = c_max + esc;
    if v > MAX_REMAINING {
        return corrupt(format!("remaining level {v} too large"));
    }
    Ok(v)
}

fn code_tu<I: BinIo>(io: &mut I, levels: &mut Vec<i32>, n: usize, pc: u16) -> Result<()> {
    let sc = (n == 8) as u16;
    let n2 = n * n;
    let reading = io.is_reader();
    let cbf = code_flag(io, ctx::CBF + pc, levels.iter().any(|&l| l != 0))?;
    io.note(ElementKind::CodedBlockFlag, cbf as i32);
    if !cbf {
        if reading {
            levels.clear();
            levels.resize(n2, 0);
        }
        return Ok(());
    }
    let last_w = levels.iter().rposition(|&l| l != 0).unwrap_or(0) as u32;
    let last = code_eg(io, last_w, 0, mixed(|j| ctx::LAST_POS + pc * 5 + j.min(4) as u16))?
        as usize;
    io.note(ElementKind::LastPos, last as i32);
    if last >= n2 {
        return corrupt(format!("last position {last} outside {n}x{n} TU"));
    }
    let scan = diag_scan(n);
    let mut sig = vec![false; n2];
    sig[last] = true;
    for i in (0..last).rev() {
        let id = ctx::SIG + (pc * 2 + sc) * 4 + diag_class(scan[i], n);
        sig[i] = code_flag(io, id, levels.get(i).is_some_and(|&l| l != 0))?;
    }
    let order: Vec<usize> = (0..n2).rev().filter(|&i| sig[i]).collect();
    let abs_w = |i: usize| levels.get(i).map_or(0, |l| l.unsigned_abs());

    // greater-than flags give each level a provisional magnitude
    let mut prov: Vec<u32> = vec![1; order.len()];
    let mut state = 1u16;
    let mut gt2_done = false;
    for (j, &i) in order.iter().take(GT1_CODED).enumerate() {
        let g1 = code_flag(io, ctx::GT1 + pc * 4 + state, abs_w(i) > 1)?;
        if g1 {
            prov[j] = 2;
            state = 0;
        } else if state > 0 && state < 3 {
            state += 1;
        }
        if g1 && !gt2_done {
            gt2_done = true;
            if code_flag(io, ctx::GT2 + pc, abs_w(i) > 2)? {
                prov[j] = 3;
            }
        }
    }
    // HEVC codes the single gt2 flag after all gt1 flags; coding it inline
    // is equivalent for parsing since it only depends on earlier bins.
    let mut neg = vec![false; order.len()];
    for (j, &i) in order.iter().enumerate() {
        neg[j] = code_bypass_bit(io, levels.get(i).is_some_and(|&l| l < 0))?;
        io.note(ElementKind::CoefSign, neg[j] as i32);
    }
    let bases = remaining_bases(&prov);
    let mut k = 0;
    let mut out = vec![0i32; n2];
    for (j, &i) in order.iter().enumerate() {
        let abs = match bases[j] {
            None => prov[j],
            Some(base) => {
                let r = code_remaining(io, abs_w(i).saturating_sub(base), k)?;
                io.note(ElementKind::CoefRemaining, r as i32);
                k = rice_update(k, r);
                base + r
            }
        };
        out[i] = if neg[j] { -(abs as i32) } else { abs as i32 };
    }
    if reading {
        *levels = out;
    } else if *levels != out {
        return Err(Error::Contract("residual levels not representable"));
    }
    Ok(())
}

fn code_mvd_component<I: BinIo>(io: &mut I, v: i32, kind: (ElementKind, ElementKind)) -> Result<i32> {
    let a = v.unsigned_abs();
    let mut abs = 0;
    if code_flag(io, ctx::MVD_GT0, a > 0)? {
        abs = 1;
        if code_flag(io, ctx::MVD_GT1, a > 1)? {
            abs = 2 + code_eg(io, a.saturating_sub(2), 1, bypass)?;
        }
    }
    if abs > MAX_MVD {
        return corrupt(format!("MVD magnitude {abs} too large"));
    }
    io.note(kind.0, abs as i32);
    let neg = abs > 0 && code_bypass_bit(io, v < 0)?;
    if abs > 0 {
        io.note(kind.1, neg as i32);
    }
    Ok(if neg { -(abs as i32) } else { abs as i32 })
}

/// Codes (or parses into) one CU.
pub fn code_cu<I: BinIo>(io: &mut I, cu: &mut CuSyntax, fp: &FrameParams) -> Result<()> {
    use ElementKind::*;
    let is_intra = matches!(cu.pred, PredSyntax::Intra { .. });
    let intra = if fp.inter {
        let v = code_flag(io, ctx::PRED_MODE, is_intra)?;
        io.note(PredMode, v as i32);
        v
    } else {
        if !io.is_reader() && !is_intra {
            return Err(Error::Contract("inter CU in an intra frame"));
        }
        true
    };

    let a = cu.dqp.unsigned_abs();
    let mut abs = code_tr(io, a.min(5), 0, 5, |_, j| {
        BinMode::Regular(ctx::DQP + j.min(1) as u16)
    })?;
    if abs == 5 {
        abs += code_eg(io, a.saturating_sub(5), 0, bypass)?;
    }
    if abs > fp.max_dqp {
        return corrupt(format!("delta QP {abs} beyond {}", fp.max_dqp));
    }
    let neg = abs != 0 && code_bypass_bit(io, cu.dqp < 0)?;
    cu.dqp = if neg { -(abs as i32) } else { abs as i32 };
    io.note(DqpValue, cu.dqp);

    if intra {
        let (mut mpm_flag, mut mpm_idx, mut rem, chroma) = match cu.pred {
            PredSyntax::Intra {
                mpm_flag,
                mpm_idx,
                rem,
                chroma,
            } => (mpm_flag, mpm_idx, rem, chroma),
            _ => (false, 0, 0, 0),
        };
        mpm_flag = code_flag(io, ctx::MPM_FLAG, mpm_flag)?;
        io.note(LumaIpmMpmFlag, mpm_flag as i32);
        if mpm_flag {
            mpm_idx = code_tr(io, mpm_idx as u32, 0, 2, |_, j| {
                BinMode::Regular(ctx::MPM_IDX + j as u16)
            })? as u8;
            io.note(LumaIpmMpmIdx, mpm_idx as i32);
        } else {
            rem = code_fl_bypass(io, rem as u32, 5)? as u8;
            io.note(LumaIpmRem, rem as i32);
        }
        // derived mode gets the shortest codeword
        let b = if chroma == 4 { 0 } else { chroma as u32 + 1 };
        let b = code_tr(io, b, 0, 4, |_, j| BinMode::Regular(ctx::CHROMA_IPM + j as u16))?;
        let chroma = if b == 0 { 4 } else { (b - 1) as u8 };
        io.note(ChromaIpm, chroma as i32);
        cu.pred = PredSyntax::Intra {
            mpm_flag,
            mpm_idx,
            rem,
            chroma,
        };
    } else {
        let is_merge = matches!(cu.pred, PredSyntax::Merge { .. });
        let merge = code_flag(io, ctx::MERGE_FLAG, is_merge)?;
        io.note(MergeFlag, merge as i32);
        if merge {
            let idx = match cu.pred {
                PredSyntax::Merge { idx } => idx,
                _ => 0,
            };
            let idx = code_fl_bypass(io, idx as u32, 3)?;
            if idx > 4 {
                return corrupt(format!("merge index {idx}"));
            }
            io.note(MergeIdx, idx as i32);
            cu.pred = PredSyntax::Merge { idx: idx as u8 };
        } else {
            let (ref_idx, mvd, mvp_idx) = match cu.pred {
                PredSyntax::Amvp {
                    ref_idx,
                    mvd,
                    mvp_idx,
                } => (ref_idx, mvd, mvp_idx),
                _ => (0, Mv::ZERO, 0),
            };
            let ref_idx = if fp.rn >= 2 {
                let k = ceil_log2(fp.rn);
                let r = code_eg(io, ref_idx as u32, k, mixed(|j| ctx::REF_IDX + j.min(3) as u16))?;
                if r >= fp.rn {
                    return corrupt(format!("reference index {r} with {} references", fp.rn));
                }
                io.note(RefFrmIdx, r as i32);
                r as u8
            } else {
                0
            };
            let x = code_mvd_component(io, mvd.x, (MvdValH, MvdSignH))?;
            let y = code_mvd_component(io, mvd.y, (MvdValV, MvdSignV))?;
            let mvp_idx = code_flag(io, ctx::MVP_IDX, mvp_idx == 1)? as u8;
            io.note(MvpIdx, mvp_idx as i32);
            cu.pred = PredSyntax::Amvp {
                ref_idx,
                mvd: Mv::new(x, y),
                mvp_idx,
            };
        }
    }

    let reading = io.is_reader();
    if reading {
        cu.tus.resize(fp.tu_count(), Vec::new());
    } else if cu.tus.len() != fp.tu_count() {
        return Err(Error::Contract("CU has the wrong number of TUs"));
    }
    for (t, levels) in cu.tus.iter_mut().enumerate() {
        let pc = (!fp.is_luma(t)) as u16;
        code_tu(io, levels, fp.tu, pc)?;
    }
    Ok(())
}

fn apply(t: &mut dyn ElementTransform, ctx: &CipherContext, kind: ElementKind, v: i32, param: u32) -> Result<i32> {
    let mut el = SyntaxElement::with_param(kind, v, param);
    t.transform(&mut el, ctx)?;
    Ok(el.value)
}

/// Runs every cipherable element of `cu` through `t` in coding order.
/// The same call encrypts (true → on-wire) or decrypts (on-wire → true),
/// depending on the transform's direction; the element structure it walks
/// is invariant under every level.
pub fn cipher_cu(cu: &mut CuSyntax, t: &mut dyn ElementTransform, c: &CipherContext) -> Result<()> {
    use ElementKind::*;
    if !c.roi {
        return Ok(());
    }
    cu.dqp = apply(t, c, DqpValue, cu.dqp, 0)?;
    match &mut cu.pred {
        PredSyntax::Intra {
            mpm_flag,
            mpm_idx,
            rem,
            chroma,
        } => {
            if *mpm_flag {
                *mpm_idx = apply(t, c, LumaIpmMpmIdx, *mpm_idx as i32, 0)? as u8;
            } else {
                *rem = apply(t, c, LumaIpmRem, *rem as i32, 0)? as u8;
            }
            *chroma = apply(t, c, ChromaIpm, *chroma as i32, 0)? as u8;
        }
        PredSyntax::Merge { idx } => *idx = apply(t, c, MergeIdx, *idx as i32, 0)? as u8,
        PredSyntax::Amvp {
            ref_idx,
            mvd,
            mvp_idx,
        } => {
            if c.rn >= 2 {
                *ref_idx = apply(t, c, RefFrmIdx, *ref_idx as i32, c.rn)? as u8;
            }
            for (comp, val, sign) in [(&mut mvd.x, MvdValH, MvdSignH), (&mut mvd.y, MvdValV, MvdSignV)] {
                let a = apply(t, c, val, comp.abs(), 0)?;
                let neg = if a != 0 {
                    apply(t, c, sign, (*comp < 0) as i32, 0)? == 1
                } else {
                    false
                };
                *comp = if neg { -a } else { a };
            }
            *mvp_idx = apply(t, c, MvpIdx, *mvp_idx as i32, 0)? as u8;
        }
    }
    for levels in cu.tus.iter_mut() {
        cipher_levels(levels, t, c)?;
    }
    Ok(())
}

fn cipher_levels(levels: &mut [i32], t: &mut dyn ElementTransform, c: &CipherContext) -> Result<()> {
    let order = coding_order(levels);
    if order.is_empty() {
        return Ok(());
    }
    let abs: Vec<u32> = order.iter().map(|&i| levels[i].unsigned_abs()).collect();
    let mut neg: Vec<bool> = order.iter().map(|&i| levels[i] < 0).collect();
    for n in neg.iter_mut() {
        *n = apply(t, c, ElementKind::CoefSign, *n as i32, 0)? == 1;
    }
    let bases = remaining_bases(&abs);
    let mut k = 0;
    for (j, &i) in order.iter().enumerate() {
        let a = match bases[j] {
            None => abs[j],
            Some(base) => {
                let r_in = abs[j] - base;
                let r_out = apply(t, c, ElementKind::CoefRemaining, r_in as i32, k)? as u32;
                // the suffix cipher never moves r >> k across the update
                // threshold, so either side yields the same Rice parameter
                debug_assert_eq!(rice_update(k, r_in), rice_update(k, r_out));
                k = rice_update(k, r_in);
                base + r_out
            }
        };
        levels[i] = if neg[j] { -(a as i32) } else { a as i32 };
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::{CipherSession, Direction, Identity, Level};
    use crate::codec::entropy::{Reader, Writer};
    use crate::keystream::MasterKey;
    use proptest::prelude::*;

    fn fp(inter: bool, tu: usize) -> FrameParams {
        FrameParams {
            inter,
            rn: 3,
            max_dqp: 6,
            tu,
            cu: 16,
        }
    }

    fn arb_levels(n: usize) -> impl Strategy<Value = Vec<i32>> {
        prop_oneof![
            Just(vec![0; n * n]),
            proptest::collection::vec(
                prop_oneof![6 => Just(0), 3 => -3i32..=3, 1 => -300i32..=300],
                n * n
            ),
        ]
    }

    fn arb_cu(inter: bool, tu: usize) -> impl Strategy<Value = CuSyntax> {
        let f = fp(inter, tu);
        let intra = (any::<bool>(), 0u8..3, 0u8..32, 0u8..5).prop_map(|(f, i, r, c)| {
            PredSyntax::Intra {
                mpm_flag: f,
                mpm_idx: if f { i } else { 0 },
                rem: if f { 0 } else { r },
                chroma: c,
            }
        });
        let pred = if inter {
            prop_oneof![
                intra.boxed(),
                (0u8..5).prop_map(|idx| PredSyntax::Merge { idx }).boxed(),
                (0u8..3, -40i32..40, -40i32..40, 0u8..2)
                    .prop_map(|(r, x, y, m)| PredSyntax::Amvp {
                        ref_idx: r,
                        mvd: Mv::new(x, y),
                        mvp_idx: m
                    })
                    .boxed(),
            ]
            .boxed()
        } else {
            intra.boxed()
        };
        (
            -6i32..=6,
            pred,
            proptest::collection::vec(arb_levels(tu), f.tu_count()),
        )
            .prop_map(|(dqp, pred, tus)| CuSyntax { dqp, pred, tus })
    }

    fn write(cus: &[CuSyntax], f: &FrameParams) -> Vec<u8> {
        let mut w = Writer::new(30);
        for cu in cus {
            code_cu(&mut w, &mut cu.clone(), f).unwrap();
        }
        w.finish().0
    }

    fn read(bytes: &[u8], n: usize, f: &FrameParams) -> Result<Vec<CuSyntax>> {
        let mut r = Reader::new(bytes, 30)?;
        let mut out = Vec::new();
        for _ in 0..n {
            let mut cu = CuSyntax::blank(f);
            code_cu(&mut r, &mut cu, f)?;
            out.push(cu);
        }
        r.finish()?;
        Ok(out)
    }

    fn session(level: Level, dir: Direction) -> CipherSession {
        CipherSession::for_frame(MasterKey([9; 16]), 77, 3, level, dir)
    }

    #[test]
    fn bases_follow_flag_rules() {
        assert_eq!(remaining_bases(&[1, 2, 5, 2]), vec![None, None, Some(2), Some(2)]);
        assert_eq!(remaining_bases(&[4, 3]), vec![Some(3), Some(2)]);
        let long = vec![1u32; 10];
        assert_eq!(remaining_bases(&long)[8..], [Some(1), Some(1)]);
    }

    #[test]
    fn rice_caps() {
        assert_eq!(rice_update(0, 2), 0);
        assert_eq!(rice_update(0, 3), 1);
        assert_eq!(rice_update(4, 1000), 4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn parse_round_trip((inter, tu, cus) in (any::<bool>(), prop_oneof![Just(4usize), Just(8)])
            .prop_flat_map(|(inter, tu)| {
                proptest::collection::vec(arb_cu(inter, tu), 1..4)
                    .prop_map(move |cus| (inter, tu, cus))
            })) {
            let f = fp(inter, tu);
            let bytes = write(&cus, &f);
            prop_assert_eq!(read(&bytes, cus.len(), &f).unwrap(), cus);
        }

        #[test]
        fn cipher_round_trip_and_basic_length(cu in arb_cu(true, 4), level_i in 0usize..3) {
            let f = fp(true, 4);
            let level = Level::ALL[level_i];
            let c = CipherContext { rn: f.rn, max_dqp: f.max_dqp, roi: true };
            let mut wire = cu.clone();
            cipher_cu(&mut wire, &mut session(level, Direction::Encrypt), &c).unwrap();
            let parsed = read(&write(std::slice::from_ref(&wire), &f), 1, &f).unwrap();
            prop_assert_eq!(&parsed[0], &wire);
            let mut back = wire.clone();
            cipher_cu(&mut back, &mut session(level, Direction::Decrypt), &c).unwrap();
            prop_assert_eq!(&back, &cu);
            if level == Level::Basic {
                let plain = write(std::slice::from_ref(&cu), &f);
                let enc = write(std::slice::from_ref(&wire), &f);
                prop_assert_eq!(plain.len(), enc.len());
            }
        }
    }

    #[test]
    fn identity_and_non_roi_are_no_ops() {
        let cu = CuSyntax {
            dqp: -2,
            pred: PredSyntax::Merge { idx: 3 },
            tus: vec![vec![0, 0, 3, 0, -1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1]; 24],
        };
        let mut a = cu.clone();
        cipher_cu(&mut a, &mut Identity, &CipherContext { rn: 1, max_dqp: 6, roi: true }).unwrap();
        assert_eq!(a, cu);
        let mut s = session(Level::Advanced, Direction::Encrypt);
        cipher_cu(&mut a, &mut s, &CipherContext { rn: 1, max_dqp: 6, roi: false }).unwrap();
        assert_eq!(a, cu);
        assert_eq!(s.draws(), 0);
    }

    #[test]
    fn rejects_damage() {
        let f = fp(false, 4);
        let cu = CuSyntax {
            dqp: 1,
            pred: PredSyntax::Intra {
                mpm_flag: false,
                mpm_idx: 0,
                rem: 7,
                chroma: 4,
            },
            tus: vec![vec![0; 16]; f.tu_count()],
        };
        let bytes = write(&[cu], &f);
        assert!(read(&bytes, 2, &f).is_err() || read(&bytes[..1], 1, &f).is_err());
    }
}
