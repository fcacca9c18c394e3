//! Exhaustive inversion oracles for every reversible piece of the pipeline.
//!
//! Each oracle counts cases and failures and never panics, so a broken
//! build still yields a full pass matrix. [`Fault`] swaps one inverse for a
//! deliberately wrong one to show that the matrix catches it.

use std::fmt;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::bitstream::{
    eg_decode, eg_encode, encode_bins, fl_decode, fl_encode, slice_reader, tr_decode, tr_encode,
    Bin, BinMode, ContextModel,
};
use crate::cipher::*;
use crate::keystream::{ChaoticParams, MasterKey};
use crate::scramble::{
    chaotic_permutation, embed_flag, extract_flag, scramble, unscramble, Permutation,
};

/// Deliberate defects for checking that the self-test detects them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Decrypt merge indices with the encryption map.
    EncMergeIdx,
    /// Off-by-one in flag extraction.
    ExtractFlag,
    /// Skip the inverse permutation.
    PermutationInverse,
}

impl Fault {
    pub const ALL: [Fault; 3] = [Fault::EncMergeIdx, Fault::ExtractFlag, Fault::PermutationInverse];

    pub fn name(self) -> &'static str {
        match self {
            Fault::EncMergeIdx => "enc_merge_idx",
            Fault::ExtractFlag => "extract_flag",
            Fault::PermutationInverse => "permutation_inverse",
        }
    }

    pub fn parse(s: &str) -> Option<Fault> {
        Fault::ALL.into_iter().find(|f| f.name() == s)
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub name: &'static str,
    pub cases: u64,
    pub failures: u64,
    /// First failing case, for diagnostics.
    pub first_failure: Option<String>,
    pub elapsed: Duration,
}

impl OracleResult {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

impl fmt::Display for OracleResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<22} {:<4} {:>10} cases {:>8} failed {:>8.2?}",
            self.name,
            if self.passed() { "PASS" } else { "FAIL" },
            self.cases,
            self.failures,
            self.elapsed
        )?;
        if let Some(c) = &self.first_failure {
            write!(f, "  first: {c}")?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct Tally {
    cases: u64,
    failures: u64,
    first: Option<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, case: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(case());
            }
        }
    }
}

fn timed(name: &'static str, body: impl FnOnce(&mut Tally)) -> OracleResult {
    let t = Instant::now();
    let mut tally = Tally::default();
    body(&mut tally);
    OracleResult {
        name,
        cases: tally.cases,
        failures: tally.failures,
        first_failure: tally.first,
        elapsed: t.elapsed(),
    }
}

fn eg_oracle(t: &mut Tally) {
    for k in 0..=3 {
        for v in 0..=1u32 << 16 {
            let ok = eg_encode(v, k).and_then(|cw| {
                let mut used = 0;
                let mut it = cw.bits.iter();
                let d = eg_decode(k, |_, _| {
                    used += 1;
                    Ok(*it.next().unwrap_or(&false))
                })?;
                Ok(d == v && used == cw.len())
            });
            t.check(matches!(ok, Ok(true)), || format!("EG{k} v={v}"));
        }
    }
}

fn tr_oracle(t: &mut Tally) {
    for k in 0..=4 {
        for c_max in 0..=256u32 {
            for v in 0..=c_max {
                let ok = tr_encode(v, k, c_max).and_then(|cw| {
                    let d = tr_decode(k, c_max, slice_reader(&cw.bits))?;
                    Ok(d == v)
                });
                t.check(matches!(ok, Ok(true)), || format!("TR{k} cMax={c_max} v={v}"));
            }
        }
    }
}

fn fl_oracle(t: &mut Tally) {
    for n in 1..=16u32 {
        for v in 0..1u32 << n {
            let ok = fl_encode(v, n)
                .and_then(|cw| Ok(cw.len() == n as usize && fl_decode(n, slice_reader(&cw.bits))? == v));
            t.check(matches!(ok, Ok(true)), || format!("FL{n} v={v}"));
        }
    }
}

fn element_oracle(t: &mut Tally, fault: Option<Fault>) {
    let dec_merge = |v, s| {
        if fault == Some(Fault::EncMergeIdx) {
            enc_merge_idx(v, s)
        } else {
            dec_merge_idx(v, s)
        }
    };
    type Pair = (&'static str, fn(u32, u32) -> u32, fn(u32, u32) -> u32, u32);
    let bit_pairs: [Pair; 4] = [
        ("mvd_sign", enc_mvd_sign, enc_mvd_sign, 2),
        ("coef_sign", enc_coef_sign, enc_coef_sign, 2),
        ("dqp_sign", enc_dqp_sign, enc_dqp_sign, 2),
        ("mvp_idx", enc_mvp_idx, enc_mvp_idx, 2),
    ];
    let mod_pairs: [Pair; 3] = [
        ("mpm_idx", enc_mpm_idx, dec_mpm_idx, 3),
        ("chroma_ipm", enc_chroma_ipm, dec_chroma_ipm, 5),
        ("luma_ipm_rem", enc_luma_ipm_rem, enc_luma_ipm_rem, 32),
    ];
    for (name, enc, dec, m) in bit_pairs.into_iter().chain(mod_pairs) {
        for v in 0..m {
            for s in 0..m {
                let e = enc(v, s);
                t.check(e < m && dec(e, s) == v, || format!("{name} v={v} s={s}"));
            }
        }
    }
    for v in 0..5 {
        for s in 0..5 {
            let e = enc_merge_idx(v, s);
            t.check(e < 5 && dec_merge(e, s) == v, || format!("merge_idx v={v} s={s}"));
        }
    }
    for rn in 0..=4u32 {
        let m = ref_idx_modulus(rn);
        let alphabet = rn.max(1);
        for v in 0..alphabet {
            for s in 0..m {
                let e = enc_ref_idx(v, rn, s);
                t.check(e < alphabet && dec_ref_idx(e, rn, s) == v, || {
                    format!("ref_idx rn={rn} v={v} s={s}")
                });
            }
        }
    }
    for max in 1..=26u32 {
        let m = 2 * max + 1;
        for d in -(max as i32)..=max as i32 {
            for s in 0..m {
                let e = enc_dqp_value(d, max, s);
                t.check(
                    e.unsigned_abs() <= max && dec_dqp_value(e, max, s) == d,
                    || format!("dqp_value max={max} d={d} s={s}"),
                );
            }
        }
    }
    // Bypass-suffix ciphers: every key of the exact suffix width.
    for abs in 0..1024u32 {
        let n = mvd_suffix_len(abs);
        for s in 0..1u128 << n {
            let ok = enc_mvd_suffix(abs, s).and_then(|e| {
                Ok(mvd_suffix_len(e) == n && enc_mvd_suffix(e, s)? == abs)
            });
            t.check(matches!(ok, Ok(true)), || format!("mvd_suffix abs={abs} s={s}"));
        }
    }
    for k in 0..=4u32 {
        for r in 0..512u32 {
            let Ok(n) = coef_rem_suffix_len(r, k) else {
                t.check(false, || format!("coef_suffix k={k} r={r}: length"));
                continue;
            };
            for s in 0..1u128 << n {
                let ok = enc_coef_suffix(r, k, s).and_then(|e| {
                    Ok(coef_rem_suffix_len(e, k)? == n && enc_coef_suffix(e, k, s)? == r)
                });
                t.check(matches!(ok, Ok(true)), || format!("coef_suffix k={k} r={r} s={s}"));
            }
        }
    }
}

fn embed_oracle(t: &mut Tally, fault: Option<Fault>) {
    for last in -(1i32 << 15)..=1 << 15 {
        if last == 0 {
            continue;
        }
        for w in [false, true] {
            let got = embed_flag(last, w).and_then(extract_flag).map(|(l, f)| {
                if fault == Some(Fault::ExtractFlag) {
                    (l + 1, f)
                } else {
                    (l, f)
                }
            });
            t.check(matches!(got, Ok((l, f)) if l == last && f == w), || {
                format!("embed last={last} w={w}")
            });
        }
    }
}

fn inverse_of(p: &Permutation, fault: Option<Fault>) -> Permutation {
    if fault == Some(Fault::PermutationInverse) {
        p.clone()
    } else {
        p.inverse()
    }
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    // Heap's algorithm.
    let mut c = vec![0; n];
    out.push(cur.clone());
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                cur.swap(0, i);
            } else {
                cur.swap(c[i], i);
            }
            out.push(cur.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

fn permutation_oracle(t: &mut Tally, fault: Option<Fault>) {
    for n in 0..=8usize {
        let vals: Vec<usize> = (0..n).map(|i| 100 + i).collect();
        for map in all_permutations(n) {
            let Ok(p) = Permutation::from_vec(map.clone()) else {
                t.check(false, || format!("from_vec {map:?}"));
                continue;
            };
            let back = inverse_of(&p, fault).apply(&p.apply(&vals));
            t.check(back == vals, || format!("permutation {map:?}"));
        }
    }
    let mut rng = StdRng::seed_from_u64(0x5e1f);
    for i in 0..10_000u64 {
        let n = rng.random_range(9..=64usize);
        let key = MasterKey(rng.random());
        let params = ChaoticParams::for_unit(key, rng.random(), i % 64, rng.random_range(0..1 << 20));
        let p = chaotic_permutation(n, params);
        let vals: Vec<i32> = (0..n).map(|_| rng.random_range(-500..=500)).collect();
        let back = inverse_of(&p, fault).apply(&p.apply(&vals));
        let mut tu: Vec<i32> = (0..n + 1).map(|_| rng.random_range(-40..=40)).collect();
        *tu.last_mut().unwrap() = rng.random_range(1..=40);
        let orig = tu.clone();
        let edge = rng.random();
        let ok = scramble(&mut tu, edge, params).is_ok()
            && matches!(unscramble(&mut tu, params), Ok(w) if w == edge)
            && tu == orig;
        t.check(back == vals && ok, || format!("chaotic n={n} case {i}"));
    }
}

/// Flipping bypass bins never changes the coded length.
pub fn bypass_length_oracle(trials: u64, seed: u64) -> OracleResult {
    timed("bypass_length", |t| {
        let mut rng = StdRng::seed_from_u64(seed);
        for trial in 0..trials {
            let n = rng.random_range(1..=400);
            let ctxs = rng.random_range(1..=16u16);
            let bins: Vec<Bin> = (0..n)
                .map(|_| Bin {
                    value: rng.random(),
                    mode: if rng.random_bool(0.5) {
                        BinMode::Bypass
                    } else {
                        BinMode::Regular(rng.random_range(0..ctxs))
                    },
                })
                .collect();
            let flipped: Vec<Bin> = bins
                .iter()
                .map(|b| match b.mode {
                    BinMode::Bypass if rng.random() => Bin { value: !b.value, ..*b },
                    _ => *b,
                })
                .collect();
            let a = encode_bins(&bins, &mut ContextModel::uniform(ctxs as usize));
            let b = encode_bins(&flipped, &mut ContextModel::uniform(ctxs as usize));
            let ok = matches!((&a, &b), (Ok(a), Ok(b)) if a.bit_len == b.bit_len && a.bytes.len() == b.bytes.len());
            t.check(ok, || format!("trial {trial}"));
        }
    })
}

/// Runs every oracle, in parallel across oracles.
pub fn run(fault: Option<Fault>) -> Vec<OracleResult> {
    type Job = Box<dyn Fn() -> OracleResult + Send + Sync>;
    let jobs: Vec<Job> = vec![
        Box::new(|| timed("eg_k", eg_oracle)),
        Box::new(|| timed("tr_k", tr_oracle)),
        Box::new(|| timed("fl", fl_oracle)),
        Box::new(move || timed("element_ciphers", |t| element_oracle(t, fault))),
        Box::new(move || timed("embed_extract", |t| embed_oracle(t, fault))),
        Box::new(move || timed("permutation", |t| permutation_oracle(t, fault))),
        Box::new(|| bypass_length_oracle(10_000, 0xb1a5)),
    ];
    use rayon::prelude::*;
    jobs.par_iter().map(|j| j()).collect()
}
