//! AES-128-CTR keystream and bounded draws.
//!
//! Counter blocks are `nonce (8 bytes, BE) || counter (8 bytes, BE)`. The
//! element stream uses counters below 2^63; chaotic-map seeding uses the
//! upper half of the counter space so the two never share a block.

use aes::cipher::{generic_array::GenericArray, BlockEncrypt, KeyInit};
use aes::Aes128;

use crate::error::{Error, Result};

const CHAOS_DOMAIN: u64 = 1 << 63;
const CHAOS_TU_BITS: u32 = 28;

/// 128-bit master key.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct MasterKey(pub [u8; 16]);

impl std::fmt::Debug for MasterKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("MasterKey(..)")
    }
}

impl MasterKey {
    pub fn from_hex(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() != 32 || !s.is_ascii() {
            return Err(Error::Key(format!(
                "expected 32 hex characters, got {}",
                s.len()
            )));
        }
        let mut k = [0u8; 16];
        for (i, b) in k.iter_mut().enumerate() {
            *b = u8::from_str_radix(&s[2 * i..2 * i + 2], 16)
                .map_err(|_| Error::Key("not valid hex".into()))?;
        }
        Ok(MasterKey(k))
    }
}

/// Key, nonce and starting counter of one keystream session.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    pub key: MasterKey,
    pub nonce: u64,
    pub counter: u64,
}

impl StreamKey {
    pub fn new(key: MasterKey, nonce: u64) -> Self {
        StreamKey {
            key,
            nonce,
            counter: 0,
        }
    }
}

/// Single AES-128 block encryption.
pub fn aes_block(key: &[u8; 16], block: &[u8; 16]) -> [u8; 16] {
    let cipher = Aes128::new(GenericArray::from_slice(key));
    let mut b = GenericArray::clone_from_slice(block);
    cipher.encrypt_block(&mut b);
    b.into()
}

/// A source of uniformly random bits, consumed MSB first.
pub trait BitSource {
    /// Next `n` bits (1..=128) as an integer.
    fn next_bits(&mut self, n: u32) -> u128;
}

/// Uniform integer in `[0, m)` by rejection sampling on ceil(log2 m)-bit draws.
pub fn uniform_from<B: BitSource + ?Sized>(src: &mut B, m: u32) -> u32 {
    assert!((2..=1 << 16).contains(&m), "modulus {m} outside [2, 2^16]");
    let bits = 32 - (m - 1).leading_zeros();
    loop {
        let v = src.next_bits(bits) as u32;
        if v < m {
            return v;
        }
    }
}

pub struct KeystreamDrawer {
    cipher: Aes128,
    nonce: u64,
    next_counter: u64,
    limit: u64,
    buf: u128,
    avail: u32,
    blocks: u64,
}

impl KeystreamDrawer {
    /// Element-stream session.
    pub fn new(key: StreamKey) -> Self {
        assert!(key.counter < CHAOS_DOMAIN);
        Self::with_range(key.key, key.nonce, key.counter, CHAOS_DOMAIN)
    }

    fn with_range(key: MasterKey, nonce: u64, start: u64, limit: u64) -> Self {
        KeystreamDrawer {
            cipher: Aes128::new(GenericArray::from_slice(&key.0)),
            nonce,
            next_counter: start,
            limit,
            buf: 0,
            avail: 0,
            blocks: 0,
        }
    }

    fn refill(&mut self) {
        assert!(
            self.next_counter < self.limit,
            "keystream counter space exhausted"
        );
        let mut block = [0u8; 16];
        block[..8].copy_from_slice(&self.nonce.to_be_bytes());
        block[8..].copy_from_slice(&self.next_counter.to_be_bytes());
        let mut b = GenericArray::from(block);
        self.cipher.encrypt_block(&mut b);
        self.buf = u128::from_be_bytes(b.into());
        self.avail = 128;
        self.next_counter += 1;
        self.blocks += 1;
    }

    fn take(&mut self, n: u32) -> u128 {
        debug_assert!(n <= self.avail && n > 0);
        let v = if n == 128 {
            self.buf
        } else {
            self.buf >> (128 - n)
        };
        self.buf = if n == 128 { 0 } else { self.buf << n };
        self.avail -= n;
        v
    }

    pub fn next_uniform(&mut self, m: u32) -> u32 {
        uniform_from(self, m)
    }

    /// Drops the unread rest of the current block so the next draw starts on
    /// a fresh counter value.
    pub fn next_element(&mut self) {
        self.avail = 0;
        self.buf = 0;
    }

    /// Counter value the next refill will use.
    pub fn counter(&self) -> u64 {
        self.next_counter
    }

    pub fn blocks_used(&self) -> u64 {
        self.blocks
    }
}

impl BitSource for KeystreamDrawer {
    fn next_bits(&mut self, n: u32) -> u128 {
        assert!((1..=128).contains(&n));
        if self.avail >= n {
            return self.take(n);
        }
        let have = self.avail;
        let hi = if have > 0 { self.take(have) } else { 0 };
        self.refill();
        let rest = n - have;
        let lo = self.take(rest);
        if have == 0 {
            lo
        } else {
            (hi << rest) | lo
        }
    }
}

/// Logistic-map seed: initial value and control parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChaoticParams {
    pub x0: f64,
    pub r: f64,
}

const NUDGE: f64 = 1.0 / (1u64 << 20) as f64;
const TWO_52: f64 = (1u64 << 52) as f64;

impl ChaoticParams {
    pub fn derive<B: BitSource + ?Sized>(src: &mut B) -> Self {
        let x_raw = src.next_bits(52) as f64 / TWO_52;
        let r_raw = src.next_bits(52) as f64 / TWO_52;
        ChaoticParams {
            x0: Self::sanitize_x0(x_raw),
            r: 3.9 + 0.0999 * r_raw,
        }
    }

    /// Keeps x0 inside (ε, 1−ε) and off the map's fixed/periodic seeds.
    pub fn sanitize_x0(x: f64) -> f64 {
        let x = x.clamp(NUDGE, 1.0 - NUDGE);
        if x == 0.25 || x == 0.5 || x == 0.75 {
            x + NUDGE
        } else {
            x
        }
    }

    /// Parameters for one transform unit, seeded from its own counter block.
    pub fn for_unit(key: MasterKey, nonce: u64, frame: u64, unit: u64) -> Self {
        assert!(unit < 1 << CHAOS_TU_BITS && frame < 1 << (63 - CHAOS_TU_BITS));
        let ctr = CHAOS_DOMAIN | (frame << CHAOS_TU_BITS) | unit;
        let mut d = KeystreamDrawer::with_range(key, nonce, ctr, ctr + 1);
        Self::derive(&mut d)
    }
}

/// Whole-key chaotic parameters (first block of the chaotic domain).
pub fn derive_chaotic_params(key: MasterKey, nonce: u64) -> ChaoticParams {
    let mut d = KeystreamDrawer::with_range(key, nonce, CHAOS_DOMAIN, u64::MAX);
    ChaoticParams::derive(&mut d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    struct Scripted(Vec<u128>);

    impl BitSource for Scripted {
        fn next_bits(&mut self, _n: u32) -> u128 {
            self.0.remove(0)
        }
    }

    fn key(b: u8) -> MasterKey {
        MasterKey([b; 16])
    }

    #[test]
    fn fips197_known_answer() {
        let k: [u8; 16] = std::array::from_fn(|i| i as u8);
        let pt: [u8; 16] = std::array::from_fn(|i| (i as u8) * 0x11);
        let ct = aes_block(&k, &pt);
        assert_eq!(
            ct,
            [
                0x69, 0xc4, 0xe0, 0xd8, 0x6a, 0x7b, 0x04, 0x30, 0xd8, 0xcd, 0xb7, 0x80, 0x70, 0xb4,
                0xc5, 0x5a
            ]
        );
    }

    #[test]
    fn first_block_is_aes_of_counter_block() {
        let k = key(7);
        let mut d = KeystreamDrawer::new(StreamKey::new(k, 0x0102030405060708));
        let got = d.next_bits(128);
        let mut blk = [0u8; 16];
        blk[..8].copy_from_slice(&0x0102030405060708u64.to_be_bytes());
        assert_eq!(got, u128::from_be_bytes(aes_block(&k.0, &blk)));
        assert_eq!(d.counter(), 1);
    }

    #[test]
    fn deterministic_sessions() {
        let sk = StreamKey::new(key(3), 42);
        let mut a = KeystreamDrawer::new(sk);
        let mut b = KeystreamDrawer::new(sk);
        for n in [1, 7, 64, 128, 3, 100] {
            assert_eq!(a.next_bits(n), b.next_bits(n));
        }
    }

    #[test]
    fn split_reads_equal_one_read() {
        let sk = StreamKey::new(key(9), 1);
        let mut a = KeystreamDrawer::new(sk);
        let mut b = KeystreamDrawer::new(sk);
        let whole = a.next_bits(128) >> 28;
        let hi = b.next_bits(60);
        let lo = b.next_bits(40);
        assert_eq!(whole, (hi << 40) | lo);
    }

    #[test]
    fn reads_cross_block_boundaries() {
        let sk = StreamKey::new(key(4), 8);
        let mut a = KeystreamDrawer::new(sk);
        let b0 = a.next_bits(128);
        let b1 = a.next_bits(128);
        let mut b = KeystreamDrawer::new(sk);
        b.next_bits(100);
        let x = b.next_bits(60);
        let expect = ((b0 & ((1 << 28) - 1)) << 32) | (b1 >> 96);
        assert_eq!(x, expect);
        assert_eq!(b.counter(), 2);
    }

    #[test]
    fn next_element_advances_counter() {
        let mut d = KeystreamDrawer::new(StreamKey::new(key(1), 0));
        d.next_bits(1);
        d.next_element();
        d.next_bits(1);
        assert_eq!(d.counter(), 2);
        d.next_element();
        d.next_element();
        d.next_bits(3);
        assert_eq!(d.counter(), 3);
    }

    #[test]
    fn nonce_changes_output() {
        let mut rng = rand_chacha_like(11);
        for _ in 0..1000 {
            let k = MasterKey(rng.random());
            let n1: u64 = rng.random();
            let n2 = n1 ^ (1 << rng.random_range(0..64));
            let a = KeystreamDrawer::new(StreamKey::new(k, n1)).next_bits(128);
            let b = KeystreamDrawer::new(StreamKey::new(k, n2)).next_bits(128);
            assert_ne!(a, b);
        }
    }

    fn rand_chacha_like(seed: u64) -> rand::rngs::StdRng {
        rand::rngs::StdRng::seed_from_u64(seed)
    }

    #[test]
    fn uniform_rejection_rule() {
        let mut s = Scripted(vec![7, 2]);
        assert_eq!(uniform_from(&mut s, 5), 2);
        let mut s = Scripted(vec![1]);
        assert_eq!(uniform_from(&mut s, 2), 1);
    }

    #[test]
    fn uniform_m2_uses_one_bit() {
        let sk = StreamKey::new(key(5), 5);
        let mut a = KeystreamDrawer::new(sk);
        let mut b = KeystreamDrawer::new(sk);
        for _ in 0..200 {
            assert_eq!(a.next_uniform(2) as u128, b.next_bits(1));
        }
    }

    #[test]
    fn uniform_exact_over_all_prefixes() {
        // every 3-bit prefix pair either rejects or maps 1:1, so each residue
        // is hit by exactly the same number of two-draw prefixes
        for m in 2..=8u32 {
            let bits = 32 - (m - 1).leading_zeros();
            let mut hits = vec![0u32; m as usize];
            for a in 0..(1u128 << bits) {
                for b in 0..(1u128 << bits) {
                    let mut s = Scripted(vec![a, b, 0]);
                    let before = s.0.len();
                    let v = uniform_from(&mut s, m);
                    if before - s.0.len() <= 2 {
                        hits[v as usize] += 1;
                    }
                }
            }
            assert!(hits.iter().all(|&h| h == hits[0]), "m={m}: {hits:?}");
        }
    }

    #[test]
    fn uniform_chi_square_m5() {
        let mut d = KeystreamDrawer::new(StreamKey::new(key(0x5a), 77));
        let n = 1_000_000u32;
        let mut counts = [0f64; 5];
        for _ in 0..n {
            counts[d.next_uniform(5) as usize] += 1.0;
        }
        let e = n as f64 / 5.0;
        let chi2: f64 = counts.iter().map(|c| (c - e) * (c - e) / e).sum();
        // 4 degrees of freedom, p = 0.01 critical value
        assert!(chi2 < 13.277, "chi2 = {chi2}");
    }

    #[test]
    fn chaotic_params_reproducible_and_in_range() {
        let a = derive_chaotic_params(key(1), 9);
        let b = derive_chaotic_params(key(1), 9);
        assert_eq!(a, b);
        assert!(a.x0 > 0.0 && a.x0 < 1.0);
        assert!((3.9..4.0).contains(&a.r));
    }

    #[test]
    fn x0_exclusion_rule() {
        assert_eq!(ChaoticParams::sanitize_x0(0.5), 0.5 + NUDGE);
        assert_eq!(ChaoticParams::sanitize_x0(0.0), NUDGE);
        assert_eq!(ChaoticParams::sanitize_x0(1.0), 1.0 - NUDGE);
        let mut s = Scripted(vec![1u128 << 51, 0]);
        let p = ChaoticParams::derive(&mut s);
        assert_eq!(p.x0, 0.5 + NUDGE);
        assert_eq!(p.r, 3.9);
    }

    #[test]
    fn chaotic_params_distinct_across_keys() {
        let mut rng = rand_chacha_like(3);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..10_000 {
            let p = derive_chaotic_params(MasterKey(rng.random()), 0);
            assert!(seen.insert((p.x0.to_bits(), p.r.to_bits())));
        }
    }

    #[test]
    fn unit_params_differ_per_unit() {
        let k = key(2);
        let a = ChaoticParams::for_unit(k, 1, 0, 0);
        let b = ChaoticParams::for_unit(k, 1, 0, 1);
        let c = ChaoticParams::for_unit(k, 1, 1, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, ChaoticParams::for_unit(k, 1, 0, 0));
    }

    #[test]
    fn hex_keys() {
        let k = MasterKey::from_hex("000102030405060708090a0b0c0d0e0f").unwrap();
        assert_eq!(k.0[15], 15);
        assert!(MasterKey::from_hex("0001").is_err());
        assert!(MasterKey::from_hex("zz0102030405060708090a0b0c0d0e0f").is_err());
        assert_eq!(format!("{k:?}"), "MasterKey(..)");
    }
}
