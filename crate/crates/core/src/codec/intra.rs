//! 35-mode intra prediction (planar, DC, 33 angular) without reference
//! smoothing or boundary filters, plus MPM and chroma-mode derivation.

pub const PLANAR: u8 = 0;
pub const DC: u8 = 1;
pub const HORIZONTAL: u8 = 10;
pub const VERTICAL: u8 = 26;
pub const NUM_MODES: u8 = 35;

const ANGLE: [i32; 35] = [
    0, 0, 32, 26, 21, 17, 13, 9, 5, 2, 0, -2, -5, -9, -13, -17, -21, -26, -32, -26, -21, -17, -13,
    -9, -5, -2, 0, 2, 5, 9, 13, 17, 21, 26, 32,
];

fn inv_angle(mode: u8) -> i32 {
    match ANGLE[mode as usize] {
        -2 => -4096,
        -5 => -1638,
        -9 => -910,
        -13 => -630,
        -17 => -482,
        -21 => -390,
        -26 => -315,
        -32 => -256,
        _ => 0,
    }
}

/// Reference samples of an `n`×`n` block. `top[0]` and `left[0]` both hold
/// the corner; `top[1 + i]` is the sample above column `i` (i < 2n) and
/// `left[1 + j]` the sample left of row `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefSamples {
    pub n: usize,
    pub top: Vec<i32>,
    pub left: Vec<i32>,
}

impl RefSamples {
    pub fn uniform(n: usize, v: i32) -> Self {
        RefSamples {
            n,
            top: vec![v; 2 * n + 1],
            left: vec![v; 2 * n + 1],
        }
    }

    /// Gathers neighbours of the block at (`x0`, `y0`). `sample` returns
    /// `None` for positions that are outside the frame, outside the tile or
    /// not yet reconstructed. Missing samples are substituted by walking from
    /// the bottom-left end to the top-right end; 128 if none exist.
    pub fn gather(
        n: usize,
        x0: isize,
        y0: isize,
        sample: impl Fn(isize, isize) -> Option<u8>,
    ) -> Self {
        let len = 4 * n + 1;
        // linear order: left column bottom-up, corner, top row left-right
        let pos = |i: usize| -> (isize, isize) {
            if i < 2 * n {
                (x0 - 1, y0 + (2 * n - 1 - i) as isize)
            } else if i == 2 * n {
                (x0 - 1, y0 - 1)
            } else {
                (x0 + (i - 2 * n - 1) as isize, y0 - 1)
            }
        };
        let raw: Vec<Option<i32>> = (0..len)
            .map(|i| {
                let (x, y) = pos(i);
                sample(x, y).map(i32::from)
            })
            .collect();
        let mut lin = vec![0i32; len];
        match raw.iter().position(|s| s.is_some()) {
            None => lin.fill(128),
            Some(first) => {
                let mut prev = raw[first].unwrap();
                for i in 0..len {
                    if let Some(v) = raw[i] {
                        prev = v;
                    }
                    lin[i] = if i < first { raw[first].unwrap() } else { prev };
                }
            }
        }
        let mut top = vec![0; 2 * n + 1];
        let mut left = vec![0; 2 * n + 1];
        top[0] = lin[2 * n];
        left[0] = lin[2 * n];
        for j in 0..2 * n {
            left[1 + j] = lin[2 * n - 1 - j];
            top[1 + j] = lin[2 * n + 1 + j];
        }
        RefSamples { n, top, left }
    }
}

/// Predicted `n`×`n` block, row-major.
pub fn predict(refs: &RefSamples, mode: u8) -> Vec<i32> {
    let n = refs.n;
    let shift = n.trailing_zeros() + 1;
    let mut out = vec![0i32; n * n];
    match mode {
        PLANAR => {
            let tr = refs.top[n + 1];
            let bl = refs.left[n + 1];
            for y in 0..n {
                for x in 0..n {
                    let v = (n - 1 - x) as i32 * refs.left[1 + y]
                        + (x + 1) as i32 * tr
                        + (n - 1 - y) as i32 * refs.top[1 + x]
                        + (y + 1) as i32 * bl
                        + n as i32;
                    out[y * n + x] = v >> shift;
                }
            }
        }
        DC => {
            let s: i32 = refs.top[1..=n].iter().sum::<i32>() + refs.left[1..=n].iter().sum::<i32>();
            out.fill((s + n as i32) >> shift);
        }
        2..=34 => angular(refs, mode, &mut out),
        _ => panic!("intra mode {mode} out of range"),
    }
    out
}

fn angular(refs: &RefSamples, mode: u8, out: &mut [i32]) {
    let n = refs.n as i32;
    let angle = ANGLE[mode as usize];
    let vertical = mode >= 18;
    let (main, side) = if vertical {
        (&refs.top, &refs.left)
    } else {
        (&refs.left, &refs.top)
    };
    // r[n + k] = ref[k] for k in -n..=2n
    let mut r = vec![0i32; (3 * n + 1) as usize];
    for k in 0..=2 * n {
        r[(n + k) as usize] = main[k as usize];
    }
    if angle < 0 {
        let last = (n * angle) >> 5;
        if last < -1 {
            let inv = inv_angle(mode);
            for k in last..=-1 {
                r[(n + k) as usize] = side[((k * inv + 128) >> 8) as usize];
            }
        }
    }
    for j in 0..n {
        let pos = (j + 1) * angle;
        let idx = pos >> 5;
        let fact = pos & 31;
        for i in 0..n {
            let a = r[(n + i + idx + 1) as usize];
            let v = if fact != 0 {
                let b = r[(n + i + idx + 2) as usize];
                ((32 - fact) * a + fact * b + 16) >> 5
            } else {
                a
            };
            let (x, y) = if vertical { (i, j) } else { (j, i) };
            out[(y * n + x) as usize] = v;
        }
    }
}

/// Three distinct most-probable modes. Unavailable or non-intra neighbours
/// count as planar; duplicates are filled from planar, DC, vertical.
pub fn build_mpm_list(left: Option<u8>, above: Option<u8>) -> [u8; 3] {
    let a = left.unwrap_or(PLANAR);
    let b = above.unwrap_or(PLANAR);
    let fills = [PLANAR, DC, VERTICAL];
    if a != b {
        let c = *fills.iter().find(|&&m| m != a && m != b).unwrap();
        [a, b, c]
    } else {
        let mut rest = fills.iter().copied().filter(|&m| m != a);
        [a, rest.next().unwrap(), rest.next().unwrap()]
    }
}

/// Index of a non-MPM mode among the 32 remaining modes.
pub fn mode_to_rem(mode: u8, mpm: &[u8; 3]) -> Option<u8> {
    if mpm.contains(&mode) {
        return None;
    }
    Some(mode - mpm.iter().filter(|&&m| m < mode).count() as u8)
}

/// Inverse of [`mode_to_rem`]; total on 0..32.
pub fn rem_to_mode(rem: u8, mpm: &[u8; 3]) -> u8 {
    let mut sorted = *mpm;
    sorted.sort_unstable();
    let mut mode = rem;
    for m in sorted {
        if mode >= m {
            mode += 1;
        }
    }
    mode
}

pub const CHROMA_DM: u8 = 4;

/// The five chroma candidates for a given luma mode; index 4 is the
/// derived mode (copy of luma).
pub fn chroma_candidates(luma_mode: u8) -> [u8; 5] {
    let mut c = [PLANAR, VERTICAL, HORIZONTAL, DC, luma_mode];
    for m in c.iter_mut().take(4) {
        if *m == luma_mode {
            *m = 34;
        }
    }
    c
}
