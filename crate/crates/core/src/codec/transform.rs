//! Integer DCT-II (HEVC basis matrices), scalar quantization and the
//! diagonal up-right coefficient scan.

const M4: [[i64; 4]; 4] = [
    [64, 64, 64, 64],
    [83, 36, -36, -83],
    [64, -64, -64, 64],
    [36, -83, 83, -36],
];

const M8: [[i64; 8]; 8] = [
    [64, 64, 64, 64, 64, 64, 64, 64],
    [89, 75, 50, 18, -18, -50, -75, -89],
    [83, 36, -36, -83, -83, -36, 36, 83],
    [75, -18, -89, -50, 50, 89, 18, -75],
    [64, -64, -64, 64, 64, -64, -64, 64],
    [50, -89, 18, 75, -75, -18, 89, -50],
    [36, -83, 83, -36, -36, 83, -83, 36],
    [18, -50, 75, -89, 89, -75, 50, -18],
];

fn basis(n: usize, u: usize, x: usize) -> i64 {
    match n {
        4 => M4[u][x],
        8 => M8[u][x],
        _ => panic!("unsupported transform size {n}"),
    }
}

pub fn qstep(qp: i32) -> f64 {
    2f64.powf((qp - 4) as f64 / 6.0)
}

fn round_half_away(v: f64) -> i64 {
    // f64::round already rounds half away from zero
    v.round() as i64
}

/// Forward transform of an `n`×`n` row-major residual: Y = M X Mᵀ.
pub fn forward(residual: &[i32], n: usize) -> Vec<i64> {
    assert_eq!(residual.len(), n * n);
    // T = M X
    let mut t = vec![0i64; n * n];
    for u in 0..n {
        for x in 0..n {
            t[u * n + x] = (0..n).map(|y| basis(n, u, y) * residual[y * n + x] as i64).sum();
        }
    }
    let mut out = vec![0i64; n * n];
    for u in 0..n {
        for v in 0..n {
            out[u * n + v] = (0..n).map(|x| t[u * n + x] * basis(n, v, x)).sum();
        }
    }
    out
}

/// Quantized levels in raster (frequency) order.
pub fn quantize(coeffs: &[i64], n: usize, qp: i32) -> Vec<i32> {
    let scale = 4096.0 * n as f64 * qstep(qp);
    coeffs
        .iter()
        .map(|&c| round_half_away(c as f64 / scale).clamp(-(1 << 20), 1 << 20) as i32)
        .collect()
}

/// Dequantizes and inverse-transforms raster-order levels back to a residual.
pub fn dequantize_inverse(levels: &[i32], n: usize, qp: i32) -> Vec<i32> {
    assert_eq!(levels.len(), n * n);
    if levels.iter().all(|&l| l == 0) {
        return vec![0; n * n];
    }
    let q = qstep(qp);
    let c: Vec<f64> = levels.iter().map(|&l| l as f64 * q).collect();
    // T = Mᵀ C
    let mut t = vec![0f64; n * n];
    for y in 0..n {
        for v in 0..n {
            t[y * n + v] = (0..n).map(|u| basis(n, u, y) as f64 * c[u * n + v]).sum();
        }
    }
    let norm = 4096.0 * n as f64;
    let mut out = vec![0i32; n * n];
    for y in 0..n {
        for x in 0..n {
            let s: f64 = (0..n).map(|v| t[y * n + v] * basis(n, v, x) as f64).sum();
            out[y * n + x] = round_half_away(s / norm).clamp(-(1 << 16), 1 << 16) as i32;
        }
    }
    out
}

/// Raster positions in diagonal up-right order: each anti-diagonal is
/// walked from its bottom-left end to its top-right end.
pub fn diag_scan(n: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(n * n);
    for d in 0..(2 * n - 1) {
        let y_hi = d.min(n - 1);
        let y_lo = d.saturating_sub(n - 1);
        for y in (y_lo..=y_hi).rev() {
            order.push(y * n + (d - y));
        }
    }
    order
}

pub fn to_scan(raster: &[i32], scan: &[usize]) -> Vec<i32> {
    scan.iter().map(|&p| raster[p]).collect()
}

pub fn from_scan(scanned: &[i32], scan: &[usize]) -> Vec<i32> {
    let mut r = vec![0; scanned.len()];
    for (i, &p) in scan.iter().enumerate() {
        r[p] = scanned[i];
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn float_dct(x: &[i32], n: usize) -> Vec<f64> {
        let a = |k: usize| if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
        let pi = std::f64::consts::PI;
        let mut out = vec![0.0; n * n];
        for u in 0..n {
            for v in 0..n {
                let mut s = 0.0;
                for y in 0..n {
                    for xx in 0..n {
                        s += x[y * n + xx] as f64
                            * ((2 * y + 1) as f64 * u as f64 * pi / (2 * n) as f64).cos()
                            * ((2 * xx + 1) as f64 * v as f64 * pi / (2 * n) as f64).cos();
                    }
                }
                out[u * n + v] = a(u) * a(v) * s;
            }
        }
        out
    }

    fn float_idct(c: &[f64], n: usize) -> Vec<i32> {
        let a = |k: usize| if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
        let pi = std::f64::consts::PI;
        let mut out = vec![0; n * n];
        for y in 0..n {
            for x in 0..n {
                let mut s = 0.0;
                for u in 0..n {
                    for v in 0..n {
                        s += a(u) * a(v) * c[u * n + v]
                            * ((2 * y + 1) as f64 * u as f64 * pi / (2 * n) as f64).cos()
                            * ((2 * x + 1) as f64 * v as f64 * pi / (2 * n) as f64).cos();
                    }
                }
                out[y * n + x] = s.round() as i32;
            }
        }
        out
    }

    #[test]
    fn zero_and_constant_residuals() {
        for n in [4, 8] {
            let z = quantize(&forward(&vec![0; n * n], n), n, 22);
            assert!(z.iter().all(|&c| c == 0));
            let c = quantize(&forward(&vec![40; n * n], n), n, 10);
            assert_ne!(c[0], 0);
            assert!(c[1..].iter().all(|&v| v == 0), "{c:?}");
        }
    }

    #[test]
    fn qstep_anchor() {
        assert_eq!(qstep(4), 1.0);
        assert!((qstep(10) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn scan_examples() {
        assert_eq!(diag_scan(4)[..6], [0, 4, 1, 8, 5, 2]);
        for n in [4, 8] {
            let mut s = diag_scan(n);
            s.sort();
            assert_eq!(s, (0..n * n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn forward_tracks_float_dct() {
        let mut s = 1u32;
        for _ in 0..50 {
            for n in [4, 8] {
                let x: Vec<i32> = (0..n * n)
                    .map(|_| {
                        s = s.wrapping_mul(1103515245).wrapping_add(12345);
                        (s >> 16) as i32 % 511 - 255
                    })
                    .collect();
                let fy = float_dct(&x, n);
                let iy = forward(&x, n);
                for (a, b) in fy.iter().zip(&iy) {
                    let scaled = *b as f64 / (4096.0 * n as f64);
                    assert!((a - scaled).abs() < 0.02 * 255.0 * n as f64, "{a} vs {scaled}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn qp4_round_trip_matches_float_pipeline(x in proptest::collection::vec(-255i32..=255, 16)) {
            let lv = quantize(&forward(&x, 4), 4, 4);
            let rec = dequantize_inverse(&lv, 4, 4);
            let oracle: Vec<f64> = float_dct(&x, 4).iter().map(|c| c.round()).collect();
            let orec = float_idct(&oracle, 4);
            // the integer basis is only approximately orthonormal, so allow a
            // few units of drift against the exact transform at full swing
            for i in 0..16 {
                prop_assert!((rec[i] - orec[i]).abs() <= 3, "{:?} vs {:?}", rec, orec);
            }
        }

        #[test]
        fn scan_round_trip(v in proptest::collection::vec(any::<i32>(), 64)) {
            let s = diag_scan(8);
            prop_assert_eq!(from_scan(&to_scan(&v, &s), &s), v);
        }
    }
}
