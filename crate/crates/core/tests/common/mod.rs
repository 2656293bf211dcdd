//! Test-side oracles written independently of the library: plain integer
//! arithmetic modulo 2^s and in (ℤ/2^s)[θ]/(θ² + θ + 1), and Dirichlet sums.

#![allow(dead_code)]

use num_rational::BigRational;

/// Ring ℤ/2^s or (ℤ/2^s)[θ] with θ² = −θ − 1, elements as (a, b) = a + bθ.
#[derive(Clone, Copy)]
pub struct Ring {
    pub bits: u32,
    pub galois: bool,
}

impl Ring {
    fn mask(&self) -> u64 {
        (1u64 << self.bits) - 1
    }
    pub fn size(&self) -> u64 {
        if self.galois {
            1 << (2 * self.bits)
        } else {
            1 << self.bits
        }
    }
    pub fn elem(&self, i: u64) -> (u64, u64) {
        if self.galois {
            (i & self.mask(), i >> self.bits)
        } else {
            (i, 0)
        }
    }
    pub fn add(&self, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        ((x.0 + y.0) & self.mask(), (x.1 + y.1) & self.mask())
    }
    pub fn mul(&self, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        let m = self.mask();
        // (a + bθ)(c + dθ) = ac − bd + (ad + bc − bd)θ
        let bd = x.1.wrapping_mul(y.1);
        (
            x.0.wrapping_mul(y.0).wrapping_sub(bd) & m,
            x.0.wrapping_mul(y.1).wrapping_add(x.1.wrapping_mul(y.0)).wrapping_sub(bd) & m,
        )
    }
    pub fn int(&self, c: i64) -> (u64, u64) {
        ((c as u64) & self.mask(), 0)
    }
}

/// meas{x ∈ 𝔬^n : Σ c_i x_i² ≡ ρ mod 2^{ℓ+1}} by full enumeration over an
/// unramified dyadic ring (q = 2 or 4).
pub fn brute_level(galois: bool, coeffs: &[(u64, u64)], rho: (u64, u64), ell: u32) -> BigRational {
    let r = Ring { bits: ell + 1, galois };
    let size = r.size();
    let squares: Vec<(u64, u64)> = (0..size).map(|i| r.mul(r.elem(i), r.elem(i))).collect();
    let mut hits: u64 = 0;
    let mut idx = vec![0u64; coeffs.len()];
    loop {
        let mut acc = (0, 0);
        for (c, &i) in coeffs.iter().zip(&idx) {
            acc = r.add(acc, r.mul(*c, squares[i as usize]));
        }
        if acc == (rho.0 & r.mask(), rho.1 & r.mask()) {
            hits += 1;
        }
        let mut j = 0;
        loop {
            if j == idx.len() {
                let total = num_bigint::BigInt::from(size).pow(coeffs.len() as u32);
                return BigRational::new(hits.into(), total);
            }
            idx[j] += 1;
            if idx[j] < size {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// Σ_{m odd ≤ N} m^{-s} and a bound on the omitted tail.
pub fn odd_zeta(s: u32, n: u64) -> (f64, f64) {
    let mut acc = 0.0;
    let mut m = if n.is_multiple_of(2) { n - 1 } else { n };
    while m >= 1 {
        acc += (m as f64).powi(-(s as i32));
        if m == 1 {
            break;
        }
        m -= 2;
    }
    let tail = (n as f64).powf(1.0 - s as f64) / (s as f64 - 1.0);
    (acc, tail)
}

/// ζ(s1)ζ(s2)/ζ(s3) with the factors at 2 removed, from Dirichlet partial
/// sums, and an absolute error bound.
pub fn odd_zeta_ratio(s1: u32, s2: u32, s3: u32, n: u64) -> (f64, f64) {
    let (a, ea) = odd_zeta(s1, n);
    let (b, eb) = odd_zeta(s2, n);
    let (c, ec) = odd_zeta(s3, n);
    let v = a * b / c;
    let rel = ea / a + eb / b + ec / c;
    (v, v.abs() * (2.0 * rel + 1e-13))
}
