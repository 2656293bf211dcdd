//! Exact level counts X_ℓ^B(ρ) = meas{x ∈ 𝔬ⁿ : B(x) ≡ ρ mod 2ϖ^ℓ}.
//!
//! The congruence lives in 𝔬/ϖ^s with s = ℓ + e, and the measure of a
//! residue class is q^{-ns}. Two kernels compute the same number: plain
//! enumeration of (𝔬/ϖ^s)ⁿ and convolution of per-block value histograms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::local_ring::{LocalField, RingElem};
use crate::qform::{is_anisotropic, DiagonalForm};

/// Size limits for the two kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountConfig {
    /// Maximum number of points enumerated by the naive kernel.
    pub enum_budget: u128,
    /// Maximum residue-ring size q^s for a histogram.
    pub hist_budget: u128,
}

impl Default for CountConfig {
    fn default() -> Self {
        CountConfig { enum_budget: 1 << 26, hist_budget: 1 << 24 }
    }
}

fn measure(k: &LocalField, count: u128, n: usize, s: u32) -> BigRational {
    let denom = num_traits::pow(BigInt::from(k.q()), n * s as usize);
    BigRational::new(BigInt::from(count), denom)
}

fn target(k: &LocalField, rho: &RingElem, s: u32) -> Result<RingElem> {
    if rho.level < s {
        return Err(Error::InsufficientLevel { need: s, have: rho.level });
    }
    Ok(k.reduce(rho, s))
}

fn check_width(k: &LocalField, n: usize, s: u32) -> Result<()> {
    let bits = (n as f64) * (s as f64) * (k.q() as f64).log2();
    if bits > 120.0 {
        return Err(Error::OutOfRange(format!("q^(ns) = 2^{bits:.0} overflows the count type")));
    }
    Ok(())
}

/// X_ℓ by enumerating every x ∈ (𝔬/ϖ^{ℓ+e})ⁿ and evaluating B(x).
pub fn count_level_naive(b: &DiagonalForm, rho: &RingElem, ell: u32) -> Result<BigRational> {
    count_level_naive_with(b, rho, ell, &CountConfig::default())
}

pub fn count_level_naive_with(
    b: &DiagonalForm,
    rho: &RingElem,
    ell: u32,
    cfg: &CountConfig,
) -> Result<BigRational> {
    let k = &b.field;
    let s = ell + k.e();
    let n = b.n();
    check_width(k, n, s)?;
    let size = k.size(s);
    let points = size.checked_pow(n as u32).unwrap_or(u128::MAX);
    if points > cfg.enum_budget {
        return Err(Error::BudgetExceeded { points, budget: cfg.enum_budget });
    }
    let rho = target(k, rho, s)?;
    let elems: Vec<RingElem> = k.residues(s).collect();
    let two = k.elem_at(2, s);
    // Row i lists a_i·x² for every x, so each point costs n additions.
    let terms: Vec<Vec<RingElem>> = b
        .coeffs
        .iter()
        .map(|a| {
            let a = k.reduce(a, s);
            elems.iter().map(|x| k.mul(&a, &k.square(x))).collect()
        })
        .collect();
    let planes = b.planes as usize;

    // Coordinates in order: diagonal ones, then (x, y) per plane.
    fn walk(
        k: &LocalField,
        elems: &[RingElem],
        terms: &[Vec<RingElem>],
        planes: usize,
        two: &RingElem,
        rho: &RingElem,
        acc: RingElem,
    ) -> u128 {
        if let Some((row, rest)) = terms.split_first() {
            if rest.is_empty() && planes == 0 {
                return row.iter().filter(|t| k.add(&acc, t) == *rho).count() as u128;
            }
            return row.iter().map(|t| walk(k, elems, rest, planes, two, rho, k.add(&acc, t))).sum();
        }
        if planes == 0 {
            return u128::from(acc == *rho);
        }
        let mut total = 0;
        for x in elems {
            let tx = k.mul(two, x);
            for y in elems {
                total += walk(k, elems, terms, planes - 1, two, rho, k.add(&acc, &k.mul(&tx, y)));
            }
        }
        total
    }

    let zero = k.zero(s);
    let count: u128 = if let Some((row, rest)) = terms.split_first() {
        row.par_iter().map(|t| walk(k, &elems, rest, planes, &two, &rho, *t)).sum()
    } else if planes > 0 {
        elems
            .par_iter()
            .map(|x| {
                let tx = k.mul(&two, x);
                elems
                    .iter()
                    .map(|y| walk(k, &elems, &[], planes - 1, &two, &rho, k.mul(&tx, y)))
                    .sum::<u128>()
            })
            .sum()
    } else {
        walk(k, &elems, &[], 0, &two, &rho, zero)
    };
    Ok(measure(k, count, n, s))
}

/// Histogram of a·x² over x ∈ 𝔬/ϖ^s.
fn square_histogram(k: &LocalField, a: &RingElem, s: u32) -> Vec<u128> {
    let a = k.reduce(a, s);
    let mut h = vec![0u128; k.size(s) as usize];
    for x in k.residues(s) {
        h[k.index(&k.mul(&a, &k.square(&x)))] += 1;
    }
    h
}

/// Histogram of 2xy over (x, y) ∈ (𝔬/ϖ^s)². For fixed x the values 2xy fill
/// the ideal 2x𝔬 uniformly, each hit q^{ord 2x} times.
fn plane_histogram(k: &LocalField, s: u32) -> Vec<u128> {
    let size = k.size(s) as usize;
    let q = k.q() as u128;
    let mut by_ord = vec![0u128; s as usize + 1];
    let two = k.elem_at(2, s);
    for x in k.residues(s) {
        let o = k.ord(&k.mul(&two, &x)).unwrap_or(s).min(s);
        by_ord[o as usize] += 1;
    }
    let mut weight = vec![0u128; s as usize + 1];
    let mut acc = 0u128;
    for (o, &c) in by_ord.iter().enumerate() {
        acc += c * q.pow(o as u32);
        weight[o] = acc;
    }
    (0..size)
        .map(|i| {
            let v = k.from_index(i, s);
            weight[k.ord(&v).unwrap_or(s).min(s) as usize]
        })
        .collect()
}

fn support(h: &[u128]) -> Vec<(usize, u128)> {
    h.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| (i, c)).collect()
}

/// Additive convolution of two histograms on 𝔬/ϖ^s.
fn convolve(k: &LocalField, s: u32, f: &[u128], g: &[u128]) -> Vec<u128> {
    let size = f.len();
    let sf = support(f);
    let sg: Vec<(RingElem, u128)> =
        support(g).into_iter().map(|(j, c)| (k.from_index(j, s), c)).collect();
    sf.par_chunks(256)
        .fold(
            || vec![0u128; size],
            |mut out, chunk| {
                for &(i, c) in chunk {
                    let xi = k.from_index(i, s);
                    for (v, d) in &sg {
                        out[k.index(&k.add(&xi, v))] += c * d;
                    }
                }
                out
            },
        )
        .reduce(
            || vec![0u128; size],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

fn convolve_all(k: &LocalField, s: u32, hs: &[Vec<u128>]) -> Vec<u128> {
    let mut acc = vec![0u128; k.size(s) as usize];
    acc[0] = 1;
    for h in hs {
        acc = convolve(k, s, &acc, h);
    }
    acc
}

/// Value distribution of B over (𝔬/ϖ^s)ⁿ split into two halves whose
/// convolution is taken only at the target.
fn block_histograms(b: &DiagonalForm, s: u32, cfg: &CountConfig) -> Result<Vec<Vec<u128>>> {
    let k = &b.field;
    let size = k.size(s);
    if size > cfg.hist_budget {
        return Err(Error::BudgetExceeded { points: size, budget: cfg.hist_budget });
    }
    let mut hs: Vec<Vec<u128>> = b.coeffs.iter().map(|a| square_histogram(k, a, s)).collect();
    if b.planes > 0 {
        let p = plane_histogram(k, s);
        hs.extend(std::iter::repeat_n(p, b.planes as usize));
    }
    hs.sort_by_key(|h| h.iter().filter(|&&c| c > 0).count());
    Ok(hs)
}

/// X_ℓ by histogram convolution, meeting in the middle at ρ.
pub fn count_level_histogram(b: &DiagonalForm, rho: &RingElem, ell: u32) -> Result<BigRational> {
    count_level_histogram_with(b, rho, ell, &CountConfig::default())
}

pub fn count_level_histogram_with(
    b: &DiagonalForm,
    rho: &RingElem,
    ell: u32,
    cfg: &CountConfig,
) -> Result<BigRational> {
    let k = &b.field;
    let s = ell + k.e();
    check_width(k, b.n(), s)?;
    let rho = target(k, rho, s)?;
    let hs = block_histograms(b, s, cfg)?;
    let half = hs.len() / 2;
    let left = convolve_all(k, s, &hs[..half]);
    let right = convolve_all(k, s, &hs[half..]);
    let mut count = 0u128;
    for (i, &c) in left.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let w = k.from_index(i, s);
        count += c * right[k.index(&k.sub(&rho, &w))];
    }
    Ok(measure(k, count, b.n(), s))
}

/// Coefficients X_0..X_L of Σ z^ℓ X_ℓ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    pub coeffs: Vec<BigRational>,
}

impl TruncatedSeries {
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    #[serde(rename = "L")]
    l: usize,
    coeffs: Vec<String>,
}

impl Serialize for TruncatedSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesRepr { l: self.order(), coeffs: self.coeffs.iter().map(|c| c.to_string()).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TruncatedSeries {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SeriesRepr::deserialize(d)?;
        let coeffs = r
            .coeffs
            .iter()
            .map(|c| c.parse::<BigRational>().map_err(serde::de::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if coeffs.len() != r.l + 1 {
            return Err(serde::de::Error::custom("L does not match the coefficient count"));
        }
        Ok(TruncatedSeries { coeffs })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesMode {
    /// Every level counted.
    Direct,
    /// Levels past the Hensel threshold extended by the stabilization laws;
    /// `verify` of the extended levels are recounted and compared.
    Stabilized { verify: u32 },
}

/// Last directly counted level: ord(2ρ) + 1, or e + 1 for ρ = 0.
pub fn direct_threshold(k: &LocalField, rho: &RingElem) -> u32 {
    match k.ord(rho) {
        Some(v) => v + k.e() + 1,
        None => k.e() + 1,
    }
}

pub fn x_series(b: &DiagonalForm, rho: &RingElem, order: u32, mode: SeriesMode) -> Result<TruncatedSeries> {
    x_series_with(b, rho, order, mode, &CountConfig::default())
}

pub fn x_series_with(
    b: &DiagonalForm,
    rho: &RingElem,
    order: u32,
    mode: SeriesMode,
    cfg: &CountConfig,
) -> Result<TruncatedSeries> {
    let k = &b.field;
    let count = |l: u32| count_level_histogram_with(b, rho, l, cfg);
    let verify = match mode {
        SeriesMode::Direct => {
            return Ok(TruncatedSeries { coeffs: (0..=order).map(count).collect::<Result<_>>()? })
        }
        SeriesMode::Stabilized { verify } => verify,
    };
    if !is_anisotropic(b)? {
        return Err(Error::Isotropic);
    }
    let top = direct_threshold(k, rho).min(order);
    let mut coeffs: Vec<BigRational> = (0..=top).map(count).collect::<Result<_>>()?;
    let inv_q = BigRational::new(BigInt::one(), BigInt::from(k.q()));
    let inv_qn = num_traits::pow(inv_q.clone(), b.n());
    let zero_target = k.is_zero(rho);
    for l in top + 1..=order {
        let next = if zero_target {
            &coeffs[l as usize - 2] * &inv_qn
        } else {
            &coeffs[l as usize - 1] * &inv_q
        };
        coeffs.push(next);
    }
    for l in top + 1..=order.min(top + verify) {
        let direct = count(l)?;
        if direct != coeffs[l as usize] {
            return Err(Error::Internal(format!(
                "stabilized X_{l} = {} but direct count gives {direct}",
                coeffs[l as usize]
            )));
        }
    }
    Ok(TruncatedSeries { coeffs })
}

/// Σ_{T ≤ T_max} a^T X(β; ϖ^{2T}) truncated at z-order L.
pub fn pi_truncated(
    b: &DiagonalForm,
    a_value: &BigRational,
    order: u32,
    t_max: u32,
) -> Result<TruncatedSeries> {
    let k = &b.field;
    let mut coeffs = vec![BigRational::zero(); order as usize + 1];
    let mut weight = BigRational::one();
    for t in 0..=t_max {
        let rho = k.uniformizer_pow(2 * t);
        let x = x_series(b, &rho, order, SeriesMode::Stabilized { verify: 0 })?;
        for (c, x) in coeffs.iter_mut().zip(&x.coeffs) {
            *c += &weight * x;
        }
        weight *= a_value;
    }
    Ok(TruncatedSeries { coeffs })
}

/// meas{(x, y) ∈ 𝔬² : ux² + xy + vy² + Bx + Ay + D ≡ 0 mod 2^ℓ}, by
/// enumeration over 𝔬/2^ℓ (unramified fields).
pub fn conic_measure(k: &LocalField, coeffs: [&RingElem; 5], ell: u32) -> Result<BigRational> {
    if !k.is_unramified() || !k.is_dyadic() {
        return Err(Error::Unsupported("conic counting needs an unramified dyadic field".into()));
    }
    let [u, v, bb, aa, d] = coeffs.map(|c| k.reduce(c, ell));
    let elems: Vec<RingElem> = k.residues(ell).collect();
    let mut count = 0u128;
    for x in &elems {
        let px = k.add(&k.mul(&u, &k.square(x)), &k.add(&k.mul(&bb, x), &d));
        for y in &elems {
            let t = k.add(&k.mul(&k.add(x, &k.mul(&v, y)), y), &k.mul(&aa, y));
            if k.is_zero(&k.add(&px, &t)) {
                count += 1;
            }
        }
    }
    Ok(measure(k, count, 2, ell))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn naive_examples() {
        let k = LocalField::q2();
        let b = DiagonalForm::from_ints(&k, &[1]).unwrap();
        assert_eq!(count_level_naive(&b, &k.elem(1), 2).unwrap(), r(1, 2));
        let b2 = DiagonalForm::from_ints(&k, &[1, 1]).unwrap();
        assert_eq!(count_level_naive(&b2, &k.elem(1), 1).unwrap(), r(1, 2));
        let k3 = LocalField::qp(3).unwrap();
        let b3 = DiagonalForm::from_ints(&k3, &[1, 2]).unwrap();
        assert_eq!(count_level_naive(&b3, &k3.elem(5), 0).unwrap(), r(1, 1));
    }

    #[test]
    fn histogram_examples() {
        let k = LocalField::q2();
        let b0 = DiagonalForm::empty(&k);
        assert_eq!(count_level_histogram(&b0, &k.elem(4), 1).unwrap(), r(1, 1));
        for l in 0..4 {
            assert_eq!(count_level_histogram(&b0, &k.elem(1), l).unwrap(), r(0, 1));
        }
        let b4 = DiagonalForm::from_ints(&k, &[1, 1, 1, 1]).unwrap();
        assert_eq!(
            count_level_histogram(&b4, &k.elem(1), 1).unwrap(),
            count_level_naive(&b4, &k.elem(1), 1).unwrap()
        );
    }

    #[test]
    fn planes_agree() {
        for k in [LocalField::q2(), LocalField::qp(3).unwrap(), LocalField::q2_sqrt2()] {
            let b = DiagonalForm::from_ints(&k, &[1]).unwrap().with_planes(1);
            for l in 0..3 {
                for rho in [0, 1, 2, 3, 4] {
                    assert_eq!(
                        count_level_histogram(&b, &k.elem(rho), l).unwrap(),
                        count_level_naive(&b, &k.elem(rho), l).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn series_examples() {
        let k = LocalField::q2();
        let b = DiagonalForm::new(&k, &[k.elem(2)]).unwrap();
        let x = x_series(&b, &k.elem(4), 3, SeriesMode::Direct).unwrap();
        assert_eq!(x.coeffs, vec![r(1, 1), r(1, 2), r(0, 1), r(0, 1)]);
        let b = DiagonalForm::from_ints(&k, &[1]).unwrap();
        let x = x_series(&b, &k.elem(1), 4, SeriesMode::Stabilized { verify: 2 }).unwrap();
        assert_eq!(x.coeffs, vec![r(1, 2), r(1, 2), r(1, 2), r(1, 4), r(1, 8)]);
        let b0 = DiagonalForm::empty(&k);
        let x = x_series(&b0, &k.zero(40), 5, SeriesMode::Stabilized { verify: 3 }).unwrap();
        assert!(x.coeffs.iter().all(|c| *c == r(1, 1)));
    }

    #[test]
    fn budget_is_enforced() {
        let k = LocalField::q2();
        let b = DiagonalForm::from_ints(&k, &[1, 1, 1, 1]).unwrap();
        assert!(matches!(
            count_level_naive(&b, &k.elem(1), 10),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn series_json() {
        let s = TruncatedSeries { coeffs: vec![r(1, 2), r(1, 4)] };
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"L":1,"coeffs":["1/2","1/4"]}"#);
        assert_eq!(serde_json::from_str::<TruncatedSeries>(&j).unwrap(), s);
    }
}
