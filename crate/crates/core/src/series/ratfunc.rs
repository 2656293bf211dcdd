//! Rational functions over ℚ in z, iq, av.
//!
//! No polynomial gcd is taken. The stored form is canonical only up to a
//! common polynomial factor: the denominator is shifted so every exponent's
//! minimum is zero and its first term (in the fixed exponent order) has
//! coefficient 1. Equality is decided by cross-multiplication.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::poly::{Exps, Poly, Var};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct RationalFunction {
    num: Poly,
    den: Poly,
}

impl RationalFunction {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::OutOfRange("zero denominator".into()));
        }
        Ok(Self::canonical(num, den))
    }

    fn canonical(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return RationalFunction { num, den: Poly::one() };
        }
        let m = den.min_exps();
        let back: Exps = [-m[0], -m[1], -m[2]];
        let (num, den) = (num.shift(back), den.shift(back));
        let lead = den.first_term().map(|(_, c)| c.clone()).unwrap();
        let inv = lead.recip();
        RationalFunction { num: num.scale(&inv), den: den.scale(&inv) }
    }

    pub fn from_poly(p: Poly) -> Self {
        Self::canonical(p, Poly::one())
    }
    pub fn zero() -> Self {
        Self::from_poly(Poly::zero())
    }
    pub fn one() -> Self {
        Self::from_poly(Poly::one())
    }
    pub fn int(c: i64) -> Self {
        Self::from_poly(Poly::int(c))
    }
    pub fn constant(c: BigRational) -> Self {
        Self::from_poly(Poly::constant(c))
    }
    pub fn var(v: Var) -> Self {
        Self::from_poly(Poly::var(v))
    }
    pub fn monomial(e: Exps) -> Self {
        Self::from_poly(Poly::monomial(BigRational::one(), e))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }
    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn recip(&self) -> Result<Self> {
        Self::new(self.den.clone(), self.num.clone())
    }

    /// Integer power; negative exponents invert.
    pub fn pow(&self, k: i32) -> Result<Self> {
        if k >= 0 {
            Ok(Self::canonical(self.num.pow(k as u32), self.den.pow(k as u32)))
        } else {
            self.recip()?.pow(-k)
        }
    }

    pub fn try_div(&self, o: &Self) -> Result<Self> {
        Self::new(&self.num * &o.den, &self.den * &o.num)
    }

    /// c·e when both numerator and denominator are single terms.
    pub fn as_monomial(&self) -> Option<(BigRational, Exps)> {
        let (cn, en) = self.num.as_monomial()?;
        let (cd, ed) = self.den.as_monomial()?;
        Some((cn / cd, [en[0] - ed[0], en[1] - ed[1], en[2] - ed[2]]))
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(n / d)
    }

    pub fn involves(&self, v: Var) -> bool {
        self.num.involves(v) || self.den.involves(v)
    }

    /// Substitute v ↦ r.
    pub fn substitute(&self, v: Var, r: &RationalFunction) -> Result<Self> {
        // P(N/D) = N^lo D^{-hi} Σ_j P_j N^{j-lo} D^{hi-j}.
        let expand = |p: &Poly| -> (Poly, i32, i32) {
            let parts = p.coefficients_in(v);
            let lo = *parts.keys().next().unwrap_or(&0);
            let hi = *parts.keys().next_back().unwrap_or(&0);
            let mut acc = Poly::zero();
            for (j, pj) in parts {
                acc = &acc + &(&(&pj * &r.num.pow((j - lo) as u32)) * &r.den.pow((hi - j) as u32));
            }
            (acc, lo, hi)
        };
        let (qn, lon, hin) = expand(&self.num);
        let (qd, lod, hid) = expand(&self.den);
        if qd.is_zero() {
            return Err(Error::OutOfRange("substitution annihilates the denominator".into()));
        }
        let n_exp = lon - lod;
        let d_exp = hid - hin;
        let mut num = qn;
        let mut den = qd;
        if n_exp >= 0 {
            num = &num * &r.num.pow(n_exp as u32);
        } else {
            den = &den * &r.num.pow((-n_exp) as u32);
        }
        if d_exp >= 0 {
            num = &num * &r.den.pow(d_exp as u32);
        } else {
            den = &den * &r.den.pow((-d_exp) as u32);
        }
        Self::new(num, den)
    }

    /// Substitute a rational number for v.
    pub fn specialize(&self, v: Var, x: &BigRational) -> Result<Self> {
        if x.is_zero() {
            return self.substitute(v, &Self::zero());
        }
        Self::new(self.num.eval(v, x), self.den.eval(v, x))
    }

    pub fn specialize_all(&self, vals: [&BigRational; 3]) -> Result<BigRational> {
        let mut r = self.clone();
        for v in Var::ALL {
            r = r.specialize(v, vals[v as usize])?;
        }
        r.as_constant().ok_or_else(|| Error::Internal("specialization left indeterminates".into()))
    }

    pub fn to_f64(&self, vals: [f64; 3]) -> f64 {
        self.num.to_f64(vals) / self.den.to_f64(vals)
    }

    pub fn derivative(&self, v: Var) -> Self {
        let n = &(&self.num.derivative(v) * &self.den) - &(&self.num * &self.den.derivative(v));
        Self::canonical(n, &self.den * &self.den)
    }

    /// True when the function does not depend on v.
    pub fn is_independent_of(&self, v: Var) -> bool {
        let n = &(&self.num.derivative(v) * &self.den) - &(&self.num * &self.den.derivative(v));
        n.is_zero()
    }

    /// Power-series coefficients in z up to `order`; every other indeterminate
    /// must already be specialized.
    pub fn z_series(&self, order: usize) -> Result<Vec<BigRational>> {
        if self.involves(Var::Iq) || self.involves(Var::Av) {
            return Err(Error::OutOfRange("z-series needs iq and av specialized".into()));
        }
        let coeffs = |p: &Poly| -> (i32, Vec<BigRational>) {
            let (lo, hi) = p.degree_range(Var::Z).unwrap_or((0, 0));
            let mut v = vec![BigRational::zero(); (hi - lo + 1) as usize];
            for (e, c) in p.terms() {
                v[(e[0] - lo) as usize] = c.clone();
            }
            (lo, v)
        };
        let (nlo, n) = coeffs(&self.num);
        let (dlo, d) = coeffs(&self.den);
        // den is shifted to start at z^0.
        debug_assert_eq!(dlo, 0);
        let shift = nlo - dlo;
        let total = order as i64 - shift as i64;
        let mut out = vec![BigRational::zero(); order + 1];
        if self.num.is_zero() {
            return Ok(out);
        }
        let len = (total + 1).max(0) as usize;
        let d0 = d[0].recip();
        let mut s: Vec<BigRational> = Vec::with_capacity(len);
        for i in 0..len {
            let mut c = n.get(i).cloned().unwrap_or_else(BigRational::zero);
            for j in 1..=i.min(d.len() - 1) {
                c -= &d[j] * &s[i - j];
            }
            s.push(c * &d0);
        }
        if shift < 0
            && s.iter().take((-shift) as usize).any(|c| !c.is_zero()) {
                return Err(Error::OutOfRange("negative powers of z in expansion".into()));
            }
        for (i, c) in s.into_iter().enumerate() {
            let k = i as i64 + shift as i64;
            if k >= 0 && (k as usize) <= order {
                out[k as usize] = c;
            }
        }
        Ok(out)
    }

    /// The pair normalized so both numerator and denominator have lowest
    /// term 1, and the dropped constant c·monomial with self = c·mono·(n/d).
    pub fn normalize_up_to_constant(&self) -> Result<(Self, BigRational, Exps)> {
        let (en, cn) = self
            .num
            .first_term()
            .map(|(e, c)| (*e, c.clone()))
            .ok_or_else(|| Error::OutOfRange("zero has no normalization".into()))?;
        let (ed, cd) = self.den.first_term().map(|(e, c)| (*e, c.clone())).unwrap();
        let num = self.num.shift([-en[0], -en[1], -en[2]]).scale(&cn.recip());
        let den = self.den.shift([-ed[0], -ed[1], -ed[2]]).scale(&cd.recip());
        Ok((
            RationalFunction { num, den },
            cn / cd,
            [en[0] - ed[0], en[1] - ed[1], en[2] - ed[2]],
        ))
    }
}

impl PartialEq for RationalFunction {
    fn eq(&self, o: &Self) -> bool {
        (&self.num * &o.den) == (&o.num * &self.den)
    }
}

impl Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, o: &RationalFunction) -> RationalFunction {
        if self.den == o.den {
            return RationalFunction::canonical(&self.num + &o.num, self.den.clone());
        }
        RationalFunction::canonical(
            &(&self.num * &o.den) + &(&o.num * &self.den),
            &self.den * &o.den,
        )
    }
}

impl Sub for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, o: &RationalFunction) -> RationalFunction {
        self + &(-o)
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction { num: -&self.num, den: self.den.clone() }
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, o: &RationalFunction) -> RationalFunction {
        RationalFunction::canonical(&self.num * &o.num, &self.den * &o.den)
    }
}

/// Panics on division by zero; use [`RationalFunction::try_div`] otherwise.
impl Div for &RationalFunction {
    type Output = RationalFunction;
    fn div(self, o: &RationalFunction) -> RationalFunction {
        self.try_div(o).expect("division by the zero rational function")
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for RationalFunction {
            type Output = RationalFunction;
            fn $m(self, o: RationalFunction) -> RationalFunction { (&self).$m(&o) }
        }
        impl $tr<&RationalFunction> for RationalFunction {
            type Output = RationalFunction;
            fn $m(self, o: &RationalFunction) -> RationalFunction { (&self).$m(o) }
        }
        impl $tr<RationalFunction> for &RationalFunction {
            type Output = RationalFunction;
            fn $m(self, o: RationalFunction) -> RationalFunction { self.$m(&o) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl Neg for RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        -&self
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.as_constant().is_some_and(|c| c.is_one()) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RfRepr {
    num: Vec<(String, i32, i32, i32)>,
    den: Vec<(String, i32, i32, i32)>,
}

fn poly_repr(p: &Poly) -> Vec<(String, i32, i32, i32)> {
    p.terms().map(|(e, c)| (c.to_string(), e[0], e[1], e[2])).collect()
}

fn poly_from(r: &[(String, i32, i32, i32)]) -> std::result::Result<Poly, String> {
    let mut p = Poly::zero();
    for (c, a, b, d) in r {
        let c: BigRational = c.parse().map_err(|e| format!("{e}"))?;
        p = &p + &Poly::monomial(c, [*a, *b, *d]);
    }
    Ok(p)
}

/// Serialized as `{num: [[coeff, e_z, e_iq, e_a], ...], den: [...]}`.
impl Serialize for RationalFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RfRepr { num: poly_repr(&self.num), den: poly_repr(&self.den) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = RfRepr::deserialize(d)?;
        let num = poly_from(&r.num).map_err(serde::de::Error::custom)?;
        let den = poly_from(&r.den).map_err(serde::de::Error::custom)?;
        RationalFunction::new(num, den).map_err(serde::de::Error::custom)
    }
}
