//! Laurent polynomials in z, iq, av with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Indeterminates: z = q^{-β}, iq = q^{-1}, av = q^{-α}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    Z = 0,
    Iq = 1,
    Av = 2,
}

impl Var {
    pub const ALL: [Var; 3] = [Var::Z, Var::Iq, Var::Av];
    pub fn name(self) -> &'static str {
        match self {
            Var::Z => "z",
            Var::Iq => "iq",
            Var::Av => "a",
        }
    }
}

pub type Exps = [i32; 3];

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<Exps, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }
    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }
    pub fn constant(c: BigRational) -> Self {
        Self::monomial(c, [0, 0, 0])
    }
    pub fn int(c: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(c)))
    }
    pub fn monomial(c: BigRational, e: Exps) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        Poly { terms }
    }
    pub fn var(v: Var) -> Self {
        let mut e = [0; 3];
        e[v as usize] = 1;
        Self::monomial(BigRational::one(), e)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &BigRational)> {
        self.terms.iter()
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value if no indeterminate occurs.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&[0, 0, 0]).cloned(),
            _ => None,
        }
    }

    pub fn as_monomial(&self) -> Option<(BigRational, Exps)> {
        if self.terms.len() == 1 {
            let (e, c) = self.terms.iter().next().unwrap();
            Some((c.clone(), *e))
        } else {
            None
        }
    }

    pub fn first_term(&self) -> Option<(&Exps, &BigRational)> {
        self.terms.iter().next()
    }

    fn add_term(&mut self, e: Exps, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(e, x)| (*e, x * c)).collect() }
    }

    pub fn shift(&self, by: Exps) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| ([e[0] + by[0], e[1] + by[1], e[2] + by[2]], c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Componentwise minimum exponent, or zeros for the zero polynomial.
    pub fn min_exps(&self) -> Exps {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else { return [0; 3] };
        it.fold(*first, |m, e| [m[0].min(e[0]), m[1].min(e[1]), m[2].min(e[2])])
    }

    pub fn degree_range(&self, v: Var) -> Option<(i32, i32)> {
        let i = v as usize;
        let lo = self.terms.keys().map(|e| e[i]).min()?;
        let hi = self.terms.keys().map(|e| e[i]).max()?;
        Some((lo, hi))
    }

    pub fn involves(&self, v: Var) -> bool {
        self.terms.keys().any(|e| e[v as usize] != 0)
    }

    pub fn derivative(&self, v: Var) -> Poly {
        let i = v as usize;
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            if e[i] != 0 {
                let mut f = *e;
                f[i] -= 1;
                out.add_term(f, c * BigRational::from_integer(BigInt::from(e[i])));
            }
        }
        out
    }

    /// Split as Σ_j P_j v^j with the v-exponent removed from each P_j.
    pub fn coefficients_in(&self, v: Var) -> BTreeMap<i32, Poly> {
        let i = v as usize;
        let mut out: BTreeMap<i32, Poly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut f = *e;
            f[i] = 0;
            out.entry(e[i]).or_default().add_term(f, c.clone());
        }
        out
    }

    /// Replace v by a rational number (nonzero when negative powers occur).
    pub fn eval(&self, v: Var, x: &BigRational) -> Poly {
        let i = v as usize;
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            let mut f = *e;
            f[i] = 0;
            out.add_term(f, c * rat_pow(x, e[i]));
        }
        out
    }

    pub fn to_f64(&self, vals: [f64; 3]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let c = ratio_to_f64(c);
                c * vals[0].powi(e[0]) * vals[1].powi(e[1]) * vals[2].powi(e[2])
            })
            .sum()
    }
}

pub fn rat_pow(x: &BigRational, k: i32) -> BigRational {
    if k >= 0 {
        num_traits::pow(x.clone(), k as usize)
    } else {
        num_traits::pow(x.recip(), (-k) as usize)
    }
}

pub fn ratio_to_f64(c: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    c.to_f64().unwrap_or(f64::NAN)
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect() }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                out.add_term([e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]], c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms.iter().enumerate() {
            let mut vars = Vec::new();
            for v in Var::ALL {
                match e[v as usize] {
                    0 => {}
                    1 => vars.push(v.name().to_string()),
                    k => vars.push(format!("{}^{}", v.name(), k)),
                }
            }
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else if n > 0 { "+" } else { "" };
            let sep = if n > 0 { " " } else { "" };
            let body = if vars.is_empty() {
                mag.to_string()
            } else if mag.is_one() {
                vars.join("*")
            } else {
                format!("{}*{}", mag, vars.join("*"))
            };
            if n > 0 {
                write!(f, "{sep}{sign} {body}")?;
            } else {
                write!(f, "{sign}{body}")?;
            }
        }
        Ok(())
    }
}
