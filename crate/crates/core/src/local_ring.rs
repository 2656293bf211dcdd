//! Residue rings 𝔬/ϖ^L of the supported local fields, with the quadratic
//! defect and Hilbert symbol built on top.
//!
//! Three models are implemented:
//!
//! * `ℤ/p^L` for ℚ_p (for p = 2 this is ℚ₂ with e = 1, for odd p e = 0);
//! * the Galois ring `(ℤ/2^L)[θ]`, θ² + θ + 1 = 0, for the unramified
//!   extension of ℚ₂ with q = 4;
//! * `ℤ₂[π]/(π^L)` for a ramified quadratic extension given by an Eisenstein
//!   polynomial x² + c₁x + c₀. An element is a + bπ with a kept modulo
//!   2^⌈L/2⌉ and b modulo 2^⌊L/2⌋; those two congruences describe the ideal
//!   π^L𝔬 exactly, so reduction is coordinatewise.
//!
//! Elements are plain values; every operation goes through the owning
//! [`LocalField`].

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Defining data of a field as accepted by [`make_field`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Unramified,
    /// Root of x² + c₁x + c₀ with ord c₁ ≥ 1 and ord c₀ = 1.
    Eisenstein { c1: i64, c0: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Model {
    Prime,
    Galois,
    Ramified { c1: i64, c0: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FieldRepr", into = "FieldRepr")]
pub struct LocalField {
    p: u64,
    f: u32,
    e: u32,
    q: u64,
    model: Model,
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    p: u64,
    f: u32,
    variant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c1: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c0: Option<i64>,
}

impl TryFrom<FieldRepr> for LocalField {
    type Error = Error;
    fn try_from(r: FieldRepr) -> Result<Self> {
        let variant = match r.variant.as_str() {
            "unramified" => Variant::Unramified,
            "eisenstein" => Variant::Eisenstein {
                c1: r.c1.ok_or_else(|| Error::Parse("missing c1".into()))?,
                c0: r.c0.ok_or_else(|| Error::Parse("missing c0".into()))?,
            },
            other => return Err(Error::Parse(format!("unknown variant {other}"))),
        };
        make_field(r.p, r.f, variant)
    }
}

impl From<LocalField> for FieldRepr {
    fn from(k: LocalField) -> Self {
        let (variant, c1, c0) = match k.model {
            Model::Ramified { c1, c0 } => ("eisenstein", Some(c1), Some(c0)),
            _ => ("unramified", None, None),
        };
        FieldRepr { p: k.p, f: k.f, variant: variant.into(), c1, c0 }
    }
}

/// An element of 𝔬/ϖ^level in canonical coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RingElem {
    pub level: u32,
    pub coords: [u64; 2],
}

impl Serialize for RingElem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("RingElem", 2)?;
        st.serialize_field("level", &self.level)?;
        st.serialize_field("coords", &[self.coords[0].to_string(), self.coords[1].to_string()])?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for RingElem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            level: u32,
            coords: [String; 2],
        }
        let r = Repr::deserialize(d)?;
        let parse = |s: &str| s.parse::<u64>().map_err(serde::de::Error::custom);
        Ok(RingElem { level: r.level, coords: [parse(&r.coords[0])?, parse(&r.coords[1])?] })
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Build a field descriptor. Supported: ℚ_p (f = 1, any prime), the
/// unramified quadratic extension of ℚ₂ (f = 2), and ramified quadratic
/// extensions of ℚ₂ given by an Eisenstein polynomial.
pub fn make_field(p: u64, f: u32, variant: Variant) -> Result<LocalField> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    match (p, f, variant) {
        (_, 1, Variant::Unramified) => {
            Ok(LocalField { p, f, e: u32::from(p == 2), q: p, model: Model::Prime })
        }
        (2, 2, Variant::Unramified) => Ok(LocalField { p, f, e: 1, q: 4, model: Model::Galois }),
        (2, 1, Variant::Eisenstein { c1, c0 }) => {
            if c0 == 0 || c0.rem_euclid(4) != 2 || c1.rem_euclid(2) != 0 {
                return Err(Error::Unsupported(format!(
                    "x^2 + {c1}x + {c0} is not Eisenstein at 2"
                )));
            }
            Ok(LocalField { p, f, e: 2, q: 2, model: Model::Ramified { c1, c0 } })
        }
        (2, _, _) => Err(Error::Unsupported(format!(
            "dyadic field with f = {f} and {variant:?}: need e·f ≤ 2"
        ))),
        _ => Err(Error::Unsupported(format!("odd p = {p} supports only f = 1, unramified"))),
    }
}

impl LocalField {
    pub fn q2() -> Self {
        make_field(2, 1, Variant::Unramified).unwrap()
    }
    /// Unramified extension of ℚ₂ of degree 2 (q = 4).
    pub fn q4() -> Self {
        make_field(2, 2, Variant::Unramified).unwrap()
    }
    /// ℚ₂(√2), defined by x² − 2.
    pub fn q2_sqrt2() -> Self {
        make_field(2, 1, Variant::Eisenstein { c1: 0, c0: -2 }).unwrap()
    }
    pub fn qp(p: u64) -> Result<Self> {
        make_field(p, 1, Variant::Unramified)
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn f(&self) -> u32 {
        self.f
    }
    /// ord 2; zero for odd p.
    pub fn e(&self) -> u32 {
        self.e
    }
    pub fn q(&self) -> u64 {
        self.q
    }
    pub fn is_dyadic(&self) -> bool {
        self.p == 2
    }
    pub fn is_unramified(&self) -> bool {
        !matches!(self.model, Model::Ramified { .. })
    }
    pub fn variant(&self) -> Variant {
        match self.model {
            Model::Ramified { c1, c0 } => Variant::Eisenstein { c1, c0 },
            _ => Variant::Unramified,
        }
    }

    /// Short name used in reports and on the command line.
    pub fn name(&self) -> String {
        match self.model {
            Model::Prime => format!("q{}", self.p),
            Model::Galois => "q4".into(),
            Model::Ramified { c1: 0, c0: -2 } => "q2r".into(),
            Model::Ramified { c1, c0 } => format!("q2[x^2{c1:+}x{c0:+}]"),
        }
    }

    /// Largest level representable with 62-bit coordinates.
    pub fn max_level(&self) -> u32 {
        match self.model {
            Model::Prime => {
                let mut l = 0;
                let mut m: u128 = 1;
                while m * (self.p as u128) < (1u128 << 62) {
                    m *= self.p as u128;
                    l += 1;
                }
                l
            }
            Model::Galois => 62,
            Model::Ramified { .. } => 124,
        }
    }

    /// Default level for elements built from integers.
    pub fn work_level(&self) -> u32 {
        match self.model {
            Model::Prime if self.p == 2 => 48,
            Model::Prime => self.max_level() - 2,
            Model::Galois => 48,
            Model::Ramified { .. } => 96,
        }
    }

    pub fn moduli(&self, level: u32) -> [u64; 2] {
        match self.model {
            Model::Prime => [self.p.pow(level), 1],
            Model::Galois => [1u64 << level, 1u64 << level],
            Model::Ramified { .. } => [1u64 << level.div_ceil(2), 1u64 << (level / 2)],
        }
    }

    /// Number of elements of 𝔬/ϖ^level, i.e. q^level.
    pub fn size(&self, level: u32) -> u128 {
        let m = self.moduli(level);
        m[0] as u128 * m[1] as u128
    }

    fn reduce_coords(&self, level: u32, c: [i128; 2]) -> RingElem {
        let m = self.moduli(level);
        RingElem {
            level,
            coords: [c[0].rem_euclid(m[0] as i128) as u64, c[1].rem_euclid(m[1] as i128) as u64],
        }
    }

    /// Element with coordinates (c₀, c₁) in the basis 1, θ (resp. 1, π).
    pub fn elem2_at(&self, c0: i64, c1: i64, level: u32) -> RingElem {
        assert!(level <= self.max_level(), "level {level} beyond precision");
        let c1 = if matches!(self.model, Model::Prime) { 0 } else { c1 };
        self.reduce_coords(level, [c0 as i128, c1 as i128])
    }
    pub fn elem_at(&self, x: i64, level: u32) -> RingElem {
        self.elem2_at(x, 0, level)
    }
    pub fn elem(&self, x: i64) -> RingElem {
        self.elem_at(x, self.work_level())
    }
    pub fn elem2(&self, c0: i64, c1: i64) -> RingElem {
        self.elem2_at(c0, c1, self.work_level())
    }
    pub fn zero(&self, level: u32) -> RingElem {
        RingElem { level, coords: [0, 0] }
    }
    pub fn one(&self, level: u32) -> RingElem {
        self.elem_at(1, level)
    }

    /// ϖ at the working level: p, 2 or π.
    pub fn uniformizer(&self) -> RingElem {
        match self.model {
            Model::Ramified { .. } => self.elem2(0, 1),
            _ => self.elem(self.p as i64),
        }
    }
    pub fn uniformizer_pow(&self, k: u32) -> RingElem {
        self.pow(&self.uniformizer(), k)
    }

    /// The generator θ of the Galois ring.
    pub fn theta(&self) -> Option<RingElem> {
        matches!(self.model, Model::Galois).then(|| self.elem2(0, 1))
    }

    pub fn reduce(&self, x: &RingElem, level: u32) -> RingElem {
        assert!(level <= x.level, "cannot reduce level {} to {level}", x.level);
        let m = self.moduli(level);
        RingElem { level, coords: [x.coords[0] % m[0], x.coords[1] % m[1]] }
    }

    /// Canonical lift: the same coordinates read at a higher level.
    pub fn lift(&self, x: &RingElem, level: u32) -> RingElem {
        assert!(level >= x.level && level <= self.max_level());
        RingElem { level, coords: x.coords }
    }

    fn common(&self, x: &RingElem, y: &RingElem) -> (RingElem, RingElem) {
        let l = x.level.min(y.level);
        (self.reduce(x, l), self.reduce(y, l))
    }

    pub fn add(&self, x: &RingElem, y: &RingElem) -> RingElem {
        let (x, y) = self.common(x, y);
        let m = self.moduli(x.level);
        let coords = if self.p == 2 {
            [
                x.coords[0].wrapping_add(y.coords[0]) & (m[0] - 1),
                x.coords[1].wrapping_add(y.coords[1]) & (m[1] - 1),
            ]
        } else {
            [((x.coords[0] as u128 + y.coords[0] as u128) % m[0] as u128) as u64, 0]
        };
        RingElem { level: x.level, coords }
    }

    pub fn neg(&self, x: &RingElem) -> RingElem {
        let m = self.moduli(x.level);
        RingElem {
            level: x.level,
            coords: [(m[0] - x.coords[0]) % m[0], (m[1] - x.coords[1]) % m[1]],
        }
    }

    pub fn sub(&self, x: &RingElem, y: &RingElem) -> RingElem {
        self.add(x, &self.neg(y))
    }

    pub fn mul(&self, x: &RingElem, y: &RingElem) -> RingElem {
        let (x, y) = self.common(x, y);
        let level = x.level;
        let m = self.moduli(level);
        let [a, b] = x.coords;
        let [c, d] = y.coords;
        let coords = match self.model {
            Model::Prime if self.p != 2 => {
                [((a as u128 * c as u128) % m[0] as u128) as u64, 0]
            }
            // Power-of-two moduli: wrapping arithmetic is exact modulo 2^64.
            Model::Prime => [a.wrapping_mul(c) & (m[0] - 1), 0],
            Model::Galois => {
                let bd = b.wrapping_mul(d);
                [
                    a.wrapping_mul(c).wrapping_sub(bd) & (m[0] - 1),
                    a.wrapping_mul(d).wrapping_add(b.wrapping_mul(c)).wrapping_sub(bd) & (m[1] - 1),
                ]
            }
            Model::Ramified { c1, c0 } => {
                let bd = b.wrapping_mul(d);
                [
                    a.wrapping_mul(c).wrapping_sub(bd.wrapping_mul(c0 as u64)) & (m[0] - 1),
                    a.wrapping_mul(d)
                        .wrapping_add(b.wrapping_mul(c))
                        .wrapping_sub(bd.wrapping_mul(c1 as u64))
                        & (m[1] - 1),
                ]
            }
        };
        RingElem { level, coords }
    }

    pub fn square(&self, x: &RingElem) -> RingElem {
        self.mul(x, x)
    }

    pub fn pow(&self, x: &RingElem, mut k: u32) -> RingElem {
        let mut base = *x;
        let mut acc = self.one(x.level);
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            k >>= 1;
        }
        acc
    }

    pub fn is_zero(&self, x: &RingElem) -> bool {
        x.coords == [0, 0]
    }

    /// Valuation, or `None` when x vanishes at its level.
    pub fn ord(&self, x: &RingElem) -> Option<u32> {
        if self.is_zero(x) {
            return None;
        }
        let v = |c: u64, p: u64| -> u32 {
            if c == 0 {
                u32::MAX
            } else {
                let (mut c, mut k) = (c, 0);
                while c % p == 0 {
                    c /= p;
                    k += 1;
                }
                k
            }
        };
        Some(match self.model {
            Model::Prime => v(x.coords[0], self.p),
            Model::Galois => v(x.coords[0], 2).min(v(x.coords[1], 2)),
            Model::Ramified { .. } => {
                let a = v(x.coords[0], 2).saturating_mul(2);
                let b = v(x.coords[1], 2).saturating_mul(2).saturating_add(1);
                a.min(b)
            }
        })
    }

    pub fn is_unit(&self, x: &RingElem) -> bool {
        self.ord(x) == Some(0)
    }

    /// x/ϖ for x ∈ ϖ𝔬, one level lower.
    pub fn div_uniformizer(&self, x: &RingElem) -> Result<RingElem> {
        if x.level == 0 || self.ord(x) == Some(0) {
            return Err(Error::OutOfRange("element not divisible by the uniformizer".into()));
        }
        let l = x.level - 1;
        match self.model {
            Model::Prime | Model::Galois => {
                let p = self.p;
                Ok(self.reduce_coords(l, [(x.coords[0] / p) as i128, (x.coords[1] / p) as i128]))
            }
            Model::Ramified { c1, c0 } => {
                // π⁻¹ = −(π + c₁)/c₀ and c₀ = 2u₀.
                let up = (x.level + 1).min(self.max_level());
                let xl = self.lift(x, up);
                let y = self.mul(&xl, &self.elem2_at(c1, 1, up));
                if !y.coords[0].is_multiple_of(2) || !y.coords[1].is_multiple_of(2) {
                    return Err(Error::Internal("π-division parity".into()));
                }
                let half = self.reduce_coords(
                    up - 2,
                    [(y.coords[0] / 2) as i128, (y.coords[1] / 2) as i128],
                );
                let u0 = self.inv_unit(&self.elem_at(-c0 / 2, up - 2))?;
                Ok(self.reduce(&self.mul(&half, &u0), l.min(up - 2)))
            }
        }
    }

    /// (ord x, x/ϖ^{ord x}).
    pub fn unit_part(&self, x: &RingElem) -> Result<(u32, RingElem)> {
        let v = self.ord(x).ok_or(Error::ZeroArgument("unit part of zero"))?;
        let mut y = *x;
        for _ in 0..v {
            y = self.div_uniformizer(&y)?;
        }
        Ok((v, y))
    }

    /// Inverse of a unit by Newton iteration from a residue-field inverse.
    pub fn inv_unit(&self, x: &RingElem) -> Result<RingElem> {
        if !self.is_unit(x) {
            return Err(Error::OutOfRange("inverse of a non-unit".into()));
        }
        let one1 = self.one(1);
        let x1 = self.reduce(x, 1);
        let mut y = self
            .residues(1)
            .find(|r| self.mul(&x1, r) == one1)
            .ok_or_else(|| Error::Internal("no residue inverse".into()))?;
        y = self.lift(&y, x.level);
        let two = self.elem_at(2, x.level);
        let mut prec = 1;
        while prec < x.level {
            y = self.mul(&y, &self.sub(&two, &self.mul(x, &y)));
            prec *= 2;
        }
        Ok(y)
    }

    /// Flat index of x in `0..size(level)`.
    pub fn index(&self, x: &RingElem) -> usize {
        let m = self.moduli(x.level);
        (x.coords[0] + m[0] * x.coords[1]) as usize
    }

    pub fn from_index(&self, i: usize, level: u32) -> RingElem {
        let m = self.moduli(level);
        let i = i as u64;
        RingElem { level, coords: [i % m[0], i / m[0]] }
    }

    /// All residues at a level, in index order. This is the fixed traversal
    /// used by every search.
    pub fn residues(&self, level: u32) -> impl Iterator<Item = RingElem> + '_ {
        let n = self.size(level) as usize;
        (0..n).map(move |i| self.from_index(i, level))
    }

    /// Signed human-readable rendering, `w` for π and `t` for θ.
    pub fn format(&self, x: &RingElem) -> String {
        let m = self.moduli(x.level);
        let signed = |c: u64, m: u64| -> i128 {
            if m > 1 && c > m / 2 {
                c as i128 - m as i128
            } else {
                c as i128
            }
        };
        let a = signed(x.coords[0], m[0]);
        let b = signed(x.coords[1], m[1]);
        let sym = match self.model {
            Model::Galois => "t",
            _ => "w",
        };
        match (a, b) {
            (a, 0) => a.to_string(),
            (0, 1) => sym.to_string(),
            (0, -1) => format!("-{sym}"),
            (0, b) => format!("{b}*{sym}"),
            (a, 1) => format!("{a}+{sym}"),
            (a, -1) => format!("{a}-{sym}"),
            (a, b) if b < 0 => format!("{a}{b}*{sym}"),
            (a, b) => format!("{a}+{b}*{sym}"),
        }
    }

    /// |ϖ|^k = q^{-k} as an exact rational.
    pub fn abs_uniformizer_pow(&self, k: i64) -> BigRational {
        let q = BigRational::from_integer(BigInt::from(self.q));
        if k >= 0 {
            BigRational::one() / num_traits::pow(q, k as usize)
        } else {
            num_traits::pow(q, (-k) as usize)
        }
    }

    /// Units modulo ϖ^{2e+1} in traversal order, lifted to the working level.
    /// These decide every square class of units.
    pub fn unit_representatives(&self) -> Vec<RingElem> {
        let l = 2 * self.e + 1;
        self.residues(l)
            .filter(|x| self.is_unit(x))
            .map(|x| self.lift(&x, self.work_level()))
            .collect()
    }
}

impl fmt::Display for LocalField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (p={}, q={}, e={})", self.name(), self.p, self.q, self.e)
    }
}

/// Quadratic defect of a nonzero element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "d", rename_all = "lowercase")]
pub enum DefectResult {
    Square,
    /// Defect ideal ϖ^d𝔬 (d = ord ρ + 2e means 4ρ𝔬).
    Defect(u32),
}

type Memo<K, V> = OnceLock<Mutex<HashMap<K, V>>>;

/// For each residue x modulo ϖ^{2e+2}: max over η of ord(x − η²), capped.
fn defect_table(k: &LocalField) -> Arc<Vec<u32>> {
    static MEMO: Memo<LocalField, Arc<Vec<u32>>> = OnceLock::new();
    let memo = MEMO.get_or_init(Default::default);
    if let Some(t) = memo.lock().unwrap().get(k) {
        return t.clone();
    }
    let l = 2 * k.e + 2;
    let mut squares: Vec<RingElem> = k.residues(l).map(|x| k.square(&x)).collect();
    squares.sort_by_key(|s| k.index(s));
    squares.dedup();
    let table: Vec<u32> = k
        .residues(l)
        .map(|x| {
            squares
                .iter()
                .map(|s| k.ord(&k.sub(&x, s)).unwrap_or(l))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let t = Arc::new(table);
    memo.lock().unwrap().insert(k.clone(), t.clone());
    t
}

/// Quadratic defect of ρ ≠ 0 decided at `level` ≥ ord ρ + 2e + 2.
pub fn quadratic_defect_at(k: &LocalField, rho: &RingElem, level: u32) -> Result<DefectResult> {
    let v = k.ord(rho).ok_or(Error::ZeroArgument("quadratic defect of 0"))?;
    let need = v + 2 * k.e + 2;
    let have = level.min(rho.level);
    if have < need {
        return Err(Error::InsufficientLevel { need, have });
    }
    if v % 2 == 1 {
        return Ok(DefectResult::Defect(v));
    }
    let (_, eps) = k.unit_part(rho)?;
    let table = defect_table(k);
    let best = table[k.index(&k.reduce(&eps, 2 * k.e + 2))];
    Ok(if best > 2 * k.e { DefectResult::Square } else { DefectResult::Defect(v + best) })
}

pub fn quadratic_defect(k: &LocalField, rho: &RingElem) -> Result<DefectResult> {
    quadratic_defect_at(k, rho, rho.level)
}

pub fn is_square(k: &LocalField, x: &RingElem) -> Result<bool> {
    Ok(quadratic_defect(k, x)? == DefectResult::Square)
}

/// x·y is a nonzero square, i.e. x and y lie in the same square class.
pub fn same_square_class(k: &LocalField, x: &RingElem, y: &RingElem) -> Result<bool> {
    is_square(k, &k.mul(x, y))
}

/// Canonical representative of the square class of x ≠ 0: the first unit of
/// the fixed traversal in the class of the unit part, times ϖ^{ord x mod 2}.
pub fn square_class_rep(k: &LocalField, x: &RingElem) -> Result<RingElem> {
    let (v, eps) = k.unit_part(x)?;
    let eps = k.lift(&eps, eps.level.max(k.work_level()).min(k.max_level()));
    for r in k.unit_representatives() {
        if same_square_class(k, &eps, &r)? {
            return Ok(if v % 2 == 1 { k.mul(&r, &k.uniformizer()) } else { r });
        }
    }
    Err(Error::Internal("no square class representative".into()))
}

/// (ord x mod 2, unit part) with the unit part reduced to `level`.
fn normalize_mod_squares(k: &LocalField, x: &RingElem, level: u32) -> Result<(u32, RingElem)> {
    let (v, eps) = k.unit_part(x)?;
    if eps.level < level {
        return Err(Error::InsufficientLevel { need: level + v, have: x.level });
    }
    Ok((v % 2, k.reduce(&eps, level)))
}

fn legendre(a: u64, p: u64) -> i8 {
    let mut r: u128 = 1;
    let mut b = (a % p) as u128;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u128;
        }
        b = b * b % p as u128;
        e >>= 1;
    }
    if r == 1 {
        1
    } else {
        -1
    }
}

/// Primitive solution of a x² + b y² = z² modulo ϖ^{2e+3}, for a, b with
/// ord ∈ {0, 1}. This is the ground truth the case analysis is checked against.
pub fn hilbert_by_search(k: &LocalField, a: &RingElem, b: &RingElem) -> i8 {
    let l = 2 * k.e + 3;
    let a = k.reduce(a, l);
    let b = k.reduce(b, l);
    let n = k.size(l) as usize;
    let mut sq_all = vec![false; n];
    let mut sq_unit = vec![false; n];
    let elems: Vec<RingElem> = k.residues(l).collect();
    let unit: Vec<bool> = elems.iter().map(|x| k.is_unit(x)).collect();
    for (x, &u) in elems.iter().zip(&unit) {
        let s = k.index(&k.square(x));
        sq_all[s] = true;
        if u {
            sq_unit[s] = true;
        }
    }
    // Distinct values of a x² and b y², remembering whether a unit x hits them.
    let values = |c: &RingElem| -> Vec<(RingElem, bool)> {
        let mut seen: HashMap<usize, bool> = HashMap::new();
        for (x, &u) in elems.iter().zip(&unit) {
            let v = k.mul(c, &k.square(x));
            *seen.entry(k.index(&v)).or_insert(false) |= u;
        }
        let mut out: Vec<(RingElem, bool)> =
            seen.into_iter().map(|(i, u)| (k.from_index(i, l), u)).collect();
        out.sort_by_key(|(x, _)| k.index(x));
        out
    };
    let (ax, by) = (values(&a), values(&b));
    for (x, ux) in &ax {
        for (y, uy) in &by {
            let v = k.index(&k.add(x, y));
            let ok = if *ux || *uy { sq_all[v] } else { sq_unit[v] };
            if ok {
                return 1;
            }
        }
    }
    -1
}

fn hilbert_rule(
    k: &LocalField,
    (va, ea): (u32, RingElem),
    (vb, eb): (u32, RingElem),
    a: &RingElem,
    b: &RingElem,
) -> Result<Option<i8>> {
    if k.p != 2 {
        let p = k.p;
        let u = legendre(ea.coords[0], p);
        let v = legendre(eb.coords[0], p);
        let sign = if (va * vb) as u64 * ((p - 1) / 2) % 2 == 1 { -1 } else { 1 };
        let up = if vb == 1 { u } else { 1 };
        let vp = if va == 1 { v } else { 1 };
        return Ok(Some(sign * up * vp));
    }
    if is_square(k, a)? || is_square(k, b)? {
        return Ok(Some(1));
    }
    if is_square(k, &k.neg(&k.mul(a, b)))? {
        return Ok(Some(1));
    }
    let four_o = DefectResult::Defect(2 * k.e);
    if k.is_unit(b) && quadratic_defect(k, b)? == four_o {
        return Ok(Some(if va == 1 { -1 } else { 1 }));
    }
    if k.is_unit(a) && quadratic_defect(k, a)? == four_o {
        return Ok(Some(if vb == 1 { -1 } else { 1 }));
    }
    if k.q == 2 && k.e == 1 {
        let (u, v) = (ea.coords[0] % 8, eb.coords[0] % 8);
        let eps = |u: u64| ((u - 1) / 2) % 2;
        let omega = |u: u64| ((u * u - 1) / 8) % 2;
        let s = eps(u) * eps(v) + va as u64 * omega(v) + vb as u64 * omega(u);
        return Ok(Some(if s % 2 == 1 { -1 } else { 1 }));
    }
    Ok(None)
}

/// Hilbert symbol (a, b) ∈ {±1}.
///
/// Odd p: tame formula. p = 2: square and defect-4𝔬 rules plus the classical
/// ℚ₂ formula, always cross-checked by [`hilbert_by_search`]; a disagreement
/// is reported as [`Error::Internal`]. For odd p the search runs when the
/// residue ring modulo ϖ³ has at most 4096 elements.
pub fn hilbert_symbol(k: &LocalField, a: &RingElem, b: &RingElem) -> Result<i8> {
    static MEMO: Memo<(LocalField, RingElem, RingElem), i8> = OnceLock::new();
    if k.is_zero(a) || k.is_zero(b) {
        return Err(Error::ZeroArgument("Hilbert symbol"));
    }
    let l = 2 * k.e + 3;
    let na = normalize_mod_squares(k, a, l + 2 * k.e + 2)?;
    let nb = normalize_mod_squares(k, b, l + 2 * k.e + 2)?;
    let pi = k.uniformizer();
    let build = |(v, e): &(u32, RingElem)| -> RingElem {
        let e = k.lift(e, k.work_level().min(k.max_level()).max(e.level));
        if *v == 1 {
            k.mul(&e, &pi)
        } else {
            e
        }
    };
    let (an, bn) = (build(&na), build(&nb));
    let key = (k.clone(), k.reduce(&an, l + 2), k.reduce(&bn, l + 2));
    let memo = MEMO.get_or_init(Default::default);
    if let Some(&s) = memo.lock().unwrap().get(&key) {
        return Ok(s);
    }
    let rule = hilbert_rule(k, na, nb, &an, &bn)?;
    let searched = (k.p == 2 || k.size(l) <= 4096).then(|| hilbert_by_search(k, &an, &bn));
    let s = match (rule, searched) {
        (Some(r), Some(s)) if r != s => {
            return Err(Error::Internal(format!(
                "Hilbert symbol rule {r} disagrees with search {s} for ({}, {})",
                k.format(a),
                k.format(b)
            )))
        }
        (Some(r), _) => r,
        (None, Some(s)) => s,
        (None, None) => return Err(Error::Internal("no Hilbert symbol method".into())),
    };
    memo.lock().unwrap().insert(key, s);
    Ok(s)
}

/// meas{x ∈ 𝔬 : x² ≡ ρ mod ϖ^ℓ}, by the three cases of the defect lemma.
pub fn count_square_roots(k: &LocalField, rho: &RingElem, ell: u32) -> Result<BigRational> {
    let ceil_half = k.abs_uniformizer_pow(ell.div_ceil(2) as i64);
    let Some(v) = k.ord(rho) else {
        return Ok(ceil_half);
    };
    match quadratic_defect(k, rho)? {
        DefectResult::Defect(d) if d < ell => Ok(BigRational::zero()),
        DefectResult::Defect(_) => Ok(ceil_half),
        DefectResult::Square => {
            let h = v / 2;
            if ell > 2 * k.e + 2 * h {
                // 2·|ϖ^ℓ / 2η|
                let two = BigRational::from_integer(BigInt::from(2));
                Ok(two * k.abs_uniformizer_pow((ell - k.e - h) as i64))
            } else {
                Ok(ceil_half)
            }
        }
    }
}

/// A unit a of defect ϖ𝔬 with (a, Δ) = −1, or ϖ when Δ has defect 4𝔬.
pub fn pick_companion_unit(k: &LocalField, delta: &RingElem) -> Result<RingElem> {
    if !k.is_unit(delta) {
        return Err(Error::OutOfRange("companion unit needs a unit Δ".into()));
    }
    match quadratic_defect(k, delta)? {
        DefectResult::Square => Err(Error::OutOfRange("Δ is a square".into())),
        DefectResult::Defect(d) if d == 2 * k.e => Ok(k.uniformizer()),
        DefectResult::Defect(_) => {
            for a in k.unit_representatives() {
                if quadratic_defect(k, &a)? == DefectResult::Defect(1)
                    && hilbert_symbol(k, &a, delta)? == -1
                {
                    return Ok(a);
                }
            }
            Err(Error::Internal(format!("no companion unit for {}", k.format(delta))))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_descriptors() {
        let k = LocalField::q2();
        assert_eq!((k.q(), k.e()), (2, 1));
        let r = LocalField::q2_sqrt2();
        assert_eq!((r.q(), r.e()), (2, 2));
        let g = LocalField::q4();
        assert_eq!((g.q(), g.e()), (4, 1));
        assert_eq!(LocalField::qp(3).unwrap().e(), 0);
        assert_eq!(make_field(4, 1, Variant::Unramified), Err(Error::NotPrime(4)));
        assert!(make_field(2, 2, Variant::Eisenstein { c1: 0, c0: -2 }).is_err());
        assert!(make_field(2, 1, Variant::Eisenstein { c1: 0, c0: 4 }).is_err());
        assert!(make_field(3, 2, Variant::Unramified).is_err());
    }

    #[test]
    fn field_json_round_trip() {
        for k in [LocalField::q2(), LocalField::q4(), LocalField::q2_sqrt2()] {
            let s = serde_json::to_string(&k).unwrap();
            let back: LocalField = serde_json::from_str(&s).unwrap();
            assert_eq!(back, k);
        }
        let s = serde_json::to_string(&LocalField::q2_sqrt2()).unwrap();
        assert_eq!(s, r#"{"p":2,"f":1,"variant":"eisenstein","c1":0,"c0":-2}"#);
        let x = LocalField::q4().elem2_at(3, 5, 4);
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"level":4,"coords":["3","5"]}"#);
        assert_eq!(serde_json::from_str::<RingElem>(&s).unwrap(), x);
    }

    #[test]
    fn ord_examples() {
        let k = LocalField::q2();
        assert_eq!(k.ord(&k.elem_at(12, 10)), Some(2));
        assert_eq!(k.ord(&k.zero(5)), None);
        let r = LocalField::q2_sqrt2();
        assert_eq!(r.ord(&r.reduce(&r.uniformizer_pow(3), 8)), Some(3));
        assert_eq!(r.ord(&r.elem_at(2, 8)), Some(2));
    }

    #[test]
    fn ramified_uniformizer_squares_to_two() {
        let r = LocalField::q2_sqrt2();
        assert_eq!(r.square(&r.uniformizer()), r.elem(2));
    }

    #[test]
    fn galois_theta_relation() {
        let g = LocalField::q4();
        let t = g.theta().unwrap();
        let s = g.add(&g.add(&g.square(&t), &t), &g.elem(1));
        assert!(g.is_zero(&s));
    }

    #[test]
    fn division_by_uniformizer() {
        for k in [LocalField::q2(), LocalField::q4(), LocalField::q2_sqrt2(), LocalField::qp(3).unwrap()] {
            let pi = k.uniformizer();
            for x in [k.elem(5), k.elem2(3, 7), k.elem2(-11, 2)] {
                let y = k.mul(&x, &pi);
                let back = k.div_uniformizer(&y).unwrap();
                assert_eq!(back, k.reduce(&x, back.level));
            }
        }
    }

    #[test]
    fn defect_examples() {
        let k = LocalField::q2();
        assert_eq!(quadratic_defect(&k, &k.elem(17)).unwrap(), DefectResult::Square);
        assert_eq!(quadratic_defect(&k, &k.elem(-1)).unwrap(), DefectResult::Defect(1));
        assert_eq!(quadratic_defect(&k, &k.elem(5)).unwrap(), DefectResult::Defect(2));
        assert_eq!(quadratic_defect(&k, &k.elem(20)).unwrap(), DefectResult::Defect(4));
        assert_eq!(quadratic_defect(&k, &k.elem(2)).unwrap(), DefectResult::Defect(1));
        assert!(quadratic_defect(&k, &k.zero(10)).is_err());
        assert!(matches!(
            quadratic_defect_at(&k, &k.elem(5), 3),
            Err(Error::InsufficientLevel { need: 4, have: 3 })
        ));
    }

    #[test]
    fn hilbert_examples() {
        let k = LocalField::q2();
        assert_eq!(hilbert_symbol(&k, &k.elem(2), &k.elem(5)).unwrap(), -1);
        assert_eq!(hilbert_symbol(&k, &k.elem(-1), &k.elem(-1)).unwrap(), -1);
        assert_eq!(hilbert_symbol(&k, &k.elem(3), &k.elem(3)).unwrap(), -1);
        assert_eq!(hilbert_symbol(&k, &k.elem(1), &k.elem(6)).unwrap(), 1);
        assert!(hilbert_symbol(&k, &k.elem(0), &k.elem(3)).is_err());
    }

    #[test]
    fn square_root_examples() {
        let k = LocalField::q2();
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(count_square_roots(&k, &k.elem(1), 3).unwrap(), half);
        assert_eq!(count_square_roots(&k, &k.elem(1), 0).unwrap(), BigRational::one());
        assert_eq!(count_square_roots(&k, &k.elem(-1), 1).unwrap(), half);
        assert_eq!(count_square_roots(&k, &k.elem(-1), 2).unwrap(), BigRational::zero());
    }

    #[test]
    fn companion_examples() {
        let k = LocalField::q2();
        assert_eq!(pick_companion_unit(&k, &k.elem(5)).unwrap(), k.elem(2));
        assert_eq!(pick_companion_unit(&k, &k.elem(-1)).unwrap(), k.elem(3));
        assert_eq!(pick_companion_unit(&k, &k.elem(3)).unwrap(), k.elem(3));
        assert!(pick_companion_unit(&k, &k.elem(9)).is_err());
    }
}
