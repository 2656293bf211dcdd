//! Diagonal quadratic forms: invariants, anisotropy, anisotropic
//! representatives of every class, and the Witt chain used for the global
//! tables over ℚ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::local_ring::{
    hilbert_symbol, is_square, pick_companion_unit, quadratic_defect, square_class_rep,
    DefectResult, LocalField, RingElem,
};

/// B(x) = Σ aᵢxᵢ² plus `planes` hyperbolic blocks 2xy, over 𝔬.
///
/// Coefficients are normalized at construction to 0 ≤ ord aᵢ ≤ 1 by removing
/// even powers of ϖ; the removed exponents are kept in `scalings`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalForm {
    pub field: LocalField,
    pub coeffs: Vec<RingElem>,
    #[serde(default, skip_serializing_if = "is_zero_u32")]
    pub planes: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scalings: Vec<u32>,
}

fn is_zero_u32(x: &u32) -> bool {
    *x == 0
}

impl DiagonalForm {
    pub fn new(field: &LocalField, coeffs: &[RingElem]) -> Result<Self> {
        let mut out = Vec::with_capacity(coeffs.len());
        let mut scalings = Vec::with_capacity(coeffs.len());
        let top = field.work_level();
        for c in coeffs {
            let (v, eps) = field.unit_part(c)?;
            let unit = field.lift(&eps, eps.level.max(top).min(field.max_level()));
            let a = if v % 2 == 1 { field.mul(&unit, &field.uniformizer()) } else { unit };
            out.push(a);
            scalings.push(v / 2);
        }
        if scalings.iter().all(|&h| h == 0) {
            scalings.clear();
        }
        Ok(DiagonalForm { field: field.clone(), coeffs: out, planes: 0, scalings })
    }

    pub fn from_ints(field: &LocalField, coeffs: &[i64]) -> Result<Self> {
        let els: Vec<RingElem> = coeffs.iter().map(|&c| field.elem(c)).collect();
        Self::new(field, &els)
    }

    pub fn empty(field: &LocalField) -> Self {
        DiagonalForm { field: field.clone(), coeffs: Vec::new(), planes: 0, scalings: Vec::new() }
    }

    /// The same form with `k` more hyperbolic blocks 2xy.
    pub fn with_planes(mut self, k: u32) -> Self {
        self.planes += k;
        self
    }

    /// Number of variables.
    pub fn n(&self) -> usize {
        self.coeffs.len() + 2 * self.planes as usize
    }

    /// Diagonal coefficients over the field, each block 2xy counted as ⟨1, −1⟩.
    pub fn field_coeffs(&self) -> Vec<RingElem> {
        let mut c = self.coeffs.clone();
        for _ in 0..self.planes {
            c.push(self.field.elem(1));
            c.push(self.field.elem(-1));
        }
        c
    }

    pub fn format(&self) -> String {
        let mut terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| format!("{}*x_{}^2", self.field.format(a), i + 1))
            .collect();
        let base = self.coeffs.len();
        for j in 0..self.planes as usize {
            terms.push(format!("2*x_{}*x_{}", base + 2 * j + 1, base + 2 * j + 2));
        }
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

/// Square-class kind of a discriminant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscKind {
    UnitSquare,
    /// Unit of quadratic defect ϖ^d𝔬 (d = 2e is the 4𝔬 class).
    UnitDefect(u32),
    NonUnit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormInvariants {
    pub m: usize,
    /// Canonical representative of the signed discriminant's square class.
    pub disc: RingElem,
    pub disc_kind: DiscKind,
    pub hmi: i8,
}

#[derive(Serialize)]
struct InvariantsRepr<'a> {
    m: usize,
    disc_repr: &'a RingElem,
    disc_kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<u32>,
    hmi: i8,
}

impl Serialize for FormInvariants {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (kind, d) = match self.disc_kind {
            DiscKind::UnitSquare => ("unit_square", None),
            DiscKind::UnitDefect(d) => ("unit_defect", Some(d)),
            DiscKind::NonUnit => ("non_unit", None),
        };
        InvariantsRepr { m: self.m, disc_repr: &self.disc, disc_kind: kind, d, hmi: self.hmi }
            .serialize(s)
    }
}

pub fn disc_kind(k: &LocalField, disc: &RingElem) -> Result<DiscKind> {
    if !k.is_unit(disc) {
        return Ok(DiscKind::NonUnit);
    }
    Ok(match quadratic_defect(k, disc)? {
        DefectResult::Square => DiscKind::UnitSquare,
        DefectResult::Defect(d) => DiscKind::UnitDefect(d),
    })
}

fn signed_disc(k: &LocalField, coeffs: &[RingElem]) -> RingElem {
    let m = coeffs.len();
    let mut d = k.elem(if (m / 2) % 2 == 1 { -1 } else { 1 });
    for a in coeffs {
        d = k.mul(&d, a);
    }
    d
}

fn hmi_of(k: &LocalField, coeffs: &[RingElem]) -> Result<i8> {
    let mut h = 1;
    for i in 0..coeffs.len() {
        for j in i + 1..coeffs.len() {
            h *= hilbert_symbol(k, &coeffs[i], &coeffs[j])?;
        }
    }
    Ok(h)
}

fn invariants_of(k: &LocalField, coeffs: &[RingElem]) -> Result<FormInvariants> {
    let raw = signed_disc(k, coeffs);
    let disc = square_class_rep(k, &raw)?;
    Ok(FormInvariants {
        m: coeffs.len(),
        disc,
        disc_kind: disc_kind(k, &disc)?,
        hmi: hmi_of(k, coeffs)?,
    })
}

/// Dimension, signed discriminant class and Hasse–Minkowski invariant.
pub fn invariants(b: &DiagonalForm) -> Result<FormInvariants> {
    invariants_of(&b.field, &b.field_coeffs())
}

/// The classification rule on (m, Δ, hmi).
pub fn anisotropic_by_rule(k: &LocalField, m: usize, disc: &RingElem, hmi: i8) -> Result<bool> {
    Ok(match m {
        0 | 1 => true,
        2 => !is_square(k, disc)?,
        3 => hmi == -hilbert_symbol(k, &k.elem(-1), disc)?,
        4 => {
            is_square(k, disc)?
                && hmi == -hilbert_symbol(k, &k.elem(-1), &k.elem(-1))?
        }
        _ => false,
    })
}

/// Number of x ∈ (𝔬/ϖ^N)^m with Σ aᵢxᵢ² ≡ 0, optionally restricted to x ∈ ϖ𝔬.
fn zero_count(k: &LocalField, coeffs: &[RingElem], level: u32, non_primitive: bool) -> u128 {
    let n = k.size(level) as usize;
    let mut dist = vec![0u128; n];
    dist[0] = 1;
    for a in coeffs {
        let a = k.reduce(a, level);
        let mut h = vec![0u128; n];
        for x in k.residues(level) {
            if non_primitive && k.is_unit(&x) {
                continue;
            }
            h[k.index(&k.mul(&a, &k.square(&x)))] += 1;
        }
        let support: Vec<(RingElem, u128)> = h
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (k.from_index(i, level), c))
            .collect();
        let mut next = vec![0u128; n];
        for (i, &c) in dist.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let xi = k.from_index(i, level);
            for (v, d) in &support {
                next[k.index(&k.add(&xi, v))] += c * d;
            }
        }
        dist = next;
    }
    dist[0]
}

/// Primitive zero of the form modulo ϖ^{3e+3}, or `None` when the residue
/// ring there is too large to search.
pub fn has_primitive_zero(k: &LocalField, coeffs: &[RingElem]) -> Option<bool> {
    let level = 3 * k.e() + 3;
    if k.size(level) > 1 << 13 {
        return None;
    }
    if coeffs.is_empty() {
        return Some(false);
    }
    Some(zero_count(k, coeffs, level, false) > zero_count(k, coeffs, level, true))
}

/// Anisotropy by the classification rule, cross-checked against a search for
/// primitive zeros; disagreement is an internal error.
pub fn is_anisotropic(b: &DiagonalForm) -> Result<bool> {
    let k = &b.field;
    let coeffs = b.field_coeffs();
    let inv = invariants_of(k, &coeffs)?;
    let rule = anisotropic_by_rule(k, inv.m, &inv.disc, inv.hmi)?;
    if let Some(zero) = has_primitive_zero(k, &coeffs) {
        if zero == rule {
            return Err(Error::Internal(format!(
                "anisotropy rule says {rule} but zero search says {} for {}",
                !zero,
                b.format()
            )));
        }
    }
    Ok(rule)
}

/// First unit of the traversal with the given defect kind, or ϖ for
/// `NonUnit`.
pub fn disc_of_kind(k: &LocalField, kind: DiscKind) -> Result<RingElem> {
    if kind == DiscKind::NonUnit {
        return Ok(k.uniformizer());
    }
    for u in k.unit_representatives() {
        if disc_kind(k, &u)? == kind {
            return Ok(u);
        }
    }
    Err(Error::Unrealizable(format!("no unit with discriminant kind {kind:?}")))
}

fn first_four_o_unit(k: &LocalField) -> Result<RingElem> {
    disc_of_kind(k, DiscKind::UnitDefect(2 * k.e()))
}

/// A concrete anisotropic diagonal form with m variables, signed
/// discriminant in the class of `disc`, and invariant `hmi`.
pub fn anisotropic_representative(
    k: &LocalField,
    m: usize,
    disc: &RingElem,
    hmi: i8,
) -> Result<DiagonalForm> {
    if hmi != 1 && hmi != -1 {
        return Err(Error::OutOfRange(format!("hmi must be ±1, got {hmi}")));
    }
    let kind = disc_kind(k, disc)?;
    let neg = |x: &RingElem| k.neg(x);
    let coeffs: Vec<RingElem> = match m {
        0 => {
            if !is_square(k, disc)? || hmi != 1 {
                return Err(Error::Unrealizable("empty form has Δ = 1 and hmi = +1".into()));
            }
            vec![]
        }
        1 => {
            if hmi != 1 {
                return Err(Error::Unrealizable("unary forms have hmi = +1".into()));
            }
            vec![*disc]
        }
        2 => {
            // a(x₁² − Δx₂²) has hmi (a, Δ).
            let a = match (kind, hmi) {
                (DiscKind::UnitSquare, _) => {
                    return Err(Error::Unrealizable("binary form with square Δ is hyperbolic".into()))
                }
                (DiscKind::NonUnit, 1) => k.elem(1),
                (DiscKind::NonUnit, _) => first_four_o_unit(k)?,
                (DiscKind::UnitDefect(d), -1) if d < 2 * k.e() => pick_companion_unit(k, disc)?,
                (DiscKind::UnitDefect(_), -1) => k.uniformizer(),
                (DiscKind::UnitDefect(_), _) => k.elem(1),
            };
            vec![a, neg(&k.mul(&a, disc))]
        }
        3 => {
            if hmi != -hilbert_symbol(k, &k.elem(-1), disc)? {
                return Err(Error::Unrealizable(format!(
                    "ternary form with this Δ is anisotropic only for hmi = {}",
                    -hmi
                )));
            }
            match kind {
                DiscKind::NonUnit => {
                    let a = first_four_o_unit(k)?;
                    vec![k.elem(1), neg(&a), k.mul(&a, disc)]
                }
                DiscKind::UnitDefect(d) if d < 2 * k.e() => {
                    let a = pick_companion_unit(k, disc)?;
                    vec![k.elem(1), neg(&a), k.mul(&a, disc)]
                }
                _ => {
                    let a = pick_companion_unit(k, &k.elem(-1))?;
                    vec![a, a, neg(disc)]
                }
            }
        }
        4 => {
            if !is_square(k, disc)? {
                return Err(Error::Unrealizable("quaternary anisotropic forms have Δ = 1".into()));
            }
            let a = pick_companion_unit(k, &k.elem(-1))?;
            let coeffs = vec![k.elem(1), k.elem(1), neg(&a), neg(&a)];
            let h = hmi_of(k, &coeffs)?;
            if h != hmi {
                return Err(Error::Unrealizable(format!(
                    "the anisotropic quaternary class has hmi = {h}"
                )));
            }
            coeffs
        }
        _ => return Err(Error::Unrealizable(format!("no anisotropic form in dimension {m}"))),
    };
    let b = DiagonalForm::new(k, &coeffs)?;
    let inv = invariants(&b)?;
    if inv.m != m || inv.hmi != hmi || !is_square(k, &k.mul(&inv.disc, disc))? {
        return Err(Error::Internal(format!("representative {} has wrong invariants", b.format())));
    }
    if !is_anisotropic(&b)? {
        return Err(Error::Unrealizable(format!(
            "m = {m}, {kind:?}, hmi = {hmi} is isotropic"
        )));
    }
    Ok(b)
}

/// Position in the Witt chain over ℚ₂ starting from B^{n+2} with determinant
/// and invariant 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WittProfile {
    pub n: u32,
    pub k: u32,
    pub m: u32,
    /// Signed discriminant of every B^j in the chain, ±1.
    pub delta: i8,
    pub hmi: i8,
}

/// Splits hyperbolic planes off one at a time until the kernel is
/// anisotropic over ℚ₂.
pub fn witt_profile(n: u32) -> Result<WittProfile> {
    if n < 3 {
        return Err(Error::OutOfRange(format!(
            "n = {n}: need n ≥ 3 so the stabilizer is isotropic at 2"
        )));
    }
    let q2 = LocalField::q2();
    let delta: i8 = if (n / 2 + 1).is_multiple_of(2) { 1 } else { -1 };
    let delta_el = q2.elem(delta as i64);
    let mut hmi: i8 = 1;
    for j in 1..=(n + 2) / 2 {
        let det: i64 = if j % 2 == 0 { 1 } else { -1 };
        hmi *= hilbert_symbol(&q2, &q2.elem(det), &q2.elem(-1))?;
        let m = n + 2 - 2 * j;
        if anisotropic_by_rule(&q2, m as usize, &delta_el, hmi)? {
            return Ok(WittProfile { n, k: j - 1, m, delta, hmi });
        }
    }
    Err(Error::Internal(format!("no anisotropic kernel for n = {n}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariants_examples() {
        let k = LocalField::q2();
        let b = DiagonalForm::from_ints(&k, &[1, -5]).unwrap();
        let inv = invariants(&b).unwrap();
        assert_eq!(inv.m, 2);
        assert_eq!(inv.disc_kind, DiscKind::UnitDefect(2));
        assert_eq!(inv.hmi, 1);
        let inv0 = invariants(&DiagonalForm::empty(&k)).unwrap();
        assert_eq!((inv0.disc_kind, inv0.hmi), (DiscKind::UnitSquare, 1));
    }

    #[test]
    fn anisotropy_examples() {
        let k = LocalField::q2();
        let f = |c: &[i64]| is_anisotropic(&DiagonalForm::from_ints(&k, c).unwrap()).unwrap();
        assert!(f(&[1, 1, 1, 1]));
        assert!(!f(&[1, -1]));
        assert!(!f(&[1, -17]));
        assert!(!f(&[1, 1, 1, 1, 1]));
    }

    #[test]
    fn normalization_records_scalings() {
        let k = LocalField::q2();
        let b = DiagonalForm::from_ints(&k, &[12, 3]).unwrap();
        assert_eq!(b.coeffs[0], k.elem(3));
        assert_eq!(b.scalings, vec![1, 0]);
    }

    #[test]
    fn witt_examples() {
        let p = witt_profile(6).unwrap();
        assert_eq!((p.k, p.m, p.delta), (3, 0, 1));
        let p = witt_profile(4).unwrap();
        assert_eq!((p.k, p.m, p.delta, p.hmi), (1, 2, -1, -1));
        let p = witt_profile(9).unwrap();
        assert_eq!((p.k, p.m, p.delta, p.hmi), (3, 3, -1, 1));
        assert!(witt_profile(2).is_err());
    }

    #[test]
    fn quaternary_representative() {
        let k = LocalField::q2();
        let b = anisotropic_representative(&k, 4, &k.elem(1), 1).unwrap();
        assert_eq!(b.coeffs, vec![k.elem(1), k.elem(1), k.elem(-3), k.elem(-3)]);
        assert!(anisotropic_representative(&k, 4, &k.elem(1), -1).is_err());
    }
}
