//! Closed forms of X(β; ϖ^{2T}) for anisotropic forms of dimension ≤ 4.
//!
//! Each case is written once as a list of terms c·r^T valid in a regime of T.
//! Small T outside the stable regime become explicit exceptional values.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::poly::Var;
use super::ratfunc::RationalFunction as Rf;
use crate::error::{Error, Result};
use crate::local_ring::{hilbert_symbol, LocalField, RingElem};
use crate::qform::{
    anisotropic_representative, disc_of_kind, invariants, DiagonalForm, DiscKind, FormInvariants,
};

/// Anisotropic classes with a closed form, by dimension and invariants.
///
/// `M2E`, `M2F`, `M3*` and `M4` are only available when e = 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum ClosedFormCase {
    /// Empty form.
    M0,
    /// ⟨Δ⟩, Δ a unit of defect ϖ^d𝔬.
    M1Defect { d: u32 },
    /// ⟨1⟩.
    M1Square,
    /// ⟨Δ⟩ with ord Δ = 1.
    M1Odd,
    /// ord Δ = 1, hmi = +1.
    M2A,
    /// ord Δ = 1, hmi = −1.
    M2B,
    /// Δ of defect 4𝔬, hmi = −1.
    M2C,
    /// Δ of odd defect ϖ^d𝔬, hmi = −1.
    M2D { d: u32 },
    /// Δ of defect 4𝔬, hmi = +1.
    M2E,
    /// Δ of odd defect, hmi = +1.
    M2F,
    /// Ternary, ord Δ = 1.
    M3G,
    /// Ternary, Δ of odd defect.
    M3H,
    /// Ternary, Δ a square.
    M3I,
    /// Ternary, Δ of defect 4𝔬.
    M3J,
    /// Quaternary.
    M4,
}

use ClosedFormCase::*;

impl ClosedFormCase {
    pub fn m(&self) -> usize {
        match self {
            M0 => 0,
            M1Defect { .. } | M1Square | M1Odd => 1,
            M2A | M2B | M2C | M2D { .. } | M2E | M2F => 2,
            M3G | M3H | M3I | M3J => 3,
            M4 => 4,
        }
    }

    /// Cases whose closed form holds only for e = 1.
    pub fn needs_unramified(&self) -> bool {
        matches!(self, M2E | M2F | M3G | M3H | M3I | M3J | M4)
    }

    pub fn tag(&self) -> String {
        match self {
            M0 => "m0".into(),
            M1Defect { d } => format!("m1_defect:{d}"),
            M1Square => "m1_square".into(),
            M1Odd => "m1_odd".into(),
            M2A => "m2_a".into(),
            M2B => "m2_b".into(),
            M2C => "m2_c".into(),
            M2D { d } => format!("m2_d:{d}"),
            M2E => "m2_e".into(),
            M2F => "m2_f".into(),
            M3G => "m3_g".into(),
            M3H => "m3_h".into(),
            M3I => "m3_i".into(),
            M3J => "m3_j".into(),
            M4 => "m4".into(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let (head, d) = match s.split_once(':') {
            Some((h, d)) => {
                (h, Some(d.parse::<u32>().map_err(|_| Error::Parse(format!("bad defect in {s}")))?))
            }
            None => (s, None),
        };
        Ok(match (head, d) {
            ("m0", None) => M0,
            ("m1_defect", Some(d)) => M1Defect { d },
            ("m1_square", None) => M1Square,
            ("m1_odd", None) => M1Odd,
            ("m2_a", None) => M2A,
            ("m2_b", None) => M2B,
            ("m2_c", None) => M2C,
            ("m2_d", Some(d)) => M2D { d },
            ("m2_e", None) => M2E,
            ("m2_f", None) => M2F,
            ("m3_g", None) => M3G,
            ("m3_h", None) => M3H,
            ("m3_i", None) => M3I,
            ("m3_j", None) => M3J,
            ("m4", None) => M4,
            _ => return Err(Error::Parse(format!("unknown closed-form case {s}"))),
        })
    }
}

impl fmt::Display for ClosedFormCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

/// The closed-form case of an anisotropic form with the given invariants.
pub fn case_for(k: &LocalField, inv: &FormInvariants) -> Result<ClosedFormCase> {
    let four_o = 2 * k.e();
    Ok(match (inv.m, inv.disc_kind, inv.hmi) {
        (0, _, _) => M0,
        (1, DiscKind::UnitSquare, _) => M1Square,
        (1, DiscKind::UnitDefect(d), _) => M1Defect { d },
        (1, DiscKind::NonUnit, _) => M1Odd,
        (2, DiscKind::NonUnit, 1) => M2A,
        (2, DiscKind::NonUnit, _) => M2B,
        (2, DiscKind::UnitDefect(d), -1) if d == four_o => M2C,
        (2, DiscKind::UnitDefect(d), _) if d == four_o => M2E,
        (2, DiscKind::UnitDefect(d), -1) => M2D { d },
        (2, DiscKind::UnitDefect(_), _) => M2F,
        (3, DiscKind::NonUnit, _) => M3G,
        (3, DiscKind::UnitDefect(d), _) if d < four_o => M3H,
        (3, DiscKind::UnitSquare, _) => M3I,
        (3, DiscKind::UnitDefect(_), _) => M3J,
        (4, _, _) => M4,
        _ => {
            return Err(Error::Unrealizable(format!(
                "no anisotropic class with m = {}, {:?}, hmi = {}",
                inv.m, inv.disc_kind, inv.hmi
            )))
        }
    })
}

/// X(T) for T ≥ 0 as exceptional values followed by Σ c_j r_j^T.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseGeometric {
    /// X(0), …, X(T₀ − 1).
    pub exceptional: Vec<Rf>,
    /// Pairs (c_j, r_j), r_j a monomial; the sum is X(T) for T ≥ T₀.
    pub tail: Vec<(Rf, Rf)>,
    /// X(β; 0).
    pub zero_value: Option<Rf>,
}

impl PiecewiseGeometric {
    pub fn t0(&self) -> u32 {
        self.exceptional.len() as u32
    }

    pub fn at(&self, t: u32) -> Result<Rf> {
        if let Some(x) = self.exceptional.get(t as usize) {
            return Ok(x.clone());
        }
        eval_terms(&self.tail, t as i32)
    }

    /// Limit of the tail: the terms with ratio 1.
    pub fn limit(&self) -> Rf {
        self.tail
            .iter()
            .filter(|(_, r)| *r == Rf::one())
            .fold(Rf::zero(), |acc, (c, _)| acc + c)
    }
}

fn eval_terms(terms: &[(Rf, Rf)], t: i32) -> Result<Rf> {
    let mut acc = Rf::zero();
    for (c, r) in terms {
        acc = acc + c * &r.pow(t)?;
    }
    Ok(acc)
}

/// Integer ceiling and floor of n/2 for any sign.
fn ceil2(n: i64) -> i32 {
    (n.div_euclid(2) + n.rem_euclid(2)) as i32
}
fn floor2(n: i64) -> i32 {
    n.div_euclid(2) as i32
}

struct Sym {
    z: Rf,
    iq: Rf,
    w: Rf,
    two: Rf,
    one: Rf,
}

impl Sym {
    fn new(e: u32) -> Self {
        let z = Rf::var(Var::Z);
        let iq = Rf::var(Var::Iq);
        let w = &z * &iq;
        let two = iq.pow(e as i32).unwrap();
        Sym { z, iq, w, two, one: Rf::one() }
    }
    fn iq(&self, k: i32) -> Rf {
        self.iq.pow(k).unwrap()
    }
    fn w(&self, k: i32) -> Rf {
        self.w.pow(k).unwrap()
    }
    fn zw(&self, k: i32) -> Rf {
        (&self.z * &self.w).pow(k).unwrap()
    }
    /// 1/(1 − x)
    fn geo(&self, x: &Rf) -> Rf {
        &self.one / &(&self.one - x)
    }
}

type Terms = Vec<(Rf, Rf)>;

/// The regime in force at T, as terms c·r^T (empty means X = 0).
fn regime(case: ClosedFormCase, e: u32, t: u32) -> Result<Terms> {
    let s = Sym::new(e);
    let (e_, t_) = (e as i64, t as i64);
    let ce = ceil2(e_);
    let fe = floor2(e_);
    let one = Rf::one();
    let zw = s.zw(1);
    let w2 = s.w(2);
    let terms: Terms = match case {
        M0 => {
            if 2 * t_ < e_ {
                vec![]
            } else {
                let c = s.geo(&s.z);
                vec![(c.clone(), one.clone()), (-(&s.z.pow(1 - e as i32)? * &c), s.z.pow(2)?)]
            }
        }
        M1Defect { d } => {
            let d_ = d as i64;
            if e_ > d_ + 2 * t_ {
                vec![]
            } else {
                let a = &s.iq(ce) * &s.geo(&zw);
                let b = &(&s.w * &s.iq(fe)) * &s.geo(&zw);
                vec![
                    (a.clone(), one.clone()),
                    (-(&a * &s.zw(ceil2(d_ + 1 - e_))), zw.clone()),
                    (b.clone(), one.clone()),
                    (-(&b * &s.zw(floor2(d_ + 1 - e_))), zw.clone()),
                ]
            }
        }
        M1Square => {
            let we1 = s.w(e as i32 + 1);
            let c0 = &(&s.iq(ce) + &(&s.w * &s.iq(fe))) * &s.geo(&zw);
            let c1 = &(-(&(&(&one + &s.z) * &we1) * &s.geo(&zw))) + &(&(&Rf::int(2) * &we1) * &s.geo(&s.w));
            vec![(c0, one.clone()), (c1, zw.clone())]
        }
        M1Odd => {
            if 2 * t_ < e_ {
                vec![]
            } else {
                let a = &s.iq(fe) * &s.geo(&zw);
                let b = &(&s.z * &s.iq(ce)) * &s.geo(&zw);
                vec![
                    (a.clone(), one.clone()),
                    (-(&a * &s.zw(1 - ce)), zw.clone()),
                    (b.clone(), one.clone()),
                    (-(&b * &s.zw(-fe)), zw.clone()),
                ]
            }
        }
        M2A | M2B => {
            let c = &s.two * &s.geo(&s.w);
            let sign = if case == M2A { Rf::one() } else { Rf::int(-1) };
            vec![(c.clone(), one.clone()), (&(&sign * &c) * &s.w(e as i32 + 1), w2.clone())]
        }
        M2C => {
            if 2 * t_ < e_ {
                vec![]
            } else {
                let base = &s.iq(fe) + &(&s.z * &s.iq(ce));
                let zwe = &(&s.z * &s.w(e as i32)) * &(&s.w + &one);
                let we_zw2 = &(&s.w(e as i32) * &(&s.z + &w2)) * &s.geo(&w2);
                if t_ < e_ {
                    // (T − e)^− = T − e, (T − e)^+ = 0
                    vec![
                        (&base * &s.geo(&zw), one.clone()),
                        (-(&(&zwe * &s.zw(-(e as i32))) * &s.geo(&zw)), zw.clone()),
                    ]
                } else {
                    vec![
                        (&(&(&base - &zwe) * &s.geo(&zw)) + &we_zw2, one.clone()),
                        (-(&we_zw2 * &s.w(-2 * e as i32)), w2.clone()),
                    ]
                }
            }
        }
        M2D { d } => {
            let d_ = d as i64;
            if d % 2 == 0 {
                return Err(Error::OutOfRange(format!("m2_d needs odd defect, got {d}")));
            }
            if d == 1 && e > 1 {
                let c = &s.two * &s.geo(&s.w);
                vec![
                    (c.clone(), one.clone()),
                    (-(&c * &s.w(2 * ceil2(e_ + 1) - e as i32)), w2.clone()),
                ]
            } else if 2 * t_ + 2 > e_ && e_ + 1 >= d_ && (d > 1 || e == 1) {
                let c = &(&s.two * &s.iq(((1 - d_) / 2) as i32)) * &s.geo(&s.w);
                vec![(c.clone(), one.clone()), (-(&c * &s.w(2 - e as i32)), w2.clone())]
            } else if 2 * t_ + 2 > e_ && d_ > e_ + 1 {
                let c0 = &(&(&s.iq(ce) + &(&s.w * &s.iq(fe))) * &s.geo(&zw))
                    - &(&(&(&s.z.pow((d_ - e_) as i32)? * &s.iq(((d_ + 1) / 2) as i32))
                        * &(&s.z - &s.w))
                        * &(&s.geo(&s.w) * &s.geo(&zw)));
                let c1 = -(&(&s.w(2 - e as i32) * &s.iq((e_ + (1 - d_) / 2) as i32)) * &s.geo(&s.w));
                vec![(c0, one.clone()), (c1, w2.clone())]
            } else if 2 * t_ + 2 <= e_ && d > 1 {
                vec![]
            } else {
                return Err(Error::Internal(format!("m2_d: no regime for e = {e}, d = {d}, T = {t}")));
            }
        }
        M2E => {
            if t == 0 {
                vec![(&s.two * &s.geo(&s.w), one.clone())]
            } else {
                let g = s.geo(&w2);
                vec![
                    (&(&s.two * &(&one + &s.z)) * &g, one.clone()),
                    (
                        &(&(&s.two * &(&(&s.z * &s.w) + &s.w(3))) * &g) * &s.w(-2),
                        w2.clone(),
                    ),
                ]
            }
        }
        M2F => {
            let c = &s.two * &s.geo(&s.w);
            vec![(c.clone(), one.clone()), (&c * &s.w, w2.clone())]
        }
        M3G | M3H | M3I | M3J => {
            let r = &w2 * &s.iq;
            let g = s.geo(&r);
            let head = &(&s.two * &(&one + &(&s.w * &s.iq))) * &g;
            let tail_den = &s.geo(&s.w) * &g;
            let iq2 = s.iq(2);
            match case {
                M3G if t == 0 => vec![(&s.two * &s.geo(&s.w), one.clone())],
                M3G => vec![
                    (&(&s.two * &(&one + &s.w)) * &g, one.clone()),
                    (&(&one - &(&w2 * &iq2)) * &tail_den, r.clone()),
                ],
                M3H => vec![
                    (head, one.clone()),
                    (&(&(&s.two * &s.w) * &(&one - &(&w2 * &iq2))) * &tail_den, r.clone()),
                ],
                M3I => vec![(head.clone(), one.clone()), (-(&head * &r), r.clone())],
                _ => vec![
                    (head, one.clone()),
                    (
                        &(&(&(&s.two * &r) * &(&one + &s.w)) * &(&one - &(&s.w * &s.iq)))
                            * &tail_den,
                        r.clone(),
                    ),
                ],
            }
        }
        M4 => {
            if t == 0 {
                vec![(&s.two * &s.geo(&s.w), one.clone())]
            } else {
                let wiq = &s.w * &s.iq;
                let r = &w2 * &s.iq(2);
                vec![
                    (&s.two * &s.geo(&wiq), one.clone()),
                    (
                        &(&one - &(&s.w * &s.iq(2))) * &(&s.geo(&s.w) * &s.geo(&wiq)),
                        r,
                    ),
                ]
            }
        }
    };
    Ok(terms)
}

/// First T from which the regime no longer changes.
fn stable_from(case: ClosedFormCase, e: u32) -> u32 {
    let e_ = e as i64;
    match case {
        M0 | M1Odd => ceil2(e_) as u32,
        M1Defect { d } => ceil2((e_ - d as i64).max(0)) as u32,
        M2C => e,
        M2D { d } if d == 1 && e > 1 => 0,
        M2D { .. } => ceil2(e_ - 1).max(0) as u32,
        M2E | M3G | M4 => 1,
        _ => 0,
    }
}

/// The closed form of X(β; ϖ^{2T}) for the case over a field with e = ord 2.
pub fn x_closed(case: ClosedFormCase, e: u32) -> Result<PiecewiseGeometric> {
    if case.needs_unramified() && e != 1 {
        return Err(Error::Unsupported(format!(
            "{case}: this closed form is valid only for unramified fields (e = 1), got e = {e}"
        )));
    }
    if let M1Defect { d } | M2D { d } = case {
        if d == 0 || d > 2 * e || (d < 2 * e && d % 2 == 0) {
            return Err(Error::OutOfRange(format!("{case}: impossible unit defect for e = {e}")));
        }
    }
    let t0 = stable_from(case, e);
    let exceptional = (0..t0)
        .map(|t| eval_terms(&regime(case, e, t)?, t as i32))
        .collect::<Result<Vec<_>>>()?;
    let tail = regime(case, e, t0)?;
    for (_, r) in &tail {
        if r.as_monomial().is_none() {
            return Err(Error::Internal(format!("{case}: non-monomial ratio {r}")));
        }
    }
    let mut pg = PiecewiseGeometric { exceptional, tail, zero_value: None };
    pg.zero_value = Some(pg.limit());
    Ok(pg)
}

/// Every case with a closed form over the field, with the defects that occur.
pub fn cases_for_field(k: &LocalField) -> Vec<ClosedFormCase> {
    let e = k.e();
    let mut v = vec![M0, M1Square, M1Odd];
    let odd: Vec<u32> = (1..2 * e).step_by(2).collect();
    v.extend(odd.iter().map(|&d| M1Defect { d }));
    v.push(M1Defect { d: 2 * e });
    v.extend([M2A, M2B, M2C]);
    v.extend(odd.iter().map(|&d| M2D { d }));
    if e == 1 {
        v.extend([M2E, M2F, M3G, M3H, M3I, M3J, M4]);
    }
    v
}

/// The representative form of a case. `disc` picks a particular
/// discriminant class among those of the case's kind; by default the first
/// unit of the traversal with the right defect (or ϖ) is used.
pub fn representative_for_case(
    k: &LocalField,
    case: ClosedFormCase,
    disc: Option<&RingElem>,
) -> Result<DiagonalForm> {
    let e = k.e();
    let kind = match case {
        M0 | M1Square | M3I | M4 => DiscKind::UnitSquare,
        M1Odd | M2A | M2B | M3G => DiscKind::NonUnit,
        M1Defect { d } | M2D { d } => DiscKind::UnitDefect(d),
        M2C | M2E | M3J => DiscKind::UnitDefect(2 * e),
        M2F | M3H => DiscKind::UnitDefect(1),
    };
    let delta = match disc {
        Some(d) => *d,
        None => disc_of_kind(k, kind)?,
    };
    let m = case.m();
    let hmi = match case {
        M0 | M1Square | M1Odd | M1Defect { .. } | M2A | M2E | M2F => 1,
        M2B | M2C | M2D { .. } => -1,
        M3G | M3H | M3I | M3J => -hilbert_symbol(k, &k.elem(-1), &delta)?,
        M4 => -hilbert_symbol(k, &k.elem(-1), &k.elem(-1))?,
    };
    let b = anisotropic_representative(k, m, &delta, hmi)?;
    let got = case_for(k, &invariants(&b)?)?;
    if got != case {
        return Err(Error::Internal(format!("representative {} classifies as {got}", b.format())));
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn series(pg: &PiecewiseGeometric, t: u32, q: i64, order: usize) -> Vec<BigRational> {
        let iq = BigRational::new(1.into(), q.into());
        pg.at(t).unwrap().specialize(Var::Iq, &iq).unwrap().z_series(order).unwrap()
    }

    #[test]
    fn empty_form_values() {
        let pg = x_closed(M0, 1).unwrap();
        assert!(pg.at(0).unwrap().is_zero());
        let z = Rf::var(Var::Z);
        assert_eq!(pg.at(1).unwrap(), &Rf::one() + &z);
        assert_eq!(pg.zero_value.unwrap(), &Rf::one() / &(&Rf::one() - &z));
    }

    #[test]
    fn unit_square_t0_matches_levels() {
        let pg = x_closed(M1Square, 1).unwrap();
        let s = series(&pg, 0, 2, 4);
        let h = |n, d| BigRational::new(BigInt::from(n), BigInt::from(d));
        use num_bigint::BigInt;
        assert_eq!(s, vec![h(1, 2), h(1, 2), h(1, 2), h(1, 4), h(1, 8)]);
    }

    #[test]
    fn second_method_rejects_ramified() {
        assert!(matches!(x_closed(M2F, 2), Err(Error::Unsupported(_))));
        assert!(x_closed(M2F, 1).is_ok());
    }

    #[test]
    fn tags_round_trip() {
        for c in cases_for_field(&LocalField::q2()).into_iter().chain(cases_for_field(&LocalField::q2_sqrt2())) {
            assert_eq!(ClosedFormCase::parse(&c.tag()).unwrap(), c);
        }
    }

    #[test]
    fn binary_f_formula() {
        // |2|(1 + w^{2T+1})/(1 − w)
        let pg = x_closed(M2F, 1).unwrap();
        let s = Sym::new(1);
        for t in 0..4 {
            let expect = &(&s.two * &(&Rf::one() + &s.w(2 * t + 1))) * &s.geo(&s.w);
            assert_eq!(pg.at(t as u32).unwrap(), expect);
        }
    }
}
