//! Generating functions as exact rational functions in z, iq, av, the closed
//! forms of X, and the machinery that turns level counts into X and X into Π.

pub mod closed;
pub mod poly;
pub mod ratfunc;

use num_rational::BigRational;

pub use closed::{
    case_for, cases_for_field, representative_for_case, x_closed, ClosedFormCase, PiecewiseGeometric,
};
pub use poly::{Poly, Var};
pub use ratfunc::RationalFunction;

use crate::error::{Error, Result};

type Rf = RationalFunction;

pub fn z() -> Rf {
    Rf::var(Var::Z)
}
pub fn iq() -> Rf {
    Rf::var(Var::Iq)
}
pub fn av() -> Rf {
    Rf::var(Var::Av)
}
/// w = z·q^{-1}
pub fn w() -> Rf {
    z() * iq()
}
/// u = z²·q^{-n}
pub fn u(n: usize) -> Rf {
    Rf::monomial([2, n as i32, 0])
}

/// Z(s) = 1/(1 − M) where M = q^{-s} is given as a rational function, e.g.
/// Z(α) ↦ M = av, Z(β + k + 1) ↦ M = z·iq^{k+1}.
pub fn zeta_z(m: &Rf) -> Rf {
    &Rf::one() / &(&Rf::one() - m)
}

fn rat(x: &BigRational) -> Rf {
    Rf::constant(x.clone())
}

/// X(β; ϖ^{2T}) from the levels X_0..X_{2T+e+1}.
pub fn x_from_levels(levels: &[BigRational], e: u32, t: u32) -> Result<Rf> {
    let top = (2 * t + e + 1) as usize;
    if levels.len() != top + 1 {
        return Err(Error::WrongLength { expected: top + 1, got: levels.len() });
    }
    let mut acc = Rf::zero();
    for (l, x) in levels[..top].iter().enumerate() {
        acc = acc + rat(x) * z().pow(l as i32)?;
    }
    Ok(acc + z().pow(top as i32)? * zeta_z(&w()) * rat(&levels[top]))
}

/// X(β; 0) from the levels X_0..X_{e+1} of an n-variable form.
pub fn x_from_levels_zero(levels: &[BigRational], e: u32, n: usize) -> Result<Rf> {
    let e_ = e as usize;
    if levels.len() != e_ + 2 {
        return Err(Error::WrongLength { expected: e_ + 2, got: levels.len() });
    }
    let mut acc = Rf::zero();
    for (l, x) in levels[..e_].iter().enumerate() {
        acc = acc + rat(x) * z().pow(l as i32)?;
    }
    let g = zeta_z(&u(n));
    acc = acc + z().pow(e as i32)? * &g * rat(&levels[e_]);
    Ok(acc + z().pow(e as i32 + 1)? * &g * rat(&levels[e_ + 1]))
}

/// Π(α, β) from X at T < e, at T = e, and at ρ = 0, with |2|^α = av^e.
pub fn pi_from_x(x: &PiecewiseGeometric, e: u32, n: usize) -> Result<Rf> {
    let zero = x
        .zero_value
        .as_ref()
        .ok_or_else(|| Error::OutOfRange("X(β; 0) missing".into()))?;
    let a = av();
    let au = &a * &u(n);
    let mut acc = Rf::zero();
    for t in 0..e {
        acc = acc + a.pow(t as i32)? * x.at(t)?;
    }
    let ae = a.pow(e as i32)?;
    acc = acc + &ae * zeta_z(&au) * x.at(e)?;
    Ok(acc + &ae * (&a - &au) * zeta_z(&a) * zeta_z(&au) * zero)
}

/// Σ_{T ≥ 0} av^T X(T) summed exactly.
pub fn pi_geometric(x: &PiecewiseGeometric) -> Result<Rf> {
    let a = av();
    let mut acc = Rf::zero();
    for (t, xt) in x.exceptional.iter().enumerate() {
        acc = acc + a.pow(t as i32)? * xt;
    }
    let t0 = x.t0() as i32;
    for (c, r) in &x.tail {
        let ar = &a * r;
        let (_, e) = ar
            .as_monomial()
            .ok_or_else(|| Error::NonContracting(format!("{r} is not a monomial")))?;
        if e.iter().any(|&k| k < 0) || e[Var::Av as usize] < 1 {
            return Err(Error::NonContracting(format!("a·{r}")));
        }
        acc = acc + c * ar.pow(t0)? * zeta_z(&ar);
    }
    Ok(acc)
}

/// Σ_{0 ≤ ℓ < L} z^ℓ iq^{⌈(ℓ+o)/2⌉} term by term.
pub fn dyadic_sum_direct(o: u32, l: u32) -> Result<Rf> {
    let mut acc = Rf::zero();
    for i in 0..l {
        acc = acc + z().pow(i as i32)? * iq().pow((i + o).div_ceil(2) as i32)?;
    }
    Ok(acc)
}

/// The two-geometric-series closed form of [`dyadic_sum_direct`].
pub fn dyadic_sum_closed(o: u32, l: u32) -> Result<Rf> {
    let zw = z() * w();
    let g = zeta_z(&zw);
    let first = iq().pow(o.div_ceil(2) as i32)? * (Rf::one() - zw.pow(l.div_ceil(2) as i32)?);
    let second = w() * iq().pow((o / 2) as i32)? * (Rf::one() - zw.pow((l / 2) as i32)?);
    Ok((first + second) * g)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// From B^m to B^{m+2k}.
    AddPlanes,
    /// From B^{m+2k} back to B^m.
    RemovePlanes,
}

/// Z(β+1)/Z(β+k+1) = (1 − z·iq^{k+1})/(1 − z·iq).
pub fn plane_prefactor(k: u32) -> Rf {
    (Rf::one() - Rf::monomial([1, k as i32 + 1, 0])) / (Rf::one() - Rf::monomial([1, 1, 0]))
}

/// X^{m+2k}(β) = Z(β+1)/Z(β+k+1) · X^m(β+k), and its inverse. The same
/// identity holds for Π, whose av is untouched.
pub fn dimension_reduce(x: &Rf, k: u32, dir: Direction) -> Result<Rf> {
    match dir {
        Direction::AddPlanes => {
            let shifted = x.substitute(Var::Z, &Rf::monomial([1, k as i32, 0]))?;
            Ok(plane_prefactor(k) * shifted)
        }
        Direction::RemovePlanes => {
            let back = Rf::monomial([1, -(k as i32), 0]);
            let pre = plane_prefactor(k).substitute(Var::Z, &back)?;
            x.substitute(Var::Z, &back)?.try_div(&pre)
        }
    }
}

/// Local factor Π^n(α − β − n, β) / (|2|^α Z(α)) for B^n = B^m ⊕ k planes,
/// up to a multiplicative constant. The result is in z, iq, av.
pub fn local_factor(case: ClosedFormCase, e: u32, n: usize, k: u32) -> Result<Rf> {
    let m = case.m();
    if m + 2 * k as usize != n {
        return Err(Error::OutOfRange(format!("{case} with {k} planes has dimension {}", m + 2 * k as usize)));
    }
    let pi_m = pi_geometric(&x_closed(case, e)?)?;
    let shifted = pi_m.substitute(Var::Z, &Rf::monomial([1, k as i32, 0]))?;
    let pi_n = plane_prefactor(k) * shifted;
    let a_sub = Rf::monomial([-1, -(n as i32), 1]);
    let lf = pi_n.substitute(Var::Av, &a_sub)?;
    lf.try_div(&(av().pow(e as i32)? * zeta_z(&av())))
}

/// [`local_factor`] at β = 0.
pub fn local_factor_beta0(case: ClosedFormCase, e: u32, n: usize, k: u32) -> Result<Rf> {
    local_factor(case, e, n, k)?.specialize(Var::Z, &BigRational::from_integer(1.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn zeta_examples() {
        assert_eq!(zeta_z(&av()), Rf::one() / (Rf::one() - av()));
        assert_eq!(zeta_z(&w()), Rf::one() / (Rf::one() - z() * iq()));
        let m = av().pow(2).unwrap() * Rf::monomial([0, 5, 0]);
        assert_eq!(zeta_z(&m), Rf::one() / (Rf::one() - m.clone()));
    }

    #[test]
    fn levels_examples() {
        let one = BigRational::one();
        let x = x_from_levels_zero(&[one.clone(), one.clone(), one.clone()], 1, 0).unwrap();
        assert_eq!(x, zeta_z(&z()));
        let x = x_from_levels(&[r(1, 2), r(1, 2), r(1, 2)], 1, 0).unwrap();
        let expect = rat(&r(1, 2)) + z() * rat(&r(1, 2)) + z().pow(2).unwrap() * rat(&r(1, 2)) * zeta_z(&w());
        assert_eq!(x, expect);
        let x = x_from_levels(&[r(1, 1), r(1, 2), r(0, 1), r(0, 1), r(0, 1)], 1, 1).unwrap();
        assert_eq!(x, Rf::one() + z() * rat(&r(1, 2)));
        assert!(matches!(x_from_levels(&[r(1, 1)], 1, 1), Err(Error::WrongLength { .. })));
    }

    #[test]
    fn constant_series_sums() {
        let c = Rf::int(3);
        let pg = PiecewiseGeometric {
            exceptional: vec![],
            tail: vec![(c.clone(), Rf::one())],
            zero_value: Some(c.clone()),
        };
        let g = pi_geometric(&pg).unwrap();
        assert_eq!(g, c.clone() * zeta_z(&av()));
        assert_eq!(pi_from_x(&pg, 1, 0).unwrap(), g);
    }

    #[test]
    fn non_contracting_rejected() {
        let pg = PiecewiseGeometric {
            exceptional: vec![],
            tail: vec![(Rf::one(), Rf::monomial([0, 0, -1]))],
            zero_value: None,
        };
        assert!(matches!(pi_geometric(&pg), Err(Error::NonContracting(_))));
    }

    #[test]
    fn dimension_reduction_round_trip() {
        let x = Rf::one() + z();
        let up = dimension_reduce(&x, 2, Direction::AddPlanes).unwrap();
        assert_eq!(dimension_reduce(&up, 2, Direction::RemovePlanes).unwrap(), x);
        assert_eq!(dimension_reduce(&x, 0, Direction::AddPlanes).unwrap(), x);
    }

    #[test]
    fn dyadic_sum_small() {
        for o in 0..5 {
            for l in 0..10 {
                assert_eq!(dyadic_sum_direct(o, l).unwrap(), dyadic_sum_closed(o, l).unwrap());
            }
        }
    }
}
