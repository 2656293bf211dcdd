//! Library counts against the independent enumerator in tests/common.

mod common;

use common::brute_level;
use dyadic::counting::{count_level_histogram, count_level_naive, x_series, SeriesMode};
use dyadic::local_ring::LocalField;
use dyadic::qform::DiagonalForm;
use dyadic::series::{x_closed, ClosedFormCase, Var};
use num_rational::BigRational;

fn int(c: i64) -> (u64, u64) {
    (c as u64, 0)
}

#[test]
fn q2_levels_match_enumeration() {
    let k = LocalField::q2();
    for coeffs in [vec![1], vec![3, 3, -1], vec![1, -3], vec![1, 1, -3, -3], vec![1, -5, 10]] {
        let b = DiagonalForm::from_ints(&k, &coeffs).unwrap();
        let raw: Vec<(u64, u64)> = coeffs.iter().map(|&c| int(c)).collect();
        for rho in [0i64, 1, 2, 3, 4, 12] {
            for ell in 0..=3 {
                let expect = brute_level(false, &raw, int(rho), ell);
                let rho_el = k.elem(rho);
                assert_eq!(count_level_histogram(&b, &rho_el, ell).unwrap(), expect, "{coeffs:?} ρ = {rho} ℓ = {ell}");
                if coeffs.len() <= 3 {
                    assert_eq!(count_level_naive(&b, &rho_el, ell).unwrap(), expect);
                }
            }
        }
    }
}

#[test]
fn q4_levels_match_enumeration() {
    let k = LocalField::q4();
    // a = 1 + 2θ, D = 1 + 4θ
    let a = k.elem2(1, 2);
    let d = k.elem2(1, 4);
    type Case = (Vec<dyadic::local_ring::RingElem>, Vec<(u64, u64)>);
    let cases: Vec<Case> = vec![
        (vec![k.elem(1), k.elem(-3)], vec![int(1), int(-3)]),
        (vec![a, a, k.elem(-1)], vec![(1, 2), (1, 2), int(-1)]),
        (vec![k.elem(1), k.neg(&d)], vec![int(1), ((-1i64) as u64, (-4i64) as u64)]),
    ];
    for (coeffs, raw) in cases {
        let b = DiagonalForm::new(&k, &coeffs).unwrap();
        for rho in [0i64, 1, 4] {
            for ell in 0..=2 {
                let expect = brute_level(true, &raw, int(rho), ell);
                assert_eq!(count_level_histogram(&b, &k.elem(rho), ell).unwrap(), expect, "{} ρ = {rho} ℓ = {ell}", b.format());
            }
        }
    }
}

#[test]
fn closed_forms_match_enumeration_on_q2() {
    let cases = [
        (ClosedFormCase::M1Square, vec![1]),
        (ClosedFormCase::M2F, vec![1, -3]),
        (ClosedFormCase::M3I, vec![3, 3, -1]),
        (ClosedFormCase::M4, vec![1, 1, -3, -3]),
    ];
    let half = BigRational::new(1.into(), 2.into());
    for (case, coeffs) in cases {
        let raw: Vec<(u64, u64)> = coeffs.iter().map(|&c| int(c)).collect();
        let pg = x_closed(case, 1).unwrap();
        for t in 0..=1u32 {
            let rho = 1i64 << (2 * t);
            let series = pg.at(t).unwrap().specialize(Var::Iq, &half).unwrap().z_series(3).unwrap();
            for (ell, c) in series.iter().enumerate() {
                let expect = brute_level(false, &raw, int(rho), ell as u32);
                assert_eq!(*c, expect, "{case} T = {t} ℓ = {ell}");
            }
        }
    }
}

#[test]
fn square_root_series_example() {
    let k = LocalField::q2();
    let b = DiagonalForm::from_ints(&k, &[1]).unwrap();
    let s = x_series(&b, &k.elem(1), 4, SeriesMode::Stabilized { verify: 2 }).unwrap();
    let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    assert_eq!(s.coeffs, vec![r(1, 2), r(1, 2), r(1, 2), r(1, 4), r(1, 8)]);
}
