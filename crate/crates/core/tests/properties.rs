//! Property tests for the ring, form, counting, series and period layers.

use dyadic::counting::{count_level_histogram, count_level_naive};
use dyadic::local_ring::{
    count_square_roots, hilbert_symbol, quadratic_defect, same_square_class, DefectResult,
    LocalField, RingElem,
};
use dyadic::periods::{evaluate_period, Chi};
use dyadic::qform::{invariants, is_anisotropic, witt_profile, DiagonalForm};
use dyadic::series::{cases_for_field, representative_for_case, RationalFunction, Var};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;

fn fields() -> Vec<LocalField> {
    vec![LocalField::q2(), LocalField::q4(), LocalField::q2_sqrt2()]
}

fn field_strategy() -> impl Strategy<Value = LocalField> {
    (0usize..3).prop_map(|i| fields().swap_remove(i))
}

/// A nonzero element ϖ^j·(unit) at the working level.
fn elem_with_ord(k: &LocalField, seed: (u64, u64), j: u32) -> RingElem {
    let l = k.work_level();
    let m = k.moduli(l);
    let mut x = k.elem2_at((seed.0 % m[0]) as i64, (seed.1 % m[1].max(1)) as i64, l);
    if !k.is_unit(&x) {
        x = k.add(&x, &k.one(l));
    }
    k.mul(&x, &k.uniformizer_pow(j))
}

fn unit(k: &LocalField, seed: (u64, u64)) -> RingElem {
    elem_with_ord(k, seed, 0)
}

fn small_coeff(k: &LocalField, seed: (u64, u64), odd: bool) -> RingElem {
    let u = unit(k, seed);
    if odd {
        k.mul(&u, &k.uniformizer())
    } else {
        u
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ord_is_additive(k in field_strategy(), s1 in any::<(u64, u64)>(), s2 in any::<(u64, u64)>(), i in 0u32..10, j in 0u32..10) {
        let x = elem_with_ord(&k, s1, i);
        let y = elem_with_ord(&k, s2, j);
        prop_assert_eq!(k.ord(&k.mul(&x, &y)), Some(i + j));
    }

    #[test]
    fn defect_shifts_by_twice_ord(k in field_strategy(), s1 in any::<(u64, u64)>(), s2 in any::<(u64, u64)>(), v in 0u32..4, j in 0u32..4) {
        let rho = elem_with_ord(&k, s1, v);
        let eta = elem_with_ord(&k, s2, j);
        let before = quadratic_defect(&k, &rho).unwrap();
        let after = quadratic_defect(&k, &k.mul(&k.square(&eta), &rho)).unwrap();
        let expect = match before {
            DefectResult::Square => DefectResult::Square,
            DefectResult::Defect(d) => DefectResult::Defect(d + 2 * j),
        };
        prop_assert_eq!(after, expect);
    }

    #[test]
    fn hilbert_symmetric_and_multiplicative(
        k in field_strategy(),
        s in any::<[(u64, u64); 3]>(),
        odd in any::<[bool; 3]>(),
    ) {
        let a = small_coeff(&k, s[0], odd[0]);
        let b = small_coeff(&k, s[1], odd[1]);
        let c = small_coeff(&k, s[2], odd[2]);
        let ab = hilbert_symbol(&k, &a, &b).unwrap();
        prop_assert_eq!(ab, hilbert_symbol(&k, &b, &a).unwrap());
        let abc = hilbert_symbol(&k, &a, &k.mul(&b, &c)).unwrap();
        prop_assert_eq!(abc, ab * hilbert_symbol(&k, &a, &c).unwrap());
    }

    #[test]
    fn invariants_stable_under_permutation_and_unit_squares(
        k in field_strategy(),
        s in any::<[(u64, u64); 3]>(),
        odd in any::<[bool; 3]>(),
        t in any::<(u64, u64)>(),
        rot in 0usize..3,
    ) {
        let coeffs: Vec<RingElem> = (0..3).map(|i| small_coeff(&k, s[i], odd[i])).collect();
        let base = invariants(&DiagonalForm::new(&k, &coeffs).unwrap()).unwrap();
        let mut rotated = coeffs.clone();
        rotated.rotate_left(rot);
        prop_assert_eq!(&invariants(&DiagonalForm::new(&k, &rotated).unwrap()).unwrap(), &base);
        let mut scaled = coeffs.clone();
        scaled[rot] = k.mul(&scaled[rot], &k.square(&unit(&k, t)));
        prop_assert_eq!(&invariants(&DiagonalForm::new(&k, &scaled).unwrap()).unwrap(), &base);
    }

    #[test]
    fn histogram_matches_naive(
        k in field_strategy(),
        s in any::<[(u64, u64); 3]>(),
        odd in any::<[bool; 3]>(),
        n in 1usize..=3,
        rho_seed in any::<(u64, u64)>(),
        rho_ord in 0u32..4,
        ell in 0u32..=3,
    ) {
        let coeffs: Vec<RingElem> = (0..n).map(|i| small_coeff(&k, s[i], odd[i])).collect();
        let b = DiagonalForm::new(&k, &coeffs).unwrap();
        prop_assume!(k.size(ell + k.e()).pow(n as u32) <= 1 << 18);
        let rho = elem_with_ord(&k, rho_seed, rho_ord);
        prop_assert_eq!(count_level_naive(&b, &rho, ell).unwrap(), count_level_histogram(&b, &rho, ell).unwrap());
    }

    #[test]
    fn counts_invariant_under_unit_square_target(
        k in field_strategy(),
        s in any::<[(u64, u64); 2]>(),
        rho_seed in any::<(u64, u64)>(),
        u_seed in any::<(u64, u64)>(),
        ell in 0u32..=4,
    ) {
        let coeffs: Vec<RingElem> = (0..2).map(|i| small_coeff(&k, s[i], i == 1)).collect();
        let b = DiagonalForm::new(&k, &coeffs).unwrap();
        let rho = elem_with_ord(&k, rho_seed, 1);
        let u2 = k.square(&unit(&k, u_seed));
        prop_assert_eq!(
            count_level_histogram(&b, &k.mul(&u2, &rho), ell).unwrap(),
            count_level_histogram(&b, &rho, ell).unwrap()
        );
    }

    #[test]
    fn anisotropic_bound(seed in any::<[(u64, u64); 4]>(), ords in any::<[u8; 4]>(), zeros in any::<[bool; 4]>()) {
        // max |aᵢxᵢ²| ≥ |B(x)| ≥ max |4aᵢxᵢ²|, i.e. min ord ≤ ord B ≤ min ord + 2e.
        for k in fields() {
            for case in cases_for_field(&k) {
                let b = representative_for_case(&k, case, None).unwrap();
                let coeffs = b.field_coeffs();
                if coeffs.is_empty() || zeros[..coeffs.len()].iter().all(|&z| z) {
                    continue;
                }
                let mut value = k.zero(k.work_level());
                let mut lowest = u32::MAX;
                for (i, a) in coeffs.iter().enumerate() {
                    if zeros[i] {
                        continue;
                    }
                    let x = elem_with_ord(&k, seed[i], (ords[i] % 6) as u32);
                    let t = k.mul(a, &k.square(&x));
                    lowest = lowest.min(k.ord(&t).unwrap());
                    value = k.add(&value, &t);
                }
                let v = k.ord(&value).unwrap();
                prop_assert!(lowest <= v && v <= lowest + 2 * k.e(), "{} {case}: ord B = {v}, min {lowest}", k.name());
            }
        }
    }

    #[test]
    fn chi1_multiplicative_on_odd_integers(a in 0u64..1_000_000, b in 0u64..1_000_000) {
        let (a, b) = (2 * a + 1, 2 * b + 1);
        prop_assert_eq!(Chi::Mod4.at(a * b), Chi::Mod4.at(a) * Chi::Mod4.at(b));
    }

    #[test]
    fn specialization_is_a_ring_map(c in prop::collection::vec((-5i64..5, 0i32..3, 0i32..3), 1..5), x in 1i64..7) {
        let mut f = RationalFunction::zero();
        for (coef, ez, ea) in &c {
            f = f + RationalFunction::int(*coef) * RationalFunction::monomial([*ez, 0, *ea]);
        }
        let g = RationalFunction::one() - RationalFunction::monomial([1, 1, 0]);
        let xv = BigRational::new(BigInt::from(x), BigInt::from(x + 1));
        let lhs = (&f * &g).specialize(Var::Av, &xv).unwrap();
        let rhs = f.specialize(Var::Av, &xv).unwrap() * g.specialize(Var::Av, &xv).unwrap();
        prop_assert_eq!(lhs, rhs);
        let json = serde_json::to_string(&f).unwrap();
        let back: RationalFunction = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, f);
    }
}

#[test]
fn square_root_counts_match_enumeration_to_level_8() {
    for k in fields() {
        let mut reps: Vec<RingElem> = Vec::new();
        for u in k.unit_representatives() {
            if reps.iter().all(|r| !same_square_class(&k, r, &u).unwrap()) {
                reps.push(u);
            }
        }
        let top = if k.q() > 2 { 6 } else { 8 };
        let mut targets = vec![k.zero(k.work_level())];
        for j in 0..4 {
            targets.extend(reps.iter().map(|u| k.mul(u, &k.uniformizer_pow(j))));
        }
        for ell in 0..=top {
            let elems: Vec<RingElem> = k.residues(ell).collect();
            let squares: Vec<RingElem> = elems.iter().map(|x| k.square(x)).collect();
            for rho in &targets {
                let t = k.reduce(rho, ell);
                let hits = squares.iter().filter(|s| **s == t).count();
                let expect = BigRational::new(BigInt::from(hits), BigInt::from(elems.len()));
                assert_eq!(count_square_roots(&k, rho, ell).unwrap(), expect, "{} ρ = {} ℓ = {ell}", k.name(), k.format(rho));
            }
        }
    }
}

#[test]
fn defect_four_units_form_one_square_class() {
    for k in fields() {
        let four_o = DefectResult::Defect(2 * k.e());
        let level = (2 * k.e() + 4).min(8);
        let units: Vec<RingElem> = k
            .residues(level)
            .filter(|x| k.is_unit(x))
            .map(|x| k.lift(&x, k.work_level()))
            .filter(|x| quadratic_defect(&k, x).unwrap() == four_o)
            .collect();
        assert!(!units.is_empty());
        for u in &units {
            assert!(same_square_class(&k, &units[0], u).unwrap(), "{}: {}", k.name(), k.format(u));
        }
    }
}

#[test]
fn representatives_are_anisotropic() {
    for k in fields() {
        for case in cases_for_field(&k) {
            let b = representative_for_case(&k, case, None).unwrap();
            assert!(is_anisotropic(&b).unwrap(), "{} {case}", k.name());
        }
    }
}

#[test]
fn hasse_invariant_has_period_four() {
    // Peel hyperbolic planes off B^{n+2} (det 1, hmi 1) via the composition rule.
    let k = LocalField::q2();
    let mut det: i64 = 1;
    let mut hmi: i8 = 1;
    let mut seq = vec![hmi];
    for _ in 0..8 {
        // B = C ⊕ H, det C = −det B, hmi B = (det C, −1) hmi C.
        det = -det;
        hmi *= hilbert_symbol(&k, &k.elem(det), &k.elem(-1)).unwrap();
        seq.push(hmi);
    }
    assert_eq!(seq, vec![1, -1, -1, 1, 1, -1, -1, 1, 1]);
}

#[test]
fn witt_profile_has_period_eight() {
    for n in 3..=10 {
        let a = witt_profile(n).unwrap();
        let b = witt_profile(n + 8).unwrap();
        assert_eq!((a.m, a.delta, a.hmi, a.k + 4), (b.m, b.delta, b.hmi, b.k));
    }
}

#[test]
fn zero_target_scaling() {
    for k in fields() {
        for case in cases_for_field(&k) {
            let b = representative_for_case(&k, case, None).unwrap();
            if b.n() > 3 {
                continue;
            }
            let zero = k.zero(k.work_level());
            let q_n = BigRational::new(1.into(), BigInt::from(k.q()).pow(b.n() as u32));
            for ell in k.e() + 2..=6 {
                if k.size(ell + k.e()) > 1 << 14 {
                    break;
                }
                let lhs = count_level_histogram(&b, &zero, ell).unwrap();
                let rhs = count_level_histogram(&b, &zero, ell - 2).unwrap() * &q_n;
                assert_eq!(lhs, rhs, "{} {case} ℓ = {ell}", k.name());
            }
        }
    }
}

#[test]
fn period_converges_within_bound() {
    let mut prev = evaluate_period(6, 10, 13).unwrap();
    for p in [29u64, 61, 127, 251] {
        let next = evaluate_period(6, 10, p).unwrap();
        let diff = (&next.exact - &prev.exact).abs();
        let diff = num_traits::ToPrimitive::to_f64(&diff).unwrap();
        assert!(diff <= prev.bound, "P = {p}: moved {diff} beyond bound {}", prev.bound);
        assert!(next.bound <= prev.bound / 2.0, "bound did not halve at P = {p}");
        prev = next;
    }
}
