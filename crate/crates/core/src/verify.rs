//! Verification suites shared by the `verify` command: closed forms against
//! counting, Hensel stabilization, the small counting lemmas, the assembly
//! identities, dimension reduction, the symbol layer, and the period tables.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::counting::{
    conic_measure, count_level_histogram, count_level_naive, x_series, SeriesMode,
};
use crate::error::Result;
use crate::local_ring::{
    count_square_roots, hilbert_by_search, hilbert_symbol, quadratic_defect, same_square_class, DefectResult,
    LocalField, RingElem,
};
use crate::periods::verify_table_row;
use crate::qform::{is_anisotropic, DiagonalForm};
use crate::series::{
    cases_for_field, dimension_reduce, dyadic_sum_closed, dyadic_sum_direct, pi_from_x,
    pi_geometric, representative_for_case, x_closed, x_from_levels, ClosedFormCase, Direction,
    RationalFunction, Var,
};

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<CheckResult>,
}

impl Report {
    fn new(suite: &str) -> Self {
        Report { suite: suite.into(), checks: Vec::new() }
    }
    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(CheckResult { name: name.into(), passed, detail: detail.into() });
    }
    fn push_result(&mut self, name: impl Into<String>, r: Result<(bool, String)>) {
        match r {
            Ok((ok, d)) => self.push(name, ok, d),
            Err(e) => self.push(name, false, format!("error: {e}")),
        }
    }
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// The fields the suites run on: ℚ₂, the unramified q = 4 field, ℚ₂(√2).
pub fn test_fields() -> Vec<LocalField> {
    vec![LocalField::q2(), LocalField::q4(), LocalField::q2_sqrt2()]
}

/// One closed-form instance: a field, a case and a concrete representative.
pub struct Instance {
    pub field: LocalField,
    pub case: ClosedFormCase,
    pub form: DiagonalForm,
}

/// Every case on every test field, plus a second discriminant class where a
/// kind contains several (ℚ₂ defect ϖ𝔬; ℚ₂(√2) defect ϖ³𝔬).
pub fn closed_form_instances() -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    for k in test_fields() {
        for case in cases_for_field(&k) {
            let form = representative_for_case(&k, case, None)?;
            out.push(Instance { field: k.clone(), case, form });
        }
    }
    let q2 = LocalField::q2();
    for case in [ClosedFormCase::M1Defect { d: 1 }, ClosedFormCase::M2D { d: 1 }] {
        let form = representative_for_case(&q2, case, Some(&q2.elem(7)))?;
        out.push(Instance { field: q2.clone(), case, form });
    }
    let r = LocalField::q2_sqrt2();
    let pi3 = r.add(&r.elem(1), &r.uniformizer_pow(3));
    for case in [ClosedFormCase::M1Defect { d: 3 }, ClosedFormCase::M2D { d: 3 }] {
        let form = representative_for_case(&r, case, Some(&pi3))?;
        out.push(Instance { field: r.clone(), case, form });
    }
    Ok(out)
}

fn inv_q(k: &LocalField) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(k.q()))
}

fn closed_series(k: &LocalField, case: ClosedFormCase, t: u32, order: usize) -> Result<Vec<BigRational>> {
    x_closed(case, k.e())?.at(t)?.specialize(Var::Iq, &inv_q(k))?.z_series(order)
}

fn fmt_vec(v: &[BigRational]) -> String {
    v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
}

/// Closed forms expanded to `order` against directly counted series.
pub fn verify_closed_forms(t_max: u32, order: u32) -> Result<Report> {
    let mut rep = Report::new("closed forms vs counting");
    for inst in closed_form_instances()? {
        let k = &inst.field;
        let r = (|| -> Result<(bool, String)> {
            for t in 0..=t_max {
                let rho = k.uniformizer_pow(2 * t);
                let oracle = x_series(&inst.form, &rho, order, SeriesMode::Direct)?.coeffs;
                let closed = closed_series(k, inst.case, t, order as usize)?;
                if oracle != closed {
                    return Ok((
                        false,
                        format!("T = {t}: counted [{}] closed [{}]", fmt_vec(&oracle), fmt_vec(&closed)),
                    ));
                }
            }
            Ok((true, String::new()))
        })();
        rep.push_result(format!("{} {} [{}]", k.name(), inst.case, inst.form.format()), r);
    }
    Ok(rep)
}

/// X_{ℓ+1} = q^{-1} X_ℓ for three levels past ord(2ρ), m ≤ 3.
pub fn verify_stabilization() -> Result<Report> {
    let mut rep = Report::new("Hensel stabilization");
    for inst in closed_form_instances()? {
        if inst.case.m() > 3 {
            continue;
        }
        let k = &inst.field;
        let r = (|| -> Result<(bool, String)> {
            for t in 0..=1 {
                let rho = k.uniformizer_pow(2 * t);
                let base = 2 * t + k.e();
                for l in base + 1..=base + 3 {
                    let x0 = count_level_histogram(&inst.form, &rho, l)?;
                    let x1 = count_level_histogram(&inst.form, &rho, l + 1)?;
                    if x1 != &x0 * inv_q(k) {
                        return Ok((false, format!("T = {t}, ℓ = {l}: {x0} then {x1}")));
                    }
                }
            }
            Ok((true, String::new()))
        })();
        rep.push_result(format!("{} {}", k.name(), inst.case), r);
    }
    Ok(rep)
}

/// Square-root counts and the conic measure against enumeration.
pub fn verify_counting_lemmas() -> Result<Report> {
    let mut rep = Report::new("square roots and conic");
    for k in test_fields() {
        let r = (|| -> Result<(bool, String)> {
            for rho in k.residues(6) {
                let rho_hi = k.lift(&rho, k.work_level());
                for l in 0..=4 {
                    let expect = count_square_roots(&k, &rho_hi, l)?;
                    let target = k.reduce(&rho, l);
                    let hits = k.residues(l).filter(|x| k.square(x) == target).count();
                    let counted = BigRational::new(hits.into(), BigInt::from(k.size(l)));
                    if counted != expect {
                        return Ok((false, format!("ρ = {}, ℓ = {l}: {counted} vs {expect}", k.format(&rho))));
                    }
                }
            }
            Ok((true, String::new()))
        })();
        rep.push_result(format!("{} square roots", k.name()), r);
    }
    let q4 = LocalField::q4();
    for (k, u) in [(LocalField::q2(), LocalField::q2().elem(1)), (q4.clone(), q4.theta().unwrap())] {
        let r = (|| -> Result<(bool, String)> {
            let wl = k.work_level();
            let v = k.elem(1);
            for l in 1..=4u32 {
                let expect = k.abs_uniformizer_pow(l as i64) + k.abs_uniformizer_pow(l as i64 + 1);
                for a in k.residues(1) {
                    for b in k.residues(1) {
                        let (a, b) = (k.lift(&a, wl), k.lift(&b, wl));
                        for d in k.residues(l.min(2)) {
                            let d = k.lift(&d, wl);
                            // P(A, B) for P = ux² + xy + vy² + Bx + Ay + D.
                            let quad = k.add(&k.add(&k.mul(&u, &k.square(&a)), &k.mul(&a, &b)), &k.mul(&v, &k.square(&b)));
                            let p_ab = k.add(&k.add(&quad, &k.add(&k.mul(&b, &a), &k.mul(&a, &b))), &d);
                            if !k.is_unit(&p_ab) {
                                continue;
                            }
                            let got = conic_measure(&k, [&u, &v, &b, &a, &d], l)?;
                            if got != expect {
                                return Ok((false, format!("ℓ = {l}, D = {}: {got} vs {expect}", k.format(&d))));
                            }
                        }
                    }
                }
            }
            Ok((true, String::new()))
        })();
        rep.push_result(format!("{} conic", k.name()), r);
    }
    Ok(rep)
}

/// Assembly identities: Π two ways, X from levels, the dyadic sum.
pub fn verify_assembly(t_max: u32) -> Result<Report> {
    let mut rep = Report::new("assembly identities");
    for inst in closed_form_instances()? {
        let k = &inst.field;
        let e = k.e();
        let m = inst.case.m();
        let r = (|| -> Result<(bool, String)> {
            let pg = x_closed(inst.case, e)?;
            let a = pi_from_x(&pg, e, m)?;
            let b = pi_geometric(&pg)?;
            if a != b {
                return Ok((false, "Π from X differs from the geometric sum".into()));
            }
            Ok((true, String::new()))
        })();
        rep.push_result(format!("{} {} Π", k.name(), inst.case), r);
        let r = (|| -> Result<(bool, String)> {
            let pg = x_closed(inst.case, e)?;
            // For q = 4 the levels stop at 6, as in the closed-form suite.
            let t_top = if k.q() > 2 { t_max.min(2) } else { t_max };
            for t in 0..=t_top {
                let rho = k.uniformizer_pow(2 * t);
                let top = 2 * t + e + 1;
                let levels = x_series(&inst.form, &rho, top, SeriesMode::Direct)?.coeffs;
                let assembled = x_from_levels(&levels, e, t)?.specialize(Var::Iq, &inv_q(k))?;
                let closed = pg.at(t)?.specialize(Var::Iq, &inv_q(k))?;
                if assembled != closed {
                    return Ok((false, format!("T = {t}: {assembled} vs {closed}")));
                }
            }
            Ok((true, String::new()))
        })();
        rep.push_result(format!("{} {} X from levels", k.name(), inst.case), r);
    }
    let r = (|| -> Result<(bool, String)> {
        for o in 0..=4 {
            for l in 0..=9 {
                if dyadic_sum_direct(o, l)? != dyadic_sum_closed(o, l)? {
                    return Ok((false, format!("o = {o}, L = {l}")));
                }
            }
        }
        Ok((true, String::new()))
    })();
    rep.push_result("dyadic sum, o ≤ 4, L ≤ 9", r);
    Ok(rep)
}

fn series_of(x: &[BigRational]) -> RationalFunction {
    let mut acc = RationalFunction::zero();
    for (l, c) in x.iter().enumerate() {
        acc = acc + RationalFunction::constant(c.clone()) * RationalFunction::monomial([l as i32, 0, 0]);
    }
    acc
}

/// X^{m+2k} against the prefactor times X^m(β + k), both counted.
pub fn verify_dimension_reduction(order: u32) -> Result<Report> {
    let mut rep = Report::new("dimension reduction");
    let q2 = LocalField::q2();
    let q3 = LocalField::qp(3)?;
    let cases: Vec<(LocalField, Vec<i64>, i64)> = vec![
        (q2.clone(), vec![1], 1),
        (q2.clone(), vec![1], 4),
        (q2.clone(), vec![], 1),
        (q2.clone(), vec![], 4),
        (q2.clone(), vec![3, 3, -1], 1),
        (q3.clone(), vec![1], 1),
        (q3.clone(), vec![2], 9),
        (q3.clone(), vec![1, -2], 3),
    ];
    for (k, coeffs, rho) in cases {
        for planes in 1..=2u32 {
            let r = (|| -> Result<(bool, String)> {
                let base = DiagonalForm::from_ints(&k, &coeffs)?;
                let big = base.clone().with_planes(planes);
                let rho = k.elem(rho);
                let direct = x_series(&big, &rho, order, SeriesMode::Direct)?.coeffs;
                // X^m(β + k) needs X^m to order L.
                let small = x_series(&base, &rho, order, SeriesMode::Direct)?.coeffs;
                let xm = series_of(&small);
                let pred = dimension_reduce(&xm, planes, Direction::AddPlanes)?
                    .specialize(Var::Iq, &inv_q(&k))?
                    .z_series(order as usize)?;
                if pred != direct {
                    return Ok((false, format!("counted [{}] predicted [{}]", fmt_vec(&direct), fmt_vec(&pred))));
                }
                Ok((true, String::new()))
            })();
            rep.push_result(format!("{} {:?} + {planes} planes, ρ = {rho}", k.name(), coeffs), r);
        }
    }
    Ok(rep)
}

/// One element per square class: unit classes, then ϖ times each.
fn square_class_reps(k: &LocalField) -> Result<Vec<RingElem>> {
    let mut units: Vec<RingElem> = Vec::new();
    for u in k.unit_representatives() {
        let mut fresh = true;
        for v in &units {
            if same_square_class(k, &u, v)? {
                fresh = false;
                break;
            }
        }
        if fresh {
            units.push(u);
        }
    }
    let pi = k.uniformizer();
    let with_pi: Vec<RingElem> = units.iter().map(|u| k.mul(u, &pi)).collect();
    units.extend(with_pi);
    Ok(units)
}

/// Symmetry, bimultiplicativity, the defect-4𝔬 rule, and defect
/// classification, each against enumeration.
pub fn verify_symbols() -> Result<Report> {
    let mut rep = Report::new("Hilbert symbol and defect");
    for k in test_fields() {
        let r = (|| -> Result<(bool, String)> {
            let reps = square_class_reps(&k)?;
            for a in &reps {
                for b in &reps {
                    let s = hilbert_symbol(&k, a, b)?;
                    if s != hilbert_symbol(&k, b, a)? {
                        return Ok((false, format!("asymmetric at ({}, {})", k.format(a), k.format(b))));
                    }
                    if s != hilbert_by_search(&k, a, b) {
                        return Ok((false, format!("search disagrees at ({}, {})", k.format(a), k.format(b))));
                    }
                    for c in &reps {
                        let bc = k.mul(b, c);
                        if hilbert_symbol(&k, a, &bc)? != s * hilbert_symbol(&k, a, c)? {
                            return Ok((false, format!("not multiplicative at {}", k.format(a))));
                        }
                    }
                }
            }
            Ok((true, String::new()))
        })();
        rep.push_result(format!("{} symmetry and bimultiplicativity", k.name()), r);
        let r = (|| -> Result<(bool, String)> {
            let four_o = DefectResult::Defect(2 * k.e());
            let pi = k.uniformizer();
            for delta in k.unit_representatives() {
                if quadratic_defect(&k, &delta)? != four_o {
                    continue;
                }
                for a in k.unit_representatives() {
                    for (ord, x) in [(0, a), (1, k.mul(&a, &pi))] {
                        let expect = if ord == 0 { 1 } else { -1 };
                        if hilbert_symbol(&k, &x, &delta)? != expect {
                            return Ok((false, format!("({}, {})", k.format(&x), k.format(&delta))));
                        }
                    }
                }
            }
            Ok((true, String::new()))
        })();
        rep.push_result(format!("{} (a, Δ) = (−1)^ord a for Δ of defect 4𝔬", k.name()), r);
        let r = (|| -> Result<(bool, String)> {
            let level = 2 * k.e() + 4;
            for x in k.residues(level) {
                if !k.is_unit(&x) {
                    continue;
                }
                let xl = k.lift(&x, k.work_level());
                let got = quadratic_defect(&k, &xl)?;
                // Largest ord(x − η²) over η, by enumeration at this level.
                let best = k
                    .residues(level)
                    .map(|eta| k.ord(&k.sub(&x, &k.square(&eta))).unwrap_or(level))
                    .max()
                    .unwrap();
                let expect = if best > 2 * k.e() { DefectResult::Square } else { DefectResult::Defect(best) };
                if got != expect {
                    return Ok((false, format!("{}: {got:?} vs {expect:?}", k.format(&x))));
                }
            }
            Ok((true, String::new()))
        })();
        rep.push_result(format!("{} defect classification", k.name()), r);
    }
    Ok(rep)
}

/// Table checks for each n.
pub fn verify_tables(ns: impl IntoIterator<Item = u32>) -> Result<Report> {
    let mut rep = Report::new("period tables");
    for n in ns {
        let row = verify_table_row(n)?;
        for (label, c) in [("a", &row.check_a), ("b", &row.check_b), ("c", &row.check_c)] {
            rep.push(format!("n = {n} ({label})"), c.passed, c.detail.clone());
        }
    }
    Ok(rep)
}

/// Anisotropy rule against zero search for binary and ternary forms, one
/// per similarity class of coefficients.
pub fn verify_anisotropy() -> Result<Report> {
    let mut rep = Report::new("anisotropy");
    for k in test_fields() {
        let r = (|| -> Result<(bool, String)> {
            let reps = square_class_reps(&k)?;
            let one = k.lift(&k.elem(1), k.work_level());
            for (i, a) in reps.iter().enumerate() {
                is_anisotropic(&DiagonalForm::new(&k, &[one, *a])?)?;
                for b in &reps[i..] {
                    is_anisotropic(&DiagonalForm::new(&k, &[one, *a, *b])?)?;
                }
            }
            Ok((true, String::new()))
        })();
        rep.push_result(format!("{} rule agrees with zero search", k.name()), r);
    }
    Ok(rep)
}

/// Naive enumeration against the histogram kernel on small forms.
pub fn verify_kernels() -> Result<Report> {
    let mut rep = Report::new("naive vs histogram");
    for k in test_fields() {
        let r = (|| -> Result<(bool, String)> {
            for coeffs in [vec![1i64], vec![1, 3], vec![1, 2, 5]] {
                let b = DiagonalForm::from_ints(&k, &coeffs)?;
                for l in 0..=2 {
                    for rho in [0i64, 1, 2, 3, 4, 6] {
                        let rho = k.elem(rho);
                        let a = count_level_naive(&b, &rho, l)?;
                        let h = count_level_histogram(&b, &rho, l)?;
                        if a != h {
                            return Ok((false, format!("{coeffs:?}, ℓ = {l}: {a} vs {h}")));
                        }
                    }
                }
            }
            Ok((true, String::new()))
        })();
        rep.push_result(k.name(), r);
    }
    Ok(rep)
}
