use std::sync::Arc;

use proptest::prelude::*;

use nilsolve::charsolve::{
    characteristic_residual, solve_characteristic, Branch, CharBasis, CharBasisRecord, PdeRecord,
    PdeSpec, PdeTerm, Preset, RootChoice,
};
use nilsolve::nilalg::{exp_elem, ElementRecord, StructureConstant};
use nilsolve::resolvent::{exp_decomposition, psi_polynomials, resolvent_general, resolvent_rho, XiValues};
use nilsolve::solutions::{build_xi_forms, exp_family, FamilyMember, MemberRecord};
use nilsolve::verify::{jet_of_member, pde_residual, residual_scale, MultiJet};
use nilsolve::{AlgebraTable, Error, TruncatedElement, C64};

fn complex() -> impl Strategy<Value = C64> {
    (-1.0..1.0_f64, -1.0..1.0_f64).prop_map(|(re, im)| C64::new(re, im))
}

fn coeffs(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec(complex(), n)
}

/// Truncated polynomial algebra in `vars` variables up to total degree `deg`,
/// with basis monomials ordered by degree and each rescaled by a random weight.
fn monomial_table(vars: usize, deg: u32, weights: &[f64]) -> Arc<AlgebraTable> {
    let mut monos: Vec<Vec<u32>> = vec![vec![0; vars]];
    for total in 1..=deg {
        let mut level = Vec::new();
        let mut stack = vec![(Vec::new(), total)];
        while let Some((prefix, left)) = stack.pop() {
            if prefix.len() + 1 == vars {
                let mut m: Vec<u32> = prefix;
                m.push(left);
                level.push(m);
                continue;
            }
            for e in 0..=left {
                let mut p = prefix.clone();
                p.push(e);
                stack.push((p, left - e));
            }
        }
        level.sort();
        monos.extend(level);
    }
    let n = monos.len();
    let w = |k: usize| weights[k % weights.len()];
    let mut constants = Vec::new();
    for r in 1..n {
        for s in r..n {
            let prod: Vec<u32> = monos[r].iter().zip(&monos[s]).map(|(a, b)| a + b).collect();
            if let Some(k) = monos.iter().position(|m| *m == prod) {
                let value = w(r) * w(s) / w(k);
                constants.push(StructureConstant::new(r, s, k, C64::new(value, 0.0)));
            }
        }
    }
    AlgebraTable::general(n, &constants).unwrap()
}

fn table() -> impl Strategy<Value = Arc<AlgebraTable>> {
    prop_oneof![
        (2usize..10).prop_map(|n| AlgebraTable::rho_chain(n).unwrap()),
        (1usize..3, 2u32..4, prop::collection::vec(0.5..2.0_f64, 1..6))
            .prop_map(|(v, d, w)| monomial_table(v, d, &w)),
    ]
}

fn elements(k: usize) -> impl Strategy<Value = (Arc<AlgebraTable>, Vec<TruncatedElement>)> {
    table().prop_flat_map(move |t| {
        let n = t.n();
        prop::collection::vec(coeffs(n), k).prop_map(move |cs| {
            let els = cs.into_iter().map(|c| TruncatedElement::new(t.clone(), c).unwrap()).collect();
            (t.clone(), els)
        })
    })
}

fn close(a: &TruncatedElement, b: &TruncatedElement, tol: f64) -> bool {
    a.max_abs_diff(b) <= tol * (1.0 + a.max_norm().max(b.max_norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms((_, e) in elements(3)) {
        let (a, b, c) = (&e[0], &e[1], &e[2]);
        prop_assert!(close(&a.mul(b).unwrap(), &b.mul(a).unwrap(), 1e-13));
        let left = a.mul(b).unwrap().mul(c).unwrap();
        let right = a.mul(&b.mul(c).unwrap()).unwrap();
        prop_assert!(close(&left, &right, 1e-12));
        let dist = a.mul(&b.add(c).unwrap()).unwrap();
        let split = a.mul(b).unwrap().add(&a.mul(c).unwrap()).unwrap();
        prop_assert!(close(&dist, &split, 1e-12));
        let one = TruncatedElement::one(a.table().clone());
        prop_assert_eq!(a.mul(&one).unwrap(), a.clone());
    }

    #[test]
    fn product_matches_structure_constants((t, e) in elements(2)) {
        let (a, b) = (e[0].coeffs(), e[1].coeffs());
        let n = t.n();
        let mut want = vec![C64::new(0.0, 0.0); n];
        for k in 0..n {
            want[k] += a[0] * b[k];
            if k > 0 {
                want[k] += a[k] * b[0];
            }
        }
        for c in t.constants() {
            want[c.k] += a[c.r] * b[c.s] * c.value;
            if c.r != c.s {
                want[c.k] += a[c.s] * b[c.r] * c.value;
            }
        }
        let got = e[0].mul(&e[1]).unwrap();
        let want = TruncatedElement::new(t.clone(), want).unwrap();
        prop_assert!(close(&got, &want, 1e-13));
    }

    #[test]
    fn nilpotent_part_vanishes_at_power_n((t, e) in elements(1)) {
        let z = e[0].nilpotent_part();
        let zn = z.pow(t.n() as i64).unwrap();
        prop_assert!(zn.max_norm() <= 1e-12);
    }

    #[test]
    fn inverse_and_exp_laws((t, e) in elements(2), shift in 0.5..2.0_f64) {
        let one = TruncatedElement::one(t.clone());
        let a = e[0].add(&TruncatedElement::scalar(t.clone(), C64::new(shift + 1.0, 0.0))).unwrap();
        prop_assert!(close(&a.mul(&a.invert().unwrap()).unwrap(), &one, 1e-11));

        let (x, y) = (&e[0], &e[1]);
        let sum = exp_elem(&x.add(y).unwrap());
        let prod = exp_elem(x).mul(&exp_elem(y)).unwrap();
        prop_assert!(close(&sum, &prod, 1e-12));
        prop_assert!(close(&exp_elem(x).mul(&exp_elem(&x.neg())).unwrap(), &one, 1e-12));

        // e^s · Σ_j N^j/j! with N the nilpotent part
        let nil = x.nilpotent_part();
        let mut term = one.clone();
        let mut series = one.clone();
        for j in 1..t.n() {
            term = term.mul(&nil).unwrap().scale(C64::new(1.0 / j as f64, 0.0));
            series = series.add(&term).unwrap();
        }
        let series = series.scale(x.scalar_part().exp());
        prop_assert!(close(&exp_elem(x), &series, 1e-12));
    }

    #[test]
    fn rho_chain_truncation_is_a_homomorphism(n in 3usize..10, m in 2usize..10, a in coeffs(10), b in coeffs(10)) {
        let m = m.min(n);
        let t = AlgebraTable::rho_chain(n).unwrap();
        let small = AlgebraTable::rho_chain(m).unwrap();
        for k in m..n {
            let lower = AlgebraTable::rho_chain(k).unwrap();
            prop_assert!(AlgebraTable::rho_chain(k + 1).unwrap().is_extension_of(&lower));
        }
        prop_assert_eq!(t.restrict(m).unwrap().constants(), small.constants());
        let a = TruncatedElement::new(t.clone(), a[..n].to_vec()).unwrap();
        let b = TruncatedElement::new(t.clone(), b[..n].to_vec()).unwrap();
        let full = a.mul(&b).unwrap().truncate(m).unwrap();
        let part = a.truncate(m).unwrap().mul(&b.truncate(m).unwrap()).unwrap();
        prop_assert_eq!(full, part);
        prop_assert_eq!(exp_elem(&a).truncate(m).unwrap(), exp_elem(&a.truncate(m).unwrap()));
    }

    #[test]
    fn resolvent_inverts_t_minus_zeta((t, e) in elements(1), tt in complex()) {
        let zeta = &e[0];
        let t_val = zeta.scalar_part() + C64::new(1.5, 0.0) + tt;
        let expansions = resolvent_general(&t);
        let xis = &zeta.coeffs()[1..];
        let a: Vec<C64> = expansions.iter().map(|p| p.eval(t_val, zeta.scalar_part(), xis)).collect();
        let a = TruncatedElement::new(t.clone(), a).unwrap();
        let lhs = TruncatedElement::scalar(t.clone(), t_val).sub(zeta).unwrap().mul(&a).unwrap();
        prop_assert!(close(&lhs, &TruncatedElement::one(t.clone()), 1e-10));
    }

    #[test]
    fn psi_components_of_exp(n in 2usize..10, c in coeffs(10)) {
        let xiv = XiValues::new(c[0], c[1..n].to_vec());
        let direct = exp_elem(&xiv.to_element().unwrap());
        let parts = exp_decomposition(&xiv, n).unwrap();
        let parts = TruncatedElement::new(direct.table().clone(), parts).unwrap();
        prop_assert!(close(&direct, &parts, 1e-12));
    }

    #[test]
    fn characteristic_residual_on_random_equations(
        d in 2usize..4,
        raw in prop::collection::vec((prop::collection::vec(0u32..5, 3), complex()), 1..5),
        top in complex(),
        free in prop::collection::vec(coeffs(5), 2),
        pick in 0usize..4,
    ) {
        let mut terms: Vec<PdeTerm> = raw
            .into_iter()
            .map(|(a, c)| PdeTerm::new(a[..d].to_vec(), c))
            .filter(|t| t.order() <= 4)
            .collect();
        // A pure power of the lifted variable keeps the order-0 equation non-trivial.
        let mut pure = vec![0; d];
        pure[d - 1] = 2;
        terms.push(PdeTerm::new(pure, top + C64::new(2.0, 0.0)));
        let pde = match PdeSpec::new(d, terms) {
            Ok(p) => p,
            Err(_) => return Ok(()),
        };
        let free = &free[..d - 1];
        match solve_characteristic(&pde, 5, free, d - 1, RootChoice::Index(pick)) {
            Ok(basis) => {
                let res = characteristic_residual(&pde, &basis.vectors).unwrap();
                prop_assert!(res < 1e-8, "residual {res:e}");
            }
            Err(e) => prop_assert!(
                e.is_degenerate() || matches!(e, Error::RootSelection(_)),
                "unexpected {e}"
            ),
        }
    }

    #[test]
    fn extension_leaves_lower_orders_untouched(salt in 0u64..1000, j in 0usize..4) {
        use rand::SeedableRng;
        let preset = [Preset::Laplace3d, Preset::Beam { a: 0.8 }, Preset::Hydro { alpha: 1.0, beta: 2.0 }][j % 3];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(salt);
        let free = preset.random_free(&mut rng, 7);
        let branch = Branch::all()[j];
        let big = preset.solve(7, &free, branch).unwrap();
        let small: Vec<Vec<C64>> = free.iter().map(|f| f[..5].to_vec()).collect();
        let small = preset.solve(5, &small, branch).unwrap();
        prop_assert_eq!(big.truncate(5).unwrap(), small);
    }

    #[test]
    fn combinations_of_members_solve_the_equation(
        salt in 0u64..1000,
        weights in coeffs(5),
        x in prop::collection::vec(-1.0..1.0_f64, 3),
    ) {
        use rand::SeedableRng;
        let preset = Preset::Helmholtz { lambda: C64::new(0.0, 2.0) };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(salt);
        let free = preset.random_free(&mut rng, 5);
        let basis = preset.solve(5, &free, Branch::PLUS).unwrap();
        let xf = build_xi_forms(&basis);
        let pde = preset.pde();
        let d = preset.d();
        let mut acc = MultiJet::constant(d, 2, C64::new(0.0, 0.0));
        for (m, w) in exp_family(&xf, 4).unwrap().iter().zip(&weights) {
            acc.add_assign(&jet_of_member(m, &xf, &x[..d], 2).unwrap().scale(*w)).unwrap();
        }
        let res = pde_residual(&pde, &acc).unwrap().norm();
        prop_assert!(res <= 1e-12 * (1.0 + residual_scale(&pde, &acc)));
    }

    #[test]
    fn records_round_trip_through_json(salt in 0u64..1000, c in coeffs(6)) {
        use rand::SeedableRng;
        let t = AlgebraTable::rho_chain(6).unwrap();
        let el = TruncatedElement::new(t.clone(), c).unwrap();
        let rec: ElementRecord = serde_json::from_str(&serde_json::to_string(&el.to_record()).unwrap()).unwrap();
        prop_assert_eq!(TruncatedElement::from_record(t, &rec).unwrap(), el);

        let preset = Preset::Biharmonic { p: 2.0 };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(salt);
        let basis = preset.solve(6, &preset.random_free(&mut rng, 6), Branch::MINUS).unwrap();
        let json = serde_json::to_string(&basis.to_record()).unwrap();
        let back = CharBasis::from_record(&serde_json::from_str::<CharBasisRecord>(&json).unwrap()).unwrap();
        prop_assert_eq!(back, basis.clone());

        let pde = preset.pde();
        let rec: PdeRecord = serde_json::from_str(&serde_json::to_string(&pde.to_record()).unwrap()).unwrap();
        prop_assert_eq!(PdeSpec::from_record(&rec).unwrap(), pde);

        let xf = build_xi_forms(&basis);
        for m in exp_family(&xf, 5).unwrap() {
            let json = serde_json::to_string(&m.to_record(&xf)).unwrap();
            let (back, xf2) = FamilyMember::from_record(&serde_json::from_str::<MemberRecord>(&json).unwrap()).unwrap();
            prop_assert_eq!(back.to_record(&xf2), m.to_record(&xf));
        }
    }
}

#[test]
fn rho_resolvent_agrees_with_general_recurrence() {
    for n in 2..9 {
        let t = AlgebraTable::rho_chain(n).unwrap();
        for (a, b) in resolvent_rho(n).unwrap().iter().zip(resolvent_general(&t)) {
            assert_eq!(a.max_pole(), b.max_pole());
            for (s, p) in a.terms() {
                assert!(p.max_abs_diff(b.term(s).unwrap()) < 1e-14, "n={n} A_{} pole {s}", a.index());
            }
        }
    }
}

#[test]
fn expansions_are_weighted_homogeneous() {
    let n = 9;
    for a in resolvent_rho(n).unwrap() {
        for (s, p) in a.terms() {
            assert!(p.weighted_degrees().iter().all(|&w| w as usize == a.index()));
            assert!(p.terms().all(|(m, _)| m.degree() as usize + 1 == s));
        }
    }
    for psi in psi_polynomials(n).unwrap().iter() {
        assert!(psi.poly().weighted_degrees().iter().all(|&w| w as usize == psi.index()));
    }
}
