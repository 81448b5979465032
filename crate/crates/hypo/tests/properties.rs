use std::f64::consts::PI;

use hypo::basis::{sobolev_norm, Discretization, FiberAlgebra};
use hypo::bismut::{self, build_projectors, BismutAssembly, Sign};
use hypo::grushin;
use hypo::linalg::{self, Csr, Dense};
use hypo::potential::{Barcode, CriticalKind, Potential};
use hypo::witten::{self, WittenAssembly};
use ndarray as nd;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn potential() -> impl Strategy<Value = Potential> {
    (1usize..=5)
        .prop_flat_map(|deg| (prop::collection::vec(-1.0..1.0f64, deg), prop::collection::vec(-1.0..1.0f64, deg)))
        .prop_filter("nonconstant", |(c, s)| c.iter().chain(s).any(|x| x.abs() > 0.1))
        .prop_map(|(c, s)| {
            let mut cos = vec![0.0];
            cos.extend(c);
            let mut sin = vec![0.0];
            sin.extend(s);
            Potential::new(2.0 * PI, cos, sin)
        })
}

fn low_degree() -> impl Strategy<Value = Potential> {
    (prop::collection::vec(-1.0..1.0f64, 2), prop::collection::vec(-1.0..1.0f64, 2))
        .prop_filter("nonconstant", |(c, s)| c.iter().chain(s).any(|x| x.abs() > 0.2))
        .prop_map(|(c, s)| Potential::new(2.0 * PI, [vec![0.0], c].concat(), [vec![0.0], s].concat()))
}

fn dist(a: &Dense, b: &Dense) -> f64 {
    linalg::frob(&(a - b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evaluation_is_periodic(v in potential(), q in -20.0..20.0f64) {
        for order in 0..3 {
            let a = v.eval(q, order);
            let b = v.eval(q + v.circumference, order);
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "order {order}: {a} vs {b}");
        }
    }

    #[test]
    fn barcode_structure(v in potential()) {
        let cps = v.critical_points(4096);
        prop_assume!(cps.is_ok());
        let cps = cps.unwrap();
        let bc = Barcode::from_critical_points(&cps);
        let infinite: Vec<u8> = bc.bars.iter().filter(|b| !b.is_finite()).map(|b| b.degree).collect();
        prop_assert_eq!(infinite.len(), 2);
        prop_assert!(infinite.contains(&0) && infinite.contains(&1));
        let n_min = cps.iter().filter(|c| c.kind == CriticalKind::Min).count();
        prop_assert_eq!(bc.finite(0).len() + 1, n_min);
        let at = |kind, x: f64| cps.iter().any(|c| c.kind == kind && c.value == x);
        for b in bc.finite(0) {
            prop_assert!(at(CriticalKind::Min, b.birth) && at(CriticalKind::Max, b.death));
            prop_assert!(b.length() >= 0.0);
        }
        let oracle = Barcode::from_samples(&v.sample(1 << 14));
        prop_assert!(bc.matches(&oracle, 1e-5), "{bc:?}\n{oracle:?}");
    }

    #[test]
    fn barcode_self_duality(v in potential()) {
        let (a, b) = (v.barcode(4096), v.negated().barcode(4096));
        prop_assume!(a.is_ok() && b.is_ok());
        let mut x: Vec<(f64, f64)> = a.unwrap().finite(0).iter().map(|b| (b.birth, b.death)).collect();
        let mut y: Vec<(f64, f64)> = b.unwrap().finite(0).iter().map(|b| (-b.death, -b.birth)).collect();
        x.sort_by(|p, q| p.partial_cmp(q).unwrap());
        y.sort_by(|p, q| p.partial_cmp(q).unwrap());
        prop_assert_eq!(x.len(), y.len());
        for (p, q) in x.iter().zip(&y) {
            prop_assert!((p.0 - q.0).abs() < 1e-9 && (p.1 - q.1).abs() < 1e-9, "{x:?} {y:?}");
        }
    }

    #[test]
    fn flat_index_is_a_bijection(k_max in 1usize..8, m_max in 1usize..8) {
        let d = Discretization::new(k_max, m_max, 2.0 * PI);
        for i in 0..d.dim() {
            let (c, k, n) = d.unindex(i);
            prop_assert_eq!(d.index(c, k, n), i);
        }
        let total: usize = (0..3).map(|p| d.degree_indices(p).len()).sum();
        prop_assert_eq!(total, d.dim());
    }

    #[test]
    fn csr_adjoint_and_products(
        trip in prop::collection::vec((0usize..12, 0usize..9, -1.0..1.0f64, -1.0..1.0f64), 0..40),
        x in prop::collection::vec(-1.0..1.0f64, 9),
    ) {
        let a = Csr::from_triplets(12, 9, trip.iter().map(|&(i, j, re, im)| (i, j, C64::new(re, im))));
        prop_assert_eq!(&a.adjoint().adjoint(), &a);
        let xv: nd::Array1<C64> = x.iter().map(|&r| C64::from(r)).collect();
        let dense = a.to_dense().dot(&xv);
        prop_assert!(linalg::norm(&(&a.apply(&xv) - &dense)) < 1e-13);
        let ata = a.adjoint().matmul(&a).to_dense();
        prop_assert!(dist(&ata, &linalg::adjoint(&a.to_dense()).dot(&a.to_dense())) < 1e-12);
        prop_assert!(dist(&ata, &linalg::adjoint(&ata)) < 1e-12);
    }

    #[test]
    fn sobolev_embedding_chain(seed in 0u64..1000, s1 in 0.0..2.0f64, s2 in -1.0..1.0f64) {
        let d = Discretization::new(5, 6, 2.0 * PI);
        let mut rng = linalg::rng(seed);
        let u = linalg::random_vector(&mut rng, d.dim());
        let lo = sobolev_norm(&u, &d, 0.0, s2, 1.0).unwrap();
        let mid = sobolev_norm(&u, &d, s1, s2, 1.0).unwrap();
        let hi = sobolev_norm(&u, &d, 0.0, s2 + s1 / 2.0, 1.0).unwrap();
        prop_assert!(lo <= mid * (1.0 + 1e-12) && mid <= hi * (1.0 + 1e-12), "{lo} {mid} {hi}");
    }
}

#[test]
fn fiber_algebra_relations() {
    let f = FiberAlgebra::new();
    let i4 = nd::Array2::<f64>::eye(4);
    assert_eq!(f.mu0.dot(&f.mu0), nd::Array2::<f64>::zeros((4, 4)));
    assert_eq!(f.lambda0.dot(&f.lambda0), nd::Array2::<f64>::zeros((4, 4)));
    assert_eq!(f.lambda0, f.mu0.t());
    let ac = f.dq_wedge.dot(&f.i_dq) + f.i_dq.dot(&f.dq_wedge);
    assert_eq!(ac, i4);
    let ap = f.dp_wedge.dot(&f.i_dp) + f.i_dp.dot(&f.dp_wedge);
    assert_eq!(ap, i4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bismut_structure(v in low_degree(), h in 0.3..1.0f64, b in 0.02..0.5f64, minus in any::<bool>()) {
        let sign = if minus { Sign::Minus } else { Sign::Plus };
        let d = Discretization::new(8, 8, 2.0 * PI);
        let asm = BismutAssembly::new(&d, &v, sign, b, h).unwrap();
        let alpha = asm.alpha.to_dense();
        prop_assert!(dist(&alpha, &linalg::adjoint(&alpha)) == 0.0);
        for i in 0..asm.dim() {
            let a = alpha[(i, i)].re;
            prop_assert!(a >= 0.0 && a.fract() == 0.0);
        }
        prop_assert_eq!(asm.degree_leak(), 0.0);
        prop_assert!(bismut::pt_symmetry_check(&asm) < 1e-12);
        let gp = build_projectors(&d, sign);
        let u = gp.u.to_dense();
        let utu = linalg::adjoint(&u).dot(&u);
        prop_assert!(dist(&utu, &linalg::eye(gp.base_dim())) == 0.0);
        prop_assert!(asm.alpha.apply_mat(&u).iter().all(|x| *x == C64::new(0.0, 0.0)));
        let ubu = linalg::adjoint(&u).dot(&asm.op.apply_mat(&u));
        let ugu = linalg::adjoint(&u).dot(&asm.gamma.apply_mat(&u));
        prop_assert!(dist(&ubu, &ugu) <= 1e-12 * (1.0 + linalg::frob(&ugu)));
    }

    #[test]
    fn hermite_parity_flips_b(v in low_degree(), h in 0.3..1.0f64, b in 0.02..0.5f64, minus in any::<bool>()) {
        let sign = if minus { Sign::Minus } else { Sign::Plus };
        let d = Discretization::new(5, 7, 2.0 * PI);
        let asm = BismutAssembly::new(&d, &v, sign, b, h).unwrap();
        let p: Vec<f64> = (0..d.dim()).map(|i| if d.unindex(i).2 % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let pm = Csr::diag_real(&p);
        let conj = |m: &Csr| pm.matmul(m).matmul(&pm);
        prop_assert_eq!(conj(&asm.alpha).sub(&asm.alpha).max_abs(), 0.0);
        prop_assert_eq!(conj(&asm.beta).add(&asm.beta).max_abs(), 0.0);
        prop_assert_eq!(conj(&asm.gamma).sub(&asm.gamma).max_abs(), 0.0);
    }

    #[test]
    fn witten_structure(v in low_degree(), h in 0.4..1.0f64) {
        let d = Discretization::new(24, 4, 2.0 * PI);
        let w = WittenAssembly::new(&d, &v, h).unwrap();
        for p in 0..2 {
            let delta = &w.delta[p];
            prop_assert!(dist(delta, &linalg::adjoint(delta)) <= 1e-13 * linalg::frob(delta));
            let ev = w.eigenvalues(p);
            let scale = ev.iter().cloned().fold(0.0, f64::max);
            prop_assert!(ev.iter().all(|x| *x >= -1e-10));
            let kernel = ev.iter().filter(|x| x.abs() <= 1e-10 * scale).count();
            prop_assert_eq!(kernel, 1, "degree {}: {:?}", p, &ev[..3]);
        }
        let g = w.ground_state();
        let rq = linalg::dot(&g, &w.delta[0].dot(&g)).re / linalg::dot(&g, &g).re;
        prop_assert!(rq.abs() < 1e-10 * linalg::frob(&w.delta[0]), "{rq:e}");
        let q = witten::spectral_truncation(&w, 2.0, 1.0, witten::default_cd(1.0), &witten::chi);
        for p in 0..2 {
            let c = q[p].dot(&w.delta[p]) - w.delta[p].dot(&q[p]);
            prop_assert!(linalg::frob(&c) < 1e-12 * (1.0 + linalg::frob(&w.delta[p])) * 4.0);
        }
    }

    #[test]
    fn resolvent_on_perp_annihilates_ground(v in low_degree(), re in -3.0..-0.5f64, im in -1.0..1.0f64) {
        let d = Discretization::new(6, 8, 2.0 * PI);
        let asm = BismutAssembly::new(&d, &v, Sign::Plus, 0.1, 0.6).unwrap();
        let gp = build_projectors(&d, Sign::Plus);
        let gb = grushin::build_blocks(&asm, &gp, None, C64::new(re, im)).unwrap();
        prop_assert_eq!(gb.e_annihilates_ground(), 0.0);
        prop_assert!(gb.left_inverse_residual(4, 3) < 1e-8);
    }
}

#[test]
fn poincare_duality_spectra() {
    let d = Discretization::new(6, 8, 2.0 * PI);
    let self_dual = [Potential::single_well(), Potential::triple_well()];
    for v in &self_dual {
        let r = hypo::spectral::poincare_duality(&d, v, 0.2, 0.5, 12).unwrap();
        assert!(r.same_potential.iter().all(|x| *x < 1e-9), "{r:?}");
        assert!(r.negated_potential.iter().all(|x| *x < 1e-9), "{r:?}");
    }
    // −V is not a translate of V here; only the −V form holds
    let r = hypo::spectral::poincare_duality(&d, &Potential::double_well(), 0.2, 0.5, 12).unwrap();
    assert!(r.negated_potential.iter().all(|x| *x < 1e-9), "{r:?}");
    assert!(r.same_potential.iter().any(|x| *x > 1e-3), "{r:?}");
}

fn translated(v: &Potential, s: f64) -> Potential {
    let w = v.omega();
    let n = v.cos_coeffs.len().max(v.sin_coeffs.len());
    let (mut c, mut si) = (vec![0.0; n], vec![0.0; n]);
    for j in 0..n {
        let a = v.cos_coeffs.get(j).copied().unwrap_or(0.0);
        let b = v.sin_coeffs.get(j).copied().unwrap_or(0.0);
        let (sn, cs) = (j as f64 * w * s).sin_cos();
        c[j] = a * cs + b * sn;
        si[j] = b * cs - a * sn;
    }
    Potential::new(v.circumference, c, si)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn spectrum_is_chart_independent(v in low_degree(), s in 0.0..6.3f64) {
        let d = Discretization::new(5, 6, 2.0 * PI);
        let u = translated(&v, s);
        prop_assert!((u.eval(0.3, 0) - v.eval(0.3 + s, 0)).abs() < 1e-12);
        for p in 0..3 {
            let a = BismutAssembly::new(&d, &v, Sign::Plus, 0.3, 0.6).unwrap().block(p).to_dense();
            let b = BismutAssembly::new(&d, &u, Sign::Plus, 0.3, 0.6).unwrap().block(p).to_dense();
            let ea = linalg::eigvals(&a).unwrap().to_vec();
            let eb = linalg::eigvals(&b).unwrap().to_vec();
            let scale = ea.iter().map(|z| z.norm()).fold(1.0, f64::max);
            prop_assert!(linalg::hausdorff(&ea, &eb) < 1e-8 * scale);
        }
    }
}
