//! Property-based invariants across the operator algebra, the model and the
//! closed-form tier.

use faer::Mat;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use optoblock::analytic::g2_analytic;
use optoblock::fock::{annihilation, creation, embed, make_space, HilbertSpace, OperatorMatrix, StorageKind};
use optoblock::model::{build_full_hamiltonian, derived_couplings, SystemParams};
use optoblock::sweep::{evaluate_params, SolverSettings, Tier, Truncations};

fn local(d: usize, vals: &[(f64, f64)]) -> Mat<C64> {
    Mat::from_fn(d, d, |i, j| {
        let (re, im) = vals[(i * d + j) % vals.len()];
        C64::new(re, im)
    })
}

fn sparse_random(space: &HilbertSpace, vals: &[(f64, f64)], kind: StorageKind) -> OperatorMatrix {
    let n = space.total_dim();
    let trips: Vec<_> = vals
        .iter()
        .enumerate()
        .map(|(k, &(re, im))| ((k * 7) % n, (k * 13 + 3) % n, C64::new(re, im)))
        .collect();
    OperatorMatrix::from_triplets(space, &trips, kind).unwrap()
}

fn entries() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 1..40)
}

fn space_dims() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..5, 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adjoint_is_involution(dims in space_dims(), a in entries()) {
        let s = make_space(&dims).unwrap();
        let m = sparse_random(&s, &a, StorageKind::Sparse);
        prop_assert_eq!(m.adjoint().adjoint().max_abs_diff(&m).unwrap(), 0.0);
    }

    #[test]
    fn adjoint_reverses_products(dims in space_dims(), a in entries(), b in entries()) {
        let s = make_space(&dims).unwrap();
        let x = sparse_random(&s, &a, StorageKind::Dense);
        let y = sparse_random(&s, &b, StorageKind::Sparse);
        let lhs = x.mul(&y).unwrap().adjoint();
        let rhs = y.adjoint().mul(&x.adjoint()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);
    }

    #[test]
    fn embedding_commutes_with_products(dims in space_dims(), a in entries(), b in entries(), pick in 0usize..3) {
        let s = make_space(&dims).unwrap();
        let mode = pick % dims.len();
        let d = dims[mode];
        let (la, lb) = (local(d, &a), local(d, &b));
        let prod = &la * &lb;
        let lhs = embed(&s, mode, &prod).unwrap();
        let rhs = embed(&s, mode, &la).unwrap().mul(&embed(&s, mode, &lb).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);
    }

    #[test]
    fn distinct_modes_commute(a in entries(), b in entries(), d0 in 2usize..5, d1 in 2usize..5) {
        let s = make_space(&[d0, d1]).unwrap();
        let x = embed(&s, 0, &local(d0, &a)).unwrap();
        let y = embed(&s, 1, &local(d1, &b)).unwrap();
        // sparse products hold one term per entry, so the commutator is exactly zero
        let (xs, ys) = (x.with_storage(StorageKind::Sparse), y.with_storage(StorageKind::Sparse));
        prop_assert_eq!(xs.commutator(&ys).unwrap().max_abs(), 0.0);
        // dense kernels sum explicit zeros in a different order
        let (xd, yd) = (x.with_storage(StorageKind::Dense), y.with_storage(StorageKind::Dense));
        prop_assert!(xd.commutator(&yd).unwrap().max_abs() <= 1e-15 * x.max_abs() * y.max_abs() * 8.0);
    }

    #[test]
    fn sparse_dense_parity(dims in space_dims(), a in entries(), b in entries()) {
        let s = make_space(&dims).unwrap();
        let (xs, ys) = (sparse_random(&s, &a, StorageKind::Sparse), sparse_random(&s, &b, StorageKind::Sparse));
        let (xd, yd) = (xs.with_storage(StorageKind::Dense), ys.with_storage(StorageKind::Dense));
        let pairs = [
            (xs.add(&ys).unwrap(), xd.add(&yd).unwrap()),
            (xs.mul(&ys).unwrap(), xd.mul(&yd).unwrap()),
            (xs.commutator(&ys).unwrap(), xd.commutator(&yd).unwrap()),
            (xs.adjoint(), xd.adjoint()),
        ];
        for (sp, de) in pairs {
            prop_assert!(sp.max_abs_diff(&de).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn ladder_commutator_deviates_only_at_top(d in 2usize..9) {
        let s = make_space(&[d]).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let c = a.commutator(&creation(&s, 0).unwrap()).unwrap();
        for i in 0..d {
            let want = if i + 1 == d { -((d - 1) as f64) } else { 1.0 };
            prop_assert!((c.get(i, i) - C64::new(want, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn full_hamiltonian_is_hermitian(
        gk in 0.0..1000.0f64, gw in 0.0..1000.0f64, dc in -5e5..5e5f64, de in -5e5..5e5f64, j in 0.0..5e5f64,
    ) {
        let mut p = SystemParams::baseline();
        p.gamma = 1e3;
        p.g_kappa = gk;
        p.g_omega = gw;
        p.delta_c = dc;
        p.delta_e = de;
        p.j = j;
        let s = make_space(&[3, 3, 4]).unwrap();
        let h = build_full_hamiltonian(&p, &s).unwrap();
        prop_assert!(h.max_abs_diff(&h.adjoint()).unwrap() < 1e-12 * h.max_abs().max(1.0));
    }

    #[test]
    fn derived_couplings_are_pure(dc in -5e5..5e5f64, gk in 0.0..1000.0f64) {
        let mut p = SystemParams::baseline();
        p.delta_c = dc;
        p.g_kappa = gk;
        let (a, b) = (derived_couplings(&p), derived_couplings(&p));
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn hyperbola_is_blockade_locus(k in 0.0..1.0f64, j in 5e4..4e5f64) {
        // one decade of delta_c on the hyperbola delta_c * delta_e = J²
        let dc = -j * 10f64.powf(k - 0.5);
        let mut p = SystemParams::baseline();
        p.j = j;
        p.delta_c = dc;
        p.delta_e = j * j / dc;
        prop_assert!(g2_analytic(&p).g2_c < 1e-8);
    }

    #[test]
    fn swapping_detunings_changes_g2c(dc in -5e5..-1e4f64, de in 1e4..5e5f64) {
        let mut p = SystemParams::baseline();
        p.delta_c = dc;
        p.delta_e = de;
        let mut q = p.clone();
        q.delta_c = de;
        q.delta_e = dc;
        let (a, b) = (g2_analytic(&p).g2_c, g2_analytic(&q).g2_c);
        prop_assert!((a - b).abs() > 1e-12 * a.abs().max(b.abs()));
    }
}

#[test]
fn equal_detunings_swap_trivially() {
    let p = SystemParams::baseline().with_detuning(-1.3e5);
    let mut q = p.clone();
    std::mem::swap(&mut q.delta_c, &mut q.delta_e);
    assert_eq!(g2_analytic(&p).g2_c, g2_analytic(&q).g2_c);
}

#[test]
fn uniform_rescaling_is_not_a_symmetry() {
    let mut p = SystemParams::baseline();
    // on the blockade hyperbola, where the finite losses set the dip depth
    p.delta_c = -1e5;
    p.delta_e = -4e5;
    let mut q = p.clone();
    let s = 3.0;
    for v in [&mut q.delta_c, &mut q.delta_e, &mut q.j, &mut q.omega_m, &mut q.g_omega, &mut q.g_kappa] {
        *v *= s;
    }
    // the closed form is homogeneous of degree zero in these six rates
    let (a, b) = (g2_analytic(&p).g2_c, g2_analytic(&q).g2_c);
    assert!((a - b).abs() <= 1e-12 * a.max(1e-30), "closed form changed under rescaling: {a} vs {b}");
    // losses and drives stay fixed, so the master-equation tier does change
    let t = Truncations { effective: 5, ..Truncations::default() };
    let solver = SolverSettings::default();
    let m = |p: &SystemParams| evaluate_params(p, &[], Tier::MasterEffective, &t, &solver).g2_c.unwrap();
    let (a, b) = (m(&p), m(&q));
    assert!((a - b).abs() > 1e-6 * a, "master tier unchanged under rescaling: {a} vs {b}");
    // rescaling the detunings alone is not a symmetry of the closed form
    let mut r = p.clone();
    r.delta_c *= s;
    r.delta_e *= s;
    let (a, c) = (g2_analytic(&p).g2_c, g2_analytic(&r).g2_c);
    assert!((a - c).abs() > 1e-6 * a, "detuning rescaling left g2_c unchanged: {a} vs {c}");
}

#[test]
fn dissipative_coupling_deepens_blockade_on_resonant_line() {
    for d in [-2e5, -1.5e5, -1e5, -5e4] {
        let mut p = SystemParams::baseline().with_detuning(d);
        p.j = -d;
        let mut last = f64::INFINITY;
        for gk in [0.0, 200.0, 400.0, 600.0] {
            p.g_kappa = gk;
            let g = g2_analytic(&p).g2_c;
            assert!(g <= last * (1.0 + 1e-12), "g2_c rose at g_kappa = {gk}, delta = {d}: {g} > {last}");
            last = g;
        }
    }
}
