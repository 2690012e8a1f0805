use choirt::choi::{choi_state, choi_state_dims, reorder_systems};
use choirt::linalg::*;
use choirt::theories::random::{gaussian_matrix, random_state, random_unitary};
use choirt::theories::Rng;
use proptest::prelude::*;
use rand::SeedableRng;

fn dims(v: &[usize]) -> DimVector {
    DimVector::new(v.to_vec()).unwrap()
}

fn hermitian(d: usize, rng: &mut Rng) -> ComplexMatrix {
    gaussian_matrix(d, d, false, rng).hermitize()
}

#[test]
fn tensor_basics() {
    assert_eq!(tensor(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)), ComplexMatrix::identity(4));
    let p = tensor(&ComplexMatrix::unit(2, 0, 0), &ComplexMatrix::unit(2, 1, 1));
    assert_eq!(p, ComplexMatrix::unit(4, 1, 1));
}

#[test]
fn choi_states_regroup() {
    // Φ_{AA'} ⊗ Φ_{BB'} with the middle pair swapped is Φ_{ABA'B'}
    for (a, b) in [(2, 2), (2, 3)] {
        let prod = choi_state(a).unwrap().matrix().kron(choi_state(b).unwrap().matrix());
        let re = reorder_systems(&prod, &dims(&[a, a, b, b]), &[0, 2, 1, 3]).unwrap();
        assert!(re.dist_max(choi_state_dims(&dims(&[a, b])).matrix()) <= 1e-15);
    }
}

#[test]
fn partial_trace_examples() {
    let phi = choi_state(2).unwrap();
    let r = partial_trace(phi.matrix(), &dims(&[2, 2]), &[0]).unwrap();
    assert!(r.dist_max(&ComplexMatrix::identity(2)) <= 1e-15);
    let mut rng = Rng::seed_from_u64(1);
    let (a, b) = (random_state(2, &mut rng), random_state(3, &mut rng));
    let r = partial_trace(&a.kron(&b), &dims(&[2, 3]), &[1]).unwrap();
    assert!(r.dist_max(&a) <= 1e-14);
    assert!(partial_trace(&a, &dims(&[3]), &[0]).is_err());
}

#[test]
fn partial_transpose_of_choi_state() {
    let phi = choi_state(2).unwrap().matrix().scale(0.5);
    let pt = partial_transpose(&phi, &dims(&[2, 2]), &[1]).unwrap();
    let swap = permutation_operator(&dims(&[2, 2]), &[1, 0]).unwrap().scale(0.5);
    assert!(pt.dist_max(&swap) <= 1e-15);
    let ev = eigvalsh(&pt).unwrap();
    let neg = ev.iter().filter(|&&e| (e + 0.5).abs() < 1e-12).count();
    let pos = ev.iter().filter(|&&e| (e - 0.5).abs() < 1e-12).count();
    assert_eq!((neg, pos), (1, 3));
    assert!((psd_margin(&pt).unwrap() + 0.5).abs() < 1e-12);
}

#[test]
fn norms_and_margins() {
    let z = ComplexMatrix::diag_real(&[1.0, -1.0]);
    assert_eq!(psd_margin(&ComplexMatrix::identity(4)).unwrap(), 1.0);
    assert!((psd_margin(&z).unwrap() + 1.0).abs() < 1e-15);
    assert!((trace_norm(&z) - 2.0).abs() < 1e-14);
    let mut rng = Rng::seed_from_u64(2);
    assert!((trace_norm(&random_state(3, &mut rng)) - 1.0).abs() < 1e-12);
    assert!(psd_margin(&ComplexMatrix::zeros(2, 3)).is_err());
}

#[test]
fn trace_norm_matches_eigenvalues() {
    let mut rng = Rng::seed_from_u64(3);
    for d in 1..=5 {
        let h = hermitian(d, &mut rng);
        let s: f64 = eigvalsh(&h).unwrap().iter().map(|e| e.abs()).sum();
        let svd: f64 = h.to_nalgebra().singular_values().iter().sum();
        assert!((trace_norm(&h) - s).abs() < 1e-10);
        assert!((svd - s).abs() < 1e-10);
    }
}

#[test]
fn matrix_json() {
    let m = ComplexMatrix::from_rows(&[vec![c(1.0, 0.5), cr(2.0)]]).unwrap();
    let s = serde_json::to_string(&m).unwrap();
    assert_eq!(s, r#"{"rows":1,"cols":2,"data":[[1.0,0.5],[2.0,0.0]]}"#);
    assert_eq!(serde_json::from_str::<ComplexMatrix>(&s).unwrap(), m);
    assert!(serde_json::from_str::<ComplexMatrix>(r#"{"rows":2,"cols":2,"data":[[1,0]]}"#).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tensor_associative_and_bilinear(seed in any::<u64>(), s in -2.0f64..2.0) {
        let mut rng = Rng::seed_from_u64(seed);
        let (a, b, c3) = (gaussian_matrix(2, 3, false, &mut rng), gaussian_matrix(2, 2, false, &mut rng), gaussian_matrix(1, 3, false, &mut rng));
        let l = tensor(&tensor(&a, &b), &c3);
        let r = tensor(&a, &tensor(&b, &c3));
        prop_assert!(l.dist_max(&r) < 1e-12);
        let a2 = gaussian_matrix(2, 3, false, &mut rng);
        let lin = tensor(&(&a + &a2.scale(s)), &b);
        let sep = &tensor(&a, &b) + &tensor(&a2, &b).scale(s);
        prop_assert!(lin.dist_max(&sep) < 1e-12);
    }

    #[test]
    fn partial_trace_of_product(seed in any::<u64>(), da in 1usize..=3, db in 1usize..=3) {
        let mut rng = Rng::seed_from_u64(seed);
        let (a, b) = (hermitian(da, &mut rng), hermitian(db, &mut rng));
        let r = partial_trace(&a.kron(&b), &dims(&[da, db]), &[1]).unwrap();
        prop_assert!(r.dist_max(&a.scale_c(b.trace())) < 1e-12);
        let full = hermitian(da * db, &mut rng);
        let t = partial_trace(&full, &dims(&[da, db]), &[0]).unwrap();
        prop_assert!((t.trace() - full.trace()).norm() < 1e-12);
    }

    #[test]
    fn partial_transpose_properties(seed in any::<u64>()) {
        let mut rng = Rng::seed_from_u64(seed);
        let d3 = dims(&[2, 3, 2]);
        let x = gaussian_matrix(12, 12, false, &mut rng);
        let twice = partial_transpose(&partial_transpose(&x, &d3, &[1]).unwrap(), &d3, &[1]).unwrap();
        prop_assert!(twice.dist_max(&x) < 1e-15);
        // commutes with tracing out a different factor
        let a = partial_trace(&partial_transpose(&x, &d3, &[1]).unwrap(), &d3, &[2]).unwrap();
        let b = partial_transpose(&partial_trace(&x, &d3, &[2]).unwrap(), &dims(&[2, 3]), &[1]).unwrap();
        prop_assert!(a.dist_max(&b) < 1e-12);
        // product factorization
        let (p, q) = (gaussian_matrix(2, 2, false, &mut rng), gaussian_matrix(3, 3, false, &mut rng));
        let pt = partial_transpose(&p.kron(&q), &dims(&[2, 3]), &[1]).unwrap();
        prop_assert!(pt.dist_max(&p.kron(&q.transpose())) < 1e-15);
    }

    #[test]
    fn psd_margin_is_min_eigenvalue(seed in any::<u64>(), d in 1usize..=5) {
        let mut rng = Rng::seed_from_u64(seed);
        let u = random_unitary(d, false, &mut rng);
        let diag: Vec<f64> = (0..d).map(|i| (i as f64) - 1.7 + 0.3 * (seed % 7) as f64).collect();
        let m = &(&u * &ComplexMatrix::diag_real(&diag)) * &u.adjoint();
        let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!((psd_margin(&m).unwrap() - min).abs() < 1e-10);
    }

    #[test]
    fn trace_norm_triangle(seed in any::<u64>(), d in 1usize..=4) {
        let mut rng = Rng::seed_from_u64(seed);
        let (a, b) = (hermitian(d, &mut rng), hermitian(d, &mut rng));
        prop_assert!(trace_norm(&(&a + &b)) <= trace_norm(&a) + trace_norm(&b) + 1e-10);
    }

    #[test]
    fn permutations_invert(seed in any::<u64>()) {
        let mut rng = Rng::seed_from_u64(seed);
        let d3 = dims(&[2, 3, 2]);
        let x = gaussian_matrix(12, 12, false, &mut rng);
        let perm = [2, 0, 1];
        let inv = [1, 2, 0];
        let y = permute_systems(&x, &d3, &perm).unwrap();
        let back = permute_systems(&y, &permute_dims(&d3, &perm), &inv).unwrap();
        prop_assert!(back.dist_max(&x) < 1e-15);
    }
}
