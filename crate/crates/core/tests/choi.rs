use choirt::choi::*;
use choirt::linalg::*;
use choirt::theories::random::{random_kraus, random_state};
use choirt::theories::Rng;
use proptest::prelude::*;
use rand::{Rng as _, SeedableRng};

fn ambiguous_m() -> ComplexMatrix {
    ComplexMatrix::from_real(
        4,
        4,
        &[1., 2., 0., 0., 2., 4., 0., 0., 0., 0., 4., -2., 0., 0., -2., 1.],
    )
    .scale(0.2)
}

fn ket0() -> ComplexMatrix {
    ComplexMatrix::unit(2, 0, 0)
}

#[test]
fn ambiguous_matrix_under_both_readings() {
    let m = ambiguous_m();
    let q = DimVector::single(2);
    let out_first = ChoiMatrix::new(m.clone(), q.clone(), q.clone(), false).unwrap();
    let img = apply_channel(&out_first, &ket0()).unwrap();
    assert!(img.dist_max(&ComplexMatrix::diag_real(&[0.2, 0.8])) <= 1e-12);

    // the other convention puts the input factor first
    let swapped = reorder_systems(&m, &DimVector::new(vec![2, 2]).unwrap(), &[1, 0]).unwrap();
    let in_first = ChoiMatrix::new(swapped, q.clone(), q, false).unwrap();
    let img = apply_channel(&in_first, &ket0()).unwrap();
    let expect = ComplexMatrix::from_real(2, 2, &[1., 2., 2., 4.]).scale(0.2);
    assert!(img.dist_max(&expect) <= 1e-12);

    let d = DimVector::new(vec![2, 2]).unwrap();
    let id = ComplexMatrix::identity(2);
    assert!(partial_trace(&m, &d, &[0]).unwrap().dist_max(&id) <= 1e-12);
    assert!(partial_trace(&m, &d, &[1]).unwrap().dist_max(&id) <= 1e-12);
}

/// |Φ⟩ = Σ_i |ii⟩ as a column.
fn phi_ket(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d * d, 1, |r, _| if r / d == r % d { cr(1.0) } else { cr(0.0) })
}

#[test]
fn snake_identities() {
    for d in 2..=4 {
        let id = ComplexMatrix::identity(d);
        let ket = phi_ket(d);
        let bra = ket.adjoint();
        // (id_A ⊗ ⟨Φ|_{A'A''}) (|Φ⟩_{AA'} ⊗ id_{A''}) = id
        let left = &id.kron(&bra) * &ket.kron(&id);
        assert!(left.dist_max(&id) <= 1e-12, "d={d}");
        // (⟨Φ|_{AA'} ⊗ id_{A''}) (id_A ⊗ |Φ⟩_{A'A''}) = id
        let right = &bra.kron(&id) * &id.kron(&ket);
        assert!(right.dist_max(&id) <= 1e-12, "d={d}");
        // linking Φ with itself gives Φ back
        let phi = choi_state(d).unwrap();
        assert!(link_product(&phi, &phi).unwrap().matrix().dist_max(phi.matrix()) <= 1e-12);
    }
}

#[test]
fn link_product_is_composition() {
    let mut rng = Rng::seed_from_u64(11);
    for _ in 0..50 {
        let da = DimVector::single(rng.random_range(2..=3));
        let db = DimVector::single(rng.random_range(2..=3));
        let dc = DimVector::single(rng.random_range(2..=3));
        let m = random_kraus(&da, &db, rng.random_range(1..=3), false, &mut rng);
        let n = random_kraus(&db, &dc, rng.random_range(1..=3), false, &mut rng);
        let linked = link_product(&n.to_choi().unwrap(), &m.to_choi().unwrap()).unwrap();
        let direct = n.compose(&m).unwrap().to_choi().unwrap();
        assert!(linked.matrix().dist_max(direct.matrix()) <= 1e-10);
        assert!(!linked.is_normalized());
        // renormalized inputs give the renormalized composition
        let ln = link_product(&n.to_choi().unwrap().renormalized(), &m.to_choi().unwrap().renormalized()).unwrap();
        assert!(ln.matrix().dist_max(direct.renormalized().matrix()) <= 1e-10);
    }
}

#[test]
fn swap_tensor_is_parallel_composition() {
    let mut rng = Rng::seed_from_u64(12);
    for _ in 0..50 {
        let dims: Vec<DimVector> = (0..4).map(|_| DimVector::single(rng.random_range(2..=3))).collect();
        let m = random_kraus(&dims[0], &dims[1], rng.random_range(1..=2), false, &mut rng);
        let n = random_kraus(&dims[2], &dims[3], rng.random_range(1..=2), false, &mut rng);
        let st = swap_tensor_product(&m.to_choi().unwrap(), &n.to_choi().unwrap()).unwrap();
        let direct = m.tensor(&n).to_choi().unwrap();
        assert_eq!(st.out_dims(), direct.out_dims());
        assert_eq!(st.in_dims(), direct.in_dims());
        assert!(st.matrix().dist_max(direct.matrix()) <= 1e-10);
    }
}

#[test]
fn choi_application_matches_kraus() {
    let mut rng = Rng::seed_from_u64(13);
    for _ in 0..20 {
        let da = DimVector::single(rng.random_range(1..=4));
        let db = DimVector::single(rng.random_range(1..=4));
        let k = random_kraus(&da, &db, 2, false, &mut rng);
        let rho = random_state(da.total(), &mut rng);
        let via_choi = apply_channel(&k.to_choi().unwrap().renormalized(), &rho).unwrap();
        assert!(via_choi.dist_max(&k.apply(&rho).unwrap()) <= 1e-12);
    }
}

#[test]
fn identity_choi_is_phi() {
    let k = KrausChannel::new(vec![ComplexMatrix::identity(3)]).unwrap();
    assert!(kraus_to_choi(&k).unwrap().matrix().dist_max(choi_state(3).unwrap().matrix()) <= 1e-15);
}

#[test]
fn channel_checks() {
    let m = ChoiMatrix::new(ambiguous_m(), DimVector::single(2), DimVector::single(2), false).unwrap();
    assert!(is_renormalized_choi(&m, 1e-12).ok);
    // not trace preserving: scale the matrix
    let bad = ChoiMatrix::new(ambiguous_m().scale(1.5), DimVector::single(2), DimVector::single(2), false).unwrap();
    assert!(!is_renormalized_choi(&bad, 1e-8).ok);
    assert!(apply_channel(&bad, &ket0()).is_err());
    // the transpose map is positive but not completely positive
    let swap = permutation_operator(&DimVector::new(vec![2, 2]).unwrap(), &[1, 0]).unwrap();
    let t = ChoiMatrix::new(swap, DimVector::single(2), DimVector::single(2), false).unwrap();
    let chk = is_renormalized_choi(&t, 1e-8);
    assert!(chk.marginal_residual < 1e-12 && chk.psd_margin < -0.1);
    // linear application still works
    let rho = ComplexMatrix::from_rows(&[vec![c(0.5, 0.), c(0.1, 0.2)], vec![c(0.1, -0.2), c(0.5, 0.)]]).unwrap();
    assert!(apply_linear(&t, &rho).dist_max(&rho.transpose()) <= 1e-15);
}

#[test]
fn dimension_errors() {
    let phi = choi_state(2).unwrap();
    let three = choi_state(3).unwrap();
    assert!(link_product(&phi, &three).is_err());
    assert!(apply_channel(&phi, &ComplexMatrix::identity(3)).is_err());
    assert!(ChoiMatrix::new(ComplexMatrix::identity(6), DimVector::single(2), DimVector::single(2), false).is_err());
    assert!(KrausChannel::new(vec![ComplexMatrix::identity(2).scale(2.0)]).is_err());
}

#[test]
fn json_roundtrip() {
    let m = ChoiMatrix::new(ambiguous_m(), DimVector::single(2), DimVector::single(2), true).unwrap();
    let s = serde_json::to_string(&m).unwrap();
    let back: ChoiMatrix = serde_json::from_str(&s).unwrap();
    assert_eq!(m, back);
}

fn small_channel() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 1usize..=3, 1usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn renormalized_choi_invariants((seed, din, dout) in small_channel()) {
        let mut rng = Rng::seed_from_u64(seed);
        let k = random_kraus(&DimVector::single(din), &DimVector::single(dout), 2, false, &mut rng);
        let mu = k.to_choi().unwrap().renormalized();
        prop_assert!((mu.matrix().trace().re - 1.0).abs() < 1e-12);
        let marg = mu.input_marginal();
        prop_assert!(marg.dist_max(&ComplexMatrix::identity(din).scale(1.0 / din as f64)) < 1e-12);
        prop_assert!(psd_margin(mu.matrix()).unwrap() > -1e-12);
    }

    #[test]
    fn link_product_associative(seed in any::<u64>()) {
        let mut rng = Rng::seed_from_u64(seed);
        let d: Vec<DimVector> = (0..4).map(|_| DimVector::single(rng.random_range(1..=3))).collect();
        let a = random_kraus(&d[0], &d[1], 2, false, &mut rng).to_choi().unwrap();
        let b = random_kraus(&d[1], &d[2], 2, false, &mut rng).to_choi().unwrap();
        let c = random_kraus(&d[2], &d[3], 2, false, &mut rng).to_choi().unwrap();
        let l = link_product(&link_product(&c, &b).unwrap(), &a).unwrap();
        let r = link_product(&c, &link_product(&b, &a).unwrap()).unwrap();
        prop_assert!(l.matrix().dist_max(r.matrix()) < 1e-10);
    }

    #[test]
    fn channels_preserve_trace_and_positivity(seed in any::<u64>()) {
        let mut rng = Rng::seed_from_u64(seed);
        let (din, dout) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let mu = random_kraus(&DimVector::single(din), &DimVector::single(dout), 3, false, &mut rng).to_choi().unwrap();
        let rho = random_state(din, &mut rng);
        let out = apply_channel(&mu, &rho).unwrap();
        prop_assert!((out.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(psd_margin(&out).unwrap() > -1e-12);
    }

    #[test]
    fn swap_tensor_then_apply_is_product(seed in any::<u64>()) {
        let mut rng = Rng::seed_from_u64(seed);
        let q = DimVector::single(2);
        let m = random_kraus(&q, &q, 2, false, &mut rng);
        let n = random_kraus(&q, &DimVector::single(3), 2, false, &mut rng);
        let st = swap_tensor_product(&m.to_choi().unwrap(), &n.to_choi().unwrap()).unwrap();
        let (r1, r2) = (random_state(2, &mut rng), random_state(2, &mut rng));
        let lhs = apply_channel(&st, &r1.kron(&r2)).unwrap();
        let rhs = m.apply(&r1).unwrap().kron(&n.apply(&r2).unwrap());
        prop_assert!(lhs.dist_max(&rhs) < 1e-12);
    }
}
