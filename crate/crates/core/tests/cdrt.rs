use choirt::cdrt::*;
use choirt::choi::{ChoiMatrix, KrausChannel};
use choirt::linalg::*;
use choirt::theories::random::random_kraus;
use choirt::theories::{theory_by_name, Athermal, FreeSet, Imaginarity, Ppt, Rng, DEFAULT_TOL};
use rand::SeedableRng;

const TOL: f64 = DEFAULT_TOL;

fn dims(v: &[usize]) -> DimVector {
    DimVector::new(v.to_vec()).unwrap()
}

fn unitary_choi(u: ComplexMatrix) -> ChoiMatrix {
    KrausChannel::new(vec![u]).unwrap().to_choi().unwrap().renormalized()
}

fn s_gate() -> ChoiMatrix {
    let mut s = ComplexMatrix::identity(2);
    s[(1, 1)] = c(0.0, 1.0);
    unitary_choi(s)
}

#[test]
fn condition_one_examples() {
    assert!(check_condition_one(&Imaginarity, &dims(&[2]), TOL).passed());
    let ppt = Ppt::npt();
    for d in [dims(&[2, 2]), dims(&[2, 3])] {
        let r = check_condition_one(&ppt, &d, TOL);
        assert!(r.passed(), "{}", r.detail);
    }
    let ath = Athermal::qubit_fixture();
    let r = check_condition_one(&ath, &dims(&[2]), TOL);
    assert_eq!(r.verdict, Verdict::Fail);
    let cx = r.counterexample.unwrap();
    let (phi, pd) = normalized_choi_state(&dims(&[2]));
    assert_eq!(cx.state, phi);
    assert_eq!(cx.dims, pd);
    let z4 = theory_by_name("ginv:z4").unwrap();
    assert_eq!(check_condition_one(z4.as_ref(), &dims(&[2]), TOL).verdict, Verdict::Fail);
    assert!(!z4.expected_cdrt());
}

#[test]
fn condition_two_examples() {
    let q = dims(&[2]);
    let r = check_condition_two(&Imaginarity, &q, &q, 200, 7, TOL);
    assert!(r.passed() && r.samples == 200, "{}", r.detail);
    let ppt = Ppt::npt();
    let d = dims(&[2, 2]);
    let r = check_condition_two(&ppt, &d, &d, 200, 7, TOL);
    assert!(r.passed() && r.samples == 200, "{}", r.detail);
}

#[test]
fn corrupted_sampler_is_caught_and_replays() {
    let q = dims(&[2]);
    let r = check_condition_two_with(&Imaginarity, &q, &q, 50, 3, TOL, |t, rng, i| {
        // every fifth channel picks up a phase gate
        let mu = t.sample_channel(&q, &q, rng)?;
        if i % 5 == 4 {
            choirt::choi::link_product(&s_gate(), &mu)
        } else {
            Ok(mu)
        }
    });
    assert_eq!(r.verdict, Verdict::Fail);
    let cx = r.counterexample.clone().unwrap();
    assert!(cx.channel.is_some() && cx.input.is_some());
    let again = replay(&Imaginarity, &cx).unwrap();
    assert!(!again.member);
    assert_eq!(again.margin.to_bits(), cx.margin.to_bits());
    // survives a JSON roundtrip
    let back: Counterexample = serde_json::from_str(&serde_json::to_string(&cx).unwrap()).unwrap();
    assert_eq!(replay(&Imaginarity, &back).unwrap().margin.to_bits(), cx.margin.to_bits());
}

#[test]
fn minimal_closure_examples() {
    assert!(check_minimal_closure(&Imaginarity, &dims(&[2]), 20, 1, TOL).passed());
    let st = theory_by_name("stabilizer").unwrap();
    let r = check_minimal_closure(st.as_ref(), &dims(&[2]), 20, 1, TOL);
    assert!(r.passed(), "{}", r.detail);
    let ppt = Ppt::npt();
    // products here are 256x256; a few samples suffice
    let d = dims(&[2, 2, 2, 2]);
    let r = check_minimal_closure(&ppt, &d, 3, 1, TOL);
    assert!(r.passed(), "{}", r.detail);
}

#[test]
fn wrong_swap_bookkeeping_is_caught() {
    let ppt = Ppt::npt();
    let d = dims(&[2, 2, 2, 2]);
    let r = check_minimal_closure_with(&ppt, &d, 20, 1, TOL, SwapBookkeeping::Factor);
    assert_eq!(r.verdict, Verdict::Fail, "{}", r.detail);
    let cx = r.counterexample.unwrap();
    assert!(cx.description.starts_with("swap"));
    assert!(!replay(&ppt, &cx).unwrap().member);
}

#[test]
fn crng_examples() {
    let q = dims(&[2]);
    let mut rng = Rng::seed_from_u64(5);
    let real = random_kraus(&q, &q, 2, true, &mut rng).to_choi().unwrap();
    let r = check_crng_equivalence(&Imaginarity, &real, 10, 1, TOL).unwrap();
    let ev = r.crng.clone().unwrap();
    assert!(r.passed() && ev.choi_defined_free && ev.violations == 0 && ev.probes == 11);

    let r = check_crng_equivalence(&Imaginarity, &s_gate(), 10, 1, TOL).unwrap();
    let ev = r.crng.clone().unwrap();
    assert!(r.passed() && !ev.choi_defined_free && ev.choi_probe_violates);
    assert!(r.counterexample.is_some());

    for name in ["imaginarity", "ppt", "dnn", "stabilizer", "ginv:z2"] {
        let t = theory_by_name(name).unwrap();
        let d = t.default_dims()[0].clone();
        let id = unitary_choi(ComplexMatrix::identity(d.total()));
        let id = ChoiMatrix::new(id.into_matrix(), d.clone(), d.clone(), true).unwrap();
        let r = check_crng_equivalence(t.as_ref(), &id, 3, 1, TOL).unwrap();
        assert!(r.verdict != Verdict::Fail, "{name}: {}", r.detail);
        if r.passed() {
            assert!(r.crng.unwrap().choi_defined_free);
        }
    }
    // not a channel
    let bad = ChoiMatrix::new(ComplexMatrix::identity(4).scale(0.5), q.clone(), q, true).unwrap();
    assert!(check_crng_equivalence(&Imaginarity, &bad, 3, 1, TOL).is_err());
}

#[test]
fn suite_outcomes() {
    let opts = SuiteOptions { samples: 50, crng_channels: 2, crng_probes: 4, closure_samples: 5, tol: TOL };
    let im = run_full_suite(&Imaginarity, &[dims(&[2]), dims(&[3]), dims(&[4])], 7, &opts);
    assert!(im.iter().all(|r| r.passed()), "{:?}", im.iter().find(|r| !r.passed()));
    assert!(summarize(&Imaginarity, &im).ok);

    let ath = Athermal::qubit_fixture();
    let reps = run_full_suite(&ath, &ath.default_dims(), 7, &opts);
    let s = summarize(&ath, &reps);
    assert!(s.ok && s.condition_one_failures > 0);
    assert!(s.message.starts_with("expected-fail matched"));

    let z4 = theory_by_name("ginv:z4").unwrap();
    let reps = run_full_suite(z4.as_ref(), &z4.default_dims(), 7, &opts);
    let s = summarize(z4.as_ref(), &reps);
    assert!(s.ok && s.condition_one_failures > 0);
}

#[test]
fn suite_is_deterministic() {
    let opts = SuiteOptions { samples: 30, crng_channels: 2, crng_probes: 3, closure_samples: 4, tol: TOL };
    for name in ["imaginarity", "stabilizer", "ppt"] {
        let t = theory_by_name(name).unwrap();
        let a = serde_json::to_string(&run_full_suite(t.as_ref(), &t.default_dims(), 11, &opts)).unwrap();
        let b = serde_json::to_string(&run_full_suite(t.as_ref(), &t.default_dims(), 11, &opts)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn reports_serialize() {
    let r = check_condition_one(&Imaginarity, &dims(&[2]), TOL);
    let v = serde_json::to_value(&r).unwrap();
    assert_eq!(v["condition"], "condition-one");
    assert_eq!(v["verdict"], "pass");
    let back: VerificationReport = serde_json::from_value(v).unwrap();
    assert_eq!(back, r);
}

#[test]
fn unsupported_dims_are_reported() {
    let sep = theory_by_name("sep").unwrap();
    // the Choi state of a 2x2 system is a 4x4 cut: outside the PPT-exact range
    assert_eq!(check_condition_one(sep.as_ref(), &dims(&[2, 2]), TOL).verdict, Verdict::Unsupported);
    let dyn_ref: &dyn FreeSet = sep.as_ref();
    assert!(check_condition_two(dyn_ref, &dims(&[2, 2]), &dims(&[2, 2]), 10, 1, TOL).passed());
}
