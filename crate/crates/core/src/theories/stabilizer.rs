use std::collections::{HashSet, VecDeque};
use std::sync::OnceLock;

use rand::Rng as _;

use super::random::{mix, mix_choi, simplex};
use super::{check_state, ConeDescription, FreeSet, Membership, Rng};
use crate::choi::{ChoiMatrix, KrausChannel};
use crate::conic::{solve, BlockCone, Cone, ConicProgram, ProductCone, Sense, SolveStatus, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::space::{Block, BlockValue, Element, LinearMap, Space};
use crate::linalg::{eigh, ComplexMatrix, DimVector, C64};

/// Largest register for which the full stabilizer polytope is enumerated.
pub const MAX_ENUMERATED_QUBITS: usize = 2;

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

fn hadamard_on(n: usize, q: usize) -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    single_on(n, q, &ComplexMatrix::from_real(2, 2, &[h, h, h, -h]))
}

fn phase_on(n: usize, q: usize) -> ComplexMatrix {
    let mut s = ComplexMatrix::identity(2);
    s[(1, 1)] = C64::new(0.0, 1.0);
    single_on(n, q, &s)
}

fn single_on(n: usize, q: usize, g: &ComplexMatrix) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    (0..n).fold(ComplexMatrix::identity(1), |m, k| m.kron(if k == q { g } else { &id }))
}

/// CNOT with control `c` and target `t`; qubit 0 is the most significant bit.
fn cnot_on(n: usize, c: usize, t: usize) -> ComplexMatrix {
    let d = 1 << n;
    let mut m = ComplexMatrix::zeros(d, d);
    for x in 0..d {
        let cb = (x >> (n - 1 - c)) & 1;
        let y = if cb == 1 { x ^ (1 << (n - 1 - t)) } else { x };
        m[(y, x)] = one();
    }
    m
}

/// H, S on every qubit and CNOT on every ordered pair.
fn clifford_generators(n: usize) -> Vec<ComplexMatrix> {
    let mut g = Vec::new();
    for q in 0..n {
        g.push(hadamard_on(n, q));
        g.push(phase_on(n, q));
    }
    for c in 0..n {
        for t in 0..n {
            if c != t {
                g.push(cnot_on(n, c, t));
            }
        }
    }
    g
}

fn projector_key(p: &ComplexMatrix) -> Vec<(i64, i64)> {
    p.data().iter().map(|z| ((z.re * 1e10).round() as i64, (z.im * 1e10).round() as i64)).collect()
}

/// All pure stabilizer states on `n ≤ 2` qubits, as projectors, found by a
/// breadth-first search of the Clifford orbit of |0…0⟩.
pub fn enumerate_stabilizer_states(n: usize) -> Result<Vec<ComplexMatrix>> {
    if n == 0 || n > MAX_ENUMERATED_QUBITS {
        return Err(Error::UnsupportedDimension(format!(
            "stabilizer enumeration supports 1..={MAX_ENUMERATED_QUBITS} qubits, got {n}"
        )));
    }
    let d = 1 << n;
    let gens = clifford_generators(n);
    let mut start = vec![C64::new(0.0, 0.0); d];
    start[0] = one();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    let p0 = ComplexMatrix::projector(&start);
    seen.insert(projector_key(&p0));
    out.push(p0);
    queue.push_back(start);
    while let Some(psi) = queue.pop_front() {
        for g in &gens {
            let phi = g.mul_vec(&psi);
            let p = ComplexMatrix::projector(&phi);
            if seen.insert(projector_key(&p)) {
                out.push(p);
                queue.push_back(phi);
            }
        }
    }
    Ok(out)
}

fn cached_states(n: usize) -> Result<&'static [ComplexMatrix]> {
    static ONE: OnceLock<Vec<ComplexMatrix>> = OnceLock::new();
    static TWO: OnceLock<Vec<ComplexMatrix>> = OnceLock::new();
    let cell = match n {
        1 => &ONE,
        2 => &TWO,
        _ => return enumerate_stabilizer_states(n).map(|_| unreachable!()),
    };
    Ok(cell.get_or_init(|| enumerate_stabilizer_states(n).expect("n is 1 or 2")))
}

fn qubit_count(dims: &DimVector) -> Result<usize> {
    if dims.is_empty() || dims.as_slice().iter().any(|&d| d != 2) {
        return Err(Error::UnsupportedDimension(format!("stabilizer theory needs qubit factors, got {dims}")));
    }
    Ok(dims.len())
}

/// ⟨P⟩ for every n-qubit Pauli string.
fn pauli_expectations(rho: &ComplexMatrix, n: usize) -> Vec<f64> {
    let d = 1usize << n;
    let mut out = Vec::with_capacity(d * d);
    for code in 0..(1usize << (2 * n)) {
        // per qubit: 0 = I, 1 = X, 2 = Z, 3 = Y
        let mut xmask = 0usize;
        for q in 0..n {
            let p = (code >> (2 * q)) & 3;
            if p == 1 || p == 3 {
                xmask |= 1 << (n - 1 - q);
            }
        }
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..d {
            let mut f = one();
            for q in 0..n {
                let p = (code >> (2 * q)) & 3;
                let bit = (r >> (n - 1 - q)) & 1;
                let sgn = if bit == 1 { -1.0 } else { 1.0 };
                f *= match p {
                    0 | 1 => one(),
                    2 => C64::new(sgn, 0.0),
                    _ => C64::new(0.0, -sgn),
                };
            }
            // tr(ρP) = Σ_r P[r, r^x] ρ[r^x, r]
            acc += f * rho[(r ^ xmask, r)];
        }
        out.push(acc.re);
    }
    out
}

/// Pure-state test valid for any n: ψ is a stabilizer state iff exactly 2^n
/// Pauli expectations have modulus one, equivalently Σ_P ⟨P⟩⁴ = 2^n.
fn pure_stabilizer_margin(rho: &ComplexMatrix, n: usize) -> f64 {
    let e = pauli_expectations(rho, n);
    let s: f64 = e.iter().map(|x| x.powi(4)).sum();
    -(1.0 - s / (1u64 << n) as f64)
}

fn is_rank_one(rho: &ComplexMatrix) -> Result<bool> {
    let (vals, _) = eigh(rho)?;
    let d = vals.len();
    let tr: f64 = vals.iter().sum();
    Ok(d == 1 || (vals[0] >= -1e-10 && vals[d - 2] <= 1e-10 * tr.max(1.0)))
}

/// ∞-norm distance (in Hermitian coordinates) from ρ to the stabilizer
/// polytope, with the optimal convex weights.
fn polytope_distance(rho: &ComplexMatrix, states: &[ComplexMatrix]) -> Result<(f64, Vec<f64>)> {
    let d = rho.rows();
    let k = states.len();
    let nc = d * d;
    let vs = Space::new(vec![Block::Weights(k), Block::Scalar]);
    let cs = Space::new(vec![Block::Weights(nc), Block::Weights(nc), Block::Scalar]);
    let herm = Space::new(vec![Block::Hermitian(d)]);
    let coords = |m: &ComplexMatrix| Element::new(&herm, vec![BlockValue::Hermitian(m.clone())]).map(|e| e.coords().to_vec());
    let s_coords: Vec<Vec<f64>> = states.iter().map(coords).collect::<Result<_>>()?;
    let map = LinearMap::from_fn(&vs, &cs, |e| {
        let w = e.weights(0);
        let t = e.scalar(1);
        let mut mix = vec![0.0; nc];
        for (wi, sc) in w.iter().zip(&s_coords) {
            for (m, s) in mix.iter_mut().zip(sc) {
                *m += wi * s;
            }
        }
        let up: Vec<f64> = mix.iter().map(|m| t - m).collect();
        let lo: Vec<f64> = mix.iter().map(|m| t + m).collect();
        Element::new(&cs, vec![BlockValue::Weights(up), BlockValue::Weights(lo), BlockValue::Scalar(w.iter().sum())]).unwrap()
    });
    let rc = coords(rho)?;
    let offset = Element::new(&cs, vec![
        BlockValue::Weights(rc.iter().map(|x| -x).collect()),
        BlockValue::Weights(rc.clone()),
        BlockValue::Scalar(1.0),
    ])?;
    let cost = Element::new(&vs, vec![BlockValue::Weights(vec![0.0; k]), BlockValue::Scalar(1.0)])?;
    let var_cone = Cone::product(ProductCone::new(&vs, vec![BlockCone::Nonneg, BlockCone::Free])?);
    let con_cone = Cone::product(ProductCone::new(&cs, vec![BlockCone::Nonneg, BlockCone::Nonneg, BlockCone::Zero])?);
    let p = ConicProgram::new(Sense::Min, var_cone, con_cone, map, cost, offset, "stabilizer polytope distance")?;
    let opts = SolverOptions { gap_tol: 1e-11, feas_tol: 1e-11, max_iter: 200, ..SolverOptions::default() };
    let sol = solve(&p, &opts)?;
    match sol.status {
        SolveStatus::Optimal | SolveStatus::MaxIterations => {
            let x = sol.primal.expect("primal point on optimal");
            Ok((x.scalar(1).max(0.0), x.weights(0)))
        }
        s => Err(Error::Solver(format!("polytope distance LP ended with status {s}"))),
    }
}

/// Membership in the stabilizer polytope. For n ≤ 2 an LP over the
/// enumerated pure states (margin = −distance, witness weights); for larger
/// n only pure inputs are decided exactly.
pub fn stabilizer_membership(rho: &ComplexMatrix, n_qubits: usize, tol: f64) -> Result<Membership> {
    let dims = DimVector::new(vec![2; n_qubits])?;
    check_state(rho, &dims)?;
    if n_qubits <= MAX_ENUMERATED_QUBITS {
        let states = cached_states(n_qubits)?;
        let (t, w) = polytope_distance(rho, states)?;
        let mut m = Membership::from_margin(-t, tol);
        m.weights = Some(w);
        return Ok(m);
    }
    if is_rank_one(rho)? {
        return Ok(Membership::from_margin(pure_stabilizer_margin(rho, n_qubits), tol));
    }
    Err(Error::UnsupportedDimension(format!(
        "mixed-state stabilizer membership supports at most {MAX_ENUMERATED_QUBITS} qubits, got {n_qubits}"
    )))
}

#[derive(Clone, Debug, Default)]
pub struct Stabilizer;

impl Stabilizer {
    pub fn new() -> Self {
        Stabilizer
    }
}

fn random_clifford(n: usize, rng: &mut Rng) -> ComplexMatrix {
    let gens = clifford_generators(n);
    let len = rng.random_range(5..25);
    let mut u = ComplexMatrix::identity(1 << n);
    for _ in 0..len {
        u = &gens[rng.random_range(0..gens.len())] * &u;
    }
    u
}

fn random_stabilizer_mixture(n: usize, rng: &mut Rng) -> Result<ComplexMatrix> {
    let states = cached_states(n)?;
    let r = rng.random_range(1..=6);
    let picks: Vec<ComplexMatrix> = (0..r).map(|_| states[rng.random_range(0..states.len())].clone()).collect();
    Ok(mix(&picks, &simplex(r, rng)))
}

impl FreeSet for Stabilizer {
    fn name(&self) -> String {
        "stabilizer".into()
    }

    fn check_dims(&self, dims: &DimVector) -> Result<()> {
        qubit_count(dims).map(|_| ())
    }

    fn membership(&self, rho: &ComplexMatrix, dims: &DimVector, tol: f64) -> Result<Membership> {
        stabilizer_membership(rho, qubit_count(dims)?, tol)
    }

    fn cone(&self, dims: &DimVector) -> Result<ConeDescription> {
        let n = qubit_count(dims)?;
        Ok(ConeDescription::VRep(cached_states(n)?.to_vec()))
    }

    fn sample_state(&self, dims: &DimVector, rng: &mut Rng) -> Result<ComplexMatrix> {
        random_stabilizer_mixture(qubit_count(dims)?, rng)
    }

    fn sample_channel(&self, in_dims: &DimVector, out_dims: &DimVector, rng: &mut Rng) -> Result<ChoiMatrix> {
        let nin = qubit_count(in_dims)?;
        let nout = qubit_count(out_dims)?;
        let (din, dout) = (1usize << nin, 1usize << nout);
        let r = rng.random_range(1..=3);
        let mut parts = Vec::with_capacity(r);
        for _ in 0..r {
            let c = match rng.random_range(0..3) {
                0 if nin == nout => {
                    let u = random_clifford(nin, rng);
                    KrausChannel::with_dims(vec![u], in_dims.clone(), out_dims.clone())?.to_choi()?
                }
                1 => {
                    // measure Z on every input qubit, prepare a stabilizer state per outcome
                    let mut m = ComplexMatrix::zeros(dout * din, dout * din);
                    for i in 0..din {
                        let sigma = random_stabilizer_mixture(nout, rng)?;
                        m += &sigma.kron(&ComplexMatrix::unit(din, i, i));
                    }
                    ChoiMatrix::new(m, out_dims.clone(), in_dims.clone(), false)?
                }
                _ => {
                    let sigma = random_stabilizer_mixture(nout, rng)?;
                    super::random::replacement_choi(&sigma, out_dims, in_dims)
                }
            };
            parts.push(c);
        }
        Ok(mix_choi(&parts, &simplex(r, rng)))
    }

    fn sample_resource_channel(&self, in_dims: &DimVector, out_dims: &DimVector, rng: &mut Rng) -> Result<ChoiMatrix> {
        let nin = qubit_count(in_dims)?;
        let nout = qubit_count(out_dims)?;
        if nin != nout {
            return Ok(super::random::random_channel(in_dims, out_dims, false, rng));
        }
        // T gate on a random qubit, dressed by Cliffords
        let mut t = ComplexMatrix::identity(2);
        t[(1, 1)] = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let q = rng.random_range(0..nin);
        let u = &(&random_clifford(nin, rng) * &single_on(nin, q, &t)) * &random_clifford(nin, rng);
        Ok(KrausChannel::with_dims(vec![u], in_dims.clone(), out_dims.clone())?.to_choi()?.renormalized())
    }

    fn default_dims(&self) -> Vec<DimVector> {
        vec![DimVector::single(2)]
    }
}
