//! Seeded random states, unitaries and channels.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::Rng;
use crate::choi::{ChoiMatrix, KrausChannel};
use crate::linalg::{ComplexMatrix, DimVector, C64};

pub fn gaussian(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn complex_gaussian(rng: &mut Rng) -> C64 {
    C64::new(gaussian(rng), gaussian(rng)) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix(rows: usize, cols: usize, real: bool, rng: &mut Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| if real { C64::new(gaussian(rng), 0.0) } else { complex_gaussian(rng) })
}

/// G G^† / tr, G a d x rank Gaussian matrix.
pub fn wishart_state(d: usize, rank: usize, real: bool, rng: &mut Rng) -> ComplexMatrix {
    let g = gaussian_matrix(d, rank.max(1), real, rng);
    let w = &g * &g.adjoint();
    let t = w.trace().re;
    w.scale(1.0 / t)
}

pub fn random_state(d: usize, rng: &mut Rng) -> ComplexMatrix {
    let rank = rng.random_range(1..=d);
    wishart_state(d, rank, false, rng)
}

pub fn random_pure(d: usize, real: bool, rng: &mut Rng) -> Vec<C64> {
    let v: Vec<C64> = (0..d)
        .map(|_| if real { C64::new(gaussian(rng), 0.0) } else { complex_gaussian(rng) })
        .collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

/// Q of a QR factorization of a Gaussian matrix, with the phases of R's
/// diagonal moved into Q so the result is Haar distributed.
pub fn random_isometry(rows: usize, cols: usize, real: bool, rng: &mut Rng) -> ComplexMatrix {
    assert!(rows >= cols);
    let g = gaussian_matrix(rows, cols, real, rng).to_nalgebra();
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    ComplexMatrix::from_fn(rows, cols, |i, j| {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let v = q[(i, j)] * ph;
        if real { C64::new(v.re, 0.0) } else { v }
    })
}

pub fn random_unitary(d: usize, real: bool, rng: &mut Rng) -> ComplexMatrix {
    random_isometry(d, d, real, rng)
}

/// Channel with `k` Kraus operators cut from a random isometry C^din -> C^(dout k).
/// `k` is raised to ⌈din/dout⌉ when smaller, since no isometry fits otherwise.
pub fn random_kraus(in_dims: &DimVector, out_dims: &DimVector, k: usize, real: bool, rng: &mut Rng) -> KrausChannel {
    let (din, dout) = (in_dims.total(), out_dims.total());
    let k = k.max(din.div_ceil(dout));
    let v = random_isometry(dout * k, din, real, rng);
    let ops = (0..k)
        .map(|i| ComplexMatrix::from_fn(dout, din, |r, c| v[(i * dout + r, c)]))
        .collect();
    KrausChannel::with_dims(ops, in_dims.clone(), out_dims.clone()).expect("isometry blocks are trace preserving")
}

pub fn random_channel(in_dims: &DimVector, out_dims: &DimVector, real: bool, rng: &mut Rng) -> ChoiMatrix {
    let k = rng.random_range(1..=3);
    random_kraus(in_dims, out_dims, k, real, rng)
        .to_choi()
        .expect("valid Kraus")
        .renormalized()
}

/// Renormalized Choi of ρ ↦ tr(ρ) σ.
pub fn replacement_choi(sigma: &ComplexMatrix, out_dims: &DimVector, in_dims: &DimVector) -> ChoiMatrix {
    let din = in_dims.total();
    let m = sigma.kron(&ComplexMatrix::identity(din).scale(1.0 / din as f64));
    ChoiMatrix::new(m, out_dims.clone(), in_dims.clone(), true).expect("Hermitian by construction")
}

/// Random probability vector of length n (flat Dirichlet).
pub fn simplex(n: usize, rng: &mut Rng) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Σ p_i M_i for matrices of equal shape.
pub fn mix(ms: &[ComplexMatrix], p: &[f64]) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(ms[0].rows(), ms[0].cols());
    for (m, &w) in ms.iter().zip(p) {
        out += &m.scale(w);
    }
    out
}

/// Convex mixture of renormalized Chois sharing dims.
pub fn mix_choi(cs: &[ChoiMatrix], p: &[f64]) -> ChoiMatrix {
    let ms: Vec<ComplexMatrix> = cs.iter().map(|c| c.renormalized().matrix().clone()).collect();
    ChoiMatrix::new(mix(&ms, p), cs[0].out_dims().clone(), cs[0].in_dims().clone(), true).expect("mixture of Chois")
}
