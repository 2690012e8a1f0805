use rand::seq::SliceRandom;
use rand::Rng as _;

use super::random::{gaussian, mix, mix_choi, simplex};
use super::{check_state, ConeDescription, FreeSet, Membership, Rng};
use crate::choi::{ChoiMatrix, KrausChannel};
use crate::conic::BlockCone;
use crate::error::{Error, Result};
use crate::linalg::space::{Block, BlockValue};
use crate::linalg::{eigvalsh, ComplexMatrix, DimVector, C64};

/// Largest total dimension where doubly nonnegative = convex hull of
/// nonnegative-amplitude pure states.
pub const DNN_EXACT_MAX_DIM: usize = 4;

fn dnn_margin(rho: &ComplexMatrix, psd: f64) -> f64 {
    let d = rho.rows();
    let mut min_re = f64::INFINITY;
    for i in 0..d {
        for j in 0..d {
            min_re = min_re.min(rho[(i, j)].re);
        }
    }
    (-rho.max_imag()).min(min_re).min(psd)
}

/// Mixtures of pure states with nonnegative amplitudes.
///
/// Exact for total dimension ≤ 4 (doubly nonnegative test). Above that only
/// rank-one inputs are decided (a pure state qualifies iff its projector is
/// entrywise nonnegative); mixed inputs give `UnsupportedDimension`.
pub fn dnn_membership(rho: &ComplexMatrix, tol: f64) -> Result<Membership> {
    let d = rho.require_hermitian(crate::linalg::HERMITIAN_TOL.max(1e-9 * rho.max_abs()))?;
    let vals = eigvalsh(rho)?;
    let psd = vals.first().copied().unwrap_or(0.0);
    if d > DNN_EXACT_MAX_DIM {
        let tr: f64 = vals.iter().sum();
        let second = if d >= 2 { vals[d - 2] } else { 0.0 };
        let rank_one = psd >= -1e-10 * tr.abs().max(1.0) && second <= 1e-10 * tr.abs().max(1.0);
        if !rank_one {
            return Err(Error::UnsupportedDimension(format!(
                "nonnegative-amplitude membership of mixed states is only exact up to dimension {DNN_EXACT_MAX_DIM}; got {d}"
            )));
        }
    }
    Ok(Membership::from_margin(dnn_margin(rho, psd), tol))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Dnn;

fn nonneg_pure(d: usize, rng: &mut Rng) -> Vec<C64> {
    let mut v: Vec<f64> = (0..d).map(|_| gaussian(rng).abs()).collect();
    // sometimes sparse, to reach the boundary
    if d > 1 && rng.random_bool(0.3) {
        let k = rng.random_range(0..d);
        v[k] = 0.0;
    }
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    v.into_iter().map(|x| C64::new(x / n, 0.0)).collect()
}

fn nonneg_mixture(d: usize, rng: &mut Rng) -> ComplexMatrix {
    let r = rng.random_range(1..=d + 1);
    let p = simplex(r, rng);
    let terms: Vec<ComplexMatrix> = (0..r).map(|_| ComplexMatrix::projector(&nonneg_pure(d, rng))).collect();
    mix(&terms, &p)
}

impl FreeSet for Dnn {
    fn name(&self) -> String {
        "dnn".into()
    }

    fn check_dims(&self, _dims: &DimVector) -> Result<()> {
        Ok(())
    }

    fn membership(&self, rho: &ComplexMatrix, dims: &DimVector, tol: f64) -> Result<Membership> {
        check_state(rho, dims)?;
        dnn_membership(rho, tol)
    }

    fn cone(&self, dims: &DimVector) -> Result<ConeDescription> {
        let d = dims.total();
        if d > DNN_EXACT_MAX_DIM {
            return Err(Error::UnsupportedDimension(format!(
                "no exact cone description for nonnegative-amplitude states in dimension {d}"
            )));
        }
        let mut cons = vec![ConeDescription::psd(d)];
        if d > 1 {
            cons.push(super::imaginarity::imag_part_constraint(d));
            let k = d * (d - 1) / 2;
            cons.push(ConeDescription::constraint(d, vec![Block::Weights(k)], BlockCone::Nonneg, move |x| {
                let mut w = Vec::with_capacity(k);
                for i in 0..d {
                    for j in i + 1..d {
                        w.push(x[(i, j)].re);
                    }
                }
                vec![BlockValue::Weights(w)]
            }));
        }
        Ok(ConeDescription::HRep(cons))
    }

    fn sample_state(&self, dims: &DimVector, rng: &mut Rng) -> Result<ComplexMatrix> {
        Ok(nonneg_mixture(dims.total(), rng))
    }

    fn sample_channel(&self, in_dims: &DimVector, out_dims: &DimVector, rng: &mut Rng) -> Result<ChoiMatrix> {
        let (din, dout) = (in_dims.total(), out_dims.total());
        let r = rng.random_range(1..=3);
        let mut parts = Vec::with_capacity(r);
        for _ in 0..r {
            let use_perm = din == dout && rng.random_bool(0.5);
            let c = if use_perm {
                // permutation of basis states
                let mut perm: Vec<usize> = (0..din).collect();
                perm.shuffle(rng);
                let mut u = ComplexMatrix::zeros(dout, din);
                for (j, &i) in perm.iter().enumerate() {
                    u[(i, j)] = C64::new(1.0, 0.0);
                }
                KrausChannel::with_dims(vec![u], in_dims.clone(), out_dims.clone())?.to_choi()?
            } else {
                // measure in the computational basis, prepare nonnegative states
                let mut m = ComplexMatrix::zeros(dout * din, dout * din);
                for i in 0..din {
                    let sigma = nonneg_mixture(dout, rng);
                    m += &sigma.kron(&ComplexMatrix::unit(din, i, i));
                }
                ChoiMatrix::new(m, out_dims.clone(), in_dims.clone(), false)?
            };
            parts.push(c);
        }
        let p = simplex(r, rng);
        Ok(mix_choi(&parts, &p))
    }

    fn default_dims(&self) -> Vec<DimVector> {
        vec![DimVector::single(2)]
    }
}
