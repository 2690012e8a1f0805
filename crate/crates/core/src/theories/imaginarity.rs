use rand::Rng as _;

use super::random::{random_channel, wishart_state};
use super::{check_state, ConeDescription, FreeSet, Membership, Rng};
use crate::choi::ChoiMatrix;
use crate::conic::BlockCone;
use crate::error::Result;
use crate::linalg::space::{Block, BlockValue};
use crate::linalg::{ComplexMatrix, DimVector};

/// Real density matrices (in the computational basis) are free.
#[derive(Clone, Copy, Debug, Default)]
pub struct Imaginarity;

pub fn imaginarity_membership(rho: &ComplexMatrix, dims: &DimVector, tol: f64) -> Result<Membership> {
    check_state(rho, dims)?;
    Ok(Membership::from_margin(-rho.max_imag(), tol))
}

/// Coordinates of Im X above the diagonal (zero iff X is real).
pub(crate) fn imag_part_constraint(d: usize) -> (crate::linalg::space::LinearMap, crate::conic::ProductCone) {
    let k = d * (d - 1) / 2;
    ConeDescription::constraint(d, vec![Block::Weights(k)], BlockCone::Zero, move |x| {
        let mut w = Vec::with_capacity(k);
        for i in 0..d {
            for j in i + 1..d {
                w.push(x[(i, j)].im);
            }
        }
        vec![BlockValue::Weights(w)]
    })
}

impl FreeSet for Imaginarity {
    fn name(&self) -> String {
        "imaginarity".into()
    }

    fn check_dims(&self, _dims: &DimVector) -> Result<()> {
        Ok(())
    }

    fn membership(&self, rho: &ComplexMatrix, dims: &DimVector, tol: f64) -> Result<Membership> {
        imaginarity_membership(rho, dims, tol)
    }

    fn cone(&self, dims: &DimVector) -> Result<ConeDescription> {
        let d = dims.total();
        let mut cons = vec![ConeDescription::psd(d)];
        if d > 1 {
            cons.push(imag_part_constraint(d));
        }
        Ok(ConeDescription::HRep(cons))
    }

    fn sample_state(&self, dims: &DimVector, rng: &mut Rng) -> Result<ComplexMatrix> {
        let d = dims.total();
        let rank = rng.random_range(1..=d);
        Ok(wishart_state(d, rank, true, rng))
    }

    fn sample_channel(&self, in_dims: &DimVector, out_dims: &DimVector, rng: &mut Rng) -> Result<ChoiMatrix> {
        Ok(random_channel(in_dims, out_dims, true, rng))
    }

    fn default_dims(&self) -> Vec<DimVector> {
        vec![DimVector::single(2), DimVector::single(3), DimVector::single(4)]
    }
}
