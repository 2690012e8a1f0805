use super::random::replacement_choi;
use super::{check_state, ConeDescription, FreeSet, Membership, Rng};
use crate::choi::ChoiMatrix;
use crate::error::{Error, Result};
use crate::linalg::{operator_norm, ComplexMatrix, DimVector};

/// Negative fixture: a single free state per system (a fixed thermal state
/// γ and its tensor powers). Its free channels are the γ-preserving ones, and
/// the maximally entangled state is never free, so the structural checks are
/// expected to fail.
#[derive(Clone, Debug)]
pub struct Athermal {
    gamma: ComplexMatrix,
}

impl Athermal {
    /// `gamma` must be a full-rank density matrix on one local system.
    pub fn new(gamma: ComplexMatrix) -> Result<Self> {
        gamma.require_hermitian(1e-12)?;
        if (gamma.trace().re - 1.0).abs() > 1e-12 || crate::linalg::psd_margin(&gamma)? <= 0.0 {
            return Err(Error::InvalidArgument("thermal state must be a full-rank density matrix".into()));
        }
        Ok(Self { gamma })
    }

    /// γ = diag(0.7, 0.3) on a qubit.
    pub fn qubit_fixture() -> Self {
        Self::new(ComplexMatrix::diag_real(&[0.7, 0.3])).expect("valid fixture")
    }

    pub fn gamma(&self, dims: &DimVector) -> Result<ComplexMatrix> {
        let d = self.gamma.rows();
        if dims.as_slice().iter().any(|&x| x != d) {
            return Err(Error::UnsupportedDimension(format!("thermal fixture acts on dimension-{d} factors, got {dims}")));
        }
        Ok((0..dims.len()).fold(ComplexMatrix::identity(1), |acc, _| acc.kron(&self.gamma)))
    }
}

impl FreeSet for Athermal {
    fn name(&self) -> String {
        "athermal-fixture".into()
    }

    fn check_dims(&self, dims: &DimVector) -> Result<()> {
        self.gamma(dims).map(|_| ())
    }

    fn membership(&self, rho: &ComplexMatrix, dims: &DimVector, tol: f64) -> Result<Membership> {
        check_state(rho, dims)?;
        let g = self.gamma(dims)?;
        Ok(Membership::from_margin(-operator_norm(&(rho - &g)), tol))
    }

    fn cone(&self, dims: &DimVector) -> Result<ConeDescription> {
        Ok(ConeDescription::VRep(vec![self.gamma(dims)?]))
    }

    fn sample_state(&self, dims: &DimVector, _rng: &mut Rng) -> Result<ComplexMatrix> {
        self.gamma(dims)
    }

    /// Replacement by γ: the simplest γ-preserving channel.
    fn sample_channel(&self, in_dims: &DimVector, out_dims: &DimVector, _rng: &mut Rng) -> Result<ChoiMatrix> {
        self.check_dims(in_dims)?;
        Ok(replacement_choi(&self.gamma(out_dims)?, out_dims, in_dims))
    }

    fn expected_cdrt(&self) -> bool {
        false
    }

    fn default_dims(&self) -> Vec<DimVector> {
        vec![DimVector::single(self.gamma.rows())]
    }
}
