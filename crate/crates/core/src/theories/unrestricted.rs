use rand::Rng as _;

use super::random::{random_channel, wishart_state};
use super::{check_state, ConeDescription, FreeSet, Membership, Rng};
use crate::choi::ChoiMatrix;
use crate::error::Result;
use crate::linalg::{psd_margin, ComplexMatrix, DimVector};

/// Every state is free. Useful as a sanity baseline: all quantities vanish.
#[derive(Clone, Copy, Debug, Default)]
pub struct Unrestricted;

impl FreeSet for Unrestricted {
    fn name(&self) -> String {
        "unrestricted".into()
    }

    fn check_dims(&self, _dims: &DimVector) -> Result<()> {
        Ok(())
    }

    fn membership(&self, rho: &ComplexMatrix, dims: &DimVector, tol: f64) -> Result<Membership> {
        check_state(rho, dims)?;
        Ok(Membership::from_margin(psd_margin(rho)?, tol))
    }

    fn cone(&self, dims: &DimVector) -> Result<ConeDescription> {
        Ok(ConeDescription::HRep(vec![ConeDescription::psd(dims.total())]))
    }

    fn sample_state(&self, dims: &DimVector, rng: &mut Rng) -> Result<ComplexMatrix> {
        let d = dims.total();
        Ok(wishart_state(d, rng.random_range(1..=d), false, rng))
    }

    fn sample_channel(&self, in_dims: &DimVector, out_dims: &DimVector, rng: &mut Rng) -> Result<ChoiMatrix> {
        Ok(random_channel(in_dims, out_dims, false, rng))
    }

    fn default_dims(&self) -> Vec<DimVector> {
        vec![DimVector::single(2), DimVector::single(3)]
    }
}
