//! Free-state sets: membership, cone descriptions and seeded samplers.

mod athermal;
mod dnn;
mod ginv;
mod imaginarity;
mod ppt;
pub mod random;
mod stabilizer;
mod unrestricted;

use std::sync::Arc;

use rand::SeedableRng;

pub use athermal::Athermal;
pub use dnn::{dnn_membership, Dnn};
pub use ginv::{
    ginvariant_membership, representation_is_real_in_choi_basis, twirl, GInvariant,
    GroupRepresentation,
};
pub use imaginarity::{imaginarity_membership, Imaginarity};
pub use ppt::{ppt_membership, Bipartition, Ppt};
pub use stabilizer::{enumerate_stabilizer_states, stabilizer_membership, Stabilizer};
pub use unrestricted::Unrestricted;

use crate::choi::ChoiMatrix;
use crate::conic::{BlockCone, ProductCone};
use crate::error::{Error, Result};
use crate::linalg::space::{Block, LinearMap, Space};
use crate::linalg::{ComplexMatrix, DimVector};

/// Generator used by every sampler.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Default membership tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct Membership {
    pub member: bool,
    /// Signed distance-like score; `member` iff `margin >= -tol`.
    pub margin: f64,
    /// Convex weights over extreme points, when the test produces them.
    pub weights: Option<Vec<f64>>,
}

impl Membership {
    pub fn from_margin(margin: f64, tol: f64) -> Self {
        Self { member: margin >= -tol, margin, weights: None }
    }
}

/// The cone generated by the free states of one system.
#[derive(Clone, Debug, PartialEq)]
pub enum ConeDescription {
    /// X is in the cone iff every map sends it into its block cone. Maps
    /// have domain `Herm(d)`; PSD-ness must be one of the constraints.
    HRep(Vec<(LinearMap, ProductCone)>),
    /// Conic hull of these density matrices.
    VRep(Vec<ComplexMatrix>),
}

impl ConeDescription {
    /// Convenience for H-rep constraints on `Herm(d)`.
    pub fn constraint(d: usize, codomain: Vec<Block>, cone: BlockCone, f: impl Fn(&ComplexMatrix) -> Vec<crate::linalg::space::BlockValue>) -> (LinearMap, ProductCone) {
        use crate::linalg::space::Element;
        let dom = Space::new(vec![Block::Hermitian(d)]);
        let cod = Space::new(codomain);
        let map = LinearMap::from_fn(&dom, &cod, |e| {
            Element::new(&cod, f(&e.hermitian(0))).expect("constraint map output fits codomain")
        });
        let pc = ProductCone::uniform(&cod, cone).expect("valid block cone");
        (map, pc)
    }

    pub fn psd(d: usize) -> (LinearMap, ProductCone) {
        let sp = Space::new(vec![Block::Hermitian(d)]);
        (LinearMap::identity(&sp), ProductCone::uniform(&sp, BlockCone::Psd).expect("psd on Hermitian"))
    }
}

/// A free-state set.
pub trait FreeSet: Send + Sync {
    fn name(&self) -> String;

    /// Errors for dims this theory cannot handle.
    fn check_dims(&self, dims: &DimVector) -> Result<()>;

    fn membership(&self, rho: &ComplexMatrix, dims: &DimVector, tol: f64) -> Result<Membership>;

    fn cone(&self, dims: &DimVector) -> Result<ConeDescription>;

    fn sample_state(&self, dims: &DimVector, rng: &mut Rng) -> Result<ComplexMatrix>;

    /// Renormalized Choi on `out ⊗ in` of a free channel.
    fn sample_channel(&self, in_dims: &DimVector, out_dims: &DimVector, rng: &mut Rng) -> Result<ChoiMatrix>;

    /// A channel that is typically *not* free (used as a negative probe).
    fn sample_resource_channel(&self, in_dims: &DimVector, out_dims: &DimVector, rng: &mut Rng) -> Result<ChoiMatrix> {
        self.check_dims(in_dims)?;
        self.check_dims(out_dims)?;
        Ok(random::random_channel(in_dims, out_dims, false, rng))
    }

    /// Whether this theory is expected to satisfy the structural checks.
    fn expected_cdrt(&self) -> bool {
        true
    }

    /// Local systems used when none are specified.
    fn default_dims(&self) -> Vec<DimVector>;

    /// Groups of factors that move together under tensor products, partial
    /// traces and swaps (single factors unless the theory pairs them).
    fn units(&self, dims: &DimVector) -> Result<Vec<Vec<usize>>> {
        Ok((0..dims.len()).map(|i| vec![i]).collect())
    }
}

/// Validates a density-matrix argument against dims.
pub(crate) fn check_state(rho: &ComplexMatrix, dims: &DimVector) -> Result<usize> {
    let d = rho.require_hermitian(crate::linalg::HERMITIAN_TOL.max(1e-9 * rho.max_abs()))?;
    if d != dims.total() {
        return Err(Error::DimensionMismatch(format!("state of side {d} for dims {dims}")));
    }
    Ok(d)
}

/// Seeded sampler bound to one theory. Not shared across threads.
pub struct Sampler<'a> {
    theory: &'a dyn FreeSet,
    rng: Rng,
}

impl<'a> Sampler<'a> {
    pub fn new(theory: &'a dyn FreeSet, seed: u64) -> Self {
        Self { theory, rng: Rng::seed_from_u64(seed) }
    }

    pub fn state(&mut self, dims: &DimVector) -> Result<ComplexMatrix> {
        self.theory.sample_state(dims, &mut self.rng)
    }

    pub fn channel(&mut self, in_dims: &DimVector, out_dims: &DimVector) -> Result<ChoiMatrix> {
        self.theory.sample_channel(in_dims, out_dims, &mut self.rng)
    }

    pub fn resource_channel(&mut self, in_dims: &DimVector, out_dims: &DimVector) -> Result<ChoiMatrix> {
        self.theory.sample_resource_channel(in_dims, out_dims, &mut self.rng)
    }

    pub fn rng(&mut self) -> &mut Rng {
        &mut self.rng
    }
}

pub fn sample_free_state(theory: &dyn FreeSet, dims: &DimVector, seed: u64) -> Result<ComplexMatrix> {
    Sampler::new(theory, seed).state(dims)
}

pub fn sample_free_channel(theory: &dyn FreeSet, in_dims: &DimVector, out_dims: &DimVector, seed: u64) -> Result<ChoiMatrix> {
    Sampler::new(theory, seed).channel(in_dims, out_dims)
}

/// Names accepted by [`theory_by_name`] (besides `ginv:<file>`).
pub const BUILTIN_THEORIES: &[&str] = &[
    "imaginarity",
    "ppt",
    "sep",
    "dnn",
    "stabilizer",
    "ginv:z2",
    "ginv:z4",
    "unrestricted",
    "athermal-fixture",
];

/// Registry lookup. `ginv:<path>` loads a representation from a JSON file
/// holding a list of matrices.
pub fn theory_by_name(name: &str) -> Result<Arc<dyn FreeSet>> {
    Ok(match name {
        "imaginarity" => Arc::new(Imaginarity),
        "ppt" => Arc::new(Ppt::npt()),
        "sep" => Arc::new(Ppt::sep()),
        "dnn" => Arc::new(Dnn),
        "stabilizer" => Arc::new(Stabilizer::new()),
        "unrestricted" => Arc::new(Unrestricted),
        "athermal-fixture" => Arc::new(Athermal::qubit_fixture()),
        "ginv:z2" => Arc::new(GInvariant::new("ginv:z2", GroupRepresentation::z2_parity())),
        "ginv:z4" => Arc::new(GInvariant::new("ginv:z4", GroupRepresentation::z4_phase())),
        other => match other.strip_prefix("ginv:") {
            Some(path) if !path.is_empty() => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Parse(format!("cannot read representation `{path}`: {e}")))?;
                let rep = GroupRepresentation::from_json(&text)?;
                Arc::new(GInvariant::new(other, rep))
            }
            _ => return Err(Error::UnknownTheory(other.to_string())),
        },
    })
}
