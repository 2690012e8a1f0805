use crate::error::{Error, Result};
use crate::linalg::space::{Block, LinearMap, Space};

/// Cone on a single block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockCone {
    /// The whole block.
    Free,
    /// Only zero.
    Zero,
    /// Entrywise nonnegative (scalar or weight blocks).
    Nonneg,
    /// Positive semidefinite (Hermitian blocks; nonnegative on scalars).
    Psd,
}

impl BlockCone {
    pub fn dual(self) -> BlockCone {
        match self {
            BlockCone::Free => BlockCone::Zero,
            BlockCone::Zero => BlockCone::Free,
            c => c,
        }
    }
}

/// One [`BlockCone`] per block of a space.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductCone {
    space: Space,
    cones: Vec<BlockCone>,
}

impl ProductCone {
    pub fn new(space: &Space, cones: Vec<BlockCone>) -> Result<Self> {
        if cones.len() != space.n_blocks() {
            return Err(Error::InvalidProgram(format!(
                "{} block cones for {} blocks",
                cones.len(),
                space.n_blocks()
            )));
        }
        for (b, c) in space.blocks().iter().zip(&cones) {
            let ok = match (b, c) {
                (_, BlockCone::Free | BlockCone::Zero) => true,
                (Block::Hermitian(_), BlockCone::Nonneg) => false,
                (Block::Weights(_), BlockCone::Psd) => false,
                _ => true,
            };
            if !ok {
                return Err(Error::InvalidProgram(format!("cone {c:?} is not defined on block {b}")));
            }
        }
        Ok(Self { space: space.clone(), cones })
    }

    /// Same cone on every block.
    pub fn uniform(space: &Space, c: BlockCone) -> Result<Self> {
        Self::new(space, vec![c; space.n_blocks()])
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn cones(&self) -> &[BlockCone] {
        &self.cones
    }

    pub fn dual(&self) -> Self {
        Self { space: self.space.clone(), cones: self.cones.iter().map(|c| c.dual()).collect() }
    }
}

/// A cone over some space, in one of two shapes:
///
/// * `Preimage`: `{ v : L_k v ∈ C_k for all k }`,
/// * `Image`:    `{ Σ_k L_k z_k : z_k ∈ C_k }`.
///
/// These are dual to each other (with adjoint maps and dual block cones),
/// so dualization never needs a generic polar computation.
#[derive(Clone, Debug, PartialEq)]
pub enum Cone {
    Preimage { space: Space, terms: Vec<(LinearMap, ProductCone)> },
    Image { space: Space, terms: Vec<(LinearMap, ProductCone)> },
}

impl Cone {
    /// A product cone on the space itself.
    pub fn product(pc: ProductCone) -> Self {
        let space = pc.space().clone();
        Cone::Preimage { terms: vec![(LinearMap::identity(&space), pc)], space }
    }

    pub fn uniform(space: &Space, c: BlockCone) -> Result<Self> {
        Ok(Self::product(ProductCone::uniform(space, c)?))
    }

    pub fn preimage(space: &Space, terms: Vec<(LinearMap, ProductCone)>) -> Result<Self> {
        for (l, c) in &terms {
            if l.domain() != space || l.codomain() != c.space() {
                return Err(Error::InvalidProgram(format!(
                    "preimage term {} -> {} does not fit space {} / cone on {}",
                    l.domain(),
                    l.codomain(),
                    space,
                    c.space()
                )));
            }
        }
        Ok(Cone::Preimage { space: space.clone(), terms })
    }

    pub fn image(space: &Space, terms: Vec<(LinearMap, ProductCone)>) -> Result<Self> {
        for (l, c) in &terms {
            if l.codomain() != space || l.domain() != c.space() {
                return Err(Error::InvalidProgram(format!(
                    "image term {} -> {} does not fit space {} / cone on {}",
                    l.domain(),
                    l.codomain(),
                    space,
                    c.space()
                )));
            }
        }
        Ok(Cone::Image { space: space.clone(), terms })
    }

    pub fn space(&self) -> &Space {
        match self {
            Cone::Preimage { space, .. } | Cone::Image { space, .. } => space,
        }
    }

    pub fn terms(&self) -> &[(LinearMap, ProductCone)] {
        match self {
            Cone::Preimage { terms, .. } | Cone::Image { terms, .. } => terms,
        }
    }

    pub fn dual(&self) -> Self {
        let flip = |terms: &[(LinearMap, ProductCone)]| -> Vec<(LinearMap, ProductCone)> {
            terms.iter().map(|(l, c)| (l.adjoint(), c.dual())).collect()
        };
        match self {
            Cone::Preimage { space, terms } => Cone::Image { space: space.clone(), terms: flip(terms) },
            Cone::Image { space, terms } => Cone::Preimage { space: space.clone(), terms: flip(terms) },
        }
    }
}
