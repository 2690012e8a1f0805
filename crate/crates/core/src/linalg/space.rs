//! Real vector spaces built from Hermitian-matrix, scalar and weight blocks.
//!
//! Every block is given coordinates in an orthonormal basis (for the
//! Hilbert-Schmidt inner product on Hermitian blocks), so the adjoint of
//! a [`LinearMap`] is just the transpose of its coordinate matrix.

use std::f64::consts::SQRT_2;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Block {
    Scalar,
    /// d x d Hermitian matrices.
    Hermitian(usize),
    /// R^k
    Weights(usize),
}

impl Block {
    pub fn real_dim(&self) -> usize {
        match *self {
            Block::Scalar => 1,
            Block::Hermitian(d) => d * d,
            Block::Weights(k) => k,
        }
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Block::Scalar => write!(f, "R"),
            Block::Hermitian(d) => write!(f, "Herm({d})"),
            Block::Weights(k) => write!(f, "R^{k}"),
        }
    }
}

/// Direct sum of blocks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Space {
    blocks: Vec<Block>,
    offsets: Vec<usize>,
    dim: usize,
}

impl Space {
    pub fn new(blocks: Vec<Block>) -> Self {
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut dim = 0;
        for b in &blocks {
            offsets.push(dim);
            dim += b.real_dim();
        }
        Self { blocks, offsets, dim }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &Block {
        &self.blocks[k]
    }

    pub fn offset(&self, k: usize) -> usize {
        self.offsets[k]
    }

    pub fn range(&self, k: usize) -> std::ops::Range<usize> {
        self.offsets[k]..self.offsets[k] + self.blocks[k].real_dim()
    }

    /// Total real dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|b| b.to_string()).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// Coordinates of (the Hermitian part of) `m`.
///
/// Slot `(i, j)` in row-major order holds `m_ii` on the diagonal,
/// `sqrt2 Re m_ij` for `i < j` and `sqrt2 Im m_ji` for `i > j`.
pub fn herm_to_coords(m: &ComplexMatrix, out: &mut [f64]) {
    let d = m.rows();
    debug_assert_eq!(out.len(), d * d);
    for i in 0..d {
        for j in 0..d {
            out[i * d + j] = if i == j {
                m[(i, i)].re
            } else if i < j {
                SQRT_2 * 0.5 * (m[(i, j)].re + m[(j, i)].re)
            } else {
                SQRT_2 * 0.5 * (m[(i, j)].im - m[(j, i)].im)
            };
        }
    }
}

pub fn coords_to_herm(x: &[f64], d: usize) -> ComplexMatrix {
    debug_assert_eq!(x.len(), d * d);
    let h = 1.0 / SQRT_2;
    ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::new(x[i * d + i], 0.0)
        } else if i < j {
            C64::new(x[i * d + j] * h, -x[j * d + i] * h)
        } else {
            C64::new(x[j * d + i] * h, x[i * d + j] * h)
        }
    })
}

/// Value of a single block.
#[derive(Clone, Debug, PartialEq)]
pub enum BlockValue {
    Scalar(f64),
    Hermitian(ComplexMatrix),
    Weights(Vec<f64>),
}

/// A point of a [`Space`].
#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    space: Space,
    coords: Vec<f64>,
}

impl Element {
    pub fn zeros(space: &Space) -> Self {
        Self { space: space.clone(), coords: vec![0.0; space.dim()] }
    }

    pub fn from_coords(space: &Space, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != space.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates for a space of dimension {}",
                coords.len(),
                space.dim()
            )));
        }
        Ok(Self { space: space.clone(), coords })
    }

    /// Builds an element block by block; Hermitian blocks must be Hermitian.
    pub fn new(space: &Space, values: Vec<BlockValue>) -> Result<Self> {
        if values.len() != space.n_blocks() {
            return Err(Error::DimensionMismatch(format!(
                "{} block values for {} blocks",
                values.len(),
                space.n_blocks()
            )));
        }
        let mut e = Self::zeros(space);
        for (k, v) in values.into_iter().enumerate() {
            e.set_block(k, v)?;
        }
        Ok(e)
    }

    pub fn set_block(&mut self, k: usize, v: BlockValue) -> Result<()> {
        let r = self.space.range(k);
        match (self.space.block(k).clone(), v) {
            (Block::Scalar, BlockValue::Scalar(x)) => self.coords[r.start] = x,
            (Block::Weights(n), BlockValue::Weights(w)) if w.len() == n => {
                self.coords[r].copy_from_slice(&w)
            }
            (Block::Hermitian(d), BlockValue::Hermitian(m)) if m.rows() == d && m.cols() == d => {
                m.require_hermitian(1e-9_f64.max(1e-9 * m.max_abs()))?;
                herm_to_coords(&m, &mut self.coords[r]);
            }
            (b, v) => {
                return Err(Error::DimensionMismatch(format!(
                    "value {v:?} does not fit block {b}"
                )))
            }
        }
        Ok(())
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn block_coords(&self, k: usize) -> &[f64] {
        &self.coords[self.space.range(k)]
    }

    pub fn scalar(&self, k: usize) -> f64 {
        debug_assert_eq!(self.space.block(k), &Block::Scalar);
        self.coords[self.space.offset(k)]
    }

    pub fn weights(&self, k: usize) -> Vec<f64> {
        self.block_coords(k).to_vec()
    }

    pub fn hermitian(&self, k: usize) -> ComplexMatrix {
        match self.space.block(k) {
            Block::Hermitian(d) => coords_to_herm(self.block_coords(k), *d),
            b => panic!("block {k} is {b}, not Hermitian"),
        }
    }

    pub fn block_value(&self, k: usize) -> BlockValue {
        match self.space.block(k) {
            Block::Scalar => BlockValue::Scalar(self.scalar(k)),
            Block::Weights(_) => BlockValue::Weights(self.weights(k)),
            Block::Hermitian(_) => BlockValue::Hermitian(self.hermitian(k)),
        }
    }

    /// Real inner product (Hilbert-Schmidt on Hermitian blocks).
    pub fn inner(&self, other: &Element) -> f64 {
        debug_assert_eq!(self.space, other.space);
        self.coords.iter().zip(&other.coords).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, s: f64) -> Element {
        Element { space: self.space.clone(), coords: self.coords.iter().map(|x| x * s).collect() }
    }

    pub fn plus(&self, other: &Element) -> Element {
        debug_assert_eq!(self.space, other.space);
        Element {
            space: self.space.clone(),
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn minus(&self, other: &Element) -> Element {
        self.plus(&other.scaled(-1.0))
    }

    pub fn norm_inf(&self) -> f64 {
        self.coords.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}

/// Real-linear map between two spaces, stored as a dense coordinate matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    domain: Space,
    codomain: Space,
    matrix: DMatrix<f64>,
}

impl LinearMap {
    /// Tabulates `f` on the orthonormal basis of `domain`. `f` must be linear.
    pub fn from_fn(domain: &Space, codomain: &Space, f: impl Fn(&Element) -> Element) -> Self {
        let mut matrix = DMatrix::zeros(codomain.dim(), domain.dim());
        let mut e = Element::zeros(domain);
        for j in 0..domain.dim() {
            e.coords[j] = 1.0;
            let img = f(&e);
            assert_eq!(img.space(), codomain, "LinearMap::from_fn: image lies in the wrong space");
            for (i, v) in img.coords.iter().enumerate() {
                matrix[(i, j)] = *v;
            }
            e.coords[j] = 0.0;
        }
        Self { domain: domain.clone(), codomain: codomain.clone(), matrix }
    }

    pub fn from_matrix(domain: &Space, codomain: &Space, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != codomain.dim() || matrix.ncols() != domain.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for a map {} -> {}",
                matrix.nrows(),
                matrix.ncols(),
                domain,
                codomain
            )));
        }
        Ok(Self { domain: domain.clone(), codomain: codomain.clone(), matrix })
    }

    pub fn identity(space: &Space) -> Self {
        Self {
            domain: space.clone(),
            codomain: space.clone(),
            matrix: DMatrix::identity(space.dim(), space.dim()),
        }
    }

    pub fn domain(&self) -> &Space {
        &self.domain
    }

    pub fn codomain(&self) -> &Space {
        &self.codomain
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, x: &Element) -> Element {
        assert_eq!(x.space(), &self.domain, "LinearMap::apply: argument in the wrong space");
        let v = &self.matrix * DVector::from_column_slice(&x.coords);
        Element { space: self.codomain.clone(), coords: v.as_slice().to_vec() }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            matrix: self.matrix.transpose(),
        }
    }

    /// `self` after `inner`.
    pub fn compose(&self, inner: &LinearMap) -> Result<Self> {
        if inner.codomain != self.domain {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {} -> {} after {} -> {}",
                self.domain, self.codomain, inner.domain, inner.codomain
            )));
        }
        Ok(Self {
            domain: inner.domain.clone(),
            codomain: self.codomain.clone(),
            matrix: &self.matrix * &inner.matrix,
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { domain: self.domain.clone(), codomain: self.codomain.clone(), matrix: &self.matrix * s }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn herm3() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[
            vec![C64::new(1.0, 0.0), C64::new(0.3, 0.7), C64::new(-0.2, 0.1)],
            vec![C64::new(0.3, -0.7), C64::new(-2.0, 0.0), C64::new(0.0, 0.5)],
            vec![C64::new(-0.2, -0.1), C64::new(0.0, -0.5), C64::new(0.4, 0.0)],
        ])
        .unwrap()
    }

    #[test]
    fn coordinates_are_isometric() {
        let a = herm3();
        let b = ComplexMatrix::identity(3).scale(0.5) + ComplexMatrix::projector(&[
            C64::new(0.0, 1.0),
            C64::new(1.0, 0.0),
            C64::new(0.5, -0.5),
        ]);
        let mut ca = vec![0.0; 9];
        let mut cb = vec![0.0; 9];
        herm_to_coords(&a, &mut ca);
        herm_to_coords(&b, &mut cb);
        let dot: f64 = ca.iter().zip(&cb).map(|(x, y)| x * y).sum();
        assert!((dot - (&a * &b).trace().re).abs() < 1e-12);
        assert!(coords_to_herm(&ca, 3).dist_max(&a) < 1e-15);
    }

    #[test]
    fn adjoint_matches_inner_products() {
        let dom = Space::new(vec![Block::Scalar, Block::Hermitian(2)]);
        let cod = Space::new(vec![Block::Hermitian(2), Block::Weights(2)]);
        let map = LinearMap::from_fn(&dom, &cod, |e| {
            let x = e.scalar(0);
            let m = e.hermitian(1);
            let y = ComplexMatrix::identity(2).scale(x) + m.transpose();
            Element::new(&cod, vec![
                BlockValue::Hermitian(y),
                BlockValue::Weights(vec![m.trace().re, m[(0, 1)].im]),
            ])
            .unwrap()
        });
        let u = Element::new(&dom, vec![
            BlockValue::Scalar(0.7),
            BlockValue::Hermitian(ComplexMatrix::from_fn(2, 2, |i, j| herm3()[(i, j)])),
        ])
        .unwrap();
        let v = Element::from_coords(&cod, vec![0.1, -0.4, 0.9, 0.3, 1.2, -0.8]).unwrap();
        let lhs = map.apply(&u).inner(&v);
        let rhs = u.inner(&map.adjoint().apply(&v));
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn wrong_block_rejected() {
        let s = Space::new(vec![Block::Hermitian(2)]);
        assert!(Element::new(&s, vec![BlockValue::Scalar(1.0)]).is_err());
        assert!(Element::new(&s, vec![BlockValue::Hermitian(ComplexMatrix::unit(2, 0, 1))]).is_err());
    }
}
