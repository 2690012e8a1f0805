//! Choi matrices of channels, link products and swap tensor products.
//!
//! Convention: a Choi matrix on `out ⊗ in` (output factors first) is
//! `M = (E ⊗ id)(Φ)` with `Φ = Σ_xy |xx><yy|`. Its *renormalized* form is
//! `M / d_in`, a state with maximally mixed input marginal.

mod kraus;

use serde::{Deserialize, Serialize};

pub use kraus::KrausChannel;

use crate::error::{Error, Result};
use crate::linalg::{
    partial_trace, permute_systems, psd_margin, ComplexMatrix, DimVector, C64, HERMITIAN_TOL,
};

/// Default tolerance for "is this a channel" checks on inputs.
pub const DEFAULT_CHANNEL_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChoiJson", into = "ChoiJson")]
pub struct ChoiMatrix {
    matrix: ComplexMatrix,
    out_dims: DimVector,
    in_dims: DimVector,
    normalized: bool,
}

#[derive(Serialize, Deserialize)]
struct ChoiJson {
    matrix: ComplexMatrix,
    out_dims: DimVector,
    in_dims: DimVector,
    #[serde(default)]
    normalized: bool,
}

impl TryFrom<ChoiJson> for ChoiMatrix {
    type Error = Error;
    fn try_from(j: ChoiJson) -> Result<Self> {
        ChoiMatrix::new(j.matrix, j.out_dims, j.in_dims, j.normalized)
    }
}

impl From<ChoiMatrix> for ChoiJson {
    fn from(c: ChoiMatrix) -> Self {
        ChoiJson { matrix: c.matrix, out_dims: c.out_dims, in_dims: c.in_dims, normalized: c.normalized }
    }
}

/// Result of [`is_renormalized_choi`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChoiCheck {
    pub ok: bool,
    /// max |tr_out μ - id/d_in| entrywise.
    pub marginal_residual: f64,
    pub psd_margin: f64,
}

impl ChoiMatrix {
    /// Wraps a Hermitian matrix on `out ⊗ in`. No channel check is made.
    pub fn new(matrix: ComplexMatrix, out_dims: DimVector, in_dims: DimVector, normalized: bool) -> Result<Self> {
        let d = matrix.require_hermitian(HERMITIAN_TOL.max(1e-9 * matrix.max_abs()))?;
        let expect = out_dims.total() * in_dims.total();
        if d != expect {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix side {d} but out {out_dims} x in {in_dims} = {expect}"
            )));
        }
        Ok(Self { matrix: matrix.hermitize(), out_dims, in_dims, normalized })
    }

    /// A state viewed as a channel from the trivial system.
    pub fn from_state(rho: &ComplexMatrix, dims: DimVector) -> Result<Self> {
        Self::new(rho.clone(), dims, DimVector::trivial(), false)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn out_dims(&self) -> &DimVector {
        &self.out_dims
    }

    pub fn in_dims(&self) -> &DimVector {
        &self.in_dims
    }

    /// `out ⊗ in`
    pub fn dims(&self) -> DimVector {
        self.out_dims.concat(&self.in_dims)
    }

    pub fn d_in(&self) -> usize {
        self.in_dims.total()
    }

    pub fn d_out(&self) -> usize {
        self.out_dims.total()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// The renormalized form μ = M / d_in.
    pub fn renormalized(&self) -> Self {
        if self.normalized {
            return self.clone();
        }
        Self {
            matrix: self.matrix.scale(1.0 / self.d_in() as f64),
            out_dims: self.out_dims.clone(),
            in_dims: self.in_dims.clone(),
            normalized: true,
        }
    }

    /// The unnormalized form M = d_in μ.
    pub fn unnormalized(&self) -> Self {
        if !self.normalized {
            return self.clone();
        }
        Self {
            matrix: self.matrix.scale(self.d_in() as f64),
            out_dims: self.out_dims.clone(),
            in_dims: self.in_dims.clone(),
            normalized: false,
        }
    }

    /// Input marginal tr_out of the matrix as stored.
    pub fn input_marginal(&self) -> ComplexMatrix {
        let traced: Vec<usize> = (0..self.out_dims.len()).collect();
        partial_trace(&self.matrix, &self.dims(), &traced).expect("dims validated on construction")
    }

    pub fn check(&self) -> ChoiCheck {
        let mu = self.renormalized();
        let din = self.d_in();
        let target = ComplexMatrix::identity(din).scale(1.0 / din as f64);
        let marginal_residual = mu.input_marginal().dist_max(&target);
        let psd_margin = psd_margin(&mu.matrix).unwrap_or(f64::NEG_INFINITY);
        ChoiCheck { ok: false, marginal_residual, psd_margin }
    }

    /// Errors unless this is the Choi matrix of a channel within `tol`.
    pub fn require_channel(&self, tol: f64) -> Result<()> {
        let c = is_renormalized_choi(self, tol);
        if c.ok {
            Ok(())
        } else {
            Err(Error::NotAChannel(format!(
                "marginal residual {:.3e}, psd margin {:.3e} (tolerance {tol:e})",
                c.marginal_residual, c.psd_margin
            )))
        }
    }
}

/// Checks positivity and the maximally mixed input marginal (after
/// renormalizing if needed). Both must hold within `tol`.
pub fn is_renormalized_choi(m: &ChoiMatrix, tol: f64) -> ChoiCheck {
    let mut c = m.check();
    c.ok = c.marginal_residual <= tol && c.psd_margin >= -tol;
    c
}

/// Unnormalized Choi matrix Φ of the identity on a system with factor dims
/// `dims` (output and input both `dims`).
pub fn choi_state_dims(dims: &DimVector) -> ChoiMatrix {
    let d = dims.total();
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for x in 0..d {
        for y in 0..d {
            m[(x * d + x, y * d + y)] = C64::new(1.0, 0.0);
        }
    }
    ChoiMatrix { matrix: m, out_dims: dims.clone(), in_dims: dims.clone(), normalized: false }
}

/// Φ for a single d-level system.
pub fn choi_state(d: usize) -> Result<ChoiMatrix> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    Ok(choi_state_dims(&DimVector::single(d)))
}

pub fn kraus_to_choi(ch: &KrausChannel) -> Result<ChoiMatrix> {
    ch.to_choi()
}

/// E(ρ) = tr_in[M (id_out ⊗ ρ^T)], after validating that `m` is a channel.
pub fn apply_channel(m: &ChoiMatrix, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    apply_channel_tol(m, rho, DEFAULT_CHANNEL_TOL)
}

pub fn apply_channel_tol(m: &ChoiMatrix, rho: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let din = m.d_in();
    if rho.require_square()? != din {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} for a channel with input dimension {din}",
            rho.rows()
        )));
    }
    m.require_channel(tol)?;
    Ok(apply_linear(m, rho))
}

/// The same contraction without channel validation (linear in both arguments).
pub fn apply_linear(m: &ChoiMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let full = m.unnormalized();
    link_raw(&full.matrix, m.d_out(), m.d_in(), rho, 1)
}

/// Raw link-product contraction of N on C ⊗ B with M on B ⊗ A:
/// T[(c,a),(c',a')] = Σ_{b,b'} N[(c,b),(c',b')] M[(b,a),(b',a')].
pub fn link_raw(n: &ComplexMatrix, dc: usize, db: usize, m: &ComplexMatrix, da: usize) -> ComplexMatrix {
    assert_eq!(n.rows(), dc * db);
    assert_eq!(m.rows(), db * da);
    let dt = dc * da;
    let mut t = ComplexMatrix::zeros(dt, dt);
    for c in 0..dc {
        for c2 in 0..dc {
            for b in 0..db {
                for b2 in 0..db {
                    let nv = n[(c * db + b, c2 * db + b2)];
                    if nv == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for a in 0..da {
                        for a2 in 0..da {
                            t[(c * da + a, c2 * da + a2)] += nv * m[(b * da + a, b2 * da + a2)];
                        }
                    }
                }
            }
        }
    }
    t
}

/// N * M for N on C:B and M on B:A. The result is renormalized unless both
/// inputs are unnormalized.
pub fn link_product(n: &ChoiMatrix, m: &ChoiMatrix) -> Result<ChoiMatrix> {
    if n.in_dims != m.out_dims {
        return Err(Error::DimensionMismatch(format!(
            "link product: left input {} differs from right output {}",
            n.in_dims, m.out_dims
        )));
    }
    let nu = n.unnormalized();
    let mu = m.unnormalized();
    let t = link_raw(&nu.matrix, n.d_out(), n.d_in(), &mu.matrix, m.d_in());
    let out = ChoiMatrix { matrix: t.hermitize(), out_dims: n.out_dims.clone(), in_dims: m.in_dims.clone(), normalized: false };
    Ok(if n.normalized || m.normalized { out.renormalized() } else { out })
}

/// Tensor product of M on B:A and N on D:C, reordered to (B D):(A C).
pub fn swap_tensor_product(m: &ChoiMatrix, n: &ChoiMatrix) -> Result<ChoiMatrix> {
    let both_norm = m.normalized && n.normalized;
    let (m, n) = if both_norm { (m.clone(), n.clone()) } else { (m.unnormalized(), n.unnormalized()) };
    let (lb, la, ld, lc) = (m.out_dims.len(), m.in_dims.len(), n.out_dims.len(), n.in_dims.len());
    let dims = m.dims().concat(&n.dims());
    // current slots: B[0..lb] A[lb..lb+la] D[..] C[..]
    let b: Vec<usize> = (0..lb).collect();
    let a: Vec<usize> = (lb..lb + la).collect();
    let d: Vec<usize> = (lb + la..lb + la + ld).collect();
    let c: Vec<usize> = (lb + la + ld..lb + la + ld + lc).collect();
    let perm: Vec<usize> = [b, d, a, c].concat();
    let matrix = permute_systems(&m.matrix.kron(&n.matrix), &dims, &perm)?;
    Ok(ChoiMatrix {
        matrix,
        out_dims: m.out_dims.concat(&n.out_dims),
        in_dims: m.in_dims.concat(&n.in_dims),
        normalized: both_norm,
    })
}

/// Reorders the tensor factors of `m` (new slot `j` = old factor `perm[j]`).
pub fn reorder_systems(m: &ComplexMatrix, dims: &DimVector, perm: &[usize]) -> Result<ComplexMatrix> {
    permute_systems(m, dims, perm)
}
