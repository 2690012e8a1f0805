use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DimVector, C64};

use super::ChoiMatrix;

const TP_TOL: f64 = 1e-9;

/// Channel given by Kraus operators K_i : in -> out with Σ K_i^† K_i = id.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    ops: Vec<ComplexMatrix>,
    in_dims: DimVector,
    out_dims: DimVector,
}

impl KrausChannel {
    /// Single-factor input and output dimensions taken from the operators.
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::InvalidArgument("no Kraus operators".into()))?;
        let (r, c) = (first.rows(), first.cols());
        Self::with_dims(ops, DimVector::single(c), DimVector::single(r))
    }

    pub fn with_dims(ops: Vec<ComplexMatrix>, in_dims: DimVector, out_dims: DimVector) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::InvalidArgument("no Kraus operators".into()));
        }
        let (din, dout) = (in_dims.total(), out_dims.total());
        if let Some(k) = ops.iter().find(|k| k.rows() != dout || k.cols() != din) {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator is {}x{}, expected {dout}x{din}",
                k.rows(),
                k.cols()
            )));
        }
        let mut sum = ComplexMatrix::zeros(din, din);
        for k in &ops {
            sum += &(&k.adjoint() * k);
        }
        let deviation = sum.dist_max(&ComplexMatrix::identity(din));
        if deviation > TP_TOL {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(Self { ops, in_dims, out_dims })
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn in_dims(&self) -> &DimVector {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &DimVector {
        &self.out_dims
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.require_square()? != self.in_dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "state of dimension {} for input dimension {}",
                rho.rows(),
                self.in_dims.total()
            )));
        }
        let d = self.out_dims.total();
        let mut out = ComplexMatrix::zeros(d, d);
        for k in &self.ops {
            out += &(&(k * rho) * &k.adjoint());
        }
        Ok(out)
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &KrausChannel) -> Result<Self> {
        if first.out_dims != self.in_dims {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose: {} vs {}",
                first.out_dims, self.in_dims
            )));
        }
        let mut ops = Vec::with_capacity(self.ops.len() * first.ops.len());
        for a in &self.ops {
            for b in &first.ops {
                ops.push(a * b);
            }
        }
        Ok(Self { ops, in_dims: first.in_dims.clone(), out_dims: self.out_dims.clone() })
    }

    pub fn tensor(&self, other: &KrausChannel) -> Self {
        let mut ops = Vec::with_capacity(self.ops.len() * other.ops.len());
        for a in &self.ops {
            for b in &other.ops {
                ops.push(a.kron(b));
            }
        }
        Self {
            ops,
            in_dims: self.in_dims.concat(&other.in_dims),
            out_dims: self.out_dims.concat(&other.out_dims),
        }
    }

    /// Unnormalized Choi matrix Σ_i vec(K_i) vec(K_i)^†, output factor first.
    pub fn to_choi(&self) -> Result<ChoiMatrix> {
        let (din, dout) = (self.in_dims.total(), self.out_dims.total());
        let n = din * dout;
        let mut m = ComplexMatrix::zeros(n, n);
        for k in &self.ops {
            // vec(K)[b*din + a] = K[b, a]
            let v: Vec<C64> = k.data().to_vec();
            for i in 0..n {
                if v[i] == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    m[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        ChoiMatrix::new(m, self.out_dims.clone(), self.in_dims.clone(), false)
    }
}
