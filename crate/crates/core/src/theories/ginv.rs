use rand::Rng as _;
use serde_json::Value;

use super::random::{random_channel, wishart_state};
use super::{check_state, ConeDescription, FreeSet, Membership, Rng};
use crate::choi::ChoiMatrix;
use crate::conic::BlockCone;
use crate::error::{Error, Result};
use crate::linalg::space::{Block, BlockValue};
use crate::linalg::{operator_norm, ComplexMatrix, DimVector, C64};

const UNITARY_TOL: f64 = 1e-9;
const CLOSURE_TOL: f64 = 1e-8;

/// A finite group, given by unitary matrices on one local system.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupRepresentation {
    elements: Vec<ComplexMatrix>,
    dim: usize,
}

impl GroupRepresentation {
    /// Validates shapes, unitarity and closure under multiplication.
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let first = elements.first().ok_or_else(|| Error::InvalidArgument("empty representation".into()))?;
        let dim = first.require_square()?;
        for u in &elements {
            if u.rows() != dim || u.cols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "representation mixes {dim}x{dim} and {}x{} matrices",
                    u.rows(),
                    u.cols()
                )));
            }
            let dev = (&u.adjoint() * u).dist_max(&ComplexMatrix::identity(dim));
            if dev > UNITARY_TOL {
                return Err(Error::InvalidArgument(format!("representation element is not unitary (deviation {dev:.3e})")));
            }
        }
        for a in &elements {
            for b in &elements {
                let ab = a * b;
                if !elements.iter().any(|g| g.dist_max(&ab) <= CLOSURE_TOL) {
                    return Err(Error::InvalidArgument("representation is not closed under multiplication".into()));
                }
            }
        }
        Ok(Self { elements, dim })
    }

    pub fn trivial(dim: usize) -> Self {
        Self { elements: vec![ComplexMatrix::identity(dim)], dim }
    }

    /// {id, diag(1,−1)} on a qubit.
    pub fn z2_parity() -> Self {
        Self::new(vec![ComplexMatrix::identity(2), ComplexMatrix::diag_real(&[1.0, -1.0])]).expect("valid group")
    }

    /// Powers of diag(1, i) on a qubit; not real.
    pub fn z4_phase() -> Self {
        let els = (0..4)
            .map(|k| {
                let mut u = ComplexMatrix::identity(2);
                u[(1, 1)] = C64::new(0.0, 1.0).powu(k);
                u
            })
            .collect();
        Self::new(els).expect("valid group")
    }

    /// A JSON list of matrices. Each matrix is either the wire object
    /// `{"rows","cols","data"}` or nested rows whose entries are numbers or
    /// `[re, im]` pairs.
    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("representation JSON: {e}")))?;
        let list = v.as_array().ok_or_else(|| Error::Parse("representation must be a JSON list of matrices".into()))?;
        let mats = list.iter().map(parse_matrix).collect::<Result<Vec<_>>>()?;
        Self::new(mats)
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// The representation on a composite system: `U` itself when the total
    /// dimension matches, else `U^{⊗k}` when every factor matches.
    pub fn on_dims(&self, dims: &DimVector) -> Result<Vec<ComplexMatrix>> {
        if dims.total() == self.dim {
            return Ok(self.elements.clone());
        }
        if dims.as_slice().iter().all(|&d| d == self.dim) {
            return Ok(self
                .elements
                .iter()
                .map(|u| (0..dims.len()).fold(ComplexMatrix::identity(1), |acc, _| acc.kron(u)))
                .collect());
        }
        Err(Error::DimensionMismatch(format!(
            "representation of dimension {} does not act on dims {dims}",
            self.dim
        )))
    }
}

fn parse_entry(e: &Value) -> Result<C64> {
    if let Some(x) = e.as_f64() {
        return Ok(C64::new(x, 0.0));
    }
    match e.as_array().map(|a| a.as_slice()) {
        Some([re, im]) => match (re.as_f64(), im.as_f64()) {
            (Some(re), Some(im)) => Ok(C64::new(re, im)),
            _ => Err(Error::Parse(format!("bad complex entry {e}"))),
        },
        _ => Err(Error::Parse(format!("bad matrix entry {e}"))),
    }
}

fn parse_matrix(v: &Value) -> Result<ComplexMatrix> {
    if v.is_object() {
        return serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("matrix object: {e}")));
    }
    let rows = v.as_array().ok_or_else(|| Error::Parse(format!("expected a matrix, got {v}")))?;
    let rows = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| Error::Parse(format!("expected a row, got {r}")))?
                .iter()
                .map(parse_entry)
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ComplexMatrix::from_rows(&rows)
}

fn twirl_with(rho: &ComplexMatrix, us: &[ComplexMatrix]) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(rho.rows(), rho.cols());
    for u in us {
        acc += &(&(u * rho) * &u.adjoint());
    }
    acc.scale(1.0 / us.len() as f64)
}

/// Group average of U_g ρ U_g†.
pub fn twirl(rho: &ComplexMatrix, rep: &GroupRepresentation) -> Result<ComplexMatrix> {
    let d = rho.require_square()?;
    if d != rep.dim {
        return Err(Error::DimensionMismatch(format!("state of side {d} for a representation of dimension {}", rep.dim)));
    }
    Ok(twirl_with(rho, &rep.elements))
}

/// Free iff ρ equals its twirl; margin is −‖ρ − twirl(ρ)‖_∞ (operator norm).
pub fn ginvariant_membership(rho: &ComplexMatrix, rep: &GroupRepresentation, tol: f64) -> Result<Membership> {
    let t = twirl(rho, rep)?;
    Ok(Membership::from_margin(-operator_norm(&(rho - &t)), tol))
}

/// Whether U_g U_gᵀ = id for every element, i.e. the maximally entangled
/// vector is invariant under U_g ⊗ U_g.
pub fn representation_is_real_in_choi_basis(rep: &GroupRepresentation, tol: f64) -> bool {
    let id = ComplexMatrix::identity(rep.dim);
    rep.elements.iter().all(|u| (u * &u.transpose()).dist_max(&id) <= tol)
}

/// States invariant under a group action.
#[derive(Clone, Debug)]
pub struct GInvariant {
    name: String,
    rep: GroupRepresentation,
}

impl GInvariant {
    pub fn new(name: impl Into<String>, rep: GroupRepresentation) -> Self {
        Self { name: name.into(), rep }
    }

    pub fn representation(&self) -> &GroupRepresentation {
        &self.rep
    }
}

impl FreeSet for GInvariant {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn check_dims(&self, dims: &DimVector) -> Result<()> {
        self.rep.on_dims(dims).map(|_| ())
    }

    fn membership(&self, rho: &ComplexMatrix, dims: &DimVector, tol: f64) -> Result<Membership> {
        check_state(rho, dims)?;
        let us = self.rep.on_dims(dims)?;
        let t = twirl_with(rho, &us);
        Ok(Membership::from_margin(-operator_norm(&(rho - &t)), tol))
    }

    fn cone(&self, dims: &DimVector) -> Result<ConeDescription> {
        let us = self.rep.on_dims(dims)?;
        let d = dims.total();
        let mut cons = vec![ConeDescription::psd(d)];
        for u in us {
            let ud = u.adjoint();
            cons.push(ConeDescription::constraint(d, vec![Block::Hermitian(d)], BlockCone::Zero, move |x| {
                let y = &(&(&u * x) * &ud) - x;
                vec![BlockValue::Hermitian(y.hermitize())]
            }));
        }
        Ok(ConeDescription::HRep(cons))
    }

    fn sample_state(&self, dims: &DimVector, rng: &mut Rng) -> Result<ComplexMatrix> {
        let us = self.rep.on_dims(dims)?;
        let d = dims.total();
        let rho = wishart_state(d, rng.random_range(1..=d), false, rng);
        Ok(twirl_with(&rho, &us))
    }

    /// Covariant channels: the twirl of a random channel, i.e. the average
    /// of V_g ∘ E ∘ U_g⁻¹. Its Choi matrix is invariant under V_g ⊗ conj(U_g),
    /// which is free in the state sense only when the representation is real.
    fn sample_channel(&self, in_dims: &DimVector, out_dims: &DimVector, rng: &mut Rng) -> Result<ChoiMatrix> {
        let ui = self.rep.on_dims(in_dims)?;
        let uo = self.rep.on_dims(out_dims)?;
        let c = random_channel(in_dims, out_dims, false, rng);
        let us: Vec<ComplexMatrix> = uo.iter().zip(&ui).map(|(v, u)| v.kron(&u.conj())).collect();
        let m = twirl_with(c.matrix(), &us);
        ChoiMatrix::new(m, out_dims.clone(), in_dims.clone(), true)
    }

    fn expected_cdrt(&self) -> bool {
        representation_is_real_in_choi_basis(&self.rep, 1e-9)
    }

    fn default_dims(&self) -> Vec<DimVector> {
        vec![DimVector::single(self.rep.dim)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_twirl_kills_coherence() {
        let plus = ComplexMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        let t = twirl(&plus, &GroupRepresentation::z2_parity()).unwrap();
        assert!(t.dist_max(&ComplexMatrix::identity(2).scale(0.5)) < 1e-15);
    }

    #[test]
    fn json_formats() {
        let a = GroupRepresentation::from_json("[[[1,0],[0,1]], [[1,0],[0,-1]]]").unwrap();
        assert_eq!(a, GroupRepresentation::z2_parity());
        let b = GroupRepresentation::from_json("[[[1,0],[0,1]], [[1,0],[0,[0,1]]], [[1,0],[0,-1]], [[1,0],[0,[0,-1]]]]").unwrap();
        assert_eq!(b.order(), 4);
        assert!(GroupRepresentation::from_json("[[[1,0],[0,[0,1]]]]").is_err(), "not closed");
        assert!(GroupRepresentation::from_json("[[[2,0],[0,1]]]").is_err(), "not unitary");
    }

    #[test]
    fn real_criterion() {
        assert!(representation_is_real_in_choi_basis(&GroupRepresentation::z2_parity(), 1e-12));
        assert!(!representation_is_real_in_choi_basis(&GroupRepresentation::z4_phase(), 1e-12));
        assert!(representation_is_real_in_choi_basis(&GroupRepresentation::trivial(3), 1e-12));
    }
}
