use rand::Rng as _;

use super::random::{mix, random_channel, random_pure, replacement_choi, simplex, wishart_state};
use super::{check_state, ConeDescription, FreeSet, Membership, Rng};
use crate::choi::{swap_tensor_product, ChoiMatrix};
use crate::conic::BlockCone;
use crate::error::{Error, Result};
use crate::linalg::space::{Block, BlockValue};
use crate::linalg::{partial_transpose, permute_systems, psd_margin, ComplexMatrix, DimVector};

const REJECTION_CAP: usize = 10_000;

/// Split of the tensor factors into two spatially separated groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartition {
    dims: DimVector,
    bob: Vec<usize>,
}

impl Bipartition {
    /// `bob` lists the factors on the second side.
    pub fn new(dims: DimVector, bob: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; dims.len()];
        for &b in &bob {
            if b >= dims.len() || seen[b] {
                return Err(Error::InvalidArgument(format!("bad bipartition {bob:?} for dims {dims}")));
            }
            seen[b] = true;
        }
        Ok(Self { dims, bob })
    }

    /// Pairs (A_i, B_i) laid out as [A_0, B_0, A_1, B_1, ...].
    pub fn alternating(dims: &DimVector) -> Result<Self> {
        if dims.is_empty() || dims.len() % 2 != 0 {
            return Err(Error::UnsupportedDimension(format!(
                "bipartite systems are (A,B) pairs; got dims {dims}"
            )));
        }
        Self::new(dims.clone(), (1..dims.len()).step_by(2).collect())
    }

    pub fn dims(&self) -> &DimVector {
        &self.dims
    }

    pub fn bob(&self) -> &[usize] {
        &self.bob
    }
}

pub fn ppt_membership(rho: &ComplexMatrix, bip: &Bipartition, tol: f64) -> Result<Membership> {
    check_state(rho, bip.dims())?;
    let m1 = psd_margin(rho)?;
    let pt = partial_transpose(rho, bip.dims(), bip.bob())?;
    let m2 = psd_margin(&pt.hermitize())?;
    Ok(Membership::from_margin(m1.min(m2), tol))
}

/// Positive-partial-transpose states; `sep` restricts to the dimensions where
/// PPT coincides with separability.
#[derive(Clone, Copy, Debug)]
pub struct Ppt {
    sep_only: bool,
}

impl Ppt {
    pub fn npt() -> Self {
        Self { sep_only: false }
    }

    pub fn sep() -> Self {
        Self { sep_only: true }
    }
}

/// Factor order [A..., B...] → alternating [A0, B0, A1, B1, ...].
fn to_alternating(k: usize) -> Vec<usize> {
    (0..k).flat_map(|i| [i, k + i]).collect()
}

fn split(dims: &DimVector) -> (DimVector, DimVector) {
    let a = dims.as_slice().iter().step_by(2).copied().collect();
    let b = dims.as_slice().iter().skip(1).step_by(2).copied().collect();
    (DimVector::new(a).unwrap(), DimVector::new(b).unwrap())
}

/// Product of an Alice-side and a Bob-side operator, laid out alternately.
fn interleave(a: &ComplexMatrix, b: &ComplexMatrix, dims: &DimVector) -> ComplexMatrix {
    let (da, db) = split(dims);
    let k = dims.len() / 2;
    let block = da.concat(&db);
    permute_systems(&a.kron(b), &block, &to_alternating(k)).expect("consistent dims")
}

/// Smallest t with (1−t)ρ + t·id/D PPT, given λ0 = min eig(ρ^Γ) < 0.
fn depolarize_to_ppt(rho: &ComplexMatrix, bip: &Bipartition) -> Result<ComplexMatrix> {
    let d = rho.rows();
    let pt = partial_transpose(rho, bip.dims(), bip.bob())?.hermitize();
    let l0 = psd_margin(&pt)?.min(psd_margin(rho)?);
    if l0 >= 0.0 {
        return Ok(rho.clone());
    }
    let inv = 1.0 / d as f64;
    let t = (-l0 / (inv - l0)) * (1.0 + 1e-12);
    Ok(rho.scale(1.0 - t) + ComplexMatrix::identity(d).scale(t * inv))
}

impl FreeSet for Ppt {
    fn name(&self) -> String {
        if self.sep_only { "sep" } else { "ppt" }.into()
    }

    fn check_dims(&self, dims: &DimVector) -> Result<()> {
        Bipartition::alternating(dims)?;
        if self.sep_only {
            let (a, b) = split(dims);
            let (a, b) = (a.total().min(b.total()), a.total().max(b.total()));
            if !(a == 2 && (b == 2 || b == 3)) {
                return Err(Error::UnsupportedDimension(format!(
                    "separability is exact via PPT only for 2x2 and 2x3 cuts; got {dims}"
                )));
            }
        }
        Ok(())
    }

    fn membership(&self, rho: &ComplexMatrix, dims: &DimVector, tol: f64) -> Result<Membership> {
        self.check_dims(dims)?;
        ppt_membership(rho, &Bipartition::alternating(dims)?, tol)
    }

    fn cone(&self, dims: &DimVector) -> Result<ConeDescription> {
        self.check_dims(dims)?;
        let bip = Bipartition::alternating(dims)?;
        let d = dims.total();
        let pt = ConeDescription::constraint(d, vec![Block::Hermitian(d)], BlockCone::Psd, move |x| {
            let y = partial_transpose(x, bip.dims(), bip.bob()).expect("dims checked");
            vec![BlockValue::Hermitian(y.hermitize())]
        });
        Ok(ConeDescription::HRep(vec![ConeDescription::psd(d), pt]))
    }

    fn sample_state(&self, dims: &DimVector, rng: &mut Rng) -> Result<ComplexMatrix> {
        self.check_dims(dims)?;
        let bip = Bipartition::alternating(dims)?;
        let (da, db) = split(dims);
        let (na, nb) = (da.total(), db.total());
        Ok(match rng.random_range(0..3) {
            // separable mixture
            0 => {
                let r = rng.random_range(1..=4);
                let p = simplex(r, rng);
                let terms: Vec<ComplexMatrix> = (0..r)
                    .map(|_| {
                        let a = wishart_state(na, rng.random_range(1..=na), false, rng);
                        let b = wishart_state(nb, rng.random_range(1..=nb), false, rng);
                        interleave(&a, &b, dims)
                    })
                    .collect();
                mix(&terms, &p)
            }
            // generic state pushed to the PPT boundary
            1 => {
                let d = dims.total();
                let rho = wishart_state(d, rng.random_range(1..=d), false, rng);
                depolarize_to_ppt(&rho, &bip)?
            }
            // entangled within each side, product across the cut
            _ => {
                let a = ComplexMatrix::projector(&random_pure(na, false, rng));
                let b = wishart_state(nb, rng.random_range(1..=nb), false, rng);
                interleave(&a, &b, dims)
            }
        })
    }

    fn sample_channel(&self, in_dims: &DimVector, out_dims: &DimVector, rng: &mut Rng) -> Result<ChoiMatrix> {
        self.check_dims(in_dims)?;
        self.check_dims(out_dims)?;
        // Choi on out ⊗ in = [A'0,B'0,...,A0,B0,...]: still alternating.
        let cdims = out_dims.concat(in_dims);
        let bip = Bipartition::alternating(&cdims)?;
        let d = cdims.total();
        let dep = ComplexMatrix::identity(d).scale(1.0 / d as f64);
        match rng.random_range(0..3) {
            0 => {
                // local channels E_A ⊗ F_B
                let (ia, ib) = split(in_dims);
                let (oa, ob) = split(out_dims);
                let ea = random_channel(&ia, &oa, false, rng);
                let fb = random_channel(&ib, &ob, false, rng);
                let t = swap_tensor_product(&ea, &fb)?;
                // out: [A'..., B'...] → alternating; same for in
                let (ko, ki) = (out_dims.len() / 2, in_dims.len() / 2);
                let mut perm = to_alternating(ko);
                perm.extend(to_alternating(ki).into_iter().map(|x| x + 2 * ko));
                let block_dims = t.dims();
                let m = permute_systems(t.matrix(), &block_dims, &perm)?;
                ChoiMatrix::new(m, out_dims.clone(), in_dims.clone(), true)
            }
            1 => {
                // replacement by a free state
                let sigma = self.sample_state(out_dims, rng)?;
                Ok(replacement_choi(&sigma, out_dims, in_dims))
            }
            _ => {
                // random channel mixed with the completely depolarizing one
                for _ in 0..REJECTION_CAP {
                    let c = random_channel(in_dims, out_dims, false, rng);
                    let p: f64 = rng.random();
                    let m = c.matrix().scale(1.0 - p) + dep.scale(p);
                    if ppt_membership(&m, &bip, 0.0)?.member {
                        return ChoiMatrix::new(m, out_dims.clone(), in_dims.clone(), true);
                    }
                }
                let c = random_channel(in_dims, out_dims, false, rng);
                let m = depolarize_to_ppt(c.matrix(), &bip)?;
                ChoiMatrix::new(m, out_dims.clone(), in_dims.clone(), true)
            }
        }
    }

    fn default_dims(&self) -> Vec<DimVector> {
        vec![DimVector::new(vec![2, 2]).unwrap(), DimVector::new(vec![2, 3]).unwrap()]
    }

    /// Each (A_i, B_i) pair is one local system.
    fn units(&self, dims: &DimVector) -> Result<Vec<Vec<usize>>> {
        Bipartition::alternating(dims)?;
        Ok((0..dims.len() / 2).map(|i| vec![2 * i, 2 * i + 1]).collect())
    }
}
