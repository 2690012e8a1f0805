//! Tensor products and subsystem operations on composite matrices.

use super::{ComplexMatrix, DimVector, C64};
use crate::error::{Error, Result};

pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

pub fn tensor_all(ms: &[ComplexMatrix]) -> ComplexMatrix {
    ms.iter().fold(ComplexMatrix::identity(1), |acc, m| acc.kron(m))
}

fn check_square_dims(m: &ComplexMatrix, dims: &DimVector) -> Result<usize> {
    let d = m.require_square()?;
    if d != dims.total() {
        return Err(Error::DimensionMismatch(format!(
            "matrix side {d} does not equal product of dims {dims}"
        )));
    }
    Ok(d)
}

fn check_subsystems(sub: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &s in sub {
        if s >= n {
            return Err(Error::InvalidArgument(format!("subsystem index {s} out of range (n = {n})")));
        }
        if seen[s] {
            return Err(Error::InvalidArgument(format!("subsystem index {s} repeated")));
        }
        seen[s] = true;
    }
    Ok(())
}

/// For each linear index of the sub-register `which`, the offset it
/// contributes to the full linear index.
fn offsets(dims: &DimVector, which: &[usize]) -> Vec<usize> {
    let strides = dims.strides();
    let sub: Vec<usize> = which.iter().map(|&i| dims[i]).collect();
    let n: usize = sub.iter().product();
    let mut out = Vec::with_capacity(n);
    let mut digits = vec![0usize; which.len()];
    for _ in 0..n {
        out.push(which.iter().zip(&digits).map(|(&s, &x)| strides[s] * x).sum());
        // odometer increment, last slot fastest
        for k in (0..which.len()).rev() {
            digits[k] += 1;
            if digits[k] < sub[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    out
}

/// Traces out the listed subsystems; the remaining factors keep their order.
pub fn partial_trace(m: &ComplexMatrix, dims: &DimVector, traced: &[usize]) -> Result<ComplexMatrix> {
    check_square_dims(m, dims)?;
    check_subsystems(traced, dims.len())?;
    let kept: Vec<usize> = (0..dims.len()).filter(|i| !traced.contains(i)).collect();
    let ko = offsets(dims, &kept);
    let to = offsets(dims, traced);
    let mut out = ComplexMatrix::zeros(ko.len(), ko.len());
    for (a, &ra) in ko.iter().enumerate() {
        for (b, &cb) in ko.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &t in &to {
                acc += m[(ra + t, cb + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Transposes the listed subsystems in the product basis.
pub fn partial_transpose(m: &ComplexMatrix, dims: &DimVector, which: &[usize]) -> Result<ComplexMatrix> {
    let d = check_square_dims(m, dims)?;
    check_subsystems(which, dims.len())?;
    let strides = dims.strides();
    // part_t[i] = contribution of the transposed factors to index i
    let part_t: Vec<usize> = (0..d)
        .map(|i| which.iter().map(|&s| (i / strides[s]) % dims[s] * strides[s]).sum())
        .collect();
    Ok(ComplexMatrix::from_fn(d, d, |r, c| {
        let r2 = r - part_t[r] + part_t[c];
        let c2 = c - part_t[c] + part_t[r];
        m[(r2, c2)]
    }))
}

/// Map from new linear index to old linear index when the factors are
/// reordered so that new slot `j` holds old factor `perm[j]`.
pub fn permutation_index_map(dims: &DimVector, perm: &[usize]) -> Result<Vec<usize>> {
    if perm.len() != dims.len() {
        return Err(Error::InvalidArgument(format!(
            "permutation of length {} for {} subsystems",
            perm.len(),
            dims.len()
        )));
    }
    check_subsystems(perm, dims.len())?;
    let old_strides = dims.strides();
    let new_dims = DimVector::new(perm.iter().map(|&p| dims[p]).collect())?;
    let new_strides = new_dims.strides();
    let d = dims.total();
    Ok((0..d)
        .map(|i| {
            perm.iter()
                .enumerate()
                .map(|(j, &p)| (i / new_strides[j]) % new_dims[j] * old_strides[p])
                .sum()
        })
        .collect())
}

/// Conjugates by the subsystem permutation: new slot `j` is old factor `perm[j]`.
pub fn permute_systems(m: &ComplexMatrix, dims: &DimVector, perm: &[usize]) -> Result<ComplexMatrix> {
    let d = check_square_dims(m, dims)?;
    let map = permutation_index_map(dims, perm)?;
    Ok(ComplexMatrix::from_fn(d, d, |r, c| m[(map[r], map[c])]))
}

pub fn permute_dims(dims: &DimVector, perm: &[usize]) -> DimVector {
    DimVector::new(perm.iter().map(|&p| dims[p]).collect()).expect("permutation of valid dims")
}

/// Permutation operator P with P|x_0..x_{n-1}> = |x_{perm[0]}..>.
pub fn permutation_operator(dims: &DimVector, perm: &[usize]) -> Result<ComplexMatrix> {
    let map = permutation_index_map(dims, perm)?;
    let d = dims.total();
    let mut p = ComplexMatrix::zeros(d, d);
    for (new, &old) in map.iter().enumerate() {
        p[(new, old)] = C64::new(1.0, 0.0);
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rand_matrix(d: usize, seed: u64) -> ComplexMatrix {
        // cheap deterministic filler; no statistical quality needed
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ComplexMatrix::from_fn(d, d, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = ((s >> 33) as f64) / (1u64 << 31) as f64 - 0.5;
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = ((s >> 33) as f64) / (1u64 << 31) as f64 - 0.5;
            C64::new(a, b)
        })
    }

    #[test]
    fn trace_of_product_operator() {
        let a = rand_matrix(2, 1);
        let b = rand_matrix(3, 2);
        let dims = DimVector::new(vec![2, 3]).unwrap();
        let ab = a.kron(&b);
        let ta = partial_trace(&ab, &dims, &[1]).unwrap();
        let tb = partial_trace(&ab, &dims, &[0]).unwrap();
        assert!(ta.dist_max(&a.scale_c(b.trace())) < 1e-12);
        assert!(tb.dist_max(&b.scale_c(a.trace())) < 1e-12);
    }

    #[test]
    fn transpose_of_product_operator() {
        let a = rand_matrix(2, 3);
        let b = rand_matrix(3, 4);
        let dims = DimVector::new(vec![2, 3]).unwrap();
        let pt = partial_transpose(&a.kron(&b), &dims, &[1]).unwrap();
        assert!(pt.dist_max(&a.kron(&b.transpose())) < 1e-12);
        let full = partial_transpose(&a.kron(&b), &dims, &[0, 1]).unwrap();
        assert!(full.dist_max(&a.kron(&b).transpose()) < 1e-12);
    }

    #[test]
    fn permute_swaps_factors() {
        let a = rand_matrix(2, 5);
        let b = rand_matrix(3, 6);
        let dims = DimVector::new(vec![2, 3]).unwrap();
        let sw = permute_systems(&a.kron(&b), &dims, &[1, 0]).unwrap();
        assert!(sw.dist_max(&b.kron(&a)) < 1e-12);
        let p = permutation_operator(&dims, &[1, 0]).unwrap();
        let conj = &(&p * &a.kron(&b)) * &p.adjoint();
        assert!(conj.dist_max(&sw) < 1e-12);
    }

    #[test]
    fn bad_indices_rejected() {
        let m = ComplexMatrix::identity(6);
        let dims = DimVector::new(vec![2, 3]).unwrap();
        assert!(partial_trace(&m, &dims, &[2]).is_err());
        assert!(partial_trace(&m, &dims, &[0, 0]).is_err());
        assert!(partial_trace(&ComplexMatrix::identity(5), &dims, &[0]).is_err());
        assert!(permute_systems(&m, &dims, &[0]).is_err());
    }
}
