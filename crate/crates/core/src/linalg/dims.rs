use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered list of subsystem dimensions. Factor `i` is the `i`-th
/// tensor slot, with the last factor varying fastest.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct DimVector(Vec<usize>);

impl DimVector {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument(format!("zero-sized factor in {dims:?}")));
        }
        Ok(Self(dims))
    }

    /// Trivial system (dimension 1, no factors).
    pub fn trivial() -> Self {
        Self(Vec::new())
    }

    pub fn single(d: usize) -> Self {
        assert!(d > 0);
        Self(vec![d])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn concat(&self, other: &Self) -> Self {
        Self(self.0.iter().chain(&other.0).copied().collect())
    }

    /// Same factors repeated `k` times.
    pub fn repeat(&self, k: usize) -> Self {
        Self(self.0.repeat(k))
    }

    /// Parses `"2,3,2"`.
    pub fn parse(s: &str) -> Result<Self> {
        let dims = s
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| Error::Parse(format!("bad dimension `{t}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims)
    }

    /// Row-major strides of each factor.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.0.len()];
        for i in (0..self.0.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.0[i + 1];
        }
        s
    }

    /// Multi-index digits of a linear index.
    pub fn digits(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.0.len()];
        for i in (0..self.0.len()).rev() {
            out[i] = idx % self.0[i];
            idx /= self.0[i];
        }
        out
    }
}

impl TryFrom<Vec<usize>> for DimVector {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<DimVector> for Vec<usize> {
    fn from(d: DimVector) -> Self {
        d.0
    }
}

impl std::ops::Index<usize> for DimVector {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

impl fmt::Display for DimVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strides_and_digits() {
        let d = DimVector::new(vec![2, 3, 4]).unwrap();
        assert_eq!(d.strides(), vec![12, 4, 1]);
        assert_eq!(d.digits(23), vec![1, 2, 3]);
        assert_eq!(d.total(), 24);
        assert_eq!(DimVector::trivial().total(), 1);
    }

    #[test]
    fn parse_rejects_junk() {
        assert!(DimVector::parse("2,x").is_err());
        assert!(DimVector::parse("2,0").is_err());
        assert_eq!(DimVector::parse(" 2, 3").unwrap().as_slice(), &[2, 3]);
    }
}
