use serde::{Deserialize, Serialize};

use super::cone::Cone;
use crate::error::{Error, Result};
use crate::linalg::space::{Element, LinearMap, Space};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

/// `opt ⟨cost, X⟩  s.t.  map(X) − offset ∈ con_cone,  X ∈ var_cone`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConicProgram {
    pub sense: Sense,
    pub var_cone: Cone,
    pub con_cone: Cone,
    pub map: LinearMap,
    pub cost: Element,
    pub offset: Element,
    pub label: String,
}

impl ConicProgram {
    pub fn new(
        sense: Sense,
        var_cone: Cone,
        con_cone: Cone,
        map: LinearMap,
        cost: Element,
        offset: Element,
        label: impl Into<String>,
    ) -> Result<Self> {
        let p = Self { sense, var_cone, con_cone, map, cost, offset, label: label.into() };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let vs = self.var_cone.space();
        let cs = self.con_cone.space();
        if self.map.domain() != vs || self.map.codomain() != cs {
            return Err(Error::InvalidProgram(format!(
                "map {} -> {} does not match variable space {} / constraint space {}",
                self.map.domain(),
                self.map.codomain(),
                vs,
                cs
            )));
        }
        if self.cost.space() != vs {
            return Err(Error::InvalidProgram("cost lies outside the variable space".into()));
        }
        if self.offset.space() != cs {
            return Err(Error::InvalidProgram("offset lies outside the constraint space".into()));
        }
        Ok(())
    }

    pub fn var_space(&self) -> &Space {
        self.var_cone.space()
    }

    pub fn con_space(&self) -> &Space {
        self.con_cone.space()
    }

    /// Objective at `x`.
    pub fn objective(&self, x: &Element) -> f64 {
        self.cost.inner(x)
    }
}

/// Lagrange dual in the same shape.
///
/// `min ⟨H1,X⟩ s.t. N X − H2 ∈ K2, X ∈ K1` becomes
/// `max ⟨H2,Y⟩ s.t. H1 − N†Y ∈ K1*, Y ∈ K2*`, written as
/// `map = −N†, offset = −H1`. A max program maps back the other way,
/// so dualizing twice returns the original program.
pub fn dualize(p: &ConicProgram) -> ConicProgram {
    let adj = p.map.adjoint().scaled(-1.0);
    match p.sense {
        Sense::Min => ConicProgram {
            sense: Sense::Max,
            var_cone: p.con_cone.dual(),
            con_cone: p.var_cone.dual(),
            map: adj,
            cost: p.offset.clone(),
            offset: p.cost.scaled(-1.0),
            label: format!("dual of {}", p.label),
        },
        Sense::Max => ConicProgram {
            sense: Sense::Min,
            var_cone: p.con_cone.dual(),
            con_cone: p.var_cone.dual(),
            map: adj,
            cost: p.offset.scaled(-1.0),
            offset: p.cost.clone(),
            label: p.label.strip_prefix("dual of ").map(str::to_string).unwrap_or_else(|| format!("dual of {}", p.label)),
        },
    }
}
