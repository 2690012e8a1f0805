//! Programs for the resource quantifiers, built on the lifted cone
//! K = {(λ, λω) : λ ≥ 0, ω free}.

use nalgebra::DMatrix;

use super::cone::{BlockCone, Cone, ProductCone};
use super::program::{ConicProgram, Sense};
use super::solve::{solve, Solution, SolveStatus, SolverOptions};
use crate::choi::{link_raw, ChoiMatrix, DEFAULT_CHANNEL_TOL};
use crate::error::{Error, Result};
use crate::linalg::space::{Block, BlockValue, Element, LinearMap, Space};
use crate::linalg::{partial_trace, psd_margin, ComplexMatrix, DimVector};
use crate::theories::{ConeDescription, FreeSet};

/// Projection of `full` onto the consecutive blocks `at..at + sub.n_blocks()`.
fn projection(full: &Space, at: usize, sub: &Space) -> LinearMap {
    let mut m = DMatrix::zeros(sub.dim(), full.dim());
    for k in 0..sub.n_blocks() {
        let (r, s) = (full.range(at + k), sub.range(k));
        debug_assert_eq!(full.block(at + k), sub.block(k));
        for (i, j) in s.zip(r) {
            m[(i, j)] = 1.0;
        }
    }
    LinearMap::from_matrix(full, sub, m).expect("shapes agree")
}

fn is_plain_product(c: &Cone) -> Option<&ProductCone> {
    match c {
        Cone::Preimage { space, terms } if terms.len() == 1 => {
            let (l, pc) = &terms[0];
            let id = DMatrix::<f64>::identity(space.dim(), space.dim());
            (l.codomain() == space && *l.matrix() == id).then_some(pc)
        }
        _ => None,
    }
}

/// Assembles a cone on `full` from cones on consecutive block ranges
/// `(start, cone)`; the parts must cover every block. At most one part may
/// be non-product when any part is image-shaped.
fn place_cones(full: &Space, parts: Vec<(usize, Cone)>) -> Result<Cone> {
    let covered: usize = parts.iter().map(|(_, c)| c.space().n_blocks()).sum();
    if covered != full.n_blocks() {
        return Err(Error::InvalidProgram("cone parts do not cover the variable space".into()));
    }
    let any_image = parts.iter().any(|(_, c)| matches!(c, Cone::Image { .. }));
    let mut terms = Vec::new();
    for (at, cone) in parts {
        let p = projection(full, at, cone.space());
        if any_image {
            let inj = p.adjoint();
            match &cone {
                Cone::Image { terms: ts, .. } => {
                    for (l, pc) in ts {
                        terms.push((inj.compose(l)?, pc.clone()));
                    }
                }
                Cone::Preimage { .. } => {
                    let pc = is_plain_product(&cone).ok_or_else(|| {
                        Error::InvalidProgram("cannot mix a constrained cone with an image-shaped one".into())
                    })?;
                    terms.push((inj.compose(&LinearMap::identity(cone.space()))?, pc.clone()));
                }
            }
        } else {
            for (l, pc) in cone.terms() {
                terms.push((l.compose(&p)?, pc.clone()));
            }
        }
    }
    if any_image {
        Cone::image(full, terms)
    } else {
        Cone::preimage(full, terms)
    }
}

fn trace_functional(space: &Space, k: usize) -> Vec<f64> {
    // diagonal coordinates of a Hermitian block are its diagonal entries
    let mut v = vec![0.0; space.dim()];
    if let Block::Hermitian(d) = space.block(k) {
        let o = space.offset(k);
        for i in 0..*d {
            v[o + i * d + i] = 1.0;
        }
    }
    v
}

/// The cone {(λ, λω) : λ ≥ 0, ω free} on `R ⊕ Herm(D)`.
pub fn lift_cone(theory: &dyn FreeSet, dims: &DimVector) -> Result<Cone> {
    theory.check_dims(dims)?;
    let d = dims.total();
    let space = Space::new(vec![Block::Scalar, Block::Hermitian(d)]);
    let herm = Space::new(vec![Block::Hermitian(d)]);
    match theory.cone(dims)? {
        ConeDescription::HRep(cons) => {
            let proj = projection(&space, 1, &herm);
            let mut terms = Vec::with_capacity(cons.len() + 1);
            for (l, pc) in cons {
                terms.push((l.compose(&proj)?, pc));
            }
            // x − tr X = 0
            let scal = Space::new(vec![Block::Scalar]);
            let mut m = DMatrix::zeros(1, space.dim());
            let tr = trace_functional(&space, 1);
            for (j, t) in tr.iter().enumerate() {
                m[(0, j)] = -t;
            }
            m[(0, 0)] = 1.0;
            terms.push((LinearMap::from_matrix(&space, &scal, m)?, ProductCone::uniform(&scal, BlockCone::Zero)?));
            Cone::preimage(&space, terms)
        }
        ConeDescription::VRep(points) => {
            let k = points.len();
            let wsp = Space::new(vec![Block::Weights(k)]);
            for p in &points {
                if p.rows() != d {
                    return Err(Error::DimensionMismatch(format!("extreme point of side {} for dimension {d}", p.rows())));
                }
            }
            let map = LinearMap::from_fn(&wsp, &space, |e| {
                let w = e.weights(0);
                let mut x = ComplexMatrix::zeros(d, d);
                for (wi, p) in w.iter().zip(&points) {
                    if *wi != 0.0 {
                        x += &p.scale(*wi);
                    }
                }
                let tr = w.iter().zip(&points).map(|(wi, p)| wi * p.trace().re).sum();
                Element::new(&space, vec![BlockValue::Scalar(tr), BlockValue::Hermitian(x)]).expect("fits")
            });
            Cone::image(&space, vec![(map, ProductCone::uniform(&wsp, BlockCone::Nonneg)?)])
        }
    }
}

fn herm_elem(space: &Space, values: Vec<BlockValue>) -> Element {
    Element::new(space, values).expect("values fit the space")
}

/// Validates a density matrix on `dims`.
fn require_density(rho: &ComplexMatrix, dims: &DimVector) -> Result<()> {
    let d = rho.require_hermitian(crate::linalg::HERMITIAN_TOL.max(1e-9 * rho.max_abs()))?;
    if d != dims.total() {
        return Err(Error::DimensionMismatch(format!("state of side {d} for dims {dims}")));
    }
    let tr = rho.trace().re;
    if (tr - 1.0).abs() > 1e-8 || psd_margin(rho)? < -1e-8 {
        return Err(Error::InvalidArgument(format!("not a density matrix (trace {tr:.12}, or not PSD)")));
    }
    Ok(())
}

fn channel_renormalized(mu: &ChoiMatrix) -> Result<ChoiMatrix> {
    mu.require_channel(DEFAULT_CHANNEL_TOL.max(1e-7))?;
    Ok(mu.renormalized())
}

/// `(x, X) ↦ d_A tr_B X − x·id_A` on `R ⊕ Herm(d_B d_A)` (slots 0 and 1 of `from`).
fn marginal_map(from: &Space, out_d: usize, in_d: usize, to: &Space, slot: usize) -> LinearMap {
    let cdims = DimVector::new(vec![out_d, in_d]).expect("positive dims");
    LinearMap::from_fn(from, to, |e| {
        let x = e.scalar(0);
        let big = e.hermitian(1);
        let m = partial_trace(&big, &cdims, &[0]).expect("dims fit").scale(in_d as f64)
            - ComplexMatrix::identity(in_d).scale(x);
        let mut out = Element::zeros(to);
        out.set_block(slot, BlockValue::Hermitian(m.hermitize())).expect("fits");
        out
    })
}

/// `inf λ s.t. λω ⪰ ρ, ω free` as `min x s.t. X − ρ ⪰ 0, (x, X) ∈ K`.
pub fn build_dmax_state(theory: &dyn FreeSet, rho: &ComplexMatrix, dims: &DimVector) -> Result<ConicProgram> {
    require_density(rho, dims)?;
    let d = dims.total();
    let var_cone = lift_cone(theory, dims)?;
    let vs = var_cone.space().clone();
    let cs = Space::new(vec![Block::Hermitian(d)]);
    let map = LinearMap::from_fn(&vs, &cs, |e| herm_elem(&cs, vec![BlockValue::Hermitian(e.hermitian(1))]));
    let cost = herm_elem(&vs, vec![BlockValue::Scalar(1.0), BlockValue::Hermitian(ComplexMatrix::zeros(d, d))]);
    let offset = herm_elem(&cs, vec![BlockValue::Hermitian(rho.clone())]);
    ConicProgram::new(Sense::Min, var_cone, Cone::uniform(&cs, BlockCone::Psd)?, map, cost, offset, "max-relative entropy of a state")
}

/// `inf λ s.t. λω ⪰ μ, ω free, d_A tr_B ω = id` for a channel Choi μ on B:A.
pub fn build_dmax_channel(theory: &dyn FreeSet, mu: &ChoiMatrix) -> Result<ConicProgram> {
    let mu = channel_renormalized(mu)?;
    let (db, da) = (mu.d_out(), mu.d_in());
    let var_cone = lift_cone(theory, &mu.dims())?;
    let vs = var_cone.space().clone();
    let cs = Space::new(vec![Block::Hermitian(db * da), Block::Hermitian(da)]);
    let marg = marginal_map(&vs, db, da, &cs, 1);
    let map = LinearMap::from_fn(&vs, &cs, |e| {
        let mut out = marg.apply(e);
        out.set_block(0, BlockValue::Hermitian(e.hermitian(1))).expect("fits");
        out
    });
    let con = Cone::product(ProductCone::new(&cs, vec![BlockCone::Psd, BlockCone::Zero])?);
    let cost = herm_elem(&vs, vec![BlockValue::Scalar(1.0), BlockValue::Hermitian(ComplexMatrix::zeros(db * da, db * da))]);
    let offset = herm_elem(&cs, vec![
        BlockValue::Hermitian(mu.matrix().clone()),
        BlockValue::Hermitian(ComplexMatrix::zeros(da, da)),
    ]);
    ConicProgram::new(Sense::Min, var_cone, con, map, cost, offset, "max-relative entropy of a channel")
}

fn monotone_cost(vs: &Space, tau: &ComplexMatrix, rho: &ComplexMatrix, sign: f64) -> Element {
    let w = tau.kron(&rho.transpose()).scale(sign);
    herm_elem(vs, vec![BlockValue::Scalar(0.0), BlockValue::Hermitian(w.hermitize())])
}

/// `f_τ(ρ) = max tr[ω (τ_B ⊗ ρ_Aᵀ)]` over free ω on B ⊗ A with
/// `d_A tr_B ω = id_A`, normalized by the extra constraint `x = 1`.
pub fn build_monotone(
    theory: &dyn FreeSet,
    tau: &ComplexMatrix,
    rho: &ComplexMatrix,
    in_dims: &DimVector,
    out_dims: &DimVector,
) -> Result<ConicProgram> {
    require_density(tau, out_dims)?;
    require_density(rho, in_dims)?;
    let (db, da) = (out_dims.total(), in_dims.total());
    let var_cone = lift_cone(theory, &out_dims.concat(in_dims))?;
    let vs = var_cone.space().clone();
    let cs = Space::new(vec![Block::Hermitian(da), Block::Scalar]);
    let marg = marginal_map(&vs, db, da, &cs, 0);
    let map = LinearMap::from_fn(&vs, &cs, |e| {
        let mut out = marg.apply(e);
        out.set_block(1, BlockValue::Scalar(e.scalar(0))).expect("fits");
        out
    });
    let offset = herm_elem(&cs, vec![BlockValue::Hermitian(ComplexMatrix::zeros(da, da)), BlockValue::Scalar(1.0)]);
    ConicProgram::new(
        Sense::Max,
        var_cone,
        Cone::uniform(&cs, BlockCone::Zero)?,
        map,
        monotone_cost(&vs, tau, rho, 1.0),
        offset,
        "overlap monotone",
    )
}

/// The same quantity written without the normalization `x = 1`:
/// `min −tr[X(τ⊗ρᵀ)] s.t. d_A tr_B X − x·id = 0, (x, X) ∈ K`.
///
/// The feasible set is a cone, so whenever the optimum is nonzero the
/// program is unbounded and its dual is infeasible; this is the shape whose
/// dual is discussed for these theories. Use [`build_monotone`] for values.
pub fn build_monotone_homogeneous(
    theory: &dyn FreeSet,
    tau: &ComplexMatrix,
    rho: &ComplexMatrix,
    in_dims: &DimVector,
    out_dims: &DimVector,
) -> Result<ConicProgram> {
    require_density(tau, out_dims)?;
    require_density(rho, in_dims)?;
    let (db, da) = (out_dims.total(), in_dims.total());
    let var_cone = lift_cone(theory, &out_dims.concat(in_dims))?;
    let vs = var_cone.space().clone();
    let cs = Space::new(vec![Block::Hermitian(da)]);
    let map = marginal_map(&vs, db, da, &cs, 0);
    ConicProgram::new(
        Sense::Min,
        var_cone,
        Cone::uniform(&cs, BlockCone::Zero)?,
        map,
        monotone_cost(&vs, tau, rho, -1.0),
        Element::zeros(&cs),
        "overlap monotone (homogeneous)",
    )
}

/// A solved quantity.
#[derive(Clone, Debug)]
pub struct Quantity {
    /// Reported value (log₂ scale for max-relative entropies).
    pub value: f64,
    /// Raw primal optimum.
    pub optimum: f64,
    pub solution: Solution,
}

fn require_optimal(sol: Solution, what: &str) -> Result<Solution> {
    if sol.status != SolveStatus::Optimal {
        return Err(Error::Solver(format!("{what}: solver ended with status {}", sol.status)));
    }
    Ok(sol)
}

/// Max-relative entropy (bits) of ρ with respect to the free states.
pub fn dmax_state(theory: &dyn FreeSet, rho: &ComplexMatrix, dims: &DimVector, opts: &SolverOptions) -> Result<Quantity> {
    let p = build_dmax_state(theory, rho, dims)?;
    let sol = require_optimal(solve(&p, opts)?, &p.label)?;
    let lambda = sol.primal_value;
    Ok(Quantity { value: lambda.max(f64::MIN_POSITIVE).log2(), optimum: lambda, solution: sol })
}

/// Max-relative entropy (bits) of a channel with respect to the free channels.
pub fn dmax_channel(theory: &dyn FreeSet, mu: &ChoiMatrix, opts: &SolverOptions) -> Result<Quantity> {
    let p = build_dmax_channel(theory, mu)?;
    let sol = require_optimal(solve(&p, opts)?, &p.label)?;
    let lambda = sol.primal_value;
    Ok(Quantity { value: lambda.max(f64::MIN_POSITIVE).log2(), optimum: lambda, solution: sol })
}

/// `f_τ(ρ)`; τ lives on the output system, ρ on the input system.
pub fn monotone(
    theory: &dyn FreeSet,
    tau: &ComplexMatrix,
    rho: &ComplexMatrix,
    in_dims: &DimVector,
    out_dims: &DimVector,
    opts: &SolverOptions,
) -> Result<Quantity> {
    let p = build_monotone(theory, tau, rho, in_dims, out_dims)?;
    let sol = require_optimal(solve(&p, opts)?, &p.label)?;
    Ok(Quantity { value: sol.primal_value, optimum: sol.primal_value, solution: sol })
}

/// `X ↦ d_A · (X * ρ)`, the channel with renormalized Choi X applied to ρ.
fn apply_map(from: &Space, slot: usize, db: usize, da: usize, rho: &ComplexMatrix, to: &Space, to_slot: usize) -> LinearMap {
    let rho = rho.clone();
    LinearMap::from_fn(from, to, move |e| {
        let x = e.hermitian(slot);
        let y = link_raw(&x, db, da, &rho, 1).scale(da as f64);
        let mut out = Element::zeros(to);
        out.set_block(to_slot, BlockValue::Hermitian(y.hermitize())).expect("fits");
        out
    })
}

fn witness(x: &Element, slot: usize, in_dims: &DimVector, out_dims: &DimVector) -> Result<ChoiMatrix> {
    ChoiMatrix::new(x.hermitian(slot), out_dims.clone(), in_dims.clone(), true)
}

/// Result of a conversion problem.
#[derive(Clone, Debug)]
pub struct Conversion {
    /// Trace distance for [`conversion_distance`]; the entrywise residual for
    /// [`convertible`].
    pub value: f64,
    /// Whether ρ reaches σ (only meaningful for [`convertible`]).
    pub convertible: bool,
    /// Renormalized Choi matrix of the optimal free channel.
    pub witness: ChoiMatrix,
    pub solution: Solution,
}

/// Common part: variables `(x, X, extra...)`, constraints
/// `[Herm(d_B) target, Herm(d_A) marginal, R normalization]`.
struct ConversionFrame {
    vs: Space,
    var_cone: Cone,
    db: usize,
    da: usize,
}

fn conversion_frame(
    theory: &dyn FreeSet,
    rho: &ComplexMatrix,
    sigma: &ComplexMatrix,
    in_dims: &DimVector,
    out_dims: &DimVector,
    extra: Vec<(Block, BlockCone)>,
) -> Result<ConversionFrame> {
    require_density(rho, in_dims)?;
    require_density(sigma, out_dims)?;
    let (db, da) = (out_dims.total(), in_dims.total());
    let lift = lift_cone(theory, &out_dims.concat(in_dims))?;
    let mut blocks = lift.space().blocks().to_vec();
    let mut parts = vec![(0, lift)];
    for (b, c) in extra {
        let sp = Space::new(vec![b.clone()]);
        parts.push((blocks.len(), Cone::uniform(&sp, c)?));
        blocks.push(b);
    }
    let vs = Space::new(blocks);
    let var_cone = place_cones(&vs, parts)?;
    Ok(ConversionFrame { vs, var_cone, db, da })
}

/// `min ½‖σ − ℳ(ρ)‖₁` over free channels ℳ, via `σ − ℳ(ρ) = P − Q`,
/// `P, Q ⪰ 0`, objective `½ tr(P + Q)`.
pub fn conversion_distance(
    theory: &dyn FreeSet,
    rho: &ComplexMatrix,
    sigma: &ComplexMatrix,
    in_dims: &DimVector,
    out_dims: &DimVector,
    opts: &SolverOptions,
) -> Result<Conversion> {
    let db = out_dims.total();
    let f = conversion_frame(
        theory,
        rho,
        sigma,
        in_dims,
        out_dims,
        vec![(Block::Hermitian(db), BlockCone::Psd), (Block::Hermitian(db), BlockCone::Psd)],
    )?;
    let (vs, da) = (&f.vs, f.da);
    let cs = Space::new(vec![Block::Hermitian(db), Block::Hermitian(da), Block::Scalar]);
    let link = apply_map(vs, 1, db, da, rho, &cs, 0);
    let marg = marginal_map(vs, db, da, &cs, 1);
    let map = LinearMap::from_fn(vs, &cs, |e| {
        let mut out = link.apply(e).plus(&marg.apply(e));
        let pq = &e.hermitian(2) - &e.hermitian(3);
        let t = &out.hermitian(0) + &pq;
        out.set_block(0, BlockValue::Hermitian(t.hermitize())).expect("fits");
        out.set_block(2, BlockValue::Scalar(e.scalar(0))).expect("fits");
        out
    });
    let offset = herm_elem(&cs, vec![
        BlockValue::Hermitian(sigma.clone()),
        BlockValue::Hermitian(ComplexMatrix::zeros(da, da)),
        BlockValue::Scalar(1.0),
    ]);
    let half = ComplexMatrix::identity(db).scale(0.5);
    let cost = herm_elem(vs, vec![
        BlockValue::Scalar(0.0),
        BlockValue::Hermitian(ComplexMatrix::zeros(db * da, db * da)),
        BlockValue::Hermitian(half.clone()),
        BlockValue::Hermitian(half),
    ]);
    let p = ConicProgram::new(Sense::Min, f.var_cone, Cone::uniform(&cs, BlockCone::Zero)?, map, cost, offset, "conversion distance")?;
    let sol = require_optimal(solve(&p, opts)?, &p.label)?;
    let x = sol.primal.clone().expect("optimal has a primal point");
    Ok(Conversion {
        value: sol.primal_value.clamp(0.0, 1.0),
        convertible: sol.primal_value <= opts.gap_tol.max(1e-9),
        witness: witness(&x, 1, in_dims, out_dims)?,
        solution: sol,
    })
}

/// Whether some free channel maps ρ to σ, entrywise within `tol`.
/// Minimizes `t` with `|coords(ℳ(ρ) − σ)| ≤ t`; the witness is the optimal
/// channel's renormalized Choi matrix.
pub fn convertible(
    theory: &dyn FreeSet,
    rho: &ComplexMatrix,
    sigma: &ComplexMatrix,
    in_dims: &DimVector,
    out_dims: &DimVector,
    tol: f64,
    opts: &SolverOptions,
) -> Result<Conversion> {
    let f = conversion_frame(theory, rho, sigma, in_dims, out_dims, vec![(Block::Scalar, BlockCone::Free)])?;
    let (vs, da, db) = (&f.vs, f.da, f.db);
    let n = db * db;
    let cs = Space::new(vec![Block::Weights(n), Block::Weights(n), Block::Hermitian(da), Block::Scalar]);
    let herm_b = Space::new(vec![Block::Hermitian(db)]);
    let link = apply_map(vs, 1, db, da, rho, &herm_b, 0);
    let marg = marginal_map(vs, db, da, &cs, 2);
    let map = LinearMap::from_fn(vs, &cs, |e| {
        let y = link.apply(e);
        let t = e.scalar(2);
        let mut out = marg.apply(e);
        let up: Vec<f64> = y.coords().iter().map(|c| t - c).collect();
        let lo: Vec<f64> = y.coords().iter().map(|c| t + c).collect();
        out.set_block(0, BlockValue::Weights(up)).expect("fits");
        out.set_block(1, BlockValue::Weights(lo)).expect("fits");
        out.set_block(3, BlockValue::Scalar(e.scalar(0))).expect("fits");
        out
    });
    let sc = herm_elem(&herm_b, vec![BlockValue::Hermitian(sigma.clone())]);
    let offset = herm_elem(&cs, vec![
        BlockValue::Weights(sc.coords().iter().map(|c| -c).collect()),
        BlockValue::Weights(sc.coords().to_vec()),
        BlockValue::Hermitian(ComplexMatrix::zeros(da, da)),
        BlockValue::Scalar(1.0),
    ]);
    let con = Cone::product(ProductCone::new(&cs, vec![BlockCone::Nonneg, BlockCone::Nonneg, BlockCone::Zero, BlockCone::Zero])?);
    let mut cost = Element::zeros(vs);
    let last = vs.offset(2);
    cost.coords_mut()[last] = 1.0;
    let p = ConicProgram::new(Sense::Min, f.var_cone, con, map, cost, offset, "free convertibility")?;
    let sol = require_optimal(solve(&p, opts)?, &p.label)?;
    let x = sol.primal.clone().expect("optimal has a primal point");
    let resid = sol.primal_value.max(0.0);
    Ok(Conversion { value: resid, convertible: resid <= tol, witness: witness(&x, 1, in_dims, out_dims)?, solution: sol })
}

/// The three terms of `D(ℳ(ρ)) ≤ D(ρ) + D(ℳ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainRule {
    pub output: f64,
    pub input: f64,
    pub channel: f64,
    /// `output − input − channel`
    pub slack: f64,
    pub holds: bool,
}

/// Evaluates the chain rule for max-relative entropies on one instance.
pub fn check_chain_rule(
    theory: &dyn FreeSet,
    rho: &ComplexMatrix,
    channel: &ChoiMatrix,
    tol: f64,
    opts: &SolverOptions,
) -> Result<ChainRule> {
    let out_state = crate::choi::apply_channel(channel, rho)?.hermitize();
    let output = dmax_state(theory, &out_state, channel.out_dims(), opts)?.value;
    let input = dmax_state(theory, rho, channel.in_dims(), opts)?.value;
    let ch = dmax_channel(theory, channel, opts)?.value;
    let slack = output - input - ch;
    Ok(ChainRule { output, input, channel: ch, slack, holds: slack <= tol })
}
