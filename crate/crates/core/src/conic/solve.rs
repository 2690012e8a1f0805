//! Compiles a [`ConicProgram`] to the interior-point standard form, solves,
//! and maps primal/dual points back.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::cone::{BlockCone, Cone};
use super::ipm::{self, ConeDims, IpmOptions, IpmStatus};
use super::program::{ConicProgram, Sense};
use crate::error::{Error, Result};
use crate::linalg::space::{Block, Element};

const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Relative duality-gap tolerance for "optimal".
    pub gap_tol: f64,
    /// Relative primal/dual residual tolerance.
    pub feas_tol: f64,
    /// Largest Hermitian block side accepted.
    pub max_hermitian_side: usize,
    /// Largest number of real variables accepted.
    pub max_variables: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iter: 100, gap_tol: 1e-7, feas_tol: 1e-8, max_hermitian_side: 16, max_variables: 500 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIterations,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::MaxIterations => "max-iterations",
        };
        f.write_str(s)
    }
}

/// Outcome of [`solve`].
///
/// For `Infeasible` the primal is empty (α = +∞ for min, −∞ for max) and
/// `dual` holds a ray certifying it; for `Unbounded` the dual is infeasible
/// and `primal` holds an improving ray.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub status: SolveStatus,
    pub sense: Sense,
    /// Primal value α.
    pub primal_value: f64,
    /// Dual value β.
    pub dual_value: f64,
    pub primal: Option<Element>,
    pub dual: Option<Element>,
    /// |α − β|, or +∞ when either is infinite.
    pub gap: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

impl Solution {
    /// Signed weak-duality slack: α − β for min, β − α for max (≥ 0 up to tolerance).
    pub fn duality_slack(&self) -> f64 {
        match self.sense {
            Sense::Min => self.primal_value - self.dual_value,
            Sense::Max => self.dual_value - self.primal_value,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// Rows of the compiled problem, grouped by cone type.
#[derive(Default)]
struct Rows {
    // each row: coefficients over all variables, rhs, and a functional on
    // the constraint space (for dual recovery)
    lin: Vec<(Vec<f64>, f64, Vec<f64>)>,
    psd: Vec<(usize, Vec<(Vec<f64>, f64, Vec<f64>)>)>,
    eq: Vec<(Vec<f64>, f64, Vec<f64>)>,
}

/// An affine expression `F v − f` with values in one block, plus its
/// functional on the constraint space.
struct Expr<'a> {
    f_rows: &'a DMatrix<f64>,
    f_rhs: &'a [f64],
    k_rows: &'a DMatrix<f64>,
}

fn row(m: &DMatrix<f64>, i: usize) -> Vec<f64> {
    m.row(i).iter().copied().collect()
}

impl Rows {
    fn add(&mut self, block: &Block, cone: BlockCone, e: Expr<'_>) -> Result<()> {
        let nrows = e.f_rows.nrows();
        match (cone, block) {
            (BlockCone::Free, _) => {}
            (BlockCone::Zero, _) => {
                for i in 0..nrows {
                    self.eq.push((row(e.f_rows, i), e.f_rhs[i], row(e.k_rows, i)));
                }
            }
            (BlockCone::Nonneg, Block::Scalar | Block::Weights(_)) | (BlockCone::Psd, Block::Scalar) => {
                // s = F v − f ≥ 0  ⇒  G = −F, h = −f
                for i in 0..nrows {
                    let g: Vec<f64> = row(e.f_rows, i).iter().map(|x| -x).collect();
                    self.lin.push((g, -e.f_rhs[i], row(e.k_rows, i)));
                }
            }
            (BlockCone::Psd, Block::Hermitian(d)) => {
                let d = *d;
                // real embedding [[Re, −Im], [Im, Re]] of the Hermitian block,
                // each svec entry a linear combination of Hermitian coordinates
                let n = 2 * d;
                let nv = e.f_rows.ncols();
                let nk = e.k_rows.ncols();
                let mut entries = Vec::with_capacity(n * (n + 1) / 2);
                for i in 0..n {
                    for j in i..n {
                        let mut g = vec![0.0; nv];
                        let mut k = vec![0.0; nk];
                        let mut rhs = 0.0;
                        for (coef, slot) in embed_entry(d, i, j) {
                            let w = if i == j { coef } else { SQRT2 * coef };
                            for (gv, fv) in g.iter_mut().zip(e.f_rows.row(slot).iter()) {
                                *gv -= w * fv;
                            }
                            for (kv, fv) in k.iter_mut().zip(e.k_rows.row(slot).iter()) {
                                *kv += w * fv;
                            }
                            rhs -= w * e.f_rhs[slot];
                        }
                        entries.push((g, rhs, k));
                    }
                }
                self.psd.push((n, entries));
            }
            (c, b) => return Err(Error::InvalidProgram(format!("cone {c:?} on block {b}"))),
        }
        Ok(())
    }
}

/// Entry (i, j) of the real embedding of a Hermitian block as a combination
/// of its coordinates: list of (coefficient, coordinate slot).
fn embed_entry(d: usize, i: usize, j: usize) -> Vec<(f64, usize)> {
    let h = 1.0 / SQRT2;
    let (bi, p) = (i / d, i % d);
    let (bj, q) = (j / d, j % d);
    // Re X_pq
    let re = |p: usize, q: usize| -> Vec<(f64, usize)> {
        if p == q {
            vec![(1.0, p * d + p)]
        } else {
            let (a, b) = if p < q { (p, q) } else { (q, p) };
            vec![(h, a * d + b)]
        }
    };
    // Im X_pq  (slot (q,p) with q>p stores sqrt2 Im X_qp... see space.rs)
    let im = |p: usize, q: usize| -> Vec<(f64, usize)> {
        if p == q {
            vec![]
        } else if p > q {
            // slot (p, q) with p > q holds sqrt2 Im X_pq
            vec![(h, p * d + q)]
        } else {
            // Im X_pq = −Im X_qp
            vec![(-h, q * d + p)]
        }
    };
    match (bi, bj) {
        (0, 0) | (1, 1) => re(p, q),
        (0, 1) => im(p, q).into_iter().map(|(c, s)| (-c, s)).collect(),
        _ => im(p, q),
    }
}

struct Compiled {
    n_orig: usize,
    n_total: usize,
    c: DVector<f64>,
    g: DMatrix<f64>,
    h: DVector<f64>,
    kg: DMatrix<f64>,
    a: DMatrix<f64>,
    b: DVector<f64>,
    ka: DMatrix<f64>,
    dims: ConeDims,
}

fn compile(p: &ConicProgram, opts: &SolverOptions) -> Result<Compiled> {
    p.validate()?;
    let vs = p.var_space();
    let cs = p.con_space();
    for sp in [vs, cs] {
        for b in sp.blocks() {
            if let Block::Hermitian(d) = b {
                if *d > opts.max_hermitian_side {
                    return Err(Error::InvalidProgram(format!(
                        "Hermitian block of side {d} exceeds the cap {}",
                        opts.max_hermitian_side
                    )));
                }
            }
        }
    }
    let n0 = vs.dim();
    let nc = cs.dim();
    // auxiliary variables for Image-shaped cones
    let mut n_total = n0;
    let aux_start = |terms: &[(crate::linalg::space::LinearMap, super::ProductCone)], n: &mut usize| -> Vec<usize> {
        terms.iter().map(|(l, _)| {
            let s = *n;
            *n += l.domain().dim();
            s
        }).collect()
    };
    let var_aux = match &p.var_cone {
        Cone::Image { terms, .. } => aux_start(terms, &mut n_total),
        _ => vec![],
    };
    let con_aux = match &p.con_cone {
        Cone::Image { terms, .. } => aux_start(terms, &mut n_total),
        _ => vec![],
    };
    if n0 > opts.max_variables {
        return Err(Error::InvalidProgram(format!("{n0} real variables exceed the cap {}", opts.max_variables)));
    }

    let nmat = p.map.matrix();
    let hvec = p.offset.coords();
    let zero_k = |r: usize| DMatrix::<f64>::zeros(r, nc);
    let mut rows = Rows::default();

    // Adds "each block of the cone (over space `space`) contains F v − f".
    fn add_product(
        rows: &mut Rows,
        pc: &super::ProductCone,
        f_full: &DMatrix<f64>,
        f_rhs: &[f64],
        k_full: &DMatrix<f64>,
    ) -> Result<()> {
        let sp = pc.space();
        for (bi, (block, cone)) in sp.blocks().iter().zip(pc.cones()).enumerate() {
            let r = sp.range(bi);
            let f_rows = f_full.rows(r.start, r.len()).into_owned();
            let k_rows = k_full.rows(r.start, r.len()).into_owned();
            rows.add(block, *cone, Expr { f_rows: &f_rows, f_rhs: &f_rhs[r.clone()], k_rows: &k_rows })?;
        }
        Ok(())
    }

    // variable cone
    match &p.var_cone {
        Cone::Preimage { terms, .. } => {
            for (l, pc) in terms {
                let mut f = DMatrix::zeros(l.codomain().dim(), n_total);
                f.view_mut((0, 0), (l.codomain().dim(), n0)).copy_from(l.matrix());
                let rhs = vec![0.0; l.codomain().dim()];
                add_product(&mut rows, pc, &f, &rhs, &zero_k(l.codomain().dim()))?;
            }
        }
        Cone::Image { terms, .. } => {
            // x − Σ L_k z_k = 0
            let mut f = DMatrix::zeros(n0, n_total);
            f.view_mut((0, 0), (n0, n0)).fill_with_identity();
            for ((l, pc), &st) in terms.iter().zip(&var_aux) {
                let k = l.domain().dim();
                f.view_mut((0, st), (n0, k)).copy_from(&(-l.matrix()));
                let mut sel = DMatrix::zeros(k, n_total);
                sel.view_mut((0, st), (k, k)).fill_with_identity();
                add_product(&mut rows, pc, &sel, &vec![0.0; k], &zero_k(k))?;
            }
            for i in 0..n0 {
                rows.eq.push((row(&f, i), 0.0, vec![0.0; nc]));
            }
        }
    }
    // constraint cone on N x − H
    match &p.con_cone {
        Cone::Preimage { terms, .. } => {
            for (l, pc) in terms {
                let r = l.codomain().dim();
                let mut f = DMatrix::zeros(r, n_total);
                f.view_mut((0, 0), (r, n0)).copy_from(&(l.matrix() * nmat));
                let rhs = l.matrix() * DVector::from_column_slice(hvec);
                add_product(&mut rows, pc, &f, rhs.as_slice(), l.matrix())?;
            }
        }
        Cone::Image { terms, .. } => {
            // N x − Σ L_k w_k = H
            let mut f = DMatrix::zeros(nc, n_total);
            f.view_mut((0, 0), (nc, n0)).copy_from(nmat);
            for ((l, pc), &st) in terms.iter().zip(&con_aux) {
                let k = l.domain().dim();
                f.view_mut((0, st), (nc, k)).copy_from(&(-l.matrix()));
                let mut sel = DMatrix::zeros(k, n_total);
                sel.view_mut((0, st), (k, k)).fill_with_identity();
                add_product(&mut rows, pc, &sel, &vec![0.0; k], &zero_k(k))?;
            }
            for i in 0..nc {
                let mut k = vec![0.0; nc];
                k[i] = 1.0;
                rows.eq.push((row(&f, i), hvec[i], k));
            }
        }
    }

    let sign = if p.sense == Sense::Min { 1.0 } else { -1.0 };
    let mut c = DVector::zeros(n_total);
    for (i, v) in p.cost.coords().iter().enumerate() {
        c[i] = sign * v;
    }

    let dims = ConeDims { l: rows.lin.len(), s: rows.psd.iter().map(|(n, _)| *n).collect() };
    let m = dims.len();
    let mut g = DMatrix::zeros(m, n_total);
    let mut h = DVector::zeros(m);
    let mut kg = DMatrix::zeros(m, nc);
    let all = rows.lin.iter().chain(rows.psd.iter().flat_map(|(_, e)| e.iter()));
    for (i, (gr, hr, kr)) in all.enumerate() {
        g.row_mut(i).copy_from_slice(gr);
        h[i] = *hr;
        kg.row_mut(i).copy_from_slice(kr);
    }
    let pe = rows.eq.len();
    let mut a = DMatrix::zeros(pe, n_total);
    let mut b = DVector::zeros(pe);
    let mut ka = DMatrix::zeros(pe, nc);
    for (i, (ar, br, kr)) in rows.eq.iter().enumerate() {
        a.row_mut(i).copy_from_slice(ar);
        b[i] = *br;
        ka.row_mut(i).copy_from_slice(kr);
    }
    Ok(Compiled { n_orig: n0, n_total, c, g, h, kg, a, b, ka, dims })
}

/// Orthonormal basis of the null space of `a` (n columns) and the rank tolerance used.
fn null_space(a: &DMatrix<f64>, n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    // pad to at least n rows so the SVD returns a full right basis
    let rows = a.nrows().max(n);
    let mut ap = DMatrix::zeros(rows, n);
    ap.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = ap.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = 1e-10 * smax.max(1.0);
    let mut range = Vec::new();
    let mut null = Vec::new();
    for (k, &sv) in svd.singular_values.iter().enumerate() {
        let v: Vec<f64> = vt.row(k).iter().copied().collect();
        if sv > tol {
            range.push(v);
        } else {
            null.push(v);
        }
    }
    let to_cols = |vs: Vec<Vec<f64>>| {
        let mut m = DMatrix::zeros(n, vs.len());
        for (j, v) in vs.iter().enumerate() {
            m.column_mut(j).copy_from_slice(v);
        }
        m
    };
    (to_cols(null), to_cols(range))
}

pub fn solve(p: &ConicProgram, opts: &SolverOptions) -> Result<Solution> {
    let cp = compile(p, opts)?;
    let n = cp.n_total;
    let inf_sol = |status: SolveStatus, primal: Option<Element>, dual: Option<Element>, it: usize| {
        // Infeasible: min → α = +∞; Unbounded: min → α = −∞. Max flips.
        let s = if p.sense == Sense::Min { 1.0 } else { -1.0 };
        let v = if status == SolveStatus::Infeasible { s * f64::INFINITY } else { -s * f64::INFINITY };
        Solution {
            status,
            sense: p.sense,
            primal_value: v,
            dual_value: v,
            primal,
            dual,
            gap: f64::INFINITY,
            iterations: it,
            primal_residual: f64::NAN,
            dual_residual: f64::NAN,
        }
    };

    // eliminate equalities: v = v0 + N ξ
    let (v0, nb) = if cp.a.nrows() == 0 {
        (DVector::zeros(n), DMatrix::identity(n, n))
    } else {
        let (nb, _) = null_space(&cp.a, n);
        let svd = cp.a.clone().svd(true, true);
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let v0 = svd
            .solve(&cp.b, 1e-10 * smax.max(1.0))
            .map_err(|e| Error::Solver(format!("equality solve failed: {e}")))?;
        let resid = (&cp.a * &v0 - &cp.b).norm();
        if resid > 1e-9 * cp.b.norm().max(1.0) {
            return Ok(inf_sol(SolveStatus::Infeasible, None, None, 0));
        }
        (v0, nb)
    };
    let g1 = &cp.g * &nb;
    let h1 = &cp.h - &cp.g * &v0;
    let c1 = nb.transpose() * &cp.c;
    // drop directions invisible to the cone constraints
    let (gnull, grange) = null_space(&g1, g1.ncols());
    if gnull.ncols() > 0 {
        let leak = (gnull.transpose() * &c1).norm();
        if leak > 1e-9 * c1.norm().max(1.0) {
            let ray = &nb * &gnull * (gnull.transpose() * &c1) * (-1.0 / leak);
            let x = Element::from_coords(p.var_space(), ray.rows(0, cp.n_orig).iter().copied().collect())?;
            return Ok(inf_sol(SolveStatus::Unbounded, Some(x), None, 0));
        }
    }
    let basis = &nb * &grange;
    let g2 = &cp.g * &basis;
    let c2 = basis.transpose() * &cp.c;
    let ipm_opts = IpmOptions { max_iter: opts.max_iter, gap_tol: opts.gap_tol, feas_tol: opts.feas_tol, infeas_tol: opts.feas_tol };
    let r = ipm::solve(&c2, &g2, &h1, &cp.dims, &ipm_opts)?;

    let sign = if p.sense == Sense::Min { 1.0 } else { -1.0 };
    let recover_y = |z: &DVector<f64>| -> Result<DVector<f64>> {
        if cp.a.nrows() == 0 {
            return Ok(DVector::zeros(0));
        }
        // A^T y = −(c + G^T z), least squares
        let rhs = -(&cp.c + cp.g.transpose() * z);
        let at = cp.a.transpose();
        let svd = at.svd(true, true);
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        svd.solve(&rhs, 1e-10 * smax.max(1.0)).map_err(|e| Error::Solver(format!("multiplier solve failed: {e}")))
    };
    let dual_elem = |z: &DVector<f64>, y: &DVector<f64>| -> Result<Element> {
        let mut yv = cp.kg.transpose() * z;
        if y.len() > 0 {
            yv -= cp.ka.transpose() * y;
        }
        Element::from_coords(p.con_space(), yv.as_slice().to_vec())
    };

    match r.status {
        IpmStatus::Optimal | IpmStatus::MaxIterations => {
            let v = &v0 + &basis * &r.x;
            let x = Element::from_coords(p.var_space(), v.rows(0, cp.n_orig).iter().copied().collect())?;
            let y = recover_y(&r.z)?;
            let dual = dual_elem(&r.z, &y)?;
            let alpha = p.cost.inner(&x);
            let d_int = -cp.h.dot(&r.z) - if y.len() > 0 { cp.b.dot(&y) } else { 0.0 };
            let beta = sign * d_int;
            let status = if r.status == IpmStatus::Optimal { SolveStatus::Optimal } else { SolveStatus::MaxIterations };
            Ok(Solution {
                status,
                sense: p.sense,
                primal_value: alpha,
                dual_value: beta,
                primal: Some(x),
                dual: Some(dual),
                gap: (alpha - beta).abs(),
                iterations: r.iterations,
                primal_residual: r.primal_residual,
                dual_residual: r.dual_residual,
            })
        }
        IpmStatus::PrimalInfeasible => {
            let z = &r.z;
            let y = {
                // ray: A^T y = −G^T z
                if cp.a.nrows() == 0 {
                    DVector::zeros(0)
                } else {
                    let rhs = -(cp.g.transpose() * z);
                    let svd = cp.a.transpose().svd(true, true);
                    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
                    svd.solve(&rhs, 1e-10 * smax.max(1.0)).map_err(|e| Error::Solver(e.to_string()))?
                }
            };
            let dual = dual_elem(z, &y)?;
            Ok(inf_sol(SolveStatus::Infeasible, None, Some(dual), r.iterations))
        }
        IpmStatus::DualInfeasible => {
            let v = &basis * &r.x;
            let x = Element::from_coords(p.var_space(), v.rows(0, cp.n_orig).iter().copied().collect())?;
            Ok(inf_sol(SolveStatus::Unbounded, Some(x), None, r.iterations))
        }
    }
}
