//! Homogeneous self-dual interior-point method for
//!
//! ```text
//!   minimize c'x  s.t.  G x + s = h,  s ∈ K
//! ```
//!
//! where K is a product of a nonnegative orthant and real PSD cones (in
//! scaled-vectorized form). Nesterov-Todd scaling, Mehrotra
//! predictor-corrector steps.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct ConeDims {
    /// Orthant size.
    pub l: usize,
    /// Orders of the PSD blocks.
    pub s: Vec<usize>,
}

impl ConeDims {
    pub fn len(&self) -> usize {
        self.l + self.s.iter().map(|n| n * (n + 1) / 2).sum::<usize>()
    }

    fn degree(&self) -> usize {
        self.l + self.s.iter().sum::<usize>()
    }

    fn psd_offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.s.len());
        let mut o = self.l;
        for n in &self.s {
            off.push(o);
            o += n * (n + 1) / 2;
        }
        off
    }
}

// svec layout: upper triangle row by row, off-diagonals times sqrt(2).
fn smat(v: &[f64], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            if i == j {
                m[(i, i)] = v[k];
            } else {
                m[(i, j)] = v[k] / SQRT2;
                m[(j, i)] = v[k] / SQRT2;
            }
            k += 1;
        }
    }
    m
}

fn svec_into(m: &DMatrix<f64>, out: &mut [f64]) {
    let n = m.nrows();
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            out[k] = if i == j { m[(i, i)] } else { SQRT2 * 0.5 * (m[(i, j)] + m[(j, i)]) };
            k += 1;
        }
    }
}

struct Scaling {
    d: Vec<f64>,
    r: Vec<DMatrix<f64>>,
    rinv: Vec<DMatrix<f64>>,
    /// Scaled point: orthant part then the diagonal of each PSD block.
    lam_l: Vec<f64>,
    lam_s: Vec<Vec<f64>>,
}

fn compute_scaling(s: &DVector<f64>, z: &DVector<f64>, dims: &ConeDims) -> Option<Scaling> {
    let mut d = Vec::with_capacity(dims.l);
    let mut lam_l = Vec::with_capacity(dims.l);
    for i in 0..dims.l {
        if s[i] <= 0.0 || z[i] <= 0.0 {
            return None;
        }
        d.push((s[i] / z[i]).sqrt());
        lam_l.push((s[i] * z[i]).sqrt());
    }
    let mut r = Vec::new();
    let mut rinv = Vec::new();
    let mut lam_s = Vec::new();
    for (&n, off) in dims.s.iter().zip(dims.psd_offsets()) {
        let len = n * (n + 1) / 2;
        let sm = smat(&s.as_slice()[off..off + len], n);
        let zm = smat(&z.as_slice()[off..off + len], n);
        let ls = Cholesky::new(sm)?.l();
        let lz = Cholesky::new(zm)?.l();
        let svd = (lz.transpose() * &ls).svd(true, true);
        let v = svd.v_t?.transpose();
        let u = svd.u?;
        let lam: Vec<f64> = svd.singular_values.iter().copied().collect();
        if lam.iter().any(|&x| x <= 0.0 || !x.is_finite()) {
            return None;
        }
        // R = L_s V Λ^{-1/2},  R^{-1} = Λ^{-1/2} U^T L_z^T
        let mut rk = &ls * &v;
        let mut rik = u.transpose() * lz.transpose();
        for j in 0..n {
            let f = 1.0 / lam[j].sqrt();
            rk.column_mut(j).scale_mut(f);
            rik.row_mut(j).scale_mut(f);
        }
        r.push(rk);
        rinv.push(rik);
        lam_s.push(lam);
    }
    Some(Scaling { d, r, rinv, lam_l, lam_s })
}

impl Scaling {
    /// W^{-T} v: orthant v/d, PSD R^{-1} V R^{-T}.
    fn winvt(&self, v: &[f64], dims: &ConeDims, out: &mut [f64]) {
        for i in 0..dims.l {
            out[i] = v[i] / self.d[i];
        }
        for (k, (&n, off)) in dims.s.iter().zip(dims.psd_offsets()).enumerate() {
            let len = n * (n + 1) / 2;
            let m = smat(&v[off..off + len], n);
            let t = &self.rinv[k] * m * self.rinv[k].transpose();
            svec_into(&t, &mut out[off..off + len]);
        }
    }

    /// W^{-1} v: orthant v/d, PSD R^{-T} V R^{-1}.
    fn winv(&self, v: &[f64], dims: &ConeDims, out: &mut [f64]) {
        for i in 0..dims.l {
            out[i] = v[i] / self.d[i];
        }
        for (k, (&n, off)) in dims.s.iter().zip(dims.psd_offsets()).enumerate() {
            let len = n * (n + 1) / 2;
            let m = smat(&v[off..off + len], n);
            let t = self.rinv[k].transpose() * m * &self.rinv[k];
            svec_into(&t, &mut out[off..off + len]);
        }
    }

    /// W^T v: orthant d v, PSD R V R^T.
    fn wt(&self, v: &[f64], dims: &ConeDims, out: &mut [f64]) {
        for i in 0..dims.l {
            out[i] = v[i] * self.d[i];
        }
        for (k, (&n, off)) in dims.s.iter().zip(dims.psd_offsets()).enumerate() {
            let len = n * (n + 1) / 2;
            let m = smat(&v[off..off + len], n);
            let t = &self.r[k] * m * self.r[k].transpose();
            svec_into(&t, &mut out[off..off + len]);
        }
    }

    fn lambda_vec(&self, dims: &ConeDims) -> Vec<f64> {
        let mut out = vec![0.0; dims.len()];
        out[..dims.l].copy_from_slice(&self.lam_l);
        for (k, (&n, off)) in dims.s.iter().zip(dims.psd_offsets()).enumerate() {
            let mut idx = off;
            for i in 0..n {
                for j in i..n {
                    if i == j {
                        out[idx] = self.lam_s[k][i];
                    }
                    idx += 1;
                }
            }
        }
        out
    }

    /// λ ⦻ v, i.e. the solution u of λ ∘ u = v.
    fn lambda_div(&self, v: &[f64], dims: &ConeDims) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for i in 0..dims.l {
            out[i] = v[i] / self.lam_l[i];
        }
        for (k, (&n, off)) in dims.s.iter().zip(dims.psd_offsets()).enumerate() {
            let lam = &self.lam_s[k];
            let mut idx = off;
            for i in 0..n {
                for j in i..n {
                    out[idx] = v[idx] * 2.0 / (lam[i] + lam[j]);
                    idx += 1;
                }
            }
        }
        out
    }

    /// λ ∘ λ
    fn lambda_sq(&self, dims: &ConeDims) -> Vec<f64> {
        let lam = self.lambda_vec(dims);
        circ(&lam, &lam, dims)
    }
}

/// Jordan product: orthant entrywise, PSD (UV + VU)/2.
fn circ(u: &[f64], v: &[f64], dims: &ConeDims) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    for i in 0..dims.l {
        out[i] = u[i] * v[i];
    }
    for (&n, off) in dims.s.iter().zip(dims.psd_offsets()) {
        let len = n * (n + 1) / 2;
        let a = smat(&u[off..off + len], n);
        let b = smat(&v[off..off + len], n);
        let p = &a * &b;
        let sym = (&p + p.transpose()) * 0.5;
        svec_into(&sym, &mut out[off..off + len]);
    }
    out
}

fn unit(dims: &ConeDims) -> Vec<f64> {
    let mut e = vec![0.0; dims.len()];
    for x in e.iter_mut().take(dims.l) {
        *x = 1.0;
    }
    for (&n, off) in dims.s.iter().zip(dims.psd_offsets()) {
        let mut idx = off;
        for i in 0..n {
            for j in i..n {
                if i == j {
                    e[idx] = 1.0;
                }
                idx += 1;
            }
        }
    }
    e
}

/// Largest α with λ + α v in the cone (λ the scaled point, diagonal on PSD blocks).
fn max_step(sc: &Scaling, v: &[f64], dims: &ConeDims) -> f64 {
    let mut alpha = f64::INFINITY;
    for i in 0..dims.l {
        if v[i] < 0.0 {
            alpha = alpha.min(-sc.lam_l[i] / v[i]);
        }
    }
    for (k, (&n, off)) in dims.s.iter().zip(dims.psd_offsets()).enumerate() {
        let len = n * (n + 1) / 2;
        let mut m = smat(&v[off..off + len], n);
        let lam = &sc.lam_s[k];
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] /= (lam[i] * lam[j]).sqrt();
            }
        }
        let emin = SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if emin < 0.0 {
            alpha = alpha.min(-1.0 / emin);
        }
    }
    alpha
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum IpmStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIterations,
}

pub(crate) struct IpmResult {
    pub status: IpmStatus,
    pub x: DVector<f64>,
    #[allow(dead_code)] // slack; handy when debugging
    pub s: DVector<f64>,
    pub z: DVector<f64>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

pub(crate) struct IpmOptions {
    pub max_iter: usize,
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub infeas_tol: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn factor(m: DMatrix<f64>) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    let scale = m.diagonal().iter().copied().fold(0.0, f64::max).max(1e-300);
    if let Some(ch) = Cholesky::new(m.clone()) {
        return Ok(ch);
    }
    for reg in [1e-14, 1e-12, 1e-10] {
        let mut mr = m.clone();
        for i in 0..mr.nrows() {
            mr[(i, i)] += reg * scale;
        }
        if let Some(ch) = Cholesky::new(mr) {
            return Ok(ch);
        }
    }
    Err(Error::Solver("numerically singular Newton system".into()))
}

pub(crate) fn solve(
    c: &DVector<f64>,
    g: &DMatrix<f64>,
    h: &DVector<f64>,
    dims: &ConeDims,
    opts: &IpmOptions,
) -> Result<IpmResult> {
    let n = c.len();
    let m = dims.len();
    debug_assert_eq!(g.nrows(), m);
    debug_assert_eq!(g.ncols(), n);
    let e = unit(dims);
    let deg = dims.degree() as f64;
    let hn = norm(h.as_slice()).max(1.0);
    let cn = norm(c.as_slice()).max(1.0);

    let mut x = DVector::zeros(n);
    let mut s = DVector::from_vec(e.clone());
    let mut z = DVector::from_vec(e.clone());
    let (mut tau, mut kappa) = (1.0_f64, 1.0_f64);
    let gt = g.transpose();

    let mut last = (f64::INFINITY, f64::INFINITY);
    for it in 0..opts.max_iter {
        let rx = &gt * &z + c * tau;
        let rz = g * &x + &s - h * tau;
        let cx = c.dot(&x);
        let hz = h.dot(&z);
        let rt = cx + hz + kappa;

        let pres = rz.norm() / tau / hn;
        let dres = rx.norm() / tau / cn;
        last = (pres, dres);
        let pcost = cx / tau;
        let dcost = -hz / tau;
        let gap = s.dot(&z) / (tau * tau);
        let scale = 1.0 + pcost.abs().min(dcost.abs());
        if pres <= opts.feas_tol && dres <= opts.feas_tol && gap <= opts.gap_tol * scale && (pcost - dcost).abs() <= opts.gap_tol * scale {
            return Ok(IpmResult { status: IpmStatus::Optimal, x: x / tau, s: s / tau, z: z / tau, iterations: it, primal_residual: pres, dual_residual: dres });
        }
        if hz < 0.0 {
            let pinf = (&gt * &z).norm() / cn / (-hz);
            if pinf <= opts.infeas_tol && tau / kappa.max(1e-300) < 1e-8_f64.max(opts.infeas_tol) * 1e2 {
                let scale = -hz;
                return Ok(IpmResult { status: IpmStatus::PrimalInfeasible, x: x / scale, s: s / scale, z: z / scale, iterations: it, primal_residual: pres, dual_residual: dres });
            }
        }
        if cx < 0.0 {
            let dinf = (g * &x + &s).norm() / hn / (-cx);
            if dinf <= opts.infeas_tol && tau / kappa.max(1e-300) < 1e-8_f64.max(opts.infeas_tol) * 1e2 {
                let scale = -cx;
                return Ok(IpmResult { status: IpmStatus::DualInfeasible, x: x / scale, s: s / scale, z: z / scale, iterations: it, primal_residual: pres, dual_residual: dres });
            }
        }

        let sc = compute_scaling(&s, &z, dims).ok_or_else(|| Error::Solver("iterate left the cone interior".into()))?;
        // G̃ = W^{-T} G column by column
        let mut gs = DMatrix::zeros(m, n);
        let mut buf = vec![0.0; m];
        for j in 0..n {
            let col: Vec<f64> = g.column(j).iter().copied().collect();
            sc.winvt(&col, dims, &mut buf);
            gs.column_mut(j).copy_from_slice(&buf);
        }
        let mut hs = vec![0.0; m];
        sc.winvt(h.as_slice(), dims, &mut hs);
        let mut rzs = vec![0.0; m];
        sc.winvt(rz.as_slice(), dims, &mut rzs);
        let hs = DVector::from_vec(hs);
        let rzs = DVector::from_vec(rzs);
        let gst = gs.transpose();
        let chol = factor(&gst * &gs)?;
        let u2 = chol.solve(&(&gst * &hs - c));
        let z2 = &gs * &u2 - &hs;
        let lam = DVector::from_vec(sc.lambda_vec(dims));

        // Solves the linearized system for given (η, q, dk).
        let newton = |eta: f64, q: &DVector<f64>, dk: f64| {
            let rhs = -(&rx * eta) - &gst * (&rzs * eta + q);
            let u1 = chol.solve(&rhs);
            let z1 = &gs * &u1 + &rzs * eta + q;
            let den = c.dot(&u2) + hs.dot(&z2) - kappa / tau;
            let dtau = (-eta * rt - dk / tau - c.dot(&u1) - hs.dot(&z1)) / den;
            let dx = &u1 + &u2 * dtau;
            let dzs = &z1 + &z2 * dtau;
            let dss = q - &dzs;
            let dkappa = (dk - kappa * dtau) / tau;
            (dx, dzs, dss, dtau, dkappa)
        };
        let step = |dzs: &DVector<f64>, dss: &DVector<f64>, dtau: f64, dkappa: f64| {
            let mut a = max_step(&sc, dss.as_slice(), dims).min(max_step(&sc, dzs.as_slice(), dims));
            if dtau < 0.0 {
                a = a.min(-tau / dtau);
            }
            if dkappa < 0.0 {
                a = a.min(-kappa / dkappa);
            }
            a
        };

        // predictor
        let q_aff = -&lam;
        let (_, dzs_a, dss_a, dtau_a, dkappa_a) = newton(1.0, &q_aff, -tau * kappa);
        let alpha_a = step(&dzs_a, &dss_a, dtau_a, dkappa_a).min(1.0);
        let mu = (s.dot(&z) + tau * kappa) / (deg + 1.0);
        let sigma = (1.0 - alpha_a).powi(3);

        // corrector
        let lsq = sc.lambda_sq(dims);
        let corr = circ(dss_a.as_slice(), dzs_a.as_slice(), dims);
        let target: Vec<f64> = (0..m).map(|i| -lsq[i] + sigma * mu * e[i] - corr[i]).collect();
        let q = DVector::from_vec(sc.lambda_div(&target, dims));
        let dk = -tau * kappa + sigma * mu - dtau_a * dkappa_a;
        let (dx, dzs, dss, dtau, dkappa) = newton(1.0 - sigma, &q, dk);
        let alpha = (0.99 * step(&dzs, &dss, dtau, dkappa)).min(1.0);
        if !alpha.is_finite() || alpha <= 1e-14 {
            break;
        }

        let mut dz = vec![0.0; m];
        sc.winv(dzs.as_slice(), dims, &mut dz);
        let mut ds = vec![0.0; m];
        sc.wt(dss.as_slice(), dims, &mut ds);
        x += dx * alpha;
        z += DVector::from_vec(dz) * alpha;
        s += DVector::from_vec(ds) * alpha;
        tau += alpha * dtau;
        kappa += alpha * dkappa;
    }
    Ok(IpmResult {
        status: IpmStatus::MaxIterations,
        x: &x / tau,
        s: &s / tau,
        z: &z / tau,
        iterations: opts.max_iter,
        primal_residual: last.0,
        dual_residual: last.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> IpmOptions {
        IpmOptions { max_iter: 100, gap_tol: 1e-9, feas_tol: 1e-9, infeas_tol: 1e-8 }
    }

    #[test]
    fn svec_roundtrip() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 5.0, 3.0, 5.0, 6.0]);
        let mut v = vec![0.0; 6];
        svec_into(&m, &mut v);
        assert_eq!(smat(&v, 3), m);
        let n2: f64 = v.iter().map(|x| x * x).sum();
        assert!((n2 - m.norm_squared()).abs() < 1e-12);
    }

    #[test]
    fn tiny_lp() {
        // min x s.t. x >= 3, x >= 0   (as -x + s = -3, -x + s = 0)
        let c = DVector::from_vec(vec![1.0]);
        let g = DMatrix::from_row_slice(2, 1, &[-1.0, -1.0]);
        let h = DVector::from_vec(vec![-3.0, 0.0]);
        let r = solve(&c, &g, &h, &ConeDims { l: 2, s: vec![] }, &opts()).unwrap();
        assert_eq!(r.status, IpmStatus::Optimal);
        assert!((r.x[0] - 3.0).abs() < 1e-7);
    }

    #[test]
    fn infeasible_lp() {
        // x <= -1 and x >= 0
        let c = DVector::from_vec(vec![1.0]);
        let g = DMatrix::from_row_slice(2, 1, &[1.0, -1.0]);
        let h = DVector::from_vec(vec![-1.0, 0.0]);
        let r = solve(&c, &g, &h, &ConeDims { l: 2, s: vec![] }, &opts()).unwrap();
        assert_eq!(r.status, IpmStatus::PrimalInfeasible);
    }

    #[test]
    fn unbounded_lp() {
        // min -x s.t. x >= 0
        let c = DVector::from_vec(vec![-1.0]);
        let g = DMatrix::from_row_slice(1, 1, &[-1.0]);
        let h = DVector::from_vec(vec![0.0]);
        let r = solve(&c, &g, &h, &ConeDims { l: 1, s: vec![] }, &opts()).unwrap();
        assert_eq!(r.status, IpmStatus::DualInfeasible);
    }

    #[test]
    fn small_sdp_max_eigenvalue() {
        // min t s.t. t I - A ⪰ 0, A = [[2,1],[1,2]] → 3
        let c = DVector::from_vec(vec![1.0]);
        // s = t I - A = h - G t with h = -svec(A), G = -svec(I)
        let g = DMatrix::from_row_slice(3, 1, &[-1.0, 0.0, -1.0]);
        let h = DVector::from_vec(vec![-2.0, -SQRT2, -2.0]);
        let r = solve(&c, &g, &h, &ConeDims { l: 0, s: vec![2] }, &opts()).unwrap();
        assert_eq!(r.status, IpmStatus::Optimal);
        assert!((r.x[0] - 3.0).abs() < 1e-7, "{}", r.x[0]);
    }
}
