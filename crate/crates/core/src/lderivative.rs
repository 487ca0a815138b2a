//! Finite-dimensional conditional extremum problems: Hessians on constraint kernels
//! and the Lagrangian subspaces `Λ(A, Q) = {(ζ, A v) : ζA + Q(v, ·) = 0}`.
//!
//! `Λ(A, Q)` lives in `standard_space(m)` with `ζ` as fiber coordinates, so the
//! fiber `T*_zN` is the vertical subspace.

use std::sync::Arc;

use crate::curve::GrassmannCurve;
use crate::linalg::{asymmetry, hstack, nullspace, rank, spectral_norm, sym, Mat, Vec64};
use crate::maslov::{maslov_index_with, MaslovOptions};
use crate::symplectic::{matrix_inertia, standard_space, transversality, LagrangianFrame, QuadraticForm};
use crate::{Error, Result};

/// Residual tolerance for Lagrangian points.
pub const NEWTON_TOL: f64 = 1e-10;
/// Relative step for the finite-difference second-derivative fallback.
pub const FD_RELATIVE_STEP: f64 = 1e-6;
const RANK_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-7;
const NONDEGENERACY_TOL: f64 = 1e-9;

/// `J: ℝ^dimW → ℝ` and `Φ: ℝ^dimW → ℝ^m` with first and second derivatives.
pub trait FiniteProblem: Send + Sync {
    fn dim_w(&self) -> usize;
    fn m(&self) -> usize;
    fn j(&self, w: &Vec64) -> f64;
    fn j_grad(&self, w: &Vec64) -> Vec64;
    fn j_hess(&self, w: &Vec64) -> Mat;
    fn phi(&self, w: &Vec64) -> Vec64;
    /// `m × dimW` Jacobian.
    fn phi_jac(&self, w: &Vec64) -> Mat;
    /// Hessians of the `m` components.
    fn phi_hess(&self, w: &Vec64) -> Vec<Mat>;
    /// True when second derivatives are finite-difference approximations.
    fn uses_finite_differences(&self) -> bool {
        false
    }
}

/// `J(w) = ½ wᵀHw + gᵀw`, `Φ(w) = Aw + b`.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    pub h: Mat,
    pub g: Vec64,
    pub a: Mat,
    pub b: Vec64,
}

impl QuadraticProblem {
    pub fn new(h: Mat, g: Vec64, a: Mat, b: Vec64) -> Result<Self> {
        let d = h.nrows();
        if h.ncols() != d || g.len() != d || a.ncols() != d || b.len() != a.nrows() {
            return Err(Error::InvalidInput("inconsistent quadratic problem dimensions".into()));
        }
        if asymmetry(&h) > SYMMETRY_TOL * spectral_norm(&h).max(1.0) {
            return Err(Error::InvalidInput("J Hessian is not symmetric".into()));
        }
        Ok(QuadraticProblem { h: sym(&h), g, a, b })
    }
}

impl FiniteProblem for QuadraticProblem {
    fn dim_w(&self) -> usize {
        self.h.nrows()
    }
    fn m(&self) -> usize {
        self.a.nrows()
    }
    fn j(&self, w: &Vec64) -> f64 {
        0.5 * w.dot(&(&self.h * w)) + self.g.dot(w)
    }
    fn j_grad(&self, w: &Vec64) -> Vec64 {
        &self.h * w + &self.g
    }
    fn j_hess(&self, _: &Vec64) -> Mat {
        self.h.clone()
    }
    fn phi(&self, w: &Vec64) -> Vec64 {
        &self.a * w + &self.b
    }
    fn phi_jac(&self, _: &Vec64) -> Mat {
        self.a.clone()
    }
    fn phi_hess(&self, _: &Vec64) -> Vec<Mat> {
        let d = self.dim_w();
        vec![Mat::zeros(d, d); self.m()]
    }
}

type ScalarFn = dyn Fn(&Vec64) -> f64 + Send + Sync;
type VectorFn = dyn Fn(&Vec64) -> Vec64 + Send + Sync;
type MatrixFn = dyn Fn(&Vec64) -> Mat + Send + Sync;
type MatricesFn = dyn Fn(&Vec64) -> Vec<Mat> + Send + Sync;

/// Problem given by closures. Second derivatives may be omitted, in which case
/// they are central differences of the first derivatives.
#[derive(Clone)]
pub struct FnProblem {
    dim_w: usize,
    m: usize,
    j: Arc<ScalarFn>,
    j_grad: Arc<VectorFn>,
    j_hess: Option<Arc<MatrixFn>>,
    phi: Arc<VectorFn>,
    phi_jac: Arc<MatrixFn>,
    phi_hess: Option<Arc<MatricesFn>>,
}

impl FnProblem {
    pub fn new(
        dim_w: usize,
        m: usize,
        j: impl Fn(&Vec64) -> f64 + Send + Sync + 'static,
        j_grad: impl Fn(&Vec64) -> Vec64 + Send + Sync + 'static,
        phi: impl Fn(&Vec64) -> Vec64 + Send + Sync + 'static,
        phi_jac: impl Fn(&Vec64) -> Mat + Send + Sync + 'static,
    ) -> Self {
        FnProblem {
            dim_w,
            m,
            j: Arc::new(j),
            j_grad: Arc::new(j_grad),
            j_hess: None,
            phi: Arc::new(phi),
            phi_jac: Arc::new(phi_jac),
            phi_hess: None,
        }
    }

    pub fn with_hessians(
        mut self,
        j_hess: impl Fn(&Vec64) -> Mat + Send + Sync + 'static,
        phi_hess: impl Fn(&Vec64) -> Vec<Mat> + Send + Sync + 'static,
    ) -> Self {
        self.j_hess = Some(Arc::new(j_hess));
        self.phi_hess = Some(Arc::new(phi_hess));
        self
    }

    fn fd_step(w: &Vec64) -> f64 {
        FD_RELATIVE_STEP * w.amax().max(1.0)
    }

    /// Central-difference Jacobian of a vector field, symmetrized by the caller.
    fn fd_jacobian(f: &VectorFn, w: &Vec64) -> Mat {
        let h = Self::fd_step(w);
        let d = w.len();
        let cols: Vec<Vec64> = (0..d)
            .map(|i| {
                let mut p = w.clone();
                let mut q = w.clone();
                p[i] += h;
                q[i] -= h;
                (f(&p) - f(&q)) / (2.0 * h)
            })
            .collect();
        Mat::from_columns(&cols)
    }
}

impl FiniteProblem for FnProblem {
    fn dim_w(&self) -> usize {
        self.dim_w
    }
    fn m(&self) -> usize {
        self.m
    }
    fn j(&self, w: &Vec64) -> f64 {
        (self.j)(w)
    }
    fn j_grad(&self, w: &Vec64) -> Vec64 {
        (self.j_grad)(w)
    }
    fn j_hess(&self, w: &Vec64) -> Mat {
        match &self.j_hess {
            Some(f) => f(w),
            None => sym(&Self::fd_jacobian(self.j_grad.as_ref(), w)),
        }
    }
    fn phi(&self, w: &Vec64) -> Vec64 {
        (self.phi)(w)
    }
    fn phi_jac(&self, w: &Vec64) -> Mat {
        (self.phi_jac)(w)
    }
    fn phi_hess(&self, w: &Vec64) -> Vec<Mat> {
        match &self.phi_hess {
            Some(f) => f(w),
            None => (0..self.m)
                .map(|k| {
                    let jac = self.phi_jac.clone();
                    let row = move |v: &Vec64| jac(v).row(k).transpose();
                    sym(&Self::fd_jacobian(&row, w))
                })
                .collect(),
        }
    }
    fn uses_finite_differences(&self) -> bool {
        self.j_hess.is_none() || self.phi_hess.is_none()
    }
}

/// `(ζ, w)` with `ζ DΦ(w) = dJ(w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianPoint {
    pub w: Vec64,
    pub zeta: Vec64,
}

impl LagrangianPoint {
    /// `‖ζ DΦ − dJ‖`.
    pub fn residual(&self, p: &dyn FiniteProblem) -> f64 {
        stationarity(p, &self.w, &self.zeta).norm()
    }
}

fn stationarity(p: &dyn FiniteProblem, w: &Vec64, zeta: &Vec64) -> Vec64 {
    p.phi_jac(w).transpose() * zeta - p.j_grad(w)
}

fn second_variation(p: &dyn FiniteProblem, w: &Vec64, zeta: &Vec64) -> Mat {
    let mut q = p.j_hess(w);
    for (k, h) in p.phi_hess(w).iter().enumerate() {
        q -= h * zeta[k];
    }
    q
}

/// Damped Newton on `ζ DΦ(w) − dJ(w) = 0`, `Φ(w) = z`.
pub fn refine_lagrangian_point(
    p: &dyn FiniteProblem,
    guess: &LagrangianPoint,
    z: &Vec64,
) -> Result<LagrangianPoint> {
    let (d, m) = (p.dim_w(), p.m());
    if guess.w.len() != d || guess.zeta.len() != m || z.len() != m {
        return Err(Error::InvalidInput("Lagrangian point dimensions do not match the problem".into()));
    }
    let residual = |w: &Vec64, zeta: &Vec64| -> Vec64 {
        let mut r = Vec64::zeros(d + m);
        r.rows_mut(0, d).copy_from(&stationarity(p, w, zeta));
        r.rows_mut(d, m).copy_from(&(p.phi(w) - z));
        r
    };
    let (mut w, mut zeta) = (guess.w.clone(), guess.zeta.clone());
    let mut r = residual(&w, &zeta);
    for _ in 0..100 {
        if r.norm() <= NEWTON_TOL {
            return Ok(LagrangianPoint { w, zeta });
        }
        let a = p.phi_jac(&w);
        let q = second_variation(p, &w, &zeta);
        let mut jac = Mat::zeros(d + m, d + m);
        jac.view_mut((0, 0), (d, d)).copy_from(&(-q));
        jac.view_mut((0, d), (d, m)).copy_from(&a.transpose());
        jac.view_mut((d, 0), (m, d)).copy_from(&a);
        let step = jac.svd(true, true).solve(&(-&r), 1e-14).map_err(|_| Error::NewtonFailure(r.norm()))?;
        let mut lambda = 1.0;
        loop {
            let wn = &w + step.rows(0, d) * lambda;
            let zn = &zeta + step.rows(d, m) * lambda;
            let rn = residual(&wn, &zn);
            if rn.norm() < r.norm() || lambda < 1e-8 {
                w = wn;
                zeta = zn;
                r = rn;
                break;
            }
            lambda *= 0.5;
        }
    }
    if r.norm() <= NEWTON_TOL {
        Ok(LagrangianPoint { w, zeta })
    } else {
        Err(Error::NewtonFailure(r.norm()))
    }
}

/// `A = DΦ(w)` and `Q = D²J(w) − ζ D²Φ(w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LDerivData {
    pub a: Mat,
    pub q: Mat,
    /// Set when `Q` came from finite differences.
    pub finite_differences: bool,
}

impl LDerivData {
    pub fn new(a: Mat, q: Mat) -> Result<Self> {
        if q.nrows() != q.ncols() || a.ncols() != q.nrows() {
            return Err(Error::InvalidInput("A must be m×dimW and Q dimW×dimW".into()));
        }
        if asymmetry(&q) > SYMMETRY_TOL * spectral_norm(&q).max(1.0) {
            return Err(Error::InvalidInput("Q is not symmetric".into()));
        }
        Ok(LDerivData { a, q: sym(&q), finite_differences: false })
    }

    pub fn from_point(p: &dyn FiniteProblem, lp: &LagrangianPoint) -> Result<Self> {
        let mut d = LDerivData::new(p.phi_jac(&lp.w), second_variation(p, &lp.w, &lp.zeta))?;
        d.finite_differences = p.uses_finite_differences();
        Ok(d)
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn dim_w(&self) -> usize {
        self.a.ncols()
    }

    fn check_full_rank(&self) -> Result<()> {
        if rank(&self.a, RANK_TOL) < self.m() {
            return Err(Error::RankDrop);
        }
        Ok(())
    }

    /// `Q` restricted to an orthonormal basis of `ker A`.
    pub fn restricted_hessian(&self) -> Result<QuadraticForm> {
        self.check_full_rank()?;
        let k = nullspace(&self.a, RANK_TOL);
        Ok(QuadraticForm::from_symmetric_part(&(k.transpose() * &self.q * &k)))
    }

    /// `(ind Q, ind Q|ker A, ind A Q⁻¹ Aᵀ)` for nondegenerate `Q`.
    pub fn index_split(&self) -> Result<(usize, usize, usize)> {
        let qinv = self.q.clone().try_inverse().ok_or(Error::InvalidInput("Q is singular".into()))?;
        let hess = self.restricted_hessian()?;
        let tol = NONDEGENERACY_TOL;
        Ok((
            matrix_inertia(&self.q, tol).neg,
            hess.inertia(tol).neg,
            matrix_inertia(&sym(&(&self.a * qinv * self.a.transpose())), tol).neg,
        ))
    }
}

/// `Hess_w(J|Φ⁻¹(z)) = (D²J − ζD²Φ)|ker DΦ`.
pub fn hessian_on_kernel(p: &dyn FiniteProblem, lp: &LagrangianPoint) -> Result<QuadraticForm> {
    let scale = p.j_grad(&lp.w).norm().max(1.0);
    let res = lp.residual(p);
    if res > 1e3 * NEWTON_TOL * scale {
        return Err(Error::InvalidInput(format!("not a Lagrangian point (residual {res:.3e})")));
    }
    LDerivData::from_point(p, lp)?.restricted_hessian()
}

/// Frame of `Λ(A, Q)` in `standard_space(m)`.
///
/// `DimensionDefect` reports the dimension of the solution space of `ζA + Q(v, ·) = 0`
/// when it is not `m` (so `ker A ∩ ker Q ≠ 0`), or the rank of its image when that falls short.
pub fn l_derivative(d: &LDerivData) -> Result<LagrangianFrame> {
    let (m, dw) = (d.m(), d.dim_w());
    // Kernel of [Aᵀ | Q] in the variables (ζ, v).
    let kernel = nullspace(&hstack(&d.a.transpose(), &d.q), RANK_TOL);
    // Extra kernel directions come from ker A ∩ ker Q.
    if kernel.ncols() != m {
        return Err(Error::DimensionDefect { expected: m, found: kernel.ncols() });
    }
    let mut lift = Mat::zeros(2 * m, m + dw);
    lift.view_mut((0, 0), (m, m)).copy_from(&Mat::identity(m, m));
    lift.view_mut((m, m), (m, dw)).copy_from(&d.a);
    let image = lift * kernel;
    let found = if image.ncols() == 0 { 0 } else { rank(&image, RANK_TOL) };
    if found != m {
        return Err(Error::DimensionDefect { expected: m, found });
    }
    LagrangianFrame::new(&standard_space(m), image)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiberTransversality {
    pub hessian_nondegenerate: bool,
    pub transversal_to_fiber: bool,
}

/// Nondegeneracy of the restricted Hessian and transversality of `Λ(A, Q)` to the fiber.
pub fn check_fiber_transversality(d: &LDerivData) -> Result<FiberTransversality> {
    let hess = d.restricted_hessian()?;
    let frame = l_derivative(d)?;
    let fiber = frame.space().vertical();
    let eigs = hess.eigenvalues();
    let scale = d.q.amax().max(1.0);
    Ok(FiberTransversality {
        hessian_nondegenerate: eigs.iter().all(|v| v.abs() > NONDEGENERACY_TOL * scale),
        transversal_to_fiber: transversality(frame.columns(), fiber.columns()) > NONDEGENERACY_TOL,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyIndexReport {
    /// `μ(Λ(·))` with respect to the fiber.
    pub maslov: i64,
    /// `ind Hess(τ0) − ind Hess(τ1)`.
    pub hessian_delta: i64,
    pub subdivision: Vec<f64>,
}

impl FamilyIndexReport {
    pub fn agrees(&self) -> bool {
        self.maslov == self.hessian_delta
    }
}

/// Intervals of the family grid satisfy `(b − a)·L ≤ FAMILY_STEP_FRACTION · min σ`, with `σ`
/// the smallest singular value of `[A; Q]` at the endpoints and `L` its Lipschitz bound.
const FAMILY_STEP_FRACTION: f64 = 0.1;
const FAMILY_COARSE_INTERVALS: usize = 200;
const FAMILY_MAX_POINTS: usize = 200_000;

fn stacked(d: &LDerivData) -> Mat {
    crate::linalg::vstack(&d.a, &d.q)
}

/// `σ_min([A; Q])`: zero exactly when `ker A ∩ ker Q ≠ 0`.
fn family_conditioning(d: &LDerivData) -> f64 {
    crate::linalg::min_singular_value(&stacked(d))
}

/// Grid for the family curve, refined where `Λ(A_τ, Q_τ)` can turn quickly.
///
/// `σ_min([A; Q])` is 1-Lipschitz in `[A; Q]`, so an interval meeting the step rule cannot
/// hide a dip of `σ`. Near such dips `Λ` turns at a rate of order `L/σ`.
fn family_grid(family: &(dyn Fn(f64) -> Result<LDerivData> + Send + Sync), tau0: f64, tau1: f64) -> Result<Vec<f64>> {
    let coarse: Vec<f64> = (0..=FAMILY_COARSE_INTERVALS)
        .map(|i| if i == FAMILY_COARSE_INTERVALS { tau1 } else { tau0 + (tau1 - tau0) * i as f64 / FAMILY_COARSE_INTERVALS as f64 })
        .collect();
    let data = coarse.iter().map(|&t| family(t)).collect::<Result<Vec<_>>>()?;
    let lipschitz = 2.0
        * coarse
            .windows(2)
            .zip(data.windows(2))
            .map(|(t, d)| spectral_norm(&(stacked(&d[1]) - stacked(&d[0]))) / (t[1] - t[0]))
            .fold(0.0, f64::max);
    let sigma = |t: f64| family(t).map(|d| family_conditioning(&d));
    let mut grid = vec![tau0];
    for (w, d) in coarse.windows(2).zip(data.windows(2)) {
        let mut stack = vec![(w[0], w[1], family_conditioning(&d[0]), family_conditioning(&d[1]))];
        while let Some((a, b, sa, sb)) = stack.pop() {
            let floor = sa.min(sb);
            if (b - a) * lipschitz <= FAMILY_STEP_FRACTION * floor {
                grid.push(b);
                continue;
            }
            let mid = 0.5 * (a + b);
            if floor <= 1e-12 * (1.0 + lipschitz) || !(mid > a && mid < b) || grid.len() + stack.len() > FAMILY_MAX_POINTS {
                return Err(Error::DimensionDefect { expected: d[0].m(), found: d[0].m() + 1 });
            }
            let sm = sigma(mid)?;
            stack.push((mid, b, sm, sb));
            stack.push((a, mid, sa, sm));
        }
    }
    Ok(grid)
}

/// Maslov index of `τ ↦ Λ(A_τ, Q_τ)` over `[τ0, τ1]`, alongside the Hessian index change.
///
/// The curve grid is refined adaptively where `ker A ∩ ker Q` nearly meets, since `Λ`
/// can sweep through the fiber there faster than a uniform grid resolves.
pub fn family_index_delta(
    family: impl Fn(f64) -> Result<LDerivData> + Send + Sync + 'static,
    tau0: f64,
    tau1: f64,
) -> Result<FamilyIndexReport> {
    let d0 = family(tau0)?;
    let d1 = family(tau1)?;
    let m = d0.m();
    let mut inds = [0i64; 2];
    for (k, (d, tau)) in [(&d0, tau0), (&d1, tau1)].into_iter().enumerate() {
        let inertia = d.restricted_hessian()?.inertia(NONDEGENERACY_TOL);
        if inertia.zero > 0 {
            return Err(Error::EndpointDegenerate(tau));
        }
        inds[k] = inertia.neg as i64;
    }
    let family = Arc::new(family);
    let grid = family_grid(family.as_ref(), tau0, tau1)?;
    let space = standard_space(m);
    let eval = Arc::clone(&family);
    let curve = GrassmannCurve::new(&space, (tau0, tau1), move |t| Ok(l_derivative(&eval(t)?)?.columns().clone()))?;
    let curve = curve.with_grid(grid)?;
    let opts = MaslovOptions { skip_pair_check: true, ..MaslovOptions::default() };
    let report = maslov_index_with(&curve, &space.vertical(), &opts)?;
    Ok(FamilyIndexReport { maslov: report.value, hessian_delta: inds[0] - inds[1], subdivision: report.subdivision })
}

/// Discretized action `Σ (y_{k+1} − y_k)²/(2h) − h y_k²/2` with `y_0 = 0` and
/// `Φ = y_N`, `h = horizon/N`; its Hessian index counts oscillator conjugate times.
pub fn discrete_oscillator(horizon: f64, steps: usize) -> QuadraticProblem {
    let h = horizon / steps as f64;
    let mut hess = Mat::zeros(steps, steps);
    // Variables y_1 … y_N.
    for k in 0..steps {
        hess[(k, k)] += 1.0 / h;
        if k + 1 < steps {
            hess[(k, k)] += 1.0 / h - h;
            hess[(k, k + 1)] -= 1.0 / h;
            hess[(k + 1, k)] -= 1.0 / h;
        }
    }
    let mut a = Mat::zeros(1, steps);
    a[(0, steps - 1)] = 1.0;
    QuadraticProblem::new(hess, Vec64::zeros(steps), a, Vec64::zeros(1)).expect("consistent by construction")
}
