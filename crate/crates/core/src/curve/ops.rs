use std::sync::Arc;

use nalgebra::Complex;

use crate::linalg::{coefficients, spectral_norm, sym, Mat};
use crate::symplectic::{matrix_inertia, projector, AsFrame, LagrangianFrame, QuadraticForm};
use crate::{Error, Result};

use super::local::{centered_chart, chart_matrix, first_derivative, frames_around, jet, Jet, STENCIL_HALF_WIDTH};
use super::GrassmannCurve;

/// `‖Ṡ⁻¹‖` above this declares the curve non-regular.
pub const REGULARITY_CAP: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct VelocityForm {
    pub at: f64,
    pub form: QuadraticForm,
    /// Columns are the vectors of `Λ(t)` the form's variables refer to.
    pub basis: Mat,
}

#[derive(Debug, Clone)]
pub struct CurvatureForm {
    pub at: f64,
    pub form: QuadraticForm,
    pub basis: Mat,
    /// `+1` for increasing curves, `−1` for decreasing ones; the inner product is `sign · Λ̇`.
    pub sign: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Curvature,
    CrossRatio,
    TransportGenerator,
}

/// Linear operator on a subspace, stored as a matrix in a recorded basis.
#[derive(Debug, Clone)]
pub struct CurveOperator {
    pub at: f64,
    pub matrix: Mat,
    pub basis: Mat,
    pub kind: OperatorKind,
}

impl CurveOperator {
    /// Matrix of the same operator in another basis of the same subspace.
    pub fn matrix_in(&self, basis: &Mat) -> Result<Mat> {
        let t = coefficients(&self.basis, basis);
        let tinv = t.clone().try_inverse().ok_or(Error::RankDeficient)?;
        Ok(tinv * &self.matrix * t)
    }

    pub fn eigenvalues(&self) -> Vec<Complex<f64>> {
        self.matrix.complex_eigenvalues().iter().copied().collect()
    }

    /// Real parts of the eigenvalues, sorted.
    pub fn real_spectrum(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.eigenvalues().iter().map(|z| z.re).collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v
    }

    pub fn max_imaginary(&self) -> f64 {
        self.eigenvalues().iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

pub(crate) fn regular_inverse(sdot: &Mat, t: f64) -> Result<Mat> {
    let inv = sdot.clone().try_inverse().ok_or(Error::NotRegular(t))?;
    if !inv.iter().all(|v| v.is_finite()) || spectral_norm(&inv) > REGULARITY_CAP {
        return Err(Error::NotRegular(t));
    }
    Ok(inv)
}

/// `½ Ṡ⁻¹ S⃛ − ¾ (Ṡ⁻¹ S̈)²` for a jet in any chart.
pub fn curvature_matrix_in_chart(j: &Jet) -> Result<Mat> {
    let inv = regular_inverse(&j.s1, j.t)?;
    let b = &inv * &j.s2;
    Ok(&inv * &j.s3 * 0.5 - &b * &b * 0.75)
}

pub fn velocity_form(c: &GrassmannCurve, t: f64) -> Result<VelocityForm> {
    let j = jet(c, t)?;
    Ok(VelocityForm { at: t, form: QuadraticForm::from_symmetric_part(&j.s1), basis: j.basis() })
}

pub fn curvature(c: &GrassmannCurve, t: f64) -> Result<CurveOperator> {
    let j = jet(c, t)?;
    curvature_from_jet(&j)
}

pub(crate) fn curvature_from_jet(j: &Jet) -> Result<CurveOperator> {
    Ok(CurveOperator {
        at: j.t,
        matrix: curvature_matrix_in_chart(j)?,
        basis: j.basis(),
        kind: OperatorKind::Curvature,
    })
}

/// Sign of a definite velocity matrix, or `NotMonotone`.
pub(crate) fn monotone_sign(sdot: &Mat, rank_tol: f64) -> Result<f64> {
    let inertia = matrix_inertia(sdot, rank_tol);
    if inertia.is_positive_definite() {
        Ok(1.0)
    } else if inertia.is_negative_definite() {
        Ok(-1.0)
    } else {
        Err(Error::NotMonotone)
    }
}

/// `r(x) = ⟨R x, x⟩` with the definite inner product `±Λ̇`.
pub fn curvature_form(c: &GrassmannCurve, t: f64) -> Result<CurvatureForm> {
    let j = jet(c, t)?;
    let sign = monotone_sign(&j.s1, c.space().rank_tol())?;
    let inv = regular_inverse(&j.s1, t)?;
    let m = &j.s3 * 0.5 - &j.s2 * &inv * &j.s2 * 0.75;
    Ok(CurvatureForm { at: t, form: QuadraticForm::from_symmetric_part(&(m * sign)), basis: j.basis(), sign })
}

pub(crate) fn derivative_frame_from_jet(j: &Jet) -> Result<LagrangianFrame> {
    let inv = regular_inverse(&j.s1, j.t)?;
    let a = sym(&(&inv * &j.s2 * &inv * -0.5));
    let n = a.nrows();
    let cols = j.chart.e() * &a + j.chart.f() * (Mat::identity(n, n) + &j.s * &a);
    LagrangianFrame::new(j.chart.space(), cols)
}

/// Derivative curve `v°(t) = {(A y, y + S A y)}`, `A = −½ Ṡ⁻¹ S̈ Ṡ⁻¹`.
pub fn derivative_curve(c: &GrassmannCurve, t: f64) -> Result<LagrangianFrame> {
    derivative_frame_from_jet(&jet(c, t)?)
}

/// The derivative curve as a curve in its own right.
pub fn derivative_curve_path(c: &GrassmannCurve) -> Result<GrassmannCurve> {
    let base = c.clone();
    GrassmannCurve::new(c.space(), c.domain(), move |t| derivative_curve(&base, t).map(|f| f.columns().clone()))?
        .with_fd_step(c.fd_step())?
        .with_grid(c.grid().to_vec())
}

/// `π_{v0v1} π_{v2v3}` restricted to `v1`, in the basis given by `v1`'s frame.
pub fn cross_ratio(
    v0: &impl AsFrame,
    v1: &impl AsFrame,
    v2: &impl AsFrame,
    v3: &impl AsFrame,
) -> Result<CurveOperator> {
    let p01 = projector(v0, v1)?;
    let p23 = projector(v2, v3)?;
    let z1 = v1.columns();
    let image = p01 * p23 * z1;
    Ok(CurveOperator { at: 0.0, matrix: coefficients(z1, &image), basis: z1.clone(), kind: OperatorKind::CrossRatio })
}

/// `[ξ₀, ξ₁] = S₀₁⁻¹ Ṡ₀ S₀₁⁻¹ Ṡ₁` for the velocities `ξ₀ = ċ₀(t₀)`, `ξ₁ = ċ₁(t₁)`.
pub fn infinitesimal_cross_ratio(
    c0: &GrassmannCurve,
    t0: f64,
    c1: &GrassmannCurve,
    t1: f64,
) -> Result<CurveOperator> {
    let f0 = frames_around(c0, t0, STENCIL_HALF_WIDTH)?;
    let f1 = frames_around(c1, t1, STENCIL_HALF_WIDTH)?;
    let center = &f1[STENCIL_HALF_WIDTH];
    let sep = crate::symplectic::transversality(f0[STENCIL_HALF_WIDTH].columns(), center.columns());
    if sep <= c1.space().rank_tol() {
        return Err(Error::NotTransversal(sep));
    }
    let others: Vec<LagrangianFrame> = f0
        .iter()
        .chain(f1.iter().enumerate().filter(|(i, _)| *i != STENCIL_HALF_WIDTH).map(|(_, f)| f))
        .cloned()
        .collect();
    let chart = centered_chart(center, &others, t1)?;
    let s0: Vec<Mat> = f0.iter().map(|f| chart_matrix(&chart, f, t0)).collect::<Result<_>>()?;
    let s1: Vec<Mat> = f1.iter().map(|f| chart_matrix(&chart, f, t1)).collect::<Result<_>>()?;
    let d0 = first_derivative(&s0, c0.fd_step());
    let d1 = first_derivative(&s1, c1.fd_step());
    let s01 = &s0[STENCIL_HALF_WIDTH] - &s1[STENCIL_HALF_WIDTH];
    let inv = s01.try_inverse().ok_or(Error::NotTransversal(sep))?;
    let matrix = &inv * d0 * &inv * d1;
    Ok(CurveOperator {
        at: t1,
        matrix,
        basis: chart.graph_basis(&s1[STENCIL_HALF_WIDTH]),
        kind: OperatorKind::CrossRatio,
    })
}

type PhiFn = dyn Fn(f64) -> [f64; 4] + Send + Sync;

/// Scalar change of parameter `φ` with its first three derivatives.
#[derive(Clone)]
pub struct Reparametrization {
    phi: Arc<PhiFn>,
}

impl Reparametrization {
    /// `f(t)` must return `[φ, φ̇, φ̈, φ⃛]`.
    pub fn new(f: impl Fn(f64) -> [f64; 4] + Send + Sync + 'static) -> Self {
        Reparametrization { phi: Arc::new(f) }
    }

    pub fn identity() -> Self {
        Self::affine(1.0, 0.0)
    }

    pub fn affine(a: f64, b: f64) -> Self {
        Self::new(move |t| [a * t + b, a, 0.0, 0.0])
    }

    /// `c₀ + c₁t + c₂t² + c₃t³`.
    pub fn cubic(c: [f64; 4]) -> Self {
        Self::new(move |t| {
            [
                c[0] + t * (c[1] + t * (c[2] + t * c[3])),
                c[1] + t * (2.0 * c[2] + 3.0 * c[3] * t),
                2.0 * c[2] + 6.0 * c[3] * t,
                6.0 * c[3],
            ]
        })
    }

    /// `φ(t) = (arctan(√c t) + π/2)/√c + shift`, mapping ℝ onto an interval of length `π/√c`.
    pub fn arctan(c: f64, shift: f64) -> Self {
        let r = c.sqrt();
        Self::new(move |t| {
            let q = 1.0 + c * t * t;
            [
                ((r * t).atan() + std::f64::consts::FRAC_PI_2) / r + shift,
                1.0 / q,
                -2.0 * c * t / (q * q),
                (6.0 * c * c * t * t - 2.0 * c) / (q * q * q),
            ]
        })
    }

    pub fn eval(&self, t: f64) -> [f64; 4] {
        (self.phi)(t)
    }

    /// `R_φ = φ⃛/(2φ̇) − ¾ (φ̈/φ̇)²`.
    pub fn schwartzian(&self, t: f64) -> f64 {
        let [_, d1, d2, d3] = self.eval(t);
        d3 / (2.0 * d1) - 0.75 * (d2 / d1).powi(2)
    }
}

/// The curve `t ↦ c(φ(t))` on `domain`.
pub fn reparametrize(c: &GrassmannCurve, phi: &Reparametrization, domain: (f64, f64)) -> Result<GrassmannCurve> {
    let curve = GrassmannCurve::new(c.space(), domain, {
        let base = c.clone();
        let phi = phi.clone();
        move |t| base.raw(phi.eval(t)[0])
    })?;
    if curve.grid().iter().any(|&t| phi.eval(t)[1] == 0.0) {
        return Err(Error::InvalidInput("reparametrization has a critical point".into()));
    }
    Ok(curve)
}
