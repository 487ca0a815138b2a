use std::collections::HashMap;

use crate::linalg::{block2, coefficients, inverse_sqrt_spd, sym, Mat};
use crate::symplectic::{projector, LagrangianFrame};
use crate::{Error, Result};

use super::local::{frames_around, jet_from_frames, STENCIL_HALF_WIDTH};
use super::ops::{curvature_matrix_in_chart, derivative_frame_from_jet, monotone_sign};
use super::GrassmannCurve;

/// Generator `[[0, −I], [A, 0]]` of the structural system `ẋ = −y, ẏ = A x`.
fn generator(a: &Mat) -> Mat {
    let n = a.nrows();
    block2(&Mat::zeros(n, n), &(-Mat::identity(n, n)), a, &Mat::zeros(n, n))
}

/// `Γ(t1, t0)` for `∂Γ/∂t = [[0, −I], [A(t), 0]] Γ`, classical RK4 with `steps` steps.
pub fn structural_fundamental_matrix(
    a: impl Fn(f64) -> Result<Mat>,
    n: usize,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<Mat> {
    let steps = steps.max(1);
    let h = (t1 - t0) / steps as f64;
    let mut g = Mat::identity(2 * n, 2 * n);
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let ga = generator(&a(t)?);
        let gm = generator(&a(t + 0.5 * h)?);
        let gb = generator(&a(t + h)?);
        let k1 = &ga * &g;
        let k2 = &gm * (&g + &k1 * (0.5 * h));
        let k3 = &gm * (&g + &k2 * (0.5 * h));
        let k4 = &gb * (&g + &k3 * h);
        g += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    Ok(g)
}

/// Local data needed to move a frame along the curve at one time.
struct Sample {
    frame: Mat,
    /// `π_{Λ Λ°} Ṗ`: maps `e ∈ Λ(t)` to `ė ∈ Λ°(t)`.
    generator: Mat,
    curvature: Mat,
    curvature_basis: Mat,
}

fn sample(c: &GrassmannCurve, t: f64) -> Result<Sample> {
    let frames = frames_around(c, t, STENCIL_HALF_WIDTH)?;
    let j = jet_from_frames(&frames, t, c.fd_step())?;
    let dual: LagrangianFrame = derivative_frame_from_jet(&j)?;
    let center = &frames[STENCIL_HALF_WIDTH];
    let proj = projector(center, &dual)?;
    let p: Vec<Mat> = frames.iter().map(|f| f.columns() * f.columns().transpose()).collect();
    let pdot = super::local::first_derivative(&p, c.fd_step());
    Ok(Sample {
        frame: center.columns().clone(),
        generator: proj * pdot,
        curvature: curvature_matrix_in_chart(&j)?,
        curvature_basis: j.basis(),
    })
}

/// Structural transport `Γ(t1, t0)` of a regular monotone curve.
///
/// A velocity-orthonormal frame `e(t) ⊂ Λ(t)` with `ė(t) ∈ Λ°(t)` is carried along the
/// curve; `A(t)` is the curvature operator in that frame and `Γ` solves
/// `∂Γ/∂t = [[0, −I], [A(t), 0]] Γ`.
pub fn transport(c: &GrassmannCurve, t0: f64, t1: f64) -> Result<Mat> {
    let n = c.n();
    if t1 == t0 {
        return Ok(Mat::identity(2 * n, 2 * n));
    }
    let j0 = super::local::jet(c, t0)?;
    let sign = monotone_sign(&j0.s1, c.space().rank_tol())?;
    let l = inverse_sqrt_spd(&(&j0.s1 * sign)).ok_or(Error::NotMonotone)?;
    let mut e = j0.basis() * l;

    let steps = ((t1 - t0).abs() / (2.0 * c.fd_step())).ceil().max(1.0) as usize;
    let h = (t1 - t0) / steps as f64;
    let mut cache: HashMap<u64, std::rc::Rc<Sample>> = HashMap::new();
    let mut get = |t: f64| -> Result<std::rc::Rc<Sample>> {
        if let Some(s) = cache.get(&t.to_bits()) {
            return Ok(s.clone());
        }
        let s = std::rc::Rc::new(sample(c, t)?);
        if cache.len() > 8 {
            cache.clear();
        }
        cache.insert(t.to_bits(), s.clone());
        Ok(s)
    };
    let a_of = |s: &Sample, e: &Mat| -> Result<Mat> {
        let op = super::ops::CurveOperator {
            at: 0.0,
            matrix: s.curvature.clone(),
            basis: s.curvature_basis.clone(),
            kind: super::ops::OperatorKind::TransportGenerator,
        };
        // Keep e inside Λ(t) before changing basis.
        let inside = &s.frame * coefficients(&s.frame, e);
        Ok(sym(&op.matrix_in(&inside)?))
    };

    let mut g = Mat::identity(2 * n, 2 * n);
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let (sa, sm, sb) = (get(t)?, get(t + 0.5 * h)?, get(t + h)?);
        let ke1 = &sa.generator * &e;
        let kg1 = generator(&a_of(&sa, &e)?) * &g;
        let e2 = &e + &ke1 * (0.5 * h);
        let g2 = &g + &kg1 * (0.5 * h);
        let ke2 = &sm.generator * &e2;
        let kg2 = generator(&a_of(&sm, &e2)?) * &g2;
        let e3 = &e + &ke2 * (0.5 * h);
        let g3 = &g + &kg2 * (0.5 * h);
        let ke3 = &sm.generator * &e3;
        let kg3 = generator(&a_of(&sm, &e3)?) * &g3;
        let e4 = &e + &ke3 * h;
        let g4 = &g + &kg3 * h;
        let ke4 = &sb.generator * &e4;
        let kg4 = generator(&a_of(&sb, &e4)?) * &g4;
        e += (ke1 + ke2 * 2.0 + ke3 * 2.0 + ke4) * (h / 6.0);
        g += (kg1 + kg2 * 2.0 + kg3 * 2.0 + kg4) * (h / 6.0);
    }
    Ok(g)
}
