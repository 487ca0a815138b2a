use nalgebra::Complex;

use crate::curve::curvature;
use crate::hamiltonian::{curvature_operator_field, flow, reduced_jacobi_curve, HamiltonianSystem, Trajectory};
use crate::linalg::{spectral_norm, Vec64};
use crate::{Error, Result};

/// Field norms below `EQUILIBRIUM_TOL · (1 + ‖z‖)` mark an equilibrium.
pub const EQUILIBRIUM_TOL: f64 = 1e-8;
/// Curvature eigenvalues must lie below `−NEGATIVITY_MARGIN · (1 + ‖Hess‖)`.
pub const NEGATIVITY_MARGIN: f64 = 1e-6;
/// Linearization eigenvalues with `|Re λ|` at or below this are on the imaginary axis.
pub const IMAGINARY_AXIS_TOL: f64 = 1e-9;
/// Number of curve samples for the reduced check.
pub const REDUCED_SAMPLES: usize = 41;
const NEWTON_ITERS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateKind {
    ReducedFlow,
    EquilibriumSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub point: Vec64,
    /// Eigenvalues of the linearized field, sorted by real part.
    pub eigenvalues: Vec<Complex<f64>>,
    pub hyperbolic: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicityCertificate {
    pub kind: CertificateKind,
    /// Largest curvature eigenvalue seen (real parts).
    pub max_eig: f64,
    /// Smallest `|Re λ|` over equilibrium linearizations.
    pub alpha_estimate: Option<f64>,
    pub verdict: bool,
    pub diagnostics: Vec<String>,
    pub equilibria: Vec<Equilibrium>,
    pub samples: usize,
}

/// Newton iteration on `H⃗(z) = 0` started at `z`.
pub fn polish_equilibrium(sys: &HamiltonianSystem, z: &Vec64) -> Result<Vec64> {
    let mut z = z.clone();
    for _ in 0..NEWTON_ITERS {
        let f = sys.field(&z);
        if f.norm() <= 1e-14 * (1.0 + z.norm()) {
            return Ok(z);
        }
        let dz = sys.field_jacobian(&z).lu().solve(&f).ok_or(Error::NewtonFailure(f.norm()))?;
        z -= dz;
    }
    let r = sys.field(&z).norm();
    if r <= 1e-12 * (1.0 + z.norm()) {
        Ok(z)
    } else {
        Err(Error::NewtonFailure(r))
    }
}

pub fn analyze_equilibrium(sys: &HamiltonianSystem, z: &Vec64) -> Result<Equilibrium> {
    let point = polish_equilibrium(sys, z)?;
    let mut eigenvalues: Vec<Complex<f64>> = sys.field_jacobian(&point).complex_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let hyperbolic = eigenvalues.iter().all(|e| e.re.abs() > IMAGINARY_AXIS_TOL);
    Ok(Equilibrium { point, eigenvalues, hyperbolic })
}

fn equilibria_on(sys: &HamiltonianSystem, traj: &Trajectory) -> Result<Vec<Equilibrium>> {
    let mut found: Vec<Equilibrium> = Vec::new();
    for z in &traj.states {
        if sys.field(z).norm() >= EQUILIBRIUM_TOL * (1.0 + z.norm()) {
            continue;
        }
        let eq = analyze_equilibrium(sys, z)?;
        if !found.iter().any(|e| (&e.point - &eq.point).norm() <= 1e-8 * (1.0 + eq.point.norm())) {
            found.push(eq);
        }
    }
    Ok(found)
}

/// Checks that the (reduced) curvature is uniformly negative along the orbit and that
/// equilibria met on it are hyperbolic.
pub fn certify_negative_curvature(
    sys: &HamiltonianSystem,
    z0: &Vec64,
    horizon: f64,
    step: f64,
    reduced: bool,
) -> Result<HyperbolicityCertificate> {
    let traj = flow(sys, z0, horizon, step)?;
    let mut diagnostics = Vec::new();
    let mut max_eig = f64::NEG_INFINITY;
    let mut negative = true;
    let mut samples = 0;
    let mut check = |eigs: &[f64], hess_norm: f64, t: f64, diagnostics: &mut Vec<String>| {
        samples += 1;
        let top = eigs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        max_eig = max_eig.max(top);
        let margin = NEGATIVITY_MARGIN * (1.0 + hess_norm);
        if top >= -margin && negative {
            negative = false;
            diagnostics.push(format!("curvature eigenvalue {top:.6e} is not below -{margin:.3e} at t = {t:.6}"));
        }
    };
    let kind = if reduced {
        let red = reduced_jacobi_curve(sys, z0, horizon, step).map_err(|e| match e {
            Error::TangentFiber => Error::ReductionRefused("the Hamiltonian field is tangent to the fiber".into()),
            Error::TrivialQuotient => Error::ReductionRefused("the reduced space is trivial for n = 1".into()),
            other => other,
        })?;
        for k in 0..REDUCED_SAMPLES {
            let t = horizon * k as f64 / (REDUCED_SAMPLES - 1) as f64;
            let r = curvature(&red.curve, t)?;
            let z = &traj.states[((t / horizon) * (traj.states.len() - 1) as f64).round() as usize];
            check(&r.real_spectrum(), spectral_norm(&sys.hessian(z)), t, &mut diagnostics);
        }
        CertificateKind::ReducedFlow
    } else {
        for (t, z) in traj.times.iter().zip(&traj.states) {
            let r = curvature_operator_field(sys, z).map_err(|_| Error::NotRegular(*t))?;
            let eigs: Vec<f64> = r.complex_eigenvalues().iter().map(|e| e.re).collect();
            check(&eigs, spectral_norm(&sys.hessian(z)), *t, &mut diagnostics);
        }
        CertificateKind::EquilibriumSet
    };
    let equilibria = equilibria_on(sys, &traj)?;
    for e in equilibria.iter().filter(|e| !e.hyperbolic) {
        diagnostics.push(format!("equilibrium at {:?} has spectrum on the imaginary axis", e.point.as_slice()));
    }
    let alpha_estimate = equilibria
        .iter()
        .flat_map(|e| e.eigenvalues.iter().map(|l| l.re.abs()))
        .reduce(f64::min);
    let verdict = negative && equilibria.iter().all(|e| e.hyperbolic);
    Ok(HyperbolicityCertificate { kind, max_eig, alpha_estimate, verdict, diagnostics, equilibria, samples })
}

/// Least-squares rate `α` in `‖z_t‖ ≈ c e^{−αt}`.
pub fn decay_rate(traj: &Trajectory) -> f64 {
    let pts: Vec<(f64, f64)> =
        traj.times.iter().zip(&traj.states).filter(|(_, z)| z.norm() > 0.0).map(|(t, z)| (*t, z.norm().ln())).collect();
    let m = pts.len() as f64;
    let (st, sl) = pts.iter().fold((0.0, 0.0), |(a, b), (t, l)| (a + t, b + l));
    let (mt, ml) = (st / m, sl / m);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), (t, l)| (a + (t - mt) * (l - ml), b + (t - mt) * (t - mt)));
    -num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::phase_point;
    use crate::linalg::Mat;

    #[test]
    fn inverted_oscillator_equilibrium() {
        let sys = HamiltonianSystem::inverted_oscillator(2);
        let cert = certify_negative_curvature(&sys, &Vec64::zeros(4), 1.0, 1e-2, false).unwrap();
        assert!(cert.verdict, "{:?}", cert.diagnostics);
        assert_eq!(cert.equilibria.len(), 1);
        let eig = &cert.equilibria[0].eigenvalues;
        for (k, e) in eig.iter().enumerate() {
            let expected = if k < 2 { -1.0 } else { 1.0 };
            assert!((e.re - expected).abs() < 1e-8 && e.im.abs() < 1e-8);
        }
        assert!((cert.alpha_estimate.unwrap() - 1.0).abs() < 1e-8);
        assert!((cert.max_eig + 1.0).abs() < 1e-12);
    }

    #[test]
    fn positive_curvature_fails() {
        let cert = certify_negative_curvature(
            &HamiltonianSystem::oscillator(2),
            &phase_point(&[0.3, 0.0], &[1.0, 0.2]),
            2.0,
            1e-2,
            false,
        )
        .unwrap();
        assert!(!cert.verdict);
        assert!(!cert.diagnostics.is_empty());
        assert!(cert.equilibria.is_empty());
    }

    #[test]
    fn reduced_certificate_on_concave_potential() {
        let sys = HamiltonianSystem::quadratic_potential(&Mat::from_row_slice(2, 2, &[-2.0, 0.3, 0.3, -1.0]));
        let cert = certify_negative_curvature(&sys, &phase_point(&[0.5, 0.2], &[0.1, 0.3]), 1.0, 1e-3, true).unwrap();
        assert_eq!(cert.kind, CertificateKind::ReducedFlow);
        assert!(cert.verdict, "{:?}", cert);
        let refused = certify_negative_curvature(&HamiltonianSystem::inverted_oscillator(1), &phase_point(&[1.0], &[0.0]), 1.0, 1e-2, true);
        assert!(matches!(refused, Err(Error::ReductionRefused(_))));
    }

    #[test]
    fn stable_manifold_rate() {
        // K = diag(4, 1): the stable manifold is x = −√K y.
        let sys = HamiltonianSystem::quadratic_potential(&Mat::from_diagonal(&Vec64::from_vec(vec![-4.0, -1.0])));
        let z0 = phase_point(&[-2.0 * 0.3, -0.5], &[0.3, 0.5]);
        let traj = flow(&sys, &z0, 8.0, 1e-3).unwrap();
        let alpha = decay_rate(&traj);
        assert!(alpha > 0.9 && alpha < 1.3, "{alpha}");
        let z0 = phase_point(&[-0.5, -0.5], &[0.5, 0.5]);
        let one = HamiltonianSystem::inverted_oscillator(2);
        assert!((decay_rate(&flow(&one, &z0, 6.0, 1e-3).unwrap()) - 1.0).abs() < 1e-6);
    }
}
