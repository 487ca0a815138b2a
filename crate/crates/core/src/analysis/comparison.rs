use std::f64::consts::PI;

use crate::curve::GrassmannCurve;
use crate::hamiltonian::{curvature_operator_field, flow, jacobi_curve, HamiltonianSystem};
use crate::linalg::Vec64;
use crate::maslov::conjugate_points;
use crate::{Error, Result};

/// Number of window starts `k · horizon / 8` tried for the trace bound.
pub const WINDOW_STARTS: usize = 8;
/// Largest number of orbit points at which curvature is sampled.
pub const MAX_CURVATURE_SAMPLES: usize = 2001;

#[derive(Debug, Clone, PartialEq)]
pub struct WindowCheck {
    pub start: f64,
    pub length: f64,
    /// First time in `(start, start + length]` whose subspace meets `Λ(start)`.
    pub first_conjugate: Option<f64>,
}

impl WindowCheck {
    pub fn hit(&self) -> bool {
        self.first_conjugate.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// Largest curvature eigenvalue along the orbit.
    pub eig_upper: f64,
    /// Smallest `tr R / n` along the orbit.
    pub trace_lower: f64,
    /// First conjugate time to `t = 0`, or `∞`.
    pub min_gap: f64,
    /// `π/√eig_upper` when positive, else `∞`.
    pub bound_gap: f64,
    /// `π/√trace_lower` when positive, else `∞`.
    pub bound_hit: f64,
    pub step: f64,
    pub conjugate_times: Vec<f64>,
    pub windows: Vec<WindowCheck>,
}

impl ComparisonReport {
    /// `min_gap ≥ bound_gap − step`.
    pub fn gap_bound_holds(&self) -> bool {
        self.min_gap >= self.bound_gap - self.step
    }

    /// Every checked window of length `bound_hit + step` contains a conjugate time.
    pub fn hit_bound_holds(&self) -> bool {
        self.windows.iter().all(WindowCheck::hit)
    }
}

/// Curvature spectra `(max eigenvalue, min tr R / n)` of the field along an orbit.
pub fn curvature_extremes(sys: &HamiltonianSystem, z0: &Vec64, horizon: f64, step: f64) -> Result<(f64, f64)> {
    let traj = flow(sys, z0, horizon, step)?;
    let stride = traj.states.len().div_ceil(MAX_CURVATURE_SAMPLES).max(1);
    let n = sys.n() as f64;
    let (mut upper, mut trace) = (f64::NEG_INFINITY, f64::INFINITY);
    for (k, z) in traj.states.iter().enumerate() {
        if k % stride != 0 && k + 1 != traj.states.len() {
            continue;
        }
        let r = curvature_operator_field(sys, z).map_err(|e| match e {
            Error::NotRegular(_) => Error::NotRegular(traj.times[k]),
            other => other,
        })?;
        trace = trace.min(r.trace() / n);
        for ev in r.complex_eigenvalues().iter() {
            upper = upper.max(ev.re);
        }
    }
    Ok((upper, trace))
}

fn bound(c: f64) -> f64 {
    if c > 0.0 {
        PI / c.sqrt()
    } else {
        f64::INFINITY
    }
}

fn first_conjugate(jc: &GrassmannCurve, start: f64, end: f64) -> Result<Option<f64>> {
    let piece = jc.restrict(start, end)?;
    let pi = jc.frame(start)?;
    Ok(conjugate_points(&piece, &pi)?.first().map(|p| p.t))
}

/// Curvature bounds along the orbit against the conjugate times of its Jacobi curve.
pub fn comparison_check(sys: &HamiltonianSystem, z0: &Vec64, horizon: f64, step: f64) -> Result<ComparisonReport> {
    let (eig_upper, trace_lower) = curvature_extremes(sys, z0, horizon, step)?;
    let jc = jacobi_curve(sys, z0, horizon, step)?;
    let conjugate_times: Vec<f64> = conjugate_points(&jc, &jc.frame(0.0)?)?.iter().map(|p| p.t).collect();
    let min_gap = conjugate_times.first().copied().unwrap_or(f64::INFINITY);
    let bound_gap = bound(eig_upper);
    let bound_hit = bound(trace_lower);
    let mut windows = Vec::new();
    if bound_hit.is_finite() {
        let length = bound_hit + step;
        for k in 0..WINDOW_STARTS {
            let start = k as f64 * horizon / WINDOW_STARTS as f64;
            if start + length > horizon {
                break;
            }
            windows.push(WindowCheck { start, length, first_conjugate: first_conjugate(&jc, start, start + length)? });
        }
    }
    Ok(ComparisonReport { eig_upper, trace_lower, min_gap, bound_gap, bound_hit, step, conjugate_times, windows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::phase_point;
    use crate::linalg::Mat;

    #[test]
    fn isotropic_oscillator_is_sharp() {
        let step = 1e-3;
        let r = comparison_check(&HamiltonianSystem::oscillator(2), &phase_point(&[0.3, 0.1], &[1.0, 0.0]), 10.0, step)
            .unwrap();
        assert!((r.eig_upper - 1.0).abs() < 1e-9);
        assert!((r.bound_gap - PI).abs() < 1e-8);
        assert!((r.min_gap - PI).abs() <= step);
        assert!(r.gap_bound_holds() && r.hit_bound_holds());
        assert_eq!(r.conjugate_times.len(), 3);
    }

    #[test]
    fn inverted_oscillator_has_no_conjugate_points() {
        let r = comparison_check(&HamiltonianSystem::inverted_oscillator(2), &phase_point(&[0.1, 0.0], &[0.0, 0.2]), 5.0, 1e-2)
            .unwrap();
        assert!(r.conjugate_times.is_empty());
        assert_eq!(r.bound_gap, f64::INFINITY);
        assert_eq!(r.min_gap, f64::INFINITY);
        assert!(r.windows.is_empty());
    }

    #[test]
    fn anisotropic_oscillator_bounds() {
        let sys = HamiltonianSystem::quadratic_potential(&Mat::from_diagonal(&Vec64::from_vec(vec![4.0, 1.0])));
        let r = comparison_check(&sys, &phase_point(&[0.2, 0.3], &[0.5, 0.1]), 8.0, 1e-3).unwrap();
        assert!((r.bound_gap - PI / 2.0).abs() < 1e-8);
        assert!((r.bound_hit - PI / 2.5f64.sqrt()).abs() < 1e-8);
        assert!((r.min_gap - PI / 2.0).abs() < 1e-3);
        assert!(r.gap_bound_holds() && r.hit_bound_holds());
        assert!(!r.windows.is_empty());
    }
}
