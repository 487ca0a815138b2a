use crate::curve::{monotonicity, Monotonicity};
use crate::hamiltonian::{flow, jacobi_curve, monotonicity_test, HamiltonianSystem, LegendreReport};
use crate::linalg::Vec64;
use crate::maslov::{conjugate_points, maslov_index, morse_index_regular_extremal, ConjugatePoint};
use crate::{Error, Result};

/// Default trim as a fraction of the first conjugate time (or of the horizon).
pub const DEFAULT_TRIM_FRACTION: f64 = 1e-2;

#[derive(Debug, Clone)]
pub struct MorseReport {
    pub index: usize,
    pub conjugate_points: Vec<ConjugatePoint>,
    pub legendre: LegendreReport,
    pub trim: f64,
    /// `μ_{Λ(0)}` of the Jacobi curve on `[trim, horizon]`.
    pub trimmed_maslov: i64,
    pub monotone: Monotonicity,
}

impl MorseReport {
    /// Index recovered from the trimmed Maslov index, with the curve's orientation.
    pub fn index_from_maslov(&self) -> i64 {
        match self.monotone {
            Monotonicity::Increasing => self.trimmed_maslov,
            _ => -self.trimmed_maslov,
        }
    }

    pub fn agrees(&self) -> bool {
        self.index_from_maslov() == self.index as i64
    }
}

/// Morse index of the extremal through `z0` on `[0, horizon]` by conjugate counting,
/// with the Maslov-index count on `[trim, horizon]` as a cross-check.
pub fn morse_pipeline(
    sys: &HamiltonianSystem,
    z0: &Vec64,
    horizon: f64,
    step: f64,
    trim: Option<f64>,
) -> Result<MorseReport> {
    let traj = flow(sys, z0, horizon, step)?;
    let legendre = monotonicity_test(sys, &traj);
    if !legendre.uniform() {
        return Err(Error::NotMonotone);
    }
    let jc = jacobi_curve(sys, z0, horizon, step)?;
    let index = morse_index_regular_extremal(&jc)?;
    let pi = jc.frame(0.0)?;
    let conjugate_points = conjugate_points(&jc, &pi)?;
    let limit = conjugate_points.first().map_or(horizon, |p| p.t);
    let trim = match trim {
        Some(t) if t > 0.0 && t < limit => t,
        Some(t) => {
            return Err(Error::InvalidInput(format!("trim {t} must lie in (0, {limit})")));
        }
        None => DEFAULT_TRIM_FRACTION * limit,
    };
    let trimmed = jc.restrict(trim, horizon)?;
    let trimmed_maslov = maslov_index(&trimmed, &pi)?.value;
    let monotone = monotonicity(&jc)?;
    Ok(MorseReport { index, conjugate_points, legendre, trim, trimmed_maslov, monotone })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::hamiltonian::{phase_point, Polynomial};

    #[test]
    fn free_particle_has_index_zero() {
        for horizon in [0.5, 3.0, 10.0] {
            let r = morse_pipeline(&HamiltonianSystem::free_particle(2), &phase_point(&[1.0, 0.0], &[0.0, 0.0]), horizon, 1e-2, None)
                .unwrap();
            assert_eq!(r.index, 0);
            assert!(r.agrees());
        }
    }

    #[test]
    fn oscillator_index_and_trim_stability() {
        let sys = HamiltonianSystem::oscillator(1);
        let z0 = phase_point(&[0.5], &[0.0]);
        let r = morse_pipeline(&sys, &z0, 2.5 * PI, 1e-3, None).unwrap();
        assert_eq!(r.index, 2);
        assert!(r.agrees());
        for trim in [0.02, 0.2, 2.0] {
            assert_eq!(morse_pipeline(&sys, &z0, 2.5 * PI, 1e-3, Some(trim)).unwrap().trimmed_maslov, r.trimmed_maslov);
        }
        assert!(morse_pipeline(&sys, &z0, 2.5 * PI, 1e-3, Some(4.0)).is_err());
    }

    #[test]
    fn degenerate_and_non_legendre_cases() {
        let sys = HamiltonianSystem::oscillator(1);
        assert_eq!(
            morse_pipeline(&sys, &phase_point(&[0.5], &[0.0]), PI, 1e-3, None).unwrap_err(),
            Error::DegenerateEndpoint(1)
        );
        let saddle = HamiltonianSystem::polynomial(2, Polynomial::new(4, vec![(1.0, vec![1, 1, 0, 0])]).unwrap()).unwrap();
        assert_eq!(
            morse_pipeline(&saddle, &phase_point(&[1.0, 1.0], &[0.0, 0.0]), 1.0, 1e-2, None).unwrap_err(),
            Error::NotMonotone
        );
    }
}
