use std::sync::Arc;

use jacobi_curves::hamiltonian::{phase_point, HamiltonianSystem, Polynomial};
use jacobi_curves::linalg::Vec64;
use jacobi_curves::Result;

use crate::config::{Builtin, FamilyKind, RunConfig, Term};

fn polynomial(vars: usize, terms: &[Term]) -> Result<Polynomial> {
    Polynomial::new(vars, terms.iter().map(|t| (t.coef, t.pow.clone())).collect())
}

/// The Hamiltonian system described by a validated config.
pub fn build_system(cfg: &RunConfig) -> Result<HamiltonianSystem> {
    let s = &cfg.system;
    let n = s.n;
    match s.family {
        FamilyKind::Natural => Ok(match s.builtin {
            Some(Builtin::FreeParticle) => HamiltonianSystem::free_particle(n),
            Some(Builtin::Oscillator) => HamiltonianSystem::oscillator(n),
            Some(Builtin::InvertedOscillator) => HamiltonianSystem::inverted_oscillator(n),
            Some(Builtin::Pendulum) => HamiltonianSystem::pendulum(n, s.strength.unwrap_or(1.0)),
            None => HamiltonianSystem::natural(Arc::new(polynomial(n, &s.potential)?)),
        }),
        FamilyKind::Metric => {
            let g = s
                .metric
                .iter()
                .map(|row| row.iter().map(|e| polynomial(n, e)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            HamiltonianSystem::metric(g, Arc::new(polynomial(n, &s.potential)?))
        }
        FamilyKind::Custom => HamiltonianSystem::polynomial(n, polynomial(2 * n, &s.hamiltonian)?),
    }
}

pub fn initial_point(cfg: &RunConfig) -> Vec64 {
    phase_point(&cfg.initial.x, &cfg.initial.y)
}
