//! Seeded generators for symmetric matrices, symplectic maps and Lagrangian frames.

use rand::Rng;

use crate::linalg::{block2, Mat};

use super::frame::LagrangianFrame;
use super::space::SymplecticSpace;

/// Symmetric matrix with entries uniform in `[−scale, scale]`.
pub fn random_symmetric(n: usize, scale: f64, rng: &mut impl Rng) -> Mat {
    let mut s = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = scale * (2.0 * rng.random::<f64>() - 1.0);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    s
}

pub fn random_matrix(r: usize, c: usize, scale: f64, rng: &mut impl Rng) -> Mat {
    Mat::from_fn(r, c, |_, _| scale * (2.0 * rng.random::<f64>() - 1.0))
}

/// Product of elementary symplectic factors `[[I,S],[0,I]]`, `[[I,0],[S,I]]` and
/// `[[G,0],[0,G⁻ᵀ]]` in standard coordinates.
pub fn random_symplectic(n: usize, scale: f64, rng: &mut impl Rng) -> Mat {
    let id = Mat::identity(n, n);
    let z = Mat::zeros(n, n);
    let mut t = Mat::identity(2 * n, 2 * n);
    for _ in 0..2 {
        let s1 = random_symmetric(n, scale, rng);
        let s2 = random_symmetric(n, scale, rng);
        let g = &id + random_matrix(n, n, 0.5 * scale, rng);
        let (g, g_inv_t) = match g.clone().try_inverse() {
            Some(inv) => (g, inv.transpose()),
            None => (id.clone(), id.clone()),
        };
        let upper = block2(&id, &s1, &z, &id);
        let lower = block2(&id, &z, &s2, &id);
        let diag = block2(&g, &z, &z, &g_inv_t);
        t = upper * lower * diag * t;
    }
    t
}

/// Random Lagrangian frame in the standard space: a random symplectic image of the vertical.
pub fn random_lagrangian(space: &SymplecticSpace, rng: &mut impl Rng) -> LagrangianFrame {
    let t = random_symplectic(space.n(), 1.0, rng);
    space.vertical().transform(&(space.darboux() * t * space.darboux().clone().try_inverse().unwrap()))
        .expect("symplectic image of a Lagrangian frame")
}
