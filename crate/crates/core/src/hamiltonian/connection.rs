use crate::curve::Monotonicity;
use crate::linalg::{min_singular_value, spectral_norm, sorted_symmetric_eigenvalues, Mat, Vec64};
use crate::symplectic::{matrix_inertia, Inertia, DEFAULT_RANK_TOL};
use crate::{Error, Result};

use super::flow::Trajectory;
use super::poly::Polynomial;
use super::system::{HamiltonianSystem, THIRD_FD_STEP};

/// `h_xx` with relative smallest singular value below this is treated as singular.
pub const REGULARITY_TOL: f64 = 1e-10;

/// Second-order system `ÿ = f(ẏ, y)` with `x = ẏ`.
pub trait SecondOrderField: Send + Sync {
    fn n(&self) -> usize;
    fn eval(&self, x: &Vec64, y: &Vec64) -> Vec64;
    /// `∂f/∂x`, rows indexed by components of `f`.
    fn jacobian_x(&self, x: &Vec64, y: &Vec64) -> Mat;
}

/// Field with polynomial components in `(x₁…xₙ, y₁…yₙ)`.
#[derive(Debug, Clone)]
pub struct PolynomialField {
    components: Vec<Polynomial>,
}

impl PolynomialField {
    pub fn new(components: Vec<Polynomial>) -> Result<Self> {
        let n = components.len();
        if n == 0 || components.iter().any(|p| p.vars() != 2 * n) {
            return Err(Error::InvalidInput(format!("field components must be polynomials in {} variables", 2 * n)));
        }
        Ok(PolynomialField { components })
    }
}

fn stack(x: &Vec64, y: &Vec64) -> Vec<f64> {
    x.iter().chain(y.iter()).copied().collect()
}

impl SecondOrderField for PolynomialField {
    fn n(&self) -> usize {
        self.components.len()
    }
    fn eval(&self, x: &Vec64, y: &Vec64) -> Vec64 {
        let v = stack(x, y);
        Vec64::from_iterator(self.n(), self.components.iter().map(|p| p.eval(&v)))
    }
    fn jacobian_x(&self, x: &Vec64, y: &Vec64) -> Mat {
        let v = stack(x, y);
        let n = self.n();
        Mat::from_fn(n, n, |j, i| self.components[j].derivative(i).eval(&v))
    }
}

/// Canonical connection of a second-order system: `C = ½ ∂f/∂x`, with `C[j][i] = c_i^j`.
pub fn connection_ode2(f: &dyn SecondOrderField, x: &Vec64, y: &Vec64) -> Mat {
    f.jacobian_x(x, y) * 0.5
}

fn regular_inverse(hxx: &Mat) -> Result<Mat> {
    let scale = spectral_norm(hxx);
    if scale == 0.0 || min_singular_value(hxx) <= REGULARITY_TOL * scale {
        return Err(Error::NotRegular(0.0));
    }
    hxx.clone().try_inverse().ok_or(Error::NotRegular(0.0))
}

/// `{h, h_xx}`, the derivative of `h_xx` along `H⃗`.
pub fn poisson_hxx(sys: &HamiltonianSystem, z: &Vec64) -> Mat {
    let n = sys.n();
    let g = sys.gradient(z);
    let t = sys.third(z);
    let mut out = Mat::zeros(n, n);
    for k in 0..n {
        out += t[n + k].view((0, 0), (n, n)) * g[k] - t[k].view((0, 0), (n, n)) * g[n + k];
    }
    out
}

/// Solves `2 h_xx C h_xx = {h, h_xx} − h_xy h_xx − h_xx h_yx`.
///
/// Points are not times, so a singular `h_xx` is reported as `NotRegular(0.0)`.
pub fn connection_hamiltonian(sys: &HamiltonianSystem, z: &Vec64) -> Result<Mat> {
    sys.check_point(z)?;
    let (hxx, hxy, _) = sys.blocks(z);
    let inv = regular_inverse(&hxx)?;
    let rhs = poisson_hxx(sys, z) - &hxy * &hxx - &hxx * hxy.transpose();
    Ok(&inv * rhs * &inv * 0.5)
}

/// Matrix of `R_ζ ν = −[ζ, [ζ, ν]_hor]_ver` in the fiber basis `∂_{x_i}`.
pub fn curvature_operator_field(sys: &HamiltonianSystem, z: &Vec64) -> Result<Mat> {
    let c = connection_hamiltonian(sys, z)?;
    let (hxx, hxy, hyy) = sys.blocks(z);
    let hyx = hxy.transpose();
    let zeta = sys.field(z);
    let eps = THIRD_FD_STEP * (1.0 + z.norm()) / (1.0 + zeta.norm());
    let cdot = if zeta.norm() == 0.0 {
        Mat::zeros(sys.n(), sys.n())
    } else {
        (connection_hamiltonian(sys, &(z + &zeta * eps))? - connection_hamiltonian(sys, &(z - &zeta * eps))?)
            / (2.0 * eps)
    };
    let chxx = &c * &hxx;
    Ok(cdot * &hxx + &chxx * &chxx + &c * &hxy * &hxx + hyx * &chxx + hyy * &hxx)
}

type Field<'a> = dyn Fn(&Vec64) -> Result<Vec64> + 'a;

/// `[X, Y](z) = DY·X − DX·Y` by central directional differences.
fn bracket(x: &Field, y: &Field, z: &Vec64, eps: f64) -> Result<Vec64> {
    let xv = x(z)?;
    let yv = y(z)?;
    let dir = |f: &Field, v: &Vec64| -> Result<Vec64> {
        let s = v.norm();
        if s == 0.0 {
            return Ok(Vec64::zeros(z.len()));
        }
        let h = eps / s;
        Ok((f(&(z + v * h))? - f(&(z - v * h))?) / (2.0 * h))
    };
    Ok(dir(y, &xv)? - dir(x, &yv)?)
}

/// Largest `|π_*[ζ,[ζ,ν]] − 2π_*[ζ,[ζ,ν]_ver]|` over `ν = ∂_{x_i}`, with `ver` taken
/// along the horizontal lift `∂_{y_i} + c_i^j ∂_{x_j}`.
pub fn connection_identity_residual(
    n: usize,
    field: &(dyn Fn(&Vec64) -> Vec64 + Sync),
    connection: &(dyn Fn(&Vec64) -> Result<Mat> + Sync),
    z: &Vec64,
) -> Result<f64> {
    let eps = THIRD_FD_STEP * (1.0 + z.norm());
    let zeta = |p: &Vec64| Ok(field(p));
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let nu = move |_: &Vec64| {
            let mut e = Vec64::zeros(2 * n);
            e[i] = 1.0;
            Ok(e)
        };
        let inner = |p: &Vec64| bracket(&zeta, &nu, p, eps);
        let vertical = |p: &Vec64| -> Result<Vec64> {
            let w = inner(p)?;
            let c = connection(p)?;
            let v = w.rows(0, n) - c * w.rows(n, n);
            let mut out = Vec64::zeros(2 * n);
            out.rows_mut(0, n).copy_from(&v);
            Ok(out)
        };
        let lhs = bracket(&zeta, &inner, z, eps)?;
        let rhs = bracket(&zeta, &vertical, z, eps)?;
        worst = worst.max((lhs.rows(n, n) - rhs.rows(n, n) * 2.0).amax());
    }
    Ok(worst)
}

/// Identity residual for a Hamiltonian system with its canonical connection.
pub fn hamiltonian_identity_residual(sys: &HamiltonianSystem, z: &Vec64) -> Result<f64> {
    connection_identity_residual(sys.n(), &|p| sys.field(p), &|p| connection_hamiltonian(sys, p), z)
}

/// Sign of `h_xx` along a trajectory.
#[derive(Debug, Clone)]
pub struct LegendreReport {
    pub inertias: Vec<Inertia>,
    /// Smallest `|eigenvalue|` of `h_xx` seen.
    pub min_abs_eigenvalue: f64,
    /// `Increasing` when `h_xx ≻ 0` everywhere, `Decreasing` when `h_xx ≺ 0`.
    pub definite: Monotonicity,
}

impl LegendreReport {
    pub fn uniform(&self) -> bool {
        self.definite != Monotonicity::None
    }
}

/// Inertia of `∂²H/∂x²` at each trajectory state.
pub fn monotonicity_test(sys: &HamiltonianSystem, traj: &Trajectory) -> LegendreReport {
    let mut inertias = Vec::with_capacity(traj.states.len());
    let mut min_abs = f64::INFINITY;
    for z in &traj.states {
        let (hxx, _, _) = sys.blocks(z);
        let eig = sorted_symmetric_eigenvalues(&hxx);
        min_abs = eig.iter().fold(min_abs, |m, v| m.min(v.abs()));
        inertias.push(matrix_inertia(&hxx, DEFAULT_RANK_TOL));
    }
    let definite = if inertias.iter().all(Inertia::is_positive_definite) {
        Monotonicity::Increasing
    } else if inertias.iter().all(Inertia::is_negative_definite) {
        Monotonicity::Decreasing
    } else {
        Monotonicity::None
    };
    LegendreReport { inertias, min_abs_eigenvalue: min_abs, definite }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::curve::curvature;
    use crate::hamiltonian::{flow, jacobi_curve, phase_point};

    fn cubic_custom() -> HamiltonianSystem {
        // h = ½(1 + y₁²)x₁² + x₁x₂y₂ + x₂² + ½ y₁² + y₂³/3 + 0.1 x₁³
        let p = Polynomial::new(
            4,
            vec![
                (0.5, vec![2, 0, 0, 0]),
                (0.5, vec![2, 0, 2, 0]),
                (1.0, vec![1, 1, 0, 1]),
                (1.0, vec![0, 2, 0, 0]),
                (0.5, vec![0, 0, 2, 0]),
                (1.0 / 3.0, vec![0, 0, 0, 3]),
                (0.1, vec![3, 0, 0, 0]),
            ],
        )
        .unwrap();
        HamiltonianSystem::polynomial(2, p).unwrap()
    }

    fn curved_metric(u: Arc<dyn crate::hamiltonian::Potential>) -> HamiltonianSystem {
        let p = |t: Vec<(f64, Vec<u32>)>| Polynomial::new(2, t).unwrap();
        let g = vec![
            vec![p(vec![(1.0, vec![0, 0]), (0.5, vec![0, 2])]), p(vec![(0.2, vec![1, 0])])],
            vec![p(vec![(0.2, vec![1, 0])]), p(vec![(1.0, vec![0, 0]), (0.3, vec![2, 0])])],
        ];
        HamiltonianSystem::metric(g, u).unwrap()
    }

    #[test]
    fn ode2_connection_examples() {
        let f = PolynomialField::new(vec![Polynomial::new(2, vec![(-1.0, vec![0, 1])]).unwrap()]).unwrap();
        let (x, y) = (Vec64::from_vec(vec![0.3]), Vec64::from_vec(vec![1.2]));
        assert_eq!(connection_ode2(&f, &x, &y), Mat::zeros(1, 1));
        // f = A x with A = [[1, 2], [−3, 4]]
        let lin = |a: f64, b: f64| Polynomial::new(4, vec![(a, vec![1, 0, 0, 0]), (b, vec![0, 1, 0, 0])]).unwrap();
        let f = PolynomialField::new(vec![lin(1.0, 2.0), lin(-3.0, 4.0)]).unwrap();
        let c = connection_ode2(&f, &Vec64::from_vec(vec![0.1, 0.2]), &Vec64::from_vec(vec![0.0, 1.0]));
        assert_eq!(c, Mat::from_row_slice(2, 2, &[0.5, 1.0, -1.5, 2.0]));
    }

    #[test]
    fn natural_connection_vanishes_and_curvature_is_potential_hessian() {
        let sys = HamiltonianSystem::pendulum(2, 1.0);
        let z = phase_point(&[0.3, -0.4], &[0.7, 1.9]);
        assert_eq!(connection_hamiltonian(&sys, &z).unwrap(), Mat::zeros(2, 2));
        let r = curvature_operator_field(&sys, &z).unwrap();
        assert_eq!(r, Mat::from_diagonal(&Vec64::from_vec(vec![0.7f64.cos(), 1.9f64.cos()])));
        let inv = curvature_operator_field(&HamiltonianSystem::inverted_oscillator(3), &phase_point(&[1.0; 3], &[2.0; 3]));
        assert_eq!(inv.unwrap(), -Mat::identity(3, 3));
    }

    #[test]
    fn potential_does_not_change_metric_connection() {
        let a = curved_metric(Arc::new(Polynomial::zero(2)));
        let b = curved_metric(Arc::new(Polynomial::new(2, vec![(1.0, vec![3, 0]), (2.0, vec![1, 1])]).unwrap()));
        let z = phase_point(&[0.5, -0.3], &[0.2, 0.8]);
        let ca = connection_hamiltonian(&a, &z).unwrap();
        let cb = connection_hamiltonian(&b, &z).unwrap();
        assert!((&ca - &cb).norm() < 1e-6 * (1.0 + ca.norm()));
        assert!((&ca - ca.transpose()).norm() < 1e-7);
        assert!(ca.norm() > 1e-3);
    }

    #[test]
    fn flat_metric_curvature_is_potential_hessian() {
        let u = Polynomial::new(2, vec![(1.0, vec![3, 0]), (-1.0, vec![1, 2])]).unwrap();
        let g = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let sys = HamiltonianSystem::constant_metric(&g, Arc::new(u.clone())).unwrap();
        let z = phase_point(&[0.5, 0.2], &[0.3, -0.6]);
        let r = curvature_operator_field(&sys, &z).unwrap();
        assert!((r - u.hessian(&[0.3, -0.6])).norm() < 1e-7);
    }

    #[test]
    fn hamiltonian_connection_is_symmetric_with_closed_form_third() {
        let sys = cubic_custom();
        let z = phase_point(&[0.4, 0.3], &[0.5, -0.2]);
        let c = connection_hamiltonian(&sys, &z).unwrap();
        assert!((&c - c.transpose()).norm() < 1e-12);
        // Same matrix through difference quotients of the Hessian.
        let fd = {
            let n = 2;
            let g = sys.gradient(&z);
            let t = sys.third_fd(&z);
            let mut pb = Mat::zeros(n, n);
            for k in 0..n {
                pb += t[n + k].view((0, 0), (n, n)) * g[k] - t[k].view((0, 0), (n, n)) * g[n + k];
            }
            let (hxx, hxy, _) = sys.blocks(&z);
            let inv = hxx.clone().try_inverse().unwrap();
            &inv * (pb - &hxy * &hxx - &hxx * hxy.transpose()) * &inv * 0.5
        };
        assert!((c - fd).norm() < 1e-7);
    }

    #[test]
    fn field_curvature_matches_jacobi_curve_curvature() {
        let systems = [
            (HamiltonianSystem::pendulum(2, 1.0), phase_point(&[0.3, -0.2], &[0.4, 1.0])),
            (curved_metric(Arc::new(Polynomial::new(2, vec![(0.5, vec![2, 0])]).unwrap())), phase_point(&[0.5, -0.3], &[0.2, 0.8])),
            (cubic_custom(), phase_point(&[0.4, 0.3], &[0.5, -0.2])),
        ];
        for (sys, z) in systems {
            let r = curvature_operator_field(&sys, &z).unwrap();
            let mut field: Vec<f64> = r.complex_eigenvalues().iter().map(|e| e.re).collect();
            field.sort_by(f64::total_cmp);
            let c = jacobi_curve(&sys, &z, 1.0, 1e-3).unwrap();
            let curve = curvature(&c, 0.0).unwrap().real_spectrum();
            let scale = field.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for (a, b) in field.iter().zip(&curve) {
                assert!((a - b).abs() <= 1e-5 * scale, "{field:?} vs {curve:?}");
            }
        }
    }

    #[test]
    fn canonical_connection_identity_holds() {
        let sys = cubic_custom();
        for z in [phase_point(&[0.4, 0.3], &[0.5, -0.2]), phase_point(&[-0.2, 0.6], &[1.0, 0.1])] {
            assert!(hamiltonian_identity_residual(&sys, &z).unwrap() <= 1e-4);
        }
        // A wrong connection fails the identity.
        let bad = connection_identity_residual(
            2,
            &|p| sys.field(p),
            &|p| Ok(connection_hamiltonian(&sys, p)? + Mat::identity(2, 2)),
            &phase_point(&[0.4, 0.3], &[0.5, -0.2]),
        )
        .unwrap();
        assert!(bad > 1e-2);
    }

    #[test]
    fn legendre_reports() {
        let sys = HamiltonianSystem::pendulum(2, 1.0);
        let tr = flow(&sys, &phase_point(&[0.3, 0.1], &[0.0, 1.0]), 2.0, 1e-2).unwrap();
        assert_eq!(monotonicity_test(&sys, &tr).definite, Monotonicity::Increasing);
        // h = x₁x₂
        let saddle = HamiltonianSystem::polynomial(2, Polynomial::new(4, vec![(1.0, vec![1, 1, 0, 0])]).unwrap()).unwrap();
        let tr = flow(&saddle, &phase_point(&[1.0, 1.0], &[0.0, 0.0]), 1.0, 1e-2).unwrap();
        let rep = monotonicity_test(&saddle, &tr);
        assert!(!rep.uniform());
        assert_eq!(rep.inertias[0], Inertia { neg: 1, zero: 0, pos: 1 });
        let lorentz = HamiltonianSystem::constant_metric(
            &Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
            Arc::new(Polynomial::zero(2)),
        )
        .unwrap();
        let tr = flow(&lorentz, &phase_point(&[1.0, 0.5], &[0.0, 0.0]), 1.0, 1e-2).unwrap();
        assert_eq!(monotonicity_test(&lorentz, &tr).definite, Monotonicity::None);
    }

    #[test]
    fn singular_fiber_hessian_is_not_regular() {
        let sys = HamiltonianSystem::polynomial(1, Polynomial::new(2, vec![(1.0, vec![1, 1])]).unwrap()).unwrap();
        assert_eq!(connection_hamiltonian(&sys, &phase_point(&[1.0], &[1.0])), Err(Error::NotRegular(0.0)));
    }
}
