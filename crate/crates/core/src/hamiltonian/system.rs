use std::sync::Arc;

use crate::linalg::{Mat, Vec64};
use crate::{Error, Result};

use super::poly::Polynomial;

/// Relative step for finite-difference third derivatives.
pub const THIRD_FD_STEP: f64 = 1e-4;

/// A smooth function of the phase point `z = (x, y) ∈ ℝ²ⁿ`.
pub trait Hamiltonian: Send + Sync {
    fn n(&self) -> usize;
    fn value(&self, z: &Vec64) -> f64;
    fn gradient(&self, z: &Vec64) -> Vec64;
    fn hessian(&self, z: &Vec64) -> Mat;
    /// `T[k] = ∂_k Hess`, when available in closed form.
    fn third(&self, _z: &Vec64) -> Option<Vec<Mat>> {
        None
    }
}

/// A potential `U(y)` on the base.
pub trait Potential: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, y: &[f64]) -> f64;
    fn gradient(&self, y: &[f64]) -> Vec64;
    fn hessian(&self, y: &[f64]) -> Mat;
    fn third(&self, _y: &[f64]) -> Option<Vec<Mat>> {
        None
    }
}

impl Potential for Polynomial {
    fn dim(&self) -> usize {
        self.vars()
    }
    fn value(&self, y: &[f64]) -> f64 {
        self.eval(y)
    }
    fn gradient(&self, y: &[f64]) -> Vec64 {
        Polynomial::gradient(self, y)
    }
    fn hessian(&self, y: &[f64]) -> Mat {
        Polynomial::hessian(self, y)
    }
    fn third(&self, y: &[f64]) -> Option<Vec<Mat>> {
        Some(Polynomial::third(self, y))
    }
}

/// `U(y) = −s Σ cos yᵢ`.
#[derive(Debug, Clone)]
pub struct Pendulum {
    pub n: usize,
    pub strength: f64,
}

impl Potential for Pendulum {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, y: &[f64]) -> f64 {
        -self.strength * y.iter().map(|v| v.cos()).sum::<f64>()
    }
    fn gradient(&self, y: &[f64]) -> Vec64 {
        Vec64::from_fn(self.n, |i, _| self.strength * y[i].sin())
    }
    fn hessian(&self, y: &[f64]) -> Mat {
        Mat::from_diagonal(&Vec64::from_fn(self.n, |i, _| self.strength * y[i].cos()))
    }
    fn third(&self, y: &[f64]) -> Option<Vec<Mat>> {
        Some(
            (0..self.n)
                .map(|k| {
                    let mut m = Mat::zeros(self.n, self.n);
                    m[(k, k)] = -self.strength * y[k].sin();
                    m
                })
                .collect(),
        )
    }
}

fn split(z: &Vec64, n: usize) -> (Vec<f64>, Vec<f64>) {
    (z.rows(0, n).iter().copied().collect(), z.rows(n, n).iter().copied().collect())
}

/// `h = ½|x|² + U(y)`.
pub struct Natural {
    n: usize,
    u: Arc<dyn Potential>,
}

impl Hamiltonian for Natural {
    fn n(&self) -> usize {
        self.n
    }
    fn value(&self, z: &Vec64) -> f64 {
        let (x, y) = split(z, self.n);
        0.5 * x.iter().map(|v| v * v).sum::<f64>() + self.u.value(&y)
    }
    fn gradient(&self, z: &Vec64) -> Vec64 {
        let n = self.n;
        let (_, y) = split(z, n);
        let mut g = z.clone();
        g.rows_mut(n, n).copy_from(&self.u.gradient(&y));
        g
    }
    fn hessian(&self, z: &Vec64) -> Mat {
        let n = self.n;
        let (_, y) = split(z, n);
        let mut h = Mat::zeros(2 * n, 2 * n);
        h.view_mut((0, 0), (n, n)).fill_with_identity();
        h.view_mut((n, n), (n, n)).copy_from(&self.u.hessian(&y));
        h
    }
    fn third(&self, z: &Vec64) -> Option<Vec<Mat>> {
        let n = self.n;
        let (_, y) = split(z, n);
        let tu = self.u.third(&y)?;
        let mut out = vec![Mat::zeros(2 * n, 2 * n); n];
        for t in tu {
            let mut m = Mat::zeros(2 * n, 2 * n);
            m.view_mut((n, n), (n, n)).copy_from(&t);
            out.push(m);
        }
        Some(out)
    }
}

/// `h = ½ gⁱʲ(y) xᵢxⱼ + U(y)` with polynomial `gⁱʲ`.
pub struct Metric {
    n: usize,
    g: Vec<Polynomial>,
    dg: Vec<Vec<Polynomial>>,
    ddg: Vec<Vec<Vec<Polynomial>>>,
    u: Arc<dyn Potential>,
}

impl Metric {
    fn eval_matrix(&self, p: impl Fn(usize) -> f64) -> Mat {
        Mat::from_fn(self.n, self.n, |i, j| p(i * self.n + j))
    }

    pub fn inverse_metric(&self, y: &[f64]) -> Mat {
        self.eval_matrix(|k| self.g[k].eval(y))
    }
}

impl Hamiltonian for Metric {
    fn n(&self) -> usize {
        self.n
    }
    fn value(&self, z: &Vec64) -> f64 {
        let (x, y) = split(z, self.n);
        let x = Vec64::from_vec(x);
        0.5 * x.dot(&(self.inverse_metric(&y) * &x)) + self.u.value(&y)
    }
    fn gradient(&self, z: &Vec64) -> Vec64 {
        let n = self.n;
        let (x, y) = split(z, n);
        let x = Vec64::from_vec(x);
        let mut out = Vec64::zeros(2 * n);
        out.rows_mut(0, n).copy_from(&(self.inverse_metric(&y) * &x));
        let du = self.u.gradient(&y);
        for k in 0..n {
            let gk = self.eval_matrix(|m| self.dg[m][k].eval(&y));
            out[n + k] = 0.5 * x.dot(&(gk * &x)) + du[k];
        }
        out
    }
    fn hessian(&self, z: &Vec64) -> Mat {
        let n = self.n;
        let (x, y) = split(z, n);
        let x = Vec64::from_vec(x);
        let mut h = Mat::zeros(2 * n, 2 * n);
        h.view_mut((0, 0), (n, n)).copy_from(&self.inverse_metric(&y));
        let uyy = self.u.hessian(&y);
        for k in 0..n {
            let gkx = self.eval_matrix(|m| self.dg[m][k].eval(&y)) * &x;
            for i in 0..n {
                h[(i, n + k)] = gkx[i];
                h[(n + k, i)] = gkx[i];
            }
            for l in 0..n {
                let gkl = self.eval_matrix(|m| self.ddg[m][k][l].eval(&y));
                h[(n + k, n + l)] = 0.5 * x.dot(&(gkl * &x)) + uyy[(k, l)];
            }
        }
        h
    }
}

/// Polynomial `h(x, y)` in the `2n` phase variables.
pub struct PolynomialHamiltonian {
    n: usize,
    p: Polynomial,
}

impl Hamiltonian for PolynomialHamiltonian {
    fn n(&self) -> usize {
        self.n
    }
    fn value(&self, z: &Vec64) -> f64 {
        self.p.eval(z.as_slice())
    }
    fn gradient(&self, z: &Vec64) -> Vec64 {
        self.p.gradient(z.as_slice())
    }
    fn hessian(&self, z: &Vec64) -> Mat {
        self.p.hessian(z.as_slice())
    }
    fn third(&self, z: &Vec64) -> Option<Vec<Mat>> {
        Some(self.p.third(z.as_slice()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Natural,
    Metric,
    Custom,
}

/// A Hamiltonian on `ℝⁿ* × ℝⁿ` with its family tag.
#[derive(Clone)]
pub struct HamiltonianSystem {
    n: usize,
    family: Family,
    h: Arc<dyn Hamiltonian>,
}

impl std::fmt::Debug for HamiltonianSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HamiltonianSystem").field("n", &self.n).field("family", &self.family).finish()
    }
}

impl HamiltonianSystem {
    pub fn natural(u: Arc<dyn Potential>) -> Self {
        let n = u.dim();
        HamiltonianSystem { n, family: Family::Natural, h: Arc::new(Natural { n, u }) }
    }

    /// `U(y) = ½ yᵀ K y`.
    pub fn quadratic_potential(k: &Mat) -> Self {
        Self::natural(Arc::new(Polynomial::quadratic_form(k)))
    }

    pub fn free_particle(n: usize) -> Self {
        Self::natural(Arc::new(Polynomial::zero(n)))
    }

    pub fn oscillator(n: usize) -> Self {
        Self::quadratic_potential(&Mat::identity(n, n))
    }

    pub fn inverted_oscillator(n: usize) -> Self {
        Self::quadratic_potential(&-Mat::identity(n, n))
    }

    pub fn pendulum(n: usize, strength: f64) -> Self {
        Self::natural(Arc::new(Pendulum { n, strength }))
    }

    /// `h = ½ gⁱʲ(y) xᵢxⱼ + U(y)`; `g` is given row by row.
    pub fn metric(g: Vec<Vec<Polynomial>>, u: Arc<dyn Potential>) -> Result<Self> {
        let n = u.dim();
        if g.len() != n || g.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput(format!("metric table must be {n} x {n}")));
        }
        if g.iter().flatten().any(|p| p.vars() != n) {
            return Err(Error::InvalidInput(format!("metric entries must be polynomials in {n} variables")));
        }
        let probes: Vec<Vec<f64>> =
            (0..3).map(|s| (0..n).map(|i| 0.37 * (s as f64 + 1.0) - 0.21 * i as f64).collect()).collect();
        for i in 0..n {
            for j in 0..i {
                for y in &probes {
                    let (a, b) = (g[i][j].eval(y), g[j][i].eval(y));
                    if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                        return Err(Error::InvalidInput("metric table is not symmetric".into()));
                    }
                }
            }
        }
        let g: Vec<Polynomial> = g.into_iter().flatten().collect();
        let dg: Vec<Vec<Polynomial>> = g.iter().map(|p| (0..n).map(|k| p.derivative(k)).collect()).collect();
        let ddg = dg.iter().map(|row| row.iter().map(|p| (0..n).map(|l| p.derivative(l)).collect()).collect()).collect();
        Ok(HamiltonianSystem { n, family: Family::Metric, h: Arc::new(Metric { n, g, dg, ddg, u }) })
    }

    /// Constant inverse metric `G` with potential `U`.
    pub fn constant_metric(g: &Mat, u: Arc<dyn Potential>) -> Result<Self> {
        let n = g.nrows();
        let table = (0..n).map(|i| (0..n).map(|j| Polynomial::constant(n, g[(i, j)])).collect()).collect();
        Self::metric(table, u)
    }

    /// Polynomial `h` in the variables `(x₁…xₙ, y₁…yₙ)`.
    pub fn polynomial(n: usize, p: Polynomial) -> Result<Self> {
        if p.vars() != 2 * n {
            return Err(Error::InvalidInput(format!("Hamiltonian polynomial must have {} variables", 2 * n)));
        }
        Ok(HamiltonianSystem { n, family: Family::Custom, h: Arc::new(PolynomialHamiltonian { n, p }) })
    }

    /// `h = ½ zᵀ M z`.
    pub fn quadratic(m: &Mat) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() % 2 != 0 || m.nrows() == 0 {
            return Err(Error::InvalidInput("quadratic Hamiltonian needs an even square matrix".into()));
        }
        Self::polynomial(m.nrows() / 2, Polynomial::quadratic_form(m))
    }

    pub fn custom(h: Arc<dyn Hamiltonian>) -> Self {
        HamiltonianSystem { n: h.n(), family: Family::Custom, h }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn value(&self, z: &Vec64) -> f64 {
        self.h.value(z)
    }

    pub fn gradient(&self, z: &Vec64) -> Vec64 {
        self.h.gradient(z)
    }

    pub fn hessian(&self, z: &Vec64) -> Mat {
        let h = self.h.hessian(z);
        (&h + h.transpose()) * 0.5
    }

    /// `H⃗ = (−H_y, H_x)`.
    pub fn field(&self, z: &Vec64) -> Vec64 {
        let n = self.n;
        let g = self.gradient(z);
        let mut v = Vec64::zeros(2 * n);
        v.rows_mut(0, n).copy_from(&-g.rows(n, n));
        v.rows_mut(n, n).copy_from(&g.rows(0, n));
        v
    }

    /// Jacobian of the field, `K · Hess` with `K = [[0, −I], [I, 0]]`.
    pub fn field_jacobian(&self, z: &Vec64) -> Mat {
        let n = self.n;
        let h = self.hessian(z);
        let mut j = Mat::zeros(2 * n, 2 * n);
        j.rows_mut(0, n).copy_from(&-h.rows(n, n));
        j.rows_mut(n, n).copy_from(&h.rows(0, n));
        j
    }

    /// Third derivatives, in closed form when the Hamiltonian provides them.
    pub fn third(&self, z: &Vec64) -> Vec<Mat> {
        self.h.third(z).unwrap_or_else(|| self.third_fd(z))
    }

    pub fn has_analytic_third(&self, z: &Vec64) -> bool {
        self.h.third(z).is_some()
    }

    /// Central differences of the Hessian with step `1e−4 (1 + ‖z‖)`.
    pub fn third_fd(&self, z: &Vec64) -> Vec<Mat> {
        let eps = THIRD_FD_STEP * (1.0 + z.norm());
        (0..2 * self.n)
            .map(|k| {
                let mut zp = z.clone();
                let mut zm = z.clone();
                zp[k] += eps;
                zm[k] -= eps;
                (self.hessian(&zp) - self.hessian(&zm)) / (2.0 * eps)
            })
            .collect()
    }

    /// `(h_xx, h_xy, h_yy)` blocks of the Hessian.
    pub fn blocks(&self, z: &Vec64) -> (Mat, Mat, Mat) {
        let n = self.n;
        let h = self.hessian(z);
        (
            h.view((0, 0), (n, n)).into_owned(),
            h.view((0, n), (n, n)).into_owned(),
            h.view((n, n), (n, n)).into_owned(),
        )
    }

    pub fn check_point(&self, z: &Vec64) -> Result<()> {
        if z.len() != 2 * self.n || !z.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(format!("phase point must have {} finite entries", 2 * self.n)));
        }
        Ok(())
    }
}

/// Phase point from fiber and base coordinates.
pub fn phase_point(x: &[f64], y: &[f64]) -> Vec64 {
    Vec64::from_iterator(x.len() + y.len(), x.iter().chain(y).copied())
}
