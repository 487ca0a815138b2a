//! Curves in the Lagrange Grassmannian and their differential invariants.
//!
//! Every local computation freezes one Darboux chart over its finite-difference
//! stencil. The chart is centered at `Λ(t)` itself, so `S(t) = 0` and operators on
//! `Λ(t)` are reported in the basis `e₁…e_n` of the chart, which is the orthonormal
//! frame of `Λ(t)`.

mod classify;
mod local;
mod ops;
mod transport;

use std::sync::Arc;

use crate::linalg::Mat;
use crate::symplectic::{LagrangianFrame, SymplecticSpace};
use crate::{Error, Result};

pub use classify::{classify, monotonicity, Classification, Monotonicity};
pub use local::{jet, Jet, STENCIL_HALF_WIDTH};
pub use ops::{
    cross_ratio, curvature, curvature_form, curvature_matrix_in_chart, derivative_curve, derivative_curve_path,
    infinitesimal_cross_ratio, reparametrize, velocity_form, CurvatureForm, CurveOperator, OperatorKind,
    Reparametrization, VelocityForm, REGULARITY_CAP,
};
pub use transport::{structural_fundamental_matrix, transport};

/// Evaluator returning a (not necessarily orthonormal) frame of `Λ(t)`.
pub type FrameFn = dyn Fn(f64) -> Result<Mat> + Send + Sync;

/// Default number of grid intervals.
pub const DEFAULT_GRID_INTERVALS: usize = 200;
/// Default finite-difference step as a fraction of the domain length.
pub const DEFAULT_FD_FRACTION: f64 = 1e-3;

/// Smooth curve `t ↦ Λ(t)` on `[t0, t1]`.
///
/// `eval` must accept times up to `3·fd_step` outside the domain so that centered
/// stencils can be used at the endpoints.
#[derive(Clone)]
pub struct GrassmannCurve {
    space: SymplecticSpace,
    eval: Arc<FrameFn>,
    domain: (f64, f64),
    grid: Vec<f64>,
    fd_step: f64,
}

impl std::fmt::Debug for GrassmannCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GrassmannCurve")
            .field("n", &self.space.n())
            .field("domain", &self.domain)
            .field("grid_len", &self.grid.len())
            .field("fd_step", &self.fd_step)
            .finish()
    }
}

fn uniform_grid(a: f64, b: f64, intervals: usize) -> Vec<f64> {
    (0..=intervals)
        .map(|i| if i == intervals { b } else { a + (b - a) * i as f64 / intervals as f64 })
        .collect()
}

impl GrassmannCurve {
    pub fn new(
        space: &SymplecticSpace,
        domain: (f64, f64),
        eval: impl Fn(f64) -> Result<Mat> + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::from_arc(space, domain, Arc::new(eval))
    }

    pub fn from_arc(space: &SymplecticSpace, domain: (f64, f64), eval: Arc<FrameFn>) -> Result<Self> {
        let (a, b) = domain;
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidInput("curve domain must be a nonempty finite interval".into()));
        }
        let len = b - a;
        Ok(GrassmannCurve {
            space: space.clone(),
            eval,
            domain,
            grid: uniform_grid(a, b, DEFAULT_GRID_INTERVALS),
            fd_step: DEFAULT_FD_FRACTION * len,
        })
    }

    /// Curve given by a symmetric matrix path `S(t)` in a fixed chart.
    pub fn from_chart_path(
        chart: &crate::symplectic::Chart,
        domain: (f64, f64),
        s: impl Fn(f64) -> Mat + Send + Sync + 'static,
    ) -> Result<Self> {
        let chart = chart.clone();
        let space = chart.space().clone();
        Self::new(&space, domain, move |t| Ok(chart.graph_basis(&s(t))))
    }

    pub fn with_fd_step(mut self, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidInput("fd_step must be positive".into()));
        }
        self.fd_step = h;
        self.check_grid()?;
        Ok(self)
    }

    pub fn with_grid(mut self, grid: Vec<f64>) -> Result<Self> {
        self.grid = grid;
        self.check_grid()?;
        Ok(self)
    }

    pub fn with_grid_intervals(self, intervals: usize) -> Result<Self> {
        let (a, b) = self.domain;
        self.with_grid(uniform_grid(a, b, intervals.max(1)))
    }

    fn check_grid(&self) -> Result<()> {
        let g = &self.grid;
        let (a, b) = self.domain;
        if g.len() < 2 || g[0] != a || *g.last().unwrap() != b {
            return Err(Error::InvalidInput("grid must start and end at the domain endpoints".into()));
        }
        for w in g.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidInput("grid must be strictly increasing".into()));
            }
            if w[1] - w[0] > 10.0 * self.fd_step * (1.0 + 1e-12) {
                return Err(Error::InvalidInput("grid spacing exceeds 10·fd_step".into()));
            }
        }
        Ok(())
    }

    /// Same curve on a subinterval (grid clipped, endpoints added).
    pub fn restrict(&self, a: f64, b: f64) -> Result<Self> {
        if !(b > a) {
            return Err(Error::InvalidInput("restriction needs a < b".into()));
        }
        let mut grid = vec![a];
        grid.extend(self.grid.iter().copied().filter(|&t| t > a && t < b));
        grid.push(b);
        let spacing_ok = grid.windows(2).all(|w| w[1] - w[0] <= 10.0 * self.fd_step);
        let grid = if spacing_ok {
            grid
        } else {
            let k = ((b - a) / (5.0 * self.fd_step)).ceil() as usize;
            uniform_grid(a, b, k.max(1))
        };
        Ok(GrassmannCurve {
            space: self.space.clone(),
            eval: self.eval.clone(),
            domain: (a, b),
            grid,
            fd_step: self.fd_step,
        })
    }

    pub fn space(&self) -> &SymplecticSpace {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn length(&self) -> f64 {
        self.domain.1 - self.domain.0
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn raw(&self, t: f64) -> Result<Mat> {
        (self.eval)(t)
    }

    pub fn frame(&self, t: f64) -> Result<LagrangianFrame> {
        LagrangianFrame::new(&self.space, (self.eval)(t)?)
    }

    pub fn evaluator(&self) -> Arc<FrameFn> {
        self.eval.clone()
    }
}

#[cfg(test)]
mod tests;
