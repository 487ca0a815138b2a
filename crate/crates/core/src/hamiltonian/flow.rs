use std::sync::Arc;

use crate::curve::GrassmannCurve;
use crate::linalg::{Mat, Vec64};
use crate::symplectic::{standard_form, standard_space};
use crate::{Error, Result};

use super::system::HamiltonianSystem;

/// States with norm above this abort the integration.
pub const BLOWUP_CAP: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec64>,
    pub energies: Vec<f64>,
}

impl Trajectory {
    /// `max |H(z_t) − H(z_0)|`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energies[0];
        self.energies.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max)
    }

    pub fn last(&self) -> &Vec64 {
        self.states.last().expect("trajectory is nonempty")
    }
}

#[derive(Debug, Clone)]
pub struct VariationalFlow {
    pub times: Vec<f64>,
    /// `Γ(0, t)`, the differential of the flow.
    pub matrices: Vec<Mat>,
}

impl VariationalFlow {
    /// `max ‖ΓᵀσΓ − σ‖` over the grid.
    pub fn symplectic_defect(&self) -> f64 {
        let n = self.matrices[0].nrows() / 2;
        let omega = standard_form(n);
        self.matrices.iter().map(|g| (g.transpose() * &omega * g - &omega).norm()).fold(0.0, f64::max)
    }
}

fn rk4(sys: &HamiltonianSystem, z: &Vec64, h: f64) -> Vec64 {
    let k1 = sys.field(z);
    let k2 = sys.field(&(z + &k1 * (0.5 * h)));
    let k3 = sys.field(&(z + &k2 * (0.5 * h)));
    let k4 = sys.field(&(z + &k3 * h));
    z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// One step of the state together with `Φ̇ = K Hess(z) Φ`.
fn rk4_variational(sys: &HamiltonianSystem, z: &Vec64, phi: &Mat, h: f64) -> (Vec64, Mat) {
    let f = |z: &Vec64, p: &Mat| (sys.field(z), sys.field_jacobian(z) * p);
    let (k1, m1) = f(z, phi);
    let (k2, m2) = f(&(z + &k1 * (0.5 * h)), &(phi + &m1 * (0.5 * h)));
    let (k3, m3) = f(&(z + &k2 * (0.5 * h)), &(phi + &m2 * (0.5 * h)));
    let (k4, m4) = f(&(z + &k3 * h), &(phi + &m3 * h));
    (z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0), phi + (m1 + m2 * 2.0 + m3 * 2.0 + m4) * (h / 6.0))
}

fn check_state(z: &Vec64, t: f64) -> Result<()> {
    if !z.iter().all(|v| v.is_finite()) || z.norm() > BLOWUP_CAP {
        return Err(Error::BlowUp(t));
    }
    Ok(())
}

fn check_horizon(horizon: f64, step: f64) -> Result<()> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput("step must be positive".into()));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidInput("horizon must be positive".into()));
    }
    Ok(())
}

/// Uniform grid `0 = t₀ < … < t_N = horizon` with spacing at most `step`.
fn time_grid(horizon: f64, step: f64) -> Vec<f64> {
    let n = ((horizon / step) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (0..=n).map(|k| if k == n { horizon } else { horizon * k as f64 / n as f64 }).collect()
}

/// Fourth-order Runge–Kutta integration of `ẋ = −H_y`, `ẏ = H_x`.
pub fn flow(sys: &HamiltonianSystem, z0: &Vec64, horizon: f64, step: f64) -> Result<Trajectory> {
    sys.check_point(z0)?;
    check_horizon(horizon, step)?;
    let times = time_grid(horizon, step);
    let mut states = vec![z0.clone()];
    for w in times.windows(2) {
        let z = rk4(sys, states.last().unwrap(), w[1] - w[0]);
        check_state(&z, w[1])?;
        states.push(z);
    }
    let energies = states.iter().map(|z| sys.value(z)).collect();
    Ok(Trajectory { times, states, energies })
}

/// `Γ(0, t)` along the grid of `traj`, restarted from its initial state.
pub fn variational_flow(sys: &HamiltonianSystem, traj: &Trajectory) -> Result<VariationalFlow> {
    let z0 = &traj.states[0];
    sys.check_point(z0)?;
    let dim = 2 * sys.n();
    let mut z = z0.clone();
    let mut matrices = vec![Mat::identity(dim, dim)];
    for w in traj.times.windows(2) {
        let (zn, phi) = rk4_variational(sys, &z, matrices.last().unwrap(), w[1] - w[0]);
        check_state(&zn, w[1])?;
        if !phi.iter().all(|v| v.is_finite()) || phi.norm() > BLOWUP_CAP {
            return Err(Error::BlowUp(w[1]));
        }
        z = zn;
        matrices.push(phi);
    }
    Ok(VariationalFlow { times: traj.times.clone(), matrices })
}

/// State and `Γ(0, t)` tabulated on `t₀ + k h`, evaluated off-grid by RK4 substeps.
pub(crate) struct FlowTable {
    sys: HamiltonianSystem,
    start: f64,
    h: f64,
    states: Vec<Vec64>,
    matrices: Vec<Mat>,
}

impl FlowTable {
    /// Tabulate on `[−pad, horizon + pad]`.
    pub fn new(sys: &HamiltonianSystem, z0: &Vec64, horizon: f64, step: f64, pad: f64) -> Result<Self> {
        sys.check_point(z0)?;
        check_horizon(horizon, step)?;
        let dim = 2 * sys.n();
        let forward = ((horizon + pad) / step).ceil() as usize;
        let backward = (pad / step).ceil() as usize;
        let mut states = vec![z0.clone()];
        let mut matrices = vec![Mat::identity(dim, dim)];
        let mut back_states = Vec::with_capacity(backward);
        let mut back_matrices = Vec::with_capacity(backward);
        let (mut z, mut phi) = (z0.clone(), Mat::identity(dim, dim));
        for k in 1..=backward {
            (z, phi) = rk4_variational(sys, &z, &phi, -step);
            check_state(&z, -(k as f64) * step)?;
            back_states.push(z.clone());
            back_matrices.push(phi.clone());
        }
        let (mut z, mut phi) = (z0.clone(), Mat::identity(dim, dim));
        for k in 1..=forward {
            (z, phi) = rk4_variational(sys, &z, &phi, step);
            check_state(&z, k as f64 * step)?;
            if phi.norm() > BLOWUP_CAP {
                return Err(Error::BlowUp(k as f64 * step));
            }
            states.push(z.clone());
            matrices.push(phi.clone());
        }
        back_states.reverse();
        back_matrices.reverse();
        back_states.extend(states);
        back_matrices.extend(matrices);
        Ok(FlowTable {
            sys: sys.clone(),
            start: -(backward as f64) * step,
            h: step,
            states: back_states,
            matrices: back_matrices,
        })
    }

    /// `(z_t, Γ(0, t))`.
    pub fn at(&self, t: f64) -> (Vec64, Mat) {
        let last = self.states.len() - 1;
        let k = (((t - self.start) / self.h).round().max(0.0) as usize).min(last);
        let tk = self.start + k as f64 * self.h;
        let (mut z, mut phi) = (self.states[k].clone(), self.matrices[k].clone());
        let gap = t - tk;
        if gap != 0.0 {
            let m = (gap.abs() / self.h).ceil().max(1.0) as usize;
            let sub = gap / m as f64;
            for _ in 0..m {
                (z, phi) = rk4_variational(&self.sys, &z, &phi, sub);
            }
        }
        (z, phi)
    }

    /// Frame of `Γ(0, t)⁻¹ · vertical`.
    pub fn jacobi_frame(&self, t: f64) -> Result<Mat> {
        let n = self.sys.n();
        let (_, phi) = self.at(t);
        let mut v = Mat::zeros(2 * n, n);
        v.view_mut((0, 0), (n, n)).fill_with_identity();
        let frame = phi.lu().solve(&v).ok_or(Error::BlowUp(t))?;
        if !frame.iter().all(|x| x.is_finite()) {
            return Err(Error::BlowUp(t));
        }
        Ok(frame)
    }
}

pub(crate) fn padding(horizon: f64, step: f64) -> f64 {
    0.02 * horizon + 2.0 * step
}

/// Smallest finite-difference step used on flow-derived curves; below it rounding dominates.
pub const FLOW_FD_FLOOR: f64 = 1e-3;

/// Differentiation step `min(default, max(2·step, FLOW_FD_FLOOR))` and a grid fine enough for it.
pub(crate) fn tune_flow_curve(curve: GrassmannCurve, step: f64) -> Result<GrassmannCurve> {
    let h = curve.fd_step().min((2.0 * step).max(FLOW_FD_FLOOR));
    let intervals = ((curve.length() / (10.0 * h)).ceil() as usize).max(crate::curve::DEFAULT_GRID_INTERVALS);
    curve.with_grid_intervals(intervals)?.with_fd_step(h)
}

/// Jacobi curve `t ↦ Γ(0, t)⁻¹ · T_{z_t}(fiber)` on `[0, horizon]`.
pub fn jacobi_curve(sys: &HamiltonianSystem, z0: &Vec64, horizon: f64, step: f64) -> Result<GrassmannCurve> {
    let table = Arc::new(FlowTable::new(sys, z0, horizon, step, padding(horizon, step))?);
    tune_flow_curve(GrassmannCurve::new(&standard_space(sys.n()), (0.0, horizon), move |t| table.jacobi_frame(t))?, step)
}
