use crate::linalg::{singular_values, spectral_norm, Mat};
use crate::symplectic::matrix_inertia;
use crate::Result;

use super::local::{centered_chart, chart_matrix, frames_around, jet_from_values, STENCIL_HALF_WIDTH};
use super::ops::{curvature_matrix_in_chart, derivative_curve, derivative_curve_path, regular_inverse};
use super::GrassmannCurve;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    None,
}

impl Monotonicity {
    pub fn sign(self) -> f64 {
        match self {
            Monotonicity::Increasing => 1.0,
            Monotonicity::Decreasing => -1.0,
            Monotonicity::None => 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub regular: bool,
    pub monotone: Monotonicity,
    pub flat: bool,
    pub symmetric: bool,
    /// `Some(agrees)` when the `v°° = v` test applied at some sample (invertible curvature).
    pub symmetric_crosscheck: Option<bool>,
    pub max_curvature_norm: f64,
}

const FLAT_TOL: f64 = 1e-6;
/// `σ_min(Ṡ) / σ_max(Ṡ)` at or below this marks a degenerate velocity.
const RELATIVE_REGULARITY_TOL: f64 = 1e-8;
const SYMMETRY_TOL: f64 = 1e-4;
const SECOND_DERIVATIVE_TOL: f64 = 1e-4;
const CROSSCHECK_SAMPLES: usize = 5;

struct PointData {
    regular: bool,
    sign: f64,
    curvature_norm: f64,
    symmetric_residual: f64,
    curvature_invertible: bool,
}

fn analyze_point(c: &GrassmannCurve, t: f64) -> Result<PointData> {
    let h = c.fd_step();
    let frames = frames_around(c, t, STENCIL_HALF_WIDTH + 1)?;
    let mid = STENCIL_HALF_WIDTH + 1;
    let others: Vec<_> = frames.iter().enumerate().filter(|(i, _)| *i != mid).map(|(_, f)| f.clone()).collect();
    let chart = centered_chart(&frames[mid], &others, t)?;
    let values = frames.iter().map(|f| chart_matrix(&chart, f, t)).collect::<Result<Vec<Mat>>>()?;
    let jets: Vec<_> = (0..3).map(|k| jet_from_values(&chart, t + (k as f64 - 1.0) * h, h, &values[k..k + 7])).collect();
    let center = &jets[1];
    let inertia = matrix_inertia(&center.s1, c.space().rank_tol());
    let sign = if inertia.is_positive_definite() {
        1.0
    } else if inertia.is_negative_definite() {
        -1.0
    } else {
        0.0
    };
    let inv = match regular_inverse(&center.s1, t) {
        Ok(m) => m,
        Err(_) => {
            return Ok(PointData {
                regular: false,
                sign,
                curvature_norm: f64::NAN,
                symmetric_residual: f64::INFINITY,
                curvature_invertible: false,
            })
        }
    };
    let r: Vec<Mat> = jets.iter().map(curvature_matrix_in_chart).collect::<Result<_>>()?;
    let rdot = (&r[2] - &r[0]) / (2.0 * h);
    let b = &inv * &center.s2 * -0.5;
    let residual = rdot + &r[1] * &b - &b * &r[1];
    let rn = spectral_norm(&r[1]);
    let smallest = r[1].clone().svd(false, false).singular_values.min();
    Ok(PointData {
        regular: true,
        sign,
        curvature_norm: rn,
        symmetric_residual: spectral_norm(&residual) / (1.0 + rn),
        curvature_invertible: smallest > 1e-6 * rn.max(1.0),
    })
}

/// Sign of the velocity form on the grid: `NotRegular` if `Ṡ` degenerates somewhere,
/// `Monotonicity::None` if it is indefinite or changes sign.
///
/// Degeneracy is judged relative to `‖Ṡ‖`, so curves whose velocity decays uniformly
/// (orbits approaching a hyperbolic equilibrium) stay monotone.
pub fn monotonicity(c: &GrassmannCurve) -> Result<Monotonicity> {
    let mut pos = true;
    let mut neg = true;
    for &t in c.grid() {
        let j = super::local::jet(c, t)?;
        let sv = singular_values(&j.s1);
        let top = sv.iter().copied().fold(0.0, f64::max);
        if !(top > 0.0) || sv.iter().copied().fold(f64::INFINITY, f64::min) <= RELATIVE_REGULARITY_TOL * top {
            return Err(crate::Error::NotRegular(t));
        }
        let inertia = matrix_inertia(&j.s1, c.space().rank_tol());
        pos &= inertia.is_positive_definite();
        neg &= inertia.is_negative_definite();
        if !pos && !neg {
            return Ok(Monotonicity::None);
        }
    }
    Ok(if pos { Monotonicity::Increasing } else { Monotonicity::Decreasing })
}

/// Grid-based flags: regularity, monotonicity, flatness and symmetry.
///
/// Symmetry is tested through the transport equation in a chart: `A(t) = V_t⁻¹ R V_t`
/// is constant iff `Ṙ + [R, B] = 0` with `B = −½ Ṡ⁻¹ S̈`.
pub fn classify(c: &GrassmannCurve) -> Result<Classification> {
    let mut regular = true;
    let mut signs = Vec::new();
    let mut max_norm: f64 = 0.0;
    let mut symmetric = true;
    let mut invertible_at = Vec::new();
    for &t in c.grid() {
        let p = analyze_point(c, t)?;
        regular &= p.regular;
        signs.push(p.sign);
        if p.regular {
            max_norm = max_norm.max(p.curvature_norm);
            symmetric &= p.symmetric_residual <= SYMMETRY_TOL;
            if p.curvature_invertible {
                invertible_at.push(t);
            }
        }
    }
    let monotone = if signs.iter().all(|&s| s > 0.0) {
        Monotonicity::Increasing
    } else if signs.iter().all(|&s| s < 0.0) {
        Monotonicity::Decreasing
    } else {
        Monotonicity::None
    };
    if !regular {
        return Ok(Classification {
            regular,
            monotone,
            flat: false,
            symmetric: false,
            symmetric_crosscheck: None,
            max_curvature_norm: max_norm,
        });
    }
    let flat = max_norm <= FLAT_TOL;
    let symmetric = symmetric || flat;

    let symmetric_crosscheck = if invertible_at.is_empty() {
        None
    } else {
        let dc = derivative_curve_path(c)?;
        let stride = (invertible_at.len() / CROSSCHECK_SAMPLES).max(1);
        let mut all_close = true;
        for &t in invertible_at.iter().step_by(stride) {
            let back = derivative_curve(&dc, t)?;
            all_close &= back.distance(&c.frame(t)?) <= SECOND_DERIVATIVE_TOL;
        }
        Some(all_close == symmetric)
    };

    Ok(Classification { regular, monotone, flat, symmetric, symmetric_crosscheck, max_curvature_norm: max_norm })
}
