use crate::linalg::Mat;
use crate::symplectic::{transversal_complement, Chart, LagrangianFrame};
use crate::{Error, Result};

use super::GrassmannCurve;

/// Stencils use offsets `−3h … 3h`.
pub const STENCIL_HALF_WIDTH: usize = 3;

const D1: [f64; 7] = [-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
const D2: [f64; 7] = [1.0 / 90.0, -3.0 / 20.0, 3.0 / 2.0, -49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];
const D3: [f64; 7] = [1.0 / 8.0, -1.0, 13.0 / 8.0, 0.0, -13.0 / 8.0, 1.0, -1.0 / 8.0];

/// `S(t)` and its first three derivatives in a frozen chart.
#[derive(Debug, Clone)]
pub struct Jet {
    pub t: f64,
    pub chart: Chart,
    pub s: Mat,
    pub s1: Mat,
    pub s2: Mat,
    pub s3: Mat,
}

impl Jet {
    /// Basis `ζ ↦ (ζ, S(t) ζ)` of `Λ(t)` in which jet-derived operators are expressed.
    pub fn basis(&self) -> Mat {
        self.chart.graph_basis(&self.s)
    }
}

pub(crate) fn frames_around(c: &GrassmannCurve, t: f64, half_width: usize) -> Result<Vec<LagrangianFrame>> {
    let h = c.fd_step();
    let k = half_width as i64;
    (-k..=k).map(|i| c.frame(t + i as f64 * h)).collect()
}

/// Chart centered at `center`, with complement transversal to every frame in `others`.
pub(crate) fn centered_chart(center: &LagrangianFrame, others: &[LagrangianFrame], t: f64) -> Result<Chart> {
    let delta = transversal_complement(center, others).map_err(|_| Error::ChartFailure(t))?;
    Chart::new(center, &delta).map_err(|_| Error::ChartFailure(t))
}

pub(crate) fn chart_matrix(chart: &Chart, l: &LagrangianFrame, t: f64) -> Result<Mat> {
    chart.chart_coords(l).map(|r| r.s).map_err(|e| match e {
        Error::NotInChart => Error::ChartFailure(t),
        other => other,
    })
}

fn combine(values: &[Mat], weights: &[f64; 7], scale: f64) -> Mat {
    let mut acc = Mat::zeros(values[0].nrows(), values[0].ncols());
    for (v, w) in values.iter().zip(weights) {
        if *w != 0.0 {
            acc += v * *w;
        }
    }
    acc / scale
}

/// Derivatives from seven chart matrices at `t + kh`, `k = −3…3`.
pub(crate) fn jet_from_values(chart: &Chart, t: f64, h: f64, values: &[Mat]) -> Jet {
    debug_assert_eq!(values.len(), 7);
    Jet {
        t,
        chart: chart.clone(),
        s: values[3].clone(),
        s1: combine(values, &D1, h),
        s2: combine(values, &D2, h * h),
        s3: combine(values, &D3, h * h * h),
    }
}

pub(crate) fn first_derivative(values: &[Mat], h: f64) -> Mat {
    combine(values, &D1, h)
}

/// Jet of the curve at `t` in a chart centered at `Λ(t)`.
pub fn jet(c: &GrassmannCurve, t: f64) -> Result<Jet> {
    let frames = frames_around(c, t, STENCIL_HALF_WIDTH)?;
    jet_from_frames(&frames, t, c.fd_step())
}

pub(crate) fn jet_from_frames(frames: &[LagrangianFrame], t: f64, h: f64) -> Result<Jet> {
    let center = &frames[STENCIL_HALF_WIDTH];
    let others: Vec<LagrangianFrame> =
        frames.iter().enumerate().filter(|(i, _)| *i != STENCIL_HALF_WIDTH).map(|(_, f)| f.clone()).collect();
    let chart = centered_chart(center, &others, t)?;
    let values = frames.iter().map(|f| chart_matrix(&chart, f, t)).collect::<Result<Vec<_>>>()?;
    Ok(jet_from_values(&chart, t, h, &values))
}
