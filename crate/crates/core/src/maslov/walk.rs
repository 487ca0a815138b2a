use crate::curve::GrassmannCurve;
use crate::linalg::{sorted_symmetric_eigenvalues, Mat};
use crate::symplectic::{transversal_complement_with, transversality, Chart, ComplementSearch, LagrangianFrame};
use crate::{Error, Result};

/// Maximum number of interval halvings.
pub const MAX_DEPTH: u32 = 32;

/// Controls for the chart walk along a curve.
#[derive(Debug, Clone)]
pub struct WalkOptions {
    pub search: ComplementSearch,
    /// Largest principal-angle sine allowed between consecutive samples.
    pub max_angle: f64,
    /// A piece ends once the curve comes this close to the chart complement. Must
    /// exceed the separation change over one step (about `√2 · max_angle`).
    pub chart_margin: f64,
    /// Interior piece ends must be at least this far from the train.
    pub train_tol: f64,
}

impl Default for WalkOptions {
    fn default() -> Self {
        WalkOptions {
            search: ComplementSearch { margin: 0.5, ..ComplementSearch::default() },
            max_angle: 0.05,
            chart_margin: 0.2,
            train_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Sample {
    pub t: f64,
    pub frame: LagrangianFrame,
}

/// One stretch of the curve inside a single chart `(Π, Δ)`.
#[derive(Debug, Clone)]
pub(crate) struct Piece {
    pub chart: Chart,
    pub times: Vec<f64>,
    pub values: Vec<Mat>,
}

impl Piece {
    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Piece contribution `ind S(start) − ind S(end)`.
    pub fn index_drop(&self) -> i64 {
        neg_index(&self.values[0]) as i64 - neg_index(self.values.last().unwrap()) as i64
    }
}

/// Negative eigenvalue count of a symmetric matrix, no threshold.
pub(crate) fn neg_index(s: &Mat) -> usize {
    sorted_symmetric_eigenvalues(s).iter().filter(|&&v| v < 0.0).count()
}

pub(crate) fn train_distance(frame: &LagrangianFrame, pi: &LagrangianFrame) -> f64 {
    transversality(frame.columns(), pi.columns())
}

/// Samples on `[a, b]` from the curve grid, halved until consecutive frames are close.
pub(crate) fn refined_samples(c: &GrassmannCurve, a: f64, b: f64, max_angle: f64) -> Result<Vec<Sample>> {
    let mut times = vec![a];
    times.extend(c.grid().iter().copied().filter(|&t| t > a && t < b));
    times.push(b);
    let mut out = vec![Sample { t: a, frame: c.frame(a)? }];
    for w in times.windows(2) {
        let right = Sample { t: w[1], frame: c.frame(w[1])? };
        refine_between(c, out.last().unwrap().clone(), right, max_angle, 0, &mut out)?;
    }
    Ok(out)
}

fn refine_between(
    c: &GrassmannCurve,
    left: Sample,
    right: Sample,
    max_angle: f64,
    depth: u32,
    out: &mut Vec<Sample>,
) -> Result<()> {
    if left.frame.distance(&right.frame) <= max_angle {
        out.push(right);
        return Ok(());
    }
    if depth >= MAX_DEPTH {
        return Err(Error::SubdivisionFailure(left.t));
    }
    let tm = 0.5 * (left.t + right.t);
    let mid = Sample { t: tm, frame: c.frame(tm)? };
    refine_between(c, left, mid.clone(), max_angle, depth + 1, out)?;
    refine_between(c, mid, right, max_angle, depth + 1, out)
}

/// Cover the samples by pieces, each inside one chart `(Π, Δᵢ)` with `Δᵢ ⋔ Π`.
///
/// With `off_train` set, interior piece ends are kept `train_tol` away from the train.
pub(crate) fn walk(
    c: &GrassmannCurve,
    pi: &LagrangianFrame,
    mut samples: Vec<Sample>,
    opts: &WalkOptions,
    off_train: bool,
) -> Result<Vec<Piece>> {
    let min_gap = c.length() * 0.5f64.powi(MAX_DEPTH as i32);
    let mut pieces = Vec::new();
    let mut i = 0;
    while i + 1 < samples.len() {
        let start = &samples[i];
        let delta = transversal_complement_with(&start.frame, std::slice::from_ref(pi), &opts.search)
            .map_err(|_| Error::SubdivisionFailure(start.t))?
            .frame;
        let chart = Chart::new(pi, &delta).map_err(|_| Error::SubdivisionFailure(start.t))?;
        let first = chart.chart_coords(&start.frame).map_err(|_| Error::SubdivisionFailure(start.t))?.s;
        let mut times = vec![start.t];
        let mut values = vec![first];
        let mut last_ok = 0;
        let mut j = i + 1;
        while j < samples.len() {
            let s = &samples[j];
            if transversality(s.frame.columns(), delta.columns()) < opts.chart_margin {
                break;
            }
            let Ok(rep) = chart.chart_coords(&s.frame) else { break };
            times.push(s.t);
            values.push(rep.s);
            let last = j + 1 == samples.len();
            if last || !off_train || train_distance(&s.frame, pi) >= opts.train_tol {
                last_ok = times.len() - 1;
            }
            j += 1;
        }
        if last_ok == 0 {
            let (t0, t1) = (samples[i].t, samples[i + 1].t);
            if t1 - t0 <= min_gap {
                return Err(Error::SubdivisionFailure(t0));
            }
            let tm = 0.5 * (t0 + t1);
            samples.insert(i + 1, Sample { t: tm, frame: c.frame(tm)? });
            continue;
        }
        times.truncate(last_ok + 1);
        values.truncate(last_ok + 1);
        pieces.push(Piece { chart, times, values });
        i += last_ok;
    }
    Ok(pieces)
}
