use crate::curve::{monotonicity, GrassmannCurve, Monotonicity};
use crate::linalg::rank_abs;
use crate::symplectic::{Chart, LagrangianFrame};
use crate::{Error, Result};

use super::pair::pair_index;
use super::walk::{neg_index, refined_samples, train_distance, walk, Piece, WalkOptions};

/// Endpoints closer than this to the train are rejected.
pub const ENDPOINT_TOL: f64 = 1e-8;
/// `Λ(t1) ∩ Λ(t0)` is declared nontrivial below this separation.
pub const DEGENERACY_TOL: f64 = 1e-7;
/// Crossing times are refined to this fraction of the domain length.
pub const CROSSING_TOL: f64 = 1e-10;
/// Crossings closer than this fraction of the domain length are merged.
pub const MERGE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct IndexReport {
    pub value: i64,
    /// Piece boundaries, starting at `t0` and ending at `t1`.
    pub subdivision: Vec<f64>,
    pub charts_used: usize,
    pub endpoint_transversal: bool,
    pub monotone: Monotonicity,
    /// Sum of pair indices over the pieces, when the curve is monotone.
    pub pair_index_sum: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugatePoint {
    pub t: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Default)]
pub struct MaslovOptions {
    pub walk: WalkOptions,
    /// Skip the monotonicity probe and the pair-index cross-check.
    pub skip_pair_check: bool,
}

impl MaslovOptions {
    /// Options whose complement search starts `skip` candidates later.
    pub fn with_schedule_offset(skip: usize) -> Self {
        let mut o = MaslovOptions::default();
        o.walk.search.skip = skip;
        o
    }
}

pub fn maslov_index(c: &GrassmannCurve, pi: &LagrangianFrame) -> Result<IndexReport> {
    maslov_index_with(c, pi, &MaslovOptions::default())
}

/// Maslov index `μ_Π` of a curve with both endpoints off the train.
pub fn maslov_index_with(c: &GrassmannCurve, pi: &LagrangianFrame, opts: &MaslovOptions) -> Result<IndexReport> {
    let (a, b) = c.domain();
    for t in [a, b] {
        if train_distance(&c.frame(t)?, pi) <= ENDPOINT_TOL {
            return Err(Error::EndpointOnTrain(t));
        }
    }
    let samples = refined_samples(c, a, b, opts.walk.max_angle)?;
    let pieces = walk(c, pi, samples, &opts.walk, true)?;
    let value: i64 = pieces.iter().map(Piece::index_drop).sum();

    let monotone = if opts.skip_pair_check { Monotonicity::None } else { monotonicity(c).unwrap_or(Monotonicity::None) };
    let pair_index_sum = match monotone {
        Monotonicity::None => None,
        m => Some(pair_sum(c, pi, &pieces, m)?),
    };
    if let Some(sum) = pair_index_sum {
        if sum != value {
            return Err(Error::IndexMismatch { chart_sum: value, pair_sum: sum });
        }
    }
    let mut subdivision: Vec<f64> = pieces.iter().map(Piece::start).collect();
    subdivision.push(b);
    Ok(IndexReport {
        value,
        subdivision,
        charts_used: pieces.len(),
        endpoint_transversal: true,
        monotone,
        pair_index_sum,
    })
}

/// `Σ ind_Π(Λ(τᵢ), Λ(τᵢ₊₁))` for increasing curves, `−Σ ind_Π(Λ(τᵢ₊₁), Λ(τᵢ))` for decreasing ones.
fn pair_sum(c: &GrassmannCurve, pi: &LagrangianFrame, pieces: &[Piece], m: Monotonicity) -> Result<i64> {
    let mut doubled = 0;
    for p in pieces {
        let (l0, l1) = (c.frame(p.start())?, c.frame(p.end())?);
        doubled += match m {
            Monotonicity::Increasing => pair_index(pi, &l0, &l1).doubled,
            _ => -pair_index(pi, &l1, &l0).doubled,
        };
    }
    if doubled % 2 != 0 {
        return Err(Error::Parity(doubled));
    }
    Ok(doubled / 2)
}

fn index_at(c: &GrassmannCurve, chart: &Chart, t: f64) -> Result<usize> {
    let rep = chart.chart_coords(&c.frame(t)?).map_err(|_| Error::ChartFailure(t))?;
    Ok(neg_index(&rep.s))
}

fn locate(
    c: &GrassmannCurve,
    chart: &Chart,
    (tl, il): (f64, usize),
    (tr, ir): (f64, usize),
    tol: f64,
    out: &mut Vec<ConjugatePoint>,
) -> Result<()> {
    if il == ir {
        return Ok(());
    }
    if tr - tl <= tol {
        out.push(ConjugatePoint { t: 0.5 * (tl + tr), multiplicity: il.abs_diff(ir) });
        return Ok(());
    }
    let tm = 0.5 * (tl + tr);
    let im = index_at(c, chart, tm)?;
    locate(c, chart, (tl, il), (tm, im), tol, out)?;
    locate(c, chart, (tm, im), (tr, ir), tol, out)
}

/// First time after `from` (moving by `dir`) at which the curve is off the train.
fn off_train_time(c: &GrassmannCurve, pi: &LagrangianFrame, from: f64, dir: f64, tol: f64) -> Result<f64> {
    if train_distance(&c.frame(from)?, pi) > tol {
        return Ok(from);
    }
    let mut h = c.fd_step();
    while h <= 0.25 * c.length() {
        let t = from + dir * h;
        if train_distance(&c.frame(t)?, pi) > tol {
            return Ok(t);
        }
        h *= 2.0;
    }
    Err(Error::EndpointOnTrain(from))
}

/// Interior crossings of a regular monotone curve with the train of `Π`.
///
/// Multiplicities are the jumps of `ind S` across each located time.
pub fn conjugate_points(c: &GrassmannCurve, pi: &LagrangianFrame) -> Result<Vec<ConjugatePoint>> {
    conjugate_points_with(c, pi, &WalkOptions::default())
}

pub fn conjugate_points_with(c: &GrassmannCurve, pi: &LagrangianFrame, opts: &WalkOptions) -> Result<Vec<ConjugatePoint>> {
    if monotonicity(c)? == Monotonicity::None {
        return Err(Error::NotMonotone);
    }
    let (a, b) = c.domain();
    let start = off_train_time(c, pi, a, 1.0, ENDPOINT_TOL)?;
    let end = off_train_time(c, pi, b, -1.0, ENDPOINT_TOL)?;
    if end <= start {
        return Ok(Vec::new());
    }
    let samples = refined_samples(c, start, end, opts.max_angle)?;
    let pieces = walk(c, pi, samples, opts, false)?;
    let tol = CROSSING_TOL * c.length();
    let mut found = Vec::new();
    for p in &pieces {
        for k in 0..p.times.len() - 1 {
            let l = (p.times[k], neg_index(&p.values[k]));
            let r = (p.times[k + 1], neg_index(&p.values[k + 1]));
            locate(c, &p.chart, l, r, tol, &mut found)?;
        }
    }
    Ok(merge(found, MERGE_TOL * c.length()))
}

fn merge(points: Vec<ConjugatePoint>, gap: f64) -> Vec<ConjugatePoint> {
    let mut out: Vec<ConjugatePoint> = Vec::new();
    for p in points {
        match out.last_mut() {
            Some(q) if p.t - q.t <= gap => {
                let total = q.multiplicity + p.multiplicity;
                q.t = (q.t * q.multiplicity as f64 + p.t * p.multiplicity as f64) / total as f64;
                q.multiplicity = total;
            }
            _ => out.push(p),
        }
    }
    out
}

/// Morse index of a regular extremal from its Jacobi curve: interior conjugate
/// multiplicities with respect to `Π = Λ(t0)`.
pub fn morse_index_regular_extremal(jc: &GrassmannCurve) -> Result<usize> {
    let (a, b) = jc.domain();
    let pi = jc.frame(a)?;
    let end = jc.frame(b)?;
    let meet = jc.space().pairing(end.columns(), pi.columns());
    let dim = jc.n() - rank_abs(&meet, DEGENERACY_TOL);
    if dim > 0 {
        return Err(Error::DegenerateEndpoint(dim));
    }
    Ok(conjugate_points(jc, &pi)?.iter().map(|p| p.multiplicity).sum())
}
