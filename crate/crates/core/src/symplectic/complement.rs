use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::Mat;
use crate::{Error, Result};

use super::chart::Chart;
use super::frame::{transversality, LagrangianFrame};

/// Number of `±k·I` graphs tried after the canonical complement.
pub const SCALAR_CANDIDATES: usize = 16;
/// Number of seeded random symmetric graphs tried last.
pub const RANDOM_CANDIDATES: usize = 64;
/// Upper bound on the candidate index returned by the search.
pub const CANDIDATE_BOUND: usize = 1 + SCALAR_CANDIDATES + RANDOM_CANDIDATES;

/// Controls for [`transversal_complement_with`].
#[derive(Debug, Clone)]
pub struct ComplementSearch {
    pub seed: u64,
    /// Candidates to skip at the start of the schedule (used to obtain alternative charts).
    pub skip: usize,
    /// Separation accepted immediately; otherwise the best candidate above `rank_tol` wins.
    pub margin: f64,
}

impl Default for ComplementSearch {
    fn default() -> Self {
        ComplementSearch { seed: 0x5eed, skip: 0, margin: 0.05 }
    }
}

#[derive(Debug, Clone)]
pub struct Complement {
    pub frame: LagrangianFrame,
    pub index: usize,
    pub separation: f64,
}

pub fn transversal_complement(l: &LagrangianFrame, avoid: &[LagrangianFrame]) -> Result<LagrangianFrame> {
    transversal_complement_with(l, avoid, &ComplementSearch::default()).map(|c| c.frame)
}

/// Deterministic search: canonical complement, graphs of `k·I` for `k = 1, −1, 2, −2, …`
/// over it, then seeded random symmetric graphs.
pub fn transversal_complement_with(
    l: &LagrangianFrame,
    avoid: &[LagrangianFrame],
    search: &ComplementSearch,
) -> Result<Complement> {
    let space = l.space();
    let n = space.n();
    let canonical = LagrangianFrame::new(space, space.canonical_complement(l.columns()))?;
    let chart = Chart::new(l, &canonical)?;
    let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
    let separation = |d: &LagrangianFrame| {
        std::iter::once(l)
            .chain(avoid.iter())
            .map(|a| transversality(a.columns(), d.columns()))
            .fold(f64::INFINITY, f64::min)
    };
    let mut best: Option<Complement> = None;
    for index in 0..CANDIDATE_BOUND {
        let candidate = if index == 0 {
            canonical.clone()
        } else if index <= SCALAR_CANDIDATES {
            let k = index.div_ceil(2) as f64;
            let sign = if index % 2 == 1 { 1.0 } else { -1.0 };
            chart.frame_from_chart(&(Mat::identity(n, n) * (sign * k)))?
        } else {
            let mut s = Mat::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = 2.0 * rng.random::<f64>() - 1.0;
                    s[(i, j)] = 2.0 * v;
                    s[(j, i)] = 2.0 * v;
                }
            }
            chart.frame_from_chart(&s)?
        };
        if index < search.skip {
            continue;
        }
        let sep = separation(&candidate);
        if sep >= search.margin {
            return Ok(Complement { frame: candidate, index, separation: sep });
        }
        if sep > space.rank_tol() && best.as_ref().is_none_or(|b| sep > b.separation) {
            best = Some(Complement { frame: candidate, index, separation: sep });
        }
    }
    best.ok_or(Error::SearchExhausted(CANDIDATE_BOUND))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::space::SymplecticSpace;

    #[test]
    fn vertical_gets_horizontal_first() {
        let s = SymplecticSpace::standard(2);
        let c = transversal_complement_with(&s.vertical(), &[], &ComplementSearch::default()).unwrap();
        assert_eq!(c.index, 0);
        assert!(c.frame.same_subspace(&s.horizontal(), 1e-12));
    }

    #[test]
    fn horizontal_avoiding_vertical_takes_identity_graph() {
        let s = SymplecticSpace::standard(1);
        let c = transversal_complement_with(&s.horizontal(), &[s.vertical()], &ComplementSearch::default())
            .unwrap();
        assert_eq!(c.index, 1);
        let z = c.frame.columns();
        // Both transversality determinants are nonzero.
        assert!(z[(0, 0)].abs() > 0.5 && z[(1, 0)].abs() > 0.5);
    }
}
