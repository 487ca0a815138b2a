//! Command dispatch: one library analysis per command, flattened into a [`RunResult`].

use jacobi_curves::analysis::{
    analyze_equilibrium, certify_negative_curvature, comparison_check, decay_rate, morse_pipeline, CertificateKind,
    Equilibrium, DEFAULT_TRIM_FRACTION,
};
use jacobi_curves::curve::{curvature, monotonicity, GrassmannCurve, Monotonicity};
use jacobi_curves::hamiltonian::{
    curvature_operator_field, flow, jacobi_curve, reduced_jacobi_curve, variational_flow, HamiltonianSystem, Trajectory,
};
use jacobi_curves::lderivative::{check_fiber_transversality, family_index_delta, l_derivative, LDerivData};
use jacobi_curves::linalg::{Mat, Vec64};
use jacobi_curves::maslov::{conjugate_points, maslov_index};
use jacobi_curves::symplectic::sampling::{random_matrix, random_symmetric};
use jacobi_curves::symplectic::{matrix_inertia, LagrangianFrame};
use jacobi_curves::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Command, Reference, RunConfig};
use crate::output::{matrix_columns, num, nums, vector_columns, RunResult, Table};
use crate::system::{build_system, initial_point};

/// Runs a validated config. `parallel` spreads independent evaluations over threads;
/// results are assembled in order, so outputs do not depend on it.
pub fn execute(cfg: &RunConfig, command: Command, parallel: bool) -> Result<RunResult> {
    let ctx = Ctx { cfg, sys: build_system(cfg)?, z0: initial_point(cfg), parallel };
    ctx.sys.check_point(&ctx.z0)?;
    match command {
        Command::Flow => ctx.flow(),
        Command::Jacobi => ctx.jacobi(),
        Command::Curvature => ctx.curvature(),
        Command::Conjugate => ctx.conjugate(),
        Command::Morse => ctx.morse(),
        Command::Maslov => ctx.maslov(),
        Command::Reduce => ctx.reduce(),
        Command::Compare => ctx.compare(),
        Command::Hyperbolic => ctx.hyperbolic(),
        Command::Lderiv => ctx.lderiv(),
    }
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    sys: HamiltonianSystem,
    z0: Vec64,
    parallel: bool,
}

fn mono_name(m: Monotonicity) -> &'static str {
    match m {
        Monotonicity::Increasing => "increasing",
        Monotonicity::Decreasing => "decreasing",
        Monotonicity::None => "none",
    }
}

/// Up to `samples` evenly spread indices of `0..len`, first and last included.
fn sample_indices(len: usize, samples: usize) -> Vec<usize> {
    if len <= samples {
        return (0..len).collect();
    }
    let mut out: Vec<usize> =
        (0..samples).map(|k| ((k as f64) * (len - 1) as f64 / (samples - 1) as f64).round() as usize).collect();
    out.dedup();
    out
}

fn flatten(m: &Mat) -> Vec<f64> {
    (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)])).collect()
}

fn sorted_real_parts(m: &Mat) -> Vec<f64> {
    let mut v: Vec<f64> = m.complex_eigenvalues().iter().map(|e| e.re).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

impl Ctx<'_> {
    fn n(&self) -> usize {
        self.sys.n()
    }

    fn map<T, U, F>(&self, items: &[T], f: F) -> Result<Vec<U>>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> Result<U> + Sync + Send,
    {
        if self.parallel {
            items.par_iter().map(f).collect()
        } else {
            items.iter().map(f).collect()
        }
    }

    fn trajectory(&self) -> Result<Trajectory> {
        flow(&self.sys, &self.z0, self.cfg.horizon, self.cfg.step)
    }

    fn sample_times(&self, traj: &Trajectory) -> Vec<(f64, usize)> {
        sample_indices(traj.times.len(), self.cfg.options.samples).into_iter().map(|k| (traj.times[k], k)).collect()
    }

    fn with_fd(&self, c: GrassmannCurve) -> Result<GrassmannCurve> {
        match self.cfg.tolerances.fd_step {
            Some(h) => c.with_fd_step(h),
            None => Ok(c),
        }
    }

    fn jacobi_curve(&self) -> Result<GrassmannCurve> {
        self.with_fd(jacobi_curve(&self.sys, &self.z0, self.cfg.horizon, self.cfg.step)?)
    }

    /// Left end of a trimmed interval: the configured trim, else a fraction of the
    /// first time the curve returns to `pi` (or of the horizon).
    fn trim(&self, jc: &GrassmannCurve, pi: &LagrangianFrame) -> Result<f64> {
        if let Some(t) = self.cfg.options.trim {
            return Ok(t);
        }
        let limit = conjugate_points(jc, pi)?.first().map_or(self.cfg.horizon, |p| p.t);
        Ok(DEFAULT_TRIM_FRACTION * limit)
    }

    fn flow(&self) -> Result<RunResult> {
        let n = self.n();
        let traj = self.trajectory()?;
        let var = variational_flow(&self.sys, &traj)?;
        let mut cols = vec!["t".to_string()];
        cols.extend(vector_columns("x", n));
        cols.extend(vector_columns("y", n));
        cols.push("energy".into());
        let mut table = Table::new(cols);
        for (t, k) in self.sample_times(&traj) {
            let mut row = vec![t];
            row.extend(traj.states[k].iter());
            row.push(traj.energies[k]);
            table.push(row);
        }
        let mut r = RunResult::new("flow", table);
        let drift = traj.energy_drift();
        let defect = var.symplectic_defect();
        r.set_num("energy_drift", drift);
        r.set("energy_ok", drift <= self.cfg.tolerances.energy_tol);
        r.set_num("symplectic_defect", defect);
        r.set("symplectic_ok", defect <= self.cfg.tolerances.symp_tol);
        r.set("steps", traj.times.len() - 1);
        r.set("final_state", nums(traj.last().as_slice()));
        if drift > self.cfg.tolerances.energy_tol {
            r.diagnostics.push(format!("energy drift {drift:.3e} exceeds energy_tol"));
        }
        if defect > self.cfg.tolerances.symp_tol {
            r.diagnostics.push(format!("symplectic defect {defect:.3e} exceeds symp_tol"));
        }
        Ok(r)
    }

    fn jacobi(&self) -> Result<RunResult> {
        let n = self.n();
        let traj = self.trajectory()?;
        let jc = self.jacobi_curve()?;
        let mut cols = vec!["t".to_string()];
        cols.extend(matrix_columns("frame", 2 * n, n));
        let rows = self.map(&self.sample_times(&traj), |(t, _)| {
            let mut row = vec![*t];
            row.extend(flatten(&jc.raw(*t)?));
            Ok(row)
        })?;
        let mut table = Table::new(cols);
        rows.into_iter().for_each(|row| table.push(row));
        let mut r = RunResult::new("jacobi", table);
        r.set("monotone", mono_name(monotonicity(&jc)?));
        r.set("n", n);
        Ok(r)
    }

    fn curvature(&self) -> Result<RunResult> {
        let n = self.n();
        let traj = self.trajectory()?;
        let jc = self.jacobi_curve()?;
        let mut cols = vec!["t".to_string()];
        cols.extend(matrix_columns("R", n, n));
        cols.extend(vector_columns("eig", n));
        cols.extend(vector_columns("jacobi_eig", n));
        let rows = self.map(&self.sample_times(&traj), |(t, k)| {
            let field = curvature_operator_field(&self.sys, &traj.states[*k]).map_err(|e| match e {
                Error::NotRegular(_) => Error::NotRegular(*t),
                other => other,
            })?;
            let mut row = vec![*t];
            row.extend(flatten(&field));
            row.extend(sorted_real_parts(&field));
            row.extend(sorted(curvature(&jc, *t)?.real_spectrum()));
            Ok(row)
        })?;
        let mut r = RunResult::new("curvature", Table::new(cols));
        let first = rows[0].clone();
        let (eig0, jac0) = (&first[1 + n * n..1 + n * n + n], &first[1 + n * n + n..]);
        let mut upper = f64::NEG_INFINITY;
        let mut lower = f64::INFINITY;
        let mut discrepancy: f64 = 0.0;
        for row in &rows {
            let (e, j) = (&row[1 + n * n..1 + n * n + n], &row[1 + n * n + n..]);
            upper = upper.max(e[n - 1]);
            lower = lower.min(e[0]);
            discrepancy = e.iter().zip(j).fold(discrepancy, |m, (a, b)| m.max((a - b).abs()));
        }
        r.set("eigenvalues_t0", nums(eig0));
        r.set("jacobi_eigenvalues_t0", nums(jac0));
        r.set_num("eig_max", upper);
        r.set_num("eig_min", lower);
        r.set_num("field_vs_curve_max_difference", discrepancy);
        rows.into_iter().for_each(|row| r.series.push(row));
        Ok(r)
    }

    fn conjugate(&self) -> Result<RunResult> {
        let jc = self.jacobi_curve()?;
        let points = conjugate_points(&jc, &jc.frame(0.0)?)?;
        let mut table = Table::new(vec!["t".into(), "multiplicity".into()]);
        for p in &points {
            table.push(vec![p.t, p.multiplicity as f64]);
        }
        let mut r = RunResult::new("conjugate", table);
        r.set("count", points.len());
        r.set("total_multiplicity", points.iter().map(|p| p.multiplicity).sum::<usize>());
        r.set("times", nums(&points.iter().map(|p| p.t).collect::<Vec<_>>()));
        Ok(r)
    }

    fn morse(&self) -> Result<RunResult> {
        let m = morse_pipeline(&self.sys, &self.z0, self.cfg.horizon, self.cfg.step, self.cfg.options.trim)?;
        let mut table = Table::new(vec!["t".into(), "multiplicity".into()]);
        for p in &m.conjugate_points {
            table.push(vec![p.t, p.multiplicity as f64]);
        }
        let mut r = RunResult::new("morse", table);
        r.set("index", m.index);
        r.set("trimmed_maslov", m.trimmed_maslov);
        r.set("index_from_maslov", m.index_from_maslov());
        r.set("agrees", m.agrees());
        r.set_num("trim", m.trim);
        r.set("monotone", mono_name(m.monotone));
        r.set("legendre", mono_name(m.legendre.definite));
        r.set_num("legendre_min_abs_eigenvalue", m.legendre.min_abs_eigenvalue);
        if !m.agrees() {
            r.diagnostics.push("conjugate count and trimmed Maslov index disagree".into());
        }
        Ok(r)
    }

    fn maslov(&self) -> Result<RunResult> {
        let jc = self.jacobi_curve()?;
        let space = jc.space().clone();
        let reference = self.cfg.options.reference;
        let pi = match reference {
            Reference::Initial => jc.frame(0.0)?,
            Reference::Vertical => space.vertical(),
            Reference::Horizontal => space.horizontal(),
        };
        let start = match (reference, self.cfg.options.trim) {
            (Reference::Horizontal, None) => 0.0,
            _ => self.trim(&jc, &pi)?,
        };
        let rep = maslov_index(&jc.restrict(start, self.cfg.horizon)?, &pi)?;
        let mut table = Table::new(vec!["t".into()]);
        for t in &rep.subdivision {
            table.push(vec![*t]);
        }
        let mut r = RunResult::new("maslov", table);
        r.set("value", rep.value);
        r.set_num("start", start);
        r.set("reference", format!("{reference:?}").to_lowercase());
        r.set("charts_used", rep.charts_used);
        r.set("endpoint_transversal", rep.endpoint_transversal);
        r.set("monotone", mono_name(rep.monotone));
        r.set("pair_index_sum", rep.pair_index_sum.map_or(Value::Null, |v| json!(v)));
        Ok(r)
    }

    fn reduce(&self) -> Result<RunResult> {
        let n = self.n();
        let traj = self.trajectory()?;
        let red = reduced_jacobi_curve(&self.sys, &self.z0, self.cfg.horizon, self.cfg.step)?;
        let curve = self.with_fd(red.curve.clone())?;
        let tol = self.cfg.tolerances.rank_tol;
        let mut cols = vec!["t".to_string(), "gap_min".into(), "gap_rank".into()];
        cols.extend(vector_columns("reduced_eig", n - 1));
        let rows = self.map(&self.sample_times(&traj), |(t, _)| {
            let gap = red.curvature_gap(*t)?;
            let mut row = vec![*t, gap.min(), gap.rank(tol * gap.scale.max(1.0)) as f64];
            row.extend(sorted(curvature(&curve, *t)?.real_spectrum()));
            Ok(row)
        })?;
        let mut r = RunResult::new("reduce", Table::new(cols));
        let transversality = fiber_transversality(&self.sys, &traj);
        r.set_num("min_fiber_transversality", transversality);
        if transversality < FIBER_WARNING {
            r.diagnostics.push(format!(
                "the field comes within {transversality:.3e} of the fiber along the orbit; the reduced curve is nearly singular there"
            ));
        }
        let gap_min = rows.iter().fold(f64::INFINITY, |m, row| m.min(row[1]));
        let gap_rank = rows.iter().fold(0.0f64, |m, row| m.max(row[2]));
        let scale = rows.iter().map(|row| row[0]).try_fold(1.0f64, |m, t| Ok::<_, Error>(m.max(red.curvature_gap(t)?.scale)))?;
        r.set_num("gap_min", gap_min);
        r.set("gap_rank_max", gap_rank as usize);
        r.set("dominance_holds", gap_min >= -tol * scale);
        r.set("rank_bound_holds", gap_rank <= 1.0);

        let full = red.full.clone();
        let vertical = full.space().vertical();
        let start = self.trim(&full, &vertical)?;
        let piece = full.restrict(start, self.cfg.horizon)?;
        let rpiece = red.curve.restrict(start, self.cfg.horizon)?;
        let mu = maslov_index(&piece, &vertical)?.value;
        let mu_red = maslov_index(&rpiece, &rpiece.space().vertical())?.value;
        let mono = monotonicity(&full)?;
        r.set("maslov", mu);
        r.set("maslov_reduced", mu_red);
        r.set_num("start", start);
        r.set("monotone", mono_name(mono));
        r.set("reduced_dim", red.reduction.reduced_dim());
        match mono {
            Monotonicity::None => {
                r.set("maslov_difference", Value::Null);
                r.set("maslov_bound_holds", false);
                r.diagnostics.push("full Jacobi curve is not monotone; the Maslov bound does not apply".into());
            }
            m => {
                let diff = m.sign() as i64 * (mu_red - mu);
                r.set("maslov_difference", diff);
                r.set("maslov_bound_holds", (0..=1).contains(&diff));
            }
        }
        rows.into_iter().for_each(|row| r.series.push(row));
        Ok(r)
    }

    fn compare(&self) -> Result<RunResult> {
        let c = comparison_check(&self.sys, &self.z0, self.cfg.horizon, self.cfg.step)?;
        let mut table = Table::new(vec!["t".into(), "length".into(), "first_conjugate".into()]);
        for w in &c.windows {
            table.push(vec![w.start, w.length, w.first_conjugate.unwrap_or(f64::INFINITY)]);
        }
        let mut r = RunResult::new("compare", table);
        r.set_num("eig_upper", c.eig_upper);
        r.set_num("trace_lower", c.trace_lower);
        r.set_num("min_gap", c.min_gap);
        r.set_num("bound_gap", c.bound_gap);
        r.set_num("bound_hit", c.bound_hit);
        r.set_num("step", c.step);
        r.set("conjugate_times", nums(&c.conjugate_times));
        r.set("gap_bound_holds", c.gap_bound_holds());
        r.set("hit_bound_holds", c.hit_bound_holds());
        Ok(r)
    }

    fn hyperbolic(&self) -> Result<RunResult> {
        let o = &self.cfg.options;
        let cert = certify_negative_curvature(&self.sys, &self.z0, self.cfg.horizon, self.cfg.step, o.reduced)?;
        let mut equilibria = cert.equilibria.clone();
        if let Some(guess) = &o.equilibrium {
            let e = analyze_equilibrium(&self.sys, &Vec64::from_column_slice(guess))?;
            if !equilibria.iter().any(|q| (&q.point - &e.point).norm() <= 1e-8 * (1.0 + e.point.norm())) {
                equilibria.push(e);
            }
        }
        let mut table = Table::new(vec!["t".into(), "equilibrium".into(), "trajectory".into(), "distance".into()]);
        let mut rates = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        for (ei, eq) in equilibria.iter().enumerate().filter(|(_, e)| e.hyperbolic) {
            let starts = stable_starts(&self.sys, eq, o.trajectories, o.radius, &mut rng)?;
            let results = self.map(&starts, |z| {
                let traj = flow(&self.sys, z, self.cfg.horizon, self.cfg.step)?;
                let shifted = Trajectory {
                    times: traj.times.clone(),
                    states: traj.states.iter().map(|s| s - &eq.point).collect(),
                    energies: traj.energies.clone(),
                };
                Ok((decay_rate(&shifted), shifted))
            })?;
            for (k, (rate, traj)) in results.into_iter().enumerate() {
                rates.push(rate);
                for (t, i) in self.sample_times(&traj) {
                    table.push(vec![t, ei as f64, k as f64, traj.states[i].norm()]);
                }
            }
        }
        let mut r = RunResult::new("hyperbolic", table);
        r.set(
            "kind",
            match cert.kind {
                CertificateKind::ReducedFlow => "reduced_flow",
                CertificateKind::EquilibriumSet => "equilibrium_set",
            },
        );
        r.set_num("max_eig", cert.max_eig);
        r.set("alpha_estimate", cert.alpha_estimate.map_or(Value::Null, num));
        r.set("verdict", cert.verdict);
        r.set("samples", cert.samples);
        r.set("equilibria", Value::Array(equilibria.iter().map(equilibrium_json).collect()));
        r.set("decay_rates", nums(&rates));
        r.diagnostics = cert.diagnostics;
        Ok(r)
    }

    fn lderiv(&self) -> Result<RunResult> {
        let o = &self.cfg.options;
        let rows_to_mat = |rows: &Vec<Vec<f64>>| Mat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
        let (a, q, q_end) = match (&o.a, &o.q) {
            (Some(a), Some(q)) => (rows_to_mat(a), rows_to_mat(q), o.q_end.as_ref().map(rows_to_mat)),
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
                let [m, d] = o.lderiv_size;
                let a = random_matrix(m, d, 1.0, &mut rng);
                let q = random_symmetric(d, 2.0, &mut rng);
                let q_end = random_symmetric(d, 2.0, &mut rng);
                (a, q, Some(q_end))
            }
        };
        let family = {
            let (a, q, q_end) = (a.clone(), q.clone(), q_end.clone());
            move |tau: f64| match &q_end {
                Some(qe) => LDerivData::new(a.clone(), &q + (qe - &q) * tau),
                None => LDerivData::new(a.clone(), q.clone()),
            }
        };
        let data = family(0.0)?;
        let m = data.m();
        let taus: Vec<f64> = if q_end.is_some() {
            (0..o.samples).map(|k| k as f64 / (o.samples - 1) as f64).collect()
        } else {
            vec![0.0]
        };
        let mut cols = vec!["t".to_string(), "ind_kernel".into()];
        cols.extend(matrix_columns("L", 2 * m, m));
        let rows = self.map(&taus, |tau| {
            let d = family(*tau)?;
            let frame = l_derivative(&d)?;
            let hess = d.restricted_hessian()?;
            let mut row = vec![*tau, hess.inertia(self.cfg.tolerances.rank_tol).neg as f64];
            row.extend(flatten(frame.columns()));
            Ok(row)
        })?;
        let mut r = RunResult::new("lderiv", Table::new(cols));
        rows.into_iter().for_each(|row| r.series.push(row));
        let frame = l_derivative(&data)?;
        r.set_num("isotropy_defect", frame.isotropy_defect());
        match data.index_split() {
            Ok((iq, ik, ia)) => {
                r.set("ind_q", iq);
                r.set("ind_kernel", ik);
                r.set("ind_schur", ia);
                r.set("index_split_holds", iq == ik + ia);
            }
            Err(e) => r.diagnostics.push(format!("index split unavailable: {e}")),
        }
        let ft = check_fiber_transversality(&data)?;
        r.set("hessian_nondegenerate", ft.hessian_nondegenerate);
        r.set("transversal_to_fiber", ft.transversal_to_fiber);
        r.set("lagrange_equivalence_holds", ft.hessian_nondegenerate == ft.transversal_to_fiber);
        r.set("q_inertia", {
            let i = matrix_inertia(&data.q, self.cfg.tolerances.rank_tol);
            json!({ "neg": i.neg, "zero": i.zero, "pos": i.pos })
        });
        if q_end.is_some() {
            let rep = family_index_delta(family, 0.0, 1.0)?;
            r.set("family_maslov", rep.maslov);
            r.set("family_hessian_delta", rep.hessian_delta);
            r.set("family_agrees", rep.agrees());
        }
        Ok(r)
    }
}

/// Below this, [`fiber_transversality`] flags a nearly singular reduced curve.
pub const FIBER_WARNING: f64 = 1e-2;

/// Smallest `|π_* H⃗| / |H⃗|` over the trajectory states.
pub fn fiber_transversality(sys: &HamiltonianSystem, traj: &Trajectory) -> f64 {
    let n = sys.n();
    traj.states
        .iter()
        .map(|z| {
            let f = sys.field(z);
            f.rows(n, n).norm() / f.norm().max(f64::MIN_POSITIVE)
        })
        .fold(f64::INFINITY, f64::min)
}

fn equilibrium_json(e: &Equilibrium) -> Value {
    json!({
        "point": nums(e.point.as_slice()),
        "eigenvalues_re": nums(&e.eigenvalues.iter().map(|l| l.re).collect::<Vec<_>>()),
        "eigenvalues_im": nums(&e.eigenvalues.iter().map(|l| l.im).collect::<Vec<_>>()),
        "hyperbolic": e.hyperbolic,
    })
}

/// Projector onto the stable subspace of a hyperbolic matrix, via the matrix sign function.
fn stable_projector(l: &Mat) -> Result<Mat> {
    let dim = l.nrows();
    let mut s = l.clone();
    for _ in 0..100 {
        let inv = s.clone().try_inverse().ok_or(Error::NewtonFailure(f64::NAN))?;
        let next = (&s + inv) * 0.5;
        let change = (&next - &s).norm();
        s = next;
        if change <= 1e-14 * s.norm() {
            return Ok((Mat::identity(dim, dim) - s) * 0.5);
        }
    }
    Err(Error::NewtonFailure((&s * &s - Mat::identity(dim, dim)).norm()))
}

/// Seeded starting points at distance `radius` from `eq` along its linear stable subspace.
fn stable_starts(sys: &HamiltonianSystem, eq: &Equilibrium, count: usize, radius: f64, rng: &mut ChaCha8Rng) -> Result<Vec<Vec64>> {
    let p = stable_projector(&sys.field_jacobian(&eq.point))?;
    let dim = p.nrows();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v = &p * random_matrix(dim, 1, 1.0, rng).column(0);
        let norm = v.norm();
        if norm > 1e-6 {
            out.push(&eq.point + v * (radius / norm));
        }
    }
    Ok(out)
}
