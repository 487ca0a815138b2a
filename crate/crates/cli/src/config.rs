//! Declarative run configuration, read from TOML.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Flow,
    Jacobi,
    Curvature,
    Conjugate,
    Morse,
    Maslov,
    Reduce,
    Compare,
    Hyperbolic,
    Lderiv,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Command::Flow,
        Command::Jacobi,
        Command::Curvature,
        Command::Conjugate,
        Command::Morse,
        Command::Maslov,
        Command::Reduce,
        Command::Compare,
        Command::Hyperbolic,
        Command::Lderiv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Flow => "flow",
            Command::Jacobi => "jacobi",
            Command::Curvature => "curvature",
            Command::Conjugate => "conjugate",
            Command::Morse => "morse",
            Command::Maslov => "maslov",
            Command::Reduce => "reduce",
            Command::Compare => "compare",
            Command::Hyperbolic => "hyperbolic",
            Command::Lderiv => "lderiv",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Natural,
    Metric,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    FreeParticle,
    Oscillator,
    InvertedOscillator,
    Pendulum,
}

/// Monomial `coef · Π vᵢ^{pow[i]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub coef: f64,
    pub pow: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub family: FamilyKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<Builtin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<f64>,
    /// Potential `U(y)` in `n` variables (natural and metric families).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub potential: Vec<Term>,
    /// Inverse metric `gⁱʲ(y)`, row by row, each entry a polynomial in `n` variables.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub metric: Vec<Vec<Vec<Term>>>,
    /// `h(x, y)` in the `2n` variables `(x₁…xₙ, y₁…yₙ)` (custom family).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hamiltonian: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_rank_tol")]
    pub rank_tol: f64,
    #[serde(default = "default_energy_tol")]
    pub energy_tol: f64,
    #[serde(default = "default_symp_tol")]
    pub symp_tol: f64,
    /// Finite-difference step for curve derivatives; the curve default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
}

fn default_rank_tol() -> f64 {
    1e-6
}
fn default_energy_tol() -> f64 {
    1e-8
}
fn default_symp_tol() -> f64 {
    1e-8
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_tol: default_rank_tol(),
            energy_tol: default_energy_tol(),
            symp_tol: default_symp_tol(),
            fd_step: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// The Jacobi curve's own starting subspace.
    Initial,
    Vertical,
    Horizontal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Rows of sampled series.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Left end of the trimmed interval for `morse`, `maslov` and `reduce`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trim: Option<f64>,
    #[serde(default = "default_reference")]
    pub reference: Reference,
    /// Use the reduced curve in `hyperbolic`.
    #[serde(default)]
    pub reduced: bool,
    /// Seeded trajectories on the stable subspace of each equilibrium in `hyperbolic`.
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    /// Distance of those starting points from the equilibrium.
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Newton guess for an equilibrium, as a phase point `(x, y)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equilibrium: Option<Vec<f64>>,
    /// `lderiv`: constraint differential `A` (rows).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    /// `lderiv`: second variation `Q` (rows).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<f64>>>,
    /// `lderiv`: end of the family `Q(τ) = Q + τ (Q_end − Q)`, `τ ∈ [0, 1]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_end: Option<Vec<Vec<f64>>>,
    /// `lderiv`: sizes `(m, dim W)` of a seeded instance when `a` and `q` are absent.
    #[serde(default = "default_lderiv_size")]
    pub lderiv_size: [usize; 2],
}

fn default_samples() -> usize {
    101
}
fn default_reference() -> Reference {
    Reference::Initial
}
fn default_trajectories() -> usize {
    10
}
fn default_radius() -> f64 {
    0.5
}
fn default_lderiv_size() -> [usize; 2] {
    [2, 4]
}

impl Default for Options {
    fn default() -> Self {
        Options {
            samples: default_samples(),
            trim: None,
            reference: default_reference(),
            reduced: false,
            trajectories: default_trajectories(),
            radius: default_radius(),
            equilibrium: None,
            a: None,
            q: None,
            q_end: None,
            lderiv_size: default_lderiv_size(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub horizon: f64,
    pub step: f64,
    #[serde(default)]
    pub seed: u64,
    pub system: SystemConfig,
    pub initial: Initial,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub options: Options,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Schema-independent semantic checks; empty means runnable for `command`.
    pub fn validate(&self, command: Command) -> Vec<String> {
        let mut d = Vec::new();
        let sys = &self.system;
        let n = sys.n;
        if !(self.step > 0.0) || !self.step.is_finite() {
            d.push("step must be positive".to_string());
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            d.push("horizon must be positive".to_string());
        }
        if self.step > 0.0 && self.horizon > 0.0 && self.step > self.horizon {
            d.push("step must not exceed the horizon".to_string());
        }
        let t = &self.tolerances;
        for (name, v) in [("rank_tol", t.rank_tol), ("energy_tol", t.energy_tol), ("symp_tol", t.symp_tol)] {
            if !(v > 0.0) {
                d.push(format!("tolerance {name} must be positive"));
            }
        }
        if let Some(h) = t.fd_step {
            if !(h > 0.0) {
                d.push("tolerance fd_step must be positive".to_string());
            }
        }
        if n == 0 {
            d.push("system.n must be at least 1".to_string());
            return d;
        }
        if self.initial.x.len() != n || self.initial.y.len() != n {
            d.push(format!("initial.x and initial.y must have length n = {n}"));
        }
        if self.initial.x.iter().chain(&self.initial.y).any(|v| !v.is_finite()) {
            d.push("initial point must be finite".to_string());
        }
        self.validate_system(&mut d);
        let o = &self.options;
        if o.samples < 2 {
            d.push("options.samples must be at least 2".to_string());
        }
        if let Some(trim) = o.trim {
            if !(trim > 0.0 && trim < self.horizon) {
                d.push("options.trim must lie in (0, horizon)".to_string());
            }
        }
        let reduces = command == Command::Reduce || (command == Command::Hyperbolic && o.reduced);
        if reduces && n == 1 {
            d.push(format!(
                "{command} needs n >= 2: for n = 1 the reduced space is trivial (dimension 2n - 2 = 0)"
            ));
        }
        if command == Command::Hyperbolic {
            if !(o.radius > 0.0) {
                d.push("options.radius must be positive".to_string());
            }
            if let Some(e) = &o.equilibrium {
                if e.len() != 2 * n {
                    d.push(format!("options.equilibrium must have length 2n = {}", 2 * n));
                }
            }
        }
        if command == Command::Lderiv {
            self.validate_lderiv(&mut d);
        }
        d
    }

    fn validate_system(&self, d: &mut Vec<String>) {
        let sys = &self.system;
        let n = sys.n;
        let check_terms = |terms: &[Term], vars: usize, what: &str, d: &mut Vec<String>| {
            for term in terms {
                if term.pow.len() != vars {
                    d.push(format!("{what}: every term needs {vars} exponents"));
                    return;
                }
                if !term.coef.is_finite() {
                    d.push(format!("{what}: coefficients must be finite"));
                    return;
                }
            }
        };
        match sys.family {
            FamilyKind::Natural => {
                if sys.builtin.is_some() && !sys.potential.is_empty() {
                    d.push("system: give either builtin or potential, not both".to_string());
                }
                check_terms(&sys.potential, n, "system.potential", d);
            }
            FamilyKind::Metric => {
                if sys.builtin.is_some() {
                    d.push("system.builtin is only available for the natural family".to_string());
                }
                check_terms(&sys.potential, n, "system.potential", d);
                if sys.metric.len() != n || sys.metric.iter().any(|r| r.len() != n) {
                    d.push(format!("system.metric must be an {n} x {n} table"));
                } else {
                    for row in &sys.metric {
                        for entry in row {
                            check_terms(entry, n, "system.metric", d);
                        }
                    }
                    for i in 0..n {
                        for j in 0..i {
                            if canonical(&sys.metric[i][j]) != canonical(&sys.metric[j][i]) {
                                d.push(format!("system.metric is not symmetric: g[{i}][{j}] differs from g[{j}][{i}]"));
                            }
                        }
                    }
                }
            }
            FamilyKind::Custom => {
                if sys.builtin.is_some() {
                    d.push("system.builtin is only available for the natural family".to_string());
                }
                if sys.hamiltonian.is_empty() {
                    d.push("system.hamiltonian must list at least one term".to_string());
                }
                check_terms(&sys.hamiltonian, 2 * n, "system.hamiltonian", d);
            }
        }
        if sys.family != FamilyKind::Custom && !sys.hamiltonian.is_empty() {
            d.push("system.hamiltonian is only used by the custom family".to_string());
        }
        if sys.family != FamilyKind::Metric && !sys.metric.is_empty() {
            d.push("system.metric is only used by the metric family".to_string());
        }
        match (sys.builtin, sys.strength) {
            (Some(Builtin::Pendulum), Some(s)) if !s.is_finite() => d.push("system.strength must be finite".to_string()),
            (Some(Builtin::Pendulum), _) => {}
            (_, Some(_)) => d.push("system.strength is only used by the pendulum".to_string()),
            _ => {}
        }
    }

    fn validate_lderiv(&self, d: &mut Vec<String>) {
        let o = &self.options;
        let rect = |m: &Vec<Vec<f64>>| m.iter().all(|r| r.len() == m[0].len()) && !m.is_empty() && !m[0].is_empty();
        match (&o.a, &o.q) {
            (Some(a), Some(q)) => {
                if !rect(a) || !rect(q) {
                    d.push("options.a and options.q must be nonempty rectangular tables".to_string());
                    return;
                }
                if q.len() != q[0].len() || a[0].len() != q.len() {
                    d.push("options.q must be square with the column count of options.a".to_string());
                }
                if let Some(qe) = &o.q_end {
                    if !rect(qe) || qe.len() != q.len() || qe[0].len() != q.len() {
                        d.push("options.q_end must have the shape of options.q".to_string());
                    }
                }
            }
            (None, None) => {
                let [m, dim] = o.lderiv_size;
                if m == 0 || dim <= m {
                    d.push("options.lderiv_size must satisfy 0 < m < dim W".to_string());
                }
                if o.q_end.is_some() {
                    d.push("options.q_end needs options.a and options.q".to_string());
                }
            }
            _ => d.push("options.a and options.q must be given together".to_string()),
        }
    }
}

/// Terms with merged duplicate monomials and zero coefficients dropped, sorted.
fn canonical(terms: &[Term]) -> Vec<(Vec<u32>, u64)> {
    let mut merged: std::collections::BTreeMap<Vec<u32>, f64> = std::collections::BTreeMap::new();
    for t in terms {
        *merged.entry(t.pow.clone()).or_insert(0.0) += t.coef;
    }
    merged.into_iter().filter(|(_, c)| *c != 0.0).map(|(p, c)| (p, c.to_bits())).collect()
}
