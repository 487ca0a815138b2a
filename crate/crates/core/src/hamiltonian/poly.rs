use crate::linalg::{Mat, Vec64};
use crate::{Error, Result};

/// Sparse multivariate polynomial `Σ c · vᵉ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    vars: usize,
    terms: Vec<(f64, Vec<u32>)>,
}

impl Polynomial {
    pub fn new(vars: usize, terms: Vec<(f64, Vec<u32>)>) -> Result<Self> {
        if terms.iter().any(|(c, e)| e.len() != vars || !c.is_finite()) {
            return Err(Error::InvalidInput(format!("polynomial terms must have {vars} finite exponents")));
        }
        Ok(Polynomial { vars, terms: terms.into_iter().filter(|(c, _)| *c != 0.0).collect() })
    }

    pub fn zero(vars: usize) -> Self {
        Polynomial { vars, terms: Vec::new() }
    }

    pub fn constant(vars: usize, c: f64) -> Self {
        Polynomial { vars, terms: vec![(c, vec![0; vars])] }
    }

    /// `½ vᵀ K v`.
    pub fn quadratic_form(k: &Mat) -> Self {
        let d = k.nrows();
        let mut terms = Vec::new();
        for i in 0..d {
            for j in i..d {
                let c = if i == j { 0.5 * k[(i, i)] } else { 0.5 * (k[(i, j)] + k[(j, i)]) };
                let mut e = vec![0; d];
                e[i] += 1;
                e[j] += 1;
                terms.push((c, e));
            }
        }
        Polynomial { vars: d, terms: terms.into_iter().filter(|(c, _)| *c != 0.0).collect() }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn terms(&self) -> &[(f64, Vec<u32>)] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(_, e)| e.iter().sum()).max().unwrap_or(0)
    }

    /// Partial derivative in variable `k`.
    pub fn derivative(&self, k: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(_, e)| e[k] > 0)
            .map(|(c, e)| {
                let mut e2 = e.clone();
                e2[k] -= 1;
                (c * e[k] as f64, e2)
            })
            .collect();
        Polynomial { vars: self.vars, terms }
    }

    pub fn eval(&self, v: &[f64]) -> f64 {
        self.terms.iter().map(|(c, e)| c * e.iter().zip(v).map(|(&p, &x)| x.powi(p as i32)).product::<f64>()).sum()
    }

    pub fn gradient(&self, v: &[f64]) -> Vec64 {
        Vec64::from_fn(self.vars, |k, _| self.derivative(k).eval(v))
    }

    pub fn hessian(&self, v: &[f64]) -> Mat {
        let d = self.vars;
        let mut h = Mat::zeros(d, d);
        for i in 0..d {
            let di = self.derivative(i);
            for j in i..d {
                let x = di.derivative(j).eval(v);
                h[(i, j)] = x;
                h[(j, i)] = x;
            }
        }
        h
    }

    /// `T[k] = ∂_k Hess`.
    pub fn third(&self, v: &[f64]) -> Vec<Mat> {
        (0..self.vars).map(|k| self.derivative(k).hessian(v)).collect()
    }
}
