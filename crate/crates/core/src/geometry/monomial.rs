use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{jet_monomial, Exponent, Jet, JetSpace};
use crate::multiindex::{factorial_f64, MultiIndex};

/// b(x) = a·x^μ with a declared bound |b| ≤ `range_bound` on its cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundedMonomial {
    pub coefficient: f64,
    pub exponents: Vec<Exponent>,
    pub range_bound: f64,
}

impl BoundedMonomial {
    pub fn new(coefficient: f64, exponents: Vec<Exponent>, range_bound: f64) -> Result<Self> {
        if !coefficient.is_finite() {
            return Err(Error::InvalidParameter(format!("coefficient {coefficient} is not finite")));
        }
        if !(range_bound > 0.0 && range_bound.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "range bound must be positive, got {range_bound}"
            )));
        }
        Ok(BoundedMonomial {
            coefficient,
            exponents,
            range_bound,
        })
    }

    pub fn constant(c: f64, dim: usize) -> Self {
        BoundedMonomial {
            coefficient: c,
            exponents: vec![Exponent::integer(0); dim],
            range_bound: c.abs().max(1.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    /// M_b = max(max_i |μ_i|, 1).
    pub fn growth(&self) -> f64 {
        self.exponents
            .iter()
            .map(|e| e.value().abs())
            .fold(1.0, f64::max)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        for &xi in x {
            if !(xi > 0.0 && xi < 1.0) {
                return Err(Error::Domain { op: "monomial", value: xi });
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.coefficient
            * self
                .exponents
                .iter()
                .zip(x)
                .map(|(e, xi)| if e.is_zero() { 1.0 } else { xi.powf(e.value()) })
                .product::<f64>())
    }

    /// Jet of b at the space's base point.
    pub fn jet(&self, space: &Arc<JetSpace>) -> Result<Jet> {
        self.check_point(space.point())?;
        Ok(jet_monomial(&self.exponents, space)?.scale(self.coefficient))
    }

    /// b evaluated on jets: input i stands for coordinate i.
    pub fn eval_on_jets(&self, space: &Arc<JetSpace>, inputs: &[Jet]) -> Result<Jet> {
        if inputs.len() < self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: inputs.len(),
            });
        }
        let mut acc = Jet::constant(space, self.coefficient);
        if self.coefficient == 0.0 {
            return Ok(acc);
        }
        for (e, j) in self.exponents.iter().zip(inputs) {
            if e.is_zero() {
                continue;
            }
            acc = acc.mul(&j.powf(e)?)?;
        }
        Ok(acc)
    }

    /// Exact b^{(ν)}(x).
    pub fn exact_derivative(&self, nu: &MultiIndex, x: &[f64]) -> Result<f64> {
        let space = JetSpace::new(x, nu.total());
        let j = self.jet(&space)?;
        j.derivative(nu)
            .ok_or_else(|| Error::DimensionMismatch { expected: self.dim(), found: nu.dim() })
    }

    /// x^{−ν}·|b(x)|·M_b^{|ν|}·|ν|!.
    pub fn derivative_bound(&self, nu: &MultiIndex, x: &[f64]) -> Result<f64> {
        if nu.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: nu.dim(),
            });
        }
        let b = self.eval(x)?.abs();
        let n = nu.total();
        let scale: f64 = nu
            .entries()
            .iter()
            .zip(x)
            .map(|(&k, xi)| xi.powi(-(k as i32)))
            .product();
        Ok(scale * b * self.growth().powi(n as i32) * factorial_f64(n))
    }
}
