use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::BoundedMonomial;
use crate::error::{Error, Result};
use crate::jets::{ExprNode, Jet, JetSpace};
use crate::mildness::{MildParams, Order};
use crate::multiindex::{factorial_f64, MultiIndex};

/// Units whose modulus drops below this on the image of the monomial map
/// are rejected.
pub const UNIT_MARGIN: f64 = 1e-6;

/// f(x) = b_j(x)·F(b_1(x), …, b_N(x)) with F a unit: non-vanishing and
/// mild with constants `unit_mild` on the image of the monomial map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreparedFunction {
    pub monomials: Vec<BoundedMonomial>,
    pub lead: usize,
    pub unit: ExprNode,
    pub unit_mild: MildParams,
    /// Declared bound on the C¹-norm of the monomial map.
    pub c1_bound: Option<f64>,
}

/// Constants of the derivative bound x^{−ν}|b_j(x)| B_f A_f^{|ν|} |ν|!.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreparedBoundConstants {
    /// Constants (A, B) bounding the unit composed with the monomial map.
    pub unit_a: f64,
    pub unit_b: f64,
    #[serde(rename = "A_f")]
    pub a_f: f64,
    #[serde(rename = "B_f")]
    pub b_f: f64,
}

impl PreparedFunction {
    pub fn new(
        monomials: Vec<BoundedMonomial>,
        lead: usize,
        unit: ExprNode,
        unit_mild: MildParams,
        c1_bound: Option<f64>,
    ) -> Result<Self> {
        let f = PreparedFunction {
            monomials,
            lead,
            unit,
            unit_mild,
            c1_bound,
        };
        f.check_shape()?;
        Ok(f)
    }

    /// A·x^μ with constant unit 1.
    pub fn monomial(coefficient: f64, exponents: Vec<crate::jets::Exponent>, range_bound: f64) -> Result<Self> {
        PreparedFunction::new(
            vec![BoundedMonomial::new(coefficient, exponents, range_bound)?],
            0,
            ExprNode::Const(1.0),
            MildParams::new(1.0, 1.0, 0.0, Order::Infinite)?,
            None,
        )
    }

    /// The constant function c in `dim` variables.
    pub fn constant(c: f64, dim: usize) -> Self {
        PreparedFunction {
            monomials: vec![BoundedMonomial::constant(c, dim)],
            lead: 0,
            unit: ExprNode::Const(1.0),
            unit_mild: MildParams {
                a: 1.0,
                b: 1.0,
                c: 0.0,
                order: Order::Infinite,
            },
            c1_bound: Some(c.abs().max(1.0)),
        }
    }

    pub(crate) fn check_shape(&self) -> Result<()> {
        if self.monomials.is_empty() {
            return Err(Error::validation("prepared_shape", "a prepared function needs at least one monomial"));
        }
        let dim = self.monomials[0].dim();
        if let Some(bad) = self.monomials.iter().find(|b| b.dim() != dim) {
            return Err(Error::validation(
                "prepared_shape",
                format!("monomials disagree on dimension ({} vs {dim})", bad.dim()),
            ));
        }
        if self.lead >= self.monomials.len() {
            return Err(Error::validation(
                "lead_index",
                format!("lead {} out of range for {} monomials", self.lead, self.monomials.len()),
            ));
        }
        if self.unit.arity() > self.monomials.len() {
            return Err(Error::validation(
                "unit_arity",
                format!(
                    "unit uses {} variables but only {} monomials exist",
                    self.unit.arity(),
                    self.monomials.len()
                ),
            ));
        }
        self.unit_mild
            .validate()
            .map_err(|e| Error::validation("unit_mild", e.to_string()))
    }

    pub fn dim(&self) -> usize {
        self.monomials[0].dim()
    }

    pub fn is_constant(&self) -> bool {
        self.monomials
            .iter()
            .all(|b| b.exponents.iter().all(|e| e.is_zero()))
            && self.unit.is_constant()
    }

    /// The monomial-map values b(x).
    pub fn monomial_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.monomials.iter().map(|b| b.eval(x)).collect()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if self.dim() == 0 {
            return self.constant_value();
        }
        let bs = self.monomial_values(x)?;
        Ok(bs[self.lead] * self.unit.eval(&bs)?)
    }

    fn constant_value(&self) -> Result<f64> {
        Ok(self.monomials[self.lead].coefficient * self.unit.eval(&self.constant_monomials())?)
    }

    fn constant_monomials(&self) -> Vec<f64> {
        self.monomials.iter().map(|b| b.coefficient).collect()
    }

    /// f evaluated on jets (input i stands for coordinate i) in `space`.
    pub fn eval_on_jets(&self, space: &Arc<JetSpace>, inputs: &[Jet]) -> Result<Jet> {
        if self.dim() == 0 {
            return Ok(Jet::constant(space, self.constant_value()?));
        }
        let bs: Vec<Jet> = self
            .monomials
            .iter()
            .map(|b| b.eval_on_jets(space, inputs))
            .collect::<Result<_>>()?;
        let unit = self.unit.eval_jet(space, &bs)?;
        if unit.value().abs() < UNIT_MARGIN {
            return Err(Error::Domain {
                op: "unit",
                value: unit.value(),
            });
        }
        bs[self.lead].mul(&unit)
    }

    /// Jet of f at x in the coordinate variables.
    pub fn jet(&self, x: &[f64], order: u32) -> Result<Jet> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        if let Some(&bad) = x.iter().find(|&&xi| !(xi > 0.0 && xi < 1.0)) {
            return Err(Error::Domain {
                op: "prepared function",
                value: bad,
            });
        }
        let space = JetSpace::new(x, order);
        let vars = Jet::variables(&space);
        self.eval_on_jets(&space, &vars)
    }

    pub fn bound_constants(&self) -> PreparedBoundConstants {
        let a_b = self.monomials.iter().map(|b| b.growth()).fold(1.0, f64::max);
        let b_b = self.monomials.iter().map(|b| b.range_bound).fold(0.0, f64::max);
        let n = self.monomials.len() as f64;
        let unit_a = a_b * (n * self.unit_mild.a * b_b + 1.0);
        let unit_b = self.unit_mild.b;
        let a_f = 2.0 * unit_a.max(self.monomials[self.lead].growth());
        PreparedBoundConstants {
            unit_a,
            unit_b,
            a_f,
            b_f: unit_b,
        }
    }

    /// x^{−ν}·|b_j(x)|·B_f·A_f^{|ν|}·|ν|!.
    pub fn derivative_bound(&self, nu: &MultiIndex, x: &[f64]) -> Result<f64> {
        if nu.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: nu.dim(),
            });
        }
        let k = self.bound_constants();
        let b = self.monomials[self.lead].eval(x)?.abs();
        let n = nu.total();
        let scale: f64 = nu
            .entries()
            .iter()
            .zip(x)
            .map(|(&e, xi)| xi.powi(-(e as i32)))
            .product();
        Ok(scale * b * k.b_f * k.a_f.powi(n as i32) * factorial_f64(n))
    }

    /// Sampled max over monomials and |ν| ≤ 1 of |∂^ν b_ℓ(x)|.
    pub fn monomial_c1_norm(&self, samples: &[Vec<f64>]) -> Result<f64> {
        let mut norm: f64 = 0.0;
        for x in samples {
            let space = JetSpace::new(x, 1);
            for b in &self.monomials {
                let j = b.jet(&space)?;
                for d in j.derivatives() {
                    norm = norm.max(d.abs());
                }
            }
        }
        Ok(norm)
    }
}

/// Result of a sampled C¹-norm check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct C1Report {
    pub norm: f64,
    pub declared: f64,
    pub pass: bool,
}

/// max over samples, components and |ν| ≤ 1 of |∂^ν g_ℓ|, compared with a
/// declared bound.
pub fn c1_norm_check<F>(component_jets: F, samples: &[Vec<f64>], declared: f64) -> Result<C1Report>
where
    F: Fn(&[f64]) -> Result<Vec<Jet>>,
{
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut norm: f64 = 0.0;
    for x in samples {
        for j in component_jets(x)? {
            for (i, d) in j.derivatives().into_iter().enumerate() {
                if j.layout().total(i) <= 1 {
                    norm = norm.max(d.abs());
                }
            }
        }
    }
    Ok(C1Report {
        norm,
        declared,
        pass: norm <= declared * (1.0 + 1e-12),
    })
}
