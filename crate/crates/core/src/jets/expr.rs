use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Exponent, Jet, JetSpace};
use crate::error::{Error, Result};

/// Small analytic expression tree, used for units and t-dependent
/// coefficients in scene files.
///
/// JSON form is externally tagged, e.g.
/// `{"recip": {"add": [{"const": 1.0}, {"var": 0}]}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExprNode {
    Const(f64),
    Var(usize),
    Add(Vec<ExprNode>),
    Mul(Vec<ExprNode>),
    Pow { exp: Exponent, arg: Box<ExprNode> },
    Exp(Box<ExprNode>),
    Ln(Box<ExprNode>),
    Recip(Box<ExprNode>),
    /// a·arg + b
    Affine { a: f64, b: f64, arg: Box<ExprNode> },
}

impl ExprNode {
    pub fn var(i: usize) -> Self {
        ExprNode::Var(i)
    }

    pub fn constant(c: f64) -> Self {
        ExprNode::Const(c)
    }

    /// Number of variables referenced (one past the largest index).
    pub fn arity(&self) -> usize {
        match self {
            ExprNode::Const(_) => 0,
            ExprNode::Var(i) => i + 1,
            ExprNode::Add(v) | ExprNode::Mul(v) => v.iter().map(|e| e.arity()).max().unwrap_or(0),
            ExprNode::Pow { arg, .. }
            | ExprNode::Exp(arg)
            | ExprNode::Ln(arg)
            | ExprNode::Recip(arg)
            | ExprNode::Affine { arg, .. } => arg.arity(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.arity() == 0
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(match self {
            ExprNode::Const(c) => *c,
            ExprNode::Var(i) => *x.get(*i).ok_or(Error::DimensionMismatch {
                expected: i + 1,
                found: x.len(),
            })?,
            ExprNode::Add(v) => v.iter().map(|e| e.eval(x)).sum::<Result<f64>>()?,
            ExprNode::Mul(v) => v.iter().map(|e| e.eval(x)).product::<Result<f64>>()?,
            ExprNode::Pow { exp, arg } => {
                let a = arg.eval(x)?;
                if !(a > 0.0) {
                    return Err(Error::Domain { op: "power", value: a });
                }
                a.powf(exp.value())
            }
            ExprNode::Exp(arg) => arg.eval(x)?.exp(),
            ExprNode::Ln(arg) => {
                let a = arg.eval(x)?;
                if !(a > 0.0) {
                    return Err(Error::Domain { op: "log", value: a });
                }
                a.ln()
            }
            ExprNode::Recip(arg) => {
                let a = arg.eval(x)?;
                if a == 0.0 {
                    return Err(Error::Domain { op: "reciprocal", value: a });
                }
                1.0 / a
            }
            ExprNode::Affine { a, b, arg } => a * arg.eval(x)? + b,
        })
    }

    /// Evaluates the expression on jets: variable i is replaced by
    /// `inputs[i]`; constants live in `space`.
    pub fn eval_jet(&self, space: &Arc<JetSpace>, inputs: &[Jet]) -> Result<Jet> {
        Ok(match self {
            ExprNode::Const(c) => Jet::constant(space, *c),
            ExprNode::Var(i) => inputs
                .get(*i)
                .ok_or(Error::DimensionMismatch {
                    expected: i + 1,
                    found: inputs.len(),
                })?
                .clone(),
            ExprNode::Add(v) => {
                let mut acc = Jet::zero(space);
                for e in v {
                    acc = acc.add(&e.eval_jet(space, inputs)?)?;
                }
                acc
            }
            ExprNode::Mul(v) => {
                let mut acc = Jet::constant(space, 1.0);
                for e in v {
                    acc = acc.mul(&e.eval_jet(space, inputs)?)?;
                }
                acc
            }
            ExprNode::Pow { exp, arg } => arg.eval_jet(space, inputs)?.powf(exp)?,
            ExprNode::Exp(arg) => arg.eval_jet(space, inputs)?.exp(),
            ExprNode::Ln(arg) => arg.eval_jet(space, inputs)?.ln()?,
            ExprNode::Recip(arg) => arg.eval_jet(space, inputs)?.reciprocal()?,
            ExprNode::Affine { a, b, arg } => arg.eval_jet(space, inputs)?.scale(*a).add_scalar(*b),
        })
    }
}

/// Jet of an expression at a point, in the coordinate variables.
pub fn jet_eval_expr(expr: &ExprNode, x: &[f64], order: u32) -> Result<Jet> {
    let space = JetSpace::new(x, order);
    let vars = Jet::variables(&space);
    expr.eval_jet(&space, &vars)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::MultiIndex;

    #[test]
    fn serde_shape() {
        let e: ExprNode =
            serde_json::from_str(r#"{"recip": {"add": [{"const": 1.0}, {"var": 0}]}}"#).unwrap();
        assert_eq!(e.eval(&[1.0]).unwrap(), 0.5);
        let p: ExprNode = serde_json::from_str(r#"{"pow": {"exp": "1/2", "arg": {"var": 1}}}"#).unwrap();
        assert_eq!(p.arity(), 2);
        assert_eq!(p.eval(&[0.0, 0.25]).unwrap(), 0.5);
    }

    #[test]
    fn prepared_unit_derivative() {
        // d/dx x/(1+x) at 0.5 = 1/(1.5)^2 = 4/9
        let e = ExprNode::Mul(vec![
            ExprNode::var(0),
            ExprNode::Recip(Box::new(ExprNode::Affine {
                a: 1.0,
                b: 1.0,
                arg: Box::new(ExprNode::var(0)),
            })),
        ]);
        let j = jet_eval_expr(&e, &[0.5], 2).unwrap();
        let d = j.derivative(&MultiIndex::new(vec![1])).unwrap();
        assert!((d - 4.0 / 9.0).abs() < 1e-15);
    }
}
