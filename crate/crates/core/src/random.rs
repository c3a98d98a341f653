//! Seeded random expressions and points for cross-checks. Every generated
//! expression is positive on (0,∞)^k, so any nesting stays in the domain of
//! the power, log and reciprocal nodes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::jets::{Exponent, ExprNode};

/// Largest |value| accepted by [`ExprGen::bounded`].
pub const VALUE_CAP: f64 = 1e3;

pub struct ExprGen {
    rng: ChaCha8Rng,
}

const EXPONENTS: [(i64, i64); 7] = [(-2, 1), (-1, 1), (-1, 2), (1, 2), (3, 2), (2, 1), (3, 1)];

impl ExprGen {
    pub fn new(seed: u64) -> Self {
        ExprGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Point with coordinates uniform in [0.1, 0.9].
    pub fn point(&mut self, dim: usize) -> Vec<f64> {
        (0..dim).map(|_| self.rng.gen_range(0.1..0.9)).collect()
    }

    /// Tree of depth ≤ `depth` in `vars` variables.
    pub fn expr(&mut self, vars: usize, depth: u32) -> ExprNode {
        if depth == 0 || self.rng.gen_bool(0.25) {
            return self.leaf(vars);
        }
        let d = depth - 1;
        match self.rng.gen_range(0..7) {
            0 => {
                let k = self.rng.gen_range(2..=3);
                ExprNode::Add((0..k).map(|_| self.expr(vars, d)).collect())
            }
            1 => ExprNode::Mul(vec![self.expr(vars, d), self.expr(vars, d)]),
            2 => {
                let (p, q) = EXPONENTS[self.rng.gen_range(0..EXPONENTS.len())];
                ExprNode::Pow {
                    exp: Exponent::ratio(p, q),
                    arg: Box::new(self.expr(vars, d)),
                }
            }
            3 => ExprNode::Exp(Box::new(ExprNode::Affine {
                a: self.rng.gen_range(-0.5..0.5),
                b: 0.0,
                arg: Box::new(self.expr(vars, d)),
            })),
            4 => ExprNode::Recip(Box::new(ExprNode::Add(vec![
                ExprNode::Const(self.rng.gen_range(0.5..1.0)),
                self.expr(vars, d),
            ]))),
            5 => ExprNode::Ln(Box::new(ExprNode::Add(vec![ExprNode::Const(1.0), self.expr(vars, d)]))),
            _ => ExprNode::Affine {
                a: self.rng.gen_range(0.2..2.0),
                b: self.rng.gen_range(0.0..0.5),
                arg: Box::new(self.expr(vars, d)),
            },
        }
    }

    fn leaf(&mut self, vars: usize) -> ExprNode {
        if vars == 0 || self.rng.gen_bool(0.2) {
            ExprNode::Const(self.rng.gen_range(0.5..2.0))
        } else {
            ExprNode::Var(self.rng.gen_range(0..vars))
        }
    }

    /// An expression whose values at every given point lie in
    /// [1/VALUE_CAP, VALUE_CAP], redrawing until one does.
    pub fn bounded(&mut self, vars: usize, depth: u32, points: &[Vec<f64>]) -> ExprNode {
        loop {
            let e = self.expr(vars, depth);
            let ok = points.iter().all(|x| {
                e.eval(x)
                    .is_ok_and(|v| v.is_finite() && (1.0 / VALUE_CAP..=VALUE_CAP).contains(&v.abs()))
            });
            if ok {
                return e;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_positive() {
        let mut a = ExprGen::new(7);
        let mut b = ExprGen::new(7);
        for _ in 0..50 {
            let x = a.point(3);
            assert_eq!(x, b.point(3));
            let e = a.expr(3, 4);
            assert_eq!(e, b.expr(3, 4));
            assert!(e.eval(&x).unwrap() > 0.0);
        }
    }
}
