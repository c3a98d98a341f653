use serde::{Deserialize, Serialize};

use super::PreparedFunction;
use crate::error::{Error, Result};
use crate::grid;

/// Lower and upper boundary of one coordinate, as functions of the
/// preceding coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    pub lower: PreparedFunction,
    pub upper: PreparedFunction,
}

/// {x ∈ (0,1)^m : α_i(x_1..x_{i−1}) < x_i < β_i(x_1..x_{i−1})}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    walls: Vec<Wall>,
}

impl Cell {
    pub fn new(walls: Vec<Wall>) -> Result<Cell> {
        for (i, w) in walls.iter().enumerate() {
            w.lower.check_shape()?;
            w.upper.check_shape()?;
            if w.lower.dim() != i || w.upper.dim() != i {
                return Err(Error::validation(
                    "wall_dimension",
                    format!(
                        "wall {i} must depend on {i} variables, got {} and {}",
                        w.lower.dim(),
                        w.upper.dim()
                    ),
                ));
            }
        }
        Ok(Cell { walls })
    }

    pub fn unit_cube(dim: usize) -> Cell {
        Cell {
            walls: (0..dim)
                .map(|i| Wall {
                    lower: PreparedFunction::constant(0.0, i),
                    upper: PreparedFunction::constant(1.0, i),
                })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.walls.len()
    }

    pub fn walls(&self) -> &[Wall] {
        &self.walls
    }

    /// (α_i, β_i) at the first i coordinates of `x`.
    pub fn bounds(&self, i: usize, x: &[f64]) -> Result<(f64, f64)> {
        let w = &self.walls[i];
        let prefix = &x[..i];
        Ok((w.lower.eval(prefix)?, w.upper.eval(prefix)?))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        (0..self.dim()).all(|i| match self.bounds(i, x) {
            Ok((a, b)) => a < x[i] && x[i] < b,
            Err(_) => false,
        })
    }

    /// Affine stacking map from the unit cube: x_i = α_i + (β_i − α_i)·u_i.
    pub fn from_unit(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.len(),
            });
        }
        let mut x = Vec::with_capacity(u.len());
        for (i, &ui) in u.iter().enumerate() {
            x.push(0.0);
            let (a, b) = self.bounds(i, &x)?;
            x[i] = a + (b - a) * ui;
        }
        Ok(x)
    }

    /// Clustered samples pulled into the cell by [`Cell::from_unit`], keeping
    /// only points strictly inside.
    pub fn samples(&self, density: usize) -> Vec<Vec<f64>> {
        grid::clustered_grid(self.dim(), density)
            .iter()
            .filter_map(|u| self.from_unit(u).ok())
            .filter(|x| self.contains(x))
            .collect()
    }

    /// Checks 0 ≤ α_i < β_i ≤ 1 at sampled base points.
    pub fn validate(&self, density: usize) -> Result<()> {
        for u in grid::clustered_grid(self.dim(), density) {
            let mut x = Vec::with_capacity(self.dim());
            for (i, &ui) in u.iter().enumerate() {
                let (a, b) = self.bounds(i, &x).map_err(|e| {
                    Error::validation("wall_evaluation", format!("wall {i} at {x:?}: {e}"))
                })?;
                if !(a >= 0.0 && b <= 1.0) {
                    return Err(Error::validation(
                        "wall_range",
                        format!("wall {i} leaves [0,1] at {x:?}: ({a}, {b})"),
                    ));
                }
                if !(a < b) {
                    return Err(Error::validation(
                        "wall_order",
                        format!("wall {i} is degenerate at {x:?}: lower {a} >= upper {b}"),
                    ));
                }
                x.push(a + (b - a) * ui);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::Exponent;

    fn cusp_cell() -> Cell {
        Cell::new(vec![
            Wall {
                lower: PreparedFunction::constant(0.0, 0),
                upper: PreparedFunction::constant(1.0, 0),
            },
            Wall {
                lower: PreparedFunction::monomial(1.0, vec![Exponent::ratio(3, 2)], 1.0).unwrap(),
                upper: PreparedFunction::constant(1.0, 1),
            },
        ])
        .unwrap()
    }

    #[test]
    fn membership() {
        let c = cusp_cell();
        assert!(c.contains(&[0.25, 0.5]));
        assert!(!c.contains(&[0.25, 0.1]));
        assert!(c.validate(16).is_ok());
        assert!(c.samples(8).iter().all(|x| c.contains(x)));
    }

    #[test]
    fn degenerate_wall_rejected() {
        let c = Cell::new(vec![Wall {
            lower: PreparedFunction::constant(0.5, 0),
            upper: PreparedFunction::constant(0.5, 0),
        }])
        .unwrap();
        match c.validate(4) {
            Err(Error::Validation { invariant, .. }) => assert_eq!(invariant, "wall_order"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wall_dimension_checked() {
        let r = Cell::new(vec![Wall {
            lower: PreparedFunction::constant(0.0, 1),
            upper: PreparedFunction::constant(1.0, 0),
        }]);
        assert!(r.is_err());
    }
}
