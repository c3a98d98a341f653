//! JSON scene files: cells, prepared functions on them and an optional grid
//! of family parameters t.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BoundedMonomial, Cell, PreparedFunction, Wall};
use crate::error::{Error, Result};
use crate::jets::{Exponent, ExprNode, JetSpace};
use crate::mildness::{verify_certificate, MildParams, Order};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff: Option<f64>,
    /// Coefficient as an expression in the family parameters t.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff_of_t: Option<ExprNode>,
    pub exponents: Vec<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range_bound: Option<f64>,
}

fn unit_one() -> ExprNode {
    ExprNode::Const(1.0)
}

fn unit_params() -> MildParams {
    MildParams {
        a: 1.0,
        b: 1.0,
        c: 0.0,
        order: Order::Infinite,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    /// Index of the cell the function lives on (top-level functions only).
    #[serde(default)]
    pub cell: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub monomials: Vec<MonomialSpec>,
    #[serde(default)]
    pub lead: usize,
    #[serde(default = "unit_one")]
    pub unit: ExprNode,
    #[serde(default = "unit_params")]
    pub unit_mild: MildParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1_bound: Option<f64>,
}

/// A wall is either a constant or a prepared function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundSpec {
    Constant(f64),
    Function(FunctionSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallSpec {
    pub lower: BoundSpec,
    pub upper: BoundSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub walls: Vec<WallSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dim: usize,
    pub cells: Vec<CellSpec>,
    #[serde(default)]
    pub functions: Vec<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub t_grid: Vec<Vec<f64>>,
    /// Frozen reference constants (fitted once, compared against later).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub baseline: BTreeMap<String, f64>,
}

/// A function of the scene resolved at one family parameter.
#[derive(Clone, Debug)]
pub struct SceneFunction {
    pub name: String,
    pub cell: usize,
    pub function: PreparedFunction,
}

/// All cells and functions at one value of t.
#[derive(Clone, Debug)]
pub struct Fiber {
    pub t: Vec<f64>,
    pub cells: Vec<Cell>,
    pub functions: Vec<SceneFunction>,
}

impl Scene {
    pub fn from_json(text: &str) -> Result<Scene> {
        let scene: Scene = serde_json::from_str(text).map_err(|e| Error::validation("schema", e.to_string()))?;
        scene.check_static()?;
        Ok(scene)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or("scene")
    }

    pub fn baseline(&self, key: &str) -> Option<f64> {
        self.baseline.get(key).copied()
    }

    fn t_dim(&self) -> usize {
        self.t_grid.first().map_or(0, |t| t.len())
    }

    /// Family parameters to sweep; a single empty t when the scene has no family.
    pub fn fibers(&self) -> Vec<Vec<f64>> {
        if self.t_grid.is_empty() {
            vec![Vec::new()]
        } else {
            self.t_grid.clone()
        }
    }

    fn check_static(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::validation("dim", "scene dimension must be at least 1"));
        }
        if self.cells.is_empty() {
            return Err(Error::validation("cells", "scene needs at least one cell"));
        }
        let td = self.t_dim();
        if self.t_grid.iter().any(|t| t.len() != td) {
            return Err(Error::validation("t_grid", "t_grid entries differ in length"));
        }
        for (ci, c) in self.cells.iter().enumerate() {
            if c.walls.len() != self.dim {
                return Err(Error::validation(
                    "wall_count",
                    format!("cell {ci} has {} walls, scene dim is {}", c.walls.len(), self.dim),
                ));
            }
        }
        for (fi, f) in self.functions.iter().enumerate() {
            if f.cell >= self.cells.len() {
                return Err(Error::validation(
                    "cell_index",
                    format!("function {fi} refers to cell {} of {}", f.cell, self.cells.len()),
                ));
            }
            for m in &f.monomials {
                if m.exponents.len() != self.dim {
                    return Err(Error::validation(
                        "function_dimension",
                        format!("function {fi} has a monomial in {} variables, scene dim is {}", m.exponents.len(), self.dim),
                    ));
                }
            }
        }
        // Resolve one fiber to surface shape errors early.
        let t = self.fibers().remove(0);
        self.resolve(&t)?;
        Ok(())
    }

    /// Instantiates cells and functions at parameter t.
    pub fn resolve(&self, t: &[f64]) -> Result<Fiber> {
        let mut cells = Vec::with_capacity(self.cells.len());
        for (ci, c) in self.cells.iter().enumerate() {
            let mut walls = Vec::with_capacity(c.walls.len());
            for (i, w) in c.walls.iter().enumerate() {
                let ctx = format!("cell {ci} wall {i}");
                walls.push(Wall {
                    lower: resolve_bound(&w.lower, i, t, &ctx)?,
                    upper: resolve_bound(&w.upper, i, t, &ctx)?,
                });
            }
            cells.push(Cell::new(walls)?);
        }
        let functions = self
            .functions
            .iter()
            .enumerate()
            .map(|(fi, f)| {
                Ok(SceneFunction {
                    name: f.name.clone().unwrap_or_else(|| format!("f{fi}")),
                    cell: f.cell,
                    function: resolve_function(f, self.dim, t, &format!("function {fi}"))?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Fiber {
            t: t.to_vec(),
            cells,
            functions,
        })
    }

    /// Sampled checks of every declared invariant, on every fiber.
    pub fn validate(&self, density: usize) -> Result<()> {
        for t in self.fibers() {
            let fiber = self.resolve(&t)?;
            for (ci, cell) in fiber.cells.iter().enumerate() {
                cell.validate(density).map_err(|e| match e {
                    Error::Validation { invariant, detail } => Error::Validation {
                        invariant,
                        detail: format!("cell {ci} at t={t:?}: {detail}"),
                    },
                    other => other,
                })?;
            }
            for sf in &fiber.functions {
                let cell = &fiber.cells[sf.cell];
                let samples = cell.samples(density);
                validate_function(&sf.function, &samples, &format!("{} at t={t:?}", sf.name))?;
            }
        }
        Ok(())
    }
}

fn resolve_bound(spec: &BoundSpec, dim: usize, t: &[f64], ctx: &str) -> Result<PreparedFunction> {
    match spec {
        BoundSpec::Constant(c) => {
            if !c.is_finite() {
                return Err(Error::validation("wall_range", format!("{ctx}: bound {c} is not finite")));
            }
            Ok(PreparedFunction::constant(*c, dim))
        }
        BoundSpec::Function(f) => {
            if f.monomials.iter().any(|m| m.exponents.len() != dim) {
                return Err(Error::validation(
                    "wall_dimension",
                    format!("{ctx}: wall functions must use exactly {dim} variables"),
                ));
            }
            resolve_function(f, dim, t, ctx)
        }
    }
}

fn resolve_function(spec: &FunctionSpec, dim: usize, t: &[f64], ctx: &str) -> Result<PreparedFunction> {
    let mut monomials = Vec::with_capacity(spec.monomials.len());
    for (mi, m) in spec.monomials.iter().enumerate() {
        if m.exponents.len() != dim {
            return Err(Error::validation(
                "function_dimension",
                format!("{ctx} monomial {mi}: {} exponents, expected {dim}", m.exponents.len()),
            ));
        }
        let coefficient = match (&m.coeff, &m.coeff_of_t) {
            (Some(c), None) => *c,
            (None, Some(e)) => {
                if e.arity() > t.len() {
                    return Err(Error::validation(
                        "t_dependence",
                        format!("{ctx} monomial {mi}: coefficient uses t_{} but t has {} entries", e.arity() - 1, t.len()),
                    ));
                }
                e.eval(t).map_err(|err| Error::validation("t_dependence", format!("{ctx} monomial {mi}: {err}")))?
            }
            _ => {
                return Err(Error::validation(
                    "coefficient",
                    format!("{ctx} monomial {mi}: give exactly one of coeff, coeff_of_t"),
                ))
            }
        };
        let range = m.range_bound.unwrap_or(1.0);
        monomials.push(
            BoundedMonomial::new(coefficient, m.exponents.clone(), range)
                .map_err(|e| Error::validation("range_bound", format!("{ctx} monomial {mi}: {e}")))?,
        );
    }
    PreparedFunction::new(monomials, spec.lead, spec.unit.clone(), spec.unit_mild, spec.c1_bound).map_err(|e| match e {
        Error::Validation { invariant, detail } => Error::Validation {
            invariant,
            detail: format!("{ctx}: {detail}"),
        },
        other => other,
    })
}

/// Range bounds, unit non-vanishing, the unit's mild certificate on the
/// image of the monomial map, and the declared C¹ bound.
pub fn validate_function(f: &PreparedFunction, samples: &[Vec<f64>], ctx: &str) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::validation("cell_samples", format!("{ctx}: no sample points inside the cell")));
    }
    let mut images = Vec::with_capacity(samples.len());
    for x in samples {
        let bs = f
            .monomial_values(x)
            .map_err(|e| Error::validation("monomial_domain", format!("{ctx} at {x:?}: {e}")))?;
        for (l, (b, m)) in bs.iter().zip(&f.monomials).enumerate() {
            if b.abs() > m.range_bound * (1.0 + 1e-12) {
                return Err(Error::validation(
                    "range_bound",
                    format!("{ctx}: |b_{l}({x:?})| = {} exceeds declared {}", b.abs(), m.range_bound),
                ));
            }
        }
        let u = f
            .unit
            .eval(&bs)
            .map_err(|e| Error::validation("unit_domain", format!("{ctx} at {x:?}: {e}")))?;
        if u.abs() < super::prepared::UNIT_MARGIN {
            return Err(Error::validation(
                "unit_nonvanishing",
                format!("{ctx}: unit is {u} at {x:?}"),
            ));
        }
        images.push(bs);
    }
    if !f.unit.is_constant() {
        let order = match f.unit_mild.order {
            Order::Finite(k) => k.min(6),
            Order::Infinite => 6,
        };
        let unit = &f.unit;
        let rep = verify_certificate(
            |y| {
                let space = JetSpace::new(y, order);
                let vars = crate::jets::Jet::variables(&space);
                Ok(vec![unit.eval_jet(&space, &vars)?])
            },
            &f.unit_mild,
            &images,
            order,
        )?;
        if !rep.pass {
            return Err(Error::validation(
                "unit_mild",
                format!(
                    "{ctx}: unit violates its declared certificate (ratio {} at image point {:?}, nu {:?})",
                    rep.worst_ratio, rep.worst_point, rep.worst_nu
                ),
            ));
        }
    } else {
        let u = f.unit.eval(&[])?;
        if u.abs() > f.unit_mild.b * (1.0 + 1e-12) {
            return Err(Error::validation("unit_mild", format!("{ctx}: constant unit {u} exceeds B")));
        }
    }
    if let Some(c1) = f.c1_bound {
        let norm = f.monomial_c1_norm(samples)?;
        if norm > c1 * (1.0 + 1e-12) {
            return Err(Error::validation(
                "c1_bound",
                format!("{ctx}: sampled C1 norm {norm} exceeds declared {c1}"),
            ));
        }
    }
    Ok(())
}
