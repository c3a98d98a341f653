//! Stage-wise substitution maps from the unit cube onto a cell: the power
//! kernel x^r and the flat kernel e^{1−1/x^κ}, plus graph charts built on
//! them.

mod sup;
mod verify;

pub use sup::{exp_kernel_bound, golden_section_max, sup_inequality, SupReport};
pub use verify::{
    assemble_crpara, assemble_mildpara, component_bounds, verify_factor_exp, verify_factor_xr,
    verify_main_crpara, verify_main_mildpara, verify_weak_mildness_inf, verify_weak_mildness_r, Assembled,
    ComponentBound, IndexAlternative, IndexChoice, LemmaConstants, LemmaReport, TheoremReport,
};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Cell, PreparedFunction};
use crate::jets::{Exponent, Jet, JetSpace};

/// Constant c with e^{1−1/x^κ} mild for (c, e, 1/κ).
pub fn c_mild(kappa: f64) -> f64 {
    if kappa >= 1.0 {
        6.0 * kappa
    } else {
        3.0 * (2.0 / kappa).powf(1.0 / kappa)
    }
}

/// Constant c(κ) in the derivative bounds of the exponential substitution:
/// κ for κ ≥ 1, 1 below.
pub fn c_inner(kappa: f64) -> f64 {
    if kappa >= 1.0 {
        kappa
    } else {
        1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// x ↦ x^r
    Power(u32),
    /// x ↦ e^{1−1/x^κ}
    Exp(f64),
}

impl Kernel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Power(0) => Err(Error::InvalidParameter("power kernel needs r >= 1".into())),
            Kernel::Exp(k) if !(k > 0.0 && k.is_finite()) => {
                Err(Error::InvalidParameter(format!("kappa must be positive, got {k}")))
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Kernel::Power(r) => x.powi(r as i32),
            Kernel::Exp(k) => (1.0 - x.powf(-k)).exp(),
        }
    }

    /// Kernel applied to a jet.
    pub fn apply(&self, x: &Jet) -> Result<Jet> {
        match *self {
            Kernel::Power(r) => x.powf(&Exponent::integer(r as i64)),
            Kernel::Exp(k) => Ok(x.powf(&kappa_exponent(k).neg())?.scale(-1.0).add_scalar(1.0).exp()),
        }
    }
}

fn kappa_exponent(k: f64) -> Exponent {
    // keep integer κ exact
    if k.fract() == 0.0 && k.abs() < 1e9 {
        Exponent::integer(k as i64)
    } else {
        Exponent::from_f64(k)
    }
}

/// A map from (0,1)^m producing component jets; implemented by
/// substitution maps and graph charts.
pub trait ChartMap: Sync + Send {
    fn domain_dim(&self) -> usize;

    /// Jets of every output component at x.
    fn jets(&self, x: &[f64], order: u32) -> Result<Vec<Jet>>;

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.jets(x, 0)?.iter().map(|j| j.value()).collect())
    }
}

/// Jets of one stage: φ_i = α_i∘φ̄ + (β_i − α_i)∘φ̄ · K(x_i).
#[derive(Clone, Debug)]
pub struct Stage {
    pub alpha: Jet,
    pub width: Jet,
    pub kernel: Jet,
    pub component: Jet,
}

/// φ = φ^{(m)}∘…∘φ^{(1)}, where stage i replaces x_i by
/// α_i + (β_i − α_i)·K(x_i) with the walls evaluated at the already
/// substituted coordinates.
#[derive(Clone, Debug)]
pub struct Substitution {
    cell: Cell,
    kernel: Kernel,
}

impl Substitution {
    pub fn new(cell: Cell, kernel: Kernel) -> Result<Self> {
        kernel.validate()?;
        Ok(Substitution { cell, kernel })
    }

    /// P_r: componentwise x_i ↦ x_i^r on the unit cube.
    pub fn power_map(r: u32, m: usize) -> Result<Self> {
        Substitution::new(Cell::unit_cube(m), Kernel::Power(r))
    }

    pub fn phi_r(cell: Cell, r: u32) -> Result<Self> {
        Substitution::new(cell, Kernel::Power(r))
    }

    pub fn phi_inf(cell: Cell, kappa: f64) -> Result<Self> {
        Substitution::new(cell, Kernel::Exp(kappa))
    }

    pub fn cell(&self) -> &Cell {
        &self.cell
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn dim(&self) -> usize {
        self.cell.dim()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        if let Some(&bad) = x.iter().find(|&&v| !(v > 0.0 && v < 1.0)) {
            return Err(Error::Domain {
                op: "substitution",
                value: bad,
            });
        }
        Ok(())
    }

    /// Stage jets at x in a fresh jet space of the given order.
    pub fn stages(&self, x: &[f64], order: u32) -> Result<Vec<Stage>> {
        self.check_point(x)?;
        let space = JetSpace::new(x, order);
        self.stages_in(&space)
    }

    fn stages_in(&self, space: &Arc<JetSpace>) -> Result<Vec<Stage>> {
        let vars = Jet::variables(space);
        let mut comps: Vec<Jet> = Vec::with_capacity(self.dim());
        let mut out = Vec::with_capacity(self.dim());
        for (i, wall) in self.cell.walls().iter().enumerate() {
            let alpha = wall.lower.eval_on_jets(space, &comps).map_err(|e| excluded_if_domain(e, i))?;
            let beta = wall.upper.eval_on_jets(space, &comps).map_err(|e| excluded_if_domain(e, i))?;
            let width = beta.sub(&alpha)?;
            let kernel = self.kernel.apply(&vars[i])?;
            let component = alpha.add(&width.mul(&kernel)?)?;
            let (a, b, v) = (alpha.value(), beta.value(), component.value());
            if !(a < v && v < b) {
                return Err(Error::Excluded(format!(
                    "stage {i} lands on the boundary ({a} < {v} < {b} fails)"
                )));
            }
            comps.push(component.clone());
            out.push(Stage {
                alpha,
                width,
                kernel,
                component,
            });
        }
        Ok(out)
    }

    /// Component jets of φ at x.
    pub fn component_jets(&self, x: &[f64], order: u32) -> Result<Vec<Jet>> {
        Ok(self.stages(x, order)?.into_iter().map(|s| s.component).collect())
    }

    /// Largest relative discrepancy between the stage jets and the explicit
    /// formula (α∘φ̄)^{(ν)} + ((β−α)∘φ̄)^{(ν̄)}·r(r−1)…(r−ν_i+1)x_i^{r−ν_i},
    /// ν̄ being ν with entry i cleared. Power kernels only.
    pub fn recursion_identity_error(&self, x: &[f64], order: u32) -> Result<f64> {
        let Kernel::Power(r) = self.kernel else {
            return Err(Error::InvalidParameter(
                "the stage recursion identity is checked for the power kernel".into(),
            ));
        };
        let stages = self.stages(x, order)?;
        let mut worst: f64 = 0.0;
        for (i, st) in stages.iter().enumerate() {
            let layout = st.component.layout();
            for nu in layout.indices() {
                let lhs = st.component.derivative(nu).expect("same layout");
                let k = nu.get(i);
                let alpha_term = st.alpha.derivative(nu).expect("same layout");
                let nubar = nu.with_entry(i, 0);
                let ff = Exponent::integer(r as i64).falling_factorial(k);
                let width_term = if ff == 0.0 {
                    0.0
                } else {
                    st.width.derivative(&nubar).expect("same layout") * ff * x[i].powi(r as i32 - k as i32)
                };
                let rhs = alpha_term + width_term;
                let scale = lhs.abs().max(alpha_term.abs() + width_term.abs());
                if scale > 0.0 {
                    worst = worst.max((lhs - rhs).abs() / scale);
                }
            }
        }
        Ok(worst)
    }
}

fn excluded_if_domain(e: Error, stage: usize) -> Error {
    match e {
        Error::Domain { op, value } => Error::Excluded(format!("wall {stage}: {op} at {value}")),
        other => other,
    }
}

impl ChartMap for Substitution {
    fn domain_dim(&self) -> usize {
        self.dim()
    }

    fn jets(&self, x: &[f64], order: u32) -> Result<Vec<Jet>> {
        self.component_jets(x, order)
    }
}

/// The cell's affine stacking map followed by x ↦ x^r in every coordinate:
/// (ψ_1(x)^r, …, ψ_m(x)^r) with ψ_i = α_i(x̄) + (β_i − α_i)(x̄)·x_i and the
/// walls evaluated at the *unsubstituted* coordinates. Not a stage-wise
/// construction; kept as a negative control.
#[derive(Clone, Debug)]
pub struct PowerAfterAffine {
    cell: Cell,
    r: u32,
}

impl PowerAfterAffine {
    pub fn new(cell: Cell, r: u32) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParameter("r must be >= 1".into()));
        }
        Ok(PowerAfterAffine { cell, r })
    }

    pub fn cell(&self) -> &Cell {
        &self.cell
    }
}

impl ChartMap for PowerAfterAffine {
    fn domain_dim(&self) -> usize {
        self.cell.dim()
    }

    fn jets(&self, x: &[f64], order: u32) -> Result<Vec<Jet>> {
        let affine = Substitution::phi_r(self.cell.clone(), 1)?;
        let psi = affine.component_jets(x, order)?;
        let pow = Exponent::integer(self.r as i64);
        let out: Vec<Jet> = psi.iter().map(|j| j.powf(&pow)).collect::<Result<_>>()?;
        let y: Vec<f64> = out.iter().map(|j| j.value()).collect();
        if !self.cell.contains(&y) {
            return Err(Error::Excluded(format!("image {y:?} not inside the cell")));
        }
        Ok(out)
    }
}

/// x ↦ (φ(x), f_1(φ(x)), …, f_k(φ(x))): the parametrization of the graph
/// of the functions over the cell.
pub struct GraphChart<M: ChartMap> {
    pub map: M,
    pub functions: Vec<PreparedFunction>,
}

impl<M: ChartMap> GraphChart<M> {
    pub fn new(map: M, functions: Vec<PreparedFunction>) -> Self {
        GraphChart { map, functions }
    }
}

impl<M: ChartMap> ChartMap for GraphChart<M> {
    fn domain_dim(&self) -> usize {
        self.map.domain_dim()
    }

    fn jets(&self, x: &[f64], order: u32) -> Result<Vec<Jet>> {
        let mut comps = self.map.jets(x, order)?;
        let Some(space) = comps.first().map(|j| j.space().clone()) else {
            return Ok(comps);
        };
        let base = comps.clone();
        for f in &self.functions {
            let j = f.eval_on_jets(&space, &base).map_err(|e| match e {
                Error::Domain { op, value } => Error::Excluded(format!("{op} at {value}")),
                other => other,
            })?;
            comps.push(j);
        }
        Ok(comps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Wall;

    pub(crate) fn cusp_cell() -> Cell {
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
    fn power_map_on_cube() {
        let p = Substitution::power_map(2, 2).unwrap();
        let v = p.eval(&[0.5, 0.5]).unwrap();
        assert_eq!(v, vec![0.25, 0.25]);
    }

    #[test]
    fn cusp_stage_values() {
        let p = Substitution::phi_r(cusp_cell(), 1).unwrap();
        let v = p.eval(&[0.25, 0.5]).unwrap();
        assert!((v[0] - 0.25).abs() < 1e-15);
        assert!((v[1] - 0.5625).abs() < 1e-15);
    }

    #[test]
    fn exp_kernel_first_derivative() {
        let sp = JetSpace::new(&[0.5], 1);
        let j = Kernel::Exp(1.0).apply(&Jet::variable(&sp, 0).unwrap()).unwrap();
        let d = j.derivative(&crate::multiindex::MultiIndex::new(vec![1])).unwrap();
        assert!((d - 4.0 / std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn recursion_identity_holds() {
        let cell = cusp_cell();
        for r in 1..=5 {
            let p = Substitution::phi_r(cell.clone(), r).unwrap();
            for x in crate::grid::clustered_grid(2, 6) {
                let e = p.recursion_identity_error(&x, 5).unwrap();
                assert!(e <= 1e-10, "r={r} x={x:?} err={e}");
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Substitution::power_map(0, 2).is_err());
        assert!(Substitution::phi_inf(cusp_cell(), 0.0).is_err());
        let p = Substitution::power_map(2, 2).unwrap();
        assert!(p.eval(&[0.0, 0.5]).is_err());
        assert!(p.eval(&[0.5]).is_err());
    }

    #[test]
    fn kernel_constants() {
        assert_eq!(c_mild(1.0), 6.0);
        assert_eq!(c_mild(2.0), 12.0);
        assert!((c_mild(0.5) - 3.0 * 16.0).abs() < 1e-12);
        assert_eq!(c_inner(0.5), 1.0);
        assert_eq!(c_inner(3.0), 3.0);
    }
}
