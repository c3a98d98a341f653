//! The hyperbola family xy = t: the plain affine chart of each fiber is
//! 0-mild only with constants that blow up as t → 0, while the graph chart
//! over φ^∞ stays mild with one constant for every t.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Cell, PreparedFunction, Scene, Wall};
use crate::grid::clustered_grid;
use crate::mildness::{verify_certificate, MildParams, Order, VerificationReport};
use crate::substitution::{verify_main_mildpara, ChartMap, GraphChart, Substitution};

/// Growth per decade of t the naive constants must show.
pub const MIN_GROWTH_PER_DECADE: f64 = 3.0;

/// Fits the 0-mild constant of x ↦ (t + (1−t)x, f(t + (1−t)x)) on a
/// clustered grid; f defaults to t/x.
pub fn affine_fiber_a_star(t: f64, density: usize, order: u32) -> Result<VerificationReport> {
    let f = PreparedFunction::monomial(t, vec![crate::jets::Exponent::integer(-1)], 1.0)?;
    affine_fiber_with(t, &f, density, order)
}

fn affine_fiber_with(t: f64, f: &PreparedFunction, density: usize, order: u32) -> Result<VerificationReport> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParameter(format!("t must lie in (0,1), got {t}")));
    }
    let cell = Cell::new(vec![Wall {
        lower: PreparedFunction::constant(t, 0),
        upper: PreparedFunction::constant(1.0, 0),
    }])?;
    let chart = GraphChart::new(Substitution::phi_r(cell, 1)?, vec![f.clone()]);
    // A only affects the pass flag; the fit is what is reported.
    let params = MildParams::new(1.0, 1.0, 0.0, Order::Finite(order))?;
    verify_certificate(|x| chart.jets(x, order), &params, &clustered_grid(1, density), order)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DemoFiber {
    pub t: f64,
    #[serde(rename = "naive_A_star")]
    pub naive_a_star: f64,
    /// (A*(t)/A*(t_prev))^{1/decades}, absent for the first fiber.
    pub growth_per_decade: Option<f64>,
    #[serde(rename = "phi_inf_A_star")]
    pub phi_inf_a_star: f64,
    pub phi_inf_excluded: usize,
    pub phi_inf_pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DemoReport {
    pub fixture: String,
    pub kappa: f64,
    pub order: u32,
    pub density: usize,
    /// The single A used for every φ^∞ certificate.
    #[serde(rename = "uniform_A")]
    pub uniform_a: f64,
    pub fibers: Vec<DemoFiber>,
    pub monotone: bool,
    pub min_growth_per_decade: Option<f64>,
    pub pass: bool,
}

/// Runs both charts on every fiber of a one-parameter, one-dimensional
/// scene whose first function is the fiber's graph. Fibers are processed in
/// decreasing t.
pub fn hyperbola_demo(scene: &Scene, kappa: f64, order: u32, density: usize, uniform_a: f64) -> Result<DemoReport> {
    if scene.dim != 1 {
        return Err(Error::InvalidParameter(format!("demo needs a 1-dimensional scene, got {}", scene.dim)));
    }
    let mut ts = scene.fibers();
    if ts.iter().any(|t| t.len() != 1) {
        return Err(Error::InvalidParameter("demo needs a scalar family parameter".into()));
    }
    ts.sort_by(|a, b| b[0].total_cmp(&a[0]));
    let grid = clustered_grid(1, density);
    let mut fibers: Vec<DemoFiber> = Vec::with_capacity(ts.len());
    for t in ts {
        let fiber = scene.resolve(&t)?;
        let sf = fiber
            .functions
            .first()
            .ok_or_else(|| Error::InvalidParameter("scene has no function".into()))?;
        let naive = affine_fiber_with(t[0], &sf.function, density, order)?;
        let chart = GraphChart::new(
            Substitution::phi_inf(fiber.cells[sf.cell].clone(), kappa)?,
            vec![sf.function.clone()],
        );
        let good = verify_main_mildpara(scene.name(), &chart, kappa, &grid, order, uniform_a, None)?;
        let growth = fibers.last().map(|prev| {
            let decades = (prev.t / t[0]).log10();
            (naive.fitted_a_star / prev.naive_a_star).powf(1.0 / decades)
        });
        fibers.push(DemoFiber {
            t: t[0],
            naive_a_star: naive.fitted_a_star,
            growth_per_decade: growth,
            phi_inf_a_star: good.certificate.fitted_a_star,
            phi_inf_excluded: good.certificate.excluded,
            phi_inf_pass: good.pass,
        });
    }
    let monotone = fibers.windows(2).all(|w| w[1].naive_a_star > w[0].naive_a_star);
    let min_growth = fibers
        .iter()
        .filter_map(|f| f.growth_per_decade)
        .min_by(|a, b| a.total_cmp(b));
    let pass = fibers.len() >= 2
        && monotone
        && min_growth.is_some_and(|g| g >= MIN_GROWTH_PER_DECADE)
        && fibers.iter().all(|f| f.phi_inf_pass);
    Ok(DemoReport {
        fixture: scene.name().to_string(),
        kappa,
        order,
        density,
        uniform_a,
        fibers,
        monotone,
        min_growth_per_decade: min_growth,
        pass,
    })
}
