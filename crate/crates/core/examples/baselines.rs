//! Recomputes the reference constants stored under "baseline" in the
//! bundled fixtures. Each is the largest fitted value over the sweep,
//! rounded up to two decimals; the demo growth values are stored as fitted.
//!
//!     cargo run --release --example baselines

use std::collections::BTreeMap;

use mildlab::geometry::fixtures;
use mildlab::grid::clustered_grid;
use mildlab::substitution::*;

fn up(x: f64) -> f64 {
    (x * (1.0 + 1e-9) * 100.0).ceil() / 100.0
}

fn main() {
    let mut cusp = BTreeMap::new();
    let scene = fixtures::cusp();
    let fiber = scene.resolve(&[]).unwrap();
    let cell = fiber.cells[0].clone();
    let f = fiber.functions[0].function.clone();
    let g = clustered_grid(2, 16);
    let (mut wa, mut wb, mut fa, mut fb, mut ca) = (0f64, 0f64, 0f64, 0f64, 0f64);
    for r in 1..=6 {
        let w = verify_weak_mildness_r("cusp", &cell, r, &g, r, None).unwrap();
        let x = verify_factor_xr("cusp", &cell, r, &g, r, IndexChoice::ArgMin, None).unwrap();
        let chart = GraphChart::new(Substitution::phi_r(cell.clone(), r).unwrap(), vec![f.clone()]);
        let t = verify_main_crpara("cusp", &chart, r, &g, 1e6, None).unwrap();
        wa = wa.max(w.fitted_a);
        wb = wb.max(w.fitted_b);
        fa = fa.max(x.fitted_a);
        fb = fb.max(x.fitted_b);
        ca = ca.max(t.fitted_a_normalised);
    }
    cusp.insert("weak_r_A", up(wa));
    cusp.insert("weak_r_B", up(wb));
    cusp.insert("factor_r_A", up(fa));
    cusp.insert("factor_r_B", up(fb));
    cusp.insert("crpara_A", up(ca));
    let w = verify_weak_mildness_inf("cusp", &cell, 1.0, &g, 8, None).unwrap();
    let x = verify_factor_exp("cusp", &cell, 1.0, &g, 8, IndexChoice::ArgMin, None).unwrap();
    cusp.insert("weak_inf_A", up(w.fitted_a));
    cusp.insert("weak_inf_B", up(w.fitted_b));
    cusp.insert("factor_inf_A", up(x.fitted_a));
    cusp.insert("factor_inf_B", up(x.fitted_b));
    println!("cusp {}", serde_json::to_string_pretty(&cusp).unwrap());

    let mut hyp = BTreeMap::new();
    let scene = fixtures::hyperbola();
    let g = clustered_grid(1, 64);
    let (mut wa, mut wb, mut fa, mut fb, mut ma) = (0f64, 0f64, 0f64, 0f64, 0f64);
    for t in scene.fibers() {
        let fiber = scene.resolve(&t).unwrap();
        let cell = fiber.cells[0].clone();
        let f = fiber.functions[0].function.clone();
        let w = verify_weak_mildness_inf("hyperbola", &cell, 1.0, &g, 8, None).unwrap();
        let x = verify_factor_exp("hyperbola", &cell, 1.0, &g, 8, IndexChoice::ArgMin, None).unwrap();
        let chart = GraphChart::new(Substitution::phi_inf(cell, 1.0).unwrap(), vec![f]);
        let m = verify_main_mildpara("hyperbola", &chart, 1.0, &g, 8, 1e6, None).unwrap();
        wa = wa.max(w.fitted_a);
        wb = wb.max(w.fitted_b);
        fa = fa.max(x.fitted_a);
        fb = fb.max(x.fitted_b);
        ma = ma.max(m.certificate.fitted_a_star);
        let demo = mildlab::demo::affine_fiber_a_star(t[0], 64, 8).unwrap();
        hyp.insert(format!("demo_A_star_t={}", t[0]).leak() as &str, demo.fitted_a_star);
    }
    hyp.insert("weak_inf_A", up(wa));
    hyp.insert("weak_inf_B", up(wb));
    hyp.insert("factor_inf_A", up(fa));
    hyp.insert("factor_inf_B", up(fb));
    hyp.insert("mildpara_A", up(ma));
    println!("hyperbola {}", serde_json::to_string_pretty(&hyp).unwrap());
}
