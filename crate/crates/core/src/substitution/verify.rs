//! Sampled checks of the derivative bounds satisfied by the substitution
//! maps, and of the final mildness of graph charts built on them.

use serde::{Deserialize, Serialize};

use super::{c_inner, ChartMap, GraphChart, Substitution};
use crate::error::{Error, Result};
use crate::geometry::{Cell, PreparedFunction};
use crate::jets::{Jet, Layout};
use crate::mildness::{ln_factorial, verify_certificate, MildParams, Order, VerificationReport, CERTIFICATE_TOLERANCE};
use crate::multiindex::MultiIndex;
use crate::sweep;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaConstants {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
}

/// Which coordinate supplies the extra factor in the factor lemmas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexChoice {
    /// I = argmin{x_i : ν_i ≠ 0}
    ArgMin,
    Fixed(usize),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IndexAlternative {
    pub index: usize,
    #[serde(rename = "fitted_A")]
    pub fitted_a: f64,
    #[serde(rename = "fitted_B")]
    pub fitted_b: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub fixture: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    #[serde(rename = "kappa", skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    pub order: u32,
    pub samples: usize,
    pub excluded: usize,
    #[serde(rename = "fitted_A")]
    pub fitted_a: f64,
    #[serde(rename = "fitted_B")]
    pub fitted_b: f64,
    /// Constants checked against; the fitted ones when none were declared.
    pub checked: LemmaConstants,
    pub declared: bool,
    pub worst_ratio: f64,
    pub worst_point: Option<Vec<f64>>,
    pub worst_nu: Option<MultiIndex>,
    pub worst_component: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alternatives: Vec<IndexAlternative>,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug)]
struct Peak {
    ln_q: f64,
    component: usize,
    nu: usize,
}

/// Largest normalised requirement per total degree at one sample.
#[derive(Clone, Debug)]
struct Profile {
    per_n: Vec<Option<Peak>>,
}

impl Profile {
    fn new(order: u32) -> Self {
        Profile {
            per_n: vec![None; order as usize + 1],
        }
    }

    fn push(&mut self, n: u32, ln_q: f64, component: usize, nu: usize) {
        let slot = &mut self.per_n[n as usize];
        if slot.is_none_or(|p| ln_q > p.ln_q) {
            *slot = Some(Peak { ln_q, component, nu });
        }
    }
}

struct FitOutcome {
    a: f64,
    b: f64,
    checked: LemmaConstants,
    samples: usize,
    excluded: usize,
    worst_ratio: f64,
    worst_point: Option<Vec<f64>>,
    worst_nu: Option<MultiIndex>,
    worst_component: Option<usize>,
    pass: bool,
}

/// Normaliser: given component index, its jet, ν (with layout rank) and the
/// sample point, the ln of the quantity the lemma divides |∂^ν φ_ℓ| by, or
/// None when the lemma says nothing about this ν.
type Normaliser<'a> = dyn Fn(usize, &Jet, &MultiIndex, &[f64]) -> Option<f64> + Sync + 'a;

fn profile(jets: &[Jet], x: &[f64], order: u32, norm: &Normaliser) -> Option<Profile> {
    if jets.iter().any(|j| !j.is_finite()) {
        return None;
    }
    let mut p = Profile::new(order);
    for (ci, jet) in jets.iter().enumerate() {
        let layout = jet.layout();
        for (i, d) in jet.derivatives().into_iter().enumerate() {
            let n = layout.total(i);
            if n > order {
                break;
            }
            if d == 0.0 {
                continue;
            }
            let nu = &layout.indices()[i];
            if let Some(ln_den) = norm(ci, jet, nu, x) {
                p.push(n, d.abs().ln() - ln_den, ci, i);
            }
        }
    }
    Some(p)
}

fn run_fit<F>(
    samples: &[Vec<f64>],
    order: u32,
    declared: Option<LemmaConstants>,
    jets_at: F,
    norm: &Normaliser,
) -> Result<FitOutcome>
where
    F: Fn(&[f64]) -> Result<Vec<Jet>> + Sync + Send,
{
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let profiles: Vec<Result<Option<Profile>>> = sweep::map(samples, |x| match jets_at(x) {
        Ok(j) => Ok(profile(&j, x, order, norm)),
        Err(Error::Excluded(_)) => Ok(None),
        Err(e) => Err(e),
    });
    let mut kept: Vec<(&Vec<f64>, Profile)> = Vec::with_capacity(samples.len());
    let mut excluded = 0;
    for (x, p) in samples.iter().zip(profiles) {
        match p? {
            Some(p) => kept.push((x, p)),
            None => excluded += 1,
        }
    }
    let mut ln_b0 = 0.0f64;
    for (_, p) in &kept {
        if let Some(pk) = p.per_n[0] {
            ln_b0 = ln_b0.max(pk.ln_q);
        }
    }
    let b = ln_b0.exp();
    let mut a = 0.0f64;
    for (_, p) in &kept {
        for (n, pk) in p.per_n.iter().enumerate().skip(1) {
            if let Some(pk) = pk {
                a = a.max(((pk.ln_q - ln_b0) / n as f64).exp());
            }
        }
    }
    let checked = declared.unwrap_or(LemmaConstants { a: a.max(f64::MIN_POSITIVE), b });
    let (ln_a, ln_b) = (checked.a.ln(), checked.b.ln());
    let mut worst_ratio = 0.0f64;
    let mut worst: Option<(&Vec<f64>, Peak)> = None;
    for (x, p) in &kept {
        for (n, pk) in p.per_n.iter().enumerate() {
            if let Some(pk) = pk {
                let ratio = (pk.ln_q - ln_b - n as f64 * ln_a).exp();
                if worst.is_none() || ratio > worst_ratio {
                    worst_ratio = ratio;
                    worst = Some((x, *pk));
                }
            }
        }
    }
    let dim = samples[0].len();
    let layout = Layout::get(dim, order);
    Ok(FitOutcome {
        a,
        b,
        checked,
        samples: samples.len(),
        excluded,
        worst_ratio,
        worst_point: worst.map(|(x, _)| x.clone()),
        worst_nu: worst.map(|(_, pk)| layout.indices()[pk.nu].clone()),
        worst_component: worst.map(|(_, pk)| pk.component),
        pass: !kept.is_empty() && worst_ratio <= 1.0 + CERTIFICATE_TOLERANCE,
    })
}

fn ln_weight(nu: &MultiIndex, x: &[f64], power: f64) -> f64 {
    nu.entries()
        .iter()
        .zip(x)
        .map(|(&k, xi)| power * k as f64 * xi.ln())
        .sum()
}

fn chosen_index(choice: IndexChoice, nu: &MultiIndex, x: &[f64]) -> Option<usize> {
    match choice {
        IndexChoice::Fixed(i) => (i < nu.dim() && nu.get(i) != 0).then_some(i),
        IndexChoice::ArgMin => nu
            .entries()
            .iter()
            .enumerate()
            .filter(|(_, &k)| k != 0)
            .min_by(|a, b| x[a.0].total_cmp(&x[b.0]))
            .map(|(i, _)| i),
    }
}

fn report(lemma: &str, fixture: &str, r: Option<u32>, kappa: Option<f64>, order: u32, declared: bool, f: FitOutcome) -> LemmaReport {
    LemmaReport {
        lemma: lemma.to_string(),
        fixture: fixture.to_string(),
        r,
        kappa,
        order,
        samples: f.samples,
        excluded: f.excluded,
        fitted_a: f.a,
        fitted_b: f.b,
        checked: f.checked,
        declared,
        worst_ratio: f.worst_ratio,
        worst_point: f.worst_point,
        worst_nu: f.worst_nu,
        worst_component: f.worst_component,
        alternatives: Vec::new(),
        pass: f.pass,
    }
}

/// |∂^ν φ_ℓ / φ_ℓ| ≤ x^{−ν} B (A r)^{|ν|} |ν|! for the power substitution.
pub fn verify_weak_mildness_r(
    fixture: &str,
    cell: &Cell,
    r: u32,
    samples: &[Vec<f64>],
    order: u32,
    declared: Option<LemmaConstants>,
) -> Result<LemmaReport> {
    let phi = Substitution::phi_r(cell.clone(), r)?;
    let ln_r = (r as f64).ln();
    let norm = move |_: usize, jet: &Jet, nu: &MultiIndex, x: &[f64]| {
        let n = nu.total();
        Some(jet.value().abs().ln() + n as f64 * ln_r + ln_factorial(n) - ln_weight(nu, x, 1.0))
    };
    let f = run_fit(samples, order, declared, |x| phi.component_jets(x, order), &norm)?;
    Ok(report("weak_mildness_r", fixture, Some(r), None, order, declared.is_some(), f))
}

/// |∂^ν φ_ℓ| ≤ x_I^r x^{−ν} B (A r)^{|ν|} |ν|! whenever ν_I ≠ 0.
pub fn verify_factor_xr(
    fixture: &str,
    cell: &Cell,
    r: u32,
    samples: &[Vec<f64>],
    order: u32,
    choice: IndexChoice,
    declared: Option<LemmaConstants>,
) -> Result<LemmaReport> {
    let phi = Substitution::phi_r(cell.clone(), r)?;
    let run = |choice: IndexChoice, declared: Option<LemmaConstants>| {
        let ln_r = (r as f64).ln();
        let norm = move |_: usize, _: &Jet, nu: &MultiIndex, x: &[f64]| {
            let i = chosen_index(choice, nu, x)?;
            let n = nu.total();
            Some(n as f64 * ln_r + ln_factorial(n) + r as f64 * x[i].ln() - ln_weight(nu, x, 1.0))
        };
        run_fit(samples, order, declared, |x| phi.component_jets(x, order), &norm)
    };
    factor_report("factor_xr", fixture, Some(r), None, order, cell.dim(), choice, declared, run)
}

/// |∂^ν φ_ℓ / φ_ℓ| ≤ x^{−(κ+1)ν} B (c A)^{|ν|} |ν|! for the exponential
/// substitution, c = c_inner(κ).
pub fn verify_weak_mildness_inf(
    fixture: &str,
    cell: &Cell,
    kappa: f64,
    samples: &[Vec<f64>],
    order: u32,
    declared: Option<LemmaConstants>,
) -> Result<LemmaReport> {
    let phi = Substitution::phi_inf(cell.clone(), kappa)?;
    let ln_c = c_inner(kappa).ln();
    let norm = move |_: usize, jet: &Jet, nu: &MultiIndex, x: &[f64]| {
        let n = nu.total();
        Some(jet.value().abs().ln() + n as f64 * ln_c + ln_factorial(n) - ln_weight(nu, x, kappa + 1.0))
    };
    let f = run_fit(samples, order, declared, |x| phi.component_jets(x, order), &norm)?;
    Ok(report("weak_mildness_inf", fixture, None, Some(kappa), order, declared.is_some(), f))
}

/// |∂^ν φ_ℓ| ≤ e^{1−1/x_I^κ} x^{−(κ+1)ν} B (c A)^{|ν|} |ν|! whenever ν_I ≠ 0.
#[allow(clippy::too_many_arguments)]
pub fn verify_factor_exp(
    fixture: &str,
    cell: &Cell,
    kappa: f64,
    samples: &[Vec<f64>],
    order: u32,
    choice: IndexChoice,
    declared: Option<LemmaConstants>,
) -> Result<LemmaReport> {
    let phi = Substitution::phi_inf(cell.clone(), kappa)?;
    let run = |choice: IndexChoice, declared: Option<LemmaConstants>| {
        let ln_c = c_inner(kappa).ln();
        let norm = move |_: usize, _: &Jet, nu: &MultiIndex, x: &[f64]| {
            let i = chosen_index(choice, nu, x)?;
            let n = nu.total();
            let flat = 1.0 - x[i].powf(-kappa);
            Some(n as f64 * ln_c + ln_factorial(n) + flat - ln_weight(nu, x, kappa + 1.0))
        };
        run_fit(samples, order, declared, |x| phi.component_jets(x, order), &norm)
    };
    factor_report("factor_exp", fixture, None, Some(kappa), order, cell.dim(), choice, declared, run)
}

#[allow(clippy::too_many_arguments)]
fn factor_report<F>(
    lemma: &str,
    fixture: &str,
    r: Option<u32>,
    kappa: Option<f64>,
    order: u32,
    dim: usize,
    choice: IndexChoice,
    declared: Option<LemmaConstants>,
    run: F,
) -> Result<LemmaReport>
where
    F: Fn(IndexChoice, Option<LemmaConstants>) -> Result<FitOutcome>,
{
    let main = run(choice, declared)?;
    let reference = main.checked;
    let mut rep = report(lemma, fixture, r, kappa, order, declared.is_some(), main);
    for i in 0..dim {
        let alt = run(IndexChoice::Fixed(i), Some(reference))?;
        rep.alternatives.push(IndexAlternative {
            index: i,
            fitted_a: alt.a,
            fitted_b: alt.b,
            pass: alt.pass,
        });
    }
    Ok(rep)
}

/// Per-component constants (M_b, B_b) entering the assembled constants:
/// growth of the monomial part and a C¹ bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentBound {
    #[serde(rename = "M_b")]
    pub m_b: f64,
    #[serde(rename = "B_b")]
    pub b_b: f64,
}

/// Bounds for the graph components: each coordinate contributes (1, 1);
/// a function with constant unit F contributes (M_{b_j}, |F|·C¹), otherwise
/// (A_f, B_f·C¹) with the prepared-bound constants. A missing declared C¹
/// bound is replaced by the sampled norm on `cell_samples`.
pub fn component_bounds(dim: usize, functions: &[PreparedFunction], cell_samples: &[Vec<f64>]) -> Result<Vec<ComponentBound>> {
    let mut out = vec![ComponentBound { m_b: 1.0, b_b: 1.0 }; dim];
    for f in functions {
        let c1 = match f.c1_bound {
            Some(c) => c,
            None => f.monomial_c1_norm(cell_samples)?,
        };
        if f.unit.is_constant() {
            let u = f.unit.eval(&[])?.abs();
            out.push(ComponentBound {
                m_b: f.monomials[f.lead].growth(),
                b_b: u * c1,
            });
        } else {
            let k = f.bound_constants();
            out.push(ComponentBound {
                m_b: k.a_f,
                b_b: k.b_f * c1,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assembled {
    /// Ã = A_C (m M_b B_C + 1), maximised over components.
    #[serde(rename = "A_tilde")]
    pub a_tilde: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
}

fn tilde(cell: LemmaConstants, comps: &[ComponentBound], m: usize) -> (f64, f64) {
    let mut a_tilde: f64 = 0.0;
    let mut b: f64 = 0.0;
    for c in comps {
        let k = m as f64 * c.m_b * cell.b;
        a_tilde = a_tilde.max(cell.a * (k + 1.0));
        b = b.max(c.b_b * k / (k + 1.0));
    }
    (a_tilde, b)
}

/// Constants of the C^r statement: f∘φ^r is (A r, B, 0)-mild with
/// A = A_C(m M_b B_C + 1).
pub fn assemble_crpara(cell: LemmaConstants, comps: &[ComponentBound], m: usize) -> Assembled {
    let (a_tilde, b) = tilde(cell, comps, m);
    Assembled { a_tilde, a: a_tilde, b }
}

/// Constants of the exponential statement: f∘φ^∞ is (A, B, 1 + 1/κ)-mild
/// with A = 4κÃ for κ ≥ 1 and ((κ+1)/κ)^{(κ+1)/κ} Ã below, B = e·B.
pub fn assemble_mildpara(cell: LemmaConstants, comps: &[ComponentBound], m: usize, kappa: f64) -> Assembled {
    let (a_tilde, b) = tilde(cell, comps, m);
    let a = if kappa >= 1.0 {
        4.0 * kappa * a_tilde
    } else {
        ((kappa + 1.0) / kappa).powf((kappa + 1.0) / kappa) * a_tilde
    };
    Assembled {
        a_tilde,
        a,
        b: std::f64::consts::E * b,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem: String,
    pub fixture: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    #[serde(rename = "kappa", skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    pub order: u32,
    /// Certificate checked on the graph chart.
    pub certificate: VerificationReport,
    /// A*(r)/r for the power statement, A* otherwise.
    #[serde(rename = "fitted_A_normalised")]
    pub fitted_a_normalised: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assembled: Option<Assembled>,
    pub pass: bool,
}

/// Checks the graph chart over φ^r against (A·r, 1, 0) up to order r.
pub fn verify_main_crpara<M: ChartMap>(
    fixture: &str,
    chart: &GraphChart<M>,
    r: u32,
    samples: &[Vec<f64>],
    a_per_r: f64,
    assembled: Option<Assembled>,
) -> Result<TheoremReport> {
    let params = MildParams::new(a_per_r * r as f64, 1.0, 0.0, Order::Finite(r))?;
    let cert = verify_certificate(|x| chart.jets(x, r), &params, samples, r)?;
    Ok(TheoremReport {
        theorem: "crpara".into(),
        fixture: fixture.into(),
        r: Some(r),
        kappa: None,
        order: r,
        fitted_a_normalised: cert.fitted_a_star / r as f64,
        pass: cert.pass,
        certificate: cert,
        assembled,
    })
}

/// Checks the graph chart over φ^∞ against (A, 1, 1 + 1/κ) up to `order`.
pub fn verify_main_mildpara<M: ChartMap>(
    fixture: &str,
    chart: &GraphChart<M>,
    kappa: f64,
    samples: &[Vec<f64>],
    order: u32,
    a: f64,
    assembled: Option<Assembled>,
) -> Result<TheoremReport> {
    let params = MildParams::new(a, 1.0, 1.0 + 1.0 / kappa, Order::Infinite)?;
    let cert = verify_certificate(|x| chart.jets(x, order), &params, samples, order)?;
    Ok(TheoremReport {
        theorem: "mildpara".into(),
        fixture: fixture.into(),
        r: None,
        kappa: Some(kappa),
        order,
        fitted_a_normalised: cert.fitted_a_star,
        pass: cert.pass,
        certificate: cert,
        assembled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Wall;
    use crate::grid::clustered_grid;
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
    fn power_map_weak_mildness_is_tight() {
        // On the cube φ^r = P_r and |∂^k x^r / x^r| = r(r−1)…(r−k+1) x^{−k}
        // ≤ r^k k!, so A* ≤ 1 and B* = 1.
        let cube = Cell::unit_cube(2);
        let samples = clustered_grid(2, 8);
        for r in 1..=4 {
            let rep = verify_weak_mildness_r("cube", &cube, r, &samples, r, None).unwrap();
            assert!(rep.fitted_a <= 1.0 + 1e-12, "r={r} A={}", rep.fitted_a);
            assert_eq!(rep.fitted_b, 1.0);
        }
    }

    #[test]
    fn cusp_lemmas_have_stable_constants() {
        let cell = cusp_cell();
        let samples = clustered_grid(2, 8);
        let mut worst: f64 = 0.0;
        for r in 1..=4 {
            let w = verify_weak_mildness_r("cusp", &cell, r, &samples, r, None).unwrap();
            let f = verify_factor_xr("cusp", &cell, r, &samples, r, IndexChoice::ArgMin, None).unwrap();
            assert!(w.pass && f.pass);
            worst = worst.max(w.fitted_a).max(f.fitted_a);
        }
        assert!(worst < 10.0, "{worst}");
    }

    #[test]
    fn declared_constants_can_fail() {
        let cell = cusp_cell();
        let samples = clustered_grid(2, 8);
        let tight = LemmaConstants { a: 0.01, b: 1.0 };
        let rep = verify_weak_mildness_r("cusp", &cell, 3, &samples, 3, Some(tight)).unwrap();
        assert!(!rep.pass);
        assert!(rep.worst_ratio > 1.0);
    }

    #[test]
    fn assembly_formulas() {
        let cell = LemmaConstants { a: 1.0, b: 1.0 };
        let comps = [ComponentBound { m_b: 1.0, b_b: 1.0 }];
        let a = assemble_mildpara(cell, &comps, 1, 1.0);
        assert_eq!(a.a_tilde, 2.0);
        assert_eq!(a.a, 8.0);
        let c = assemble_crpara(cell, &comps, 2);
        assert_eq!(c.a, 3.0);
    }
}
