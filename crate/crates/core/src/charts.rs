//! C^r charts: uniform subdivision of (0,1)^m into N^m cubes, each pulled
//! back through a mild map and rescaled so its derivatives have norm ≤ 1.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{clustered_axis, tensor};
use crate::jets::{Jet, JetSpace};
use crate::mildness::{ln_factorial, CERTIFICATE_TOLERANCE};
use crate::substitution::ChartMap;
use crate::sweep;

/// Cap on N^m so a typo cannot allocate millions of charts.
pub const MAX_CHARTS: u64 = 4_000_000;

const FACE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMode {
    /// max |f^{(ν)}| / |ν|!
    Crnorm,
    /// max |f^{(ν)}|
    Supnorm,
}

impl fmt::Display for NormMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormMode::Crnorm => "crnorm",
            NormMode::Supnorm => "supnorm",
        })
    }
}

impl FromStr for NormMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crnorm" => Ok(NormMode::Crnorm),
            "supnorm" => Ok(NormMode::Supnorm),
            _ => Err(Error::Parse(format!("unknown norm mode {s:?} (crnorm|supnorm)"))),
        }
    }
}

/// Cubes per axis. From |g^{(ν)}| ≤ (Ar)^{|ν|}|ν|!, shrinking by 1/N gives
/// (Ar/N)^{|ν|}|ν|!, so N = ⌈Ar⌉ bounds the C^r norm by 1; the sup norm
/// also needs (Ar/N)^n n! ≤ 1 for n ≤ r, whence N = ⌈Ar(r!)^{1/r}⌉.
pub fn subdivision_factor(a: f64, r: u32, mode: NormMode) -> Result<u64> {
    if r < 1 {
        return Err(Error::InvalidParameter("r must be >= 1".into()));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!("A must be positive, got {a}")));
    }
    let base = a * r as f64;
    let n = match mode {
        NormMode::Crnorm => base,
        NormMode::Supnorm => base * (ln_factorial(r) / r as f64).exp(),
    };
    // Guard against 2.0000000000000004 rounding up to 3.
    let n = (n * (1.0 - 1e-12)).ceil();
    Ok((n as u64).max(1))
}

/// The cube offset + [0, scale]^m and the map y ↦ g(offset + scale·y).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub index: Vec<u64>,
    pub offset: Vec<f64>,
    pub scale: f64,
}

impl Chart {
    pub fn to_global(&self, y: &[f64]) -> Vec<f64> {
        self.offset.iter().zip(y).map(|(o, v)| o + self.scale * v).collect()
    }

    /// Jets of the reparametrized map at local point y.
    pub fn jets<M: ChartMap + ?Sized>(&self, map: &M, y: &[f64], order: u32) -> Result<Vec<Jet>> {
        let inner = map.jets(&self.to_global(y), order)?;
        let local = JetSpace::new(y, order);
        inner.iter().map(|j| j.rescaled(self.scale, &local)).collect()
    }

    /// Closed cube contains x, up to rounding of the face coordinates.
    pub fn covers(&self, x: &[f64]) -> bool {
        self.offset
            .iter()
            .zip(x)
            .all(|(&o, &v)| v >= o - FACE_TOL && v <= o + self.scale + FACE_TOL)
    }
}

/// All N^m cubes in row-major order (last coordinate fastest).
pub fn make_charts(dim: usize, n: u64) -> Result<Vec<Chart>> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be >= 1".into()));
    }
    let count = (n as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    if count > MAX_CHARTS as u128 {
        return Err(Error::InvalidParameter(format!("{n}^{dim} charts exceeds the cap {MAX_CHARTS}")));
    }
    let scale = 1.0 / n as f64;
    let mut out = Vec::with_capacity(count as usize);
    let mut idx = vec![0u64; dim];
    for _ in 0..count {
        out.push(Chart {
            index: idx.clone(),
            offset: idx.iter().map(|&k| k as f64 * scale).collect(),
            scale,
        });
        for d in (0..dim).rev() {
            idx[d] += 1;
            if idx[d] < n {
                break;
            }
            idx[d] = 0;
        }
    }
    Ok(out)
}

/// Sampled norm of one chart's jets up to order r.
pub fn jet_norm(jets: &[Jet], r: u32, mode: NormMode) -> f64 {
    let mut worst: f64 = 0.0;
    for jet in jets {
        let layout = jet.layout();
        for (i, d) in jet.derivatives().into_iter().enumerate() {
            let n = layout.total(i);
            if n > r {
                break;
            }
            let v = match mode {
                NormMode::Crnorm => d.abs() / ln_factorial(n).exp(),
                NormMode::Supnorm => d.abs(),
            };
            worst = worst.max(v);
        }
    }
    worst
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChartReport {
    pub r: u32,
    pub norm_mode: NormMode,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub count: u64,
    pub samples_per_chart: usize,
    pub excluded: usize,
    pub worst_norm: f64,
    pub worst_chart: Option<Vec<u64>>,
    pub worst_point: Option<Vec<f64>>,
    pub covering: bool,
    pub pass: bool,
}

/// Builds the charts for a map certified (A·r, 1, 0)-mild up to order r and
/// checks every chart's norm on a per-cube clustered grid of
/// `per_axis`^m points, plus the covering property on a global test grid.
pub fn verify_charts<M: ChartMap + ?Sized>(
    map: &M,
    a: f64,
    r: u32,
    mode: NormMode,
    per_axis: usize,
) -> Result<ChartReport> {
    let dim = map.domain_dim();
    let n = subdivision_factor(a, r, mode)?;
    let charts = make_charts(dim, n)?;
    let local = tensor(&clustered_axis(per_axis.max(1)), dim);
    let per_chart: Vec<Result<(f64, usize, Option<Vec<f64>>)>> = sweep::map(&charts, |c| {
        let mut worst = (0.0f64, 0usize, None);
        for y in &local {
            match c.jets(map, y, r) {
                Ok(j) if j.iter().all(|j| j.is_finite()) => {
                    let v = jet_norm(&j, r, mode);
                    if worst.2.is_none() || v > worst.0 {
                        worst.0 = v;
                        worst.2 = Some(c.to_global(y));
                    }
                }
                Ok(_) | Err(Error::Excluded(_)) => worst.1 += 1,
                Err(e) => return Err(e),
            }
        }
        Ok(worst)
    });
    let mut worst_norm = 0.0f64;
    let mut worst_chart = None;
    let mut worst_point = None;
    let mut excluded = 0;
    for (c, res) in charts.iter().zip(per_chart) {
        let (v, ex, p) = res?;
        excluded += ex;
        if p.is_some() && (worst_chart.is_none() || v > worst_norm) {
            worst_norm = v;
            worst_chart = Some(c.index.clone());
            worst_point = p;
        }
    }
    let covering = covers_grid(&charts, &tensor(&test_axis(n), dim));
    let pass = worst_chart.is_some() && covering && worst_norm <= 1.0 + CERTIFICATE_TOLERANCE;
    Ok(ChartReport {
        r,
        norm_mode: mode,
        a,
        n,
        count: charts.len() as u64,
        samples_per_chart: local.len(),
        excluded,
        worst_norm,
        worst_chart,
        worst_point,
        covering,
        pass,
    })
}

// Includes the shared faces k/N and the corners 0, 1.
fn test_axis(n: u64) -> Vec<f64> {
    let steps = (4 * n).min(512);
    (0..=steps).map(|k| k as f64 / steps as f64).collect()
}

/// Every point lies in some closed cube, and in more than one only when it
/// sits on a shared face.
pub fn covers_grid(charts: &[Chart], points: &[Vec<f64>]) -> bool {
    points.iter().all(|x| {
        let hits: Vec<&Chart> = charts.iter().filter(|c| c.covers(x)).collect();
        match hits.len() {
            0 => false,
            1 => true,
            _ => hits.iter().all(|c| on_face(c, x)),
        }
    })
}

fn on_face(c: &Chart, x: &[f64]) -> bool {
    c.offset
        .iter()
        .zip(x)
        .any(|(&o, &v)| (v - o).abs() <= FACE_TOL || (v - o - c.scale).abs() <= FACE_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::substitution::Substitution;

    #[test]
    fn subdivision_examples() {
        assert_eq!(subdivision_factor(2.0, 3, NormMode::Crnorm).unwrap(), 6);
        assert_eq!(subdivision_factor(0.7, 1, NormMode::Crnorm).unwrap(), 1);
        assert_eq!(subdivision_factor(1.0, 4, NormMode::Supnorm).unwrap(), 9);
        assert_eq!(subdivision_factor(1.0, 4, NormMode::Crnorm).unwrap(), 4);
        assert!(subdivision_factor(0.0, 2, NormMode::Crnorm).is_err());
        assert!(subdivision_factor(1.0, 0, NormMode::Crnorm).is_err());
    }

    #[test]
    fn row_major_tiling() {
        let c = make_charts(2, 3).unwrap();
        assert_eq!(c.len(), 9);
        assert_eq!(c[1].index, vec![0, 1]);
        assert_eq!(c[3].index, vec![1, 0]);
        assert!(covers_grid(&c, &tensor(&test_axis(3), 2)));
        assert!(!covers_grid(&c[..8], &tensor(&test_axis(3), 2)));
    }

    #[test]
    fn identity_two_charts() {
        // x on (0,1) is (1,1,0)-mild; r = 2 needs N = 2.
        let id = Substitution::power_map(1, 1).unwrap();
        let rep = verify_charts(&id, 1.0, 2, NormMode::Crnorm, 8).unwrap();
        assert_eq!(rep.n, 2);
        assert_eq!(rep.count, 2);
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn power_map_charts() {
        // |∂^k x^r| ≤ r^k k!, so A = 1.
        for r in 1..=5 {
            let p = Substitution::power_map(r, 2).unwrap();
            let rep = verify_charts(&p, 1.0, r, NormMode::Crnorm, 4).unwrap();
            assert_eq!(rep.count, (r as u64).pow(2));
            assert!(rep.pass, "r={r} {rep:?}");
        }
    }
}
