//! Sample grids clustered toward the coordinate hyperplanes, where the
//! derivative bounds of interest degenerate.

/// Default points per axis for a sweep in `dim` dimensions.
pub fn default_density(dim: usize) -> usize {
    if dim <= 2 {
        16
    } else {
        8
    }
}

/// Points ((k − 1/2)/n)², k = 1..n: a midpoint rule in √x, so spacing near
/// 0 is quadratically finer than near 1.
pub fn clustered_axis(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| {
            let s = (k as f64 - 0.5) / n as f64;
            s * s
        })
        .collect()
}

/// Tensor product of `axis` in `dim` dimensions, first coordinate slowest.
pub fn tensor(axis: &[f64], dim: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for p in &out {
            for &a in axis {
                let mut q = p.clone();
                q.push(a);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

pub fn clustered_grid(dim: usize, n: usize) -> Vec<Vec<f64>> {
    tensor(&clustered_axis(n), dim)
}

/// Uniform midpoints (k − 1/2)/n.
pub fn midpoint_axis(n: usize) -> Vec<f64> {
    (1..=n).map(|k| (k as f64 - 0.5) / n as f64).collect()
}
