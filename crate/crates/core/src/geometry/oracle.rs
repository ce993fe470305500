//! Finite-difference curvature oracle.
//!
//! Uses nothing but metric evaluations: Christoffels from sixth-order
//! central differences of g, their derivatives from a second layer of
//! sixth-order central differences. Index gymnastics are written out here
//! on purpose rather than shared with the analytic path.

use super::{Christoffel, GeometryError, Mat4, MetricData, Riemann};

const INNER_STEP: f64 = 2e-3;
const OUTER_STEP: f64 = 3e-3;

type MetricFn<'a> = dyn Fn(&[f64; 4]) -> Result<Mat4, GeometryError> + 'a;

fn step(base: f64, x: f64) -> f64 {
    base * (1.0 + x.abs())
}

fn eval(metric: &MetricFn, x: &[f64; 4]) -> Result<Mat4, GeometryError> {
    metric(x).map_err(|e| GeometryError::StencilLeavesDomain(e.to_string()))
}

/// Γ^a_{bc} by fourth-order central differences of the metric.
pub fn christoffel_oracle_with(metric: &MetricFn, x: [f64; 4]) -> Result<(Christoffel, Mat4), GeometryError> {
    let g = eval(metric, &x)?;
    let ginv = g.try_inverse().ok_or(GeometryError::DegenerateMetric(x))?;
    let mut dg = [Mat4::zeros(); 4];
    for (k, dgk) in dg.iter_mut().enumerate() {
        let h = step(INNER_STEP, x[k]);
        let at = |m: f64| {
            let mut y = x;
            y[k] += m * h;
            eval(metric, &y)
        };
        *dgk = ((at(1.0)? - at(-1.0)?) * 45.0 - (at(2.0)? - at(-2.0)?) * 9.0 + (at(3.0)? - at(-3.0)?))
            / (60.0 * h);
    }
    let mut gamma = [[[0.0; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let mut s = 0.0;
                for d in 0..4 {
                    s += ginv[(a, d)] * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]);
                }
                gamma[a][b][c] = 0.5 * s;
            }
        }
    }
    Ok((gamma, g))
}

/// Full curvature from nested central differences of `metric`.
pub fn curvature_oracle_with(metric: &MetricFn, x: [f64; 4]) -> Result<MetricData, GeometryError> {
    let (gamma, g) = christoffel_oracle_with(metric, x)?;
    let ginv = g.try_inverse().ok_or(GeometryError::DegenerateMetric(x))?;

    // dgamma[e][a][b][c] = ∂_e Γ^a_{bc}
    let mut dgamma = [[[[0.0; 4]; 4]; 4]; 4];
    for e in 0..4 {
        let h = step(OUTER_STEP, x[e]);
        let at = |m: f64| {
            let mut y = x;
            y[e] += m * h;
            christoffel_oracle_with(metric, y).map(|r| r.0)
        };
        let (m3, m2, m1) = (at(-3.0)?, at(-2.0)?, at(-1.0)?);
        let (p1, p2, p3) = (at(1.0)?, at(2.0)?, at(3.0)?);
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    dgamma[e][a][b][c] = (45.0 * (p1[a][b][c] - m1[a][b][c])
                        - 9.0 * (p2[a][b][c] - m2[a][b][c])
                        + (p3[a][b][c] - m3[a][b][c]))
                        / (60.0 * h);
                }
            }
        }
    }

    let mut riemann: Riemann = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let mut quad = 0.0;
                    for e in 0..4 {
                        quad += gamma[a][c][e] * gamma[e][d][b];
                        quad -= gamma[a][d][e] * gamma[e][c][b];
                    }
                    riemann[a][b][c][d] = dgamma[c][a][d][b] - dgamma[d][a][c][b] + quad;
                }
            }
        }
    }
    let mut ricci = Mat4::zeros();
    for b in 0..4 {
        for d in 0..4 {
            for a in 0..4 {
                ricci[(b, d)] += riemann[a][b][a][d];
            }
        }
    }
    let mut scalar = 0.0;
    for b in 0..4 {
        for d in 0..4 {
            scalar += ginv[(b, d)] * ricci[(b, d)];
        }
    }
    let energy_momentum = Mat4::from_fn(|a, b| ricci[(a, b)] - 0.5 * scalar * g[(a, b)]);
    Ok(MetricData {
        g,
        gamma,
        riemann,
        ricci,
        scalar,
        energy_momentum,
    })
}
