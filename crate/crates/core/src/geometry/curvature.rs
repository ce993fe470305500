use super::{Christoffel, GeometryError, Mat4, MetricData, Riemann, Vec4};
use crate::jet::Jet2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

struct Derivs {
    g: Mat4,
    ginv: Mat4,
    dg: [[[f64; 4]; 4]; 4],
}

fn unpack(gj: &[[Jet2; 4]; 4], x: [f64; 4]) -> Result<Derivs, GeometryError> {
    let g = Mat4::from_fn(|a, b| gj[a][b].v);
    let ginv = g.try_inverse().ok_or(GeometryError::DegenerateMetric(x))?;
    let mut dg = [[[0.0; 4]; 4]; 4];
    for (e, dge) in dg.iter_mut().enumerate() {
        for a in 0..4 {
            for b in 0..4 {
                dge[a][b] = gj[a][b].d[e];
            }
        }
    }
    Ok(Derivs { g, ginv, dg })
}

fn lowered(dg: &[[[f64; 4]; 4]; 4]) -> [[[f64; 4]; 4]; 4] {
    let mut low = [[[0.0; 4]; 4]; 4];
    for d in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                low[d][b][c] = 0.5 * (dg[b][d][c] + dg[c][d][b] - dg[d][b][c]);
            }
        }
    }
    low
}

fn raise(ginv: &Mat4, low: &[[[f64; 4]; 4]; 4]) -> Christoffel {
    let mut gamma = [[[0.0; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in b..4 {
                let s: f64 = (0..4).map(|d| ginv[(a, d)] * low[d][b][c]).sum();
                gamma[a][b][c] = s;
                gamma[a][c][b] = s;
            }
        }
    }
    gamma
}

pub(crate) fn christoffel_from_jets(gj: &[[Jet2; 4]; 4], x: [f64; 4]) -> Result<Christoffel, GeometryError> {
    let d = unpack(gj, x)?;
    Ok(raise(&d.ginv, &lowered(&d.dg)))
}

pub(crate) fn curvature_from_jets(gj: &[[Jet2; 4]; 4], x: [f64; 4]) -> Result<MetricData, GeometryError> {
    let Derivs { g, ginv, dg } = unpack(gj, x)?;
    let low = lowered(&dg);
    let gamma = raise(&ginv, &low);

    // ∂_e g^{ab} = −g^{ac} ∂_e g_{cd} g^{db}
    let mut dginv = [Mat4::zeros(); 4];
    for e in 0..4 {
        let dge = Mat4::from_fn(|a, b| dg[e][a][b]);
        dginv[e] = -ginv * dge * ginv;
    }

    // ∂_e Γ^a_{bc}
    let mut dgamma = [[[[0.0; 4]; 4]; 4]; 4];
    for e in 0..4 {
        let mut dlow = [[[0.0; 4]; 4]; 4];
        for d in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    dlow[d][b][c] = 0.5
                        * (gj[d][c].h[e][b] + gj[d][b].h[e][c] - gj[b][c].h[e][d]);
                }
            }
        }
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    dgamma[e][a][b][c] = (0..4)
                        .map(|d| dginv[e][(a, d)] * low[d][b][c] + ginv[(a, d)] * dlow[d][b][c])
                        .sum();
                }
            }
        }
    }

    let mut riemann: Riemann = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let mut r = dgamma[c][a][d][b] - dgamma[d][a][c][b];
                    for e in 0..4 {
                        r += gamma[a][c][e] * gamma[e][d][b] - gamma[a][d][e] * gamma[e][c][b];
                    }
                    riemann[a][b][c][d] = r;
                }
            }
        }
    }
    Ok(assemble(g, ginv, gamma, riemann))
}

/// Ricci, scalar and energy-momentum from Riemann.
pub(crate) fn assemble(g: Mat4, ginv: Mat4, gamma: Christoffel, riemann: Riemann) -> MetricData {
    let ricci = Mat4::from_fn(|b, d| (0..4).map(|a| riemann[a][b][a][d]).sum());
    let scalar = (ginv.component_mul(&ricci)).sum();
    let energy_momentum = ricci - g * (0.5 * scalar);
    MetricData {
        g,
        gamma,
        riemann,
        ricci,
        scalar,
        energy_momentum,
    }
}

/// R_{abcd} R^{abcd}.
pub fn kretschmann_from(riemann: &Riemann, g: &Mat4) -> f64 {
    let ginv = match g.try_inverse() {
        Some(m) => m,
        None => return f64::NAN,
    };
    // all-lower and all-upper versions of R^a_{bcd}
    let mut lower = [[[[0.0; 4]; 4]; 4]; 4];
    let mut upper = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    lower[a][b][c][d] = (0..4).map(|e| g[(a, e)] * riemann[e][b][c][d]).sum();
                }
            }
        }
    }
    // raise b, c, d one at a time
    let mut t1 = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    t1[a][b][c][d] = (0..4).map(|f| ginv[(b, f)] * riemann[a][f][c][d]).sum();
                }
            }
        }
    }
    let mut t2 = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    t2[a][b][c][d] = (0..4).map(|f| ginv[(c, f)] * t1[a][b][f][d]).sum();
                }
            }
        }
    }
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    upper[a][b][c][d] = (0..4).map(|f| ginv[(d, f)] * t2[a][b][c][f]).sum();
                }
            }
        }
    }
    let mut k = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    k += lower[a][b][c][d] * upper[a][b][c][d];
                }
            }
        }
    }
    k
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyConditionReport {
    /// min T(u, u)
    pub weak_min: f64,
    /// min Ric(u, u)
    pub strong_min: f64,
    pub ric_tilde_min: f64,
    pub ric_tilde_max: f64,
    pub n_samples: usize,
    pub rho_max: f64,
}

/// Unit future timelike vector of rapidity `rho` in direction `n` relative
/// to a tetrad.
pub fn boosted_velocity(tetrad: &Mat4, rho: f64, n: [f64; 3]) -> Vec4 {
    let (s, c) = (rho.sinh(), rho.cosh());
    tetrad * Vec4::new(c, s * n[0], s * n[1], s * n[2])
}

pub(crate) fn uniform_direction<R: Rng>(rng: &mut R) -> [f64; 3] {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    [s * phi.cos(), s * phi.sin(), z]
}

pub(crate) fn energy_condition_sample(
    data: &MetricData,
    tetrad: &Mat4,
    n_samples: usize,
    seed: u64,
    rho_max: f64,
) -> EnergyConditionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = EnergyConditionReport {
        weak_min: f64::INFINITY,
        strong_min: f64::INFINITY,
        ric_tilde_min: f64::INFINITY,
        ric_tilde_max: f64::NEG_INFINITY,
        n_samples,
        rho_max,
    };
    for i in 0..n_samples.max(1) {
        // the first sample is the tetrad's own observer
        let rho = if i == 0 { 0.0 } else { rng.random_range(0.0..=rho_max) };
        let n = uniform_direction(&mut rng);
        let u = boosted_velocity(tetrad, rho, n);
        let t = data.energy_momentum_on(&u);
        let r = data.ricci_on(&u);
        rep.weak_min = rep.weak_min.min(t);
        rep.strong_min = rep.strong_min.min(r);
        rep.ric_tilde_min = rep.ric_tilde_min.min(r);
        rep.ric_tilde_max = rep.ric_tilde_max.max(r);
    }
    rep
}
