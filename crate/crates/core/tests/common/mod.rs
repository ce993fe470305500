#![allow(dead_code)]

use lorentz_core::geometry::{Catalog, ChartId, SpacetimePoint};
use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_3;

/// Radical inverse in `base` (Halton component).
pub fn halton(i: usize, base: usize) -> f64 {
    let (mut f, mut r, mut n) = (1.0, 0.0, i);
    while n > 0 {
        f /= base as f64;
        r += f * (n % base) as f64;
        n /= base;
    }
    r
}

pub fn halton4(i: usize) -> [f64; 4] {
    [halton(i, 2), halton(i, 3), halton(i, 5), halton(i, 7)]
}

pub fn catalog(id: &str, params: &[(&str, f64)]) -> Catalog {
    let p: BTreeMap<String, f64> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    Catalog::from_id(id, &p).unwrap()
}

pub fn minkowski() -> Catalog {
    catalog("minkowski", &[])
}
pub fn schwarzschild() -> Catalog {
    catalog("schwarzschild", &[("M", 1.0)])
}
pub fn eds() -> Catalog {
    catalog("einstein_de_sitter", &[])
}
pub fn de_sitter() -> Catalog {
    catalog("de_sitter", &[("H", 1.0)])
}

/// Quasi-random in-domain sample points for each catalog spacetime.
pub fn sample_points(id: &str, n: usize) -> Vec<SpacetimePoint> {
    let lerp = |u: f64, a: f64, b: f64| a + u * (b - a);
    (1..=n)
        .map(|i| {
            let u = halton4(i);
            let c = match id {
                "minkowski" => u.map(|x| lerp(x, -10.0, 10.0)),
                "schwarzschild" => {
                    // interior and exterior, away from r = 0
                    [
                        lerp(u[0], -10.0, 10.0),
                        lerp(u[1], 1.0, 20.0),
                        lerp(u[2], FRAC_PI_3, 2.0 * FRAC_PI_3),
                        lerp(u[3], -3.0, 3.0),
                    ]
                }
                "einstein_de_sitter" | "flrw_power" => [
                    lerp(u[0], 0.5, 3.0),
                    lerp(u[1], -5.0, 5.0),
                    lerp(u[2], -5.0, 5.0),
                    lerp(u[3], -5.0, 5.0),
                ],
                _ => [
                    lerp(u[0], -1.0, 1.0),
                    lerp(u[1], -5.0, 5.0),
                    lerp(u[2], -5.0, 5.0),
                    lerp(u[3], -5.0, 5.0),
                ],
            };
            SpacetimePoint::new(ChartId(0), c)
        })
        .collect()
}

pub fn default_params(id: &str) -> Vec<(&'static str, f64)> {
    match id {
        "schwarzschild" => vec![("M", 1.0)],
        "de_sitter" => vec![("H", 1.0)],
        "flrw_power" => vec![("p", 0.5)],
        _ => vec![],
    }
}
