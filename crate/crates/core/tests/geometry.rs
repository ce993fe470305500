mod common;

use common::*;
use lorentz_core::geometry::{
    eta, kretschmann_from, Catalog, ChartId, MetricData, MetricField, Schwarzschild, Spacetime, SpacetimePoint,
};
use proptest::prelude::*;

/// Worst entrywise ratio |a − b| / (floor·scale + rtol·|b|) over every tensor,
/// where scale is the tensor's largest component magnitude (at least 1).
/// A value ≤ 1 passes.
pub fn worst_ratio(a: &MetricData, b: &MetricData, rtol: f64, floor: f64) -> f64 {
    fn ratio(xs: &[f64], ys: &[f64], rtol: f64, floor: f64) -> f64 {
        let scale = ys.iter().fold(1.0f64, |m, y| m.max(y.abs()));
        xs.iter()
            .zip(ys)
            .map(|(x, y)| (x - y).abs() / (floor * scale + rtol * y.abs()))
            .fold(0.0, f64::max)
    }
    let flat3 = |g: &[[[f64; 4]; 4]; 4]| g.iter().flatten().flatten().copied().collect::<Vec<_>>();
    let flat4 = |r: &[[[[f64; 4]; 4]; 4]; 4]| r.iter().flatten().flatten().flatten().copied().collect::<Vec<_>>();
    let m = |x: &lorentz_core::geometry::Mat4| x.iter().copied().collect::<Vec<_>>();
    [
        ratio(&flat3(&a.gamma), &flat3(&b.gamma), rtol, floor),
        ratio(&flat4(&a.riemann), &flat4(&b.riemann), rtol, floor),
        ratio(&m(&a.ricci), &m(&b.ricci), rtol, floor),
        ratio(&m(&a.energy_momentum), &m(&b.energy_momentum), rtol, floor),
        ratio(&[a.scalar], &[b.scalar], rtol, floor),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

#[test]
fn analytic_curvature_matches_oracle_on_catalog() {
    for id in ["minkowski", "schwarzschild", "einstein_de_sitter", "de_sitter"] {
        let st = catalog(id, &[]);
        for p in sample_points(id, 100) {
            let a = st.curvature(&p).unwrap();
            let b = st.curvature_oracle(&p).unwrap();
            let w = worst_ratio(&a, &b, 1e-5, 1e-10);
            assert!(w <= 1.0, "{id} at {:?}: ratio {w}", p.coords);
        }
    }
}

#[test]
fn closed_form_christoffels_match_autodiff_and_oracle() {
    for id in ["schwarzschild", "einstein_de_sitter", "de_sitter", "minkowski"] {
        let st = catalog(id, &[]);
        for p in sample_points(id, 40) {
            let fast = st.christoffel(&p).unwrap();
            let jet = st.curvature(&p).unwrap().gamma;
            let chart = p.chart;
            let (fd, _) = lorentz_core::geometry::christoffel_oracle_with(
                &|x: &[f64; 4]| st.metric(&SpacetimePoint::new(chart, *x)),
                p.coords,
            )
            .unwrap();
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        let (x, y, z) = (fast[a][b][c], jet[a][b][c], fd[a][b][c]);
                        assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()), "{id} Γ{a}{b}{c}: {x} vs {y}");
                        assert!((x - z).abs() <= 1e-6 * (1.0 + z.abs()), "{id} Γ{a}{b}{c}: {x} vs fd {z}");
                    }
                }
            }
        }
    }
}

#[test]
fn metric_examples() {
    let p = SpacetimePoint::new(ChartId(0), [0.3, -1.0, 2.0, 5.0]);
    assert_eq!(minkowski().metric(&p).unwrap(), eta());

    let s = schwarzschild();
    let g = s.metric(&SpacetimePoint::new(ChartId(0), [0.0, 4.0, 1.0, 0.0])).unwrap();
    assert_eq!(g[(0, 0)], 0.5);
    assert_eq!(g[(0, 1)], -1.0);

    let g = eds().metric(&SpacetimePoint::new(ChartId(0), [1.0, 0.0, 0.0, 0.0])).unwrap();
    for i in 1..4 {
        assert_eq!(g[(i, i)], -1.0);
    }
}

#[test]
fn domain_errors_name_the_bound() {
    let s = schwarzschild();
    let e = s.metric(&SpacetimePoint::new(ChartId(0), [0.0, -1.0, 1.0, 0.0])).unwrap_err();
    assert!(e.to_string().contains("r > 0"), "{e}");
    let e = eds().metric(&SpacetimePoint::new(ChartId(0), [0.0, 0.0, 0.0, 0.0])).unwrap_err();
    assert!(e.to_string().contains("t > 0"), "{e}");
    assert!(s.metric(&SpacetimePoint::new(ChartId(7), [0.0, 3.0, 1.0, 0.0])).is_err());
}

#[test]
fn lorentzian_signature_everywhere_sampled() {
    for id in ["minkowski", "schwarzschild", "einstein_de_sitter", "de_sitter"] {
        let st = catalog(id, &[]);
        for p in sample_points(id, 30) {
            let g = st.metric(&p).unwrap();
            assert_eq!(g, g.transpose());
            let ev = g.symmetric_eigenvalues();
            assert_eq!(ev.iter().filter(|&&x| x > 0.0).count(), 1, "{id}");
            assert_eq!(ev.iter().filter(|&&x| x < 0.0).count(), 3, "{id}");
        }
    }
}

#[test]
fn schwarzschild_is_ricci_flat_and_kretschmann_matches() {
    let s = schwarzschild();
    for p in sample_points("schwarzschild", 50) {
        let d = s.curvature(&p).unwrap();
        assert!(d.ricci.amax() < 1e-12, "{:?}", d.ricci);
        let o = s.curvature_oracle(&p).unwrap();
        assert!(o.ricci.amax() < 1e-6);
    }
    let p = SpacetimePoint::new(ChartId(0), [0.0, 2.0, 1.2, 0.3]);
    let o = s.curvature_oracle(&p).unwrap();
    let k = kretschmann_from(&o.riemann, &o.g);
    assert!((k - 0.75).abs() < 1e-4, "{k}");
    assert!((s.kretschmann(&p).unwrap() - 0.75).abs() < 1e-15);
    let d = s.curvature(&p).unwrap();
    assert!((kretschmann_from(&d.riemann, &d.g) - 0.75).abs() < 1e-12);
}

#[test]
fn kretschmann_closed_forms_match_contraction() {
    for id in ["einstein_de_sitter", "de_sitter", "minkowski", "schwarzschild"] {
        let st = catalog(id, &[]);
        for p in sample_points(id, 20) {
            let d = st.curvature(&p).unwrap();
            let k = kretschmann_from(&d.riemann, &d.g);
            let c = st.kretschmann(&p).unwrap();
            assert!((k - c).abs() <= 1e-9 * (1.0 + c.abs()), "{id}: {k} vs {c}");
        }
    }
}

#[test]
fn flrw_comoving_values() {
    // dust: Ric(u,u) = 2/3, T(u,u) = 4/3, R = −4/3 at t = 1
    let st = eds();
    let p = SpacetimePoint::new(ChartId(0), [1.0, 0.2, -0.4, 0.1]);
    let u = lorentz_core::geometry::Vec4::new(1.0, 0.0, 0.0, 0.0);
    let d = st.curvature(&p).unwrap();
    let o = st.curvature_oracle(&p).unwrap();
    assert!((d.ricci_on(&u) - 2.0 / 3.0).abs() < 1e-13);
    assert!((d.ricci_on(&u) - o.ricci_on(&u)).abs() < 1e-5 * 2.0 / 3.0);
    assert!((d.energy_momentum_on(&u) - 4.0 / 3.0).abs() < 1e-13);
    assert!((d.scalar + 4.0 / 3.0).abs() < 1e-13);

    // de Sitter: Ric = −3H² g, R = −12H², T = +3H² g
    let h = 0.7;
    let ds = catalog("de_sitter", &[("H", h)]);
    let p = SpacetimePoint::new(ChartId(0), [0.4, 1.0, 2.0, 3.0]);
    let d = ds.curvature(&p).unwrap();
    let o = ds.curvature_oracle(&p).unwrap();
    assert!((d.ricci_on(&u) + 3.0 * h * h).abs() < 1e-12);
    assert!((o.ricci_on(&u) + 3.0 * h * h).abs() < 1e-8);
    assert!((d.scalar + 12.0 * h * h).abs() < 1e-12);
    assert!((o.energy_momentum_on(&u) - 3.0 * h * h).abs() < 1e-8);
}

#[test]
fn energy_condition_examples() {
    let p = SpacetimePoint::new(ChartId(0), [0.0; 4]);
    let r = minkowski().energy_condition_report(&p, 200, 1, 5.0).unwrap();
    assert_eq!((r.weak_min, r.strong_min), (0.0, 0.0));

    let p = SpacetimePoint::new(ChartId(0), [0.0, 5.0, 1.0, 0.0]);
    let r = schwarzschild().energy_condition_report(&p, 200, 2, 5.0).unwrap();
    assert!(r.strong_min.abs() < 1e-8);

    let p = SpacetimePoint::new(ChartId(0), [1.0, 0.0, 0.0, 0.0]);
    let st = eds();
    let r = st.energy_condition_report(&p, 500, 3, 5.0).unwrap();
    assert!(r.strong_min >= 0.0 && r.weak_min >= 0.0, "{r:?}");
    // the oracle agrees on the sampled minimum direction family
    let o = st.curvature_oracle(&p).unwrap();
    let tet = Spacetime::reference_tetrad(&st, &p).unwrap();
    let u = lorentz_core::geometry::boosted_velocity(&tet, 2.0, [0.0, 0.6, 0.8]);
    assert!(o.ricci_on(&u) > 0.0);
}

#[test]
fn reference_tetrads_are_orthonormal_oriented_direct() {
    for id in ["minkowski", "schwarzschild", "einstein_de_sitter", "de_sitter"] {
        let st = catalog(id, &[]);
        for p in sample_points(id, 30) {
            let e = Spacetime::reference_tetrad(&st, &p).unwrap();
            let g = st.metric(&p).unwrap();
            assert!((e.transpose() * g * e - eta()).amax() < 1e-12, "{id}");
            assert!(Spacetime::time_orientation(&st, &p, &e.column(0).into_owned()) > 0.0);
            assert!(e.determinant() > 0.0);
        }
    }
    let s = Schwarzschild::new(1.0).unwrap();
    let p = SpacetimePoint::new(ChartId(0), [0.0, 10.0, 1.0, 0.0]);
    let e = s.static_frame(&p).unwrap();
    let g = s.metric(&p).unwrap();
    assert!((e.transpose() * g * e - eta()).amax() < 1e-14);
    assert!(s.static_frame(&SpacetimePoint::new(ChartId(0), [0.0, 1.5, 1.0, 0.0])).is_err());
}

#[test]
fn user_metric_hook_gets_full_pipeline() {
    // Minkowski in spherical-like scaling: g = diag(1, −4, −9, −1); still flat
    struct Scaled;
    impl MetricField for Scaled {
        fn id(&self) -> &str {
            "scaled"
        }
        fn check_domain(&self, _p: &SpacetimePoint) -> Result<(), lorentz_core::geometry::GeometryError> {
            Ok(())
        }
        fn components<S: lorentz_core::jet::Scalar>(&self, _c: ChartId, x: &[S; 4]) -> [[S; 4]; 4] {
            let z = S::cst(0.0);
            let mut g = [[z; 4]; 4];
            g[0][0] = S::cst(1.0);
            g[1][1] = S::cst(-4.0);
            g[2][2] = S::cst(-9.0);
            // a conformally rescaled 2-plane keeps this flat only if constant
            g[3][3] = S::cst(-1.0) + x[0] * S::cst(0.0);
            g
        }
    }
    let st = Scaled;
    let p = SpacetimePoint::new(ChartId(0), [1.0, 2.0, 3.0, 4.0]);
    let d = Spacetime::curvature(&st, &p).unwrap();
    assert!(d.riemann.iter().flatten().flatten().flatten().all(|r| r.abs() < 1e-15));
    let e = Spacetime::reference_tetrad(&st, &p).unwrap();
    assert!((e.transpose() * d.g * e - eta()).amax() < 1e-14);
}

#[test]
fn chart_transition_preserves_metric() {
    let s = Schwarzschild::new(1.0).unwrap();
    let p = SpacetimePoint::new(ChartId(0), [0.5, 5.0, 0.03, 1.1]);
    let (q, j) = MetricField::chart_transition(&s, &p).unwrap();
    assert_eq!(q.chart, ChartId(1));
    assert!(q.coords[2].sin() > 0.9);
    // pulling back the new chart's metric through J reproduces the old one
    let g0 = s.metric(&p).unwrap();
    let g1 = s.metric(&q).unwrap();
    assert!((j.transpose() * g1 * j - g0).amax() < 1e-12);
    // round trip through both charts
    let mut back = q;
    back.coords[2] = 0.02;
    let (r, _) = MetricField::chart_transition(&s, &back).unwrap();
    assert_eq!(r.chart, ChartId(0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn christoffel_symmetric_and_metric_compatible(
        v in -5.0..5.0f64, r in 0.5..30.0f64, th in 0.4..2.7f64, ph in -3.0..3.0f64
    ) {
        let s = schwarzschild();
        let p = SpacetimePoint::new(ChartId(0), [v, r, th, ph]);
        let gam = s.christoffel(&p).unwrap();
        for a in 0..4 { for b in 0..4 { for c in 0..4 {
            prop_assert_eq!(gam[a][b][c], gam[a][c][b]);
        }}}
        // ∂_c g_ab = Γ^d_{ca} g_db + Γ^d_{cb} g_ad
        let g = s.metric(&p).unwrap();
        for c in 0..4 {
            let h = 1e-5 * (1.0 + p.coords[c].abs());
            let mut xp = p; xp.coords[c] += h;
            let mut xm = p; xm.coords[c] -= h;
            let dg = (s.metric(&xp).unwrap() - s.metric(&xm).unwrap()) / (2.0 * h);
            for a in 0..4 { for b in 0..4 {
                let conn: f64 = (0..4).map(|d| gam[d][c][a] * g[(d, b)] + gam[d][c][b] * g[(a, d)]).sum();
                prop_assert!((dg[(a, b)] - conn).abs() < 1e-6 * (1.0 + r * r), "{} {} {}", a, b, c);
            }}
        }
    }

    #[test]
    fn riemann_symmetries_and_einstein_identity(
        t in 0.3..4.0f64, x in -3.0..3.0f64, which in 0usize..3
    ) {
        let st: Catalog = match which {
            0 => eds(),
            1 => de_sitter(),
            _ => catalog("flrw_power", &[("p", 0.4)]),
        };
        let p = SpacetimePoint::new(ChartId(0), [t, x, 0.5 * x, 1.0]);
        let d = st.curvature(&p).unwrap();
        let r = &d.riemann;
        for a in 0..4 { for b in 0..4 { for c in 0..4 { for e in 0..4 {
            let scale = 1e-12 * (1.0 + r[a][b][c][e].abs());
            prop_assert!((r[a][b][c][e] + r[a][b][e][c]).abs() < scale);
            prop_assert!((r[a][b][c][e] + r[a][c][e][b] + r[a][e][b][c]).abs() < 1e-10);
        }}}}
        let t_check = d.ricci - d.g * (0.5 * d.scalar);
        prop_assert_eq!(t_check, d.energy_momentum);
    }
}
