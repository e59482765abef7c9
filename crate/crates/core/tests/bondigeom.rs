use std::f64::consts::PI;

use proptest::prelude::*;
use qle_core::bondigeom::*;
use qle_core::s2spectral::{eigenfunctions, harmonic};
use qle_core::{Field, Grid, Tangent};

fn grid() -> std::sync::Arc<Grid> {
    Grid::new(16).unwrap()
}

fn sample_data(g: &std::sync::Arc<Grid>, seed: [f64; 6]) -> BondiData {
    let h = |l, m| harmonic(g, l, m);
    let m = &Field::constant(g, 1.0) + &(&h(1, 0).scale(seed[0]) + &h(2, 1).scale(seed[1]));
    let (x, y) = shear_from_potentials(&h(2, 0).scale(seed[2]), &h(3, -2).scale(seed[3]));
    let wt = shift_from_potentials(&h(2, 2).scale(seed[4]), &h(2, -1).scale(seed[5]));
    BondiData::new(m, x, y, wt, 0.0).unwrap()
}

#[test]
fn round_metric_without_shear() {
    let g = grid();
    let d = BondiData::schwarzschild(&g, 1.0);
    let [a, b, c] = induced_metric(&d, 6).coordinate_components();
    let sin2 = Field::from_fn(&g, |t, _| t.sin().powi(2));
    for k in a.powers().into_iter().filter(|k| *k != 2) {
        assert!(a.coeff_or_zero(k).max_abs() < 1e-15);
    }
    assert!((&a.coeff_or_zero(2) - &Field::constant(&g, 1.0)).max_abs() < 1e-15);
    assert!(b.max_abs_coeff() < 1e-15);
    assert!((&c.coeff_or_zero(2) - &sin2).max_abs() < 1e-15);
}

#[test]
fn metric_block_through_order_zero() {
    let g = grid();
    let eps = 0.3;
    let x = Field::from_fn(&g, |t, _| eps * t.cos());
    let y = Field::from_fn(&g, |t, p| 0.1 * t.sin() * p.cos());
    let d = BondiData::new(Field::zeros(&g), x.clone(), y.clone(), Tangent::zeros(&g), 0.0).unwrap();
    let [a, b, c] = induced_metric(&d, 6).coordinate_components();
    let sin = Field::from_fn(&g, |t, _| t.sin());
    let sin2 = &sin * &sin;
    let q = (&(&x * &x) + &(&y * &y)).scale(2.0);
    assert!((&a.coeff_or_zero(1) - &x.scale(2.0)).max_abs() < 1e-14);
    assert!((&a.coeff_or_zero(0) - &q).max_abs() < 1e-14);
    assert!((&b.coeff_or_zero(1) - &(&y * &sin).scale(-2.0)).max_abs() < 1e-14);
    assert!(b.coeff_or_zero(0).max_abs() < 1e-14);
    assert!((&c.coeff_or_zero(1) - &(&sin2 * &x).scale(-2.0)).max_abs() < 1e-14);
    assert!((&c.coeff_or_zero(0) - &(&sin2 * &q)).max_abs() < 1e-14);
}

#[test]
fn determinant_at_finite_radius() {
    let g = grid();
    let d = sample_data(&g, [0.2, 0.1, 0.4, 0.3, 0.1, 0.1]);
    for r in [5.0, 50.0, 1000.0] {
        let [a, b, c] = metric_components_at(&d, r);
        let det = &(&a * &c) - &(&b * &b);
        let want = Field::from_fn(&g, |t, _| r.powi(4) * t.sin().powi(2));
        assert!((&det - &want).max_abs() < 1e-12 * r.powi(4));
    }
}

#[test]
fn minkowski_mean_curvature() {
    let g = grid();
    let d = BondiData::from_mass_aspect(Field::zeros(&g));
    let h = mean_curvature_norm(&d, 6).unwrap();
    assert!(h.trunc_order() >= 3);
    assert!((&h.coeff_or_zero(-1) - &Field::constant(&g, 2.0)).max_abs() < 1e-15);
    for k in -h.trunc_order()..-1 {
        assert!(h.coeff_or_zero(k).max_abs() < 1e-15);
    }
}

#[test]
fn schwarzschild_mean_curvature() {
    let g = grid();
    let h = mean_curvature_norm(&BondiData::schwarzschild(&g, 1.5), 6).unwrap();
    assert!((&h.coeff_or_zero(-2) - &Field::constant(&g, -3.0)).max_abs() < 1e-14);
    let c = connection_div(&BondiData::schwarzschild(&g, 1.5), 6).unwrap();
    assert!(c.coeff_or_zero(-3).max_abs() < 1e-12);
    // decay of |H| − (2/r − 2M/r²) like r⁻³
    let d = BondiData::schwarzschild(&g, 1.5);
    let err = |r: f64| {
        let want = Field::constant(&g, 2.0 / r - 3.0 / (r * r));
        (&h.eval(r) - &want).max_abs()
    };
    let slope = (err(1e3) / err(1e2)).log10();
    assert!((slope + 3.0).abs() < 0.05, "slope {slope}");
    let _ = d;
}

#[test]
fn shift_enters_second_coefficient() {
    let g = grid();
    let cos = Field::from_fn(&g, |t, _| t.cos());
    let d = BondiData::new(Field::zeros(&g), Field::zeros(&g), Field::zeros(&g), cos.gradient(), 0.0).unwrap();
    let h = mean_curvature_norm(&d, 6).unwrap();
    assert!((&h.coeff_or_zero(-2) - &cos.scale(-2.0)).max_abs() < 1e-12);
}

#[test]
fn dipole_mass_aspect_connection() {
    let g = grid();
    let alpha = 0.7;
    let cos = Field::from_fn(&g, |t, _| t.cos());
    let d = BondiData::from_mass_aspect(cos.scale(alpha));
    let v3 = connection_div(&d, 6).unwrap().coeff_or_zero(-3);
    assert!((&v3 - &cos.scale(2.0 * alpha)).max_abs() < 1e-12);
    let x3 = &eigenfunctions(&g)[2];
    assert!(((&v3 * x3).integrate() - 2.0 * alpha * 4.0 * PI / 3.0).abs() < 1e-12);
}

#[test]
fn shear_potentials_give_smooth_tensor() {
    let g = Grid::new(24).unwrap();
    let d = sample_data(&g, [0.0, 0.0, 0.5, 0.5, 0.0, 0.0]);
    let s = d.shear_tensor();
    for row in &s {
        for f in row {
            assert!(f.analyze().effective_degree(1e-11) <= 4);
        }
    }
    // S is traceless and tangential
    let tr = &(&s[0][0] + &s[1][1]) + &s[2][2];
    assert!(tr.max_abs() < 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn determinant_invariant(seed in prop::array::uniform6(-0.5..0.5f64)) {
        let g = grid();
        let d = sample_data(&g, seed);
        prop_assert!(induced_metric(&d, 8).det_residual() < 1e-12);
    }

    #[test]
    fn leading_coefficients_match_closed_forms(seed in prop::array::uniform6(-0.5..0.5f64)) {
        let g = grid();
        let d = sample_data(&g, seed);
        let geo = surface_geometry(&d, 7).unwrap();
        prop_assert!((&geo.h_norm.coeff_or_zero(-2) - &h2_closed_form(&d)).max_abs() < 1e-12);
        let v3 = geo.div_v.coeff_or_zero(-3);
        prop_assert!((&v3 - &v3_closed_form(&d)).max_abs() < 1e-10);
        prop_assert!(v3.integrate().abs() < 1e-9 * (1.0 + d.scale()));
        prop_assert!(geo.div_v.top_power().unwrap_or(-3) <= -3);
        prop_assert!(geo.div_v.trunc_order() >= 4);
    }

    #[test]
    fn finite_radius_cross_check(seed in prop::array::uniform6(-0.5..0.5f64)) {
        let g = grid();
        let d = sample_data(&g, seed);
        let geo = surface_geometry(&d, 8).unwrap();
        let r = 1e3;
        let fg = geometry_at(&d, r).unwrap();
        let h2_series = geo.h_norm.mul(&geo.h_norm).eval(r);
        let h2_direct = &fg.h_norm * &fg.h_norm;
        prop_assert!((&h2_series - &h2_direct).max_abs() / h2_direct.max_abs() < 1e-6);
        prop_assert!((&geo.div_v.eval(r) - &fg.div_v).max_abs() / fg.div_v.max_abs().max(1e-12) < 1e-6);
    }
}
