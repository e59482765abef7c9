use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Vector3;
use proptest::prelude::*;
use qle_core::bondigeom::*;
use qle_core::error::Error;
use qle_core::lorentz::{boost, Mat4};
use qle_core::qle::*;
use qle_core::s2spectral::harmonic;
use qle_core::{Field, Grid};

fn grid() -> Arc<Grid> {
    Grid::new(24).unwrap()
}

fn dipole(g: &Arc<Grid>, mass: f64, alpha: f64) -> BondiData {
    BondiData::from_mass_aspect(Field::from_fn(g, |t, p| mass + alpha * t.sin() * p.sin()))
}

fn generic(g: &Arc<Grid>) -> BondiData {
    let h = |l, m| harmonic(g, l, m);
    let (x, y) = shear_from_potentials(&h(2, 0).scale(0.2), &h(3, -2).scale(0.1));
    let wt = shift_from_potentials(&h(2, 2).scale(0.1), &h(2, -1).scale(0.1));
    let m = &Field::constant(g, 1.0) + &(&h(1, 0).scale(0.2) + &h(2, 1).scale(0.1));
    BondiData::new(m, x, y, wt, 0.0).unwrap()
}

#[test]
fn schwarzschild_momentum() {
    let g = grid();
    let em = bondi_four_momentum(&BondiData::schwarzschild(&g, 2.5)).unwrap();
    assert!((em.e - 2.5).abs() < 1e-10 * 2.5);
    assert!(em.p.iter().all(|p| p.abs() < 1e-10 * 2.5));
}

#[test]
fn vanishing_mass_aspect_gives_zero() {
    let g = grid();
    let routes = momentum_routes(&BondiData::schwarzschild(&g, 0.0)).unwrap();
    assert!(routes.mass_aspect.to_vec4().amax() < 1e-15);
    assert!(routes.geometric.to_vec4().amax() < 1e-13);
}

#[test]
fn dipole_momentum_by_both_routes() {
    let g = grid();
    let routes = momentum_routes(&dipole(&g, 1.0, 0.3)).unwrap();
    // ∫ sin²θ sin²φ dS² = 4π/3 by quadrature of the closed form
    let quad = Field::from_fn(&g, |t, p| (t.sin() * p.sin()).powi(2)).integrate();
    assert!((quad - 4.0 * PI / 3.0).abs() < 1e-13);
    for em in [routes.mass_aspect, routes.geometric] {
        assert!((em.p[0] - 0.1).abs() < 1e-8 * 0.1);
        assert!((em.e - 1.0).abs() < 1e-12);
    }
    assert!(routes.disagreement() < 1e-8);
}

#[test]
fn route_tolerance_is_enforced() {
    let g = grid();
    let res = bondi_four_momentum_with(&generic(&g), 0.0);
    assert!(matches!(res, Err(Error::RouteDisagreement { .. })));
    assert!(bondi_four_momentum(&generic(&g)).is_ok());
}

#[test]
fn limit_examples() {
    let g = grid();
    let cfg = QleConfig::default();
    let m = 1.5;
    let rest = qle_limit(&BondiData::schwarzschild(&g, m), &Observer::rest(), &cfg).unwrap();
    assert!((rest.closed_form - m).abs() < 1e-12);
    let moving = qle_limit(&BondiData::schwarzschild(&g, m), &Observer::new([0.75, 0.0, 0.0]), &cfg).unwrap();
    assert!((moving.closed_form - 1.25 * m).abs() < 1e-12);
    assert!((moving.series - 1.25 * m).abs() < 1e-12);
    assert!((moving.ladder.limit - 1.25 * m).abs() < 1e-6);
    let a1 = 0.4;
    let dip = qle_limit(&dipole(&g, m, 0.3), &Observer::new([a1, 0.0, 0.0]), &cfg).unwrap();
    let want = m * (1.0 + a1 * a1).sqrt() + a1 * 0.3 / 3.0;
    assert!((dip.closed_form - want).abs() < 1e-12);
    assert!((dip.ladder.limit - want).abs() < 1e-6 * want);
    assert!((dip.ladder.exponent.unwrap() - 1.0).abs() < cfg.exponent_tol);
}

#[test]
fn observer_is_unit_timelike() {
    let obs = Observer::new([0.3, -1.2, 2.0]);
    let t = obs.t0();
    assert!((qle_core::lorentz::minkowski_dot(&t, &t) + 1.0).abs() < 1e-14);
}

#[test]
fn energy_is_linear_in_observer() {
    let g = grid();
    let data = generic(&g);
    let cfg = QleConfig::default();
    let (emb, metric) = reference_embedding(&data, &[], cfg.embed_order).unwrap();
    let density = energy_density(&data, &emb, &metric).unwrap();
    let observers = [[0.1, 0.2, -0.3], [1.0, 0.0, 0.5], [-0.4, 0.7, 0.2], [0.0, 0.0, 0.0], [0.9, -0.9, 0.1]];
    let samples: Vec<_> = observers.iter().map(|a| (Observer::new(*a), density.limit(&Observer::new(*a).t0()).unwrap())).collect();
    let (fit, residual) = fit_four_vector(&samples).unwrap();
    assert!(residual < 1e-9);
    assert!(fit.rel_diff(&bondi_four_momentum(&data).unwrap()) < 1e-9);
}

#[test]
fn zero_perturbation_matches_limit() {
    let g = grid();
    let data = dipole(&g, 1.0, 0.2);
    let obs = Observer::new([0.2, 0.0, 0.1]);
    let cfg = QleConfig::default();
    let base = qle_limit(&data, &obs, &cfg).unwrap();
    let same = perturbation_invariance(&data, &Field::zeros(&g), &obs, &cfg).unwrap();
    assert_eq!(base, same);
}

#[test]
fn dipole_time_function_leaves_limit_unchanged() {
    let g = grid();
    let data = BondiData::schwarzschild(&g, 1.0);
    let cfg = QleConfig::default();
    let obs = Observer::new([0.3, 0.0, 0.0]);
    let cos = Field::from_fn(&g, |t, _| t.cos());
    let quad = harmonic(&g, 2, 1).scale(0.3);
    for tau0 in [cos, quad] {
        let lim = perturbation_invariance(&data, &tau0, &obs, &cfg).unwrap();
        assert!((lim.ladder.limit - 1.09f64.sqrt()).abs() < 1e-6);
        assert!((lim.series - 1.09f64.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn lorentz_apply_examples() {
    let v = EnergyMomentum::new(2.0, [0.0; 3]);
    assert_eq!(lorentz_apply(&Mat4::identity(), &v).unwrap(), v);
    let chi = 0.6;
    let w = lorentz_apply(&boost(&Vector3::x(), chi), &v).unwrap();
    assert!((w.e - 2.0 * chi.cosh()).abs() < 1e-14 && (w.p[0] - 2.0 * chi.sinh()).abs() < 1e-14);
    assert!(matches!(lorentz_apply(&(Mat4::identity() * 2.0), &v), Err(Error::NotLorentz { .. })));
}

#[test]
fn richardson_recovers_polynomial_tail() {
    let radii: Vec<f64> = (0..5).map(|j| 100.0 * f64::powi(2.0, j)).collect();
    let values: Vec<f64> = radii.iter().map(|r| 3.0 + 2.0 / r - 50.0 / (r * r) + 700.0 / r.powi(3)).collect();
    let l = richardson(&radii, &values, 0.15).unwrap();
    assert!((l.limit - 3.0).abs() < 1e-12);
    let flat = richardson(&radii, &[1.0; 5], 0.15).unwrap();
    assert_eq!((flat.limit, flat.exponent), (1.0, None));
    let slow: Vec<f64> = radii.iter().map(|r| 1.0 + r.powf(-0.5)).collect();
    assert!(matches!(richardson(&radii, &slow, 0.15), Err(Error::LadderNonConvergence { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn boosts_act_on_four_momentum(dir in prop::array::uniform3(-1.0f64..1.0), chi in -1.0f64..1.0) {
        prop_assume!(Vector3::from(dir).norm() > 0.1);
        let g = grid();
        let l = boost(&Vector3::from(dir), chi);
        let rep = equivariance_check(&generic(&g), &l, &QleConfig::default()).unwrap();
        prop_assert!(rep.residual < 1e-6);
    }
}
