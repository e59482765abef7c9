use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::s2spectral::{harmonic, SphereField, SphereGrid};

fn grid() -> Arc<SphereGrid<f64>> {
    SphereGrid::new(8).unwrap()
}

fn field(g: &Arc<SphereGrid<f64>>, f: impl Fn(f64, f64, f64) -> f64) -> SphereField<f64> {
    SphereField::from_cartesian(g, f)
}

fn close(a: &SphereField<f64>, b: &SphereField<f64>, tol: f64) -> bool {
    (a - b).max_abs() < tol
}

#[test]
fn recip_of_geometric_series() {
    let g = grid();
    let c = field(&g, |x, y, _| 0.5 + 0.3 * x * y);
    let one = SphereField::constant(&g, 1.0);
    // a = r² - c r, trusted through r^{-4}
    let a = RadialSeries::from_terms(&g, [(2, one.clone()), (1, -&c)], 4).unwrap();
    let b = a.recip().unwrap();
    assert_eq!(b.trunc_order(), 8);
    for n in 0..=6 {
        let want = c.map(|v| v.powi(n));
        assert!(close(&b.coeff_or_zero(-2 - n), &want, 1e-14), "order {n}");
    }
    assert!(b.coeff(-9).is_none());
}

#[test]
fn sqrt_of_perfect_square() {
    let g = grid();
    let c = field(&g, |x, _, z| 0.2 * x - z);
    let two_c = c.scale(2.0);
    let one = SphereField::constant(&g, 1.0);
    let a = RadialSeries::from_terms(&g, [(2, one.clone()), (1, two_c), (0, &c * &c)], 3).unwrap();
    let s = a.sqrt().unwrap();
    assert_eq!(s.trunc_order(), 4);
    assert!(close(&s.coeff_or_zero(1), &one, 1e-14));
    assert!(close(&s.coeff_or_zero(0), &c, 1e-14));
    for k in -4..0 {
        assert!(s.coeff_or_zero(k).max_abs() < 1e-13, "power {k}");
    }
}

#[test]
fn sqrt_rejects_odd_power_and_negative_lead() {
    let g = grid();
    let one = SphereField::constant(&g, 1.0);
    let odd = RadialSeries::monomial(one.clone(), 1, 3);
    assert!(matches!(odd.sqrt(), Err(Error::BadLeadingPower { .. })));
    let neg = RadialSeries::monomial(one.scale(-1.0), 2, 3);
    assert!(matches!(neg.sqrt(), Err(Error::DegenerateLeading { .. })));
    let z = RadialSeries::monomial(field(&g, |x, _, _| x), 0, 3);
    assert!(matches!(z.recip(), Err(Error::DegenerateLeading { .. })));
}

#[test]
fn asinh_matches_pointwise_evaluation() {
    let g = grid();
    let a = field(&g, |x, _, _| 1.0 + 0.5 * x);
    let b = field(&g, |_, y, z| y * z);
    let z = RadialSeries::from_terms(&g, [(-1, a), (-2, b)], 9).unwrap();
    let s = z.asinh().unwrap();
    assert_eq!(s.trunc_order(), 9);
    let mut prev = f64::INFINITY;
    for r in [20.0, 40.0, 80.0] {
        let exact = z.eval(r).map(f64::asinh);
        let err = (&s.eval(r) - &exact).max_abs();
        assert!(err < prev / 500.0 || err < 1e-15, "r = {r}: {err}");
        prev = err;
    }
}

#[test]
fn trust_propagation() {
    let g = grid();
    let one = SphereField::constant(&g, 1.0);
    let a = RadialSeries::monomial(one.clone(), 1, 5);
    let b = RadialSeries::monomial(one.clone(), 2, 3);
    assert_eq!(a.mul(&b).trunc_order(), 2);
    assert_eq!(a.add(&b).trunc_order(), 3);
    assert_eq!(a.shift(-2).trunc_order(), 7);
    assert_eq!(a.deriv_r().trunc_order(), 6);
    assert!(matches!(a.mul(&b).trusted_coeff(-3), Err(Error::Untrusted { .. })));
    assert!(a.mul(&b).trusted_coeff(-2).is_ok());
}

#[test]
fn deriv_and_eval() {
    let g = grid();
    let f = field(&g, |x, _, _| x);
    let s = RadialSeries::from_terms(&g, [(2, f.clone()), (0, f.clone()), (-3, f.clone())], 5).unwrap();
    let d = s.deriv_r();
    let r: f64 = 3.0;
    let want = f.scale(2.0 * r - 3.0 * r.powi(-4));
    assert!(close(&d.eval(r), &want, 1e-14));
    assert!(close(&s.eval(r), &f.scale(r * r + 1.0 + r.powi(-3)), 1e-13));
}

#[test]
fn series_mul_bandlimits() {
    let g = grid();
    let y = harmonic(&g, 6, 2);
    let s = RadialSeries::monomial(y.clone(), 0, 2);
    let prod = series_mul(&s, &s).unwrap();
    let exact = &y * &y;
    assert!(close(&prod.coeff_or_zero(0), &exact.bandlimit(), 1e-14));
    assert!(!close(&prod.coeff_or_zero(0), &exact, 1e-6));
}

#[test]
fn vector_series_divergence_of_gradient_is_laplacian() {
    let g = grid();
    let f = field(&g, |x, y, z| x * y + z * z * z);
    let s = RadialSeries::from_terms(&g, [(0, f.clone()), (-2, f.scale(3.0))], 4).unwrap();
    let lap = VectorSeries::gradient(&s).divergence();
    assert!(close(&lap.coeff_or_zero(-2), &f.laplacian().scale(3.0), 1e-12));
    let rot = VectorSeries::gradient(&s).rotate().divergence();
    assert!(rot.max_abs_coeff() < 1e-12);
}

#[test]
fn tensor_divergence_of_projector_vanishes() {
    let g = grid();
    let p = TensorSeries::projector(&g, 2);
    assert!(p.divergence().comps.iter().all(|c| c.max_abs_coeff() < 1e-12));
    // div(f P) = ∇f
    let f = field(&g, |x, _, z| x * z);
    let fp = p.scale_by(&RadialSeries::constant(f.clone(), 2)).divergence();
    let grad = f.gradient();
    for c in 0..3 {
        assert!(close(&fp.comps[c].coeff_or_zero(0), &grad.component(c), 1e-12));
    }
}

#[test]
fn documented_examples() {
    let g = grid();
    let one = SphereField::constant(&g, 1.0);
    let m = field(&g, |x, _, z| 0.4 + 0.1 * x * z);
    // (r·1)(r⁻¹·1) = 1
    let p = series_mul(&RadialSeries::monomial(one.clone(), 1, 4), &RadialSeries::monomial(one.clone(), -1, 4)).unwrap();
    assert_eq!(p.powers(), vec![0]);
    assert!(close(&p.coeff_or_zero(0), &one, 1e-13));
    // (2r⁻¹ − 2M r⁻²)² = 4r⁻² − 8M r⁻³ + 4M² r⁻⁴
    let big_m = 1.3;
    let a = RadialSeries::from_terms(&g, [(-1, one.scale(2.0)), (-2, one.scale(-2.0 * big_m))], 8).unwrap();
    let sq = series_mul(&a, &a).unwrap();
    for (k, v) in [(-2, 4.0), (-3, -8.0 * big_m), (-4, 4.0 * big_m * big_m)] {
        assert!(close(&sq.coeff_or_zero(k), &one.scale(v), 1e-12));
    }
    // sqrt(4r⁻² − 8m r⁻³) = 2r⁻¹ − 2m r⁻² + O(r⁻³)
    let b = RadialSeries::from_terms(&g, [(-2, one.scale(4.0)), (-3, m.scale(-8.0))], 6).unwrap();
    let s = series_sqrt(&b).unwrap();
    assert!(close(&s.coeff_or_zero(-1), &one.scale(2.0), 1e-14));
    assert!(close(&s.coeff_or_zero(-2), &m.scale(-2.0), 1e-14));
    // recip(2r⁻¹ + f r⁻²) = ½r − ¼f + O(r⁻¹)
    let f = field(&g, |x, y, _| x - y);
    let c = RadialSeries::from_terms(&g, [(-1, one.scale(2.0)), (-2, f.clone())], 5).unwrap();
    let inv = series_recip(&c).unwrap();
    assert!(close(&inv.coeff_or_zero(1), &one.scale(0.5), 1e-14));
    assert!(close(&inv.coeff_or_zero(0), &f.scale(-0.25), 1e-14));
    let unity = c.mul(&inv);
    assert!(close(&unity.coeff_or_zero(0), &one, 1e-14));
    for k in -unity.trunc_order()..0 {
        assert!(unity.coeff_or_zero(k).max_abs() < 1e-13);
    }
    // evaluation
    assert!(close(&series_eval(&RadialSeries::monomial(one.scale(2.0), -1, 3), 100.0), &one.scale(0.02), 1e-16));
}

#[test]
fn product_matches_pointwise_evaluation() {
    let g = grid();
    let a = RadialSeries::from_terms(&g, [(1, field(&g, |x, _, _| 1.0 + 0.2 * x)), (0, field(&g, |_, y, _| y)), (-1, field(&g, |_, _, z| z * z))], 12).unwrap();
    let b = RadialSeries::from_terms(&g, [(0, field(&g, |_, _, z| 2.0 + z)), (-1, field(&g, |x, y, _| x * y)), (-2, field(&g, |x, _, _| x))], 12).unwrap();
    let p = a.mul(&b);
    for r in [1e3, 1e4] {
        let direct = &a.eval(r) * &b.eval(r);
        let rel = (&p.eval(r) - &direct).max_abs() / direct.max_abs();
        assert!(rel < 1e-8, "r = {r}: {rel}");
    }
}

fn coeff_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-0.5..0.5f64, -0.5..0.5f64), 4)
}

fn sample_series(g: &Arc<SphereGrid<f64>>, c: &[(f64, f64)], top: i32, trunc: i32) -> RadialSeries<f64> {
    let mut terms = vec![(top, SphereField::constant(g, 1.5))];
    for (n, (a, b)) in c.iter().enumerate() {
        let (a, b) = (*a, *b);
        terms.push((top - 1 - n as i32, field(g, move |x, y, z| a * x + b * y * z)));
    }
    RadialSeries::from_terms(g, terms, trunc).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn recip_is_inverse(c in coeff_strategy(), top in -2i32..3) {
        let g = grid();
        let a = sample_series(&g, &c, top, 6);
        let prod = a.mul(&a.recip().unwrap());
        prop_assert_eq!(prod.trunc_order(), 6 + top);
        prop_assert!(close(&prod.coeff_or_zero(0), &SphereField::constant(&g, 1.0), 1e-12));
        for k in -prod.trunc_order()..0 {
            prop_assert!(prod.coeff_or_zero(k).max_abs() < 1e-11);
        }
    }

    #[test]
    fn sqrt_squares_back(c in coeff_strategy(), half in -1i32..2) {
        let g = grid();
        let a = sample_series(&g, &c, 2 * half, 5);
        let s = a.sqrt().unwrap();
        let sq = s.mul(&s);
        prop_assert_eq!(sq.trunc_order(), a.trunc_order());
        for k in -sq.trunc_order()..=2 * half {
            prop_assert!(close(&sq.coeff_or_zero(k), &a.coeff_or_zero(k), 1e-12));
        }
    }

    #[test]
    fn product_is_commutative_and_distributive(c in coeff_strategy(), d in coeff_strategy()) {
        let g = grid();
        let a = sample_series(&g, &c, 1, 4);
        let b = sample_series(&g, &d, -1, 5);
        let ab = a.mul(&b);
        let ba = b.mul(&a);
        prop_assert_eq!(ab.trunc_order(), ba.trunc_order());
        let s = a.mul(&a.add(&b)).sub(&a.mul(&a).add(&ab));
        prop_assert!(s.max_abs_coeff() < 1e-12);
        prop_assert!(ab.sub(&ba).max_abs_coeff() < 1e-14);
    }
}
