//! Minkowski-space utilities with signature (−, +, +, +).

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};

use crate::error::{Error, Result};

pub type Mat4 = Matrix4<f64>;
pub type Vec4 = Vector4<f64>;

pub const LORENTZ_TOL: f64 = 1e-10;

pub fn eta() -> Mat4 {
    Mat4::from_diagonal(&Vec4::new(-1.0, 1.0, 1.0, 1.0))
}

pub fn minkowski_dot(a: &Vec4, b: &Vec4) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

/// `max |LᵀηL − η|`.
pub fn lorentz_defect(l: &Mat4) -> f64 {
    (l.transpose() * eta() * l - eta()).abs().max()
}

pub fn check_lorentz(l: &Mat4) -> Result<()> {
    let d = lorentz_defect(l);
    if d.is_finite() && d <= LORENTZ_TOL {
        Ok(())
    } else {
        Err(Error::NotLorentz { residual: d })
    }
}

/// `max |bᵀη + ηb|`; zero for elements of the Lie algebra.
pub fn algebra_defect(b: &Mat4) -> f64 {
    (b.transpose() * eta() + eta() * b).abs().max()
}

/// Generator with `b_0i = b_i0 = v_i` and a zero rotation block.
pub fn boost_generator(v: &Vector3<f64>) -> Mat4 {
    let mut b = Mat4::zeros();
    for i in 0..3 {
        b[(0, i + 1)] = v[i];
        b[(i + 1, 0)] = v[i];
    }
    b
}

/// Rotation generator `b_ij = −ε_ijk w_k`.
pub fn rotation_generator(w: &Vector3<f64>) -> Mat4 {
    let mut b = Mat4::zeros();
    b.fixed_view_mut::<3, 3>(1, 1).copy_from(&w.cross_matrix());
    b
}

pub fn expm(b: &Mat4) -> Mat4 {
    b.exp()
}

/// Pure boost whose first row is `(√(1+|c|²), c)`.
pub fn boost_from_row(c: &Vector3<f64>) -> Mat4 {
    let gamma = (1.0 + c.norm_squared()).sqrt();
    let mut l = Mat4::zeros();
    l[(0, 0)] = gamma;
    let spatial = Matrix3::identity() + c * c.transpose() / (gamma + 1.0);
    l.fixed_view_mut::<3, 3>(1, 1).copy_from(&spatial);
    for i in 0..3 {
        l[(0, i + 1)] = c[i];
        l[(i + 1, 0)] = c[i];
    }
    l
}

/// Pure boost of rapidity `chi` along the unit vector `dir`.
pub fn boost(dir: &Vector3<f64>, chi: f64) -> Mat4 {
    let u = dir.normalize();
    boost_from_row(&(u * chi.sinh()))
}

/// Rapidity vector of [`boost_from_row`]: generator `v` with `exp(boost_generator(v))` equal to it.
pub fn rapidity_of_row(c: &Vector3<f64>) -> Vector3<f64> {
    let n = c.norm();
    if n == 0.0 {
        Vector3::zeros()
    } else {
        c * (n.asinh() / n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn eta_signature() {
        let e = eta();
        assert_eq!(e.diagonal(), Vec4::new(-1.0, 1.0, 1.0, 1.0));
        assert_eq!(minkowski_dot(&Vec4::new(1.0, 0.0, 0.0, 0.0), &Vec4::new(1.0, 0.0, 0.0, 0.0)), -1.0);
    }

    #[test]
    fn x_boost_on_rest_vector() {
        let chi = 0.7;
        let l = boost(&Vector3::x(), chi);
        let v = l * Vec4::new(2.0, 0.0, 0.0, 0.0);
        assert_abs_diff_eq!(v, Vec4::new(2.0 * chi.cosh(), 2.0 * chi.sinh(), 0.0, 0.0), epsilon = 1e-14);
    }

    #[test]
    fn non_lorentz_rejected() {
        let l = Mat4::identity() * 1.01;
        assert!(matches!(check_lorentz(&l), Err(Error::NotLorentz { .. })));
        assert!(check_lorentz(&Mat4::identity()).is_ok());
    }

    #[test]
    fn row_boost_has_prescribed_row() {
        let c = Vector3::new(0.75, 0.0, 0.0);
        let b = boost_from_row(&c);
        assert_abs_diff_eq!(b[(0, 0)], 1.25, epsilon = 1e-15);
        assert_abs_diff_eq!(b[(0, 1)], 0.75, epsilon = 1e-15);
        assert!(lorentz_defect(&b) < 1e-14);
    }

    proptest! {
        #[test]
        fn generators_exponentiate_to_lorentz(v in prop::array::uniform3(-1.0f64..1.0), w in prop::array::uniform3(-1.0f64..1.0)) {
            let b = boost_generator(&Vector3::from(v)) + rotation_generator(&Vector3::from(w));
            prop_assert!(algebra_defect(&b) < 1e-14);
            prop_assert!(lorentz_defect(&expm(&b)) < 1e-12);
        }

        #[test]
        fn row_boost_roundtrip(c in prop::array::uniform3(-3.0f64..3.0)) {
            let c = Vector3::from(c);
            let b = boost_from_row(&c);
            prop_assert!(lorentz_defect(&b) < 1e-12);
            let chi = rapidity_of_row(&c);
            let again = expm(&boost_generator(&chi));
            prop_assert!((again - b).amax() < 1e-11 * b.amax());
        }
    }
}
