//! Spectral tools on the round unit sphere.
//!
//! Gauss–Legendre × equispaced grids, real orthonormal harmonic transforms, surface
//! gradient/divergence through Cartesian tangent fields, and the fourth-order operator
//! `Δ̃(Δ̃ + 2)` whose kernel is spanned by constants and degree-one harmonics.

mod field;
mod grid;
mod stability;
mod tangent;
pub mod tensor;

use std::sync::Arc;

pub use field::{HarmonicSpectrum, SphereField};
pub use grid::{gauss_legendre, harmonic_index, SphereGrid};
pub use stability::{
    apply_stability, kernel_content, project_out_kernel, solve_stability, solve_stability_with_tol,
    stability_eigenvalue, DEFAULT_SOLVABILITY_TOL,
};
pub use tangent::TangentField;
pub use tensor::TensorField;
#[allow(unused_imports)]
pub(crate) use tangent::{cross3, dot3};

use crate::scalar::Real;

/// Cartesian axis carrying the momentum eigenfunction `X̃_i`:
/// `X̃_1 = sin θ sin φ (y)`, `X̃_2 = sin θ cos φ (x)`, `X̃_3 = cos θ (z)`.
pub const EIGEN_AXIS: [usize; 3] = [1, 0, 2];

/// `∫ X̃_i² dS² = 4π/3`; divide by this to turn an `X̃_i` projection into a coefficient.
pub fn eigen_norm_sq<T: Real>() -> T {
    T::lit(4.0) * T::PI() / T::lit(3.0)
}

/// The three unnormalized degree-one eigenfunctions `X̃_1, X̃_2, X̃_3` (eigenvalue −2).
pub fn eigenfunctions<T: Real>(grid: &Arc<SphereGrid<T>>) -> [SphereField<T>; 3] {
    let f = |c: usize| SphereField::from_cartesian(grid, move |x, y, z| [x, y, z][c]);
    [f(EIGEN_AXIS[0]), f(EIGEN_AXIS[1]), f(EIGEN_AXIS[2])]
}

/// `(∫ f X̃_1, ∫ f X̃_2, ∫ f X̃_3)`.
pub fn eigen_projections<T: Real>(f: &SphereField<T>) -> [T; 3] {
    let g = f.grid();
    let mut out = [T::zero(); 3];
    for (i, o) in out.iter_mut().enumerate() {
        let axis = EIGEN_AXIS[i];
        *o = (0..g.len()).map(|n| g.weight(n) * f.values()[n] * g.normal(n)[axis]).sum();
    }
    out
}

/// Linear combination `Σ a_i X̃_i`.
pub fn eigen_combination<T: Real>(grid: &Arc<SphereGrid<T>>, a: [T; 3]) -> SphereField<T> {
    SphereField::from_cartesian(grid, move |x, y, z| {
        let p = [x, y, z];
        a[0] * p[EIGEN_AXIS[0]] + a[1] * p[EIGEN_AXIS[1]] + a[2] * p[EIGEN_AXIS[2]]
    })
}

/// Real orthonormal harmonic `Y_{l m}` sampled on the grid.
pub fn harmonic<T: Real>(grid: &Arc<SphereGrid<T>>, l: usize, m: i64) -> SphereField<T> {
    let mut spec = HarmonicSpectrum::zeros(grid.l_max());
    spec.set(l, m, T::one());
    SphereField::synthesize(grid, &spec).expect("degree within band limit")
}
