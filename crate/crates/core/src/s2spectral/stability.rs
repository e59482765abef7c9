use crate::error::{Error, Result};
use crate::scalar::Real;

use super::field::{HarmonicSpectrum, SphereField};

/// Default relative tolerance for the l ∈ {0, 1} content of a stability-operator source.
pub const DEFAULT_SOLVABILITY_TOL: f64 = 1e-8;

/// Eigenvalue of `Δ̃(Δ̃ + 2)` on degree `l`: `l(l+1)(l(l+1) - 2)`.
pub fn stability_eigenvalue<T: Real>(l: usize) -> T {
    let k = T::from_usize(l * (l + 1)).unwrap();
    k * (k - T::lit(2.0))
}

/// `Δ̃(Δ̃ + 2) u`, spectrally.
pub fn apply_stability<T: Real>(u: &SphereField<T>) -> SphereField<T> {
    let spec = u.analyze().map_degree(stability_eigenvalue::<T>);
    SphereField::synthesize(u.grid(), &spec).expect("grid band limit")
}

/// Magnitudes of the l = 0 and l = 1 blocks of a spectrum.
pub fn kernel_content<T: Real>(spec: &HarmonicSpectrum<T>) -> (T, T) {
    (spec.degree_norm(0), spec.degree_norm(1))
}

/// Inverts `Δ̃(Δ̃ + 2)` on degrees `l >= 2`.
///
/// The returned representative has no l ∈ {0, 1} content. Fails when the source has
/// l = 0 or l = 1 content above `tol` relative to its norm.
pub fn solve_stability_with_tol<T: Real>(f: &SphereField<T>, tol: T) -> Result<SphereField<T>> {
    let spec = f.analyze();
    let norm = spec.norm();
    let (l0, l1) = kernel_content(&spec);
    if norm > T::zero() && (l0 > tol * norm || l1 > tol * norm) {
        return Err(Error::Solvability { l0: l0.to_f64_lossy(), l1: l1.to_f64_lossy(), norm: norm.to_f64_lossy() });
    }
    let inv = spec.map_degree(|l| if l < 2 { T::zero() } else { T::one() / stability_eigenvalue::<T>(l) });
    SphereField::synthesize(f.grid(), &inv)
}

pub fn solve_stability<T: Real>(f: &SphereField<T>) -> Result<SphereField<T>> {
    solve_stability_with_tol(f, T::lit(DEFAULT_SOLVABILITY_TOL))
}

/// Removes the l = 0 and l = 1 content of a field.
pub fn project_out_kernel<T: Real>(f: &SphereField<T>) -> SphereField<T> {
    let spec = f.analyze().map_degree(|l| if l < 2 { T::zero() } else { T::one() });
    SphereField::synthesize(f.grid(), &spec).expect("grid band limit")
}
