use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::field::SphereField;
use super::grid::SphereGrid;

/// Tangent vector field on the unit sphere, stored by its Cartesian components in ℝ³.
///
/// Cartesian storage keeps every component a smooth function even at the poles; the
/// coordinate components with respect to `σ̃ = dθ² + sin²θ dφ²` are available through
/// [`TangentField::theta_component`] and [`TangentField::phi_component`].
#[derive(Debug, Clone)]
pub struct TangentField<T: Real> {
    grid: Arc<SphereGrid<T>>,
    comps: [Vec<T>; 3],
}

impl<T: Real> TangentField<T> {
    pub(crate) fn from_cartesian_unchecked(grid: &Arc<SphereGrid<T>>, comps: [Vec<T>; 3]) -> Self {
        Self { grid: grid.clone(), comps }
    }

    pub fn zeros(grid: &Arc<SphereGrid<T>>) -> Self {
        let z = vec![T::zero(); grid.len()];
        Self { grid: grid.clone(), comps: [z.clone(), z.clone(), z] }
    }

    /// Tangential projection of the given Cartesian components.
    pub fn from_cartesian(grid: &Arc<SphereGrid<T>>, comps: [Vec<T>; 3]) -> Result<Self> {
        if comps.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::Invalid("tangent field component length mismatch".into()));
        }
        let mut v = Self { grid: grid.clone(), comps };
        v.project();
        Ok(v)
    }

    /// From covariant coordinate components `(v_θ, v_φ)` in the round metric.
    pub fn from_covariant(v_theta: &SphereField<T>, v_phi: &SphereField<T>) -> Result<Self> {
        if !v_theta.same_grid(v_phi) {
            return Err(Error::IncompatibleGrids);
        }
        let g = v_theta.grid();
        let mut comps = [vec![T::zero(); g.len()], vec![T::zero(); g.len()], vec![T::zero(); g.len()]];
        for i in 0..g.len() {
            let (et, ep) = (g.e_theta(i), g.e_phi(i));
            let a = v_theta.values()[i];
            let b = v_phi.values()[i] / g.sin_theta_at(i);
            for c in 0..3 {
                comps[c][i] = a * et[c] + b * ep[c];
            }
        }
        Ok(Self { grid: g.clone(), comps })
    }

    /// From three Cartesian component fields, projected onto the tangent plane.
    pub fn from_fields(fields: [&SphereField<T>; 3]) -> Result<Self> {
        let g = fields[0].grid();
        if !fields.iter().all(|f| f.same_grid(fields[0])) {
            return Err(Error::IncompatibleGrids);
        }
        Self::from_cartesian(g, [fields[0].values().to_vec(), fields[1].values().to_vec(), fields[2].values().to_vec()])
    }

    pub fn grid(&self) -> &Arc<SphereGrid<T>> {
        &self.grid
    }

    pub fn component(&self, c: usize) -> SphereField<T> {
        SphereField::raw(&self.grid, self.comps[c].clone())
    }

    pub fn components(&self) -> [SphereField<T>; 3] {
        [self.component(0), self.component(1), self.component(2)]
    }

    pub fn at(&self, i: usize) -> [T; 3] {
        [self.comps[0][i], self.comps[1][i], self.comps[2][i]]
    }

    /// Covariant θ component `v(∂_θ)`.
    pub fn theta_component(&self) -> SphereField<T> {
        let g = &self.grid;
        SphereField::raw(g, (0..g.len()).map(|i| dot3(self.at(i), g.e_theta(i))).collect())
    }

    /// Covariant φ component `v(∂_φ) = sin θ · v·e_φ`.
    pub fn phi_component(&self) -> SphereField<T> {
        let g = &self.grid;
        SphereField::raw(g, (0..g.len()).map(|i| dot3(self.at(i), g.e_phi(i)) * g.sin_theta_at(i)).collect())
    }

    pub fn normal_component(&self) -> SphereField<T> {
        let g = &self.grid;
        SphereField::raw(g, (0..g.len()).map(|i| dot3(self.at(i), g.normal(i))).collect())
    }

    fn project(&mut self) {
        for i in 0..self.grid.len() {
            let n = self.grid.normal(i);
            let vn = dot3(self.at(i), n);
            for c in 0..3 {
                self.comps[c][i] = self.comps[c][i] - vn * n[c];
            }
        }
    }

    pub fn dot(&self, other: &Self) -> SphereField<T> {
        assert!(Arc::ptr_eq(&self.grid, &other.grid), "fields on different grids");
        let g = &self.grid;
        SphereField::raw(g, (0..g.len()).map(|i| dot3(self.at(i), other.at(i))).collect())
    }

    pub fn scale_by(&self, f: &SphereField<T>) -> Self {
        let mut out = self.clone();
        for c in 0..3 {
            for (v, s) in out.comps[c].iter_mut().zip(f.values()) {
                *v = *v * *s;
            }
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = self.clone();
        for c in 0..3 {
            out.comps[c].iter_mut().for_each(|v| *v = *v * s);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for c in 0..3 {
            for (v, w) in out.comps[c].iter_mut().zip(&other.comps[c]) {
                *v = *v + *w;
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-T::one()))
    }

    /// Rotation by a quarter turn in the tangent plane: `n × v`.
    pub fn rotate(&self) -> Self {
        let g = &self.grid;
        let mut comps = [vec![T::zero(); g.len()], vec![T::zero(); g.len()], vec![T::zero(); g.len()]];
        for i in 0..g.len() {
            let w = cross3(g.normal(i), self.at(i));
            for c in 0..3 {
                comps[c][i] = w[c];
            }
        }
        Self { grid: g.clone(), comps }
    }

    /// Round-sphere divergence of the tangential part.
    pub fn divergence(&self) -> SphereField<T> {
        let g = &self.grid;
        let mut out = vec![T::zero(); g.len()];
        for c in 0..3 {
            let (ft, fp) = self.component(c).angular_derivatives();
            for i in 0..g.len() {
                out[i] = out[i] + ft.values()[i] * g.e_theta(i)[c] + fp.values()[i] * g.e_phi(i)[c];
            }
        }
        // a normal component n·v contributes 2 n·v to Σ_c ∂̃_c v_c on the unit sphere
        let two = T::lit(2.0);
        for i in 0..g.len() {
            out[i] = out[i] - two * dot3(self.at(i), g.normal(i));
        }
        SphereField::raw(g, out)
    }

    /// Scalar curl `div(n × v)`.
    pub fn curl(&self) -> SphereField<T> {
        self.rotate().divergence()
    }

    pub fn max_abs(&self) -> T {
        self.comps.iter().flat_map(|c| c.iter()).fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

#[inline]
pub(crate) fn dot3<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross3<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
