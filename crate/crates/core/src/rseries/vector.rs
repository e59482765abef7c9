use std::collections::BTreeSet;
use std::sync::Arc;

use crate::s2spectral::{SphereField, SphereGrid, TangentField};
use crate::scalar::Real;

use super::RadialSeries;

/// Cartesian components of a unit-sphere normal, as fields.
pub(crate) fn normal_fields<T: Real>(grid: &Arc<SphereGrid<T>>) -> [SphereField<T>; 3] {
    std::array::from_fn(|c| SphereField::raw(grid, (0..grid.len()).map(|i| grid.normal(i)[c]).collect()))
}

/// Series of ℝ³-valued fields, used for tangent vectors in Cartesian form.
#[derive(Debug, Clone)]
pub struct VectorSeries<T: Real> {
    pub comps: [RadialSeries<T>; 3],
}

impl<T: Real> VectorSeries<T> {
    pub fn zero(grid: &Arc<SphereGrid<T>>, trunc: i32) -> Self {
        Self { comps: std::array::from_fn(|_| RadialSeries::zero(grid, trunc)) }
    }

    pub fn monomial_fields(f: [SphereField<T>; 3], power: i32, trunc: i32) -> Self {
        let [a, b, c] = f;
        Self { comps: [RadialSeries::monomial(a, power, trunc), RadialSeries::monomial(b, power, trunc), RadialSeries::monomial(c, power, trunc)] }
    }

    pub fn from_tangent(v: &TangentField<T>, power: i32, trunc: i32) -> Self {
        Self { comps: std::array::from_fn(|c| RadialSeries::monomial(v.component(c), power, trunc)) }
    }

    pub fn grid(&self) -> &Arc<SphereGrid<T>> {
        self.comps[0].grid()
    }

    pub fn trunc_order(&self) -> i32 {
        self.comps.iter().map(|c| c.trunc_order()).min().unwrap()
    }

    fn powers(&self) -> BTreeSet<i32> {
        self.comps.iter().flat_map(|c| c.powers()).collect()
    }

    /// Coefficient of `r^power` as a tangent field (no projection).
    pub fn coeff(&self, power: i32) -> TangentField<T> {
        let g = self.grid().clone();
        TangentField::from_cartesian_unchecked(&g, std::array::from_fn(|c| self.comps[c].coeff_or_zero(power).into_values()))
    }

    /// Coefficient-wise round-sphere gradient.
    pub fn gradient(s: &RadialSeries<T>) -> Self {
        let g = s.grid();
        let mut out = Self::zero(g, s.trunc_order());
        for (k, f) in s.terms() {
            let v = f.gradient();
            for c in 0..3 {
                out.comps[c].set_coeff(k, v.component(c));
            }
        }
        out
    }

    /// Coefficient-wise round-sphere divergence of the tangential part.
    pub fn divergence(&self) -> RadialSeries<T> {
        let mut out = RadialSeries::zero(self.grid(), self.trunc_order());
        for k in self.powers() {
            if k >= -out.trunc_order() {
                out.set_coeff(k, self.coeff(k).divergence());
            }
        }
        out
    }

    pub fn dot(&self, other: &Self) -> RadialSeries<T> {
        let mut acc = self.comps[0].mul(&other.comps[0]);
        for c in 1..3 {
            acc = acc.add(&self.comps[c].mul(&other.comps[c]));
        }
        acc
    }

    pub fn scale_by(&self, s: &RadialSeries<T>) -> Self {
        Self { comps: std::array::from_fn(|c| self.comps[c].mul(s)) }
    }

    pub fn scale(&self, s: T) -> Self {
        Self { comps: std::array::from_fn(|c| self.comps[c].scale(s)) }
    }

    pub fn shift(&self, p: i32) -> Self {
        Self { comps: std::array::from_fn(|c| self.comps[c].shift(p)) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { comps: std::array::from_fn(|c| self.comps[c].add(&other.comps[c])) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { comps: std::array::from_fn(|c| self.comps[c].sub(&other.comps[c])) }
    }

    pub fn truncate(&self, trunc: i32) -> Self {
        Self { comps: std::array::from_fn(|c| self.comps[c].truncate(trunc)) }
    }

    /// `n × v`.
    pub fn rotate(&self) -> Self {
        let n = normal_fields(self.grid());
        let cross = |a: usize, b: usize| self.comps[b].mul_field(&n[a]).sub(&self.comps[a].mul_field(&n[b]));
        Self { comps: [cross(1, 2), cross(2, 0), cross(0, 1)] }
    }

    pub fn eval(&self, r: T) -> TangentField<T> {
        let g = self.grid().clone();
        TangentField::from_cartesian_unchecked(&g, std::array::from_fn(|c| self.comps[c].eval(r).into_values()))
    }
}

/// Series of 3×3 matrix-valued fields.
#[derive(Debug, Clone)]
pub struct TensorSeries<T: Real> {
    pub comps: [[RadialSeries<T>; 3]; 3],
}

impl<T: Real> TensorSeries<T> {
    pub fn zero(grid: &Arc<SphereGrid<T>>, trunc: i32) -> Self {
        Self { comps: std::array::from_fn(|_| std::array::from_fn(|_| RadialSeries::zero(grid, trunc))) }
    }

    /// `t · r^power`.
    pub fn monomial(t: &crate::s2spectral::TensorField<T>, power: i32, trunc: i32) -> Self {
        Self { comps: std::array::from_fn(|i| std::array::from_fn(|j| RadialSeries::monomial(t[i][j].clone(), power, trunc))) }
    }

    /// Tangential projector `P = I - n nᵀ` as an r-independent series.
    pub fn projector(grid: &Arc<SphereGrid<T>>, trunc: i32) -> Self {
        let n = normal_fields(grid);
        Self {
            comps: std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    let delta = if i == j { T::one() } else { T::zero() };
                    let f = (&n[i] * &n[j]).map(|v| delta - v);
                    RadialSeries::constant(f, trunc)
                })
            }),
        }
    }

    /// `Σ_k a_k ⊗ b_k` over matching series.
    pub fn outer(a: &VectorSeries<T>, b: &VectorSeries<T>) -> Self {
        Self { comps: std::array::from_fn(|i| std::array::from_fn(|j| a.comps[i].mul(&b.comps[j]))) }
    }

    pub fn grid(&self) -> &Arc<SphereGrid<T>> {
        self.comps[0][0].grid()
    }

    pub fn trunc_order(&self) -> i32 {
        self.comps.iter().flatten().map(|c| c.trunc_order()).min().unwrap()
    }

    pub fn apply(&self, v: &VectorSeries<T>) -> VectorSeries<T> {
        VectorSeries {
            comps: std::array::from_fn(|i| {
                let mut acc = self.comps[i][0].mul(&v.comps[0]);
                for j in 1..3 {
                    acc = acc.add(&self.comps[i][j].mul(&v.comps[j]));
                }
                acc
            }),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self {
            comps: std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    let mut acc = self.comps[i][0].mul(&other.comps[0][j]);
                    for k in 1..3 {
                        acc = acc.add(&self.comps[i][k].mul(&other.comps[k][j]));
                    }
                    acc
                })
            }),
        }
    }

    pub fn transpose(&self) -> Self {
        Self { comps: std::array::from_fn(|i| std::array::from_fn(|j| self.comps[j][i].clone())) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { comps: std::array::from_fn(|i| std::array::from_fn(|j| self.comps[i][j].add(&other.comps[i][j]))) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { comps: std::array::from_fn(|i| std::array::from_fn(|j| self.comps[i][j].sub(&other.comps[i][j]))) }
    }

    pub fn scale(&self, s: T) -> Self {
        Self { comps: std::array::from_fn(|i| std::array::from_fn(|j| self.comps[i][j].scale(s))) }
    }

    pub fn scale_by(&self, s: &RadialSeries<T>) -> Self {
        Self { comps: std::array::from_fn(|i| std::array::from_fn(|j| self.comps[i][j].mul(s))) }
    }

    pub fn shift(&self, p: i32) -> Self {
        Self { comps: std::array::from_fn(|i| std::array::from_fn(|j| self.comps[i][j].shift(p))) }
    }

    pub fn truncate(&self, trunc: i32) -> Self {
        Self { comps: std::array::from_fn(|i| std::array::from_fn(|j| self.comps[i][j].truncate(trunc))) }
    }

    pub fn trace(&self) -> RadialSeries<T> {
        self.comps[0][0].add(&self.comps[1][1]).add(&self.comps[2][2])
    }

    /// Coefficient of `r^power` as a 3×3 array of fields.
    pub fn coeff(&self, power: i32) -> [[SphereField<T>; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.comps[i][j].coeff_or_zero(power)))
    }

    /// Coefficient-wise divergence of a tangential tensor: `P_lj Σ_i ∂̃_i T_ij`.
    pub fn divergence(&self) -> VectorSeries<T> {
        let g = self.grid().clone();
        let trunc = self.trunc_order();
        let powers: BTreeSet<i32> = self.comps.iter().flatten().flat_map(|c| c.powers()).collect();
        let mut out = VectorSeries::zero(&g, trunc);
        for k in powers.into_iter().filter(|k| *k >= -trunc) {
            let v = tensor_divergence(&self.coeff(k));
            for c in 0..3 {
                out.comps[c].set_coeff(k, v.component(c));
            }
        }
        out
    }
}

/// Divergence of a tangential symmetric-or-not tensor field given by Cartesian components.
pub fn tensor_divergence<T: Real>(t: &[[SphereField<T>; 3]; 3]) -> TangentField<T> {
    let g = t[0][0].grid().clone();
    let n = g.len();
    let mut raw = [vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]];
    for (i, row) in t.iter().enumerate() {
        for (j, tij) in row.iter().enumerate() {
            let (ft, fp) = tij.angular_derivatives();
            for q in 0..n {
                raw[j][q] = raw[j][q] + ft.values()[q] * g.e_theta(q)[i] + fp.values()[q] * g.e_phi(q)[i];
            }
        }
    }
    TangentField::from_cartesian(&g, raw).expect("lengths match")
}
