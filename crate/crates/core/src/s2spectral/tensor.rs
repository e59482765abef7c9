//! Pointwise 3×3 tensor fields in Cartesian form, used for tangential 2-tensors.

use std::sync::Arc;

use crate::scalar::Real;

use super::{SphereField, SphereGrid, TangentField};

pub type TensorField<T> = [[SphereField<T>; 3]; 3];

pub fn tensor_zeros<T: Real>(grid: &Arc<SphereGrid<T>>) -> TensorField<T> {
    std::array::from_fn(|_| std::array::from_fn(|_| SphereField::zeros(grid)))
}

/// `P = I − n nᵀ`.
pub fn projector<T: Real>(grid: &Arc<SphereGrid<T>>) -> TensorField<T> {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let d = if i == j { T::one() } else { T::zero() };
            SphereField::raw(grid, (0..grid.len()).map(|q| d - grid.normal(q)[i] * grid.normal(q)[j]).collect())
        })
    })
}

pub fn outer<T: Real>(a: &TangentField<T>, b: &TangentField<T>) -> TensorField<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| &a.component(i) * &b.component(j)))
}

/// `(t_ij + t_ji) / 2`.
pub fn symmetrize<T: Real>(t: &TensorField<T>) -> TensorField<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| (&t[i][j] + &t[j][i]).scale(T::lit(0.5))))
}

pub fn trace<T: Real>(t: &TensorField<T>) -> SphereField<T> {
    &(&t[0][0] + &t[1][1]) + &t[2][2]
}

/// Tangential trace-free part `t − ½ tr(t) P` (for tangential `t`).
pub fn trace_free<T: Real>(t: &TensorField<T>) -> TensorField<T> {
    let g = t[0][0].grid();
    let half_tr = trace(t).scale(T::lit(0.5));
    let p = projector(g);
    std::array::from_fn(|i| std::array::from_fn(|j| &t[i][j] - &(&p[i][j] * &half_tr)))
}

pub fn tensor_apply<T: Real>(t: &TensorField<T>, v: &TangentField<T>) -> TangentField<T> {
    let g = v.grid();
    let n = g.len();
    let mut out = [vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]];
    for q in 0..n {
        let vq = v.at(q);
        for i in 0..3 {
            out[i][q] = t[i][0].values()[q] * vq[0] + t[i][1].values()[q] * vq[1] + t[i][2].values()[q] * vq[2];
        }
    }
    TangentField::from_cartesian_unchecked(g, out)
}

pub fn tensor_add<T: Real>(a: &TensorField<T>, b: &TensorField<T>) -> TensorField<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| &a[i][j] + &b[i][j]))
}

pub fn tensor_scale<T: Real>(a: &TensorField<T>, s: T) -> TensorField<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j].scale(s)))
}

pub fn tensor_max_abs<T: Real>(a: &TensorField<T>) -> T {
    a.iter().flatten().fold(T::zero(), |m, f| m.max(f.max_abs()))
}

/// `D_ib = ∂̃_b Y_i`, rows indexed by the ambient component of `Y`.
pub fn jacobian<T: Real>(y: &[SphereField<T>; 3]) -> TensorField<T> {
    let grads = y.each_ref().map(|f| f.gradient());
    std::array::from_fn(|i| std::array::from_fn(|b| grads[i].component(b)))
}

/// Round-sphere Hessian `∇̃∇̃f` as a symmetric tangential tensor.
pub fn hessian<T: Real>(f: &SphereField<T>) -> TensorField<T> {
    let g = f.grid();
    let grad = f.gradient().components();
    let d = jacobian(&grad);
    let p = projector(g);
    let pd: TensorField<T> = std::array::from_fn(|a| {
        std::array::from_fn(|b| &(&(&p[a][0] * &d[0][b]) + &(&p[a][1] * &d[1][b])) + &(&p[a][2] * &d[2][b]))
    });
    symmetrize(&pd)
}

/// `(t(ê_θ, ê_θ), t(ê_θ, ê_φ), t(ê_φ, ê_φ))`.
pub fn frame_components<T: Real>(t: &TensorField<T>) -> [SphereField<T>; 3] {
    let g = t[0][0].grid();
    let n = g.len();
    let mut out = [vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]];
    for q in 0..n {
        let (et, ep) = (g.e_theta(q), g.e_phi(q));
        let m = |a: [T; 3], b: [T; 3]| {
            let mut s = T::zero();
            for i in 0..3 {
                for j in 0..3 {
                    s = s + a[i] * t[i][j].values()[q] * b[j];
                }
            }
            s
        };
        out[0][q] = m(et, et);
        out[1][q] = m(et, ep);
        out[2][q] = m(ep, ep);
    }
    out.map(|v| SphereField::raw(g, v))
}

/// Tangential tensor with the given frame components `(tt, tp, pp)`.
pub fn from_frame_components<T: Real>(tt: &SphereField<T>, tp: &SphereField<T>, pp: &SphereField<T>) -> TensorField<T> {
    let g = tt.grid();
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            SphereField::raw(
                g,
                (0..g.len())
                    .map(|q| {
                        let (et, ep) = (g.e_theta(q), g.e_phi(q));
                        tt.values()[q] * et[i] * et[j]
                            + tp.values()[q] * (et[i] * ep[j] + ep[i] * et[j])
                            + pp.values()[q] * ep[i] * ep[j]
                    })
                    .collect(),
            )
        })
    })
}
