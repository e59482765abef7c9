use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::grid::{harmonic_index, SphereGrid};

/// Real coefficients in the orthonormal basis: `m > 0` pairs with `cos(mφ)`,
/// `m < 0` with `sin(|m|φ)`. Packed by [`harmonic_index`].
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSpectrum<T: Real> {
    l_max: usize,
    coeffs: Vec<T>,
}

impl<T: Real> HarmonicSpectrum<T> {
    pub fn zeros(l_max: usize) -> Self {
        Self { l_max, coeffs: vec![T::zero(); (l_max + 1) * (l_max + 1)] }
    }

    pub fn from_coeffs(l_max: usize, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != (l_max + 1) * (l_max + 1) {
            return Err(Error::Invalid(format!(
                "spectrum length {} does not match l_max {}",
                coeffs.len(),
                l_max
            )));
        }
        Ok(Self { l_max, coeffs })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }
    pub fn get(&self, l: usize, m: i64) -> T {
        self.coeffs[harmonic_index(l, m)]
    }
    pub fn set(&mut self, l: usize, m: i64, v: T) {
        self.coeffs[harmonic_index(l, m)] = v;
    }

    /// Multiplies the degree-`l` block by `g(l)`.
    pub fn map_degree(mut self, g: impl Fn(usize) -> T) -> Self {
        for l in 0..=self.l_max {
            let s = g(l);
            for m in -(l as i64)..=(l as i64) {
                self.coeffs[harmonic_index(l, m)] = self.coeffs[harmonic_index(l, m)] * s;
            }
        }
        self
    }

    /// Euclidean norm of the degree-`l` block.
    pub fn degree_norm(&self, l: usize) -> T {
        (-(l as i64)..=(l as i64))
            .map(|m| self.get(l, m).powi(2))
            .sum::<T>()
            .sqrt()
    }

    pub fn norm(&self) -> T {
        self.coeffs.iter().map(|c| *c * *c).sum::<T>().sqrt()
    }

    /// Highest degree carrying a coefficient above `tol` (absolute).
    pub fn effective_degree(&self, tol: T) -> usize {
        (0..=self.l_max).rev().find(|&l| self.degree_norm(l) > tol).unwrap_or(0)
    }
}

/// Samples of a function on the nodes of a [`SphereGrid`].
#[derive(Debug, Clone)]
pub struct SphereField<T: Real> {
    grid: Arc<SphereGrid<T>>,
    values: Vec<T>,
}

impl<T: Real> PartialEq for SphereField<T> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) && self.values == other.values
    }
}

enum RingKernel {
    Value,
    DTheta,
    DPhiOverSin,
}

impl<T: Real> SphereField<T> {
    pub fn from_values(grid: &Arc<SphereGrid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Invalid(format!(
                "field has {} samples, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite field sample".into()));
        }
        Ok(Self { grid: grid.clone(), values })
    }

    pub(crate) fn raw(grid: &Arc<SphereGrid<T>>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid: grid.clone(), values }
    }

    pub fn zeros(grid: &Arc<SphereGrid<T>>) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn constant(grid: &Arc<SphereGrid<T>>, c: T) -> Self {
        Self { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    /// Samples `f(θ, φ)`.
    pub fn from_fn(grid: &Arc<SphereGrid<T>>, f: impl Fn(T, T) -> T) -> Self {
        let values = grid.nodes().map(|(t, p, _)| f(t, p)).collect();
        Self { grid: grid.clone(), values }
    }

    /// Samples `f(x, y, z)` at the node positions on the unit sphere.
    pub fn from_cartesian(grid: &Arc<SphereGrid<T>>, f: impl Fn(T, T, T) -> T) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let n = grid.normal(i);
                f(n[0], n[1], n[2])
            })
            .collect();
        Self { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &Arc<SphereGrid<T>> {
        &self.grid
    }
    pub fn values(&self) -> &[T] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert!(self.same_grid(other), "fields on different grids");
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    pub fn axpy(&mut self, a: T, x: &Self) {
        assert!(self.same_grid(x), "fields on different grids");
        for (y, &xv) in self.values.iter_mut().zip(&x.values) {
            *y = *y + a * xv;
        }
    }

    /// Gauss–Legendre × trapezoid quadrature of the field over the unit sphere.
    pub fn integrate(&self) -> T {
        let g = &self.grid;
        let n_phi = g.n_phi();
        (0..g.n_theta())
            .map(|j| g.ring_weight(j) * self.values[j * n_phi..(j + 1) * n_phi].iter().copied().sum::<T>())
            .sum()
    }

    /// L² norm with respect to the round area measure.
    pub fn l2_norm(&self) -> T {
        self.map(|v| v * v).integrate().max(T::zero()).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Projection onto the real orthonormal harmonics up to the grid band limit.
    pub fn analyze(&self) -> HarmonicSpectrum<T> {
        self.analyze_to(self.grid.l_max()).expect("grid band limit")
    }

    pub fn analyze_to(&self, l_max: usize) -> Result<HarmonicSpectrum<T>> {
        let g = &self.grid;
        if l_max > g.l_max() {
            return Err(Error::GridTooSmall { n_theta: g.n_theta(), requested: l_max, max: g.l_max() });
        }
        let n_phi = g.n_phi();
        let sqrt2 = T::lit(2.0).sqrt();
        let mut out = HarmonicSpectrum::zeros(l_max);
        for j in 0..g.n_theta() {
            let ring = &self.values[j * n_phi..(j + 1) * n_phi];
            let wt = g.ring_weight(j);
            for m in 0..=l_max {
                let (cm, sm) = (g.cos_m(m), g.sin_m(m));
                let mut c = T::zero();
                let mut s = T::zero();
                for k in 0..n_phi {
                    c = c + ring[k] * cm[k];
                    s = s + ring[k] * sm[k];
                }
                if m == 0 {
                    for l in 0..=l_max {
                        let idx = harmonic_index(l, 0);
                        out.coeffs[idx] = out.coeffs[idx] + wt * g.p(j, l, 0) * c;
                    }
                } else {
                    let (c, s) = (c * wt * sqrt2, s * wt * sqrt2);
                    for l in m..=l_max {
                        let p = g.p(j, l, m);
                        let ip = harmonic_index(l, m as i64);
                        let im = harmonic_index(l, -(m as i64));
                        out.coeffs[ip] = out.coeffs[ip] + p * c;
                        out.coeffs[im] = out.coeffs[im] + p * s;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Evaluates a spectrum on the grid nodes.
    pub fn synthesize(grid: &Arc<SphereGrid<T>>, spec: &HarmonicSpectrum<T>) -> Result<Self> {
        Self::synth_kernel(grid, spec, RingKernel::Value)
    }

    fn synth_kernel(grid: &Arc<SphereGrid<T>>, spec: &HarmonicSpectrum<T>, kernel: RingKernel) -> Result<Self> {
        let l_max = spec.l_max();
        if l_max > grid.l_max() {
            return Err(Error::GridTooSmall { n_theta: grid.n_theta(), requested: l_max, max: grid.l_max() });
        }
        let n_phi = grid.n_phi();
        let sqrt2 = T::lit(2.0).sqrt();
        let mut values = vec![T::zero(); grid.len()];
        for j in 0..grid.n_theta() {
            let inv_sin = T::one() / grid.ring_sin(j);
            let ring = &mut values[j * n_phi..(j + 1) * n_phi];
            for m in 0..=l_max {
                let mut a = T::zero();
                let mut b = T::zero();
                for l in m..=l_max {
                    let p = match kernel {
                        RingKernel::Value => grid.p(j, l, m),
                        RingKernel::DTheta => grid.dp(j, l, m),
                        RingKernel::DPhiOverSin => grid.p(j, l, m) * inv_sin,
                    };
                    if m == 0 {
                        a = a + p * spec.get(l, 0);
                    } else {
                        a = a + p * spec.get(l, m as i64);
                        b = b + p * spec.get(l, -(m as i64));
                    }
                }
                if m > 0 {
                    a = a * sqrt2;
                    b = b * sqrt2;
                }
                let (cm, sm) = (grid.cos_m(m), grid.sin_m(m));
                match kernel {
                    RingKernel::DPhiOverSin => {
                        // d/dφ: cos(mφ) -> -m sin(mφ), sin(mφ) -> m cos(mφ)
                        let mf = T::from_usize(m).unwrap();
                        for k in 0..n_phi {
                            ring[k] = ring[k] + mf * (b * cm[k] - a * sm[k]);
                        }
                    }
                    _ => {
                        for k in 0..n_phi {
                            ring[k] = ring[k] + a * cm[k] + b * sm[k];
                        }
                    }
                }
            }
        }
        Ok(Self { grid: grid.clone(), values })
    }

    /// Projection onto degrees `<= grid.l_max()`.
    pub fn bandlimit(&self) -> Self {
        Self::synthesize(&self.grid, &self.analyze()).expect("grid band limit")
    }

    /// Round-sphere Laplacian, spectrally.
    pub fn laplacian(&self) -> Self {
        let spec = self.analyze().map_degree(|l| -T::from_usize(l * (l + 1)).unwrap());
        Self::synthesize(&self.grid, &spec).expect("grid band limit")
    }

    /// `∂_θ f` and `∂_φ f / sin θ` at the nodes.
    pub fn angular_derivatives(&self) -> (Self, Self) {
        let spec = self.analyze();
        (
            Self::synth_kernel(&self.grid, &spec, RingKernel::DTheta).expect("grid band limit"),
            Self::synth_kernel(&self.grid, &spec, RingKernel::DPhiOverSin).expect("grid band limit"),
        )
    }

    /// Surface gradient as a Cartesian tangent field.
    pub fn gradient(&self) -> super::TangentField<T> {
        let (ft, fp) = self.angular_derivatives();
        let g = &self.grid;
        let mut comps = [vec![T::zero(); g.len()], vec![T::zero(); g.len()], vec![T::zero(); g.len()]];
        for i in 0..g.len() {
            let (et, ep) = (g.e_theta(i), g.e_phi(i));
            for c in 0..3 {
                comps[c][i] = ft.values[i] * et[c] + fp.values[i] * ep[c];
            }
        }
        super::TangentField::from_cartesian_unchecked(g, comps)
    }
}

impl<T: Real> Add for &SphereField<T> {
    type Output = SphereField<T>;
    fn add(self, rhs: Self) -> SphereField<T> {
        self.zip_map(rhs, |a, b| a + b)
    }
}
impl<T: Real> Sub for &SphereField<T> {
    type Output = SphereField<T>;
    fn sub(self, rhs: Self) -> SphereField<T> {
        self.zip_map(rhs, |a, b| a - b)
    }
}
impl<T: Real> Mul for &SphereField<T> {
    type Output = SphereField<T>;
    fn mul(self, rhs: Self) -> SphereField<T> {
        self.zip_map(rhs, |a, b| a * b)
    }
}
impl<T: Real> Neg for &SphereField<T> {
    type Output = SphereField<T>;
    fn neg(self) -> SphereField<T> {
        self.map(|a| -a)
    }
}
impl<T: Real> Add for SphereField<T> {
    type Output = SphereField<T>;
    fn add(self, rhs: Self) -> SphereField<T> {
        &self + &rhs
    }
}
impl<T: Real> Sub for SphereField<T> {
    type Output = SphereField<T>;
    fn sub(self, rhs: Self) -> SphereField<T> {
        &self - &rhs
    }
}
impl<T: Real> Mul for SphereField<T> {
    type Output = SphereField<T>;
    fn mul(self, rhs: Self) -> SphereField<T> {
        &self * &rhs
    }
}
impl<T: Real> Neg for SphereField<T> {
    type Output = SphereField<T>;
    fn neg(self) -> SphereField<T> {
        -&self
    }
}
