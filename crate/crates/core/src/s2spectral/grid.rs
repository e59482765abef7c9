use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Index of the real orthonormal harmonic `(l, m)` in a packed spectrum, `|m| <= l`.
#[inline]
pub fn harmonic_index(l: usize, m: i64) -> usize {
    debug_assert!(m.unsigned_abs() as usize <= l);
    ((l * l + l) as i64 + m) as usize
}

#[inline]
fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Gauss–Legendre (cos θ) by equispaced φ product grid on the unit sphere.
///
/// Samples are stored ring-major: node `j * n_phi + k` sits at `(theta[j], phi[k])`.
#[derive(Debug)]
pub struct SphereGrid<T: Real> {
    n_theta: usize,
    n_phi: usize,
    l_max: usize,
    theta: Vec<T>,
    cos_theta: Vec<T>,
    sin_theta: Vec<T>,
    gauss_weights: Vec<T>,
    phi: Vec<T>,
    dphi: T,
    // normalized associated Legendre functions and their θ derivatives, per ring
    plm: Vec<T>,
    dplm: Vec<T>,
    cos_mphi: Vec<T>,
    sin_mphi: Vec<T>,
    // per node: outward normal (= position), unit e_θ, unit e_φ
    normal: Vec<[T; 3]>,
    e_theta: Vec<[T; 3]>,
    e_phi: Vec<[T; 3]>,
}

impl<T: Real> SphereGrid<T> {
    /// Grid with `n_theta` Gauss nodes and `2 n_theta` longitudes; band limit `n_theta - 1`.
    pub fn new(n_theta: usize) -> Result<Arc<Self>> {
        Self::with_n_phi(n_theta, 2 * n_theta)
    }

    pub fn with_n_phi(n_theta: usize, n_phi: usize) -> Result<Arc<Self>> {
        if n_theta < 2 {
            return Err(Error::GridTooSmall { n_theta, requested: 1, max: 0 });
        }
        let l_max = n_theta - 1;
        if n_phi < 2 * l_max + 1 {
            return Err(Error::GridTooSmall { n_theta, requested: l_max, max: n_phi.saturating_sub(1) / 2 });
        }
        let (x, w) = gauss_legendre::<T>(n_theta);
        let theta: Vec<T> = x.iter().map(|&c| c.acos()).collect();
        let sin_theta: Vec<T> = x.iter().map(|&c| (T::one() - c * c).max(T::zero()).sqrt()).collect();
        let two_pi = T::PI() + T::PI();
        let dphi = two_pi / T::from_usize(n_phi).unwrap();
        let phi: Vec<T> = (0..n_phi).map(|k| dphi * T::from_usize(k).unwrap()).collect();

        let ntri = tri(l_max, l_max) + 1;
        let mut plm = vec![T::zero(); n_theta * ntri];
        let mut dplm = vec![T::zero(); n_theta * ntri];
        for j in 0..n_theta {
            let (p, dp) = legendre_ring(l_max, x[j], sin_theta[j]);
            plm[j * ntri..(j + 1) * ntri].copy_from_slice(&p);
            dplm[j * ntri..(j + 1) * ntri].copy_from_slice(&dp);
        }

        let mut cos_mphi = vec![T::zero(); (l_max + 1) * n_phi];
        let mut sin_mphi = vec![T::zero(); (l_max + 1) * n_phi];
        for m in 0..=l_max {
            for k in 0..n_phi {
                // reduce the angle exactly in integer arithmetic before scaling
                let a = dphi * T::from_usize((m * k) % n_phi).unwrap();
                cos_mphi[m * n_phi + k] = a.cos();
                sin_mphi[m * n_phi + k] = a.sin();
            }
        }

        let mut normal = Vec::with_capacity(n_theta * n_phi);
        let mut e_theta = Vec::with_capacity(n_theta * n_phi);
        let mut e_phi = Vec::with_capacity(n_theta * n_phi);
        for j in 0..n_theta {
            let (ct, st) = (x[j], sin_theta[j]);
            for k in 0..n_phi {
                let (cp, sp) = (cos_mphi[n_phi + k], sin_mphi[n_phi + k]);
                normal.push([st * cp, st * sp, ct]);
                e_theta.push([ct * cp, ct * sp, -st]);
                e_phi.push([-sp, cp, T::zero()]);
            }
        }

        Ok(Arc::new(Self {
            n_theta,
            n_phi,
            l_max,
            theta,
            cos_theta: x,
            sin_theta,
            gauss_weights: w,
            phi,
            dphi,
            plm,
            dplm,
            cos_mphi,
            sin_mphi,
            normal,
            e_theta,
            e_phi,
        }))
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }
    pub fn n_phi(&self) -> usize {
        self.n_phi
    }
    pub fn l_max(&self) -> usize {
        self.l_max
    }
    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn spectrum_len(&self) -> usize {
        (self.l_max + 1) * (self.l_max + 1)
    }

    /// `(θ, φ, weight)` of node `i`; weights include the sin θ area factor.
    pub fn node(&self, i: usize) -> (T, T, T) {
        let (j, k) = (i / self.n_phi, i % self.n_phi);
        (self.theta[j], self.phi[k], self.gauss_weights[j] * self.dphi)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (T, T, T)> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    #[inline]
    pub fn weight(&self, i: usize) -> T {
        self.gauss_weights[i / self.n_phi] * self.dphi
    }
    #[inline]
    pub fn sin_theta_at(&self, i: usize) -> T {
        self.sin_theta[i / self.n_phi]
    }
    #[inline]
    pub fn cos_theta_at(&self, i: usize) -> T {
        self.cos_theta[i / self.n_phi]
    }
    #[inline]
    pub fn normal(&self, i: usize) -> [T; 3] {
        self.normal[i]
    }
    #[inline]
    pub fn e_theta(&self, i: usize) -> [T; 3] {
        self.e_theta[i]
    }
    #[inline]
    pub fn e_phi(&self, i: usize) -> [T; 3] {
        self.e_phi[i]
    }

    pub(crate) fn ntri(&self) -> usize {
        tri(self.l_max, self.l_max) + 1
    }
    #[inline]
    pub(crate) fn p(&self, j: usize, l: usize, m: usize) -> T {
        self.plm[j * self.ntri() + tri(l, m)]
    }
    #[inline]
    pub(crate) fn dp(&self, j: usize, l: usize, m: usize) -> T {
        self.dplm[j * self.ntri() + tri(l, m)]
    }
    #[inline]
    pub(crate) fn cos_m(&self, m: usize) -> &[T] {
        &self.cos_mphi[m * self.n_phi..(m + 1) * self.n_phi]
    }
    #[inline]
    pub(crate) fn sin_m(&self, m: usize) -> &[T] {
        &self.sin_mphi[m * self.n_phi..(m + 1) * self.n_phi]
    }
    pub(crate) fn ring_weight(&self, j: usize) -> T {
        self.gauss_weights[j] * self.dphi
    }
    pub(crate) fn ring_sin(&self, j: usize) -> T {
        self.sin_theta[j]
    }
}

/// Gauss–Legendre nodes (ascending in cos θ is not guaranteed) and weights on [-1, 1].
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let nf = T::from_usize(n).unwrap();
    let half = T::lit(0.5);
    for i in 0..n.div_ceil(2) {
        let mut z = (T::PI() * (T::from_usize(i).unwrap() + T::lit(0.75)) / (nf + half)).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z = z - dz;
            if dz.abs() <= T::epsilon() * T::lit(4.0) {
                let (_, d) = legendre_with_derivative(n, z);
                dp = d;
                break;
            }
        }
        let wi = T::lit(2.0) / ((T::one() - z * z) * dp * dp);
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative<T: Real>(n: usize, z: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = z;
    if n == 0 {
        return (T::one(), T::zero());
    }
    for k in 2..=n {
        let kf = T::from_usize(k).unwrap();
        let p2 = ((kf + kf - T::one()) * z * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::from_usize(n).unwrap();
    let d = nf * (z * p1 - p0) / (z * z - T::one());
    (p1, d)
}

/// Orthonormal associated Legendre functions `P̄_l^m(cos θ)` (no Condon–Shortley phase)
/// and their θ derivatives for `0 <= m <= l <= l_max`, packed triangularly.
fn legendre_ring<T: Real>(l_max: usize, x: T, s: T) -> (Vec<T>, Vec<T>) {
    let n = tri(l_max, l_max) + 1;
    let mut p = vec![T::zero(); n];
    let mut dp = vec![T::zero(); n];
    let four_pi = T::lit(4.0) * T::PI();
    let f = |k: usize| T::from_usize(k).unwrap();
    p[tri(0, 0)] = (T::one() / four_pi).sqrt();
    for m in 1..=l_max {
        p[tri(m, m)] = ((f(2 * m + 1)) / f(2 * m)).sqrt() * s * p[tri(m - 1, m - 1)];
    }
    for m in 0..l_max {
        p[tri(m + 1, m)] = f(2 * m + 3).sqrt() * x * p[tri(m, m)];
    }
    for m in 0..=l_max {
        for l in (m + 2)..=l_max {
            let a = ((f(4 * l * l) - T::one()) / f(l * l - m * m)).sqrt();
            let b = ((f((l - 1) * (l - 1) - m * m)) / (f(4 * (l - 1) * (l - 1)) - T::one())).sqrt();
            p[tri(l, m)] = a * (x * p[tri(l - 1, m)] - b * p[tri(l - 2, m)]);
        }
    }
    for m in 0..=l_max {
        for l in m..=l_max {
            let lower = if l > m {
                (f((2 * l + 1) * (l * l - m * m)) / f(2 * l - 1)).sqrt() * p[tri(l - 1, m)]
            } else {
                T::zero()
            };
            dp[tri(l, m)] = (f(l) * x * p[tri(l, m)] - lower) / s;
        }
    }
    (p, dp)
}
