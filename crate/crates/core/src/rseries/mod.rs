//! Truncated formal series `Σ_k r^k f_k` with sphere-field coefficients.
//!
//! A series carries its truncation order `K`: coefficients of powers `>= -K` are exact,
//! everything below is an unknown `O(r^{-K-1})` remainder. Every operation propagates
//! `K` from its operands and drops coefficients it cannot vouch for.

mod vector;

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::s2spectral::{SphereField, SphereGrid};
use crate::scalar::Real;

pub use vector::{tensor_divergence, TensorSeries, VectorSeries};

#[derive(Debug, Clone)]
pub struct RadialSeries<T: Real> {
    grid: Arc<SphereGrid<T>>,
    terms: BTreeMap<i32, SphereField<T>>,
    trunc: i32,
}

impl<T: Real> RadialSeries<T> {
    pub fn zero(grid: &Arc<SphereGrid<T>>, trunc: i32) -> Self {
        Self { grid: grid.clone(), terms: BTreeMap::new(), trunc }
    }

    /// `f · r^power`, trusted through `r^{-trunc}`.
    pub fn monomial(f: SphereField<T>, power: i32, trunc: i32) -> Self {
        let mut s = Self::zero(f.grid(), trunc);
        if power >= -trunc {
            s.terms.insert(power, f);
        }
        s
    }

    pub fn constant(f: SphereField<T>, trunc: i32) -> Self {
        Self::monomial(f, 0, trunc)
    }

    pub fn from_terms(grid: &Arc<SphereGrid<T>>, terms: impl IntoIterator<Item = (i32, SphereField<T>)>, trunc: i32) -> Result<Self> {
        let mut s = Self::zero(grid, trunc);
        for (k, f) in terms {
            if !Arc::ptr_eq(f.grid(), grid) {
                return Err(Error::IncompatibleGrids);
            }
            if k < -trunc {
                continue;
            }
            match s.terms.get_mut(&k) {
                Some(acc) => acc.axpy(T::one(), &f),
                None => {
                    s.terms.insert(k, f);
                }
            }
        }
        Ok(s)
    }

    pub fn grid(&self) -> &Arc<SphereGrid<T>> {
        &self.grid
    }

    /// Truncation order `K`: the remainder is `O(r^{-K-1})`.
    pub fn trunc_order(&self) -> i32 {
        self.trunc
    }

    /// Lowest power whose coefficient is trusted.
    pub fn lowest_trusted_power(&self) -> i32 {
        -self.trunc
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &SphereField<T>)> {
        self.terms.iter().rev().map(|(k, f)| (*k, f))
    }

    pub fn powers(&self) -> Vec<i32> {
        self.terms.keys().rev().copied().collect()
    }

    /// Highest power with a coefficient that is not identically zero.
    pub fn top_power(&self) -> Option<i32> {
        self.terms
            .iter()
            .rev()
            .find(|(_, f)| f.values().iter().any(|v| *v != T::zero()))
            .map(|(k, _)| *k)
    }

    pub fn coeff(&self, power: i32) -> Option<&SphereField<T>> {
        self.terms.get(&power)
    }

    /// Coefficient of `r^power`, zero when absent; fails beyond the trusted order.
    pub fn trusted_coeff(&self, power: i32) -> Result<SphereField<T>> {
        if power < -self.trunc {
            return Err(Error::Untrusted { op: "coefficient", power, trusted: -self.trunc });
        }
        Ok(self.coeff_or_zero(power))
    }

    pub fn coeff_or_zero(&self, power: i32) -> SphereField<T> {
        self.terms.get(&power).cloned().unwrap_or_else(|| SphereField::zeros(&self.grid))
    }

    pub fn set_coeff(&mut self, power: i32, f: SphereField<T>) {
        assert!(power >= -self.trunc, "coefficient below truncation order");
        self.terms.insert(power, f);
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(Error::IncompatibleGrids)
        }
    }

    /// Lowers the trust to `r^{-trunc}` (never raises it).
    pub fn truncate(&self, trunc: i32) -> Self {
        let trunc = trunc.min(self.trunc);
        Self {
            grid: self.grid.clone(),
            terms: self.terms.iter().filter(|(k, _)| **k >= -trunc).map(|(k, f)| (*k, f.clone())).collect(),
            trunc,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_grid(other).expect("series on different grids");
        let trunc = self.trunc.min(other.trunc);
        let mut out = self.truncate(trunc);
        for (k, f) in other.terms.iter().filter(|(k, _)| **k >= -trunc) {
            match out.terms.get_mut(k) {
                Some(acc) => acc.axpy(T::one(), f),
                None => {
                    out.terms.insert(*k, f.clone());
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-T::one()))
    }

    pub fn scale(&self, s: T) -> Self {
        self.map_coeffs(|f| f.scale(s))
    }

    /// Applies an r-independent linear map to every coefficient.
    /// Removes the coefficients of powers above `power`, which must be at most `tol` in sup norm.
    pub fn drop_above(&self, power: i32, tol: T) -> Result<Self> {
        if let Some((k, _)) = self.terms.iter().find(|(k, f)| **k > power && f.max_abs() > tol) {
            return Err(Error::BadLeadingPower { op: "drop_above", power: *k });
        }
        Ok(Self { grid: self.grid.clone(), terms: self.terms.iter().filter(|(k, _)| **k <= power).map(|(k, f)| (*k, f.clone())).collect(), trunc: self.trunc })
    }

    pub fn map_coeffs(&self, f: impl Fn(&SphereField<T>) -> SphereField<T>) -> Self {
        Self { grid: self.grid.clone(), terms: self.terms.iter().map(|(k, c)| (*k, f(c))).collect(), trunc: self.trunc }
    }

    /// Multiplication by an r-independent field.
    pub fn mul_field(&self, f: &SphereField<T>) -> Self {
        self.map_coeffs(|c| c * f)
    }

    /// Multiplication by `r^p`.
    pub fn shift(&self, p: i32) -> Self {
        Self {
            grid: self.grid.clone(),
            terms: self.terms.iter().map(|(k, c)| (*k + p, c.clone())).collect(),
            trunc: self.trunc - p,
        }
    }

    /// Cauchy product with pointwise coefficient products (no spectral truncation).
    pub fn mul(&self, other: &Self) -> Self {
        self.check_grid(other).expect("series on different grids");
        let trunc = match (self.top_power(), other.top_power()) {
            (Some(pa), Some(pb)) => (self.trunc - pb).min(other.trunc - pa),
            (Some(pa), None) => other.trunc - pa,
            (None, Some(pb)) => self.trunc - pb,
            (None, None) => self.trunc.max(other.trunc),
        };
        let n = self.grid.len();
        let mut acc: BTreeMap<i32, Vec<T>> = BTreeMap::new();
        for (ka, fa) in &self.terms {
            for (kb, fb) in &other.terms {
                let k = ka + kb;
                if k < -trunc {
                    continue;
                }
                let slot = acc.entry(k).or_insert_with(|| vec![T::zero(); n]);
                for ((s, a), b) in slot.iter_mut().zip(fa.values()).zip(fb.values()) {
                    *s = *s + *a * *b;
                }
            }
        }
        Self {
            grid: self.grid.clone(),
            terms: acc.into_iter().map(|(k, v)| (k, SphereField::raw(&self.grid, v))).collect(),
            trunc,
        }
    }

    /// Projects every coefficient onto the grid band limit.
    pub fn bandlimit(&self) -> Self {
        self.map_coeffs(|f| f.bandlimit())
    }

    /// Splits `a = r^p (a_0 + a_1 r^{-1} + ...)` into `p` and the relative coefficients
    /// `a_0 .. a_M` with `M = p + K`.
    fn relative_coeffs(&self, op: &'static str) -> Result<(i32, Vec<SphereField<T>>)> {
        let p = self.top_power().ok_or(Error::DegenerateLeading { op, node: 0, value: 0.0 })?;
        let m = p + self.trunc;
        if m < 0 {
            return Err(Error::Untrusted { op, power: p, trusted: -self.trunc });
        }
        Ok((p, (0..=m).map(|n| self.coeff_or_zero(p - n)).collect()))
    }

    /// `1 / a` by recursion on the relative coefficients.
    pub fn recip(&self) -> Result<Self> {
        let (p, a) = self.relative_coeffs("series_recip")?;
        let n = self.grid.len();
        let lead = a[0].values();
        if let Some(node) = degenerate_node(lead, false) {
            return Err(Error::DegenerateLeading { op: "series_recip", node, value: lead[node].to_f64_lossy() });
        }
        let mut b: Vec<Vec<T>> = Vec::with_capacity(a.len());
        b.push(lead.iter().map(|v| T::one() / *v).collect());
        for k in 1..a.len() {
            let mut next = vec![T::zero(); n];
            for j in 1..=k {
                let (aj, bk) = (a[j].values(), &b[k - j]);
                for i in 0..n {
                    next[i] = next[i] + aj[i] * bk[i];
                }
            }
            for i in 0..n {
                next[i] = -next[i] * b[0][i];
            }
            b.push(next);
        }
        let trunc = self.trunc + 2 * p;
        Ok(Self {
            grid: self.grid.clone(),
            terms: b.into_iter().enumerate().map(|(k, v)| (-p - k as i32, SphereField::raw(&self.grid, v))).collect(),
            trunc,
        })
    }

    /// `√a` for a series with even leading power and positive leading coefficient.
    pub fn sqrt(&self) -> Result<Self> {
        let (p, a) = self.relative_coeffs("series_sqrt")?;
        if p % 2 != 0 {
            return Err(Error::BadLeadingPower { op: "series_sqrt", power: p });
        }
        let n = self.grid.len();
        let lead = a[0].values();
        if let Some(node) = degenerate_node(lead, true) {
            return Err(Error::DegenerateLeading { op: "series_sqrt", node, value: lead[node].to_f64_lossy() });
        }
        let two = T::lit(2.0);
        let mut s: Vec<Vec<T>> = Vec::with_capacity(a.len());
        s.push(lead.iter().map(|v| v.sqrt()).collect());
        for k in 1..a.len() {
            let mut next = a[k].values().to_vec();
            for j in 1..k {
                for i in 0..n {
                    next[i] = next[i] - s[j][i] * s[k - j][i];
                }
            }
            for i in 0..n {
                next[i] = next[i] / (two * s[0][i]);
            }
            s.push(next);
        }
        let half = p / 2;
        Ok(Self {
            grid: self.grid.clone(),
            terms: s.into_iter().enumerate().map(|(k, v)| (half - k as i32, SphereField::raw(&self.grid, v))).collect(),
            trunc: self.trunc + half,
        })
    }

    /// `asinh(z)` for a series that decays (`top power < 0`), by its Taylor series.
    pub fn asinh(&self) -> Result<Self> {
        let Some(p) = self.top_power() else {
            return Ok(self.clone());
        };
        if p >= 0 {
            return Err(Error::BadLeadingPower { op: "series_asinh", power: p });
        }
        let z2 = self.mul(self);
        let mut out = self.clone();
        let mut power = self.clone();
        let mut n: i32 = 1;
        // c_n = (-1)^n (2n)! / (4^n (n!)^2 (2n+1))
        let mut c = T::one();
        while (2 * n + 1) * p >= -self.trunc {
            let nf = T::int(n as i64);
            c = -c * (T::lit(2.0) * nf - T::one()) / (T::lit(2.0) * nf);
            power = power.mul(&z2);
            let coef = c / (T::lit(2.0) * nf + T::one());
            out = out.add(&power.scale(coef));
            n += 1;
        }
        Ok(out.truncate(self.trunc))
    }

    /// `∂/∂r`, term by term.
    pub fn deriv_r(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| **k != 0)
                .map(|(k, f)| (k - 1, f.scale(T::int(*k as i64))))
                .collect(),
            trunc: self.trunc + 1,
        }
    }

    /// `Σ_k r^k f_k` at a finite radius.
    pub fn eval(&self, r: T) -> SphereField<T> {
        let mut out = SphereField::zeros(&self.grid);
        // smallest terms first
        for (k, f) in &self.terms {
            out.axpy(r.powi(*k), f);
        }
        out
    }

    pub fn max_abs_coeff(&self) -> T {
        self.terms.values().fold(T::zero(), |m, f| m.max(f.max_abs()))
    }
}

/// First node where a leading coefficient vanishes relative to its peak (or is negative
/// when `positive` is required).
fn degenerate_node<T: Real>(lead: &[T], positive: bool) -> Option<usize> {
    let peak = lead.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let floor = peak * T::lit(1e-12);
    lead.iter().position(|v| !v.is_finite() || v.abs() <= floor || (positive && *v < T::zero()))
}

/// Cauchy product followed by spectral truncation of every coefficient.
pub fn series_mul<T: Real>(a: &RadialSeries<T>, b: &RadialSeries<T>) -> Result<RadialSeries<T>> {
    a.check_grid(b)?;
    Ok(a.mul(b).bandlimit())
}

pub fn series_sqrt<T: Real>(a: &RadialSeries<T>) -> Result<RadialSeries<T>> {
    a.sqrt()
}

pub fn series_recip<T: Real>(a: &RadialSeries<T>) -> Result<RadialSeries<T>> {
    a.recip()
}

pub fn series_eval<T: Real>(a: &RadialSeries<T>, r: T) -> SphereField<T> {
    a.eval(r)
}

#[cfg(test)]
mod tests;
