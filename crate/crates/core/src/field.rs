//! Functions of `(u, ξ′)` that the operators integrate.
//!
//! Sphere and plane data share the stereographic representation, so the
//! projection P acts as the identity here; multipliers are layered on top
//! with [`Weighted`] and cap restrictions with [`ZeroExtend`].

use std::sync::Arc;

use crate::geometry::Multiplier;
use crate::grids::{AngularGrid, Decay, Density};
use crate::real::Real;

pub trait PolarField<T: Real>: Sync {
    /// Dimension of ℝⁿ (or of Sⁿ).
    fn n(&self) -> usize;

    fn is_zonal(&self) -> bool;

    /// Value at `(u, ξ′)`.
    fn value(&self, u: T, dir: &[T]) -> T;

    /// Value of a zonal field; direction-free.
    fn zonal_value(&self, u: T) -> T {
        let mut d = vec![T::zero(); self.n()];
        d[0] = T::one();
        self.value(u, &d)
    }

    /// Samples at the nodes of `g` on the sphere of radius² `u`.
    fn column(&self, u: T, g: &AngularGrid<T>, out: &mut [T]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.value(u, g.dir(i));
        }
    }

    /// Harmonic coefficients at `u` with respect to `g`.
    fn coeffs(&self, u: T, g: &AngularGrid<T>, out: &mut [T]) {
        let mut col = vec![T::zero(); g.len()];
        self.column(u, g, &mut col);
        g.analyze(&col, out);
    }

    /// Tail behaviour towards u = ∞.
    fn decay(&self) -> Decay<T>;

    /// Exponent p with field ~ u^p as u → 0 (0 for regular fields).
    fn origin_power(&self) -> T {
        T::zero()
    }

    /// `(lo, hi)` in u outside of which the field vanishes; `hi` may be ∞.
    fn support(&self) -> (T, T);

    /// Angular grid the field is natively sampled on, if any.
    fn angular_grid(&self) -> Option<Arc<AngularGrid<T>>> {
        None
    }
}

fn same_grid<T>(a: &AngularGrid<T>, b: &AngularGrid<T>) -> bool {
    std::ptr::eq(a, b)
}

impl<T: Real> PolarField<T> for Density<T> {
    fn n(&self) -> usize {
        Density::n(self)
    }

    fn is_zonal(&self) -> bool {
        Density::is_zonal(self)
    }

    fn value(&self, u: T, dir: &[T]) -> T {
        Density::value(self, u, dir)
    }

    fn zonal_value(&self, u: T) -> T {
        self.zonal_at(u)
    }

    fn column(&self, u: T, g: &AngularGrid<T>, out: &mut [T]) {
        match self.angular() {
            Some(own) if same_grid(own, g) => self.column_at(u, out),
            _ if self.is_zonal() => {
                let v = self.zonal_at(u);
                out.iter_mut().for_each(|o| *o = v);
            }
            _ => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = Density::value(self, u, g.dir(i));
                }
            }
        }
    }

    fn coeffs(&self, u: T, g: &AngularGrid<T>, out: &mut [T]) {
        match self.angular() {
            Some(own) if same_grid(own, g) && !self.is_zonal() => self.coeffs_at(u, out),
            _ => {
                let mut col = vec![T::zero(); g.len()];
                PolarField::column(self, u, g, &mut col);
                g.analyze(&col, out);
            }
        }
    }

    fn decay(&self) -> Decay<T> {
        Density::decay(self)
    }

    fn support(&self) -> (T, T) {
        let (lo, hi) = self.radial().u_range();
        match Density::decay(self) {
            Decay::Compact { lo: a, hi: b } => (lo.max(a), hi.min(b)),
            _ => (lo, hi),
        }
    }

    fn angular_grid(&self) -> Option<Arc<AngularGrid<T>>> {
        self.angular().cloned()
    }
}

/// `scale · Π m(u) · inner`.
pub struct Weighted<'a, T: Real, F: ?Sized = dyn PolarField<T>> {
    inner: &'a F,
    mults: Vec<Multiplier<T>>,
    scale: T,
}

impl<'a, T: Real, F: PolarField<T> + ?Sized> Weighted<'a, T, F> {
    pub fn new(inner: &'a F, mults: Vec<Multiplier<T>>, scale: T) -> Self {
        Self {
            inner,
            mults,
            scale,
        }
    }

    fn factor(&self, u: T) -> T {
        self.mults
            .iter()
            .fold(self.scale, |acc, m| acc * m.eval_u(u))
    }
}

impl<T: Real, F: PolarField<T> + ?Sized> PolarField<T> for Weighted<'_, T, F> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn is_zonal(&self) -> bool {
        self.inner.is_zonal()
    }

    fn value(&self, u: T, dir: &[T]) -> T {
        self.factor(u) * self.inner.value(u, dir)
    }

    fn zonal_value(&self, u: T) -> T {
        self.factor(u) * self.inner.zonal_value(u)
    }

    fn column(&self, u: T, g: &AngularGrid<T>, out: &mut [T]) {
        self.inner.column(u, g, out);
        let f = self.factor(u);
        out.iter_mut().for_each(|o| *o = *o * f);
    }

    fn coeffs(&self, u: T, g: &AngularGrid<T>, out: &mut [T]) {
        self.inner.coeffs(u, g, out);
        let f = self.factor(u);
        out.iter_mut().for_each(|o| *o = *o * f);
    }

    fn decay(&self) -> Decay<T> {
        match self.inner.decay() {
            Decay::Polynomial { power } => Decay::Polynomial {
                power: self.mults.iter().fold(power, |p, m| p + m.tail_power()),
            },
            other => other,
        }
    }

    fn origin_power(&self) -> T {
        self.mults
            .iter()
            .fold(self.inner.origin_power(), |p, m| p + m.origin_power())
    }

    fn support(&self) -> (T, T) {
        self.inner.support()
    }

    fn angular_grid(&self) -> Option<Arc<AngularGrid<T>>> {
        self.inner.angular_grid()
    }
}

/// Restriction of a field to `lo < u < hi`, extended by zero.
pub struct ZeroExtend<'a, T: Real, F: ?Sized = dyn PolarField<T>> {
    inner: &'a F,
    lo: T,
    hi: T,
}

impl<'a, T: Real, F: PolarField<T> + ?Sized> ZeroExtend<'a, T, F> {
    pub fn new(inner: &'a F, lo: T, hi: T) -> Self {
        let (a, b) = inner.support();
        Self {
            inner,
            lo: lo.max(a),
            hi: hi.min(b),
        }
    }

    fn inside(&self, u: T) -> bool {
        u > self.lo && u < self.hi
    }
}

impl<T: Real, F: PolarField<T> + ?Sized> PolarField<T> for ZeroExtend<'_, T, F> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn is_zonal(&self) -> bool {
        self.inner.is_zonal()
    }

    fn value(&self, u: T, dir: &[T]) -> T {
        if self.inside(u) {
            self.inner.value(u, dir)
        } else {
            T::zero()
        }
    }

    fn zonal_value(&self, u: T) -> T {
        if self.inside(u) {
            self.inner.zonal_value(u)
        } else {
            T::zero()
        }
    }

    fn column(&self, u: T, g: &AngularGrid<T>, out: &mut [T]) {
        if self.inside(u) {
            self.inner.column(u, g, out)
        } else {
            out.iter_mut().for_each(|o| *o = T::zero());
        }
    }

    fn coeffs(&self, u: T, g: &AngularGrid<T>, out: &mut [T]) {
        if self.inside(u) {
            self.inner.coeffs(u, g, out)
        } else {
            out.iter_mut().for_each(|o| *o = T::zero());
        }
    }

    fn decay(&self) -> Decay<T> {
        if self.hi.is_finite() {
            Decay::Compact {
                lo: self.lo,
                hi: self.hi,
            }
        } else {
            self.inner.decay()
        }
    }

    fn origin_power(&self) -> T {
        if self.lo > T::zero() {
            T::zero()
        } else {
            self.inner.origin_power()
        }
    }

    fn support(&self) -> (T, T) {
        (self.lo, self.hi)
    }

    fn angular_grid(&self) -> Option<Arc<AngularGrid<T>>> {
        self.inner.angular_grid()
    }
}

/// Field given by a closure of `(u, ξ′)`.
pub struct FnField<T, F> {
    n: usize,
    f: F,
    zonal: bool,
    decay: Decay<T>,
    origin_power: T,
    support: (T, T),
}

impl<T: Real, F: Fn(T, &[T]) -> T + Sync> FnField<T, F> {
    pub fn new(n: usize, decay: Decay<T>, f: F) -> Self {
        let support = match decay {
            Decay::Compact { lo, hi } => (lo, hi),
            _ => (T::zero(), T::infinity()),
        };
        Self {
            n,
            f,
            zonal: false,
            decay,
            origin_power: T::zero(),
            support,
        }
    }

    /// Marks the closure as independent of the direction.
    pub fn zonal(mut self) -> Self {
        self.zonal = true;
        self
    }

    pub fn with_origin_power(mut self, p: T) -> Self {
        self.origin_power = p;
        self
    }
}

impl<T: Real, F: Fn(T, &[T]) -> T + Sync> PolarField<T> for FnField<T, F> {
    fn n(&self) -> usize {
        self.n
    }

    fn is_zonal(&self) -> bool {
        self.zonal
    }

    fn value(&self, u: T, dir: &[T]) -> T {
        if u < self.support.0 || u > self.support.1 {
            return T::zero();
        }
        (self.f)(u, dir)
    }

    fn decay(&self) -> Decay<T> {
        self.decay
    }

    fn origin_power(&self) -> T {
        self.origin_power
    }

    fn support(&self) -> (T, T) {
        self.support
    }
}

/// Zonal closure field `f(u)`.
pub fn zonal_fn<T: Real, G: Fn(T) -> T + Sync>(
    n: usize,
    decay: Decay<T>,
    g: G,
) -> FnField<T, impl Fn(T, &[T]) -> T + Sync> {
    FnField::new(n, decay, move |u: T, _: &[T]| g(u)).zonal()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids::PolarGrid;
    use approx::assert_relative_eq;

    #[test]
    fn weighted_tracks_powers_and_values() {
        let base = zonal_fn(2, Decay::Polynomial { power: 0.0f64 }, |u| 1.0 + u);
        let w = Weighted::new(&base, vec![Multiplier::T(2.0), Multiplier::Q(-1.0)], 3.0);
        assert_relative_eq!(
            w.zonal_value(1.0),
            3.0 * 1.0 * 1.0 * 2.0,
            max_relative = 1e-14
        );
        assert_eq!(w.decay(), Decay::Polynomial { power: 3.0 });
        assert_relative_eq!(w.origin_power(), -0.5);
    }

    #[test]
    fn zero_extension_cuts_support() {
        let base = zonal_fn(2, Decay::Polynomial { power: 0.0f64 }, |_| 2.0);
        let z = ZeroExtend::new(&base, 0.0, 1.0);
        assert_eq!(z.zonal_value(0.5), 2.0);
        assert_eq!(z.zonal_value(1.5), 0.0);
        assert_eq!(z.decay(), Decay::Compact { lo: 0.0, hi: 1.0 });
    }

    #[test]
    fn density_coeffs_match_closure_coeffs() {
        let g = PolarGrid::<f64>::sphere(2, 20, 6).unwrap();
        let f = |u: f64, x: &[f64]| (1.0 + u).recip() * (1.0 + x[0] + x[1] * x[0]);
        let d = Density::sample_polar(&g, Decay::Polynomial { power: 0.0 }, f).unwrap();
        let c = FnField::new(2, Decay::Polynomial { power: 0.0 }, f);
        let mut a = vec![0.0; g.angular.modes()];
        let mut b = a.clone();
        PolarField::coeffs(&d, 0.77, &g.angular, &mut a);
        c.coeffs(0.77, &g.angular, &mut b);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-8);
        }
    }
}
