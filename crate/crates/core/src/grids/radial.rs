use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{from_usize, lit, Real};

/// Node placement policy of a radial grid.
///
/// Every policy stores nodes in `u = r²` but clusters them in its own
/// coordinate, where interpolation also takes place.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clustering {
    /// Chebyshev points in `u`.
    ChebyshevU,
    /// Chebyshev points in `r = √u`.
    ChebyshevR,
    /// Chebyshev points in the colatitude `θ = 2 atan √u`.
    ChebyshevTheta,
    /// Uniform points in `u`, piecewise-cubic interpolation.
    UniformU,
}

impl Clustering {
    pub fn coord<T: Real>(self, u: T) -> T {
        match self {
            Clustering::ChebyshevU | Clustering::UniformU => u,
            Clustering::ChebyshevR => u.sqrt(),
            Clustering::ChebyshevTheta => {
                if u.is_infinite() {
                    T::PI()
                } else {
                    lit::<T>(2.0) * u.sqrt().atan()
                }
            }
        }
    }

    pub fn u_of<T: Real>(self, x: T) -> T {
        match self {
            Clustering::ChebyshevU | Clustering::UniformU => x,
            Clustering::ChebyshevR => x * x,
            Clustering::ChebyshevTheta => {
                if x >= T::PI() {
                    T::infinity()
                } else {
                    let t = (x * lit(0.5)).tan();
                    t * t
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Clustering::ChebyshevU => "chebyshev-u",
            Clustering::ChebyshevR => "chebyshev-r",
            Clustering::ChebyshevTheta => "chebyshev-theta",
            Clustering::UniformU => "uniform-u",
        }
    }
}

/// Sparse interpolation stencil: `value = Σ coeffs[i] * samples[start + i]`.
#[derive(Debug, Clone, Default)]
pub struct Stencil<T> {
    pub start: usize,
    pub coeffs: Vec<T>,
}

impl<T: Real> Stencil<T> {
    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn apply(&self, samples: &[T]) -> T {
        self.coeffs
            .iter()
            .zip(&samples[self.start..])
            .fold(T::zero(), |acc, (c, v)| acc + *c * *v)
    }

    /// Applies the stencil to rows of a row-major `rows × width` table.
    pub fn apply_rows(&self, table: &[T], width: usize, out: &mut [T]) {
        out.iter_mut().for_each(|o| *o = T::zero());
        for (i, c) in self.coeffs.iter().enumerate() {
            let row = &table[(self.start + i) * width..(self.start + i + 1) * width];
            for (o, v) in out.iter_mut().zip(row) {
                *o = *o + *c * *v;
            }
        }
    }
}

/// Strictly increasing radial nodes inside `(u_lo, u_hi)`.
#[derive(Debug, Clone)]
pub struct RadialGrid<T> {
    clustering: Clustering,
    lo: T,
    hi: T,
    coords: Vec<T>,
    u: Vec<T>,
    bary: Vec<T>,
}

impl<T: Real> RadialGrid<T> {
    /// Builds `count` nodes on `(u_lo, u_hi)`; `u_hi = ∞` needs theta clustering.
    pub fn new(clustering: Clustering, u_lo: T, u_hi: T, count: usize) -> Result<Self> {
        if count < 8 {
            return Err(Error::domain(format!(
                "radial grid needs at least 8 nodes, got {count}"
            )));
        }
        if !(u_lo >= T::zero()) || !(u_hi > u_lo) {
            return Err(Error::domain(format!(
                "invalid radial range ({u_lo}, {u_hi})"
            )));
        }
        if u_hi.is_infinite() && clustering != Clustering::ChebyshevTheta {
            return Err(Error::domain(
                "an unbounded radial range needs theta clustering",
            ));
        }
        let lo = clustering.coord(u_lo);
        let hi = clustering.coord(u_hi);
        let mid = (lo + hi) * lit(0.5);
        let half = (hi - lo) * lit(0.5);
        let nf = from_usize::<T>(count);
        let mut coords = Vec::with_capacity(count);
        let mut bary = Vec::with_capacity(count);
        for i in 0..count {
            match clustering {
                Clustering::UniformU => {
                    coords.push(lo + (hi - lo) * (from_usize::<T>(i) + lit(0.5)) / nf);
                    bary.push(T::zero());
                }
                _ => {
                    // First-kind points, listed in increasing order.
                    let k = count - 1 - i;
                    let ang = T::PI() * (from_usize::<T>(2 * k + 1)) / (lit::<T>(2.0) * nf);
                    coords.push(mid + half * ang.cos());
                    let sign = if k.is_multiple_of(2) {
                        T::one()
                    } else {
                        -T::one()
                    };
                    bary.push(sign * ang.sin());
                }
            }
        }
        let u = coords.iter().map(|&x| clustering.u_of(x)).collect();
        Ok(Self {
            clustering,
            lo,
            hi,
            coords,
            u,
            bary,
        })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn clustering(&self) -> Clustering {
        self.clustering
    }

    pub fn nodes_u(&self) -> &[T] {
        &self.u
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// `(u_lo, u_hi)` of the covered range; `u_hi` may be infinite.
    pub fn u_range(&self) -> (T, T) {
        (self.clustering.u_of(self.lo), self.clustering.u_of(self.hi))
    }

    /// Largest gap between neighbouring nodes, in the grid coordinate.
    pub fn max_spacing(&self) -> T {
        let mut gap = (self.coords[0] - self.lo).max(self.hi - self.coords[self.len() - 1]);
        for w in self.coords.windows(2) {
            gap = gap.max(w[1] - w[0]);
        }
        gap
    }

    /// Interpolation stencil at `u`; empty outside the covered range.
    pub fn stencil(&self, u: T) -> Stencil<T> {
        let x = self.clustering.coord(u);
        if !(x >= self.lo && x <= self.hi) {
            return Stencil::default();
        }
        match self.clustering {
            Clustering::UniformU => self.cubic_stencil(x),
            _ => self.bary_stencil(x),
        }
    }

    fn bary_stencil(&self, x: T) -> Stencil<T> {
        let n = self.len();
        if let Some(i) = self.coords.iter().position(|&c| c == x) {
            let mut coeffs = vec![T::zero(); n];
            coeffs[i] = T::one();
            return Stencil { start: 0, coeffs };
        }
        let mut coeffs: Vec<T> = self
            .coords
            .iter()
            .zip(&self.bary)
            .map(|(&c, &w)| w / (x - c))
            .collect();
        let total: T = coeffs.iter().copied().sum();
        coeffs.iter_mut().for_each(|c| *c = *c / total);
        Stencil { start: 0, coeffs }
    }

    fn cubic_stencil(&self, x: T) -> Stencil<T> {
        let n = self.len();
        let h = self.coords[1] - self.coords[0];
        let pos = ((x - self.coords[0]) / h).floor();
        let i = if pos < T::zero() {
            0
        } else {
            pos.to_usize().unwrap_or(0)
        };
        let start = i.saturating_sub(1).min(n - 4);
        let mut coeffs = Vec::with_capacity(4);
        for a in start..start + 4 {
            let mut c = T::one();
            for b in start..start + 4 {
                if a != b {
                    c = c * (x - self.coords[b]) / (self.coords[a] - self.coords[b]);
                }
            }
            coeffs.push(c);
        }
        Stencil { start, coeffs }
    }

    /// Interpolates samples given at the nodes.
    pub fn interpolate(&self, samples: &[T], u: T) -> T {
        let st = self.stencil(u);
        if st.is_empty() {
            T::zero()
        } else {
            st.apply(samples)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn nodes_are_interior_and_increasing() {
        for cl in [
            Clustering::ChebyshevU,
            Clustering::ChebyshevR,
            Clustering::ChebyshevTheta,
            Clustering::UniformU,
        ] {
            let g = RadialGrid::new(cl, 0.0f64, 4.0, 12).unwrap();
            let u = g.nodes_u();
            assert!(u[0] > 0.0 && u[11] < 4.0);
            assert!(u.windows(2).all(|w| w[1] > w[0]), "{cl:?}");
        }
        let g = RadialGrid::new(Clustering::ChebyshevTheta, 0.0f64, f64::INFINITY, 10).unwrap();
        assert!(g.nodes_u()[9].is_finite());
    }

    #[test]
    fn rejects_small_or_unbounded() {
        assert!(RadialGrid::new(Clustering::ChebyshevU, 0.0f64, 1.0, 7).is_err());
        assert!(RadialGrid::new(Clustering::ChebyshevR, 0.0f64, f64::INFINITY, 16).is_err());
    }

    #[test]
    fn chebyshev_interpolation_is_spectral() {
        let g = RadialGrid::new(Clustering::ChebyshevR, 0.0f64, 25.0, 40).unwrap();
        let f = |u: f64| (-u).exp() * (1.0 + u.sqrt());
        let s: Vec<f64> = g.nodes_u().iter().map(|&u| f(u)).collect();
        for &u in &[0.0, 0.013, 0.7, 3.3, 12.0, 25.0] {
            assert!((g.interpolate(&s, u) - f(u)).abs() < 1e-11, "u = {u}");
        }
        assert_eq!(g.interpolate(&s, 26.0), 0.0);
    }

    #[test]
    fn theta_grid_reaches_pole() {
        let g = RadialGrid::new(Clustering::ChebyshevTheta, 0.0f64, f64::INFINITY, 24).unwrap();
        // cos θ as a function of u
        let f = |u: f64| {
            if u.is_infinite() {
                -1.0
            } else {
                (1.0 - u) / (1.0 + u)
            }
        };
        let s: Vec<f64> = g.nodes_u().iter().map(|&u| f(u)).collect();
        assert_relative_eq!(g.interpolate(&s, f64::INFINITY), -1.0, epsilon = 1e-12);
        assert_relative_eq!(g.interpolate(&s, 2.0), f(2.0), epsilon = 1e-12);
    }

    #[test]
    fn cubic_reproduces_cubics() {
        let g = RadialGrid::new(Clustering::UniformU, 1.0f64, 3.0, 16).unwrap();
        let f = |u: f64| 2.0 - u + 0.5 * u * u * u;
        let s: Vec<f64> = g.nodes_u().iter().map(|&u| f(u)).collect();
        for &u in &[1.0, 1.01, 2.2, 2.99, 3.0] {
            assert_relative_eq!(g.interpolate(&s, u), f(u), epsilon = 1e-11);
        }
    }
}
