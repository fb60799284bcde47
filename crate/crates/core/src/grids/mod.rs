//! Sampled densities on spherical segments, ball layers and half-lines.

mod angular;
pub mod io;
mod radial;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use angular::AngularGrid;
pub use radial::{Clustering, RadialGrid, Stencil};

use crate::error::{Error, Result};
use crate::geometry::{u_to_height, PlanePoint, SpherePoint, WeightSpec};
use crate::real::{from_usize, lit, Real};
use crate::special::sphere_area;

/// Behaviour of a density towards the far end of its radial range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Decay<T> {
    /// Bounded by a multiple of `exp(-rate * u)`.
    Gaussian { rate: T },
    /// Bounded by a multiple of `|ξ|^{-power}`.
    Polynomial { power: T },
    /// Vanishes outside `lo < u < hi`.
    Compact { lo: T, hi: T },
}

/// Where the radial variable lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Surface {
    /// Sⁿ in stereographic coordinates u = tan²(θ/2).
    Sphere,
    /// ℝⁿ in polar coordinates u = |ξ|².
    Plane,
    /// A function of r ≥ 0 alone.
    HalfLine,
}

/// Tensor grid: radial nodes times an angular quadrature.
#[derive(Debug, Clone)]
pub struct PolarGrid<T> {
    pub surface: Surface,
    pub radial: RadialGrid<T>,
    pub angular: Arc<AngularGrid<T>>,
}

pub type SphereGrid<T> = PolarGrid<T>;

impl<T: Real> PolarGrid<T> {
    pub fn new(
        surface: Surface,
        radial: RadialGrid<T>,
        angular: Arc<AngularGrid<T>>,
    ) -> Result<Self> {
        if surface == Surface::HalfLine {
            return Err(Error::domain("polar grids live on the sphere or the plane"));
        }
        Ok(Self {
            surface,
            radial,
            angular,
        })
    }

    /// Whole sphere, theta-clustered.
    pub fn sphere(n: usize, radial_nodes: usize, jmax: usize) -> Result<Self> {
        let radial = RadialGrid::new(
            Clustering::ChebyshevTheta,
            T::zero(),
            T::infinity(),
            radial_nodes,
        )?;
        Self::new(
            Surface::Sphere,
            radial,
            Arc::new(AngularGrid::for_degree(n, jmax)?),
        )
    }

    pub fn n(&self) -> usize {
        self.angular.n()
    }

    pub fn len(&self) -> usize {
        self.radial.len() * self.angular.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One Fourier–Laplace coefficient sampled at the radial nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeProfile<T> {
    pub j: usize,
    pub k: usize,
    pub radial_values: Vec<T>,
}

/// Immutable samples of a scalar function.
///
/// Values are stored radial-major: `values[i * m + a]` belongs to radial
/// node `i` and angular node `a`. Zonal densities may omit the angular grid
/// and keep one value per radial node.
#[derive(Debug, Clone)]
pub struct Density<T> {
    surface: Surface,
    n: usize,
    radial: RadialGrid<T>,
    angular: Option<Arc<AngularGrid<T>>>,
    values: Vec<T>,
    decay: Decay<T>,
    zonal: bool,
    modes: Vec<T>,
}

impl<T: Real> Density<T> {
    /// Wraps raw samples, validating shape and finiteness.
    pub fn from_values(
        surface: Surface,
        n: usize,
        radial: RadialGrid<T>,
        angular: Option<Arc<AngularGrid<T>>>,
        values: Vec<T>,
        decay: Decay<T>,
    ) -> Result<Self> {
        if n < 2 && surface != Surface::HalfLine {
            return Err(Error::domain("dimension must be at least 2"));
        }
        if let Some(a) = &angular {
            if surface == Surface::HalfLine {
                return Err(Error::input("half-line densities carry no angular grid"));
            }
            if a.n() != n {
                return Err(Error::input(format!(
                    "angular grid is for n = {}, density for n = {n}",
                    a.n()
                )));
            }
        }
        let width = angular.as_ref().map_or(1, |a| a.len());
        if values.len() != radial.len() * width {
            return Err(Error::input(format!(
                "expected {} samples, got {}",
                radial.len() * width,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!("non-finite sample at index {bad}")));
        }
        let zonal = match &angular {
            None => true,
            Some(_) => values
                .chunks(width)
                .all(|row| row.iter().all(|v| *v == row[0])),
        };
        let modes = match &angular {
            Some(a) if !zonal => {
                let k = a.modes();
                let mut modes = vec![T::zero(); radial.len() * k];
                for (row, out) in values.chunks(width).zip(modes.chunks_mut(k)) {
                    a.analyze(row, out);
                }
                modes
            }
            _ => Vec::new(),
        };
        Ok(Self {
            surface,
            n,
            radial,
            angular,
            values,
            decay,
            zonal,
            modes,
        })
    }

    /// Samples `f(u, ξ′)` at every node of a polar grid.
    pub fn sample_polar<F: Fn(T, &[T]) -> T>(
        grid: &PolarGrid<T>,
        decay: Decay<T>,
        f: F,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for &u in grid.radial.nodes_u() {
            for a in 0..grid.angular.len() {
                values.push(f(u, grid.angular.dir(a)));
            }
        }
        Self::from_values(
            grid.surface,
            grid.n(),
            grid.radial.clone(),
            Some(grid.angular.clone()),
            values,
            decay,
        )
    }

    /// Samples a function of a sphere point on a sphere grid.
    pub fn sample_sphere<F: Fn(&SpherePoint<T>) -> T>(
        grid: &PolarGrid<T>,
        decay: Decay<T>,
        f: F,
    ) -> Result<Self> {
        if grid.surface != Surface::Sphere {
            return Err(Error::input("sample_sphere needs a sphere grid"));
        }
        Self::sample_polar(grid, decay, |u, dir| f(&sphere_point(u, dir)))
    }

    /// Samples a function of a plane point on a polar grid of ℝⁿ.
    pub fn sample_plane<F: Fn(&PlanePoint<T>) -> T>(
        grid: &PolarGrid<T>,
        decay: Decay<T>,
        f: F,
    ) -> Result<Self> {
        if grid.surface != Surface::Plane {
            return Err(Error::input("sample_plane needs a plane grid"));
        }
        Self::sample_polar(grid, decay, |u, dir| f(&plane_point(u, dir)))
    }

    /// Samples a function of `u` alone; the result carries no angular grid.
    pub fn sample_zonal<F: Fn(T) -> T>(
        surface: Surface,
        n: usize,
        radial: RadialGrid<T>,
        decay: Decay<T>,
        f: F,
    ) -> Result<Self> {
        let values = radial.nodes_u().iter().map(|&u| f(u)).collect();
        Self::from_values(surface, n, radial, None, values, decay)
    }

    pub fn surface(&self) -> Surface {
        self.surface
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radial(&self) -> &RadialGrid<T> {
        &self.radial
    }

    pub fn angular(&self) -> Option<&Arc<AngularGrid<T>>> {
        self.angular.as_ref()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn decay(&self) -> Decay<T> {
        self.decay
    }

    pub fn is_zonal(&self) -> bool {
        self.zonal
    }

    fn width(&self) -> usize {
        self.angular.as_ref().map_or(1, |a| a.len())
    }

    /// Radial profile of a zonal density, one value per radial node.
    fn zonal_profile(&self) -> Vec<T> {
        self.values.chunks(self.width()).map(|row| row[0]).collect()
    }

    /// Value of a zonal density at `u`.
    pub fn zonal_at(&self, u: T) -> T {
        let w = self.width();
        let st = self.radial.stencil(u);
        st.coeffs.iter().enumerate().fold(T::zero(), |acc, (i, c)| {
            acc + *c * self.values[(st.start + i) * w]
        })
    }

    /// Interpolated harmonic coefficients at `u` (non-zonal densities).
    pub fn coeffs_at(&self, u: T, out: &mut [T]) {
        let a = self.angular.as_ref().expect("angular grid");
        let st = self.radial.stencil(u);
        if st.is_empty() {
            out.iter_mut().for_each(|o| *o = T::zero());
            return;
        }
        st.apply_rows(&self.modes, a.modes(), out);
    }

    /// Interpolated angular samples at `u` on the density's own grid.
    pub fn column_at(&self, u: T, out: &mut [T]) {
        let st = self.radial.stencil(u);
        if st.is_empty() {
            out.iter_mut().for_each(|o| *o = T::zero());
            return;
        }
        st.apply_rows(&self.values, self.width(), out);
    }

    /// Value at `(u, ξ′)`, interpolating radially and synthesizing angularly.
    pub fn value(&self, u: T, dir: &[T]) -> T {
        if self.zonal {
            return self.zonal_at(u);
        }
        let a = self.angular.as_ref().expect("angular grid");
        let mut c = vec![T::zero(); a.modes()];
        self.coeffs_at(u, &mut c);
        let mut y = vec![T::zero(); a.modes()];
        a.harmonics_into(dir, &mut y);
        c.iter()
            .zip(&y)
            .fold(T::zero(), |acc, (c, y)| acc + *c * *y)
    }

    /// Height negation A on a sphere density: θ ↦ π − θ.
    pub fn reflect(&self) -> Result<Self> {
        if self.surface != Surface::Sphere || self.radial.clustering() != Clustering::ChebyshevTheta
        {
            return Err(Error::Contract(
                "reflection needs a theta-clustered sphere density".into(),
            ));
        }
        let (lo, hi) = self.radial.u_range();
        let flip = |u: T| {
            if u == T::zero() {
                T::infinity()
            } else {
                u.recip()
            }
        };
        let radial = RadialGrid::new(
            Clustering::ChebyshevTheta,
            flip(hi),
            flip(lo),
            self.radial.len(),
        )?;
        let w = self.width();
        let mut values = Vec::with_capacity(self.values.len());
        for row in self.values.chunks(w).rev() {
            values.extend_from_slice(row);
        }
        Self::from_values(
            self.surface,
            self.n,
            radial,
            self.angular.clone(),
            values,
            self.decay,
        )
    }

    /// Sphere point or plane point of node `(i, a)`, as `(u, ξ′)`.
    pub fn node(&self, i: usize, a: usize) -> (T, Vec<T>) {
        let u = self.radial.nodes_u()[i];
        let dir = match &self.angular {
            Some(g) => g.dir(a).to_vec(),
            None => {
                let mut d = vec![T::zero(); self.n.max(1)];
                d[0] = T::one();
                d
            }
        };
        (u, dir)
    }
}

/// Sphere point with stereographic coordinate `u` and direction `dir`.
pub fn sphere_point<T: Real>(u: T, dir: &[T]) -> SpherePoint<T> {
    if u == T::zero() {
        return SpherePoint::south(dir.len());
    }
    if u.is_infinite() {
        return SpherePoint::north(dir.len());
    }
    let theta = lit::<T>(2.0) * u.sqrt().atan();
    let mut p = SpherePoint::new(theta, dir).expect("interior node");
    p.height = u_to_height(u);
    p
}

pub fn plane_point<T: Real>(u: T, dir: &[T]) -> PlanePoint<T> {
    PlanePoint::new(u.sqrt(), dir).expect("finite node")
}

/// Fourier–Laplace profiles of a density up to degree `jmax`.
pub fn analyze_modes<T: Real>(d: &Density<T>, jmax: usize) -> Result<Vec<ModeProfile<T>>> {
    let Some(a) = d.angular() else {
        if d.surface() == Surface::HalfLine {
            return Err(Error::input("half-line densities have no angular variable"));
        }
        let root = sphere_area::<T>(d.n()).sqrt();
        let radial_values = d.zonal_profile().into_iter().map(|v| v * root).collect();
        return Ok(vec![ModeProfile {
            j: 0,
            k: 1,
            radial_values,
        }]);
    };
    if !matches!(a.n(), 2 | 3) {
        return Err(Error::Unsupported(
            "mode analysis exists for n = 2, 3 only".into(),
        ));
    }
    a.require_degree(jmax)?;
    let count = a.modes_up_to(jmax);
    let total = a.modes();
    let labels = a.labels();
    let nr = d.radial().len();
    let mut coeffs = vec![T::zero(); total];
    let mut profiles: Vec<ModeProfile<T>> = labels[..count]
        .iter()
        .map(|&(j, k)| ModeProfile {
            j,
            k,
            radial_values: Vec::with_capacity(nr),
        })
        .collect();
    for row in d.values().chunks(a.len()) {
        a.analyze(row, &mut coeffs);
        for (p, c) in profiles.iter_mut().zip(&coeffs) {
            p.radial_values.push(*c);
        }
    }
    Ok(profiles)
}

/// Pointwise sum Σ φ_{j,k}(r) Y_{j,k}(ξ′) on a polar grid.
pub fn synthesize_modes<T: Real>(
    profiles: &[ModeProfile<T>],
    grid: &PolarGrid<T>,
    decay: Decay<T>,
) -> Result<Density<T>> {
    let a = &grid.angular;
    let labels = a.labels();
    let nr = grid.radial.len();
    let mut coeffs = vec![T::zero(); nr * a.modes()];
    for p in profiles {
        let h = labels
            .iter()
            .position(|&l| l == (p.j, p.k))
            .ok_or_else(|| {
                Error::Resolution(format!("mode ({}, {}) not resolved by the grid", p.j, p.k))
            })?;
        if p.radial_values.len() != nr {
            return Err(Error::input(
                "profile length does not match the radial grid",
            ));
        }
        for (i, v) in p.radial_values.iter().enumerate() {
            coeffs[i * a.modes() + h] = coeffs[i * a.modes() + h] + *v;
        }
    }
    let mut values = vec![T::zero(); grid.len()];
    for (c, out) in coeffs.chunks(a.modes()).zip(values.chunks_mut(a.len())) {
        a.synthesize(c, out);
    }
    Density::from_values(
        grid.surface,
        grid.n(),
        grid.radial.clone(),
        Some(a.clone()),
        values,
        decay,
    )
}

/// Fejér first-rule weights for the Chebyshev nodes of a radial grid,
/// scaled to its coordinate interval; midpoint weights for uniform grids.
fn coordinate_weights<T: Real>(g: &RadialGrid<T>) -> Vec<T> {
    let n = g.len();
    let (lo_u, hi_u) = g.u_range();
    let lo = g.clustering().coord(lo_u);
    let hi = g.clustering().coord(hi_u);
    let half = (hi - lo) * lit(0.5);
    if g.clustering() == Clustering::UniformU {
        return vec![(hi - lo) / from_usize(n); n];
    }
    let nf = from_usize::<T>(n);
    (0..n)
        .map(|i| {
            let k = n - 1 - i;
            let th = T::PI() * from_usize::<T>(2 * k + 1) / (lit::<T>(2.0) * nf);
            let mut s = T::zero();
            for j in 1..=n / 2 {
                let jf = from_usize::<T>(j);
                s = s + (lit::<T>(2.0) * jf * th).cos() / (lit::<T>(4.0) * jf * jf - T::one());
            }
            half * lit::<T>(2.0) / nf * (T::one() - lit::<T>(2.0) * s)
        })
        .collect()
}

/// du/dx for the grid coordinate x.
fn du_dx<T: Real>(cl: Clustering, u: T) -> T {
    match cl {
        Clustering::ChebyshevU | Clustering::UniformU => T::one(),
        Clustering::ChebyshevR => lit::<T>(2.0) * u.sqrt(),
        Clustering::ChebyshevTheta => u.sqrt() * (T::one() + u),
    }
}

/// Radial quadrature weights for the natural measure of the surface.
pub fn radial_measure_weights<T: Real>(d_surface: Surface, n: usize, g: &RadialGrid<T>) -> Vec<T> {
    let cw = coordinate_weights(g);
    let half_exp = (from_usize::<T>(n) - lit(2.0)) * lit(0.5);
    g.nodes_u()
        .iter()
        .zip(cw)
        .map(|(&u, w)| {
            let jac = du_dx(g.clustering(), u);
            let dens = match d_surface {
                Surface::Plane => u.powf(half_exp) * lit(0.5),
                Surface::Sphere => {
                    lit::<T>(2.0).powi(n as i32)
                        * (T::one() + u).powi(-(n as i32))
                        * u.powf(half_exp)
                        * lit(0.5)
                }
                Surface::HalfLine => lit::<T>(0.5) / u.sqrt(),
            };
            w * jac * dens
        })
        .collect()
}

/// Grid approximation of ‖w φ‖_{L^p}.
pub fn weighted_norm<T: Real>(d: &Density<T>, w: &WeightSpec<T>) -> T {
    let rw = radial_measure_weights(d.surface(), d.n(), d.radial());
    let width = d.width();
    let area = sphere_area::<T>(d.n().max(2));
    let mut acc = T::zero();
    let mut sup = T::zero();
    for (i, row) in d.values().chunks(width).enumerate() {
        let u = d.radial().nodes_u()[i];
        let weight = match d.surface() {
            Surface::Sphere => {
                let h = u_to_height(u);
                (T::one() + h).powf(w.mu) * (T::one() - h).powf(w.nu)
            }
            _ => w.plane_weight(u.sqrt()),
        };
        for (a, v) in row.iter().enumerate() {
            let val = (weight * *v).abs();
            sup = sup.max(val);
            if let Some(p) = w.p {
                let aw = match d.angular() {
                    Some(g) => g.weights()[a],
                    None if d.surface() == Surface::HalfLine => T::one(),
                    None => area,
                };
                acc = acc + rw[i] * aw * val.powf(p);
            }
        }
    }
    match w.p {
        Some(p) => acc.powf(p.recip()),
        None => sup,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn s2_grid() -> PolarGrid<f64> {
        PolarGrid::sphere(2, 24, 8).unwrap()
    }

    #[test]
    fn sample_examples() {
        let g = s2_grid();
        let poly = Decay::Polynomial { power: 0.0 };
        let zero = Density::sample_sphere(&g, poly, |_| 0.0).unwrap();
        assert!(zero.values().iter().all(|v| *v == 0.0));
        let one = Density::sample_sphere(&g, poly, |_| 1.0).unwrap();
        assert!(one.values().iter().all(|v| *v == 1.0) && one.is_zonal());
        let eq = sphere_point(1.0f64, &[1.0, 0.0]);
        assert!(eq.height.abs() < 1e-15);
        let bad = Density::sample_sphere(&g, poly, |_| f64::NAN);
        assert!(matches!(bad, Err(Error::Input(_))));
    }

    #[test]
    fn modes_of_constant_and_cos2() {
        let g = s2_grid();
        let poly = Decay::Polynomial { power: 0.0 };
        let c = Density::sample_polar(&g, poly, |_, _| 3.0).unwrap();
        let p = analyze_modes(&c, 4).unwrap();
        assert!(p[1..]
            .iter()
            .all(|m| m.radial_values.iter().all(|v| v.abs() < 1e-13)));
        let d = Density::sample_polar(&g, poly, |u, dir| {
            let c2 = dir[0] * dir[0] - dir[1] * dir[1];
            (-u).exp() * c2
        })
        .unwrap();
        let p = analyze_modes(&d, 4).unwrap();
        for m in &p {
            let peak = m.radial_values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if (m.j, m.k) == (2, 1) {
                let want = std::f64::consts::PI.sqrt() * (-g.radial.nodes_u()[3]).exp();
                assert_relative_eq!(m.radial_values[3], want, max_relative = 1e-12);
            } else {
                assert!(peak < 1e-13, "({}, {})", m.j, m.k);
            }
        }
    }

    #[test]
    fn analysis_round_trip_and_resolution() {
        let g = PolarGrid::<f64>::new(
            Surface::Plane,
            RadialGrid::new(Clustering::ChebyshevR, 0.0, 9.0, 12).unwrap(),
            Arc::new(AngularGrid::sphere2(6).unwrap()),
        )
        .unwrap();
        let decay = Decay::Compact { lo: 0.0, hi: 9.0 };
        let d =
            Density::sample_polar(&g, decay, |u, x| u * x[0] * x[1] + x[2].powi(3) - 0.5).unwrap();
        let back = synthesize_modes(&analyze_modes(&d, 5).unwrap(), &g, decay).unwrap();
        for (a, b) in d.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(matches!(analyze_modes(&d, 6), Err(Error::Resolution(_))));
        assert!(synthesize_modes(&[], &g, decay)
            .unwrap()
            .values()
            .iter()
            .all(|v| *v == 0.0));
    }

    #[test]
    fn parseval_per_radius() {
        let g = s2_grid();
        let d = Density::sample_polar(&g, Decay::Polynomial { power: 0.0 }, |u, x| {
            (1.0 + u).recip() * (x[0] + 2.0 * x[1] * x[1] * x[0])
        })
        .unwrap();
        let p = analyze_modes(&d, 8).unwrap();
        let a = &g.angular;
        for (i, row) in d.values().chunks(a.len()).enumerate() {
            let sq: Vec<f64> = row.iter().map(|v| v * v).collect();
            let lhs = a.integrate(&sq);
            let rhs: f64 = p.iter().map(|m| m.radial_values[i].powi(2)).sum();
            assert!((lhs - rhs).abs() < 1e-8 * lhs.max(1.0));
        }
    }

    #[test]
    fn norm_examples() {
        let g = PolarGrid::sphere(2, 40, 6).unwrap();
        let poly = Decay::Polynomial { power: 0.0 };
        let one = Density::sample_sphere(&g, poly, |_| 1.0).unwrap();
        let w = WeightSpec::unweighted(Some(2.0));
        assert_relative_eq!(
            weighted_norm(&one, &w),
            3.544_907_701_8,
            max_relative = 1e-9
        );
        let tilted = WeightSpec::new(0.0, 0.5, 0.0, 0.0, Some(2.0)).unwrap();
        assert_relative_eq!(
            weighted_norm(&one, &tilted),
            (4.0 * std::f64::consts::PI).sqrt(),
            max_relative = 1e-9
        );
        let zero = Density::sample_sphere(&g, poly, |_| 0.0).unwrap();
        assert_eq!(weighted_norm(&zero, &w), 0.0);
        let sup = WeightSpec::unweighted(None);
        assert_eq!(weighted_norm(&one, &sup), 1.0);
    }

    #[test]
    fn reflection_negates_height() {
        let g = s2_grid();
        let f = |p: &SpherePoint<f64>| {
            p.height.powi(3) + 0.3 * p.direction[0] * (1.0 - p.height * p.height)
        };
        let d = Density::sample_sphere(&g, Decay::Polynomial { power: 0.0 }, f).unwrap();
        let r = d.reflect().unwrap();
        for i in 0..r.radial().len() {
            for a in 0..g.angular.len() {
                let (u, dir) = r.node(i, a);
                let p = sphere_point(u, &dir);
                let mut q = p.clone();
                q.height = -p.height;
                let want = f(&q);
                assert!((r.values()[i * g.angular.len() + a] - want).abs() < 1e-12);
            }
        }
    }
}
