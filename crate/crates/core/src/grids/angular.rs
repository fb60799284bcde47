use crate::error::{Error, Result};
use crate::quadrature::GaussRule;
use crate::real::{from_usize, lit, Real};
use crate::special::sphere_area;

/// Quadrature on S^{n-1} for n ∈ {2, 3} together with a real orthonormal
/// spherical-harmonic basis resolved by it.
///
/// Harmonics are ordered by degree; inside a degree the zonal member comes
/// first, then cosine/sine pairs of increasing azimuthal order.
#[derive(Debug, Clone)]
pub struct AngularGrid<T> {
    n: usize,
    dirs: Vec<T>,
    weights: Vec<T>,
    /// Angle coordinates per node: ψ for n = 2, (ϑ, φ) for n = 3.
    angles: Vec<T>,
    jmax: usize,
    degrees: Vec<usize>,
    table: Vec<T>,
}

impl<T: Real> AngularGrid<T> {
    /// Equispaced trapezoid rule with `m` nodes on the circle.
    pub fn circle(m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::domain("circle grid needs at least 3 nodes"));
        }
        let step = lit::<T>(2.0) * T::PI() / from_usize(m);
        let mut dirs = Vec::with_capacity(2 * m);
        let mut angles = Vec::with_capacity(m);
        for i in 0..m {
            let psi = step * from_usize(i);
            dirs.push(psi.cos());
            dirs.push(psi.sin());
            angles.push(psi);
        }
        let weights = vec![step; m];
        Self::finish(2, dirs, weights, angles, (m - 1) / 2)
    }

    /// Gauss–Legendre in cos ϑ (`l` nodes) times `2l` azimuths on S².
    pub fn sphere2(l: usize) -> Result<Self> {
        if l < 2 {
            return Err(Error::domain("S² grid needs at least 2 latitude nodes"));
        }
        let gl = GaussRule::<T>::legendre(l);
        let m = 2 * l;
        let step = lit::<T>(2.0) * T::PI() / from_usize(m);
        let mut dirs = Vec::with_capacity(3 * l * m);
        let mut weights = Vec::with_capacity(l * m);
        let mut angles = Vec::with_capacity(2 * l * m);
        for (z, w) in gl.nodes.iter().zip(&gl.weights) {
            let s = (T::one() - *z * *z).max(T::zero()).sqrt();
            for k in 0..m {
                let phi = step * from_usize(k);
                dirs.extend([s * phi.cos(), s * phi.sin(), *z]);
                weights.push(*w * step);
                angles.extend([z.acos(), phi]);
            }
        }
        Self::finish(3, dirs, weights, angles, l - 1)
    }

    /// Default grid resolving degree `jmax`.
    pub fn for_degree(n: usize, jmax: usize) -> Result<Self> {
        match n {
            2 => Self::circle(2 * jmax + 2),
            3 => Self::sphere2(jmax + 1),
            _ => Err(Error::Unsupported(format!(
                "angular grids exist for n = 2, 3 only (n = {n})"
            ))),
        }
    }

    fn finish(
        n: usize,
        dirs: Vec<T>,
        weights: Vec<T>,
        angles: Vec<T>,
        jmax: usize,
    ) -> Result<Self> {
        let mut degrees = Vec::new();
        for j in 0..=jmax {
            let d = if n == 2 {
                if j == 0 {
                    1
                } else {
                    2
                }
            } else {
                2 * j + 1
            };
            degrees.extend(std::iter::repeat_n(j, d));
        }
        let mut grid = Self {
            n,
            dirs,
            weights,
            angles,
            jmax,
            degrees,
            table: Vec::new(),
        };
        let k = grid.degrees.len();
        let m = grid.len();
        let mut table = vec![T::zero(); k * m];
        let mut buf = vec![T::zero(); k];
        for i in 0..m {
            grid.harmonics_into(grid.dir(i), &mut buf);
            for (h, v) in buf.iter().enumerate() {
                table[h * m + i] = *v;
            }
        }
        grid.table = table;
        Ok(grid)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dir(&self, i: usize) -> &[T] {
        &self.dirs[i * self.n..(i + 1) * self.n]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn angles(&self, i: usize) -> &[T] {
        let k = self.n - 1;
        &self.angles[i * k..(i + 1) * k]
    }

    /// Highest degree the grid integrates exactly against itself.
    pub fn jmax(&self) -> usize {
        self.jmax
    }

    /// Number of harmonics up to `jmax`.
    pub fn modes(&self) -> usize {
        self.degrees.len()
    }

    /// Degree of the harmonic with flat index `h`.
    pub fn degree(&self, h: usize) -> usize {
        self.degrees[h]
    }

    /// Degree-index pairs `(j, k)` with `k` counted from 1.
    pub fn labels(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.modes());
        let mut k = 0;
        for (h, &j) in self.degrees.iter().enumerate() {
            k = if h > 0 && self.degrees[h - 1] == j {
                k + 1
            } else {
                1
            };
            out.push((j, k));
        }
        out
    }

    /// Number of harmonics of degree at most `j`.
    pub fn modes_up_to(&self, j: usize) -> usize {
        self.degrees.iter().take_while(|&&d| d <= j).count()
    }

    /// Values `Y_h(node i)` stored as `table[h * len + i]`.
    pub fn table(&self) -> &[T] {
        &self.table
    }

    /// Evaluates every basis harmonic at a unit vector.
    pub fn harmonics_into(&self, dir: &[T], out: &mut [T]) {
        match self.n {
            2 => circle_harmonics(dir, self.jmax, out),
            _ => sphere_harmonics(dir, self.jmax, out),
        }
    }

    pub fn harmonics(&self, dir: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.modes()];
        self.harmonics_into(dir, &mut out);
        out
    }

    /// Projects samples at the nodes onto the harmonic basis.
    pub fn analyze(&self, samples: &[T], out: &mut [T]) {
        let m = self.len();
        for (h, o) in out.iter_mut().enumerate() {
            let row = &self.table[h * m..(h + 1) * m];
            *o = row
                .iter()
                .zip(samples)
                .zip(&self.weights)
                .fold(T::zero(), |acc, ((y, s), w)| acc + *y * *s * *w);
        }
    }

    /// Sums harmonic coefficients back to node values.
    pub fn synthesize(&self, coeffs: &[T], out: &mut [T]) {
        let m = self.len();
        out.iter_mut().for_each(|o| *o = T::zero());
        for (h, c) in coeffs.iter().enumerate() {
            let row = &self.table[h * m..(h + 1) * m];
            for (o, y) in out.iter_mut().zip(row) {
                *o = *o + *c * *y;
            }
        }
    }

    /// Quadrature of node samples over S^{n-1}.
    pub fn integrate(&self, samples: &[T]) -> T {
        samples
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |a, (s, w)| a + *s * *w)
    }

    /// Checks the weights against the sphere area.
    pub fn area_defect(&self) -> T {
        (self.weights.iter().copied().sum::<T>() - sphere_area::<T>(self.n)).abs()
    }

    /// Errors unless degree `j` is resolved.
    pub fn require_degree(&self, j: usize) -> Result<()> {
        if j > self.jmax {
            let need = if self.n == 2 {
                format!("at least {} circle nodes", 2 * j + 1)
            } else {
                format!("at least {} latitude nodes", j + 1)
            };
            return Err(Error::Resolution(format!(
                "degree {j} needs {need}; grid resolves up to {}",
                self.jmax
            )));
        }
        Ok(())
    }
}

fn circle_harmonics<T: Real>(dir: &[T], jmax: usize, out: &mut [T]) {
    let pi = T::PI();
    let c0 = (lit::<T>(2.0) * pi).sqrt().recip();
    let c1 = pi.sqrt().recip();
    out[0] = c0;
    let (c, s) = (dir[0], dir[1]);
    // cos jψ, sin jψ by the angle-addition recurrence
    let (mut cj, mut sj) = (T::one(), T::zero());
    for j in 1..=jmax {
        let next_c = cj * c - sj * s;
        sj = sj * c + cj * s;
        cj = next_c;
        out[2 * j - 1] = c1 * cj;
        out[2 * j] = c1 * sj;
    }
}

fn sphere_harmonics<T: Real>(dir: &[T], jmax: usize, out: &mut [T]) {
    let z = dir[2].max(-T::one()).min(T::one());
    let rho = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
    let (cphi, sphi) = if rho > T::zero() {
        (dir[0] / rho, dir[1] / rho)
    } else {
        (T::one(), T::zero())
    };
    let st = (T::one() - z * z).max(T::zero()).sqrt();
    let root2 = lit::<T>(2.0).sqrt();
    let offset = |j: usize| j * j;
    let mut pmm = (lit::<T>(4.0) * T::PI()).sqrt().recip();
    let (mut cm, mut sm) = (T::one(), T::zero());
    for m in 0..=jmax {
        if m > 0 {
            let mf = from_usize::<T>(m);
            pmm = pmm * st * ((lit::<T>(2.0) * mf + T::one()) / (lit::<T>(2.0) * mf)).sqrt();
            let next_c = cm * cphi - sm * sphi;
            sm = sm * cphi + cm * sphi;
            cm = next_c;
        }
        let mut p_prev = T::zero();
        let mut p_cur = pmm;
        for j in m..=jmax {
            if j > m {
                let jf = from_usize::<T>(j);
                let mf = from_usize::<T>(m);
                let a = ((lit::<T>(4.0) * jf * jf - T::one()) / (jf * jf - mf * mf)).sqrt();
                let jm1 = jf - T::one();
                let b = if j - 1 > m {
                    ((jm1 * jm1 - mf * mf) / (lit::<T>(4.0) * jm1 * jm1 - T::one())).sqrt()
                } else {
                    T::zero()
                };
                let next = a * (z * p_cur - b * p_prev);
                p_prev = p_cur;
                p_cur = next;
            }
            let base = offset(j);
            if m == 0 {
                out[base] = p_cur;
            } else {
                out[base + 2 * m - 1] = root2 * p_cur * cm;
                out[base + 2 * m] = root2 * p_cur * sm;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gram_defect(g: &AngularGrid<f64>) -> f64 {
        let k = g.modes();
        let m = g.len();
        let t = g.table();
        let mut worst = 0.0f64;
        for a in 0..k {
            for b in 0..k {
                let dot: f64 = (0..m)
                    .map(|i| t[a * m + i] * t[b * m + i] * g.weights()[i])
                    .sum();
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).abs());
            }
        }
        worst
    }

    #[test]
    fn weights_sum_to_area() {
        assert!(AngularGrid::<f64>::circle(17).unwrap().area_defect() < 1e-12);
        assert!(AngularGrid::<f64>::sphere2(9).unwrap().area_defect() < 1e-12);
    }

    #[test]
    fn bases_are_orthonormal_on_grid() {
        assert!(gram_defect(&AngularGrid::circle(21).unwrap()) < 1e-12);
        assert!(gram_defect(&AngularGrid::sphere2(8).unwrap()) < 1e-12);
    }

    #[test]
    fn labels_follow_dimensions() {
        let g = AngularGrid::<f64>::sphere2(4).unwrap();
        let labels = g.labels();
        assert_eq!(labels.len(), 16);
        assert_eq!(labels[4], (2, 1));
        assert_eq!(labels[8], (2, 5));
        assert_eq!(g.modes_up_to(1), 4);
        let c = AngularGrid::<f64>::circle(9).unwrap();
        assert_eq!(c.jmax(), 4);
        assert_eq!(c.labels()[3], (2, 1));
    }

    #[test]
    fn known_harmonics() {
        let g = AngularGrid::<f64>::sphere2(4).unwrap();
        let y = g.harmonics(&[0.0, 0.0, 1.0]);
        assert_relative_eq!(
            y[0],
            (4.0 * std::f64::consts::PI).sqrt().recip(),
            epsilon = 1e-15
        );
        // Y_{1,0} = sqrt(3/4π) cos ϑ
        assert_relative_eq!(
            y[1],
            (3.0 / (4.0 * std::f64::consts::PI)).sqrt(),
            epsilon = 1e-14
        );
        assert!(g.require_degree(3).is_ok());
        assert!(matches!(g.require_degree(4), Err(Error::Resolution(_))));
    }
}
