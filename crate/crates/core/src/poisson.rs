//! Poisson integral on S^{n-1}: direct kernel quadrature and the mode
//! multiplier form Σ r^j φ_{j,k} Y_{j,k}.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::PolarField;
use crate::grids::AngularGrid;
use crate::real::{from_usize, lit, Real};
use crate::special::sphere_area;

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonQuery<T> {
    pub direction: Vec<T>,
    pub radius: T,
}

impl<T: Real> PoissonQuery<T> {
    pub fn new(direction: &[T], radius: T) -> Result<Self> {
        if !(radius >= T::zero() && radius < T::one()) {
            return Err(Error::domain(format!(
                "Poisson radius must lie in [0, 1), got {radius}"
            )));
        }
        Ok(Self {
            direction: direction.to_vec(),
            radius,
        })
    }
}

fn kernel<T: Real>(n: usize, r: T, cos: T) -> T {
    let d2 = (T::one() - lit::<T>(2.0) * r * cos + r * r).max(T::min_positive_value());
    (T::one() - r * r) / d2.powf(from_usize::<T>(n) * lit(0.5))
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

/// (1/σ_{n-1}) ∫ (1 − r²)/|rξ′ − η′|ⁿ φ(η′) dη′ by the grid quadrature.
pub fn poisson_direct<T: Real>(phi: &[T], grid: &AngularGrid<T>, q: &PoissonQuery<T>) -> Result<T> {
    if !matches!(grid.n(), 2 | 3) {
        return Err(Error::Unsupported(
            "direct Poisson quadrature exists for n = 2, 3 only".into(),
        ));
    }
    if phi.len() != grid.len() {
        return Err(Error::input("sample count does not match the angular grid"));
    }
    Ok(direct_sum(phi, grid, &q.direction, q.radius))
}

fn direct_sum<T: Real>(phi: &[T], grid: &AngularGrid<T>, dir: &[T], r: T) -> T {
    let n = grid.n();
    let mut acc = T::zero();
    for (i, (v, w)) in phi.iter().zip(grid.weights()).enumerate() {
        acc = acc + *w * *v * kernel(n, r, dot(dir, grid.dir(i)));
    }
    acc / sphere_area::<T>(n)
}

/// Mode-form value with a bound on the truncated remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeValue<T> {
    pub value: T,
    pub tail_bound: T,
}

/// Σ_{j ≤ jmax} r^j Σ_k c_{j,k} Y_{j,k}(ξ′) plus a remainder estimate
/// r^{jmax+1}·‖c_{jmax}‖·√(d_{jmax}/σ)/(1 − r).
pub fn poisson_modes<T: Real>(
    coeffs: &[T],
    grid: &AngularGrid<T>,
    q: &PoissonQuery<T>,
) -> Result<ModeValue<T>> {
    if coeffs.len() > grid.modes() {
        return Err(Error::input("more coefficients than the grid resolves"));
    }
    let y = grid.harmonics(&q.direction);
    let value = mode_sum(coeffs, &y, grid, q.radius);
    let top = grid.degree(coeffs.len().saturating_sub(1));
    let first_top = grid.modes_up_to(top.saturating_sub(1)).min(coeffs.len());
    let block = &coeffs[if top == 0 { 0 } else { first_top }..];
    let norm = block.iter().map(|c| *c * *c).sum::<T>().sqrt();
    let sigma = sphere_area::<T>(grid.n());
    let r = q.radius;
    let tail_bound = r.powi(top as i32 + 1) * norm * (from_usize::<T>(block.len()) / sigma).sqrt()
        / (T::one() - r);
    let total = coeffs.iter().map(|c| *c * *c).sum::<T>().sqrt();
    if r > lit(0.99) && !(norm <= lit::<T>(1e-8) * total) {
        return Err(Error::Divergence(format!(
            "radius {r} with undecayed top-degree coefficients; remainder bound {tail_bound}"
        )));
    }
    Ok(ModeValue { value, tail_bound })
}

fn mode_sum<T: Real>(coeffs: &[T], y: &[T], grid: &AngularGrid<T>, r: T) -> T {
    let mut acc = T::zero();
    let mut pow = T::one();
    let mut deg = 0;
    for (h, (c, yv)) in coeffs.iter().zip(y).enumerate() {
        let d = grid.degree(h);
        while deg < d {
            pow = pow * r;
            deg += 1;
        }
        acc = acc + pow * *c * *yv;
    }
    acc
}

/// Which Poisson form an engine evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoissonForm {
    /// Direct form below `r_switch` when trapezoid aliasing is negligible.
    Auto,
    Direct,
    Modes,
}

/// Poisson evaluation of fields on a fixed angular grid.
#[derive(Debug, Clone)]
pub struct PoissonEngine<T> {
    pub grid: Arc<AngularGrid<T>>,
    pub r_switch: T,
    pub form: PoissonForm,
    pub alias_tol: T,
}

/// Target direction with its harmonics cached.
#[derive(Debug, Clone)]
pub struct PoissonTarget<T> {
    pub dir: Vec<T>,
    harm: Vec<T>,
}

impl<T: Real> PoissonEngine<T> {
    pub fn new(grid: Arc<AngularGrid<T>>) -> Self {
        Self {
            grid,
            r_switch: lit(0.9),
            form: PoissonForm::Auto,
            alias_tol: lit(1e-12),
        }
    }

    pub fn with_form(mut self, form: PoissonForm) -> Self {
        self.form = form;
        self
    }

    pub fn target(&self, dir: &[T]) -> PoissonTarget<T> {
        PoissonTarget {
            dir: dir.to_vec(),
            harm: self.grid.harmonics(dir),
        }
    }

    fn use_direct(&self, s: T) -> bool {
        match self.form {
            PoissonForm::Direct => true,
            PoissonForm::Modes => false,
            PoissonForm::Auto => {
                s <= self.r_switch && s.powi(self.grid.jmax() as i32 + 1) <= self.alias_tol
            }
        }
    }

    /// Π[f(u, ·)](ξ′, s) for `0 ≤ s ≤ 1`; s = 1 returns the boundary value.
    pub fn eval<F: PolarField<T> + ?Sized>(&self, f: &F, u: T, s: T, t: &PoissonTarget<T>) -> T {
        if f.is_zonal() {
            return f.zonal_value(u);
        }
        if s >= T::one() {
            return f.value(u, &t.dir);
        }
        if self.use_direct(s) {
            let mut col = vec![T::zero(); self.grid.len()];
            f.column(u, &self.grid, &mut col);
            direct_sum(&col, &self.grid, &t.dir, s)
        } else {
            let mut c = vec![T::zero(); self.grid.modes()];
            f.coeffs(u, &self.grid, &mut c);
            mode_sum(&c, &t.harm, &self.grid, s)
        }
    }
}
