//! One-dimensional Abel-type kernels and the weakly singular quadrature
//! they share.
//!
//! Radial and zonal kernels are integrated in `u = ρ²`, where
//! `(r² − ρ²)^{α−1}` becomes `(R − u)^{α−1}` with `R = r²`.

use crate::error::{Error, Result};
use crate::field::PolarField;
use crate::grids::{Decay, Density, ModeProfile, RadialGrid, Surface};
use crate::quadrature::{cached_jacobi, cached_legendre};
use crate::real::{from_usize, lit, Real};
use crate::special::gamma;

/// Which end the integration is anchored to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Integrate from the lower bound up to the target.
    Left,
    /// Integrate from the target up to the upper bound.
    Right,
}

impl Side {
    pub fn flip(self) -> Self {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// A side together with its bound: `Left { a }` or `Right { b }` (`None` is ∞).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sided<T> {
    Left { a: T },
    Right { b: Option<T> },
}

impl<T: Real> Sided<T> {
    pub fn side(&self) -> Side {
        match self {
            Sided::Left { .. } => Side::Left,
            Sided::Right { .. } => Side::Right,
        }
    }
}

/// Behaviour of an integrand beyond the last panel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail<T> {
    /// Integrate up to a finite end point.
    Finite(T),
    /// Integrand bounded by `exp(-rate t)`.
    Exponential { rate: T },
    /// Integrand (without the kernel) behaves like `t^{-power}`.
    Algebraic { power: T },
}

impl<T: Real> Tail<T> {
    /// Tail of a field written in `u`, clipped at the field support.
    pub fn of_field<F: PolarField<T> + ?Sized>(f: &F) -> Self {
        let (_, hi) = f.support();
        if hi.is_finite() {
            return Tail::Finite(hi);
        }
        match f.decay() {
            Decay::Gaussian { rate } => Tail::Exponential { rate },
            Decay::Polynomial { power } => Tail::Algebraic {
                power: power * lit(0.5),
            },
            Decay::Compact { hi, .. } => Tail::Finite(hi),
        }
    }

    /// Multiplies the integrand by a factor behaving like `t^{-extra}`.
    pub fn faster(self, extra: T) -> Self {
        match self {
            Tail::Algebraic { power } => Tail::Algebraic {
                power: power + extra,
            },
            other => other,
        }
    }
}

/// Which variable an Abel kernel is linear in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    Linear,
    Squared,
}

/// Composite Gauss–Jacobi rule for `(hi − t)^{α−1}` / `(t − lo)^{α−1}`
/// kernels: Jacobi panels at singular ends, Legendre panels elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbelQuadrature<T> {
    pub order: usize,
    pub exponent: T,
    pub variable: Variable,
    pub panels: usize,
    pub tail_tol: T,
}

impl<T: Real> AbelQuadrature<T> {
    pub fn new(order: usize, alpha: T, variable: Variable) -> Result<Self> {
        if order < 4 {
            return Err(Error::domain("Abel quadrature order must be at least 4"));
        }
        if !(alpha > T::zero()) {
            return Err(Error::domain(format!(
                "fractional order must be positive, got {alpha}"
            )));
        }
        Ok(Self {
            order,
            exponent: alpha - T::one(),
            variable,
            panels: 4,
            tail_tol: lit(1e-14),
        })
    }

    pub fn with_panels(mut self, panels: usize) -> Self {
        self.panels = panels.max(1);
        self
    }

    /// ∫_lo^hi (hi − t)^{α−1} (t − lo)^γ g(t) dt.
    pub fn left<G: FnMut(T) -> T>(&self, lo: T, hi: T, gamma_lo: T, mut g: G) -> Result<T> {
        if hi <= lo {
            return Ok(T::zero());
        }
        let a = self.exponent;
        let p = self.panels;
        if p == 1 {
            return Ok(cached_jacobi(self.order, a, gamma_lo)?.integrate(lo, hi, g));
        }
        // uniform cuts plus geometric ones towards `lo` for wide intervals
        let span = hi - lo;
        let mut cuts: Vec<T> = (0..=p)
            .map(|k| lo + span * from_usize::<T>(k) / from_usize::<T>(p))
            .collect();
        let mut w = span / from_usize::<T>(p);
        while w > lit(2.0) && cuts.len() < p + 24 {
            w = w * lit(0.25);
            cuts.push(lo + w);
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
        *cuts.last_mut().expect("nonempty") = hi;
        let first = cached_jacobi(self.order, T::zero(), gamma_lo)?;
        let last = cached_jacobi(self.order, a, T::zero())?;
        let mid = cached_legendre::<T>(self.order);
        let m = cuts.len() - 1;
        let mut acc = T::zero();
        for (k, c) in cuts.windows(2).enumerate() {
            let (x0, x1) = (c[0], c[1]);
            let part = if k == 0 {
                first.integrate(x0, x1, |t| (hi - t).powf(a) * g(t))
            } else if k + 1 == m {
                last.integrate(x0, x1, |t| (t - lo).powf(gamma_lo) * g(t))
            } else {
                mid.integrate(x0, x1, |t| {
                    (hi - t).powf(a) * (t - lo).powf(gamma_lo) * g(t)
                })
            };
            acc = acc + part;
        }
        Ok(acc)
    }

    /// ∫_lo^∞ (t − lo)^{α−1} g(t) dt with the given tail behaviour.
    pub fn right<G: FnMut(T) -> T>(&self, lo: T, tail: Tail<T>, mut g: G) -> Result<T> {
        let a = self.exponent;
        let head = |hi: T, panels: usize, g: &mut G| -> Result<T> {
            if hi <= lo {
                return Ok(T::zero());
            }
            let w = (hi - lo) / from_usize(panels);
            let first = cached_jacobi(self.order, T::zero(), a)?;
            let mid = cached_legendre::<T>(self.order);
            let mut acc = first.integrate(lo, lo + w, &mut *g);
            for k in 1..panels {
                let x0 = lo + w * from_usize(k);
                let x1 = if k + 1 == panels { hi } else { x0 + w };
                acc = acc + mid.integrate(x0, x1, |t| (t - lo).powf(a) * g(t));
            }
            Ok(acc)
        };
        match tail {
            Tail::Finite(hi) => head(hi, self.panels, &mut g),
            Tail::Exponential { rate } => {
                if !(rate > T::zero()) {
                    return Err(Error::input("exponential tail needs a positive rate"));
                }
                let span = -self.tail_tol.ln() / rate;
                let panels = ((span * rate / lit(2.5)).ceil().to_usize().unwrap_or(1))
                    .clamp(self.panels, 64);
                head(lo + span, panels, &mut g)
            }
            Tail::Algebraic { power } => {
                if !(power > self.exponent + T::one()) {
                    return Err(Error::input(format!(
                        "integrand decaying like t^-{power} is not integrable against (t - lo)^{a}"
                    )));
                }
                let t0 = lo * lit(2.0) + T::one();
                let body = head(t0, self.panels, &mut g)?;
                // t = t0 / s on (0, 1]; weight s^{power - α - 1} at s = 0.
                let b = power - a - lit(2.0);
                let rule = cached_jacobi(self.order, T::zero(), b)?;
                let tail = rule.integrate(T::zero(), T::one(), |s| {
                    let t = t0 / s;
                    (t - lo).powf(a) * g(t) * t0 / (s * s) / s.powf(b)
                });
                Ok(body + tail)
            }
        }
    }
}

fn default_quad<T: Real>(alpha: T, variable: Variable) -> Result<AbelQuadrature<T>> {
    AbelQuadrature::new(32, alpha, variable)
}

fn check_alpha<T: Real>(alpha: T) -> Result<T> {
    if !(alpha > T::zero()) || !alpha.is_finite() {
        return Err(Error::domain(format!(
            "fractional order must be positive, got {alpha}"
        )));
    }
    gamma(alpha)
}

/// Riemann–Liouville integral of a half-line density `ψ(t)`, `t = r`.
pub fn rl_apply<T: Real>(bound: Sided<T>, alpha: T, psi: &Density<T>, t: T) -> Result<T> {
    let g_alpha = check_alpha(alpha)?;
    if psi.surface() != Surface::HalfLine {
        return Err(Error::input("rl_apply expects a half-line density"));
    }
    let (lo_u, hi_u) = psi.radial().u_range();
    let f = |tau: T| psi.zonal_at(tau * tau);
    let q = default_quad(alpha, Variable::Linear)?;
    match bound {
        Sided::Left { a } => {
            if !(a < t) {
                return Err(Error::domain(format!("need a < t (a = {a}, t = {t})")));
            }
            Ok(q.left(a.max(lo_u.sqrt()), t, T::zero(), f)? / g_alpha)
        }
        Sided::Right { b } => {
            let end = b.map_or(hi_u.sqrt(), |b| b.min(hi_u.sqrt()));
            if let Some(b) = b {
                if !(t < b) {
                    return Err(Error::domain(format!("need t < b (t = {t}, b = {b})")));
                }
            }
            let tail = if end.is_finite() {
                Tail::Finite(end)
            } else {
                match psi.decay() {
                    Decay::Gaussian { rate } => Tail::Exponential { rate },
                    Decay::Polynomial { power } => Tail::Algebraic { power },
                    Decay::Compact { hi, .. } => Tail::Finite(hi.sqrt()),
                }
            };
            Ok(q.right(t, tail, f)? / g_alpha)
        }
    }
}

/// Left/right Abel integral in `u` of a radial function, for the ball
/// (`sphere = false`) or zonal sphere kernels, with the extra factor
/// `(u/R)^{lift_left}` on the left and `(R/u)^{lift_right}` on the right.
#[allow(clippy::too_many_arguments)]
pub(crate) fn abel_u<T: Real, G: Fn(T) -> T>(
    bound: Sided<T>,
    alpha: T,
    r2: T,
    lift_left: T,
    lift_right: T,
    origin_power: T,
    tail: Tail<T>,
    g: G,
) -> Result<T> {
    let q = default_quad(alpha, Variable::Squared)?;
    match bound {
        Sided::Left { a } => {
            let lo = a * a;
            if !(lo < r2) {
                return Err(Error::domain(format!(
                    "target must lie above the lower bound ({a})"
                )));
            }
            if lo == T::zero() {
                let gam = lift_left + origin_power;
                q.left(T::zero(), r2, gam, |u| {
                    r2.powf(-lift_left) * g(u) / u.powf(origin_power)
                })
            } else {
                q.left(lo, r2, T::zero(), |u| (u / r2).powf(lift_left) * g(u))
            }
        }
        Sided::Right { b } => {
            let tail = match b {
                Some(b) => {
                    if !(r2 < b * b) {
                        return Err(Error::domain(format!(
                            "target must lie below the upper bound ({b})"
                        )));
                    }
                    match tail {
                        Tail::Finite(hi) => Tail::Finite(hi.min(b * b)),
                        _ => Tail::Finite(b * b),
                    }
                }
                None => tail.faster(lift_right),
            };
            if r2 == T::zero() && lift_right > T::zero() {
                return Ok(T::zero());
            }
            q.right(r2, tail, |u| (r2 / u).powf(lift_right) * g(u))
        }
    }
}

/// Interpolated zonal profile of a density in `u`.
fn profile<'a, T: Real>(d: &'a Density<T>) -> impl Fn(T) -> T + 'a {
    move |u| d.zonal_at(u)
}

/// Radial ball integral B̃^α of a radial profile φ₀ at radius `r`.
pub fn radial_ball<T: Real>(
    bound: Sided<T>,
    alpha: T,
    n: usize,
    phi0: &Density<T>,
    r: T,
) -> Result<T> {
    let g_alpha = check_alpha(alpha)?;
    if !phi0.is_zonal() {
        return Err(Error::input("radial_ball needs a radial density"));
    }
    let half = (from_usize::<T>(n) - lit(2.0)) * lit(0.5);
    let tail = Tail::of_field(phi0);
    let v = abel_u(
        bound,
        alpha,
        r * r,
        half,
        T::zero(),
        T::zero(),
        tail,
        profile(phi0),
    )?;
    Ok(v / g_alpha)
}

/// c_α(r)/2 = 2^α (1 + r²)^{n/2 − α} / Γ(α), the zonal prefactor in `u`.
pub(crate) fn zonal_prefactor<T: Real>(alpha: T, n: usize, r2: T) -> Result<T> {
    let g_alpha = check_alpha(alpha)?;
    let h = from_usize::<T>(n) * lit(0.5);
    Ok(lit::<T>(2.0).powf(alpha) * (T::one() + r2).powf(h - alpha) / g_alpha)
}

/// Zonal spherical integral S̃^α_± of φ₀ given in `r = tan(θ/2)`.
pub fn zonal_sphere<T: Real>(side: Side, alpha: T, n: usize, phi0: &Density<T>, r: T) -> Result<T> {
    if !phi0.is_zonal() {
        return Err(Error::input("zonal_sphere needs a zonal density"));
    }
    let (lo, hi) = phi0.radial().u_range();
    sphere_kernel_1d(side, alpha, n, 0, (lo, hi), &profile(phi0), phi0.decay(), r)
}

/// Per-mode spherical integral for degree `j`.
pub fn mode_sphere<T: Real>(
    side: Side,
    alpha: T,
    n: usize,
    j: usize,
    profile: &ModeProfile<T>,
    grid: &RadialGrid<T>,
    r: T,
) -> Result<T> {
    if profile.j != j {
        return Err(Error::input(format!(
            "profile has degree {}, requested {j}",
            profile.j
        )));
    }
    if profile.radial_values.len() != grid.len() {
        return Err(Error::input(
            "profile length does not match the radial grid",
        ));
    }
    let vals = &profile.radial_values;
    let f = |u: T| grid.interpolate(vals, u);
    sphere_kernel_1d(
        side,
        alpha,
        n,
        j,
        grid.u_range(),
        &f,
        Decay::Polynomial { power: T::zero() },
        r,
    )
}

/// Degree-`j` spherical kernel in `u` for a profile living on `lo < u < hi`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn sphere_kernel_1d<T: Real, G: Fn(T) -> T>(
    side: Side,
    alpha: T,
    n: usize,
    j: usize,
    range: (T, T),
    f: &G,
    decay: Decay<T>,
    r: T,
) -> Result<T> {
    if !(r >= T::zero()) || !r.is_finite() {
        return Err(Error::domain(format!(
            "stereographic radius must be finite and nonnegative, got {r}"
        )));
    }
    let r2 = r * r;
    let pref = zonal_prefactor(alpha, n, r2)?;
    let h = from_usize::<T>(n) * lit(0.5);
    let jf = from_usize::<T>(j);
    let (lo, hi) = range;
    let weight = move |u: T| (T::one() + u).powf(-alpha - h) * f(u);
    let v = match side {
        Side::Left => {
            if r2 <= lo {
                return Ok(T::zero());
            }
            let lift = h - T::one() + jf * lit(0.5);
            // smooth profiles of degree j vanish like u^{j/2} at the origin
            let origin = if lo == T::zero() {
                jf * lit(0.5)
            } else {
                T::zero()
            };
            if hi < r2 {
                // support ends below the target: no kernel singularity inside
                let gam = if lo == T::zero() {
                    lift + origin
                } else {
                    T::zero()
                };
                let rule = cached_jacobi(32, T::zero(), gam)?;
                let v = rule.integrate(lo, hi, |u| {
                    let base = if lo == T::zero() {
                        r2.powf(-lift) * weight(u) / u.powf(origin)
                    } else {
                        (u / r2).powf(lift) * weight(u)
                    };
                    (r2 - u).powf(alpha - T::one()) * base
                });
                return Ok(pref * v);
            }
            abel_u(
                Sided::Left { a: lo.sqrt() },
                alpha,
                r2,
                lift,
                T::zero(),
                origin,
                Tail::Finite(hi),
                weight,
            )?
        }
        Side::Right => {
            let tail = if hi.is_finite() {
                Tail::Finite(hi)
            } else {
                match decay {
                    Decay::Compact { hi, .. } => Tail::Finite(hi),
                    _ => Tail::Algebraic { power: alpha + h },
                }
            };
            let start = r2.max(lo);
            if start > r2 {
                // The target lies below the support: shift the kernel start.
                let q = default_quad(alpha, Variable::Squared)?;
                let end = match tail {
                    Tail::Finite(e) => e,
                    _ => T::infinity(),
                };
                if end <= start {
                    return Ok(T::zero());
                }
                let kern = |u: T| {
                    (u - r2).powf(alpha - T::one()) * (r2 / u).powf(jf * lit(0.5)) * weight(u)
                };
                let leg = cached_legendre::<T>(q.order);
                if end.is_finite() {
                    let w = (end - start) / from_usize(q.panels);
                    let mut acc = T::zero();
                    for k in 0..q.panels {
                        let x0 = start + w * from_usize(k);
                        acc = acc + leg.integrate(x0, x0 + w, &kern);
                    }
                    acc
                } else {
                    return Err(Error::Unsupported(
                        "unbounded support starting above the target".into(),
                    ));
                }
            } else {
                abel_u(
                    Sided::Right { b: None },
                    alpha,
                    r2,
                    T::zero(),
                    jf * lit(0.5),
                    T::zero(),
                    tail,
                    weight,
                )?
            }
        }
    };
    Ok(pref * v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids::Clustering;
    use crate::special::gamma;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn half_line(f: impl Fn(f64) -> f64, hi: f64, decay: Decay<f64>) -> Density<f64> {
        let g = RadialGrid::new(Clustering::ChebyshevR, 0.0, hi * hi, 64).unwrap();
        Density::sample_zonal(Surface::HalfLine, 2, g, decay, |u| f(u.sqrt())).unwrap()
    }

    #[test]
    fn rl_examples() {
        let one = half_line(|_| 1.0, 4.0, Decay::Compact { lo: 0.0, hi: 16.0 });
        let v = rl_apply(Sided::Left { a: 0.0 }, 0.5, &one, 2.0).unwrap();
        assert_relative_eq!(
            v,
            2.0 * (2.0 / std::f64::consts::PI).sqrt(),
            max_relative = 1e-12
        );
        let zero = half_line(|_| 0.0, 4.0, Decay::Compact { lo: 0.0, hi: 16.0 });
        assert_eq!(
            rl_apply(Sided::Left { a: 0.0 }, 0.5, &zero, 1.0).unwrap(),
            0.0
        );
        let e = half_line(
            |t| (-t).exp(),
            40.0,
            Decay::Compact {
                lo: 0.0,
                hi: 1600.0,
            },
        );
        for alpha in [0.25, 0.5, 0.75] {
            for t in [0.3, 1.0, 2.5] {
                let v = rl_apply(Sided::Right { b: None }, alpha, &e, t).unwrap();
                assert_relative_eq!(v, (-t).exp(), max_relative = 1e-6);
            }
        }
        assert!(rl_apply(Sided::Left { a: 1.0 }, 0.5, &one, 0.5).is_err());
    }

    #[test]
    fn semigroup_on_polynomials() {
        // I^α I^β t² = I^{α+β} t² with closed forms Γ(3) t^{2+s}/Γ(3+s)
        let q = |s: f64, t: f64| 2.0 * t.powf(2.0 + s) / gamma(3.0 + s).unwrap();
        for (a, b) in [(0.3, 0.7), (0.7, 0.3), (0.3, 0.3)] {
            let inner = half_line(move |t| q(b, t), 3.0, Decay::Compact { lo: 0.0, hi: 9.0 });
            let t = 1.7;
            let v = rl_apply(Sided::Left { a: 0.0 }, a, &inner, t).unwrap();
            assert_relative_eq!(v, q(a + b, t), max_relative = 1e-6);
        }
    }

    #[test]
    fn radial_ball_examples() {
        let g = RadialGrid::new(Clustering::ChebyshevU, 0.0f64, 9.0, 16).unwrap();
        let one = Density::sample_zonal(
            Surface::Plane,
            2,
            g.clone(),
            Decay::Compact { lo: 0.0, hi: 9.0 },
            |_| 1.0,
        )
        .unwrap();
        for alpha in [0.5, 1.0, 1.5] {
            let v = radial_ball(Sided::Left { a: 0.0 }, alpha, 2, &one, 1.3).unwrap();
            assert_relative_eq!(
                v,
                1.3f64.powf(2.0 * alpha) / gamma(alpha + 1.0).unwrap(),
                max_relative = 1e-12
            );
        }
        let gg = RadialGrid::new(Clustering::ChebyshevR, 0.0f64, 36.0, 48).unwrap();
        let gauss =
            Density::sample_zonal(Surface::Plane, 2, gg, Decay::Gaussian { rate: 1.0 }, |u| {
                (-u).exp()
            })
            .unwrap();
        for alpha in [0.5, 1.0] {
            for r in [0.0, 0.5, 1.5, 2.5] {
                let v = radial_ball(Sided::Right { b: None }, alpha, 2, &gauss, r).unwrap();
                assert_relative_eq!(v, (-r * r).exp(), max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn jacobi_exactness_for_even_powers() {
        // ρ^{2m}: B̃ = Γ(m+n/2) r^{2m+2α} / Γ(m+n/2+α)
        let g = RadialGrid::new(Clustering::ChebyshevU, 0.0f64, 4.0, 16).unwrap();
        for n in [2usize, 3] {
            for m in 0..5 {
                let d = Density::sample_zonal(
                    Surface::Plane,
                    n,
                    g.clone(),
                    Decay::Compact { lo: 0.0, hi: 4.0 },
                    |u| u.powi(m),
                )
                .unwrap();
                let h = n as f64 / 2.0;
                let r = 1.4f64;
                let alpha = 0.6;
                let want = gamma(m as f64 + h).unwrap() * r.powf(2.0 * m as f64 + 2.0 * alpha)
                    / gamma(m as f64 + h + alpha).unwrap();
                let v = radial_ball(Sided::Left { a: 0.0 }, alpha, n, &d, r).unwrap();
                assert_relative_eq!(v, want, max_relative = 1e-12);
            }
        }
    }

    fn sphere_profile(n: usize, f: impl Fn(f64) -> f64) -> Density<f64> {
        let g = RadialGrid::new(Clustering::ChebyshevTheta, 0.0, f64::INFINITY, 96).unwrap();
        Density::sample_zonal(Surface::Sphere, n, g, Decay::Polynomial { power: 0.0 }, f).unwrap()
    }

    #[test]
    fn zonal_sphere_examples() {
        for n in [2usize, 3] {
            let h = n as f64 / 2.0;
            for alpha in [0.5, 1.0] {
                let d = sphere_profile(n, |u| {
                    if u.is_finite() {
                        (1.0 + u).powf(alpha + h) * (-u).exp()
                    } else {
                        0.0
                    }
                });
                for r in [0.2, 0.9, 1.7] {
                    let v = zonal_sphere(Side::Right, alpha, n, &d, r).unwrap();
                    let want = 2f64.powf(alpha) * (1.0 + r * r).powf(h - alpha) * (-r * r).exp();
                    assert_relative_eq!(v, want, max_relative = 1e-7);
                }
            }
        }
        let alpha = 0.5;
        let g = RadialGrid::new(Clustering::ChebyshevU, 0.0, 4.0, 32).unwrap();
        let d = Density::sample_zonal(
            Surface::Sphere,
            2,
            g,
            Decay::Compact { lo: 0.0, hi: 4.0 },
            |u: f64| (1.0 + u).powf(alpha + 1.0),
        )
        .unwrap();
        let r = 0.8f64;
        let want = 2f64.powf(alpha) * (1.0 + r * r).powf(1.0 - alpha) * r.powf(2.0 * alpha)
            / gamma(alpha + 1.0).unwrap();
        assert_relative_eq!(
            zonal_sphere(Side::Left, alpha, 2, &d, r).unwrap(),
            want,
            max_relative = 1e-10
        );
    }

    #[test]
    fn mode_sphere_examples() {
        let alpha = 0.5;
        let r = 0.7f64;
        let g = RadialGrid::new(Clustering::ChebyshevR, 0.0f64, 4.0, 32).unwrap();
        let vals: Vec<f64> = g
            .nodes_u()
            .iter()
            .map(|&u| u.sqrt() * (1.0 + u).powf(alpha + 1.0))
            .collect();
        let p = ModeProfile {
            j: 1,
            k: 1,
            radial_values: vals,
        };
        let want = 2f64.powf(alpha) * (1.0 + r * r).powf(1.0 - alpha) * r.powf(2.0 * alpha + 1.0)
            / gamma(alpha + 2.0).unwrap();
        assert_relative_eq!(
            mode_sphere(Side::Left, alpha, 2, 1, &p, &g, r).unwrap(),
            want,
            max_relative = 1e-9
        );
        let g = RadialGrid::new(Clustering::ChebyshevTheta, 0.0f64, f64::INFINITY, 96).unwrap();
        let vals: Vec<f64> = g
            .nodes_u()
            .iter()
            .map(|&u| u.sqrt() * (1.0 + u).powf(alpha + 1.0) * (-u).exp())
            .collect();
        let p = ModeProfile {
            j: 1,
            k: 1,
            radial_values: vals,
        };
        let r2 = r * r;
        let want = 2f64.powf(alpha) * (1.0 + r2).powf(1.0 - alpha) * r * (-r2).exp();
        assert_relative_eq!(
            mode_sphere(Side::Right, alpha, 2, 1, &p, &g, r).unwrap(),
            want,
            max_relative = 1e-7
        );
        let zero = ModeProfile {
            j: 2,
            k: 1,
            radial_values: vec![0.0; 96],
        };
        assert_eq!(
            mode_sphere(Side::Right, alpha, 2, 2, &zero, &g, r).unwrap(),
            0.0
        );
        let d = sphere_profile(2, |u| if u.is_finite() { (-u).exp() } else { 0.0 });
        let p0 = ModeProfile {
            j: 0,
            k: 1,
            radial_values: d.values().to_vec(),
        };
        for side in [Side::Left, Side::Right] {
            let a = mode_sphere(side, alpha, 2, 0, &p0, &g, r).unwrap();
            let b = zonal_sphere(side, alpha, 2, &d, r).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-14);
        }
    }

    proptest! {
        #[test]
        fn positive_kernels(c in proptest::collection::vec(0.0f64..1.0, 4), r in 0.1f64..2.0) {
            let g = RadialGrid::new(Clustering::ChebyshevR, 0.0f64, 9.0, 16).unwrap();
            let d = Density::sample_zonal(Surface::Plane, 2, g, Decay::Compact { lo: 0.0, hi: 9.0 }, |u| {
                c[0] + c[1] * u + c[2] * (u - 2.0).powi(2) + c[3] * (-u).exp()
            }).unwrap();
            for b in [Sided::Left { a: 0.0 }, Sided::Right { b: None }] {
                prop_assert!(radial_ball(b, 0.7, 2, &d, r).unwrap() >= 0.0);
            }
        }
    }
}
