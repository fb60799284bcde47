//! One-sided spherical fractional integrals on caps of Sⁿ and their
//! inverses.
//!
//! `Side::Left` is the operator over points below the target (S^α_{a+}),
//! `Side::Right` the one over points above it (S^α_{b−}).

use std::sync::Arc;

use crate::ballops::{
    ball_apply, engine_for, marchaud_invert_with, poisson_at, BallOperatorParams,
};
use crate::error::{Error, Result};
use crate::field::{PolarField, Weighted, ZeroExtend};
use crate::frac1d::{sphere_kernel_1d, Side, Sided};
use crate::geometry::{height_to_u, CapSpec, Multiplier, PlanePoint, Pole, SpherePoint};
use rayon::prelude::*;

use crate::grids::{
    analyze_modes, synthesize_modes, AngularGrid, Decay, Density, ModeProfile, PolarGrid,
    RadialGrid, Surface,
};
use crate::marchaud::{marchaud_ray, Inversion, InversionParams, RayTail};
use crate::poisson::PoissonForm;
use crate::real::{from_usize, lit, Real};
use crate::special::{gamma, sphere_area};
use crate::surface::{band_integral, stereo_of, PolarRule, Singular};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Surface quadrature of the defining kernel.
    Direct,
    /// Transport to the ball operators on ℝⁿ.
    Conjugated,
    /// One-dimensional kernel for zonal data.
    Zonal,
    /// Degree-by-degree one-dimensional kernels.
    Modes,
}

#[derive(Debug, Clone)]
pub struct SphereOperatorParams<T> {
    pub alpha: T,
    pub n: usize,
    pub side: Side,
    /// Lower bound `a` is used by the left operator, upper bound `b` by the right one.
    pub cap: CapSpec<T>,
    pub route: Route,
    pub grid: Option<Arc<AngularGrid<T>>>,
}

impl<T: Real> SphereOperatorParams<T> {
    pub fn new(alpha: T, n: usize, side: Side, route: Route) -> Result<Self> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(Error::domain(format!(
                "fractional order must be positive, got {alpha}"
            )));
        }
        if n < 2 {
            return Err(Error::domain("dimension must be at least 2"));
        }
        if route == Route::Modes && !matches!(n, 2 | 3) {
            return Err(Error::input("the mode route exists for n = 2, 3 only"));
        }
        Ok(Self {
            alpha,
            n,
            side,
            cap: CapSpec::full(),
            route,
            grid: None,
        })
    }

    pub fn with_cap(mut self, cap: CapSpec<T>) -> Self {
        self.cap = cap;
        self
    }

    pub fn with_grid(mut self, grid: Arc<AngularGrid<T>>) -> Self {
        self.grid = Some(grid);
        self
    }

    /// Stereographic u-range the operator integrates over for target `u`.
    fn u_bounds(&self) -> (T, T) {
        match self.side {
            Side::Left => (height_to_u(self.cap.a).unwrap_or(T::zero()), T::infinity()),
            Side::Right => (T::zero(), height_to_u(self.cap.b).unwrap_or(T::infinity())),
        }
    }
}

fn check_inside<T: Real>(side: Side, cap: &CapSpec<T>, x: &SpherePoint<T>) -> Result<()> {
    let ok = match side {
        Side::Left => {
            x.pole == Pole::South && cap.a == -T::one() || x.pole != Pole::South && x.height > cap.a
        }
        Side::Right => {
            x.pole == Pole::North && cap.b == T::one() || x.pole != Pole::North && x.height < cap.b
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "point with height {} is not inside the segment",
            x.height
        )))
    }
}

/// Value of a field at a Cartesian point of Sⁿ.
pub(crate) fn field_at<T: Real, F: PolarField<T> + ?Sized>(f: &F, y: &[T]) -> T {
    let (u, dir) = stereo_of(y);
    f.value(u, &dir)
}

/// (S^α_± φ)(x) by the route in `p`.
pub fn sphere_apply<T: Real, F: PolarField<T> + ?Sized>(
    p: &SphereOperatorParams<T>,
    phi: &F,
    x: &SpherePoint<T>,
) -> Result<T> {
    if phi.n() != p.n || x.dim() != p.n {
        return Err(Error::input(
            "dimension mismatch between operator, field and point",
        ));
    }
    check_inside(p.side, &p.cap, x)?;
    match p.route {
        Route::Direct => direct(p, phi, x),
        Route::Conjugated => conjugated(p, phi, x),
        Route::Zonal => {
            if !phi.is_zonal() {
                return Err(Error::input("the zonal route needs zonal data"));
            }
            let range = clip(p.u_bounds(), phi.support());
            let u = x.u().ok_or_else(|| {
                Error::Unsupported("the zonal route works in u and excludes the north pole".into())
            })?;
            sphere_kernel_1d(
                p.side,
                p.alpha,
                p.n,
                0,
                range,
                &|v| phi.zonal_value(v),
                phi.decay(),
                u.sqrt(),
            )
        }
        Route::Modes => Err(Error::input(
            "the mode route needs sampled data; use sphere_apply_modes",
        )),
    }
}

fn clip<T: Real>(a: (T, T), b: (T, T)) -> (T, T) {
    (a.0.max(b.0), a.1.min(b.1))
}

fn direct<T: Real, F: PolarField<T> + ?Sized>(
    p: &SphereOperatorParams<T>,
    phi: &F,
    x: &SpherePoint<T>,
) -> Result<T> {
    let alpha = p.alpha;
    let h0 = x.height;
    let coef = lit::<T>(2.0) / (gamma(alpha)? * sphere_area::<T>(p.n));
    let nn = p.n as i32;
    let sing = Singular {
        origin: alpha - T::one(),
        level: Some((h0, alpha)),
    };
    let (lo, hi, sign) = match p.side {
        Side::Left => (p.cap.a, h0, T::one()),
        Side::Right => (h0, p.cap.b, -T::one()),
    };
    let v = band_integral(x, lo, hi, sing, &PolarRule::default(), |y, chord| {
        let dh = sign * (h0 - y[p.n]);
        if !(dh > T::zero()) {
            return T::zero();
        }
        dh.powf(alpha) / chord.powi(nn) * field_at(phi, y)
    })?;
    Ok(coef * v)
}

fn conjugated<T: Real, F: PolarField<T> + ?Sized>(
    p: &SphereOperatorParams<T>,
    phi: &F,
    x: &SpherePoint<T>,
) -> Result<T> {
    let u = x
        .u()
        .ok_or_else(|| Error::Unsupported("the conjugated route excludes the north pole".into()))?;
    let h = from_usize::<T>(p.n) * lit(0.5);
    let (lo, hi) = p.u_bounds();
    let bound = match p.side {
        Side::Left => Sided::Left { a: lo.sqrt() },
        Side::Right => Sided::Right {
            b: hi.is_finite().then(|| hi.sqrt()),
        },
    };
    let mut bp = BallOperatorParams::new(p.alpha, p.n, bound)?.with_form(PoissonForm::Auto);
    bp.grid = p.grid.clone();
    let lifted = Weighted::new(phi, vec![Multiplier::T(h + p.alpha)], T::one());
    let xi = PlanePoint::new(u.sqrt(), &x.direction)?;
    let b = ball_apply(&bp, &lifted, &xi)?;
    Ok(lit::<T>(2.0).powf(-p.alpha) * Multiplier::T(p.alpha - h).eval_u(u) * b)
}

/// Mode route: per-(j, k) one-dimensional kernels, then synthesis at x.
pub fn sphere_apply_modes<T: Real>(
    p: &SphereOperatorParams<T>,
    phi: &Density<T>,
    x: &SpherePoint<T>,
) -> Result<T> {
    check_inside(p.side, &p.cap, x)?;
    let Some(a) = phi.angular() else {
        return sphere_apply(
            &SphereOperatorParams {
                route: Route::Zonal,
                ..p.clone()
            },
            phi,
            x,
        );
    };
    let u = x
        .u()
        .ok_or_else(|| Error::Unsupported("the mode route excludes the north pole".into()))?;
    let profiles = analyze_modes(phi, a.jmax())?;
    let y = a.harmonics(&x.direction);
    let labels = a.labels();
    let range = clip(p.u_bounds(), crate::field::PolarField::support(phi));
    let grid = phi.radial();
    let mut acc = T::zero();
    for pr in &profiles {
        let h = labels
            .iter()
            .position(|l| *l == (pr.j, pr.k))
            .expect("analyzed label");
        if pr.radial_values.iter().all(|v| *v == T::zero()) {
            continue;
        }
        let f = |v: T| grid.interpolate(&pr.radial_values, v);
        let m = sphere_kernel_1d(
            p.side,
            p.alpha,
            p.n,
            pr.j,
            range,
            &f,
            Decay::Polynomial { power: T::zero() },
            u.sqrt(),
        )?;
        acc = acc + m * y[h];
    }
    Ok(acc)
}

/// `Π m(u) · S^α_± φ` tabulated on `radial` (and φ's angular grid), degree by
/// degree; nodes outside the operator's domain are set to zero.
pub fn sphere_tabulate<T: Real>(
    p: &SphereOperatorParams<T>,
    phi: &Density<T>,
    radial: RadialGrid<T>,
    mults: &[Multiplier<T>],
) -> Result<Density<T>> {
    if phi.n() != p.n {
        return Err(Error::input(
            "dimension mismatch between operator and density",
        ));
    }
    let (lo, hi) = p.u_bounds();
    let range = clip((lo, hi), PolarField::support(phi));
    let inside = |u: T| match p.side {
        Side::Left => u > lo,
        Side::Right => u < hi,
    };
    let flat = Decay::Polynomial { power: T::zero() };
    let one_mode = |j: usize, prof: &dyn Fn(T) -> T, u: T| -> Result<T> {
        if !inside(u) {
            return Ok(T::zero());
        }
        let v = sphere_kernel_1d(p.side, p.alpha, p.n, j, range, &prof, flat, u.sqrt())?;
        Ok(mults.iter().fold(v, |acc, m| acc * m.eval_u(u)))
    };
    let Some(ang) = phi.angular().cloned() else {
        let prof = |u: T| phi.zonal_at(u);
        let values = radial
            .nodes_u()
            .par_iter()
            .map(|&u| one_mode(0, &prof, u))
            .collect::<Result<Vec<T>>>()?;
        return Density::from_values(Surface::Sphere, p.n, radial, None, values, flat);
    };
    let src = phi.radial();
    let out = analyze_modes(phi, ang.jmax())?
        .par_iter()
        .map(|pr| {
            let prof = |u: T| src.interpolate(&pr.radial_values, u);
            let radial_values = radial
                .nodes_u()
                .iter()
                .map(|&u| one_mode(pr.j, &prof, u))
                .collect::<Result<Vec<T>>>()?;
            Ok(ModeProfile {
                j: pr.j,
                k: pr.k,
                radial_values,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    synthesize_modes(&out, &PolarGrid::new(Surface::Sphere, radial, ang)?, flat)
}

/// Which construction `sphere_invert` uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InversionRoute {
    /// Ball inverse of the transported data.
    Conjugated,
    /// Finite differences of the spherical ray kernel.
    FiniteDifference,
}

fn plane_of<T: Real>(x: &SpherePoint<T>) -> Result<(T, PlanePoint<T>)> {
    let u = x.u().ok_or_else(|| {
        Error::Unsupported("inverse operators are evaluated away from the north pole".into())
    })?;
    Ok((u, PlanePoint::new(u.sqrt(), &x.direction)?))
}

/// Ray kernel A^±_x f at `u ≤ 0` for order α.
pub fn sphere_kernel<T: Real, F: PolarField<T> + ?Sized>(
    side: Side,
    alpha: T,
    f: &F,
    x: &SpherePoint<T>,
    u: T,
) -> Result<T> {
    if u > T::zero() {
        return Err(Error::domain("ray argument must be nonpositive"));
    }
    let (r2, _) = plane_of(x)?;
    let engine = engine_for(f, None, PoissonForm::Auto)?;
    let target = engine.as_ref().map(|e| e.target(&x.direction));
    Ok(sphere_ray(side, alpha, f, &engine, &target, r2, -u))
}

fn sphere_ray<T: Real, F: PolarField<T> + ?Sized>(
    side: Side,
    alpha: T,
    f: &F,
    engine: &Option<crate::poisson::PoissonEngine<T>>,
    target: &Option<crate::poisson::PoissonTarget<T>>,
    r2: T,
    v: T,
) -> T {
    let h = from_usize::<T>(f.n()) * lit(0.5);
    match side {
        Side::Left => {
            if !(v < r2) {
                return T::zero();
            }
            let t = T::one() - v / r2;
            let w = r2 - v;
            t.powf(h - T::one())
                * (T::one() + w).powf(alpha - h)
                * poisson_at(engine, target, f, w, t.sqrt())
        }
        Side::Right => {
            let w = r2 + v;
            let s = if r2 > T::zero() {
                (T::one() + v / r2).powf(lit(-0.5))
            } else {
                T::zero()
            };
            (T::one() + w).powf(alpha - h) * poisson_at(engine, target, f, w, s)
        }
    }
}

/// (T^α_± f)(x), the inverse of S^α_± on the full sphere.
pub fn sphere_invert<T: Real, F: PolarField<T> + ?Sized>(
    side: Side,
    inv: &InversionParams<T>,
    f: &F,
    x: &SpherePoint<T>,
    route: InversionRoute,
) -> Result<Inversion<T>> {
    sphere_invert_with(side, inv, f, x, route, None)
}

pub(crate) fn sphere_invert_with<T: Real, F: PolarField<T> + ?Sized>(
    side: Side,
    inv: &InversionParams<T>,
    f: &F,
    x: &SpherePoint<T>,
    route: InversionRoute,
    grid: Option<&Arc<AngularGrid<T>>>,
) -> Result<Inversion<T>> {
    if f.n() != x.dim() {
        return Err(Error::input("dimension mismatch between field and point"));
    }
    let alpha = inv.alpha;
    let nf = from_usize::<T>(f.n());
    let (r2, xi) = plane_of(x)?;
    let scale = lit::<T>(2.0).powf(-alpha) * (T::one() + r2).powf(alpha + nf * lit(0.5));
    let res = match route {
        InversionRoute::Conjugated => {
            let w = Weighted::new(f, vec![Multiplier::R(lit::<T>(2.0) * alpha - nf)], T::one());
            marchaud_invert_with(side, inv, &w, &xi, grid)?
        }
        InversionRoute::FiniteDifference => {
            let engine = engine_for(f, grid, PoissonForm::Auto)?;
            let target = engine.as_ref().map(|e| e.target(&x.direction));
            let (lo, hi) = f.support();
            let (tail, breaks) = match side {
                Side::Left => (
                    RayTail::Compact {
                        end: (r2 - lo).max(T::zero()),
                    },
                    vec![],
                ),
                Side::Right => {
                    let tail = if hi.is_finite() {
                        RayTail::Compact {
                            end: (hi - r2).max(T::zero()),
                        }
                    } else {
                        match f.decay() {
                            Decay::Gaussian { rate } => RayTail::Exponential { rate },
                            Decay::Polynomial { power } => RayTail::Algebraic {
                                power: (power + nf) * lit(0.5) - alpha,
                            },
                            Decay::Compact { hi, .. } => RayTail::Compact {
                                end: (hi - r2).max(T::zero()),
                            },
                        }
                    };
                    (tail, if lo > r2 { vec![lo - r2] } else { vec![] })
                }
            };
            let g = |v: T| sphere_ray(side, alpha, f, &engine, &target, r2, v);
            marchaud_ray(inv, g, &breaks, tail, r2)?
        }
    };
    Ok(res.scaled(scale))
}

/// T^α_± of the degree-`j` term `prof(u) Y_j(ξ′)`, returned as the
/// coefficient of `Y_j` at stereographic `u`; `prof` vanishes outside `support`.
pub(crate) fn mode_invert<T: Real>(
    side: Side,
    inv: &InversionParams<T>,
    n: usize,
    j: usize,
    prof: &(dyn Fn(T) -> T + Sync),
    support: (T, T),
    r2: T,
) -> Result<Inversion<T>> {
    let alpha = inv.alpha;
    let h = from_usize::<T>(n) * lit(0.5);
    let jh = from_usize::<T>(j) * lit(0.5);
    let (lo, hi) = support;
    let at = |w: T| if w > lo && w < hi { prof(w) } else { T::zero() };
    let (tail, breaks) = match side {
        Side::Left => (
            RayTail::Compact {
                end: (r2 - lo).max(T::zero()),
            },
            vec![],
        ),
        Side::Right => {
            let tail = if hi.is_finite() {
                RayTail::Compact {
                    end: (hi - r2).max(T::zero()),
                }
            } else {
                RayTail::Algebraic { power: h - alpha }
            };
            (tail, if lo > r2 { vec![lo - r2] } else { vec![] })
        }
    };
    let g = |v: T| match side {
        Side::Left => {
            if !(v < r2) {
                return T::zero();
            }
            let t = T::one() - v / r2;
            let w = r2 - v;
            t.powf(h - T::one() + jh) * (T::one() + w).powf(alpha - h) * at(w)
        }
        Side::Right => {
            let w = r2 + v;
            let s = if r2 > T::zero() {
                (T::one() + v / r2).recip()
            } else {
                T::zero()
            };
            let lift = if j == 0 { T::one() } else { s.powf(jh) };
            (T::one() + w).powf(alpha - h) * lift * at(w)
        }
    };
    let scale = lit::<T>(2.0).powf(-alpha) * (T::one() + r2).powf(alpha + h);
    Ok(marchaud_ray(inv, g, &breaks, tail, r2)?.scaled(scale))
}

/// Difference-quotient form of T^α_± for 0 < α < 1.
pub fn sphere_invert_simple<T: Real, F: PolarField<T> + ?Sized>(
    side: Side,
    alpha: T,
    f: &F,
    x: &SpherePoint<T>,
) -> Result<T> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::domain(format!(
            "difference-quotient form needs 0 < α < 1, got {alpha}"
        )));
    }
    let n = f.n();
    if x.dim() != n {
        return Err(Error::input("dimension mismatch between field and point"));
    }
    if x.pole != Pole::None {
        return Err(Error::Unsupported(
            "difference-quotient form is evaluated away from the poles".into(),
        ));
    }
    let h = from_usize::<T>(n) * lit(0.5);
    let h0 = x.height;
    let fx = field_at(f, &x.cartesian());
    let (gap, lo, hi, sign) = match side {
        Side::Left => (x.one_plus_height(), -T::one(), h0, T::one()),
        Side::Right => (x.one_minus_height(), h0, T::one(), -T::one()),
    };
    let boundary = gamma(h)? / gamma(h - alpha)? * fx / gap.powf(alpha);
    let coef = lit::<T>(2.0) * alpha / (sphere_area::<T>(n) * gamma(T::one() - alpha)?);
    let nn = n as i32;
    let sing = Singular {
        origin: -alpha,
        level: Some((h0, -alpha)),
    };
    let v = band_integral(x, lo, hi, sing, &PolarRule::default(), |y, chord| {
        let dh = sign * (h0 - y[n]);
        if !(dh > T::zero()) {
            return T::zero();
        }
        (fx - field_at(f, y)) / (dh.powf(alpha) * chord.powi(nn))
    })?;
    Ok(boundary + coef * v)
}

/// T^α_{a+} (bound `Left { a }`) or T^α_{b−} (bound `Right { b }`) on a cap,
/// through the zero extension of `f`.
pub fn cap_invert<T: Real, F: PolarField<T> + ?Sized>(
    bound: Sided<T>,
    inv: &InversionParams<T>,
    f: &F,
    x: &SpherePoint<T>,
) -> Result<Inversion<T>> {
    let (side, cap) = match bound {
        Sided::Left { a } => (Side::Left, CapSpec::new(a, T::one())?),
        Sided::Right { b } => (Side::Right, CapSpec::new(-T::one(), b.unwrap_or(T::one()))?),
    };
    check_inside(side, &cap, x)?;
    let (lo, hi) = match side {
        Side::Left => (height_to_u(cap.a).unwrap_or(T::zero()), T::infinity()),
        Side::Right => (T::zero(), height_to_u(cap.b).unwrap_or(T::infinity())),
    };
    let ext = ZeroExtend::new(f, lo, hi);
    sphere_invert(side, inv, &ext, x, InversionRoute::Conjugated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids::{Clustering, PolarGrid, RadialGrid, Surface};
    use approx::assert_relative_eq;

    fn smooth(y: &SpherePoint<f64>) -> f64 {
        let c = y.cartesian();
        1.0 + 0.5 * c[0] + c[0] * c[2] + 0.3 * c[1] * c[1]
    }

    fn x_at(h: f64, t: f64) -> SpherePoint<f64> {
        SpherePoint::from_height(h, &[t.cos(), t.sin()]).unwrap()
    }

    #[test]
    fn zonal_closed_form_all_routes() {
        for alpha in [0.5, 1.0] {
            let hn = 1.0;
            let r = RadialGrid::new(Clustering::ChebyshevTheta, 0.0, f64::INFINITY, 96).unwrap();
            let d = Density::sample_zonal(
                Surface::Sphere,
                2,
                r,
                Decay::Polynomial { power: 0.0 },
                |u: f64| {
                    if u.is_finite() {
                        (1.0 + u).powf(alpha + hn) * (-u).exp()
                    } else {
                        0.0
                    }
                },
            )
            .unwrap();
            for h in [-0.6, 0.0, 0.5] {
                let x = x_at(h, 0.2);
                let u = x.u().unwrap();
                let want = 2f64.powf(alpha) * (1.0 + u).powf(hn - alpha) * (-u).exp();
                for (route, tol) in [
                    (Route::Zonal, 1e-8),
                    (Route::Conjugated, 1e-8),
                    (Route::Direct, 1e-4),
                ] {
                    let p = SphereOperatorParams::new(alpha, 2, Side::Right, route).unwrap();
                    let v = sphere_apply(&p, &d, &x).unwrap();
                    assert_relative_eq!(v, want, max_relative = tol);
                }
            }
        }
    }

    #[test]
    fn routes_agree_on_band_limited_data() {
        let g = PolarGrid::sphere(2, 48, 6).unwrap();
        let d = Density::sample_sphere(&g, Decay::Polynomial { power: 0.0 }, smooth).unwrap();
        for alpha in [0.5, 1.0] {
            for side in [Side::Left, Side::Right] {
                let x = x_at(0.2, 0.7);
                let p = |r| SphereOperatorParams::new(alpha, 2, side, r).unwrap();
                let a = sphere_apply(&p(Route::Direct), &d, &x).unwrap();
                let b = sphere_apply(&p(Route::Conjugated), &d, &x).unwrap();
                let c = sphere_apply_modes(&p(Route::Modes), &d, &x).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-6);
                assert_relative_eq!(b, c, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn reflection_symmetry() {
        let g = PolarGrid::sphere(2, 48, 6).unwrap();
        let d = Density::sample_sphere(&g, Decay::Polynomial { power: 0.0 }, smooth).unwrap();
        let rd = d.reflect().unwrap();
        let x = x_at(0.3, 1.1);
        let p = |s| SphereOperatorParams::new(0.5, 2, s, Route::Conjugated).unwrap();
        let a = sphere_apply(&p(Side::Left), &d, &x).unwrap();
        let b = sphere_apply(&p(Side::Right), &rd, &x.reflected()).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-8);
    }

    #[test]
    fn inverse_of_constant() {
        let one = crate::field::zonal_fn(2, Decay::Polynomial { power: 0.0 }, |_| 1.0f64);
        let inv = InversionParams::new(0.5).unwrap();
        for h in [-0.5, 0.0, 0.6] {
            let x = x_at(h, 0.0);
            let want = gamma(1.0).unwrap() / gamma(0.5).unwrap() / (1.0 - h).powf(0.5);
            for route in [InversionRoute::Conjugated, InversionRoute::FiniteDifference] {
                let v = sphere_invert(Side::Right, &inv, &one, &x, route).unwrap();
                assert_relative_eq!(v.value, want, max_relative = 1e-4);
            }
            assert_relative_eq!(
                sphere_invert_simple(Side::Right, 0.5, &one, &x).unwrap(),
                want,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn round_trip_and_simple_form() {
        // φ vanishing to high order at the north pole
        let alpha = 0.5;
        let r = RadialGrid::new(Clustering::ChebyshevTheta, 0.0, f64::INFINITY, 64).unwrap();
        let phi = |u: f64| {
            if u.is_finite() {
                (-u).exp() * (1.0 + u).powi(2)
            } else {
                0.0
            }
        };
        let src = Density::sample_zonal(
            Surface::Sphere,
            2,
            r.clone(),
            Decay::Polynomial { power: 0.0 },
            phi,
        )
        .unwrap();
        let p = SphereOperatorParams::new(alpha, 2, Side::Right, Route::Zonal).unwrap();
        let vals: Vec<f64> = r
            .nodes_u()
            .iter()
            .map(|&u| sphere_apply(&p, &src, &crate::grids::sphere_point(u, &[1.0, 0.0])).unwrap())
            .collect();
        let f = Density::from_values(
            Surface::Sphere,
            2,
            r,
            None,
            vals,
            Decay::Polynomial { power: 0.0 },
        )
        .unwrap();
        let inv = InversionParams::new(alpha).unwrap();
        for h in [-0.5, 0.0, 0.4] {
            let x = x_at(h, 0.0);
            let want = phi(x.u().unwrap());
            let t = sphere_invert(Side::Right, &inv, &f, &x, InversionRoute::Conjugated).unwrap();
            assert_relative_eq!(t.value, want, max_relative = 1e-2);
            let s = sphere_invert_simple(Side::Right, alpha, &f, &x).unwrap();
            assert_relative_eq!(s, t.value, max_relative = 1e-2);
        }
    }

    #[test]
    fn cap_round_trip() {
        let alpha = 0.5;
        let b = 0.5;
        let ub = height_to_u(b).unwrap();
        let r = RadialGrid::new(Clustering::ChebyshevU, 0.0, ub, 48).unwrap();
        let phi = |u: f64| (ub - u).powi(2) * (1.0 + u);
        let src = Density::sample_zonal(
            Surface::Sphere,
            2,
            r.clone(),
            Decay::Compact { lo: 0.0, hi: ub },
            phi,
        )
        .unwrap();
        let cap = CapSpec::new(-1.0, b).unwrap();
        let p = SphereOperatorParams::new(alpha, 2, Side::Right, Route::Zonal)
            .unwrap()
            .with_cap(cap);
        let vals: Vec<f64> = r
            .nodes_u()
            .iter()
            .map(|&u| sphere_apply(&p, &src, &crate::grids::sphere_point(u, &[1.0, 0.0])).unwrap())
            .collect();
        let f = Density::from_values(
            Surface::Sphere,
            2,
            r,
            None,
            vals,
            Decay::Compact { lo: 0.0, hi: ub },
        )
        .unwrap();
        let inv = InversionParams::new(alpha).unwrap();
        for h in [-0.6, -0.2, 0.2] {
            let x = x_at(h, 0.0);
            let v = cap_invert(Sided::Right { b: Some(b) }, &inv, &f, &x).unwrap();
            assert_relative_eq!(v.value, phi(x.u().unwrap()), max_relative = 1e-2);
        }
        assert!(cap_invert(Sided::Right { b: Some(b) }, &inv, &f, &x_at(0.7, 0.0)).is_err());
    }
}
