//! One-sided ball fractional integrals on ℝⁿ and their hypersingular
//! inverses.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{PolarField, Weighted};
use crate::frac1d::{abel_u, Side, Sided, Tail};
use crate::geometry::{Multiplier, PlanePoint};
use crate::grids::{
    analyze_modes, synthesize_modes, AngularGrid, Decay, Density, PolarGrid, RadialGrid,
};
use crate::marchaud::{marchaud_ray, Inversion, InversionParams, RayTail};
use crate::poisson::{PoissonEngine, PoissonForm};
use crate::quadrature::{cached_jacobi, cached_legendre};
use crate::real::{from_usize, lit, Real};
use crate::special::{gamma, sphere_area};

#[derive(Debug, Clone)]
pub struct BallOperatorParams<T> {
    pub alpha: T,
    pub n: usize,
    pub bound: Sided<T>,
    /// Grid for Poisson integrals of fields that carry none.
    pub grid: Option<Arc<AngularGrid<T>>>,
    pub form: PoissonForm,
}

impl<T: Real> BallOperatorParams<T> {
    pub fn new(alpha: T, n: usize, bound: Sided<T>) -> Result<Self> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(Error::domain(format!(
                "fractional order must be positive, got {alpha}"
            )));
        }
        if n < 2 {
            return Err(Error::domain("dimension must be at least 2"));
        }
        match bound {
            Sided::Left { a } if !(a >= T::zero()) => {
                return Err(Error::domain("left bound must be nonnegative"))
            }
            Sided::Right { b: Some(b) } if !(b > T::zero()) => {
                return Err(Error::domain("right bound must be positive"))
            }
            _ => {}
        }
        Ok(Self {
            alpha,
            n,
            bound,
            grid: None,
            form: PoissonForm::Auto,
        })
    }

    /// Whole-space operator B^α_± (a = 0, b = ∞).
    pub fn whole(alpha: T, n: usize, side: Side) -> Result<Self> {
        let bound = match side {
            Side::Left => Sided::Left { a: T::zero() },
            Side::Right => Sided::Right { b: None },
        };
        Self::new(alpha, n, bound)
    }

    pub fn with_grid(mut self, grid: Arc<AngularGrid<T>>) -> Self {
        self.grid = Some(grid);
        self
    }

    pub fn with_form(mut self, form: PoissonForm) -> Self {
        self.form = form;
        self
    }
}

/// Poisson engine for `f`: its own grid, else the explicit one.
pub(crate) fn engine_for<T: Real, F: PolarField<T> + ?Sized>(
    f: &F,
    explicit: Option<&Arc<AngularGrid<T>>>,
    form: PoissonForm,
) -> Result<Option<PoissonEngine<T>>> {
    if f.is_zonal() {
        return Ok(None);
    }
    let grid = f
        .angular_grid()
        .or_else(|| explicit.cloned())
        .ok_or_else(|| {
            Error::Resolution("non-zonal field needs an angular grid for Poisson integrals".into())
        })?;
    if grid.n() != f.n() {
        return Err(Error::input(format!(
            "angular grid is for n = {}, field for n = {}",
            grid.n(),
            f.n()
        )));
    }
    Ok(Some(PoissonEngine::new(grid).with_form(form)))
}

/// Π[f(u, ·)](ξ′, s), collapsing to the profile for zonal fields.
pub(crate) fn poisson_at<T: Real, F: PolarField<T> + ?Sized>(
    engine: &Option<PoissonEngine<T>>,
    target: &Option<crate::poisson::PoissonTarget<T>>,
    f: &F,
    u: T,
    s: T,
) -> T {
    match (engine, target) {
        (Some(e), Some(t)) => e.eval(f, u, s.min(T::one()), t),
        _ => f.zonal_value(u),
    }
}

/// (B^α_{a+} φ)(ξ) or (B^α_{b−} φ)(ξ) through the polar form.
pub fn ball_apply<T: Real, F: PolarField<T> + ?Sized>(
    p: &BallOperatorParams<T>,
    phi: &F,
    xi: &PlanePoint<T>,
) -> Result<T> {
    if phi.n() != p.n || xi.dim() != p.n {
        return Err(Error::input(
            "dimension mismatch between operator, field and point",
        ));
    }
    if xi.at_infinity {
        return Err(Error::domain("target point at infinity"));
    }
    let r = xi.radius;
    match p.bound {
        Sided::Left { a } if !(r > a) => {
            return Err(Error::domain(format!(
                "|ξ| = {r} must exceed the inner radius {a}"
            )));
        }
        Sided::Right { b: Some(b) } if !(r < b) => {
            return Err(Error::domain(format!(
                "|ξ| = {r} must stay below the outer radius {b}"
            )));
        }
        _ => {}
    }
    let g_alpha = gamma(p.alpha)?;
    let engine = engine_for(phi, p.grid.as_ref(), p.form)?;
    let target = engine.as_ref().map(|e| e.target(&xi.direction));
    let r2 = r * r;
    let v = match p.bound {
        Sided::Left { .. } => {
            let half = (from_usize::<T>(p.n) - lit(2.0)) * lit(0.5);
            abel_u(
                p.bound,
                p.alpha,
                r2,
                half,
                T::zero(),
                phi.origin_power(),
                Tail::Finite(r2),
                |u| poisson_at(&engine, &target, phi, u, (u / r2).sqrt()),
            )?
        }
        Sided::Right { .. } => {
            let tail = Tail::of_field(phi);
            abel_u(
                p.bound,
                p.alpha,
                r2,
                T::zero(),
                T::zero(),
                T::zero(),
                tail,
                |u| {
                    let s = if u > T::zero() {
                        (r2 / u).sqrt()
                    } else {
                        T::zero()
                    };
                    poisson_at(&engine, &target, phi, u, s)
                },
            )?
        }
    };
    Ok(v / g_alpha)
}

/// Ray function A^±_ξ F at `u ≤ 0`.
pub fn marchaud_kernel<T: Real, F: PolarField<T> + ?Sized>(
    side: Side,
    f: &F,
    xi: &PlanePoint<T>,
    u: T,
) -> Result<T> {
    if u > T::zero() {
        return Err(Error::domain("ray argument must be nonpositive"));
    }
    let engine = engine_for(f, None, PoissonForm::Auto)?;
    let target = engine.as_ref().map(|e| e.target(&xi.direction));
    Ok(ray_value(side, f, &engine, &target, xi.u(), -u))
}

fn ray_value<T: Real, F: PolarField<T> + ?Sized>(
    side: Side,
    f: &F,
    engine: &Option<PoissonEngine<T>>,
    target: &Option<crate::poisson::PoissonTarget<T>>,
    r2: T,
    v: T,
) -> T {
    let n = f.n();
    match side {
        Side::Left => {
            if !(v < r2) {
                return T::zero();
            }
            let t = T::one() - v / r2;
            let exp = from_usize::<T>(n) * lit(0.5) - T::one();
            t.powf(exp) * poisson_at(engine, target, f, r2 - v, t.sqrt())
        }
        Side::Right => {
            let s = if r2 > T::zero() {
                (T::one() + v / r2).powf(lit(-0.5))
            } else {
                T::zero()
            };
            poisson_at(engine, target, f, r2 + v, s)
        }
    }
}

/// Truncated Marchaud inverse 𝔻^α_± F at ξ over the ε schedule.
pub fn marchaud_invert<T: Real, F: PolarField<T> + ?Sized>(
    side: Side,
    inv: &InversionParams<T>,
    f: &F,
    xi: &PlanePoint<T>,
) -> Result<Inversion<T>> {
    marchaud_invert_with(side, inv, f, xi, None)
}

pub(crate) fn marchaud_invert_with<T: Real, F: PolarField<T> + ?Sized>(
    side: Side,
    inv: &InversionParams<T>,
    f: &F,
    xi: &PlanePoint<T>,
    grid: Option<&Arc<AngularGrid<T>>>,
) -> Result<Inversion<T>> {
    if f.n() != xi.dim() {
        return Err(Error::input("dimension mismatch between field and point"));
    }
    if xi.at_infinity {
        return Err(Error::domain("target point at infinity"));
    }
    let engine = engine_for(f, grid, PoissonForm::Auto)?;
    let target = engine.as_ref().map(|e| e.target(&xi.direction));
    let r2 = xi.u();
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
                        power: power * lit(0.5),
                    },
                    Decay::Compact { hi, .. } => RayTail::Compact {
                        end: (hi - r2).max(T::zero()),
                    },
                }
            };
            let breaks = if lo > r2 { vec![lo - r2] } else { vec![] };
            (tail, breaks)
        }
    };
    let g = |v: T| ray_value(side, f, &engine, &target, r2, v);
    marchaud_ray(inv, g, &breaks, tail, r2)
}

/// Composite Legendre nodes on `[lo, hi]`, geometrically graded towards the
/// flagged ends.
pub(crate) fn graded_rule<T: Real>(
    lo: T,
    hi: T,
    at_lo: bool,
    at_hi: bool,
    levels: usize,
    order: usize,
) -> Vec<(T, T)> {
    let ratio = lit::<T>(0.15);
    let mut cuts = vec![lo, hi];
    let len = hi - lo;
    let mut w = len * lit(0.5);
    for _ in 0..levels {
        w = w * ratio;
        if at_lo {
            cuts.push(lo + w);
        }
        if at_hi {
            cuts.push(hi - w);
        }
    }
    if at_lo && at_hi {
        cuts.push(lo + len * lit(0.5));
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    cuts.dedup();
    let rule = cached_legendre::<T>(order);
    let mut out = Vec::new();
    for c in cuts.windows(2) {
        let (a, b) = (c[0], c[1]);
        let half = (b - a) * lit(0.5);
        let mid = (a + b) * lit(0.5);
        for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
            out.push((mid + half * *x, half * *wt));
        }
    }
    out
}

/// Orthonormal completion of `d` in ℝ² or ℝ³.
pub(crate) fn frame<T: Real>(d: &[T]) -> Vec<Vec<T>> {
    if d.len() == 2 {
        return vec![vec![-d[1], d[0]]];
    }
    let pick = if d[0].abs() < lit(0.6) {
        [T::one(), T::zero(), T::zero()]
    } else {
        [T::zero(), T::one(), T::zero()]
    };
    let cross = |a: &[T], b: &[T]| {
        vec![
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    };
    let mut w1 = cross(d, &pick);
    let nrm = w1.iter().map(|x| *x * *x).sum::<T>().sqrt();
    w1.iter_mut().for_each(|x| *x = *x / nrm);
    let w2 = cross(d, &w1);
    vec![w1, w2]
}

/// Directions `e` with weights for the unit sphere S^{n−1}, parametrized by
/// the angle ψ between `e` and `d`, graded at ψ = π/2. Only ψ > π/2 when
/// `back_only`.
pub(crate) fn direction_rule<T: Real>(
    d: &[T],
    back_only: bool,
    order: usize,
) -> Result<Vec<(Vec<T>, T)>> {
    let n = d.len();
    if !matches!(n, 2 | 3) {
        return Err(Error::Unsupported(
            "polar-coordinate integrals exist for n = 2, 3 only".into(),
        ));
    }
    let half = T::FRAC_PI_2();
    let mut psi = graded_rule(half, T::PI(), true, false, 10, order);
    if !back_only {
        psi.extend(graded_rule(T::zero(), half, false, true, 10, order));
    }
    let fr = frame(d);
    let mut out = Vec::new();
    if n == 2 {
        for (p, w) in psi {
            for sgn in [T::one(), -T::one()] {
                let e = vec![
                    p.cos() * d[0] + sgn * p.sin() * fr[0][0],
                    p.cos() * d[1] + sgn * p.sin() * fr[0][1],
                ];
                out.push((e, w));
            }
        }
    } else {
        let m = 2 * order;
        let dchi = T::TAU() / from_usize(m);
        for (p, w) in psi {
            for k in 0..m {
                let chi = dchi * from_usize(k);
                let (c, s) = (p.cos(), p.sin());
                let e: Vec<T> = (0..3)
                    .map(|i| c * d[i] + s * (chi.cos() * fr[0][i] + chi.sin() * fr[1][i]))
                    .collect();
                out.push((e, w * s * dchi));
            }
        }
    }
    Ok(out)
}

fn shifted_value<T: Real, F: PolarField<T> + ?Sized>(f: &F, xi: &[T], e: &[T], s: T) -> T {
    let eta: Vec<T> = xi.iter().zip(e).map(|(x, d)| *x + s * *d).collect();
    let u = eta.iter().map(|x| *x * *x).sum::<T>();
    if u == T::zero() {
        let mut d = vec![T::zero(); xi.len()];
        d[0] = T::one();
        return f.value(u, &d);
    }
    let r = u.sqrt();
    let dir: Vec<T> = eta.iter().map(|x| *x / r).collect();
    f.value(u, &dir)
}

/// Inverse of B^α_± for 0 < α < 1 in the difference-quotient form.
pub fn marchaud_simple<T: Real, F: PolarField<T> + ?Sized>(
    side: Side,
    alpha: T,
    f: &F,
    xi: &PlanePoint<T>,
) -> Result<T> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::domain(format!(
            "difference-quotient form needs 0 < α < 1, got {alpha}"
        )));
    }
    let n = f.n();
    if xi.dim() != n {
        return Err(Error::input("dimension mismatch between field and point"));
    }
    let r = xi.radius;
    if side == Side::Left && !(r > T::zero()) {
        return Err(Error::domain(
            "the plus-side inverse is singular at the origin",
        ));
    }
    let order = 16;
    let nf = from_usize::<T>(n);
    let x = xi.cartesian();
    let fx = f.value(xi.u(), &xi.direction);
    let coef = lit::<T>(2.0) * alpha / (sphere_area::<T>(n) * gamma(T::one() - alpha)?);
    let dirs = direction_rule(&xi.direction, side == Side::Left, 12)?;
    let diff = |e: &[T], s: T| (fx - shifted_value(f, &x, e, s)) / s;
    let total: T = match side {
        Side::Left => {
            let rule = cached_jacobi(order, -alpha, -alpha)?;
            dirs.par_iter()
                .map(|(e, w)| {
                    let c = e
                        .iter()
                        .zip(&xi.direction)
                        .fold(T::zero(), |a, (p, q)| a + *p * *q);
                    let star = -lit::<T>(2.0) * r * c;
                    if !(star > T::zero()) {
                        return T::zero();
                    }
                    *w * rule.integrate(T::zero(), star, |s| diff(e, s))
                })
                .sum()
        }
        Side::Right => {
            let first = cached_jacobi(order, T::zero(), -alpha)?;
            let leg = cached_legendre::<T>(order);
            let tail = cached_jacobi(order, T::zero(), lit::<T>(2.0) * alpha - T::one())?;
            let reach = lit::<T>(4.0) * (T::one() + r);
            let parts: Vec<T> = dirs
                .par_iter()
                .map(|(e, w)| {
                    let c = e
                        .iter()
                        .zip(&xi.direction)
                        .fold(T::zero(), |a, (p, q)| a + *p * *q);
                    let star = -lit::<T>(2.0) * r * c;
                    let start = star.max(T::zero());
                    let sig = star.abs().max(lit::<T>(1e-12) * (T::one() + r));
                    let full = |s: T| diff(e, s) * s.powf(-alpha) * (s - star).powf(-alpha);
                    let mut acc = if star > T::zero() {
                        first.integrate(start, start + sig, |s| diff(e, s) * s.powf(-alpha))
                    } else {
                        first
                            .integrate(start, start + sig, |s| diff(e, s) * (s - star).powf(-alpha))
                    };
                    let mut a = start + sig;
                    let end = start + reach.max(sig * lit(2.0));
                    let mut width = sig;
                    while a < end {
                        let b = (a + width).min(end);
                        acc = acc + leg.integrate(a, b, full);
                        a = b;
                        width = width * lit(2.0);
                    }
                    // s = end / t on (0, 1]
                    let b = lit::<T>(2.0) * alpha - T::one();
                    acc = acc
                        + tail.integrate(T::zero(), T::one(), |t| {
                            let s = end / t;
                            full(s) * end / (t * t) / t.powf(b)
                        });
                    *w * acc
                })
                .collect();
            parts.into_iter().sum()
        }
    };
    let boundary = if side == Side::Left {
        let h = nf * lit(0.5);
        gamma(h)? / gamma(h - alpha)? * fx / xi.u().powf(alpha)
    } else {
        T::zero()
    };
    Ok(boundary + coef * total)
}

/// B^α_± φ tabulated on `radial` (and φ's angular grid), mode by mode.
pub fn ball_tabulate<T: Real>(
    p: &BallOperatorParams<T>,
    phi: &Density<T>,
    radial: RadialGrid<T>,
    decay: Decay<T>,
) -> Result<Density<T>> {
    if phi.n() != p.n {
        return Err(Error::input(
            "dimension mismatch between operator and density",
        ));
    }
    let g_alpha = gamma(p.alpha)?;
    let half = (from_usize::<T>(p.n) - lit(2.0)) * lit(0.5);
    let tail = Tail::of_field(phi);
    let inside = |u: T| match p.bound {
        Sided::Left { a } => u > a * a,
        Sided::Right { b } => b.is_none_or(|b| u < b * b),
    };
    let one_mode = |j: usize, prof: &dyn Fn(T) -> T, u: T| -> Result<T> {
        if !inside(u) {
            return Ok(T::zero());
        }
        let jh = from_usize::<T>(j) * lit(0.5);
        let v = match p.bound {
            Sided::Left { .. } => abel_u(
                p.bound,
                p.alpha,
                u,
                half + jh,
                T::zero(),
                jh,
                Tail::Finite(u),
                prof,
            )?,
            Sided::Right { .. } => {
                abel_u(p.bound, p.alpha, u, T::zero(), jh, T::zero(), tail, prof)?
            }
        };
        Ok(v / g_alpha)
    };
    let Some(ang) = phi.angular().cloned() else {
        let prof = |u: T| phi.zonal_at(u);
        let values = radial
            .nodes_u()
            .par_iter()
            .map(|&u| one_mode(0, &prof, u))
            .collect::<Result<Vec<T>>>()?;
        return Density::from_values(phi.surface(), p.n, radial, None, values, decay);
    };
    let profiles = analyze_modes(phi, ang.jmax())?;
    let src = phi.radial();
    let out = profiles
        .par_iter()
        .map(|pr| {
            let prof = |u: T| src.interpolate(&pr.radial_values, u);
            let radial_values = radial
                .nodes_u()
                .iter()
                .map(|&u| one_mode(pr.j, &prof, u))
                .collect::<Result<Vec<T>>>()?;
            Ok(crate::grids::ModeProfile {
                j: pr.j,
                k: pr.k,
                radial_values,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let grid = PolarGrid::new(phi.surface(), radial, ang)?;
    synthesize_modes(&out, &grid, decay)
}

/// Which ball operator acts first in the Riesz factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Composition {
    /// 2^{−α} B_+^{α/2} τ_{−α} B_−^{α/2}
    MinusFirst,
    /// 2^{−α} B_−^{α/2} τ_{−α} B_+^{α/2}
    PlusFirst,
}

/// I^α_ℝ φ(ξ) through two ball integrals of order α/2.
pub fn riesz_factorize_rn<T: Real>(
    alpha: T,
    phi: &Density<T>,
    xi: &PlanePoint<T>,
    order: Composition,
    radial_nodes: usize,
) -> Result<T> {
    let n = phi.n();
    let nf = from_usize::<T>(n);
    if !(alpha > T::zero() && alpha < nf) {
        return Err(Error::domain(format!(
            "Riesz order must lie in (0, {n}), got {alpha}"
        )));
    }
    let beta = alpha * lit(0.5);
    let (first, second) = match order {
        Composition::MinusFirst => (Side::Right, Side::Left),
        Composition::PlusFirst => (Side::Left, Side::Right),
    };
    let inner = BallOperatorParams::whole(beta, n, first)?;
    let decay = match (first, phi.decay()) {
        (Side::Right, d @ (Decay::Gaussian { .. } | Decay::Compact { .. })) => d,
        (Side::Right, Decay::Polynomial { power }) => Decay::Polynomial {
            power: power - alpha,
        },
        (Side::Left, Decay::Polynomial { power }) => Decay::Polynomial {
            power: power.min(nf) - alpha,
        },
        (Side::Left, _) => Decay::Polynomial { power: nf - alpha },
    };
    let radial = RadialGrid::new(
        crate::grids::Clustering::ChebyshevTheta,
        T::zero(),
        T::infinity(),
        radial_nodes,
    )?;
    let mid = ball_tabulate(&inner, phi, radial, decay)?;
    let weighted = Weighted::new(&mid, vec![Multiplier::Tau(-alpha)], T::one());
    let outer = BallOperatorParams::whole(beta, n, second)?;
    let v = ball_apply(&outer, &weighted, xi)?;
    Ok(lit::<T>(2.0).powf(-alpha) * v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac1d::radial_ball;
    use crate::grids::{Clustering, Surface};
    use approx::assert_relative_eq;

    fn gauss_zonal() -> Density<f64> {
        let r = RadialGrid::new(Clustering::ChebyshevR, 0.0, 40.0, 64).unwrap();
        Density::sample_zonal(
            Surface::Plane,
            2,
            r,
            Decay::Gaussian { rate: 1.0 },
            |u: f64| (-u).exp(),
        )
        .unwrap()
    }

    fn pt(r: f64, t: f64) -> PlanePoint<f64> {
        PlanePoint::new(r, &[t.cos(), t.sin()]).unwrap()
    }

    #[test]
    fn zonal_collapse() {
        let d = gauss_zonal();
        for side in [Side::Left, Side::Right] {
            let p = BallOperatorParams::whole(0.7, 2, side).unwrap();
            for k in 1..=50usize {
                let r = 0.06 * k as f64;
                let bound = match side {
                    Side::Left => Sided::Left { a: 0.0 },
                    Side::Right => Sided::Right { b: None },
                };
                let a = ball_apply(&p, &d, &pt(r, 0.3)).unwrap();
                let b = radial_ball(bound, 0.7, 2, &d, r).unwrap();
                assert!(
                    (a - b).abs() <= 1e-10 * b.abs().max(1e-300),
                    "{side:?} r={r}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn first_harmonic_beta_integral() {
        let r = RadialGrid::new(Clustering::ChebyshevR, 0.0, 4.0, 24).unwrap();
        let g = PolarGrid::new(
            Surface::Plane,
            r,
            Arc::new(AngularGrid::for_degree(2, 8).unwrap()),
        )
        .unwrap();
        let d = Density::sample_plane(&g, Decay::Compact { lo: 0.0, hi: 4.0 }, |x| {
            x.cartesian()[0]
        })
        .unwrap();
        let p = BallOperatorParams::whole(0.6, 2, Side::Left).unwrap();
        let xi = pt(0.9, 0.4);
        let want = 0.9f64.powf(1.2) * xi.cartesian()[0] / gamma(2.6).unwrap();
        assert_relative_eq!(ball_apply(&p, &d, &xi).unwrap(), want, max_relative = 1e-8);
        assert!(ball_apply(&p, &d, &pt(0.0, 0.0)).is_err());
    }

    #[test]
    fn kernel_examples() {
        let d = gauss_zonal();
        let xi = pt(1.2, 0.0);
        for side in [Side::Left, Side::Right] {
            assert_relative_eq!(
                marchaud_kernel(side, &d, &xi, 0.0).unwrap(),
                (-1.44f64).exp(),
                max_relative = 1e-9
            );
        }
        assert_eq!(marchaud_kernel(Side::Left, &d, &xi, -1.44).unwrap(), 0.0);
        assert_relative_eq!(
            marchaud_kernel(Side::Right, &d, &xi, -0.5).unwrap(),
            (-1.94f64).exp(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn gaussian_fixed_point_of_minus_inverse() {
        let d = gauss_zonal();
        let inv = InversionParams::new(0.5).unwrap();
        for r in [0.5f64, 1.0, 1.5] {
            let v = marchaud_invert(Side::Right, &inv, &d, &pt(r, 0.0)).unwrap();
            assert_relative_eq!(v.value, (-r * r).exp(), max_relative = 1e-4);
            assert!(v.diagnostics.converged);
        }
        let z = Density::sample_zonal(
            Surface::Plane,
            2,
            gauss_zonal().radial().clone(),
            Decay::Gaussian { rate: 1.0 },
            |_| 0.0,
        )
        .unwrap();
        assert_eq!(
            marchaud_invert(Side::Left, &inv, &z, &pt(1.0, 0.0))
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn plus_round_trip_on_radial_data() {
        let r = RadialGrid::new(Clustering::ChebyshevR, 0.0, 36.0, 64).unwrap();
        let g = |u: f64| u * (-u).exp();
        let src = Density::sample_zonal(
            Surface::Plane,
            2,
            r.clone(),
            Decay::Gaussian { rate: 1.0 },
            g,
        )
        .unwrap();
        let p = BallOperatorParams::whole(0.5, 2, Side::Left).unwrap();
        let f = ball_tabulate(&p, &src, r, Decay::Polynomial { power: 1.0 }).unwrap();
        let inv = InversionParams::new(0.5).unwrap();
        for rad in [0.5f64, 1.0, 2.0] {
            let v = marchaud_invert(Side::Left, &inv, &f, &pt(rad, 0.0)).unwrap();
            assert_relative_eq!(v.value, g(rad * rad), max_relative = 1e-2);
            let s = marchaud_simple(Side::Left, 0.5, &f, &pt(rad, 0.0)).unwrap();
            assert_relative_eq!(s, v.value, max_relative = 1e-2);
        }
    }

    #[test]
    fn simple_form_on_constants() {
        let d = Density::sample_zonal(
            Surface::Plane,
            2,
            RadialGrid::new(Clustering::ChebyshevU, 0.0, 16.0, 8).unwrap(),
            Decay::Polynomial { power: 0.0 },
            |_| 3.0,
        )
        .unwrap();
        let xi = pt(1.3, 0.0);
        let want = gamma(1.0).unwrap() / gamma(0.6).unwrap() * 3.0 / 1.69f64.powf(0.4);
        assert_relative_eq!(
            marchaud_simple(Side::Left, 0.4, &d, &xi).unwrap(),
            want,
            max_relative = 1e-12
        );
        assert!(marchaud_simple(Side::Left, 1.2, &d, &xi).is_err());
    }

    #[test]
    fn riesz_orders_agree() {
        let r = RadialGrid::new(Clustering::ChebyshevR, 0.0, 36.0, 48).unwrap();
        let d = Density::sample_zonal(
            Surface::Plane,
            2,
            r,
            Decay::Gaussian { rate: 1.0 },
            |u: f64| (-u).exp(),
        )
        .unwrap();
        let xi = pt(0.8, 0.0);
        let a = riesz_factorize_rn(1.0, &d, &xi, Composition::MinusFirst, 64).unwrap();
        let b = riesz_factorize_rn(1.0, &d, &xi, Composition::PlusFirst, 64).unwrap();
        // I¹ e^{−|x|²} in ℝ² = (√π/2) e^{−r²/2} I₀(r²/2)
        let z = 0.32f64;
        let i0 = (0..30)
            .map(|k| (z / 2.0).powi(2 * k) / gamma(k as f64 + 1.0).unwrap().powi(2))
            .sum::<f64>();
        let want = std::f64::consts::PI.sqrt() / 2.0 * (-z).exp() * i0;
        assert_relative_eq!(a, want, max_relative = 1e-6);
        assert_relative_eq!(a, b, max_relative = 1e-6);
    }
}
