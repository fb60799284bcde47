//! Riesz potentials on ℝⁿ, Sⁿ and spherical caps: direct quadrature, the
//! stereographic transport, factorizations into one-sided operators, and the
//! two-stage inversion on caps.

use rayon::prelude::*;

use crate::ballops::{direction_rule, Composition};
use crate::error::{Error, Result};
use crate::field::{PolarField, Weighted, ZeroExtend};
use crate::frac1d::{Side, Sided};
use crate::geometry::{
    height_to_u, stereo_forward, CapSpec, LayerSpec, Multiplier, PlanePoint, SpherePoint,
};
use crate::grids::{
    analyze_modes, synthesize_modes, Clustering, Decay, Density, ModeProfile, PolarGrid,
    RadialGrid, Surface,
};
use crate::marchaud::{Diagnostics, Inversion, InversionParams};
use crate::quadrature::{cached_jacobi, cached_legendre};
use crate::real::{from_usize, lit, Real};
use crate::special::riesz_constant;
use crate::sphereops::{
    cap_invert, field_at, mode_invert, sphere_apply, sphere_invert, sphere_tabulate,
    InversionRoute, Route, SphereOperatorParams,
};
use crate::surface::{band_integral, PolarRule, Singular};

/// Where the potential lives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RieszDomain<T> {
    /// A segment `⟨a, b⟩` of Sⁿ; `CapSpec::full()` is the whole sphere.
    Sphere(CapSpec<T>),
    /// A layer `r_min < |ξ| < r_max` of ℝⁿ.
    Plane(LayerSpec<T>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszProblem<T> {
    pub alpha: T,
    pub n: usize,
    pub domain: RieszDomain<T>,
}

impl<T: Real> RieszProblem<T> {
    pub fn new(alpha: T, n: usize, domain: RieszDomain<T>) -> Result<Self> {
        check_order(alpha, n)?;
        Ok(Self { alpha, n, domain })
    }

    pub fn sphere(alpha: T, n: usize) -> Result<Self> {
        Self::new(alpha, n, RieszDomain::Sphere(CapSpec::full()))
    }
}

fn check_order<T: Real>(alpha: T, n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::domain("dimension must be at least 2"));
    }
    if !(alpha > T::zero() && alpha < from_usize(n)) {
        return Err(Error::domain(format!(
            "Riesz order must lie in (0, {n}), got {alpha}"
        )));
    }
    Ok(())
}

/// Evaluation point matching the problem's domain.
#[derive(Debug, Clone, PartialEq)]
pub enum Target<T> {
    Sphere(SpherePoint<T>),
    Plane(PlanePoint<T>),
}

/// c_{n,α} ∫_Ω |t − τ|^{α−n} φ(τ) dτ by quadrature in polar coordinates
/// around the target.
pub fn riesz_direct<T: Real, F: PolarField<T> + ?Sized>(
    problem: &RieszProblem<T>,
    phi: &F,
    point: &Target<T>,
) -> Result<T> {
    check_order(problem.alpha, problem.n)?;
    if phi.n() != problem.n {
        return Err(Error::input(
            "dimension mismatch between problem and density",
        ));
    }
    match (&problem.domain, point) {
        (RieszDomain::Sphere(cap), Target::Sphere(x)) => direct_sphere(problem.alpha, cap, phi, x),
        (RieszDomain::Plane(layer), Target::Plane(xi)) => {
            direct_plane(problem.alpha, layer, phi, xi)
        }
        _ => Err(Error::input(
            "target point does not live on the problem's domain",
        )),
    }
}

fn direct_sphere<T: Real, F: PolarField<T> + ?Sized>(
    alpha: T,
    cap: &CapSpec<T>,
    phi: &F,
    x: &SpherePoint<T>,
) -> Result<T> {
    let n = phi.n();
    if x.dim() != n {
        return Err(Error::input("dimension mismatch between field and point"));
    }
    let c = riesz_constant::<T>(n, alpha)?;
    let p = alpha - from_usize(n);
    let sing = Singular {
        origin: alpha - T::one(),
        level: None,
    };
    let v = band_integral(x, cap.a, cap.b, sing, &PolarRule::default(), |y, chord| {
        chord.powf(p) * field_at(phi, y)
    })?;
    Ok(c * v)
}

/// Ray parameters s > 0 with |ξ + s e| = ρ.
fn crossings<T: Real>(xi: &[T], e: &[T], rho: T, out: &mut Vec<T>) {
    let b = xi.iter().zip(e).map(|(a, b)| *a * *b).sum::<T>();
    let c = xi.iter().map(|a| *a * *a).sum::<T>() - rho * rho;
    let disc = b * b - c;
    if disc > T::zero() {
        let d = disc.sqrt();
        out.extend([-b - d, -b + d].into_iter().filter(|s| *s > T::zero()));
    }
}

fn direct_plane<T: Real, F: PolarField<T> + ?Sized>(
    alpha: T,
    layer: &LayerSpec<T>,
    phi: &F,
    xi: &PlanePoint<T>,
) -> Result<T> {
    let n = phi.n();
    if xi.at_infinity {
        return Err(Error::Unsupported(
            "the plane potential is evaluated at finite points".into(),
        ));
    }
    let c = riesz_constant::<T>(n, alpha)?;
    let x = xi.cartesian();
    let r0 = xi.radius;
    let (slo, shi) = phi.support();
    let mut radii = vec![layer.r_min.max(slo.sqrt())];
    let outer = layer.r_max.map_or(shi.sqrt(), |m| m.min(shi.sqrt()));
    radii.push(outer);
    // the far end of the bulk region, and what lies beyond it
    let (far, tail) = if outer.is_finite() {
        (r0 + outer, None)
    } else {
        match phi.decay() {
            Decay::Gaussian { rate } => (r0 + (lit::<T>(40.0) / rate).sqrt(), None),
            Decay::Compact { hi, .. } => (r0 + hi.sqrt(), None),
            Decay::Polynomial { power } => {
                if !(power > alpha) {
                    return Err(Error::domain(format!(
                        "density decays like |ξ|^-{power}, too slowly for order {alpha}"
                    )));
                }
                (
                    lit::<T>(2.0) * r0 + lit(4.0),
                    Some(power - alpha - T::one()),
                )
            }
        }
    };
    let inside = |s: T, e: &[T]| {
        let rr = x
            .iter()
            .zip(e)
            .map(|(a, b)| (*a + s * *b) * (*a + s * *b))
            .sum::<T>()
            .sqrt();
        rr > layer.r_min && layer.r_max.is_none_or(|m| rr < m)
    };
    let value = |s: T, e: &[T]| {
        if inside(s, e) {
            shifted(phi, &x, e, s)
        } else {
            T::zero()
        }
    };
    let head = cached_jacobi::<T>(16, T::zero(), alpha - T::one())?;
    let leg = cached_legendre::<T>(16);
    let tail_rule = match tail {
        Some(e) => Some(cached_jacobi::<T>(24, T::zero(), e)?),
        None => None,
    };
    let dirs = direction_rule(&xi.direction, false, 16)?;
    let parts = dirs
        .par_iter()
        .map(|(e, w)| {
            let mut cuts = vec![T::zero(), far];
            for rho in &radii {
                if *rho > T::zero() && rho.is_finite() {
                    crossings(&x, e, *rho, &mut cuts);
                }
            }
            // closest approach to the origin
            let sc = -x.iter().zip(e.iter()).map(|(a, b)| *a * *b).sum::<T>();
            if sc > T::zero() {
                cuts.push(sc);
            }
            cuts.retain(|s| *s <= far);
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            cuts.dedup_by(|a, b| (*a - *b).abs() < lit(1e-13));
            let mut acc = T::zero();
            for seg in cuts.windows(2) {
                let (lo, hi) = (seg[0], seg[1]);
                let pieces = ((hi - lo) / lit(0.5)).ceil().to_usize().unwrap_or(1).max(1);
                let step = (hi - lo) / from_usize(pieces);
                for k in 0..pieces {
                    let a = lo + step * from_usize(k);
                    let b = a + step;
                    acc = acc
                        + if a == T::zero() {
                            head.integrate(a, b, |s| value(s, e))
                        } else {
                            leg.integrate(a, b, |s| s.powf(alpha - T::one()) * value(s, e))
                        };
                }
            }
            if let (Some(rule), Some(ex)) = (&tail_rule, tail) {
                // s = far / t
                acc = acc
                    + rule.integrate(T::zero(), T::one(), |t| {
                        far.powf(alpha) * t.powf(-alpha - T::one() - ex) * value(far / t, e)
                    });
            }
            *w * acc
        })
        .collect::<Vec<T>>();
    Ok(c * parts.into_iter().sum::<T>())
}

fn shifted<T: Real, F: PolarField<T> + ?Sized>(f: &F, x: &[T], e: &[T], s: T) -> T {
    let eta: Vec<T> = x.iter().zip(e).map(|(a, b)| *a + s * *b).collect();
    let u = eta.iter().map(|v| *v * *v).sum::<T>();
    let r = u.sqrt();
    if r == T::zero() {
        let mut d = vec![T::zero(); x.len()];
        d[0] = T::one();
        return f.value(u, &d);
    }
    let dir: Vec<T> = eta.iter().map(|v| *v / r).collect();
    f.value(u, &dir)
}

/// I^α_S φ(x) through the plane: `2^α r_{n−α} I^α_ℝ r_{−n−α} φ`.
pub fn riesz_sphere_transport<T: Real, F: PolarField<T> + ?Sized>(
    alpha: T,
    phi: &F,
    x: &SpherePoint<T>,
) -> Result<T> {
    let n = phi.n();
    check_order(alpha, n)?;
    if x.dim() != n {
        return Err(Error::input("dimension mismatch between field and point"));
    }
    let xi = stereo_forward(x);
    if xi.at_infinity {
        return Err(Error::Unsupported(
            "the transported potential is evaluated away from the north pole".into(),
        ));
    }
    let nf = from_usize::<T>(n);
    let w = Weighted::new(phi, vec![Multiplier::R(-nf - alpha)], T::one());
    let v = direct_plane(alpha, &LayerSpec::whole_space(), &w, &xi)?;
    Ok(lit::<T>(2.0).powf(alpha) * Multiplier::R(nf - alpha).eval_u(xi.u()) * v)
}

fn theta_grid<T: Real>(lo: T, hi: T, nodes: usize) -> Result<RadialGrid<T>> {
    RadialGrid::new(Clustering::ChebyshevTheta, lo, hi, nodes)
}

/// I^α_S through two one-sided operators of order α/2 with the inner stage
/// tabulated once; evaluate with [`SphereFactorization::at`].
///
/// The intermediate is stored divided by its pole factor (1 ∓ x_{n+1})^{α/2},
/// so the table stays smooth at the pole the inner operator integrates towards.
pub struct SphereFactorization<T: Real> {
    alpha: T,
    order: Composition,
    mid: Density<T>,
}

impl<T: Real> SphereFactorization<T> {
    pub fn new(
        alpha: T,
        phi: &Density<T>,
        order: Composition,
        radial_nodes: usize,
    ) -> Result<Self> {
        check_order(alpha, phi.n())?;
        if phi.surface() != Surface::Sphere {
            return Err(Error::input(
                "the sphere factorization needs a sphere density",
            ));
        }
        let beta = alpha * lit(0.5);
        let (first, mults) = match order {
            Composition::MinusFirst => (Side::Right, vec![Multiplier::T(-beta)]),
            Composition::PlusFirst => {
                (Side::Left, vec![Multiplier::Q(-alpha), Multiplier::T(beta)])
            }
        };
        let p = SphereOperatorParams::new(beta, phi.n(), first, Route::Modes)?;
        let mid = sphere_tabulate(
            &p,
            phi,
            theta_grid(T::zero(), T::infinity(), radial_nodes)?,
            &mults,
        )?;
        Ok(Self { alpha, order, mid })
    }

    pub fn at(&self, x: &SpherePoint<T>) -> Result<T> {
        let beta = self.alpha * lit(0.5);
        let (second, mults) = match self.order {
            Composition::MinusFirst => (
                Side::Left,
                vec![Multiplier::Q(-self.alpha), Multiplier::T(beta)],
            ),
            Composition::PlusFirst => (Side::Right, vec![Multiplier::T(-beta)]),
        };
        let outer = Weighted::new(&self.mid, mults, T::one());
        let mut p = SphereOperatorParams::new(beta, self.mid.n(), second, Route::Conjugated)?;
        p.grid = self.mid.angular().cloned();
        sphere_apply(&p, &outer, x)
    }
}

/// `S_+^{α/2} q_{−α} S_−^{α/2} φ` (or the commuted order) at one point.
pub fn riesz_sphere_factorized<T: Real>(
    alpha: T,
    phi: &Density<T>,
    x: &SpherePoint<T>,
    order: Composition,
    radial_nodes: usize,
) -> Result<T> {
    SphereFactorization::new(alpha, phi, order, radial_nodes)?.at(x)
}

/// Which one-sided segment of Sⁿ a cap is.
#[derive(Debug, Clone, Copy, PartialEq)]
enum CapKind<T> {
    /// ⟨−1, b⟩ with stereographic bound u_b.
    South(T),
    /// ⟨a, 1⟩ with stereographic bound u_a.
    North(T),
}

fn cap_kind<T: Real>(cap: &CapSpec<T>) -> Result<CapKind<T>> {
    if cap.a == -T::one() && cap.b == T::one() {
        return Err(Error::Unsupported(
            "use the full-sphere routines for Ω = Sⁿ".into(),
        ));
    }
    if cap.a == -T::one() {
        Ok(CapKind::South(height_to_u(cap.b).unwrap_or(T::infinity())))
    } else if cap.b == T::one() {
        Ok(CapKind::North(height_to_u(cap.a).unwrap_or(T::zero())))
    } else {
        Err(Error::Unsupported(
            "two-sided segments ⟨a, b⟩ are not factorized; use a cap containing a pole".into(),
        ))
    }
}

fn inside_cap<T: Real>(cap: &CapSpec<T>, x: &SpherePoint<T>) -> Result<()> {
    if x.height > cap.a && x.height < cap.b {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "point with height {} is not inside the cap",
            x.height
        )))
    }
}

/// I^α_Ω for a cap Ω through the cap-bounded and the full one-sided
/// operators of order α/2; the inner stage is tabulated once.
pub struct CapFactorization<T: Real> {
    alpha: T,
    cap: CapSpec<T>,
    kind: CapKind<T>,
    mid: Density<T>,
}

impl<T: Real> CapFactorization<T> {
    pub fn new(alpha: T, cap: CapSpec<T>, phi: &Density<T>, radial_nodes: usize) -> Result<Self> {
        check_order(alpha, phi.n())?;
        let kind = cap_kind(&cap)?;
        let beta = alpha * lit(0.5);
        let (side, grid) = match kind {
            CapKind::South(ub) => (Side::Right, theta_grid(T::zero(), ub, radial_nodes)?),
            CapKind::North(ua) => (Side::Left, theta_grid(ua, T::infinity(), radial_nodes)?),
        };
        let p = SphereOperatorParams::new(beta, phi.n(), side, Route::Modes)?.with_cap(cap);
        let mid = sphere_tabulate(&p, phi, grid, &[])?;
        Ok(Self {
            alpha,
            cap,
            kind,
            mid,
        })
    }

    pub fn at(&self, x: &SpherePoint<T>) -> Result<T> {
        inside_cap(&self.cap, x)?;
        let beta = self.alpha * lit(0.5);
        let w = Weighted::new(&self.mid, vec![Multiplier::Q(-self.alpha)], T::one());
        let (side, ext) = match self.kind {
            CapKind::South(ub) => (Side::Left, ZeroExtend::new(&w, T::zero(), ub)),
            CapKind::North(ua) => (Side::Right, ZeroExtend::new(&w, ua, T::infinity())),
        };
        let mut p = SphereOperatorParams::new(beta, self.mid.n(), side, Route::Conjugated)?;
        p.grid = self.mid.angular().cloned();
        sphere_apply(&p, &ext, x)
    }
}

/// I^α_Ω φ(x) on a cap containing a pole, by factorization.
pub fn cap_factorize<T: Real>(
    alpha: T,
    cap: CapSpec<T>,
    phi: &Density<T>,
    x: &SpherePoint<T>,
    radial_nodes: usize,
) -> Result<T> {
    CapFactorization::new(alpha, cap, phi, radial_nodes)?.at(x)
}

/// Order-α/2 inversion settings carrying the caller's ℓ, schedule and
/// extrapolation policy.
fn half_params<T: Real>(inv: &InversionParams<T>, beta: T) -> Result<InversionParams<T>> {
    let mut p = InversionParams::with_ell(beta, inv.ell)?
        .schedule(inv.schedule.clone())?
        .extrapolation(inv.extrapolation);
    p.rel_tol = inv.rel_tol;
    Ok(p)
}

/// Recovered value with the diagnostics of both inversion stages.
#[derive(Debug, Clone, PartialEq)]
pub struct StagedInversion<T> {
    pub value: T,
    /// One entry per node of the intermediate table.
    pub inner: Vec<Diagnostics<T>>,
    pub outer: Diagnostics<T>,
}

impl<T> StagedInversion<T> {
    pub fn converged(&self) -> bool {
        self.outer.converged && self.inner.iter().all(|d| d.converged)
    }
}

/// Inverse of I^α_Ω on a cap: `T_{b−}^{α/2} q_α T_+^{α/2}` (south cap) or
/// `T_{a+}^{α/2} q_α T_−^{α/2}` (north cap). The inner stage, already
/// multiplied by q_α, is tabulated once at construction.
pub struct CapRieszInverter<T: Real> {
    cap: CapSpec<T>,
    kind: CapKind<T>,
    half: InversionParams<T>,
    mid: Density<T>,
    inner: Vec<Diagnostics<T>>,
}

impl<T: Real> CapRieszInverter<T> {
    /// `inv` supplies ℓ, the ε schedule and the extrapolation policy; each
    /// stage inverts an operator of order α/2.
    pub fn new(
        alpha: T,
        cap: CapSpec<T>,
        f: &Density<T>,
        inv: &InversionParams<T>,
        radial_nodes: usize,
    ) -> Result<Self> {
        let n = f.n();
        check_order(alpha, n)?;
        let kind = cap_kind(&cap)?;
        let half = half_params(inv, alpha * lit(0.5))?;
        let (side, radial) = match kind {
            CapKind::South(ub) => (Side::Left, theta_grid(T::zero(), ub, radial_nodes)?),
            CapKind::North(ua) => (Side::Right, theta_grid(ua, T::infinity(), radial_nodes)?),
        };
        let q = Multiplier::Q(alpha);
        let angular = f.angular().cloned();
        let dirs: Vec<Vec<T>> = match &angular {
            Some(a) => (0..a.len()).map(|i| a.dir(i).to_vec()).collect(),
            None => {
                let mut d = vec![T::zero(); n];
                d[0] = T::one();
                vec![d]
            }
        };
        let jobs: Vec<(T, &Vec<T>)> = radial
            .nodes_u()
            .iter()
            .flat_map(|&u| dirs.iter().map(move |d| (u, d)))
            .collect();
        let stage = jobs
            .par_iter()
            .map(|(u, d)| {
                let x = crate::grids::sphere_point(*u, d);
                let r = sphere_invert(side, &half, f, &x, InversionRoute::Conjugated)?;
                Ok((r.value * q.eval_u(*u), r.diagnostics))
            })
            .collect::<Result<Vec<_>>>()?;
        let (values, inner): (Vec<T>, Vec<Diagnostics<T>>) = stage.into_iter().unzip();
        let mid = Density::from_values(
            Surface::Sphere,
            n,
            radial,
            angular,
            values,
            Decay::Polynomial { power: T::zero() },
        )?;
        Ok(Self {
            cap,
            kind,
            half,
            mid,
            inner,
        })
    }

    /// The tabulated `q_α T^{α/2} f`.
    pub fn intermediate(&self) -> &Density<T> {
        &self.mid
    }

    pub fn at(&self, x: &SpherePoint<T>) -> Result<StagedInversion<T>> {
        inside_cap(&self.cap, x)?;
        let bound = match self.kind {
            CapKind::South(_) => Sided::Right {
                b: Some(self.cap.b),
            },
            CapKind::North(_) => Sided::Left { a: self.cap.a },
        };
        let r = cap_invert(bound, &self.half, &self.mid, x)?;
        Ok(StagedInversion {
            value: r.value,
            inner: self.inner.clone(),
            outer: r.diagnostics,
        })
    }
}

/// φ(x) from f = I^α_Ω φ on a cap containing a pole.
pub fn cap_invert_riesz<T: Real>(
    alpha: T,
    cap: CapSpec<T>,
    f: &Density<T>,
    inv: &InversionParams<T>,
    x: &SpherePoint<T>,
    radial_nodes: usize,
) -> Result<StagedInversion<T>> {
    CapRieszInverter::new(alpha, cap, f, inv, radial_nodes)?.at(x)
}

/// Conditioning report for one harmonic.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCondition<T> {
    pub j: usize,
    pub k: usize,
    /// max |φ_{j,k}| / max |f_{j,k}| over the radial nodes.
    pub amplification: T,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct ModeInversion<T> {
    pub density: Density<T>,
    pub conditions: Vec<ModeCondition<T>>,
}

impl<T: Real> ModeInversion<T> {
    /// Modes whose amplification exceeds `limit` or whose inversion stalled.
    pub fn ill_conditioned(&self, limit: T) -> Vec<(usize, usize)> {
        self.conditions
            .iter()
            .filter(|c| !c.converged || !(c.amplification <= limit))
            .map(|c| (c.j, c.k))
            .collect()
    }
}

/// Cap inversion harmonic by harmonic: each coefficient solves two
/// Abel-type equations in u, in the order of the cap factorization.
/// The result lives on `f`'s grid.
pub fn mode_invert_cap<T: Real>(
    alpha: T,
    cap: CapSpec<T>,
    f: &Density<T>,
    inv: &InversionParams<T>,
    radial_nodes: usize,
) -> Result<ModeInversion<T>> {
    let n = f.n();
    check_order(alpha, n)?;
    if !matches!(n, 2 | 3) {
        return Err(Error::Unsupported(
            "the mode route exists for n = 2, 3 only".into(),
        ));
    }
    let kind = cap_kind(&cap)?;
    let half = half_params(inv, alpha * lit(0.5))?;
    let (first, second, support, mid_grid) = match kind {
        CapKind::South(ub) => (
            Side::Left,
            Side::Right,
            (T::zero(), ub),
            theta_grid(T::zero(), ub, radial_nodes)?,
        ),
        CapKind::North(ua) => (
            Side::Right,
            Side::Left,
            (ua, T::infinity()),
            theta_grid(ua, T::infinity(), radial_nodes)?,
        ),
    };
    let q = Multiplier::Q(alpha);
    let src = f.radial();
    let jmax = f.angular().map_or(0, |a| a.jmax());
    let profiles = analyze_modes(f, jmax)?;
    let solved = profiles
        .par_iter()
        .map(|pr| {
            let scale = pr
                .radial_values
                .iter()
                .fold(T::zero(), |m, v| m.max(v.abs()));
            if scale == T::zero() {
                let cond = ModeCondition {
                    j: pr.j,
                    k: pr.k,
                    amplification: T::zero(),
                    converged: true,
                };
                return Ok((
                    ModeProfile {
                        j: pr.j,
                        k: pr.k,
                        radial_values: vec![T::zero(); src.len()],
                    },
                    cond,
                ));
            }
            let prof = |u: T| src.interpolate(&pr.radial_values, u);
            let mut converged = true;
            let mut mid = Vec::with_capacity(mid_grid.len());
            for &u in mid_grid.nodes_u() {
                let r = mode_invert(first, &half, n, pr.j, &prof, support, u)?;
                converged &= r.diagnostics.converged;
                mid.push(q.eval_u(u) * r.value);
            }
            let mid_prof = |u: T| mid_grid.interpolate(&mid, u);
            let mut out = Vec::with_capacity(src.len());
            for &u in src.nodes_u() {
                let inside = u > support.0 && u < support.1;
                let r = if inside {
                    mode_invert(second, &half, n, pr.j, &mid_prof, support, u)?
                } else {
                    Inversion::zero()
                };
                converged &= r.diagnostics.converged;
                out.push(r.value);
            }
            let peak = out.iter().fold(T::zero(), |m, v| m.max(v.abs()));
            let cond = ModeCondition {
                j: pr.j,
                k: pr.k,
                amplification: peak / scale,
                converged,
            };
            Ok((
                ModeProfile {
                    j: pr.j,
                    k: pr.k,
                    radial_values: out,
                },
                cond,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let (modes, conditions): (Vec<_>, Vec<_>) = solved.into_iter().unzip();
    let decay = Decay::Compact {
        lo: support.0,
        hi: support.1,
    };
    let density = match f.angular() {
        Some(a) => synthesize_modes(
            &modes,
            &PolarGrid::new(Surface::Sphere, src.clone(), a.clone())?,
            decay,
        )?,
        None => {
            let root = crate::special::sphere_area::<T>(n).sqrt();
            let values = modes[0].radial_values.iter().map(|v| *v / root).collect();
            Density::from_values(Surface::Sphere, n, src.clone(), None, values, decay)?
        }
    };
    Ok(ModeInversion {
        density,
        conditions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::zonal_fn;
    use approx::assert_relative_eq;

    fn sphere_const(nodes: usize) -> Density<f64> {
        let r = theta_grid(0.0, f64::INFINITY, nodes).unwrap();
        Density::sample_zonal(
            Surface::Sphere,
            2,
            r,
            Decay::Polynomial { power: 0.0 },
            |_| 1.0,
        )
        .unwrap()
    }

    fn at(h: f64) -> SpherePoint<f64> {
        SpherePoint::from_height(h, &[0.6, 0.8]).unwrap()
    }

    #[test]
    fn unit_disk_at_centre() {
        let one = zonal_fn(2, Decay::Polynomial { power: 0.0 }, |_| 1.0f64);
        let layer = LayerSpec::new(0.0, Some(1.0)).unwrap();
        let p = RieszProblem::new(1.0, 2, RieszDomain::Plane(layer)).unwrap();
        let xi = PlanePoint::new(0.0, &[1.0, 0.0]).unwrap();
        assert_relative_eq!(
            riesz_direct(&p, &one, &Target::Plane(xi)).unwrap(),
            1.0,
            max_relative = 1e-10
        );
        let zero = zonal_fn(2, Decay::Polynomial { power: 0.0 }, |_| 0.0f64);
        let xi = PlanePoint::new(0.4, &[1.0, 0.0]).unwrap();
        assert_eq!(riesz_direct(&p, &zero, &Target::Plane(xi)).unwrap(), 0.0);
    }

    #[test]
    fn sphere_constant_all_routes() {
        let p = RieszProblem::sphere(1.0, 2).unwrap();
        let d = sphere_const(48);
        let minus = SphereFactorization::new(1.0, &d, Composition::MinusFirst, 48).unwrap();
        let plus = SphereFactorization::new(1.0, &d, Composition::PlusFirst, 48).unwrap();
        for h in [-0.7, -0.1, 0.3, 0.8] {
            let x = at(h);
            assert_relative_eq!(
                riesz_direct(&p, &d, &Target::Sphere(x.clone())).unwrap(),
                2.0,
                max_relative = 1e-4
            );
            assert_relative_eq!(
                riesz_sphere_transport(1.0, &d, &x).unwrap(),
                2.0,
                max_relative = 1e-3
            );
            let a = minus.at(&x).unwrap();
            let b = plus.at(&x).unwrap();
            assert_relative_eq!(a, 2.0, max_relative = 1e-3);
            assert_relative_eq!(a, b, max_relative = 1e-6);
        }
    }

    #[test]
    fn sphere_routes_agree_on_zonal_data() {
        let r = theta_grid(0.0, f64::INFINITY, 64).unwrap();
        let d = Density::sample_zonal(
            Surface::Sphere,
            2,
            r,
            Decay::Polynomial { power: 0.0 },
            |u| {
                if u.is_finite() {
                    (-(u - 1.0).powi(2)).exp()
                } else {
                    0.0
                }
            },
        )
        .unwrap();
        let p = RieszProblem::sphere(1.0, 2).unwrap();
        let fac = SphereFactorization::new(1.0, &d, Composition::MinusFirst, 64).unwrap();
        for h in [-0.5, 0.0, 0.5] {
            let x = at(h);
            let a = riesz_direct(&p, &d, &Target::Sphere(x.clone())).unwrap();
            assert_relative_eq!(
                riesz_sphere_transport(1.0, &d, &x).unwrap(),
                a,
                max_relative = 1e-3
            );
            assert_relative_eq!(fac.at(&x).unwrap(), a, max_relative = 1e-3);
        }
    }

    #[test]
    fn cap_factorization_matches_direct() {
        let cap = CapSpec::new(-1.0, 0.0).unwrap();
        let ub = 1.0;
        let r = theta_grid(0.0, ub, 48).unwrap();
        let d = Density::sample_zonal(
            Surface::Sphere,
            2,
            r,
            Decay::Compact { lo: 0.0, hi: ub },
            |_| 1.0,
        )
        .unwrap();
        let p = RieszProblem::new(1.0, 2, RieszDomain::Sphere(cap)).unwrap();
        let fac = CapFactorization::new(1.0, cap, &d, 48).unwrap();
        for h in [-0.8, -0.5, -0.2] {
            let x = at(h);
            let want = riesz_direct(&p, &d, &Target::Sphere(x.clone())).unwrap();
            assert_relative_eq!(fac.at(&x).unwrap(), want, max_relative = 5e-3);
        }
        assert!(CapFactorization::new(1.0, CapSpec::new(-0.5, 0.5).unwrap(), &d, 48).is_err());
    }

    fn bump(u: f64) -> f64 {
        if !u.is_finite() {
            return 0.0;
        }
        let h = (u - 1.0) / (u + 1.0);
        if h > 0.2 {
            (h - 0.2).powi(2) * (1.0 - h).powi(2) * 10.0
        } else {
            0.0
        }
    }

    fn manufactured(nodes: usize) -> (CapSpec<f64>, Density<f64>) {
        let cap = CapSpec::new(0.2, 1.0).unwrap();
        let ua = height_to_u(0.2).unwrap();
        let phi = zonal_fn(2, Decay::Polynomial { power: 0.0 }, bump);
        let p = RieszProblem::new(1.0, 2, RieszDomain::Sphere(cap)).unwrap();
        let r = theta_grid(ua, f64::INFINITY, nodes).unwrap();
        let vals = r
            .nodes_u()
            .iter()
            .map(|&u| {
                riesz_direct(
                    &p,
                    &phi,
                    &Target::Sphere(crate::grids::sphere_point(u, &[1.0, 0.0])),
                )
                .unwrap()
            })
            .collect();
        (
            cap,
            Density::from_values(
                Surface::Sphere,
                2,
                r,
                None,
                vals,
                Decay::Polynomial { power: 0.0 },
            )
            .unwrap(),
        )
    }

    #[test]
    fn cap_inversion_round_trip() {
        let (cap, f) = manufactured(48);
        let inv = InversionParams::new(1.0).unwrap();
        let pipe = CapRieszInverter::new(1.0, cap, &f, &inv, 48).unwrap();
        let modes = mode_invert_cap(1.0, cap, &f, &inv, 48).unwrap();
        // nodes hugging the cap edge are flagged as unconverged; only the
        // amplification is checked here
        assert!(modes.conditions.iter().all(|c| c.amplification < 10.0));
        for h in [0.35, 0.5, 0.65, 0.8] {
            let x = at(h);
            let want = bump(x.u().unwrap());
            let got = pipe.at(&x).unwrap();
            assert!(got.converged());
            assert_relative_eq!(got.value, want, max_relative = 1e-4);
            assert_relative_eq!(
                modes.density.zonal_at(x.u().unwrap()),
                got.value,
                max_relative = 1e-4
            );
        }
        assert!(pipe.at(&at(0.1)).is_err());
    }

    #[test]
    fn zero_data_inverts_to_zero() {
        let cap = CapSpec::new(-1.0, 0.3).unwrap();
        let r = theta_grid(0.0, height_to_u(0.3).unwrap(), 16).unwrap();
        let f = Density::sample_zonal(
            Surface::Sphere,
            2,
            r,
            Decay::Polynomial { power: 0.0 },
            |_| 0.0,
        )
        .unwrap();
        let inv = InversionParams::new(1.0).unwrap();
        assert_eq!(
            cap_invert_riesz(1.0, cap, &f, &inv, &at(-0.2), 16)
                .unwrap()
                .value,
            0.0
        );
        let m = mode_invert_cap(1.0, cap, &f, &inv, 16).unwrap();
        assert!(m.density.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn single_harmonic_by_modes() {
        let cap = CapSpec::new(0.2, 1.0).unwrap();
        let ua = height_to_u(0.2).unwrap();
        let g = PolarGrid::new(
            Surface::Sphere,
            theta_grid(ua, f64::INFINITY, 40).unwrap(),
            std::sync::Arc::new(crate::grids::AngularGrid::for_degree(2, 2).unwrap()),
        )
        .unwrap();
        let phi =
            crate::field::FnField::new(2, Decay::Polynomial { power: 0.0 }, |u: f64, d: &[f64]| {
                bump(u) * d[0]
            });
        let p = RieszProblem::new(1.0, 2, RieszDomain::Sphere(cap)).unwrap();
        let f = Density::sample_polar(&g, Decay::Polynomial { power: 0.0 }, |u, d| {
            riesz_direct(&p, &phi, &Target::Sphere(crate::grids::sphere_point(u, d))).unwrap()
        })
        .unwrap();
        let inv = InversionParams::new(1.0).unwrap();
        let m = mode_invert_cap(1.0, cap, &f, &inv, 40).unwrap();
        for h in [0.4, 0.6, 0.8] {
            let x = SpherePoint::from_height(h, &[0.6, 0.8]).unwrap();
            let u = x.u().unwrap();
            assert_relative_eq!(
                m.density.value(u, &x.direction),
                bump(u) * 0.6,
                max_relative = 1e-2
            );
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(12))]
        #[test]
        fn linear_and_positive(a in -2.0f64..2.0, b in -2.0f64..2.0, h in -0.9f64..0.9, alpha in 0.3f64..1.7) {
            let f = |u: f64, d: &[f64]| if u.is_finite() { (1.0 + d[0]) / (1.0 + u) } else { 0.0 };
            let g = |u: f64, _: &[f64]| if u.is_finite() { (-u).exp() } else { 0.0 };
            let flat = Decay::Polynomial { power: 0.0 };
            let ff = crate::field::FnField::new(2, flat, f);
            let gg = crate::field::FnField::new(2, flat, g);
            let sum = crate::field::FnField::new(2, flat, move |u: f64, d: &[f64]| a * f(u, d) + b * g(u, d));
            let p = RieszProblem::sphere(alpha, 2).unwrap();
            let x = Target::Sphere(at(h));
            let vf = riesz_direct(&p, &ff, &x).unwrap();
            let vg = riesz_direct(&p, &gg, &x).unwrap();
            let vs = riesz_direct(&p, &sum, &x).unwrap();
            proptest::prop_assert!((vs - a * vf - b * vg).abs() <= 1e-12 * (vf.abs() + vg.abs()) * 4.0);
            proptest::prop_assert!(vf >= 0.0 && vg >= 0.0);
        }
    }
}
