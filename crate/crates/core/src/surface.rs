//! Surface integrals over height bands of Sⁿ in geodesic polar coordinates
//! centred at the target point.
//!
//! `y = cos ω x + sin ω ζ` with ζ a unit tangent vector at x; the height
//! along the geodesic is `A cos(ω − δ)`, so band boundaries are explicit
//! roots in ω.

use rayon::prelude::*;

use crate::ballops::graded_rule;
use crate::error::{Error, Result};
use crate::geometry::SpherePoint;
use crate::quadrature::{cached_jacobi, cached_legendre};
use crate::real::{from_usize, lit, Real};

/// Endpoint behaviour of the radial (ω) integrand, measure included.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Singular<T> {
    /// Exponent of ω at ω = 0.
    pub origin: T,
    /// Height level where the integrand behaves like |h − level|^exponent.
    pub level: Option<(T, T)>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct PolarRule {
    pub order: usize,
    pub angular_order: usize,
    pub levels: usize,
}

impl Default for PolarRule {
    fn default() -> Self {
        Self {
            order: 16,
            angular_order: 12,
            levels: 8,
        }
    }
}

/// `(u, ξ′)` of a Cartesian point on Sⁿ.
pub(crate) fn stereo_of<T: Real>(y: &[T]) -> (T, Vec<T>) {
    let n = y.len() - 1;
    let h = y[n];
    let rho = y[..n].iter().map(|v| *v * *v).sum::<T>().sqrt();
    let mut dir = vec![T::zero(); n];
    if rho == T::zero() {
        dir[0] = T::one();
        return (
            if h > T::zero() {
                T::infinity()
            } else {
                T::zero()
            },
            dir,
        );
    }
    for (d, v) in dir.iter_mut().zip(y) {
        *d = *v / rho;
    }
    let r = if h > T::zero() {
        rho / (T::one() - h)
    } else {
        (T::one() + h) / rho
    };
    (r * r, dir)
}

/// Cartesian x and an orthonormal tangent basis whose first vector points
/// towards increasing height.
pub(crate) fn tangent_frame<T: Real>(x: &SpherePoint<T>) -> (Vec<T>, Vec<Vec<T>>) {
    let n = x.dim();
    let xc = x.cartesian();
    let (c, s) = (x.theta.cos(), x.theta.sin());
    let mut up: Vec<T> = x.direction.iter().map(|d| *d * c).collect();
    up.push(s);
    let mut basis = vec![up];
    for w in crate::ballops::frame(&x.direction) {
        let mut v = w;
        v.push(T::zero());
        basis.push(v);
    }
    debug_assert_eq!(basis.len(), n);
    (xc, basis)
}

/// Unit tangent directions with weights, graded at the angles `kinks`
/// (in [0, π], measured from the upward tangent) and where ζ is horizontal.
fn tangent_rule<T: Real>(n: usize, rule: &PolarRule, kinks: &[T]) -> Result<Vec<(Vec<T>, T)>> {
    let half = T::FRAC_PI_2();
    let mut cuts = vec![T::zero(), half, T::PI()];
    cuts.extend(
        kinks
            .iter()
            .copied()
            .filter(|k| *k > T::zero() && *k < T::PI()),
    );
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    cuts.dedup_by(|a, b| (*a - *b).abs() < lit(1e-12));
    let mut chis = Vec::new();
    for c in cuts.windows(2) {
        let ends = (c[0] > T::zero(), c[1] < T::PI());
        chis.extend(graded_rule(
            c[0],
            c[1],
            ends.0,
            ends.1,
            rule.levels,
            rule.angular_order,
        ));
    }
    let mut out = Vec::new();
    match n {
        2 => {
            for (chi, w) in chis {
                for sgn in [T::one(), -T::one()] {
                    out.push((vec![chi.cos(), sgn * chi.sin()], w));
                }
            }
        }
        3 => {
            let m = 2 * rule.angular_order;
            let db = T::TAU() / from_usize(m);
            for (chi, w) in chis {
                for k in 0..m {
                    let b = db * from_usize(k);
                    let s = chi.sin();
                    out.push((vec![chi.cos(), s * b.cos(), s * b.sin()], w * s * db));
                }
            }
        }
        _ => {
            return Err(Error::Unsupported(
                "surface quadrature exists for n = 2, 3 only".into(),
            ))
        }
    }
    Ok(out)
}

/// Angles χ where the geodesics from x become tangent to `{h = level}`.
fn tangency<T: Real>(h0: T, sin_theta: T, level: T, out: &mut Vec<T>) {
    if !(level > -T::one() && level < T::one()) || sin_theta == T::zero() {
        return;
    }
    let q = (level * level - h0 * h0) / (sin_theta * sin_theta);
    if q > T::zero() && q < T::one() {
        let c = q.sqrt();
        out.push(c.acos());
        out.push((-c).acos());
    }
}

fn roots_in<T: Real>(a: T, delta: T, level: T, out: &mut Vec<T>) {
    if !(level.abs() < a) {
        return;
    }
    let g = (level / a).acos();
    let tiny = lit::<T>(1e-13);
    for base in [delta + g, delta - g] {
        for shift in [-T::TAU(), T::zero(), T::TAU()] {
            let w = base + shift;
            if w > tiny && w < T::PI() - tiny {
                out.push(w);
            }
        }
    }
}

/// ∫ over `{lo_h < y_{n+1} < hi_h}` of `k(y, |x − y|) dy`.
pub(crate) fn band_integral<T: Real, K: Fn(&[T], T) -> T + Sync>(
    x: &SpherePoint<T>,
    lo_h: T,
    hi_h: T,
    sing: Singular<T>,
    rule: &PolarRule,
    k: K,
) -> Result<T> {
    let n = x.dim();
    let (xc, basis) = tangent_frame(x);
    let h0 = xc[n];
    let mut kinks = Vec::new();
    let st = x.theta.sin();
    for l in [lo_h, hi_h] {
        tangency(h0, st, l, &mut kinks);
    }
    let dirs = tangent_rule::<T>(n, rule, &kinks)?;
    let first_order = rule.order;
    let leg = cached_legendre::<T>(first_order);
    let parts: Result<Vec<T>> = dirs
        .par_iter()
        .map(|(coef, wz)| -> Result<T> {
            let mut zeta = vec![T::zero(); n + 1];
            for (cf, b) in coef.iter().zip(&basis) {
                for (z, bv) in zeta.iter_mut().zip(b) {
                    *z = *z + *cf * *bv;
                }
            }
            let c = zeta[n];
            let a = (h0 * h0 + c * c).sqrt();
            let delta = c.atan2(h0);
            let height = |w: T| h0 * w.cos() + c * w.sin();
            let mut cuts = vec![T::zero(), T::PI()];
            let mut level_roots = Vec::new();
            for l in [lo_h, hi_h] {
                if l > -T::one() && l < T::one() {
                    roots_in(a, delta, l, &mut cuts);
                }
            }
            if let Some((lv, _)) = sing.level {
                roots_in(a, delta, lv, &mut level_roots);
                cuts.extend(level_roots.iter().copied());
            }
            cuts.sort_by(|p, q| p.partial_cmp(q).unwrap_or(std::cmp::Ordering::Equal));
            cuts.dedup_by(|p, q| (*p - *q).abs() < lit(1e-14));
            let lvl_exp = sing.level.map_or(T::zero(), |(_, e)| e);
            let is_level = |w: T| level_roots.iter().any(|r| (*r - w).abs() < lit(1e-14));
            let point = |w: T| -> Vec<T> {
                xc.iter()
                    .zip(&zeta)
                    .map(|(p, z)| w.cos() * *p + w.sin() * *z)
                    .collect()
            };
            let f = |w: T| {
                let y = point(w);
                let chord = lit::<T>(2.0) * (w * lit(0.5)).sin();
                k(&y, chord) * w.sin().powi(n as i32 - 1)
            };
            let mut acc = T::zero();
            for seg in cuts.windows(2) {
                let (lo, hi) = (seg[0], seg[1]);
                let mid = height((lo + hi) * lit(0.5));
                if !(mid > lo_h && mid < hi_h) {
                    continue;
                }
                let eb = if lo == T::zero() {
                    sing.origin
                } else if is_level(lo) {
                    lvl_exp
                } else {
                    T::zero()
                };
                let ea = if is_level(hi) { lvl_exp } else { T::zero() };
                // geometric cuts away from a nearby ω = 0 singularity
                let mut sub = vec![lo];
                if lo > T::zero() && sing.origin != T::zero() {
                    let mut p = lo * lit(2.0);
                    while p < hi * lit(0.75) {
                        sub.push(p);
                        p = p * lit(2.0);
                    }
                }
                sub.push(hi);
                let m = sub.len() - 1;
                for (i, s) in sub.windows(2).enumerate() {
                    let (p, q) = (s[0], s[1]);
                    let wa = if i + 1 == m { ea } else { T::zero() };
                    let wb = if i == 0 { eb } else { T::zero() };
                    acc = acc
                        + if wa == T::zero() && wb == T::zero() {
                            leg.integrate(p, q, f)
                        } else {
                            cached_jacobi(first_order, wa, wb)?
                                .integrate(p, q, |w| f(w) / ((q - w).powf(wa) * (w - p).powf(wb)))
                        };
                }
            }
            Ok(*wz * acc)
        })
        .collect();
    Ok(parts?.into_iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn band_areas() {
        // area of {a < h < b} on S² is 2π(b − a)
        let x = SpherePoint::from_height(0.3f64, &[1.0, 0.0]).unwrap();
        let s = Singular {
            origin: 1.0,
            level: None,
        };
        let r = PolarRule::default();
        let full = band_integral(&x, -1.0, 1.0, s, &r, |_, _| 1.0).unwrap();
        assert_relative_eq!(full, 4.0 * std::f64::consts::PI, max_relative = 1e-10);
        let band = band_integral(&x, -0.2, 0.5, s, &r, |_, _| 1.0).unwrap();
        assert_relative_eq!(band, 2.0 * std::f64::consts::PI * 0.7, max_relative = 1e-6);
        let x3 = SpherePoint::from_height(-0.4f64, &[0.0, 1.0, 0.0]).unwrap();
        let s3 = Singular {
            origin: 2.0,
            level: None,
        };
        let area = band_integral(&x3, -1.0, 1.0, s3, &r, |_, _| 1.0).unwrap();
        assert_relative_eq!(
            area,
            2.0 * std::f64::consts::PI.powi(2),
            max_relative = 1e-8
        );
    }

    #[test]
    fn stereo_coordinates() {
        let x = SpherePoint::from_height(0.6f64, &[0.6, 0.8]).unwrap();
        let (u, d) = stereo_of(&x.cartesian());
        assert_relative_eq!(u, 1.6 / 0.4, max_relative = 1e-14);
        assert_relative_eq!(d[1], 0.8, max_relative = 1e-14);
    }
}
