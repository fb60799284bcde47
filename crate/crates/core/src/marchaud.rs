//! Truncated Marchaud integrals along a ray with a geometric ε schedule.
//!
//! A ray function `g(v) = A(−v)`, `v ≥ 0`, is turned into
//! `(1/κ) ∫_ε^∞ Σ_j C(ℓ,j)(−1)^j g(jτ) τ^{−1−α} dτ` for every ε of the
//! schedule; the sequence is then extrapolated.

use crate::error::{Error, Result};
use crate::quadrature::adaptive;
use crate::real::{from_usize, lit, Real};
use crate::special::{binomial, marchaud_constant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extrapolation {
    None,
    Richardson,
}

/// Decreasing truncation levels.
#[derive(Debug, Clone, PartialEq)]
pub enum EpsSchedule<T> {
    /// `ε_k = ratio^k · scale · R`, where R is the reference scale of the target
    /// (`|ξ|²` for ball inverses); R = 0 falls back to `scale`.
    Geometric {
        scale: T,
        ratio: T,
        terms: usize,
    },
    Explicit(Vec<T>),
}

impl<T: Real> EpsSchedule<T> {
    pub fn levels(&self, reference: T) -> Vec<T> {
        match self {
            EpsSchedule::Geometric {
                scale,
                ratio,
                terms,
            } => {
                let base = if reference > T::zero() {
                    *scale * reference
                } else {
                    *scale
                };
                (0..*terms).map(|k| base * ratio.powi(k as i32)).collect()
            }
            EpsSchedule::Explicit(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionParams<T> {
    pub alpha: T,
    pub ell: usize,
    pub schedule: EpsSchedule<T>,
    pub extrapolation: Extrapolation,
    pub kappa: T,
    pub rel_tol: T,
}

impl<T: Real> InversionParams<T> {
    /// Minimal admissible ℓ = ⌊α⌋ + 1 with the default schedule.
    pub fn new(alpha: T) -> Result<Self> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(Error::domain(format!(
                "fractional order must be positive, got {alpha}"
            )));
        }
        let ell = alpha.floor().to_usize().unwrap_or(0) + 1;
        Self::with_ell(alpha, ell)
    }

    pub fn with_ell(alpha: T, ell: usize) -> Result<Self> {
        let kappa = marchaud_constant(alpha, ell)?;
        Ok(Self {
            alpha,
            ell,
            schedule: EpsSchedule::Geometric {
                scale: lit(0.1),
                ratio: lit(0.5),
                terms: 8,
            },
            extrapolation: Extrapolation::Richardson,
            kappa,
            rel_tol: lit(1e-10),
        })
    }

    pub fn schedule(mut self, schedule: EpsSchedule<T>) -> Result<Self> {
        if let EpsSchedule::Geometric {
            scale,
            ratio,
            terms,
        } = &schedule
        {
            if !(*scale > T::zero()) || !(*ratio > T::zero() && *ratio < T::one()) || *terms == 0 {
                return Err(Error::domain(
                    "geometric schedule needs scale > 0, 0 < ratio < 1, terms >= 1",
                ));
            }
        }
        if let EpsSchedule::Explicit(v) = &schedule {
            if v.is_empty()
                || v.iter().any(|e| !(*e > T::zero()))
                || v.windows(2).any(|w| !(w[1] < w[0]))
            {
                return Err(Error::domain(
                    "ε schedule must be positive and strictly decreasing",
                ));
            }
        }
        self.schedule = schedule;
        Ok(self)
    }

    pub fn extrapolation(mut self, e: Extrapolation) -> Self {
        self.extrapolation = e;
        self
    }
}

/// Values for every ε plus successive differences.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics<T> {
    pub eps: Vec<T>,
    pub values: Vec<T>,
    pub diffs: Vec<T>,
    pub converged: bool,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inversion<T> {
    pub value: T,
    pub diagnostics: Diagnostics<T>,
}

impl<T: Real> Inversion<T> {
    pub(crate) fn scaled(mut self, s: T) -> Self {
        self.value = self.value * s;
        self.diagnostics.values.iter_mut().for_each(|v| *v = *v * s);
        self.diagnostics
            .diffs
            .iter_mut()
            .for_each(|v| *v = *v * s.abs());
        self
    }

    pub(crate) fn zero() -> Self {
        Self {
            value: T::zero(),
            diagnostics: Diagnostics {
                eps: vec![],
                values: vec![],
                diffs: vec![],
                converged: true,
                warning: None,
            },
        }
    }
}

/// Behaviour of the ray function past its last breakpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RayTail<T> {
    /// `g(v) = 0` for `v > end`.
    Compact { end: T },
    /// `|g(v)| ≤ C e^{−rate v}`.
    Exponential { rate: T },
    /// `g(v) ~ v^{−power}`, `power ≥ 0`.
    Algebraic { power: T },
}

fn finite_difference<T: Real, G: Fn(T) -> T>(g: &G, coeffs: &[T], tau: T) -> T {
    let mut acc = T::zero();
    for (j, c) in coeffs.iter().enumerate() {
        acc = acc + *c * g(tau * from_usize(j));
    }
    acc
}

/// Runs the truncation schedule for ray `g`.
///
/// `breaks` lists points `v` where `g` is not smooth; they are mapped to
/// the τ-breakpoints `v/j`.
pub fn marchaud_ray<T: Real, G: Fn(T) -> T>(
    params: &InversionParams<T>,
    g: G,
    breaks: &[T],
    tail: RayTail<T>,
    reference: T,
) -> Result<Inversion<T>> {
    let alpha = params.alpha;
    let ell = params.ell;
    let coeffs: Vec<T> = (0..=ell)
        .map(|j| {
            if j % 2 == 0 {
                binomial::<T>(ell, j)
            } else {
                -binomial::<T>(ell, j)
            }
        })
        .collect();
    let eps = params.schedule.levels(reference);
    if eps.is_empty() {
        return Err(Error::domain("empty ε schedule"));
    }
    let g0 = g(T::zero());
    let rel = params.rel_tol;
    let abs = lit::<T>(1e-14) * (g0.abs() + T::one()) * eps[eps.len() - 1].powf(-alpha);
    let s = |tau: T| finite_difference(&g, &coeffs, tau) * tau.powf(-T::one() - alpha);

    // τ-breakpoints
    let mut pts: Vec<T> = Vec::new();
    let mut vb: Vec<T> = breaks
        .iter()
        .copied()
        .filter(|v| *v > T::zero() && v.is_finite())
        .collect();
    let far = match tail {
        RayTail::Compact { end } => {
            vb.push(end);
            end
        }
        RayTail::Exponential { rate } => {
            if !(rate > T::zero()) {
                return Err(Error::input("exponential ray tail needs a positive rate"));
            }
            let end = vb.iter().copied().fold(T::zero(), T::max) + lit::<T>(36.0) / rate;
            vb.push(end);
            end
        }
        RayTail::Algebraic { .. } => vb
            .iter()
            .copied()
            .fold(T::zero(), T::max)
            .max(eps[0] * lit(4.0)),
    };
    for v in &vb {
        for j in 1..=ell {
            pts.push(*v / from_usize(j));
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    pts.dedup();

    let piece = |lo: T, hi: T| -> T {
        let mut acc = T::zero();
        let mut a = lo;
        for p in pts.iter().copied().filter(|p| *p > lo && *p < hi) {
            acc = acc + adaptive(&s, a, p, rel, abs);
            a = p;
        }
        acc + adaptive(&s, a, hi, rel, abs)
    };

    // ∫_{ε₀}^∞
    let e0 = eps[0];
    let mut head = T::zero();
    match tail {
        RayTail::Compact { .. } | RayTail::Exponential { .. } => {
            if far > e0 {
                head = piece(e0, far);
            }
            // past `far` only the j = 0 term remains
            head = head + g0 * far.max(e0).powf(-alpha) / alpha;
        }
        RayTail::Algebraic { power } => {
            let t0 = far.max(e0);
            if t0 > e0 {
                head = piece(e0, t0);
            }
            // τ = t0/s on (0, 1]
            let rest = |sv: T| {
                if sv <= T::zero() {
                    return T::zero();
                }
                let tau = t0 / sv;
                let tail_sum = finite_difference(&g, &coeffs, tau) - g0;
                tail_sum * tau.powf(-T::one() - alpha) * t0 / (sv * sv)
            };
            let _ = power;
            head =
                head + adaptive(rest, T::zero(), T::one(), rel, abs) + g0 * t0.powf(-alpha) / alpha;
        }
    }

    let mut values = Vec::with_capacity(eps.len());
    let mut acc = head;
    values.push(acc / params.kappa);
    for w in eps.windows(2) {
        acc = acc + piece(w[1], w[0]);
        values.push(acc / params.kappa);
    }
    Ok(finish(params, eps, values))
}

fn finish<T: Real>(params: &InversionParams<T>, eps: Vec<T>, values: Vec<T>) -> Inversion<T> {
    let diffs: Vec<T> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let scale = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let floor = lit::<T>(1e-11) * (scale + T::one());
    let tail_diffs = &diffs[diffs.len().saturating_sub(3)..];
    let converged = tail_diffs.windows(2).all(|w| w[1] <= w[0] || w[1] <= floor);
    let warning = (!converged).then(|| {
        format!(
            "successive differences do not decrease over the last levels: {:?}",
            tail_diffs
        )
    });
    let last = values[values.len() - 1];
    let value = match params.extrapolation {
        Extrapolation::Richardson if values.len() >= 3 => richardson(params, &eps, &values),
        _ => last,
    };
    Inversion {
        value,
        diagnostics: Diagnostics {
            eps,
            values,
            diffs,
            converged,
            warning,
        },
    }
}

/// Eliminates `ε^p` and `ε^{p+1}` (p = ℓ − α) from the last three values.
fn richardson<T: Real>(params: &InversionParams<T>, eps: &[T], v: &[T]) -> T {
    let k = v.len();
    let p = from_usize::<T>(params.ell) - params.alpha;
    let (e0, e1, e2) = (eps[k - 3], eps[k - 2], eps[k - 1]);
    let (v0, v1, v2) = (v[k - 3], v[k - 2], v[k - 1]);
    let step = |ea: T, eb: T, va: T, vb: T, q: T| {
        let f = (ea / eb).powf(q);
        (f * vb - va) / (f - T::one())
    };
    let j1 = step(e0, e1, v0, v1, p);
    let j2 = step(e1, e2, v1, v2, p);
    // the second stage uses the ratio of the later pair
    step(e1, e2, j1, j2, p + T::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;
    use approx::assert_relative_eq;

    #[test]
    fn params_defaults_and_checks() {
        let p = InversionParams::new(0.5f64).unwrap();
        assert_eq!(p.ell, 1);
        assert_eq!(InversionParams::new(1.5f64).unwrap().ell, 2);
        assert!(InversionParams::with_ell(1.0f64, 1).is_err());
        assert!(p
            .clone()
            .schedule(EpsSchedule::Explicit(vec![0.1, 0.2]))
            .is_err());
        assert_eq!(p.schedule.levels(4.0).len(), 8);
        assert_relative_eq!(p.schedule.levels(4.0)[0], 0.4);
    }

    #[test]
    fn exponential_is_an_eigenfunction() {
        // g(v) = e^{−v}: Δ^ℓ gives (1 − e^{−τ})^ℓ, so the full integral is 1.
        for (alpha, ell) in [(0.3, 1), (0.5, 1), (0.5, 2), (1.5, 2)] {
            let p = InversionParams::with_ell(alpha, ell).unwrap();
            let r = marchaud_ray(
                &p,
                |v: f64| (-v).exp(),
                &[],
                RayTail::Exponential { rate: 1.0 },
                1.0,
            )
            .unwrap();
            assert_relative_eq!(r.value, 1.0, max_relative = 1e-6);
            assert!(r.diagnostics.converged);
            assert_eq!(r.diagnostics.values.len(), 8);
        }
    }

    #[test]
    fn inverts_a_riemann_liouville_power() {
        // g(v) = (V − v)_+^{α} / Γ(α+1) is I^α of the indicator of [0, V] seen from V.
        let alpha = 0.4;
        let v_end = 2.0;
        let p = InversionParams::new(alpha).unwrap();
        let g = |v: f64| {
            if v < v_end {
                (v_end - v).powf(alpha) / gamma(alpha + 1.0).unwrap()
            } else {
                0.0
            }
        };
        let r = marchaud_ray(&p, g, &[], RayTail::Compact { end: v_end }, v_end).unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-6);
        let diffs = &r.diagnostics.diffs;
        assert!(diffs[diffs.len() - 1] < diffs[0]);
    }

    #[test]
    fn algebraic_tail_and_zero() {
        let p = InversionParams::new(0.5f64).unwrap();
        let z = marchaud_ray(&p, |_| 0.0, &[], RayTail::Compact { end: 1.0 }, 1.0).unwrap();
        assert_eq!(z.value, 0.0);
        // g = (1+v)^{−1} is I^α of h with known D^α: compare with exponential-free quadrature
        // of the Laplace representation 1/(1+v) = ∫ e^{−s(1+v)} ds ⇒ D^α g(0) = ∫ s^α e^{−s} ds = Γ(1+α).
        let r = marchaud_ray(
            &p,
            |v: f64| 1.0 / (1.0 + v),
            &[],
            RayTail::Algebraic { power: 1.0 },
            1.0,
        )
        .unwrap();
        assert_relative_eq!(r.value, gamma(1.5).unwrap(), max_relative = 1e-6);
    }
}
