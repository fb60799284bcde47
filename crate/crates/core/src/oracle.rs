//! Brute-force references and closed-form identities.
//!
//! Everything here runs in f64 on composite Simpson rules with algebraic
//! grading maps, and deliberately shares no quadrature code with the
//! operator modules.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::field::PolarField;
use crate::geometry::{PlanePoint, SpherePoint};
use crate::special::{gamma, riesz_constant, sphere_area};

/// One comparison of a computed value against its reference.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub identity: String,
    pub computed: f64,
    pub reference: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    /// Integrand evaluations spent.
    pub budget: usize,
}

impl OracleReport {
    pub fn new(identity: impl Into<String>, computed: f64, reference: f64, budget: usize) -> Self {
        let abs_err = (computed - reference).abs();
        let rel_err = if reference != 0.0 {
            abs_err / reference.abs()
        } else {
            abs_err
        };
        Self {
            identity: identity.into(),
            computed,
            reference,
            abs_err,
            rel_err,
            budget,
        }
    }

    pub fn passes(&self, rel_tol: f64) -> bool {
        self.rel_err <= rel_tol
    }

    pub const CSV_HEADER: &'static str = "identity,computed,reference,abs_err,rel_err,budget";

    pub fn csv_row(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "{},{:.16e},{:.16e},{:.3e},{:.3e},{}",
            self.identity, self.computed, self.reference, self.abs_err, self.rel_err, self.budget
        );
        s
    }
}

/// Composite Simpson rule on [a, b] with `m` (even) intervals.
fn simpson(a: f64, b: f64, m: usize, f: impl Fn(f64) -> f64) -> f64 {
    let m = m + m % 2;
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for i in 1..m {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// `w ↦ w^p / (w^p + (1 − w)^p)` and its derivative; flattens algebraic
/// endpoint singularities of both ends of [0, 1].
fn grade(w: f64, p: f64) -> (f64, f64) {
    let (a, b) = (w.powf(p), (1.0 - w).powf(p));
    let d = a + b;
    (a / d, p * (w * (1.0 - w)).powf(p - 1.0) / (d * d))
}

/// ∫_lo^hi f with both endpoints graded.
fn graded(lo: f64, hi: f64, p: f64, m: usize, f: impl Fn(f64) -> f64) -> f64 {
    let span = hi - lo;
    simpson(0.0, 1.0, m, |w| {
        let (s, ds) = grade(w, p);
        if ds == 0.0 {
            return 0.0;
        }
        f(lo + span * s) * span * ds
    })
}

/// ψ(α) = α/Γ(1−α) ∫_0^∞ (1 − (1+s)^{α−n/2}) s^{−1−α} ds against Γ(n/2)/Γ(n/2−α).
pub fn psi_check(alpha: f64, n: usize) -> Result<OracleReport> {
    let h = n as f64 * 0.5;
    if !(alpha > 0.0 && alpha < 1.0) || n < 2 || !(alpha < h) {
        return Err(Error::domain(format!(
            "psi_check needs 0 < α < 1 and α < n/2, got α = {alpha}, n = {n}"
        )));
    }
    let g = |s: f64| -((alpha - h) * s.ln_1p()).exp_m1() / s.powf(1.0 + alpha);
    let m = 4000;
    // s = t^p on (0, 1], s = t^{-q} on [1, ∞)
    let p = 4.0 / (1.0 - alpha);
    let head = simpson(0.0, 1.0, m, |t| {
        if t == 0.0 {
            0.0
        } else {
            g(t.powf(p)) * p * t.powf(p - 1.0)
        }
    });
    let q = 4.0 / alpha;
    let tail = simpson(0.0, 1.0, m, |t| {
        if t == 0.0 {
            0.0
        } else {
            g(t.powf(-q)) * q * t.powf(-q - 1.0)
        }
    });
    let value = alpha / gamma(1.0 - alpha)? * (head + tail);
    let reference = gamma(h)? / gamma(h - alpha)?;
    Ok(OracleReport::new(
        format!("psi(alpha={alpha},n={n})"),
        value,
        reference,
        2 * (m + 1),
    ))
}

/// Nodes ψ ∈ [0, π] and weights including sin^{n−2} ψ for a chord
/// `|x − y|² = d + 2B sin²(ψ/2)`, mapped so the peak at ψ = 0 is resolved.
/// n = 2 uses a sinh map in ψ, n = 3 an exponential map in 1 − cos ψ.
/// Each node carries `(ψ, weight, sin²(ψ/2))`.
fn peak_rule(n: usize, d: f64, b: f64, m: usize) -> Vec<(f64, f64, f64)> {
    let m = m + m % 2;
    let simpson_w = |i: usize, h: f64| {
        (if i == 0 || i == m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }) * h
            / 3.0
    };
    if n == 3 {
        if !(b > 0.0) || d == 0.0 {
            let h = 2.0 / m as f64;
            return (0..=m)
                .map(|i| {
                    let z = h * i as f64;
                    ((1.0 - z).clamp(-1.0, 1.0).acos(), simpson_w(i, h), 0.5 * z)
                })
                .collect();
        }
        let top = (2.0 * b / d).ln_1p();
        let h = top / m as f64;
        return (0..=m)
            .map(|i| {
                let e = (h * i as f64).exp();
                let z = d / b * (e - 1.0);
                (
                    (1.0 - z).clamp(-1.0, 1.0).acos(),
                    simpson_w(i, h) * d / b * e,
                    0.5 * z,
                )
            })
            .collect();
    }
    // ψ = c sinh σ resolves the peak of width √(d/B) for any kernel exponent
    let pi = std::f64::consts::PI;
    let c = if b > 0.0 {
        (2.0 * d / b).sqrt()
    } else {
        f64::INFINITY
    };
    if !c.is_finite() || c >= pi {
        let h = pi / m as f64;
        return (0..=m)
            .map(|i| {
                let psi = h * i as f64;
                let sh = (0.5 * psi).sin();
                (psi, simpson_w(i, h), sh * sh)
            })
            .collect();
    }
    let top = (pi / c).asinh();
    let h = top / m as f64;
    (0..=m)
        .map(|i| {
            let sigma = h * i as f64;
            let psi = if i == m { pi } else { c * sigma.sinh() };
            let sh = (0.5 * psi).sin();
            (psi, simpson_w(i, h) * c * sigma.cosh(), sh * sh)
        })
        .collect()
}

/// `(d, B)` with |x − y|² = d + 2B sin²(ψ/2) for x at height h0 (s0 = √(1−h0²))
/// and y at height t, without cancellation near y = x.
fn sphere_chord(h0: f64, s0: f64, t: f64) -> (f64, f64) {
    let st = (1.0 - t * t).sqrt();
    let ds = (h0 - t) * (h0 + t) / (st + s0);
    ((t - h0) * (t - h0) + ds * ds, 2.0 * s0 * st)
}

/// Orthonormal complement of a unit vector in ℝ² or ℝ³.
fn complement(d: &[f64]) -> Vec<Vec<f64>> {
    if d.len() == 2 {
        return vec![vec![-d[1], d[0]]];
    }
    let pick = if d[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let dot: f64 = pick.iter().zip(d).map(|(p, q)| p * q).sum();
    let mut e1: Vec<f64> = pick.iter().zip(d).map(|(p, q)| p - dot * q).collect();
    let nrm = e1.iter().map(|v| v * v).sum::<f64>().sqrt();
    e1.iter_mut().for_each(|v| *v /= nrm);
    let e2 = vec![
        d[1] * e1[2] - d[2] * e1[1],
        d[2] * e1[0] - d[0] * e1[2],
        d[0] * e1[1] - d[1] * e1[0],
    ];
    vec![e1, e2]
}

/// Directions ω ∈ S^{n−1} at angle ψ from `d`, with the weight of the
/// remaining angular variable (n = 2: the two mirror points; n = 3: a
/// trapezoid over the azimuth).
fn ring(d: &[f64], frame: &[Vec<f64>], psi: f64, azimuths: usize) -> Vec<(Vec<f64>, f64)> {
    let (s, c) = psi.sin_cos();
    if d.len() == 2 {
        return [1.0, -1.0]
            .iter()
            .map(|sg| {
                (
                    (0..2).map(|i| c * d[i] + sg * s * frame[0][i]).collect(),
                    1.0,
                )
            })
            .collect();
    }
    let dc = std::f64::consts::TAU / azimuths as f64;
    (0..azimuths)
        .map(|k| {
            let (sc, cc) = (dc * k as f64).sin_cos();
            let w: Vec<f64> = (0..3)
                .map(|i| c * d[i] + s * (cc * frame[0][i] + sc * frame[1][i]))
                .collect();
            (w, dc)
        })
        .collect()
}

/// Λ(x) = (2α / (σ_{n−1} Γ(1−α))) ∫_{y_{n+1} > x_{n+1}} [((1−y_{n+1})/(1−x_{n+1}))^{α−n/2} − 1]
/// (y_{n+1} − x_{n+1})^{−α} |x − y|^{−n} dy against Γ(n/2)/(Γ(n/2−α)(1−x_{n+1})^α).
pub fn lambda_check(alpha: f64, n: usize, x: &SpherePoint<f64>) -> Result<OracleReport> {
    if !(alpha > 0.0 && alpha < 1.0) || !matches!(n, 2 | 3) {
        return Err(Error::domain(format!(
            "lambda_check needs 0 < α < 1 and n ∈ {{2, 3}}, got α = {alpha}, n = {n}"
        )));
    }
    if x.dim() != n || !(x.height.abs() < 1.0) {
        return Err(Error::domain("lambda_check needs a non-polar point of Sⁿ"));
    }
    let h0 = x.height;
    let hn = n as f64 * 0.5;
    let (m_out, m_in) = (1600, 256);
    let s0 = (1.0 - h0 * h0).sqrt();
    let area_rest = if n == 2 { 2.0 } else { std::f64::consts::TAU };
    let slice = |t: f64| {
        if !(t > h0 && t < 1.0) {
            return 0.0;
        }
        let (d, b) = sphere_chord(h0, s0, t);
        // grading can round a node onto x itself, a null set
        if d == 0.0 {
            return 0.0;
        }
        let inner: f64 = peak_rule(n, d, b, m_in)
            .into_iter()
            .map(|(_, w, half)| w * area_rest * (d + 2.0 * b * half).powf(-hn))
            .sum();
        let bracket = ((1.0 - t) / (1.0 - h0)).powf(alpha - hn) - 1.0;
        bracket * (t - h0).powf(-alpha) * (1.0 - t * t).powf(hn - 1.0) * inner
    };
    let integral = graded(h0, 1.0, 6.0, m_out, slice);
    let coef = 2.0 * alpha / (sphere_area::<f64>(n) * gamma(1.0 - alpha)?);
    let reference = gamma(hn)? / (gamma(hn - alpha)? * (1.0 - h0).powf(alpha));
    Ok(OracleReport::new(
        format!("lambda(alpha={alpha},n={n},h={h0})"),
        coef * integral,
        reference,
        (m_out + 1) * (m_in + 1),
    ))
}

/// Operators the brute-force oracle evaluates from their defining integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BruteOp {
    /// S^α_{a+} on Sⁿ.
    SphereLeft { a: f64 },
    /// S^α_{b−} on Sⁿ.
    SphereRight { b: f64 },
    /// B^α_{a+} on ℝⁿ.
    BallLeft { a: f64 },
    /// B^α_{b−} on ℝⁿ; `None` is b = ∞.
    BallRight { b: Option<f64> },
    /// I^α over the segment ⟨a, b⟩ of Sⁿ.
    Riesz { a: f64, b: f64 },
}

/// Evaluation point of a brute-force job.
#[derive(Debug, Clone, PartialEq)]
pub enum BrutePoint {
    Sphere(SpherePoint<f64>),
    Plane(PlanePoint<f64>),
}

/// Resolution and refusal threshold of a brute-force job.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    /// Simpson intervals in the level variable (height or radius), per segment.
    pub outer: usize,
    /// Simpson intervals in the angle from the target direction.
    pub inner: usize,
    /// Azimuth points (n = 3 only).
    pub azimuths: usize,
    /// Largest number of integrand evaluations accepted.
    pub cap: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            outer: 800,
            inner: 128,
            azimuths: 32,
            cap: 20_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Brute {
    pub value: f64,
    pub evaluations: usize,
}

/// Value of `op` applied to `phi` at `point` by dense quadrature of the
/// defining integral; n ∈ {2, 3}.
pub fn brute_operator<F: PolarField<f64> + ?Sized>(
    op: BruteOp,
    alpha: f64,
    phi: &F,
    point: &BrutePoint,
    budget: &Budget,
) -> Result<Brute> {
    let n = phi.n();
    if !matches!(n, 2 | 3) {
        return Err(Error::Unsupported(
            "the brute-force oracle handles n = 2, 3".into(),
        ));
    }
    if !(alpha > 0.0) || (matches!(op, BruteOp::Riesz { .. }) && !(alpha < n as f64)) {
        return Err(Error::domain(format!(
            "order {alpha} outside the operator's range"
        )));
    }
    let per_ring = if n == 2 { 2 } else { budget.azimuths };
    let segments = if matches!(op, BruteOp::Riesz { .. }) {
        2
    } else {
        1
    };
    let evaluations = segments * (budget.outer + 1) * (budget.inner + 1) * per_ring;
    if evaluations > budget.cap {
        return Err(Error::Budget(format!(
            "{evaluations} evaluations requested, cap is {}",
            budget.cap
        )));
    }
    let value = match (op, point) {
        (BruteOp::SphereLeft { a }, BrutePoint::Sphere(x)) => {
            let k = 2.0 / (gamma(alpha)? * sphere_area::<f64>(n));
            let h = x.height;
            if !(h > a) {
                return Err(Error::domain("point lies outside the operator's segment"));
            }
            k * sphere_slab(phi, x, a, h, budget, |t, c2| {
                (h - t).powf(alpha) * c2.powf(-0.5 * n as f64)
            })
        }
        (BruteOp::SphereRight { b }, BrutePoint::Sphere(x)) => {
            let k = 2.0 / (gamma(alpha)? * sphere_area::<f64>(n));
            let h = x.height;
            if !(h < b) {
                return Err(Error::domain("point lies outside the operator's segment"));
            }
            k * sphere_slab(phi, x, h, b, budget, |t, c2| {
                (t - h).powf(alpha) * c2.powf(-0.5 * n as f64)
            })
        }
        (BruteOp::Riesz { a, b }, BrutePoint::Sphere(x)) => {
            let c = riesz_constant::<f64>(n, alpha)?;
            let e = 0.5 * (alpha - n as f64);
            let h = x.height.clamp(a, b);
            c * (sphere_slab(phi, x, a, h, budget, |_, c2| c2.powf(e))
                + sphere_slab(phi, x, h, b, budget, |_, c2| c2.powf(e)))
        }
        (BruteOp::BallLeft { a }, BrutePoint::Plane(xi)) => {
            let k = 2.0 / (gamma(alpha)? * sphere_area::<f64>(n));
            let r = xi.radius;
            if !(r > a) {
                return Err(Error::domain("point lies outside the operator's layer"));
            }
            k * ball_shell(phi, xi, a, Some(r), budget, |rho, c2| {
                (r * r - rho * rho).powf(alpha) * c2.powf(-0.5 * n as f64)
            })
        }
        (BruteOp::BallRight { b }, BrutePoint::Plane(xi)) => {
            let k = 2.0 / (gamma(alpha)? * sphere_area::<f64>(n));
            let r = xi.radius;
            if b.is_some_and(|b| !(r < b)) {
                return Err(Error::domain("point lies outside the operator's layer"));
            }
            k * ball_shell(phi, xi, r, b, budget, |rho, c2| {
                (rho * rho - r * r).powf(alpha) * c2.powf(-0.5 * n as f64)
            })
        }
        _ => return Err(Error::input("point does not match the operator's domain")),
    };
    Ok(Brute { value, evaluations })
}

/// ∫ over `lo < y_{n+1} < hi` of `kernel(y_{n+1}, |x − y|²) φ(y) dy`.
fn sphere_slab<F: PolarField<f64> + ?Sized>(
    phi: &F,
    x: &SpherePoint<f64>,
    lo: f64,
    hi: f64,
    budget: &Budget,
    kernel: impl Fn(f64, f64) -> f64,
) -> f64 {
    if !(hi > lo) {
        return 0.0;
    }
    let n = phi.n();
    let h0 = x.height;
    let s0 = (1.0 - h0 * h0).sqrt();
    let frame = complement(&x.direction);
    graded(lo, hi, 6.0, budget.outer, |t| {
        if !(t > -1.0 && t < 1.0) {
            return 0.0;
        }
        let (d, b) = sphere_chord(h0, s0, t);
        // grading can round a node onto x itself, a null set
        if d == 0.0 {
            return 0.0;
        }
        let u = (1.0 + t) / (1.0 - t);
        let mut acc = 0.0;
        for (psi, w, half) in peak_rule(n, d, b, budget.inner) {
            let k = kernel(t, d + 2.0 * b * half);
            let ang: f64 = ring(&x.direction, &frame, psi, budget.azimuths)
                .iter()
                .map(|(om, wr)| wr * phi.value(u, om))
                .sum();
            acc += w * k * ang;
        }
        acc * (1.0 - t * t).powf(0.5 * n as f64 - 1.0)
    })
}

/// ∫ over `lo < |η| < hi` of `kernel(|η|, |ξ − η|²) φ(η) dη`; `hi = None` is ∞.
fn ball_shell<F: PolarField<f64> + ?Sized>(
    phi: &F,
    xi: &PlanePoint<f64>,
    lo: f64,
    hi: Option<f64>,
    budget: &Budget,
    kernel: impl Fn(f64, f64) -> f64,
) -> f64 {
    let n = phi.n();
    let r = xi.radius;
    let frame = complement(&xi.direction);
    let slice = |rho: f64| {
        let d = (r - rho) * (r - rho);
        let b = 2.0 * r * rho;
        if d == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for (psi, w, half) in peak_rule(n, d, b, budget.inner) {
            let k = kernel(rho, d + 2.0 * b * half);
            let ang: f64 = ring(&xi.direction, &frame, psi, budget.azimuths)
                .iter()
                .map(|(om, wr)| wr * phi.value(rho * rho, om))
                .sum();
            acc += w * k * ang;
        }
        acc * rho.powi(n as i32 - 1)
    };
    match hi {
        Some(hi) => graded(lo, hi, 6.0, budget.outer, slice),
        None => {
            // ρ = lo + L τ/(1 − τ)
            let l = 1.0 + lo;
            graded(0.0, 1.0, 6.0, budget.outer, |tau| {
                if !(tau < 1.0) {
                    return 0.0;
                }
                let v = slice(lo + l * tau / (1.0 - tau)) * l / ((1.0 - tau) * (1.0 - tau));
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            })
        }
    }
}
