//! Gaussian quadrature rules and an adaptive Gauss–Kronrod integrator.
//!
//! Gauss–Jacobi rules integrate `(1 - x)^a (1 + x)^b f(x)` on `[-1, 1]`
//! exactly for polynomial `f` of degree `< 2 * order`. They carry every
//! endpoint singularity of the Abel-type kernels in this crate.

use std::any::{Any, TypeId};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::real::{from_usize, lit, to_f64, Real};
use crate::special::ln_gamma;

/// Nodes and weights on `[-1, 1]` for the weight `(1 - x)^a (1 + x)^b`.
#[derive(Debug, Clone)]
pub struct GaussRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub a: T,
    pub b: T,
}

impl<T: Real> GaussRule<T> {
    /// Builds a Gauss–Jacobi rule by the Golub–Welsch method.
    pub fn jacobi(order: usize, a: T, b: T) -> Result<Self> {
        if order < 1 {
            return Err(Error::domain("quadrature order must be positive"));
        }
        if !(a > -T::one()) || !(b > -T::one()) {
            return Err(Error::domain(format!(
                "Jacobi exponents must exceed -1 (a = {a}, b = {b})"
            )));
        }
        let one = T::one();
        let two = lit::<T>(2.0);
        let ab = a + b;
        let mut diag = vec![T::zero(); order];
        let mut off = vec![T::zero(); order];
        for (k, d) in diag.iter_mut().enumerate() {
            let kf = from_usize::<T>(k);
            *d = if k == 0 {
                (b - a) / (ab + two)
            } else {
                let s = two * kf + ab;
                (b * b - a * a) / (s * (s + two))
            };
        }
        for (k, o) in off.iter_mut().enumerate().skip(1) {
            let kf = from_usize::<T>(k);
            let beta = if k == 1 {
                lit::<T>(4.0) * (one + a) * (one + b) / ((two + ab).powi(2) * (lit::<T>(3.0) + ab))
            } else {
                let s = two * kf + ab;
                lit::<T>(4.0) * kf * (kf + a) * (kf + b) * (kf + ab)
                    / (s * s * (s + one) * (s - one))
            };
            *o = beta.sqrt();
        }
        let (nodes, first) = tridiagonal_eigen(diag, off)?;
        let log_mu0 =
            (ab + one) * two.ln() + ln_gamma(a + one) + ln_gamma(b + one) - ln_gamma(ab + two);
        let mu0 = log_mu0.exp();
        let mut pairs: Vec<(T, T)> = nodes
            .into_iter()
            .zip(first)
            .map(|(x, v)| (x, mu0 * v * v))
            .collect();
        pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap_or(std::cmp::Ordering::Equal));
        let (nodes, weights) = pairs.into_iter().unzip();
        Ok(Self {
            nodes,
            weights,
            a,
            b,
        })
    }

    pub fn legendre(order: usize) -> Self {
        Self::jacobi(order, T::zero(), T::zero()).expect("Legendre rule")
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integrates `(hi - x)^a (x - lo)^b f(x)` over `[lo, hi]`.
    pub fn integrate<F: FnMut(T) -> T>(&self, lo: T, hi: T, mut f: F) -> T {
        let half = (hi - lo) * lit(0.5);
        if half == T::zero() {
            return T::zero();
        }
        let mid = (hi + lo) * lit(0.5);
        let scale = half.powf(self.a + self.b + T::one());
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + *w * f(mid + half * *x);
        }
        acc * scale
    }
}

/// Eigenvalues and first eigenvector components of a symmetric tridiagonal
/// matrix (implicit QL with Wilkinson shifts).
fn tridiagonal_eigen<T: Real>(mut d: Vec<T>, mut e: Vec<T>) -> Result<(Vec<T>, Vec<T>)> {
    let n = d.len();
    let mut z = vec![T::zero(); n];
    z[0] = T::one();
    // e[i] couples d[i-1] and d[i]; shift so e[i] couples d[i] and d[i+1].
    for i in 1..n {
        e[i - 1] = e[i];
    }
    if n > 0 {
        e[n - 1] = T::zero();
    }
    let eps = T::epsilon();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::domain("tridiagonal eigensolver did not converge"));
            }
            let mut g = (d[l + 1] - d[l]) / (lit::<T>(2.0) * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
            let mut s = T::one();
            let mut c = T::one();
            let mut p = T::zero();
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + lit::<T>(2.0) * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if underflow {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok((d, z))
}

type RuleKey = (TypeId, usize, u64, u64);

fn rule_cache() -> &'static Mutex<HashMap<RuleKey, Arc<dyn Any + Send + Sync>>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<dyn Any + Send + Sync>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Returns a shared Gauss–Jacobi rule, building it on first use.
pub fn cached_jacobi<T: Real>(order: usize, a: T, b: T) -> Result<Arc<GaussRule<T>>> {
    let key = (
        TypeId::of::<T>(),
        order,
        to_f64(a).to_bits(),
        to_f64(b).to_bits(),
    );
    if let Some(hit) = rule_cache().lock().expect("rule cache").get(&key) {
        if let Ok(rule) = hit.clone().downcast::<GaussRule<T>>() {
            return Ok(rule);
        }
    }
    let rule = Arc::new(GaussRule::jacobi(order, a, b)?);
    rule_cache()
        .lock()
        .expect("rule cache")
        .insert(key, rule.clone() as Arc<dyn Any + Send + Sync>);
    Ok(rule)
}

pub fn cached_legendre<T: Real>(order: usize) -> Arc<GaussRule<T>> {
    cached_jacobi(order, T::zero(), T::zero()).expect("Legendre rule")
}

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GAUSS7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: Real, F: FnMut(T) -> T>(f: &mut F, lo: T, hi: T) -> (T, T) {
    let half = (hi - lo) * lit(0.5);
    let mid = (hi + lo) * lit(0.5);
    let fc = f(mid);
    let mut kron = fc * lit(KRONROD_WEIGHTS[7]);
    let mut gauss = fc * lit(GAUSS7_WEIGHTS[3]);
    for i in 0..7 {
        let dx = half * lit(KRONROD_NODES[i]);
        let s = f(mid - dx) + f(mid + dx);
        kron = kron + s * lit(KRONROD_WEIGHTS[i]);
        if i % 2 == 1 {
            gauss = gauss + s * lit(GAUSS7_WEIGHTS[i / 2]);
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration on a finite interval.
///
/// Interior integrable endpoint singularities are handled by bisection.
pub fn adaptive<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, rel_tol: T, abs_tol: T) -> T {
    if hi <= lo {
        return T::zero();
    }
    let max_intervals = 4000;
    let (v0, e0) = gk15(&mut f, lo, hi);
    let mut parts = vec![(lo, hi, v0, e0)];
    let mut total = v0;
    let mut err = e0;
    while err > abs_tol.max(rel_tol * total.abs()) && parts.len() < max_intervals {
        let (idx, _) = parts
            .iter()
            .enumerate()
            .fold(
                (0, -T::one()),
                |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best },
            );
        let (a, b, v, e) = parts.swap_remove(idx);
        let m = (a + b) * lit(0.5);
        if m <= a || m >= b {
            parts.push((a, b, v, T::zero()));
            err = err - e;
            continue;
        }
        let (vl, el) = gk15(&mut f, a, m);
        let (vr, er) = gk15(&mut f, m, b);
        total = total - v + vl + vr;
        err = err - e + el + er;
        parts.push((a, m, vl, el));
        parts.push((m, b, vr, er));
    }
    parts.iter().map(|p| p.2).sum()
}
