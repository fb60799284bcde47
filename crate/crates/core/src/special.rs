//! Gamma-type special functions and the normalization constants of the
//! fractional operators.

use crate::error::{Error, Result};
use crate::quadrature::cached_jacobi;
use crate::real::{from_usize, lit, Real};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_pole<T: Real>(x: T) -> bool {
    x <= T::zero() && x == x.floor()
}

fn lanczos_sum<T: Real>(z: T) -> T {
    let mut acc = lit::<T>(LANCZOS_COEFFS[0]);
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc = acc + lit::<T>(*c) / (z + from_usize(i - 1) + T::one());
    }
    acc
}

/// Γ(x) by the Lanczos approximation, with reflection for `x < 1/2`.
pub fn gamma<T: Real>(x: T) -> Result<T> {
    if is_pole(x) {
        return Err(Error::domain(format!("gamma has a pole at {x}")));
    }
    Ok(gamma_unchecked(x))
}

pub(crate) fn gamma_unchecked<T: Real>(x: T) -> T {
    let half = lit::<T>(0.5);
    if x < half {
        let pi = T::PI();
        return pi / ((pi * x).sin() * gamma_unchecked(T::one() - x));
    }
    // Integer arguments are exact products; keeps Γ(n) bit-exact for small n.
    if x == x.floor() && x <= lit(30.0) {
        let mut acc = T::one();
        let mut k = lit::<T>(2.0);
        while k < x {
            acc = acc * k;
            k = k + T::one();
        }
        return acc;
    }
    let z = x - T::one();
    let t = z + lit::<T>(LANCZOS_G) + half;
    (lit::<T>(2.0) * T::PI()).sqrt() * t.powf(z + half) * (-t).exp() * lanczos_sum(z)
}

/// ln |Γ(x)|.
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = lit::<T>(0.5);
    if x < half {
        let pi = T::PI();
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(T::one() - x);
    }
    let z = x - T::one();
    let t = z + lit::<T>(LANCZOS_G) + half;
    half * (lit::<T>(2.0) * T::PI()).ln() + (z + half) * t.ln() - t + lanczos_sum(z).ln()
}

/// Euler Beta function B(a, b) for positive arguments.
pub fn beta<T: Real>(a: T, b: T) -> T {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

/// Surface area σ_{n-1} = 2π^{n/2}/Γ(n/2) of the unit sphere in ℝⁿ.
pub fn sphere_area<T: Real>(n: usize) -> T {
    let h = from_usize::<T>(n) * lit(0.5);
    lit::<T>(2.0) * T::PI().powf(h) / gamma_unchecked(h)
}

/// Binomial coefficient C(n, k) as a scalar.
pub fn binomial<T: Real>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * from_usize::<T>(n - i) / from_usize::<T>(i + 1);
    }
    acc
}

/// Riesz normalization c_{n,α} = Γ((n-α)/2) / (2^α π^{n/2} Γ(α/2)).
pub fn riesz_constant<T: Real>(n: usize, alpha: T) -> Result<T> {
    let nf = from_usize::<T>(n);
    if !(alpha > T::zero() && alpha < nf) {
        return Err(Error::domain(format!(
            "Riesz order must lie in (0, {n}), got {alpha}"
        )));
    }
    let half = lit::<T>(0.5);
    Ok(gamma_unchecked((nf - alpha) * half)
        / (lit::<T>(2.0).powf(alpha) * T::PI().powf(nf * half) * gamma_unchecked(alpha * half)))
}

/// κ(α, ℓ) = ∫₀^∞ (1 - e^{-τ})^ℓ τ^{-1-α} dτ, the Marchaud normalization.
///
/// The integral is split at τ = 1. On `[0, 1]` the factor τ^{ℓ-1-α} is
/// absorbed into a Jacobi weight; the tail is mapped by s = 1/τ, giving the
/// weight s^{α-1} on `(0, 1]`.
pub fn marchaud_constant<T: Real>(alpha: T, ell: usize) -> Result<T> {
    let ellf = from_usize::<T>(ell);
    if !(alpha > T::zero()) || ellf <= alpha {
        return Err(Error::domain(format!(
            "Marchaud constant needs 0 < alpha < ell (alpha = {alpha}, ell = {ell})"
        )));
    }
    let order = 48;
    let head = cached_jacobi(order, T::zero(), ellf - T::one() - alpha)?;
    let lower = head.integrate(T::zero(), T::one(), |t| {
        let ratio = -(-t).exp_m1() / t;
        ratio.powi(ell as i32)
    });
    let tail = cached_jacobi(order, T::zero(), alpha - T::one())?;
    let upper = tail.integrate(T::zero(), T::one(), |s| {
        (-(-s.recip()).exp_m1()).powi(ell as i32)
    });
    Ok(lower + upper)
}

/// Dimension of the space of degree-`j` spherical harmonics on S^{n-1}.
pub fn harmonic_dim(n: usize, j: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::domain("harmonic_dim needs n >= 2"));
    }
    if n == 2 {
        return Ok(if j == 0 { 1 } else { 2 });
    }
    // C(j+n-1, n-1) - C(j+n-3, n-1)
    let c = |top: usize, k: usize| -> usize {
        if top < k {
            return 0;
        }
        let mut acc: u128 = 1;
        for i in 0..k {
            acc = acc * (top - i) as u128 / (i + 1) as u128;
        }
        acc as usize
    };
    let lead = c(j + n - 1, n - 1);
    let back = if j >= 2 { c(j + n - 3, n - 1) } else { 0 };
    Ok(lead - back)
}

/// Sphere-level constants for a fixed ambient dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionParams<T> {
    pub n: usize,
    pub sigma: T,
}

impl<T: Real> DimensionParams<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("dimension must be at least 2"));
        }
        Ok(Self {
            n,
            sigma: sphere_area(n),
        })
    }

    pub fn harmonic_dim(&self, j: usize) -> usize {
        harmonic_dim(self.n, j).expect("n >= 2")
    }
}
