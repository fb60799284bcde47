//! Points on Sⁿ and ℝⁿ, the stereographic projection between them, and the
//! multiplication operators used by the transport identities.
//!
//! A sphere point is stored as (θ, ξ′) with r = tan(θ/2); θ = 0 is the south
//! pole −e_{n+1} (mapped to the origin) and θ = π the north pole (mapped to
//! infinity). Poles carry an explicit flag and never a θ value of 0 or π.

use crate::error::{Error, Result};
use crate::real::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pole {
    None,
    North,
    South,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint<T> {
    pub theta: T,
    pub direction: Vec<T>,
    pub height: T,
    pub pole: Pole,
}

fn normalized<T: Real>(v: &[T]) -> Result<Vec<T>> {
    let norm = v.iter().map(|x| *x * *x).sum::<T>().sqrt();
    if !(norm > T::zero()) || !norm.is_finite() {
        return Err(Error::input("direction must be a nonzero finite vector"));
    }
    Ok(v.iter().map(|x| *x / norm).collect())
}

fn default_direction<T: Real>(n: usize) -> Vec<T> {
    let mut d = vec![T::zero(); n];
    d[0] = T::one();
    d
}

impl<T: Real> SpherePoint<T> {
    /// Point with colatitude-like angle θ ∈ (0, π) and direction ξ′ ∈ S^{n-1}.
    pub fn new(theta: T, direction: &[T]) -> Result<Self> {
        if !(theta > T::zero() && theta < T::PI()) {
            return Err(Error::domain(format!(
                "theta must lie in (0, pi); use SpherePoint::north/south for poles (got {theta})"
            )));
        }
        if direction.len() < 2 {
            return Err(Error::domain("direction must live in R^n with n >= 2"));
        }
        Ok(Self {
            theta,
            direction: normalized(direction)?,
            height: -theta.cos(),
            pole: Pole::None,
        })
    }

    /// Non-pole point with the given height x_{n+1} ∈ (-1, 1).
    pub fn from_height(height: T, direction: &[T]) -> Result<Self> {
        if !(height > -T::one() && height < T::one()) {
            return Err(Error::domain("height must lie strictly inside (-1, 1)"));
        }
        let mut p = Self::new((-height).acos(), direction)?;
        p.height = height;
        Ok(p)
    }

    pub fn north(n: usize) -> Self {
        Self {
            theta: T::PI(),
            direction: default_direction(n),
            height: T::one(),
            pole: Pole::North,
        }
    }

    pub fn south(n: usize) -> Self {
        Self {
            theta: T::zero(),
            direction: default_direction(n),
            height: -T::one(),
            pole: Pole::South,
        }
    }

    /// Point from Cartesian coordinates (x₁, …, x_{n+1}); normalizes the input.
    pub fn from_cartesian(x: &[T]) -> Result<Self> {
        let x = normalized(x)?;
        let n = x.len() - 1;
        let h = x[n];
        let rho = x[..n].iter().map(|v| *v * *v).sum::<T>().sqrt();
        if rho == T::zero() {
            return Ok(if h > T::zero() {
                Self::north(n)
            } else {
                Self::south(n)
            });
        }
        let theta = rho.atan2(-h);
        let dir: Vec<T> = x[..n].iter().map(|v| *v / rho).collect();
        Ok(Self {
            theta,
            direction: dir,
            height: h,
            pole: Pole::None,
        })
    }

    pub fn dim(&self) -> usize {
        self.direction.len()
    }

    pub fn cartesian(&self) -> Vec<T> {
        let s = self.theta.sin();
        let mut out: Vec<T> = self.direction.iter().map(|d| *d * s).collect();
        out.push(self.height);
        out
    }

    /// r² = tan²(θ/2); `None` at the north pole.
    pub fn u(&self) -> Option<T> {
        match self.pole {
            Pole::North => None,
            Pole::South => Some(T::zero()),
            Pole::None => Some((self.theta * lit(0.5)).tan().powi(2)),
        }
    }

    /// 1 − x_{n+1}, computed without cancellation near the north pole.
    pub fn one_minus_height(&self) -> T {
        lit::<T>(2.0) * (self.theta * lit(0.5)).cos().powi(2)
    }

    /// 1 + x_{n+1}, computed without cancellation near the south pole.
    pub fn one_plus_height(&self) -> T {
        lit::<T>(2.0) * (self.theta * lit(0.5)).sin().powi(2)
    }

    /// Image under x_{n+1} ↦ −x_{n+1}.
    pub fn reflected(&self) -> Self {
        match self.pole {
            Pole::North => Self::south(self.dim()),
            Pole::South => Self::north(self.dim()),
            Pole::None => Self {
                theta: T::PI() - self.theta,
                direction: self.direction.clone(),
                height: -self.height,
                pole: Pole::None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanePoint<T> {
    pub radius: T,
    pub direction: Vec<T>,
    pub at_infinity: bool,
}

impl<T: Real> PlanePoint<T> {
    pub fn new(radius: T, direction: &[T]) -> Result<Self> {
        if !(radius >= T::zero()) || !radius.is_finite() {
            return Err(Error::domain("plane radius must be finite and nonnegative"));
        }
        Ok(Self {
            radius,
            direction: normalized(direction)?,
            at_infinity: false,
        })
    }

    pub fn from_cartesian(xi: &[T]) -> Result<Self> {
        let r = xi.iter().map(|v| *v * *v).sum::<T>().sqrt();
        if r == T::zero() {
            return Ok(Self {
                radius: r,
                direction: default_direction(xi.len()),
                at_infinity: false,
            });
        }
        Self::new(r, xi)
    }

    pub fn infinity(n: usize) -> Self {
        Self {
            radius: T::infinity(),
            direction: default_direction(n),
            at_infinity: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.direction.len()
    }

    pub fn u(&self) -> T {
        self.radius * self.radius
    }

    pub fn cartesian(&self) -> Vec<T> {
        self.direction.iter().map(|d| *d * self.radius).collect()
    }
}

/// Spherical segment ⟨a, b⟩_S = {a < x_{n+1} < b}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapSpec<T> {
    pub a: T,
    pub b: T,
}

impl<T: Real> CapSpec<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        if !(a >= -T::one() && b <= T::one() && a < b) {
            return Err(Error::domain(format!(
                "cap bounds need -1 <= a < b <= 1 (a = {a}, b = {b})"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn full() -> Self {
        Self {
            a: -T::one(),
            b: T::one(),
        }
    }

    pub fn is_south_cap(&self) -> bool {
        self.a == -T::one()
    }

    pub fn is_north_cap(&self) -> bool {
        self.b == T::one()
    }

    pub fn contains(&self, x: &SpherePoint<T>) -> bool {
        match x.pole {
            Pole::North => self.b == T::one() && self.a < T::one(),
            Pole::South => self.a == -T::one() && self.b > -T::one(),
            Pole::None => x.height > self.a && x.height < self.b,
        }
    }

    /// Interval of r² = tan²(θ/2) covered by the segment (`None` = ∞).
    pub fn u_range(&self) -> (T, Option<T>) {
        (
            height_to_u(self.a).unwrap_or(T::zero()),
            height_to_u(self.b),
        )
    }

    pub fn theta_range(&self) -> (T, T) {
        ((-self.a).acos(), (-self.b).acos())
    }
}

/// r² for a height x_{n+1}; `None` at the north pole.
pub fn height_to_u<T: Real>(h: T) -> Option<T> {
    if h >= T::one() {
        None
    } else {
        Some((T::one() + h) / (T::one() - h))
    }
}

/// Height x_{n+1} for r² = u.
pub fn u_to_height<T: Real>(u: T) -> T {
    if u.is_infinite() {
        T::one()
    } else {
        (u - T::one()) / (u + T::one())
    }
}

/// Ball layer ⟨a, b⟩_B = {a < |ξ| < b}; `r_max = None` means b = ∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerSpec<T> {
    pub r_min: T,
    pub r_max: Option<T>,
}

impl<T: Real> LayerSpec<T> {
    pub fn new(r_min: T, r_max: Option<T>) -> Result<Self> {
        let ok = r_min >= T::zero() && r_max.is_none_or(|b| b > r_min);
        if !ok {
            return Err(Error::domain("layer bounds need 0 <= r_min < r_max"));
        }
        Ok(Self { r_min, r_max })
    }

    pub fn whole_space() -> Self {
        Self {
            r_min: T::zero(),
            r_max: None,
        }
    }

    pub fn contains_radius(&self, r: T) -> bool {
        r > self.r_min && self.r_max.is_none_or(|b| r < b)
    }
}

/// Weighted Lebesgue norm parameters.
///
/// Sphere weight (1 + x_{n+1})^μ (1 − x_{n+1})^ν, plane weight
/// |ξ|^γ (1 + |ξ|)^δ; `p = None` encodes p = ∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpec<T> {
    pub mu: T,
    pub nu: T,
    pub gamma: T,
    pub delta: T,
    pub p: Option<T>,
}

impl<T: Real> WeightSpec<T> {
    pub fn new(mu: T, nu: T, gamma: T, delta: T, p: Option<T>) -> Result<Self> {
        if let Some(p) = p {
            if !(p > T::one()) {
                return Err(Error::domain("Lebesgue exponent must exceed 1"));
            }
        }
        Ok(Self {
            mu,
            nu,
            gamma,
            delta,
            p,
        })
    }

    pub fn unweighted(p: Option<T>) -> Self {
        Self {
            mu: T::zero(),
            nu: T::zero(),
            gamma: T::zero(),
            delta: T::zero(),
            p,
        }
    }

    /// 1/p.
    pub fn inv_p(&self) -> T {
        self.p.map_or(T::zero(), |p| p.recip())
    }

    /// 1/p′ with 1/p + 1/p′ = 1.
    pub fn inv_p_conj(&self) -> T {
        T::one() - self.inv_p()
    }

    pub fn sphere_weight(&self, x: &SpherePoint<T>) -> T {
        x.one_plus_height().powf(self.mu) * x.one_minus_height().powf(self.nu)
    }

    pub fn plane_weight(&self, r: T) -> T {
        r.powf(self.gamma) * (T::one() + r).powf(self.delta)
    }

    /// Target exponents (μ₊, ν₊) for the left-sided spherical integral of
    /// order α on the weighted scale; `None` when μ ≥ n/(2p′). `eps` is the
    /// slack used in the borderline branch.
    pub fn left_sphere_image(&self, n: usize, alpha: T, eps: T) -> Option<(T, T)> {
        let half_n = T::from_usize(n)? * lit(0.5);
        if self.mu >= half_n * self.inv_p_conj() {
            return None;
        }
        let floor = -half_n * self.inv_p();
        let nu = if self.nu - alpha > floor {
            self.nu - alpha
        } else {
            floor + eps
        };
        Some((self.mu - alpha, nu))
    }

    /// Target exponents (μ₋, ν₋) for the right-sided spherical integral.
    pub fn right_sphere_image(&self, n: usize, alpha: T, eps: T) -> Option<(T, T)> {
        let half_n = T::from_usize(n)? * lit(0.5);
        if self.nu >= half_n * self.inv_p_conj() {
            return None;
        }
        let floor = -half_n * self.inv_p();
        let mu = if self.mu - alpha > floor {
            self.mu - alpha
        } else {
            floor + eps
        };
        Some((mu, self.nu - alpha))
    }
}

/// Stereographic image of a sphere point: r = tan(θ/2).
pub fn stereo_forward<T: Real>(x: &SpherePoint<T>) -> PlanePoint<T> {
    match x.pole {
        Pole::North => PlanePoint::infinity(x.dim()),
        Pole::South => PlanePoint {
            radius: T::zero(),
            direction: x.direction.clone(),
            at_infinity: false,
        },
        Pole::None => PlanePoint {
            radius: (x.theta * lit(0.5)).tan(),
            direction: x.direction.clone(),
            at_infinity: false,
        },
    }
}

/// Inverse stereographic projection: x_{n+1} = (r² − 1)/(r² + 1).
pub fn stereo_inverse<T: Real>(xi: &PlanePoint<T>) -> SpherePoint<T> {
    let n = xi.dim();
    if xi.at_infinity {
        return SpherePoint::north(n);
    }
    if xi.radius == T::zero() {
        let mut s = SpherePoint::south(n);
        s.direction = xi.direction.clone();
        return s;
    }
    let u = xi.u();
    let theta = lit::<T>(2.0) * xi.radius.atan();
    SpherePoint {
        theta,
        direction: xi.direction.clone(),
        height: u_to_height(u),
        pole: Pole::None,
    }
}

/// Euclidean chord |x − y| in ℝ^{n+1} from Cartesian coordinates.
pub fn chord_distance<T: Real>(x: &SpherePoint<T>, y: &SpherePoint<T>) -> T {
    let a = x.cartesian();
    let b = y.cartesian();
    a.iter()
        .zip(&b)
        .map(|(p, q)| (*p - *q) * (*p - *q))
        .sum::<T>()
        .sqrt()
}

/// The same chord evaluated through the plane:
/// |x − y| = 2|ξ − η| / ((1 + |ξ|²)^{1/2}(1 + |η|²)^{1/2}).
pub fn chord_distance_plane<T: Real>(xi: &PlanePoint<T>, eta: &PlanePoint<T>) -> T {
    match (xi.at_infinity, eta.at_infinity) {
        (true, true) => T::zero(),
        (true, false) | (false, true) => {
            let fin = if xi.at_infinity { eta } else { xi };
            lit::<T>(2.0) / (T::one() + fin.u()).sqrt()
        }
        (false, false) => {
            let d = xi
                .cartesian()
                .iter()
                .zip(eta.cartesian())
                .map(|(p, q)| (*p - q) * (*p - q))
                .sum::<T>()
                .sqrt();
            lit::<T>(2.0) * d / ((T::one() + xi.u()).sqrt() * (T::one() + eta.u()).sqrt())
        }
    }
}

/// Surface-measure factor dx = 2ⁿ dξ / (1 + |ξ|²)ⁿ.
pub fn measure_jacobian<T: Real>(xi: &PlanePoint<T>, n: usize) -> Result<T> {
    if xi.at_infinity {
        return Err(Error::domain("jacobian undefined at infinity"));
    }
    Ok((lit::<T>(2.0) / (T::one() + xi.u())).powi(n as i32))
}

/// Multiplication operators of the transport identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Multiplier<T> {
    /// t_λ = (1 − x_{n+1})^λ
    T(T),
    /// q_λ = (1 − x²_{n+1})^{λ/2}
    Q(T),
    /// r_λ = (1 + |ξ|²)^{λ/2}
    R(T),
    /// τ_λ = |ξ|^λ
    Tau(T),
}

impl<T: Real> Multiplier<T> {
    pub fn exponent(&self) -> T {
        match *self {
            Multiplier::T(l) | Multiplier::Q(l) | Multiplier::R(l) | Multiplier::Tau(l) => l,
        }
    }

    /// Value at r² = u (the plane representation of either domain).
    pub fn eval_u(&self, u: T) -> T {
        let one = T::one();
        let two = lit::<T>(2.0);
        match *self {
            Multiplier::T(l) => (two / (one + u)).powf(l),
            Multiplier::Q(l) => (lit::<T>(4.0) * u / ((one + u) * (one + u))).powf(l * lit(0.5)),
            Multiplier::R(l) => (one + u).powf(l * lit(0.5)),
            Multiplier::Tau(l) => u.powf(l * lit(0.5)),
        }
    }

    /// Power p with value ~ u^p as u → 0.
    pub fn origin_power(&self) -> T {
        match *self {
            Multiplier::T(_) | Multiplier::R(_) => T::zero(),
            Multiplier::Q(l) | Multiplier::Tau(l) => l * lit(0.5),
        }
    }

    /// Power q with value ~ |ξ|^{-q} as |ξ| → ∞.
    pub fn tail_power(&self) -> T {
        match *self {
            Multiplier::T(l) => l * lit(2.0),
            Multiplier::Q(l) => l,
            Multiplier::R(l) | Multiplier::Tau(l) => -l,
        }
    }

    pub fn eval_sphere(&self, x: &SpherePoint<T>) -> Result<T> {
        let l = self.exponent();
        let singular = |cond: bool| -> Result<()> {
            if cond && l < T::zero() {
                Err(Error::domain(
                    "multiplier with negative exponent is singular at this pole",
                ))
            } else {
                Ok(())
            }
        };
        match *self {
            Multiplier::T(_) => {
                singular(x.pole == Pole::North)?;
                Ok(x.one_minus_height().powf(l))
            }
            Multiplier::Q(_) => {
                singular(x.pole != Pole::None)?;
                Ok((x.one_minus_height() * x.one_plus_height()).powf(l * lit(0.5)))
            }
            Multiplier::R(_) | Multiplier::Tau(_) => {
                if x.pole == Pole::North {
                    return Err(Error::domain(
                        "plane multiplier undefined at the north pole",
                    ));
                }
                self.eval_plane(&stereo_forward(x))
            }
        }
    }

    pub fn eval_plane(&self, xi: &PlanePoint<T>) -> Result<T> {
        if xi.at_infinity {
            return Err(Error::domain("multiplier undefined at infinity"));
        }
        if xi.radius == T::zero() && self.origin_power() < T::zero() {
            return Err(Error::domain(
                "multiplier with negative exponent is singular at the origin",
            ));
        }
        Ok(self.eval_u(xi.u()))
    }
}
