//! Verification suites shared by the CLI and the acceptance tests: oracle
//! identities, and fast operators against brute-force quadrature.

use std::sync::Arc;

use crate::ballops::{ball_apply, BallOperatorParams, Composition};
use crate::error::Result;
use crate::field::{zonal_fn, FnField};
use crate::frac1d::{Side, Sided};
use crate::geometry::{height_to_u, CapSpec, PlanePoint, SpherePoint};
use crate::grids::{AngularGrid, Clustering, Decay, Density, RadialGrid, Surface};
use crate::oracle::{
    brute_operator, lambda_check, psi_check, BruteOp, BrutePoint, Budget, OracleReport,
};
use crate::riesz::{
    riesz_direct, CapFactorization, RieszDomain, RieszProblem, SphereFactorization, Target,
};
use crate::sphereops::{sphere_apply, Route, SphereOperatorParams};

/// One report with the relative tolerance it is held to.
#[derive(Debug, Clone)]
pub struct Check {
    pub report: OracleReport,
    pub rel_tol: f64,
}

impl Check {
    pub fn passes(&self) -> bool {
        self.report.passes(self.rel_tol)
    }
}

/// ψ(α) on α ∈ {¼, ½, ¾} × n ∈ {2, 3, 4}.
pub fn psi_suite() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for alpha in [0.25, 0.5, 0.75] {
        for n in [2, 3, 4] {
            out.push(Check {
                report: psi_check(alpha, n)?,
                rel_tol: 1e-6,
            });
        }
    }
    Ok(out)
}

/// Λ at five heights for n = 2, 3 and α = ½.
pub fn lambda_suite() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in [2, 3] {
        let dir: Vec<f64> = if n == 2 {
            vec![0.6, 0.8]
        } else {
            vec![0.0, 0.6, 0.8]
        };
        for h in [-0.6, -0.3, 0.0, 0.3, 0.6] {
            let x = SpherePoint::from_height(h, &dir)?;
            out.push(Check {
                report: lambda_check(0.5, n, &x)?,
                rel_tol: 1e-4,
            });
        }
    }
    Ok(out)
}

pub fn appendix_suite() -> Result<Vec<Check>> {
    let mut out = psi_suite()?;
    out.extend(lambda_suite()?);
    Ok(out)
}

fn compare(identity: String, fast: f64, brute: crate::oracle::Brute) -> Check {
    Check {
        report: OracleReport::new(identity, fast, brute.value, brute.evaluations),
        rel_tol: 1e-3,
    }
}

fn theta_grid(lo: f64, hi: f64, nodes: usize) -> Result<RadialGrid<f64>> {
    RadialGrid::new(Clustering::ChebyshevTheta, lo, hi, nodes)
}

/// Every fast operator family against `brute_operator` at a few points.
pub fn operator_suite() -> Result<Vec<Check>> {
    let budget = Budget::default();
    let flat = Decay::Polynomial { power: 0.0 };
    let mut out = Vec::new();

    // sphere, right-sided, zonal and conjugated routes
    let alpha = 0.5;
    let closed = zonal_fn(2, flat, move |u: f64| {
        if u < 700.0 {
            (1.0 + u).powf(alpha + 1.0) * (-u).exp()
        } else {
            0.0
        }
    });
    for h in [-0.5, 0.3] {
        let x = SpherePoint::from_height(h, &[0.6, 0.8])?;
        let brute = brute_operator(
            BruteOp::SphereRight { b: 1.0 },
            alpha,
            &closed,
            &BrutePoint::Sphere(x.clone()),
            &budget,
        )?;
        for route in [Route::Zonal, Route::Conjugated] {
            let fast = sphere_apply(
                &SphereOperatorParams::new(alpha, 2, Side::Right, route)?,
                &closed,
                &x,
            )?;
            out.push(compare(format!("S-minus/{route:?}/h={h}"), fast, brute));
        }
    }

    // sphere, left-sided on a segment, non-zonal data, direct and conjugated
    let tilted = FnField::new(2, flat, |u: f64, d: &[f64]| {
        if u < 700.0 {
            (-0.5 * u).exp() * (1.0 + 0.5 * d[0] / (1.0 + u).sqrt())
        } else {
            0.0
        }
    });
    let a = -0.4;
    for h in [0.0, 0.5] {
        let x = SpherePoint::from_height(h, &[0.6, 0.8])?;
        let brute = brute_operator(
            BruteOp::SphereLeft { a },
            0.75,
            &tilted,
            &BrutePoint::Sphere(x.clone()),
            &budget,
        )?;
        for route in [Route::Direct, Route::Conjugated] {
            let mut p = SphereOperatorParams::new(0.75, 2, Side::Left, route)?
                .with_cap(CapSpec::new(a, 1.0)?);
            p.grid = Some(Arc::new(AngularGrid::for_degree(2, 4)?));
            let fast = sphere_apply(&p, &tilted, &x)?;
            out.push(compare(format!("S-plus/{route:?}/h={h}"), fast, brute));
        }
    }

    // ball operators
    let gauss = zonal_fn(2, Decay::Gaussian { rate: 1.0 }, |u: f64| (-u).exp());
    for r in [0.4, 1.5] {
        let xi = PlanePoint::new(r, &[0.0, 1.0])?;
        let brute = brute_operator(
            BruteOp::BallRight { b: None },
            1.0,
            &gauss,
            &BrutePoint::Plane(xi.clone()),
            &budget,
        )?;
        let fast = ball_apply(
            &BallOperatorParams::whole(1.0, 2, Side::Right)?,
            &gauss,
            &xi,
        )?;
        out.push(compare(format!("B-minus/r={r}"), fast, brute));
    }
    let skew = FnField::new(2, Decay::Gaussian { rate: 1.0 }, |u: f64, d: &[f64]| {
        (-u).exp() * (1.0 + 0.3 * d[1])
    });
    for r in [0.8, 1.6] {
        let xi = PlanePoint::new(r, &[0.6, 0.8])?;
        let brute = brute_operator(
            BruteOp::BallLeft { a: 0.3 },
            0.5,
            &skew,
            &BrutePoint::Plane(xi.clone()),
            &budget,
        )?;
        let p = BallOperatorParams::new(0.5, 2, Sided::Left { a: 0.3 })?
            .with_grid(Arc::new(AngularGrid::for_degree(2, 4)?));
        let fast = ball_apply(&p, &skew, &xi)?;
        out.push(compare(format!("B-plus/r={r}"), fast, brute));
    }

    // Riesz potentials on S² and on a cap
    let g = theta_grid(0.0, f64::INFINITY, 64)?;
    let smooth = Density::sample_zonal(Surface::Sphere, 2, g, flat, |u| {
        if u.is_finite() {
            (-(u - 1.0).powi(2)).exp()
        } else {
            0.0
        }
    })?;
    let full = RieszProblem::sphere(1.0, 2)?;
    let fac = SphereFactorization::new(1.0, &smooth, Composition::MinusFirst, 64)?;
    for h in [-0.5, 0.4] {
        let x = SpherePoint::from_height(h, &[0.6, 0.8])?;
        let brute = brute_operator(
            BruteOp::Riesz { a: -1.0, b: 1.0 },
            1.0,
            &smooth,
            &BrutePoint::Sphere(x.clone()),
            &budget,
        )?;
        out.push(compare(
            format!("riesz-direct/h={h}"),
            riesz_direct(&full, &smooth, &Target::Sphere(x.clone()))?,
            brute,
        ));
        out.push(compare(
            format!("riesz-factorized/h={h}"),
            fac.at(&x)?,
            brute,
        ));
    }
    let cap = CapSpec::new(0.0, 1.0)?;
    let ua = height_to_u(0.0).unwrap_or(1.0);
    let bump = |u: f64| {
        let h = (u - 1.0) / (u + 1.0);
        if u.is_finite() && h > 0.0 {
            10.0 * h * h * (1.0 - h).powi(2)
        } else {
            0.0
        }
    };
    let d = Density::sample_zonal(
        Surface::Sphere,
        2,
        theta_grid(ua, f64::INFINITY, 64)?,
        flat,
        bump,
    )?;
    let on_cap = CapFactorization::new(1.0, cap, &d, 64)?;
    let direct = RieszProblem::new(1.0, 2, RieszDomain::Sphere(cap))?;
    for h in [0.3, 0.7] {
        let x = SpherePoint::from_height(h, &[0.6, 0.8])?;
        let brute = brute_operator(
            BruteOp::Riesz { a: 0.0, b: 1.0 },
            1.0,
            &d,
            &BrutePoint::Sphere(x.clone()),
            &budget,
        )?;
        out.push(compare(
            format!("riesz-cap-direct/h={h}"),
            riesz_direct(&direct, &d, &Target::Sphere(x.clone()))?,
            brute,
        ));
        out.push(compare(
            format!("riesz-cap-factorized/h={h}"),
            on_cap.at(&x)?,
            brute,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn appendix_passes() {
        let checks = appendix_suite().unwrap();
        assert_eq!(checks.len(), 19);
        for c in &checks {
            assert!(c.passes(), "{}", c.report.csv_row());
        }
    }

    #[test]
    fn operators_match_brute_force() {
        for c in operator_suite().unwrap() {
            assert!(c.passes(), "{}", c.report.csv_row());
        }
    }
}
