use std::io::Write;
use std::path::Path;

use capfrac::ballops::{
    ball_apply, ball_tabulate, marchaud_invert, marchaud_simple, BallOperatorParams, Composition,
};
use capfrac::field::ZeroExtend;
use capfrac::grids::{plane_point, sphere_point};
use capfrac::marchaud::Inversion;
use capfrac::oracle::OracleReport;
use capfrac::riesz::{
    mode_invert_cap, riesz_direct, riesz_sphere_transport, CapFactorization, CapRieszInverter,
    RieszDomain, RieszProblem, SphereFactorization, Target,
};
use capfrac::sphereops::{
    cap_invert, sphere_apply, sphere_invert, sphere_invert_simple, sphere_tabulate, InversionRoute,
    Route, SphereOperatorParams,
};
use capfrac::suite::{appendix_suite, lambda_suite, operator_suite, psi_suite, Check};
use capfrac::{CapSpec, Decay, Density, Error, LayerSpec, Result, Side, Sided, Surface};

use crate::config::*;
use crate::source::*;

/// Outcome of a command that ran to completion.
pub enum Outcome {
    Done,
    /// Verification ran but some tolerance was missed.
    Failed(usize),
}

fn side_of(op: OpName) -> Side {
    match op {
        OpName::SPlus | OpName::BPlus => Side::Left,
        OpName::SMinus | OpName::BMinus => Side::Right,
    }
}

fn is_sphere(op: OpName) -> bool {
    matches!(op, OpName::SPlus | OpName::SMinus)
}

fn expect_surface(d: &Density<f64>, op: OpName) -> Result<()> {
    let want = if is_sphere(op) {
        Surface::Sphere
    } else {
        Surface::Plane
    };
    if d.surface() != want {
        return Err(Error::Input(format!(
            "{op:?} needs a {want:?} density, got {:?}",
            d.surface()
        )));
    }
    Ok(())
}

fn sphere_cap(op: OpName, b: &Bounds) -> Result<CapSpec<f64>> {
    match side_of(op) {
        Side::Left => CapSpec::new(b.cap_a.unwrap_or(-1.0), 1.0),
        Side::Right => CapSpec::new(-1.0, b.cap_b.unwrap_or(1.0)),
    }
}

fn ball_bound(op: OpName, b: &Bounds) -> Sided<f64> {
    match side_of(op) {
        Side::Left => Sided::Left {
            a: b.cap_a.unwrap_or(0.0),
        },
        Side::Right => Sided::Right { b: b.cap_b },
    }
}

fn inside_ball(bound: Sided<f64>, u: f64) -> bool {
    match bound {
        Sided::Left { a } => u > a * a,
        Sided::Right { b } => b.is_none_or(|b| u < b * b),
    }
}

fn flatten(values: Vec<Option<f64>>) -> Vec<f64> {
    values.into_iter().map(|v| v.unwrap_or(0.0)).collect()
}

pub fn apply(args: &ApplyArgs) -> Result<Outcome> {
    let (alpha, n) = (args.order.alpha, args.order.n);
    let phi = load(&args.source, alpha, n, args.bounds.cap_a)?;
    expect_surface(&phi, args.op)?;
    let side = side_of(args.op);
    let out = if is_sphere(args.op) {
        let cap = sphere_cap(args.op, &args.bounds)?;
        let route = match args.route {
            ApplyRoute::Direct => Route::Direct,
            ApplyRoute::Conjugated | ApplyRoute::Tabulated => Route::Conjugated,
            ApplyRoute::Zonal => Route::Zonal,
            ApplyRoute::Modes => Route::Modes,
        };
        let mut p = SphereOperatorParams::new(alpha, n, side, route)?.with_cap(cap);
        p.grid = phi.angular().cloned();
        if args.route == ApplyRoute::Tabulated {
            sphere_tabulate(&p, &phi, phi.radial().clone(), &[])?
        } else {
            let values = tabulate(&phi, |u, dir| {
                let x = sphere_point(u, dir);
                if !cap.contains(&x) {
                    return Ok(None);
                }
                sphere_apply(&p, &phi, &x).map(Some)
            })?;
            same_grid(&phi, flatten(values), Decay::Polynomial { power: 0.0 })?
        }
    } else {
        let bound = ball_bound(args.op, &args.bounds);
        let mut p = BallOperatorParams::new(alpha, n, bound)?;
        if let Some(g) = phi.angular() {
            p = p.with_grid(g.clone());
        }
        let decay = match (side, phi.decay()) {
            (Side::Right, Decay::Gaussian { rate }) => Decay::Gaussian { rate },
            (Side::Right, _) => Decay::Polynomial { power: 0.0 },
            (Side::Left, _) => Decay::Polynomial {
                power: n as f64 - 2.0 * alpha,
            },
        };
        match args.route {
            ApplyRoute::Tabulated => ball_tabulate(&p, &phi, phi.radial().clone(), decay)?,
            ApplyRoute::Conjugated | ApplyRoute::Direct => {
                let values = tabulate(&phi, |u, dir| {
                    if !inside_ball(bound, u) {
                        return Ok(None);
                    }
                    ball_apply(&p, &phi, &plane_point(u, dir)).map(Some)
                })?;
                same_grid(&phi, flatten(values), decay)?
            }
            r => {
                return Err(Error::Domain(format!(
                    "route {r:?} applies to sphere operators only"
                )))
            }
        }
    };
    save(&out, &args.output)?;
    Ok(Outcome::Done)
}

pub fn invert(args: &InvertArgs, verbose: bool) -> Result<Outcome> {
    let (alpha, n) = (args.order.alpha, args.order.n);
    let f = load(&args.source, alpha, n, args.bounds.cap_a)?;
    expect_surface(&f, args.op)?;
    let inv = inversion_params(alpha, &args.schedule)?;
    let side = side_of(args.op);
    let bounded = args.bounds.cap_a.is_some() || args.bounds.cap_b.is_some();
    if bounded && args.route != InvertRoute::Conjugated {
        return Err(Error::Domain(
            "inverses on a cap or layer use the conjugated route".into(),
        ));
    }
    let results: Vec<Option<Inversion<f64>>> = if is_sphere(args.op) {
        let cap = sphere_cap(args.op, &args.bounds)?;
        let bound = match side {
            Side::Left => Sided::Left { a: cap.a },
            Side::Right => Sided::Right { b: Some(cap.b) },
        };
        tabulate(&f, |u, dir| {
            let x = sphere_point(u, dir);
            // the inverse is evaluated off the north pole and inside the segment
            if !u.is_finite() || !cap.contains(&x) {
                return Ok(None);
            }
            let r = match (bounded, args.route) {
                (true, _) => cap_invert(bound, &inv, &f, &x)?,
                (false, InvertRoute::Conjugated) => {
                    sphere_invert(side, &inv, &f, &x, InversionRoute::Conjugated)?
                }
                (false, InvertRoute::Fd) => {
                    sphere_invert(side, &inv, &f, &x, InversionRoute::FiniteDifference)?
                }
                (false, InvertRoute::Simple) => bare(sphere_invert_simple(side, alpha, &f, &x)?),
            };
            Ok(Some(r))
        })?
    } else {
        if args.route == InvertRoute::Fd {
            return Err(Error::Domain(
                "the fd route applies to sphere inverses only".into(),
            ));
        }
        let bound = ball_bound(args.op, &args.bounds);
        let (lo, hi) = match bound {
            Sided::Left { a } => (a * a, f64::INFINITY),
            Sided::Right { b } => (0.0, b.map_or(f64::INFINITY, |b| b * b)),
        };
        let ext = ZeroExtend::new(&f, lo, hi);
        tabulate(&f, |u, dir| {
            if !inside_ball(bound, u) || !u.is_finite() {
                return Ok(None);
            }
            let xi = plane_point(u, dir);
            Ok(Some(match args.route {
                InvertRoute::Simple => bare(marchaud_simple(side, alpha, &f, &xi)?),
                _ => marchaud_invert(side, &inv, &ext, &xi)?,
            }))
        })?
    };
    write_inversions(&f, &results, &args.output, verbose)
}

/// An inversion without an ε schedule.
fn bare(value: f64) -> Inversion<f64> {
    Inversion {
        value,
        diagnostics: capfrac::marchaud::Diagnostics {
            eps: vec![],
            values: vec![],
            diffs: vec![],
            converged: true,
            warning: None,
        },
    }
}

fn write_inversions(
    f: &Density<f64>,
    results: &[Option<Inversion<f64>>],
    output: &Path,
    verbose: bool,
) -> Result<Outcome> {
    let values = results
        .iter()
        .map(|r| r.as_ref().map_or(0.0, |r| r.value))
        .collect();
    save(
        &same_grid(f, values, Decay::Polynomial { power: 0.0 })?,
        output,
    )?;
    let mut diag = create(&diagnostics_path(output))?;
    writeln!(diag, "{}", diagnostics_header())?;
    for ((i, a, u, _), r) in nodes(f).iter().zip(results) {
        if let Some(r) = r {
            diagnostics_rows(&mut diag, *i, *a, *u, "outer", &r.diagnostics)?;
            if verbose {
                if let Some(w) = &r.diagnostics.warning {
                    eprintln!("node ({i}, {a}): {w}");
                }
            }
        }
    }
    diag.flush()?;
    Ok(Outcome::Done)
}

fn riesz_cap(b: &Bounds) -> Result<CapSpec<f64>> {
    CapSpec::new(b.cap_a.unwrap_or(-1.0), b.cap_b.unwrap_or(1.0))
}

pub fn riesz(args: &RieszArgs) -> Result<Outcome> {
    let (alpha, n) = (args.order.alpha, args.order.n);
    let phi = load(&args.source, alpha, n, args.bounds.cap_a)?;
    let out = match phi.surface() {
        Surface::Sphere => {
            let cap = riesz_cap(&args.bounds)?;
            let full = cap == CapSpec::full();
            if !full
                && matches!(
                    args.route,
                    RieszRoute::Transport | RieszRoute::MinusFirst | RieszRoute::PlusFirst
                )
            {
                return Err(Error::Domain(format!(
                    "route {:?} evaluates the whole-sphere potential",
                    args.route
                )));
            }
            if full && args.route == RieszRoute::Cap {
                return Err(Error::Domain(
                    "the cap route needs --cap-a or --cap-b".into(),
                ));
            }
            let problem = RieszProblem::new(alpha, n, RieszDomain::Sphere(cap))?;
            let fac = match args.route {
                RieszRoute::MinusFirst => Some(SphereFactorization::new(
                    alpha,
                    &phi,
                    Composition::MinusFirst,
                    args.stage_nodes,
                )?),
                RieszRoute::PlusFirst => Some(SphereFactorization::new(
                    alpha,
                    &phi,
                    Composition::PlusFirst,
                    args.stage_nodes,
                )?),
                _ => None,
            };
            let on_cap = match args.route {
                RieszRoute::Cap => Some(CapFactorization::new(alpha, cap, &phi, args.stage_nodes)?),
                _ => None,
            };
            let values = tabulate(&phi, |u, dir| {
                let x = sphere_point(u, dir);
                if !cap.contains(&x) {
                    return Ok(None);
                }
                let v = match args.route {
                    RieszRoute::Direct => riesz_direct(&problem, &phi, &Target::Sphere(x))?,
                    RieszRoute::Transport => riesz_sphere_transport(alpha, &phi, &x)?,
                    RieszRoute::MinusFirst | RieszRoute::PlusFirst => {
                        fac.as_ref().map_or(Ok(0.0), |f| f.at(&x))?
                    }
                    RieszRoute::Cap => on_cap.as_ref().map_or(Ok(0.0), |f| f.at(&x))?,
                };
                Ok(Some(v))
            })?;
            same_grid(&phi, flatten(values), Decay::Polynomial { power: 0.0 })?
        }
        Surface::Plane => {
            if args.route != RieszRoute::Direct {
                return Err(Error::Domain("plane densities use the direct route".into()));
            }
            let layer = LayerSpec::new(args.bounds.cap_a.unwrap_or(0.0), args.bounds.cap_b)?;
            let problem = RieszProblem::new(alpha, n, RieszDomain::Plane(layer))?;
            let values = tabulate(&phi, |u, dir| {
                if !u.is_finite() {
                    return Ok(None);
                }
                riesz_direct(&problem, &phi, &Target::Plane(plane_point(u, dir))).map(Some)
            })?;
            same_grid(
                &phi,
                flatten(values),
                Decay::Polynomial {
                    power: n as f64 - alpha,
                },
            )?
        }
        Surface::HalfLine => {
            return Err(Error::Input(
                "Riesz potentials need a sphere or plane density".into(),
            ))
        }
    };
    save(&out, &args.output)?;
    Ok(Outcome::Done)
}

pub fn invert_riesz(args: &InvertRieszArgs, verbose: bool) -> Result<Outcome> {
    let (alpha, n) = (args.order.alpha, args.order.n);
    let f = load(&args.source, alpha, n, args.bounds.cap_a)?;
    if f.surface() != Surface::Sphere {
        return Err(Error::Input("cap inversion needs a sphere density".into()));
    }
    let cap = riesz_cap(&args.bounds)?;
    let inv = inversion_params(alpha, &args.schedule)?;
    let diag_path = diagnostics_path(&args.output);
    match args.route {
        InvertRieszRoute::Modes => {
            let m = mode_invert_cap(alpha, cap, &f, &inv, args.stage_nodes)?;
            save(&m.density, &args.output)?;
            let mut diag = create(&diag_path)?;
            writeln!(diag, "j,k,amplification,converged")?;
            for c in &m.conditions {
                writeln!(
                    diag,
                    "{},{},{},{}",
                    c.j,
                    c.k,
                    capfrac::grids::io::fmt_real(c.amplification),
                    c.converged
                )?;
                if verbose && !c.converged {
                    eprintln!("mode ({}, {}) did not converge", c.j, c.k);
                }
            }
            diag.flush()?;
        }
        InvertRieszRoute::Pipeline => {
            let pipe = CapRieszInverter::new(alpha, cap, &f, &inv, args.stage_nodes)?;
            let results = tabulate(&f, |u, dir| {
                let x = sphere_point(u, dir);
                if !u.is_finite() || !cap.contains(&x) {
                    return Ok(None);
                }
                pipe.at(&x).map(Some)
            })?;
            let values = results
                .iter()
                .map(|r| r.as_ref().map_or(0.0, |r| r.value))
                .collect();
            save(
                &same_grid(&f, values, Decay::Polynomial { power: 0.0 })?,
                &args.output,
            )?;
            let mut diag = create(&diag_path)?;
            writeln!(diag, "{}", diagnostics_header())?;
            let mid = pipe.intermediate();
            let inner = results
                .iter()
                .flatten()
                .next()
                .map(|r| r.inner.clone())
                .unwrap_or_default();
            for ((i, a, u, _), d) in nodes(mid).iter().zip(&inner) {
                diagnostics_rows(&mut diag, *i, *a, *u, "inner", d)?;
            }
            for ((i, a, u, _), r) in nodes(&f).iter().zip(&results) {
                if let Some(r) = r {
                    diagnostics_rows(&mut diag, *i, *a, *u, "outer", &r.outer)?;
                    if verbose && !r.converged() {
                        eprintln!("node ({i}, {a}) did not converge");
                    }
                }
            }
            diag.flush()?;
        }
    }
    Ok(Outcome::Done)
}

fn report(checks: &[Check], output: Option<&Path>, with_tol: bool) -> Result<usize> {
    let mut text = String::from(OracleReport::CSV_HEADER);
    text.push_str(if with_tol { ",rel_tol,pass\n" } else { "\n" });
    for c in checks {
        text.push_str(&c.report.csv_row());
        if with_tol {
            text.push_str(&format!(",{:e},{}", c.rel_tol, c.passes()));
        }
        text.push('\n');
    }
    match output {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(checks.iter().filter(|c| !c.passes()).count())
}

pub fn verify(args: &VerifyArgs) -> Result<Outcome> {
    let mut checks = Vec::new();
    if matches!(args.suite, Suite::Appendix | Suite::All) {
        checks.extend(appendix_suite()?);
    }
    if matches!(args.suite, Suite::Operators | Suite::All) {
        checks.extend(operator_suite()?);
    }
    let failed = report(&checks, args.output.as_deref(), true)?;
    Ok(if failed == 0 {
        Outcome::Done
    } else {
        Outcome::Failed(failed)
    })
}

pub fn oracle(args: &OracleArgs) -> Result<Outcome> {
    let checks: Vec<Check> = match args.sweep {
        Sweep::Psi => psi_suite()?,
        Sweep::Lambda => lambda_suite()?,
        Sweep::Brute => operator_suite()?,
    };
    report(&checks, args.output.as_deref(), false)?;
    Ok(Outcome::Done)
}
