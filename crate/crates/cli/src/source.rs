use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use capfrac::geometry::height_to_u;
use capfrac::grids::io::{fmt_real, read_density, write_density};
use capfrac::grids::{AngularGrid, Clustering};
use capfrac::marchaud::{Diagnostics, EpsSchedule, Extrapolation};
use capfrac::{Decay, Density, Error, InversionParams, PolarGrid, RadialGrid, Result, Surface};
use rayon::prelude::*;

use crate::config::{Manufactured, Schedule, Source};

pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn diagnostics_path(csv: &Path) -> PathBuf {
    let stem = csv
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    csv.with_file_name(format!("{stem}.diagnostics.csv"))
}

/// Reads `--input` or samples `--manufactured`.
pub fn load(src: &Source, alpha: f64, n: usize, cap_a: Option<f64>) -> Result<Density<f64>> {
    if let Some(path) = &src.input {
        return read_density(path, &manifest_path(path));
    }
    let kind = src
        .manufactured
        .ok_or_else(|| Error::Input("either --input or --manufactured is required".into()))?;
    manufacture(kind, alpha, n, cap_a, src.radial_nodes, src.jmax)
}

fn theta(lo: f64, nodes: usize) -> Result<RadialGrid<f64>> {
    RadialGrid::new(Clustering::ChebyshevTheta, lo, f64::INFINITY, nodes)
}

fn flat() -> Decay<f64> {
    Decay::Polynomial { power: 0.0 }
}

pub fn manufacture(
    kind: Manufactured,
    alpha: f64,
    n: usize,
    cap_a: Option<f64>,
    nodes: usize,
    jmax: usize,
) -> Result<Density<f64>> {
    let half = n as f64 * 0.5;
    match kind {
        Manufactured::ZonalClosedForm => {
            Density::sample_zonal(Surface::Sphere, n, theta(0.0, nodes)?, flat(), |u| {
                if u.is_finite() {
                    (1.0 + u).powf(alpha + half) * (-u).exp()
                } else {
                    0.0
                }
            })
        }
        Manufactured::Gaussian => {
            let r = RadialGrid::new(Clustering::ChebyshevR, 0.0, 36.0, nodes)?;
            Density::sample_zonal(Surface::Plane, n, r, Decay::Gaussian { rate: 1.0 }, |u| {
                (-u).exp()
            })
        }
        Manufactured::Constant => {
            Density::sample_zonal(Surface::Sphere, n, theta(0.0, nodes)?, flat(), |_| 1.0)
        }
        Manufactured::CapBump => {
            let a = cap_a.unwrap_or(0.2);
            let ua = height_to_u(a)
                .ok_or_else(|| Error::Domain(format!("cap bound {a} must lie in (-1, 1)")))?;
            Density::sample_zonal(Surface::Sphere, n, theta(ua, nodes)?, flat(), |u| {
                if !u.is_finite() {
                    return 0.0;
                }
                let h = (u - 1.0) / (u + 1.0);
                if h > a {
                    10.0 * (h - a).powi(2) * (1.0 - h).powi(2)
                } else {
                    0.0
                }
            })
        }
        Manufactured::Tilted => {
            let g = PolarGrid::new(
                Surface::Sphere,
                theta(0.0, nodes)?,
                Arc::new(AngularGrid::for_degree(n, jmax)?),
            )?;
            Density::sample_polar(&g, flat(), |u, d| {
                if u.is_finite() {
                    (-u).exp() * (1.0 + 0.5 * d[0] / (1.0 + u).sqrt())
                } else {
                    0.0
                }
            })
        }
    }
}

pub fn inversion_params(alpha: f64, s: &Schedule) -> Result<InversionParams<f64>> {
    let base = match s.ell {
        Some(ell) => InversionParams::with_ell(alpha, ell)?,
        None => InversionParams::new(alpha)?,
    };
    let p = base.schedule(EpsSchedule::Geometric {
        scale: s.eps0,
        ratio: 0.5,
        terms: s.eps_terms,
    })?;
    Ok(if s.no_extrapolation {
        p.extrapolation(Extrapolation::None)
    } else {
        p
    })
}

/// `(i, a, u, ξ′)` for every stored sample of `d`, radial-major.
pub fn nodes(d: &Density<f64>) -> Vec<(usize, usize, f64, Vec<f64>)> {
    let width = d.angular().map_or(1, |g| g.len());
    (0..d.radial().len())
        .flat_map(|i| (0..width).map(move |a| (i, a)))
        .map(|(i, a)| {
            let (u, dir) = d.node(i, a);
            (i, a, u, dir)
        })
        .collect()
}

/// Evaluates `f` at every node in parallel; `None` marks nodes outside the
/// operator's domain, stored as 0.
pub fn tabulate<R: Send>(
    d: &Density<f64>,
    f: impl Fn(f64, &[f64]) -> Result<Option<R>> + Sync,
) -> Result<Vec<Option<R>>> {
    nodes(d)
        .par_iter()
        .map(|(_, _, u, dir)| f(*u, dir))
        .collect()
}

pub fn same_grid(d: &Density<f64>, values: Vec<f64>, decay: Decay<f64>) -> Result<Density<f64>> {
    Density::from_values(
        d.surface(),
        d.n(),
        d.radial().clone(),
        d.angular().cloned(),
        values,
        decay,
    )
}

pub fn save(d: &Density<f64>, path: &Path) -> Result<()> {
    write_density(d, path, &manifest_path(path))
}

pub fn diagnostics_header() -> &'static str {
    "i,a,u,stage,k,eps,value,converged"
}

pub fn diagnostics_rows(
    out: &mut impl Write,
    i: usize,
    a: usize,
    u: f64,
    stage: &str,
    d: &Diagnostics<f64>,
) -> Result<()> {
    for (k, (e, v)) in d.eps.iter().zip(&d.values).enumerate() {
        writeln!(
            out,
            "{i},{a},{},{stage},{k},{},{},{}",
            fmt_real(u),
            fmt_real(*e),
            fmt_real(*v),
            d.converged
        )?;
    }
    Ok(())
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}
