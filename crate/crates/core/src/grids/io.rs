//! CSV samples plus a JSON manifest describing the grid.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{AngularGrid, Clustering, Decay, Density, RadialGrid, Surface};
use crate::error::{Error, Result};
use crate::real::{lit, to_f64, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub n: usize,
    pub kind: Surface,
    pub clustering: Clustering,
    pub u_lo: f64,
    /// `None` stands for an unbounded range.
    pub u_hi: Option<f64>,
    pub radial_nodes: usize,
    /// Circle nodes for n = 2, latitude nodes for n = 3, absent when zonal.
    pub angular_nodes: Option<usize>,
    pub decay: Decay<f64>,
}

impl Manifest {
    pub fn of<T: Real>(d: &Density<T>) -> Self {
        let (lo, hi) = d.radial().u_range();
        let angular_nodes = d
            .angular()
            .map(|a| if a.n() == 2 { a.len() } else { a.jmax() + 1 });
        let decay = match d.decay() {
            Decay::Gaussian { rate } => Decay::Gaussian { rate: to_f64(rate) },
            Decay::Polynomial { power } => Decay::Polynomial {
                power: to_f64(power),
            },
            Decay::Compact { lo, hi } => Decay::Compact {
                lo: to_f64(lo),
                hi: to_f64(hi),
            },
        };
        Self {
            n: d.n(),
            kind: d.surface(),
            clustering: d.radial().clustering(),
            u_lo: to_f64(lo),
            u_hi: if hi.is_finite() {
                Some(to_f64(hi))
            } else {
                None
            },
            radial_nodes: d.radial().len(),
            angular_nodes,
            decay,
        }
    }

    fn radial<T: Real>(&self) -> Result<RadialGrid<T>> {
        let hi = self.u_hi.map_or(T::infinity(), lit);
        RadialGrid::new(self.clustering, lit(self.u_lo), hi, self.radial_nodes)
    }

    fn angular<T: Real>(&self) -> Result<Option<Arc<AngularGrid<T>>>> {
        Ok(match self.angular_nodes {
            None => None,
            Some(m) if self.n == 2 => Some(Arc::new(AngularGrid::circle(m)?)),
            Some(l) => Some(Arc::new(AngularGrid::sphere2(l)?)),
        })
    }

    fn decay<T: Real>(&self) -> Decay<T> {
        match self.decay {
            Decay::Gaussian { rate } => Decay::Gaussian { rate: lit(rate) },
            Decay::Polynomial { power } => Decay::Polynomial { power: lit(power) },
            Decay::Compact { lo, hi } => Decay::Compact {
                lo: lit(lo),
                hi: lit(hi),
            },
        }
    }
}

/// Formats a scalar with 17 significant digits.
pub fn fmt_real<T: Real>(x: T) -> String {
    format!("{:.16e}", to_f64(x))
}

fn header(d_kind: Surface, n: usize, has_angular: bool) -> Vec<String> {
    let first = if d_kind == Surface::Sphere {
        "theta"
    } else {
        "r"
    };
    let mut cols = vec![first.to_string()];
    if has_angular {
        if n == 2 {
            cols.push("phi".into());
        } else {
            cols.push("phi1".into());
            cols.push("phi2".into());
        }
    }
    cols.push("value".into());
    cols
}

/// Writes the samples, radial-major, to CSV.
pub fn write_csv<T: Real, W: Write>(d: &Density<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header(d.surface(), d.n(), d.angular().is_some()))
        .map_err(io)?;
    let width = d.angular().map_or(1, |a| a.len());
    for (i, &u) in d.radial().nodes_u().iter().enumerate() {
        let first = match d.surface() {
            Surface::Sphere => lit::<T>(2.0) * u.sqrt().atan(),
            _ => u.sqrt(),
        };
        for a in 0..width {
            let mut rec = vec![fmt_real(first)];
            if let Some(g) = d.angular() {
                rec.extend(g.angles(a).iter().map(|x| fmt_real(*x)));
            }
            rec.push(fmt_real(d.values()[i * width + a]));
            w.write_record(&rec).map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `<stem>.csv` and `<stem>.json`.
pub fn write_density<T: Real>(d: &Density<T>, csv_path: &Path, manifest_path: &Path) -> Result<()> {
    write_csv(d, BufWriter::new(File::create(csv_path)?))?;
    let manifest =
        serde_json::to_string_pretty(&Manifest::of(d)).map_err(|e| Error::Io(e.to_string()))?;
    let mut f = File::create(manifest_path)?;
    f.write_all(manifest.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Reads samples written by [`write_csv`] against a manifest.
pub fn read_csv<T: Real, R: Read>(manifest: &Manifest, input: R) -> Result<Density<T>> {
    let radial = manifest.radial::<T>()?;
    let angular = manifest.angular::<T>()?;
    let mut rdr = csv::Reader::from_reader(input);
    let expect = header(manifest.kind, manifest.n, angular.is_some());
    let got: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::input(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if got != expect {
        return Err(Error::input(format!(
            "expected columns {expect:?}, found {got:?}"
        )));
    }
    let mut values = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::input(e.to_string()))?;
        let last = rec.get(rec.len().saturating_sub(1)).unwrap_or("");
        let v: f64 = last
            .trim()
            .parse()
            .map_err(|_| Error::input(format!("row {}: bad value {last:?}", line + 2)))?;
        values.push(lit::<T>(v));
    }
    if values.is_empty() {
        return Err(Error::input("density file holds no samples"));
    }
    Density::from_values(
        manifest.kind,
        manifest.n,
        radial,
        angular,
        values,
        manifest.decay(),
    )
}

pub fn read_density<T: Real>(csv_path: &Path, manifest_path: &Path) -> Result<Density<T>> {
    let text = std::fs::read_to_string(manifest_path)?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Error::input(format!("manifest: {e}")))?;
    read_csv(&manifest, File::open(csv_path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids::PolarGrid;

    #[test]
    fn round_trip_is_lossless() {
        let g = PolarGrid::<f64>::sphere(2, 10, 3).unwrap();
        let d = Density::sample_polar(&g, Decay::Polynomial { power: 0.0 }, |u, x| {
            (1.0 + u).recip() + x[1] / 3.0
        })
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&d, &mut buf).unwrap();
        let back: Density<f64> = read_csv(&Manifest::of(&d), buf.as_slice()).unwrap();
        assert_eq!(back.values(), d.values());
        let mut again = Vec::new();
        write_csv(&back, &mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn empty_or_malformed_input_is_rejected() {
        let g = PolarGrid::<f64>::sphere(2, 10, 3).unwrap();
        let d = Density::sample_polar(&g, Decay::Polynomial { power: 0.0 }, |_, _| 1.0).unwrap();
        let m = Manifest::of(&d);
        assert!(matches!(
            read_csv::<f64, _>(&m, "theta,phi,value\n".as_bytes()),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            read_csv::<f64, _>(&m, "r,value\n1,2\n".as_bytes()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn manifest_json_round_trip() {
        let r = RadialGrid::new(Clustering::ChebyshevR, 0.0f64, 4.0, 9).unwrap();
        let d = Density::sample_zonal(
            Surface::HalfLine,
            2,
            r,
            Decay::Gaussian { rate: 1.0 },
            |u| (-u).exp(),
        )
        .unwrap();
        let m = Manifest::of(&d);
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<Manifest>(&text).unwrap(), m);
        assert!(text.contains("\"gaussian\""));
    }
}
