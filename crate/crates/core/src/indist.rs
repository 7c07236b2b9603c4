//! Photon indistinguishability from emitter timescales and HOM areas.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::params::PhysicalParams;

/// Jitter, radiative lifetime and final-state lifetime, all in ps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitterTimescales {
    pub tau_init: f64,
    pub tau_photon: f64,
    pub tau_final: f64,
}

impl EmitterTimescales {
    pub fn new(tau_init: f64, tau_photon: f64, tau_final: f64) -> Result<Self> {
        let t = Self { tau_init, tau_photon, tau_final };
        t.validate()?;
        Ok(t)
    }

    pub fn from_params(p: &PhysicalParams) -> Self {
        Self {
            tau_init: p.tau_init,
            tau_photon: p.tau_photon,
            tau_final: p.tau_final,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_photon > 0.0) || !self.tau_photon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "tau_photon must be positive, got {}",
                self.tau_photon
            )));
        }
        if !(self.tau_init >= 0.0) || !self.tau_init.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "tau_init must be >= 0, got {}",
                self.tau_init
            )));
        }
        if !(self.tau_final > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tau_final must be positive or inf, got {}",
                self.tau_final
            )));
        }
        Ok(())
    }
}

/// `[(1 + tau_photon/tau_final)(1 + tau_init/tau_photon)]^-1`.
pub fn indistinguishability(t: &EmitterTimescales) -> Result<f64> {
    t.validate()?;
    let final_ratio = if t.tau_final.is_infinite() { 0.0 } else { t.tau_photon / t.tau_final };
    Ok(1.0 / ((1.0 + final_ratio) * (1.0 + t.tau_init / t.tau_photon)))
}

/// `1 - A_co / A_cross` from co- and cross-polarized coincidence areas.
pub fn hom_from_areas(a_co: f64, a_cross: f64) -> Result<f64> {
    if !(a_cross > 0.0) {
        return Err(Error::Domain(format!("cross-polarized area must be > 0, got {a_cross}")));
    }
    if !(a_co >= 0.0) {
        return Err(Error::Domain(format!("co-polarized area must be >= 0, got {a_co}")));
    }
    Ok(1.0 - a_co / a_cross)
}

#[derive(Debug, Deserialize)]
struct TableRow {
    b_tesla: f64,
    i_nd: f64,
}

/// Measured `I_nd(B)` as a piecewise-linear table, clamped at the ends.
#[derive(Debug, Clone, PartialEq)]
pub struct IndTable {
    points: Vec<(f64, f64)>,
}

impl IndTable {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyRequest("indistinguishability table has no rows".into()));
        }
        if points.iter().any(|(b, i)| !b.is_finite() || !(0.0..=1.0).contains(i)) {
            return Err(Error::Config("table needs finite fields and i_nd in [0, 1]".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Config("duplicate field in indistinguishability table".into()));
        }
        Ok(Self { points })
    }

    /// Parses CSV with header `b_tesla,i_nd`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(|e| Error::Config(e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["b_tesla", "i_nd"] {
            return Err(Error::Config(format!("expected header b_tesla,i_nd, got {:?}", headers)));
        }
        let mut points = Vec::new();
        for row in rdr.deserialize::<TableRow>() {
            let row = row.map_err(|e| Error::Config(e.to_string()))?;
            points.push((row.b_tesla, row.i_nd));
        }
        Self::new(points)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn at(&self, b: f64) -> f64 {
        let p = &self.points;
        if b <= p[0].0 {
            return p[0].1;
        }
        if b >= p[p.len() - 1].0 {
            return p[p.len() - 1].1;
        }
        let k = p.partition_point(|(x, _)| *x <= b);
        let ((x0, y0), (x1, y1)) = (p[k - 1], p[k]);
        y0 + (y1 - y0) * (b - x0) / (x1 - x0)
    }
}
