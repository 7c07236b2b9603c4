//! Device constants and their plain-text configuration format.
//!
//! The file is flat `key = value` text with `#` comments. Vector-valued
//! keys take three numbers separated by commas or whitespace; an infinite
//! lifetime is written `inf`.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bohr magneton over hbar, in rad/(ns T).
pub const MU_B_OVER_HBAR: f64 = 87.941_000_591_9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Diagonal heavy-hole g-factor tensor.
    pub g_hh: [f64; 3],
    /// Diagonal g-factor tensor of the trion's unpaired carrier.
    pub g_trion: [f64; 3],
    /// Heavy-hole hyperfine scale, rad/ns per unit normalized nuclear field.
    pub a_hh: [f64; 3],
    pub a_trion: [f64; 3],
    /// External field along x, Tesla.
    pub b_ext: f64,
    /// Radiative lifetime, ps.
    pub tau_photon: f64,
    /// Initial-state generation jitter, ps.
    pub tau_init: f64,
    /// Final-state lifetime, ps (may be infinite).
    #[serde(with = "inf_float")]
    pub tau_final: f64,
    /// Inter-pulse period, ps.
    pub t_pulse: f64,
    /// rad/(ns T).
    pub gyromagnetic_prefactor: f64,
}

mod inf_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => super::parse_scalar(&t).map_err(serde::de::Error::custom),
        }
    }
}

/// Which carrier is precessing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Species {
    HeavyHole,
    Trion,
}

const KEYS: [&str; 10] = [
    "g_hh",
    "g_trion",
    "a_hh",
    "a_trion",
    "b_ext",
    "tau_photon",
    "tau_init",
    "tau_final",
    "t_pulse",
    "gyromagnetic_prefactor",
];

impl PhysicalParams {
    /// Non-authoritative placeholder constants. They reproduce the
    /// qualitative field dependence (an interior optimum of the
    /// entanglement length near 0.08 T) but are not measured values.
    pub fn placeholder() -> Self {
        Self {
            g_hh: [0.11, 0.11, 2.2],
            g_trion: [0.04, 0.04, 0.04],
            a_hh: [0.01, 0.01, 0.16],
            a_trion: [0.25, 0.25, 0.25],
            b_ext: 0.12,
            tau_photon: 400.0,
            tau_init: 20.0,
            tau_final: f64::INFINITY,
            t_pulse: 1600.0,
            gyromagnetic_prefactor: MU_B_OVER_HBAR,
        }
    }

    /// Zero hyperfine coupling, a vanishing radiative time and exact
    /// quarter-period timing: the cycle reduces to the ideal gates.
    pub fn ideal_limit(b_ext: f64) -> Self {
        let mut p = Self {
            a_hh: [0.0; 3],
            a_trion: [0.0; 3],
            tau_photon: 1e-6,
            b_ext,
            ..Self::placeholder()
        };
        p.t_pulse = p.larmor_period(Species::HeavyHole) / 4.0;
        p
    }

    pub fn g(&self, species: Species) -> Vector3<f64> {
        match species {
            Species::HeavyHole => Vector3::from(self.g_hh),
            Species::Trion => Vector3::from(self.g_trion),
        }
    }

    pub fn hyperfine(&self, species: Species) -> Vector3<f64> {
        match species {
            Species::HeavyHole => Vector3::from(self.a_hh),
            Species::Trion => Vector3::from(self.a_trion),
        }
    }

    /// Larmor vector of the external field alone, rad/ns.
    pub fn external_larmor(&self, species: Species) -> Vector3<f64> {
        self.gyromagnetic_prefactor * self.g(species).component_mul(&Vector3::new(self.b_ext, 0.0, 0.0))
    }

    /// Precession period in the external field alone, ps (infinite at zero field).
    pub fn larmor_period(&self, species: Species) -> f64 {
        let w = self.external_larmor(species).norm();
        if w == 0.0 {
            f64::INFINITY
        } else {
            2.0 * std::f64::consts::PI / w * 1000.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite3 = |v: &[f64; 3]| v.iter().all(|x| x.is_finite());
        if !(finite3(&self.g_hh) && finite3(&self.g_trion) && finite3(&self.a_hh) && finite3(&self.a_trion)) {
            return Err(Error::InvalidParameter("tensor entries must be finite".into()));
        }
        if self.a_hh.iter().chain(self.a_trion.iter()).any(|&a| a < 0.0) {
            return Err(Error::InvalidParameter("hyperfine scales must be >= 0".into()));
        }
        if !(self.tau_photon > 0.0 && self.tau_photon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tau_photon must be positive, got {}",
                self.tau_photon
            )));
        }
        if !(self.t_pulse > 0.0 && self.t_pulse.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_pulse must be positive, got {}",
                self.t_pulse
            )));
        }
        if !(self.tau_init >= 0.0 && self.tau_init.is_finite()) {
            return Err(Error::InvalidParameter("tau_init must be >= 0".into()));
        }
        if !(self.tau_final > 0.0) {
            return Err(Error::InvalidParameter("tau_final must be > 0 or inf".into()));
        }
        if !self.b_ext.is_finite() || !self.gyromagnetic_prefactor.is_finite() {
            return Err(Error::InvalidParameter("b_ext and prefactor must be finite".into()));
        }
        Ok(())
    }

    /// Parses the `key = value` format. Every key except
    /// `gyromagnetic_prefactor` (default: Bohr magneton) is required.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = Self::placeholder();
        let mut seen = [false; KEYS.len()];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let slot = KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| Error::Config(format!("line {}: unknown key `{key}`", lineno + 1)))?;
            let ctx = |e: Error| Error::Config(format!("line {}: {key}: {e}", lineno + 1));
            match key {
                "g_hh" => p.g_hh = parse_vec3(value).map_err(ctx)?,
                "g_trion" => p.g_trion = parse_vec3(value).map_err(ctx)?,
                "a_hh" => p.a_hh = parse_vec3(value).map_err(ctx)?,
                "a_trion" => p.a_trion = parse_vec3(value).map_err(ctx)?,
                "b_ext" => p.b_ext = parse_scalar(value).map_err(ctx)?,
                "tau_photon" => p.tau_photon = parse_scalar(value).map_err(ctx)?,
                "tau_init" => p.tau_init = parse_scalar(value).map_err(ctx)?,
                "tau_final" => p.tau_final = parse_scalar(value).map_err(ctx)?,
                "t_pulse" => p.t_pulse = parse_scalar(value).map_err(ctx)?,
                "gyromagnetic_prefactor" => {
                    p.gyromagnetic_prefactor = parse_scalar(value).map_err(ctx)?
                }
                _ => unreachable!(),
            }
            seen[slot] = true;
        }
        if !seen[KEYS.len() - 1] {
            p.gyromagnetic_prefactor = MU_B_OVER_HBAR;
        }
        let missing: Vec<&str> = KEYS[..KEYS.len() - 1]
            .iter()
            .zip(seen.iter())
            .filter(|(_, s)| !**s)
            .map(|(k, _)| *k)
            .collect();
        if !missing.is_empty() {
            return Err(Error::Config(format!("missing keys: {}", missing.join(", "))));
        }
        p.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_config_string(&self) -> String {
        let v3 = |v: &[f64; 3]| format!("{}, {}, {}", v[0], v[1], v[2]);
        let sc = |v: f64| if v.is_infinite() { "inf".to_string() } else { v.to_string() };
        let mut s = String::new();
        let _ = writeln!(s, "g_hh = {}", v3(&self.g_hh));
        let _ = writeln!(s, "g_trion = {}", v3(&self.g_trion));
        let _ = writeln!(s, "a_hh = {}", v3(&self.a_hh));
        let _ = writeln!(s, "a_trion = {}", v3(&self.a_trion));
        let _ = writeln!(s, "b_ext = {}", sc(self.b_ext));
        let _ = writeln!(s, "tau_photon = {}", sc(self.tau_photon));
        let _ = writeln!(s, "tau_init = {}", sc(self.tau_init));
        let _ = writeln!(s, "tau_final = {}", sc(self.tau_final));
        let _ = writeln!(s, "t_pulse = {}", sc(self.t_pulse));
        let _ = writeln!(s, "gyromagnetic_prefactor = {}", sc(self.gyromagnetic_prefactor));
        s
    }
}

fn parse_scalar(s: &str) -> Result<f64> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("`{s}` is not a number"))),
    }
}

fn parse_vec3(s: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|p| !p.is_empty())
        .collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!("expected 3 components, got `{s}`")));
    }
    Ok([
        parse_scalar(parts[0])?,
        parse_scalar(parts[1])?,
        parse_scalar(parts[2])?,
    ])
}
