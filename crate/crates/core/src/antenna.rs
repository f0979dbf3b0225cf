//! Horizontal base-station antenna patterns.
//!
//! Every case uses the same parabolic-in-dB main lobe with a front-to-back
//! floor: `G(θ) = G_max − min(12·(θ/θ_3dB)², A_fb)`. Fixed beams stay on the
//! sector azimuth, switched beams pick the nearest of a fixed comb of beam
//! centres, and adaptive beams are steered onto the served user.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tessellation::{wrap_180, LayoutKind};

pub const DEFAULT_FRONT_TO_BACK_DB: f64 = 25.0;

pub const SWITCHED_GAIN_DBI: f64 = 23.55;
pub const SWITCHED_HPBW_DEG: f64 = 8.0;
pub const SWITCHED_BEAM_COUNT: usize = 7;
pub const SWITCHED_BEAM_SPACING_DEG: f64 = 16.0;

pub const ADAPTIVE_GAIN_DBI: f64 = 24.5;
pub const ADAPTIVE_HPBW_DEG: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BeamKind {
    Fixed,
    Switched,
    Adaptive,
}

impl BeamKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BeamKind::Fixed => "fixed",
            BeamKind::Switched => "switched",
            BeamKind::Adaptive => "adaptive",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fixed" => Some(BeamKind::Fixed),
            "switched" => Some(BeamKind::Switched),
            "adaptive" => Some(BeamKind::Adaptive),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntennaStrategy {
    pub kind: BeamKind,
    pub gain_max_dbi: f64,
    pub hpbw_deg: f64,
    pub front_to_back_db: f64,
    /// Beam centres relative to the sector boresight (switched beams only).
    pub beam_centers_deg: Vec<f64>,
}

/// Peak gain and beamwidth of the single fixed beam used by each layout.
pub fn fixed_beam_defaults(layout: LayoutKind) -> (f64, f64) {
    match layout {
        LayoutKind::Cloverleaf3 => (15.39, 65.0),
        LayoutKind::SnowFlake6 => (18.20, 32.0),
        LayoutKind::Flower12 => (21.15, 16.0),
    }
}

/// Evenly spaced beam comb symmetric about boresight.
pub fn beam_comb(count: usize, spacing_deg: f64) -> Vec<f64> {
    let mid = (count as f64 - 1.0) / 2.0;
    (0..count).map(|i| (i as f64 - mid) * spacing_deg).collect()
}

impl AntennaStrategy {
    pub fn fixed(gain_max_dbi: f64, hpbw_deg: f64) -> Self {
        AntennaStrategy {
            kind: BeamKind::Fixed,
            gain_max_dbi,
            hpbw_deg,
            front_to_back_db: DEFAULT_FRONT_TO_BACK_DB,
            beam_centers_deg: Vec::new(),
        }
    }

    pub fn fixed_for_layout(layout: LayoutKind) -> Self {
        let (g, bw) = fixed_beam_defaults(layout);
        Self::fixed(g, bw)
    }

    /// Seven 8° beams spaced 16° apart.
    pub fn switched() -> Self {
        AntennaStrategy {
            kind: BeamKind::Switched,
            gain_max_dbi: SWITCHED_GAIN_DBI,
            hpbw_deg: SWITCHED_HPBW_DEG,
            front_to_back_db: DEFAULT_FRONT_TO_BACK_DB,
            beam_centers_deg: beam_comb(SWITCHED_BEAM_COUNT, SWITCHED_BEAM_SPACING_DEG),
        }
    }

    pub fn adaptive() -> Self {
        AntennaStrategy {
            kind: BeamKind::Adaptive,
            gain_max_dbi: ADAPTIVE_GAIN_DBI,
            hpbw_deg: ADAPTIVE_HPBW_DEG,
            front_to_back_db: DEFAULT_FRONT_TO_BACK_DB,
            beam_centers_deg: Vec::new(),
        }
    }

    pub fn default_for(kind: BeamKind, layout: LayoutKind) -> Self {
        match kind {
            BeamKind::Fixed => Self::fixed_for_layout(layout),
            BeamKind::Switched => Self::switched(),
            BeamKind::Adaptive => Self::adaptive(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("gain_dbi", self.gain_max_dbi),
            ("hpbw_deg", self.hpbw_deg),
            ("front_to_back_db", self.front_to_back_db),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(key, format!("must be positive, got {v}")));
            }
        }
        if self.kind == BeamKind::Switched {
            let c = &self.beam_centers_deg;
            if c.is_empty() {
                return Err(Error::invalid("beam_count", "switched antenna needs at least one beam"));
            }
            if c.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::invalid("beam_spacing_deg", "beam centres must be strictly increasing"));
            }
            let n = c.len();
            if (0..n).any(|i| (c[i] + c[n - 1 - i]).abs() > 1e-9) {
                return Err(Error::invalid("beam_spacing_deg", "beam centres must be symmetric about boresight"));
            }
        }
        Ok(())
    }

    /// Gain in dBi at `off_boresight_deg` from the beam peak.
    pub fn pattern_gain(&self, off_boresight_deg: f64) -> f64 {
        let a = off_boresight_deg.abs();
        let a = if a <= 180.0 { a } else { wrap_180(a).abs() };
        let t = a / self.hpbw_deg;
        self.gain_max_dbi - (12.0 * t * t).min(self.front_to_back_db)
    }

    /// Index of the beam centre nearest `user_offset_deg`; ties go to the lower index.
    pub fn select_switched_beam(&self, user_offset_deg: f64) -> usize {
        let off = wrap_180(user_offset_deg);
        let mut best = 0;
        let mut best_dev = f64::INFINITY;
        for (i, c) in self.beam_centers_deg.iter().enumerate() {
            let dev = (off - c).abs();
            if dev < best_dev {
                best = i;
                best_dev = dev;
            }
        }
        best
    }

    /// Points a beam from a sector with azimuth `sector_azimuth_deg` toward a
    /// user seen at `user_bearing_deg`.
    pub fn point(&self, sector_azimuth_deg: f64, user_bearing_deg: f64) -> BeamPointing<'_> {
        let boresight_deg = match self.kind {
            BeamKind::Fixed => sector_azimuth_deg,
            BeamKind::Switched => {
                let i = self.select_switched_beam(user_bearing_deg - sector_azimuth_deg);
                sector_azimuth_deg + self.beam_centers_deg[i]
            }
            BeamKind::Adaptive => user_bearing_deg,
        };
        BeamPointing {
            boresight_deg,
            strategy: self,
        }
    }

    /// Writes `angle_deg,gain_db` rows over [-180, 180] in 0.5° steps.
    pub fn write_pattern_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "angle_deg,gain_db")?;
        for i in 0..=720 {
            let angle = -180.0 + 0.5 * i as f64;
            let gain = match self.kind {
                // the full comb envelope: best beam at each angle
                BeamKind::Switched => self
                    .beam_centers_deg
                    .iter()
                    .map(|c| self.pattern_gain(angle - c))
                    .fold(f64::NEG_INFINITY, f64::max),
                _ => self.pattern_gain(angle),
            };
            writeln!(out, "{angle},{gain}")?;
        }
        Ok(())
    }
}

/// An instantaneous beam direction, in absolute bearing degrees.
#[derive(Debug, Clone, Copy)]
pub struct BeamPointing<'a> {
    pub boresight_deg: f64,
    pub strategy: &'a AntennaStrategy,
}

impl BeamPointing<'_> {
    pub fn effective_gain(&self, target_bearing_deg: f64) -> f64 {
        self.strategy
            .pattern_gain(wrap_180(target_bearing_deg - self.boresight_deg))
    }
}

/// Upper bound on the gain of a `num_beams` switched antenna over a single wide beam.
pub fn switched_beam_gain_bound(num_beams: usize) -> f64 {
    10.0 * (num_beams as f64).log10()
}
