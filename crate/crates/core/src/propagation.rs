//! Path loss, shadowing and receiver noise.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    pub frequency_mhz: f64,
    pub bs_height_m: f64,
    pub ms_height_m: f64,
    pub city_correction_db: f64,
    pub shadow_std_db: f64,
    pub shadow_mean_db: f64,
    /// Users closer than this are evaluated at this distance.
    pub min_distance_m: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig {
            frequency_mhz: 2100.0,
            bs_height_m: 25.0,
            ms_height_m: 1.5,
            city_correction_db: 0.0,
            shadow_std_db: 5.0,
            shadow_mean_db: 0.0,
            min_distance_m: 35.0,
        }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1500.0..=2200.0).contains(&self.frequency_mhz) {
            return Err(Error::invalid(
                "frequency_mhz",
                format!("must lie in [1500, 2200], got {}", self.frequency_mhz),
            ));
        }
        for (key, v) in [
            ("bs_height_m", self.bs_height_m),
            ("ms_height_m", self.ms_height_m),
            ("min_distance_m", self.min_distance_m),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(key, format!("must be positive, got {v}")));
            }
        }
        if !(self.shadow_std_db >= 0.0 && self.shadow_std_db.is_finite()) {
            return Err(Error::invalid(
                "shadow_std_db",
                format!("must be non-negative, got {}", self.shadow_std_db),
            ));
        }
        if !self.shadow_mean_db.is_finite() || !self.city_correction_db.is_finite() {
            return Err(Error::invalid("shadow_mean_db", "must be finite"));
        }
        Ok(())
    }

    /// COST-231 Hata urban path loss in dB; `distance_m` is clamped to `min_distance_m`.
    pub fn path_loss(&self, distance_m: f64) -> f64 {
        let d_km = distance_m.max(self.min_distance_m) / 1000.0;
        let lf = self.frequency_mhz.log10();
        let lhb = self.bs_height_m.log10();
        let a_hm = (1.1 * lf - 0.7) * self.ms_height_m - (1.56 * lf - 0.8);
        46.3 + 33.9 * lf - 13.82 * lhb - a_hm + (44.9 - 6.55 * lhb) * d_km.log10() + self.city_correction_db
    }

    pub fn shadowing(&self) -> Shadowing {
        Shadowing::new(self.shadow_mean_db, self.shadow_std_db)
    }
}

/// Log-normal shadow fading, drawn in the dB domain.
#[derive(Debug, Clone, Copy)]
pub struct Shadowing {
    mean_db: f64,
    dist: Option<Normal<f64>>,
}

impl Shadowing {
    pub fn new(mean_db: f64, std_db: f64) -> Self {
        Shadowing {
            mean_db,
            dist: (std_db > 0.0).then(|| Normal::new(mean_db, std_db).expect("finite std")),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.dist {
            Some(d) => d.sample(rng),
            None => self.mean_db,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub chip_rate_mcps: f64,
    pub ue_noise_figure_db: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            chip_rate_mcps: 3.84,
            ue_noise_figure_db: 8.0,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.chip_rate_mcps > 0.0 && self.chip_rate_mcps.is_finite()) {
            return Err(Error::invalid(
                "chip_rate_mcps",
                format!("must be positive, got {}", self.chip_rate_mcps),
            ));
        }
        Ok(())
    }

    /// Receiver noise power over the chip bandwidth, in dBm.
    pub fn thermal_noise_dbm(&self) -> f64 {
        -174.0 + 10.0 * (self.chip_rate_mcps * 1e6).log10() + self.ue_noise_figure_db
    }
}

pub fn received_power(tx_power_dbm: f64, tx_gain_db: f64, loss_db: f64, shadow_db: f64) -> f64 {
    tx_power_dbm + tx_gain_db - loss_db + shadow_db
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}
