//! DC-HSDPA downlink link model: interference terms, orthogonality, SINR,
//! adaptive modulation and coding, and per-user throughput.
//!
//! All power arithmetic happens in linear milliwatts; the public dB helpers
//! convert at the edges. Processing gain is not applied to the SINR: it is
//! absorbed into the MCS switching thresholds.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagation::{db_to_linear, linear_to_db};

/// Spreading factor of the HS-PDSCH channelization codes.
pub const HS_PDSCH_SPREADING_FACTOR: f64 = 16.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub hs_pdsch_power_dbm: f64,
    pub hs_scch_power_dbm: f64,
    pub total_codes: u32,
    pub users_per_tti: u32,
    pub loading: f64,
    pub activity_factor: f64,
    pub carriers: u32,
    pub processing_gain_db: f64,
    /// Informational; loading is applied directly to other-cell interference.
    pub interference_margin_db: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        LinkBudget {
            hs_pdsch_power_dbm: 41.63,
            hs_scch_power_dbm: 26.0,
            total_codes: 15,
            users_per_tti: 5,
            loading: 0.70,
            activity_factor: 1.0,
            carriers: 2,
            processing_gain_db: 12.04,
            interference_margin_db: 5.2,
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        if self.total_codes == 0 {
            return Err(Error::invalid("total_codes", "must be at least 1"));
        }
        if self.users_per_tti == 0 {
            return Err(Error::invalid("users_per_tti", "must be at least 1"));
        }
        if self.carriers == 0 {
            return Err(Error::invalid("carriers", "must be at least 1"));
        }
        // loading 0 is allowed for interference-free what-if runs
        if !(0.0..=1.0).contains(&self.loading) {
            return Err(Error::invalid(
                "loading",
                format!("must be a fraction in [0, 1], got {}", self.loading),
            ));
        }
        if !(self.activity_factor > 0.0 && self.activity_factor <= 1.0) {
            return Err(Error::invalid(
                "activity_factor",
                format!("must be a fraction in (0, 1], got {}", self.activity_factor),
            ));
        }
        for (key, v) in [
            ("hs_pdsch_power_dbm", self.hs_pdsch_power_dbm),
            ("hs_scch_power_dbm", self.hs_scch_power_dbm),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(key, "must be finite"));
            }
        }
        Ok(())
    }

    /// Total sector transmit power: HS-PDSCH plus HS-SCCH, summed linearly.
    pub fn total_tx_power_dbm(&self) -> f64 {
        linear_to_db(db_to_linear(self.hs_pdsch_power_dbm) + db_to_linear(self.hs_scch_power_dbm))
    }

    /// Interference margin implied by the loading, `10·log10(1/(1−η))`.
    pub fn loading_margin_db(&self) -> f64 {
        -10.0 * (1.0 - self.loading).log10()
    }

    /// Equal split of codes and HS-PDSCH power across the scheduled users.
    pub fn split_resources(&self) -> Result<ResourceShare> {
        if self.users_per_tti == 0 || !self.total_codes.is_multiple_of(self.users_per_tti) {
            return Err(Error::UnevenCodeSplit {
                total: self.total_codes,
                users: self.users_per_tti,
            });
        }
        Ok(ResourceShare {
            codes_per_user: self.total_codes / self.users_per_tti,
            power_per_user_dbm: self.hs_pdsch_power_dbm - 10.0 * (self.users_per_tti as f64).log10(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourceShare {
    pub codes_per_user: u32,
    pub power_per_user_dbm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modulation {
    #[serde(rename = "QPSK")]
    Qpsk,
    #[serde(rename = "16QAM")]
    Qam16,
    #[serde(rename = "64QAM")]
    Qam64,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> u32 {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modulation::Qpsk => "QPSK",
            Modulation::Qam16 => "16QAM",
            Modulation::Qam64 => "64QAM",
        })
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "QPSK" => Ok(Modulation::Qpsk),
            "16QAM" | "QAM16" => Ok(Modulation::Qam16),
            "64QAM" | "QAM64" => Ok(Modulation::Qam64),
            other => Err(Error::McsTable(format!("unknown modulation `{other}`"))),
        }
    }
}

/// Code rate `num/den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeRate {
    pub num: u32,
    pub den: u32,
}

impl CodeRate {
    pub const fn new(num: u32, den: u32) -> Self {
        CodeRate { num, den }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for CodeRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for CodeRate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::McsTable(format!("code rate `{s}` is not a fraction k/n with 0 < k < n"));
        let (a, b) = s.trim().split_once('/').ok_or_else(bad)?;
        let num: u32 = a.trim().parse().map_err(|_| bad())?;
        let den: u32 = b.trim().parse().map_err(|_| bad())?;
        if num == 0 || num >= den {
            return Err(bad());
        }
        Ok(CodeRate { num, den })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McsEntry {
    pub modulation: Modulation,
    pub code_rate: CodeRate,
    pub sinr_threshold_db: f64,
    /// Information rate carried by one channelization code, bits/s.
    pub per_code_rate_bps: f64,
}

impl McsEntry {
    pub fn new(modulation: Modulation, code_rate: CodeRate, sinr_threshold_db: f64, chip_rate_mcps: f64) -> Self {
        let symbol_rate = chip_rate_mcps * 1e6 / HS_PDSCH_SPREADING_FACTOR;
        McsEntry {
            modulation,
            code_rate,
            sinr_threshold_db,
            per_code_rate_bps: symbol_rate * modulation.bits_per_symbol() as f64 * code_rate.value(),
        }
    }
}

/// The default eight-step ladder, lowest first: (modulation, rate, threshold dB).
///
/// The lowest step and the first 64QAM step are placed so that, with the
/// default 3-sector network at 1000 m, about 15% of users fall below the
/// ladder and about 4.5% reach 64QAM; steps in between are evenly spaced.
/// The 64QAM steps are evenly spaced up to 16 dB, which stays below the
/// highest SINR the interference model produces.
pub const DEFAULT_LADDER: [(Modulation, CodeRate, f64); 8] = [
    (Modulation::Qpsk, CodeRate::new(1, 2), -13.6),
    (Modulation::Qpsk, CodeRate::new(3, 4), -8.9),
    (Modulation::Qam16, CodeRate::new(1, 2), -4.2),
    (Modulation::Qam16, CodeRate::new(3, 4), 0.5),
    (Modulation::Qam64, CodeRate::new(3, 5), 5.2),
    (Modulation::Qam64, CodeRate::new(2, 3), 8.8),
    (Modulation::Qam64, CodeRate::new(3, 4), 12.4),
    (Modulation::Qam64, CodeRate::new(5, 6), 16.0),
];

/// An MCS ladder sorted by strictly increasing threshold and rate.
#[derive(Debug, Clone, PartialEq)]
pub struct McsTable {
    entries: Vec<McsEntry>,
}

impl McsTable {
    pub fn new(entries: Vec<McsEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::McsTable("table is empty".into()));
        }
        for w in entries.windows(2) {
            if !(w[1].sinr_threshold_db > w[0].sinr_threshold_db) {
                return Err(Error::McsTable(format!(
                    "thresholds must strictly increase ({} then {})",
                    w[0].sinr_threshold_db, w[1].sinr_threshold_db
                )));
            }
            if !(w[1].per_code_rate_bps > w[0].per_code_rate_bps) {
                return Err(Error::McsTable(format!(
                    "per-code rates must strictly increase ({} {} then {} {})",
                    w[0].modulation, w[0].code_rate, w[1].modulation, w[1].code_rate
                )));
            }
        }
        Ok(McsTable { entries })
    }

    pub fn default_for_chip_rate(chip_rate_mcps: f64) -> Self {
        let entries = DEFAULT_LADDER
            .iter()
            .map(|&(m, r, t)| McsEntry::new(m, r, t, chip_rate_mcps))
            .collect();
        McsTable::new(entries).expect("default ladder is ordered")
    }

    /// Default ladder with replaced thresholds.
    pub fn with_thresholds(thresholds_db: &[f64], chip_rate_mcps: f64) -> Result<Self> {
        if thresholds_db.len() != DEFAULT_LADDER.len() {
            return Err(Error::McsTable(format!(
                "expected {} thresholds, got {}",
                DEFAULT_LADDER.len(),
                thresholds_db.len()
            )));
        }
        let entries = DEFAULT_LADDER
            .iter()
            .zip(thresholds_db)
            .map(|(&(m, r, _), &t)| McsEntry::new(m, r, t, chip_rate_mcps))
            .collect();
        McsTable::new(entries)
    }

    /// Parses `modulation,code_rate,threshold_db` CSV text with a header row.
    pub fn from_csv_str(text: &str, chip_rate_mcps: f64) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::McsTable("missing header row".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["modulation", "code_rate", "threshold_db"] {
            return Err(Error::McsTable(format!(
                "header must be `modulation,code_rate,threshold_db`, got `{header}`"
            )));
        }
        let mut entries = Vec::new();
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::McsTable(format!("row {}: expected 3 fields", i + 1)));
            }
            let threshold: f64 = fields[2]
                .parse()
                .map_err(|_| Error::McsTable(format!("row {}: bad threshold `{}`", i + 1, fields[2])))?;
            entries.push(McsEntry::new(fields[0].parse()?, fields[1].parse()?, threshold, chip_rate_mcps));
        }
        McsTable::new(entries)
    }

    pub fn from_csv_file(path: &Path, chip_rate_mcps: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text, chip_rate_mcps)
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Highest entry whose threshold is at or below `sinr_db`, or `None`
    /// (no data transfer) below the lowest threshold.
    pub fn select(&self, sinr_db: f64) -> Option<&McsEntry> {
        let n = self.entries.partition_point(|e| e.sinr_threshold_db <= sinr_db);
        n.checked_sub(1).map(|i| &self.entries[i])
    }

    pub fn max_per_code_rate(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.per_code_rate_bps)
    }
}

/// Free-function form of [`McsTable::select`] over a raw slice.
pub fn select_mcs(table: &[McsEntry], sinr_db: f64) -> Result<Option<&McsEntry>> {
    if table.is_empty() {
        return Err(Error::Empty("MCS table"));
    }
    let n = table.partition_point(|e| e.sinr_threshold_db <= sinr_db);
    Ok(n.checked_sub(1).map(|i| &table[i]))
}

pub fn user_throughput(entry: Option<&McsEntry>, codes_per_user: u32, carriers: u32) -> f64 {
    entry.map_or(0.0, |e| e.per_code_rate_bps * codes_per_user as f64 * carriers as f64)
}

/// Orthogonality factor falling from `alpha_at_site` to `alpha_at_edge` along
/// a Gaussian profile over the cell radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthogonalityProfile {
    pub alpha_at_site: f64,
    pub alpha_at_edge: f64,
    pub cell_radius_m: f64,
}

impl OrthogonalityProfile {
    pub fn new(alpha_at_site: f64, alpha_at_edge: f64, cell_radius_m: f64) -> Result<Self> {
        if !(alpha_at_edge > 0.0 && alpha_at_edge <= alpha_at_site && alpha_at_site <= 1.0) {
            return Err(Error::invalid(
                "alpha_edge",
                format!("need 0 < alpha_edge <= alpha_site <= 1, got {alpha_at_edge} and {alpha_at_site}"),
            ));
        }
        if !(cell_radius_m > 0.0) {
            return Err(Error::invalid("cell_radius_m", "must be positive"));
        }
        Ok(OrthogonalityProfile {
            alpha_at_site,
            alpha_at_edge,
            cell_radius_m,
        })
    }

    pub fn alpha(&self, distance_m: f64) -> f64 {
        if distance_m >= self.cell_radius_m {
            return self.alpha_at_edge;
        }
        let x = distance_m / self.cell_radius_m;
        self.alpha_at_site * (-x * x * (self.alpha_at_site / self.alpha_at_edge).ln()).exp()
    }
}

/// Own-sector interference, linear form: the non-orthogonal part of the
/// own-sector power received by the user, excluding the user's own signal.
pub fn own_cell_interference_mw(own_sector_rx_mw: f64, user_rx_mw: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid("alpha", format!("must lie in [0, 1], got {alpha}")));
    }
    Ok(((own_sector_rx_mw - user_rx_mw) * (1.0 - alpha)).max(0.0))
}

/// Own-sector interference from transmit-side quantities: total sector power
/// and the user's share (dBm), and the coupling loss to the user (dB).
pub fn own_cell_interference(total_tx_dbm: f64, user_tx_dbm: f64, loss_db: f64, alpha: f64) -> Result<f64> {
    own_cell_interference_mw(
        db_to_linear(total_tx_dbm - loss_db),
        db_to_linear(user_tx_dbm - loss_db),
        alpha,
    )
}

pub fn other_cell_interference(interferer_rx_mw: &[f64], loading: f64, activity: f64) -> f64 {
    loading * activity * interferer_rx_mw.iter().sum::<f64>()
}

pub fn sinr_db(user_rx_mw: f64, i_own_mw: f64, i_other_mw: f64, noise_mw: f64) -> Result<f64> {
    let denom = i_own_mw + i_other_mw + noise_mw;
    if !(denom > 0.0) {
        return Err(Error::invalid("noise", "interference plus noise must be positive"));
    }
    Ok(linear_to_db(user_rx_mw / denom))
}

/// Shannon bound `W·log2(1 + SNR)` in bits/s.
pub fn shannon_capacity(bandwidth_hz: f64, snr_linear: f64) -> f64 {
    bandwidth_hz * (1.0 + snr_linear).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn table() -> McsTable {
        McsTable::default_for_chip_rate(3.84)
    }

    #[test]
    fn budget_cross_checks() {
        let b = LinkBudget::default();
        assert!((b.loading_margin_db() - b.interference_margin_db).abs() < 0.1);
        assert_abs_diff_eq!(b.total_tx_power_dbm(), 41.747, epsilon = 1e-3);
        assert_abs_diff_eq!(
            10.0 * HS_PDSCH_SPREADING_FACTOR.log10(),
            b.processing_gain_db,
            epsilon = 0.01
        );
    }

    #[test]
    fn resource_split() {
        let b = LinkBudget::default();
        let s = b.split_resources().unwrap();
        assert_eq!(s.codes_per_user, 3);
        assert_abs_diff_eq!(s.power_per_user_dbm, 34.64, epsilon = 0.01);

        let one = LinkBudget {
            users_per_tti: 1,
            ..b.clone()
        };
        let s = one.split_resources().unwrap();
        assert_eq!((s.codes_per_user, s.power_per_user_dbm), (15, 41.63));

        let bad = LinkBudget { users_per_tti: 4, ..b };
        assert!(matches!(bad.split_resources(), Err(Error::UnevenCodeSplit { .. })));
    }

    #[test]
    fn orthogonality_anchors() {
        let p = OrthogonalityProfile::new(0.97, 0.7, 577.35).unwrap();
        assert_eq!(p.alpha(0.0), 0.97);
        assert_eq!(p.alpha(577.35), 0.7);
        assert_abs_diff_eq!(p.alpha(577.35 / 2.0), 0.8940, epsilon = 1e-4);
        assert_eq!(p.alpha(5000.0), 0.7);
        assert!(OrthogonalityProfile::new(0.6, 0.7, 1.0).is_err());
    }

    #[test]
    fn own_cell_examples() {
        assert_eq!(own_cell_interference(41.74, 34.64, 139.55, 1.0).unwrap(), 0.0);
        let i = own_cell_interference_mw(10.0, 1.0, 0.0).unwrap();
        assert_abs_diff_eq!(i, 9.0, epsilon = 1e-12);
        // (10^(-9.781) - 10^(-10.491)) * 0.106, evaluated by hand
        let i = own_cell_interference(41.74, 34.64, 139.55, 0.894).unwrap();
        assert_relative_eq!(i, 1.412_896e-11, max_relative = 1e-5);
        assert!(own_cell_interference_mw(1.0, 1.0, 1.5).is_err());
        assert_eq!(own_cell_interference_mw(1.0, 1.0, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn other_cell_examples() {
        assert_eq!(other_cell_interference(&[], 0.7, 1.0), 0.0);
        assert_eq!(other_cell_interference(&[1.0, 2.5], 1.0, 1.0), 3.5);
        assert_relative_eq!(other_cell_interference(&[1e-10, 1e-10], 0.7, 1.0), 1.4e-10, max_relative = 1e-12);
    }

    #[test]
    fn sinr_examples() {
        assert_eq!(sinr_db(1.0, 0.0, 0.0, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(sinr_db(10.0, 0.25, 0.5, 0.25).unwrap(), 10.0, epsilon = 1e-12);
        let n = db_to_linear(-100.16);
        assert_abs_diff_eq!(sinr_db(1e-11, 1e-12, 2e-12, n).unwrap(), -9.97, epsilon = 0.01);
        assert!(sinr_db(1.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn mcs_selection() {
        let t = table();
        assert!(t.select(-20.0).is_none());
        let top = t.select(30.0).unwrap();
        assert_eq!((top.modulation, top.code_rate), (Modulation::Qam64, CodeRate::new(5, 6)));
        let e = t.select(-4.2).unwrap();
        assert_eq!((e.modulation, e.code_rate), (Modulation::Qam16, CodeRate::new(1, 2)));
        assert_eq!(t.select(-4.2001).unwrap().code_rate, CodeRate::new(3, 4));
        assert!(select_mcs(&[], 3.0).is_err());
        assert_eq!(select_mcs(t.entries(), 16.0).unwrap().unwrap(), top);
        assert!(select_mcs(t.entries(), -13.61).unwrap().is_none());
    }

    #[test]
    fn ladder_rates() {
        let rates: Vec<f64> = table().entries().iter().map(|e| e.per_code_rate_bps).collect();
        let expected = [240e3, 360e3, 480e3, 720e3, 864e3, 960e3, 1080e3, 1200e3];
        for (r, e) in rates.iter().zip(expected) {
            assert_abs_diff_eq!(*r, e, epsilon = 1e-6);
        }
    }

    #[test]
    fn throughput_examples() {
        let t = table();
        assert_eq!(user_throughput(None, 3, 2), 0.0);
        assert_abs_diff_eq!(user_throughput(t.select(20.0), 3, 2), 7.2e6, epsilon = 1e-6);
        assert_abs_diff_eq!(user_throughput(t.select(-13.6), 3, 2), 1.44e6, epsilon = 1e-6);
        assert_abs_diff_eq!(5.0 * user_throughput(t.select(99.0), 3, 2), 36e6, epsilon = 1e-6);
    }

    #[test]
    fn shannon() {
        assert_eq!(shannon_capacity(1.0, 1.0), 1.0);
        assert_eq!(shannon_capacity(5e6, 15.0), 20e6);
        assert_eq!(shannon_capacity(5e6, 0.0), 0.0);
    }

    #[test]
    fn csv_override() {
        let text = "modulation,code_rate,threshold_db\nQPSK,1/2,-4\n16QAM,1/2,2\n64QAM,5/6,15\n";
        let t = McsTable::from_csv_str(text, 3.84).unwrap();
        assert_eq!(t.len(), 3);
        assert!(t.select(-4.5).is_none());
        assert!(McsTable::from_csv_str("modulation,code_rate,threshold_db\nQPSK,1/2,3\nQPSK,3/4,2\n", 3.84).is_err());
        assert!(McsTable::from_csv_str("mod,rate\n", 3.84).is_err());
        assert!(McsTable::from_csv_str("modulation,code_rate,threshold_db\n8PSK,1/2,3\n", 3.84).is_err());
        assert!(McsTable::from_csv_str("modulation,code_rate,threshold_db\n", 3.84).is_err());
    }

    proptest! {
        #[test]
        fn sinr_monotone(s in 1e-15f64..1e-6, io in 0.0f64..1e-9, ix in 0.0f64..1e-9, n in 1e-12f64..1e-9, k in 1.01f64..10.0) {
            let base = sinr_db(s, io, ix, n).unwrap();
            prop_assert!(sinr_db(s * k, io, ix, n).unwrap() > base);
            prop_assert!(sinr_db(s, io + n * (k - 1.0), ix, n).unwrap() < base);
            prop_assert!(sinr_db(s, io, ix + n * (k - 1.0), n).unwrap() < base);
        }

        #[test]
        fn orthogonality_bounded_and_monotone(d in 0.0f64..2000.0, dd in 0.0f64..500.0) {
            let p = OrthogonalityProfile::new(0.97, 0.7, 577.35).unwrap();
            let a = p.alpha(d);
            prop_assert!((0.7..=0.97).contains(&a));
            prop_assert!(p.alpha(d + dd) <= a);
        }

        #[test]
        fn throughput_monotone_in_sinr(a in -30.0f64..30.0, b in -30.0f64..30.0) {
            let t = table();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(user_throughput(t.select(lo), 3, 2) <= user_throughput(t.select(hi), 3, 2));
        }

        #[test]
        fn own_cell_non_negative(own in 0.0f64..1e-6, user in 0.0f64..1e-6, alpha in 0.0f64..=1.0) {
            prop_assert!(own_cell_interference_mw(own, user, alpha).unwrap() >= 0.0);
        }
    }
}
