//! Simulation configuration: built-in defaults, the sectioned key-value file
//! format, command-line overrides and the run manifest.
//!
//! Files are TOML with the sections `grid`, `antenna`, `propagation`, `link`,
//! `mcs` and `run`. Unknown keys are rejected. Precedence is
//! flags > file > defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::antenna::{beam_comb, AntennaStrategy, BeamKind};
use crate::beamform::Scenario;
use crate::error::{Error, Result};
use crate::link::{LinkBudget, McsEntry, McsTable};
use crate::propagation::{NoiseConfig, PropagationConfig};
use crate::tessellation::LayoutKind;

pub const DEFAULT_ITERATIONS: u64 = 5000;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_ISD_M: f64 = 1000.0;
pub const DEFAULT_SWEEP_ISDS: [f64; 4] = [250.0, 1000.0, 2000.0, 3000.0];

/// The five compared deployments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseId {
    Sector3,
    Sector6,
    Sector12,
    Switched,
    Adaptive,
}

impl CaseId {
    pub const ALL: [CaseId; 5] = [
        CaseId::Sector3,
        CaseId::Sector6,
        CaseId::Sector12,
        CaseId::Switched,
        CaseId::Adaptive,
    ];

    pub fn layout(self) -> LayoutKind {
        match self {
            CaseId::Sector6 => LayoutKind::SnowFlake6,
            CaseId::Sector12 => LayoutKind::Flower12,
            _ => LayoutKind::Cloverleaf3,
        }
    }

    pub fn beam_kind(self) -> BeamKind {
        match self {
            CaseId::Switched => BeamKind::Switched,
            CaseId::Adaptive => BeamKind::Adaptive,
            _ => BeamKind::Fixed,
        }
    }

    pub fn from_parts(layout: LayoutKind, kind: BeamKind) -> Option<Self> {
        match (layout, kind) {
            (LayoutKind::Cloverleaf3, BeamKind::Fixed) => Some(CaseId::Sector3),
            (LayoutKind::SnowFlake6, BeamKind::Fixed) => Some(CaseId::Sector6),
            (LayoutKind::Flower12, BeamKind::Fixed) => Some(CaseId::Sector12),
            (LayoutKind::Cloverleaf3, BeamKind::Switched) => Some(CaseId::Switched),
            (LayoutKind::Cloverleaf3, BeamKind::Adaptive) => Some(CaseId::Adaptive),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CaseId::Sector3 => "3-Sector",
            CaseId::Sector6 => "6-Sector",
            CaseId::Sector12 => "12-Sector",
            CaseId::Switched => "7 Switched beams",
            CaseId::Adaptive => "Adaptive beam",
        }
    }

    /// Short machine-friendly name used in file names.
    pub fn slug(self) -> &'static str {
        match self {
            CaseId::Sector3 => "3sector",
            CaseId::Sector6 => "6sector",
            CaseId::Sector12 => "12sector",
            CaseId::Switched => "switched",
            CaseId::Adaptive => "adaptive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub layout: LayoutKind,
    pub isd_m: f64,
    pub azimuth_offset_deg: f64,
    pub antenna: AntennaStrategy,
    pub propagation: PropagationConfig,
    pub noise: NoiseConfig,
    pub link: LinkBudget,
    pub alpha_site: f64,
    pub alpha_edge: f64,
    pub mcs: McsTable,
    pub iterations: u64,
    pub master_seed: u64,
}

impl SimulationConfig {
    pub fn for_case(case: CaseId, isd_m: f64) -> Self {
        let layout = case.layout();
        let noise = NoiseConfig::default();
        SimulationConfig {
            layout,
            isd_m,
            azimuth_offset_deg: layout.default_azimuth_offset(),
            antenna: AntennaStrategy::default_for(case.beam_kind(), layout),
            propagation: PropagationConfig::default(),
            mcs: McsTable::default_for_chip_rate(noise.chip_rate_mcps),
            noise,
            link: LinkBudget::default(),
            alpha_site: 0.97,
            alpha_edge: 0.70,
            iterations: DEFAULT_ITERATIONS,
            master_seed: DEFAULT_SEED,
        }
    }

    pub fn case(&self) -> Option<CaseId> {
        CaseId::from_parts(self.layout, self.antenna.kind)
    }

    /// Display name: the case label, or layout and beam kind for
    /// combinations outside the five standard cases.
    pub fn label(&self) -> String {
        match self.case() {
            Some(c) => c.label().to_string(),
            None => format!("{} {}", self.layout.as_str(), self.antenna.kind.as_str()),
        }
    }

    pub fn slug(&self) -> String {
        match self.case() {
            Some(c) => c.slug().to_string(),
            None => format!("{}-{}", self.layout.as_str(), self.antenna.kind.as_str()),
        }
    }

    pub fn users_per_cell(&self) -> u32 {
        self.link.users_per_tti
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.isd_m > 0.0 && self.isd_m.is_finite()) {
            return Err(Error::invalid("isd_m", format!("must be positive, got {}", self.isd_m)));
        }
        if !(0.0..360.0).contains(&self.azimuth_offset_deg) {
            return Err(Error::invalid("azimuth_offset_deg", "must lie in [0, 360)"));
        }
        if self.iterations == 0 {
            return Err(Error::invalid("iterations", "must be at least 1"));
        }
        if !(self.alpha_edge > 0.0 && self.alpha_edge <= self.alpha_site && self.alpha_site <= 1.0) {
            return Err(Error::invalid("alpha_edge", "need 0 < alpha_edge <= alpha_site <= 1"));
        }
        self.antenna.validate()?;
        self.propagation.validate()?;
        self.noise.validate()?;
        self.link.validate()?;
        self.link.split_resources()?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// File format

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<ManifestInfo>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub antenna: AntennaSection,
    #[serde(default)]
    pub propagation: PropagationSection,
    #[serde(default)]
    pub link: LinkSection,
    #[serde(default)]
    pub mcs: McsSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beamform: Option<BeamformSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub layout: Option<String>,
    pub isd_m: Option<f64>,
    pub azimuth_offset_deg: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntennaSection {
    pub case: Option<String>,
    pub gain_dbi: Option<f64>,
    pub hpbw_deg: Option<f64>,
    pub front_to_back_db: Option<f64>,
    pub beam_count: Option<u32>,
    pub beam_spacing_deg: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationSection {
    pub frequency_mhz: Option<f64>,
    pub bs_height_m: Option<f64>,
    pub ms_height_m: Option<f64>,
    pub city_correction_db: Option<f64>,
    pub shadow_std_db: Option<f64>,
    pub shadow_mean_db: Option<f64>,
    pub min_distance_m: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    pub hs_pdsch_power_dbm: Option<f64>,
    pub hs_scch_power_dbm: Option<f64>,
    pub total_codes: Option<u32>,
    pub users_per_tti: Option<u32>,
    pub loading: Option<f64>,
    pub activity_factor: Option<f64>,
    pub carriers: Option<u32>,
    pub processing_gain_db: Option<f64>,
    pub interference_margin_db: Option<f64>,
    pub chip_rate_mcps: Option<f64>,
    pub ue_noise_figure_db: Option<f64>,
    pub alpha_site: Option<f64>,
    pub alpha_edge: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McsRow {
    pub modulation: String,
    pub code_rate: String,
    pub threshold_db: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McsSection {
    /// CSV file with columns `modulation,code_rate,threshold_db`.
    pub table_csv: Option<PathBuf>,
    /// Replacement thresholds for the default ladder.
    pub thresholds_db: Option<Vec<f64>>,
    /// Inline ladder, lowest entry first.
    pub entries: Option<Vec<McsRow>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub iterations: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    /// ISD list for sweeps.
    pub isds_m: Option<Vec<f64>>,
}

/// Parameters of the element-level beamforming demo.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamformSection {
    pub elements: Option<usize>,
    pub spacing_wavelengths: Option<f64>,
    pub desired_angle_deg: Option<f64>,
    pub interferer_angle_deg: Option<f64>,
    pub interferer_power: Option<f64>,
    pub noise_power: Option<f64>,
    pub training_len: Option<usize>,
    pub step_size: Option<f64>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestInfo {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub output_dir: String,
    pub timestamp_unix: u64,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut file = Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        // relative MCS table paths are relative to the config file
        if let (Some(t), Some(dir)) = (&file.mcs.table_csv, path.parent()) {
            if t.is_relative() {
                file.mcs.table_csv = Some(dir.join(t));
            }
        }
        Ok(file)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Command-line overrides; `None` leaves the file/default value in place.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub layout: Option<LayoutKind>,
    pub case: Option<BeamKind>,
    pub isd_m: Option<f64>,
    pub iterations: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

/// A resolved configuration plus execution settings that do not affect results.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedRun {
    pub config: SimulationConfig,
    pub workers: Option<usize>,
}

fn check_range(key: &'static str, v: f64, lo: f64, hi: f64) -> Result<f64> {
    if v.is_finite() && v >= lo && v <= hi {
        Ok(v)
    } else {
        Err(Error::invalid(key, format!("{v} is outside [{lo}, {hi}]")))
    }
}

/// Resolves defaults, file values and flag overrides into a validated run.
pub fn parse_config(file: &ConfigFile, flags: &Overrides) -> Result<ResolvedRun> {
    let layout = match (flags.layout, &file.grid.layout) {
        (Some(l), _) => l,
        (None, Some(s)) => {
            LayoutKind::parse(s).ok_or_else(|| Error::invalid("layout", format!("unknown layout `{s}`")))?
        }
        (None, None) => LayoutKind::Cloverleaf3,
    };
    let kind = match (flags.case, &file.antenna.case) {
        (Some(k), _) => k,
        (None, Some(s)) => BeamKind::parse(s).ok_or_else(|| Error::invalid("case", format!("unknown case `{s}`")))?,
        (None, None) => BeamKind::Fixed,
    };

    let isd = flags.isd_m.or(file.grid.isd_m).unwrap_or(DEFAULT_ISD_M);
    let mut cfg = SimulationConfig::for_case(CaseId::Sector3, isd);
    cfg.layout = layout;
    cfg.azimuth_offset_deg = match file.grid.azimuth_offset_deg {
        Some(v) => check_range("azimuth_offset_deg", v, 0.0, 359.999_999)?,
        None => layout.default_azimuth_offset(),
    };

    let a = &file.antenna;
    let mut antenna = AntennaStrategy::default_for(kind, layout);
    if let Some(v) = a.gain_dbi {
        antenna.gain_max_dbi = v;
    }
    if let Some(v) = a.hpbw_deg {
        antenna.hpbw_deg = check_range("hpbw_deg", v, 0.1, 360.0)?;
    }
    if let Some(v) = a.front_to_back_db {
        antenna.front_to_back_db = v;
    }
    if a.beam_count.is_some() || a.beam_spacing_deg.is_some() {
        if kind != BeamKind::Switched {
            return Err(Error::invalid("beam_count", "only valid with case = \"switched\""));
        }
        let count = a.beam_count.unwrap_or(crate::antenna::SWITCHED_BEAM_COUNT as u32);
        if count == 0 {
            return Err(Error::invalid("beam_count", "must be at least 1"));
        }
        let spacing = a.beam_spacing_deg.unwrap_or(crate::antenna::SWITCHED_BEAM_SPACING_DEG);
        antenna.beam_centers_deg = beam_comb(count as usize, spacing);
    }
    cfg.antenna = antenna;

    let p = &file.propagation;
    let prop = &mut cfg.propagation;
    prop.frequency_mhz = p.frequency_mhz.unwrap_or(prop.frequency_mhz);
    prop.bs_height_m = p.bs_height_m.unwrap_or(prop.bs_height_m);
    prop.ms_height_m = p.ms_height_m.unwrap_or(prop.ms_height_m);
    prop.city_correction_db = p.city_correction_db.unwrap_or(prop.city_correction_db);
    prop.shadow_std_db = p.shadow_std_db.unwrap_or(prop.shadow_std_db);
    prop.shadow_mean_db = p.shadow_mean_db.unwrap_or(prop.shadow_mean_db);
    prop.min_distance_m = p.min_distance_m.unwrap_or(prop.min_distance_m);

    let l = &file.link;
    let link = &mut cfg.link;
    link.hs_pdsch_power_dbm = l.hs_pdsch_power_dbm.unwrap_or(link.hs_pdsch_power_dbm);
    link.hs_scch_power_dbm = l.hs_scch_power_dbm.unwrap_or(link.hs_scch_power_dbm);
    link.total_codes = l.total_codes.unwrap_or(link.total_codes);
    link.users_per_tti = l.users_per_tti.unwrap_or(link.users_per_tti);
    if let Some(v) = l.loading {
        link.loading = check_range("loading", v, 0.0, 1.0)?;
    }
    if let Some(v) = l.activity_factor {
        link.activity_factor = check_range("activity_factor", v, f64::MIN_POSITIVE, 1.0)?;
    }
    link.carriers = l.carriers.unwrap_or(link.carriers);
    link.processing_gain_db = l.processing_gain_db.unwrap_or(link.processing_gain_db);
    link.interference_margin_db = l.interference_margin_db.unwrap_or(link.interference_margin_db);
    cfg.noise.chip_rate_mcps = l.chip_rate_mcps.unwrap_or(cfg.noise.chip_rate_mcps);
    cfg.noise.ue_noise_figure_db = l.ue_noise_figure_db.unwrap_or(cfg.noise.ue_noise_figure_db);
    if let Some(v) = l.alpha_site {
        cfg.alpha_site = check_range("alpha_site", v, 0.0, 1.0)?;
    }
    if let Some(v) = l.alpha_edge {
        cfg.alpha_edge = check_range("alpha_edge", v, 0.0, 1.0)?;
    }

    let chip = cfg.noise.chip_rate_mcps;
    let m = &file.mcs;
    let given = [m.table_csv.is_some(), m.thresholds_db.is_some(), m.entries.is_some()];
    if given.iter().filter(|g| **g).count() > 1 {
        return Err(Error::invalid("mcs", "set only one of table_csv, thresholds_db, entries"));
    }
    if let Some(path) = &m.table_csv {
        cfg.mcs = McsTable::from_csv_file(path, chip)?;
    } else if let Some(t) = &m.thresholds_db {
        cfg.mcs = McsTable::with_thresholds(t, chip)?;
    } else if let Some(rows) = &m.entries {
        let entries = rows
            .iter()
            .map(|r| Ok(McsEntry::new(r.modulation.parse()?, r.code_rate.parse()?, r.threshold_db, chip)))
            .collect::<Result<Vec<_>>>()?;
        cfg.mcs = McsTable::new(entries)?;
    } else {
        cfg.mcs = McsTable::default_for_chip_rate(chip);
    }

    cfg.iterations = flags.iterations.or(file.run.iterations).unwrap_or(DEFAULT_ITERATIONS);
    cfg.master_seed = flags.seed.or(file.run.seed).unwrap_or(DEFAULT_SEED);
    let workers = flags.workers.or(file.run.workers);
    if workers == Some(0) {
        return Err(Error::invalid("workers", "must be at least 1"));
    }

    cfg.validate()?;
    Ok(ResolvedRun { config: cfg, workers })
}

impl SimulationConfig {
    /// The fully populated file form of this configuration.
    pub fn to_file(&self) -> ConfigFile {
        ConfigFile {
            manifest: None,
            grid: GridSection {
                layout: Some(self.layout.as_str().to_string()),
                isd_m: Some(self.isd_m),
                azimuth_offset_deg: Some(self.azimuth_offset_deg),
            },
            antenna: AntennaSection {
                case: Some(self.antenna.kind.as_str().to_string()),
                gain_dbi: Some(self.antenna.gain_max_dbi),
                hpbw_deg: Some(self.antenna.hpbw_deg),
                front_to_back_db: Some(self.antenna.front_to_back_db),
                beam_count: (self.antenna.kind == BeamKind::Switched)
                    .then_some(self.antenna.beam_centers_deg.len() as u32),
                beam_spacing_deg: (self.antenna.kind == BeamKind::Switched)
                    .then(|| match self.antenna.beam_centers_deg.as_slice() {
                        [a, b, ..] => b - a,
                        _ => crate::antenna::SWITCHED_BEAM_SPACING_DEG,
                    }),
            },
            propagation: PropagationSection {
                frequency_mhz: Some(self.propagation.frequency_mhz),
                bs_height_m: Some(self.propagation.bs_height_m),
                ms_height_m: Some(self.propagation.ms_height_m),
                city_correction_db: Some(self.propagation.city_correction_db),
                shadow_std_db: Some(self.propagation.shadow_std_db),
                shadow_mean_db: Some(self.propagation.shadow_mean_db),
                min_distance_m: Some(self.propagation.min_distance_m),
            },
            link: LinkSection {
                hs_pdsch_power_dbm: Some(self.link.hs_pdsch_power_dbm),
                hs_scch_power_dbm: Some(self.link.hs_scch_power_dbm),
                total_codes: Some(self.link.total_codes),
                users_per_tti: Some(self.link.users_per_tti),
                loading: Some(self.link.loading),
                activity_factor: Some(self.link.activity_factor),
                carriers: Some(self.link.carriers),
                processing_gain_db: Some(self.link.processing_gain_db),
                interference_margin_db: Some(self.link.interference_margin_db),
                chip_rate_mcps: Some(self.noise.chip_rate_mcps),
                ue_noise_figure_db: Some(self.noise.ue_noise_figure_db),
                alpha_site: Some(self.alpha_site),
                alpha_edge: Some(self.alpha_edge),
            },
            mcs: McsSection {
                table_csv: None,
                thresholds_db: None,
                entries: Some(
                    self.mcs
                        .entries()
                        .iter()
                        .map(|e| McsRow {
                            modulation: e.modulation.to_string(),
                            code_rate: e.code_rate.to_string(),
                            threshold_db: e.sinr_threshold_db,
                        })
                        .collect(),
                ),
            },
            run: RunSection {
                iterations: Some(self.iterations),
                seed: Some(self.master_seed),
                workers: None,
                isds_m: None,
            },
            beamform: None,
        }
    }
}

/// Serializes `config` together with run metadata as a config file that
/// reproduces the run when passed back through `--config`.
pub fn render_manifest(config: &SimulationConfig, info: ManifestInfo) -> Result<String> {
    let mut file = config.to_file();
    file.manifest = Some(info);
    toml::to_string(&file).map_err(|e| Error::Config(e.to_string()))
}

/// Resolves the beamforming demo scenario: flags (`seed`, `steps`) over
/// the `[beamform]` section over defaults.
pub fn parse_beamform(file: &ConfigFile, seed: Option<u64>, steps: Option<usize>) -> Result<Scenario> {
    let b = file.beamform.clone().unwrap_or_default();
    let d = Scenario::default();
    let sc = Scenario {
        element_count: b.elements.unwrap_or(d.element_count),
        spacing_wavelengths: b.spacing_wavelengths.unwrap_or(d.spacing_wavelengths),
        desired_angle_deg: check_range("desired_angle_deg", b.desired_angle_deg.unwrap_or(d.desired_angle_deg), -90.0, 90.0)?,
        interferer_angle_deg: check_range(
            "interferer_angle_deg",
            b.interferer_angle_deg.unwrap_or(d.interferer_angle_deg),
            -90.0,
            90.0,
        )?,
        interferer_power: b.interferer_power.unwrap_or(d.interferer_power),
        noise_power: b.noise_power.unwrap_or(d.noise_power),
        training_len: b.training_len.unwrap_or(d.training_len),
        step_size: b.step_size.unwrap_or(d.step_size),
        steps: steps.or(b.steps).unwrap_or(d.steps),
        seed: seed.or(b.seed).unwrap_or(d.seed),
    };
    sc.validate()?;
    Ok(sc)
}

pub fn render_beamform_manifest(sc: &Scenario, info: ManifestInfo) -> Result<String> {
    let file = ConfigFile {
        manifest: Some(info),
        beamform: Some(BeamformSection {
            elements: Some(sc.element_count),
            spacing_wavelengths: Some(sc.spacing_wavelengths),
            desired_angle_deg: Some(sc.desired_angle_deg),
            interferer_angle_deg: Some(sc.interferer_angle_deg),
            interferer_power: Some(sc.interferer_power),
            noise_power: Some(sc.noise_power),
            training_len: Some(sc.training_len),
            step_size: Some(sc.step_size),
            steps: Some(sc.steps),
            seed: Some(sc.seed),
        }),
        ..ConfigFile::default()
    };
    toml::to_string(&file).map_err(|e| Error::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(text: &str, flags: Overrides) -> Result<SimulationConfig> {
        parse_config(&ConfigFile::parse(text)?, &flags).map(|r| r.config)
    }

    #[test]
    fn empty_config_gives_defaults() {
        let cfg = resolve("", Overrides::default()).unwrap();
        assert_eq!(cfg.link.hs_pdsch_power_dbm, 41.63);
        assert_eq!(cfg.link.total_codes, 15);
        assert_eq!(cfg.link.users_per_tti, 5);
        assert_eq!(cfg.link.loading, 0.70);
        assert_eq!(cfg.noise.ue_noise_figure_db, 8.0);
        assert_eq!(cfg, SimulationConfig::for_case(CaseId::Sector3, 1000.0));
    }

    #[test]
    fn flags_beat_file() {
        let flags = Overrides {
            isd_m: Some(2000.0),
            ..Default::default()
        };
        let cfg = resolve("[grid]\nisd_m = 1000\n", flags).unwrap();
        assert_eq!(cfg.isd_m, 2000.0);
        let cfg = resolve("[grid]\nisd_m = 1500.0\n", Overrides::default()).unwrap();
        assert_eq!(cfg.isd_m, 1500.0);
    }

    #[test]
    fn errors_name_the_key() {
        let err = resolve("[link]\nloading = 1.5\n", Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("loading"), "{err}");
        let err = resolve("[link]\nbogus = 1\n", Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let err = resolve("[run]\niterations = \"many\"\n", Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("iterations") || err.to_string().contains("integer"), "{err}");
        let err = resolve("[grid]\nlayout = \"hex\"\n", Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("layout"), "{err}");
        let err = resolve("[propagation]\nfrequency_mhz = 900\n", Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("frequency_mhz"), "{err}");
    }

    #[test]
    fn case_and_layout_selection() {
        let cfg = resolve(
            "[grid]\nlayout = \"12sector\"\n[antenna]\ncase = \"fixed\"\n",
            Overrides::default(),
        )
        .unwrap();
        assert_eq!(cfg.case(), Some(CaseId::Sector12));
        assert_eq!(cfg.antenna.gain_max_dbi, 21.15);
        let cfg = resolve(
            "",
            Overrides {
                case: Some(BeamKind::Adaptive),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(cfg, SimulationConfig::for_case(CaseId::Adaptive, 1000.0));
    }

    #[test]
    fn mcs_overrides() {
        let cfg = resolve(
            "[mcs]\nthresholds_db = [-6, -3, 0, 3, 6, 9, 12, 15]\n",
            Overrides::default(),
        )
        .unwrap();
        assert_eq!(cfg.mcs.entries()[0].sinr_threshold_db, -6.0);
        assert!(resolve("[mcs]\nthresholds_db = [1, 2]\n", Overrides::default()).is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let mut cfg = SimulationConfig::for_case(CaseId::Switched, 2000.0);
        cfg.iterations = 77;
        cfg.master_seed = 9;
        let text = render_manifest(
            &cfg,
            ManifestInfo {
                tool: "macrocell".into(),
                version: "0.1.0".into(),
                command: "simulate".into(),
                output_dir: "out".into(),
                timestamp_unix: 0,
            },
        )
        .unwrap();
        let back = resolve(&text, Overrides::default()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn beamform_section_round_trip() {
        let file = ConfigFile::parse("[beamform]\nelements = 4\nstep_size = 0.01\n").unwrap();
        let sc = parse_beamform(&file, Some(3), None).unwrap();
        assert_eq!((sc.element_count, sc.step_size, sc.seed, sc.steps), (4, 0.01, 3, 2000));
        let text = render_beamform_manifest(&sc, ManifestInfo::default()).unwrap();
        let back = parse_beamform(&ConfigFile::parse(&text).unwrap(), None, None).unwrap();
        assert_eq!(back, sc);
        let err = parse_beamform(&ConfigFile::parse("[beamform]\ndesired_angle_deg = 120\n").unwrap(), None, None)
            .unwrap_err();
        assert!(err.to_string().contains("desired_angle_deg"));
        assert!(ConfigFile::parse("[beamform]\nmu = 1\n").is_err());
    }
}
