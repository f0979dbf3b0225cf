//! Statistics over campaign samples and the table/CSV data products.

use std::io::Write;
use std::path::Path;

use crate::config::SimulationConfig;
use crate::engine::SampleStore;
use crate::error::{Error, Result};
use crate::link::{user_throughput, Modulation};
use crate::propagation::{db_to_linear, linear_to_db};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsSummary {
    pub p10: f64,
    pub p50: f64,
    pub p90: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub n: usize,
}

/// Percentile `p` (0..=100) of ascending-sorted data, linear interpolation
/// at zero-based rank `p/100·(n−1)`.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn summarize(samples: &[f64]) -> Result<StatsSummary> {
    if samples.is_empty() {
        return Err(Error::Empty("samples"));
    }
    let n = samples.len();
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    Ok(StatsSummary {
        p10: percentile_sorted(&sorted, 10.0),
        p50: percentile_sorted(&sorted, 50.0),
        p90: percentile_sorted(&sorted, 90.0),
        mean,
        std: var.sqrt(),
        n,
    })
}

/// Cell SINR of one TTI: the linear mean of the users' SINRs, in dB.
pub fn cell_average_sinr(user_sinr_db: &[f64]) -> f64 {
    let mean = user_sinr_db.iter().map(|v| db_to_linear(*v)).sum::<f64>() / user_sinr_db.len() as f64;
    linear_to_db(mean)
}

pub fn relative_gain_db(case_mean_db: f64, reference_mean_db: f64) -> f64 {
    case_mean_db - reference_mean_db
}

pub fn relative_gain_pct(case_mean: f64, reference_mean: f64) -> Result<f64> {
    if reference_mean == 0.0 {
        return Err(Error::invalid("reference_mean", "must be non-zero"));
    }
    Ok(100.0 * (case_mean - reference_mean) / reference_mean)
}

/// Fraction of samples with exactly zero throughput.
pub fn probability_no_data(user_throughputs: &[f64]) -> f64 {
    if user_throughputs.is_empty() {
        return 0.0;
    }
    user_throughputs.iter().filter(|t| **t == 0.0).count() as f64 / user_throughputs.len() as f64
}

pub fn site_throughput(mean_cell_throughput: f64, sectors_per_site: usize) -> f64 {
    mean_cell_throughput * sectors_per_site as f64
}

/// Empirical CDF points `(value, rank/n)`, ascending; for tied values only
/// the last (highest) rank is kept.
pub fn empirical_cdf(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, v) in sorted.iter().enumerate() {
        let p = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == *v => last.1 = p,
            _ => out.push((*v, p)),
        }
    }
    out
}

pub fn write_cdf<W: Write>(samples: &[f64], mut out: W) -> std::io::Result<()> {
    writeln!(out, "value,cdf")?;
    for (v, p) in empirical_cdf(samples) {
        writeln!(out, "{v},{p}")?;
    }
    Ok(())
}

pub fn export_cdf(samples: &[f64], path: &Path) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Empty("samples"));
    }
    write_file(path, |w| write_cdf(samples, w))
}

pub(crate) fn write_file(path: &Path, f: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> std::io::Result<()>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Per-case statistics for one campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseReport {
    pub label: String,
    pub slug: String,
    pub isd_m: f64,
    pub sectors_per_site: usize,
    pub user_sinr: StatsSummary,
    pub cell_sinr: StatsSummary,
    /// In Mbps.
    pub user_throughput: StatsSummary,
    /// In Mbps.
    pub cell_throughput: StatsSummary,
    pub prob_no_data: f64,
    /// Fraction of users served with 64QAM.
    pub share_64qam: f64,
}

impl CaseReport {
    pub fn from_store(config: &SimulationConfig, store: &SampleStore) -> Result<Self> {
        let to_mbps = |v: Vec<f64>| v.into_iter().map(|x| x / 1e6).collect::<Vec<_>>();
        let codes = config.link.split_resources()?.codes_per_user;
        let qam64_min_bps = config
            .mcs
            .entries()
            .iter()
            .find(|e| e.modulation == Modulation::Qam64)
            .map(|e| user_throughput(Some(e), codes, config.link.carriers))
            .unwrap_or(f64::INFINITY);
        let user_tput = store.user_throughput_bps();
        let share_64qam = user_tput.iter().filter(|t| **t >= qam64_min_bps).count() as f64 / user_tput.len().max(1) as f64;
        Ok(CaseReport {
            label: config.label(),
            slug: config.slug(),
            isd_m: config.isd_m,
            sectors_per_site: config.layout.sectors_per_site(),
            user_sinr: summarize(&store.user_sinr_db())?,
            cell_sinr: summarize(&store.cell_sinr_db())?,
            prob_no_data: probability_no_data(&user_tput),
            user_throughput: summarize(&to_mbps(user_tput))?,
            cell_throughput: summarize(&to_mbps(store.cell_throughput_bps()))?,
            share_64qam,
        })
    }

    pub fn mean_site_throughput(&self) -> f64 {
        site_throughput(self.cell_throughput.mean, self.sectors_per_site)
    }
}

/// Which statistic a comparison table reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    UserSinr,
    CellSinr,
    CellThroughput,
}

impl Metric {
    fn pick(self, r: &CaseReport) -> &StatsSummary {
        match self {
            Metric::UserSinr => &r.user_sinr,
            Metric::CellSinr => &r.cell_sinr,
            Metric::CellThroughput => &r.cell_throughput,
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Metric::UserSinr => "Statistical Analysis of User SINR",
            Metric::CellSinr => "Statistical Analysis of SINR over whole Cell",
            Metric::CellThroughput => "Statistical Analysis of Cell Throughput",
        }
    }

    fn headers(self) -> [&'static str; 6] {
        match self {
            Metric::UserSinr => [
                "10 percentile user SINR (dB)",
                "50 percentile user SINR (dB)",
                "90 percentile user SINR (dB)",
                "Mean user SINR (dB)",
                "STD user SINR (dB)",
                "Relative SINR gain (dB)",
            ],
            Metric::CellSinr => [
                "10 percentile cell SINR (dB)",
                "50 percentile cell SINR (dB)",
                "90 percentile cell SINR (dB)",
                "Mean cell SINR (dB)",
                "STD cell SINR (dB)",
                "Relative SINR gain (dB)",
            ],
            Metric::CellThroughput => [
                "10 percentile cell throughput (Mbps)",
                "50 percentile cell throughput (Mbps)",
                "90 percentile cell throughput (Mbps)",
                "Mean cell throughput (Mbps)",
                "STD cell throughput (Mbps)",
                "Relative throughput gain (%)",
            ],
        }
    }

    fn relative(self, r: &StatsSummary, reference: &StatsSummary) -> f64 {
        match self {
            Metric::UserSinr | Metric::CellSinr => relative_gain_db(r.mean, reference.mean),
            Metric::CellThroughput => relative_gain_pct(r.mean, reference.mean).unwrap_or(f64::NAN),
        }
    }
}

/// Table rows: label followed by six formatted cells. The first report is
/// the reference for the relative-gain column.
pub fn comparison_rows(reports: &[CaseReport], metric: Metric) -> Vec<[String; 7]> {
    let Some(reference) = reports.first().map(|r| metric.pick(r)) else {
        return Vec::new();
    };
    reports
        .iter()
        .map(|r| {
            let s = metric.pick(r);
            [
                r.label.clone(),
                format!("{:.2}", s.p10),
                format!("{:.2}", s.p50),
                format!("{:.2}", s.p90),
                format!("{:.2}", s.mean),
                format!("{:.2}", s.std),
                format!("{:.2}", metric.relative(s, reference)),
            ]
        })
        .collect()
}

pub fn render_markdown(reports: &[CaseReport], metric: Metric) -> String {
    let h = metric.headers();
    let mut out = format!("### {}\n\n|  | {} |\n|---|", metric.title(), h.join(" | "));
    out.push_str(&"---|".repeat(h.len()));
    out.push('\n');
    for row in comparison_rows(reports, metric) {
        out.push_str(&format!("| {} |\n", row.join(" | ")));
    }
    out
}

pub fn render_tsv(reports: &[CaseReport], metric: Metric) -> String {
    let mut out = format!("case\t{}\n", metric.headers().join("\t"));
    for row in comparison_rows(reports, metric) {
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}

/// Headline figures per case: no-data probability, 64QAM share and mean
/// user, cell and site throughput.
pub fn render_overview_markdown(reports: &[CaseReport]) -> String {
    let mut out = String::from(
        "### Overview\n\n|  | Probability of no data transfer | 64QAM share | Mean user throughput (Mbps) | Mean cell throughput (Mbps) | Mean site throughput (Mbps) |\n|---|---|---|---|---|---|\n",
    );
    for r in reports {
        out.push_str(&format!(
            "| {} | {:.4} | {:.4} | {:.2} | {:.2} | {:.2} |\n",
            r.label,
            r.prob_no_data,
            r.share_64qam,
            r.user_throughput.mean,
            r.cell_throughput.mean,
            r.mean_site_throughput()
        ));
    }
    out
}

pub fn render_overview_tsv(reports: &[CaseReport]) -> String {
    let mut out = String::from(
        "case\tprob_no_data\tshare_64qam\tmean_user_tput_mbps\tmean_cell_tput_mbps\tmean_site_tput_mbps\n",
    );
    for r in reports {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            r.slug,
            r.prob_no_data,
            r.share_64qam,
            r.user_throughput.mean,
            r.cell_throughput.mean,
            r.mean_site_throughput()
        ));
    }
    out
}

/// One row per statistic: `case, metric, p10, p50, p90, mean, std, n`.
pub fn render_distributions_tsv(reports: &[CaseReport]) -> String {
    let mut out = String::from("case\tmetric\tp10\tp50\tp90\tmean\tstd\tn\n");
    for r in reports {
        for (name, s) in [
            ("user_sinr_db", &r.user_sinr),
            ("cell_sinr_db", &r.cell_sinr),
            ("user_throughput_mbps", &r.user_throughput),
            ("cell_throughput_mbps", &r.cell_throughput),
        ] {
            out.push_str(&format!(
                "{}\t{name}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                r.slug, s.p10, s.p50, s.p90, s.mean, s.std, s.n
            ));
        }
    }
    out
}

/// Mean cell and site throughput per case and ISD, with relative gains
/// against `reference` (normally 3-sector at 1000 m).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub label: String,
    pub slug: String,
    pub isd_m: f64,
    pub mean_cell_mbps: f64,
    pub mean_site_mbps: f64,
}

impl SweepRow {
    pub fn from_report(r: &CaseReport) -> Self {
        SweepRow {
            label: r.label.clone(),
            slug: r.slug.clone(),
            isd_m: r.isd_m,
            mean_cell_mbps: r.cell_throughput.mean,
            mean_site_mbps: r.mean_site_throughput(),
        }
    }
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "case,isd_m,mean_cell_tput_mbps,mean_site_tput_mbps")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.slug, r.isd_m, r.mean_cell_mbps, r.mean_site_mbps)?;
    }
    Ok(())
}

/// Cell/site throughput table grouped by ISD. Relative gains are computed
/// against `reference` when provided.
/// Formatted relative cell and site gains, `-` without a usable reference.
fn sweep_gains(r: &SweepRow, reference: Option<&SweepRow>) -> (String, String) {
    let fmt = |v: Result<f64>| v.map(|g| format!("{g:.2}")).unwrap_or_else(|_| "-".to_string());
    match reference {
        Some(re) => (
            fmt(relative_gain_pct(r.mean_cell_mbps, re.mean_cell_mbps)),
            fmt(relative_gain_pct(r.mean_site_mbps, re.mean_site_mbps)),
        ),
        None => ("-".to_string(), "-".to_string()),
    }
}

pub fn render_sweep_markdown(rows: &[SweepRow], reference: Option<&SweepRow>) -> String {
    let mut out = String::from(
        "### Mean cell and site throughput versus ISD\n\n|  | Mean cell throughput (Mbps) | Relative cell throughput gain (%) | Mean site throughput (Mbps) | Relative site throughput gain (%) |\n|---|---|---|---|---|\n",
    );
    let mut last_isd = None;
    for r in rows {
        if last_isd != Some(r.isd_m) {
            out.push_str(&format!("| **ISD = {} meter** | | | | |\n", r.isd_m));
            last_isd = Some(r.isd_m);
        }
        let (gc, gs) = sweep_gains(r, reference);
        out.push_str(&format!(
            "| {} | {:.2} | {} | {:.2} | {} |\n",
            r.label,
            r.mean_cell_mbps,
            gc,
            r.mean_site_mbps,
            gs
        ));
    }
    out
}

pub fn render_sweep_tsv(rows: &[SweepRow], reference: Option<&SweepRow>) -> String {
    let mut out = String::from("isd_m\tcase\tmean_cell_tput_mbps\trel_cell_gain_pct\tmean_site_tput_mbps\trel_site_gain_pct\n");
    for r in rows {
        let (gc, gs) = sweep_gains(r, reference);
        out.push_str(&format!(
            "{}\t{}\t{:.2}\t{}\t{:.2}\t{}\n",
            r.isd_m,
            r.label,
            r.mean_cell_mbps,
            gc,
            r.mean_site_mbps,
            gs
        ));
    }
    out
}
