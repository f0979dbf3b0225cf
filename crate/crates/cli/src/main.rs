use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use macrocell::antenna::BeamKind;
use macrocell::beamform;
use macrocell::config::{
    self, AntennaSection, CaseId, ConfigFile, ManifestInfo, Overrides, ResolvedRun, SimulationConfig,
    DEFAULT_SWEEP_ISDS,
};
use macrocell::engine::{run_campaign, SampleStore};
use macrocell::report::{self, CaseReport, Metric, SweepRow};
use macrocell::tessellation::{LayoutKind, NetworkGrid};

/// Monte Carlo simulator for dual-carrier HSDPA macro cells.
#[derive(Parser)]
#[command(name = "macrocell", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one case at one ISD and write samples, summaries and CDFs.
    Simulate {
        #[command(flatten)]
        case: CaseArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Mean cell and site throughput over a list of ISDs.
    SweepIsd {
        #[command(flatten)]
        case: CaseArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated ISDs in metres.
        #[arg(long, value_delimiter = ',')]
        isds: Option<Vec<f64>>,
    },
    /// Run all five cases at one ISD and write the comparison tables.
    CompareCases {
        #[command(flatten)]
        run: RunArgs,
    },
    /// LMS beamforming on a uniform linear array; writes the learning curve.
    BeamformDemo {
        /// Seed of the training block.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of adaptation steps.
        #[arg(long)]
        iterations: Option<usize>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Horizontal antenna patterns as CSV.
    DumpPatterns {
        #[command(flatten)]
        case: CaseArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Site and sector positions as CSV.
    DumpGrid {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long)]
        isd: Option<f64>,
        #[command(flatten)]
        io: IoArgs,
    },
}

#[derive(Args, Clone)]
struct IoArgs {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Configuration file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Inter-site distance in metres.
    #[arg(long)]
    isd: Option<f64>,
    #[arg(long)]
    iterations: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args, Clone, Default)]
struct CaseArgs {
    #[arg(long, value_enum)]
    layout: Option<LayoutArg>,
    #[arg(long = "case", value_enum)]
    beam: Option<BeamArg>,
}

#[derive(ValueEnum, Clone, Copy)]
enum LayoutArg {
    #[value(name = "3sector")]
    Three,
    #[value(name = "6sector")]
    Six,
    #[value(name = "12sector")]
    Twelve,
}

impl From<LayoutArg> for LayoutKind {
    fn from(l: LayoutArg) -> Self {
        match l {
            LayoutArg::Three => LayoutKind::Cloverleaf3,
            LayoutArg::Six => LayoutKind::SnowFlake6,
            LayoutArg::Twelve => LayoutKind::Flower12,
        }
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum BeamArg {
    Fixed,
    Switched,
    Adaptive,
}

impl From<BeamArg> for BeamKind {
    fn from(b: BeamArg) -> Self {
        match b {
            BeamArg::Fixed => BeamKind::Fixed,
            BeamArg::Switched => BeamKind::Switched,
            BeamArg::Adaptive => BeamKind::Adaptive,
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate { case, run } => simulate(&case, &run),
        Command::SweepIsd { case, run, isds } => sweep_isd(&case, &run, isds),
        Command::CompareCases { run } => compare_cases(&run),
        Command::BeamformDemo { seed, iterations, io } => beamform_demo(seed, iterations, &io),
        Command::DumpPatterns { case, io } => dump_patterns(&case, &io),
        Command::DumpGrid { case, isd, io } => dump_grid(&case, isd, &io),
    }
}

fn load_file(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        Some(p) => Ok(ConfigFile::load(p)?),
        None => Ok(ConfigFile::default()),
    }
}

fn overrides(case: &CaseArgs, run: Option<&RunArgs>) -> Overrides {
    Overrides {
        layout: case.layout.map(Into::into),
        case: case.beam.map(Into::into),
        isd_m: run.and_then(|r| r.isd),
        iterations: run.and_then(|r| r.iterations),
        seed: run.and_then(|r| r.seed),
        workers: run.and_then(|r| r.workers),
    }
}

/// True when the flags or the file pin a layout or antenna case.
fn pins_case(case: &CaseArgs, file: &ConfigFile) -> bool {
    case.layout.is_some() || case.beam.is_some() || file.grid.layout.is_some() || file.antenna != AntennaSection::default()
}

/// The file with every layout and antenna setting removed, so each
/// standard case can apply its own defaults.
fn case_neutral(file: &ConfigFile) -> ConfigFile {
    let mut f = file.clone();
    f.grid.layout = None;
    f.grid.azimuth_offset_deg = None;
    f.antenna = AntennaSection::default();
    f
}

fn resolve_case(file: &ConfigFile, case: CaseId, run: &RunArgs) -> Result<ResolvedRun> {
    let flags = Overrides {
        layout: Some(case.layout()),
        case: Some(case.beam_kind()),
        ..overrides(&CaseArgs::default(), Some(run))
    };
    Ok(config::parse_config(&case_neutral(file), &flags)?)
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn write_with(dir: &Path, name: &str, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let path = dir.join(name);
    let file = fs::File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).with_context(|| format!("cannot write {}", path.display()))
}

fn manifest_info(command: &str, out: &Path) -> ManifestInfo {
    ManifestInfo {
        tool: "macrocell".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        output_dir: out.display().to_string(),
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    }
}

fn write_manifest(out: &Path, text: &str) -> Result<()> {
    write_text(out, "manifest.toml", text)
}

fn write_cdfs(out: &Path, prefix: &str, store: &SampleStore) -> Result<()> {
    let mbps = |v: Vec<f64>| v.into_iter().map(|x| x / 1e6).collect::<Vec<_>>();
    let sets = [
        ("user_sinr", store.user_sinr_db()),
        ("cell_sinr", store.cell_sinr_db()),
        ("user_throughput", mbps(store.user_throughput_bps())),
        ("cell_throughput", mbps(store.cell_throughput_bps())),
    ];
    for (name, samples) in sets {
        report::export_cdf(&samples, &out.join(format!("{prefix}{name}.csv")))?;
    }
    Ok(())
}

fn run(resolved: &ResolvedRun) -> Result<(SampleStore, CaseReport)> {
    let store = run_campaign(&resolved.config, resolved.workers)?;
    let report = CaseReport::from_store(&resolved.config, &store)?;
    Ok((store, report))
}

fn tables_markdown(reports: &[CaseReport]) -> String {
    let mut md = String::new();
    for metric in [Metric::UserSinr, Metric::CellSinr, Metric::CellThroughput] {
        md.push_str(&report::render_markdown(reports, metric));
        md.push('\n');
    }
    md.push_str(&report::render_overview_markdown(reports));
    md
}

fn simulate(case: &CaseArgs, args: &RunArgs) -> Result<()> {
    let file = load_file(args.io.config.as_deref())?;
    let resolved = config::parse_config(&file, &overrides(case, Some(args)))?;
    let out = &args.io.out;
    prepare_out(out)?;
    let (store, rep) = run(&resolved)?;

    write_manifest(out, &config::render_manifest(&resolved.config, manifest_info("simulate", out))?)?;
    write_with(out, "samples.csv", |w| store.write_csv(w))?;
    let reports = [rep];
    write_text(out, "summary.md", &tables_markdown(&reports))?;
    write_text(out, "summary.tsv", &report::render_distributions_tsv(&reports))?;
    write_text(out, "overview.tsv", &report::render_overview_tsv(&reports))?;
    write_cdfs(out, "cdf_", &store)?;
    println!("{}: {} samples written to {}", resolved.config.label(), store.len(), out.display());
    Ok(())
}

fn compare_cases(args: &RunArgs) -> Result<()> {
    let file = load_file(args.io.config.as_deref())?;
    if pins_case(&CaseArgs::default(), &file) {
        bail!("compare-cases runs every standard case; remove grid.layout and [antenna] settings from the config");
    }
    let out = &args.io.out;
    prepare_out(out)?;
    let mut reports = Vec::new();
    let mut base = None;
    for case in CaseId::ALL {
        let resolved = resolve_case(&file, case, args)?;
        let (store, rep) = run(&resolved)?;
        write_cdfs(out, &format!("cdf_{}_", case.slug()), &store)?;
        println!("{}: mean user SINR {:.2} dB, mean cell throughput {:.2} Mbps", rep.label, rep.user_sinr.mean, rep.cell_throughput.mean);
        reports.push(rep);
        base.get_or_insert(resolved.config);
    }
    let base = base.expect("five cases");

    let mut manifest = base.to_file();
    manifest = case_neutral(&manifest);
    manifest.manifest = Some(manifest_info("compare-cases", out));
    write_manifest(out, &manifest.to_toml()?)?;
    for (metric, name) in [
        (Metric::UserSinr, "table_user_sinr"),
        (Metric::CellSinr, "table_cell_sinr"),
        (Metric::CellThroughput, "table_cell_throughput"),
    ] {
        write_text(out, &format!("{name}.md"), &report::render_markdown(&reports, metric))?;
        write_text(out, &format!("{name}.tsv"), &report::render_tsv(&reports, metric))?;
    }
    write_text(out, "summary.md", &tables_markdown(&reports))?;
    write_text(out, "summary.tsv", &report::render_distributions_tsv(&reports))?;
    write_text(out, "overview.tsv", &report::render_overview_tsv(&reports))?;
    Ok(())
}

fn sweep_isd(case: &CaseArgs, args: &RunArgs, isds: Option<Vec<f64>>) -> Result<()> {
    let file = load_file(args.io.config.as_deref())?;
    let isds = isds.or_else(|| file.run.isds_m.clone()).unwrap_or_else(|| DEFAULT_SWEEP_ISDS.to_vec());
    if isds.is_empty() {
        bail!("isds: need at least one ISD");
    }
    let out = &args.io.out;
    prepare_out(out)?;

    let single = pins_case(case, &file);
    let mut rows = Vec::new();
    let mut base: Option<SimulationConfig> = None;
    for isd in &isds {
        let flags = RunArgs {
            isd: Some(*isd),
            ..args.clone()
        };
        let resolved: Vec<ResolvedRun> = if single {
            vec![config::parse_config(&file, &overrides(case, Some(&flags)))?]
        } else {
            CaseId::ALL.iter().map(|c| resolve_case(&file, *c, &flags)).collect::<Result<_>>()?
        };
        for r in resolved {
            let (_, rep) = run(&r)?;
            println!("{} at {} m: mean cell throughput {:.2} Mbps", rep.label, isd, rep.cell_throughput.mean);
            rows.push(SweepRow::from_report(&rep));
            base.get_or_insert(r.config);
        }
    }
    let base = base.expect("at least one run");

    let mut manifest = base.to_file();
    if !single {
        manifest = case_neutral(&manifest);
    }
    manifest.grid.isd_m = None;
    manifest.run.isds_m = Some(isds.clone());
    manifest.manifest = Some(manifest_info("sweep-isd", out));
    write_manifest(out, &manifest.to_toml()?)?;

    let reference = rows.iter().find(|r| r.slug == CaseId::Sector3.slug() && r.isd_m == 1000.0).cloned();
    write_with(out, "sweep.csv", |w| report::write_sweep_csv(&rows, w))?;
    write_text(out, "sweep.md", &report::render_sweep_markdown(&rows, reference.as_ref()))?;
    write_text(out, "sweep.tsv", &report::render_sweep_tsv(&rows, reference.as_ref()))?;
    Ok(())
}

fn beamform_demo(seed: Option<u64>, steps: Option<usize>, io: &IoArgs) -> Result<()> {
    let file = load_file(io.config.as_deref())?;
    let sc = config::parse_beamform(&file, seed, steps)?;
    let out = &io.out;
    prepare_out(out)?;
    let block = sc.training_block();
    let conv = beamform::train(&sc, &block)?;
    let window = 100.min(sc.steps).max(1);

    write_manifest(out, &config::render_beamform_manifest(&sc, manifest_info("beamform-demo", out))?)?;
    write_with(out, "convergence.csv", |w| beamform::write_convergence_csv(&conv, window, w))?;
    write_with(out, "beam_pattern.csv", |w| {
        writeln!(w, "angle_deg,response_db")?;
        for k in 0..=360 {
            let angle = -90.0 + 0.5 * k as f64;
            writeln!(w, "{angle},{}", conv.weights.response_db(sc.spacing_wavelengths, angle))?;
        }
        Ok(())
    })?;
    let final_mse = beamform::block_mse(&conv.weights, &block)?;
    println!(
        "{} steps, block MSE {:.2} dB; response {:.1} dB towards {}°, {:.1} dB towards {}°",
        sc.steps,
        10.0 * final_mse.log10(),
        conv.weights.response_db(sc.spacing_wavelengths, sc.desired_angle_deg),
        sc.desired_angle_deg,
        conv.weights.response_db(sc.spacing_wavelengths, sc.interferer_angle_deg),
        sc.interferer_angle_deg,
    );
    Ok(())
}

fn dump_patterns(case: &CaseArgs, io: &IoArgs) -> Result<()> {
    let file = load_file(io.config.as_deref())?;
    let out = &io.out;
    prepare_out(out)?;
    let configs: Vec<SimulationConfig> = if pins_case(case, &file) {
        vec![config::parse_config(&file, &overrides(case, None))?.config]
    } else {
        let dummy = RunArgs {
            isd: None,
            iterations: None,
            seed: None,
            workers: None,
            io: io.clone(),
        };
        CaseId::ALL.iter().map(|c| resolve_case(&file, *c, &dummy).map(|r| r.config)).collect::<Result<_>>()?
    };
    for cfg in &configs {
        write_with(out, &format!("pattern_{}.csv", cfg.slug()), |w| cfg.antenna.write_pattern_csv(w))?;
    }
    let mut manifest = configs[0].to_file();
    if configs.len() > 1 {
        manifest = case_neutral(&manifest);
    }
    manifest.manifest = Some(manifest_info("dump-patterns", out));
    write_manifest(out, &manifest.to_toml()?)?;
    Ok(())
}

fn dump_grid(case: &CaseArgs, isd: Option<f64>, io: &IoArgs) -> Result<()> {
    let file = load_file(io.config.as_deref())?;
    let flags = Overrides {
        isd_m: isd,
        ..overrides(case, None)
    };
    let cfg = config::parse_config(&file, &flags)?.config;
    let grid = NetworkGrid::generate(cfg.layout, cfg.isd_m, cfg.azimuth_offset_deg)?;
    let out = &io.out;
    prepare_out(out)?;
    write_with(out, "grid.csv", |w| grid.write_csv(w))?;
    write_manifest(out, &config::render_manifest(&cfg, manifest_info("dump-grid", out))?)?;
    println!("{} sites, {} sectors written to {}", grid.sites.len(), grid.sectors.len(), out.join("grid.csv").display());
    Ok(())
}
