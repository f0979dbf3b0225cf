//! Monte Carlo campaign driver.
//!
//! Each iteration is one TTI snapshot: users are dropped in every sector of
//! the central site, and each user's SINR is evaluated against the own sector
//! and every other sector of the 19-site grid. Iterations are independent and
//! draw from their own counter-derived random streams, so results do not
//! depend on how the work is spread over threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::antenna::{AntennaStrategy, BeamKind};
use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::link::{own_cell_interference_mw, sinr_db, user_throughput, OrthogonalityProfile, ResourceShare};
use crate::propagation::{db_to_linear, Shadowing};
use crate::tessellation::{angle_and_distance, NetworkGrid, Point, Sector, SITE_COUNT};

/// Streams reserved per iteration: one for network state, one per central sector.
const LANES_PER_ITERATION: u64 = 16;

/// Independent random stream for `(iteration, lane)` under `master_seed`.
pub fn substream(master_seed: u64, iteration: u64, lane: u64) -> ChaCha8Rng {
    debug_assert!(lane < LANES_PER_ITERATION);
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(iteration * LANES_PER_ITERATION + lane);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserDrop {
    pub position: Point,
    pub serving_sector: usize,
    pub bearing_from_site: f64,
    pub distance_from_site: f64,
}

/// Drops `count` users uniformly by area over the sector's wedge by rejection
/// sampling from the bounding square of the cell circle.
pub fn drop_users<R: Rng + ?Sized>(grid: &NetworkGrid, sector: &Sector, count: usize, rng: &mut R) -> Vec<UserDrop> {
    let wedge = grid.sector_wedge(sector);
    let site = grid.sites[sector.site_id].position;
    let r = wedge.radius_m;
    let mut drops = Vec::with_capacity(count);
    while drops.len() < count {
        let dx = r * (2.0 * rng.random::<f64>() - 1.0);
        let dy = r * (2.0 * rng.random::<f64>() - 1.0);
        let pos = Point::new(site.x + dx, site.y + dy);
        let Ok((bearing, distance)) = angle_and_distance(site, pos) else {
            continue;
        };
        if wedge.contains(bearing, distance) {
            drops.push(UserDrop {
                position: pos,
                serving_sector: sector.id,
                bearing_from_site: bearing,
                distance_from_site: distance,
            });
        }
    }
    drops
}

#[derive(Debug, Clone, PartialEq)]
pub struct TtiSample {
    pub iteration: u64,
    /// Sector id of the measured central-site cell.
    pub cell: usize,
    pub user_sinr_db: Vec<f64>,
    pub user_throughput_bps: Vec<f64>,
    pub cell_throughput_bps: f64,
}

/// Beam directions transmitted by one sector in a TTI. Power is shared
/// equally between the beams.
#[derive(Debug, Clone)]
struct SectorBeams {
    boresights: Vec<f64>,
}

impl SectorBeams {
    /// Linear gain toward `bearing`, averaged over the beams.
    fn mean_gain(&self, strategy: &AntennaStrategy, bearing: f64) -> f64 {
        let sum: f64 = self
            .boresights
            .iter()
            .map(|b| db_to_linear(strategy.pattern_gain(bearing - b)))
            .sum();
        sum / self.boresights.len() as f64
    }
}

/// A configured campaign, ready to evaluate TTIs.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: SimulationConfig,
    grid: NetworkGrid,
    share: ResourceShare,
    users: usize,
    total_tx_mw: f64,
    user_tx_mw: f64,
    noise_mw: f64,
    orthogonality: OrthogonalityProfile,
    shadowing: Shadowing,
}

impl Simulator {
    pub fn new(config: SimulationConfig) -> Result<Self> {
        config.validate()?;
        let grid = NetworkGrid::generate(config.layout, config.isd_m, config.azimuth_offset_deg)?;
        let share = config.link.split_resources()?;
        let orthogonality = OrthogonalityProfile::new(config.alpha_site, config.alpha_edge, grid.cell_radius())?;
        Ok(Simulator {
            users: config.link.users_per_tti as usize,
            total_tx_mw: db_to_linear(config.link.total_tx_power_dbm()),
            user_tx_mw: db_to_linear(share.power_per_user_dbm),
            noise_mw: db_to_linear(config.noise.thermal_noise_dbm()),
            shadowing: config.propagation.shadowing(),
            grid,
            share,
            orthogonality,
            config,
        })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn grid(&self) -> &NetworkGrid {
        &self.grid
    }

    pub fn samples_per_iteration(&self) -> usize {
        self.grid.sectors_per_site()
    }

    /// Evaluates one TTI with every site interfering.
    pub fn evaluate_tti(&self, iteration: u64) -> Vec<TtiSample> {
        self.evaluate_tti_with(iteration, &[true; SITE_COUNT])
    }

    /// Evaluates one TTI; `interferers[s]` switches the interference from
    /// site `s` on or off. For the central site it covers the sectors other
    /// than the serving one.
    pub fn evaluate_tti_with(&self, iteration: u64, interferers: &[bool; SITE_COUNT]) -> Vec<TtiSample> {
        let cfg = &self.config;
        let n = self.grid.sectors_per_site();
        let seed = cfg.master_seed;

        // Drops and per-(user, site) shadowing for every central sector.
        let mut drops = Vec::with_capacity(n);
        let mut shadows = Vec::with_capacity(n);
        for (k, sector) in self.grid.central_sectors().iter().enumerate() {
            let mut rng = substream(seed, iteration, 1 + k as u64);
            let d = drop_users(&self.grid, sector, self.users, &mut rng);
            let s: Vec<[f64; SITE_COUNT]> = (0..self.users)
                .map(|_| std::array::from_fn(|_| self.shadowing.sample(&mut rng)))
                .collect();
            drops.push(d);
            shadows.push(s);
        }

        let beams = self.sector_beams(iteration, &drops);

        let mut out = Vec::with_capacity(n);
        for (k, sector) in self.grid.central_sectors().iter().enumerate() {
            let mut sinrs = Vec::with_capacity(self.users);
            let mut tputs = Vec::with_capacity(self.users);
            for (j, user) in drops[k].iter().enumerate() {
                let sinr = self.user_sinr(sector, k, j, user, &shadows[k][j], &beams, interferers);
                let entry = cfg.mcs.select(sinr);
                sinrs.push(sinr);
                tputs.push(user_throughput(entry, self.share.codes_per_user, cfg.link.carriers));
            }
            out.push(TtiSample {
                iteration,
                cell: sector.id,
                cell_throughput_bps: tputs.iter().sum(),
                user_sinr_db: sinrs,
                user_throughput_bps: tputs,
            });
        }
        out
    }

    /// Beam directions for every sector in the grid. Central-site sectors
    /// point at their dropped users; the remaining sectors point at proxy
    /// directions drawn uniformly over their wedge.
    fn sector_beams(&self, iteration: u64, drops: &[Vec<UserDrop>]) -> Vec<SectorBeams> {
        let strategy = &self.config.antenna;
        if strategy.kind == BeamKind::Fixed {
            return self
                .grid
                .sectors
                .iter()
                .map(|s| SectorBeams {
                    boresights: vec![s.azimuth_deg],
                })
                .collect();
        }
        let n = self.grid.sectors_per_site();
        let width = self.grid.layout.sector_width();
        let mut rng = substream(self.config.master_seed, iteration, 0);
        self.grid
            .sectors
            .iter()
            .map(|s| {
                let boresights = if s.id < n {
                    drops[s.id]
                        .iter()
                        .map(|u| strategy.point(s.azimuth_deg, u.bearing_from_site).boresight_deg)
                        .collect()
                } else {
                    (0..self.users)
                        .map(|_| {
                            let dir = s.azimuth_deg + width * (rng.random::<f64>() - 0.5);
                            strategy.point(s.azimuth_deg, dir).boresight_deg
                        })
                        .collect()
                };
                SectorBeams { boresights }
            })
            .collect()
    }

    #[allow(clippy::too_many_arguments)]
    fn user_sinr(
        &self,
        sector: &Sector,
        k: usize,
        j: usize,
        user: &UserDrop,
        shadow: &[f64; SITE_COUNT],
        beams: &[SectorBeams],
        interferers: &[bool; SITE_COUNT],
    ) -> f64 {
        let cfg = &self.config;
        let strategy = &cfg.antenna;
        let n = self.grid.sectors_per_site();

        // Coupling gain (linear, includes shadowing) from each site to the user.
        let coupling = |site: usize| -> (f64, f64) {
            let (bearing, distance) = if site == 0 {
                (user.bearing_from_site, user.distance_from_site)
            } else {
                angle_and_distance(self.grid.sites[site].position, user.position)
                    .expect("users never coincide with an interfering site")
            };
            let loss = cfg.propagation.path_loss(distance);
            (bearing, db_to_linear(shadow[site] - loss))
        };

        let (bearing0, g0) = coupling(0);
        let serving_boresight = if strategy.kind == BeamKind::Fixed {
            sector.azimuth_deg
        } else {
            beams[k].boresights[j]
        };
        let s_mw = self.user_tx_mw * db_to_linear(strategy.pattern_gain(bearing0 - serving_boresight)) * g0;
        let own_mw = self.total_tx_mw * beams[k].mean_gain(strategy, bearing0) * g0;
        let alpha = self.orthogonality.alpha(user.distance_from_site);
        let i_own = own_cell_interference_mw(own_mw, s_mw, alpha).expect("alpha within [0, 1]");

        let mut other = 0.0;
        for site in 0..SITE_COUNT {
            if !interferers[site] {
                continue;
            }
            let (bearing, g) = coupling(site);
            let mut acc = 0.0;
            for t in 0..n {
                if site == 0 && t == k {
                    continue;
                }
                acc += beams[site * n + t].mean_gain(strategy, bearing);
            }
            other += self.total_tx_mw * acc * g;
        }
        let i_other = cfg.link.loading * cfg.link.activity_factor * other;

        sinr_db(s_mw, i_own, i_other, self.noise_mw).expect("noise is positive")
    }

    /// Runs every iteration in order on the calling thread.
    pub fn run_sequential(&self) -> SampleStore {
        let samples = (0..self.config.iterations)
            .flat_map(|i| self.evaluate_tti(i))
            .collect();
        SampleStore { samples }
    }

    /// Runs the iterations on the rayon pool that is current for the caller.
    #[cfg(feature = "parallel")]
    pub fn run_parallel(&self) -> SampleStore {
        use rayon::prelude::*;
        let per_iter: Vec<Vec<TtiSample>> = (0..self.config.iterations)
            .into_par_iter()
            .map(|i| self.evaluate_tti(i))
            .collect();
        SampleStore {
            samples: per_iter.into_iter().flatten().collect(),
        }
    }
}

/// Runs a full campaign. `workers` of `None` uses every available core;
/// `Some(1)` (or a build without the `parallel` feature) runs sequentially.
pub fn run_campaign(config: &SimulationConfig, workers: Option<usize>) -> Result<SampleStore> {
    let sim = Simulator::new(config.clone())?;
    run_simulator(&sim, workers)
}

#[cfg(feature = "parallel")]
pub fn run_simulator(sim: &Simulator, workers: Option<usize>) -> Result<SampleStore> {
    match workers {
        Some(0) => Err(Error::invalid("workers", "must be at least 1")),
        Some(1) => Ok(sim.run_sequential()),
        None => Ok(sim.run_parallel()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::invalid("workers", e.to_string()))?;
            Ok(pool.install(|| sim.run_parallel()))
        }
    }
}

#[cfg(not(feature = "parallel"))]
pub fn run_simulator(sim: &Simulator, workers: Option<usize>) -> Result<SampleStore> {
    if workers == Some(0) {
        return Err(Error::invalid("workers", "must be at least 1"));
    }
    Ok(sim.run_sequential())
}

/// All TTI samples of a campaign, ordered by iteration then cell.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleStore {
    pub samples: Vec<TtiSample>,
}

impl SampleStore {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn user_sinr_db(&self) -> Vec<f64> {
        self.samples.iter().flat_map(|s| s.user_sinr_db.iter().copied()).collect()
    }

    pub fn user_throughput_bps(&self) -> Vec<f64> {
        self.samples
            .iter()
            .flat_map(|s| s.user_throughput_bps.iter().copied())
            .collect()
    }

    /// Per-TTI cell SINR: linear average over the cell's users.
    pub fn cell_sinr_db(&self) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| crate::report::cell_average_sinr(&s.user_sinr_db))
            .collect()
    }

    pub fn cell_throughput_bps(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.cell_throughput_bps).collect()
    }

    /// Raw export: `iteration,sector_id,user_index,sinr_db,throughput_bps,cell_throughput_bps`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iteration,sector_id,user_index,sinr_db,throughput_bps,cell_throughput_bps")?;
        for s in &self.samples {
            for (u, (sinr, tput)) in s.user_sinr_db.iter().zip(&s.user_throughput_bps).enumerate() {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    s.iteration, s.cell, u, sinr, tput, s.cell_throughput_bps
                )?;
            }
        }
        Ok(())
    }
}
