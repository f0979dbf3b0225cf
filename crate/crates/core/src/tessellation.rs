//! Regular 19-site hexagonal grids for the cloverleaf (3-sector), snow-flake
//! (6-sector) and flower (12-sector) layouts.
//!
//! Sites sit on a triangular lattice with spacing equal to the intersite
//! distance: one central site, six first-tier sites and twelve second-tier
//! sites. Every site carries the same set of sector azimuths. Bearings use the
//! mathematical convention: 0° along +x, increasing counter-clockwise.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of sites in the two-tier grid.
pub const SITE_COUNT: usize = 19;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayoutKind {
    #[serde(rename = "3sector")]
    Cloverleaf3,
    #[serde(rename = "6sector")]
    SnowFlake6,
    #[serde(rename = "12sector")]
    Flower12,
}

impl LayoutKind {
    pub const ALL: [LayoutKind; 3] = [
        LayoutKind::Cloverleaf3,
        LayoutKind::SnowFlake6,
        LayoutKind::Flower12,
    ];

    pub fn sectors_per_site(self) -> usize {
        match self {
            LayoutKind::Cloverleaf3 => 3,
            LayoutKind::SnowFlake6 => 6,
            LayoutKind::Flower12 => 12,
        }
    }

    /// Azimuth of the first sector when none is configured.
    ///
    /// The cloverleaf offset of 30° points each sector between two first-tier
    /// neighbours on this lattice orientation.
    pub fn default_azimuth_offset(self) -> f64 {
        match self {
            LayoutKind::Cloverleaf3 => 30.0,
            LayoutKind::SnowFlake6 | LayoutKind::Flower12 => 0.0,
        }
    }

    /// Angular width of one sector in degrees.
    pub fn sector_width(self) -> f64 {
        360.0 / self.sectors_per_site() as f64
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LayoutKind::Cloverleaf3 => "3sector",
            LayoutKind::SnowFlake6 => "6sector",
            LayoutKind::Flower12 => "12sector",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "3sector" | "cloverleaf" => Some(LayoutKind::Cloverleaf3),
            "6sector" | "snowflake" => Some(LayoutKind::SnowFlake6),
            "12sector" | "flower" => Some(LayoutKind::Flower12),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance_to(self, other: Point) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    /// Point at `distance` meters from `self` along `bearing_deg`.
    pub fn offset(self, bearing_deg: f64, distance: f64) -> Point {
        let (s, c) = bearing_deg.to_radians().sin_cos();
        Point::new(self.x + distance * c, self.y + distance * s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub id: usize,
    pub position: Point,
    /// 0 for the measured central site, 1 or 2 for the interferer tiers.
    pub tier: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sector {
    pub id: usize,
    pub site_id: usize,
    pub azimuth_deg: f64,
}

/// Angular sector of radius `radius_m` centred on `center_deg`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wedge {
    pub center_deg: f64,
    pub width_deg: f64,
    pub radius_m: f64,
}

impl Wedge {
    /// Lower angular bound; may be negative (e.g. -60 for a 0° 3-sector wedge).
    pub fn start_deg(&self) -> f64 {
        self.center_deg - self.width_deg / 2.0
    }

    pub fn end_deg(&self) -> f64 {
        self.center_deg + self.width_deg / 2.0
    }

    /// True when `bearing_deg` falls in the half-open interval `(start, end]`.
    pub fn contains_bearing(&self, bearing_deg: f64) -> bool {
        let off = wrap_180(bearing_deg - self.center_deg);
        let half = self.width_deg / 2.0;
        // wrap_180 maps +180 to -180; a full-circle wedge contains everything
        if half >= 180.0 {
            return true;
        }
        off > -half && off <= half
    }

    pub fn contains(&self, bearing_deg: f64, distance_m: f64) -> bool {
        distance_m <= self.radius_m && self.contains_bearing(bearing_deg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGrid {
    pub layout: LayoutKind,
    pub isd_m: f64,
    pub azimuth_offset_deg: f64,
    pub sites: Vec<Site>,
    pub sectors: Vec<Sector>,
}

/// Normalizes an angle to `[0, 360)`.
pub fn wrap_360(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Normalizes an angle to `[-180, 180)`.
pub fn wrap_180(deg: f64) -> f64 {
    wrap_360(deg + 180.0) - 180.0
}

/// Bearing (degrees in `[0, 360)`) and Euclidean distance from `from` to `to`.
pub fn angle_and_distance(from: Point, to: Point) -> Result<(f64, f64)> {
    let dx = to.x - from.x;
    let dy = to.y - from.y;
    if dx == 0.0 && dy == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok((wrap_360(dy.atan2(dx).to_degrees()), dx.hypot(dy)))
}

/// Nominal cell radius (hexagon circumradius) for a site spacing of `isd_m`.
pub fn cell_radius(isd_m: f64) -> f64 {
    isd_m / 3f64.sqrt()
}

impl NetworkGrid {
    pub fn generate(layout: LayoutKind, isd_m: f64, azimuth_offset_deg: f64) -> Result<Self> {
        if !(isd_m > 0.0) || !isd_m.is_finite() {
            return Err(Error::invalid("isd_m", format!("must be positive, got {isd_m}")));
        }
        if !(0.0..360.0).contains(&azimuth_offset_deg) {
            return Err(Error::invalid(
                "azimuth_offset_deg",
                format!("must lie in [0, 360), got {azimuth_offset_deg}"),
            ));
        }

        let half_sqrt3 = 3f64.sqrt() / 2.0;
        let mut lattice = Vec::with_capacity(SITE_COUNT);
        for q in -2i32..=2 {
            for r in -2i32..=2 {
                let ring = q.abs().max(r.abs()).max((q + r).abs());
                if ring > 2 {
                    continue;
                }
                let pos = Point::new(
                    isd_m * (q as f64 + r as f64 / 2.0),
                    isd_m * (r as f64 * half_sqrt3),
                );
                let bearing = wrap_360(pos.y.atan2(pos.x).to_degrees());
                lattice.push((ring as u8, bearing, pos));
            }
        }
        lattice.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

        let n = layout.sectors_per_site();
        let width = layout.sector_width();
        let sites: Vec<Site> = lattice
            .into_iter()
            .enumerate()
            .map(|(id, (tier, _, pos))| Site {
                id,
                position: if tier == 0 { Point::ORIGIN } else { pos },
                tier,
            })
            .collect();
        let sectors = sites
            .iter()
            .flat_map(|site| {
                (0..n).map(move |k| Sector {
                    id: site.id * n + k,
                    site_id: site.id,
                    azimuth_deg: wrap_360(azimuth_offset_deg + k as f64 * width),
                })
            })
            .collect();

        Ok(NetworkGrid {
            layout,
            isd_m,
            azimuth_offset_deg,
            sites,
            sectors,
        })
    }

    pub fn sectors_per_site(&self) -> usize {
        self.layout.sectors_per_site()
    }

    pub fn cell_radius(&self) -> f64 {
        cell_radius(self.isd_m)
    }

    pub fn central_site(&self) -> &Site {
        &self.sites[0]
    }

    /// Sectors of the central site; their ids are `0..sectors_per_site`.
    pub fn central_sectors(&self) -> &[Sector] {
        &self.sectors[..self.sectors_per_site()]
    }

    pub fn site_sectors(&self, site_id: usize) -> &[Sector] {
        let n = self.sectors_per_site();
        &self.sectors[site_id * n..(site_id + 1) * n]
    }

    pub fn sector_wedge(&self, sector: &Sector) -> Wedge {
        Wedge {
            center_deg: sector.azimuth_deg,
            width_deg: self.layout.sector_width(),
            radius_m: self.cell_radius(),
        }
    }

    /// Index (within a site) of the sector whose wedge holds `bearing_deg`.
    ///
    /// Wedges are `(start, end]`, so a bearing on a shared boundary belongs
    /// to the wedge that ends there.
    pub fn sector_index_for_bearing(&self, bearing_deg: f64) -> usize {
        let width = self.layout.sector_width();
        let rel = wrap_360(bearing_deg - self.azimuth_offset_deg + width / 2.0);
        let n = self.sectors_per_site();
        let k = (rel / width).ceil() as usize;
        (k + n - 1) % n
    }

    /// Writes one row per sector: `site_id,x_m,y_m,tier,sector_id,azimuth_deg`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "site_id,x_m,y_m,tier,sector_id,azimuth_deg")?;
        for sector in &self.sectors {
            let site = &self.sites[sector.site_id];
            writeln!(
                out,
                "{},{},{},{},{},{}",
                site.id, site.position.x, site.position.y, site.tier, sector.id, sector.azimuth_deg
            )?;
        }
        Ok(())
    }

    pub fn export_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn sorted_distances(grid: &NetworkGrid) -> Vec<f64> {
        let mut d: Vec<f64> = grid
            .sites
            .iter()
            .map(|s| s.position.distance_to(Point::ORIGIN))
            .collect();
        d.sort_by(f64::total_cmp);
        d
    }

    #[test]
    fn cloverleaf_grid_counts() {
        let g = NetworkGrid::generate(LayoutKind::Cloverleaf3, 1000.0, 0.0).unwrap();
        assert_eq!(g.sites.len(), 19);
        assert_eq!(g.sectors.len(), 57);
        let ring1 = g
            .sites
            .iter()
            .filter(|s| (s.position.distance_to(Point::ORIGIN) - 1000.0).abs() < 1e-9)
            .count();
        assert_eq!(ring1, 6);
        assert_eq!(g.sites.iter().filter(|s| s.tier == 0).count(), 1);
        assert_eq!(g.sites.iter().filter(|s| s.tier == 1).count(), 6);
        assert_eq!(g.sites.iter().filter(|s| s.tier == 2).count(), 12);
    }

    #[test]
    fn snowflake_azimuths() {
        let g = NetworkGrid::generate(LayoutKind::SnowFlake6, 1000.0, 0.0).unwrap();
        assert_eq!(g.sectors.len(), 114);
        for site in &g.sites {
            let az: Vec<f64> = g.site_sectors(site.id).iter().map(|s| s.azimuth_deg).collect();
            assert_eq!(az, vec![0.0, 60.0, 120.0, 180.0, 240.0, 300.0]);
        }
    }

    #[test]
    fn flower_tier2_distances() {
        let g = NetworkGrid::generate(LayoutKind::Flower12, 500.0, 15.0).unwrap();
        let tier2: Vec<f64> = g
            .sites
            .iter()
            .filter(|s| s.tier == 2)
            .map(|s| s.position.distance_to(Point::ORIGIN))
            .collect();
        let near = tier2.iter().filter(|d| (*d - 866.025_403_784).abs() < 1e-6).count();
        let far = tier2.iter().filter(|d| (*d - 1000.0).abs() < 1e-9).count();
        assert_eq!((near, far), (6, 6));
        assert_eq!(g.site_sectors(3)[1].azimuth_deg, 45.0);
    }

    #[test]
    fn rejects_bad_isd() {
        assert!(NetworkGrid::generate(LayoutKind::Cloverleaf3, 0.0, 0.0).is_err());
        assert!(NetworkGrid::generate(LayoutKind::Cloverleaf3, -5.0, 0.0).is_err());
        assert!(NetworkGrid::generate(LayoutKind::Cloverleaf3, 100.0, 360.0).is_err());
    }

    #[test]
    fn wedges() {
        let g = NetworkGrid::generate(LayoutKind::Cloverleaf3, 1000.0, 0.0).unwrap();
        let w = g.sector_wedge(&g.sectors[0]);
        assert_eq!((w.start_deg(), w.end_deg()), (-60.0, 60.0));
        assert_abs_diff_eq!(w.radius_m, 577.350_269_19, epsilon = 1e-6);

        let g12 = NetworkGrid::generate(LayoutKind::Flower12, 1000.0, 0.0).unwrap();
        let w = g12.sector_wedge(&g12.sectors[3]);
        assert_eq!(w.center_deg, 90.0);
        assert_eq!((w.start_deg(), w.end_deg()), (75.0, 105.0));

        let g6 = NetworkGrid::generate(LayoutKind::SnowFlake6, 1000.0, 0.0).unwrap();
        let w = g6.sector_wedge(&g6.sectors[5]);
        assert_eq!((w.start_deg(), w.end_deg()), (270.0, 330.0));
        assert!(w.contains_bearing(329.0));
        assert!(w.contains_bearing(271.0));
        assert!(!w.contains_bearing(331.0));
        let w0 = g6.sector_wedge(&g6.sectors[0]);
        assert!(w0.contains_bearing(359.0));
        assert!(w0.contains_bearing(29.0));
    }

    #[test]
    fn boundary_ties() {
        let g = NetworkGrid::generate(LayoutKind::SnowFlake6, 1000.0, 0.0).unwrap();
        // 30° is shared by the 0° and 60° wedges
        assert_eq!(g.sector_index_for_bearing(30.0), 0);
        assert_eq!(g.sector_index_for_bearing(30.000001), 1);
        assert_eq!(g.sector_index_for_bearing(0.0), 0);
        assert_eq!(g.sector_index_for_bearing(331.0), 0);
    }

    #[test]
    fn bearings() {
        let o = Point::ORIGIN;
        let (b, d) = angle_and_distance(o, Point::new(1000.0, 0.0)).unwrap();
        assert_eq!((b, d), (0.0, 1000.0));
        let (b, d) = angle_and_distance(o, Point::new(0.0, 500.0)).unwrap();
        assert_eq!((b, d), (90.0, 500.0));
        let (b, d) = angle_and_distance(o, Point::new(-300.0, -300.0)).unwrap();
        assert_abs_diff_eq!(b, 225.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d, 424.264_068_712, epsilon = 1e-6);
        assert!(matches!(angle_and_distance(o, o), Err(Error::CoincidentPoints)));
    }

    #[test]
    fn csv_export() {
        let g = NetworkGrid::generate(LayoutKind::Cloverleaf3, 1000.0, 30.0).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("site_id,x_m,y_m,tier,sector_id,azimuth_deg"));
        assert_eq!(lines.next(), Some("0,0,0,0,0,30"));
        assert_eq!(text.lines().count(), 58);
    }

    proptest! {
        #[test]
        fn distance_multiset(isd in 1.0f64..5000.0, layout in 0usize..3, off in 0.0f64..360.0) {
            let g = NetworkGrid::generate(LayoutKind::ALL[layout], isd, off).unwrap();
            let d = sorted_distances(&g);
            let s3 = 3f64.sqrt();
            let mut expected = vec![0.0];
            expected.extend(std::iter::repeat_n(isd, 6));
            expected.extend(std::iter::repeat_n(isd * s3, 6));
            expected.extend(std::iter::repeat_n(2.0 * isd, 6));
            for (a, b) in d.iter().zip(&expected) {
                prop_assert!((a - b).abs() <= 1e-9 * isd);
            }
        }

        #[test]
        fn rotation_only_moves_azimuths(isd in 10.0f64..5000.0, layout in 0usize..3, off in 0.0f64..180.0, rot in 0.0f64..180.0) {
            let a = NetworkGrid::generate(LayoutKind::ALL[layout], isd, off).unwrap();
            let b = NetworkGrid::generate(LayoutKind::ALL[layout], isd, off + rot).unwrap();
            prop_assert_eq!(&a.sites, &b.sites);
            for (sa, sb) in a.sectors.iter().zip(&b.sectors) {
                prop_assert!(wrap_180(sb.azimuth_deg - sa.azimuth_deg - rot).abs() < 1e-9);
            }
        }

        #[test]
        fn every_bearing_in_exactly_one_wedge(layout in 0usize..3, off in 0.0f64..360.0, bearing in 0.0f64..360.0) {
            let g = NetworkGrid::generate(LayoutKind::ALL[layout], 1000.0, off).unwrap();
            let hits: Vec<usize> = g
                .central_sectors()
                .iter()
                .enumerate()
                .filter(|(_, s)| g.sector_wedge(s).contains_bearing(bearing))
                .map(|(k, _)| k)
                .collect();
            prop_assert_eq!(hits.len(), 1);
            prop_assert_eq!(hits[0], g.sector_index_for_bearing(bearing));
        }
    }
}
