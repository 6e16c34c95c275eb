//! Constant-speed Brownian wandering of UEs, confined to their own wedge.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::geometry::SectorRing;

/// Annular wedge a UE may occupy: an angular span and a radius band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wedge {
    pub theta_min: f64,
    pub theta_max: f64,
    pub r_min: f64,
    pub r_max: f64,
}

fn wrap_pi(a: f64) -> f64 {
    let mut a = (a + PI).rem_euclid(2.0 * PI) - PI;
    if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

impl Wedge {
    pub fn for_sector(ring: &SectorRing, sector: usize, band: [f64; 2]) -> Self {
        let (theta_min, theta_max) = ring.wedge_bounds(sector);
        Self { theta_min, theta_max, r_min: band[0], r_max: band[1] }
    }

    fn center_angle(&self) -> f64 {
        0.5 * (self.theta_min + self.theta_max)
    }

    fn half_width(&self) -> f64 {
        0.5 * (self.theta_max - self.theta_min)
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let r = p[0].hypot(p[1]);
        let rel = wrap_pi(p[1].atan2(p[0]) - self.center_angle());
        r >= self.r_min && r <= self.r_max && rel.abs() <= self.half_width()
    }

    /// Centroid-ish interior point: mid radius on the bisector.
    pub fn center(&self) -> [f64; 2] {
        let r = 0.5 * (self.r_min + self.r_max);
        let a = self.center_angle();
        [r * a.cos(), r * a.sin()]
    }

    /// Maps a point slightly outside back inside by specular reflection,
    /// mirroring the travel direction `dir` along with it.
    fn reflect(&self, p: &mut [f64; 2], dir: &mut [f64; 2]) {
        for _ in 0..8 {
            let r = p[0].hypot(p[1]);
            let rel = wrap_pi(p[1].atan2(p[0]) - self.center_angle());
            if r > self.r_max || r < self.r_min {
                let bound = if r > self.r_max { self.r_max } else { self.r_min };
                let n = [p[0] / r, p[1] / r];
                let new_r = 2.0 * bound - r;
                *p = [n[0] * new_r, n[1] * new_r];
                let dn = dir[0] * n[0] + dir[1] * n[1];
                *dir = [dir[0] - 2.0 * dn * n[0], dir[1] - 2.0 * dn * n[1]];
            } else if rel.abs() > self.half_width() {
                // Mirror across the boundary ray through the origin.
                let a = if rel < 0.0 { self.theta_min } else { self.theta_max };
                let u = [a.cos(), a.sin()];
                let pu = p[0] * u[0] + p[1] * u[1];
                *p = [2.0 * pu * u[0] - p[0], 2.0 * pu * u[1] - p[1]];
                let du = dir[0] * u[0] + dir[1] * u[1];
                *dir = [2.0 * du * u[0] - dir[0], 2.0 * du * u[1] - dir[1]];
            } else {
                return;
            }
        }
        // Only reachable with steps comparable to the wedge size.
        let r = p[0].hypot(p[1]).clamp(self.r_min, self.r_max);
        let a = self.center_angle() + wrap_pi(p[1].atan2(p[0]) - self.center_angle()).clamp(-self.half_width(), self.half_width());
        *p = [r * a.cos(), r * a.sin()];
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobilityState {
    pub positions: Vec<[f64; 2]>,
    pub headings: Vec<f64>,
    pub wedges: Vec<Wedge>,
    /// Meters per event.
    pub speed: f64,
    pub heading_sigma: f64,
}

impl MobilityState {
    pub fn new(positions: Vec<[f64; 2]>, headings: Vec<f64>, wedges: Vec<Wedge>, speed: f64, heading_sigma: f64) -> Self {
        debug_assert!(positions.len() == headings.len() && headings.len() == wedges.len());
        Self { positions, headings, wedges, speed, heading_sigma }
    }

    /// Advances UE `ue` one event. Always consumes exactly one normal draw so
    /// the stream position depends only on the number of steps taken.
    pub fn ue_mobility_step<R: Rng + ?Sized>(&mut self, ue: usize, rng: &mut R) -> [f64; 2] {
        let noise = Normal::new(0.0, self.heading_sigma.max(f64::MIN_POSITIVE))
            .expect("sigma is finite and positive")
            .sample(rng);
        let heading = self.headings[ue] + noise;
        let mut dir = [heading.cos(), heading.sin()];
        let old = self.positions[ue];
        let mut p = [old[0] + self.speed * dir[0], old[1] + self.speed * dir[1]];
        self.wedges[ue].reflect(&mut p, &mut dir);
        self.positions[ue] = p;
        self.headings[ue] = dir[1].atan2(dir[0]);
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    fn one_ue(speed: f64, sector: usize) -> MobilityState {
        let ring = SectorRing::new(36).unwrap();
        let w = Wedge::for_sector(&ring, sector, [200.0, 450.0]);
        MobilityState::new(vec![w.center()], vec![0.3], vec![w], speed, 0.3)
    }

    #[test]
    fn zero_speed_stays_put() {
        let mut m = one_ue(0.0, 4);
        let start = m.positions[0];
        let mut rng = seeded_rng(3);
        for _ in 0..100 {
            assert_eq!(m.ue_mobility_step(0, &mut rng), start);
        }
    }

    #[test]
    fn long_walks_stay_inside_wedge() {
        // sector 1 straddles angle 0, sector 36 ends at 2*pi
        for sector in [1, 18, 36] {
            let mut m = one_ue(3.0, sector);
            let mut rng = seeded_rng(sector as u64);
            for _ in 0..10_000 {
                let p = m.ue_mobility_step(0, &mut rng);
                assert!(m.wedges[0].contains(p), "sector {sector}: {p:?} escaped");
            }
        }
    }

    #[test]
    fn mean_position_near_wedge_center() {
        let mut m = one_ue(0.5, 7);
        let w = m.wedges[0];
        let mut rng = seeded_rng(11);
        let n = 10_000;
        let mut sum = [0.0, 0.0];
        for _ in 0..n {
            let p = m.ue_mobility_step(0, &mut rng);
            sum[0] += p[0];
            sum[1] += p[1];
        }
        let mean = [sum[0] / n as f64, sum[1] / n as f64];
        let c = w.center();
        let half_wedge_arc = w.r_min * (w.theta_max - w.theta_min) / 2.0;
        let off = (mean[0] - c[0]).hypot(mean[1] - c[1]);
        assert!(off <= half_wedge_arc, "mean {mean:?} is {off} m from centre");
        assert!(w.contains(mean));
    }

    #[test]
    fn reflection_mirrors_across_ray() {
        let ring = SectorRing::new(36).unwrap();
        let w = Wedge::for_sector(&ring, 1, [100.0, 300.0]);
        // just below angle 0 -> mirrored to just above it
        let mut p = [200.0, -1.0];
        let mut d = [0.0, -1.0];
        w.reflect(&mut p, &mut d);
        assert!((p[0] - 200.0).abs() < 1e-9 && (p[1] - 1.0).abs() < 1e-9);
        assert!((d[1] - 1.0).abs() < 1e-12);
    }
}
