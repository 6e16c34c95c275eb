//! Sector-ring geometry.
//!
//! The UAV flies a circular track cut into `S` equal wedges numbered `1..=S`.
//! Clockwise means decreasing sector index (17 -> 16 -> ...), wrapping from 1
//! to `S`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Movement action taken by the UAV in one event. The discriminants are the
/// wire/trajectory encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Movement {
    Clockwise = 0,
    CounterClockwise = 1,
    Hover = 2,
}

impl Movement {
    pub fn is_move(self) -> bool {
        self != Movement::Hover
    }
}

impl From<Movement> for u8 {
    fn from(m: Movement) -> u8 {
        m as u8
    }
}

impl TryFrom<u8> for Movement {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(Movement::Clockwise),
            1 => Ok(Movement::CounterClockwise),
            2 => Ok(Movement::Hover),
            other => Err(format!("movement must be 0, 1 or 2, got {other}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectorRing {
    sectors: usize,
}

impl SectorRing {
    pub fn new(sectors: usize) -> Result<Self> {
        if sectors < 2 {
            return Err(Error::arg(format!("a ring needs at least 2 sectors, got {sectors}")));
        }
        Ok(Self { sectors })
    }

    pub fn sectors(&self) -> usize {
        self.sectors
    }

    pub fn sector_width_deg(&self) -> f64 {
        360.0 / self.sectors as f64
    }

    /// Largest possible angular distance, `floor(S/2)`.
    pub fn max_distance(&self) -> usize {
        self.sectors / 2
    }

    pub fn check(&self, s: usize) -> Result<usize> {
        if (1..=self.sectors).contains(&s) {
            Ok(s)
        } else {
            Err(Error::arg(format!("sector {s} outside 1..={}", self.sectors)))
        }
    }

    /// Number of one-sector steps along the shorter way round.
    pub fn angular_distance(&self, s1: usize, s2: usize) -> Result<usize> {
        self.check(s1)?;
        self.check(s2)?;
        Ok(self.distance_unchecked(s1, s2))
    }

    pub(crate) fn distance_unchecked(&self, s1: usize, s2: usize) -> usize {
        let d = s1.abs_diff(s2);
        d.min(self.sectors - d)
    }

    /// Direction of the strictly shorter path; an exact half-ring tie goes clockwise.
    pub fn movement_action(&self, uav: usize, target: usize) -> Result<Movement> {
        self.check(uav)?;
        self.check(target)?;
        Ok(self.movement_unchecked(uav, target))
    }

    pub(crate) fn movement_unchecked(&self, uav: usize, target: usize) -> Movement {
        if uav == target {
            return Movement::Hover;
        }
        // Steps needed going clockwise (decreasing index).
        let cw = (uav + self.sectors - target) % self.sectors;
        let ccw = self.sectors - cw;
        if cw <= ccw {
            Movement::Clockwise
        } else {
            Movement::CounterClockwise
        }
    }

    /// Moves at most one sector.
    pub fn apply_movement(&self, sector: usize, action: Movement) -> Result<usize> {
        self.check(sector)?;
        Ok(self.apply_unchecked(sector, action))
    }

    pub(crate) fn apply_unchecked(&self, sector: usize, action: Movement) -> usize {
        let s = self.sectors;
        match action {
            Movement::Clockwise => (sector + s - 2) % s + 1,
            Movement::CounterClockwise => sector % s + 1,
            Movement::Hover => sector,
        }
    }

    /// Angular span of sector `s` in radians, `[start, end)`.
    pub fn wedge_bounds(&self, s: usize) -> (f64, f64) {
        let w = 2.0 * PI / self.sectors as f64;
        ((s - 1) as f64 * w, s as f64 * w)
    }

    pub fn sector_center_angle(&self, s: usize) -> f64 {
        let (a, b) = self.wedge_bounds(s);
        0.5 * (a + b)
    }

    /// Point on the UAV track at the centre of sector `s`.
    pub fn uav_position(&self, s: usize, radius: f64) -> [f64; 2] {
        let a = self.sector_center_angle(s);
        [radius * a.cos(), radius * a.sin()]
    }
}

/// Service-time multiplier `dist / max_dist + 1`, ranging over `[1, 2]`.
pub fn scale_alpha(dist: f64, max_dist: f64) -> Result<f64> {
    if !(max_dist.is_finite() && max_dist > 0.0) {
        return Err(Error::arg(format!("max_dist must be > 0, got {max_dist}")));
    }
    if !(dist.is_finite() && dist >= 0.0) {
        return Err(Error::arg(format!("dist must be >= 0, got {dist}")));
    }
    if dist > max_dist {
        return Err(Error::arg(format!("dist {dist} exceeds max_dist {max_dist}")));
    }
    Ok(dist / max_dist + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ring() -> SectorRing {
        SectorRing::new(36).unwrap()
    }

    #[test]
    fn distances() {
        let r = ring();
        assert_eq!(r.angular_distance(17, 14).unwrap(), 3);
        assert_eq!(r.angular_distance(1, 19).unwrap(), 18);
        assert_eq!(r.angular_distance(5, 5).unwrap(), 0);
        assert_eq!(r.angular_distance(36, 1).unwrap(), 1);
        assert!(matches!(r.angular_distance(0, 5), Err(Error::Argument(_))));
        assert!(matches!(r.angular_distance(5, 37), Err(Error::Argument(_))));
    }

    #[test]
    fn ring_shape() {
        let r = ring();
        assert_eq!(r.sector_width_deg() * 36.0, 360.0);
        assert_eq!(r.sector_width_deg(), 10.0);
        assert_eq!(r.max_distance(), 18);
        assert_eq!(SectorRing::new(7).unwrap().max_distance(), 3);
        assert!(SectorRing::new(1).is_err());
    }

    #[test]
    fn alpha_values() {
        assert_eq!(scale_alpha(0.0, 18.0).unwrap(), 1.0);
        assert_eq!(scale_alpha(18.0, 18.0).unwrap(), 2.0);
        assert_eq!(scale_alpha(9.0, 18.0).unwrap(), 1.5);
        assert!(scale_alpha(19.0, 18.0).is_err());
        assert!(scale_alpha(1.0, 0.0).is_err());
    }

    #[test]
    fn movement_actions() {
        let r = ring();
        assert_eq!(r.movement_action(17, 14).unwrap(), Movement::Clockwise);
        assert_eq!(r.movement_action(14, 17).unwrap(), Movement::CounterClockwise);
        assert_eq!(r.movement_action(9, 9).unwrap(), Movement::Hover);
        // wrap: 2 -> 35 is 3 steps clockwise
        assert_eq!(r.movement_action(2, 35).unwrap(), Movement::Clockwise);
        // exact tie breaks clockwise
        assert_eq!(r.movement_action(1, 19).unwrap(), Movement::Clockwise);
        assert_eq!(r.movement_action(19, 1).unwrap(), Movement::Clockwise);
    }

    #[test]
    fn apply_steps() {
        let r = ring();
        assert_eq!(r.apply_movement(17, Movement::Clockwise).unwrap(), 16);
        assert_eq!(r.apply_movement(1, Movement::Clockwise).unwrap(), 36);
        assert_eq!(r.apply_movement(36, Movement::CounterClockwise).unwrap(), 1);
        assert_eq!(r.apply_movement(8, Movement::Hover).unwrap(), 8);
    }

    #[test]
    fn movement_encoding() {
        assert_eq!(serde_json::to_string(&Movement::Hover).unwrap(), "2");
        assert_eq!(serde_json::from_str::<Movement>("0").unwrap(), Movement::Clockwise);
        assert!(serde_json::from_str::<Movement>("3").is_err());
    }

    proptest! {
        #[test]
        fn step_toward_target_never_increases_distance(s in 2usize..60, a in 0usize..1000, b in 0usize..1000) {
            let r = SectorRing::new(s).unwrap();
            let (uav, target) = (a % s + 1, b % s + 1);
            let before = r.angular_distance(uav, target).unwrap();
            let act = r.movement_action(uav, target).unwrap();
            prop_assert_eq!(act == Movement::Hover, before == 0);
            let after = r.angular_distance(r.apply_movement(uav, act).unwrap(), target).unwrap();
            if act == Movement::Hover {
                prop_assert_eq!(after, before);
            } else {
                prop_assert_eq!(after + 1, before);
            }
            prop_assert!(before <= r.max_distance());
        }

        #[test]
        fn alpha_monotone_in_unit_band(max in 1usize..100, d1 in 0usize..100, d2 in 0usize..100) {
            let (d1, d2) = (d1.min(max), d2.min(max));
            let (a1, a2) = (scale_alpha(d1 as f64, max as f64).unwrap(), scale_alpha(d2 as f64, max as f64).unwrap());
            prop_assert!((1.0..=2.0).contains(&a1));
            if d1 <= d2 {
                prop_assert!(a1 <= a2);
            }
        }
    }
}
