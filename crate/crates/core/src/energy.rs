use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Movement;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyCosts {
    pub e_move: f64,
    pub e_hover: f64,
    pub e_tx: f64,
}

impl EnergyCosts {
    /// Joules charged for one event.
    pub fn event_cost(&self, movement: Movement, delivered: bool) -> f64 {
        let base = if movement.is_move() { self.e_move } else { self.e_hover };
        base + if delivered { self.e_tx } else { 0.0 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameEnergy {
    pub movement: f64,
    pub hover: f64,
    pub transmission: f64,
}

impl FrameEnergy {
    pub fn total(&self) -> f64 {
        self.movement + self.hover + self.transmission
    }
}

/// Running energy totals split by mobility and transmission, plus a per-frame
/// breakdown. `battery_initial - battery` always equals [`EnergyLedger::total`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub e_move_total: f64,
    pub e_hover_total: f64,
    pub e_tx_total: f64,
    pub frames: Vec<FrameEnergy>,
}

impl EnergyLedger {
    pub fn total(&self) -> f64 {
        self.e_move_total + self.e_hover_total + self.e_tx_total
    }

    pub fn start_frame(&mut self) {
        self.frames.push(FrameEnergy::default());
    }
}

/// Deducts one event's energy from `battery` and books it in `ledger`.
///
/// Fails with [`Error::BatteryExhausted`] without touching either argument
/// when the battery cannot cover the cost. Returns the joules spent.
pub fn consume_energy(
    battery: &mut f64,
    ledger: &mut EnergyLedger,
    movement: Movement,
    delivered: bool,
    costs: &EnergyCosts,
) -> Result<f64> {
    if *battery <= 0.0 {
        return Err(Error::BatteryExhausted { available: *battery, required: 0.0 });
    }
    let cost = costs.event_cost(movement, delivered);
    if *battery - cost < 0.0 {
        return Err(Error::BatteryExhausted { available: *battery, required: cost });
    }
    *battery -= cost;
    let tx = if delivered { costs.e_tx } else { 0.0 };
    if ledger.frames.is_empty() {
        ledger.start_frame();
    }
    let frame = ledger.frames.last_mut().expect("frame entry exists");
    if movement.is_move() {
        ledger.e_move_total += costs.e_move;
        frame.movement += costs.e_move;
    } else {
        ledger.e_hover_total += costs.e_hover;
        frame.hover += costs.e_hover;
    }
    ledger.e_tx_total += tx;
    frame.transmission += tx;
    Ok(cost)
}
