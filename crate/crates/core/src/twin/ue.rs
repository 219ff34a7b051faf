use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::config::Point;

pub const DEFAULT_NOISE_FIGURE_DB: f64 = 9.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Packet {
    pub arrival_tti: u64,
    pub remaining_bits: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Velocity {
    pub speed_mps: f64,
    /// Radians, counter-clockwise from +x.
    pub heading: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserEquipment {
    pub ue_id: u32,
    pub position: Point,
    pub velocity: Velocity,
    pub waypoint: Option<Point>,
    pub serving_cell: Option<u32>,
    pub mean_offered_load_bps: f64,
    pub buffer: VecDeque<Packet>,
    pub buffer_bits: u64,
    /// Proportional-fair history.
    pub avg_throughput_bps: f64,
    pub noise_figure_db: f64,
}

impl UserEquipment {
    pub fn new(ue_id: u32, position: Point, mean_offered_load_bps: f64, noise_figure_db: f64) -> Self {
        Self {
            ue_id,
            position,
            velocity: Velocity { speed_mps: 0.0, heading: 0.0 },
            waypoint: None,
            serving_cell: None,
            mean_offered_load_bps,
            buffer: VecDeque::new(),
            buffer_bits: 0,
            avg_throughput_bps: 0.0,
            noise_figure_db,
        }
    }

    pub fn enqueue(&mut self, packet: Packet) {
        self.buffer_bits += packet.remaining_bits;
        self.buffer.push_back(packet);
    }

    /// Removes up to `bits` from the head of the queue. Returns the arrival
    /// TTIs of packets that completed.
    pub fn drain(&mut self, mut bits: u64) -> Vec<u64> {
        let mut completed = Vec::new();
        while bits > 0 {
            let Some(head) = self.buffer.front_mut() else { break };
            let take = head.remaining_bits.min(bits);
            head.remaining_bits -= take;
            self.buffer_bits -= take;
            bits -= take;
            if head.remaining_bits == 0 {
                completed.push(head.arrival_tti);
                self.buffer.pop_front();
            }
        }
        completed
    }

    pub fn head_arrival(&self) -> Option<u64> {
        self.buffer.front().map(|p| p.arrival_tti)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drain_is_fifo_and_partial() {
        let mut ue = UserEquipment::new(1, Point::new(0.0, 0.0), 0.0, 9.0);
        ue.enqueue(Packet { arrival_tti: 3, remaining_bits: 100 });
        ue.enqueue(Packet { arrival_tti: 5, remaining_bits: 100 });
        assert_eq!(ue.drain(150), vec![3]);
        assert_eq!(ue.buffer_bits, 50);
        assert_eq!(ue.head_arrival(), Some(5));
        assert_eq!(ue.drain(1000), vec![5]);
        assert_eq!(ue.buffer_bits, 0);
        assert!(ue.drain(10).is_empty());
    }
}
