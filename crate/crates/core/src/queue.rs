use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Packet {
    pub ue: usize,
    pub seq: u64,
    pub arrival_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Enqueue {
    Enqueued,
    Dropped,
}

/// Bounded FIFO buffer of one UE. Arrivals to a full buffer are dropped.
///
/// Counters satisfy `generated == enqueued + dropped` and
/// `enqueued == delivered + len()` after every mutation.
#[derive(Debug, Clone)]
pub struct UeQueue {
    ue: usize,
    items: VecDeque<Packet>,
    limit: usize,
    pub generated: u64,
    pub enqueued: u64,
    pub dropped: u64,
    pub delivered: u64,
}

impl UeQueue {
    pub fn new(ue: usize, limit: usize) -> Self {
        Self {
            ue,
            items: VecDeque::with_capacity(limit),
            limit,
            generated: 0,
            enqueued: 0,
            dropped: 0,
            delivered: 0,
        }
    }

    pub fn ue(&self) -> usize {
        self.ue
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.items.len() >= self.limit
    }

    pub fn head(&self) -> Option<&Packet> {
        self.items.front()
    }

    pub fn enqueue(&mut self, pkt: Packet) -> Enqueue {
        debug_assert_eq!(pkt.ue, self.ue, "packet routed to the wrong queue");
        self.generated += 1;
        if self.is_full() {
            self.dropped += 1;
            Enqueue::Dropped
        } else {
            self.items.push_back(pkt);
            self.enqueued += 1;
            Enqueue::Enqueued
        }
    }

    /// Removes the oldest packet and counts it as delivered.
    pub fn dequeue(&mut self) -> Option<Packet> {
        let pkt = self.items.pop_front()?;
        self.delivered += 1;
        Some(pkt)
    }

    pub fn counters_consistent(&self) -> bool {
        self.items.len() <= self.limit
            && self.generated == self.enqueued + self.dropped
            && self.enqueued == self.delivered + self.items.len() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pkt(seq: u64) -> Packet {
        Packet { ue: 0, seq, arrival_time: seq as f64 }
    }

    fn filled(n: usize, limit: usize) -> UeQueue {
        let mut q = UeQueue::new(0, limit);
        for i in 0..n {
            q.enqueue(pkt(i as u64));
        }
        q
    }

    #[test]
    fn full_queue_drops() {
        let mut q = filled(200, 200);
        assert_eq!(q.enqueue(pkt(999)), Enqueue::Dropped);
        assert_eq!(q.len(), 200);
        assert_eq!(q.dropped, 1);
    }

    #[test]
    fn last_free_slot_accepts() {
        let mut q = filled(199, 200);
        assert_eq!(q.enqueue(pkt(999)), Enqueue::Enqueued);
        assert_eq!(q.len(), 200);
    }

    #[test]
    fn empty_queue_enqueue_sets_head() {
        let mut q = UeQueue::new(0, 200);
        assert_eq!(q.enqueue(pkt(5)), Enqueue::Enqueued);
        assert_eq!(q.head(), Some(&pkt(5)));
    }

    #[test]
    fn fifo_order() {
        let mut q = filled(3, 10);
        let out: Vec<u64> = std::iter::from_fn(|| q.dequeue()).map(|p| p.seq).collect();
        assert_eq!(out, vec![0, 1, 2]);
        assert!(q.dequeue().is_none());
    }

    #[test]
    fn dequeue_returns_head() {
        let mut q = filled(2, 10);
        assert_eq!(q.dequeue(), Some(pkt(0)));
        assert_eq!(q.head(), Some(&pkt(1)));
        assert_eq!(q.len(), 1);
    }

    proptest! {
        #[test]
        fn counters_hold_under_any_op_sequence(ops in prop::collection::vec(any::<bool>(), 0..400), limit in 1usize..20) {
            let mut q = UeQueue::new(0, limit);
            let mut seq = 0;
            for push in ops {
                if push {
                    q.enqueue(pkt(seq));
                    seq += 1;
                } else {
                    q.dequeue();
                }
                prop_assert!(q.counters_consistent());
            }
        }
    }
}
