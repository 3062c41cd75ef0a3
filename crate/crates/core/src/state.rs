//! Sender-side knowledge of every receiver.
//!
//! The feedback matrix is the single source of truth for the Has/Wants sets:
//! a set bit in row `i` column `j` means receiver `i` still wants packet `j`.

use std::fmt;

use crate::bits;
use crate::error::{Error, Result};

pub type ReceiverId = usize;
pub type PacketId = usize;

/// Subset of a frame's packets `0..capacity`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PacketSet {
    capacity: usize,
    words: Vec<u64>,
}

impl PacketSet {
    pub fn empty(capacity: usize) -> Self {
        PacketSet {
            capacity,
            words: vec![0; bits::words_for(capacity)],
        }
    }

    pub fn from_ids(capacity: usize, ids: impl IntoIterator<Item = PacketId>) -> Self {
        let mut set = PacketSet::empty(capacity);
        for j in ids {
            set.insert(j);
        }
        set
    }

    /// Size of the packet universe, `N`.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn contains(&self, packet: PacketId) -> bool {
        packet < self.capacity && bits::contains(&self.words, packet)
    }

    /// Panics if `packet >= capacity`.
    pub fn insert(&mut self, packet: PacketId) {
        assert!(packet < self.capacity, "packet {packet} outside 0..{}", self.capacity);
        bits::insert(&mut self.words, packet);
    }

    pub fn remove(&mut self, packet: PacketId) {
        if packet < self.capacity {
            bits::remove(&mut self.words, packet);
        }
    }

    pub fn len(&self) -> usize {
        bits::count(&self.words)
    }

    pub fn is_empty(&self) -> bool {
        bits::is_clear(&self.words)
    }

    pub fn iter(&self) -> impl Iterator<Item = PacketId> + '_ {
        bits::ones(&self.words)
    }

    /// Packets of `0..capacity` not in the set.
    pub fn complement(&self) -> PacketSet {
        let mut out = PacketSet::from_ids(self.capacity, 0..self.capacity);
        for (o, w) in out.words.iter_mut().zip(&self.words) {
            *o &= !w;
        }
        out
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

impl fmt::Debug for PacketSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Binary `M x N` erasure-state matrix. Row `i` is receiver `i`'s Wants set.
#[derive(Clone, PartialEq, Eq)]
pub struct FeedbackMatrix {
    packets: usize,
    rows: Vec<PacketSet>,
}

impl FeedbackMatrix {
    /// All-zero matrix: every receiver holds every packet.
    pub fn new(receivers: usize, packets: usize) -> Self {
        FeedbackMatrix {
            packets,
            rows: vec![PacketSet::empty(packets); receivers],
        }
    }

    /// Builds a matrix from 0/1 rows. All rows must have equal length.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let packets = rows.first().map_or(0, |r| r.as_ref().len());
        let mut matrix = FeedbackMatrix::new(rows.len(), packets);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != packets {
                return Err(Error::invalid(format!(
                    "row {i} has {} entries, expected {packets}",
                    row.len()
                )));
            }
            for (j, &f) in row.iter().enumerate() {
                match f {
                    0 => {}
                    1 => matrix.rows[i].insert(j),
                    other => return Err(Error::invalid(format!("entry ({i}, {j}) is {other}, expected 0 or 1"))),
                }
            }
        }
        Ok(matrix)
    }

    pub fn receivers(&self) -> usize {
        self.rows.len()
    }

    pub fn packets(&self) -> usize {
        self.packets
    }

    /// `f_ij`: 1 if receiver `i` wants packet `j`, 0 if it holds it.
    pub fn get(&self, receiver: ReceiverId, packet: PacketId) -> u8 {
        self.rows[receiver].contains(packet) as u8
    }

    pub fn wants(&self, receiver: ReceiverId, packet: PacketId) -> bool {
        self.rows[receiver].contains(packet)
    }

    pub fn has(&self, receiver: ReceiverId, packet: PacketId) -> bool {
        !self.rows[receiver].contains(packet)
    }

    /// Marks packet `j` as wanted (erased) by receiver `i`.
    pub fn set_wanted(&mut self, receiver: ReceiverId, packet: PacketId) {
        self.rows[receiver].insert(packet);
    }

    /// `W_i`.
    pub fn wants_set(&self, receiver: ReceiverId) -> &PacketSet {
        &self.rows[receiver]
    }

    /// `H_i`, the complement of `W_i`.
    pub fn has_set(&self, receiver: ReceiverId) -> PacketSet {
        self.rows[receiver].complement()
    }

    pub fn wants_count(&self, receiver: ReceiverId) -> usize {
        self.rows[receiver].len()
    }

    /// Receivers with a non-empty Wants set (`M_w`).
    pub fn wanting_receivers(&self) -> Vec<ReceiverId> {
        (0..self.receivers()).filter(|&i| !self.rows[i].is_empty()).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.rows.iter().all(|r| r.is_empty())
    }

    /// Records an acknowledgement: receiver `i` now holds packet `j`.
    pub fn acknowledge(&mut self, receiver: ReceiverId, packet: PacketId) -> Result<()> {
        if receiver >= self.receivers() || packet >= self.packets {
            return Err(Error::invalid(format!(
                "ack ({receiver}, {packet}) outside {}x{} matrix",
                self.receivers(),
                self.packets
            )));
        }
        if !self.rows[receiver].contains(packet) {
            return Err(Error::ContractViolation(format!(
                "receiver {receiver} already holds packet {packet}"
            )));
        }
        self.rows[receiver].remove(packet);
        Ok(())
    }
}

impl fmt::Debug for FeedbackMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.receivers())
            .map(|i| (0..self.packets).map(|j| char::from(b'0' + self.get(i, j))).collect())
            .collect();
        f.debug_struct("FeedbackMatrix").field("rows", &rows).finish()
    }
}

/// How a received packet combination looks to one receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    NonInnovative,
    InstantlyDecodable(PacketId),
    NonInstantlyDecodable,
}

/// Classifies the XOR of `combo` against a receiver's Wants set.
///
/// `combo` is treated as a set; repeated ids are counted once.
pub fn classify_combination(combo: &[PacketId], wants: &PacketSet) -> Result<Classification> {
    if combo.is_empty() {
        return Err(Error::invalid("empty packet combination"));
    }
    let mut wanted: Option<PacketId> = None;
    let mut several = false;
    for &j in combo {
        if j >= wants.capacity() {
            return Err(Error::invalid(format!(
                "packet {j} outside frame of {} packets",
                wants.capacity()
            )));
        }
        if wants.contains(j) {
            match wanted {
                None => wanted = Some(j),
                Some(prev) if prev != j => several = true,
                Some(_) => {}
            }
        }
    }
    Ok(match (wanted, several) {
        (None, _) => Classification::NonInnovative,
        (Some(_), true) => Classification::NonInstantlyDecodable,
        (Some(j), false) => Classification::InstantlyDecodable(j),
    })
}

/// Per-receiver channel and delay bookkeeping. Has/Wants live in the
/// [`FeedbackMatrix`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverState {
    pub erasure_prob: f64,
    pub cumulative_delay: u32,
}

/// Everything the sender knows during one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameState {
    matrix: FeedbackMatrix,
    receivers: Vec<ReceiverState>,
}

impl FrameState {
    /// Fresh state with zero delays. `erasure` must have one entry per row.
    pub fn new(matrix: FeedbackMatrix, erasure: &[f64]) -> Result<Self> {
        if erasure.len() != matrix.receivers() {
            return Err(Error::invalid(format!(
                "{} erasure probabilities for {} receivers",
                erasure.len(),
                matrix.receivers()
            )));
        }
        if let Some(p) = erasure.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::invalid(format!("erasure probability {p} outside [0, 1]")));
        }
        let receivers = erasure
            .iter()
            .map(|&p| ReceiverState {
                erasure_prob: p,
                cumulative_delay: 0,
            })
            .collect();
        Ok(FrameState { matrix, receivers })
    }

    pub fn with_delays(mut self, delays: &[u32]) -> Result<Self> {
        if delays.len() != self.receivers.len() {
            return Err(Error::invalid("delay vector length differs from receiver count"));
        }
        for (r, &d) in self.receivers.iter_mut().zip(delays) {
            r.cumulative_delay = d;
        }
        Ok(self)
    }

    pub fn matrix(&self) -> &FeedbackMatrix {
        &self.matrix
    }

    /// Marks a packet as wanted, e.g. while loading an externally observed
    /// state.
    pub fn mark_wanted(&mut self, receiver: ReceiverId, packet: PacketId) -> Result<()> {
        self.check_index(receiver, Some(packet))?;
        self.matrix.set_wanted(receiver, packet);
        Ok(())
    }

    /// Overwrites a receiver's cumulative delay.
    pub fn set_delay(&mut self, receiver: ReceiverId, delay: u32) -> Result<()> {
        self.check_index(receiver, None)?;
        self.receivers[receiver].cumulative_delay = delay;
        Ok(())
    }

    fn check_index(&self, receiver: ReceiverId, packet: Option<PacketId>) -> Result<()> {
        if receiver >= self.receivers.len() || packet.is_some_and(|j| j >= self.matrix.packets()) {
            return Err(Error::invalid(format!(
                "({receiver}, {packet:?}) outside {}x{} frame",
                self.receivers.len(),
                self.matrix.packets()
            )));
        }
        Ok(())
    }

    pub fn receivers(&self) -> &[ReceiverState] {
        &self.receivers
    }

    pub fn receiver_count(&self) -> usize {
        self.receivers.len()
    }

    pub fn erasure_probs(&self) -> Vec<f64> {
        self.receivers.iter().map(|r| r.erasure_prob).collect()
    }

    pub fn delays(&self) -> Vec<u32> {
        self.receivers.iter().map(|r| r.cumulative_delay).collect()
    }

    pub fn max_delay(&self) -> u32 {
        self.receivers.iter().map(|r| r.cumulative_delay).max().unwrap_or(0)
    }

    pub fn classify(&self, receiver: ReceiverId, combo: &[PacketId]) -> Result<Classification> {
        classify_combination(combo, self.matrix.wants_set(receiver))
    }

    /// Accounts a successful (non-erased) reception of `combo` at `receiver`.
    ///
    /// Returns the decoding-delay increment, 0 or 1. An instantly decodable
    /// packet is acknowledged straight into the feedback matrix.
    pub fn apply_reception(&mut self, receiver: ReceiverId, combo: &[PacketId]) -> Result<u32> {
        match self.classify(receiver, combo)? {
            Classification::InstantlyDecodable(j) => {
                self.matrix.acknowledge(receiver, j)?;
                Ok(0)
            }
            _ if self.matrix.wants_set(receiver).is_empty() => Ok(0),
            _ => {
                self.receivers[receiver].cumulative_delay += 1;
                Ok(1)
            }
        }
    }
}
