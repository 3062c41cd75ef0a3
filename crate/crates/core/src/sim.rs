//! Frame lifecycle over a memoryless broadcast erasure channel. Each frame
//! draws receiver erasure probabilities, sends every packet uncoded once, then
//! recovers losses with coded transmissions chosen by a policy.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Clique, IdncGraph, DEFAULT_ENUMERATION_BOUND};
use crate::policies::{select_clique, PolicyKind};
use crate::state::{FeedbackMatrix, FrameState};

/// Default ceiling on the half-width of the per-frame erasure jitter.
///
/// With a tight ceiling every receiver sees nearly the same channel, and the
/// sum-delay heuristic looks better at high `P` than it does once receivers
/// genuinely differ. 0.35 lets the spread keep growing with `P` up to 0.35.
pub const DEFAULT_ERASURE_SPREAD: f64 = 0.35;

/// Decoding-delay budget a receiver must meet to count as served.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Deadline {
    Finite(u32),
    Infinite,
}

impl Deadline {
    pub fn admits(self, delay: u32) -> bool {
        match self {
            Deadline::Finite(t) => delay <= t,
            Deadline::Infinite => true,
        }
    }
}

impl fmt::Display for Deadline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Deadline::Finite(t) => write!(f, "{t}"),
            Deadline::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Deadline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inf" | "infinite" | "infinity" => Ok(Deadline::Infinite),
            _ => s
                .parse()
                .map(Deadline::Finite)
                .map_err(|_| Error::invalid(format!("deadline `{s}` is neither an integer nor `inf`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub receivers: usize,
    pub packets: usize,
    /// Mean erasure probability `P`.
    pub avg_erasure: f64,
    pub deadline: Deadline,
    pub frames: usize,
    pub seed: u64,
    pub policy: PolicyKind,
    /// Recovery transmissions allowed per frame before it is abandoned.
    pub max_transmissions: usize,
    /// Vertex ceiling for the exact policies.
    pub enumeration_bound: usize,
    /// Ceiling on the per-frame erasure jitter; see [`draw_frame_erasures`].
    pub spread_cap: f64,
}

impl SimConfig {
    /// Defaults: infinite deadline, 1000 frames, seed 0, greedy MDD, and a
    /// transmission cap of `100 * packets`.
    pub fn new(receivers: usize, packets: usize, avg_erasure: f64) -> Self {
        SimConfig {
            receivers,
            packets,
            avg_erasure,
            deadline: Deadline::Infinite,
            frames: 1000,
            seed: 0,
            policy: PolicyKind::MddGreedy,
            max_transmissions: 100 * packets,
            enumeration_bound: DEFAULT_ENUMERATION_BOUND,
            spread_cap: DEFAULT_ERASURE_SPREAD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.receivers == 0 || self.packets == 0 {
            return Err(Error::invalid("receivers and packets must be positive"));
        }
        if !(0.0..=1.0).contains(&self.avg_erasure) {
            return Err(Error::invalid(format!(
                "erasure probability {} outside [0, 1]",
                self.avg_erasure
            )));
        }
        if !(0.0..=0.5).contains(&self.spread_cap) {
            return Err(Error::invalid(format!(
                "spread cap {} outside [0, 0.5]",
                self.spread_cap
            )));
        }
        if self.frames == 0 {
            return Err(Error::invalid("frames must be positive"));
        }
        if self.max_transmissions < self.packets {
            return Err(Error::invalid(format!(
                "max transmissions {} below packet count {}",
                self.max_transmissions, self.packets
            )));
        }
        let worst = self.receivers * self.packets;
        if self.policy.is_exact() && worst > self.enumeration_bound {
            return Err(Error::ResourceLimit {
                vertices: worst,
                bound: self.enumeration_bound,
            });
        }
        Ok(())
    }
}

/// Outcome of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameResult {
    pub per_receiver_delay: Vec<u32>,
    /// Whether each receiver ended the frame with an empty Wants set.
    pub per_receiver_complete: Vec<bool>,
    pub sum_delay: u64,
    pub max_delay: u32,
    /// Receivers that completed within the configured deadline.
    pub served_count: usize,
    pub recovery_transmissions: usize,
    /// False when the transmission cap cut the frame short.
    pub complete: bool,
}

impl FrameResult {
    fn from_state(state: &FrameState, transmissions: usize, deadline: Deadline) -> Self {
        let delays = state.delays();
        let done: Vec<bool> = (0..state.receiver_count())
            .map(|i| state.matrix().wants_count(i) == 0)
            .collect();
        let mut result = FrameResult {
            sum_delay: delays.iter().map(|&d| u64::from(d)).sum(),
            max_delay: delays.iter().copied().max().unwrap_or(0),
            complete: done.iter().all(|&d| d),
            per_receiver_delay: delays,
            per_receiver_complete: done,
            served_count: 0,
            recovery_transmissions: transmissions,
        };
        result.served_count = result.served_within(deadline);
        result
    }

    /// Receivers that completed the frame with delay within `deadline`.
    pub fn served_within(&self, deadline: Deadline) -> usize {
        self.per_receiver_delay
            .iter()
            .zip(&self.per_receiver_complete)
            .filter(|&(&d, &done)| done && deadline.admits(d))
            .count()
    }
}

/// Frame-averaged statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentStats {
    pub mean_sum_delay: f64,
    pub mean_max_delay: f64,
    pub mean_served_fraction: f64,
    pub mean_recovery_transmissions: f64,
    pub frame_count: usize,
    pub incomplete_frames: usize,
}

impl ExperimentStats {
    /// Averages `frames` in order, counting served receivers against
    /// `deadline` rather than each frame's stored `served_count`.
    pub fn from_frames(frames: &[FrameResult], deadline: Deadline) -> Self {
        let n = frames.len().max(1) as f64;
        let mut stats = ExperimentStats {
            mean_sum_delay: 0.0,
            mean_max_delay: 0.0,
            mean_served_fraction: 0.0,
            mean_recovery_transmissions: 0.0,
            frame_count: frames.len(),
            incomplete_frames: 0,
        };
        for f in frames {
            let receivers = f.per_receiver_delay.len().max(1) as f64;
            stats.mean_sum_delay += f.sum_delay as f64;
            stats.mean_max_delay += f64::from(f.max_delay);
            stats.mean_served_fraction += f.served_within(deadline) as f64 / receivers;
            stats.mean_recovery_transmissions += f.recovery_transmissions as f64;
            stats.incomplete_frames += usize::from(!f.complete);
        }
        stats.mean_sum_delay /= n;
        stats.mean_max_delay /= n;
        stats.mean_served_fraction /= n;
        stats.mean_recovery_transmissions /= n;
        stats
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic random substreams for one frame of an experiment.
///
/// Every draw is a function of `(seed, frame, purpose, index)` only, so two
/// policies run on the same frame see identical channel realisations for as
/// long as their transmissions line up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameStreams {
    pub seed: u64,
    pub frame: u64,
}

impl FrameStreams {
    const ERASURES: u64 = 0;
    const INITIAL: u64 = 1;
    const RECOVERY: u64 = 2;

    pub fn new(seed: u64, frame: u64) -> Self {
        FrameStreams { seed, frame }
    }

    fn stream(&self, purpose: u64, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let id = splitmix64(splitmix64(splitmix64(self.frame) ^ purpose) ^ index);
        rng.set_stream(id);
        rng
    }

    pub fn erasure_rng(&self) -> ChaCha8Rng {
        self.stream(Self::ERASURES, 0)
    }

    pub fn initial_rng(&self) -> ChaCha8Rng {
        self.stream(Self::INITIAL, 0)
    }

    /// Substream for recovery transmission `t`; yields one draw per receiver.
    pub fn transmission_rng(&self, t: u64) -> ChaCha8Rng {
        self.stream(Self::RECOVERY, t)
    }
}

/// Draws each receiver's erasure probability uniformly from
/// `[P - d, P + d]` with `d = min(P, 1 - P, cap)`, so the mean stays `P`.
pub fn draw_frame_erasures<R: Rng + ?Sized>(
    avg_erasure: f64,
    receivers: usize,
    cap: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&avg_erasure) {
        return Err(Error::invalid(format!(
            "erasure probability {avg_erasure} outside [0, 1]"
        )));
    }
    if cap.is_nan() || cap < 0.0 {
        return Err(Error::invalid(format!("spread cap {cap} is negative")));
    }
    let spread = avg_erasure.min(1.0 - avg_erasure).min(cap);
    if spread == 0.0 {
        return Ok(vec![avg_erasure; receivers]);
    }
    Ok((0..receivers)
        .map(|_| rng.random_range(avg_erasure - spread..=avg_erasure + spread))
        .collect())
}

/// Sends the `packets` source packets uncoded; receiver `i` loses each one
/// independently with probability `p[i]`.
pub fn run_initial_phase<R: Rng + ?Sized>(p: &[f64], packets: usize, rng: &mut R) -> FeedbackMatrix {
    let mut matrix = FeedbackMatrix::new(p.len(), packets);
    for j in 0..packets {
        for (i, &pi) in p.iter().enumerate() {
            if rng.random::<f64>() < pi {
                matrix.set_wanted(i, j);
            }
        }
    }
    matrix
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransmitOutcome {
    /// Per-receiver delay increments, each 0 or 1.
    pub increments: Vec<u32>,
    /// Whether the maximum cumulative delay strictly grew.
    pub x_event: bool,
    /// Which receivers lost the transmission.
    pub erased: Vec<bool>,
}

/// Broadcasts the XOR of `clique`'s packets once. Exactly one uniform draw is
/// taken per receiver, in receiver order, whatever the state.
pub fn transmit_once<R: Rng + ?Sized>(state: &mut FrameState, clique: &Clique, rng: &mut R) -> Result<TransmitOutcome> {
    if clique.is_empty() {
        return Err(Error::invalid("cannot transmit an empty clique"));
    }
    let combo = clique.combo();
    let before = state.max_delay();
    let m = state.receiver_count();
    let mut increments = vec![0; m];
    let mut erased = vec![false; m];
    for i in 0..m {
        let draw: f64 = rng.random();
        if draw < state.receivers()[i].erasure_prob {
            erased[i] = true;
            continue;
        }
        increments[i] = state.apply_reception(i, &combo)?;
    }
    Ok(TransmitOutcome {
        increments,
        x_event: state.max_delay() > before,
        erased,
    })
}

/// Runs coded recovery transmissions until every Wants set is empty or the
/// configured cap is hit.
pub fn run_recovery_phase(state: &mut FrameState, config: &SimConfig, streams: &FrameStreams) -> Result<FrameResult> {
    let mut transmissions = 0;
    loop {
        let graph = IdncGraph::build(state.matrix());
        if graph.is_empty() || transmissions == config.max_transmissions {
            break;
        }
        let clique = select_clique(
            config.policy,
            &graph,
            &state.delays(),
            &state.erasure_probs(),
            config.enumeration_bound,
        )?;
        let mut rng = streams.transmission_rng(transmissions as u64);
        transmit_once(state, &clique, &mut rng)?;
        transmissions += 1;
    }
    Ok(FrameResult::from_state(state, transmissions, config.deadline))
}

/// Simulates one whole frame from its erasure draws to the end of recovery.
pub fn run_frame(config: &SimConfig, frame: u64) -> Result<FrameResult> {
    let streams = FrameStreams::new(config.seed, frame);
    let p = draw_frame_erasures(
        config.avg_erasure,
        config.receivers,
        config.spread_cap,
        &mut streams.erasure_rng(),
    )?;
    let matrix = run_initial_phase(&p, config.packets, &mut streams.initial_rng());
    let mut state = FrameState::new(matrix, &p)?;
    run_recovery_phase(&mut state, config, &streams)
}

/// All frames of an experiment, in frame order. Frames run in parallel.
pub fn simulate_frames(config: &SimConfig) -> Result<Vec<FrameResult>> {
    config.validate()?;
    (0..config.frames as u64)
        .into_par_iter()
        .map(|f| run_frame(config, f))
        .collect()
}

pub fn run_experiment(config: &SimConfig) -> Result<ExperimentStats> {
    let frames = simulate_frames(config)?;
    Ok(ExperimentStats::from_frames(&frames, config.deadline))
}
