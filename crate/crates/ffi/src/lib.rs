//! C ABI over the `idnc` library.
//!
//! Two opaque handles are exposed: [`IdncConfig`] drives whole Monte-Carlo
//! experiments, and [`IdncFrame`] holds one sender state for packet-by-packet
//! control from a host language. Every fallible call returns an
//! [`IdncStatus`]; the message for the last failure on the calling thread is
//! available from [`idnc_last_error`].
//!
//! The header `include/idnc.h` is generated by cbindgen at build time.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use idnc::graph::DEFAULT_ENUMERATION_BOUND;
use idnc::policies::{max_delay_receivers, prob_max_delay_increase, select_clique};
use idnc::sim::run_experiment;
use idnc::{Clique, Deadline, Error, FeedbackMatrix, FrameState, IdncGraph, PolicyKind, SimConfig, Vertex};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdncStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ContractViolation = 3,
    ResourceLimit = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdncPolicy {
    MddGreedy = 0,
    SddGreedy = 1,
    MddExact = 2,
    SddExact = 3,
}

impl From<IdncPolicy> for PolicyKind {
    fn from(p: IdncPolicy) -> Self {
        match p {
            IdncPolicy::MddGreedy => PolicyKind::MddGreedy,
            IdncPolicy::SddGreedy => PolicyKind::SddGreedy,
            IdncPolicy::MddExact => PolicyKind::MddExact,
            IdncPolicy::SddExact => PolicyKind::SddExact,
        }
    }
}

/// One IDNC graph vertex: `receiver` wants `packet`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdncVertex {
    pub receiver: u32,
    pub packet: u32,
}

/// Frame-averaged experiment results.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IdncStats {
    pub mean_sum_delay: f64,
    pub mean_max_delay: f64,
    pub mean_served_fraction: f64,
    pub mean_recovery_transmissions: f64,
    pub frame_count: u64,
    pub incomplete_frames: u64,
}

/// Opaque experiment configuration.
pub struct IdncConfig {
    inner: SimConfig,
}

/// Opaque sender state for one frame.
pub struct IdncFrame {
    inner: FrameState,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: IdncStatus, msg: &str) -> IdncStatus {
    set_last_error(msg);
    status
}

fn from_error(err: &Error) -> IdncStatus {
    let status = match err {
        Error::InvalidArgument(_) => IdncStatus::InvalidArgument,
        Error::ContractViolation(_) => IdncStatus::ContractViolation,
        Error::ResourceLimit { .. } => IdncStatus::ResourceLimit,
    };
    fail(status, &err.to_string())
}

/// Runs `f`, mapping panics to `IdncStatus::Panic`.
fn guarded(f: impl FnOnce() -> IdncStatus) -> IdncStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(IdncStatus::Panic, "internal panic"),
    }
}

/// Message describing the last failed call on this thread, or an empty
/// string. The pointer stays valid until the next failing call on the same
/// thread.
#[no_mangle]
pub extern "C" fn idnc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// New configuration with the library defaults: infinite deadline, 1000
/// frames, seed 0, greedy max-delay policy, `100 * packets` transmission cap.
/// Free with [`idnc_config_free`].
#[no_mangle]
pub extern "C" fn idnc_config_new(receivers: u32, packets: u32, avg_erasure: f64) -> *mut IdncConfig {
    let inner = SimConfig::new(receivers as usize, packets as usize, avg_erasure);
    Box::into_raw(Box::new(IdncConfig { inner }))
}

#[no_mangle]
pub unsafe extern "C" fn idnc_config_free(config: *mut IdncConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

unsafe fn config_mut<'a>(config: *mut IdncConfig) -> Option<&'a mut SimConfig> {
    config.as_mut().map(|c| &mut c.inner)
}

/// A negative `deadline` means no deadline.
#[no_mangle]
pub unsafe extern "C" fn idnc_config_set_deadline(config: *mut IdncConfig, deadline: i64) -> IdncStatus {
    let Some(cfg) = config_mut(config) else {
        return fail(IdncStatus::NullPointer, "config is null");
    };
    cfg.deadline = match u32::try_from(deadline) {
        Ok(t) => Deadline::Finite(t),
        Err(_) if deadline < 0 => Deadline::Infinite,
        Err(_) => return fail(IdncStatus::InvalidArgument, "deadline exceeds u32"),
    };
    IdncStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn idnc_config_set_frames(config: *mut IdncConfig, frames: u64) -> IdncStatus {
    let Some(cfg) = config_mut(config) else {
        return fail(IdncStatus::NullPointer, "config is null");
    };
    cfg.frames = frames as usize;
    IdncStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn idnc_config_set_seed(config: *mut IdncConfig, seed: u64) -> IdncStatus {
    let Some(cfg) = config_mut(config) else {
        return fail(IdncStatus::NullPointer, "config is null");
    };
    cfg.seed = seed;
    IdncStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn idnc_config_set_policy(config: *mut IdncConfig, policy: IdncPolicy) -> IdncStatus {
    let Some(cfg) = config_mut(config) else {
        return fail(IdncStatus::NullPointer, "config is null");
    };
    cfg.policy = policy.into();
    IdncStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn idnc_config_set_max_transmissions(
    config: *mut IdncConfig,
    max_transmissions: u64,
) -> IdncStatus {
    let Some(cfg) = config_mut(config) else {
        return fail(IdncStatus::NullPointer, "config is null");
    };
    cfg.max_transmissions = max_transmissions as usize;
    IdncStatus::Ok
}

/// Ceiling on the per-frame spread of receiver erasure probabilities.
#[no_mangle]
pub unsafe extern "C" fn idnc_config_set_spread_cap(config: *mut IdncConfig, cap: f64) -> IdncStatus {
    let Some(cfg) = config_mut(config) else {
        return fail(IdncStatus::NullPointer, "config is null");
    };
    if !(0.0..=0.5).contains(&cap) {
        return fail(IdncStatus::InvalidArgument, "spread cap outside [0, 0.5]");
    }
    cfg.spread_cap = cap;
    IdncStatus::Ok
}

/// Runs every frame of the configured experiment and writes the averages to
/// `out`.
#[no_mangle]
pub unsafe extern "C" fn idnc_run_experiment(config: *const IdncConfig, out: *mut IdncStats) -> IdncStatus {
    let (Some(cfg), false) = (config.as_ref(), out.is_null()) else {
        return fail(IdncStatus::NullPointer, "config or out is null");
    };
    guarded(|| match run_experiment(&cfg.inner) {
        Ok(s) => {
            *out = IdncStats {
                mean_sum_delay: s.mean_sum_delay,
                mean_max_delay: s.mean_max_delay,
                mean_served_fraction: s.mean_served_fraction,
                mean_recovery_transmissions: s.mean_recovery_transmissions,
                frame_count: s.frame_count as u64,
                incomplete_frames: s.incomplete_frames as u64,
            };
            IdncStatus::Ok
        }
        Err(e) => from_error(&e),
    })
}

/// New frame in which every receiver holds every packet and has zero delay.
/// `erasure_probs` must point to `receivers` values in `[0, 1]`. Returns null
/// on invalid input; see [`idnc_last_error`].
#[no_mangle]
pub unsafe extern "C" fn idnc_frame_new(receivers: u32, packets: u32, erasure_probs: *const f64) -> *mut IdncFrame {
    if erasure_probs.is_null() && receivers > 0 {
        set_last_error("erasure_probs is null");
        return ptr::null_mut();
    }
    let p = if receivers == 0 {
        &[][..]
    } else {
        slice::from_raw_parts(erasure_probs, receivers as usize)
    };
    match FrameState::new(FeedbackMatrix::new(receivers as usize, packets as usize), p) {
        Ok(inner) => Box::into_raw(Box::new(IdncFrame { inner })),
        Err(e) => {
            set_last_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

#[no_mangle]
pub unsafe extern "C" fn idnc_frame_free(frame: *mut IdncFrame) {
    if !frame.is_null() {
        drop(Box::from_raw(frame));
    }
}

/// Records that `receiver` lost `packet` (sets `f_ij = 1`).
#[no_mangle]
pub unsafe extern "C" fn idnc_frame_set_wanted(frame: *mut IdncFrame, receiver: u32, packet: u32) -> IdncStatus {
    let Some(f) = frame.as_mut() else {
        return fail(IdncStatus::NullPointer, "frame is null");
    };
    match f.inner.mark_wanted(receiver as usize, packet as usize) {
        Ok(()) => IdncStatus::Ok,
        Err(e) => from_error(&e),
    }
}

#[no_mangle]
pub unsafe extern "C" fn idnc_frame_set_delay(frame: *mut IdncFrame, receiver: u32, delay: u32) -> IdncStatus {
    let Some(f) = frame.as_mut() else {
        return fail(IdncStatus::NullPointer, "frame is null");
    };
    match f.inner.set_delay(receiver as usize, delay) {
        Ok(()) => IdncStatus::Ok,
        Err(e) => from_error(&e),
    }
}

/// Writes `f_ij` (1 = wanted, 0 = held) to `out`.
#[no_mangle]
pub unsafe extern "C" fn idnc_frame_get(
    frame: *const IdncFrame,
    receiver: u32,
    packet: u32,
    out: *mut u8,
) -> IdncStatus {
    let (Some(f), false) = (frame.as_ref(), out.is_null()) else {
        return fail(IdncStatus::NullPointer, "frame or out is null");
    };
    let m = f.inner.matrix();
    if receiver as usize >= m.receivers() || packet as usize >= m.packets() {
        return fail(IdncStatus::InvalidArgument, "index outside frame");
    }
    *out = m.get(receiver as usize, packet as usize);
    IdncStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn idnc_frame_get_delay(frame: *const IdncFrame, receiver: u32, out: *mut u32) -> IdncStatus {
    let (Some(f), false) = (frame.as_ref(), out.is_null()) else {
        return fail(IdncStatus::NullPointer, "frame or out is null");
    };
    match f.inner.receivers().get(receiver as usize) {
        Some(r) => {
            *out = r.cumulative_delay;
            IdncStatus::Ok
        }
        None => fail(IdncStatus::InvalidArgument, "receiver outside frame"),
    }
}

/// Selects the clique `policy` would transmit next. Up to `capacity` vertices
/// are written to `out` and the clique size to `out_len`; a clique larger than
/// `capacity` yields `BufferTooSmall` with `out_len` still set. An empty
/// frame yields an empty clique.
#[no_mangle]
pub unsafe extern "C" fn idnc_frame_select(
    frame: *const IdncFrame,
    policy: IdncPolicy,
    out: *mut IdncVertex,
    capacity: usize,
    out_len: *mut usize,
) -> IdncStatus {
    let (Some(f), false) = (frame.as_ref(), out_len.is_null()) else {
        return fail(IdncStatus::NullPointer, "frame or out_len is null");
    };
    if out.is_null() && capacity > 0 {
        return fail(IdncStatus::NullPointer, "out is null");
    }
    guarded(|| {
        let state = &f.inner;
        let graph = IdncGraph::build(state.matrix());
        if graph.is_empty() {
            *out_len = 0;
            return IdncStatus::Ok;
        }
        let clique = match select_clique(
            policy.into(),
            &graph,
            &state.delays(),
            &state.erasure_probs(),
            DEFAULT_ENUMERATION_BOUND,
        ) {
            Ok(c) => c,
            Err(e) => return from_error(&e),
        };
        *out_len = clique.len();
        if clique.len() > capacity {
            return fail(IdncStatus::BufferTooSmall, "clique larger than output buffer");
        }
        let dst = slice::from_raw_parts_mut(out, clique.len());
        for (d, v) in dst.iter_mut().zip(clique.members()) {
            *d = IdncVertex {
                receiver: v.receiver as u32,
                packet: v.packet as u32,
            };
        }
        IdncStatus::Ok
    })
}

unsafe fn read_clique<'a>(clique: *const IdncVertex, len: usize) -> Option<&'a [IdncVertex]> {
    match (clique.is_null(), len) {
        (_, 0) => Some(&[]),
        (true, _) => None,
        (false, n) => Some(slice::from_raw_parts(clique, n)),
    }
}

fn to_clique(vertices: &[IdncVertex]) -> Clique {
    Clique::new(
        vertices
            .iter()
            .map(|v| Vertex::new(v.receiver as usize, v.packet as usize))
            .collect(),
    )
}

/// Probability that sending `clique` raises the maximum decoding delay of
/// the frame.
#[no_mangle]
pub unsafe extern "C" fn idnc_frame_prob_max_delay_increase(
    frame: *const IdncFrame,
    clique: *const IdncVertex,
    len: usize,
    out: *mut f64,
) -> IdncStatus {
    let (Some(f), Some(vs), false) = (frame.as_ref(), read_clique(clique, len), out.is_null()) else {
        return fail(IdncStatus::NullPointer, "null argument");
    };
    let state = &f.inner;
    if vs.iter().any(|v| v.receiver as usize >= state.receiver_count()) {
        return fail(IdncStatus::InvalidArgument, "clique names an unknown receiver");
    }
    let top = max_delay_receivers(&state.delays());
    let wanting = state.matrix().wanting_receivers();
    *out = prob_max_delay_increase(&to_clique(vs), &top, &wanting, &state.erasure_probs());
    IdncStatus::Ok
}

/// Accounts a successful reception of the XOR of `packets` at `receiver`:
/// acknowledges an instantly decodable packet or charges one unit of delay.
/// The increment (0 or 1) is written to `increment`.
#[no_mangle]
pub unsafe extern "C" fn idnc_frame_receive(
    frame: *mut IdncFrame,
    receiver: u32,
    packets: *const u32,
    len: usize,
    increment: *mut u32,
) -> IdncStatus {
    let (Some(f), false, false) = (frame.as_mut(), packets.is_null(), increment.is_null()) else {
        return fail(IdncStatus::NullPointer, "null argument");
    };
    let state = &mut f.inner;
    if receiver as usize >= state.receiver_count() {
        return fail(IdncStatus::InvalidArgument, "receiver outside frame");
    }
    let combo: Vec<usize> = slice::from_raw_parts(packets, len)
        .iter()
        .map(|&j| j as usize)
        .collect();
    match state.apply_reception(receiver as usize, &combo) {
        Ok(inc) => {
            *increment = inc;
            IdncStatus::Ok
        }
        Err(e) => from_error(&e),
    }
}
