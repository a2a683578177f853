//! Event-level simulation of the timer/beacon contention protocols and the
//! progressive feedback scheme, with message, bit and computation
//! accounting.
//!
//! Timers map scheduling metrics onto response delays, so the first expiry
//! reveals the per-round winner without explicit metric feedback. Runs are
//! single-threaded and deterministic; independent runs are trial-parallel.

use serde::{Deserialize, Serialize};

use crate::channel::NetworkConfig;
use crate::scheduling::{
    distributed_cs_erua, distributed_cs_minua, distributed_gs_erua, distributed_gs_minua,
    AngularCoordinate, ScheduleDecision,
};
use crate::{Error, Result};

/// Bits accounted per unquantized analog feedback, for overhead tables
/// only (quantization itself is out of scope).
pub const ANALOG_FEEDBACK_BITS: u64 = 32;

/// Timing parameters of the contention protocol.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// Clock period `T` in seconds; timers scale metrics into `[0, T]`.
    pub clock_period: f64,
    /// Minimum separation between the two earliest expiries for a clean
    /// winner; `0` reproduces the collision-free assumption.
    pub guard_time: f64,
    /// Downlink beacon transmission latency (< T).
    pub beacon_latency: f64,
    /// Per-user processing latency (< T).
    pub processing_latency: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            clock_period: 1.0,
            guard_time: 0.0,
            beacon_latency: 1e-3,
            processing_latency: 1e-3,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.clock_period > 0.0) {
            return Err(Error::ConfigInvariant("clock period must be positive".into()));
        }
        if self.guard_time < 0.0 {
            return Err(Error::ConfigInvariant("guard time must be nonnegative".into()));
        }
        if self.beacon_latency >= self.clock_period || self.processing_latency >= self.clock_period
        {
            return Err(Error::ConfigInvariant(
                "latencies must be smaller than the clock period".into(),
            ));
        }
        Ok(())
    }
}

/// Message/bit/computation counters accumulated over one protocol run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackLedger {
    /// Downlink broadcasts by the relay.
    pub beacons: u64,
    /// Winner responses (timer expiries that reached the relay).
    pub responses: u64,
    /// Explicit metric feedback messages.
    pub feedback_msgs: u64,
    /// Total feedback payload bits.
    pub feedback_bits: u64,
    /// Scheduling-metric computations performed at the relay.
    pub relay_metric_ops: u64,
    /// Scheduling-metric computations performed at users.
    pub user_metric_ops: u64,
    /// Collision retries resolved by the deterministic tie rule.
    pub retries: u64,
}

impl FeedbackLedger {
    /// Header of the CSV serialization, counter names fixed.
    pub const CSV_HEADER: &'static str =
        "beacons,responses,feedback_msgs,feedback_bits,relay_metric_ops,user_metric_ops";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.beacons,
            self.responses,
            self.feedback_msgs,
            self.feedback_bits,
            self.relay_metric_ops,
            self.user_metric_ops
        )
    }
}

/// Result of one protocol run.
#[derive(Debug, Clone)]
pub struct ProtocolOutcome {
    pub decision: ScheduleDecision,
    /// Wall time of the contention, seconds.
    pub elapsed: f64,
    pub ledger: FeedbackLedger,
    /// Set when any round's two earliest expiries were closer than the
    /// guard time; the winner is then resolved by index order.
    pub collision: bool,
}

/// Outcome of a single timer round.
#[derive(Debug, Clone, Copy)]
pub struct TimerRound {
    /// Index of the winning candidate within the delays slice.
    pub winner: usize,
    pub winning_delay: f64,
    pub collision: bool,
}

/// First-expiry contention: the smallest delay wins, ties and sub-guard
/// separations resolve to the lower index with the collision flag set.
pub fn timer_round(delays: &[f64], pconfig: &ProtocolConfig) -> Result<TimerRound> {
    if delays.is_empty() {
        return Err(Error::Domain("timer_round: no candidates".into()));
    }
    let mut winner = 0usize;
    for (i, &d) in delays.iter().enumerate() {
        if d < delays[winner] {
            winner = i;
        }
    }
    let mut collision = false;
    if delays.len() > 1 {
        let mut runner_up = f64::INFINITY;
        for (i, &d) in delays.iter().enumerate() {
            if i != winner {
                runner_up = runner_up.min(d);
            }
        }
        collision = runner_up - delays[winner] < pconfig.guard_time;
    }
    Ok(TimerRound {
        winner,
        winning_delay: delays[winner],
        collision,
    })
}

/// Timer delay of one coordinate component: angles map as
/// `delta = (phi / 90 deg) * T`; chordal coordinates scale by their maximum
/// `sqrt(N)` instead, preserving the argmin and hence the decision.
fn coordinate_delay(value: f64, n: usize, pconfig: &ProtocolConfig) -> f64 {
    let full_scale = if n == 1 {
        std::f64::consts::FRAC_PI_2
    } else {
        (n as f64).sqrt()
    };
    value / full_scale * pconfig.clock_period
}

/// Three beacon rounds of the angle-based cluster-wise selection. The
/// ledger is constant in the number of candidates: 3 beacons and 3 winner
/// responses.
pub fn run_distributed_cs_minua(
    coords: &[Vec<AngularCoordinate>; 3],
    config: &NetworkConfig,
    pconfig: &ProtocolConfig,
) -> Result<ProtocolOutcome> {
    pconfig.validate()?;
    let mut ledger = FeedbackLedger {
        user_metric_ops: coords.iter().map(|c| c.len() as u64).sum(),
        ..Default::default()
    };
    let mut elapsed = 0.0;
    let mut collision = false;
    let mut active = [true; 3];
    let mut selected = [0usize; 3];
    for m in 0..3 {
        ledger.beacons += 1;
        // candidates still competing, in (cluster, index) order
        let mut ids = Vec::new();
        let mut delays = Vec::new();
        for (k, cluster) in coords.iter().enumerate() {
            if !active[k] {
                continue;
            }
            for (j, c) in cluster.iter().enumerate() {
                ids.push((k, j));
                delays.push(coordinate_delay(c.component(m), config.n, pconfig));
            }
        }
        let round = timer_round(&delays, pconfig)?;
        if round.collision {
            collision = true;
            ledger.retries += 1;
        }
        let (k, j) = ids[round.winner];
        selected[k] = j;
        active[k] = false;
        ledger.responses += 1;
        elapsed += pconfig.beacon_latency + pconfig.processing_latency + round.winning_delay;
    }
    let reference = distributed_cs_minua(coords, config);
    debug_assert_eq!(reference.selected.user_triple(), selected);
    Ok(ProtocolOutcome {
        decision: ScheduleDecision {
            selected: crate::scheduling::Selection::Users(selected),
            scheme: reference.scheme,
            metric_trace: reference.metric_trace,
        },
        elapsed,
        ledger,
        collision,
    })
}

/// Inverse-metric timer contention of the ER-UA cluster-wise selection:
/// one relay beacon, then three independent per-cluster contentions (one
/// winner per cluster is required and the clusters are assumed separated
/// enough not to arbitrate across).
pub fn run_distributed_cs_erua(
    min_ecgs: &[Vec<f64>; 3],
    config: &NetworkConfig,
    pconfig: &ProtocolConfig,
) -> Result<ProtocolOutcome> {
    pconfig.validate()?;
    let mut ledger = FeedbackLedger {
        beacons: 1,
        user_metric_ops: min_ecgs.iter().map(|c| c.len() as u64).sum(),
        ..Default::default()
    };
    let mut elapsed: f64 = pconfig.beacon_latency;
    let mut collision = false;
    let mut selected = [0usize; 3];
    for (k, cluster) in min_ecgs.iter().enumerate() {
        let delays: Vec<f64> = cluster
            .iter()
            .map(|&a2| pconfig.clock_period / a2)
            .collect();
        let round = timer_round(&delays, pconfig)?;
        if round.collision {
            collision = true;
            ledger.retries += 1;
        }
        selected[k] = round.winner;
        ledger.responses += 1;
        // the three contentions run concurrently after the shared beacon
        elapsed = elapsed
            .max(pconfig.beacon_latency + pconfig.processing_latency + round.winning_delay);
    }
    let reference = distributed_cs_erua(min_ecgs, config);
    Ok(ProtocolOutcome {
        decision: ScheduleDecision {
            selected: crate::scheduling::Selection::Users(selected),
            scheme: reference.scheme,
            metric_trace: reference.metric_trace,
        },
        elapsed,
        ledger,
        collision,
    })
}

/// Input to the group-wise protocol run.
pub enum GroupMetrics<'a> {
    /// Min-UA: per-group angular coordinates (progressive two-phase).
    MinUa(&'a [[AngularCoordinate; 3]]),
    /// ER-UA: per-group min-ECG triples (single full feedback phase).
    ErUa(&'a [[f64; 3]]),
}

/// Progressive feedback run of the group-wise selection.
///
/// Min-UA counts `3M` two-bit phase-1 feedbacks, one relay notification
/// per surviving group, then three analog feedbacks per survivor; ER-UA
/// counts exactly `3M` analog feedbacks. Decisions match the pure
/// schedulers.
pub fn run_distributed_gs(
    metrics: GroupMetrics<'_>,
    config: &NetworkConfig,
    pconfig: &ProtocolConfig,
    fallback_seed: u64,
) -> Result<ProtocolOutcome> {
    pconfig.validate()?;
    let mut ledger = FeedbackLedger::default();
    let elapsed;
    let decision = match metrics {
        GroupMetrics::MinUa(coords) => {
            let m = coords.len() as u64;
            ledger.beacons = 1;
            ledger.user_metric_ops = 3 * m;
            // phase 1: every user reports its best direction in two bits
            ledger.feedback_msgs = 3 * m;
            ledger.feedback_bits = 2 * 3 * m;
            let survivors = coords
                .iter()
                .filter(|c| {
                    let d =
                        [c[0].best_direction(), c[1].best_direction(), c[2].best_direction()];
                    d[0] != d[1] && d[0] != d[2] && d[1] != d[2]
                })
                .count() as u64;
            // phase 2: the relay notifies each surviving group, whose users
            // feed back the analog minimum coordinate
            ledger.beacons += survivors;
            ledger.feedback_msgs += 3 * survivors;
            ledger.feedback_bits += ANALOG_FEEDBACK_BITS * 3 * survivors;
            ledger.relay_metric_ops = survivors;
            elapsed = pconfig.beacon_latency * (1 + survivors) as f64
                + pconfig.processing_latency * if survivors > 0 { 2.0 } else { 1.0 };
            distributed_gs_minua(coords, config, fallback_seed)
        }
        GroupMetrics::ErUa(groups) => {
            let m = groups.len() as u64;
            ledger.beacons = 1;
            ledger.user_metric_ops = 3 * m;
            ledger.feedback_msgs = 3 * m;
            ledger.feedback_bits = ANALOG_FEEDBACK_BITS * 3 * m;
            ledger.relay_metric_ops = m;
            elapsed = pconfig.beacon_latency + pconfig.processing_latency;
            distributed_gs_erua(groups, config)?
        }
    };
    Ok(ProtocolOutcome {
        decision,
        elapsed,
        ledger,
        collision: false,
    })
}

/// Scheme identifier for the deterministic complexity report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeClass {
    CentralizedCs,
    CentralizedGs,
    DistributedCs,
    DistributedGs,
}

/// Deterministic per-scheduling-event cost counters: the relay enumerates
/// `M1*M2*M3` metric computations for centralized CS and `M` for
/// centralized GS; distributed schemes push one metric computation to each
/// user, the relay synthesizing only the `M` group metrics for GS.
pub fn complexity_report(scheme: SchemeClass, config: &NetworkConfig) -> FeedbackLedger {
    let [m1, m2, m3] = config.cluster_sizes;
    let users = config.total_users() as u64;
    let m = config.group_count as u64;
    match scheme {
        SchemeClass::CentralizedCs => FeedbackLedger {
            // global CSI: one report per candidate
            feedback_msgs: users,
            relay_metric_ops: (m1 * m2 * m3) as u64,
            ..Default::default()
        },
        SchemeClass::CentralizedGs => FeedbackLedger {
            feedback_msgs: 3 * m,
            relay_metric_ops: m,
            ..Default::default()
        },
        SchemeClass::DistributedCs => FeedbackLedger {
            relay_metric_ops: 0,
            user_metric_ops: users,
            ..Default::default()
        },
        SchemeClass::DistributedGs => FeedbackLedger {
            relay_metric_ops: m,
            user_metric_ops: 3 * m,
            ..Default::default()
        },
    }
}
