//! The six scheduling criteria plus the chordal-distance variant for
//! multi-stream channels.
//!
//! Centralized schemes enumerate candidates and maximize the true min-SNR;
//! distributed schemes act on per-user metrics computable with local CSI
//! only. Tie-breaking is deterministic lexicographic everywhere: first by
//! cluster, then by intra-cluster index, matching the enumeration order
//! `{1,1,1} < {2,1,1} < ...`.

use crate::channel::{ChannelSet, NetworkConfig, RssBasis, TransmissionMode};
use crate::erua::{group_metric, min_snr_from_tables, EcgTable};
use crate::mathkit::{self, ComplexMatrix};
use crate::minua::minua_min_snr;
use crate::{Error, Result};

/// What a scheduler picked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    /// One user index per cluster.
    Users([usize; 3]),
    /// A predefined group index; group `p` is user `p` from each cluster.
    Group(usize),
}

impl Selection {
    /// The user triple realizing the selection.
    pub fn user_triple(&self) -> [usize; 3] {
        match *self {
            Selection::Users(j) => j,
            Selection::Group(p) => [p, p, p],
        }
    }
}

/// A scheduling outcome: the selection, the scheme that produced it and the
/// per-candidate metrics it compared.
#[derive(Debug, Clone)]
pub struct ScheduleDecision {
    pub selected: Selection,
    pub scheme: &'static str,
    /// Metric values in the order the scheme examined candidates.
    pub metric_trace: Vec<f64>,
}

/// Per-user coordinate within the reference signal space: angles of the
/// characteristic direction to each block for `N = 1`, chordal distances of
/// the characteristic subspace for `N > 1`. Smaller means better aligned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularCoordinate(pub [f64; 3]);

impl AngularCoordinate {
    pub fn component(&self, m: usize) -> f64 {
        self.0[m]
    }

    /// Index of the best-aligned reference direction (the 2-bit phase-1
    /// feedback of the group-wise scheme).
    pub fn best_direction(&self) -> usize {
        let mut best = 0;
        for m in 1..3 {
            if self.0[m] < self.0[best] {
                best = m;
            }
        }
        best
    }

    pub fn min_component(&self) -> f64 {
        self.0[self.best_direction()]
    }
}

/// Computes the coordinate of one Min-UA channel (`3N x 2N`). The
/// characteristic direction/subspace is the orthogonal complement of the
/// channel column space.
pub fn angular_coordinate(
    h: &ComplexMatrix,
    rss: &RssBasis,
    n: usize,
) -> Result<AngularCoordinate> {
    let basis = mathkit::left_null_basis(h, mathkit::DEFAULT_RANK_TOL)?;
    if basis.dim() != n {
        return Err(Error::DegenerateChannel(format!(
            "characteristic subspace has dimension {} (expected {n})",
            basis.dim()
        )));
    }
    let mut coord = [0.0; 3];
    if n == 1 {
        let r = basis.column(0);
        for (m, c) in coord.iter_mut().enumerate() {
            *c = mathkit::acute_angle(&r, &rss.direction(m, 0))?;
        }
    } else {
        for (m, c) in coord.iter_mut().enumerate() {
            let block = mathkit::SubspaceBasis::new(rss.block(m))?;
            *c = mathkit::chordal_distance(&basis, &block)?;
        }
    }
    Ok(AngularCoordinate(coord))
}

/// Exhaustive argmax of the min-SNR over all `M1*M2*M3` triples, using the
/// transmission chain of `config.mode`. Ties resolve to the earliest triple
/// in enumeration order.
pub fn centralized_cs(
    channels: &ChannelSet,
    rss: &RssBasis,
    config: &NetworkConfig,
) -> Result<ScheduleDecision> {
    let mut best: Option<([usize; 3], f64)> = None;
    let mut trace = Vec::new();
    // Enumeration `{1,1,1} < {2,1,1} < ...` varies the first index fastest.
    for j3 in 0..config.cluster_sizes[2] {
        for j2 in 0..config.cluster_sizes[1] {
            for j1 in 0..config.cluster_sizes[0] {
                let triple = [j1, j2, j3];
                let rho = triple_min_snr(channels, triple, rss, config)?;
                trace.push(rho);
                if best.map_or(true, |(_, b)| rho > b) {
                    best = Some((triple, rho));
                }
            }
        }
    }
    let (selected, _) = best.expect("at least one candidate triple");
    Ok(ScheduleDecision {
        selected: Selection::Users(selected),
        scheme: "centralized-cs",
        metric_trace: trace,
    })
}

/// Argmax of the min-SNR over the `M` predefined diagonal groups.
pub fn centralized_gs(
    channels: &ChannelSet,
    rss: &RssBasis,
    config: &NetworkConfig,
) -> Result<ScheduleDecision> {
    let mut best: Option<(usize, f64)> = None;
    let mut trace = Vec::new();
    for p in 0..config.group_count {
        let rho = triple_min_snr(channels, [p, p, p], rss, config)?;
        trace.push(rho);
        if best.map_or(true, |(_, b)| rho > b) {
            best = Some((p, rho));
        }
    }
    let (selected, _) = best.expect("at least one group");
    Ok(ScheduleDecision {
        selected: Selection::Group(selected),
        scheme: "centralized-gs",
        metric_trace: trace,
    })
}

/// End-to-end min-SNR of one candidate triple under the configured mode.
pub fn triple_min_snr(
    channels: &ChannelSet,
    triple: [usize; 3],
    rss: &RssBasis,
    config: &NetworkConfig,
) -> Result<f64> {
    match config.mode {
        TransmissionMode::MinUa => minua_min_snr(channels.triple(triple), config),
        TransmissionMode::ErUa => {
            let t0 = EcgTable::new(channels.matrix(0, triple[0]), rss)?;
            let t1 = EcgTable::new(channels.matrix(1, triple[1]), rss)?;
            let t2 = EcgTable::new(channels.matrix(2, triple[2]), rss)?;
            min_snr_from_tables([&t0, &t1, &t2], config)
        }
    }
}

/// Three-round sequential selection on angular coordinates: round `m`
/// selects, over the clusters still competing, the candidate whose
/// coordinate component `m` is smallest; the winner's whole cluster then
/// falls silent.
pub fn distributed_cs_minua(
    coords: &[Vec<AngularCoordinate>; 3],
    _config: &NetworkConfig,
) -> ScheduleDecision {
    let mut active = [true; 3];
    let mut selected = [0usize; 3];
    let mut trace = Vec::new();
    for m in 0..3 {
        let mut best: Option<(f64, usize, usize)> = None;
        for (k, cluster) in coords.iter().enumerate() {
            if !active[k] {
                continue;
            }
            for (j, coord) in cluster.iter().enumerate() {
                let v = coord.component(m);
                if best.map_or(true, |(b, _, _)| v < b) {
                    best = Some((v, k, j));
                }
            }
        }
        let (v, k, j) = best.expect("some cluster still active");
        trace.push(v);
        selected[k] = j;
        active[k] = false;
    }
    ScheduleDecision {
        selected: Selection::Users(selected),
        scheme: "distributed-cs",
        metric_trace: trace,
    }
}

/// Progressive two-phase group selection: phase 1 keeps the groups whose
/// three users report three distinct best-aligned directions; phase 2
/// minimizes the sum of the surviving users' smallest coordinates. With no
/// survivor the fallback is a uniform random group.
pub fn distributed_gs_minua(
    coords: &[[AngularCoordinate; 3]],
    _config: &NetworkConfig,
    fallback_seed: u64,
) -> ScheduleDecision {
    let survivors: Vec<usize> = (0..coords.len())
        .filter(|&p| {
            let dirs = [
                coords[p][0].best_direction(),
                coords[p][1].best_direction(),
                coords[p][2].best_direction(),
            ];
            dirs[0] != dirs[1] && dirs[0] != dirs[2] && dirs[1] != dirs[2]
        })
        .collect();

    if survivors.is_empty() {
        use rand::Rng;
        let mut rng = crate::channel::stream_rng(fallback_seed, &[0x675f_7462]);
        let p = rng.gen_range(0..coords.len());
        return ScheduleDecision {
            selected: Selection::Group(p),
            scheme: "distributed-gs",
            metric_trace: Vec::new(),
        };
    }

    let mut best: Option<(f64, usize)> = None;
    let mut trace = Vec::new();
    for &p in &survivors {
        let phi_sum: f64 = coords[p].iter().map(|c| c.min_component()).sum();
        trace.push(phi_sum);
        if best.map_or(true, |(b, _)| phi_sum < b) {
            best = Some((phi_sum, p));
        }
    }
    ScheduleDecision {
        selected: Selection::Group(best.unwrap().1),
        scheme: "distributed-gs",
        metric_trace: trace,
    }
}

/// Per-cluster argmax of the minimum equivalent channel gain; ties resolve
/// to the lower index.
pub fn distributed_cs_erua(
    min_ecgs: &[Vec<f64>; 3],
    _config: &NetworkConfig,
) -> ScheduleDecision {
    let mut selected = [0usize; 3];
    let mut trace = Vec::new();
    for (k, cluster) in min_ecgs.iter().enumerate() {
        let mut best = 0usize;
        for (j, &a2) in cluster.iter().enumerate() {
            trace.push(a2);
            if a2 > cluster[best] {
                best = j;
            }
        }
        selected[k] = best;
    }
    ScheduleDecision {
        selected: Selection::Users(selected),
        scheme: "distributed-cs",
        metric_trace: trace,
    }
}

/// Argmax over groups of the synthesized group metric.
pub fn distributed_gs_erua(
    group_ecgs: &[[f64; 3]],
    config: &NetworkConfig,
) -> Result<ScheduleDecision> {
    let mut best: Option<(f64, usize)> = None;
    let mut trace = Vec::new();
    for (p, triple) in group_ecgs.iter().enumerate() {
        let gamma = group_metric(*triple, config)?;
        trace.push(gamma);
        if best.map_or(true, |(b, _)| gamma > b) {
            best = Some((gamma, p));
        }
    }
    let (_, p) = best.ok_or_else(|| Error::Domain("no candidate groups".into()))?;
    Ok(ScheduleDecision {
        selected: Selection::Group(p),
        scheme: "distributed-gs",
        metric_trace: trace,
    })
}

/// Scheduling pattern for the random reference scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulingPattern {
    ClusterWise,
    GroupWise,
}

/// Uniform random selection, deterministic per seed; the reference scheme
/// with multi-user diversity order 1.
pub fn random_selection(
    config: &NetworkConfig,
    seed: u64,
    pattern: SchedulingPattern,
) -> ScheduleDecision {
    use rand::Rng;
    let mut rng = crate::channel::stream_rng(seed, &[0x7261_6e64]);
    match pattern {
        SchedulingPattern::ClusterWise => {
            let mut selected = [0usize; 3];
            for (k, s) in selected.iter_mut().enumerate() {
                *s = rng.gen_range(0..config.cluster_sizes[k]);
            }
            ScheduleDecision {
                selected: Selection::Users(selected),
                scheme: "random-cs",
                metric_trace: Vec::new(),
            }
        }
        SchedulingPattern::GroupWise => ScheduleDecision {
            selected: Selection::Group(rng.gen_range(0..config.group_count)),
            scheme: "random-gs",
            metric_trace: Vec::new(),
        },
    }
}

/// All candidate coordinates of a channel set (Min-UA schedulers' input).
pub fn all_coordinates(
    channels: &ChannelSet,
    rss: &RssBasis,
    config: &NetworkConfig,
) -> Result<[Vec<AngularCoordinate>; 3]> {
    let mut out: [Vec<AngularCoordinate>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for (k, bucket) in out.iter_mut().enumerate() {
        for j in 0..config.cluster_sizes[k] {
            bucket.push(angular_coordinate(channels.matrix(k, j), rss, config.n)?);
        }
    }
    Ok(out)
}

/// All candidate min-ECGs of a channel set (ER-UA distributed CS input).
pub fn all_min_ecgs(
    channels: &ChannelSet,
    rss: &RssBasis,
    config: &NetworkConfig,
) -> Result<[Vec<f64>; 3]> {
    let mut out: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for (k, bucket) in out.iter_mut().enumerate() {
        for j in 0..config.cluster_sizes[k] {
            let table = EcgTable::new(channels.matrix(k, j), rss)?;
            bucket.push(table.min_ecg(k));
        }
    }
    Ok(out)
}
