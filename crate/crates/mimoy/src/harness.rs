//! Monte Carlo engine: drives trials, estimates outage with Wilson
//! confidence intervals, sweeps SNR grids and aggregates protocol ledgers.
//!
//! Determinism contract: every result is a pure function of the experiment
//! spec and master seed. Trials derive their substreams from
//! `(master seed, point index, trial index)` through the counter-based
//! mixer, and aggregation is an associative-commutative reduction, so any
//! worker count produces bit-identical counts.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{
    make_rss, mix_seed, sample_channels, ChannelSet, NetworkConfig, RssBasis, RssMode,
    TransmissionMode,
};
use crate::erua::EcgTable;
use crate::mathkit::min_eigenvalue_hermitian;
use crate::scheduling::{self, SchedulingPattern, Selection};
use crate::{Error, Result};

/// The schemes the harness can drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    CentralizedCs,
    DistributedCs,
    CentralizedGs,
    DistributedGs,
    RandomCs,
    RandomGs,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::CentralizedCs,
        Scheme::DistributedCs,
        Scheme::CentralizedGs,
        Scheme::DistributedGs,
        Scheme::RandomCs,
        Scheme::RandomGs,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::CentralizedCs => "centralized-cs",
            Scheme::DistributedCs => "distributed-cs",
            Scheme::CentralizedGs => "centralized-gs",
            Scheme::DistributedGs => "distributed-gs",
            Scheme::RandomCs => "random-cs",
            Scheme::RandomGs => "random-gs",
        }
    }

    pub fn pattern(&self) -> SchedulingPattern {
        match self {
            Scheme::CentralizedCs | Scheme::DistributedCs | Scheme::RandomCs => {
                SchedulingPattern::ClusterWise
            }
            _ => SchedulingPattern::GroupWise,
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .iter()
            .find(|sc| sc.as_str() == s)
            .copied()
            .ok_or_else(|| {
                let names: Vec<&str> = Scheme::ALL.iter().map(|s| s.as_str()).collect();
                Error::Parse(format!(
                    "unknown scheme {s:?}; valid schemes: {}",
                    names.join(", ")
                ))
            })
    }
}

/// A full experiment description: config, threshold, grid, trial budget.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub config: NetworkConfig,
    pub rho_th: f64,
    pub snr_grid_db: Vec<f64>,
    /// Trials per grid point.
    pub trials: u64,
    pub master_seed: u64,
    pub rss_mode: RssMode,
    /// Worker threads; 0 uses all available cores.
    pub workers: usize,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.snr_grid_db.is_empty() {
            return Err(Error::Domain("experiment grid must be nonempty".into()));
        }
        if self.trials < 1 {
            return Err(Error::ConfigInvariant("trials must be >= 1".into()));
        }
        Ok(())
    }
}

/// One estimated point of an outage curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurvePoint {
    pub snr_db: f64,
    pub trials: u64,
    pub outages: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// A per-scheme outage curve plus the spec snapshot that produced it.
#[derive(Debug, Clone)]
pub struct OutageCurve {
    pub scheme: String,
    pub mode: TransmissionMode,
    pub config: NetworkConfig,
    pub rho_th: f64,
    pub seed: u64,
    pub points: Vec<CurvePoint>,
    /// Order-independent accumulator over all trials; equal specs must
    /// reproduce it exactly regardless of worker count.
    pub checksum: u64,
}

/// 95% Wilson score interval; behaves correctly at zero counts.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

/// Per-trial channel-dependent state, computed once and shared by every
/// scheme evaluated on the trial (common random numbers).
struct TrialState<'a> {
    channels: ChannelSet,
    config: &'a NetworkConfig,
    rss: &'a RssBasis,
    trial_seed: u64,
    ecg_tables: Option<Vec<Vec<EcgTable>>>,
    coords: Option<[Vec<scheduling::AngularCoordinate>; 3]>,
    minua_cache: HashMap<[usize; 3], f64>,
}

impl<'a> TrialState<'a> {
    fn new(config: &'a NetworkConfig, rss: &'a RssBasis, trial_seed: u64) -> Result<Self> {
        let channels = sample_channels(config, trial_seed);
        let mut state = TrialState {
            channels,
            config,
            rss,
            trial_seed,
            ecg_tables: None,
            coords: None,
            minua_cache: HashMap::new(),
        };
        match config.mode {
            TransmissionMode::ErUa => {
                let mut tables = Vec::with_capacity(3);
                for k in 0..3 {
                    let mut cluster = Vec::with_capacity(config.cluster_sizes[k]);
                    for j in 0..config.cluster_sizes[k] {
                        cluster.push(EcgTable::new(state.channels.matrix(k, j), rss)?);
                    }
                    tables.push(cluster);
                }
                state.ecg_tables = Some(tables);
            }
            TransmissionMode::MinUa => {
                state.coords = Some(scheduling::all_coordinates(&state.channels, rss, config)?);
            }
        }
        Ok(state)
    }

    fn min_ecgs(&self) -> [Vec<f64>; 3] {
        let tables = self.ecg_tables.as_ref().expect("ER-UA state");
        let mut out: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for (k, bucket) in out.iter_mut().enumerate() {
            for t in &tables[k] {
                bucket.push(t.min_ecg(k));
            }
        }
        out
    }

    fn decide(&mut self, scheme: Scheme) -> Result<Selection> {
        let cfg = self.config;
        let selection = match (scheme, cfg.mode) {
            (Scheme::CentralizedCs, _) => {
                scheduling::centralized_cs(&self.channels, self.rss, cfg)?.selected
            }
            (Scheme::CentralizedGs, _) => {
                scheduling::centralized_gs(&self.channels, self.rss, cfg)?.selected
            }
            (Scheme::RandomCs, _) => {
                scheduling::random_selection(cfg, self.trial_seed, SchedulingPattern::ClusterWise)
                    .selected
            }
            (Scheme::RandomGs, _) => {
                scheduling::random_selection(cfg, self.trial_seed, SchedulingPattern::GroupWise)
                    .selected
            }
            (Scheme::DistributedCs, TransmissionMode::ErUa) => {
                scheduling::distributed_cs_erua(&self.min_ecgs(), cfg).selected
            }
            (Scheme::DistributedCs, TransmissionMode::MinUa) => {
                scheduling::distributed_cs_minua(self.coords.as_ref().unwrap(), cfg).selected
            }
            (Scheme::DistributedGs, TransmissionMode::ErUa) => {
                let tables = self.ecg_tables.as_ref().unwrap();
                let groups: Vec<[f64; 3]> = (0..cfg.group_count)
                    .map(|p| {
                        [
                            tables[0][p].min_ecg(0),
                            tables[1][p].min_ecg(1),
                            tables[2][p].min_ecg(2),
                        ]
                    })
                    .collect();
                scheduling::distributed_gs_erua(&groups, cfg)?.selected
            }
            (Scheme::DistributedGs, TransmissionMode::MinUa) => {
                let coords = self.coords.as_ref().unwrap();
                let groups: Vec<[scheduling::AngularCoordinate; 3]> = (0..cfg.group_count)
                    .map(|p| [coords[0][p], coords[1][p], coords[2][p]])
                    .collect();
                scheduling::distributed_gs_minua(&groups, cfg, self.trial_seed).selected
            }
        };
        Ok(selection)
    }

    fn min_snr(&mut self, triple: [usize; 3]) -> Result<f64> {
        match self.config.mode {
            TransmissionMode::ErUa => {
                let tables = self.ecg_tables.as_ref().unwrap();
                crate::erua::min_snr_from_tables(
                    [
                        &tables[0][triple[0]],
                        &tables[1][triple[1]],
                        &tables[2][triple[2]],
                    ],
                    self.config,
                )
            }
            TransmissionMode::MinUa => {
                if let Some(&v) = self.minua_cache.get(&triple) {
                    return Ok(v);
                }
                let v =
                    crate::minua::minua_min_snr(self.channels.triple(triple), self.config)?;
                self.minua_cache.insert(triple, v);
                Ok(v)
            }
        }
    }
}

/// Scheduling decision of one scheme on one realized channel set.
pub fn decide(
    scheme: Scheme,
    channels: &ChannelSet,
    rss: &RssBasis,
    config: &NetworkConfig,
    trial_seed: u64,
) -> Result<Selection> {
    let mut state = TrialState {
        channels: channels.clone(),
        config,
        rss,
        trial_seed,
        ecg_tables: None,
        coords: None,
        minua_cache: HashMap::new(),
    };
    match config.mode {
        TransmissionMode::ErUa => {
            let mut tables = Vec::with_capacity(3);
            for k in 0..3 {
                let mut cluster = Vec::with_capacity(config.cluster_sizes[k]);
                for j in 0..config.cluster_sizes[k] {
                    cluster.push(EcgTable::new(channels.matrix(k, j), rss)?);
                }
                tables.push(cluster);
            }
            state.ecg_tables = Some(tables);
        }
        TransmissionMode::MinUa => {
            state.coords = Some(scheduling::all_coordinates(channels, rss, config)?);
        }
    }
    state.decide(scheme)
}

fn run_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        job()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool")
            .install(job)
    }
}

/// Per-trial contribution, merged associatively.
#[derive(Clone)]
struct PointAccumulator {
    outages: Vec<u64>,
    trials: u64,
    checksum: u64,
}

impl PointAccumulator {
    fn empty(schemes: usize) -> Self {
        PointAccumulator {
            outages: vec![0; schemes],
            trials: 0,
            checksum: 0,
        }
    }

    fn merge(mut self, other: PointAccumulator) -> PointAccumulator {
        for (a, b) in self.outages.iter_mut().zip(&other.outages) {
            *a += b;
        }
        self.trials += other.trials;
        self.checksum = self.checksum.wrapping_add(other.checksum);
        self
    }
}

/// Estimates all requested schemes at every grid point with shared per-trial
/// channel realizations (common random numbers), so per-realization ordering
/// claims carry over to the paired counts.
pub fn run_comparison(spec: &ExperimentSpec, schemes: &[Scheme]) -> Result<Vec<OutageCurve>> {
    spec.validate()?;
    let mut curves: Vec<OutageCurve> = schemes
        .iter()
        .map(|s| OutageCurve {
            scheme: s.as_str().to_string(),
            mode: spec.config.mode,
            config: spec.config.clone(),
            rho_th: spec.rho_th,
            seed: spec.master_seed,
            points: Vec::new(),
            checksum: 0,
        })
        .collect();

    for (point_idx, &snr_db) in spec.snr_grid_db.iter().enumerate() {
        let config = spec.config.clone().at_snr_db(snr_db);
        config.validate()?;
        let rss = make_rss(&config, spec.rss_mode, mix_seed(spec.master_seed, &[0x7253]));
        let point_seed = mix_seed(spec.master_seed, &[point_idx as u64]);
        let rho_th = spec.rho_th;

        let acc = run_pool(spec.workers, || {
            (0..spec.trials)
                .into_par_iter()
                .map(|trial| {
                    let trial_seed = mix_seed(point_seed, &[trial]);
                    let mut state =
                        TrialState::new(&config, &rss, trial_seed).expect("trial state");
                    let mut acc = PointAccumulator::empty(schemes.len());
                    acc.trials = 1;
                    let mut outage_bits = 0u64;
                    for (i, &scheme) in schemes.iter().enumerate() {
                        let triple = state.decide(scheme).expect("decision").user_triple();
                        let rho = state.min_snr(triple).expect("min-SNR");
                        if rho <= rho_th {
                            acc.outages[i] = 1;
                            outage_bits |= 1 << i;
                        }
                    }
                    acc.checksum = mix_seed(trial_seed, &[outage_bits]);
                    acc
                })
                .reduce(
                    || PointAccumulator::empty(schemes.len()),
                    PointAccumulator::merge,
                )
        });

        debug_assert_eq!(acc.trials, spec.trials);
        for (i, curve) in curves.iter_mut().enumerate() {
            let outages = acc.outages[i];
            let (lo, hi) = wilson_interval(outages, spec.trials);
            curve.points.push(CurvePoint {
                snr_db,
                trials: spec.trials,
                outages,
                p_hat: outages as f64 / spec.trials as f64,
                ci_low: lo,
                ci_high: hi,
            });
            curve.checksum = curve.checksum.wrapping_add(acc.checksum);
        }
    }
    Ok(curves)
}

/// Single-scheme sweep.
pub fn run_sweep(spec: &ExperimentSpec, scheme: Scheme) -> Result<OutageCurve> {
    Ok(run_comparison(spec, &[scheme])?.remove(0))
}

/// Single-point estimate.
pub fn estimate_outage(spec: &ExperimentSpec, snr_db: f64, scheme: Scheme) -> Result<CurvePoint> {
    let mut one = spec.clone();
    one.snr_grid_db = vec![snr_db];
    Ok(run_sweep(&one, scheme)?.points.remove(0))
}

/// Paired counts of the analytic-bound targets and both CS (or GS) schemes
/// on shared trials, for sandwich validation of ER-UA at `N = 1`:
/// per realization the chain
/// `rho_lb <= rho(distributed) <= rho(centralized) <= rho_ub` holds, so the
/// outage counts are ordered the other way around.
#[derive(Debug, Clone, Copy)]
pub struct SandwichCounts {
    pub trials: u64,
    /// Outages of the upper-bound target `rho_ub` (analytic LB estimand).
    pub lb_target: u64,
    pub centralized: u64,
    pub distributed: u64,
    /// Outages of the lower-bound target `rho_lb` (analytic UB estimand).
    pub ub_target: u64,
    /// Per-realization ordering violations (must stay zero).
    pub violations: u64,
}

/// Runs the paired sandwich experiment at one SNR point.
pub fn estimate_sandwich_point(
    base: &NetworkConfig,
    pattern: SchedulingPattern,
    rho_th: f64,
    snr_db: f64,
    trials: u64,
    master_seed: u64,
    workers: usize,
) -> Result<SandwichCounts> {
    if base.mode != TransmissionMode::ErUa || base.n != 1 {
        return Err(Error::ConfigInvariant(
            "sandwich validation is defined for ER-UA with N = 1".into(),
        ));
    }
    let config = base.clone().at_snr_db(snr_db);
    config.validate()?;
    let rss = make_rss(&config, RssMode::Identity, 0);
    let snr = config.snr_t();

    let counts = run_pool(workers, || {
        (0..trials)
            .into_par_iter()
            .map(|trial| {
                let trial_seed = mix_seed(master_seed, &[snr_db.to_bits(), trial]);
                let mut state = TrialState::new(&config, &rss, trial_seed).expect("trial state");

                // per-user minimum eigenvalues for the lower-bound target
                let mut best_lambda = [f64::NEG_INFINITY; 3];
                for k in 0..3 {
                    for j in 0..config.cluster_sizes[k] {
                        let h = state.channels.matrix(k, j);
                        let lam = min_eigenvalue_hermitian(&(h * h.adjoint()))
                            .expect("Wishart matrix");
                        if lam > best_lambda[k] {
                            best_lambda[k] = lam;
                        }
                    }
                }
                // direction-I ECG maxima of clusters 1 and 2 for the
                // upper-bound target
                let tables = state.ecg_tables.as_ref().unwrap();
                let limit = match pattern {
                    SchedulingPattern::ClusterWise => config.cluster_sizes,
                    SchedulingPattern::GroupWise => [config.group_count; 3],
                };
                let mut a2_dir1 = [f64::NEG_INFINITY; 2];
                for (k, a2) in a2_dir1.iter_mut().enumerate() {
                    for j in 0..limit[k] {
                        *a2 = a2.max(tables[k][j].alpha2(0, 0));
                    }
                }
                let rho_ub = crate::erua::rho_upper_bound(a2_dir1[0], a2_dir1[1], snr);

                let rho_lb = match pattern {
                    SchedulingPattern::ClusterWise => {
                        crate::erua::rho_lower_bound(best_lambda, snr)
                    }
                    SchedulingPattern::GroupWise => {
                        // best group under the eigenvalue metric
                        let mut best = f64::NEG_INFINITY;
                        for p in 0..config.group_count {
                            let lams = [0, 1, 2].map(|k| {
                                let h = state.channels.matrix(k, p);
                                min_eigenvalue_hermitian(&(h * h.adjoint())).expect("Wishart")
                            });
                            best = best.max(crate::erua::rho_lower_bound(lams, snr));
                        }
                        best
                    }
                };

                let (cent_scheme, dist_scheme) = match pattern {
                    SchedulingPattern::ClusterWise => {
                        (Scheme::CentralizedCs, Scheme::DistributedCs)
                    }
                    SchedulingPattern::GroupWise => (Scheme::CentralizedGs, Scheme::DistributedGs),
                };
                let cent_triple = state.decide(cent_scheme).unwrap().user_triple();
                let rho_cent = state.min_snr(cent_triple).unwrap();
                let dist_triple = state.decide(dist_scheme).unwrap().user_triple();
                let rho_dist = state.min_snr(dist_triple).unwrap();

                let tol = 1e-9 * (1.0 + rho_ub.abs());
                let violated = rho_lb > rho_dist + tol
                    || rho_dist > rho_cent + tol
                    || rho_cent > rho_ub + tol;

                SandwichCounts {
                    trials: 1,
                    lb_target: (rho_ub <= rho_th) as u64,
                    centralized: (rho_cent <= rho_th) as u64,
                    distributed: (rho_dist <= rho_th) as u64,
                    ub_target: (rho_lb <= rho_th) as u64,
                    violations: violated as u64,
                }
            })
            .reduce(
                || SandwichCounts {
                    trials: 0,
                    lb_target: 0,
                    centralized: 0,
                    distributed: 0,
                    ub_target: 0,
                    violations: 0,
                },
                |a, b| SandwichCounts {
                    trials: a.trials + b.trials,
                    lb_target: a.lb_target + b.lb_target,
                    centralized: a.centralized + b.centralized,
                    distributed: a.distributed + b.distributed,
                    ub_target: a.ub_target + b.ub_target,
                    violations: a.violations + b.violations,
                },
            )
    });
    Ok(counts)
}

/// Long-term selection frequencies of the distributed cluster-wise scheme,
/// one vector per cluster, each summing to one.
pub fn fairness_audit(spec: &ExperimentSpec, trials: u64) -> Result<[Vec<f64>; 3]> {
    spec.validate()?;
    let config = spec.config.clone();
    let rss = make_rss(&config, spec.rss_mode, mix_seed(spec.master_seed, &[0x7253]));
    let counts = run_pool(spec.workers, || {
        (0..trials)
            .into_par_iter()
            .map(|trial| {
                let trial_seed = mix_seed(spec.master_seed, &[0xfa1e, trial]);
                let mut state = TrialState::new(&config, &rss, trial_seed).expect("trial state");
                let triple = state
                    .decide(Scheme::DistributedCs)
                    .expect("decision")
                    .user_triple();
                let mut tally = [vec![0u64; config.cluster_sizes[0]],
                    vec![0u64; config.cluster_sizes[1]],
                    vec![0u64; config.cluster_sizes[2]]];
                for k in 0..3 {
                    tally[k][triple[k]] = 1;
                }
                tally
            })
            .reduce(
                || {
                    [vec![0u64; config.cluster_sizes[0]],
                        vec![0u64; config.cluster_sizes[1]],
                        vec![0u64; config.cluster_sizes[2]]]
                },
                |mut a, b| {
                    for k in 0..3 {
                        for (x, y) in a[k].iter_mut().zip(&b[k]) {
                            *x += y;
                        }
                    }
                    a
                },
            )
    });
    Ok(counts.map(|c| c.iter().map(|&x| x as f64 / trials as f64).collect()))
}

/// Fixed CSV column set shared by simulated and analytical curves.
pub const CURVE_CSV_HEADER: &str =
    "scheme,mode,n,m1,m2,m3,rho_th,snr_db,trials,outages,p_hat,ci_low,ci_high,seed";

/// One CSV row per curve point, exact column set [`CURVE_CSV_HEADER`].
pub fn write_curves_csv(path: &std::path::Path, curves: &[OutageCurve]) -> Result<()> {
    let mut out = std::fs::File::create(path)?;
    writeln!(out, "{CURVE_CSV_HEADER}")?;
    for curve in curves {
        for p in &curve.points {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                curve.scheme,
                curve.mode.as_str(),
                curve.config.n,
                curve.config.cluster_sizes[0],
                curve.config.cluster_sizes[1],
                curve.config.cluster_sizes[2],
                curve.rho_th,
                p.snr_db,
                p.trials,
                p.outages,
                p.p_hat,
                p.ci_low,
                p.ci_high,
                curve.seed,
            )?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CurveRow<'a> {
    scheme: &'a str,
    mode: &'a str,
    n: usize,
    m1: usize,
    m2: usize,
    m3: usize,
    rho_th: f64,
    snr_db: f64,
    trials: u64,
    outages: u64,
    p_hat: f64,
    ci_low: f64,
    ci_high: f64,
    seed: u64,
}

/// JSON mirror of the CSV rows, same keys.
pub fn write_curves_json(path: &std::path::Path, curves: &[OutageCurve]) -> Result<()> {
    let mut rows = Vec::new();
    for curve in curves {
        for p in &curve.points {
            rows.push(CurveRow {
                scheme: &curve.scheme,
                mode: curve.mode.as_str(),
                n: curve.config.n,
                m1: curve.config.cluster_sizes[0],
                m2: curve.config.cluster_sizes[1],
                m3: curve.config.cluster_sizes[2],
                rho_th: curve.rho_th,
                snr_db: p.snr_db,
                trials: p.trials,
                outages: p.outages,
                p_hat: p.p_hat,
                ci_low: p.ci_low,
                ci_high: p.ci_high,
                seed: curve.seed,
            });
        }
    }
    let file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(file, &rows).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

/// An analytical curve rendered into the shared CSV schema: `trials`,
/// `outages` are zero and the interval collapses onto the value.
pub fn analytic_curve(
    tag: &str,
    config: &NetworkConfig,
    rho_th: f64,
    points: &[(f64, f64)],
) -> OutageCurve {
    OutageCurve {
        scheme: tag.to_string(),
        mode: config.mode,
        config: config.clone(),
        rho_th,
        seed: 0,
        points: points
            .iter()
            .map(|&(snr_db, p)| CurvePoint {
                snr_db,
                trials: 0,
                outages: 0,
                p_hat: p,
                ci_low: p,
                ci_high: p,
            })
            .collect(),
        checksum: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> ExperimentSpec {
        ExperimentSpec {
            config: NetworkConfig::er_ua(1, [2, 2, 2]),
            rho_th: 1.0,
            snr_grid_db: vec![10.0],
            trials: 2000,
            master_seed: 42,
            rss_mode: RssMode::Identity,
            workers: 0,
        }
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("distributed-cs".parse::<Scheme>().unwrap(), Scheme::DistributedCs);
        assert!("bogus".parse::<Scheme>().is_err());
    }

    #[test]
    fn wilson_interval_properties() {
        let (lo, hi) = wilson_interval(0, 1000);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.01);
        let (lo2, hi2) = wilson_interval(300, 1000);
        assert!(lo2 < 0.3 && 0.3 < hi2);
        assert!(hi2 - lo2 < 0.06);
    }

    #[test]
    fn worker_count_invariance() {
        let mut spec = small_spec();
        spec.trials = 500;
        spec.workers = 1;
        let one = run_comparison(&spec, &[Scheme::DistributedCs, Scheme::RandomCs]).unwrap();
        spec.workers = 8;
        let eight = run_comparison(&spec, &[Scheme::DistributedCs, Scheme::RandomCs]).unwrap();
        for (a, b) in one.iter().zip(&eight) {
            assert_eq!(a.points[0].outages, b.points[0].outages);
            assert_eq!(a.checksum, b.checksum);
        }
    }

    #[test]
    fn bernoulli_oracle_calibration() {
        // random-gs over M equal groups is a synthetic Bernoulli source
        // whose outage rate matches the single-group outage probability;
        // CI must cover the point estimate of a big independent run
        let mut spec = small_spec();
        spec.trials = 4000;
        let a = run_sweep(&spec, Scheme::RandomGs).unwrap();
        spec.master_seed = 991;
        spec.trials = 20_000;
        let b = run_sweep(&spec, Scheme::RandomGs).unwrap();
        let pa = a.points[0];
        let pb = b.points[0];
        assert!(pa.ci_low <= pb.p_hat + 0.02 && pb.p_hat - 0.02 <= pa.ci_high);
    }

    #[test]
    fn paired_ordering_centralized_beats_distributed() {
        let spec = small_spec();
        let curves =
            run_comparison(&spec, &[Scheme::CentralizedCs, Scheme::DistributedCs]).unwrap();
        // with common random numbers the counts are ordered pointwise
        assert!(curves[0].points[0].outages <= curves[1].points[0].outages);
    }

    #[test]
    fn sandwich_point_has_no_violations() {
        let counts = estimate_sandwich_point(
            &NetworkConfig::er_ua(1, [2, 3, 4]),
            SchedulingPattern::ClusterWise,
            1.0,
            10.0,
            3000,
            5,
            0,
        )
        .unwrap();
        assert_eq!(counts.violations, 0);
        assert!(counts.lb_target <= counts.centralized);
        assert!(counts.centralized <= counts.distributed);
        assert!(counts.distributed <= counts.ub_target);
    }

    #[test]
    fn fairness_frequencies_sum_to_one() {
        let spec = small_spec();
        let freqs = fairness_audit(&spec, 4000).unwrap();
        for cluster in &freqs {
            let s: f64 = cluster.iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            for &f in cluster {
                assert!((f - 0.5).abs() < 0.05, "frequency {f}");
            }
        }
    }

    #[test]
    fn empty_grid_rejected() {
        let mut spec = small_spec();
        spec.snr_grid_db.clear();
        assert!(run_sweep(&spec, Scheme::RandomCs).is_err());
    }

    #[test]
    fn csv_schema() {
        let spec = small_spec();
        let mut s2 = spec.clone();
        s2.trials = 50;
        let curves = run_comparison(&s2, &[Scheme::DistributedCs]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_curves_csv(&path, &curves).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CURVE_CSV_HEADER);
        let row = lines.next().unwrap();
        assert!(row.starts_with("distributed-cs,er-ua,1,2,2,2,1,10,50,"));

        let jpath = dir.path().join("out.json");
        write_curves_json(&jpath, &curves).unwrap();
        let parsed: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&jpath).unwrap()).unwrap();
        assert_eq!(parsed[0]["scheme"], "distributed-cs");
        assert_eq!(parsed[0]["snr_db"], 10.0);
    }
}
