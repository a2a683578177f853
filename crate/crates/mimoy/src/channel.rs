//! Network configuration, fading realizations and the reference signal
//! space.
//!
//! The seeding scheme is counter-based: a 64-bit master seed is mixed with
//! (trial index, cluster index, user index) so that trial `t` produces the
//! same channels regardless of execution order or worker count.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::mathkit::{haar_unitary, standard_cn, ComplexMatrix, ComplexVector};
use crate::{Error, Result};

/// Which transmission chain the antenna configuration supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransmissionMode {
    /// Minimum user antennas, `N_T = 2N`: joint pairwise beamforming and a
    /// variable-gain zero-forcing relay.
    MinUa,
    /// Equal relay/user antennas, `N_T = 3N`: local beamforming against the
    /// reference signal space and a fixed-gain relay.
    ErUa,
}

impl TransmissionMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            TransmissionMode::MinUa => "min-ua",
            TransmissionMode::ErUa => "er-ua",
        }
    }
}

impl std::str::FromStr for TransmissionMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min-ua" => Ok(TransmissionMode::MinUa),
            "er-ua" => Ok(TransmissionMode::ErUa),
            other => Err(Error::Parse(format!(
                "unknown mode {other:?} (expected \"min-ua\" or \"er-ua\")"
            ))),
        }
    }
}

/// How the reference signal space is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RssMode {
    /// Canonical basis `E = I`. Default: the analysis is invariant to the
    /// choice of orthonormal basis, and the identity is cheapest.
    Identity,
    /// Haar-distributed random unitary, used to test that invariance.
    Haar,
}

/// Static description of the network: stream count, antenna counts, cluster
/// sizes, powers and noise variances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Data streams per unicast.
    pub n: usize,
    /// Antennas per user.
    pub n_t: usize,
    /// Antennas at the relay (`3N`).
    pub n_r: usize,
    /// Candidate users per cluster `(M1, M2, M3)`.
    pub cluster_sizes: [usize; 3],
    /// Candidate groups for group-wise scheduling.
    pub group_count: usize,
    /// Per-user transmit power (linear).
    pub p_t: f64,
    /// Relay transmit power (linear).
    pub p_r: f64,
    /// Relay noise variance (linear).
    pub sigma_r2: f64,
    /// User noise variance (linear).
    pub sigma_s2: f64,
    pub mode: TransmissionMode,
}

impl NetworkConfig {
    /// Min-UA configuration (`N_T = 2N`, `N_R = 3N`) with unit powers.
    pub fn min_ua(n: usize, cluster_sizes: [usize; 3]) -> Self {
        NetworkConfig {
            n,
            n_t: 2 * n,
            n_r: 3 * n,
            cluster_sizes,
            group_count: cluster_sizes[0],
            p_t: 1.0,
            p_r: 1.0,
            sigma_r2: 1.0,
            sigma_s2: 1.0,
            mode: TransmissionMode::MinUa,
        }
    }

    /// ER-UA configuration (`N_T = N_R = 3N`) with unit powers.
    pub fn er_ua(n: usize, cluster_sizes: [usize; 3]) -> Self {
        NetworkConfig {
            n,
            n_t: 3 * n,
            n_r: 3 * n,
            cluster_sizes,
            group_count: cluster_sizes[0],
            p_t: 1.0,
            p_r: 1.0,
            sigma_r2: 1.0,
            sigma_s2: 1.0,
            mode: TransmissionMode::ErUa,
        }
    }

    /// Group-wise variant: `M` predefined groups, group `p` consisting of
    /// user `p` from each cluster.
    pub fn with_groups(mut self, m: usize) -> Self {
        self.cluster_sizes = [m, m, m];
        self.group_count = m;
        self
    }

    /// Symmetric SNR protocol: `P_T/sigma_R^2 = P_R/sigma_S^2 = SNR` with
    /// unit noise variances.
    pub fn at_snr_db(mut self, snr_db: f64) -> Self {
        let snr = 10f64.powf(snr_db / 10.0);
        self.p_t = snr;
        self.p_r = snr;
        self.sigma_r2 = 1.0;
        self.sigma_s2 = 1.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::ConfigInvariant(msg));
        if self.n < 1 {
            return fail("N must be >= 1".into());
        }
        if self.n_r != 3 * self.n {
            return fail(format!("N_R must equal 3N (got N_R={}, N={})", self.n_r, self.n));
        }
        match self.mode {
            TransmissionMode::MinUa if self.n_t != 2 * self.n => {
                return fail(format!("Min-UA requires N_T = 2N (got N_T={}, N={})", self.n_t, self.n));
            }
            TransmissionMode::ErUa if self.n_t != 3 * self.n => {
                return fail(format!("ER-UA requires N_T = 3N (got N_T={}, N={})", self.n_t, self.n));
            }
            _ => {}
        }
        if self.cluster_sizes.iter().any(|&m| m < 1) {
            return fail(format!("cluster sizes must be >= 1 (got {:?})", self.cluster_sizes));
        }
        if self.group_count < 1 {
            return fail("group count must be >= 1".into());
        }
        for (name, v) in [
            ("P_T", self.p_t),
            ("P_R", self.p_r),
            ("sigma_R2", self.sigma_r2),
            ("sigma_S2", self.sigma_s2),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return fail(format!("{name} must be positive and finite (got {v})"));
            }
        }
        Ok(())
    }

    /// First-hop SNR `P_T / sigma_R^2`.
    pub fn snr_t(&self) -> f64 {
        self.p_t / self.sigma_r2
    }

    /// Second-hop SNR `P_R / sigma_S^2`.
    pub fn snr_r(&self) -> f64 {
        self.p_r / self.sigma_s2
    }

    /// Loads a flat `key = value` file. Keys follow the field names:
    /// `N, N_T, N_R, M1, M2, M3, M, P_T, P_R, sigma_R2, sigma_S2, mode`;
    /// mode values are `min-ua` / `er-ua`; `#` starts a comment.
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_config_str(&text)
    }

    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut n_t: Option<usize> = None;
        let mut n_r: Option<usize> = None;
        let mut m = [None::<usize>; 3];
        let mut group: Option<usize> = None;
        let mut p_t = 1.0;
        let mut p_r = 1.0;
        let mut sigma_r2 = 1.0;
        let mut sigma_s2 = 1.0;
        let mut mode: Option<TransmissionMode> = None;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected `key = value`, got {raw:?}", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let uint = |v: &str| -> Result<usize> {
                v.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("line {}: invalid integer {v:?}", lineno + 1)))
            };
            let real = |v: &str| -> Result<f64> {
                v.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: invalid number {v:?}", lineno + 1)))
            };
            match key {
                "N" => n = Some(uint(value)?),
                "N_T" => n_t = Some(uint(value)?),
                "N_R" => n_r = Some(uint(value)?),
                "M1" => m[0] = Some(uint(value)?),
                "M2" => m[1] = Some(uint(value)?),
                "M3" => m[2] = Some(uint(value)?),
                "M" => group = Some(uint(value)?),
                "P_T" => p_t = real(value)?,
                "P_R" => p_r = real(value)?,
                "sigma_R2" => sigma_r2 = real(value)?,
                "sigma_S2" => sigma_s2 = real(value)?,
                "mode" => mode = Some(value.parse()?),
                other => {
                    return Err(Error::Parse(format!("line {}: unknown key {other:?}", lineno + 1)))
                }
            }
        }

        let mode = mode.ok_or_else(|| Error::Parse("missing `mode`".into()))?;
        let n = n.ok_or_else(|| Error::Parse("missing `N`".into()))?;
        let group_or_m1 = group.or(m[0]);
        let cluster_sizes = match (m[0], m[1], m[2], group) {
            (Some(a), Some(b), Some(c), _) => [a, b, c],
            (_, None, None, Some(g)) => [g, g, g],
            (None, None, None, None) => {
                return Err(Error::Parse("missing cluster sizes (M1/M2/M3 or M)".into()))
            }
            _ => return Err(Error::Parse("give all of M1, M2, M3 or just M".into())),
        };
        let cfg = NetworkConfig {
            n,
            n_t: n_t.unwrap_or(match mode {
                TransmissionMode::MinUa => 2 * n,
                TransmissionMode::ErUa => 3 * n,
            }),
            n_r: n_r.unwrap_or(3 * n),
            cluster_sizes,
            group_count: group.or(group_or_m1).unwrap_or(1),
            p_t,
            p_r,
            sigma_r2,
            sigma_s2,
            mode,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Total candidate count across the three clusters.
    pub fn total_users(&self) -> usize {
        self.cluster_sizes.iter().sum()
    }
}

/// SplitMix64 finalizer; decorrelates successive counters.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based stream derivation: deterministic in the tuple, independent
/// of evaluation order.
pub fn mix_seed(master: u64, tags: &[u64]) -> u64 {
    let mut acc = splitmix(master);
    for &t in tags {
        acc = splitmix(acc ^ t.wrapping_mul(0xd134_2543_de82_ef95));
    }
    acc
}

/// RNG for one logical substream.
pub fn stream_rng(master: u64, tags: &[u64]) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(mix_seed(master, tags))
}

/// One fading realization: a channel matrix per candidate user, indexed by
/// (cluster, intra-cluster index).
#[derive(Debug, Clone)]
pub struct ChannelSet {
    matrices: Vec<Vec<ComplexMatrix>>,
    pub seed: u64,
}

impl ChannelSet {
    pub fn matrix(&self, cluster: usize, user: usize) -> &ComplexMatrix {
        &self.matrices[cluster][user]
    }

    pub fn cluster_size(&self, cluster: usize) -> usize {
        self.matrices[cluster].len()
    }

    /// Channels of a selected user triple, one per cluster.
    pub fn triple(&self, selected: [usize; 3]) -> [&ComplexMatrix; 3] {
        [
            self.matrix(0, selected[0]),
            self.matrix(1, selected[1]),
            self.matrix(2, selected[2]),
        ]
    }
}

/// Draws one i.i.d. CN(0,1) channel matrix per candidate. Candidate
/// (cluster k, user j) owns the substream mixed from
/// `(seed, k, j)`, so subsets of users can be regenerated independently.
pub fn sample_channels(config: &NetworkConfig, seed: u64) -> ChannelSet {
    let matrices = (0..3)
        .map(|k| {
            (0..config.cluster_sizes[k])
                .map(|j| {
                    let mut rng = stream_rng(seed, &[k as u64, j as u64]);
                    DMatrix::from_fn(config.n_r, config.n_t, |_, _| standard_cn(&mut rng))
                })
                .collect()
        })
        .collect();
    ChannelSet { matrices, seed }
}

/// The reference signal space: an orthonormal basis `E` of `C^{N_R}`
/// partitioned into three `N`-column blocks, one per pairing direction.
#[derive(Debug, Clone)]
pub struct RssBasis {
    e: ComplexMatrix,
    n: usize,
}

/// Pairing map between cluster pairs and reference directions:
/// pi(1,2)=I, pi(1,3)=II, pi(2,3)=III (zero-based here).
pub fn pairing_direction(k: usize, l: usize) -> usize {
    debug_assert!(k != l && k < 3 && l < 3);
    match (k.min(l), k.max(l)) {
        (0, 1) => 0,
        (0, 2) => 1,
        (1, 2) => 2,
        _ => unreachable!(),
    }
}

/// The two reference directions a cluster participates in.
pub fn relevant_directions(cluster: usize) -> [usize; 2] {
    match cluster {
        0 => [0, 1],
        1 => [0, 2],
        2 => [1, 2],
        _ => panic!("cluster index out of range"),
    }
}

impl RssBasis {
    pub fn ambient_dim(&self) -> usize {
        self.e.nrows()
    }

    pub fn streams(&self) -> usize {
        self.n
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.e
    }

    /// `N_R x N` block for direction `m` (0 = I, 1 = II, 2 = III).
    pub fn block(&self, m: usize) -> ComplexMatrix {
        self.e.columns(m * self.n, self.n).into_owned()
    }

    /// Reference direction `e_m^{[n]}`.
    pub fn direction(&self, m: usize, n: usize) -> ComplexVector {
        self.e.column(m * self.n + n).into_owned()
    }
}

/// Builds the RSS. `Identity` returns the canonical basis; `Haar` draws a
/// seeded Haar unitary.
pub fn make_rss(config: &NetworkConfig, mode: RssMode, seed: u64) -> RssBasis {
    let e = match mode {
        RssMode::Identity => ComplexMatrix::identity(config.n_r, config.n_r),
        RssMode::Haar => haar_unitary(config.n_r, seed),
    };
    RssBasis { e, n: config.n }
}
