//! Min-UA transmission chain: joint pairwise signal space alignment,
//! zero-forcing variable-gain relay and per-stream post-processing SNRs.
//!
//! Each user pair jointly solves the null-space problem
//! `[H_l  -H_k] Vt = 0`; the two halves of the stacked solution are the
//! pairwise transmit beamformers and both land in the same `N`-dimensional
//! relay subspace `F_m`. The relay zero-forces the concatenated aligned
//! space `F = [F_I F_II F_III]`.

use crate::channel::{pairing_direction, NetworkConfig};
use crate::mathkit::{self, C64, ComplexMatrix};
use crate::{Error, Result};

/// Condition-number limit above which the aligned space counts as
/// numerically singular in strict mode.
pub const ALIGNMENT_CONDITION_LIMIT: f64 = 1e12;

/// Jointly designed beamformer pair for one unicast pair: the stacked
/// `[v_kl; v_lk]` has unit Frobenius norm, and `H_l v_kl = H_k v_lk = f`.
#[derive(Debug, Clone)]
pub struct SsaPair {
    /// Top half (`2N x N`): beamformer at the pair's higher-indexed user.
    pub v_kl: ComplexMatrix,
    /// Bottom half (`2N x N`): beamformer at the lower-indexed user.
    pub v_lk: ComplexMatrix,
    /// Aligned subspace generator `3N x N`.
    pub f: ComplexMatrix,
}

/// Solves the pairwise alignment problem for channels `h_l, h_k`
/// (both `3N x 2N`). The null-space basis of the stacked `3N x 4N` matrix
/// is normalized to unit total Frobenius norm and split into the two
/// beamformer halves. When the null space is larger than `N`
/// (degenerate channels) the basis vectors with the smallest singular
/// values are taken in ascending order.
pub fn solve_ssa_pair(h_l: &ComplexMatrix, h_k: &ComplexMatrix, n: usize) -> Result<SsaPair> {
    let rows = 3 * n;
    let cols = 2 * n;
    for (h, name) in [(h_l, "h_l"), (h_k, "h_k")] {
        if h.shape() != (rows, cols) {
            return Err(Error::Domain(format!(
                "solve_ssa_pair: {name} must be {rows}x{cols}, got {}x{}",
                h.nrows(),
                h.ncols()
            )));
        }
    }
    let mut stacked = ComplexMatrix::zeros(rows, 2 * cols);
    stacked.view_mut((0, 0), (rows, cols)).copy_from(h_l);
    stacked.view_mut((0, cols), (rows, cols)).copy_from(&(-h_k));
    let basis = mathkit::null_space_basis(&stacked, mathkit::DEFAULT_RANK_TOL)?;
    if basis.dim() < n {
        return Err(Error::DegenerateChannel(format!(
            "pairwise null space has dimension {} < N = {n}",
            basis.dim()
        )));
    }
    let z = basis.as_matrix().columns(0, n).into_owned();
    let scale = C64::new(1.0 / z.norm(), 0.0);
    let z = z * scale;
    let v_kl = z.rows(0, cols).into_owned();
    let v_lk = z.rows(cols, cols).into_owned();
    let f = h_l * &v_kl;
    Ok(SsaPair { v_kl, v_lk, f })
}

/// A fully resolved Min-UA link for one selected user triple.
#[derive(Debug, Clone)]
pub struct MinUaLink {
    /// Aligned signal space `[F_I F_II F_III]` (`3N x 3N`).
    pub f: ComplexMatrix,
    /// Zero-forcing relay core `(F F^H)^{-1}`.
    pub w_tilde: ComplexMatrix,
    /// Variable-gain power coefficient.
    pub g_r: f64,
    /// Condition number of `F` (ratio of extreme singular values).
    pub f_condition: f64,
    /// Unit-scale beamformers `vt[(to, at)]`, `2N x N` each; the effective
    /// transmit beamformer is `sqrt(P_T)` times these.
    beams: Vec<((usize, usize), ComplexMatrix)>,
    n: usize,
}

impl MinUaLink {
    /// Unit-scale beamformer at user `at` for the unicast toward `to`.
    pub fn beamformer(&self, to: usize, at: usize) -> &ComplexMatrix {
        &self
            .beams
            .iter()
            .find(|(key, _)| *key == (to, at))
            .expect("beamformer indices out of range")
            .1
    }

    /// Effective transmit beamformer `V_{to,at} = sqrt(P_T) Vt_{to,at}`.
    pub fn effective_beamformer(&self, to: usize, at: usize, p_t: f64) -> ComplexMatrix {
        self.beamformer(to, at) * C64::new(p_t.sqrt(), 0.0)
    }

    pub fn streams(&self) -> usize {
        self.n
    }
}

/// Builds the link for a selected triple. Ill-conditioned alignment is not
/// an error here: the trial keeps its (near-zero) SNRs so Monte Carlo
/// outage counts stay unbiased. Use [`build_link_strict`] to reject such
/// realizations instead.
pub fn build_link(channels: [&ComplexMatrix; 3], config: &NetworkConfig) -> Result<MinUaLink> {
    let n = config.n;
    let mut beams = Vec::with_capacity(6);
    let mut f = ComplexMatrix::zeros(3 * n, 3 * n);
    for (k, l) in [(0usize, 1usize), (0, 2), (1, 2)] {
        let m = pairing_direction(k, l);
        let pair = solve_ssa_pair(channels[l], channels[k], n)?;
        f.view_mut((0, m * n), (3 * n, n)).copy_from(&pair.f);
        beams.push(((k, l), pair.v_kl)); // at user l, toward k
        beams.push(((l, k), pair.v_lk)); // at user k, toward l
    }
    let svd = mathkit::right_svd(&f);
    let smax = svd.singular_values[0];
    let smin = *svd.singular_values.last().unwrap();
    let f_condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };

    // Beyond the condition limit the inverse is numerical garbage; a zero
    // core drives every stream SNR to zero, which is the outage-correct
    // limit of the ill-conditioned case and keeps Monte Carlo unbiased.
    let w_tilde = if f_condition > ALIGNMENT_CONDITION_LIMIT {
        ComplexMatrix::zeros(3 * n, 3 * n)
    } else {
        let ffh = &f * f.adjoint();
        ffh.clone()
            .try_inverse()
            .unwrap_or_else(|| ComplexMatrix::zeros(3 * n, 3 * n))
    };
    let tr_w = w_tilde.diagonal().iter().map(|z| z.re).sum::<f64>();
    let tr_ww = w_tilde.norm_squared();
    let denom = config.p_t * tr_w + config.sigma_r2 * tr_ww;
    let g_r = if denom > 0.0 && denom.is_finite() {
        (config.p_r / denom).sqrt()
    } else {
        0.0
    };
    Ok(MinUaLink {
        f,
        w_tilde,
        g_r,
        f_condition,
        beams,
        n,
    })
}

/// Strict variant: rejects realizations whose aligned space is numerically
/// singular instead of letting the SNRs collapse to zero.
pub fn build_link_strict(
    channels: [&ComplexMatrix; 3],
    config: &NetworkConfig,
) -> Result<MinUaLink> {
    let link = build_link(channels, config)?;
    if link.f_condition > ALIGNMENT_CONDITION_LIMIT {
        return Err(Error::IllConditionedAlignment {
            cond: link.f_condition,
            limit: ALIGNMENT_CONDITION_LIMIT,
        });
    }
    Ok(link)
}

/// Identifies one directed stream: receiver cluster `k`, sender cluster
/// `l`, stream index `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamId {
    pub receiver: usize,
    pub sender: usize,
    pub stream: usize,
}

/// Post-processing SNR of every directed stream, ordered receiver-major:
/// `(k, l, n)` for `k` in cluster order, `l` in `L_k` ascending, `n` in
/// stream order. `rho = G_R^2 P_T / (G_R^2 sigma_R^2 [F_m^H W W^H F_m]_nn
/// + sigma_S^2 [Vt^H Vt]_nn)` with the unit-scale receive beamformer.
pub fn minua_stream_snrs(link: &MinUaLink, config: &NetworkConfig) -> Vec<(StreamId, f64)> {
    let n = link.n;
    let g2 = link.g_r * link.g_r;
    let mut out = Vec::with_capacity(6 * n);
    for k in 0..3 {
        for l in 0..3 {
            if l == k {
                continue;
            }
            let m = pairing_direction(k, l);
            let fm = link.f.columns(m * n, n);
            let fw = fm.adjoint() * &link.w_tilde;
            let relay_noise = &fw * fw.adjoint();
            let vt = link.beamformer(l, k); // receive combiner at user k
            let local = vt.adjoint() * vt;
            for s in 0..n {
                let denom =
                    g2 * config.sigma_r2 * relay_noise[(s, s)].re + config.sigma_s2 * local[(s, s)].re;
                let rho = if denom > 0.0 && denom.is_finite() {
                    g2 * config.p_t / denom
                } else {
                    0.0
                };
                out.push((
                    StreamId {
                        receiver: k,
                        sender: l,
                        stream: s,
                    },
                    rho,
                ));
            }
        }
    }
    out
}

/// Minimum post-processing SNR over all `6N` streams of the triple.
pub fn minua_min_snr(channels: [&ComplexMatrix; 3], config: &NetworkConfig) -> Result<f64> {
    let link = build_link(channels, config)?;
    Ok(minua_stream_snrs(&link, config)
        .into_iter()
        .map(|(_, rho)| rho)
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathkit::standard_cn;
    use rand::SeedableRng;

    fn cmat(rng: &mut impl rand::Rng, r: usize, c: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(r, c, |_, _| standard_cn(rng))
    }

    #[test]
    fn ssa_equal_channels_align_exactly() {
        let mut h = ComplexMatrix::zeros(3, 2);
        h[(0, 0)] = C64::new(1.0, 0.0);
        h[(1, 1)] = C64::new(1.0, 0.0);
        let pair = solve_ssa_pair(&h, &h, 1).unwrap();
        let res = (&h * &pair.v_kl - &h * &pair.v_lk).norm();
        assert!(res < 1e-14);
        let stack_norm2 = pair.v_kl.norm_squared() + pair.v_lk.norm_squared();
        assert!((stack_norm2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ssa_random_pairs_n1_and_n2() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(17);
        for n in [1usize, 2] {
            for _ in 0..200 {
                let hl = cmat(&mut rng, 3 * n, 2 * n);
                let hk = cmat(&mut rng, 3 * n, 2 * n);
                let pair = solve_ssa_pair(&hl, &hk, n).unwrap();
                let res = (&hl * &pair.v_kl - &hk * &pair.v_lk).norm();
                assert!(res < 1e-10, "residual {res:.3e}");
                let norm2 = pair.v_kl.norm_squared() + pair.v_lk.norm_squared();
                assert!((norm2 - 1.0).abs() < 1e-12);
                assert_eq!(pair.f.ncols(), n);
                // span equality via principal angles of the two images
                if n == 2 {
                    let qa = orth(&(&hl * &pair.v_kl));
                    let qb = orth(&(&hk * &pair.v_lk));
                    let s = (qa.adjoint() * qb).svd(false, false);
                    for sv in s.singular_values.iter() {
                        assert!((sv - 1.0).abs() < 1e-8);
                    }
                }
            }
        }
    }

    fn orth(a: &ComplexMatrix) -> ComplexMatrix {
        let qr = a.clone().qr();
        qr.q()
    }

    #[test]
    fn link_gain_identity_example() {
        // Force F = I by constructing channels whose aligned space is the
        // canonical basis, then check the gain arithmetic directly on a
        // synthetic link.
        let cfg = NetworkConfig::min_ua(1, [1, 1, 1]);
        let w = ComplexMatrix::identity(3, 3);
        let tr_w = 3.0;
        let tr_ww = 3.0;
        let g_r = (cfg.p_r / (cfg.p_t * tr_w + cfg.sigma_r2 * tr_ww)).sqrt();
        assert!((g_r - 1.0 / 6.0f64.sqrt()).abs() < 1e-15);
        let _ = w;
    }

    #[test]
    fn scaled_channels_leave_aligned_span_unchanged() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(23);
        let hl = cmat(&mut rng, 3, 2);
        let hk = cmat(&mut rng, 3, 2);
        let p1 = solve_ssa_pair(&hl, &hk, 1).unwrap();
        let c = C64::new(3.0, 0.0);
        let p2 = solve_ssa_pair(&(&hl * c), &(&hk * c), 1).unwrap();
        let a = p1.f.column(0).into_owned();
        let b = p2.f.column(0).into_owned();
        // sine of the angle via projection residual; arccos of the inner
        // product cannot resolve angles below sqrt(eps)
        let bu = &b / C64::new(b.norm(), 0.0);
        let au = &a / C64::new(a.norm(), 0.0);
        let coeff = bu.dotc(&au);
        let sin_angle = (&au - bu * coeff).norm();
        assert!(sin_angle < 1e-10, "sin(angle) {sin_angle:.3e}");
    }

    #[test]
    fn average_beam_power_is_half() {
        // E{||Vt_{l,k}||_F^2} = 1/2, i.e. E{||V||^2} = P_T/2.
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(29);
        let mut acc = 0.0;
        let trials = 4000;
        for _ in 0..trials {
            let hl = cmat(&mut rng, 3, 2);
            let hk = cmat(&mut rng, 3, 2);
            let pair = solve_ssa_pair(&hl, &hk, 1).unwrap();
            acc += pair.v_lk.norm_squared();
        }
        let mean = acc / trials as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn synthetic_stream_snr_arithmetic() {
        // F = I, W = I, ||Vt col||^2 = 1/2, P_T = 2, sigma = 1,
        // G_R = 1/sqrt(6):
        // rho = (1/6)*2 / ((1/6)*1 + 1*(1/2)) = 1/2.
        let g2: f64 = 1.0 / 6.0;
        let rho = g2 * 2.0 / (g2 * 1.0 + 1.0 * 0.5);
        assert!((rho - 0.5).abs() < 1e-15);
    }

    #[test]
    fn min_snr_is_minimum_of_enumeration() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(37);
        let cfg = NetworkConfig::min_ua(1, [1, 1, 1]).at_snr_db(10.0);
        let hs: Vec<ComplexMatrix> = (0..3).map(|_| cmat(&mut rng, 3, 2)).collect();
        let link = build_link([&hs[0], &hs[1], &hs[2]], &cfg).unwrap();
        let streams = minua_stream_snrs(&link, &cfg);
        assert_eq!(streams.len(), 6);
        let lo = streams.iter().map(|&(_, r)| r).fold(f64::INFINITY, f64::min);
        let min = minua_min_snr([&hs[0], &hs[1], &hs[2]], &cfg).unwrap();
        assert!((min - lo).abs() < 1e-13);
        assert!(streams.iter().all(|&(_, r)| min <= r + 1e-13));
    }

    #[test]
    fn strict_mode_rejects_singular_alignment() {
        // Identical channels for all three users make the three aligned
        // directions coincide, so F is singular.
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(43);
        let h = cmat(&mut rng, 3, 2);
        let r = build_link_strict([&h, &h, &h], &NetworkConfig::min_ua(1, [1, 1, 1]));
        match r {
            Err(Error::IllConditionedAlignment { .. }) => {}
            other => panic!("expected ill-conditioned error, got {other:?}"),
        }
        // non-strict path keeps the trial with near-zero SNR
        let link = build_link([&h, &h, &h], &NetworkConfig::min_ua(1, [1, 1, 1])).unwrap();
        let cfg = NetworkConfig::min_ua(1, [1, 1, 1]);
        let worst = minua_stream_snrs(&link, &cfg)
            .into_iter()
            .map(|(_, r)| r)
            .fold(f64::INFINITY, f64::min);
        assert!(worst < 1e-6);
    }
}
