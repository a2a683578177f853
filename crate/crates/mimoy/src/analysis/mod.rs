//! Closed-form outage bounds for the ER-UA chain at `N = 1`, their
//! high-SNR approximations, special functions, diversity-slope fitting and
//! the diversity-multiplexing tradeoff.
//!
//! The lower bound on outage is exact (a double order-statistics integral
//! with a Bessel-function series); the upper bound carries the region
//! enlargement of its derivation and therefore over-approximates, which is
//! the conservative direction for a bound. Alternating binomial sums are
//! accumulated in compensated arithmetic; when cancellation still exceeds
//! what f64 can carry, the evaluator switches to high-accuracy quadrature
//! of the mathematically identical positive-form integral.

pub mod quad;
pub mod special;

use crate::channel::NetworkConfig;
use crate::scheduling::SchedulingPattern;
use crate::{Error, Result};

pub use special::{bessel_k1, digamma};

/// Derived quantities shared by every bound formula.
#[derive(Debug, Clone, Copy)]
pub struct BoundParams {
    /// `a = 2 rho_th / SNR`.
    pub a: f64,
    /// `b = 6 rho_th (SNR + 1) / SNR^2`.
    pub b: f64,
    /// Positive root of `y^2 = a y + b`.
    pub mu: f64,
    /// `M1 + M2 + M3`.
    pub m_sigma: usize,
}

/// Computes the bound parameters for a threshold/SNR pair.
pub fn bound_params(rho_th: f64, snr: f64, cluster_sizes: [usize; 3]) -> Result<BoundParams> {
    if !(rho_th > 0.0) || !(snr > 0.0) {
        return Err(Error::Domain(format!(
            "bound_params: rho_th and SNR must be positive (got {rho_th}, {snr})"
        )));
    }
    let a = 2.0 * rho_th / snr;
    let b = 6.0 * rho_th * (snr + 1.0) / (snr * snr);
    let mu = 0.5 * (a + (a * a + 4.0 * b).sqrt());
    Ok(BoundParams {
        a,
        b,
        mu,
        m_sigma: cluster_sizes.iter().sum(),
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut out = 1.0f64;
    for i in 0..k {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// Compensated (Kahan) accumulator that also tracks the total magnitude of
/// its inputs, used to detect catastrophic cancellation.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
    magnitude: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        self.magnitude += x.abs();
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }

    /// Ratio of accumulated magnitude to the surviving value.
    fn cancellation(&self) -> f64 {
        if self.sum == 0.0 {
            f64::INFINITY
        } else {
            self.magnitude / self.sum.abs()
        }
    }
}

/// Cancellation ratio beyond which a series result is considered
/// untrustworthy and the positive-form quadrature takes over.
const CANCELLATION_LIMIT: f64 = 1e8;

/// Outage lower bound for cluster-wise scheduling:
/// `P = Pr(g(X, Y) <= rho_th)` with `X, Y` the maxima of `M1` and `M2`
/// independent unit-rate exponentials.
///
/// Evaluates the closed-form double series
/// `2 M2 sum_q [(-1)^q C(M2-1,q)/(2(q+1)) + sum_p C(M2-1,q) C(M1,p)
/// (-1)^{q+p} e^{-pa} sqrt(pb/(q+1)) K1(2 sqrt(p(q+1)b))]`.
pub fn outage_lb_cs(rho_th: f64, snr: f64, m1: usize, m2: usize) -> Result<f64> {
    if m1 < 1 || m2 < 1 {
        return Err(Error::Domain("outage_lb_cs: cluster sizes must be >= 1".into()));
    }
    let p = bound_params(rho_th, snr, [m1, m2, 1])?;
    let mut acc = CompensatedSum::default();
    for q in 0..m2 {
        let sign_q = if q % 2 == 0 { 1.0 } else { -1.0 };
        let cq = binomial(m2 - 1, q);
        acc.add(sign_q * cq / (2.0 * (q + 1) as f64));
        for pp in 1..=m1 {
            let sign = if (q + pp) % 2 == 0 { 1.0 } else { -1.0 };
            let arg = 2.0 * ((pp * (q + 1)) as f64 * p.b).sqrt();
            let term = cq
                * binomial(m1, pp)
                * sign
                * (-(pp as f64) * p.a).exp()
                * ((pp as f64) * p.b / (q + 1) as f64).sqrt()
                * bessel_k1(arg)?;
            acc.add(term);
        }
    }
    let series = 2.0 * m2 as f64 * acc.value();
    let value = if acc.cancellation() > CANCELLATION_LIMIT
        || !series.is_finite()
        || !(-1e-9..=1.0 + 1e-9).contains(&series)
    {
        lb_positive_integral(&p, m1, m2)
    } else {
        series
    };
    finalize_probability(value, 1.0 + 1e-9, "outage_lb_cs")
}

/// The defining integral of the lower bound in positive form,
/// `int_0^inf f_Y(y) F_X(a + b/y) dy`; no cancellation at any SNR.
///
/// At high SNR the integrand carries a `1/y` stretch spanning many decades
/// (the source of the logarithmic diversity factor), so integration runs in
/// log space where that stretch is flat.
fn lb_positive_integral(p: &BoundParams, m1: usize, m2: usize) -> f64 {
    let (a, b) = (p.a, p.b);
    let f = |y: f64| -> f64 {
        let fy = m2 as f64 * (1.0 - (-y).exp()).powi(m2 as i32 - 1) * (-y).exp();
        let fx = (1.0 - (-(a + b / y)).exp()).powi(m1 as i32);
        fy * fx
    };
    // truncation below y_min contributes at most (y_min)^{m2}, pushed far
    // below any value scale of interest
    let y_min: f64 = 10f64.powf(-260.0 / m2 as f64).max(1e-290);
    quad::integrate(|u: f64| f(u.exp()) * u.exp(), y_min.ln(), 45f64.ln(), 1e-14, 0.0)
}

fn finalize_probability(value: f64, upper: f64, context: &'static str) -> Result<f64> {
    if !value.is_finite() || value < -1e-9 || value > upper {
        return Err(Error::NumericInstability { context, value });
    }
    Ok(value.clamp(0.0, upper))
}

/// `int_mu^inf exp(-3((p+1) y + q b / y)) dy`: adaptive quadrature over
/// the decaying range plus an analytic exponential tail.
fn ub_inner_integral(pp: usize, q: usize, params: &BoundParams) -> f64 {
    let rate = 3.0 * (pp + 1) as f64;
    let qb = 3.0 * q as f64 * params.b;
    let y_max = params.mu + 50.0 / rate;
    let f = |y: f64| (-(rate * y + qb / y)).exp();
    let main = quad::integrate(f, params.mu, y_max, 1e-14, 0.0);
    // tail: exp(-qb/y) is nearly constant past y_max
    let tail = (-(rate * y_max + qb / y_max)).exp() / rate;
    main + tail
}

/// The three closed-form pieces of one ordering event for the upper
/// bound, for the permutation that puts `A` candidates on the smallest
/// variable, `B` on the middle and `C` on the largest.
fn ub_pieces(a_cnt: usize, b_cnt: usize, c_cnt: usize, params: &BoundParams) -> (f64, f64, f64) {
    let t = 1.0 - (-3.0 * params.mu).exp();
    let m_sigma = params.m_sigma as f64;
    let (af, bf, cf) = (a_cnt as f64, b_cnt as f64, c_cnt as f64);
    let i1 = bf * cf * t.powi(params.m_sigma as i32) / ((af + bf) * m_sigma);
    let i2 = bf * t.powi((a_cnt + b_cnt) as i32) * (1.0 - t.powi(c_cnt as i32)) / (af + bf);
    let mut acc = CompensatedSum::default();
    for pp in 0..b_cnt {
        for q in 0..=a_cnt {
            let sign = if (pp + q) % 2 == 0 { 1.0 } else { -1.0 };
            acc.add(
                sign * binomial(b_cnt - 1, pp)
                    * binomial(a_cnt, q)
                    * (-3.0 * q as f64 * params.a).exp()
                    * ub_inner_integral(pp, q, params),
            );
        }
    }
    let series = 3.0 * bf * acc.value() * (1.0 - t.powi(c_cnt as i32));
    let i3 = if acc.cancellation() > CANCELLATION_LIMIT || !series.is_finite() {
        ub_piece3_positive(a_cnt, b_cnt, c_cnt, params)
    } else {
        series
    };
    (i1, i2, i3)
}

/// Positive form of the enlarged third piece:
/// `(1 - T^C) int_mu^inf f_B(y) F_A(a + b/y) dy` with rate-3 order
/// statistics.
fn ub_piece3_positive(a_cnt: usize, b_cnt: usize, c_cnt: usize, params: &BoundParams) -> f64 {
    let (a, b) = (params.a, params.b);
    let t = 1.0 - (-3.0 * params.mu).exp();
    let f = |y: f64| -> f64 {
        let fy = b_cnt as f64
            * (1.0 - (-3.0 * y).exp()).powi(b_cnt as i32 - 1)
            * 3.0
            * (-3.0 * y).exp();
        let fx = (1.0 - (-3.0 * (a + b / y)).exp()).powi(a_cnt as i32);
        fy * fx
    };
    // log-space for the same multi-decade reason as the lower bound
    let lo = params.mu.ln();
    let hi = (params.mu + 20.0).ln();
    let main = quad::integrate(|u: f64| f(u.exp()) * u.exp(), lo, hi, 1e-14, 0.0);
    (1.0 - t.powi(c_cnt as i32)) * main
}

/// The three closed-form pieces of one ordering event of the upper bound,
/// exposed for region-wise validation: `perm = [A, B, C]` assigns the
/// candidate counts to the (smallest, middle, largest) ordered variables,
/// while `all` fixes the full configuration (for `M_Sigma`).
pub fn outage_ub_event_pieces(
    rho_th: f64,
    snr: f64,
    perm: [usize; 3],
    all: [usize; 3],
) -> Result<(f64, f64, f64)> {
    let params = bound_params(rho_th, snr, all)?;
    Ok(ub_pieces(perm[0], perm[1], perm[2], &params))
}

fn permutations3(m: [usize; 3]) -> [[usize; 3]; 6] {
    let [x, y, z] = m;
    [
        [x, y, z],
        [x, z, y],
        [y, x, z],
        [y, z, x],
        [z, x, y],
        [z, y, x],
    ]
}

/// Outage upper bound for cluster-wise scheduling: the sum over the six
/// orderings of the per-cluster eigenvalue maxima of the three closed-form
/// pieces. Carries the derivation's region enlargement, so values slightly
/// above 1 are legitimate at low SNR; values outside `[0, 2)` raise a
/// numeric-instability error.
pub fn outage_ub_cs(rho_th: f64, snr: f64, m1: usize, m2: usize, m3: usize) -> Result<f64> {
    if m1 < 1 || m2 < 1 || m3 < 1 {
        return Err(Error::Domain("outage_ub_cs: cluster sizes must be >= 1".into()));
    }
    let params = bound_params(rho_th, snr, [m1, m2, m3])?;
    let mut total = CompensatedSum::default();
    for [a_cnt, b_cnt, c_cnt] in permutations3([m1, m2, m3]) {
        let (i1, i2, i3) = ub_pieces(a_cnt, b_cnt, c_cnt, &params);
        total.add(i1);
        total.add(i2);
        total.add(i3);
    }
    finalize_probability(total.value(), 2.0, "outage_ub_cs")
}

/// Group-wise outage lower bound: the cluster-wise bound with
/// `M1 = M2 = M`.
pub fn outage_lb_gs(rho_th: f64, snr: f64, m: usize) -> Result<f64> {
    outage_lb_cs(rho_th, snr, m, m)
}

/// Group-wise outage upper bound: the single-group bracket raised to the
/// `M`-th power (groups are i.i.d.).
pub fn outage_ub_gs(rho_th: f64, snr: f64, m: usize) -> Result<f64> {
    if m < 1 {
        return Err(Error::Domain("outage_ub_gs: M must be >= 1".into()));
    }
    let bracket = outage_ub_cs(rho_th, snr, 1, 1, 1)?;
    finalize_probability(bracket.powi(m as i32), 2.0, "outage_ub_gs")
}

/// Bessel-form variant of the upper bound used by the high-SNR
/// derivation: the third piece's integration region extends over the whole
/// positive axis, closing the integral into `K_1` terms. Sits above
/// [`outage_ub_cs`]; the high-SNR coefficients converge to this variant.
pub fn outage_ub_cs_bessel_variant(
    rho_th: f64,
    snr: f64,
    m1: usize,
    m2: usize,
    m3: usize,
) -> Result<f64> {
    let params = bound_params(rho_th, snr, [m1, m2, m3])?;
    let t = 1.0 - (-3.0 * params.mu).exp();
    let m_sigma = params.m_sigma as f64;
    let mut total = CompensatedSum::default();
    for [a_cnt, b_cnt, c_cnt] in permutations3([m1, m2, m3]) {
        let (af, bf, cf) = (a_cnt as f64, b_cnt as f64, c_cnt as f64);
        total.add(bf * cf * t.powi(params.m_sigma as i32) / ((af + bf) * m_sigma));
        total.add(bf * t.powi((a_cnt + b_cnt) as i32) * (1.0 - t.powi(c_cnt as i32)) / (af + bf));
        let mut acc = CompensatedSum::default();
        acc.add(1.0);
        for pp in 0..b_cnt {
            for q in 1..=a_cnt {
                let sign = if (pp + q) % 2 == 0 { 1.0 } else { -1.0 };
                let arg = 6.0 * ((q * (pp + 1)) as f64 * params.b).sqrt();
                acc.add(
                    6.0 * bf
                        * sign
                        * binomial(b_cnt - 1, pp)
                        * binomial(a_cnt, q)
                        * (-3.0 * q as f64 * params.a).exp()
                        * (q as f64 * params.b / (pp + 1) as f64).sqrt()
                        * bessel_k1(arg)?,
                );
            }
        }
        total.add(acc.value() * (1.0 - t.powi(c_cnt as i32)));
    }
    finalize_probability(total.value(), 2.0, "outage_ub_cs_bessel_variant")
}

/// Bessel-form variant of the group-wise upper bound.
pub fn outage_ub_gs_bessel_variant(rho_th: f64, snr: f64, m: usize) -> Result<f64> {
    let bracket = outage_ub_cs_bessel_variant(rho_th, snr, 1, 1, 1)?;
    finalize_probability(bracket.powi(m as i32), 2.0, "outage_ub_gs_bessel_variant")
}

/// Coefficient helper of the high-SNR approximations: the double sum with
/// the pairing of the exponential-series coefficients
/// `c_{p,n} = (-tau p)^n / n!` against the Bessel-series coefficients
/// `e_{p,q,n}`.
pub fn phi_helper(n1: usize, n2: usize, tau: f64) -> Result<f64> {
    if n1 < 1 || n2 < 1 || !(tau > 0.0) {
        return Err(Error::Domain(format!(
            "phi_helper: need positive arguments (got {n1}, {n2}, {tau})"
        )));
    }
    let d = n1.min(n2);
    let b1 = |t: usize| -> f64 { 0.5 * 0.25f64.powi(t as i32) / (factorial(t) * factorial(t + 1)) };
    let b2 = |t: usize| -> Result<f64> {
        Ok(b1(t)
            * (-(2.0f64.ln()) - 0.5 * (digamma((t + 1) as f64)? + digamma((t + 2) as f64)?)))
    };
    let mut sum = 0.0;
    for q in 0..n2 {
        for p in 1..=n1 {
            // c_p listed by descending power, e_{p,q} by ascending, so the
            // dot product collects the coefficient of total order d
            let mut dot = 0.0;
            for n in 1..=d {
                let c = (-(tau * p as f64)).powi((d - n) as i32) / factorial(d - n);
                let e = (b1(n - 1) * (2.0 * tau * (3.0 * (p * (q + 1)) as f64).sqrt()).ln()
                    + b2(n - 1)?)
                    * (12.0 * tau * tau * (p * (q + 1)) as f64).powi(n as i32);
                dot += c * e;
            }
            let sign = if (q + p) % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * binomial(n2 - 1, q) * binomial(n1, p) * dot / (q + 1) as f64;
        }
    }
    Ok(n2 as f64 * sum)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn sorted_desc(m: [usize; 3]) -> [usize; 3] {
    let mut s = m;
    s.sort_unstable_by(|a, b| b.cmp(a));
    s
}

/// High-SNR approximation of the cluster-wise lower bound: diversity
/// exponent `M_[3]`, with a log factor when the two smallest cluster sizes
/// coincide.
pub fn highsnr_lb_cs(rho_th: f64, snr: f64, m: [usize; 3]) -> Result<f64> {
    let s = sorted_desc(m);
    let a = 2.0 * rho_th / snr;
    let d = s[2] as i32;
    if s[1] == s[2] {
        let gain = s[2] as f64 * 3f64.powi(d);
        Ok(gain * a.powi(d) * (1.0 / a).ln())
    } else {
        Ok(phi_helper(s[2], s[1], 1.0)? * a.powi(d))
    }
}

/// High-SNR approximation of the cluster-wise upper bound: four branches
/// on the multiplicity pattern of the sorted cluster sizes.
pub fn highsnr_ub_cs(rho_th: f64, snr: f64, m: [usize; 3]) -> Result<f64> {
    let s = sorted_desc(m);
    let a = 2.0 * rho_th / snr;
    let d = s[2] as i32;
    let log = (1.0 / a).ln();
    let value = if s[0] == s[1] && s[1] == s[2] {
        6.0 * s[2] as f64 * 3f64.powi(3 * d) * a.powi(d) * log
    } else if s[0] > s[1] && s[1] == s[2] {
        2.0 * s[2] as f64 * 3f64.powi(3 * d) * a.powi(d) * log
    } else if s[0] == s[1] && s[1] > s[2] {
        (phi_helper(s[1], s[2], 3.0)? + phi_helper(s[2], s[1], 3.0)?) * a.powi(d)
    } else {
        let gain = phi_helper(s[0], s[2], 3.0)?
            + phi_helper(s[2], s[0], 3.0)?
            + phi_helper(s[1], s[2], 3.0)?
            + phi_helper(s[2], s[1], 3.0)?;
        gain * a.powi(d)
    };
    Ok(value)
}

/// High-SNR approximation of the group-wise lower bound:
/// `M 3^M (2 rho/SNR)^M ln(SNR / 2 rho)`.
pub fn highsnr_lb_gs(rho_th: f64, snr: f64, m: usize) -> Result<f64> {
    if m < 1 {
        return Err(Error::Domain("highsnr_lb_gs: M must be >= 1".into()));
    }
    let a = 2.0 * rho_th / snr;
    Ok(m as f64 * 3f64.powi(m as i32) * a.powi(m as i32) * (1.0 / a).ln())
}

/// High-SNR approximation of the group-wise upper bound:
/// `(6 * 27)^M ((2 rho/SNR) ln(SNR / 2 rho))^M`.
pub fn highsnr_ub_gs(rho_th: f64, snr: f64, m: usize) -> Result<f64> {
    if m < 1 {
        return Err(Error::Domain("highsnr_ub_gs: M must be >= 1".into()));
    }
    let a = 2.0 * rho_th / snr;
    Ok(162f64.powi(m as i32) * (a * (1.0 / a).ln()).powi(m as i32))
}

/// Least-squares slope of `-log10(P)` against `log10(SNR)` over the points
/// whose SNR (in dB) falls inside `window` and whose estimate is positive.
pub fn diversity_slope(points: &[(f64, f64)], window: (f64, f64)) -> Result<f64> {
    let filtered: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(snr_db, p)| snr_db >= window.0 && snr_db <= window.1 && p > 0.0)
        .map(|&(snr_db, p)| (snr_db / 10.0, -p.log10()))
        .collect();
    if filtered.len() < 3 {
        return Err(Error::Domain(format!(
            "diversity_slope: need at least 3 positive points in window, got {}",
            filtered.len()
        )));
    }
    let n = filtered.len() as f64;
    let mean_x = filtered.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = filtered.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for &(x, y) in &filtered {
        sxy += (x - mean_x) * (y - mean_y);
        sxx += (x - mean_x) * (x - mean_x);
    }
    Ok(sxy / sxx)
}

/// Predicted diversity-multiplexing tradeoff:
/// `d(r) = min(M1,M2,M3) (1 - r/3)^+` cluster-wise, `M (1 - r/3)^+`
/// group-wise.
pub fn dmt_predicted(r: f64, pattern: SchedulingPattern, config: &NetworkConfig) -> f64 {
    let order = match pattern {
        SchedulingPattern::ClusterWise => {
            *config.cluster_sizes.iter().min().expect("three clusters") as f64
        }
        SchedulingPattern::GroupWise => config.group_count as f64,
    };
    order * (1.0 - r / 3.0).max(0.0)
}

/// Monte Carlo outage against an adaptive target sum-rate
/// `R_th = r log2(1 + SNR)`: the instantaneous sum-rate is
/// `R = (1/2) sum_{k,l} log2(1 + rho_{k,l})` over the six directed links
/// of the scheduled triple (ER-UA, N = 1).
pub fn outage_with_adaptive_rate(
    scheme: crate::harness::Scheme,
    config: &NetworkConfig,
    r: f64,
    trials: u64,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Domain("outage_with_adaptive_rate: zero trials".into()));
    }
    if config.mode != crate::channel::TransmissionMode::ErUa || config.n != 1 {
        return Err(Error::ConfigInvariant(
            "adaptive-rate outage is defined for ER-UA with N = 1".into(),
        ));
    }
    if r < 0.0 {
        return Err(Error::Domain("multiplexing gain must be nonnegative".into()));
    }
    config.validate()?;
    let snr = config.snr_t();
    let rate_target = r * (1.0 + snr).log2();
    let rss = crate::channel::make_rss(config, crate::channel::RssMode::Identity, seed);
    let mut outages = 0u64;
    for t in 0..trials {
        let trial_seed = crate::channel::mix_seed(seed, &[t]);
        let channels = crate::channel::sample_channels(config, trial_seed);
        let decision = crate::harness::decide(scheme, &channels, &rss, config, trial_seed)?;
        let triple = decision.user_triple();
        let tables = [
            crate::erua::EcgTable::new(channels.matrix(0, triple[0]), &rss)?,
            crate::erua::EcgTable::new(channels.matrix(1, triple[1]), &rss)?,
            crate::erua::EcgTable::new(channels.matrix(2, triple[2]), &rss)?,
        ];
        let mut rate = 0.0;
        for k in 0..3usize {
            for l in 0..3usize {
                if l == k {
                    continue;
                }
                let m = crate::channel::pairing_direction(k, l);
                let rho = crate::erua::erua_stream_snr(
                    tables[l].alpha2(m, 0),
                    tables[k].alpha2(m, 0),
                    config,
                )?;
                rate += 0.5 * (1.0 + rho).log2();
            }
        }
        if rate <= rate_target {
            outages += 1;
        }
    }
    Ok(outages as f64 / trials as f64)
}
