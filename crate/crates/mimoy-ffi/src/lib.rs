//! C ABI for the scheduling laboratory: opaque configuration handles,
//! status codes, bound evaluators and single-point Monte Carlo runs, so
//! other languages can drive the library without the CLI.
//!
//! Every function is `extern "C"`; pointers returned by `*_new` functions
//! must be released with the matching `*_free`. Outputs are written through
//! caller-provided pointers and a [`MimoyStatus`] reports success.

use std::ffi::{c_char, CStr};

use mimoy::analysis;
use mimoy::channel::{NetworkConfig, RssMode};
use mimoy::harness::{self, ExperimentSpec, Scheme};
use mimoy::scheduling::SchedulingPattern;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MimoyStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigInvariant = 3,
    Io = 4,
    NumericInstability = 5,
    DegenerateChannel = 6,
}

impl From<&mimoy::Error> for MimoyStatus {
    fn from(e: &mimoy::Error) -> Self {
        use mimoy::Error::*;
        match e {
            Domain(_) | Parse(_) => MimoyStatus::InvalidArgument,
            ConfigInvariant(_) => MimoyStatus::ConfigInvariant,
            Io(_) => MimoyStatus::Io,
            NumericInstability { .. } => MimoyStatus::NumericInstability,
            DegenerateChannel(_) | IllConditionedAlignment { .. } => {
                MimoyStatus::DegenerateChannel
            }
        }
    }
}

/// Opaque network configuration handle.
pub struct MimoyConfig(NetworkConfig);

/// Transmission chain selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MimoyMode {
    MinUa = 0,
    ErUa = 1,
}

/// Scheduling pattern selector for DMT predictions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MimoyPattern {
    ClusterWise = 0,
    GroupWise = 1,
}

/// Analytical outage evaluator selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MimoyBound {
    LbCs = 0,
    UbCs = 1,
    LbGs = 2,
    UbGs = 3,
    HsLbCs = 4,
    HsUbCs = 5,
    HsLbGs = 6,
    HsUbGs = 7,
}

/// One estimated outage point.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MimoyOutagePoint {
    pub snr_db: f64,
    pub trials: u64,
    pub outages: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Builds a configuration with symmetric unit noise and the antenna layout
/// implied by the mode (`N_T = 2N` or `3N`, `N_R = 3N`). Returns null on
/// invalid arguments.
#[no_mangle]
pub extern "C" fn mimoy_config_new(
    mode: MimoyMode,
    n_streams: u32,
    m1: u32,
    m2: u32,
    m3: u32,
) -> *mut MimoyConfig {
    if n_streams == 0 || m1 == 0 || m2 == 0 || m3 == 0 {
        return std::ptr::null_mut();
    }
    let m = [m1 as usize, m2 as usize, m3 as usize];
    let cfg = match mode {
        MimoyMode::MinUa => NetworkConfig::min_ua(n_streams as usize, m),
        MimoyMode::ErUa => NetworkConfig::er_ua(n_streams as usize, m),
    };
    match cfg.validate() {
        Ok(()) => Box::into_raw(Box::new(MimoyConfig(cfg))),
        Err(_) => std::ptr::null_mut(),
    }
}

/// Loads a configuration from a `key = value` file.
///
/// # Safety
/// `path` must point to a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mimoy_config_from_file(path: *const c_char) -> *mut MimoyConfig {
    if path.is_null() {
        return std::ptr::null_mut();
    }
    let path = match unsafe { CStr::from_ptr(path) }.to_str() {
        Ok(p) => p,
        Err(_) => return std::ptr::null_mut(),
    };
    match NetworkConfig::from_file(std::path::Path::new(path)) {
        Ok(cfg) => Box::into_raw(Box::new(MimoyConfig(cfg))),
        Err(_) => std::ptr::null_mut(),
    }
}

/// Sets the symmetric-SNR operating point (`P_T = P_R = SNR`, unit noise).
///
/// # Safety
/// `cfg` must be a live handle from a `mimoy_config_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn mimoy_config_set_snr_db(
    cfg: *mut MimoyConfig,
    snr_db: f64,
) -> MimoyStatus {
    let Some(cfg) = (unsafe { cfg.as_mut() }) else {
        return MimoyStatus::NullPointer;
    };
    cfg.0 = cfg.0.clone().at_snr_db(snr_db);
    MimoyStatus::Ok
}

/// Releases a configuration handle.
///
/// # Safety
/// `cfg` must be a pointer previously returned by one of the
/// `mimoy_config_*` constructors and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mimoy_config_free(cfg: *mut MimoyConfig) {
    if !cfg.is_null() {
        drop(unsafe { Box::from_raw(cfg) });
    }
}

/// Evaluates one analytical outage bound or high-SNR approximation at the
/// given threshold and SNR (dB). Group-wise bounds read `m1` as the group
/// count.
#[no_mangle]
pub extern "C" fn mimoy_outage_bound(
    bound: MimoyBound,
    rho_th: f64,
    snr_db: f64,
    m1: u32,
    m2: u32,
    m3: u32,
    out: *mut f64,
) -> MimoyStatus {
    if out.is_null() {
        return MimoyStatus::NullPointer;
    }
    let snr = 10f64.powf(snr_db / 10.0);
    let (m1, m2, m3) = (m1 as usize, m2 as usize, m3 as usize);
    let result = match bound {
        MimoyBound::LbCs => analysis::outage_lb_cs(rho_th, snr, m1, m2),
        MimoyBound::UbCs => analysis::outage_ub_cs(rho_th, snr, m1, m2, m3),
        MimoyBound::LbGs => analysis::outage_lb_gs(rho_th, snr, m1),
        MimoyBound::UbGs => analysis::outage_ub_gs(rho_th, snr, m1),
        MimoyBound::HsLbCs => analysis::highsnr_lb_cs(rho_th, snr, [m1, m2, m3]),
        MimoyBound::HsUbCs => analysis::highsnr_ub_cs(rho_th, snr, [m1, m2, m3]),
        MimoyBound::HsLbGs => analysis::highsnr_lb_gs(rho_th, snr, m1),
        MimoyBound::HsUbGs => analysis::highsnr_ub_gs(rho_th, snr, m1),
    };
    match result {
        Ok(v) => {
            unsafe { *out = v };
            MimoyStatus::Ok
        }
        Err(e) => MimoyStatus::from(&e),
    }
}

/// Predicted diversity-multiplexing tradeoff `d(r)`: cluster-wise uses the
/// smallest of the three cluster sizes, group-wise reads `m1` as the group
/// count.
#[no_mangle]
pub extern "C" fn mimoy_dmt_predicted(
    pattern: MimoyPattern,
    r: f64,
    m1: u32,
    m2: u32,
    m3: u32,
) -> f64 {
    let cfg = NetworkConfig::er_ua(1, [m1 as usize, m2 as usize, m3 as usize])
        .with_groups(m1 as usize);
    let pattern = match pattern {
        MimoyPattern::ClusterWise => SchedulingPattern::ClusterWise,
        MimoyPattern::GroupWise => SchedulingPattern::GroupWise,
    };
    let cfg = match pattern {
        SchedulingPattern::ClusterWise => {
            NetworkConfig::er_ua(1, [m1 as usize, m2 as usize, m3 as usize])
        }
        SchedulingPattern::GroupWise => cfg,
    };
    analysis::dmt_predicted(r, pattern, &cfg)
}

/// Runs a deterministic Monte Carlo outage estimate at one SNR point.
/// `scheme` is one of the CLI scheme names (`centralized-cs`, ...).
///
/// # Safety
/// `cfg` must be a live handle; `scheme` a NUL-terminated string; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn mimoy_simulate_point(
    cfg: *const MimoyConfig,
    scheme: *const c_char,
    snr_db: f64,
    rho_th: f64,
    trials: u64,
    seed: u64,
    workers: u32,
    out: *mut MimoyOutagePoint,
) -> MimoyStatus {
    let Some(cfg) = (unsafe { cfg.as_ref() }) else {
        return MimoyStatus::NullPointer;
    };
    if scheme.is_null() || out.is_null() {
        return MimoyStatus::NullPointer;
    }
    let Ok(scheme) = (unsafe { CStr::from_ptr(scheme) }).to_str() else {
        return MimoyStatus::InvalidArgument;
    };
    let scheme: Scheme = match scheme.parse() {
        Ok(s) => s,
        Err(e) => return MimoyStatus::from(&e),
    };
    let spec = ExperimentSpec {
        config: cfg.0.clone(),
        rho_th,
        snr_grid_db: vec![snr_db],
        trials,
        master_seed: seed,
        rss_mode: RssMode::Identity,
        workers: workers as usize,
    };
    match harness::run_sweep(&spec, scheme) {
        Ok(curve) => {
            let p = curve.points[0];
            unsafe {
                *out = MimoyOutagePoint {
                    snr_db: p.snr_db,
                    trials: p.trials,
                    outages: p.outages,
                    p_hat: p.p_hat,
                    ci_low: p.ci_low,
                    ci_high: p.ci_high,
                };
            }
            MimoyStatus::Ok
        }
        Err(e) => MimoyStatus::from(&e),
    }
}

/// Modified Bessel function of the second kind, order one.
#[no_mangle]
pub extern "C" fn mimoy_bessel_k1(x: f64, out: *mut f64) -> MimoyStatus {
    if out.is_null() {
        return MimoyStatus::NullPointer;
    }
    match analysis::bessel_k1(x) {
        Ok(v) => {
            unsafe { *out = v };
            MimoyStatus::Ok
        }
        Err(e) => MimoyStatus::from(&e),
    }
}

/// Digamma function.
#[no_mangle]
pub extern "C" fn mimoy_digamma(x: f64, out: *mut f64) -> MimoyStatus {
    if out.is_null() {
        return MimoyStatus::NullPointer;
    }
    match analysis::digamma(x) {
        Ok(v) => {
            unsafe { *out = v };
            MimoyStatus::Ok
        }
        Err(e) => MimoyStatus::from(&e),
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn mimoy_status_message(status: MimoyStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        MimoyStatus::Ok => b"ok\0",
        MimoyStatus::NullPointer => b"null pointer argument\0",
        MimoyStatus::InvalidArgument => b"invalid argument\0",
        MimoyStatus::ConfigInvariant => b"configuration invariant violated\0",
        MimoyStatus::Io => b"I/O error\0",
        MimoyStatus::NumericInstability => b"numeric instability\0",
        MimoyStatus::DegenerateChannel => b"degenerate channel\0",
    };
    msg.as_ptr() as *const c_char
}

/// Library version string (static).
#[no_mangle]
pub extern "C" fn mimoy_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
