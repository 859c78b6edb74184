//! C ABI over `flicker-bell`.
//!
//! Objects cross the boundary as opaque heap handles (`FbRunConfig`,
//! `FbTally`, `FbOracle`) that the caller releases with the matching
//! `*_free`. Fallible calls return an [`FbStatus`]; the message for the most
//! recent failure on the calling thread is available from
//! [`fb_last_error_message`]. Switch positions are `1..=3`, colours are
//! [`FB_COLOR_RED`] and [`FB_COLOR_GREEN`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use flicker_bell::config::{Command, OutputFormat};
use flicker_bell::engine::{run_experiment, run_experiment_partitioned, RunConfig, Source, TallyTable};
use flicker_bell::observer::{CollapseMode, ObserverParams};
use flicker_bell::oracle::{exact_distribution, local_strategy_bound, ProbabilityTable};
use flicker_bell::physics::{csl_collapse_time, qm_same_color_probability, ParticleKind};
use flicker_bell::report::{emit_report, Results};
use flicker_bell::stats::{coincidence_rates, mermin_sum};
use flicker_bell::{Color, Rational, RationalProb, SwitchPosition};

pub const FB_COLOR_RED: u8 = 0;
pub const FB_COLOR_GREEN: u8 = 1;
pub const FB_PARTICLE_PHOTON: u32 = 0;
pub const FB_PARTICLE_SPIN_HALF: u32 = 1;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Runtime = 3,
    Panic = 4,
}

/// Opaque run configuration.
pub struct FbRunConfig {
    inner: RunConfig,
}

/// Opaque tally of a finished run, together with the config that produced it.
pub struct FbTally {
    tally: TallyTable,
    config: RunConfig,
}

/// Opaque exact probability table.
pub struct FbOracle {
    table: ProbabilityTable,
    params: ObserverParams,
    mode: CollapseMode,
    source: Source,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

type FfiResult = Result<(), (FbStatus, String)>;

fn invalid(e: impl ToString) -> (FbStatus, String) {
    (FbStatus::InvalidArgument, e.to_string())
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> FfiResult) -> FbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FbStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            FbStatus::Panic
        }
    }
}

fn null(what: &str) -> (FbStatus, String) {
    (FbStatus::NullPointer, format!("{what} is null"))
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (FbStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn as_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (FbStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn as_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (FbStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

fn bias(num: u64, den: u64) -> Result<RationalProb, (FbStatus, String)> {
    RationalProb::new(num as i128, den as i128).map_err(invalid)
}

fn position(n: u8) -> Result<SwitchPosition, (FbStatus, String)> {
    SwitchPosition::from_number(n as i64).map_err(invalid)
}

fn color(c: u8) -> Result<Color, (FbStatus, String)> {
    match c {
        FB_COLOR_RED => Ok(Color::Red),
        FB_COLOR_GREEN => Ok(Color::Green),
        other => Err(invalid(format!("invalid colour {other}"))),
    }
}

fn split_rational(r: Rational, num: *mut i64, den: *mut i64) -> FfiResult {
    if num.is_null() || den.is_null() {
        return Err(null("output pointer"));
    }
    let n = i64::try_from(*r.numer()).map_err(|_| (FbStatus::Runtime, "numerator overflows i64".to_string()))?;
    let d = i64::try_from(*r.denom()).map_err(|_| (FbStatus::Runtime, "denominator overflows i64".to_string()))?;
    unsafe {
        *num = n;
        *den = d;
    }
    Ok(())
}

fn into_c_string(s: String, out: *mut *mut c_char) -> FfiResult {
    if out.is_null() {
        return Err(null("out"));
    }
    let c = CString::new(s).map_err(|_| (FbStatus::Runtime, "report contains a nul byte".to_string()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

fn format_arg(p: *const c_char) -> Result<OutputFormat, (FbStatus, String)> {
    if p.is_null() {
        return Ok(OutputFormat::Text);
    }
    unsafe { as_str(p, "format") }?.parse().map_err(invalid)
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a pointer returned by a `*_report` call, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// New run configuration with the default observer (bias 3/8), observer-
/// mediated collapse, uniform settings and random instruction sets.
#[no_mangle]
pub extern "C" fn fb_run_config_new(n_trials: u64, seed: u64) -> *mut FbRunConfig {
    Box::into_raw(Box::new(FbRunConfig {
        inner: RunConfig::new(n_trials, seed),
    }))
}

/// # Safety
/// `cfg` must be NULL or a handle from [`fb_run_config_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fb_run_config_free(cfg: *mut FbRunConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Sets the bias probability to `num / den`.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fb_run_config_set_bias(cfg: *mut FbRunConfig, num: u64, den: u64) -> FbStatus {
    guard(|| {
        let cfg = as_mut(cfg, "cfg")?;
        cfg.inner.params = ObserverParams::new(bias(num, den)?);
        Ok(())
    })
}

/// Sets the collapse mode from a token: `observer`, `objective-early` or
/// `sf-delayed:<seconds>`.
///
/// # Safety
/// `cfg` must be a live handle and `token` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fb_run_config_set_mode(cfg: *mut FbRunConfig, token: *const c_char) -> FbStatus {
    guard(|| {
        let mode = as_str(token, "token")?.parse().map_err(invalid)?;
        as_mut(cfg, "cfg")?.inner.mode = mode;
        Ok(())
    })
}

/// Sets the setting policy: `uniform`, `fixed:<l>,<r>` or
/// `weighted:<w11>,...,<w33>`.
///
/// # Safety
/// `cfg` must be a live handle and `token` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fb_run_config_set_settings(cfg: *mut FbRunConfig, token: *const c_char) -> FbStatus {
    guard(|| {
        let policy = as_str(token, "token")?.parse().map_err(invalid)?;
        as_mut(cfg, "cfg")?.inner.policy = policy;
        Ok(())
    })
}

/// Sets the instruction-set source: `random` or `fixed:<RGF-token>`.
///
/// # Safety
/// `cfg` must be a live handle and `token` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fb_run_config_set_source(cfg: *mut FbRunConfig, token: *const c_char) -> FbStatus {
    guard(|| {
        let source = as_str(token, "token")?.parse().map_err(invalid)?;
        as_mut(cfg, "cfg")?.inner.source = source;
        Ok(())
    })
}

/// Runs the experiment. `workers == 0` uses the internal thread pool;
/// otherwise the trials are split over exactly `workers` threads. The
/// tallies do not depend on the choice.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fb_run_experiment(cfg: *const FbRunConfig, workers: u32, out: *mut *mut FbTally) -> FbStatus {
    guard(|| {
        let config = as_ref(cfg, "cfg")?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        let tally = if workers == 0 {
            run_experiment(&config)
        } else {
            run_experiment_partitioned(&config, workers as usize)
        }
        .map_err(invalid)?;
        *out = Box::into_raw(Box::new(FbTally { tally, config }));
        Ok(())
    })
}

/// # Safety
/// `tally` must be NULL or a handle from [`fb_run_experiment`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fb_tally_free(tally: *mut FbTally) {
    if !tally.is_null() {
        drop(Box::from_raw(tally));
    }
}

/// Total trials in the tally, 0 for NULL.
///
/// # Safety
/// `tally` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fb_tally_total(tally: *const FbTally) -> u64 {
    tally.as_ref().map_or(0, |t| t.tally.total())
}

/// Count of trials at settings `(left, right)` perceived as
/// `(left_color, right_color)`.
///
/// # Safety
/// `tally` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fb_tally_count(
    tally: *const FbTally,
    left: u8,
    right: u8,
    left_color: u8,
    right_color: u8,
    out: *mut u64,
) -> FbStatus {
    guard(|| {
        let t = as_ref(tally, "tally")?;
        let n = t.tally.count(position(left)?, position(right)?, color(left_color)?, color(right_color)?);
        *as_mut(out, "out")? = n;
        Ok(())
    })
}

/// Monte Carlo estimate of the same-colour sum over distinct setting pairs
/// and its standard error.
///
/// # Safety
/// `tally` must be a live handle; `sum` and `std_err` writable.
#[no_mangle]
pub unsafe extern "C" fn fb_tally_mermin_sum(tally: *const FbTally, sum: *mut f64, std_err: *mut f64) -> FbStatus {
    guard(|| {
        let t = as_ref(tally, "tally")?;
        let stats = coincidence_rates(&t.tally).map_err(invalid)?;
        let rep = mermin_sum(&stats).map_err(invalid)?;
        *as_mut(sum, "sum")? = rep.mermin_sum.to_f64();
        *as_mut(std_err, "std_err")? = rep.uncertainty;
        Ok(())
    })
}

/// Renders the run report (`format`: `text`, `csv`, `json`; NULL means
/// text). Free the result with [`fb_string_free`].
///
/// # Safety
/// `tally` must be a live handle, `format` NULL or NUL-terminated, `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn fb_tally_report(tally: *const FbTally, format: *const c_char, out: *mut *mut c_char) -> FbStatus {
    guard(|| {
        let t = as_ref(tally, "tally")?;
        let format = format_arg(format)?;
        let stats = coincidence_rates(&t.tally).map_err(invalid)?;
        let inequality = mermin_sum(&stats).ok();
        let results = Results::Run {
            config: t.config,
            stats,
            inequality,
        };
        into_c_string(emit_report(&results, format), out)
    })
}

/// Builds the exact table for bias `num/den`, a mode token and a source
/// token (`random` or `fixed:<RGF-token>`).
///
/// # Safety
/// `mode` and `source` must be NUL-terminated strings; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fb_oracle_new(
    bias_num: u64,
    bias_den: u64,
    mode: *const c_char,
    source: *const c_char,
    out: *mut *mut FbOracle,
) -> FbStatus {
    guard(|| {
        let params = ObserverParams::new(bias(bias_num, bias_den)?);
        let mode: CollapseMode = as_str(mode, "mode")?.parse().map_err(invalid)?;
        let source: Source = as_str(source, "source")?.parse().map_err(invalid)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let table = exact_distribution(params, mode, source);
        *out = Box::into_raw(Box::new(FbOracle {
            table,
            params,
            mode,
            source,
        }));
        Ok(())
    })
}

/// # Safety
/// `oracle` must be NULL or a handle from [`fb_oracle_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fb_oracle_free(oracle: *mut FbOracle) {
    if !oracle.is_null() {
        drop(Box::from_raw(oracle));
    }
}

/// Exact probability of `(left_color, right_color)` at settings
/// `(left, right)`, as a reduced fraction.
///
/// # Safety
/// `oracle` must be a live handle; `num` and `den` writable.
#[no_mangle]
pub unsafe extern "C" fn fb_oracle_probability(
    oracle: *const FbOracle,
    left: u8,
    right: u8,
    left_color: u8,
    right_color: u8,
    num: *mut i64,
    den: *mut i64,
) -> FbStatus {
    guard(|| {
        let o = as_ref(oracle, "oracle")?;
        let p = o.table.get(position(left)?, position(right)?, color(left_color)?, color(right_color)?);
        split_rational(p, num, den)
    })
}

/// Exact same-colour sum over distinct setting pairs.
///
/// # Safety
/// `oracle` must be a live handle; `num` and `den` writable.
#[no_mangle]
pub unsafe extern "C" fn fb_oracle_mermin_sum(oracle: *const FbOracle, num: *mut i64, den: *mut i64) -> FbStatus {
    guard(|| {
        let o = as_ref(oracle, "oracle")?;
        let rep = mermin_sum(&o.table).map_err(invalid)?;
        split_rational(rep.mermin_sum.exact().expect("exact source"), num, den)
    })
}

/// Renders the oracle report. Free the result with [`fb_string_free`].
///
/// # Safety
/// `oracle` must be a live handle, `format` NULL or NUL-terminated, `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn fb_oracle_report(oracle: *const FbOracle, format: *const c_char, out: *mut *mut c_char) -> FbStatus {
    guard(|| {
        let o = as_ref(oracle, "oracle")?;
        let format = format_arg(format)?;
        let command = Command::Oracle {
            params: o.params,
            mode: o.mode,
            source: o.source,
        };
        let results = flicker_bell::report::execute(&command).map_err(|e| (FbStatus::Runtime, e.to_string()))?;
        into_c_string(emit_report(&results, format), out)
    })
}

/// Minimum of the same-colour sum over local deterministic strategies.
///
/// # Safety
/// `num` and `den` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fb_local_strategy_bound(num: *mut i64, den: *mut i64) -> FbStatus {
    guard(|| split_rational(local_strategy_bound(), num, den))
}

/// Quantum same-colour probability for switch angles in degrees.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fb_qm_same_color_probability(kind: u32, angle_a: f64, angle_b: f64, out: *mut f64) -> FbStatus {
    guard(|| {
        let kind = match kind {
            FB_PARTICLE_PHOTON => ParticleKind::Photon,
            FB_PARTICLE_SPIN_HALF => ParticleKind::SpinHalf,
            other => return Err(invalid(format!("invalid particle kind {other}"))),
        };
        if !(angle_a.is_finite() && angle_b.is_finite()) {
            return Err(invalid("angles must be finite"));
        }
        *as_mut(out, "out")? = qm_same_color_probability(kind, angle_a, angle_b);
        Ok(())
    })
}

/// Collapse time in seconds for `n_particles` of relative mass `mass_ratio`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fb_csl_collapse_time(n_particles: f64, mass_ratio: f64, out: *mut f64) -> FbStatus {
    guard(|| {
        let est = csl_collapse_time(n_particles, mass_ratio).map_err(invalid)?;
        *as_mut(out, "out")? = est.collapse_time;
        Ok(())
    })
}
