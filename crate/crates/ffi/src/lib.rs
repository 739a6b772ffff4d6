//! C ABI over the shorthaul model.
//!
//! Every fallible function returns an [`ShStatus`] and writes results through out-pointers.
//! On failure the message is kept per thread and can be read with [`sh_last_error_message`].
//! Handles are opaque and must be released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use shorthaul::emissions::{self, EmissionsLedger};
use shorthaul::propulsion::{self, LimitKind};
use shorthaul::registry::Registry;
use shorthaul::{Error, ModelParameters};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotFound = 3,
    Io = 4,
    Parse = 5,
    /// The model has no answer for these inputs, e.g. no mass left for a battery.
    Infeasible = 6,
    Internal = 7,
}

/// Weight limit used for exceedance and requisite density.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShLimit {
    Mlw = 0,
    Mtow = 1,
}

fn limit_kind(raw: u32) -> FfiResult<LimitKind> {
    match raw {
        x if x == ShLimit::Mlw as u32 => Ok(LimitKind::Mlw),
        x if x == ShLimit::Mtow as u32 => Ok(LimitKind::Mtow),
        other => Err(Fail(ShStatus::InvalidArgument, format!("unknown limit {other}"))),
    }
}

/// Model constants; start from `sh_params_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShParams {
    pub lhv_mj_per_kg: f64,
    pub eta_fossil: f64,
    pub eta_electric: f64,
    pub wh_per_mj: f64,
    pub battery_density_wh_per_kg: f64,
    pub pax_mass_kg: f64,
    pub ci_fuel_kg_per_kg: f64,
    pub short_haul_nm: f64,
    pub dirty_grid_g_per_kwh: f64,
}

impl From<ModelParameters> for ShParams {
    fn from(p: ModelParameters) -> Self {
        ShParams {
            lhv_mj_per_kg: p.lhv_mj_per_kg,
            eta_fossil: p.eta_fossil,
            eta_electric: p.eta_electric,
            wh_per_mj: p.wh_per_mj,
            battery_density_wh_per_kg: p.battery_density_wh_per_kg,
            pax_mass_kg: p.pax_mass_kg,
            ci_fuel_kg_per_kg: p.ci_fuel_kg_per_kg,
            short_haul_nm: p.short_haul_nm,
            dirty_grid_g_per_kwh: p.dirty_grid_g_per_kwh,
        }
    }
}

impl From<&ShParams> for ModelParameters {
    fn from(p: &ShParams) -> Self {
        ModelParameters {
            lhv_mj_per_kg: p.lhv_mj_per_kg,
            eta_fossil: p.eta_fossil,
            eta_electric: p.eta_electric,
            wh_per_mj: p.wh_per_mj,
            battery_density_wh_per_kg: p.battery_density_wh_per_kg,
            pax_mass_kg: p.pax_mass_kg,
            ci_fuel_kg_per_kg: p.ci_fuel_kg_per_kg,
            short_haul_nm: p.short_haul_nm,
            dirty_grid_g_per_kwh: p.dirty_grid_g_per_kwh,
        }
    }
}

/// Opaque aircraft registry.
pub struct ShRegistry(Registry);

/// Opaque per-country emissions ledger.
pub struct ShLedger(EmissionsLedger);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> ShStatus {
    match e {
        Error::Io { .. } => ShStatus::Io,
        Error::Csv(_)
        | Error::Json(_)
        | Error::MissingColumn { .. }
        | Error::HeaderMismatch { .. }
        | Error::NoAircraftRows
        | Error::DuplicateCode { .. }
        | Error::NonPositive { .. }
        | Error::MlwExceedsMtow { .. }
        | Error::PayloadExceedsMtow { .. }
        | Error::Row { .. }
        | Error::Config(_) => ShStatus::Parse,
        Error::UnknownAircraft(_) | Error::UnknownCountry(_) | Error::MissingCurve(_) => ShStatus::NotFound,
        Error::NoBatteryAllowance { .. } | Error::ZeroEnergy | Error::DegenerateRecovery { .. } | Error::Fit { .. } => {
            ShStatus::Infeasible
        }
        Error::InvalidParameter { .. }
        | Error::Negative(..)
        | Error::FractionOutOfRange(_)
        | Error::Coordinate(_) => ShStatus::InvalidArgument,
        Error::Invariant(_) => ShStatus::Internal,
    }
}

struct Fail(ShStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

type FfiResult<T> = Result<T, Fail>;

/// Runs `f`, converting errors and panics into a status code and the thread's last error.
fn guard(f: impl FnOnce() -> FfiResult<()>) -> ShStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            ShStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".to_string());
            ShStatus::Internal
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref()
        .ok_or_else(|| Fail(ShStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> FfiResult<&'a mut T> {
    p.as_mut()
        .ok_or_else(|| Fail(ShStatus::NullPointer, format!("{what} is null")))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Fail(ShStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(ShStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn params(p: *const ShParams) -> FfiResult<ModelParameters> {
    let p = ModelParameters::from(deref(p, "params")?);
    p.validate()?;
    Ok(p)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default model constants.
#[no_mangle]
pub extern "C" fn sh_params_default() -> ShParams {
    ModelParameters::default().into()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated, truncated to
/// `len`) and returns the full message length excluding the NUL. `buf` may be null to query
/// the length.
///
/// # Safety
/// `buf` must be null or point to at least `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sh_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Battery mass (kg) replacing `fuel_kg` of kerosene.
///
/// # Safety
/// `params` and `out_mass_kg` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sh_battery_mass(fuel_kg: f64, params: *const ShParams, out_mass_kg: *mut f64) -> ShStatus {
    guard(|| {
        let p = self::params(params)?;
        *out(out_mass_kg, "out_mass_kg")? = propulsion::battery_requirement(fuel_kg, &p)?.battery_mass_kg;
        Ok(())
    })
}

/// Grid intensity (g/kWh) at which electric and kerosene emissions are equal.
///
/// # Safety
/// `params` and `out_g_per_kwh` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sh_closed_form_tipping(params: *const ShParams, out_g_per_kwh: *mut f64) -> ShStatus {
    guard(|| {
        let p = self::params(params)?;
        *out(out_g_per_kwh, "out_g_per_kwh")? = p.closed_form_tipping_g_per_kwh();
        Ok(())
    })
}

/// Loads the bundled 47-aircraft registry.
///
/// # Safety
/// `out_registry` must be a valid pointer; the handle written there must be freed with
/// `sh_registry_free`.
#[no_mangle]
pub unsafe extern "C" fn sh_registry_bundled(out_registry: *mut *mut ShRegistry) -> ShStatus {
    guard(|| {
        let slot = out(out_registry, "out_registry")?;
        *slot = Box::into_raw(Box::new(ShRegistry(Registry::bundled())));
        Ok(())
    })
}

/// Loads an aircraft registry CSV.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out_registry` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sh_registry_open(path: *const c_char, out_registry: *mut *mut ShRegistry) -> ShStatus {
    guard(|| {
        let path = text(path, "path")?;
        let slot = out(out_registry, "out_registry")?;
        *slot = Box::into_raw(Box::new(ShRegistry(Registry::from_path(Path::new(path))?)));
        Ok(())
    })
}

/// Number of aircraft models, or 0 for a null handle.
///
/// # Safety
/// `registry` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sh_registry_len(registry: *const ShRegistry) -> usize {
    registry.as_ref().map_or(0, |r| r.0.len())
}

/// # Safety
/// `registry` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sh_registry_free(registry: *mut ShRegistry) {
    if !registry.is_null() {
        drop(Box::from_raw(registry));
    }
}

/// Loaded mass over the weight limit for aircraft `code` with a full battery. `limit` is an
/// `ShLimit` value.
///
/// # Safety
/// All pointers must be valid; `code` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sh_exceedance(
    registry: *const ShRegistry,
    code: *const c_char,
    params: *const ShParams,
    limit: u32,
    out_ratio: *mut f64,
) -> ShStatus {
    guard(|| {
        let r = deref(registry, "registry")?;
        let m = r.0.require(text(code, "code")?)?;
        let p = self::params(params)?;
        *out(out_ratio, "out_ratio")? = propulsion::exceedance(m, &p, limit_kind(limit)?)?.ratio;
        Ok(())
    })
}

/// Battery density (Wh/kg) at which aircraft `code` lands exactly at the `ShLimit` `limit`.
///
/// # Safety
/// All pointers must be valid; `code` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sh_requisite_density(
    registry: *const ShRegistry,
    code: *const c_char,
    params: *const ShParams,
    limit: u32,
    out_wh_per_kg: *mut f64,
) -> ShStatus {
    guard(|| {
        let r = deref(registry, "registry")?;
        let m = r.0.require(text(code, "code")?)?;
        let p = self::params(params)?;
        *out(out_wh_per_kg, "out_wh_per_kg")? = propulsion::requisite_density(m, &p, limit_kind(limit)?)?;
        Ok(())
    })
}

/// Loads the bundled per-country ledger.
///
/// # Safety
/// `params` and `out_ledger` must be valid pointers; free the handle with `sh_ledger_free`.
#[no_mangle]
pub unsafe extern "C" fn sh_ledger_bundled(params: *const ShParams, out_ledger: *mut *mut ShLedger) -> ShStatus {
    guard(|| {
        let p = self::params(params)?;
        let slot = out(out_ledger, "out_ledger")?;
        *slot = Box::into_raw(Box::new(ShLedger(EmissionsLedger::bundled(&p))));
        Ok(())
    })
}

/// Loads a per-country ledger CSV.
///
/// # Safety
/// `path` must be NUL-terminated; `params` and `out_ledger` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sh_ledger_open(
    path: *const c_char,
    params: *const ShParams,
    out_ledger: *mut *mut ShLedger,
) -> ShStatus {
    guard(|| {
        let path = text(path, "path")?;
        let p = self::params(params)?;
        let slot = out(out_ledger, "out_ledger")?;
        let file = std::fs::File::open(path).map_err(|e| Fail(ShStatus::Io, format!("{path}: {e}")))?;
        let rows = emissions::load_country_rows(file)?;
        *slot = Box::into_raw(Box::new(ShLedger(EmissionsLedger::from_published(&rows, &p))));
        Ok(())
    })
}

/// Number of countries, or 0 for a null handle.
///
/// # Safety
/// `ledger` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sh_ledger_len(ledger: *const ShLedger) -> usize {
    ledger.as_ref().map_or(0, |l| l.0.rows.len())
}

/// Net savings over all countries, kg CO2e (negative means a net increase).
///
/// # Safety
/// `ledger` and `out_kg` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sh_ledger_global_net_kg(ledger: *const ShLedger, out_kg: *mut f64) -> ShStatus {
    guard(|| {
        *out(out_kg, "out_kg")? = deref(ledger, "ledger")?.0.global_net_kg();
        Ok(())
    })
}

/// Savings change for `country` when its grid gets `fraction` cleaner. `out_relative_pct`
/// is set to NaN when the country's savings are zero.
///
/// # Safety
/// All pointers must be valid; `country` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sh_ledger_scenario(
    ledger: *const ShLedger,
    country: *const c_char,
    fraction: f64,
    out_absolute_kg: *mut f64,
    out_relative_pct: *mut f64,
) -> ShStatus {
    guard(|| {
        let l = deref(ledger, "ledger")?;
        let row = l.0.require(text(country, "country")?)?;
        let s = emissions::improvement_scenario(row, fraction)?;
        let abs = out(out_absolute_kg, "out_absolute_kg")?;
        let rel = out(out_relative_pct, "out_relative_pct")?;
        *abs = s.absolute_delta_kg;
        *rel = s.relative_delta_pct.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// # Safety
/// `ledger` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sh_ledger_free(ledger: *mut ShLedger) {
    if !ledger.is_null() {
        drop(Box::from_raw(ledger));
    }
}
