//! C ABI for `qubit-curvature`.
//!
//! Every function returns a [`QcStatus`]; results go through out-pointers.
//! On failure, `qc_last_error_message` describes the most recent error on the
//! calling thread. Handles (`QcScenario`, `QcTrajectory`) are opaque and must
//! be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::Vector3;
use qubit_curvature::dynamics::{arc_length_closed, transport_phase_closed, TimeGrid};
use qubit_curvature::fields::{parallel_transverse_ratio, two_parameter_field, FieldSpec};
use qubit_curvature::geometry::{self, GeometryRecord};
use qubit_curvature::qubit::BlochVector;
use qubit_curvature::series::simulate_series;
use qubit_curvature::special::elliptic_e;
use qubit_curvature::{Error, ScenarioParams};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ContractViolation = 3,
    NumericalConsistency = 4,
    Singularity = 5,
    Instability = 6,
    UndefinedEfficiency = 7,
    Domain = 8,
    Convergence = 9,
    Io = 10,
    IndexOutOfRange = 11,
    Panic = 12,
}

impl From<&Error> for QcStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidArgument(_) => QcStatus::InvalidArgument,
            Error::ContractViolation(_) => QcStatus::ContractViolation,
            Error::NumericalConsistency(_) => QcStatus::NumericalConsistency,
            Error::Singularity(_) => QcStatus::Singularity,
            Error::Instability { .. } => QcStatus::Instability,
            Error::UndefinedEfficiency(_) => QcStatus::UndefinedEfficiency,
            Error::Domain(_) => QcStatus::Domain,
            Error::Convergence(_) => QcStatus::Convergence,
            Error::Io(_) => QcStatus::Io,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QcVec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<Vector3<f64>> for QcVec3 {
    fn from(v: Vector3<f64>) -> Self {
        QcVec3 { x: v.x, y: v.y, z: v.z }
    }
}

impl From<QcVec3> for Vector3<f64> {
    fn from(v: QcVec3) -> Self {
        Vector3::new(v.x, v.y, v.z)
    }
}

/// One grid node of a simulated trajectory.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QcRecord {
    pub t: f64,
    /// Bloch vector of the integrated state.
    pub a: QcVec3,
    pub h: QcVec3,
    pub v: f64,
    pub acc: f64,
    pub kappa2_closed: f64,
    pub kappa2_bloch: f64,
    pub kappa2_expect: f64,
    pub ratio: f64,
    pub eta_se: f64,
    pub arc_length: f64,
    pub beta_phase: f64,
}

impl From<&GeometryRecord> for QcRecord {
    fn from(r: &GeometryRecord) -> Self {
        QcRecord {
            t: r.t,
            a: (*r.a.as_vec()).into(),
            h: r.h.into(),
            v: r.v,
            acc: r.acc,
            kappa2_closed: r.kappa2_closed,
            kappa2_bloch: r.kappa2_bloch,
            kappa2_expect: r.kappa2_expect,
            ratio: r.ratio,
            eta_se: r.eta_se,
            arc_length: r.s,
            beta_phase: r.beta,
        }
    }
}

/// Extrema over one period and their first attainment times in `[0, T)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QcExtrema {
    pub v_max: f64,
    pub t_vmax: f64,
    pub v_min: f64,
    pub t_vmin: f64,
    pub acc_max: f64,
    pub t_accmax: f64,
    pub acc_min: f64,
    pub t_accmin: f64,
    pub kappa2_max: f64,
    pub t_k2max: f64,
    pub kappa2_min: f64,
    pub t_k2min: f64,
    pub ratio_max: f64,
    pub t_ratiomax: f64,
    pub ratio_min: f64,
    pub t_ratiomin: f64,
    pub period: f64,
}

/// Built-in two-parameter scenario.
pub struct QcScenario {
    params: ScenarioParams,
}

/// Simulated time series.
pub struct QcTrajectory {
    records: Vec<GeometryRecord>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

enum Failure {
    Status(QcStatus, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(QcStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, turning errors and panics into a status and a message.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> QcStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => QcStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            QcStatus::from(&e)
        }
        Ok(Err(Failure::Status(status, message))) => {
            set_last_error(message);
            status
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {message}"));
            QcStatus::Panic
        }
    }
}

/// # Safety
/// `out` must be null or valid for writes.
unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// # Safety
/// `p` must be null or point to a live value.
unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message for the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next `qc_` call on the same thread.
#[no_mangle]
pub extern "C" fn qc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static, nul-terminated name of a status code.
#[no_mangle]
pub extern "C" fn qc_status_name(status: QcStatus) -> *const c_char {
    let name: &'static [u8] = match status {
        QcStatus::Ok => b"ok\0",
        QcStatus::NullPointer => b"null pointer\0",
        QcStatus::InvalidArgument => b"invalid argument\0",
        QcStatus::ContractViolation => b"contract violation\0",
        QcStatus::NumericalConsistency => b"numerical consistency\0",
        QcStatus::Singularity => b"singularity\0",
        QcStatus::Instability => b"instability\0",
        QcStatus::UndefinedEfficiency => b"undefined efficiency\0",
        QcStatus::Domain => b"domain error\0",
        QcStatus::Convergence => b"convergence failure\0",
        QcStatus::Io => b"i/o error\0",
        QcStatus::IndexOutOfRange => b"index out of range\0",
        QcStatus::Panic => b"internal panic\0",
    };
    name.as_ptr().cast()
}

/// Creates a scenario with precession rate `omega0 > 0` and rotation rate
/// `nu0 >= 0`. Release with `qc_scenario_free`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qc_scenario_new(omega0: f64, nu0: f64, out: *mut *mut QcScenario) -> QcStatus {
    guard(|| {
        let params = ScenarioParams::new(omega0, nu0)?;
        write(out, Box::into_raw(Box::new(QcScenario { params })), "out")
    })
}

/// # Safety
/// `scenario` must be null or come from `qc_scenario_new`, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qc_scenario_free(scenario: *mut QcScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Shared shape of the scalar observables `f(scenario, t)`.
unsafe fn scalar(
    scenario: *const QcScenario,
    out: *mut f64,
    f: impl FnOnce(&ScenarioParams) -> Result<f64, Error>,
) -> QcStatus {
    guard(|| {
        let s = borrow(scenario, "scenario")?;
        let value = f(&s.params)?;
        write(out, value, "out")
    })
}

/// Evolution speed `v(t)`.
///
/// # Safety
/// `scenario` must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qc_speed(scenario: *const QcScenario, t: f64, out: *mut f64) -> QcStatus {
    scalar(scenario, out, |p| Ok(geometry::speed(p, t)))
}

/// Acceleration `dv/dt`.
///
/// # Safety
/// `scenario` must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qc_acceleration(scenario: *const QcScenario, t: f64, out: *mut f64) -> QcStatus {
    scalar(scenario, out, |p| Ok(geometry::acceleration(p, t)))
}

/// Closed-form curvature coefficient.
///
/// # Safety
/// `scenario` must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qc_curvature_closed(scenario: *const QcScenario, t: f64, out: *mut f64) -> QcStatus {
    scalar(scenario, out, |p| Ok(geometry::curvature_closed(p, t)))
}

/// Squared ratio of the field components parallel and perpendicular to z.
///
/// # Safety
/// `scenario` must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qc_field_ratio(scenario: *const QcScenario, t: f64, out: *mut f64) -> QcStatus {
    scalar(scenario, out, |p| Ok(parallel_transverse_ratio(p, t)))
}

/// Transport phase `phi(t)` of the parallel-transported state.
///
/// # Safety
/// `scenario` must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qc_transport_phase(scenario: *const QcScenario, t: f64, out: *mut f64) -> QcStatus {
    scalar(scenario, out, |p| Ok(transport_phase_closed(p, t)))
}

/// Arc length travelled in `[0, t]`, `t >= 0`.
///
/// # Safety
/// `scenario` must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qc_arc_length(scenario: *const QcScenario, t: f64, out: *mut f64) -> QcStatus {
    scalar(scenario, out, |p| arc_length_closed(p, t))
}

/// Geodesic efficiency between the orthogonal states at `0` and `pi/(2 omega0)`.
///
/// # Safety
/// `scenario` must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qc_geodesic_efficiency(scenario: *const QcScenario, out: *mut f64) -> QcStatus {
    scalar(scenario, out, |p| Ok(geometry::geodesic_efficiency(p)))
}

/// Field `h(t)` and its time derivative. Either out-pointer may be null.
///
/// # Safety
/// `scenario` must be live; non-null out-pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qc_field(scenario: *const QcScenario, t: f64, h: *mut QcVec3, h_dot: *mut QcVec3) -> QcStatus {
    guard(|| {
        let s = borrow(scenario, "scenario")?;
        let f = two_parameter_field(&s.params, t);
        if !h.is_null() {
            h.write(f.h.into());
        }
        if !h_dot.is_null() {
            h_dot.write(f.h_dot.into());
        }
        Ok(())
    })
}

/// Extrema summary over one period.
///
/// # Safety
/// `scenario` must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qc_extrema(scenario: *const QcScenario, out: *mut QcExtrema) -> QcStatus {
    guard(|| {
        let s = geometry::extrema_summary(&borrow(scenario, "scenario")?.params);
        let extrema = QcExtrema {
            v_max: s.v_max,
            t_vmax: s.t_vmax,
            v_min: s.v_min,
            t_vmin: s.t_vmin,
            acc_max: s.acc_max,
            t_accmax: s.t_accmax,
            acc_min: s.acc_min,
            t_accmin: s.t_accmin,
            kappa2_max: s.kappa2_max,
            t_k2max: s.t_k2max,
            kappa2_min: s.kappa2_min,
            t_k2min: s.t_k2min,
            ratio_max: s.ratio_max,
            t_ratiomax: s.t_ratiomax,
            ratio_min: s.ratio_min,
            t_ratiomin: s.t_ratiomin,
            period: s.period,
        };
        write(out, extrema, "out")
    })
}

/// Curvature coefficient of any evolution from the unit Bloch vector `a`,
/// the field `h` and its derivative `h_dot`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qc_curvature_bloch(a: QcVec3, h: QcVec3, h_dot: QcVec3, out: *mut f64) -> QcStatus {
    guard(|| {
        let a = BlochVector::new(a.x, a.y, a.z)?;
        let k = geometry::curvature_bloch(&a, &h.into(), &h_dot.into())?;
        write(out, k, "out")
    })
}

/// Speed efficiency of `H = h0 I + h . sigma` on the state with Bloch vector `a`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qc_speed_efficiency(h0: f64, h: QcVec3, a: QcVec3, out: *mut f64) -> QcStatus {
    guard(|| {
        let a = BlochVector::new(a.x, a.y, a.z)?;
        let eta = geometry::speed_efficiency(h0, &h.into(), &a)?;
        write(out, eta, "out")
    })
}

/// Complete elliptic integral of the second kind, parameter convention, `m <= 1`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qc_elliptic_e(m: f64, out: *mut f64) -> QcStatus {
    guard(|| write(out, elliptic_e(m)?, "out"))
}

/// Integrates the scenario from `|0>` on `steps` equal steps over
/// `[0, t_max]` and evaluates every observable at each node.
/// Release with `qc_trajectory_free`.
///
/// # Safety
/// `scenario` must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qc_simulate(
    scenario: *const QcScenario,
    t_max: f64,
    steps: usize,
    out: *mut *mut QcTrajectory,
) -> QcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = borrow(scenario, "scenario")?.params;
        let grid = TimeGrid::new(0.0, t_max, steps)?;
        let (_, records) = simulate_series(&params, &FieldSpec::TwoParameter(params), &grid)?;
        write(out, Box::into_raw(Box::new(QcTrajectory { records })), "out")
    })
}

/// Number of grid nodes (steps + 1); 0 for a null handle.
///
/// # Safety
/// `trajectory` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn qc_trajectory_len(trajectory: *const QcTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| t.records.len())
}

/// # Safety
/// `trajectory` must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qc_trajectory_record(
    trajectory: *const QcTrajectory,
    index: usize,
    out: *mut QcRecord,
) -> QcStatus {
    guard(|| {
        let traj = borrow(trajectory, "trajectory")?;
        let record = traj.records.get(index).ok_or_else(|| {
            Failure::Status(
                QcStatus::IndexOutOfRange,
                format!("index {index} out of range for {} records", traj.records.len()),
            )
        })?;
        write(out, QcRecord::from(record), "out")
    })
}

/// # Safety
/// `trajectory` must be null or come from `qc_simulate`, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qc_trajectory_free(trajectory: *mut QcTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}
