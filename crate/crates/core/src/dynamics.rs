//! Time evolution of a qubit in a field: fixed-step RK4 for the Schrodinger
//! equation and for the Bloch precession `a' = 2 h x a`, the closed-form
//! solution of the built-in scenario, and the transport phase / arc length
//! bookkeeping along a trajectory.
//!
//! Phase convention: [`Trajectory::beta`] is the dynamical phase
//! `beta(t) = integral_0^t <psi|H|psi> dt'`, so that `exp(i beta) |psi>` is
//! parallel transported. For the built-in field `<H> = a . h = 0` and the
//! evolved state is already parallel transported, hence `beta = 0`. The phase
//! that relates the parallel-transported state to the angle-parametrized state
//! `cos(w t)|0> + exp(i nu t) sin(w t)|1>` is `-phi(t)` with `phi` from
//! [`transport_phase_closed`].

use nalgebra::{Vector2, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{FieldSpec, ScenarioParams};
use crate::geometry;
use crate::qubit::{BlochVector, Operator, QubitState};
use crate::special::adaptive_simpson;

/// Largest per-step norm correction tolerated before an integration is
/// declared unstable.
pub const MAX_STEP_DRIFT: f64 = 1e-6;

/// Tolerance on `|<m|m'>|` accepted by [`synthesize_hamiltonian`].
pub const TRANSPORT_TOLERANCE: f64 = 1e-8;

/// Uniform grid `t0, t0 + dt, ..., t1` with `steps + 1` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t1: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, steps: usize) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
            return Err(Error::InvalidArgument(format!(
                "time grid needs t1 > t0, got [{t0}, {t1}]"
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidArgument("time grid needs at least one step".into()));
        }
        Ok(Self { t0, t1, steps })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    /// Number of nodes, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Time of node `i`; the last node is exactly `t1`.
    pub fn time(&self, i: usize) -> f64 {
        if i == self.steps {
            self.t1
        } else {
            self.t0 + i as f64 * self.dt()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.time(i))
    }
}

/// Samples of one Schrodinger integration.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<QubitState>,
    pub bloch: Vec<BlochVector>,
    /// Dynamical phase `integral <psi|H|psi> dt` (trapezoidal).
    pub beta: Vec<f64>,
    /// Arc length `integral sqrt(<H^2> - <H>^2) dt` (trapezoidal).
    pub arc: Vec<f64>,
    /// Largest per-step renormalization correction seen.
    pub max_norm_drift: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.grid.times()
    }
}

const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

fn schrodinger_rhs(spec: &FieldSpec, t: f64, psi: &Vector2<Complex64>) -> Vector2<Complex64> {
    let h: Operator = spec.hamiltonian(t).compose();
    (h * psi) * MINUS_I
}

fn rk4_schrodinger(spec: &FieldSpec, t: f64, psi: &Vector2<Complex64>, dt: f64) -> Vector2<Complex64> {
    let half = Complex64::new(0.5 * dt, 0.0);
    let full = Complex64::new(dt, 0.0);
    let k1 = schrodinger_rhs(spec, t, psi);
    let k2 = schrodinger_rhs(spec, t + 0.5 * dt, &(psi + k1 * half));
    let k3 = schrodinger_rhs(spec, t + 0.5 * dt, &(psi + k2 * half));
    let k4 = schrodinger_rhs(spec, t + dt, &(psi + k3 * full));
    psi + (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4) * Complex64::new(dt / 6.0, 0.0)
}

/// One RK4 step of `i psi' = H(t) psi` from `t` to `t + dt` (`dt` may be
/// negative). Returns the renormalized state and the norm correction applied.
pub fn propagate(spec: &FieldSpec, state: &QubitState, t: f64, dt: f64) -> Result<(QubitState, f64)> {
    let next = rk4_schrodinger(spec, t, &state.as_vector(), dt);
    let drift = (next.norm() - 1.0).abs();
    Ok((QubitState::normalized(next[0], next[1])?, drift))
}

/// Integrates `i psi' = H(t) psi` (hbar = 1) with classical fixed-step RK4,
/// renormalizing after every step.
pub fn integrate_schrodinger(spec: &FieldSpec, psi0: &QubitState, grid: &TimeGrid) -> Result<Trajectory> {
    let dt = grid.dt();
    let mut states = Vec::with_capacity(grid.len());
    let mut bloch = Vec::with_capacity(grid.len());
    let mut beta = Vec::with_capacity(grid.len());
    let mut arc = Vec::with_capacity(grid.len());
    let mut max_norm_drift: f64 = 0.0;

    let moments = |state: &QubitState, t: f64| -> (BlochVector, f64, f64) {
        let a = state.bloch();
        let h = spec.hamiltonian(t);
        // |h x a| = sqrt(h^2 - (a.h)^2) for unit a, without cancellation
        (a, h.h0 + a.as_vec().dot(&h.h), h.h.cross(a.as_vec()).norm())
    };

    let mut state = *psi0;
    let (a, mut mean_prev, mut speed_prev) = moments(&state, grid.t0());
    states.push(state);
    bloch.push(a);
    beta.push(0.0);
    arc.push(0.0);

    for step in 0..grid.steps() {
        let t = grid.time(step);
        let (next, drift) = propagate(spec, &state, t, dt)?;
        log::trace!("schrodinger step {step}: norm drift {drift:.3e}");
        if drift > MAX_STEP_DRIFT {
            return Err(Error::Instability { step, drift });
        }
        max_norm_drift = max_norm_drift.max(drift);
        state = next;

        let (a, mean, speed) = moments(&state, grid.time(step + 1));
        let b = beta[step] + 0.5 * dt * (mean_prev + mean);
        let s = arc[step] + 0.5 * dt * (speed_prev + speed);
        states.push(state);
        bloch.push(a);
        beta.push(b);
        arc.push(s);
        mean_prev = mean;
        speed_prev = speed;
    }
    log::debug!(
        "integrated {} Schrodinger steps, max norm drift {max_norm_drift:.3e}",
        grid.steps()
    );

    Ok(Trajectory {
        grid: *grid,
        states,
        bloch,
        beta,
        arc,
        max_norm_drift,
    })
}

/// Integrates the precession `r' = Omega(t) x r` with RK4, renormalizing each
/// step. This is the real three-dimensional form of the two-level dynamics.
pub fn integrate_precession<F>(omega: F, r0: &BlochVector, grid: &TimeGrid) -> Result<Vec<BlochVector>>
where
    F: Fn(f64) -> Vector3<f64>,
{
    let dt = grid.dt();
    let rhs = |t: f64, r: &Vector3<f64>| omega(t).cross(r);
    let mut out = Vec::with_capacity(grid.len());
    out.push(*r0);
    let mut r = *r0.as_vec();
    for step in 0..grid.steps() {
        let t = grid.time(step);
        let k1 = rhs(t, &r);
        let k2 = rhs(t + 0.5 * dt, &(r + k1 * (0.5 * dt)));
        let k3 = rhs(t + 0.5 * dt, &(r + k2 * (0.5 * dt)));
        let k4 = rhs(t + dt, &(r + k3 * dt));
        let next = r + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        let drift = (next.norm() - 1.0).abs();
        if drift > MAX_STEP_DRIFT {
            return Err(Error::Instability { step, drift });
        }
        let a = BlochVector::normalized(next)?;
        r = *a.as_vec();
        out.push(a);
    }
    Ok(out)
}

/// Integrates `a' = 2 h(t) x a`.
pub fn integrate_bloch(spec: &FieldSpec, a0: &BlochVector, grid: &TimeGrid) -> Result<Vec<BlochVector>> {
    integrate_precession(|t| spec.value(t).1 * 2.0, a0, grid)
}

/// `phi(t) = (nu0 / 4 omega0) [2 omega0 t - sin(2 omega0 t)]`, the phase that
/// parallel transports the angle-parametrized state of the built-in scenario.
pub fn transport_phase_closed(params: &ScenarioParams, t: f64) -> f64 {
    let w = params.omega0();
    params.nu0() / (4.0 * w) * (2.0 * w * t - (2.0 * w * t).sin())
}

/// Parallel-transported state of the built-in scenario,
/// `exp(-i phi(t)) [cos(w t)|0> + exp(i nu t) sin(w t)|1>]`.
pub fn analytic_state(params: &ScenarioParams, t: f64) -> QubitState {
    let phi = transport_phase_closed(params, t);
    let (s, c) = (params.omega0() * t).sin_cos();
    QubitState::new(
        Complex64::from_polar(c, -phi),
        Complex64::from_polar(s, params.nu0() * t - phi),
    )
    .expect("analytic state is normalized")
}

/// `(sin 2wt cos nu t, sin nu t sin 2wt, cos 2wt)`.
pub fn analytic_bloch(params: &ScenarioParams, t: f64) -> BlochVector {
    let (s, c) = (2.0 * params.omega0() * t).sin_cos();
    let (sn, cn) = (params.nu0() * t).sin_cos();
    BlochVector::new(s * cn, sn * s, c).expect("analytic Bloch vector has unit norm")
}

/// `s(t) = integral_0^t v(t') dt'` for the built-in scenario, by adaptive
/// Simpson quadrature of the closed-form speed to 1e-10.
pub fn arc_length_closed(params: &ScenarioParams, t: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("arc length needs t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if params.nu0() == 0.0 {
        return Ok(params.omega0() * t);
    }
    Ok(adaptive_simpson(|s| geometry::speed(params, s), 0.0, t, 1e-10)?.value)
}

/// `H = i|m'><m| - i|m><m'|`, the traceless Hamiltonian that drives the
/// parallel-transported `|m>` with unit speed efficiency.
///
/// The component of `m'` along `m` (at most [`TRANSPORT_TOLERANCE`]) is
/// projected out first, so the result is traceless to round-off.
pub fn synthesize_hamiltonian(m: &QubitState, m_dot: &Vector2<Complex64>) -> Result<Operator> {
    let mv = m.as_vector();
    let overlap = mv.dotc(m_dot);
    if overlap.norm() > TRANSPORT_TOLERANCE {
        return Err(Error::ContractViolation(format!(
            "state is not parallel transported: |<m|m'>| = {:e}",
            overlap.norm()
        )));
    }
    let transverse = m_dot - mv * overlap;
    let i = Complex64::new(0.0, 1.0);
    Ok((transverse * mv.adjoint() - mv * transverse.adjoint()) * i)
}
