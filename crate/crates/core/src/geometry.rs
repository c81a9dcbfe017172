//! Geometric observables of a qubit evolution: speed, acceleration, the
//! curvature coefficient by three independent routes, speed and geodesic
//! efficiencies, and the extrema of the built-in scenario.
//!
//! Speed is `v = Delta E / hbar` (the Fubini-Study convention with unit
//! prefactor). Curvature routes:
//!
//! * [`curvature_closed`]: closed form in `(omega0, nu0, t)` for the built-in field;
//! * [`curvature_bloch`]: any field, from the Bloch vector `a` and `h`, `h'`;
//! * [`curvature_expectation`]: any field, from operator expectation values
//!   along the Schrodinger flow.

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::dynamics::{propagate, Trajectory};
use crate::error::{Error, Result};
use crate::fields::{FieldSpec, ScenarioParams};
use crate::qubit::{complex_expectation, expectation, identity, BlochVector, Operator, QubitState};
use crate::special::elliptic_e;

/// Below this, the Bloch-route denominator `h^2 - (a.h)^2` and the speed in
/// the expectation route are treated as zero.
pub const SINGULAR_EPS: f64 = 1e-12;

/// Round-off window for the analytic curvature routes: values in
/// `[-CLIP_TOLERANCE, 0)` become 0, anything lower is an error.
pub const CLIP_TOLERANCE: f64 = 1e-9;

/// Residue window (real-part sign and imaginary part) for the
/// finite-difference route.
pub const EXPECTATION_TOLERANCE: f64 = 1e-8;

fn clip_nonnegative(value: f64, tol: f64, route: &str) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -tol {
        Ok(0.0)
    } else {
        Err(Error::NumericalConsistency(format!(
            "{route} curvature is negative beyond round-off: {value:e}"
        )))
    }
}

/// `v(t) = omega0 sqrt(1 + (nu0/omega0)^2 sin^2(2 omega0 t) / 4)`.
pub fn speed(params: &ScenarioParams, t: f64) -> f64 {
    let w = params.omega0();
    let q = params.rate_ratio().powi(2);
    w * (1.0 + 0.25 * q * (2.0 * w * t).sin().powi(2)).sqrt()
}

/// `dv/dt = (nu0^2/4) sin(4 omega0 t) / sqrt(1 + (nu0/omega0)^2 sin^2(2 omega0 t) / 4)`.
pub fn acceleration(params: &ScenarioParams, t: f64) -> f64 {
    let w = params.omega0();
    let n = params.nu0();
    let q = params.rate_ratio().powi(2);
    0.25 * n * n * (4.0 * w * t).sin() / (1.0 + 0.25 * q * (2.0 * w * t).sin().powi(2)).sqrt()
}

/// Closed-form curvature coefficient of the built-in scenario.
///
/// With `r = (omega0/nu0)^2`:
/// `[sin^2(4wt) + 32 r (1 + cos 4wt)] / [sin^2(2wt) + 4r]^2
///   - 4 r sin^2(4wt) / [sin^2(2wt) + 4r]^3`,
/// evaluated after multiplying through by powers of `q = 1/r` so that the
/// geodesic limit `nu0 = 0` gives exactly 0.
pub fn curvature_closed(params: &ScenarioParams, t: f64) -> f64 {
    let w = params.omega0();
    let q = params.rate_ratio().powi(2);
    let s2 = (2.0 * w * t).sin().powi(2);
    let s4 = (4.0 * w * t).sin().powi(2);
    let c4 = (4.0 * w * t).cos();
    let d = q * s2 + 4.0;
    let value = q * (q * s4 + 32.0 * (1.0 + c4)) / (d * d) - 4.0 * q * q * s4 / (d * d * d);
    value.max(0.0)
}

/// The three terms of the Bloch-vector curvature formula:
///
/// 1. `4 (a.h)^2 / D`
/// 2. `([h^2 h'^2 - (h.h')^2] - |(a.h') h - (a.h) h'|^2) / D^3`
/// 3. `4 (a.h) [a.(h x h')] / D^2`
///
/// with `D = h^2 - (a.h)^2`.
pub fn curvature_bloch_terms(a: &BlochVector, h: &Vector3<f64>, h_dot: &Vector3<f64>) -> Result<[f64; 3]> {
    let a = a.as_vec();
    let ah = a.dot(h);
    let ahd = a.dot(h_dot);
    let denom = h.norm_squared() - ah * ah;
    if denom <= SINGULAR_EPS {
        return Err(Error::Singularity(format!(
            "state is an instantaneous eigenstate (h^2 - (a.h)^2 = {denom:e})"
        )));
    }
    let mixed = h * ahd - h_dot * ah;
    let bending = h.norm_squared() * h_dot.norm_squared() - h.dot(h_dot).powi(2);
    Ok([
        4.0 * ah * ah / denom,
        (bending - mixed.norm_squared()) / denom.powi(3),
        4.0 * ah * a.dot(&h.cross(h_dot)) / (denom * denom),
    ])
}

/// Curvature coefficient from the Bloch vector and the field.
pub fn curvature_bloch(a: &BlochVector, h: &Vector3<f64>, h_dot: &Vector3<f64>) -> Result<f64> {
    let terms = curvature_bloch_terms(a, h, h_dot)?;
    clip_nonnegative(terms.iter().sum(), CLIP_TOLERANCE, "Bloch-route")
}

/// `Delta h = (H - <H>) / v` and `v` for a state at time `t`.
fn normalized_deviation(spec: &FieldSpec, state: &QubitState, t: f64) -> Result<(Operator, f64)> {
    let h = spec.hamiltonian(t).compose();
    let mean = expectation(&h, state)?;
    let second = expectation(&(h * h), state)?;
    let v = (second - mean * mean).max(0.0).sqrt();
    if v <= SINGULAR_EPS {
        return Err(Error::Singularity(format!(
            "evolution speed {v:e} at t = {t} is zero; curvature undefined"
        )));
    }
    let deviation = (h - identity() * Complex64::new(mean, 0.0)) / Complex64::new(v, 0.0);
    Ok((deviation, v))
}

/// Curvature coefficient from expectation values,
/// `<dh^4> - <dh^2>^2 + <dh'^2> - <dh'>^2 + i <[dh^2, dh']>`,
/// where `dh' = d(dh)/ds = [d(dh)/dt] / v` is a central difference over
/// `t +/- dt` with the state carried along the flow by one RK4 step each way.
pub fn curvature_expectation(spec: &FieldSpec, state: &QubitState, t: f64, dt: f64) -> Result<f64> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("difference step must be > 0, got {dt}")));
    }
    let (dh, v) = normalized_deviation(spec, state, t)?;
    let (ahead, _) = propagate(spec, state, t, dt)?;
    let (behind, _) = propagate(spec, state, t, -dt)?;
    let (dh_ahead, _) = normalized_deviation(spec, &ahead, t + dt)?;
    let (dh_behind, _) = normalized_deviation(spec, &behind, t - dt)?;
    let dh_prime = (dh_ahead - dh_behind) / Complex64::new(2.0 * dt * v, 0.0);

    let ev = |m: &Operator| complex_expectation(m, state);
    let dh2 = dh * dh;
    let commutator = dh2 * dh_prime - dh_prime * dh2;
    let mean_prime = ev(&dh_prime);
    let total = ev(&(dh2 * dh2)) - ev(&dh2) * ev(&dh2) + ev(&(dh_prime * dh_prime)) - mean_prime * mean_prime
        + Complex64::new(0.0, 1.0) * ev(&commutator);

    if total.im.abs() > EXPECTATION_TOLERANCE {
        return Err(Error::NumericalConsistency(format!(
            "expectation-route curvature has imaginary residue {:e} at t = {t}",
            total.im
        )));
    }
    clip_nonnegative(total.re, EXPECTATION_TOLERANCE, "expectation-route")
}

/// Speed efficiency `sqrt(h.h - (a.h)^2) / (|h0| + |h|)`: energy uncertainty
/// over the spectral norm of `H = h0 I + h . sigma`.
pub fn speed_efficiency(h0: f64, h: &Vector3<f64>, a: &BlochVector) -> Result<f64> {
    let norm = h0.abs() + h.norm();
    if norm == 0.0 {
        return Err(Error::UndefinedEfficiency("Hamiltonian is zero".into()));
    }
    Ok(h.cross(a.as_vec()).norm() / norm)
}

/// Geodesic efficiency of the built-in evolution between the orthogonal
/// states at `t = 0` and `t = pi / (2 omega0)`:
/// `(pi/2) / E(-(nu0/omega0)^2 / 4)`.
pub fn geodesic_efficiency(params: &ScenarioParams) -> f64 {
    let m = -0.25 * params.rate_ratio().powi(2);
    std::f64::consts::FRAC_PI_2 / elliptic_e(m).expect("nonpositive parameter is in the domain of E")
}

/// `arccos |<psi(t0)|psi(t1)>| / s(t1)`: geodesic distance between the end
/// points over the path length actually travelled.
pub fn geodesic_efficiency_generic(traj: &Trajectory) -> Result<f64> {
    if traj.len() < 2 {
        return Err(Error::UndefinedEfficiency("trajectory needs at least two nodes".into()));
    }
    let path = *traj.arc.last().expect("nonempty");
    if path.is_nan() || path <= SINGULAR_EPS {
        return Err(Error::UndefinedEfficiency(format!("path length {path:e} is zero")));
    }
    let first = traj.states.first().expect("nonempty");
    let last = traj.states.last().expect("nonempty");
    let fidelity = first.fidelity(last).min(1.0);
    Ok(2.0 * fidelity.acos() / (2.0 * path))
}

/// Extrema of speed, acceleration, curvature and field ratio of the built-in
/// scenario over one period, with their first attainment times in `[0, T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremaSummary {
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

pub fn extrema_summary(params: &ScenarioParams) -> ExtremaSummary {
    use std::f64::consts::PI;
    let w = params.omega0();
    let n = params.nu0();
    let q = params.rate_ratio().powi(2);
    // With u = sin^2(2 w t) and c = q/4, acc^2 is proportional to
    // u (1 - u) / (1 + c u), stationary where c u^2 + 2u - 1 = 0.
    let c = 0.25 * q;
    let u = if c > 0.0 { 1.0 / ((1.0 + c).sqrt() + 1.0) } else { 0.5 };
    let acc_max = 0.5 * n * n * (u * (1.0 - u) / (1.0 + c * u)).sqrt();
    let t_accmax = u.sqrt().asin() / (2.0 * w);
    ExtremaSummary {
        v_max: w * (1.0 + 0.25 * q).sqrt(),
        t_vmax: PI / (4.0 * w),
        v_min: w,
        t_vmin: 0.0,
        acc_max,
        t_accmax,
        acc_min: -acc_max,
        t_accmin: params.period() - t_accmax,
        kappa2_max: 4.0 * q,
        t_k2max: 0.0,
        kappa2_min: 0.0,
        t_k2min: PI / (4.0 * w),
        ratio_max: 0.25 * q,
        t_ratiomax: PI / (4.0 * w),
        ratio_min: 0.0,
        t_ratiomin: 0.0,
        period: params.period(),
    }
}

/// Everything known about the evolution at one grid node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryRecord {
    pub t: f64,
    pub a: BlochVector,
    pub h: Vector3<f64>,
    pub v: f64,
    pub acc: f64,
    pub kappa2_closed: f64,
    pub kappa2_bloch: f64,
    pub kappa2_expect: f64,
    pub ratio: f64,
    pub eta_se: f64,
    pub s: f64,
    pub beta: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{analytic_bloch, analytic_state, integrate_schrodinger, TimeGrid};
    use crate::fields::two_parameter_field;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

    fn unit() -> ScenarioParams {
        ScenarioParams::new(1.0, 1.0).unwrap()
    }

    /// Eq. form with (omega0/nu0)^2, used as an independent transcription.
    fn curvature_textbook(w: f64, n: f64, t: f64) -> f64 {
        let r = (w / n).powi(2);
        let s2 = (2.0 * w * t).sin().powi(2);
        let s4 = (4.0 * w * t).sin().powi(2);
        let c4 = (4.0 * w * t).cos();
        (s4 + 32.0 * r * (1.0 + c4)) / (s2 + 4.0 * r).powi(2) - 4.0 * r * s4 / (s2 + 4.0 * r).powi(3)
    }

    #[test]
    fn speed_reference_values() {
        for p in [unit(), ScenarioParams::new(2.0, 0.7).unwrap()] {
            let w = p.omega0();
            assert_abs_diff_eq!(speed(&p, 0.0), w);
            let peak = w * (1.0 + 0.25 * p.rate_ratio().powi(2)).sqrt();
            assert_abs_diff_eq!(speed(&p, PI / (4.0 * w)), peak, epsilon = 1e-15);
        }
        let geo = ScenarioParams::new(1.3, 0.0).unwrap();
        assert_eq!(speed(&geo, 0.77), 1.3);
    }

    #[test]
    fn acceleration_reference_values() {
        let p = ScenarioParams::new(1.0, 2.0).unwrap();
        assert_eq!(acceleration(&p, 0.0), 0.0);
        let expected = 0.25 * 4.0 / (1.0 + 4.0 / 8.0f64).sqrt();
        assert_abs_diff_eq!(acceleration(&p, FRAC_PI_8), expected, epsilon = 1e-15);
    }

    #[test]
    fn acceleration_is_derivative_of_speed() {
        let p = unit();
        let d = 1e-5;
        let fd = (speed(&p, 0.3 + d) - speed(&p, 0.3 - d)) / (2.0 * d);
        assert_abs_diff_eq!(acceleration(&p, 0.3), fd, epsilon = 1e-8);
    }

    #[test]
    fn curvature_closed_extrema() {
        for (n, max) in [(0.5, 1.0), (1.0, 4.0), (2.0, 16.0)] {
            let p = ScenarioParams::new(1.0, n).unwrap();
            assert_abs_diff_eq!(curvature_closed(&p, 0.0), max, epsilon = 1e-12);
            assert_abs_diff_eq!(curvature_closed(&p, FRAC_PI_2), max, epsilon = 1e-12);
            assert_abs_diff_eq!(curvature_closed(&p, FRAC_PI_4), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(curvature_closed(&p, FRAC_PI_4 + FRAC_PI_2), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn curvature_closed_matches_direct_transcription() {
        for &(w, n) in &[(1.0, 1.0), (0.7, 2.2), (2.0, 0.3)] {
            let p = ScenarioParams::new(w, n).unwrap();
            for k in 0..200 {
                let t = 0.0317 * k as f64;
                assert_abs_diff_eq!(curvature_closed(&p, t), curvature_textbook(w, n, t), epsilon = 1e-11);
            }
        }
        assert_abs_diff_eq!(curvature_closed(&unit(), 0.3), 2.340_717_947_822_836, epsilon = 1e-12);
    }

    #[test]
    fn curvature_closed_geodesic_limit() {
        let p = ScenarioParams::new(1.0, 0.0).unwrap();
        assert_eq!(curvature_closed(&p, 0.4), 0.0);
    }

    #[test]
    fn bloch_route_matches_closed_form() {
        let p = unit();
        for k in 0..300 {
            let t = 0.021 * k as f64;
            let f = two_parameter_field(&p, t);
            let k_bloch = curvature_bloch(&analytic_bloch(&p, t), &f.h, &f.h_dot).unwrap();
            assert_abs_diff_eq!(k_bloch, curvature_closed(&p, t), epsilon = 1e-9);
        }
    }

    #[test]
    fn bloch_route_special_cases() {
        let a = BlochVector::new(1.0, 0.0, 0.0).unwrap();
        // a.h = 0 and h' parallel to h
        let h = Vector3::new(0.0, 2.0, 0.0);
        assert_eq!(curvature_bloch(&a, &h, &(h * 0.3)).unwrap(), 0.0);
        // stationary field with a.h != 0
        let a = BlochVector::normalized(Vector3::new(1.0, 1.0, 0.5)).unwrap();
        let h = Vector3::new(0.2, -0.4, 1.0);
        let ah = a.as_vec().dot(&h);
        let expected = 4.0 * ah * ah / (h.norm_squared() - ah * ah);
        assert_abs_diff_eq!(
            curvature_bloch(&a, &h, &Vector3::zeros()).unwrap(),
            expected,
            epsilon = 1e-15
        );
    }

    #[test]
    fn bloch_route_singular_for_eigenstates() {
        let a = BlochVector::new(0.0, 0.0, 1.0).unwrap();
        let err = curvature_bloch(&a, &Vector3::new(0.0, 0.0, 3.0), &Vector3::x()).unwrap_err();
        assert!(matches!(err, Error::Singularity(_)));
    }

    #[test]
    fn expectation_route_matches_closed_form() {
        let p = unit();
        let spec = FieldSpec::TwoParameter(p);
        let k = curvature_expectation(&spec, &analytic_state(&p, 0.3), 0.3, 1e-4).unwrap();
        assert_abs_diff_eq!(k, 2.3407, epsilon = 1e-4);
        assert_abs_diff_eq!(k, curvature_closed(&p, 0.3), epsilon = 1e-5);
    }

    #[test]
    fn expectation_route_stationary_limits() {
        // equatorial great circle: curvature zero
        let spec = FieldSpec::constant(0.0, Vector3::new(0.0, 0.0, 1.0));
        let plus = BlochVector::new(1.0, 0.0, 0.0).unwrap().to_state();
        assert_abs_diff_eq!(
            curvature_expectation(&spec, &plus, 0.0, 1e-4).unwrap(),
            0.0,
            epsilon = 1e-12
        );

        // general state: only the <dh^4> - <dh^2>^2 part survives
        let h = Vector3::new(0.3, -0.5, 0.8);
        let spec = FieldSpec::constant(0.4, h);
        let a = BlochVector::normalized(Vector3::new(0.2, 0.9, -0.1)).unwrap();
        let k = curvature_expectation(&spec, &a.to_state(), 1.0, 1e-4).unwrap();
        assert_abs_diff_eq!(k, curvature_bloch(&a, &h, &Vector3::zeros()).unwrap(), epsilon = 1e-9);
    }

    #[test]
    fn expectation_route_rejects_eigenstates_and_bad_steps() {
        let spec = FieldSpec::constant(0.0, Vector3::new(0.0, 0.0, 1.0));
        let err = curvature_expectation(&spec, &QubitState::zero(), 0.0, 1e-4).unwrap_err();
        assert!(matches!(err, Error::Singularity(_)));
        let plus = BlochVector::new(1.0, 0.0, 0.0).unwrap().to_state();
        assert!(matches!(
            curvature_expectation(&spec, &plus, 0.0, 0.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn speed_efficiency_cases() {
        let a = BlochVector::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(speed_efficiency(0.0, &Vector3::new(0.0, 1.0, 0.0), &a).unwrap(), 1.0);
        assert_eq!(speed_efficiency(0.0, &Vector3::new(2.0, 0.0, 0.0), &a).unwrap(), 0.0);
        assert_abs_diff_eq!(speed_efficiency(1.0, &Vector3::new(0.0, 1.0, 0.0), &a).unwrap(), 0.5);
        assert!(matches!(
            speed_efficiency(0.0, &Vector3::zeros(), &a),
            Err(Error::UndefinedEfficiency(_))
        ));
    }

    #[test]
    fn built_in_speed_efficiency_is_one() {
        let p = ScenarioParams::new(1.0, 2.0).unwrap();
        for k in 0..500 {
            let t = 0.0125 * k as f64;
            let f = two_parameter_field(&p, t);
            let eta = speed_efficiency(f.h0, &f.h, &analytic_bloch(&p, t)).unwrap();
            assert_abs_diff_eq!(eta, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn geodesic_efficiency_reference_values() {
        assert_eq!(geodesic_efficiency(&ScenarioParams::new(1.0, 0.0).unwrap()), 1.0);
        let eta = geodesic_efficiency(&unit());
        assert_abs_diff_eq!(eta, FRAC_PI_2 / elliptic_e(-0.25).unwrap(), epsilon = 1e-15);
        assert_abs_diff_eq!(eta, 0.944, epsilon = 5e-4);
        assert!(eta < 1.0);
        let eta2 = geodesic_efficiency(&ScenarioParams::new(1.0, 2.0).unwrap());
        let oracle = crate::special::adaptive_simpson(|t: f64| (1.0 + t.sin().powi(2)).sqrt(), 0.0, FRAC_PI_2, 1e-12)
            .unwrap()
            .value;
        assert_abs_diff_eq!(eta2, FRAC_PI_2 / oracle, epsilon = 1e-10);
    }

    #[test]
    fn generic_geodesic_efficiency_on_half_period() {
        let grid = TimeGrid::new(0.0, FRAC_PI_2, 1571).unwrap();
        let geo = ScenarioParams::new(1.0, 0.0).unwrap();
        let traj = integrate_schrodinger(&FieldSpec::TwoParameter(geo), &QubitState::zero(), &grid).unwrap();
        assert_abs_diff_eq!(geodesic_efficiency_generic(&traj).unwrap(), 1.0, epsilon = 1e-8);

        let p = unit();
        let traj = integrate_schrodinger(&FieldSpec::TwoParameter(p), &QubitState::zero(), &grid).unwrap();
        assert_abs_diff_eq!(
            geodesic_efficiency_generic(&traj).unwrap(),
            geodesic_efficiency(&p),
            epsilon = 1e-6
        );
    }

    #[test]
    fn generic_geodesic_efficiency_needs_motion() {
        let spec = FieldSpec::constant(0.0, Vector3::new(0.0, 0.0, 1.0));
        let grid = TimeGrid::new(0.0, 1.0, 10).unwrap();
        let traj = integrate_schrodinger(&spec, &QubitState::zero(), &grid).unwrap();
        assert!(matches!(
            geodesic_efficiency_generic(&traj),
            Err(Error::UndefinedEfficiency(_))
        ));
    }

    #[test]
    fn extrema_summary_reference_values() {
        let s = extrema_summary(&ScenarioParams::new(1.0, 2.0).unwrap());
        assert_eq!(s.kappa2_max, 16.0);
        assert_eq!(s.ratio_max, 1.0);
        let s = extrema_summary(&unit());
        assert_eq!(s.period, FRAC_PI_2);
        for t in [
            s.t_vmax,
            s.t_vmin,
            s.t_accmax,
            s.t_accmin,
            s.t_k2max,
            s.t_k2min,
            s.t_ratiomax,
            s.t_ratiomin,
        ] {
            assert!((0.0..s.period).contains(&t));
        }
    }

    #[test]
    fn acceleration_extremum_is_stationary() {
        for n in [0.0, 0.5, 1.0, 2.0, 10.0] {
            let p = ScenarioParams::new(1.0, n).unwrap();
            let s = extrema_summary(&p);
            assert_abs_diff_eq!(acceleration(&p, s.t_accmax), s.acc_max, epsilon = 1e-14);
            assert_abs_diff_eq!(acceleration(&p, s.t_accmin), s.acc_min, epsilon = 1e-14);
            let d = 1e-5;
            let slope = (acceleration(&p, s.t_accmax + d) - acceleration(&p, s.t_accmax - d)) / (2.0 * d);
            assert!(slope.abs() < 1e-8 * (1.0 + n * n), "n = {n}: slope {slope}");
        }
    }

    #[test]
    fn acceleration_at_eighth_period_is_below_the_peak() {
        // the value at T/4 = pi/(8 w) is (nu^2/4)(1 + q/8)^(-1/2), which only
        // approaches the maximum as nu0/omega0 -> 0
        let p = ScenarioParams::new(1.0, 2.0).unwrap();
        let at_eighth = acceleration(&p, FRAC_PI_8);
        assert_abs_diff_eq!(at_eighth, (1.0 / 1.5f64).sqrt(), epsilon = 1e-15);
        let s = extrema_summary(&p);
        assert!(s.acc_max > at_eighth + 1e-2);
        assert!(s.t_accmax < FRAC_PI_8);
    }

    #[test]
    fn speed_and_curvature_are_anti_correlated() {
        for n in [0.5, 1.0, 2.0] {
            let p = ScenarioParams::new(1.0, n).unwrap();
            let s = extrema_summary(&p);
            assert_abs_diff_eq!(curvature_closed(&p, s.t_vmax), s.kappa2_min, epsilon = 1e-12);
            assert_abs_diff_eq!(curvature_closed(&p, s.t_vmin), s.kappa2_max, epsilon = 1e-12);
            assert_abs_diff_eq!(acceleration(&p, s.t_k2max), 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(acceleration(&p, s.t_k2min), 0.0, epsilon = 1e-9);
        }
    }

    mod props {
        use super::*;
        use crate::qubit::state_from_angles;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn observables_are_periodic(t in 0.0..20.0f64, w in 0.3..3.0f64, n in 0.0..4.0f64) {
                let p = ScenarioParams::new(w, n).unwrap();
                let shift = t + p.period();
                prop_assert!((speed(&p, shift) - speed(&p, t)).abs() <= 1e-10);
                prop_assert!((acceleration(&p, shift) - acceleration(&p, t)).abs() <= 1e-10);
                prop_assert!((curvature_closed(&p, shift) - curvature_closed(&p, t)).abs() <= 1e-10 * (1.0 + 4.0 * p.rate_ratio().powi(2)));
            }

            #[test]
            fn expectation_route_agrees_with_bloch_route_on_generic_fields(
                c in prop::array::uniform6(-1.0..1.0f64),
                theta in 0.2..3.0f64, phi in -3.0..3.0f64, t in 0.0..2.0f64,
            ) {
                let field = move |s: f64| Vector3::new(
                    c[0] + 0.6 * (1.3 * s).cos(),
                    c[1] + 0.5 * (0.7 * s + c[3]).sin(),
                    c[2] + 0.4 * s + c[4] * s * s * 0.2,
                );
                let derivative = move |s: f64| Vector3::new(
                    -0.78 * (1.3 * s).sin(),
                    0.35 * (0.7 * s + c[3]).cos(),
                    0.4 + c[4] * s * 0.4,
                );
                let spec = FieldSpec::custom_with_derivative(move |s| (c[5], field(s)), derivative);
                let psi = state_from_angles(theta, phi).unwrap();
                let a = psi.bloch();
                let h = spec.value(t).1;
                let ah = a.as_vec().dot(&h);
                prop_assume!(h.norm_squared() - ah * ah > 1e-2);
                let k_bloch = curvature_bloch(&a, &h, &derivative(t)).unwrap();
                let k_expect = curvature_expectation(&spec, &psi, t, 1e-4).unwrap();
                prop_assert!(k_expect >= 0.0);
                prop_assert!((k_bloch - k_expect).abs() <= 1e-5 * (1.0 + k_bloch), "{} vs {}", k_bloch, k_expect);
            }
        }
    }
}
