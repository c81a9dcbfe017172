//! Magnetic fields `h0(t)`, `h(t)` and `h'(t)` driving `H(t) = h0 I + h . sigma`.
//!
//! Units: hbar = 1, so every field component is an angular frequency.

use std::fmt;
use std::sync::Arc;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::qubit::PauliDecomp;

/// The two rates of the built-in scenario: `omega0 = theta'/2` (polar) and
/// `nu0 = phi'` (azimuthal). `nu0 = 0` is the geodesic limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioParams {
    omega0: f64,
    nu0: f64,
}

impl ScenarioParams {
    pub fn new(omega0: f64, nu0: f64) -> Result<Self> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "omega0 must be finite and > 0, got {omega0}"
            )));
        }
        if !(nu0.is_finite() && nu0 >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "nu0 must be finite and >= 0, got {nu0}"
            )));
        }
        Ok(Self { omega0, nu0 })
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn nu0(&self) -> f64 {
        self.nu0
    }

    /// `nu0 / omega0`.
    pub fn rate_ratio(&self) -> f64 {
        self.nu0 / self.omega0
    }

    /// Common period `pi / (2 omega0)` of speed, acceleration, curvature and
    /// field ratio.
    pub fn period(&self) -> f64 {
        std::f64::consts::PI / (2.0 * self.omega0)
    }

    /// Default finite-difference step, `1e-4 * max(1, 1/omega0)`.
    pub fn default_step(&self) -> f64 {
        1e-4 * f64::max(1.0, 1.0 / self.omega0)
    }
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self { omega0: 1.0, nu0: 1.0 }
    }
}

/// Field value and its time derivative at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub t: f64,
    pub h0: f64,
    pub h: Vector3<f64>,
    pub h_dot: Vector3<f64>,
}

impl FieldSample {
    pub fn hamiltonian(&self) -> PauliDecomp {
        PauliDecomp::new(self.h0, self.h)
    }

    /// `h_par^2`, the squared component along the quantization (z) axis.
    pub fn parallel_sq(&self) -> f64 {
        self.h.z * self.h.z
    }

    /// `h_perp^2`, the squared component in the xy-plane.
    pub fn transverse_sq(&self) -> f64 {
        self.h.x * self.h.x + self.h.y * self.h.y
    }

    pub fn parallel_transverse_ratio(&self) -> f64 {
        self.parallel_sq() / self.transverse_sq()
    }
}

pub type FieldFn = Arc<dyn Fn(f64) -> (f64, Vector3<f64>) + Send + Sync>;
pub type DerivativeFn = Arc<dyn Fn(f64) -> Vector3<f64> + Send + Sync>;

/// How `h'(t)` is obtained for a user-supplied field.
#[derive(Clone)]
pub enum DerivativePolicy {
    Analytic(DerivativeFn),
    /// Fourth-order central differences of the field function.
    CentralDifference {
        step: f64,
    },
}

/// Deterministic, stateless evaluation contract `t -> FieldSample`.
#[derive(Clone)]
pub enum FieldSpec {
    TwoParameter(ScenarioParams),
    Custom {
        field: FieldFn,
        derivative: DerivativePolicy,
    },
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::TwoParameter(p) => f.debug_tuple("TwoParameter").field(p).finish(),
            FieldSpec::Custom { derivative, .. } => {
                let policy = match derivative {
                    DerivativePolicy::Analytic(_) => "analytic".to_string(),
                    DerivativePolicy::CentralDifference { step } => format!("central difference, dt = {step}"),
                };
                f.debug_struct("Custom").field("derivative", &policy).finish()
            }
        }
    }
}

impl FieldSpec {
    /// User field `t -> (h0, h)`; the derivative falls back to central differences.
    pub fn custom<F>(field: F) -> Self
    where
        F: Fn(f64) -> (f64, Vector3<f64>) + Send + Sync + 'static,
    {
        FieldSpec::Custom {
            field: Arc::new(field),
            derivative: DerivativePolicy::CentralDifference { step: 1e-4 },
        }
    }

    pub fn custom_with_derivative<F, D>(field: F, derivative: D) -> Self
    where
        F: Fn(f64) -> (f64, Vector3<f64>) + Send + Sync + 'static,
        D: Fn(f64) -> Vector3<f64> + Send + Sync + 'static,
    {
        FieldSpec::Custom {
            field: Arc::new(field),
            derivative: DerivativePolicy::Analytic(Arc::new(derivative)),
        }
    }

    /// A time-independent Hamiltonian `h0 I + h . sigma`.
    pub fn constant(h0: f64, h: Vector3<f64>) -> Self {
        Self::custom_with_derivative(move |_| (h0, h), |_| Vector3::zeros())
    }

    /// `(h0(t), h(t))`.
    pub fn value(&self, t: f64) -> (f64, Vector3<f64>) {
        match self {
            FieldSpec::TwoParameter(p) => (0.0, two_parameter_h(p, t)),
            FieldSpec::Custom { field, .. } => field(t),
        }
    }

    pub fn hamiltonian(&self, t: f64) -> PauliDecomp {
        let (h0, h) = self.value(t);
        PauliDecomp::new(h0, h)
    }

    /// Step used for numerical derivatives of this field.
    pub fn default_step(&self) -> f64 {
        match self {
            FieldSpec::TwoParameter(p) => p.default_step(),
            FieldSpec::Custom {
                derivative: DerivativePolicy::CentralDifference { step },
                ..
            } => *step,
            FieldSpec::Custom { .. } => 1e-4,
        }
    }

    pub fn sample(&self, t: f64) -> FieldSample {
        let (h0, h) = self.value(t);
        let h_dot = field_derivative(self, t, self.default_step()).expect("default step is positive");
        FieldSample { t, h0, h, h_dot }
    }
}

fn two_parameter_h(p: &ScenarioParams, t: f64) -> Vector3<f64> {
    let (w, n) = (p.omega0, p.nu0);
    let (s, c) = (2.0 * w * t).sin_cos();
    let (sn, cn) = (n * t).sin_cos();
    Vector3::new(
        -0.5 * n * c * s * cn - w * sn,
        -0.5 * n * c * s * sn + w * cn,
        0.5 * n * s * s,
    )
}

fn two_parameter_h_dot(p: &ScenarioParams, t: f64) -> Vector3<f64> {
    let (w, n) = (p.omega0, p.nu0);
    let (s, c) = (2.0 * w * t).sin_cos();
    let (sn, cn) = (n * t).sin_cos();
    // d/dt [cos(2wt) sin(2wt)] = 2w (c^2 - s^2)
    let cs = c * s;
    let cs_dot = 2.0 * w * (c * c - s * s);
    Vector3::new(
        -0.5 * n * (cs_dot * cn - n * cs * sn) - w * n * cn,
        -0.5 * n * (cs_dot * sn + n * cs * cn) - w * n * sn,
        2.0 * w * n * s * c,
    )
}

/// The built-in traceless field whose Schrodinger evolution is the parallel
/// transported state with polar angle `2 omega0 t` and azimuth `nu0 t`.
pub fn two_parameter_field(params: &ScenarioParams, t: f64) -> FieldSample {
    FieldSample {
        t,
        h0: 0.0,
        h: two_parameter_h(params, t),
        h_dot: two_parameter_h_dot(params, t),
    }
}

fn central_difference<F>(f: F, t: f64, dt: f64) -> Vector3<f64>
where
    F: Fn(f64) -> Vector3<f64>,
{
    (f(t - 2.0 * dt) - 8.0 * f(t - dt) + 8.0 * f(t + dt) - f(t + 2.0 * dt)) / (12.0 * dt)
}

/// `h'(t)`: analytic where available, otherwise the fourth-order central
/// difference with step `dt`.
pub fn field_derivative(spec: &FieldSpec, t: f64, dt: f64) -> Result<Vector3<f64>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("derivative step must be > 0, got {dt}")));
    }
    Ok(match spec {
        FieldSpec::TwoParameter(p) => two_parameter_h_dot(p, t),
        FieldSpec::Custom {
            derivative: DerivativePolicy::Analytic(d),
            ..
        } => d(t),
        FieldSpec::Custom { field, .. } => central_difference(|s| field(s).1, t, dt),
    })
}

/// Central-difference derivative of any field, ignoring its derivative policy.
pub fn numerical_field_derivative(spec: &FieldSpec, t: f64, dt: f64) -> Vector3<f64> {
    central_difference(|s| spec.value(s).1, t, dt)
}

/// `h_par^2 / h_perp^2 = 4 sin^4(2 w t) / [sin^2(4 w t) + 16 (w/nu)^2]` for the
/// built-in field, written so that `nu0 = 0` yields 0.
pub fn parallel_transverse_ratio(params: &ScenarioParams, t: f64) -> f64 {
    let (w, n) = (params.omega0, params.nu0);
    let s2 = (2.0 * w * t).sin().powi(2);
    let s4 = (4.0 * w * t).sin().powi(2);
    4.0 * n * n * s2 * s2 / (n * n * s4 + 16.0 * w * w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn unit() -> ScenarioParams {
        ScenarioParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ScenarioParams::new(0.0, 1.0).is_err());
        assert!(ScenarioParams::new(-1.0, 1.0).is_err());
        assert!(ScenarioParams::new(1.0, -0.1).is_err());
        assert!(ScenarioParams::new(f64::NAN, 1.0).is_err());
        assert!(ScenarioParams::new(1.0, 0.0).is_ok());
        assert_eq!(ScenarioParams::new(2.0, 1.0).unwrap().period(), PI / 4.0);
    }

    #[test]
    fn built_in_field_at_origin() {
        let f = two_parameter_field(&unit(), 0.0);
        assert_eq!(f.h0, 0.0);
        assert_abs_diff_eq!(f.h.x, 0.0);
        assert_abs_diff_eq!(f.h.y, 1.0);
        assert_abs_diff_eq!(f.h.z, 0.0);
    }

    #[test]
    fn built_in_field_z_component_at_quarter() {
        let f = two_parameter_field(&unit(), FRAC_PI_4);
        assert_abs_diff_eq!(f.h.z, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn built_in_field_is_traceless() {
        let p = ScenarioParams::new(0.7, 2.3).unwrap();
        for k in 0..50 {
            assert_eq!(two_parameter_field(&p, 0.13 * k as f64).h0, 0.0);
        }
    }

    #[test]
    fn analytic_derivative_matches_central_difference() {
        for p in [
            unit(),
            ScenarioParams::new(0.5, 2.0).unwrap(),
            ScenarioParams::new(3.0, 0.25).unwrap(),
        ] {
            for k in 0..=400 {
                let t = 2.0 * PI * k as f64 / 400.0;
                let exact = two_parameter_field(&p, t).h_dot;
                let fd = numerical_field_derivative(&FieldSpec::TwoParameter(p), t, 1e-4);
                assert!((exact - fd).amax() <= 1e-8, "t = {t}: {exact} vs {fd}");
            }
        }
        let at0 = field_derivative(&FieldSpec::TwoParameter(unit()), 0.0, 1e-4).unwrap();
        let fd0 = numerical_field_derivative(&FieldSpec::TwoParameter(unit()), 0.0, 1e-4);
        assert!((at0 - fd0).amax() <= 1e-10);
    }

    #[test]
    fn derivative_of_simple_user_fields() {
        let constant = FieldSpec::custom(|_| (0.3, Vector3::new(1.0, 2.0, 3.0)));
        assert_eq!(field_derivative(&constant, 0.7, 1e-3).unwrap(), Vector3::zeros());
        let ramp = FieldSpec::custom(|t| (0.0, Vector3::new(t, 0.0, 0.0)));
        let d = field_derivative(&ramp, 0.7, 1e-3).unwrap();
        assert_abs_diff_eq!(d.x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.y, 0.0);
    }

    #[test]
    fn derivative_step_must_be_positive() {
        let spec = FieldSpec::TwoParameter(unit());
        assert!(matches!(
            field_derivative(&spec, 0.0, 0.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(field_derivative(&spec, 0.0, -1e-3).is_err());
    }

    #[test]
    fn ratio_reference_values() {
        for p in [
            unit(),
            ScenarioParams::new(1.0, 0.5).unwrap(),
            ScenarioParams::new(2.0, 3.0).unwrap(),
        ] {
            let w = p.omega0();
            for n in 0..4 {
                let t = n as f64 * PI / (2.0 * w);
                assert_abs_diff_eq!(parallel_transverse_ratio(&p, t), 0.0, epsilon = 1e-30);
            }
            let peak = parallel_transverse_ratio(&p, PI / (4.0 * w));
            assert_abs_diff_eq!(peak, 0.25 * p.rate_ratio().powi(2), epsilon = 1e-15);
        }
        let direct = 4.0 * 0.6f64.sin().powi(4) / (1.2f64.sin().powi(2) + 16.0);
        assert_abs_diff_eq!(parallel_transverse_ratio(&unit(), 0.3), direct, epsilon = 1e-16);
        assert_abs_diff_eq!(direct, 0.0241, epsilon = 5e-5);
    }

    #[test]
    fn ratio_matches_field_components() {
        let p = ScenarioParams::new(1.3, 0.8).unwrap();
        for k in 0..200 {
            let t = 0.037 * k as f64;
            let f = two_parameter_field(&p, t);
            assert_abs_diff_eq!(
                f.parallel_transverse_ratio(),
                parallel_transverse_ratio(&p, t),
                epsilon = 1e-13
            );
            assert_abs_diff_eq!(f.parallel_sq() + f.transverse_sq(), f.h.norm_squared(), epsilon = 1e-12);
            let (w, n) = (p.omega0(), p.nu0());
            let perp = n * n / 16.0 * (4.0 * w * t).sin().powi(2) + w * w;
            let par = n * n / 4.0 * (2.0 * w * t).sin().powi(4);
            assert_abs_diff_eq!(f.transverse_sq(), perp, epsilon = 1e-12);
            assert_abs_diff_eq!(f.parallel_sq(), par, epsilon = 1e-12);
        }
    }

    #[test]
    fn geodesic_limit_ratio_is_zero() {
        let p = ScenarioParams::new(1.0, 0.0).unwrap();
        assert_eq!(parallel_transverse_ratio(&p, 0.4), 0.0);
    }

    #[test]
    fn evaluation_is_deterministic() {
        let spec = FieldSpec::TwoParameter(unit());
        assert_eq!(spec.sample(1.234), spec.sample(1.234));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn ratio_is_periodic(t in 0.0..20.0f64, w in 0.2..3.0f64, n in 0.0..4.0f64) {
                let p = ScenarioParams::new(w, n).unwrap();
                let shifted = parallel_transverse_ratio(&p, t + p.period());
                prop_assert!((shifted - parallel_transverse_ratio(&p, t)).abs() <= 1e-10);
            }
        }
    }
}
