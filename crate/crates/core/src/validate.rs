//! Invariant battery: curvature routes against each other, integrated
//! dynamics against closed forms, efficiencies, periodicity and extrema.
//!
//! [`Fault`] injects known-wrong formulas so the battery itself can be
//! tested: a healthy build passes every check, a faulted one must not.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::Vector3;

use crate::config::RunConfig;
use crate::dynamics::{
    analytic_bloch, analytic_state, arc_length_closed, integrate_bloch, integrate_schrodinger, TimeGrid, Trajectory,
};
use crate::error::{Error, Result};
use crate::fields::{parallel_transverse_ratio, two_parameter_field, FieldSpec, ScenarioParams};
use crate::geometry::{
    acceleration, curvature_bloch, curvature_bloch_terms, curvature_closed, curvature_expectation, extrema_summary,
    geodesic_efficiency, geodesic_efficiency_generic, speed, speed_efficiency, SINGULAR_EPS,
};
use crate::qubit::{state_from_angles, BlochVector, QubitState};
use crate::series::EXPECTATION_STEP;

/// Deliberate corruptions for testing the battery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Field with the sign of its y component flipped.
    FlipFieldY,
    /// Bloch-route curvature without its `4 (a.h) a.(h x h')` term.
    DropThirdCurvatureTerm,
    /// Constant field along z: `|0>` is then a stationary eigenstate.
    FrozenField,
}

impl std::str::FromStr for Fault {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Fault::None),
            "flip-hy" => Ok(Fault::FlipFieldY),
            "drop-third-term" => Ok(Fault::DropThirdCurvatureTerm),
            "frozen-field" => Ok(Fault::FrozenField),
            other => Err(Error::InvalidArgument(format!("unknown fault `{other}`"))),
        }
    }
}

impl Fault {
    /// Field the pipeline integrates under this fault.
    pub fn field_spec(&self, params: &ScenarioParams) -> FieldSpec {
        let p = *params;
        match self {
            Fault::FlipFieldY => FieldSpec::custom_with_derivative(
                move |t| {
                    let f = two_parameter_field(&p, t);
                    (f.h0, Vector3::new(f.h.x, -f.h.y, f.h.z))
                },
                move |t| {
                    let f = two_parameter_field(&p, t);
                    Vector3::new(f.h_dot.x, -f.h_dot.y, f.h_dot.z)
                },
            ),
            Fault::FrozenField => FieldSpec::constant(0.0, Vector3::new(0.0, 0.0, p.omega0())),
            Fault::None | Fault::DropThirdCurvatureTerm => FieldSpec::TwoParameter(p),
        }
    }

    /// Bloch-route curvature as computed under this fault.
    pub fn curvature_bloch(&self, a: &BlochVector, h: &Vector3<f64>, h_dot: &Vector3<f64>) -> Result<f64> {
        match self {
            Fault::DropThirdCurvatureTerm => {
                let [t1, t2, _] = curvature_bloch_terms(a, h, h_dot)?;
                Ok((t1 + t2).max(0.0))
            }
            _ => curvature_bloch(a, h, h_dot),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    /// Pass iff residual <= limit.
    AtMost(f64),
    /// Pass iff residual >= limit.
    AtLeast(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub bound: Bound,
    pub passed: bool,
    pub note: Option<String>,
}

impl Check {
    fn from_result(name: &'static str, bound: Bound, outcome: Result<f64>) -> Self {
        match outcome {
            Ok(residual) => {
                let passed = match bound {
                    Bound::AtMost(limit) => residual <= limit,
                    Bound::AtLeast(limit) => residual >= limit,
                };
                Check {
                    name,
                    residual,
                    bound,
                    passed,
                    note: None,
                }
            }
            Err(e) => Check {
                name,
                residual: f64::NAN,
                bound,
                passed: false,
                note: Some(e.to_string()),
            },
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let bound = match self.bound {
            Bound::AtMost(x) => format!("<= {x:.1e}"),
            Bound::AtLeast(x) => format!(">= {x:.1e}"),
        };
        write!(
            f,
            "{status} {:<24} residual {:<10.3e} {bound}",
            self.name, self.residual
        )?;
        if let Some(note) = &self.note {
            write!(f, " ({note})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for check in &self.checks {
            writeln!(f, "{check}")?;
        }
        let failed: Vec<&str> = self.failures().map(|c| c.name).collect();
        if failed.is_empty() {
            write!(f, "all {} checks passed", self.checks.len())
        } else {
            write!(
                f,
                "{} of {} checks failed: {}",
                failed.len(),
                self.checks.len(),
                failed.join(", ")
            )
        }
    }
}

fn max_over<I: IntoIterator<Item = Result<f64>>>(values: I) -> Result<f64> {
    values.into_iter().try_fold(0.0f64, |acc, x| Ok(acc.max(x?)))
}

/// Low-discrepancy sample points in `[0, span)`.
fn sample_times(count: usize, span: f64) -> impl Iterator<Item = f64> {
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    (1..=count).map(move |k| (k as f64 * golden).fract() * span)
}

fn sup_distance(lhs: &[BlochVector], rhs: impl Iterator<Item = BlochVector>) -> f64 {
    lhs.iter()
        .zip(rhs)
        .map(|(a, b)| (a.as_vec() - b.as_vec()).amax())
        .fold(0.0, f64::max)
}

fn bloch_error(spec: &FieldSpec, params: &ScenarioParams, grid: &TimeGrid) -> Result<f64> {
    let numeric = integrate_bloch(spec, &analytic_bloch(params, grid.t0()), grid)?;
    Ok(sup_distance(&numeric, grid.times().map(|t| analytic_bloch(params, t))))
}

/// Field and derivative of a non-symmetric test field on which every term of
/// the Bloch curvature formula is nonzero.
fn generic_field(t: f64) -> (f64, Vector3<f64>) {
    (0.3, Vector3::new(t.cos() + 0.2, 0.7 * (2.0 * t).sin(), 0.5 + 0.3 * t))
}

fn generic_field_derivative(t: f64) -> Vector3<f64> {
    Vector3::new(-t.sin(), 1.4 * (2.0 * t).cos(), 0.3)
}

type Observable<'a> = &'a dyn Fn(f64) -> f64;

/// Below this, round-off in the Bloch-vector error swamps the RK4 order
/// measurement.
const ROUND_OFF_FLOOR: f64 = 5e-13;

/// Runs every check on `config` with `fault` injected.
pub fn run_validation(config: &RunConfig, fault: Fault) -> ValidationReport {
    let params = &config.params;
    let grid = &config.grid;
    let tol = |name: &str| config.tolerances.get(name);
    let spec = fault.field_spec(params);
    let traj: Result<Trajectory> = integrate_schrodinger(&spec, &QubitState::zero(), grid);
    let traj = || traj.clone();
    let mut checks = Vec::new();
    macro_rules! push {
        ($check:expr) => {{
            let check: Check = $check;
            log::debug!("{check}");
            checks.push(check);
        }};
        ($name:expr, $bound:expr, $outcome:expr $(,)?) => {
            push!(Check::from_result($name, $bound, $outcome))
        };
    }

    push!(
        "route_agreement",
        Bound::AtMost(tol("route_agreement")),
        traj().and_then(|traj| {
            max_over(grid.times().enumerate().map(|(i, t)| {
                let s = spec.sample(t);
                Ok((fault.curvature_bloch(&traj.bloch[i], &s.h, &s.h_dot)? - curvature_closed(params, t)).abs())
            }))
        }),
    );

    push!(
        "expectation_agreement",
        Bound::AtMost(tol("expectation_agreement")),
        traj().and_then(|traj| {
            max_over(grid.times().enumerate().map(|(i, t)| {
                let k = curvature_expectation(&spec, &traj.states[i], t, EXPECTATION_STEP)?;
                Ok((k - curvature_closed(params, t)).abs())
            }))
        }),
    );

    push!(
        "generic_route_agreement",
        Bound::AtMost(tol("generic_route_agreement")),
        {
            let field = FieldSpec::custom_with_derivative(generic_field, generic_field_derivative);
            let mut residuals = Vec::new();
            for (k, t) in sample_times(24, 3.0).enumerate() {
                let theta = 0.3 + 2.5 * ((k as f64 * 0.37).fract());
                let phi = -3.0 + 6.0 * ((k as f64 * 0.61).fract());
                let state = state_from_angles(theta, phi).expect("finite angles");
                let (_, h) = generic_field(t);
                let a = state.bloch();
                let ah = a.as_vec().dot(&h);
                if h.norm_squared() - ah * ah < 1e-3 {
                    continue;
                }
                residuals.push((|| {
                    let k_bloch = fault.curvature_bloch(&a, &h, &generic_field_derivative(t))?;
                    let k_expect = curvature_expectation(&field, &state, t, EXPECTATION_STEP)?;
                    Ok((k_bloch - k_expect).abs() / (1.0 + k_expect))
                })());
            }
            max_over(residuals)
        }
    );

    push!(
        "schrodinger_fidelity",
        Bound::AtMost(tol("schrodinger_fidelity")),
        traj().map(|traj| {
            grid.times()
                .zip(&traj.states)
                .map(|(t, psi)| 1.0 - psi.fidelity(&analytic_state(params, t)))
                .fold(0.0, f64::max)
        }),
    );

    push!(
        "transport_phase",
        Bound::AtMost(tol("transport_phase")),
        traj().map(|traj| {
            grid.times()
                .zip(&traj.states)
                .map(|(t, psi)| (analytic_state(params, t).inner(psi) - 1.0).norm())
                .fold(0.0, f64::max)
        }),
    );

    push!(
        "bloch_error",
        Bound::AtMost(tol("bloch_error")),
        bloch_error(&spec, params, grid)
    );

    push!(
        "schrodinger_bloch",
        Bound::AtMost(tol("schrodinger_bloch")),
        traj().and_then(|traj| {
            let from_bloch = integrate_bloch(&spec, &traj.bloch[0], grid)?;
            Ok(sup_distance(&traj.bloch, from_bloch.into_iter()))
        }),
    );

    {
        let coarse = bloch_error(&spec, params, grid);
        let fine = TimeGrid::new(grid.t0(), grid.t1(), 2 * grid.steps()).and_then(|g| bloch_error(&spec, params, &g));
        let bound = Bound::AtLeast(tol("rk_order"));
        match (coarse, fine) {
            (Ok(c), Ok(_)) if c <= ROUND_OFF_FLOOR => {
                let mut check = Check::from_result("rk_order", bound, Ok(f64::INFINITY));
                check.note = Some(format!("error {c:.1e} already at round-off floor"));
                push!(check)
            }
            (Ok(c), Ok(f)) => push!("rk_order", bound, Ok(c / f)),
            (Err(e), _) | (_, Err(e)) => push!("rk_order", bound, Err(e)),
        }
    }

    push!(
        "speed_efficiency",
        Bound::AtMost(tol("speed_efficiency")),
        traj().and_then(|traj| {
            max_over(grid.times().zip(&traj.bloch).map(|(t, a)| {
                let s = spec.sample(t);
                Ok((speed_efficiency(s.h0, &s.h, a)? - 1.0).abs())
            }))
        }),
    );

    push!(
        "speed_from_state",
        Bound::AtMost(tol("speed_from_state")),
        traj().map(|traj| {
            grid.times()
                .zip(&traj.bloch)
                .map(|(t, a)| (spec.value(t).1.cross(a.as_vec()).norm() - speed(params, t)).abs())
                .fold(0.0, f64::max)
        }),
    );

    push!(
        "orthogonality",
        Bound::AtMost(tol("orthogonality")),
        traj().map(|traj| {
            grid.times()
                .zip(&traj.bloch)
                .map(|(t, a)| {
                    let s = spec.sample(t);
                    a.as_vec().dot(&s.h).abs().max(a.as_vec().dot(&s.h_dot).abs())
                })
                .fold(0.0, f64::max)
        }),
    );

    push!("periodicity", Bound::AtMost(tol("periodicity")), {
        let period = params.period();
        let observables: [Observable; 4] = [
            &|t| speed(params, t),
            &|t| acceleration(params, t),
            &|t| curvature_closed(params, t),
            &|t| parallel_transverse_ratio(params, t),
        ];
        Ok(sample_times(100, grid.t1().max(period))
            .flat_map(|t| {
                observables
                    .iter()
                    .map(move |f| (f(t + period) - f(t)).abs() / (1.0 + f(t).abs()))
            })
            .fold(0.0, f64::max))
    });

    let summary = extrema_summary(params);
    let period = summary.period;
    let dense: Vec<f64> = (0..100_000).map(|k| period * k as f64 / 100_000.0).collect();
    let arg_extrema = |f: &dyn Fn(f64) -> f64| {
        let values: Vec<f64> = dense.iter().map(|&t| f(t)).collect();
        let (mut imax, mut imin) = (0, 0);
        for (i, &v) in values.iter().enumerate() {
            if v > values[imax] {
                imax = i;
            }
            if v < values[imin] {
                imin = i;
            }
        }
        (values[imax], dense[imax], values[imin], dense[imin])
    };
    // observable with [closed max, t_max, closed min, t_min]
    let extrema: [(Observable, [f64; 4]); 4] = [
        (
            &|t| speed(params, t),
            [summary.v_max, summary.t_vmax, summary.v_min, summary.t_vmin],
        ),
        (
            &|t| acceleration(params, t),
            [summary.acc_max, summary.t_accmax, summary.acc_min, summary.t_accmin],
        ),
        (
            &|t| curvature_closed(params, t),
            [summary.kappa2_max, summary.t_k2max, summary.kappa2_min, summary.t_k2min],
        ),
        (
            &|t| parallel_transverse_ratio(params, t),
            [
                summary.ratio_max,
                summary.t_ratiomax,
                summary.ratio_min,
                summary.t_ratiomin,
            ],
        ),
    ];
    let mut value_residual: f64 = 0.0;
    let mut time_residual: f64 = 0.0;
    for (f, [vmax, tmax, vmin, tmin]) in extrema {
        let (gmax, gtmax, gmin, gtmin) = arg_extrema(f);
        value_residual = value_residual.max((gmax - vmax).abs()).max((gmin - vmin).abs());
        // a flat observable (nu0 = 0) has no distinguished extremum time
        if gmax - gmin > tol("extrema_value") {
            time_residual = time_residual.max((gtmax - tmax).abs()).max((gtmin - tmin).abs());
        }
    }
    push!("extrema_value", Bound::AtMost(tol("extrema_value")), Ok(value_residual));
    push!(
        "extrema_time",
        Bound::AtMost(tol("extrema_time") * period),
        Ok(time_residual)
    );

    push!(
        "extrema_consistency",
        Bound::AtMost(tol("extrema_consistency")),
        Ok([
            acceleration(params, summary.t_k2max).abs(),
            acceleration(params, summary.t_k2min).abs(),
            (curvature_closed(params, summary.t_vmax) - summary.kappa2_min).abs(),
            (curvature_closed(params, summary.t_vmin) - summary.kappa2_max).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)),
    );

    push!("co_movement", Bound::AtMost(tol("co_movement")), {
        // sign(d v^2/dt) against sign(d ratio/dt), counted as mismatches
        let d = 1e-6 * period;
        let mismatches = dense
            .iter()
            .step_by(10)
            .filter(|&&t| {
                let dv2 = 2.0 * speed(params, t) * acceleration(params, t);
                let dratio =
                    (parallel_transverse_ratio(params, t + d) - parallel_transverse_ratio(params, t - d)) / (2.0 * d);
                dv2.abs() > 1e-9 && dratio.abs() > 1e-9 && dv2.signum() != dratio.signum()
            })
            .count();
        Ok(mismatches as f64)
    });

    push!("geodesic_efficiency", Bound::AtMost(tol("geodesic_efficiency")), {
        let half = PI / (2.0 * params.omega0());
        let steps = ((half / grid.dt()).ceil() as usize).max(1);
        TimeGrid::new(0.0, half, steps)
            .and_then(|g| integrate_schrodinger(&spec, &QubitState::zero(), &g))
            .and_then(|t| geodesic_efficiency_generic(&t))
            .map(|eta| (eta - geodesic_efficiency(params)).abs())
    });

    push!(
        "arc_length",
        Bound::AtMost(tol("arc_length")),
        traj().and_then(|traj| {
            let closed = arc_length_closed(params, grid.t1())?;
            Ok((traj.arc.last().expect("nonempty") - closed).abs() / closed.max(SINGULAR_EPS).max(1.0))
        }),
    );

    push!(
        "norm_drift",
        Bound::AtMost(tol("norm_drift")),
        traj().map(|traj| traj.max_norm_drift)
    );

    ValidationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ConfigOverrides;

    fn quick(nu0: f64) -> RunConfig {
        ConfigOverrides {
            nu0: Some(nu0),
            steps: Some(6283),
            ..Default::default()
        }
        .build()
        .unwrap()
    }

    #[test]
    fn healthy_build_passes() {
        for nu0 in [0.0, 0.5, 1.0, 2.0] {
            let report = run_validation(&quick(nu0), Fault::None);
            assert!(report.passed(), "nu0 = {nu0}\n{report}");
        }
    }

    #[test]
    fn flipped_field_breaks_route_agreement() {
        let report = run_validation(&quick(1.0), Fault::FlipFieldY);
        assert!(!report.passed());
        assert!(!report.get("route_agreement").unwrap().passed);
    }

    #[test]
    fn dropped_term_is_caught_on_generic_field() {
        let report = run_validation(&quick(1.0), Fault::DropThirdCurvatureTerm);
        assert!(!report.get("generic_route_agreement").unwrap().passed, "{report}");
        // invisible on the built-in field where a.h = 0
        assert!(report.get("route_agreement").unwrap().passed);
    }

    #[test]
    fn frozen_field_reports_singularity() {
        let report = run_validation(&quick(1.0), Fault::FrozenField);
        let check = report.get("route_agreement").unwrap();
        assert!(!check.passed);
        assert!(check.note.as_deref().unwrap().contains("singularity"));
    }

    #[test]
    fn impossible_tolerance_fails() {
        let mut config = quick(1.0);
        config.tolerances.set("route_agreement", 1e-30).unwrap();
        let report = run_validation(&config, Fault::None);
        assert!(!report.get("route_agreement").unwrap().passed);
        assert_eq!(report.failures().count(), 1);
    }

    #[test]
    fn fault_names() {
        assert_eq!("flip-hy".parse::<Fault>().unwrap(), Fault::FlipFieldY);
        assert_eq!(
            "drop-third-term".parse::<Fault>().unwrap(),
            Fault::DropThirdCurvatureTerm
        );
        assert!("bogus".parse::<Fault>().is_err());
    }

    #[test]
    fn report_lines() {
        let report = run_validation(&quick(1.0), Fault::None);
        let text = report.to_string();
        assert!(text.lines().next().unwrap().starts_with("PASS route_agreement"));
        assert!(text.ends_with("checks passed"));
    }
}
