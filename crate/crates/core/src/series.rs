//! Time series of the built-in scenario and their serialization.

use std::io::Write;

use crate::dynamics::{integrate_schrodinger, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::fields::{parallel_transverse_ratio, FieldSpec, ScenarioParams};
use crate::geometry::{
    acceleration, curvature_bloch, curvature_closed, curvature_expectation, extrema_summary, geodesic_efficiency,
    speed, speed_efficiency, ExtremaSummary, GeometryRecord,
};
use crate::qubit::QubitState;

/// Column order of the series files.
pub const SERIES_COLUMNS: [&str; 16] = [
    "t",
    "ax",
    "ay",
    "az",
    "hx",
    "hy",
    "hz",
    "v",
    "acc",
    "kappa2_closed",
    "kappa2_bloch",
    "kappa2_expect",
    "ratio",
    "eta_se",
    "arc_length",
    "beta_phase",
];

/// Column order of the sweep summary files.
pub const SUMMARY_COLUMNS: [&str; 20] = [
    "omega0",
    "nu0",
    "period",
    "v_max",
    "t_vmax",
    "v_min",
    "t_vmin",
    "acc_max",
    "t_accmax",
    "acc_min",
    "t_accmin",
    "kappa2_max",
    "t_k2max",
    "kappa2_min",
    "t_k2min",
    "ratio_max",
    "t_ratiomax",
    "ratio_min",
    "t_ratiomin",
    "eta_ge",
];

/// Step of the central difference in the expectation-value curvature route.
pub const EXPECTATION_STEP: f64 = 1e-4;

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidArgument(format!(
                "unknown format `{other}` (expected csv or json)"
            ))),
        }
    }
}

fn at_time(t: f64, err: Error) -> Error {
    match err {
        Error::Singularity(msg) if !msg.contains("t =") => Error::Singularity(format!("at t = {t}: {msg}")),
        other => other,
    }
}

/// Integrates `spec` from `|0>` over `grid` and evaluates every observable at
/// each node. Closed-form columns come from `params`; the Bloch and
/// expectation routes use the integrated state and `spec`.
pub fn simulate_series(
    params: &ScenarioParams,
    spec: &FieldSpec,
    grid: &TimeGrid,
) -> Result<(Trajectory, Vec<GeometryRecord>)> {
    let traj = integrate_schrodinger(spec, &QubitState::zero(), grid)?;
    let mut records = Vec::with_capacity(traj.len());
    for (i, t) in grid.times().enumerate() {
        let a = traj.bloch[i];
        let sample = spec.sample(t);
        let kappa2_bloch = curvature_bloch(&a, &sample.h, &sample.h_dot).map_err(|e| at_time(t, e))?;
        let kappa2_expect =
            curvature_expectation(spec, &traj.states[i], t, EXPECTATION_STEP).map_err(|e| at_time(t, e))?;
        records.push(GeometryRecord {
            t,
            a,
            h: sample.h,
            v: speed(params, t),
            acc: acceleration(params, t),
            kappa2_closed: curvature_closed(params, t),
            kappa2_bloch,
            kappa2_expect,
            ratio: parallel_transverse_ratio(params, t),
            eta_se: speed_efficiency(sample.h0, &sample.h, &a).map_err(|e| at_time(t, e))?,
            s: traj.arc[i],
            beta: traj.beta[i],
        });
    }
    Ok((traj, records))
}

/// Extrema summary and geodesic efficiency for each `nu0`, in input order.
pub fn sweep(omega0: f64, nu0_list: &[f64]) -> Result<Vec<(ScenarioParams, ExtremaSummary, f64)>> {
    if nu0_list.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one nu0 value".into()));
    }
    let params = nu0_list
        .iter()
        .map(|&nu0| ScenarioParams::new(omega0, nu0))
        .collect::<Result<Vec<_>>>()?;
    let rows = std::thread::scope(|scope| {
        let handles: Vec<_> = params
            .iter()
            .map(|p| scope.spawn(move || (*p, extrema_summary(p), geodesic_efficiency(p))))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    Ok(rows)
}

fn record_values(r: &GeometryRecord) -> [f64; 16] {
    [
        r.t,
        r.a.x(),
        r.a.y(),
        r.a.z(),
        r.h.x,
        r.h.y,
        r.h.z,
        r.v,
        r.acc,
        r.kappa2_closed,
        r.kappa2_bloch,
        r.kappa2_expect,
        r.ratio,
        r.eta_se,
        r.s,
        r.beta,
    ]
}

fn summary_values(p: &ScenarioParams, s: &ExtremaSummary, eta_ge: f64) -> [f64; 20] {
    [
        p.omega0(),
        p.nu0(),
        s.period,
        s.v_max,
        s.t_vmax,
        s.v_min,
        s.t_vmin,
        s.acc_max,
        s.t_accmax,
        s.acc_min,
        s.t_accmin,
        s.kappa2_max,
        s.t_k2max,
        s.kappa2_min,
        s.t_k2min,
        s.ratio_max,
        s.t_ratiomax,
        s.ratio_min,
        s.t_ratiomin,
        eta_ge,
    ]
}

/// 17 significant digits, enough to round-trip every double.
fn number(x: f64) -> String {
    if x.is_finite() {
        // avoid "-0" in output
        let x = if x == 0.0 { 0.0 } else { x };
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn write_table<W: Write>(
    out: &mut W,
    columns: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
    format: Format,
) -> Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "{}", columns.join(","))?;
            for row in rows {
                let line: Vec<String> = row.iter().map(|&x| number(x)).collect();
                writeln!(out, "{}", line.join(","))?;
            }
        }
        Format::Json => {
            write!(out, "[")?;
            for (i, row) in rows.enumerate() {
                let fields: Vec<String> = columns
                    .iter()
                    .zip(&row)
                    .map(|(name, &x)| format!("\"{name}\":{}", number(x)))
                    .collect();
                let sep = if i == 0 { "\n" } else { ",\n" };
                write!(out, "{sep}{{{}}}", fields.join(","))?;
            }
            writeln!(out, "\n]")?;
        }
    }
    Ok(())
}

pub fn write_series<W: Write>(out: &mut W, records: &[GeometryRecord], format: Format) -> Result<()> {
    write_table(
        out,
        &SERIES_COLUMNS,
        records.iter().map(|r| record_values(r).to_vec()),
        format,
    )
}

pub fn write_summary<W: Write>(
    out: &mut W,
    rows: &[(ScenarioParams, ExtremaSummary, f64)],
    format: Format,
) -> Result<()> {
    write_table(
        out,
        &SUMMARY_COLUMNS,
        rows.iter().map(|(p, s, eta)| summary_values(p, s, *eta).to_vec()),
        format,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::Vector3;

    fn run(nu0: f64, steps: usize) -> Vec<GeometryRecord> {
        let p = ScenarioParams::new(1.0, nu0).unwrap();
        let grid = TimeGrid::new(0.0, std::f64::consts::TAU, steps).unwrap();
        simulate_series(&p, &FieldSpec::TwoParameter(p), &grid).unwrap().1
    }

    #[test]
    fn routes_agree_along_series() {
        for r in run(1.0, 500) {
            assert_abs_diff_eq!(r.kappa2_closed, r.kappa2_bloch, epsilon = 1e-8);
            assert_abs_diff_eq!(r.kappa2_closed, r.kappa2_expect, epsilon = 1e-5);
            assert_abs_diff_eq!(r.eta_se, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn geodesic_limit_series() {
        for r in run(0.0, 200) {
            assert_eq!(r.v, 1.0);
            assert_eq!(r.kappa2_closed, 0.0);
            assert!(r.kappa2_bloch.abs() < 1e-9);
            assert!(r.kappa2_expect.abs() < 1e-6);
        }
    }

    #[test]
    fn singularity_names_the_time() {
        let p = ScenarioParams::default();
        let spec = FieldSpec::constant(0.0, Vector3::new(0.0, 0.0, 1.0));
        let grid = TimeGrid::new(0.0, 1.0, 1000).unwrap();
        match simulate_series(&p, &spec, &grid) {
            Err(Error::Singularity(msg)) => assert!(msg.contains("t = 0"), "{msg}"),
            other => panic!("expected singularity, got {other:?}"),
        }
    }

    #[test]
    fn csv_layout() {
        let records = run(1.0, 100);
        let mut buf = Vec::new();
        write_series(&mut buf, &records, Format::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SERIES_COLUMNS.join(","));
        let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(first.len(), 16);
        assert_eq!(first[9], 4.0);
        assert_eq!(lines.count(), 100);
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::f64::consts::PI] {
            assert_eq!(number(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(number(-0.0), number(0.0));
    }

    #[test]
    fn sweep_preserves_order() {
        let rows = sweep(1.0, &[2.0, 0.5, 1.0]).unwrap();
        let maxima: Vec<f64> = rows.iter().map(|r| r.1.kappa2_max).collect();
        assert_eq!(maxima, vec![16.0, 1.0, 4.0]);
        assert!(sweep(1.0, &[]).is_err());
        assert!(sweep(1.0, &[-1.0]).is_err());
    }

    #[test]
    fn format_parsing() {
        assert_eq!("CSV".parse::<Format>().unwrap(), Format::Csv);
        assert_eq!("json".parse::<Format>().unwrap(), Format::Json);
        assert!("xml".parse::<Format>().is_err());
    }
}
