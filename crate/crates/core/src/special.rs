//! Complete elliptic integral of the second kind and adaptive Simpson quadrature.
//!
//! `E(m)` uses the *parameter* convention,
//! `E(m) = integral_0^{pi/2} sqrt(1 - m sin^2 t) dt`, valid for every `m <= 1`
//! including large negative `m`. It is evaluated through Carlson's symmetric
//! forms: `E(m) = R_F(0, 1-m, 1) - (m/3) R_D(0, 1-m, 1)`.

use crate::error::{Error, Result};

const RF_ERRTOL: f64 = 1e-3;
const RD_ERRTOL: f64 = 1e-3;

/// Carlson's `R_F(x, y, z)`; arguments nonnegative, at most one zero.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> Result<f64> {
    if !(x >= 0.0 && y >= 0.0 && z >= 0.0) || [x, y, z].iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!(
            "R_F({x}, {y}, {z}) needs finite nonnegative arguments"
        )));
    }
    if (x == 0.0) as u8 + (y == 0.0) as u8 + (z == 0.0) as u8 > 1 {
        return Err(Error::Domain("R_F allows at most one zero argument".into()));
    }
    let (mut x, mut y, mut z) = (x, y, z);
    loop {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        let mu = (x + y + z) / 3.0;
        let (dx, dy, dz) = ((mu - x) / mu, (mu - y) / mu, (mu - z) / mu);
        if dx.abs().max(dy.abs()).max(dz.abs()) < RF_ERRTOL {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return Ok((1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / mu.sqrt());
        }
    }
}

/// Carlson's `R_D(x, y, z)`; `x, y >= 0` with `x + y > 0`, `z > 0`.
pub fn carlson_rd(x: f64, y: f64, z: f64) -> Result<f64> {
    if !(x >= 0.0 && y >= 0.0 && x + y > 0.0 && z > 0.0) || [x, y, z].iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("R_D({x}, {y}, {z}) is outside its domain")));
    }
    const C1: f64 = 3.0 / 14.0;
    const C2: f64 = 1.0 / 6.0;
    const C3: f64 = 9.0 / 22.0;
    const C4: f64 = 3.0 / 26.0;
    const C5: f64 = 0.25 * C3;
    const C6: f64 = 1.5 * C4;
    let (mut x, mut y, mut z) = (x, y, z);
    let mut sum = 0.0;
    let mut fac = 1.0;
    loop {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        sum += fac / (sz * (z + lambda));
        fac *= 0.25;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        let ave = 0.2 * (x + y + 3.0 * z);
        let (dx, dy, dz) = ((ave - x) / ave, (ave - y) / ave, (ave - z) / ave);
        if dx.abs().max(dy.abs()).max(dz.abs()) < RD_ERRTOL {
            let ea = dx * dy;
            let eb = dz * dz;
            let ec = ea - eb;
            let ed = ea - 6.0 * eb;
            let ee = ed + ec + ec;
            let series = 1.0 + ed * (-C1 + C5 * ed - C6 * dz * ee) + dz * (C2 * ee + dz * (-C3 * ec + dz * C4 * ea));
            return Ok(3.0 * sum + fac * series / (ave * ave.sqrt()));
        }
    }
}

/// Complete elliptic integral of the second kind, parameter convention.
pub fn elliptic_e(m: f64) -> Result<f64> {
    if m.is_nan() || m == f64::NEG_INFINITY {
        return Err(Error::Domain(format!("E(m) needs a finite parameter, got {m}")));
    }
    if m > 1.0 {
        return Err(Error::Domain(format!("E(m) is defined for m <= 1, got {m}")));
    }
    if m == 1.0 {
        return Ok(1.0);
    }
    let y = 1.0 - m;
    Ok(carlson_rf(0.0, y, 1.0)? - m / 3.0 * carlson_rd(0.0, y, 1.0)?)
}

/// Outcome of [`adaptive_simpson`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Subdivision depth limit for [`adaptive_simpson`].
pub const MAX_DEPTH: u32 = 50;
// periodic integrands can fool the first few Simpson panels
const MIN_DEPTH: u32 = 4;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

/// Adaptive Simpson rule with Richardson correction on `[a, b]`.
///
/// The per-panel error estimates `|S2 - S1| / 15` are summed into
/// `error_estimate`, which stays below `tol` on success.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidArgument(format!("need finite a < b, got [{a}, {b}]")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be > 0, got {tol}")));
    }
    let mut evaluations = 0;
    let mut eval = |x: f64| -> Result<f64> {
        evaluations += 1;
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::Domain(format!("integrand is not finite at x = {x}")))
        }
    };
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (eval(a)?, eval(m)?, eval(b)?);
    let root = Panel {
        a,
        b,
        fa,
        fm,
        fb,
        whole: (b - a) / 6.0 * (fa + 4.0 * fm + fb),
    };
    let (value, error_estimate) = refine(&mut eval, root, tol, 0)?;
    Ok(QuadratureResult {
        value,
        error_estimate,
        evaluations,
    })
}

fn refine<E>(eval: &mut E, p: Panel, tol: f64, depth: u32) -> Result<(f64, f64)>
where
    E: FnMut(f64) -> Result<f64>,
{
    let m = 0.5 * (p.a + p.b);
    let (lm, rm) = (0.5 * (p.a + m), 0.5 * (m + p.b));
    let (flm, frm) = (eval(lm)?, eval(rm)?);
    let left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
    let right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
    let delta = left + right - p.whole;
    if depth >= MIN_DEPTH && delta.abs() <= 15.0 * tol {
        return Ok((left + right + delta / 15.0, delta.abs() / 15.0));
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Convergence(format!(
            "subdivision depth {MAX_DEPTH} exceeded on [{}, {}]",
            p.a, p.b
        )));
    }
    let (lv, le) = refine(
        eval,
        Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
        },
        0.5 * tol,
        depth + 1,
    )?;
    let (rv, re) = refine(
        eval,
        Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
        },
        0.5 * tol,
        depth + 1,
    )?;
    Ok((lv + rv, le + re))
}
