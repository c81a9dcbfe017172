//! Exact two-level linear algebra: pure states, the Pauli decomposition of
//! Hermitian 2x2 operators, Bloch vectors and expectation values.
//!
//! Global phases are never canonicalized. Compare states with
//! [`QubitState::fidelity`], not componentwise.

use nalgebra::{Matrix2, Vector2, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// A 2x2 complex operator. Hermitian wherever the API says so.
pub type Operator = Matrix2<Complex64>;

/// Tolerance on |alpha|^2 + |beta|^2 - 1 accepted by [`QubitState::new`].
pub const NORM_TOLERANCE: f64 = 1e-12;
const HERMITIAN_TOLERANCE: f64 = 1e-12;
const IMAGINARY_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity() -> Operator {
    Matrix2::new(ONE, ZERO, ZERO, ONE)
}

pub fn sigma_x() -> Operator {
    Matrix2::new(ZERO, ONE, ONE, ZERO)
}

pub fn sigma_y() -> Operator {
    Matrix2::new(ZERO, -I, I, ZERO)
}

pub fn sigma_z() -> Operator {
    Matrix2::new(ONE, ZERO, ZERO, -ONE)
}

/// Normalized pure state `alpha|0> + beta|1>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    alpha: Complex64,
    beta: Complex64,
}

impl QubitState {
    /// Builds a state from amplitudes that are already normalized.
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        check_finite_amplitudes(alpha, beta)?;
        let norm_sq = alpha.norm_sqr() + beta.norm_sqr();
        if (norm_sq - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::ContractViolation(format!(
                "state is not normalized: |alpha|^2 + |beta|^2 = {norm_sq}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// Rescales arbitrary nonzero amplitudes onto the unit sphere.
    pub fn normalized(alpha: Complex64, beta: Complex64) -> Result<Self> {
        check_finite_amplitudes(alpha, beta)?;
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero vector cannot be normalized".into()));
        }
        Ok(Self {
            alpha: alpha / norm,
            beta: beta / norm,
        })
    }

    pub fn from_vector(v: &Vector2<Complex64>) -> Result<Self> {
        Self::new(v[0], v[1])
    }

    /// `|0>`, the north pole of the Bloch sphere.
    pub fn zero() -> Self {
        Self { alpha: ONE, beta: ZERO }
    }

    /// `|1>`, the south pole.
    pub fn one() -> Self {
        Self { alpha: ZERO, beta: ONE }
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn as_vector(&self) -> Vector2<Complex64> {
        Vector2::new(self.alpha, self.beta)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &QubitState) -> Complex64 {
        self.alpha.conj() * other.alpha + self.beta.conj() * other.beta
    }

    /// `|<self|other>|`, insensitive to global phase.
    pub fn fidelity(&self, other: &QubitState) -> f64 {
        self.inner(other).norm()
    }

    /// Multiplies by `exp(i phase)`.
    pub fn with_phase(&self, phase: f64) -> Self {
        let factor = Complex64::from_polar(1.0, phase);
        Self {
            alpha: self.alpha * factor,
            beta: self.beta * factor,
        }
    }

    pub fn bloch(&self) -> BlochVector {
        bloch_vector(self)
    }
}

fn check_finite_amplitudes(alpha: Complex64, beta: Complex64) -> Result<()> {
    if alpha.is_finite() && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument("amplitudes must be finite".into()))
    }
}

/// Unit Bloch vector of a pure state, `a = <sigma>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector(Vector3<f64>);

impl BlochVector {
    /// Accepts only vectors of unit length (within 1e-10).
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Vector3::new(x, y, z);
        if !v.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidArgument("Bloch vector must be finite".into()));
        }
        if (v.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::ContractViolation(format!(
                "pure-state Bloch vector must have unit norm, got {}",
                v.norm()
            )));
        }
        Ok(Self(v))
    }

    /// Projects any nonzero vector onto the unit sphere.
    pub fn normalized(v: Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidArgument(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        Ok(Self(v / n))
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }

    pub fn y(&self) -> f64 {
        self.0.y
    }

    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn as_vec(&self) -> &Vector3<f64> {
        &self.0
    }

    /// A state with this Bloch vector (global phase chosen so alpha is real).
    pub fn to_state(&self) -> QubitState {
        let theta = self.0.z.clamp(-1.0, 1.0).acos();
        let phi = self.0.y.atan2(self.0.x);
        state_from_angles(theta, phi).expect("finite angles")
    }
}

/// Real Pauli coordinates `(h0, h)` of the Hermitian operator `h0 I + h . sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliDecomp {
    pub h0: f64,
    pub h: Vector3<f64>,
}

impl PauliDecomp {
    pub fn new(h0: f64, h: Vector3<f64>) -> Self {
        Self { h0, h }
    }

    pub fn compose(&self) -> Operator {
        pauli_compose(self.h0, &self.h)
    }

    /// Energy levels `h0 -/+ |h|`, lower first.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let split = self.h.norm();
        (self.h0 - split, self.h0 + split)
    }

    /// Largest singular value, `|h0| + |h|`.
    pub fn spectral_norm(&self) -> f64 {
        self.h0.abs() + self.h.norm()
    }

    /// `<Q> = q0 + a . q`.
    pub fn expectation(&self, a: &BlochVector) -> f64 {
        self.h0 + a.as_vec().dot(&self.h)
    }
}

/// `cos(theta/2)|0> + exp(i phi) sin(theta/2)|1>`.
pub fn state_from_angles(theta: f64, phi: f64) -> Result<QubitState> {
    if !(theta.is_finite() && phi.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "angles must be finite (theta = {theta}, phi = {phi})"
        )));
    }
    let half = 0.5 * theta;
    Ok(QubitState {
        alpha: Complex64::new(half.cos(), 0.0),
        beta: Complex64::from_polar(half.sin(), phi),
    })
}

/// `(<sigma_x>, <sigma_y>, <sigma_z>)` for a pure state.
pub fn bloch_vector(state: &QubitState) -> BlochVector {
    let cross = state.alpha.conj() * state.beta;
    BlochVector(Vector3::new(
        2.0 * cross.re,
        2.0 * cross.im,
        state.alpha.norm_sqr() - state.beta.norm_sqr(),
    ))
}

/// `[[h0 + hz, hx - i hy], [hx + i hy, h0 - hz]]`.
pub fn pauli_compose(h0: f64, h: &Vector3<f64>) -> Operator {
    Matrix2::new(
        Complex64::new(h0 + h.z, 0.0),
        Complex64::new(h.x, -h.y),
        Complex64::new(h.x, h.y),
        Complex64::new(h0 - h.z, 0.0),
    )
}

fn scale_of(m: &Operator) -> f64 {
    m.iter().map(|c| c.norm()).fold(1.0, f64::max)
}

pub fn is_hermitian(m: &Operator, tol: f64) -> bool {
    let scale = scale_of(m);
    (m - m.adjoint()).iter().all(|c| c.norm() <= tol * scale)
}

/// Inverse of [`pauli_compose`]: `h0 = tr(M)/2`, `h_k = tr(M sigma_k)/2`.
pub fn pauli_decompose(m: &Operator) -> Result<PauliDecomp> {
    if !m.iter().all(|c| c.is_finite()) {
        return Err(Error::InvalidArgument("operator has non-finite entries".into()));
    }
    if !is_hermitian(m, HERMITIAN_TOLERANCE) {
        return Err(Error::ContractViolation("operator is not Hermitian".into()));
    }
    let h0 = 0.5 * (m[(0, 0)].re + m[(1, 1)].re);
    let hz = 0.5 * (m[(0, 0)].re - m[(1, 1)].re);
    // average the two off-diagonal entries so tiny anti-Hermitian noise cancels
    let off = 0.5 * (m[(1, 0)] + m[(0, 1)].conj());
    Ok(PauliDecomp::new(h0, Vector3::new(off.re, off.im, hz)))
}

/// `<psi|M|psi>`, which must be real for Hermitian `M`.
pub fn expectation(m: &Operator, state: &QubitState) -> Result<f64> {
    let value = complex_expectation(m, state);
    if value.im.abs() > IMAGINARY_TOLERANCE * scale_of(m) {
        return Err(Error::NumericalConsistency(format!(
            "expectation value has imaginary part {:e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// `<psi|M|psi>` for an arbitrary (not necessarily Hermitian) operator.
pub fn complex_expectation(m: &Operator, state: &QubitState) -> Complex64 {
    let v = state.as_vector();
    v.dotc(&(m * v))
}
