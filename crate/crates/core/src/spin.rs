//! Angular-momentum operators in the Ĵ_z eigenbasis and the interferometer
//! rotations acting on state vectors.
//!
//! The two bosonic modes with fixed total particle number N map onto a spin
//! j = N/2. Basis states are indexed by i = m + N/2 ∈ {0..N}; all public
//! surfaces report the quantum number m, never the raw index.
//!
//! Rotations exp(-i angle Ĵ_x) and exp(-i angle Ĵ_y) share one spectral
//! decomposition per N: Ĵ_x is real symmetric tridiagonal, and Ĵ_y is
//! unitarily equivalent to it under the diagonal phase matrix diag(i^k).
//! The decomposition costs O(N^3) once and is cached; applying a rotation to
//! a vector afterwards costs O(N^2) per angle.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;

use crate::error::{Error, Result};
use crate::linalg::{symmetric_tridiagonal_eigen, CMatrix};
use crate::states::PureStateVector;

/// Hermitian operator on the N+1 dimensional two-mode space,
/// row/col indexed by i = m + N/2.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub(crate) inner: CMatrix,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.inner.at(row, col)
    }

    /// Largest |A[i][k] - conj(A[k][i])|.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.inner.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for k in 0..n {
                worst = worst.max((self.inner.at(i, k) - self.inner.at(k, i).conj()).norm());
            }
        }
        worst
    }

    pub fn commutator(&self, rhs: &OperatorMatrix) -> OperatorMatrix {
        let ab = self.inner.matmul(&rhs.inner);
        let ba = rhs.inner.matmul(&self.inner);
        let mut data = ab.data;
        for (x, y) in data.iter_mut().zip(ba.data.iter()) {
            *x -= y;
        }
        OperatorMatrix { inner: CMatrix { dim: ab.dim, data } }
    }

    pub fn scaled(&self, factor: Complex64) -> OperatorMatrix {
        let mut inner = self.inner.clone();
        for x in inner.data.iter_mut() {
            *x *= factor;
        }
        OperatorMatrix { inner }
    }

    pub fn max_abs_diff(&self, rhs: &OperatorMatrix) -> f64 {
        self.inner.max_abs_diff(&rhs.inner)
    }

    /// <state| A |state>.
    pub fn expectation(&self, state: &PureStateVector) -> Result<Complex64> {
        if state.dim() != self.inner.dim {
            return Err(Error::DimensionMismatch { operator: self.inner.dim, state: state.dim() });
        }
        let av = self.inner.matvec(state.amplitudes());
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in state.amplitudes().iter().zip(av.iter()) {
            acc += a.conj() * b;
        }
        Ok(acc)
    }
}

/// Unitary on the two-mode space (beam splitters, phase shifts, rotations).
#[derive(Debug, Clone)]
pub struct UnitaryMatrix {
    pub(crate) inner: CMatrix,
}

impl UnitaryMatrix {
    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.inner.at(row, col)
    }

    /// Largest deviation of U·U† from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        self.inner.unitarity_defect()
    }

    pub fn matmul(&self, rhs: &UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix { inner: self.inner.matmul(&rhs.inner) }
    }

    pub fn max_abs_diff(&self, rhs: &UnitaryMatrix) -> f64 {
        self.inner.max_abs_diff(&rhs.inner)
    }

    /// Largest |imaginary part| over all entries.
    pub fn max_imag(&self) -> f64 {
        self.inner.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

/// The four operators for a given particle number.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub n: usize,
    pub jx: OperatorMatrix,
    pub jy: OperatorMatrix,
    pub jz: OperatorMatrix,
    pub j2: OperatorMatrix,
}

/// Which route computes exp(-i phi Ĵ_y).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationBackend {
    /// Spectral form of the tridiagonal Ĵ_y equivalent.
    Spectral,
    /// Three-factor beam-splitter product
    /// exp(-i(π/2)Ĵ_x) · exp(i phi Ĵ_z) · exp(i(π/2)Ĵ_x).
    BeamSplitterProduct,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParticleCount(0));
    }
    Ok(())
}

fn check_angle(angle: f64) -> Result<()> {
    if !angle.is_finite() {
        return Err(Error::InvalidConfig(format!("rotation angle must be finite, got {angle}")));
    }
    Ok(())
}

/// m quantum numbers in index order, m_i = i - N/2.
pub fn m_values(n: usize) -> Vec<f64> {
    let j = n as f64 / 2.0;
    (0..=n).map(|i| i as f64 - j).collect()
}

/// Ladder couplings f_i = sqrt(j(j+1) - m_i(m_i+1)) linking i and i+1.
fn ladder_couplings(n: usize) -> Vec<f64> {
    let j = n as f64 / 2.0;
    let jj = j * (j + 1.0);
    m_values(n)
        .iter()
        .take(n)
        .map(|&m| (jj - m * (m + 1.0)).sqrt())
        .collect()
}

/// Build Ĵ_x, Ĵ_y, Ĵ_z, Ĵ² for N particles from the standard ladder action.
pub fn build_operators(n: usize) -> Result<SpinOperators> {
    check_n(n)?;
    let dim = n + 1;
    let j = n as f64 / 2.0;
    let ms = m_values(n);
    let f = ladder_couplings(n);

    let mut jx = CMatrix::zeros(dim);
    let mut jy = CMatrix::zeros(dim);
    let mut jz = CMatrix::zeros(dim);
    for i in 0..dim {
        jz.set(i, i, Complex64::new(ms[i], 0.0));
    }
    for i in 0..n {
        let half = f[i] / 2.0;
        jx.set(i + 1, i, Complex64::new(half, 0.0));
        jx.set(i, i + 1, Complex64::new(half, 0.0));
        jy.set(i + 1, i, Complex64::new(0.0, -half));
        jy.set(i, i + 1, Complex64::new(0.0, half));
    }
    let mut j2 = CMatrix::zeros(dim);
    let jj = j * (j + 1.0);
    for i in 0..dim {
        j2.set(i, i, Complex64::new(jj, 0.0));
    }

    Ok(SpinOperators {
        n,
        jx: OperatorMatrix { inner: jx },
        jy: OperatorMatrix { inner: jy },
        jz: OperatorMatrix { inner: jz },
        j2: OperatorMatrix { inner: j2 },
    })
}

/// Shared spectral data for the rotations at one particle number.
pub(crate) struct SpinSpectral {
    dim: usize,
    pub m_values: Vec<f64>,
    ladder: Vec<f64>,
    /// Eigenvalues of the Ĵ_x tridiagonal (mathematically -j..j).
    eigenvalues: Vec<f64>,
    /// Orthogonal eigenvectors, row-major [r * dim + c].
    vectors: Vec<f64>,
}

impl SpinSpectral {
    fn build(n: usize) -> SpinSpectral {
        let dim = n + 1;
        let f = ladder_couplings(n);
        let off: Vec<f64> = f.iter().map(|x| x / 2.0).collect();
        let diag = vec![0.0f64; dim];
        let (eigenvalues, vectors) = symmetric_tridiagonal_eigen(&diag, &off);
        SpinSpectral { dim, m_values: m_values(n), ladder: f, eigenvalues, vectors }
    }

    /// V^T v for real V and complex v.
    fn vt_apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for r in 0..n {
            let vr = v[r];
            if vr.norm_sqr() == 0.0 {
                continue;
            }
            let row = &self.vectors[r * n..(r + 1) * n];
            for (o, &w) in out.iter_mut().zip(row.iter()) {
                *o += w * vr;
            }
        }
        out
    }

    fn v_apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for r in 0..n {
            let row = &self.vectors[r * n..(r + 1) * n];
            let mut acc = Complex64::new(0.0, 0.0);
            for (&w, b) in row.iter().zip(v.iter()) {
                acc += w * b;
            }
            out[r] = acc;
        }
        out
    }

    /// exp(-i angle Ĵ_x) applied to a raw amplitude vector.
    pub fn apply_rotation_x(&self, angle: f64, v: &[Complex64]) -> Vec<Complex64> {
        let mut u = self.vt_apply(v);
        for (uk, &lambda) in u.iter_mut().zip(self.eigenvalues.iter()) {
            *uk *= Complex64::from_polar(1.0, -angle * lambda);
        }
        self.v_apply(&u)
    }

    /// exp(-i angle Ĵ_y) applied to a raw amplitude vector, through the
    /// diag(i^k) equivalence with the Ĵ_x tridiagonal.
    pub fn apply_rotation_y(&self, angle: f64, v: &[Complex64]) -> Vec<Complex64> {
        let w: Vec<Complex64> = v.iter().enumerate().map(|(k, &a)| a * unit_power(k)).collect();
        let mut u = self.apply_rotation_x(angle, &w);
        for (k, uk) in u.iter_mut().enumerate() {
            *uk *= unit_power(k).conj();
        }
        u
    }

    /// exp(i phi Ĵ_z): diagonal phases e^{i phi m}.
    pub fn apply_phase_z(&self, phi: f64, v: &[Complex64]) -> Vec<Complex64> {
        v.iter()
            .zip(self.m_values.iter())
            .map(|(&a, &m)| a * Complex64::from_polar(1.0, phi * m))
            .collect()
    }

    /// The Eq.-8 route: output beam splitter, phase, input beam splitter.
    pub fn apply_beam_splitter_path(&self, phi: f64, v: &[Complex64]) -> Vec<Complex64> {
        let after_input_bs = self.apply_rotation_x(-std::f64::consts::FRAC_PI_2, v);
        let phased = self.apply_phase_z(phi, &after_input_bs);
        self.apply_rotation_x(std::f64::consts::FRAC_PI_2, &phased)
    }

    /// f_i / 2 couplings, the off-diagonal entries of Ĵ_x.
    pub fn ladder_halves(&self) -> Vec<f64> {
        self.ladder.iter().map(|f| f / 2.0).collect()
    }

    /// Ĵ_y · v through the tridiagonal ladder structure, O(N).
    pub fn apply_jy(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n - 1 {
            let half = self.ladder[i] / 2.0;
            // (Jy)_{i+1,i} = -i f_i/2, (Jy)_{i,i+1} = +i f_i/2
            out[i + 1] += Complex64::new(0.0, -half) * v[i];
            out[i] += Complex64::new(0.0, half) * v[i + 1];
        }
        out
    }

    fn materialize<F>(&self, apply: F) -> CMatrix
    where
        F: Fn(&[Complex64]) -> Vec<Complex64>,
    {
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        let mut basis = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            basis[c] = Complex64::new(1.0, 0.0);
            let col = apply(&basis);
            for r in 0..n {
                out.set(r, c, col[r]);
            }
            basis[c] = Complex64::new(0.0, 0.0);
        }
        out
    }
}

#[inline]
fn unit_power(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

static SPECTRAL_CACHE: Lazy<Mutex<HashMap<usize, Arc<SpinSpectral>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Cached spectral data for particle number n. The decomposition is built
/// outside the lock so concurrent sweeps over distinct n do not serialize.
pub(crate) fn spectral(n: usize) -> Arc<SpinSpectral> {
    if let Some(found) = SPECTRAL_CACHE.lock().unwrap().get(&n) {
        return Arc::clone(found);
    }
    let built = Arc::new(SpinSpectral::build(n));
    let mut cache = SPECTRAL_CACHE.lock().unwrap();
    Arc::clone(cache.entry(n).or_insert(built))
}

/// exp(-i angle Ĵ_y): the interferometer rotation as a full matrix.
pub fn rotation_y(n: usize, angle: f64) -> Result<UnitaryMatrix> {
    rotation_y_with(n, angle, RotationBackend::Spectral)
}

/// exp(-i angle Ĵ_y) through a chosen backend.
pub fn rotation_y_with(n: usize, angle: f64, backend: RotationBackend) -> Result<UnitaryMatrix> {
    check_n(n)?;
    check_angle(angle)?;
    let sp = spectral(n);
    let inner = match backend {
        RotationBackend::Spectral => sp.materialize(|v| sp.apply_rotation_y(angle, v)),
        RotationBackend::BeamSplitterProduct => {
            sp.materialize(|v| sp.apply_beam_splitter_path(angle, v))
        }
    };
    Ok(UnitaryMatrix { inner })
}

/// exp(-i angle Ĵ_x): beam-splitter rotation as a full matrix.
pub fn rotation_x(n: usize, angle: f64) -> Result<UnitaryMatrix> {
    check_n(n)?;
    check_angle(angle)?;
    let sp = spectral(n);
    Ok(UnitaryMatrix { inner: sp.materialize(|v| sp.apply_rotation_x(angle, v)) })
}

/// Diagonal one-axis-twisting evolution: α_m ← exp(-i chi_tau m²) α_m.
pub fn evolve_jz_squared(state: &PureStateVector, chi_tau: f64) -> PureStateVector {
    let n = state.n();
    let ms = m_values(n);
    let amps: Vec<Complex64> = state
        .amplitudes()
        .iter()
        .zip(ms.iter())
        .map(|(&a, &m)| a * Complex64::from_polar(1.0, -chi_tau * m * m))
        .collect();
    PureStateVector::from_raw(n, amps)
}

/// U · state, preserving the amplitude phases as computed.
pub fn apply_unitary(u: &UnitaryMatrix, state: &PureStateVector) -> Result<PureStateVector> {
    if u.dim() != state.dim() {
        return Err(Error::DimensionMismatch { operator: u.dim(), state: state.dim() });
    }
    let amps = u.inner.matvec(state.amplitudes());
    Ok(PureStateVector::from_raw(state.n(), amps))
}
