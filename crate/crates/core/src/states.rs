//! Input-state families over the |j,m⟩ basis, plus random states for the
//! annealer and the state-vector text format.
//!
//! Every constructor returns a unit-norm vector with the global phase fixed
//! so the first nonzero amplitude is real non-negative.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spin;
use crate::tolerances::NORM_TOL;

/// Amplitudes α_m over m = -N/2..N/2, stored at index i = m + N/2.
#[derive(Debug, Clone, PartialEq)]
pub struct PureStateVector {
    n: usize,
    amps: Vec<Complex64>,
}

/// Whether amplitudes live on the real line or the full complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudeField {
    Real,
    Complex,
}

/// Reflection symmetry class about m = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Symmetric,
    Antisymmetric,
}

impl PureStateVector {
    /// Wrap raw amplitudes without normalization or phase fixing.
    pub(crate) fn from_raw(n: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), n + 1);
        PureStateVector { n, amps }
    }

    /// Normalize caller-supplied amplitudes (global phase left untouched).
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParticleCount(0));
        }
        if amps.len() != n + 1 {
            return Err(Error::DimensionMismatch { operator: n + 1, state: amps.len() });
        }
        let mut state = PureStateVector { n, amps };
        state.normalize()?;
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// m quantum numbers in index order.
    pub fn m_values(&self) -> Vec<f64> {
        spin::m_values(self.n)
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn normalize(&mut self) -> Result<()> {
        let nrm = self.norm();
        if nrm == 0.0 || !nrm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        for a in self.amps.iter_mut() {
            *a /= nrm;
        }
        Ok(())
    }

    /// Rotate the global phase so the first nonzero amplitude is real
    /// non-negative.
    pub(crate) fn canonicalize_phase(&mut self) {
        if let Some(first) = self.amps.iter().find(|a| a.norm() > 1e-15) {
            if first.im == 0.0 && first.re >= 0.0 {
                return;
            }
            let phase = first / first.norm();
            let rot = phase.conj();
            for a in self.amps.iter_mut() {
                *a *= rot;
            }
        }
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &PureStateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |⟨self|other⟩|, global-phase-insensitive closeness.
    pub fn fidelity(&self, other: &PureStateVector) -> f64 {
        self.overlap(other).norm()
    }

    /// Amplitudes mirrored m → -m.
    pub fn reflected(&self) -> PureStateVector {
        let mut amps = self.amps.clone();
        amps.reverse();
        PureStateVector { n: self.n, amps }
    }

    /// |α_m|² in index order.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Text format: first line N, then one line "m re im" per amplitude.
    /// f64 values print in shortest round-trip form, so write/parse is exact.
    pub fn to_text(&self) -> String {
        let ms = self.m_values();
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.n);
        for (m, a) in ms.iter().zip(self.amps.iter()) {
            let _ = writeln!(out, "{} {} {}", m, a.re, a.im);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("empty state file".into()))?
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad particle count: {e}")))?;
        if n == 0 {
            return Err(Error::InvalidParticleCount(0));
        }
        let ms = spin::m_values(n);
        let mut amps = Vec::with_capacity(n + 1);
        for (i, expected_m) in ms.iter().enumerate() {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing amplitude line {i}")))?;
            let mut parts = line.split_whitespace();
            let mut next = |name: &str| -> Result<f64> {
                parts
                    .next()
                    .ok_or_else(|| Error::Parse(format!("line {i}: missing {name}")))?
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {i}: bad {name}: {e}")))
            };
            let m = next("m")?;
            let re = next("re")?;
            let im = next("im")?;
            if (m - expected_m).abs() > 1e-9 {
                return Err(Error::Parse(format!(
                    "line {i}: m = {m}, expected {expected_m}"
                )));
            }
            amps.push(Complex64::new(re, im));
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(Error::Parse("trailing content after amplitudes".into()));
        }
        let state = PureStateVector { n, amps };
        let nrm = state.norm();
        if (nrm - 1.0).abs() > 1e-6 {
            return Err(Error::Parse(format!("state norm {nrm} is not 1")));
        }
        Ok(state)
    }
}

fn check_even(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParticleCount(0));
    }
    if n % 2 != 0 {
        return Err(Error::OddParticleCount(n));
    }
    Ok(())
}

fn finished(mut state: PureStateVector) -> Result<PureStateVector> {
    state.normalize()?;
    state.canonicalize_phase();
    debug_assert!((state.norm() - 1.0).abs() <= NORM_TOL);
    Ok(state)
}

/// |j,0⟩: equal particle numbers in both ports.
pub fn twin_fock(n: usize) -> Result<PureStateVector> {
    check_even(n)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); n + 1];
    amps[n / 2] = Complex64::new(1.0, 0.0);
    Ok(PureStateVector::from_raw(n, amps))
}

/// (|j,q⟩ + |j,-q⟩)/√2.
pub fn di_fock(n: usize, q: usize) -> Result<PureStateVector> {
    check_even(n)?;
    if q == 0 || q > n / 2 {
        return Err(Error::QOutOfRange { q, max: n / 2 });
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); n + 1];
    let w = Complex64::new(1.0 / 2.0f64.sqrt(), 0.0);
    amps[n / 2 - q] = w;
    amps[n / 2 + q] = w;
    Ok(PureStateVector::from_raw(n, amps))
}

/// (|j,j⟩ + |j,-j⟩)/√2 prepared before the first beam splitter.
pub fn noon_external(n: usize) -> Result<PureStateVector> {
    if n == 0 {
        return Err(Error::InvalidParticleCount(0));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); n + 1];
    let w = Complex64::new(1.0 / 2.0f64.sqrt(), 0.0);
    amps[0] = w;
    amps[n] = w;
    Ok(PureStateVector::from_raw(n, amps))
}

/// exp(-i(π/2)Ĵ_x) |N00N⟩: the input whose intracavity state after the
/// first beam splitter is the N00N state.
pub fn noon_internal_input(n: usize) -> Result<PureStateVector> {
    let noon = noon_external(n)?;
    let amps = spin::spectral(n).apply_rotation_x(std::f64::consts::FRAC_PI_2, noon.amplitudes());
    finished(PureStateVector::from_raw(n, amps))
}

/// (w₋|j,-q⟩ + w₀|j,0⟩ + w₊|j,q⟩), renormalized.
pub fn tri_fock(n: usize, q: usize, weights: [Complex64; 3]) -> Result<PureStateVector> {
    check_even(n)?;
    if q == 0 || q > n / 2 {
        return Err(Error::QOutOfRange { q, max: n / 2 });
    }
    if weights.iter().all(|w| w.norm() == 0.0) {
        return Err(Error::ZeroWeights);
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); n + 1];
    amps[n / 2 - q] = weights[0];
    amps[n / 2] += weights[1];
    amps[n / 2 + q] += weights[2];
    finished(PureStateVector::from_raw(n, amps))
}

/// α_m ∝ exp(-m²/σ′²): Gaussian amplitude profile around m = 0.
pub fn gaussian_state(n: usize, sigma_prime: f64) -> Result<PureStateVector> {
    check_even(n)?;
    if !(sigma_prime > 0.0) {
        return Err(Error::NonPositiveWidth(sigma_prime));
    }
    let amps: Vec<Complex64> = spin::m_values(n)
        .iter()
        .map(|&m| Complex64::new((-m * m / (sigma_prime * sigma_prime)).exp(), 0.0))
        .collect();
    finished(PureStateVector::from_raw(n, amps))
}

/// |j,γj⟩ with γj rounded to the nearest representable m.
/// Returns the state and the realized fraction m/j.
pub fn unbalanced_twin(n: usize, gamma: f64) -> Result<(PureStateVector, f64)> {
    if n == 0 {
        return Err(Error::InvalidParticleCount(0));
    }
    if !gamma.is_finite() {
        return Err(Error::GammaOutOfRange(gamma));
    }
    let j = n as f64 / 2.0;
    // index i = m + j runs over integers regardless of N's parity
    let idx = (gamma * j + j).round();
    if idx < 0.0 || idx > n as f64 {
        return Err(Error::GammaOutOfRange(gamma));
    }
    let idx = idx as usize;
    let mut amps = vec![Complex64::new(0.0, 0.0); n + 1];
    amps[idx] = Complex64::new(1.0, 0.0);
    let realized = (idx as f64 - j) / j;
    Ok((PureStateVector::from_raw(n, amps), realized))
}

/// Seed-reproducible random state: real draws uniform in [-1,1], complex
/// draws with magnitude uniform in [0,1) and phase uniform in [0,2π).
pub fn random_state(n: usize, field: AmplitudeField, seed: u64) -> Result<PureStateVector> {
    if n == 0 {
        return Err(Error::InvalidParticleCount(0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_state_with(n, field, &mut rng)
}

/// As [`random_state`] but drawing from a caller-owned generator.
pub fn random_state_with<R: Rng>(
    n: usize,
    field: AmplitudeField,
    rng: &mut R,
) -> Result<PureStateVector> {
    let amps: Vec<Complex64> = match field {
        AmplitudeField::Real => (0..=n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..=1.0), 0.0))
            .collect(),
        AmplitudeField::Complex => (0..=n)
            .map(|_| {
                let mag: f64 = rng.gen_range(0.0..1.0);
                let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                Complex64::from_polar(mag, phase)
            })
            .collect(),
    };
    finished(PureStateVector::from_raw(n, amps))
}

/// Project onto the symmetric or antisymmetric subspace about m = 0.
pub fn symmetrize(state: &PureStateVector, parity: Parity) -> Result<PureStateVector> {
    let n = state.n();
    let amps = state.amplitudes();
    let sign = match parity {
        Parity::Symmetric => 1.0,
        Parity::Antisymmetric => -1.0,
    };
    let projected: Vec<Complex64> = (0..=n)
        .map(|i| (amps[i] + sign * amps[n - i]) / 2.0)
        .collect();
    let candidate = PureStateVector::from_raw(n, projected);
    if candidate.norm() < 1e-12 {
        return Err(Error::ZeroProjection);
    }
    finished(candidate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{apply_unitary, rotation_x};
    use std::f64::consts::FRAC_PI_2;

    fn max_amp_diff(a: &PureStateVector, b: &PureStateVector) -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn twin_fock_basics() {
        let s = twin_fock(2).unwrap();
        assert_eq!(s.amplitudes()[1], Complex64::new(1.0, 0.0));
        assert_eq!(s.amplitudes()[0], Complex64::new(0.0, 0.0));
        assert_eq!(s.amplitudes()[2], Complex64::new(0.0, 0.0));
        assert!((twin_fock(100).unwrap().norm() - 1.0).abs() <= NORM_TOL);
        assert!(matches!(twin_fock(3), Err(Error::OddParticleCount(3))));
        assert!(matches!(twin_fock(0), Err(Error::InvalidParticleCount(0))));
    }

    #[test]
    fn di_fock_and_noon() {
        let s = di_fock(20, 1).unwrap();
        let w = 1.0 / 2.0f64.sqrt();
        assert!((s.amplitudes()[9].re - w).abs() < 1e-15);
        assert!((s.amplitudes()[11].re - w).abs() < 1e-15);
        assert!(matches!(di_fock(20, 11), Err(Error::QOutOfRange { .. })));
        assert!(matches!(di_fock(20, 0), Err(Error::QOutOfRange { .. })));

        // di_fock(N, N/2) is exactly the external N00N state
        let a = di_fock(20, 10).unwrap();
        let b = noon_external(20).unwrap();
        assert_eq!(a.amplitudes(), b.amplitudes());
    }

    #[test]
    fn noon_internal_round_trip() {
        // the input becomes the N00N state after the first beam splitter,
        // so undoing exp(-i(π/2)Jx) returns it
        let n = 2;
        let input = noon_internal_input(n).unwrap();
        let undo = rotation_x(n, FRAC_PI_2).unwrap();
        let back = apply_unitary(&undo, &input).unwrap();
        assert!(back.fidelity(&noon_external(n).unwrap()) > 1.0 - 1e-10);

        // spin-1 closed form: exp(-i(π/2)Jx) on (1,0,1)/√2
        let w = 1.0 / 2.0f64.sqrt();
        let jxrot = rotation_x(2, -FRAC_PI_2).unwrap();
        let noon = noon_external(2).unwrap();
        let expect = apply_unitary(&jxrot, &noon).unwrap();
        assert!(input.fidelity(&expect) > 1.0 - 1e-12);
        let _ = w;
    }

    #[test]
    fn tri_fock_equal_weights() {
        let one = Complex64::new(1.0, 0.0);
        let s = tri_fock(4, 1, [one, one, one]).unwrap();
        let w = 1.0 / 3.0f64.sqrt();
        for idx in [1, 2, 3] {
            assert!((s.amplitudes()[idx].re - w).abs() < 1e-15);
        }
        assert!(matches!(
            tri_fock(4, 1, [Complex64::new(0.0, 0.0); 3]),
            Err(Error::ZeroWeights)
        ));
    }

    #[test]
    fn gaussian_limits() {
        // σ'→0 collapses onto the twin-Fock state
        let narrow = gaussian_state(10, 1e-3).unwrap();
        assert!(max_amp_diff(&narrow, &twin_fock(10).unwrap()) <= NORM_TOL);

        let s = gaussian_state(100, 1.7).unwrap();
        let amps = s.amplitudes();
        for i in 0..=100 {
            assert_eq!(amps[i].im, 0.0);
            assert!((amps[i].re - amps[100 - i].re).abs() == 0.0, "even in m");
        }
        assert!(amps[50].re > 0.0);
        assert!(matches!(gaussian_state(10, 0.0), Err(Error::NonPositiveWidth(_))));
    }

    #[test]
    fn unbalanced_twin_rounding() {
        let (s, g) = unbalanced_twin(4, 0.0).unwrap();
        assert_eq!(s.amplitudes(), twin_fock(4).unwrap().amplitudes());
        assert_eq!(g, 0.0);

        let (s, g) = unbalanced_twin(6, 1.0).unwrap();
        assert_eq!(s.amplitudes()[6], Complex64::new(1.0, 0.0));
        assert_eq!(g, 1.0);

        let (s, g) = unbalanced_twin(100, 0.5).unwrap();
        assert_eq!(s.amplitudes()[75], Complex64::new(1.0, 0.0));
        assert_eq!(g, 0.5);

        assert!(unbalanced_twin(10, 1.4).is_err());
    }

    #[test]
    fn random_state_reproducible() {
        let a = random_state(30, AmplitudeField::Complex, 42).unwrap();
        let b = random_state(30, AmplitudeField::Complex, 42).unwrap();
        assert_eq!(a.amplitudes(), b.amplitudes());
        assert!((a.norm() - 1.0).abs() <= NORM_TOL);

        let r = random_state(30, AmplitudeField::Real, 7).unwrap();
        assert!(r.amplitudes().iter().all(|a| a.im == 0.0));
    }

    #[test]
    fn canonical_phase_applies() {
        let s = random_state(12, AmplitudeField::Complex, 3).unwrap();
        let first = s.amplitudes().iter().find(|a| a.norm() > 1e-15).unwrap();
        assert!(first.im.abs() < 1e-15 && first.re >= 0.0);
    }

    #[test]
    fn symmetrize_behaviour() {
        let tf = twin_fock(6).unwrap();
        let sym = symmetrize(&tf, Parity::Symmetric).unwrap();
        assert_eq!(sym.amplitudes(), tf.amplitudes());
        assert!(matches!(
            symmetrize(&tf, Parity::Antisymmetric),
            Err(Error::ZeroProjection)
        ));

        let r = random_state(9, AmplitudeField::Complex, 11).unwrap();
        let once = symmetrize(&r, Parity::Symmetric).unwrap();
        let twice = symmetrize(&once, Parity::Symmetric).unwrap();
        assert!(max_amp_diff(&once, &twice) < 1e-14);
    }

    #[test]
    fn text_round_trip_exact() {
        for seed in 0..4u64 {
            let s = random_state(11, AmplitudeField::Complex, seed).unwrap();
            let back = PureStateVector::from_text(&s.to_text()).unwrap();
            assert_eq!(s.amplitudes(), back.amplitudes());
            assert_eq!(s.n(), back.n());
        }
        // half-integer m line for odd N
        let s = noon_external(3).unwrap();
        let text = s.to_text();
        assert!(text.starts_with("3\n-1.5 "));
        let back = PureStateVector::from_text(&text).unwrap();
        assert_eq!(s.amplitudes(), back.amplitudes());
    }

    #[test]
    fn text_parse_rejects_garbage() {
        assert!(PureStateVector::from_text("").is_err());
        assert!(PureStateVector::from_text("2\n-1 1 0\n").is_err());
        let bad_m = "2\n-1 0.5 0\n5 0.5 0\n1 0.5 0\n";
        assert!(PureStateVector::from_text(bad_m).is_err());
        let bad_norm = "2\n-1 9 0\n0 0 0\n1 0 0\n";
        assert!(PureStateVector::from_text(bad_norm).is_err());
    }
}
