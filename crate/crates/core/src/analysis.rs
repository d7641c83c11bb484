//! N-sweeps, power-law fits of the uncertainty scaling, and the
//! twist-and-align engineering of the gaussian input state.

use std::io;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::estimation::{fisher_information, optimal_error_propagation};
use crate::exec;
use crate::interferometer::{jz_moments, propagate, MomentReport};
use crate::spin;
use crate::states::{self, AmplitudeField, PureStateVector};

/// Least-squares fit of sigma = C / N^beta in log-log space.
#[derive(Debug, Clone)]
pub struct ScalingFit {
    pub c: f64,
    pub beta: f64,
    /// RMS residual of log sigma about the fit line.
    pub residual: f64,
    pub points: Vec<(usize, f64)>,
}

impl ScalingFit {
    /// Flat key/value summary, one JSON object on one line.
    pub fn to_json_text(&self) -> String {
        format!(
            "{{\"C\": {}, \"beta\": {}, \"residual\": {}}}",
            self.c, self.beta, self.residual
        )
    }
}

/// Ordinary least squares of log sigma = log C - beta log N.
pub fn fit_power_law(points: &[(usize, f64)]) -> Result<ScalingFit> {
    if points.len() < 2 {
        return Err(Error::UnderdeterminedFit(points.len()));
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidConfig("N values must be strictly increasing".into()));
    }
    if points.iter().any(|&(_, s)| !(s > 0.0)) {
        return Err(Error::InvalidConfig("sigma values must be positive".into()));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(nn, _)| (nn as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, s)| s.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs.iter().zip(ys.iter()).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let residual = (xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(ScalingFit { c: intercept.exp(), beta: -slope, residual, points: points.to_vec() })
}

/// q for the di-/tri-Fock families: fixed, or a fraction of j = N/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QSpec {
    Fixed(usize),
    Fraction(f64),
}

impl QSpec {
    fn resolve(&self, n: usize) -> usize {
        match *self {
            QSpec::Fixed(q) => q,
            QSpec::Fraction(frac) => ((frac * n as f64 / 2.0).round() as usize).max(1),
        }
    }
}

/// A named input-state constructor plus its parameters; `q` or `gamma`
/// scale with N where the family demands it.
#[derive(Debug, Clone, PartialEq)]
pub enum StateFamily {
    TwinFock,
    DiFock { q: QSpec },
    NoonExternal,
    NoonInternal,
    TriFock { q: QSpec },
    Gaussian { sigma_prime: f64 },
    UnbalancedTwin { gamma: f64 },
    Engineered,
    RandomReal { seed: u64 },
    RandomComplex { seed: u64 },
}

impl StateFamily {
    pub fn construct(&self, n: usize) -> Result<PureStateVector> {
        match self {
            StateFamily::TwinFock => states::twin_fock(n),
            StateFamily::DiFock { q } => states::di_fock(n, q.resolve(n)),
            StateFamily::NoonExternal => states::noon_external(n),
            StateFamily::NoonInternal => states::noon_internal_input(n),
            StateFamily::TriFock { q } => {
                let one = Complex64::new(1.0, 0.0);
                states::tri_fock(n, q.resolve(n), [one, one, one])
            }
            StateFamily::Gaussian { sigma_prime } => states::gaussian_state(n, *sigma_prime),
            StateFamily::UnbalancedTwin { gamma } => {
                Ok(states::unbalanced_twin(n, *gamma)?.0)
            }
            StateFamily::Engineered => engineer_gaussian(n),
            StateFamily::RandomReal { seed } => states::random_state(n, AmplitudeField::Real, *seed),
            StateFamily::RandomComplex { seed } => {
                states::random_state(n, AmplitudeField::Complex, *seed)
            }
        }
    }
}

impl std::fmt::Display for StateFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StateFamily::TwinFock => write!(f, "twin_fock"),
            StateFamily::DiFock { q: QSpec::Fixed(q) } => write!(f, "di_fock:q={q}"),
            StateFamily::DiFock { q: QSpec::Fraction(g) } => write!(f, "di_fock:gamma={g}"),
            StateFamily::NoonExternal => write!(f, "noon_external"),
            StateFamily::NoonInternal => write!(f, "noon_internal"),
            StateFamily::TriFock { q: QSpec::Fixed(q) } => write!(f, "tri_fock:q={q}"),
            StateFamily::TriFock { q: QSpec::Fraction(g) } => write!(f, "tri_fock:gamma={g}"),
            StateFamily::Gaussian { sigma_prime } => write!(f, "gaussian:sigma={sigma_prime}"),
            StateFamily::UnbalancedTwin { gamma } => write!(f, "unbalanced_twin:gamma={gamma}"),
            StateFamily::Engineered => write!(f, "engineered"),
            StateFamily::RandomReal { seed } => write!(f, "random_real:seed={seed}"),
            StateFamily::RandomComplex { seed } => write!(f, "random_complex:seed={seed}"),
        }
    }
}

impl FromStr for StateFamily {
    type Err = Error;

    /// Mini-grammar `name:key=value,key=value`, e.g. `gaussian:sigma=1.7`.
    fn from_str(spec: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidConfig(msg);
        let (name, params) = match spec.split_once(':') {
            Some((n, p)) => (n, p),
            None => (spec, ""),
        };
        let mut q: Option<QSpec> = None;
        let mut gamma: Option<f64> = None;
        let mut sigma: Option<f64> = None;
        let mut seed: Option<u64> = None;
        for pair in params.split(',').filter(|p| !p.is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got '{pair}'")))?;
            match key {
                "q" => {
                    q = Some(QSpec::Fixed(
                        value.parse().map_err(|e| bad(format!("bad q: {e}")))?,
                    ))
                }
                "gamma" => gamma = Some(value.parse().map_err(|e| bad(format!("bad gamma: {e}")))?),
                "sigma" => sigma = Some(value.parse().map_err(|e| bad(format!("bad sigma: {e}")))?),
                "seed" => seed = Some(value.parse().map_err(|e| bad(format!("bad seed: {e}")))?),
                other => return Err(bad(format!("unknown parameter '{other}'"))),
            }
        }
        match name {
            "twin_fock" => Ok(StateFamily::TwinFock),
            "di_fock" => {
                let q = match (q, gamma) {
                    (Some(q), None) => q,
                    (None, Some(g)) => QSpec::Fraction(g),
                    _ => return Err(bad("di_fock takes q=<int> or gamma=<frac>".into())),
                };
                Ok(StateFamily::DiFock { q })
            }
            "noon_external" => Ok(StateFamily::NoonExternal),
            "noon_internal" => Ok(StateFamily::NoonInternal),
            "tri_fock" => {
                let q = match (q, gamma) {
                    (Some(q), None) => q,
                    (None, Some(g)) => QSpec::Fraction(g),
                    _ => return Err(bad("tri_fock takes q=<int> or gamma=<frac>".into())),
                };
                Ok(StateFamily::TriFock { q })
            }
            "gaussian" => Ok(StateFamily::Gaussian {
                sigma_prime: sigma.ok_or_else(|| bad("gaussian requires sigma=<width>".into()))?,
            }),
            "unbalanced_twin" => Ok(StateFamily::UnbalancedTwin {
                gamma: gamma.ok_or_else(|| bad("unbalanced_twin requires gamma=<frac>".into()))?,
            }),
            "engineered" => Ok(StateFamily::Engineered),
            "random_real" => Ok(StateFamily::RandomReal { seed: seed.unwrap_or(0) }),
            "random_complex" => Ok(StateFamily::RandomComplex { seed: seed.unwrap_or(0) }),
            other => Err(bad(format!("unknown state family '{other}'"))),
        }
    }
}

/// (N, 1/sqrt(F)) per N, evaluated concurrently across the sweep.
pub fn sweep_fisher(
    family: &StateFamily,
    n_list: &[usize],
    theta: f64,
) -> Result<Vec<(usize, f64)>> {
    let results = exec::map_slice(n_list, |&n| -> Result<(usize, f64)> {
        let state = family.construct(n)?;
        Ok((n, fisher_information(&state, theta).sigma))
    });
    results.into_iter().collect()
}

/// Error-propagation uncertainty per N (scanning theta for the best point),
/// plus its power-law fit.
pub fn sweep_error_propagation(
    family: &StateFamily,
    n_list: &[usize],
) -> Result<(Vec<(usize, f64)>, ScalingFit)> {
    let results = exec::map_slice(n_list, |&n| -> Result<(usize, f64)> {
        let state = family.construct(n)?;
        let (_, dphi) = optimal_error_propagation(&state)?;
        Ok((n, dphi))
    });
    let points: Vec<(usize, f64)> = results.into_iter().collect::<Result<_>>()?;
    let fit = fit_power_law(&points)?;
    Ok((points, fit))
}

/// CSV with columns N, sigma.
pub fn write_sweep_csv<W: io::Write>(points: &[(usize, f64)], mut w: W) -> io::Result<()> {
    writeln!(w, "N,sigma")?;
    for (n, sigma) in points {
        writeln!(w, "{},{}", n, sigma)?;
    }
    Ok(())
}

/// Prepare the gaussian input state by Hamiltonian dynamics: twist the
/// twin-Fock state with exp(-i (3π/4N) Ĵ_x), which leaves the m = ±1
/// components π/2 out of phase with m = 0, then align them with the
/// one-axis-twisting phases exp(-i (3π/2) m²).
pub fn engineer_gaussian(n: usize) -> Result<PureStateVector> {
    let twisted = engineer_gaussian_before_alignment(n)?;
    let aligned = spin::evolve_jz_squared(&twisted, 3.0 * std::f64::consts::FRAC_PI_2);
    let mut state = aligned;
    state.canonicalize_phase();
    Ok(state)
}

/// The intermediate state after the Ĵ_x evolution, before phase alignment.
pub fn engineer_gaussian_before_alignment(n: usize) -> Result<PureStateVector> {
    let twin = states::twin_fock(n)?;
    let angle = 3.0 * std::f64::consts::PI / (4.0 * n as f64);
    let amps = spin::spectral(n).apply_rotation_x(angle, twin.amplitudes());
    let mut state = PureStateVector::from_raw(n, amps);
    state.canonicalize_phase();
    Ok(state)
}

/// ⟨Ĵ_z⟩ sweeps for the aligned gaussian state and its π/2-dephased
/// counterpart (every odd-m component rotated by i, the m = ±1 components
/// being the dominant ones).
#[derive(Debug, Clone)]
pub struct MisalignmentDemo {
    pub phis: Vec<f64>,
    pub aligned: Vec<MomentReport>,
    pub misaligned: Vec<MomentReport>,
}

pub fn phase_misalignment_demo(n: usize, phis: &[f64]) -> Result<MisalignmentDemo> {
    let aligned_state = states::gaussian_state(n, 1.7)?;
    let misaligned_state = dephase_odd_components(&aligned_state);
    let aligned = exec::map_slice(phis, |&phi| jz_moments(&propagate(&aligned_state, phi)));
    let misaligned = exec::map_slice(phis, |&phi| jz_moments(&propagate(&misaligned_state, phi)));
    Ok(MisalignmentDemo { phis: phis.to_vec(), aligned, misaligned })
}

/// Rotate every odd-m amplitude by i, putting them π/2 out of phase with
/// the even-m components. The reflection-conjugation symmetry of the result
/// forces ⟨Ĵ_z⟩(φ) = 0 for every φ.
pub fn dephase_odd_components(state: &PureStateVector) -> PureStateVector {
    let n = state.n();
    let ms = state.m_values();
    let amps: Vec<Complex64> = state
        .amplitudes()
        .iter()
        .zip(ms.iter())
        .map(|(&a, &m)| {
            if (m.round() as i64).rem_euclid(2) != 0 {
                a * Complex64::new(0.0, 1.0)
            } else {
                a
            }
        })
        .collect();
    PureStateVector::from_raw(n, amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn power_law_fit_exact() {
        let points: Vec<(usize, f64)> =
            [4usize, 8, 16, 32].iter().map(|&n| (n, 3.0 / (n as f64).powi(2))).collect();
        let fit = fit_power_law(&points).unwrap();
        assert!((fit.c - 3.0).abs() < 1e-10);
        assert!((fit.beta - 2.0).abs() < 1e-10);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn power_law_fit_rejects_bad_input() {
        assert!(matches!(
            fit_power_law(&[(10, 0.1)]),
            Err(Error::UnderdeterminedFit(1))
        ));
        assert!(fit_power_law(&[(10, 0.1), (10, 0.2)]).is_err());
        assert!(fit_power_law(&[(10, 0.1), (20, 0.0)]).is_err());
    }

    #[test]
    fn family_grammar_round_trip() {
        for spec in [
            "twin_fock",
            "di_fock:q=1",
            "di_fock:gamma=0.9",
            "noon_external",
            "noon_internal",
            "tri_fock:q=2",
            "gaussian:sigma=1.7",
            "unbalanced_twin:gamma=0.5",
            "engineered",
            "random_real:seed=7",
        ] {
            let family: StateFamily = spec.parse().unwrap();
            assert_eq!(family.to_string(), spec);
            family.construct(20).unwrap();
        }
        assert!("nope".parse::<StateFamily>().is_err());
        assert!("gaussian".parse::<StateFamily>().is_err());
        assert!("di_fock:q=1,gamma=0.5".parse::<StateFamily>().is_err());
    }

    #[test]
    fn twin_fock_sweep_matches_closed_form() {
        let points = sweep_fisher(&StateFamily::TwinFock, &[50, 100, 200, 400], 0.0).unwrap();
        for &(n, sigma) in &points {
            let expect = (2.0 / (n as f64 * (n as f64 + 2.0))).sqrt();
            assert!((sigma - expect).abs() / expect < 1e-12);
        }
        let fit = fit_power_law(&points).unwrap();
        assert!(fit.beta > 0.95 && fit.beta < 1.05, "beta {}", fit.beta);
        assert!(fit.c > 1.3 && fit.c < 1.5, "C {}", fit.c);
    }

    #[test]
    fn noon_external_sweep_is_shot_noise() {
        let points = sweep_fisher(&StateFamily::NoonExternal, &[50, 100, 200], 0.0).unwrap();
        for &(n, sigma) in &points {
            let expect = 1.0 / (n as f64).sqrt();
            assert!((sigma - expect).abs() / expect < 0.05);
        }
        let fit = fit_power_law(&points).unwrap();
        assert!(fit.beta > 0.45 && fit.beta < 0.55);
    }

    #[test]
    fn engineered_state_structure() {
        let n = 100;
        assert!(engineer_gaussian(99).is_err());

        // before alignment the m = ±1 components sit π/2 away from m = 0
        let before = engineer_gaussian_before_alignment(n).unwrap();
        let amps = before.amplitudes();
        let center = amps[n / 2];
        for idx in [n / 2 - 1, n / 2 + 1] {
            let rel = (amps[idx] / center).arg().abs();
            assert!(
                (rel - std::f64::consts::FRAC_PI_2).abs() < 1e-9,
                "relative phase {rel}"
            );
        }

        // after alignment the three dominant components share one phase
        let state = engineer_gaussian(n).unwrap();
        assert!((state.norm() - 1.0).abs() < 1e-12);
        let amps = state.amplitudes();
        let center_phase = amps[n / 2].arg();
        for idx in [n / 2 - 1, n / 2 + 1] {
            let mut diff = amps[idx].arg() - center_phase;
            while diff > PI {
                diff -= 2.0 * PI;
            }
            while diff < -PI {
                diff += 2.0 * PI;
            }
            assert!(diff.abs() < 1e-6, "phase misalignment {diff}");
        }

        // amplitude profile tracks the σ' ≈ 1.7 gaussian on m = 0, ±1
        let reference = states::gaussian_state(n, 1.7).unwrap();
        for idx in [n / 2 - 1, n / 2, n / 2 + 1] {
            let a = amps[idx].norm();
            let b = reference.amplitudes()[idx].norm();
            assert!((a - b).abs() / b < 0.1, "idx {idx}: {a} vs {b}");
        }
    }

    #[test]
    fn misalignment_demo_kills_mean_jz() {
        let n = 100;
        let mut phis: Vec<f64> = (0..=20).map(|k| -PI / 2.0 + k as f64 * PI / 20.0).collect();
        phis.push(PI / 100.0);
        let demo = phase_misalignment_demo(n, &phis).unwrap();
        for (i, report) in demo.misaligned.iter().enumerate() {
            assert!(
                report.mean_jz.abs() <= 1e-10,
                "phi = {}: mean_jz = {}",
                demo.phis[i],
                report.mean_jz
            );
        }
        let last = demo.aligned.last().unwrap();
        assert!(last.mean_jz.abs() > 1e-3, "aligned signal too small");
        // phi = 0 row: both zero
        let zero_idx = demo.phis.iter().position(|&p| p.abs() < 1e-12);
        if let Some(idx) = zero_idx {
            assert!(demo.aligned[idx].mean_jz.abs() < 1e-10);
        }
    }

    #[test]
    fn error_propagation_sweep_gaussian() {
        let family = StateFamily::Gaussian { sigma_prime: 1.7 };
        let (points, fit) = sweep_error_propagation(&family, &[50, 100]).unwrap();
        for &(n, dphi) in &points {
            let c = dphi * n as f64;
            assert!((c - 2.0).abs() / 2.0 < 0.1, "N={n}: C = {c}");
        }
        assert!(fit.beta > 0.9 && fit.beta < 1.1);
    }

    #[test]
    fn sweep_csv_format() {
        let mut buf = Vec::new();
        write_sweep_csv(&[(50, 0.02), (100, 0.01)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "N,sigma\n50,0.02\n100,0.01\n");
    }
}
