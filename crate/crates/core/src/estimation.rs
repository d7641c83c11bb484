//! Bayesian phase inference: likelihood profiles, Fisher information,
//! sampled measurement sequences, error-propagation uncertainty, and the
//! Cramer-Rao inequality check.

use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec;
use crate::interferometer::{self, jz_moments, propagate};
use crate::states::PureStateVector;
use crate::tolerances::{
    CRAMER_RAO_REL_SLACK, DEGENERATE_PROB_FLOOR, FLAT_SIGNAL_FLOOR, QUADRATURE_NORM_TOL,
};

/// Fisher information of the exit-port distribution at the true phase theta.
#[derive(Debug, Clone, Copy)]
pub struct FisherReport {
    pub theta: f64,
    /// F in rad^-2.
    pub fisher: f64,
    /// 1/sqrt(F) in radians.
    pub sigma: f64,
    /// Outcomes whose probability fell below the degenerate-term floor.
    pub degenerate_terms: usize,
}

impl FisherReport {
    /// Flat key/value summary, one JSON object on one line.
    pub fn to_json_text(&self) -> String {
        let sigma = if self.sigma.is_finite() {
            format!("{}", self.sigma)
        } else {
            "null".to_string()
        };
        format!(
            "{{\"theta\": {}, \"F\": {}, \"sigma\": {}, \"degenerate_terms\": {}}}",
            self.theta, self.fisher, sigma, self.degenerate_terms
        )
    }
}

/// F = Σ_m (dP(m|φ)/dφ|_θ)² / P(m|θ).
///
/// Terms with P(m|θ) below the floor use the analytic zero-amplitude limit
/// 4|(Ĵ_y ψ_out)_m|²: with α_m(θ) = 0 the probability is quadratic in
/// φ - θ and the ratio stays finite. Skipping such terms instead would
/// systematically underestimate F for sparse states.
pub fn fisher_information(state: &PureStateVector, theta: f64) -> FisherReport {
    let out = propagate(state, theta);
    let probs = out.probabilities();
    let jy_out = interferometer::jy_components(&out);
    let mut fisher = 0.0;
    let mut degenerate = 0usize;
    for i in 0..probs.len() {
        if probs[i] < DEGENERATE_PROB_FLOOR {
            degenerate += 1;
            fisher += 4.0 * jy_out[i].norm_sqr();
        } else {
            let d = 2.0 * (out.amplitudes()[i].conj() * jy_out[i]).im;
            fisher += d * d / probs[i];
        }
    }
    let sigma = if fisher > 0.0 { 1.0 / fisher.sqrt() } else { f64::INFINITY };
    FisherReport { theta, fisher, sigma, degenerate_terms: degenerate }
}

/// Normalized phase density on a grid over [-π/2, π/2].
#[derive(Debug, Clone)]
pub struct LikelihoodProfile {
    pub theta: f64,
    /// Measurement count; the idealized likelihood admits fractional M.
    pub m_count: f64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
}

/// Grid resolution that resolves the internal-N00N oscillation period 2π/N.
pub fn default_grid_size(n: usize) -> usize {
    4096usize.max(64 * n)
}

fn phase_grid(grid_size: usize) -> Vec<f64> {
    let half = std::f64::consts::FRAC_PI_2;
    let step = std::f64::consts::PI / (grid_size - 1) as f64;
    (0..grid_size).map(|g| -half + g as f64 * step).collect()
}

fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let g = grid.len();
    let step = grid[1] - grid[0];
    (0..g)
        .map(|i| if i == 0 || i == g - 1 { step / 2.0 } else { step })
        .collect()
}

impl LikelihoodProfile {
    /// Normalize a sampled non-negative density by trapezoid quadrature.
    pub fn from_density(theta: f64, m_count: f64, grid: Vec<f64>, raw: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::GridTooSmall(grid.len()));
        }
        if grid.len() != raw.len() {
            return Err(Error::DimensionMismatch { operator: grid.len(), state: raw.len() });
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("grid must be strictly increasing".into()));
        }
        if raw.iter().any(|&d| d < 0.0 || !d.is_finite()) {
            return Err(Error::InvalidConfig("density must be finite and non-negative".into()));
        }
        let weights = trapezoid_weights(&grid);
        let integral: f64 = weights.iter().zip(raw.iter()).map(|(w, d)| w * d).sum();
        if integral <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let density = raw.iter().map(|d| d / integral).collect();
        Ok(LikelihoodProfile { theta, m_count, grid, density })
    }

    pub fn quadrature_norm(&self) -> f64 {
        trapezoid_weights(&self.grid)
            .iter()
            .zip(self.density.iter())
            .map(|(w, d)| w * d)
            .sum()
    }

    /// Quadrature mean of the density.
    pub fn mean(&self) -> f64 {
        trapezoid_weights(&self.grid)
            .iter()
            .zip(self.grid.iter())
            .zip(self.density.iter())
            .map(|((w, phi), d)| w * phi * d)
            .sum()
    }

    /// Quadrature variance about the quadrature mean.
    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        trapezoid_weights(&self.grid)
            .iter()
            .zip(self.grid.iter())
            .zip(self.density.iter())
            .map(|((w, phi), d)| w * (phi - mu) * (phi - mu) * d)
            .sum()
    }

    /// Location of the global maximum, refined by a parabola through the
    /// peak grid point and its neighbors.
    pub fn argmax(&self) -> f64 {
        let mut imax = 0;
        for (i, &d) in self.density.iter().enumerate() {
            if d > self.density[imax] {
                imax = i;
            }
        }
        if imax == 0 || imax == self.density.len() - 1 {
            return self.grid[imax];
        }
        let (dm, d0, dp) = (self.density[imax - 1], self.density[imax], self.density[imax + 1]);
        let denom = dm - 2.0 * d0 + dp;
        if denom.abs() < 1e-300 {
            return self.grid[imax];
        }
        let offset = 0.5 * (dm - dp) / denom;
        let step = self.grid[1] - self.grid[0];
        self.grid[imax] + offset.clamp(-0.5, 0.5) * step
    }

    pub fn grid_step(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    /// All interior local maxima above a relative height threshold,
    /// parabola-refined. Used to measure oscillation periods.
    pub fn local_maxima(&self, relative_floor: f64) -> Vec<f64> {
        let peak = self.density.iter().cloned().fold(0.0, f64::max);
        let step = self.grid_step();
        let mut found = Vec::new();
        for i in 1..self.density.len() - 1 {
            let (dm, d0, dp) = (self.density[i - 1], self.density[i], self.density[i + 1]);
            if d0 >= dm && d0 > dp && d0 >= relative_floor * peak {
                let denom = dm - 2.0 * d0 + dp;
                let offset = if denom.abs() < 1e-300 { 0.0 } else { 0.5 * (dm - dp) / denom };
                found.push(self.grid[i] + offset.clamp(-0.5, 0.5) * step);
            }
        }
        found
    }

    /// CSV with columns phi, density.
    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "phi,density")?;
        for (phi, d) in self.grid.iter().zip(self.density.iter()) {
            writeln!(w, "{},{}", phi, d)?;
        }
        Ok(())
    }
}

/// Quadrature variance of a profile (free-function form of
/// [`LikelihoodProfile::variance`]).
pub fn profile_variance(profile: &LikelihoodProfile) -> f64 {
    profile.variance()
}

/// Peak location of a profile (free-function form of
/// [`LikelihoodProfile::argmax`]).
pub fn profile_argmax(profile: &LikelihoodProfile) -> f64 {
    profile.argmax()
}

/// The idealized likelihood P_M(φ|θ) ∝ Π_m P(m|φ)^{P(m|θ)·M}, computed in
/// log space with max-subtraction before exponentiation; the product
/// underflows f64 catastrophically already at N = 100, M = 10.
pub fn likelihood_profile(
    state: &PureStateVector,
    theta: f64,
    m_count: f64,
    grid_size: usize,
) -> Result<LikelihoodProfile> {
    if !(m_count >= 0.0) {
        return Err(Error::InvalidConfig(format!("measurement count must be >= 0, got {m_count}")));
    }
    if grid_size < 2 {
        return Err(Error::GridTooSmall(grid_size));
    }
    let reference = propagate(state, theta).probabilities();
    let grid = phase_grid(grid_size);
    let log_density: Vec<f64> = exec::map_slice(&grid, |&phi| {
        let probs = propagate(state, phi).probabilities();
        let mut acc = 0.0f64;
        for (p_ref, p) in reference.iter().zip(probs.iter()) {
            if *p_ref < DEGENERATE_PROB_FLOOR {
                continue;
            }
            acc += p_ref * p.ln(); // ln(0) = -inf zeroes the density there
        }
        m_count * acc
    });
    exponentiate_normalized(theta, m_count, grid, log_density)
}

fn exponentiate_normalized(
    theta: f64,
    m_count: f64,
    grid: Vec<f64>,
    log_density: Vec<f64>,
) -> Result<LikelihoodProfile> {
    let peak = log_density.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return Err(Error::ZeroNorm);
    }
    let raw: Vec<f64> = log_density.iter().map(|l| (l - peak).exp()).collect();
    let profile = LikelihoodProfile::from_density(theta, m_count, grid, raw)?;
    debug_assert!((profile.quadrature_norm() - 1.0).abs() <= QUADRATURE_NORM_TOL);
    Ok(profile)
}

/// A sequence of exit-port measurement outcomes.
#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    n: usize,
    pub theta: f64,
    pub seed: u64,
    /// Outcome indices i = m + N/2.
    indices: Vec<usize>,
}

impl MeasurementRecord {
    /// Build a record from m values, validating the range.
    pub fn from_m_values(n: usize, theta: f64, seed: u64, ms: &[f64]) -> Result<Self> {
        let j = n as f64 / 2.0;
        let mut indices = Vec::with_capacity(ms.len());
        for &m in ms {
            let idx = m + j;
            if idx < -1e-9 || idx > n as f64 + 1e-9 || (idx - idx.round()).abs() > 1e-9 {
                return Err(Error::OutcomeOutOfRange(m));
            }
            indices.push(idx.round() as usize);
        }
        Ok(MeasurementRecord { n, theta, seed, indices })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Outcomes as m quantum numbers.
    pub fn m_outcomes(&self) -> Vec<f64> {
        let j = self.n as f64 / 2.0;
        self.indices.iter().map(|&i| i as f64 - j).collect()
    }

    /// Per-outcome counts in index order.
    pub fn histogram(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n + 1];
        for &i in &self.indices {
            counts[i] += 1;
        }
        counts
    }

    /// CSV with columns m, count.
    pub fn write_histogram_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "m,count")?;
        let j = self.n as f64 / 2.0;
        for (i, c) in self.histogram().iter().enumerate() {
            writeln!(w, "{},{}", i as f64 - j, c)?;
        }
        Ok(())
    }
}

/// Draw i.i.d. outcomes from P(m|θ), reproducible from the seed.
pub fn sample_outcomes(
    state: &PureStateVector,
    theta: f64,
    count: usize,
    seed: u64,
) -> MeasurementRecord {
    let probs = propagate(state, theta).probabilities();
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in &probs {
        acc += p.max(0.0);
        cumulative.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = (0..count)
        .map(|_| {
            let u: f64 = rng.gen::<f64>() * total;
            cumulative.partition_point(|&c| c < u).min(probs.len() - 1)
        })
        .collect();
    MeasurementRecord { n: state.n(), theta, seed, indices }
}

/// Posterior density ∝ prior(φ) · Π_k P(m_k|φ), quadrature-normalized.
/// With no prior the uniform density on [-π/2, π/2] is used. Sequential
/// single-outcome updates compose to the all-at-once result.
pub fn posterior_from_outcomes(
    state: &PureStateVector,
    record: &MeasurementRecord,
    prior: Option<&LikelihoodProfile>,
    grid_size: usize,
) -> Result<LikelihoodProfile> {
    if record.n() != state.n() {
        return Err(Error::DimensionMismatch { operator: state.dim(), state: record.n() + 1 });
    }
    let grid = match prior {
        Some(p) => p.grid.clone(),
        None => {
            if grid_size < 2 {
                return Err(Error::GridTooSmall(grid_size));
            }
            phase_grid(grid_size)
        }
    };
    let counts = record.histogram();
    let log_prior: Vec<f64> = match prior {
        Some(p) => p.density.iter().map(|d| d.ln()).collect(),
        None => vec![0.0; grid.len()],
    };
    let log_density: Vec<f64> = exec::map_indices(grid.len(), |g| {
        let probs = propagate(state, grid[g]).probabilities();
        let mut acc = log_prior[g];
        for (i, &c) in counts.iter().enumerate() {
            if c > 0 {
                acc += c as f64 * probs[i].ln();
            }
        }
        acc
    });
    exponentiate_normalized(record.theta, record.len() as f64, grid, log_density)
}

/// Δφ = sqrt(var Ĵ_z) / |d⟨Ĵ_z⟩/dφ| at theta. The slope is the analytic
/// -⟨Ĵ_x⟩ of the output state; a vanishing slope (twin-Fock at any θ) is
/// reported as a flat-signal error.
pub fn error_propagation_uncertainty(state: &PureStateVector, theta: f64) -> Result<f64> {
    let out = propagate(state, theta);
    let slope = -interferometer::mean_jx(&out);
    if slope.abs() < FLAT_SIGNAL_FLOOR {
        return Err(Error::FlatSignal(theta));
    }
    let moments = jz_moments(&out);
    Ok(moments.var_jz.sqrt() / slope.abs())
}

/// Evaluation points for the error-propagation scan: the arithmetic grid
/// (0, π/200, ..., π/20] plus a geometric refinement of π/200 toward zero.
/// The refinement matters at large N: the variance of Ĵ_z grows like
/// (θ N)² off the operating point, so a fixed smallest θ inflates Δφ once
/// N ≳ 200 for states that are not x-polarized.
pub fn error_propagation_scan_grid() -> Vec<f64> {
    let base = std::f64::consts::PI / 200.0;
    let mut grid: Vec<f64> = (1..=7).rev().map(|k| base / (1u32 << k) as f64).collect();
    grid.extend((1..=10).map(|k| k as f64 * base));
    grid
}

/// Scan θ over the small grid above and return (θ*, min Δφ).
pub fn optimal_error_propagation(state: &PureStateVector) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for theta in error_propagation_scan_grid() {
        if let Ok(dphi) = error_propagation_uncertainty(state, theta) {
            if best.map_or(true, |(_, b)| dphi < b) {
                best = Some((theta, dphi));
            }
        }
    }
    best.ok_or(Error::FlatSignal(0.0))
}

/// ⟨Ĵ_z²⟩ / sqrt(⟨Ĵ_z⁴⟩ - ⟨Ĵ_z²⟩²) of the output state.
pub fn snr_jz_squared(state: &PureStateVector, theta: f64) -> Result<f64> {
    let moments = jz_moments(&propagate(state, theta));
    let variance = moments.jz4 - moments.jz2 * moments.jz2;
    if variance <= 1e-18 * moments.jz4.max(1.0) {
        return Err(Error::DegenerateMoments);
    }
    Ok(moments.jz2 / variance.sqrt())
}

/// One evaluation of the Cramer-Rao inequality Δφ² ≥ 1/F.
#[derive(Debug, Clone, Copy)]
pub struct CramerRaoReport {
    /// Error-propagation Δφ².
    pub lhs: f64,
    /// 1/F.
    pub rhs: f64,
    pub holds: bool,
}

/// Check Δφ² ≥ 1/F at theta, with a small relative slack; errors when the
/// left-hand side is undefined (flat signal).
pub fn cramer_rao_check(state: &PureStateVector, theta: f64) -> Result<CramerRaoReport> {
    let dphi = error_propagation_uncertainty(state, theta)?;
    let report = fisher_information(state, theta);
    let lhs = dphi * dphi;
    let rhs = 1.0 / report.fisher;
    Ok(CramerRaoReport { lhs, rhs, holds: lhs >= rhs * (1.0 - CRAMER_RAO_REL_SLACK) })
}
