//! Frequency-domain description of the interference.
//!
//! Two unitary transforms are used: the ordinary DFT `V` sampled at `m/N`
//! and a half-bin shifted one `V̂` sampled at `m/N + 1/(2N)`, with
//! `m, n = 1..N`. Each bin carries a chip-shape weight `√(1 + ½cos 2πf)`.
//! Quadratic forms `s*Q_m s` collapse to `w_m |(Vs)_m|²`, so everything here
//! runs on transform powers instead of dense `Q_m` products.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result, SequenceSet, SpreadingSequence};

/// Bin weights for both transforms plus a cached FFT plan of length `N`.
#[derive(Clone)]
pub struct SpectralWeights {
    w: Vec<f64>,
    w_hat: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralWeights")
            .field("w", &self.w)
            .field("w_hat", &self.w_hat)
            .finish()
    }
}

impl SpectralWeights {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooShort(n));
        }
        let nf = n as f64;
        let weight = |f: f64| (1.0 + 0.5 * (2.0 * PI * f).cos()).sqrt();
        let w = (1..=n).map(|m| weight(m as f64 / nf)).collect();
        let w_hat = (1..=n).map(|m| weight(m as f64 / nf + 0.5 / nf)).collect();
        let fft = FftPlanner::new().plan_fft_forward(n);
        Ok(Self { w, w_hat, fft })
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// `w[m-1] = √(1 + ½cos(2πm/N))`.
    pub fn w(&self) -> &[f64] {
        &self.w
    }

    /// `ŵ[m-1] = √(1 + ½cos(2π(m/N + 1/(2N))))`.
    pub fn w_hat(&self) -> &[f64] {
        &self.w_hat
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: n });
        }
        Ok(())
    }

    /// `(|(Vs)_m|², |(V̂s)_m|²)` for `m = 1..N`.
    pub fn transform_powers(&self, s: &SpreadingSequence) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = s.len();
        self.check(n)?;
        let nf = n as f64;
        let mut plain = s.chips().to_vec();
        // shifting n by one only rotates every bin's phase
        let mut shifted: Vec<Complex64> = s
            .chips()
            .iter()
            .enumerate()
            .map(|(j, c)| c * Complex64::from_polar(1.0, -PI * j as f64 / nf))
            .collect();
        self.fft.process(&mut plain);
        self.fft.process(&mut shifted);
        // row m of V is FFT bin m mod N
        let power = |x: &[Complex64]| (1..=n).map(|m| x[m % n].norm_sqr() / nf).collect();
        Ok((power(&plain), power(&shifted)))
    }

    /// Weighted quadratic forms `q[m] = s*Q_m s`, `q̂[m] = s*Q̂_m s`.
    pub fn quad_forms(&self, s: &SpreadingSequence) -> Result<SpectrumProfile> {
        let (p, p_hat) = self.transform_powers(s)?;
        Ok(SpectrumProfile {
            q: p.iter().zip(&self.w).map(|(p, w)| p * w).collect(),
            q_hat: p_hat.iter().zip(&self.w_hat).map(|(p, w)| p * w).collect(),
        })
    }

    /// Profiles of every user in the set.
    pub fn profiles(&self, set: &SequenceSet) -> Result<Vec<SpectrumProfile>> {
        set.sequences().iter().map(|s| self.quad_forms(s)).collect()
    }
}

/// Transform powers with a freshly planned FFT.
pub fn transform_powers(s: &SpreadingSequence) -> Result<(Vec<f64>, Vec<f64>)> {
    SpectralWeights::new(s.len())?.transform_powers(s)
}

/// Per-bin quadratic forms of one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumProfile {
    pub q: Vec<f64>,
    pub q_hat: Vec<f64>,
}

impl SpectrumProfile {
    /// `Σ_m S_m^{i,k} = Σ_m q_i[m] q_k[m] + q̂_i[m] q̂_k[m]`.
    pub fn pair_interference(&self, other: &Self) -> Result<f64> {
        if self.q.len() != other.q.len() {
            return Err(Error::DimensionMismatch { expected: self.q.len(), got: other.q.len() });
        }
        let plain: f64 = self.q.iter().zip(&other.q).map(|(a, b)| a * b).sum();
        let shifted: f64 = self.q_hat.iter().zip(&other.q_hat).map(|(a, b)| a * b).sum();
        Ok(plain + shifted)
    }
}

/// `Σ_m S_m^{i,k}` between two sequences.
pub fn pair_interference(si: &SpreadingSequence, sk: &SpreadingSequence) -> Result<f64> {
    if si.len() != sk.len() {
        return Err(Error::DimensionMismatch { expected: si.len(), got: sk.len() });
    }
    let weights = SpectralWeights::new(si.len())?;
    weights.quad_forms(si)?.pair_interference(&weights.quad_forms(sk)?)
}

/// Interference matrix `Σᵢ = V*ΛᵢV + V̂*Λ̂ᵢV̂` seen by one user.
#[derive(Debug, Clone)]
pub struct InterferenceMatrix {
    pub sigma: DMatrix<Complex64>,
    /// `λ_m = w_m Σ_{k≠i} q_k[m]`.
    pub lam: Vec<f64>,
    /// `λ̂_m = ŵ_m Σ_{k≠i} q̂_k[m]`.
    pub lam_hat: Vec<f64>,
    pub excluded_user: usize,
}

impl InterferenceMatrix {
    /// Assembles `Σᵢ` from precomputed profiles (one per user).
    pub fn from_profiles(profiles: &[SpectrumProfile], i: usize, weights: &SpectralWeights) -> Result<Self> {
        if i >= profiles.len() {
            return Err(Error::IndexOutOfRange { index: i, users: profiles.len() });
        }
        let n = weights.len();
        let mut lam = vec![0.0; n];
        let mut lam_hat = vec![0.0; n];
        for (k, prof) in profiles.iter().enumerate() {
            if k == i {
                continue;
            }
            weights.check(prof.q.len())?;
            for m in 0..n {
                lam[m] += prof.q[m];
                lam_hat[m] += prof.q_hat[m];
            }
        }
        for m in 0..n {
            lam[m] *= weights.w[m];
            lam_hat[m] *= weights.w_hat[m];
        }
        let sigma = hermitian_toeplitz(&lam, &lam_hat);
        Ok(Self { sigma, lam, lam_hat, excluded_user: i })
    }

    pub fn dim(&self) -> usize {
        self.lam.len()
    }

    /// `u* Σ u`.
    pub fn quad_form(&self, u: &[Complex64]) -> f64 {
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..n {
            let row: Complex64 = (0..n).map(|c| self.sigma[(r, c)] * u[c]).sum();
            acc += u[r].conj() * row;
        }
        acc.re
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|r| self.sigma[(r, r)].re).sum()
    }
}

/// `Σ = V* diag(lam) V + V̂* diag(lam_hat) V̂`.
///
/// Both terms only depend on the index difference `a - b`, so the matrix is
/// filled from one column of lag values.
fn hermitian_toeplitz(lam: &[f64], lam_hat: &[f64]) -> DMatrix<Complex64> {
    let n = lam.len();
    let nf = n as f64;
    let lags: Vec<Complex64> = (0..n)
        .map(|d| {
            let d = d as f64;
            (1..=n)
                .map(|m| {
                    let f = m as f64 / nf;
                    Complex64::from_polar(lam[m - 1], 2.0 * PI * f * d)
                        + Complex64::from_polar(lam_hat[m - 1], 2.0 * PI * (f + 0.5 / nf) * d)
                })
                .sum::<Complex64>()
                / nf
        })
        .collect();
    DMatrix::from_fn(n, n, |a, b| {
        if a == b {
            Complex64::new(lags[0].re, 0.0)
        } else if a > b {
            lags[a - b]
        } else {
            lags[b - a].conj()
        }
    })
}

/// `Σᵢ` for user `i` (0-based) of `set`.
pub fn build_sigma(set: &SequenceSet, i: usize, weights: &SpectralWeights) -> Result<InterferenceMatrix> {
    set.check_user(i)?;
    InterferenceMatrix::from_profiles(&weights.profiles(set)?, i, weights)
}
