//! SINR, SIR, maximum SINR, capacity and eigenvalue bounds.
//!
//! All quantities depend on power, symbol time and noise only through
//! `N₀/(2PT)`. Zero denominators (no interferers and no noise) yield
//! `f64::INFINITY` instead of an error.

use crate::spectral::{InterferenceMatrix, SpectralWeights};
use crate::{Error, Result, SequenceSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Sequence length `N`.
    pub n: usize,
    /// Number of users `K`.
    pub k: usize,
    /// Common signal power `P`.
    pub p: f64,
    /// Chip duration `T_c`.
    pub tc: f64,
    /// Noise parameter; the two-sided spectral density is `N₀/2`.
    pub n0: f64,
}

impl SystemParams {
    pub fn new(n: usize, k: usize, p: f64, tc: f64, n0: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooShort(n));
        }
        if k < 1 {
            return Err(Error::InvalidParameter("K must be at least 1".into()));
        }
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("P must be positive, got {p}")));
        }
        if !(tc > 0.0 && tc.is_finite()) {
            return Err(Error::InvalidParameter(format!("Tc must be positive, got {tc}")));
        }
        if !(n0 >= 0.0 && n0.is_finite()) {
            return Err(Error::InvalidParameter(format!("N0 must be nonnegative, got {n0}")));
        }
        Ok(Self { n, k, p, tc, n0 })
    }

    /// Parameters for a given `E_b/N₀` in dB, with `E_b = P·T`.
    pub fn from_ebn0_db(n: usize, k: usize, p: f64, tc: f64, ebn0_db: f64) -> Result<Self> {
        let eb = p * n as f64 * tc;
        Self::new(n, k, p, tc, eb / 10f64.powf(ebn0_db / 10.0))
    }

    /// Defaults `P = 1`, `T_c = 1`.
    pub fn unit(n: usize, k: usize, n0: f64) -> Result<Self> {
        Self::new(n, k, 1.0, 1.0, n0)
    }

    pub fn for_set(set: &SequenceSet, p: f64, tc: f64, n0: f64) -> Result<Self> {
        Self::new(set.chip_len(), set.users(), p, tc, n0)
    }

    pub fn with_n0(self, n0: f64) -> Result<Self> {
        Self::new(self.n, self.k, self.p, self.tc, n0)
    }

    /// Symbol duration `T = N·T_c`.
    pub fn symbol_time(&self) -> f64 {
        self.n as f64 * self.tc
    }

    /// `E_b = P·T`.
    pub fn bit_energy(&self) -> f64 {
        self.p * self.symbol_time()
    }

    /// `N₀/(2PT)`.
    pub fn noise_term(&self) -> f64 {
        self.n0 / (2.0 * self.bit_energy())
    }

    /// Standard deviation of the correlator noise, `√(N₀T/4)`.
    pub fn noise_std(&self) -> f64 {
        (self.n0 * self.symbol_time() / 4.0).sqrt()
    }

    fn check(&self, set: &SequenceSet) -> Result<()> {
        if set.chip_len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: set.chip_len() });
        }
        if set.users() != self.k {
            return Err(Error::DimensionMismatch { expected: self.k, got: set.users() });
        }
        Ok(())
    }
}

/// Logarithm used for capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    /// Bits per channel use.
    #[default]
    Two,
    /// Nats per channel use.
    E,
}

/// `x^{-1/2}`, or infinity at zero.
fn inv_sqrt(x: f64) -> f64 {
    if x <= 0.0 {
        f64::INFINITY
    } else {
        x.powf(-0.5)
    }
}

/// `Σ_{k≠i} Σ_m S_m^{i,k}` for every user `i`.
pub fn interference_sums(set: &SequenceSet, weights: &SpectralWeights) -> Result<Vec<f64>> {
    let profiles = weights.profiles(set)?;
    let k = profiles.len();
    let mut pair = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in (a + 1)..k {
            let v = profiles[a].pair_interference(&profiles[b])?;
            pair[a][b] = v;
            pair[b][a] = v;
        }
    }
    Ok(pair.iter().map(|row| row.iter().sum()).collect())
}

/// `(1/(6N²))·interference + N₀/(2PT)`, i.e. `SINR⁻²`.
pub fn inverse_sq_sinr(interference: f64, params: &SystemParams) -> f64 {
    let n = params.n as f64;
    interference / (6.0 * n * n) + params.noise_term()
}

/// SINR of user `i` (0-based).
pub fn sinr(set: &SequenceSet, i: usize, params: &SystemParams) -> Result<f64> {
    params.check(set)?;
    set.check_user(i)?;
    let weights = SpectralWeights::new(params.n)?;
    let sums = interference_sums(set, &weights)?;
    Ok(inv_sqrt(inverse_sq_sinr(sums[i], params)))
}

/// SINR of every user.
pub fn sinr_all(set: &SequenceSet, params: &SystemParams) -> Result<Vec<f64>> {
    params.check(set)?;
    let weights = SpectralWeights::new(params.n)?;
    Ok(interference_sums(set, &weights)?
        .into_iter()
        .map(|x| inv_sqrt(inverse_sq_sinr(x, params)))
        .collect())
}

/// SIR of user `i`: the SINR with `N₀ = 0`.
pub fn sir(set: &SequenceSet, i: usize) -> Result<f64> {
    set.check_user(i)?;
    let weights = SpectralWeights::new(set.chip_len())?;
    let n = set.chip_len() as f64;
    Ok(inv_sqrt(interference_sums(set, &weights)?[i] / (6.0 * n * n)))
}

/// `SIRᵢ⁻²` for every user.
pub fn inverse_sq_sir_all(set: &SequenceSet) -> Result<Vec<f64>> {
    let weights = SpectralWeights::new(set.chip_len())?;
    let n = set.chip_len() as f64;
    Ok(interference_sums(set, &weights)?
        .into_iter()
        .map(|x| x / (6.0 * n * n))
        .collect())
}

/// `{λ_min/(6N) + N₀/(2PT)}^{-1/2}`.
///
/// Round-off negatives of `λ_min` are clamped to zero.
pub fn max_sinr(lambda_min: f64, params: &SystemParams) -> f64 {
    let lam = lambda_min.max(0.0);
    inv_sqrt(lam / (6.0 * params.n as f64) + params.noise_term())
}

/// `½·log(1 + SINR*²)` for the continuous-input Gaussian channel.
pub fn capacity(lambda_min: f64, params: &SystemParams, base: LogBase) -> f64 {
    let s = max_sinr(lambda_min, params);
    let nats = 0.5 * (s * s).ln_1p();
    match base {
        LogBase::Two => nats / std::f64::consts::LN_2,
        LogBase::E => nats,
    }
}

/// Eigenvalue bounds on `λ_min(Σᵢ)` and the induced maximum-SINR bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    /// `min λ_m + min λ̂_m`.
    pub lam_lower: f64,
    /// `γ = min{min λ_m + max λ̂_m, max λ_m + min λ̂_m}`.
    pub lam_upper: f64,
    pub sinr_upper: f64,
    pub sinr_lower: f64,
}

pub fn sinr_bounds(sigma: &InterferenceMatrix, params: &SystemParams) -> Result<BoundsReport> {
    if sigma.dim() != params.n {
        return Err(Error::DimensionMismatch { expected: params.n, got: sigma.dim() });
    }
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = (min(&sigma.lam), max(&sigma.lam));
    let (lo_hat, hi_hat) = (min(&sigma.lam_hat), max(&sigma.lam_hat));
    let lam_lower = lo + lo_hat;
    // Weyl with (k, l) = (n, 1) and (1, n)
    let lam_upper = (lo + hi_hat).min(hi + lo_hat);
    Ok(BoundsReport {
        lam_lower,
        lam_upper,
        sinr_upper: max_sinr(lam_lower, params),
        sinr_lower: max_sinr(lam_upper, params),
    })
}

/// Arithmetic and harmonic means of the squared SINRs over users.
pub fn mean_squared_sinr(set: &SequenceSet, params: &SystemParams) -> Result<(f64, f64)> {
    let sinrs = sinr_all(set, params)?;
    let arithmetic = sinrs.iter().map(|s| s * s).sum::<f64>() / sinrs.len() as f64;
    let harmonic = crate::optimizer::harmonic_mean_sq_sinr(set, params)?;
    Ok((arithmetic, harmonic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::min_eigenpair;
    use crate::optimizer::solve_single;
    use crate::sequences::{gold_codes, normalize, random_sequences};
    use crate::spectral::build_sigma;
    use crate::SpreadingSequence;
    use num_complex::Complex64;

    fn ones(n: usize) -> SpreadingSequence {
        normalize(&vec![Complex64::new(1.0, 0.0); n]).unwrap()
    }

    fn pair_of_ones() -> SequenceSet {
        SequenceSet::new(vec![ones(2), ones(2)]).unwrap()
    }

    #[test]
    fn ebn0_conversion() {
        let p = SystemParams::from_ebn0_db(31, 1, 1.0, 1.0, 0.0).unwrap();
        assert!((p.n0 - 31.0).abs() < 1e-12);
        assert!((p.noise_term() - 0.5).abs() < 1e-15);
        assert!((p.noise_std() - (31.0f64 * 31.0 / 4.0).sqrt()).abs() < 1e-12);
        assert!(SystemParams::new(31, 1, 0.0, 1.0, 1.0).is_err());
        assert!(SystemParams::new(31, 1, 1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn single_user_sinr_is_awgn_snr() {
        let set = gold_codes(1).unwrap();
        let params = SystemParams::new(31, 1, 2.0, 0.5, 3.0).unwrap();
        let want = (2.0 * 2.0 * 15.5 / 3.0f64).sqrt();
        assert!((sinr(&set, 0, &params).unwrap() - want).abs() < 1e-12);
        assert_eq!(sir(&set, 0).unwrap(), f64::INFINITY);
        let noiseless = params.with_n0(0.0).unwrap();
        assert_eq!(sinr(&set, 0, &noiseless).unwrap(), f64::INFINITY);
    }

    #[test]
    fn two_user_n2_values() {
        let set = pair_of_ones();
        let params = SystemParams::unit(2, 2, 0.0).unwrap();
        assert!((sinr(&set, 0, &params).unwrap() - 3f64.sqrt()).abs() < 1e-12);
        assert!((sir(&set, 0).unwrap() - 3f64.sqrt()).abs() < 1e-12);
        assert!((max_sinr(1.0, &params) - 2.0 * 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sir_equals_noiseless_sinr() {
        let set = random_sequences(5, 13, 1).unwrap();
        let params = SystemParams::unit(13, 5, 0.0).unwrap();
        for i in 0..5 {
            let a = sinr(&set, i, &params).unwrap();
            let b = sir(&set, i).unwrap();
            assert!((a - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn capacity_values() {
        // N0/(2PT) = 0.1 with N = 2, P = T_c = 1: N0 = 0.4
        let params = SystemParams::unit(2, 1, 0.4).unwrap();
        assert!((capacity(0.0, &params, LogBase::Two) - 0.5 * 11f64.log2()).abs() < 1e-12);
        assert!((capacity(0.0, &params, LogBase::Two) - 1.7297).abs() < 1e-4);
        assert!((capacity(0.0, &params, LogBase::E) - 0.5 * 11f64.ln()).abs() < 1e-12);
        let params = SystemParams::unit(2, 1, 4.0).unwrap();
        assert!((capacity(0.0, &params, LogBase::Two) - 0.5).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for lam in [0.0, 0.1, 1.0, 10.0, 100.0] {
            let c = capacity(lam, &params, LogBase::Two);
            assert!(c < prev);
            prev = c;
        }
        assert_eq!(capacity(0.0, &params.with_n0(0.0).unwrap(), LogBase::Two), f64::INFINITY);
    }

    #[test]
    fn bounds_two_user_case_are_tight() {
        let set = pair_of_ones();
        let w = SpectralWeights::new(2).unwrap();
        let sigma = build_sigma(&set, 0, &w).unwrap();
        let params = SystemParams::unit(2, 2, 0.1).unwrap();
        let b = sinr_bounds(&sigma, &params).unwrap();
        assert!((b.lam_lower - 1.0).abs() < 1e-12);
        assert!((b.lam_upper - 1.0).abs() < 1e-12);
        let lam = min_eigenpair(&sigma.sigma).unwrap().value;
        assert!((lam - 1.0).abs() < 1e-12);
        assert!((b.sinr_lower - b.sinr_upper).abs() < 1e-12);
    }

    #[test]
    fn bounds_single_user() {
        let set = gold_codes(1).unwrap();
        let w = SpectralWeights::new(31).unwrap();
        let sigma = build_sigma(&set, 0, &w).unwrap();
        let params = SystemParams::unit(31, 1, 2.0).unwrap();
        let b = sinr_bounds(&sigma, &params).unwrap();
        assert_eq!((b.lam_lower, b.lam_upper), (0.0, 0.0));
        let want = (2.0 * 31.0 / 2.0f64).sqrt();
        assert!((b.sinr_lower - want).abs() < 1e-12 && (b.sinr_upper - want).abs() < 1e-12);
    }

    #[test]
    fn bounds_sandwich_gold() {
        let set = gold_codes(7).unwrap();
        let w = SpectralWeights::new(31).unwrap();
        let params = SystemParams::unit(31, 7, 1.0).unwrap();
        for i in 0..7 {
            let sigma = build_sigma(&set, i, &w).unwrap();
            let b = sinr_bounds(&sigma, &params).unwrap();
            let lam = min_eigenpair(&sigma.sigma).unwrap().value;
            assert!(b.lam_lower <= lam + 1e-12 && lam <= b.lam_upper + 1e-12);
            let s = max_sinr(lam, &params);
            assert!(b.sinr_lower <= s && s <= b.sinr_upper);
        }
    }

    #[test]
    fn max_sinr_matches_sinr_at_optimum() {
        let set = gold_codes(7).unwrap();
        let params = SystemParams::unit(31, 7, 0.7).unwrap();
        for i in 0..7 {
            let sol = solve_single(&set, i).unwrap();
            let updated = set.with_replaced(i, sol.sequence.clone()).unwrap();
            let direct = sinr(&updated, i, &params).unwrap();
            let via_lambda = max_sinr(sol.lambda_min, &params);
            assert!((direct - via_lambda).abs() <= 1e-9 * direct);
        }
    }

    #[test]
    fn sinr_decreases_with_interference() {
        let params = SystemParams::unit(31, 2, 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for x in [0.0, 1.0, 10.0, 100.0] {
            let s = inv_sqrt(inverse_sq_sinr(x, &params));
            assert!(s < prev);
            prev = s;
        }
    }

    #[test]
    fn means_equal_for_symmetric_pair() {
        let set = pair_of_ones();
        let params = SystemParams::unit(2, 2, 0.3).unwrap();
        let (a, h) = mean_squared_sinr(&set, &params).unwrap();
        assert!((a - h).abs() <= 1e-12 * a);
    }

    #[test]
    fn means_ordered_for_gold() {
        let set = gold_codes(7).unwrap();
        let params = SystemParams::unit(31, 7, 1.0).unwrap();
        let (a, h) = mean_squared_sinr(&set, &params).unwrap();
        assert!(h <= a);
    }

    #[test]
    fn params_must_match_set() {
        let set = gold_codes(3).unwrap();
        let params = SystemParams::unit(31, 4, 1.0).unwrap();
        assert!(matches!(sinr(&set, 0, &params), Err(Error::DimensionMismatch { .. })));
    }
}
