//! Chip-level Monte-Carlo model of the asynchronous BPSK link.
//!
//! The receiver correlates over one symbol of the desired user (delay and
//! phase zero). Each interferer contributes, through the baseband-equivalent
//! correlator, `√(P/2)·Re{e^{jψ}[b₋₁R(τ) + b₀R̂(τ)]}` where `R`, `R̂` are the
//! continuous-delay partial cross-correlations of rectangular chips. Both are
//! linear between chip boundaries, so they are evaluated exactly from the
//! aperiodic cross-correlation. The carrier is never synthesized.
//!
//! Random draws come from a ChaCha stream keyed by `(seed, grid point, user)`
//! and positioned by trial number, so any trial can be regenerated alone and
//! error totals do not depend on evaluation order.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::metrics::SystemParams;
use crate::spectral::SpectralWeights;
use crate::{Error, Result, SequenceSet, SpreadingSequence};

/// Word offset reserved per trial inside a keyed stream.
const WORDS_PER_TRIAL: u128 = 1 << 20;

/// `C(l) = Σ_n s_k[n+l]·conj(s_i[n])` over the overlapping range (0-based);
/// zero when `|l| ≥ N`.
pub fn aperiodic_xcorr(sk: &SpreadingSequence, si: &SpreadingSequence, l: i64) -> Result<Complex64> {
    if sk.len() != si.len() {
        return Err(Error::DimensionMismatch { expected: si.len(), got: sk.len() });
    }
    Ok(xcorr(sk.chips(), si.chips(), l))
}

fn xcorr(sk: &[Complex64], si: &[Complex64], l: i64) -> Complex64 {
    let n = si.len() as i64;
    if l.abs() >= n {
        return Complex64::new(0.0, 0.0);
    }
    let (lo, hi) = if l >= 0 { (0, n - l) } else { (-l, n) };
    (lo..hi).map(|j| sk[(j + l) as usize] * si[j as usize].conj()).sum()
}

/// Aperiodic cross-correlations of one (interferer, desired) pair for every
/// lag in `-N..=N`.
#[derive(Debug, Clone)]
struct CorrelationTable {
    n: i64,
    values: Vec<Complex64>,
}

impl CorrelationTable {
    fn new(sk: &[Complex64], si: &[Complex64]) -> Self {
        let n = si.len() as i64;
        Self { n, values: (-n..=n).map(|l| xcorr(sk, si, l)).collect() }
    }

    fn at(&self, l: i64) -> Complex64 {
        self.values[(l + self.n) as usize]
    }

    /// `(R(τ), R̂(τ))`: the correlator integral split at `τ` into the part
    /// multiplying the previous symbol and the part multiplying the current one.
    fn partial(&self, tau: f64, tc: f64) -> (Complex64, Complex64) {
        let n = self.n;
        let l = ((tau / tc).floor() as i64).clamp(0, n - 1);
        let delta = tau - l as f64 * tc;
        let r = self.at(n - l) * tc + (self.at(n - l - 1) - self.at(n - l)) * delta;
        let r_hat = self.at(-l) * tc + (self.at(-l - 1) - self.at(-l)) * delta;
        (r, r_hat)
    }

    fn term(&self, draw: &InterfererDraw, tc: f64) -> f64 {
        let (r, r_hat) = self.partial(draw.tau, tc);
        (Complex64::from_polar(1.0, draw.psi) * (r * draw.b_prev + r_hat * draw.b_cur)).re
    }
}

fn check_tau(tau: f64, period: f64) -> Result<()> {
    if !(0.0..period).contains(&tau) {
        return Err(Error::TauOutOfRange { tau, period });
    }
    Ok(())
}

/// `Re{e^{jψ}[b_prev·R(τ) + b_cur·R̂(τ)]}` for interferer `sk` seen by `si`;
/// multiply by `√(P/2)` to get the correlator contribution.
pub fn interference_term(
    sk: &SpreadingSequence,
    si: &SpreadingSequence,
    tau: f64,
    psi: f64,
    b_prev: f64,
    b_cur: f64,
    tc: f64,
) -> Result<f64> {
    if sk.len() != si.len() {
        return Err(Error::DimensionMismatch { expected: si.len(), got: sk.len() });
    }
    check_tau(tau, si.len() as f64 * tc)?;
    let table = CorrelationTable::new(sk.chips(), si.chips());
    Ok(table.term(&InterfererDraw { tau, psi, b_prev, b_cur }, tc))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfererDraw {
    /// Delay in `[0, T)`.
    pub tau: f64,
    /// Phase in `[0, 2π)`.
    pub psi: f64,
    pub b_prev: f64,
    pub b_cur: f64,
}

/// Random quantities of one correlation window.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDraw {
    /// One entry per interferer, in ascending user order skipping the desired user.
    pub interferers: Vec<InterfererDraw>,
    pub b_desired: f64,
    /// Standard-normal deviate scaled by `√(N₀T/4)` at use.
    pub noise: f64,
}

fn symbol<R: Rng>(rng: &mut R) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

impl TrialDraw {
    pub fn sample<R: Rng>(rng: &mut R, interferers: usize, period: f64) -> Self {
        let interferers = (0..interferers)
            .map(|_| InterfererDraw {
                tau: rng.random::<f64>() * period,
                psi: rng.random::<f64>() * 2.0 * PI,
                b_prev: symbol(rng),
                b_cur: symbol(rng),
            })
            .collect();
        let b_desired = symbol(rng);
        let noise = rng.sample(StandardNormal);
        Self { interferers, b_desired, noise }
    }
}

/// Stream for one `(grid point, desired user, trial)`.
pub fn keyed_rng(seed: u64, grid: u32, user: u32, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((u64::from(grid) << 32) | u64::from(user));
    rng.set_word_pos(u128::from(trial) * WORDS_PER_TRIAL);
    rng
}

/// Correlator output split into its three parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutput {
    pub desired: f64,
    pub interference: f64,
    pub noise: f64,
}

impl TrialOutput {
    pub fn z(&self) -> f64 {
        self.desired + self.interference + self.noise
    }
}

/// Receiver for one desired user with precomputed correlation tables.
#[derive(Debug, Clone)]
pub struct Link {
    user: usize,
    tables: Vec<CorrelationTable>,
    params: SystemParams,
}

impl Link {
    pub fn new(set: &SequenceSet, user: usize, params: &SystemParams) -> Result<Self> {
        set.check_user(user)?;
        if set.chip_len() != params.n {
            return Err(Error::DimensionMismatch { expected: params.n, got: set.chip_len() });
        }
        let si = set.sequences()[user].chips();
        let tables = set
            .sequences()
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != user)
            .map(|(_, sk)| CorrelationTable::new(sk.chips(), si))
            .collect();
        Ok(Self { user, tables, params: *params })
    }

    pub fn user(&self) -> usize {
        self.user
    }

    pub fn interferers(&self) -> usize {
        self.tables.len()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> TrialDraw {
        TrialDraw::sample(rng, self.interferers(), self.params.symbol_time())
    }

    pub fn output(&self, draw: &TrialDraw) -> Result<TrialOutput> {
        if draw.interferers.len() != self.interferers() {
            return Err(Error::DimensionMismatch { expected: self.interferers(), got: draw.interferers.len() });
        }
        let period = self.params.symbol_time();
        let amp = (self.params.p / 2.0).sqrt();
        let mut interference = 0.0;
        for (table, d) in self.tables.iter().zip(&draw.interferers) {
            check_tau(d.tau, period)?;
            interference += table.term(d, self.params.tc);
        }
        Ok(TrialOutput {
            desired: amp * period * draw.b_desired,
            interference: amp * interference,
            noise: self.params.noise_std() * draw.noise,
        })
    }

    /// Decision statistic and whether the sign decision is correct
    /// (`z = 0` counts as an error).
    pub fn decide(&self, draw: &TrialDraw) -> Result<(f64, bool)> {
        let z = self.output(draw)?.z();
        let ok = z != 0.0 && (z > 0.0) == (draw.b_desired > 0.0);
        Ok((z, ok))
    }
}

/// One correlation window for desired user `i`.
pub fn run_trial(set: &SequenceSet, i: usize, params: &SystemParams, draw: &TrialDraw) -> Result<(f64, bool)> {
    Link::new(set, i, params)?.decide(draw)
}

/// `Var{Iᵢ}` predicted by the closed-form SINR: `(PT²/2)·(1/(6N²))·Σ_{k≠i} Σ_m S_m^{i,k}`.
pub fn predicted_interference_variance(set: &SequenceSet, i: usize, params: &SystemParams) -> Result<f64> {
    set.check_user(i)?;
    let weights = SpectralWeights::new(set.chip_len())?;
    let sums = crate::metrics::interference_sums(set, &weights)?;
    let t = params.symbol_time();
    let n = params.n as f64;
    Ok(params.p * t * t / 2.0 * sums[i] / (6.0 * n * n))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum DesiredUsers {
    #[default]
    All,
    Subset(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Trials per desired user and grid point (`U`).
    pub trials: u64,
    pub ebn0_db: Vec<f64>,
    pub seed: u64,
    pub desired_users: DesiredUsers,
}

impl SimConfig {
    pub fn new(trials: u64, ebn0_db: Vec<f64>, seed: u64) -> Result<Self> {
        if trials < 1 {
            return Err(Error::InvalidParameter("U must be at least 1".into()));
        }
        if ebn0_db.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("Eb/N0 grid must be finite".into()));
        }
        Ok(Self { trials, ebn0_db, seed, desired_users: DesiredUsers::All })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub label: String,
    pub ebn0_db: f64,
    /// Trials per desired user.
    pub trials: u64,
    pub errors: u64,
    pub users_measured: usize,
    pub ber: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BerReport {
    pub points: Vec<BerPoint>,
}

pub const BER_CSV_HEADER: &str = "label,ebn0_db,trials,errors,ber,seed";

impl BerReport {
    pub fn extend(&mut self, other: BerReport) {
        self.points.extend(other.points);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(BER_CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            let _ = writeln!(out, "{},{},{},{},{:e},{}", p.label, p.ebn0_db, p.trials, p.errors, p.ber, p.seed);
        }
        out
    }
}

/// Bit-error rate averaged over desired users and trials at each `E_b/N₀`.
///
/// `params` supplies `P` and `T_c`; its `N₀` is replaced per grid point.
pub fn run_ber(set: &SequenceSet, label: &str, params: &SystemParams, config: &SimConfig) -> Result<BerReport> {
    let users: Vec<usize> = match &config.desired_users {
        DesiredUsers::All => (0..set.users()).collect(),
        DesiredUsers::Subset(v) => v.clone(),
    };
    if users.is_empty() {
        return Err(Error::InvalidParameter("no desired users selected".into()));
    }
    let mut points = Vec::with_capacity(config.ebn0_db.len());
    for (grid, &ebn0) in config.ebn0_db.iter().enumerate() {
        let point_params = SystemParams::from_ebn0_db(set.chip_len(), set.users(), params.p, params.tc, ebn0)?;
        let mut errors = 0u64;
        for &user in &users {
            let link = Link::new(set, user, &point_params)?;
            errors += (0..config.trials)
                .into_par_iter()
                .map(|trial| {
                    let mut rng = keyed_rng(config.seed, grid as u32, user as u32, trial);
                    let draw = link.sample(&mut rng);
                    link.decide(&draw).map(|(_, ok)| u64::from(!ok))
                })
                .sum::<Result<u64>>()?;
        }
        points.push(BerPoint {
            label: label.to_string(),
            ebn0_db: ebn0,
            trials: config.trials,
            errors,
            users_measured: users.len(),
            ber: errors as f64 / (config.trials as f64 * users.len() as f64),
            seed: config.seed,
        });
    }
    Ok(BerReport { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{gold_codes, normalize};
    use cdma_oracle as oracle;

    fn real(v: &[f64]) -> SpreadingSequence {
        normalize(&v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn xcorr_examples() {
        let g = gold_codes(1).unwrap();
        let s = &g.sequences()[0];
        assert!((aperiodic_xcorr(s, s, 0).unwrap() - Complex64::new(31.0, 0.0)).norm() < 1e-12);
        assert_eq!(aperiodic_xcorr(s, s, 31).unwrap(), Complex64::new(0.0, 0.0));
        let sk = real(&[1.0, 1.0]);
        let si = real(&[1.0, -1.0]);
        assert!((aperiodic_xcorr(&sk, &si, 1).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(aperiodic_xcorr(&sk, s, 0).is_err());
    }

    #[test]
    fn aligned_identical_sequence_gives_full_period() {
        let g = gold_codes(2).unwrap();
        let s = &g.sequences()[1];
        let v = interference_term(s, s, 0.0, 0.0, -1.0, 1.0, 1.0).unwrap();
        assert!((v - 31.0).abs() < 1e-12);
        let v = interference_term(s, s, 0.0, 0.0, -1.0, 1.0, 0.25).unwrap();
        assert!((v - 31.0 * 0.25).abs() < 1e-12);
    }

    #[test]
    fn quadrature_phase_cancels_real_sequences() {
        let g = gold_codes(3).unwrap();
        let (sk, si) = (&g.sequences()[0], &g.sequences()[2]);
        for tau in [0.0, 3.3, 17.9, 30.99] {
            let v = interference_term(sk, si, tau, PI / 2.0, 1.0, -1.0, 1.0).unwrap();
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn matches_quadrature_small_case() {
        let sk = real(&[1.0, 1.0]);
        let si = real(&[1.0, -1.0]);
        let got = interference_term(&sk, &si, 0.5, 0.0, 1.0, 1.0, 1.0).unwrap();
        let want = oracle::correlator_quadrature(sk.chips(), si.chips(), 0.5, 0.0, 1.0, 1.0, 1.0, 10_000);
        assert!((got - want).abs() < 1e-6 * 2.0);
    }

    #[test]
    fn matches_quadrature_on_gold_pairs() {
        let g = gold_codes(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..40 {
            let k = rng.random_range(0..7);
            let i = rng.random_range(0..7);
            let tc = 0.5 + rng.random::<f64>();
            let tau = rng.random::<f64>() * 31.0 * tc;
            let psi = rng.random::<f64>() * 2.0 * PI;
            let (bp, bc) = (symbol(&mut rng), symbol(&mut rng));
            let (sk, si) = (&g.sequences()[k], &g.sequences()[i]);
            let got = interference_term(sk, si, tau, psi, bp, bc, tc).unwrap();
            let want = oracle::correlator_quadrature(sk.chips(), si.chips(), tau, psi, bp, bc, tc, 10_000);
            assert!((got - want).abs() <= 1e-6 * 31.0 * tc, "{got} vs {want}");
        }
    }

    #[test]
    fn tau_is_range_checked() {
        let s = real(&[1.0, -1.0, 1.0]);
        assert!(matches!(
            interference_term(&s, &s, 3.0, 0.0, 1.0, 1.0, 1.0),
            Err(Error::TauOutOfRange { .. })
        ));
        assert!(interference_term(&s, &s, -0.1, 0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn single_user_noiseless_trial_is_exact() {
        let set = gold_codes(1).unwrap();
        let params = SystemParams::new(31, 1, 2.0, 0.5, 0.0).unwrap();
        let draw = TrialDraw { interferers: vec![], b_desired: -1.0, noise: 3.0 };
        let (z, ok) = run_trial(&set, 0, &params, &draw).unwrap();
        assert_eq!(z, -15.5);
        assert!(ok);
    }

    #[test]
    fn zero_statistic_counts_as_error() {
        let set = gold_codes(1).unwrap();
        let params = SystemParams::new(31, 1, 2.0, 1.0, 4.0).unwrap();
        // desired amplitude 31, noise std sqrt(4*31/4)
        let draw = TrialDraw { interferers: vec![], b_desired: 1.0, noise: -31.0 / 31f64.sqrt() };
        let (z, ok) = run_trial(&set, 0, &params, &draw).unwrap();
        assert!(z.abs() < 1e-12);
        if z == 0.0 {
            assert!(!ok);
        }
    }

    #[test]
    fn keyed_streams_are_reproducible_and_distinct() {
        let a: u64 = keyed_rng(5, 1, 2, 3).random();
        let b: u64 = keyed_rng(5, 1, 2, 3).random();
        let c: u64 = keyed_rng(5, 1, 2, 4).random();
        let d: u64 = keyed_rng(5, 1, 3, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn ber_is_deterministic() {
        let set = gold_codes(3).unwrap();
        let params = SystemParams::unit(31, 3, 1.0).unwrap();
        let config = SimConfig::new(2000, vec![0.0, 4.0], 11).unwrap();
        let a = run_ber(&set, "x", &params, &config).unwrap();
        let b = run_ber(&set, "x", &params, &config).unwrap();
        assert_eq!(a, b);
        for p in &a.points {
            assert_eq!(p.ber, p.errors as f64 / (p.trials as f64 * 3.0));
        }
        assert!(a.to_csv().starts_with("label,ebn0_db,trials,errors,ber,seed\nx,0,2000,"));
    }

    #[test]
    fn single_user_ber_follows_q_function() {
        let set = gold_codes(1).unwrap();
        let params = SystemParams::unit(31, 1, 1.0).unwrap();
        let config = SimConfig::new(1_000_000, vec![6.02], 2024).unwrap();
        let report = run_ber(&set, "awgn", &params, &config).unwrap();
        let p = oracle::q_function((2.0 * 10f64.powf(0.602)).sqrt());
        assert!((p - 2.339e-3).abs() < 2e-6);
        let se = (p * (1.0 - p) / 1e6).sqrt();
        assert!((report.points[0].ber - p).abs() <= 3.0 * se, "{} vs {p}", report.points[0].ber);
    }

    #[test]
    fn interference_is_zero_mean_and_signal_mean_is_exact() {
        let set = gold_codes(7).unwrap();
        let params = SystemParams::unit(31, 7, 2.0).unwrap();
        let link = Link::new(&set, 0, &params).unwrap();
        let trials = 200_000u64;
        let (mut si, mut si2, mut z_sum, mut z_n) = (0.0, 0.0, 0.0, 0u64);
        for t in 0..trials {
            let draw = link.sample(&mut keyed_rng(3, 0, 0, t));
            let out = link.output(&draw).unwrap();
            si += out.interference;
            si2 += out.interference * out.interference;
            if draw.b_desired > 0.0 {
                z_sum += out.z();
                z_n += 1;
            }
        }
        let n = trials as f64;
        let mean = si / n;
        let var = si2 / n - mean * mean;
        assert!(mean.abs() <= 3.0 * (var / n).sqrt());
        let total_std = (var + params.noise_std().powi(2)).sqrt();
        let expect = 31.0 * 0.5f64.sqrt();
        assert!((z_sum / z_n as f64 - expect).abs() <= 3.0 * total_std / (z_n as f64).sqrt());
    }
}
