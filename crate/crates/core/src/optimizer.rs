//! Optimal sequence for one user and the cyclic all-user update.
//!
//! With interferers fixed, `Σ_{k≠i} Σ_m S_m^{i,k} = sᵢ*Σᵢsᵢ`, so on the
//! sphere `‖sᵢ‖² = N` the minimum is `N·λ_min(Σᵢ)`, attained at `√N·u_min`.
//!
//! The all-user objective `F = Σᵢ Σ_{k≠i} Σ_m S_m^{i,k}` splits as
//! `2·sᵢ*Σᵢsᵢ + (terms without sᵢ)` because `S_m^{i,k} = S_m^{k,i}`, so each
//! single-user update can only lower `F`.

use crate::eigen::min_eigenpair;
use crate::metrics::SystemParams;
use crate::spectral::{InterferenceMatrix, SpectralWeights, SpectrumProfile};
use crate::{Error, Result, SequenceSet, SpreadingSequence};

/// Default sweep cap `L`.
pub const DEFAULT_SWEEPS: usize = 50;

/// Default convergence threshold on per-user displacement, in units of `√N`.
pub const DEFAULT_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SingleUserSolution {
    pub user: usize,
    /// `√N` times the canonical minimum eigenvector.
    pub sequence: SpreadingSequence,
    pub lambda_min: f64,
    /// `N·λ_min`, the minimum of `Σ_{k≠i} Σ_m S_m^{i,k}`.
    pub objective: f64,
}

fn solve_from_profiles(
    profiles: &[SpectrumProfile],
    i: usize,
    weights: &SpectralWeights,
) -> Result<SingleUserSolution> {
    let sigma = InterferenceMatrix::from_profiles(profiles, i, weights)?;
    let pair = min_eigenpair(&sigma.sigma)?;
    let n = weights.len() as f64;
    let scale = n.sqrt();
    let sequence = SpreadingSequence::new(pair.vector.iter().map(|z| z * scale).collect())?;
    Ok(SingleUserSolution {
        user: i,
        sequence,
        lambda_min: pair.value,
        objective: n * pair.value,
    })
}

/// Optimal sequence for user `i` (0-based) with every other user fixed.
pub fn solve_single(set: &SequenceSet, i: usize) -> Result<SingleUserSolution> {
    set.check_user(i)?;
    let weights = SpectralWeights::new(set.chip_len())?;
    solve_from_profiles(&weights.profiles(set)?, i, &weights)
}

fn total_objective(profiles: &[SpectrumProfile]) -> Result<f64> {
    let mut acc = 0.0;
    for a in 0..profiles.len() {
        for b in (a + 1)..profiles.len() {
            acc += profiles[a].pair_interference(&profiles[b])?;
        }
    }
    Ok(2.0 * acc)
}

/// `F = Σᵢ Σ_{k≠i} Σ_m S_m^{i,k}`.
pub fn objective(set: &SequenceSet) -> Result<f64> {
    let weights = SpectralWeights::new(set.chip_len())?;
    total_objective(&weights.profiles(set)?)
}

/// `K·{F/(6N²) + K·N₀/(2PT)}⁻¹`; infinite when both terms vanish.
pub fn harmonic_mean_sq_sinr(set: &SequenceSet, params: &SystemParams) -> Result<f64> {
    if set.chip_len() != params.n {
        return Err(Error::DimensionMismatch { expected: params.n, got: set.chip_len() });
    }
    let k = set.users() as f64;
    let n = params.n as f64;
    let denom = objective(set)? / (6.0 * n * n) + k * params.noise_term();
    Ok(if denom <= 0.0 { f64::INFINITY } else { k / denom })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserUpdate {
    pub user: usize,
    pub lambda_min: f64,
    /// `F` right after this update.
    pub objective: f64,
    /// `‖s_new - s_old‖` with both in canonical phase.
    pub displacement: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    /// 1-based sweep counter `l`.
    pub sweep: usize,
    pub updates: Vec<UserUpdate>,
    pub converged: bool,
}

impl SweepRecord {
    /// `F` at the end of the sweep.
    pub fn objective(&self) -> f64 {
        self.updates.last().map_or(0.0, |u| u.objective)
    }

    pub fn lambda_min(&self) -> Vec<f64> {
        self.updates.iter().map(|u| u.lambda_min).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTrace {
    /// `F` of the initial set.
    pub initial_objective: f64,
    pub sweeps: Vec<SweepRecord>,
}

impl SweepTrace {
    pub fn converged(&self) -> bool {
        self.sweeps.last().is_some_and(|s| s.converged)
    }

    /// `F` before any update followed by `F` after every single-user update.
    pub fn objective_path(&self) -> Vec<f64> {
        std::iter::once(self.initial_objective)
            .chain(self.sweeps.iter().flat_map(|s| s.updates.iter().map(|u| u.objective)))
            .collect()
    }
}

/// Cyclic single-user updates over all users, repeated for at most `L` sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Algorithm1 {
    pub max_sweeps: usize,
    pub eps: f64,
}

impl Default for Algorithm1 {
    fn default() -> Self {
        Self { max_sweeps: DEFAULT_SWEEPS, eps: DEFAULT_EPS }
    }
}

impl Algorithm1 {
    pub fn new(max_sweeps: usize, eps: f64) -> Result<Self> {
        if max_sweeps < 1 {
            return Err(Error::InvalidParameter("L must be at least 1".into()));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        Ok(Self { max_sweeps, eps })
    }

    pub fn run(&self, initial: &SequenceSet) -> Result<(SequenceSet, SweepTrace)> {
        self.run_with(initial, |_, _| {})
    }

    /// Like [`run`](Self::run), calling `on_sweep(l, set)` after each sweep.
    pub fn run_with(
        &self,
        initial: &SequenceSet,
        mut on_sweep: impl FnMut(usize, &SequenceSet),
    ) -> Result<(SequenceSet, SweepTrace)> {
        let weights = SpectralWeights::new(initial.chip_len())?;
        let mut set = initial.clone();
        let mut profiles = weights.profiles(&set)?;
        let tol = self.eps * (set.chip_len() as f64).sqrt();
        let mut trace = SweepTrace { initial_objective: total_objective(&profiles)?, sweeps: Vec::new() };

        for sweep in 1..=self.max_sweeps {
            let mut updates = Vec::with_capacity(set.users());
            for user in 0..set.users() {
                let sol = solve_from_profiles(&profiles, user, &weights)?;
                let displacement = set.sequences()[user].canonical().distance(&sol.sequence);
                profiles[user] = weights.quad_forms(&sol.sequence)?;
                set.replace(user, sol.sequence)?;
                updates.push(UserUpdate {
                    user,
                    lambda_min: sol.lambda_min,
                    objective: total_objective(&profiles)?,
                    displacement,
                });
            }
            let converged = updates.iter().all(|u| u.displacement <= tol);
            trace.sweeps.push(SweepRecord { sweep, updates, converged });
            on_sweep(sweep, &set);
            if converged {
                break;
            }
        }
        Ok((set, trace))
    }
}

/// Runs at most `max_sweeps` sweeps with convergence threshold `eps`.
pub fn run_algorithm1(initial: &SequenceSet, max_sweeps: usize, eps: f64) -> Result<(SequenceSet, SweepTrace)> {
    Algorithm1::new(max_sweeps, eps)?.run(initial)
}
