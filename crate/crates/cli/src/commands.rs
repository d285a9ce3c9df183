use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cdma_core::metrics::{self, capacity, max_sinr, sinr_bounds, LogBase, SystemParams};
use cdma_core::optimizer::{Algorithm1, SweepTrace};
use cdma_core::simulator::{run_ber, BerReport, SimConfig};
use cdma_core::spectral::{build_sigma, SpectralWeights};
use cdma_core::{gold_codes, min_eigenpair, random_sequences, SequenceSet};

use crate::config::{Init, LogBaseArg, RunConfig, DEFAULT_K, DEFAULT_N};
use crate::CliError;

pub const TRACE_HEADER: &str = "sweep,user,lambda_min,objective_F";
pub const METRICS_HEADER: &str = "user,sinr,sir,lambda_min,max_sinr,capacity_bits,sinr_lower,sinr_upper";

/// A file (or standard output) to be written once every computation succeeded.
pub struct Output {
    pub path: Option<PathBuf>,
    pub contents: String,
}

fn config_err(e: cdma_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

/// `inf` for infinities, `nan` for NaN, shortest round-trip otherwise.
fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x}")
    }
}

pub fn load_set(path: &str) -> Result<SequenceSet, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {path}: {e}")))?;
    SequenceSet::from_json(&text).map_err(|e| CliError::Config(format!("{path}: {e}")))
}

pub fn generate(cfg: &RunConfig) -> Result<Vec<Output>, CliError> {
    let k = cfg.k.unwrap_or(DEFAULT_K);
    let set = match cfg.init.unwrap_or(Init::Gold) {
        Init::Gold => {
            if let Some(n) = cfg.n.filter(|&n| n != cdma_core::sequences::GOLD_LENGTH) {
                return Err(CliError::Config(format!("gold codes have N = 31, got --n {n}")));
            }
            gold_codes(k).map_err(config_err)?
        }
        Init::Random => random_sequences(k, cfg.n.unwrap_or(DEFAULT_N), cfg.seed("random init")?).map_err(config_err)?,
        Init::File => return Err(CliError::Config("generate supports --init gold or random".into())),
    };
    Ok(vec![Output { path: cfg.out.clone(), contents: set.to_json() }])
}

pub fn trace_csv(trace: &SweepTrace) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    let _ = writeln!(out, "0,0,nan,{}", num(trace.initial_objective));
    for sweep in &trace.sweeps {
        for u in &sweep.updates {
            let _ = writeln!(out, "{},{},{},{}", sweep.sweep, u.user + 1, num(u.lambda_min), num(u.objective));
        }
    }
    out
}

fn trace_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.trace.csv"))
}

fn check_dims(set: &SequenceSet, cfg: &RunConfig) -> Result<(), CliError> {
    if let Some(n) = cfg.n.filter(|&n| n != set.chip_len()) {
        return Err(CliError::Config(format!("--n {n} does not match the input (N = {})", set.chip_len())));
    }
    if let Some(k) = cfg.k.filter(|&k| k != set.users()) {
        return Err(CliError::Config(format!("--k {k} does not match the input (K = {})", set.users())));
    }
    Ok(())
}

pub fn optimize(cfg: &RunConfig, trace_out: Option<PathBuf>) -> Result<Vec<Output>, CliError> {
    let alg = Algorithm1::new(cfg.l, cfg.eps).map_err(config_err)?;
    let out = cfg
        .out
        .clone()
        .ok_or_else(|| CliError::Config("optimize needs --out for the optimized set".into()))?;
    let set = load_set(cfg.single_input()?)?;
    check_dims(&set, cfg)?;
    let (result, trace) = alg.run(&set).map_err(config_err)?;
    let trace_out = trace_out.unwrap_or_else(|| trace_path(&out));
    Ok(vec![
        Output { path: Some(out), contents: result.to_json() },
        Output { path: Some(trace_out), contents: trace_csv(&trace) },
    ])
}

fn noise(cfg: &RunConfig, set: &SequenceSet) -> Result<f64, CliError> {
    match (cfg.n0, cfg.ebn0.as_deref()) {
        (Some(n0), None) => Ok(n0),
        (None, Some([db])) => Ok(SystemParams::from_ebn0_db(set.chip_len(), set.users(), cfg.p, cfg.tc, *db)
            .map_err(config_err)?
            .n0),
        (None, Some(_)) => Err(CliError::Config("metrics takes a single --ebn0 value".into())),
        (Some(_), Some(_)) => Err(CliError::Config("give either --n0 or --ebn0, not both".into())),
        (None, None) => Err(CliError::Config("metrics needs --n0 or --ebn0".into())),
    }
}

pub fn metrics_csv(set: &SequenceSet, params: &SystemParams, base: LogBase) -> Result<String, cdma_core::Error> {
    let weights = SpectralWeights::new(set.chip_len())?;
    let sinrs = metrics::sinr_all(set, params)?;
    let inv_sir = metrics::inverse_sq_sir_all(set)?;
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for i in 0..set.users() {
        let sigma = build_sigma(set, i, &weights)?;
        let lambda = min_eigenpair(&sigma.sigma)?.value;
        let bounds = sinr_bounds(&sigma, params)?;
        let sir = if inv_sir[i] <= 0.0 { f64::INFINITY } else { inv_sir[i].powf(-0.5) };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            i + 1,
            num(sinrs[i]),
            num(sir),
            num(lambda),
            num(max_sinr(lambda, params)),
            num(capacity(lambda, params, base)),
            num(bounds.sinr_lower),
            num(bounds.sinr_upper)
        );
    }
    let (arith, harm) = metrics::mean_squared_sinr(set, params)?;
    let _ = writeln!(out, "arith_mean_sq,{},,,,,,", num(arith));
    let _ = writeln!(out, "harm_mean_sq,{},,,,,,", num(harm));
    Ok(out)
}

pub fn metrics(cfg: &RunConfig) -> Result<Vec<Output>, CliError> {
    let set = load_set(cfg.single_input()?)?;
    check_dims(&set, cfg)?;
    let params = SystemParams::for_set(&set, cfg.p, cfg.tc, noise(cfg, &set)?).map_err(config_err)?;
    let base = match cfg.log_base {
        LogBaseArg::Two => LogBase::Two,
        LogBaseArg::E => LogBase::E,
    };
    let csv = metrics_csv(&set, &params, base).map_err(config_err)?;
    Ok(vec![Output { path: cfg.out.clone(), contents: csv }])
}

fn parse_labeled(spec: &str) -> (String, String) {
    match spec.split_once('=') {
        Some((label, path)) if !label.is_empty() => (label.to_string(), path.to_string()),
        _ => {
            let label = Path::new(spec)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| spec.to_string());
            (label, spec.to_string())
        }
    }
}

/// Sets at the requested sweep counts; sweep 0 is the input itself. Runs
/// that converge early repeat their final set for larger counts.
fn snapshots(set: &SequenceSet, at: &[usize], eps: f64) -> Result<Vec<SequenceSet>, CliError> {
    let max = at.iter().copied().max().unwrap_or(0);
    if max == 0 {
        return Ok(vec![set.clone(); at.len()]);
    }
    let mut found: Vec<Option<SequenceSet>> = vec![None; at.len()];
    let (last, _) = Algorithm1::new(max, eps)
        .map_err(config_err)?
        .run_with(set, |l, s| {
            for (slot, &want) in found.iter_mut().zip(at) {
                if want == l {
                    *slot = Some(s.clone());
                }
            }
        })
        .map_err(config_err)?;
    Ok(found
        .into_iter()
        .zip(at)
        .map(|(s, &l)| if l == 0 { set.clone() } else { s.unwrap_or_else(|| last.clone()) })
        .collect())
}

pub fn simulate(cfg: &RunConfig) -> Result<Vec<Output>, CliError> {
    if cfg.input.is_empty() {
        return Err(CliError::Config("simulate needs at least one --in".into()));
    }
    let grid = cfg.ebn0.clone().ok_or_else(|| CliError::Config("simulate needs --ebn0".into()))?;
    if grid.is_empty() {
        return Err(CliError::Config("empty --ebn0 grid".into()));
    }
    let sim = SimConfig::new(cfg.u, grid, cfg.seed("simulate")?).map_err(config_err)?;
    let inputs = cfg
        .input
        .iter()
        .map(|spec| {
            let (label, path) = parse_labeled(spec);
            load_set(&path).map(|set| (label, set))
        })
        .collect::<Result<Vec<_>, _>>()?;
    for (_, set) in &inputs {
        check_dims(set, cfg)?;
    }

    let mut jobs: Vec<(String, SequenceSet)> = Vec::new();
    match &cfg.iterations {
        None => jobs = inputs,
        Some(at) => {
            let single = inputs.len() == 1;
            for (label, set) in &inputs {
                for (l, snap) in at.iter().zip(snapshots(set, at, cfg.eps)?) {
                    let name = match (*l, single) {
                        (0, _) => label.clone(),
                        (l, true) => format!("iter{l}"),
                        (l, false) => format!("{label}-iter{l}"),
                    };
                    jobs.push((name, snap));
                }
            }
        }
    }

    let mut report = BerReport::default();
    for (label, set) in &jobs {
        let params = SystemParams::for_set(set, cfg.p, cfg.tc, 0.0).map_err(config_err)?;
        report.extend(run_ber(set, label, &params, &sim).map_err(config_err)?);
    }
    Ok(vec![Output { path: cfg.out.clone(), contents: report.to_csv() }])
}
