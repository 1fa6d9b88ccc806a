use std::f64::consts::FRAC_PI_4;
use std::path::PathBuf;

use clap::{ArgGroup, Args};
use mkent_core::mk::norm_bound;
use mkent_core::tensor::power_iteration_norm;
use mkent_core::{
    canonical_mk, canonical_settings, decide_with_tau, generalized_ghz, ghz, is_product_oracle, max_mk_mean,
    mk_build, random_product_state, random_state, variance, ComplexMatrix, DecisionReport, GhzSign,
    MeasurementSettings, OptimizerConfig, OracleVerdict, PureState, QubitOperator, Verdict,
    DEFAULT_TAU, DENSE_QUBIT_CAP,
};
use serde::Serialize;

use crate::state_file::{LoadInfo, StateFile};
use crate::{CliError, Output, EXIT_ENTANGLED, EXIT_PRODUCT};

const SCAN_TOLERANCE: f64 = 1e-12;
const POWER_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Args)]
pub struct OptimizerFlags {
    /// Seed for the random optimizer starts.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of optimizer starts [default: max(32, 8n)].
    #[arg(long)]
    pub starts: Option<usize>,
    /// Iteration budget per start.
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

impl OptimizerFlags {
    fn config(&self, n: usize) -> Result<OptimizerConfig, CliError> {
        let mut config = OptimizerConfig::for_qubits(n);
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(starts) = self.starts {
            config.starts = starts;
        }
        if let Some(iterations) = self.max_iterations {
            config.max_iterations = iterations;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Args)]
pub struct DecideArgs {
    /// State file: {"n": N, "amplitudes": [[re, im], ...]}.
    pub file: PathBuf,
    #[command(flatten)]
    pub optimizer: OptimizerFlags,
    /// Relative tolerance on the variance bound.
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
}

#[derive(Debug, Clone, Serialize)]
struct DecideDocument {
    input: InputDocument,
    report: DecisionReport,
    oracle: OracleVerdict,
}

#[derive(Debug, Clone, Serialize)]
struct InputDocument {
    path: String,
    #[serde(flatten)]
    load: LoadInfo,
}

fn verdict_code(verdict: Verdict) -> u8 {
    match verdict {
        Verdict::Entangled => EXIT_ENTANGLED,
        Verdict::Product => EXIT_PRODUCT,
    }
}

pub fn decide(args: &DecideArgs) -> Result<Output, CliError> {
    let (psi, load) = StateFile::read(&args.file)?.to_state()?;
    let config = args.optimizer.config(psi.n())?;
    let report = decide_with_tau(&psi, &config, args.tau)?;
    let code = verdict_code(report.verdict);
    let document = DecideDocument {
        input: InputDocument { path: args.file.display().to_string(), load },
        report,
        oracle: is_product_oracle(&psi),
    };
    Output::new(&document, code)
}

#[derive(Debug, Clone, Args)]
pub struct GhzScanArgs {
    /// Number of qubits.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Smallest φ, in radians.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi_min: f64,
    /// Largest φ, at most π/4.
    #[arg(long, default_value_t = FRAC_PI_4, allow_negative_numbers = true)]
    pub phi_max: f64,
    /// Grid points, endpoints included.
    #[arg(long, default_value_t = 21)]
    pub points: usize,
    /// Also report the best MK mean value for each φ.
    #[arg(long)]
    pub compare_mean: bool,
    #[command(flatten)]
    pub optimizer: OptimizerFlags,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
}

#[derive(Debug, Clone, Serialize)]
struct ScanRow {
    phi: f64,
    variance: f64,
    closed_form: f64,
    difference: f64,
    verdict: Verdict,
    margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_mk_mean: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct ScanDocument {
    n: usize,
    bound: f64,
    rows: Vec<ScanRow>,
}

fn scan_grid(args: &GhzScanArgs) -> Result<Vec<f64>, CliError> {
    let (lo, hi) = (args.phi_min, args.phi_max);
    if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi > FRAC_PI_4 + SCAN_TOLERANCE || lo > hi {
        return Err(CliError::Input(format!("φ range [{lo}, {hi}] is not inside [0, π/4]")));
    }
    match args.points {
        0 => Err(CliError::Input("--points must be at least 1".into())),
        1 if lo != hi => Err(CliError::Input("a single grid point needs --phi-min equal to --phi-max".into())),
        1 => Ok(vec![lo]),
        p => Ok((0..p).map(|k| lo + (hi - lo) * k as f64 / (p - 1) as f64).collect()),
    }
}

pub fn ghz_scan(args: &GhzScanArgs) -> Result<Output, CliError> {
    if args.n < 2 {
        return Err(CliError::Input(format!("ghz-scan needs n ≥ 2, got {}", args.n)));
    }
    let grid = scan_grid(args)?;
    let op = canonical_mk(args.n)?;
    let config = args.optimizer.config(args.n)?;
    let bound = 2f64.powi(args.n as i32 - 1);
    let mut rows = Vec::with_capacity(grid.len());
    for phi in grid {
        let psi = generalized_ghz(args.n, phi)?;
        let delta = variance(&psi, op.b())?;
        let closed_form = bound * (2.0 * phi).cos().powi(2);
        let report = decide_with_tau(&psi, &config, args.tau)?;
        let max_mk_mean = if args.compare_mean { Some(max_mk_mean(&psi, &config)?.value) } else { None };
        rows.push(ScanRow {
            phi,
            variance: delta,
            closed_form,
            difference: delta - closed_form,
            verdict: report.verdict,
            margin: report.margin,
            max_mk_mean,
        });
    }
    Output::new(&ScanDocument { n: args.n, bound, rows }, 0)
}

#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["settings", "canonical"])))]
pub struct MkOpArgs {
    /// Settings file: {"n": N, "pairs": [{"a": [x,y,z], "a_prime": [x,y,z]}, ...]}.
    pub settings: Option<PathBuf>,
    /// Use the canonical settings for this many qubits.
    #[arg(long)]
    pub canonical: Option<usize>,
    /// Exchange a and a' on every qubit before building.
    #[arg(long)]
    pub swap: bool,
    /// Report B' instead of B.
    #[arg(long)]
    pub primed: bool,
    /// Include every matrix entry as [re, im].
    #[arg(long)]
    pub dense: bool,
}

#[derive(Debug, Clone, Serialize)]
struct MkOpDocument {
    n: usize,
    operator: &'static str,
    settings: MeasurementSettings,
    norm_bound: f64,
    spectral_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    eigenvalues: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<[f64; 2]>>>,
}

fn matrix_rows(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    m.as_slice().chunks(m.cols()).map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn mk_op(args: &MkOpArgs) -> Result<Output, CliError> {
    let mut settings = match (&args.settings, args.canonical) {
        (_, Some(n)) => canonical_settings(n)?,
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
            serde_json::from_str(&text)?
        }
        (None, None) => return Err(CliError::Input("give a settings file or --canonical N".into())),
    };
    if args.swap {
        settings = settings.swapped();
    }
    let n = settings.n();
    if args.dense && n > DENSE_QUBIT_CAP {
        return Err(CliError::Input(format!("dense dump is limited to n ≤ {DENSE_QUBIT_CAP}, got n = {n}")));
    }
    let pair = mk_build(settings.clone())?;
    let op: &dyn QubitOperator = if args.primed { pair.b_prime() } else { pair.b() };
    let (spectral_norm, eigenvalues, matrix) = if n <= DENSE_QUBIT_CAP {
        let (b, bp) = pair.dense()?;
        let m = if args.primed { bp } else { b };
        let ev = m.hermitian_eigenvalues()?;
        let norm = ev[0].abs().max(ev[ev.len() - 1].abs());
        (norm, Some(ev), args.dense.then(|| matrix_rows(&m)))
    } else {
        (power_iteration_norm(op, POWER_ITERATIONS, 0), None, None)
    };
    let document = MkOpDocument {
        n,
        operator: if args.primed { "B'" } else { "B" },
        settings,
        norm_bound: norm_bound(n),
        spectral_norm,
        eigenvalues,
        matrix,
    };
    Output::new(&document, 0)
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random states of each kind per qubit count in the oracle suite.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Add a fixture whose norm is off by 10%, which must fail.
    #[arg(long)]
    pub inject_failure: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
struct Suite {
    name: &'static str,
    passed: usize,
    failed: usize,
    failures: Vec<String>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Suite { name, ..Default::default() }
    }

    fn check(&mut self, ok: bool, label: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            self.failures.push(label());
        }
    }

    fn check_result(&mut self, result: Result<bool, CliError>, label: impl FnOnce() -> String) {
        match result {
            Ok(ok) => self.check(ok, label),
            Err(e) => {
                let text = format!("{}: {e}", label());
                self.check(false, || text);
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct SelftestDocument {
    seed: u64,
    count: usize,
    passed: bool,
    suites: Vec<Suite>,
}

fn spectral_suite() -> Suite {
    let mut suite = Suite::new("spectral");
    for n in 2..=DENSE_QUBIT_CAP {
        suite.check_result(canonical_mk(n).map(|_| true).map_err(Into::into), || format!("canonical n={n}"));
    }
    for n in 2..=7 {
        let result = (|| -> Result<bool, CliError> {
            let (b, bp) = canonical_mk(n)?.dense()?;
            let ev = b.hermitian_eigenvalues()?;
            let c = norm_bound(n);
            let extremes = (ev[0] - c).abs() < 1e-10 && (ev[ev.len() - 1] + c).abs() < 1e-10;
            let rest = ev[1..ev.len() - 1].iter().all(|x| x.abs() < 1e-10);
            let (sb, _) = mk_build(canonical_settings(n)?.swapped())?.dense()?;
            Ok(extremes && rest && sb.max_abs_diff(&bp)? < 1e-12)
        })();
        suite.check_result(result, || format!("eigenvalues and swap n={n}"));
    }
    suite
}

fn ghz_variance_suite() -> Suite {
    let mut suite = Suite::new("ghz_variance");
    for n in 2..=6 {
        for k in 0..=10 {
            let phi = FRAC_PI_4 * k as f64 / 10.0;
            let result = (|| -> Result<bool, CliError> {
                let delta = variance(&generalized_ghz(n, phi)?, canonical_mk(n)?.b())?;
                Ok((delta - 2f64.powi(n as i32 - 1) * (2.0 * phi).cos().powi(2)).abs() < 1e-9)
            })();
            suite.check_result(result, || format!("n={n} φ={phi}"));
        }
    }
    suite
}

fn oracle_suite(seed: u64, count: usize) -> Suite {
    let mut suite = Suite::new("oracle_agreement");
    for n in 2..=4 {
        let base = OptimizerConfig::for_qubits(n);
        for k in 0..count as u64 {
            let s = seed.wrapping_mul(1_000_003).wrapping_add(1_000 * n as u64 + k);
            let config = base.clone().with_seed(s);
            let product = (|| -> Result<bool, CliError> {
                let psi = random_product_state(n, s)?;
                Ok(is_product_oracle(&psi).is_product && decide_with_tau(&psi, &config, DEFAULT_TAU)?.verdict == Verdict::Product)
            })();
            suite.check_result(product, || format!("product state n={n} seed={s}"));
            let generic = (|| -> Result<bool, CliError> {
                let psi = random_state(n, s)?;
                let oracle = is_product_oracle(&psi);
                let verdict = decide_with_tau(&psi, &config, DEFAULT_TAU)?.verdict;
                Ok((verdict == Verdict::Product) == oracle.is_product || 1.0 - oracle.min_purity < 1e-5)
            })();
            suite.check_result(generic, || format!("random state n={n} seed={s}"));
        }
    }
    suite
}

fn fixture_suite(inject_failure: bool) -> Result<Suite, CliError> {
    let mut fixtures = vec![
        ("generalized GHZ n=3 φ=π/8", StateFile::from_state(&generalized_ghz(3, FRAC_PI_4 / 2.0)?), Verdict::Entangled),
        ("|0101⟩", StateFile::from_state(&PureState::basis(4, 0b0101)?), Verdict::Product),
        ("GHZ+ n=4", StateFile::from_state(&ghz(4, GhzSign::Plus)?), Verdict::Entangled),
    ];
    if inject_failure {
        let mut amplitudes = vec![[0.0, 0.0]; 4];
        amplitudes[0] = [1.1, 0.0];
        fixtures.push(("norm 1.1 on |00⟩", StateFile { n: 2, amplitudes }, Verdict::Product));
    }
    let mut suite = Suite::new("fixtures");
    for (name, file, expected) in fixtures {
        let result = file.to_state().and_then(|(psi, _)| {
            let config = OptimizerConfig::for_qubits(psi.n());
            Ok(decide_with_tau(&psi, &config, DEFAULT_TAU)?.verdict == expected)
        });
        suite.check_result(result, || name.to_string());
    }
    Ok(suite)
}

pub fn selftest(args: &SelftestArgs) -> Result<Output, CliError> {
    let suites = vec![
        spectral_suite(),
        ghz_variance_suite(),
        oracle_suite(args.seed, args.count),
        fixture_suite(args.inject_failure)?,
    ];
    let passed = suites.iter().all(|s| s.failed == 0);
    let document = SelftestDocument { seed: args.seed, count: args.count, passed, suites };
    Output::new(&document, if passed { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scan(lo: f64, hi: f64, points: usize) -> GhzScanArgs {
        GhzScanArgs {
            n: 3,
            phi_min: lo,
            phi_max: hi,
            points,
            compare_mean: false,
            optimizer: OptimizerFlags { seed: None, starts: None, max_iterations: None },
            tau: DEFAULT_TAU,
        }
    }

    #[test]
    fn grid_endpoints() {
        let grid = scan_grid(&scan(0.0, FRAC_PI_4, 5)).unwrap();
        assert_eq!(grid.len(), 5);
        assert_eq!(grid[0], 0.0);
        assert_eq!(grid[4], FRAC_PI_4);
        assert_eq!(scan_grid(&scan(0.3, 0.3, 1)).unwrap(), vec![0.3]);
    }

    #[test]
    fn grid_rejects_bad_ranges() {
        assert!(scan_grid(&scan(-0.1, 0.5, 3)).is_err());
        assert!(scan_grid(&scan(0.0, 1.0, 3)).is_err());
        assert!(scan_grid(&scan(0.5, 0.2, 3)).is_err());
        assert!(scan_grid(&scan(0.1, 0.2, 1)).is_err());
        assert!(scan_grid(&scan(0.1, 0.2, 0)).is_err());
        assert!(scan_grid(&scan(f64::NAN, 0.2, 2)).is_err());
    }

    #[test]
    fn optimizer_flags_override_defaults() {
        let flags = OptimizerFlags { seed: Some(4), starts: Some(3), max_iterations: None };
        let config = flags.config(5).unwrap();
        assert_eq!((config.seed, config.starts), (4, 3));
        assert_eq!(OptimizerFlags { seed: None, starts: None, max_iterations: None }.config(5).unwrap().starts, 40);
        assert!(OptimizerFlags { seed: None, starts: Some(0), max_iterations: None }.config(2).is_err());
    }

    #[test]
    fn suite_records_errors_as_failures() {
        let mut suite = Suite::new("t");
        suite.check(true, || unreachable!());
        suite.check_result(Err(CliError::Input("boom".into())), || "case".into());
        assert_eq!((suite.passed, suite.failed), (1, 1));
        assert_eq!(suite.failures, vec!["case: boom".to_string()]);
    }
}
