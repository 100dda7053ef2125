//! Command surface: JSON configuration, schema-versioned reports, and the
//! four commands `code-info`, `value`, `extract`, and `verify`.
//!
//! Reports are deterministic given the configuration: identical config and
//! seed produce bit-identical JSON apart from the timing field. Corruption
//! sweeps are emitted as CSV with a header row and one row per ρ grid point.

use crate::codes::{make_reed_solomon, LinearCode};
use crate::extract::{commutator_report, extract_global, ExtractionReport, PastingConfig};
use crate::game::{
    build_game, build_two_prover_game, evaluate_synchronous, goodness_synchronous,
    monte_carlo_play, GoodnessReport,
};
use crate::game::SynchronousStrategy;
use crate::strategies::{
    corrupt_classical, embed_classical, honest_strategy, ClassicalStrategy, CorruptionModel,
};
use crate::tensor::{gamma, tensor_encode, TensorCodeword};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const REPORT_SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Code(#[from] crate::codes::CodeError),
    #[error(transparent)]
    Tensor(#[from] crate::tensor::TensorError),
    #[error(transparent)]
    Game(#[from] crate::game::GameError),
    #[error(transparent)]
    Strategy(#[from] crate::strategies::StrategyError),
    #[error(transparent)]
    Extract(#[from] crate::extract::ExtractError),
    #[error(transparent)]
    Galois(#[from] crate::galois::GaloisError),
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Base-code parameters: Reed–Solomon [n, s+1, n−s] over GF(q).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CodeSpec {
    pub q: u64,
    pub n: usize,
    pub s: usize,
}

impl Default for CodeSpec {
    fn default() -> Self {
        Self { q: 5, n: 5, s: 1 }
    }
}

/// How the strategy under test is produced.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategySpec {
    /// Honest strategy on a seeded random planted codeword.
    Honest,
    /// Planted codeword with i.i.d. point flips at the given rate.
    PointFlips { rate: f64 },
    /// Planted codeword with whole last-coordinate slices rewritten.
    SliceScramble { rate: f64 },
}

impl Default for StrategySpec {
    fn default() -> Self {
        StrategySpec::Honest
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum GameVariant {
    Synchronous,
    TwoProver,
}

impl Default for GameVariant {
    fn default() -> Self {
        GameVariant::Synchronous
    }
}

/// Extraction sub-config (mirrors [`PastingConfig`] with documented defaults:
/// method 1, auto k, tuple budget 10000, 2000 samples, tol 1e−7).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct ExtractSpec {
    pub method: u8,
    pub k: Option<usize>,
    pub tol: f64,
    pub tuple_budget: usize,
    pub tuple_samples: usize,
    /// Corruption-rate grid for the sweep CSV; empty = single run.
    pub sweep: Vec<f64>,
}

impl Default for ExtractSpec {
    fn default() -> Self {
        let p = PastingConfig::default();
        Self {
            method: p.method,
            k: p.k,
            tol: p.tol,
            tuple_budget: p.tuple_budget,
            tuple_samples: p.tuple_samples,
            sweep: Vec::new(),
        }
    }
}

/// Top-level run configuration. Defaults: RS(5,5,1), m = 2, honest strategy,
/// synchronous game, method-1 extraction, seed 0, 10000 Monte-Carlo rounds.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct RunConfig {
    pub code: CodeSpec,
    pub m: usize,
    pub strategy: StrategySpec,
    pub variant: GameVariant,
    pub extract: ExtractSpec,
    pub seed: u64,
    /// Monte-Carlo rounds for `value`.
    pub rounds: u64,
    /// Output path for the report (and `.csv` sibling for sweeps); None = stdout only.
    pub out: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            code: CodeSpec::default(),
            m: 2,
            strategy: StrategySpec::default(),
            variant: GameVariant::default(),
            extract: ExtractSpec::default(),
            seed: 0,
            rounds: 10_000,
            out: None,
        }
    }
}

impl RunConfig {
    /// Parses a JSON config. In strict mode any unknown field is an error;
    /// otherwise unknown fields are ignored.
    pub fn from_json(text: &str, strict: bool) -> Result<Self, CliError> {
        let mut deserializer = serde_json::Deserializer::from_str(text);
        if strict {
            let mut unknown = Vec::new();
            let cfg: RunConfig =
                serde_ignored::deserialize(&mut deserializer, |path| {
                    unknown.push(path.to_string());
                })?;
            if !unknown.is_empty() {
                return Err(CliError::Config(format!(
                    "unknown fields in strict mode: {}",
                    unknown.join(", ")
                )));
            }
            cfg.validate()?;
            Ok(cfg)
        } else {
            let cfg: RunConfig = serde_json::from_str(text)?;
            cfg.validate()?;
            Ok(cfg)
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let c = &self.code;
        if c.q < 2 || c.q > 10_000 {
            return Err(CliError::Config(format!("q = {} out of range [2, 10000]", c.q)));
        }
        if c.n < 2 || c.n as u64 > c.q {
            return Err(CliError::Config(format!("n = {} must satisfy 2 ≤ n ≤ q", c.n)));
        }
        if c.s >= c.n {
            return Err(CliError::Config(format!("s = {} must satisfy s < n", c.s)));
        }
        if self.m == 0 {
            return Err(CliError::Config("m must be at least 1".into()));
        }
        if self.extract.method != 1 && self.extract.method != 2 {
            return Err(CliError::Config(format!(
                "extraction method must be 1 or 2, got {}",
                self.extract.method
            )));
        }
        match &self.strategy {
            StrategySpec::PointFlips { rate } | StrategySpec::SliceScramble { rate } => {
                if !(0.0..=1.0).contains(rate) {
                    return Err(CliError::Config(format!("rate = {rate} out of [0, 1]")));
                }
            }
            StrategySpec::Honest => {}
        }
        for r in &self.extract.sweep {
            if !(0.0..=1.0).contains(r) {
                return Err(CliError::Config(format!("sweep rate {r} out of [0, 1]")));
            }
        }
        Ok(())
    }

    fn pasting_config(&self) -> PastingConfig {
        PastingConfig {
            method: self.extract.method,
            k: self.extract.k,
            tol: self.extract.tol,
            tuple_budget: self.extract.tuple_budget,
            tuple_samples: self.extract.tuple_samples,
            seed: self.seed,
        }
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// One named check with its outcome and a short reading.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// γ table row: (m, γ_m = 1 − (d/n)^m).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaRow {
    pub m: usize,
    pub gamma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeInfo {
    pub q: u64,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub t: usize,
    pub size: u64,
    pub interpolable: bool,
    pub gamma_table: Vec<GammaRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValueInfo {
    pub exact: f64,
    pub monte_carlo: f64,
    pub monte_carlo_stderr: f64,
    pub rounds: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub rho: f64,
    pub eps: f64,
    pub delta: f64,
    pub eta: f64,
}

/// Schema-versioned run report. Identical config + seed gives identical JSON
/// apart from `elapsed_ms`.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub elapsed_ms: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code_info: Option<CodeInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub goodness: Option<GoodnessReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<ValueInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extraction: Option<ExtractionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<SweepRow>>,
    pub checks: Vec<CheckResult>,
}

impl Report {
    fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            version: REPORT_SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            config: config.clone(),
            elapsed_ms: 0,
            code_info: None,
            goodness: None,
            value: None,
            extraction: None,
            sweep: None,
            checks: Vec::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// JSON with the timing field zeroed — the deterministic payload.
    pub fn deterministic_json(&self) -> Result<String, CliError> {
        let mut clone = self.clone();
        clone.elapsed_ms = 0;
        Ok(serde_json::to_string_pretty(&clone)?)
    }
}

/// CSV for a sweep: header then one row per ρ grid point.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("rho,eps,delta,eta\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.rho, r.eps, r.delta, r.eta));
    }
    out
}

// ---------------------------------------------------------------------------
// Strategy construction
// ---------------------------------------------------------------------------

fn build_code(cfg: &RunConfig) -> Result<LinearCode, CliError> {
    Ok(make_reed_solomon(cfg.code.q, cfg.code.n, cfg.code.s, None)?)
}

fn planted_word(code: &LinearCode, m: usize, seed: u64) -> Result<TensorCodeword, CliError> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dim = code.k().pow(m as u32);
    let coeffs: Result<Vec<_>, _> = (0..dim)
        .map(|_| crate::galois::FieldElement::new(rng.gen_range(0..code.q()), code.q()))
        .collect();
    Ok(tensor_encode(code, m, &coeffs?)?)
}

/// Builds the configured strategy and also returns the planted codeword.
pub fn build_strategy(
    cfg: &RunConfig,
    code: &LinearCode,
    rate_override: Option<f64>,
) -> Result<(SynchronousStrategy, TensorCodeword), CliError> {
    let c = planted_word(code, cfg.m, cfg.seed)?;
    let classical = ClassicalStrategy::from_table(code.n(), cfg.m, code.q(), &c.table);
    let model = match (&cfg.strategy, rate_override) {
        (StrategySpec::Honest, None) => None,
        (StrategySpec::Honest, Some(r)) | (StrategySpec::PointFlips { .. }, Some(r)) => {
            Some(CorruptionModel::point_flips(r, cfg.seed + 1))
        }
        (StrategySpec::PointFlips { rate }, None) => {
            Some(CorruptionModel::point_flips(*rate, cfg.seed + 1))
        }
        (StrategySpec::SliceScramble { rate }, None) => Some(CorruptionModel {
            kind: crate::strategies::CorruptionKind::SliceScramble,
            rate: *rate,
            seed: cfg.seed + 1,
            rederive_pairs: true,
        }),
        (StrategySpec::SliceScramble { rate }, Some(r)) => Some(CorruptionModel {
            kind: crate::strategies::CorruptionKind::SliceScramble,
            rate: rate.max(r),
            seed: cfg.seed + 1,
            rederive_pairs: true,
        }),
    };
    let strategy = match model {
        None => honest_strategy(code, &c)?,
        Some(model) => {
            let corrupted = corrupt_classical(code, &classical, &model)?;
            embed_classical(code, &corrupted)?
        }
    };
    Ok((strategy, c))
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn finish(mut report: Report, started: std::time::Instant) -> Report {
    report.elapsed_ms = started.elapsed().as_millis();
    report
}

/// Code parameters, distance, interpolability, and the γ_m table.
pub fn cmd_code_info(cfg: &RunConfig) -> Result<Report, CliError> {
    let started = std::time::Instant::now();
    cfg.validate()?;
    let code = build_code(cfg)?;
    let mut report = Report::new("code-info", cfg);
    let gamma_table: Vec<GammaRow> = (1..=cfg.m.max(3))
        .map(|m| GammaRow {
            m,
            gamma: gamma(code.n(), code.d(), m),
        })
        .collect();
    report.code_info = Some(CodeInfo {
        q: code.q(),
        n: code.n(),
        k: code.k(),
        d: code.d(),
        t: code.t(),
        size: code.size(),
        interpolable: true,
        gamma_table,
    });
    report.checks.push(CheckResult {
        name: "singleton-distance".into(),
        pass: code.d() == code.n() - code.k() + 1,
        detail: format!("d = {} = n − k + 1", code.d()),
    });
    report.checks.push(CheckResult {
        name: "interpolation-threshold".into(),
        pass: code.t() == code.n() - code.d() + 1,
        detail: format!("t = {}", code.t()),
    });
    Ok(finish(report, started))
}

/// Exact and Monte-Carlo game value plus goodness readings.
pub fn cmd_value(cfg: &RunConfig) -> Result<Report, CliError> {
    let started = std::time::Instant::now();
    cfg.validate()?;
    let code = build_code(cfg)?;
    let (strategy, _) = build_strategy(cfg, &code, None)?;
    let game = match cfg.variant {
        GameVariant::Synchronous => build_game(&code, cfg.m)?,
        GameVariant::TwoProver => build_two_prover_game(&code, cfg.m)?,
    };
    let exact = evaluate_synchronous(&strategy, &game)?;
    let goodness = goodness_synchronous(&strategy, &game)?;
    let mc = monte_carlo_play(&strategy, &game, cfg.rounds, cfg.seed)?;
    let stderr = (mc.rate * (1.0 - mc.rate) / cfg.rounds as f64)
        .max(0.0)
        .sqrt();
    let mut report = Report::new("value", cfg);
    report.goodness = Some(goodness);
    report.value = Some(ValueInfo {
        exact,
        monte_carlo: mc.rate,
        monte_carlo_stderr: stderr,
        rounds: cfg.rounds,
    });
    report.checks.push(CheckResult {
        name: "monte-carlo-within-5-sigma".into(),
        pass: (mc.rate - exact).abs() <= 5.0 * stderr.max(1e-12) + 1e-12,
        detail: format!("exact {exact}, empirical {}", mc.rate),
    });
    Ok(finish(report, started))
}

/// Full extraction pipeline; with a sweep grid, one run per ρ and a CSV table.
pub fn cmd_extract(cfg: &RunConfig) -> Result<Report, CliError> {
    let started = std::time::Instant::now();
    cfg.validate()?;
    let code = build_code(cfg)?;
    let game = build_game(&code, cfg.m)?;
    let pasting = cfg.pasting_config();
    let mut report = Report::new("extract", cfg);

    if cfg.extract.sweep.is_empty() {
        let (strategy, _) = build_strategy(cfg, &code, None)?;
        let goodness = goodness_synchronous(&strategy, &game)?;
        let (_, extraction) = extract_global(&strategy, &code, &pasting)?;
        report.checks.push(CheckResult {
            name: "eta-within-unit-interval".into(),
            pass: (-1e-9..=1.0 + 1e-9).contains(&extraction.eta),
            detail: format!("η = {}", extraction.eta),
        });
        report.goodness = Some(goodness);
        report.extraction = Some(extraction);
    } else {
        let mut rows = Vec::new();
        for &rho in &cfg.extract.sweep {
            let (strategy, _) = build_strategy(cfg, &code, Some(rho))?;
            let goodness = goodness_synchronous(&strategy, &game)?;
            let (_, extraction) = extract_global(&strategy, &code, &pasting)?;
            rows.push(SweepRow {
                rho,
                eps: goodness.eps,
                delta: goodness.delta,
                eta: extraction.eta,
            });
        }
        let monotone = rows.windows(2).all(|w| w[1].eta >= w[0].eta - 1e-9);
        report.checks.push(CheckResult {
            name: "eta-nondecreasing-in-rho".into(),
            pass: monotone,
            detail: format!(
                "η grid: [{}]",
                rows.iter()
                    .map(|r| format!("{:.3e}", r.eta))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        });
        report.sweep = Some(rows);
    }
    Ok(finish(report, started))
}

/// Runs the whole invariant suite across modules and reports a pass/fail
/// matrix. Exit code handling (0 iff all pass) belongs to the binary.
pub fn cmd_verify(cfg: &RunConfig) -> Result<Report, CliError> {
    let started = std::time::Instant::now();
    cfg.validate()?;
    let code = build_code(cfg)?;
    let mut report = Report::new("verify", cfg);
    let mut push = |name: &str, pass: bool, detail: String| {
        report.checks.push(CheckResult {
            name: name.into(),
            pass,
            detail,
        });
    };

    // Code distance by brute force.
    let brute_d = code
        .enumerate_codewords()
        .iter()
        .filter(|w| w.values.iter().any(|v| v.value() != 0))
        .map(|w| w.values.iter().filter(|v| v.value() != 0).count())
        .min()
        .unwrap_or(code.n());
    push(
        "code-distance-brute-force",
        brute_d == code.d(),
        format!("min weight {brute_d}, claimed d {}", code.d()),
    );

    // Interpolation uniqueness on seeded samples.
    {
        use rand::seq::SliceRandom;
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xC0DE);
        let words = code.enumerate_codewords();
        let mut ok = true;
        for _ in 0..50 {
            let mut coords: Vec<usize> = (0..code.n()).collect();
            coords.shuffle(&mut rng);
            coords.truncate(code.t());
            let vals: Vec<u64> = (0..code.t()).map(|_| rng.gen_range(0..code.q())).collect();
            let matches = words
                .iter()
                .filter(|w| {
                    coords
                        .iter()
                        .zip(&vals)
                        .all(|(&c, &v)| w.at(c).value() == v)
                })
                .count();
            if matches != 1 {
                ok = false;
            }
        }
        push(
            "interpolation-uniqueness",
            ok,
            "50 seeded (coords, values) samples, one matching codeword each".into(),
        );
    }

    // Spectral gap of the axis graph at a desk-scale pair.
    {
        let g = crate::spectral::axis_graph(code.n().min(3), 2).map_err(|e| {
            CliError::Config(format!("axis graph: {e}"))
        })?;
        let n = code.n().min(3) as f64;
        let expect = 1.0 / (2.0 * n * n);
        let l2 = g.lambda2();
        push(
            "axis-graph-spectral-gap",
            (l2 - expect).abs() < 1e-9,
            format!("λ₂ = {l2}, expected {expect}"),
        );
    }

    // Orthogonalization rounding bound on seeded near-projective inputs.
    {
        use rand::SeedableRng;
        let mut ok = true;
        let mut worst = 0.0f64;
        for i in 0..20u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed * 131 + i);
            let _ = &mut rng;
            let sub =
                crate::opalg::random_submeasurement(4, 3, cfg.seed * 131 + i, 0.02).unwrap();
            match crate::opalg::orthogonalize(&sub) {
                Ok((_, rep)) => {
                    worst = worst.max(rep.distance - rep.bound);
                    if rep.distance > rep.bound + 1e-12 {
                        ok = false;
                    }
                }
                Err(_) => ok = false,
            }
        }
        push(
            "orthogonalization-rounding-bound",
            ok,
            format!("worst distance−bound margin {worst:.3e}"),
        );
    }

    // Honest completeness and extraction fixed point.
    {
        let honest_cfg = RunConfig {
            strategy: StrategySpec::Honest,
            ..cfg.clone()
        };
        let (strategy, _) = build_strategy(&honest_cfg, &code, None)?;
        let game = build_game(&code, cfg.m)?;
        let v = evaluate_synchronous(&strategy, &game)?;
        push(
            "honest-value-one",
            (v - 1.0).abs() < 1e-10,
            format!("value {v}"),
        );
        let (_, extraction) = extract_global(&strategy, &code, &cfg.pasting_config())?;
        push(
            "honest-extraction-eta-zero",
            extraction.eta <= 1e-8,
            format!("η = {}", extraction.eta),
        );
        let comm = commutator_report(&strategy, &code)?;
        push(
            "honest-commutators-vanish",
            comm.measured < 1e-10 && comm.ok,
            format!("commutator {:.3e}", comm.measured),
        );
    }

    Ok(finish(report, started))
}

/// Renders the pass/fail matrix for terminal output.
pub fn render_checks(report: &Report) -> String {
    let mut out = String::new();
    for c in &report.checks {
        out.push_str(&format!(
            "[{}] {} — {}\n",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        ));
    }
    out
}
