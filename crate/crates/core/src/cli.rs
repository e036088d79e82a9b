//! Command-line harness: dataset audits, dataset generation, mechanism design
//! runs, robust estimation runs and Monte-Carlo replication.
//!
//! Exit codes: `0` success or consistent, `1` semantic negative (dataset
//! inconsistent, run not converged or not certified), `2` error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dro::{exchange_loop, two_good_instance, DroConfig, DroResult, PsiBox, TwoGoodConfig};
use crate::error::{invalid, Error, Result};
use crate::game::{collect_dataset, river_probes, NashOptions, RiverPollutionGame};
use crate::io::write_dataset;
use crate::rng;
use crate::rp::{ccei_scalar, garp_f_threshold, mm_garp, pareto_gap};
use crate::spsa::{run_mechanism_design, uniform_start, RiverLoss, SpsaConfig, SpsaTrace};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RpSection {
    pub alpha: f64,
    pub tol_r: f64,
    pub tol_e: f64,
}

impl Default for RpSection {
    fn default() -> Self {
        Self { alpha: crate::ALPHA, tol_r: crate::TOL_R, tol_e: 1e-4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GameSection {
    pub d1: f64,
    pub delta: [[f64; 2]; 3],
    pub cap: f64,
    /// Mechanism parameter; `None` draws `θ₁ ~ U[0, 0.5]⁷` from the seed.
    pub theta0: Option<Vec<f64>>,
    pub jitter: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub seed: u64,
}

impl Default for GameSection {
    fn default() -> Self {
        Self {
            d1: 3.0,
            delta: RiverPollutionGame::DEFAULT_DELTA,
            cap: 100.0,
            theta0: None,
            jitter: 0.0,
            n: 1,
            t: 10,
            seed: 0,
        }
    }
}

impl GameSection {
    pub fn theta(&self, seed: u64) -> Vec<f64> {
        self.theta0.clone().unwrap_or_else(|| uniform_start(7, 0.0, 0.5, rng::split(seed, 7)))
    }

    pub fn game(&self, theta: Vec<f64>) -> Result<RiverPollutionGame> {
        RiverPollutionGame::new(self.d1, self.delta, self.cap, theta)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DroSection {
    pub epsilons: Vec<f64>,
    pub delta: f64,
    pub instance: TwoGoodConfig,
    pub exchange: DroConfig,
}

impl Default for DroSection {
    fn default() -> Self {
        Self {
            epsilons: vec![0.001, 1.0, 10.0],
            delta: 0.1,
            instance: TwoGoodConfig::default(),
            // λ ≥ 1 for this instance: the standard box scaled by 10.
            exchange: DroConfig { psi_box: PsiBox::standard(0.1).scaled(10.0), ..DroConfig::default() },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloSection {
    pub replications: usize,
    pub base_seed: u64,
    /// Worker threads; `0` lets the runtime decide.
    pub parallelism: usize,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        Self { replications: 200, base_seed: 0, parallelism: 0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub rp: RpSection,
    pub game: GameSection,
    pub spsa: SpsaConfig,
    pub dro: DroSection,
    pub monte_carlo: MonteCarloSection,
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rp.alpha > 0.0 && self.rp.tol_r > 0.0 && self.rp.tol_e > 0.0 && self.rp.tol_e < 1.0) {
            return invalid("rp: need alpha > 0, tol_r > 0, 0 < tol_e < 1");
        }
        if self.game.n == 0 || self.game.t == 0 || !(self.game.jitter >= 0.0) {
            return invalid("game: need N ≥ 1, T ≥ 1, jitter ≥ 0");
        }
        if let Some(th) = &self.game.theta0 {
            if th.len() != 7 {
                return invalid("game.theta0 must have 7 components");
            }
        }
        self.spsa.validate()?;
        if self.spsa.dim() != 7 {
            return invalid("spsa.theta_box must have 7 components for the river game");
        }
        if !(self.dro.delta > 0.0) || self.dro.epsilons.iter().any(|e| !(*e >= 0.0)) {
            return invalid("dro: need delta > 0 and nonnegative epsilons");
        }
        self.dro.exchange.psi_box.validate()?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Git-style content hash: SHA-256 of `"blob <len>\0" ++ bytes`.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

/// Run manifest; contains no timestamps so re-runs are byte-identical.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: ExperimentConfig,
    /// `(path, content hash)` of every input file.
    pub inputs: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str, seed: u64, config: &ExperimentConfig, inputs: Vec<(String, String)>) -> Self {
        let canon = serde_json::to_string(config).expect("config serializes");
        Self {
            command: command.into(),
            seed,
            config_hash: content_hash(canon.as_bytes()),
            config: config.clone(),
            inputs,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "pareto-forge", version, about = "Revealed-preference audits and adaptive mechanism design")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Experiment configuration (JSON). Defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides every seed in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Overrides the gap tolerance (`rp.tol_r` and `spsa.stop_tol`).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Test a dataset file for consistency with social optimality.
    Audit {
        dataset: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Collect a dataset from the river game at `game.theta0`.
    Generate {
        #[command(flatten)]
        common: Common,
    },
    /// Tune the river game's mechanism parameter.
    Spsa {
        #[command(flatten)]
        common: Common,
    },
    /// Robust gap estimation on the two-good linear-budget instance.
    Dro {
        #[command(flatten)]
        common: Common,
    },
    /// Monte-Carlo replication of `spsa` or `dro`.
    Mc {
        #[arg(value_enum)]
        experiment: Experiment,
        #[arg(long)]
        replications: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Spsa,
    Dro,
}

struct Prepared {
    cfg: ExperimentConfig,
    out: PathBuf,
    seed: u64,
    inputs: Vec<(String, String)>,
}

fn prepare(c: &Common) -> Result<Prepared> {
    let mut inputs = Vec::new();
    let mut cfg = match &c.config {
        Some(p) => {
            let text = fs::read_to_string(p)?;
            inputs.push((p.display().to_string(), content_hash(text.as_bytes())));
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.game.seed = s;
        cfg.spsa.seed = s;
        cfg.dro.instance.seed = s;
        cfg.dro.exchange.seed = s;
        cfg.monte_carlo.base_seed = s;
    }
    if let Some(t) = c.tol {
        if !(t > 0.0) {
            return invalid("--tol must be positive");
        }
        cfg.rp.tol_r = t;
        cfg.spsa.stop_tol = t;
        cfg.spsa.tol_r = t;
    }
    if let Some(m) = c.max_iters {
        cfg.spsa.max_iters = m;
        cfg.dro.exchange.max_iters = m;
    }
    let out = c.out_dir.clone().or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out)?;
    let seed = c.seed.unwrap_or(cfg.game.seed);
    Ok(Prepared { cfg, out, seed, inputs })
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

/// Audit report for one dataset.
#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub mm_garp: bool,
    pub pareto_gap: f64,
    pub per_agent_gaps: Vec<f64>,
    pub garp_f_threshold: f64,
    pub ccei: Vec<f64>,
    pub certificate: crate::model::ParetoCertificate,
    pub consistent: bool,
}

pub fn audit(d: &crate::model::RpDataset, rp: &RpSection) -> Result<AuditReport> {
    let gap = pareto_gap(d, rp.alpha, rp.tol_r)?;
    Ok(AuditReport {
        mm_garp: mm_garp(d),
        pareto_gap: gap.gap,
        per_agent_gaps: gap.per_agent_gaps.clone(),
        garp_f_threshold: garp_f_threshold(d, rp.tol_r),
        ccei: (0..d.agents()).map(|i| ccei_scalar(d, i, rp.tol_e)).collect(),
        consistent: gap.gap <= rp.tol_r,
        certificate: gap.certificate,
    })
}

/// River-game dataset at the configured (or seed-drawn) mechanism parameter.
pub fn generate(cfg: &ExperimentConfig) -> Result<crate::model::RpDataset> {
    let g = &cfg.game;
    let game = g.game(g.theta(g.seed))?;
    let probes = river_probes(&game, g.t, rng::split(g.seed, 1));
    collect_dataset(&game, &probes, g.n, g.jitter, rng::split(g.seed, 2), &NashOptions::default())
}

fn river_loss(cfg: &ExperimentConfig) -> Result<RiverLoss> {
    Ok(RiverLoss {
        base: cfg.game.game(vec![0.0; 7])?,
        periods: cfg.spsa.t_periods,
        samples: cfg.game.n,
        jitter: cfg.game.jitter,
        alpha: cfg.spsa.alpha,
        tol_r: cfg.spsa.tol_r,
        nash: NashOptions::default(),
    })
}

/// One mechanism-design run; `θ₁` comes from `game.theta0` or is drawn from
/// the SPSA seed.
pub fn spsa_run(cfg: &ExperimentConfig, sink: Option<&mut dyn FnMut(&crate::spsa::TraceRecord)>) -> Result<SpsaTrace> {
    let theta1 = cfg.game.theta(cfg.spsa.seed);
    run_mechanism_design(&river_loss(cfg)?, &theta1, &cfg.spsa, sink)
}

/// One robust-estimation run per radius on a freshly drawn instance.
pub fn dro_run(cfg: &ExperimentConfig) -> Result<Vec<(f64, DroResult)>> {
    let d = two_good_instance(&cfg.dro.instance)?;
    cfg.dro.epsilons.iter().map(|&eps| Ok((eps, exchange_loop(&d, eps, cfg.dro.delta, &cfg.dro.exchange)?))).collect()
}

fn eps_tag(eps: f64) -> String {
    format!("{eps}").replace('.', "p")
}

fn cmd_audit(path: &Path, c: &Common) -> Result<i32> {
    let p = prepare(c)?;
    let text = fs::read_to_string(path)?;
    let d = crate::io::dataset_from_json(&text)?;
    let report = audit(&d, &p.cfg.rp)?;
    write_json(&p.out.join("audit.json"), &report)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    let mut inputs = p.inputs;
    inputs.push((path.display().to_string(), content_hash(text.as_bytes())));
    write_json(&p.out.join("manifest.json"), &Manifest::new("audit", p.seed, &p.cfg, inputs))?;
    Ok(if report.consistent { EXIT_OK } else { EXIT_NEGATIVE })
}

fn cmd_generate(c: &Common) -> Result<i32> {
    let p = prepare(c)?;
    let d = generate(&p.cfg)?;
    write_dataset(&p.out.join("dataset.json"), &d)?;
    write_json(&p.out.join("manifest.json"), &Manifest::new("generate", p.cfg.game.seed, &p.cfg, p.inputs))?;
    Ok(EXIT_OK)
}

fn cmd_spsa(c: &Common) -> Result<i32> {
    let p = prepare(c)?;
    write_json(&p.out.join("manifest.json"), &Manifest::new("spsa", p.cfg.spsa.seed, &p.cfg, p.inputs.clone()))?;
    let csv_path = p.out.join("trace.csv");
    fs::write(&csv_path, format!("{}\n", SpsaTrace::csv_header(7)))?;
    if p.cfg.spsa.max_iters == 0 {
        return Ok(EXIT_OK);
    }
    let mut file = fs::OpenOptions::new().append(true).open(&csv_path)?;
    let mut io_err = None;
    let mut sink = |r: &crate::spsa::TraceRecord| {
        use std::io::Write;
        if let Err(e) = writeln!(file, "{}", SpsaTrace::csv_row(r)) {
            io_err.get_or_insert(e);
        }
    };
    let trace = spsa_run(&p.cfg, Some(&mut sink))?;
    if let Some(e) = io_err {
        return Err(e.into());
    }
    eprintln!(
        "spsa: {} iterations, final loss {:.3e}, converged = {}",
        trace.records.len(),
        trace.final_loss().unwrap_or(f64::NAN),
        trace.converged
    );
    Ok(if trace.converged { EXIT_OK } else { EXIT_NEGATIVE })
}

fn cmd_dro(c: &Common) -> Result<i32> {
    let p = prepare(c)?;
    write_json(&p.out.join("manifest.json"), &Manifest::new("dro", p.cfg.dro.exchange.seed, &p.cfg, p.inputs.clone()))?;
    let runs = dro_run(&p.cfg)?;
    let mut summary = Vec::new();
    for (eps, r) in &runs {
        fs::write(p.out.join(format!("dro_trace_eps{}.csv", eps_tag(*eps))), r.trace_csv())?;
        let mut s = r.summary_json();
        s["epsilon"] = serde_json::json!(eps);
        summary.push(s);
        eprintln!(
            "dro: eps = {eps}: {} iterations, certified = {}, robust gap {:.4}",
            r.iterations, r.certified, r.robust_gap
        );
    }
    write_json(&p.out.join("dro_result.json"), &summary)?;
    Ok(if runs.iter().all(|(_, r)| r.certified) { EXIT_OK } else { EXIT_NEGATIVE })
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

/// Per-iteration `n,mean_loss,std_loss,converged_fraction`; runs that stop
/// early carry their last loss forward.
pub fn spsa_mc_summary(traces: &[SpsaTrace], max_iters: usize) -> String {
    let mut s = String::from("n,mean_loss,std_loss,converged_fraction\n");
    for n in 1..=max_iters {
        let losses: Vec<f64> =
            traces.iter().filter_map(|t| t.records.get(n - 1).or(t.records.last()).map(|r| r.loss)).collect();
        if losses.is_empty() {
            break;
        }
        let done = traces.iter().filter(|t| t.converged && t.records.len() <= n).count();
        let (m, sd) = mean_std(&losses);
        s.push_str(&format!("{n},{m},{sd},{}\n", done as f64 / traces.len() as f64));
    }
    s
}

fn replicate<T: Send>(reps: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..reps).into_par_iter().map(f).collect()
}

fn cmd_mc(exp: Experiment, replications: Option<usize>, c: &Common) -> Result<i32> {
    let mut p = prepare(c)?;
    if let Some(r) = replications {
        p.cfg.monte_carlo.replications = r;
    }
    let mc = p.cfg.monte_carlo.clone();
    let name = match exp {
        Experiment::Spsa => "mc-spsa",
        Experiment::Dro => "mc-dro",
    };
    write_json(&p.out.join("manifest.json"), &Manifest::new(name, mc.base_seed, &p.cfg, p.inputs.clone()))?;
    let run = || -> Result<i32> {
        match exp {
            Experiment::Spsa => {
                let traces = replicate(mc.replications, |r| {
                    let mut cfg = p.cfg.clone();
                    cfg.spsa.seed = rng::split(mc.base_seed, r as u64);
                    spsa_run(&cfg, None)
                })?;
                fs::write(p.out.join("mc_spsa.csv"), spsa_mc_summary(&traces, p.cfg.spsa.max_iters))?;
                let hit = traces.iter().filter(|t| t.converged).count();
                eprintln!("mc spsa: {hit}/{} replications reached the stopping tolerance", traces.len());
                Ok(EXIT_OK)
            }
            Experiment::Dro => {
                let runs = replicate(mc.replications, |r| {
                    let mut cfg = p.cfg.clone();
                    let s = rng::split(mc.base_seed, r as u64);
                    cfg.dro.instance.seed = s;
                    cfg.dro.exchange.seed = rng::split(s, 1);
                    dro_run(&cfg)
                })?;
                let mut out =
                    String::from("epsilon,mean_iterations,std_iterations,certified_fraction,mean_robust_gap\n");
                for (j, eps) in p.cfg.dro.epsilons.iter().enumerate() {
                    let its: Vec<f64> = runs.iter().map(|r| r[j].1.iterations as f64).collect();
                    let cert = runs.iter().filter(|r| r[j].1.certified).count() as f64 / runs.len().max(1) as f64;
                    let gaps: Vec<f64> = runs.iter().map(|r| r[j].1.robust_gap).collect();
                    let (m, sd) = mean_std(&its);
                    out.push_str(&format!("{eps},{m},{sd},{cert},{}\n", mean_std(&gaps).0));
                }
                fs::write(p.out.join("mc_dro.csv"), &out)?;
                eprint!("{out}");
                Ok(EXIT_OK)
            }
        }
    };
    if mc.parallelism > 0 && std::env::var_os("PARETO_FORGE_THREADS").is_none() {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(mc.parallelism)
            .build()
            .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
        pool.install(run)
    } else {
        run()
    }
}

/// Configures the global thread pool from `PARETO_FORGE_THREADS`.
pub fn init_threads() -> Result<()> {
    if let Some(v) = std::env::var_os("PARETO_FORGE_THREADS") {
        let n: usize = v
            .to_str()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Invalid("PARETO_FORGE_THREADS must be a positive integer".into()))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    }
    Ok(())
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let res = init_threads().and_then(|_| match &cli.command {
        Command::Audit { dataset, common } => cmd_audit(dataset, common),
        Command::Generate { common } => cmd_generate(common),
        Command::Spsa { common } => cmd_spsa(common),
        Command::Dro { common } => cmd_dro(common),
        Command::Mc { experiment, replications, common } => cmd_mc(*experiment, *replications, common),
    });
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
