//! Command-line interface. `run` is the whole program minus process exit, so
//! tests can drive it in-process.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use rolescore_core::{
    generate, impact, validate, CapTable, Cohort, CohortError, CohortRun, RoleProfile, RunRecord,
    ScoreError, SynthSpec, VarianceKind,
};

use crate::caps::load_caps;
use crate::profiles::{parse_profile, ProfileFileError, ProfileRegistry};
use crate::render;
use crate::results::{load_path, write_results, LoadError};
use crate::service::{self, Store, DEFAULT_PORT};
use crate::views::{
    dimensions_view, leaderboards, rdi_rows, score_runs, to_json, DimensionsView, ImpactOutput,
    ScoreOutput,
};

pub const PROFILE_DIR_ENV: &str = "ROLESCORE_PROFILE_DIR";

#[derive(Debug, Parser)]
#[command(name = "rolescore", version, about = "Role-weighted decision scoring for vulnerability-detection benchmark runs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Markdown,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Inputs {
    /// Result file or directory of `*.jsonl` files; repeatable.
    #[arg(long, required = true)]
    pub results: Vec<PathBuf>,
    /// Profile name or YAML path; repeatable. Defaults to the built-ins.
    #[arg(long)]
    pub profile: Vec<String>,
    /// JSON caps override file.
    #[arg(long)]
    pub caps: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decision Score report per (run, profile).
    Score {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        output: Output,
    },
    /// Raw and normalized values of all 35 dimensions.
    Dimensions {
        #[arg(long, required = true)]
        results: Vec<PathBuf>,
        #[arg(long)]
        caps: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Benchmark-percentage and per-role rankings.
    Leaderboard {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        output: Output,
    },
    /// Role Divergence Index per run.
    Rdi {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        output: Output,
    },
    /// Weight times cross-run variance per dimension.
    Impact {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        output: Output,
    },
    /// Check a profile document against the publishing rules.
    ValidateProfile {
        path: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Generate a synthetic run from a JSON spec.
    Synth {
        spec: PathBuf,
        /// Overrides the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Serve the what-if HTTP API over a directory of runs.
    Serve {
        #[arg(long)]
        results: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PORT)]
        port: u16,
        /// Extra profiles to register.
        #[arg(long)]
        profile: Vec<String>,
        #[arg(long)]
        caps: Option<PathBuf>,
    },
}

/// Failure classes, one per exit code.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Degenerate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Degenerate(_) => 3,
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Io { .. } => CliError::Io(e.to_string()),
            LoadError::Parse { .. } => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ProfileFileError> for CliError {
    fn from(e: ProfileFileError) -> Self {
        match e {
            ProfileFileError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ScoreError> for CliError {
    fn from(e: ScoreError) -> Self {
        match e {
            ScoreError::NoAvailableDimensions { .. } => CliError::Degenerate(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<CohortError> for CliError {
    fn from(e: CohortError) -> Self {
        match e {
            CohortError::Score(s) => s.into(),
            CohortError::EmptyCohort => CliError::Degenerate(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

/// Parses `args` (program name first), runs the command, and returns the
/// exit code. Reports go to `stdout` unless `--out` is given; diagnostics go
/// to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
            } else {
                let _ = stdout.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Score { inputs, output } => {
            let (cohort, profiles, caps) = prepare(&inputs)?;
            let reports = score_runs(cohort.runs(), &profiles, &caps)?;
            emit(&output, stdout, || to_json(&ScoreOutput { reports: reports.clone() }), || {
                render::reports(&reports)
            })?;
        }
        Command::Dimensions {
            results,
            caps,
            output,
        } => {
            let runs = load_runs(&results)?;
            let caps = load_caps_opt(caps.as_deref())?;
            let views = runs
                .into_iter()
                .map(|r| dimensions_view(&CohortRun::new(r), &caps))
                .collect::<Result<Vec<DimensionsView>, _>>()
                .map_err(ScoreError::from)?;
            emit(&output, stdout, || to_json(&views), || render::dimensions(&views))?;
        }
        Command::Leaderboard { inputs, output } => {
            let (cohort, profiles, caps) = prepare(&inputs)?;
            let board = leaderboards(&cohort, &profiles, &caps)?;
            emit(&output, stdout, || to_json(&board), || render::leaderboard(&board))?;
        }
        Command::Rdi { inputs, output } => {
            let (cohort, profiles, caps) = prepare(&inputs)?;
            cohort.layer()?;
            let rows = rdi_rows(&cohort, &profiles, &caps)?;
            emit(&output, stdout, || to_json(&rows), || render::rdi(&rows))?;
        }
        Command::Impact { inputs, output } => {
            let (cohort, profiles, caps) = prepare(&inputs)?;
            cohort.layer()?;
            let analyses = profiles
                .iter()
                .map(|p| impact(&cohort, p, &caps, VarianceKind::Population))
                .collect::<Result<Vec<_>, _>>()?;
            let out = ImpactOutput { analyses };
            emit(&output, stdout, || to_json(&out), || render::impact(&out.analyses))?;
        }
        Command::ValidateProfile { path, output } => {
            let text = fs::read_to_string(&path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let profile = parse_profile(&text)
                .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
            let violations = validate(&profile);
            let shown = path.display().to_string();
            let report = serde_json::json!({
                "path": shown,
                "valid": violations.is_empty(),
                "violations": violations,
            });
            emit(&output, stdout, || to_json(&report), || {
                render::validation(&shown, &violations)
            })?;
            if !violations.is_empty() {
                for v in &violations {
                    let _ = writeln!(stderr, "{shown}: {v}");
                }
                return Ok(2);
            }
        }
        Command::Synth { spec, seed, output } => {
            let text = fs::read_to_string(&spec)
                .map_err(|e| CliError::Io(format!("{}: {e}", spec.display())))?;
            let mut spec_value: SynthSpec = serde_json::from_str(&text)
                .map_err(|e| CliError::Validation(format!("{}: {e}", spec.display())))?;
            if let Some(seed) = seed {
                spec_value.seed = seed;
            }
            let run = generate(&spec_value).map_err(|e| CliError::Validation(e.to_string()))?;
            emit(&output, stdout, || write_results(&run), || render::synth_summary(&run))?;
        }
        Command::Serve {
            results,
            port,
            profile,
            caps,
        } => {
            let runs = load_runs(&[results])?;
            let mut registry = registry()?;
            for reference in &profile {
                let p = registry.resolve(reference)?;
                if registry.get(&p.name) != Some(&p) {
                    registry.insert(p, crate::profiles::ProfileSource::File, false)?;
                }
            }
            let caps = load_caps_opt(caps.as_deref())?;
            let n = runs.len();
            let store = Store::new(runs, registry, caps)?;
            let _ = writeln!(stderr, "serving {n} run(s) on port {port}");
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
            rt.block_on(service::serve(store, port))
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(0)
}

/// Built-ins plus every profile under `ROLESCORE_PROFILE_DIR`.
fn registry() -> Result<ProfileRegistry, CliError> {
    let mut registry = ProfileRegistry::default();
    if let Some(dirs) = std::env::var_os(PROFILE_DIR_ENV) {
        for dir in std::env::split_paths(&dirs) {
            if !dir.as_os_str().is_empty() {
                registry.load_dir(&dir)?;
            }
        }
    }
    Ok(registry)
}

fn load_runs(paths: &[PathBuf]) -> Result<Vec<RunRecord>, CliError> {
    let mut runs = Vec::new();
    for p in paths {
        runs.extend(load_path(p)?);
    }
    if runs.is_empty() {
        return Err(CliError::Degenerate("no result files found".into()));
    }
    Ok(runs)
}

fn load_caps_opt(path: Option<&Path>) -> Result<CapTable, CliError> {
    let Some(path) = path else {
        return Ok(CapTable::default());
    };
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    load_caps(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn prepare(inputs: &Inputs) -> Result<(Cohort, Vec<RoleProfile>, CapTable), CliError> {
    let registry = registry()?;
    let profiles = if inputs.profile.is_empty() {
        registry.builtins()
    } else {
        inputs
            .profile
            .iter()
            .map(|r| registry.resolve(r))
            .collect::<Result<Vec<_>, _>>()?
    };
    let caps = load_caps_opt(inputs.caps.as_deref())?;
    let cohort = Cohort::new(load_runs(&inputs.results)?)?;
    Ok((cohort, profiles, caps))
}

fn emit(
    output: &Output,
    stdout: &mut dyn Write,
    json: impl FnOnce() -> String,
    markdown: impl FnOnce() -> String,
) -> Result<(), CliError> {
    let text = match output.format {
        OutputFormat::Json => json(),
        OutputFormat::Markdown => markdown(),
    };
    match &output.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}
