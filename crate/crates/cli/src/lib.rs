//! Command-line front end for the `toda-atlas` library.
//!
//! Every subcommand writes its artifacts under the output directory
//! (`--out`, else `TODA_ATLAS_OUT`, else `out`). Exit codes: 0 on success,
//! 1 when a verification check fails, 2 on input errors.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use toda_atlas::analysis::{verify_suite, CheckReport, Suite};
use toda_atlas::atlas::{chart_forward, chart_inverse, h_conjugate, ChartCoords, FlagPoint};
use toda_atlas::factorizations::{
    chevalley_test, f_inverse, f_map, gs_embed, kan_factorize, phi, phi_sigma, phi_sigma_inverse,
    unbar_factorize,
};
use toda_atlas::flows::{integrate, integrate_backward, Diagnostics, Field, IntegratorConfig};
use toda_atlas::weyl::{inversion_sets, strictly_lower_pairs, InversionSets};
use toda_atlas::{sampling, Permutation, Profile, Spectrum, SquareMatrix};

#[derive(Debug, Parser)]
#[command(
    name = "toda-atlas",
    version,
    about = "Charts on real flag manifolds and the Toda flow"
)]
pub struct RunConfig {
    /// Output directory
    #[arg(long, global = true, env = "TODA_ATLAS_OUT", default_value = "out")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Factor a matrix read from JSON
    Factorize(FactorizeArgs),
    /// Chart coordinates of a flag point, or the point with given coordinates
    Chart(ChartArgs),
    /// Integrate the Toda or symmetrization flow
    Flow(FlowArgs),
    /// Run a verification suite
    Verify(VerifyArgs),
    /// Stable and unstable coordinate pairs of a chart
    Cells(CellsArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FactorKind {
    /// g = k·a·n (orthogonal, positive diagonal, unit upper)
    Kan,
    /// k = u·n̄·m for special orthogonal k
    Unbar,
    /// big-cell membership of a special orthogonal matrix
    Chevalley,
    /// Gram-Schmidt embedding of a unit lower matrix
    Gs,
    /// unit lower factor of a special orthogonal matrix in the big cell
    F,
    /// special orthogonal matrix with a given unit lower factor
    FInverse,
    /// the map Φ(σ) on L(σ⁻¹) (σ = identity unless --sigma is given)
    Phi,
    /// inverse of Φ(σ)
    PhiInverse,
}

impl FactorKind {
    fn name(self) -> &'static str {
        match self {
            FactorKind::Kan => "kan",
            FactorKind::Unbar => "unbar",
            FactorKind::Chevalley => "chevalley",
            FactorKind::Gs => "gs",
            FactorKind::F => "f",
            FactorKind::FInverse => "f-inverse",
            FactorKind::Phi => "phi",
            FactorKind::PhiInverse => "phi-inverse",
        }
    }
}

#[derive(Debug, Args)]
pub struct FactorizeArgs {
    /// Matrix JSON `{"n": .., "entries": [[..], ..]}`
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "kan")]
    pub kind: FactorKind,
    /// Permutation in one-line notation, e.g. "2 1 3"
    #[arg(long)]
    pub sigma: Option<String>,
}

#[derive(Debug, Args)]
#[command(group = ArgGroup::new("source").required(true).multiple(false))]
pub struct ChartArgs {
    /// Chart index in one-line notation, e.g. "2 1 3"
    #[arg(long)]
    pub w: Option<String>,
    /// Flag point JSON `{"y": matrix, "h": [..]}`; writes chart_coords.json
    #[arg(long, group = "source")]
    pub point: Option<PathBuf>,
    /// Chart coordinates JSON; writes chart_point.json
    #[arg(long, group = "source")]
    pub coords: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Toda,
    Sym,
}

impl From<FieldArg> for Field {
    fn from(f: FieldArg) -> Field {
        match f {
            FieldArg::Toda => Field::Toda,
            FieldArg::Sym => Field::Sym,
        }
    }
}

#[derive(Debug, Args)]
#[command(group = ArgGroup::new("start").required(true).multiple(false))]
pub struct FlowArgs {
    #[arg(long, value_enum)]
    pub field: FieldArg,
    /// Initial matrix JSON
    #[arg(long, group = "start")]
    pub x0: Option<PathBuf>,
    /// Start from a random symmetric matrix with this spectrum, e.g. "3,1,-1,-3"
    #[arg(long, allow_hyphen_values = true, group = "start")]
    pub h: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,
    #[arg(long, default_value_t = 1.0)]
    pub max_step: f64,
    /// Stop once the field norm drops below this
    #[arg(long, default_value_t = 1e-10)]
    pub stop_field: f64,
    /// Integrate the negated field
    #[arg(long)]
    pub backward: bool,
    /// Profile JSON; the diagnostics then report the largest forbidden entry
    #[arg(long)]
    pub profile: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "all", value_parser = parse_suite)]
    pub suite: Suite,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CellsArgs {
    /// Chart index in one-line notation, e.g. "2 1 3"
    #[arg(long)]
    pub w: String,
    /// Spectrum, e.g. "2,0,-2"; adds H^w to the output
    #[arg(long, allow_hyphen_values = true)]
    pub h: Option<String>,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse::<Suite>().map_err(|e| e.to_string())
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{failed} of {total} checks failed")]
    Checks {
        failed: usize,
        total: usize,
        output: Output,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Checks { .. } => 1,
        }
    }
}

impl From<toda_atlas::Error> for CliError {
    fn from(e: toda_atlas::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

/// Result of a successful run: the files written and lines for stdout.
#[derive(Debug, Default)]
pub struct Output {
    pub files: Vec<PathBuf>,
    pub lines: Vec<String>,
}

/// Executes one subcommand. On a failed verification the reports are
/// still written before `CliError::Checks` is returned.
pub fn run(config: &RunConfig) -> Result<Output, CliError> {
    let mut out = Output::default();
    match &config.command {
        Command::Factorize(a) => factorize(a, &config.out, &mut out)?,
        Command::Chart(a) => chart(a, &config.out, &mut out)?,
        Command::Flow(a) => flow(a, &config.out, &mut out)?,
        Command::Verify(a) => return verify(a, &config.out, out),
        Command::Cells(a) => cells(a, &config.out, &mut out)?,
    }
    Ok(out)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_file(dir: &Path, name: &str, contents: &str, out: &mut Output) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    out.files.push(path);
    Ok(())
}

fn write_json<T: Serialize>(
    dir: &Path,
    name: &str,
    value: &T,
    out: &mut Output,
) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    write_file(dir, name, &text, out)
}

fn parse_permutation(text: &str) -> Result<Permutation, CliError> {
    Permutation::parse(text).map_err(|e| CliError::Input(format!("--w/--sigma {text:?}: {e}")))
}

fn parse_spectrum(text: &str) -> Result<Spectrum, CliError> {
    Spectrum::parse_csv(text).map_err(|e| CliError::Input(format!("--h {text:?}: {e}")))
}

fn factorize(a: &FactorizeArgs, dir: &Path, out: &mut Output) -> Result<(), CliError> {
    let m: SquareMatrix = read_json(&a.input)?;
    let sigma = match &a.sigma {
        Some(s) => parse_permutation(s)?,
        None => Permutation::identity(m.n()),
    };
    if sigma.n() != m.n() {
        return Err(CliError::Input(format!(
            "--sigma has {} letters but the matrix is {}x{}",
            sigma.n(),
            m.n(),
            m.n()
        )));
    }
    let body = match a.kind {
        FactorKind::Kan => {
            let f = kan_factorize(&m)?;
            json!({ "residual": f.product().dist(&m), "factors": f })
        }
        FactorKind::Unbar => {
            let f = unbar_factorize(&m)?;
            json!({ "residual": f.product().dist(&m), "m_is_identity": f.m_is_identity(), "factors": f })
        }
        FactorKind::Chevalley => json!({ "class": chevalley_test(&m)? }),
        FactorKind::Gs => json!({ "result": gs_embed(&m)? }),
        FactorKind::F => json!({ "result": f_map(&m)? }),
        FactorKind::FInverse => json!({ "result": f_inverse(&m)? }),
        FactorKind::Phi if sigma.is_identity() => json!({ "sigma": sigma, "result": phi(&m)? }),
        FactorKind::Phi => json!({ "sigma": sigma, "result": phi_sigma(&sigma, &m)? }),
        FactorKind::PhiInverse => {
            json!({ "sigma": sigma, "result": phi_sigma_inverse(&sigma, &m)? })
        }
    };
    let report = json!({ "kind": a.kind.name(), "input": m, "output": body });
    write_json(
        dir,
        &format!("factorize_{}.json", a.kind.name()),
        &report,
        out,
    )
}

fn chart(a: &ChartArgs, dir: &Path, out: &mut Output) -> Result<(), CliError> {
    if let Some(path) = &a.point {
        let w =
            a.w.as_deref()
                .ok_or_else(|| CliError::Input("--point needs --w".into()))?;
        let w = parse_permutation(w)?;
        let y: FlagPoint = read_json(path)?;
        if w.n() != y.n() {
            return Err(CliError::Input(format!(
                "--w has {} letters but the point is {}x{}",
                w.n(),
                y.n(),
                y.n()
            )));
        }
        let c = chart_forward(&y, &w)?;
        write_json(dir, "chart_coords.json", &c, out)
    } else {
        let path = a.coords.as_ref().expect("clap enforces one source");
        let c: ChartCoords = read_json(path)?;
        if let Some(w) = &a.w {
            if &parse_permutation(w)? != c.w() {
                return Err(CliError::Input(format!(
                    "--w {w:?} differs from the chart {} in {}",
                    c.w(),
                    path.display()
                )));
            }
        }
        let y = chart_inverse(&c)?;
        write_json(dir, "chart_point.json", &y, out)
    }
}

#[derive(Serialize)]
struct FlowReport<'a> {
    field: &'static str,
    backward: bool,
    seed: Option<u64>,
    config: &'a IntegratorConfig,
    max_profile_violation: Option<f64>,
    #[serde(flatten)]
    diagnostics: Diagnostics,
}

fn flow(a: &FlowArgs, dir: &Path, out: &mut Output) -> Result<(), CliError> {
    let field = Field::from(a.field);
    let (x0, seed) = match (&a.x0, &a.h) {
        (Some(path), _) => (read_json::<SquareMatrix>(path)?, None),
        (None, Some(h)) => {
            let h = parse_spectrum(h)?;
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            (
                sampling::symmetric_with_spectrum(&h, &mut rng),
                Some(a.seed),
            )
        }
        (None, None) => unreachable!("clap enforces one start"),
    };
    let cfg = IntegratorConfig {
        rel_tol: a.rtol,
        abs_tol: a.atol,
        max_step: a.max_step,
        t_max: a.tmax,
        stop_field_norm: a.stop_field,
    };
    cfg.validate()?;
    let profile = match &a.profile {
        Some(path) => {
            let p: Profile = read_json(path)?;
            if p.n() != x0.n() {
                return Err(CliError::Input(format!(
                    "profile is for n = {} but x0 is {}x{}",
                    p.n(),
                    x0.n(),
                    x0.n()
                )));
            }
            Some(p)
        }
        None => None,
    };
    let traj = if a.backward {
        integrate_backward(field, &x0, &cfg)?
    } else {
        integrate(field, &x0, &cfg)?
    };
    let max_profile_violation = profile.map(|p| {
        traj.max_over_states(|s| {
            strictly_lower_pairs(s.n())
                .into_iter()
                .filter(|&pair| !p.contains(pair))
                .map(|pair| s[pair].abs())
                .fold(0.0, f64::max)
        })
    });
    let report = FlowReport {
        field: field.name(),
        backward: a.backward,
        seed,
        config: &cfg,
        max_profile_violation,
        diagnostics: traj.diagnostics(),
    };
    write_file(dir, "trajectory.csv", &traj.to_csv(), out)?;
    write_json(dir, "diagnostics.json", &report, out)?;
    out.lines.push(format!(
        "{} flow: {} states, t = {}, final field norm {:e}",
        field.name(),
        traj.len(),
        traj.final_time(),
        traj.final_field_norm
    ));
    Ok(())
}

fn verify(a: &VerifyArgs, dir: &Path, mut out: Output) -> Result<Output, CliError> {
    let reports: Vec<CheckReport> = verify_suite(a.suite, a.n, a.seed)?;
    let suite = serde_json::to_value(a.suite).expect("suite names serialize");
    let name = format!(
        "verify_{}_n{}_seed{}.json",
        suite.as_str().unwrap_or("suite"),
        a.n,
        a.seed
    );
    write_json(dir, &name, &reports, &mut out)?;
    for r in &reports {
        out.lines
            .push(serde_json::to_string(r).expect("reports serialize"));
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    out.lines.push(format!(
        "{} of {} checks passed",
        reports.len() - failed,
        reports.len()
    ));
    if failed > 0 {
        return Err(CliError::Checks {
            failed,
            total: reports.len(),
            output: out,
        });
    }
    Ok(out)
}

fn cells(a: &CellsArgs, dir: &Path, out: &mut Output) -> Result<(), CliError> {
    let w = parse_permutation(&a.w)?;
    let sets = inversion_sets(&w);
    let mut report = json!({
        "w": w,
        "length": w.length(),
        "stable": InversionSets::one_based(&sets.stable),
        "unstable": InversionSets::one_based(&sets.unstable),
    });
    if let Some(h) = &a.h {
        let h = parse_spectrum(h)?;
        if h.n() != w.n() {
            return Err(CliError::Input(format!(
                "--h has {} values but --w has {} letters",
                h.n(),
                w.n()
            )));
        }
        report["h"] = json!(h);
        report["hw"] = json!(h_conjugate(&h, &w));
    }
    out.lines
        .push(serde_json::to_string(&report).expect("cells report serializes"));
    write_json(dir, "cells.json", &report, out)
}
