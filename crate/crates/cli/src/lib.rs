//! Command-line front end: argument parsing, input files, JSON/CSV emission.

pub mod dump;
mod output;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use disloc_core::cellproblem::{infcyl_with_profile, richardson_limit, CellGeometry, CellOptions, CylGrid};
use disloc_core::elasticity::{ElasticTensor, TensorSpec};
use disloc_core::fields::{concentration, mu_hat, residuals, solve_periodic, PeriodicBox};
use disloc_core::geometry::AxisBox;
use disloc_core::limits::{gamma_table, GammaConfig};
use disloc_core::linetension::{psi, solve_profile, ProfileOptions};
use disloc_core::network::{BravaisLattice, PolyhedralCurrent};
use disloc_core::relaxation::{psi_rel_upper, Caps, GraphOptions};
use disloc_core::{Error, Result};
use nalgebra::{Matrix3, Vector3};

pub use output::*;

/// Environment variable holding the default for `--threads`.
pub const THREADS_ENV: &str = "DISLOC_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_UNKNOWN_COMMAND: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "disloc", version, about = "Dislocation line tension, cell problems and regularized elastic energies")]
pub struct Cli {
    /// Upper bound on worker threads
    #[arg(long, global = true, env = THREADS_ENV, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=1024))]
    pub threads: u32,
    /// Write the primary output here instead of stdout
    #[arg(long, short, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Line-tension energy ψ(b, t) with its mode-refinement history
    Psi(PsiArgs),
    /// Upper bound on the relaxed line tension
    PsiRel(PsiRelArgs),
    /// Fourier coefficients of the angular profile
    Profile(ProfileArgs),
    /// Hollow-cylinder cell problem sweep over r/R
    Cell(CellArgs),
    /// Periodic strain field of a current; optional binary dump
    SolveField(FieldArgs),
    /// Core-cutoff energy ν_ε of a periodic field over an ε sweep
    Concentrate(ConcentrateArgs),
    /// Kirchhoff, lattice and diluteness checks of a current
    CheckNetwork(NetworkArgs),
    /// ε sweep of the regularized energies against the limit
    GammaTable(GammaArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct LineArgs {
    /// Elasticity tensor JSON
    #[arg(long, value_name = "PATH")]
    pub tensor: PathBuf,
    /// Burgers vector, comma separated
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    pub b: Vector3<f64>,
    /// Line direction, comma separated (normalized on input)
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    pub t: Vector3<f64>,
    /// Fourier modes M of the angular profile
    #[arg(long, default_value_t = 64)]
    pub modes: usize,
    /// Trapezoid points N_q (default 4M+4)
    #[arg(long)]
    pub quadrature: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PsiArgs {
    #[command(flatten)]
    pub line: LineArgs,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub line: LineArgs,
}

#[derive(Debug, Args)]
pub struct PsiRelArgs {
    #[command(flatten)]
    pub line: LineArgs,
    /// Lattice generator JSON (3×3, by rows); default Z³
    #[arg(long, value_name = "PATH")]
    pub lattice: Option<PathBuf>,
    /// Largest |b_i| in a decomposition
    #[arg(long, default_value_t = 1.5)]
    pub max_norm: f64,
    /// Largest Σ m_i in a decomposition
    #[arg(long, default_value_t = 2)]
    pub max_count: usize,
    /// Node spacing of the routing graph
    #[arg(long, default_value_t = 0.25)]
    pub resolution: f64,
}

#[derive(Debug, Args)]
pub struct CellArgs {
    #[command(flatten)]
    pub line: LineArgs,
    /// Outer radius R
    #[arg(long, default_value_t = 1.0)]
    pub outer: f64,
    /// Cylinder height h (default R)
    #[arg(long)]
    pub height: Option<f64>,
    /// Ratios R/r of the sweep, comma separated
    #[arg(long, value_delimiter = ',', default_value = "4,16,64,256,1024")]
    pub ratios: Vec<f64>,
    /// Radial cells per decade of R/r
    #[arg(long, default_value_t = 16.0)]
    pub per_decade: f64,
    /// Angular nodes
    #[arg(long, default_value_t = 32)]
    pub n_theta: usize,
    /// Axial nodes
    #[arg(long, default_value_t = 9)]
    pub n_z: usize,
    /// Relative CG tolerance
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BoxArgs {
    /// Current JSON
    #[arg(long, value_name = "PATH")]
    pub current: PathBuf,
    /// Elasticity tensor JSON
    #[arg(long, value_name = "PATH")]
    pub tensor: PathBuf,
    /// Side L of the periodic box [0, L)³
    #[arg(long = "box-l", default_value_t = 1.0)]
    pub l: f64,
    /// Samples per side (power of two, at least 16)
    #[arg(long, default_value_t = 64)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[command(flatten)]
    pub grid: BoxArgs,
    /// Binary dump of the real-space field
    #[arg(long, value_name = "PATH")]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConcentrateArgs {
    #[command(flatten)]
    pub grid: BoxArgs,
    /// Core radii ε, comma separated (default: L/8 … L/64, those of at least two grid spacings)
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// Fourier modes used for ψ
    #[arg(long, default_value_t = 32)]
    pub modes: usize,
}

#[derive(Debug, Args)]
pub struct NetworkArgs {
    /// Current JSON
    #[arg(long, value_name = "PATH")]
    pub current: PathBuf,
    /// Length scale h of the diluteness conditions
    #[arg(long)]
    pub h: f64,
    /// Angle and separation factor α
    #[arg(long)]
    pub alpha: f64,
    /// Side L of the domain Ω = [0, L]³
    #[arg(long = "box-l", default_value_t = 1.0)]
    pub l: f64,
}

#[derive(Debug, Args)]
pub struct GammaArgs {
    /// Table configuration JSON
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Also write the summary JSON here
    #[arg(long, value_name = "PATH")]
    pub summary: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

fn parse_vec3(s: &str) -> std::result::Result<Vector3<f64>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got {s:?}"));
    }
    let mut v = Vector3::zeros();
    for (i, p) in parts.iter().enumerate() {
        v[i] = p.parse::<f64>().map_err(|e| format!("{p:?}: {e}"))?;
        if !v[i].is_finite() {
            return Err(format!("{p:?} is not finite"));
        }
    }
    Ok(v)
}

/// Parses `argv` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    EXIT_OK
                }
                ErrorKind::InvalidSubcommand => {
                    report_error("unknown-subcommand", &first_line(&e.to_string()));
                    EXIT_UNKNOWN_COMMAND
                }
                _ => {
                    report_error("usage", &first_line(&e.to_string()));
                    EXIT_INVALID
                }
            };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            report_error(error_kind(&e), &e.to_string());
            exit_code(&e)
        }
    }
}

fn first_line(s: &str) -> String {
    s.lines().next().unwrap_or_default().trim_start_matches("error: ").to_string()
}

fn report_error(kind: &str, message: &str) {
    let doc = ErrorDocument {
        version: SCHEMA_VERSION,
        error: ErrorBody { kind: kind.to_string(), message: message.to_string() },
    };
    eprintln!("{}", serde_json::to_string(&doc).expect("error document serializes"));
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidTensor(_) => "invalid-tensor",
        Error::NotARotation(_) => "not-a-rotation",
        Error::InvalidArgument(_) => "invalid-argument",
        Error::Geometry(_) => "geometry",
        Error::NoConvergence { .. } => "no-convergence",
        Error::Aliasing { .. } => "aliasing",
        Error::OnAxis(_) => "on-axis",
        Error::OutsideDomain(_) => "outside-domain",
        Error::NotDivergenceFree(_) => "not-divergence-free",
        Error::NotAdmissible(_) => "not-admissible",
        Error::IllConditioned { .. } => "ill-conditioned",
        Error::Blowup(_) => "blowup",
        Error::Disconnected => "disconnected",
        Error::Shape(_) => "shape",
        Error::Singular(_) => "singular",
        Error::Json(_) => "json",
        Error::Io(_) => "io",
    }
}

/// Numerical breakdowns exit with 1, everything attributable to the input with 2.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoConvergence { .. } | Error::Aliasing { .. } | Error::Singular(_) => EXIT_NUMERICAL,
        _ => EXIT_INVALID,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn load_tensor(path: &Path) -> Result<ElasticTensor> {
    TensorSpec::from_json(&read(path)?)?.build()
}

fn load_current(path: &Path) -> Result<PolyhedralCurrent> {
    PolyhedralCurrent::from_json(&read(path)?)
}

fn profile_options(line: &LineArgs) -> ProfileOptions {
    let mut o = ProfileOptions::new(line.modes);
    if let Some(q) = line.quadrature {
        o.quadrature = q;
    }
    o
}

fn direction(t: &Vector3<f64>) -> Result<Vector3<f64>> {
    let n = t.norm();
    if n == 0.0 {
        return Err(Error::InvalidArgument("line direction t must be nonzero".into()));
    }
    Ok(t / n)
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.output {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn emit_json<T: serde::Serialize>(cli: &Cli, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    emit(cli, &s)
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Psi(a) => emit_json(cli, &run_psi(&a.line)?),
        Command::Profile(a) => emit_json(cli, &run_profile(&a.line)?),
        Command::PsiRel(a) => emit_json(cli, &run_psi_rel(a)?),
        Command::Cell(a) => {
            let out = run_cell(a, cli.threads as usize)?;
            match a.format {
                Format::Json => emit_json(cli, &out),
                Format::Csv => emit(cli, &out.to_csv()),
            }
        }
        Command::SolveField(a) => emit_json(cli, &run_solve_field(a)?),
        Command::Concentrate(a) => emit(cli, &run_concentrate(a)?.to_csv()),
        Command::CheckNetwork(a) => emit_json(cli, &run_check_network(a)?),
        Command::GammaTable(a) => {
            let config: GammaConfig = serde_json::from_str(&read(&a.config)?)?;
            let table = gamma_table(&config)?;
            if let Some(p) = &a.summary {
                let doc = GammaSummaryDocument { version: SCHEMA_VERSION, summary: table.summary.clone() };
                fs::write(p, serde_json::to_string_pretty(&doc)? + "\n")?;
            }
            match a.format {
                Format::Csv => emit(cli, &table.to_csv()),
                Format::Json => emit_json(cli, &GammaTableDocument { version: SCHEMA_VERSION, table }),
            }
        }
    }
}

pub fn run_psi(line: &LineArgs) -> Result<PsiOutput> {
    let c = load_tensor(&line.tensor)?;
    let t = direction(&line.t)?;
    let opts = profile_options(line);
    let mut history = Vec::new();
    let mut m = 4;
    while m < line.modes {
        history.push(HistoryPoint { modes: m, psi: psi(&c, &line.b, &t, ProfileOptions::new(m))? });
        m *= 2;
    }
    let profile = solve_profile(&c, &line.b, &t, opts)?;
    history.push(HistoryPoint { modes: line.modes, psi: profile.psi });
    Ok(PsiOutput {
        version: SCHEMA_VERSION,
        psi: profile.psi,
        null_space_dim: profile.null_space_dim,
        modes: opts.modes,
        quadrature: opts.quadrature,
        tail_ratio: profile.tail_ratio,
        convergence_history: history,
    })
}

pub fn run_profile(line: &LineArgs) -> Result<ProfileOutput> {
    let c = load_tensor(&line.tensor)?;
    let p = solve_profile(&c, &line.b, &direction(&line.t)?, profile_options(line))?;
    let arr = |v: &Vector3<f64>| [v[0], v[1], v[2]];
    let frame: &Matrix3<f64> = p.frame.matrix();
    Ok(ProfileOutput {
        version: SCHEMA_VERSION,
        b: arr(&p.b),
        t: arr(&p.t),
        frame: [0, 1, 2].map(|i| [frame[(i, 0)], frame[(i, 1)], frame[(i, 2)]]),
        a0: arr(&p.a0),
        cos: p.cos.iter().map(arr).collect(),
        sin: p.sin.iter().map(arr).collect(),
        g: arr(&p.g),
        psi: p.psi,
        null_space_dim: p.null_space_dim,
        tail_ratio: p.tail_ratio,
    })
}

pub fn run_psi_rel(a: &PsiRelArgs) -> Result<PsiRelOutput> {
    let c = load_tensor(&a.line.tensor)?;
    let lattice = match &a.lattice {
        Some(p) => {
            let rows: [[f64; 3]; 3] = serde_json::from_str(&read(p)?)?;
            BravaisLattice::new(Matrix3::from_fn(|i, j| rows[i][j]))?
        }
        None => BravaisLattice::cubic(),
    };
    let caps = Caps { max_norm: a.max_norm, max_count: a.max_count };
    let est = psi_rel_upper(
        &c,
        &a.line.b,
        &direction(&a.line.t)?,
        &lattice,
        &caps,
        &GraphOptions::new(a.resolution),
        profile_options(&a.line),
    )?;
    Ok(PsiRelOutput {
        version: SCHEMA_VERSION,
        psi: est.psi,
        psi_rel_upper: est.psi_rel_upper,
        best_decomposition: est.best_decomposition,
        paths: est.routes,
        candidates: est.candidates,
    })
}

pub fn run_cell(a: &CellArgs, threads: usize) -> Result<CellOutput> {
    let c = load_tensor(&a.line.tensor)?;
    let opts = CellOptions { profile: profile_options(&a.line), tolerance: a.tolerance, ..CellOptions::default() };
    let profile = solve_profile(&c, &a.line.b, &direction(&a.line.t)?, opts.profile)?;
    let h = a.height.unwrap_or(a.outer);
    if a.ratios.is_empty() {
        return Err(Error::InvalidArgument("no ratios given".into()));
    }
    let jobs: Vec<(f64, CellGeometry, CylGrid)> = a
        .ratios
        .iter()
        .map(|&ratio| {
            let g = CellGeometry::new(h, a.outer, a.outer / ratio)?;
            let grid = CylGrid::with_density(a.per_decade, ratio, a.n_theta, a.n_z)?;
            Ok((ratio, g, grid))
        })
        .collect::<Result<_>>()?;
    // rows are independent: split them over at most `threads` scoped workers
    let solve = |job: &(f64, CellGeometry, CylGrid)| -> Result<CellRow> {
        let s = infcyl_with_profile(&profile, job.1, job.2, opts)?;
        Ok(CellRow {
            r_over_r: 1.0 / job.0,
            value: s.value,
            psi: s.psi,
            gap: s.gap(),
            iterations: s.iterations,
            energy: s.energy,
        })
    };
    let workers = threads.clamp(1, jobs.len());
    let rows: Vec<CellRow> = if workers == 1 {
        jobs.iter().map(solve).collect::<Result<_>>()?
    } else {
        let chunk = jobs.len().div_ceil(workers);
        std::thread::scope(|s| {
            let handles: Vec<_> = jobs
                .chunks(chunk)
                .map(|part| s.spawn(|| part.iter().map(solve).collect::<Result<Vec<_>>>()))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("cell worker panicked"))
                .collect::<Result<Vec<_>>>()
        })?
        .into_iter()
        .flatten()
        .collect()
    };
    let richardson = if rows.len() >= 2 {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| ((1.0 / r.r_over_r).ln(), r.value)).collect();
        let (limit, kappa) = richardson_limit(&pts)?;
        Some(Richardson { limit, kappa })
    } else {
        None
    };
    Ok(CellOutput { version: SCHEMA_VERSION, h, outer: a.outer, rows, richardson })
}

fn solve_box(a: &BoxArgs) -> Result<(ElasticTensor, PolyhedralCurrent, PeriodicBox)> {
    let c = load_tensor(&a.tensor)?;
    let current = load_current(&a.current)?;
    let grid = PeriodicBox::new(a.l, a.n)?;
    Ok((c, current, grid))
}

pub fn run_solve_field(a: &FieldArgs) -> Result<FieldOutput> {
    let (c, current, grid) = solve_box(&a.grid)?;
    let mu = mu_hat(&current, grid)?;
    let beta = solve_periodic(&c, &mu)?;
    let res = residuals(&c, &beta, &mu);
    let field = beta.to_spatial();
    if let Some(p) = &a.dump {
        let f = fs::File::create(p)?;
        dump::write_field(std::io::BufWriter::new(f), &field)?;
    }
    Ok(FieldOutput {
        version: SCHEMA_VERSION,
        n: grid.n,
        l: grid.l,
        energy: field.energy(&c),
        residuals: res,
        max_imag: field.max_imag,
        dump: a.dump.as_ref().map(|p| p.display().to_string()),
        dump_format_version: dump::VERSION,
    })
}

pub fn run_concentrate(a: &ConcentrateArgs) -> Result<ConcentrationTable> {
    let (c, current, grid) = solve_box(&a.grid)?;
    let opts = ProfileOptions::new(a.modes);
    let mut psi_length = 0.0;
    for s in 0..current.segments.len() {
        let theta = current.segments[s].theta * current.eps;
        psi_length += psi(&c, &theta, &current.tangent(s), opts)? * current.length(s);
    }
    let field = solve_periodic(&c, &mu_hat(&current, grid)?)?.to_spatial();
    // the default sweep keeps the radii the grid resolves (at least two spacings)
    let eps: Vec<f64> = if a.eps.is_empty() {
        [8.0, 16.0, 32.0, 64.0].iter().map(|k| grid.l / k).filter(|e| *e >= 2.0 * grid.spacing()).collect()
    } else {
        a.eps.clone()
    };
    let rows = eps
        .iter()
        .map(|&e| {
            let nu = concentration(&field, &current, e, &c)?;
            let gap = if psi_length > 0.0 { (nu - psi_length).abs() / psi_length } else { nu.abs() };
            Ok(ConcentrationRow { eps: e, nu_eps: nu, psi_times_length: psi_length, gap })
        })
        .collect::<Result<_>>()?;
    Ok(ConcentrationTable { rows })
}

pub fn run_check_network(a: &NetworkArgs) -> Result<NetworkOutput> {
    let current = load_current(&a.current)?;
    if !(a.h > 0.0 && a.alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("need h > 0 and α > 0, got h={} α={}", a.h, a.alpha)));
    }
    let omega = AxisBox::new([0.0; 3], [a.l; 3])?;
    Ok(NetworkOutput {
        version: SCHEMA_VERSION,
        segments: current.segments.len(),
        total_length: current.total_length(),
        total_variation: current.total_variation(&omega),
        divergence: current.check_divergence_free(Some(&omega)),
        lattice: current.lattice.map(|l| current.check_lattice(&l)),
        dilute: current.check_dilute(a.h, a.alpha, &omega),
    })
}
