use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ibz_core::calculus::Tolerances;
use ibz_core::criteria::{self, CriteriaConfig, Criterion, DEFAULT_FLAT_TOL, DEFAULT_STRICT_REL};
use ibz_core::families::{self, Family, FamilySpec, SweepConfig};
use ibz_core::oracle;
use ibz_core::profile::json::ProfileDoc;
use ibz_core::profile::validate_convexity;
use ibz_core::transform::{default_grid, Obstruction, DEFAULT_GRID_POINTS};
use ibz_core::{BodyOfRevolution, RadialProfile};

type CliResult<T> = std::result::Result<T, String>;

#[derive(Parser, Debug)]
#[command(name = "ibz", version, about = "Polar zonoid obstructions for intersection bodies of bodies of revolution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a pole criterion and print a JSON report.
    Check {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        criteria: CriteriaArgs,
    },
    /// Write the obstruction field as CSV.
    Field {
        #[command(flatten)]
        common: Common,
        /// Uniform grid points on [1e-6, 1], breakpoint clusters added.
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid_points: usize,
    },
    /// Sweep a family parameter and write margins and roots as CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        criteria: CriteriaArgs,
        /// Parameter to sweep (defaults to the family's shape parameter).
        #[arg(long)]
        param: Option<String>,
        /// Sweep interval as LO:HI.
        #[arg(long, value_parser = parse_range)]
        range: (f64, f64),
        /// Grid step; overrides --grid-points.
        #[arg(long)]
        step: Option<f64>,
        #[arg(long, default_value_t = families::DEFAULT_SWEEP_POINTS)]
        grid_points: usize,
        /// Width of refined root brackets.
        #[arg(long, default_value_t = 1e-10)]
        root_tol: f64,
    },
    /// Compare Monte Carlo section-volume ratios with quadrature.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Section angles from the axis; the first is the reference.
        #[arg(long, value_delimiter = ',', default_values_t = [PI / 2.0, PI / 4.0, PI / 6.0])]
        phi: Vec<f64>,
    },
    /// Report breakpoint classes, convexity and derivative checks.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Boundary samples per quadrant for the convexity test.
        #[arg(long, default_value_t = 2000)]
        grid_points: usize,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Builtin family name.
    #[arg(long, conflicts_with = "profile_json", required_unless_present = "profile_json")]
    builtin: Option<String>,
    /// Profile document (pieces or builtin reference).
    #[arg(long)]
    profile_json: Option<PathBuf>,
    /// Family parameter as NAME=VALUE; repeatable.
    #[arg(long = "set", value_parser = parse_assignment)]
    set: Vec<(String, f64)>,
    /// Ambient dimension.
    #[arg(long)]
    dim: Option<usize>,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = ibz_core::calculus::DEFAULT_REL_TOL)]
    tol_rel: f64,
    /// Absolute quadrature tolerance.
    #[arg(long, default_value_t = ibz_core::calculus::DEFAULT_ABS_TOL)]
    tol_abs: f64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CriteriaArgs {
    /// prop1 (dim 4), prop4 or cor6 (dim 6).
    #[arg(long)]
    criterion: Option<Criterion>,
    /// Margins within this fraction of max(|lhs|, |rhs|) are inconclusive.
    #[arg(long, default_value_t = DEFAULT_STRICT_REL)]
    strict_rel: f64,
    /// Flat-top tolerance, scaled by max(1, rho(1)).
    #[arg(long, default_value_t = DEFAULT_FLAT_TOL)]
    flat_tol: f64,
}

fn parse_range(s: &str) -> CliResult<(f64, f64)> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected LO:HI, got `{s}`"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad range start: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad range end: {e}"))?;
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn parse_assignment(s: &str) -> CliResult<(String, f64)> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad value for `{k}`: {e}"))?;
    Ok((k.trim().to_owned(), v))
}

enum Source {
    Family(Family, BTreeMap<String, f64>),
    Pieces(RadialProfile),
}

impl Common {
    fn source(&self) -> CliResult<Source> {
        let overrides: BTreeMap<String, f64> = self.set.iter().cloned().collect();
        if let Some(name) = &self.builtin {
            let family: Family = name.parse().map_err(err)?;
            return Ok(Source::Family(family, overrides));
        }
        let path = self.profile_json.as_ref().expect("clap enforces one source");
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        match ProfileDoc::from_json(&text).map_err(err)? {
            ProfileDoc::Builtin { builtin, mut params } => {
                params.extend(overrides);
                Ok(Source::Family(builtin.parse().map_err(err)?, params))
            }
            doc @ ProfileDoc::Pieces { .. } => {
                if !overrides.is_empty() {
                    return Err("--set applies only to builtin families".into());
                }
                Ok(Source::Pieces(doc.to_profile().map_err(err)?))
            }
        }
    }

    fn profile(&self) -> CliResult<RadialProfile> {
        match self.source()? {
            Source::Family(f, params) => families::family_profile(f, &params).map_err(err),
            Source::Pieces(p) => Ok(p),
        }
    }

    fn tolerances(&self) -> CliResult<Tolerances> {
        Tolerances::new(self.tol_rel, self.tol_abs).map_err(err)
    }

    fn body(&self, default_dim: usize) -> CliResult<BodyOfRevolution> {
        BodyOfRevolution::new(self.dim.unwrap_or(default_dim), self.profile()?).map_err(err)
    }

    fn emit(&self, text: &str) -> CliResult<()> {
        match &self.out {
            Some(path) => write_file(path, text),
            None => {
                use std::io::Write;
                match std::io::stdout().lock().write_all(text.as_bytes()) {
                    Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(format!("stdout: {e}")),
                    _ => Ok(()),
                }
            }
        }
    }
}

impl CriteriaArgs {
    fn config(&self, tol: Tolerances) -> CriteriaConfig {
        CriteriaConfig { quadrature: tol, strict_rel: self.strict_rel, flat_tol: self.flat_tol }
    }

    /// Explicit criterion, or the general one for the dimension, or the
    /// flat-top one in dimension 6 when the profile is flat.
    fn resolve(&self, dim: Option<usize>, profile: &RadialProfile) -> CliResult<Criterion> {
        match (self.criterion, dim) {
            (Some(c), Some(n)) if c.dimension() != n => {
                Err(format!("criterion {} applies in dimension {}, not {n}", c.name(), c.dimension()))
            }
            (Some(c), _) => Ok(c),
            (None, Some(6)) if criteria::flat_top_check_with(profile, self.flat_tol).flat => Ok(Criterion::Cor6),
            (None, n) => Criterion::for_dimension(n.unwrap_or(4)).map_err(err),
        }
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn err(e: ibz_core::Error) -> String {
    e.to_string()
}

fn family_dimension(family: Family) -> usize {
    match family {
        Family::OctagonKb | Family::LpRevolution | Family::ThreeBodiesL | Family::Cylinder => 6,
        _ => 4,
    }
}

fn cmd_check(common: &Common, args: &CriteriaArgs) -> CliResult<ExitCode> {
    let profile = common.profile()?;
    let criterion = args.resolve(common.dim, &profile)?;
    let report = criteria::check(&profile, criterion, &args.config(common.tolerances()?)).map_err(err)?;
    common.emit(&(report.to_json() + "\n"))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_field(common: &Common, grid_points: usize) -> CliResult<ExitCode> {
    let body = common.body(4)?;
    let o = Obstruction::with_tolerances(&body, common.tolerances()?).map_err(err)?;
    let field = o.evaluate(&default_grid(&o.breakpoints(), grid_points)).map_err(err)?;
    common.emit(&field.to_csv())?;
    let atoms: Vec<String> = field.atoms.iter().map(|a| format!("{}:{}", a.t, a.weight)).collect();
    eprintln!(
        "dim={} min_value={} at t={} atoms=[{}] verdict={}{}",
        field.dimension,
        field.min_value,
        field.min_location,
        atoms.join(" "),
        field.verdict,
        if field.one_sided_negativity_only { " (one-sided values only)" } else { "" },
    );
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    common: &Common,
    args: &CriteriaArgs,
    param: Option<&str>,
    range: (f64, f64),
    step: Option<f64>,
    grid_points: usize,
    root_tol: f64,
) -> CliResult<ExitCode> {
    let Source::Family(family, params) = common.source()? else {
        return Err("sweep requires a builtin family".into());
    };
    let param = param
        .or(family.parameter())
        .ok_or_else(|| format!("family `{}` has no shape parameter; pass --param scale", family.name()))?;
    let dim = common.dim.unwrap_or(family_dimension(family));
    let mut template = FamilySpec::new(family, dim);
    template.params = params;
    let grid = match step {
        Some(s) => families::stepped_grid(range.0, range.1, s).map_err(err)?,
        None => families::uniform_grid(range.0, range.1, grid_points),
    };
    let first = template.clone().with(param, grid[0]).profile().map_err(err)?;
    let criterion = args.resolve(Some(dim), &first)?;
    let config = SweepConfig { criteria: args.config(common.tolerances()?), root_tol };
    let result = families::sweep(&template, param, &grid, criterion, &config).map_err(err)?;
    common.emit(&result.to_csv())?;
    let roots: Vec<String> = result.roots.iter().map(|r| r.root.to_string()).collect();
    eprintln!(
        "family={} param={} criterion={} roots=[{}] last_satisfied={}",
        family.name(),
        param,
        criterion.name(),
        roots.join(" "),
        result.last_satisfied().map_or("none".into(), |p| p.to_string()),
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(common: &Common, samples: usize, seed: u64, phis: &[f64]) -> CliResult<ExitCode> {
    let body = common.body(4)?;
    let report = oracle::compare_ratios(&body, phis, samples, seed).map_err(err)?;
    common.emit(&(report.to_json() + "\n"))?;
    Ok(if report.all_within { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_validate(common: &Common, samples: usize) -> CliResult<ExitCode> {
    let body = common.body(4)?;
    let profile = body.profile();
    let convexity = validate_convexity(profile, body.dimension(), samples);
    let audit = oracle::derivative_audit(&body, 8).map_err(err)?;
    let audit: Vec<_> = audit
        .iter()
        .map(|a| json!({ "stage": a.stage, "checks": a.checks.len(), "max_relative_error": a.max_relative_error }))
        .collect();
    let report = json!({
        "dimension": body.dimension(),
        "profile": ProfileDoc::from(profile),
        "breakpoints": profile.breakpoint_info(),
        "rho_1": profile.eval(1.0),
        "flat_top": criteria::flat_top_check(profile).flat,
        "pole_smooth": criteria::check_pole_smoothness(profile).is_ok(),
        "convexity": convexity,
        "derivative_audit": audit,
    });
    let text = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    common.emit(&(text + "\n"))?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    match &cli.command {
        Command::Check { common, criteria } => cmd_check(common, criteria),
        Command::Field { common, grid_points } => cmd_field(common, *grid_points),
        Command::Sweep { common, criteria, param, range, step, grid_points, root_tol } => {
            cmd_sweep(common, criteria, param.as_deref(), *range, *step, *grid_points, *root_tol)
        }
        Command::Oracle { common, samples, seed, phi } => cmd_oracle(common, *samples, *seed, phi),
        Command::Validate { common, grid_points } => cmd_validate(common, *grid_points),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
