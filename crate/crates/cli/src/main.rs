use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use magchain::eta::preimage;
use magchain::fd::{assemble_fd_with, compare_to_prediction, fd_eigenvalues, ChainBoundary, FdOptions, Stencil};
use magchain::floquet::SpectralKind;
use magchain::io::{format_g, load_profile, write_bands_csv, write_butterfly_csv, write_measure_csv};
use magchain::profile::FieldProfile;
use magchain::spectrum::{
    assemble, butterfly, decade_scales, golden_convergents, measure_table, Coordinates, GraphSpectrum,
};
use magchain::{Scalar, TOL_ZERO};
use serde::Serialize;

/// Accuracy promised for every located root.
const ROOT_TOL: f64 = 1e-10;

#[derive(Parser)]
#[command(
    name = "magchain",
    version,
    about = "Spectra of magnetic ring chains and their discrete duals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral parts, gaps and Dirichlet placements for one profile.
    Bands(BandsArgs),
    /// Spectra over every reduced p/q up to a denominator bound.
    Butterfly(ButterflyArgs),
    /// Total measure and box dimension along a sequence of rational slopes.
    Measure(MeasureArgs),
    /// Compare a finite-difference chain against the predicted spectrum.
    Verify(VerifyArgs),
    /// Points z on each branch with eta(z) = lambda.
    Preimage(PreimageArgs),
}

#[derive(Args)]
struct ProfileArgs {
    /// Slope of a linear profile, `p/q` or a decimal.
    #[arg(long, value_parser = parse_scalar, required_unless_present = "profile", conflicts_with = "profile")]
    alpha: Option<Scalar>,
    /// Phase of a linear profile.
    #[arg(long, value_parser = parse_scalar, default_value = "0", requires = "alpha")]
    theta: Scalar,
    /// `periodic:v1,v2,...` or `file:<path>`.
    #[arg(long)]
    profile: Option<String>,
}

impl ProfileArgs {
    fn load(&self) -> Result<FieldProfile, Failure> {
        match (&self.alpha, &self.profile) {
            (Some(a), _) => Ok(FieldProfile::linear(*a, self.theta)),
            (None, Some(spec)) => Ok(load_profile(spec)?),
            (None, None) => Err(Failure::Usage("one of --alpha or --profile is required".into())),
        }
    }

    fn describe(&self) -> String {
        match (&self.alpha, &self.profile) {
            (Some(a), _) => format!("linear alpha={a} theta={}", self.theta),
            (None, Some(spec)) => spec.clone(),
            (None, None) => String::new(),
        }
    }
}

#[derive(Args)]
struct BandsArgs {
    #[command(flatten)]
    profile: ProfileArgs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    gamma: f64,
    #[arg(long, default_value_t = 3)]
    nmax: usize,
    #[arg(long, default_value = "bands.csv")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoordsArg {
    Discrete,
    Graph,
}

#[derive(Args)]
struct ButterflyArgs {
    #[arg(long)]
    qmax: u32,
    #[arg(long, value_parser = parse_scalar, default_value = "0", conflicts_with = "theta_sweep")]
    theta: Scalar,
    /// Use the phases 0, 1/k, ..., (k-1)/k.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    theta_sweep: Option<u32>,
    #[arg(long, value_enum, default_value = "discrete")]
    coords: CoordsArg,
    #[arg(long, default_value_t = 3)]
    nmax: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    gamma: f64,
    #[arg(long, default_value = "butterfly.csv")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConvergentsArg {
    Golden,
}

#[derive(Args)]
struct MeasureArgs {
    #[arg(long, value_enum, required_unless_present = "alphas", conflicts_with = "alphas")]
    convergents: Option<ConvergentsArg>,
    #[arg(long, default_value_t = 6, requires = "convergents")]
    depth: usize,
    /// Comma-separated list of `p/q`.
    #[arg(long, value_delimiter = ',', value_parser = parse_scalar)]
    alphas: Option<Vec<Scalar>>,
    #[arg(long, value_parser = parse_scalar, default_value = "0")]
    theta: Scalar,
    /// Box sizes 10^-1 down to 10^-decades.
    #[arg(long, default_value_t = 4)]
    decades: u32,
    #[arg(long, default_value = "measure.csv")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum BoundaryArg {
    Open,
    Necklace,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum StencilArg {
    SecondDifference,
    Numerov,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    profile: ProfileArgs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    gamma: f64,
    #[arg(long)]
    rings: usize,
    #[arg(long)]
    points: usize,
    #[arg(long)]
    emax: f64,
    #[arg(long)]
    tol: f64,
    #[arg(long, value_enum, default_value = "necklace")]
    boundary: BoundaryArg,
    #[arg(long, value_enum, default_value = "numerov")]
    stencil: StencilArg,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PreimageArgs {
    #[arg(long, allow_hyphen_values = true)]
    lambda: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    gamma: f64,
    #[arg(long, default_value_t = 3)]
    nmax: usize,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(magchain::Error),
    Io(PathBuf, std::io::Error),
    VerifyFailed,
}

impl From<magchain::Error> for Failure {
    fn from(e: magchain::Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Lib(e) if e.is_numerical() => 2,
            Failure::VerifyFailed => 3,
            _ => 1,
        }
    }
}

fn parse_scalar(s: &str) -> Result<Scalar, String> {
    s.parse::<Scalar>().map_err(|e| e.to_string())
}

fn header(gamma: f64, theta: &str, n_max: usize) -> String {
    format!(
        "# gamma={} theta={theta} nmax={n_max} tol_zero={} root_tol={}",
        format_g(gamma),
        format_g(TOL_ZERO),
        format_g(ROOT_TOL)
    )
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn fills_half_line(g: &GraphSpectrum) -> bool {
    g.parts.first().is_some_and(|p| p.hull().lo.abs() <= TOL_ZERO)
        && g.parts
            .iter()
            .all(|p| p.intervals.len() == 1 && p.kind == SpectralKind::AbsolutelyContinuous)
        && g.gaps.iter().all(|gap| gap.touching)
}

fn counted(n: usize, word: &str) -> String {
    if n == 1 {
        format!("1 {word}")
    } else {
        format!("{n} {word}s")
    }
}

fn bands_summary(g: &GraphSpectrum, source: &str, theta: &str, n_max: usize) -> String {
    let mut s = header(g.gamma, theta, n_max);
    let _ = writeln!(s);
    let _ = writeln!(s, "profile: {source}");
    let word = match g.discrete.kind {
        SpectralKind::AbsolutelyContinuous => "band",
        SpectralKind::PurePoint => "point",
    };
    let _ = writeln!(
        s,
        "discrete: {}, measure {}, norm bound {}",
        counted(g.discrete.len(), word),
        format_g(g.discrete.measure()),
        format_g(g.norm_bound)
    );
    for part in &g.parts {
        let h = part.hull();
        let _ = writeln!(
            s,
            "sigma_{}: {} in [{}, {}], measure {}",
            part.n,
            counted(part.intervals.len(), word),
            format_g(h.lo),
            format_g(h.hi),
            format_g(part.measure())
        );
    }
    for gap in &g.gaps {
        let placement = if gap.touching {
            "touching".to_string()
        } else if gap.strictly_contains(gap.dirichlet) {
            format!("contains {}", format_g(gap.dirichlet))
        } else {
            format!("misses {}", format_g(gap.dirichlet))
        };
        let _ = writeln!(
            s,
            "gap ({}, {}): length {}, {placement}",
            format_g(gap.lo),
            format_g(gap.hi),
            format_g(gap.len())
        );
    }
    if fills_half_line(g) {
        let _ = writeln!(s, "union = [0,inf)");
    }
    s
}

fn cmd_bands(args: &BandsArgs) -> Result<(), Failure> {
    let profile = args.profile.load()?;
    let g = assemble(&profile, args.gamma, args.nmax)?;
    write_file(&args.out, &write_bands_csv(&g))?;
    print!(
        "{}",
        bands_summary(&g, &args.profile.describe(), &args.profile.theta.to_string(), args.nmax)
    );
    Ok(())
}

fn cmd_butterfly(args: &ButterflyArgs) -> Result<(), Failure> {
    let thetas: Vec<Scalar> = match args.theta_sweep {
        Some(k) => (0..k).map(|i| Scalar::ratio(i64::from(i), i64::from(k))).collect(),
        None => vec![args.theta],
    };
    let coords = match args.coords {
        CoordsArg::Discrete => Coordinates::Discrete,
        CoordsArg::Graph => Coordinates::Graph,
    };
    let rows = butterfly(args.qmax, &thetas, args.gamma, coords, args.nmax)?;
    write_file(&args.out, &write_butterfly_csv(&rows))?;
    let theta = match args.theta_sweep {
        Some(k) => format!("sweep/{k}"),
        None => args.theta.to_string(),
    };
    println!("{}", header(args.gamma, &theta, args.nmax));
    println!("qmax {}: {} rows", args.qmax, rows.len());
    Ok(())
}

fn exact_slope(x: Scalar) -> Result<(i64, i64), Failure> {
    x.as_ratio()
        .map(|r| (*r.numer(), *r.denom()))
        .ok_or_else(|| Failure::Usage(format!("slope {x} is not rational")))
}

fn cmd_measure(args: &MeasureArgs) -> Result<(), Failure> {
    let alphas = match (&args.convergents, &args.alphas) {
        (Some(ConvergentsArg::Golden), _) => golden_convergents(args.depth),
        (None, Some(list)) => list.iter().map(|&x| exact_slope(x)).collect::<Result<_, _>>()?,
        (None, None) => return Err(Failure::Usage("one of --convergents or --alphas is required".into())),
    };
    let rows = measure_table(&alphas, args.theta, &decade_scales(args.decades))?;
    write_file(&args.out, &write_measure_csv(&rows))?;
    println!("{}", header(0.0, &args.theta.to_string(), 3));
    for r in &rows {
        println!(
            "{}/{}: measure {}, box dimension {}",
            r.p,
            r.q,
            format_g(r.total_measure),
            format_g(r.box_dimension)
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyParams {
    profile: String,
    gamma: f64,
    rings: usize,
    points: usize,
    emax: f64,
    tol: f64,
    nmax: usize,
    boundary: BoundaryArg,
    stencil: StencilArg,
    row_scaling: f64,
}

#[derive(Serialize)]
struct VerifyJson {
    max_distance: f64,
    mean_distance: f64,
    n_eigs: usize,
    per_branch_counts: Vec<usize>,
    dirichlet_count: usize,
    pass: bool,
    params: VerifyParams,
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    if !(args.emax > 0.0 && args.emax.is_finite()) {
        return Err(Failure::Usage("--emax must be positive".into()));
    }
    let profile = args.profile.load()?;
    if let (BoundaryArg::Necklace, Some(p)) = (args.boundary, profile.period()) {
        if !args.rings.is_multiple_of(p) {
            eprintln!(
                "warning: {} rings is not a multiple of the profile period {p}",
                args.rings
            );
        }
    }
    let options = FdOptions {
        boundary: match args.boundary {
            BoundaryArg::Open => ChainBoundary::Open,
            BoundaryArg::Necklace => ChainBoundary::Necklace,
        },
        stencil: match args.stencil {
            StencilArg::SecondDifference => Stencil::SecondDifference,
            StencilArg::Numerov => Stencil::Numerov,
        },
    };
    // Branches up to n cover energies below (n+1)².
    let n_max = args.emax.sqrt().floor() as usize;
    let predicted = assemble(&profile, args.gamma, n_max)?;
    let chain = assemble_fd_with(&profile, args.gamma, args.rings, args.points, options)?;
    let eigs = fd_eigenvalues(&chain, args.emax)?;
    let r = compare_to_prediction(&eigs, &predicted, args.tol)?;
    let report = VerifyJson {
        max_distance: r.max_distance,
        mean_distance: r.mean_distance,
        n_eigs: r.n_eigs,
        per_branch_counts: r.per_branch_counts,
        dirichlet_count: r.dirichlet_count,
        pass: r.pass,
        params: VerifyParams {
            profile: args.profile.describe(),
            gamma: args.gamma,
            rings: args.rings,
            points: args.points,
            emax: args.emax,
            tol: args.tol,
            nmax: n_max,
            boundary: args.boundary,
            stencil: args.stencil,
            row_scaling: chain.row_scaling(),
        },
    };
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    if let Some(path) = &args.out {
        write_file(path, &text)?;
    }
    print!("{text}");
    if report.pass {
        Ok(())
    } else {
        Err(Failure::VerifyFailed)
    }
}

fn cmd_preimage(args: &PreimageArgs) -> Result<(), Failure> {
    for (n, z) in preimage(args.lambda, args.gamma, args.nmax)? {
        println!("{n} {}", format_g(z));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Bands(a) => cmd_bands(a),
        Command::Butterfly(a) => cmd_butterfly(a),
        Command::Measure(a) => cmd_measure(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Preimage(a) => cmd_preimage(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Lib(e) => eprintln!("error: {e}"),
                Failure::Io(p, e) => eprintln!("error: {}: {e}", p.display()),
                Failure::VerifyFailed => eprintln!("verification FAILED"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}
