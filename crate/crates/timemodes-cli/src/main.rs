//! Command-line front end: figure data as CSV, JSON uncertainty and
//! verification reports, and direct access to the library operations.
//!
//! Exit codes: 0 success, 1 usage error, 2 tolerance/accuracy violation,
//! 3 I/O error.

mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use timemodes::arrival::{toa_density_scan, Direction, StateCoefficients};
use timemodes::modes::{ModeSpec, PacketSpec};
use timemodes::operators::{spectrum_truncated, time_moments, uncertainty_report};
use timemodes::quadrature::Grid1D;
use timemodes::timerep::psi_closed_form;

use output::{write_csv, write_json};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Tolerance(String),
    Io(String),
}

impl From<timemodes::Error> for CliError {
    fn from(e: timemodes::Error) -> Self {
        match e {
            timemodes::Error::Domain(m) | timemodes::Error::Usage(m) => CliError::Usage(m),
            timemodes::Error::Numeric(m) => CliError::Tolerance(m),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Tolerance(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Tolerance(m) | CliError::Io(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "timemodes",
    version,
    about = "Laguerre energy modes on the half-line: figure data, spectra, \
             uncertainty reports, arrival-time scans, and a verification suite"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mode profiles and |psi|^2 time profiles for the default shape alpha = 2
    Fig1(FigModes),
    /// Same panels at alpha = 20, where the time widths shrink by an order
    Fig2(FigModes),
    /// Time width Delta T against alpha for modes 0 and 3
    Fig3(FigSweep),
    /// Uncertainty product Delta H Delta T against alpha for modes 0 and 3
    Fig4(FigSweep),
    /// Arrival-time density |<n tau x s|m>|^2 at alpha = 2 (m = 1, n = 3)
    Fig5(FigArrival),
    /// Arrival-time density at alpha = 20 (m = 1, n = 3)
    Fig6(FigArrival),
    /// Samples of one mode (and its tau-shifted packet) on an energy grid
    Modes(ModesArgs),
    /// Eigenvalues of the truncated Hamiltonian
    Spectrum(SpectrumArgs),
    /// JSON uncertainty report for one mode
    Uncertainty(UncertaintyArgs),
    /// Arrival amplitude scan over detector time
    Arrival(ArrivalArgs),
    /// Run every closed-form-vs-oracle residual and report pass/fail
    Verify(VerifyArgs),
}

#[derive(Args)]
struct FigModes {
    /// Shape exponent (defaults to the figure's canonical value)
    #[arg(long)]
    alpha: Option<f64>,
    /// Energy scale
    #[arg(long, default_value_t = 1.0)]
    omega0: f64,
    /// Largest mode index included
    #[arg(long, default_value_t = 3)]
    nmax: u32,
    /// Energy grid MIN:MAX:COUNT (omega units); default 0:3(alpha+2nmax+1):1201
    #[arg(long)]
    energy_grid: Option<String>,
    /// Time grid MIN:MAX:COUNT (t units); default spans the mode width
    #[arg(long)]
    time_grid: Option<String>,
    /// Output directory for the two CSV panels
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct FigSweep {
    #[arg(long, default_value_t = 2.0)]
    alpha_min: f64,
    #[arg(long, default_value_t = 40.0)]
    alpha_max: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha_step: f64,
    #[arg(long, default_value_t = 1.0)]
    omega0: f64,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct FigArrival {
    /// Shape exponent (defaults to the figure's canonical value)
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    omega0: f64,
    /// State mode index
    #[arg(long, default_value_t = 1)]
    m: u32,
    /// Detector mode index
    #[arg(long, default_value_t = 3)]
    n: u32,
    /// Detector position
    #[arg(long, default_value_t = 0.0)]
    x: f64,
    /// Direction: +1 right movers, -1 left movers
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    s: i32,
    /// Lag grid MIN:MAX:COUNT in units of omega0 (tau - s x)
    #[arg(long, default_value = "-8:8:801")]
    grid: String,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct ModesArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    omega0: f64,
    /// Packet time shift
    #[arg(long, default_value_t = 0.0)]
    tau: f64,
    /// Energy grid MIN:MAX:COUNT
    #[arg(long, default_value = "0:30:601")]
    grid: String,
    /// Output CSV path, or - for stdout
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long)]
    nmax: usize,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    omega0: f64,
    /// Output CSV path, or - for stdout
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args)]
struct UncertaintyArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    omega0: f64,
    #[arg(long, default_value_t = 0.0)]
    tau: f64,
    /// Output JSON path, or - for stdout
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args)]
struct ArrivalArgs {
    /// State mode index
    #[arg(long)]
    m: u32,
    /// Detector mode index
    #[arg(long)]
    n: u32,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    omega0: f64,
    #[arg(long, default_value_t = 0.0)]
    x: f64,
    /// Direction: +1 right movers, -1 left movers
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    s: i32,
    /// Detector-time grid MIN:MAX:COUNT (tau units)
    #[arg(long)]
    grid: String,
    /// Output CSV path, or - for stdout
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 20)]
    nmax: u32,
    #[arg(long, default_value_t = 1.0)]
    omega0: f64,
    /// Output JSON path, or - for stdout
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fig1(a) => run_fig_modes(a, "fig1", 2.0, (-6.0, 6.0)),
        Command::Fig2(a) => run_fig_modes(a, "fig2", 20.0, (-0.6, 0.6)),
        Command::Fig3(a) => run_fig_sweep(a, "fig3", SweepQuantity::DeltaT),
        Command::Fig4(a) => run_fig_sweep(a, "fig4", SweepQuantity::Product),
        Command::Fig5(a) => run_fig_arrival(a, "fig5", 2.0),
        Command::Fig6(a) => run_fig_arrival(a, "fig6", 20.0),
        Command::Modes(a) => run_modes(a),
        Command::Spectrum(a) => run_spectrum(a),
        Command::Uncertainty(a) => run_uncertainty(a),
        Command::Arrival(a) => run_arrival(a),
        Command::Verify(a) => run_verify_cmd(a),
    }
}

/// Parses MIN:MAX:COUNT into a uniform grid.
fn parse_grid(spec: &str, flag: &str) -> Result<Grid1D, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "{flag}: expected MIN:MAX:COUNT, got '{spec}'"
        )));
    }
    let min: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::Usage(format!("{flag}: bad MIN '{}'", parts[0])))?;
    let max: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Usage(format!("{flag}: bad MAX '{}'", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| CliError::Usage(format!("{flag}: bad COUNT '{}'", parts[2])))?;
    Grid1D::uniform(min, max, count)
        .map_err(|e| CliError::Usage(format!("{flag}: {e}")))
}

fn run_fig_modes(
    args: FigModes,
    stem: &str,
    default_alpha: f64,
    default_trange: (f64, f64),
) -> Result<(), CliError> {
    let alpha = args.alpha.unwrap_or(default_alpha);
    let omega0 = args.omega0;
    let modes: Vec<ModeSpec> = (0..=args.nmax)
        .map(|n| ModeSpec::new(n, alpha, omega0).map_err(CliError::from))
        .collect::<Result<_, _>>()?;

    let energy_grid = match &args.energy_grid {
        Some(s) => parse_grid(s, "--energy-grid")?,
        None => Grid1D::uniform(
            0.0,
            3.0 * (alpha + 2.0 * f64::from(args.nmax) + 1.0) * omega0,
            1201,
        )
        .map_err(CliError::from)?,
    };
    let mut header = vec!["omega".to_string()];
    header.extend((0..=args.nmax).map(|n| format!("phi_{n}")));
    let rows: Vec<Vec<f64>> = energy_grid
        .points()
        .iter()
        .map(|&w| {
            let mut row = vec![w];
            row.extend(modes.iter().map(|m| m.eval_energy(w)));
            row
        })
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(
        &args.out.join(format!("{stem}_energy.csv")),
        &header_refs,
        &rows,
    )?;

    let time_grid = match &args.time_grid {
        Some(s) => parse_grid(s, "--time-grid")?,
        None => Grid1D::uniform(default_trange.0 / omega0, default_trange.1 / omega0, 1201)
            .map_err(CliError::from)?,
    };
    let mut header = vec!["t".to_string()];
    header.extend((0..=args.nmax).map(|n| format!("psi_sq_{n}")));
    let packets: Vec<PacketSpec> = modes
        .iter()
        .map(|m| PacketSpec::new(*m, 0.0).map_err(CliError::from))
        .collect::<Result<_, _>>()?;
    let rows: Vec<Vec<f64>> = time_grid
        .points()
        .iter()
        .map(|&t| {
            let mut row = vec![t];
            row.extend(packets.iter().map(|p| psi_closed_form(p, t).norm_sqr()));
            row
        })
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(
        &args.out.join(format!("{stem}_time.csv")),
        &header_refs,
        &rows,
    )
}

enum SweepQuantity {
    DeltaT,
    Product,
}

fn run_fig_sweep(args: FigSweep, stem: &str, quantity: SweepQuantity) -> Result<(), CliError> {
    if !(args.alpha_step > 0.0) || !(args.alpha_max >= args.alpha_min) {
        return Err(CliError::Usage(
            "--alpha-min/--alpha-max/--alpha-step: empty or descending sweep".into(),
        ));
    }
    if args.alpha_min < 2.0 {
        return Err(CliError::Usage(format!(
            "--alpha-min: the uncertainty chain requires alpha >= 2, got {}",
            args.alpha_min
        )));
    }
    let steps = ((args.alpha_max - args.alpha_min) / args.alpha_step).floor() as usize;
    let mut rows = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let alpha = args.alpha_min + args.alpha_step * i as f64;
        let mut row = vec![alpha];
        for n in [0u32, 3] {
            let mode = ModeSpec::new(n, alpha, args.omega0)?;
            let value = match quantity {
                SweepQuantity::DeltaT => {
                    time_moments(&PacketSpec::new(mode, 0.0)?)?.var.sqrt()
                }
                SweepQuantity::Product => uncertainty_report(&mode, 0.0)?.product,
            };
            row.push(value);
        }
        rows.push(row);
    }
    let header = match quantity {
        SweepQuantity::DeltaT => ["alpha", "delta_t_n0", "delta_t_n3"],
        SweepQuantity::Product => ["alpha", "product_n0", "product_n3"],
    };
    write_csv(&args.out.join(format!("{stem}.csv")), &header, &rows)
}

fn run_fig_arrival(args: FigArrival, stem: &str, default_alpha: f64) -> Result<(), CliError> {
    let alpha = args.alpha.unwrap_or(default_alpha);
    let direction = Direction::from_sign(args.s).map_err(CliError::from)?;
    let detector = ModeSpec::new(args.n, alpha, args.omega0)?;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); args.m as usize + 1];
    coeffs[args.m as usize] = Complex64::new(1.0, 0.0);
    let state = StateCoefficients::new(coeffs, alpha, args.omega0)?;

    // The grid is given in the dimensionless lag u = omega0 (tau - s x).
    let lag_grid = parse_grid(&args.grid, "--grid")?;
    let tau_points: Vec<f64> = lag_grid
        .points()
        .iter()
        .map(|&u| direction.sign() * args.x + u / args.omega0)
        .collect();
    let tau_grid = Grid1D::new(tau_points).map_err(CliError::from)?;
    let densities = toa_density_scan(&detector, args.x, direction, &state, &tau_grid)?;
    let rows: Vec<Vec<f64>> = tau_grid
        .points()
        .iter()
        .zip(&densities)
        .map(|(&tau, &d)| vec![tau, d])
        .collect();
    write_csv(
        &args.out.join(format!("{stem}.csv")),
        &["tau", "density"],
        &rows,
    )
}

fn run_modes(args: ModesArgs) -> Result<(), CliError> {
    let mode = ModeSpec::new(args.n, args.alpha, args.omega0)?;
    let packet = PacketSpec::new(mode, args.tau)?;
    let grid = parse_grid(&args.grid, "--grid")?;
    let rows: Vec<Vec<f64>> = grid
        .points()
        .iter()
        .map(|&w| {
            let v = packet.eval_energy(w);
            vec![w, mode.eval_energy(w), v.re, v.im]
        })
        .collect();
    write_csv(&args.out, &["omega", "phi", "packet_re", "packet_im"], &rows)
}

fn run_spectrum(args: SpectrumArgs) -> Result<(), CliError> {
    let s = spectrum_truncated(args.nmax, args.alpha, args.omega0)?;
    let rows: Vec<Vec<f64>> = s
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &e)| vec![i as f64, e])
        .collect();
    write_csv(&args.out, &["index", "eigenvalue"], &rows)
}

fn run_uncertainty(args: UncertaintyArgs) -> Result<(), CliError> {
    let mode = ModeSpec::new(args.n, args.alpha, args.omega0)?;
    let r = uncertainty_report(&mode, args.tau)?;
    let mut residuals = serde_json::Map::new();
    for (k, v) in &r.oracle_residuals {
        residuals.insert(k.clone(), serde_json::json!(v));
    }
    let report = serde_json::json!({
        "n": args.n,
        "alpha": args.alpha,
        "omega0": args.omega0,
        "tau": args.tau,
        "mean_h": r.mean_h,
        "second_h": r.second_h,
        "var_h": r.var_h,
        "delta_h": r.var_h.sqrt(),
        "mean_t": r.mean_t,
        "second_t": r.second_t,
        "var_t": r.var_t,
        "delta_t": r.var_t.sqrt(),
        "product": r.product,
        "residuals": serde_json::Value::Object(residuals),
        "version": env!("CARGO_PKG_VERSION"),
    });
    write_json(&args.out, &report)
}

fn run_arrival(args: ArrivalArgs) -> Result<(), CliError> {
    let direction = Direction::from_sign(args.s).map_err(CliError::from)?;
    let detector = ModeSpec::new(args.n, args.alpha, args.omega0)?;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); args.m as usize + 1];
    coeffs[args.m as usize] = Complex64::new(1.0, 0.0);
    let state = StateCoefficients::new(coeffs, args.alpha, args.omega0)?;
    let tau_grid = parse_grid(&args.grid, "--grid")?;

    use timemodes::arrival::{toa_amplitude_state, ArrivalQuery};
    let mut rows = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid.points() {
        let q = ArrivalQuery::new(PacketSpec::new(detector, tau)?, args.x, direction)?;
        let a = toa_amplitude_state(&q, &state)?;
        rows.push(vec![tau, a.re, a.im, a.norm_sqr()]);
    }
    write_csv(&args.out, &["tau", "re", "im", "density"], &rows)
}

fn run_verify_cmd(args: VerifyArgs) -> Result<(), CliError> {
    if !(args.omega0 > 0.0) || !args.omega0.is_finite() {
        return Err(CliError::Usage(format!(
            "--omega0: must be positive, got {}",
            args.omega0
        )));
    }
    let outcome = verify::run_verify(args.alpha, args.nmax, args.omega0)?;
    write_json(&args.out, &outcome.report)?;
    if outcome.pass {
        Ok(())
    } else {
        Err(CliError::Tolerance(
            "one or more residuals exceeded their documented tolerance".into(),
        ))
    }
}
