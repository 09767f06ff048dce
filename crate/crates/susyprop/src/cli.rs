//! Command-line front end: configures a seed-plus-transform instance, emits
//! deterministic CSV data for the built-in figure parameter sets, and runs
//! the verification suite.
//!
//! Exit codes: `0` success, `2` invalid configuration, `3` singular
//! transform, `4` verification failure, `1` internal numeric failure.

use crate::intertwine::{IntertwinedSystem, TransformKind};
use crate::numerics::{self, Grid};
use crate::ritus::{self, DensityProfile, Matrix2};
use crate::seeds::{FieldConfig, Sigma};
use crate::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fmt::Write as _;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SINGULAR: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

// ---------------------------------------------------------------------------
// Argument surface
// ---------------------------------------------------------------------------

#[derive(Parser, Debug)]
#[command(
    name = "susyprop",
    version,
    about = "SUSY-generated magnetic field profiles, spectra, and Dirac \
             density data as CSV"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Emit x, V0_tilde, V1, B0, B1 over the grid.
    Profile(CommonArgs),
    /// Emit n, k_seed_plus, k_transformed up to --nmax.
    Spectrum(CommonArgs),
    /// Emit per-mode charge or current density columns over the grid.
    Density(DensityArgs),
    /// Run the invariant suite and report each residual.
    Verify(VerifyArgs),
    /// Scan alpha -> 0 at fixed omega and report convergence errors.
    LimitScan(LimitScanArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeedArg {
    Uniform,
    Exponential,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig7,
    Fig8,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum WhichDensity {
    Charge,
    Current,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Seed field kind.
    #[arg(long, value_enum)]
    pub seed: Option<SeedArg>,
    /// Field amplitude B0 > 0.
    #[arg(long = "B0")]
    pub b0: Option<f64>,
    /// Decay rate of the exponential seed (required with it).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Transverse momentum p2.
    #[arg(long, allow_hyphen_values = true)]
    pub p2: Option<f64>,
    /// Fermion mass (signed; enters density coefficients only).
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<f64>,
    /// Sign convention for sgn(m) at m = 0: +1 or -1.
    #[arg(long, allow_hyphen_values = true)]
    pub msign: Option<i8>,
    /// Factorization energy epsilon1 <= 0.
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon1: Option<f64>,
    /// Deformation parameter nu1.
    #[arg(long, allow_hyphen_values = true)]
    pub nu1: Option<f64>,
    /// Truncation level for spectra and residual suites.
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Grid window lower edge.
    #[arg(long, allow_hyphen_values = true)]
    pub xmin: Option<f64>,
    /// Grid window upper edge.
    #[arg(long, allow_hyphen_values = true)]
    pub xmax: Option<f64>,
    /// Grid size (>= 64).
    #[arg(long)]
    pub npoints: Option<usize>,
    /// Built-in figure parameter set; overrides individual flags (warns).
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Significant digits for CSV values.
    #[arg(long, default_value_t = 12)]
    pub digits: usize,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Which density family to emit.
    #[arg(long, value_enum, default_value_t = WhichDensity::Charge)]
    pub which: WhichDensity,
    /// Excited transformed levels (n >= 1), one column each.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3])]
    pub levels: Vec<usize>,
    /// Spatial current component (1 or 2).
    #[arg(long, default_value_t = 2)]
    pub ell: u8,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Test hook: corrupt the spectrum rule so the named check must fail.
    #[arg(long, hide = true)]
    pub corrupt_spectrum: bool,
}

#[derive(Args, Debug)]
pub struct LimitScanArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Strictly decreasing positive alpha values.
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.05, 0.025])]
    pub alphas: Vec<f64>,
}

// ---------------------------------------------------------------------------
// Resolved run configuration
// ---------------------------------------------------------------------------

/// Everything a command needs: the physics configuration plus grid,
/// truncation, output, and formatting choices.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub config: FieldConfig,
    pub grid: Grid,
    pub n_max: usize,
    pub out: Option<PathBuf>,
    /// Significant digits for CSV values.
    pub precision: usize,
}

impl RunConfig {
    /// Signed fermion mass (`m_sign` carries the sign at `m = 0`).
    pub fn signed_m(&self) -> f64 {
        self.config.m * f64::from(self.config.m_sign)
    }
}

fn preset_run(p: Preset) -> RunConfig {
    // epsilon1 = -k_1^+/5 for the small-alpha family.
    let exp_family = |alpha: f64| {
        let q2 = 1.0 + 0.5 / alpha;
        let eps1 = -alpha * (2.0 * q2 - alpha) / 5.0;
        FieldConfig::exponential(0.5, alpha, 1.0, eps1, -1.5)
    };
    let (config, window) = match p {
        Preset::Fig1 => (FieldConfig::uniform(0.5, 1.0, -0.2, 0.0), (-8.0, 4.0)),
        Preset::Fig2 => (
            FieldConfig::exponential(1.0, 1.0, 5.0, -5.5, -1.5),
            (-3.0, 6.0),
        ),
        Preset::Fig3 => (FieldConfig::uniform(0.5, 1.0, -0.2, 0.0), (-8.0, 4.0)),
        Preset::Fig4 => (
            FieldConfig::exponential(1.0, 1.0, 5.0, -5.5, -1.5),
            (-3.0, 8.0),
        ),
        Preset::Fig5 => (exp_family(0.05), (-10.0, 6.0)),
        Preset::Fig7 => (exp_family(0.11), (-12.0, 6.0)),
        Preset::Fig8 => (exp_family(0.11), (-12.0, 6.0)),
    };
    RunConfig {
        config,
        grid: Grid {
            x_min: window.0,
            x_max: window.1,
            n_points: 257,
        },
        n_max: 5,
        out: None,
        precision: 12,
    }
}

fn preset_name(p: Preset) -> &'static str {
    match p {
        Preset::Fig1 => "fig1",
        Preset::Fig2 => "fig2",
        Preset::Fig3 => "fig3",
        Preset::Fig4 => "fig4",
        Preset::Fig5 => "fig5",
        Preset::Fig7 => "fig7",
        Preset::Fig8 => "fig8",
    }
}

/// Turns the flag surface into a validated [`RunConfig`]. Returns warnings
/// (override notices plus configuration advisories) for the caller to print
/// on stderr.
pub fn resolve(args: &CommonArgs) -> Result<(RunConfig, Vec<String>)> {
    let mut warnings = Vec::new();
    let mut run = if let Some(p) = args.preset {
        let name = preset_name(p);
        let overridden: &[(&str, bool)] = &[
            ("--seed", args.seed.is_some()),
            ("--B0", args.b0.is_some()),
            ("--alpha", args.alpha.is_some()),
            ("--p2", args.p2.is_some()),
            ("--m", args.m.is_some()),
            ("--msign", args.msign.is_some()),
            ("--epsilon1", args.epsilon1.is_some()),
            ("--nu1", args.nu1.is_some()),
            ("--xmin", args.xmin.is_some()),
            ("--xmax", args.xmax.is_some()),
            ("--npoints", args.npoints.is_some()),
        ];
        for (flag, given) in overridden {
            if *given {
                warnings.push(format!(
                    "preset {name} pins the figure parameters; ignoring {flag}"
                ));
            }
        }
        let mut run = preset_run(p);
        if let Some(n) = args.nmax {
            run.n_max = n;
        }
        run
    } else {
        let seed = args.seed.unwrap_or(SeedArg::Uniform);
        let b0 = args.b0.unwrap_or(0.5);
        let p2 = args.p2.unwrap_or(1.0);
        let epsilon1 = args.epsilon1.unwrap_or(-0.2);
        let config = match seed {
            SeedArg::Uniform => {
                if args.alpha.is_some() {
                    warnings.push("--alpha is ignored for the uniform seed".into());
                }
                FieldConfig::uniform(b0, p2, epsilon1, args.nu1.unwrap_or(0.0))
            }
            SeedArg::Exponential => {
                let alpha = args
                    .alpha
                    .ok_or_else(|| Error::Config("the exponential seed requires --alpha".into()))?;
                FieldConfig::exponential(b0, alpha, p2, epsilon1, args.nu1.unwrap_or(-1.5))
            }
        };
        let (dx_min, dx_max) = match seed {
            SeedArg::Uniform => (-8.0, 4.0),
            SeedArg::Exponential => (-3.0, 6.0),
        };
        RunConfig {
            config,
            grid: Grid {
                x_min: args.xmin.unwrap_or(dx_min),
                x_max: args.xmax.unwrap_or(dx_max),
                n_points: args.npoints.unwrap_or(257),
            },
            n_max: args.nmax.unwrap_or(5),
            out: None,
            precision: 12,
        }
    };
    // Signed mass and the sgn(0) convention flag.
    let m = args
        .m
        .unwrap_or(run.config.m * f64::from(run.config.m_sign));
    run.config.m = m.abs();
    run.config.m_sign = match args.msign {
        Some(s) => s,
        None if m < 0.0 => -1,
        None => run.config.m_sign,
    };
    run.out = args.out.clone();
    if !(3..=17).contains(&args.digits) {
        return Err(Error::Config(format!(
            "--digits must lie in 3..=17, got {}",
            args.digits
        )));
    }
    run.precision = args.digits;
    // Grid checks (the Grid type itself enforces >= 16; figures need more).
    let g = Grid::new(run.grid.x_min, run.grid.x_max, run.grid.n_points)?;
    if g.n_points < 64 {
        return Err(Error::Config(format!(
            "figure output needs --npoints >= 64, got {}",
            g.n_points
        )));
    }
    // Reject invalid physics before any computation.
    warnings.extend(run.config.validate()?);
    Ok((run, warnings))
}

// ---------------------------------------------------------------------------
// CSV assembly
// ---------------------------------------------------------------------------

/// One CSV value at `digits` significant digits, scientific notation.
fn fmt_val(x: f64, digits: usize) -> String {
    format!("{:.*e}", digits - 1, x)
}

fn config_header(cmd: &str, run: &RunConfig) -> String {
    let c = &run.config;
    let mut s = String::new();
    let _ = writeln!(s, "# susyprop {cmd}");
    let _ = writeln!(s, "# seed = {}", c.seed_kind);
    let _ = writeln!(s, "# B0 = {}", c.b0);
    let _ = writeln!(s, "# e_charge = {}", c.e_charge);
    let _ = writeln!(s, "# alpha = {}", c.alpha);
    let _ = writeln!(s, "# p2 = {}", c.p2);
    let _ = writeln!(s, "# m = {}", c.m);
    let _ = writeln!(s, "# m_sign = {}", c.m_sign);
    let _ = writeln!(s, "# epsilon1 = {}", c.epsilon1);
    let _ = writeln!(s, "# nu1 = {}", c.nu1);
    let _ = writeln!(s, "# nmax = {}", run.n_max);
    let _ = writeln!(
        s,
        "# grid = [{}, {}] x {}",
        run.grid.x_min, run.grid.x_max, run.grid.n_points
    );
    let _ = writeln!(s, "# precision = {}", run.precision);
    s
}

fn system_for(run: &RunConfig) -> Result<IntertwinedSystem> {
    // Screen on (at least) the output window so every emitted profile value
    // is guaranteed nonsingular.
    IntertwinedSystem::with_screen_window(run.config, (run.grid.x_min, run.grid.x_max))
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

/// Columns `x, V0_tilde, V1, B0, B1`.
pub fn cmd_profile(run: &RunConfig) -> Result<String> {
    let sys = system_for(run)?;
    let d = run.precision;
    let mut s = config_header("profile", run);
    let _ = writeln!(s, "x,V0_tilde,V1,B0,B1");
    for x in run.grid.points() {
        let vt0 = sys.shifted_potential(x);
        let v1 = sys.partner_potential_v1(x)?;
        let b0 = sys.seed().seed_field_b0(x);
        let b1 = sys.field_b1(x)?;
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            fmt_val(x, d),
            fmt_val(vt0, d),
            fmt_val(v1, d),
            fmt_val(b0, d),
            fmt_val(b1, d)
        );
    }
    Ok(s)
}

/// Columns `n, k_seed_plus, k_transformed`.
pub fn cmd_spectrum(run: &RunConfig) -> Result<String> {
    let sys = system_for(run)?;
    let d = run.precision;
    let mut s = config_header("spectrum", run);
    let _ = writeln!(s, "n,k_seed_plus,k_transformed");
    for n in 0..=run.n_max {
        let ks = sys.seed().seed_eigenvalue(n, Sigma::Plus)?;
        let kt = sys.transformed_spectrum(n)?;
        let _ = writeln!(s, "{n},{},{}", fmt_val(ks, d), fmt_val(kt, d));
    }
    Ok(s)
}

/// Ground column plus one column per requested excited level; the spectral
/// coefficients and the symbolic prefactor go into header comments so the
/// numeric columns stay pure profiles.
pub fn cmd_density(
    run: &RunConfig,
    which: WhichDensity,
    levels: &[usize],
    ell: u8,
) -> Result<String> {
    if levels.contains(&0) {
        return Err(Error::Config(
            "--levels lists excited levels (n >= 1); the ground column is \
             always present"
                .into(),
        ));
    }
    let sys = system_for(run)?;
    let d = run.precision;
    let m = run.signed_m();
    let p2 = run.config.p2;
    let tag = match which {
        WhichDensity::Charge => "rho",
        WhichDensity::Current => "j",
    };
    let mut profiles: Vec<(String, DensityProfile)> = Vec::new();
    let ground = match which {
        WhichDensity::Charge => ritus::charge_density_mode(&sys, 0, p2, m, run.grid)?,
        WhichDensity::Current => ritus::current_density_mode(&sys, 0, p2, m, run.grid, ell)?,
    };
    profiles.push((format!("{tag}_0"), ground));
    for &n in levels {
        let mode = match which {
            WhichDensity::Charge => ritus::charge_density_mode(&sys, n, p2, m, run.grid)?,
            WhichDensity::Current => ritus::current_density_mode(&sys, n, p2, m, run.grid, ell)?,
        };
        profiles.push((format!("{tag}_{n}"), mode));
    }
    let mut s = config_header("density", run);
    for (name, mode) in &profiles {
        let _ = writeln!(
            s,
            "# column {name}: coefficient = {}, prefactor = {}",
            fmt_val(mode.coefficient, d),
            mode.prefactor
        );
    }
    let names: Vec<&str> = profiles.iter().map(|(n, _)| n.as_str()).collect();
    let _ = writeln!(s, "x,{}", names.join(","));
    for (i, x) in run.grid.points().into_iter().enumerate() {
        let _ = write!(s, "{}", fmt_val(x, d));
        for (_, mode) in &profiles {
            let _ = write!(s, ",{}", fmt_val(mode.values[i], d));
        }
        s.push('\n');
    }
    Ok(s)
}

/// Columns `alpha, err_k, err_w0, err_v0, rho0_sup_diff, rho0_rel_diff`.
pub fn cmd_limit_scan(run: &RunConfig, alphas: &[f64]) -> Result<String> {
    let report = ritus::limit_scan_alpha(run.config, alphas, run.n_max)?;
    let d = run.precision;
    let mut s = config_header("limit-scan", run);
    let _ = writeln!(s, "# omega = {}", report.omega);
    let _ = writeln!(
        s,
        "# seed error window = [{}, {}]",
        report.seed_window.0, report.seed_window.1
    );
    let _ = writeln!(
        s,
        "# rho0 window = [{}, {}]",
        report.rho_window.0, report.rho_window.1
    );
    let _ = writeln!(s, "alpha,err_k,err_w0,err_v0,rho0_sup_diff,rho0_rel_diff");
    for r in &report.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            fmt_val(r.alpha, d),
            fmt_val(r.err_k, d),
            fmt_val(r.err_w0, d),
            fmt_val(r.err_v0, d),
            fmt_val(r.rho0_sup_diff, d),
            fmt_val(r.rho0_rel_diff, d)
        );
    }
    Ok(s)
}

// ---------------------------------------------------------------------------
// Verification suite
// ---------------------------------------------------------------------------

/// One named invariant with its measured residual.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub measured: f64,
    pub tol: f64,
    pub pass: bool,
}

impl CheckResult {
    fn against_tol(name: &'static str, measured: f64, tol: f64) -> Self {
        CheckResult {
            name,
            measured,
            tol,
            pass: measured.is_finite() && measured <= tol,
        }
    }
}

fn sup<F: FnMut(f64) -> Result<f64>>(xs: &[f64], mut f: F) -> Result<f64> {
    let mut m = 0.0_f64;
    for &x in xs {
        m = m.max(f(x)?.abs());
    }
    Ok(m)
}

fn grid_points(window: (f64, f64), n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| window.0 + (window.1 - window.0) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Deterministic 64-bit LCG mapped onto `[0, 1)`.
struct Lcg(u64);

impl Lcg {
    fn next_unit(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Runs every invariant check that applies to `run` and returns the list.
/// `corrupt_spectrum` deliberately breaks the spectrum rule (negative
/// control for the reporting path).
pub fn run_verify(run: &RunConfig, corrupt_spectrum: bool) -> Result<Vec<CheckResult>> {
    let sys = system_for(run)?;
    let seed = sys.seed();
    let window = (run.grid.x_min, run.grid.x_max);
    let xs_full = grid_points(window, 1024);
    let xs_sub = grid_points(window, 128);
    let mut out = Vec::new();

    // Highest seed level that exists (exponential towers are finite).
    let seed_top = match seed.n_max() {
        Some(nm) => run.n_max.min(nm),
        None => run.n_max,
    };
    let tower = sys.kind() == TransformKind::LevelAddition;

    // --- spectrum rule -----------------------------------------------------
    if tower {
        let bias = if corrupt_spectrum { 1e-6 } else { 0.0 };
        let mut worst = sys.transformed_spectrum(0)?.abs();
        for n in 0..=seed_top {
            let ks = seed.seed_eigenvalue(n, Sigma::Plus)?;
            let kt = sys.transformed_spectrum(n + 1)?;
            worst = worst.max((kt - (ks - sys.epsilon1()) + bias).abs());
        }
        out.push(CheckResult::against_tol("spectrum-rule", worst, 1e-12));
    }

    // --- Riccati identity for W1 (analytic derivative) ----------------------
    let vt0_sup = sup(&xs_full, |x| Ok(sys.shifted_potential(x)))?.max(1.0);
    let riccati = sup(&xs_full, |x| {
        let w1 = sys.superpotential_w1(x)?;
        let w1p = sys.superpotential_w1_deriv(x)?;
        Ok(w1 * w1 + w1p - sys.shifted_potential(x))
    })?;
    out.push(CheckResult::against_tol(
        "riccati-w1",
        riccati / vt0_sup,
        1e-8,
    ));

    // --- u1 solves the shifted equation (independent RK4 solution) ---------
    if tower {
        let dev = numerics::ode_log_deviation(
            |x| sys.shifted_potential(x),
            |x| sys.ln_u1(x),
            |x| sys.superpotential_w1(x),
            window,
            xs_sub.len(),
        )?;
        out.push(CheckResult::against_tol("u1-shifted-ode", dev, 1e-8));
    }

    // --- ladder annihilation of the added ground level ----------------------
    if tower {
        let gw = sys.window_for_transformed(0)?;
        let xs = grid_points(gw, 64);
        let f0_sup = sup(&xs, |x| sys.transformed_eigenfunction(0, x))?;
        let mut worst = 0.0_f64;
        for &x in &xs {
            let f = sys.transformed_eigenfunction(0, x)?;
            let (fp, _) = numerics::first_derivative(
                |t| sys.transformed_eigenfunction(0, t).unwrap_or(f64::NAN),
                x,
                numerics::default_fd_step(x),
            )?;
            worst = worst.max((fp + sys.superpotential_w1(x)? * f).abs());
        }
        out.push(CheckResult::against_tol(
            "ladder-annihilation",
            worst / f0_sup,
            1e-8,
        ));
    }

    // --- transformed states solve the partner equation ----------------------
    if tower {
        let mut worst = 0.0_f64;
        for n in 1..=3.min(seed_top + 1) {
            let k = sys.transformed_spectrum(n)?;
            let w = sys.window_for_transformed(n)?;
            let xs = grid_points(w, 48);
            let f_sup = sup(&xs, |x| sys.transformed_eigenfunction(n, x))?;
            for &x in &xs {
                let f = sys.transformed_eigenfunction(n, x)?;
                let (d2, _) = numerics::second_derivative(
                    |t| sys.transformed_eigenfunction(n, t).unwrap_or(f64::NAN),
                    x,
                    numerics::default_fd_step(x),
                )?;
                let res = (-d2 + (sys.partner_potential_v1(x)? - k) * f).abs();
                worst = worst.max(res / ((1.0 + k) * f_sup));
            }
        }
        out.push(CheckResult::against_tol("intertwining-ode", worst, 1e-5));
    }

    // --- orthonormality -----------------------------------------------------
    let gram_top = seed_top.min(5);
    {
        let fns: Vec<Box<dyn Fn(f64) -> f64>> = (0..=gram_top)
            .map(|n| {
                let f: Box<dyn Fn(f64) -> f64> =
                    Box::new(move |x| seed.seed_eigenfunction(n, Sigma::Plus, x).unwrap_or(0.0));
                f
            })
            .collect();
        let refs: Vec<&dyn Fn(f64) -> f64> = fns.iter().map(|b| b.as_ref()).collect();
        let gw = seed.window_for_state(gram_top, Sigma::Plus)?;
        let g = numerics::gram_matrix(&refs, gw)?;
        let mut worst = 0.0_f64;
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - expect).abs());
            }
        }
        out.push(CheckResult::against_tol("gram-seed", worst, 1e-6));
    }
    if tower {
        let top = (seed_top + 1).min(5);
        let fns: Vec<Box<dyn Fn(f64) -> f64>> = (0..=top)
            .map(|n| {
                let s = &sys;
                let f: Box<dyn Fn(f64) -> f64> =
                    Box::new(move |x| s.transformed_eigenfunction(n, x).unwrap_or(0.0));
                f
            })
            .collect();
        let refs: Vec<&dyn Fn(f64) -> f64> = fns.iter().map(|b| b.as_ref()).collect();
        let mut gw = sys.window_for_transformed(0)?;
        for n in 1..=top {
            let w = sys.window_for_transformed(n)?;
            gw = (gw.0.min(w.0), gw.1.max(w.1));
        }
        let g = numerics::gram_matrix(&refs, gw)?;
        let mut worst = 0.0_f64;
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - expect).abs());
            }
        }
        out.push(CheckResult::against_tol("gram-transformed", worst, 1e-6));
    }

    // --- density structure ---------------------------------------------------
    if tower {
        let m = run.signed_m();
        let p2 = run.config.p2;
        let mut min_val = f64::INFINITY;
        for n in 0..=2.min(seed_top) {
            let mode = ritus::charge_density_mode(&sys, n, p2, m, run.grid)?;
            for &v in &mode.values {
                min_val = min_val.min(v);
            }
        }
        out.push(CheckResult {
            name: "charge-positivity",
            measured: min_val,
            tol: 0.0,
            pass: min_val >= 0.0,
        });

        let gw1 = sys.window_for_transformed(1)?;
        let sw0 = seed.window_for_state(0, Sigma::Plus)?;
        let iw = (gw1.0.min(sw0.0), gw1.1.max(sw0.1));
        let total = numerics::integrate(
            |x| {
                let f1 = sys.transformed_eigenfunction(1, x).unwrap_or(0.0);
                let f0 = seed.seed_eigenfunction(0, Sigma::Plus, x).unwrap_or(0.0);
                f1 * f1 + f0 * f0
            },
            iw,
            1e-9,
        )?;
        out.push(CheckResult::against_tol(
            "charge-mode-integral",
            (total - 2.0).abs(),
            1e-6,
        ));

        let j0 = ritus::current_density_mode(&sys, 0, p2, m, run.grid, 2)?;
        let j0_max = j0.values.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
        out.push(CheckResult {
            name: "ground-current-zero",
            measured: j0_max,
            tol: 0.0,
            pass: j0_max == 0.0,
        });

        let g0w = sys.window_for_transformed(0)?;
        let norm = numerics::integrate(
            |x| {
                let f = sys.transformed_eigenfunction(0, x).unwrap_or(0.0);
                f * f
            },
            g0w,
            1e-10,
        )?;
        out.push(CheckResult::against_tol(
            "ground-normalization",
            (norm - 1.0).abs(),
            1e-6,
        ));
    }

    // --- Dirac algebra and propagator ----------------------------------------
    let report = ritus::dirac_trace_identities();
    out.push(CheckResult::against_tol(
        "dirac-algebra",
        report.max_deviation(),
        1e-15,
    ));
    {
        let mut rng = Lcg(0x5d_ee_7e_11);
        let mut worst = 0.0_f64;
        let mut produced = 0usize;
        while produced < 100 {
            let p0 = 6.0 * rng.next_unit() - 3.0;
            let k = 5.0 * rng.next_unit();
            let m = 3.0 * rng.next_unit() - 1.5;
            if (p0 * p0 - k - m * m).abs() < 1e-3 {
                continue;
            }
            let s = ritus::propagator_momentum(p0, k, m)?;
            let d = ritus::gamma_dot_pbar(p0, k).sub(&Matrix2::identity().scale(m.into()));
            worst = worst.max(d.mul(&s).sub(&Matrix2::identity()).sup_norm());
            produced += 1;
        }
        out.push(CheckResult::against_tol("propagator-inverse", worst, 1e-12));
    }

    // --- B1 against the derivative of W1 -------------------------------------
    {
        let e = run.config.e_charge;
        let b1_sup = sup(&xs_sub, |x| sys.field_b1(x))?.max(1e-2);
        let mut worst = 0.0_f64;
        for &x in xs_sub.iter().step_by(2) {
            let (w1p, _) = numerics::first_derivative(
                |t| sys.superpotential_w1(t).unwrap_or(f64::NAN),
                x,
                numerics::default_fd_step(x),
            )?;
            worst = worst.max((sys.field_b1(x)? - w1p / e).abs());
        }
        out.push(CheckResult::against_tol("b1-from-w1", worst / b1_sup, 1e-6));
    }

    Ok(out)
}

/// Formats the verify report; one line per check plus a summary.
pub fn verify_report(checks: &[CheckResult]) -> (String, bool) {
    let mut s = String::new();
    let mut passed = 0usize;
    for c in checks {
        let _ = writeln!(
            s,
            "{} {:<24} measured {:>12} tol {:>8}",
            if c.pass { "ok  " } else { "FAIL" },
            c.name,
            format!("{:.3e}", c.measured),
            format!("{:.1e}", c.tol),
        );
        if c.pass {
            passed += 1;
        }
    }
    let all = passed == checks.len();
    let _ = writeln!(s, "verify: {passed}/{} checks passed", checks.len());
    (s, all)
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

/// What a command produced: report text, destination, and exit code.
pub struct RunOutcome {
    pub text: String,
    pub out: Option<PathBuf>,
    pub exit_code: i32,
}

/// Maps an error to the documented exit codes: user-input problems `2`,
/// singular transform `3`, internal numeric failures `1`.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Domain(_) | Error::Index(_) => EXIT_CONFIG,
        Error::SingularTransform(_) => EXIT_SINGULAR,
        _ => EXIT_INTERNAL,
    }
}

/// Executes a parsed command; warnings land on stderr immediately.
pub fn run_command(command: &Command) -> Result<RunOutcome> {
    let common = match command {
        Command::Profile(c) | Command::Spectrum(c) => c,
        Command::Density(d) => &d.common,
        Command::Verify(v) => &v.common,
        Command::LimitScan(l) => &l.common,
    };
    let (run, warnings) = resolve(common)?;
    for w in &warnings {
        eprintln!("susyprop: warning: {w}");
    }
    let (text, exit_code) = match command {
        Command::Profile(_) => (cmd_profile(&run)?, EXIT_OK),
        Command::Spectrum(_) => (cmd_spectrum(&run)?, EXIT_OK),
        Command::Density(d) => (cmd_density(&run, d.which, &d.levels, d.ell)?, EXIT_OK),
        Command::Verify(v) => {
            let checks = run_verify(&run, v.corrupt_spectrum)?;
            let (report, all) = verify_report(&checks);
            (report, if all { EXIT_OK } else { EXIT_VERIFY })
        }
        Command::LimitScan(l) => (cmd_limit_scan(&run, &l.alphas)?, EXIT_OK),
    };
    Ok(RunOutcome {
        text,
        out: run.out,
        exit_code,
    })
}

/// Binary entry point: parse, run, write, exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match run_command(&cli.command) {
        Ok(outcome) => {
            match &outcome.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &outcome.text) {
                        eprintln!("susyprop: cannot write {}: {e}", path.display());
                        return EXIT_INTERNAL;
                    }
                }
                None => print!("{}", outcome.text),
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("susyprop: {e}");
            exit_code_for(&e)
        }
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::SeedKind;

    fn common_defaults() -> CommonArgs {
        CommonArgs {
            seed: None,
            b0: None,
            alpha: None,
            p2: None,
            m: None,
            msign: None,
            epsilon1: None,
            nu1: None,
            nmax: None,
            xmin: None,
            xmax: None,
            npoints: None,
            preset: None,
            out: None,
            digits: 12,
        }
    }

    #[test]
    fn presets_pin_the_figure_parameters() {
        let mut args = common_defaults();
        args.preset = Some(Preset::Fig1);
        let (run, warnings) = resolve(&args).unwrap();
        assert_eq!(run.config.seed_kind, SeedKind::Uniform);
        assert_eq!(run.config.b0, 0.5);
        assert_eq!(run.config.p2, 1.0);
        assert_eq!(run.config.epsilon1, -0.2);
        assert_eq!(run.config.nu1, 0.0);
        assert_eq!((run.grid.x_min, run.grid.x_max), (-8.0, 4.0));
        assert!(warnings.is_empty());

        args.preset = Some(Preset::Fig2);
        let (run, _) = resolve(&args).unwrap();
        assert_eq!(run.config.seed_kind, SeedKind::Exponential);
        assert_eq!(run.config.alpha, 1.0);
        assert_eq!(run.config.p2, 5.0);
        assert_eq!(run.config.epsilon1, -5.5);
        assert_eq!(run.config.nu1, -1.5);

        args.preset = Some(Preset::Fig5);
        let (run, _) = resolve(&args).unwrap();
        assert_eq!(run.config.alpha, 0.05);
        // epsilon1 = -k_1^+/5 with q2 = 11.
        let k1 = 0.05 * (22.0 - 0.05);
        assert!((run.config.epsilon1 + k1 / 5.0).abs() < 1e-15);

        args.preset = Some(Preset::Fig7);
        let (run7, _) = resolve(&args).unwrap();
        assert_eq!(run7.config.alpha, 0.11);
        args.preset = Some(Preset::Fig8);
        let (run8, _) = resolve(&args).unwrap();
        assert_eq!(run8.config.alpha, run7.config.alpha);
    }

    #[test]
    fn preset_overrides_individual_flags_with_a_warning() {
        let mut args = common_defaults();
        args.preset = Some(Preset::Fig1);
        args.b0 = Some(2.0);
        args.xmin = Some(-20.0);
        let (run, warnings) = resolve(&args).unwrap();
        assert_eq!(run.config.b0, 0.5);
        assert_eq!(run.grid.x_min, -8.0);
        assert_eq!(warnings.len(), 2);
        assert!(warnings[0].contains("--B0"));
        assert!(warnings[1].contains("--xmin"));
    }

    #[test]
    fn forbidden_nu1_is_rejected_at_resolve_time() {
        let mut args = common_defaults();
        args.seed = Some(SeedArg::Exponential);
        args.alpha = Some(1.0);
        args.p2 = Some(5.0);
        args.epsilon1 = Some(-5.5);
        args.nu1 = Some(-0.5);
        assert!(matches!(resolve(&args), Err(Error::Config(_))));
    }

    #[test]
    fn exponential_seed_requires_alpha() {
        let mut args = common_defaults();
        args.seed = Some(SeedArg::Exponential);
        let err = resolve(&args).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("--alpha"));
    }

    #[test]
    fn signed_mass_splits_into_magnitude_and_flag() {
        let mut args = common_defaults();
        args.m = Some(-0.7);
        let (run, _) = resolve(&args).unwrap();
        assert_eq!(run.config.m, 0.7);
        assert_eq!(run.config.m_sign, -1);
        assert_eq!(run.signed_m(), -0.7);
        // Explicit msign wins at m = 0.
        let mut args = common_defaults();
        args.m = Some(0.0);
        args.msign = Some(-1);
        let (run, _) = resolve(&args).unwrap();
        assert_eq!(run.signed_m(), 0.0);
        assert_eq!(run.config.m_sign, -1);
    }

    #[test]
    fn small_grids_are_refused_for_figure_output() {
        let mut args = common_defaults();
        args.npoints = Some(32);
        assert!(matches!(resolve(&args), Err(Error::Config(_))));
    }

    #[test]
    fn value_formatting_is_significant_digits() {
        assert_eq!(fmt_val(0.5, 12), "5.00000000000e-1");
        assert_eq!(fmt_val(-11.0, 6), "-1.10000e1");
        assert_eq!(fmt_val(0.0, 4), "0.000e0");
    }

    #[test]
    fn spectrum_rows_match_the_closed_forms() {
        let mut args = common_defaults();
        args.preset = Some(Preset::Fig1);
        let (run, _) = resolve(&args).unwrap();
        let csv = cmd_spectrum(&run).unwrap();
        let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows[0], "n,k_seed_plus,k_transformed");
        assert!(rows[1].starts_with("0,0.00000000000e0,0.00000000000e0"));
        assert!(rows[2].starts_with("1,1.00000000000e0,2.00000000000e-1"));
        assert!(rows[3].starts_with("2,2.00000000000e0,1.20000000000e0"));
    }

    #[test]
    fn exponential_spectrum_row_one() {
        let mut args = common_defaults();
        args.preset = Some(Preset::Fig2);
        let (run, _) = resolve(&args).unwrap();
        let csv = cmd_spectrum(&run).unwrap();
        let row1 = csv
            .lines()
            .find(|l| l.starts_with("1,"))
            .expect("row for n = 1");
        assert_eq!(row1, "1,1.10000000000e1,5.50000000000e0");
    }

    #[test]
    fn profile_csv_is_finite_and_deterministic() {
        let mut args = common_defaults();
        args.preset = Some(Preset::Fig1);
        args.npoints = None;
        let (mut run, _) = resolve(&args).unwrap();
        run.grid = Grid::new(-8.0, 4.0, 65).unwrap();
        let a = cmd_profile(&run).unwrap();
        let b = cmd_profile(&run).unwrap();
        assert_eq!(a, b);
        assert!(!a.contains("NaN") && !a.contains("inf"));
        assert!(a.lines().any(|l| l == "x,V0_tilde,V1,B0,B1"));
    }

    #[test]
    fn degenerate_epsilon_gives_reflected_field_column() {
        let mut args = common_defaults();
        args.epsilon1 = Some(0.0);
        args.npoints = Some(65);
        let (run, _) = resolve(&args).unwrap();
        let csv = cmd_profile(&run).unwrap();
        for line in csv
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with('x'))
        {
            let cols: Vec<&str> = line.split(',').collect();
            let b0: f64 = cols[3].parse().unwrap();
            let b1: f64 = cols[4].parse().unwrap();
            assert!((b1 + b0).abs() < 1e-14, "B1 must equal -B0, got {b1}");
        }
    }

    #[test]
    fn density_header_records_coefficients_and_prefactors() {
        let mut args = common_defaults();
        args.preset = Some(Preset::Fig3);
        let (mut run, _) = resolve(&args).unwrap();
        run.grid = Grid::new(-8.0, 4.0, 65).unwrap();
        let csv = cmd_density(&run, WhichDensity::Charge, &[1, 2, 3], 2).unwrap();
        assert!(csv.contains("# column rho_0: coefficient = 1.00000000000e0, prefactor = pi e"));
        assert!(csv.contains("# column rho_1:"));
        let header = csv.lines().find(|l| l.starts_with("x,")).unwrap();
        assert_eq!(header, "x,rho_0,rho_1,rho_2,rho_3");
        // Current family: ground column present and zero, prefactor with i^l.
        let csv = cmd_density(&run, WhichDensity::Current, &[1], 2).unwrap();
        assert!(csv.contains("prefactor = -2 i^2 e pi"));
        let data: Vec<&str> = csv
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("x,"))
            .collect();
        for line in &data {
            let cols: Vec<&str> = line.split(',').collect();
            let j0: f64 = cols[1].parse().unwrap();
            assert_eq!(j0, 0.0);
        }
    }

    #[test]
    fn density_rejects_ground_in_levels() {
        let mut args = common_defaults();
        args.preset = Some(Preset::Fig3);
        let (run, _) = resolve(&args).unwrap();
        assert!(matches!(
            cmd_density(&run, WhichDensity::Charge, &[0, 1], 2),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn verify_passes_on_the_first_preset_and_corruption_fails_named() {
        let mut args = common_defaults();
        args.preset = Some(Preset::Fig1);
        let (run, _) = resolve(&args).unwrap();
        let checks = run_verify(&run, false).unwrap();
        let (report, all) = verify_report(&checks);
        assert!(all, "verify must pass on fig1:\n{report}");
        let checks = run_verify(&run, true).unwrap();
        let (report, all) = verify_report(&checks);
        assert!(!all);
        assert!(report.contains("FAIL spectrum-rule"));
        // Only the corrupted invariant fails.
        assert_eq!(checks.iter().filter(|c| !c.pass).count(), 1, "{report}");
    }

    #[test]
    fn exit_codes_map_error_kinds() {
        assert_eq!(exit_code_for(&Error::Config("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code_for(&Error::Domain("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code_for(&Error::Index("x".into())), EXIT_CONFIG);
        assert_eq!(
            exit_code_for(&Error::SingularTransform("x".into())),
            EXIT_SINGULAR
        );
        assert_eq!(exit_code_for(&Error::Tail("x".into())), EXIT_INTERNAL);
    }

    #[test]
    fn limit_scan_csv_has_one_row_per_alpha() {
        let mut args = common_defaults();
        args.seed = Some(SeedArg::Exponential);
        args.alpha = Some(0.1);
        args.b0 = Some(0.5);
        args.p2 = Some(1.0);
        args.epsilon1 = Some(-0.2);
        args.nu1 = Some(-1.5);
        args.nmax = Some(2);
        let (run, _) = resolve(&args).unwrap();
        let csv = cmd_limit_scan(&run, &[0.1]).unwrap();
        let rows: Vec<&str> = csv
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("alpha,"))
            .collect();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].starts_with("1.00000000000e-1,"));
    }
}
