//! Command-line front end: parameter reports, grid exports, period scans,
//! verification ledgers and limit reports.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid parameters,
//! 3 I/O error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{
    build_solution_params, period_lattice, period_matrix, reality_check, wave_vectors, PeriodLattice,
    RealityVerdict, SolutionParams, WaveVectors,
};
use crate::elliptic::{curve_integrals, CurveParams, EllipticConstants};
use crate::error::{Error, Result};
use crate::limits::{asymptotic_constants, AsymptoticConstants, DnWave, LimitKind};
use crate::solution::{sample_grid, GridSpec, SampledField};
use crate::verify::{
    field_residual, limit_case, limit_convergence, limit_distance, nls_residual, period_cell,
    split_step_check, symmetry_suite, Ledger, LedgerEntry, StencilOrder,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_PARAMS: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// `K2` offset applied by `--corrupt-k2`.
pub const K2_CORRUPTION: f64 = 0.1;

#[derive(Debug, Parser)]
#[command(name = "thetawave", version, about = "Two-phase theta-function solutions of the focusing NLS equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Curve constants, solution parameters, periods and h±.
    Params(Opts),
    /// Sample |p| on a grid and write CSV, JSON or a PGM heatmap.
    Grid(Opts),
    /// Periods and h± while `a` or `c` sweeps a range.
    Scan(Opts),
    /// Residual, split-step, symmetry and limit checks.
    Verify(Opts),
    /// Asymptotic against exact constants near a branch-point confluence.
    Limits(Opts),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Pgm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Vary {
    A,
    C,
}

fn parse_limit(s: &str) -> std::result::Result<LimitKind, String> {
    LimitKind::parse(s).ok_or_else(|| format!("unknown limit '{s}' (c_to_b, a_to_b, a_to_0)"))
}

/// Every option is optional so a config file can fill the gaps.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Opts {
    /// JSON file with any of these options; flags win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda0: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub z_re1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub z_im1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub z_re2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub z_im2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t1: Option<f64>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub nt: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also write Re p and Im p.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub complex: Option<bool>,
    /// Scanned parameter.
    #[arg(long, value_enum)]
    pub vary: Option<Vary>,
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_parser = parse_limit)]
    pub limit: Option<LimitKind>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Shift K2 by 0.1 before verifying.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub corrupt_k2: Option<bool>,
}

macro_rules! merge {
    ($flags:expr, $file:expr, $($f:ident),*) => {
        Opts { config: None, $($f: $flags.$f.or($file.$f)),* }
    };
}

impl Opts {
    fn merged(self) -> Result<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = fs::read_to_string(&path)?;
        let file: Opts = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidParams(format!("config {}: {e}", path.display())))?;
        Ok(merge!(
            self, file, lambda0, a, b, c, z_re1, z_im1, z_re2, z_im2, x0, x1, t0, t1, nx, nt, out,
            format, complex, vary, from, to, points, limit, eps, corrupt_k2
        ))
    }
}

/// Fully resolved options with defaults applied.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub curve: CurveParams,
    pub z: [Complex64; 2],
    /// Grid bounds; `None` means the period cell `[0, A₊/2] × [0, A₋/4]`.
    pub bounds: [Option<f64>; 4],
    pub nx: Option<usize>,
    pub nt: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub complex: bool,
    pub vary: Option<Vary>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub points: usize,
    pub limit: Option<LimitKind>,
    pub eps: f64,
    pub corrupt_k2: bool,
}

impl RunConfig {
    pub fn resolve(opts: Opts) -> Result<Self> {
        let o = opts.merged()?;
        let curve = CurveParams::new(
            o.lambda0.unwrap_or(0.0),
            o.a.unwrap_or(6.0),
            o.b.unwrap_or(8.0),
            o.c.unwrap_or(9.0),
        )?;
        let z = [
            Complex64::new(o.z_re1.unwrap_or(0.0), o.z_im1.unwrap_or(0.0)),
            Complex64::new(o.z_re2.unwrap_or(0.0), o.z_im2.unwrap_or(0.0)),
        ];
        if z.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidParams("initial phase must be finite".into()));
        }
        let eps = o.eps.unwrap_or(1e-4);
        if !(eps > 0.0 && eps <= 1e-2) {
            return Err(Error::InvalidParams(format!("eps must lie in (0, 1e-2], got {eps}")));
        }
        Ok(Self {
            curve,
            z,
            bounds: [o.x0, o.x1, o.t0, o.t1],
            nx: o.nx,
            nt: o.nt,
            out: o.out,
            format: o.format.unwrap_or(Format::Json),
            complex: o.complex.unwrap_or(false),
            vary: o.vary,
            from: o.from,
            to: o.to,
            points: o.points.unwrap_or(40),
            limit: o.limit,
            eps,
            corrupt_k2: o.corrupt_k2.unwrap_or(false),
        })
    }

    pub fn solution_params(&self) -> Result<SolutionParams> {
        let mut sp = build_solution_params(&self.curve, self.z)?;
        if self.corrupt_k2 {
            sp.k2 += K2_CORRUPTION;
        }
        Ok(sp)
    }

    pub fn grid(&self, sp: &SolutionParams) -> Result<GridSpec> {
        let [x0, x1, t0, t1] = self.bounds;
        GridSpec::new(
            x0.unwrap_or(0.0),
            x1.unwrap_or(sp.constants.a_plus / 2.0),
            t0.unwrap_or(0.0),
            t1.unwrap_or(sp.constants.a_minus / 4.0),
            self.nx.unwrap_or(101),
            self.nt.unwrap_or(101),
        )
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParams(_) | Error::Domain(_) | Error::ComplexPhaseRejected => EXIT_PARAMS,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_VERIFY,
    }
}

/// Parse `args` and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARAMS } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("thetawave: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Params(o) => {
            let cfg = RunConfig::resolve(o)?;
            emit_json(&cfg.out, &cmd_params(&cfg)?)?;
            Ok(EXIT_OK)
        }
        Command::Grid(o) => {
            let cfg = RunConfig::resolve(o)?;
            cmd_grid(&cfg)?;
            Ok(EXIT_OK)
        }
        Command::Scan(o) => {
            let cfg = RunConfig::resolve(o)?;
            let rows = cmd_scan(&cfg)?;
            match cfg.format {
                Format::Json => emit_json(&cfg.out, &rows)?,
                Format::Csv => emit_text(&cfg.out, &scan_csv(&rows))?,
                Format::Pgm => return Err(Error::InvalidParams("scan writes csv or json".into())),
            }
            Ok(EXIT_OK)
        }
        Command::Verify(o) => {
            let cfg = RunConfig::resolve(o)?;
            let report = cmd_verify(&cfg)?;
            emit_json(&cfg.out, &report)?;
            Ok(if report.passed { EXIT_OK } else { EXIT_VERIFY })
        }
        Command::Limits(o) => {
            let cfg = RunConfig::resolve(o)?;
            emit_json(&cfg.out, &cmd_limits(&cfg)?)?;
            Ok(EXIT_OK)
        }
    }
}

fn emit_text(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialise");
    text.push('\n');
    emit_text(out, &text)
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamsReport {
    pub curve: CurveParams,
    pub constants: EllipticConstants,
    pub solution: SolutionParams,
    pub x_period: f64,
    pub t_period: f64,
    pub t_prime: Option<f64>,
    pub lattice: PeriodLattice,
    pub wave_vectors: WaveVectors,
    /// `exp(-2π𝔟₋)` and `exp(-2π𝔟₊)`.
    pub h_minus: f64,
    pub h_plus: f64,
    pub reality: RealityVerdict,
}

pub fn cmd_params(cfg: &RunConfig) -> Result<ParamsReport> {
    let sp = cfg.solution_params()?;
    let lattice = period_lattice(&cfg.curve, &sp.constants)?;
    let b = period_matrix(&sp.constants)?;
    Ok(ParamsReport {
        curve: cfg.curve,
        constants: sp.constants,
        x_period: lattice.x,
        t_period: lattice.t,
        t_prime: lattice.t_prime,
        lattice,
        wave_vectors: wave_vectors(&cfg.curve, &sp.constants),
        h_minus: (-2.0 * std::f64::consts::PI * sp.frb_minus).exp(),
        h_plus: (-2.0 * std::f64::consts::PI * sp.frb_plus).exp(),
        reality: reality_check(cfg.z, &b),
        solution: sp,
    })
}

/// Sample the configured grid.
pub fn grid_field(cfg: &RunConfig) -> Result<SampledField> {
    let sp = cfg.solution_params()?;
    sample_grid(&cfg.grid(&sp)?, &sp)
}

pub fn grid_csv(field: &SampledField, complex: bool) -> String {
    let mut s = String::from(if complex { "x,t,abs_p,re_p,im_p\n" } else { "x,t,abs_p\n" });
    let g = &field.grid;
    for i in 0..g.nx {
        for j in 0..g.nt {
            let p = field.get(i, j);
            s.push_str(&format!("{},{},{}", fmt_f64(g.x(i)), fmt_f64(g.t(j)), fmt_f64(p.norm())));
            if complex {
                s.push_str(&format!(",{},{}", fmt_f64(p.re), fmt_f64(p.im)));
            }
            s.push('\n');
        }
    }
    s
}

#[derive(Debug, Serialize)]
struct GridJson<'a> {
    grid: &'a GridSpec,
    abs_p: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    re_p: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    im_p: Option<Vec<f64>>,
}

/// Min/max used to normalise a heatmap.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HeatmapSidecar {
    pub quantity: String,
    pub min: f64,
    pub max: f64,
    pub width: usize,
    pub height: usize,
    pub grid: GridSpec,
}

/// 8-bit P5 image: columns follow `x`, the top row is `t1`.
pub fn heatmap(field: &SampledField) -> (Vec<u8>, HeatmapSidecar) {
    let g = &field.grid;
    let (min, max) = (field.min_abs(), field.max_abs());
    let span = max - min;
    let mut bytes = format!("P5\n{} {}\n255\n", g.nx, g.nt).into_bytes();
    for r in 0..g.nt {
        let j = g.nt - 1 - r;
        for i in 0..g.nx {
            let v = field.get(i, j).norm();
            let level = if span > 0.0 { (255.0 * (v - min) / span).round() } else { 0.0 };
            bytes.push(level.clamp(0.0, 255.0) as u8);
        }
    }
    let sidecar = HeatmapSidecar {
        quantity: "abs_p".into(),
        min,
        max,
        width: g.nx,
        height: g.nt,
        grid: *g,
    };
    (bytes, sidecar)
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

pub fn cmd_grid(cfg: &RunConfig) -> Result<()> {
    let field = grid_field(cfg)?;
    match cfg.format {
        Format::Csv => emit_text(&cfg.out, &grid_csv(&field, cfg.complex)),
        Format::Json => {
            let pick = |f: fn(&Complex64) -> f64| field.values.iter().map(f).collect::<Vec<_>>();
            emit_json(
                &cfg.out,
                &GridJson {
                    grid: &field.grid,
                    abs_p: pick(|p| p.norm()),
                    re_p: cfg.complex.then(|| pick(|p| p.re)),
                    im_p: cfg.complex.then(|| pick(|p| p.im)),
                },
            )
        }
        Format::Pgm => {
            let out = cfg
                .out
                .as_ref()
                .ok_or_else(|| Error::InvalidParams("pgm output needs --out".into()))?;
            let (bytes, sidecar) = heatmap(&field);
            fs::write(out, bytes)?;
            emit_json(&Some(sidecar_path(out)), &sidecar)
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScanRow {
    pub value: f64,
    pub x_period: f64,
    pub t_period: f64,
    pub h_minus: f64,
    pub h_plus: f64,
}

/// Periods `X = A₊/2`, `T = A₋/4` and `h±` for one curve.
pub fn scan_point(curve: &CurveParams) -> Result<ScanRow> {
    let k = curve_integrals(curve)?;
    let tau = 2.0 * std::f64::consts::PI;
    Ok(ScanRow {
        value: f64::NAN,
        x_period: k.a_plus / 2.0,
        t_period: k.a_minus / 4.0,
        h_minus: (-tau * k.b_minus / k.a_minus).exp(),
        h_plus: (-tau * k.b_plus / k.a_plus).exp(),
    })
}

pub fn scan(base: &CurveParams, vary: Vary, from: f64, to: f64, points: usize) -> Result<Vec<ScanRow>> {
    if points == 0 || !from.is_finite() || !to.is_finite() {
        return Err(Error::InvalidParams("scan needs finite bounds and at least one point".into()));
    }
    let values: Vec<f64> = if points == 1 {
        vec![from]
    } else {
        (0..points)
            .map(|i| from + (to - from) * i as f64 / (points - 1) as f64)
            .collect()
    };
    values
        .iter()
        .map(|&v| {
            let curve = match vary {
                Vary::A => CurveParams { a: v, ..*base },
                Vary::C => CurveParams { c: v, ..*base },
            };
            curve.validate()?;
            Ok(ScanRow { value: v, ..scan_point(&curve)? })
        })
        .collect()
}

pub fn cmd_scan(cfg: &RunConfig) -> Result<Vec<ScanRow>> {
    let vary = cfg
        .vary
        .ok_or_else(|| Error::InvalidParams("scan needs --vary a|c".into()))?;
    let (Some(from), Some(to)) = (cfg.from, cfg.to) else {
        return Err(Error::InvalidParams("scan needs --from and --to".into()));
    };
    scan(&cfg.curve, vary, from, to, cfg.points)
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut s = String::from("value,X,T,h_minus,h_plus\n");
    for r in rows {
        let cells = [r.value, r.x_period, r.t_period, r.h_minus, r.h_plus].map(fmt_f64);
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub ledger: Ledger,
}

/// Split-step error limit at `dt = T/4000`.
pub const SPLIT_STEP_TOL: f64 = 1e-5;
pub const RESIDUAL_TOL: f64 = 1e-6;

fn record<T>(ledger: &mut Ledger, name: &str, result: Result<T>, f: impl FnOnce(&mut Ledger, T)) {
    match result {
        Ok(v) => f(ledger, v),
        Err(e) => {
            eprintln!("thetawave: {name}: {e}");
            ledger.push(LedgerEntry::flag(format!("{name}_error"), false, true));
        }
    }
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<VerifyReport> {
    let sp = cfg.solution_params()?;
    let mut ledger = Ledger::default();
    let n = cfg.nx.unwrap_or(128);

    let residual = period_cell(&sp, n).and_then(|g| nls_residual(&sp, &g, StencilOrder::Fourth));
    record(&mut ledger, "residual", residual, |l, r| {
        l.push(LedgerEntry::new("residual_norm", r.residual_norm, RESIDUAL_TOL, true));
        l.push(LedgerEntry::new("residual_order", (r.order_estimate - 4.0).abs(), 0.7, true));
    });

    // the evolution runs in the rest frame; the Galilean entry covers λ0 ≠ 0
    let rest = CurveParams { lambda0: 0.0, ..cfg.curve };
    let evolution = build_solution_params(&rest, cfg.z).and_then(|mut r| {
        if cfg.corrupt_k2 {
            r.k2 += K2_CORRUPTION;
        }
        split_step_check(&r, 512, 4000)
    });
    record(&mut ledger, "split_step", evolution, |l, e| {
        l.push(LedgerEntry::new("split_step_l2", e.l2_error, SPLIT_STEP_TOL, true));
    });

    record(&mut ledger, "symmetry", symmetry_suite(&sp), |l, s| l.extend(s));

    if let Some(kind) = cfg.limit {
        let eps = [100.0 * cfg.eps, 10.0 * cfg.eps, cfg.eps];
        record(&mut ledger, "limit", limit_convergence(kind, &cfg.curve, &eps), |l, c| {
            for (e, d) in c.eps.iter().zip(&c.distances) {
                l.push(LedgerEntry::new(format!("{}_distance_{e:e}", kind.name()), *d, f64::INFINITY, true));
            }
            l.push(LedgerEntry::flag(format!("{}_monotone", kind.name()), c.monotone, true));
        });
    }

    Ok(VerifyReport {
        passed: ledger.all_passed(),
        ledger,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitReport {
    pub kind: LimitKind,
    pub eps: f64,
    pub curve: CurveParams,
    pub asymptotic: AsymptoticConstants,
    pub exact: EllipticConstants,
    /// `|exact - asymptotic| / |exact|` for the seven integrals.
    pub relative_errors: [f64; 7],
    /// Sup-distance between the full field and the limit field.
    pub distance: f64,
    /// FD residual of the limit field itself, 4th order.
    pub limit_residual: f64,
}

pub fn limit_report(kind: LimitKind, base: &CurveParams, eps: f64) -> Result<LimitReport> {
    let case = limit_case(kind, base, eps)?;
    let asymptotic = asymptotic_constants(&case);
    let exact = curve_integrals(&case.params)?;
    let (ea, aa) = (exact.as_array(), asymptotic.integrals.as_array());
    let relative_errors = std::array::from_fn(|i| (ea[i] - aa[i]).abs() / ea[i].abs().max(f64::MIN_POSITIVE));
    let spec = match kind {
        LimitKind::AToZero => {
            // half a period around the crest of the dn profile
            let period = DnWave::new(case.params.lambda0, case.params.b, case.params.c)?.period();
            GridSpec::new(0.25 * period, 0.75 * period, 0.0, 0.01, 128, 128)?
        }
        _ => GridSpec::new(0.0, 0.5, 0.0, 0.002, 64, 64)?,
    };
    let limit_residual = field_residual(|x, t| case.limit_field(x, t), &spec, StencilOrder::Fourth)?;
    Ok(LimitReport {
        kind,
        eps,
        curve: case.params,
        asymptotic,
        exact,
        relative_errors,
        distance: limit_distance(&case)?,
        limit_residual,
    })
}

pub fn cmd_limits(cfg: &RunConfig) -> Result<Vec<LimitReport>> {
    let kinds = match cfg.limit {
        Some(k) => vec![k],
        None => vec![LimitKind::CToB, LimitKind::AToB, LimitKind::AToZero],
    };
    kinds.into_iter().map(|k| limit_report(k, &cfg.curve, cfg.eps)).collect()
}
