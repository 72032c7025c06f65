use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ellipsf::isotropic::{coset_reps, decompose, invariance_check, is_isotropic, partition_check, quadratic_form};
use ellipsf::masks::{refinement_coefficients, NonstationaryKind};
use ellipsf::ratcore::format_rational;
use ellipsf::scalingfn::{cascade_eval, verify_reproduction, verify_space_annihilation, DEFAULT_TRUNC};
use ellipsf::strangfix::largest_affine_subspace;
use ellipsf::{serial, DilationMatrix, Error, Exec, ScalingFunctionSpec};
use log::info;
use serde_json::{json, Value};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  matrix is not isotropic
  3  construction or analysis error
  4  kernel did not stabilize within the largest window
  5  bad arguments

Logging goes to stderr; set ELLIPSF_LOG to error, info or debug.";

#[derive(Parser, Debug)]
#[command(name = "ellipsf", version, about = "Elliptic scaling functions for isotropic dilation matrices")]
#[command(after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Isotropic decomposition, quadratic form, coset representatives.
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// Refinement mask as exact Fourier coefficients.
    Mask {
        #[command(flatten)]
        spec: SpecArgs,
        /// Scale of a nonstationary family.
        #[arg(long, default_value_t = 0)]
        scale: i64,
    },
    /// Polynomial space reproduced by the shifts of the scaling function.
    Space {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Numeric checks: annihilation, reproduction and partition of unity.
    Verify {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// Cascade levels for the reproduction check.
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=16))]
        levels: u32,
        /// Reproduction window as lo:hi.
        #[arg(long = "box", default_value = "-5:5", allow_hyphen_values = true)]
        bbox: String,
        /// Threshold for the pass flags.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Cascade values on a box, as CSV.
    Cascade {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=16))]
        levels: u32,
        /// Box as lo:hi in each coordinate.
        #[arg(long = "box", default_value = "-3:3", allow_hyphen_values = true)]
        bbox: String,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Integer matrix, rows separated by ';', e.g. "1,1;1,-1".
    #[arg(long, allow_hyphen_values = true)]
    matrix: String,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SpecArgs {
    #[command(flatten)]
    common: Common,
    /// Power m of the mask.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=8))]
    order: u32,
    /// Degree r of the first term of G beyond W.
    #[arg(long, value_parser = clap::value_parser!(u32).range(4..=16))]
    higher: Option<u32>,
    /// Nonstationary family: "X=<poly>[,m=<k>]" or "sum=<k>:<C>,...".
    #[arg(long, conflicts_with = "higher")]
    nonstat: Option<String>,
    /// Number of factors in the truncated product.
    #[arg(long, default_value_t = DEFAULT_TRUNC as u32, value_parser = clap::value_parser!(u32).range(1..=200))]
    trunc: u32,
}

#[derive(Args, Debug)]
struct AnalysisArgs {
    /// Initial lattice window N.
    #[arg(long, value_parser = clap::value_parser!(i64).range(1..=16))]
    window: Option<i64>,
    /// Largest degree examined.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=40))]
    lmax: Option<u32>,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotIsotropic(_) => 2,
            Error::NoStabilization(_) => 4,
            Error::Parse(_) => 5,
            _ => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn bad_args(message: String) -> Failure {
    Failure { code: 5, message }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ELLIPSF_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(5) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cmd: Cmd) -> CliResult<()> {
    match cmd {
        Cmd::Analyze { common } => {
            let a = parse_matrix(&common.matrix)?;
            emit(&common.out, &serial::to_string(&cmd_analyze(&a)?))
        }
        Cmd::Mask { spec, scale } => {
            let s = build_spec(&spec, scale.max(0) as usize)?;
            emit(&spec.common.out, &serial::to_string(&cmd_mask(&s, scale)?))
        }
        Cmd::Space { spec, analysis } => {
            let s = build_spec(&spec, spec.trunc as usize)?;
            let v = cmd_space(&s, &analysis, spec.trunc as usize)?;
            emit(&spec.common.out, &serial::to_string(&v))
        }
        Cmd::Verify {
            spec,
            analysis,
            levels,
            bbox,
            tol,
        } => {
            let s = build_spec(&spec, spec.trunc as usize)?;
            let (lo, hi) = parse_box(&bbox)?;
            let window = lo.abs().min(hi.abs());
            let v = cmd_verify(&s, &analysis, spec.trunc as usize, levels as usize, window, tol)?;
            emit(&spec.common.out, &serial::to_string(&v))
        }
        Cmd::Cascade { spec, levels, bbox } => {
            let s = build_spec(&spec, spec.trunc as usize)?;
            let (lo, hi) = parse_box(&bbox)?;
            let grid = cascade_eval(&s, levels as usize, Exec::default())?;
            info!(
                "cascade level {levels}: partition error {:e}, refinement residual {:e}",
                grid.partition_error(),
                grid.refinement_residual()
            );
            emit(&spec.common.out, &grid.to_csv(lo, hi))
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(p) => fs::write(p, text).map_err(|e| Failure {
            code: 3,
            message: format!("cannot write {}: {e}", p.display()),
        }),
    }
}

fn parse_matrix(s: &str) -> CliResult<DilationMatrix> {
    DilationMatrix::parse(s).map_err(|e| match e {
        Error::Parse(p) => bad_args(p.to_string()),
        other => other.into(),
    })
}

fn parse_box(s: &str) -> CliResult<(f64, f64)> {
    let parsed = s
        .split_once(':')
        .and_then(|(a, b)| Some((a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?)));
    match parsed {
        Some((lo, hi)) if lo < hi && lo.is_finite() && hi.is_finite() => Ok((lo, hi)),
        _ => Err(bad_args(format!("box must be lo:hi with lo < hi, got {s:?}"))),
    }
}

fn build_spec(args: &SpecArgs, scales: usize) -> CliResult<ScalingFunctionSpec> {
    let a = parse_matrix(&args.common.matrix)?;
    if let Some(ns) = &args.nonstat {
        if args.order != 1 {
            return Err(bad_args("--order does not apply to --nonstat; put m inside the spec".into()));
        }
        let kind = NonstationaryKind::parse(a.d(), ns).map_err(|e| bad_args(e.to_string()))?;
        return Ok(ScalingFunctionSpec::nonstationary(&a, &kind, scales.max(1))?);
    }
    Ok(match args.higher {
        Some(r) => ScalingFunctionSpec::higher(&a, r as usize, None, args.order)?,
        None => ScalingFunctionSpec::stationary(&a, args.order)?,
    })
}

fn cmd_analyze(a: &DilationMatrix) -> CliResult<Value> {
    let iso = is_isotropic(a);
    let dec = decompose(a)?;
    let inv = invariance_check(a, &dec);
    let part = partition_check(a, 5)?;
    let mut v = serial::decomposition(&dec);
    let obj = v.as_object_mut().expect("object");
    obj.insert("isotropic".into(), json!(iso));
    obj.insert("W".into(), serial::polynomial(&quadratic_form(&dec)));
    obj.insert("W_text".into(), json!(quadratic_form(&dec).to_string()));
    obj.insert("invariance_report".into(), json!(inv));
    obj.insert("coset_reps".into(), serial::cosets(&coset_reps(a)));
    obj.insert("coset_reps_transpose".into(), serial::cosets(&coset_reps(&a.transpose())));
    obj.insert(
        "partition_check".into(),
        json!({ "radius": part.radius, "checked": part.checked }),
    );
    Ok(v)
}

fn cmd_mask(s: &ScalingFunctionSpec, scale: i64) -> CliResult<Value> {
    if s.is_stationary() && scale != 0 {
        return Err(bad_args("--scale needs --nonstat".into()));
    }
    if scale < 0 {
        return Err(bad_args("--scale must be nonnegative".into()));
    }
    let m0 = s.masks.mask_at(scale);
    let g = s.masks.g_at(scale);
    let h: Vec<Value> = refinement_coefficients(&m0, s.a.q())
        .iter()
        .map(|(k, c)| json!({ "k": k, "re": format_rational(&c.re), "im": format_rational(&c.im) }))
        .collect();
    Ok(json!({
        "q": s.a.q(),
        "order": s.masks.order,
        "stationary": s.is_stationary(),
        "scale": scale,
        "G": serial::mask(g),
        "mask": serial::mask(&m0),
        "refinement_coefficients": h,
    }))
}

fn analysis_config(s: &ScalingFunctionSpec, args: &AnalysisArgs) -> ellipsf::strangfix::AnalysisConfig {
    let mut cfg = s.analysis_config();
    if let Some(w) = args.window {
        cfg.window = w;
    }
    if let Some(l) = args.lmax {
        cfg.l_max = l as usize;
    }
    cfg
}

fn cmd_space(s: &ScalingFunctionSpec, args: &AnalysisArgs, trunc: usize) -> CliResult<Value> {
    let cfg = analysis_config(s, args);
    let res = s.analyze(&cfg, trunc)?;
    let affine = largest_affine_subspace(&res);
    let text: Vec<String> = res.space.basis.iter().map(ToString::to_string).collect();
    Ok(json!({
        "order": res.order,
        "dimension": res.space.basis.len(),
        "basis": serial::space(&res.space),
        "basis_text": text,
        "kernel_dims": res.kernel_dims,
        "graded_dims": res.graded_dims,
        "shift_invariant": res.shift_invariant,
        "scale_invariant": res.scale_invariant,
        "affine_subspace": serial::space(&affine),
        "affine_subspace_text": affine.basis.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "window_used": res.window_used,
        "l_max": cfg.l_max,
        "route_agreement": res.route,
    }))
}

fn cmd_verify(
    s: &ScalingFunctionSpec,
    args: &AnalysisArgs,
    trunc: usize,
    levels: usize,
    window: f64,
    tol: f64,
) -> CliResult<Value> {
    let cfg = analysis_config(s, args);
    let res = s.analyze(&cfg, trunc)?;
    let ann = verify_space_annihilation(s, &res.space, res.window_used, trunc, cfg.exec)?;
    let lattice = partition_check(&s.a, 5)?;
    let mut out = json!({
        "order": res.order,
        "annihilation_max": ann.max,
        "annihilation": ann,
        "lattice_partition_checked": lattice.checked,
        "tolerance": tol,
    });
    let obj = out.as_object_mut().expect("object");
    let mut passed = ann.max < tol;
    if s.is_stationary() {
        let grid = cascade_eval(s, levels, cfg.exec)?;
        let mut residuals = Vec::new();
        for p in &res.space.basis {
            let r = verify_reproduction(&grid, p, window)?;
            passed &= r.residual < tol.max(1e-3);
            residuals.push(json!({ "polynomial": p.to_string(), "residual": r.residual }));
        }
        let pu = grid.partition_error();
        passed &= pu < tol;
        obj.insert("reproduction_residuals".into(), Value::Array(residuals));
        obj.insert("partition_of_unity_error".into(), json!(pu));
        obj.insert("refinement_residual".into(), json!(grid.refinement_residual()));
        obj.insert("mass_error".into(), json!(grid.mass_error()));
        obj.insert("cascade_levels".into(), json!(levels));
    } else {
        obj.insert("reproduction_residuals".into(), Value::Null);
        obj.insert("partition_of_unity_error".into(), Value::Null);
        obj.insert("refinement_residual".into(), Value::Null);
    }
    obj.insert("passed".into(), json!(passed));
    Ok(out)
}
