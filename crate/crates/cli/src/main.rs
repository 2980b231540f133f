use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use cfr_core::genus::{self, Chart, Lambda, LambdaFile, OmegaForm, SurfaceModel};
use cfr_core::geometry::{rho, LineParam};
use cfr_core::green::{green_value, BiPoly, CurveModel, QuadOptions, TermJson};
use cfr_core::indicators::{delta, g_k, laurent_direct, DIRECT_CAP};
use cfr_core::io::{c, pair, read_boundary, read_json, to_string_17, GermsJson};
use cfr_core::linsys::{fit_infinity, FitSetup, DEFAULT_R_MAX};
use cfr_core::reconstruct::{corrections, fiber_field_residuals, pipeline, sweep, GridSpec, PointCloud};
use cfr_core::series::Trunc;
use cfr_core::shock::ZGrid;
use cfr_core::{oracles, Error, Result};

#[derive(Parser)]
#[command(
    name = "cfr",
    version,
    about = "Reconstruct bordered complex curves in CP2 from boundary samples"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Winding δ, G_0 at a reference line and the Laurent table of G_k.
    Indicators {
        #[arg(long)]
        boundary: PathBuf,
        #[arg(long, default_value_t = 1)]
        kmax: usize,
        #[arg(long, default_value_t = 6)]
        mmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the rational part A/B + xB'/B of G_1.
    FitInfinity {
        #[arg(long)]
        boundary: PathBuf,
        #[arg(long, default_value_t = DEFAULT_R_MAX)]
        r_max: usize,
        #[command(flatten)]
        trunc: TruncArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep lines and collect fiber points.
    Reconstruct {
        #[arg(long)]
        boundary: PathBuf,
        /// Sheet count, or `auto` to infer it from δ and the fit at infinity.
        #[arg(long, default_value = "auto")]
        p: String,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        germs: Option<PathBuf>,
        /// `.csv` writes the cloud table, anything else JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// indicators → fit-infinity → reconstruct.
    Pipeline {
        #[arg(long)]
        boundary: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        trunc: TruncArgs,
        #[arg(long)]
        germs: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the shock equation on fibers over a small z-grid.
    ShockVerify {
        #[arg(long)]
        boundary: PathBuf,
        /// Grid centre as `x_re,x_im,y_re,y_im`; default x = 0, y = 3ρ.
        #[arg(long, value_delimiter = ',')]
        center: Option<Vec<f64>>,
        /// Grid step in units of ρ.
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long, default_value_t = 9)]
        nodes: usize,
        #[arg(long)]
        germs: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Green function values on a patch of {Φ = 0}.
    Green {
        /// JSON `{"terms": [{"i", "j", "c": [re, im]}]}` for Φ = Σ c z1^i z2^j.
        #[arg(long)]
        phi: PathBuf,
        /// `cx,radius` or `cx,cy,radius` in the z1 chart.
        #[arg(long, value_delimiter = ',')]
        patch: Vec<f64>,
        /// Starting guess for z2 at the patch centre, `re,im`.
        #[arg(long, value_delimiter = ',', default_value = "0,0")]
        z2: Vec<f64>,
        /// JSON `{"pairs": [[[re, im], [re, im]], …]}`.
        #[arg(long)]
        targets: PathBuf,
        #[arg(long, default_value_t = 128)]
        angles: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Chern boundary integral and the genus identities.
    Genus {
        #[arg(long, value_enum)]
        model: ModelKind,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 0.5)]
        inner: f64,
        #[arg(long, default_value = "flat")]
        lambda: String,
        /// JSON `{"log_radial": [c0, c1, …]}` used with `--lambda file`.
        #[arg(long)]
        lambda_file: Option<PathBuf>,
        /// `dz`, `z dz` or `z^k dz`.
        #[arg(long, default_value = "dz")]
        omega: String,
        #[arg(long, default_value_t = 256)]
        nodes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a fixture boundary.
    MakeOracle {
        #[arg(long)]
        name: String,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long, default_value_t = oracles::DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Disc,
    Annulus,
}

#[derive(clap::Args)]
struct TruncArgs {
    #[arg(long, default_value_t = Trunc::default().nx)]
    nx: usize,
    #[arg(long, default_value_t = Trunc::default().mhi)]
    mhi: i32,
}

impl TruncArgs {
    fn get(&self) -> Result<Trunc> {
        if self.nx == 0 || self.mhi < 2 || self.mhi as usize + 1 > DIRECT_CAP {
            return Err(Error::InvalidInput(format!("need nx ≥ 1 and 2 ≤ mhi < {DIRECT_CAP}")));
        }
        Ok(Trunc {
            nx: self.nx,
            mhi: self.mhi,
        })
    }
}

#[derive(clap::Args)]
struct GridArgs {
    /// Sweep radii in units of ρ.
    #[arg(long, value_delimiter = ',', default_values_t = [2.0, 3.0, 4.0])]
    radii: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    angles: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.2, 0.4, 0.6, 0.8])]
    xfrac: Vec<f64>,
}

impl GridArgs {
    fn spec(&self, rho: f64) -> GridSpec {
        GridSpec {
            radii: self.radii.iter().map(|r| r * rho).collect(),
            angles: self.angles,
            xfrac: self.xfrac.clone(),
            offset: 0.0,
        }
    }
}

#[derive(Deserialize)]
struct PhiFile {
    terms: Vec<TermJson>,
}

#[derive(Deserialize)]
struct TargetsFile {
    pairs: Vec<[[f64; 2]; 2]>,
}

enum Output {
    Json(Value),
    Text(String),
}

fn cpoly(p: &cfr_core::Poly) -> Value {
    json!(p.c.iter().map(|&z| pair(z)).collect::<Vec<_>>())
}

fn load_germs(path: &Option<PathBuf>) -> Result<Option<Vec<cfr_core::GermAtInfinity>>> {
    path.as_deref()
        .map(|p| read_json::<GermsJson>(p).map(|g| g.to_germs()))
        .transpose()
}

fn cloud_output(cloud: &PointCloud<f64>, out: &Option<PathBuf>, extra: Value) -> Output {
    if out.as_deref().and_then(Path::extension).is_some_and(|e| e == "csv") {
        return Output::Text(cloud.to_csv());
    }
    let mut v = extra;
    v["cloud"] = cloud.to_json();
    Output::Json(v)
}

fn run(cmd: &Cmd) -> Result<Output> {
    match cmd {
        Cmd::Indicators {
            boundary, kmax, mmax, ..
        } => {
            let b = read_boundary(boundary)?;
            let d = delta(&b)?;
            let r = rho(&b);
            let z = LineParam::new(Complex64::new(0.0, 0.0), Complex64::new(3.0 * r, 0.0));
            let g0 = g_k(&b, &z, 0)?;
            let lt = laurent_direct(&b, *kmax, *mmax)?;
            let mut laurent = serde_json::Map::new();
            for k in 0..=*kmax {
                for m in 0..=*mmax {
                    for n in 0..=m {
                        laurent.insert(format!("{k},{m},{n}"), json!(pair(lt.get(k, m, n))));
                    }
                }
            }
            Ok(Output::Json(json!({
                "delta": d, "rho": r, "G0": pair(g0), "G0_line": {"x": pair(z.x), "y": pair(z.y)},
                "laurent": laurent, "g110_extra": lt.g110_extra,
            })))
        }
        Cmd::FitInfinity {
            boundary, r_max, trunc, ..
        } => {
            let b = read_boundary(boundary)?;
            let setup = FitSetup::from_boundary(&b, Complex64::new(1.0, 0.0), trunc.get()?)?;
            let fit = fit_infinity(&setup, *r_max)?;
            let s = &fit.solution;
            Ok(Output::Json(json!({
                "r": s.r, "B": cpoly(&s.b), "A": cpoly(&s.a), "residual": s.residual,
                "confined": fit.confined, "delta": setup.h.delta, "rank_deficient": s.rank_deficient,
                "tried": fit.tried.iter().map(|&(r, res)| json!([r, res])).collect::<Vec<_>>(),
            })))
        }
        Cmd::Reconstruct {
            boundary,
            p,
            grid,
            germs,
            out,
        } => {
            let b = read_boundary(boundary)?;
            let spec = grid.spec(rho(&b));
            let germs = load_germs(germs)?;
            if p == "auto" {
                let res = pipeline(&b, &spec, germs.as_deref(), Trunc::default())?;
                return Ok(cloud_output(&res.cloud, out, json!({"p": res.p, "delta": res.delta})));
            }
            let p: usize = p
                .parse()
                .map_err(|_| Error::InvalidInput(format!("--p must be an integer or auto, got '{p}'")))?;
            let pk = germs.as_deref().map(|g| cfr_core::infinity::pk_family(g, p.max(1)));
            let cloud = sweep(&b, p, pk.as_deref(), &spec)?;
            Ok(cloud_output(&cloud, out, json!({"p": p})))
        }
        Cmd::Pipeline {
            boundary,
            grid,
            trunc,
            germs,
            out,
        } => {
            let b = read_boundary(boundary)?;
            let germs = load_germs(germs)?;
            let res = pipeline(&b, &grid.spec(rho(&b)), germs.as_deref(), trunc.get()?)?;
            let s = &res.fit.solution;
            let meta = json!({
                "delta": res.delta, "p": res.p, "r": s.r, "B": cpoly(&s.b), "A": cpoly(&s.a),
                "residual": s.residual, "confined": res.fit.confined,
            });
            Ok(cloud_output(&res.cloud, out, meta))
        }
        Cmd::ShockVerify {
            boundary,
            center,
            step,
            nodes,
            germs,
            ..
        } => {
            let b = read_boundary(boundary)?;
            let r = rho(&b);
            let (x0, y0) = match center.as_deref() {
                None => (Complex64::new(0.0, 0.0), Complex64::new(3.0 * r, 0.0)),
                Some([a, b, c, d]) => (Complex64::new(*a, *b), Complex64::new(*c, *d)),
                Some(_) => return Err(Error::InvalidInput("--center takes four numbers".into())),
            };
            let germs = load_germs(germs)?;
            let setup = FitSetup::from_boundary(&b, Complex64::new(1.0, 0.0), Trunc::default())?;
            let fit = fit_infinity(&setup, DEFAULT_R_MAX)?;
            let p = cfr_core::indicators::sheet_count(setup.h.delta, fit.solution.r as i64)? as usize;
            let pk = corrections(&fit.solution, p, germs.as_deref())?;
            let grid = ZGrid::centred(x0, y0, step * r, *nodes);
            let chk = fiber_field_residuals(&b, p, pk.as_deref(), &grid)?;
            Ok(Output::Json(
                json!({"p": p, "shock_residual": chk.shock, "system_residual": chk.system}),
            ))
        }
        Cmd::Green {
            phi,
            patch,
            z2,
            targets,
            angles,
            ..
        } => {
            let phi = BiPoly::from_json(&read_json::<PhiFile>(phi)?.terms);
            let (center, radius) = match patch.as_slice() {
                [cx, r] => (Complex64::new(*cx, 0.0), *r),
                [cx, cy, r] => (Complex64::new(*cx, *cy), *r),
                _ => return Err(Error::InvalidInput("--patch takes cx,radius or cx,cy,radius".into())),
            };
            let z2 = match z2.as_slice() {
                [re, im] => Complex64::new(*re, *im),
                _ => return Err(Error::InvalidInput("--z2 takes re,im".into())),
            };
            let model = CurveModel::new(phi, center, radius, z2)?;
            let opts = QuadOptions {
                angles: *angles,
                ..Default::default()
            };
            let pairs = read_json::<TargetsFile>(targets)?.pairs;
            let values = pairs
                .iter()
                .map(|[a, b]| Ok(json!({"q_star": a, "q": b, "g": green_value(&model, c(*a), c(*b), &opts)?})))
                .collect::<Result<Vec<_>>>()?;
            Ok(Output::Json(json!({"values": values})))
        }
        Cmd::Genus {
            model,
            radius,
            inner,
            lambda,
            lambda_file,
            omega,
            nodes,
            ..
        } => {
            let lam = match lambda.as_str() {
                "flat" => Lambda::Flat,
                "fs" => Lambda::FubiniStudy,
                "file" => {
                    let path = lambda_file
                        .as_ref()
                        .ok_or_else(|| Error::InvalidInput("--lambda file needs --lambda-file".into()))?;
                    Lambda::LogRadial(read_json::<LambdaFile>(path)?.log_radial)
                }
                other => return Err(Error::InvalidInput(format!("unknown λ '{other}'"))),
            };
            let (chart, c_count) = match model {
                ModelKind::Disc => (Chart::Disc { radius: *radius }, 1),
                ModelKind::Annulus => (
                    Chart::Annulus {
                        inner: *inner,
                        outer: *radius,
                    },
                    2,
                ),
            };
            let m = SurfaceModel::new(chart, lam, *nodes)?;
            let form = OmegaForm::parse(omega)?;
            let ci = genus::chern_boundary_integral(&form, &m)?;
            let q_inf = genus::q_infinity_estimate(ci.value, 0, c_count).ok();
            Ok(Output::Json(json!({
                "integral": ci.value, "per_circle": ci.per_circle, "tangency_defect": ci.tangency_defect,
                "tangent": ci.tangent, "g": 0, "c": c_count,
                "genus_of_double": genus::genus_of_double(0, c_count)?, "q_infinity": q_inf,
            })))
        }
        Cmd::MakeOracle {
            name, a, b, samples, ..
        } => {
            if *samples < 8 {
                return Err(Error::InvalidInput("need at least 8 samples".into()));
            }
            let bj = oracles::by_name(name, *a, *b, *samples)?;
            let v = serde_json::to_value(&bj).map_err(|e| Error::Io(e.to_string()))?;
            Ok(Output::Json(v))
        }
    }
}

fn out_path(cmd: &Cmd) -> Option<&Path> {
    match cmd {
        Cmd::Indicators { out, .. }
        | Cmd::FitInfinity { out, .. }
        | Cmd::Reconstruct { out, .. }
        | Cmd::Pipeline { out, .. }
        | Cmd::ShockVerify { out, .. }
        | Cmd::Green { out, .. }
        | Cmd::Genus { out, .. }
        | Cmd::MakeOracle { out, .. } => out.as_deref(),
    }
}

fn write(cmd: &Cmd, o: Output) -> Result<()> {
    let text = match o {
        Output::Json(v) => to_string_17(&v),
        Output::Text(t) => t,
    };
    match out_path(cmd) {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("{}", json!({"error": e.code(), "message": e.to_string()}));
    ExitCode::from(if e.is_validation() { 1 } else { 2 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&Error::InvalidInput(e.to_string().trim().to_string())),
    };
    if let Ok(n) = std::env::var("CFR_THREADS") {
        let built = n
            .parse::<usize>()
            .map_err(|_| Error::InvalidInput(format!("CFR_THREADS must be a positive integer, got '{n}'")))
            .and_then(|n| {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| Error::InvalidInput(e.to_string()))
            });
        if let Err(e) = built {
            return fail(&e);
        }
    }
    match run(&cli.cmd).and_then(|o| write(&cli.cmd, o)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
