use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use enclosure::config::{RunConfig, Session, TauSpec};
use enclosure::geom::{SpheroidFrame, Vec3};
use enclosure::indicator::{
    curve_from_trace, curve_semianalytic, decay_fit, joint_limit, scaled_limit, IndicatorCurve,
};
use enclosure::obstacle::{first_reflector, Ball};
use enclosure::potentials::JProblem;
use enclosure::probe::{curvature_extract, principal_directions, reconstruct_ball, scan_reflector, ProbeMode};
use enclosure::verify::{run_criterion, VerifyOptions, CRITERIA};
use enclosure::wavesim::{read_archive, write_archive};
use enclosure::{Error, Result};

#[derive(Parser)]
#[command(
    name = "enclosure",
    version,
    about = "Enclosure-method reconstruction from bistatic wave data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; the unit sphere test case when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Data source for the indicator.
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    /// Lower end of the decay window.
    #[arg(long, global = true)]
    tau_min: Option<f64>,
    /// Upper end of the decay window.
    #[arg(long, global = true)]
    tau_max: Option<f64>,
    /// Number of τ samples in the decay window.
    #[arg(long, global = true)]
    tau_count: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; all cores when absent.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Reuse a stored trace archive instead of simulating (FDTD mode).
    #[arg(long, global = true)]
    trace: Option<PathBuf>,
    /// Companion archive at twice the step, used to cap the τ window.
    #[arg(long, global = true)]
    companion: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Geometry,
    SemiAnalytic,
    Fdtd,
}

impl From<Mode> for ProbeMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Geometry => ProbeMode::Geometry,
            Mode::SemiAnalytic => ProbeMode::SemiAnalytic,
            Mode::Fdtd => ProbeMode::Fdtd,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the wave solver and store the receiver trace.
    Simulate,
    /// Indicator curve, decay fit and scaled limit.
    Indicator,
    /// Broken-path minimum and the enclosing spheroid.
    Enclose,
    /// Direction scan for first reflectors.
    Scan,
    /// Gauss curvature and mean-curvature combination at a reflector.
    Curvature {
        /// Reflector point `x,y,z`; found by a scan when absent.
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        q: Option<Vec3>,
    },
    /// Center and radius of a ball obstacle.
    ReconstructBall,
    /// Principal directions by rotating the foci about the normal.
    Principal {
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        q: Option<Vec3>,
    },
    /// Run the oracle suite.
    Verify {
        /// Comma-separated criterion numbers; all when absent.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u32>,
    },
}

fn parse_vec3(s: &str) -> std::result::Result<Vec3, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match v.as_slice() {
        [x, y, z] => Ok(Vec3::new(*x, *y, *z)),
        _ => Err(format!("expected three comma-separated numbers, got {s:?}")),
    }
}

/// Every JSON report carries the data source and the τ windows it used.
#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'a str,
    mode: ProbeMode,
    obstacle: String,
    source: Ball,
    receiver: Ball,
    decay_taus: Option<Vec<f64>>,
    limit_taus: Option<Vec<f64>>,
    seed: u64,
    result: T,
}

struct Ctx {
    session: Session,
    base: PathBuf,
    trace_path: Option<PathBuf>,
    companion_path: Option<PathBuf>,
}

impl Ctx {
    fn config(&self) -> &RunConfig {
        &self.session.config
    }

    fn emit<T: Serialize>(&self, command: &str, name: &str, result: T) -> Result<()> {
        let (decay_taus, limit_taus) = self.session.windows();
        let c = self.config();
        let report = Report {
            command,
            mode: c.mode,
            obstacle: c.obstacle.describe(),
            source: c.source,
            receiver: c.receiver,
            decay_taus,
            limit_taus,
            seed: c.seed,
            result,
        };
        let text = serde_json::to_string_pretty(&report)? + "\n";
        let path = self.out_dir()?.join(name);
        std::fs::write(&path, &text)?;
        print!("{text}");
        eprintln!("wrote {}", path.display());
        Ok(())
    }

    fn out_dir(&self) -> Result<PathBuf> {
        let dir = self.base.join(&self.config().out);
        std::fs::create_dir_all(&dir)?;
        Ok(dir)
    }
}

fn load_config(c: &Common) -> Result<(RunConfig, PathBuf)> {
    let (mut config, base) = match &c.config {
        Some(p) => (
            RunConfig::load(p)?,
            p.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        None => (RunConfig::s1(), PathBuf::new()),
    };
    if let Some(m) = c.mode {
        config.mode = m.into();
    }
    if c.tau_min.is_some() || c.tau_max.is_some() || c.tau_count.is_some() {
        let mut t = config.tau.unwrap_or(match config.mode {
            ProbeMode::Fdtd => TauSpec {
                min: 4.0,
                max: None,
                count: 16,
            },
            _ => TauSpec {
                min: 40.0,
                max: Some(640.0),
                count: 10,
            },
        });
        t.min = c.tau_min.unwrap_or(t.min);
        t.max = c.tau_max.or(t.max);
        t.count = c.tau_count.unwrap_or(t.count);
        config.tau = Some(t);
    }
    if let Some(o) = &c.out {
        // A command-line output directory is taken relative to the cwd.
        config.out = std::env::current_dir()?.join(o);
    }
    if let Some(s) = c.seed {
        config.seed = s;
    }
    Ok((config, base))
}

fn context(common: &Common, simulate_now: bool) -> Result<Ctx> {
    let (config, base) = load_config(common)?;
    let mut ctx = Ctx {
        session: Session::new(config, &base)?,
        base,
        trace_path: None,
        companion_path: None,
    };
    if ctx.config().mode == ProbeMode::Fdtd || simulate_now {
        load_or_simulate(&mut ctx, common)?;
    }
    Ok(ctx)
}

fn load_or_simulate(ctx: &mut Ctx, common: &Common) -> Result<()> {
    if let Some(p) = &common.trace {
        let fine = read_archive(p)?;
        let coarse = common.companion.as_ref().map(|c| read_archive(c)).transpose()?;
        ctx.session.attach(fine, coarse)?;
        ctx.trace_path = Some(p.clone());
        ctx.companion_path = common.companion.clone();
        return Ok(());
    }
    let f = ctx.config().fdtd;
    eprintln!("simulating h={} (companion: {}), T={}", f.h, f.companion, f.t_final);
    ctx.session.simulate()?;
    let description = ctx.config().obstacle.describe();
    let seed = Some(ctx.config().seed);
    let path = ctx.out_dir()?.join("trace.encl");
    write_archive(
        ctx.session.trace.as_ref().expect("simulated"),
        &path,
        &description,
        seed,
    )?;
    ctx.trace_path = Some(path);
    if let Some(c) = &ctx.session.companion {
        let path = ctx.out_dir()?.join("trace_companion.encl");
        write_archive(c, &path, &description, seed)?;
        ctx.companion_path = Some(path);
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulateResult {
    trace: Option<PathBuf>,
    companion: Option<PathBuf>,
    h: f64,
    dt: f64,
    t_final: f64,
    n_steps: usize,
    receiver_nodes: usize,
    grid_dims: [usize; 3],
    tau_cap: Option<f64>,
    decay_threshold: f64,
}

fn cmd_simulate(ctx: &Ctx) -> Result<()> {
    let t = ctx.session.trace.as_ref().expect("simulated");
    ctx.emit(
        "simulate",
        "simulate.json",
        SimulateResult {
            trace: ctx.trace_path.clone(),
            companion: ctx.companion_path.clone(),
            h: t.h,
            dt: t.dt,
            t_final: t.t_final,
            n_steps: t.n_steps,
            receiver_nodes: t.n_nodes(),
            grid_dims: t.grid.dims,
            tau_cap: ctx.session.tau_cap,
            decay_threshold: ctx.session.prepared.decay_threshold,
        },
    )
}

fn indicator_curve(ctx: &Ctx) -> Result<IndicatorCurve> {
    let (b, bp) = ctx.session.balls()?;
    let name = ctx.config().obstacle.describe();
    match ctx.config().mode {
        ProbeMode::Geometry => Err(Error::InvalidParameter(
            "geometry mode has no indicator curve; use semi_analytic or fdtd".into(),
        )),
        ProbeMode::SemiAnalytic => {
            let problem = JProblem::new(&ctx.session.prepared.obstacle, &b, &bp)?;
            curve_semianalytic(&problem, &ctx.config().decay_taus(None)?, &name)
        }
        ProbeMode::Fdtd => curve_from_trace(
            ctx.session.trace.as_ref().expect("trace"),
            &bp,
            &ctx.config().decay_taus(ctx.session.tau_cap)?,
            &name,
        ),
    }
}

fn cmd_indicator(ctx: &Ctx) -> Result<()> {
    let curve = indicator_curve(ctx)?;
    let csv = ctx.out_dir()?.join("indicator.csv");
    curve.write_csv(&csv)?;
    eprintln!("wrote {}", csv.display());
    let fit = decay_fit(&curve)?;
    let kappa = fit.rate;
    let scaled = scaled_limit(&curve, kappa).ok();
    let joint = joint_limit(&curve).ok();
    #[derive(Serialize)]
    struct R {
        curve: IndicatorCurve,
        decay_fit: enclosure::indicator::DecayFit,
        scaled_limit: Option<enclosure::indicator::ScaledLimit>,
        joint_limit: Option<enclosure::indicator::JointLimit>,
        tau_cap: Option<f64>,
    }
    ctx.emit(
        "indicator",
        "indicator.json",
        R {
            curve,
            decay_fit: fit,
            scaled_limit: scaled,
            joint_limit: joint,
            tau_cap: ctx.session.tau_cap,
        },
    )
}

#[derive(Serialize)]
struct SpheroidReport {
    foci: (Vec3, Vec3),
    c: f64,
    center: Vec3,
    axis: Vec3,
    semi_major: f64,
    semi_minor: f64,
}

#[derive(Serialize)]
struct EncloseResult {
    /// Estimate of `min φ - η - η'`.
    rate: f64,
    uncertainty: f64,
    /// Estimate of `min φ`.
    c: f64,
    spheroid: SpheroidReport,
}

fn cmd_enclose(ctx: &Ctx) -> Result<()> {
    let (b, bp) = ctx.session.balls()?;
    let r = ctx.session.source()?.rate(&b, &bp)?;
    let c = r.rate + b.radius + bp.radius;
    let frame = SpheroidFrame::new(b.center, bp.center, c)?;
    let focal = 0.5 * (bp.center - b.center).norm();
    let axis = if focal > 0.0 {
        (bp.center - b.center).normalize()
    } else {
        Vec3::x()
    };
    ctx.emit(
        "enclose",
        "enclose.json",
        EncloseResult {
            rate: r.rate,
            uncertainty: r.uncertainty,
            c,
            spheroid: SpheroidReport {
                foci: (b.center, bp.center),
                c: frame.c(),
                center: 0.5 * (b.center + bp.center),
                axis,
                semi_major: 0.5 * c,
                semi_minor: (0.25 * c * c - focal * focal).sqrt(),
            },
        },
    )
}

fn run_scan(ctx: &Ctx) -> Result<enclosure::probe::ScanResult> {
    let (b, bp) = ctx.session.balls()?;
    let src = ctx.session.source()?;
    let r = src.rate(&b, &bp)?;
    scan_reflector(
        &src,
        &b,
        &bp,
        r.rate + b.radius + bp.radius,
        r.uncertainty,
        &ctx.config().probe.scan_options(),
    )
}

fn cmd_scan(ctx: &Ctx) -> Result<()> {
    let scan = run_scan(ctx)?;
    let mut csv = String::from("index,omega_x,omega_y,omega_z,rate,hit\n");
    for (i, (w, (r, h))) in scan.omegas.iter().zip(scan.rates.iter().zip(&scan.hits)).enumerate() {
        let rate = r.map(|v| v.to_string()).unwrap_or_default();
        csv.push_str(&format!("{i},{},{},{},{rate},{}\n", w.x, w.y, w.z, *h as u8));
    }
    let path = ctx.out_dir()?.join("scan.csv");
    std::fs::write(&path, csv)?;
    eprintln!("wrote {}", path.display());
    ctx.emit("scan", "scan.json", scan)
}

fn reflector_point(ctx: &Ctx, q: Option<Vec3>) -> Result<Vec3> {
    if let Some(q) = q {
        return Ok(q);
    }
    if ctx.config().mode == ProbeMode::Geometry {
        let (b, bp) = ctx.session.balls()?;
        let set = first_reflector(&ctx.session.prepared.obstacle, &b.center, &bp.center, 0.0)?;
        return Ok(set.single()?.q);
    }
    let scan = run_scan(ctx)?;
    match scan.clusters.as_slice() {
        [one] => Ok(one.q),
        other => Err(Error::Hypothesis(format!(
            "the scan found {} reflector clusters; pass --q to choose one",
            other.len()
        ))),
    }
}

fn cmd_curvature(ctx: &Ctx, q: Option<Vec3>) -> Result<()> {
    let (b, bp) = ctx.session.balls()?;
    let q = reflector_point(ctx, q)?;
    let p = &ctx.config().probe;
    let rep = curvature_extract(&ctx.session.source()?, &q, &b, &bp, p.s1, p.s2)?;
    ctx.emit("curvature", "curvature.json", rep)
}

fn cmd_reconstruct(ctx: &Ctx) -> Result<()> {
    let (b, bp) = ctx.session.balls()?;
    let rep = reconstruct_ball(
        &ctx.session.source()?,
        &b,
        &bp,
        &ctx.config().probe.reconstruct_options(),
    )?;
    ctx.emit("reconstruct-ball", "reconstruct_ball.json", rep)
}

fn cmd_principal(ctx: &Ctx, q: Option<Vec3>) -> Result<()> {
    let (b, bp) = ctx.session.balls()?;
    let q = reflector_point(ctx, q)?;
    let p = &ctx.config().probe;
    let rep = principal_directions(
        &ctx.session.source()?,
        &q,
        &b,
        &bp,
        &p.thetas(),
        p.s1,
        p.s2,
        p.isotropic_tol,
    )?;
    ctx.emit("principal", "principal.json", rep)
}

fn cmd_verify(common: &Common, criteria: &[u32]) -> Result<bool> {
    let (config, base) = load_config(common)?;
    let opts = VerifyOptions {
        seed: common.seed.unwrap_or(VerifyOptions::default().seed),
    };
    let ids: Vec<u32> = if criteria.is_empty() {
        CRITERIA.iter().map(|(i, _)| *i).collect()
    } else {
        criteria.to_vec()
    };
    let mut results = Vec::new();
    for id in ids {
        let r = run_criterion(id, &opts);
        println!("{}", r.line());
        results.push(r);
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria passed", results.len());
    let dir = base.join(&config.out);
    std::fs::create_dir_all(&dir)?;
    #[derive(Serialize)]
    struct R<'a> {
        seed: u64,
        results: &'a [enclosure::verify::CriterionResult],
    }
    let path = dir.join("verify.json");
    std::fs::write(
        &path,
        serde_json::to_string_pretty(&R {
            seed: opts.seed,
            results: &results,
        })? + "\n",
    )?;
    eprintln!("wrote {}", path.display());
    Ok(passed == results.len())
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(n) = cli.common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    }
    let c = &cli.common;
    match &cli.command {
        Command::Verify { criteria } => return cmd_verify(c, criteria),
        Command::Simulate => cmd_simulate(&context(c, true)?)?,
        Command::Indicator => cmd_indicator(&context(c, false)?)?,
        Command::Enclose => cmd_enclose(&context(c, false)?)?,
        Command::Scan => cmd_scan(&context(c, false)?)?,
        Command::Curvature { q } => cmd_curvature(&context(c, false)?, *q)?,
        Command::ReconstructBall => cmd_reconstruct(&context(c, false)?)?,
        Command::Principal { q } => cmd_principal(&context(c, false)?, *q)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Hypothesis(_) | Error::InvalidParameter(_) | Error::Parse(_) | Error::Json(_) => {
                    ExitCode::from(2)
                }
                _ => ExitCode::from(1),
            }
        }
    }
}
