//! `glupoly`: build, count, classify and analyse graphs produced by gluing recursions.

mod run;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use glupoly_core::dynamics::{NumVector, System};
use glupoly_core::gluing::{validate, CATALOG_NAMES};
use glupoly_core::oracle::Oracle;
use glupoly_core::polyengine::{initial_vector, sequence};
use glupoly_core::recursion::iterate;
use glupoly_core::zeros::{atlas, boundedness_report, PlateauConfig, RootOptions};
use glupoly_core::{catalog, Assignment, Error, Gluing, GluingData, MarkedGraph};
use num_complex::Complex64;
use serde_json::json;

use run::{manifest_path, Manifest};

const EXIT_FAILURE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "glupoly", version, about = "Independence polynomials of recursively glued graphs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Seed for every random choice (root-finder starting phases).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Refuse graph constructions above this many vertices.
    #[arg(long, global = true, default_value_t = glupoly_core::recursion::DEFAULT_VERTEX_BUDGET)]
    budget_vertices: u128,
    /// Refuse polynomial levels whose degree may exceed this.
    #[arg(long, global = true, default_value_t = glupoly_core::polyengine::DEFAULT_DEGREE_BUDGET)]
    budget_degree: u128,
    /// Highest working precision of the root finder, in bits.
    #[arg(long, global = true, default_value_t = 212)]
    precision: u32,
    /// Output file or directory, depending on the subcommand.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct DataArg {
    /// Gluing-data JSON file, or the name of a catalog entry.
    #[arg(long)]
    data: String,
}

#[derive(Args, Debug, Clone)]
struct GraphArgs {
    #[command(flatten)]
    data: DataArg,
    /// Start graph file; defaults to the catalog start when `--data` names a catalog entry.
    #[arg(long)]
    start: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check gluing data and list every violation.
    Validate(DataArg),
    /// Print the non-degenerate / stable / expanding classification.
    Classify {
        #[command(flatten)]
        data: DataArg,
        /// Also print the label portrait in DOT form.
        #[arg(long)]
        portrait: bool,
    },
    /// Build `G_n` explicitly.
    Build {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        dot: bool,
    },
    /// Exact independence polynomial of level n, or one conditioned entry of it.
    Poly {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        levels: usize,
        /// Mark assignment such as `10` (mark 1 occupied, mark 2 empty).
        #[arg(long)]
        entry: Option<String>,
    },
    /// Zero atlas and boundedness verdict for levels 0..=n.
    Zeros {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        levels: usize,
    },
    /// Orbit of the start vector under the projective map, as CSV.
    Dynamics {
        #[command(flatten)]
        graph: GraphArgs,
        /// Activity as `re,im` or `re`.
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long)]
        iters: usize,
    },
    /// Jacobian at a point of the periodic manifold, with its spectral report.
    Jacobian {
        #[command(flatten)]
        data: DataArg,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// Free coordinates, one complex number per periodic label (`1.5`, `2-0.5i`, …).
        #[arg(long, allow_hyphen_values = true)]
        free: String,
        /// Iterate of the map; defaults to the normal-form power.
        #[arg(long)]
        power: Option<usize>,
    },
    /// List catalog entries or write one out.
    Catalog {
        #[arg(long, conflicts_with = "name")]
        list: bool,
        #[arg(long)]
        name: Option<String>,
    },
    /// Check whether a marked graph is maximally independent.
    Maxindep {
        #[arg(long)]
        start: String,
    },
}

/// What went wrong, and which exit code it maps to.
#[derive(Debug)]
enum Failure {
    Core(Error),
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Io(_) => EXIT_FAILURE,
            Failure::Core(e) if e.is_budget() => EXIT_BUDGET,
            Failure::Core(Error::InvalidGluing(_) | Error::Parse { .. } | Error::Json(_)) => EXIT_VALIDATION,
            Failure::Core(Error::InvalidArgument(_) | Error::UnknownCatalog { .. }) => EXIT_USAGE,
            Failure::Core(_) => EXIT_FAILURE,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Usage(s) | Failure::Io(s) => s.clone(),
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

struct Ctx {
    global: Global,
    manifest: Manifest,
}

impl Ctx {
    fn out(&self) -> Result<&Path, Failure> {
        self.global
            .out
            .as_deref()
            .ok_or_else(|| Failure::Usage(format!("{} needs --out", self.manifest.subcommand)))
    }

    fn load_data(&mut self, source: &str) -> Result<GluingData, Failure> {
        let path = Path::new(source);
        if path.exists() {
            let bytes = std::fs::read(path).map_err(io_err(path))?;
            self.manifest.input("data", source, &bytes);
            let text = String::from_utf8(bytes).map_err(|_| Failure::Core(Error::Parse {
                line: 0,
                message: "data file is not UTF-8".into(),
            }))?;
            return Ok(GluingData::from_json(&text)?);
        }
        let entry = catalog(source)?;
        self.manifest
            .input("data", &format!("catalog:{source}"), entry.data.to_json().as_bytes());
        Ok(entry.data)
    }

    fn load_gluing(&mut self, source: &str) -> Result<Gluing, Failure> {
        Ok(Gluing::new(self.load_data(source)?)?)
    }

    fn load_start(&mut self, source: &str) -> Result<MarkedGraph, Failure> {
        let path = Path::new(source);
        let bytes = std::fs::read(path).map_err(io_err(path))?;
        self.manifest.input("start", source, &bytes);
        let text = String::from_utf8(bytes).map_err(|_| Failure::Core(Error::Parse {
            line: 0,
            message: "start file is not UTF-8".into(),
        }))?;
        Ok(MarkedGraph::from_str(&text)?)
    }

    fn load_pair(&mut self, args: &GraphArgs) -> Result<(Gluing, MarkedGraph), Failure> {
        let d = self.load_gluing(&args.data.data)?;
        let g0 = match &args.start {
            Some(s) => self.load_start(s)?,
            None if CATALOG_NAMES.contains(&args.data.data.as_str()) && !Path::new(&args.data.data).exists() => {
                let entry = catalog(&args.data.data)?;
                self.manifest.input(
                    "start",
                    &format!("catalog:{}", args.data.data),
                    entry.start.to_string().as_bytes(),
                );
                entry.start
            }
            None => return Err(Failure::Usage("--start is required unless --data names a catalog entry".into())),
        };
        Ok((d, g0))
    }

    /// Writes to `--out` when given, otherwise prints.
    fn emit(&mut self, text: &str) -> Result<(), Failure> {
        match self.global.out.clone() {
            Some(p) => self.manifest.write_output(&p, text.as_bytes()).map_err(io_err(&p)),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn echo_budgets(&mut self) {
        self.manifest.config("budget_vertices", self.global.budget_vertices.to_string());
        self.manifest.config("budget_degree", self.global.budget_degree.to_string());
    }
}

fn parse_complex(s: &str) -> Result<Complex64, Failure> {
    let s = s.trim();
    Complex64::from_str(s).map_err(|_| Failure::Usage(format!("cannot read {s:?} as a complex number")))
}

fn parse_lambda(s: &str) -> Result<Complex64, Failure> {
    match s.split_once(',') {
        Some((re, im)) => {
            let re: f64 = re.trim().parse().map_err(|_| Failure::Usage(format!("bad real part {re:?}")))?;
            let im: f64 = im.trim().parse().map_err(|_| Failure::Usage(format!("bad imaginary part {im:?}")))?;
            Ok(Complex64::new(re, im))
        }
        None => parse_complex(s),
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

fn run(cli: Cli) -> Result<Ctx, (Ctx, Failure)> {
    let name = match &cli.command {
        Command::Validate(_) => "validate",
        Command::Classify { .. } => "classify",
        Command::Build { .. } => "build",
        Command::Poly { .. } => "poly",
        Command::Zeros { .. } => "zeros",
        Command::Dynamics { .. } => "dynamics",
        Command::Jacobian { .. } => "jacobian",
        Command::Catalog { .. } => "catalog",
        Command::Maxindep { .. } => "maxindep",
    };
    let mut ctx = Ctx {
        global: cli.global.clone(),
        manifest: Manifest::new(name),
    };
    match dispatch(&mut ctx, cli.command) {
        Ok(()) => Ok(ctx),
        Err(f) => Err((ctx, f)),
    }
}

fn dispatch(ctx: &mut Ctx, command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate(a) => {
            let data = ctx.load_data(&a.data)?;
            let report = validate(&data);
            ctx.emit(&format!("{}\n", report.to_string().trim_end()))?;
            if !report.is_valid() {
                return Err(Failure::Core(Error::InvalidGluing(report)));
            }
        }
        Command::Classify { data, portrait } => {
            let d = ctx.load_gluing(&data.data)?;
            let c = d.classify();
            let mut s = format!(
                "{} {} {} witness_n={}\n",
                if c.non_degenerate { "non_degenerate" } else { "degenerate" },
                if c.stable { "stable" } else { "unstable" },
                if c.expanding { "expanding" } else { "non_expanding" },
                c.expanding_witness.map_or("none".to_string(), |w| w.to_string()),
            );
            if portrait {
                s += &d.label_dynamics().portrait().to_dot();
            }
            ctx.emit(&s)?;
        }
        Command::Build { graph, levels, dot } => {
            let (d, g0) = ctx.load_pair(&graph)?;
            ctx.echo_budgets();
            ctx.manifest.config("levels", levels);
            let g = iterate(&d, &g0, levels, ctx.global.budget_vertices)?;
            ctx.emit(&if dot { g.to_dot() } else { g.to_string() })?;
        }
        Command::Poly { graph, levels, entry } => {
            let (d, g0) = ctx.load_pair(&graph)?;
            ctx.echo_budgets();
            ctx.manifest.config("levels", levels);
            let entry = entry
                .map(|e| Assignment::from_str(&e))
                .transpose()?;
            if let Some(x) = &entry {
                if x.len() != d.k() {
                    return Err(Failure::Usage(format!("--entry needs {} bits", d.k())));
                }
                ctx.manifest.config("entry", x.to_string());
            }
            let seq = sequence(&d, &g0, levels, ctx.global.budget_degree, &Oracle::default())?;
            if let Some(e) = seq.truncated {
                return Err(e.into());
            }
            let v = &seq.levels[levels];
            let p = match &entry {
                Some(x) => v.entry(x).clone(),
                None => v.total(),
            };
            ctx.emit(&format!("{p}\n"))?;
        }
        Command::Zeros { graph, levels } => {
            let (d, g0) = ctx.load_pair(&graph)?;
            let dir = ctx.out()?.to_path_buf();
            ctx.echo_budgets();
            ctx.manifest.config("levels", levels);
            ctx.manifest.config("seed", ctx.global.seed);
            ctx.manifest.config("precision", ctx.global.precision);
            let opts = RootOptions {
                seed: ctx.global.seed,
                ..RootOptions::default().with_max_precision(ctx.global.precision)
            };
            let cfg = PlateauConfig::default();
            ctx.manifest.config("plateau_factor", cfg.plateau_factor);
            ctx.manifest.config("growth_ratio", cfg.growth_ratio);
            let a = atlas(&d, &g0, levels, ctx.global.budget_degree, &opts, &Oracle::default())?;
            let mut csv = String::from("n,re,im,modulus,residual\n");
            for l in &a.levels {
                for (z, r) in l.roots.iter().zip(&l.residuals) {
                    writeln!(csv, "{},{:e},{:e},{:e},{:e}", l.n, z.re, z.im, z.norm(), r).unwrap();
                }
            }
            let report = boundedness_report(&a, &cfg);
            let summary = json!({
                "levels": a.levels.iter().map(|l| json!({
                    "n": l.n,
                    "degree": l.degree,
                    "vertices": l.vertices.to_string(),
                    "max_modulus": l.max_modulus,
                })).collect::<Vec<_>>(),
                "verdict": report.verdict.as_str(),
                "ratios": report.ratios,
                "early_levels": report.early_levels,
                "late_levels": report.late_levels,
                "early_max": if report.early_max.is_finite() { json!(report.early_max) } else { json!(null) },
                "late_max": if report.late_max.is_finite() { json!(report.late_max) } else { json!(null) },
            });
            let mut summary = serde_json::to_string_pretty(&summary).expect("summary serializes");
            summary.push('\n');
            ctx.manifest.write_output(&dir.join("roots.csv"), csv.as_bytes()).map_err(io_err(&dir))?;
            ctx.manifest.write_output(&dir.join("summary.json"), summary.as_bytes()).map_err(io_err(&dir))?;
            println!("{}", report.verdict.as_str());
        }
        Command::Dynamics { graph, lambda, iters } => {
            let (d, g0) = ctx.load_pair(&graph)?;
            let lambda = parse_lambda(&lambda)?;
            ctx.manifest.config("lambda", vec![lambda.re, lambda.im]);
            ctx.manifest.config("iters", iters);
            let sys = System::new(&d, lambda)?;
            let start = initial_vector(&g0, &Oracle::default())?;
            let v = NumVector {
                entries: start.eval(lambda),
                lambda,
            };
            let orbit = sys.orbit(&v, iters)?;
            let mut csv = String::from("iter,residual,step_distance,dist_to_ones_mass\n");
            for s in &orbit.steps {
                writeln!(
                    csv,
                    "{},{},{},{:e}",
                    s.iter,
                    fmt_opt(s.residual),
                    fmt_opt(s.step_distance),
                    s.dist_to_ones_mass
                )
                .unwrap();
            }
            ctx.emit(&csv)?;
        }
        Command::Jacobian { data, lambda, free, power } => {
            let d = ctx.load_gluing(&data.data)?;
            let lambda = parse_lambda(&lambda)?;
            let free: Vec<Complex64> = free.split(',').map(parse_complex).collect::<Result<_, _>>()?;
            let p = power.unwrap_or_else(|| d.fm_normalization().p);
            ctx.manifest.config("lambda", vec![lambda.re, lambda.im]);
            ctx.manifest.config("free", free.iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>());
            ctx.manifest.config("power", p);
            let sys = System::new(&d, lambda)?;
            let point = sys.fixed_manifold_point(&free)?;
            let j = sys.map().jacobian_iterate(&point, p)?;
            let report = sys.spectral_report(&point, p)?;
            let mut s = format!("power: {p}\nmatrix: {} x {}\n", j.nrows(), j.ncols());
            for r in 0..j.nrows() {
                let row: Vec<String> = (0..j.ncols())
                    .map(|c| format!("{:e}{:+e}i", j[(r, c)].re, j[(r, c)].im))
                    .collect();
                writeln!(s, "  {}", row.join(" ")).unwrap();
            }
            s += &report.to_string();
            let coords: Vec<String> = point
                .coords.iter().map(|z| format!("{:e}{:+e}i", z.re, z.im)).collect();
            writeln!(s, "point: {}", coords.join(" ")).unwrap();
            ctx.emit(&s)?;
        }
        Command::Catalog { list, name } => match (list, name) {
            (true, _) => {
                let mut s = String::new();
                for n in CATALOG_NAMES {
                    writeln!(s, "{n}").unwrap();
                }
                print!("{s}");
            }
            (false, Some(n)) => {
                let entry = catalog(&n)?;
                let dir = ctx.out()?.to_path_buf();
                ctx.manifest.config("name", n.clone());
                ctx.manifest
                    .write_output(&dir.join(format!("{n}.json")), entry.data.to_json().as_bytes())
                    .map_err(io_err(&dir))?;
                ctx.manifest
                    .write_output(&dir.join(format!("{n}.graph")), entry.start.to_string().as_bytes())
                    .map_err(io_err(&dir))?;
            }
            (false, None) => return Err(Failure::Usage("catalog needs --list or --name".into())),
        },
        Command::Maxindep { start } => {
            let g = ctx.load_start(&start)?;
            let r = Oracle::default().is_maximally_independent(&g)?;
            let mut s = format!(
                "maximally_independent={} gap={}\n",
                r.maximally_independent,
                r.gap.map_or("none".to_string(), |g| g.to_string())
            );
            for (x, e) in &r.entries {
                match e {
                    Some((size, count)) => writeln!(s, "{x} max_size={size} maximizers={count}").unwrap(),
                    None => writeln!(s, "{x} none").unwrap(),
                }
            }
            ctx.emit(&s)?;
        }
    }
    Ok(())
}

/// Directory-valued `--out` for these subcommands, file-valued otherwise.
fn out_is_dir(subcommand: &str) -> bool {
    matches!(subcommand, "zeros" | "catalog")
}

fn finish(ctx: &Ctx, status: &str) {
    if let Some(out) = &ctx.global.out {
        let path = manifest_path(out, out_is_dir(&ctx.manifest.subcommand));
        if let Err(e) = run::write_atomic(&path, ctx.manifest.to_json(status).as_bytes()) {
            eprintln!("glupoly: cannot write manifest {}: {e}", path.display());
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(ctx) => {
            finish(&ctx, "ok");
            ExitCode::SUCCESS
        }
        Err((ctx, f)) => {
            eprintln!("glupoly: {}", f.message());
            finish(&ctx, &format!("error: {}", f.message()));
            ExitCode::from(f.code())
        }
    }
}
