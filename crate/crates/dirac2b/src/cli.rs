//! Command-line front end: `reduce`, `spectrum`, `constants`, `regge`.
//!
//! Every subcommand writes CSV with a fixed header, `#` comment lines and
//! floats printed with 17 significant digits. Exit codes: 0 ok, 2 usage or
//! configuration error, 3 numerical failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Deserialize;

use crate::angular_algebra::{build_radial_system, Sector, StructureKind};
use crate::meson_model::{
    check_properties, compute_trajectories, extract_constants, make_meson_model, ConstantOptions, MesonSpec,
    Profile,
};
use crate::reduction_chain::{split_system, ChannelFunctions, PoleGrid, SingularKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Defaults used when neither a flag nor the config file sets a value.
pub mod defaults {
    pub const A: f64 = 0.27;
    pub const ALPHA: f64 = 0.27;
    pub const J_MIN: u32 = 8;
    pub const J_MAX: u32 = 64;
    pub const NR_MAX: u32 = 2;
    pub const REDUCE_J: u32 = 8;
    pub const REDUCE_ENERGY: f64 = 2.0;
    pub const R_MIN: f64 = 0.1;
    pub const R_MAX: f64 = 10.0;
    pub const R_POINTS: usize = 100;
    pub const POLE_POINTS: usize = 2048;
    pub const FIT_JS: [u32; 5] = [64, 128, 256, 512, 1024];
}

#[derive(Debug, Parser)]
#[command(name = "dirac2b", version, about = "Large-j spectra of two-body Dirac equations with confining potentials")]
pub struct Cli {
    /// Worker threads (default: all cores, or RAYON_NUM_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Channel functions W1, W2, Y, Z and det V22 on a radial grid.
    Reduce(ReduceArgs),
    /// Zero-order levels for every family.
    Spectrum(ModelArgs),
    /// Fitted trajectory constants and the property report.
    Constants(ModelArgs),
    /// Long-format (ℓ, E²) table for plotting.
    Regge(ModelArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// Key-value TOML file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Confining structure by name (repeatable), e.g. `scalar-minimal`.
    #[arg(long = "structure")]
    pub structures: Vec<String>,
    /// Vector structure carrying the `-alpha/r` term.
    #[arg(long)]
    pub coulomb: Option<String>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub mass1: Option<f64>,
    #[arg(long)]
    pub mass2: Option<f64>,
    #[arg(long)]
    pub j_min: Option<u32>,
    #[arg(long)]
    pub j_max: Option<u32>,
    #[arg(long)]
    pub nr_max: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub j: Option<u32>,
    /// Total energy `E`.
    #[arg(long = "E", alias = "energy")]
    pub energy: Option<f64>,
    /// `equal` (ℓ = j pair) or `shifted` (ℓ = j ± 1 pair).
    #[arg(long)]
    pub sector: Option<String>,
    #[arg(long)]
    pub r_min: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

/// Config file keys; all optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub structure: Option<StructureList>,
    pub coulomb: Option<String>,
    pub a: Option<f64>,
    pub alpha: Option<f64>,
    pub mass1: Option<f64>,
    pub mass2: Option<f64>,
    pub j_min: Option<u32>,
    pub j_max: Option<u32>,
    pub nr_max: Option<u32>,
    pub out: Option<PathBuf>,
    pub j: Option<u32>,
    pub energy: Option<f64>,
    pub sector: Option<String>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub points: Option<usize>,
    pub fit_js: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum StructureList {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) => m,
        }
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

/// Fully resolved settings shared by the model subcommands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub specs: Vec<MesonSpec>,
    pub j_min: u32,
    pub j_max: u32,
    pub nr_max: u32,
    pub fit_js: Vec<u32>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn js(&self) -> Vec<u32> {
        (self.j_min..=self.j_max).collect()
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig, CliError> {
    let Some(path) = path else { return Ok(FileConfig::default()) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
}

fn parse_kind(name: &str) -> Result<StructureKind, CliError> {
    StructureKind::from_name(name).ok_or_else(|| {
        let known: Vec<_> = StructureKind::ALL.iter().map(|k| k.name()).collect();
        CliError::Usage(format!("unknown structure `{name}` (known: {})", known.join(", ")))
    })
}

fn model_spec(kind: StructureKind, coulomb: Option<StructureKind>, a: f64, alpha: f64, m1: f64, m2: f64) -> Result<MesonSpec, CliError> {
    let mut spec = if kind.is_vector() { MesonSpec::vector_confining(kind, a) } else { MesonSpec::scalar(kind, a) };
    if let Some(v) = coulomb {
        if !v.is_vector() {
            return usage(format!("coulomb part needs a vector structure, got {}", v.name()));
        }
        if kind.is_vector() {
            if v != kind {
                return usage(format!("{} and {} are both vector structures", kind.name(), v.name()));
            }
            spec.vector = Some((kind, Profile::Funnel));
        } else {
            spec = spec.with_coulomb(v, alpha);
        }
    }
    spec.alpha = alpha;
    spec = spec.with_masses(m1, m2);
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(spec)
}

pub fn resolve(args: &ModelArgs, file: &FileConfig) -> Result<RunConfig, CliError> {
    let names: Vec<String> = if !args.structures.is_empty() {
        args.structures.clone()
    } else {
        match &file.structure {
            Some(StructureList::One(s)) => vec![s.clone()],
            Some(StructureList::Many(v)) => v.clone(),
            None => Vec::new(),
        }
    };
    if names.is_empty() {
        return usage("no structure given (use --structure or `structure` in the config)");
    }
    let coulomb = args.coulomb.clone().or_else(|| file.coulomb.clone()).map(|n| parse_kind(&n)).transpose()?;
    let a = args.a.or(file.a).unwrap_or(defaults::A);
    let alpha = args.alpha.or(file.alpha).unwrap_or(defaults::ALPHA);
    let m1 = args.mass1.or(file.mass1).unwrap_or(0.0);
    let m2 = args.mass2.or(file.mass2).unwrap_or(0.0);
    let specs = names
        .iter()
        .map(|n| model_spec(parse_kind(n)?, coulomb, a, alpha, m1, m2))
        .collect::<Result<Vec<_>, _>>()?;
    let j_min = args.j_min.or(file.j_min).unwrap_or(defaults::J_MIN);
    let j_max = args.j_max.or(file.j_max).unwrap_or(defaults::J_MAX);
    if j_min > j_max {
        return usage(format!("empty j range {j_min}..={j_max}"));
    }
    if j_min == 0 {
        return usage("the large-j expansion needs j >= 1");
    }
    let fit_js = file.fit_js.clone().unwrap_or_else(|| defaults::FIT_JS.to_vec());
    if fit_js.len() < 4 || fit_js.contains(&0) || fit_js.windows(2).any(|w| w[0] >= w[1]) {
        return usage("fit_js needs at least four increasing positive entries");
    }
    Ok(RunConfig {
        specs,
        j_min,
        j_max,
        nr_max: args.nr_max.or(file.nr_max).unwrap_or(defaults::NR_MAX),
        fit_js,
        out: args.out.clone().or_else(|| file.out.clone()),
    })
}

fn single_spec(cfg: &RunConfig, cmd: &str) -> Result<MesonSpec, CliError> {
    match cfg.specs.as_slice() {
        [one] => Ok(one.clone()),
        _ => usage(format!("`{cmd}` takes exactly one structure")),
    }
}

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, f)
}

/// Writes `csv` to `out`, or stdout when `out` is `None`.
fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            use std::io::Write;
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(|e| CliError::Usage(format!("stdout: {e}")))
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn csv_row(fields: &[String]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(fields).expect("in-memory csv");
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8 fields")
}

fn header(cmd: &str, spec: &MesonSpec) -> String {
    format!(
        "# dirac2b {cmd}\n# structure: {}\n# a={} alpha={} mass1={} mass2={}\n",
        spec.name(),
        f(spec.a),
        f(spec.alpha),
        f(spec.m1),
        f(spec.m2)
    )
}

pub fn cmd_reduce(args: &ReduceArgs) -> Result<String, CliError> {
    let file = load_config(&args.model.config)?;
    let cfg = resolve(&args.model, &file)?;
    let spec = single_spec(&cfg, "reduce")?;
    let j = args.j.or(file.j).unwrap_or(defaults::REDUCE_J);
    if j == 0 {
        return usage("reduce needs j >= 1");
    }
    let energy = args.energy.or(file.energy).unwrap_or(defaults::REDUCE_ENERGY);
    let sector_name = args.sector.clone().or_else(|| file.sector.clone()).unwrap_or_else(|| "equal".into());
    let sector = Sector::from_name(&sector_name).ok_or_else(|| CliError::Usage(format!("unknown sector `{sector_name}`")))?;
    let r_min = args.r_min.or(file.r_min).unwrap_or(defaults::R_MIN);
    let r_max = args.r_max.or(file.r_max).unwrap_or(defaults::R_MAX);
    let points = args.points.or(file.points).unwrap_or(defaults::R_POINTS);
    if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) || points < 2 {
        return usage(format!("bad radial grid r_min={r_min} r_max={r_max} points={points}"));
    }
    let name = spec.name();
    let sys = build_radial_system(&spec.structures(), spec.m1, spec.m2, j, sector)
        .map_err(|e| CliError::Numeric(format!("{name}, j={j}: {e}")))?;
    let split = Arc::new(split_system(sys).map_err(|e| CliError::Numeric(format!("{name}, j={j}: {e}")))?);
    let grid = PoleGrid { r_min, r_max, points };
    let radii = grid.radii();
    // radii where the elimination is not defined keep only det V22
    let rows: Vec<(String, Option<String>)> = radii
        .par_iter()
        .map(|&r| match split.channel_jet(r, energy, 0) {
            Ok(jet) => {
                let w = &jet.w[0];
                (csv_row(&[f(r), f(w[(0, 0)]), f(w[(1, 1)]), f(w[(0, 1)]), f(jet.z), f(jet.det_v22)]), None)
            }
            Err(e) => {
                let blank = String::new();
                let row = csv_row(&[f(r), blank.clone(), blank.clone(), blank.clone(), blank, f(split.det_v22(r, energy))]);
                (row, Some(format!("# skipped r={}: {e}", f(r))))
            }
        })
        .collect();
    if rows.iter().all(|(_, skip)| skip.is_some()) {
        return Err(CliError::Numeric(format!("{name}: no radius in [{r_min}, {r_max}] reduces at E={energy}")));
    }
    let funcs = ChannelFunctions::new(split);
    let poles = funcs.pole_report(energy, &PoleGrid { r_min, r_max, points: defaults::POLE_POINTS });

    let mut out = header("reduce", &spec);
    let _ = writeln!(out, "# j={j} sector={} E={}", sector.name(), f(energy));
    out.push_str("r,W1,W2,Y,Z,det_V22\n");
    rows.iter().for_each(|(r, _)| out.push_str(r));
    for note in rows.iter().filter_map(|(_, n)| n.as_ref()) {
        let _ = writeln!(out, "{note}");
    }
    let _ = writeln!(out, "# poles: {}", poles.len());
    for p in &poles {
        let kind = match p.kind {
            SingularKind::AlgebraicBlock => "det_V22".to_string(),
            SingularKind::EliminatedEntry(i) => format!("eliminated_{i}"),
        };
        let _ = writeln!(out, "# pole,{},{},{kind}", f(p.r), f(p.energy));
    }
    Ok(out)
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<String, CliError> {
    let spec = single_spec(cfg, "spectrum")?;
    let model = make_meson_model(spec.clone()).map_err(|e| CliError::Usage(e.to_string()))?;
    let table = compute_trajectories(&model, &cfg.js(), cfg.nr_max);
    let mut out = header("spectrum", &spec);
    out.push_str("j,n_r,family,E,E2,label,status\n");
    for r in &table.rows {
        out.push_str(&csv_row(&[
            r.j.to_string(),
            r.n_r.to_string(),
            r.family.symbol().to_string(),
            opt(r.energy),
            opt(r.energy2()),
            r.label.clone(),
            r.status.clone(),
        ]));
    }
    Ok(out)
}

pub fn cmd_regge(cfg: &RunConfig) -> Result<String, CliError> {
    let js = cfg.js();
    let tables: Vec<_> = cfg
        .specs
        .par_iter()
        .map(|spec| {
            make_meson_model(spec.clone())
                .map(|m| compute_trajectories(&m, &js, cfg.nr_max))
                .map_err(|e| CliError::Usage(e.to_string()))
        })
        .collect::<Result<_, _>>()?;
    let mut out = String::from("# dirac2b regge\n");
    let _ = writeln!(out, "# a={} mass1={} mass2={}", f(cfg.specs[0].a), f(cfg.specs[0].m1), f(cfg.specs[0].m2));
    out.push_str("structure,family,n_r,j,ell,E2\n");
    let mut failed = 0usize;
    for t in &tables {
        for r in &t.rows {
            match (r.ell, r.energy2()) {
                (Some(ell), Some(e2)) => out.push_str(&csv_row(&[
                    t.structure.clone(),
                    r.family.symbol().to_string(),
                    r.n_r.to_string(),
                    r.j.to_string(),
                    ell.to_string(),
                    f(e2),
                ])),
                _ => failed += 1,
            }
        }
    }
    if failed > 0 {
        let _ = writeln!(out, "# skipped {failed} levels without an energy");
    }
    Ok(out)
}

/// Returns the CSV text and whether every structure produced a fit.
pub fn cmd_constants(cfg: &RunConfig) -> (String, bool) {
    let opts = ConstantOptions { js: cfg.fit_js.clone(), ..ConstantOptions::default() };
    let fits: Vec<_> = cfg.specs.par_iter().map(|s| extract_constants(s, &opts)).collect();
    let mut out = String::from("# dirac2b constants\n");
    let _ = writeln!(
        out,
        "# a={} mass_probe={} fit_js={:?}",
        f(cfg.specs[0].a),
        f(opts.mass_probe),
        opts.js
    );
    out.push_str(
        "structure,k,eta,zeta,kappa,kappa_plus,kappa_minus,delta1,delta2,residual_k,residual_kappa,straightness,j_min,j_max\n",
    );
    let mut ok = true;
    for (spec, fit) in cfg.specs.iter().zip(&fits) {
        match fit {
            Ok(t) => out.push_str(&csv_row(&[
                t.structure.clone(),
                f(t.k),
                f(t.eta),
                f(t.zeta),
                f(t.kappa),
                f(t.kappa_plus),
                f(t.kappa_minus),
                f(t.delta1),
                f(t.delta2),
                f(t.residual_k),
                f(t.residual_kappa),
                f(t.straightness),
                t.j_min.to_string(),
                t.j_max.to_string(),
            ])),
            Err(e) => {
                ok = false;
                let _ = writeln!(out, "# error,{},{e}", spec.name());
            }
        }
    }
    out.push_str("# properties: structure,id,measured,target,result\n");
    for t in fits.iter().flatten() {
        for p in check_properties(t).items {
            let _ = writeln!(
                out,
                "# property,{},{},{},{},{}",
                t.structure,
                p.id,
                f(p.measured),
                p.target,
                if p.pass { "PASS" } else { "FAIL" }
            );
        }
    }
    (out, ok)
}

fn dispatch(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Reduce(args) => {
            let text = cmd_reduce(args)?;
            let file = load_config(&args.model.config)?;
            emit(&args.model.out.clone().or(file.out), &text)
        }
        Command::Spectrum(args) => {
            let cfg = resolve(args, &load_config(&args.config)?)?;
            emit(&cfg.out, &cmd_spectrum(&cfg)?)
        }
        Command::Regge(args) => {
            let cfg = resolve(args, &load_config(&args.config)?)?;
            emit(&cfg.out, &cmd_regge(&cfg)?)
        }
        Command::Constants(args) => {
            let cfg = resolve(args, &load_config(&args.config)?)?;
            let (text, ok) = cmd_constants(&cfg);
            emit(&cfg.out, &text)?;
            if ok {
                Ok(())
            } else {
                Err(CliError::Numeric("some structures failed; see the # error lines".into()))
            }
        }
    }
}

/// Parses `args` and runs the subcommand; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command)),
            Err(e) => Err(CliError::Usage(format!("thread pool: {e}"))),
        },
        None => dispatch(&cli.command),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("dirac2b: {}", e.message());
            e.code()
        }
    }
}
