use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use solenoid::io::{self, IoError};
use solenoid::modgroup::{self, ModgroupError, Relation};
use solenoid::render::{render_svg, RenderOptions};
use solenoid::structures::{DecoratedStructure, StructureError, TlcTesselation};
use solenoid::wpform;

const MAX_RENDER_DEPTH: usize = 10;

#[derive(Parser, Debug)]
#[command(name = "solenoid", version, about = "Decorated Farey tesselations, flips, pavings and the Weil-Petersson form")]
struct Cli {
    #[command(flatten)]
    config: Config,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Config {
    /// Exact rational arithmetic throughout (the default).
    #[arg(long, global = true, conflicts_with = "approx")]
    exact: bool,
    /// Accept decimal inputs and print decimals with this many digits (at least 16).
    #[arg(long, global = true, value_name = "DIGITS", value_parser = clap::value_parser!(u32).range(16..))]
    approx: Option<u32>,
    /// Development depth for rendering.
    #[arg(long, global = true, default_value_t = 4)]
    depth: usize,
    /// Guard on the number of flips.
    #[arg(long, global = true, default_value_t = 10_000)]
    max_flips: usize,
    /// Seed for randomized subcommands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when absent).
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
}

impl Config {
    fn approx(&self) -> bool {
        !self.exact && self.approx.is_some()
    }

    fn digits(&self) -> usize {
        self.approx.unwrap_or(20) as usize
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Flip to the Delaunay tesselation and report the convex-hull paving.
    Delaunay { structure: PathBuf },
    /// Equivariant Ptolemy flip along one edge orbit.
    Flip {
        structure: PathBuf,
        tail: String,
        head: String,
    },
    /// Weil-Petersson pairing of two tangent vectors.
    Wp { structure: PathBuf, u: PathBuf, v: PathBuf },
    /// Check a relation of the modular groupoid on random instances.
    Relations {
        name: String,
        #[arg(long, default_value_t = 50)]
        count: usize,
    },
    /// SVG of a tesselation, structure or Delaunay output.
    Render { input: PathBuf },
    /// Rewrite a word with every generator over one group.
    Normalform { word: PathBuf },
    /// Whether two words represent the same element.
    Equals { first: PathBuf, second: PathBuf },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Guard(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Guard(_) => 3,
            CliError::Failed(_) => 1,
        }
    }
}

impl From<StructureError> for CliError {
    fn from(e: StructureError) -> Self {
        match e {
            StructureError::NonTermination(_) => CliError::Guard(e.to_string()),
            StructureError::NotAnEdge(_)
            | StructureError::MissingOrbit(_)
            | StructureError::ConflictingValues(_)
            | StructureError::NonPositiveValue
            | StructureError::NotInvariant
            | StructureError::DimensionMismatch { .. } => CliError::Input(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<ModgroupError> for CliError {
    fn from(e: ModgroupError) -> Self {
        match e {
            ModgroupError::Structure(s) => s.into(),
            ModgroupError::NotGeometric(_) => CliError::Input(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Structure(StructureError::NonTermination(_)) => CliError::Guard(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

fn read_input(path: &Path) -> Result<String, CliError> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text).map_err(|e| CliError::Input(e.to_string()))?;
    } else {
        text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(text)
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    serde_json::from_str(&read_input(path)?).map_err(|e| CliError::Input(format!("invalid JSON: {e}")))
}

fn emit(cfg: &Config, text: &str) -> Result<(), CliError> {
    match &cfg.output {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Failed(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Failed(e.to_string())),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn load_structure(cfg: &Config, path: &Path) -> Result<DecoratedStructure, CliError> {
    Ok(io::structure_from_json(&read_json(path)?, cfg.approx())?)
}

fn load_word(path: &Path) -> Result<modgroup::ModularWord, CliError> {
    Ok(io::word_from_json(&read_json(path)?)?)
}

fn cmd_delaunay(cfg: &Config, path: &Path) -> Result<(), CliError> {
    let s = load_structure(cfg, path)?;
    let out = s.delaunay(cfg.max_flips)?;
    let reps = out.structure.tess().orbit_reps();
    let doc = json!({
        "structure": io::structure_to_json(&out.structure),
        "removed": out.paving.removed.iter().map(|&o| io::edge_to_json(&reps[o])).collect::<Vec<_>>(),
        "flips": out.flips.iter().map(io::edge_to_json).collect::<Vec<_>>(),
        "faces": out.paving.face_sizes(),
    });
    emit(cfg, &pretty(&doc))
}

fn cmd_flip(cfg: &Config, path: &Path, tail: &str, head: &str) -> Result<(), CliError> {
    let s = load_structure(cfg, path)?;
    let e = io::edge_from_json(&json!([tail, head]))?;
    let flipped = s.flip(s.group(), &e)?;
    emit(cfg, &pretty(&io::structure_to_json(&flipped)))
}

fn cmd_wp(cfg: &Config, path: &Path, u: &Path, v: &Path) -> Result<(), CliError> {
    let s = load_structure(cfg, path)?;
    let u = io::tangent_from_json(&read_json(u)?, &s, cfg.approx())?;
    let v = io::tangent_from_json(&read_json(v)?, &s, cfg.approx())?;
    let w = wpform::wp_form(&s, &u, &v)?;
    emit(cfg, &format!("{}\n{}\n", io::format_rational(&w), io::format_decimal(&w, cfg.digits())))
}

fn cmd_relations(cfg: &Config, name: &str, count: usize) -> Result<(), CliError> {
    let relation: Relation = name.parse().map_err(CliError::Input)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = String::new();
    let mut failures = 0;
    for i in 0..count {
        let inst = modgroup::random_instance(relation, &mut rng);
        let verdict = match modgroup::verify_relation(&inst) {
            Ok(true) => "pass".to_string(),
            Ok(false) => {
                failures += 1;
                "FAIL".to_string()
            }
            Err(e) => {
                failures += 1;
                format!("FAIL ({e})")
            }
        };
        report.push_str(&format!("{name} {i}: {verdict}\n"));
    }
    report.push_str(&format!("{name}: {}/{count} passed\n", count - failures));
    emit(cfg, &report)?;
    if failures > 0 {
        return Err(CliError::Failed(format!("{failures} of {count} instances failed")));
    }
    Ok(())
}

fn cmd_render(cfg: &Config, path: &Path) -> Result<(), CliError> {
    if cfg.depth > MAX_RENDER_DEPTH {
        return Err(CliError::Input(format!("render depth is at most {MAX_RENDER_DEPTH}")));
    }
    let doc = read_json(path)?;
    let mut opts = RenderOptions::default();
    let tess: TlcTesselation = if let Some(structure) = doc.get("structure") {
        let s = io::structure_from_json(structure, cfg.approx())?;
        let removed = doc.get("removed").ok_or_else(|| CliError::Input("missing field \"removed\"".into()))?;
        let removed = removed.as_array().ok_or_else(|| CliError::Input("removed must be an array".into()))?;
        for e in removed {
            let e = io::edge_from_json(e)?;
            let o = s.tess().orbit_of(&e).ok_or(StructureError::NotAnEdge(e))?;
            opts.dashed.insert(o);
        }
        s.tess().clone()
    } else if doc.get("lambda").is_some() {
        io::structure_from_json(&doc, cfg.approx())?.tess().clone()
    } else {
        io::tesselation_from_json(&doc)?
    };
    emit(cfg, &render_svg(&tess, cfg.depth, &opts))
}

fn cmd_normalform(cfg: &Config, path: &Path) -> Result<(), CliError> {
    let w = modgroup::normalize(&load_word(path)?)?;
    emit(cfg, &pretty(&io::word_to_json(&w)))
}

fn cmd_equals(cfg: &Config, a: &Path, b: &Path) -> Result<(), CliError> {
    let same = modgroup::equals(&load_word(a)?, &load_word(b)?)?;
    emit(cfg, &format!("{same}\n"))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = &cli.config;
    match &cli.command {
        Command::Delaunay { structure } => cmd_delaunay(cfg, structure),
        Command::Flip { structure, tail, head } => cmd_flip(cfg, structure, tail, head),
        Command::Wp { structure, u, v } => cmd_wp(cfg, structure, u, v),
        Command::Relations { name, count } => cmd_relations(cfg, name, *count),
        Command::Render { input } => cmd_render(cfg, input),
        Command::Normalform { word } => cmd_normalform(cfg, word),
        Command::Equals { first, second } => cmd_equals(cfg, first, second),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
