use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use majorant_cli::{emit_table, rhs_note, run_study, Format, StudyConfig};
use majorant_core::{build_rect_mesh, Diagonal, Rect};

#[derive(Parser)]
#[command(name = "majorant", version, about = "Guaranteed error majorants for nonsymmetric diffusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an efficiency-index study and print the table.
    Study(StudyArgs),
    /// Write the structured mesh of the unit square in text form.
    Mesh(MeshArgs),
}

#[derive(Args)]
struct StudyArgs {
    /// JSON config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset: p1 = 1, k1 = k2 = 1, p2 = 1,2,3 on the 20x20 and 40x40 meshes.
    #[arg(long)]
    table1: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Cells per side; repeat or comma-separate for several meshes.
    #[arg(long, value_delimiter = ',')]
    nx: Option<Vec<usize>>,
    #[arg(long)]
    p1: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    p2: Option<Vec<usize>>,
    #[arg(long)]
    k1: Option<u32>,
    #[arg(long)]
    k2: Option<u32>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    imax: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    c_f: Option<f64>,
    #[arg(long)]
    quad_degree: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DiagonalArg {
    Right,
    Left,
}

#[derive(Args)]
struct MeshArgs {
    #[arg(long)]
    nx: usize,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long, value_enum, default_value = "right")]
    diagonal: DiagonalArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn study_config(args: &StudyArgs) -> Result<StudyConfig, String> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            StudyConfig::from_json(&text)?
        }
        None if args.table1 => StudyConfig::table1(),
        None => StudyConfig::default(),
    };
    if args.table1 && args.config.is_some() {
        let preset = StudyConfig::table1();
        cfg.n = preset.n;
        cfg.p1 = preset.p1;
        cfg.p2 = preset.p2;
        cfg.k1 = preset.k1;
        cfg.k2 = preset.k2;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.display().to_string());
    }
    if let Some(v) = args.format {
        cfg.format = v;
    }
    if let Some(v) = &args.nx {
        cfg.n = v.clone();
    }
    if let Some(v) = args.p1 {
        cfg.p1 = v;
    }
    if let Some(v) = &args.p2 {
        cfg.p2 = v.clone();
    }
    if let Some(v) = args.k1 {
        cfg.k1 = v;
    }
    if let Some(v) = args.k2 {
        cfg.k2 = v;
    }
    if let Some(v) = args.eps {
        cfg.eps = v;
    }
    if let Some(v) = args.imax {
        cfg.imax = v;
    }
    if args.lambda.is_some() {
        cfg.lambda_override = args.lambda;
    }
    if args.c_f.is_some() {
        cfg.c_f_override = args.c_f;
    }
    if args.quad_degree.is_some() {
        cfg.quad_degree = args.quad_degree;
    }
    Ok(cfg)
}

fn write_output(text: &str, out: Option<&str>) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{path}: {e}")),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn study(args: &StudyArgs) -> Result<bool, String> {
    let cfg = study_config(args)?;
    if let Some(note) = rhs_note(&cfg) {
        eprintln!("note: {note}");
    }
    let report = run_study(&cfg)?;
    for failure in &report.failures {
        eprintln!("error: {failure}");
    }
    write_output(&emit_table(&report.rows, cfg.format), cfg.out.as_deref())?;
    Ok(report.failures.is_empty())
}

fn mesh(args: &MeshArgs) -> Result<bool, String> {
    let diagonal = match args.diagonal {
        DiagonalArg::Right => Diagonal::Right,
        DiagonalArg::Left => Diagonal::Left,
    };
    let mesh = build_rect_mesh(Rect::unit_square(), args.nx, args.ny.unwrap_or(args.nx), diagonal)
        .map_err(|e| e.to_string())?;
    let out = args.out.as_ref().map(|p| p.display().to_string());
    write_output(&mesh.dump_string(), out.as_deref())?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Study(args) => study(args),
        Command::Mesh(args) => mesh(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
