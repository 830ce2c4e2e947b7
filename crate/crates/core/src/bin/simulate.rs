use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use spinbath::sweep::{self, merge_tables, parse_table, preset, validate_table};
use toml::{Table, Value};

/// Transition-probability sweeps for a two-level system coupled to an XY spin bath.
#[derive(Parser, Debug)]
#[command(name = "simulate", version)]
struct Cli {
    /// TOML config file (merged over the preset, if any).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named parameter preset.
    #[arg(long, value_parser = ["fig1", "fig2", "fig3"])]
    preset: Option<String>,
    #[arg(long, value_parser = ["auto", "jw_exact", "ed", "meanfield"])]
    engine: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Run ed next to jw_exact and report both.
    #[arg(long)]
    cross_check: bool,
}

fn overrides(cli: &Cli) -> Table {
    let mut t = Table::new();
    if let Some(e) = &cli.engine {
        t.insert("engine".into(), Value::String(e.clone()));
    }
    if let Some(w) = cli.workers {
        t.insert("workers".into(), Value::Integer(w as i64));
    }
    if cli.cross_check {
        t.insert("cross_check".into(), Value::Boolean(true));
    }
    let mut out = Table::new();
    if let Some(p) = &cli.output {
        out.insert("path".into(), Value::String(p.display().to_string()));
    }
    if let Some(f) = &cli.format {
        out.insert("format".into(), Value::String(f.clone()));
    }
    if !out.is_empty() {
        t.insert("output".into(), Value::Table(out));
    }
    t
}

fn load(cli: &Cli) -> spinbath::Result<sweep::SweepConfig> {
    let mut table = match &cli.preset {
        Some(name) => parse_table(preset(name)?)?,
        None => Table::new(),
    };
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| spinbath::Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let file = parse_table(&text).map_err(|e| match e {
            spinbath::Error::Parse { line, column, message } => spinbath::Error::Parse {
                line,
                column,
                message: format!("{}: {message}", path.display()),
            },
            other => other,
        })?;
        merge_tables(&mut table, file);
    }
    merge_tables(&mut table, overrides(cli));
    validate_table(table)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.config.is_none() && cli.preset.is_none() {
        eprintln!("simulate: give --config <path>, --preset <name>, or both");
        return ExitCode::from(2);
    }
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("simulate: invalid configuration: {e}");
            return ExitCode::from(2);
        }
    };
    let records = match sweep::run_sweep(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("simulate: {e}");
            return ExitCode::from(1);
        }
    };
    let header = sweep::table_header(&cfg);
    if let Err(e) = sweep::emit_table(&records, cfg.output.format, &header, cfg.output.path.as_deref()) {
        eprintln!("simulate: {e}");
        return ExitCode::from(1);
    }
    let failed = records.iter().filter(|r| !r.is_ok()).count();
    if failed > 0 {
        eprintln!("simulate: {failed} of {} grid points failed", records.len());
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
