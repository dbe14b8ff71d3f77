use std::fs::File;
use std::io::{BufWriter, Write};
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::Instant;

use clap::Parser;

use lattice_enum::{
    cycle_counter, enumerate_with_sink, format_count_table, EnumConfig, Mode, N_MAX,
};

/// Enumerates unlabelled finite lattices, one isomorphism class each.
#[derive(Parser)]
struct CliArgs {
    /// Largest lattice size to enumerate (2..=24).
    #[arg(long = "max-n", value_parser = clap::value_parser!(u32).range(2..=N_MAX as i64))]
    max_n: u32,

    /// Lattice class: all, vi, graded or vi-graded.
    #[arg(long, default_value = "all")]
    mode: Mode,

    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,

    /// Write every enumerated lattice to this file, one record per line.
    #[arg(long)]
    emit: Option<std::path::PathBuf>,

    /// Write the count table here instead of standard output.
    #[arg(long)]
    counts_out: Option<std::path::PathBuf>,

    /// Subtree-distribution frontier; defaults to min(max-n, 12).
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    seed_size: Option<u32>,
}

fn main() -> ExitCode {
    let args = CliArgs::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(args: &CliArgs) -> std::io::Result<()> {
    let threads = args.threads.unwrap_or_else(|| {
        std::thread::available_parallelism().map_or(1, |p| p.get())
    });
    let mut config = EnumConfig::new(args.max_n as usize, args.mode);
    config.threads = threads.max(1);
    config.seed_size = args.seed_size.unwrap_or(0) as usize;

    let emit = match &args.emit {
        None => None,
        Some(path) => Some(Mutex::new(BufWriter::new(File::create(path)?))),
    };
    let emit_failed = Mutex::new(None::<std::io::Error>);
    let sink = |l: &lattice_enum::LevelledLattice| {
        if let Some(w) = &emit {
            let mut w = w.lock().unwrap();
            if let Err(e) = writeln!(w, "{}", l.serialize()) {
                emit_failed.lock().unwrap().get_or_insert(e);
            }
        }
    };

    let wall_start = Instant::now();
    let cycles_start = cycle_counter();
    let table = enumerate_with_sink(&config, &sink);
    let wall = wall_start.elapsed();

    if let Some(e) = emit_failed.into_inner().unwrap() {
        return Err(e);
    }
    if let Some(w) = emit {
        w.into_inner().unwrap().flush()?;
    }

    let total: u64 = table.counts[1..].iter().sum();
    match (cycles_start, cycle_counter()) {
        (Some(a), Some(b)) if total > 0 => eprintln!(
            "enumerated {} lattices in {:.3} s, ~{} cycles/lattice",
            total,
            wall.as_secs_f64(),
            (b - a) / total
        ),
        _ => eprintln!(
            "enumerated {} lattices in {:.3} s",
            total,
            wall.as_secs_f64()
        ),
    }

    let rendered = format_count_table(&table);
    match &args.counts_out {
        None => std::io::stdout().write_all(rendered.as_bytes())?,
        Some(path) => File::create(path)?.write_all(rendered.as_bytes())?,
    }
    Ok(())
}
