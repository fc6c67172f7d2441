use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use pedflow_cli::{
    cmd_bench, cmd_simulate, cmd_sweep, default_densities, parse_config, selected_models,
    Overrides, ParsedConfig,
};

#[derive(Parser)]
#[command(
    name = "pedflow",
    version,
    about = "Bi-directional pedestrian flow simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario `repeats` times and write steps.csv, summary.csv and sweep.csv
    Simulate(Overrides),
    /// Throughput across agent densities (sweep.csv)
    Sweep(Swept),
    /// Time sequential vs parallel execution (bench.csv)
    Bench(Swept),
}

#[derive(Args)]
struct Swept {
    #[command(flatten)]
    overrides: Overrides,
    /// Agents per side, comma separated
    #[arg(long, value_delimiter = ',')]
    densities: Option<Vec<usize>>,
}

impl Swept {
    /// The swept densities replace `agents_per_side`, so the base config is
    /// validated with one of them rather than with the configured value.
    fn parse(mut self) -> Result<(ParsedConfig, Option<Vec<usize>>)> {
        if let Some(&first) = self.densities.as_ref().and_then(|d| d.first()) {
            self.overrides.agents_per_side.get_or_insert(first);
        }
        Ok((parse_config(&self.overrides)?, self.densities))
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate(o) => {
            let parsed = parse_config(&o)?;
            let out = cmd_simulate(&parsed.config)?;
            if let Some(p) = out.summary {
                eprintln!("wrote {}", p.display());
            }
        }
        Command::Sweep(s) => {
            let (parsed, densities) = s.parse()?;
            let densities = densities.unwrap_or_else(default_densities);
            let out = cmd_sweep(&parsed.config, &densities, &selected_models(&parsed))?;
            if let Some(p) = out.sweep {
                eprintln!("wrote {}", p.display());
            }
        }
        Command::Bench(s) => {
            let (parsed, densities) = s.parse()?;
            let densities = densities.unwrap_or_else(|| vec![parsed.config.agents_per_side]);
            let (out, rows) = cmd_bench(&parsed.config, &densities, &selected_models(&parsed))?;
            for r in &rows {
                eprintln!(
                    "{:>7} agents  {}  {} x{:<2} {:>9.3}s  speedup {:.2}",
                    r.agents_total, r.model, r.executor, r.threads, r.seconds, r.speedup_vs_seq
                );
            }
            if let Some(p) = out.bench {
                eprintln!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}
