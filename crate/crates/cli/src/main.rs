//! Decides a problem file and prints the verdict.
//!
//! Exit status: 0 when unsatisfiable (the property holds), 1 when
//! satisfiable, 2 on errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use xsat::driver::{run, OutputFormat, RunConfig};
use xsat::logic::DEFAULT_NODE_LIMIT;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Human,
    Xml,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Human => OutputFormat::Human,
            Format::Xml => OutputFormat::Xml,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "xsat", version, about = "Static analysis of XPath queries and XML schemas")]
struct Cli {
    /// Problem file: predicate definitions followed by a goal formula.
    spec_file: PathBuf,
    /// Take attribute declarations of schemas into account.
    #[arg(long)]
    attributes: bool,
    /// Maximum number of live BDD nodes.
    #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
    budget: usize,
    #[arg(long, value_enum, default_value = "human")]
    format: Format,
    /// Extra directory searched for schema files.
    #[arg(long)]
    schema_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // The single-dash spelling is kept for compatibility.
    let args = std::env::args_os().map(|a| if a == "-attributes" { "--attributes".into() } else { a });
    let cli = Cli::parse_from(args);
    let config = RunConfig {
        attributes: cli.attributes,
        node_budget: cli.budget,
        format: cli.format.into(),
        schema_dir: cli.schema_dir,
        ..RunConfig::new(cli.spec_file)
    };
    match run(&config) {
        Ok(report) => {
            print!("{}", report.render(config.format));
            if report.is_sat() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("xsat: {} phase: {e}", e.phase());
            ExitCode::from(2)
        }
    }
}
