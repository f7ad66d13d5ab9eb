use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use log::{error, warn};

use nihonbib::pipeline::{self, Config, Stages};

const EXIT_USAGE: u8 = 2;

/// Prepares Japanese publication metadata for DBLP import.
///
/// Stages run in the order parse-dblp, enamdict, harvest, concatenate-bht,
/// whatever order the flags are given in.
#[derive(Debug, Parser)]
#[command(name = "nihonbib", version, disable_help_flag = true)]
struct Cli {
    /// Parse the DBLP XML file into the corpus tables.
    #[arg(short = 'd', long)]
    parse_dblp: bool,

    /// Load the ENAMDICT file into the name dictionary table.
    #[arg(short = 'e', long)]
    enamdict: bool,

    /// Harvest the OAI-PMH repository, match names and write SPF files.
    #[arg(short = 'h', long)]
    harvest: bool,

    /// Concatenate SPF files into one all.bht per issue.
    #[arg(short = 'b', long)]
    concatenate_bht: bool,

    /// Run every stage.
    #[arg(short = 'a', long)]
    all: bool,

    /// Configuration file.
    #[arg(short = 'c', long, default_value = "config.ini")]
    config: PathBuf,

    /// Print this help.
    #[arg(long, action = clap::ArgAction::Help)]
    help: Option<bool>,
}

impl Cli {
    fn stages(&self) -> Stages {
        if self.all {
            return Stages::all();
        }
        Stages {
            parse_dblp: self.parse_dblp,
            enamdict: self.enamdict,
            harvest: self.harvest,
            concatenate: self.concatenate_bht,
        }
    }
}

fn main() -> ExitCode {
    // `-help` is accepted as a synonym for `--help`.
    let args = std::env::args_os().map(|a| if a == "-help" { "--help".into() } else { a });
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let stages = cli.stages();
    if stages.is_empty() {
        let _ = Cli::command().print_help();
        return ExitCode::from(EXIT_USAGE);
    }

    let cfg = match Config::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("nihonbib: {e}");
            return ExitCode::from(3);
        }
    };
    let log_file = match pipeline::init_logging(&cfg.log.path) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("nihonbib: cannot open log: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    for w in &cfg.warnings {
        warn!("{w}");
    }

    match pipeline::run(&cfg, stages) {
        Ok(report) => {
            if let Some(s) = &report.dblp {
                println!("dblp: {} publications, {} coauthor edges", s.publications, s.edges);
            }
            if let Some(n) = report.dictionary_names {
                println!("enamdict: {n} names");
            }
            if let Some(stats) = &report.statistics {
                print!("{}", stats.render_table());
            }
            if let Some(n) = report.all_files_written {
                println!("bht: {n} all.bht files written");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            error!("{e}");
            eprintln!("nihonbib: {e}");
            eprintln!("see {}", log_file.display());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
