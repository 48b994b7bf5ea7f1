use std::process::ExitCode;

use clap::Parser;
use skewloop_cli::quadric::{run, QuadricCli};

fn main() -> ExitCode {
    let cli = QuadricCli::parse();
    skewloop_cli::init_workers(cli.common.workers);
    let argv: Vec<String> = std::env::args().skip(1).collect();
    ExitCode::from(skewloop_cli::finish(run(&cli, argv)))
}
