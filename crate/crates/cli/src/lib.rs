//! Library half of the `athermal` binary, shared with its tests.

pub mod args;
pub mod commands;
pub mod output;

use anyhow::Result;

use args::{Cli, Command};

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Rate(a) => commands::rate(a),
        Command::Distill(a) => commands::distill(a),
        Command::Form(a) => commands::form(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Exhaust(a) => commands::exhaust(a),
        Command::Frame(a) => commands::frame(a),
        Command::Coherent(a) => commands::coherent(a),
        Command::Work(a) => commands::work(a),
        Command::Monotones(a) => commands::monotones(a),
    }
}

/// 2 for errors caused by the request, 1 for everything else.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<athermal::Error>() {
        Some(e) if e.is_domain_error() => 2,
        _ => 1,
    }
}
