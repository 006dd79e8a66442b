//! `hpm`: validate, transform, import, trace and synchronise holonic product models.
//!
//! Exit codes are uniform across subcommands: 0 on success, 1 when the input
//! is well-formed but fails the domain check (invalid model, divergent replay,
//! incomplete mapping), 2 when an input cannot be read or parsed.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hpm_core::sync::ReconciliationPolicy;

#[derive(Debug, Parser)]
#[command(name = "hpm", version, about = "Holonic product model toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Canonical HPM-XML.
    Hpm,
    /// UEML object/activity document.
    Ueml,
    /// B2MML material model (lots and sublots).
    B2mmlMaterial,
    /// B2MML product definition (product segments).
    B2mmlProddef,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check an HPM-XML model against the meta-model constraints.
    Validate {
        #[arg(value_parser = non_empty_path)]
        model: PathBuf,
    },
    /// Transform a model into another format.
    Export {
        #[arg(value_parser = non_empty_path)]
        model: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long, value_parser = non_empty_path)]
        out: PathBuf,
        /// Leave latest-state attributes out of B2MML material sublots.
        #[arg(long)]
        properties_only: bool,
    },
    /// Recover a partial HPM-XML model from a B2MML material document.
    ImportB2mml {
        #[arg(value_parser = non_empty_path)]
        document: PathBuf,
        #[arg(long, value_parser = non_empty_path)]
        out: PathBuf,
    },
    /// Print the ancestor graph of a holon.
    Genealogy {
        #[arg(value_parser = non_empty_path)]
        model: PathBuf,
        holon: String,
        /// Also write the graph as `parent -> child [via=instance]` lines.
        #[arg(long, value_parser = non_empty_path)]
        graph: Option<PathBuf>,
    },
    /// Replay a JSON-lines event log against a model.
    Replay {
        #[arg(value_parser = non_empty_path)]
        model: PathBuf,
        #[arg(value_parser = non_empty_path)]
        log: PathBuf,
        #[arg(long, env = "HPM_POLICY", default_value = "physical-wins")]
        policy: ReconciliationPolicy,
        /// JSON object of per-attribute tolerances; key `*` sets the default.
        #[arg(long, env = "HPM_TOLERANCES", value_parser = non_empty_path)]
        tolerances: Option<PathBuf>,
        /// Where to write the updated model.
        #[arg(long, value_parser = non_empty_path)]
        out: Option<PathBuf>,
    },
    /// Decide whether a pair of rule files makes two meta-models interoperable.
    CheckInterop {
        #[arg(long, value_parser = non_empty_path)]
        rules_fwd: PathBuf,
        /// Omitted means no backward rules at all.
        #[arg(long, value_parser = non_empty_path)]
        rules_bwd: Option<PathBuf>,
    },
}

fn non_empty_path(s: &str) -> Result<PathBuf, String> {
    if s.is_empty() {
        Err("path must not be empty".into())
    } else {
        Ok(PathBuf::from(s))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate { model } => commands::validate(&model),
        Command::Export { model, format, out, properties_only } => commands::export(&model, format, &out, properties_only),
        Command::ImportB2mml { document, out } => commands::import_b2mml(&document, &out),
        Command::Genealogy { model, holon, graph } => commands::genealogy(&model, &holon, graph.as_deref()),
        Command::Replay { model, log, policy, tolerances, out } => {
            commands::replay(&model, &log, policy, tolerances.as_deref(), out.as_deref())
        }
        Command::CheckInterop { rules_fwd, rules_bwd } => commands::check_interop(&rules_fwd, rules_bwd.as_deref()),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("hpm: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
