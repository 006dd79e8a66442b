use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use hpm_core::sync::{self, ReconciliationPolicy, Tolerances};
use hpm_core::transform::{self, MappingRuleSet, MaterialOptions};
use hpm_core::{check_document, emit_hpm, parse_hpm, GenealogyGraph, Model};
use tempfile::NamedTempFile;

use crate::Format;

pub enum Failure {
    /// The input was read but fails a domain check.
    Domain(String),
    /// The input could not be read, parsed or written.
    Env(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Env(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Domain(m) | Failure::Env(m) => m,
        }
    }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Env(format!("cannot read {}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    String::from_utf8(read(path)?).map_err(|_| Failure::Env(format!("{} is not UTF-8", path.display())))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed command never leaves a partial output.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let env = |e: &dyn std::fmt::Display| Failure::Env(format!("cannot write {}: {e}", path.display()));
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| env(&e))?;
    tmp.write_all(bytes).map_err(|e| env(&e))?;
    tmp.as_file().sync_all().map_err(|e| env(&e))?;
    tmp.persist(path).map_err(|e| env(&e.error))?;
    Ok(())
}

fn load_model(path: &Path) -> Result<Model, Failure> {
    let bytes = read(path)?;
    parse_hpm(&bytes).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

pub fn validate(path: &Path) -> Outcome {
    let report = check_document(&read(path)?);
    println!("{report}");
    Ok(u8::from(report.has_errors()))
}

pub fn export(path: &Path, format: Format, out: &Path, properties_only: bool) -> Outcome {
    let model = load_model(path)?;
    let domain = |e: &dyn std::fmt::Display| Failure::Domain(format!("{}: {e}", path.display()));
    let doc = match format {
        Format::Hpm => emit_hpm(&model).map_err(|e| domain(&e))?,
        Format::Ueml => transform::to_ueml(&model).map_err(|e| domain(&e))?.into_bytes(),
        Format::B2mmlMaterial => {
            transform::to_b2mml_material(&model, MaterialOptions { properties_only }).map_err(|e| domain(&e))?.into_bytes()
        }
        Format::B2mmlProddef => transform::to_b2mml_product_definition(&model).map_err(|e| domain(&e))?.into_bytes(),
    };
    write_atomic(out, &doc)?;
    println!("wrote {}", out.display());
    Ok(0)
}

pub fn import_b2mml(path: &Path, out: &Path) -> Outcome {
    let model =
        transform::from_b2mml_material(&read(path)?).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))?;
    let doc = emit_hpm(&model).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))?;
    write_atomic(out, &doc)?;
    println!("imported {} holons into {}", model.holons.len(), out.display());
    Ok(0)
}

pub fn genealogy(path: &Path, holon: &str, graph_out: Option<&Path>) -> Outcome {
    let model = load_model(path)?;
    let graph = model.genealogy(holon).map_err(|e| Failure::Domain(e.to_string()))?;
    print!("{}", render_tree(&model, &graph));
    if let Some(out) = graph_out {
        write_atomic(out, render_graph(&graph).as_bytes())?;
    }
    Ok(0)
}

/// Nodes in topological order, each followed by its incoming edges.
fn render_tree(model: &Model, graph: &GenealogyGraph) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}: {} nodes, {} edges", graph.root, graph.nodes.len(), graph.edges.len());
    for node in graph.topological_order() {
        let kind = model.holon(node.as_str()).map(|h| h.kind.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{node} ({kind})");
        for e in graph.parents_of(node) {
            let _ = match &e.via {
                Some(pi) => writeln!(s, "  <- {} via {pi}", e.parent),
                None => writeln!(s, "  <- {} (assembled)", e.parent),
            };
        }
    }
    s
}

fn render_graph(graph: &GenealogyGraph) -> String {
    let order = graph.topological_order();
    let mut s = String::new();
    for node in &order {
        let _ = writeln!(s, "{node}");
    }
    for node in &order {
        for e in graph.parents_of(node) {
            let _ = match &e.via {
                Some(pi) => writeln!(s, "{} -> {} [via={pi}]", e.parent, e.child),
                None => writeln!(s, "{} -> {}", e.parent, e.child),
            };
        }
    }
    s
}

pub fn replay(
    path: &Path,
    log: &Path,
    policy: ReconciliationPolicy,
    tolerances: Option<&Path>,
    out: Option<&Path>,
) -> Outcome {
    let mut model = load_model(path)?;
    let report = model.validate();
    if report.has_errors() {
        return Err(Failure::Domain(format!("{} is not a valid model:\n{report}", path.display())));
    }
    let events = sync::parse_event_log(&read_text(log)?).map_err(|e| Failure::Env(format!("{}: {e}", log.display())))?;
    let tolerances = match tolerances {
        Some(p) => Tolerances::from_json(&read_text(p)?).map_err(|e| Failure::Env(format!("{}: {e}", p.display())))?,
        None => Tolerances::new(),
    };
    let summary = sync::replay(&mut model, &events, policy, &tolerances);
    print!("{summary}");
    if let Some(out) = out {
        let doc = emit_hpm(&model).map_err(|e| Failure::Domain(format!("updated model: {e}")))?;
        write_atomic(out, &doc)?;
    }
    Ok(u8::from(!summary.rejected.is_empty()))
}

fn load_rules(path: &Path) -> Result<MappingRuleSet, Failure> {
    transform::parse_rules(&read_text(path)?).map_err(|e| Failure::Env(format!("{}: {e}", path.display())))
}

pub fn check_interop(fwd_path: &Path, bwd_path: Option<&Path>) -> Outcome {
    let fwd = load_rules(fwd_path)?;
    let bwd = match bwd_path {
        Some(p) => load_rules(p)?,
        None => MappingRuleSet::empty(fwd.target(), fwd.source()),
    };
    let (a, b) = transform::interop_concepts(fwd.source().name, fwd.target().name)
        .ok_or_else(|| Failure::Env(format!("no concept registry for {} <-> {}", fwd.source(), fwd.target())))?;
    let report = transform::check_interoperability(&fwd, &bwd, a, b).map_err(|e| Failure::Env(e.to_string()))?;
    print!("{report}");
    Ok(u8::from(!report.interoperable))
}
