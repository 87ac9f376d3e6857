//! End-to-end pipeline over source files.

use std::path::Path;

use crate::ast::Program;
use crate::diag::Diagnostic;
use crate::parser::parse_file;
use crate::prims::STDLIB;
use crate::resolve::{merge, resolve, ResolvedProgram};
use crate::span::SourceMap;
use crate::typeck::{typecheck, CheckConfig};

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub stdlib: bool,
    pub checks: CheckConfig,
}

impl Default for Options {
    fn default() -> Self {
        Options { stdlib: true, checks: CheckConfig::default() }
    }
}

/// Outcome of checking a set of files. `program` is present when parsing and
/// resolution succeeded, even if timing checks failed.
#[derive(Debug)]
pub struct Checked {
    pub sources: SourceMap,
    pub program: Option<ResolvedProgram>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Checked {
    pub fn ok(&self) -> bool {
        self.program.is_some() && self.diagnostics.is_empty()
    }

    pub fn render(&self) -> String {
        self.diagnostics.iter().map(|d| d.render(&self.sources)).collect::<Vec<_>>().join("\n")
    }

    /// The resolved program, or the rendered diagnostics.
    pub fn into_program(self) -> Result<ResolvedProgram, String> {
        if self.ok() {
            Ok(self.program.expect("checked program"))
        } else {
            Err(self.render())
        }
    }
}

/// Parses, resolves, and checks in-memory sources given as (name, text).
pub fn check_sources(files: &[(String, String)], opts: &Options) -> Checked {
    let mut sources = SourceMap::new();
    let mut diagnostics = Vec::new();
    let mut library = Program::default();
    if opts.stdlib {
        let id = sources.add("<stdlib>", STDLIB);
        library = parse_file(STDLIB, id).expect("library parses");
    }
    let mut user = Program::default();
    for (name, text) in files {
        let id = sources.add(name.clone(), text.clone());
        match parse_file(text, id) {
            Ok(p) => user.components.extend(p.components),
            Err(e) => diagnostics.push(Diagnostic::from_parse(&e)),
        }
    }
    if !diagnostics.is_empty() {
        return Checked { sources, program: None, diagnostics };
    }
    match resolve(merge(library, user)) {
        Ok(rp) => {
            let diagnostics = typecheck(&rp, &opts.checks);
            Checked { sources, program: Some(rp), diagnostics }
        }
        Err(diagnostics) => Checked { sources, program: None, diagnostics },
    }
}

pub fn check_source(name: &str, text: &str) -> Checked {
    check_sources(&[(name.to_string(), text.to_string())], &Options::default())
}

pub fn read_files(paths: &[impl AsRef<Path>]) -> std::io::Result<Vec<(String, String)>> {
    paths
        .iter()
        .map(|p| {
            let p = p.as_ref();
            Ok((p.display().to_string(), std::fs::read_to_string(p)?))
        })
        .collect()
}

pub fn check_paths(paths: &[impl AsRef<Path>], opts: &Options) -> std::io::Result<Checked> {
    Ok(check_sources(&read_files(paths)?, opts))
}

/// Machine-readable signature: events with delays and ports with windows.
pub fn interface_json(c: &crate::ast::ComponentDef) -> serde_json::Value {
    use crate::ast::{PortKind, Width};
    let width = |w: &Width| match w {
        Width::Const(n) => serde_json::json!(n),
        Width::Param(p) => serde_json::json!(p),
    };
    let port = |p: &crate::ast::PortDef| {
        let mut j = serde_json::json!({ "name": p.name, "width": width(&p.width) });
        match &p.kind {
            PortKind::Interface(e) => {
                j["kind"] = "interface".into();
                j["event"] = e.clone().into();
            }
            PortKind::Data(i) => {
                j["kind"] = "data".into();
                j["event"] = i.start.base.clone().into();
                j["start"] = i.start.to_string().into();
                j["end"] = i.end.to_string().into();
                if i.start.base == i.end.base {
                    j["interval"] = serde_json::json!([i.start.offset, i.end.offset]);
                }
            }
            PortKind::Clock => j["kind"] = "clock".into(),
        }
        j
    };
    serde_json::json!({
        "name": c.name,
        "extern": c.is_extern,
        "params": c.params,
        "events": c.events.iter().map(|e| {
            let mut j = serde_json::json!({
                "name": e.var,
                "delay": e.delay.to_string(),
                "phantom": c.is_phantom(&e.var),
                "interface": c.interface_port(&e.var).map(|p| p.name.clone()),
            });
            if let Some(n) = e.delay.as_const() {
                j["delay"] = n.into();
            }
            j
        }).collect::<Vec<_>>(),
        "inputs": c.inputs.iter().map(port).collect::<Vec<_>>(),
        "outputs": c.outputs.iter().map(port).collect::<Vec<_>>(),
    })
}
