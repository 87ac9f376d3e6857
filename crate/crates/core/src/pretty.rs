//! Canonical source rendering of syntax trees.

use std::fmt::Write;

use crate::ast::*;

pub fn program(p: &Program) -> String {
    let mut out = String::new();
    for (i, c) in p.components.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&component(c));
    }
    out
}

pub fn signature(c: &ComponentDef) -> String {
    let mut out = String::new();
    if c.is_extern {
        out.push_str("extern ");
    }
    write!(out, "comp {}", c.name).unwrap();
    if !c.params.is_empty() {
        write!(out, "[{}]", c.params.join(", ")).unwrap();
    }
    let events: Vec<String> = c.events.iter().map(|e| format!("{}: {}", e.var, e.delay)).collect();
    write!(out, "<{}>", events.join(", ")).unwrap();
    write!(out, "({}) -> ({})", ports(&c.inputs), ports(&c.outputs)).unwrap();
    if !c.where_constraints.is_empty() {
        let ws: Vec<String> = c
            .where_constraints
            .iter()
            .map(|w| {
                let op = match w.op {
                    CmpOp::Gt => ">",
                    CmpOp::Ge => ">=",
                };
                format!("{} {op} {}", w.lhs, w.rhs)
            })
            .collect();
        write!(out, " where {}", ws.join(", ")).unwrap();
    }
    out
}

pub fn component(c: &ComponentDef) -> String {
    let mut out = signature(c);
    if !c.has_body {
        out.push_str(";\n");
        return out;
    }
    out.push_str(" {\n");
    for cmd in &c.body {
        writeln!(out, "  {}", command(cmd)).unwrap();
    }
    out.push_str("}\n");
    out
}

fn ports(ps: &[PortDef]) -> String {
    ps.iter().map(port).collect::<Vec<_>>().join(", ")
}

pub fn port(p: &PortDef) -> String {
    match &p.kind {
        PortKind::Interface(e) => format!("@interface[{e}] {}: {}", p.name, p.width),
        PortKind::Data(i) => format!("@[{}, {}] {}: {}", i.start, i.end, p.name, p.width),
        PortKind::Clock => format!("{}: {}", p.name, p.width),
    }
}

pub fn command(c: &Command) -> String {
    match c {
        Command::Instantiate { name, component, params, .. } => {
            if params.is_empty() {
                format!("{name} := new {component};")
            } else {
                let ps: Vec<String> = params.iter().map(|p| p.to_string()).collect();
                format!("{name} := new {component}[{}];", ps.join(", "))
            }
        }
        Command::Invoke { name, instance, events, args, .. } => {
            let evs: Vec<String> = events.iter().map(|e| e.to_string()).collect();
            let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
            format!("{name} := {instance}<{}>({});", evs.join(", "), args.join(", "))
        }
        Command::Connect { dst, src, .. } => format!("{dst} = {src};"),
    }
}
