//! Name resolution and structural checks that need no timing reasoning.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::ast::*;
use crate::diag::{Code, Diagnostic};
use crate::span::Span;

/// A program whose names are all bound, with components listed callees first.
#[derive(Debug, Clone)]
pub struct ResolvedProgram {
    pub program: Program,
    pub order: Vec<String>,
}

impl ResolvedProgram {
    pub fn get(&self, name: &str) -> &ComponentDef {
        self.program.get(name).expect("resolved component")
    }

    /// User-level components in dependency order.
    pub fn user_components(&self) -> impl Iterator<Item = &ComponentDef> {
        self.order.iter().map(|n| self.get(n)).filter(|c| !c.is_extern)
    }
}

/// Combines library and user definitions; a user definition replaces a
/// library one of the same name.
pub fn merge(library: Program, user: Program) -> Program {
    let names: HashSet<&str> = user.components.iter().map(|c| c.name.as_str()).collect();
    let mut components: Vec<ComponentDef> =
        library.components.into_iter().filter(|c| !names.contains(c.name.as_str())).collect();
    components.extend(user.components);
    Program { components, entry: user.entry }
}

pub fn resolve(program: Program) -> Result<ResolvedProgram, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut seen: HashMap<&str, Span> = HashMap::new();
    for c in &program.components {
        if let Some(prev) = seen.insert(&c.name, c.span) {
            diags.push(
                Diagnostic::new(Code::DuplicateName, c.span, format!("component `{}` is defined twice", c.name))
                    .label(prev, "first defined here"),
            );
        }
    }
    let table: HashMap<&str, &ComponentDef> = program.components.iter().map(|c| (c.name.as_str(), c)).collect();
    for c in &program.components {
        check_signature(c, &mut diags);
        if !c.is_extern {
            check_body(c, &table, &mut diags);
        }
    }
    if let Some(entry) = &program.entry {
        if !table.contains_key(entry.as_str()) {
            diags.push(Diagnostic::new(Code::UnboundName, Span::default(), format!("entry component `{entry}` is not defined")));
        }
    }
    let order = match dependency_order(&program, &table) {
        Ok(o) => o,
        Err(d) => {
            diags.push(d);
            vec![]
        }
    };
    if diags.is_empty() {
        Ok(ResolvedProgram { program, order })
    } else {
        crate::diag::sort(&mut diags);
        Err(diags)
    }
}

fn check_signature(c: &ComponentDef, diags: &mut Vec<Diagnostic>) {
    if c.is_extern && c.has_body {
        diags.push(Diagnostic::new(
            Code::ExternWithBody,
            c.span,
            format!("extern component `{}` cannot have a body", c.name),
        ));
    }
    if !c.is_extern && !c.has_body {
        diags.push(Diagnostic::new(
            Code::ExternWithBody,
            c.span,
            format!("component `{}` has no body; mark it `extern` if it is implemented elsewhere", c.name),
        ));
    }
    if !c.is_extern && !c.params.is_empty() {
        diags.push(Diagnostic::new(
            Code::ParamError,
            c.span,
            format!("only extern components take integer parameters, but `{}` declares {}", c.name, c.params.len()),
        ));
    }
    let mut params = HashSet::new();
    for p in &c.params {
        if !params.insert(p.as_str()) {
            diags.push(Diagnostic::new(Code::DuplicateName, c.span, format!("parameter `{p}` is declared twice")));
        }
    }
    let mut events = HashSet::new();
    for e in &c.events {
        if !events.insert(e.var.as_str()) {
            diags.push(Diagnostic::new(Code::DuplicateName, e.span, format!("event `{}` is declared twice", e.var)));
        }
    }
    let check_event = |name: &str, span: Span, diags: &mut Vec<Diagnostic>| {
        if !events.contains(name) {
            diags.push(Diagnostic::new(Code::UnboundName, span, format!("event `{name}` is not declared by `{}`", c.name)));
        }
    };
    for e in &c.events {
        for v in e.delay.events() {
            check_event(v, e.span, diags);
        }
    }
    for w in &c.where_constraints {
        check_event(&w.lhs.base, w.span, diags);
        check_event(&w.rhs.base, w.span, diags);
    }
    let mut ports: HashMap<&str, Span> = HashMap::new();
    let mut interface_of: HashMap<&str, Span> = HashMap::new();
    for p in c.inputs.iter().chain(&c.outputs) {
        if let Some(prev) = ports.insert(&p.name, p.span) {
            diags.push(
                Diagnostic::new(Code::DuplicateName, p.span, format!("port `{}` is declared twice", p.name))
                    .label(prev, "first declared here"),
            );
        }
        if let Width::Param(w) = &p.width {
            if !params.contains(w.as_str()) {
                diags.push(Diagnostic::new(Code::UnboundName, p.span, format!("width parameter `{w}` is not declared")));
            }
        }
        if let Width::Const(0) = p.width {
            diags.push(Diagnostic::new(Code::WidthMismatch, p.span, format!("port `{}` has zero width", p.name)));
        }
        match &p.kind {
            PortKind::Interface(e) => {
                check_event(e, p.span, diags);
                if c.outputs.iter().any(|o| o.name == p.name && o.span == p.span) {
                    diags.push(Diagnostic::new(Code::ArityMismatch, p.span, "interface ports must be inputs"));
                }
                if let Some(prev) = interface_of.insert(e, p.span) {
                    diags.push(
                        Diagnostic::new(Code::DuplicateName, p.span, format!("event `{e}` has more than one interface port"))
                            .label(prev, "first interface port"),
                    );
                }
                if p.width != Width::Const(1) {
                    diags.push(Diagnostic::new(Code::WidthMismatch, p.span, format!("interface port `{}` must be 1 bit wide", p.name)));
                }
            }
            PortKind::Data(i) => {
                for v in i.events() {
                    check_event(v, p.span, diags);
                }
            }
            PortKind::Clock => {
                if !c.is_extern {
                    diags.push(Diagnostic::new(
                        Code::ArityMismatch,
                        p.span,
                        format!("port `{}` needs an availability interval", p.name),
                    ));
                }
            }
        }
    }
}

enum Binder<'a> {
    Instance(&'a str),
    Invocation(&'a str),
}

fn check_body(c: &ComponentDef, table: &HashMap<&str, &ComponentDef>, diags: &mut Vec<Diagnostic>) {
    // Instances and invocations share one namespace; invocations may be
    // referenced before their definition.
    let mut binders: HashMap<&str, (Binder, Span)> = HashMap::new();
    for cmd in &c.body {
        let (name, b) = match cmd {
            Command::Instantiate { name, component, .. } => (name, Binder::Instance(component)),
            Command::Invoke { name, instance, .. } => (name, Binder::Invocation(instance)),
            Command::Connect { .. } => continue,
        };
        if let Some((_, prev)) = binders.get(name.as_str()) {
            diags.push(
                Diagnostic::new(Code::DuplicateName, cmd.span(), format!("`{name}` is already defined"))
                    .label(*prev, "previous definition"),
            );
            continue;
        }
        binders.insert(name, (b, cmd.span()));
    }
    let callee_of = |inv: &str| -> Option<&ComponentDef> {
        match binders.get(inv) {
            Some((Binder::Invocation(inst), _)) => match binders.get(*inst) {
                Some((Binder::Instance(comp), _)) => table.get(comp).copied(),
                _ => None,
            },
            _ => None,
        }
    };
    let check_src = |r: &PortRef, diags: &mut Vec<Diagnostic>| match &r.owner {
        None => {
            if c.input(&r.port).is_none() {
                let msg = if c.output(&r.port).is_some() {
                    format!("output `{}` cannot be read inside `{}`", r.port, c.name)
                } else {
                    format!("`{}` is not a port of `{}`", r.port, c.name)
                };
                diags.push(Diagnostic::new(Code::UnboundName, r.span, msg));
            }
        }
        Some(o) => match binders.get(o.as_str()) {
            Some((Binder::Invocation(_), _)) => {
                if let Some(callee) = callee_of(o) {
                    if callee.output(&r.port).is_none() {
                        diags.push(Diagnostic::new(
                            Code::UnboundName,
                            r.span,
                            format!("`{}` has no output port `{}`", callee.name, r.port),
                        ));
                    }
                }
            }
            Some((Binder::Instance(_), _)) => diags.push(Diagnostic::new(
                Code::UnboundName,
                r.span,
                format!("`{o}` is an instance; read ports through one of its invocations"),
            )),
            None => diags.push(Diagnostic::new(Code::UnboundName, r.span, format!("invocation `{o}` is not defined"))),
        },
    };

    for cmd in &c.body {
        match cmd {
            Command::Instantiate { component, params, span, .. } => match table.get(component.as_str()) {
                None => diags.push(Diagnostic::new(Code::UnboundName, *span, format!("component `{component}` is not defined"))),
                Some(callee) => {
                    if callee.params.len() != params.len() {
                        diags.push(Diagnostic::new(
                            Code::ArityMismatch,
                            *span,
                            format!(
                                "`{component}` takes {} parameter(s) but {} were supplied",
                                callee.params.len(),
                                params.len()
                            ),
                        ));
                    }
                }
            },
            Command::Invoke { instance, events, args, span, .. } => {
                let callee = match binders.get(instance.as_str()) {
                    Some((Binder::Instance(comp), _)) => table.get(comp).copied(),
                    Some((Binder::Invocation(_), _)) => {
                        diags.push(Diagnostic::new(
                            Code::UnboundName,
                            *span,
                            format!("`{instance}` is an invocation, not an instance"),
                        ));
                        None
                    }
                    None => {
                        diags.push(Diagnostic::new(Code::UnboundName, *span, format!("instance `{instance}` is not defined")));
                        None
                    }
                };
                for e in events {
                    if c.event(&e.base).is_none() {
                        diags.push(Diagnostic::new(
                            Code::UnboundName,
                            *span,
                            format!("event `{}` is not declared by `{}`", e.base, c.name),
                        ));
                    }
                }
                for a in args {
                    check_src(a, diags);
                }
                if let Some(callee) = callee {
                    if callee.events.len() != events.len() {
                        diags.push(Diagnostic::new(
                            Code::ArityMismatch,
                            *span,
                            format!(
                                "`{}` expects {} event(s) but {} were supplied",
                                callee.name,
                                callee.events.len(),
                                events.len()
                            ),
                        ));
                    }
                    let n = callee.data_inputs().count();
                    if n != args.len() {
                        diags.push(Diagnostic::new(
                            Code::ArityMismatch,
                            *span,
                            format!("`{}` expects {n} port argument(s) but {} were supplied", callee.name, args.len()),
                        ));
                    }
                }
            }
            Command::Connect { dst, src, .. } => {
                if dst.owner.is_some() || c.output(&dst.port).is_none() {
                    diags.push(Diagnostic::new(
                        Code::UnboundName,
                        dst.span,
                        format!("`{dst}` is not an output port of `{}`", c.name),
                    ));
                }
                check_src(src, diags);
            }
        }
    }
}

/// Component names ordered so that every callee precedes its callers;
/// ties are broken by name so the result does not depend on definition order.
fn dependency_order(program: &Program, table: &HashMap<&str, &ComponentDef>) -> Result<Vec<String>, Diagnostic> {
    let mut deps: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for c in &program.components {
        let entry = deps.entry(&c.name).or_default();
        for cmd in &c.body {
            if let Command::Instantiate { component, .. } = cmd {
                if table.contains_key(component.as_str()) {
                    entry.insert(component);
                }
            }
        }
    }
    let mut order = Vec::new();
    let mut done: BTreeSet<&str> = BTreeSet::new();
    while done.len() < deps.len() {
        let ready: Vec<&str> = deps
            .iter()
            .filter(|(n, d)| !done.contains(*n) && d.iter().all(|x| done.contains(x)))
            .map(|(n, _)| *n)
            .collect();
        if ready.is_empty() {
            let stuck: Vec<&str> = deps.keys().filter(|n| !done.contains(*n)).copied().collect();
            let span = table[stuck[0]].span;
            return Err(Diagnostic::new(
                Code::RecursiveComponent,
                span,
                format!("components instantiate each other recursively: {}", stuck.join(", ")),
            ));
        }
        for n in ready {
            done.insert(n);
            order.push(n.to_string());
        }
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    const LIB: &str = "
extern comp Add[W]<G: 1>(@interface[G] go: 1, @[G, G+1] left: W, @[G, G+1] right: W) -> (@[G, G+1] out: W);
extern comp Mult[W]<G: 3>(@interface[G] go: 1, @[G, G+1] left: W, @[G, G+1] right: W) -> (@[G+2, G+3] out: W);
";

    fn run(body: &str) -> Result<ResolvedProgram, Vec<Diagnostic>> {
        let src = format!(
            "{LIB}\ncomp Main<G: 1>(@interface[G] go: 1, @[G, G+1] l: 32, @[G, G+1] r: 32) -> (@[G, G+1] out: 32) {{ {body} }}"
        );
        resolve(parse(&src).unwrap())
    }

    fn codes(r: Result<ResolvedProgram, Vec<Diagnostic>>) -> Vec<Code> {
        r.err().unwrap_or_default().into_iter().map(|d| d.code).collect()
    }

    #[test]
    fn clean_program_resolves_callees_first() {
        let r = run("A := new Add[32]; a0 := A<G>(l, r); out = a0.out;").unwrap();
        assert_eq!(r.order, vec!["Add", "Mult", "Main"]);
    }

    #[test]
    fn unbound_names() {
        let errs = run("a0 := Q<G>(l, r); out = a0.out;").unwrap_err();
        assert_eq!(errs[0].code, Code::UnboundName);
        assert!(errs[0].message.contains("`Q`"));
        assert_eq!(codes(run("A := new Nope; out = l;")), vec![Code::UnboundName]);
        assert_eq!(codes(run("A := new Add[32]; a0 := A<G>(l, zz); out = a0.out;")), vec![Code::UnboundName]);
        assert_eq!(codes(run("A := new Add[32]; a0 := A<H>(l, r); out = a0.out;")), vec![Code::UnboundName]);
    }

    #[test]
    fn arity_mismatches() {
        assert_eq!(codes(run("M := new Mult[32]; m0 := M<G>(l); out = l;")), vec![Code::ArityMismatch]);
        assert_eq!(codes(run("M := new Mult[32]; m0 := M<G, G>(l, r); out = l;")), vec![Code::ArityMismatch]);
        assert_eq!(codes(run("M := new Mult; out = l;")), vec![Code::ArityMismatch]);
    }

    #[test]
    fn duplicates_and_bodies() {
        assert_eq!(codes(run("A := new Add[32]; A := new Add[32]; out = l;")), vec![Code::DuplicateName]);
        let p = parse("extern comp X<G: 1>() -> () {}").unwrap();
        assert_eq!(codes(resolve(p)), vec![Code::ExternWithBody]);
        let p = parse("comp X<G: 1>() -> () {} comp X<G: 1>() -> () {}").unwrap();
        assert_eq!(codes(resolve(p)), vec![Code::DuplicateName]);
    }

    #[test]
    fn ports_of_invocations_and_outputs() {
        assert_eq!(codes(run("out = out;")), vec![Code::UnboundName]);
        assert_eq!(codes(run("A := new Add[32]; out = A.out;")), vec![Code::UnboundName]);
        assert_eq!(codes(run("A := new Add[32]; a0 := A<G>(l, r); out = a0.nope;")), vec![Code::UnboundName]);
        // Forward references to invocations are allowed.
        assert!(run("out = a0.out; A := new Add[32]; a0 := A<G>(l, r);").is_ok());
    }

    #[test]
    fn recursion_is_rejected() {
        let p = parse("comp X<G: 1>() -> () { y := new Y; } comp Y<G: 1>() -> () { x := new X; }").unwrap();
        assert_eq!(codes(resolve(p)), vec![Code::RecursiveComponent]);
    }

    #[test]
    fn order_does_not_depend_on_definition_order() {
        let a = parse(&format!("{LIB} comp Z<G: 1>() -> () {{ a := new Add[1]; }}")).unwrap();
        let mut b = a.clone();
        b.components.reverse();
        assert_eq!(resolve(a).unwrap().order, resolve(b).unwrap().order);
    }

    #[test]
    fn user_definitions_shadow_library() {
        let lib = parse(LIB).unwrap();
        let user = parse("extern comp Add<G: 1>(@interface[G] go: 1) -> ();").unwrap();
        let merged = merge(lib, user);
        assert_eq!(merged.components.len(), 2);
        assert!(merged.get("Add").unwrap().params.is_empty());
    }
}
