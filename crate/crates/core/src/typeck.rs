//! Timing checks: delay well-formedness, valid reads, conflict-free instance
//! use, safe pipelining, and phantom-event discipline.

use std::collections::{BTreeMap, HashMap};

use crate::ast::*;
use crate::diag::{self, Code, Diagnostic};
use crate::event::{contains, disjoint, AlgebraError, Binding, ConstraintSet, DelayExpr, EventExpr, Interval};
use crate::resolve::ResolvedProgram;
use crate::span::Span;

/// Individual checks can be switched off to measure how much each one
/// contributes; everything is on by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckConfig {
    pub delay_wf: bool,
    pub valid_reads: bool,
    pub conflicts: bool,
    pub triggering: bool,
    pub shared_reuse: bool,
    pub phantom: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { delay_wf: true, valid_reads: true, conflicts: true, triggering: true, shared_reuse: true, phantom: true }
    }
}

impl CheckConfig {
    pub fn without(name: &str) -> Option<Self> {
        let mut c = Self::default();
        match name {
            "delay-wf" => c.delay_wf = false,
            "valid-reads" => c.valid_reads = false,
            "conflicts" => c.conflicts = false,
            "triggering" => c.triggering = false,
            "shared-reuse" => c.shared_reuse = false,
            "phantom" => c.phantom = false,
            _ => return None,
        }
        Some(c)
    }

    pub const MUTATIONS: [&'static str; 5] = ["delay-wf", "valid-reads", "conflicts", "triggering", "shared-reuse"];
}

/// Busy window of one instance event, created by one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClaimRecord {
    pub invocation: String,
    pub interval: Interval,
    pub span: Span,
}

/// Per-instance busy windows and per-invocation output availability.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResourceLedger {
    /// Keyed by (instance, callee event).
    pub claims: BTreeMap<(String, String), Vec<ClaimRecord>>,
    pub outputs: BTreeMap<String, BTreeMap<String, Interval>>,
}

impl ResourceLedger {
    /// Records a claim, returning the earlier claims it may overlap.
    pub fn claim(&mut self, instance: &str, event: &str, rec: ClaimRecord, cs: &ConstraintSet) -> Vec<ClaimRecord> {
        let list = self.claims.entry((instance.to_string(), event.to_string())).or_default();
        let clashes = list.iter().filter(|c| !disjoint(&c.interval, &rec.interval, cs)).cloned().collect();
        list.push(rec);
        clashes
    }
}

/// Everything learned while checking one component.
#[derive(Debug, Clone, Default)]
pub struct ComponentReport {
    pub ledger: ResourceLedger,
    pub diagnostics: Vec<Diagnostic>,
}

/// Event delays of the component under check; `None` for non-constant delays.
pub type DelayEnv = HashMap<String, Option<u64>>;

fn algebra(e: AlgebraError, span: Span) -> Diagnostic {
    let code = match e {
        AlgebraError::OffsetOverflow(_) => Code::OffsetOverflow,
        AlgebraError::InconsistentFacts => Code::InconsistentFacts,
        AlgebraError::IllFormedEvent(_) | AlgebraError::Unbound(_) => Code::IllFormedEvent,
    };
    Diagnostic::new(code, span, e.to_string())
}

/// Bit width of a callee port given instance parameters.
pub fn port_width(callee: &ComponentDef, params: &[u64], port: &PortDef) -> u64 {
    match &port.width {
        Width::Const(n) => *n,
        Width::Param(p) => callee
            .params
            .iter()
            .position(|q| q == p)
            .and_then(|i| params.get(i).copied())
            .unwrap_or(0),
    }
}

pub fn constraints(c: &ComponentDef) -> ConstraintSet {
    let mut cs = ConstraintSet::new();
    for w in &c.where_constraints {
        cs.assume(&w.lhs, &w.rhs, w.min_gap());
    }
    cs
}

/// Every event must stay busy at least as long as any port window that
/// starts at it.
pub fn check_delay_wellformed(c: &ComponentDef, cs: &ConstraintSet) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for ev in &c.events {
        for p in c.inputs.iter().chain(&c.outputs) {
            let Some(i) = p.interval() else { continue };
            if i.start.base != ev.var {
                continue;
            }
            let slack = ev.delay.linear().sub(&i.length());
            match cs.prove_nonneg(&slack) {
                Ok(true) => {}
                Ok(false) => diags.push(
                    Diagnostic::new(
                        Code::DelayTooShort,
                        p.span,
                        format!(
                            "event `{}` has delay {} but port `{}` is live for {} during {i}",
                            ev.var,
                            ev.delay,
                            p.name,
                            crate::event::span_length(&i).render()
                        ),
                    )
                    .label(ev.span, "delay declared here")
                    .note("a new set of inputs could arrive while this port still holds the previous one"),
                ),
                Err(e) => diags.push(algebra(e, ev.span)),
            }
        }
    }
    diags
}

/// A destination live during `req` can be fed from a source live during `avail`.
pub fn check_connect(req: &Interval, avail: &Interval, cs: &ConstraintSet, span: Span, what: &str) -> Option<Diagnostic> {
    if contains(avail, req, cs) {
        None
    } else {
        Some(Diagnostic::new(
            Code::InsufficientAvailability,
            span,
            format!("`{what}` is available for {avail} but required during {req}"),
        ))
    }
}

fn check_signature(c: &ComponentDef, cs: &ConstraintSet, cfg: &CheckConfig, diags: &mut Vec<Diagnostic>) -> bool {
    if let Err(e) = cs.check_consistent() {
        diags.push(algebra(e, c.span));
        return false;
    }
    for p in c.inputs.iter().chain(&c.outputs) {
        if let Some(i) = p.interval() {
            if !cs.prove_le(&i.start.shift(1).unwrap_or(i.start.clone()), &i.end) {
                diags.push(Diagnostic::new(Code::EmptyInterval, p.span, format!("port `{}` has an empty window {i}", p.name)));
            }
        }
    }
    if !c.is_extern {
        for w in &c.where_constraints {
            diags.push(Diagnostic::new(
                Code::WhereInUserComponent,
                w.span,
                "ordering constraints are only allowed on extern components",
            ));
        }
        for ev in &c.events {
            match ev.delay {
                DelayExpr::Const(0) => diags.push(Diagnostic::new(
                    Code::DelayTooShort,
                    ev.span,
                    format!("event `{}` must have a delay of at least 1", ev.var),
                )),
                DelayExpr::Const(_) => {}
                DelayExpr::Diff(..) => diags.push(Diagnostic::new(
                    Code::NonConstantDelay,
                    ev.span,
                    format!("event `{}` must have a constant delay, found {}", ev.var, ev.delay),
                )),
            }
        }
    }
    if cfg.delay_wf {
        diags.extend(check_delay_wellformed(c, cs));
    }
    true
}

struct Instance<'a> {
    callee: &'a ComponentDef,
    params: Vec<u64>,
}

struct Invocation<'a> {
    name: &'a str,
    instance: &'a str,
    binding: Binding,
    span: Span,
}

/// Availability of a readable port within a body.
fn availability(
    c: &ComponentDef,
    ledger: &ResourceLedger,
    r: &PortRef,
) -> Option<Interval> {
    match &r.owner {
        None => c.input(&r.port).and_then(|p| p.interval()),
        Some(inv) => ledger.outputs.get(inv).and_then(|m| m.get(&r.port)).cloned(),
    }
}

fn source_width(c: &ComponentDef, instances: &HashMap<&str, Instance>, invs: &HashMap<&str, Invocation>, r: &PortRef) -> Option<u64> {
    match &r.owner {
        None => c.input(&r.port).map(|p| port_width(c, &[], p)),
        Some(o) => {
            let inv = invs.get(o.as_str())?;
            let inst = instances.get(inv.instance)?;
            inst.callee.output(&r.port).map(|p| port_width(inst.callee, &inst.params, p))
        }
    }
}

/// Checks one invocation against its callee's signature and the claims made
/// so far.
#[allow(clippy::too_many_arguments)]
pub fn check_invoke(
    c: &ComponentDef,
    delays: &DelayEnv,
    cs: &ConstraintSet,
    cfg: &CheckConfig,
    name: &str,
    instance: &str,
    callee: &ComponentDef,
    binding: &Binding,
    args: &[PortRef],
    span: Span,
    ledger: &mut ResourceLedger,
) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for w in &callee.where_constraints {
        match (w.lhs.substitute(binding), w.rhs.substitute(binding)) {
            (Ok(l), Ok(r)) => {
                let ok = cs.prove(&crate::event::Claim::new(l.clone(), r.clone(), w.min_gap())).unwrap_or(false);
                if !ok {
                    let op = if w.min_gap() == 1 { ">" } else { ">=" };
                    diags.push(Diagnostic::new(
                        Code::ConstraintViolated,
                        span,
                        format!("`{}` requires {} {op} {}, which becomes {l} {op} {r} here", callee.name, w.lhs, w.rhs),
                    ));
                }
            }
            (Err(e), _) | (_, Err(e)) => diags.push(algebra(e, span)),
        }
    }
    if cfg.valid_reads {
        for (port, arg) in callee.data_inputs().zip(args) {
            let Some(req) = port.interval().map(|i| i.substitute(binding)) else { continue };
            let req = match req {
                Ok(r) => r,
                Err(e) => {
                    diags.push(algebra(e, span));
                    continue;
                }
            };
            if let Some(avail) = availability(c, ledger, arg) {
                if let Some(d) = check_connect(&req, &avail, cs, arg.span, &arg.to_string()) {
                    diags.push(d.label(span, format!("`{}` of `{name}` reads it here", port.name)));
                }
            }
        }
    }
    for ev in &callee.events {
        let t = &binding[&ev.var];
        let d = match ev.delay.substitute(binding) {
            Ok(DelayExpr::Const(d)) => d,
            Ok(other) => {
                diags.push(Diagnostic::new(
                    Code::NonConstantDelay,
                    span,
                    format!("delay of `{}` in `{}` becomes {other}, which is not a constant", ev.var, callee.name),
                ));
                continue;
            }
            Err(e) => {
                diags.push(algebra(e, span));
                continue;
            }
        };
        if cfg.triggering {
            if let Some(Some(caller)) = delays.get(&t.base) {
                if *caller < d {
                    diags.push(
                        Diagnostic::new(
                            Code::UnsafeTrigger,
                            span,
                            format!(
                                "event `{}` may retrigger every {caller} cycle(s) but `{instance}` can only accept new inputs every {d} cycle(s)",
                                t.base
                            ),
                        )
                        .note(format!("`{name}` schedules `{}` at {t}", callee.name)),
                    );
                }
            }
        }
        if d == 0 {
            continue;
        }
        let interval = match Interval::starting_at(t, d) {
            Ok(i) => i,
            Err(e) => {
                diags.push(algebra(e, span));
                continue;
            }
        };
        let rec = ClaimRecord { invocation: name.to_string(), interval: interval.clone(), span };
        let clashes = ledger.claim(instance, &ev.var, rec, cs);
        if cfg.conflicts {
            for other in clashes {
                diags.push(
                    Diagnostic::new(
                        Code::InstanceConflict,
                        span,
                        format!(
                            "`{name}` uses `{instance}` during {interval} but `{}` already uses it during {}",
                            other.invocation, other.interval
                        ),
                    )
                    .label(other.span, "earlier use"),
                );
            }
        }
    }
    diags
}

/// A shared instance must finish every use within one period of the event
/// that schedules it.
pub fn check_shared_reuse(delays: &DelayEnv, ledger: &ResourceLedger) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let multi: std::collections::HashSet<&str> = {
        let mut seen = std::collections::HashMap::<&str, usize>::new();
        for (inst, _) in ledger.claims.keys() {
            *seen.entry(inst.as_str()).or_default() += 1;
        }
        seen.into_iter().filter(|(_, n)| *n > 1).map(|(i, _)| i).collect()
    };
    for ((instance, event), claims) in &ledger.claims {
        let who = if multi.contains(instance.as_str()) { format!("`{instance}` (event `{event}`)") } else { format!("`{instance}`") };
        if claims.len() < 2 {
            continue;
        }
        let base = &claims[0].interval.start.base;
        if let Some(other) = claims.iter().find(|c| &c.interval.start.base != base) {
            diags.push(
                Diagnostic::new(
                    Code::MixedEventSharing,
                    other.span,
                    format!(
                        "`{instance}` is shared by uses scheduled on different events `{base}` and `{}`",
                        other.interval.start.base
                    ),
                )
                .label(claims[0].span, "first use")
                .note("no constant delay can describe when the pipeline may restart"),
            );
            continue;
        }
        let Some(Some(delay)) = delays.get(base) else { continue };
        let first = claims.iter().map(|c| c.interval.start.offset).min().unwrap_or(0);
        let last = claims.iter().map(|c| c.interval.end.offset).max().unwrap_or(0);
        let span = last - first;
        if span > *delay {
            let latest = claims.iter().max_by_key(|c| c.interval.end.offset).expect("claims");
            diags.push(
                Diagnostic::new(
                    Code::PipelineSpanExceedsDelay,
                    latest.span,
                    format!(
                        "uses of {who} span {span} cycles ({} to {}) but `{base}` has delay {delay}",
                        EventExpr::new(base.clone(), first),
                        EventExpr::new(base.clone(), last)
                    ),
                )
                .note("a pipelined restart could reuse the instance before the last use finishes"),
            );
        }
    }
    diags
}

/// Phantom events may not share instances and may only drive phantom events
/// of callees.
pub fn check_phantom(c: &ComponentDef, table: &HashMap<&str, &ComponentDef>) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let instances: HashMap<&str, &str> = c
        .body
        .iter()
        .filter_map(|cmd| match cmd {
            Command::Instantiate { name, component, .. } => Some((name.as_str(), component.as_str())),
            _ => None,
        })
        .collect();
    let mut uses: BTreeMap<(&str, &str), Vec<Span>> = BTreeMap::new();
    for cmd in &c.body {
        let Command::Invoke { instance, events, span, .. } = cmd else { continue };
        let Some(callee) = instances.get(instance.as_str()).and_then(|n| table.get(n)) else { continue };
        for (ev, t) in callee.events.iter().zip(events) {
            if !c.is_phantom(&t.base) {
                continue;
            }
            uses.entry((t.base.as_str(), instance.as_str())).or_default().push(*span);
            if !callee.is_phantom(&ev.var) {
                diags.push(Diagnostic::new(
                    Code::PhantomDrivesInterfaced,
                    *span,
                    format!(
                        "phantom event `{}` cannot trigger `{}`, whose event `{}` needs an interface port",
                        t.base, callee.name, ev.var
                    ),
                ));
            }
        }
    }
    for ((ev, instance), spans) in uses {
        let distinct: std::collections::BTreeSet<&Span> = spans.iter().collect();
        if distinct.len() > 1 {
            diags.push(
                Diagnostic::new(
                    Code::PhantomSharing,
                    spans[1],
                    format!("instance `{instance}` is used more than once under phantom event `{ev}`"),
                )
                .label(spans[0], "first use"),
            );
        }
    }
    diags
}

/// Checks one component, returning its resource ledger and diagnostics.
pub fn check_component(c: &ComponentDef, table: &HashMap<&str, &ComponentDef>, cfg: &CheckConfig) -> ComponentReport {
    let mut report = ComponentReport::default();
    let diags = &mut report.diagnostics;
    let cs = constraints(c);
    if !check_signature(c, &cs, cfg, diags) || c.is_extern {
        diag::sort(diags);
        return report;
    }
    let delays: DelayEnv = c.events.iter().map(|e| (e.var.clone(), e.delay.as_const())).collect();

    let mut instances: HashMap<&str, Instance> = HashMap::new();
    let mut invs: HashMap<&str, Invocation> = HashMap::new();
    for cmd in &c.body {
        match cmd {
            Command::Instantiate { name, component, params, .. } => {
                if let Some(callee) = table.get(component.as_str()) {
                    instances.insert(name, Instance { callee, params: params.clone() });
                }
            }
            Command::Invoke { name, instance, events, span, .. } => {
                let Some(inst) = instances.get(instance.as_str()) else { continue };
                let binding: Binding =
                    inst.callee.events.iter().zip(events).map(|(e, t)| (e.var.clone(), t.clone())).collect();
                let mut outs = BTreeMap::new();
                for p in &inst.callee.outputs {
                    match p.interval().map(|i| i.substitute(&binding)) {
                        Some(Ok(i)) => {
                            outs.insert(p.name.clone(), i);
                        }
                        Some(Err(e)) => diags.push(algebra(e, *span)),
                        None => {}
                    }
                }
                report.ledger.outputs.insert(name.clone(), outs);
                invs.insert(name, Invocation { name, instance, binding, span: *span });
            }
            Command::Connect { .. } => {}
        }
    }

    for cmd in &c.body {
        let Command::Invoke { name, args, .. } = cmd else { continue };
        let Some(inv) = invs.get(name.as_str()) else { continue };
        let inst = &instances[inv.instance];
        for (port, arg) in inst.callee.data_inputs().zip(args) {
            let want = port_width(inst.callee, &inst.params, port);
            if let Some(have) = source_width(c, &instances, &invs, arg) {
                if have != want {
                    diags.push(Diagnostic::new(
                        Code::WidthMismatch,
                        arg.span,
                        format!("`{arg}` is {have} bits but `{}` of `{}` expects {want}", port.name, inst.callee.name),
                    ));
                }
            }
        }
        let mut ledger = std::mem::take(&mut report.ledger);
        diags.extend(check_invoke(
            c, &delays, &cs, cfg, inv.name, inv.instance, inst.callee, &inv.binding, args, inv.span, &mut ledger,
        ));
        report.ledger = ledger;
    }

    let mut driven: HashMap<&str, Span> = HashMap::new();
    for cmd in &c.body {
        let Command::Connect { dst, src, span } = cmd else { continue };
        let Some(out) = c.output(&dst.port) else { continue };
        if let Some(prev) = driven.insert(&dst.port, *span) {
            diags.push(
                Diagnostic::new(Code::BadOutputConnection, *span, format!("output `{}` is driven more than once", dst.port))
                    .label(prev, "first driven here"),
            );
        }
        if let Some(have) = source_width(c, &instances, &invs, src) {
            let want = port_width(c, &[], out);
            if have != want {
                diags.push(Diagnostic::new(
                    Code::WidthMismatch,
                    src.span,
                    format!("`{src}` is {have} bits but output `{}` is {want}", dst.port),
                ));
            }
        }
        if cfg.valid_reads {
            if let (Some(req), Some(avail)) = (out.interval(), availability(c, &report.ledger, src)) {
                if let Some(d) = check_connect(&req, &avail, &cs, src.span, &src.to_string()) {
                    diags.push(d.label(out.span, format!("output `{}` declared here", out.name)));
                }
            }
        }
    }
    for out in &c.outputs {
        if !driven.contains_key(out.name.as_str()) {
            diags.push(Diagnostic::new(Code::BadOutputConnection, out.span, format!("output `{}` is never driven", out.name)));
        }
    }

    if cfg.shared_reuse {
        diags.extend(check_shared_reuse(&delays, &report.ledger));
    }
    if cfg.phantom {
        diags.extend(check_phantom(c, table));
    }
    diag::sort(diags);
    report
}

/// Checks every component, callees first, and returns all diagnostics.
pub fn typecheck(rp: &ResolvedProgram, cfg: &CheckConfig) -> Vec<Diagnostic> {
    let table: HashMap<&str, &ComponentDef> = rp.program.components.iter().map(|c| (c.name.as_str(), c)).collect();
    let mut diags: Vec<Diagnostic> = rp
        .order
        .iter()
        .flat_map(|n| check_component(table[n.as_str()], &table, cfg).diagnostics)
        .collect();
    diag::sort(&mut diags);
    diags
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::resolve::{merge, resolve};

    fn check(src: &str) -> Vec<Diagnostic> {
        let lib = parse(crate::prims::STDLIB).unwrap();
        let rp = resolve(merge(lib, parse(src).unwrap())).unwrap_or_else(|d| panic!("{d:?}"));
        typecheck(&rp, &CheckConfig::default())
    }

    fn codes(src: &str) -> Vec<Code> {
        check(src).into_iter().map(|d| d.code).collect()
    }

    #[test]
    fn delay_wellformedness() {
        let c = parse("comp A<G: 1>(@[G, G+3] op: 1) -> () {}").unwrap().components.remove(0);
        let d = check_delay_wellformed(&c, &ConstraintSet::new());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, Code::DelayTooShort);
        let c = parse("comp A<G: 1>(@[G, G+1] op: 1) -> () {}").unwrap().components.remove(0);
        assert!(check_delay_wellformed(&c, &ConstraintSet::new()).is_empty());
        let lib = parse(crate::prims::STDLIB).unwrap();
        let reg = lib.get("Register").unwrap();
        assert!(check_delay_wellformed(reg, &constraints(reg)).is_empty());
    }

    #[test]
    fn connect_examples() {
        let g = |a, b| Interval::new(EventExpr::new("G", a), EventExpr::new("G", b));
        let cs = ConstraintSet::new();
        assert!(check_connect(&g(2, 3), &g(2, 3), &cs, Span::default(), "x").is_none());
        assert!(check_connect(&g(0, 1), &g(0, 3), &cs, Span::default(), "x").is_none());
        let d = check_connect(&g(0, 2), &g(0, 1), &cs, Span::default(), "x").unwrap();
        assert_eq!(d.code, Code::InsufficientAvailability);
        assert_eq!(d.message, "`x` is available for [G, G+1) but required during [G, G+2)");
    }

    #[test]
    fn triggering_and_conflicts() {
        let src = "comp main<T: 1>(@interface[T] go: 1, @[T+2, T+3] a: 32) -> () {
            M := new Mult[32]; m0 := M<T+2>(a, a); }";
        assert_eq!(codes(src), vec![Code::UnsafeTrigger]);
        let src = "comp main<G: 3>(@interface[G] go: 1, @[G, G+2] a: 32) -> () {
            M := new Mult[32]; a0 := M<G>(a, a); a1 := M<G+1>(a, a); }";
        let c = codes(src);
        assert!(c.contains(&Code::InstanceConflict), "{c:?}");
    }

    #[test]
    fn parametric_delay_collapses() {
        let src = "comp main<G: 3>(@interface[G] go: 1, @[G, G+1] x: 32) -> (@[G+1, G+3] o: 32) {
            R := new Register[32]; r := R<G, G+3>(x); o = r.out; }";
        assert!(check(src).is_empty(), "{:?}", check(src));
        let src = "comp main<G: 3>(@interface[G] go: 1, @[G, G+1] x: 32) -> () {
            R := new Register[32]; r := R<G, G+1>(x); }";
        assert_eq!(codes(src), vec![Code::ConstraintViolated]);
    }

    #[test]
    fn shared_reuse_span() {
        let src = "comp main<T: 3>(@interface[T] go: 1, @[T+2, T+3] a: 32, @[T+10, T+11] b: 32) -> () {
            M := new Mult[32]; m0 := M<T+2>(a, a); m1 := M<T+10>(b, b); }";
        let d = check(src);
        assert_eq!(d.iter().map(|d| d.code).collect::<Vec<_>>(), vec![Code::PipelineSpanExceedsDelay]);
        assert!(d[0].message.contains("span 11 cycles"), "{}", d[0].message);
    }

    #[test]
    fn phantom_rules() {
        let src = "comp P<G: 1>(@[G, G+1] x: 32) -> () { R := new Register[32]; r := R<G, G+2>(x); }";
        assert!(codes(src).contains(&Code::PhantomDrivesInterfaced));
        let src = "comp P<G: 1>(@[G, G+1] x: 32) -> () {
            A := new ContPrev[32, 1]; B := new ContPrev[32, 1]; a := A<G>(x); b := B<G>(x); }";
        assert!(check(src).is_empty());
        let src = "comp P<G: 2>(@[G, G+1] x: 32, @[G+1, G+2] y: 32) -> () {
            A := new Delay[32]; a := A<G>(x); b := A<G+1>(y); }";
        assert_eq!(codes(src), vec![Code::PhantomSharing]);
    }

    #[test]
    fn outputs_must_be_driven_once() {
        let src = "comp P<G: 1>(@interface[G] go: 1, @[G, G+1] x: 32) -> (@[G, G+1] o: 32, @[G, G+1] p: 32) {
            o = x; o = x; }";
        assert_eq!(codes(src), vec![Code::BadOutputConnection, Code::BadOutputConnection]);
    }

    #[test]
    fn widths_must_match() {
        let src = "comp P<G: 1>(@interface[G] go: 1, @[G, G+1] x: 8) -> (@[G, G+1] o: 32) {
            A := new Add[32]; a := A<G>(x, x); o = a.out; }";
        assert_eq!(codes(src), vec![Code::WidthMismatch, Code::WidthMismatch]);
    }

    #[test]
    fn user_components_need_constant_delays_and_no_constraints() {
        let src = "comp P<G: L-G, L: 1>() -> () where L > G {}";
        let c = codes(src);
        assert!(c.contains(&Code::NonConstantDelay) && c.contains(&Code::WhereInUserComponent), "{c:?}");
    }

    #[test]
    fn empty_and_inconsistent_signatures() {
        assert_eq!(codes("extern comp X<G: 1>(@[G+1, G+1] a: 1) -> ();"), vec![Code::EmptyInterval]);
        assert_eq!(codes("extern comp X<G: 1, L: 1>() -> () where L > G, G > L;"), vec![Code::InconsistentFacts]);
    }

    #[test]
    fn mutated_config_skips_a_check() {
        let src = "comp main<T: 1>(@interface[T] go: 1, @[T, T+1] a: 32) -> () {
            M := new Mult[32]; m0 := M<T>(a, a); }";
        let lib = parse(crate::prims::STDLIB).unwrap();
        let rp = resolve(merge(lib, parse(src).unwrap())).unwrap();
        assert!(!typecheck(&rp, &CheckConfig::default()).is_empty());
        assert!(typecheck(&rp, &CheckConfig::without("triggering").unwrap()).is_empty());
    }
}
