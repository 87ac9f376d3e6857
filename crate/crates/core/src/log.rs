//! Executable read/write-log semantics and the well-formedness and
//! pipelining checks defined over it.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::ast::*;
use crate::event::{DelayExpr, EventExpr, Interval};
use crate::resolve::ResolvedProgram;

/// Reads and writes at one cycle. Writes are a multiset.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Entry {
    pub reads: BTreeSet<String>,
    pub writes: BTreeMap<String, usize>,
}

impl Entry {
    fn is_empty(&self) -> bool {
        self.reads.is_empty() && self.writes.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Log {
    pub cycles: BTreeMap<u64, Entry>,
}

impl Log {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn read(&mut self, t: u64, port: impl Into<String>) {
        self.cycles.entry(t).or_default().reads.insert(port.into());
    }

    pub fn write(&mut self, t: u64, port: impl Into<String>) {
        *self.cycles.entry(t).or_default().writes.entry(port.into()).or_default() += 1;
    }

    pub fn reads_at(&self, t: u64) -> impl Iterator<Item = &str> {
        self.cycles.get(&t).into_iter().flat_map(|e| e.reads.iter().map(String::as_str))
    }

    pub fn writes_at(&self, t: u64, port: &str) -> usize {
        self.cycles.get(&t).and_then(|e| e.writes.get(port)).copied().unwrap_or(0)
    }

    /// Largest cycle touched, if any.
    pub fn horizon(&self) -> Option<u64> {
        self.cycles.iter().rev().find(|(_, e)| !e.is_empty()).map(|(t, _)| *t)
    }

    /// Cycle-wise union: reads as sets, writes as multisets.
    pub fn join(&self, other: &Log) -> Log {
        let mut out = self.clone();
        for (t, e) in &other.cycles {
            let dst = out.cycles.entry(*t).or_default();
            dst.reads.extend(e.reads.iter().cloned());
            for (p, k) in &e.writes {
                *dst.writes.entry(p.clone()).or_default() += k;
            }
        }
        out
    }

    /// Removes `base`'s writes from this log's write multisets.
    fn minus_writes(&self, base: &Log) -> Log {
        let mut out = self.clone();
        for (t, e) in &base.cycles {
            if let Some(dst) = out.cycles.get_mut(t) {
                for (p, k) in &e.writes {
                    if let Some(have) = dst.writes.get_mut(p) {
                        *have = have.saturating_sub(*k);
                        if *have == 0 {
                            dst.writes.remove(p);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn shift(&self, n: u64) -> Log {
        Log { cycles: self.cycles.iter().map(|(t, e)| (t + n, e.clone())).collect() }
    }

    pub fn rename(&self, f: impl Fn(&str) -> String) -> Log {
        let mut out = Log::new();
        for (t, e) in &self.cycles {
            let dst = out.cycles.entry(*t).or_default();
            dst.reads = e.reads.iter().map(|p| f(p)).collect();
            for (p, k) in &e.writes {
                *dst.writes.entry(f(p)).or_default() += k;
            }
        }
        out
    }

    /// One line per touched cycle: `t=<n> R={..} W={..}`.
    pub fn dump(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Log {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (t, e) in &self.cycles {
            if e.is_empty() {
                continue;
            }
            let reads: Vec<&str> = e.reads.iter().map(String::as_str).collect();
            let writes: Vec<String> = e
                .writes
                .iter()
                .map(|(p, k)| if *k == 1 { p.clone() } else { format!("{p}×{k}") })
                .collect();
            writeln!(f, "t={t} R={{{}}} W={{{}}}", reads.join(", "), writes.join(", "))?;
        }
        Ok(())
    }
}

/// Why a log is not well-formed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateWrite { cycle: u64, port: String, count: usize },
    UnwrittenRead { cycle: u64, port: String },
}

impl Violation {
    pub fn cycle(&self) -> u64 {
        match self {
            Violation::DuplicateWrite { cycle, .. } | Violation::UnwrittenRead { cycle, .. } => *cycle,
        }
    }

    pub fn port(&self) -> &str {
        match self {
            Violation::DuplicateWrite { port, .. } | Violation::UnwrittenRead { port, .. } => port,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateWrite { cycle, port, count } => {
                write!(f, "`{port}` is written {count} times at cycle {cycle}")
            }
            Violation::UnwrittenRead { cycle, port } => write!(f, "`{port}` is read at cycle {cycle} but never written"),
        }
    }
}

/// Every cycle has duplicate-free writes and reads only written ports.
/// Returns the earliest violation.
pub fn well_formed(log: &Log) -> Result<(), Violation> {
    for (t, e) in &log.cycles {
        if let Some((p, k)) = e.writes.iter().find(|(_, k)| **k > 1) {
            return Err(Violation::DuplicateWrite { cycle: *t, port: p.clone(), count: *k });
        }
        if let Some(p) = e.reads.iter().find(|p| !e.writes.contains_key(*p)) {
            return Err(Violation::UnwrittenRead { cycle: *t, port: p.clone() });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineViolation {
    /// Restart distance at which the overlap appears.
    pub n: u64,
    pub violation: Violation,
}

impl fmt::Display for PipelineViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "restarting after {} cycle(s): {}", self.n, self.violation)
    }
}

/// The log overlaid with itself shifted by every `n >= delay` stays
/// well-formed. Shifts beyond the horizon cannot overlap, so only
/// `delay..=horizon` is checked.
pub fn pipelined_well_formed(log: &Log, delay: u64) -> Result<(), PipelineViolation> {
    let Some(horizon) = log.horizon() else { return Ok(()) };
    for n in delay.max(1)..=horizon {
        if let Err(violation) = well_formed(&log.join(&log.shift(n))) {
            return Err(PipelineViolation { n, violation });
        }
    }
    Ok(())
}

fn ground(e: &EventExpr, env: &HashMap<String, u64>) -> u64 {
    env.get(&e.base).copied().unwrap_or(0) + e.offset
}

fn ground_delay(d: &DelayExpr, env: &HashMap<String, u64>) -> u64 {
    match d {
        DelayExpr::Const(n) => *n,
        DelayExpr::Diff(a, b) => ground(a, env).saturating_sub(ground(b, env)),
    }
}

fn cycles(i: &Interval, env: &HashMap<String, u64>) -> std::ops::Range<u64> {
    ground(&i.start, env)..ground(&i.end, env)
}

/// Signature-derived log of a component whose events occur at the given
/// cycles: inputs are read and outputs written over their windows, and each
/// interface port is written for as long as its event is busy.
pub fn component_log(sig: &ComponentDef, binding: &HashMap<String, u64>) -> Log {
    let mut log = Log::new();
    for p in &sig.inputs {
        match &p.kind {
            PortKind::Data(i) => {
                for t in cycles(i, binding) {
                    log.read(t, &p.name);
                }
            }
            PortKind::Interface(e) => {
                let ev = sig.event(e).expect("declared event");
                let start = binding.get(e).copied().unwrap_or(0);
                for t in start..start + ground_delay(&ev.delay, binding) {
                    log.write(t, &p.name);
                }
            }
            PortKind::Clock => {}
        }
    }
    for p in &sig.outputs {
        if let PortKind::Data(i) = &p.kind {
            for t in cycles(i, binding) {
                log.write(t, &p.name);
            }
        }
    }
    log
}

/// A command with all events replaced by cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroundCommand {
    Instantiate,
    Connect { dst: String, src: String },
    /// Adds the callee's log, then connects each argument to its placeholder.
    Invoke { instance_log: Log, connects: Vec<(String, String)> },
    Compose(Box<GroundCommand>, Box<GroundCommand>),
}

pub fn eval(cmd: &GroundCommand, log: &Log) -> Log {
    match cmd {
        GroundCommand::Instantiate => log.clone(),
        GroundCommand::Connect { dst, src } => {
            let mut out = log.clone();
            for e in out.cycles.values_mut() {
                if e.writes.contains_key(src) && e.reads.remove(dst) {
                    e.reads.insert(src.clone());
                }
            }
            out
        }
        GroundCommand::Invoke { instance_log, connects } => {
            let mut out = log.join(instance_log);
            for (dst, src) in connects {
                out = eval(&GroundCommand::Connect { dst: dst.clone(), src: src.clone() }, &out);
            }
            out
        }
        GroundCommand::Compose(a, b) => {
            let la = eval(a, log);
            let lb = eval(b, log);
            // The shared starting log is counted once.
            la.join(&lb.minus_writes(log))
        }
    }
}

/// Placeholder name for a port seen through an invocation. Interface ports
/// belong to the physical instance so that overlapping uses collide.
fn placeholder(callee: &ComponentDef, instance: &str, invocation: &str, port: &str) -> String {
    match callee.input(port).map(|p| &p.kind) {
        Some(PortKind::Interface(_)) => format!("{instance}.{port}"),
        _ => format!("{invocation}.{port}"),
    }
}

fn port_ref_name(r: &PortRef) -> String {
    r.to_string()
}

/// Log of one execution of a component body with all of its events at cycle
/// 0. The environment writes the inputs and reads the outputs.
pub fn body_log(rp: &ResolvedProgram, comp: &ComponentDef) -> Log {
    let env: HashMap<String, u64> = comp.events.iter().map(|e| (e.var.clone(), 0)).collect();
    let mut log = Log::new();
    for p in &comp.inputs {
        match &p.kind {
            PortKind::Data(i) => {
                for t in cycles(i, &env) {
                    log.write(t, &p.name);
                }
            }
            PortKind::Interface(e) => {
                let ev = comp.event(e).expect("declared event");
                for t in 0..ground_delay(&ev.delay, &env) {
                    log.write(t, &p.name);
                }
            }
            PortKind::Clock => {}
        }
    }
    for p in &comp.outputs {
        if let PortKind::Data(i) = &p.kind {
            for t in cycles(i, &env) {
                log.read(t, &p.name);
            }
        }
    }

    let instances: HashMap<&str, &ComponentDef> = comp
        .body
        .iter()
        .filter_map(|c| match c {
            Command::Instantiate { name, component, .. } => Some((name.as_str(), rp.get(component))),
            _ => None,
        })
        .collect();
    let mut connects = Vec::new();
    for cmd in &comp.body {
        let Command::Invoke { name, instance, events, args, .. } = cmd else { continue };
        let callee = instances[instance.as_str()];
        let binding: HashMap<String, u64> =
            callee.events.iter().zip(events).map(|(e, t)| (e.var.clone(), ground(t, &env))).collect();
        let inst_log = component_log(callee, &binding).rename(|p| placeholder(callee, instance, name, p));
        log = eval(&GroundCommand::Invoke { instance_log: inst_log, connects: vec![] }, &log);
        for (p, a) in callee.data_inputs().zip(args) {
            connects.push((format!("{name}.{}", p.name), port_ref_name(a)));
        }
    }
    for cmd in &comp.body {
        if let Command::Connect { dst, src, .. } = cmd {
            connects.push((port_ref_name(dst), port_ref_name(src)));
        }
    }
    for (dst, src) in connects {
        log = eval(&GroundCommand::Connect { dst, src }, &log);
    }
    log
}

/// Oracle verdict for one component: a single execution is well-formed and
/// restarts every `delay` cycles (or later) are too.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    Ok,
    IllFormed(Violation),
    Unpipelinable(PipelineViolation),
}

pub fn oracle(rp: &ResolvedProgram, comp: &ComponentDef) -> OracleVerdict {
    let log = body_log(rp, comp);
    if let Err(v) = well_formed(&log) {
        return OracleVerdict::IllFormed(v);
    }
    // Every event is grounded at the same cycle, so the smallest delay bounds
    // how soon the whole body may restart.
    let delay = comp.events.iter().filter_map(|e| e.delay.as_const()).min().unwrap_or(1);
    match pipelined_well_formed(&log, delay) {
        Ok(()) => OracleVerdict::Ok,
        Err(p) => OracleVerdict::Unpipelinable(p),
    }
}
