//! Cycle-accurate simulation of Low Filament programs and the harness that
//! drives inputs exactly within their availability windows.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{ComponentDef, PortKind};
use crate::low::{Guard, LowComponent, LowProgram, Source};
use crate::prims::{Primitive, Value};
use crate::resolve::ResolvedProgram;
use crate::typeck::port_width;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("no component named `{0}`")]
    UnknownComponent(String),
    #[error("no behavior model for primitive `{0}`")]
    MissingPrimitive(String),
    #[error("combinational loop in `{0}`")]
    CombinationalLoop(String),
    #[error("event `{0}` has a non-constant delay")]
    NonConstantDelay(String),
    #[error("vector {vector} has no value for input `{port}`")]
    MissingInput { vector: usize, port: String },
    #[error("input `{port}` would be driven by two vectors at cycle {cycle}")]
    OverlappingWindows { port: String, cycle: u64 },
}

/// Values of the visible signals in one cycle: the top component's ports and
/// its instances' ports as `Inst.port`.
pub type Frame = BTreeMap<String, Value>;

/// An enabled primitive captured an invalid value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvalidRead {
    pub cycle: u64,
    pub instance: String,
    pub port: String,
}

/// A cycle-stepped simulator.
pub trait Engine {
    /// Evaluates one cycle with the given top-level inputs, then clocks.
    fn step(&mut self, inputs: &BTreeMap<String, Value>) -> Result<Frame, SimError>;
    /// Bit widths of every signal reported in frames.
    fn widths(&self) -> BTreeMap<String, u64>;
    fn invalid_reads(&self) -> &[InvalidRead];
}

enum Child {
    Prim(Primitive),
    Comp(Box<LowInstance>),
}

struct ChildInfo {
    name: String,
    inputs: Vec<String>,
    outputs: Vec<String>,
    model: Child,
}

/// Simulation state of one Low component instance.
struct LowInstance {
    comp: LowComponent,
    /// Destinations defaulting to 0 when no guard is active.
    interface_dsts: HashSet<String>,
    /// Stage `s >= 1` of each FSM; stage 0 is the trigger itself.
    fsm_state: BTreeMap<String, Vec<bool>>,
    children: Vec<ChildInfo>,
    widths: BTreeMap<String, u64>,
    vals: HashMap<String, Value>,
    cycle: u64,
    path: String,
}

fn signature_ports(sig: &ComponentDef, params: &[u64]) -> (Vec<(String, u64, bool)>, Vec<(String, u64)>) {
    let ins = sig
        .inputs
        .iter()
        .filter(|p| !matches!(p.kind, PortKind::Clock))
        .map(|p| (p.name.clone(), port_width(sig, params, p), matches!(p.kind, PortKind::Interface(_))))
        .collect();
    let outs = sig.outputs.iter().map(|p| (p.name.clone(), port_width(sig, params, p))).collect();
    (ins, outs)
}

impl LowInstance {
    fn build(rp: &ResolvedProgram, lp: &LowProgram, name: &str, path: String) -> Result<LowInstance, SimError> {
        let comp = lp.get(name).ok_or_else(|| SimError::UnknownComponent(name.to_string()))?.clone();
        let mut widths = BTreeMap::new();
        for p in comp.inputs.iter().chain(&comp.outputs) {
            widths.insert(p.name.clone(), p.width);
        }
        let mut interface_dsts = HashSet::new();
        let mut children = Vec::new();
        for inst in &comp.instances {
            let sig = rp.get(&inst.component);
            let (ins, outs) = signature_ports(sig, &inst.params);
            for (p, w, iface) in &ins {
                let key = format!("{}.{p}", inst.name);
                if *iface {
                    interface_dsts.insert(key.clone());
                }
                widths.insert(key, *w);
            }
            for (p, w) in &outs {
                widths.insert(format!("{}.{p}", inst.name), *w);
            }
            let model = if sig.is_extern {
                Child::Prim(
                    Primitive::new(&inst.component, &inst.params)
                        .ok_or_else(|| SimError::MissingPrimitive(inst.component.clone()))?,
                )
            } else {
                Child::Comp(Box::new(LowInstance::build(rp, lp, &inst.component, format!("{path}{}.", inst.name))?))
            };
            children.push(ChildInfo {
                name: inst.name.clone(),
                inputs: ins.into_iter().map(|(p, _, _)| p).collect(),
                outputs: outs.into_iter().map(|(p, _)| p).collect(),
                model,
            });
        }
        let fsm_state = comp.fsms.iter().map(|f| (f.name.clone(), vec![false; f.states as usize])).collect();
        Ok(LowInstance { comp, interface_dsts, fsm_state, children, widths, vals: HashMap::new(), cycle: 0, path })
    }

    fn stage_active(&self, fsm: &str, stage: u64) -> bool {
        let Some(f) = self.comp.fsm(fsm) else { return false };
        if stage == 0 {
            return self.vals.get(&f.trigger).copied().unwrap_or(Value::Invalid).is_high();
        }
        self.fsm_state.get(fsm).and_then(|s| s.get(stage as usize)).copied().unwrap_or(false)
    }

    fn guard_active(&self, g: &Guard) -> bool {
        match g {
            Guard::True => true,
            Guard::Stages { fsm, stages } => stages.iter().any(|s| self.stage_active(fsm, *s)),
        }
    }

    fn source(&self, s: &Source) -> Value {
        match s {
            Source::Const(n) => Value::Bits(*n),
            Source::Port(p) => self.vals.get(p).copied().unwrap_or(Value::Invalid),
        }
    }

    /// Settles combinational values by iterating to a fixed point.
    fn eval(&mut self, inputs: &HashMap<String, Value>) -> Result<(), SimError> {
        self.vals.clear();
        for p in &self.comp.inputs {
            self.vals.insert(p.name.clone(), inputs.get(&p.name).copied().unwrap_or(Value::Invalid));
        }
        let mut dsts: Vec<&str> = Vec::new();
        for a in &self.comp.assigns {
            if !dsts.contains(&a.dst.as_str()) {
                dsts.push(&a.dst);
            }
        }
        let dsts: Vec<String> = dsts.into_iter().map(String::from).collect();
        let limit = 2 * (self.widths.len() + self.children.len()) + 4;
        for _ in 0..limit {
            let mut changed = false;
            for dst in &dsts {
                let v = self
                    .comp
                    .assigns
                    .iter()
                    .filter(|a| &a.dst == dst)
                    .find(|a| self.guard_active(&a.guard))
                    .map(|a| self.source(&a.src))
                    .unwrap_or(if self.interface_dsts.contains(dst) { Value::Bits(0) } else { Value::Invalid });
                if self.vals.get(dst) != Some(&v) {
                    self.vals.insert(dst.clone(), v);
                    changed = true;
                }
            }
            let mut updates = Vec::new();
            for child in &mut self.children {
                let get = |p: &str| self.vals.get(&format!("{}.{p}", child.name)).copied().unwrap_or(Value::Invalid);
                match &mut child.model {
                    Child::Prim(prim) => {
                        for o in &child.outputs {
                            updates.push((format!("{}.{o}", child.name), prim.output(o, &get)));
                        }
                    }
                    Child::Comp(sub) => {
                        let ins: HashMap<String, Value> = child.inputs.iter().map(|p| (p.clone(), get(p))).collect();
                        sub.eval(&ins)?;
                        for o in &child.outputs {
                            let v = sub.vals.get(o).copied().unwrap_or(Value::Invalid);
                            updates.push((format!("{}.{o}", child.name), v));
                        }
                    }
                }
            }
            for (k, v) in updates {
                if self.vals.get(&k) != Some(&v) {
                    self.vals.insert(k, v);
                    changed = true;
                }
            }
            if !changed {
                for k in self.widths.keys() {
                    self.vals.entry(k.clone()).or_insert(Value::Invalid);
                }
                return Ok(());
            }
        }
        Err(SimError::CombinationalLoop(self.comp.name.clone()))
    }

    fn tick(&mut self, reads: &mut Vec<InvalidRead>) {
        for f in &self.comp.fsms {
            let trigger = self.vals.get(&f.trigger).copied().unwrap_or(Value::Invalid).is_high();
            let st = self.fsm_state.get_mut(&f.name).expect("fsm state");
            for i in (1..st.len()).rev() {
                st[i] = if i == 1 { trigger } else { st[i - 1] };
            }
        }
        for child in &mut self.children {
            match &mut child.model {
                Child::Prim(prim) => {
                    let get = |p: &str| self.vals.get(&format!("{}.{p}", child.name)).copied().unwrap_or(Value::Invalid);
                    for bad in prim.tick(&get) {
                        reads.push(InvalidRead {
                            cycle: self.cycle,
                            instance: format!("{}{}", self.path, child.name),
                            port: bad.port.to_string(),
                        });
                    }
                }
                Child::Comp(sub) => sub.tick(reads),
            }
        }
        self.cycle += 1;
    }
}

/// Interprets a Low program directly.
pub struct LowSim {
    top: LowInstance,
    invalid_reads: Vec<InvalidRead>,
}

impl LowSim {
    pub fn new(rp: &ResolvedProgram, lp: &LowProgram, top: &str) -> Result<LowSim, SimError> {
        Ok(LowSim { top: LowInstance::build(rp, lp, top, String::new())?, invalid_reads: vec![] })
    }
}

impl Engine for LowSim {
    fn step(&mut self, inputs: &BTreeMap<String, Value>) -> Result<Frame, SimError> {
        let ins: HashMap<String, Value> = inputs.iter().map(|(k, v)| (k.clone(), *v)).collect();
        self.top.eval(&ins)?;
        let frame = self.top.widths.keys().map(|k| (k.clone(), self.top.vals[k])).collect();
        self.top.tick(&mut self.invalid_reads);
        Ok(frame)
    }

    fn widths(&self) -> BTreeMap<String, u64> {
        self.top.widths.clone()
    }

    fn invalid_reads(&self) -> &[InvalidRead] {
        &self.invalid_reads
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    BackToBack,
    RandomGaps,
}

/// Stimulus document: one map of input values per vector.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StimulusSpec {
    pub vectors: Vec<BTreeMap<String, u64>>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Capture {
    pub vector: usize,
    pub port: String,
    pub cycle: u64,
}

/// Concrete per-cycle input drive with the cycles at which outputs are valid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stimulus {
    pub triggers: Vec<u64>,
    pub inputs: Vec<BTreeMap<String, Value>>,
    pub captures: Vec<Capture>,
}

impl Stimulus {
    pub fn cycles(&self) -> u64 {
        self.inputs.len() as u64
    }
}

/// Cycles between triggers: the largest event delay.
pub fn initiation_interval(sig: &ComponentDef) -> Result<u64, SimError> {
    let mut d = 1;
    for e in &sig.events {
        d = d.max(e.delay.as_const().ok_or_else(|| SimError::NonConstantDelay(e.var.clone()))?);
    }
    Ok(d)
}

/// Schedules one trigger per vector, drives each input only inside its
/// window, and records where each output must be captured.
pub fn gen_stimulus(sig: &ComponentDef, vectors: &[BTreeMap<String, u64>], mode: Mode, seed: u64) -> Result<Stimulus, SimError> {
    let d = initiation_interval(sig)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triggers = Vec::with_capacity(vectors.len());
    for i in 0..vectors.len() {
        let t = match (i, mode) {
            (0, _) => 0,
            (_, Mode::BackToBack) => triggers[i - 1] + d,
            (_, Mode::RandomGaps) => triggers[i - 1] + rng.gen_range(d..=3 * d),
        };
        triggers.push(t);
    }

    let mut drives: BTreeMap<u64, BTreeMap<String, Value>> = BTreeMap::new();
    let mut captures = Vec::new();
    let mut last = triggers.last().copied().unwrap_or(0);
    for (k, (vec, &t)) in vectors.iter().zip(&triggers).enumerate() {
        for p in &sig.inputs {
            match &p.kind {
                PortKind::Interface(_) => {
                    drives.entry(t).or_default().insert(p.name.clone(), Value::Bits(1));
                }
                PortKind::Data(i) => {
                    let v = *vec.get(&p.name).ok_or_else(|| SimError::MissingInput { vector: k, port: p.name.clone() })?;
                    let w = port_width(sig, &[], p);
                    for c in t + i.start.offset..t + i.end.offset {
                        let slot = drives.entry(c).or_default();
                        if slot.insert(p.name.clone(), Value::bits(v, w)).is_some() {
                            return Err(SimError::OverlappingWindows { port: p.name.clone(), cycle: c });
                        }
                        last = last.max(c);
                    }
                }
                PortKind::Clock => {}
            }
        }
        for p in &sig.outputs {
            if let PortKind::Data(i) = &p.kind {
                for c in t + i.start.offset..t + i.end.offset {
                    captures.push(Capture { vector: k, port: p.name.clone(), cycle: c });
                    last = last.max(c);
                }
            }
        }
    }

    let n = if vectors.is_empty() { 0 } else { last + 1 };
    let inputs = (0..n)
        .map(|c| {
            let mut frame = BTreeMap::new();
            for p in &sig.inputs {
                let idle = match p.kind {
                    PortKind::Interface(_) => Value::Bits(0),
                    _ => Value::Invalid,
                };
                if !matches!(p.kind, PortKind::Clock) {
                    frame.insert(p.name.clone(), idle);
                }
            }
            if let Some(d) = drives.get(&c) {
                frame.extend(d.iter().map(|(k, v)| (k.clone(), *v)));
            }
            frame
        })
        .collect();
    Ok(Stimulus { triggers, inputs, captures })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub frames: Vec<Frame>,
    pub widths: BTreeMap<String, u64>,
    pub invalid_reads: Vec<InvalidRead>,
}

impl Trace {
    pub fn value(&self, cycle: u64, port: &str) -> Value {
        self.frames.get(cycle as usize).and_then(|f| f.get(port)).copied().unwrap_or(Value::Invalid)
    }

    /// One line per cycle: `<cycle> port=value ...`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (c, f) in self.frames.iter().enumerate() {
            let _ = write!(out, "{c}");
            for (k, v) in f {
                let _ = write!(out, " {k}={v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn vcd(&self, module: &str) -> String {
        let mut out = String::from("$timescale 1ns $end\n");
        let _ = writeln!(out, "$scope module {module} $end");
        let ids: BTreeMap<&String, String> =
            self.widths.keys().enumerate().map(|(i, k)| (k, format!("s{i}"))).collect();
        for (k, w) in &self.widths {
            let _ = writeln!(out, "$var wire {w} {} {} $end", ids[k], k.replace('.', "_"));
        }
        out.push_str("$upscope $end\n$enddefinitions $end\n");
        let mut prev: BTreeMap<&String, Value> = BTreeMap::new();
        for (c, f) in self.frames.iter().enumerate() {
            let _ = writeln!(out, "#{c}");
            for (k, v) in f {
                if prev.get(k) == Some(v) {
                    continue;
                }
                let bits = match v {
                    Value::Bits(n) => format!("{n:b}"),
                    Value::Invalid => "x".to_string(),
                };
                let _ = writeln!(out, "b{bits} {}", ids.get(k).map(String::as_str).unwrap_or("?"));
                prev.insert(k, *v);
            }
        }
        let _ = writeln!(out, "#{}", self.frames.len());
        out
    }
}

pub fn simulate(engine: &mut dyn Engine, stim: &Stimulus) -> Result<Trace, SimError> {
    simulate_for(engine, stim, stim.cycles())
}

/// Runs for `cycles` cycles; inputs past the stimulus stay idle.
pub fn simulate_for(engine: &mut dyn Engine, stim: &Stimulus, cycles: u64) -> Result<Trace, SimError> {
    let idle: BTreeMap<String, Value> = stim
        .inputs
        .first()
        .map(|f| f.iter().map(|(k, v)| (k.clone(), if *v == Value::Bits(1) { Value::Bits(0) } else { Value::Invalid })).collect())
        .unwrap_or_default();
    let mut frames = Vec::with_capacity(cycles as usize);
    for c in 0..cycles {
        let inputs = stim.inputs.get(c as usize).unwrap_or(&idle);
        frames.push(engine.step(inputs)?);
    }
    Ok(Trace { frames, widths: engine.widths(), invalid_reads: engine.invalid_reads().to_vec() })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub vector: usize,
    pub port: String,
    pub cycle: u64,
    pub expected: u64,
    pub got: Value,
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "vector {}: `{}` at cycle {} expected {} got {}",
            self.vector, self.port, self.cycle, self.expected, self.got
        )
    }
}

/// Compares every captured output against `golden` applied to its vector.
pub fn check_trace(
    trace: &Trace,
    stim: &Stimulus,
    vectors: &[BTreeMap<String, u64>],
    golden: &dyn Fn(&BTreeMap<String, u64>) -> BTreeMap<String, u64>,
) -> Vec<Mismatch> {
    let expected: Vec<_> = vectors.iter().map(golden).collect();
    let mut out = Vec::new();
    for cap in &stim.captures {
        let Some(&want) = expected[cap.vector].get(&cap.port) else { continue };
        let got = trace.value(cap.cycle, &cap.port);
        if got != Value::Bits(want) {
            out.push(Mismatch { vector: cap.vector, port: cap.port.clone(), cycle: cap.cycle, expected: want, got });
        }
    }
    out
}

/// Generates a stimulus, simulates it, and checks outputs against `golden`.
pub fn run_and_check(
    engine: &mut dyn Engine,
    sig: &ComponentDef,
    vectors: &[BTreeMap<String, u64>],
    mode: Mode,
    seed: u64,
    golden: &dyn Fn(&BTreeMap<String, u64>) -> BTreeMap<String, u64>,
) -> Result<Vec<Mismatch>, SimError> {
    let stim = gen_stimulus(sig, vectors, mode, seed)?;
    let trace = simulate(engine, &stim)?;
    Ok(check_trace(&trace, &stim, vectors, golden))
}

/// Output values captured per vector, in capture order.
pub fn captured(trace: &Trace, stim: &Stimulus) -> Vec<Vec<(String, Value)>> {
    let n = stim.triggers.len();
    let mut out = vec![Vec::new(); n];
    for cap in &stim.captures {
        out[cap.vector].push((cap.port.clone(), trace.value(cap.cycle, &cap.port)));
    }
    out
}
