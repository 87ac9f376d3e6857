//! Low Filament: explicit pipeline FSMs, interface-port assignments, and
//! guarded data assignments.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::ast::*;
use crate::event::{EventExpr, Interval};
use crate::resolve::ResolvedProgram;
use crate::typeck::port_width;

/// Shift register of `states` stages started by `trigger`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fsm {
    pub name: String,
    pub event: String,
    pub states: u64,
    pub trigger: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Guard {
    True,
    /// Disjunction of `fsm._s` for each stage `s`.
    Stages { fsm: String, stages: BTreeSet<u64> },
}

impl Guard {
    pub fn overlaps(&self, other: &Guard) -> bool {
        match (self, other) {
            (Guard::True, _) | (_, Guard::True) => true,
            (Guard::Stages { fsm: a, stages: s }, Guard::Stages { fsm: b, stages: t }) => {
                a == b && !s.is_disjoint(t)
            }
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::True => write!(f, "1"),
            Guard::Stages { fsm, stages } => {
                let parts: Vec<String> = stages.iter().map(|s| format!("{fsm}._{s}")).collect();
                write!(f, "{}", parts.join(" || "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    /// An input of this component, or `Inst.port` of an instance output.
    Port(String),
    Const(u64),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Port(p) => write!(f, "{p}"),
            Source::Const(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assign {
    /// An output of this component, or `Inst.port` of an instance input.
    pub dst: String,
    pub guard: Guard,
    pub src: Source,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowInstance {
    pub name: String,
    pub component: String,
    pub params: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowPort {
    pub name: String,
    pub width: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowComponent {
    pub name: String,
    pub inputs: Vec<LowPort>,
    pub outputs: Vec<LowPort>,
    pub fsms: Vec<Fsm>,
    pub instances: Vec<LowInstance>,
    pub assigns: Vec<Assign>,
}

impl LowComponent {
    pub fn fsm(&self, name: &str) -> Option<&Fsm> {
        self.fsms.iter().find(|f| f.name == name)
    }

    pub fn instance(&self, name: &str) -> Option<&LowInstance> {
        self.instances.iter().find(|i| i.name == name)
    }
}

impl fmt::Display for LowComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ports = |ps: &[LowPort]| ps.iter().map(|p| format!("{}: {}", p.name, p.width)).collect::<Vec<_>>().join(", ");
        writeln!(f, "comp {}({}) -> ({}) {{", self.name, ports(&self.inputs), ports(&self.outputs))?;
        for m in &self.fsms {
            writeln!(f, "  fsm {}[{}]({});", m.name, m.states, m.trigger)?;
        }
        for i in &self.instances {
            if i.params.is_empty() {
                writeln!(f, "  {} := new {};", i.name, i.component)?;
            } else {
                let ps: Vec<String> = i.params.iter().map(u64::to_string).collect();
                writeln!(f, "  {} := new {}[{}];", i.name, i.component, ps.join(", "))?;
            }
        }
        for a in &self.assigns {
            match a.guard {
                Guard::True => writeln!(f, "  {} = {};", a.dst, a.src)?,
                _ => writeln!(f, "  {} = {} ? {};", a.dst, a.guard, a.src)?,
            }
        }
        writeln!(f, "}}")
    }
}

/// User components in dependency order; externs stay external.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowProgram {
    pub components: Vec<LowComponent>,
}

impl LowProgram {
    pub fn get(&self, name: &str) -> Option<&LowComponent> {
        self.components.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for LowProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LowError {
    #[error("`{component}`: guards `{a}` and `{b}` on `{dst}` can be active together")]
    OverlappingGuards { component: String, dst: String, a: String, b: String },
    #[error("`{component}`: `{fsm}._{stage}` is outside its {states}-state FSM")]
    StageOutOfRange { component: String, fsm: String, stage: u64, states: u64 },
    #[error("`{component}`: guard refers to unknown FSM `{fsm}`")]
    UnknownFsm { component: String, fsm: String },
}

pub fn fsm_name(event: &str) -> String {
    format!("{event}f")
}

/// Stages spanned by `[e+s, e+end)`, relative to `e`.
fn stages(i: &Interval) -> BTreeSet<u64> {
    (i.start.offset..i.end.offset).collect()
}

fn guard_for(c: &ComponentDef, base: &str, stages: BTreeSet<u64>) -> Guard {
    if c.is_phantom(base) {
        Guard::True
    } else {
        Guard::Stages { fsm: fsm_name(base), stages }
    }
}

fn source(r: &PortRef, invocations: &HashMap<&str, &str>) -> Source {
    match &r.owner {
        None => Source::Port(r.port.clone()),
        Some(inv) => Source::Port(format!("{}.{}", invocations[inv.as_str()], r.port)),
    }
}

/// Lowers one checked component.
pub fn lower(rp: &ResolvedProgram, c: &ComponentDef) -> LowComponent {
    let mut instances = Vec::new();
    let mut callee_of: HashMap<&str, &ComponentDef> = HashMap::new();
    let mut invocations: HashMap<&str, &str> = HashMap::new();
    for cmd in &c.body {
        match cmd {
            Command::Instantiate { name, component, params, .. } => {
                instances.push(LowInstance { name: name.clone(), component: component.clone(), params: params.clone() });
                callee_of.insert(name, rp.get(component));
            }
            Command::Invoke { name, instance, .. } => {
                invocations.insert(name, instance);
            }
            Command::Connect { .. } => {}
        }
    }

    let mut assigns = Vec::new();
    for cmd in &c.body {
        match cmd {
            Command::Invoke { instance, events, args, .. } => {
                let callee = callee_of[instance.as_str()];
                let binding: HashMap<String, EventExpr> =
                    callee.events.iter().zip(events).map(|(e, t)| (e.var.clone(), t.clone())).collect();
                for (ev, t) in callee.events.iter().zip(events) {
                    if let Some(port) = callee.interface_port(&ev.var) {
                        assigns.push(Assign {
                            dst: format!("{instance}.{}", port.name),
                            guard: guard_for(c, &t.base, BTreeSet::from([t.offset])),
                            src: Source::Const(1),
                        });
                    }
                }
                for (p, a) in callee.data_inputs().zip(args) {
                    let req = p.interval().expect("data port").substitute(&binding).expect("checked offsets");
                    assigns.push(Assign {
                        dst: format!("{instance}.{}", p.name),
                        guard: guard_for(c, &req.start.base, stages(&req)),
                        src: source(a, &invocations),
                    });
                }
            }
            Command::Connect { dst, src, .. } => {
                assigns.push(Assign { dst: dst.port.clone(), guard: Guard::True, src: source(src, &invocations) });
            }
            Command::Instantiate { .. } => {}
        }
    }

    let mut fsms = Vec::new();
    for ev in &c.events {
        let Some(port) = c.interface_port(&ev.var) else { continue };
        let name = fsm_name(&ev.var);
        let states = compute_fsm_states(&assigns, &name);
        fsms.push(Fsm { name, event: ev.var.clone(), states, trigger: port.name.clone() });
    }

    let width = |p: &PortDef| port_width(c, &[], p);
    LowComponent {
        name: c.name.clone(),
        inputs: c
            .inputs
            .iter()
            .filter(|p| !matches!(p.kind, PortKind::Clock))
            .map(|p| LowPort { name: p.name.clone(), width: width(p) })
            .collect(),
        outputs: c.outputs.iter().map(|p| LowPort { name: p.name.clone(), width: width(p) }).collect(),
        fsms,
        instances,
        assigns,
    }
}

/// One more than the largest stage of `fsm` any guard uses.
pub fn compute_fsm_states(assigns: &[Assign], fsm: &str) -> u64 {
    assigns
        .iter()
        .filter_map(|a| match &a.guard {
            Guard::Stages { fsm: f, stages } if f == fsm => stages.last().copied(),
            _ => None,
        })
        .max()
        .map_or(1, |s| s + 1)
}

pub fn lower_program(rp: &ResolvedProgram) -> LowProgram {
    LowProgram { components: rp.user_components().map(|c| lower(rp, c)).collect() }
}

/// Guards on each destination are pairwise exclusive and every stage exists.
pub fn verify_low(lc: &LowComponent) -> Result<(), LowError> {
    let mut by_dst: BTreeMap<&str, Vec<&Guard>> = BTreeMap::new();
    for a in &lc.assigns {
        if let Guard::Stages { fsm, stages } = &a.guard {
            let m = lc
                .fsm(fsm)
                .ok_or_else(|| LowError::UnknownFsm { component: lc.name.clone(), fsm: fsm.clone() })?;
            if let Some(&stage) = stages.iter().find(|&&s| s >= m.states) {
                return Err(LowError::StageOutOfRange {
                    component: lc.name.clone(),
                    fsm: fsm.clone(),
                    stage,
                    states: m.states,
                });
            }
        }
        by_dst.entry(&a.dst).or_default().push(&a.guard);
    }
    for (dst, guards) in by_dst {
        for (i, a) in guards.iter().enumerate() {
            for b in &guards[i + 1..] {
                if a.overlaps(b) {
                    return Err(LowError::OverlappingGuards {
                        component: lc.name.clone(),
                        dst: dst.to_string(),
                        a: a.to_string(),
                        b: b.to_string(),
                    });
                }
            }
        }
    }
    Ok(())
}

pub fn verify_program(lp: &LowProgram) -> Result<(), LowError> {
    lp.components.iter().try_for_each(verify_low)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::check_source;

    fn corpus(file: &str) -> LowProgram {
        let path = format!("{}/corpus/{file}", env!("CARGO_MANIFEST_DIR"));
        let rp = check_source(file, &std::fs::read_to_string(path).unwrap()).into_program().unwrap();
        lower_program(&rp)
    }

    #[test]
    fn shared_adder_lowers_to_golden() {
        let lp = corpus("adder_reuse.fil");
        assert_eq!(lp.to_string(), include_str!("../goldens/adder_reuse.low"));
        let c = lp.get("Example").unwrap();
        assert_eq!(c.fsms.len(), 1);
        assert_eq!(c.fsms[0].states, 3);
        let go: Vec<_> = c.assigns.iter().filter(|a| a.dst == "A.go").map(|a| a.guard.to_string()).collect();
        assert_eq!(go, ["Gf._0", "Gf._2"]);
        assert_eq!(verify_low(c), Ok(()));
    }

    #[test]
    fn continuous_pipeline_has_no_fsm() {
        let lp = corpus("continuous.fil");
        let c = lp.get("Pairs").unwrap();
        assert!(c.fsms.is_empty());
        assert!(c.assigns.iter().all(|a| a.guard == Guard::True));
        assert_eq!(verify_low(c), Ok(()));
    }

    #[test]
    fn overlapping_guards_are_caught() {
        let stages = |s: &[u64]| Guard::Stages { fsm: "Gf".into(), stages: s.iter().copied().collect() };
        let lc = LowComponent {
            name: "X".into(),
            inputs: vec![],
            outputs: vec![],
            fsms: vec![Fsm { name: "Gf".into(), event: "G".into(), states: 2, trigger: "go".into() }],
            instances: vec![],
            assigns: vec![
                Assign { dst: "A.left".into(), guard: stages(&[0, 1]), src: Source::Const(0) },
                Assign { dst: "A.left".into(), guard: stages(&[1]), src: Source::Const(1) },
            ],
        };
        assert!(matches!(verify_low(&lc), Err(LowError::OverlappingGuards { .. })));
        let mut short = lc.clone();
        short.assigns.truncate(1);
        short.fsms[0].states = 1;
        assert!(matches!(verify_low(&short), Err(LowError::StageOutOfRange { stage: 1, .. })));
    }

    #[test]
    fn state_count_is_minimal_on_the_corpus() {
        let dir = format!("{}/corpus", env!("CARGO_MANIFEST_DIR"));
        for f in ["alu.fil", "adder_reuse.fil", "div_comb.fil", "div_pipe.fil", "div_iter.fil", "systolic.fil", "sum3.fil", "continuous.fil"] {
            let lp = corpus(f);
            assert!(std::path::Path::new(&dir).join(f).exists());
            for c in &lp.components {
                assert_eq!(verify_low(c), Ok(()), "{f}");
                for m in &c.fsms {
                    let mut fewer = c.clone();
                    fewer.fsms.iter_mut().find(|x| x.name == m.name).unwrap().states -= 1;
                    let uses_stages = c.assigns.iter().any(|a| matches!(&a.guard, Guard::Stages { fsm, .. } if *fsm == m.name));
                    if uses_stages {
                        assert!(matches!(verify_low(&fewer), Err(LowError::StageOutOfRange { .. })), "{f}");
                    }
                }
            }
        }
    }

    #[test]
    fn pipelined_divider_uses_eight_stages() {
        let lp = corpus("div_pipe.fil");
        assert_eq!(lp.get("Pipe").unwrap().fsms[0].states, 8);
        let lp = corpus("div_iter.fil");
        assert_eq!(lp.get("Iter").unwrap().fsms[0].states, 8);
    }
}
