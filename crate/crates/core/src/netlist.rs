//! Structural netlists built from Low Filament, their Verilog text, and a
//! flattening simulator over them.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::ast::PortKind;
use crate::low::{Guard, LowComponent, LowProgram, Source};
use crate::prims::{Primitive, Value, PRIMITIVES, PRIMITIVES_V};
use crate::resolve::ResolvedProgram;
use crate::sim::{Engine, Frame, InvalidRead, SimError};
use crate::typeck::port_width;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Wire(String),
    Const { value: u64, width: u64 },
    /// Unselected data. Emitted as zero; simulated as invalid.
    Undefined { width: u64 },
    Or(Vec<Expr>),
    Cond { cond: Box<Expr>, then: Box<Expr>, els: Box<Expr> },
}

impl Expr {
    fn wires<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Wire(w) => out.push(w),
            Expr::Const { .. } | Expr::Undefined { .. } => {}
            Expr::Or(es) => es.iter().for_each(|e| e.wires(out)),
            Expr::Cond { cond, then, els } => {
                cond.wires(out);
                then.wires(out);
                els.wires(out);
            }
        }
    }

    fn verilog(&self) -> String {
        match self {
            Expr::Wire(w) => w.clone(),
            Expr::Const { value, width } => format!("{width}'d{value}"),
            Expr::Undefined { width } => format!("{width}'d0"),
            Expr::Or(es) if es.len() == 1 => es[0].verilog(),
            Expr::Or(es) => format!("({})", es.iter().map(Expr::verilog).collect::<Vec<_>>().join(" | ")),
            Expr::Cond { cond, then, els } => format!("{} ? {} : {}", cond.verilog(), then.verilog(), els.verilog()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reg {
    pub name: String,
    pub width: u64,
    pub next: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conn {
    pub port: String,
    pub wire: String,
    pub output: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub name: String,
    pub module: String,
    pub primitive: bool,
    pub params: Vec<(String, u64)>,
    pub params_raw: Vec<u64>,
    pub conns: Vec<Conn>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetlistModule {
    pub name: String,
    pub inputs: Vec<(String, u64)>,
    pub outputs: Vec<(String, u64)>,
    pub wires: Vec<(String, u64)>,
    pub regs: Vec<Reg>,
    pub cells: Vec<Cell>,
    pub assigns: Vec<(String, Expr)>,
    /// Visible signal name (`port` or `Inst.port`) for each traced wire.
    pub probes: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetlistError {
    #[error("no primitive implementation for extern `{0}`")]
    MissingPrimitive(String),
    #[error("`{module}`: net `{net}` has {drivers} drivers")]
    MultiplyDriven { module: String, net: String, drivers: usize },
    #[error("`{module}`: net `{net}` is used but never driven")]
    Undriven { module: String, net: String },
}

fn wire_name(port: &str) -> String {
    port.replace('.', "_")
}

fn stage_wire(fsm: &str, stage: u64) -> String {
    format!("{fsm}_{stage}")
}

fn guard_expr(g: &Guard) -> Option<Expr> {
    match g {
        Guard::True => None,
        Guard::Stages { fsm, stages } => Some(Expr::Or(stages.iter().map(|s| Expr::Wire(stage_wire(fsm, *s))).collect())),
    }
}

/// Builds the netlist of one lowered component.
pub fn build_module(rp: &ResolvedProgram, lc: &LowComponent) -> Result<NetlistModule, NetlistError> {
    let mut m = NetlistModule {
        name: lc.name.clone(),
        inputs: lc.inputs.iter().map(|p| (p.name.clone(), p.width)).collect(),
        outputs: lc.outputs.iter().map(|p| (p.name.clone(), p.width)).collect(),
        wires: vec![],
        regs: vec![],
        cells: vec![],
        assigns: vec![],
        probes: vec![],
    };
    for (p, _) in m.inputs.iter().chain(&m.outputs) {
        m.probes.push((p.clone(), p.clone()));
    }
    for f in &lc.fsms {
        m.wires.push((stage_wire(&f.name, 0), 1));
        m.assigns.push((stage_wire(&f.name, 0), Expr::Wire(f.trigger.clone())));
        for s in 1..f.states {
            m.regs.push(Reg { name: stage_wire(&f.name, s), width: 1, next: Expr::Wire(stage_wire(&f.name, s - 1)) });
        }
    }

    let mut widths: HashMap<String, u64> = m.inputs.iter().chain(&m.outputs).cloned().collect();
    let mut defaults: Vec<(String, Expr)> = Vec::new();
    for inst in &lc.instances {
        let sig = rp.get(&inst.component);
        let primitive = sig.is_extern;
        if primitive && !PRIMITIVES.contains(&inst.component.as_str()) {
            return Err(NetlistError::MissingPrimitive(inst.component.clone()));
        }
        let mut conns = Vec::new();
        for (p, output) in sig.inputs.iter().map(|p| (p, false)).chain(sig.outputs.iter().map(|p| (p, true))) {
            if matches!(p.kind, PortKind::Clock) {
                continue;
            }
            let w = port_width(sig, &inst.params, p);
            let wire = wire_name(&format!("{}.{}", inst.name, p.name));
            m.wires.push((wire.clone(), w));
            widths.insert(wire.clone(), w);
            m.probes.push((format!("{}.{}", inst.name, p.name), wire.clone()));
            if !output {
                let default = match p.kind {
                    PortKind::Interface(_) => Expr::Const { value: 0, width: w },
                    _ => Expr::Undefined { width: w },
                };
                defaults.push((wire.clone(), default));
            }
            conns.push(Conn { port: p.name.clone(), wire, output });
        }
        m.cells.push(Cell {
            name: inst.name.clone(),
            module: inst.component.clone(),
            primitive,
            params: sig.params.iter().cloned().zip(inst.params.iter().copied()).collect(),
            params_raw: inst.params.clone(),
            conns,
        });
    }

    let mut order: Vec<String> = Vec::new();
    let mut by_dst: HashMap<String, Vec<(&Guard, &Source)>> = HashMap::new();
    for a in &lc.assigns {
        let dst = wire_name(&a.dst);
        if !by_dst.contains_key(&dst) {
            order.push(dst.clone());
        }
        by_dst.entry(dst).or_default().push((&a.guard, &a.src));
    }
    let src_expr = |s: &Source, w: u64| match s {
        Source::Port(p) => Expr::Wire(wire_name(p)),
        Source::Const(n) => Expr::Const { value: *n, width: w },
    };
    for dst in &order {
        let w = widths.get(dst).copied().unwrap_or(1);
        let default = defaults
            .iter()
            .find(|(d, _)| d == dst)
            .map(|(_, e)| e.clone())
            .unwrap_or(Expr::Undefined { width: w });
        let mut expr = default;
        for (g, s) in by_dst[dst].iter().rev() {
            expr = match guard_expr(g) {
                None => src_expr(s, w),
                Some(cond) => Expr::Cond { cond: Box::new(cond), then: Box::new(src_expr(s, w)), els: Box::new(expr) },
            };
        }
        m.assigns.push((dst.clone(), expr));
    }
    for (wire, e) in defaults {
        if !by_dst.contains_key(&wire) {
            m.assigns.push((wire, e));
        }
    }
    audit(&m)?;
    Ok(m)
}

/// Every net has exactly one driver and every used net is driven.
pub fn audit(m: &NetlistModule) -> Result<(), NetlistError> {
    let mut drivers: BTreeMap<&str, usize> = BTreeMap::new();
    for (p, _) in &m.inputs {
        *drivers.entry(p).or_default() += 1;
    }
    for (w, _) in &m.assigns {
        *drivers.entry(w).or_default() += 1;
    }
    for r in &m.regs {
        *drivers.entry(&r.name).or_default() += 1;
    }
    for c in &m.cells {
        for conn in c.conns.iter().filter(|c| c.output) {
            *drivers.entry(&conn.wire).or_default() += 1;
        }
    }
    for (net, n) in &drivers {
        if *n > 1 {
            return Err(NetlistError::MultiplyDriven { module: m.name.clone(), net: net.to_string(), drivers: *n });
        }
    }
    let mut used: Vec<&str> = Vec::new();
    for (_, e) in &m.assigns {
        e.wires(&mut used);
    }
    for r in &m.regs {
        r.next.wires(&mut used);
    }
    for c in &m.cells {
        used.extend(c.conns.iter().filter(|c| !c.output).map(|c| c.wire.as_str()));
    }
    used.extend(m.outputs.iter().map(|(p, _)| p.as_str()));
    for net in used {
        if !drivers.contains_key(net) {
            return Err(NetlistError::Undriven { module: m.name.clone(), net: net.to_string() });
        }
    }
    Ok(())
}

fn decl(w: u64) -> String {
    if w == 1 {
        String::new()
    } else {
        format!("[{}:0] ", w - 1)
    }
}

impl NetlistModule {
    pub fn verilog(&self) -> String {
        let mut out = String::new();
        let mut ports = vec!["  input wire clk".to_string(), "  input wire reset".to_string()];
        ports.extend(self.inputs.iter().map(|(p, w)| format!("  input wire {}{p}", decl(*w))));
        ports.extend(self.outputs.iter().map(|(p, w)| format!("  output wire {}{p}", decl(*w))));
        let _ = writeln!(out, "module {} (\n{}\n);", self.name, ports.join(",\n"));
        for (w, n) in &self.wires {
            let _ = writeln!(out, "  wire {}{w};", decl(*n));
        }
        for r in &self.regs {
            let _ = writeln!(out, "  reg {}{};", decl(r.width), r.name);
        }
        if !self.regs.is_empty() {
            out.push_str("  always @(posedge clk) begin\n    if (reset) begin\n");
            for r in &self.regs {
                let _ = writeln!(out, "      {} <= {}'d0;", r.name, r.width);
            }
            out.push_str("    end else begin\n");
            for r in &self.regs {
                let _ = writeln!(out, "      {} <= {};", r.name, r.next.verilog());
            }
            out.push_str("    end\n  end\n");
        }
        for c in &self.cells {
            let params = if c.params.is_empty() {
                String::new()
            } else {
                let ps: Vec<String> = c.params.iter().map(|(k, v)| format!(".{k}({v})")).collect();
                format!(" #({})", ps.join(", "))
            };
            let mut conns = vec!["    .clk(clk)".to_string(), "    .reset(reset)".to_string()];
            conns.extend(c.conns.iter().map(|k| format!("    .{}({})", k.port, k.wire)));
            let _ = writeln!(out, "  {}{} {} (\n{}\n  );", c.module, params, c.name, conns.join(",\n"));
        }
        for (w, e) in &self.assigns {
            let _ = writeln!(out, "  assign {w} = {};", e.verilog());
        }
        out.push_str("endmodule\n");
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Netlist {
    pub modules: Vec<NetlistModule>,
}

impl Netlist {
    pub fn get(&self, name: &str) -> Option<&NetlistModule> {
        self.modules.iter().find(|m| m.name == name)
    }

    /// One file per component plus the primitive library, as (name, text).
    pub fn files(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self.modules.iter().map(|m| (format!("{}.v", m.name), m.verilog())).collect();
        out.push(("primitives.v".to_string(), PRIMITIVES_V.to_string()));
        out
    }
}

pub fn build(rp: &ResolvedProgram, lp: &LowProgram) -> Result<Netlist, NetlistError> {
    Ok(Netlist { modules: lp.components.iter().map(|c| build_module(rp, c)).collect::<Result<_, _>>()? })
}

#[derive(Debug, Clone)]
enum FlatExpr {
    Sig(usize),
    Const(u64),
    Undefined,
    Or(Vec<FlatExpr>),
    Cond(Box<FlatExpr>, Box<FlatExpr>, Box<FlatExpr>),
}

impl FlatExpr {
    fn deps(&self, out: &mut Vec<usize>) {
        match self {
            FlatExpr::Sig(i) => out.push(*i),
            FlatExpr::Const(_) | FlatExpr::Undefined => {}
            FlatExpr::Or(es) => es.iter().for_each(|e| e.deps(out)),
            FlatExpr::Cond(c, t, e) => {
                c.deps(out);
                t.deps(out);
                e.deps(out);
            }
        }
    }

    fn eval(&self, vals: &[Value]) -> Value {
        match self {
            FlatExpr::Sig(i) => vals[*i],
            FlatExpr::Const(v) => Value::Bits(*v),
            FlatExpr::Undefined => Value::Invalid,
            FlatExpr::Or(es) => Value::Bits(es.iter().any(|e| e.eval(vals).is_high()) as u64),
            FlatExpr::Cond(c, t, e) => {
                if c.eval(vals).is_high() {
                    t.eval(vals)
                } else {
                    e.eval(vals)
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Driver {
    Input,
    Comb(FlatExpr),
    Reg(FlatExpr),
    Prim { prim: usize, port: String },
    Pending,
}

struct FlatPrim {
    path: String,
    model: Primitive,
    inputs: HashMap<String, usize>,
}

/// Simulates a netlist after flattening its module hierarchy.
pub struct NetlistSim {
    drivers: Vec<Driver>,
    order: Vec<usize>,
    prims: Vec<FlatPrim>,
    vals: Vec<Value>,
    inputs: HashMap<String, usize>,
    probes: Vec<(String, usize, u64)>,
    invalid_reads: Vec<InvalidRead>,
    cycle: u64,
}

fn flat_expr(e: &Expr, sigs: &HashMap<String, usize>) -> FlatExpr {
    match e {
        Expr::Wire(w) => FlatExpr::Sig(sigs[w]),
        Expr::Const { value, .. } => FlatExpr::Const(*value),
        Expr::Undefined { .. } => FlatExpr::Undefined,
        Expr::Or(es) => FlatExpr::Or(es.iter().map(|e| flat_expr(e, sigs)).collect()),
        Expr::Cond { cond, then, els } => FlatExpr::Cond(
            Box::new(flat_expr(cond, sigs)),
            Box::new(flat_expr(then, sigs)),
            Box::new(flat_expr(els, sigs)),
        ),
    }
}

impl NetlistSim {
    pub fn new(nl: &Netlist, top: &str) -> Result<NetlistSim, SimError> {
        let mut sim = NetlistSim {
            drivers: vec![],
            order: vec![],
            prims: vec![],
            vals: vec![],
            inputs: HashMap::new(),
            probes: vec![],
            invalid_reads: vec![],
            cycle: 0,
        };
        let m = nl.get(top).ok_or_else(|| SimError::UnknownComponent(top.to_string()))?;
        let (sigs, _) = sim.flatten(nl, m, "", None)?;
        for (p, _) in &m.inputs {
            sim.inputs.insert(p.clone(), sigs[p]);
        }
        let widths: HashMap<&str, u64> = m.inputs.iter().chain(&m.outputs).chain(&m.wires).map(|(k, w)| (k.as_str(), *w)).collect();
        sim.probes = m.probes.iter().map(|(name, wire)| (name.clone(), sigs[wire], widths[wire.as_str()])).collect();
        sim.schedule(top)?;
        sim.vals = vec![Value::Invalid; sim.drivers.len()];
        for (i, d) in sim.drivers.iter().enumerate() {
            if matches!(d, Driver::Reg(_)) {
                sim.vals[i] = Value::Bits(0);
            }
        }
        Ok(sim)
    }

    fn alloc(&mut self) -> usize {
        self.drivers.push(Driver::Pending);
        self.drivers.len() - 1
    }

    /// Allocates signals for `m`. Inputs are driven by `bound` (or are top
    /// inputs); returns the signal map and the output signals.
    fn flatten(
        &mut self,
        nl: &Netlist,
        m: &NetlistModule,
        path: &str,
        bound: Option<&HashMap<String, usize>>,
    ) -> Result<(HashMap<String, usize>, HashMap<String, usize>), SimError> {
        let mut sigs = HashMap::new();
        for (p, _) in &m.inputs {
            let i = self.alloc();
            self.drivers[i] = match bound {
                None => Driver::Input,
                Some(b) => Driver::Comb(FlatExpr::Sig(b[p])),
            };
            sigs.insert(p.clone(), i);
        }
        for (w, _) in m.outputs.iter().chain(&m.wires) {
            let i = self.alloc();
            sigs.insert(w.clone(), i);
        }
        for r in &m.regs {
            let i = self.alloc();
            sigs.insert(r.name.clone(), i);
        }
        for c in &m.cells {
            let ins: HashMap<String, usize> =
                c.conns.iter().filter(|k| !k.output).map(|k| (k.port.clone(), sigs[&k.wire])).collect();
            if c.primitive {
                let model =
                    Primitive::new(&c.module, &c.params_raw).ok_or_else(|| SimError::MissingPrimitive(c.module.clone()))?;
                self.prims.push(FlatPrim { path: format!("{path}{}", c.name), model, inputs: ins });
                let prim = self.prims.len() - 1;
                for k in c.conns.iter().filter(|k| k.output) {
                    self.drivers[sigs[&k.wire]] = Driver::Prim { prim, port: k.port.clone() };
                }
            } else {
                let sub = nl.get(&c.module).ok_or_else(|| SimError::UnknownComponent(c.module.clone()))?;
                let (sub_sigs, _) = self.flatten(nl, sub, &format!("{path}{}.", c.name), Some(&ins))?;
                for k in c.conns.iter().filter(|k| k.output) {
                    self.drivers[sigs[&k.wire]] = Driver::Comb(FlatExpr::Sig(sub_sigs[&k.port]));
                }
            }
        }
        for (w, e) in &m.assigns {
            self.drivers[sigs[w]] = Driver::Comb(flat_expr(e, &sigs));
        }
        for r in &m.regs {
            self.drivers[sigs[&r.name]] = Driver::Reg(flat_expr(&r.next, &sigs));
        }
        let outs = m.outputs.iter().map(|(p, _)| (p.clone(), sigs[p])).collect();
        Ok((sigs, outs))
    }

    /// Topological order of combinational signals.
    fn schedule(&mut self, top: &str) -> Result<(), SimError> {
        let n = self.drivers.len();
        let mut deps: Vec<Vec<usize>> = vec![vec![]; n];
        for (i, d) in self.drivers.iter().enumerate() {
            match d {
                Driver::Comb(e) => e.deps(&mut deps[i]),
                Driver::Prim { prim, port } => {
                    let p = &self.prims[*prim];
                    for input in p.model.comb_deps(port) {
                        if let Some(&s) = p.inputs.get(*input) {
                            deps[i].push(s);
                        }
                    }
                }
                _ => {}
            }
        }
        let mut users: Vec<Vec<usize>> = vec![vec![]; n];
        let mut indeg = vec![0usize; n];
        for (i, ds) in deps.iter().enumerate() {
            for &d in ds {
                users[d].push(i);
                indeg[i] += 1;
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = queue.pop_front() {
            order.push(i);
            for &u in &users[i] {
                indeg[u] -= 1;
                if indeg[u] == 0 {
                    queue.push_back(u);
                }
            }
        }
        if order.len() != n {
            return Err(SimError::CombinationalLoop(top.to_string()));
        }
        self.order = order;
        Ok(())
    }
}

impl Engine for NetlistSim {
    fn step(&mut self, inputs: &BTreeMap<String, Value>) -> Result<Frame, SimError> {
        for (name, &s) in &self.inputs {
            self.vals[s] = inputs.get(name).copied().unwrap_or(Value::Invalid);
        }
        for &i in &self.order {
            self.vals[i] = match &self.drivers[i] {
                Driver::Input | Driver::Reg(_) => continue,
                Driver::Comb(e) => e.eval(&self.vals),
                Driver::Prim { prim, port } => {
                    let p = &self.prims[*prim];
                    let vals = &self.vals;
                    p.model.output(port, &|name: &str| p.inputs.get(name).map_or(Value::Invalid, |&s| vals[s]))
                }
                Driver::Pending => Value::Invalid,
            };
        }
        let frame = self.probes.iter().map(|(name, s, _)| (name.clone(), self.vals[*s])).collect();

        let next: Vec<(usize, Value)> = self
            .drivers
            .iter()
            .enumerate()
            .filter_map(|(i, d)| match d {
                Driver::Reg(e) => Some((i, Value::Bits(e.eval(&self.vals).is_high() as u64))),
                _ => None,
            })
            .collect();
        for p in &mut self.prims {
            let vals = &self.vals;
            let inputs = &p.inputs;
            for bad in p.model.tick(&|name: &str| inputs.get(name).map_or(Value::Invalid, |&s| vals[s])) {
                self.invalid_reads.push(InvalidRead { cycle: self.cycle, instance: p.path.clone(), port: bad.port.to_string() });
            }
        }
        for (i, v) in next {
            self.vals[i] = v;
        }
        self.cycle += 1;
        Ok(frame)
    }

    fn widths(&self) -> BTreeMap<String, u64> {
        self.probes.iter().map(|(n, _, w)| (n.clone(), *w)).collect()
    }

    fn invalid_reads(&self) -> &[InvalidRead] {
        &self.invalid_reads
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::check_source;
    use crate::low::lower_program;

    fn load(file: &str) -> (ResolvedProgram, LowProgram) {
        let path = format!("{}/corpus/{file}", env!("CARGO_MANIFEST_DIR"));
        let rp = check_source(file, &std::fs::read_to_string(path).unwrap()).into_program().unwrap();
        let lp = lower_program(&rp);
        (rp, lp)
    }

    #[test]
    fn shared_adder_has_one_driver_per_port() {
        let (rp, lp) = load("adder_reuse.fil");
        let nl = build(&rp, &lp).unwrap();
        let m = nl.get("Example").unwrap();
        assert_eq!(m.regs.iter().map(|r| r.name.as_str()).collect::<Vec<_>>(), ["Gf_1", "Gf_2"]);
        let left: Vec<_> = m.assigns.iter().filter(|(w, _)| w == "A_left").collect();
        assert_eq!(left.len(), 1);
        assert_eq!(left[0].1.verilog(), "Gf_0 ? l : Gf_2 ? R_out : 32'd0");
        let v = m.verilog();
        assert!(v.contains("  assign Gf_0 = go;\n"), "{v}");
        assert!(v.contains("  Add #(.W(32)) A (\n    .clk(clk),\n    .reset(reset),\n"), "{v}");
        assert_eq!(v, build(&rp, &lp).unwrap().get("Example").unwrap().verilog());
    }

    #[test]
    fn continuous_pipeline_is_pure_wiring() {
        let (rp, lp) = load("continuous.fil");
        let m = build(&rp, &lp).unwrap().modules.remove(0);
        assert!(m.regs.is_empty());
        assert!(!m.verilog().contains("always"));
    }

    #[test]
    fn unknown_externs_have_no_implementation() {
        let src = "extern comp Blk<G: 1>(@interface[G] go: 1) -> (@[G, G+1] o: 8);
            comp Top<G: 1>(@interface[G] go: 1) -> (@[G, G+1] o: 8) { B := new Blk; b := B<G>(); o = b.o; }";
        let rp = check_source("t.fil", src).into_program().unwrap();
        let lp = lower_program(&rp);
        assert_eq!(build(&rp, &lp), Err(NetlistError::MissingPrimitive("Blk".into())));
    }

    #[test]
    fn audit_finds_double_drivers() {
        let (rp, lp) = load("alu.fil");
        let mut m = build(&rp, &lp).unwrap().modules.remove(0);
        let dup = m.assigns[0].clone();
        m.assigns.push(dup);
        assert!(matches!(audit(&m), Err(NetlistError::MultiplyDriven { .. })));
        m.assigns.pop();
        m.assigns.retain(|(w, _)| w != "o");
        assert!(matches!(audit(&m), Err(NetlistError::Undriven { .. })));
    }

    #[test]
    fn combinational_loops_are_rejected() {
        let m = NetlistModule {
            name: "L".into(),
            inputs: vec![],
            outputs: vec![],
            wires: vec![("a".into(), 1), ("b".into(), 1)],
            regs: vec![],
            cells: vec![],
            assigns: vec![("a".into(), Expr::Wire("b".into())), ("b".into(), Expr::Wire("a".into()))],
            probes: vec![],
        };
        let nl = Netlist { modules: vec![m] };
        assert!(matches!(NetlistSim::new(&nl, "L"), Err(SimError::CombinationalLoop(_))));
    }
}
