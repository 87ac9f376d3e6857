//! Syntax tree for programs.

use crate::event::{DelayExpr, EventExpr, Interval};
use crate::span::Span;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub components: Vec<ComponentDef>,
    /// Distinguished top-level component, if any.
    pub entry: Option<String>,
}

impl Program {
    pub fn get(&self, name: &str) -> Option<&ComponentDef> {
        self.components.iter().find(|c| c.name == name)
    }

    /// Copy with every span reset, for structural comparison.
    pub fn without_spans(&self) -> Program {
        let mut p = self.clone();
        for c in &mut p.components {
            c.clear_spans();
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentDef {
    pub name: String,
    pub is_extern: bool,
    /// Integer parameter names (extern primitives only).
    pub params: Vec<String>,
    pub events: Vec<EventBinding>,
    pub inputs: Vec<PortDef>,
    pub outputs: Vec<PortDef>,
    pub where_constraints: Vec<OrderingConstraint>,
    pub body: Vec<Command>,
    /// Whether a `{ ... }` body was written, even if empty.
    pub has_body: bool,
    pub span: Span,
}

impl ComponentDef {
    pub fn event(&self, name: &str) -> Option<&EventBinding> {
        self.events.iter().find(|e| e.var == name)
    }

    pub fn input(&self, name: &str) -> Option<&PortDef> {
        self.inputs.iter().find(|p| p.name == name)
    }

    pub fn output(&self, name: &str) -> Option<&PortDef> {
        self.outputs.iter().find(|p| p.name == name)
    }

    pub fn port(&self, name: &str) -> Option<&PortDef> {
        self.input(name).or_else(|| self.output(name))
    }

    /// Inputs that invocations must supply, in declaration order.
    pub fn data_inputs(&self) -> impl Iterator<Item = &PortDef> {
        self.inputs.iter().filter(|p| matches!(p.kind, PortKind::Data(_)))
    }

    pub fn interface_port(&self, event: &str) -> Option<&PortDef> {
        self.inputs
            .iter()
            .find(|p| matches!(&p.kind, PortKind::Interface(e) if e == event))
    }

    pub fn is_phantom(&self, event: &str) -> bool {
        self.interface_port(event).is_none()
    }

    fn clear_spans(&mut self) {
        self.span = Span::default();
        for e in &mut self.events {
            e.span = Span::default();
        }
        for p in self.inputs.iter_mut().chain(self.outputs.iter_mut()) {
            p.span = Span::default();
        }
        for w in &mut self.where_constraints {
            w.span = Span::default();
        }
        for c in &mut self.body {
            c.clear_spans();
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventBinding {
    pub var: String,
    pub delay: DelayExpr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Width {
    Const(u64),
    Param(String),
}

impl std::fmt::Display for Width {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Width::Const(n) => write!(f, "{n}"),
            Width::Param(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PortKind {
    /// One-cycle control input marking the occurrence of an event.
    Interface(String),
    Data(Interval),
    /// Clock or reset pass-through without timing.
    Clock,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortDef {
    pub name: String,
    pub width: Width,
    pub kind: PortKind,
    pub span: Span,
}

impl PortDef {
    /// Availability window; an interface port for `G` is live during `[G, G+1)`.
    pub fn interval(&self) -> Option<Interval> {
        match &self.kind {
            PortKind::Data(i) => Some(i.clone()),
            PortKind::Interface(e) => Some(Interval::new(EventExpr::var(e), EventExpr::new(e, 1))),
            PortKind::Clock => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingConstraint {
    pub lhs: EventExpr,
    pub op: CmpOp,
    pub rhs: EventExpr,
    pub span: Span,
}

impl OrderingConstraint {
    /// Minimum value of `lhs - rhs`.
    pub fn min_gap(&self) -> i64 {
        match self.op {
            CmpOp::Gt => 1,
            CmpOp::Ge => 0,
        }
    }
}

/// Reference to a port of the enclosing component or of an invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortRef {
    pub owner: Option<String>,
    pub port: String,
    pub span: Span,
}

impl PortRef {
    pub fn this(port: impl Into<String>) -> Self {
        PortRef { owner: None, port: port.into(), span: Span::default() }
    }

    pub fn on(owner: impl Into<String>, port: impl Into<String>) -> Self {
        PortRef { owner: Some(owner.into()), port: port.into(), span: Span::default() }
    }
}

impl std::fmt::Display for PortRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.owner {
            Some(o) => write!(f, "{o}.{}", self.port),
            None => write!(f, "{}", self.port),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Instantiate {
        name: String,
        component: String,
        params: Vec<u64>,
        span: Span,
    },
    Invoke {
        name: String,
        instance: String,
        events: Vec<EventExpr>,
        args: Vec<PortRef>,
        span: Span,
    },
    Connect {
        dst: PortRef,
        src: PortRef,
        span: Span,
    },
}

impl Command {
    pub fn span(&self) -> Span {
        match self {
            Command::Instantiate { span, .. }
            | Command::Invoke { span, .. }
            | Command::Connect { span, .. } => *span,
        }
    }

    fn clear_spans(&mut self) {
        match self {
            Command::Instantiate { span, .. } => *span = Span::default(),
            Command::Invoke { span, args, .. } => {
                *span = Span::default();
                for a in args {
                    a.span = Span::default();
                }
            }
            Command::Connect { dst, src, span } => {
                *span = Span::default();
                dst.span = Span::default();
                src.span = Span::default();
            }
        }
    }
}
