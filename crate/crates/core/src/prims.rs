//! The primitive component library: timing contracts, cycle-level behavior
//! models, and Verilog implementations.

use std::fmt;

/// Timing contracts of the primitives, prepended to every program.
pub const STDLIB: &str = include_str!("stdlib.fil");

/// Verilog modules implementing the primitives.
pub const PRIMITIVES_V: &str = include_str!("primitives.v");

/// Names of primitives that have a behavior model and a Verilog module.
pub const PRIMITIVES: &[&str] = &[
    "Add", "ContAdd", "ContPrev", "Const", "Delay", "FastMult", "HoldSum", "Init", "Mult", "MultComb", "Mux", "Nxt",
    "Prev", "Register",
];

/// A wire value. `Invalid` marks values outside any availability window and
/// propagates through arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Value {
    Bits(u64),
    Invalid,
}

pub fn mask(width: u64) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl Value {
    pub fn bits(v: u64, width: u64) -> Value {
        Value::Bits(v & mask(width))
    }

    pub fn as_bits(self) -> Option<u64> {
        match self {
            Value::Bits(v) => Some(v),
            Value::Invalid => None,
        }
    }

    pub fn is_high(self) -> bool {
        self == Value::Bits(1)
    }

    fn zip(self, other: Value, width: u64, f: impl Fn(u64, u64) -> u64) -> Value {
        match (self, other) {
            (Value::Bits(a), Value::Bits(b)) => Value::bits(f(a, b), width),
            _ => Value::Invalid,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bits(v) => write!(f, "{v}"),
            Value::Invalid => write!(f, "x"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Add,
    ContAdd,
    ContPrev,
    Const,
    Delay,
    Mult,
    HoldSum,
    Init,
    MultComb,
    Mux,
    Nxt,
    Prev,
    Register,
}

/// A captured invalid value: an enabled primitive stored or consumed a value
/// outside its availability window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvalidSample {
    pub port: &'static str,
}

/// Behavior model of one primitive instance.
#[derive(Debug, Clone)]
pub struct Primitive {
    kind: Kind,
    width: u64,
    params: Vec<u64>,
    state: Vec<Value>,
}

/// One step of restoring division: shift the accumulator left by one,
/// bringing in the quotient's top bit, and subtract the divisor if it fits.
pub fn div_step(a: u64, q: u64, div: u64, width: u64) -> (u64, u64) {
    let a2 = (a << 1) | ((q >> (width - 1)) & 1);
    let q2 = q << 1;
    if a2 >= div {
        ((a2 - div) & mask(width), (q2 | 1) & mask(width))
    } else {
        (a2 & mask(width), q2 & mask(width))
    }
}

impl Primitive {
    /// Model for the named primitive with the instance's parameters.
    pub fn new(name: &str, params: &[u64]) -> Option<Primitive> {
        let kind = match name {
            "Add" => Kind::Add,
            "ContAdd" => Kind::ContAdd,
            "ContPrev" => Kind::ContPrev,
            "Const" => Kind::Const,
            "Delay" => Kind::Delay,
            "Mult" | "FastMult" => Kind::Mult,
            "HoldSum" => Kind::HoldSum,
            "Init" => Kind::Init,
            "MultComb" => Kind::MultComb,
            "Mux" => Kind::Mux,
            "Nxt" => Kind::Nxt,
            "Prev" => Kind::Prev,
            "Register" => Kind::Register,
            _ => return None,
        };
        let width = params.first().copied().unwrap_or(32);
        let mut p = Primitive { kind, width, params: params.to_vec(), state: vec![] };
        p.reset();
        Some(p)
    }

    pub fn reset(&mut self) {
        self.state = match self.kind {
            Kind::Mult => vec![Value::Invalid; 2],
            Kind::HoldSum => vec![Value::Invalid, Value::Bits(0)],
            Kind::Prev | Kind::ContPrev => {
                let safe = self.params.get(1).copied().unwrap_or(0) == 1;
                vec![if safe { Value::Bits(0) } else { Value::Invalid }]
            }
            Kind::Delay | Kind::Register => vec![Value::Invalid],
            _ => vec![],
        };
    }

    /// Inputs that `output` depends on within the same cycle.
    pub fn comb_deps(&self, output: &str) -> &'static [&'static str] {
        match (self.kind, output) {
            (Kind::Add | Kind::MultComb | Kind::ContAdd, _) => &["left", "right"],
            (Kind::Mux, _) => &["sel", "tru", "fal"],
            (Kind::Init, "Q") => &["left"],
            (Kind::Nxt, _) => &["a", "q", "div"],
            _ => &[],
        }
    }

    /// Value of `output` given this cycle's inputs.
    pub fn output(&self, output: &str, input: &dyn Fn(&str) -> Value) -> Value {
        let w = self.width;
        match self.kind {
            Kind::Add | Kind::ContAdd => input("left").zip(input("right"), w, u64::wrapping_add),
            Kind::MultComb => input("left").zip(input("right"), w, u64::wrapping_mul),
            Kind::Mux => match input("sel") {
                Value::Bits(1) => input("tru"),
                Value::Bits(_) => input("fal"),
                Value::Invalid => Value::Invalid,
            },
            Kind::Const => Value::bits(self.params.get(1).copied().unwrap_or(0), w),
            Kind::Init => match output {
                "A" => Value::Bits(0),
                _ => input("left"),
            },
            Kind::Nxt => match (input("a"), input("q"), input("div")) {
                (Value::Bits(a), Value::Bits(q), Value::Bits(d)) => {
                    let (a2, q2) = div_step(a, q, d, w);
                    Value::Bits(if output == "A" { a2 } else { q2 })
                }
                _ => Value::Invalid,
            },
            Kind::Mult => self.state[1],
            Kind::HoldSum => {
                if self.state[1] == Value::Bits(3) {
                    self.state[0]
                } else {
                    Value::Invalid
                }
            }
            Kind::Prev | Kind::ContPrev | Kind::Delay | Kind::Register => self.state[0],
        }
    }

    /// Advances one clock edge. Reports enabled captures of invalid values.
    pub fn tick(&mut self, input: &dyn Fn(&str) -> Value) -> Vec<InvalidSample> {
        let w = self.width;
        let mut bad = vec![];
        let capture = |port: &'static str, bad: &mut Vec<InvalidSample>| {
            let v = input(port);
            if v == Value::Invalid {
                bad.push(InvalidSample { port });
            }
            v
        };
        match self.kind {
            Kind::Mult => {
                let next = if input("go").is_high() {
                    let l = capture("left", &mut bad);
                    let r = capture("right", &mut bad);
                    l.zip(r, w, u64::wrapping_mul)
                } else {
                    Value::Invalid
                };
                self.state = vec![next, self.state[0]];
            }
            Kind::HoldSum => {
                if input("go").is_high() {
                    self.state = vec![capture("in", &mut bad), Value::Bits(1)];
                } else if let Value::Bits(n @ 1..=2) = self.state[1] {
                    let v = capture("in", &mut bad);
                    self.state = vec![self.state[0].zip(v, w, u64::wrapping_add), Value::Bits(n + 1)];
                } else {
                    self.state[1] = Value::Bits(0);
                }
            }
            Kind::Prev | Kind::Register => {
                if input("en").is_high() {
                    self.state[0] = capture("in", &mut bad);
                }
            }
            Kind::ContPrev | Kind::Delay => self.state[0] = input("in"),
            _ => {}
        }
        bad
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn drive(pairs: &[(&str, Value)]) -> impl Fn(&str) -> Value {
        let m: HashMap<String, Value> = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        move |p: &str| m.get(p).copied().unwrap_or(Value::Invalid)
    }

    #[test]
    fn arithmetic_wraps_at_width() {
        let add = Primitive::new("Add", &[8]).unwrap();
        let i = drive(&[("left", Value::Bits(200)), ("right", Value::Bits(100))]);
        assert_eq!(add.output("out", &i), Value::Bits(44));
        let j = drive(&[("left", Value::Bits(1)), ("right", Value::Invalid)]);
        assert_eq!(add.output("out", &j), Value::Invalid);
    }

    #[test]
    fn multiplier_answers_two_cycles_later() {
        let mut m = Primitive::new("FastMult", &[32]).unwrap();
        let go = drive(&[("go", Value::Bits(1)), ("left", Value::Bits(10)), ("right", Value::Bits(20))]);
        let idle = drive(&[("go", Value::Bits(0))]);
        assert!(m.tick(&go).is_empty());
        assert_eq!(m.output("out", &idle), Value::Invalid);
        m.tick(&idle);
        assert_eq!(m.output("out", &idle), Value::Bits(200));
        m.tick(&idle);
        assert_eq!(m.output("out", &idle), Value::Invalid);
    }

    #[test]
    fn delay_shifts_by_one() {
        let mut d = Primitive::new("Delay", &[32]).unwrap();
        d.tick(&drive(&[("in", Value::Bits(5))]));
        assert_eq!(d.output("out", &drive(&[])), Value::Bits(5));
    }

    #[test]
    fn prev_initial_value_depends_on_safety() {
        let safe = Primitive::new("Prev", &[32, 1]).unwrap();
        let unsafe_ = Primitive::new("Prev", &[32, 0]).unwrap();
        assert_eq!(safe.output("prev", &drive(&[])), Value::Bits(0));
        assert_eq!(unsafe_.output("prev", &drive(&[])), Value::Invalid);
    }

    #[test]
    fn register_holds_until_enabled() {
        let mut r = Primitive::new("Register", &[8]).unwrap();
        r.tick(&drive(&[("en", Value::Bits(1)), ("in", Value::Bits(7))]));
        r.tick(&drive(&[("en", Value::Bits(0)), ("in", Value::Bits(9))]));
        assert_eq!(r.output("out", &drive(&[])), Value::Bits(7));
        let bad = r.tick(&drive(&[("en", Value::Bits(1))]));
        assert_eq!(bad, vec![InvalidSample { port: "in" }]);
    }

    #[test]
    fn hold_sum_adds_three_cycles() {
        let mut h = Primitive::new("HoldSum", &[8]).unwrap();
        h.tick(&drive(&[("go", Value::Bits(1)), ("in", Value::Bits(1))]));
        h.tick(&drive(&[("go", Value::Bits(0)), ("in", Value::Bits(2))]));
        h.tick(&drive(&[("go", Value::Bits(0)), ("in", Value::Bits(3))]));
        assert_eq!(h.output("out", &drive(&[])), Value::Bits(6));
    }

    #[test]
    fn eight_division_steps_divide() {
        for (n, d) in [(200u64, 7u64), (255, 1), (13, 13), (0, 5), (100, 200)] {
            let (mut a, mut q) = (0, n);
            for _ in 0..8 {
                (a, q) = div_step(a, q, d, 8);
            }
            assert_eq!(q, n / d, "{n}/{d}");
            assert_eq!(a, n % d, "{n}%{d}");
        }
    }

    #[test]
    fn every_stdlib_extern_has_a_model() {
        let p = crate::parser::parse(STDLIB).unwrap();
        for c in &p.components {
            assert!(PRIMITIVES.contains(&c.name.as_str()), "{}", c.name);
            assert!(Primitive::new(&c.name, &[8, 0]).is_some());
            assert!(PRIMITIVES_V.contains(&format!("module {} ", c.name)), "{}", c.name);
        }
    }
}
