//! Symbolic time: event expressions, availability intervals, delays, and a
//! decision procedure for difference constraints over event variables.
//!
//! Every side condition the checker needs (interval containment, disjointness,
//! delay bounds) reduces to a claim of the form `x - y >= c`. Such claims are
//! decided exactly by shortest paths over the constraint graph.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest offset an event expression may carry.
pub const MAX_OFFSET: u64 = 1 << 16;

/// Name used for the implicit time origin in the constraint graph.
const ORIGIN: &str = "$0";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("ill-formed event expression: {0}")]
    IllFormedEvent(String),
    #[error("ordering constraints are inconsistent")]
    InconsistentFacts,
    #[error("offset {0} exceeds the maximum of {MAX_OFFSET}")]
    OffsetOverflow(u64),
    #[error("event `{0}` is not bound")]
    Unbound(String),
}

/// A point in time: an event variable plus a constant number of cycles.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EventExpr {
    pub base: String,
    pub offset: u64,
}

impl EventExpr {
    pub fn new(base: impl Into<String>, offset: u64) -> Self {
        EventExpr { base: base.into(), offset }
    }

    pub fn var(base: impl Into<String>) -> Self {
        Self::new(base, 0)
    }

    pub fn shift(&self, by: u64) -> Result<Self, AlgebraError> {
        let offset = self.offset + by;
        if offset > MAX_OFFSET {
            return Err(AlgebraError::OffsetOverflow(offset));
        }
        Ok(EventExpr::new(self.base.clone(), offset))
    }

    pub fn substitute(&self, binding: &Binding) -> Result<Self, AlgebraError> {
        let target = binding
            .get(&self.base)
            .ok_or_else(|| AlgebraError::Unbound(self.base.clone()))?;
        target.shift(self.offset)
    }

    fn linear(&self) -> Linear {
        let mut l = Linear::constant(self.offset as i64);
        l.add_term(&self.base, 1);
        l
    }
}

impl fmt::Display for EventExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.offset == 0 {
            write!(f, "{}", self.base)
        } else {
            write!(f, "{}+{}", self.base, self.offset)
        }
    }
}

/// Unnormalized event expression as written in source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawEvent {
    Var(String),
    Const(u64),
    Add(Box<RawEvent>, Box<RawEvent>),
}

/// Folds constant offsets into `(base, offset)` form. Exactly one event
/// variable must occur.
pub fn normalize(raw: &RawEvent) -> Result<EventExpr, AlgebraError> {
    fn walk(raw: &RawEvent, vars: &mut Vec<String>, total: &mut u64) {
        match raw {
            RawEvent::Var(v) => vars.push(v.clone()),
            RawEvent::Const(n) => *total = total.saturating_add(*n),
            RawEvent::Add(a, b) => {
                walk(a, vars, total);
                walk(b, vars, total);
            }
        }
    }
    let mut vars = Vec::new();
    let mut total = 0;
    walk(raw, &mut vars, &mut total);
    match vars.as_slice() {
        [v] => {
            if total > MAX_OFFSET {
                Err(AlgebraError::OffsetOverflow(total))
            } else {
                Ok(EventExpr::new(v.clone(), total))
            }
        }
        [] => Err(AlgebraError::IllFormedEvent(
            "expression mentions no event variable".into(),
        )),
        many => Err(AlgebraError::IllFormedEvent(format!(
            "cannot add event variables {}",
            many.join(" + ")
        ))),
    }
}

/// Half-open window `[start, end)` of clock cycles.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub start: EventExpr,
    pub end: EventExpr,
}

impl Interval {
    pub fn new(start: EventExpr, end: EventExpr) -> Self {
        Interval { start, end }
    }

    /// `[e, e + len)`.
    pub fn starting_at(e: &EventExpr, len: u64) -> Result<Self, AlgebraError> {
        Ok(Interval::new(e.clone(), e.shift(len)?))
    }

    pub fn substitute(&self, binding: &Binding) -> Result<Self, AlgebraError> {
        Ok(Interval::new(
            self.start.substitute(binding)?,
            self.end.substitute(binding)?,
        ))
    }

    pub fn events(&self) -> impl Iterator<Item = &str> {
        [self.start.base.as_str(), self.end.base.as_str()].into_iter()
    }

    /// `end - start` as a linear expression.
    pub fn length(&self) -> Linear {
        self.end.linear().sub(&self.start.linear())
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// Delay of an event: a constant or the distance between two events.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DelayExpr {
    Const(u64),
    Diff(EventExpr, EventExpr),
}

impl DelayExpr {
    pub fn as_const(&self) -> Option<u64> {
        match self {
            DelayExpr::Const(n) => Some(*n),
            DelayExpr::Diff(..) => None,
        }
    }

    /// Substitutes event variables; a difference of two expressions over the
    /// same base collapses to a constant.
    pub fn substitute(&self, binding: &Binding) -> Result<Self, AlgebraError> {
        match self {
            DelayExpr::Const(n) => Ok(DelayExpr::Const(*n)),
            DelayExpr::Diff(a, b) => {
                let a = a.substitute(binding)?;
                let b = b.substitute(binding)?;
                if a.base == b.base {
                    if a.offset < b.offset {
                        return Err(AlgebraError::IllFormedEvent(format!(
                            "delay {a}-({b}) is negative"
                        )));
                    }
                    Ok(DelayExpr::Const(a.offset - b.offset))
                } else {
                    Ok(DelayExpr::Diff(a, b))
                }
            }
        }
    }

    pub fn linear(&self) -> Linear {
        match self {
            DelayExpr::Const(n) => Linear::constant(*n as i64),
            DelayExpr::Diff(a, b) => a.linear().sub(&b.linear()),
        }
    }

    pub fn events(&self) -> Vec<&str> {
        match self {
            DelayExpr::Const(_) => vec![],
            DelayExpr::Diff(a, b) => vec![&a.base, &b.base],
        }
    }
}

impl fmt::Display for DelayExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DelayExpr::Const(n) => write!(f, "{n}"),
            DelayExpr::Diff(a, b) if b.offset == 0 => write!(f, "{a}-{b}"),
            DelayExpr::Diff(a, b) => write!(f, "{a}-({b})"),
        }
    }
}

/// Substitution of event variables.
pub type Binding = HashMap<String, EventExpr>;

/// A linear integer expression over event variables.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Linear {
    terms: BTreeMap<String, i64>,
    constant: i64,
}

impl Linear {
    pub fn constant(c: i64) -> Self {
        Linear { terms: BTreeMap::new(), constant: c }
    }

    fn add_term(&mut self, var: &str, coeff: i64) {
        let entry = self.terms.entry(var.to_string()).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.terms.remove(var);
        }
    }

    pub fn add(&self, other: &Linear) -> Linear {
        let mut out = self.clone();
        out.constant += other.constant;
        for (v, c) in &other.terms {
            out.add_term(v, *c);
        }
        out
    }

    pub fn sub(&self, other: &Linear) -> Linear {
        let mut out = self.clone();
        out.constant -= other.constant;
        for (v, c) in &other.terms {
            out.add_term(v, -c);
        }
        out
    }

    pub fn plus(&self, c: i64) -> Linear {
        let mut out = self.clone();
        out.constant += c;
        out
    }

    /// The value when no variables remain.
    pub fn as_const(&self) -> Option<i64> {
        self.terms.is_empty().then_some(self.constant)
    }
}

impl fmt::Display for Linear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.terms {
            let sign = if *c < 0 { "-" } else if first { "" } else { "+" };
            let mag = c.abs();
            if mag == 1 {
                write!(f, "{sign}{v}")?;
            } else {
                write!(f, "{sign}{mag}*{v}")?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)
        } else if self.constant > 0 {
            write!(f, "+{}", self.constant)
        } else if self.constant < 0 {
            write!(f, "{}", self.constant)
        } else {
            Ok(())
        }
    }
}

/// Length of an interval: a number when both endpoints share a base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpanLength {
    Const(i64),
    Symbolic(Linear),
}

impl SpanLength {
    pub fn render(&self) -> String {
        match self {
            SpanLength::Const(n) if *n == 1 => "1 cycle".to_string(),
            SpanLength::Const(n) => format!("{n} cycles"),
            SpanLength::Symbolic(l) => format!("{l} cycles"),
        }
    }
}

pub fn span_length(i: &Interval) -> SpanLength {
    let len = i.length();
    match len.as_const() {
        Some(n) => SpanLength::Const(n),
        None => SpanLength::Symbolic(len),
    }
}

/// `hi - lo >= bound` over event variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fact {
    pub hi: String,
    pub lo: String,
    pub bound: i64,
}

/// A claim `lhs - rhs >= min` between two event expressions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim {
    pub lhs: EventExpr,
    pub rhs: EventExpr,
    pub min: i64,
}

impl Claim {
    pub fn new(lhs: EventExpr, rhs: EventExpr, min: i64) -> Self {
        Claim { lhs, rhs, min }
    }

    /// `lhs - rhs - min` must be non-negative.
    fn linear(&self) -> Linear {
        self.lhs.linear().sub(&self.rhs.linear()).plus(-self.min)
    }
}

/// Difference constraints assumed to hold. Event variables are implicitly
/// non-negative.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    facts: Vec<Fact>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    /// Records `lhs - rhs >= min` where both sides are event expressions.
    pub fn assume(&mut self, lhs: &EventExpr, rhs: &EventExpr, min: i64) {
        let bound = min + rhs.offset as i64 - lhs.offset as i64;
        self.facts.push(Fact { hi: lhs.base.clone(), lo: rhs.base.clone(), bound });
    }

    fn closure(&self, extra: &[&str]) -> Closure {
        let mut vars = BTreeSet::new();
        vars.insert(ORIGIN.to_string());
        for f in &self.facts {
            vars.insert(f.hi.clone());
            vars.insert(f.lo.clone());
        }
        for v in extra {
            vars.insert(v.to_string());
        }
        let index: HashMap<String, usize> =
            vars.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let n = index.len();
        let mut dist = vec![vec![None::<i64>; n]; n];
        for (i, row) in dist.iter_mut().enumerate() {
            row[i] = Some(0);
        }
        let origin = index[ORIGIN];
        // An edge u -> v of weight w encodes v - u <= w.
        let relax = |dist: &mut Vec<Vec<Option<i64>>>, u: usize, v: usize, w: i64| {
            if dist[u][v].is_none_or(|d| w < d) {
                dist[u][v] = Some(w);
            }
        };
        for v in vars.iter().filter(|v| v.as_str() != ORIGIN) {
            // v - origin >= 0, i.e. origin - v <= 0.
            relax(&mut dist, index[v], origin, 0);
        }
        for f in &self.facts {
            // hi - lo >= b  <=>  lo - hi <= -b.
            relax(&mut dist, index[&f.hi], index[&f.lo], -f.bound);
        }
        for k in 0..n {
            for i in 0..n {
                let Some(ik) = dist[i][k] else { continue };
                for j in 0..n {
                    if let Some(kj) = dist[k][j] {
                        let through = ik + kj;
                        if dist[i][j].is_none_or(|d| through < d) {
                            dist[i][j] = Some(through);
                        }
                    }
                }
            }
        }
        Closure { index, dist }
    }

    pub fn check_consistent(&self) -> Result<(), AlgebraError> {
        let c = self.closure(&[]);
        if (0..c.dist.len()).any(|i| c.dist[i][i].is_some_and(|d| d < 0)) {
            return Err(AlgebraError::InconsistentFacts);
        }
        Ok(())
    }

    /// Decides whether `expr >= 0` is entailed. Expressions that are not
    /// difference constraints after cancellation are reported unproven.
    pub fn prove_nonneg(&self, expr: &Linear) -> Result<bool, AlgebraError> {
        let terms: Vec<(&String, i64)> = expr.terms.iter().map(|(v, c)| (v, *c)).collect();
        let c = expr.constant;
        let (from, to) = match terms.as_slice() {
            [] => {
                self.check_consistent()?;
                return Ok(c >= 0);
            }
            // a - b + c >= 0  <=>  b - a <= c
            [(a, 1), (b, -1)] => (a.as_str(), b.as_str()),
            [(b, -1), (a, 1)] => (a.as_str(), b.as_str()),
            // a + c >= 0  <=>  origin - a <= c
            [(a, 1)] => (a.as_str(), ORIGIN),
            // -b + c >= 0  <=>  b - origin <= c
            [(b, -1)] => (ORIGIN, b.as_str()),
            _ => {
                self.check_consistent()?;
                return Ok(false);
            }
        };
        let closure = self.closure(&[from, to]);
        if (0..closure.dist.len()).any(|i| closure.dist[i][i].is_some_and(|d| d < 0)) {
            return Err(AlgebraError::InconsistentFacts);
        }
        let d = closure.dist[closure.index[from]][closure.index[to]];
        Ok(d.is_some_and(|d| d <= c))
    }

    pub fn prove(&self, claim: &Claim) -> Result<bool, AlgebraError> {
        self.prove_nonneg(&claim.linear())
    }

    /// Proves `a >= b` for two event expressions.
    pub fn prove_le(&self, b: &EventExpr, a: &EventExpr) -> bool {
        self.prove(&Claim::new(a.clone(), b.clone(), 0)).unwrap_or(false)
    }
}

struct Closure {
    index: HashMap<String, usize>,
    dist: Vec<Vec<Option<i64>>>,
}

/// `req` lies entirely within `avail`.
pub fn contains(avail: &Interval, req: &Interval, cs: &ConstraintSet) -> bool {
    cs.prove_le(&avail.start, &req.start) && cs.prove_le(&req.end, &avail.end)
}

/// The two windows provably share no cycle.
pub fn disjoint(a: &Interval, b: &Interval, cs: &ConstraintSet) -> bool {
    cs.prove_le(&a.end, &b.start) || cs.prove_le(&b.end, &a.start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(b: &str, o: u64) -> EventExpr {
        EventExpr::new(b, o)
    }

    fn iv(a: (&str, u64), b: (&str, u64)) -> Interval {
        Interval::new(ev(a.0, a.1), ev(b.0, b.1))
    }

    #[test]
    fn normalize_folds_offsets() {
        let raw = RawEvent::Add(
            Box::new(RawEvent::Add(
                Box::new(RawEvent::Var("G".into())),
                Box::new(RawEvent::Const(1)),
            )),
            Box::new(RawEvent::Const(2)),
        );
        assert_eq!(normalize(&raw).unwrap(), ev("G", 3));
        assert_eq!(normalize(&RawEvent::Var("G".into())).unwrap(), ev("G", 0));
    }

    #[test]
    fn adding_event_variables_is_rejected() {
        let raw = RawEvent::Add(
            Box::new(RawEvent::Var("G0".into())),
            Box::new(RawEvent::Var("G1".into())),
        );
        assert!(matches!(normalize(&raw), Err(AlgebraError::IllFormedEvent(_))));
    }

    #[test]
    fn offsets_are_bounded() {
        let raw = RawEvent::Add(
            Box::new(RawEvent::Var("G".into())),
            Box::new(RawEvent::Const(MAX_OFFSET + 1)),
        );
        assert!(matches!(normalize(&raw), Err(AlgebraError::OffsetOverflow(_))));
    }

    #[test]
    fn prove_examples() {
        let mut cs = ConstraintSet::new();
        cs.assume(&ev("L", 0), &ev("G", 0), 2);
        assert!(cs.prove(&Claim::new(ev("L", 0), ev("G", 0), 1)).unwrap());

        let empty = ConstraintSet::new();
        assert!(empty.prove(&Claim::new(ev("G", 3), ev("G", 1), 2)).unwrap());

        // Counter-model G = 0, L = 1.
        let mut weak = ConstraintSet::new();
        weak.assume(&ev("L", 0), &ev("G", 0), 1);
        assert!(!weak.prove(&Claim::new(ev("L", 0), ev("G", 0), 2)).unwrap());
    }

    #[test]
    fn inconsistent_facts_are_reported() {
        let mut cs = ConstraintSet::new();
        cs.assume(&ev("L", 0), &ev("G", 0), 1);
        cs.assume(&ev("G", 0), &ev("L", 0), 1);
        assert_eq!(cs.check_consistent(), Err(AlgebraError::InconsistentFacts));
        assert_eq!(
            cs.prove(&Claim::new(ev("G", 0), ev("G", 0), 0)),
            Err(AlgebraError::InconsistentFacts)
        );
    }

    #[test]
    fn contains_examples() {
        let cs = ConstraintSet::new();
        assert!(!contains(&iv(("G", 2), ("G", 3)), &iv(("G", 0), ("G", 1)), &cs));
        assert!(contains(&iv(("G", 0), ("G", 3)), &iv(("G", 2), ("G", 3)), &cs));
        let i = iv(("G", 1), ("L", 4));
        assert!(contains(&i, &i, &cs));
    }

    #[test]
    fn disjoint_examples() {
        let cs = ConstraintSet::new();
        assert!(!disjoint(&iv(("G", 0), ("G", 3)), &iv(("G", 1), ("G", 4)), &cs));
        assert!(disjoint(&iv(("G", 0), ("G", 1)), &iv(("G", 1), ("G", 2)), &cs));
        let mut facts = ConstraintSet::new();
        facts.assume(&ev("L", 0), &ev("G", 0), 3);
        assert!(disjoint(&iv(("G", 0), ("G", 3)), &iv(("L", 0), ("L", 3)), &facts));
        assert!(!disjoint(&iv(("G", 0), ("G", 3)), &iv(("L", 0), ("L", 3)), &cs));
    }

    #[test]
    fn substitute_examples() {
        let mut b = Binding::new();
        b.insert("T".into(), ev("G", 2));
        assert_eq!(
            iv(("T", 0), ("T", 1)).substitute(&b).unwrap(),
            iv(("G", 2), ("G", 3))
        );

        let mut b = Binding::new();
        b.insert("G".into(), ev("T", 0));
        b.insert("L".into(), ev("T", 3));
        let d = DelayExpr::Diff(ev("L", 0), ev("G", 0));
        assert_eq!(d.substitute(&b).unwrap(), DelayExpr::Const(3));

        let mut id = Binding::new();
        id.insert("G".into(), ev("G", 0));
        id.insert("L".into(), ev("L", 0));
        assert_eq!(d.substitute(&id).unwrap(), d);
    }

    #[test]
    fn span_length_examples() {
        assert_eq!(span_length(&iv(("G", 0), ("G", 3))), SpanLength::Const(3));
        assert_eq!(span_length(&iv(("G", 0), ("G", 1))), SpanLength::Const(1));
        let sym = iv(("G", 0), ("L", 0));
        let SpanLength::Symbolic(len) = span_length(&sym) else { panic!() };
        let mut cs = ConstraintSet::new();
        cs.assume(&ev("L", 0), &ev("G", 0), 2);
        assert!(cs.prove_nonneg(&len.plus(-2)).unwrap());
        assert!(!cs.prove_nonneg(&len.plus(-3)).unwrap());
    }

    #[test]
    fn delay_display() {
        assert_eq!(DelayExpr::Diff(ev("L", 0), ev("G", 1)).to_string(), "L-(G+1)");
        assert_eq!(DelayExpr::Diff(ev("L", 0), ev("G", 0)).to_string(), "L-G");
    }

    const VARS: [&str; 3] = ["G", "L", "T"];

    /// Brute-force entailment over assignments in `[0, 16]`.
    fn brute(facts: &[(usize, usize, i64)], claim: (usize, u64, usize, u64, i64)) -> bool {
        let b = 16i64;
        for g in 0..=b {
            for l in 0..=b {
                for t in 0..=b {
                    let val = [g, l, t];
                    if facts.iter().all(|&(h, lo, k)| val[h] - val[lo] >= k) {
                        let (x, xo, y, yo, k) = claim;
                        if (val[x] + xo as i64) - (val[y] + yo as i64) < k {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    fn consistent_by_enumeration(facts: &[(usize, usize, i64)]) -> bool {
        let b = 16i64;
        (0..=b).any(|g| {
            (0..=b).any(|l| {
                (0..=b).any(|t| {
                    let val = [g, l, t];
                    facts.iter().all(|&(h, lo, k)| val[h] - val[lo] >= k)
                })
            })
        })
    }

    proptest! {
        #[test]
        fn prove_agrees_with_enumeration(
            facts in prop::collection::vec((0usize..3, 0usize..3, -3i64..4), 0..4),
            claim in (0usize..3, 0u64..4, 0usize..3, 0u64..4, -3i64..4),
        ) {
            prop_assume!(consistent_by_enumeration(&facts));
            let mut cs = ConstraintSet::new();
            for &(h, lo, k) in &facts {
                cs.assume(&ev(VARS[h], 0), &ev(VARS[lo], 0), k);
            }
            let (x, xo, y, yo, k) = claim;
            let got = cs.prove(&Claim::new(ev(VARS[x], xo), ev(VARS[y], yo), k)).unwrap();
            prop_assert_eq!(got, brute(&facts, claim));
        }

        #[test]
        fn adding_facts_is_monotone(
            facts in prop::collection::vec((0usize..3, 0usize..3, 0i64..3), 0..3),
            extra in (0usize..3, 0usize..3, 0i64..3),
            a in (0u64..5, 1u64..4), b in (0u64..5, 1u64..4),
        ) {
            let mut cs = ConstraintSet::new();
            for &(h, lo, k) in &facts {
                cs.assume(&ev(VARS[h], 0), &ev(VARS[lo], 0), k);
            }
            prop_assume!(cs.check_consistent().is_ok());
            let mut more = cs.clone();
            more.assume(&ev(VARS[extra.0], 0), &ev(VARS[extra.1], 0), extra.2);
            prop_assume!(more.check_consistent().is_ok());
            let i1 = iv(("G", a.0), ("G", a.0 + a.1));
            let i2 = iv(("L", b.0), ("L", b.0 + b.1));
            if contains(&i1, &i2, &cs) { prop_assert!(contains(&i1, &i2, &more)); }
            if disjoint(&i1, &i2, &cs) { prop_assert!(disjoint(&i1, &i2, &more)); }
        }

        #[test]
        fn same_base_matches_integer_comparison(
            s1 in 0u64..10, l1 in 1u64..6, s2 in 0u64..10, l2 in 1u64..6,
        ) {
            let cs = ConstraintSet::new();
            let a = iv(("G", s1), ("G", s1 + l1));
            let b = iv(("G", s2), ("G", s2 + l2));
            prop_assert_eq!(contains(&a, &b, &cs), s1 <= s2 && s2 + l2 <= s1 + l1);
            prop_assert_eq!(disjoint(&a, &b, &cs), s1 + l1 <= s2 || s2 + l2 <= s1);
        }
    }
}
