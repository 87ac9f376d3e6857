//! Diagnostics and their rendering.

use serde::Serialize;

use crate::parser::ParseError;
use crate::span::{SourceMap, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Code {
    Parse,
    UnboundName,
    DuplicateName,
    ExternWithBody,
    ArityMismatch,
    IllFormedEvent,
    InconsistentFacts,
    DelayTooShort,
    InsufficientAvailability,
    InstanceConflict,
    UnsafeTrigger,
    NonConstantDelay,
    MixedEventSharing,
    PipelineSpanExceedsDelay,
    PhantomSharing,
    PhantomDrivesInterfaced,
    EmptyInterval,
    WhereInUserComponent,
    ConstraintViolated,
    WidthMismatch,
    OffsetOverflow,
    BadOutputConnection,
    ParamError,
    RecursiveComponent,
}

impl Code {
    pub fn id(self) -> String {
        format!("E{:03}", self as u32)
    }

    pub fn name(self) -> String {
        format!("{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Label {
    pub span: Span,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub code: Code,
    pub message: String,
    pub span: Span,
    pub labels: Vec<Label>,
    pub notes: Vec<String>,
}

impl Diagnostic {
    pub fn new(code: Code, span: Span, message: impl Into<String>) -> Self {
        Diagnostic { code, message: message.into(), span, labels: vec![], notes: vec![] }
    }

    pub fn label(mut self, span: Span, message: impl Into<String>) -> Self {
        self.labels.push(Label { span, message: message.into() });
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn from_parse(e: &ParseError) -> Self {
        Diagnostic::new(Code::Parse, e.span, e.message.clone())
    }

    fn sort_key(&self) -> (Span, Code, &str) {
        (self.span, self.code, &self.message)
    }

    pub fn render(&self, sm: &SourceMap) -> String {
        let mut out = format!("error[{}]: {}\n", self.code.id(), self.message);
        let mut spans = vec![(self.span, String::new())];
        spans.extend(self.labels.iter().map(|l| (l.span, l.message.clone())));
        for (span, msg) in spans {
            let lc = sm.line_col(span.file, span.start as usize);
            let line = sm.line_text(span.file, lc.line);
            let gutter = lc.line.to_string().len();
            out.push_str(&format!("{:gutter$}--> {}:{}:{}\n", "", sm.name(span.file), lc.line, lc.col));
            out.push_str(&format!("{:gutter$} |\n", ""));
            out.push_str(&format!("{} | {}\n", lc.line, line));
            let width = (span.end.saturating_sub(span.start) as usize)
                .min(line.len().saturating_sub(lc.col - 1))
                .max(1);
            let carets = "^".repeat(width);
            let pad = " ".repeat(lc.col - 1);
            let sep = if msg.is_empty() { "" } else { " " };
            out.push_str(&format!("{:gutter$} | {pad}{carets}{sep}{msg}\n", ""));
        }
        for n in &self.notes {
            out.push_str(&format!("  = note: {n}\n"));
        }
        out
    }

    pub fn to_json(&self, sm: &SourceMap) -> serde_json::Value {
        let loc = |s: Span| {
            let lc = sm.line_col(s.file, s.start as usize);
            serde_json::json!({ "file": sm.name(s.file), "line": lc.line, "col": lc.col })
        };
        serde_json::json!({
            "code": self.code.id(),
            "kind": self.code.name(),
            "message": self.message,
            "location": loc(self.span),
            "labels": self.labels.iter().map(|l| serde_json::json!({
                "message": l.message,
                "location": loc(l.span),
            })).collect::<Vec<_>>(),
            "notes": self.notes,
        })
    }
}

/// Orders diagnostics by source position and removes exact duplicates.
pub fn sort(diags: &mut Vec<Diagnostic>) {
    diags.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    diags.dedup();
}
