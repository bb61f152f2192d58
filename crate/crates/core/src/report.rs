//! Outcome of a verification run.

use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Mismatch,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Mismatch => "mismatch",
        }
    }
}

/// Where a comparison first failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    /// Human-readable position, e.g. `h^1 eps^0 * u_1*u_2`.
    pub locus: String,
    pub hbar_order: u32,
    pub expected: String,
    pub found: String,
}

impl Mismatch {
    pub fn to_json(&self) -> Value {
        json!({
            "locus": self.locus,
            "hbar_order": self.hbar_order,
            "expected": self.expected,
            "found": self.found,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub name: String,
    pub status: Status,
    pub order_checked: u32,
    pub first_mismatch: Option<Mismatch>,
    /// Free-form supporting values (checked coefficients, notes).
    pub details: Vec<Value>,
}

impl Report {
    pub fn ok(name: impl Into<String>, order_checked: u32) -> Self {
        Self {
            name: name.into(),
            status: Status::Ok,
            order_checked,
            first_mismatch: None,
            details: Vec::new(),
        }
    }

    pub fn mismatch(name: impl Into<String>, order_checked: u32, m: Mismatch) -> Self {
        Self {
            name: name.into(),
            status: Status::Mismatch,
            order_checked,
            first_mismatch: Some(m),
            details: Vec::new(),
        }
    }

    pub fn with_detail(mut self, d: Value) -> Self {
        self.details.push(d);
        self
    }

    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "name": self.name,
            "status": self.status.as_str(),
            "order_checked": self.order_checked,
            "details": self.details,
        });
        if let Some(m) = &self.first_mismatch {
            v["first_mismatch"] = m.to_json();
        }
        v
    }
}
