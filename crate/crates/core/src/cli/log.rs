//! JSON-lines event logs: one object per line, e.g.
//! `{"tid":"T1","op":"write","var":"x","site":"3"}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::program::{LockId, Op, OpKind, ProgramEvent, ProgramExecution, ThreadId, VariableId};

/// One line of a log. Which optional fields are allowed depends on `op`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventLogRecord {
    pub tid: String,
    pub op: OpKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lock: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub old: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub new: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<String>,
}

impl EventLogRecord {
    pub fn to_event(&self) -> std::result::Result<ProgramEvent, String> {
        let present = [
            ("var", self.var.is_some()),
            ("lock", self.lock.is_some()),
            ("old", self.old.is_some()),
            ("new", self.new.is_some()),
            ("value", self.value.is_some()),
        ];
        let (required, optional): (&[&str], &[&str]) = match self.op {
            OpKind::Read | OpKind::Write => (&["var"], &["value"]),
            OpKind::Acquire | OpKind::Release => (&["lock"], &[]),
            OpKind::Begin | OpKind::End => (&[], &[]),
            OpKind::Cas => (&["var", "old", "new"], &[]),
        };
        for (field, is_set) in present {
            if required.contains(&field) && !is_set {
                return Err(format!("`{}` needs field `{field}`", self.op));
            }
            if is_set && !required.contains(&field) && !optional.contains(&field) {
                return Err(format!("`{}` does not take field `{field}`", self.op));
            }
        }
        if self.tid.is_empty() {
            return Err("empty `tid`".into());
        }
        let var = || VariableId(self.var.clone().expect("checked"));
        let lock = || LockId(self.lock.clone().expect("checked"));
        let op = match self.op {
            OpKind::Read => Op::Read {
                var: var(),
                value: self.value.clone(),
            },
            OpKind::Write => Op::Write {
                var: var(),
                value: self.value.clone(),
            },
            OpKind::Acquire => Op::Acquire { lock: lock() },
            OpKind::Release => Op::Release { lock: lock() },
            OpKind::Begin => Op::Begin,
            OpKind::End => Op::End,
            OpKind::Cas => Op::Cas {
                var: var(),
                old: self.old.clone().expect("checked"),
                new: self.new.clone().expect("checked"),
            },
        };
        Ok(ProgramEvent {
            thread: ThreadId(self.tid.clone()),
            op,
            site: self.site.clone(),
        })
    }

    pub fn from_event(e: &ProgramEvent) -> Self {
        let mut r = EventLogRecord {
            tid: e.thread.0.clone(),
            op: e.kind(),
            var: e.variable().map(|v| v.0.clone()),
            lock: e.lock().map(|l| l.0.clone()),
            old: None,
            new: None,
            value: None,
            site: e.site.clone(),
        };
        match &e.op {
            Op::Read { value, .. } | Op::Write { value, .. } => r.value = value.clone(),
            Op::Cas { old, new, .. } => {
                r.old = Some(old.clone());
                r.new = Some(new.clone());
            }
            _ => {}
        }
        r
    }
}

/// Parses a log. Blank lines are skipped; errors carry the 1-based line.
pub fn parse_log(text: &str) -> Result<ProgramExecution> {
    let mut events = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |reason: String| Error::Parse {
            line: i + 1,
            reason,
        };
        let rec: EventLogRecord =
            serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
        events.push(rec.to_event().map_err(parse_err)?);
    }
    Ok(ProgramExecution::new(events))
}

/// Canonical form: one compact object per event, fields in declaration order.
pub fn serialize_log(exec: &ProgramExecution) -> String {
    let mut out = String::new();
    for e in &exec.events {
        let rec = EventLogRecord::from_event(e);
        out.push_str(&serde_json::to_string(&rec).expect("records serialize"));
        out.push('\n');
    }
    out
}
