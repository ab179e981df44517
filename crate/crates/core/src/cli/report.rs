use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// One reportable problem found by a command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub kind: String,
    pub message: String,
    pub details: Value,
}

impl Finding {
    pub fn new(kind: &str, message: impl Into<String>, details: Value) -> Self {
        Finding {
            kind: kind.to_string(),
            message: message.into(),
            details,
        }
    }
}

/// Output of every command. `result` carries command-specific data that is
/// not a finding (trace structure, gossip snapshots, run outcomes).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub tool: String,
    pub version: String,
    pub input_digest: String,
    pub mode: String,
    pub findings: Vec<Finding>,
    pub diagnostics: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    /// Extra lines for the human-readable rendering.
    #[serde(skip)]
    pub text: Vec<String>,
    /// Set when a search or expansion bound cut the analysis short.
    #[serde(skip)]
    pub bound_exceeded: bool,
}

pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;
pub const EXIT_BOUND_EXCEEDED: i32 = 3;

impl AnalysisReport {
    pub fn new(mode: &str) -> Self {
        AnalysisReport {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            input_digest: String::new(),
            mode: mode.to_string(),
            findings: Vec::new(),
            diagnostics: Vec::new(),
            result: None,
            text: Vec::new(),
            bound_exceeded: false,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.bound_exceeded {
            EXIT_BOUND_EXCEEDED
        } else if !self.findings.is_empty() {
            EXIT_FINDINGS
        } else {
            EXIT_CLEAN
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} {}\ninput {}\n",
            self.tool, self.version, self.mode, self.input_digest
        );
        for line in &self.text {
            out.push_str(line);
            out.push('\n');
        }
        for f in &self.findings {
            out.push_str(&format!("{}: {}\n", f.kind, f.message));
        }
        for d in &self.diagnostics {
            out.push_str(&format!("note: {d}\n"));
        }
        let n = self.findings.len();
        out.push_str(&format!("{n} finding{}\n", if n == 1 { "" } else { "s" }));
        out
    }
}

/// `sha256:<hex>` over the given inputs, each prefixed by its byte length.
pub fn digest(inputs: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for bytes in inputs {
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    let hex: String = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_and_input_sensitive() {
        assert_eq!(digest(&[b"abc"]), digest(&[b"abc"]));
        assert_ne!(digest(&[b"ab", b"c"]), digest(&[b"a", b"bc"]));
        assert_eq!(digest(&[]).len(), "sha256:".len() + 64);
    }

    #[test]
    fn exit_codes() {
        let mut r = AnalysisReport::new("races");
        assert_eq!(r.exit_code(), EXIT_CLEAN);
        r.findings.push(Finding::new("race", "x", Value::Null));
        assert_eq!(r.exit_code(), EXIT_FINDINGS);
        r.bound_exceeded = true;
        assert_eq!(r.exit_code(), EXIT_BOUND_EXCEEDED);
    }
}
