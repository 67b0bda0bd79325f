use std::fmt;

/// A command failure together with the process exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or flag combinations (exit 1).
    Usage(String),
    /// Unreadable, malformed or inconsistent input (exit 2).
    Input(String),
    /// A result failed its own consistency check (exit 3).
    Invariant(String),
}

impl Failure {
    pub fn usage(m: impl Into<String>) -> Failure {
        Failure::Usage(m.into())
    }

    pub fn input(m: impl Into<String>) -> Failure {
        Failure::Input(m.into())
    }

    pub fn invariant(m: impl Into<String>) -> Failure {
        Failure::Invariant(m.into())
    }

    pub fn into_message(self) -> String {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Invariant(m) => m,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Invariant(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage: {m}"),
            Failure::Input(m) => write!(f, "input error: {m}"),
            Failure::Invariant(m) => write!(f, "internal invariant violated: {m}"),
        }
    }
}

impl From<kxp::Error> for Failure {
    fn from(e: kxp::Error) -> Failure {
        Failure::Input(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Input(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Failure {
        Failure::Input(e.to_string())
    }
}
