use cgmt_core::Error;

pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_REGIME: u8 = 3;
pub const EXIT_VERDICT: u8 = 4;

/// A fatal outcome, printed to standard error as JSON.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: &'static str,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            error: "input",
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INTERNAL,
            error: "internal",
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.error, "exit_code": self.code, "message": self.message }).to_string()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, error) = match &e {
            Error::Regime(_) => (EXIT_REGIME, "regime"),
            Error::ExperimentInvalid(_) => (EXIT_VERDICT, "experiment_invalid"),
            Error::Numeric(_) | Error::Capability(_) => (EXIT_INTERNAL, "internal"),
            _ => (EXIT_INPUT, "input"),
        };
        Self {
            code,
            error,
            message: e.to_string(),
        }
    }
}
