use serde_json::{json, Value};
use thiserror::Error;
use zeth_core::{LedgerError, WalletError};

/// Failures reported as exit code 1 with a JSON body.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    State(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Wallet(#[from] WalletError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    /// The transaction was mined but did not succeed; `receipt` is its JSON.
    #[error("transaction {status}")]
    Rejected { status: String, receipt: Value },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::State(_) => "state",
            Self::Input(_) => "input",
            Self::Wallet(_) => "wallet",
            Self::Ledger(_) => "ledger",
            Self::Rejected { .. } => "rejected",
            Self::Io(_) => "io",
            Self::Json(_) => "json",
        }
    }

    pub fn to_json(&self) -> Value {
        let mut body = json!({ "error": self.kind(), "message": self.to_string() });
        if let Self::Rejected { receipt, .. } = self {
            body["receipt"] = receipt.clone();
        }
        body
    }
}
