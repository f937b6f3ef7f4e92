//! On-disk state: one directory of JSON files.
//!
//! ```text
//! config.json         circuit shape, gas schedule, instance packing
//! crs.json            proving and verification keys
//! trapdoor.json       simulation trapdoor (never read by payment commands)
//! chain.json          ledger with the deployed mixer and registry
//! events.jsonl        public event log, one record per line
//! wallets/<name>.json wallet secrets and notes
//! ```

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use zeth_core::{CircuitConfig, Deployment, GasSchedule, ProvingKey, Trapdoor, VerificationKey, Wallet};

use crate::error::CliError;

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct CliConfig {
    pub circuit: CircuitConfig,
    pub gas: GasSchedule,
    pub instance_elements: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrsFile {
    pub proving_key: ProvingKey,
    pub verification_key: VerificationKey,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WalletFile {
    pub name: String,
    pub wallet: Wallet,
}

pub struct StateDir {
    root: PathBuf,
}

impl StateDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn wallet_path(&self, name: &str) -> Result<PathBuf, CliError> {
        let valid = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !valid {
            return Err(CliError::State(format!("wallet name {name:?} must be alphanumeric, '-' or '_'")));
        }
        Ok(self.root.join("wallets").join(format!("{name}.json")))
    }

    pub fn config(&self) -> Result<CliConfig, CliError> {
        read(&self.path("config.json"), "run `setup` first")
    }

    pub fn crs(&self) -> Result<CrsFile, CliError> {
        read(&self.path("crs.json"), "run `setup` first")
    }

    pub fn chain(&self) -> Result<Deployment, CliError> {
        read(&self.path("chain.json"), "run `deploy` first")
    }

    pub fn wallet(&self, name: &str) -> Result<WalletFile, CliError> {
        read(&self.wallet_path(name)?, "run `keygen` first")
    }

    pub fn has_wallet(&self, name: &str) -> Result<bool, CliError> {
        Ok(self.wallet_path(name)?.exists())
    }

    pub fn save_setup(&self, config: &CliConfig, crs: &CrsFile, trapdoor: &Trapdoor) -> Result<(), CliError> {
        write(&self.path("config.json"), config)?;
        write(&self.path("crs.json"), crs)?;
        write(&self.path("trapdoor.json"), trapdoor)
    }

    /// Writes the chain and regenerates the event log from it.
    pub fn save_chain(&self, chain: &Deployment) -> Result<(), CliError> {
        write(&self.path("chain.json"), chain)?;
        let mut log = Vec::new();
        for e in chain.ledger.events() {
            serde_json::to_writer(&mut log, e)?;
            log.push(b'\n');
        }
        atomic_write(&self.path("events.jsonl"), &log)
    }

    pub fn save_wallet(&self, file: &WalletFile) -> Result<(), CliError> {
        write(&self.wallet_path(&file.name)?, file)
    }
}

fn read<T: DeserializeOwned>(path: &Path, hint: &str) -> Result<T, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::State(format!("cannot read {}: {e}; {hint}", path.display())))?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::State(format!("{} is malformed: {e}", path.display())))
}

fn write<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    atomic_write(path, &bytes)
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    fs::rename(tmp, path)?;
    Ok(())
}
