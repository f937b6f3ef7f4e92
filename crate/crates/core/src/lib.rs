//! Decentralized anonymous payments on an account-model ledger.
//!
//! Notes are commitments in an append-only sha256 Merkle tree held by a
//! mixer contract. A Mix call spends old notes by revealing their serial
//! numbers, creates new ones, and carries a proof that the joinsplit relation
//! holds. New notes reach their recipients as encrypted contract events.
//!
//! The proof system is a designated-verifier mock: it refuses to prove false
//! statements and binds each proof to its instance and ciphertexts, but it
//! is not zero knowledge against the verification-key holder.

pub(crate) mod encoding;

pub mod crypto;
pub mod deployment;
pub mod gas;
pub mod harness;
pub mod joinsplit;
pub mod ledger;
pub mod merkle;
pub mod mixer;
pub mod note;
pub mod proof;
pub mod wallet;

pub use crypto::{
    DecryptionKey, Digest256, EncKeyPair, EncryptionKey, HybridEncryption, NoteCiphertext, NoteEncryption,
    SpendKeyPair, SpendingKey,
};
pub use deployment::Deployment;
pub use gas::{mix_call_gas, verifier_gas, GasSchedule, MixGasEstimate, VerifierCostBreakdown};
pub use joinsplit::{check_relation, CircuitConfig, Instance, RelationReport, Violation, Witness};
pub use ledger::{Address, EventRecord, Ledger, LedgerError, Receipt, TxEnvelope, TxStatus};
pub use merkle::{MerklePath, MerkleTree};
pub use mixer::{MixTransaction, Mixer, MixerError, Registry, ZethCall, ZethContract, ZethError, ZethEvent};
pub use note::{AddressPublic, ZethAddress, ZethNote};
pub use proof::{Crs, Proof, ProvingKey, Trapdoor, VerificationKey};
pub use wallet::{PaymentOptions, RootChoice, Wallet, WalletError};
