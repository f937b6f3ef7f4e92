//! Executable security games. Each game is run for many independent,
//! deterministically seeded trials and reports the empirical advantage of a
//! named adversary; sabotaged encryption schemes serve as positive controls.

mod balance;
mod challenger;
mod diagnostics;
mod encryption_games;
mod indistinguishability;
pub mod sabotage;
mod trnm;

pub use balance::{run_balance, BalanceOutcome, BalanceScenario, BalanceTally};
pub use challenger::{Challenger, Query, QueryError, Response};
pub use diagnostics::{anonymity_diagnostics, DiagnosticsReport, FEW_CALLERS, SPARSE_TREE_LEAVES};
pub use encryption_games::{
    run_ikcca, run_indcca2, ByteInspectionIk, ByteInspectionInd, DecOracle, IkCcaAdversary, IndCcaAdversary, RandomIk,
    RandomInd,
};
pub use indistinguishability::{
    run_indistinguishability, ByteInspectionMixer, IndGame, MixerAdversary, PublicView, RandomMixer,
};
pub use trnm::{run_trnm, CiphertextReplace, CiphertextSwap, HonestReplay, TrnmAdversary, TrnmReport, VOutRedirect};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::crypto::hash_parts;

/// Outcome of a distinguishing game run for `trials` rounds.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct GameReport {
    pub game: String,
    pub adversary: String,
    pub scheme: String,
    pub trials: u64,
    pub wins: u64,
    /// `|2p - 1|` for the empirical win rate `p`.
    pub advantage: f64,
    /// Three standard deviations of the advantage estimate of a coin flip.
    pub three_sigma: f64,
    pub within_three_sigma: bool,
}

impl GameReport {
    pub fn new(game: &str, adversary: &str, scheme: &str, trials: u64, wins: u64) -> Self {
        let (advantage, three_sigma) = advantage(trials, wins);
        Self {
            game: game.to_owned(),
            adversary: adversary.to_owned(),
            scheme: scheme.to_owned(),
            trials,
            wins,
            advantage,
            three_sigma,
            within_three_sigma: advantage <= three_sigma,
        }
    }
}

/// `(|2p - 1|, 3 / sqrt(T))`. Under a fair coin `2p - 1` has standard
/// deviation `1 / sqrt(T)`.
pub fn advantage(trials: u64, wins: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, f64::INFINITY);
    }
    let p = wins as f64 / trials as f64;
    ((2.0 * p - 1.0).abs(), 3.0 / (trials as f64).sqrt())
}

/// Independent randomness for one trial of one experiment.
pub fn trial_rng(seed: u64, label: &str, trial: u64) -> ChaCha20Rng {
    let d = hash_parts([&b"zeth.trial"[..], label.as_bytes(), &seed.to_be_bytes(), &trial.to_be_bytes()]);
    ChaCha20Rng::from_seed(d.0)
}
