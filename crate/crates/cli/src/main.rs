//! `zeth`: drives a simulated ledger with a shielded-payment mixer.
//!
//! Every command loads its state directory, performs one operation, saves the
//! state and prints one JSON document. Exit status is 0 on success, 1 on a
//! domain error (JSON on stderr) and 2 on a usage error.

mod commands;
mod error;
mod state;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::Session;

#[derive(Parser, Debug)]
#[command(name = "zeth", version, about = "Shielded payments on a simulated account-model ledger")]
struct Cli {
    /// Directory holding config, keys, chain and wallets.
    #[arg(long, global = true, default_value = ".zeth")]
    state_dir: PathBuf,

    /// Seeds all randomness; identical state, arguments and seed give identical output.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Include secret keys and note openings in the output.
    #[arg(long, global = true)]
    reveal_secrets: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate the circuit keys and write the configuration.
    Setup {
        #[arg(long, default_value_t = 2)]
        inputs: usize,
        #[arg(long, default_value_t = 2)]
        outputs: usize,
        #[arg(long, default_value_t = 16)]
        depth: usize,
        #[command(flatten)]
        gas: GasArgs,
    },
    /// Start a fresh chain with the mixer and the address registry.
    Deploy,
    /// Create a wallet with a new address and a funded ledger account.
    Keygen {
        #[arg(long)]
        wallet: String,
        /// Wei minted to the wallet's ledger account.
        #[arg(long, default_value_t = 1_000_000_000_000_000_000_000)]
        fund: u128,
    },
    /// Publish a wallet's address under a name in the registry.
    Register {
        #[arg(long)]
        wallet: String,
        /// Registry name; defaults to the wallet name.
        #[arg(long)]
        name: Option<String>,
    },
    /// Move public Wei into a new private note.
    Deposit {
        #[arg(long)]
        wallet: String,
        #[arg(long)]
        value: u64,
    },
    /// Pay private notes to up to M recipients.
    Transfer {
        #[arg(long)]
        wallet: String,
        /// Recipient address (128 hex characters) or registry name; repeatable.
        #[arg(long = "to", required = true)]
        to: Vec<String>,
        /// Amount per recipient, in the order of `--to`.
        #[arg(long = "value", required = true)]
        value: Vec<u64>,
        /// Public Wei added to the pool in the same call.
        #[arg(long, default_value_t = 0)]
        v_in: u64,
        /// Value withdrawn to the caller's account in the same call.
        #[arg(long, default_value_t = 0)]
        v_out: u64,
    },
    /// Turn private value back into public Wei.
    Withdraw {
        #[arg(long)]
        wallet: String,
        #[arg(long)]
        value: u64,
    },
    /// Scan new events for notes addressed to the wallet.
    Receive {
        #[arg(long)]
        wallet: String,
        /// Fail unless this scan delivers exactly this value.
        #[arg(long)]
        expect: Option<u64>,
    },
    /// Private and public balances of a wallet.
    Balance {
        #[arg(long)]
        wallet: String,
    },
    /// Re-denominate the wallet's own notes.
    Split {
        #[arg(long)]
        wallet: String,
        /// Value of each new note; repeatable.
        #[arg(long = "part", required = true)]
        parts: Vec<u64>,
    },
    /// Gas cost of verification and of a whole Mix call.
    Gas {
        #[arg(long, default_value_t = 2)]
        inputs: usize,
        #[arg(long, default_value_t = 2)]
        outputs: usize,
        #[command(flatten)]
        gas: GasArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run a security game and report the adversary's advantage.
    Harness {
        #[arg(long, value_enum)]
        game: Game,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, value_enum, default_value_t = Scheme::Hybrid)]
        scheme: Scheme,
    },
    /// Anonymity-hygiene report for the deployed mixer.
    Diagnostics,
}

#[derive(Args, Debug, Clone)]
struct GasArgs {
    /// Field elements in the verifier's instance.
    #[arg(long, default_value_t = zeth_core::gas::DEFAULT_INSTANCE_ELEMENTS)]
    instance_elements: u64,
    /// Built-in price table.
    #[arg(long, value_enum, default_value_t = Preset::Byzantium)]
    preset: Preset,
    /// JSON schedule file; missing fields fall back to Byzantium prices.
    #[arg(long, conflicts_with = "preset")]
    schedule: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Preset {
    Byzantium,
    Istanbul,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Table,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Game {
    MixerInd,
    IndCca2,
    IkCca,
    TrNm,
    Balance,
    All,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Scheme {
    Hybrid,
    LeakyRecipient,
    PlaintextLeak,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let session = Session::new(&cli.state_dir, cli.seed, cli.reveal_secrets);
    let result = match cli.command {
        Command::Setup { inputs, outputs, depth, gas } => session.setup(inputs, outputs, depth, &gas),
        Command::Deploy => session.deploy(),
        Command::Keygen { wallet, fund } => session.keygen(&wallet, fund),
        Command::Register { wallet, name } => session.register(&wallet, name.as_deref()),
        Command::Deposit { wallet, value } => session.deposit(&wallet, value),
        Command::Transfer { wallet, to, value, v_in, v_out } => session.transfer(&wallet, &to, &value, v_in, v_out),
        Command::Withdraw { wallet, value } => session.withdraw(&wallet, value),
        Command::Receive { wallet, expect } => session.receive(&wallet, expect),
        Command::Balance { wallet } => session.balance(&wallet),
        Command::Split { wallet, parts } => session.split(&wallet, &parts),
        Command::Gas { inputs, outputs, gas, format } => session.gas(inputs, outputs, &gas, format),
        Command::Harness { game, trials, scheme } => session.harness(game, trials, scheme),
        Command::Diagnostics => session.diagnostics(),
    };
    match result {
        Ok(output) => {
            // A closed pipe on stdout is the reader's choice, not a failure.
            let _ = writeln!(std::io::stdout().lock(), "{output}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", serde_json::to_string_pretty(&e.to_json()).expect("error JSON"));
            ExitCode::from(1)
        }
    }
}
