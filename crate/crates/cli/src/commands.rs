use std::fs;
use std::path::Path;

use rand::rngs::OsRng;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};
use zeth_core::crypto::hash_parts;
use zeth_core::deployment::ZethReceipt;
use zeth_core::gas::mix_call_estimate;
use zeth_core::harness::sabotage::{LeakyRecipientEncryption, PlaintextLeakEncryption};
use zeth_core::harness::{
    anonymity_diagnostics, run_balance, run_ikcca, run_indcca2, run_indistinguishability, run_trnm, BalanceScenario,
    ByteInspectionIk, ByteInspectionInd, ByteInspectionMixer, CiphertextReplace, CiphertextSwap, HonestReplay,
    RandomIk, RandomInd, RandomMixer, TrnmAdversary, VOutRedirect,
};
use zeth_core::joinsplit::DEFAULT_TREE_DEPTH;
use zeth_core::note::gen_address;
use zeth_core::proof::{circuit_fingerprint, setup};
use zeth_core::wallet::PreparedPayment;
use zeth_core::{
    Address, AddressPublic, CircuitConfig, Deployment, GasSchedule, HybridEncryption, Mixer, NoteEncryption,
    PaymentOptions, TxStatus, Wallet, ZethNote,
};

use crate::error::CliError;
use crate::state::{CliConfig, CrsFile, StateDir, WalletFile};
use crate::{Format, Game, GasArgs, Preset, Scheme};

type Output = Result<String, CliError>;

pub struct Session {
    dir: StateDir,
    seed: Option<u64>,
    /// Root of every per-command randomness stream.
    entropy: [u8; 32],
    reveal_secrets: bool,
}

fn render(value: &Value) -> Output {
    Ok(serde_json::to_string_pretty(value)?)
}

fn schedule(args: &GasArgs) -> Result<GasSchedule, CliError> {
    match &args.schedule {
        Some(path) => {
            let bytes = fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_slice(&bytes)
                .map_err(|e| CliError::Input(format!("{} is not a gas schedule: {e}", path.display())))
        }
        None => Ok(match args.preset {
            Preset::Byzantium => GasSchedule::BYZANTIUM,
            Preset::Istanbul => GasSchedule::ISTANBUL,
        }),
    }
}

fn circuit(inputs: usize, outputs: usize, depth: usize) -> Result<CircuitConfig, CliError> {
    CircuitConfig::new(inputs, outputs, depth).map_err(|e| CliError::Input(e.to_string()))
}

/// Payment state for one wallet: keys, chain and the wallet itself.
struct PayContext {
    crs: CrsFile,
    chain: Deployment,
    file: WalletFile,
}

impl Session {
    pub fn new(dir: &Path, seed: Option<u64>, reveal_secrets: bool) -> Self {
        let entropy = match seed {
            Some(s) => hash_parts([&b"zeth.cli.seed"[..], &s.to_be_bytes()]).0,
            None => {
                let mut e = [0u8; 32];
                OsRng.fill_bytes(&mut e);
                e
            }
        };
        Self { dir: StateDir::new(dir), seed, entropy, reveal_secrets }
    }

    /// Randomness for one operation, keyed by what it does and the chain height
    /// so that repeated commands under one seed never reuse note randomness.
    fn rng(&self, label: &str, height: u64) -> ChaCha20Rng {
        ChaCha20Rng::from_seed(hash_parts([&b"zeth.cli"[..], &self.entropy, label.as_bytes(), &height.to_be_bytes()]).0)
    }

    pub fn setup(&self, inputs: usize, outputs: usize, depth: usize, gas: &GasArgs) -> Output {
        let config = CliConfig {
            circuit: circuit(inputs, outputs, depth)?,
            gas: schedule(gas)?,
            instance_elements: gas.instance_elements,
        };
        let crs = setup(&config.circuit, &self.rng("setup", 0).gen());
        let file = CrsFile { proving_key: crs.proving_key.clone(), verification_key: crs.verification_key.clone() };
        self.dir.save_setup(&config, &file, &crs.trapdoor)?;
        render(&json!({
            "circuit": config.circuit,
            "fingerprint": crs.verification_key.fingerprint,
            "gas": config.gas,
            "instance_elements": config.instance_elements,
        }))
    }

    pub fn deploy(&self) -> Output {
        if self.dir.chain().is_ok() {
            return Err(CliError::State("a chain is already deployed in this state directory".into()));
        }
        let config = self.dir.config()?;
        let crs = self.dir.crs()?;
        if crs.verification_key.config != config.circuit {
            return Err(CliError::State("crs.json does not match config.json; rerun `setup`".into()));
        }
        let mixer = Mixer::new(crs.verification_key, config.gas)
            .map_err(|e| CliError::Input(e.to_string()))?
            .with_instance_elements(config.instance_elements);
        let chain = Deployment::with_mixer(mixer);
        self.dir.save_chain(&chain)?;
        let m = chain.mixer();
        render(&json!({
            "mixer": chain.mixer,
            "registry": chain.registry,
            "root": m.current_root(),
            "capacity": m.tree().capacity(),
            "mix_gas_limit": chain.mix_gas_limit(),
        }))
    }

    pub fn keygen(&self, name: &str, fund: u128) -> Output {
        if self.dir.has_wallet(name)? {
            return Err(CliError::State(format!("wallet {name:?} already exists")));
        }
        let mut chain = self.dir.chain()?;
        let address = gen_address(&self.rng(&format!("keygen/{name}"), chain.ledger.height()).gen());
        let account = Address::from_label(&format!("wallet/{name}"));
        chain.ledger.fund(account, fund)?;
        let file = WalletFile { name: name.to_owned(), wallet: Wallet::new(address.clone(), account) };
        self.dir.save_chain(&chain)?;
        self.dir.save_wallet(&file)?;
        let mut out = json!({
            "wallet": name,
            "address": address.public().to_string(),
            "account": account,
            "public_balance": chain.ledger.balance(&account).to_string(),
        });
        if self.reveal_secrets {
            out["secrets"] = json!({ "a_sk": address.a_sk, "k_sk": address.k_sk });
        }
        render(&out)
    }

    pub fn register(&self, wallet: &str, name: Option<&str>) -> Output {
        let mut chain = self.dir.chain()?;
        let file = self.dir.wallet(wallet)?;
        let name = name.unwrap_or(wallet);
        let receipt = chain.register(file.wallet.account(), name, file.wallet.public())?;
        self.dir.save_chain(&chain)?;
        let receipt = checked(&receipt)?;
        render(&json!({ "name": name, "address": file.wallet.public().to_string(), "receipt": receipt }))
    }

    fn pay_context(&self, wallet: &str) -> Result<PayContext, CliError> {
        let crs = self.dir.crs()?;
        let chain = self.dir.chain()?;
        let file = self.dir.wallet(wallet)?;
        if crs.proving_key.fingerprint != circuit_fingerprint(chain.mixer().config()) {
            return Err(CliError::State("proving key does not match the deployed mixer".into()));
        }
        Ok(PayContext { crs, chain, file })
    }

    /// Proves, submits, settles and rescans; state is saved even when the call reverts.
    fn pay(
        &self,
        kind: &str,
        wallet: &str,
        build: impl FnOnce(&mut PayContext, &mut ChaCha20Rng) -> Result<PreparedPayment, CliError>,
    ) -> Output {
        let mut ctx = self.pay_context(wallet)?;
        let mut rng = self.rng(&format!("{kind}/{wallet}"), ctx.chain.ledger.height());
        let payment = build(&mut ctx, &mut rng)?;
        let account = ctx.file.wallet.account();
        let receipt = ctx.chain.submit_mix(account, payment.tx.clone(), payment.value)?;
        let accepted = receipt.status.is_success();
        ctx.file.wallet.settle(&payment, accepted);
        let received = ctx.file.wallet.receive(ctx.chain.ledger.events(), ctx.chain.mixer(), &HybridEncryption);
        self.dir.save_chain(&ctx.chain)?;
        self.dir.save_wallet(&ctx.file)?;

        let ciphertext_events = receipt
            .events
            .iter()
            .filter(|e| matches!(e.event, zeth_core::ZethEvent::CiphertextBroadcast { .. }))
            .count();
        let receipt = checked(&receipt)?;
        render(&json!({
            "command": kind,
            "wallet": wallet,
            "receipt": receipt,
            "ciphertext_events": ciphertext_events,
            "received": self.notes_view(&received),
            "balance": ctx.file.wallet.balance(),
            "public_balance": ctx.chain.ledger.balance(&account).to_string(),
        }))
    }

    pub fn deposit(&self, wallet: &str, value: u64) -> Output {
        self.pay("deposit", wallet, |ctx, rng| {
            let me = ctx.file.wallet.public();
            Ok(ctx.file.wallet.make_payment(
                ctx.chain.mixer(),
                &ctx.crs.proving_key,
                &HybridEncryption,
                &[(me, value)],
                value,
                0,
                &PaymentOptions::default(),
                rng,
            )?)
        })
    }

    pub fn transfer(&self, wallet: &str, to: &[String], values: &[u64], v_in: u64, v_out: u64) -> Output {
        if to.len() != values.len() {
            return Err(CliError::Input(format!("{} recipients but {} values", to.len(), values.len())));
        }
        self.pay("transfer", wallet, |ctx, rng| {
            let mut recipients = Vec::with_capacity(to.len());
            for (target, &v) in to.iter().zip(values) {
                recipients.push((resolve(&ctx.chain, target)?, v));
            }
            Ok(ctx.file.wallet.make_payment(
                ctx.chain.mixer(),
                &ctx.crs.proving_key,
                &HybridEncryption,
                &recipients,
                v_in,
                v_out,
                &PaymentOptions::default(),
                rng,
            )?)
        })
    }

    pub fn withdraw(&self, wallet: &str, value: u64) -> Output {
        self.pay("withdraw", wallet, |ctx, rng| {
            Ok(ctx.file.wallet.make_payment(
                ctx.chain.mixer(),
                &ctx.crs.proving_key,
                &HybridEncryption,
                &[],
                0,
                value,
                &PaymentOptions::default(),
                rng,
            )?)
        })
    }

    pub fn split(&self, wallet: &str, parts: &[u64]) -> Output {
        self.pay("split", wallet, |ctx, rng| {
            Ok(ctx.file.wallet.self_split(ctx.chain.mixer(), &ctx.crs.proving_key, &HybridEncryption, parts, rng)?)
        })
    }

    pub fn receive(&self, wallet: &str, expect: Option<u64>) -> Output {
        let chain = self.dir.chain()?;
        let mut file = self.dir.wallet(wallet)?;
        let received = file.wallet.receive(chain.ledger.events(), chain.mixer(), &HybridEncryption);
        self.dir.save_wallet(&file)?;
        let value: u64 = received.iter().map(|n| n.value).sum();
        let mut out = json!({
            "wallet": wallet,
            "received": self.notes_view(&received),
            "received_value": value,
            "balance": file.wallet.balance(),
            "cursor": file.wallet.cursor(),
        });
        if let Some(expected) = expect {
            let verdict = file.wallet.expect_payment(expected);
            out["verdict"] = serde_json::to_value(verdict)?;
            if !verdict.accepted {
                return Err(CliError::Input(format!(
                    "expected a payment of {expected}, received {}",
                    verdict.received
                )));
            }
        }
        render(&out)
    }

    pub fn balance(&self, wallet: &str) -> Output {
        let chain = self.dir.chain()?;
        let file = self.dir.wallet(wallet)?;
        let w = &file.wallet;
        let notes: Vec<Value> = w
            .notes()
            .iter()
            .map(|n| {
                let mut v = json!({
                    "commitment": n.commitment,
                    "value": n.note.value,
                    "leaf_address": n.leaf_address,
                    "status": n.status,
                });
                if self.reveal_secrets {
                    v["note"] = json!(n.note);
                }
                v
            })
            .collect();
        render(&json!({
            "wallet": wallet,
            "address": w.public().to_string(),
            "account": w.account(),
            "balance": w.balance(),
            "public_balance": chain.ledger.balance(&w.account()).to_string(),
            "notes": notes,
        }))
    }

    pub fn gas(&self, inputs: usize, outputs: usize, args: &GasArgs, format: Format) -> Output {
        let config = circuit(inputs, outputs, DEFAULT_TREE_DEPTH)?;
        let sched = schedule(args)?;
        let est = mix_call_estimate(&config, &sched, args.instance_elements);
        let v = est.verification;
        if format == Format::Table {
            let rows = [
                ("instance linear combination", v.linear_combination),
                ("knowledge commitment checks", v.knowledge_commitments),
                ("same-coefficient check", v.coefficient_check),
                ("QAP divisibility check", v.qap_divisibility),
                ("verification total", v.total),
                ("intrinsic (estimate)", est.intrinsic),
                ("storage writes (estimate)", est.storage),
                ("mix call total (estimate)", est.total),
            ];
            let mut out = format!("(N, M) = ({inputs}, {outputs}), n = {}\n", args.instance_elements);
            for (label, gas) in rows {
                out.push_str(&format!("{label:<30}{gas:>12}\n"));
            }
            out.push_str(&format!("{:<30}{:>12}", "below 2,000,000", v.total < 2_000_000));
            return Ok(out);
        }
        render(&json!({
            "inputs": inputs,
            "outputs": outputs,
            "instance_elements": args.instance_elements,
            "schedule": sched,
            "verification": v,
            "below_two_million": v.total < 2_000_000,
            "mix_call_estimate": {
                "intrinsic": est.intrinsic,
                "storage_writes": est.storage_writes,
                "storage": est.storage,
                "total": est.total,
                "verification_share": est.verification_share(),
            },
        }))
    }

    pub fn harness(&self, game: Game, trials: u64, scheme: Scheme) -> Output {
        let seed = self.seed.unwrap_or(0);
        let enc: &dyn NoteEncryption = match scheme {
            Scheme::Hybrid => &HybridEncryption,
            Scheme::LeakyRecipient => &LeakyRecipientEncryption,
            Scheme::PlaintextLeak => &PlaintextLeakEncryption,
        };
        let all = game == Game::All;
        let mut reports = Vec::new();
        if all || game == Game::MixerInd {
            reports.push(json!(run_indistinguishability(enc, &RandomMixer, trials, seed)));
            reports.push(json!(run_indistinguishability(enc, &ByteInspectionMixer, trials, seed)));
        }
        if all || game == Game::IndCca2 {
            reports.push(json!(run_indcca2(enc, &RandomInd, trials, seed)));
            reports.push(json!(run_indcca2(enc, &ByteInspectionInd, trials, seed)));
        }
        if all || game == Game::IkCca {
            reports.push(json!(run_ikcca(enc, &RandomIk, trials, seed)));
            reports.push(json!(run_ikcca(enc, &ByteInspectionIk, trials, seed)));
        }
        if all || game == Game::TrNm {
            let adversaries: [&dyn TrnmAdversary; 4] =
                [&CiphertextSwap, &CiphertextReplace, &VOutRedirect, &HonestReplay];
            for adv in adversaries {
                reports.push(json!(run_trnm(adv, trials, seed)));
            }
        }
        if all || game == Game::Balance {
            for s in BalanceScenario::ALL {
                reports.push(json!(run_balance(s, seed)));
            }
        }
        render(&json!({ "trials": trials, "seed": seed, "reports": reports }))
    }

    pub fn diagnostics(&self) -> Output {
        let chain = self.dir.chain()?;
        render(&json!(anonymity_diagnostics(&chain)))
    }

    fn notes_view(&self, notes: &[ZethNote]) -> Vec<Value> {
        notes
            .iter()
            .map(
                |n| {
                    if self.reveal_secrets {
                        json!(n)
                    } else {
                        json!({ "commitment": n.commitment(), "value": n.value })
                    }
                },
            )
            .collect()
    }
}

/// The receipt as JSON, or a `Rejected` error if the call did not succeed.
fn checked(receipt: &ZethReceipt) -> Result<Value, CliError> {
    let json = serde_json::to_value(receipt)?;
    let status = match &receipt.status {
        TxStatus::Success => return Ok(json),
        TxStatus::Reverted(e) => format!("reverted: {e}"),
        TxStatus::OutOfGas => "ran out of gas".to_owned(),
    };
    Err(CliError::Rejected { status, receipt: json })
}

/// A 128-hex-character address, or a name published in the registry.
fn resolve(chain: &Deployment, target: &str) -> Result<AddressPublic, CliError> {
    if let Ok(addr) = target.parse() {
        return Ok(addr);
    }
    chain
        .registry()
        .lookup(target)
        .copied()
        .ok_or_else(|| CliError::Input(format!("{target:?} is neither an address nor a registered name")))
}
