//! Mixer indistinguishability. Two mixers run side by side; the adversary
//! submits publicly consistent query pairs `(Q, Q')`, the challenger runs `Q`
//! on mixer `b` and `Q'` on mixer `1 - b`, and the adversary, seeing both
//! public ledgers, guesses `b`.

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::challenger::{Challenger, Query, QueryError, Response};
use super::encryption_games::contains;
use super::{trial_rng, GameReport};
use crate::crypto::NoteEncryption;
use crate::gas::GasSchedule;
use crate::joinsplit::CircuitConfig;
use crate::ledger::{EventRecord, TxRecord};
use crate::mixer::{MixTransaction, ZethCall, ZethEvent};
use crate::note::{AddressPublic, ZethAddress};
use crate::proof::setup;

/// Everything an outside observer of one ledger sees.
pub struct PublicView<'g> {
    pub events: &'g [EventRecord<ZethEvent>],
    pub transactions: &'g [TxRecord<ZethCall>],
}

pub struct IndGame<'a> {
    mixers: [Challenger<'a>; 2],
    b: usize,
    rng: ChaCha20Rng,
}

impl<'a> IndGame<'a> {
    pub fn new(config: &CircuitConfig, scheme: &'a dyn NoteEncryption, b: usize, rng: &mut ChaCha20Rng) -> Self {
        assert!(b < 2);
        let crs = setup(config, &rng.gen());
        let left = Challenger::new(&crs, GasSchedule::default(), scheme, rng.gen()).expect("valid depth");
        let right = Challenger::new(&crs, GasSchedule::default(), scheme, rng.gen()).expect("valid depth");
        Self { mixers: [left, right], b, rng: rng.clone() }
    }

    pub fn view(&self, mixer: usize) -> PublicView<'_> {
        let ledger = &self.mixers[mixer].deployment().ledger;
        PublicView { events: ledger.events(), transactions: ledger.transactions() }
    }

    /// Public keys of `ADDR`; identical on both mixers.
    pub fn addresses(&self) -> Vec<AddressPublic> {
        self.mixers[0].addresses()
    }

    /// Runs the pair and returns the answers indexed by mixer.
    pub fn query_pair(&mut self, q: &Query, q_prime: &Query) -> Result<[Response; 2], QueryError> {
        if q.kind() != q_prime.kind() {
            return Err(QueryError::InconsistentPair(format!("{} paired with {}", q.kind(), q_prime.kind())));
        }
        let (b, nb) = (self.b, 1 - self.b);
        let mut answers: [Option<Response>; 2] = [None, None];
        match (q, q_prime) {
            (Query::CreateAddress, Query::CreateAddress) => {
                let address = ZethAddress::random(&mut self.rng);
                for (i, m) in self.mixers.iter_mut().enumerate() {
                    answers[i] = Some(Response::Address(m.add_address(address.clone())));
                }
            }
            (
                Query::Mix { sender: s0, recipients: r0, v_in: i0, v_out: o0 },
                Query::Mix { sender: s1, recipients: r1, v_in: i1, v_out: o1 },
            ) => {
                if i0 != i1 || o0 != o1 || r0.len() != r1.len() {
                    return Err(QueryError::InconsistentPair("public values or recipient counts differ".into()));
                }
                let p0 = self.mixers[b].prepare_mix(*s0, r0, *i0, *o0)?;
                let p1 = match self.mixers[nb].prepare_mix(*s1, r1, *i1, *o1) {
                    Ok(p) => p,
                    Err(e) => {
                        self.mixers[b].cancel(*s0, &p0);
                        return Err(QueryError::InconsistentPair(format!("second query cannot be built: {e}")));
                    }
                };
                let a0 = self.mixers[b].submit_prepared(*s0, p0);
                let a1 = self.mixers[nb].submit_prepared(*s1, p1);
                match (a0, a1) {
                    (Ok(x), Ok(y)) => {
                        answers[b] = Some(x);
                        answers[nb] = Some(y);
                    }
                    (Err(e), Err(_)) => return Err(e),
                    _ => return Err(QueryError::InconsistentPair("only one mix was accepted".into())),
                }
            }
            (Query::Receive { .. }, Query::Receive { .. }) => {
                let a0 = self.mixers[b].query(q)?;
                let a1 = self.mixers[nb].query(q_prime)?;
                if received_shape(&a0) != received_shape(&a1) {
                    return Err(QueryError::InconsistentPair("receive results differ in size".into()));
                }
                answers[b] = Some(a0);
                answers[nb] = Some(a1);
            }
            (Query::Insert { tx: t0, value: v0 }, Query::Insert { tx: t1, value: v1 }) => {
                if v0 != v1 {
                    return Err(QueryError::InconsistentPair("attached values differ".into()));
                }
                let ok0 = self.mixers[b].dry_run_insert(t0, *v0)?;
                let ok1 = self.mixers[nb].dry_run_insert(t1, *v1)?;
                if ok0 != ok1 {
                    return Err(QueryError::InconsistentPair("only one insert would be accepted".into()));
                }
                let a0 = self.mixers[b].query(q);
                let a1 = self.mixers[nb].query(q_prime);
                let (a0, a1) = (a0?, a1?);
                if received_shape(&a0) != received_shape(&a1) {
                    return Err(QueryError::InconsistentPair("receive results differ in size".into()));
                }
                answers[b] = Some(a0);
                answers[nb] = Some(a1);
            }
            _ => unreachable!("kinds compared above"),
        }
        let [x, y] = answers;
        Ok([x.expect("filled"), y.expect("filled")])
    }
}

fn received_shape(r: &Response) -> Vec<usize> {
    match r {
        Response::Received { commitments } => vec![commitments.len()],
        Response::Inserted { received } => received.iter().map(Vec::len).collect(),
        _ => Vec::new(),
    }
}

pub trait MixerAdversary: Sync {
    fn name(&self) -> &'static str;
    /// Plays one game and returns the guess for `b`.
    fn play(&self, game: &mut IndGame, rng: &mut ChaCha20Rng) -> usize;
}

/// Result of the scripted workload both built-in adversaries run.
struct Scripted {
    addresses: Vec<AddressPublic>,
    /// The challenge payment as it appeared on each mixer.
    challenge: [MixTransaction; 2],
}

/// Two addresses, a symmetric deposit for each, then the challenge pair
/// `Q = ADDR0 pays ADDR1` versus `Q' = ADDR1 pays ADDR0`, followed by a
/// receive pair and a replay of the challenge through `Insert`.
fn script(game: &mut IndGame) -> Result<Scripted, QueryError> {
    game.query_pair(&Query::CreateAddress, &Query::CreateAddress)?;
    game.query_pair(&Query::CreateAddress, &Query::CreateAddress)?;
    for a in 0..2 {
        let deposit = Query::Mix { sender: a, recipients: vec![(a, 5)], v_in: 5, v_out: 0 };
        game.query_pair(&deposit, &deposit)?;
        let receive = Query::Receive { address: a };
        game.query_pair(&receive, &receive)?;
    }
    let q = Query::Mix { sender: 0, recipients: vec![(1, 2)], v_in: 0, v_out: 0 };
    let q_prime = Query::Mix { sender: 1, recipients: vec![(0, 2)], v_in: 0, v_out: 0 };
    let answers = game.query_pair(&q, &q_prime)?;
    let challenge = answers.map(|a| match a {
        Response::Mixed { tx } => tx,
        other => unreachable!("mix answered with {other:?}"),
    });
    game.query_pair(&Query::Receive { address: 1 }, &Query::Receive { address: 0 })?;
    let replay = Query::Insert { tx: challenge[0].clone(), value: 0 };
    // Both copies abort (double spend on one mixer, unknown root on the other).
    let _ = game.query_pair(&replay, &replay);
    Ok(Scripted { addresses: game.addresses(), challenge })
}

/// Runs the script, then guesses uniformly.
#[derive(Clone, Copy, Debug, Default)]
pub struct RandomMixer;

impl MixerAdversary for RandomMixer {
    fn name(&self) -> &'static str {
        "random-guess"
    }

    fn play(&self, game: &mut IndGame, rng: &mut ChaCha20Rng) -> usize {
        let _ = script(game);
        rng.gen_range(0..2)
    }
}

/// Runs the script, then looks for the recipients' public keys in the first
/// ciphertext of the challenge payment on mixer 0.
#[derive(Clone, Copy, Debug, Default)]
pub struct ByteInspectionMixer;

impl MixerAdversary for ByteInspectionMixer {
    fn name(&self) -> &'static str {
        "byte-inspection"
    }

    fn play(&self, game: &mut IndGame, rng: &mut ChaCha20Rng) -> usize {
        let Ok(s) = script(game) else {
            return rng.gen_range(0..2);
        };
        let first = s.challenge[0].ciphertexts[0].to_bytes();
        let mentions = |a: &AddressPublic| contains(&first, &a.k_pk.0) || contains(&first, &a.a_pk.0);
        // Q pays ADDR1 first; Q' pays ADDR0 first.
        if mentions(&s.addresses[1]) {
            return 0;
        }
        if mentions(&s.addresses[0]) {
            return 1;
        }
        usize::from(s.challenge[0].ciphertexts[0].ephemeral_pk[0] & 1)
    }
}

pub fn run_indistinguishability(
    scheme: &dyn NoteEncryption,
    adversary: &dyn MixerAdversary,
    trials: u64,
    seed: u64,
) -> GameReport {
    let config = CircuitConfig::new(2, 2, 8).expect("valid shape");
    let wins = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = trial_rng(seed, "mixer-ind", t);
            let b = rng.gen_range(0..2usize);
            let mut game = IndGame::new(&config, scheme, b, &mut rng);
            adversary.play(&mut game, &mut rng) == b
        })
        .count() as u64;
    GameReport::new("mixer-indistinguishability", adversary.name(), scheme.name(), trials, wins)
}
