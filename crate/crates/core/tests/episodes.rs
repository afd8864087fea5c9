use std::sync::{Arc, Mutex};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tangram_core::episode::{accuracy, run_episode, run_trial, ConfusionMatrix, ReceiverAngles};
use tangram_core::figures::default_figures;
use tangram_core::nn::{NetSpec, ParameterSet};
use tangram_core::pipeline::{
    Builtin, EmbeddingTable, Identification, IdentifyStage, InterpretStage, Message, Mock, MockMode, Receiver, Representation, Sender, StageSettings, Vocabulary,
};
use tangram_core::raster::{RasterView, ViewBank};
use tangram_core::{Error, Result};

fn bank() -> ViewBank {
    ViewBank::new(&default_figures(), 64, 64).unwrap()
}

fn table() -> EmbeddingTable {
    EmbeddingTable::random(Vocabulary::archetypes(16), 32, 7)
}

fn oracle_agents() -> (Sender, Receiver) {
    let mock = Mock::new(table(), 3, MockMode::Oracle);
    (Sender::from_backend(table().vocab().clone(), mock.clone()), Receiver::from_backend(mock))
}

fn builtin_agents() -> (Sender, Receiver) {
    let params = ParameterSet::init(NetSpec::default_perceiver(16), 3).unwrap();
    let b = Builtin::seeded(params, table(), StageSettings::default(), 8).unwrap();
    (Sender::from_backend(table().vocab().clone(), b.clone()), Receiver::from_backend(b))
}

#[test]
fn oracle_receiver_always_succeeds() {
    let (s, r) = oracle_agents();
    let trial = run_trial(&s, &r, &bank(), ReceiverAngles::Random, 11).unwrap();
    assert_eq!(trial.episodes.len(), 48);
    assert_eq!(trial.accuracy, Some(1.0));
    for i in 0..6 {
        assert_eq!(trial.confusion.get(i, i), 8);
        assert_eq!(trial.confusion.rows()[i].iter().sum::<u64>(), 8);
    }
    assert!(trial.episodes.iter().all(|e| e.success && e.error.is_none()));
}

#[test]
fn episodes_are_deterministic() {
    let (s, r) = builtin_agents();
    let b = bank();
    let order = [0, 1, 2, 3, 4, 5];
    let angles = [3, 1, 4, 1, 5, 2];
    let a = run_episode(&s, &r, &b, 2, 6, &angles, &order, 99).unwrap();
    assert_eq!(a, run_episode(&s, &r, &b, 2, 6, &angles, &order, 99).unwrap());
    assert_eq!(a.success, a.chosen_id == Some(2));
}

#[test]
fn presentation_order_does_not_change_the_choice() {
    let (s, r) = builtin_agents();
    let b = bank();
    let angles = [0, 2, 4, 6, 1, 3];
    let identity = [0u32, 1, 2, 3, 4, 5];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for fid in [0u32, 3] {
        let base = run_episode(&s, &r, &b, fid, 1, &angles, &identity, 1).unwrap();
        for _ in 0..10 {
            let mut order = identity;
            order.shuffle(&mut rng);
            let other = run_episode(&s, &r, &b, fid, 1, &angles, &order, 1).unwrap();
            assert_eq!(other.chosen_id, base.chosen_id);
            assert_eq!(other.scores, base.scores);
        }
    }
}

#[test]
fn thirteen_successes() {
    let mut cm = ConfusionMatrix::new(6);
    for i in 0..48 {
        let intended = i % 6;
        cm.record(intended, if i < 13 { intended } else { (intended + 1) % 6 });
    }
    let acc = accuracy(&cm).unwrap();
    assert!((acc - 13.0 / 48.0).abs() < 1e-15);
    assert!((acc - 0.2708).abs() < 1e-4);
    let mut chance = ConfusionMatrix::new(6);
    (0..48).for_each(|i| chance.record(i % 6, if i < 8 { i % 6 } else { (i + 1) % 6 }));
    assert!((accuracy(&chance).unwrap() - 0.16667).abs() < 1e-5);
}

#[derive(Clone, Default)]
struct Tap {
    messages: Arc<Mutex<Vec<Message>>>,
    boards: Arc<Mutex<Vec<Vec<String>>>>,
    inner: Option<Mock>,
}

impl InterpretStage for Tap {
    fn interpret(&self, msg: &Message, seed: u64) -> Result<Representation> {
        self.messages.lock().unwrap().push(msg.clone());
        self.inner.as_ref().unwrap().interpret(msg, seed)
    }
}

impl IdentifyStage for Tap {
    fn identify(&self, r: &Representation, candidates: &[RasterView], seed: u64) -> Result<Identification> {
        self.boards.lock().unwrap().push(candidates.iter().map(RasterView::content_hash).collect());
        self.inner.as_ref().unwrap().identify(r, candidates, seed)
    }
}

#[test]
fn receiver_sees_only_the_message_and_its_own_board() {
    let (s, _) = oracle_agents();
    let tap = Tap { inner: Some(Mock::new(table(), 3, MockMode::Oracle)), ..Default::default() };
    let r = Receiver::from_backend(tap.clone());
    let b = bank();
    let trial = run_trial(&s, &r, &b, ReceiverAngles::Random, 3).unwrap();
    let messages = tap.messages.lock().unwrap();
    let boards = tap.boards.lock().unwrap();
    assert_eq!(messages.len(), 48);
    for ((ep, msg), board) in trial.episodes.iter().zip(messages.iter()).zip(boards.iter()) {
        assert_eq!(Some(msg), ep.message.as_ref());
        let expected: Vec<String> =
            (0..6).map(|f| b.view(f, ep.receiver_angles[f]).content_hash()).collect();
        assert_eq!(board, &expected);
    }
}

#[derive(Clone)]
struct Flaky(Mock);

impl InterpretStage for Flaky {
    fn interpret(&self, msg: &Message, seed: u64) -> Result<Representation> {
        if seed % 3 == 0 {
            return Err(Error::BackendUnavailable("status 503".into()));
        }
        self.0.interpret(msg, seed)
    }
}

impl IdentifyStage for Flaky {
    fn identify(&self, r: &Representation, candidates: &[RasterView], seed: u64) -> Result<Identification> {
        self.0.identify(r, candidates, seed)
    }
}

#[test]
fn errored_episodes_are_excluded() {
    let (s, _) = oracle_agents();
    let r = Receiver::from_backend(Flaky(Mock::new(table(), 3, MockMode::Oracle)));
    let trial = run_trial(&s, &r, &bank(), ReceiverAngles::Random, 8).unwrap();
    assert!(trial.errored > 0 && trial.errored < 48);
    assert_eq!(trial.confusion.total() as usize, 48 - trial.errored);
    assert_eq!(trial.accuracy, Some(1.0));
    for e in trial.episodes.iter().filter(|e| e.error.is_some()) {
        assert!(!e.success);
        assert!(e.error.as_ref().unwrap().contains("backend unavailable"));
    }
}

#[test]
fn fixed_offset_boards() {
    let (s, r) = oracle_agents();
    let trial = run_trial(&s, &r, &bank(), ReceiverAngles::Offset(2), 0).unwrap();
    for e in &trial.episodes {
        assert!(e.receiver_angles.iter().all(|&a| a == (e.sender_angle + 2) % 8));
    }
}

#[test]
fn random_receiver_is_at_chance() {
    let mock = Mock::new(table(), 3, MockMode::Hash);
    let (s, _) = builtin_agents();
    let r = Receiver::from_backend(mock);
    let b = bank();
    let trials = 50;
    let hits: u64 = (0..trials).map(|seed| run_trial(&s, &r, &b, ReceiverAngles::Random, seed).unwrap().confusion.trace()).sum();
    let n = 48.0 * trials as f64;
    let p = 1.0 / 6.0;
    let half_width = 2.5758 * (p * (1.0 - p) / n).sqrt();
    let acc = hits as f64 / n;
    assert!((acc - p).abs() <= half_width, "accuracy {acc}");
}
