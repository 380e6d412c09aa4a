//! Executable security games: the zero-knowledge (file indistinguishability)
//! game, the two published distinguishers, advantage estimation and the
//! single-block tamper soundness game.

use std::fmt;
use std::str::FromStr;

use ark_ff::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::blinded::challenge_label_product;
use crate::error::{Error, Result};
use crate::gs::{gs_extract, gs_keygen_with, gs_target, witness_satisfies, CkMode};
use crate::mht::block_hash;
use crate::pairing::{g2_generator, multi_pair, random_nonzero_scalar, random_scalar, Scalar};
use crate::protocol::{default_challenge_size, sample_challenge, BlockVector, Challenge, FileTag, SchemeId};
use crate::scheme::{keygen, respond, token_gen, verify, Proof, PublicKey, ServerState, UserKeys};

pub type GameRng = ChaCha20Rng;

/// Blocks per file in the files the shipped adversaries choose.
pub const GAME_BLOCKS: usize = 8;

/// Phase-1 token oracle handed to adversaries.
pub type TokenOracle<'a> = dyn FnMut(&BlockVector) -> Result<(FileTag, ServerState)> + 'a;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Guess {
    pub bit: bool,
    /// False when the adversary's strategy did not apply and it guessed at random.
    pub applicable: bool,
}

pub trait Adversary {
    fn name(&self) -> &'static str;

    /// Phase 1. The default asks for nothing.
    fn phase1(&mut self, _pk: &PublicKey, _oracle: &mut TokenOracle<'_>, _rng: &mut GameRng) -> Result<()> {
        Ok(())
    }

    /// Two files of equal length; the game overwrites both names with `name`.
    fn choose_files(&mut self, name: &[u8], rng: &mut GameRng) -> (BlockVector, BlockVector);

    fn choose_challenge(&mut self, pk: &PublicKey, tag: &FileTag, n: usize, rng: &mut GameRng) -> Challenge;

    fn guess(
        &mut self,
        pk: &PublicKey,
        tag: &FileTag,
        chal: &Challenge,
        proof: &Proof,
        rng: &mut GameRng,
    ) -> Guess;
}

fn random_file(name: &[u8], n: usize, rng: &mut GameRng) -> BlockVector {
    BlockVector::new(name.to_vec(), (0..n).map(|_| random_scalar(rng)).collect())
        .expect("n is positive")
}

fn default_challenge(n: usize, rng: &mut GameRng) -> Challenge {
    sample_challenge(n, default_challenge_size(n), rng).expect("size within range")
}

fn coin(rng: &mut GameRng) -> Guess {
    Guess { bit: rng.gen(), applicable: false }
}

#[derive(Debug, Default)]
pub struct RandomGuesser;

impl Adversary for RandomGuesser {
    fn name(&self) -> &'static str {
        "random"
    }

    fn choose_files(&mut self, name: &[u8], rng: &mut GameRng) -> (BlockVector, BlockVector) {
        (random_file(name, GAME_BLOCKS, rng), random_file(name, GAME_BLOCKS, rng))
    }

    fn choose_challenge(&mut self, _: &PublicKey, _: &FileTag, n: usize, rng: &mut GameRng) -> Challenge {
        default_challenge(n, rng)
    }

    fn guess(&mut self, _: &PublicKey, _: &FileTag, _: &Challenge, _: &Proof, rng: &mut GameRng) -> Guess {
        Guess { bit: rng.gen(), applicable: true }
    }
}

/// Recomputes `H(m_i⁽⁰⁾)` for an opened index and compares it with the leaf
/// hash the MHT proof reveals.
#[derive(Debug, Default)]
pub struct MhtHashDistinguisher {
    f0: Option<BlockVector>,
}

impl Adversary for MhtHashDistinguisher {
    fn name(&self) -> &'static str {
        "fig2"
    }

    fn choose_files(&mut self, name: &[u8], rng: &mut GameRng) -> (BlockVector, BlockVector) {
        let f0 = random_file(name, GAME_BLOCKS, rng);
        self.f0 = Some(f0.clone());
        (f0, random_file(name, GAME_BLOCKS, rng))
    }

    fn choose_challenge(&mut self, _: &PublicKey, _: &FileTag, n: usize, rng: &mut GameRng) -> Challenge {
        default_challenge(n, rng)
    }

    fn guess(&mut self, _: &PublicKey, _: &FileTag, _: &Challenge, proof: &Proof, rng: &mut GameRng) -> Guess {
        let (Proof::Mht(p), Some(f0)) = (proof, &self.f0) else {
            return coin(rng);
        };
        let Some(opened) = p.opened.first() else {
            return coin(rng);
        };
        match f0.block(opened.index) {
            Ok(m) => Guess { bit: block_hash(&m) != opened.leaf, applicable: true },
            Err(_) => coin(rng),
        }
    }
}

/// Computes `μ'₀ = Σ ν_i m_i⁽⁰⁾` and checks
/// `e(Π H(W_i)^{ν_i} · u^{μ'₀}, v) = e(σ, g)` against the unblinded `σ`.
#[derive(Debug, Default)]
pub struct BlindedRecomputeDistinguisher {
    f0: Option<BlockVector>,
}

impl Adversary for BlindedRecomputeDistinguisher {
    fn name(&self) -> &'static str {
        "fig4"
    }

    fn choose_files(&mut self, name: &[u8], rng: &mut GameRng) -> (BlockVector, BlockVector) {
        let f0 = random_file(name, GAME_BLOCKS, rng);
        self.f0 = Some(f0.clone());
        (f0, random_file(name, GAME_BLOCKS, rng))
    }

    fn choose_challenge(&mut self, _: &PublicKey, _: &FileTag, n: usize, rng: &mut GameRng) -> Challenge {
        default_challenge(n, rng)
    }

    fn guess(&mut self, pk: &PublicKey, tag: &FileTag, chal: &Challenge, proof: &Proof, rng: &mut GameRng) -> Guess {
        let (Proof::Blinded(p), PublicKey::Blinded(pk), Some(f0)) = (proof, pk, &self.f0) else {
            return coin(rng);
        };
        let Ok(mu0) = chal.combine_blocks(f0) else {
            return coin(rng);
        };
        let lhs = challenge_label_product(&tag.name, chal) + pk.u * mu0;
        let matches = multi_pair(&[lhs, -p.sigma], &[pk.v, g2_generator()])
            .map(|t| t.is_zero())
            .unwrap_or(false);
        Guess { bit: !matches, applicable: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AdversaryKind {
    Random,
    Fig2,
    Fig4,
}

impl AdversaryKind {
    pub const ALL: [AdversaryKind; 3] = [AdversaryKind::Random, AdversaryKind::Fig2, AdversaryKind::Fig4];

    pub fn build(self) -> Box<dyn Adversary> {
        match self {
            AdversaryKind::Random => Box::new(RandomGuesser),
            AdversaryKind::Fig2 => Box::<MhtHashDistinguisher>::default(),
            AdversaryKind::Fig4 => Box::<BlindedRecomputeDistinguisher>::default(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AdversaryKind::Random => "random",
            AdversaryKind::Fig2 => "fig2",
            AdversaryKind::Fig4 => "fig4",
        }
    }
}

impl fmt::Display for AdversaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AdversaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(AdversaryKind::Random),
            "fig2" => Ok(AdversaryKind::Fig2),
            "fig4" => Ok(AdversaryKind::Fig4),
            other => Err(Error::Argument(format!("unknown adversary {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub tag: Vec<u8>,
    pub challenge: Vec<u8>,
    pub proof: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameResult {
    pub b: bool,
    pub guess: Guess,
    pub transcript: Transcript,
}

impl GameResult {
    pub fn success(&self) -> bool {
        self.b == self.guess.bit
    }

    pub fn transcript_hash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        for part in [&self.transcript.tag, &self.transcript.challenge, &self.transcript.proof] {
            h.update((part.len() as u64).to_be_bytes());
            h.update(part);
        }
        h.update([self.b as u8, self.guess.bit as u8, self.guess.applicable as u8]);
        h.finalize().into()
    }
}

/// One run of the indistinguishability game.
pub fn run_zk_game(scheme: SchemeId, adversary: &mut dyn Adversary, rng: &mut GameRng) -> Result<GameResult> {
    let keys = keygen(scheme, rng);
    let pk = keys.public();

    let mut queried: Vec<BlockVector> = Vec::new();
    {
        let mut token_rng = GameRng::from_rng(&mut *rng).map_err(|e| Error::Game(e.to_string()))?;
        let mut oracle = |f: &BlockVector| {
            queried.push(f.clone());
            token_gen(&keys, f, &mut token_rng)
        };
        adversary.phase1(&pk, &mut oracle, rng)?;
    }

    let name = fresh_name(rng);
    let (f0, f1) = adversary.choose_files(&name, rng);
    let (f0, f1) = (f0.with_name(name.clone()), f1.with_name(name));
    if f0.len() != f1.len() {
        return Err(Error::Game("challenge files differ in length".into()));
    }
    if f0.blocks() == f1.blocks() {
        return Err(Error::Game("challenge files are identical".into()));
    }
    if queried.iter().any(|q| q.blocks() == f0.blocks() || q.blocks() == f1.blocks()) {
        return Err(Error::Game("challenge file was queried in phase 1".into()));
    }

    let b: bool = rng.gen();
    let fb = if b { &f1 } else { &f0 };
    let (tag, state) = token_gen(&keys, fb, rng)?;
    let chal = adversary.choose_challenge(&pk, &tag, fb.len(), rng);
    chal.check_range(fb.len())?;
    let proof = respond(fb, &state, &pk, &chal, rng)?;
    let guess = adversary.guess(&pk, &tag, &chal, &proof, rng);

    Ok(GameResult {
        b,
        guess,
        transcript: Transcript { tag: tag.encode(), challenge: chal.encode(), proof: proof.encode() },
    })
}

fn fresh_name(rng: &mut GameRng) -> Vec<u8> {
    let bytes: [u8; 8] = rng.gen();
    let hex: String = bytes.iter().map(|b| format!("{b:02x}")).collect();
    format!("game-{hex}").into_bytes()
}

/// Independent stream per trial, so trials can run in any order or in parallel.
pub fn trial_rng(seed: u64, trial: u64) -> GameRng {
    let mut rng = GameRng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Wald interval half-width at 95%.
pub fn confidence_radius(successes: u64, trials: u64) -> f64 {
    let p = successes as f64 / trials as f64;
    1.96 * (p * (1.0 - p) / trials as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdvantageEstimate {
    pub scheme: SchemeId,
    pub adversary: &'static str,
    pub seed: u64,
    pub trials: u64,
    pub successes: u64,
    /// Trials in which the adversary's strategy applied.
    pub applicable: u64,
    pub advantage: f64,
    pub confidence_radius: f64,
    /// Hash over every trial's transcript hash, in trial order.
    pub transcript_hash: [u8; 32],
}

impl AdvantageEstimate {
    pub fn report_line(&self) -> String {
        format!(
            "zk scheme={} adversary={} trials={} successes={} applicable={} advantage={:.4} ci95={:.4} seed={}",
            self.scheme,
            self.adversary,
            self.trials,
            self.successes,
            self.applicable,
            self.advantage,
            self.confidence_radius,
            self.seed
        )
    }
}

pub fn estimate_advantage(
    scheme: SchemeId,
    make_adversary: &(dyn Fn() -> Box<dyn Adversary> + Sync),
    trials: u64,
    seed: u64,
) -> Result<AdvantageEstimate> {
    if trials == 0 {
        return Err(Error::Argument("trials must be at least 1".into()));
    }
    let results: Vec<GameResult> = (0..trials)
        .into_par_iter()
        .map(|t| run_zk_game(scheme, make_adversary().as_mut(), &mut trial_rng(seed, t)))
        .collect::<Result<_>>()?;
    let successes = results.iter().filter(|r| r.success()).count() as u64;
    let applicable = results.iter().filter(|r| r.guess.applicable).count() as u64;
    let mut h = Sha256::new();
    for r in &results {
        h.update(r.transcript_hash());
    }
    Ok(AdvantageEstimate {
        scheme,
        adversary: make_adversary().name(),
        seed,
        trials,
        successes,
        applicable,
        advantage: (successes as f64 / trials as f64 - 0.5).abs(),
        confidence_radius: confidence_radius(successes, trials),
        transcript_hash: h.finalize().into(),
    })
}

/// Replace block `index` (1-based) with `replacement`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TamperSpec {
    pub index: u64,
    pub replacement: Scalar,
}

impl TamperSpec {
    pub fn validate(&self, file: &BlockVector) -> Result<()> {
        let original = file
            .block(self.index)
            .map_err(|_| Error::Argument(format!("tamper index {} outside 1..={}", self.index, file.len())))?;
        if original == self.replacement {
            return Err(Error::Argument("tamper replacement equals the original block".into()));
        }
        Ok(())
    }

    pub fn random(file: &BlockVector, rng: &mut GameRng) -> Self {
        let index = rng.gen_range(1..=file.len() as u64);
        let original = file.block(index).expect("index in range");
        loop {
            let replacement = random_scalar(rng);
            if replacement != original {
                return Self { index, replacement };
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SoundnessOutcome {
    pub accepted: bool,
    /// GS only: whether the witness extracted from the forged response
    /// satisfies the pairing equation.
    pub extracted_valid: Option<bool>,
}

/// Challenge of size `c` over `1..=n` whose index set contains `j` with a
/// nonzero coefficient.
pub fn challenge_covering(n: usize, c: usize, j: u64, rng: &mut GameRng) -> Result<Challenge> {
    let sampled = sample_challenge(n, c, rng)?;
    let mut pairs: Vec<(u64, Scalar)> = sampled.pairs().to_vec();
    match pairs.iter_mut().find(|(i, _)| *i == j) {
        Some(p) => {
            if p.1.is_zero() {
                p.1 = random_nonzero_scalar(rng);
            }
        }
        None => {
            let slot = rng.gen_range(0..pairs.len());
            pairs[slot] = (j, random_nonzero_scalar(rng));
            pairs.sort_by_key(|p| p.0);
        }
    }
    Challenge::new(pairs)
}

/// The cheating server keeps the original tokens, swaps in the tampered
/// block and answers honestly over the modified file.
pub fn run_soundness_game(
    scheme: SchemeId,
    file: &BlockVector,
    tamper: &TamperSpec,
    c: usize,
    rng: &mut GameRng,
) -> Result<SoundnessOutcome> {
    tamper.validate(file)?;
    let keys = match scheme {
        SchemeId::Gs => UserKeys::Gs(gs_keygen_with(CkMode::Binding, true, rng)),
        other => keygen(other, rng),
    };
    let pk = keys.public();
    let (tag, state) = token_gen(&keys, file, rng)?;

    let mut forged = file.clone();
    forged.replace_block(tamper.index, tamper.replacement)?;
    let chal = challenge_covering(file.len(), c.min(file.len()), tamper.index, rng)?;
    let proof = respond(&forged, &state, &pk, &chal, rng)?;
    let accepted = verify(&pk, &tag, &chal, &proof).is_accept();

    let extracted_valid = match (&keys, &proof) {
        (UserKeys::Gs(k), Proof::Gs(resp)) => {
            let w = gs_extract(&resp.commitments, &k.public.ck, k.trapdoor.as_ref())?;
            Some(witness_satisfies(&w, &k.public, &gs_target(&k.public, file.name(), &chal)))
        }
        _ => None,
    };
    Ok(SoundnessOutcome { accepted, extracted_valid })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SoundnessReport {
    pub scheme: SchemeId,
    pub seed: u64,
    pub trials: u64,
    pub blocks: usize,
    pub challenge_size: usize,
    pub accepted: u64,
    /// GS only: forged responses whose extracted witness still satisfied the equation.
    pub extracted_valid: u64,
}

impl SoundnessReport {
    pub fn report_line(&self) -> String {
        format!(
            "soundness scheme={} trials={} n={} c={} accepted={} rejected={} seed={}",
            self.scheme,
            self.trials,
            self.blocks,
            self.challenge_size,
            self.accepted,
            self.trials - self.accepted,
            self.seed
        )
    }
}

/// Repeats the soundness game on random files with a random single-block tamper.
pub fn estimate_soundness(
    scheme: SchemeId,
    blocks: usize,
    c: usize,
    trials: u64,
    seed: u64,
) -> Result<SoundnessReport> {
    if blocks == 0 || c == 0 || c > blocks {
        return Err(Error::Argument(format!("need 1 <= c <= n, got n={blocks} c={c}")));
    }
    let outcomes: Vec<SoundnessOutcome> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let file = random_file(b"soundness", blocks, &mut rng);
            let tamper = TamperSpec::random(&file, &mut rng);
            run_soundness_game(scheme, &file, &tamper, c, &mut rng)
        })
        .collect::<Result<_>>()?;
    Ok(SoundnessReport {
        scheme,
        seed,
        trials,
        blocks,
        challenge_size: c,
        accepted: outcomes.iter().filter(|o| o.accepted).count() as u64,
        extracted_valid: outcomes.iter().filter(|o| o.extracted_valid == Some(true)).count() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::random_scalar;

    struct SameFiles;

    impl Adversary for SameFiles {
        fn name(&self) -> &'static str {
            "same"
        }
        fn choose_files(&mut self, name: &[u8], rng: &mut GameRng) -> (BlockVector, BlockVector) {
            let f = random_file(name, 4, rng);
            (f.clone(), f)
        }
        fn choose_challenge(&mut self, _: &PublicKey, _: &FileTag, n: usize, rng: &mut GameRng) -> Challenge {
            default_challenge(n, rng)
        }
        fn guess(&mut self, _: &PublicKey, _: &FileTag, _: &Challenge, _: &Proof, _: &mut GameRng) -> Guess {
            Guess { bit: false, applicable: true }
        }
    }

    /// Queries tokens in phase 1; optionally reuses a queried file as F₀.
    struct Querier {
        reuse: bool,
        queried: Vec<BlockVector>,
        tags_ok: bool,
    }

    impl Adversary for Querier {
        fn name(&self) -> &'static str {
            "querier"
        }
        fn phase1(&mut self, pk: &PublicKey, oracle: &mut TokenOracle<'_>, rng: &mut GameRng) -> Result<()> {
            for _ in 0..2 {
                let f = random_file(b"q", 4, rng);
                let (tag, state) = oracle(&f)?;
                self.tags_ok &= tag.verify(pk.spk()) && state.authenticators().len() == 4;
                self.queried.push(f);
            }
            Ok(())
        }
        fn choose_files(&mut self, name: &[u8], rng: &mut GameRng) -> (BlockVector, BlockVector) {
            let f0 = if self.reuse { self.queried[0].clone() } else { random_file(name, 4, rng) };
            (f0, random_file(name, 4, rng))
        }
        fn choose_challenge(&mut self, _: &PublicKey, _: &FileTag, n: usize, rng: &mut GameRng) -> Challenge {
            default_challenge(n, rng)
        }
        fn guess(&mut self, _: &PublicKey, _: &FileTag, _: &Challenge, _: &Proof, rng: &mut GameRng) -> Guess {
            Guess { bit: rng.gen(), applicable: true }
        }
    }

    #[test]
    fn identical_files_are_a_game_error() {
        for scheme in SchemeId::ALL {
            let err = run_zk_game(scheme, &mut SameFiles, &mut trial_rng(1, 0)).unwrap_err();
            assert!(matches!(err, Error::Game(_)));
        }
    }

    #[test]
    fn phase1_queries_are_answered_and_enforced() {
        for scheme in SchemeId::ALL {
            let mut adv = Querier { reuse: false, queried: vec![], tags_ok: true };
            run_zk_game(scheme, &mut adv, &mut trial_rng(2, 0)).unwrap();
            assert!(adv.tags_ok);
            let mut adv = Querier { reuse: true, queried: vec![], tags_ok: true };
            assert!(matches!(run_zk_game(scheme, &mut adv, &mut trial_rng(2, 0)), Err(Error::Game(_))));
        }
    }

    #[test]
    fn games_replay_from_seed() {
        for scheme in SchemeId::ALL {
            let a = run_zk_game(scheme, &mut RandomGuesser, &mut trial_rng(3, 5)).unwrap();
            let b = run_zk_game(scheme, &mut RandomGuesser, &mut trial_rng(3, 5)).unwrap();
            let c = run_zk_game(scheme, &mut RandomGuesser, &mut trial_rng(3, 6)).unwrap();
            assert_eq!(a.transcript_hash(), b.transcript_hash());
            assert_ne!(a.transcript_hash(), c.transcript_hash());
        }
    }

    #[test]
    fn estimates_replay_from_seed() {
        let make = || AdversaryKind::Fig4.build();
        let a = estimate_advantage(SchemeId::Gs, &make, 12, 9).unwrap();
        let b = estimate_advantage(SchemeId::Gs, &make, 12, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.report_line(), b.report_line());
        assert!(a.successes <= a.trials);
        assert!(estimate_advantage(SchemeId::Gs, &make, 0, 9).is_err());
    }

    #[test]
    fn fig2_distinguishes_mht_only() {
        let mut rng = trial_rng(4, 0);
        for _ in 0..10 {
            let r = run_zk_game(SchemeId::Mht, &mut MhtHashDistinguisher::default(), &mut rng).unwrap();
            assert!(r.guess.applicable && r.success());
        }
        for scheme in [SchemeId::Blinded, SchemeId::Gs] {
            let r = run_zk_game(scheme, &mut MhtHashDistinguisher::default(), &mut rng).unwrap();
            assert!(!r.guess.applicable);
        }
    }

    #[test]
    fn fig4_distinguishes_blinded_only() {
        let mut rng = trial_rng(5, 0);
        for _ in 0..10 {
            let r = run_zk_game(SchemeId::Blinded, &mut BlindedRecomputeDistinguisher::default(), &mut rng).unwrap();
            assert!(r.guess.applicable && r.success());
        }
        for scheme in [SchemeId::Mht, SchemeId::Gs] {
            let r = run_zk_game(scheme, &mut BlindedRecomputeDistinguisher::default(), &mut rng).unwrap();
            assert!(!r.guess.applicable);
        }
    }

    /// Fig. 4 with a single challenged index and coefficient one.
    struct DegenerateFig4(BlindedRecomputeDistinguisher);

    impl Adversary for DegenerateFig4 {
        fn name(&self) -> &'static str {
            "fig4-degenerate"
        }
        fn choose_files(&mut self, name: &[u8], rng: &mut GameRng) -> (BlockVector, BlockVector) {
            self.0.choose_files(name, rng)
        }
        fn choose_challenge(&mut self, _: &PublicKey, _: &FileTag, _: usize, _: &mut GameRng) -> Challenge {
            Challenge::new(vec![(1, Scalar::from(1u64))]).unwrap()
        }
        fn guess(&mut self, pk: &PublicKey, tag: &FileTag, chal: &Challenge, proof: &Proof, rng: &mut GameRng) -> Guess {
            self.0.guess(pk, tag, chal, proof, rng)
        }
    }

    #[test]
    fn fig4_degenerate_challenge_still_distinguishes() {
        let mut rng = trial_rng(6, 0);
        for _ in 0..4 {
            let r = run_zk_game(SchemeId::Blinded, &mut DegenerateFig4(Default::default()), &mut rng).unwrap();
            assert!(r.success());
        }
    }

    #[test]
    fn tamper_spec_validation() {
        let mut rng = trial_rng(7, 0);
        let file = random_file(b"t", 5, &mut rng);
        let same = TamperSpec { index: 2, replacement: file.block(2).unwrap() };
        assert!(same.validate(&file).is_err());
        let out = TamperSpec { index: 6, replacement: random_scalar(&mut rng) };
        assert!(out.validate(&file).is_err());
        let zero = TamperSpec { index: 0, replacement: random_scalar(&mut rng) };
        assert!(zero.validate(&file).is_err());
        assert!(TamperSpec::random(&file, &mut rng).validate(&file).is_ok());
        assert!(run_soundness_game(SchemeId::Gs, &file, &same, 3, &mut rng).is_err());
    }

    #[test]
    fn covering_challenges_include_the_index() {
        let mut rng = trial_rng(8, 0);
        for _ in 0..200 {
            let n = rng.gen_range(1..=64usize);
            let c = rng.gen_range(1..=n.min(10));
            let j = rng.gen_range(1..=n as u64);
            let chal = challenge_covering(n, c, j, &mut rng).unwrap();
            assert_eq!(chal.len(), c);
            assert!(chal.contains(j));
            assert!(chal.check_range(n).is_ok());
            assert!(chal.pairs().iter().all(|(i, nu)| *i != j || !nu.is_zero()));
        }
    }

    #[test]
    fn tampered_files_are_caught() {
        for scheme in SchemeId::ALL {
            let r = estimate_soundness(scheme, 6, 3, 8, 10).unwrap();
            assert_eq!(r.accepted, 0, "{}", r.report_line());
            assert_eq!(r.extracted_valid, 0);
        }
        assert!(estimate_soundness(SchemeId::Gs, 4, 5, 1, 0).is_err());
    }

    #[test]
    fn confidence_radius_values() {
        assert_eq!(confidence_radius(0, 10), 0.0);
        assert_eq!(confidence_radius(10, 10), 0.0);
        let r = confidence_radius(100, 200);
        assert!((r - 1.96 * (0.25f64 / 200.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn adversary_kinds_parse() {
        for k in AdversaryKind::ALL {
            assert_eq!(k.as_str().parse::<AdversaryKind>().unwrap(), k);
            assert_eq!(k.build().name(), k.as_str());
        }
        assert!("fig3".parse::<AdversaryKind>().is_err());
    }
}
