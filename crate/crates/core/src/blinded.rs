//! Blinded-response audit scheme.
//!
//! Authenticators are `σ_i = (H(W_i)·u^{m_i})^x` with `W_i = name ‖ i`. The
//! server hides the linear combination `μ' = Σ ν_i m_i` behind a random mask:
//! it sends `R = e(u, v)^r`, `μ = r + γ μ'` with `γ = h(R)`, and the aggregate
//! `σ = Π σ_i^{ν_i}` in the clear. The auditor checks
//! `R · e(σ^γ, g) = e((Π H(W_i)^{ν_i})^γ · u^μ, v)`.

use ark_ff::Zero;
use rand::{CryptoRng, RngCore};

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::pairing::{
    g2_generator, hash_to_g1, hash_to_scalar, msm, multi_pair, pair, random_g1,
    random_nonzero_scalar, random_scalar, GroupEncoding, Scalar, DST_BLIND, DST_BLOCK, G1,
    G1_BYTES, G2, Gt,
};
use crate::protocol::{BlockVector, Challenge, FileTag, RejectReason, SchemeId, SigKeyPair, Verdict};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlindPublicKey {
    pub spk: G2,
    pub v: G2,
    pub u: G1,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlindKeys {
    pub x: Scalar,
    pub sig: SigKeyPair,
    pub public: BlindPublicKey,
}

pub fn blind_keygen<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> BlindKeys {
    let x = random_nonzero_scalar(rng);
    let sig = SigKeyPair::generate(rng);
    let u = random_g1(rng);
    let public = BlindPublicKey { spk: sig.spk, v: g2_generator() * x, u };
    BlindKeys { x, sig, public }
}

/// `W_i = name ‖ i` with `i` as 8 big-endian bytes.
pub fn block_label(name: &[u8], index: u64) -> Vec<u8> {
    let mut w = Vec::with_capacity(name.len() + 8);
    w.extend_from_slice(name);
    w.extend_from_slice(&index.to_be_bytes());
    w
}

pub fn label_hash(name: &[u8], index: u64) -> G1 {
    hash_to_g1(DST_BLOCK, &block_label(name, index)).expect("static non-empty tag")
}

/// `Π H(W_i)^{ν_i}` over the challenge. Depends only on the name and the
/// challenge, never on block contents.
pub fn challenge_label_product(name: &[u8], chal: &Challenge) -> G1 {
    let bases: Vec<G1> = chal.indices().map(|i| label_hash(name, i)).collect();
    msm(&bases, &chal.coefficients()).expect("challenge is non-empty")
}

/// `σ = Π σ_i^{ν_i}`.
pub fn aggregate_authenticator(authenticators: &[G1], chal: &Challenge) -> Result<G1> {
    chal.check_range(authenticators.len())?;
    let picked: Vec<G1> = chal
        .indices()
        .map(|i| authenticators[(i - 1) as usize])
        .collect();
    msm(&picked, &chal.coefficients())
}

/// Authenticators over labelled blocks, shared with the commitment scheme.
pub(crate) fn labelled_authenticators(x: &Scalar, u: &G1, file: &BlockVector) -> Vec<G1> {
    file.blocks()
        .iter()
        .enumerate()
        .map(|(i, m)| (label_hash(file.name(), i as u64 + 1) + *u * m) * x)
        .collect()
}

pub fn blind_token_gen(keys: &BlindKeys, file: &BlockVector) -> (FileTag, Vec<G1>) {
    let tag = FileTag::sign(SchemeId::Blinded, file.name(), None, None, &keys.sig.ssk);
    let auths = labelled_authenticators(&keys.x, &keys.public.u, file);
    (tag, auths)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlindProof {
    pub mu: Scalar,
    pub sigma: G1,
    /// The mask commitment `R = e(u, v)^r`.
    pub blind: Gt,
}

impl BlindProof {
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.scalar(&self.mu).element(&self.sigma).element(&self.blind);
        w.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let p = Self { mu: r.scalar()?, sigma: r.element()?, blind: r.element()? };
        r.finish()?;
        Ok(p)
    }
}

pub fn blind_challenge_scalar(blind: &Gt) -> Scalar {
    hash_to_scalar(DST_BLIND, &blind.encode()).expect("static non-empty tag")
}

pub fn blind_respond<R: RngCore + CryptoRng + ?Sized>(
    file: &BlockVector,
    authenticators: &[G1],
    pk: &BlindPublicKey,
    chal: &Challenge,
    rng: &mut R,
) -> Result<BlindProof> {
    blind_respond_with_mask(file, authenticators, pk, chal, random_scalar(rng))
}

/// Response with a caller-chosen mask `r`.
pub fn blind_respond_with_mask(
    file: &BlockVector,
    authenticators: &[G1],
    pk: &BlindPublicKey,
    chal: &Challenge,
    r: Scalar,
) -> Result<BlindProof> {
    if authenticators.len() != file.len() {
        return Err(Error::Protocol("authenticator count does not match file".into()));
    }
    let mu_prime = chal.combine_blocks(file)?;
    let sigma = aggregate_authenticator(authenticators, chal)?;
    let blind = pair(&pk.u, &pk.v) * r;
    let gamma = blind_challenge_scalar(&blind);
    Ok(BlindProof { mu: r + gamma * mu_prime, sigma, blind })
}

pub fn blind_verify(
    pk: &BlindPublicKey,
    tag: &FileTag,
    chal: &Challenge,
    proof: &BlindProof,
) -> Verdict {
    verify_inner(pk, tag, chal, proof).into()
}

fn verify_inner(
    pk: &BlindPublicKey,
    tag: &FileTag,
    chal: &Challenge,
    proof: &BlindProof,
) -> std::result::Result<(), Verdict> {
    Verdict::check(tag.scheme == SchemeId::Blinded, RejectReason::Mismatch)?;
    Verdict::check(tag.verify(&pk.spk), RejectReason::TagInvalid)?;
    if let Some(n) = tag.n {
        Verdict::check(chal.check_range(n as usize).is_ok(), RejectReason::ChallengeOutOfRange)?;
    }
    let gamma = blind_challenge_scalar(&proof.blind);
    let labels = challenge_label_product(&tag.name, chal);
    // R · e(σ^γ, g) · e((Π H(W_i)^{ν_i})^γ · u^μ, v)^{-1} == 1
    let rhs = labels * gamma + pk.u * proof.mu;
    let ok = multi_pair(&[proof.sigma * gamma, -rhs], &[g2_generator(), pk.v])
        .map(|t| (t + proof.blind).is_zero())
        .unwrap_or(false);
    Verdict::check(ok, RejectReason::AggregateEquation)
}

impl BlindPublicKey {
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.element(&self.spk).element(&self.v).element(&self.u);
        w.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let pk = Self { spk: r.element()?, v: r.element()?, u: r.element()? };
        r.finish()?;
        Ok(pk)
    }
}

impl BlindKeys {
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.scalar(&self.x).scalar(&self.sig.ssk).element(&self.public.u);
        w.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let x = r.scalar()?;
        let ssk = r.scalar()?;
        let u: G1 = r.element()?;
        r.finish()?;
        let g = g2_generator();
        let sig = SigKeyPair { ssk, spk: g * ssk };
        Ok(Self { x, public: BlindPublicKey { spk: sig.spk, v: g * x, u }, sig })
    }
}

pub fn encode_authenticators(auths: &[G1]) -> Vec<u8> {
    let mut w = Writer::new();
    w.u32(auths.len() as u32);
    for a in auths {
        w.element(a);
    }
    w.finish()
}

pub fn decode_authenticators(bytes: &[u8]) -> Result<Vec<G1>> {
    let mut r = Reader::new(bytes);
    let count = r.count(G1_BYTES)?;
    let auths = (0..count).map(|_| r.element()).collect::<Result<Vec<G1>>>()?;
    r.finish()?;
    Ok(auths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::sample_challenge;
    use ark_ff::One;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn rng() -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(0xb11d)
    }

    fn random_file(n: usize, rng: &mut ChaCha20Rng) -> BlockVector {
        BlockVector::new(b"name".to_vec(), (0..n).map(|_| random_scalar(rng)).collect()).unwrap()
    }

    #[test]
    fn keygen_relations() {
        let keys = blind_keygen(&mut rng());
        assert_eq!(keys.public.v, g2_generator() * keys.x);
        assert_eq!(keys.public.spk, g2_generator() * keys.sig.ssk);
        let other = blind_keygen(&mut ChaCha20Rng::seed_from_u64(2));
        assert_ne!(keys.public.u, other.public.u);
        assert_eq!(BlindKeys::decode(&keys.encode()).unwrap(), keys);
        assert_eq!(BlindPublicKey::decode(&keys.public.encode()).unwrap(), keys.public);
    }

    #[test]
    fn label_layout() {
        assert_eq!(block_label(b"ab", 3), vec![b'a', b'b', 0, 0, 0, 0, 0, 0, 0, 3]);
    }

    #[test]
    fn authenticators_satisfy_pairing_identity() {
        let mut rng = rng();
        let keys = blind_keygen(&mut rng);
        let mut file = random_file(6, &mut rng);
        file.replace_block(3, Scalar::zero()).unwrap();
        let (tag, auths) = blind_token_gen(&keys, &file);
        assert!(tag.verify(&keys.public.spk));
        assert_eq!(auths[2], label_hash(b"name", 3) * keys.x);
        let g = g2_generator();
        for (i, (s, m)) in auths.iter().zip(file.blocks()).enumerate() {
            let base = label_hash(file.name(), i as u64 + 1) + keys.public.u * m;
            assert_eq!(pair(s, &g), pair(&base, &keys.public.v));
        }
        assert_eq!(decode_authenticators(&encode_authenticators(&auths)).unwrap(), auths);
    }

    #[test]
    fn zero_mask_degenerates() {
        let mut rng = rng();
        let keys = blind_keygen(&mut rng);
        let file = random_file(4, &mut rng);
        let (tag, auths) = blind_token_gen(&keys, &file);
        let chal = sample_challenge(4, 3, &mut rng).unwrap();
        let proof = blind_respond_with_mask(&file, &auths, &keys.public, &chal, Scalar::zero()).unwrap();
        assert!(proof.blind.is_zero());
        let gamma = blind_challenge_scalar(&proof.blind);
        assert_eq!(proof.mu, gamma * chal.combine_blocks(&file).unwrap());
        assert!(blind_verify(&keys.public, &tag, &chal, &proof).is_accept());
    }

    #[test]
    fn singleton_challenge_exposes_single_authenticator() {
        let mut rng = rng();
        let keys = blind_keygen(&mut rng);
        let file = random_file(4, &mut rng);
        let (_, auths) = blind_token_gen(&keys, &file);
        let chal = Challenge::new(vec![(2, Scalar::one())]).unwrap();
        let proof = blind_respond(&file, &auths, &keys.public, &chal, &mut rng).unwrap();
        assert_eq!(proof.sigma, auths[1]);
        let chal = Challenge::new(vec![(5, Scalar::one())]).unwrap();
        assert!(blind_respond(&file, &auths, &keys.public, &chal, &mut rng).is_err());
    }

    #[test]
    fn blinding_identity_expands() {
        // R · e(σ^γ, g) = e(u, v)^r · e(σ, g)^γ
        let mut rng = rng();
        let keys = blind_keygen(&mut rng);
        let file = random_file(5, &mut rng);
        let (_, auths) = blind_token_gen(&keys, &file);
        for _ in 0..10 {
            let chal = sample_challenge(5, 3, &mut rng).unwrap();
            let r = random_scalar(&mut rng);
            let p = blind_respond_with_mask(&file, &auths, &keys.public, &chal, r).unwrap();
            let gamma = blind_challenge_scalar(&p.blind);
            let g = g2_generator();
            let lhs = p.blind + pair(&(p.sigma * gamma), &g);
            let rhs = pair(&keys.public.u, &keys.public.v) * r + pair(&p.sigma, &g) * gamma;
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn honest_runs_verify() {
        let mut rng = rng();
        let keys = blind_keygen(&mut rng);
        for _ in 0..20 {
            let n = rng.gen_range(1..=64);
            let file = random_file(n, &mut rng);
            let (tag, auths) = blind_token_gen(&keys, &file);
            let chal = sample_challenge(n, rng.gen_range(1..=n.min(10)), &mut rng).unwrap();
            let proof = blind_respond(&file, &auths, &keys.public, &chal, &mut rng).unwrap();
            assert!(blind_verify(&keys.public, &tag, &chal, &proof).is_accept());
            assert_eq!(BlindProof::decode(&proof.encode()).unwrap(), proof);
        }
    }

    #[test]
    fn mutations_are_rejected() {
        let mut rng = rng();
        let keys = blind_keygen(&mut rng);
        let file = random_file(8, &mut rng);
        let (tag, auths) = blind_token_gen(&keys, &file);
        let chal = sample_challenge(8, 5, &mut rng).unwrap();
        let proof = blind_respond(&file, &auths, &keys.public, &chal, &mut rng).unwrap();

        let mut bad = proof.clone();
        bad.mu += Scalar::one();
        assert!(!blind_verify(&keys.public, &tag, &chal, &bad).is_accept());

        let mut bad = proof.clone();
        bad.blind = pair(&random_g1(&mut rng), &g2_generator());
        assert!(!blind_verify(&keys.public, &tag, &chal, &bad).is_accept());

        let mut bad = proof.clone();
        bad.sigma += crate::pairing::g1_generator();
        assert!(!blind_verify(&keys.public, &tag, &chal, &bad).is_accept());

        let other = blind_keygen(&mut rng);
        assert_eq!(
            blind_verify(&other.public, &tag, &chal, &proof),
            Verdict::Reject(RejectReason::TagInvalid)
        );
    }

    #[test]
    fn single_block_tamper_is_rejected_exhaustively() {
        let mut rng = rng();
        let keys = blind_keygen(&mut rng);
        let file = random_file(8, &mut rng);
        let (tag, auths) = blind_token_gen(&keys, &file);
        let chal = sample_challenge(8, 8, &mut rng).unwrap();
        for j in 1..=8u64 {
            let mut tampered = file.clone();
            tampered.replace_block(j, file.block(j).unwrap() + Scalar::one()).unwrap();
            let proof = blind_respond(&tampered, &auths, &keys.public, &chal, &mut rng).unwrap();
            assert!(!blind_verify(&keys.public, &tag, &chal, &proof).is_accept(), "block {j}");
        }
    }
}
