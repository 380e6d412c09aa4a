//! Pairing-group arithmetic over BLS12-381.
//!
//! Every protocol value is a [`Scalar`], a [`G1`], [`G2`] or [`Gt`] element.
//! `Gt` is written additively by arkworks; the helpers here (and the scheme
//! modules) keep that convention, so "multiplying" two target-group elements
//! is `+` and exponentiation is `*`.
//!
//! Hash oracles use the IETF hash-to-curve construction
//! (`expand_message_xmd` with SHA-256, simplified SWU on an isogenous curve)
//! with one domain separation tag per oracle.

use ark_bls12_381::{g1, g2, Bls12_381, Fr};
use ark_ec::short_weierstrass::{Affine, Projective};
use ark_ec::hashing::curve_maps::wb::WBMap;
use ark_ec::hashing::map_to_curve_hasher::MapToCurveBasedHasher;
use ark_ec::hashing::HashToCurve;
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{CurveGroup, Group, VariableBaseMSM};
use ark_ff::field_hashers::{DefaultFieldHasher, HashToField};
use ark_ff::{BigInteger, PrimeField, UniformRand, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize, Compress, Validate};
use rand::{CryptoRng, RngCore};
use sha2::Sha256;

use crate::error::{Error, Result};

pub type Scalar = Fr;
// Spelled with the concrete curve configs so the two groups are distinct
// types to the trait solver.
pub type G1 = Projective<g1::Config>;
pub type G2 = Projective<g2::Config>;
type G1Affine = Affine<g1::Config>;
type G2Affine = Affine<g2::Config>;
pub type Gt = PairingOutput<Bls12_381>;

/// Block-hash oracle `H` (authenticators, MHT leaves, `H(W_i)`).
pub const DST_BLOCK: &[u8] = b"DIC/H";
/// Scalar oracle `h` used for the blinding challenge `γ = h(R)`.
pub const DST_BLIND: &[u8] = b"DIC/h";
/// Oracle for hashing a Merkle root into G1 before signing it.
pub const DST_MHT_ROOT: &[u8] = b"DIC/MHT";
/// Oracle used by the tag signature scheme.
pub const DST_SSIG: &[u8] = b"DIC/SSig";

pub const SCALAR_BYTES: usize = 32;
pub const G1_BYTES: usize = 48;
pub const G2_BYTES: usize = 96;
pub const GT_BYTES: usize = 576;

type G1Hasher = MapToCurveBasedHasher<G1, DefaultFieldHasher<Sha256, 128>, WBMap<g1::Config>>;

/// Public description of the bilinear group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairingContext {
    /// Big-endian bytes of the prime group order `p`.
    pub order: Vec<u8>,
    pub g1: G1,
    pub g: G2,
    pub curve_id: &'static str,
}

impl PairingContext {
    pub fn bls12_381() -> Self {
        Self {
            order: Fr::MODULUS.to_bytes_be(),
            g1: g1_generator(),
            g: g2_generator(),
            curve_id: "BLS12-381",
        }
    }

    /// Checks the non-degeneracy requirements on the generators.
    pub fn is_well_formed(&self) -> bool {
        !self.g1.is_zero() && !self.g.is_zero() && !pair(&self.g1, &self.g).is_zero()
    }
}

pub fn g1_generator() -> G1 {
    G1::generator()
}

pub fn g2_generator() -> G2 {
    G2::generator()
}

pub fn pair(a: &G1, b: &G2) -> Gt {
    Bls12_381::pairing(a.into_affine(), b.into_affine())
}

/// Product of pairings `Π e(a_i, b_i)` with a single final exponentiation.
pub fn multi_pair(a: &[G1], b: &[G2]) -> Result<Gt> {
    if a.len() != b.len() {
        return Err(Error::Argument(format!(
            "multi_pair length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let a = G1::normalize_batch(a);
    let b = G2::normalize_batch(b);
    Ok(Bls12_381::multi_pairing(a, b))
}

/// `Π e(a_i, b_i) = 1`; false on a length mismatch.
pub fn pairing_product_is_identity(a: &[G1], b: &[G2]) -> bool {
    multi_pair(a, b).map(|t| t.is_zero()).unwrap_or(false)
}

pub fn random_scalar<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Scalar {
    Scalar::rand(rng)
}

pub fn random_nonzero_scalar<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Scalar {
    loop {
        let s = Scalar::rand(rng);
        if !s.is_zero() {
            return s;
        }
    }
}

pub fn random_g1<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> G1 {
    g1_generator() * random_nonzero_scalar(rng)
}

pub fn hash_to_g1(domain_tag: &[u8], msg: &[u8]) -> Result<G1> {
    if domain_tag.is_empty() {
        return Err(Error::Argument("hash_to_g1: empty domain tag".into()));
    }
    let hasher = G1Hasher::new(domain_tag)
        .map_err(|e| Error::Argument(format!("hash_to_g1: {e}")))?;
    let point = hasher
        .hash(msg)
        .map_err(|e| Error::Argument(format!("hash_to_g1: {e}")))?;
    Ok(point.into())
}

pub fn hash_to_scalar(domain_tag: &[u8], msg: &[u8]) -> Result<Scalar> {
    if domain_tag.is_empty() {
        return Err(Error::Argument("hash_to_scalar: empty domain tag".into()));
    }
    let hasher = <DefaultFieldHasher<Sha256, 128> as HashToField<Scalar>>::new(domain_tag);
    Ok(hasher.hash_to_field(msg, 1)[0])
}

/// Multi-scalar multiplication `Π bases_i^{exps_i}`.
pub fn msm(bases: &[G1], exps: &[Scalar]) -> Result<G1> {
    if bases.is_empty() || bases.len() != exps.len() {
        return Err(Error::Argument(format!(
            "msm needs equal non-empty inputs, got {} bases and {} exponents",
            bases.len(),
            exps.len()
        )));
    }
    let affine = G1::normalize_batch(bases);
    G1::msm(&affine, exps).map_err(|n| Error::Argument(format!("msm length mismatch at {n}")))
}

/// Scalars travel as 32-byte big-endian integers.
pub fn encode_scalar(s: &Scalar) -> [u8; SCALAR_BYTES] {
    let bytes = s.into_bigint().to_bytes_be();
    let mut out = [0u8; SCALAR_BYTES];
    out.copy_from_slice(&bytes);
    out
}

/// Rejects non-canonical encodings (values `>= p`).
pub fn decode_scalar(bytes: &[u8]) -> Result<Scalar> {
    if bytes.len() != SCALAR_BYTES {
        return Err(Error::Decode(format!(
            "scalar needs {SCALAR_BYTES} bytes, got {}",
            bytes.len()
        )));
    }
    let mut le = bytes.to_vec();
    le.reverse();
    let s = Scalar::deserialize_uncompressed(&le[..])
        .map_err(|e| Error::Decode(format!("scalar: {e}")))?;
    Ok(s)
}

/// Group elements with a canonical fixed-length byte encoding.
pub trait GroupEncoding: Sized {
    const ENCODED_LEN: usize;
    fn encode(&self) -> Vec<u8>;
    fn decode(bytes: &[u8]) -> Result<Self>;
}

fn decode_checked<T: CanonicalDeserialize>(bytes: &[u8], expected: usize, what: &str) -> Result<T> {
    if bytes.len() != expected {
        return Err(Error::Decode(format!(
            "{what} needs {expected} bytes, got {}",
            bytes.len()
        )));
    }
    let mut reader = bytes;
    let value = T::deserialize_with_mode(&mut reader, Compress::Yes, Validate::Yes)
        .map_err(|e| Error::Decode(format!("{what}: {e}")))?;
    Ok(value)
}

impl GroupEncoding for G1 {
    const ENCODED_LEN: usize = G1_BYTES;

    fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(G1_BYTES);
        self.into_affine()
            .serialize_compressed(&mut out)
            .expect("writing to a Vec cannot fail");
        out
    }

    fn decode(bytes: &[u8]) -> Result<Self> {
        decode_checked::<G1Affine>(bytes, G1_BYTES, "G1 element").map(Into::into)
    }
}

impl GroupEncoding for G2 {
    const ENCODED_LEN: usize = G2_BYTES;

    fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(G2_BYTES);
        self.into_affine()
            .serialize_compressed(&mut out)
            .expect("writing to a Vec cannot fail");
        out
    }

    fn decode(bytes: &[u8]) -> Result<Self> {
        decode_checked::<G2Affine>(bytes, G2_BYTES, "G2 element").map(Into::into)
    }
}

impl GroupEncoding for Gt {
    const ENCODED_LEN: usize = GT_BYTES;

    fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(GT_BYTES);
        self.serialize_compressed(&mut out)
            .expect("writing to a Vec cannot fail");
        out
    }

    // Deserialization with validation raises to the group order, so
    // anything outside the order-p subgroup is refused.
    fn decode(bytes: &[u8]) -> Result<Self> {
        decode_checked::<Gt>(bytes, GT_BYTES, "GT element")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ark_ff::One;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng() -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(0xd1c)
    }

    #[test]
    fn context_is_well_formed() {
        let ctx = PairingContext::bls12_381();
        assert!(ctx.is_well_formed());
        assert_eq!(ctx.order.len(), 32);
        assert_eq!(ctx.curve_id, "BLS12-381");
    }

    #[test]
    fn pairing_with_identity_is_identity() {
        assert!(pair(&G1::zero(), &g2_generator()).is_zero());
        assert!(pair(&g1_generator(), &G2::zero()).is_zero());
    }

    #[test]
    fn pairing_square() {
        let g1 = g1_generator();
        let g = g2_generator();
        let two = Scalar::from(2u64);
        assert_eq!(pair(&(g1 * two), &g), pair(&g1, &g) * two);
    }

    #[test]
    fn pairing_exponent_swap() {
        let mut rng = rng();
        let g1 = g1_generator();
        let g = g2_generator();
        for _ in 0..100 {
            let a = random_scalar(&mut rng);
            let b = random_scalar(&mut rng);
            assert_eq!(pair(&(g1 * a), &(g * b)), pair(&(g1 * b), &(g * a)));
        }
    }

    #[test]
    fn multi_pair_matches_product() {
        let mut rng = rng();
        let a: Vec<G1> = (0..3).map(|_| random_g1(&mut rng)).collect();
        let b: Vec<G2> = (0..3).map(|_| g2_generator() * random_scalar(&mut rng)).collect();
        let naive = a.iter().zip(&b).fold(Gt::zero(), |acc, (x, y)| acc + pair(x, y));
        assert_eq!(multi_pair(&a, &b).unwrap(), naive);
        assert!(multi_pair(&a, &b[..2]).is_err());
    }

    #[test]
    fn hash_to_g1_is_deterministic_and_separated() {
        let a = hash_to_g1(b"tagA", b"m").unwrap();
        assert_eq!(a, hash_to_g1(b"tagA", b"m").unwrap());
        assert_ne!(a, hash_to_g1(b"tagB", b"m").unwrap());
        assert_ne!(a, hash_to_g1(b"tagA", b"n").unwrap());
        let affine = a.into_affine();
        assert!(affine.is_on_curve());
        assert!(affine.is_in_correct_subgroup_assuming_on_curve());
        assert!(hash_to_g1(b"", b"m").is_err());
    }

    #[test]
    fn hash_to_scalar_is_deterministic() {
        let a = hash_to_scalar(DST_BLIND, b"R").unwrap();
        assert_eq!(a, hash_to_scalar(DST_BLIND, b"R").unwrap());
        assert_ne!(a, hash_to_scalar(DST_BLOCK, b"R").unwrap());
        // the canonical encoding is below p by construction
        assert_eq!(decode_scalar(&encode_scalar(&a)).unwrap(), a);
        assert!(hash_to_scalar(b"", b"R").is_err());
    }

    #[test]
    fn msm_edge_cases() {
        let mut rng = rng();
        let b = random_g1(&mut rng);
        assert_eq!(msm(&[b], &[Scalar::one()]).unwrap(), b);
        let bases: Vec<G1> = (0..4).map(|_| random_g1(&mut rng)).collect();
        assert!(msm(&bases, &[Scalar::zero(); 4]).unwrap().is_zero());
        assert!(msm(&bases, &[Scalar::one(); 3]).is_err());
        assert!(msm(&[], &[]).is_err());
    }

    #[test]
    fn msm_matches_naive_product() {
        let mut rng = rng();
        for len in 1..=16 {
            let bases: Vec<G1> = (0..len).map(|_| random_g1(&mut rng)).collect();
            let exps: Vec<Scalar> = (0..len).map(|_| random_scalar(&mut rng)).collect();
            let naive = bases.iter().zip(&exps).fold(G1::zero(), |acc, (b, e)| acc + *b * e);
            assert_eq!(msm(&bases, &exps).unwrap(), naive, "len {len}");
        }
    }

    #[test]
    fn encodings_round_trip() {
        let g1 = g1_generator();
        let g = g2_generator();
        let gt = pair(&g1, &g);
        assert_eq!(G1::decode(&g1.encode()).unwrap(), g1);
        assert_eq!(G2::decode(&g.encode()).unwrap(), g);
        assert_eq!(Gt::decode(&gt.encode()).unwrap(), gt);
        assert_eq!(G1::decode(&G1::zero().encode()).unwrap(), G1::zero());
        assert_eq!(gt.encode().len(), GT_BYTES);
    }

    #[test]
    fn encodings_reject_wrong_length() {
        let enc = g1_generator().encode();
        assert!(G1::decode(&enc[..47]).is_err());
        assert!(G2::decode(&enc).is_err());
        assert!(decode_scalar(&[0u8; 31]).is_err());
    }

    #[test]
    fn scalar_decode_rejects_non_canonical() {
        assert!(decode_scalar(&[0xff; 32]).is_err());
        let mut p = [0u8; 32];
        p.copy_from_slice(&Fr::MODULUS.to_bytes_be());
        assert!(decode_scalar(&p).is_err());
        let one = encode_scalar(&Scalar::one());
        assert_eq!(one[31], 1);
        assert!(one[..31].iter().all(|&b| b == 0));
    }

    #[test]
    fn bit_flips_never_decode_to_original() {
        let g1 = g1_generator();
        let enc = g1.encode();
        for bit in 0..enc.len() * 8 {
            let mut bad = enc.clone();
            bad[bit / 8] ^= 1 << (bit % 8);
            if let Ok(p) = G1::decode(&bad) {
                assert_ne!(p, g1, "bit {bit}");
            }
        }
        let g = g2_generator();
        let enc = g.encode();
        for bit in (0..enc.len() * 8).step_by(7) {
            let mut bad = enc.clone();
            bad[bit / 8] ^= 1 << (bit % 8);
            if let Ok(p) = G2::decode(&bad) {
                assert_ne!(p, g, "bit {bit}");
            }
        }
    }

    #[test]
    fn gt_decode_rejects_non_subgroup() {
        // 1 + 1 = 2 in the base field is not a p-th root of unity.
        let mut enc = Gt::zero().encode();
        assert_eq!(Gt::decode(&enc).unwrap(), Gt::zero());
        enc[0] ^= 0x03;
        assert!(Gt::decode(&enc).is_err());
    }

    #[test]
    fn encodings_are_injective() {
        let mut rng = rng();
        let mut seen = std::collections::HashSet::new();
        for _ in 0..1000 {
            let p = random_g1(&mut rng);
            assert!(seen.insert(p.encode()));
        }
        let mut seen = std::collections::HashSet::new();
        for _ in 0..1000 {
            let q = g2_generator() * random_nonzero_scalar(&mut rng);
            assert!(seen.insert(q.encode()));
        }
    }

    #[test]
    fn gt_encodings_are_injective() {
        let mut rng = rng();
        let base = pair(&g1_generator(), &g2_generator());
        let mut seen = std::collections::HashSet::new();
        for _ in 0..1000 {
            let t = base * random_nonzero_scalar(&mut rng);
            assert!(seen.insert(t.encode()));
        }
    }
}
