//! One interface over the three schemes, used by the games, the service and
//! the CLI.

use rand::{CryptoRng, RngCore};

use crate::blinded::{
    blind_keygen, blind_respond, blind_token_gen, blind_verify, decode_authenticators,
    encode_authenticators, BlindKeys, BlindProof, BlindPublicKey,
};
use crate::error::{Error, Result};
use crate::gs::{gs_keygen, gs_respond, gs_token_gen, gs_verify, GsKeys, GsPublicKey, GsResponse};
use crate::mht::{mht_keygen, mht_respond, mht_token_gen, mht_verify, MhtKeys, MhtProof, MhtPublicKey, MhtStored};
use crate::pairing::{G1, G2};
use crate::protocol::{BlockVector, Challenge, FileTag, RejectReason, SchemeId, Verdict};

#[derive(Clone, Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum UserKeys {
    Mht(MhtKeys),
    Blinded(BlindKeys),
    Gs(GsKeys),
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum PublicKey {
    Mht(MhtPublicKey),
    Blinded(BlindPublicKey),
    Gs(GsPublicKey),
}

/// Everything the owner hands the server besides the blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ServerState {
    Mht(MhtStored),
    Blinded(Vec<G1>),
    Gs(Vec<G1>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum Proof {
    Mht(MhtProof),
    Blinded(BlindProof),
    Gs(GsResponse),
}

pub fn keygen<R: RngCore + CryptoRng + ?Sized>(scheme: SchemeId, rng: &mut R) -> UserKeys {
    match scheme {
        SchemeId::Mht => UserKeys::Mht(mht_keygen(rng)),
        SchemeId::Blinded => UserKeys::Blinded(blind_keygen(rng)),
        SchemeId::Gs => UserKeys::Gs(gs_keygen(rng)),
    }
}

pub fn token_gen<R: RngCore + CryptoRng + ?Sized>(
    keys: &UserKeys,
    file: &BlockVector,
    rng: &mut R,
) -> Result<(FileTag, ServerState)> {
    Ok(match keys {
        UserKeys::Mht(k) => {
            let (tag, stored) = mht_token_gen(k, file, rng)?;
            (tag, ServerState::Mht(stored))
        }
        UserKeys::Blinded(k) => {
            let (tag, auths) = blind_token_gen(k, file);
            (tag, ServerState::Blinded(auths))
        }
        UserKeys::Gs(k) => {
            let (tag, auths) = gs_token_gen(k, file);
            (tag, ServerState::Gs(auths))
        }
    })
}

pub fn respond<R: RngCore + CryptoRng + ?Sized>(
    file: &BlockVector,
    state: &ServerState,
    pk: &PublicKey,
    chal: &Challenge,
    rng: &mut R,
) -> Result<Proof> {
    match (state, pk) {
        (ServerState::Mht(s), PublicKey::Mht(_)) => Ok(Proof::Mht(mht_respond(file, s, chal)?)),
        (ServerState::Blinded(a), PublicKey::Blinded(pk)) => {
            Ok(Proof::Blinded(blind_respond(file, a, pk, chal, rng)?))
        }
        (ServerState::Gs(a), PublicKey::Gs(pk)) => Ok(Proof::Gs(gs_respond(file, a, pk, chal, rng)?)),
        _ => Err(Error::Argument("server state and public key belong to different schemes".into())),
    }
}

pub fn verify(pk: &PublicKey, tag: &FileTag, chal: &Challenge, proof: &Proof) -> Verdict {
    match (pk, proof) {
        (PublicKey::Mht(pk), Proof::Mht(p)) => mht_verify(pk, tag, chal, p),
        (PublicKey::Blinded(pk), Proof::Blinded(p)) => blind_verify(pk, tag, chal, p),
        (PublicKey::Gs(pk), Proof::Gs(p)) => gs_verify(pk, tag, chal, p),
        _ => Verdict::Reject(RejectReason::Mismatch),
    }
}

impl UserKeys {
    pub fn scheme(&self) -> SchemeId {
        match self {
            UserKeys::Mht(_) => SchemeId::Mht,
            UserKeys::Blinded(_) => SchemeId::Blinded,
            UserKeys::Gs(_) => SchemeId::Gs,
        }
    }

    pub fn public(&self) -> PublicKey {
        match self {
            UserKeys::Mht(k) => PublicKey::Mht(k.public.clone()),
            UserKeys::Blinded(k) => PublicKey::Blinded(k.public.clone()),
            UserKeys::Gs(k) => PublicKey::Gs(k.public.clone()),
        }
    }

    /// Scheme byte followed by the scheme's own secret-key encoding.
    pub fn encode(&self) -> Vec<u8> {
        let body = match self {
            UserKeys::Mht(k) => k.encode(),
            UserKeys::Blinded(k) => k.encode(),
            UserKeys::Gs(k) => k.encode(),
        };
        tagged(self.scheme(), body)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let (scheme, body) = untag(bytes)?;
        Ok(match scheme {
            SchemeId::Mht => UserKeys::Mht(MhtKeys::decode(body)?),
            SchemeId::Blinded => UserKeys::Blinded(BlindKeys::decode(body)?),
            SchemeId::Gs => UserKeys::Gs(GsKeys::decode(body)?),
        })
    }
}

impl PublicKey {
    pub fn scheme(&self) -> SchemeId {
        match self {
            PublicKey::Mht(_) => SchemeId::Mht,
            PublicKey::Blinded(_) => SchemeId::Blinded,
            PublicKey::Gs(_) => SchemeId::Gs,
        }
    }

    pub fn spk(&self) -> &G2 {
        match self {
            PublicKey::Mht(k) => &k.spk,
            PublicKey::Blinded(k) => &k.spk,
            PublicKey::Gs(k) => &k.spk,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let body = match self {
            PublicKey::Mht(k) => k.encode(),
            PublicKey::Blinded(k) => k.encode(),
            PublicKey::Gs(k) => k.encode(),
        };
        tagged(self.scheme(), body)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let (scheme, body) = untag(bytes)?;
        Ok(match scheme {
            SchemeId::Mht => PublicKey::Mht(MhtPublicKey::decode(body)?),
            SchemeId::Blinded => PublicKey::Blinded(BlindPublicKey::decode(body)?),
            SchemeId::Gs => PublicKey::Gs(GsPublicKey::decode(body)?),
        })
    }
}

impl ServerState {
    pub fn scheme(&self) -> SchemeId {
        match self {
            ServerState::Mht(_) => SchemeId::Mht,
            ServerState::Blinded(_) => SchemeId::Blinded,
            ServerState::Gs(_) => SchemeId::Gs,
        }
    }

    pub fn authenticators(&self) -> &[G1] {
        match self {
            ServerState::Mht(s) => &s.authenticators,
            ServerState::Blinded(a) | ServerState::Gs(a) => a,
        }
    }

    pub fn authenticators_mut(&mut self) -> &mut Vec<G1> {
        match self {
            ServerState::Mht(s) => &mut s.authenticators,
            ServerState::Blinded(a) | ServerState::Gs(a) => a,
        }
    }

    /// Untagged; the scheme is known from context wherever this is stored.
    pub fn encode(&self) -> Vec<u8> {
        match self {
            ServerState::Mht(s) => s.encode(),
            ServerState::Blinded(a) | ServerState::Gs(a) => encode_authenticators(a),
        }
    }

    pub fn decode(scheme: SchemeId, bytes: &[u8]) -> Result<Self> {
        Ok(match scheme {
            SchemeId::Mht => ServerState::Mht(MhtStored::decode(bytes)?),
            SchemeId::Blinded => ServerState::Blinded(decode_authenticators(bytes)?),
            SchemeId::Gs => ServerState::Gs(decode_authenticators(bytes)?),
        })
    }
}

impl Proof {
    pub fn scheme(&self) -> SchemeId {
        match self {
            Proof::Mht(_) => SchemeId::Mht,
            Proof::Blinded(_) => SchemeId::Blinded,
            Proof::Gs(_) => SchemeId::Gs,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        match self {
            Proof::Mht(p) => p.encode(),
            Proof::Blinded(p) => p.encode(),
            Proof::Gs(p) => p.encode(),
        }
    }

    pub fn decode(scheme: SchemeId, bytes: &[u8]) -> Result<Self> {
        Ok(match scheme {
            SchemeId::Mht => Proof::Mht(MhtProof::decode(bytes)?),
            SchemeId::Blinded => Proof::Blinded(BlindProof::decode(bytes)?),
            SchemeId::Gs => Proof::Gs(GsResponse::decode(bytes)?),
        })
    }
}

fn tagged(scheme: SchemeId, body: Vec<u8>) -> Vec<u8> {
    let mut out = Vec::with_capacity(body.len() + 1);
    out.push(scheme.as_u8());
    out.extend(body);
    out
}

fn untag(bytes: &[u8]) -> Result<(SchemeId, &[u8])> {
    let (&first, rest) = bytes
        .split_first()
        .ok_or_else(|| Error::Decode("empty key encoding".into()))?;
    Ok((SchemeId::from_u8(first)?, rest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::random_scalar;
    use crate::protocol::sample_challenge;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn every_scheme_round_trips_through_the_facade() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for scheme in SchemeId::ALL {
            let keys = keygen(scheme, &mut rng);
            assert_eq!(keys.scheme(), scheme);
            assert_eq!(UserKeys::decode(&keys.encode()).unwrap(), keys);
            let pk = keys.public();
            assert_eq!(PublicKey::decode(&pk.encode()).unwrap(), pk);

            let file = BlockVector::new(b"facade".to_vec(), (0..9).map(|_| random_scalar(&mut rng)).collect())
                .unwrap();
            let (tag, state) = token_gen(&keys, &file, &mut rng).unwrap();
            assert_eq!(ServerState::decode(scheme, &state.encode()).unwrap(), state);
            let chal = sample_challenge(9, 4, &mut rng).unwrap();
            let proof = respond(&file, &state, &pk, &chal, &mut rng).unwrap();
            assert_eq!(Proof::decode(scheme, &proof.encode()).unwrap(), proof);
            assert_eq!(verify(&pk, &tag, &chal, &proof), Verdict::Accept);
        }
    }

    #[test]
    fn cross_scheme_inputs_are_refused() {
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let mht = keygen(SchemeId::Mht, &mut rng);
        let gs = keygen(SchemeId::Gs, &mut rng);
        let file = BlockVector::new(b"x".to_vec(), vec![random_scalar(&mut rng); 3]).unwrap();
        let (tag, state) = token_gen(&mht, &file, &mut rng).unwrap();
        let chal = sample_challenge(3, 2, &mut rng).unwrap();
        assert!(respond(&file, &state, &gs.public(), &chal, &mut rng).is_err());
        let proof = respond(&file, &state, &mht.public(), &chal, &mut rng).unwrap();
        assert_eq!(verify(&gs.public(), &tag, &chal, &proof), Verdict::Reject(RejectReason::Mismatch));
        assert!(UserKeys::decode(&[]).is_err());
        assert!(PublicKey::decode(&[9]).is_err());
    }
}
