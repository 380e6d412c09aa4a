//! Pieces shared by every scheme: file chunking, file tags and their
//! signature, challenges, and the verifier's verdict.

use std::fmt;
use std::str::FromStr;

use ark_ff::Zero;
use rand::{CryptoRng, RngCore};

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::pairing::{
    decode_scalar, encode_scalar, g2_generator, hash_to_g1, multi_pair, random_nonzero_scalar,
    random_scalar, Scalar, DST_SSIG, G1, G1_BYTES, G2, SCALAR_BYTES,
};

/// Payload bytes carried by one block. 31 bytes keep every block below the
/// 255-bit group order.
pub const BLOCK_BYTES: usize = 31;

/// Challenge size used when the caller does not pick one.
pub fn default_challenge_size(n: usize) -> usize {
    n.min(10)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeId {
    Mht = 1,
    Blinded = 2,
    Gs = 3,
}

impl SchemeId {
    pub const ALL: [SchemeId; 3] = [SchemeId::Mht, SchemeId::Blinded, SchemeId::Gs];

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            1 => Ok(SchemeId::Mht),
            2 => Ok(SchemeId::Blinded),
            3 => Ok(SchemeId::Gs),
            other => Err(Error::Decode(format!("unknown scheme id {other}"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeId::Mht => "mht",
            SchemeId::Blinded => "blinded",
            SchemeId::Gs => "gs",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mht" => Ok(SchemeId::Mht),
            "blinded" => Ok(SchemeId::Blinded),
            "gs" => Ok(SchemeId::Gs),
            other => Err(Error::Argument(format!("unknown scheme '{other}'"))),
        }
    }
}

/// A file as a named sequence of blocks `m_1..m_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockVector {
    name: Vec<u8>,
    blocks: Vec<Scalar>,
}

impl BlockVector {
    pub fn new(name: impl Into<Vec<u8>>, blocks: Vec<Scalar>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Argument("a file needs at least one block".into()));
        }
        Ok(Self { name: name.into(), blocks })
    }

    pub fn name(&self) -> &[u8] {
        &self.name
    }

    pub fn blocks(&self) -> &[Scalar] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Block `m_i` for a 1-based index.
    pub fn block(&self, index: u64) -> Result<Scalar> {
        index
            .checked_sub(1)
            .and_then(|i| self.blocks.get(i as usize))
            .copied()
            .ok_or_else(|| {
                Error::Protocol(format!("block index {index} outside [1, {}]", self.len()))
            })
    }

    pub fn with_name(mut self, name: impl Into<Vec<u8>>) -> Self {
        self.name = name.into();
        self
    }

    pub fn replace_block(&mut self, index: u64, value: Scalar) -> Result<()> {
        self.block(index)?;
        self.blocks[(index - 1) as usize] = value;
        Ok(())
    }

    pub fn encode_blocks(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len() * SCALAR_BYTES);
        for b in &self.blocks {
            out.extend_from_slice(&encode_scalar(b));
        }
        out
    }

    pub fn decode_blocks(name: impl Into<Vec<u8>>, bytes: &[u8]) -> Result<Self> {
        if bytes.is_empty() || !bytes.len().is_multiple_of(SCALAR_BYTES) {
            return Err(Error::Decode(format!(
                "block data length {} is not a positive multiple of {SCALAR_BYTES}",
                bytes.len()
            )));
        }
        let blocks = bytes
            .chunks(SCALAR_BYTES)
            .map(decode_scalar)
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, blocks)
    }
}

fn block_from_chunk(chunk: &[u8]) -> Scalar {
    debug_assert!(chunk.len() == BLOCK_BYTES);
    let mut be = [0u8; SCALAR_BYTES];
    be[1..].copy_from_slice(chunk);
    decode_scalar(&be).expect("a 248-bit value is always below the group order")
}

/// Splits `data` into 31-byte blocks. The last data block is zero-padded and
/// one extra block holding the byte length (big-endian) is appended.
pub fn chunk_file(data: &[u8], name: impl Into<Vec<u8>>) -> Result<BlockVector> {
    if data.is_empty() {
        return Err(Error::Argument("cannot chunk an empty file".into()));
    }
    let mut blocks = Vec::with_capacity(data.len() / BLOCK_BYTES + 2);
    for chunk in data.chunks(BLOCK_BYTES) {
        let mut padded = [0u8; BLOCK_BYTES];
        padded[..chunk.len()].copy_from_slice(chunk);
        blocks.push(block_from_chunk(&padded));
    }
    let mut len_block = [0u8; BLOCK_BYTES];
    len_block[BLOCK_BYTES - 8..].copy_from_slice(&(data.len() as u64).to_be_bytes());
    blocks.push(block_from_chunk(&len_block));
    BlockVector::new(name, blocks)
}

/// Inverse of [`chunk_file`].
pub fn reassemble_file(bv: &BlockVector) -> Result<Vec<u8>> {
    let n = bv.len();
    if n < 2 {
        return Err(Error::Format(format!("need at least 2 blocks, got {n}")));
    }
    let mut chunks = Vec::with_capacity(n);
    for (i, b) in bv.blocks().iter().enumerate() {
        let be = encode_scalar(b);
        if be[0] != 0 {
            return Err(Error::Format(format!("block {} exceeds 31 bytes", i + 1)));
        }
        let mut chunk = [0u8; BLOCK_BYTES];
        chunk.copy_from_slice(&be[1..]);
        chunks.push(chunk);
    }
    let len_chunk = chunks.pop().expect("n >= 2");
    if len_chunk[..BLOCK_BYTES - 8].iter().any(|&b| b != 0) {
        return Err(Error::Format("length block out of range".into()));
    }
    let len = u64::from_be_bytes(len_chunk[BLOCK_BYTES - 8..].try_into().unwrap()) as usize;
    if len == 0 || len.div_ceil(BLOCK_BYTES) != chunks.len() {
        return Err(Error::Format(format!(
            "length {len} inconsistent with {} data blocks",
            chunks.len()
        )));
    }
    let mut out: Vec<u8> = chunks.concat();
    if out[len..].iter().any(|&b| b != 0) {
        return Err(Error::Format("non-zero padding".into()));
    }
    out.truncate(len);
    Ok(out)
}

/// Key pair of the tag signature scheme (BLS over the protocol groups).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigKeyPair {
    pub ssk: Scalar,
    pub spk: G2,
}

impl SigKeyPair {
    pub fn generate<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        let ssk = random_nonzero_scalar(rng);
        Self { ssk, spk: g2_generator() * ssk }
    }
}

pub fn ssig_sign(ssk: &Scalar, payload: &[u8]) -> G1 {
    hash_to_g1(DST_SSIG, payload).expect("static non-empty tag") * ssk
}

pub fn ssig_verify(spk: &G2, payload: &[u8], sig: &G1) -> bool {
    if spk.is_zero() || sig.is_zero() {
        return false;
    }
    let h = hash_to_g1(DST_SSIG, payload).expect("static non-empty tag");
    // e(sig, g) * e(H(payload), spk)^{-1} == 1
    multi_pair(&[*sig, -h], &[g2_generator(), *spk])
        .map(|t| t.is_zero())
        .unwrap_or(false)
}

/// Signed public metadata `t` binding a stored file to its owner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FileTag {
    pub scheme: SchemeId,
    pub name: Vec<u8>,
    pub n: Option<u64>,
    pub u: Option<G1>,
    pub sig: G1,
}

impl FileTag {
    pub fn sign(
        scheme: SchemeId,
        name: &[u8],
        n: Option<u64>,
        u: Option<G1>,
        ssk: &Scalar,
    ) -> Self {
        let payload = tag_payload(scheme, name, n, u.as_ref());
        Self { scheme, name: name.to_vec(), n, u, sig: ssig_sign(ssk, &payload) }
    }

    pub fn payload(&self) -> Vec<u8> {
        tag_payload(self.scheme, &self.name, self.n, self.u.as_ref())
    }

    pub fn verify(&self, spk: &G2) -> bool {
        ssig_verify(spk, &self.payload(), &self.sig)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        let flags = u8::from(self.n.is_some()) | (u8::from(self.u.is_some()) << 1);
        w.u8(self.scheme.as_u8()).bytes(&self.name).u8(flags);
        if let Some(n) = self.n {
            w.u64(n);
        }
        if let Some(u) = &self.u {
            w.element(u);
        }
        w.element(&self.sig);
        w.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let scheme = SchemeId::from_u8(r.u8()?)?;
        let name = r.bytes()?.to_vec();
        let flags = r.u8()?;
        if flags & !0b11 != 0 {
            return Err(Error::Decode(format!("unknown tag flags {flags:#x}")));
        }
        let n = if flags & 1 != 0 { Some(r.u64()?) } else { None };
        let u = if flags & 2 != 0 { Some(r.element::<G1>()?) } else { None };
        let sig = r.element::<G1>()?;
        r.finish()?;
        Ok(Self { scheme, name, n, u, sig })
    }
}

/// `scheme_id ‖ len(name) ‖ name ‖ [n] ‖ [u]`, the byte string the tag signs.
fn tag_payload(scheme: SchemeId, name: &[u8], n: Option<u64>, u: Option<&G1>) -> Vec<u8> {
    let mut w = Writer::new();
    w.u8(scheme.as_u8()).bytes(name);
    if let Some(n) = n {
        w.u64(n);
    }
    if let Some(u) = u {
        w.element(u);
    }
    w.finish()
}

/// Audit challenge `{(i, ν_i)}_{i∈I}` with strictly increasing 1-based indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Challenge {
    pairs: Vec<(u64, Scalar)>,
}

impl Challenge {
    pub fn new(pairs: Vec<(u64, Scalar)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Argument("challenge must name at least one block".into()));
        }
        if pairs[0].0 == 0 {
            return Err(Error::Argument("challenge indices are 1-based".into()));
        }
        if pairs.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Argument("challenge indices must strictly increase".into()));
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(u64, Scalar)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn indices(&self) -> impl Iterator<Item = u64> + '_ {
        self.pairs.iter().map(|(i, _)| *i)
    }

    pub fn coefficients(&self) -> Vec<Scalar> {
        self.pairs.iter().map(|(_, v)| *v).collect()
    }

    pub fn contains(&self, index: u64) -> bool {
        self.pairs.binary_search_by_key(&index, |(i, _)| *i).is_ok()
    }

    /// Errors if any index exceeds the file's block count.
    pub fn check_range(&self, n: usize) -> Result<()> {
        match self.pairs.last() {
            Some((i, _)) if *i as usize > n || *i > n as u64 => Err(Error::Protocol(format!(
                "challenge index {i} outside [1, {n}]"
            ))),
            _ => Ok(()),
        }
    }

    /// `Σ ν_i m_i` over the challenged blocks.
    pub fn combine_blocks(&self, file: &BlockVector) -> Result<Scalar> {
        self.check_range(file.len())?;
        let mut acc = Scalar::zero();
        for (i, nu) in &self.pairs {
            acc += *nu * file.block(*i)?;
        }
        Ok(acc)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u32(self.pairs.len() as u32);
        for (i, nu) in &self.pairs {
            w.u64(*i).scalar(nu);
        }
        w.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let count = r.count(8 + SCALAR_BYTES)?;
        let mut pairs = Vec::with_capacity(count);
        for _ in 0..count {
            let i = r.u64()?;
            pairs.push((i, r.scalar()?));
        }
        r.finish()?;
        Self::new(pairs).map_err(|e| Error::Decode(e.to_string()))
    }
}

/// Picks a uniform `c`-subset of `[1, n]` with uniform coefficients.
pub fn sample_challenge<R: RngCore + CryptoRng + ?Sized>(
    n: usize,
    c: usize,
    rng: &mut R,
) -> Result<Challenge> {
    if c == 0 || c > n {
        return Err(Error::Argument(format!(
            "challenge size {c} must lie in [1, {n}]"
        )));
    }
    let mut indices = rand::seq::index::sample(rng, n, c).into_vec();
    indices.sort_unstable();
    let pairs = indices
        .into_iter()
        .map(|i| (i as u64 + 1, random_scalar(rng)))
        .collect();
    Challenge::new(pairs)
}

/// Why a verifier refused a proof.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RejectReason {
    /// Tag signature does not verify under the owner's key.
    TagInvalid,
    /// Tag, key, or proof belong to a different scheme or file.
    Mismatch,
    /// Challenge does not fit the file.
    ChallengeOutOfRange,
    /// Proof shape does not match the challenge.
    Malformed,
    /// Opened Merkle paths disagree on the root or with the leaf positions.
    MerklePath,
    /// Root signature check failed.
    RootSignature,
    /// Aggregate authenticator equation failed.
    AggregateEquation,
    /// Commitment/proof matrix equation failed.
    CommitmentEquation,
}

impl RejectReason {
    pub const ALL: [RejectReason; 8] = [
        RejectReason::TagInvalid,
        RejectReason::Mismatch,
        RejectReason::ChallengeOutOfRange,
        RejectReason::Malformed,
        RejectReason::MerklePath,
        RejectReason::RootSignature,
        RejectReason::AggregateEquation,
        RejectReason::CommitmentEquation,
    ];

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.as_str() == s)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::TagInvalid => "tag_invalid",
            RejectReason::Mismatch => "mismatch",
            RejectReason::ChallengeOutOfRange => "challenge_out_of_range",
            RejectReason::Malformed => "malformed",
            RejectReason::MerklePath => "merkle_path",
            RejectReason::RootSignature => "root_signature",
            RejectReason::AggregateEquation => "aggregate_equation",
            RejectReason::CommitmentEquation => "commitment_equation",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }

    pub(crate) fn check(ok: bool, reason: RejectReason) -> std::result::Result<(), Verdict> {
        if ok {
            Ok(())
        } else {
            Err(Verdict::Reject(reason))
        }
    }
}

impl From<std::result::Result<(), Verdict>> for Verdict {
    fn from(r: std::result::Result<(), Verdict>) -> Self {
        r.err().unwrap_or(Verdict::Accept)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Accept => f.write_str("true"),
            Verdict::Reject(r) => write!(f, "false ({})", r.as_str()),
        }
    }
}

/// Sizes used by reports.
pub const TAG_SIG_BYTES: usize = G1_BYTES;
