//! Merkle-hash-tree audit scheme.
//!
//! Authenticators are `σ_i = (H(m_i)·u^{m_i})^x` with a fresh `u` per file
//! carried in the tag. The tree's leaves are the block hashes `H(m_i)` in
//! index order and the owner signs the root as `H_root(R)^x`. A proof opens
//! every challenged leaf together with its sibling path, so the auditor can
//! rebuild `R`, check the root signature, and then check the aggregate
//! equation `e(σ, g) = e(Π H(m_i)^{ν_i} · u^μ, v)`.
//!
//! Leaf hashes are not bound to their index inside the authenticator; the
//! tree fixes positions only through the signed root.

use ark_ff::Zero;
use rand::{CryptoRng, RngCore};
use sha2::{Digest as _, Sha256};

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::pairing::{
    encode_scalar, g2_generator, hash_to_g1, msm, multi_pair, random_g1, random_nonzero_scalar,
    GroupEncoding, Scalar, DST_BLOCK, DST_MHT_ROOT, G1, G1_BYTES, G2,
};
use crate::protocol::{BlockVector, Challenge, FileTag, RejectReason, SchemeId, SigKeyPair, Verdict};

pub type Digest = [u8; 32];

const LEAF_PREFIX: u8 = 0x00;
const NODE_PREFIX: u8 = 0x01;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MhtPublicKey {
    pub v: G2,
    pub spk: G2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MhtKeys {
    pub x: Scalar,
    pub sig: SigKeyPair,
    pub public: MhtPublicKey,
}

pub fn mht_keygen<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> MhtKeys {
    let x = random_nonzero_scalar(rng);
    let sig = SigKeyPair::generate(rng);
    let public = MhtPublicKey { v: g2_generator() * x, spk: sig.spk };
    MhtKeys { x, sig, public }
}

/// `H(m_i)`: the block hash used both in authenticators and as tree leaves.
pub fn block_hash(m: &Scalar) -> G1 {
    hash_to_g1(DST_BLOCK, &encode_scalar(m)).expect("static non-empty tag")
}

fn root_point(root: &Digest) -> G1 {
    hash_to_g1(DST_MHT_ROOT, root).expect("static non-empty tag")
}

pub fn leaf_digest(index: u64, leaf: &G1) -> Digest {
    let mut h = Sha256::new();
    h.update([LEAF_PREFIX]);
    h.update(index.to_be_bytes());
    h.update(leaf.encode());
    h.finalize().into()
}

pub fn node_digest(left: &Digest, right: &Digest) -> Digest {
    let mut h = Sha256::new();
    h.update([NODE_PREFIX]);
    h.update(left);
    h.update(right);
    h.finalize().into()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// The sibling sits to the left of the running node.
    Left = 0,
    Right = 1,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathStep {
    pub sibling: Digest,
    pub side: Side,
}

/// Sibling path `Ω_i` from a leaf to the root. Levels where the node was
/// promoted without a sibling contribute no step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MerklePath {
    pub steps: Vec<PathStep>,
}

/// Sibling sides a path for leaf `index` (1-based) must have in a tree of
/// `n` leaves.
pub fn expected_sides(index: u64, n: usize) -> Vec<Side> {
    let mut sides = Vec::new();
    let mut pos = (index - 1) as usize;
    let mut width = n;
    while width > 1 {
        if pos % 2 == 1 {
            sides.push(Side::Left);
        } else if pos + 1 < width {
            sides.push(Side::Right);
        }
        pos /= 2;
        width = width.div_ceil(2);
    }
    sides
}

pub fn reconstruct_root(index: u64, leaf: &G1, path: &MerklePath) -> Digest {
    path.steps.iter().fold(leaf_digest(index, leaf), |acc, step| match step.side {
        Side::Left => node_digest(&step.sibling, &acc),
        Side::Right => node_digest(&acc, &step.sibling),
    })
}

/// Binary hash tree with odd nodes promoted unchanged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MerkleTree {
    levels: Vec<Vec<Digest>>,
}

impl MerkleTree {
    pub fn from_leaves(leaves: &[G1]) -> Result<Self> {
        if leaves.is_empty() {
            return Err(Error::Argument("a Merkle tree needs at least one leaf".into()));
        }
        let first = leaves
            .iter()
            .enumerate()
            .map(|(i, l)| leaf_digest(i as u64 + 1, l))
            .collect();
        Ok(Self::from_leaf_digests(first))
    }

    fn from_leaf_digests(first: Vec<Digest>) -> Self {
        let mut levels = vec![first];
        while levels.last().unwrap().len() > 1 {
            let next = Self::parent_level(levels.last().unwrap());
            levels.push(next);
        }
        Self { levels }
    }

    fn parent_level(level: &[Digest]) -> Vec<Digest> {
        level
            .chunks(2)
            .map(|pair| match pair {
                [l, r] => node_digest(l, r),
                [single] => *single,
                _ => unreachable!(),
            })
            .collect()
    }

    pub fn root(&self) -> Digest {
        self.levels.last().unwrap()[0]
    }

    pub fn leaf_count(&self) -> usize {
        self.levels[0].len()
    }

    pub fn path(&self, index: u64) -> Result<MerklePath> {
        let n = self.leaf_count();
        if index == 0 || index as usize > n {
            return Err(Error::Protocol(format!("leaf index {index} outside [1, {n}]")));
        }
        let mut pos = (index - 1) as usize;
        let mut steps = Vec::new();
        for level in &self.levels[..self.levels.len() - 1] {
            if pos % 2 == 1 {
                steps.push(PathStep { sibling: level[pos - 1], side: Side::Left });
            } else if pos + 1 < level.len() {
                steps.push(PathStep { sibling: level[pos + 1], side: Side::Right });
            }
            pos /= 2;
        }
        Ok(MerklePath { steps })
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u32(self.levels.len() as u32);
        for level in &self.levels {
            w.u32(level.len() as u32);
            for d in level {
                w.raw(d);
            }
        }
        w.finish()
    }

    /// Decodes and checks that every stored parent hashes its children.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let depth = r.count(4)?;
        let mut levels = Vec::with_capacity(depth);
        for _ in 0..depth {
            let width = r.count(32)?;
            let level = (0..width)
                .map(|_| r.raw(32).map(|d| d.try_into().unwrap()))
                .collect::<Result<Vec<Digest>>>()?;
            levels.push(level);
        }
        r.finish()?;
        if levels.is_empty() || levels[0].is_empty() {
            return Err(Error::Decode("empty Merkle tree".into()));
        }
        let rebuilt = Self::from_leaf_digests(levels[0].clone());
        if rebuilt.levels != levels {
            return Err(Error::Decode("inconsistent Merkle tree".into()));
        }
        Ok(rebuilt)
    }
}

/// What the owner hands the server besides the file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MhtStored {
    pub authenticators: Vec<G1>,
    pub tree: MerkleTree,
    pub root_sig: G1,
}

pub fn mht_token_gen<R: RngCore + CryptoRng + ?Sized>(
    keys: &MhtKeys,
    file: &BlockVector,
    rng: &mut R,
) -> Result<(FileTag, MhtStored)> {
    let u = random_g1(rng);
    let n = file.len() as u64;
    let tag = FileTag::sign(SchemeId::Mht, file.name(), Some(n), Some(u), &keys.sig.ssk);
    let leaves: Vec<G1> = file.blocks().iter().map(block_hash).collect();
    let authenticators = leaves
        .iter()
        .zip(file.blocks())
        .map(|(h, m)| (*h + u * m) * keys.x)
        .collect();
    let tree = MerkleTree::from_leaves(&leaves)?;
    let root_sig = root_point(&tree.root()) * keys.x;
    Ok((tag, MhtStored { authenticators, tree, root_sig }))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenedLeaf {
    pub index: u64,
    pub leaf: G1,
    pub path: MerklePath,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MhtProof {
    pub mu: Scalar,
    pub sigma: G1,
    pub opened: Vec<OpenedLeaf>,
    pub root_sig: G1,
}

impl MhtProof {
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.scalar(&self.mu).element(&self.sigma).u32(self.opened.len() as u32);
        for o in &self.opened {
            w.u64(o.index).element(&o.leaf).u32(o.path.steps.len() as u32);
            for s in &o.path.steps {
                w.u8(s.side as u8).raw(&s.sibling);
            }
        }
        w.element(&self.root_sig);
        w.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let mu = r.scalar()?;
        let sigma = r.element()?;
        let count = r.count(8 + G1_BYTES + 4)?;
        let mut opened = Vec::with_capacity(count);
        for _ in 0..count {
            let index = r.u64()?;
            let leaf = r.element()?;
            let len = r.count(33)?;
            let mut steps = Vec::with_capacity(len);
            for _ in 0..len {
                let side = match r.u8()? {
                    0 => Side::Left,
                    1 => Side::Right,
                    other => return Err(Error::Decode(format!("bad path side {other}"))),
                };
                steps.push(PathStep { sibling: r.raw(32)?.try_into().unwrap(), side });
            }
            opened.push(OpenedLeaf { index, leaf, path: MerklePath { steps } });
        }
        let root_sig = r.element()?;
        r.finish()?;
        Ok(Self { mu, sigma, opened, root_sig })
    }
}

pub fn mht_respond(file: &BlockVector, stored: &MhtStored, chal: &Challenge) -> Result<MhtProof> {
    chal.check_range(file.len())?;
    if stored.authenticators.len() != file.len() {
        return Err(Error::Protocol("authenticator count does not match file".into()));
    }
    let mu = chal.combine_blocks(file)?;
    let sigmas: Vec<G1> = chal
        .indices()
        .map(|i| stored.authenticators[(i - 1) as usize])
        .collect();
    let sigma = msm(&sigmas, &chal.coefficients())?;
    let opened = chal
        .indices()
        .map(|i| {
            Ok(OpenedLeaf {
                index: i,
                leaf: block_hash(&file.block(i)?),
                path: stored.tree.path(i)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MhtProof { mu, sigma, opened, root_sig: stored.root_sig })
}

pub fn mht_verify(pk: &MhtPublicKey, tag: &FileTag, chal: &Challenge, proof: &MhtProof) -> Verdict {
    verify_inner(pk, tag, chal, proof).into()
}

fn verify_inner(
    pk: &MhtPublicKey,
    tag: &FileTag,
    chal: &Challenge,
    proof: &MhtProof,
) -> std::result::Result<(), Verdict> {
    Verdict::check(tag.scheme == SchemeId::Mht, RejectReason::Mismatch)?;
    Verdict::check(tag.verify(&pk.spk), RejectReason::TagInvalid)?;
    let (n, u) = match (tag.n, tag.u) {
        (Some(n), Some(u)) => (n as usize, u),
        _ => return Err(Verdict::Reject(RejectReason::Malformed)),
    };
    Verdict::check(chal.check_range(n).is_ok(), RejectReason::ChallengeOutOfRange)?;
    Verdict::check(proof.opened.len() == chal.len(), RejectReason::Malformed)?;

    let mut root: Option<Digest> = None;
    for ((i, _), opened) in chal.pairs().iter().zip(&proof.opened) {
        Verdict::check(opened.index == *i, RejectReason::Malformed)?;
        let sides: Vec<Side> = opened.path.steps.iter().map(|s| s.side).collect();
        Verdict::check(sides == expected_sides(*i, n), RejectReason::MerklePath)?;
        let r = reconstruct_root(*i, &opened.leaf, &opened.path);
        Verdict::check(root.is_none_or(|prev| prev == r), RejectReason::MerklePath)?;
        root = Some(r);
    }
    let root = root.ok_or(Verdict::Reject(RejectReason::Malformed))?;

    let g = g2_generator();
    let root_ok = multi_pair(&[proof.root_sig, -root_point(&root)], &[g, pk.v])
        .map(|t| t.is_zero())
        .unwrap_or(false);
    Verdict::check(root_ok, RejectReason::RootSignature)?;

    let leaves: Vec<G1> = proof.opened.iter().map(|o| o.leaf).collect();
    let aggregate = msm(&leaves, &chal.coefficients())
        .map_err(|_| Verdict::Reject(RejectReason::Malformed))?
        + u * proof.mu;
    let eq_ok = multi_pair(&[proof.sigma, -aggregate], &[g, pk.v])
        .map(|t| t.is_zero())
        .unwrap_or(false);
    Verdict::check(eq_ok, RejectReason::AggregateEquation)
}

impl MhtPublicKey {
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.element(&self.v).element(&self.spk);
        w.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let pk = Self { v: r.element()?, spk: r.element()? };
        r.finish()?;
        Ok(pk)
    }
}

impl MhtKeys {
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.scalar(&self.x).scalar(&self.sig.ssk);
        w.finish()
    }

    /// Public parts are recomputed from the secrets.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let x = r.scalar()?;
        let ssk = r.scalar()?;
        r.finish()?;
        let g = g2_generator();
        let sig = SigKeyPair { ssk, spk: g * ssk };
        Ok(Self { x, public: MhtPublicKey { v: g * x, spk: sig.spk }, sig })
    }
}

impl MhtStored {
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u32(self.authenticators.len() as u32);
        for s in &self.authenticators {
            w.element(s);
        }
        w.bytes(&self.tree.encode()).element(&self.root_sig);
        w.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let count = r.count(G1_BYTES)?;
        let authenticators = (0..count).map(|_| r.element()).collect::<Result<Vec<G1>>>()?;
        let tree = MerkleTree::decode(r.bytes()?)?;
        let root_sig = r.element()?;
        r.finish()?;
        if tree.leaf_count() != authenticators.len() {
            return Err(Error::Decode("tree and authenticator counts differ".into()));
        }
        Ok(Self { authenticators, tree, root_sig })
    }
}
