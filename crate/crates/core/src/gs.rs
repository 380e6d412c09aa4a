//! Witness-indistinguishable audit scheme built on Groth–Sahai commitments.
//!
//! The server proves that the aggregate authenticator equation
//!
//! ```text
//! e(σ, g) · e(u^{μ'}, v^{-1}) = e(Π H(W_i)^{ν_i}, v) = t_T
//! ```
//!
//! holds without revealing the witness `(σ, U = u^{μ'})`. Both witness
//! elements are committed under the key `ū = (u₁, u₂)` with
//! `u₁ = (u, u^α)` and `u₂ = (u^τ, u^{τα})` (binding) or
//! `u₂ = (u^τ, u^{τα+1})` (hiding):
//!
//! ```text
//! c₁ = (u₁[0]^{r11} u₂[0]^{r12}, u₁[1]^{r11} u₂[1]^{r12} σ)
//! c₂ = (u₁[0]^{r21} u₂[0]^{r22}, u₁[1]^{r21} u₂[1]^{r22} U)
//! π₁ = (1, g^{r11} v^{-r21}),  π₂ = (1, g^{r12} v^{-r22})
//! ```
//!
//! and the auditor accepts iff `c̄ • ((1, g), (1, v^{-1})) = ι_T(t_T) · (ū • π̄)`
//! over 2×2 matrices in GT. Since `t_T` reads only the file name and the
//! challenge, the transcript carries nothing that depends on the blocks
//! except through the commitments.
//!
//! As everywhere in this crate GT is written additively, so matrix
//! "multiplication" below is entrywise `+`.

use std::ops::Add;

use ark_ff::{Field, Zero};
use rand::{CryptoRng, RngCore};

use crate::blinded::{aggregate_authenticator, challenge_label_product, labelled_authenticators};
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::pairing::{
    g2_generator, multi_pair, pair, random_g1, random_nonzero_scalar, random_scalar, Scalar, G1,
    G2, Gt,
};
use crate::protocol::{BlockVector, Challenge, FileTag, RejectReason, SchemeId, SigKeyPair, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CkMode {
    /// `u₂` lies on the Diffie–Hellman line of `u₁`; commitments are
    /// extractable with `α`.
    Binding,
    /// `u₂` is off the line by a known offset; commitments carry no
    /// information about the witness.
    Hiding,
}

impl CkMode {
    /// Codes are two bits apart so a single flipped bit cannot turn one
    /// valid mode into the other.
    fn as_u8(self) -> u8 {
        match self {
            CkMode::Binding => b'B',
            CkMode::Hiding => b'H',
        }
    }

    fn from_u8(v: u8) -> Result<Self> {
        match v {
            b'B' => Ok(CkMode::Binding),
            b'H' => Ok(CkMode::Hiding),
            other => Err(Error::Decode(format!("unknown commitment key mode {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommitmentKey {
    pub u1: [G1; 2],
    pub u2: [G1; 2],
    pub mode: CkMode,
}

/// Secret exponents behind a commitment key: `u₂[1] = u^{τα + offset}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CkTrapdoor {
    pub alpha: Scalar,
    pub tau: Scalar,
    pub offset: Scalar,
}

/// Builds a commitment key over `u`. The trapdoor is returned separately;
/// callers that do not need it simply drop it.
pub fn ck_gen<R: RngCore + CryptoRng + ?Sized>(
    u: &G1,
    mode: CkMode,
    rng: &mut R,
) -> Result<(CommitmentKey, CkTrapdoor)> {
    if u.is_zero() {
        return Err(Error::Argument("commitment key base must not be the identity".into()));
    }
    let alpha = random_nonzero_scalar(rng);
    let tau = random_nonzero_scalar(rng);
    let offset = match mode {
        CkMode::Binding => Scalar::zero(),
        CkMode::Hiding => Scalar::from(1u64),
    };
    let ck = CommitmentKey {
        u1: [*u, *u * alpha],
        u2: [*u * tau, *u * (tau * alpha + offset)],
        mode,
    };
    Ok((ck, CkTrapdoor { alpha, tau, offset }))
}

impl CommitmentKey {
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u8(self.mode.as_u8());
        for e in self.u1.iter().chain(&self.u2) {
            w.element(e);
        }
        w.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let mode = CkMode::from_u8(r.u8()?)?;
        let u1 = [r.element()?, r.element()?];
        let u2 = [r.element()?, r.element()?];
        r.finish()?;
        Ok(Self { u1, u2, mode })
    }
}

/// The hidden pair `(σ, U = u^{μ'})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GsWitness {
    pub sigma: G1,
    pub u_mu: G1,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GsCommitments {
    pub c1: [G1; 2],
    pub c2: [G1; 2],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommitRandomness {
    pub r11: Scalar,
    pub r12: Scalar,
    pub r21: Scalar,
    pub r22: Scalar,
}

impl CommitRandomness {
    pub fn random<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        Self {
            r11: random_scalar(rng),
            r12: random_scalar(rng),
            r21: random_scalar(rng),
            r22: random_scalar(rng),
        }
    }

    pub fn zero() -> Self {
        Self {
            r11: Scalar::zero(),
            r12: Scalar::zero(),
            r21: Scalar::zero(),
            r22: Scalar::zero(),
        }
    }
}

/// Commits one G1 element with randomness `(ra, rb)`. Only public key
/// components are used, so no trapdoor is needed.
fn commit_element(value: &G1, ck: &CommitmentKey, ra: &Scalar, rb: &Scalar) -> [G1; 2] {
    [
        ck.u1[0] * ra + ck.u2[0] * rb,
        ck.u1[1] * ra + ck.u2[1] * rb + value,
    ]
}

pub fn gs_commit_with(
    witness: &GsWitness,
    ck: &CommitmentKey,
    rand: &CommitRandomness,
) -> GsCommitments {
    GsCommitments {
        c1: commit_element(&witness.sigma, ck, &rand.r11, &rand.r12),
        c2: commit_element(&witness.u_mu, ck, &rand.r21, &rand.r22),
    }
}

pub fn gs_commit<R: RngCore + CryptoRng + ?Sized>(
    witness: &GsWitness,
    ck: &CommitmentKey,
    rng: &mut R,
) -> (GsCommitments, CommitRandomness) {
    let rand = CommitRandomness::random(rng);
    (gs_commit_with(witness, ck, &rand), rand)
}

/// `π̄ = ((1, g^{r11} v^{-r21}), (1, g^{r12} v^{-r22}))`. Only the second
/// coordinates are stored; the first ones are always the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GsProof {
    pub pi1: G2,
    pub pi2: G2,
}

impl GsProof {
    pub fn pi1_pair(&self) -> [G2; 2] {
        [G2::zero(), self.pi1]
    }

    pub fn pi2_pair(&self) -> [G2; 2] {
        [G2::zero(), self.pi2]
    }
}

pub fn gs_prove(rand: &CommitRandomness, g: &G2, v: &G2) -> GsProof {
    GsProof {
        pi1: *g * rand.r11 - *v * rand.r21,
        pi2: *g * rand.r12 - *v * rand.r22,
    }
}

/// A 2×2 matrix over GT, indexed `[row][col]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GtMatrix(pub [[Gt; 2]; 2]);

impl GtMatrix {
    pub fn identity() -> Self {
        GtMatrix([[Gt::zero(); 2]; 2])
    }

    pub fn entry(&self, row: usize, col: usize) -> Gt {
        self.0[row][col]
    }
}

impl Add for GtMatrix {
    type Output = GtMatrix;

    /// Entrywise group operation.
    fn add(self, rhs: GtMatrix) -> GtMatrix {
        let mut out = self.0;
        for (row, rrow) in out.iter_mut().zip(rhs.0) {
            for (a, b) in row.iter_mut().zip(rrow) {
                *a += b;
            }
        }
        GtMatrix(out)
    }
}

/// `F((x₁, x₂), (y₁, y₂)) = [[e(x₁,y₁), e(x₁,y₂)], [e(x₂,y₁), e(x₂,y₂)]]`.
pub fn pairing_matrix(x: &[G1; 2], y: &[G2; 2]) -> GtMatrix {
    GtMatrix([
        [pair(&x[0], &y[0]), pair(&x[0], &y[1])],
        [pair(&x[1], &y[0]), pair(&x[1], &y[1])],
    ])
}

/// `x̄ • ȳ = F(x₁, y₁) · F(x₂, y₂)`, each entry evaluated as one
/// two-term pairing product.
pub fn bullet(x: &[[G1; 2]; 2], y: &[[G2; 2]; 2]) -> GtMatrix {
    let mut out = [[Gt::zero(); 2]; 2];
    for (j, row) in out.iter_mut().enumerate() {
        for (k, entry) in row.iter_mut().enumerate() {
            *entry = multi_pair(&[x[0][j], x[1][j]], &[y[0][k], y[1][k]])
                .expect("two bases and two points");
        }
    }
    GtMatrix(out)
}

/// `ι_T(t) = [[1, 1], [1, t]]`.
pub fn iota_t(t: &Gt) -> GtMatrix {
    GtMatrix([[Gt::zero(), Gt::zero()], [Gt::zero(), *t]])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GsPublicKey {
    pub spk: G2,
    pub v: G2,
    pub u: G1,
    pub ck: CommitmentKey,
}

impl GsPublicKey {
    /// The verifier's fixed G2 side `((1, g), (1, v^{-1}))`.
    pub fn verifier_g2_side(&self) -> [[G2; 2]; 2] {
        [[G2::zero(), g2_generator()], [G2::zero(), -self.v]]
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.element(&self.spk).element(&self.v).element(&self.u).raw(&self.ck.encode());
        w.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let spk = r.element()?;
        let v = r.element()?;
        let u = r.element()?;
        let ck = CommitmentKey::decode(r.raw(r.remaining())?)?;
        r.finish()?;
        Ok(Self { spk, v, u, ck })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GsKeys {
    pub x: Scalar,
    pub sig: SigKeyPair,
    pub public: GsPublicKey,
    /// Commitment-key trapdoor; `None` unless explicitly kept.
    pub trapdoor: Option<CkTrapdoor>,
}

/// Key generation with a binding commitment key and no retained trapdoor.
pub fn gs_keygen<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> GsKeys {
    gs_keygen_with(CkMode::Binding, false, rng)
}

pub fn gs_keygen_with<R: RngCore + CryptoRng + ?Sized>(
    mode: CkMode,
    keep_trapdoor: bool,
    rng: &mut R,
) -> GsKeys {
    let x = random_nonzero_scalar(rng);
    let sig = SigKeyPair::generate(rng);
    let u = random_g1(rng);
    let (ck, trapdoor) = ck_gen(&u, mode, rng).expect("random u is not the identity");
    GsKeys {
        x,
        public: GsPublicKey { spk: sig.spk, v: g2_generator() * x, u, ck },
        sig,
        trapdoor: keep_trapdoor.then_some(trapdoor),
    }
}

impl GsKeys {
    /// Secrets plus the commitment key; the trapdoor is never persisted.
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.scalar(&self.x).scalar(&self.sig.ssk).element(&self.public.u).raw(&self.public.ck.encode());
        w.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let x = r.scalar()?;
        let ssk = r.scalar()?;
        let u = r.element()?;
        let ck = CommitmentKey::decode(r.raw(r.remaining())?)?;
        r.finish()?;
        let g = g2_generator();
        let sig = SigKeyPair { ssk, spk: g * ssk };
        Ok(Self {
            x,
            public: GsPublicKey { spk: sig.spk, v: g * x, u, ck },
            sig,
            trapdoor: None,
        })
    }
}

/// Same authenticators as the blinded scheme; the tag is `name ‖ SSig(name)`.
pub fn gs_token_gen(keys: &GsKeys, file: &BlockVector) -> (FileTag, Vec<G1>) {
    let tag = FileTag::sign(SchemeId::Gs, file.name(), None, None, &keys.sig.ssk);
    let auths = labelled_authenticators(&keys.x, &keys.public.u, file);
    (tag, auths)
}

/// `t_T = e(Π H(W_i)^{ν_i}, v)`.
pub fn gs_target(pk: &GsPublicKey, name: &[u8], chal: &Challenge) -> Gt {
    pair(&challenge_label_product(name, chal), &pk.v)
}

/// Computes the witness `(σ, u^{μ'})` for a challenge.
pub fn gs_witness(
    file: &BlockVector,
    authenticators: &[G1],
    pk: &GsPublicKey,
    chal: &Challenge,
) -> Result<GsWitness> {
    if authenticators.len() != file.len() {
        return Err(Error::Protocol("authenticator count does not match file".into()));
    }
    let mu_prime = chal.combine_blocks(file)?;
    let sigma = aggregate_authenticator(authenticators, chal)?;
    Ok(GsWitness { sigma, u_mu: pk.u * mu_prime })
}

/// Checks `e(σ, g) · e(U, v^{-1}) = t_T`.
pub fn witness_satisfies(witness: &GsWitness, pk: &GsPublicKey, target: &Gt) -> bool {
    multi_pair(&[witness.sigma, witness.u_mu], &[g2_generator(), -pk.v])
        .map(|t| t == *target)
        .unwrap_or(false)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GsResponse {
    pub commitments: GsCommitments,
    pub proof: GsProof,
}

impl GsResponse {
    /// `c11 ‖ c12 ‖ c21 ‖ c22 ‖ π1[2] ‖ π2[2]`.
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        let c = &self.commitments;
        w.element(&c.c1[0]).element(&c.c1[1]).element(&c.c2[0]).element(&c.c2[1]);
        w.element(&self.proof.pi1).element(&self.proof.pi2);
        w.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let c1 = [r.element()?, r.element()?];
        let c2 = [r.element()?, r.element()?];
        let proof = GsProof { pi1: r.element()?, pi2: r.element()? };
        r.finish()?;
        Ok(Self { commitments: GsCommitments { c1, c2 }, proof })
    }
}

pub fn gs_respond<R: RngCore + CryptoRng + ?Sized>(
    file: &BlockVector,
    authenticators: &[G1],
    pk: &GsPublicKey,
    chal: &Challenge,
    rng: &mut R,
) -> Result<GsResponse> {
    gs_respond_with(file, authenticators, pk, chal, &CommitRandomness::random(rng))
}

/// Response with caller-chosen commitment randomness.
pub fn gs_respond_with(
    file: &BlockVector,
    authenticators: &[G1],
    pk: &GsPublicKey,
    chal: &Challenge,
    rand: &CommitRandomness,
) -> Result<GsResponse> {
    let witness = gs_witness(file, authenticators, pk, chal)?;
    Ok(GsResponse {
        commitments: gs_commit_with(&witness, &pk.ck, rand),
        proof: gs_prove(rand, &g2_generator(), &pk.v),
    })
}

/// Both sides of the verification equation:
/// `(c̄ • ((1, g), (1, v^{-1})), ι_T(t_T) · (ū • π̄))`.
pub fn verification_matrices(
    pk: &GsPublicKey,
    name: &[u8],
    chal: &Challenge,
    resp: &GsResponse,
) -> (GtMatrix, GtMatrix) {
    let c = &resp.commitments;
    let left = bullet(&[c.c1, c.c2], &pk.verifier_g2_side());
    let right = iota_t(&gs_target(pk, name, chal))
        + bullet(&[pk.ck.u1, pk.ck.u2], &[resp.proof.pi1_pair(), resp.proof.pi2_pair()]);
    (left, right)
}

pub fn gs_verify(pk: &GsPublicKey, tag: &FileTag, chal: &Challenge, resp: &GsResponse) -> Verdict {
    verify_inner(pk, tag, chal, resp).into()
}

fn verify_inner(
    pk: &GsPublicKey,
    tag: &FileTag,
    chal: &Challenge,
    resp: &GsResponse,
) -> std::result::Result<(), Verdict> {
    Verdict::check(tag.scheme == SchemeId::Gs, RejectReason::Mismatch)?;
    Verdict::check(tag.verify(&pk.spk), RejectReason::TagInvalid)?;
    if let Some(n) = tag.n {
        Verdict::check(chal.check_range(n as usize).is_ok(), RejectReason::ChallengeOutOfRange)?;
    }
    let (left, right) = verification_matrices(pk, &tag.name, chal, resp);
    Verdict::check(left == right, RejectReason::CommitmentEquation)
}

/// Opens binding-mode commitments with `α`:
/// `(c₁₂ / c₁₁^α, c₂₂ / c₂₁^α)`.
pub fn gs_extract(
    commitments: &GsCommitments,
    ck: &CommitmentKey,
    trapdoor: Option<&CkTrapdoor>,
) -> Result<GsWitness> {
    let td = trapdoor.ok_or_else(|| Error::Capability("extraction needs the trapdoor".into()))?;
    if ck.mode != CkMode::Binding || !td.offset.is_zero() {
        return Err(Error::Capability("hiding-mode commitments cannot be opened".into()));
    }
    let open = |c: &[G1; 2]| c[1] - c[0] * td.alpha;
    Ok(GsWitness { sigma: open(&commitments.c1), u_mu: open(&commitments.c2) })
}

/// In hiding mode, finds randomness `(r21', r22')` under which the commitment
/// `c₂` to `u^{μ'₀}` (made with `(r21, r22)`) also opens to `u^{μ'₁}`.
///
/// With `δ = (μ'₀ − μ'₁) / offset`: `r22' = r22 + δ`, `r21' = r21 − τδ`.
pub fn gs_equivocate(
    ck: &CommitmentKey,
    trapdoor: &CkTrapdoor,
    mu0: &Scalar,
    mu1: &Scalar,
    r21: &Scalar,
    r22: &Scalar,
) -> Result<(Scalar, Scalar)> {
    if ck.mode != CkMode::Hiding {
        return Err(Error::Capability("binding-mode commitments cannot be equivocated".into()));
    }
    let inv = trapdoor
        .offset
        .inverse()
        .ok_or_else(|| Error::Capability("commitment key offset is zero".into()))?;
    let delta = (*mu0 - mu1) * inv;
    Ok((*r21 - trapdoor.tau * delta, *r22 + delta))
}
