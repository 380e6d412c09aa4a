//! Owner upload and the third-party auditor.

use std::fmt;

use dic_core::protocol::{sample_challenge, BlockVector, FileTag, RejectReason, Verdict};
use dic_core::scheme::{token_gen, verify, Proof, PublicKey, UserKeys};
use rand::{CryptoRng, RngCore};

use crate::envelope::{Envelope, Message, UploadRecord};
use crate::error::{Error, Result};
use crate::transport::Transport;

fn call<T: Transport + ?Sized>(t: &T, request: Envelope) -> Result<Message> {
    Message::from_envelope(&t.exchange(&request)?)
}

/// Runs TokenGen and ships everything to the server.
pub fn upload<T: Transport + ?Sized, R: RngCore + CryptoRng + ?Sized>(
    transport: &T,
    keys: &UserKeys,
    file: &BlockVector,
    rng: &mut R,
) -> Result<FileTag> {
    let (tag, state) = token_gen(keys, file, rng)?;
    let record = UploadRecord { pk: keys.public(), tag: tag.encode(), file: file.clone(), state };
    match call(transport, Message::Upload(Box::new(record)).to_envelope(keys.scheme()))? {
        Message::UploadAck { name } if name == file.name() => Ok(tag),
        Message::Error { message } => Err(Error::Remote(message)),
        other => Err(Error::Unexpected(format!("{:?}", other.kind()))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AuditOutcome {
    Pass,
    /// The server failed to prove possession; carries the reason.
    Fail(String),
    /// The tag did not decode or its signature did not verify.
    TagInvalid,
}

impl AuditOutcome {
    pub fn is_pass(&self) -> bool {
        matches!(self, AuditOutcome::Pass)
    }
}

impl fmt::Display for AuditOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuditOutcome::Pass => f.write_str("true"),
            AuditOutcome::Fail(reason) => write!(f, "false ({reason})"),
            AuditOutcome::TagInvalid => f.write_str("tag_invalid"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditReport {
    pub outcome: AuditOutcome,
    /// Block count the server reported; 0 if the audit stopped before that.
    pub n: u64,
    pub c: usize,
    pub proof_bytes: usize,
}

/// Fetches the tag, checks it, challenges `c` random blocks and verifies the
/// reply. Any error envelope from the server counts as a failed audit;
/// transport failures are returned as errors.
pub fn tpa_audit<T: Transport + ?Sized, R: RngCore + CryptoRng + ?Sized>(
    transport: &T,
    pk: &PublicKey,
    name: &[u8],
    c: usize,
    rng: &mut R,
) -> Result<AuditReport> {
    if c == 0 {
        return Err(Error::Core(dic_core::error::Error::Argument("challenge size must be at least 1".into())));
    }
    let scheme = pk.scheme();
    let mut report = AuditReport { outcome: AuditOutcome::Pass, n: 0, c: 0, proof_bytes: 0 };
    let finish = |mut report: AuditReport, outcome| {
        report.outcome = outcome;
        Ok(report)
    };

    let (tag_bytes, n) = match call(transport, Message::GetTag { name: name.to_vec() }.to_envelope(scheme))? {
        Message::Tag { tag, n } => (tag, n),
        Message::Error { message } => return finish(report, AuditOutcome::Fail(format!("server error: {message}"))),
        other => return Err(Error::Unexpected(format!("{:?}", other.kind()))),
    };
    report.n = n;
    let tag = match FileTag::decode(&tag_bytes) {
        Ok(t) if t.verify(pk.spk()) => t,
        _ => return finish(report, AuditOutcome::TagInvalid),
    };
    if tag.scheme != scheme || tag.name != name {
        return finish(report, AuditOutcome::Fail(RejectReason::Mismatch.as_str().into()));
    }
    if n == 0 || tag.n.is_some_and(|tn| tn != n) {
        return finish(report, AuditOutcome::Fail("block count disagrees with tag".into()));
    }

    report.c = c.min(n as usize);
    let chal = sample_challenge(n as usize, report.c, rng)?;
    let request = Message::Challenge { name: name.to_vec(), chal: chal.clone() }.to_envelope(scheme);
    let proof_bytes = match call(transport, request)? {
        Message::Response { proof } => proof,
        Message::Error { message } => return finish(report, AuditOutcome::Fail(format!("server error: {message}"))),
        other => return Err(Error::Unexpected(format!("{:?}", other.kind()))),
    };
    report.proof_bytes = proof_bytes.len();
    let Ok(proof) = Proof::decode(scheme, &proof_bytes) else {
        return finish(report, AuditOutcome::Fail(RejectReason::Malformed.as_str().into()));
    };
    let outcome = match verify(pk, &tag, &chal, &proof) {
        Verdict::Accept => AuditOutcome::Pass,
        Verdict::Reject(RejectReason::TagInvalid) => AuditOutcome::TagInvalid,
        Verdict::Reject(r) => AuditOutcome::Fail(r.as_str().into()),
    };
    finish(report, outcome)
}
