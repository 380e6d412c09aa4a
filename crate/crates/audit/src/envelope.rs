//! Wire format.
//!
//! A frame is a 4-byte big-endian length followed by an envelope:
//! `version (1) ‖ scheme_id (1) ‖ message_type (1) ‖ body`.

use std::io::{Read, Write};

use dic_core::codec::{Reader, Writer};
use dic_core::protocol::{BlockVector, Challenge, RejectReason, SchemeId, Verdict};
use dic_core::scheme::{PublicKey, ServerState};

use crate::error::{Error, Result};

pub const PROTOCOL_VERSION: u8 = 1;
pub const MAX_BODY: usize = 16 * 1024 * 1024;
const HEADER: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MessageType {
    Upload = 1,
    UploadAck = 2,
    GetTag = 3,
    Tag = 4,
    Challenge = 5,
    Response = 6,
    Verdict = 7,
    Error = 8,
}

impl MessageType {
    pub const ALL: [MessageType; 8] = [
        MessageType::Upload,
        MessageType::UploadAck,
        MessageType::GetTag,
        MessageType::Tag,
        MessageType::Challenge,
        MessageType::Response,
        MessageType::Verdict,
        MessageType::Error,
    ];

    pub fn from_u8(v: u8) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| *t as u8 == v)
            .ok_or_else(|| Error::Frame(format!("unknown message type {v}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub version: u8,
    pub scheme: SchemeId,
    pub kind: MessageType,
    pub body: Vec<u8>,
}

impl Envelope {
    pub fn new(scheme: SchemeId, kind: MessageType, body: Vec<u8>) -> Self {
        Self { version: PROTOCOL_VERSION, scheme, kind, body }
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        if self.body.len() > MAX_BODY {
            return Err(Error::Frame(format!("body of {} bytes exceeds {MAX_BODY}", self.body.len())));
        }
        let mut out = Vec::with_capacity(HEADER + self.body.len());
        out.extend([self.version, self.scheme.as_u8(), self.kind as u8]);
        out.extend_from_slice(&self.body);
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER {
            return Err(Error::Frame("envelope shorter than its header".into()));
        }
        if bytes[0] != PROTOCOL_VERSION {
            return Err(Error::Frame(format!("unsupported version {}", bytes[0])));
        }
        if bytes.len() - HEADER > MAX_BODY {
            return Err(Error::Frame("body exceeds limit".into()));
        }
        Ok(Self {
            version: bytes[0],
            scheme: SchemeId::from_u8(bytes[1])?,
            kind: MessageType::from_u8(bytes[2])?,
            body: bytes[HEADER..].to_vec(),
        })
    }
}

pub fn frame_encode(env: &Envelope) -> Result<Vec<u8>> {
    let payload = env.encode()?;
    let mut out = Vec::with_capacity(4 + payload.len());
    out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    out.extend(payload);
    Ok(out)
}

/// Decodes exactly one frame; the slice must end where the frame does.
pub fn frame_decode(bytes: &[u8]) -> Result<Envelope> {
    let (len, rest) = split_len(bytes)?;
    if rest.len() != len {
        return Err(Error::Frame(format!("length prefix says {len} bytes, frame has {}", rest.len())));
    }
    Envelope::decode(rest)
}

fn split_len(bytes: &[u8]) -> Result<(usize, &[u8])> {
    if bytes.len() < 4 {
        return Err(Error::Frame("truncated length prefix".into()));
    }
    let len = u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize;
    check_len(len)?;
    Ok((len, &bytes[4..]))
}

fn check_len(len: usize) -> Result<()> {
    if !(HEADER..=HEADER + MAX_BODY).contains(&len) {
        return Err(Error::Frame(format!("frame length {len} out of range")));
    }
    Ok(())
}

pub fn write_frame<W: Write>(w: &mut W, env: &Envelope) -> Result<()> {
    w.write_all(&frame_encode(env)?)?;
    w.flush()?;
    Ok(())
}

/// Reads one frame. `Ok(None)` on a clean end of stream before any byte.
pub fn read_frame<R: Read>(r: &mut R) -> Result<Option<Envelope>> {
    let mut len = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match r.read(&mut len[got..])? {
            0 if got == 0 => return Ok(None),
            0 => return Err(Error::Frame("stream ended inside length prefix".into())),
            k => got += k,
        }
    }
    let len = u32::from_be_bytes(len) as usize;
    check_len(len)?;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Frame(format!("stream ended inside frame: {e}")))?;
    Envelope::decode(&buf).map(Some)
}

/// Typed envelope bodies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Message {
    Upload(Box<UploadRecord>),
    UploadAck { name: Vec<u8> },
    GetTag { name: Vec<u8> },
    /// Tag bytes exactly as stored, plus the block count.
    Tag { tag: Vec<u8>, n: u64 },
    Challenge { name: Vec<u8>, chal: Challenge },
    Response { proof: Vec<u8> },
    Verdict(Verdict),
    Error { message: String },
}

/// What the owner ships to the server.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UploadRecord {
    pub pk: PublicKey,
    pub tag: Vec<u8>,
    pub file: BlockVector,
    pub state: ServerState,
}

impl Message {
    pub fn kind(&self) -> MessageType {
        match self {
            Message::Upload(_) => MessageType::Upload,
            Message::UploadAck { .. } => MessageType::UploadAck,
            Message::GetTag { .. } => MessageType::GetTag,
            Message::Tag { .. } => MessageType::Tag,
            Message::Challenge { .. } => MessageType::Challenge,
            Message::Response { .. } => MessageType::Response,
            Message::Verdict(_) => MessageType::Verdict,
            Message::Error { .. } => MessageType::Error,
        }
    }

    pub fn to_envelope(&self, scheme: SchemeId) -> Envelope {
        let mut w = Writer::new();
        match self {
            Message::Upload(u) => {
                w.bytes(u.file.name())
                    .bytes(&u.pk.encode())
                    .bytes(&u.tag)
                    .bytes(&u.file.encode_blocks())
                    .bytes(&u.state.encode());
            }
            Message::UploadAck { name } | Message::GetTag { name } => {
                w.bytes(name);
            }
            Message::Tag { tag, n } => {
                w.bytes(tag).u64(*n);
            }
            Message::Challenge { name, chal } => {
                w.bytes(name).bytes(&chal.encode());
            }
            Message::Response { proof } => {
                w.bytes(proof);
            }
            Message::Verdict(v) => match v {
                Verdict::Accept => {
                    w.u8(1);
                }
                Verdict::Reject(r) => {
                    w.u8(0).bytes(r.as_str().as_bytes());
                }
            },
            Message::Error { message } => {
                w.bytes(message.as_bytes());
            }
        }
        Envelope::new(scheme, self.kind(), w.finish())
    }

    pub fn from_envelope(env: &Envelope) -> Result<Self> {
        let mut r = Reader::new(&env.body);
        let msg = match env.kind {
            MessageType::Upload => {
                let name = r.bytes()?.to_vec();
                let pk = PublicKey::decode(r.bytes()?)?;
                let tag = r.bytes()?.to_vec();
                let file = BlockVector::decode_blocks(name, r.bytes()?)?;
                let state = ServerState::decode(env.scheme, r.bytes()?)?;
                Message::Upload(Box::new(UploadRecord { pk, tag, file, state }))
            }
            MessageType::UploadAck => Message::UploadAck { name: r.bytes()?.to_vec() },
            MessageType::GetTag => Message::GetTag { name: r.bytes()?.to_vec() },
            MessageType::Tag => Message::Tag { tag: r.bytes()?.to_vec(), n: r.u64()? },
            MessageType::Challenge => {
                let name = r.bytes()?.to_vec();
                Message::Challenge { name, chal: Challenge::decode(r.bytes()?)? }
            }
            MessageType::Response => Message::Response { proof: r.bytes()?.to_vec() },
            MessageType::Verdict => match r.u8()? {
                1 => Message::Verdict(Verdict::Accept),
                0 => {
                    let s = std::str::from_utf8(r.bytes()?)
                        .map_err(|_| Error::Frame("verdict reason is not utf-8".into()))?;
                    let reason = RejectReason::parse(s)
                        .ok_or_else(|| Error::Frame(format!("unknown reject reason {s:?}")))?;
                    Message::Verdict(Verdict::Reject(reason))
                }
                other => return Err(Error::Frame(format!("bad verdict flag {other}"))),
            },
            MessageType::Error => Message::Error {
                message: String::from_utf8_lossy(r.bytes()?).into_owned(),
            },
        };
        r.finish()?;
        Ok(msg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dic_core::pairing::random_scalar;
    use dic_core::protocol::sample_challenge;
    use dic_core::scheme::{keygen, respond, token_gen};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn all_messages(scheme: SchemeId, rng: &mut ChaCha20Rng) -> Vec<Message> {
        let keys = keygen(scheme, rng);
        let file = BlockVector::new(b"wire".to_vec(), (0..5).map(|_| random_scalar(rng)).collect()).unwrap();
        let (tag, state) = token_gen(&keys, &file, rng).unwrap();
        let chal = sample_challenge(5, 3, rng).unwrap();
        let proof = respond(&file, &state, &keys.public(), &chal, rng).unwrap();
        vec![
            Message::Upload(Box::new(UploadRecord { pk: keys.public(), tag: tag.encode(), file, state })),
            Message::UploadAck { name: b"wire".to_vec() },
            Message::GetTag { name: b"wire".to_vec() },
            Message::Tag { tag: tag.encode(), n: 5 },
            Message::Challenge { name: b"wire".to_vec(), chal },
            Message::Response { proof: proof.encode() },
            Message::Verdict(Verdict::Accept),
            Message::Verdict(Verdict::Reject(RejectReason::MerklePath)),
            Message::Error { message: "no such file".into() },
        ]
    }

    #[test]
    fn every_message_round_trips_bit_exactly() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for scheme in SchemeId::ALL {
            for msg in all_messages(scheme, &mut rng) {
                let env = msg.to_envelope(scheme);
                let frame = frame_encode(&env).unwrap();
                let back = frame_decode(&frame).unwrap();
                assert_eq!(back, env);
                assert_eq!(frame_encode(&back).unwrap(), frame);
                assert_eq!(Message::from_envelope(&back).unwrap(), msg);
                let mut cursor = std::io::Cursor::new(frame.clone());
                assert_eq!(read_frame(&mut cursor).unwrap().unwrap(), env);
                assert!(read_frame(&mut cursor).unwrap().is_none());
            }
        }
    }

    #[test]
    fn truncated_frames_fail() {
        let env = Message::GetTag { name: b"abc".to_vec() }.to_envelope(SchemeId::Gs);
        let frame = frame_encode(&env).unwrap();
        for cut in 0..frame.len() {
            assert!(frame_decode(&frame[..cut]).is_err(), "cut at {cut}");
            if cut > 0 {
                assert!(read_frame(&mut &frame[..cut]).is_err(), "stream cut at {cut}");
            }
        }
    }

    #[test]
    fn length_prefix_mismatch_fails() {
        let env = Message::GetTag { name: b"abc".to_vec() }.to_envelope(SchemeId::Mht);
        let mut frame = frame_encode(&env).unwrap();
        frame.push(0);
        assert!(frame_decode(&frame).is_err());
        frame.pop();
        frame[3] += 1;
        assert!(frame_decode(&frame).is_err());
    }

    #[test]
    fn header_fields_are_validated() {
        let env = Message::GetTag { name: b"abc".to_vec() }.to_envelope(SchemeId::Blinded);
        let good = env.encode().unwrap();
        for (pos, value) in [(0, 2u8), (1, 0), (1, 4), (2, 0), (2, 9)] {
            let mut bad = good.clone();
            bad[pos] = value;
            assert!(Envelope::decode(&bad).is_err(), "byte {pos} = {value}");
        }
    }

    #[test]
    fn oversize_bodies_are_refused() {
        let env = Envelope::new(SchemeId::Gs, MessageType::Response, vec![0; MAX_BODY + 1]);
        assert!(frame_encode(&env).is_err());
        let mut prefix = ((MAX_BODY + HEADER + 1) as u32).to_be_bytes().to_vec();
        prefix.extend([1, 3, 6]);
        assert!(read_frame(&mut prefix.as_slice()).is_err());
        assert!(frame_decode(&prefix).is_err());
    }

    #[test]
    fn malformed_bodies_fail() {
        let mut env = Message::Challenge {
            name: b"x".to_vec(),
            chal: Challenge::new(vec![(1, random_scalar(&mut ChaCha20Rng::seed_from_u64(2)))]).unwrap(),
        }
        .to_envelope(SchemeId::Gs);
        env.body.pop();
        assert!(Message::from_envelope(&env).is_err());
        env.body.extend([0, 0]);
        assert!(Message::from_envelope(&env).is_err());
    }
}
