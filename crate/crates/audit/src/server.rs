//! The cloud server: stores uploads and answers tag requests and challenges.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

use dic_core::protocol::{FileTag, SchemeId};
use dic_core::scheme::respond;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::envelope::{Envelope, Message, UploadRecord};
use crate::error::{Error, Result};
use crate::store::{FileStore, StoredFileRecord};

pub struct CloudServer {
    store: FileStore,
    /// Audits take the read side, store/remove the write side.
    locks: Mutex<HashMap<Vec<u8>, Arc<RwLock<()>>>>,
    rng: Mutex<ChaCha20Rng>,
}

impl CloudServer {
    pub fn new(store: FileStore, seed: Option<u64>) -> Self {
        let rng = match seed {
            Some(s) => ChaCha20Rng::seed_from_u64(s),
            None => ChaCha20Rng::from_entropy(),
        };
        Self { store, locks: Mutex::default(), rng: Mutex::new(rng) }
    }

    pub fn store(&self) -> &FileStore {
        &self.store
    }

    fn lock_for(&self, name: &[u8]) -> Arc<RwLock<()>> {
        let mut locks = self.locks.lock().unwrap();
        locks.entry(name.to_vec()).or_default().clone()
    }

    /// A private stream per request; the shared generator is held only long
    /// enough to seed it.
    fn session_rng(&self) -> ChaCha20Rng {
        let mut main = self.rng.lock().unwrap();
        ChaCha20Rng::from_rng(&mut *main).expect("ChaCha never fails")
    }

    /// Answers one request. Failures become error envelopes.
    pub fn handle(&self, request: &Envelope) -> Envelope {
        let scheme = request.scheme;
        let reply = Message::from_envelope(request).and_then(|msg| self.dispatch(scheme, msg));
        match reply {
            Ok(msg) => msg.to_envelope(scheme),
            Err(e) => Message::Error { message: e.to_string() }.to_envelope(scheme),
        }
    }

    fn dispatch(&self, scheme: SchemeId, msg: Message) -> Result<Message> {
        match msg {
            Message::Upload(record) => self.upload(scheme, *record),
            Message::GetTag { name } => {
                let lock = self.lock_for(&name);
                let _guard = lock.read().unwrap();
                let (tag, n) = self.store.read_tag(&name)?;
                Ok(Message::Tag { tag, n })
            }
            Message::Challenge { name, chal } => {
                let lock = self.lock_for(&name);
                let _guard = lock.read().unwrap();
                let mut rng = self.session_rng();
                let record = self.store.load(&name, &mut rng)?;
                if record.scheme() != scheme {
                    return Err(Error::Store(format!("file is stored under scheme {}", record.scheme())));
                }
                chal.check_range(record.file.len())?;
                let proof = respond(&record.file, &record.state, &record.pk, &chal, &mut rng)?;
                Ok(Message::Response { proof: proof.encode() })
            }
            other => Err(Error::Unexpected(format!("{:?} is not a request", other.kind()))),
        }
    }

    fn upload(&self, scheme: SchemeId, upload: UploadRecord) -> Result<Message> {
        let tag = FileTag::decode(&upload.tag)?;
        if tag.scheme != scheme {
            return Err(Error::Store("envelope and tag schemes differ".into()));
        }
        let record = StoredFileRecord { pk: upload.pk, tag, file: upload.file, state: upload.state };
        let name = record.name().to_vec();
        let lock = self.lock_for(&name);
        let _guard = lock.write().unwrap();
        self.store.store(&record, &mut self.session_rng())?;
        Ok(Message::UploadAck { name })
    }
}
