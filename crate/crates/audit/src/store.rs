//! On-disk server storage: one directory per file name.
//!
//! ```text
//! <root>/<hex(name)>/manifest    text: version, scheme, name, counts
//!                   /blocks.bin  32-byte big-endian blocks
//!                   /tag.bin     file tag
//!                   /state.bin   authenticators (and for MHT the tree and root signature)
//!                   /pk.bin      owner's public key
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use dic_core::blinded::label_hash;
use dic_core::mht::block_hash;
use dic_core::pairing::{g2_generator, pairing_product_is_identity, G1};
use dic_core::protocol::{BlockVector, FileTag, SchemeId};
use dic_core::scheme::{PublicKey, ServerState};
use rand::Rng;

use crate::error::{Error, Result};

pub const MANIFEST: &str = "manifest";
pub const BLOCKS: &str = "blocks.bin";
pub const TAG: &str = "tag.bin";
pub const STATE: &str = "state.bin";
pub const PUBLIC_KEY: &str = "pk.bin";
pub const RECORD_FILES: [&str; 5] = [MANIFEST, BLOCKS, TAG, STATE, PUBLIC_KEY];

/// Longest accepted name; its hex form must fit in one path component.
pub const MAX_NAME: usize = 120;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoredFileRecord {
    pub pk: PublicKey,
    pub tag: FileTag,
    pub file: BlockVector,
    pub state: ServerState,
}

impl StoredFileRecord {
    pub fn scheme(&self) -> SchemeId {
        self.tag.scheme
    }

    pub fn name(&self) -> &[u8] {
        self.file.name()
    }

    /// Structural checks plus one authenticator pairing check at a random index.
    pub fn check<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<()> {
        let scheme = self.scheme();
        let n = self.file.len();
        let fail = |msg: &str| Err(Error::Store(format!("{}: {msg}", hex::encode(self.name()))));
        if self.pk.scheme() != scheme || self.state.scheme() != scheme {
            return fail("scheme mismatch between tag, key and state");
        }
        if self.tag.name != self.file.name() {
            return fail("tag names a different file");
        }
        if !self.tag.verify(self.pk.spk()) {
            return fail("tag signature does not verify");
        }
        if self.state.authenticators().len() != n {
            return fail("authenticator count differs from block count");
        }
        let (u, v) = match (&self.pk, &self.state) {
            (PublicKey::Mht(pk), ServerState::Mht(s)) => {
                if self.tag.n != Some(n as u64) || s.tree.leaf_count() != n {
                    return fail("tree or tag disagrees with block count");
                }
                (self.tag.u.ok_or_else(|| Error::Store("MHT tag without u".into()))?, pk.v)
            }
            (PublicKey::Blinded(pk), _) => (pk.u, pk.v),
            (PublicKey::Gs(pk), _) => (pk.u, pk.v),
            _ => return fail("scheme mismatch between key and state"),
        };
        let i = rng.gen_range(1..=n as u64);
        let m = self.file.block(i)?;
        let h = match scheme {
            SchemeId::Mht => block_hash(&m),
            SchemeId::Blinded | SchemeId::Gs => label_hash(self.name(), i),
        };
        let sigma: G1 = self.state.authenticators()[i as usize - 1];
        if !pairing_product_is_identity(&[sigma, -(h + u * m)], &[g2_generator(), v]) {
            return fail(&format!("authenticator {i} does not verify"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct FileStore {
    root: PathBuf,
}

impl FileStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn record_dir(&self, name: &[u8]) -> PathBuf {
        self.root.join(hex::encode(name))
    }

    pub fn contains(&self, name: &[u8]) -> bool {
        self.record_dir(name).is_dir()
    }

    /// Writes into a scratch directory and renames it into place, so a
    /// record is either fully present or absent.
    pub fn store<R: Rng + ?Sized>(&self, record: &StoredFileRecord, rng: &mut R) -> Result<()> {
        let name = record.name();
        if name.is_empty() || name.len() > MAX_NAME {
            return Err(Error::Store(format!("name must be 1..={MAX_NAME} bytes")));
        }
        record.check(rng)?;
        let dir = self.record_dir(name);
        if dir.exists() {
            return Err(Error::Store(format!("duplicate name {}", hex::encode(name))));
        }
        let scratch = self.root.join(format!(".tmp-{}-{:016x}", hex::encode(name), rng.gen::<u64>()));
        fs::create_dir(&scratch)?;
        let written = (|| -> Result<()> {
            write_synced(&scratch.join(BLOCKS), &record.file.encode_blocks())?;
            write_synced(&scratch.join(TAG), &record.tag.encode())?;
            write_synced(&scratch.join(STATE), &record.state.encode())?;
            write_synced(&scratch.join(PUBLIC_KEY), &record.pk.encode())?;
            let manifest = Manifest {
                scheme: record.scheme(),
                name: name.to_vec(),
                blocks: record.file.len() as u64,
                authenticators: record.state.authenticators().len() as u64,
            };
            write_synced(&scratch.join(MANIFEST), manifest.render().as_bytes())?;
            fs::rename(&scratch, &dir)?;
            Ok(())
        })();
        if written.is_err() {
            let _ = fs::remove_dir_all(&scratch);
        }
        written
    }

    pub fn manifest(&self, name: &[u8]) -> Result<Manifest> {
        let dir = self.existing_dir(name)?;
        let text = fs::read(dir.join(MANIFEST))?;
        let m = Manifest::parse(&text)?;
        if m.name != name {
            return Err(Error::Store("manifest names a different file".into()));
        }
        Ok(m)
    }

    /// Stored tag bytes, unparsed, with the manifest's block count.
    pub fn read_tag(&self, name: &[u8]) -> Result<(Vec<u8>, u64)> {
        let m = self.manifest(name)?;
        Ok((fs::read(self.record_dir(name).join(TAG))?, m.blocks))
    }

    pub fn load<R: Rng + ?Sized>(&self, name: &[u8], rng: &mut R) -> Result<StoredFileRecord> {
        let m = self.manifest(name)?;
        let dir = self.record_dir(name);
        let file = BlockVector::decode_blocks(name.to_vec(), &fs::read(dir.join(BLOCKS))?)?;
        let tag = FileTag::decode(&fs::read(dir.join(TAG))?)?;
        let state = ServerState::decode(m.scheme, &fs::read(dir.join(STATE))?)?;
        let pk = PublicKey::decode(&fs::read(dir.join(PUBLIC_KEY))?)?;
        if tag.scheme != m.scheme
            || file.len() as u64 != m.blocks
            || state.authenticators().len() as u64 != m.authenticators
        {
            return Err(Error::Store("record disagrees with its manifest".into()));
        }
        let record = StoredFileRecord { pk, tag, file, state };
        record.check(rng)?;
        Ok(record)
    }

    pub fn remove(&self, name: &[u8]) -> Result<()> {
        fs::remove_dir_all(self.existing_dir(name)?)?;
        Ok(())
    }

    fn existing_dir(&self, name: &[u8]) -> Result<PathBuf> {
        let dir = self.record_dir(name);
        if !dir.is_dir() {
            return Err(Error::Store(format!("unknown file {}", hex::encode(name))));
        }
        Ok(dir)
    }
}

fn write_synced(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub scheme: SchemeId,
    pub name: Vec<u8>,
    pub blocks: u64,
    pub authenticators: u64,
}

impl Manifest {
    pub fn render(&self) -> String {
        format!(
            "version=1\nscheme={}\nname={}\nblocks={}\nauthenticators={}\n",
            self.scheme,
            hex::encode(&self.name),
            self.blocks,
            self.authenticators
        )
    }

    /// Accepts only the exact text `render` produces.
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let bad = || Error::Store("malformed manifest".into());
        let text = std::str::from_utf8(bytes).map_err(|_| bad())?;
        let mut fields = text.lines().map(|l| l.split_once('=').ok_or_else(bad));
        let mut next = |key: &str| -> Result<&str> {
            let (k, v) = fields.next().ok_or_else(bad)??;
            if k == key {
                Ok(v)
            } else {
                Err(bad())
            }
        };
        if next("version")? != "1" {
            return Err(bad());
        }
        let scheme = next("scheme")?.parse().map_err(|_| bad())?;
        let name = hex::decode(next("name")?).map_err(|_| bad())?;
        let blocks = next("blocks")?.parse().map_err(|_| bad())?;
        let authenticators = next("authenticators")?.parse().map_err(|_| bad())?;
        let m = Manifest { scheme, name, blocks, authenticators };
        if m.render().as_bytes() != bytes {
            return Err(bad());
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dic_core::pairing::random_scalar;
    use dic_core::scheme::{keygen, token_gen};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn record(scheme: SchemeId, name: &[u8], rng: &mut ChaCha20Rng) -> StoredFileRecord {
        let keys = keygen(scheme, rng);
        let file = BlockVector::new(name.to_vec(), (0..6).map(|_| random_scalar(rng)).collect()).unwrap();
        let (tag, state) = token_gen(&keys, &file, rng).unwrap();
        StoredFileRecord { pk: keys.public(), tag, file, state }
    }

    #[test]
    fn store_then_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let store = FileStore::open(dir.path()).unwrap();
        for scheme in SchemeId::ALL {
            let rec = record(scheme, scheme.as_str().as_bytes(), &mut rng);
            store.store(&rec, &mut rng).unwrap();
            assert_eq!(store.load(rec.name(), &mut rng).unwrap(), rec);
            let reopened = FileStore::open(dir.path()).unwrap();
            assert_eq!(reopened.load(rec.name(), &mut rng).unwrap(), rec);
            let (tag, n) = reopened.read_tag(rec.name()).unwrap();
            assert_eq!((tag, n), (rec.tag.encode(), 6));
        }
        let leftovers = fs::read_dir(dir.path()).unwrap().filter(|e| {
            e.as_ref().unwrap().file_name().to_string_lossy().starts_with(".tmp")
        });
        assert_eq!(leftovers.count(), 0);
    }

    #[test]
    fn duplicates_and_bad_names_are_refused() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let store = FileStore::open(dir.path()).unwrap();
        let rec = record(SchemeId::Gs, b"dup", &mut rng);
        store.store(&rec, &mut rng).unwrap();
        assert!(store.store(&rec, &mut rng).is_err());
        let long = record(SchemeId::Blinded, &[b'a'; MAX_NAME + 1], &mut rng);
        assert!(store.store(&long, &mut rng).is_err());
        assert!(store.load(b"missing", &mut rng).is_err());
        store.remove(b"dup").unwrap();
        assert!(!store.contains(b"dup"));
        store.store(&rec, &mut rng).unwrap();
    }

    #[test]
    fn inconsistent_records_are_refused_on_write() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let store = FileStore::open(dir.path()).unwrap();
        let a = record(SchemeId::Blinded, b"a", &mut rng);
        let b = record(SchemeId::Blinded, b"a", &mut rng);
        let mixed = StoredFileRecord { pk: b.pk.clone(), ..a.clone() };
        assert!(store.store(&mixed, &mut rng).is_err());
        let mut bad = a.clone();
        let fake = bad.state.authenticators()[0];
        for s in bad.state.authenticators_mut() {
            *s = fake + fake;
        }
        assert!(store.store(&bad, &mut rng).is_err());
        assert!(!store.contains(b"a"));
    }

    #[test]
    fn manifest_is_strict() {
        let m = Manifest { scheme: SchemeId::Mht, name: b"f".to_vec(), blocks: 3, authenticators: 3 };
        let text = m.render();
        assert_eq!(Manifest::parse(text.as_bytes()).unwrap(), m);
        for variant in [
            text.replace("blocks=3", "blocks=03"),
            text.replace("version=1", "version=2"),
            text.trim_end().to_string(),
            format!("{text}\n"),
            text.replace("scheme=mht", "scheme=gs "),
        ] {
            assert!(Manifest::parse(variant.as_bytes()).is_err(), "{variant:?}");
        }
    }
}
