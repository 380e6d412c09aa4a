//! Three-party deployment: the owner uploads, the cloud server stores and
//! answers challenges, the auditor checks proofs. The auditor only ever sees
//! tags and proofs, never blocks.

pub mod client;
pub mod envelope;
pub mod error;
pub mod server;
pub mod store;
pub mod transport;

pub use client::{tpa_audit, upload, AuditOutcome, AuditReport};
pub use server::CloudServer;
pub use store::{FileStore, StoredFileRecord};
pub use transport::{InProc, TcpClient, TcpServerHandle, Transport};
