//! Request/reply transports. Both run every message through the frame codec.

use std::io::BufReader;
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};

use crate::envelope::{frame_decode, frame_encode, read_frame, write_frame, Envelope};
use crate::error::{Error, Result};
use crate::server::CloudServer;

pub trait Transport {
    fn exchange(&self, request: &Envelope) -> Result<Envelope>;
}

/// Calls the server directly, but through encoded frames.
#[derive(Clone)]
pub struct InProc {
    server: Arc<CloudServer>,
}

impl InProc {
    pub fn new(server: Arc<CloudServer>) -> Self {
        Self { server }
    }
}

impl Transport for InProc {
    fn exchange(&self, request: &Envelope) -> Result<Envelope> {
        let request = frame_decode(&frame_encode(request)?)?;
        let reply = self.server.handle(&request);
        frame_decode(&frame_encode(&reply)?)
    }
}

/// One TCP connection per exchange.
#[derive(Clone, Debug)]
pub struct TcpClient {
    addr: SocketAddr,
}

impl TcpClient {
    pub fn new(endpoint: impl ToSocketAddrs) -> Result<Self> {
        let addr = endpoint
            .to_socket_addrs()?
            .next()
            .ok_or_else(|| Error::Frame("endpoint resolves to no address".into()))?;
        Ok(Self { addr })
    }
}

impl Transport for TcpClient {
    fn exchange(&self, request: &Envelope) -> Result<Envelope> {
        let mut stream = TcpStream::connect(self.addr)?;
        write_frame(&mut stream, request)?;
        read_frame(&mut BufReader::new(stream))?
            .ok_or_else(|| Error::Frame("connection closed before reply".into()))
    }
}

/// Serves each connection on its own thread until the peer closes it.
fn serve_connection(server: &CloudServer, stream: TcpStream) -> Result<()> {
    let mut writer = stream.try_clone()?;
    let mut reader = BufReader::new(stream);
    while let Some(request) = read_frame(&mut reader)? {
        write_frame(&mut writer, &server.handle(&request))?;
    }
    Ok(())
}

/// Blocks accepting connections.
pub fn serve(listener: TcpListener, server: Arc<CloudServer>) -> Result<()> {
    serve_until(listener, server, Arc::new(AtomicBool::new(false)))
}

fn serve_until(listener: TcpListener, server: Arc<CloudServer>, stop: Arc<AtomicBool>) -> Result<()> {
    for stream in listener.incoming() {
        if stop.load(Ordering::SeqCst) {
            break;
        }
        let stream = stream?;
        let server = server.clone();
        thread::spawn(move || {
            // A broken connection only affects its own session.
            let _ = serve_connection(&server, stream);
        });
    }
    Ok(())
}

/// A server running on a background thread.
pub struct TcpServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<Result<()>>>,
}

impl TcpServerHandle {
    pub fn spawn(bind: impl ToSocketAddrs, server: Arc<CloudServer>) -> Result<Self> {
        let listener = TcpListener::bind(bind)?;
        let addr = listener.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let flag = stop.clone();
        let thread = thread::spawn(move || serve_until(listener, server, flag));
        Ok(Self { addr, stop, thread: Some(thread) })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn shutdown(mut self) -> Result<()> {
        self.stop_now()
    }

    fn stop_now(&mut self) -> Result<()> {
        let Some(thread) = self.thread.take() else {
            return Ok(());
        };
        self.stop.store(true, Ordering::SeqCst);
        // Wake the accept loop.
        let _ = TcpStream::connect(self.addr);
        thread.join().map_err(|_| Error::Frame("server thread panicked".into()))?
    }
}

impl Drop for TcpServerHandle {
    fn drop(&mut self) {
        let _ = self.stop_now();
    }
}
