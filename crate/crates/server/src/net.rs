//! WebSocket transport. One physics thread owns the [`Engine`]; each
//! connection thread only parses frames and forwards them over a channel,
//! and receives outgoing messages over its own channel.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::{self, BufWriter};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use crossbeam_channel::{unbounded, Receiver, Sender};
use tungstenite::{Message, WebSocket};
use vibrafin::locomotion::{builtin, FishBody, BUILTIN_SCENARIOS};

use crate::engine::{Engine, DT};
use crate::protocol::{
    parse_client, ClientMessage, ErrorCode, Role, ScenarioInfo, ServerMessage, PROTOCOL_VERSION,
};

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub body: FishBody,
    /// Built-in scenario loaded at start.
    pub scenario: String,
    /// Append the command log here as JSON lines.
    pub replay_path: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            body: FishBody::default(),
            scenario: "open_water".into(),
            replay_path: None,
        }
    }
}

enum Inbound {
    Connect { id: u64, tx: Sender<Outbound> },
    Message { id: u64, msg: ClientMessage },
    Disconnect { id: u64 },
}

enum Outbound {
    Send(ServerMessage),
    Close,
}

pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    threads: Vec<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stop accepting, close connections and join the worker threads.
    pub fn shutdown(mut self) {
        self.stop.store(true, Ordering::SeqCst);
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }

    /// Block until the server stops.
    pub fn wait(mut self) {
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }
}

/// Bind `addr` and start the accept and physics threads.
pub fn serve(addr: impl ToSocketAddrs, config: ServerConfig) -> io::Result<ServerHandle> {
    let mut engine = Engine::new(config.body.clone(), &config.scenario)
        .map_err(|m| io::Error::new(io::ErrorKind::InvalidInput, m.to_json()))?;
    if let Some(path) = &config.replay_path {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        engine = engine.with_replay_sink(Box::new(BufWriter::new(file)))?;
    }
    let listener = TcpListener::bind(addr)?;
    listener.set_nonblocking(true)?;
    let addr = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let (tx, rx) = unbounded();

    let physics = {
        let stop = stop.clone();
        thread::Builder::new()
            .name("vibrafin-physics".into())
            .spawn(move || physics_loop(engine, rx, stop))?
    };
    let acceptor = {
        let stop = stop.clone();
        thread::Builder::new()
            .name("vibrafin-accept".into())
            .spawn(move || accept_loop(listener, tx, stop))?
    };
    Ok(ServerHandle {
        addr,
        stop,
        threads: vec![acceptor, physics],
    })
}

fn accept_loop(listener: TcpListener, inbound: Sender<Inbound>, stop: Arc<AtomicBool>) {
    let mut next_id = 0;
    let mut conns = Vec::new();
    while !stop.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((stream, _)) => {
                let id = next_id;
                next_id += 1;
                let inbound = inbound.clone();
                let stop = stop.clone();
                if let Ok(h) = thread::Builder::new()
                    .name(format!("vibrafin-conn-{id}"))
                    .spawn(move || connection(id, stream, inbound, stop))
                {
                    conns.push(h);
                }
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => thread::sleep(Duration::from_millis(5)),
            Err(_) => thread::sleep(Duration::from_millis(5)),
        }
        conns.retain(|h: &JoinHandle<()>| !h.is_finished());
    }
    for h in conns {
        let _ = h.join();
    }
}

struct Client {
    tx: Sender<Outbound>,
    role: Option<Role>,
}

fn scenario_list() -> Vec<ScenarioInfo> {
    BUILTIN_SCENARIOS
        .iter()
        .filter_map(|n| builtin(n))
        .map(|s| ScenarioInfo::from_scenario(&s))
        .collect()
}

fn physics_loop(mut engine: Engine, inbound: Receiver<Inbound>, stop: Arc<AtomicBool>) {
    let tick = Duration::from_secs_f64(DT);
    let mut clients: BTreeMap<u64, Client> = BTreeMap::new();
    let mut controller: Option<u64> = None;
    let mut next = Instant::now();
    let mut wall_ticks: u64 = 0;

    while !stop.load(Ordering::SeqCst) {
        while let Ok(event) = inbound.try_recv() {
            match event {
                Inbound::Connect { id, tx } => {
                    clients.insert(id, Client { tx, role: None });
                }
                Inbound::Disconnect { id } => {
                    clients.remove(&id);
                    if controller == Some(id) {
                        controller = None;
                        engine.controller_lost();
                    }
                }
                Inbound::Message { id, msg } => {
                    let Some(client) = clients.get_mut(&id) else { continue };
                    let reply = |m: ServerMessage| {
                        let _ = client.tx.send(Outbound::Send(m));
                    };
                    match (client.role, msg) {
                        (None, ClientMessage::Hello { protocol_version }) => {
                            if protocol_version != PROTOCOL_VERSION {
                                reply(ServerMessage::error(
                                    ErrorCode::VersionMismatch,
                                    format!("server speaks protocol {PROTOCOL_VERSION}, client sent {protocol_version}"),
                                ));
                                let _ = client.tx.send(Outbound::Close);
                                continue;
                            }
                            let role = if controller.is_none() {
                                controller = Some(id);
                                Role::Controller
                            } else {
                                Role::Observer
                            };
                            client.role = Some(role);
                            reply(ServerMessage::Welcome {
                                server_version: env!("CARGO_PKG_VERSION").into(),
                                protocol_version: PROTOCOL_VERSION,
                                role,
                                scenarios: scenario_list(),
                            });
                        }
                        (None, _) => reply(ServerMessage::error(ErrorCode::HelloRequired, "send hello first")),
                        (Some(_), ClientMessage::Hello { .. }) => {
                            reply(ServerMessage::error(ErrorCode::DuplicateHello, "hello is only valid once"))
                        }
                        (Some(Role::Observer), _) => {
                            reply(ServerMessage::error(ErrorCode::NotController, "observers cannot send commands"))
                        }
                        (Some(Role::Controller), msg) => {
                            if let Err(e) = engine.command(msg) {
                                reply(e);
                            }
                        }
                    }
                }
            }
        }

        if let Err(e) = engine.step() {
            for c in clients.values().filter(|c| c.role.is_some()) {
                let _ = c.tx.send(Outbound::Send(e.clone()));
            }
        }
        wall_ticks += 1;
        let every = (1000 / engine.snapshot_rate().max(1)) as u64;
        if wall_ticks.is_multiple_of(every) {
            let snap = engine.snapshot();
            for c in clients.values().filter(|c| c.role.is_some()) {
                let _ = c.tx.send(Outbound::Send(snap.clone()));
            }
        }

        next += tick;
        let now = Instant::now();
        if next > now {
            thread::sleep(next - now);
        } else if now - next > Duration::from_millis(100) {
            // Far behind (e.g. the host was suspended): drop the backlog
            // rather than fast-forwarding physics.
            next = now;
        }
    }
    for c in clients.values() {
        let _ = c.tx.send(Outbound::Close);
    }
}

fn connection(id: u64, stream: TcpStream, inbound: Sender<Inbound>, stop: Arc<AtomicBool>) {
    let _ = stream.set_nonblocking(false);
    let Ok(mut ws) = tungstenite::accept(stream) else { return };
    let _ = ws.get_ref().set_read_timeout(Some(Duration::from_millis(2)));
    let (tx, rx) = unbounded();
    if inbound.send(Inbound::Connect { id, tx }).is_err() {
        return;
    }
    serve_connection(id, &mut ws, &inbound, &rx, &stop);
    let _ = inbound.send(Inbound::Disconnect { id });
}

fn serve_connection(
    id: u64,
    ws: &mut WebSocket<TcpStream>,
    inbound: &Sender<Inbound>,
    outbound: &Receiver<Outbound>,
    stop: &AtomicBool,
) {
    loop {
        if stop.load(Ordering::SeqCst) {
            let _ = ws.close(None);
            let _ = ws.flush();
            return;
        }
        match ws.read() {
            Ok(Message::Text(text)) => match parse_client(&text) {
                Ok(msg) => {
                    if inbound.send(Inbound::Message { id, msg }).is_err() {
                        return;
                    }
                }
                Err(e) => {
                    let m = ServerMessage::error(ErrorCode::Malformed, e.to_string());
                    // Release the role before the peer can observe the close.
                    let _ = inbound.send(Inbound::Disconnect { id });
                    let _ = ws.send(Message::Text(m.to_json()));
                    let _ = ws.close(None);
                    let _ = ws.flush();
                    return;
                }
            },
            Ok(Message::Binary(_)) => {
                let m = ServerMessage::error(ErrorCode::Malformed, "binary frames are not supported");
                let _ = inbound.send(Inbound::Disconnect { id });
                let _ = ws.send(Message::Text(m.to_json()));
                let _ = ws.close(None);
                let _ = ws.flush();
                return;
            }
            Ok(Message::Close(_)) => {
                let _ = ws.flush();
                return;
            }
            Ok(_) => {}
            Err(tungstenite::Error::Io(e))
                if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {}
            Err(_) => return,
        }

        // Latest state wins, but collision events from skipped snapshots
        // are carried forward so none are lost.
        let mut pending_state: Option<ServerMessage> = None;
        let mut carried = Vec::new();
        for out in outbound.try_iter() {
            match out {
                Outbound::Send(ServerMessage::State(mut s)) => {
                    if let Some(ServerMessage::State(prev)) = pending_state.take() {
                        carried.extend(prev.events);
                    }
                    let mut events = std::mem::take(&mut carried);
                    events.append(&mut s.events);
                    s.events = events;
                    pending_state = Some(ServerMessage::State(s));
                }
                Outbound::Send(other) => {
                    if let Some(s) = pending_state.take() {
                        if ws.send(Message::Text(s.to_json())).is_err() {
                            return;
                        }
                    }
                    if ws.send(Message::Text(other.to_json())).is_err() {
                        return;
                    }
                }
                Outbound::Close => {
                    if let Some(s) = pending_state.take() {
                        let _ = ws.send(Message::Text(s.to_json()));
                    }
                    let _ = ws.close(None);
                    let _ = ws.flush();
                    return;
                }
            }
        }
        if let Some(s) = pending_state {
            if ws.send(Message::Text(s.to_json())).is_err() {
                return;
            }
        }
    }
}
