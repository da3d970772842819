use std::net::SocketAddr;
use std::time::{Duration, Instant};

use futures_util::{SinkExt, StreamExt};
use tokio::net::TcpStream;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

use skyhand_cli::serve::{serve, ServeOptions};
use skyhand_cli::CliResult;
use skyhand_core::orchestrator::{
    decode, encode, write_log, Body, Command, ControlMode, Hello, MoveTarget, Phase, ProtocolMessage, SessionConfig,
    SessionLog,
};

type Socket = WebSocketStream<MaybeTlsStream<TcpStream>>;

struct Server {
    addr: SocketAddr,
    stop: oneshot::Sender<()>,
    task: JoinHandle<CliResult<SessionLog>>,
}

impl Server {
    async fn start(rate: f64) -> Self {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        let (stop, rx) = oneshot::channel::<()>();
        let opts = ServeOptions { session: SessionConfig::default(), model: None, static_dir: None, rate };
        let task = tokio::spawn(serve(listener, opts, async move {
            let _ = rx.await;
        }));
        Server { addr, stop, task }
    }

    async fn connect(&self) -> Socket {
        connect_async(format!("ws://{}/ws", self.addr)).await.unwrap().0
    }

    async fn shutdown(self) -> SessionLog {
        self.stop.send(()).unwrap();
        tokio::time::timeout(Duration::from_secs(5), self.task).await.unwrap().unwrap().unwrap()
    }
}

struct Client {
    ws: Socket,
    seq: u64,
}

impl Client {
    async fn send(&mut self, body: Body) {
        let msg = ProtocolMessage { seq: self.seq, timestamp: 0.0, body };
        self.seq += 1;
        self.raw(encode(&msg)).await;
    }

    async fn raw(&mut self, text: String) {
        self.ws.send(Message::Text(text.into())).await.unwrap();
    }

    async fn recv(&mut self) -> Option<ProtocolMessage> {
        loop {
            let next = tokio::time::timeout(Duration::from_secs(5), self.ws.next()).await.expect("server replies");
            match next {
                Some(Ok(Message::Text(t))) => return Some(decode(&t).unwrap()),
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return None,
                Some(Ok(_)) => continue,
            }
        }
    }

    /// Next non-snapshot message.
    async fn reply(&mut self) -> Option<ProtocolMessage> {
        loop {
            let m = self.recv().await?;
            if !matches!(m.body, Body::Snapshot(_)) {
                return Some(m);
            }
        }
    }

    async fn until(&mut self, mut f: impl FnMut(&ProtocolMessage) -> bool) -> ProtocolMessage {
        loop {
            let m = self.recv().await.expect("connection open");
            if f(&m) {
                return m;
            }
        }
    }
}

async fn joined(server: &Server) -> Client {
    let mut c = Client { ws: server.connect().await, seq: 0 };
    c.send(Body::Hello(Hello::client())).await;
    c
}

fn phase_of(m: &ProtocolMessage) -> Option<Phase> {
    match &m.body {
        Body::Snapshot(s) => Some(s.phase),
        _ => None,
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn hello_handshake_reports_server_info() {
    let server = Server::start(1.0).await;
    let mut c = joined(&server).await;
    let m = c.reply().await.unwrap();
    let Body::Hello(h) = m.body else { panic!("expected hello, got {:?}", m.body) };
    assert_eq!(m.seq, 0);
    assert!(h.check().is_ok());
    let info = h.server.unwrap();
    assert_eq!(info.drones, SessionConfig::default().drones.len());
    assert!(info.dt > 0.0);

    let mut last = m.seq;
    for _ in 0..5 {
        let s = c.recv().await.unwrap();
        assert!(matches!(s.body, Body::Snapshot(_)));
        assert!(s.seq > last);
        last = s.seq;
    }
    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn version_mismatch_is_refused() {
    let server = Server::start(1.0).await;
    let mut c = Client { ws: server.connect().await, seq: 0 };
    let mut hello = Hello::client();
    hello.version += 1;
    c.send(Body::Hello(hello)).await;
    let m = c.reply().await.unwrap();
    let Body::Error(e) = m.body else { panic!("expected error") };
    assert_eq!(e.code, "version_mismatch");
    assert!(c.recv().await.is_none());
    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn first_message_must_be_hello() {
    let server = Server::start(1.0).await;
    let mut c = Client { ws: server.connect().await, seq: 0 };
    c.send(Body::Command(Command::TakeOff)).await;
    let Body::Error(e) = c.reply().await.unwrap().body else { panic!("expected error") };
    assert_eq!(e.code, "handshake");
    assert!(c.recv().await.is_none());
    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn bad_messages_get_error_replies() {
    let server = Server::start(1.0).await;
    let mut c = joined(&server).await;
    assert!(matches!(c.reply().await.unwrap().body, Body::Hello(_)));

    c.raw("{not json".into()).await;
    let Body::Error(e) = c.reply().await.unwrap().body else { panic!() };
    assert_eq!(e.code, "malformed");

    c.raw(r#"{"type":"teleport","seq":10,"timestamp":0.0,"payload":{}}"#.into()).await;
    let Body::Error(e) = c.reply().await.unwrap().body else { panic!() };
    assert_eq!(e.code, "unknown_type");

    c.seq = 0;
    c.send(Body::Command(Command::TakeOff)).await;
    let Body::Error(e) = c.reply().await.unwrap().body else { panic!() };
    assert_eq!(e.code, "out_of_sequence");

    c.seq = 20;
    c.send(Body::Hello(Hello::client())).await;
    let Body::Error(e) = c.reply().await.unwrap().body else { panic!() };
    assert_eq!(e.code, "unexpected");
    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn take_off_round_trip_and_log() {
    let server = Server::start(1.0).await;
    let mut c = joined(&server).await;
    c.reply().await.unwrap();
    c.until(|m| phase_of(m) == Some(Phase::Idle)).await;

    let sent = Instant::now();
    c.send(Body::Command(Command::TakeOff)).await;
    c.until(|m| phase_of(m) == Some(Phase::Armed)).await;
    let latency = sent.elapsed();
    assert!(latency < Duration::from_millis(100), "{latency:?}");

    c.send(Body::Command(Command::SelectMode { mode: ControlMode::SwarmControl })).await;
    c.until(|m| phase_of(m) == Some(Phase::SwarmControl)).await;

    let log = server.shutdown().await;
    assert!(log.entries.len() >= 2);
}

#[tokio::test(flavor = "multi_thread")]
async fn snapshots_reach_every_client() {
    let server = Server::start(4.0).await;
    let mut a = joined(&server).await;
    let mut b = joined(&server).await;
    a.reply().await.unwrap();
    b.reply().await.unwrap();
    a.send(Body::Command(Command::TakeOff)).await;
    b.until(|m| phase_of(m) == Some(Phase::Armed)).await;
    a.until(|m| phase_of(m) == Some(Phase::Armed)).await;

    b.send(Body::Command(Command::Move { target: MoveTarget::Pointer { x: 5.0, y: 5.0 } })).await;
    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn recorded_session_replays_identically() {
    let server = Server::start(4.0).await;
    let mut c = joined(&server).await;
    c.reply().await.unwrap();
    c.send(Body::Command(Command::TakeOff)).await;
    c.until(|m| phase_of(m) == Some(Phase::Armed)).await;
    c.send(Body::Command(Command::Land)).await;
    c.until(|m| phase_of(m) == Some(Phase::Landing)).await;
    let log = server.shutdown().await;

    let a = skyhand_core::orchestrator::replay(&log, None).unwrap();
    let b = skyhand_core::orchestrator::replay(&log, None).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().any(|s| s.phase == Phase::Landing));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("session.log");
    write_log(std::fs::File::create(&path).unwrap(), &log).unwrap();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_skyhand"))
        .args(["replay", path.to_str().unwrap(), "--format", "json"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stdout).lines().next().unwrap()).unwrap();
    assert_eq!(summary["ticks"].as_u64().unwrap(), a.len() as u64);
    assert_eq!(summary["final_phase"], a.last().unwrap().phase.name());

    let scenario = dir.path().join("session.toml");
    std::fs::write(&scenario, "[guidance]\nkind = \"session\"\nlog = \"session.log\"\n").unwrap();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_skyhand"))
        .args(["simulate", "--config", scenario.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[tokio::test(flavor = "multi_thread")]
async fn root_page_without_static_dir() {
    let server = Server::start(1.0).await;
    let mut stream = TcpStream::connect(server.addr).await.unwrap();
    use tokio::io::{AsyncReadExt, AsyncWriteExt};
    stream.write_all(b"GET / HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n").await.unwrap();
    let mut body = String::new();
    stream.read_to_string(&mut body).await.unwrap();
    assert!(body.starts_with("HTTP/1.1 200"));
    assert!(body.contains("/ws"));
    server.shutdown().await;
}
