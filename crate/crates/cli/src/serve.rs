//! Live session over WebSocket at `/ws`.
//!
//! One task owns the session and ticks it on a fixed clock; connections feed it inputs
//! through a channel and receive every snapshot from a broadcast. A client must open with a
//! `hello` carrying the protocol version; the server answers with its own `hello`.

use std::future::Future;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use futures_util::{SinkExt, StreamExt};
use tokio::net::TcpListener;
use tokio::sync::{broadcast, mpsc, watch};
use tower_http::services::ServeDir;

use skyhand_core::gesture::Mlp;
use skyhand_core::orchestrator::{
    decode, encode, Body, ErrorReport, Hello, Input, ProtocolError, ProtocolMessage, SequenceTracker, ServerInfo,
    Session, SessionConfig, SessionLog, Snapshot, PROTOCOL_NAME, PROTOCOL_VERSION,
};

use crate::error::{CliError, CliResult};

pub struct ServeOptions {
    pub session: SessionConfig,
    pub model: Option<Mlp<f64>>,
    pub static_dir: Option<PathBuf>,
    /// Simulated seconds per wall-clock second.
    pub rate: f64,
}

#[derive(Debug, Clone)]
enum Outgoing {
    Snapshot(Arc<Snapshot>),
    Error(ErrorReport),
}

#[derive(Clone)]
struct AppState {
    inputs: mpsc::UnboundedSender<Input>,
    outgoing: broadcast::Sender<Outgoing>,
    info: ServerInfo,
    started: Instant,
    stop: watch::Receiver<bool>,
}

const BROADCAST_DEPTH: usize = 256;

/// Serves until `shutdown` resolves, then returns the session log.
pub async fn serve(
    listener: TcpListener,
    opts: ServeOptions,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> CliResult<SessionLog> {
    let mut session = Session::new(opts.session.clone()).map_err(|e| CliError::config("session", e))?;
    if let Some(m) = opts.model {
        session = session.with_classifier(m);
    }
    let cfg = session.config();
    let info = ServerInfo { drones: cfg.drones.len(), dt: cfg.sim.dt, zone: cfg.zone, screen: cfg.calibration.screen };
    let period = Duration::from_secs_f64(cfg.sim.dt / opts.rate);

    let (input_tx, input_rx) = mpsc::unbounded_channel();
    let (out_tx, _) = broadcast::channel(BROADCAST_DEPTH);
    let (stop_tx, stop_rx) = watch::channel(false);
    let state =
        AppState { inputs: input_tx, outgoing: out_tx.clone(), info, started: Instant::now(), stop: stop_rx.clone() };

    let control = tokio::spawn(control_loop(session, input_rx, out_tx, period, stop_rx.clone()));

    let mut app = Router::new().route("/ws", get(upgrade));
    app = match &opts.static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.route("/", get(|| async { "skyhand protocol endpoint: /ws\n" })),
    };
    let app = app.with_state(state);

    let mut server_stop = stop_rx.clone();
    let server = axum::serve(listener, app).with_graceful_shutdown(async move {
        stopped(&mut server_stop).await;
    });
    let server = tokio::spawn(async move { server.await });

    shutdown.await;
    let _ = stop_tx.send(true);
    let log = control.await.map_err(|e| CliError::runtime("control loop", e))??;
    server.await.map_err(|e| CliError::runtime("server", e))?.map_err(|e| CliError::runtime("server", e))?;
    Ok(log)
}

async fn control_loop(
    mut session: Session,
    mut inputs: mpsc::UnboundedReceiver<Input>,
    out: broadcast::Sender<Outgoing>,
    period: Duration,
    mut stop: watch::Receiver<bool>,
) -> CliResult<SessionLog> {
    let mut clock = tokio::time::interval(period);
    clock.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
    loop {
        tokio::select! {
            _ = clock.tick() => {
                while let Ok(input) = inputs.try_recv() {
                    session.push(input);
                }
                match session.tick() {
                    Ok(snap) => {
                        let _ = out.send(Outgoing::Snapshot(Arc::new(snap)));
                    }
                    Err(e) => {
                        let _ = out.send(Outgoing::Error(ErrorReport { code: "session_fault".into(), message: e.to_string() }));
                        return Err(CliError::runtime("session", e));
                    }
                }
            }
            _ = stopped(&mut stop) => break,
        }
    }
    Ok(session.log())
}

async fn stopped(rx: &mut watch::Receiver<bool>) {
    let _ = rx.wait_for(|s| *s).await.is_ok();
}

async fn upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| connection(socket, state))
}

fn error_code(e: &ProtocolError) -> &'static str {
    match e {
        ProtocolError::Malformed(_) => "malformed",
        ProtocolError::UnknownType(_) => "unknown_type",
        ProtocolError::OutOfSequence { .. } => "out_of_sequence",
        ProtocolError::VersionMismatch { .. } => "version_mismatch",
    }
}

struct Outbox {
    seq: SequenceTracker,
    started: Instant,
}

impl Outbox {
    fn wrap(&mut self, body: Body) -> Message {
        let msg = ProtocolMessage { seq: self.seq.issue(), timestamp: self.started.elapsed().as_secs_f64(), body };
        Message::Text(encode(&msg).into())
    }

    fn error(&mut self, code: &str, message: impl Into<String>) -> Message {
        self.wrap(Body::Error(ErrorReport { code: code.into(), message: message.into() }))
    }
}

/// Reads the client's opening `hello`; `Err` carries the message to send before closing.
async fn handshake(
    socket: &mut futures_util::stream::SplitStream<WebSocket>,
    inbound: &mut SequenceTracker,
    outbox: &mut Outbox,
) -> Result<(), Message> {
    loop {
        let text = match socket.next().await {
            Some(Ok(Message::Text(t))) => t,
            Some(Ok(Message::Close(_))) | None | Some(Err(_)) => {
                return Err(Message::Close(None));
            }
            Some(Ok(_)) => continue,
        };
        let msg = decode(&text).map_err(|e| outbox.error(error_code(&e), e.to_string()))?;
        inbound.check(msg.seq).map_err(|e| outbox.error(error_code(&e), e.to_string()))?;
        return match msg.body {
            Body::Hello(h) => h.check().map_err(|e| outbox.error(error_code(&e), e.to_string())),
            other => Err(outbox.error("handshake", format!("expected hello, got {}", other.kind().name()))),
        };
    }
}

async fn connection(socket: WebSocket, state: AppState) {
    let (mut tx, mut rx) = socket.split();
    let mut outbox = Outbox { seq: SequenceTracker::default(), started: state.started };
    let mut inbound = SequenceTracker::default();
    let mut stop = state.stop.clone();

    if let Err(reply) = handshake(&mut rx, &mut inbound, &mut outbox).await {
        let _ = tx.send(reply).await;
        let _ = tx.close().await;
        return;
    }
    let hello = Hello { protocol: PROTOCOL_NAME.into(), version: PROTOCOL_VERSION, server: Some(state.info) };
    let mut feed = state.outgoing.subscribe();
    if tx.send(outbox.wrap(Body::Hello(hello))).await.is_err() {
        return;
    }

    loop {
        tokio::select! {
            incoming = rx.next() => {
                let text = match incoming {
                    Some(Ok(Message::Text(t))) => t,
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                    Some(Ok(_)) => continue,
                };
                let reply = match decode(&text) {
                    Err(e) => Some(outbox.error(error_code(&e), e.to_string())),
                    Ok(msg) => match inbound.check(msg.seq) {
                        Err(e) => Some(outbox.error(error_code(&e), e.to_string())),
                        Ok(()) => match msg.body {
                            Body::Command(c) => {
                                let _ = state.inputs.send(Input::Command { command: c });
                                None
                            }
                            Body::LandmarkFrame(frame) => {
                                let _ = state.inputs.send(Input::LandmarkFrame { frame });
                                None
                            }
                            other => Some(outbox.error(
                                "unexpected",
                                format!("clients may not send {}", other.kind().name()),
                            )),
                        },
                    },
                };
                if let Some(r) = reply {
                    if tx.send(r).await.is_err() {
                        break;
                    }
                }
            }
            item = feed.recv() => {
                let body = match item {
                    Ok(Outgoing::Snapshot(s)) => Body::Snapshot(Box::new((*s).clone())),
                    Ok(Outgoing::Error(e)) => Body::Error(e),
                    Err(broadcast::error::RecvError::Lagged(_)) => continue,
                    Err(broadcast::error::RecvError::Closed) => break,
                };
                if tx.send(outbox.wrap(body)).await.is_err() {
                    break;
                }
            }
            _ = stopped(&mut stop) => break,
        }
    }
    let _ = tx.close().await;
}
