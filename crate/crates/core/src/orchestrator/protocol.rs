//! Wire protocol: one JSON text frame per message,
//! `{"type": ..., "seq": n, "timestamp": s, "payload": {...}}`. Sequence numbers strictly
//! increase per direction.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::{Command, Snapshot};
use crate::formation::TargetingReport;
use crate::gesture::{FlightZone, LandmarkFrame};
use crate::sim::TraceFrame;
use crate::trajectory::TraceErrorReport;

pub const PROTOCOL_NAME: &str = "skyhand";
pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum ProtocolError {
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("unknown message type `{0}`")]
    UnknownType(String),
    #[error("sequence {got} does not follow {last}")]
    OutOfSequence { last: u64, got: u64 },
    #[error("protocol version {0} is not supported")]
    VersionMismatch(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    Hello,
    Command,
    LandmarkFrame,
    Snapshot,
    Metrics,
    Error,
    TraceChunk,
}

impl MessageKind {
    pub const ALL: [MessageKind; 7] = [
        MessageKind::Hello,
        MessageKind::Command,
        MessageKind::LandmarkFrame,
        MessageKind::Snapshot,
        MessageKind::Metrics,
        MessageKind::Error,
        MessageKind::TraceChunk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MessageKind::Hello => "hello",
            MessageKind::Command => "command",
            MessageKind::LandmarkFrame => "landmark_frame",
            MessageKind::Snapshot => "snapshot",
            MessageKind::Metrics => "metrics",
            MessageKind::Error => "error",
            MessageKind::TraceChunk => "trace_chunk",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServerInfo {
    pub drones: usize,
    pub dt: f64,
    pub zone: FlightZone<f64>,
    pub screen: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hello {
    pub protocol: String,
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub server: Option<ServerInfo>,
}

impl Hello {
    pub fn client() -> Self {
        Self { protocol: PROTOCOL_NAME.to_string(), version: PROTOCOL_VERSION, server: None }
    }

    pub fn check(&self) -> Result<(), ProtocolError> {
        if self.protocol != PROTOCOL_NAME {
            return Err(ProtocolError::Malformed(format!("unknown protocol `{}`", self.protocol)));
        }
        if self.version != PROTOCOL_VERSION {
            return Err(ProtocolError::VersionMismatch(self.version));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricsReport {
    Tracing(TraceErrorReport),
    Targeting(TargetingReport),
    Separation { min_distance: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceChunk {
    pub frames: Vec<TraceFrame<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Hello(Hello),
    Command(Command),
    LandmarkFrame(LandmarkFrame<f64>),
    Snapshot(Box<Snapshot>),
    Metrics(MetricsReport),
    Error(ErrorReport),
    TraceChunk(TraceChunk),
}

impl Body {
    pub fn kind(&self) -> MessageKind {
        match self {
            Body::Hello(_) => MessageKind::Hello,
            Body::Command(_) => MessageKind::Command,
            Body::LandmarkFrame(_) => MessageKind::LandmarkFrame,
            Body::Snapshot(_) => MessageKind::Snapshot,
            Body::Metrics(_) => MessageKind::Metrics,
            Body::Error(_) => MessageKind::Error,
            Body::TraceChunk(_) => MessageKind::TraceChunk,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolMessage {
    pub seq: u64,
    pub timestamp: f64,
    pub body: Body,
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    #[serde(rename = "type")]
    kind: String,
    seq: u64,
    timestamp: f64,
    payload: Value,
}

fn to_value<S: Serialize>(s: &S) -> Value {
    serde_json::to_value(s).expect("protocol payloads serialize")
}

pub fn encode(msg: &ProtocolMessage) -> String {
    let payload = match &msg.body {
        Body::Hello(h) => to_value(h),
        Body::Command(c) => to_value(c),
        Body::LandmarkFrame(f) => to_value(f),
        Body::Snapshot(s) => to_value(s),
        Body::Metrics(m) => to_value(m),
        Body::Error(e) => to_value(e),
        Body::TraceChunk(c) => to_value(c),
    };
    let env = Envelope { kind: msg.body.kind().name().to_string(), seq: msg.seq, timestamp: msg.timestamp, payload };
    serde_json::to_string(&env).expect("envelope serializes")
}

pub fn decode(text: &str) -> Result<ProtocolMessage, ProtocolError> {
    let env: Envelope = serde_json::from_str(text).map_err(|e| ProtocolError::Malformed(e.to_string()))?;
    let kind = MessageKind::ALL
        .into_iter()
        .find(|k| k.name() == env.kind)
        .ok_or_else(|| ProtocolError::UnknownType(env.kind.clone()))?;
    fn from<D: serde::de::DeserializeOwned>(v: Value) -> Result<D, ProtocolError> {
        serde_json::from_value(v).map_err(|e| ProtocolError::Malformed(e.to_string()))
    }
    let p = env.payload;
    let body = match kind {
        MessageKind::Hello => Body::Hello(from(p)?),
        MessageKind::Command => Body::Command(from(p)?),
        MessageKind::LandmarkFrame => {
            let frame: LandmarkFrame<f64> = from(p)?;
            frame.validate().map_err(|e| ProtocolError::Malformed(e.to_string()))?;
            Body::LandmarkFrame(frame)
        }
        MessageKind::Snapshot => Body::Snapshot(Box::new(from(p)?)),
        MessageKind::Metrics => Body::Metrics(from(p)?),
        MessageKind::Error => Body::Error(from(p)?),
        MessageKind::TraceChunk => Body::TraceChunk(from(p)?),
    };
    Ok(ProtocolMessage { seq: env.seq, timestamp: env.timestamp, body })
}

/// Checks that sequence numbers in one direction strictly increase.
#[derive(Debug, Clone, Copy, Default)]
pub struct SequenceTracker {
    last: Option<u64>,
}

impl SequenceTracker {
    pub fn check(&mut self, seq: u64) -> Result<(), ProtocolError> {
        if let Some(last) = self.last {
            if seq <= last {
                return Err(ProtocolError::OutOfSequence { last, got: seq });
            }
        }
        self.last = Some(seq);
        Ok(())
    }

    /// Next number for an outgoing message.
    pub fn issue(&mut self) -> u64 {
        let n = self.last.map_or(0, |l| l + 1);
        self.last = Some(n);
        n
    }
}
