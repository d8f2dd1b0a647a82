//! Live training sessions over WebSocket.
//!
//! Each connection gets its own session on the scenario the server was
//! started with. After the handshake the client sends inputs and a
//! `start` message; the server then ticks the simulation, streams snapshots
//! and finishes with a report. See [`protocol`] for the message shapes.
//!
//! Two pacings are available. [`Pacing::RealTime`] advances one tick per
//! `tick_dt` of wall-clock time and uses the most recent input each tick.
//! [`Pacing::Lockstep`] advances exactly one tick per input message, which
//! lets scripted clients drive a session tick by tick.

pub mod protocol;

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use firedrill_core::assessment::{build_report, AssessmentReport};
use firedrill_core::scenario::{scenario_to_value, Scenario};
use firedrill_core::session::{serialize_log, Recorder, SessionError, SessionLog};
use firedrill_core::sim::InputSample;
use futures_util::{SinkExt, StreamExt};
use thiserror::Error;
use tokio::io::{AsyncRead, AsyncWrite};
use tokio::net::TcpListener;
use tokio::time::MissedTickBehavior;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::WebSocketStream;

use protocol::{ClientMessage, Hello, HelloReply, ServerMessage, Snapshot, PROTOCOL_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pacing {
    #[default]
    RealTime,
    Lockstep,
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub pacing: Pacing,
    /// Send a snapshot every this many ticks (and always on the last one).
    pub snapshot_every: u64,
    /// Where finished and aborted sessions are written; `None` keeps nothing.
    pub log_dir: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            pacing: Pacing::RealTime,
            snapshot_every: 2,
            log_dir: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("websocket: {0}")]
    Ws(#[from] tokio_tungstenite::tungstenite::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("client left before the handshake")]
    NoHandshake,
    #[error(transparent)]
    Session(#[from] SessionError),
}

/// What a connection produced.
#[derive(Debug, Clone)]
pub struct SessionSummary {
    pub log: SessionLog,
    /// Present when the session ran to success or timeout.
    pub report: Option<AssessmentReport>,
    pub log_path: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
}

/// Accepts connections until the listener fails; one task per connection.
pub async fn serve(
    listener: TcpListener,
    scenario: Arc<Scenario>,
    config: Arc<ServerConfig>,
) -> std::io::Result<()> {
    loop {
        let (tcp, peer) = listener.accept().await?;
        let scenario = Arc::clone(&scenario);
        let config = Arc::clone(&config);
        tokio::spawn(async move {
            let ws = match tokio_tungstenite::accept_async(tcp).await {
                Ok(ws) => ws,
                Err(e) => {
                    tracing::warn!(%peer, "websocket upgrade failed: {e}");
                    return;
                }
            };
            match run_connection(ws, &scenario, &config).await {
                Ok(summary) => tracing::info!(
                    %peer,
                    outcome = ?summary.log.outcome,
                    ticks = summary.log.ticks(),
                    log = ?summary.log_path,
                    report = ?summary.report_path,
                    "session finished"
                ),
                Err(e) => tracing::warn!(%peer, "session failed: {e}"),
            }
        });
    }
}

enum Inbound {
    Message(ClientMessage),
    Gone,
}

/// Latest input seen since the last tick.
struct Mailbox {
    latest: Option<InputSample>,
    /// A selection from an input that was later overwritten in the same tick.
    pending_select: Option<String>,
    previous: InputSample,
}

impl Mailbox {
    fn new() -> Self {
        Self {
            latest: None,
            pending_select: None,
            previous: InputSample::idle(),
        }
    }

    fn put(&mut self, sample: InputSample) {
        if let Some(old) = self.latest.take() {
            if old.select.is_some() {
                self.pending_select = old.select;
            }
        }
        self.latest = Some(sample);
    }

    /// The sample for the next tick: the newest input, or the previous one
    /// again without its selection.
    fn take(&mut self) -> InputSample {
        let mut sample = self.latest.take().unwrap_or_else(|| InputSample {
            select: None,
            ..self.previous.clone()
        });
        if sample.select.is_none() {
            sample.select = self.pending_select.take();
        }
        self.pending_select = None;
        self.previous = sample.clone();
        sample
    }
}

struct Connection<S> {
    ws: WebSocketStream<S>,
}

impl<S: AsyncRead + AsyncWrite + Unpin> Connection<S> {
    async fn send(&mut self, msg: &ServerMessage) -> Result<(), ServerError> {
        self.ws.send(Message::text(msg.to_json())).await?;
        Ok(())
    }

    async fn fail(&mut self, text: String) -> ServerError {
        // the peer may already be gone; the protocol error is what matters
        let _ = self.send(&ServerMessage::Error(text.clone())).await;
        let _ = self.ws.close(None).await;
        ServerError::Protocol(text)
    }

    async fn next_text(&mut self) -> Result<Option<String>, ServerError> {
        loop {
            match self.ws.next().await {
                None | Some(Ok(Message::Close(_))) => return Ok(None),
                Some(Err(e)) => {
                    tracing::debug!("read failed: {e}");
                    return Ok(None);
                }
                Some(Ok(Message::Text(t))) => return Ok(Some(t.as_str().to_owned())),
                Some(Ok(Message::Ping(_) | Message::Pong(_) | Message::Frame(_))) => continue,
                Some(Ok(Message::Binary(_))) => {
                    return Err(self.fail("binary frames are not supported".into()).await)
                }
            }
        }
    }

    async fn next_message(&mut self) -> Result<Inbound, ServerError> {
        let Some(text) = self.next_text().await? else {
            return Ok(Inbound::Gone);
        };
        let msg: ClientMessage = match serde_json::from_str(&text) {
            Ok(m) => m,
            Err(e) => return Err(self.fail(format!("malformed message: {e}")).await),
        };
        if let ClientMessage::Input(sample) = &msg {
            if let Err(reason) = sample.check() {
                return Err(self.fail(format!("bad input: {reason}")).await);
            }
        }
        Ok(Inbound::Message(msg))
    }

    async fn handshake(&mut self, scenario: &Scenario) -> Result<(), ServerError> {
        let Some(text) = self.next_text().await? else {
            return Err(ServerError::NoHandshake);
        };
        match serde_json::from_str::<Hello>(&text) {
            Ok(Hello { hello }) if hello == PROTOCOL_VERSION => {}
            Ok(Hello { hello }) => {
                return Err(self
                    .fail(format!("unsupported protocol version {hello}"))
                    .await)
            }
            Err(_) => return Err(self.fail("expected {\"hello\":1}".into()).await),
        }
        let reply = HelloReply {
            hello: PROTOCOL_VERSION,
            scenario: scenario_to_value(scenario),
        };
        let text = serde_json::to_string(&reply).expect("hello reply serializes");
        self.ws.send(Message::text(text)).await?;
        Ok(())
    }
}

enum End {
    Finished,
    Aborted,
    Dropped,
}

/// Runs one session on an accepted WebSocket and persists the result.
///
/// A client that leaves or aborts still gets its partial log written, marked
/// aborted. Protocol violations are answered with an error message, the
/// connection is closed and the partial log is written too.
pub async fn run_connection<S: AsyncRead + AsyncWrite + Unpin>(
    ws: WebSocketStream<S>,
    scenario: &Scenario,
    config: &ServerConfig,
) -> Result<SessionSummary, ServerError> {
    let mut conn = Connection { ws };
    conn.handshake(scenario).await?;

    let mut rec = Recorder::new(scenario)?;
    let mut mailbox = Mailbox::new();
    let result = drive(&mut conn, &mut rec, &mut mailbox, scenario, config).await;
    let (_, log) = rec.finish();

    let end = match result {
        Ok(end) => end,
        Err(e) => {
            persist(config.log_dir.as_deref(), &log, None)?;
            return Err(e);
        }
    };
    let report = match end {
        End::Finished => Some(build_report(&log, scenario).map_err(SessionError::from)?),
        End::Aborted | End::Dropped => None,
    };
    let (log_path, report_path) = persist(config.log_dir.as_deref(), &log, report.as_ref())?;

    match (&end, &report) {
        (End::Finished, Some(r)) => {
            conn.send(&ServerMessage::Report(Box::new(r.clone())))
                .await?;
            let _ = conn.ws.close(None).await;
        }
        (End::Aborted, _) => {
            let _ = conn
                .send(&ServerMessage::Error("session aborted".into()))
                .await;
            let _ = conn.ws.close(None).await;
        }
        _ => {}
    }

    Ok(SessionSummary {
        log,
        report,
        log_path,
        report_path,
    })
}

async fn drive<S: AsyncRead + AsyncWrite + Unpin>(
    conn: &mut Connection<S>,
    rec: &mut Recorder<'_>,
    mailbox: &mut Mailbox,
    scenario: &Scenario,
    config: &ServerConfig,
) -> Result<End, ServerError> {
    // waiting room: inputs queue up until start
    loop {
        match conn.next_message().await? {
            Inbound::Gone => return Ok(End::Dropped),
            Inbound::Message(ClientMessage::Abort(_)) => return Ok(End::Aborted),
            Inbound::Message(ClientMessage::Input(sample)) => mailbox.put(sample),
            Inbound::Message(ClientMessage::Start(_)) => break,
        }
    }
    conn.send(&ServerMessage::Snap(Snapshot::of(rec.state(), scenario)))
        .await?;

    match config.pacing {
        Pacing::Lockstep => loop {
            match conn.next_message().await? {
                Inbound::Gone => return Ok(End::Dropped),
                Inbound::Message(ClientMessage::Abort(_)) => return Ok(End::Aborted),
                Inbound::Message(ClientMessage::Start(_)) => {}
                Inbound::Message(ClientMessage::Input(sample)) => {
                    mailbox.put(sample);
                    if tick(conn, rec, mailbox, scenario, config).await? {
                        return Ok(End::Finished);
                    }
                }
            }
        },
        Pacing::RealTime => {
            let mut clock = tokio::time::interval(Duration::from_secs_f64(scenario.tick_dt));
            clock.set_missed_tick_behavior(MissedTickBehavior::Delay);
            clock.tick().await;
            loop {
                tokio::select! {
                    biased;
                    inbound = conn.next_message() => match inbound? {
                        Inbound::Gone => return Ok(End::Dropped),
                        Inbound::Message(ClientMessage::Abort(_)) => return Ok(End::Aborted),
                        Inbound::Message(ClientMessage::Start(_)) => {}
                        Inbound::Message(ClientMessage::Input(sample)) => mailbox.put(sample),
                    },
                    _ = clock.tick() => {
                        if tick(conn, rec, mailbox, scenario, config).await? {
                            return Ok(End::Finished);
                        }
                    }
                }
            }
        }
    }
}

/// Advances one tick; true once the session is over.
async fn tick<S: AsyncRead + AsyncWrite + Unpin>(
    conn: &mut Connection<S>,
    rec: &mut Recorder<'_>,
    mailbox: &mut Mailbox,
    scenario: &Scenario,
    config: &ServerConfig,
) -> Result<bool, ServerError> {
    rec.push(mailbox.take())?;
    let state = rec.state();
    let done = rec.is_finished();
    if done || state.tick % config.snapshot_every.max(1) == 0 {
        conn.send(&ServerMessage::Snap(Snapshot::of(state, scenario)))
            .await?;
    }
    Ok(done)
}

static SESSION_SEQ: AtomicU64 = AtomicU64::new(0);

fn persist(
    dir: Option<&Path>,
    log: &SessionLog,
    report: Option<&AssessmentReport>,
) -> std::io::Result<(Option<PathBuf>, Option<PathBuf>)> {
    let Some(dir) = dir else {
        return Ok((None, None));
    };
    std::fs::create_dir_all(dir)?;
    let millis = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis());
    let stem = format!(
        "{}-{millis}-{}",
        log.scenario_id,
        SESSION_SEQ.fetch_add(1, Ordering::Relaxed)
    );
    let log_path = dir.join(format!("{stem}.fslog"));
    std::fs::write(&log_path, serialize_log(log))?;
    let report_path = match report {
        Some(r) => {
            let p = dir.join(format!("{stem}.report.json"));
            std::fs::write(&p, r.to_json())?;
            Some(p)
        }
        None => None,
    };
    Ok((Some(log_path), report_path))
}
