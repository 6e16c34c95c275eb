//! WebSocket front for a [`Session`].
//!
//! One owner task holds the session and is the only code that touches it.
//! Client tasks talk to it through an inbound channel and receive
//! serialized snapshots through per-client outbound channels.

use std::collections::HashMap;
use std::future::Future;
use std::io::Write;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use anyhow::Result;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use futures_util::{SinkExt, StreamExt};
use relay_core::session::{parse_command, Session, WireMessage};
use tokio::net::TcpListener;
use tokio::sync::{mpsc, oneshot};
use tokio::time::{sleep_until, Instant};
use tower_http::services::ServeDir;

enum Inbound {
    Connected { id: u64, tx: mpsc::UnboundedSender<String> },
    Text { id: u64, text: String },
    Gone { id: u64 },
}

#[derive(Clone)]
struct AppState {
    inbound: mpsc::UnboundedSender<Inbound>,
    next_id: Arc<AtomicU64>,
}

fn router(inbound: mpsc::UnboundedSender<Inbound>, static_dir: Option<PathBuf>) -> Router {
    let app = Router::new()
        .route("/ws", get(ws_handler))
        .with_state(AppState { inbound, next_id: Arc::new(AtomicU64::new(0)) });
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

async fn ws_handler(ws: WebSocketUpgrade, State(app): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| client(socket, app))
}

async fn client(socket: WebSocket, app: AppState) {
    let id = app.next_id.fetch_add(1, Ordering::Relaxed);
    let (tx, mut rx) = mpsc::unbounded_channel::<String>();
    if app.inbound.send(Inbound::Connected { id, tx }).is_err() {
        return;
    }
    let (mut sink, mut stream) = socket.split();
    let writer = tokio::spawn(async move {
        while let Some(text) = rx.recv().await {
            if sink.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
    });
    while let Some(Ok(msg)) = stream.next().await {
        match msg {
            Message::Text(t) => {
                if app.inbound.send(Inbound::Text { id, text: t.to_string() }).is_err() {
                    break;
                }
            }
            Message::Close(_) => break,
            _ => {}
        }
    }
    let _ = app.inbound.send(Inbound::Gone { id });
    writer.abort();
}

fn tick_period(speed: f64) -> Duration {
    Duration::from_secs_f64(1.0 / speed)
}

/// Steps the session at its pacing, applies client commands and broadcasts
/// a snapshot after every event. Returns the session when `stop` fires.
async fn own_session<W: Write>(
    mut session: Session<W>,
    mut inbound: mpsc::UnboundedReceiver<Inbound>,
    mut stop: oneshot::Receiver<()>,
) -> Result<Session<W>> {
    let n_ues = session.world().config().n_ues;
    let mut clients: HashMap<u64, mpsc::UnboundedSender<String>> = HashMap::new();
    let mut next_tick = Instant::now() + tick_period(session.speed());
    loop {
        tokio::select! {
            _ = &mut stop => break,
            msg = inbound.recv() => match msg {
                Some(Inbound::Connected { id, tx }) => {
                    session.client_connected();
                    let _ = tx.send(session.hello().to_json());
                    let _ = tx.send(WireMessage::State(session.snapshot()).to_json());
                    clients.insert(id, tx);
                }
                Some(Inbound::Text { id, text }) => match parse_command(&text, n_ues) {
                    Ok(cmd) => session.submit(cmd),
                    Err(msg) => {
                        if let Some(tx) = clients.get(&id) {
                            let _ = tx.send(WireMessage::error(msg).to_json());
                        }
                    }
                },
                Some(Inbound::Gone { id }) => {
                    clients.remove(&id);
                    session.client_disconnected();
                }
                None => break,
            },
            _ = sleep_until(next_tick) => {
                if let Some(snap) = session.tick()? {
                    let text = WireMessage::State(snap).to_json();
                    clients.retain(|_, tx| tx.send(text.clone()).is_ok());
                }
                next_tick = Instant::now() + tick_period(session.speed());
            }
        }
    }
    Ok(session)
}

/// Serves `session` on `listener` until `shutdown` resolves, then returns
/// the flushed recording, if the session had one.
pub async fn serve<W, S>(
    listener: TcpListener,
    session: Session<W>,
    static_dir: Option<PathBuf>,
    shutdown: S,
) -> Result<Option<W>>
where
    W: Write + Send + 'static,
    S: Future<Output = ()> + Send + 'static,
{
    let (in_tx, in_rx) = mpsc::unbounded_channel();
    let (stop_tx, stop_rx) = oneshot::channel();
    let owner = tokio::spawn(own_session(session, in_rx, stop_rx));
    let app = router(in_tx, static_dir);
    axum::serve(listener, app)
        .with_graceful_shutdown(async move {
            shutdown.await;
            let _ = stop_tx.send(());
        })
        .await?;
    let session = owner.await??;
    Ok(session.into_recording()?)
}
