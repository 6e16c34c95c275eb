//! WebSocket round trips against a live server on an ephemeral port.

use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use relay_cli::args::TrainArgs;
use relay_cli::serve::serve;
use relay_core::session::{Session, WireMessage};
use relay_core::trajectory::{parse_jsonl, ReadMode};
use relay_core::{SimConfig, Source};
use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::time::timeout;
use tokio_tungstenite::tungstenite::Message;

type Ws = tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<tokio::net::TcpStream>>;

fn cfg() -> SimConfig {
    SimConfig { frames: 1, events_per_frame: 100, frame_packets_per_ue: 40, ..Default::default() }
}

async fn recv(ws: &mut Ws) -> WireMessage {
    loop {
        let msg = timeout(Duration::from_secs(10), ws.next()).await.expect("server went quiet").unwrap().unwrap();
        if let Message::Text(t) = msg {
            return serde_json::from_str(t.as_str()).expect("server sends wire messages");
        }
    }
}

async fn send(ws: &mut Ws, msg: &str) {
    ws.send(Message::Text(msg.into())).await.unwrap();
}

async fn next_state(ws: &mut Ws) -> relay_core::session::Snapshot {
    loop {
        if let WireMessage::State(s) = recv(ws).await {
            return s;
        }
    }
}

struct Server {
    url: String,
    stop: oneshot::Sender<()>,
    handle: tokio::task::JoinHandle<anyhow::Result<Option<Vec<u8>>>>,
}

async fn start(session: Session<Vec<u8>>) -> Server {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let url = format!("ws://{}/ws", listener.local_addr().unwrap());
    let (stop, rx) = oneshot::channel::<()>();
    let handle = tokio::spawn(serve(listener, session, None, async {
        let _ = rx.await;
    }));
    Server { url, stop, handle }
}

async fn connect(url: &str) -> Ws {
    tokio_tungstenite::connect_async(url).await.unwrap().0
}

#[tokio::test]
async fn hello_select_pause_resume() {
    let cfg = cfg();
    let server = start(Session::recording(&cfg, 0, Vec::new()).unwrap()).await;
    let mut ws = connect(&server.url).await;

    assert_eq!(recv(&mut ws).await, WireMessage::Hello { n_ues: 5, sectors: 36, queue_limit: 200 });
    let first = next_state(&mut ws).await;
    assert_eq!(first.event, 0);
    assert!(first.q.iter().all(|&q| q == 0));

    // Default pacing is 2 events/s, so the select lands before the first event.
    send(&mut ws, r#"{"kind":"select","ue":3}"#).await;
    let s = next_state(&mut ws).await;
    assert_eq!(s.active_ue, 3);
    assert_eq!(s.event, 1);

    send(&mut ws, r#"{"kind":"select","ue":9}"#).await;
    match recv(&mut ws).await {
        WireMessage::Error { msg } => assert!(msg.contains("out of range"), "{msg}"),
        other => panic!("expected an error, got {other:?}"),
    }
    send(&mut ws, r#"{"kind":"hello","n_ues":1,"sectors":1,"queue_limit":1}"#).await;
    assert!(matches!(recv(&mut ws).await, WireMessage::Error { .. }));

    send(&mut ws, r#"{"kind":"pause"}"#).await;
    send(&mut ws, r#"{"kind":"speed","eps":200}"#).await;
    // Anything broadcast before the pause took effect is drained here.
    let mut last = s.event;
    while let Ok(Some(Ok(Message::Text(t)))) = timeout(Duration::from_millis(800), ws.next()).await {
        if let Ok(WireMessage::State(s)) = serde_json::from_str(t.as_str()) {
            last = s.event;
        }
    }
    assert!(last <= 2, "events kept running while paused: {last}");
    assert!(timeout(Duration::from_millis(300), ws.next()).await.is_err(), "paused server still broadcasting");

    send(&mut ws, r#"{"kind":"resume"}"#).await;
    let s = next_state(&mut ws).await;
    assert_eq!(s.event, last + 1);
    assert_eq!(s.active_ue, 3, "selection is sticky");

    server.stop.send(()).unwrap();
    let recording = server.handle.await.unwrap().unwrap().unwrap();
    let recs = parse_jsonl(recording.as_slice(), ReadMode::Strict).unwrap();
    assert!(recs.len() >= s.event);
    assert!(recs.iter().all(|r| r.source == Source::Human && r.a1 == 3));
}

#[tokio::test]
async fn human_session_trains_without_changes() {
    let cfg = cfg();
    let server = start(Session::recording(&cfg, 4, Vec::new()).unwrap()).await;
    let mut ws = connect(&server.url).await;
    recv(&mut ws).await;
    send(&mut ws, r#"{"kind":"speed","eps":1000}"#).await;

    let mut events = 0;
    while events < cfg.events_per_frame {
        let s = next_state(&mut ws).await;
        if s.event > 0 {
            events = s.event;
            if events % 20 == 0 {
                let ue = (events / 20) % cfg.n_ues;
                send(&mut ws, &format!(r#"{{"kind":"select","ue":{ue}}}"#)).await;
            }
        }
    }
    server.stop.send(()).unwrap();
    let recording = server.handle.await.unwrap().unwrap().unwrap();
    let recs = parse_jsonl(recording.as_slice(), ReadMode::Strict).unwrap();
    assert_eq!(recs.len(), 100);
    assert!(recs.iter().all(|r| r.source == Source::Human));
    assert!(recs.iter().map(|r| r.a1).collect::<std::collections::BTreeSet<_>>().len() > 1);

    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("human.jsonl");
    std::fs::write(&data, &recording).unwrap();
    let args = TrainArgs {
        data,
        model_out: dir.path().join("model.json"),
        history_out: dir.path().join("history.csv"),
        train_config: None,
        epochs: Some(2),
        batch_size: None,
        lr0: None,
        hidden: None,
        seed: None,
        active_ue_onehot: None,
        train_ratio: None,
        queue_limit: None,
        min_val_accuracy: None,
    };
    tokio::task::spawn_blocking(move || relay_cli::commands::train_cmd(&args)).await.unwrap().unwrap();
    assert!(dir.path().join("model.json").exists());
}

#[tokio::test]
async fn two_clients_see_the_same_broadcast() {
    let server = start(Session::recording(&cfg(), 1, Vec::new()).unwrap()).await;
    let mut a = connect(&server.url).await;
    let mut b = connect(&server.url).await;
    recv(&mut a).await;
    recv(&mut b).await;
    next_state(&mut a).await;
    next_state(&mut b).await;
    send(&mut a, r#"{"kind":"select","ue":2}"#).await;
    let (sa, sb) = (next_state(&mut a).await, next_state(&mut b).await);
    assert_eq!(sa, sb);
    assert_eq!(sa.active_ue, 2);
    server.stop.send(()).unwrap();
    server.handle.await.unwrap().unwrap();
}
