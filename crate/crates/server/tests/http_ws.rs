use std::time::{Duration, Instant};

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use futures_util::{SinkExt, StreamExt};
use pedsim_server::*;
use serde_json::{json, Value};
use tokio_tungstenite::tungstenite::Message;
use tower::ServiceExt;

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let res = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = res.status();
    (status, to_bytes(res.into_body(), usize::MAX).await.unwrap().to_vec())
}

async fn call_json(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (s, bytes) = call(app, method, uri, body).await;
    (s, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn spawn(cfg: ServerConfig) -> (Router, std::net::SocketAddr) {
    let app = router(cfg);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let served = app.clone();
    tokio::spawn(async move { axum::serve(listener, served).await.unwrap() });
    (app, addr)
}

fn parse(msg: Message) -> Option<ServerMessage> {
    match msg {
        Message::Text(t) => Some(serde_json::from_str(t.as_str()).unwrap()),
        _ => None,
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn session_over_http_and_websocket() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ServerConfig::new(dir.path());
    cfg.tick = Duration::from_millis(2);
    let (app, addr) = spawn(cfg).await;

    let (s, list) = call_json(&app, "GET", "/scenarios", None).await;
    assert_eq!(s, StatusCode::OK);
    let lot = list.as_array().unwrap().iter().find(|e| e["id"] == "parking_lot_entrance").unwrap();
    assert_eq!(lot["roles"], json!(["pedestrian", "vehicle"]));

    let (s, _) = call_json(&app, "POST", "/sessions", Some(json!({"scenario": "nope"}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    let (s, made) = call_json(&app, "POST", "/sessions", Some(json!({"scenario": "jaywalk", "seed": 11}))).await;
    assert_eq!(s, StatusCode::CREATED);
    let id = made["session_id"].as_str().unwrap().to_string();
    let (s, _) = call_json(&app, "POST", &format!("/sessions/{id}/start"), None).await;
    assert_eq!(s, StatusCode::CONFLICT);

    let url = |role: &str| format!("ws://{addr}/ws/{id}?role={role}");
    let (mut ped, _) = tokio_tungstenite::connect_async(url("pedestrian")).await.unwrap();
    let (mut obs, _) = tokio_tungstenite::connect_async(url("observer")).await.unwrap();
    // a second pedestrian is refused with an error event
    let (mut dup, _) = tokio_tungstenite::connect_async(url("pedestrian")).await.unwrap();
    let refused = parse(dup.next().await.unwrap().unwrap()).unwrap();
    assert!(matches!(refused, ServerMessage::Event(Event::Error { .. })));

    // wait for the lobby to show the pedestrian, then start
    loop {
        let (_, st) = call_json(&app, "GET", &format!("/sessions/{id}"), None).await;
        if st["connected"] == json!(["pedestrian"]) {
            break;
        }
        tokio::time::sleep(Duration::from_millis(5)).await;
    }
    let (s, st) = call_json(&app, "POST", &format!("/sessions/{id}/start"), None).await;
    assert_eq!(s, StatusCode::OK, "{st}");

    // the pedestrian streams a few inputs along the sidewalk, then idles
    let ped_task = tokio::spawn(async move {
        for seq in 1..=20u64 {
            let m = json!({"type": "input", "seq": seq, "client_time_ms": seq as f64, "role": "pedestrian",
                           "payload": {"move": [1.0, 0.0]}});
            ped.send(Message::Text(m.to_string().into())).await.unwrap();
        }
        let mut last = None;
        while let Some(Ok(m)) = ped.next().await {
            if let Some(ServerMessage::Event(Event::Finish(r))) = parse(m) {
                last = Some(r);
            }
        }
        last
    });

    let mut frames = Vec::new();
    let mut finish = None;
    while let Some(Ok(m)) = obs.next().await {
        match parse(m) {
            Some(ServerMessage::State(s)) => frames.push(s.frame),
            Some(ServerMessage::Event(Event::Finish(r))) => finish = Some(r),
            _ => {}
        }
    }
    let finish = finish.expect("finish event");
    assert_eq!(frames, (0..finish.frames).collect::<Vec<_>>());
    assert_eq!(ped_task.await.unwrap(), Some(finish.clone()));

    let (_, st) = call_json(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(st["state"], "finished");
    assert_eq!(st["inputs"]["accepted"], 20);

    let name = finish.scene.expect("long enough to keep").file_name().unwrap().to_string_lossy().into_owned();
    let (_, index) = call_json(&app, "GET", "/scenes", None).await;
    assert_eq!(index[0]["name"], name.as_str());
    assert_eq!(index[0]["seed"], 11);
    let (s, bytes) = call(&app, "GET", &format!("/scenes/{name}"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(bytes, std::fs::read(dir.path().join(&name)).unwrap());
    let (s, _) = call(&app, "GET", "/scenes/..%2F..%2Fetc%2Fpasswd", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn operator_stop_and_placeholder_page() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = spawn(ServerConfig::new(dir.path())).await;
    let (s, page) = call(&app, "GET", "/", None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(String::from_utf8(page).unwrap().contains("/scenarios"));

    let (_, made) = call_json(&app, "POST", "/sessions", None).await;
    let id = made["session_id"].as_str().unwrap();
    let (s, rec) = call_json(&app, "POST", &format!("/sessions/{id}/stop"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(rec["reason"], "operator-stop");
    assert!(rec["scene"].is_null());
    let (_, again) = call_json(&app, "POST", &format!("/sessions/{id}/stop"), None).await;
    assert_eq!(again, rec);
    let (s, _) = call_json(&app, "GET", "/sessions/zzz", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

/// 20 Hz wall-clock pacing, within 10 %, over a 5 s window.
#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn running_session_ticks_at_twenty_hertz() {
    let dir = tempfile::tempdir().unwrap();
    let spec = load_session_scenario("jaywalk", 12).unwrap();
    let core = SessionCore::new("pace", spec, dir.path().to_path_buf()).unwrap();
    let handle = spawn_session(core, Duration::from_millis(50));
    let (_, mut ped) = handle.connect(pedsim_core::agents::Role::Pedestrian).await.unwrap();
    handle.start().await.unwrap();
    let mut first = None;
    let mut count = 0u32;
    while let Some(text) = ped.recv().await {
        if !text.starts_with("{\"type\":\"state\"") {
            continue;
        }
        let now = Instant::now();
        let t0 = *first.get_or_insert(now);
        if now - t0 >= Duration::from_secs(5) {
            break;
        }
        count += 1;
    }
    handle.stop().await.unwrap();
    assert!((90..=110).contains(&count), "{count} states in 5 s");
}
