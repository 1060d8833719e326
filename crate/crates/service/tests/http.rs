use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::mpsc;
use std::time::Duration;

use geo_oracle_core::oracle::{Oracle, OracleConfig};
use geo_oracle_core::snapshot::load_store;
use geo_oracle_core::spatial_index::build_index;
use geo_oracle_service::{run, serve, ServiceConfig, ServiceError};
use tokio::net::TcpListener;
use tokio::sync::oneshot;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn boston() -> Oracle {
    Oracle::new(build_index(load_store(fixture("boston_mini.fixture")).unwrap()).unwrap(), OracleConfig::default())
}

async fn post(client: &reqwest::Client, addr: SocketAddr, body: &str) -> (u16, String) {
    let r = client.post(format!("http://{addr}/query")).body(body.to_owned()).send().await.unwrap();
    (r.status().as_u16(), r.text().await.unwrap())
}

async fn health(client: &reqwest::Client, addr: SocketAddr) -> u16 {
    client.get(format!("http://{addr}/health")).send().await.unwrap().status().as_u16()
}

const CAFES5: &str = r#"{"function":"nodesInArea","key":"amenity","value":"cafe","area":"Boston","limit":5}"#;

#[tokio::test(flavor = "multi_thread")]
async fn readiness_then_queries() {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let (go_tx, go_rx) = mpsc::channel::<()>();
    let (stop_tx, stop_rx) = oneshot::channel::<()>();
    let server = tokio::spawn(run(
        listener,
        move || {
            go_rx.recv().unwrap();
            Ok(boston())
        },
        async {
            let _ = stop_rx.await;
        },
    ));
    let client = reqwest::Client::new();

    assert_eq!(health(&client, addr).await, 503);
    let (status, body) = post(&client, addr, CAFES5).await;
    assert_eq!(status, 503);
    assert!(body.contains("NotReady"));

    go_tx.send(()).unwrap();
    let mut ready = false;
    for _ in 0..200 {
        if health(&client, addr).await == 200 {
            ready = true;
            break;
        }
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    assert!(ready);

    let expected = boston().handle_json(CAFES5.as_bytes());
    let (status, body) = post(&client, addr, CAFES5).await;
    assert_eq!((status, body.as_str()), (200, expected.as_str()));
    for _ in 0..20 {
        assert_eq!(post(&client, addr, CAFES5).await.1, expected);
    }

    for (doc, status, code) in [
        (r#"{"function":"teleport"}"#, 400, "UnknownFunction"),
        (r#"{"function":"nodesInArea","key":"amenity","value":"cafe","area":"Boston","limit":0}"#, 400, "InvalidLimit"),
        (r#"{"function":"nodesInArea","key":"amenity","value":"cafe","area":"Gotham","limit":1}"#, 404, "AreaNotFound"),
        (r#"{"function":"wayCount","ID":12}"#, 404, "ObjectNotFound"),
        ("not json", 400, "BadRequest"),
    ] {
        let (got, body) = post(&client, addr, doc).await;
        assert_eq!(got, status, "{doc}");
        let v: serde_json::Value = serde_json::from_str(&body).unwrap();
        assert_eq!(v["error"]["code"], code, "{doc}");
    }

    stop_tx.send(()).unwrap();
    server.await.unwrap().unwrap();
}

#[tokio::test(flavor = "multi_thread")]
async fn load_failure_stops_the_server() {
    let dir = tempfile::tempdir().unwrap();
    let config = ServiceConfig {
        bind: "127.0.0.1:0".into(),
        store: dir.path().join("missing.store"),
        oracle: OracleConfig::default(),
    };
    let err = tokio::time::timeout(Duration::from_secs(10), serve(config)).await.unwrap().unwrap_err();
    assert!(matches!(err, ServiceError::Load(_)), "{err}");
}

#[tokio::test(flavor = "multi_thread")]
async fn busy_port_is_a_startup_error() {
    let taken = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let config = ServiceConfig {
        bind: taken.local_addr().unwrap().to_string(),
        store: fixture("boston_mini.fixture"),
        oracle: OracleConfig::default(),
    };
    assert!(matches!(serve(config).await, Err(ServiceError::Bind { .. })));
}
