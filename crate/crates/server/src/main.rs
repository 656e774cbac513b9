use std::net::SocketAddr;
use std::time::Duration;

use predmem_server::{router, Config};

/// Usage: predmem-server [ADDR] [BUDGET_SECS]; defaults 127.0.0.1:8080 and 10.
#[tokio::main]
async fn main() {
    let mut args = std::env::args().skip(1);
    let addr: SocketAddr = match args.next().as_deref().unwrap_or("127.0.0.1:8080").parse() {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: bad address: {e}");
            std::process::exit(1);
        }
    };
    let mut cfg = Config::default();
    if let Some(s) = args.next() {
        match s.parse::<f64>() {
            Ok(secs) if secs > 0.0 => cfg.budget = Duration::from_secs_f64(secs),
            _ => {
                eprintln!("error: budget must be a positive number of seconds, got {s:?}");
                std::process::exit(1);
            }
        }
    }
    let listener = match tokio::net::TcpListener::bind(addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot bind {addr}: {e}");
            std::process::exit(1);
        }
    };
    eprintln!("listening on http://{addr}");
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    if let Err(e) = axum::serve(listener, router(cfg))
        .with_graceful_shutdown(shutdown)
        .await
    {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
