//! Live sessions: humans drive avatars over WebSockets while one ticker per
//! session steps the world at 20 Hz and streams state to every client.

pub mod actor;
pub mod http;
pub mod messages;
pub mod session;

use std::net::SocketAddr;

pub use actor::{spawn_session, ActorError, SessionHandle};
pub use http::{router, ServerConfig};
pub use messages::*;
pub use session::*;

/// Bind `addr` and serve until the process is stopped.
pub async fn serve(cfg: ServerConfig, addr: SocketAddr) -> std::io::Result<()> {
    pedsim_core::runner::ensure_writable(&cfg.out_dir).map_err(std::io::Error::other)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(cfg)).await
}
