//! Local replay server for tests and offline work.
//!
//! `GET /stream?track=a,b` streams the scripted lines (with optional blank
//! keep-alives and delays), closing the connection at each scripted
//! disconnect point; once every line is out it answers `204 No Content`.
//! `GET /search?q=..&result_type=..[&cursor=N]` serves pages, answering the
//! scripted requests with `429` and an `x-rate-limit-reset` epoch.
//! No authentication is required.

use std::collections::HashMap;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use url::form_urlencoded;

use super::http::{NEXT_CURSOR_HEADER, RATE_LIMIT_RESET_HEADER};
use super::source::{segment_lines, MockScript, SearchCursor, SearchError, StreamCursor};

/// What the server saw.
#[derive(Debug, Clone, Default)]
pub struct MockLog {
    /// Request targets (path and query) in arrival order.
    pub requests: Vec<String>,
    pub authorization: Vec<Option<String>>,
    pub stream_connections: usize,
    pub search_requests: usize,
    pub rate_limited: usize,
}

struct State {
    script: MockScript,
    stream: StreamCursor,
    search: SearchCursor,
    log: MockLog,
}

pub struct MockServer {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    state: Arc<Mutex<State>>,
    handle: Option<JoinHandle<()>>,
}

impl MockServer {
    /// Binds an ephemeral loopback port and starts serving `script`.
    pub fn start(script: MockScript) -> io::Result<Self> {
        Self::bind("127.0.0.1:0", script)
    }

    pub fn bind(addr: &str, script: MockScript) -> io::Result<Self> {
        let listener = TcpListener::bind(addr)?;
        let addr = listener.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let state = Arc::new(Mutex::new(State {
            script,
            stream: StreamCursor::default(),
            search: SearchCursor::default(),
            log: MockLog::default(),
        }));
        let handle = {
            let stop = Arc::clone(&stop);
            let state = Arc::clone(&state);
            std::thread::spawn(move || {
                for conn in listener.incoming() {
                    if stop.load(Ordering::SeqCst) {
                        break;
                    }
                    match conn {
                        Ok(conn) => {
                            if let Err(e) = serve(conn, &state, &stop) {
                                log::debug!("mock server: {e}");
                            }
                        }
                        Err(e) => log::debug!("mock server accept: {e}"),
                    }
                }
            })
        };
        Ok(MockServer {
            addr,
            stop,
            state,
            handle: Some(handle),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn stream_url(&self) -> String {
        format!("http://{}/stream", self.addr)
    }

    pub fn search_url(&self) -> String {
        format!("http://{}/search", self.addr)
    }

    pub fn log(&self) -> MockLog {
        self.state.lock().unwrap().log.clone()
    }

    /// Blocks until the accept loop has exited.
    pub fn wait(mut self) {
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // Wake the blocking accept.
        let _ = TcpStream::connect_timeout(&self.addr, Duration::from_millis(500));
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn respond(conn: &mut TcpStream, status: &str, headers: &[(&str, String)], body: &[u8]) -> io::Result<()> {
    let mut head = format!(
        "HTTP/1.1 {status}\r\nConnection: close\r\nContent-Length: {}\r\n",
        body.len()
    );
    for (k, v) in headers {
        head.push_str(&format!("{k}: {v}\r\n"));
    }
    head.push_str("\r\n");
    conn.write_all(head.as_bytes())?;
    conn.write_all(body)?;
    conn.flush()
}

fn serve(mut conn: TcpStream, state: &Mutex<State>, stop: &AtomicBool) -> io::Result<()> {
    conn.set_read_timeout(Some(Duration::from_secs(5)))?;
    let mut reader = BufReader::new(conn.try_clone()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    let mut authorization = None;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 || line.trim().is_empty() {
            break;
        }
        if let Some((k, v)) = line.split_once(':') {
            if k.trim().eq_ignore_ascii_case("authorization") {
                authorization = Some(v.trim().to_string());
            }
        }
    }
    let mut parts = request_line.split_whitespace();
    let (method, target) = (parts.next().unwrap_or(""), parts.next().unwrap_or(""));
    let (path, query) = target.split_once('?').unwrap_or((target, ""));
    let params: HashMap<String, String> = form_urlencoded::parse(query.as_bytes()).into_owned().collect();

    let mut guard = state.lock().unwrap();
    guard.log.requests.push(target.to_string());
    guard.log.authorization.push(authorization);
    if method != "GET" {
        drop(guard);
        return respond(&mut conn, "405 Method Not Allowed", &[], b"");
    }

    if path.ends_with("/stream") {
        if !params.contains_key("track") {
            drop(guard);
            return respond(&mut conn, "400 Bad Request", &[], b"missing track\n");
        }
        guard.log.stream_connections += 1;
        let State { script, stream, .. } = &mut *guard;
        let Some(segment) = stream.next_segment(script) else {
            drop(guard);
            return respond(&mut conn, "204 No Content", &[], b"");
        };
        let lines = segment_lines(script, &segment);
        let delay = script.line_delay;
        drop(guard);

        conn.write_all(b"HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nConnection: close\r\n\r\n")?;
        for line in lines {
            if stop.load(Ordering::SeqCst) {
                break;
            }
            if !delay.is_zero() {
                std::thread::sleep(delay);
            }
            conn.write_all(&line)?;
            conn.write_all(b"\r\n")?;
        }
        conn.flush()?;
        return conn.shutdown(std::net::Shutdown::Both);
    }

    if path.ends_with("/search") {
        guard.log.search_requests += 1;
        let State { script, search, .. } = &mut *guard;
        let answer = search.answer(script, params.get("cursor").map(String::as_str));
        if matches!(answer, Err(SearchError::RateLimited { .. })) {
            guard.log.rate_limited += 1;
        }
        drop(guard);
        return match answer {
            Ok(page) => {
                let mut body = Vec::new();
                for line in &page.lines {
                    body.extend_from_slice(line);
                    body.push(b'\n');
                }
                let headers: Vec<(&str, String)> =
                    page.next_cursor.map(|c| (NEXT_CURSOR_HEADER, c)).into_iter().collect();
                respond(&mut conn, "200 OK", &headers, &body)
            }
            Err(SearchError::RateLimited { reset_at }) => respond(
                &mut conn,
                "429 Too Many Requests",
                &[(RATE_LIMIT_RESET_HEADER, reset_at.timestamp().to_string())],
                b"",
            ),
            Err(SearchError::Rejected(msg) | SearchError::Transient(msg)) => {
                respond(&mut conn, "400 Bad Request", &[], msg.as_bytes())
            }
        };
    }

    drop(guard);
    respond(&mut conn, "404 Not Found", &[], b"")
}
