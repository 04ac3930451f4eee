//! Plain-HTTP stream and search clients.
//!
//! Speaks just enough HTTP/1.1 for a line-delimited streaming endpoint and a
//! paged search endpoint: one `GET` per connection, `Connection: close`,
//! identity-encoded bodies. TLS and chunked transfer encoding are not
//! supported.

use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use chrono::DateTime;
use url::Url;

use super::oauth::RequestSigner;
use super::source::{ConnectError, Connection, Poll, SearchError, SearchPage, SearchQuery, SearchSource, StreamSource};
use crate::error::CollectError;
use crate::tweet::trim_line_end;

pub const NEXT_CURSOR_HEADER: &str = "x-next-cursor";
pub const RATE_LIMIT_RESET_HEADER: &str = "x-rate-limit-reset";

const CONNECT_TIMEOUT: Duration = Duration::from_secs(10);

pub(crate) struct Response {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: BufReader<TcpStream>,
}

impl Response {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }
}

fn parse_endpoint(endpoint: &str) -> Result<Url, CollectError> {
    let url = Url::parse(endpoint).map_err(|e| CollectError::InvalidJob(format!("endpoint `{endpoint}`: {e}")))?;
    if url.scheme() != "http" {
        return Err(CollectError::InvalidJob(format!(
            "endpoint `{endpoint}`: only http:// endpoints are supported"
        )));
    }
    if url.host_str().is_none() {
        return Err(CollectError::InvalidJob(format!("endpoint `{endpoint}` has no host")));
    }
    Ok(url)
}

fn base_url(url: &Url) -> String {
    let mut base = url.clone();
    base.set_query(None);
    base.set_fragment(None);
    base.to_string()
}

pub(crate) fn get(
    endpoint: &Url,
    params: &[(String, String)],
    signer: Option<&dyn RequestSigner>,
    read_timeout: Duration,
) -> io::Result<Response> {
    let host = endpoint.host_str().unwrap_or("localhost");
    let port = endpoint.port_or_known_default().unwrap_or(80);
    let addr = (host, port)
        .to_socket_addrs()?
        .next()
        .ok_or_else(|| io::Error::new(io::ErrorKind::NotFound, format!("cannot resolve {host}")))?;
    let mut stream = TcpStream::connect_timeout(&addr, CONNECT_TIMEOUT)?;
    stream.set_read_timeout(Some(read_timeout))?;

    let mut url = endpoint.clone();
    url.query_pairs_mut().extend_pairs(params);
    let target = match url.query() {
        Some(q) => format!("{}?{q}", url.path()),
        None => url.path().to_string(),
    };
    let mut request = format!(
        "GET {target} HTTP/1.1\r\nHost: {host}:{port}\r\nUser-Agent: eventpulse/{}\r\nConnection: close\r\n",
        env!("CARGO_PKG_VERSION")
    );
    if let Some(signer) = signer {
        let auth = signer.authorization("GET", &base_url(endpoint), params);
        request.push_str(&format!("Authorization: {auth}\r\n"));
    }
    request.push_str("\r\n");
    stream.write_all(request.as_bytes())?;

    let mut body = BufReader::new(stream);
    let mut status_line = String::new();
    body.read_line(&mut status_line)?;
    let status = status_line
        .split_whitespace()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| {
            io::Error::new(
                io::ErrorKind::InvalidData,
                format!("bad status line `{}`", status_line.trim()),
            )
        })?;
    let mut headers = Vec::new();
    loop {
        let mut line = String::new();
        if body.read_line(&mut line)? == 0 {
            break;
        }
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((k, v)) = line.split_once(':') {
            headers.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    let response = Response { status, headers, body };
    if response
        .header("transfer-encoding")
        .is_some_and(|te| !te.eq_ignore_ascii_case("identity"))
    {
        return Err(io::Error::new(
            io::ErrorKind::Unsupported,
            "chunked responses are not supported",
        ));
    }
    Ok(response)
}

fn is_fatal_status(status: u16) -> bool {
    matches!(status, 400 | 401 | 403 | 404 | 406 | 413 | 416)
}

/// Streaming endpoint client. Sends `track=<terms joined by commas>`.
pub struct HttpStreamSource {
    endpoint: Url,
    signer: Option<Box<dyn RequestSigner>>,
    read_timeout: Duration,
}

impl HttpStreamSource {
    pub fn new(endpoint: &str) -> Result<Self, CollectError> {
        Ok(HttpStreamSource {
            endpoint: parse_endpoint(endpoint)?,
            signer: None,
            read_timeout: Duration::from_millis(200),
        })
    }

    pub fn with_signer(mut self, signer: Box<dyn RequestSigner>) -> Self {
        self.signer = Some(signer);
        self
    }

    /// How long a read may block before the connection reports
    /// [`Poll::Idle`], which bounds how quickly a stop request is noticed.
    pub fn read_timeout(mut self, timeout: Duration) -> Self {
        self.read_timeout = timeout;
        self
    }
}

struct HttpConnection {
    body: BufReader<TcpStream>,
    partial: Vec<u8>,
}

impl Connection for HttpConnection {
    fn poll_line(&mut self) -> io::Result<Poll> {
        match self.body.read_until(b'\n', &mut self.partial) {
            Ok(0) => {
                if self.partial.is_empty() {
                    Ok(Poll::Closed)
                } else {
                    // Unterminated tail before close.
                    Ok(Poll::Line(std::mem::take(&mut self.partial)))
                }
            }
            Ok(_) => {
                let line = trim_line_end(&self.partial).to_vec();
                self.partial.clear();
                Ok(Poll::Line(line))
            }
            Err(e)
                if matches!(
                    e.kind(),
                    io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut | io::ErrorKind::Interrupted
                ) =>
            {
                Ok(Poll::Idle)
            }
            Err(e) => Err(e),
        }
    }
}

impl StreamSource for HttpStreamSource {
    fn connect(&mut self, track: &[String]) -> Result<Box<dyn Connection + '_>, ConnectError> {
        let params = [("track".to_string(), track.join(","))];
        let response = get(&self.endpoint, &params, self.signer.as_deref(), self.read_timeout)
            .map_err(|e| ConnectError::Transient(e.to_string()))?;
        match response.status {
            200 => Ok(Box::new(HttpConnection {
                body: response.body,
                partial: Vec::new(),
            })),
            204 => Err(ConnectError::Exhausted),
            s if is_fatal_status(s) => Err(ConnectError::Rejected(format!("HTTP {s}"))),
            s => Err(ConnectError::Transient(format!("HTTP {s}"))),
        }
    }
}

/// Paged search endpoint client. Sends `q`, `result_type` and, after the
/// first page, `cursor`; reads the next cursor from `x-next-cursor`.
pub struct HttpSearchSource {
    endpoint: Url,
    signer: Option<Box<dyn RequestSigner>>,
    read_timeout: Duration,
}

impl HttpSearchSource {
    pub fn new(endpoint: &str) -> Result<Self, CollectError> {
        Ok(HttpSearchSource {
            endpoint: parse_endpoint(endpoint)?,
            signer: None,
            read_timeout: Duration::from_secs(30),
        })
    }

    pub fn with_signer(mut self, signer: Box<dyn RequestSigner>) -> Self {
        self.signer = Some(signer);
        self
    }
}

impl SearchSource for HttpSearchSource {
    fn fetch(&mut self, query: &SearchQuery, cursor: Option<&str>) -> Result<SearchPage, SearchError> {
        let mut params = vec![
            ("q".to_string(), query.query_string()),
            ("result_type".to_string(), query.kind.as_str().to_string()),
        ];
        if let Some(cursor) = cursor {
            params.push(("cursor".to_string(), cursor.to_string()));
        }
        let transient = |e: io::Error| SearchError::Transient(e.to_string());
        let mut response =
            get(&self.endpoint, &params, self.signer.as_deref(), self.read_timeout).map_err(transient)?;
        match response.status {
            200 => {
                let next_cursor = response.header(NEXT_CURSOR_HEADER).map(str::to_string);
                let mut body = Vec::new();
                match response.header("content-length").and_then(|l| l.parse::<u64>().ok()) {
                    Some(len) => (&mut response.body).take(len).read_to_end(&mut body),
                    None => response.body.read_to_end(&mut body),
                }
                .map_err(transient)?;
                let lines = body
                    .split(|&b| b == b'\n')
                    .map(trim_line_end)
                    .filter(|l| !l.is_empty())
                    .map(<[u8]>::to_vec)
                    .collect();
                Ok(SearchPage { lines, next_cursor })
            }
            420 | 429 => {
                let reset_at = response
                    .header(RATE_LIMIT_RESET_HEADER)
                    .and_then(|v| v.parse::<i64>().ok())
                    .and_then(|secs| DateTime::from_timestamp(secs, 0));
                match reset_at {
                    Some(reset_at) => Err(SearchError::RateLimited { reset_at }),
                    None => Err(SearchError::Transient(format!(
                        "HTTP {} without reset time",
                        response.status
                    ))),
                }
            }
            s if is_fatal_status(s) => Err(SearchError::Rejected(format!("HTTP {s}"))),
            s => Err(SearchError::Transient(format!("HTTP {s}"))),
        }
    }
}
