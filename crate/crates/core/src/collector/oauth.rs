//! OAuth 1.0a request signing (HMAC-SHA1).

use base64::Engine;
use hmac::{Hmac, Mac};
use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use rand::distr::{Alphanumeric, SampleString};
use sha1::Sha1;

use super::credentials::Credentials;

/// RFC 3986 unreserved characters stay literal; everything else is escaped.
const OAUTH_ESCAPE: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_').remove(b'~');

pub fn percent_encode(s: &str) -> String {
    utf8_percent_encode(s, OAUTH_ESCAPE).to_string()
}

/// Produces an `Authorization` header value for a request.
pub trait RequestSigner: Send {
    /// `base_url` excludes the query; `params` are the decoded query pairs.
    fn authorization(&self, method: &str, base_url: &str, params: &[(String, String)]) -> String;
}

pub struct OAuth1Signer {
    credentials: Credentials,
}

impl OAuth1Signer {
    pub fn new(credentials: Credentials) -> Self {
        OAuth1Signer { credentials }
    }

    /// Signs with an explicit nonce and timestamp.
    pub fn sign_with(
        &self,
        method: &str,
        base_url: &str,
        params: &[(String, String)],
        nonce: &str,
        timestamp: u64,
    ) -> String {
        let c = &self.credentials;
        let timestamp = timestamp.to_string();
        let oauth: [(&str, &str); 6] = [
            ("oauth_consumer_key", &c.consumer_key),
            ("oauth_nonce", nonce),
            ("oauth_signature_method", "HMAC-SHA1"),
            ("oauth_timestamp", &timestamp),
            ("oauth_token", &c.access_token),
            ("oauth_version", "1.0"),
        ];

        let mut encoded: Vec<(String, String)> = params
            .iter()
            .map(|(k, v)| (percent_encode(k), percent_encode(v)))
            .chain(oauth.iter().map(|(k, v)| (percent_encode(k), percent_encode(v))))
            .collect();
        encoded.sort();
        let param_string = encoded
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join("&");
        let base = format!(
            "{}&{}&{}",
            method.to_ascii_uppercase(),
            percent_encode(base_url),
            percent_encode(&param_string)
        );
        let key = format!(
            "{}&{}",
            percent_encode(&c.consumer_secret),
            percent_encode(&c.access_token_secret)
        );
        let mut mac = Hmac::<Sha1>::new_from_slice(key.as_bytes()).expect("HMAC accepts any key length");
        mac.update(base.as_bytes());
        let signature = base64::engine::general_purpose::STANDARD.encode(mac.finalize().into_bytes());

        let mut header: Vec<String> = oauth
            .iter()
            .map(|(k, v)| format!("{k}=\"{}\"", percent_encode(v)))
            .collect();
        header.push(format!("oauth_signature=\"{}\"", percent_encode(&signature)));
        header.sort();
        format!("OAuth {}", header.join(", "))
    }
}

impl RequestSigner for OAuth1Signer {
    fn authorization(&self, method: &str, base_url: &str, params: &[(String, String)]) -> String {
        let nonce = Alphanumeric.sample_string(&mut rand::rng(), 32);
        let timestamp = chrono::Utc::now().timestamp().max(0) as u64;
        self.sign_with(method, base_url, params, &nonce, timestamp)
    }
}
