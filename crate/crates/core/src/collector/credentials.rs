use std::path::Path;

use ini::Ini;

use crate::error::ConfigError;

/// The four OAuth 1.0a secrets issued for an application.
#[derive(Clone, PartialEq, Eq)]
pub struct Credentials {
    pub consumer_key: String,
    pub consumer_secret: String,
    pub access_token: String,
    pub access_token_secret: String,
}

impl std::fmt::Debug for Credentials {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Credentials")
            .field("consumer_key", &self.consumer_key)
            .finish_non_exhaustive()
    }
}

const KEYS: [&str; 4] = ["consumer_key", "consumer_secret", "access_token", "access_token_secret"];

/// Reads the four keys from a sectioned `key = value` file. The keys may sit
/// in any section (or none); the first occurrence wins. Comment lines
/// starting with `;` or `#` and unknown keys are ignored.
pub fn load_credentials(path: impl AsRef<Path>) -> Result<Credentials, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let ini = Ini::load_from_str(&text).map_err(|e| ConfigError::Syntax {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;

    let mut values: [Option<String>; 4] = Default::default();
    for (_, section) in ini.iter() {
        for (slot, key) in values.iter_mut().zip(KEYS) {
            if slot.is_none() {
                *slot = section
                    .get(key)
                    .map(str::trim)
                    .filter(|v| !v.is_empty())
                    .map(str::to_string);
            }
        }
    }
    let [consumer_key, consumer_secret, access_token, access_token_secret] = values;
    Ok(Credentials {
        consumer_key: consumer_key.ok_or(ConfigError::MissingKey("consumer_key"))?,
        consumer_secret: consumer_secret.ok_or(ConfigError::MissingKey("consumer_secret"))?,
        access_token: access_token.ok_or(ConfigError::MissingKey("access_token"))?,
        access_token_secret: access_token_secret.ok_or(ConfigError::MissingKey("access_token_secret"))?,
    })
}
