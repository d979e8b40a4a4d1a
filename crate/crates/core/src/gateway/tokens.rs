use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine as _;
use chrono::{DateTime, Duration, Utc};
use rand::RngCore;
use serde::{Deserialize, Serialize};

pub const DEFAULT_TOKEN_TTL: Duration = Duration::seconds(60);

/// How long spent or expired entries are remembered so that reuse is
/// reported as reuse rather than as an unknown token.
const RETENTION: Duration = Duration::minutes(5);

/// Minimum time between sweeps of stale entries, so minting stays O(1).
const SWEEP_INTERVAL: Duration = Duration::seconds(30);

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Test clock advanced by hand.
#[derive(Debug)]
pub struct ManualClock(Mutex<DateTime<Utc>>);

impl ManualClock {
    pub fn new(start: DateTime<Utc>) -> Self {
        Self(Mutex::new(start))
    }

    pub fn advance(&self, by: Duration) {
        *self.0.lock().unwrap() += by;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> DateTime<Utc> {
        *self.0.lock().unwrap()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EphemeralVoiceToken {
    pub token: String,
    pub session_id: String,
    pub expires_at: DateTime<Utc>,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum TokenError {
    #[error("voice token expired")]
    Expired,
    #[error("voice token unknown")]
    Unknown,
    #[error("voice token already redeemed")]
    Reused,
    #[error("unknown session {0:?}")]
    UnknownSession(String),
}

struct Entry {
    session_id: String,
    expires_at: DateTime<Utc>,
    redeemed: bool,
}

/// Server-side store of minted voice tokens. Tokens are 128 random bits,
/// URL-safe base64 without padding, valid once and only until their TTL.
pub struct VoiceTokenStore {
    ttl: Duration,
    clock: Arc<dyn Clock>,
    inner: Mutex<Inner>,
}

struct Inner {
    entries: HashMap<String, Entry>,
    next_sweep: DateTime<Utc>,
}

impl Default for VoiceTokenStore {
    fn default() -> Self {
        Self::new(DEFAULT_TOKEN_TTL, Arc::new(SystemClock))
    }
}

impl VoiceTokenStore {
    pub fn new(ttl: Duration, clock: Arc<dyn Clock>) -> Self {
        let next_sweep = clock.now();
        Self {
            ttl,
            clock,
            inner: Mutex::new(Inner {
                entries: HashMap::new(),
                next_sweep,
            }),
        }
    }

    pub fn ttl(&self) -> Duration {
        self.ttl
    }

    pub fn mint(&self, session_id: &str) -> EphemeralVoiceToken {
        let mut bytes = [0u8; 16];
        rand::rng().fill_bytes(&mut bytes);
        let token = URL_SAFE_NO_PAD.encode(bytes);
        let now = self.clock.now();
        let expires_at = now + self.ttl;

        let mut inner = self.inner.lock().unwrap();
        if now >= inner.next_sweep {
            inner.entries.retain(|_, e| e.expires_at + RETENTION > now);
            inner.next_sweep = now + SWEEP_INTERVAL;
        }
        inner.entries.insert(
            token.clone(),
            Entry {
                session_id: session_id.to_string(),
                expires_at,
                redeemed: false,
            },
        );
        EphemeralVoiceToken {
            token,
            session_id: session_id.to_string(),
            expires_at,
        }
    }

    /// Atomically redeems a token, returning the session it was minted for.
    pub fn redeem(&self, token: &str) -> Result<String, TokenError> {
        let now = self.clock.now();
        let mut inner = self.inner.lock().unwrap();
        let entry = inner.entries.get_mut(token).ok_or(TokenError::Unknown)?;
        if entry.redeemed {
            return Err(TokenError::Reused);
        }
        if now >= entry.expires_at {
            return Err(TokenError::Expired);
        }
        entry.redeemed = true;
        Ok(entry.session_id.clone())
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
