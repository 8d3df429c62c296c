//! In-memory store of filtered WAV files keyed by random tokens, bounded by
//! total size (least recently used first out) and by idle time.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use axum::body::Bytes;
use rand::RngCore;

/// 128 random bits as 32 lowercase hex digits.
pub fn new_token() -> String {
    let mut buf = [0u8; 16];
    rand::rng().fill_bytes(&mut buf);
    buf.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug)]
struct Entry {
    wav: Bytes,
    last_access: Instant,
}

#[derive(Debug)]
pub struct AudioCache {
    entries: HashMap<String, Entry>,
    total_bytes: usize,
    budget_bytes: usize,
    ttl: Duration,
}

impl AudioCache {
    pub fn new(budget_bytes: usize, ttl: Duration) -> Self {
        AudioCache {
            entries: HashMap::new(),
            total_bytes: 0,
            budget_bytes,
            ttl,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_bytes(&self) -> usize {
        self.total_bytes
    }

    fn remove(&mut self, token: &str) {
        if let Some(e) = self.entries.remove(token) {
            self.total_bytes -= e.wav.len();
        }
    }

    fn purge_expired(&mut self, now: Instant) {
        let ttl = self.ttl;
        let dead: Vec<String> = self
            .entries
            .iter()
            .filter(|(_, e)| now.duration_since(e.last_access) >= ttl)
            .map(|(k, _)| k.clone())
            .collect();
        for k in dead {
            self.remove(&k);
        }
    }

    /// Stores `wav` under a fresh token. Older entries are evicted until the
    /// new one fits; an entry larger than the whole budget is still kept
    /// (alone) so the request that produced it can be served.
    pub fn insert(&mut self, wav: Bytes, now: Instant) -> String {
        self.purge_expired(now);
        while !self.entries.is_empty() && self.total_bytes + wav.len() > self.budget_bytes {
            let oldest = self
                .entries
                .iter()
                .min_by_key(|(_, e)| e.last_access)
                .map(|(k, _)| k.clone())
                .expect("non-empty");
            self.remove(&oldest);
        }
        let token = loop {
            let t = new_token();
            if !self.entries.contains_key(&t) {
                break t;
            }
        };
        self.total_bytes += wav.len();
        self.entries.insert(
            token.clone(),
            Entry {
                wav,
                last_access: now,
            },
        );
        token
    }

    /// The stored bytes, refreshing the idle timer; `None` once expired or evicted.
    pub fn get(&mut self, token: &str, now: Instant) -> Option<Bytes> {
        let expired = match self.entries.get_mut(token) {
            None => return None,
            Some(e) if now.duration_since(e.last_access) >= self.ttl => true,
            Some(e) => {
                e.last_access = now;
                false
            }
        };
        if expired {
            self.remove(token);
            return None;
        }
        self.entries.get(token).map(|e| e.wav.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_are_distinct_hex() {
        let a = new_token();
        let b = new_token();
        assert_ne!(a, b);
        assert_eq!(a.len(), 32);
        assert!(a.bytes().all(|c| c.is_ascii_hexdigit()));
    }

    #[test]
    fn expiry_is_idle_based() {
        let t0 = Instant::now();
        let mut c = AudioCache::new(1 << 20, Duration::from_secs(10));
        let tok = c.insert(Bytes::from_static(b"abc"), t0);
        assert!(c.get(&tok, t0 + Duration::from_secs(9)).is_some());
        assert!(c.get(&tok, t0 + Duration::from_secs(18)).is_some());
        assert!(c.get(&tok, t0 + Duration::from_secs(28)).is_none());
        assert_eq!(c.total_bytes(), 0);
        assert!(c.get("nope", t0).is_none());
    }

    #[test]
    fn lru_eviction_respects_budget() {
        let t0 = Instant::now();
        let mut c = AudioCache::new(10, Duration::from_secs(60));
        let a = c.insert(Bytes::from(vec![0u8; 4]), t0);
        let b = c.insert(Bytes::from(vec![1u8; 4]), t0 + Duration::from_millis(1));
        c.get(&a, t0 + Duration::from_millis(2));
        let d = c.insert(Bytes::from(vec![2u8; 4]), t0 + Duration::from_millis(3));
        assert!(c.get(&b, t0 + Duration::from_millis(4)).is_none());
        assert!(c.get(&a, t0 + Duration::from_millis(4)).is_some());
        assert!(c.get(&d, t0 + Duration::from_millis(4)).is_some());
        assert!(c.total_bytes() <= 10);
        let big = c.insert(Bytes::from(vec![3u8; 64]), t0 + Duration::from_millis(5));
        assert_eq!(c.len(), 1);
        assert!(c.get(&big, t0 + Duration::from_millis(6)).is_some());
    }
}
