//! In-memory session store with least-recently-used eviction.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use aqs_core::model::DatasetSummary;
use aqs_core::Session;
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex as AsyncMutex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHandle {
    pub session_id: String,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    pub dataset: DatasetSummary,
}

/// One session; mutations are serialized by the async mutex.
pub struct Entry {
    pub handle: SessionHandle,
    pub session: Arc<AsyncMutex<Session>>,
}

struct Slot {
    entry: Arc<Entry>,
    last_used: u64,
}

pub struct SessionStore {
    capacity: usize,
    inner: Mutex<Inner>,
}

struct Inner {
    slots: HashMap<String, Slot>,
    clock: u64,
}

impl SessionStore {
    pub fn new(capacity: usize) -> Self {
        SessionStore {
            capacity: capacity.max(1),
            inner: Mutex::new(Inner {
                slots: HashMap::new(),
                clock: 0,
            }),
        }
    }

    pub fn insert(&self, session: Session) -> Arc<Entry> {
        let created_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut inner = self.inner.lock().expect("store lock");
        let session_id = loop {
            let id = format!("{:032x}", rand::random::<u128>());
            if !inner.slots.contains_key(&id) {
                break id;
            }
        };
        let entry = Arc::new(Entry {
            handle: SessionHandle {
                session_id: session_id.clone(),
                created_at,
                dataset: session.dataset().summary(),
            },
            session: Arc::new(AsyncMutex::new(session)),
        });
        inner.clock += 1;
        let last_used = inner.clock;
        inner.slots.insert(
            session_id,
            Slot {
                entry: entry.clone(),
                last_used,
            },
        );
        while inner.slots.len() > self.capacity {
            let oldest = inner
                .slots
                .iter()
                .min_by_key(|(_, s)| s.last_used)
                .map(|(k, _)| k.clone())
                .expect("non-empty store");
            inner.slots.remove(&oldest);
        }
        entry
    }

    pub fn get(&self, id: &str) -> Option<Arc<Entry>> {
        let mut inner = self.inner.lock().expect("store lock");
        inner.clock += 1;
        let now = inner.clock;
        let slot = inner.slots.get_mut(id)?;
        slot.last_used = now;
        Some(slot.entry.clone())
    }

    pub fn remove(&self, id: &str) -> bool {
        self.inner.lock().expect("store lock").slots.remove(id).is_some()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("store lock").slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use aqs_core::{Column, Dataset};

    fn session() -> Session {
        let ds = Dataset::new(vec![Column::nominal("a", ["x", "y"])], None).unwrap();
        Session::new(Arc::new(ds))
    }

    #[test]
    fn evicts_least_recently_used() {
        let store = SessionStore::new(2);
        let a = store.insert(session()).handle.session_id.clone();
        let b = store.insert(session()).handle.session_id.clone();
        assert!(store.get(&a).is_some());
        let c = store.insert(session()).handle.session_id.clone();
        assert_eq!(store.len(), 2);
        assert!(store.get(&a).is_some());
        assert!(store.get(&b).is_none());
        assert!(store.get(&c).is_some());
        assert!(store.remove(&c));
        assert!(!store.remove(&c));
    }
}
