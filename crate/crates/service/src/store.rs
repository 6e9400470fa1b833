//! Sessions and app registrations persisted to a single JSON file.
//!
//! Live sessions sit behind per-session async mutexes; every mutation is
//! mirrored into the on-disk snapshot with access tokens and client secrets
//! sealed by the service secret.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use braids_client::InstanceCredentials;
use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::secret::Obfuscator;
use crate::session::SessionState;

pub type SessionHandle = Arc<tokio::sync::Mutex<SessionState>>;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("session store io: {0}")]
    Io(#[from] std::io::Error),
    #[error("session store format: {0}")]
    Format(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StoredApp {
    client_id: String,
    client_secret: String,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct Snapshot {
    #[serde(default)]
    apps: BTreeMap<String, StoredApp>,
    #[serde(default)]
    sessions: BTreeMap<String, SessionState>,
}

pub struct SessionStore {
    path: Option<PathBuf>,
    obfuscator: Obfuscator,
    live: RwLock<HashMap<String, SessionHandle>>,
    snapshot: Mutex<Snapshot>,
}

fn app_key(instance: &url::Url, redirect_uri: &url::Url) -> String {
    format!("{} {}", instance.as_str(), redirect_uri.as_str())
}

impl SessionStore {
    pub fn in_memory(obfuscator: Obfuscator) -> Self {
        Self {
            path: None,
            obfuscator,
            live: RwLock::new(HashMap::new()),
            snapshot: Mutex::new(Snapshot::default()),
        }
    }

    /// Opens (or creates on first write) the store at `path`. Sessions
    /// whose token cannot be unsealed with this secret are dropped.
    pub fn open(path: &Path, obfuscator: Obfuscator) -> Result<Self, StoreError> {
        let mut snapshot: Snapshot = match std::fs::read(path) {
            Ok(bytes) if !bytes.is_empty() => serde_json::from_slice(&bytes)?,
            Ok(_) => Snapshot::default(),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Snapshot::default(),
            Err(e) => return Err(e.into()),
        };
        let mut live = HashMap::new();
        snapshot.sessions.retain(|id, stored| {
            let mut session = stored.clone();
            match stored
                .credentials
                .access_token
                .as_deref()
                .map(|t| obfuscator.open(t))
            {
                Some(Some(token)) => session.credentials.access_token = Some(token),
                _ => {
                    warn!(session = %id, "dropping session with unreadable token");
                    return false;
                }
            }
            match obfuscator.open(&stored.credentials.client_secret) {
                Some(secret) => session.credentials.client_secret = secret,
                None => return false,
            }
            live.insert(id.clone(), Arc::new(tokio::sync::Mutex::new(session)));
            true
        });
        Ok(Self {
            path: Some(path.to_owned()),
            obfuscator,
            live: RwLock::new(live),
            snapshot: Mutex::new(snapshot),
        })
    }

    pub fn get(&self, session_id: &str) -> Option<SessionHandle> {
        self.live.read().unwrap().get(session_id).cloned()
    }

    pub fn insert(&self, session: SessionState) -> Result<SessionHandle, StoreError> {
        self.save(&session)?;
        let id = session.session_id.clone();
        let handle = Arc::new(tokio::sync::Mutex::new(session));
        self.live.write().unwrap().insert(id, handle.clone());
        Ok(handle)
    }

    /// Records the current state of a session.
    pub fn save(&self, session: &SessionState) -> Result<(), StoreError> {
        let mut stored = session.clone();
        stored.credentials.access_token = session
            .credentials
            .access_token
            .as_deref()
            .map(|t| self.obfuscator.seal(t));
        stored.credentials.client_secret = self.obfuscator.seal(&session.credentials.client_secret);
        let mut snap = self.snapshot.lock().unwrap();
        snap.sessions.insert(session.session_id.clone(), stored);
        self.flush(&snap)
    }

    pub fn remove(&self, session_id: &str) -> Result<(), StoreError> {
        self.live.write().unwrap().remove(session_id);
        let mut snap = self.snapshot.lock().unwrap();
        if snap.sessions.remove(session_id).is_some() {
            self.flush(&snap)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.live.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cached app registration for an instance and redirect URI.
    pub fn app(&self, instance: &url::Url, redirect_uri: &url::Url) -> Option<InstanceCredentials> {
        let snap = self.snapshot.lock().unwrap();
        let app = snap.apps.get(&app_key(instance, redirect_uri))?;
        Some(InstanceCredentials {
            instance_base_url: instance.clone(),
            client_id: app.client_id.clone(),
            client_secret: self.obfuscator.open(&app.client_secret)?,
            access_token: None,
        })
    }

    pub fn save_app(
        &self,
        redirect_uri: &url::Url,
        creds: &InstanceCredentials,
    ) -> Result<(), StoreError> {
        let mut snap = self.snapshot.lock().unwrap();
        snap.apps.insert(
            app_key(&creds.instance_base_url, redirect_uri),
            StoredApp {
                client_id: creds.client_id.clone(),
                client_secret: self.obfuscator.seal(&creds.client_secret),
            },
        );
        self.flush(&snap)
    }

    fn flush(&self, snap: &Snapshot) -> Result<(), StoreError> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let dir = path
            .parent()
            .filter(|d| !d.as_os_str().is_empty())
            .unwrap_or(Path::new("."));
        std::fs::create_dir_all(dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        serde_json::to_writer_pretty(&mut tmp, snap)?;
        tmp.write_all(b"\n")?;
        tmp.as_file().sync_all()?;
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Utc;
    use url::Url;

    fn creds() -> InstanceCredentials {
        InstanceCredentials {
            instance_base_url: Url::parse("https://example.social").unwrap(),
            client_id: "cid".into(),
            client_secret: "csecret".into(),
            access_token: Some("plain-token".into()),
        }
    }

    #[test]
    fn persists_with_sealed_secrets() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sessions.json");
        let store = SessionStore::open(&path, Obfuscator::new("k")).unwrap();
        let mut session = SessionState::new("s1".into(), creds(), Utc::now());
        session.seen_ids.insert("42".into());
        store.insert(session.clone()).unwrap();
        let redirect = Url::parse("https://self/cb").unwrap();
        store.save_app(&redirect, &creds()).unwrap();

        let raw = std::fs::read_to_string(&path).unwrap();
        assert!(!raw.contains("plain-token"));
        assert!(!raw.contains("csecret"));

        let reopened = SessionStore::open(&path, Obfuscator::new("k")).unwrap();
        let back = reopened.get("s1").unwrap();
        assert_eq!(*back.try_lock().unwrap(), session);
        assert_eq!(
            reopened
                .app(&creds().instance_base_url, &redirect)
                .unwrap()
                .client_secret,
            "csecret"
        );

        let wrong = SessionStore::open(&path, Obfuscator::new("other")).unwrap();
        assert!(wrong.is_empty());
    }

    #[test]
    fn remove() {
        let store = SessionStore::in_memory(Obfuscator::new("k"));
        store
            .insert(SessionState::new("s".into(), creds(), Utc::now()))
            .unwrap();
        assert_eq!(store.len(), 1);
        store.remove("s").unwrap();
        assert!(store.get("s").is_none());
    }
}
