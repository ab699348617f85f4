//! Delivery-id ledger that makes webhook redelivery harmless.

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    /// First sighting; the caller owns the delivery until `complete` or `release`.
    Fresh,
    /// Already completed or currently being processed.
    Duplicate,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    delivery_id: String,
}

#[derive(Default)]
struct State {
    done: HashSet<String>,
    in_flight: HashSet<String>,
}

/// All operations take one lock, so claims are linearizable.
#[derive(Default)]
pub struct DeliveryLedger {
    state: Mutex<State>,
    file: Option<PathBuf>,
}

impl DeliveryLedger {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (or creates) an append-only JSONL store.
    pub fn open(path: &Path) -> std::io::Result<Self> {
        let mut done = HashSet::new();
        if path.exists() {
            for line in BufReader::new(File::open(path)?).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                // A torn last line from a crash is skipped; that delivery may run again.
                if let Ok(e) = serde_json::from_str::<Entry>(&line) {
                    done.insert(e.delivery_id);
                }
            }
        } else if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        Ok(Self {
            state: Mutex::new(State {
                done,
                in_flight: HashSet::new(),
            }),
            file: Some(path.to_path_buf()),
        })
    }

    pub fn try_claim(&self, delivery_id: &str) -> Claim {
        let mut st = self.state.lock().expect("ledger lock");
        if st.done.contains(delivery_id) || st.in_flight.contains(delivery_id) {
            return Claim::Duplicate;
        }
        st.in_flight.insert(delivery_id.to_string());
        Claim::Fresh
    }

    pub fn complete(&self, delivery_id: &str) -> std::io::Result<()> {
        let mut st = self.state.lock().expect("ledger lock");
        st.in_flight.remove(delivery_id);
        if !st.done.insert(delivery_id.to_string()) {
            return Ok(());
        }
        if let Some(path) = &self.file {
            let mut f = OpenOptions::new().create(true).append(true).open(path)?;
            let line = serde_json::to_string(&Entry {
                delivery_id: delivery_id.to_string(),
            })
            .map_err(std::io::Error::other)?;
            writeln!(f, "{line}")?;
            f.sync_data()?;
        }
        Ok(())
    }

    /// Gives up a claim so a later redelivery is processed.
    pub fn release(&self, delivery_id: &str) {
        self.state
            .lock()
            .expect("ledger lock")
            .in_flight
            .remove(delivery_id);
    }

    pub fn is_done(&self, delivery_id: &str) -> bool {
        self.state
            .lock()
            .expect("ledger lock")
            .done
            .contains(delivery_id)
    }
}
