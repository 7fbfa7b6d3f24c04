use std::collections::HashMap;
use std::sync::Arc;

use parking_lot::Mutex;

use super::interface::{AbstractSolver, FacadeError};

pub type SolverHandle = Arc<Mutex<Box<dyn AbstractSolver>>>;

/// Keeps solvers alive across calls, keyed by name (for example one per
/// equation being solved every time step).
///
/// Building happens under the registry lock, so concurrent requests for a
/// key run its builder once. Failed builds are not cached.
#[derive(Default)]
pub struct SolverRegistry {
    entries: Mutex<HashMap<String, SolverHandle>>,
}

impl SolverRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_create<F>(&self, key: &str, builder: F) -> Result<SolverHandle, FacadeError>
    where
        F: FnOnce() -> Result<Box<dyn AbstractSolver>, FacadeError>,
    {
        let mut entries = self.entries.lock();
        if let Some(handle) = entries.get(key) {
            return Ok(Arc::clone(handle));
        }
        let handle = Arc::new(Mutex::new(builder()?));
        entries.insert(key.to_owned(), Arc::clone(&handle));
        Ok(handle)
    }

    pub fn get(&self, key: &str) -> Option<SolverHandle> {
        self.entries.lock().get(key).cloned()
    }

    pub fn remove(&self, key: &str) -> Option<SolverHandle> {
        self.entries.lock().remove(key)
    }

    pub fn len(&self) -> usize {
        self.entries.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
