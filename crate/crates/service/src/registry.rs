use std::collections::HashMap;
use std::sync::{Arc, Mutex, MutexGuard};

use lxdr_core::{Dataset, FittedDR, RidgePredictor};

#[derive(Debug)]
pub struct ModelEntry {
    pub dataset_id: String,
    pub dataset: Arc<Dataset>,
    pub model: FittedDR,
    /// Ridge regressor from the reduced data to the dataset target, if fitted.
    pub predictor: Option<RidgePredictor>,
}

/// In-memory store of uploaded datasets and fitted models. Ids are
/// sequential per server, so a replayed session sees the same ids.
#[derive(Debug, Default)]
pub struct Registry {
    inner: Mutex<Inner>,
}

#[derive(Debug, Default)]
struct Inner {
    next_dataset: u64,
    next_model: u64,
    datasets: HashMap<String, Arc<Dataset>>,
    models: HashMap<String, Arc<ModelEntry>>,
}

impl Registry {
    fn lock(&self) -> MutexGuard<'_, Inner> {
        // a panic while holding the lock cannot leave a map half-updated
        self.inner.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn add_dataset(&self, dataset: Dataset) -> (String, Arc<Dataset>) {
        let mut inner = self.lock();
        inner.next_dataset += 1;
        let id = format!("ds-{}", inner.next_dataset);
        let dataset = Arc::new(dataset);
        inner.datasets.insert(id.clone(), Arc::clone(&dataset));
        (id, dataset)
    }

    pub fn dataset(&self, id: &str) -> Option<Arc<Dataset>> {
        self.lock().datasets.get(id).cloned()
    }

    pub fn add_model(&self, entry: ModelEntry) -> (String, Arc<ModelEntry>) {
        let mut inner = self.lock();
        inner.next_model += 1;
        let id = format!("m-{}", inner.next_model);
        let entry = Arc::new(entry);
        inner.models.insert(id.clone(), Arc::clone(&entry));
        (id, entry)
    }

    pub fn model(&self, id: &str) -> Option<Arc<ModelEntry>> {
        self.lock().models.get(id).cloned()
    }
}
