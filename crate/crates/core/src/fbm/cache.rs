//! Process-wide tables keyed by `(scalar type, n, H)`.
//!
//! Tables are built outside the lock and inserted with `or_insert`, so
//! concurrent first use may build twice but every caller observes the
//! same stored table.

use std::any::{Any, TypeId};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::Result;
use crate::scalar::Real;

type Key = (&'static str, TypeId, usize, u64);
type Table = HashMap<Key, Arc<dyn Any + Send + Sync>>;

fn table() -> &'static Mutex<Table> {
    static TABLE: OnceLock<Mutex<Table>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(HashMap::new()))
}

pub(crate) fn get_or_build<T, V, F>(kind: &'static str, n: usize, h: T, build: F) -> Result<Arc<V>>
where
    T: Real,
    V: Any + Send + Sync,
    F: FnOnce() -> Result<V>,
{
    let key = (kind, TypeId::of::<V>(), n, h.as_f64().to_bits());
    if let Some(hit) = table().lock().unwrap().get(&key) {
        return Ok(hit.clone().downcast::<V>().expect("cache type mismatch"));
    }
    let built: Arc<dyn Any + Send + Sync> = Arc::new(build()?);
    let stored = table().lock().unwrap().entry(key).or_insert(built).clone();
    Ok(stored.downcast::<V>().expect("cache type mismatch"))
}
