//! Reference-curve cache, in memory and optionally on disk.
//!
//! Curves are keyed by `(L, r to 2 decimals, F, Iter, seed, M_max, delta)`;
//! the radius is rounded before the curve is computed, so a cached curve is
//! exactly what a fresh computation would return.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::reference::{reference_curve, ReferenceParams};
use crate::error::{Error, Result};

pub const REFERENCE_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CurveKey {
    pub order: usize,
    pub radius_centi: u32,
    pub count: usize,
    pub iterations: usize,
    pub seed: u64,
    pub max_states: usize,
    pub delta_bits: u64,
}

impl CurveKey {
    pub fn new(p: &ReferenceParams) -> Self {
        Self {
            order: p.order,
            radius_centi: (p.radius * 100.0).round() as u32,
            count: p.count,
            iterations: p.iterations,
            seed: p.seed,
            max_states: p.max_states,
            delta_bits: p.delta.to_bits(),
        }
    }

    pub fn radius(&self) -> f64 {
        f64::from(self.radius_centi) / 100.0
    }

    fn file_name(&self) -> String {
        format!(
            "refcurve_L{}_r{:03}_F{}_it{}_M{}_s{}_d{:016x}.json",
            self.order,
            self.radius_centi,
            self.count,
            self.iterations,
            self.max_states,
            self.seed,
            self.delta_bits
        )
    }
}

/// On-disk form of a reference curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCurveFile {
    pub format_version: u32,
    #[serde(rename = "L")]
    pub order: usize,
    pub r: f64,
    #[serde(rename = "F")]
    pub count: usize,
    pub iter: usize,
    pub seed: u64,
    pub delta: f64,
    #[serde(rename = "W")]
    pub w: Vec<f64>,
}

impl ReferenceCurveFile {
    pub fn new(p: &ReferenceParams, w: Vec<f64>) -> Self {
        Self {
            format_version: REFERENCE_FORMAT_VERSION,
            order: p.order,
            r: p.radius,
            count: p.count,
            iter: p.iterations,
            seed: p.seed,
            delta: p.delta,
            w,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file: Self = serde_json::from_slice(&fs::read(path)?)?;
        if file.format_version != REFERENCE_FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported reference-curve format_version {}",
                file.format_version
            )));
        }
        Ok(file)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, serde_json::to_vec_pretty(self)?)?;
        fs::rename(tmp, path)?;
        Ok(())
    }

    fn matches(&self, key: &CurveKey) -> bool {
        CurveKey::new(&ReferenceParams {
            order: self.order,
            radius: self.r,
            max_states: self.w.len(),
            count: self.count,
            iterations: self.iter,
            delta: self.delta,
            seed: self.seed,
        }) == *key
    }
}

type Slot = Arc<Mutex<Option<Vec<f64>>>>;

/// Shared cache; each key is computed by at most one caller at a time.
#[derive(Debug, Default)]
pub struct ReferenceCache {
    slots: Mutex<HashMap<CurveKey, Slot>>,
    dir: Option<PathBuf>,
}

impl ReferenceCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn with_dir(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self {
            slots: Mutex::default(),
            dir: Some(dir),
        })
    }

    /// Reference curve for `params` with its radius rounded to two decimals.
    pub fn get_or_compute(&self, params: &ReferenceParams) -> Result<Vec<f64>> {
        let key = CurveKey::new(params);
        let params = ReferenceParams {
            radius: key.radius(),
            ..params.clone()
        };
        let slot = {
            let mut slots = self.slots.lock().expect("cache lock poisoned");
            Arc::clone(slots.entry(key.clone()).or_default())
        };
        let mut guard = slot.lock().expect("cache slot poisoned");
        if let Some(w) = guard.as_ref() {
            return Ok(w.clone());
        }
        if let Some(path) = self.dir.as_ref().map(|d| d.join(key.file_name())) {
            if path.exists() {
                let file = ReferenceCurveFile::read(&path)?;
                if file.matches(&key) {
                    *guard = Some(file.w.clone());
                    return Ok(file.w);
                }
            }
            let w = reference_curve(&params)?;
            ReferenceCurveFile::new(&params, w.clone()).write(&path)?;
            *guard = Some(w.clone());
            return Ok(w);
        }
        let w = reference_curve(&params)?;
        *guard = Some(w.clone());
        Ok(w)
    }

    pub fn len(&self) -> usize {
        self.slots
            .lock()
            .expect("cache lock poisoned")
            .values()
            .filter(|s| s.lock().map(|g| g.is_some()).unwrap_or(false))
            .count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(radius: f64) -> ReferenceParams {
        ReferenceParams {
            order: 1,
            radius,
            max_states: 3,
            count: 40,
            iterations: 2,
            delta: 1e-4,
            seed: 3,
        }
    }

    #[test]
    fn rounding_shares_entries() {
        let cache = ReferenceCache::in_memory();
        let a = cache.get_or_compute(&params(0.731)).unwrap();
        let b = cache.get_or_compute(&params(0.7349)).unwrap();
        assert_eq!(a, b);
        assert_eq!(cache.len(), 1);
        assert_eq!(a, reference_curve(&params(0.73)).unwrap());
    }

    #[test]
    fn disk_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let first = ReferenceCache::with_dir(dir.path()).unwrap();
        let w = first.get_or_compute(&params(0.5)).unwrap();
        let files: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(files.len(), 1);
        let path = files[0].as_ref().unwrap().path();
        let file = ReferenceCurveFile::read(&path).unwrap();
        assert_eq!(file.format_version, REFERENCE_FORMAT_VERSION);
        assert_eq!(file.w, w);
        let json: serde_json::Value = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
        for field in [
            "L",
            "r",
            "F",
            "iter",
            "seed",
            "delta",
            "W",
            "format_version",
        ] {
            assert!(json.get(field).is_some(), "missing {field}");
        }
        let second = ReferenceCache::with_dir(dir.path()).unwrap();
        assert_eq!(second.get_or_compute(&params(0.5)).unwrap(), w);
    }
}
