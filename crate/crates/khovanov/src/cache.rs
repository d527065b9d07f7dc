//! Content-addressed cache of reduced complexes, for connected-sum reuse.
//! Keys hash the canonical braid word, ring, basepoint spec, and engine
//! version; writers are atomic (write-temp-then-rename), so concurrent
//! processes can share a cache directory.

use crate::braid::ClosurePlan;
use crate::ring::Ring;
use crate::rmod::FreeComplexR;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const KH_CACHE_ENV: &str = "KH_CACHE";

pub fn default_cache_dir() -> PathBuf {
    if let Ok(dir) = std::env::var(KH_CACHE_ENV) {
        return PathBuf::from(dir);
    }
    std::env::temp_dir().join("khv-cache")
}

/// Stable key of a reduced-complex computation.
pub fn cache_key(plan: &ClosurePlan, ring: Ring) -> String {
    let mut hasher = Sha256::new();
    hasher.update(crate::ENGINE_VERSION.as_bytes());
    hasher.update(b"|");
    hasher.update(plan.word.strands.to_string().as_bytes());
    hasher.update(b":");
    hasher.update(plan.word.to_string().as_bytes());
    hasher.update(b"|");
    hasher.update(ring.to_string().as_bytes());
    hasher.update(b"|");
    for (p, c) in &plan.basepoints {
        hasher.update(format!("bp{p}on{c};").as_bytes());
    }
    hex_digest(hasher)
}

fn hex_digest(hasher: Sha256) -> String {
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn entry_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{key}.json"))
}

/// Read a cached complex; a missing, unreadable, or corrupt entry is a miss.
pub fn cache_get(dir: &Path, key: &str) -> Option<FreeComplexR> {
    let path = entry_path(dir, key);
    let bytes = std::fs::read(path).ok()?;
    match serde_json::from_slice(&bytes) {
        Ok(cx) => Some(cx),
        Err(err) => {
            eprintln!("warning: discarding corrupt cache entry {key}: {err}");
            None
        }
    }
}

/// Store a complex under the key, atomically.
pub fn cache_put(dir: &Path, key: &str, cx: &FreeComplexR) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(".{key}.{}.tmp", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(&serde_json::to_vec(cx).expect("complex serializes"))?;
        f.sync_all()?;
    }
    std::fs::rename(tmp, entry_path(dir, key))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braid::parse_braid;
    use crate::rmod::{expand, PresTag, RPresentation};

    #[test]
    fn round_trip_and_versioning() {
        let dir = std::env::temp_dir().join(format!("khv-cache-test-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        let plan = ClosurePlan::new(parse_braid("1 1 1", 2).unwrap());
        let key = cache_key(&plan, Ring::Z);
        assert!(cache_get(&dir, &key).is_none());
        let cx = expand(&RPresentation::new(PresTag::C(3)), Ring::Z);
        cache_put(&dir, &key, &cx).unwrap();
        let back = cache_get(&dir, &key).unwrap();
        assert_eq!(back, cx);
        // different ring, different key
        assert_ne!(key, cache_key(&plan, Ring::Zp(3)));
        // corrupt entries are misses
        std::fs::write(dir.join(format!("{key}.json")), b"not json").unwrap();
        assert!(cache_get(&dir, &key).is_none());
        let _ = std::fs::remove_dir_all(&dir);
    }
}
