//! On-disk a_p cache: one text file per curve, `<a1.a2.a3.a4.a6>.ap`,
//! lines `p,a_p` ascending in p.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use rayon::prelude::*;
use selstab_core::curve::{within_hasse, CurveQ, PointCounter};
use selstab_core::modarith::is_prime;
use selstab_core::sieve::TraceSource;

use crate::error::CliError;

/// Traces for one curve, backed by an optional cache file.
///
/// Lookups that miss are computed with the point counter and kept in memory
/// until [`ApCache::save`].
#[derive(Debug)]
pub struct ApCache {
    curve: CurveQ,
    path: Option<PathBuf>,
    counter: PointCounter,
    entries: RwLock<BTreeMap<u64, i64>>,
    /// largest p already on disk
    saved_max: u64,
    saved_len: usize,
}

impl ApCache {
    /// In-memory only.
    pub fn memory(curve: &CurveQ) -> Self {
        ApCache {
            curve: curve.clone(),
            path: None,
            counter: PointCounter::default(),
            entries: RwLock::new(BTreeMap::new()),
            saved_max: 0,
            saved_len: 0,
        }
    }

    /// Load `dir/<key>.ap` if it exists. Every line is re-checked: p prime
    /// and of good reduction, strictly ascending, |a_p| ≤ 2√p.
    pub fn open(dir: &Path, curve: &CurveQ) -> Result<Self, CliError> {
        let path = dir.join(format!("{}.ap", curve.key()));
        let mut entries = BTreeMap::new();
        if path.exists() {
            let text = fs::read_to_string(&path)?;
            let mut last = 0u64;
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let bad = |why: &str| CliError::Cache(format!("{}:{}: {why}: {line:?}", path.display(), i + 1));
                let (p, ap) = line.split_once(',').ok_or_else(|| bad("expected p,a_p"))?;
                let p: u64 = p.trim().parse().map_err(|_| bad("bad prime"))?;
                let ap: i64 = ap.trim().parse().map_err(|_| bad("bad trace"))?;
                if p <= last {
                    return Err(bad("primes not strictly ascending"));
                }
                if !is_prime(p) || !curve.has_good_reduction(p) {
                    return Err(bad("not a prime of good reduction"));
                }
                if !within_hasse(ap, p) {
                    return Err(bad("trace violates the Hasse bound"));
                }
                last = p;
                entries.insert(p, ap);
            }
        }
        let saved_max = entries.keys().next_back().copied().unwrap_or(0);
        let saved_len = entries.len();
        Ok(ApCache {
            curve: curve.clone(),
            path: Some(path),
            counter: PointCounter::default(),
            entries: RwLock::new(entries),
            saved_max,
            saved_len,
        })
    }

    pub fn with_dir(dir: Option<&Path>, curve: &CurveQ) -> Result<Self, CliError> {
        match dir {
            Some(d) => Self::open(d, curve),
            None => Ok(Self::memory(curve)),
        }
    }

    pub fn curve(&self) -> &CurveQ {
        &self.curve
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Compute the missing good primes among `primes` on the current rayon pool.
    pub fn prefill(&self, primes: &[u64]) -> Result<(), CliError> {
        let missing: Vec<u64> = {
            let e = self.entries.read().unwrap();
            primes
                .iter()
                .copied()
                .filter(|&p| self.curve.has_good_reduction(p) && !e.contains_key(&p))
                .collect()
        };
        let computed: Vec<(u64, i64)> = missing
            .par_iter()
            .map(|&p| Ok((p, self.counter.trace(&self.curve, p)?)))
            .collect::<Result<_, selstab_core::Error>>()?;
        self.entries.write().unwrap().extend(computed);
        Ok(())
    }

    /// Write new entries. Appends when they all lie beyond the saved range,
    /// otherwise rewrites the file in order.
    pub fn save(&mut self) -> Result<(), CliError> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let entries = self.entries.read().unwrap();
        if entries.len() == self.saved_len {
            return Ok(());
        }
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let fresh_below = entries.range(..=self.saved_max).count() != self.saved_len;
        if fresh_below || !path.exists() {
            let tmp = path.with_extension("ap.tmp");
            let mut f = fs::File::create(&tmp)?;
            for (p, ap) in entries.iter() {
                writeln!(f, "{p},{ap}")?;
            }
            f.sync_all()?;
            fs::rename(&tmp, path)?;
        } else {
            let mut f = fs::OpenOptions::new().append(true).open(path)?;
            for (p, ap) in entries.range(self.saved_max + 1..) {
                writeln!(f, "{p},{ap}")?;
            }
        }
        self.saved_max = entries.keys().next_back().copied().unwrap_or(0);
        self.saved_len = entries.len();
        Ok(())
    }
}

impl TraceSource for ApCache {
    fn trace(&self, curve: &CurveQ, p: u64) -> selstab_core::Result<i64> {
        if curve != &self.curve {
            return self.counter.trace(curve, p);
        }
        if let Some(&ap) = self.entries.read().unwrap().get(&p) {
            return Ok(ap);
        }
        let ap = self.counter.trace(curve, p)?;
        self.entries.write().unwrap().insert(p, ap);
        Ok(ap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use selstab_core::modarith::sieve_primes;

    #[test]
    fn round_trip_and_append() {
        let dir = tempfile::tempdir().unwrap();
        let curve = CurveQ::short(1, 1).unwrap();
        let mut c = ApCache::open(dir.path(), &curve).unwrap();
        c.prefill(&sieve_primes(100)).unwrap();
        c.save().unwrap();
        let file = dir.path().join("0.0.0.1.1.ap");
        let text = fs::read_to_string(&file).unwrap();
        assert!(text.starts_with("3,0\n5,-3\n7,3\n11,-2\n"), "{text}");
        let mut c = ApCache::open(dir.path(), &curve).unwrap();
        assert_eq!(c.trace(&curve, 5).unwrap(), -3);
        c.prefill(&sieve_primes(200)).unwrap();
        c.save().unwrap();
        let longer = fs::read_to_string(&file).unwrap();
        assert!(longer.starts_with(&text));
        let reread = ApCache::open(dir.path(), &curve).unwrap();
        assert_eq!(reread.len(), sieve_primes(200).len() - 2);
    }

    #[test]
    fn rejects_corrupt_lines() {
        let dir = tempfile::tempdir().unwrap();
        let curve = CurveQ::short(1, 1).unwrap();
        let file = dir.path().join("0.0.0.1.1.ap");
        for body in ["5,-3\n3,0\n", "5,9\n", "4,1\n", "31,0\n", "5;-3\n"] {
            fs::write(&file, body).unwrap();
            assert!(matches!(ApCache::open(dir.path(), &curve), Err(CliError::Cache(_))), "{body}");
        }
    }
}
