//! Persistent memoization of order/index results.
//!
//! On disk a table is a header line followed by one `n,tau,ind` record per
//! entry, sorted by `n`:
//!
//! ```text
//! collatz-lab-memo v1 ceiling=4294967296 entries=3
//! 3,3,4
//! 5,1,4
//! 10,1,4
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::Path;
use std::sync::RwLock;

use rayon::prelude::*;

use crate::error::{require_positive, Error, Result};
use crate::nat::Nat;
use crate::process::{order_index_with, step, Limits, OrderIndex};

pub const MEMO_FORMAT_VERSION: u32 = 1;
pub const DEFAULT_CEILING: u64 = 1 << 32;
const MAGIC: &str = "collatz-lab-memo";
const SCAN_CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MemoEntry {
    pub tau: u64,
    pub ind: u64,
}

/// Converged `(tau, ind)` results for inputs below `ceiling`.
///
/// Readers may run concurrently; each writer publishes a whole batch under one
/// write lock, so no reader sees half of an update.
#[derive(Debug)]
pub struct MemoTable {
    ceiling: u64,
    entries: RwLock<HashMap<u64, MemoEntry>>,
}

impl Default for MemoTable {
    fn default() -> Self {
        MemoTable::new(DEFAULT_CEILING)
    }
}

impl PartialEq for MemoTable {
    fn eq(&self, other: &Self) -> bool {
        self.ceiling == other.ceiling && self.snapshot() == other.snapshot()
    }
}

impl MemoTable {
    pub fn new(ceiling: u64) -> Self {
        MemoTable {
            ceiling,
            entries: RwLock::new(HashMap::new()),
        }
    }

    pub fn ceiling(&self) -> u64 {
        self.ceiling
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("memo lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, n: u64) -> Option<MemoEntry> {
        self.entries.read().expect("memo lock").get(&n).copied()
    }

    /// Entries at or above the ceiling are dropped.
    pub fn insert_batch(&self, batch: impl IntoIterator<Item = (u64, MemoEntry)>) {
        let ceiling = self.ceiling;
        let mut guard = self.entries.write().expect("memo lock");
        guard.extend(batch.into_iter().filter(|(n, _)| *n < ceiling));
    }

    pub fn snapshot(&self) -> BTreeMap<u64, MemoEntry> {
        let guard = self.entries.read().expect("memo lock");
        guard.iter().map(|(k, v)| (*k, *v)).collect()
    }

    /// Recomputes every entry directly; returns the first `n` that disagrees.
    pub fn verify(&self, limits: &Limits) -> Result<Option<u64>> {
        for (n, e) in self.snapshot() {
            let direct = order_index_with(&Nat::from(n), limits)?;
            if direct
                != (OrderIndex::Converged {
                    tau: e.tau,
                    ind: e.ind,
                })
            {
                return Ok(Some(n));
            }
        }
        Ok(None)
    }

    pub fn to_text(&self) -> String {
        let snap = self.snapshot();
        let mut out = format!(
            "{MAGIC} v{MEMO_FORMAT_VERSION} ceiling={} entries={}\n",
            self.ceiling,
            snap.len()
        );
        for (n, e) in snap {
            out.push_str(&format!("{n},{},{}\n", e.tau, e.ind));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<MemoTable> {
        let corrupt = |msg: String| Error::CorruptMemo(msg);
        let (header, body) = text
            .split_once('\n')
            .ok_or_else(|| corrupt("missing header line".into()))?;
        let fields: Vec<&str> = header.split(' ').collect();
        let [magic, version, ceiling, count] = fields[..] else {
            return Err(corrupt(format!("malformed header {header:?}")));
        };
        if magic != MAGIC {
            return Err(corrupt(format!("bad magic {magic:?}")));
        }
        let version: u32 = version
            .strip_prefix('v')
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| corrupt(format!("bad version field {version:?}")))?;
        if version > MEMO_FORMAT_VERSION {
            return Err(Error::MemoVersion {
                found: version,
                supported: MEMO_FORMAT_VERSION,
            });
        }
        if version == 0 {
            return Err(corrupt("version 0 is not a valid format".into()));
        }
        let field = |raw: &str, key: &str| -> Result<u64> {
            raw.strip_prefix(key)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| corrupt(format!("bad header field {raw:?}")))
        };
        let ceiling = field(ceiling, "ceiling=")?;
        let count = field(count, "entries=")?;

        if !body.is_empty() && !body.ends_with('\n') {
            return Err(corrupt("truncated final record".into()));
        }
        let mut entries = HashMap::with_capacity(count as usize);
        let mut prev: Option<u64> = None;
        for (i, line) in body.lines().enumerate() {
            let parse = |s: Option<&str>| s.and_then(|v| v.parse::<u64>().ok());
            let mut parts = line.split(',');
            let (Some(n), Some(tau), Some(ind), None) = (
                parse(parts.next()),
                parse(parts.next()),
                parse(parts.next()),
                parts.next(),
            ) else {
                return Err(corrupt(format!("record {} is malformed: {line:?}", i + 1)));
            };
            if prev.is_some_and(|p| p >= n) {
                return Err(corrupt(format!("record {} is out of order", i + 1)));
            }
            if n == 0 || n >= ceiling {
                return Err(corrupt(format!(
                    "record {} key {n} outside 1..{ceiling}",
                    i + 1
                )));
            }
            prev = Some(n);
            entries.insert(n, MemoEntry { tau, ind });
        }
        if entries.len() as u64 != count {
            return Err(corrupt(format!(
                "header promises {count} records, found {}",
                entries.len()
            )));
        }
        Ok(MemoTable {
            ceiling,
            entries: RwLock::new(entries),
        })
    }

    /// Writes through a sibling temporary file and renames it into place.
    pub fn save(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let tmp = path.with_extension("tmp");
        let mut file = fs::File::create(&tmp).map_err(io)?;
        file.write_all(self.to_text().as_bytes()).map_err(io)?;
        file.sync_all().map_err(io)?;
        fs::rename(&tmp, path).map_err(io)
    }

    pub fn load(path: &Path) -> Result<MemoTable> {
        let bytes = fs::read(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::CorruptMemo("file is not valid UTF-8".into()))?;
        MemoTable::from_text(&text)
    }
}

/// Where a memoized walk joined the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Splice {
    pub at_step: u64,
    pub value: u64,
}

struct Walk {
    result: OrderIndex,
    splice: Option<Splice>,
    learned: Vec<(u64, MemoEntry)>,
}

fn walk(a: &Nat, limits: &Limits, table: &MemoTable, local: &HashMap<u64, MemoEntry>) -> Walk {
    let ceiling = table.ceiling();
    let mut path: Vec<(u64, u64)> = Vec::new();
    let mut cur = a.clone();
    let mut m = 0u64;
    let (tau, ind, splice) = loop {
        if let Some(k) = cur.power_of_two_exponent() {
            if let Some(v) = cur.to_u64().filter(|&v| v < ceiling) {
                path.push((v, m));
            }
            break (m, k, None);
        }
        let small = cur.to_u64().filter(|&v| v < ceiling);
        if let Some(v) = small {
            // Any power of two further along would itself be cached with tau = 0,
            // so the spliced total is still the first power-of-two hit.
            if let Some(e) = local.get(&v).copied().or_else(|| table.get(v)) {
                let total = m + e.tau;
                if total > limits.max_steps {
                    return Walk {
                        result: OrderIndex::CapExceeded,
                        splice: Some(Splice {
                            at_step: m,
                            value: v,
                        }),
                        learned: Vec::new(),
                    };
                }
                break (
                    total,
                    e.ind,
                    Some(Splice {
                        at_step: m,
                        value: v,
                    }),
                );
            }
        }
        if m == limits.max_steps || cur.bits() > limits.max_bits {
            return Walk {
                result: OrderIndex::CapExceeded,
                splice: None,
                learned: Vec::new(),
            };
        }
        if let Some(v) = small {
            path.push((v, m));
        }
        cur = step(&cur);
        m += 1;
    };
    let learned = path
        .into_iter()
        .map(|(v, at)| (v, MemoEntry { tau: tau - at, ind }))
        .collect();
    Walk {
        result: OrderIndex::Converged { tau, ind },
        splice,
        learned,
    }
}

/// [`order_index_with`] accelerated by the table; newly learned entries are
/// published in one batch.
pub fn order_index_memo(a: &Nat, limits: &Limits, table: &MemoTable) -> Result<OrderIndex> {
    Ok(order_index_memo_traced(a, limits, table)?.0)
}

pub fn order_index_memo_traced(
    a: &Nat,
    limits: &Limits,
    table: &MemoTable,
) -> Result<(OrderIndex, Option<Splice>)> {
    require_positive(a, "order_index input")?;
    if limits.max_steps == 0 {
        return Err(Error::InvalidArgument(
            "max_steps must be at least 1".into(),
        ));
    }
    let w = walk(a, limits, table, &HashMap::new());
    table.insert_batch(w.learned);
    Ok((w.result, w.splice))
}

/// Order/index for every `n` in `range`, in order, using and extending `table`.
///
/// Work is split into fixed-size chunks on the current rayon pool; each chunk
/// keeps a private overlay and publishes it once finished. Results do not
/// depend on scheduling because cached values never change an answer.
pub fn scan(
    range: RangeInclusive<u64>,
    limits: &Limits,
    table: &MemoTable,
) -> Result<Vec<(u64, OrderIndex)>> {
    let (lo, hi) = (*range.start(), *range.end());
    if lo > hi {
        return Err(Error::EmptyRange { lo, hi });
    }
    if lo == 0 {
        return Err(Error::Domain("scan range must start at 1 or above".into()));
    }
    if limits.max_steps == 0 {
        return Err(Error::InvalidArgument(
            "max_steps must be at least 1".into(),
        ));
    }
    let chunks: Vec<(u64, u64)> = (0..=(hi - lo) / SCAN_CHUNK)
        .map(|i| {
            let s = lo + i * SCAN_CHUNK;
            (s, s.saturating_add(SCAN_CHUNK - 1).min(hi))
        })
        .collect();
    let parts: Vec<Vec<(u64, OrderIndex)>> = chunks
        .into_par_iter()
        .map(|(s, e)| {
            let mut local = HashMap::new();
            let mut out = Vec::with_capacity((e - s + 1) as usize);
            for n in s..=e {
                let w = walk(&Nat::from(n), limits, table, &local);
                local.extend(w.learned);
                out.push((n, w.result));
            }
            table.insert_batch(local);
            out
        })
        .collect();
    Ok(parts.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::order_index;

    fn n(v: u64) -> Nat {
        Nat::from(v)
    }

    #[test]
    fn splice_example() {
        let table = MemoTable::default();
        table.insert_batch([(5, MemoEntry { tau: 1, ind: 4 })]);
        let (r, splice) = order_index_memo_traced(&n(9), &Limits::default(), &table).unwrap();
        assert_eq!(r, OrderIndex::Converged { tau: 15, ind: 4 });
        assert_eq!(
            splice,
            Some(Splice {
                at_step: 14,
                value: 5
            })
        );
    }

    #[test]
    fn empty_table_and_repeat_calls() {
        let table = MemoTable::default();
        let limits = Limits::default();
        assert_eq!(
            order_index_memo(&n(16), &limits, &table).unwrap(),
            OrderIndex::Converged { tau: 0, ind: 4 }
        );
        let table = MemoTable::default();
        let (first, s1) = order_index_memo_traced(&n(3), &limits, &table).unwrap();
        assert_eq!(s1, None);
        let (second, s2) = order_index_memo_traced(&n(3), &limits, &table).unwrap();
        assert_eq!(first, second);
        assert_eq!(
            s2,
            Some(Splice {
                at_step: 0,
                value: 3
            })
        );
        assert!(table.get(10).is_some());
        assert_eq!(table.get(10), Some(MemoEntry { tau: 2, ind: 4 }));
    }

    #[test]
    fn splice_respects_the_step_cap() {
        let table = MemoTable::default();
        table.insert_batch([(5, MemoEntry { tau: 1, ind: 4 })]);
        assert_eq!(
            order_index_memo(&n(9), &Limits::steps(14), &table).unwrap(),
            OrderIndex::CapExceeded
        );
        assert_eq!(order_index(&n(9), 14).unwrap(), OrderIndex::CapExceeded);
    }

    #[test]
    fn cap_exceeded_is_never_cached() {
        let table = MemoTable::default();
        assert_eq!(
            order_index_memo(&n(27), &Limits::steps(10), &table).unwrap(),
            OrderIndex::CapExceeded
        );
        assert!(table.is_empty());
    }

    #[test]
    fn ceiling_bounds_the_table() {
        let table = MemoTable::new(100);
        order_index_memo(&n(27), &Limits::default(), &table).unwrap();
        assert!(table.snapshot().keys().all(|&k| k < 100));
        assert!(!table.is_empty());
    }

    #[test]
    fn oracle_equivalence_under_varied_cache_states() {
        let limits = Limits::default();
        let warm = MemoTable::default();
        scan(1..=100_000, &limits, &warm).unwrap();
        // A sparse table holding only every seventh key.
        let sparse = MemoTable::default();
        sparse.insert_batch(warm.snapshot().into_iter().filter(|(k, _)| k % 7 == 0));
        let cold = MemoTable::default();
        for a in 1..=100_000u64 {
            let direct = order_index(&n(a), limits.max_steps).unwrap();
            assert_eq!(order_index_memo(&n(a), &limits, &warm).unwrap(), direct);
            assert_eq!(order_index_memo(&n(a), &limits, &sparse).unwrap(), direct);
            assert_eq!(order_index_memo(&n(a), &limits, &cold).unwrap(), direct);
        }
        assert_eq!(warm.verify(&limits).unwrap(), None);
    }

    #[test]
    fn text_round_trip_and_rejections() {
        let table = MemoTable::new(1 << 20);
        scan(1..=2000, &Limits::default(), &table).unwrap();
        let text = table.to_text();
        assert_eq!(MemoTable::from_text(&text).unwrap(), table);

        let cut = &text[..text.len() - 3];
        assert!(matches!(
            MemoTable::from_text(cut),
            Err(Error::CorruptMemo(_))
        ));
        let whole_lines: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
        assert!(matches!(
            MemoTable::from_text(&whole_lines),
            Err(Error::CorruptMemo(_))
        ));
        let newer = text.replacen("v1", "v2", 1);
        assert!(matches!(
            MemoTable::from_text(&newer),
            Err(Error::MemoVersion {
                found: 2,
                supported: 1
            })
        ));
        assert!(matches!(
            MemoTable::from_text(""),
            Err(Error::CorruptMemo(_))
        ));
        let unsorted = "collatz-lab-memo v1 ceiling=100 entries=2\n5,1,4\n3,3,4\n";
        assert!(matches!(
            MemoTable::from_text(unsorted),
            Err(Error::CorruptMemo(_))
        ));
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("memo.txt");
        let table = MemoTable::default();
        scan(1..=500, &Limits::default(), &table).unwrap();
        table.save(&path).unwrap();
        assert_eq!(MemoTable::load(&path).unwrap(), table);
        assert!(matches!(
            MemoTable::load(&dir.path().join("missing")),
            Err(Error::Io { .. })
        ));
    }
}
