//! Prime table backed by a sieve that grows on demand.

use std::sync::{Arc, OnceLock, RwLock};

fn table() -> &'static RwLock<Arc<Vec<u64>>> {
    static TABLE: OnceLock<RwLock<Arc<Vec<u64>>>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(Arc::new(sieve(1 << 12))))
}

/// All primes `<= limit`, in increasing order.
pub fn sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn grow_until(done: impl Fn(&[u64]) -> bool) -> Arc<Vec<u64>> {
    {
        let current = table().read().expect("prime table poisoned");
        if done(&current) {
            return Arc::clone(&current);
        }
    }
    let mut guard = table().write().expect("prime table poisoned");
    while !done(&guard) {
        let limit = guard.last().copied().unwrap_or(2).max(16) * 2;
        *guard = Arc::new(sieve(limit));
    }
    Arc::clone(&guard)
}

/// A table holding at least the first `count` primes (p_1 = 2).
pub fn first(count: usize) -> Arc<Vec<u64>> {
    grow_until(|t| t.len() >= count)
}

/// A table containing at least every prime `<= limit`.
pub fn up_to(limit: u64) -> Arc<Vec<u64>> {
    grow_until(|t| t.last().is_some_and(|&p| p >= limit))
}

/// The m-th prime, 1-based.
pub fn nth(m: usize) -> u64 {
    assert!(m >= 1, "prime index is 1-based");
    first(m)[m - 1]
}

/// 1-based index of the prime `p`, if it is prime.
pub fn index_of(p: u64) -> Option<usize> {
    let t = up_to(p);
    t.binary_search(&p).ok().map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primes() {
        assert_eq!(sieve(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(nth(1), 2);
        assert_eq!(nth(10_000), 104_729);
        assert_eq!(index_of(104_729), Some(10_000));
        assert_eq!(index_of(91), None);
    }
}
