//! Order-statistics counting over a compressed value domain.
//!
//! Values are never indexed directly: a [`RankDomain`] maps the distinct
//! values of a column to dense ranks, and an [`OrderCounter`] (a Fenwick
//! tree) counts insertions per rank with O(log m) point updates and
//! strictly-less / equal / strictly-greater queries.

/// Sorted distinct values of a column with a value -> rank bijection.
pub struct RankDomain {
    sorted: Vec<f64>,
}

impl RankDomain {
    pub fn from_values(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        sorted.dedup();
        RankDomain { sorted }
    }

    /// Number of distinct values.
    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Rank of a value that is known to be in the domain.
    pub fn rank(&self, value: f64) -> usize {
        self.sorted
            .binary_search_by(|v| v.partial_cmp(&value).expect("finite values"))
            .expect("value present in domain")
    }

    /// Ranks for a whole column in one pass.
    pub fn ranks(&self, values: &[f64]) -> Vec<usize> {
        values.iter().map(|&v| self.rank(v)).collect()
    }
}

/// Fenwick-tree counter over ranks `0..m`.
pub struct OrderCounter {
    tree: Vec<u64>,
    size: u64,
}

impl OrderCounter {
    pub fn new(domain_size: usize) -> Self {
        OrderCounter { tree: vec![0; domain_size + 1], size: 0 }
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn domain_size(&self) -> usize {
        self.tree.len() - 1
    }

    pub fn insert(&mut self, rank: usize) {
        assert!(rank < self.domain_size(), "rank {rank} out of domain");
        let mut i = rank + 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
        self.size += 1;
    }

    /// Inserted elements with rank in `0..i` (1-based internal index).
    fn prefix(&self, mut i: usize) -> u64 {
        let mut sum = 0;
        while i > 0 {
            sum += self.tree[i];
            i &= i - 1;
        }
        sum
    }

    /// Inserted elements with rank strictly less than `rank`.
    pub fn count_less(&self, rank: usize) -> u64 {
        assert!(rank < self.domain_size(), "rank {rank} out of domain");
        self.prefix(rank)
    }

    /// Inserted elements with exactly this rank.
    pub fn count_equal(&self, rank: usize) -> u64 {
        assert!(rank < self.domain_size(), "rank {rank} out of domain");
        self.prefix(rank + 1) - self.prefix(rank)
    }

    /// Inserted elements with rank strictly greater than `rank`.
    pub fn count_greater(&self, rank: usize) -> u64 {
        assert!(rank < self.domain_size(), "rank {rank} out of domain");
        self.size - self.prefix(rank + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn fresh_counter_is_empty() {
        let c = OrderCounter::new(5);
        assert_eq!(c.size(), 0);
        for r in 0..5 {
            assert_eq!(c.count_less(r), 0);
            assert_eq!(c.count_equal(r), 0);
            assert_eq!(c.count_greater(r), 0);
        }
    }

    #[test]
    fn double_insert_counts_twice() {
        let mut c = OrderCounter::new(6);
        c.insert(3);
        c.insert(3);
        assert_eq!(c.count_equal(3), 2);
        assert_eq!(c.size(), 2);
    }

    #[test]
    fn less_counts_strictly() {
        let mut c = OrderCounter::new(4);
        for r in [0, 1, 2] {
            c.insert(r);
        }
        assert_eq!(c.count_less(2), 2);
    }

    #[test]
    fn mixed_query_example() {
        let mut c = OrderCounter::new(5);
        for r in [1, 1, 4] {
            c.insert(r);
        }
        assert_eq!(c.count_less(2), 2);
        assert_eq!(c.count_equal(2), 0);
        assert_eq!(c.count_greater(2), 1);
    }

    #[test]
    #[should_panic(expected = "out of domain")]
    fn insert_rejects_out_of_domain() {
        let mut c = OrderCounter::new(3);
        c.insert(3);
    }

    #[test]
    fn rank_domain_compresses_and_orders() {
        let d = RankDomain::from_values(&[5.0, 1.0, 5.0, 3.0]);
        assert_eq!(d.len(), 3);
        assert_eq!(d.rank(1.0), 0);
        assert_eq!(d.rank(3.0), 1);
        assert_eq!(d.rank(5.0), 2);
        assert_eq!(d.ranks(&[3.0, 5.0, 1.0]), vec![1, 2, 0]);
    }

    /// Differential test against a naive multiset scanner over a long mixed
    /// operation sequence.
    #[test]
    fn matches_naive_multiset() {
        let mut rng = ChaCha12Rng::seed_from_u64(0xC0FFEE);
        let m = 64;
        let mut counter = OrderCounter::new(m);
        let mut naive: Vec<usize> = Vec::new();
        for step in 0..120_000 {
            let rank = rng.gen_range(0..m);
            if rng.gen_bool(0.5) {
                counter.insert(rank);
                naive.push(rank);
            } else {
                let less = naive.iter().filter(|&&r| r < rank).count() as u64;
                let equal = naive.iter().filter(|&&r| r == rank).count() as u64;
                let greater = naive.iter().filter(|&&r| r > rank).count() as u64;
                assert_eq!(counter.count_less(rank), less, "step {step}");
                assert_eq!(counter.count_equal(rank), equal, "step {step}");
                assert_eq!(counter.count_greater(rank), greater, "step {step}");
                assert_eq!(less + equal + greater, counter.size());
            }
        }
    }
}
