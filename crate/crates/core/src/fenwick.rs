//! Binary indexed tree over counts, used for rank counting and for decoding
//! inversion tables.

#[derive(Debug, Clone)]
pub(crate) struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    pub(crate) fn new(len: usize) -> Self {
        Self {
            tree: vec![0; len + 1],
        }
    }

    /// A tree where every slot holds one.
    pub(crate) fn ones(len: usize) -> Self {
        let mut tree = vec![0u64; len + 1];
        for i in 1..=len {
            tree[i] += 1;
            let parent = i + (i & i.wrapping_neg());
            if parent <= len {
                tree[parent] += tree[i];
            }
        }
        Self { tree }
    }

    pub(crate) fn add(&mut self, index: usize, delta: u64) {
        let mut i = index + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    pub(crate) fn sub(&mut self, index: usize, delta: u64) {
        let mut i = index + 1;
        while i < self.tree.len() {
            self.tree[i] -= delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum of slots `0..end`.
    pub(crate) fn prefix(&self, end: usize) -> u64 {
        let mut i = end;
        let mut sum = 0;
        while i > 0 {
            sum += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        sum
    }

    /// Smallest index `i` such that `prefix(i + 1) > rank`. Requires every
    /// slot to be non-negative and `rank < prefix(len)`.
    pub(crate) fn select(&self, mut rank: u64) -> usize {
        let len = self.tree.len() - 1;
        let mut pos = 0;
        let mut step = if len == 0 {
            0
        } else {
            1 << (usize::BITS - 1 - len.leading_zeros())
        };
        while step > 0 {
            let next = pos + step;
            if next <= len && self.tree[next] <= rank {
                pos = next;
                rank -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_and_select_agree() {
        let mut f = Fenwick::new(10);
        for i in [1, 3, 3, 7, 9] {
            f.add(i, 1);
        }
        assert_eq!(f.prefix(0), 0);
        assert_eq!(f.prefix(4), 3);
        assert_eq!(f.prefix(10), 5);
        assert_eq!(f.select(0), 1);
        assert_eq!(f.select(1), 3);
        assert_eq!(f.select(2), 3);
        assert_eq!(f.select(3), 7);
        assert_eq!(f.select(4), 9);
        f.sub(3, 2);
        assert_eq!(f.select(1), 7);
    }

    #[test]
    fn ones_matches_incremental_build() {
        let a = Fenwick::ones(13);
        let mut b = Fenwick::new(13);
        for i in 0..13 {
            b.add(i, 1);
        }
        for end in 0..=13 {
            assert_eq!(a.prefix(end), b.prefix(end));
        }
    }
}
