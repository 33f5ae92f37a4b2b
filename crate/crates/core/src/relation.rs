//! Dense binary relations on `0..n` stored as bitset rows.

use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Relation {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Relation { n, words, bits: vec![0; n * words] }
    }

    pub fn identity(n: usize) -> Self {
        let mut r = Self::empty(n);
        for i in 0..n {
            r.set(i, i, true);
        }
        r
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut r = Self::empty(n);
        for i in 0..n {
            for j in 0..n {
                if f(i, j) {
                    r.set(i, j, true);
                }
            }
        }
        r
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut r = Self::empty(n);
        for (i, j) in pairs {
            r.set(i, j, true);
        }
        r
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        let w = &mut self.bits[i * self.words + j / 64];
        if v {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    /// Elements related to `i` on the right.
    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.get(i, j))
    }

    /// Elements related to `j` on the left.
    pub fn predecessors(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&i| self.get(i, j))
    }

    /// Row inclusion: every successor of `i` is a successor of `j`.
    pub fn row_subset(&self, i: usize, j: usize) -> bool {
        self.row(i).iter().zip(self.row(j)).all(|(a, b)| a & !b == 0)
    }

    /// Column inclusion: every predecessor of `i` is a predecessor of `j`.
    pub fn column_subset(&self, i: usize, j: usize) -> bool {
        (0..self.n).all(|k| !self.get(k, i) || self.get(k, j))
    }

    pub fn transitive_closure(&self) -> Self {
        let mut r = self.clone();
        let w = r.words;
        for k in 0..r.n {
            let rk: Vec<u64> = r.row(k).to_vec();
            for i in 0..r.n {
                if r.get(i, k) {
                    for (a, b) in r.bits[i * w..(i + 1) * w].iter_mut().zip(&rk) {
                        *a |= b;
                    }
                }
            }
        }
        r
    }

    pub fn reflexive_closure(&self) -> Self {
        let mut r = self.clone();
        for i in 0..r.n {
            r.set(i, i, true);
        }
        r
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.n == other.n && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.successors(i).map(move |j| (i, j)))
    }

    /// Rows rendered as `0`/`1` strings, the JSON bitset form.
    pub fn to_bitset_rows(&self) -> Vec<String> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| if self.get(i, j) { '1' } else { '0' }).collect())
            .collect()
    }

    pub fn from_bitset_rows(rows: &[String]) -> Option<Self> {
        let n = rows.len();
        let mut r = Self::empty(n);
        for (i, row) in rows.iter().enumerate() {
            if row.chars().count() != n {
                return None;
            }
            for (j, c) in row.chars().enumerate() {
                match c {
                    '1' => r.set(i, j, true),
                    '0' => {}
                    _ => return None,
                }
            }
        }
        Some(r)
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_bitset_rows()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_of_a_path_is_the_strict_order() {
        let r = Relation::from_pairs(4, [(0, 1), (1, 2), (2, 3)]);
        let t = r.transitive_closure();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(t.get(i, j), i < j);
            }
        }
    }

    #[test]
    fn bitset_rows_round_trip() {
        let r = Relation::from_fn(70, |i, j| (i * 7 + j) % 3 == 0);
        let back = Relation::from_bitset_rows(&r.to_bitset_rows()).unwrap();
        assert_eq!(r, back);
    }

    #[test]
    fn row_subset_matches_pointwise() {
        let r = Relation::from_fn(5, |i, j| j >= i);
        assert!(r.row_subset(3, 1));
        assert!(!r.row_subset(1, 3));
        assert!(r.column_subset(1, 3));
    }
}
