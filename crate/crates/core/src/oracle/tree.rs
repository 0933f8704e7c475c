/// Growable segment tree answering range-minimum and range-maximum queries.
#[derive(Clone, Debug)]
pub(crate) struct MinMaxTree<T> {
    len: usize,
    cap: usize,
    nodes: Vec<Option<(T, T)>>,
}

fn merge<T: Clone + PartialOrd>(a: &Option<(T, T)>, b: &Option<(T, T)>) -> Option<(T, T)> {
    match (a, b) {
        (None, x) | (x, None) => x.clone(),
        (Some((amin, amax)), Some((bmin, bmax))) => Some((
            if bmin < amin { bmin.clone() } else { amin.clone() },
            if bmax > amax { bmax.clone() } else { amax.clone() },
        )),
    }
}

impl<T: Clone + PartialOrd> MinMaxTree<T> {
    pub(crate) fn new() -> Self {
        MinMaxTree {
            len: 0,
            cap: 1,
            nodes: vec![None; 2],
        }
    }

    pub(crate) fn from_values(values: impl IntoIterator<Item = T>) -> Self {
        let mut t = Self::new();
        for v in values {
            t.push(v);
        }
        t
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    pub(crate) fn push(&mut self, v: T) {
        if self.len == self.cap {
            let leaves: Vec<_> = self.nodes[self.cap..].to_vec();
            self.cap *= 2;
            self.nodes = vec![None; 2 * self.cap];
            for (i, leaf) in leaves.into_iter().enumerate() {
                self.nodes[self.cap + i] = leaf;
            }
            for i in (1..self.cap).rev() {
                self.nodes[i] = merge(&self.nodes[2 * i], &self.nodes[2 * i + 1]);
            }
        }
        let mut i = self.cap + self.len;
        self.nodes[i] = Some((v.clone(), v));
        self.len += 1;
        while i > 1 {
            i /= 2;
            self.nodes[i] = merge(&self.nodes[2 * i], &self.nodes[2 * i + 1]);
        }
    }

    /// `(min, max)` over the inclusive index range `[lo, hi]`.
    pub(crate) fn query(&self, lo: usize, hi: usize) -> Option<(T, T)> {
        if lo > hi || hi >= self.len {
            return None;
        }
        let (mut l, mut r) = (lo + self.cap, hi + self.cap + 1);
        let mut acc = None;
        while l < r {
            if l & 1 == 1 {
                acc = merge(&acc, &self.nodes[l]);
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                acc = merge(&acc, &self.nodes[r]);
            }
            l /= 2;
            r /= 2;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn matches_naive(values in prop::collection::vec(-1000i64..1000, 1..200), a in 0usize..200, b in 0usize..200) {
            let t = MinMaxTree::from_values(values.iter().copied());
            let (lo, hi) = (a.min(b) % values.len(), a.max(b) % values.len());
            let (lo, hi) = (lo.min(hi), lo.max(hi));
            let w = &values[lo..=hi];
            let expect = (*w.iter().min().unwrap(), *w.iter().max().unwrap());
            prop_assert_eq!(t.query(lo, hi), Some(expect));
        }
    }

    #[test]
    fn out_of_range_is_none() {
        let t = MinMaxTree::from_values([1.0, 2.0]);
        assert_eq!(t.query(0, 2), None);
        assert_eq!(t.query(1, 0), None);
        assert_eq!(t.query(0, 1), Some((1.0, 2.0)));
    }
}
