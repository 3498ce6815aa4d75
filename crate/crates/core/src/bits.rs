//! Compact bit masks used for cell and atom sets.

/// Fixed-length bit mask backed by u64 blocks.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitMask {
    len: usize,
    blocks: Vec<u64>,
}

impl BitMask {
    pub fn zeros(len: usize) -> Self {
        BitMask {
            len,
            blocks: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut m = Self::zeros(len);
        for b in &mut m.blocks {
            *b = u64::MAX;
        }
        m.trim();
        m
    }

    pub fn from_indices(len: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut m = Self::zeros(len);
        for i in idx {
            m.set(i, true);
        }
        m
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.blocks[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        let (blk, bit) = (i / 64, i % 64);
        if v {
            self.blocks[blk] |= 1 << bit;
        } else {
            self.blocks[blk] &= !(1 << bit);
        }
    }

    pub fn count(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> Self {
        let mut m = BitMask {
            len: self.len,
            blocks: self.blocks.iter().map(|b| !b).collect(),
        };
        m.trim();
        m
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.blocks
            .iter()
            .zip(&other.blocks)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint_from(&self, other: &Self) -> bool {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .all(|(a, b)| a & b == 0)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().enumerate().flat_map(|(bi, &blk)| {
            let mut blk = blk;
            std::iter::from_fn(move || {
                if blk == 0 {
                    None
                } else {
                    let t = blk.trailing_zeros() as usize;
                    blk &= blk - 1;
                    Some(bi * 64 + t)
                }
            })
        })
    }

    pub fn first_one(&self) -> Option<usize> {
        self.iter_ones().next()
    }

    fn zip(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        debug_assert_eq!(self.len, other.len);
        let mut m = BitMask {
            len: self.len,
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        };
        m.trim();
        m
    }

    fn trim(&mut self) {
        let spare = self.blocks.len() * 64 - self.len;
        if spare > 0 {
            if let Some(last) = self.blocks.last_mut() {
                *last &= u64::MAX >> spare;
            }
        }
    }
}

impl std::fmt::Debug for BitMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitMask{{")?;
        for (n, i) in self.iter_ones().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let a = BitMask::from_indices(70, [0, 3, 65]);
        let b = BitMask::from_indices(70, [3, 64]);
        assert_eq!(a.count(), 3);
        assert_eq!(a.intersection(&b).iter_ones().collect::<Vec<_>>(), [3]);
        assert_eq!(
            a.union(&b).iter_ones().collect::<Vec<_>>(),
            vec![0, 3, 64, 65]
        );
        assert_eq!(a.difference(&b).iter_ones().collect::<Vec<_>>(), [0, 65]);
        assert!(!a.is_subset_of(&b));
        assert!(BitMask::from_indices(70, [3]).is_subset_of(&a));
    }

    #[test]
    fn complement_respects_length() {
        let a = BitMask::from_indices(5, [1, 2]);
        let c = a.complement();
        assert_eq!(c.iter_ones().collect::<Vec<_>>(), vec![0, 3, 4]);
        assert_eq!(c.count(), 3);
        assert_eq!(BitMask::ones(5).count(), 5);
    }
}
