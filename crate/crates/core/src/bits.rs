//! Small helpers for `u64` element sets. Every poset in this crate has at most
//! [`MAX_ELEMENTS`] elements, so a subset of its carrier fits in one word.

pub const MAX_ELEMENTS: usize = 64;

#[inline]
pub fn bit(i: usize) -> u64 {
    1u64 << i
}

#[inline]
pub fn has(set: u64, i: usize) -> bool {
    set >> i & 1 == 1
}

#[inline]
pub fn full(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Iterates the members of a set in increasing order.
pub fn iter(mut set: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if set == 0 {
            None
        } else {
            let i = set.trailing_zeros() as usize;
            set &= set - 1;
            Some(i)
        }
    })
}

pub fn from_indices(indices: &[usize]) -> u64 {
    indices.iter().fold(0, |acc, &i| acc | bit(i))
}

pub fn to_indices(set: u64) -> Vec<usize> {
    iter(set).collect()
}

/// All `k`-element subsets of `{0, …, n-1}` in increasing numeric order (Gosper's hack).
pub fn subsets_of_size(n: usize, k: usize) -> impl Iterator<Item = u64> {
    let limit = full(n);
    let mut next = if k > n {
        None
    } else if k == 0 {
        Some(0)
    } else {
        Some(full(k))
    };
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur.wrapping_add(c);
            if r == 0 {
                None
            } else {
                let n2 = (((r ^ cur) >> 2) / c) | r;
                (n2 & !limit == 0).then_some(n2)
            }
        };
        Some(cur)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gosper_counts() {
        assert_eq!(subsets_of_size(5, 2).count(), 10);
        assert_eq!(subsets_of_size(5, 0).collect::<Vec<_>>(), vec![0]);
        assert_eq!(subsets_of_size(5, 5).collect::<Vec<_>>(), vec![0b11111]);
        assert_eq!(subsets_of_size(3, 4).count(), 0);
        let v: Vec<u64> = subsets_of_size(4, 2).collect();
        assert_eq!(v, vec![0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]);
    }

    #[test]
    fn iter_roundtrip() {
        assert_eq!(to_indices(from_indices(&[0, 3, 7])), vec![0, 3, 7]);
        assert_eq!(full(64), u64::MAX);
    }
}
