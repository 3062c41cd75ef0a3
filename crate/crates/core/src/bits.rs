//! Word-slice bitset helpers.

pub(crate) const WORD: usize = 64;

pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

#[inline]
pub(crate) fn contains(words: &[u64], bit: usize) -> bool {
    words.get(bit / WORD).is_some_and(|w| w & (1 << (bit % WORD)) != 0)
}

#[inline]
pub(crate) fn insert(words: &mut [u64], bit: usize) {
    words[bit / WORD] |= 1 << (bit % WORD);
}

#[inline]
pub(crate) fn remove(words: &mut [u64], bit: usize) {
    words[bit / WORD] &= !(1 << (bit % WORD));
}

pub(crate) fn is_clear(words: &[u64]) -> bool {
    words.iter().all(|&w| w == 0)
}

pub(crate) fn count(words: &[u64]) -> usize {
    words.iter().map(|w| w.count_ones() as usize).sum()
}

pub(crate) fn intersect_with(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d &= s;
    }
}

pub(crate) fn intersection_count(a: &[u64], b: &[u64]) -> usize {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as usize).sum()
}

/// Set bits of `a & b`, ascending. Pass the same slice twice for plain `a`.
pub(crate) fn ones_and<'a>(a: &'a [u64], b: &'a [u64]) -> impl Iterator<Item = usize> + 'a {
    a.iter().zip(b).enumerate().flat_map(|(n, (x, y))| {
        let mut w = x & y;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let bit = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(n * WORD + bit)
        })
    })
}

pub(crate) fn ones(a: &[u64]) -> impl Iterator<Item = usize> + '_ {
    ones_and(a, a)
}

/// Set bits of `a & !b`, ascending.
pub(crate) fn ones_and_not<'a>(a: &'a [u64], b: &'a [u64]) -> impl Iterator<Item = usize> + 'a {
    a.iter().zip(b).enumerate().flat_map(|(n, (x, y))| {
        let mut w = x & !y;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let bit = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(n * WORD + bit)
        })
    })
}
