//! Active-vertex tracking.

/// Fixed-size bitmap over vertex ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitmap {
    words: Vec<u64>,
    len: usize,
}

impl Bitmap {
    pub fn new(len: usize) -> Self {
        Bitmap { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn get(&self, i: u32) -> bool {
        let i = i as usize;
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: u32) {
        let i = i as usize;
        debug_assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Iterate set bits in ascending order within `[start, end)`.
    pub fn iter_range(&self, start: u32, end: u32) -> BitmapRangeIter<'_> {
        BitmapRangeIter { bitmap: self, next: start, end }
    }

    pub fn iter(&self) -> BitmapRangeIter<'_> {
        self.iter_range(0, self.len as u32)
    }
}

pub struct BitmapRangeIter<'a> {
    bitmap: &'a Bitmap,
    next: u32,
    end: u32,
}

impl Iterator for BitmapRangeIter<'_> {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        while self.next < self.end {
            let word_idx = self.next as usize / 64;
            let word = self.bitmap.words[word_idx] >> (self.next % 64);
            if word == 0 {
                // Skip to the next word boundary.
                self.next = ((word_idx as u32) + 1) * 64;
                continue;
            }
            let v = self.next + word.trailing_zeros();
            if v >= self.end {
                return None;
            }
            self.next = v + 1;
            return Some(v);
        }
        None
    }
}

/// Vertices whose values changed in the previous step, plus the iteration
/// counter of the step that produced them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontierState {
    pub active: Bitmap,
    pub iteration: u32,
}

impl FrontierState {
    pub fn empty(num_vertices: u32) -> Self {
        FrontierState { active: Bitmap::new(num_vertices as usize), iteration: 0 }
    }

    pub fn from_vertices(num_vertices: u32, vertices: impl IntoIterator<Item = u32>) -> Self {
        let mut f = Self::empty(num_vertices);
        for v in vertices {
            f.active.set(v);
        }
        f
    }

    pub fn all(num_vertices: u32) -> Self {
        Self::from_vertices(num_vertices, 0..num_vertices)
    }

    pub fn active_count(&self) -> u64 {
        self.active.count()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_iterate() {
        let mut b = Bitmap::new(200);
        for &i in &[0u32, 63, 64, 65, 130, 199] {
            b.set(i);
        }
        assert!(b.get(63) && b.get(64) && !b.get(62));
        assert_eq!(b.count(), 6);
        let got: Vec<u32> = b.iter().collect();
        assert_eq!(got, vec![0, 63, 64, 65, 130, 199]);
        let ranged: Vec<u32> = b.iter_range(64, 199).collect();
        assert_eq!(ranged, vec![64, 65, 130]);
    }

    #[test]
    fn empty_bitmap_iterates_nothing() {
        let b = Bitmap::new(100);
        assert!(b.is_empty());
        assert_eq!(b.iter().count(), 0);
    }
}
