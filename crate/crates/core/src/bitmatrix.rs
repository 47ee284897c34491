//! Packed boolean matrix with row and column access paths.

/// An `rows x cols` boolean matrix stored as row-major packed `u64` words,
/// plus a packed transpose so column scans cost `rows / 64` word operations.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    row_words: usize,
    col_words: usize,
    by_row: Vec<u64>,
    by_col: Vec<u64>,
}

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

impl BitMatrix {
    /// Build from a predicate over `(row, col)`, visiting entries row by row.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let row_words = words_for(cols);
        let col_words = words_for(rows);
        let mut by_row = vec![0u64; rows * row_words];
        let mut by_col = vec![0u64; cols * col_words];
        for r in 0..rows {
            for c in 0..cols {
                if f(r, c) {
                    by_row[r * row_words + c / 64] |= 1 << (c % 64);
                    by_col[c * col_words + r / 64] |= 1 << (r % 64);
                }
            }
        }
        Self { rows, cols, row_words, col_words, by_row, by_col }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| false)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        self.by_row[r * self.row_words + c / 64] >> (c % 64) & 1 == 1
    }

    /// Packed words of row `r` (bit `c % 64` of word `c / 64`).
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.by_row[r * self.row_words..(r + 1) * self.row_words]
    }

    /// Packed words of column `c` (bit `r % 64` of word `r / 64`).
    pub fn col_words(&self, c: usize) -> &[u64] {
        &self.by_col[c * self.col_words..(c + 1) * self.col_words]
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_words(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn col_weight(&self, c: usize) -> usize {
        self.col_words(c).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Column indices set in row `r`, ascending.
    pub fn row_support(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        ones(self.row_words(r))
    }

    /// Number of rows in `mask` (packed over rows) where column `c` is set.
    pub fn col_dot(&self, c: usize, mask: &BitVec) -> usize {
        debug_assert_eq!(mask.len(), self.rows);
        self.col_words(c)
            .iter()
            .zip(mask.words())
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }
}

impl std::fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows.min(16) {
            let line: String = (0..self.cols.min(64))
                .map(|c| if self.get(r, c) { '1' } else { '0' })
                .collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

fn ones(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(wi, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let b = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(wi * 64 + b)
        })
    })
}

/// Packed boolean vector.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; words_for(len)] }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        debug_assert!(i < self.len);
        if b {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Bitwise complement restricted to the first `len` bits.
    pub fn complement(&self) -> Self {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        if !self.len.is_multiple_of(64) {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << (self.len % 64)) - 1;
            }
        }
        Self { len: self.len, words }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        ones(&self.words)
    }
}
