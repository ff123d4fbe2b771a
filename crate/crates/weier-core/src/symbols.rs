//! Finite digit words and eventually periodic digit streams over {0,...,b-1}.

use crate::CoreError;

/// A finite sequence of digits in `[0, b)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    digits: Vec<u32>,
}

impl Word {
    pub fn new(digits: Vec<u32>, b: u32) -> Result<Self, CoreError> {
        if let Some(&d) = digits.iter().find(|&&d| d >= b) {
            return Err(CoreError::InputError(format!(
                "digit {d} out of range for base {b}"
            )));
        }
        Ok(Word { digits })
    }

    pub fn empty() -> Self {
        Word { digits: Vec::new() }
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// The reversal `i* = i_n i_{n-1} ... i_1`; an involution.
    pub fn reversed(&self) -> Word {
        let mut digits = self.digits.clone();
        digits.reverse();
        Word { digits }
    }
}

/// An infinite digit stream `j = prefix cycle cycle ...`.
///
/// Every quantity computed from a stream depends on the tail only through a
/// geometrically decaying term, so the eventually periodic representation
/// loses nothing; a pure prefix is padded with the cycle `0`.
#[derive(Clone, Debug)]
pub struct SymbolStream {
    prefix: Word,
    cycle: Word,
}

impl SymbolStream {
    pub fn new(prefix: Word, cycle: Word) -> Result<Self, CoreError> {
        if cycle.is_empty() {
            return Err(CoreError::InputError("stream cycle must be nonempty".into()));
        }
        Ok(SymbolStream { prefix, cycle })
    }

    /// The constant stream `digit digit digit ...`.
    pub fn constant(digit: u32, b: u32) -> Result<Self, CoreError> {
        Ok(SymbolStream {
            prefix: Word::empty(),
            cycle: Word::new(vec![digit], b)?,
        })
    }

    /// Finite digits followed by zeros.
    pub fn from_prefix(prefix: Word, b: u32) -> Result<Self, CoreError> {
        Ok(SymbolStream {
            prefix,
            cycle: Word::new(vec![0], b)?,
        })
    }

    /// 0-based digit access: `digit(0)` is the paper's `j_1`.
    pub fn digit(&self, i: usize) -> u32 {
        let p = self.prefix.len();
        if i < p {
            self.prefix.digits()[i]
        } else {
            self.cycle.digits()[(i - p) % self.cycle.len()]
        }
    }

    /// The stream `w j` (the word's digits first, then this stream).
    pub fn prepend(&self, w: &Word) -> SymbolStream {
        let mut digits = w.digits().to_vec();
        digits.extend_from_slice(self.prefix.digits());
        SymbolStream {
            prefix: Word { digits },
            cycle: self.cycle.clone(),
        }
    }

    pub fn prefix(&self) -> &Word {
        &self.prefix
    }

    pub fn cycle(&self) -> &Word {
        &self.cycle
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl PartialEq for SymbolStream {
    /// Digitwise equality for all indices. Two eventually periodic streams
    /// agree everywhere iff they agree up to the common prefix length plus
    /// the lcm of the cycle lengths.
    fn eq(&self, other: &Self) -> bool {
        let p = self.prefix.len().max(other.prefix.len());
        let c1 = self.cycle.len();
        let c2 = other.cycle.len();
        let lcm = c1 / gcd(c1, c2) * c2;
        (0..p + lcm).all(|i| self.digit(i) == other.digit(i))
    }
}

impl Eq for SymbolStream {}
