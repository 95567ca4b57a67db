//! Words over the alphabet `{1..d}` and their finite linear combinations.
//!
//! A [`WeightedWord`] is an element of the free algebra over the alphabet and
//! acts as a linear functional on the tensor algebra. It supports the two
//! products that matter for signatures: concatenation and the shuffle.
//!
//! Text grammar (used by the CLI and scenario files):
//!
//! ```text
//! word     := "e" | digits            (d <= 9, one digit per letter, e.g. "21")
//!           | int ("." int)*          (any d, e.g. "2.1.11")
//! term     := [coef "*"] word
//! weighted := ["-"] term (("+" | "-") term)*
//! ```
//!
//! `e` is the empty word; constants are written `c*e`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub type Letter = u16;

/// A finite sequence of letters. Ordered graded-lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Builds a word and checks every letter against the alphabet size.
    pub fn new(letters: impl Into<Vec<Letter>>, alphabet: usize) -> Result<Self> {
        let letters = letters.into();
        for &l in &letters {
            if l == 0 || l as usize > alphabet {
                return Err(Error::InvalidLetter { letter: l as usize, alphabet });
            }
        }
        Ok(Word(letters))
    }

    pub fn letter(l: Letter, alphabet: usize) -> Result<Self> {
        Word::new(vec![l], alphabet)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Alphabet-aware text form: digits for `d <= 9`, dotted integers above.
    pub fn to_text(&self, alphabet: usize) -> String {
        if self.is_empty() {
            return "e".to_string();
        }
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        if alphabet <= 9 {
            parts.concat()
        } else {
            parts.join(".")
        }
    }

    pub fn parse(text: &str, alphabet: usize) -> Result<Self> {
        let text = text.trim();
        if text == "e" {
            return Ok(Word::empty());
        }
        if text.is_empty() {
            return Err(Error::Parse("empty word text (use `e` for the empty word)".into()));
        }
        let letters: Vec<Letter> = if alphabet > 9 || text.contains('.') {
            text.split('.')
                .map(|p| {
                    p.parse::<Letter>()
                        .map_err(|_| Error::Parse(format!("bad letter `{p}` in word `{text}`")))
                })
                .collect::<Result<_>>()?
        } else {
            text.chars()
                .map(|c| {
                    c.to_digit(10)
                        .map(|v| v as Letter)
                        .ok_or_else(|| Error::Parse(format!("bad letter `{c}` in word `{text}`")))
                })
                .collect::<Result<_>>()?
        };
        Word::new(letters, alphabet)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Debug has no alphabet; dotted form is unambiguous.
        write!(f, "Word({})", self.to_text(10))
    }
}

/// Sparse linear combination of words over a fixed alphabet.
///
/// Zero coefficients are never stored, so structural equality is equality of
/// the represented element.
#[derive(Clone, PartialEq, Debug)]
pub struct WeightedWord {
    alphabet: usize,
    terms: BTreeMap<Word, f64>,
}

impl WeightedWord {
    pub fn zero(alphabet: usize) -> Self {
        WeightedWord { alphabet, terms: BTreeMap::new() }
    }

    /// The empty word with coefficient one, the unit for both products.
    pub fn unit(alphabet: usize) -> Self {
        WeightedWord::from_word(alphabet, Word::empty(), 1.0)
    }

    pub fn from_word(alphabet: usize, word: Word, coef: f64) -> Self {
        let mut w = WeightedWord::zero(alphabet);
        w.add_term(word, coef);
        w
    }

    pub fn letter(alphabet: usize, l: Letter) -> Result<Self> {
        Ok(WeightedWord::from_word(alphabet, Word::letter(l, alphabet)?, 1.0))
    }

    /// Builds from `(coefficient, letters)` pairs, checking letters.
    pub fn from_terms<I, L>(alphabet: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, L)>,
        L: Into<Vec<Letter>>,
    {
        let mut w = WeightedWord::zero(alphabet);
        for (c, letters) in terms {
            w.add_term(Word::new(letters, alphabet)?, c);
        }
        Ok(w)
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    /// Adds `coef * word`, dropping the entry if it cancels to zero.
    pub fn add_term(&mut self, word: Word, coef: f64) {
        if coef == 0.0 {
            return;
        }
        let entry = self.terms.entry(word);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coef);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = *o.get() + coef;
                if sum == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn remove_term(&mut self, word: &Word) -> Option<f64> {
        self.terms.remove(word)
    }

    pub fn coefficient(&self, word: &Word) -> f64 {
        self.terms.get(word).copied().unwrap_or(0.0)
    }

    /// Terms in graded-lexicographic word order.
    pub fn terms(&self) -> impl Iterator<Item = (&Word, f64)> {
        self.terms.iter().map(|(w, &c)| (w, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Length of the longest word, 0 for the zero element.
    pub fn max_len(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = WeightedWord::zero(self.alphabet);
        for (w, c) in self.terms() {
            out.add_term(w.clone(), c * factor);
        }
        out
    }

    fn check_alphabet(&self, other: &WeightedWord) -> Result<()> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch { left: self.alphabet, right: other.alphabet });
        }
        Ok(())
    }

    pub fn add(&self, other: &WeightedWord) -> Result<Self> {
        self.check_alphabet(other)?;
        let mut out = self.clone();
        for (w, c) in other.terms() {
            out.add_term(w.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &WeightedWord) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Bilinear extension of word concatenation.
    pub fn concat(&self, other: &WeightedWord) -> Result<Self> {
        self.check_alphabet(other)?;
        let mut out = WeightedWord::zero(self.alphabet);
        for (u, a) in self.terms() {
            for (v, b) in other.terms() {
                out.add_term(u.concat(v), a * b);
            }
        }
        Ok(out)
    }

    /// Bilinear extension of the shuffle product.
    pub fn shuffle(&self, other: &WeightedWord) -> Result<Self> {
        self.check_alphabet(other)?;
        let mut out = WeightedWord::zero(self.alphabet);
        for (u, a) in self.terms() {
            for (v, b) in other.terms() {
                for (w, n) in shuffle_words(u, v) {
                    out.add_term(w, a * b * n);
                }
            }
        }
        Ok(out)
    }

    /// `n`-fold shuffle power; the zeroth power is the empty word.
    pub fn shuffle_power(&self, n: u32) -> Self {
        let mut acc = WeightedWord::unit(self.alphabet);
        for _ in 0..n {
            acc = acc.shuffle(self).expect("same alphabet");
        }
        acc
    }

    /// Squared norm in the Fock space where words are orthonormal.
    pub fn fock_norm_sq(&self) -> f64 {
        self.terms.values().map(|c| c * c).sum()
    }

    pub fn parse(text: &str, alphabet: usize) -> Result<Self> {
        let mut out = WeightedWord::zero(alphabet);
        for (sign, term) in split_terms(text)? {
            let (coef, word) = match term.split_once('*') {
                Some((c, w)) => {
                    let c: f64 = c
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad coefficient `{}`", c.trim())))?;
                    (c, Word::parse(w, alphabet)?)
                }
                None => (1.0, Word::parse(&term, alphabet)?),
            };
            out.add_term(word, sign * coef);
        }
        Ok(out)
    }
}

impl fmt::Display for WeightedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0*e");
        }
        for (i, (w, c)) in self.terms().enumerate() {
            let word = w.to_text(self.alphabet);
            if i == 0 {
                write!(f, "{c}*{word}")?;
            } else if c < 0.0 {
                write!(f, " - {}*{word}", -c)?;
            } else {
                write!(f, " + {c}*{word}")?;
            }
        }
        Ok(())
    }
}

/// Splits `a + b - c` into signed terms, leaving exponent signs (`1e-3`)
/// inside coefficients alone.
fn split_terms(text: &str) -> Result<Vec<(f64, String)>> {
    let mut out = Vec::new();
    let mut sign = 1.0;
    let mut current = String::new();
    let chars: Vec<char> = text.chars().collect();
    for (i, &ch) in chars.iter().enumerate() {
        if ch == '+' || ch == '-' {
            let in_exponent = !current.contains('*')
                && i >= 2
                && matches!(chars[i - 1], 'e' | 'E')
                && (chars[i - 2].is_ascii_digit() || chars[i - 2] == '.');
            if !in_exponent {
                if current.trim().is_empty() {
                    if !out.is_empty() || i != first_non_space(&chars) {
                        return Err(Error::Parse(format!("dangling operator in `{text}`")));
                    }
                } else {
                    out.push((sign, std::mem::take(&mut current)));
                }
                sign = if ch == '-' { -1.0 } else { 1.0 };
                continue;
            }
        }
        current.push(ch);
    }
    if current.trim().is_empty() {
        return Err(Error::Parse(format!("missing term in `{text}`")));
    }
    out.push((sign, current));
    Ok(out)
}

fn first_non_space(chars: &[char]) -> usize {
    chars.iter().position(|c| !c.is_whitespace()).unwrap_or(0)
}

impl FromStr for Word {
    type Err = Error;

    /// Parses with an alphabet large enough for any letter; prefer
    /// [`Word::parse`] when the alphabet is known.
    fn from_str(s: &str) -> Result<Self> {
        Word::parse(s, Letter::MAX as usize)
    }
}

/// Shuffle of two words with multiplicities, via the prefix recursion
/// `(ua) ⧢ (vb) = (u ⧢ vb)a + (ua ⧢ v)b`.
pub fn shuffle_words(u: &Word, v: &Word) -> BTreeMap<Word, f64> {
    let (n, m) = (u.len(), v.len());
    // table[j] holds u[..i] ⧢ v[..j] for the current row i.
    let mut table: Vec<BTreeMap<Word, f64>> = Vec::with_capacity(m + 1);
    let mut prefix = BTreeMap::new();
    prefix.insert(Word::empty(), 1.0);
    table.push(prefix);
    for j in 1..=m {
        let prev = append_letter(&table[j - 1], v.0[j - 1]);
        table.push(prev);
    }
    for i in 1..=n {
        let a = u.0[i - 1];
        let mut row: Vec<BTreeMap<Word, f64>> = Vec::with_capacity(m + 1);
        row.push(append_letter(&table[0], a));
        for j in 1..=m {
            let mut cell = append_letter(&table[j], a);
            for (w, c) in append_letter(&row[j - 1], v.0[j - 1]) {
                *cell.entry(w).or_insert(0.0) += c;
            }
            row.push(cell);
        }
        table = row;
    }
    table.pop().unwrap_or_default()
}

fn append_letter(src: &BTreeMap<Word, f64>, l: Letter) -> BTreeMap<Word, f64> {
    src.iter()
        .map(|(w, &c)| {
            let mut letters = w.0.clone();
            letters.push(l);
            (Word(letters), c)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ww(text: &str, d: usize) -> WeightedWord {
        WeightedWord::parse(text, d).unwrap()
    }

    /// Every order-preserving interleaving, enumerated by choosing positions.
    fn brute_force_shuffle(u: &[Letter], v: &[Letter]) -> BTreeMap<Word, f64> {
        let n = u.len() + v.len();
        let mut out = BTreeMap::new();
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != u.len() {
                continue;
            }
            let (mut i, mut j) = (0, 0);
            let mut w = Vec::with_capacity(n);
            for pos in 0..n {
                if mask & (1 << pos) != 0 {
                    w.push(u[i]);
                    i += 1;
                } else {
                    w.push(v[j]);
                    j += 1;
                }
            }
            *out.entry(Word(w)).or_insert(0.0) += 1.0;
        }
        out
    }

    #[test]
    fn concat_example() {
        let left = ww("3*12 + 1", 3);
        let right = ww("2 + 3", 3);
        assert_eq!(left.concat(&right).unwrap(), ww("3*122 + 3*123 + 12 + 13", 3));
    }

    #[test]
    fn concat_unit_and_scalars() {
        let w = ww("2*121 - 0.5*3", 3);
        assert_eq!(WeightedWord::unit(3).concat(&w).unwrap(), w);
        assert_eq!(ww("2*1", 2).concat(&ww("3*2", 2)).unwrap(), ww("6*12", 2));
    }

    #[test]
    fn concat_alphabet_mismatch() {
        let err = ww("1", 2).concat(&ww("1", 3)).unwrap_err();
        assert!(matches!(err, Error::AlphabetMismatch { left: 2, right: 3 }));
        assert!(ww("1", 2).shuffle(&ww("1", 3)).is_err());
    }

    #[test]
    fn concat_not_commutative() {
        let (a, b) = (ww("1", 2), ww("2", 2));
        assert_ne!(a.concat(&b).unwrap(), b.concat(&a).unwrap());
    }

    #[test]
    fn shuffle_examples() {
        assert_eq!(ww("12", 3).shuffle(&ww("3", 3)).unwrap(), ww("123 + 132 + 312", 3));
        let p = ww("2*12 - 1", 2);
        assert_eq!(p.shuffle(&WeightedWord::unit(2)).unwrap(), p);
        let expected: WeightedWord = {
            let mut w = WeightedWord::zero(1);
            for (word, c) in brute_force_shuffle(&[1], &[1]) {
                w.add_term(word, c);
            }
            w
        };
        assert_eq!(ww("1", 1).shuffle(&ww("1", 1)).unwrap(), expected);
        assert_eq!(expected, ww("2*11", 1));
    }

    #[test]
    fn shuffle_power_examples() {
        for k in 0..7u32 {
            let fact: f64 = (1..=k).map(f64::from).product();
            let word = Word::new(vec![2; k as usize], 3).unwrap();
            assert_eq!(ww("2", 3).shuffle_power(k), WeightedWord::from_word(3, word, fact));
        }
        assert_eq!(ww("1 + 2", 2).shuffle_power(0), WeightedWord::unit(2));
        assert_eq!(ww("1 + 2", 2).shuffle_power(2), ww("2*11 + 2*12 + 2*21 + 2*22", 2));
    }

    #[test]
    fn fock_norm_examples() {
        assert_eq!(ww("2*e + 3*1 + 1*12", 2).fock_norm_sq(), 14.0);
        assert_eq!(WeightedWord::zero(2).fock_norm_sq(), 0.0);
        assert_eq!(ww("5*121", 2).fock_norm_sq(), 25.0);
    }

    #[test]
    fn text_round_trip_and_grammar() {
        let w = ww("2*e + 3*1 + 1*12", 2);
        assert_eq!(w.to_string(), "2*e + 3*1 + 1*12");
        assert_eq!(ww(&w.to_string(), 2), w);
        assert_eq!(ww("21-31", 3), ww("1*21 - 1*31", 3));
        assert_eq!(ww("-31 - 0.5*1", 3).coefficient(&Word::parse("1", 3).unwrap()), -0.5);
        assert_eq!(ww("1e-3*2 + 2.5*e", 2).coefficient(&Word::empty()), 2.5);
        assert_eq!(ww("1e-3*2", 2).coefficient(&Word::parse("2", 2).unwrap()), 1e-3);
        let big = ww("2*2.1.11", 12);
        assert_eq!(big.to_string(), "2*2.1.11");
        assert!(WeightedWord::parse("1 + ", 2).is_err());
        assert!(WeightedWord::parse("13", 2).is_err());
        assert!(WeightedWord::parse("x*1", 2).is_err());
        assert!(Word::parse("", 2).is_err());
    }

    #[test]
    fn cancellation_removes_terms() {
        let w = ww("12 + 1", 2).sub(&ww("12", 2)).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w.coefficient(&Word::parse("12", 2).unwrap()), 0.0);
        let mut v = ww("1", 2);
        v.add_term(Word::parse("2", 2).unwrap(), 4.0);
        v.remove_term(&Word::parse("2", 2).unwrap());
        assert_eq!(v, ww("1", 2));
    }

    #[test]
    fn graded_lex_order() {
        let w = ww("21 + 2 + 111 + e + 12", 2);
        let order: Vec<String> = w.terms().map(|(w, _)| w.to_text(2)).collect();
        assert_eq!(order, ["e", "2", "12", "21", "111"]);
    }

    fn arb_word(d: Letter, max_len: usize) -> impl Strategy<Value = Vec<Letter>> {
        prop::collection::vec(1..=d, 0..=max_len)
    }

    fn arb_weighted(d: Letter) -> impl Strategy<Value = WeightedWord> {
        prop::collection::vec((-3i32..=3, arb_word(d, 3)), 1..4).prop_map(move |terms| {
            WeightedWord::from_terms(d as usize, terms.into_iter().map(|(c, w)| (c as f64, w)))
                .unwrap()
        })
    }

    proptest! {
        #[test]
        fn shuffle_matches_brute_force(u in arb_word(3, 4), v in arb_word(3, 4)) {
            let fast = shuffle_words(&Word(u.clone()), &Word(v.clone()));
            prop_assert_eq!(fast, brute_force_shuffle(&u, &v));
        }

        #[test]
        fn shuffle_commutative_associative(a in arb_weighted(2), b in arb_weighted(2), c in arb_weighted(2)) {
            prop_assert_eq!(a.shuffle(&b).unwrap(), b.shuffle(&a).unwrap());
            let left = a.shuffle(&b).unwrap().shuffle(&c).unwrap();
            let right = a.shuffle(&b.shuffle(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn concat_associative(a in arb_weighted(3), b in arb_weighted(3), c in arb_weighted(3)) {
            let left = a.concat(&b).unwrap().concat(&c).unwrap();
            let right = a.concat(&b.concat(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn shuffle_lengths_and_mass(n in 0usize..4, m in 0usize..4) {
            // distinct letters 1..=n+m
            let u: Vec<Letter> = (1..=n as Letter).collect();
            let v: Vec<Letter> = (n as Letter + 1..=(n + m) as Letter).collect();
            let s = shuffle_words(&Word(u), &Word(v));
            prop_assert!(s.keys().all(|w| w.len() == n + m));
            let mass: f64 = s.values().sum();
            let binom: f64 = (1..=m).map(|k| (n + k) as f64 / k as f64).product();
            prop_assert!((mass - binom).abs() < 1e-9);
        }

        #[test]
        fn no_zero_coefficients(a in arb_weighted(2), b in arb_weighted(2)) {
            for w in [a.shuffle(&b).unwrap(), a.concat(&b).unwrap(), a.sub(&a).unwrap(), a.add(&b).unwrap()] {
                prop_assert!(w.terms().all(|(_, c)| c != 0.0));
            }
        }

        #[test]
        fn parse_display_round_trip(a in arb_weighted(3)) {
            prop_assert_eq!(WeightedWord::parse(&a.to_string(), 3).unwrap(), a);
        }
    }
}
