//! Character inventories and corpus tallies.
//!
//! Frequencies are kept as raw integer counts; every cost downstream divides
//! by the corpus size `n` itself.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// 1-based key index into a [`CharacterInventory`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KeyIndex(pub usize);

impl fmt::Display for KeyIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// What a key types. `Blank` keys pad the grid and never occur in text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Glyph {
    Char(char),
    Blank,
}

impl Glyph {
    pub const BLANK_TOKEN: &'static str = "\\blank";
    pub const SPACE_TOKEN: &'static str = "\\space";

    /// Parses one token of an inventory file or keyboard-spec inventory list.
    ///
    /// `\blank` is a padding key, `\space` an alias for a literal space and
    /// `\\` a literal backslash. Anything else must be a single character.
    pub fn parse_token(token: &str) -> Result<Self, CorpusError> {
        match token {
            Self::BLANK_TOKEN => return Ok(Glyph::Blank),
            Self::SPACE_TOKEN => return Ok(Glyph::Char(' ')),
            "\\\\" => return Ok(Glyph::Char('\\')),
            _ => {}
        }
        let mut chars = token.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Ok(Glyph::Char(c)),
            _ => Err(CorpusError::BadGlyphToken(token.to_string())),
        }
    }

    /// Token form accepted by [`Glyph::parse_token`]; spaces stay literal.
    pub fn token(&self) -> String {
        match self {
            Glyph::Blank => Self::BLANK_TOKEN.to_string(),
            Glyph::Char('\\') => "\\\\".to_string(),
            Glyph::Char(c) => c.to_string(),
        }
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Glyph::Blank)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorpusError {
    #[error("inventory is empty")]
    EmptyInventory,
    #[error("glyph {0:?} appears more than once in the inventory")]
    DuplicateGlyph(char),
    #[error("invalid glyph token {0:?}")]
    BadGlyphToken(String),
    #[error("corpus contains no inventory characters")]
    CorpusEmpty,
    #[error("character {glyph:?} at position {position} is not in the inventory")]
    UnknownCharacter { position: usize, glyph: char },
    #[error("inventory file line {line}: {source}")]
    InventoryLine {
        line: usize,
        #[source]
        source: Box<CorpusError>,
    },
}

/// Ordered, duplicate-free list of glyphs; position `i - 1` holds key `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterInventory {
    glyphs: Vec<Glyph>,
}

impl CharacterInventory {
    pub fn new(glyphs: Vec<Glyph>) -> Result<Self, CorpusError> {
        if glyphs.is_empty() {
            return Err(CorpusError::EmptyInventory);
        }
        let mut seen = HashMap::new();
        for g in &glyphs {
            if let Glyph::Char(c) = g {
                if seen.insert(*c, ()).is_some() {
                    return Err(CorpusError::DuplicateGlyph(*c));
                }
            }
        }
        Ok(Self { glyphs })
    }

    /// 26 lowercase letters, space, `. , ' ? ! - : ;`, 19 blanks, then the
    /// digits 0-9 at keys 55-64 (an 8x8 grid).
    pub fn default_64() -> Self {
        let mut glyphs: Vec<Glyph> = ('a'..='z').map(Glyph::Char).collect();
        glyphs.push(Glyph::Char(' '));
        glyphs.extend(".,'?!-:;".chars().map(Glyph::Char));
        while glyphs.len() < 54 {
            glyphs.push(Glyph::Blank);
        }
        glyphs.extend(('0'..='9').map(Glyph::Char));
        Self::new(glyphs).expect("default inventory is valid")
    }

    /// Parses the one-glyph-per-line format. Line number is the key index.
    pub fn from_lines(text: &str) -> Result<Self, CorpusError> {
        let mut glyphs = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let g = Glyph::parse_token(line).map_err(|e| CorpusError::InventoryLine {
                line: idx + 1,
                source: Box::new(e),
            })?;
            glyphs.push(g);
        }
        Self::new(glyphs)
    }

    /// Inverse of [`CharacterInventory::from_lines`]; spaces are written as `\space`.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for g in &self.glyphs {
            match g {
                Glyph::Char(' ') => out.push_str(Glyph::SPACE_TOKEN),
                other => out.push_str(&other.token()),
            }
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.glyphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.glyphs.is_empty()
    }

    pub fn glyphs(&self) -> &[Glyph] {
        &self.glyphs
    }

    pub fn glyph(&self, key: KeyIndex) -> Option<Glyph> {
        key.0
            .checked_sub(1)
            .and_then(|i| self.glyphs.get(i).copied())
    }

    /// Key index of a non-blank glyph.
    pub fn index_of(&self, c: char) -> Option<KeyIndex> {
        self.glyphs
            .iter()
            .position(|g| *g == Glyph::Char(c))
            .map(|i| KeyIndex(i + 1))
    }

    pub fn keys(&self) -> impl Iterator<Item = KeyIndex> + '_ {
        (1..=self.glyphs.len()).map(KeyIndex)
    }
}

/// Per-key counts `f_i` with their total `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterFrequencies {
    counts: Vec<u64>,
    n: u64,
}

impl CharacterFrequencies {
    /// Builds frequencies from per-key counts (index 0 is key 1).
    pub fn from_counts(counts: Vec<u64>) -> Result<Self, CorpusError> {
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(CorpusError::CorpusEmpty);
        }
        Ok(Self { counts, n })
    }

    pub fn get(&self, key: KeyIndex) -> u64 {
        key.0
            .checked_sub(1)
            .and_then(|i| self.counts.get(i).copied())
            .unwrap_or(0)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of keys covered (the inventory size).
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownPolicy {
    #[default]
    Skip,
    Error,
}

/// Tallies every inventory glyph in `text`.
pub fn load_corpus(
    text: &str,
    inventory: &CharacterInventory,
    unknown_policy: UnknownPolicy,
) -> Result<CharacterFrequencies, CorpusError> {
    if inventory.is_empty() {
        return Err(CorpusError::EmptyInventory);
    }
    let lookup: HashMap<char, usize> = inventory
        .glyphs()
        .iter()
        .enumerate()
        .filter_map(|(i, g)| match g {
            Glyph::Char(c) => Some((*c, i)),
            Glyph::Blank => None,
        })
        .collect();
    let mut counts = vec![0u64; inventory.len()];
    for (position, c) in text.chars().enumerate() {
        match lookup.get(&c) {
            Some(&i) => counts[i] += 1,
            None if unknown_policy == UnknownPolicy::Error => {
                return Err(CorpusError::UnknownCharacter { position, glyph: c })
            }
            None => {}
        }
    }
    CharacterFrequencies::from_counts(counts)
}

/// Maps uppercase letters to lowercase and leaves everything else alone.
pub fn case_fold(text: &str) -> String {
    text.chars()
        .flat_map(|c| {
            let lower: Vec<char> = if c.is_uppercase() {
                c.to_lowercase().collect()
            } else {
                vec![c]
            };
            lower
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ab() -> CharacterInventory {
        CharacterInventory::new(vec![Glyph::Char('a'), Glyph::Char('b')]).unwrap()
    }

    #[test]
    fn tallies_counts() {
        let f = load_corpus("aab", &ab(), UnknownPolicy::Skip).unwrap();
        assert_eq!(f.counts(), &[2, 1]);
        assert_eq!(f.n(), 3);
    }

    #[test]
    fn skips_unknown() {
        let f = load_corpus("a#b", &ab(), UnknownPolicy::Skip).unwrap();
        assert_eq!(f.counts(), &[1, 1]);
        assert_eq!(f.n(), 2);
    }

    #[test]
    fn empty_text_is_an_error() {
        assert_eq!(
            load_corpus("", &ab(), UnknownPolicy::Skip),
            Err(CorpusError::CorpusEmpty)
        );
        assert_eq!(
            load_corpus("###", &ab(), UnknownPolicy::Skip),
            Err(CorpusError::CorpusEmpty)
        );
    }

    #[test]
    fn unknown_with_error_policy() {
        assert_eq!(
            load_corpus("ab#", &ab(), UnknownPolicy::Error),
            Err(CorpusError::UnknownCharacter {
                position: 2,
                glyph: '#'
            })
        );
    }

    #[test]
    fn absent_glyph_counts_zero() {
        let inv = CharacterInventory::new(vec![Glyph::Char('a'), Glyph::Char('z')]).unwrap();
        let f = load_corpus("aaa", &inv, UnknownPolicy::Skip).unwrap();
        assert_eq!(f.get(KeyIndex(2)), 0);
    }

    #[test]
    fn case_folding() {
        assert_eq!(case_fold("AbC"), "abc");
        assert_eq!(case_fold("a1!"), "a1!");
        assert_eq!(case_fold(""), "");
    }

    #[test]
    fn duplicate_glyphs_rejected() {
        let err = CharacterInventory::new(vec![Glyph::Char('a'), Glyph::Char('a')]).unwrap_err();
        assert_eq!(err, CorpusError::DuplicateGlyph('a'));
        // padding keys may repeat
        assert!(CharacterInventory::new(vec![Glyph::Blank, Glyph::Blank]).is_ok());
    }

    #[test]
    fn default_inventory_layout() {
        let inv = CharacterInventory::default_64();
        assert_eq!(inv.len(), 64);
        assert_eq!(inv.glyph(KeyIndex(55)), Some(Glyph::Char('0')));
        assert_eq!(inv.glyph(KeyIndex(64)), Some(Glyph::Char('9')));
        assert_eq!(inv.glyph(KeyIndex(27)), Some(Glyph::Char(' ')));
        assert_eq!(inv.glyphs().iter().filter(|g| g.is_blank()).count(), 19);
    }

    #[test]
    fn inventory_file_round_trip() {
        let inv = CharacterInventory::default_64();
        let text = inv.to_lines();
        assert_eq!(CharacterInventory::from_lines(&text).unwrap(), inv);
        let err = CharacterInventory::from_lines("a\nbc\n").unwrap_err();
        assert!(matches!(err, CorpusError::InventoryLine { line: 2, .. }));
    }

    proptest! {
        #[test]
        fn tally_conservation(text in "[ab#]{0,60}") {
            let kept = text.chars().filter(|c| *c != '#').count() as u64;
            match load_corpus(&text, &ab(), UnknownPolicy::Skip) {
                Ok(f) => prop_assert_eq!(f.n(), kept),
                Err(e) => {
                    prop_assert_eq!(kept, 0);
                    prop_assert_eq!(e, CorpusError::CorpusEmpty);
                }
            }
        }

        #[test]
        fn permutation_invariance(mut chars in proptest::collection::vec(prop_oneof![Just('a'), Just('b'), Just('x')], 1..40), seed in any::<u64>()) {
            let original: String = chars.iter().collect();
            // deterministic Fisher-Yates driven by the seed
            let mut s = seed;
            for i in (1..chars.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (s >> 33) as usize % (i + 1);
                chars.swap(i, j);
            }
            let shuffled: String = chars.iter().collect();
            let a = load_corpus(&original, &ab(), UnknownPolicy::Skip);
            let b = load_corpus(&shuffled, &ab(), UnknownPolicy::Skip);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn concatenation_additivity(t1 in "[ab]{1,30}", t2 in "[ab]{1,30}") {
            let f1 = load_corpus(&t1, &ab(), UnknownPolicy::Skip).unwrap();
            let f2 = load_corpus(&t2, &ab(), UnknownPolicy::Skip).unwrap();
            let f12 = load_corpus(&format!("{t1}{t2}"), &ab(), UnknownPolicy::Skip).unwrap();
            for k in ab().keys() {
                prop_assert_eq!(f12.get(k), f1.get(k) + f2.get(k));
            }
            prop_assert_eq!(f12.n(), f1.n() + f2.n());
        }
    }
}
