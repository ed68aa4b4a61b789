//! Rule-based English syllable counting with an exceptions table.

use std::collections::HashMap;
use std::sync::OnceLock;

const BUNDLED_EXCEPTIONS: &str = include_str!("../../data/syllable_exceptions.tsv");

fn is_vowel(c: char) -> bool {
    matches!(
        c,
        'a' | 'e' | 'i' | 'o' | 'u' | 'y' | 'à' | 'á' | 'â' | 'ä' | 'è' | 'é' | 'ê' | 'ë' | 'ì'
            | 'í' | 'î' | 'ï' | 'ò' | 'ó' | 'ô' | 'ö' | 'ù' | 'ú' | 'û' | 'ü' | 'ÿ'
    )
}

#[derive(Debug, Clone, Default)]
pub struct SyllableCounter {
    exceptions: HashMap<String, u32>,
}

impl SyllableCounter {
    pub fn new(exceptions: HashMap<String, u32>) -> Self {
        let exceptions = exceptions
            .into_iter()
            .map(|(k, v)| (k.to_lowercase(), v))
            .collect();
        Self { exceptions }
    }

    /// Parses `word<TAB>count` lines; `#` lines and blanks are ignored.
    pub fn from_tsv(text: &str) -> Result<Self, String> {
        let mut map = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, count) = line
                .split_once('\t')
                .ok_or_else(|| format!("line {}: expected word<TAB>count", i + 1))?;
            let count: u32 = count
                .trim()
                .parse()
                .map_err(|_| format!("line {}: bad syllable count {count:?}", i + 1))?;
            map.insert(word.trim().to_string(), count);
        }
        Ok(Self::new(map))
    }

    /// The counter with the bundled exceptions list.
    pub fn builtin() -> &'static SyllableCounter {
        static COUNTER: OnceLock<SyllableCounter> = OnceLock::new();
        COUNTER.get_or_init(|| {
            SyllableCounter::from_tsv(BUNDLED_EXCEPTIONS).expect("bundled syllable exceptions")
        })
    }

    pub fn count(&self, word: &str) -> u32 {
        let lower = word.to_lowercase();
        if let Some(&n) = self.exceptions.get(&lower) {
            return n;
        }
        count_by_rule(&lower)
    }
}

/// Vowel-group count with silent-e adjustment, floored at 1. Words without letters count 0.
fn count_by_rule(lower: &str) -> u32 {
    let letters: Vec<char> = lower.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.is_empty() {
        return 0;
    }
    let mut groups = 0u32;
    let mut in_group = false;
    for &c in &letters {
        let v = is_vowel(c);
        if v && !in_group {
            groups += 1;
        }
        in_group = v;
    }
    let n = letters.len();
    if n >= 2 && letters[n - 1] == 'e' && !is_vowel(letters[n - 2]) {
        // "-Cle" as in "table" keeps its syllable.
        let consonant_le = letters[n - 2] == 'l' && n >= 3 && !is_vowel(letters[n - 3]);
        if !consonant_le {
            groups = groups.saturating_sub(1);
        }
    }
    groups.max(1)
}

/// Counts syllables with the bundled exceptions table.
pub fn count_syllables(word: &str) -> u32 {
    SyllableCounter::builtin().count(word)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_words() {
        assert_eq!(count_syllables("the"), 1);
        assert_eq!(count_syllables("generation"), 4);
        assert_eq!(count_syllables("cake"), 1);
        assert_eq!(count_syllables("table"), 2);
        assert_eq!(count_syllables("Cat"), 1);
        assert_eq!(count_syllables("free"), 1);
        assert_eq!(count_syllables("agree"), 2);
        assert_eq!(count_syllables("balomitu"), 4);
    }

    #[test]
    fn exceptions_take_precedence() {
        assert_eq!(count_by_rule("every"), 3);
        assert_eq!(count_syllables("every"), 2);
        assert_eq!(count_syllables("Every"), 2);
        let custom = SyllableCounter::from_tsv("cake\t7\n").unwrap();
        assert_eq!(custom.count("CAKE"), 7);
    }

    #[test]
    fn no_letters_is_zero() {
        assert_eq!(count_syllables("1990"), 0);
        assert_eq!(count_syllables("..."), 0);
        assert_eq!(count_syllables(""), 0);
    }

    #[test]
    fn bad_exception_line_is_rejected() {
        assert!(SyllableCounter::from_tsv("word\tmany\n").is_err());
        assert!(SyllableCounter::from_tsv("word 3\n").is_err());
    }

    proptest! {
        #[test]
        fn letter_words_have_at_least_one(word in "[a-z]{1,15}") {
            prop_assert!(count_by_rule(&word) >= 1);
        }

        #[test]
        fn appending_a_vowel_group_never_decreases(stem in "[bcdfgklmnprst][aeiou][bcdfgklmnprst]{1,2}", tail in "[bcdfgklmnprst][aiou]") {
            let before = count_by_rule(&stem);
            let after = count_by_rule(&format!("{stem}{tail}"));
            prop_assert!(after >= before);
            prop_assert_eq!(after, before + 1);
        }
    }
}
