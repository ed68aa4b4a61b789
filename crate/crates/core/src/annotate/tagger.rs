//! Lexicon + suffix-rule part-of-speech tagger and lemmatizer for the builtin tier.

use std::collections::HashMap;
use std::sync::OnceLock;

use super::Upos;

const BUNDLED_TAGS: &str = include_str!("../../data/tag_lexicon.tsv");
const BUNDLED_LEMMAS: &str = include_str!("../../data/lemma_exceptions.tsv");

const SYMBOLS: &str = "$%#&+=@<>^~|*/\\§©®°€£¥";

/// Ordered suffix rules for words missing from the lexicon. First match wins.
const SUFFIX_RULES: &[(&str, Upos)] = &[
    ("ly", Upos::Adv),
    ("ing", Upos::Verb),
    ("ed", Upos::Verb),
    ("tion", Upos::Noun),
    ("sion", Upos::Noun),
    ("ment", Upos::Noun),
    ("ness", Upos::Noun),
    ("ity", Upos::Noun),
    ("ship", Upos::Noun),
    ("hood", Upos::Noun),
    ("ism", Upos::Noun),
    ("ist", Upos::Noun),
    ("ance", Upos::Noun),
    ("ence", Upos::Noun),
    ("ous", Upos::Adj),
    ("ful", Upos::Adj),
    ("ive", Upos::Adj),
    ("able", Upos::Adj),
    ("ible", Upos::Adj),
    ("less", Upos::Adj),
    ("ish", Upos::Adj),
    ("ical", Upos::Adj),
    ("ic", Upos::Adj),
    ("al", Upos::Adj),
    ("ize", Upos::Verb),
    ("ise", Upos::Verb),
    ("ify", Upos::Verb),
    ("er", Upos::Noun),
    ("or", Upos::Noun),
    ("s", Upos::Noun),
];

/// Minimum number of characters left in front of a matched suffix.
const MIN_STEM: usize = 2;

fn parse_tsv(text: &str) -> impl Iterator<Item = (usize, &str, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            return None;
        }
        let (k, v) = line.split_once('\t')?;
        Some((i + 1, k.trim(), v.trim()))
    })
}

fn fold(word: &str) -> String {
    word.replace('\u{2019}', "'").to_lowercase()
}

/// Word → most-frequent tag table plus an irregular-lemma table.
#[derive(Debug, Clone, Default)]
pub struct TagLexicon {
    tags: HashMap<String, Upos>,
    lemmas: HashMap<String, String>,
}

impl TagLexicon {
    pub fn from_tsv(tags: &str, lemmas: &str) -> Result<Self, String> {
        let mut lex = TagLexicon::default();
        for (line, word, tag) in parse_tsv(tags) {
            let upos: Upos = tag
                .parse()
                .map_err(|_| format!("tag lexicon line {line}: unknown tag {tag:?}"))?;
            lex.tags.entry(fold(word)).or_insert(upos);
        }
        for (_, form, lemma) in parse_tsv(lemmas) {
            lex.lemmas.entry(fold(form)).or_insert_with(|| lemma.to_string());
        }
        Ok(lex)
    }

    pub fn builtin() -> &'static TagLexicon {
        static LEXICON: OnceLock<TagLexicon> = OnceLock::new();
        LEXICON.get_or_init(|| {
            TagLexicon::from_tsv(BUNDLED_TAGS, BUNDLED_LEMMAS).expect("bundled tag lexicon")
        })
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn lookup(&self, word: &str) -> Option<Upos> {
        self.tags.get(&fold(word)).copied()
    }

    /// Lemma for a tagged surface form: irregular table, then plural stripping for nouns.
    pub fn lemmatize(&self, surface: &str, pos: Upos) -> String {
        let folded = fold(surface);
        if let Some(lemma) = self.lemmas.get(&folded) {
            return lemma.clone();
        }
        if pos == Upos::Noun {
            return singularize(&folded);
        }
        folded
    }
}

fn singularize(word: &str) -> String {
    let n = word.chars().count();
    if n > 4 && word.ends_with("ies") {
        return format!("{}y", &word[..word.len() - 3]);
    }
    for suffix in ["sses", "shes", "ches", "xes", "zzes"] {
        if word.ends_with(suffix) && n > suffix.len() + 1 {
            return word[..word.len() - 2].to_string();
        }
    }
    if n > 3
        && word.ends_with('s')
        && !(word.ends_with("ss") || word.ends_with("us") || word.ends_with("is"))
    {
        return word[..word.len() - 1].to_string();
    }
    word.to_string()
}

fn looks_numeric(token: &str) -> bool {
    token.chars().any(|c| c.is_ascii_digit())
        && token
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, ',' | '.' | ':' | '-' | '/'))
}

fn by_suffix(folded: &str) -> Upos {
    SUFFIX_RULES
        .iter()
        .find(|(suffix, _)| {
            folded.ends_with(suffix) && folded.chars().count() >= suffix.chars().count() + MIN_STEM
        })
        .map(|&(_, tag)| tag)
        .unwrap_or(Upos::Noun)
}

/// Assigns exactly one universal tag per token.
///
/// Order of precedence: punctuation/symbols, numerals, lexicon lookup, capitalized
/// non-initial words as proper nouns, suffix rules, and finally `NOUN`.
pub fn tag_pos(tokens: &[String], lexicon: &TagLexicon) -> Vec<Upos> {
    let first_word = tokens
        .iter()
        .position(|t| t.chars().any(char::is_alphanumeric));
    tokens
        .iter()
        .enumerate()
        .map(|(i, token)| {
            if !token.chars().any(char::is_alphanumeric) {
                return if token.chars().all(|c| SYMBOLS.contains(c)) {
                    Upos::Sym
                } else {
                    Upos::Punct
                };
            }
            if looks_numeric(token) {
                return Upos::Num;
            }
            if let Some(tag) = lexicon.lookup(token) {
                return tag;
            }
            if Some(i) != first_word && token.chars().next().is_some_and(char::is_uppercase) {
                return Upos::Propn;
            }
            by_suffix(&fold(token))
        })
        .collect()
}
