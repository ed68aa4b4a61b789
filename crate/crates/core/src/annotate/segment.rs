//! Rule-based sentence segmentation and tokenization.

/// Period-final forms that do not end a sentence. Compared case-insensitively.
pub const ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "mt.", "ft.", "gen.", "col.",
    "capt.", "lt.", "sgt.", "rev.", "gov.", "sen.", "rep.", "inc.", "ltd.", "co.", "corp.", "vs.",
    "etc.", "e.g.", "i.e.", "cf.", "al.", "approx.", "no.", "vol.", "fig.", "jan.", "feb.", "mar.",
    "apr.", "jun.", "jul.", "aug.", "sep.", "sept.", "oct.", "nov.", "dec.", "u.s.", "u.k.", "a.m.",
    "p.m.",
];

const CLITICS: &[&str] = &["n't", "'s", "'re", "'ve", "'ll", "'d", "'m"];

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closing(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '}' | '\u{201D}' | '\u{2019}' | '\u{00BB}')
}

fn is_opening(c: char) -> bool {
    matches!(c, '"' | '\'' | '(' | '[' | '{' | '\u{201C}' | '\u{2018}' | '\u{00AB}')
}

/// True if `word` (including its trailing period) is a known abbreviation or a
/// single-letter initial such as `J.`.
pub fn is_abbreviation(word: &str) -> bool {
    let lower = word.to_lowercase();
    if ABBREVIATIONS.contains(&lower.as_str()) {
        return true;
    }
    let mut chars = word.chars();
    matches!((chars.next(), chars.next(), chars.next()), (Some(c), Some('.'), None) if c.is_alphabetic())
}

/// Splits raw text into sentences.
///
/// A boundary follows a run of `.`, `!` or `?` (plus any closing quotes or
/// brackets) when the next non-space character is an uppercase letter, possibly
/// behind an opening quote. A period that closes a known abbreviation never
/// splits. Segments are whitespace-trimmed; no other characters are dropped.
pub fn segment_sentences(text: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        if !is_terminal(chars[i].1) {
            i += 1;
            continue;
        }
        let term_start = i;
        while i < chars.len() && is_terminal(chars[i].1) {
            i += 1;
        }
        while i < chars.len() && is_closing(chars[i].1) {
            i += 1;
        }
        let boundary = i;
        let mut j = i;
        while j < chars.len() && chars[j].1.is_whitespace() {
            j += 1;
        }
        if j == boundary || j >= chars.len() {
            continue;
        }
        let mut k = j;
        while k < chars.len() && is_opening(chars[k].1) {
            k += 1;
        }
        if k >= chars.len() || !chars[k].1.is_uppercase() {
            continue;
        }
        // Only a lone period can be an abbreviation.
        if boundary == term_start + 1 && chars[term_start].1 == '.' {
            let mut w = term_start;
            while w > 0 && !chars[w - 1].1.is_whitespace() {
                w -= 1;
            }
            let word_start = chars[w].0;
            let word_end = chars[term_start].0 + 1;
            let word = text[word_start..word_end].trim_start_matches(is_opening);
            if is_abbreviation(word) {
                continue;
            }
        }
        let end_byte = chars
            .get(boundary)
            .map(|&(b, _)| b)
            .unwrap_or(text.len());
        push_trimmed(&mut out, &text[start..end_byte]);
        start = end_byte;
    }
    push_trimmed(&mut out, &text[start..]);
    out
}

fn push_trimmed(out: &mut Vec<String>, s: &str) {
    let t = s.trim();
    if !t.is_empty() {
        out.push(t.to_string());
    }
}

/// Splits a run of punctuation into groups of identical characters (`...` stays whole).
fn push_punct_groups(out: &mut Vec<String>, s: &str) {
    let mut current = String::new();
    for c in s.chars() {
        if current.chars().next().is_some_and(|p| p != c) {
            out.push(std::mem::take(&mut current));
        }
        current.push(c);
    }
    if !current.is_empty() {
        out.push(current);
    }
}

fn split_clitic(core: &str) -> Option<(&str, &str)> {
    let normalized = core.replace('\u{2019}', "'").to_lowercase();
    for clitic in CLITICS {
        if normalized.ends_with(clitic) && normalized.len() > clitic.len() {
            // The clitic is ASCII after normalization; find the split in the original by char count.
            let clitic_chars = clitic.chars().count();
            let total = core.chars().count();
            let split = core
                .char_indices()
                .nth(total - clitic_chars)
                .map(|(b, _)| b)?;
            return Some((&core[..split], &core[split..]));
        }
    }
    None
}

/// Whitespace tokenization with punctuation detachment and English clitic splitting.
pub fn tokenize(sentence: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in sentence.split_whitespace() {
        let Some(first_alnum) = chunk.find(char::is_alphanumeric) else {
            push_punct_groups(&mut out, chunk);
            continue;
        };
        let last_alnum = chunk
            .char_indices()
            .rev()
            .find(|(_, c)| c.is_alphanumeric())
            .map(|(b, c)| b + c.len_utf8())
            .unwrap_or(chunk.len());
        let mut core_end = last_alnum;
        // Keep the period of an abbreviation attached.
        if chunk[last_alnum..].starts_with('.') && is_abbreviation(&chunk[first_alnum..last_alnum + 1])
        {
            core_end += 1;
        }
        push_punct_groups(&mut out, &chunk[..first_alnum]);
        let core = &chunk[first_alnum..core_end];
        match split_clitic(core) {
            Some((stem, clitic)) => {
                out.push(stem.to_string());
                out.push(clitic.to_string());
            }
            None => out.push(core.to_string()),
        }
        push_punct_groups(&mut out, &chunk[core_end..]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn splits_on_terminal_periods() {
        assert_eq!(segment_sentences("A cat. A dog."), ["A cat.", "A dog."]);
    }

    #[test]
    fn abbreviation_does_not_split() {
        assert_eq!(segment_sentences("Mr. Smith ran."), ["Mr. Smith ran."]);
        assert_eq!(
            segment_sentences("We met Dr. Jones. He waved."),
            ["We met Dr. Jones.", "He waved."]
        );
        assert_eq!(segment_sentences("J. R. R. Tolkien wrote."), ["J. R. R. Tolkien wrote."]);
    }

    #[test]
    fn no_terminal_punctuation_is_one_segment() {
        assert_eq!(segment_sentences("no terminal punct"), ["no terminal punct"]);
    }

    #[test]
    fn lowercase_after_period_does_not_split() {
        assert_eq!(segment_sentences("It was 3.5 m. away"), ["It was 3.5 m. away"]);
        assert_eq!(segment_sentences("Wait... what?"), ["Wait... what?"]);
    }

    #[test]
    fn quotes_and_exclamations() {
        assert_eq!(
            segment_sentences("\"Run!\" she said. \"Now?\" He nodded."),
            ["\"Run!\" she said.", "\"Now?\"", "He nodded."]
        );
        assert_eq!(segment_sentences("Stop! \"Who's there?\""), ["Stop!", "\"Who's there?\""]);
    }

    #[test]
    fn empty_text_gives_no_sentences() {
        assert!(segment_sentences("").is_empty());
        assert!(segment_sentences(" \n\t").is_empty());
    }

    #[test]
    fn tokenize_detaches_punctuation() {
        assert_eq!(tokenize("The dog ran."), ["The", "dog", "ran", "."]);
        assert_eq!(
            tokenize("\"Hello,\" she said..."),
            ["\"", "Hello", ",", "\"", "she", "said", "..."]
        );
        assert_eq!(tokenize("What?!"), ["What", "?", "!"]);
        assert_eq!(tokenize("-- well-known 3.5"), ["--", "well-known", "3.5"]);
    }

    #[test]
    fn tokenize_splits_clitics() {
        assert_eq!(tokenize("don't"), ["do", "n't"]);
        assert_eq!(tokenize("She's"), ["She", "'s"]);
        assert_eq!(tokenize("we'll they're I'm you'd we've"), [
            "we", "'ll", "they", "'re", "I", "'m", "you", "'d", "we", "'ve"
        ]);
        assert_eq!(tokenize("can\u{2019}t"), ["ca", "n\u{2019}t"]);
    }

    #[test]
    fn tokenize_keeps_abbreviation_periods() {
        assert_eq!(tokenize("Mr. Smith"), ["Mr.", "Smith"]);
        assert_eq!(tokenize("the U.S. army"), ["the", "U.S.", "army"]);
    }

    #[test]
    fn tokenize_empty() {
        assert!(tokenize("").is_empty());
    }

    fn non_ws(s: &str) -> String {
        s.chars().filter(|c| !c.is_whitespace()).collect()
    }

    proptest! {
        #[test]
        fn segmentation_preserves_non_whitespace(text in "[A-Za-z .!?\"'\n]{0,80}") {
            let joined: String = segment_sentences(&text).concat();
            prop_assert_eq!(non_ws(&joined), non_ws(&text));
        }

        #[test]
        fn tokenization_preserves_non_whitespace(text in "[A-Za-z'.,!?\" -]{0,60}") {
            let joined: String = tokenize(&text).concat();
            prop_assert_eq!(joined, non_ws(&text));
        }
    }
}
