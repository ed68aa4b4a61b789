//! Readability formulas over document surface counts.

use serde::{Deserialize, Serialize};

use super::{Context, Family, FeatureDef, FeatureVector};
use crate::annotate::AnnotatedDocument;

/// Words of at least this many syllables are polysyllables ("hard" words).
pub const POLYSYLLABLE_MIN: u32 = 3;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceCounts {
    pub sentences: u64,
    /// Word tokens, punctuation and symbols excluded.
    pub words: u64,
    pub syllables: u64,
    /// Characters of word tokens.
    pub characters: u64,
    /// Alphabetic characters of word tokens.
    pub letters: u64,
    pub polysyllables: u64,
}

impl SurfaceCounts {
    pub fn from_document(doc: &AnnotatedDocument) -> Self {
        let mut c = SurfaceCounts {
            sentences: doc.sentences.len() as u64,
            ..Default::default()
        };
        for w in doc.words() {
            c.words += 1;
            c.syllables += u64::from(w.syllables);
            c.characters += w.surface.chars().count() as u64;
            c.letters += w.surface.chars().filter(|ch| ch.is_alphabetic()).count() as u64;
            c.polysyllables += u64::from(w.syllables >= POLYSYLLABLE_MIN);
        }
        c
    }

    fn usable(&self) -> Option<(f64, f64)> {
        (self.sentences > 0 && self.words > 0).then_some((self.words as f64, self.sentences as f64))
    }

    /// Words below the polysyllable threshold.
    pub fn easy(&self) -> u64 {
        self.words - self.polysyllables
    }
}

pub fn flesch_kincaid(c: &SurfaceCounts) -> Option<f64> {
    let (t, s) = c.usable()?;
    Some(0.39 * (t / s) + 11.8 * (c.syllables as f64 / t) - 15.59)
}

pub fn new_ari(c: &SurfaceCounts) -> Option<f64> {
    let (t, s) = c.usable()?;
    Some(5.84 * (c.characters as f64 / t) + 0.37 * (t / s) - 26.01)
}

pub fn coleman_liau(c: &SurfaceCounts) -> Option<f64> {
    let (t, s) = c.usable()?;
    let l = c.letters as f64 / t * 100.0;
    let sc = s / t * 100.0;
    Some(0.0588 * l - 0.296 * sc - 15.8)
}

pub fn smog(c: &SurfaceCounts) -> Option<f64> {
    let (_, s) = c.usable()?;
    Some(1.0430 * (c.polysyllables as f64 * 30.0 / s).sqrt() + 3.1291)
}

pub fn gunning_fog(c: &SurfaceCounts) -> Option<f64> {
    let (t, s) = c.usable()?;
    Some(0.4 * (t / s + 100.0 * c.polysyllables as f64 / t))
}

pub fn linsear_write(c: &SurfaceCounts) -> Option<f64> {
    let (_, s) = c.usable()?;
    let r = (c.easy() as f64 + 3.0 * c.polysyllables as f64) / s;
    Some(if r <= 20.0 { r / 2.0 - 1.0 } else { r / 2.0 })
}

type Formula = fn(&SurfaceCounts) -> Option<f64>;

const ROWS: [(&str, &str, Formula, &str); 6] = [
    (
        "flesch_kincaid",
        "Flesch-Kincaid",
        flesch_kincaid,
        "grade level: 0.39(T/S) + 11.8(Syl/T) - 15.59 (Kincaid et al. 1975)",
    ),
    (
        "new_ari",
        "NARI",
        new_ari,
        "New Automated Readability Index: 5.84(Ch/T) + 0.37(T/S) - 26.01 (Kincaid et al. 1975)",
    ),
    (
        "coleman_liau",
        "Coleman-Liau",
        coleman_liau,
        "0.0588L - 0.296Sc - 15.8, L = letters per 100 words, Sc = sentences per 100 words (Coleman and Liau 1975)",
    ),
    (
        "smog",
        "SMOG",
        smog,
        "1.0430 sqrt(Poly * 30/S) + 3.1291, Poly = words of 3+ syllables (McLaughlin 1969)",
    ),
    (
        "gunning_fog",
        "Gunning-Fog",
        gunning_fog,
        "0.4 (T/S + 100 Poly/T) (Gunning 1952)",
    ),
    (
        "linsear_write",
        "Linsear",
        linsear_write,
        "r = (easy + 3 hard)/S; r/2 - 1 if r <= 20 else r/2; hard = 3+ syllables (O'Hayre 1966)",
    ),
];

pub(super) fn defs() -> Vec<FeatureDef> {
    ROWS.iter()
        .map(|&(id, label, _, note)| FeatureDef::new(id, Family::Formula, label).note(note))
        .collect()
}

pub(super) fn extract(ctx: &Context, out: &mut FeatureVector) {
    for (id, _, f, _) in ROWS {
        if let Some(v) = f(&ctx.surface) {
            out.set(id, v);
        }
    }
}
