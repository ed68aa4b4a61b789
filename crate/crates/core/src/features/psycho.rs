use super::{Context, Family, FeatureDef, FeatureResources, FeatureVector, Requirement};

/// (lexicon name, row label stem, source column note)
const LEXICONS: [(&str, &str, &str); 13] = [
    ("aoa_kuperman_word", "AOA word", "Kuperman AoA by surface word (Word / AoA_Kup)"),
    ("aoa_lemma", "AOA lemma", "Kuperman AoA by lemma (Lemma_highest_PoS / AoA_Kup_lem)"),
    ("aoa_bird", "AOA lemma Bird", "Bird AoA by lemma (AoA_Bird_lem)"),
    ("aoa_bristol", "AOA Bristol", "Bristol AoA by lemma (AoA_Bristol_lem)"),
    ("aoa_cortese_khanna", "AOA CortKhanna", "Cortese-Khanna AoA by lemma (AoA_Cort_lem)"),
    ("subtlex_wf", "SubtlexUS", "interpretation: SUBTLEX-US FREQcount"),
    ("subtlex_cd", "SubtlexUS CD", "interpretation: SUBTLEX-US CDcount"),
    ("subtlex_freq", "SubtlexUS FREQ", "interpretation: SUBTLEX-US FREQlow"),
    ("subtlex_cdl", "SubtlexUS CDL", "interpretation: SUBTLEX-US CDlow"),
    ("subtlex_subtl", "SubtlexUS SUBTL", "interpretation: SUBTLEX-US SUBTLWF"),
    ("subtlex_lg10wf", "SubtlexUS Lg10WF", "SUBTLEX-US Lg10WF"),
    ("subtlex_sublcd", "SubtlexUS SubLCD", "interpretation: SUBTLEX-US SUBTLCD"),
    ("subtlex_lgcd", "SubtlexUS LgCD", "SUBTLEX-US Lg10CD"),
];

/// Names of the norm lexicons the psycholinguistic family reads, in row order.
pub const LEXICON_NAMES: [&str; 13] = {
    let mut names = [""; 13];
    let mut i = 0;
    while i < 13 {
        names[i] = LEXICONS[i].0;
        i += 1;
    }
    names
};

pub(super) fn defs() -> Vec<FeatureDef> {
    let mut defs = Vec::with_capacity(26);
    for (name, stem, note) in LEXICONS {
        let req = Requirement::Lexicon(name.to_string());
        defs.push(
            FeatureDef::new(format!("{name}_per_sentence"), Family::Psycho, format!("{stem} sent"))
                .requires(req.clone())
                .note(format!("{note}; summed over matched word tokens / S")),
        );
        defs.push(
            FeatureDef::new(format!("{name}_per_token"), Family::Psycho, format!("{stem} token"))
                .requires(req)
                .note(format!("{note}; summed over matched word tokens / T")),
        );
    }
    defs
}

pub(super) fn extract(ctx: &Context, resources: &FeatureResources, out: &mut FeatureVector) {
    for name in LEXICON_NAMES {
        let Some(lex) = resources.lexicon(name) else {
            continue;
        };
        let sum: f64 = ctx.doc.words().filter_map(|w| lex.lookup(w)).sum();
        out.set_ratio(&format!("{name}_per_sentence"), sum, ctx.s);
        out.set_ratio(&format!("{name}_per_token"), sum, ctx.t);
        out.coverage.insert(name.to_string(), lex.coverage(ctx.doc).ratio);
    }
}
