use super::{Context, Family, FeatureDef, FeatureVector};

const ROWS: [(&str, &str); 8] = [
    ("total_tokens_x_sentences", "Total token x Total sent"),
    ("sqrt_tokens_x_sentences", "Sqrt Total token x Total sent"),
    ("log_tokens_over_log_sentences", "Log token / Log sent"),
    ("tokens_per_sentence", "Avr token sent"),
    ("syllables_per_sentence", "Avr Syll sent"),
    ("syllables_per_token", "Avr Syll token"),
    ("chars_per_sentence", "Avr Chars sent"),
    ("chars_per_token", "Avr Chars token"),
];

pub(super) fn defs() -> Vec<FeatureDef> {
    ROWS.iter()
        .map(|&(id, label)| {
            let def = FeatureDef::new(id, Family::Shallow, label);
            match id {
                "total_tokens_x_sentences" => def.note("T*S, raw length product"),
                "sqrt_tokens_x_sentences" => def.note("sqrt(T*S)"),
                "log_tokens_over_log_sentences" => def.note("ln T / ln S; unavailable when S = 1"),
                "chars_per_sentence" | "chars_per_token" => def.note("characters of word tokens only"),
                _ => def,
            }
        })
        .collect()
}

pub(super) fn extract(ctx: &Context, out: &mut FeatureVector) {
    let (t, s) = (ctx.t, ctx.s);
    if t == 0.0 || s == 0.0 {
        return;
    }
    let syl = ctx.surface.syllables as f64;
    let ch = ctx.surface.characters as f64;
    out.set("total_tokens_x_sentences", t * s);
    out.set("sqrt_tokens_x_sentences", (t * s).sqrt());
    if s > 1.0 {
        out.set("log_tokens_over_log_sentences", t.ln() / s.ln());
    }
    out.set("tokens_per_sentence", t / s);
    out.set("syllables_per_sentence", syl / s);
    out.set("syllables_per_token", syl / t);
    out.set("chars_per_sentence", ch / s);
    out.set("chars_per_token", ch / t);
}
