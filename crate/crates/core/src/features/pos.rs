use super::{Context, CONTENT_TAGS, Family, FeatureDef, FeatureVector};
use crate::annotate::Upos;

struct Class {
    key: &'static str,
    tags: &'static [Upos],
    sent: &'static str,
    token: &'static str,
    /// Name used as the right-hand side of "X to Y" rows.
    as_rhs: &'static str,
}

const NOUN: Class = Class {
    key: "noun",
    tags: &[Upos::Noun, Upos::Propn],
    sent: "Avr Noun POS sent",
    token: "Avr Noun POS token",
    as_rhs: "Noun POS",
};
const VERB: Class = Class {
    key: "verb",
    tags: &[Upos::Verb, Upos::Aux],
    sent: "Avr Verb POS sent",
    token: "Avr Verb POS token",
    as_rhs: "Verb POS",
};
const ADJ: Class = Class {
    key: "adj",
    tags: &[Upos::Adj],
    sent: "Avr Adj POS sent",
    token: "Avr Adj POS token",
    as_rhs: "Adj POS",
};
const ADV: Class = Class {
    key: "adv",
    tags: &[Upos::Adv],
    sent: "Avr Advrb POS sent",
    token: "Avr Advrb POS token",
    as_rhs: "Advrb POS",
};
const SCONJ: Class = Class {
    key: "sconj",
    tags: &[Upos::Sconj],
    sent: "Avr SubrdConj sent",
    token: "Avr SubrdConj token",
    as_rhs: "SubrdConj",
};
const CCONJ: Class = Class {
    key: "cconj",
    tags: &[Upos::Cconj],
    sent: "Avr CordConj POS sent",
    token: "Avr CordConj POS token",
    as_rhs: "CordConj",
};

/// Row order of the class blocks.
const CLASSES: [&Class; 6] = [&NOUN, &VERB, &ADJ, &ADV, &SCONJ, &CCONJ];
/// Order of the right-hand classes inside each block.
const RHS_ORDER: [&Class; 6] = [&ADJ, &NOUN, &VERB, &ADV, &SCONJ, &CCONJ];

/// Published row label for "lhs to rhs". The labels are not fully regular,
/// so the irregular ones are spelled out.
fn ratio_label(lhs: &Class, rhs: &Class) -> String {
    match (lhs.key, rhs.key) {
        ("adv", "cconj") => "Advrb POS to CordCobj".into(),
        ("sconj", "cconj") => "SubrdConj POS to CordConj POS".into(),
        ("cconj", "sconj") => "CordConj POS to SubrdConj POS".into(),
        ("sconj", _) => format!("SubrdConj POS to {}", rhs.as_rhs),
        ("cconj", _) => format!("CordConj POS to {}", rhs.as_rhs),
        _ => format!("{} to {}", lhs.as_rhs, rhs.as_rhs),
    }
}

fn ratio_rhs(lhs: &Class) -> impl Iterator<Item = &'static Class> + '_ {
    RHS_ORDER.into_iter().filter(move |r| r.key != lhs.key)
}

fn tag_note(c: &Class) -> String {
    let tags: Vec<&str> = c.tags.iter().map(|t| t.as_str()).collect();
    tags.join("+")
}

pub(super) fn defs() -> Vec<FeatureDef> {
    let mut defs = Vec::with_capacity(47);
    for c in CLASSES {
        let note = tag_note(c);
        defs.push(FeatureDef::new(format!("{}_per_sentence", c.key), Family::Pos, c.sent).note(format!("{note} per sentence")));
        defs.push(FeatureDef::new(format!("{}_per_token", c.key), Family::Pos, c.token).note(format!("{note} per word token")));
        for r in ratio_rhs(c) {
            defs.push(FeatureDef::new(format!("{}_to_{}", c.key, r.key), Family::Pos, ratio_label(c, r)));
        }
    }
    let content = "NOUN+PROPN+VERB+AUX+ADJ+ADV";
    defs.extend([
        FeatureDef::new("content_words_per_sentence", Family::Pos, "Avr Content Words sent").note(format!("{content} per sentence")),
        FeatureDef::new("content_words_per_token", Family::Pos, "Avr Content Words token").note(format!("{content} per word token")),
        FeatureDef::new("function_words_per_sentence", Family::Pos, "Avr Function Words token")
            .note("non-content word tokens per sentence (the published label repeats the per-token name)"),
        FeatureDef::new("function_words_per_token", Family::Pos, "Avr Function Words token").note("non-content word tokens per word token"),
        FeatureDef::new("content_to_function_words", Family::Pos, "Content to Function Words"),
    ]);
    defs
}

pub(super) fn extract(ctx: &Context, out: &mut FeatureVector) {
    let (s, t) = (ctx.s, ctx.t);
    for c in CLASSES {
        let n = ctx.pos_count(c.tags);
        out.set_ratio(&format!("{}_per_sentence", c.key), n, s);
        out.set_ratio(&format!("{}_per_token", c.key), n, t);
        for r in ratio_rhs(c) {
            out.set_ratio(&format!("{}_to_{}", c.key, r.key), n, ctx.pos_count(r.tags));
        }
    }
    let content = ctx.pos_count(&CONTENT_TAGS);
    let function = t - content;
    out.set_ratio("content_words_per_sentence", content, s);
    out.set_ratio("content_words_per_token", content, t);
    out.set_ratio("function_words_per_sentence", function, s);
    out.set_ratio("function_words_per_token", function, t);
    out.set_ratio("content_to_function_words", content, function);
}
