use std::collections::HashSet;

use super::{Context, CONTENT_TAGS, Family, FeatureDef, FeatureVector};

pub(super) fn defs() -> Vec<FeatureDef> {
    vec![
        FeatureDef::new("simple_ttr", Family::Ttr, "Simple TTR").note("V/T, V = distinct case-folded word surfaces"),
        FeatureDef::new("corrected_ttr", Family::Ttr, "Correlated TTR").note("Carroll: V/sqrt(2T)"),
        FeatureDef::new("bilog_ttr", Family::Ttr, "BiLogarithmic TTR").note("Herdan: ln V / ln T; unavailable when T = 1"),
        FeatureDef::new("uber_index", Family::Ttr, "Uber Index")
            .note("(ln T)^2 / (ln T - ln V), natural log; unavailable when T = 1 or V = T"),
        FeatureDef::new("lexical_diversity", Family::Ttr, "Lexical Diversity")
            .note("interpretation: distinct content-word types / content-word tokens"),
    ]
}

pub(super) fn extract(ctx: &Context, out: &mut FeatureVector) {
    let t = ctx.t;
    if t == 0.0 {
        return;
    }
    let types: HashSet<String> = ctx.doc.words().map(|w| w.surface.to_lowercase()).collect();
    let v = types.len() as f64;
    out.set("simple_ttr", v / t);
    out.set("corrected_ttr", v / (2.0 * t).sqrt());
    if t > 1.0 {
        out.set("bilog_ttr", v.ln() / t.ln());
        if v < t {
            out.set("uber_index", t.ln().powi(2) / (t.ln() - v.ln()));
        }
    }
    let content: Vec<String> = ctx
        .doc
        .words()
        .filter(|w| CONTENT_TAGS.contains(&w.pos))
        .map(|w| w.surface.to_lowercase())
        .collect();
    let content_types = content.iter().collect::<HashSet<_>>().len();
    out.set_ratio("lexical_diversity", content_types as f64, content.len() as f64);
}
