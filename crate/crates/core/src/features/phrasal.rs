use super::{Context, Family, FeatureDef, FeatureVector, Requirement};
use crate::annotate::Tree;
use crate::annotate::Tier;

const CLASSES: [(&str, &str, &str); 6] = [
    ("np", "NP", "Noun phrs"),
    ("vp", "VP", "Verb phrs"),
    ("sbar", "SBAR", "SubClaus"),
    ("pp", "PP", "Prep phrs"),
    ("adjp", "ADJP", "Adj phrs"),
    ("advp", "ADVP", "Adv phrs"),
];

pub(super) fn defs() -> Vec<FeatureDef> {
    let mut defs = Vec::with_capacity(42);
    for (key, label, name) in CLASSES {
        let def = |id: String, row: String| FeatureDef::new(id, Family::Phrasal, row).requires(Requirement::Full);
        defs.push(def(format!("{key}_per_sentence"), format!("Avr {name} sent")).note(format!("{label} nodes per sentence")));
        defs.push(def(format!("{key}_per_token"), format!("Avr {name} token")).note(format!("{label} nodes per word token")));
        for (other, _, other_name) in CLASSES.iter().filter(|c| c.0 != key) {
            defs.push(def(format!("{key}_to_{other}"), format!("{name} to {other_name}")));
        }
    }
    defs
}

/// Trees of every sentence, or `None` if any is missing or the tier lacks them.
pub(super) fn sentence_trees<'a>(ctx: &Context<'a>) -> Option<Vec<&'a Tree>> {
    if ctx.doc.tier != Tier::Full {
        return None;
    }
    ctx.doc.sentences.iter().map(|s| s.tree.as_ref()).collect()
}

pub(super) fn extract(ctx: &Context, out: &mut FeatureVector) {
    let Some(trees) = sentence_trees(ctx) else {
        return;
    };
    let counts: Vec<f64> = CLASSES
        .iter()
        .map(|(_, label, _)| trees.iter().map(|t| t.count_label(label)).sum::<usize>() as f64)
        .collect();
    for (i, (key, _, _)) in CLASSES.iter().enumerate() {
        out.set_ratio(&format!("{key}_per_sentence"), counts[i], ctx.s);
        out.set_ratio(&format!("{key}_per_token"), counts[i], ctx.t);
        for (j, (other, _, _)) in CLASSES.iter().enumerate() {
            if i != j {
                out.set_ratio(&format!("{key}_to_{other}"), counts[i], counts[j]);
            }
        }
    }
}
