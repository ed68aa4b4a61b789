use std::collections::HashSet;

use super::{Context, Family, FeatureDef, FeatureVector};
use crate::annotate::Upos;

/// (key, tags, label word, prefix used for the "simple" row)
const CLASSES: [(&str, &[Upos], &str, &str); 4] = [
    ("noun", &[Upos::Noun, Upos::Propn], "Noun", "Simpl"),
    ("verb", &[Upos::Verb, Upos::Aux], "Verb", "Simpl"),
    ("adj", &[Upos::Adj], "Adj", "Simp"),
    ("adv", &[Upos::Adv], "Adv", "Simp"),
];

pub(super) fn defs() -> Vec<FeatureDef> {
    let mut defs = Vec::with_capacity(12);
    for (key, tags, word, simple) in CLASSES {
        let tags: Vec<&str> = tags.iter().map(|t| t.as_str()).collect();
        let tags = tags.join("+");
        defs.push(
            FeatureDef::new(format!("simple_{key}_variation"), Family::Variation, format!("{simple} {word} variation"))
                .note(format!("types/tokens over {tags}")),
        );
        defs.push(
            FeatureDef::new(format!("squared_{key}_variation"), Family::Variation, format!("Sqrd {word} variation"))
                .note(format!("types^2/tokens over {tags}")),
        );
        defs.push(
            FeatureDef::new(format!("corrected_{key}_variation"), Family::Variation, format!("Corr {word} variation"))
                .note(format!("types/sqrt(2 tokens) over {tags}")),
        );
    }
    defs
}

pub(super) fn extract(ctx: &Context, out: &mut FeatureVector) {
    for (key, tags, _, _) in CLASSES {
        let tokens: Vec<String> = ctx
            .doc
            .words()
            .filter(|w| tags.contains(&w.pos))
            .map(|w| w.surface.to_lowercase())
            .collect();
        if tokens.is_empty() {
            continue;
        }
        let n = tokens.len() as f64;
        let t = tokens.iter().collect::<HashSet<_>>().len() as f64;
        out.set(&format!("simple_{key}_variation"), t / n);
        out.set(&format!("squared_{key}_variation"), t * t / n);
        out.set(&format!("corrected_{key}_variation"), t / (2.0 * n).sqrt());
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_util::doc;
    use super::super::{extract, FeatureResources};
    use crate::annotate::Upos::*;

    #[test]
    fn verb_example() {
        let d = doc(&[&[("run", Verb, 1), ("ran", Verb, 1), ("run", Verb, 1), ("Ran", Verb, 1), ("dog", Noun, 1), ("dog", Noun, 1), ("dog", Noun, 1)]]);
        let v = extract(&d, &FeatureResources::new()).unwrap();
        assert_eq!(v.get("simple_verb_variation"), Some(0.5));
        assert_eq!(v.get("squared_verb_variation"), Some(1.0));
        assert!((v.get("corrected_verb_variation").unwrap() - 0.707_106_781_186_547_5).abs() < 1e-15);
        assert!((v.get("simple_noun_variation").unwrap() - 1.0 / 3.0).abs() < 1e-15);
        for id in ["simple_adv_variation", "squared_adv_variation", "corrected_adv_variation"] {
            assert_eq!(v.get(id), None);
        }
    }
}
