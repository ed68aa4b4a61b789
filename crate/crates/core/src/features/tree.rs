use super::phrasal::sentence_trees;
use super::{Context, Family, FeatureDef, FeatureVector, Requirement};

pub(super) fn defs() -> Vec<FeatureDef> {
    let def = |id: &str, label: &str, note: &str| {
        FeatureDef::new(id, Family::Tree, label).requires(Requirement::Full).note(note)
    };
    vec![
        def("tree_height_per_sentence", "Avr Tree height sent", "height in edges, root to deepest leaf"),
        def("tree_height_per_token", "Avr Tree height token", "summed height / T"),
        def(
            "ftree_height_per_sentence",
            "Avr FTree height sent",
            "interpretation: height after contracting each unary chain of internal nodes to one edge",
        ),
        def("ftree_height_per_token", "Avr Ftree height token", "summed flattened height / T"),
    ]
}

pub(super) fn extract(ctx: &Context, out: &mut FeatureVector) {
    let Some(trees) = sentence_trees(ctx) else {
        return;
    };
    let h: usize = trees.iter().map(|t| t.height()).sum();
    let f: usize = trees.iter().map(|t| t.flattened_height()).sum();
    out.set_ratio("tree_height_per_sentence", h as f64, ctx.s);
    out.set_ratio("tree_height_per_token", h as f64, ctx.t);
    out.set_ratio("ftree_height_per_sentence", f as f64, ctx.s);
    out.set_ratio("ftree_height_per_token", f as f64, ctx.t);
}
