//! Entity grid and graph-projection local coherence.

use std::collections::HashMap;

use serde::Serialize;

use super::{Context, Family, FeatureDef, FeatureVector};
use crate::annotate::{AnnotatedDocument, Token, Upos};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Role {
    X,
    O,
    S,
}

impl Role {
    pub fn rank(self) -> u32 {
        match self {
            Role::S => 3,
            Role::O => 2,
            Role::X => 1,
        }
    }

    fn of(token: &Token) -> Role {
        let Some(label) = token.dep_label.as_deref() else {
            return Role::X;
        };
        let base = label.split(':').next().unwrap_or(label);
        if label.starts_with("nsubj") {
            Role::S
        } else if base == "obj" || base == "iobj" {
            Role::O
        } else {
            Role::X
        }
    }
}

pub fn is_mention(token: &Token) -> bool {
    matches!(token.pos, Upos::Noun | Upos::Propn | Upos::Pron)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntityGrid {
    /// Case-folded lemmas, in order of first mention.
    pub entities: Vec<String>,
    /// `grid[sentence][entity]`; the strongest role when mentioned more than once.
    pub grid: Vec<Vec<Option<Role>>>,
}

impl EntityGrid {
    pub fn build(doc: &AnnotatedDocument) -> Self {
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut entities = Vec::new();
        let mut rows: Vec<Vec<(usize, Role)>> = Vec::with_capacity(doc.sentences.len());
        for sentence in &doc.sentences {
            let mut row = Vec::new();
            for tok in sentence.tokens.iter().filter(|t| is_mention(t)) {
                let key = tok.lemma.to_lowercase();
                let e = *index.entry(key.clone()).or_insert_with(|| {
                    entities.push(key);
                    entities.len() - 1
                });
                row.push((e, Role::of(tok)));
            }
            rows.push(row);
        }
        let grid = rows
            .into_iter()
            .map(|row| {
                let mut cells = vec![None; entities.len()];
                for (e, role) in row {
                    let cell: &mut Option<Role> = &mut cells[e];
                    *cell = Some(cell.map_or(role, |r| r.max(role)));
                }
                cells
            })
            .collect();
        EntityGrid { entities, grid }
    }

    pub fn sentences(&self) -> usize {
        self.grid.len()
    }

    /// Sum over sentence pairs i < j of the projection edge weights,
    /// optionally divided by the distance j - i.
    pub fn projection_weight(&self, projection: Projection, by_distance: bool) -> f64 {
        let n = self.grid.len();
        let mut total = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let shared = self.grid[i]
                    .iter()
                    .zip(&self.grid[j])
                    .filter_map(|(a, b)| Some((( *a)?, (*b)?)));
                let w = match projection {
                    Projection::Unweighted => f64::from(u8::from(shared.count() > 0)),
                    Projection::Weighted => shared.count() as f64,
                    Projection::Accumulative => shared.map(|(a, b)| f64::from(a.rank() * b.rank())).sum(),
                };
                total += if by_distance { w / (j - i) as f64 } else { w };
            }
        }
        total
    }

    /// Local coherence: projection weight averaged over sentences.
    pub fn coherence(&self, projection: Projection, by_distance: bool) -> Option<f64> {
        (self.sentences() >= 2).then(|| self.projection_weight(projection, by_distance) / self.sentences() as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    /// PU: edge of weight 1 when two sentences share an entity.
    Unweighted,
    /// PW: number of shared entities.
    Weighted,
    /// PA: sum of role-rank products over shared entities.
    Accumulative,
}

const COHERENCE: [(&str, &str, Projection, bool); 6] = [
    ("coherence_pa", "Local Coherence PA", Projection::Accumulative, false),
    ("coherence_pw", "Local Coherence PW", Projection::Weighted, false),
    ("coherence_pu", "Local Coherence PU", Projection::Unweighted, false),
    ("coherence_dist_pa", "Local Coh Dist PA", Projection::Accumulative, true),
    ("coherence_dist_pw", "Local Coh Dist PW", Projection::Weighted, true),
    ("coherence_dist_pu", "Local Coh Dist PU", Projection::Unweighted, true),
];

pub(super) fn defs() -> Vec<FeatureDef> {
    let mut defs = vec![
        FeatureDef::new("entities_per_sentence", Family::Discourse, "Avr Entity sent")
            .note("NOUN/PROPN/PRON mentions per sentence"),
        FeatureDef::new("entities_per_token", Family::Discourse, "Avr Entity token"),
        FeatureDef::new("unique_entities_per_sentence", Family::Discourse, "Avr Uniq Entity sent")
            .note("distinct lemmas per sentence, summed, per sentence"),
        FeatureDef::new("unique_entities_per_token", Family::Discourse, "Avr Uniq Entity token"),
    ];
    for (id, label, projection, dist) in COHERENCE {
        let kind = match projection {
            Projection::Accumulative => "accumulative (S=3, O=2, X=1 rank products)",
            Projection::Weighted => "weighted (shared entity count)",
            Projection::Unweighted => "unweighted",
        };
        let mut note = format!("interpretation: {kind} one-mode projection, edge sum / S");
        if dist {
            note.push_str(", edges divided by sentence distance");
        }
        defs.push(FeatureDef::new(id, Family::Discourse, label).note(note));
    }
    defs
}

pub(super) fn extract(ctx: &Context, out: &mut FeatureVector) {
    let grid = EntityGrid::build(ctx.doc);
    let mentions = ctx.doc.tokens().filter(|t| is_mention(t)).count() as f64;
    let unique = grid.grid.iter().flatten().filter(|c| c.is_some()).count() as f64;
    out.set_ratio("entities_per_sentence", mentions, ctx.s);
    out.set_ratio("entities_per_token", mentions, ctx.t);
    out.set_ratio("unique_entities_per_sentence", unique, ctx.s);
    out.set_ratio("unique_entities_per_token", unique, ctx.t);
    for (id, _, projection, dist) in COHERENCE {
        if let Some(c) = grid.coherence(projection, dist) {
            out.set(id, c);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_util::doc;
    use super::*;
    use crate::annotate::Upos::*;

    fn with_deps(mut d: AnnotatedDocument, deps: &[&[&str]]) -> AnnotatedDocument {
        for (s, labels) in d.sentences.iter_mut().zip(deps) {
            for (t, l) in s.tokens.iter_mut().zip(labels.iter()) {
                t.dep_label = Some(l.to_string());
            }
        }
        d
    }

    fn all(grid: &EntityGrid, dist: bool) -> [f64; 3] {
        [Projection::Unweighted, Projection::Weighted, Projection::Accumulative].map(|p| grid.coherence(p, dist).unwrap())
    }

    #[test]
    fn dog_in_both_sentences() {
        let d = doc(&[
            &[("The", Det, 1), ("dog", Noun, 1), ("ran", Verb, 1), (".", Punct, 0)],
            &[("The", Det, 1), ("dog", Noun, 1), ("slept", Verb, 1), (".", Punct, 0)],
        ]);
        let g = EntityGrid::build(&d);
        assert_eq!(g.entities, ["dog"]);
        assert_eq!(g.grid, [[Some(Role::X)], [Some(Role::X)]]);
        assert_eq!(all(&g, false), [0.5; 3]);
        assert_eq!(all(&g, true), [0.5; 3]);
    }

    #[test]
    fn no_shared_entity() {
        let d = doc(&[&[("dogs", Noun, 1), ("bark", Verb, 1)], &[("cats", Noun, 1), ("purr", Verb, 1)]]);
        let g = EntityGrid::build(&d);
        assert_eq!(all(&g, false), [0.0; 3]);
        assert_eq!(all(&g, true), [0.0; 3]);
    }

    #[test]
    fn distance_three() {
        let d = doc(&[
            &[("dog", Noun, 1)],
            &[("cat", Noun, 1)],
            &[("dog", Noun, 1)],
        ]);
        let g = EntityGrid::build(&d);
        assert_eq!(g.coherence(Projection::Unweighted, true), Some(1.0 / 6.0));
        assert_eq!(g.coherence(Projection::Unweighted, false), Some(1.0 / 3.0));
    }

    #[test]
    fn roles_from_dependencies() {
        let d = with_deps(
            doc(&[&[("dog", Noun, 1), ("chased", Verb, 1), ("cat", Noun, 1)], &[("it", Pron, 1), ("caught", Verb, 1), ("cat", Noun, 1)]]),
            &[&["nsubj", "root", "obj"], &["nsubj:pass", "root", "iobj"]],
        );
        let g = EntityGrid::build(&d);
        assert_eq!(g.entities, ["dog", "cat", "it"]);
        assert_eq!(g.grid[0], [Some(Role::S), Some(Role::O), None]);
        assert_eq!(g.grid[1], [None, Some(Role::O), Some(Role::S)]);
        // cat shared as O/O: rank product 4, over 2 sentences
        assert_eq!(g.coherence(Projection::Accumulative, false), Some(2.0));
    }

    #[test]
    fn no_entities_gives_empty_grid() {
        let d = doc(&[&[("run", Verb, 1), ("!", Punct, 0)]]);
        let g = EntityGrid::build(&d);
        assert!(g.entities.is_empty());
        assert_eq!(g.grid, [Vec::<Option<Role>>::new()]);
    }

    #[test]
    fn single_sentence_has_no_coherence() {
        let d = doc(&[&[("dog", Noun, 1)]]);
        let v = super::super::extract(&d, &super::super::FeatureResources::new()).unwrap();
        assert_eq!(v.get("coherence_pu"), None);
        assert_eq!(v.get("entities_per_sentence"), Some(1.0));
    }
}
