//! Recursive attractor-basin tree classifier.
//!
//! Each branch node holds an evolved rule vector; a pattern is run to its
//! attractor and routed by the basin it lands in. Basins whose training
//! patterns share one class become labeled leaves, mixed basins recurse on
//! their subset, and the depth cap turns any still-mixed subset into a
//! majority-vote leaf. Attractors never seen in training route to the
//! global majority class.

use std::collections::BTreeMap;
use std::fmt;

use crate::ca::{
    attractor_key_packed, find_attractor, BoundaryMode, CAState, RuleVector, DEFAULT_STEP_BUDGET,
};
use crate::error::{Error, Result};
use crate::ga::{evolve, GaParams, GenerationTrace};

/// Index into a model's class table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId(pub u16);

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A training example: a fixed-width bit pattern and its class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledPattern {
    pub bits: CAState,
    pub label: ClassId,
}

/// Stable routing key of the basin containing `bits`: the smallest state
/// of the attractor cycle it drains to.
pub fn attractor_route_key(
    bits: &CAState,
    rules: &RuleVector,
    boundary: BoundaryMode,
    max_steps: usize,
) -> Result<CAState> {
    if bits.len() != rules.len() {
        return Err(Error::DimensionMismatch {
            expected: rules.len(),
            got: bits.len(),
        });
    }
    if bits.len() <= 64 {
        let key = attractor_key_packed(bits.to_index(), rules.rules(), boundary, max_steps)?;
        Ok(CAState::from_index(key, bits.len()))
    } else {
        Ok(find_attractor(bits, rules, boundary, max_steps)?
            .attractor_key()
            .clone())
    }
}

/// Groups patterns by the attractor basin they drain to under `rules`.
/// Keys are canonical attractor states; values index into `patterns` in
/// input order.
pub fn distribute(
    rules: &RuleVector,
    patterns: &[LabeledPattern],
    boundary: BoundaryMode,
) -> Result<BTreeMap<CAState, Vec<usize>>> {
    let mut groups: BTreeMap<CAState, Vec<usize>> = BTreeMap::new();
    for (idx, pattern) in patterns.iter().enumerate() {
        let key = attractor_route_key(&pattern.bits, rules, boundary, DEFAULT_STEP_BUDGET)?;
        groups.entry(key).or_default().push(idx);
    }
    Ok(groups)
}

/// One node of the trained tree.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf(ClassId),
    Branch {
        rules: RuleVector,
        routes: BTreeMap<CAState, TreeNode>,
        default_label: ClassId,
    },
}

impl TreeNode {
    /// Depth counted in branch levels; a bare leaf is depth 0.
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf(_) => 0,
            TreeNode::Branch { routes, .. } => {
                1 + routes.values().map(|n| n.depth()).max().unwrap_or(0)
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            TreeNode::Leaf(_) => 1,
            TreeNode::Branch { routes, .. } => {
                1 + routes.values().map(|n| n.node_count()).sum::<usize>()
            }
        }
    }
}

/// A trained classifier: the routing tree plus the metadata needed to
/// apply and persist it.
#[derive(Debug, Clone, PartialEq)]
pub struct MacaTree {
    pub root: TreeNode,
    pub n: usize,
    pub classes: Vec<String>,
    pub boundary: BoundaryMode,
    pub build_params: GaParams,
}

impl MacaTree {
    /// Routes `bits` through the tree and returns its class.
    pub fn classify(&self, bits: &CAState) -> Result<ClassId> {
        if bits.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: bits.len(),
            });
        }
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf(label) => return Ok(*label),
                TreeNode::Branch {
                    rules,
                    routes,
                    default_label,
                } => {
                    let key = attractor_route_key(bits, rules, self.boundary, DEFAULT_STEP_BUDGET)?;
                    match routes.get(&key) {
                        Some(child) => node = child,
                        None => return Ok(*default_label),
                    }
                }
            }
        }
    }

    pub fn class_name(&self, id: ClassId) -> &str {
        &self.classes[id.0 as usize]
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }
}

/// GA trace of one tree node, numbered in build (depth-first) order.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTrace {
    pub node_id: usize,
    pub trace: Vec<GenerationTrace>,
}

/// Majority label; ties go to the class whose first occurrence among
/// `indices` (in the given order) is earliest.
fn majority_label(patterns: &[LabeledPattern], indices: &[usize]) -> ClassId {
    let mut stats: Vec<(ClassId, usize, usize)> = Vec::new();
    for (rank, &idx) in indices.iter().enumerate() {
        let label = patterns[idx].label;
        match stats.iter_mut().find(|(l, _, _)| *l == label) {
            Some((_, count, _)) => *count += 1,
            None => stats.push((label, 1, rank)),
        }
    }
    stats
        .iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.2.cmp(&a.2)))
        .map(|&(label, _, _)| label)
        .expect("indices are never empty")
}

/// Seed for the GA run of node `node_id`, split off the base seed.
fn node_seed(base: u64, node_id: u64) -> u64 {
    let mut z = base ^ node_id.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct TreeBuilder<'a> {
    patterns: &'a [LabeledPattern],
    ga: &'a GaParams,
    max_depth: usize,
    boundary: BoundaryMode,
    global_default: ClassId,
    next_node_id: usize,
    traces: Vec<NodeTrace>,
}

impl TreeBuilder<'_> {
    fn build(&mut self, indices: Vec<usize>, depth: usize) -> Result<TreeNode> {
        let first_label = self.patterns[indices[0]].label;
        if indices
            .iter()
            .all(|&i| self.patterns[i].label == first_label)
        {
            return Ok(TreeNode::Leaf(first_label));
        }
        if depth > self.max_depth {
            return Ok(TreeNode::Leaf(majority_label(self.patterns, &indices)));
        }
        // Identical bit patterns can never be separated by any rule vector;
        // vote immediately instead of burning GA budget and depth.
        let first_bits = &self.patterns[indices[0]].bits;
        if indices
            .iter()
            .all(|&i| self.patterns[i].bits == *first_bits)
        {
            return Ok(TreeNode::Leaf(majority_label(self.patterns, &indices)));
        }

        let node_id = self.next_node_id;
        self.next_node_id += 1;
        let subset: Vec<LabeledPattern> =
            indices.iter().map(|&i| self.patterns[i].clone()).collect();
        let params = GaParams {
            rng_seed: node_seed(self.ga.rng_seed, node_id as u64),
            ..self.ga.clone()
        };
        let (best, trace) = evolve(&subset, &params, self.boundary)?;
        self.traces.push(NodeTrace { node_id, trace });

        let groups = distribute(&best.rules, &subset, self.boundary)?;
        let mut routes = BTreeMap::new();
        for (key, local) in groups {
            let global: Vec<usize> = local.into_iter().map(|l| indices[l]).collect();
            routes.insert(key, self.build(global, depth + 1)?);
        }
        Ok(TreeNode::Branch {
            rules: best.rules,
            routes,
            default_label: self.global_default,
        })
    }
}

/// Trains a tree and returns the per-node GA traces alongside it.
pub fn train_tree_traced(
    patterns: &[LabeledPattern],
    classes: &[String],
    ga: &GaParams,
    max_depth: usize,
    boundary: BoundaryMode,
) -> Result<(MacaTree, Vec<NodeTrace>)> {
    if patterns.is_empty() {
        return Err(Error::InvalidInput("training set must not be empty".into()));
    }
    if max_depth == 0 {
        return Err(Error::InvalidParameter(
            "max_depth must be at least 1".into(),
        ));
    }
    ga.validate()?;
    let n = patterns[0].bits.len();
    for p in patterns {
        if p.bits.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.bits.len(),
            });
        }
        if p.label.0 as usize >= classes.len() {
            return Err(Error::InvalidInput(format!(
                "pattern label {} has no entry in the class table (len {})",
                p.label,
                classes.len()
            )));
        }
    }

    let all: Vec<usize> = (0..patterns.len()).collect();
    let mut builder = TreeBuilder {
        patterns,
        ga,
        max_depth,
        boundary,
        global_default: majority_label(patterns, &all),
        next_node_id: 0,
        traces: Vec::new(),
    };
    let root = builder.build(all, 1)?;
    let tree = MacaTree {
        root,
        n,
        classes: classes.to_vec(),
        boundary,
        build_params: ga.clone(),
    };
    Ok((tree, builder.traces))
}

/// Trains a tree on `patterns`; see [`train_tree_traced`] for the variant
/// that also reports GA traces.
pub fn train_tree(
    patterns: &[LabeledPattern],
    classes: &[String],
    ga: &GaParams,
    max_depth: usize,
    boundary: BoundaryMode,
) -> Result<MacaTree> {
    train_tree_traced(patterns, classes, ga, max_depth, boundary).map(|(tree, _)| tree)
}

/// Fraction of patterns the tree classifies back to their own label.
pub fn training_accuracy(tree: &MacaTree, patterns: &[LabeledPattern]) -> Result<f64> {
    if patterns.is_empty() {
        return Err(Error::InvalidInput("empty pattern set".into()));
    }
    let mut correct = 0usize;
    for p in patterns {
        if tree.classify(&p.bits)? == p.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / patterns.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ca::RuleNumber;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pattern(bits: &str, label: u16) -> LabeledPattern {
        LabeledPattern {
            bits: CAState::from_bitstring(bits).unwrap(),
            label: ClassId(label),
        }
    }

    fn state(s: &str) -> CAState {
        CAState::from_bitstring(s).unwrap()
    }

    fn two_classes() -> Vec<String> {
        vec!["A".into(), "B".into()]
    }

    fn seeded_ga(seed: u64) -> GaParams {
        GaParams {
            population_size: 16,
            max_generations: 20,
            rng_seed: seed,
            seed_candidates: vec![RuleVector::identity(4).unwrap()],
            ..GaParams::default()
        }
    }

    #[test]
    fn distribute_identity_rule_gives_singletons() {
        let patterns = vec![pattern("0000", 0), pattern("1111", 1)];
        let groups = distribute(
            &RuleVector::identity(4).unwrap(),
            &patterns,
            BoundaryMode::Null,
        )
        .unwrap();
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[&state("0000")], vec![0]);
        assert_eq!(groups[&state("1111")], vec![1]);
    }

    #[test]
    fn distribute_null_rule_gives_one_group() {
        let patterns = vec![pattern("0000", 0), pattern("1111", 1), pattern("0101", 0)];
        let groups = distribute(
            &RuleVector::uniform(RuleNumber(0), 4).unwrap(),
            &patterns,
            BoundaryMode::Null,
        )
        .unwrap();
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[&state("0000")], vec![0, 1, 2]);
    }

    #[test]
    fn distribute_rule_238_n3_groups_by_basin() {
        let patterns = vec![pattern("001", 0), pattern("011", 0), pattern("110", 1)];
        let groups = distribute(
            &RuleVector::uniform(RuleNumber(238), 3).unwrap(),
            &patterns,
            BoundaryMode::Null,
        )
        .unwrap();
        assert_eq!(groups[&state("111")], vec![0, 1]);
        assert_eq!(groups[&state("110")], vec![2]);
    }

    #[test]
    fn distribute_union_covers_input() {
        let patterns: Vec<LabeledPattern> = (0..16)
            .map(|i| LabeledPattern {
                bits: CAState::from_index(i, 4),
                label: ClassId((i % 3) as u16),
            })
            .collect();
        let groups = distribute(
            &RuleVector::uniform(RuleNumber(110), 4).unwrap(),
            &patterns,
            BoundaryMode::Null,
        )
        .unwrap();
        let mut seen: Vec<usize> = groups.values().flatten().copied().collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn single_class_set_trains_to_bare_leaf() {
        let patterns = vec![pattern("0000", 1), pattern("0110", 1)];
        let (tree, traces) = train_tree_traced(
            &patterns,
            &two_classes(),
            &seeded_ga(1),
            8,
            BoundaryMode::Null,
        )
        .unwrap();
        assert_eq!(tree.root, TreeNode::Leaf(ClassId(1)));
        assert!(traces.is_empty(), "no GA run for a pure set");
        assert_eq!(tree.classify(&state("1010")).unwrap(), ClassId(1));
    }

    #[test]
    fn separable_pair_trains_to_perfect_tree() {
        let patterns = vec![pattern("0000", 0), pattern("1111", 1)];
        let tree = train_tree(
            &patterns,
            &two_classes(),
            &seeded_ga(2),
            8,
            BoundaryMode::Null,
        )
        .unwrap();
        assert_eq!(training_accuracy(&tree, &patterns).unwrap(), 1.0);
        assert_eq!(tree.classify(&state("0000")).unwrap(), ClassId(0));
        assert_eq!(tree.classify(&state("1111")).unwrap(), ClassId(1));
    }

    #[test]
    fn unseen_attractor_routes_to_global_majority() {
        // Identity-seeded training gives singleton basins, so a probe whose
        // basin never appeared in training falls through to the default
        // route: the global majority class (B here, 3 of 5).
        let patterns = vec![
            pattern("0000", 0),
            pattern("1111", 1),
            pattern("1000", 1),
            pattern("0001", 1),
            pattern("1110", 0),
        ];
        let tree =
            train_tree(&patterns, &two_classes(), &seeded_ga(9), 8, BoundaryMode::Null).unwrap();
        match &tree.root {
            TreeNode::Branch { default_label, .. } => assert_eq!(*default_label, ClassId(1)),
            TreeNode::Leaf(_) => panic!("mixed-class set must train to a branch"),
        }
        assert_eq!(tree.classify(&state("0110")).unwrap(), ClassId(1));
    }

    #[test]
    fn conflicting_duplicates_fall_back_to_majority_leaf() {
        let patterns = vec![pattern("0101", 0), pattern("0101", 1), pattern("0101", 1)];
        let (tree, traces) = train_tree_traced(
            &patterns,
            &two_classes(),
            &seeded_ga(3),
            8,
            BoundaryMode::Null,
        )
        .unwrap();
        // No rule vector separates identical patterns: immediate majority.
        assert_eq!(tree.root, TreeNode::Leaf(ClassId(1)));
        assert!(traces.is_empty());
    }

    #[test]
    fn depth_never_exceeds_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let patterns: Vec<LabeledPattern> = (0..24)
            .map(|_| LabeledPattern {
                bits: CAState::random(6, &mut rng),
                label: ClassId(rng.gen_range(0..2)),
            })
            .collect();
        let ga = GaParams {
            population_size: 8,
            max_generations: 4,
            rng_seed: 5,
            ..GaParams::default()
        };
        for cap in [1, 2, 3] {
            let tree = train_tree(&patterns, &two_classes(), &ga, cap, BoundaryMode::Null).unwrap();
            assert!(tree.depth() <= cap, "depth {} over cap {cap}", tree.depth());
        }
    }

    #[test]
    fn training_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let patterns: Vec<LabeledPattern> = (0..20)
            .map(|_| LabeledPattern {
                bits: CAState::random(5, &mut rng),
                label: ClassId(rng.gen_range(0..2)),
            })
            .collect();
        let ga = GaParams {
            population_size: 10,
            max_generations: 6,
            rng_seed: 11,
            ..GaParams::default()
        };
        let a = train_tree(&patterns, &two_classes(), &ga, 4, BoundaryMode::Null).unwrap();
        let b = train_tree(&patterns, &two_classes(), &ga, 4, BoundaryMode::Null).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identity_seeding_reaches_full_training_accuracy() {
        // Duplicate-free consistently labeled sets always admit a perfect
        // tree because the identity vector yields singleton basins.
        for seed in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(4..=8);
            let mut seen = std::collections::HashSet::new();
            let patterns: Vec<LabeledPattern> = (0..40)
                .filter_map(|_| {
                    let bits = CAState::random(n, &mut rng);
                    seen.insert(bits.clone()).then(|| LabeledPattern {
                        bits,
                        label: ClassId(rng.gen_range(0..3)),
                    })
                })
                .collect();
            let ga = GaParams {
                population_size: 12,
                max_generations: 10,
                rng_seed: seed,
                seed_candidates: vec![RuleVector::identity(n).unwrap()],
                ..GaParams::default()
            };
            let classes = vec!["x".into(), "y".into(), "z".into()];
            let tree = train_tree(&patterns, &classes, &ga, 64, BoundaryMode::Null).unwrap();
            assert_eq!(training_accuracy(&tree, &patterns).unwrap(), 1.0);
        }
    }

    #[test]
    fn rejects_empty_set_and_bad_labels() {
        assert!(train_tree(&[], &two_classes(), &seeded_ga(0), 4, BoundaryMode::Null).is_err());
        let bad = vec![pattern("0000", 7)];
        assert!(train_tree(&bad, &two_classes(), &seeded_ga(0), 4, BoundaryMode::Null).is_err());
    }

    #[test]
    fn weak_ga_recurses_into_child_nodes() {
        // A 2-chromosome, 1-generation GA cannot purify 60 random patterns
        // at the root, so impure basins must recurse; every node runs its
        // own GA and reports its own trace.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut seen = std::collections::HashSet::new();
        let patterns: Vec<LabeledPattern> = (0..60)
            .filter_map(|_| {
                let bits = CAState::random(6, &mut rng);
                seen.insert(bits.clone()).then(|| LabeledPattern {
                    bits,
                    label: ClassId(rng.gen_range(0..2)),
                })
            })
            .collect();
        let ga = GaParams {
            population_size: 2,
            max_generations: 1,
            rng_seed: 3,
            ..GaParams::default()
        };
        let (tree, traces) =
            train_tree_traced(&patterns, &two_classes(), &ga, 6, BoundaryMode::Null).unwrap();
        assert!(tree.depth() >= 2, "depth {} should recurse", tree.depth());
        assert!(traces.len() >= 2, "{} GA nodes", traces.len());
        let ids: Vec<usize> = traces.iter().map(|t| t.node_id).collect();
        assert_eq!(ids, (0..traces.len()).collect::<Vec<_>>());
        // Distinct nodes evolve under distinct derived seeds.
        assert!(tree.classify(&patterns[0].bits).is_ok());
    }

    #[test]
    fn wide_patterns_train_and_classify() {
        // 80-cell patterns exercise the unpacked state paths end to end.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let patterns: Vec<LabeledPattern> = (0..10)
            .map(|i| LabeledPattern {
                bits: CAState::random(80, &mut rng),
                label: ClassId((i % 2) as u16),
            })
            .collect();
        let ga = GaParams {
            population_size: 6,
            max_generations: 3,
            rng_seed: 1,
            seed_candidates: vec![RuleVector::identity(80).unwrap()],
            ..GaParams::default()
        };
        let tree = train_tree(&patterns, &two_classes(), &ga, 8, BoundaryMode::Null).unwrap();
        assert_eq!(training_accuracy(&tree, &patterns).unwrap(), 1.0);
    }

    #[test]
    fn single_leaf_tree_scores_the_majority_fraction() {
        // A constant classifier is right exactly on the majority class.
        let tree = MacaTree {
            root: TreeNode::Leaf(ClassId(0)),
            n: 4,
            classes: two_classes(),
            boundary: BoundaryMode::Null,
            build_params: GaParams::default(),
        };
        let patterns = vec![
            pattern("0000", 0),
            pattern("0001", 0),
            pattern("0010", 0),
            pattern("1111", 1),
            pattern("1110", 1),
        ];
        assert_eq!(training_accuracy(&tree, &patterns).unwrap(), 3.0 / 5.0);
    }

    #[test]
    fn classify_rejects_width_mismatch() {
        let tree = MacaTree {
            root: TreeNode::Leaf(ClassId(0)),
            n: 4,
            classes: two_classes(),
            boundary: BoundaryMode::Null,
            build_params: GaParams::default(),
        };
        assert!(tree.classify(&state("010")).is_err());
    }
}
