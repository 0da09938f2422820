//! Spectral labelings of the rooted `|D|`-homogeneous tree.
//!
//! A labeling assigns to every non-root vertex a digit in `[0, N)`. It is
//! spectral when (1) an all-zero path runs from the root, (2) every vertex
//! has an eventually-constant continuation (all 0 or all `N-1`), and (3) the
//! label set of every vertex's children forms a Hadamard triple with the
//! digits. Infinite stabilizing paths then encode the integers of a maximal
//! orthogonal frequency set.
//!
//! Infinite trees are represented as an explicit complete tree of finite
//! depth plus a `default_rule`: a fixed Hadamard label set containing 0 that
//! labels all deeper levels. That makes conditions (1) and (2) decidable and
//! keeps the represented set well-defined beyond the stored depth.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::expansion::FrequencySet;
use crate::orthogonality::{
    branching_profile, enumerate_hadamard_label_sets, first_non_orthogonal_pair, HadamardCandidate,
    HadamardCheckMode, OrthogonalityError,
};
use crate::system::CantorSystem;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreesError {
    #[error("system does not satisfy the cyclotomic-product hypothesis")]
    UnsupportedSystem,
    #[error("tree depth must be at least 1")]
    InvalidDepth,
    #[error("requested depth {requested} exceeds the explicit tree depth {depth}")]
    DepthExceedsTree { requested: u32, depth: u32 },
    #[error("enumeration limit must be at least 1")]
    ZeroLimit,
    #[error("labeling index {index} out of range, only {total} labelings exist")]
    IndexOutOfRange { index: u64, total: u64 },
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("frequency set does not contain 0")]
    ZeroMissing,
    #[error("frequency set is not orthogonal: pair ({a}, {b})")]
    NotOrthogonal { a: BigInt, b: BigInt },
    #[error(transparent)]
    Orthogonality(#[from] OrthogonalityError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct TreeNode {
    label: Option<u32>,
    children: Vec<TreeNode>,
}

/// A finite-depth labeled complete `|D|`-ary tree with a deterministic rule
/// for all deeper levels.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralLabeling {
    system: CantorSystem,
    depth: u32,
    default_rule: Vec<u32>,
    root: TreeNode,
}

impl SpectralLabeling {
    pub fn system(&self) -> &CantorSystem {
        &self.system
    }

    /// Number of labeled levels stored explicitly.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// The label set applied at every level beyond the explicit depth.
    pub fn default_rule(&self) -> &[u32] {
        &self.default_rule
    }

    fn node_at(&self, path: &[u32]) -> Option<&TreeNode> {
        let mut node = &self.root;
        for &label in path {
            node = node.children.iter().find(|c| c.label == Some(label))?;
        }
        Some(node)
    }

    /// Labels of the children of the node addressed by `path`, in ascending
    /// order; `None` when no such node exists in the explicit tree.
    pub fn child_labels(&self, path: &[u32]) -> Option<Vec<u32>> {
        let node = self.node_at(path)?;
        if node.children.is_empty() {
            return None;
        }
        Some(node.children.iter().map(|c| c.label.unwrap()).collect())
    }

    /// Every internal node's child-label set, keyed by the node's label path,
    /// in lexicographic path order.
    pub fn child_label_sets(&self) -> BTreeMap<Vec<u32>, Vec<u32>> {
        let mut out = BTreeMap::new();
        let mut stack = vec![(Vec::new(), &self.root)];
        while let Some((path, node)) = stack.pop() {
            if node.children.is_empty() {
                continue;
            }
            out.insert(
                path.clone(),
                node.children.iter().map(|c| c.label.unwrap()).collect(),
            );
            for child in &node.children {
                let mut child_path = path.clone();
                child_path.push(child.label.unwrap());
                stack.push((child_path, child));
            }
        }
        out
    }

    /// DOT rendering: node definitions in pre-order, then the edges.
    /// The root is labeled with the empty-set symbol.
    pub fn to_dot(&self) -> String {
        fn node_id(path: &[u32]) -> String {
            if path.is_empty() {
                "r".to_string()
            } else {
                let digits: Vec<String> = path.iter().map(|d| d.to_string()).collect();
                format!("r_{}", digits.join("_"))
            }
        }
        fn collect(
            node: &TreeNode,
            path: &mut Vec<u32>,
            nodes: &mut Vec<String>,
            edges: &mut Vec<String>,
        ) {
            let id = node_id(path);
            let text = match node.label {
                Some(l) => l.to_string(),
                None => "∅".to_string(),
            };
            nodes.push(format!("    \"{id}\" [label=\"{text}\"];"));
            for child in &node.children {
                path.push(child.label.unwrap());
                edges.push(format!("    \"{id}\" -> \"{}\";", node_id(path)));
                collect(child, path, nodes, edges);
                path.pop();
            }
        }
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        collect(&self.root, &mut Vec::new(), &mut nodes, &mut edges);
        let mut out = String::from("digraph spectral_labeling {\n    node [shape=circle];\n");
        for line in nodes {
            out.push_str(&line);
            out.push('\n');
        }
        for line in edges {
            out.push_str(&line);
            out.push('\n');
        }
        out.push_str("}\n");
        out
    }
}

/// Incremental construction of a labeling: explicit child sets per node path,
/// everything unspecified falling back to the default rule.
pub struct LabelingBuilder {
    system: CantorSystem,
    depth: u32,
    default_rule: Option<Vec<u32>>,
    child_sets: BTreeMap<Vec<u32>, Vec<u32>>,
}

impl LabelingBuilder {
    pub fn new(system: &CantorSystem, depth: u32) -> Self {
        LabelingBuilder {
            system: system.clone(),
            depth,
            default_rule: None,
            child_sets: BTreeMap::new(),
        }
    }

    pub fn default_rule(mut self, labels: &[u32]) -> Self {
        let mut labels = labels.to_vec();
        labels.sort_unstable();
        self.default_rule = Some(labels);
        self
    }

    /// Set the child labels of the node addressed by `path`.
    pub fn child_set(mut self, path: &[u32], labels: &[u32]) -> Self {
        let mut labels = labels.to_vec();
        labels.sort_unstable();
        self.child_sets.insert(path.to_vec(), labels);
        self
    }

    fn check_label_set(&self, labels: &[u32], what: &str) -> Result<(), TreesError> {
        if labels.len() != self.system.digit_count() {
            return Err(TreesError::MalformedTree(format!(
                "{what} has {} labels, expected {}",
                labels.len(),
                self.system.digit_count()
            )));
        }
        for pair in labels.windows(2) {
            if pair[0] == pair[1] {
                return Err(TreesError::MalformedTree(format!(
                    "{what} repeats label {}",
                    pair[0]
                )));
            }
        }
        if let Some(&l) = labels.iter().find(|&&l| l as u64 >= self.system.base()) {
            return Err(TreesError::MalformedTree(format!(
                "{what} contains label {l}, out of range for base {}",
                self.system.base()
            )));
        }
        Ok(())
    }

    pub fn build(self) -> Result<SpectralLabeling, TreesError> {
        if self.depth == 0 {
            return Err(TreesError::InvalidDepth);
        }
        let default_rule = match &self.default_rule {
            Some(rule) => rule.clone(),
            None => smallest_label_set_containing_zero(&self.system)
                .ok_or(TreesError::UnsupportedSystem)?,
        };
        self.check_label_set(&default_rule, "default rule")?;
        if !default_rule.contains(&0) {
            return Err(TreesError::MalformedTree(
                "default rule must contain label 0".into(),
            ));
        }

        fn grow(
            builder: &LabelingBuilder,
            default_rule: &[u32],
            path: &mut Vec<u32>,
            level: u32,
            used: &mut usize,
        ) -> Result<TreeNode, TreesError> {
            let label = path.last().copied();
            let children = if level == builder.depth {
                Vec::new()
            } else {
                let labels = match builder.child_sets.get(path.as_slice()) {
                    Some(labels) => {
                        *used += 1;
                        builder.check_label_set(labels, &format!("child set at {path:?}"))?;
                        labels.clone()
                    }
                    None => default_rule.to_vec(),
                };
                let mut children = Vec::with_capacity(labels.len());
                for l in labels {
                    path.push(l);
                    children.push(grow(builder, default_rule, path, level + 1, used)?);
                    path.pop();
                }
                children
            };
            Ok(TreeNode { label, children })
        }

        let mut used = 0;
        let root = grow(&self, &default_rule, &mut Vec::new(), 0, &mut used)?;
        if used != self.child_sets.len() {
            let reachable = {
                let probe = SpectralLabeling {
                    system: self.system.clone(),
                    depth: self.depth,
                    default_rule: default_rule.clone(),
                    root: root.clone(),
                };
                self.child_sets
                    .keys()
                    .find(|path| probe.node_at(path).is_none() || path.len() as u32 >= self.depth)
                    .cloned()
            };
            return Err(TreesError::MalformedTree(format!(
                "child set given for unreachable or leaf node path {:?}",
                reachable.unwrap_or_default()
            )));
        }
        Ok(SpectralLabeling {
            system: self.system,
            depth: self.depth,
            default_rule,
            root,
        })
    }
}

/// The lexicographically smallest admissible label set containing 0, if any.
fn smallest_label_set_containing_zero(system: &CantorSystem) -> Option<Vec<u32>> {
    let base = system.base() as usize;
    let want = system.digit_count();
    let admissible: Vec<bool> = (0..base)
        .map(|delta| {
            delta != 0
                && system
                    .admissible_label_difference(delta as i64)
                    .expect("in range")
        })
        .collect();
    fn dfs(
        start: usize,
        base: usize,
        want: usize,
        admissible: &[bool],
        chosen: &mut Vec<u32>,
    ) -> bool {
        if chosen.len() == want {
            return true;
        }
        for label in start..base {
            if base - label < want - chosen.len() {
                return false;
            }
            if chosen.iter().all(|&prev| admissible[label - prev as usize]) {
                chosen.push(label as u32);
                if dfs(label + 1, base, want, admissible, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    let mut chosen = vec![0u32];
    dfs(1, base, want, &admissible, &mut chosen).then_some(chosen)
}

/// Which of the three labeling conditions a violation breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralCondition {
    /// An all-zero path from the root through every explicit level.
    ZeroPath,
    /// A stabilizing continuation from every vertex (carried by the default rule).
    StabilizingTail,
    /// Every child-label set forms a Hadamard triple with the digits.
    HadamardChildren,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelingViolation {
    pub path: Vec<u32>,
    pub condition: SpectralCondition,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelingReport {
    violations: Vec<LabelingViolation>,
}

impl LabelingReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[LabelingViolation] {
        &self.violations
    }

    pub fn first_violation(&self) -> Option<&LabelingViolation> {
        self.violations.first()
    }
}

/// Check the three spectral-labeling conditions on the explicit tree and the
/// default rule. Structural completeness is enforced at construction time, so
/// this reports semantic violations only.
pub fn validate_labeling(tree: &SpectralLabeling) -> LabelingReport {
    let system = &tree.system;
    let mut violations = Vec::new();

    // condition 1: the all-zero path must exist through every explicit level
    let mut path: Vec<u32> = Vec::new();
    for _ in 0..tree.depth {
        match tree.child_labels(&path) {
            Some(labels) if labels.contains(&0) => path.push(0),
            _ => {
                violations.push(LabelingViolation {
                    path: path.clone(),
                    condition: SpectralCondition::ZeroPath,
                    detail: "node has no child labeled 0".into(),
                });
                break;
            }
        }
    }

    // condition 2: the default rule must extend every vertex with a valid
    // stabilizing continuation, so it must itself be a Hadamard label set
    match HadamardCandidate::new(system, &tree.default_rule) {
        Ok(candidate) if candidate.check(HadamardCheckMode::Exact) => {}
        _ => violations.push(LabelingViolation {
            path: Vec::new(),
            condition: SpectralCondition::StabilizingTail,
            detail: format!(
                "default rule {:?} is not a Hadamard label set",
                tree.default_rule
            ),
        }),
    }

    // condition 3: every explicit child set, in path order
    for (path, labels) in tree.child_label_sets() {
        let ok = HadamardCandidate::new(system, &labels)
            .map(|c| c.check(HadamardCheckMode::Exact))
            .unwrap_or(false);
        if !ok {
            violations.push(LabelingViolation {
                path,
                condition: SpectralCondition::HadamardChildren,
                detail: format!("child labels {labels:?} contain an inadmissible difference"),
            });
        }
    }

    LabelingReport { violations }
}

/// The deterministic witness labeling: every node carries the
/// lexicographically smallest Hadamard label set containing 0.
pub fn canonical_labeling(
    system: &CantorSystem,
    depth: u32,
) -> Result<SpectralLabeling, TreesError> {
    if depth == 0 {
        return Err(TreesError::InvalidDepth);
    }
    if !system.is_cyclotomic_product() {
        return Err(TreesError::UnsupportedSystem);
    }
    LabelingBuilder::new(system, depth).build()
}

/// Per-node choice domains of the enumeration, in pre-order: nodes on the
/// all-zero spine may only pick sets containing 0.
struct EnumerationSpace {
    all_sets: Vec<Vec<u32>>,
    zero_sets: Vec<Vec<u32>>,
    /// `true` for spine slots, pre-order over internal nodes.
    spine: Vec<bool>,
    default_rule: Vec<u32>,
}

impl EnumerationSpace {
    fn new(system: &CantorSystem, depth: u32) -> Result<Self, TreesError> {
        if depth == 0 {
            return Err(TreesError::InvalidDepth);
        }
        if !system.is_cyclotomic_product() {
            return Err(TreesError::UnsupportedSystem);
        }
        let all_sets = enumerate_hadamard_label_sets(system).sets;
        let zero_sets: Vec<Vec<u32>> = all_sets
            .iter()
            .filter(|s| s.contains(&0))
            .cloned()
            .collect();
        let default_rule =
            smallest_label_set_containing_zero(system).ok_or(TreesError::UnsupportedSystem)?;
        let m = system.digit_count();
        let mut spine = Vec::new();
        fn walk(level: u32, depth: u32, m: usize, on_spine: bool, spine: &mut Vec<bool>) {
            if level == depth {
                return;
            }
            spine.push(on_spine);
            for position in 0..m {
                walk(level + 1, depth, m, on_spine && position == 0, spine);
            }
        }
        walk(0, depth, m, true, &mut spine);
        Ok(EnumerationSpace {
            all_sets,
            zero_sets,
            spine,
            default_rule,
        })
    }

    fn domain_len(&self, slot: usize) -> u64 {
        if self.spine[slot] {
            self.zero_sets.len() as u64
        } else {
            self.all_sets.len() as u64
        }
    }

    fn domain(&self, slot: usize) -> &[Vec<u32>] {
        if self.spine[slot] {
            &self.zero_sets
        } else {
            &self.all_sets
        }
    }

    /// Total number of labelings, `None` when it overflows u128.
    fn total(&self) -> Option<u128> {
        (0..self.spine.len()).try_fold(1u128, |acc, slot| {
            acc.checked_mul(self.domain_len(slot) as u128)
        })
    }

    fn materialize(&self, system: &CantorSystem, depth: u32, choices: &[u64]) -> SpectralLabeling {
        fn build(
            space: &EnumerationSpace,
            choices: &[u64],
            cursor: &mut usize,
            label: Option<u32>,
            level: u32,
            depth: u32,
        ) -> TreeNode {
            if level == depth {
                return TreeNode {
                    label,
                    children: Vec::new(),
                };
            }
            let slot = *cursor;
            *cursor += 1;
            let set = &space.domain(slot)[choices[slot] as usize];
            let children = set
                .iter()
                .map(|&l| build(space, choices, cursor, Some(l), level + 1, depth))
                .collect();
            TreeNode { label, children }
        }
        let mut cursor = 0;
        let root = build(self, choices, &mut cursor, None, 0, depth);
        debug_assert_eq!(cursor, self.spine.len());
        SpectralLabeling {
            system: system.clone(),
            depth,
            default_rule: self.default_rule.clone(),
            root,
        }
    }
}

/// Enumerate spectral labelings in deterministic lexicographic order (each
/// node's label sets ordered as sorted tuples, deeper nodes varying fastest),
/// stopping after `limit` trees.
pub fn enumerate_labelings(
    system: &CantorSystem,
    depth: u32,
    limit: usize,
) -> Result<Vec<SpectralLabeling>, TreesError> {
    if limit == 0 {
        return Err(TreesError::ZeroLimit);
    }
    let space = EnumerationSpace::new(system, depth)?;
    let slots = space.spine.len();
    let mut choices = vec![0u64; slots];
    let mut out = Vec::new();
    'outer: loop {
        out.push(space.materialize(system, depth, &choices));
        if out.len() == limit {
            break;
        }
        let mut slot = slots;
        loop {
            if slot == 0 {
                break 'outer;
            }
            slot -= 1;
            choices[slot] += 1;
            if choices[slot] < space.domain_len(slot) {
                break;
            }
            choices[slot] = 0;
        }
    }
    Ok(out)
}

/// Total number of spectral labelings at the given depth; `None` when the
/// count overflows `u128`.
pub fn count_labelings(system: &CantorSystem, depth: u32) -> Result<Option<u128>, TreesError> {
    Ok(EnumerationSpace::new(system, depth)?.total())
}

/// Random access into the enumeration order of [`enumerate_labelings`].
pub fn labeling_at_index(
    system: &CantorSystem,
    depth: u32,
    index: u64,
) -> Result<SpectralLabeling, TreesError> {
    let space = EnumerationSpace::new(system, depth)?;
    if let Some(total) = space.total() {
        if (index as u128) >= total {
            return Err(TreesError::IndexOutOfRange {
                index,
                total: total.min(u64::MAX as u128) as u64,
            });
        }
    }
    let slots = space.spine.len();
    let mut choices = vec![0u64; slots];
    let mut rest = index as u128;
    for slot in (0..slots).rev() {
        let len = space.domain_len(slot) as u128;
        choices[slot] = (rest % len) as u64;
        rest /= len;
    }
    debug_assert_eq!(rest, 0);
    Ok(space.materialize(system, depth, &choices))
}

/// The integers of the labeling truncated at `depth`: elements whose digit
/// sequence follows an explicit tree path and is constant from position
/// `depth` on, the constant tail being available both in the explicit tree
/// below the path and in the default rule beyond it.
pub fn lambda_of_labeling(tree: &SpectralLabeling, depth: u32) -> Result<FrequencySet, TreesError> {
    if depth > tree.depth {
        return Err(TreesError::DepthExceedsTree {
            requested: depth,
            depth: tree.depth,
        });
    }
    let base = tree.system.base();
    let last = (base - 1) as u32;
    let mut tails: Vec<u32> = vec![0];
    if tree.default_rule.contains(&last) && last != 0 {
        tails.push(last);
    }

    fn chain_exists(node: &TreeNode, digit: u32, levels: u32) -> bool {
        if levels == 0 {
            return true;
        }
        node.children
            .iter()
            .find(|c| c.label == Some(digit))
            .is_some_and(|child| chain_exists(child, digit, levels - 1))
    }

    struct Walk<'a> {
        depth: u32,
        explicit_depth: u32,
        base: u64,
        tails: &'a [u32],
        out: Vec<BigInt>,
    }

    impl Walk<'_> {
        fn collect(&mut self, node: &TreeNode, level: u32, digits: &mut Vec<u32>) {
            if level == self.depth {
                for &tail in self.tails {
                    if chain_exists(node, tail, self.explicit_depth - self.depth) {
                        // positional value of the digits, with the all-(N-1)
                        // tail contributing -N^depth
                        let mut acc = if tail == 0 {
                            BigInt::from(0)
                        } else {
                            -BigInt::one()
                        };
                        for &d in digits.iter().rev() {
                            acc = acc * self.base + d;
                        }
                        self.out.push(acc);
                    }
                }
                return;
            }
            for child in &node.children {
                digits.push(child.label.unwrap());
                self.collect(child, level + 1, digits);
                digits.pop();
            }
        }
    }

    let mut walk = Walk {
        depth,
        explicit_depth: tree.depth,
        base,
        tails: &tails,
        out: Vec::new(),
    };
    walk.collect(&tree.root, 0, &mut Vec::new());
    Ok(FrequencySet::new(base, walk.out).expect("validated base"))
}

/// Verdict for one digit prefix of the exactness check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrefixStatus {
    /// Window large enough and the branching count equals `p^|T|`.
    Exact,
    /// Window large enough but the count falls short of `p^|T|`.
    Deficient,
    /// The count exceeds `p^|T|`; impossible for orthogonal input.
    ExceedsBound,
    /// Window too small to force the bound at this prefix.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactnessRecord {
    pub prefix: Vec<u32>,
    pub count: usize,
    pub expected: u64,
    pub status: PrefixStatus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactnessReport {
    records: Vec<ExactnessRecord>,
    window_radius: BigInt,
}

impl ExactnessReport {
    pub fn records(&self) -> &[ExactnessRecord] {
        &self.records
    }

    pub fn window_radius(&self) -> &BigInt {
        &self.window_radius
    }

    pub fn determinate_records(&self) -> impl Iterator<Item = &ExactnessRecord> {
        self.records
            .iter()
            .filter(|r| r.status != PrefixStatus::Indeterminate)
    }

    /// Every determinate prefix branches exactly `p^|T|` ways.
    pub fn all_determinate_exact(&self) -> bool {
        self.determinate_records()
            .all(|r| r.status == PrefixStatus::Exact)
    }
}

/// Check that every populated digit prefix of an orthogonal set containing 0
/// branches exactly `p^|T|` ways, wherever the scan window is large enough to
/// force it. A prefix of length `n` is determinate when `N^(n+1)` is within
/// the window radius (by default the largest magnitude present in the set),
/// so every minimal candidate extension was considered.
pub fn check_branching_exactness(
    system: &CantorSystem,
    set: &FrequencySet,
    depth: u32,
    window_radius: Option<&BigInt>,
) -> Result<ExactnessReport, TreesError> {
    if !set.contains(&BigInt::from(0)) {
        return Err(TreesError::ZeroMissing);
    }
    if let Some((a, b)) = first_non_orthogonal_pair(system, set)? {
        return Err(TreesError::NotOrthogonal { a, b });
    }
    let radius = match window_radius {
        Some(r) => r.clone(),
        None => {
            let lo = set.min().map(|k| -k).unwrap_or_default();
            let hi = set.max().cloned().unwrap_or_default();
            lo.max(hi)
        }
    };
    let expected = system.branching_bound();
    let profile = branching_profile(system, set, depth)?;
    let base = BigInt::from(system.base());
    let records = profile
        .records()
        .iter()
        .map(|record| {
            let window_needed = base.pow(record.prefix.len() as u32 + 1);
            let status = if window_needed > radius {
                PrefixStatus::Indeterminate
            } else if record.count() as u64 == expected {
                PrefixStatus::Exact
            } else if (record.count() as u64) < expected {
                PrefixStatus::Deficient
            } else {
                PrefixStatus::ExceedsBound
            };
            ExactnessRecord {
                prefix: record.prefix.clone(),
                count: record.count(),
                expected,
                status,
            }
        })
        .collect();
    Ok(ExactnessReport {
        records,
        window_radius: radius,
    })
}

#[derive(Serialize, Deserialize)]
struct NodeRepr {
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<u32>,
    children: Vec<NodeRepr>,
}

#[derive(Serialize, Deserialize)]
struct LabelingRepr {
    system: CantorSystem,
    depth: u32,
    default_rule: Vec<u32>,
    root: NodeRepr,
}

impl Serialize for SpectralLabeling {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        fn convert(node: &TreeNode) -> NodeRepr {
            NodeRepr {
                label: node.label,
                children: node.children.iter().map(convert).collect(),
            }
        }
        LabelingRepr {
            system: self.system.clone(),
            depth: self.depth,
            default_rule: self.default_rule.clone(),
            root: convert(&self.root),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SpectralLabeling {
    /// Rebuilds through [`LabelingBuilder`], so structural defects in the
    /// serialized tree surface as deserialization errors.
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = LabelingRepr::deserialize(deserializer)?;
        fn extract<E: serde::de::Error>(
            node: &NodeRepr,
            path: &mut Vec<u32>,
            depth: u32,
            sets: &mut BTreeMap<Vec<u32>, Vec<u32>>,
        ) -> Result<(), E> {
            let level = path.len() as u32;
            if node.children.is_empty() {
                if level != depth {
                    return Err(E::custom(format!(
                        "node at {path:?} stops at level {level}, expected depth {depth}"
                    )));
                }
                return Ok(());
            }
            if level >= depth {
                return Err(E::custom(format!(
                    "node at {path:?} has children beyond the declared depth {depth}"
                )));
            }
            let mut labels = Vec::with_capacity(node.children.len());
            for child in &node.children {
                let label = child
                    .label
                    .ok_or_else(|| E::custom(format!("unlabeled child below {path:?}")))?;
                labels.push(label);
            }
            sets.insert(path.clone(), labels.clone());
            for (child, label) in node.children.iter().zip(labels) {
                path.push(label);
                extract(child, path, depth, sets)?;
                path.pop();
            }
            Ok(())
        }
        let mut sets = BTreeMap::new();
        extract(&repr.root, &mut Vec::new(), repr.depth, &mut sets)?;
        let mut builder =
            LabelingBuilder::new(&repr.system, repr.depth).default_rule(&repr.default_rule);
        for (path, labels) in sets {
            builder = builder.child_set(&path, &labels);
        }
        builder
            .build()
            .map_err(|e| D::Error::custom(format!("malformed labeling: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthogonality::is_orthogonal_family;

    fn base4() -> CantorSystem {
        CantorSystem::new(2, 2, &[0, 2]).unwrap()
    }

    fn base8() -> CantorSystem {
        CantorSystem::new(2, 3, &[0, 2, 4, 6]).unwrap()
    }

    fn big(k: i64) -> BigInt {
        BigInt::from(k)
    }

    /// A hand-picked base-8 labeling independent of the canonical
    /// construction: root children {0,2,5,7}, two level-2 nodes pinned too.
    fn pinned_labeling_base8() -> SpectralLabeling {
        LabelingBuilder::new(&base8(), 3)
            .child_set(&[], &[0, 2, 5, 7])
            .child_set(&[0], &[0, 3, 5, 6])
            .child_set(&[2], &[0, 1, 6, 7])
            .child_set(&[5], &[1, 2, 3, 4])
            .child_set(&[7], &[0, 1, 3, 6])
            .child_set(&[0, 5], &[2, 4, 5, 7])
            .child_set(&[5, 2], &[1, 4, 6, 7])
            .build()
            .unwrap()
    }

    #[test]
    fn canonical_labeling_base4_uses_smallest_zero_set() {
        let tree = canonical_labeling(&base4(), 2).unwrap();
        assert_eq!(tree.default_rule(), &[0, 1]);
        for (_, labels) in tree.child_label_sets() {
            assert_eq!(labels, vec![0, 1]);
        }
        assert!(validate_labeling(&tree).is_valid());
    }

    #[test]
    fn canonical_labeling_base8_root_children() {
        let tree = canonical_labeling(&base8(), 1).unwrap();
        assert_eq!(tree.child_labels(&[]).unwrap(), vec![0, 1, 2, 3]);
        assert!(validate_labeling(&tree).is_valid());
    }

    #[test]
    fn canonical_labeling_base3_unique_set() {
        let system = CantorSystem::new(3, 1, &[0, 1, 2]).unwrap();
        let tree = canonical_labeling(&system, 2).unwrap();
        for (_, labels) in tree.child_label_sets() {
            assert_eq!(labels, vec![0, 1, 2]);
        }
    }

    #[test]
    fn canonical_labeling_requires_cyclotomic_product() {
        let system = CantorSystem::new(2, 2, &[0, 3]).unwrap();
        assert_eq!(
            canonical_labeling(&system, 2).unwrap_err(),
            TreesError::UnsupportedSystem
        );
        assert_eq!(
            canonical_labeling(&base4(), 0).unwrap_err(),
            TreesError::InvalidDepth
        );
    }

    #[test]
    fn pinned_labeling_is_valid_and_encodes_expected_elements() {
        let tree = pinned_labeling_base8();
        assert!(validate_labeling(&tree).is_valid());
        let lambda = lambda_of_labeling(&tree, 3).unwrap();
        // 405 = 5 + 2*8 + 6*64 and 296 = 0 + 5*8 + 4*64
        assert!(lambda.contains(&big(405)));
        assert!(lambda.contains(&big(296)));
        assert!(lambda.contains(&big(0)));
        assert!(is_orthogonal_family(&base8(), &lambda).unwrap());
    }

    #[test]
    fn invalid_child_set_is_reported_with_its_path() {
        let tree = LabelingBuilder::new(&base8(), 2)
            .child_set(&[0], &[0, 2, 4, 6])
            .build()
            .unwrap();
        let report = validate_labeling(&tree);
        assert!(!report.is_valid());
        let violation = report.first_violation().unwrap();
        assert_eq!(violation.condition, SpectralCondition::HadamardChildren);
        assert_eq!(violation.path, vec![0]);
    }

    #[test]
    fn missing_zero_path_is_reported() {
        let tree = LabelingBuilder::new(&base4(), 2)
            .child_set(&[], &[1, 2])
            .build()
            .unwrap();
        let report = validate_labeling(&tree);
        assert!(!report.is_valid());
        assert_eq!(
            report.first_violation().unwrap().condition,
            SpectralCondition::ZeroPath
        );
    }

    #[test]
    fn non_hadamard_default_rule_is_reported() {
        let tree = LabelingBuilder::new(&base4(), 1)
            .default_rule(&[0, 2])
            .build()
            .unwrap();
        let report = validate_labeling(&tree);
        assert!(report
            .violations()
            .iter()
            .any(|v| v.condition == SpectralCondition::StabilizingTail));
    }

    #[test]
    fn builder_rejects_structural_defects() {
        assert!(matches!(
            LabelingBuilder::new(&base4(), 1)
                .child_set(&[], &[0])
                .build(),
            Err(TreesError::MalformedTree(_))
        ));
        assert!(matches!(
            LabelingBuilder::new(&base4(), 1)
                .child_set(&[], &[0, 4])
                .build(),
            Err(TreesError::MalformedTree(_))
        ));
        assert!(matches!(
            LabelingBuilder::new(&base4(), 1)
                .child_set(&[], &[1, 1])
                .build(),
            Err(TreesError::MalformedTree(_))
        ));
        assert!(matches!(
            LabelingBuilder::new(&base4(), 1)
                .default_rule(&[1, 2])
                .build(),
            Err(TreesError::MalformedTree(_))
        ));
        // child set for a node that the chosen labels never create
        assert!(matches!(
            LabelingBuilder::new(&base4(), 2)
                .child_set(&[3, 1], &[0, 1])
                .build(),
            Err(TreesError::MalformedTree(_))
        ));
        assert_eq!(
            LabelingBuilder::new(&base4(), 0).build().unwrap_err(),
            TreesError::InvalidDepth
        );
    }

    #[test]
    fn enumerate_base4_depth1() {
        let trees = enumerate_labelings(&base4(), 1, 10).unwrap();
        assert_eq!(trees.len(), 2);
        assert_eq!(trees[0].child_labels(&[]).unwrap(), vec![0, 1]);
        assert_eq!(trees[1].child_labels(&[]).unwrap(), vec![0, 3]);
    }

    #[test]
    fn enumerate_base4_depth2_count_16() {
        let trees = enumerate_labelings(&base4(), 2, 1000).unwrap();
        // 2 root choices x 2 for the zero-path child x 4 for its sibling
        assert_eq!(trees.len(), 16);
        assert_eq!(count_labelings(&base4(), 2).unwrap(), Some(16));
        for tree in &trees {
            assert!(validate_labeling(tree).is_valid());
        }
        // all distinct
        for i in 0..trees.len() {
            for j in i + 1..trees.len() {
                assert_ne!(trees[i], trees[j]);
            }
        }
    }

    #[test]
    fn enumerate_base8_depth1_count_8() {
        let trees = enumerate_labelings(&base8(), 1, 100).unwrap();
        assert_eq!(trees.len(), 8);
        for tree in &trees {
            assert!(tree.child_labels(&[]).unwrap().contains(&0));
        }
    }

    #[test]
    fn enumeration_respects_limit_and_rejects_zero() {
        let trees = enumerate_labelings(&base4(), 2, 5).unwrap();
        assert_eq!(trees.len(), 5);
        assert_eq!(
            enumerate_labelings(&base4(), 2, 0).unwrap_err(),
            TreesError::ZeroLimit
        );
    }

    #[test]
    fn indexed_access_matches_enumeration_order() {
        let trees = enumerate_labelings(&base4(), 2, 16).unwrap();
        for (i, tree) in trees.iter().enumerate() {
            assert_eq!(&labeling_at_index(&base4(), 2, i as u64).unwrap(), tree);
        }
        assert_eq!(
            labeling_at_index(&base4(), 2, 16).unwrap_err(),
            TreesError::IndexOutOfRange {
                index: 16,
                total: 16
            }
        );
        // index 0 is the canonical labeling
        assert_eq!(
            labeling_at_index(&base4(), 3, 0).unwrap(),
            canonical_labeling(&base4(), 3).unwrap()
        );
    }

    #[test]
    fn lambda_of_canonical_base4_depth3() {
        let tree = canonical_labeling(&base4(), 3).unwrap();
        let lambda = lambda_of_labeling(&tree, 3).unwrap();
        let elements: Vec<BigInt> = lambda.iter().cloned().collect();
        let expected: Vec<BigInt> = [0i64, 1, 4, 5, 16, 17, 20, 21]
            .iter()
            .map(|&k| big(k))
            .collect();
        assert_eq!(elements, expected);
        assert!(is_orthogonal_family(&base4(), &lambda).unwrap());
    }

    #[test]
    fn lambda_truncation_requires_explicit_paths() {
        // At depth 2 of the pinned tree, node [5,2] has no 0 child, so
        // 5 + 2*8 = 21 does not stabilize inside the tree.
        let tree = pinned_labeling_base8();
        let lambda = lambda_of_labeling(&tree, 2).unwrap();
        assert!(!lambda.contains(&big(21)));
        // but [0,5] is extendable? its children {2,4,5,7} have no 0 either
        assert!(!lambda.contains(&big(40)));
        // 0 always stabilizes along the zero path
        assert!(lambda.contains(&big(0)));
        assert_eq!(
            lambda_of_labeling(&tree, 4).unwrap_err(),
            TreesError::DepthExceedsTree {
                requested: 4,
                depth: 3
            }
        );
    }

    #[test]
    fn lambda_includes_negative_elements_when_rule_allows() {
        // default rule {0,3} contains N-1 = 3, so all-3 tails stabilize
        let tree = LabelingBuilder::new(&base4(), 2)
            .default_rule(&[0, 3])
            .build()
            .unwrap();
        assert!(validate_labeling(&tree).is_valid());
        let lambda = lambda_of_labeling(&tree, 2).unwrap();
        // path (3,3) with all-3 tail is -1; path (0,3) with all-3 tail is -16+12 = -4
        assert!(lambda.contains(&big(-1)));
        assert!(lambda.contains(&big(-4)));
        assert!(is_orthogonal_family(&base4(), &lambda).unwrap());
    }

    #[test]
    fn round_trip_labels_from_lambda() {
        for tree in [
            canonical_labeling(&base8(), 2).unwrap(),
            pinned_labeling_base8(),
        ] {
            let depth = tree.depth();
            let lambda = lambda_of_labeling(&tree, depth).unwrap();
            let profile = branching_profile(tree.system(), &lambda, depth).unwrap();
            for (path, labels) in tree.child_label_sets() {
                let record = profile.record_for(&path).unwrap();
                let observed: Vec<u32> = record.digits.iter().copied().collect();
                assert_eq!(observed, labels, "node {path:?}");
            }
        }
    }

    #[test]
    fn exactness_check_on_greedy_output() {
        let system = base4();
        let seed = FrequencySet::from_i64s(4, [0]).unwrap();
        let completed =
            crate::orthogonality::greedy_maximal_completion(&system, &seed, 256).unwrap();
        let radius = big(256);
        let report = check_branching_exactness(&system, &completed, 4, Some(&radius)).unwrap();
        assert!(report.all_determinate_exact());
        assert!(report.determinate_records().count() > 0);
    }

    #[test]
    fn exactness_with_odd_window_radius() {
        // radius 255 just misses N^4 = 256, so length-3 prefixes are
        // indeterminate while everything shorter must branch fully
        let system = base4();
        let seed = FrequencySet::from_i64s(4, [0]).unwrap();
        let completed =
            crate::orthogonality::greedy_maximal_completion(&system, &seed, 255).unwrap();
        let radius = big(255);
        let report = check_branching_exactness(&system, &completed, 3, Some(&radius)).unwrap();
        assert!(report.all_determinate_exact());
        assert!(report
            .determinate_records()
            .all(|r| r.prefix.len() <= 2 && r.count == 2));
    }

    #[test]
    fn exactness_of_truncated_canonical_labeling() {
        // the base-8 canonical labeling truncated at depth 3 covers
        // [0, 512); with the window inferred from the set itself, the
        // determinate prefixes all branch the full 4 ways
        let system = base8();
        let tree = canonical_labeling(&system, 3).unwrap();
        let lambda = lambda_of_labeling(&tree, 3).unwrap();
        let report = check_branching_exactness(&system, &lambda, 3, None).unwrap();
        assert!(report.all_determinate_exact());
        let determinate: Vec<usize> = report
            .determinate_records()
            .map(|r| r.prefix.len())
            .collect();
        assert!(!determinate.is_empty());
        assert!(determinate.iter().all(|&len| len <= 1));
        for record in report.determinate_records() {
            assert_eq!(record.count, 4);
        }
    }

    #[test]
    fn exactness_check_rejects_bad_inputs() {
        let system = base4();
        let no_zero = FrequencySet::from_i64s(4, [1, 4]).unwrap();
        assert_eq!(
            check_branching_exactness(&system, &no_zero, 2, None).unwrap_err(),
            TreesError::ZeroMissing
        );
        let not_orth = FrequencySet::from_i64s(4, [0, 2]).unwrap();
        assert_eq!(
            check_branching_exactness(&system, &not_orth, 2, None).unwrap_err(),
            TreesError::NotOrthogonal {
                a: big(0),
                b: big(2)
            }
        );
        // a singleton gives an indeterminate root at any nonzero radius
        let single = FrequencySet::from_i64s(4, [0]).unwrap();
        let report = check_branching_exactness(&system, &single, 1, None).unwrap();
        assert_eq!(report.records().len(), 1);
        assert_eq!(report.records()[0].status, PrefixStatus::Indeterminate);
    }

    #[test]
    fn json_round_trip_and_schema_shape() {
        let tree = canonical_labeling(&base4(), 2).unwrap();
        let json = serde_json::to_string(&tree).unwrap();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(value.get("system").is_some());
        assert_eq!(value["depth"], 2);
        assert_eq!(value["default_rule"], serde_json::json!([0, 1]));
        assert!(value["root"].get("label").is_none());
        assert_eq!(value["root"]["children"][0]["label"], 0);
        let back: SpectralLabeling = serde_json::from_str(&json).unwrap();
        assert_eq!(back, tree);
    }

    #[test]
    fn deserialization_rejects_structural_damage() {
        let tree = canonical_labeling(&base4(), 2).unwrap();
        let mut value = serde_json::to_value(&tree).unwrap();
        // drop one grandchild: the tree is no longer complete
        value["root"]["children"][0]["children"]
            .as_array_mut()
            .unwrap()
            .pop();
        assert!(serde_json::from_value::<SpectralLabeling>(value).is_err());
    }

    #[test]
    fn dot_export_shape() {
        let tree = canonical_labeling(&base4(), 1).unwrap();
        let dot = tree.to_dot();
        assert!(dot.starts_with("digraph spectral_labeling {"));
        assert!(dot.contains("\"r\" [label=\"∅\"];"));
        assert!(dot.contains("\"r_0\" [label=\"0\"];"));
        assert!(dot.contains("\"r\" -> \"r_0\";"));
        assert!(dot.ends_with("}\n"));
    }
}
