//! Combinatorics of the Duhamel expansion of the quintic hierarchy: collapse
//! maps, signed couplings, the marking of quintic nodes and the
//! unclogged/congested classification.
//!
//! A signed expansion of depth `k` applies, from the innermost level `k`
//! outwards, the couplings `B^±_{μ(2l); 2l, 2l+1}`. Each coupling gathers the
//! factor in slot `μ(2l)` (unprimed for `+`, primed for `−`) together with
//! both sides of slots `2l` and `2l+1` into one quintic node.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Deepest expansion handled by the enumerators.
pub const MAX_DEPTH: usize = 12;

/// `n!! = n (n−2) (n−4) ⋯`, with `0!! = (−1)!! = 1`.
pub fn double_factorial(n: i64) -> u128 {
    let mut acc = 1u128;
    let mut m = n;
    while m > 1 {
        acc *= m as u128;
        m -= 2;
    }
    acc
}

/// `2^{3k−1}`, the board-game bound on the number of reduced terms.
pub fn board_game_bound(k: usize) -> u128 {
    1u128 << (3 * k - 1)
}

/// `μ(2l)` for `l = 1..=k`, with `μ(2) = 1` and `μ(2l) < 2l`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CollapseMap {
    targets: Vec<u8>,
}

impl CollapseMap {
    pub fn new(targets: Vec<u8>) -> Result<Self> {
        if targets.is_empty() || targets.len() > MAX_DEPTH {
            return Err(LabError::param("mu", format!("depth must be in 1..={MAX_DEPTH}")));
        }
        for (i, &t) in targets.iter().enumerate() {
            let even = 2 * (i + 1);
            if t == 0 || t as usize >= even {
                return Err(LabError::param(
                    "mu",
                    format!("mu({even}) = {t} must lie in 1..{even}"),
                ));
            }
        }
        Ok(Self { targets })
    }

    pub fn depth(&self) -> usize {
        self.targets.len()
    }

    /// `μ(2l)`.
    pub fn target(&self, level: usize) -> usize {
        self.targets[level - 1] as usize
    }

    pub fn targets(&self) -> &[u8] {
        &self.targets
    }

    /// Number of maps of depth `k`, `(2k−1)!!`.
    pub fn count(k: usize) -> u128 {
        double_factorial(2 * k as i64 - 1)
    }

    /// The `index`-th map in lexicographic order of `(μ(2), μ(4), …)`.
    pub fn nth(k: usize, mut index: u128) -> Self {
        let mut targets = vec![0u8; k];
        for l in (1..=k).rev() {
            let radix = (2 * l - 1) as u128;
            targets[l - 1] = (index % radix) as u8 + 1;
            index /= radix;
        }
        Self { targets }
    }
}

/// All collapse maps of depth `k`, in lexicographic order.
pub fn enumerate_collapse_maps(k: usize) -> Result<Vec<CollapseMap>> {
    if k == 0 || k > 10 {
        return Err(LabError::param("k", format!("must lie in 1..=10, got {k}")));
    }
    Ok((0..CollapseMap::count(k)).map(|i| CollapseMap::nth(k, i)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SignedExpansion {
    pub collapse: CollapseMap,
    pub signs: Vec<Sign>,
}

impl SignedExpansion {
    pub fn new(collapse: CollapseMap, signs: Vec<Sign>) -> Result<Self> {
        if signs.len() != collapse.depth() {
            return Err(LabError::param(
                "signs",
                format!("expected {} signs, got {}", collapse.depth(), signs.len()),
            ));
        }
        Ok(Self { collapse, signs })
    }

    pub fn depth(&self) -> usize {
        self.collapse.depth()
    }

    /// Signs packed with level 1 in the most significant bit, `+ = 0`.
    fn sign_bits(&self) -> u32 {
        self.signs
            .iter()
            .fold(0, |acc, s| (acc << 1) | (*s == Sign::Minus) as u32)
    }

    fn from_bits(collapse: CollapseMap, bits: u32) -> Self {
        let k = collapse.depth();
        let signs = (1..=k)
            .map(|l| {
                if bits >> (k - l) & 1 == 1 {
                    Sign::Minus
                } else {
                    Sign::Plus
                }
            })
            .collect();
        Self { collapse, signs }
    }
}

/// Content of a factor slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Factor {
    /// A freely propagated one-particle function.
    Bare,
    /// The quintic node created at the given level.
    Node(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    /// No bare child, level-`k` node not below.
    Q,
    /// At least one bare child, level-`k` node not below.
    QPhi,
    /// No bare child, level-`k` node below (or the node itself).
    QR,
    /// At least one bare child and the level-`k` node below.
    QPhiR,
}

impl NodeKind {
    pub fn has_bare(self) -> bool {
        matches!(self, NodeKind::QPhi | NodeKind::QPhiR)
    }

    pub fn carries_innermost(self) -> bool {
        matches!(self, NodeKind::QR | NodeKind::QPhiR)
    }

    pub fn label(self) -> &'static str {
        match self {
            NodeKind::Q => "Q",
            NodeKind::QPhi => "Q_phi",
            NodeKind::QR => "Q_R",
            NodeKind::QPhiR => "Q_phi_R",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Unprimed,
    Primed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuinticNode {
    pub level: usize,
    pub kind: NodeKind,
    pub side: Side,
    /// Slot `μ(2l)` on `side`, then slots `2l, 2l+1` unprimed, then primed.
    pub children: [Factor; 5],
}

impl QuinticNode {
    /// Number of one-particle factors gathered below this node, `2l + 1`.
    pub fn order(&self) -> usize {
        2 * self.level + 1
    }

    pub fn bare_children(&self) -> usize {
        self.children.iter().filter(|c| **c == Factor::Bare).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Marking {
    /// Nodes indexed by level, `nodes[l − 1]`.
    pub nodes: Vec<QuinticNode>,
    /// Final content of slot 1, unprimed then primed.
    pub surviving: [Factor; 2],
}

impl Marking {
    /// Bare factors gathered by the nodes of levels `1..k−1`.
    pub fn bare_in_classified(&self) -> usize {
        let k = self.nodes.len();
        self.nodes[..k - 1].iter().map(QuinticNode::bare_children).sum()
    }

    pub fn bare_surviving(&self) -> usize {
        self.surviving.iter().filter(|f| **f == Factor::Bare).count()
    }
}

/// Runs the coupling process; `visit(level, side, children)` is called from
/// the innermost level outwards. Returns the final content of slot 1.
fn simulate(
    targets: &[u8],
    sign_bits: u32,
    mut visit: impl FnMut(usize, Side, [Factor; 5]),
) -> [Factor; 2] {
    let k = targets.len();
    let mut slots = [[Factor::Bare; 2]; 2 * MAX_DEPTH + 2];
    for l in (1..=k).rev() {
        let side = if sign_bits >> (k - l) & 1 == 1 {
            Side::Primed
        } else {
            Side::Unprimed
        };
        let s = side as usize;
        let target = targets[l - 1] as usize;
        let (a, b) = (2 * l, 2 * l + 1);
        let children = [
            slots[target][s],
            slots[a][0],
            slots[b][0],
            slots[a][1],
            slots[b][1],
        ];
        visit(l, side, children);
        slots[target][s] = Factor::Node(l);
        slots[a] = [Factor::Bare; 2];
        slots[b] = [Factor::Bare; 2];
    }
    slots[1]
}

/// Marks every quintic node of a signed expansion and assigns its kind.
pub fn mark_expansion(e: &SignedExpansion) -> Marking {
    let k = e.depth();
    let mut raw: Vec<Option<(Side, [Factor; 5])>> = vec![None; k];
    let surviving = simulate(e.collapse.targets(), e.sign_bits(), |l, side, ch| {
        raw[l - 1] = Some((side, ch));
    });
    let mut carries = vec![false; k + 1];
    let mut nodes: Vec<Option<QuinticNode>> = vec![None; k];
    for l in (1..=k).rev() {
        let (side, children) = raw[l - 1].expect("every level couples once");
        let has_bare = children.contains(&Factor::Bare);
        let has_r = l == k
            || children
                .iter()
                .any(|c| matches!(c, Factor::Node(m) if carries[*m]));
        carries[l] = has_r;
        let kind = match (has_bare && l != k, has_r) {
            (true, true) => NodeKind::QPhiR,
            (true, false) => NodeKind::QPhi,
            (false, true) => NodeKind::QR,
            (false, false) => NodeKind::Q,
        };
        nodes[l - 1] = Some(QuinticNode {
            level: l,
            kind,
            side,
            children,
        });
    }
    Marking {
        nodes: nodes.into_iter().map(Option::unwrap).collect(),
        surviving,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub unclogged: Vec<usize>,
    pub congested: Vec<usize>,
}

/// Levels `l < k` split by whether their node gathers a bare factor.
pub fn classify_couplings(e: &SignedExpansion) -> Classification {
    let marking = mark_expansion(e);
    let k = e.depth();
    let mut out = Classification::default();
    for node in &marking.nodes[..k - 1] {
        if node.bare_children() > 0 {
            out.unclogged.push(node.level);
        } else {
            out.congested.push(node.level);
        }
    }
    out
}

fn unclogged_count(targets: &[u8], sign_bits: u32) -> u32 {
    let k = targets.len();
    let mut count = 0;
    simulate(targets, sign_bits, |l, _, ch| {
        if l < k && ch.contains(&Factor::Bare) {
            count += 1;
        }
    });
    count
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinUnclogged {
    pub k: usize,
    pub min_count: usize,
    pub witness: SignedExpansion,
    /// `⌈4(k−1)/5⌉`.
    pub lower_bound: usize,
    /// Largest number of congested couplings over all expansions.
    pub max_congested: usize,
    pub expansions_checked: u128,
    /// `4k − 4 ≤ 5(k − 1 − j)` for every observed congested count `j`.
    pub inequality_holds: bool,
}

/// Exhaustive minimum number of unclogged couplings over all signed
/// expansions of depth `k ≤ 7`. The witness is the lexicographically first
/// minimiser.
pub fn min_unclogged(k: usize) -> Result<MinUnclogged> {
    if k == 0 || k > 7 {
        return Err(LabError::param("k", format!("must lie in 1..=7, got {k}")));
    }
    let maps = CollapseMap::count(k) as u64;
    let signs = 1u32 << k;
    let (count, index, sign) = (0..maps)
        .into_par_iter()
        .map(|i| {
            let map = CollapseMap::nth(k, i as u128);
            (0..signs)
                .map(|s| (unclogged_count(map.targets(), s), i, s))
                .min()
                .expect("at least one sign pattern")
        })
        .min()
        .expect("at least one map");
    let witness = SignedExpansion::from_bits(CollapseMap::nth(k, index as u128), sign);
    let max_congested = (k - 1) - count as usize;
    Ok(MinUnclogged {
        k,
        min_count: count as usize,
        witness,
        lower_bound: (4 * (k - 1)).div_ceil(5),
        max_congested,
        expansions_checked: maps as u128 * signs as u128,
        inequality_holds: 4 * k as i64 - 4 <= 5 * (k as i64 - 1 - max_congested as i64),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummandCount {
    /// Terms produced by expanding every interaction operator into its
    /// `2l − 1` targets and two signs.
    pub expanded: u128,
    /// `(2k+1)!! · 2^k`.
    pub shifted_formula: u128,
}

fn expand_from(level: usize, k: usize) -> u128 {
    if level > k {
        return 1;
    }
    let below = expand_from(level + 1, k);
    let mut total = 0;
    for _target in 1..2 * level {
        for _sign in [Sign::Plus, Sign::Minus] {
            total += below;
        }
    }
    total
}

/// Counts the signed summands of the depth-`k` Duhamel iterate.
pub fn raw_summand_count(k: usize) -> Result<SummandCount> {
    if k == 0 || k > MAX_DEPTH {
        return Err(LabError::param("k", format!("must lie in 1..={MAX_DEPTH}, got {k}")));
    }
    Ok(SummandCount {
        expanded: expand_from(1, k),
        shifted_formula: double_factorial(2 * k as i64 + 1) << k,
    })
}

/// Counts the same summands by visiting every leaf of the expansion tree.
pub fn raw_summand_count_by_leaves(k: usize) -> u128 {
    fn walk(level: usize, k: usize) -> u128 {
        if level > k {
            return 1;
        }
        (1..2 * level)
            .flat_map(|_| [Sign::Plus, Sign::Minus])
            .map(|_| walk(level + 1, k))
            .sum()
    }
    walk(1, k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimateId {
    /// Multilinear estimate with frequency localisation, negative regularity.
    Mlfl1,
    /// Multilinear estimate with frequency localisation, positive regularity.
    Mlfl2,
    /// Multilinear estimate without localisation, negative regularity.
    Old1,
    /// Multilinear estimate without localisation, positive regularity.
    Old2,
}

impl EstimateId {
    pub fn is_localized(self) -> bool {
        matches!(self, EstimateId::Mlfl1 | EstimateId::Mlfl2)
    }
}

/// Estimate applied at each level `l < k`, keyed by node kind.
pub fn estimate_schedule(e: &SignedExpansion) -> Vec<(usize, EstimateId)> {
    let marking = mark_expansion(e);
    let k = e.depth();
    marking.nodes[..k - 1]
        .iter()
        .map(|node| {
            let id = match node.kind {
                NodeKind::QPhiR => EstimateId::Mlfl1,
                NodeKind::QPhi => EstimateId::Mlfl2,
                NodeKind::QR => EstimateId::Old1,
                NodeKind::Q => EstimateId::Old2,
            };
            (node.level, id)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expansion(targets: &[u8], signs: &[Sign]) -> SignedExpansion {
        SignedExpansion::new(CollapseMap::new(targets.to_vec()).unwrap(), signs.to_vec()).unwrap()
    }

    #[test]
    fn double_factorials() {
        assert_eq!(double_factorial(-1), 1);
        assert_eq!(double_factorial(0), 1);
        assert_eq!(double_factorial(7), 105);
        assert_eq!(double_factorial(8), 384);
    }

    #[test]
    fn collapse_map_validation() {
        assert!(CollapseMap::new(vec![2]).is_err());
        assert!(CollapseMap::new(vec![1, 4]).is_err());
        assert!(CollapseMap::new(vec![1, 3, 5]).is_ok());
    }

    #[test]
    fn small_enumerations() {
        assert_eq!(enumerate_collapse_maps(1).unwrap(), vec![CollapseMap::new(vec![1]).unwrap()]);
        let maps = enumerate_collapse_maps(2).unwrap();
        let seconds: Vec<u8> = maps.iter().map(|m| m.targets()[1]).collect();
        assert_eq!(seconds, vec![1, 2, 3]);
    }

    #[test]
    fn worked_example_marking() {
        use Sign::*;
        let e = expansion(&[1, 2, 3], &[Plus, Minus, Plus]);
        let m = mark_expansion(&e);
        assert_eq!(m.nodes[2].kind, NodeKind::QR);
        assert_eq!(m.nodes[2].order(), 7);
        assert_eq!(m.nodes[1].kind, NodeKind::QPhi);
        assert_eq!(m.nodes[1].side, Side::Primed);
        assert_eq!(m.nodes[0].kind, NodeKind::QPhiR);
        let c = classify_couplings(&e);
        assert_eq!(c.unclogged, vec![1, 2]);
        assert!(c.congested.is_empty());
    }

    #[test]
    fn single_level_is_rough() {
        let e = expansion(&[1], &[Sign::Minus]);
        let m = mark_expansion(&e);
        assert_eq!(m.nodes.len(), 1);
        assert_eq!(m.nodes[0].kind, NodeKind::QR);
        assert_eq!(classify_couplings(&e), Classification::default());
        assert!(estimate_schedule(&e).is_empty());
    }

    #[test]
    fn summand_counts() {
        assert_eq!(raw_summand_count(1).unwrap().expanded, 2);
        assert_eq!(raw_summand_count(1).unwrap().shifted_formula, 6);
        assert_eq!(raw_summand_count(2).unwrap().expanded, 12);
        for k in 1..=6 {
            assert_eq!(raw_summand_count(k).unwrap().expanded, raw_summand_count_by_leaves(k));
        }
    }

    #[test]
    fn nodes_on_slot_one_can_leave_no_bare_survivor() {
        use Sign::*;
        let e = expansion(&[1, 1], &[Plus, Minus]);
        let m = mark_expansion(&e);
        assert_eq!(m.surviving, [Factor::Node(1), Factor::Node(2)]);
        assert_eq!(m.bare_surviving(), 0);
        assert_eq!(m.bare_in_classified(), 5);
    }
}
