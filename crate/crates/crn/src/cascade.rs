//! Birth-Cascade Tree construction, Death-Cascade Trees through network
//! inversion, singular degradability and the assembly of irreducible
//! state-space certificates.

use crate::comm::{
    available_reactions, communication_classes, mask_contains, mask_from_iter, mask_members,
    psi_map, zero_pattern, BlockNet, CommClasses, FreeMask,
};
use crate::linalg::{nonneg_int_combination, restricted_hnf, ConeMembership, Int, LpOutcome, Rat};
use crate::model::Permutation;
use crate::reduce::ReducedNetwork;
use num::{One, Zero};
use std::collections::HashMap;

/// A node `(C, A)` of the birth-cascade tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BctNode {
    /// Sorted indices into the bounded state list.
    pub class_states: Vec<usize>,
    pub a_mask: FreeMask,
    /// Generation at which the node first appeared.
    pub level: usize,
}

/// The birth-cascade tree, deduplicated on `(C, A)` into a DAG.
#[derive(Debug, Clone)]
pub struct Bct {
    pub nodes: Vec<BctNode>,
    pub edges: Vec<(usize, usize)>,
    /// Indices of nodes with an empty birth operator.
    pub leaves: Vec<usize>,
    /// Leaves containing no strictly smaller leaf.
    pub minimal_leaves: Vec<usize>,
}

/// Per-A communication data, cached during tree construction.
struct CommCache<'a> {
    net: &'a BlockNet,
    states: &'a [Vec<i64>],
    by_mask: HashMap<FreeMask, CommClasses>,
}

impl<'a> CommCache<'a> {
    fn new(net: &'a BlockNet, states: &'a [Vec<i64>]) -> Self {
        CommCache { net, states, by_mask: HashMap::new() }
    }

    fn get(&mut self, a: FreeMask) -> &CommClasses {
        self.by_mask.entry(a).or_insert_with(|| {
            let z = zero_pattern(self.net, self.states, a);
            communication_classes(&z, a)
        })
    }
}

/// `K_r(C, A)`: reactions available from some state of `C` that consume no
/// free species outside `A`.
pub fn class_available_reactions(
    net: &BlockNet,
    states: &[Vec<i64>],
    class_states: &[usize],
    a: FreeMask,
) -> Vec<usize> {
    let mut seen = vec![false; net.num_reactions()];
    for &si in class_states {
        for k in available_reactions(net, &states[si], a) {
            seen[k] = true;
        }
    }
    (0..net.num_reactions()).filter(|&k| seen[k]).collect()
}

/// The birth operator `B(C, A)`: free species outside `A` produced by a
/// reaction in `K_r(C, A)`.
pub fn birth_operator(
    net: &BlockNet,
    states: &[Vec<i64>],
    class_states: &[usize],
    a: FreeMask,
) -> FreeMask {
    let mut b: FreeMask = 0;
    for k in class_available_reactions(net, states, class_states, a) {
        for i in 0..net.d_f {
            if !mask_contains(a, i) && net.rho_f[k][i] > 0 {
                b |= 1 << i;
            }
        }
    }
    b
}

/// Constructs the birth-cascade tree per the generation-wise recursion.
pub fn construct_bct(net: &BlockNet, states: &[Vec<i64>]) -> Bct {
    let mut cache = CommCache::new(net, states);
    let mut nodes: Vec<BctNode> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut index: HashMap<(Vec<usize>, FreeMask), usize> = HashMap::new();
    let mut frontier: Vec<usize> = Vec::new();

    let roots: Vec<Vec<usize>> = {
        let cc = cache.get(0);
        cc.closed_classes().iter().map(|&c| cc.classes[c].clone()).collect()
    };
    for class_states in roots {
        let id = nodes.len();
        index.insert((class_states.clone(), 0), id);
        nodes.push(BctNode { class_states, a_mask: 0, level: 0 });
        frontier.push(id);
    }

    let mut level = 0usize;
    while !frontier.is_empty() {
        level += 1;
        let mut next = Vec::new();
        for &nid in &frontier {
            let (class_states, a) = (nodes[nid].class_states.clone(), nodes[nid].a_mask);
            let b = birth_operator(net, states, &class_states, a);
            if b == 0 {
                continue;
            }
            let a2 = a | b;
            let children: Vec<Vec<usize>> = {
                let comm2 = cache.get(a2);
                psi_map(&class_states, a, a2, comm2)
                    .expect("A grows monotonically")
                    .iter()
                    .map(|&c| comm2.classes[c].clone())
                    .collect()
            };
            for child_states in children {
                let key = (child_states.clone(), a2);
                let child_id = match index.get(&key) {
                    Some(&id) => id,
                    None => {
                        let id = nodes.len();
                        index.insert(key, id);
                        nodes.push(BctNode { class_states: child_states, a_mask: a2, level });
                        next.push(id);
                        id
                    }
                };
                edges.push((nid, child_id));
            }
        }
        frontier = next;
    }

    let leaves: Vec<usize> = (0..nodes.len())
        .filter(|&i| birth_operator(net, states, &nodes[i].class_states, nodes[i].a_mask) == 0)
        .collect();
    let minimal_leaves = minimal_leaves_of(&nodes, &leaves);
    Bct { nodes, edges, leaves, minimal_leaves }
}

/// A leaf is minimal when no other leaf is strictly contained in it.
fn minimal_leaves_of(nodes: &[BctNode], leaves: &[usize]) -> Vec<usize> {
    leaves
        .iter()
        .copied()
        .filter(|&l| {
            !leaves.iter().any(|&other| {
                other != l && contained_in(&nodes[other], &nodes[l])
            })
        })
        .collect()
}

/// `(C', A')` contained in `(C, A)`: `C' subset C` and `A' subset A`.
fn contained_in(small: &BctNode, big: &BctNode) -> bool {
    small.a_mask & !big.a_mask == 0
        && small.class_states.iter().all(|s| big.class_states.binary_search(s).is_ok())
        && (small.class_states != big.class_states || small.a_mask != big.a_mask)
}

pub fn minimal_leaves(bct: &Bct) -> Vec<usize> {
    bct.minimal_leaves.clone()
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CascadeError {
    #[error("node is not a leaf of the BCT")]
    NotALeaf,
    #[error("the cascade tree is not a single path")]
    NotASinglePath,
}

/// The restriction of a network to a leaf `(C, A)`: free species limited to
/// `A`, reactions limited to `K_r(C, A)`, bounded states replaced by `C`.
pub struct RestrictedNet {
    pub net: BlockNet,
    pub states: Vec<Vec<i64>>,
    /// Free addresses of the parent network kept here, in order.
    pub kept_free: Vec<usize>,
    pub kept_reactions: Vec<usize>,
}

pub fn restrict_network(
    net: &BlockNet,
    states: &[Vec<i64>],
    class_states: &[usize],
    a: FreeMask,
) -> Result<RestrictedNet, CascadeError> {
    if birth_operator(net, states, class_states, a) != 0 {
        return Err(CascadeError::NotALeaf);
    }
    let kept_reactions = class_available_reactions(net, states, class_states, a);
    let kept_free = mask_members(a, net.d_f);
    let restricted = net.restrict(&kept_reactions, &kept_free);
    let c_states: Vec<Vec<i64>> = class_states.iter().map(|&s| states[s].clone()).collect();
    Ok(RestrictedNet { net: restricted, states: c_states, kept_free, kept_reactions })
}

/// Death-exhaustiveness of a leaf: the BCT of the inverse restricted
/// network (the DCT) must have a leaf whose free set is all of `A`.
pub fn death_exhaustive(
    net: &BlockNet,
    states: &[Vec<i64>],
    leaf: &BctNode,
) -> Result<bool, CascadeError> {
    let restricted = restrict_network(net, states, &leaf.class_states, leaf.a_mask)?;
    let dct = construct_bct(&restricted.net.inverse(), &restricted.states);
    let full: FreeMask = if restricted.net.d_f == 0 { 0 } else { (1u128 << restricted.net.d_f) - 1 };
    Ok(dct.leaves.iter().any(|&l| dct.nodes[l].a_mask == full))
}

/// Per-species singular-degradability verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SdVerdict {
    Yes { coefficients: Vec<u64> },
    No,
    Undecided { reason: String },
}

impl SdVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, SdVerdict::Yes { .. })
    }
}

/// Computes the singularly-degradable set w.r.t. `A`: reactions that avoid
/// bounded species and produce only inside `A` give the admissible columns;
/// free species `i` qualifies when `-e_i` is a nonnegative-integer column
/// combination. A restricted-Hermite-form scan certifies the easy cases
/// before the exact decision procedure runs.
pub fn singularly_degradable_set(net: &BlockNet, a: FreeMask, coeff_cap: u64) -> Vec<SdVerdict> {
    let k_p: Vec<usize> = (0..net.num_reactions())
        .filter(|&k| net.avoids_bounded(k) && net.produces_within(k, a))
        .collect();
    let columns: Vec<Vec<Int>> = k_p
        .iter()
        .map(|&k| net.zeta_f(k).iter().map(|&v| Int::from(v)).collect())
        .collect();
    degradability_verdicts(net.d_f, &columns, &k_p, coeff_cap)
}

fn degradability_verdicts(
    d_f: usize,
    columns: &[Vec<Int>],
    reaction_ids: &[usize],
    coeff_cap: u64,
) -> Vec<SdVerdict> {
    let _ = reaction_ids;
    // Fast path: the restricted Hermite form of the transposed negated
    // column matrix; a surviving row equal to e_i certifies species i.
    let rows: Vec<Vec<Int>> = columns.iter().map(|c| c.iter().map(|v| -v.clone()).collect()).collect();
    let hnf = restricted_hnf(&rows);
    let exact_units: Vec<usize> = (0..d_f)
        .filter(|&i| {
            hnf.iter().any(|r| {
                r.iter().enumerate().all(|(j, v)| if j == i { v.is_one() } else { v.is_zero() })
            })
        })
        .collect();
    (0..d_f)
        .map(|i| {
            let mut target = vec![Int::zero(); d_f];
            target[i] = -Int::one();
            if exact_units.contains(&i) {
                if let Some(j) = columns.iter().position(|c| c[..] == target[..]) {
                    let mut coeffs = vec![0; columns.len()];
                    coeffs[j] = 1;
                    return SdVerdict::Yes { coefficients: coeffs };
                }
            }
            match nonneg_int_combination(columns, &target, coeff_cap) {
                ConeMembership::Yes { coefficients } => SdVerdict::Yes { coefficients },
                ConeMembership::No => SdVerdict::No,
                ConeMembership::Undecided { reason } => SdVerdict::Undecided { reason },
            }
        })
        .collect()
}

/// Drainability of a free species outside `A`: one net molecule must be
/// removable by reactions that avoid bounded species entirely, allowing
/// transient excursions through other out-of-`A` species. Decided by an
/// exact rational cone test (for `No`) plus a bounded reachability search
/// over the out-of-`A` coordinates (for `Yes`).
pub fn drainable_outside(net: &BlockNet, a: FreeMask, i: usize, coord_cap: i64) -> SdVerdict {
    debug_assert!(!mask_contains(a, i));
    let out: Vec<usize> = (0..net.d_f).filter(|&j| !mask_contains(a, j)).collect();
    let pos_of: HashMap<usize, usize> = out.iter().enumerate().map(|(p, &j)| (j, p)).collect();
    let k_hat: Vec<usize> = (0..net.num_reactions()).filter(|&k| net.avoids_bounded(k)).collect();
    // Rational cone over the out-of-A rows: infeasibility is a sound No.
    let columns: Vec<Vec<Rat>> = k_hat
        .iter()
        .map(|&k| {
            let zf = net.zeta_f(k);
            out.iter().map(|&j| Rat::from_integer(Int::from(zf[j]))).collect()
        })
        .collect();
    let mut target = vec![Rat::zero(); out.len()];
    target[pos_of[&i]] = -Rat::one();
    let eqs: Vec<(Vec<Rat>, Rat)> = (0..out.len())
        .map(|r| (columns.iter().map(|c| c[r].clone()).collect(), target[r].clone()))
        .collect();
    let nonneg: Vec<(Vec<Rat>, Rat)> = (0..columns.len())
        .map(|j| {
            let mut row = vec![Rat::zero(); columns.len()];
            row[j] = Rat::one();
            (row, Rat::zero())
        })
        .collect();
    if columns.is_empty()
        || crate::linalg::lp_min(&vec![Rat::zero(); columns.len()], &eqs, &nonneg) == LpOutcome::Infeasible
    {
        return SdVerdict::No;
    }
    // Reachability of the zero vector from e_i over the out-of-A block;
    // in-A species are treated as an unlimited buffer.
    let start: Vec<i64> = out.iter().map(|&j| if j == i { 1 } else { 0 }).collect();
    let goal = vec![0i64; out.len()];
    let mut seen: std::collections::HashSet<Vec<i64>> = std::collections::HashSet::new();
    let mut queue = std::collections::VecDeque::new();
    seen.insert(start.clone());
    queue.push_back(start);
    let budget = 100_000usize;
    while let Some(cur) = queue.pop_front() {
        if cur == goal {
            return SdVerdict::Yes { coefficients: Vec::new() };
        }
        if seen.len() > budget {
            break;
        }
        for &k in &k_hat {
            let feasible = out.iter().enumerate().all(|(p, &j)| cur[p] >= net.nu_f[k][j]);
            if !feasible {
                continue;
            }
            let next: Vec<i64> = out
                .iter()
                .enumerate()
                .map(|(p, &j)| cur[p] - net.nu_f[k][j] + net.rho_f[k][j])
                .collect();
            if next.iter().any(|&v| v > coord_cap) {
                continue;
            }
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    SdVerdict::Undecided { reason: "drain search exhausted its box".into() }
}

/// The permutation `sigma_3(A)` over the reduced coordinates: identity on
/// the bounded block; free species addressed by `A` move ahead of the
/// rest, both blocks in stable order.
pub fn sigma3(a: FreeMask, d_b: usize, d_f: usize) -> Permutation {
    let mut image: Vec<usize> = (0..d_b).collect();
    image.extend((0..d_f).filter(|&i| mask_contains(a, i)).map(|i| d_b + i));
    image.extend((0..d_f).filter(|&i| !mask_contains(a, i)).map(|i| d_b + i));
    Permutation::new(image)
}

/// An irreducible state-space certificate `C x N0^|A| x {0}`.
#[derive(Debug, Clone)]
pub struct IrreducibleCertificate {
    /// Sorted indices into the bounded state list.
    pub class_states: Vec<usize>,
    pub a_mask: FreeMask,
    /// Permutation of the reduced coordinates placing `A` first.
    pub sigma3: Permutation,
    /// All free species drain, so the certificate is the only irreducible
    /// state-space meeting `C x N0^{d_f}`.
    pub unique_in_slab: bool,
}

/// Why certification or completeness failed for some leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Obstruction {
    NonMinimalLeaf { leaf: usize },
    NotDeathExhaustive { leaf: usize },
    NotSingularlyDegradable { leaf: usize, free_address: usize },
    DegradabilityUndecided { leaf: usize, free_address: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Completeness {
    Complete,
    Partial,
}

/// Everything the certification pass produces.
#[derive(Debug, Clone)]
pub struct CascadeOutcome {
    pub bct: Bct,
    pub certificates: Vec<IrreducibleCertificate>,
    pub completeness: Completeness,
    pub obstructions: Vec<Obstruction>,
}

#[derive(Debug, Clone)]
pub struct CascadeOptions {
    pub coeff_cap: u64,
    pub drain_coord_cap: i64,
}

impl Default for CascadeOptions {
    fn default() -> Self {
        CascadeOptions { coeff_cap: 64, drain_coord_cap: 16 }
    }
}

/// Runs the full certification: BCT, minimal leaves, death-exhaustiveness,
/// singular degradability, certificates and the completeness verdict.
pub fn find_irreducible(
    net: &BlockNet,
    states: &[Vec<i64>],
    opts: &CascadeOptions,
) -> CascadeOutcome {
    let bct = construct_bct(net, states);
    let mut obstructions = Vec::new();
    for &l in &bct.leaves {
        if !bct.minimal_leaves.contains(&l) {
            obstructions.push(Obstruction::NonMinimalLeaf { leaf: l });
        }
    }
    let mut certificates = Vec::new();
    let mut all_unique = true;
    let mut all_certified = true;
    for &l in &bct.minimal_leaves {
        let leaf = &bct.nodes[l];
        let de = death_exhaustive(net, states, leaf).expect("minimal leaves are leaves");
        if !de {
            obstructions.push(Obstruction::NotDeathExhaustive { leaf: l });
            all_certified = false;
            all_unique = false;
            continue;
        }
        let sd = singularly_degradable_set(net, leaf.a_mask, opts.coeff_cap);
        let mut in_a_ok = true;
        for i in mask_members(leaf.a_mask, net.d_f) {
            match &sd[i] {
                SdVerdict::Yes { .. } => {}
                SdVerdict::No => {
                    in_a_ok = false;
                    obstructions.push(Obstruction::NotSingularlyDegradable { leaf: l, free_address: i });
                }
                SdVerdict::Undecided { reason } => {
                    in_a_ok = false;
                    obstructions.push(Obstruction::DegradabilityUndecided {
                        leaf: l,
                        free_address: i,
                        reason: reason.clone(),
                    });
                }
            }
        }
        if !in_a_ok {
            all_certified = false;
            all_unique = false;
            continue;
        }
        // Species outside A: the narrow test first; else the drain search,
        // which allows transient excursions outside A.
        let mut outside_ok = true;
        for i in (0..net.d_f).filter(|&i| !mask_contains(leaf.a_mask, i)) {
            let verdict = if sd[i].is_yes() {
                sd[i].clone()
            } else {
                drainable_outside(net, leaf.a_mask, i, opts.drain_coord_cap)
            };
            match verdict {
                SdVerdict::Yes { .. } => {}
                SdVerdict::No => {
                    outside_ok = false;
                    obstructions.push(Obstruction::NotSingularlyDegradable { leaf: l, free_address: i });
                }
                SdVerdict::Undecided { reason } => {
                    outside_ok = false;
                    obstructions.push(Obstruction::DegradabilityUndecided {
                        leaf: l,
                        free_address: i,
                        reason,
                    });
                }
            }
        }
        certificates.push(IrreducibleCertificate {
            class_states: leaf.class_states.clone(),
            a_mask: leaf.a_mask,
            sigma3: sigma3(leaf.a_mask, net.d_b, net.d_f),
            unique_in_slab: outside_ok,
        });
        all_unique &= outside_ok;
    }
    let leaves_all_minimal = bct.leaves.len() == bct.minimal_leaves.len();
    let completeness = if leaves_all_minimal && all_certified && all_unique && !bct.minimal_leaves.is_empty()
    {
        Completeness::Complete
    } else {
        Completeness::Partial
    };
    CascadeOutcome { bct, certificates, completeness, obstructions }
}

/// Ordered birth and death cascade levels when both trees are single paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CascadeLevels {
    /// Cumulative sets `G_1 subset ... subset G_lb` of free addresses.
    pub birth: Vec<Vec<usize>>,
    /// Cumulative death cascades, in parent free addresses.
    pub death: Vec<Vec<usize>>,
    /// Whether every birth-cascade species also arranged into death
    /// cascades.
    pub b_equals_x: bool,
}

/// Emits the cascade levels for a single-path BCT and its DCT.
pub fn cascade_report(
    net: &BlockNet,
    states: &[Vec<i64>],
    bct: &Bct,
) -> Result<CascadeLevels, CascadeError> {
    let mut level_counts: HashMap<usize, usize> = HashMap::new();
    for n in &bct.nodes {
        *level_counts.entry(n.level).or_default() += 1;
    }
    if level_counts.values().any(|&v| v > 1) || bct.leaves.len() != 1 {
        return Err(CascadeError::NotASinglePath);
    }
    let mut path: Vec<&BctNode> = bct.nodes.iter().collect();
    path.sort_by_key(|n| n.level);
    let birth: Vec<Vec<usize>> = path
        .iter()
        .skip(1)
        .map(|n| mask_members(n.a_mask, net.d_f))
        .collect();
    let leaf = path.last().expect("tree has a root");
    let restricted = restrict_network(net, states, &leaf.class_states, leaf.a_mask)?;
    let dct = construct_bct(&restricted.net.inverse(), &restricted.states);
    let mut dct_path: Vec<&BctNode> = dct.nodes.iter().collect();
    let mut dct_levels: HashMap<usize, usize> = HashMap::new();
    for n in &dct.nodes {
        *dct_levels.entry(n.level).or_default() += 1;
    }
    if dct_levels.values().any(|&v| v > 1) || dct.leaves.len() != 1 {
        return Err(CascadeError::NotASinglePath);
    }
    dct_path.sort_by_key(|n| n.level);
    let death: Vec<Vec<usize>> = dct_path
        .iter()
        .skip(1)
        .map(|n| {
            mask_members(n.a_mask, restricted.net.d_f)
                .into_iter()
                .map(|i| restricted.kept_free[i])
                .collect()
        })
        .collect();
    let x_terminal: FreeMask = death
        .last()
        .map(|levels| mask_from_iter(levels.iter().copied()))
        .unwrap_or(0);
    let b_terminal = leaf.a_mask;
    Ok(CascadeLevels { birth, death, b_equals_x: x_terminal == b_terminal })
}

impl ReducedNetwork {
    /// The supports-only view used by the cascade machinery.
    pub fn block_net(&self) -> BlockNet {
        BlockNet::from_network(&self.base, self.d_b)
    }
}
