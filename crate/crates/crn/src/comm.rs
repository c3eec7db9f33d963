//! Communication structure over a finite bounded-species state set,
//! parametrized by a subset `A` of free species: available reactions,
//! zero-pattern matrix, reachability, communication classes and the map
//! between class sets for growing `A`.

use std::collections::HashMap;

/// Subset of the free-species addresses `{0..d_f-1}` as a bitmask.
pub type FreeMask = u128;

pub fn mask_contains(mask: FreeMask, i: usize) -> bool {
    mask & (1u128 << i) != 0
}

pub fn mask_from_iter(it: impl IntoIterator<Item = usize>) -> FreeMask {
    it.into_iter().fold(0, |m, i| m | (1u128 << i))
}

pub fn mask_members(mask: FreeMask, d_f: usize) -> Vec<usize> {
    (0..d_f).filter(|&i| mask_contains(mask, i)).collect()
}

/// Reactant/product columns of a network split into the bounded block and
/// the free block. Cascade analysis only needs these supports.
#[derive(Debug, Clone)]
pub struct BlockNet {
    pub d_b: usize,
    pub d_f: usize,
    /// Per reaction: bounded-block reactant column.
    pub nu_b: Vec<Vec<i64>>,
    pub rho_b: Vec<Vec<i64>>,
    pub nu_f: Vec<Vec<i64>>,
    pub rho_f: Vec<Vec<i64>>,
}

impl BlockNet {
    pub fn from_network(net: &crate::model::ReactionNetwork, d_b: usize) -> Self {
        let d = net.num_species();
        let d_f = d - d_b;
        assert!(d_f <= 128, "free-species mask is limited to 128 bits");
        let k = net.num_reactions();
        let mut nu_b = Vec::with_capacity(k);
        let mut rho_b = Vec::with_capacity(k);
        let mut nu_f = Vec::with_capacity(k);
        let mut rho_f = Vec::with_capacity(k);
        for kk in 0..k {
            nu_b.push((0..d_b).map(|i| net.reactant[i][kk]).collect());
            rho_b.push((0..d_b).map(|i| net.product[i][kk]).collect());
            nu_f.push((d_b..d).map(|i| net.reactant[i][kk]).collect());
            rho_f.push((d_b..d).map(|i| net.product[i][kk]).collect());
        }
        BlockNet { d_b, d_f, nu_b, rho_b, nu_f, rho_f }
    }

    pub fn num_reactions(&self) -> usize {
        self.nu_b.len()
    }

    /// The inverse network view: reactants and products swapped.
    pub fn inverse(&self) -> BlockNet {
        BlockNet {
            d_b: self.d_b,
            d_f: self.d_f,
            nu_b: self.rho_b.clone(),
            rho_b: self.nu_b.clone(),
            nu_f: self.rho_f.clone(),
            rho_f: self.nu_f.clone(),
        }
    }

    /// Keeps only `reactions` and the free species listed in `keep_free`
    /// (re-indexed in the given order).
    pub fn restrict(&self, reactions: &[usize], keep_free: &[usize]) -> BlockNet {
        BlockNet {
            d_b: self.d_b,
            d_f: keep_free.len(),
            nu_b: reactions.iter().map(|&k| self.nu_b[k].clone()).collect(),
            rho_b: reactions.iter().map(|&k| self.rho_b[k].clone()).collect(),
            nu_f: reactions
                .iter()
                .map(|&k| keep_free.iter().map(|&i| self.nu_f[k][i]).collect())
                .collect(),
            rho_f: reactions
                .iter()
                .map(|&k| keep_free.iter().map(|&i| self.rho_f[k][i]).collect())
                .collect(),
        }
    }

    /// Bounded-block stoichiometry column of reaction `k`.
    pub fn zeta_b(&self, k: usize) -> Vec<i64> {
        (0..self.d_b).map(|i| self.rho_b[k][i] - self.nu_b[k][i]).collect()
    }

    /// Free-block stoichiometry column of reaction `k`.
    pub fn zeta_f(&self, k: usize) -> Vec<i64> {
        (0..self.d_f).map(|i| self.rho_f[k][i] - self.nu_f[k][i]).collect()
    }

    /// True when reaction `k` consumes no free species outside `a`.
    pub fn consumes_within(&self, k: usize, a: FreeMask) -> bool {
        (0..self.d_f).all(|i| self.nu_f[k][i] == 0 || mask_contains(a, i))
    }

    /// True when reaction `k` produces no free species outside `a`.
    pub fn produces_within(&self, k: usize, a: FreeMask) -> bool {
        (0..self.d_f).all(|i| self.rho_f[k][i] == 0 || mask_contains(a, i))
    }

    /// True when reaction `k` neither consumes nor produces bounded species.
    pub fn avoids_bounded(&self, k: usize) -> bool {
        self.nu_b[k].iter().all(|&v| v == 0) && self.rho_b[k].iter().all(|&v| v == 0)
    }
}

/// `K_r(y, A)`: reactions with positive propensity at bounded state `y`
/// that consume no free species outside `A`.
pub fn available_reactions(net: &BlockNet, y: &[i64], a: FreeMask) -> Vec<usize> {
    (0..net.num_reactions())
        .filter(|&k| net.consumes_within(k, a) && (0..net.d_b).all(|i| y[i] >= net.nu_b[k][i]))
        .collect()
}

/// Boolean zero-pattern matrix `Z(A)` over the bounded state set.
pub fn zero_pattern(net: &BlockNet, states: &[Vec<i64>], a: FreeMask) -> Vec<Vec<bool>> {
    let n = states.len();
    let index: HashMap<&[i64], usize> = states.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let mut z = vec![vec![false; n]; n];
    for (i, y) in states.iter().enumerate() {
        for k in available_reactions(net, y, a) {
            let zeta = net.zeta_b(k);
            let target: Vec<i64> = y.iter().zip(&zeta).map(|(a, b)| a + b).collect();
            if let Some(&j) = index.get(target.as_slice()) {
                z[i][j] = true;
            }
        }
    }
    z
}

/// Communication classes of a zero-pattern matrix, with closed flags and
/// the class-level reachability matrix.
#[derive(Debug, Clone)]
pub struct CommClasses {
    pub a_mask: FreeMask,
    /// State index -> class index.
    pub class_of: Vec<usize>,
    /// Classes as sorted state-index sets, numbered by smallest member.
    pub classes: Vec<Vec<usize>>,
    pub closed: Vec<bool>,
    /// Boolean one-step class reachability (diagonal ignored).
    pub reach: Vec<Vec<bool>>,
}

impl CommClasses {
    pub fn closed_classes(&self) -> Vec<usize> {
        (0..self.classes.len()).filter(|&c| self.closed[c]).collect()
    }
}

/// Reflexive-transitive closure of a boolean adjacency matrix, as bitsets.
fn closure(z: &[Vec<bool>]) -> Vec<Vec<u64>> {
    let n = z.len();
    let words = n.div_ceil(64);
    let mut reach: Vec<Vec<u64>> = (0..n)
        .map(|i| {
            let mut row = vec![0u64; words];
            row[i / 64] |= 1 << (i % 64);
            for (j, &e) in z[i].iter().enumerate() {
                if e {
                    row[j / 64] |= 1 << (j % 64);
                }
            }
            row
        })
        .collect();
    // Repeated relaxation; each pass propagates one more hop over rows.
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            let mut row = reach[i].clone();
            for j in 0..n {
                if row[j / 64] & (1 << (j % 64)) != 0 && j != i {
                    let rj = reach[j].clone();
                    for (w, rw) in rj.iter().enumerate() {
                        let before = row[w];
                        row[w] |= rw;
                        if row[w] != before {
                            changed = true;
                        }
                    }
                }
            }
            reach[i] = row;
        }
    }
    reach
}

fn bit(reach: &[Vec<u64>], i: usize, j: usize) -> bool {
    reach[i][j / 64] & (1 << (j % 64)) != 0
}

/// Partitions the states into communication classes via the positivity
/// pattern of the reachability matrix.
pub fn communication_classes(z: &[Vec<bool>], a_mask: FreeMask) -> CommClasses {
    let n = z.len();
    let reach = closure(z);
    let mut class_of = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if class_of[i] != usize::MAX {
            continue;
        }
        let id = classes.len();
        let mut members = Vec::new();
        for j in i..n {
            if class_of[j] == usize::MAX && bit(&reach, i, j) && bit(&reach, j, i) {
                class_of[j] = id;
                members.push(j);
            }
        }
        classes.push(members);
    }
    let mut cc = CommClasses { a_mask, class_of, classes, closed: Vec::new(), reach: Vec::new() };
    class_reachability(&mut cc, z);
    cc
}

/// Fills the class-level reachability matrix `R` and the closed flags:
/// a class is closed iff it has no positive off-diagonal entry in its row.
pub fn class_reachability(cc: &mut CommClasses, z: &[Vec<bool>]) {
    let nc = cc.classes.len();
    let mut reach = vec![vec![false; nc]; nc];
    for (i, row) in z.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            if e {
                reach[cc.class_of[i]][cc.class_of[j]] = true;
            }
        }
    }
    cc.closed = (0..nc)
        .map(|a| (0..nc).all(|b| a == b || !reach[a][b]))
        .collect();
    cc.reach = reach;
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PsiError {
    #[error("A1 is not a subset of A2")]
    NotASubset,
}

/// The map `Psi_(A1,A2)`: closed classes of `Theta(A2)` reached by the
/// closed class `c1_states` of `Theta(A1)`.
pub fn psi_map(
    c1_states: &[usize],
    a1: FreeMask,
    a2: FreeMask,
    comm2: &CommClasses,
) -> Result<Vec<usize>, PsiError> {
    if a1 & !a2 != 0 {
        return Err(PsiError::NotASubset);
    }
    // Monotonicity: every class of Theta(A1) sits inside one class of
    // Theta(A2).
    let enclosing = comm2.class_of[c1_states[0]];
    debug_assert!(c1_states.iter().all(|&s| comm2.class_of[s] == enclosing));
    if comm2.closed[enclosing] {
        return Ok(vec![enclosing]);
    }
    // Transitive closure over the class digraph from the open class.
    let nc = comm2.classes.len();
    let mut seen = vec![false; nc];
    let mut stack = vec![enclosing];
    seen[enclosing] = true;
    while let Some(c) = stack.pop() {
        for c2 in 0..nc {
            if !seen[c2] && comm2.reach[c][c2] {
                seen[c2] = true;
                stack.push(c2);
            }
        }
    }
    Ok((0..nc).filter(|&c| seen[c] && comm2.closed[c] && c != enclosing).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testnets;

    fn gene_block(variant: usize) -> (BlockNet, Vec<Vec<i64>>) {
        let net = testnets::gene_network(variant);
        // Bounded block is (Goff, Gon); free block (M, P).
        let bn = BlockNet::from_network(&net, 2);
        (bn, vec![vec![0, 1], vec![1, 0]])
    }

    #[test]
    fn available_reactions_gene_on_state() {
        let (bn, states) = gene_block(0);
        // State (0,1) = gene on: switching off and transcription need no
        // free species.
        let on = available_reactions(&bn, &states[0], 0);
        assert!(on.contains(&1)); // Gon -> Goff
        assert!(on.contains(&2)); // transcription
        assert!(!on.contains(&0)); // needs Goff
    }

    #[test]
    fn available_reactions_full_mask_ignores_support_condition() {
        let (bn, states) = gene_block(0);
        let full: FreeMask = 0b11;
        let got = available_reactions(&bn, &states[1], full);
        // (1,0): activation, translation, both degradations fire.
        assert_eq!(got, vec![0, 3, 4, 5]);
    }

    #[test]
    fn network5_empty_mask_blocks_switching() {
        let (bn, states) = gene_block(5);
        for y in &states {
            let ks = available_reactions(&bn, y, 0);
            // Only transcription (state-dependent) and mRNA decay survive;
            // neither changes the bounded state.
            for k in ks {
                assert_eq!(bn.zeta_b(k), vec![0, 0]);
            }
        }
        let z = zero_pattern(&bn, &states, 0);
        assert!(!z[0][1] && !z[1][0]);
    }

    #[test]
    fn zero_pattern_gene_switch() {
        let (bn, states) = gene_block(0);
        let z = zero_pattern(&bn, &states, 0);
        // Both switch reactions are free of free-species consumption.
        assert!(z[0][1] && z[1][0]);
    }

    #[test]
    fn single_state_no_reactions() {
        let bn = BlockNet {
            d_b: 1,
            d_f: 0,
            nu_b: vec![vec![5]],
            rho_b: vec![vec![5]],
            nu_f: vec![vec![]],
            rho_f: vec![vec![]],
        };
        let z = zero_pattern(&bn, &[vec![0]], 0);
        assert_eq!(z, vec![vec![false]]);
        let cc = communication_classes(&z, 0);
        assert_eq!(cc.classes, vec![vec![0]]);
        assert!(cc.closed[0]);
    }

    #[test]
    fn mutual_pair_is_one_class() {
        let z = vec![vec![false, true], vec![true, false]];
        let cc = communication_classes(&z, 0);
        assert_eq!(cc.classes, vec![vec![0, 1]]);
        assert!(cc.closed[0]);
    }

    #[test]
    fn isolated_pair_two_singletons() {
        let z = vec![vec![false, false], vec![false, false]];
        let cc = communication_classes(&z, 0);
        assert_eq!(cc.classes, vec![vec![0], vec![1]]);
        assert!(cc.closed.iter().all(|&c| c));
    }

    #[test]
    fn chain_three_classes_only_sink_closed() {
        let z = vec![
            vec![false, true, false],
            vec![false, false, true],
            vec![false, false, false],
        ];
        let cc = communication_classes(&z, 0);
        assert_eq!(cc.classes, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(cc.closed, vec![false, false, true]);
        // Psi maps the open class {0} to the sink.
        let got = psi_map(&[0], 0, 0, &cc).unwrap();
        assert_eq!(got, vec![2]);
    }

    #[test]
    fn psi_requires_subset() {
        let z = vec![vec![false]];
        let cc = communication_classes(&z, 0b01);
        assert_eq!(psi_map(&[0], 0b10, 0b01, &cc), Err(PsiError::NotASubset));
    }

    #[test]
    fn psi_identity_level() {
        let z = vec![vec![false, true], vec![true, false]];
        let cc = communication_classes(&z, 0);
        assert_eq!(psi_map(&[0, 1], 0, 0, &cc).unwrap(), vec![0]);
    }

    #[test]
    fn monotonicity_of_zero_pattern_and_classes() {
        let (bn, states) = gene_block(5);
        let masks: [FreeMask; 3] = [0, 0b01, 0b11];
        for w in masks.windows(2) {
            let z1 = zero_pattern(&bn, &states, w[0]);
            let z2 = zero_pattern(&bn, &states, w[1]);
            for i in 0..states.len() {
                for j in 0..states.len() {
                    assert!(!z1[i][j] || z2[i][j], "Z must grow with A");
                }
            }
            let c1 = communication_classes(&z1, w[0]);
            let c2 = communication_classes(&z2, w[1]);
            // Each class of Theta(A1) is inside exactly one class of
            // Theta(A2).
            for cls in &c1.classes {
                let target = c2.class_of[cls[0]];
                assert!(cls.iter().all(|&s| c2.class_of[s] == target));
            }
        }
    }

    #[test]
    fn classes_partition_states() {
        let (bn, states) = gene_block(0);
        let z = zero_pattern(&bn, &states, 0b11);
        let cc = communication_classes(&z, 0b11);
        let mut all: Vec<usize> = cc.classes.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..states.len()).collect::<Vec<_>>());
    }
}
