//! State-space decomposition: species classification through exact LPs,
//! bounded state-space enumeration, the free/restricted split and the
//! affine map tying restricted species to free ones.

use crate::linalg::{
    left_nullspace_basis, linear_solve, lp_min, ExactMatrix, Int, LpOutcome, Rat,
};
use crate::model::{permute_network, ConservationData, Permutation, ReactionNetwork};
use num::{One, Signed, ToPrimitive, Zero};

/// Upper copy-number bound for one species: a rational optimum or infinity.
#[derive(Debug, Clone, PartialEq)]
pub enum SpeciesBound {
    Finite(Rat),
    Infinite,
}

impl SpeciesBound {
    pub fn is_finite(&self) -> bool {
        matches!(self, SpeciesBound::Finite(_))
    }

    pub fn floor(&self) -> Option<i64> {
        match self {
            SpeciesBound::Finite(b) => b.floor().numer().to_i64(),
            SpeciesBound::Infinite => None,
        }
    }
}

/// Classification of every species with the composite permutation.
#[derive(Debug, Clone)]
pub struct SpeciesClassification {
    /// (original species id, bound) for each bounded species, input order.
    pub bounded: Vec<(usize, Rat)>,
    /// Original ids of free species, stable order.
    pub free: Vec<usize>,
    /// Original ids of restricted species, stable order.
    pub restricted: Vec<usize>,
    pub sigma: Permutation,
}

impl SpeciesClassification {
    pub fn d_b(&self) -> usize {
        self.bounded.len()
    }
    pub fn d_f(&self) -> usize {
        self.free.len()
    }
    pub fn d_r(&self) -> usize {
        self.restricted.len()
    }
    pub fn d_u(&self) -> usize {
        self.d_f() + self.d_r()
    }
}

/// The finite state-space of the bounded species.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedStateSpace {
    /// Distinct states, lexicographically sorted, each of length `d_b`.
    pub states: Vec<Vec<i64>>,
    /// Pairs `(gamma_hat_j, c_hat_j)`: conservation constraints among the
    /// bounded species in permuted coordinates.
    pub constraints: Vec<(Vec<Int>, Int)>,
    /// Rectangle limits `floor(b_sigma(l))` per coordinate.
    pub limits: Vec<i64>,
}

impl BoundedStateSpace {
    pub fn contains(&self, x: &[i64]) -> bool {
        self.states.binary_search_by(|s| s.as_slice().cmp(x)).is_ok()
    }

    pub fn index_of(&self, x: &[i64]) -> Option<usize> {
        self.states.binary_search_by(|s| s.as_slice().cmp(x)).ok()
    }
}

/// The affine map `phi(x) = F0 + F1 x` from free to restricted counts.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub f0: Vec<Rat>,
    /// d_r x d_f.
    pub f1: Vec<Vec<Rat>>,
    pub compatible: bool,
}

impl AffineMap {
    pub fn d_r(&self) -> usize {
        self.f0.len()
    }

    pub fn d_f(&self) -> usize {
        self.f1.first().map_or(0, |r| r.len())
    }

    /// Evaluates phi at an integer free-state; None when some component is
    /// not a nonnegative integer (the argument then lies outside the graph).
    pub fn eval(&self, x_f: &[i64]) -> Option<Vec<i64>> {
        let mut out = Vec::with_capacity(self.f0.len());
        for j in 0..self.f0.len() {
            let mut v = self.f0[j].clone();
            for (l, &xl) in x_f.iter().enumerate() {
                v += self.f1[j][l].clone() * Rat::from_integer(Int::from(xl));
            }
            if !v.is_integer() || v.is_negative() {
                return None;
            }
            out.push(v.numer().to_i64()?);
        }
        Some(out)
    }

    /// Empty map for networks without restricted species.
    pub fn trivial() -> AffineMap {
        AffineMap { f0: Vec::new(), f1: Vec::new(), compatible: true }
    }
}

/// Intermediate data of the free/restricted construction.
#[derive(Debug, Clone)]
pub struct AffineConstruction {
    /// Basis of the unbounded-block left nullspace, sigma_1 addresses.
    pub delta_basis: Vec<Vec<Int>>,
    /// Chosen index set `I` (0-based addresses into the unbounded block).
    pub chosen_index_set: Vec<usize>,
    /// d_f x d_r.
    pub delta1: Vec<Vec<Int>>,
    /// d_r x d_r, invertible.
    pub delta2: Vec<Vec<Int>>,
    /// n x d_r solution of `Gamma_sigma M = Col(delta_hat)`.
    pub m: Vec<Vec<Rat>>,
    /// `c_hat = M^T c`.
    pub c_hat: Vec<Rat>,
}

/// The decomposed state-space `E_b x Phi` under a permutation.
#[derive(Debug, Clone)]
pub struct DecomposedStateSpace {
    pub bounded_space: BoundedStateSpace,
    pub map: AffineMap,
    pub sigma: Permutation,
    pub d_b: usize,
    pub d_f: usize,
    pub d_r: usize,
}

impl DecomposedStateSpace {
    /// True when the sigma-permuted state lies in `E_b x Phi`.
    pub fn contains_permuted(&self, x_sigma: &[i64]) -> bool {
        let (xb, rest) = x_sigma.split_at(self.d_b);
        let (xf, xr) = rest.split_at(self.d_f);
        if !self.bounded_space.contains(xb) {
            return false;
        }
        if self.d_r == 0 {
            return true;
        }
        match self.map.eval(xf) {
            Some(phi) => phi == xr,
            None => false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DecompError {
    #[error("conservation relations mix bounded and unbounded species (rank condition fails)")]
    ConservationMixing,
    #[error("bounded state-space exceeds cap: estimated {estimated} states")]
    StateSpaceTooLarge { estimated: u128 },
    #[error("internal: {0}")]
    Internal(String),
}

/// Everything `find_decomposed_state_space` produces.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub classification: SpeciesClassification,
    pub space: DecomposedStateSpace,
    pub construction: Option<AffineConstruction>,
    pub bounds: Vec<SpeciesBound>,
    /// Conservation data of the sigma-permuted network.
    pub consdata_sigma: ConservationData,
    /// The sigma-permuted network.
    pub network_sigma: ReactionNetwork,
    /// Count of conservation relations among bounded species.
    pub n_b: usize,
}

#[derive(Debug, Clone)]
pub struct DecompOptions {
    pub max_bounded_states: usize,
}

impl Default for DecompOptions {
    fn default() -> Self {
        DecompOptions { max_bounded_states: 200_000 }
    }
}

/// Solves the bound LP for each species: `b_i = min <c, alpha>` subject to
/// `Gamma alpha >= 0` and `<e_i, Gamma alpha> = 1`, infeasibility meaning
/// species `i` is unbounded.
pub fn bound_species(network: &ReactionNetwork, consdata: &ConservationData) -> Vec<SpeciesBound> {
    let d = network.num_species();
    let n = consdata.n();
    if n == 0 {
        return vec![SpeciesBound::Infinite; d];
    }
    let gamma = consdata.gamma_matrix(d);
    let c: Vec<Rat> = consdata.c.iter().map(|v| Rat::from_integer(v.clone())).collect();
    let ineqs: Vec<(Vec<Rat>, Rat)> = (0..d)
        .map(|r| ((0..n).map(|j| gamma.at(r, j).clone()).collect(), Rat::zero()))
        .collect();
    (0..d)
        .map(|i| {
            let eq_row: Vec<Rat> = (0..n).map(|j| gamma.at(i, j).clone()).collect();
            match lp_min(&c, &[(eq_row, Rat::one())], &ineqs) {
                LpOutcome::Optimal { value, .. } => SpeciesBound::Finite(value),
                LpOutcome::Infeasible => SpeciesBound::Infinite,
                LpOutcome::Unbounded => {
                    // <c, alpha> = <x0, Gamma alpha> >= 0 on the feasible set.
                    unreachable!("bound LP is bounded below by zero")
                }
            }
        })
        .collect()
}

/// Enumerates the bounded state-space: all lattice points of the rectangle
/// that satisfy every conservation constraint, lexicographically sorted.
/// Constraint-aware pruning keeps large rectangles tractable; the error is
/// raised when the retained state count would exceed `cap`.
pub fn enumerate_bounded_space(
    limits: &[i64],
    constraints: &[(Vec<Int>, Int)],
    cap: usize,
) -> Result<Vec<Vec<i64>>, DecompError> {
    let d_b = limits.len();
    if d_b == 0 {
        return Ok(vec![vec![]]);
    }
    let volume: u128 = limits.iter().map(|&l| (l as u128) + 1).product();
    // Residual interval per constraint over suffix coordinates.
    let mut suffix_lo = vec![vec![Int::zero(); constraints.len()]; d_b + 1];
    let mut suffix_hi = vec![vec![Int::zero(); constraints.len()]; d_b + 1];
    for i in (0..d_b).rev() {
        for (j, (g, _)) in constraints.iter().enumerate() {
            let contrib_max = if g[i].is_positive() { &g[i] * Int::from(limits[i]) } else { Int::zero() };
            let contrib_min = if g[i].is_negative() { &g[i] * Int::from(limits[i]) } else { Int::zero() };
            suffix_lo[i][j] = &suffix_lo[i + 1][j] + contrib_min;
            suffix_hi[i][j] = &suffix_hi[i + 1][j] + contrib_max;
        }
    }
    let mut out: Vec<Vec<i64>> = Vec::new();
    let mut state = vec![0i64; d_b];
    let mut partial: Vec<Int> = vec![Int::zero(); constraints.len()];
    fn rec(
        i: usize,
        limits: &[i64],
        constraints: &[(Vec<Int>, Int)],
        suffix_lo: &[Vec<Int>],
        suffix_hi: &[Vec<Int>],
        state: &mut Vec<i64>,
        partial: &mut Vec<Int>,
        out: &mut Vec<Vec<i64>>,
        cap: usize,
    ) -> Result<(), DecompError> {
        for (j, (_, cj)) in constraints.iter().enumerate() {
            let need = cj - &partial[j];
            if need < suffix_lo[i][j] || need > suffix_hi[i][j] {
                return Ok(());
            }
        }
        if i == limits.len() {
            if out.len() == cap {
                return Err(DecompError::StateSpaceTooLarge { estimated: cap as u128 + 1 });
            }
            out.push(state.clone());
            return Ok(());
        }
        for v in 0..=limits[i] {
            state[i] = v;
            for (j, (g, _)) in constraints.iter().enumerate() {
                partial[j] += &g[i] * Int::from(v);
            }
            rec(i + 1, limits, constraints, suffix_lo, suffix_hi, state, partial, out, cap)?;
            for (j, (g, _)) in constraints.iter().enumerate() {
                partial[j] -= &g[i] * Int::from(v);
            }
        }
        state[i] = 0;
        Ok(())
    }
    // Unconstrained rectangles are enumerated directly against the cap.
    if constraints.is_empty() && volume > cap as u128 {
        return Err(DecompError::StateSpaceTooLarge { estimated: volume });
    }
    rec(0, limits, constraints, &suffix_lo, &suffix_hi, &mut state, &mut partial, &mut out, cap)?;
    out.sort();
    Ok(out)
}

/// Runs the full decomposition: bound LPs, sigma_1, bounded space, the
/// free/restricted split and the compatibility scan over index sets.
pub fn find_decomposed_state_space(
    network: &ReactionNetwork,
    x0: &[i64],
    opts: &DecompOptions,
) -> Result<Decomposition, DecompError> {
    let d = network.num_species();
    let consdata = crate::model::conservation_data(network, x0);
    let bounds = bound_species(network, &consdata);

    let bounded_ids: Vec<usize> = (0..d).filter(|&i| bounds[i].is_finite()).collect();
    let unbounded_ids: Vec<usize> = (0..d).filter(|&i| !bounds[i].is_finite()).collect();
    let d_b = bounded_ids.len();
    let sigma1 = Permutation::new(bounded_ids.iter().chain(&unbounded_ids).copied().collect());

    let net_sigma1 = permute_network(network, &sigma1);
    let x0_sigma1 = sigma1.apply(x0);
    let consdata_sigma1 = crate::model::conservation_data(&net_sigma1, &x0_sigma1);

    let s_sigma = net_sigma1.stoichiometry_matrix();
    let s_b = submatrix_rows(&s_sigma, 0, d_b);
    let s_u = submatrix_rows(&s_sigma, d_b, d);
    let rank_s = s_sigma.rank();
    let rank_b = s_b.rank();
    let rank_u = s_u.rank();
    let d_f = rank_u;
    let d_u = d - d_b;
    let d_r = d_u - d_f;

    // Bounded-block conservation constraints and the rectangle.
    let gamma_hats = left_nullspace_basis(&s_b);
    let n_b = gamma_hats.len();
    let gamma_sigma = consdata_sigma1.gamma_matrix(d);
    let mut constraints: Vec<(Vec<Int>, Int)> = Vec::with_capacity(n_b);
    for gh in &gamma_hats {
        let mut bar = vec![Rat::zero(); d];
        for (i, v) in gh.iter().enumerate() {
            bar[i] = Rat::from_integer(v.clone());
        }
        let alpha = linear_solve(&gamma_sigma, &bar)
            .map_err(|e| DecompError::Internal(format!("gamma solve: {e}")))?;
        let c_hat: Rat = alpha
            .iter()
            .zip(&consdata_sigma1.c)
            .map(|(a, cj)| a * Rat::from_integer(cj.clone()))
            .sum();
        if !c_hat.is_integer() {
            // No integer state can satisfy the constraint; E_b would be
            // empty, contradicting x0 membership.
            return Err(DecompError::Internal("non-integer bounded constraint".into()));
        }
        constraints.push((gh.clone(), c_hat.numer().clone()));
    }
    let limits: Vec<i64> = (0..d_b)
        .map(|l| {
            let orig = sigma1.image[l];
            bounds[orig].floor().expect("bounded species have finite bounds")
        })
        .collect();
    let states = enumerate_bounded_space(&limits, &constraints, opts.max_bounded_states)?;
    let bounded_space = BoundedStateSpace { states, constraints, limits };

    if d_r == 0 {
        let classification = SpeciesClassification {
            bounded: bounded_ids.iter().map(|&i| (i, finite_bound(&bounds[i]))).collect(),
            free: unbounded_ids.clone(),
            restricted: Vec::new(),
            sigma: sigma1.clone(),
        };
        return Ok(Decomposition {
            classification,
            space: DecomposedStateSpace {
                bounded_space,
                map: AffineMap { f0: Vec::new(), f1: Vec::new(), compatible: true },
                sigma: sigma1,
                d_b,
                d_f,
                d_r,
            },
            construction: None,
            bounds,
            consdata_sigma: consdata_sigma1,
            network_sigma: net_sigma1,
            n_b,
        });
    }

    // Restricted species exist: the rank condition must hold.
    if rank_s != rank_b + rank_u {
        return Err(DecompError::ConservationMixing);
    }
    let delta_basis = left_nullspace_basis(&s_u);
    debug_assert_eq!(delta_basis.len(), d_r);

    // Scan index sets I in lexicographic order; first compatible map wins.
    let mut fallback: Option<(Vec<usize>, Decomposition)> = None;
    for index_set in k_subsets(d_u, d_f) {
        let a_i = ExactMatrix::from_fn(d_u, d_u, |r, c| {
            if c < d_f {
                if r == index_set[c] { Rat::one() } else { Rat::zero() }
            } else {
                Rat::from_integer(delta_basis[c - d_f][r].clone())
            }
        });
        if a_i.rank() < d_u {
            continue;
        }
        let built = build_for_index_set(
            network,
            x0,
            &bounds,
            &bounded_ids,
            &unbounded_ids,
            &bounded_space,
            &delta_basis,
            &index_set,
            n_b,
        )?;
        if built.space.map.compatible {
            return Ok(built);
        }
        if fallback.is_none() {
            fallback = Some((index_set.clone(), built));
        }
    }
    // No compatible partition: emit the first construction, flagged.
    match fallback {
        Some((_, built)) => Ok(built),
        None => Err(DecompError::Internal("index-set family was empty".into())),
    }
}

fn finite_bound(b: &SpeciesBound) -> Rat {
    match b {
        SpeciesBound::Finite(v) => v.clone(),
        SpeciesBound::Infinite => unreachable!(),
    }
}

#[allow(clippy::too_many_arguments)]
fn build_for_index_set(
    network: &ReactionNetwork,
    x0: &[i64],
    bounds: &[SpeciesBound],
    bounded_ids: &[usize],
    unbounded_ids: &[usize],
    bounded_space: &BoundedStateSpace,
    delta_basis: &[Vec<Int>],
    index_set: &[usize],
    n_b: usize,
) -> Result<Decomposition, DecompError> {
    let d = network.num_species();
    let d_b = bounded_ids.len();
    let d_u = unbounded_ids.len();
    let d_f = index_set.len();
    let d_r = d_u - d_f;
    let complement: Vec<usize> = (0..d_u).filter(|i| !index_set.contains(i)).collect();
    let free_ids: Vec<usize> = index_set.iter().map(|&i| unbounded_ids[i]).collect();
    let restricted_ids: Vec<usize> = complement.iter().map(|&i| unbounded_ids[i]).collect();
    let sigma2 = Permutation::new(
        bounded_ids.iter().chain(&free_ids).chain(&restricted_ids).copied().collect(),
    );

    let net_sigma2 = permute_network(network, &sigma2);
    let x0_sigma2 = sigma2.apply(x0);
    let consdata_sigma2 = crate::model::conservation_data(&net_sigma2, &x0_sigma2);
    let gamma_sigma2 = consdata_sigma2.gamma_matrix(d);
    let _n = consdata_sigma2.n();

    // delta_hat_i in sigma_2 coordinates: zero on the bounded block, the
    // free-addressed entries first, then the restricted-addressed ones.
    let mut delta1 = vec![vec![Int::zero(); d_r]; d_f];
    let mut delta2 = vec![vec![Int::zero(); d_r]; d_r];
    let mut delta_hats: Vec<Vec<Rat>> = Vec::with_capacity(d_r);
    for (j, dp) in delta_basis.iter().enumerate() {
        let mut hat = vec![Rat::zero(); d];
        for (pos, &addr) in index_set.iter().enumerate() {
            delta1[pos][j] = dp[addr].clone();
            hat[d_b + pos] = Rat::from_integer(dp[addr].clone());
        }
        for (pos, &addr) in complement.iter().enumerate() {
            delta2[pos][j] = dp[addr].clone();
            hat[d_b + d_f + pos] = Rat::from_integer(dp[addr].clone());
        }
        delta_hats.push(hat);
    }

    // Solve Gamma_sigma M = Col(delta_hat_1..d_r) column by column.
    let mut m_cols: Vec<Vec<Rat>> = Vec::with_capacity(d_r);
    for hat in &delta_hats {
        let col = linear_solve(&gamma_sigma2, hat)
            .map_err(|e| DecompError::Internal(format!("M solve: {e}")))?;
        m_cols.push(col);
    }
    let c_hat: Vec<Rat> = m_cols
        .iter()
        .map(|col| {
            col.iter()
                .zip(&consdata_sigma2.c)
                .map(|(a, cj)| a * Rat::from_integer(cj.clone()))
                .sum()
        })
        .collect();

    // phi(x) = (Delta2^T)^{-1} c_hat - (Delta2^T)^{-1} Delta1^T x.
    let delta2_t = ExactMatrix::from_fn(d_r, d_r, |r, c| Rat::from_integer(delta2[c][r].clone()));
    let f0 = linear_solve(&delta2_t, &c_hat)
        .map_err(|e| DecompError::Internal(format!("Delta2 solve: {e}")))?;
    let mut f1 = vec![vec![Rat::zero(); d_f]; d_r];
    for l in 0..d_f {
        let rhs: Vec<Rat> = (0..d_r).map(|j| -Rat::from_integer(delta1[l][j].clone())).collect();
        let col = linear_solve(&delta2_t, &rhs)
            .map_err(|e| DecompError::Internal(format!("Delta2 solve: {e}")))?;
        for j in 0..d_r {
            f1[j][l] = col[j].clone();
        }
    }

    // Compatibility: nonnegative integer entries and F0 1^T + F1 Vf >= Vr.
    let entries_ok = f0.iter().all(|v| v.is_integer() && !v.is_negative())
        && f1.iter().flatten().all(|v| v.is_integer() && !v.is_negative());
    let mut ineq_ok = true;
    if entries_ok {
        'rxn: for k in 0..net_sigma2.num_reactions() {
            for j in 0..d_r {
                let mut lhs = f0[j].clone();
                for l in 0..d_f {
                    lhs += f1[j][l].clone()
                        * Rat::from_integer(Int::from(net_sigma2.reactant[d_b + l][k]));
                }
                let rhs = Rat::from_integer(Int::from(net_sigma2.reactant[d_b + d_f + j][k]));
                if lhs < rhs {
                    ineq_ok = false;
                    break 'rxn;
                }
            }
        }
    }
    let map = AffineMap { f0, f1, compatible: entries_ok && ineq_ok };

    let classification = SpeciesClassification {
        bounded: bounded_ids.iter().map(|&i| (i, finite_bound(&bounds[i]))).collect(),
        free: free_ids,
        restricted: restricted_ids,
        sigma: sigma2.clone(),
    };
    Ok(Decomposition {
        classification,
        space: DecomposedStateSpace {
            bounded_space: bounded_space.clone(),
            map,
            sigma: sigma2,
            d_b,
            d_f,
            d_r,
        },
        construction: Some(AffineConstruction {
            delta_basis: delta_basis.to_vec(),
            chosen_index_set: index_set.to_vec(),
            delta1,
            delta2,
            m: m_cols,
            c_hat,
        }),
        bounds: bounds.to_vec(),
        consdata_sigma: consdata_sigma2,
        network_sigma: net_sigma2,
        n_b,
    })
}

fn submatrix_rows(m: &ExactMatrix, from: usize, to: usize) -> ExactMatrix {
    ExactMatrix::from_fn(to - from, m.cols, |r, c| m.at(from + r, c).clone())
}

/// All k-element subsets of `{0..n-1}` in lexicographic order.
fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;
    use crate::model::PropensityDescriptor;
    use crate::testnets;

    #[test]
    fn gene_bounds() {
        let net = testnets::gene_network(0);
        let cd = crate::model::conservation_data(&net, &[1, 0, 0, 0]);
        let b = bound_species(&net, &cd);
        assert_eq!(b[0], SpeciesBound::Finite(rat(1)));
        assert_eq!(b[1], SpeciesBound::Finite(rat(1)));
        assert_eq!(b[2], SpeciesBound::Infinite);
        assert_eq!(b[3], SpeciesBound::Infinite);
    }

    #[test]
    fn no_conservation_means_all_unbounded() {
        let net = testnets::birth_death(rat(3), rat(2));
        let cd = crate::model::conservation_data(&net, &[0]);
        assert_eq!(bound_species(&net, &cd), vec![SpeciesBound::Infinite]);
    }

    #[test]
    fn enumerate_gene_bounded_space() {
        let states = enumerate_bounded_space(
            &[1, 1],
            &[(vec![Int::from(1), Int::from(1)], Int::from(1))],
            1000,
        )
        .unwrap();
        assert_eq!(states, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn enumerate_empty_dimension() {
        assert_eq!(enumerate_bounded_space(&[], &[], 10).unwrap(), vec![Vec::<i64>::new()]);
    }

    #[test]
    fn enumerate_two_unit_pairs_product_structure() {
        // Direct enumeration oracle over {0,1}^4 with two sum constraints.
        let constraints = vec![
            (vec![Int::from(1), Int::from(1), Int::zero(), Int::zero()], Int::from(1)),
            (vec![Int::zero(), Int::zero(), Int::from(1), Int::from(1)], Int::from(1)),
        ];
        let states = enumerate_bounded_space(&[1, 1, 1, 1], &constraints, 100).unwrap();
        let mut brute = Vec::new();
        for a in 0..=1i64 {
            for b in 0..=1i64 {
                for c in 0..=1i64 {
                    for d in 0..=1i64 {
                        if a + b == 1 && c + d == 1 {
                            brute.push(vec![a, b, c, d]);
                        }
                    }
                }
            }
        }
        brute.sort();
        assert_eq!(states, brute);
        assert_eq!(states.len(), 4);
    }

    #[test]
    fn enumerate_respects_cap() {
        let err = enumerate_bounded_space(&[100, 100], &[], 50).unwrap_err();
        assert!(matches!(err, DecompError::StateSpaceTooLarge { .. }));
    }

    #[test]
    fn decompose_atp() {
        let net = testnets::atp_network();
        let dec = find_decomposed_state_space(&net, &[0, 0], &DecompOptions::default()).unwrap();
        assert_eq!(dec.space.d_b, 0);
        assert_eq!(dec.space.d_f, 1);
        assert_eq!(dec.space.d_r, 1);
        assert!(dec.space.map.compatible);
        // phi(z) = z.
        assert_eq!(dec.space.map.eval(&[5]), Some(vec![5]));
        assert_eq!(dec.space.map.eval(&[0]), Some(vec![0]));
    }

    #[test]
    fn decompose_gene_network0() {
        let net = testnets::gene_network(0);
        let dec = find_decomposed_state_space(&net, &[1, 0, 0, 0], &DecompOptions::default()).unwrap();
        assert_eq!(dec.space.d_b, 2);
        assert_eq!(dec.space.d_f, 2);
        assert_eq!(dec.space.d_r, 0);
        assert_eq!(dec.space.bounded_space.states, vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(dec.classification.sigma, Permutation::identity(4));
    }

    #[test]
    fn decompose_toxin_fast_flips_with_sign_of_y() {
        // Fast subnetwork with x1 = 1; y = x2 - x3 set by the initial state.
        let net = testnets::toxin_fast_subnetwork();
        // y = -2: lexicographically first index set {T} is compatible.
        let dec = find_decomposed_state_space(&net, &[1, 0, 2], &DecompOptions::default()).unwrap();
        assert!(dec.space.map.compatible);
        assert_eq!(dec.classification.free, vec![1]); // T free
        assert_eq!(dec.classification.restricted, vec![2]); // A restricted
        assert_eq!(dec.classification.sigma, Permutation::new(vec![0, 1, 2]));
        assert_eq!(dec.space.map.eval(&[0]), Some(vec![2])); // phi(z) = z + 2
        assert_eq!(dec.space.map.eval(&[3]), Some(vec![5]));

        // y = +2: the first index set is incompatible, A becomes free.
        let dec = find_decomposed_state_space(&net, &[1, 2, 0], &DecompOptions::default()).unwrap();
        assert!(dec.space.map.compatible);
        assert_eq!(dec.classification.free, vec![2]); // A free
        assert_eq!(dec.classification.restricted, vec![1]); // T restricted
        assert_eq!(dec.classification.sigma, Permutation::new(vec![0, 2, 1]));
        assert_eq!(dec.space.map.eval(&[0]), Some(vec![2])); // phi(z) = z + 2
        // Bounded space is the singleton {x1}.
        assert_eq!(dec.space.bounded_space.states, vec![vec![1]]);
    }

    #[test]
    fn quit_when_conservation_mixes_blocks() {
        // Species A, B, X, Y, W. Relations: A+B (semi-positive), X-Y (among
        // unbounded), A+X-W (mixing both blocks). Reactions realize the
        // orthogonal complement: B -> A+W, 0 -> X+Y+W and their reverses.
        let reactant = vec![
            vec![0, 0, 1, 0], // A
            vec![1, 0, 0, 0], // B
            vec![0, 0, 0, 1], // X
            vec![0, 0, 0, 1], // Y
            vec![0, 0, 1, 1], // W
        ];
        let product = vec![
            vec![1, 0, 0, 0],
            vec![0, 0, 1, 0],
            vec![0, 1, 0, 0],
            vec![0, 1, 0, 0],
            vec![1, 1, 0, 0],
        ];
        let net = crate::model::ReactionNetwork::new(
            vec!["A".into(), "B".into(), "X".into(), "Y".into(), "W".into()],
            reactant,
            product,
            (0..4).map(|_| PropensityDescriptor::mass_action(rat(1))).collect(),
        );
        let err = find_decomposed_state_space(&net, &[1, 0, 0, 0, 1], &DecompOptions::default());
        match err {
            Err(DecompError::ConservationMixing) => {}
            other => panic!("expected ConservationMixing, got {other:?}"),
        }
    }

    #[test]
    fn sampled_trajectory_states_lie_in_decomposed_space() {
        // Walk the ATP network by hand and check E_b x Phi membership.
        let net = testnets::atp_network();
        let dec = find_decomposed_state_space(&net, &[2, 2], &DecompOptions::default()).unwrap();
        let mut x = vec![2i64, 2];
        let seq = [0usize, 0, 1, 0, 1, 1, 1, 0];
        for k in seq {
            if net.meets_support(k, &x) {
                let z = net.stoichiometry_column(k);
                for i in 0..2 {
                    x[i] += z[i];
                }
            }
            let xs = dec.space.sigma.apply(&x);
            assert!(dec.space.contains_permuted(&xs), "state {x:?} escaped");
        }
    }
}
