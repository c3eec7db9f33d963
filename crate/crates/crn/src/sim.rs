//! Exact stochastic simulation (Gillespie direct method), empirical
//! validation of decomposed state-spaces, and the slow-scale simulation
//! pathway that averages slow propensities over certified quasi-stationary
//! distributions of fast subnetworks.

use crate::cascade::{find_irreducible, CascadeOptions, Completeness};
use crate::decomp::{find_decomposed_state_space, DecompOptions, Decomposition};
use crate::linalg::{left_nullspace_basis, Int};
use crate::model::{Permutation, ReactionNetwork};
use crate::reduce::{reduce_network, ReducedNetwork};
use num::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// One exact trajectory: jump times and the state after each jump, with
/// the initial state first.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<i64>>,
    pub seed: u64,
    pub t_final: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("fast subnetwork is not certified ergodic at slow state {state:?}")]
    CertificationUnavailable { state: Vec<i64> },
    #[error("fast stationary distribution tail does not converge")]
    ProviderTailUnbounded,
    #[error("slow variables admit no canonical nonnegative state at {state:?}")]
    NoCanonicalState { state: Vec<i64> },
}

/// Deterministic per-trajectory RNG stream.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Core direct-method loop. The observer sees `(t, state, reaction)` after
/// every jump. Returns the number of simulated reaction events.
pub fn ssa_run(
    network: &ReactionNetwork,
    x0: &[i64],
    t_final: f64,
    rng: &mut ChaCha8Rng,
    mut observer: impl FnMut(f64, &[i64], usize),
) -> u64 {
    let kk = network.num_reactions();
    let columns: Vec<Vec<i64>> = (0..kk).map(|k| network.stoichiometry_column(k)).collect();
    let mut x = x0.to_vec();
    let mut t = 0.0;
    let mut props = vec![0.0f64; kk];
    let mut events = 0u64;
    loop {
        let mut total = 0.0;
        for k in 0..kk {
            props[k] = network.propensity_f64(k, &x);
            total += props[k];
        }
        if total <= 0.0 {
            return events;
        }
        let u: f64 = rng.gen::<f64>();
        let dt = -(1.0 - u).ln() / total;
        if t + dt > t_final {
            return events;
        }
        t += dt;
        let mut pick = rng.gen::<f64>() * total;
        let mut k = kk - 1;
        for (j, &p) in props.iter().enumerate() {
            if pick < p {
                k = j;
                break;
            }
            pick -= p;
        }
        debug_assert!(network.meets_support(k, &x), "fired reaction violates support");
        for i in 0..x.len() {
            x[i] += columns[k][i];
        }
        events += 1;
        observer(t, &x, k);
    }
}

/// Statistically exact CTMC sample with full jump recording.
pub fn ssa_simulate(network: &ReactionNetwork, x0: &[i64], t_final: f64, seed: u64) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut times = vec![0.0];
    let mut states = vec![x0.to_vec()];
    ssa_run(network, x0, t_final, &mut rng, |t, x, _| {
        times.push(t);
        states.push(x.to_vec());
    });
    Trajectory { times, states, seed, t_final }
}

/// Final state and event count without recording the path.
pub fn ssa_final_state(
    network: &ReactionNetwork,
    x0: &[i64],
    t_final: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<i64>, u64) {
    let mut last = x0.to_vec();
    let events = ssa_run(network, x0, t_final, rng, |_, x, _| last.copy_from_slice_i64(x));
    (last, events)
}

trait CopyISlice {
    fn copy_from_slice_i64(&mut self, src: &[i64]);
}

impl CopyISlice for Vec<i64> {
    fn copy_from_slice_i64(&mut self, src: &[i64]) {
        self.clear();
        self.extend_from_slice(src);
    }
}

/// States visited by trajectories that escape the decomposed state-space.
pub fn empirical_support_check(
    trajectories: &[Trajectory],
    decomposed: &Decomposition,
) -> Vec<(usize, Vec<i64>)> {
    let mut violations = Vec::new();
    for (ti, traj) in trajectories.iter().enumerate() {
        for state in &traj.states {
            let xs = decomposed.space.sigma.apply(state);
            if !decomposed.space.contains_permuted(&xs) {
                violations.push((ti, state.clone()));
            }
        }
    }
    violations
}

/// Occupation-time-weighted histogram of visited states after `burn_in`.
pub fn time_average_distribution(
    trajectory: &Trajectory,
    burn_in: f64,
) -> HashMap<Vec<i64>, f64> {
    assert!(trajectory.t_final > burn_in);
    let mut occupancy: HashMap<Vec<i64>, f64> = HashMap::new();
    let n = trajectory.states.len();
    for i in 0..n {
        let start = trajectory.times[i].max(burn_in);
        let end = if i + 1 < n { trajectory.times[i + 1] } else { trajectory.t_final };
        if end > start {
            *occupancy.entry(trajectory.states[i].clone()).or_default() += end - start;
        }
    }
    let total: f64 = occupancy.values().sum();
    for v in occupancy.values_mut() {
        *v /= total;
    }
    occupancy
}

/// Fast/slow reaction split with the slow variables: integer functionals
/// spanning the left nullspace of the fast-column stoichiometry, so every
/// slow variable is invariant under every fast reaction.
#[derive(Debug, Clone)]
pub struct FastSlowPartition {
    pub fast: Vec<usize>,
    pub slow: Vec<usize>,
    /// Primitive integer functionals, one per slow variable.
    pub slow_variables: Vec<Vec<Int>>,
}

pub fn fast_slow_partition(network: &ReactionNetwork, fast: &[usize]) -> FastSlowPartition {
    let d = network.num_species();
    let fast: Vec<usize> = fast.to_vec();
    let slow: Vec<usize> =
        (0..network.num_reactions()).filter(|k| !fast.contains(k)).collect();
    let s_fast = crate::linalg::ExactMatrix::from_fn(d, fast.len(), |i, c| {
        let k = fast[c];
        crate::linalg::rat(network.product[i][k] - network.reactant[i][k])
    });
    let slow_variables = if fast.is_empty() {
        (0..d)
            .map(|i| (0..d).map(|j| if i == j { Int::from(1) } else { Int::from(0) }).collect())
            .collect()
    } else {
        left_nullspace_basis(&s_fast)
    };
    FastSlowPartition { fast, slow, slow_variables }
}

impl FastSlowPartition {
    pub fn slow_values(&self, x: &[i64]) -> Vec<i64> {
        self.slow_variables
            .iter()
            .map(|g| {
                g.iter()
                    .zip(x)
                    .map(|(gi, &xi)| gi * Int::from(xi))
                    .sum::<Int>()
                    .to_i64()
                    .expect("slow values fit in i64")
            })
            .collect()
    }

    /// Increment of every slow variable under reaction `k`.
    pub fn slow_increments(&self, network: &ReactionNetwork, k: usize) -> Vec<i64> {
        let zeta = network.stoichiometry_column(k);
        self.slow_variables
            .iter()
            .map(|g| {
                g.iter()
                    .zip(&zeta)
                    .map(|(gi, &zi)| gi * Int::from(zi))
                    .sum::<Int>()
                    .to_i64()
                    .expect("increments fit in i64")
            })
            .collect()
    }

    /// Index of the slow variable that is exactly the indicator of one
    /// species, when present.
    pub fn variable_for_species(&self, species: usize) -> Option<usize> {
        self.slow_variables.iter().position(|g| {
            g.iter().enumerate().all(|(i, v)| {
                if i == species {
                    v.to_i64() == Some(1)
                } else {
                    v.to_i64() == Some(0)
                }
            })
        })
    }

    /// A nonnegative state realizing the given slow-variable values: unit
    /// functionals pin their species; mixed-sign functionals put the excess
    /// on their first positive (or negative) species. Verified before use.
    pub fn canonical_state(&self, d: usize, slow_values: &[i64]) -> Option<Vec<i64>> {
        let mut x = vec![0i64; d];
        for (g, &v) in self.slow_variables.iter().zip(slow_values) {
            let pos: Vec<usize> = (0..d).filter(|&i| g[i].to_i64().unwrap_or(0) > 0).collect();
            let neg: Vec<usize> = (0..d).filter(|&i| g[i].to_i64().unwrap_or(0) < 0).collect();
            if v >= 0 {
                let &i = pos.first()?;
                if g[i].to_i64()? != 0 && v % g[i].to_i64()? == 0 {
                    x[i] += v / g[i].to_i64()?;
                } else {
                    return None;
                }
            } else {
                let &i = neg.first()?;
                let gi = g[i].to_i64()?;
                if v % gi == 0 {
                    x[i] += v / gi;
                } else {
                    return None;
                }
            }
        }
        if x.iter().any(|&v| v < 0) {
            return None;
        }
        if self.slow_values(&x) == slow_values {
            Some(x)
        } else {
            None
        }
    }
}

/// Quasi-stationary context at one slow state: the fast-subnetwork
/// decomposition, its certified stationary distribution over the free
/// coordinate, and the averaged slow propensities.
#[derive(Debug, Clone)]
pub struct FastContext {
    /// sigma of the fast-subnetwork decomposition.
    pub sigma: Permutation,
    /// Bounded part of the permuted canonical state.
    pub bounded: Vec<i64>,
    /// Stationary probabilities over the free coordinate `z = 0, 1, ...`.
    pub distribution: Vec<f64>,
    /// Averaged propensities, indexed like `partition.slow`.
    pub lambda_hat: Vec<f64>,
    pub d_f: usize,
}

/// The fast subnetwork: all species, only the fast reactions.
pub fn fast_subnetwork(network: &ReactionNetwork, partition: &FastSlowPartition) -> ReactionNetwork {
    let keep = &partition.fast;
    ReactionNetwork::new(
        network.species.clone(),
        network.reactant.iter().map(|row| keep.iter().map(|&k| row[k]).collect()).collect(),
        network.product.iter().map(|row| keep.iter().map(|&k| row[k]).collect()).collect(),
        keep.iter().map(|&k| network.propensities[k].clone()).collect(),
    )
}

/// Stationary distribution of a one-dimensional birth-death reduction by
/// detailed balance, truncated once the tail is negligible.
fn birth_death_stationary(
    reduced: &ReducedNetwork,
    bounded: &[i64],
    tail_tol: f64,
) -> Result<Vec<f64>, SimError> {
    let net = &reduced.base;
    let d_b = reduced.d_b;
    let mut birth_ids = Vec::new();
    let mut death_ids = Vec::new();
    for k in 0..net.num_reactions() {
        let step = net.product[d_b][k] - net.reactant[d_b][k];
        match step {
            1 => birth_ids.push(k),
            -1 => death_ids.push(k),
            0 => {}
            _ => return Err(SimError::ProviderTailUnbounded),
        }
    }
    let eval = |ids: &[usize], z: i64| -> f64 {
        let mut state = bounded.to_vec();
        state.push(z);
        ids.iter().map(|&k| net.propensity_f64(k, &state)).sum()
    };
    let mut weights = vec![1.0f64];
    let mut total = 1.0;
    let mut w = 1.0;
    for z in 0..1_000_000i64 {
        let b = eval(&birth_ids, z);
        if b == 0.0 {
            break;
        }
        let dn = eval(&death_ids, z + 1);
        if dn <= 0.0 {
            return Err(SimError::ProviderTailUnbounded);
        }
        let ratio = b / dn;
        w *= ratio;
        weights.push(w);
        total += w;
        if ratio < 1.0 && w * ratio / (1.0 - ratio) < tail_tol * total {
            break;
        }
        if z == 999_999 {
            return Err(SimError::ProviderTailUnbounded);
        }
    }
    for w in &mut weights {
        *w /= total;
    }
    Ok(weights)
}

/// Builds the certified quasi-stationary context for one slow state.
pub fn build_fast_context(
    network: &ReactionNetwork,
    partition: &FastSlowPartition,
    slow_values: &[i64],
    tail_tol: f64,
) -> Result<FastContext, SimError> {
    let d = network.num_species();
    let Some(canonical) = partition.canonical_state(d, slow_values) else {
        return Err(SimError::NoCanonicalState { state: slow_values.to_vec() });
    };
    let fast_net = fast_subnetwork(network, partition);
    let dec = find_decomposed_state_space(&fast_net, &canonical, &DecompOptions::default())
        .map_err(|_| SimError::CertificationUnavailable { state: slow_values.to_vec() })?;
    if !dec.space.map.compatible || dec.space.bounded_space.states.len() != 1 || dec.space.d_f > 1 {
        return Err(SimError::CertificationUnavailable { state: slow_values.to_vec() });
    }
    let reduced = reduce_network(&dec)
        .map_err(|_| SimError::CertificationUnavailable { state: slow_values.to_vec() })?;
    let outcome = find_irreducible(
        &reduced.block_net(),
        &dec.space.bounded_space.states,
        &CascadeOptions::default(),
    );
    if outcome.completeness != Completeness::Complete || outcome.certificates.len() != 1 {
        return Err(SimError::CertificationUnavailable { state: slow_values.to_vec() });
    }
    let cert = &outcome.certificates[0];
    let bounded = dec.space.bounded_space.states[0].clone();
    let distribution = if dec.space.d_f == 0 || cert.a_mask == 0 {
        vec![1.0]
    } else {
        birth_death_stationary(&reduced, &bounded, tail_tol)?
    };
    // Averaged propensities of the slow reactions.
    let sigma_inv = dec.space.sigma.inverse();
    let assemble = |z: i64| -> Vec<i64> {
        let mut xs = bounded.clone();
        if dec.space.d_f == 1 {
            xs.push(z);
        }
        if dec.space.d_r > 0 {
            let xf = &xs[dec.space.d_b..dec.space.d_b + dec.space.d_f];
            let phi = dec.space.map.eval(xf).expect("graph point");
            xs.extend(phi);
        }
        sigma_inv.apply_inverse(&xs)
    };
    let lambda_hat: Vec<f64> = partition
        .slow
        .iter()
        .map(|&k| {
            distribution
                .iter()
                .enumerate()
                .map(|(z, &p)| p * network.propensity_f64(k, &assemble(z as i64)))
                .sum()
        })
        .collect();
    Ok(FastContext {
        sigma: dec.space.sigma.clone(),
        bounded,
        distribution,
        lambda_hat,
        d_f: dec.space.d_f,
    })
}

/// Averaged slow-reaction propensities at a slow state (the QSA rates).
pub fn qsa_slow_propensities(
    network: &ReactionNetwork,
    partition: &FastSlowPartition,
    slow_values: &[i64],
    tail_tol: f64,
) -> Result<Vec<f64>, SimError> {
    Ok(build_fast_context(network, partition, slow_values, tail_tol)?.lambda_hat)
}

/// A slow-scale trajectory over the slow-variable values.
#[derive(Debug, Clone)]
pub struct SlowTrajectory {
    pub times: Vec<f64>,
    pub slow_states: Vec<Vec<i64>>,
    pub events: u64,
    pub seed: u64,
    pub t_final: f64,
}

/// Slow-scale SSA: jumps over slow reactions with rates averaged under the
/// certified fast-subnetwork stationary distribution, re-deriving the
/// free/restricted classification after every slow jump.
pub fn sssa_simulate(
    network: &ReactionNetwork,
    partition: &FastSlowPartition,
    x0: &[i64],
    t_final: f64,
    seed: u64,
    tail_tol: f64,
) -> Result<SlowTrajectory, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sssa_run(network, partition, x0, t_final, &mut rng, tail_tol, &mut HashMap::new()).map(
        |(times, slow_states, events)| SlowTrajectory { times, slow_states, events, seed, t_final },
    )
}

/// Core loop with a caller-provided context cache (reusable across
/// trajectories of one ensemble).
pub fn sssa_run(
    network: &ReactionNetwork,
    partition: &FastSlowPartition,
    x0: &[i64],
    t_final: f64,
    rng: &mut ChaCha8Rng,
    tail_tol: f64,
    cache: &mut HashMap<Vec<i64>, FastContext>,
) -> Result<(Vec<f64>, Vec<Vec<i64>>, u64), SimError> {
    if partition.fast.is_empty() {
        // Degenerate partition: the slow-scale process is the exact chain.
        let mut times = vec![0.0];
        let mut states = vec![partition.slow_values(x0)];
        let mut events = 0;
        ssa_run(network, x0, t_final, rng, |t, x, _| {
            times.push(t);
            states.push(partition.slow_values(x));
            events += 1;
        });
        return Ok((times, states, events));
    }
    let increments: Vec<Vec<i64>> =
        partition.slow.iter().map(|&k| partition.slow_increments(network, k)).collect();
    let mut s = partition.slow_values(x0);
    let mut t = 0.0;
    let mut times = vec![0.0];
    let mut slow_states = vec![s.clone()];
    let mut events = 0u64;
    loop {
        if !cache.contains_key(&s) {
            let ctx = build_fast_context(network, partition, &s, tail_tol)?;
            cache.insert(s.clone(), ctx);
        }
        let ctx = &cache[&s];
        let total: f64 = ctx.lambda_hat.iter().sum();
        if total <= 0.0 {
            break;
        }
        let u: f64 = rng.gen::<f64>();
        let dt = -(1.0 - u).ln() / total;
        if t + dt > t_final {
            break;
        }
        t += dt;
        let mut pick = rng.gen::<f64>() * total;
        let mut chosen = partition.slow.len() - 1;
        for (j, &p) in ctx.lambda_hat.iter().enumerate() {
            if pick < p {
                chosen = j;
                break;
            }
            pick -= p;
        }
        for (i, inc) in increments[chosen].iter().enumerate() {
            s[i] += inc;
        }
        events += 1;
        times.push(t);
        slow_states.push(s.clone());
    }
    Ok((times, slow_states, events))
}
