//! Elimination of restricted species: builds the reduced network on the
//! bounded and free species with the affine map substituted into every
//! propensity, and the lifts back to the full and original networks.

use crate::decomp::{AffineMap, Decomposition};
use crate::linalg::{Int, Rat};
use crate::model::{Expr, Permutation, PropensityDescriptor, PropensityKind, ReactionNetwork};
use num::{One, Zero};

/// The reduced network together with the affine link it was built from.
#[derive(Debug, Clone)]
pub struct ReducedNetwork {
    /// Network over the `d_b + d_f` bounded and free species.
    pub base: ReactionNetwork,
    pub link: AffineMap,
    pub d_b: usize,
    pub d_f: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum ReduceError {
    #[error("affine map is not compatible with the network")]
    IncompatibleMap,
}

/// Builds the affine expression for restricted coordinate `j` over the
/// reduced variable numbering (free species at `d_b..d_b+d_f`).
fn phi_expr(map: &AffineMap, d_b: usize, j: usize) -> Expr {
    let mut acc = Expr::Num(map.f0[j].clone());
    for (l, coeff) in map.f1[j].iter().enumerate() {
        if coeff.is_zero() {
            continue;
        }
        let term = if coeff.is_one() {
            Expr::Var(d_b + l)
        } else {
            Expr::Mul(Box::new(Expr::Num(coeff.clone())), Box::new(Expr::Var(d_b + l)))
        };
        acc = Expr::Add(Box::new(acc), Box::new(term));
    }
    acc
}

/// Falling factorial `x (x-1) ... (x - nu + 1) / nu!` as an expression.
fn falling_factorial_expr(base: Expr, nu: i64) -> Expr {
    let mut acc: Option<Expr> = None;
    for j in 0..nu {
        let factor = if j == 0 {
            base.clone()
        } else {
            Expr::Sub(Box::new(base.clone()), Box::new(Expr::Num(Rat::from_integer(Int::from(j)))))
        };
        acc = Some(match acc {
            None => factor,
            Some(a) => Expr::Mul(Box::new(a), Box::new(factor)),
        });
    }
    let prod = acc.expect("nu >= 1");
    let mut fact = Int::one();
    for j in 1..=nu {
        fact *= Int::from(j);
    }
    if fact.is_one() {
        prod
    } else {
        Expr::Div(Box::new(prod), Box::new(Expr::Num(Rat::from_integer(fact))))
    }
}

/// Eliminates the restricted species of a decomposed network.
///
/// Reactant and product matrices are the first `d_b + d_f` rows of the
/// permuted network; each propensity has `phi(x_f)` substituted for the
/// restricted counts on the expression level, keeping exact coefficients.
pub fn reduce_network(dec: &Decomposition) -> Result<ReducedNetwork, ReduceError> {
    let d_b = dec.space.d_b;
    let d_f = dec.space.d_f;
    let d_r = dec.space.d_r;
    let map = dec.space.map.clone();
    if d_r > 0 && !map.compatible {
        return Err(ReduceError::IncompatibleMap);
    }
    let net = &dec.network_sigma;
    let keep = d_b + d_f;
    let species = net.species[..keep].to_vec();
    let reactant: Vec<Vec<i64>> = net.reactant[..keep].to_vec();
    let product: Vec<Vec<i64>> = net.product[..keep].to_vec();
    let propensities = (0..net.num_reactions())
        .map(|k| substitute_propensity(net, k, &map, d_b, d_f))
        .collect();
    Ok(ReducedNetwork {
        base: ReactionNetwork::new(species, reactant, product, propensities),
        link: map,
        d_b,
        d_f,
    })
}

fn substitute_propensity(
    net: &ReactionNetwork,
    k: usize,
    map: &AffineMap,
    d_b: usize,
    d_f: usize,
) -> PropensityDescriptor {
    let keep = d_b + d_f;
    let d = net.num_species();
    let touches_restricted = (keep..d).any(|i| net.reactant[i][k] > 0);
    match &net.propensities[k].kind {
        PropensityKind::MassAction { rate } if !touches_restricted => {
            PropensityDescriptor::mass_action(rate.clone())
        }
        PropensityKind::MassAction { rate } => {
            // theta * prod over kept species (mass action factors) * prod
            // over restricted species with phi substituted.
            let mut expr = Expr::Num(rate.clone());
            for i in 0..d {
                let nu = net.reactant[i][k];
                if nu == 0 {
                    continue;
                }
                let base = if i < keep { Expr::Var(i) } else { phi_expr(map, d_b, i - keep) };
                expr = Expr::Mul(Box::new(expr), Box::new(falling_factorial_expr(base, nu)));
            }
            PropensityDescriptor::expression(expr)
        }
        PropensityKind::GuardedExpression { expr } => {
            let substituted = expr.substitute(&|i| {
                if i < keep {
                    Expr::Var(i)
                } else {
                    phi_expr(map, d_b, i - keep)
                }
            });
            PropensityDescriptor::expression(substituted)
        }
    }
}

/// Lifts an irreducible state-space `F x G` of the reduced network to
/// `F x Phi_G` for the full permuted network, materialized pointwise.
pub fn lift_irreducible(
    bounded_states: &[Vec<i64>],
    free_states: &[Vec<i64>],
    map: &AffineMap,
) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for b in bounded_states {
        for f in free_states {
            let phi = map.eval(f).expect("free state must lie in the domain of the graph");
            let mut s = b.clone();
            s.extend_from_slice(f);
            s.extend_from_slice(&phi);
            out.push(s);
        }
    }
    out
}

/// Applies `P_sigma^T` to a set of permuted states, returning them in the
/// original species order.
pub fn lift_to_original(states_sigma: &[Vec<i64>], sigma: &Permutation) -> Vec<Vec<i64>> {
    states_sigma.iter().map(|s| sigma.apply_inverse(s)).collect()
}
