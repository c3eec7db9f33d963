//! Complex-balance verification and product-form stationary distributions
//! on certified irreducible state-spaces, including the general-kinetics
//! variant and the toxin-antitoxin closed form.

use crate::linalg::Rat;
use crate::model::{rat_to_f64, PropensityKind, ReactionNetwork};
use num::{One, Signed, Zero};

#[derive(Debug, thiserror::Error)]
pub enum StationaryError {
    #[error("complex-balance machinery requires mass-action propensities")]
    NotMassAction,
    #[error("no complex-balanced point found within the iteration budget")]
    NotFound,
    #[error("normalizer diverges: ratio test failed at term {term}")]
    DivergentNormalizer { term: usize },
    #[error("state lies outside the support")]
    UnsupportedState,
}

/// All distinct complexes (reactant and product columns) of the network.
pub fn complexes(network: &ReactionNetwork) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = Vec::new();
    for k in 0..network.num_reactions() {
        for z in [network.reactant_column(k), network.product_column(k)] {
            if !out.contains(&z) {
                out.push(z);
            }
        }
    }
    out.sort();
    out
}

/// A verified complex-balanced fixed point with its worst defect.
#[derive(Debug, Clone)]
pub struct ComplexBalancedPoint {
    pub r: Vec<Rat>,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct Rejected {
    pub worst_complex: Vec<i64>,
    pub defect: f64,
}

fn mass_action_rate(network: &ReactionNetwork, k: usize) -> Result<Rat, StationaryError> {
    match &network.propensities[k].kind {
        PropensityKind::MassAction { rate } => Ok(rate.clone()),
        PropensityKind::GuardedExpression { .. } => Err(StationaryError::NotMassAction),
    }
}

/// Monomial `prod_i r_i^{nu_ik}` evaluated exactly.
fn monomial(r: &[Rat], nu: &[i64]) -> Rat {
    let mut acc = Rat::one();
    for (ri, &e) in r.iter().zip(nu) {
        for _ in 0..e {
            acc *= ri;
        }
    }
    acc
}

/// Checks complex balance of `r`: for each complex, the consumption and
/// production rates at `r` must agree within `tol`. The defect is computed
/// exactly and compared as a float.
pub fn check_complex_balanced(
    network: &ReactionNetwork,
    r: &[Rat],
    tol: f64,
) -> Result<Result<ComplexBalancedPoint, Rejected>, StationaryError> {
    assert_eq!(r.len(), network.num_species());
    assert!(r.iter().all(|v| v.is_positive()), "r must be strictly positive");
    let mut worst = Rat::zero();
    let mut worst_complex = Vec::new();
    for z in complexes(network) {
        let mut lhs = Rat::zero();
        let mut rhs = Rat::zero();
        for k in 0..network.num_reactions() {
            let theta = mass_action_rate(network, k)?;
            let flux = theta * monomial(r, &network.reactant_column(k));
            if network.reactant_column(k) == z {
                lhs += &flux;
            }
            if network.product_column(k) == z {
                rhs += &flux;
            }
        }
        let defect = (lhs - rhs).abs();
        if defect > worst {
            worst = defect;
            worst_complex = z;
        }
    }
    let residual = rat_to_f64(&worst);
    if residual <= tol {
        Ok(Ok(ComplexBalancedPoint { r: r.to_vec(), residual }))
    } else {
        Ok(Err(Rejected { worst_complex, defect: residual }))
    }
}

/// Searches for a complex-balanced point by damped Newton iteration on the
/// balance residual in log-concentration space, starting from all ones.
/// Success is always re-verified through `check_complex_balanced`; failure
/// is not a proof of non-existence.
pub fn solve_complex_balance(
    network: &ReactionNetwork,
) -> Result<ComplexBalancedPoint, StationaryError> {
    let d = network.num_species();
    let cs = complexes(network);
    let rates: Vec<f64> = (0..network.num_reactions())
        .map(|k| mass_action_rate(network, k).map(|r| rat_to_f64(&r)))
        .collect::<Result<_, _>>()?;
    let nus: Vec<Vec<i64>> = (0..network.num_reactions()).map(|k| network.reactant_column(k)).collect();
    let rhos: Vec<Vec<i64>> = (0..network.num_reactions()).map(|k| network.product_column(k)).collect();
    let defects = |u: &[f64]| -> Vec<f64> {
        let r: Vec<f64> = u.iter().map(|v| v.exp()).collect();
        cs.iter()
            .map(|z| {
                let mut acc = 0.0;
                for k in 0..rates.len() {
                    let flux = rates[k] * nus[k].iter().zip(&r).map(|(&e, ri)| ri.powi(e as i32)).product::<f64>();
                    if &nus[k] == z {
                        acc += flux;
                    }
                    if &rhos[k] == z {
                        acc -= flux;
                    }
                }
                acc
            })
            .collect()
    };
    let norm2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let mut u = vec![0.0; d];
    for _ in 0..200 {
        let f = defects(&u);
        if f.iter().all(|x| x.abs() <= 1e-13) {
            break;
        }
        // Numeric Jacobian, least-squares Newton step via normal equations.
        let m = cs.len();
        let h = 1e-7;
        let mut jac = vec![vec![0.0; d]; m];
        for j in 0..d {
            let mut up = u.clone();
            up[j] += h;
            let fp = defects(&up);
            for i in 0..m {
                jac[i][j] = (fp[i] - f[i]) / h;
            }
        }
        // Solve (J^T J + eps I) s = -J^T f.
        let mut a = vec![vec![0.0; d]; d];
        let mut b = vec![0.0; d];
        for i in 0..d {
            for j in 0..d {
                a[i][j] = (0..m).map(|q| jac[q][i] * jac[q][j]).sum();
            }
            a[i][i] += 1e-12;
            b[i] = -(0..m).map(|q| jac[q][i] * f[q]).sum::<f64>();
        }
        let step = match solve_dense(&mut a, &mut b) {
            Some(s) => s,
            None => return Err(StationaryError::NotFound),
        };
        // Damping: halve until the residual decreases.
        let f0 = norm2(&f);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(ui, si)| ui + alpha * si).collect();
            if norm2(&defects(&trial)) < f0 {
                u = trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let r_f64: Vec<f64> = u.iter().map(|v| v.exp()).collect();
    let r: Vec<Rat> = r_f64
        .iter()
        .map(|&v| Rat::from_float(v).ok_or(StationaryError::NotFound))
        .collect::<Result<_, _>>()?;
    match check_complex_balanced(network, &r, 1e-10)? {
        Ok(point) => Ok(point),
        Err(_) => Err(StationaryError::NotFound),
    }
}

/// Support of a certified class in reduced coordinates: a finite bounded
/// block times N0 on the live free coordinates, zero elsewhere.
#[derive(Debug, Clone)]
pub struct ClassSupport {
    /// Sorted bounded states of the class.
    pub bounded_states: Vec<Vec<i64>>,
    /// Free addresses with full N0 range.
    pub live_free: Vec<usize>,
    pub d_b: usize,
    pub d_f: usize,
}

impl ClassSupport {
    pub fn contains(&self, x: &[i64]) -> bool {
        let (xb, xf) = x.split_at(self.d_b);
        if self.bounded_states.binary_search_by(|s| s.as_slice().cmp(xb)).is_err() {
            return false;
        }
        (0..self.d_f).all(|i| self.live_free.contains(&i) || xf[i] == 0)
    }
}

/// A normalized product-form stationary distribution over a class support.
#[derive(Debug, Clone)]
pub struct ProductFormDistribution {
    pub r: Vec<f64>,
    pub support: ClassSupport,
    pub znorm: f64,
    /// Per-species log weights are recomputed on evaluation; the split
    /// records the exponential factor and the finite bounded sum.
    pub split: Option<(f64, f64)>,
    kappas: Option<Vec<Vec<f64>>>,
}

fn ln_factorial(n: i64) -> f64 {
    (1..=n).map(|j| (j as f64).ln()).sum()
}

impl ProductFormDistribution {
    /// Probability of a state in reduced coordinates; zero outside the
    /// support per contract.
    pub fn prob(&self, x: &[i64]) -> f64 {
        match self.prob_checked(x) {
            Ok(p) => p,
            Err(StationaryError::UnsupportedState) => 0.0,
            Err(_) => 0.0,
        }
    }

    pub fn prob_checked(&self, x: &[i64]) -> Result<f64, StationaryError> {
        if !self.support.contains(x) {
            return Err(StationaryError::UnsupportedState);
        }
        let mut logw = 0.0;
        for (i, &xi) in x.iter().enumerate() {
            logw += (xi as f64) * self.r[i].ln();
            match &self.kappas {
                None => logw -= ln_factorial(xi),
                Some(ks) => {
                    for j in 1..=xi {
                        logw -= ks[i][j as usize].ln();
                    }
                }
            }
        }
        Ok((logw - self.znorm.ln()).exp())
    }

    pub fn log_normalizer(&self) -> f64 {
        self.znorm.ln()
    }
}

/// Builds the product-form stationary distribution `pi(x) ~ prod r^x / x!`
/// over a certified class, normalizing through the exponential times
/// finite-sum split: the live free coordinates contribute `exp(r_i)` each
/// and the bounded block a finite sum over the class.
pub fn product_form_pi(r: &[Rat], support: &ClassSupport) -> ProductFormDistribution {
    let rf: Vec<f64> = r.iter().map(rat_to_f64).collect();
    let mut znorm = 1.0;
    for &i in &support.live_free {
        znorm *= rf[support.d_b + i].exp();
    }
    let exp_factor = znorm;
    let mut bounded_sum = 0.0;
    for xb in &support.bounded_states {
        let mut w = 0.0;
        for (i, &xi) in xb.iter().enumerate() {
            w += (xi as f64) * rf[i].ln() - ln_factorial(xi);
        }
        bounded_sum += w.exp();
    }
    if support.d_b == 0 {
        bounded_sum = 1.0;
    }
    znorm = exp_factor * bounded_sum;
    ProductFormDistribution {
        r: rf,
        support: support.clone(),
        znorm,
        split: Some((exp_factor, bounded_sum)),
        kappas: None,
    }
}

/// General-kinetics product form: `pi(x) ~ prod_i r_i^{x_i} / prod_{j<=x_i}
/// kappa_i(j)`. Each live free coordinate's normalizer series is summed
/// with a ratio-test truncation; divergence is reported.
pub fn general_kinetics_pi(
    r: &[f64],
    kappa: &dyn Fn(usize, u64) -> f64,
    support: &ClassSupport,
    truncation: usize,
    tail_tol: f64,
) -> Result<ProductFormDistribution, StationaryError> {
    let d = support.d_b + support.d_f;
    assert_eq!(r.len(), d);
    // Tabulate kappa far enough for evaluation and normalization.
    let kappas: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..=truncation as u64 + 1).map(|j| if j == 0 { 1.0 } else { kappa(i, j) }).collect())
        .collect();
    let mut znorm = 1.0;
    for &i in &support.live_free {
        let sp = support.d_b + i;
        let mut total = 0.0;
        let mut term = 1.0f64;
        let mut converged = false;
        for m in 0..=truncation {
            total += term;
            let ratio = r[sp] / kappas[sp][m + 1];
            let next = term * ratio;
            if ratio < 1.0 && next / (1.0 - ratio) < tail_tol * total {
                converged = true;
                break;
            }
            term = next;
        }
        if !converged {
            return Err(StationaryError::DivergentNormalizer { term: truncation });
        }
        znorm *= total;
    }
    let mut bounded_sum = 0.0;
    for xb in &support.bounded_states {
        let mut w = 0.0;
        for (i, &xi) in xb.iter().enumerate() {
            w += (xi as f64) * r[i].ln();
            for j in 1..=xi {
                w -= kappas[i][j as usize].ln();
            }
        }
        bounded_sum += w.exp();
    }
    if support.d_b == 0 {
        bounded_sum = 1.0;
    }
    Ok(ProductFormDistribution {
        r: r.to_vec(),
        support: support.clone(),
        znorm: znorm * bounded_sum,
        split: None,
        kappas: Some(kappas),
    })
}

/// The closed-form quasi-stationary distribution of the reduced
/// toxin-antitoxin fast subnetwork over the free copy-number `z`, for mRNA
/// count `x1` and slow offset `y`.
pub fn toxin_qsa_distribution(
    x1: i64,
    y: i64,
    theta1: f64,
    theta2: f64,
    tail_tol: f64,
) -> Vec<f64> {
    assert!(theta1 > 0.0 && theta2 > 0.0 && tail_tol > 0.0);
    if x1 == 0 {
        return vec![1.0];
    }
    let ay = y.abs() as f64;
    let c = theta1 * (x1 as f64) / theta2;
    let mut terms = vec![1.0f64];
    let mut term = 1.0f64;
    let mut total = 1.0f64;
    for z in 0..100_000usize {
        let ratio = c / ((z as f64 + 1.0) * (z as f64 + 1.0 + ay));
        term *= ratio;
        terms.push(term);
        total += term;
        if ratio < 1.0 && term * ratio / (1.0 - ratio) < tail_tol * total {
            break;
        }
    }
    for t in &mut terms {
        *t /= total;
    }
    terms
}

/// Maximum `|(pi Q)(x)|` over box states whose full one-step neighborhood
/// stays inside the box.
pub fn stationarity_residual(
    pi: &dyn Fn(&[i64]) -> f64,
    network: &ReactionNetwork,
    box_bounds: &[i64],
) -> f64 {
    let d = network.num_species();
    assert_eq!(box_bounds.len(), d);
    let mut worst = 0.0f64;
    let mut x = vec![0i64; d];
    loop {
        let interior = (0..network.num_reactions()).all(|k| {
            let z = network.stoichiometry_column(k);
            (0..d).all(|i| {
                let up = x[i] + z[i];
                let dn = x[i] - z[i];
                up >= 0 && up <= box_bounds[i] && dn >= 0 && dn <= box_bounds[i]
            })
        });
        if interior {
            let mut flux = 0.0;
            for k in 0..network.num_reactions() {
                let z = network.stoichiometry_column(k);
                let from: Vec<i64> = (0..d).map(|i| x[i] - z[i]).collect();
                if from.iter().all(|&v| v >= 0) {
                    flux += pi(&from) * network.propensity_f64(k, &from);
                }
                flux -= pi(&x) * network.propensity_f64(k, &x);
            }
            worst = worst.max(flux.abs());
        }
        // Odometer increment over the box.
        let mut i = 0;
        loop {
            if i == d {
                return worst;
            }
            x[i] += 1;
            if x[i] <= box_bounds[i] {
                break;
            }
            x[i] = 0;
            i += 1;
        }
    }
}

/// Gaussian elimination with partial pivoting for small dense systems.
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col && a[r][col] != 0.0 {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}
