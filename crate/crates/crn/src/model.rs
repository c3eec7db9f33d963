//! Reaction-network data model: reactant/product matrices, propensity
//! semantics, conservation data, permutation and inversion.

use crate::linalg::{left_nullspace_basis, ExactMatrix, Int, Rat};
use num::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use std::fmt;

/// Arithmetic expression over species counts and rational constants.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Rat),
    /// Copy-number of the species with this index.
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero inside the guard region")]
    ExpressionDomainError,
}

impl Expr {
    pub fn eval(&self, x: &[i64]) -> Result<Rat, EvalError> {
        match self {
            Expr::Num(r) => Ok(r.clone()),
            Expr::Var(i) => Ok(Rat::from_integer(Int::from(x[*i]))),
            Expr::Add(a, b) => Ok(a.eval(x)? + b.eval(x)?),
            Expr::Sub(a, b) => Ok(a.eval(x)? - b.eval(x)?),
            Expr::Mul(a, b) => Ok(a.eval(x)? * b.eval(x)?),
            Expr::Div(a, b) => {
                let d = b.eval(x)?;
                if d.is_zero() {
                    return Err(EvalError::ExpressionDomainError);
                }
                Ok(a.eval(x)? / d)
            }
            Expr::Pow(a, p) => {
                let base = a.eval(x)?;
                let mut acc = Rat::one();
                for _ in 0..*p {
                    acc *= &base;
                }
                Ok(acc)
            }
        }
    }

    pub fn eval_f64(&self, x: &[i64]) -> f64 {
        match self {
            Expr::Num(r) => rat_to_f64(r),
            Expr::Var(i) => x[*i] as f64,
            Expr::Add(a, b) => a.eval_f64(x) + b.eval_f64(x),
            Expr::Sub(a, b) => a.eval_f64(x) - b.eval_f64(x),
            Expr::Mul(a, b) => a.eval_f64(x) * b.eval_f64(x),
            Expr::Div(a, b) => a.eval_f64(x) / b.eval_f64(x),
            Expr::Pow(a, p) => a.eval_f64(x).powi(*p as i32),
        }
    }

    /// Substitutes `subs[i]` for `Var(i)` where present, renumbering other
    /// variables through `remap`.
    pub fn substitute(&self, subs: &impl Fn(usize) -> Expr) -> Expr {
        match self {
            Expr::Num(r) => Expr::Num(r.clone()),
            Expr::Var(i) => subs(*i),
            Expr::Add(a, b) => Expr::Add(Box::new(a.substitute(subs)), Box::new(b.substitute(subs))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.substitute(subs)), Box::new(b.substitute(subs))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.substitute(subs)), Box::new(b.substitute(subs))),
            Expr::Div(a, b) => Expr::Div(Box::new(a.substitute(subs)), Box::new(b.substitute(subs))),
            Expr::Pow(a, p) => Expr::Pow(Box::new(a.substitute(subs)), *p),
        }
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// How a reaction's propensity is computed.
#[derive(Debug, Clone, PartialEq)]
pub enum PropensityKind {
    /// Stochastic mass action with the given rate constant.
    MassAction { rate: Rat },
    /// Evaluates `expr(x)` when `x >= nu_k` componentwise and 0 otherwise.
    GuardedExpression { expr: Expr },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropensityDescriptor {
    pub kind: PropensityKind,
}

impl PropensityDescriptor {
    pub fn mass_action(rate: Rat) -> Self {
        PropensityDescriptor { kind: PropensityKind::MassAction { rate } }
    }

    pub fn expression(expr: Expr) -> Self {
        PropensityDescriptor { kind: PropensityKind::GuardedExpression { expr } }
    }
}

/// A reaction network: species names, reactant matrix `V`, product matrix
/// `O` and one propensity descriptor per reaction. The stoichiometry matrix
/// is `S = O - V` columnwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionNetwork {
    pub species: Vec<String>,
    /// `reactant[i][k]`: molecules of species i consumed by reaction k.
    pub reactant: Vec<Vec<i64>>,
    /// `product[i][k]`: molecules of species i produced by reaction k.
    pub product: Vec<Vec<i64>>,
    pub propensities: Vec<PropensityDescriptor>,
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("support rule violated for reaction {reaction}: propensity not positive at {state:?}")]
    AssumptionViolated { reaction: usize, state: Vec<i64> },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl ReactionNetwork {
    pub fn new(
        species: Vec<String>,
        reactant: Vec<Vec<i64>>,
        product: Vec<Vec<i64>>,
        propensities: Vec<PropensityDescriptor>,
    ) -> Self {
        let d = species.len();
        assert!(d >= 1);
        assert_eq!(reactant.len(), d);
        assert_eq!(product.len(), d);
        let k = propensities.len();
        assert!(k >= 1);
        assert!(reactant.iter().all(|r| r.len() == k));
        assert!(product.iter().all(|r| r.len() == k));
        ReactionNetwork { species, reactant, product, propensities }
    }

    pub fn num_species(&self) -> usize {
        self.species.len()
    }

    pub fn num_reactions(&self) -> usize {
        self.propensities.len()
    }

    /// Stoichiometry `S = O - V` as a dense row-major matrix.
    pub fn stoichiometry(&self) -> Vec<Vec<i64>> {
        (0..self.num_species())
            .map(|i| {
                (0..self.num_reactions()).map(|k| self.product[i][k] - self.reactant[i][k]).collect()
            })
            .collect()
    }

    pub fn stoichiometry_column(&self, k: usize) -> Vec<i64> {
        (0..self.num_species()).map(|i| self.product[i][k] - self.reactant[i][k]).collect()
    }

    pub fn reactant_column(&self, k: usize) -> Vec<i64> {
        (0..self.num_species()).map(|i| self.reactant[i][k]).collect()
    }

    pub fn product_column(&self, k: usize) -> Vec<i64> {
        (0..self.num_species()).map(|i| self.product[i][k]).collect()
    }

    pub fn stoichiometry_matrix(&self) -> ExactMatrix {
        ExactMatrix::from_int_rows(&self.stoichiometry())
    }

    /// True when `x >= nu_k` componentwise, i.e. the reaction can fire.
    pub fn meets_support(&self, k: usize, x: &[i64]) -> bool {
        (0..self.num_species()).all(|i| x[i] >= self.reactant[i][k])
    }

    /// Exact propensity of reaction `k` at state `x`. Returns 0 whenever the
    /// support requirement fails; mass action is evaluated per the falling
    /// factorial formula.
    pub fn propensity_eval(&self, k: usize, x: &[i64]) -> Result<Rat, EvalError> {
        if !self.meets_support(k, x) {
            return Ok(Rat::zero());
        }
        match &self.propensities[k].kind {
            PropensityKind::MassAction { rate } => {
                let mut acc = rate.clone();
                for i in 0..self.num_species() {
                    let nu = self.reactant[i][k];
                    let mut fact = Int::one();
                    let mut fall = Int::one();
                    for j in 0..nu {
                        fall *= Int::from(x[i] - j);
                        fact *= Int::from(j + 1);
                    }
                    acc *= Rat::new(fall, fact);
                }
                Ok(acc)
            }
            PropensityKind::GuardedExpression { expr } => expr.eval(x),
        }
    }

    /// Floating-point propensity for simulation.
    pub fn propensity_f64(&self, k: usize, x: &[i64]) -> f64 {
        if !self.meets_support(k, x) {
            return 0.0;
        }
        match &self.propensities[k].kind {
            PropensityKind::MassAction { rate } => {
                let mut acc = rat_to_f64(rate);
                for i in 0..self.num_species() {
                    let nu = self.reactant[i][k];
                    for j in 0..nu {
                        acc *= (x[i] - j) as f64 / (j + 1) as f64;
                    }
                }
                acc
            }
            PropensityKind::GuardedExpression { expr } => expr.eval_f64(x),
        }
    }
}

/// Conservation data `(Gamma, c)`: columns of `Gamma` form a primitive
/// integer basis of the left nullspace of `S`, and `c = Gamma^T x0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservationData {
    /// d x n, stored as column vectors.
    pub gamma: Vec<Vec<Int>>,
    pub c: Vec<Int>,
    pub x0: Vec<i64>,
}

impl ConservationData {
    pub fn n(&self) -> usize {
        self.gamma.len()
    }

    /// `Gamma` as an exact d x n matrix.
    pub fn gamma_matrix(&self, d: usize) -> ExactMatrix {
        ExactMatrix::from_fn(d, self.gamma.len(), |r, c| Rat::from_integer(self.gamma[c][r].clone()))
    }

    /// True when state `x` satisfies `Gamma^T x = c`.
    pub fn satisfied_by(&self, x: &[i64]) -> bool {
        self.gamma.iter().zip(&self.c).all(|(col, cj)| {
            let dot: Int = col.iter().zip(x).map(|(g, &xi)| g * Int::from(xi)).sum();
            dot == *cj
        })
    }
}

/// Computes the conservation data for `network` started at `x0`.
pub fn conservation_data(network: &ReactionNetwork, x0: &[i64]) -> ConservationData {
    assert_eq!(x0.len(), network.num_species());
    let s = network.stoichiometry_matrix();
    let gamma = left_nullspace_basis(&s);
    let c = gamma
        .iter()
        .map(|col| col.iter().zip(x0).map(|(g, &xi)| g * Int::from(xi)).sum())
        .collect();
    ConservationData { gamma, c, x0: x0.to_vec() }
}

/// A permutation of `{0..d-1}` stored as its image: position `l` of the
/// permuted state holds the copy-number of species `image[l]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    pub image: Vec<usize>,
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one_based: Vec<String> = self.image.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "({})", one_based.join(","))
    }
}

impl Permutation {
    pub fn identity(d: usize) -> Self {
        Permutation { image: (0..d).collect() }
    }

    pub fn new(image: Vec<usize>) -> Self {
        let d = image.len();
        let mut seen = vec![false; d];
        for &i in &image {
            assert!(i < d && !seen[i], "image must be a bijection");
            seen[i] = true;
        }
        Permutation { image }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.image.len()];
        for (l, &i) in self.image.iter().enumerate() {
            inv[i] = l;
        }
        Permutation { image: inv }
    }

    /// Applies `P_sigma` to a state: `(P x)_l = x_{sigma(l)}`.
    pub fn apply<T: Clone>(&self, x: &[T]) -> Vec<T> {
        self.image.iter().map(|&i| x[i].clone()).collect()
    }

    /// Applies `P_sigma^T`, the inverse action.
    pub fn apply_inverse<T: Clone>(&self, x: &[T]) -> Vec<T> {
        self.inverse().apply(x)
    }

    /// Composition: first apply `self`, then `other` on the result, as a
    /// single permutation.
    pub fn then(&self, other: &Permutation) -> Permutation {
        Permutation { image: other.image.iter().map(|&l| self.image[l]).collect() }
    }
}

/// Permutes a network: rows of `V` and `O` are reordered and propensity `k`
/// evaluates the original propensity at `P_sigma^T x`.
pub fn permute_network(network: &ReactionNetwork, sigma: &Permutation) -> ReactionNetwork {
    assert_eq!(sigma.len(), network.num_species());
    let inv = sigma.inverse();
    let species = sigma.apply(&network.species);
    let reactant = sigma.apply(&network.reactant);
    let product = sigma.apply(&network.product);
    let propensities = network
        .propensities
        .iter()
        .map(|p| match &p.kind {
            PropensityKind::MassAction { rate } => PropensityDescriptor::mass_action(rate.clone()),
            PropensityKind::GuardedExpression { expr } => {
                // Species i of the original sits at position inv(i).
                let remapped = expr.substitute(&|i| Expr::Var(inv.image[i]));
                PropensityDescriptor::expression(remapped)
            }
        })
        .collect();
    ReactionNetwork::new(species, reactant, product, propensities)
}

/// The inverse network: arrows flipped, every propensity replaced by mass
/// action with rate one.
pub fn inverse_network(network: &ReactionNetwork) -> ReactionNetwork {
    ReactionNetwork::new(
        network.species.clone(),
        network.product.clone(),
        network.reactant.clone(),
        network.propensities.iter().map(|_| PropensityDescriptor::mass_action(Rat::one())).collect(),
    )
}

/// Sampling configuration for the support-rule validation.
#[derive(Debug, Clone)]
pub struct SupportRuleConfig {
    /// Per-coordinate excess over the reactant requirement.
    pub box_excess: i64,
    pub seed: u64,
}

impl Default for SupportRuleConfig {
    fn default() -> Self {
        SupportRuleConfig { box_excess: 8, seed: 0x5eed }
    }
}

/// One violation of the support rule, with a witness state.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportViolation {
    pub reaction: usize,
    pub state: Vec<i64>,
    pub direction: SupportDirection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportDirection {
    /// Propensity failed to be positive although `x >= nu_k`.
    ZeroInside,
    /// Propensity positive although `x >= nu_k` fails (cannot happen with
    /// the guard, kept for report completeness).
    PositiveOutside,
}

#[derive(Debug, Clone)]
pub struct SupportReport {
    pub samples_per_reaction: usize,
    pub violations: Vec<SupportViolation>,
}

impl SupportReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the positivity assumption by sampling: for each reaction, the
/// propensity must be strictly positive at sampled states `x >= nu_k` and
/// zero at sampled states violating the support requirement.
pub fn validate_support_rule(
    network: &ReactionNetwork,
    sample_budget: usize,
    config: &SupportRuleConfig,
) -> Result<SupportReport, EvalError> {
    assert!(sample_budget >= 1);
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed);
    let d = network.num_species();
    let mut violations = Vec::new();
    for k in 0..network.num_reactions() {
        for _ in 0..sample_budget {
            let x: Vec<i64> = (0..d)
                .map(|i| network.reactant[i][k] + rng.gen_range(0..=config.box_excess))
                .collect();
            match network.propensity_eval(k, &x) {
                Ok(v) if v.is_positive() => {}
                Ok(_) => violations.push(SupportViolation {
                    reaction: k,
                    state: x,
                    direction: SupportDirection::ZeroInside,
                }),
                Err(e) => return Err(e),
            }
        }
        // Below-support samples must give zero.
        if network.reactant_column(k).iter().any(|&v| v > 0) {
            for _ in 0..sample_budget.min(64) {
                let mut x: Vec<i64> = (0..d)
                    .map(|i| network.reactant[i][k] + rng.gen_range(0..=config.box_excess))
                    .collect();
                let deficient: Vec<usize> = (0..d).filter(|&i| network.reactant[i][k] > 0).collect();
                let pick = deficient[rng.gen_range(0..deficient.len())];
                x[pick] = rng.gen_range(0..network.reactant[pick][k]);
                if let Ok(v) = network.propensity_eval(k, &x) {
                    if v.is_positive() {
                        violations.push(SupportViolation {
                            reaction: k,
                            state: x,
                            direction: SupportDirection::PositiveOutside,
                        });
                    }
                }
            }
        }
    }
    Ok(SupportReport { samples_per_reaction: sample_budget, violations })
}
