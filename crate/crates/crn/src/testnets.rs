//! Networks used across unit tests.

use crate::linalg::{rat, Rat};
use crate::model::{Expr, PropensityDescriptor, ReactionNetwork};

/// `0 -> S1 + S2 -> 0` with unit rates.
pub fn atp_network() -> ReactionNetwork {
    ReactionNetwork::new(
        vec!["S1".into(), "S2".into()],
        vec![vec![0, 1], vec![0, 1]],
        vec![vec![1, 0], vec![1, 0]],
        vec![
            PropensityDescriptor::mass_action(rat(1)),
            PropensityDescriptor::mass_action(rat(1)),
        ],
    )
}

/// `0 -> 2S -> 0` with unit rates: molecules move in pairs.
pub fn two_s_network() -> ReactionNetwork {
    ReactionNetwork::new(
        vec!["S".into()],
        vec![vec![0, 2]],
        vec![vec![2, 0]],
        vec![
            PropensityDescriptor::mass_action(rat(1)),
            PropensityDescriptor::mass_action(rat(1)),
        ],
    )
}

/// `0 -> S` at rate `a`, `S -> 0` at rate `b`.
pub fn birth_death(a: Rat, b: Rat) -> ReactionNetwork {
    ReactionNetwork::new(
        vec!["S".into()],
        vec![vec![0, 1]],
        vec![vec![1, 0]],
        vec![PropensityDescriptor::mass_action(a), PropensityDescriptor::mass_action(b)],
    )
}

/// The gene-expression family. Species Goff, Gon, M, P. Variant 0 has no
/// feedback; variants 1-4 add protein feedback to one reaction by putting a
/// catalytic P on both sides; variant 5 also transcribes in the off state
/// and gates both switches and translation on P.
pub fn gene_network(variant: usize) -> ReactionNetwork {
    let species = vec!["Goff".to_string(), "Gon".into(), "M".into(), "P".into()];
    // Base reactions: on, off, transcribe, translate, degrade M, degrade P.
    // Rows: Goff, Gon, M, P.
    let mut reactant = vec![
        vec![1, 0, 0, 0, 0, 0],
        vec![0, 1, 1, 0, 0, 0],
        vec![0, 0, 0, 1, 1, 0],
        vec![0, 0, 0, 0, 0, 1],
    ];
    let mut product = vec![
        vec![0, 1, 0, 0, 0, 0],
        vec![1, 0, 1, 0, 0, 0],
        vec![0, 0, 1, 1, 0, 0],
        vec![0, 0, 0, 1, 0, 0],
    ];
    let add_p_both_sides = |reactant: &mut Vec<Vec<i64>>, product: &mut Vec<Vec<i64>>, k: usize| {
        reactant[3][k] += 1;
        product[3][k] += 1;
    };
    match variant {
        0 => {}
        1 => add_p_both_sides(&mut reactant, &mut product, 0),
        2 => add_p_both_sides(&mut reactant, &mut product, 1),
        3 => add_p_both_sides(&mut reactant, &mut product, 2),
        4 => add_p_both_sides(&mut reactant, &mut product, 3),
        5 => {
            // Feedback on both switches and translation, plus transcription
            // from the off state.
            add_p_both_sides(&mut reactant, &mut product, 0);
            add_p_both_sides(&mut reactant, &mut product, 1);
            add_p_both_sides(&mut reactant, &mut product, 3);
            for row in reactant.iter_mut() {
                row.push(0);
            }
            for row in product.iter_mut() {
                row.push(0);
            }
            let k = 6;
            reactant[0][k] = 1; // Goff catalyses
            product[0][k] = 1;
            product[2][k] += 1; // produces M
        }
        _ => panic!("unknown gene network variant"),
    }
    let k = reactant[0].len();
    let props = (0..k)
        .map(|j| {
            // Feedback reactions carry a Hill factor; the guard added by the
            // catalytic P keeps the support rule intact.
            let base = PropensityDescriptor::mass_action(rat(1));
            let feedback = |kk: usize| -> bool {
                match variant {
                    1 => kk == 0,
                    2 => kk == 1,
                    3 => kk == 2,
                    4 => kk == 3,
                    5 => kk == 0 || kk == 1 || kk == 3,
                    _ => false,
                }
            };
            if feedback(j) {
                // theta * x4^2 / (1 + x4^2), theta = 2.
                let x4 = || Box::new(Expr::Var(3));
                let expr = Expr::Div(
                    Box::new(Expr::Mul(Box::new(Expr::Num(rat(2))), Box::new(Expr::Pow(x4(), 2)))),
                    Box::new(Expr::Add(Box::new(Expr::Num(rat(1))), Box::new(Expr::Pow(x4(), 2)))),
                );
                PropensityDescriptor::expression(expr)
            } else {
                base
            }
        })
        .collect();
    ReactionNetwork::new(species, reactant, product, props)
}

/// The toxin-antitoxin fast subnetwork on (M, T, A):
/// `M -> M + T + A` at rate `theta1 x1` and `T + A -> 0` at `theta2 x2 x3`.
pub fn toxin_fast_subnetwork() -> ReactionNetwork {
    ReactionNetwork::new(
        vec!["M".into(), "T".into(), "A".into()],
        vec![vec![1, 0], vec![0, 1], vec![0, 1]],
        vec![vec![1, 0], vec![1, 0], vec![1, 0]],
        vec![
            PropensityDescriptor::mass_action(rat(100)),
            PropensityDescriptor::mass_action(rat(10)),
        ],
    )
}

/// The full toxin-antitoxin network on (M, T, A, P) from the multiscale
/// simulation example; reactions 2 and 3 (0-based 1 and 2) are fast.
pub fn toxin_network() -> ReactionNetwork {
    // Reactions: 1: 0->M @ 20/(1+x3); 2: M->M+T+A @ 100 x1;
    // 3: T+A->0 @ 10 x2 x3; 4: M->0 @ 2 x1; 5: T->0 @ 5 x2; 6: A->0 @ x3;
    // 7: T->P @ 0.5 x2; 8: P->0 @ 0.1 x4.
    let reactant = vec![
        vec![0, 1, 0, 1, 0, 0, 0, 0],
        vec![0, 0, 1, 0, 1, 0, 1, 0],
        vec![0, 0, 1, 0, 0, 1, 0, 0],
        vec![0, 0, 0, 0, 0, 0, 0, 1],
    ];
    let product = vec![
        vec![1, 1, 0, 0, 0, 0, 0, 0],
        vec![0, 1, 0, 0, 0, 0, 0, 0],
        vec![0, 1, 0, 0, 0, 0, 0, 0],
        vec![0, 0, 0, 0, 0, 0, 1, 0],
    ];
    let transcription = Expr::Div(
        Box::new(Expr::Num(rat(20))),
        Box::new(Expr::Add(Box::new(Expr::Num(rat(1))), Box::new(Expr::Var(2)))),
    );
    let props = vec![
        PropensityDescriptor::expression(transcription),
        PropensityDescriptor::mass_action(rat(100)),
        PropensityDescriptor::mass_action(rat(10)),
        PropensityDescriptor::mass_action(rat(2)),
        PropensityDescriptor::mass_action(rat(5)),
        PropensityDescriptor::mass_action(rat(1)),
        PropensityDescriptor::mass_action(crate::linalg::rat_frac(1, 2)),
        PropensityDescriptor::mass_action(crate::linalg::rat_frac(1, 10)),
    ];
    ReactionNetwork::new(
        vec!["M".into(), "T".into(), "A".into(), "P".into()],
        reactant,
        product,
        props,
    )
}
