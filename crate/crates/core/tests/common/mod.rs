#![allow(dead_code)]

use std::path::PathBuf;

use basketcheck::expr::parse_standalone;
use basketcheck::pctl::bind_formula;
use basketcheck::prism::BuildOptions;
use basketcheck::{Dtmc, StateSet};
use num_bigint::BigInt;
use num_rational::BigRational;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn basket() -> Dtmc {
    basketcheck::load_model(basketcheck::SHOPPING_BASKET_MODEL, BuildOptions::default()).unwrap()
}

pub fn goal(dtmc: &Dtmc, formula: &str) -> StateSet {
    let expr = bind_formula(&parse_standalone(formula).unwrap(), dtmc).unwrap();
    dtmc.satisfaction_set(&expr).unwrap()
}

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Reachability probabilities from an independent rational elimination,
/// indexed by state, for the shopping-basket chain.
pub fn oracle(goal: &str) -> Vec<BigRational> {
    let v: &[(i64, i64)] = match goal {
        "s=12" => &[(10, 23), (10, 23), (10, 23), (33, 46), (7, 46), (10, 23), (1, 1), (0, 1), (1, 1), (1, 1), (1, 1), (1, 1), (1, 1), (0, 1)],
        "s=9" => &[(8, 23), (8, 23), (8, 23), (66, 115), (14, 115), (8, 23), (4, 5), (0, 1), (3, 5), (1, 1), (2, 5), (0, 1), (0, 1), (0, 1)],
        "s=7" => &[(13, 23), (13, 23), (13, 23), (13, 46), (39, 46), (13, 23), (0, 1), (1, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1)],
        "s=6" => &[(10, 23), (10, 23), (10, 23), (33, 46), (7, 46), (10, 23), (1, 1), (0, 1), (2, 3), (2, 3), (1, 3), (0, 1), (0, 1), (0, 1)],
        "s=4" => &[(2, 3), (2, 3), (2, 3), (1, 3), (1, 1), (2, 3), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1)],
        "s=13" => &[(1, 1); 14],
        other => panic!("no oracle for {other}"),
    };
    v.iter().map(|&(n, d)| q(n, d)).collect()
}
