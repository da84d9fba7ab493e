//! A small explicit-state probabilistic model checker for discrete-time
//! Markov chains.
//!
//! Models are written in a subset of the PRISM language (one `dtmc` module,
//! bounded integer variables, guarded commands) and properties in the
//! reachability fragment of PCTL (`P~p [F φ]`, `P=? [F φ]`, `F<=k`, and
//! `{ψ}` filters).
//!
//! ```
//! use basketcheck::{engine, pctl, prism};
//!
//! let ast = prism::parse_model(basketcheck::SHOPPING_BASKET_MODEL).unwrap();
//! let dtmc = prism::build_dtmc(&ast, Default::default()).unwrap();
//! let prop = pctl::parse_property("P=? [F s=13]").unwrap();
//! let bound = pctl::bind(&prop, &dtmc).unwrap();
//! let result = engine::check_property(&dtmc, &bound, &Default::default()).unwrap();
//! assert_eq!(result.values[dtmc.init_state()], 1.0);
//! ```

pub mod cli;
pub mod engine;
pub mod expr;
pub mod lexer;
pub mod model;
pub mod pctl;
pub mod prism;
pub mod report;
pub mod sim;

pub use engine::{check_property, Method, SolveOptions, VerificationResult};
pub use model::{Dtmc, ProbVector, StateSet, StateSpace};

/// The shopping-basket model shipped in `fixtures/shopping_basket.pm`.
pub const SHOPPING_BASKET_MODEL: &str = include_str!("../fixtures/shopping_basket.pm");

/// The ten shopping-basket properties shipped in `fixtures/shopping_basket.pctl`.
pub const SHOPPING_BASKET_PROPERTIES: &str = include_str!("../fixtures/shopping_basket.pctl");

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error(transparent)]
    Parse(#[from] lexer::ParseError),
    #[error(transparent)]
    Build(#[from] prism::BuildError),
}

/// Parses and builds a model in one step.
pub fn load_model(text: &str, options: prism::BuildOptions) -> Result<Dtmc, LoadError> {
    let ast = prism::parse_model(text)?;
    Ok(prism::build_dtmc(&ast, options)?)
}
