mod common;

use basketcheck::prism::{build_dtmc, parse_model, BuildError, BuildOptions};
use basketcheck::{load_model, LoadError};
use common::{basket, fixture, q};

#[test]
fn builds_fourteen_states() {
    let d = basket();
    assert_eq!(d.num_states(), 14);
    assert_eq!(d.num_transitions(), 23);
    assert_eq!(d.init_state(), 0);
    assert!(d.validate().is_ok());
}

#[test]
fn rows_match_the_source() {
    let d = basket();
    let row = |s: usize| d.row(s).iter().map(|t| (t.target, t.exact.clone())).collect::<Vec<_>>();
    assert_eq!(row(4), vec![(7, q(13, 20)), (5, q(7, 20))]);
    assert_eq!(row(10), vec![(8, q(1, 4)), (9, q(1, 4)), (11, q(1, 2))]);
    assert_eq!(row(13), vec![(13, q(1, 1))]);
    assert_eq!(row(1), vec![(2, q(1, 1))]);
}

#[test]
fn dot_export_lists_every_edge() {
    let dot = basket().to_dot();
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches(" -> ").count(), 23);
    assert!(dot.contains("0.65"));
    assert!(dot.contains("peripheries=2"));
}

#[test]
fn printed_ast_reparses_to_the_same_ast() {
    let ast = parse_model(basketcheck::SHOPPING_BASKET_MODEL).unwrap();
    let again = parse_model(&ast.to_string()).unwrap();
    assert_eq!(ast, again);
    let d1 = build_dtmc(&ast, BuildOptions::default()).unwrap();
    let d2 = build_dtmc(&again, BuildOptions::default()).unwrap();
    assert_eq!(d1.rows(), d2.rows());
}

#[test]
fn named_fixture_defines_one_label_per_state() {
    let text = std::fs::read_to_string(fixture("shopping_basket_named.pm")).unwrap();
    let d = load_model(&text, BuildOptions::default()).unwrap();
    assert_eq!(d.labels().len(), 14);
    assert_eq!(d.labels()["CompleteCheckout"].to_vec(), vec![12]);
    assert_eq!(d.labels()["BrowseShop"].to_vec(), vec![0]);
}

fn build_error(body: &str) -> BuildError {
    let text = format!("dtmc\nmodule m\n  s : [0..3] init 0;\n{body}\nendmodule\n");
    match load_model(&text, BuildOptions::default()) {
        Err(LoadError::Build(e)) => e,
        other => panic!("expected a build error, got {other:?}"),
    }
}

#[test]
fn overlapping_guards_are_rejected() {
    let e = build_error("  [] s<3 -> (s'=s+1);\n  [] s=0 -> (s'=0);\n  [] s=3 -> true;");
    assert!(matches!(e, BuildError::OverlappingGuards { .. }), "{e}");
    assert!(e.to_string().contains("s=0"));
}

#[test]
fn branch_sums_must_be_one() {
    let e = build_error("  [] s<3 -> 0.5:(s'=s+1) + 0.4:(s'=0);\n  [] s=3 -> true;");
    assert!(e.to_string().contains("sum to 0.9"), "{e}");
}

#[test]
fn updates_must_stay_in_range() {
    let e = build_error("  [] s<3 -> 0.5:(s'=20) + 0.5:(s'=0);\n  [] s=3 -> true;");
    let msg = e.to_string();
    assert!(msg.contains("line 4") && msg.contains("outside its range"), "{msg}");
}

#[test]
fn deadlocks_need_opt_in() {
    let body = "  [] s<3 -> (s'=s+1);";
    let e = build_error(body);
    assert!(e.to_string().contains("deadlock"), "{e}");
    let text = format!("dtmc\nmodule m\n  s : [0..3] init 0;\n{body}\nendmodule\n");
    let opts = BuildOptions { fix_deadlocks: true, ..Default::default() };
    let d = load_model(&text, opts).unwrap();
    assert_eq!(d.row(3)[0].target, 3);
}

#[test]
fn merge_uniform_splits_overlaps() {
    let text = "dtmc\nmodule m\n  s : [0..2] init 0;\n  [] s=0 -> (s'=1);\n  [] s=0 -> (s'=2);\n  [] s>0 -> true;\nendmodule\n";
    let opts = BuildOptions { merge_uniform: true, ..Default::default() };
    let d = load_model(text, opts).unwrap();
    assert_eq!(d.row(0).len(), 2);
    assert!(d.row(0).iter().all(|t| t.exact == q(1, 2)));
}

#[test]
fn missing_semicolon_is_a_syntax_error() {
    let text = "dtmc\nmodule m\n  s : [0..13] init 0;\n  [] s=0 -> 0.3:(s'=0)\nendmodule\n";
    match load_model(text, BuildOptions::default()) {
        Err(LoadError::Parse(e)) => assert!(e.message.contains("`;` to end command"), "{e}"),
        other => panic!("expected a parse error, got {other:?}"),
    }
}
