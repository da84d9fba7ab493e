use std::collections::HashSet;

use crate::expr::parse_expr;
use crate::lexer::{tokenize, Cursor, ParseError, Span, Tok};

use super::{Assignment, Branch, ConstDecl, GuardedCommand, LabelDef, ModelAst, Module, VarDecl};

const UNSUPPORTED_MODEL_TYPES: &[&str] = &["mdp", "ctmc", "pta", "pa", "smg", "lts", "probabilistic", "stochastic", "nondeterministic"];
const UNSUPPORTED_BLOCKS: &[&str] = &["formula", "rewards", "global", "system", "init"];

/// Parses model text into an AST. `//` comments and whitespace are ignored.
pub fn parse_model(text: &str) -> Result<ModelAst, ParseError> {
    let mut cur = Cursor::new(tokenize(text)?);
    if !cur.at_keyword("dtmc") {
        if let Tok::Ident(w) = cur.peek() {
            if UNSUPPORTED_MODEL_TYPES.contains(&w.as_str()) {
                return Err(ParseError::new(
                    cur.span(),
                    format!("model type `{w}` is not supported; only `dtmc`"),
                ));
            }
        }
        return Err(cur.unexpected("expected model type `dtmc`"));
    }
    cur.next();

    let mut constants = Vec::new();
    let mut module: Option<Module> = None;
    let mut labels = Vec::new();
    let mut names: HashSet<String> = HashSet::new();

    let mut declare = |name: &str, span: Span| -> Result<(), ParseError> {
        if names.insert(name.to_string()) {
            Ok(())
        } else {
            Err(ParseError::new(span, format!("duplicate declaration of `{name}`")))
        }
    };

    loop {
        match cur.peek().clone() {
            Tok::Eof => break,
            Tok::Ident(w) if w == "const" => {
                cur.next();
                let c = parse_const(&mut cur)?;
                declare(&c.name, c.span)?;
                constants.push(c);
            }
            Tok::Ident(w) if w == "module" => {
                let span = cur.next().span;
                if module.is_some() {
                    return Err(ParseError::new(span, "only a single module is supported"));
                }
                let m = parse_module(&mut cur)?;
                for v in &m.variables {
                    declare(&v.name, v.span)?;
                }
                module = Some(m);
            }
            Tok::Ident(w) if w == "label" => {
                cur.next();
                let l = parse_label(&mut cur)?;
                if labels.iter().any(|o: &LabelDef| o.name == l.name) {
                    return Err(ParseError::new(l.span, format!("duplicate label \"{}\"", l.name)));
                }
                labels.push(l);
            }
            Tok::Ident(w) if UNSUPPORTED_BLOCKS.contains(&w.as_str()) => {
                return Err(ParseError::new(cur.span(), format!("`{w}` declarations are not supported")));
            }
            _ => return Err(cur.unexpected("expected `const`, `module` or `label`")),
        }
    }

    let module = module.ok_or_else(|| ParseError::new(cur.span(), "model has no module"))?;
    Ok(ModelAst {
        constants,
        module,
        labels,
    })
}

fn parse_const(cur: &mut Cursor) -> Result<ConstDecl, ParseError> {
    // Optional type keyword: `const int N = 3;`
    if matches!(cur.peek(), Tok::Ident(w) if w == "int" || w == "double" || w == "bool")
        && matches!(cur.peek_at(1), Tok::Ident(_))
    {
        cur.next();
    }
    let (name, span) = cur.expect_ident("constant name")?;
    if !cur.eat(&Tok::Eq) {
        return Err(cur.unexpected(&format!("expected `=` and a value for constant `{name}`")));
    }
    let value = parse_expr(cur)?;
    cur.expect(&Tok::Semi, "after constant declaration")?;
    Ok(ConstDecl { name, value, span })
}

fn parse_label(cur: &mut Cursor) -> Result<LabelDef, ParseError> {
    let span = cur.span();
    let name = match cur.peek().clone() {
        Tok::Str(s) => {
            cur.next();
            s
        }
        _ => return Err(cur.unexpected("expected quoted label name")),
    };
    cur.expect(&Tok::Eq, "after label name")?;
    let expr = parse_expr(cur)?;
    cur.expect(&Tok::Semi, "after label definition")?;
    Ok(LabelDef { name, expr, span })
}

fn parse_module(cur: &mut Cursor) -> Result<Module, ParseError> {
    let (name, _) = cur.expect_ident("module name")?;
    let mut variables = Vec::new();
    let mut commands = Vec::new();
    loop {
        if cur.eat_keyword("endmodule") {
            break;
        }
        match cur.peek() {
            Tok::LBracket => commands.push(parse_command(cur)?),
            Tok::Ident(_) if commands.is_empty() => variables.push(parse_var(cur)?),
            Tok::Ident(_) => {
                return Err(cur.unexpected("variable declarations must precede commands; expected `[`"))
            }
            _ => return Err(cur.unexpected("expected a variable declaration, a command or `endmodule`")),
        }
    }
    Ok(Module {
        name,
        variables,
        commands,
    })
}

fn parse_var(cur: &mut Cursor) -> Result<VarDecl, ParseError> {
    let (name, span) = cur.expect_ident("variable name")?;
    cur.expect(&Tok::Colon, "after variable name")?;
    if cur.at_keyword("bool") {
        return Err(cur.unexpected("boolean variables are not supported; expected `[`"));
    }
    cur.expect(&Tok::LBracket, "to open variable range")?;
    let low = parse_expr(cur)?;
    cur.expect(&Tok::DotDot, "in variable range")?;
    let high = parse_expr(cur)?;
    cur.expect(&Tok::RBracket, "to close variable range")?;
    let init = if cur.eat_keyword("init") {
        Some(parse_expr(cur)?)
    } else {
        None
    };
    cur.expect(&Tok::Semi, "after variable declaration")?;
    Ok(VarDecl {
        name,
        low,
        high,
        init,
        span,
    })
}

fn parse_command(cur: &mut Cursor) -> Result<GuardedCommand, ParseError> {
    let span = cur.expect(&Tok::LBracket, "to start command")?;
    if let Tok::Ident(action) = cur.peek() {
        return Err(ParseError::new(
            cur.span(),
            format!("synchronization label `{action}` is not supported"),
        ));
    }
    cur.expect(&Tok::RBracket, "after `[`")?;
    let guard = parse_expr(cur)?;
    cur.expect(&Tok::Arrow, "after guard")?;
    let mut branches = Vec::new();
    loop {
        branches.push(parse_branch(cur)?);
        if !cur.eat(&Tok::Plus) {
            break;
        }
    }
    cur.expect(&Tok::Semi, "to end command")?;
    Ok(GuardedCommand {
        guard,
        branches,
        span,
    })
}

fn starts_update(cur: &Cursor) -> bool {
    let identity = cur.at_keyword("true") && matches!(cur.peek_at(1), Tok::Semi | Tok::Plus);
    let assignment = cur.at(&Tok::LParen)
        && matches!(cur.peek_at(1), Tok::Ident(_))
        && cur.peek_at(2) == &Tok::Prime;
    identity || assignment
}

fn parse_branch(cur: &mut Cursor) -> Result<Branch, ParseError> {
    let prob = if starts_update(cur) {
        None
    } else {
        let p = parse_expr(cur)?;
        cur.expect(&Tok::Colon, "after branch probability")?;
        Some(p)
    };
    let assignments = parse_update(cur)?;
    Ok(Branch { prob, assignments })
}

fn parse_update(cur: &mut Cursor) -> Result<Vec<Assignment>, ParseError> {
    if cur.eat_keyword("true") {
        return Ok(Vec::new());
    }
    let mut out: Vec<Assignment> = Vec::new();
    loop {
        cur.expect(&Tok::LParen, "to open assignment")?;
        let (variable, span) = cur.expect_ident("updated variable")?;
        cur.expect(&Tok::Prime, "after updated variable")?;
        cur.expect(&Tok::Eq, "in assignment")?;
        let value = parse_expr(cur)?;
        cur.expect(&Tok::RParen, "to close assignment")?;
        if out.iter().any(|a| a.variable == variable) {
            return Err(ParseError::new(span, format!("`{variable}` assigned twice in one update")));
        }
        out.push(Assignment {
            variable,
            value,
            span,
        });
        if !cur.eat(&Tok::And) {
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "dtmc module m x:[0..0] init 0; [] true -> true; endmodule";

    #[test]
    fn minimal_model() {
        let ast = parse_model(MINIMAL).unwrap();
        assert_eq!(ast.module.variables.len(), 1);
        assert_eq!(ast.module.commands.len(), 1);
        assert!(ast.module.commands[0].branches[0].assignments.is_empty());
        assert!(ast.module.commands[0].branches[0].prob.is_none());
    }

    #[test]
    fn missing_semicolon_at_end_of_command() {
        let err = parse_model("dtmc module m s:[0..1] init 0;\n[] s=0 -> 0.3:(s'=0)\nendmodule").unwrap_err();
        assert!(err.message.contains("expected `;` to end command"), "{err}");
        assert_eq!((err.span.line, err.span.column), (3, 1));

        let err = parse_model("[] s=0 -> 0.3:(s'=0)").unwrap_err();
        assert_eq!(err.span.line, 1);
    }

    #[test]
    fn bare_command_missing_semicolon() {
        let src = "dtmc module m s:[0..1]; [] s=0 -> 0.3:(s'=0)";
        let err = parse_model(src).unwrap_err();
        assert!(err.message.contains("to end command"));
        assert!(err.message.contains("end of input"));
    }

    #[test]
    fn duplicate_declarations() {
        let err = parse_model("dtmc const s = 1; module m s:[0..1]; endmodule").unwrap_err();
        assert!(err.message.contains("duplicate declaration of `s`"));
        let err = parse_model(
            "dtmc module m s:[0..1]; endmodule label \"a\" = true; label \"a\" = false;",
        )
        .unwrap_err();
        assert!(err.message.contains("duplicate label"));
    }

    #[test]
    fn unsupported_constructs() {
        assert!(parse_model("mdp module m endmodule").unwrap_err().message.contains("not supported"));
        let two = "dtmc module a endmodule module b endmodule";
        assert!(parse_model(two).unwrap_err().message.contains("single module"));
        let sync = "dtmc module m s:[0..1]; [go] true -> true; endmodule";
        assert!(parse_model(sync).unwrap_err().message.contains("synchronization"));
    }

    #[test]
    fn multi_assignment_updates() {
        let src = "dtmc const p = 0.5; module m a:[0..1]; b:[0..2] init 1; \
                   [] a=0 -> p:(a'=1)&(b'=b+1) + 1-p:true; [] a=1 -> (a'=0); endmodule";
        let ast = parse_model(src).unwrap();
        assert_eq!(ast.constants.len(), 1);
        let c = &ast.module.commands[0];
        assert_eq!(c.branches.len(), 2);
        assert_eq!(c.branches[0].assignments.len(), 2);
        assert!(c.branches[1].assignments.is_empty());
        assert!(ast.module.commands[1].branches[0].prob.is_none());
    }
}
