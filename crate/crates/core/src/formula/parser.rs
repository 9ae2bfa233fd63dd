//! Recursive-descent parser for the surface syntax:
//!
//! ```text
//! formula := disj
//! disj    := conj ("||" conj)*
//! conj    := unary ("&&" unary)*
//! unary   := "!" unary | ("EX"|"AX"|"EF"|"AF"|"EG"|"AG") unary | atom
//! atom    := "true" | "false" | ident | "(" formula ")"
//!          | ("E"|"A") "[" formula "U" formula "]"
//! ```

use super::{Formula, Operator};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message} (found {token})")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    /// The offending token, or `end of input`.
    pub token: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Bang,
    AndAnd,
    OrOr,
    LParen,
    RParen,
    LBracket,
    RBracket,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Bang => "`!`".into(),
            Tok::AndAnd => "`&&`".into(),
            Tok::OrOr => "`||`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (start_line, start_col) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut ident = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    ident.push(c);
                    bump(&mut chars);
                } else {
                    break;
                }
            }
            Tok::Ident(ident)
        } else {
            bump(&mut chars);
            match c {
                '!' => Tok::Bang,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '&' | '|' if chars.peek() == Some(&c) => {
                    bump(&mut chars);
                    if c == '&' {
                        Tok::AndAnd
                    } else {
                        Tok::OrOr
                    }
                }
                other => {
                    return Err(ParseError {
                        line: start_line,
                        column: start_col,
                        token: format!("`{other}`"),
                        message: "unexpected character".into(),
                    })
                }
            }
        };
        out.push(Spanned {
            tok,
            line: start_line,
            column: start_col,
        });
    }
    out.push(Spanned {
        tok: Tok::End,
        line,
        column,
    });
    Ok(out)
}

const PREFIX: [(&str, Operator); 6] = [
    ("EX", Operator::EX),
    ("AX", Operator::AX),
    ("EF", Operator::EF),
    ("AF", Operator::AF),
    ("EG", Operator::EG),
    ("AG", Operator::AG),
];

fn is_reserved(word: &str) -> bool {
    matches!(word, "true" | "false" | "U") || PREFIX.iter().any(|(w, _)| *w == word)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn advance(&mut self) -> Tok {
        let tok = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError {
            line: s.line,
            column: s.column,
            token: s.tok.describe(),
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conj()?;
        while *self.peek() == Tok::OrOr {
            self.advance();
            lhs = Formula::or(lhs, self.conj()?);
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::AndAnd {
            self.advance();
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Bang => {
                self.advance();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Ident(word) => {
                if let Some((_, op)) = PREFIX.iter().find(|(w, _)| w == word) {
                    let op = *op;
                    self.advance();
                    Ok(Formula::compound(op, vec![self.unary()?]))
                } else {
                    self.atom()
                }
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.advance();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(word)
                if (word == "E" || word == "A") && *self.peek_at(1) == Tok::LBracket =>
            {
                self.advance();
                self.advance();
                let lhs = self.formula()?;
                if *self.peek() != Tok::Ident("U".into()) {
                    return Err(self.error("expected `U`"));
                }
                self.advance();
                let rhs = self.formula()?;
                self.expect(Tok::RBracket, "`]`")?;
                Ok(if word == "E" {
                    Formula::eu(lhs, rhs)
                } else {
                    Formula::au(lhs, rhs)
                })
            }
            Tok::Ident(word) if word == "true" => {
                self.advance();
                Ok(Formula::tt())
            }
            Tok::Ident(word) if word == "false" => {
                self.advance();
                Ok(Formula::ff())
            }
            Tok::Ident(word) if !is_reserved(&word) => {
                self.advance();
                Ok(Formula::prop(word))
            }
            _ => Err(self.error("expected a formula")),
        }
    }
}

/// Parses a formula from its surface syntax.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut parser = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let f = parser.formula()?;
    if *parser.peek() != Tok::End {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(name: &str) -> Formula {
        Formula::prop(name)
    }

    #[test]
    fn parses_true() {
        let f = parse_formula("true").unwrap();
        assert_eq!(f, Formula::tt());
        assert!(f.children().is_empty());
    }

    #[test]
    fn parses_game_properties() {
        assert_eq!(
            parse_formula("EG (!win && EF win)").unwrap(),
            Formula::eg(Formula::and(Formula::not(p("win")), Formula::ef(p("win"))))
        );
        assert_eq!(
            parse_formula("E [!d1 U win]").unwrap(),
            Formula::eu(Formula::not(p("d1")), p("win"))
        );
    }

    #[test]
    fn missing_operand_is_reported() {
        let err = parse_formula("EX").unwrap_err();
        assert_eq!((err.line, err.column), (1, 3));
        assert_eq!(err.token, "end of input");
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(
            parse_formula("a || b && !c").unwrap(),
            Formula::or(p("a"), Formula::and(p("b"), Formula::not(p("c"))))
        );
        assert_eq!(
            parse_formula("a || b || c").unwrap(),
            Formula::or(Formula::or(p("a"), p("b")), p("c"))
        );
        assert_eq!(
            parse_formula("!EX p && q").unwrap(),
            Formula::and(Formula::not(Formula::ex(p("p"))), p("q"))
        );
        assert_eq!(
            parse_formula("A[p || q U r && s]").unwrap(),
            Formula::au(Formula::or(p("p"), p("q")), Formula::and(p("r"), p("s")))
        );
    }

    #[test]
    fn e_and_a_are_ordinary_names_without_bracket() {
        assert_eq!(
            parse_formula("E && A").unwrap(),
            Formula::and(p("E"), p("A"))
        );
    }

    #[test]
    fn errors_carry_position_and_token() {
        let err = parse_formula("p &&\n  U").unwrap_err();
        assert_eq!((err.line, err.column), (2, 3));
        assert_eq!(err.token, "`U`");

        let err = parse_formula("E[p q]").unwrap_err();
        assert_eq!(err.token, "`q`");
        assert!(err.message.contains("`U`"));

        let err = parse_formula("p & q").unwrap_err();
        assert_eq!((err.line, err.column), (1, 3));

        let err = parse_formula("(p").unwrap_err();
        assert_eq!(err.token, "end of input");

        assert!(parse_formula("p q").is_err());
        assert!(parse_formula("").is_err());
        assert!(parse_formula("EG").is_err());
    }
}
