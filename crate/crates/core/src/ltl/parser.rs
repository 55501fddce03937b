//! Recursive-descent parser for the ASCII (and Unicode) LTL surface syntax.
//!
//! Binding strength, tightest first: `!` `X` `F` `G`, then `&`, `|`, `U`,
//! and finally `->` / `<->`. `&` and `|` associate to the left, `U`, `->`
//! and `<->` to the right.

use super::formula::LtlFormula;
use super::LtlError;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Next,
    Until,
    Eventually,
    Always,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Token,
    offset: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, LtlError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(offset, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let single = |tok| Some(tok);
        let tok = match c {
            '(' => single(Token::LParen),
            ')' => single(Token::RParen),
            '!' | '~' | '¬' => single(Token::Not),
            '∧' => single(Token::And),
            '∨' => single(Token::Or),
            '→' => single(Token::Implies),
            '↔' => single(Token::Iff),
            '◯' | '○' => single(Token::Next),
            '◇' | '♢' | '⋄' => single(Token::Eventually),
            '□' | '◻' => single(Token::Always),
            '⊤' => single(Token::True),
            '⊥' => single(Token::False),
            _ => None,
        };
        if let Some(tok) = tok {
            chars.next();
            out.push(Spanned { tok, offset });
            continue;
        }
        match c {
            '&' | '|' => {
                chars.next();
                if chars.peek().map(|&(_, n)| n) == Some(c) {
                    chars.next();
                }
                let tok = if c == '&' { Token::And } else { Token::Or };
                out.push(Spanned { tok, offset });
            }
            '-' => {
                chars.next();
                match chars.next() {
                    Some((_, '>')) => out.push(Spanned {
                        tok: Token::Implies,
                        offset,
                    }),
                    _ => {
                        return Err(LtlError::Syntax {
                            offset,
                            message: "expected '->'".into(),
                        })
                    }
                }
            }
            '<' => {
                chars.next();
                let a = chars.next().map(|(_, c)| c);
                let b = chars.next().map(|(_, c)| c);
                if a == Some('-') && b == Some('>') {
                    out.push(Spanned {
                        tok: Token::Iff,
                        offset,
                    });
                } else {
                    return Err(LtlError::Syntax {
                        offset,
                        message: "expected '<->'".into(),
                    });
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::new();
                while let Some(&(_, n)) = chars.peek() {
                    if n.is_ascii_alphanumeric() || n == '_' {
                        word.push(n);
                        chars.next();
                    } else {
                        break;
                    }
                }
                let tok = match word.as_str() {
                    "X" => Token::Next,
                    "F" => Token::Eventually,
                    "G" => Token::Always,
                    "U" => Token::Until,
                    "true" | "True" => Token::True,
                    "false" | "False" => Token::False,
                    _ => Token::Ident(word),
                };
                out.push(Spanned { tok, offset });
            }
            other => {
                return Err(LtlError::Syntax {
                    offset,
                    message: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|s| &s.tok)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |s| s.offset)
    }

    fn eat(&mut self, tok: &Token) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, LtlError> {
        Err(LtlError::Syntax {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn implication(&mut self) -> Result<LtlFormula, LtlError> {
        let lhs = self.until()?;
        if self.eat(&Token::Implies) {
            let rhs = self.implication()?;
            return Ok(LtlFormula::or(LtlFormula::not(lhs), rhs));
        }
        if self.eat(&Token::Iff) {
            let rhs = self.implication()?;
            return Ok(LtlFormula::or(
                LtlFormula::and(lhs.clone(), rhs.clone()),
                LtlFormula::and(LtlFormula::not(lhs), LtlFormula::not(rhs)),
            ));
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<LtlFormula, LtlError> {
        let lhs = self.disjunction()?;
        if self.eat(&Token::Until) {
            let rhs = self.until()?;
            return Ok(LtlFormula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<LtlFormula, LtlError> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Token::Or) {
            let rhs = self.conjunction()?;
            lhs = LtlFormula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<LtlFormula, LtlError> {
        let mut lhs = self.unary()?;
        while self.eat(&Token::And) {
            let rhs = self.unary()?;
            lhs = LtlFormula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<LtlFormula, LtlError> {
        let ctor: fn(LtlFormula) -> LtlFormula = match self.peek() {
            Some(Token::Not) => LtlFormula::not,
            Some(Token::Next) => LtlFormula::next,
            Some(Token::Eventually) => LtlFormula::eventually,
            Some(Token::Always) => LtlFormula::always,
            _ => return self.atom(),
        };
        self.pos += 1;
        Ok(ctor(self.unary()?))
    }

    fn atom(&mut self) -> Result<LtlFormula, LtlError> {
        match self.peek().cloned() {
            Some(Token::Ident(name)) => {
                self.pos += 1;
                Ok(LtlFormula::Prop(name))
            }
            Some(Token::True) => {
                self.pos += 1;
                Ok(LtlFormula::True)
            }
            Some(Token::False) => {
                self.pos += 1;
                Ok(LtlFormula::False)
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.implication()?;
                if !self.eat(&Token::RParen) {
                    return self.error("expected ')'");
                }
                Ok(inner)
            }
            Some(tok) => self.error(format!("unexpected token {tok:?}")),
            None => self.error("unexpected end of input"),
        }
    }
}

/// Parse without checking propositions against a declared set.
pub fn parse_formula(text: &str) -> Result<LtlFormula, LtlError> {
    if text.trim().is_empty() {
        return Err(LtlError::Syntax {
            offset: 0,
            message: "empty formula".into(),
        });
    }
    let mut parser = Parser {
        tokens: lex(text)?,
        pos: 0,
        end: text.len(),
    };
    let f = parser.implication()?;
    if parser.pos < parser.tokens.len() {
        return parser.error("trailing input");
    }
    Ok(f)
}

/// Parse `text` and reject propositions outside `props`.
pub fn parse_ltl<S: AsRef<str>>(text: &str, props: &[S]) -> Result<LtlFormula, LtlError> {
    let f = parse_formula(text)?;
    if let Some(bad) = f
        .propositions()
        .into_iter()
        .find(|p| !props.iter().any(|d| d.as_ref() == p))
    {
        return Err(LtlError::UndeclaredProposition(bad));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use LtlFormula as L;

    fn p(n: &str) -> LtlFormula {
        L::prop(n)
    }

    const PROPS: [&str; 7] = ["a", "b", "c", "h", "o", "can", "e"];

    #[test]
    fn parses_sequential_task() {
        let f = parse_ltl("F(a & F(b & F(c & F h))) & G !o", &PROPS).unwrap();
        let expected = L::and(
            L::eventually(L::and(
                p("a"),
                L::eventually(L::and(
                    p("b"),
                    L::eventually(L::and(p("c"), L::eventually(p("h")))),
                )),
            )),
            L::always(L::not(p("o"))),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn single_proposition() {
        assert_eq!(parse_ltl("a", &PROPS).unwrap(), p("a"));
    }

    #[test]
    fn grammar_composition() {
        let f = parse_ltl("F (a | b) & F c", &["a", "b", "c"]).unwrap();
        assert_eq!(
            f,
            L::and(L::eventually(L::or(p("a"), p("b"))), L::eventually(p("c")))
        );
    }

    #[test]
    fn unicode_aliases() {
        let ascii = parse_ltl("F (a & !can) -> G !o", &PROPS).unwrap();
        let uni = parse_ltl("◇(a ∧ ¬can) → □¬o", &PROPS).unwrap();
        assert_eq!(ascii, uni);
    }

    #[test]
    fn precedence_ladder() {
        // & binds tighter than |, which binds tighter than U
        let f = parse_formula("a & b | c U h").unwrap();
        assert_eq!(f, L::until(L::or(L::and(p("a"), p("b")), p("c")), p("h")));
        let g = parse_formula("a -> b -> c").unwrap();
        assert_eq!(g, L::or(L::not(p("a")), L::or(L::not(p("b")), p("c"))));
        let x = parse_formula("X a & b").unwrap();
        assert_eq!(x, L::and(L::next(p("a")), p("b")));
    }

    #[test]
    fn iff_desugars() {
        let f = parse_formula("a <-> b").unwrap();
        assert_eq!(f.to_string(), "a & b | !a & !b");
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse_formula("a & (b | c") {
            Err(LtlError::Syntax { offset, .. }) => assert_eq!(offset, 10),
            other => panic!("{other:?}"),
        }
        match parse_formula("a $ b") {
            Err(LtlError::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_formula("   "), Err(LtlError::Syntax { .. })));
        assert!(matches!(
            parse_formula("a b"),
            Err(LtlError::Syntax { offset: 2, .. })
        ));
    }

    #[test]
    fn undeclared_proposition_is_named() {
        match parse_ltl("F zebra", &PROPS) {
            Err(LtlError::UndeclaredProposition(name)) => assert_eq!(name, "zebra"),
            other => panic!("{other:?}"),
        }
    }
}
