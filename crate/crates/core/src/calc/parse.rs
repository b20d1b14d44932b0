//! Tokenizer and recursive-descent parser for annotation expressions.
//!
//! Grammar:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := '-' factor | primary
//! primary := number | '(' expr ')'
//! number  := digits ['.' digits] | '.' digits
//! ```
//!
//! Input is normalized first: full-width digits and operators fold to
//! ASCII, `×`/`÷` become `*`/`/`, and digit-grouping commas disappear.
//! Anything left outside the grammar is a parse error, which callers
//! surface as a malformed annotation rather than a guess.

use super::ast::{BinOp, DecimalLit, Expr};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct ExprParseError(pub String);

/// Fold full-width forms to ASCII and drop digit-grouping commas.
pub fn normalize_expr_text(src: &str) -> String {
    let chars: Vec<char> = src.chars().collect();
    let mut out = String::with_capacity(src.len());
    for (i, &c) in chars.iter().enumerate() {
        let mapped = match c {
            '０'..='９' => char::from(b'0' + (c as u32 - '０' as u32) as u8),
            '×' => '*',
            '÷' => '/',
            '−' | '－' => '-',
            '＋' => '+',
            '＊' => '*',
            '／' => '/',
            '（' => '(',
            '）' => ')',
            '．' => '.',
            ',' | '，' => {
                // Digit-grouping separator only; anything else stays and
                // fails tokenization.
                let prev_digit = i > 0 && is_digit_like(chars[i - 1]);
                let next_digit = chars.get(i + 1).copied().is_some_and(is_digit_like);
                if prev_digit && next_digit {
                    continue;
                }
                c
            }
            _ => c,
        };
        out.push(mapped);
    }
    out
}

fn is_digit_like(c: char) -> bool {
    c.is_ascii_digit() || ('０'..='９').contains(&c)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(DecimalLit),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ExprParseError> {
    let mut tokens = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        match c {
            _ if c.is_whitespace() => {
                chars.next();
            }
            '+' => {
                chars.next();
                tokens.push(Token::Plus);
            }
            '-' => {
                chars.next();
                tokens.push(Token::Minus);
            }
            '*' => {
                chars.next();
                tokens.push(Token::Star);
            }
            '/' => {
                chars.next();
                tokens.push(Token::Slash);
            }
            '(' => {
                chars.next();
                tokens.push(Token::LParen);
            }
            ')' => {
                chars.next();
                tokens.push(Token::RParen);
            }
            '0'..='9' | '.' => {
                let mut end = start;
                let mut seen_dot = false;
                while let Some(&(i, d)) = chars.peek() {
                    match d {
                        '0'..='9' => {
                            end = i + 1;
                            chars.next();
                        }
                        '.' if !seen_dot => {
                            seen_dot = true;
                            end = i + 1;
                            chars.next();
                        }
                        _ => break,
                    }
                }
                let lit = DecimalLit::parse(&src[start..end]).ok_or_else(|| {
                    ExprParseError(format!("invalid number {:?}", &src[start..end]))
                })?;
                tokens.push(Token::Num(lit));
            }
            _ => {
                return Err(ExprParseError(format!("unexpected character {c:?}")));
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr, ExprParseError> {
        let mut lhs = self.term()?;
        while let Some(op) = match self.peek() {
            Some(Token::Plus) => Some(BinOp::Add),
            Some(Token::Minus) => Some(BinOp::Sub),
            _ => None,
        } {
            self.next();
            let rhs = self.term()?;
            lhs = Expr::Bin {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprParseError> {
        let mut lhs = self.factor()?;
        while let Some(op) = match self.peek() {
            Some(Token::Star) => Some(BinOp::Mul),
            Some(Token::Slash) => Some(BinOp::Div),
            _ => None,
        } {
            self.next();
            let rhs = self.factor()?;
            lhs = Expr::Bin {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ExprParseError> {
        match self.peek() {
            Some(Token::Minus) => {
                self.next();
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr, ExprParseError> {
        match self.next() {
            Some(Token::Num(lit)) => Ok(Expr::Num(lit)),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(Expr::Paren(Box::new(inner))),
                    _ => Err(ExprParseError("missing closing parenthesis".into())),
                }
            }
            Some(t) => Err(ExprParseError(format!("unexpected token {t:?}"))),
            None => Err(ExprParseError("unexpected end of expression".into())),
        }
    }
}

/// Parse an annotation expression after normalization.
pub fn parse_expr(src: &str) -> Result<Expr, ExprParseError> {
    let normalized = normalize_expr_text(src);
    let tokens = tokenize(&normalized)?;
    if tokens.is_empty() {
        return Err(ExprParseError("empty expression".into()));
    }
    let mut parser = Parser { tokens, pos: 0 };
    let expr = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(ExprParseError("trailing input after expression".into()));
    }
    Ok(expr)
}

/// Parse the claimed result of an annotation: a single signed decimal.
pub fn parse_claimed(src: &str) -> Result<DecimalLit, ExprParseError> {
    let normalized = normalize_expr_text(src);
    let trimmed: String = normalized.chars().filter(|c| !c.is_whitespace()).collect();
    DecimalLit::parse(&trimmed)
        .ok_or_else(|| ExprParseError(format!("invalid claimed value {src:?}")))
}
