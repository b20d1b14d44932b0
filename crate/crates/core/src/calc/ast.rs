//! Expression tree and exact decimal literals for calculator annotations.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A decimal literal as written in the source: sign, integer digits and
/// fraction digits are kept so the displayed precision stays observable.
///
/// Equality is by numeric value, so `0.20` and `0.2` compare equal while
/// still reporting different [`DecimalLit::decimals`].
#[derive(Debug, Clone)]
pub struct DecimalLit {
    neg: bool,
    int_digits: String,
    frac_digits: String,
}

impl DecimalLit {
    /// Parse `-?([digits][.digits] | .digits)`. Returns `None` for anything
    /// else, including empty input and a trailing bare dot.
    pub fn parse(s: &str) -> Option<DecimalLit> {
        let (neg, rest) = match s.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, s),
        };
        let (int_part, frac_part) = match rest.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (rest, None),
        };
        if !int_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let frac = match frac_part {
            Some(f) => {
                if f.is_empty() || !f.bytes().all(|b| b.is_ascii_digit()) {
                    return None;
                }
                f
            }
            None => "",
        };
        if int_part.is_empty() && frac.is_empty() {
            return None;
        }
        Some(DecimalLit {
            neg,
            int_digits: int_part.to_string(),
            frac_digits: frac.to_string(),
        })
    }

    /// Exact decimal rendering of a rational, if its reduced denominator is
    /// of the form `2^a * 5^b`.
    pub fn from_rational_exact(r: &BigRational) -> Option<DecimalLit> {
        let mut denom = r.denom().abs();
        let mut scale = 0u32;
        for p in [2u32, 5] {
            let p = BigInt::from(p);
            while (&denom % &p).is_zero() {
                denom /= &p;
                scale += 1;
            }
        }
        if !denom.is_one() {
            return None;
        }
        // Scale up to an integer over 10^scale, then split digits.
        let ten = BigInt::from(10);
        let factor = ten.pow(scale);
        let scaled = (r * BigRational::from_integer(factor)).to_integer();
        let neg = scaled.is_negative();
        let digits = scaled.abs().to_string();
        let digits = if digits.len() <= scale as usize {
            format!("{:0>width$}", digits, width = scale as usize + 1)
        } else {
            digits
        };
        let split = digits.len() - scale as usize;
        Some(DecimalLit {
            neg,
            int_digits: digits[..split].to_string(),
            frac_digits: digits[split..].to_string(),
        })
    }

    /// Number of fraction digits as displayed in the source.
    pub fn decimals(&self) -> usize {
        self.frac_digits.len()
    }

    /// Exact value.
    pub fn value(&self) -> BigRational {
        let digits = format!("{}{}", self.int_digits, self.frac_digits);
        let digits = if digits.is_empty() {
            "0".into()
        } else {
            digits
        };
        let numer: BigInt = digits.parse().expect("digit-only string");
        let denom = BigInt::from(10).pow(self.frac_digits.len() as u32);
        let v = BigRational::new(numer, denom);
        if self.neg {
            -v
        } else {
            v
        }
    }

    /// Minimal rendering: no leading zeros, no trailing fraction zeros, no
    /// negative zero.
    pub fn canonical(&self) -> String {
        let int = self.int_digits.trim_start_matches('0');
        let int = if int.is_empty() { "0" } else { int };
        let frac = self.frac_digits.trim_end_matches('0');
        let mut out = String::new();
        if self.neg && !(int == "0" && frac.is_empty()) {
            out.push('-');
        }
        out.push_str(int);
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
        out
    }
}

impl PartialEq for DecimalLit {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

impl Eq for DecimalLit {}

impl fmt::Display for DecimalLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

/// Arithmetic expression tree.
///
/// Parentheses are explicit nodes: the canonical form preserves the
/// parenthesization the author wrote, and render/parse round-trips are
/// structural.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Num(DecimalLit),
    Neg(Box<Expr>),
    Paren(Box<Expr>),
    Bin {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
}

impl Expr {
    /// Exact evaluation over rationals.
    pub fn eval(&self) -> Result<BigRational, EvalError> {
        match self {
            Expr::Num(n) => Ok(n.value()),
            Expr::Neg(inner) => Ok(-inner.eval()?),
            Expr::Paren(inner) => inner.eval(),
            Expr::Bin { op, lhs, rhs } => {
                let l = lhs.eval()?;
                let r = rhs.eval()?;
                match op {
                    BinOp::Add => Ok(l + r),
                    BinOp::Sub => Ok(l - r),
                    BinOp::Mul => Ok(l * r),
                    BinOp::Div => {
                        if r.is_zero() {
                            Err(EvalError::DivisionByZero)
                        } else {
                            Ok(l / r)
                        }
                    }
                }
            }
        }
    }

    /// Render without whitespace. Numbers print minimally; structure is
    /// emitted exactly as stored, so parsing the output reproduces the tree.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out);
        out
    }

    fn render_into(&self, out: &mut String) {
        match self {
            Expr::Num(n) => out.push_str(&n.canonical()),
            Expr::Neg(inner) => {
                out.push('-');
                inner.render_into(out);
            }
            Expr::Paren(inner) => {
                out.push('(');
                inner.render_into(out);
                out.push(')');
            }
            Expr::Bin { op, lhs, rhs } => {
                lhs.render_into(out);
                out.push(op.symbol());
                rhs.render_into(out);
            }
        }
    }
}

/// `eval` approximated as f64 for reporting.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Round half away from zero to `decimals` fraction digits.
pub fn round_half_up(r: &BigRational, decimals: usize) -> BigRational {
    let factor = BigRational::from_integer(BigInt::from(10).pow(decimals as u32));
    let scaled = r * &factor;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let rounded = if scaled.is_negative() {
        -((-scaled + half).floor())
    } else {
        (scaled + half).floor()
    };
    rounded / factor
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_parse_forms() {
        assert_eq!(DecimalLit::parse("12").unwrap().canonical(), "12");
        assert_eq!(DecimalLit::parse("0.20").unwrap().canonical(), "0.2");
        assert_eq!(DecimalLit::parse(".5").unwrap().canonical(), "0.5");
        assert_eq!(DecimalLit::parse("-3.10").unwrap().canonical(), "-3.1");
        assert_eq!(DecimalLit::parse("007").unwrap().canonical(), "7");
        assert!(DecimalLit::parse("").is_none());
        assert!(DecimalLit::parse("12.").is_none());
        assert!(DecimalLit::parse(".").is_none());
        assert!(DecimalLit::parse("1.2.3").is_none());
        assert!(DecimalLit::parse("1e3").is_none());
    }

    #[test]
    fn decimal_eq_by_value() {
        assert_eq!(
            DecimalLit::parse("0.20").unwrap(),
            DecimalLit::parse(".2").unwrap()
        );
        assert_ne!(
            DecimalLit::parse("0.2").unwrap(),
            DecimalLit::parse("0.3").unwrap()
        );
        assert_eq!(DecimalLit::parse("-0").unwrap().canonical(), "0");
    }

    #[test]
    fn decimals_reflect_display() {
        assert_eq!(DecimalLit::parse("0.20").unwrap().decimals(), 2);
        assert_eq!(DecimalLit::parse("42").unwrap().decimals(), 0);
    }

    #[test]
    fn from_rational_exact_cases() {
        let r = BigRational::new(BigInt::from(1), BigInt::from(8));
        assert_eq!(
            DecimalLit::from_rational_exact(&r).unwrap().canonical(),
            "0.125"
        );
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        assert!(DecimalLit::from_rational_exact(&third).is_none());
        let neg = BigRational::new(BigInt::from(-3), BigInt::from(4));
        assert_eq!(
            DecimalLit::from_rational_exact(&neg).unwrap().canonical(),
            "-0.75"
        );
    }

    #[test]
    fn round_half_up_ties() {
        let v = BigRational::new(BigInt::from(25), BigInt::from(100));
        assert_eq!(
            round_half_up(&v, 1),
            BigRational::new(BigInt::from(3), BigInt::from(10))
        );
        let n = BigRational::new(BigInt::from(-25), BigInt::from(100));
        assert_eq!(
            round_half_up(&n, 1),
            BigRational::new(BigInt::from(-3), BigInt::from(10))
        );
    }
}
