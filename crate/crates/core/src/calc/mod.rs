//! Calculator annotations: the inline `<<expression=result>>` markers that
//! grade-school math solutions use to record intermediate computations.
//!
//! [`parse_annotations`] finds every annotation in a text. A malformed
//! interior still produces an annotation — its check reports `malformed`
//! instead of the occurrence being silently dropped. [`check_annotation`]
//! evaluates the expression with exact rational arithmetic and compares it
//! to the claimed result. The canonical form (`expr=claimed`, no
//! whitespace, ASCII operators, minimal numbers) is what the translation
//! gate and the path deduplicator compare.

mod ast;
mod parse;

pub use ast::{round_half_up, to_f64, BinOp, DecimalLit, EvalError, Expr};
pub use parse::{normalize_expr_text, parse_claimed, parse_expr, ExprParseError};

use std::ops::Range;

use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::tolerance::Tolerance;

/// A parsed `<<expr=result>>` occurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct CalcAnnotation {
    /// Byte range of the whole `<<...>>` region in the source text.
    pub span: Range<usize>,
    /// Raw text between `<<` and the first `=`.
    pub expr_src: String,
    /// Raw text between the first `=` and `>>`.
    pub claimed_src: String,
    /// Parsed payload, or the reason the interior is malformed.
    pub parsed: Result<ParsedAnnotation, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedAnnotation {
    pub expr: Expr,
    pub claimed: DecimalLit,
}

impl CalcAnnotation {
    pub fn is_well_formed(&self) -> bool {
        self.parsed.is_ok()
    }

    /// Canonical `expr=claimed` string; `None` when malformed.
    pub fn canonical(&self) -> Option<String> {
        self.parsed
            .as_ref()
            .ok()
            .map(|p| format!("{}={}", p.expr.render(), p.claimed.canonical()))
    }

    /// Canonical expression alone, with the claimed result left off.
    pub fn canonical_expr(&self) -> Option<String> {
        self.parsed.as_ref().ok().map(|p| p.expr.render())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Ok,
    ArithmeticMismatch,
    Malformed,
    DivisionByZero,
}

/// Outcome of checking one annotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub status: CheckStatus,
    pub evaluated: Option<f64>,
    pub detail: String,
}

impl CheckOutcome {
    pub fn is_ok(&self) -> bool {
        self.status == CheckStatus::Ok
    }
}

/// Find every non-overlapping `<<...>>` occurrence in document order.
///
/// An unmatched `<<` with no later `>>` is ignored. When another `<<` opens
/// before the closer, the innermost one wins and the outer text counts as
/// prose. Total: malformed interiors are carried in the result, never
/// skipped.
pub fn parse_annotations(text: &str) -> Vec<CalcAnnotation> {
    let mut out = Vec::new();
    let mut from = 0;
    while let Some(rel_open) = text[from..].find("<<") {
        let mut open = from + rel_open;
        let Some(rel_close) = text[open + 2..].find(">>") else {
            break;
        };
        let close = open + 2 + rel_close;
        if let Some(inner) = text[open + 2..close].rfind("<<") {
            open = open + 2 + inner;
        }
        out.push(annotation_at(text, open, close));
        from = close + 2;
    }
    out
}

fn annotation_at(text: &str, open: usize, close: usize) -> CalcAnnotation {
    let interior = &text[open + 2..close];
    let span = open..close + 2;
    match interior.split_once('=') {
        Some((expr_src, claimed_src)) => {
            let parsed = parse_expr(expr_src)
                .map_err(|e| format!("bad expression: {e}"))
                .and_then(|expr| {
                    parse_claimed(claimed_src)
                        .map(|claimed| ParsedAnnotation { expr, claimed })
                        .map_err(|e| format!("bad claimed value: {e}"))
                });
            CalcAnnotation {
                span,
                expr_src: expr_src.to_string(),
                claimed_src: claimed_src.to_string(),
                parsed,
            }
        }
        None => CalcAnnotation {
            span,
            expr_src: interior.to_string(),
            claimed_src: String::new(),
            parsed: Err("missing '=' separator".into()),
        },
    }
}

/// Evaluate an annotation exactly and compare with its claimed result.
///
/// The claim passes when it is within `max(abs, rel * |evaluated|)` of the
/// exact value, or when it equals the exact value rounded half-up to the
/// claim's displayed decimal places (this accepts truncated repeating
/// decimals like `1/3 = 0.33` without accepting wrong arithmetic).
pub fn check_annotation(a: &CalcAnnotation, tol: Tolerance) -> CheckOutcome {
    let parsed = match &a.parsed {
        Ok(p) => p,
        Err(reason) => {
            return CheckOutcome {
                status: CheckStatus::Malformed,
                evaluated: None,
                detail: reason.clone(),
            }
        }
    };
    let evaluated = match parsed.expr.eval() {
        Ok(v) => v,
        Err(EvalError::DivisionByZero) => {
            return CheckOutcome {
                status: CheckStatus::DivisionByZero,
                evaluated: None,
                detail: "division by zero".into(),
            }
        }
    };
    let claimed = parsed.claimed.value();
    let diff = (&evaluated - &claimed).abs();
    let abs = BigRational::from_float(tol.abs).unwrap_or_default();
    let rel = BigRational::from_float(tol.rel).unwrap_or_default() * evaluated.abs();
    let threshold = if rel > abs { rel } else { abs };
    let within_tol = diff <= threshold;
    let rounded_match = round_half_up(&evaluated, parsed.claimed.decimals()) == claimed;
    let value = to_f64(&evaluated);
    if within_tol || rounded_match {
        CheckOutcome {
            status: CheckStatus::Ok,
            evaluated: Some(value),
            detail: String::new(),
        }
    } else {
        CheckOutcome {
            status: CheckStatus::ArithmeticMismatch,
            evaluated: Some(value),
            detail: format!(
                "{} evaluates to {} but claims {}",
                parsed.expr.render(),
                value,
                parsed.claimed.canonical()
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_one(text: &str) -> CalcAnnotation {
        let anns = parse_annotations(text);
        assert_eq!(anns.len(), 1, "expected exactly one annotation in {text:?}");
        anns.into_iter().next().unwrap()
    }

    fn check(text: &str) -> CheckOutcome {
        check_annotation(&parse_one(text), Tolerance::annotation())
    }

    #[test]
    fn babysitting_example() {
        let text = "Babysitting is $12/hour = $12/60 minutes = $<<12/60=0.2>>0.2 per minute.";
        let anns = parse_annotations(text);
        assert_eq!(anns.len(), 1);
        let a = &anns[0];
        assert_eq!(a.expr_src, "12/60");
        assert_eq!(a.claimed_src, "0.2");
        assert_eq!(&text[a.span.clone()], "<<12/60=0.2>>");
        let outcome = check_annotation(a, Tolerance::annotation());
        assert_eq!(outcome.status, CheckStatus::Ok);
        assert_eq!(outcome.evaluated, Some(0.2));
    }

    #[test]
    fn no_delimiters_empty() {
        assert!(parse_annotations("no formulas here").is_empty());
    }

    #[test]
    fn document_order() {
        let anns = parse_annotations("a <<1+1=2>>2 b <<2*3=6>>6");
        assert_eq!(anns.len(), 2);
        assert_eq!(anns[0].canonical().unwrap(), "1+1=2");
        assert_eq!(anns[1].canonical().unwrap(), "2*3=6");
    }

    #[test]
    fn unmatched_open_ignored() {
        assert!(parse_annotations("broken << 3+4 and nothing closes").is_empty());
        // A later complete annotation is still found.
        let anns = parse_annotations("<< stray then <<1+2=3>>3");
        assert_eq!(anns.len(), 1);
        assert_eq!(anns[0].canonical().unwrap(), "1+2=3");
    }

    #[test]
    fn innermost_open_wins() {
        let anns = parse_annotations("text <<oops <<5-1=4>>4 more");
        assert_eq!(anns.len(), 1);
        assert_eq!(anns[0].expr_src, "5-1");
        assert_eq!(anns[0].canonical().unwrap(), "5-1=4");
    }

    #[test]
    fn missing_equals_is_malformed() {
        let a = parse_one("see <<2+2>> here");
        assert!(!a.is_well_formed());
        assert_eq!(a.canonical(), None);
        let outcome = check_annotation(&a, Tolerance::annotation());
        assert_eq!(outcome.status, CheckStatus::Malformed);
        assert!(outcome.detail.contains("="));
    }

    #[test]
    fn splits_at_first_equals() {
        // `<<1+1=2=2>>` splits as expr `1+1`, claimed `2=2` (malformed claim).
        let a = parse_one("<<1+1=2=2>>");
        assert_eq!(a.expr_src, "1+1");
        assert_eq!(a.claimed_src, "2=2");
        assert!(!a.is_well_formed());
    }

    #[test]
    fn garbage_expression_is_malformed() {
        for text in ["<<x+1=2>>", "<<=2>>", "<<2^3=8>>", "<<50%=0.5>>"] {
            let a = parse_one(text);
            let outcome = check_annotation(&a, Tolerance::annotation());
            assert_eq!(outcome.status, CheckStatus::Malformed, "for {text:?}");
        }
    }

    #[test]
    fn arithmetic_mismatch() {
        let outcome = check("<<3+4=8>>");
        assert_eq!(outcome.status, CheckStatus::ArithmeticMismatch);
        assert_eq!(outcome.evaluated, Some(7.0));
        assert!(outcome.detail.contains("claims 8"));
    }

    #[test]
    fn division_by_zero() {
        let outcome = check("<<5/0=0>>");
        assert_eq!(outcome.status, CheckStatus::DivisionByZero);
        assert_eq!(outcome.evaluated, None);
        // Indirect zero denominators too.
        assert_eq!(check("<<5/(2-2)=1>>").status, CheckStatus::DivisionByZero);
    }

    #[test]
    fn repeating_decimal_truncations_pass() {
        // 1/3 = 0.333...; rounded half-up to the displayed precision.
        assert_eq!(check("<<1/3=0.33>>").status, CheckStatus::Ok);
        assert_eq!(check("<<1/3=0.3>>").status, CheckStatus::Ok);
        assert_eq!(check("<<2/3=0.67>>").status, CheckStatus::Ok);
        // But not arbitrary nearby values.
        assert_eq!(
            check("<<1/3=0.34>>").status,
            CheckStatus::ArithmeticMismatch
        );
        assert_eq!(check("<<1/3=0.4>>").status, CheckStatus::ArithmeticMismatch);
    }

    #[test]
    fn integer_rounding_of_quotients() {
        // 100/3 = 33.33... displayed as an integer claim 33.
        assert_eq!(check("<<100/3=33>>").status, CheckStatus::Ok);
        assert_eq!(
            check("<<100/3=34>>").status,
            CheckStatus::ArithmeticMismatch
        );
        // Half-up at the boundary: 7/2 = 3.5 rounds to 4, not 3.
        assert_eq!(check("<<7/2=4>>").status, CheckStatus::Ok);
        assert_eq!(check("<<7/2=3>>").status, CheckStatus::ArithmeticMismatch);
    }

    #[test]
    fn tolerance_accepts_tiny_absolute_error() {
        // |0.0333 - 1/30| ~ 3.3e-5 <= abs 1e-6? No. rel = 1e-4 * 0.0333 ~ 3.3e-6, no.
        // But the rounding rule accepts it at 4 decimals.
        assert_eq!(check("<<1/30=0.0333>>").status, CheckStatus::Ok);
        // Exactly representable claim slightly off beyond every allowance fails.
        assert_eq!(
            check("<<1/30=0.04>>").status,
            CheckStatus::ArithmeticMismatch
        );
    }

    #[test]
    fn canonicalization() {
        let a = parse_one("<< １２ × ３ = 36.0 >>");
        assert_eq!(a.canonical().unwrap(), "12*3=36");
        assert_eq!(a.canonical_expr().unwrap(), "12*3");
        let b = parse_one("<<1,200 ÷ 4 = 300.00>>");
        assert_eq!(b.canonical().unwrap(), "1200/4=300");
        // Parenthesization is preserved, not rewritten.
        let c = parse_one("<<(2+3)*4=20>>");
        assert_eq!(c.canonical().unwrap(), "(2+3)*4=20");
    }

    #[test]
    fn negative_results() {
        assert_eq!(check("<<3-5=-2>>").status, CheckStatus::Ok);
        assert_eq!(check("<<-4*2=-8>>").status, CheckStatus::Ok);
        assert_eq!(check("<<3-5=2>>").status, CheckStatus::ArithmeticMismatch);
    }

    #[test]
    fn adjacent_annotations() {
        let anns = parse_annotations("<<1+1=2>><<2+2=4>>");
        assert_eq!(anns.len(), 2);
        assert!(anns.iter().all(|a| a.is_well_formed()));
    }

    #[test]
    fn spans_are_byte_ranges_into_source() {
        let text = "数 <<２+２=4>> 終";
        let anns = parse_annotations(text);
        assert_eq!(anns.len(), 1);
        assert_eq!(&text[anns[0].span.clone()], "<<２+２=4>>");
        assert_eq!(
            check_annotation(&anns[0], Tolerance::annotation()).status,
            CheckStatus::Ok
        );
    }
}
