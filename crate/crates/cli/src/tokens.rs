//! Arc endpoint tokens: decimal floats, `rat:p/q`, `irr:NAME` and
//! `affine:p/q+r/s*alpha`.

use num_rational::Ratio;
use permspec_core::limits::{ArcClass, E, GOLDEN, PI, SQRT2, SQRT3};
use permspec_core::{Arc, ClassifiedArc, Endpoint};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Token {
    Float(f64),
    Rational(Ratio<i64>),
    /// Fractional part of a named irrational.
    Irrational(f64),
    /// `p/q + (r/s) α`.
    Affine { offset: Ratio<i64>, slope: Ratio<i64> },
}

fn parse_ratio(s: &str) -> Result<Ratio<i64>, String> {
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s.trim(), "1"),
    };
    let num: i64 = num.parse().map_err(|_| format!("bad numerator in {s:?}"))?;
    let den: i64 = den.parse().map_err(|_| format!("bad denominator in {s:?}"))?;
    if den == 0 {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Ratio::new(num, den))
}

fn irrational(name: &str) -> Result<f64, String> {
    Ok(match name {
        "golden" => GOLDEN - 1.0,
        "sqrt2" => SQRT2 - 1.0,
        "sqrt3" => SQRT3 - 1.0,
        "e" => E - 2.0,
        "pi" => PI - 3.0,
        _ => {
            return Err(format!(
                "unknown irrational {name:?} (expected golden, sqrt2, sqrt3, e or pi)"
            ))
        }
    })
}

pub fn parse_token(s: &str) -> Result<Token, String> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("rat:") {
        return parse_ratio(rest).map(Token::Rational);
    }
    if let Some(rest) = s.strip_prefix("irr:") {
        return irrational(rest).map(Token::Irrational);
    }
    if let Some(rest) = s.strip_prefix("affine:") {
        let body = rest
            .strip_suffix("*alpha")
            .ok_or_else(|| format!("affine token {s:?} must end in *alpha"))?;
        let (offset, slope) = body
            .split_once('+')
            .ok_or_else(|| format!("affine token {s:?} must look like affine:p/q+r/s*alpha"))?;
        return Ok(Token::Affine {
            offset: parse_ratio(offset)?,
            slope: parse_ratio(slope)?,
        });
    }
    let x: f64 = s
        .parse()
        .map_err(|_| format!("cannot parse endpoint {s:?}"))?;
    if !x.is_finite() {
        return Err(format!("endpoint {s:?} is not finite"));
    }
    Ok(Token::Float(x))
}

fn ratio_value(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// A parsed arc together with the tokens it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcSpec {
    pub alpha_token: String,
    pub beta_token: String,
    pub alpha: f64,
    pub beta: f64,
    pub class: Option<ArcClass>,
    #[serde(skip)]
    pub classified: ClassifiedArc,
}

pub fn build_arc(alpha: &str, beta: &str) -> Result<ArcSpec, String> {
    let a = parse_token(alpha)?;
    let b = parse_token(beta)?;
    let alpha_ep = match a {
        Token::Float(x) | Token::Irrational(x) => Endpoint::Real(x),
        Token::Rational(r) => Endpoint::Rational(r),
        Token::Affine { .. } => return Err("affine tokens are only valid for beta".into()),
    };
    let (beta_ep, class) = match (a, b) {
        (_, Token::Affine { offset, slope }) => {
            let Token::Irrational(av) = a else {
                return Err("affine beta needs an irr: alpha".into());
            };
            let class = ArcClass::AffineRelated {
                alpha_value: av,
                p: *offset.numer(),
                q: *offset.denom(),
                r: *slope.numer(),
                s: *slope.denom(),
            };
            (Endpoint::Real(ratio_value(offset) + ratio_value(slope) * av), Some(class))
        }
        (Token::Rational(p), Token::Rational(r)) => (
            Endpoint::Rational(r),
            Some(ArcClass::BothRational {
                p: *p.numer(),
                q: *p.denom(),
                r: *r.numer(),
                s: *r.denom(),
            }),
        ),
        (Token::Rational(p), Token::Irrational(bv)) => (
            Endpoint::Real(bv),
            Some(ArcClass::RationalAlpha {
                p: *p.numer(),
                q: *p.denom(),
                beta_value: bv,
            }),
        ),
        (Token::Irrational(av), Token::Rational(r)) => (
            Endpoint::Rational(r),
            Some(ArcClass::RationalBeta {
                alpha_value: av,
                r: *r.numer(),
                s: *r.denom(),
            }),
        ),
        (Token::Irrational(av), Token::Irrational(bv)) => (
            Endpoint::Real(bv),
            Some(ArcClass::BothIrrationalIndependent {
                alpha_value: av,
                beta_value: bv,
            }),
        ),
        (_, Token::Rational(r)) => (Endpoint::Rational(r), None),
        (_, Token::Float(x) | Token::Irrational(x)) => (Endpoint::Real(x), None),
    };
    if let Some(c) = &class {
        c.validate().map_err(|e| e.to_string())?;
    }
    let arc = Arc::new(alpha_ep, beta_ep).map_err(|e| e.to_string())?;
    Ok(ArcSpec {
        alpha_token: alpha.trim().to_string(),
        beta_token: beta.trim().to_string(),
        alpha: alpha_ep.value(),
        beta: beta_ep.value(),
        class,
        classified: ClassifiedArc { arc, class },
    })
}

/// `a1,b1;a2,b2;...`
pub fn parse_arcs(s: &str) -> Result<Vec<ArcSpec>, String> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|pair| {
            let (a, b) = pair
                .split_once(',')
                .ok_or_else(|| format!("arc {pair:?} must be written alpha,beta"))?;
            build_arc(a, b)
        })
        .collect()
}
