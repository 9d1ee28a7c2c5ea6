//! Command-line syntax for derivations and words.
//!
//! A letter is a real combination of basis elements, written `e3` or
//! `0.5*e1+1*e2` (indices start at 1). Letters in a word are separated by
//! `,` and words by `;`.

use anyhow::{anyhow, bail, Context, Result};

/// Parses one letter into `d` real coefficients.
pub fn parse_letter(text: &str, d: usize) -> Result<Vec<f64>> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        bail!("empty letter");
    }
    let mut coeffs = vec![0.0; d];
    // split before every sign that does not follow an exponent marker
    let mut terms = Vec::new();
    let mut start = 0;
    let bytes = compact.as_bytes();
    for k in 1..bytes.len() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E' | b'*') {
            terms.push(&compact[start..k]);
            start = k;
        }
    }
    terms.push(&compact[start..]);

    for term in terms {
        let (sign, body) = match term.as_bytes()[0] {
            b'+' => (1.0, &term[1..]),
            b'-' => (-1.0, &term[1..]),
            _ => (1.0, term),
        };
        let (coeff, basis) = match body.rsplit_once('*') {
            Some((c, e)) => (
                c.parse::<f64>()
                    .with_context(|| format!("bad coefficient `{c}` in `{text}`"))?,
                e,
            ),
            None => (1.0, body),
        };
        let index: usize = basis
            .strip_prefix('e')
            .and_then(|i| i.parse().ok())
            .ok_or_else(|| anyhow!("bad basis element `{basis}` in `{text}`; expected e1..e{d}"))?;
        if index == 0 || index > d {
            bail!("basis element e{index} out of range; the basis has e1..e{d}");
        }
        if !coeff.is_finite() {
            bail!("non-finite coefficient in `{text}`");
        }
        coeffs[index - 1] += sign * coeff;
    }
    Ok(coeffs)
}

/// Parses `"e3;e1,e2"` into words of letters.
pub fn parse_words(text: &str, d: usize) -> Result<Vec<Vec<Vec<f64>>>> {
    let words: Vec<Vec<Vec<f64>>> = text
        .split(';')
        .filter(|w| !w.trim().is_empty())
        .map(|w| {
            w.split(',')
                .map(|l| parse_letter(l, d))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    if words.is_empty() {
        bail!("no words given");
    }
    Ok(words)
}

/// Human label of a letter, e.g. `e3` or `0.5*e1+e2`.
pub fn letter_label(coeffs: &[f64]) -> String {
    let mut out = String::new();
    for (i, &c) in coeffs.iter().enumerate().filter(|(_, c)| **c != 0.0) {
        if !out.is_empty() {
            out.push(if c < 0.0 { '-' } else { '+' });
        } else if c < 0.0 {
            out.push('-');
        }
        if c.abs() != 1.0 {
            out.push_str(&format!("{}*", c.abs()));
        }
        out.push_str(&format!("e{}", i + 1));
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

pub fn word_label(letters: &[Vec<f64>]) -> String {
    format!(
        "({})",
        letters
            .iter()
            .map(|l| letter_label(l))
            .collect::<Vec<_>>()
            .join(",")
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn letters() {
        assert_eq!(parse_letter("e3", 3).unwrap(), vec![0.0, 0.0, 1.0]);
        assert_eq!(parse_letter("0.5*e1+1*e2", 3).unwrap(), vec![0.5, 1.0, 0.0]);
        assert_eq!(
            parse_letter("-e1 - 2*e3", 3).unwrap(),
            vec![-1.0, 0.0, -2.0]
        );
        assert_eq!(parse_letter("1e-1*e2+e2", 3).unwrap(), vec![0.0, 1.1, 0.0]);
        assert_eq!(parse_letter("-2.5e0*e1", 3).unwrap(), vec![-2.5, 0.0, 0.0]);
        for bad in ["", "e0", "e4", "x1", "a*e1", "e"] {
            assert!(parse_letter(bad, 3).is_err(), "{bad}");
        }
    }

    #[test]
    fn words() {
        let w = parse_words("e3; e3,e3 ;e1,e2,e3", 3).unwrap();
        assert_eq!(w.len(), 3);
        assert_eq!(w[2].len(), 3);
        assert!(parse_words(" ; ", 3).is_err());
        assert_eq!(word_label(&w[1]), "(e3,e3)");
        assert_eq!(letter_label(&[0.5, -1.0, 0.0]), "0.5*e1-e2");
        assert_eq!(letter_label(&[-2.0, 0.0, 0.0]), "-2*e1");
    }
}
