//! Shared lexical helpers for the textual forms of groups and elements.
//!
//! A group is written in polynomial notation, `x^2yz`. Compact variables
//! (one letter plus digits/underscores) are concatenated; any other name
//! forces the whitespace-separated form `xs^2 y`. The exponent `^*`
//! (also `^inf`, `^∞`) denotes ∞ in 2-sharing groups. The empty group is
//! written `0`.

use std::fmt;

use crate::error::{parse_err, Result};
use crate::var::{Var, VarSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Exponent {
    Finite(u32),
    Inf,
}

pub(crate) fn parse_group(text: &str) -> Result<Vec<(Var, Exponent)>> {
    let text = text.trim();
    if text.is_empty() || text == "0" || text == "∅" {
        return Ok(Vec::new());
    }
    if text.split_whitespace().count() > 1 || text.starts_with('_') {
        return text.split_whitespace().map(parse_spaced_factor).collect();
    }
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if !c.is_ascii_alphabetic() {
            return parse_err(format!("unexpected '{c}' in group '{text}'"));
        }
        let start = i;
        i += 1;
        while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '_') {
            i += 1;
        }
        let name: String = chars[start..i].iter().collect();
        let (exp, next) = parse_exponent(&chars, i, text)?;
        i = next;
        out.push((Var::new(&name), exp));
    }
    Ok(out)
}

fn parse_spaced_factor(chunk: &str) -> Result<(Var, Exponent)> {
    let (name, exp) = match chunk.find('^') {
        Some(pos) => (&chunk[..pos], Some(&chunk[pos + 1..])),
        None => (chunk, None),
    };
    let valid_name = name
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !valid_name {
        return parse_err(format!("bad variable '{name}' in group"));
    }
    let exp = match exp {
        None => Exponent::Finite(1),
        Some(e) => exponent_from_str(e)?,
    };
    Ok((Var::new(name), exp))
}

fn parse_exponent(chars: &[char], i: usize, text: &str) -> Result<(Exponent, usize)> {
    if i >= chars.len() || chars[i] != '^' {
        return Ok((Exponent::Finite(1), i));
    }
    let mut j = i + 1;
    if j < chars.len() && (chars[j] == '*' || chars[j] == '∞') {
        return Ok((Exponent::Inf, j + 1));
    }
    if chars[j..].starts_with(&['i', 'n', 'f']) {
        return Ok((Exponent::Inf, j + 3));
    }
    let start = j;
    while j < chars.len() && chars[j].is_ascii_digit() {
        j += 1;
    }
    if start == j {
        return parse_err(format!("missing exponent in group '{text}'"));
    }
    let digits: String = chars[start..j].iter().collect();
    Ok((exponent_from_str(&digits)?, j))
}

fn exponent_from_str(e: &str) -> Result<Exponent> {
    match e {
        "*" | "inf" | "∞" => Ok(Exponent::Inf),
        _ => match e.parse::<u32>() {
            Ok(n) => Ok(Exponent::Finite(n)),
            Err(_) => parse_err(format!("bad exponent '{e}'")),
        },
    }
}

/// Writes a group in polynomial notation. Factors must already be sorted.
pub(crate) fn write_group<'a>(
    f: &mut impl fmt::Write,
    factors: impl Iterator<Item = (&'a Var, Exponent)> + Clone,
) -> fmt::Result {
    let mut empty = true;
    let compact = factors.clone().all(|(v, _)| v.is_compact());
    for (v, e) in factors {
        if !empty && !compact {
            f.write_char(' ')?;
        }
        empty = false;
        write!(f, "{v}")?;
        match e {
            Exponent::Finite(1) => {}
            Exponent::Finite(n) => write!(f, "^{n}")?,
            Exponent::Inf => f.write_str("^*")?,
        }
    }
    if empty {
        f.write_char('0')?;
    }
    Ok(())
}

/// Splits on `sep` at bracket depth zero.
pub(crate) fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            c if c == sep && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

/// Parses `{x,y,z}` (braces optional).
pub(crate) fn parse_var_list(s: &str) -> Result<VarSet> {
    let s = s.trim();
    let inner = s
        .strip_prefix('{')
        .and_then(|r| r.strip_suffix('}'))
        .unwrap_or(s);
    let mut out = VarSet::new();
    for part in inner.split(',') {
        let name = part.trim();
        if name.is_empty() {
            continue;
        }
        if !name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            return parse_err(format!("bad variable '{name}'"));
        }
        out.insert(Var::new(name));
    }
    Ok(out)
}

/// Splits `[body]_{vars}` (an optional leading `↓` is ignored) into the
/// body text and the interest set.
pub(crate) fn parse_indexed(s: &str) -> Result<(&str, VarSet)> {
    let s = s.trim();
    let s = s.strip_prefix('↓').unwrap_or(s).trim_start();
    if !s.starts_with('[') {
        return parse_err(format!("expected '[' at start of '{s}'"));
    }
    let mut depth = 0i32;
    let mut close = None;
    for (i, c) in s.char_indices() {
        match c {
            '[' | '(' | '{' => depth += 1,
            ']' | ')' | '}' => {
                depth -= 1;
                if depth == 0 {
                    close = Some(i);
                    break;
                }
            }
            _ => {}
        }
    }
    let Some(close) = close else {
        return parse_err(format!("unbalanced brackets in '{s}'"));
    };
    let body = &s[1..close];
    let rest = s[close + 1..].trim();
    let Some(vars) = rest.strip_prefix('_') else {
        return parse_err(format!("missing interest set '_{{...}}' after '{body}'"));
    };
    Ok((body, parse_var_list(vars)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn show(text: &str) -> String {
        let factors = parse_group(text).unwrap();
        let mut out = String::new();
        write_group(&mut out, factors.iter().map(|(v, e)| (v, *e))).unwrap();
        out
    }

    #[test]
    fn compact_and_spaced_groups() {
        assert_eq!(show("x^2y"), "x^2y");
        assert_eq!(show("u_1v_1^3"), "u_1v_1^3");
        assert_eq!(show("xs^2 y"), "xs^2 y");
        assert_eq!(show("x^*y^inf"), "x^*y^*");
        assert_eq!(show("0"), "0");
    }

    #[test]
    fn bad_groups() {
        assert!(parse_group("x^").is_err());
        assert!(parse_group("2x").is_err());
    }

    #[test]
    fn indexed_split() {
        let (body, u) = parse_indexed("[x^2, xz]_{x,y,z}").unwrap();
        assert_eq!(body, "x^2, xz");
        assert_eq!(u.len(), 3);
        assert!(parse_indexed("[x]").is_err());
        assert_eq!(split_top_level("f(a,b), c", ','), vec!["f(a,b)", " c"]);
    }
}
