//! Text format for Hochschild cochains on a named basis.
//!
//! ```text
//! cochain := entry (';' entry)*
//! entry   := '[' names? ']' '->' name ':' coeff
//! names   := name ('|' name)*
//! ```
//!
//! `[1|y] -> y : 3` sets the coefficient of `[y]` in `c[1|y]` to 3. The
//! parity of the cochain is read off the first entry; every other entry
//! must agree with it.

use moore_core::{Cochain, CoeffRing, Error, GradedBasis, Result};

pub fn parse(basis: &GradedBasis, ring: &CoeffRing, exact_to: usize, s: &str) -> Result<Cochain> {
    let mut entries = Vec::new();
    let mut offset = 0;
    for part in s.split(';') {
        let start = offset;
        offset += part.len() + 1;
        if part.trim().is_empty() {
            continue;
        }
        entries.push(parse_entry(basis, ring, part, start)?);
    }
    let Some((inputs, out, _, _)) = entries.first() else {
        return Err(Error::parse(0, "empty cochain"));
    };
    let probe = Cochain::zero(basis, ring, false, 0);
    let odd = basis.susp_odd(*out) ^ probe.inputs_odd(inputs);
    let top = entries.iter().map(|e| e.0.len()).max().unwrap_or(0);
    if top > exact_to {
        return Err(Error::parse(
            0,
            format!("arity {top} exceeds the truncation {exact_to}"),
        ));
    }
    let mut c = Cochain::zero(basis, ring, odd, exact_to);
    for (inputs, out, coeff, pos) in entries {
        if basis.susp_odd(out) != odd ^ probe.inputs_odd(&inputs) {
            return Err(Error::ParityMismatch(format!(
                "entry at position {pos} has the wrong parity"
            )));
        }
        c.set(&inputs, out, coeff);
    }
    Ok(c)
}

fn parse_entry(
    basis: &GradedBasis,
    ring: &CoeffRing,
    part: &str,
    at: usize,
) -> Result<(Vec<usize>, usize, moore_core::RingElem, usize)> {
    let name = |s: &str, pos: usize| {
        basis
            .index_of(s.trim())
            .ok_or_else(|| Error::parse(pos, format!("unknown basis element '{}'", s.trim())))
    };
    let lead = part.len() - part.trim_start().len();
    let body = part.trim();
    let pos = at + lead;
    if !body.starts_with('[') {
        return Err(Error::parse(pos, "expected '['"));
    }
    let close = body
        .find(']')
        .ok_or_else(|| Error::parse(pos, "missing ']'"))?;
    let inner = &body[1..close];
    let inputs = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner
            .split('|')
            .map(|s| name(s, pos + 1))
            .collect::<Result<Vec<_>>>()?
    };
    let rest = &body[close + 1..];
    let arrow = rest
        .find("->")
        .ok_or_else(|| Error::parse(pos + close + 1, "expected '->'"))?;
    let rest = &rest[arrow + 2..];
    let colon = rest
        .find(':')
        .ok_or_else(|| Error::parse(pos + close + arrow + 3, "expected ':'"))?;
    let out = name(&rest[..colon], pos + close + arrow + 3)?;
    let coeff_at = pos + close + arrow + 4 + colon;
    let coeff = ring
        .parse_elem(rest[colon + 1..].trim())
        .map_err(|e| match e {
            Error::Parse { pos, msg } => Error::parse(coeff_at + pos, msg),
            e => e,
        })?;
    Ok((inputs, out, coeff, pos))
}

pub fn format(c: &Cochain) -> String {
    let b = c.basis();
    let mut parts = Vec::new();
    for k in 0..=c.exact_to() {
        for (inputs, out, coeff) in c.component(k).entries() {
            let names: Vec<&str> = inputs.iter().map(|&i| b.name(i)).collect();
            parts.push(format!(
                "[{}] -> {} : {}",
                names.join("|"),
                b.name(out),
                c.ring().format(coeff)
            ));
        }
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join("; ")
    }
}
