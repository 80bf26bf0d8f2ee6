//! SDPA sparse text export and import.
//!
//! Problems are written in the SDPA dual form `max F0 . Y  s.t.  Fk . Y = c_k`:
//! `F0` is the objective (negated for minimization), `Fk` the k-th equality
//! and `c` the right-hand sides. Free blocks use a negative block size and
//! diagonal entries; comment lines (`*`) record the sense and block names so
//! that parsing an export reproduces the problem exactly.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::sdp::{Block, BlockKind, Entry, LinearForm, SdpProblem, Sense};

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders `prob` as SDPA sparse text with 17 significant digits per value.
pub fn export_sdpa(prob: &SdpProblem) -> String {
    let mut out = String::new();
    let sense = match prob.sense {
        Sense::Min => "min",
        Sense::Max => "max",
    };
    let _ = writeln!(out, "* cubicmin sdpa export");
    let _ = writeln!(out, "* sense {sense}");
    for (k, b) in prob.blocks.iter().enumerate() {
        let kind = match b.kind {
            BlockKind::Psd => "psd",
            BlockKind::Free => "free",
        };
        let _ = writeln!(out, "* block {} {} {} {}", k + 1, kind, b.size, b.name);
    }
    let _ = writeln!(out, "{}", prob.equalities.len());
    let _ = writeln!(out, "{}", prob.blocks.len());
    let sizes: Vec<String> = prob
        .blocks
        .iter()
        .map(|b| match b.kind {
            BlockKind::Psd => b.size.to_string(),
            BlockKind::Free => format!("-{}", b.size),
        })
        .collect();
    let _ = writeln!(out, "{}", sizes.join(" "));
    let rhs: Vec<String> = prob.equalities.iter().map(|e| fmt(e.rhs)).collect();
    let _ = writeln!(out, "{}", rhs.join(" "));

    let obj_sign = match prob.sense {
        Sense::Min => -1.0,
        Sense::Max => 1.0,
    };
    let mut write_form = |matno: usize, form: &LinearForm, sign: f64| {
        for (e, c) in form {
            let (i, j, v) = match prob.blocks[e.block].kind {
                BlockKind::Psd if e.i != e.j => (e.i, e.j, c / 2.0),
                BlockKind::Psd => (e.i, e.j, *c),
                BlockKind::Free => (e.i, e.i, *c),
            };
            let _ = writeln!(out, "{} {} {} {} {}", matno, e.block + 1, i + 1, j + 1, fmt(sign * v));
        }
    };
    write_form(0, &prob.objective, obj_sign);
    for (k, eq) in prob.equalities.iter().enumerate() {
        write_form(k + 1, &eq.coeffs, 1.0);
    }
    out
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::SdpaParse {
        line,
        msg: msg.into(),
    }
}

/// Parses SDPA sparse text. Without cubicmin comment headers the problem is
/// read as a maximization with positive sizes as psd blocks and negative
/// sizes as free blocks.
pub fn parse_sdpa(text: &str) -> Result<SdpProblem> {
    let mut sense = Sense::Max;
    let mut names: Vec<(usize, String)> = Vec::new();
    let mut tokens: Vec<(usize, String)> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let t = raw.trim();
        if let Some(c) = t.strip_prefix('*').or_else(|| t.strip_prefix('"')) {
            let words: Vec<&str> = c.split_whitespace().collect();
            match words.as_slice() {
                ["sense", "min"] => sense = Sense::Min,
                ["sense", "max"] => sense = Sense::Max,
                ["block", k, _, _, rest @ ..] => {
                    let k: usize = k.parse().map_err(|_| perr(line, "bad block index"))?;
                    names.push((k, rest.join(" ")));
                }
                _ => {}
            }
            continue;
        }
        for tok in t.split(|c: char| c.is_whitespace() || c == ',' || c == '{' || c == '}' || c == '(' || c == ')') {
            if !tok.is_empty() {
                tokens.push((line, tok.to_string()));
            }
        }
    }
    let mut it = tokens.into_iter();
    fn take(it: &mut impl Iterator<Item = (usize, String)>, what: &str) -> Result<(usize, String)> {
        it.next()
            .ok_or_else(|| perr(0, format!("unexpected end of input, expected {what}")))
    }
    let (l, m) = take(&mut it, "constraint count")?;
    let m: usize = m.parse().map_err(|_| perr(l, "bad constraint count"))?;
    let (l, nb) = take(&mut it, "block count")?;
    let nb: usize = nb.parse().map_err(|_| perr(l, "bad block count"))?;
    let mut prob = SdpProblem::new(sense);
    for k in 0..nb {
        let (l, s) = take(&mut it, "block size")?;
        let s: i64 = s.parse().map_err(|_| perr(l, "bad block size"))?;
        let name = names
            .iter()
            .find(|(i, _)| *i == k + 1)
            .map(|(_, n)| n.clone())
            .unwrap_or_else(|| format!("B{}", k + 1));
        prob.blocks.push(Block {
            name,
            kind: if s >= 0 { BlockKind::Psd } else { BlockKind::Free },
            size: s.unsigned_abs() as usize,
        });
    }
    for _ in 0..m {
        let (l, v) = take(&mut it, "right-hand side")?;
        let rhs: f64 = v.parse().map_err(|_| perr(l, "bad right-hand side"))?;
        prob.equalities.push(crate::sdp::Equality {
            coeffs: LinearForm::new(),
            rhs,
        });
    }
    let obj_sign = match sense {
        Sense::Min => -1.0,
        Sense::Max => 1.0,
    };
    loop {
        let Some((l, matno)) = it.next() else { break };
        let mut field = |what: &str| -> Result<String> {
            it.next()
                .map(|(_, s)| s)
                .ok_or_else(|| perr(l, format!("truncated entry, missing {what}")))
        };
        let matno: usize = matno.parse().map_err(|_| perr(l, "bad matrix number"))?;
        let blk: usize = field("block")?.parse().map_err(|_| perr(l, "bad block number"))?;
        let i: usize = field("row")?.parse().map_err(|_| perr(l, "bad row"))?;
        let j: usize = field("column")?.parse().map_err(|_| perr(l, "bad column"))?;
        let v: f64 = field("value")?.parse().map_err(|_| perr(l, "bad value"))?;
        if matno > m || blk == 0 || blk > nb || i == 0 || j == 0 {
            return Err(perr(l, "entry index out of range"));
        }
        let b = &prob.blocks[blk - 1];
        let (i, j) = (i.min(j) - 1, i.max(j) - 1);
        let (entry, coef) = match b.kind {
            BlockKind::Psd if i != j => (Entry { block: blk - 1, i, j }, 2.0 * v),
            BlockKind::Psd => (Entry { block: blk - 1, i, j }, v),
            BlockKind::Free if i == j => (Entry { block: blk - 1, i, j: 0 }, v),
            BlockKind::Free => return Err(perr(l, "off-diagonal entry in a diagonal block")),
        };
        if matno == 0 {
            prob.add_objective(entry, obj_sign * coef);
        } else {
            let eq = &mut prob.equalities[matno - 1].coeffs;
            *eq.entry(entry).or_insert(0.0) += coef;
        }
    }
    prob.validate()?;
    Ok(prob)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::tests::{forced_negative, forced_one, two_by_two};

    #[test]
    fn round_trips() {
        for p in [forced_one(), two_by_two(), forced_negative()] {
            let text = export_sdpa(&p);
            assert_eq!(parse_sdpa(&text).unwrap(), p, "{text}");
        }
    }

    #[test]
    fn awkward_values_round_trip() {
        let mut p = two_by_two();
        let x = p.vec(0, 0);
        let m01 = p.mat(1, 0, 1);
        p.add_objective(x, 0.1 + 0.2 - 1.0);
        p.add_equality([(m01, std::f64::consts::PI), (x, -1e-300)], 1.0 / 3.0);
        p.sense = Sense::Max;
        assert_eq!(parse_sdpa(&export_sdpa(&p)).unwrap(), p);
    }

    #[test]
    fn header_layout() {
        let text = export_sdpa(&two_by_two());
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('*')).collect();
        assert_eq!(body[0], "3");
        assert_eq!(body[1], "2");
        assert_eq!(body[2], "-1 2");
        assert!(body.contains(&"0 1 1 1 -1.0000000000000000e0"));
        assert!(body.contains(&"3 2 1 2 5.0000000000000000e-1"));
    }

    #[test]
    fn plain_sdpa_input() {
        let text = "2\n1\n2\n1.0 2.0\n0 1 1 1 1.0\n1 1 1 1 1.0\n2 1 1 2 0.5\n2 1 2 2 1.0\n";
        let p = parse_sdpa(text).unwrap();
        assert_eq!(p.sense, Sense::Max);
        assert_eq!(p.blocks[0].kind, BlockKind::Psd);
        assert_eq!(p.equalities[1].coeffs[&Entry { block: 0, i: 0, j: 1 }], 1.0);
        assert!(parse_sdpa("1\n1\n2\n").is_err());
        assert!(parse_sdpa("1\n1\n2\n1.0\n3 1 1 1 1.0\n").is_err());
    }
}
