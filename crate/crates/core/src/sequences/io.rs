use std::io::{BufRead, Write};

use super::{FamilyTag, IntegerSequence, Term};
use crate::error::{Error, Result};

/// Writes `seq` as `# key=value` header lines followed by one decimal term per
/// line. Only ascending sequences can be written.
pub fn write_sequence<W: Write>(seq: &IntegerSequence, mut w: W) -> Result<()> {
    if let Some(k) = seq.terms().windows(2).position(|p| p[0] >= p[1]) {
        return Err(Error::invalid(format!(
            "sequence files must be ascending; violated at k = {}",
            k + 1
        )));
    }
    writeln!(w, "# family={}", seq.family())?;
    for (k, v) in seq.params() {
        writeln!(w, "# {k}={v}")?;
    }
    if let Some(s) = seq.seed() {
        writeln!(w, "# seed={s}")?;
    }
    for t in seq.terms() {
        writeln!(w, "{t}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sequence<R: BufRead>(r: R) -> Result<IntegerSequence> {
    let mut family = FamilyTag::Custom;
    let mut params = Vec::new();
    let mut seed = None;
    let mut terms: Vec<Term> = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let parse_err = |msg: String| Error::Parse { line: lineno, msg };
        if let Some(h) = line.strip_prefix('#') {
            if !terms.is_empty() {
                return Err(parse_err("header line after data".into()));
            }
            let Some((k, v)) = h.trim().split_once('=') else {
                continue;
            };
            let (k, v) = (k.trim(), v.trim());
            match k {
                "family" => family = v.parse().map_err(|e: Error| parse_err(e.to_string()))?,
                "seed" => {
                    seed = Some(v.parse::<u64>().map_err(|e| parse_err(format!("bad seed: {e}")))?)
                }
                _ => params.push((k.to_string(), v.to_string())),
            }
            continue;
        }
        if line.trim().is_empty() {
            return Err(parse_err("blank line".into()));
        }
        let t: Term = line.parse().map_err(|e: Error| parse_err(e.to_string()))?;
        if let Some(prev) = terms.last() {
            if *prev >= t {
                return Err(parse_err("terms must be strictly ascending".into()));
            }
        }
        terms.push(t);
    }
    IntegerSequence::new(terms, family, params, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{gen_geometric, gen_random_omega, OmegaSchedule};

    fn round_trip(seq: &IntegerSequence) -> IntegerSequence {
        let mut buf = Vec::new();
        write_sequence(seq, &mut buf).unwrap();
        read_sequence(&buf[..]).unwrap()
    }

    #[test]
    fn round_trips() {
        let g = gen_geometric(2, 300).unwrap();
        assert_eq!(round_trip(&g), g);
        let r = gen_random_omega(&OmegaSchedule::sqrt(), 16, 40, 3).unwrap();
        assert_eq!(round_trip(&r), r);
    }

    #[test]
    fn format() {
        let mut buf = Vec::new();
        write_sequence(&gen_geometric(2, 3).unwrap(), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "# family=geometric\n# base=2\n# count=3\n2\n4\n8\n"
        );
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["1\n\n2\n", "3\n2\n", "1\nx\n", "0\n", "1\n# seed=3\n"] {
            assert!(read_sequence(bad.as_bytes()).is_err(), "{bad:?}");
        }
        let e = read_sequence("1\n2\n2\n".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
        let plain = read_sequence("5\n7\n".as_bytes()).unwrap();
        assert_eq!(plain.family(), FamilyTag::Custom);
        assert_eq!(plain.len(), 2);
    }
}
