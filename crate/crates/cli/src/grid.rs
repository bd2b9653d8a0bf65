//! Parsing of `--d`, `--N` and `--eps` values.

/// Parses `"3"`, `"1,2,5"`, `"1..4"` (inclusive) or mixtures such as
/// `"1..3,8"`. The result is sorted and deduplicated.
pub fn parse_usize_list(text: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            return Err(format!("empty entry in list {text:?}"));
        }
        if let Some((a, b)) = part.split_once("..") {
            let a = parse_usize(a)?;
            let b = parse_usize(b.strip_prefix('=').unwrap_or(b))?;
            if a > b {
                return Err(format!("range {part:?} is empty"));
            }
            if b - a > 100_000 {
                return Err(format!("range {part:?} is too long"));
            }
            out.extend(a..=b);
        } else {
            out.push(parse_usize(part)?);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.trim().parse().map_err(|_| format!("expected a nonnegative integer, got {s:?}"))
}

/// Parses a comma-separated list of finite reals, keeping the given order.
pub fn parse_f64_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|part| {
            let v: f64 = part.trim().parse().map_err(|_| format!("expected a number, got {part:?}"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("expected a finite number, got {part:?}"))
            }
        })
        .collect()
}
