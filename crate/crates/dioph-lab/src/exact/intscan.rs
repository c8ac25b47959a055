//! Lexicographic scans over integer boxes and sup-norm shells.
//!
//! Witness searches are specified to scan by increasing sup norm with
//! lexicographic tie-break, so the shell generator emits exactly the
//! points of norm `r` in lexicographic order without touching the
//! interior of the box.

/// Visit every point of `Z^dim` with sup norm exactly `r`, in
/// lexicographic order. The callback returns `false` to stop early;
/// the function reports whether the scan ran to completion.
pub fn scan_shell<F: FnMut(&[i64]) -> bool>(dim: usize, r: i64, f: &mut F) -> bool {
    assert!(dim >= 1 && r >= 0);
    if r == 0 {
        return f(&vec![0; dim]);
    }
    let mut buf = vec![0i64; dim];
    shell_rec(&mut buf, 0, r, false, f)
}

fn shell_rec<F: FnMut(&[i64]) -> bool>(
    buf: &mut Vec<i64>,
    level: usize,
    r: i64,
    has_extreme: bool,
    f: &mut F,
) -> bool {
    let dim = buf.len();
    if level == dim {
        return f(buf);
    }
    let last = level + 1 == dim;
    if last && !has_extreme {
        for c in [-r, r] {
            buf[level] = c;
            if !f(buf) {
                return false;
            }
        }
        return true;
    }
    for c in -r..=r {
        buf[level] = c;
        if !shell_rec(buf, level + 1, r, has_extreme || c.abs() == r, f) {
            return false;
        }
    }
    true
}

/// Visit shells `r = r_lo ..= r_hi` in increasing order.
pub fn scan_shells<F: FnMut(i64, &[i64]) -> bool>(
    dim: usize,
    r_lo: i64,
    r_hi: i64,
    f: &mut F,
) -> bool {
    for r in r_lo..=r_hi {
        let mut g = |p: &[i64]| f(r, p);
        if !scan_shell(dim, r, &mut g) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shell_sizes() {
        for dim in 1..=3usize {
            for r in 1..=4i64 {
                let mut count = 0usize;
                scan_shell(dim, r, &mut |_| {
                    count += 1;
                    true
                });
                let expect = ((2 * r + 1).pow(dim as u32) - (2 * r - 1).pow(dim as u32)) as usize;
                assert_eq!(count, expect, "dim {dim} r {r}");
            }
        }
    }

    #[test]
    fn shell_is_lex_sorted_and_on_shell() {
        let mut prev: Option<Vec<i64>> = None;
        scan_shell(3, 2, &mut |p| {
            assert_eq!(p.iter().map(|x| x.abs()).max().unwrap(), 2);
            if let Some(q) = &prev {
                assert!(q.as_slice() < p, "{q:?} !< {p:?}");
            }
            prev = Some(p.to_vec());
            true
        });
    }

    #[test]
    fn early_stop() {
        let mut seen = 0;
        let complete = scan_shell(2, 1, &mut |_| {
            seen += 1;
            seen < 3
        });
        assert!(!complete);
        assert_eq!(seen, 3);
    }
}
