//! Small combinatorial helpers.

/// All `r`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if r > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..r).collect();
    loop {
        out.push(cur.clone());
        let mut i = r;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - r {
                break;
            }
            if i == 0 && cur[0] == n - r {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..r {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

pub fn binomial(n: usize, r: usize) -> usize {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combination_counts() {
        for n in 0..8 {
            for r in 0..=n {
                let c = combinations(n, r);
                assert_eq!(c.len(), binomial(n, r), "n={n} r={r}");
                assert!(c.windows(2).all(|w| w[0] < w[1]));
            }
        }
        assert_eq!(combinations(4, 2)[0], vec![0, 1]);
        assert!(combinations(2, 3).is_empty());
    }
}
