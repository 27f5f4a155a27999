//! Storage and bandwidth bounds for generalized regenerating codes.
//!
//! All quantities are exact symbol counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `[n, k, d, l, B, M]` parameter set: `n` nodes, any `k` reconstruct,
/// `d` helpers per repair, `l` symbols per node, helper downloads `B`
/// (one entry per helper, any order), file size `M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub l: u64,
    pub betas: Vec<u64>,
    pub m: u64,
}

impl CodeParams {
    pub fn new(n: usize, k: usize, d: usize, l: u64, betas: Vec<u64>, m: u64) -> Result<Self> {
        let p = CodeParams { n, k, d, l, betas, m };
        p.validate()?;
        Ok(p)
    }

    /// The minimum-storage point for `B`: `l = Δ_{d-k+1}(B)`, `M = k·l`.
    pub fn msr(n: usize, k: usize, d: usize, betas: Vec<u64>) -> Result<Self> {
        if k == 0 || k > d || betas.len() != d {
            return Err(Error::Params(format!("k = {k}, d = {d}, |B| = {}", betas.len())));
        }
        let l = delta_r(&betas, d - k + 1)?;
        Self::new(n, k, d, l, betas, k as u64 * l)
    }

    pub fn uniform_msr(n: usize, k: usize, d: usize, beta: u64) -> Result<Self> {
        Self::msr(n, k, d, vec![beta; d])
    }

    pub fn validate(&self) -> Result<()> {
        let CodeParams { n, k, d, l, .. } = *self;
        if k == 0 {
            return Err(Error::Params("k must be at least 1".into()));
        }
        if k > d {
            return Err(Error::Params(format!("k = {k} exceeds d = {d}")));
        }
        if d + 1 > n {
            return Err(Error::Params(format!("d = {d} needs at least {} nodes, n = {n}", d + 1)));
        }
        if l == 0 {
            return Err(Error::Params("l must be at least 1".into()));
        }
        if self.betas.len() != d {
            return Err(Error::Params(format!("{} download amounts for d = {d}", self.betas.len())));
        }
        Ok(())
    }

    pub fn is_msr(&self) -> bool {
        delta_r(&self.betas, self.d - self.k + 1).is_ok_and(|x| x == self.l)
            && self.m == self.k as u64 * self.l
    }
}

fn sorted(b: &[u64]) -> Vec<u64> {
    let mut v = b.to_vec();
    v.sort_unstable();
    v
}

/// Sum of the `r` smallest entries of `b`.
pub fn delta_r(b: &[u64], r: usize) -> Result<u64> {
    if r > b.len() {
        return Err(Error::Params(format!("r = {r} exceeds |B| = {}", b.len())));
    }
    Ok(sorted(b)[..r].iter().sum())
}

/// Sum of the `r` largest entries of `b`.
pub fn omega_r(b: &[u64], r: usize) -> Result<u64> {
    if r > b.len() {
        return Err(Error::Params(format!("r = {r} exceeds |B| = {}", b.len())));
    }
    Ok(sorted(b)[b.len() - r..].iter().sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutsetBound {
    /// `Σ_{i=0}^{k-1} min{l, Δ_{d-i}(B)}`.
    pub rhs: u64,
    /// Whether the file size `M` respects it.
    pub satisfied: bool,
}

fn partial_cut_sum(p: &CodeParams, terms: usize) -> u64 {
    let s = sorted(&p.betas);
    (0..terms)
        .map(|i| {
            let r = p.d - i;
            p.l.min(s[..r].iter().sum())
        })
        .sum()
}

pub fn cutset_bound(p: &CodeParams) -> CutsetBound {
    let rhs = partial_cut_sum(p, p.k);
    CutsetBound { rhs, satisfied: p.m <= rhs }
}

/// `(l_MSR, l_MBR) = (Δ_{d-k+1}(B), Σ B)`.
pub fn msr_mbr_points(n: usize, k: usize, d: usize, b: &[u64]) -> Result<(u64, u64)> {
    if k == 0 || k > d || d + 1 > n || b.len() != d {
        return Err(Error::Params(format!("n = {n}, k = {k}, d = {d}, |B| = {}", b.len())));
    }
    Ok((delta_r(b, d - k + 1)?, b.iter().sum()))
}

/// Lower bound on what any helper set of size at least `d-k+1` must send:
/// `M - Σ_{i=0}^{k-2} min{l, Δ_{d-i}(B)}`.
///
/// With `at_msr` set, the parameters must sit at the minimum-storage point,
/// where the bound equals `l`.
pub fn ip_lower_bound(p: &CodeParams, at_msr: bool) -> Result<i64> {
    let v = p.m as i64 - partial_cut_sum(p, p.k - 1) as i64;
    if at_msr {
        if !p.is_msr() {
            return Err(Error::NotMsr(format!("l = {}, M = {}", p.l, p.m)));
        }
        debug_assert_eq!(v, p.l as i64);
    }
    Ok(v)
}

/// The same bound with `M` replaced by the cut-set value; this is the bound
/// that holds under functional repair, `min{l, Δ_{d-k+1}(B)}`.
pub fn functional_ip_lower_bound(p: &CodeParams) -> u64 {
    cutset_bound(p).rhs - partial_cut_sum(p, p.k - 1)
}

/// Minimum cut capacity around a helper set of size at least `d-k+1+2t`
/// that contains all `t` corrupted helpers: the IP bound plus `2·Ω_t(B)`.
pub fn adversarial_cut_bound(p: &CodeParams, t: usize) -> Result<i64> {
    let omega = omega_r(&p.betas, t)?;
    Ok(ip_lower_bound(p, false)? + 2 * omega as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_and_omega_examples() {
        assert_eq!(delta_r(&[3, 1, 2], 2).unwrap(), 3);
        assert_eq!(delta_r(&[1; 6], 3).unwrap(), 3);
        assert_eq!(delta_r(&[4, 2], 0).unwrap(), 0);
        assert_eq!(omega_r(&[3, 1, 2], 2).unwrap(), 5);
        assert_eq!(omega_r(&[5; 9], 1).unwrap(), 5);
        assert_eq!(omega_r(&[3, 1, 2], 3).unwrap(), 6);
        assert!(delta_r(&[1, 2], 3).is_err());
    }

    #[test]
    fn cutset_examples() {
        let p = CodeParams::new(3, 1, 2, 10, vec![2, 3], 5).unwrap();
        assert_eq!(cutset_bound(&p).rhs, 5);
        let pm = CodeParams::new(7, 4, 6, 3, vec![1; 6], 12).unwrap();
        let c = cutset_bound(&pm);
        assert_eq!(c.rhs, 12);
        assert!(c.satisfied);
    }

    #[test]
    fn msr_mbr_examples() {
        assert_eq!(msr_mbr_points(5, 2, 4, &[1, 1, 2, 2]).unwrap(), (4, 6));
        assert_eq!(msr_mbr_points(7, 3, 6, &[1; 6]).unwrap(), (4, 6));
        assert_eq!(msr_mbr_points(6, 4, 4, &[7, 3, 9, 4]).unwrap().0, 3);
    }

    #[test]
    fn ip_bound_examples() {
        let pm = CodeParams::new(7, 4, 6, 3, vec![1; 6], 12).unwrap();
        assert_eq!(ip_lower_bound(&pm, true).unwrap(), 3);
        let u = CodeParams::uniform_msr(10, 5, 9, 5).unwrap();
        assert_eq!(ip_lower_bound(&u, true).unwrap(), 25);
        let not_msr = CodeParams::new(7, 4, 6, 4, vec![1; 6], 12).unwrap();
        assert!(ip_lower_bound(&not_msr, true).is_err());
        let func = CodeParams::new(7, 3, 6, 9, vec![1, 2, 2, 3, 3, 3], 1).unwrap();
        assert_eq!(functional_ip_lower_bound(&func), delta_r(&func.betas, 4).unwrap());
    }

    #[test]
    fn adversarial_examples() {
        let u = CodeParams::uniform_msr(10, 5, 9, 5).unwrap();
        assert_eq!(adversarial_cut_bound(&u, 1).unwrap(), 25 + 10);
        assert_eq!(adversarial_cut_bound(&u, 0).unwrap(), ip_lower_bound(&u, false).unwrap());
    }

    #[test]
    fn validation() {
        assert!(CodeParams::new(7, 0, 6, 3, vec![1; 6], 12).is_err());
        assert!(CodeParams::new(6, 4, 6, 3, vec![1; 6], 12).is_err());
        assert!(CodeParams::new(7, 4, 6, 0, vec![1; 6], 12).is_err());
        assert!(CodeParams::new(7, 4, 6, 3, vec![1; 5], 12).is_err());
    }
}
