//! Dense univariate polynomials over a base field, lowest degree first.

use super::{Field, FieldOps};

pub fn trim(p: &mut Vec<u32>) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

pub fn degree(p: &[u32]) -> Option<usize> {
    p.iter().rposition(|&c| c != 0)
}

/// Horner evaluation over any field.
pub fn eval<F: FieldOps>(f: &F, coeffs: &[F::Elem], x: &F::Elem) -> F::Elem {
    let mut acc = f.zero();
    for c in coeffs.iter().rev() {
        acc = f.add(&f.mul(&acc, x), c);
    }
    acc
}

pub fn add(f: &Field, a: &[u32], b: &[u32]) -> Vec<u32> {
    let n = a.len().max(b.len());
    let mut out: Vec<u32> = (0..n)
        .map(|i| f.add(a.get(i).unwrap_or(&0), b.get(i).unwrap_or(&0)))
        .collect();
    trim(&mut out);
    out
}

pub fn sub(f: &Field, a: &[u32], b: &[u32]) -> Vec<u32> {
    let n = a.len().max(b.len());
    let mut out: Vec<u32> = (0..n)
        .map(|i| f.sub(a.get(i).unwrap_or(&0), b.get(i).unwrap_or(&0)))
        .collect();
    trim(&mut out);
    out
}

pub fn mul(f: &Field, a: &[u32], b: &[u32]) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u32; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = f.add(&out[i + j], &f.mul(x, y));
        }
    }
    trim(&mut out);
    out
}

/// Quotient and remainder; `b` must be nonzero.
pub fn divmod(f: &Field, a: &[u32], b: &[u32]) -> (Vec<u32>, Vec<u32>) {
    let db = degree(b).expect("division by the zero polynomial");
    let lead_inv = f.inv(&b[db]).expect("nonzero leading coefficient");
    let mut r = a.to_vec();
    trim(&mut r);
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut q = vec![0u32; r.len() - db];
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let c = f.mul(&r[dr], &lead_inv);
        q[dr - db] = c;
        for j in 0..=db {
            let t = f.mul(&c, &b[j]);
            r[dr - db + j] = f.sub(&r[dr - db + j], &t);
        }
        trim(&mut r);
    }
    trim(&mut q);
    (q, r)
}

pub fn rem(f: &Field, a: &[u32], b: &[u32]) -> Vec<u32> {
    divmod(f, a, b).1
}

pub fn gcd(f: &Field, a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = rem(f, &a, &b);
        a = b;
        b = r;
    }
    a
}

/// Returns `(g, s)` with `s·a ≡ g (mod m)` and `g = gcd(a, m)`.
pub fn ext_gcd_inverse_part(f: &Field, a: &[u32], m: &[u32]) -> (Vec<u32>, Vec<u32>) {
    let mut r0 = m.to_vec();
    let mut r1 = a.to_vec();
    trim(&mut r0);
    trim(&mut r1);
    let mut s0: Vec<u32> = Vec::new();
    let mut s1: Vec<u32> = vec![1];
    while !r1.is_empty() {
        let (q, r) = divmod(f, &r0, &r1);
        let s = sub(f, &s0, &mul(f, &q, &s1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
    }
    (r0, s0)
}

fn mulmod(f: &Field, a: &[u32], b: &[u32], m: &[u32]) -> Vec<u32> {
    rem(f, &mul(f, a, b), m)
}

fn powmod(f: &Field, a: &[u32], mut e: u64, m: &[u32]) -> Vec<u32> {
    let mut base = rem(f, a, m);
    let mut acc = vec![1u32];
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(f, &acc, &base, m);
        }
        base = mulmod(f, &base, &base, m);
        e >>= 1;
    }
    acc
}

/// Ben-Or irreducibility test: `p` of degree `m` is irreducible iff
/// `gcd(x^{q^i} - x, p) = 1` for every `i <= m/2`.
pub fn is_irreducible(f: &Field, p: &[u32]) -> bool {
    let mut p = p.to_vec();
    trim(&mut p);
    let Some(m) = degree(&p) else { return false };
    if m == 0 {
        return false;
    }
    if m == 1 {
        return true;
    }
    let q = f.order() as u64;
    let x = vec![0u32, 1];
    let mut h = x.clone();
    for _ in 1..=m / 2 {
        h = powmod(f, &h, q, &p);
        let g = gcd(f, &sub(f, &h, &x), &p);
        if degree(&g).unwrap_or(0) > 0 || g.is_empty() {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn irreducibility_over_gf2() {
        let f = Field::gf2();
        assert!(is_irreducible(&f, &[1, 1, 0, 0, 1]));
        assert!(is_irreducible(&f, &[1, 1, 1]));
        assert!(!is_irreducible(&f, &[1, 0, 0, 0, 1]));
        // (x^2 + x + 1)^2 has no roots but factors
        assert!(!is_irreducible(&f, &[1, 0, 1, 0, 1]));
        assert!(!is_irreducible(&f, &[0, 0, 1]));
    }

    #[test]
    fn divmod_reconstructs() {
        let f = Field::prime(7).unwrap();
        let a = vec![3, 1, 4, 1, 5];
        let b = vec![2, 6, 1];
        let (q, r) = divmod(&f, &a, &b);
        assert_eq!(add(&f, &mul(&f, &q, &b), &r), a);
        assert!(degree(&r).is_none_or(|d| d < 2));
    }

    #[test]
    fn inverse_modulo_irreducible() {
        let f = Field::gf16();
        let m = (1..16u32)
            .map(|c| vec![c, 1, 0, 1])
            .find(|m| is_irreducible(&f, m))
            .expect("some x^3 + x + c is irreducible");
        let a = vec![5, 7, 1];
        let (g, s) = ext_gcd_inverse_part(&f, &a, &m);
        assert_eq!(degree(&g), Some(0));
        assert_eq!(rem(&f, &mul(&f, &s, &a), &m), g);
    }
}
