use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::poly;
use super::{FieldOps, SymbolSpace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Prime,
    Binary,
}

struct Inner {
    kind: Kind,
    characteristic: u32,
    degree: u32,
    order: u32,
    // bitmask of the binary modulus including the leading term; 0 for prime fields
    modulus: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
    // full product table for orders up to 256
    table: Vec<u8>,
}

/// A prime field GF(p) or a binary field GF(2^w) with an irreducible modulus.
///
/// Elements are plain `u32` values in `0..order`; for binary fields bit `i` is the
/// coefficient of `x^i`. Cloning is cheap.
#[derive(Clone)]
pub struct Field {
    inner: Arc<Inner>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.inner.kind {
            Kind::Prime => write!(f, "GF({})", self.inner.characteristic),
            Kind::Binary => write!(f, "GF(2^{}; {:#x})", self.inner.degree, self.inner.modulus),
        }
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.inner.kind == other.inner.kind
            && self.inner.characteristic == other.inner.characteristic
            && self.inner.degree == other.inner.degree
            && self.inner.modulus == other.inner.modulus
    }
}

impl Eq for Field {}

fn default_binary_modulus(w: u32) -> Option<u32> {
    Some(match w {
        1 => 0b11,
        2 => 0b111,
        3 => 0b1011,
        4 => 0b1_0011,
        5 => 0b10_0101,
        6 => 0b100_0011,
        7 => 0b1000_1001,
        8 => 0x11d,
        9 => 0x211,
        10 => 0x409,
        11 => 0x805,
        12 => 0x1053,
        13 => 0x201b,
        14 => 0x4443,
        15 => 0x8003,
        16 => 0x1100b,
        _ => return None,
    })
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut i = 2u64;
    while i * i <= p {
        if p % i == 0 {
            return false;
        }
        i += 1;
    }
    true
}

fn clmul_mod(mut a: u32, mut b: u32, modulus: u32, w: u32) -> u32 {
    let mut acc = 0u32;
    let top = 1u32 << w;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & top != 0 {
            a ^= modulus;
        }
    }
    acc
}

impl Field {
    /// GF(p) for a prime `p < 2^31`.
    pub fn prime(p: u32) -> Result<Self> {
        if !is_prime(p as u64) || p >= 1 << 31 {
            return Err(Error::NotPrime(p as u64));
        }
        let mut table = Vec::new();
        if p <= 256 {
            table = vec![0u8; (p * p) as usize];
            for a in 0..p {
                for b in 0..p {
                    table[(a * p + b) as usize] = ((a as u64 * b as u64) % p as u64) as u8;
                }
            }
        }
        Ok(Field {
            inner: Arc::new(Inner {
                kind: Kind::Prime,
                characteristic: p,
                degree: 1,
                order: p,
                modulus: 0,
                exp: Vec::new(),
                log: Vec::new(),
                table,
            }),
        })
    }

    /// GF(2^w) with a built-in irreducible modulus, `1 <= w <= 16`.
    pub fn binary(w: u32) -> Result<Self> {
        let m = default_binary_modulus(w)
            .ok_or_else(|| Error::Params(format!("binary field degree {w} outside 1..=16")))?;
        Self::binary_with_modulus(w, m)
    }

    /// GF(2^w) with an explicit modulus bitmask (bit `w` must be set).
    pub fn binary_with_modulus(w: u32, modulus: u32) -> Result<Self> {
        if w == 0 || w > 16 {
            return Err(Error::Params(format!("binary field degree {w} outside 1..=16")));
        }
        if modulus >> w != 1 {
            return Err(Error::NotIrreducible(format!("{modulus:#x} does not have degree {w}")));
        }
        let gf2 = Field::prime(2)?;
        let coeffs: Vec<u32> = (0..=w).map(|i| (modulus >> i) & 1).collect();
        if !poly::is_irreducible(&gf2, &coeffs) {
            return Err(Error::NotIrreducible(format!("{modulus:#x} over GF(2)")));
        }
        let order = 1u32 << w;
        let n = order - 1;
        // any irreducible modulus works: search for a primitive element
        let mut gen = None;
        for g in 2..order.max(3) {
            if w == 1 {
                gen = Some(1);
                break;
            }
            let mut x = 1u32;
            let mut period = 0;
            loop {
                x = clmul_mod(x, g, modulus, w);
                period += 1;
                if x == 1 {
                    break;
                }
            }
            if period == n {
                gen = Some(g);
                break;
            }
        }
        let g = gen.expect("multiplicative group of a finite field is cyclic");
        let mut exp = vec![0u32; 2 * n as usize];
        let mut log = vec![0u32; order as usize];
        let mut x = 1u32;
        for i in 0..n {
            exp[i as usize] = x;
            exp[(i + n) as usize] = x;
            log[x as usize] = i;
            x = clmul_mod(x, g, modulus, w);
        }
        let mut table = Vec::new();
        if order <= 256 {
            table = vec![0u8; (order * order) as usize];
            for a in 1..order {
                for b in 1..order {
                    let v = exp[(log[a as usize] + log[b as usize]) as usize];
                    table[(a * order + b) as usize] = v as u8;
                }
            }
        }
        Ok(Field {
            inner: Arc::new(Inner {
                kind: Kind::Binary,
                characteristic: 2,
                degree: w,
                order,
                modulus,
                exp,
                log,
                table,
            }),
        })
    }

    pub fn gf2() -> Self {
        Field::prime(2).expect("2 is prime")
    }

    pub fn gf16() -> Self {
        Field::binary(4).expect("built-in modulus")
    }

    pub fn gf256() -> Self {
        Field::binary(8).expect("built-in modulus")
    }

    pub fn order(&self) -> u32 {
        self.inner.order
    }

    pub fn characteristic(&self) -> u32 {
        self.inner.characteristic
    }

    /// Degree over the prime subfield.
    pub fn degree(&self) -> u32 {
        self.inner.degree
    }

    /// Modulus coefficients, lowest degree first (`[0, 1]` for prime fields).
    pub fn modulus_coeffs(&self) -> Vec<u32> {
        match self.inner.kind {
            Kind::Prime => vec![0, 1],
            Kind::Binary => (0..=self.inner.degree).map(|i| (self.inner.modulus >> i) & 1).collect(),
        }
    }

    pub fn is_binary(&self) -> bool {
        self.inner.kind == Kind::Binary
    }

    /// Checks that `v` is a canonical element.
    pub fn elem(&self, v: u64) -> Result<u32> {
        if v < self.inner.order as u64 {
            Ok(v as u32)
        } else {
            Err(Error::NotInField(v))
        }
    }

    /// The fixed primitive element used by the log tables (binary) or the
    /// smallest generator (prime).
    pub fn primitive(&self) -> u32 {
        match self.inner.kind {
            Kind::Binary => {
                if self.inner.order == 2 {
                    1
                } else {
                    self.inner.exp[1]
                }
            }
            Kind::Prime => {
                let p = self.inner.characteristic;
                (1..p)
                    .find(|&g| {
                        let mut x = 1u64;
                        for i in 1..p {
                            x = x * g as u64 % p as u64;
                            if x == 1 {
                                return i == p - 1;
                            }
                        }
                        false
                    })
                    .unwrap_or(1)
            }
        }
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    #[inline]
    fn mul_raw(&self, a: u32, b: u32) -> u32 {
        let inner = &*self.inner;
        if !inner.table.is_empty() {
            return inner.table[(a * inner.order + b) as usize] as u32;
        }
        match inner.kind {
            Kind::Prime => ((a as u64 * b as u64) % inner.characteristic as u64) as u32,
            Kind::Binary => {
                if a == 0 || b == 0 {
                    0
                } else {
                    inner.exp[(inner.log[a as usize] + inner.log[b as usize]) as usize]
                }
            }
        }
    }
}

impl FieldOps for Field {
    type Elem = u32;

    fn zero(&self) -> u32 {
        0
    }

    fn one(&self) -> u32 {
        1
    }

    #[inline]
    fn add(&self, a: &u32, b: &u32) -> u32 {
        match self.inner.kind {
            Kind::Binary => a ^ b,
            Kind::Prime => {
                let p = self.inner.characteristic as u64;
                ((*a as u64 + *b as u64) % p) as u32
            }
        }
    }

    #[inline]
    fn sub(&self, a: &u32, b: &u32) -> u32 {
        match self.inner.kind {
            Kind::Binary => a ^ b,
            Kind::Prime => {
                let p = self.inner.characteristic as u64;
                ((*a as u64 + p - *b as u64) % p) as u32
            }
        }
    }

    #[inline]
    fn neg(&self, a: &u32) -> u32 {
        self.sub(&0, a)
    }

    #[inline]
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        self.mul_raw(*a, *b)
    }

    fn inv(&self, a: &u32) -> Option<u32> {
        if *a == 0 {
            return None;
        }
        let inner = &*self.inner;
        Some(match inner.kind {
            Kind::Binary => {
                if inner.order == 2 {
                    1
                } else {
                    let n = inner.order - 1;
                    inner.exp[((n - inner.log[*a as usize]) % n) as usize]
                }
            }
            Kind::Prime => self.pow(*a, inner.characteristic as u64 - 2),
        })
    }

    fn is_zero(&self, a: &u32) -> bool {
        *a == 0
    }

    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        rng.random_range(0..self.inner.order)
    }
}

impl SymbolSpace for Field {
    type Sym = u32;

    fn zero_sym(&self) -> u32 {
        0
    }

    fn add_sym(&self, a: &u32, b: &u32) -> u32 {
        self.add(a, b)
    }

    fn scale_sym(&self, c: u32, a: &u32) -> u32 {
        self.mul(&c, a)
    }
}

/// A field value bound to its field, with checked arithmetic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldElement {
    field: Field,
    value: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl FieldElement {
    pub fn new(field: &Field, value: u64) -> Result<Self> {
        Ok(FieldElement { field: field.clone(), value: field.elem(value)? })
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn apply(&self, op: ArithOp, rhs: &FieldElement) -> Result<FieldElement> {
        if self.field != rhs.field {
            return Err(Error::FieldMismatch);
        }
        let f = &self.field;
        let value = match op {
            ArithOp::Add => f.add(&self.value, &rhs.value),
            ArithOp::Sub => f.sub(&self.value, &rhs.value),
            ArithOp::Mul => f.mul(&self.value, &rhs.value),
            ArithOp::Div => {
                let inv = f.inv(&rhs.value).ok_or(Error::DivisionByZero)?;
                f.mul(&self.value, &inv)
            }
        };
        Ok(FieldElement { field: f.clone(), value })
    }

    pub fn add(&self, rhs: &FieldElement) -> Result<FieldElement> {
        self.apply(ArithOp::Add, rhs)
    }

    pub fn sub(&self, rhs: &FieldElement) -> Result<FieldElement> {
        self.apply(ArithOp::Sub, rhs)
    }

    pub fn mul(&self, rhs: &FieldElement) -> Result<FieldElement> {
        self.apply(ArithOp::Mul, rhs)
    }

    pub fn div(&self, rhs: &FieldElement) -> Result<FieldElement> {
        self.apply(ArithOp::Div, rhs)
    }

    pub fn inv(&self) -> Result<FieldElement> {
        let value = self.field.inv(&self.value).ok_or(Error::DivisionByZero)?;
        Ok(FieldElement { field: self.field.clone(), value })
    }
}

/// Horner evaluation of `Σ c_j x^j` with field-checked operands.
pub fn poly_eval(coeffs: &[FieldElement], x: &FieldElement) -> Result<FieldElement> {
    let first = coeffs
        .last()
        .ok_or_else(|| Error::Params("empty coefficient list".into()))?;
    let mut acc = first.clone();
    for c in coeffs.iter().rev().skip(1) {
        acc = acc.mul(x)?.add(c)?;
    }
    Ok(acc)
}
