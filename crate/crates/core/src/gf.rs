//! Arithmetic in the binary extension field GF(2^v) through log/antilog tables.
//!
//! Elements are stored as `u16` bit patterns in the polynomial basis, so the
//! field degree is limited to 16. Addition is XOR; multiplication and
//! inversion go through the tables built from a primitive polynomial.

use crate::error::{Error, Result};

/// Smallest supported extension degree.
pub const MIN_DEGREE: u32 = 3;
/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 16;

/// Default primitive polynomial for degree `v`, as a bit mask including the
/// leading `x^v` term (for example `0x409` is `x^10 + x^3 + 1`).
pub fn default_primitive_poly(v: u32) -> Option<u32> {
    let poly = match v {
        3 => 0b1011,
        4 => 0x13,
        5 => 0x25,
        6 => 0x43,
        7 => 0x89,
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
    };
    Some(poly)
}

/// GF(2^v) with precomputed power and logarithm tables.
#[derive(Clone, Debug)]
pub struct GaloisField {
    degree: u32,
    primitive_poly: u32,
    order: usize,
    // exp[i] = alpha^i for 0 <= i < 2 * order, doubled to skip a modulo in mul.
    exp: Vec<u16>,
    // log[a] for a != 0; log[0] is unused.
    log: Vec<u32>,
}

impl GaloisField {
    /// Builds the field from a primitive polynomial of degree `v`.
    pub fn new(v: u32, primitive_poly: u32) -> Result<Self> {
        if !(MIN_DEGREE..=MAX_DEGREE).contains(&v) {
            return Err(Error::Field(format!(
                "degree {v} outside supported range {MIN_DEGREE}..={MAX_DEGREE}"
            )));
        }
        if primitive_poly >> v != 1 {
            return Err(Error::Field(format!(
                "polynomial {primitive_poly:#x} does not have degree {v}"
            )));
        }
        let size = 1usize << v;
        let order = size - 1;
        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![u32::MAX; size];
        let mut a: u32 = 1;
        for (i, slot) in exp.iter_mut().take(order).enumerate() {
            if log[a as usize] != u32::MAX {
                return Err(Error::Field(format!(
                    "polynomial {primitive_poly:#x} is not primitive: alpha^{i} repeats alpha^{}",
                    log[a as usize]
                )));
            }
            *slot = a as u16;
            log[a as usize] = i as u32;
            a <<= 1;
            if a & (1 << v) != 0 {
                a ^= primitive_poly;
            }
        }
        if a != 1 {
            return Err(Error::Field(format!(
                "polynomial {primitive_poly:#x} is not primitive: alpha^{order} != 1"
            )));
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(Self {
            degree: v,
            primitive_poly,
            order,
            exp,
            log,
        })
    }

    /// Builds the field from the default primitive polynomial.
    pub fn with_default_poly(v: u32) -> Result<Self> {
        let poly = default_primitive_poly(v)
            .ok_or_else(|| Error::Field(format!("no default primitive polynomial for v={v}")))?;
        Self::new(v, poly)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn primitive_poly(&self) -> u32 {
        self.primitive_poly
    }

    /// Multiplicative group order `2^v - 1`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// `alpha^i` for any integer power; negative powers wrap around the group.
    #[inline]
    pub fn alpha_pow(&self, i: i64) -> u16 {
        let e = i.rem_euclid(self.order as i64) as usize;
        self.exp[e]
    }

    /// Discrete logarithm base alpha; `None` for zero.
    #[inline]
    pub fn log(&self, a: u16) -> Option<u32> {
        if a == 0 {
            None
        } else {
            Some(self.log[a as usize])
        }
    }

    #[inline]
    pub fn add(&self, a: u16, b: u16) -> u16 {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
        }
    }

    /// Multiplicative inverse; `None` for zero.
    #[inline]
    pub fn inv(&self, a: u16) -> Option<u16> {
        if a == 0 {
            None
        } else {
            let l = self.log[a as usize] as usize;
            Some(self.exp[(self.order - l) % self.order])
        }
    }

    #[inline]
    pub fn div(&self, a: u16, b: u16) -> Option<u16> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    pub fn pow(&self, a: u16, e: u64) -> u16 {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let l = self.log[a as usize] as u64;
        self.exp[((l * (e % self.order as u64)) % self.order as u64) as usize]
    }

    #[inline]
    pub fn square(&self, a: u16) -> u16 {
        self.mul(a, a)
    }

    /// Evaluates a polynomial with coefficients in ascending degree order.
    pub fn eval_poly(&self, coeffs: &[u16], x: u16) -> u16 {
        coeffs
            .iter()
            .rev()
            .fold(0u16, |acc, &c| self.mul(acc, x) ^ c)
    }

    /// Minimal polynomial of `alpha^i` over GF(2) as a bit mask (bit k is the
    /// coefficient of `x^k`), together with the cyclotomic coset of `i`.
    pub fn minimal_poly(&self, i: usize) -> (u64, Vec<usize>) {
        let mut coset = Vec::new();
        let mut j = i % self.order;
        loop {
            coset.push(j);
            j = (j * 2) % self.order;
            if j == coset[0] {
                break;
            }
        }
        // Product of (x - alpha^j) over the coset, with field coefficients.
        let mut poly: Vec<u16> = vec![1];
        for &j in &coset {
            let root = self.exp[j];
            let mut next = vec![0u16; poly.len() + 1];
            for (k, &c) in poly.iter().enumerate() {
                next[k + 1] ^= c;
                next[k] ^= self.mul(c, root);
            }
            poly = next;
        }
        let mut mask = 0u64;
        for (k, &c) in poly.iter().enumerate() {
            debug_assert!(c <= 1, "minimal polynomial must have binary coefficients");
            if c == 1 {
                mask |= 1 << k;
            }
        }
        (mask, coset)
    }
}
