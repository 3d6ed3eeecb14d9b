//! Binary extension fields GF(2^8) and GF(2^16) backed by exp/log tables.

use once_cell::sync::Lazy;

use crate::error::{Error, Result};

/// A field element. GF(2^8) elements occupy the low byte.
pub type Symbol = u16;

pub struct Field {
    bits: u32,
    poly: u32,
    exp: Vec<Symbol>,
    log: Vec<u32>,
}

static GF256: Lazy<Field> = Lazy::new(|| Field::build(8, 0x11d));
static GF65536: Lazy<Field> = Lazy::new(|| Field::build(16, 0x1100b));

impl Field {
    fn build(bits: u32, poly: u32) -> Field {
        let order = 1usize << bits;
        let group = order - 1;
        let mut exp = vec![0 as Symbol; 2 * group];
        let mut log = vec![0u32; order];
        let mut x: u32 = 1;
        for (i, slot) in exp.iter_mut().take(group).enumerate() {
            *slot = x as Symbol;
            log[x as usize] = i as u32;
            x <<= 1;
            if x & (1 << bits) != 0 {
                x ^= poly;
            }
        }
        debug_assert_eq!(x, 1, "polynomial {poly:#x} is not primitive");
        for i in group..2 * group {
            exp[i] = exp[i - group];
        }
        Field {
            bits,
            poly,
            exp,
            log,
        }
    }

    pub fn gf256() -> &'static Field {
        &GF256
    }

    pub fn gf65536() -> &'static Field {
        &GF65536
    }

    /// Field with `bits` in {8, 16}.
    pub fn with_bits(bits: u32) -> Result<&'static Field> {
        match bits {
            8 => Ok(Field::gf256()),
            16 => Ok(Field::gf65536()),
            _ => Err(Error::InvalidParams(format!(
                "unsupported field GF(2^{bits}); use 8 or 16"
            ))),
        }
    }

    /// Smallest supported field with at least `needed` distinct elements.
    pub fn smallest_with(needed: usize) -> Result<&'static Field> {
        if needed <= GF256.order() {
            Ok(Field::gf256())
        } else if needed <= GF65536.order() {
            Ok(Field::gf65536())
        } else {
            Err(Error::FieldTooSmall {
                bits: 16,
                order: GF65536.order(),
                needed,
            })
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn order(&self) -> usize {
        1usize << self.bits
    }

    pub fn polynomial(&self) -> u32 {
        self.poly
    }

    pub fn contains(&self, a: Symbol) -> bool {
        (a as usize) < self.order()
    }

    #[inline]
    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: Symbol) -> Result<Symbol> {
        if a == 0 {
            return Err(Error::InverseOfZero);
        }
        let group = (self.order() - 1) as u32;
        Ok(self.exp[((group - self.log[a as usize]) % group) as usize])
    }

    pub fn div(&self, a: Symbol, b: Symbol) -> Result<Symbol> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `dst[i] += c * src[i]`.
    pub fn mul_acc(&self, dst: &mut [Symbol], src: &[Symbol], c: Symbol) {
        debug_assert_eq!(dst.len(), src.len());
        match c {
            0 => {}
            1 => dst.iter_mut().zip(src).for_each(|(d, s)| *d ^= *s),
            _ => {
                let lc = self.log[c as usize];
                for (d, &s) in dst.iter_mut().zip(src) {
                    if s != 0 {
                        *d ^= self.exp[(self.log[s as usize] + lc) as usize];
                    }
                }
            }
        }
    }

    /// `row[i] *= c`.
    pub fn scale(&self, row: &mut [Symbol], c: Symbol) {
        if c == 1 {
            return;
        }
        for x in row.iter_mut() {
            *x = self.mul(*x, c);
        }
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.bits == other.bits
    }
}

impl Eq for Field {}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GF(2^{})", self.bits)
    }
}
