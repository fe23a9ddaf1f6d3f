//! GF(2^8) arithmetic with reduction polynomial x^8 + x^4 + x^3 + x^2 + 1 (0x11D).
//!
//! Multiplication and inversion go through exp/log tables over the generator
//! 2, built at compile time.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign};

use crate::error::{Error, Result};

pub const POLYNOMIAL: u16 = 0x11D;

struct Tables {
    exp: [u8; 512],
    log: [u8; 256],
}

const fn build_tables() -> Tables {
    let mut exp = [0u8; 512];
    let mut log = [0u8; 256];
    let mut x: u16 = 1;
    let mut i = 0;
    while i < 255 {
        exp[i] = x as u8;
        log[x as usize] = i as u8;
        x <<= 1;
        if x & 0x100 != 0 {
            x ^= POLYNOMIAL;
        }
        i += 1;
    }
    while i < 512 {
        exp[i] = exp[i - 255];
        i += 1;
    }
    Tables { exp, log }
}

static TABLES: Tables = build_tables();

/// An element of GF(256).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
#[repr(transparent)]
pub struct Gf256(pub u8);

impl Gf256 {
    pub const ZERO: Gf256 = Gf256(0);
    pub const ONE: Gf256 = Gf256(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn inv(self) -> Result<Gf256> {
        gf_inv(self)
    }
}

impl fmt::Debug for Gf256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf256({:#04x})", self.0)
    }
}

impl Add for Gf256 {
    type Output = Gf256;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Gf256) -> Gf256 {
        Gf256(self.0 ^ rhs.0)
    }
}

impl AddAssign for Gf256 {
    fn add_assign(&mut self, rhs: Gf256) {
        *self = *self + rhs;
    }
}

impl Mul for Gf256 {
    type Output = Gf256;
    fn mul(self, rhs: Gf256) -> Gf256 {
        gf_mul(self, rhs)
    }
}

impl MulAssign for Gf256 {
    fn mul_assign(&mut self, rhs: Gf256) {
        *self = *self * rhs;
    }
}

#[inline]
pub fn gf_mul(a: Gf256, b: Gf256) -> Gf256 {
    if a.0 == 0 || b.0 == 0 {
        return Gf256::ZERO;
    }
    let t = &TABLES;
    Gf256(t.exp[t.log[a.0 as usize] as usize + t.log[b.0 as usize] as usize])
}

pub fn gf_inv(a: Gf256) -> Result<Gf256> {
    if a.0 == 0 {
        return Err(Error::ZeroInverse);
    }
    let t = &TABLES;
    Ok(Gf256(t.exp[255 - t.log[a.0 as usize] as usize]))
}

/// `dst[i] += c * src[i]` bytewise.
pub fn mul_add_slice(dst: &mut [u8], src: &[u8], c: Gf256) {
    debug_assert_eq!(dst.len(), src.len());
    if c.0 == 0 {
        return;
    }
    let t = &TABLES;
    let lc = t.log[c.0 as usize] as usize;
    for (d, &s) in dst.iter_mut().zip(src) {
        if s != 0 {
            *d ^= t.exp[t.log[s as usize] as usize + lc];
        }
    }
}

/// `dst[i] *= c` bytewise.
pub fn scale_slice(dst: &mut [u8], c: Gf256) {
    if c.0 == 0 {
        dst.fill(0);
        return;
    }
    let t = &TABLES;
    let lc = t.log[c.0 as usize] as usize;
    for d in dst.iter_mut() {
        if *d != 0 {
            *d = t.exp[t.log[*d as usize] as usize + lc];
        }
    }
}
