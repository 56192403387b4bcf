use crate::error::{Error, Result};
use crate::gf2m::BinaryPolynomial;

/// Conventional primitive polynomials, bit i = coefficient of x^i.
const DEFAULT_PRIMITIVE: [u32; 17] = [
    0, 0, 0x7, 0xB, 0x13, 0x25, 0x43, 0x89, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443,
    0x8003, 0x1100B,
];

/// GF(2^m) with log/antilog tables over a fixed primitive polynomial.
///
/// Elements are integers in `[0, 2^m)` in the polynomial basis; `alpha` is
/// the element `2` (the class of x).
#[derive(Clone, Debug)]
pub struct GaloisField {
    m: u32,
    primitive_poly: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl GaloisField {
    pub fn new(m: u32, primitive_poly: u32) -> Result<Self> {
        if !(2..=16).contains(&m) {
            return Err(Error::UnsupportedFieldDegree(m));
        }
        let size = 1usize << m;
        let not_primitive = Error::NotPrimitive {
            m,
            poly: primitive_poly,
        };
        if primitive_poly >> m != 1 || primitive_poly & 1 == 0 {
            return Err(not_primitive);
        }
        let order = size - 1;
        let mut exp = vec![0u32; 2 * order];
        let mut log = vec![0u32; size];
        let mut x = 1u32;
        for (i, slot) in exp.iter_mut().take(order).enumerate() {
            if i > 0 && x == 1 {
                // alpha has order < 2^m - 1
                return Err(not_primitive);
            }
            *slot = x;
            log[x as usize] = i as u32;
            x <<= 1;
            if x >> m == 1 {
                x ^= primitive_poly;
            }
        }
        if x != 1 {
            return Err(not_primitive);
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(Self {
            m,
            primitive_poly,
            exp,
            log,
        })
    }

    pub fn with_default_poly(m: u32) -> Result<Self> {
        if !(2..=16).contains(&m) {
            return Err(Error::UnsupportedFieldDegree(m));
        }
        Self::new(m, DEFAULT_PRIMITIVE[m as usize])
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn primitive_poly(&self) -> BinaryPolynomial {
        BinaryPolynomial::from_mask(self.primitive_poly as u64)
    }

    /// Number of elements, 2^m.
    pub fn size(&self) -> usize {
        1 << self.m
    }

    /// Multiplicative order, 2^m - 1.
    pub fn order(&self) -> usize {
        self.size() - 1
    }

    #[inline]
    pub fn alpha_pow(&self, i: usize) -> u32 {
        self.exp[i % self.order()]
    }

    /// Discrete log base alpha; `None` for zero.
    #[inline]
    pub fn log(&self, a: u32) -> Option<usize> {
        (a != 0).then(|| self.log[a as usize] as usize)
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        debug_assert!((a as usize) < self.size() && (b as usize) < self.size());
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
        }
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::ZeroElement("inverse"));
        }
        let l = self.log[a as usize] as usize;
        Ok(self.exp[(self.order() - l) % self.order()])
    }

    pub fn pow(&self, a: u32, e: usize) -> u32 {
        if e == 0 {
            return 1;
        }
        match self.log(a) {
            None => 0,
            Some(l) => self.alpha_pow((l * e) % self.order()),
        }
    }

    /// Conjugacy class {e, e^2, e^4, ...} in order of generation.
    pub fn conjugates(&self, e: u32) -> Vec<u32> {
        let mut out = vec![e];
        let mut c = self.mul(e, e);
        while c != e {
            out.push(c);
            c = self.mul(c, c);
        }
        out
    }

    /// Monic binary polynomial of least degree with `e` as a root.
    pub fn minimal_polynomial(&self, e: u32) -> Result<BinaryPolynomial> {
        if e as usize >= self.size() {
            return Err(Error::ElementOutOfRange(e));
        }
        if e == 0 {
            return Err(Error::ZeroElement("minimal polynomial in this construction"));
        }
        // Expand prod (x + c) with coefficients in GF(2^m).
        let mut coeffs: Vec<u32> = vec![1];
        for c in self.conjugates(e) {
            let mut next = vec![0u32; coeffs.len() + 1];
            for (i, &a) in coeffs.iter().enumerate() {
                next[i + 1] ^= a;
                next[i] ^= self.mul(a, c);
            }
            coeffs = next;
        }
        debug_assert!(coeffs.iter().all(|&c| c <= 1));
        Ok(BinaryPolynomial::from_coeffs(
            &coeffs.iter().map(|&c| c as u8).collect::<Vec<_>>(),
        ))
    }

    /// Evaluate a binary polynomial at a field element (Horner).
    pub fn eval(&self, p: &BinaryPolynomial, x: u32) -> u32 {
        p.coeffs()
            .iter()
            .rev()
            .fold(0u32, |acc, &c| self.mul(acc, x) ^ c as u32)
    }

    /// Narrow-sense BCH generator: lcm of the minimal polynomials of
    /// alpha^1, alpha^3, ..., alpha^(design_distance - 2).
    pub fn bch_generator(&self, design_distance: usize) -> Result<BinaryPolynomial> {
        let n = self.order();
        if design_distance < 3 || design_distance > n {
            return Err(Error::DesignDistance {
                design: design_distance,
                n,
            });
        }
        let mut g = BinaryPolynomial::one();
        for i in (1..=design_distance - 2).step_by(2) {
            let mp = self.minimal_polynomial(self.alpha_pow(i))?;
            g = g.lcm(&mp);
        }
        if g.degree().unwrap_or(0) >= n {
            return Err(Error::DesignDistance {
                design: design_distance,
                n,
            });
        }
        Ok(g)
    }
}
