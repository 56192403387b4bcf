use std::fmt;

/// Polynomial over GF(2), coefficients lowest degree first.
///
/// Always normalized: no trailing zero coefficients, so a nonzero
/// polynomial has leading coefficient 1 and the zero polynomial is empty.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BinaryPolynomial {
    coeffs: Vec<u8>,
}

impl BinaryPolynomial {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![1] }
    }

    /// x^n
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![0; n + 1];
        coeffs[n] = 1;
        Self { coeffs }
    }

    pub fn from_coeffs(coeffs: &[u8]) -> Self {
        let mut p = Self {
            coeffs: coeffs.iter().map(|c| c & 1).collect(),
        };
        p.normalize();
        p
    }

    /// Bit i of `mask` is the coefficient of x^i.
    pub fn from_mask(mask: u64) -> Self {
        Self::from_coeffs(&(0..64).map(|i| ((mask >> i) & 1) as u8).collect::<Vec<_>>())
    }

    fn normalize(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> u8 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn coeffs(&self) -> &[u8] {
        &self.coeffs
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs: Vec<u8> = (0..len).map(|i| self.coeff(i) ^ other.coeff(i)).collect();
        Self::from_coeffs(&coeffs)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0u8; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 1 {
                for (j, &b) in other.coeffs.iter().enumerate() {
                    out[i + j] ^= b;
                }
            }
        }
        Self::from_coeffs(&out)
    }

    /// Quotient and remainder. Panics on division by zero.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree() else {
            return (Self::zero(), Self::zero());
        };
        if nd < dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![0u8; nd - dd + 1];
        for shift in (0..=nd - dd).rev() {
            if rem[shift + dd] == 1 {
                quot[shift] = 1;
                for (i, &c) in divisor.coeffs.iter().enumerate() {
                    rem[shift + i] ^= c;
                }
            }
        }
        (Self::from_coeffs(&quot), Self::from_coeffs(&rem))
    }

    pub fn rem(&self, divisor: &Self) -> Self {
        self.div_rem(divisor).1
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }

    pub fn lcm(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let g = self.gcd(other);
        self.mul(other).div_rem(&g).0
    }
}

impl fmt::Debug for BinaryPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for BinaryPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &c)| c == 1)
            .map(|(i, _)| match i {
                0 => "1".to_string(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}
