//! Finite field arithmetic for orders `p^k`.
//!
//! Elements are encoded as integers `0..q` whose base-`p` digits are the
//! polynomial coefficients (least significant digit = constant term).
//! Multiplication uses log/exp tables generated by `x` modulo a fixed
//! primitive polynomial; prime fields use the smallest primitive root.

use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_ORDER: usize = 1 << 12;

/// Non-leading coefficients (constant term first) of the monic primitive
/// polynomial used for GF(p^k). These are the Conway polynomials.
fn primitive_polynomial(p: usize, k: u32) -> Option<&'static [u16]> {
    let poly: &'static [u16] = match (p, k) {
        (2, 2) => &[1, 1],
        (2, 3) => &[1, 1, 0],
        (2, 4) => &[1, 1, 0, 0],
        (2, 5) => &[1, 0, 1, 0, 0],
        (2, 6) => &[1, 1, 0, 1, 1, 0],
        (2, 7) => &[1, 1, 0, 0, 0, 0, 0],
        (2, 8) => &[1, 0, 1, 1, 1, 0, 0, 0],
        (2, 9) => &[1, 0, 0, 0, 1, 0, 0, 0, 0],
        (2, 10) => &[1, 1, 1, 1, 0, 1, 1, 0, 0, 0],
        (2, 11) => &[1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0],
        (2, 12) => &[1, 1, 0, 1, 0, 1, 1, 1, 0, 0, 0, 0],
        (3, 2) => &[2, 2],
        (3, 3) => &[1, 2, 0],
        (3, 4) => &[2, 0, 0, 2],
        (5, 2) => &[2, 4],
        (5, 3) => &[3, 3, 0],
        (5, 4) => &[2, 4, 4, 0],
        (7, 2) => &[3, 6],
        (7, 3) => &[4, 0, 6],
        (7, 4) => &[3, 4, 5, 0],
        _ => return None,
    };
    Some(poly)
}

fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// `q = p^k` with `p` prime, if it is a prime power.
pub fn prime_power(q: usize) -> Option<(usize, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut k = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        k += 1;
    }
    (rest == 1 && is_prime(p)).then_some((p, k))
}

#[derive(Debug, Clone)]
pub struct GaloisField {
    p: usize,
    k: u32,
    q: usize,
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl GaloisField {
    /// Field of order `q`.
    ///
    /// Supported: any prime `q <= 4096`, `2^k` for `k <= 12`, and `p^k` for
    /// `p` in {3, 5, 7} with `k <= 4`.
    pub fn new(q: usize) -> Result<Self> {
        let limit = || {
            format!(
                "supported orders are primes and prime powers 2^k (k<=12), 3^k, 5^k, 7^k (k<=4), all <= {MAX_ORDER}"
            )
        };
        let (p, k) = prime_power(q).ok_or_else(|| Error::UnsupportedOrder {
            order: q,
            limit: format!("not a prime power; {}", limit()),
        })?;
        if q > MAX_ORDER {
            return Err(Error::UnsupportedOrder { order: q, limit: limit() });
        }
        let mut field = Self {
            p,
            k,
            q,
            exp: Vec::with_capacity(q - 1),
            log: vec![0; q],
        };
        if k == 1 {
            let g = (2..p.max(3))
                .find(|&g| multiplicative_order_mod(g, p) == p - 1)
                .unwrap_or(1);
            let mut cur = 1usize;
            for _ in 0..q - 1 {
                field.exp.push(cur as u16);
                cur = cur * g % p;
            }
        } else {
            let poly = primitive_polynomial(p, k)
                .ok_or_else(|| Error::UnsupportedOrder { order: q, limit: limit() })?;
            let mut cur = 1usize;
            for _ in 0..q - 1 {
                field.exp.push(cur as u16);
                cur = field.times_x(cur, poly);
            }
        }
        let mut hit = vec![false; q];
        for (i, &e) in field.exp.iter().enumerate() {
            if hit[e as usize] || e == 0 {
                return Err(Error::UnsupportedOrder {
                    order: q,
                    limit: "built-in polynomial is not primitive".into(),
                });
            }
            hit[e as usize] = true;
            field.log[e as usize] = i as u16;
        }
        Ok(field)
    }

    fn times_x(&self, a: usize, poly: &[u16]) -> usize {
        let p = self.p;
        let mut digits = self.digits(a);
        let top = digits.pop().unwrap_or(0);
        digits.insert(0, 0);
        for (d, &c) in digits.iter_mut().zip(poly) {
            // x^k = -(sum c_i x^i)
            *d = (*d + (p - top) * c as usize) % p;
        }
        self.from_digits(&digits)
    }

    fn digits(&self, mut a: usize) -> Vec<usize> {
        (0..self.k)
            .map(|_| {
                let d = a % self.p;
                a /= self.p;
                d
            })
            .collect()
    }

    fn from_digits(&self, digits: &[usize]) -> usize {
        digits.iter().rev().fold(0, |acc, &d| acc * self.p + d)
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn characteristic(&self) -> usize {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        if self.p == 2 {
            return a ^ b;
        }
        if self.k == 1 {
            return (a + b) % self.p;
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.k {
            out += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out
    }

    pub fn neg(&self, a: usize) -> usize {
        if self.p == 2 {
            return a;
        }
        let mut rest = a;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.k {
            out += ((self.p - rest % self.p) % self.p) * place;
            rest /= self.p;
            place *= self.p;
        }
        out
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        if a == 0 || b == 0 {
            return 0;
        }
        let e = (self.log[a] as usize + self.log[b] as usize) % (self.q - 1);
        self.exp[e] as usize
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: usize) -> Option<usize> {
        if a == 0 {
            return None;
        }
        let e = (self.q - 1 - self.log[a] as usize) % (self.q - 1);
        Some(self.exp[e] as usize)
    }

    pub fn pow(&self, a: usize, e: usize) -> usize {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        self.exp[(self.log[a] as usize * e) % (self.q - 1)] as usize
    }
}

fn multiplicative_order_mod(g: usize, p: usize) -> usize {
    let mut cur = g % p;
    let mut order = 1;
    while cur != 1 {
        cur = cur * g % p;
        order += 1;
        if order > p {
            return 0;
        }
    }
    order
}
