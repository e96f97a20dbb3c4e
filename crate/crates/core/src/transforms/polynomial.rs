//! Sparse multivariate polynomials with exact rational coefficients,
//! evaluated at complex points.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_traits::Zero;

use crate::rational::{format_rational, to_f64, Rational};

pub type Exponent = Vec<u32>;

/// `Σ c_a Ψ^a` over exponents `a ∈ N^k`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePolynomial {
    vars: usize,
    terms: BTreeMap<Exponent, Rational>,
}

impl SparsePolynomial {
    pub fn zero(vars: usize) -> Self {
        Self { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: usize, value: Rational) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; vars], value);
        p
    }

    /// The monomial `Ψ_j`.
    pub fn variable(vars: usize, j: usize) -> Self {
        let mut e = vec![0; vars];
        e[j] = 1;
        let mut p = Self::zero(vars);
        p.add_term(e, Rational::from_integer(1.into()));
        p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn add_term(&mut self, exponent: Exponent, coeff: Rational) {
        assert_eq!(exponent.len(), self.vars, "exponent length");
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(exponent).or_insert_with(Rational::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn coefficient(&self, exponent: &[u32]) -> Rational {
        self.terms.get(exponent).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval_rational(&self, point: &[Rational]) -> Rational {
        self.terms.iter().fold(Rational::zero(), |acc, (e, c)| {
            let mono = e
                .iter()
                .zip(point)
                .fold(Rational::from_integer(1.into()), |m, (&p, x)| m * num_traits::pow(x.clone(), p as usize));
            acc + c * mono
        })
    }

    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        self.compile().eval(point)
    }

    /// Floating-point copy for repeated evaluation.
    pub fn compile(&self) -> CompiledPolynomial {
        CompiledPolynomial {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), to_f64(c))).collect(),
        }
    }
}

impl fmt::Display for SparsePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0)
                .map(|(j, &p)| if p == 1 { format!("Psi{}", j + 1) } else { format!("Psi{}^{p}", j + 1) })
                .collect();
            let negative = *c < Rational::zero();
            let magnitude = if negative { -c.clone() } else { c.clone() };
            match (i, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let unit = magnitude == Rational::from_integer(1.into());
            match (mono.is_empty(), unit) {
                (true, _) => write!(f, "{}", format_rational(&magnitude))?,
                (false, true) => write!(f, "{}", mono.join("*"))?,
                (false, false) => write!(f, "{}*{}", format_rational(&magnitude), mono.join("*"))?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CompiledPolynomial {
    terms: Vec<(Exponent, f64)>,
}

impl CompiledPolynomial {
    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        let mut total = Complex64::zero();
        for (e, c) in &self.terms {
            let mut mono = Complex64::new(*c, 0.0);
            for (&p, x) in e.iter().zip(point) {
                if p > 0 {
                    mono *= x.powu(p);
                }
            }
            total += mono;
        }
        total
    }
}
