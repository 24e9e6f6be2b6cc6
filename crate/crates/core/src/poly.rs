//! Sparse multivariate polynomials with scalar coefficients. Used as the
//! bosonic coefficient functions of superfunctions and as truncated formal
//! power series for generating-function checks.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{factorial, Scalar};

/// Polynomial in `vars` variables; keys are exponent vectors of that length.
#[derive(Clone, Debug)]
pub struct Polynomial<S> {
    vars: usize,
    terms: BTreeMap<Vec<u8>, S>,
}

impl<S: Scalar> Polynomial<S> {
    pub fn zero(vars: usize) -> Self {
        Polynomial { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: usize, c: S) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; vars], c);
        }
        p
    }

    pub fn one(vars: usize) -> Self {
        Self::constant(vars, S::one())
    }

    pub fn variable(vars: usize, i: usize) -> Self {
        assert!(i < vars, "variable out of range");
        let mut exps = vec![0u8; vars];
        exps[i] = 1;
        let mut p = Self::zero(vars);
        p.terms.insert(exps, S::one());
        p
    }

    pub fn monomial(vars: usize, exps: Vec<u8>, c: S) -> Self {
        assert_eq!(exps.len(), vars);
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> S {
        self.terms
            .get(&vec![0; self.vars])
            .cloned()
            .unwrap_or_else(S::zero)
    }

    pub fn total_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u8>, &S)> {
        self.terms.iter()
    }

    fn insert(terms: &mut BTreeMap<Vec<u8>, S>, exps: Vec<u8>, c: S) {
        if c.is_zero() {
            return;
        }
        match terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let merged = e.get().clone() + c;
                if merged.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = merged;
                }
            }
        }
    }

    fn check_vars(&self, other: &Self) -> Result<()> {
        if self.vars != other.vars {
            return Err(Error::Dimension(format!(
                "polynomials over {} vs {} variables",
                self.vars, other.vars
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            Self::insert(&mut out.terms, e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero(self.vars);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = v.clone() * c.clone();
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_vars(other)?;
        let mut out = Self::zero(self.vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u8> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                Self::insert(&mut out.terms, exps, ca.clone() * cb.clone());
            }
        }
        Ok(out)
    }

    /// Partial derivative with respect to variable `i`.
    pub fn partial(&self, i: usize) -> Self {
        assert!(i < self.vars, "variable out of range");
        let mut out = Self::zero(self.vars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut exps = e.clone();
            exps[i] -= 1;
            Self::insert(&mut out.terms, exps, c.clone() * S::from_i64(e[i] as i64));
        }
        out
    }

    /// Drops every term of total degree above `max_deg`.
    pub fn truncate(&self, max_deg: usize) -> Self {
        let mut out = self.clone();
        out.terms
            .retain(|e, _| e.iter().map(|&x| x as usize).sum::<usize>() <= max_deg);
        out
    }

    /// `exp` of a series with zero constant term, truncated at `max_deg`.
    pub fn exp_truncated(&self, max_deg: usize) -> Result<Self> {
        if !self.constant_term().is_zero() {
            return Err(Error::Evaluation(
                "exp_truncated needs a zero constant term".into(),
            ));
        }
        let base = self.truncate(max_deg);
        let mut out = Self::one(self.vars);
        let mut power = Self::one(self.vars);
        for j in 1..=max_deg {
            power = power.mul(&base)?.truncate(max_deg);
            if power.is_zero() {
                break;
            }
            out = out.add(&power.scale(&(S::one() / factorial::<S>(j))))?;
        }
        Ok(out)
    }

    /// Equality up to the coefficient mode's tolerance.
    pub fn approx_eq(&self, other: &Self) -> bool {
        if self.vars != other.vars {
            return false;
        }
        let keys: std::collections::BTreeSet<&Vec<u8>> =
            self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter().all(|k| {
            let a = self.terms.get(k).cloned().unwrap_or_else(S::zero);
            let b = other.terms.get(k).cloned().unwrap_or_else(S::zero);
            a.approx_eq(&b)
        })
    }
}

impl<S: Scalar> PartialEq for Polynomial<S> {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other)
    }
}

impl<S: Scalar> fmt::Display for Polynomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if first {
                first = false;
            } else {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (i, &p) in e.iter().enumerate() {
                if p == 1 {
                    write!(f, "·t{i}")?;
                } else if p > 1 {
                    write!(f, "·t{i}^{p}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rat;

    type P = Polynomial<Rat>;

    #[test]
    fn arithmetic_and_derivative() {
        let x = P::variable(2, 0);
        let y = P::variable(2, 1);
        // (x + y)² = x² + 2xy + y²
        let s = x.add(&y).unwrap();
        let sq = s.mul(&s).unwrap();
        assert_eq!(sq.total_degree(), 2);
        assert_eq!(sq.partial(0), s.scale(&Rat::from_i64(2)));
        assert_eq!(sq.partial(0).partial(1), P::constant(2, Rat::from_i64(2)));
    }

    #[test]
    fn truncated_exponentials_multiply() {
        // exp(t)·exp(−t) = 1 up to the truncation order
        let t = P::variable(1, 0);
        let e = t.exp_truncated(5).unwrap();
        let einv = t.neg().exp_truncated(5).unwrap();
        let prod = e.mul(&einv).unwrap().truncate(5);
        assert_eq!(prod, P::one(1));
        assert!(P::one(1).exp_truncated(3).is_err());
    }
}
