//! Exact symbolic calculus in a finitely generated Grassmann algebra.
//!
//! An algebra over `m` sites carries `n = 2m` anticommuting generators: the
//! plain ones `ξ_0 … ξ_{m-1}` followed by the barred ones `ξ̄_0 … ξ̄_{m-1}`.
//! A monomial is a bitmask over that fixed total order, stored with an
//! implicit `+1` sign; an element is a sparse mask → coefficient map with no
//! stored zeros. All operations are pure and inputs are never mutated.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{factorial, Scalar};

/// Hard cap on the total generator count `n = 2m` of one algebra.
pub const MAX_GENERATORS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Plain,
    Barred,
}

/// One generator of the algebra: a site together with a plain/barred flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator {
    pub site: usize,
    pub kind: Kind,
}

impl Generator {
    pub fn plain(site: usize) -> Self {
        Generator { site, kind: Kind::Plain }
    }

    pub fn barred(site: usize) -> Self {
        Generator { site, kind: Kind::Barred }
    }

    /// Position in the canonical total order of an algebra with `m` sites.
    pub fn bit(&self, sites: usize) -> usize {
        match self.kind {
            Kind::Plain => self.site,
            Kind::Barred => sites + self.site,
        }
    }

    fn from_bit(bit: usize, sites: usize) -> Generator {
        if bit < sites {
            Generator::plain(bit)
        } else {
            Generator::barred(bit - sites)
        }
    }
}

/// A canonical monomial: set bit ⇔ generator present, ascending order, +1 sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub u64);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.count_ones()
    }

    pub fn generators(&self, sites: usize) -> Vec<Generator> {
        let mut out = Vec::new();
        let mut mask = self.0;
        while mask != 0 {
            let bit = mask.trailing_zeros() as usize;
            out.push(Generator::from_bit(bit, sites));
            mask &= mask - 1;
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

/// Parity of the number of inversions between two disjoint masks: pairs
/// `(g, h)` with `g` in `a`, `h` in `b` and `g > h` in the canonical order.
pub(crate) fn inversion_parity(a: u64, mut b: u64) -> bool {
    let mut parity = false;
    while b != 0 {
        let h = b.trailing_zeros();
        let above = a >> (h + 1);
        if above.count_ones() & 1 == 1 {
            parity = !parity;
        }
        b &= b - 1;
    }
    parity
}

/// Wedge of two canonical monomials: `None` on overlap, else the union mask
/// and whether the sign flips.
pub(crate) fn wedge_masks(a: u64, b: u64) -> Option<(u64, bool)> {
    if a & b != 0 {
        return None;
    }
    Some((a | b, inversion_parity(a, b)))
}

/// Left derivative of a canonical monomial per the `(−1)^{α−1}` rule.
pub(crate) fn derivative_mask(mask: u64, bit: usize) -> Option<(u64, bool)> {
    let g = 1u64 << bit;
    if mask & g == 0 {
        return None;
    }
    let below = (mask & (g - 1)).count_ones();
    Some((mask & !g, below & 1 == 1))
}

/// Right-acting derivative: removes the generator from the right, sign
/// `(−1)^{p−α}` for a degree-`p` monomial.
pub(crate) fn derivative_mask_right(mask: u64, bit: usize) -> Option<(u64, bool)> {
    let g = 1u64 << bit;
    if mask & g == 0 {
        return None;
    }
    let above = (mask & !((g << 1).wrapping_sub(1))).count_ones();
    Some((mask & !g, above & 1 == 1))
}

/// A scalar power series together with its derivatives, as needed by
/// [`GrassmannElement::apply_series`].
pub trait ScalarSeries<S: Scalar> {
    /// Returns `[f(body), f'(body), …, f^{(order)}(body)]`.
    fn derivatives(&self, body: &S, order: usize) -> Result<Vec<S>>;
}

/// The exponential series. In exact mode the body must vanish, since
/// `exp` of a non-zero rational is not rational.
pub struct ExpSeries;

impl<S: Scalar> ScalarSeries<S> for ExpSeries {
    fn derivatives(&self, body: &S, order: usize) -> Result<Vec<S>> {
        let value = if body.is_zero() {
            S::one()
        } else if S::EXACT {
            return Err(Error::Evaluation(
                "exp of a non-zero body is not exact; use float mode".into(),
            ));
        } else {
            S::from_f64(body.to_f64().exp())
        };
        Ok(vec![value; order + 1])
    }
}

/// A polynomial used as a power series; derivatives are exact.
pub struct PolySeries<S> {
    /// Coefficients `c_0 + c_1 x + c_2 x² + …`.
    pub coeffs: Vec<S>,
}

impl<S: Scalar> ScalarSeries<S> for PolySeries<S> {
    fn derivatives(&self, body: &S, order: usize) -> Result<Vec<S>> {
        let mut out = Vec::with_capacity(order + 1);
        for j in 0..=order {
            // f^{(j)}(b) = Σ_{k≥j} c_k k!/(k−j)! b^{k−j}
            let mut acc = S::zero();
            for (k, c) in self.coeffs.iter().enumerate() {
                if k < j {
                    continue;
                }
                let mut term = c.clone();
                for t in (k - j + 1)..=k {
                    term = term * S::from_i64(t as i64);
                }
                let mut pow = S::one();
                for _ in 0..(k - j) {
                    pow = pow * body.clone();
                }
                acc = acc + term * pow;
            }
            out.push(acc);
        }
        Ok(out)
    }
}

/// Sparse element of the Grassmann algebra over `sites` paired generators.
#[derive(Clone, Debug)]
pub struct GrassmannElement<S> {
    sites: usize,
    terms: BTreeMap<u64, S>,
}

impl<S: Scalar> GrassmannElement<S> {
    pub fn zero(sites: usize) -> Self {
        assert!(2 * sites <= MAX_GENERATORS, "algebra too large");
        GrassmannElement { sites, terms: BTreeMap::new() }
    }

    pub fn scalar(sites: usize, c: S) -> Self {
        let mut el = Self::zero(sites);
        if !c.is_zero() {
            el.terms.insert(0, c);
        }
        el
    }

    pub fn one(sites: usize) -> Self {
        Self::scalar(sites, S::one())
    }

    pub fn generator(sites: usize, g: Generator) -> Self {
        let mut el = Self::zero(sites);
        assert!(g.site < sites, "generator out of range");
        el.terms.insert(1u64 << g.bit(sites), S::one());
        el
    }

    /// Builds `c · g_1 g_2 ⋯ g_k` with the factors in the written order;
    /// the sign is reduced to canonical order (repeated generators give zero).
    pub fn monomial(sites: usize, gens: &[Generator], c: S) -> Self {
        let mut mask = 0u64;
        let mut negate = false;
        for g in gens {
            assert!(g.site < sites, "generator out of range");
            let bit = 1u64 << g.bit(sites);
            match wedge_masks(mask, bit) {
                None => return Self::zero(sites),
                Some((m, flip)) => {
                    mask = m;
                    negate ^= flip;
                }
            }
        }
        let mut el = Self::zero(sites);
        if !c.is_zero() {
            el.terms.insert(mask, if negate { -c } else { c });
        }
        el
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn generator_count(&self) -> usize {
        2 * self.sites
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of the canonical monomial with the given mask.
    pub fn coeff(&self, mono: Monomial) -> S {
        self.terms.get(&mono.0).cloned().unwrap_or_else(S::zero)
    }

    /// Scalar (empty-monomial) part.
    pub fn body(&self) -> S {
        self.terms.get(&0).cloned().unwrap_or_else(S::zero)
    }

    /// Element minus its body.
    pub fn soul(&self) -> Self {
        let mut out = self.clone();
        out.terms.remove(&0);
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (Monomial, &S)> {
        self.terms.iter().map(|(&m, c)| (Monomial(m), c))
    }

    /// Union of all monomial masks.
    pub fn support_mask(&self) -> u64 {
        self.terms.keys().fold(0, |acc, m| acc | m)
    }

    /// Keeps only the terms whose mask satisfies the predicate.
    pub fn retain_masks(&self, mut keep: impl FnMut(u64) -> bool) -> Self {
        let mut out = self.clone();
        out.terms.retain(|&mask, _| keep(mask));
        out
    }

    fn check_same_algebra(&self, other: &Self) -> Result<()> {
        if self.sites != other.sites {
            return Err(Error::Dimension(format!(
                "algebra size mismatch: {} vs {} sites",
                self.sites, other.sites
            )));
        }
        Ok(())
    }

    fn insert_term(terms: &mut BTreeMap<u64, S>, mask: u64, c: S) {
        if c.is_zero() {
            return;
        }
        match terms.entry(mask) {
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

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_algebra(other)?;
        let mut out = self.clone();
        for (&mask, c) in &other.terms {
            Self::insert_term(&mut out.terms, mask, c.clone());
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
            return Self::zero(self.sites);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = v.clone() * c.clone();
        }
        out
    }

    /// The wedge (algebra) product. Bilinear; monomials with overlapping
    /// masks multiply to zero; otherwise the sign counts inversions.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.check_same_algebra(other)?;
        let mut out = Self::zero(self.sites);
        for (&ma, ca) in &self.terms {
            for (&mb, cb) in &other.terms {
                if let Some((mask, flip)) = wedge_masks(ma, mb) {
                    let c = ca.clone() * cb.clone();
                    Self::insert_term(&mut out.terms, mask, if flip { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    pub fn parity(&self) -> Parity {
        let mut even = false;
        let mut odd = false;
        for mask in self.terms.keys() {
            if mask.count_ones() & 1 == 0 {
                even = true;
            } else {
                odd = true;
            }
        }
        match (even, odd) {
            (true, true) => Parity::Mixed,
            (false, true) => Parity::Odd,
            // the zero element reports even
            _ => Parity::Even,
        }
    }

    /// The parity operator `P`: negates every odd-degree monomial.
    pub fn parity_reflect(&self) -> Self {
        let mut out = self.clone();
        for (mask, c) in out.terms.iter_mut() {
            if mask.count_ones() & 1 == 1 {
                *c = -c.clone();
            }
        }
        out
    }

    /// Derivative per the `(−1)^{α−1}` monomial rule; linear, nilpotent.
    pub fn derivative(&self, g: Generator) -> Result<Self> {
        if g.site >= self.sites {
            return Err(Error::Dimension(format!(
                "generator site {} out of range for {} sites",
                g.site, self.sites
            )));
        }
        let bit = g.bit(self.sites);
        let mut out = Self::zero(self.sites);
        for (&mask, c) in &self.terms {
            if let Some((m, flip)) = derivative_mask(mask, bit) {
                let c = c.clone();
                Self::insert_term(&mut out.terms, m, if flip { -c } else { c });
            }
        }
        Ok(out)
    }

    /// Right-acting derivative; differs from [`Self::derivative`] by
    /// `(−1)^{p+1}` on a degree-`p` monomial.
    pub fn derivative_right(&self, g: Generator) -> Result<Self> {
        if g.site >= self.sites {
            return Err(Error::Dimension(format!(
                "generator site {} out of range for {} sites",
                g.site, self.sites
            )));
        }
        let bit = g.bit(self.sites);
        let mut out = Self::zero(self.sites);
        for (&mask, c) in &self.terms {
            if let Some((m, flip)) = derivative_mask_right(mask, bit) {
                let c = c.clone();
                Self::insert_term(&mut out.terms, m, if flip { -c } else { c });
            }
        }
        Ok(out)
    }

    /// Berezin integral for the measure string `∫ dξ_{o_1} dξ_{o_2} ⋯`,
    /// i.e. the operator product `∂_{o_1}∘∂_{o_2}∘⋯` where the rightmost
    /// factor acts first. Calibrated so `∫dξ_1 dξ_2 (ξ_2ξ_1) = 1`.
    pub fn berezin_integral(&self, order: &[Generator]) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for g in order {
            if !seen.insert(*g) {
                return Err(Error::Argument(format!(
                    "duplicate generator in integration order: site {} {:?}",
                    g.site, g.kind
                )));
            }
        }
        let mut el = self.clone();
        for g in order.iter().rev() {
            el = el.derivative(*g)?;
        }
        Ok(el)
    }

    /// The full pair measure `∫ ∏_i dξ_i dξ̄_i`; extracts a scalar.
    /// Terms that do not saturate every generator contribute zero.
    pub fn berezin_pair_integral(&self) -> S {
        let full = full_mask(self.sites);
        let Some(c) = self.terms.get(&full) else {
            return S::zero();
        };
        let sign = pair_measure_sign(self.sites);
        if sign < 0 {
            -c.clone()
        } else {
            c.clone()
        }
    }

    /// Substitutes each generator by its image (odd elements only) and
    /// expands via the wedge product, preserving the written factor order.
    pub fn substitute(&self, map: &BTreeMap<Generator, GrassmannElement<S>>) -> Result<Self> {
        for (g, image) in map {
            if g.site >= self.sites {
                return Err(Error::Dimension(format!(
                    "substituted generator site {} out of range",
                    g.site
                )));
            }
            self.check_same_algebra(image)?;
            if !image.is_zero() && image.parity() != Parity::Odd {
                return Err(Error::Parity(format!(
                    "substitution image for site {} {:?} must be odd",
                    g.site, g.kind
                )));
            }
        }
        let mut out = Self::zero(self.sites);
        for (&mask, c) in &self.terms {
            let mut acc = Self::scalar(self.sites, c.clone());
            let mut rest = mask;
            while rest != 0 {
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let g = Generator::from_bit(bit, self.sites);
                let image = match map.get(&g) {
                    Some(el) => el.clone(),
                    None => Self::generator(self.sites, g),
                };
                acc = acc.wedge(&image)?;
                if acc.is_zero() {
                    break;
                }
            }
            out = out.add(&acc)?;
        }
        Ok(out)
    }

    /// Composition with an analytic function: splits the element into body
    /// and nilpotent soul and returns `Σ_j f^{(j)}(body)/j! · soul^j`.
    pub fn apply_series(&self, series: &dyn ScalarSeries<S>) -> Result<Self> {
        let n = self.generator_count();
        let body = self.body();
        let soul = self.soul();
        let derivs = series.derivatives(&body, n)?;
        let mut out = Self::scalar(self.sites, derivs[0].clone());
        let mut power = Self::one(self.sites);
        for (j, coeff) in derivs.iter().enumerate().skip(1) {
            power = power.wedge(&soul)?;
            if power.is_zero() {
                break;
            }
            let scaled = power.scale(&(coeff.clone() / factorial::<S>(j)));
            out = out.add(&scaled)?;
        }
        Ok(out)
    }

    /// Exponential specialization of [`Self::apply_series`].
    pub fn exp(&self) -> Result<Self> {
        self.apply_series(&ExpSeries)
    }

    /// Equality up to the coefficient mode's tolerance.
    pub fn approx_eq(&self, other: &Self) -> bool {
        if self.sites != other.sites {
            return false;
        }
        let keys: std::collections::BTreeSet<u64> = self
            .terms
            .keys()
            .chain(other.terms.keys())
            .copied()
            .collect();
        keys.into_iter().all(|k| {
            let a = self.terms.get(&k).cloned().unwrap_or_else(S::zero);
            let b = other.terms.get(&k).cloned().unwrap_or_else(S::zero);
            a.approx_eq(&b)
        })
    }
}

impl<S: Scalar> PartialEq for GrassmannElement<S> {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other)
    }
}

pub fn full_mask(sites: usize) -> u64 {
    if sites == 0 {
        0
    } else {
        (1u64 << (2 * sites)) - 1
    }
}

/// Sign picked up when the pair measure `∫ ∏_i dξ_i dξ̄_i` hits the canonical
/// top monomial `ξ_0⋯ξ_{m−1}ξ̄_0⋯ξ̄_{m−1}`; computed by running the actual
/// derivative cascade once per size.
pub fn pair_measure_sign(sites: usize) -> i32 {
    let mut mask = full_mask(sites);
    let mut negate = false;
    // apply ∂_{ξ̄_i} then ∂_{ξ_i} for i = m−1 … 0
    for i in (0..sites).rev() {
        for bit in [sites + i, i] {
            let (m, flip) = derivative_mask(mask, bit).expect("bit present");
            mask = m;
            negate ^= flip;
        }
    }
    debug_assert_eq!(mask, 0);
    if negate {
        -1
    } else {
        1
    }
}

impl<S: Scalar> fmt::Display for GrassmannElement<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&mask, c) in &self.terms {
            if first {
                first = false;
            } else {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            let mut rest = mask;
            while rest != 0 {
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let g = Generator::from_bit(bit, self.sites);
                match g.kind {
                    Kind::Plain => write!(f, "·ξ{}", g.site)?,
                    Kind::Barred => write!(f, "·ξ̄{}", g.site)?,
                }
            }
        }
        Ok(())
    }
}
