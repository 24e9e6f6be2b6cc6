//! Superfunctions over paired bosonic/fermionic coordinates, the
//! supersymmetry generator `Q`, exact superintegration on the
//! polynomial-times-Gaussian class, and localization checks.
//!
//! A superfunction over `m` sites is `Σ_I f_I(x,y)·μ_I · e^{−(x,Ax)−(y,Ay)}`
//! where the `f_I` are polynomials in `x_0…x_{m−1}, y_0…y_{m−1}`, the `μ_I`
//! are Grassmann monomials, and the Gaussian form `A` (possibly zero, for
//! purely polynomial superfunctions) is shared by every term. The class is
//! closed under `Q` and admits exact bosonic integration through Gaussian
//! moment formulas, so localization is checked as an exact identity.
//!
//! The fermionic derivatives inside `Q` act from the right. With the
//! left-acting monomial rule they would fail to annihilate the super inner
//! product; the right-acting convention reproduces both the generator
//! exchange rules `Qξ̄_i = −2x_i`, `Qξ_i = 2y_i` and `Q(u_i,u_j) = 0`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::cumulants::isserlis_moment;
use crate::error::{Error, Result};
use crate::gaussian::exp_quadratic_form;
use crate::grassmann::{
    derivative_mask_right, full_mask, pair_measure_sign, wedge_masks, Generator, GrassmannElement,
    MAX_GENERATORS,
};
use crate::matrix::Matrix;
use crate::poly::Polynomial;
use crate::scalar::Scalar;

/// Exponent of a supergaussian: the bosonic quadratic form `(x,Ax)+(y,Ay)`
/// to be negated, and the fermionic even element `(ξ̄,Aξ)`, so that
/// `−(u,Au) = −bosonic + fermionic`.
#[derive(Clone, Debug)]
pub struct SuperExponent<S> {
    pub bosonic: Polynomial<S>,
    pub fermionic: GrassmannElement<S>,
}

/// Localization report: both sides of the identity plus the `Q`-closedness
/// flag; `localized` records whether the two sides agree exactly.
#[derive(Clone, Debug, Serialize)]
pub struct LocalizationReport<S> {
    pub integral: S,
    pub body_at_zero: S,
    pub q_closed: bool,
    pub localized: bool,
}

#[derive(Clone, Debug)]
pub struct SuperFunction<S> {
    sites: usize,
    /// Gaussian form `A`: the factor `e^{−(x,Ax)−(y,Ay)}`; the zero matrix
    /// means no Gaussian factor.
    site_form: Matrix<S>,
    terms: BTreeMap<u64, Polynomial<S>>,
}

fn x_var(_sites: usize, i: usize) -> usize {
    i
}

fn y_var(sites: usize, i: usize) -> usize {
    sites + i
}

impl<S: Scalar> SuperFunction<S> {
    pub fn zero(sites: usize) -> Self {
        assert!(2 * sites <= MAX_GENERATORS, "algebra too large");
        SuperFunction {
            sites,
            site_form: Matrix::zeros(sites, sites),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(sites: usize, c: S) -> Self {
        let mut f = Self::zero(sites);
        if !c.is_zero() {
            f.terms.insert(0, Polynomial::constant(2 * sites, c));
        }
        f
    }

    pub fn one(sites: usize) -> Self {
        Self::constant(sites, S::one())
    }

    /// The bosonic coordinate `x_i` (no Gaussian factor).
    pub fn coordinate_x(sites: usize, i: usize) -> Self {
        let mut f = Self::zero(sites);
        f.terms
            .insert(0, Polynomial::variable(2 * sites, x_var(sites, i)));
        f
    }

    /// The bosonic coordinate `y_i` (no Gaussian factor).
    pub fn coordinate_y(sites: usize, i: usize) -> Self {
        let mut f = Self::zero(sites);
        f.terms
            .insert(0, Polynomial::variable(2 * sites, y_var(sites, i)));
        f
    }

    /// A single Grassmann generator as a superfunction.
    pub fn fermionic_generator(sites: usize, g: Generator) -> Self {
        let mut f = Self::zero(sites);
        f.terms.insert(1u64 << g.bit(sites), Polynomial::one(2 * sites));
        f
    }

    /// Embeds a Grassmann element with the given Gaussian form attached.
    pub fn from_grassmann(el: &GrassmannElement<S>, site_form: Matrix<S>) -> Result<Self> {
        if !site_form.is_square() || site_form.rows() != el.sites() {
            return Err(Error::Dimension(
                "gaussian form must be square over the element's sites".into(),
            ));
        }
        let sites = el.sites();
        let mut f = Self::zero(sites);
        f.site_form = site_form;
        for (mono, c) in el.terms() {
            f.terms
                .insert(mono.0, Polynomial::constant(2 * sites, c.clone()));
        }
        Ok(f)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn site_form(&self) -> &Matrix<S> {
        &self.site_form
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|p| p.is_zero())
    }

    /// The body `f_∅`, the Grassmann-free coefficient function.
    pub fn body(&self) -> Polynomial<S> {
        self.terms
            .get(&0)
            .cloned()
            .unwrap_or_else(|| Polynomial::zero(2 * self.sites))
    }

    /// `F_b(0)`: the body with every bosonic coordinate set to zero (the
    /// Gaussian factor evaluates to one there).
    pub fn body_at_zero(&self) -> S {
        self.body().constant_term()
    }

    fn insert_term(terms: &mut BTreeMap<u64, Polynomial<S>>, mask: u64, p: Polynomial<S>) {
        if p.is_zero() {
            return;
        }
        match terms.entry(mask) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(p);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let merged = e.get().add(&p).expect("same variable count");
                if merged.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = merged;
                }
            }
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.sites != other.sites {
            return Err(Error::Dimension(format!(
                "superfunctions over {} vs {} sites",
                self.sites, other.sites
            )));
        }
        Ok(())
    }

    /// Addition requires the same Gaussian factor; the class carries a
    /// single shared exponential.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        if !self.is_zero() && !other.is_zero() && self.site_form != other.site_form {
            return Err(Error::Argument(
                "cannot add superfunctions with different gaussian forms".into(),
            ));
        }
        let mut out = self.clone();
        if out.is_zero() {
            out.site_form = other.site_form.clone();
        }
        for (&mask, p) in &other.terms {
            Self::insert_term(&mut out.terms, mask, p.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for p in out.terms.values_mut() {
            *p = p.neg();
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = self.clone();
        if c.is_zero() {
            out.terms.clear();
            return out;
        }
        for p in out.terms.values_mut() {
            *p = p.scale(c);
        }
        out
    }

    /// Product; Gaussian forms add, since `e^{−q_1}·e^{−q_2} = e^{−(q_1+q_2)}`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.sites);
        out.site_form = self.site_form.add(&other.site_form)?;
        for (&ma, pa) in &self.terms {
            for (&mb, pb) in &other.terms {
                if let Some((mask, flip)) = wedge_masks(ma, mb) {
                    let prod = pa.mul(pb)?;
                    Self::insert_term(&mut out.terms, mask, if flip { prod.neg() } else { prod });
                }
            }
        }
        Ok(out)
    }

    /// Multiplies by a bosonic polynomial.
    pub fn mul_poly(&self, p: &Polynomial<S>) -> Result<Self> {
        if p.vars() != 2 * self.sites {
            return Err(Error::Dimension("polynomial variable count mismatch".into()));
        }
        let mut out = self.clone();
        let mut terms = BTreeMap::new();
        for (&mask, q) in &out.terms {
            Self::insert_term(&mut terms, mask, q.mul(p)?);
        }
        out.terms = terms;
        Ok(out)
    }

    /// Bosonic partial derivative along one of the `2m` coordinates,
    /// including the Gaussian chain rule `∂(p·e^{−q}) = (∂p − p·∂q)·e^{−q}`.
    fn bosonic_partial(&self, var: usize) -> Self {
        // for symmetric A, ∂q/∂v_i = 2(Av)_i within the matching block
        let sites = self.sites;
        let (block_i, is_y) = if var < sites {
            (var, false)
        } else {
            (var - sites, true)
        };
        let mut dq = Polynomial::zero(2 * sites);
        for j in 0..sites {
            let a = self.site_form.at(block_i, j).clone();
            if a.is_zero() {
                continue;
            }
            let v = if is_y { y_var(sites, j) } else { x_var(sites, j) };
            dq = dq
                .add(&Polynomial::variable(2 * sites, v).scale(&(a * S::from_i64(2))))
                .expect("same variable count");
        }
        let mut out = self.clone();
        let mut terms = BTreeMap::new();
        for (&mask, p) in &out.terms {
            let derived = p
                .partial(var)
                .sub(&p.mul(&dq).expect("same variable count"))
                .expect("same variable count");
            Self::insert_term(&mut terms, mask, derived);
        }
        out.terms = terms;
        out
    }

    /// Left multiplication by a single Grassmann generator.
    fn mul_generator_left(&self, g: Generator) -> Self {
        let bit = 1u64 << g.bit(self.sites);
        let mut out = self.clone();
        let mut terms = BTreeMap::new();
        for (&mask, p) in &out.terms {
            if let Some((m, flip)) = wedge_masks(bit, mask) {
                Self::insert_term(&mut terms, m, if flip { p.neg() } else { p.clone() });
            }
        }
        out.terms = terms;
        out
    }

    /// Right-acting Grassmann derivative of every term.
    fn fermionic_derivative_right(&self, g: Generator) -> Self {
        let bit = g.bit(self.sites);
        let mut out = self.clone();
        let mut terms = BTreeMap::new();
        for (&mask, p) in &out.terms {
            if let Some((m, flip)) = derivative_mask_right(mask, bit) {
                Self::insert_term(&mut terms, m, if flip { p.neg() } else { p.clone() });
            }
        }
        out.terms = terms;
        out
    }

    /// Equality up to the coefficient tolerance; Gaussian forms must match.
    pub fn approx_eq(&self, other: &Self) -> bool {
        if self.sites != other.sites {
            return false;
        }
        if !self.is_zero() && !other.is_zero() && self.site_form != other.site_form {
            return false;
        }
        let keys: std::collections::BTreeSet<u64> = self
            .terms
            .keys()
            .chain(other.terms.keys())
            .copied()
            .collect();
        let zero = Polynomial::zero(2 * self.sites);
        keys.into_iter().all(|k| {
            let a = self.terms.get(&k).unwrap_or(&zero);
            let b = other.terms.get(&k).unwrap_or(&zero);
            a.approx_eq(b)
        })
    }

    fn terms_iter(&self) -> impl Iterator<Item = (u64, &Polynomial<S>)> {
        self.terms.iter().map(|(&m, p)| (m, p))
    }
}

impl<S: Scalar> PartialEq for SuperFunction<S> {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other)
    }
}

/// The super inner product
/// `(u_i, u_j) = x_i x_j + y_i y_j + ½(ξ_j ξ̄_i + ξ_i ξ̄_j)`.
pub fn super_inner_product<S: Scalar>(sites: usize, i: usize, j: usize) -> SuperFunction<S> {
    assert!(i < sites && j < sites, "site out of range");
    let n2 = 2 * sites;
    let xx = Polynomial::variable(n2, x_var(sites, i))
        .mul(&Polynomial::variable(n2, x_var(sites, j)))
        .expect("same variable count");
    let yy = Polynomial::variable(n2, y_var(sites, i))
        .mul(&Polynomial::variable(n2, y_var(sites, j)))
        .expect("same variable count");
    let mut f = SuperFunction::zero(sites);
    SuperFunction::insert_term(&mut f.terms, 0, xx.add(&yy).expect("same variable count"));
    let half = S::from_ratio(1, 2);
    for (a, b) in [(j, i), (i, j)] {
        // ½ ξ_a ξ̄_b
        let el = GrassmannElement::monomial(
            sites,
            &[Generator::plain(a), Generator::barred(b)],
            half.clone(),
        );
        for (mono, c) in el.terms() {
            SuperFunction::insert_term(&mut f.terms, mono.0, Polynomial::constant(n2, c.clone()));
        }
    }
    f
}

/// The exponent parts of the supergaussian: for symmetric `A`,
/// `−(u,Au) = −[(x,Ax)+(y,Ay)] + (ξ̄,Aξ)`.
pub fn super_quadratic_form<S: Scalar>(a: &Matrix<S>) -> Result<SuperExponent<S>> {
    if !a.is_square() {
        return Err(Error::Dimension("quadratic form needs a square matrix".into()));
    }
    if !a.is_symmetric() {
        return Err(Error::Argument(
            "the super inner-product expansion assumes a symmetric matrix".into(),
        ));
    }
    let m = a.rows();
    let n2 = 2 * m;
    let mut bosonic = Polynomial::zero(n2);
    for i in 0..m {
        for j in 0..m {
            let c = a.at(i, j).clone();
            if c.is_zero() {
                continue;
            }
            let xx =
                Polynomial::variable(n2, x_var(m, i)).mul(&Polynomial::variable(n2, x_var(m, j)))?;
            let yy =
                Polynomial::variable(n2, y_var(m, i)).mul(&Polynomial::variable(n2, y_var(m, j)))?;
            bosonic = bosonic.add(&xx.add(&yy)?.scale(&c))?;
        }
    }
    let fermionic = crate::gaussian::quadratic_form(a)?;
    Ok(SuperExponent { bosonic, fermionic })
}

/// `exp(−(u,Au))`: the Gaussian factor `e^{−(x,Ax)−(y,Ay)}` times the finite
/// fermionic exponential `exp((ξ̄,Aξ))`.
pub fn supergaussian<S: Scalar>(a: &Matrix<S>) -> Result<SuperFunction<S>> {
    if !a.is_symmetric() {
        return Err(Error::Argument("supergaussian needs a symmetric matrix".into()));
    }
    let fermionic = exp_quadratic_form(a)?;
    SuperFunction::from_grassmann(&fermionic, a.clone())
}

/// `(u, Au) = Σ_{i,j} A(i,j)(u_i,u_j)` as a polynomial superfunction.
pub fn inner_form<S: Scalar>(a: &Matrix<S>) -> Result<SuperFunction<S>> {
    if !a.is_square() {
        return Err(Error::Dimension("inner form needs a square matrix".into()));
    }
    if !a.is_symmetric() {
        return Err(Error::Argument(
            "the super inner-product expansion assumes a symmetric matrix".into(),
        ));
    }
    let m = a.rows();
    let mut out = SuperFunction::zero(m);
    for i in 0..m {
        for j in 0..m {
            let c = a.at(i, j).clone();
            if c.is_zero() {
                continue;
            }
            out = out.add(&super_inner_product(m, i, j).scale(&c))?;
        }
    }
    Ok(out)
}

/// `g((u,Au))·exp(−(u,Au))` for a polynomial `g`: the canonical family of
/// supersymmetric test functions.
pub fn polynomial_of_inner_form<S: Scalar>(
    g_coeffs: &[S],
    a: &Matrix<S>,
) -> Result<SuperFunction<S>> {
    let s = inner_form(a)?;
    let m = a.rows();
    let mut g_of_s = SuperFunction::zero(m);
    let mut power = SuperFunction::one(m);
    for (k, c) in g_coeffs.iter().enumerate() {
        if k > 0 {
            power = power.mul(&s)?;
        }
        g_of_s = g_of_s.add(&power.scale(c))?;
    }
    g_of_s.mul(&supergaussian(a)?)
}

/// Applies the supersymmetry generator
/// `Q = Σ_i (ξ_i ∂/∂x_i + ξ̄_i ∂/∂y_i − 2x_i ∂/∂ξ̄_i + 2y_i ∂/∂ξ_i)`
/// with right-acting fermionic derivatives; the scalar prefactor is dropped
/// since only `QF = 0` matters and that is scale-invariant.
pub fn q_apply<S: Scalar>(f: &SuperFunction<S>) -> SuperFunction<S> {
    let sites = f.sites();
    let n2 = 2 * sites;
    let mut out = SuperFunction::zero(sites);
    out.site_form = f.site_form().clone();
    for i in 0..sites {
        let dx = f
            .bosonic_partial(x_var(sites, i))
            .mul_generator_left(Generator::plain(i));
        let dy = f
            .bosonic_partial(y_var(sites, i))
            .mul_generator_left(Generator::barred(i));
        let dxi_bar = f
            .fermionic_derivative_right(Generator::barred(i))
            .mul_poly(&Polynomial::variable(n2, x_var(sites, i)))
            .expect("same variable count")
            .scale(&S::from_i64(-2));
        let dxi = f
            .fermionic_derivative_right(Generator::plain(i))
            .mul_poly(&Polynomial::variable(n2, y_var(sites, i)))
            .expect("same variable count")
            .scale(&S::from_i64(2));
        for part in [dx, dy, dxi_bar, dxi] {
            for (mask, p) in part.terms_iter() {
                SuperFunction::insert_term(&mut out.terms, mask, p.clone());
            }
        }
    }
    out
}

/// `∫ F du`: Berezin-integrates the fermionic part, then integrates the
/// surviving polynomial against the Gaussian factor exactly, with the
/// Lebesgue measure normalized by `π^m` so that `∫ exp(−(u,Au)) du = 1`.
pub fn super_integrate<S: Scalar>(f: &SuperFunction<S>) -> Result<S> {
    let m = f.sites();
    let a = f.site_form();
    if !a.is_positive_definite() {
        return Err(Error::Integrability(
            "gaussian form must be positive-definite".into(),
        ));
    }
    // only the saturated fermionic monomial survives the pair measure
    let full = full_mask(m);
    let Some(top) = f.terms.get(&full) else {
        return Ok(S::zero());
    };
    let sign = pair_measure_sign(m);
    let top = if sign < 0 { top.neg() } else { top.clone() };
    // ∫ p·e^{−(x,Ax)−(y,Ay)} dx dy / π^m = det(A)⁻¹·E[p(V)] with
    // V ~ N(0, ½·diag(A,A)⁻¹)
    let det_a = a.determinant()?;
    let sigma = a
        .inverse()?
        .scale(&S::from_ratio(1, 2))
        .double_block_diagonal();
    let mut expectation = S::zero();
    for (exps, c) in top.terms() {
        let mut indices = Vec::new();
        for (var, &e) in exps.iter().enumerate() {
            for _ in 0..e {
                indices.push(var);
            }
        }
        expectation = expectation + c.clone() * isserlis_moment(&sigma, &indices);
    }
    Ok(expectation / det_a)
}

/// Computes `∫F`, `F_b(0)` and `Q`-closedness; `localized` reports whether
/// the two values agree exactly (the localization identity for `Q`-closed
/// integrable superfunctions).
pub fn localization_check<S: Scalar>(f: &SuperFunction<S>) -> Result<LocalizationReport<S>> {
    let integral = super_integrate(f)?;
    let body_at_zero = f.body_at_zero();
    let q_closed = q_apply(f).is_zero();
    let localized = integral.approx_eq(&body_at_zero);
    Ok(LocalizationReport {
        integral,
        body_at_zero,
        q_closed,
        localized,
    })
}
