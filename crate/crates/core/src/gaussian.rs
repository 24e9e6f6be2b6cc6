//! Fermionic Gaussian integrals and Wick-type identities.
//!
//! Everything here is computable along two independent routes: symbolically
//! through the Grassmann algebra, and by linear algebra (determinants of the
//! coefficient matrices). The symbolic route is the arbiter for sign
//! conventions; in particular the paired two-point function is
//! `∫ ξ̄_i ξ_j e^{(ξ̄,Aξ)} = det(A)·A⁻¹(j,i)`, which the determinant route
//! reproduces as `(−1)^{i+j} det(A_{iᶜ,jᶜ})`.

use crate::error::{Error, Result};
use crate::grassmann::{full_mask, Generator, GrassmannElement};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Largest pair count for which the symbolic routes run.
pub const SYMBOLIC_PAIR_CAP: usize = 12;

/// Builds `(ξ̄, Aξ) = Σ_{i,j} ξ̄_i A(i,j) ξ_j` over one site per matrix row.
pub fn quadratic_form<S: Scalar>(a: &Matrix<S>) -> Result<GrassmannElement<S>> {
    if !a.is_square() {
        return Err(Error::Dimension("quadratic form needs a square matrix".into()));
    }
    let m = a.rows();
    let mut out = GrassmannElement::zero(m);
    for i in 0..m {
        for j in 0..m {
            let c = a.at(i, j).clone();
            if c.is_zero() {
                continue;
            }
            let term =
                GrassmannElement::monomial(m, &[Generator::barred(i), Generator::plain(j)], c);
            out = out.add(&term)?;
        }
    }
    Ok(out)
}

/// `exp((ξ̄,Aξ))` by product splitting: the form is even, so the exponential
/// factors as `∏_i exp(ξ̄_i Σ_j A(i,j) ξ_j)` and each factor is `1 + row`.
pub fn exp_quadratic_form<S: Scalar>(a: &Matrix<S>) -> Result<GrassmannElement<S>> {
    if !a.is_square() {
        return Err(Error::Dimension("quadratic form needs a square matrix".into()));
    }
    let m = a.rows();
    let mut out = GrassmannElement::one(m);
    for i in 0..m {
        out = out.wedge(&row_factor(a, i)?)?;
    }
    Ok(out)
}

/// `exp(ξ̄_i Σ_j A(i,j) ξ_j) = 1 + ξ̄_i Σ_j A(i,j) ξ_j`.
fn row_factor<S: Scalar>(a: &Matrix<S>, i: usize) -> Result<GrassmannElement<S>> {
    let m = a.rows();
    let mut row = GrassmannElement::zero(m);
    for j in 0..m {
        let c = a.at(i, j).clone();
        if c.is_zero() {
            continue;
        }
        row = row.add(&GrassmannElement::monomial(
            m,
            &[Generator::barred(i), Generator::plain(j)],
            c,
        ))?;
    }
    row.exp()
}

/// `∫ D(ξ,ξ̄) prefactor · e^{(ξ̄,Aξ)}`.
///
/// Multiplies the row factors in sequence; after each step, terms whose mask
/// can no longer reach full saturation (their union with the support of every
/// remaining factor misses a generator) are dropped, since only the fully
/// saturated monomial survives the pair measure.
pub fn integrate_against_gaussian<S: Scalar>(
    prefactor: &GrassmannElement<S>,
    a: &Matrix<S>,
) -> Result<S> {
    if !a.is_square() {
        return Err(Error::Dimension("gaussian weight needs a square matrix".into()));
    }
    let m = a.rows();
    if prefactor.sites() != m {
        return Err(Error::Dimension(format!(
            "prefactor over {} sites but matrix is {m}x{m}",
            prefactor.sites()
        )));
    }
    let factors: Vec<GrassmannElement<S>> =
        (0..m).map(|i| row_factor(a, i)).collect::<Result<_>>()?;
    let mut remaining: Vec<u64> = vec![0; m + 1];
    for i in (0..m).rev() {
        remaining[i] = remaining[i + 1] | factors[i].support_mask();
    }
    let full = full_mask(m);
    let mut acc = prefactor.retain_masks(|mask| mask | remaining[0] == full);
    for (i, factor) in factors.iter().enumerate() {
        if acc.is_zero() {
            return Ok(S::zero());
        }
        acc = acc
            .wedge(factor)?
            .retain_masks(|mask| mask | remaining[i + 1] == full);
    }
    Ok(acc.berezin_pair_integral())
}

/// `∫ D(ξ,ξ̄) e^{(ξ̄,Aξ)}`, evaluated symbolically. Equals `det(A)` with no
/// positivity or symmetry assumption on `A`.
pub fn gaussian_integral_symbolic<S: Scalar>(a: &Matrix<S>) -> Result<S> {
    if !a.is_square() {
        return Err(Error::Dimension("gaussian integral needs a square matrix".into()));
    }
    if a.rows() > SYMBOLIC_PAIR_CAP {
        return Err(Error::Capacity(format!(
            "{} pairs exceeds the symbolic cap of {SYMBOLIC_PAIR_CAP}",
            a.rows()
        )));
    }
    integrate_against_gaussian(&GrassmannElement::one(a.rows()), a)
}

/// As [`gaussian_integral_symbolic`], but building the full exponential
/// element with the generic series machinery and integrating it with the
/// pair measure. Slower; pins the pruned route in tests.
pub fn gaussian_integral_unpruned<S: Scalar>(a: &Matrix<S>) -> Result<S> {
    let el = quadratic_form(a)?.exp()?;
    Ok(el.berezin_pair_integral())
}

/// Wick's bilinear identity:
/// `∫ D(ξ,ξ̄) ∏_α (ξ̄ᵀC)_α (Bξ)_α e^{(ξ̄,Aξ)} = det(A)·det(B A⁻¹ C)`.
///
/// Runs the symbolic route when the pair count allows it, otherwise the
/// determinant route (which needs `A` invertible).
pub fn wick_bilinear<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>, c: &Matrix<S>) -> Result<S> {
    check_wick_shapes(a, b, c)?;
    if a.rows() <= SYMBOLIC_PAIR_CAP {
        wick_bilinear_symbolic(a, b, c)
    } else {
        wick_bilinear_det(a, b, c)
    }
}

fn check_wick_shapes<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>, c: &Matrix<S>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::Dimension("A must be square".into()));
    }
    let m = a.rows();
    let r = b.rows();
    if b.cols() != m || c.rows() != m || c.cols() != r {
        return Err(Error::Dimension(format!(
            "shapes must be A {m}x{m}, B rx{m}, C {m}xr; got B {}x{}, C {}x{}",
            b.rows(),
            b.cols(),
            c.rows(),
            c.cols()
        )));
    }
    if r > m {
        return Err(Error::Dimension(format!("r = {r} exceeds m = {m}")));
    }
    Ok(())
}

/// Symbolic route for Wick's bilinear identity.
pub fn wick_bilinear_symbolic<S: Scalar>(
    a: &Matrix<S>,
    b: &Matrix<S>,
    c: &Matrix<S>,
) -> Result<S> {
    check_wick_shapes(a, b, c)?;
    let m = a.rows();
    let r = b.rows();
    let mut prefactor = GrassmannElement::one(m);
    for alpha in 0..r {
        // (ξ̄ᵀ C)_α = Σ_i ξ̄_i C(i,α) followed by (B ξ)_α = Σ_j B(α,j) ξ_j
        let mut left = GrassmannElement::zero(m);
        for i in 0..m {
            let coef = c.at(i, alpha).clone();
            if coef.is_zero() {
                continue;
            }
            left = left.add(&GrassmannElement::generator(m, Generator::barred(i)).scale(&coef))?;
        }
        let mut right = GrassmannElement::zero(m);
        for j in 0..m {
            let coef = b.at(alpha, j).clone();
            if coef.is_zero() {
                continue;
            }
            right = right.add(&GrassmannElement::generator(m, Generator::plain(j)).scale(&coef))?;
        }
        prefactor = prefactor.wedge(&left)?.wedge(&right)?;
    }
    integrate_against_gaussian(&prefactor, a)
}

/// Determinant route for Wick's bilinear identity.
pub fn wick_bilinear_det<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>, c: &Matrix<S>) -> Result<S> {
    check_wick_shapes(a, b, c)?;
    let det_a = a.determinant()?;
    if det_a.is_zero() {
        return Err(Error::Singular("A is singular in the determinant route".into()));
    }
    let a_inv = a.inverse()?;
    let inner = b.mul(&a_inv)?.mul(c)?;
    Ok(det_a * inner.determinant()?)
}

/// Normalized fermionic expectation `⟨F⟩ = det(O)⁻¹ ∫ D(ξ,ξ̄) e^{(ξ̄,Oξ)} F`.
pub fn fermionic_expectation<S: Scalar>(o: &Matrix<S>, f: &GrassmannElement<S>) -> Result<S> {
    let det_o = o.determinant()?;
    if det_o.is_zero() {
        return Err(Error::Singular("det(O) = 0 in fermionic expectation".into()));
    }
    let raw = integrate_against_gaussian(f, o)?;
    Ok(raw / det_o)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rat;
    use num_traits::Zero;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_matrix(rng: &mut StdRng, n: usize) -> Matrix<Rat> {
        Matrix::from_fn(n, n, |_, _| {
            Rat::from_ratio(rng.gen_range(-9..=9), rng.gen_range(1..=9))
        })
    }

    #[test]
    fn single_pair_integral_is_entry() {
        // m = 1, A = [a]: 1 + a ξ̄ξ integrates to a
        let a = Matrix::from_fn(1, 1, |_, _| Rat::from_ratio(7, 3));
        assert_eq!(gaussian_integral_symbolic(&a).unwrap(), Rat::from_ratio(7, 3));
    }

    #[test]
    fn identity_integrates_to_one() {
        for m in 0..=4 {
            let a: Matrix<Rat> = Matrix::identity(m);
            assert_eq!(gaussian_integral_symbolic(&a).unwrap(), Rat::from_i64(1));
        }
    }

    #[test]
    fn symbolic_equals_determinant_on_randoms() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..10 {
            let n = rng.gen_range(1..=4);
            let a = random_matrix(&mut rng, n);
            let symbolic = gaussian_integral_symbolic(&a).unwrap();
            assert_eq!(symbolic, a.determinant().unwrap());
            // the unpruned element-level route agrees
            assert_eq!(gaussian_integral_unpruned(&a).unwrap(), symbolic);
        }
    }

    #[test]
    fn wick_m1_unit() {
        let a = Matrix::from_fn(1, 1, |_, _| Rat::from_ratio(5, 2));
        let b: Matrix<Rat> = Matrix::identity(1);
        let c: Matrix<Rat> = Matrix::identity(1);
        assert_eq!(wick_bilinear(&a, &b, &c).unwrap(), Rat::from_i64(1));
    }

    #[test]
    fn wick_r0_reduces_to_gaussian() {
        let mut rng = StdRng::seed_from_u64(5);
        let a = random_matrix(&mut rng, 3);
        let b: Matrix<Rat> = Matrix::zeros(0, 3);
        let c: Matrix<Rat> = Matrix::zeros(3, 0);
        assert_eq!(
            wick_bilinear_symbolic(&a, &b, &c).unwrap(),
            a.determinant().unwrap()
        );
    }

    #[test]
    fn wick_selector_on_identity() {
        // m = 2, A = I, B = C selecting site 0 → 1
        let a: Matrix<Rat> = Matrix::identity(2);
        let b = Matrix::from_int_rows(&[&[1, 0]]);
        let c = Matrix::from_int_rows(&[&[1], &[0]]);
        assert_eq!(wick_bilinear_symbolic(&a, &b, &c).unwrap(), Rat::from_i64(1));
    }

    #[test]
    fn wick_routes_agree() {
        let mut rng = StdRng::seed_from_u64(23);
        let mut done = 0;
        while done < 8 {
            let m = rng.gen_range(1..=4);
            let r = rng.gen_range(0..=m.min(2));
            let a = random_matrix(&mut rng, m);
            if a.determinant().unwrap().is_zero() {
                continue;
            }
            let b = Matrix::from_fn(r, m, |_, _| Rat::from_i64(rng.gen_range(-3..=3)));
            let c = Matrix::from_fn(m, r, |_, _| Rat::from_i64(rng.gen_range(-3..=3)));
            assert_eq!(
                wick_bilinear_symbolic(&a, &b, &c).unwrap(),
                wick_bilinear_det(&a, &b, &c).unwrap()
            );
            done += 1;
        }
    }

    #[test]
    fn two_point_matches_inverse_entry() {
        let mut rng = StdRng::seed_from_u64(31);
        let mut done = 0;
        while done < 6 {
            let m = rng.gen_range(1..=4);
            let a = random_matrix(&mut rng, m);
            let det = a.determinant().unwrap();
            if det.is_zero() {
                continue;
            }
            let inv = a.inverse().unwrap();
            let i = rng.gen_range(0..m);
            let j = rng.gen_range(0..m);
            let pre = GrassmannElement::monomial(
                m,
                &[Generator::barred(i), Generator::plain(j)],
                Rat::from_i64(1),
            );
            let symbolic = integrate_against_gaussian(&pre, &a).unwrap();
            assert_eq!(symbolic, det.clone() * inv.at(j, i).clone());
            // (−1)^{i+j} det(A_{iᶜ,jᶜ}) is the same number
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            assert_eq!(
                symbolic,
                Rat::from_i64(sign) * a.minor(i, j).determinant().unwrap()
            );
            done += 1;
        }
    }

    #[test]
    fn unbalanced_integrand_vanishes() {
        let mut rng = StdRng::seed_from_u64(47);
        let a = random_matrix(&mut rng, 3);
        // a lone barred generator can never saturate
        let pre = GrassmannElement::generator(3, Generator::barred(1));
        assert!(integrate_against_gaussian(&pre, &a).unwrap().is_zero());
    }

    #[test]
    fn fermionic_expectation_normalizes() {
        let mut rng = StdRng::seed_from_u64(53);
        let a = random_matrix(&mut rng, 3);
        if !a.determinant().unwrap().is_zero() {
            let one = GrassmannElement::one(3);
            assert_eq!(fermionic_expectation(&a, &one).unwrap(), Rat::from_i64(1));
        }
        // m = 1, O = [a], F = ξ̄ξ → 1/a
        let o = Matrix::from_fn(1, 1, |_, _| Rat::from_ratio(4, 3));
        let f = GrassmannElement::monomial(
            1,
            &[Generator::barred(0), Generator::plain(0)],
            Rat::from_i64(1),
        );
        assert_eq!(fermionic_expectation(&o, &f).unwrap(), Rat::from_ratio(3, 4));
        let singular: Matrix<Rat> = Matrix::zeros(1, 1);
        assert!(fermionic_expectation(&singular, &f).is_err());
    }

    #[test]
    fn float_routes_agree_within_tolerance() {
        let mut rng = StdRng::seed_from_u64(61);
        let a: Matrix<f64> = Matrix::from_fn(4, 4, |_, _| rng.gen_range(-2.0..2.0));
        let symbolic = gaussian_integral_symbolic(&a).unwrap();
        let det = a.determinant().unwrap();
        assert!(crate::scalar::float_close(
            symbolic,
            det,
            crate::scalar::FLOAT_ROUTE_TOL
        ));
    }
}
