//! Classical Weierstrass division and preparation in the truncated ring.
//!
//! For `f` with `w_order(f) = k`, write `f = f_low + w^k f_high` where
//! `f_low` collects the `w`-degree `< k` part. Then `f_high` is a unit and
//! `f · f_high⁻¹ = w^k + ε` with `ε` in the ideal `(z)`. Division by
//! `w^k + ε` is the usual fixed point, which terminates because every pass
//! raises the `z`-degree.

use crate::error::{Error, Result};
use crate::poly::PolyInW;
use crate::series::{MultiIndex, Series};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeierstrassFactorization {
    pub unit: Series,
    pub poly: PolyInW,
}

fn split_at_w(h: &Series, k: u32) -> (Series, Series) {
    let n = h.nvars();
    let low = h.filter(|e| e.w_exp() < k);
    let mut high = Series::zero(n, h.trunc());
    for (e, c) in h.terms().filter(|(e, _)| e.w_exp() >= k) {
        high.add_term(e.with(n - 1, e.w_exp() - k), c);
    }
    (low, high)
}

fn order_in_w(f: &Series) -> Result<usize> {
    f.w_order().ok_or_else(|| {
        Error::Hypothesis("f(0,w) vanishes identically: w-order is infinite".into())
    })
}

/// Returns `(q, r)` with `g ≡ q·f + r` and `deg_w r < k`.
pub fn weierstrass_divide(g: &Series, f: &Series) -> Result<(Series, PolyInW)> {
    g.same_shape(f)?;
    let k = order_in_w(f)?;
    let n = f.nvars();
    let t = f.trunc();
    let (f_low, f_high) = split_at_w(f, k as u32);
    let u = f_high.invert_unit()?;
    let eps = &f_low * &u;
    let mut q = Series::zero(n, t);
    let mut r = Series::zero(n, t);
    let mut h = g.clone();
    // ε raises the z-degree by at least one per pass.
    for _ in 0..=t {
        if h.is_zero() {
            break;
        }
        let (lo, hi) = split_at_w(&h, k as u32);
        r = &r + &lo;
        q = &q + &hi;
        h = -(&hi * &eps);
    }
    debug_assert!(h.is_zero());
    let quotient = &q * &u;
    let rem = if k == 0 {
        PolyInW::new(vec![Series::zero(n, t)])?
    } else {
        PolyInW::from_series(&r, k - 1)?
    };
    Ok((quotient, rem))
}

/// `f ≡ unit · poly` with `poly` unitary of degree `k = w_order(f)` and
/// `poly(0, w) = w^k`.
pub fn weierstrass_prepare(f: &Series) -> Result<WeierstrassFactorization> {
    let k = order_in_w(f)?;
    let n = f.nvars();
    let t = f.trunc();
    let wk = Series::monomial(n, t, MultiIndex::unit(n, n - 1).pow_exp(k as u32), crate::coeff::Coeff::from_int(1));
    // w^k = q f + r  =>  f = q⁻¹ (w^k − r)
    let (q, r) = weierstrass_divide(&wk, f)?;
    let p = &wk - &r.to_series();
    let unit = q.invert_unit()?;
    let poly = PolyInW::from_series(&p, k)?;
    Ok(WeierstrassFactorization { unit, poly })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Coeff;

    #[test]
    fn divide_linear() {
        let t = 6;
        let w = Series::w(2, t);
        let f = Series::from_fracs(2, t, &[(&[0, 1], 1, 1), (&[1, 0], -1, 1)]);
        let (q, r) = weierstrass_divide(&w, &f).unwrap();
        assert_eq!(q, Series::one(2, t));
        assert_eq!(r.to_series(), Series::var(2, t, 0));
    }

    #[test]
    fn divide_by_self() {
        let t = 6;
        let f = Series::from_fracs(2, t, &[(&[0, 2], 1, 1), (&[1, 1], 3, 1), (&[2, 0], 1, 1), (&[1, 2], 1, 2)]);
        let (q, r) = weierstrass_divide(&f, &f).unwrap();
        assert_eq!(q, Series::one(2, t));
        assert!(r.to_series().is_zero());
    }

    #[test]
    fn already_prepared() {
        let t = 6;
        let f = Series::from_fracs(2, t, &[(&[0, 2], 1, 1)]);
        let wf = weierstrass_prepare(&f).unwrap();
        assert_eq!(wf.unit, Series::one(2, t));
        assert_eq!(wf.poly.to_series(), f);
        let g = Series::from_fracs(2, t, &[(&[0, 1], 1, 1), (&[1, 0], 1, 1)]);
        let wg = weierstrass_prepare(&g).unwrap();
        assert_eq!(wg.unit, Series::one(2, t));
        assert_eq!(wg.poly.to_series(), g);
    }

    #[test]
    fn prepare_with_unit() {
        // (1+z)w + z = (1+z)(w + z/(1+z))
        let t = 8;
        let f = Series::from_fracs(2, t, &[(&[0, 1], 1, 1), (&[1, 1], 1, 1), (&[1, 0], 1, 1)]);
        let wf = weierstrass_prepare(&f).unwrap();
        assert!(wf.poly.is_unitary());
        assert_eq!(&wf.unit * &wf.poly.to_series(), f);
        let one_plus_z = Series::from_fracs(2, t, &[(&[0, 0], 1, 1), (&[1, 0], 1, 1)]);
        let expect = &Series::w(2, t) + &(&Series::var(2, t, 0) * &one_plus_z.invert_unit().unwrap());
        assert_eq!(wf.poly.to_series(), expect);
        assert_eq!(wf.unit.coeff_of(&[1, 0]), Coeff::from_int(1));
    }

    #[test]
    fn infinite_order_is_error() {
        let f = Series::var(2, 5, 0);
        assert!(matches!(weierstrass_prepare(&f), Err(Error::Hypothesis(_))));
    }
}
