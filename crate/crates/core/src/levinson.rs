//! Preparation of function germs into unitary `w`-polynomials, and of
//! meromorphic germs into `w`-rational functions, by a change of the `w`
//! coordinate alone (no unit factor is left over).

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::change::CoordinateChange;
use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::poly::PolyInW;
use crate::series::{identity_images, MultiIndex, Series};
use crate::weierstrass::weierstrass_prepare;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreparedFunction {
    pub k: usize,
    /// `f_0, …, f_{k-1}`, series in `z` only.
    pub coeffs: Vec<Series>,
    pub change: CoordinateChange,
    pub residual: Series,
}

impl PreparedFunction {
    pub fn polynomial(&self) -> PolyInW {
        PolyInW::unitary(self.coeffs.clone()).expect("coefficients share a shape")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreparedMeromorphic {
    pub k0: usize,
    pub k_inf: usize,
    pub numerator: PolyInW,
    pub denominator: PolyInW,
    pub change: CoordinateChange,
    pub residual: Series,
}

/// `r = c·w^k·h(w)` with `h(0) = 1`, for `r` depending on `w` only.
fn split_leading(r: &Series) -> Option<(usize, Coeff, Series)> {
    let k = r.w_order()?;
    let n = r.nvars();
    let last = n - 1;
    let c = r.coeff(&MultiIndex::unit(n, last).pow_exp(k as u32));
    let cinv = c.inv().ok()?;
    let mut h = Series::zero(n, r.trunc());
    for (e, a) in r.terms() {
        h.add_term(e.with(last, e.w_exp() - k as u32), &(a * &cinv));
    }
    Some((k, c, h))
}

fn with_w(images_of: &Series) -> Vec<Series> {
    let mut images = identity_images(images_of.nvars(), images_of.trunc());
    *images.last_mut().unwrap() = images_of.clone();
    images
}

/// `φ(w)` with `(c·w^l·h(w)) ∘ φ = w^l`, where `l ≠ 0`.
fn vertical_root(c: &Coeff, h: &Series, l: i64) -> Result<Series> {
    let n = h.nvars();
    let w = Series::w(n, h.trunc());
    if *c == Coeff::from_int(1) && *h == Series::one(n, h.trunc()) {
        return Ok(w);
    }
    let mut root = c.nth_root(l.unsigned_abs() as u32)?;
    if l < 0 {
        root = root.inv()?;
    }
    let hp = h.unit_pow(&BigRational::new(BigInt::from(1), BigInt::from(l)))?;
    let psi = (&w * &hp).scale(&root);
    psi.compositional_inverse_1d(n - 1)
}

/// One-variable change `w := φ(w)` with `f(0, φ(w)) ≡ w^k`.
pub fn normalize_vertical(f: &Series) -> Result<CoordinateChange> {
    let r = f.restrict_to_w_axis();
    let (k, c, h) = split_leading(&r)
        .ok_or_else(|| Error::Hypothesis("f(0,w) vanishes identically".into()))?;
    if k == 0 {
        return Err(Error::Hypothesis("f(0,0) is nonzero: w-order is 0".into()));
    }
    CoordinateChange::w_only(vertical_root(&c, &h, k as i64)?)
}

/// Runs `k − 1` degrees past the input jet, read as a polynomial, so the
/// change is settled through degree `N`.
pub fn levinson_prepare(f: &Series) -> Result<PreparedFunction> {
    let t = f.trunc();
    let k = f
        .w_order()
        .ok_or_else(|| Error::Hypothesis("f(0,w) vanishes identically".into()))?;
    let wide = prepare_at(&f.with_trunc(t + k - 1))?;
    let change = CoordinateChange::w_only(wide.change.w_image().truncate_to(t))?;
    let coeffs: Vec<Series> = wide.coeffs.iter().map(|c| c.truncate_to(t)).collect();
    let poly = PolyInW::unitary(coeffs.clone())?;
    let residual = &change.apply(f)? - &poly.to_series();
    if !residual.is_zero() {
        return Err(Error::Verification(format!("prepared function leaves residual {}", residual.pretty(false))));
    }
    Ok(PreparedFunction { k, coeffs, change, residual })
}

fn prepare_at(f: &Series) -> Result<PreparedFunction> {
    let n = f.nvars();
    let t = f.trunc();
    let k = f
        .w_order()
        .ok_or_else(|| Error::Hypothesis("f(0,w) vanishes identically".into()))?;
    let nv = normalize_vertical(f)?;
    let mut phi = nv.w_image().clone();
    let mut g = nv.apply(f)?;
    let kinv = Coeff::frac(1, k as i64);
    let last = n - 1;
    for m in 1..=t {
        let mut delta = Series::zero(n, t);
        for (e, d) in g.z_slice(m).terms().filter(|(e, _)| e.w_exp() as usize >= k) {
            delta.add_term(e.with(last, e.w_exp() - k as u32 + 1), &(d * &kinv));
        }
        if delta.is_zero() {
            continue;
        }
        let images = with_w(&(&Series::w(n, t) - &delta));
        g = g.substitute(&images)?;
        phi = phi.substitute(&images)?;
    }
    let coeffs: Vec<Series> = (0..k as u32).map(|j| g.w_coeff(j)).collect();
    let poly = PolyInW::unitary(coeffs.clone())?;
    let residual = &g - &poly.to_series();
    if !residual.is_zero() {
        return Err(Error::Verification(format!("prepared function leaves residual {}", residual.pretty(false))));
    }
    Ok(PreparedFunction { k, coeffs, change: CoordinateChange::w_only(phi)?, residual })
}

fn as_unitary(s: &Series) -> Option<PolyInW> {
    if s.is_zero() {
        return None;
    }
    let d = s.w_degree().unwrap_or(0) as usize;
    let p = PolyInW::from_series(s, d).ok()?;
    p.is_unitary().then_some(p)
}

fn constant_poly(n: usize, t: usize) -> PolyInW {
    PolyInW::new(vec![Series::one(n, t)]).expect("constant polynomial")
}

pub fn cleared_residual(num: &Series, den: &Series, change: &CoordinateChange, numer: &PolyInW, denom: &PolyInW) -> Result<Series> {
    let a = change.apply(num)?;
    let b = change.apply(den)?;
    Ok(&(&a * &denom.to_series()) - &(&b * &numer.to_series()))
}

/// Both `num(0,w)` and `den(0,w)` vanish at `w = 0` and the restriction has
/// order `l = p − q ≠ 0`. Works on the Weierstrass factorizations
/// `num∘φ = U·A`, `den∘φ = V·B` and corrects `φ` slice by slice until the
/// unit quotient `U/V` is identically 1.
fn rational_prepare(num: &Series, den: &Series) -> Result<(CoordinateChange, PolyInW, PolyInW)> {
    let n = num.nvars();
    let t = num.trunc();
    let (p, a, _) = split_leading(&num.restrict_to_w_axis()).expect("finite order");
    let (q, b, _) = split_leading(&den.restrict_to_w_axis()).expect("finite order");
    let big = t + p + q;
    let nu = num.with_trunc(big);
    let de = den.with_trunc(big);
    let (_, _, ha_big) = split_leading(&nu.restrict_to_w_axis()).unwrap();
    let (_, _, hb_big) = split_leading(&de.restrict_to_w_axis()).unwrap();
    let l = p as i64 - q as i64;
    let c = &a / &b;
    let h = &ha_big * &hb_big.invert_unit()?;
    let mut phi = vertical_root(&c, &h, l)?;
    let ls = Coeff::frac(-1, l);
    let last = n - 1;
    for m in 1..=big {
        let images = with_w(&phi);
        let ua = weierstrass_prepare(&nu.substitute(&images)?)?;
        let vb = weierstrass_prepare(&de.substitute(&images)?)?;
        let wq = &ua.unit * &vb.unit.invert_unit()?;
        let mut delta = Series::zero(n, big);
        for (e, d) in wq.z_slice(m).terms() {
            delta.add_term(e.with(last, e.w_exp() + 1), &(d * &ls));
        }
        if delta.is_zero() {
            continue;
        }
        phi = phi.substitute(&with_w(&(&Series::w(n, big) + &delta)))?;
    }
    let images = with_w(&phi);
    let ua = weierstrass_prepare(&nu.substitute(&images)?)?;
    let vb = weierstrass_prepare(&de.substitute(&images)?)?;
    let cut = |p: &PolyInW| PolyInW::new(p.coeffs().iter().map(|s| s.with_trunc(t)).collect());
    Ok((CoordinateChange::w_only(phi.with_trunc(t))?, cut(&ua.poly)?, cut(&vb.poly)?))
}

pub fn meromorphic_prepare(num: &Series, den: &Series) -> Result<PreparedMeromorphic> {
    num.same_shape(den)?;
    let n = num.nvars();
    let t = num.trunc();
    if let (Some(a), Some(b)) = (as_unitary(num), as_unitary(den)) {
        return Ok(PreparedMeromorphic {
            k0: a.degree(),
            k_inf: b.degree(),
            numerator: a,
            denominator: b,
            change: CoordinateChange::identity(n, t),
            residual: Series::zero(n, t),
        });
    }
    let (p, a, _) = split_leading(&num.restrict_to_w_axis())
        .ok_or_else(|| Error::Hypothesis("f(0,w) vanishes identically".into()))?;
    let (q, b, _) = split_leading(&den.restrict_to_w_axis())
        .ok_or_else(|| Error::Hypothesis("denominator vanishes identically on the w-axis".into()))?;
    // Equal orders: subtract the value at the origin so the restriction
    // has a zero there.
    let (shift, num1) = if p == q {
        let c = &a / &b;
        let shifted = num - &den.scale(&c);
        if shifted.w_order().is_none() {
            return Err(Error::Hypothesis("f(0,w) is constant".into()));
        }
        (Some(c), shifted)
    } else {
        (None, num.clone())
    };
    let p1 = num1.w_order().unwrap();
    let (change, mut numer, denom) = if q == 0 {
        let lp = levinson_prepare(&(&num1 * &den.invert_unit()?))?;
        (lp.change.clone(), lp.polynomial(), constant_poly(n, t))
    } else if p1 == 0 {
        let lp = levinson_prepare(&(den * &num1.invert_unit()?))?;
        (lp.change.clone(), constant_poly(n, t), lp.polynomial())
    } else {
        rational_prepare(&num1, den)?
    };
    if let Some(c) = shift {
        numer = PolyInW::from_series(&(&numer.to_series() + &denom.to_series().scale(&c)), numer.degree())?;
    }
    let residual = cleared_residual(num, den, &change, &numer, &denom)?;
    if !residual.is_zero() {
        return Err(Error::Verification(format!("meromorphic preparation leaves residual {}", residual.pretty(false))));
    }
    Ok(PreparedMeromorphic { k0: numer.degree(), k_inf: denom.degree(), numerator: numer, denominator: denom, change, residual })
}
