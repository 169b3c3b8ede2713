//! Closed meromorphic 1-forms `Θ = ω / D`: restriction models on the
//! vertical line and preparation into `(Σ P_i dz_i + P dw) / Q` with
//! `w`-polynomial data.

use num_traits::Zero;

use crate::change::CoordinateChange;
use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::forms::{exterior_d, pullback, OneForm};
use crate::levinson::levinson_prepare;
use crate::poly::PolyInW;
use crate::series::{identity_images, MultiIndex, Series};

/// Normal shape of `Θ|_L`, the restriction to `z = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RestrictionModel {
    /// `w^k dw`, `k ≥ 0`; also used for `k < −1` when the residue vanishes.
    Power { k: i64 },
    /// `λ dw / w`.
    Log { lambda: Coeff },
    /// `λ dw / (w^m (1 − w))` with `m ≥ 2`.
    Polar { m: u32, lambda: Coeff },
}

impl RestrictionModel {
    pub fn order(&self) -> i64 {
        match self {
            RestrictionModel::Power { k } => *k,
            RestrictionModel::Log { .. } => -1,
            RestrictionModel::Polar { m, .. } => -(*m as i64),
        }
    }

    pub fn residue(&self) -> Option<Coeff> {
        match self {
            RestrictionModel::Power { k } if *k < 0 => Some(Coeff::zero()),
            RestrictionModel::Power { .. } => None,
            RestrictionModel::Log { lambda } | RestrictionModel::Polar { lambda, .. } => Some(lambda.clone()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RestrictionModel::Power { .. } => "power",
            RestrictionModel::Log { .. } => "log",
            RestrictionModel::Polar { .. } => "polar",
        }
    }
}

/// `Θ = (Σ zcoeffs dz_i + wcoeff dw) / denominator`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeroOneForm {
    pub numer: OneForm,
    pub denominator: Series,
}

impl MeroOneForm {
    pub fn new(numer: OneForm, denominator: Series) -> Result<Self> {
        numer.wcoeff.same_shape(&denominator)?;
        if denominator.is_zero() {
            return Err(Error::Hypothesis("denominator vanishes identically".into()));
        }
        Ok(MeroOneForm { numer, denominator })
    }

    pub fn holomorphic(numer: OneForm) -> Self {
        let d = Series::one(numer.nvars(), numer.trunc());
        MeroOneForm { numer, denominator: d }
    }

    /// `D·dω − dD∧ω ≡ 0`, the cleared closedness condition.
    pub fn is_closed(&self) -> bool {
        let d_om = exterior_d(&self.numer);
        let dd = OneForm::exact(&self.denominator);
        let wedge = crate::forms::wedge(&dd, &self.numer).expect("same shape");
        let t = d_om.trunc();
        let mut acc = crate::forms::TwoForm::zero(self.numer.nvars(), t);
        for (&(i, j), c) in d_om.components() {
            acc.add(i, j, &(&c.with_trunc(self.denominator.trunc()) * &self.denominator));
        }
        for (&(i, j), c) in wedge.components() {
            acc.add(i, j, &-c);
        }
        acc.is_zero()
    }
}

/// The restriction `r(w)` as `w^k ρ(w)` with `ρ(0) ≠ 0`.
fn laurent_restriction(th: &MeroOneForm) -> Result<(i64, Series)> {
    let b = th.numer.wcoeff.restrict_to_w_axis();
    let d = th.denominator.restrict_to_w_axis();
    let (Some(ob), Some(od)) = (b.w_order(), d.w_order()) else {
        return Err(Error::Hypothesis("the vertical line is invariant (Θ|_L vanishes)".into()));
    };
    let n = b.nvars();
    let last = n - 1;
    let shift = |s: &Series, o: usize| {
        let mut r = Series::zero(n, s.trunc());
        for (e, c) in s.terms() {
            r.add_term(e.with(last, e.w_exp() - o as u32), c);
        }
        r
    };
    let rho = &shift(&b, ob) * &shift(&d, od).invert_unit()?;
    Ok((ob as i64 - od as i64, rho))
}

pub fn classify_restriction(th: &MeroOneForm) -> Result<RestrictionModel> {
    let (k, rho) = laurent_restriction(th)?;
    Ok(model_for(k, &rho))
}

fn model_for(k: i64, rho: &Series) -> RestrictionModel {
    let n = rho.nvars();
    match k {
        k if k >= 0 => RestrictionModel::Power { k },
        -1 => RestrictionModel::Log { lambda: rho.constant_term() },
        k => {
            let m = (-k) as u32;
            let lambda = rho.coeff(&MultiIndex::unit(n, n - 1).pow_exp(m - 1));
            if lambda.is_zero() {
                RestrictionModel::Power { k }
            } else {
                RestrictionModel::Polar { m, lambda }
            }
        }
    }
}

/// One-variable change `w := φ₀(w)` bringing `Θ|_L` onto its model.
pub fn normalize_restriction(th: &MeroOneForm) -> Result<(RestrictionModel, Series)> {
    let (k, rho) = laurent_restriction(th)?;
    let model = model_for(k, &rho);
    let n = rho.nvars();
    let t = rho.trunc();
    let w = Series::w(n, t);
    let last = n - 1;
    if k >= 0 {
        // primitive (k+1)·R = c w^{k+1} h(w), then a (k+1)-th root
        let mut h = Series::zero(n, t);
        for (e, c) in rho.terms() {
            let j = e.w_exp() as i64;
            h.add_term(e.clone(), &(c * &Coeff::frac(k + 1, k + 1 + j)));
        }
        let c = h.constant_term();
        let h = h.scale(&c.inv()?);
        let phi = vertical_root_series(&c, &h, k + 1)?;
        return Ok((model, phi));
    }
    let m = (-k) as u32;
    let rhs = match &model {
        RestrictionModel::Polar { lambda, .. } => {
            let geo = (&Series::one(n, t) - &w).invert_unit()?;
            geo.scale(lambda)
        }
        RestrictionModel::Log { lambda } => Series::constant(n, t, lambda.clone()),
        RestrictionModel::Power { .. } => Series::one(n, t),
    };
    let rho0 = rho.constant_term();
    let target0 = rhs.constant_term();
    let u0 = if m == 1 {
        Coeff::from_int(1)
    } else {
        (&rho0 / &target0).nth_root(m - 1)?
    };
    let mut u = Series::constant(n, t, u0.clone());
    let lin = &rho0 * &u0.inv()?.pow(m);
    for p in 1..t as u32 {
        if p + 1 == m {
            continue;
        }
        let diff = &polar_lhs(&rho, &u, m)? - &rhs;
        let e = MultiIndex::unit(n, last).pow_exp(p);
        let dp = diff.coeff(&e);
        if dp.is_zero() {
            continue;
        }
        let a = &lin * &Coeff::from_int(1 - m as i64 + p as i64);
        u.add_term(e, &(-&(&dp / &a)));
    }
    let phi = &w * &u;
    Ok((model, phi))
}

/// `w^m r(wu)(wu)' = u^{−m} ρ(wu) (wu)'`.
fn polar_lhs(rho: &Series, u: &Series, m: u32) -> Result<Series> {
    let n = rho.nvars();
    let t = rho.trunc();
    let w = Series::w(n, t);
    let phi = &w * u;
    let mut images = identity_images(n, t);
    images[n - 1] = phi.clone();
    let inv = u.invert_unit()?;
    Ok(&(&inv.pow(m) * &rho.substitute(&images)?) * &phi.partial(n - 1))
}

fn vertical_root_series(c: &Coeff, h: &Series, l: i64) -> Result<Series> {
    let n = h.nvars();
    let w = Series::w(n, h.trunc());
    let root = c.nth_root(l as u32)?;
    let hp = h.unit_pow(&num_rational::BigRational::new(1.into(), l.into()))?;
    (&w * &hp).scale(&root).compositional_inverse_1d(n - 1)
}

/// Pulled-back restriction minus the model, in cleared form; zero when `φ₀`
/// normalizes `Θ|_L`.
pub fn restriction_residual(th: &MeroOneForm, model: &RestrictionModel, phi0: &Series) -> Result<Series> {
    let (k, rho) = laurent_restriction(th)?;
    let n = rho.nvars();
    let t = rho.trunc();
    let w = Series::w(n, t);
    if k >= 0 {
        let mut images = identity_images(n, t);
        images[n - 1] = phi0.clone();
        let r = &w.pow(k as u32) * &rho;
        let lhs = &r.substitute(&images)? * &phi0.partial(n - 1);
        return Ok((&lhs - &w.pow(k as u32)).truncate_to(t - 1));
    }
    let m = (-k) as u32;
    let last = n - 1;
    let mut u = Series::zero(n, t);
    for (e, c) in phi0.terms() {
        u.add_term(e.with(last, e.w_exp() - 1), c);
    }
    let rhs = match model {
        RestrictionModel::Polar { lambda, .. } => (&Series::one(n, t) - &w).invert_unit()?.scale(lambda),
        RestrictionModel::Log { lambda } => Series::constant(n, t, lambda.clone()),
        RestrictionModel::Power { .. } => Series::one(n, t),
    };
    Ok((&polar_lhs(&rho, &u, m)? - &rhs).truncate_to(t - 1))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreparedClosedForm {
    pub model: RestrictionModel,
    pub change: CoordinateChange,
    pub zpolys: Vec<PolyInW>,
    pub p: PolyInW,
    pub q: PolyInW,
    /// `Φ*ω · Q − (D∘Φ) · Ω` with `Ω = Σ P_i dz_i + P dw`, exact through
    /// degree `N − 1`.
    pub residual: OneForm,
}

impl PreparedClosedForm {
    pub fn numerator(&self) -> OneForm {
        let t = self.change.trunc();
        OneForm::new(self.zpolys.iter().map(|p| p.to_series().with_trunc(t)).collect(), self.p.to_series().with_trunc(t))
            .expect("well-shaped")
    }
}

pub fn closed_residual(th: &MeroOneForm, change: &CoordinateChange, omega: &OneForm, q: &Series) -> Result<OneForm> {
    let t = th.numer.trunc();
    let pb = pullback(&th.numer, change)?;
    let dphi = change.apply(&th.denominator)?;
    let q = q.with_trunc(t);
    let r = OneForm::from_coeffs(
        pb.coeffs().iter().zip(omega.coeffs()).map(|(a, b)| &(a * &q) - &(&dphi * &b.with_trunc(t))).collect(),
    )?;
    Ok(r.truncate_to(t - 1))
}

fn poly_of(s: &Series, top: usize) -> Result<PolyInW> {
    let s = s.truncate_to(top);
    PolyInW::from_series(&s, s.w_degree().unwrap_or(0) as usize)
}

pub fn closed_form_prepare(th: &MeroOneForm) -> Result<PreparedClosedForm> {
    if !th.is_closed() {
        return Err(Error::NotClosed { witness: "D·dω − dD∧ω".into() });
    }
    let model = classify_restriction(th)?;
    let nv = th.numer.nvars();
    let t = th.numer.trunc();
    let top = t - 1;
    let d0 = th.denominator.constant_term();
    let (change, omega, q) = if !d0.is_zero() {
        // holomorphic and closed, hence exact: Θ = dF
        let theta = th.numer.scale_by(&th.denominator.invert_unit()?);
        let f = crate::forms::integrate_closed(&theta.coeffs())?;
        let k = model.order();
        let lp = levinson_prepare(&f.scale(&Coeff::from_int(k + 1)))?;
        let wt = lp.polynomial().to_series();
        let s = Coeff::frac(1, k + 1);
        let omega = OneForm::exact(&wt).map(|c| c.scale(&s));
        (lp.change, omega, Series::one(nv, t))
    } else if let RestrictionModel::Log { lambda: res } = &model {
        let s = th.denominator.w_order().ok_or_else(|| Error::Hypothesis("denominator vanishes on the w-axis".into()))?;
        let lambda = res / &Coeff::from_int(s as i64);
        // η = Θ − λ dD/D must be holomorphic: ω − λ dD ≡ 0 mod D
        let dd = OneForm::exact(&th.denominator);
        let eta_num: Vec<Series> =
            th.numer.coeffs().iter().zip(dd.coeffs()).map(|(a, b)| a - &b.scale(&lambda)).collect();
        let mut eta = Vec::with_capacity(nv);
        for c in &eta_num {
            let (qt, r) = crate::weierstrass::weierstrass_divide(c, &th.denominator)?;
            if !r.to_series().truncate_to(top).is_zero() {
                return Err(Error::Unsupported("closed form with non-logarithmic polar part".into()));
            }
            eta.push(qt);
        }
        let f = crate::forms::integrate_closed(&eta)?;
        let e = &th.denominator * &f.scale(&lambda.inv()?).exp()?;
        let lp = levinson_prepare(&e)?;
        let wt = lp.polynomial().to_series();
        let omega = OneForm::exact(&wt).map(|c| c.scale(&lambda));
        (lp.change, omega, wt)
    } else {
        return Err(Error::Unsupported(format!(
            "preparation for restriction model {} of order {}",
            model.name(),
            model.order()
        )));
    };
    let zpolys = omega.zcoeffs.iter().map(|c| poly_of(c, top)).collect::<Result<Vec<_>>>()?;
    let p = poly_of(&omega.wcoeff, top)?;
    let qp = poly_of(&q, top)?;
    if (p.degree() as i64) - (qp.degree() as i64) < -1 {
        return Err(Error::Verification("numerator/denominator degree bound violated".into()));
    }
    let residual = closed_residual(th, &change, &omega, &q)?;
    if !residual.is_zero() {
        return Err(Error::Verification("prepared closed form does not match the input".into()));
    }
    Ok(PreparedClosedForm { model, change, zpolys, p, q: qp, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(t: usize, terms: &[(&[u32], i64, i64)]) -> Series {
        Series::from_fracs(2, t, terms)
    }

    #[test]
    fn power_model_identity() {
        let t = 6;
        let th = MeroOneForm::holomorphic(OneForm::new(vec![Series::zero(2, t)], Series::w(2, t)).unwrap());
        let pc = closed_form_prepare(&th).unwrap();
        assert_eq!(pc.model, RestrictionModel::Power { k: 1 });
        assert!(pc.change.is_identity());
    }

    #[test]
    fn log_models() {
        let t = 6;
        let th = MeroOneForm::new(OneForm::new(vec![Series::zero(2, t)], Series::one(2, t)).unwrap(), Series::w(2, t)).unwrap();
        let pc = closed_form_prepare(&th).unwrap();
        assert_eq!(pc.model, RestrictionModel::Log { lambda: Coeff::from_int(1) });
        let d = s(t, &[(&[0, 1], 1, 1), (&[1, 0], 1, 1)]);
        let th = MeroOneForm::new(OneForm::exact(&d), d.clone()).unwrap();
        let pc = closed_form_prepare(&th).unwrap();
        assert_eq!(pc.model, RestrictionModel::Log { lambda: Coeff::from_int(1) });
        assert_eq!(pc.q.to_series(), d.truncate_to(t - 1));
        assert!(pc.residual.is_zero());
    }

    #[test]
    fn restriction_normalization_all_models() {
        let t = 8;
        let zero = Series::zero(2, t);
        let cases = [
            (s(t, &[(&[0, 1], 4, 1), (&[0, 2], 1, 1)]), Series::one(2, t)),
            (s(t, &[(&[0, 0], 2, 1), (&[0, 1], 1, 1)]), s(t, &[(&[0, 1], 1, 1), (&[0, 3], 3, 1)])),
            (s(t, &[(&[0, 0], 1, 1), (&[0, 1], 1, 1), (&[0, 2], 4, 1)]), s(t, &[(&[0, 3], 1, 1)])),
            (s(t, &[(&[0, 0], 4, 1), (&[0, 2], 1, 1)]), s(t, &[(&[0, 2], 1, 1), (&[0, 3], 1, 1)])),
        ];
        for (b, d) in cases {
            let th = MeroOneForm::new(OneForm::new(vec![zero.clone()], b).unwrap(), d).unwrap();
            let (model, phi0) = normalize_restriction(&th).unwrap();
            assert!(restriction_residual(&th, &model, &phi0).unwrap().is_zero(), "{:?}", model);
        }
    }
}
