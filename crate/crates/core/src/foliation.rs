//! Preparation of integrable 1-forms: a `w`-change and a unit factor make
//! every coefficient a polynomial in `w` of degree at most `k`, with a
//! unitary `dw` coefficient.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::change::CoordinateChange;
use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::forms::{
    describe_monomial, exterior_d, form_name, integrability_check, integrate_closed, pullback, wedge, Integrability,
    OneForm, TwoForm,
};
use crate::linalg::{LinearSystem, Solution};
use crate::poly::PolyInW;
use crate::series::{identity_images, MultiIndex, Series};
use crate::weierstrass::weierstrass_prepare;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreparedForm {
    pub k: usize,
    /// `P_1, …, P_n`, each of `w`-degree at most `k`.
    pub polys: Vec<PolyInW>,
    pub q: PolyInW,
    pub change: CoordinateChange,
    /// `Φ⁻¹*Θ̃ ∧ Θ`, exact through degree `N − 1`.
    pub residual: TwoForm,
}

impl PreparedForm {
    /// `Θ̃ = Σ P_i dz_i + Q dw` at the truncation of the change.
    pub fn form(&self) -> OneForm {
        let t = self.change.trunc();
        let z = self.polys.iter().map(|p| p.to_series().with_trunc(t)).collect();
        OneForm::new(z, self.q.to_series().with_trunc(t)).expect("well-shaped")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedNormalForm {
    pub f0: Series,
    pub f1: Series,
    pub theta0: Vec<Series>,
    pub theta1: Vec<Series>,
    pub change: CoordinateChange,
    /// `df₀∧df₁`.
    pub tangency: TwoForm,
    pub residual: TwoForm,
}

impl ClosedNormalForm {
    /// `df₀ + w df₁ + w dw`.
    pub fn form(&self) -> OneForm {
        let w = Series::w(self.f0.nvars(), self.f0.trunc());
        let df0 = OneForm::exact(&self.f0);
        let wdf1 = OneForm::exact(&self.f1).scale_by(&w);
        let mut s = &df0 + &wdf1;
        s.wcoeff = &s.wcoeff + &w;
        s
    }
}

fn not_integrable(t: Integrability, nvars: usize) -> Result<()> {
    if let Integrability::Fail { indices: (i, j, k), monomial } = t {
        return Err(Error::NotIntegrable {
            witness: format!(
                "{} in {}∧{}∧{}",
                describe_monomial(&monomial),
                form_name(nvars, i),
                form_name(nvars, j),
                form_name(nvars, k)
            ),
        });
    }
    Ok(())
}

/// `(h·A_1, …, h·A_n, Q)` where `Φ*Θ = Σ A_i dz_i + G dw` and `G = h⁻¹·Q`.
fn transformed(theta: &OneForm, phi: &Series) -> Result<(Vec<Series>, PolyInW)> {
    let n = theta.n();
    let mut images = identity_images(n + 1, theta.trunc());
    images[n] = phi.clone();
    let g = theta.wcoeff.substitute(&images)?;
    let big_g = &g * &phi.partial(n);
    let wf = weierstrass_prepare(&big_g)?;
    let h = wf.unit.invert_unit()?;
    let ps = (0..n)
        .map(|i| {
            let a = &theta.zcoeffs[i].substitute(&images)? + &(&g * &phi.partial(i));
            Ok(&a * &h)
        })
        .collect::<Result<_>>()?;
    Ok((ps, wf.poly))
}

/// Certificate `Φ⁻¹*Θ̃ ∧ Θ` through degree `N − 1`.
pub fn proportionality_residual(theta: &OneForm, prepared: &OneForm, change: &CoordinateChange) -> Result<TwoForm> {
    let t = theta.trunc();
    let back = pullback(&prepared.map(|c| c.with_trunc(t)), &change.inverse()?)?;
    let r = wedge(&back, theta)?;
    let mut out = TwoForm::zero(r.nvars(), t.saturating_sub(1));
    for (&(i, j), c) in r.components() {
        out.add(i, j, c);
    }
    Ok(out)
}

/// Coefficients the prepared form must kill: `w^{>k}` terms of every
/// coefficient and `Q_k − 1`, through degree `N − 1`.
fn band_defects(ps: &[Series], q: &Series, k: usize, top: usize) -> Vec<(usize, MultiIndex, Coeff)> {
    let n = ps.len();
    let mut out = Vec::new();
    for (i, s) in ps.iter().chain(std::iter::once(q)).enumerate() {
        for (e, c) in s.terms() {
            if e.degree() <= top && e.get(n) as usize > k {
                out.push((i, e.clone(), c.clone()));
            }
        }
    }
    for d in 0..=top.saturating_sub(k) {
        for beta in MultiIndex::all_of_degree(n, d) {
            let mut e = beta.0.clone();
            e.push(k as u32);
            let e = MultiIndex(e);
            let c = &q.coeff(&e) - &Coeff::from_int(i64::from(d == 0));
            if !c.is_zero() {
                out.push((n, e, c));
            }
        }
    }
    out
}

/// Removes what the slice equations leave in the top degrees. The unit
/// factor is treated as unknown next to the `w`-change.
fn top_band(theta: &OneForm, mut phi: Series, k: usize) -> Result<(Series, Vec<Series>, Series)> {
    let n = theta.n();
    let nv = n + 1;
    let t = theta.trunc();
    let top = t.saturating_sub(1);
    let mut images = identity_images(nv, t);
    images[n] = phi.clone();
    let g = theta.wcoeff.substitute(&images)?;
    let big_g = &g * &phi.partial(n);
    let mut u = weierstrass_prepare(&big_g)?.unit.invert_unit()?;
    for _ in 0..=t {
        images[n] = phi.clone();
        let g = theta.wcoeff.substitute(&images)?;
        let a: Vec<Series> = (0..n)
            .map(|i| Ok(&theta.zcoeffs[i].substitute(&images)? + &(&g * &phi.partial(i))))
            .collect::<Result<_>>()?;
        let big_g = &g * &phi.partial(n);
        let ps: Vec<Series> = a.iter().map(|s| s * &u).collect();
        let q = &big_g * &u;
        let defects = band_defects(&ps, &q, k, top);
        let Some(low) = defects.iter().map(|(_, e, _)| e.degree()).min() else {
            return Ok((phi, ps, q));
        };
        let gw = theta.wcoeff.partial(n).substitute(&images)?;
        let aw: Vec<Series> = (0..n).map(|i| theta.zcoeffs[i].partial(n).substitute(&images)).collect::<Result<_>>()?;
        let mut cols: Vec<(Vec<Series>, Series)> = Vec::new();
        let mut unknowns: Vec<(bool, MultiIndex)> = Vec::new();
        for d in (2..=t).rev() {
            for e in MultiIndex::all_of_degree(nv, d) {
                if e.get(n) == 0 {
                    continue;
                }
                let b = Series::monomial(nv, t, e.clone(), Coeff::one());
                let dps = (0..n)
                    .map(|i| &(&(&(&aw[i] + &(&gw * &phi.partial(i))) * &b) + &(&g * &b.partial(i))) * &u)
                    .collect();
                let dq = &(&(&(&gw * &phi.partial(n)) * &b) + &(&g * &b.partial(n))) * &u;
                cols.push((dps, dq));
                unknowns.push((true, e));
            }
        }
        for d in (1..=top).rev() {
            for e in MultiIndex::all_of_degree(nv, d) {
                let b = Series::monomial(nv, t, e.clone(), Coeff::one());
                cols.push((ps.iter().map(|p| p * &b).collect(), &q * &b));
                unknowns.push((false, e));
            }
        }
        let mut rows: BTreeMap<(usize, MultiIndex), usize> = BTreeMap::new();
        for d in &defects {
            let next = rows.len();
            rows.entry((d.0, d.1.clone())).or_insert(next);
        }
        for (dps, dq) in &cols {
            for (i, s) in dps.iter().chain(std::iter::once(dq)).enumerate() {
                for (e, _) in s.terms() {
                    let hit = e.degree() <= top && (e.get(n) as usize > k || (i == n && e.get(n) as usize == k));
                    if hit {
                        let next = rows.len();
                        rows.entry((i, e.clone())).or_insert(next);
                    }
                }
            }
        }
        let mut mat: Vec<Vec<(usize, Coeff)>> = vec![Vec::new(); rows.len()];
        for (ci, (dps, dq)) in cols.iter().enumerate() {
            for (i, s) in dps.iter().chain(std::iter::once(dq)).enumerate() {
                for (e, c) in s.terms() {
                    if let Some(&r) = rows.get(&(i, e.clone())) {
                        mat[r].push((ci, c.clone()));
                    }
                }
            }
        }
        let mut rhs = vec![Coeff::from_int(0); rows.len()];
        for (i, e, c) in &defects {
            rhs[rows[&(*i, e.clone())]] = -c;
        }
        let mut sys = LinearSystem::new(cols.len());
        for (r, b) in mat.iter().zip(rhs) {
            sys.push_sparse(r, b);
        }
        let sol = match sys.solve() {
            Solution::Solved { solution, .. } => solution,
            Solution::Inconsistent { .. } => {
                return Err(Error::SolverFailure { degree: low, context: "top-degree w-reduction".into() })
            }
        };
        let mut dphi = Series::zero(nv, t);
        let mut v = Series::zero(nv, t);
        for ((is_phi, e), c) in unknowns.iter().zip(&sol) {
            if *is_phi {
                dphi.add_term(e.clone(), c);
            } else {
                v.add_term(e.clone(), c);
            }
        }
        phi = &phi + &dphi;
        u = &u + &(&u * &v);
    }
    Err(Error::SolverFailure { degree: t, context: "top-degree w-reduction does not settle".into() })
}

pub fn prepare_foliation(theta: &OneForm) -> Result<PreparedForm> {
    let n = theta.n();
    let nv = n + 1;
    let t = theta.trunc();
    if n == 0 {
        return Err(Error::Shape("1-form needs at least one z-variable".into()));
    }
    not_integrable(integrability_check(theta), nv)?;
    let k = theta
        .wcoeff
        .w_order()
        .ok_or_else(|| Error::Hypothesis("dw-coefficient vanishes on the w-axis".into()))?;
    if k == 0 {
        return Err(Error::Hypothesis("dw-coefficient does not vanish at the origin (k = 0)".into()));
    }
    let mut phi = Series::w(nv, t);
    let top = t.saturating_sub(1);
    // the N-jet fixes the slice equations only through degree N − k
    let reach = t.saturating_sub(k);
    let mut m = 0;
    while m + k < reach {
        let (ps, _) = transformed(theta, &phi)?;
        // unknown c_{α,j} for z^α w^j with |α| = m + 1, j ≥ 1; one equation
        // (β_i + 1) c_{β+e_i, j} = −[P_i]_{z^β w^{k+j}} per slot
        let mut index: BTreeMap<MultiIndex, usize> = BTreeMap::new();
        let mut rows: Vec<(usize, Coeff, Coeff)> = Vec::new();
        for (i, p) in ps.iter().enumerate() {
            for beta in MultiIndex::all_of_degree(n, m) {
                for j in 1..=(reach - m - k) as u32 {
                    let mut a = beta.0.clone();
                    a[i] += 1;
                    a.push(j);
                    let mut b = beta.0.clone();
                    b.push(k as u32 + j);
                    let next = index.len();
                    let col = *index.entry(MultiIndex(a)).or_insert(next);
                    rows.push((col, Coeff::from_int(beta.get(i) as i64 + 1), -&p.coeff(&MultiIndex(b))));
                }
            }
        }
        let mut sys = LinearSystem::new(index.len());
        for (col, a, b) in &rows {
            sys.push_sparse(&[(*col, a.clone())], b.clone());
        }
        let sol = match sys.solve() {
            Solution::Solved { solution, .. } => solution,
            Solution::Inconsistent { .. } => break,
        };
        let mut delta = Series::zero(nv, t);
        for (alpha, col) in &index {
            delta.add_term(alpha.clone(), &sol[*col]);
        }
        phi = &phi + &delta;
        m += 1;
    }
    let (phi, ps, q) = top_band(theta, phi, k)?;
    let polys = ps
        .iter()
        .map(|p| {
            PolyInW::from_series(&p.truncate_to(top), k).map_err(|_| Error::SolverFailure {
                degree: m,
                context: "dz-coefficient keeps w-degree above k".into(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let q = PolyInW::from_series(&q.truncate_to(top), k)
        .ok()
        .filter(|q| q.degree() == k && q.is_unitary())
        .ok_or_else(|| Error::SolverFailure { degree: m, context: "dw-coefficient is not unitary of degree k".into() })?;
    let change = CoordinateChange::w_only(phi)?;
    let mut out = PreparedForm { k, polys, q, change, residual: TwoForm::zero(nv, top) };
    out.residual = proportionality_residual(theta, &out.form(), &out.change)?;
    if !out.residual.is_zero() {
        return Err(Error::Verification("prepared form is not proportional to the input".into()));
    }
    Ok(out)
}

/// Linear part tangent to the radial field: `Σ ℓ_ij x_i x_j ≡ 0`.
fn linear_part_is_radial(theta: &OneForm) -> bool {
    let nv = theta.nvars();
    let t = theta.trunc();
    let mut q = Series::zero(nv, t);
    for i in 0..nv {
        q = &q + &(&theta.coeff(i).homogeneous(1) * &Series::var(nv, t, i));
    }
    q.is_zero()
}

pub fn prepare_k1(theta: &OneForm) -> Result<ClosedNormalForm> {
    let n = theta.n();
    let nv = n + 1;
    let t = theta.trunc();
    if linear_part_is_radial(theta) {
        return Err(Error::Hypothesis("linear part is tangent to the radial vector field".into()));
    }
    if theta.wcoeff.w_order() != Some(1) {
        return Err(Error::Hypothesis("tangency divisor is not a smooth graph over z (k ≠ 1)".into()));
    }
    let pf = prepare_foliation(theta)?;
    let top = t - 1;
    // translate w := w − q0(z) so that Q becomes w
    let q0 = pf.q.coeffs()[0].with_trunc(t);
    let mut images = identity_images(nv, t);
    images[n] = &Series::w(nv, t) - &q0;
    let shift = CoordinateChange::w_only(images[n].clone())?;
    let change = pf.change.compose(&shift)?;
    let mut theta0 = Vec::with_capacity(n);
    let mut theta1 = Vec::with_capacity(n);
    for (i, p) in pf.polys.iter().enumerate() {
        let pi = p.to_series().with_trunc(t).substitute(&images)?;
        let pi = &pi - &(&Series::w(nv, t) * &q0.partial(i));
        theta0.push(pi.w_coeff(0).truncate_to(top));
        theta1.push(pi.w_coeff(1).truncate_to(top));
    }
    let (f0, f1) = (integrate_closed(&pad(&theta0, t))?, integrate_closed(&pad(&theta1, t))?);
    let t01 = wedge(&z_form(&theta0, nv, top), &z_form(&theta1, nv, top))?;
    if !t01.is_zero() {
        return Err(Error::Verification("θ₀∧θ₁ does not vanish".into()));
    }
    let tangency = wedge(&OneForm::exact(&f0), &OneForm::exact(&f1))?;
    let tangency = {
        let mut out = TwoForm::zero(nv, top);
        for (&(i, j), c) in tangency.components() {
            out.add(i, j, c);
        }
        out
    };
    if !tangency.is_zero() {
        return Err(Error::Verification("df₀∧df₁ does not vanish".into()));
    }
    let mut out = ClosedNormalForm { f0, f1, theta0, theta1, change, tangency, residual: TwoForm::zero(nv, top) };
    out.residual = proportionality_residual(theta, &out.form(), &out.change)?;
    if !out.residual.is_zero() {
        return Err(Error::Verification("closed normal form is not proportional to the input".into()));
    }
    Ok(out)
}

fn pad(v: &[Series], t: usize) -> Vec<Series> {
    v.iter().map(|s| s.with_trunc(t)).collect()
}

fn z_form(v: &[Series], nv: usize, t: usize) -> OneForm {
    OneForm::new(v.to_vec(), Series::zero(nv, t)).expect("well-shaped")
}

pub fn closedness(theta: &[Series]) -> TwoForm {
    let nv = theta[0].nvars();
    let t = theta[0].trunc();
    exterior_d(&z_form(theta, nv, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(nv: usize, t: usize, terms: &[(&[u32], i64, i64)]) -> Series {
        Series::from_fracs(nv, t, terms)
    }

    #[test]
    fn already_prepared_is_fixed() {
        let t = 6;
        let th = OneForm::new(vec![Series::var(2, t, 0)], Series::w(2, t)).unwrap();
        let pf = prepare_foliation(&th).unwrap();
        assert!(pf.change.is_identity());
        assert_eq!(pf.polys[0].to_series(), Series::var(2, t - 1, 0));
        assert_eq!(pf.q.to_series(), Series::w(2, t - 1));
    }

    #[test]
    fn reduces_w_degree() {
        let t = 8;
        let th = OneForm::new(vec![Series::var(2, t, 0)], s(2, t, &[(&[0, 1], 1, 1), (&[1, 2], 1, 1)])).unwrap();
        let pf = prepare_foliation(&th).unwrap();
        assert!(pf.residual.is_zero());
        assert!(pf.q.is_unitary() && pf.q.degree() == 1);
    }

    #[test]
    fn k1_examples() {
        let t = 6;
        let th = OneForm::new(vec![Series::var(2, t, 0)], Series::w(2, t)).unwrap();
        let cf = prepare_k1(&th).unwrap();
        assert_eq!(cf.f0, s(2, t, &[(&[2, 0], 1, 2)]));
        assert!(cf.f1.is_zero());

        let f = s(3, t, &[(&[1, 1, 0], 1, 1)]);
        let mut th = OneForm::exact(&f);
        th.wcoeff = Series::w(3, t);
        let cf = prepare_k1(&th).unwrap();
        assert_eq!(cf.f0, f);
        assert!(cf.f1.is_zero());

        let t = 8;
        let th = OneForm::new(vec![s(2, t, &[(&[0, 0], 1, 1), (&[0, 1], 1, 1)])], s(2, t, &[(&[0, 1], 1, 1), (&[1, 0], 1, 1)])).unwrap();
        let cf = prepare_k1(&th).unwrap();
        assert!(cf.residual.is_zero() && cf.tangency.is_zero());
    }

    #[test]
    fn radial_is_rejected() {
        let t = 5;
        let rad = OneForm::new(vec![Series::w(2, t)], -&Series::var(2, t, 0)).unwrap();
        assert!(matches!(prepare_k1(&rad), Err(Error::Hypothesis(_))));
    }
}
