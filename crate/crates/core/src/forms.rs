//! Differential forms with truncated-series coefficients in the variables
//! `z_1, …, z_n, w`. Index `n` always refers to `w`.

use std::collections::BTreeMap;

use crate::change::CoordinateChange;
use crate::error::{Error, Result};
use crate::series::{MultiIndex, Series};

/// `Σ zcoeffs[i] dz_i + wcoeff dw`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneForm {
    pub zcoeffs: Vec<Series>,
    pub wcoeff: Series,
}

impl OneForm {
    pub fn new(zcoeffs: Vec<Series>, wcoeff: Series) -> Result<Self> {
        let n = wcoeff.nvars();
        if zcoeffs.len() + 1 != n {
            return Err(Error::Shape(format!("{} dz-coefficients for {} variables", zcoeffs.len(), n)));
        }
        for c in &zcoeffs {
            c.same_shape(&wcoeff)?;
        }
        Ok(OneForm { zcoeffs, wcoeff })
    }

    /// From the full coefficient list, `dw` last.
    pub fn from_coeffs(mut coeffs: Vec<Series>) -> Result<Self> {
        let w = coeffs.pop().ok_or_else(|| Error::Shape("empty 1-form".into()))?;
        OneForm::new(coeffs, w)
    }

    pub fn exact(f: &Series) -> Self {
        let n = f.nvars();
        OneForm::from_coeffs((0..n).map(|i| f.partial(i)).collect()).expect("well-shaped")
    }

    pub fn n(&self) -> usize {
        self.zcoeffs.len()
    }

    pub fn nvars(&self) -> usize {
        self.wcoeff.nvars()
    }

    pub fn trunc(&self) -> usize {
        self.wcoeff.trunc()
    }

    pub fn coeff(&self, i: usize) -> &Series {
        if i < self.n() {
            &self.zcoeffs[i]
        } else {
            &self.wcoeff
        }
    }

    pub fn coeffs(&self) -> Vec<Series> {
        let mut v = self.zcoeffs.clone();
        v.push(self.wcoeff.clone());
        v
    }

    pub fn map<F: Fn(&Series) -> Series>(&self, f: F) -> OneForm {
        OneForm { zcoeffs: self.zcoeffs.iter().map(&f).collect(), wcoeff: f(&self.wcoeff) }
    }

    pub fn scale_by(&self, h: &Series) -> OneForm {
        self.map(|c| c * h)
    }

    pub fn is_zero(&self) -> bool {
        self.wcoeff.is_zero() && self.zcoeffs.iter().all(Series::is_zero)
    }

    pub fn is_real(&self) -> bool {
        self.wcoeff.is_real() && self.zcoeffs.iter().all(Series::is_real)
    }

    pub fn truncate_to(&self, d: usize) -> OneForm {
        self.map(|c| c.truncate_to(d))
    }
}

impl std::ops::Add for &OneForm {
    type Output = OneForm;
    fn add(self, o: &OneForm) -> OneForm {
        OneForm::from_coeffs(self.coeffs().iter().zip(o.coeffs()).map(|(a, b)| a + &b).collect()).unwrap()
    }
}

/// Components `c_{ij}` for `i < j`; missing entries are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoForm {
    nvars: usize,
    trunc: usize,
    comps: BTreeMap<(usize, usize), Series>,
}

impl TwoForm {
    pub fn zero(nvars: usize, trunc: usize) -> Self {
        TwoForm { nvars, trunc, comps: BTreeMap::new() }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    /// Adds `c·dx_i∧dx_j`, for any ordered pair.
    pub fn add(&mut self, i: usize, j: usize, c: &Series) {
        if i == j || c.is_zero() {
            return;
        }
        let (key, c) = if i < j { ((i, j), c.clone()) } else { ((j, i), -c) };
        let c = c.truncate_to(self.trunc).with_trunc(self.trunc);
        let slot = self.comps.entry(key).or_insert_with(|| Series::zero(self.nvars, self.trunc));
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.comps.remove(&key);
        }
    }

    /// Coefficient of `dx_i∧dx_j`, antisymmetric in `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> Series {
        let zero = Series::zero(self.nvars, self.trunc);
        if i < j {
            self.comps.get(&(i, j)).cloned().unwrap_or(zero)
        } else if i > j {
            -&self.comps.get(&(j, i)).cloned().unwrap_or(zero)
        } else {
            zero
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = (&(usize, usize), &Series)> {
        self.comps.iter()
    }

    /// First nonzero coefficient, as `(i, j, monomial)`.
    pub fn witness(&self) -> Option<(usize, usize, MultiIndex)> {
        self.comps
            .iter()
            .flat_map(|(&(i, j), s)| s.terms().map(move |(e, _)| (e.clone(), i, j)))
            .min()
            .map(|(e, i, j)| (i, j, e))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreeForm {
    nvars: usize,
    trunc: usize,
    comps: BTreeMap<(usize, usize, usize), Series>,
}

impl ThreeForm {
    pub fn zero(nvars: usize, trunc: usize) -> Self {
        ThreeForm { nvars, trunc, comps: BTreeMap::new() }
    }

    /// Adds `c·dx_i∧dx_j∧dx_k`, sorting the indices with sign.
    pub fn add(&mut self, i: usize, j: usize, k: usize, c: &Series) {
        if i == j || j == k || i == k || c.is_zero() {
            return;
        }
        let mut idx = [i, j, k];
        let mut sign = false;
        for a in 0..3 {
            for b in 0..2 - a {
                if idx[b] > idx[b + 1] {
                    idx.swap(b, b + 1);
                    sign = !sign;
                }
            }
        }
        let c = if sign { -c } else { c.clone() };
        let c = c.truncate_to(self.trunc).with_trunc(self.trunc);
        let key = (idx[0], idx[1], idx[2]);
        let slot = self.comps.entry(key).or_insert_with(|| Series::zero(self.nvars, self.trunc));
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.comps.remove(&key);
        }
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Series {
        let mut probe = ThreeForm::zero(self.nvars, self.trunc);
        probe.add(i, j, k, &Series::one(self.nvars, self.trunc));
        match probe.comps.into_iter().next() {
            Some((key, s)) => {
                let c = self.comps.get(&key).cloned().unwrap_or_else(|| Series::zero(self.nvars, self.trunc));
                &c * &s
            }
            None => Series::zero(self.nvars, self.trunc),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn witness(&self) -> Option<(usize, usize, usize, MultiIndex)> {
        self.comps
            .iter()
            .flat_map(|(&(i, j, k), s)| s.terms().map(move |(e, _)| (e.clone(), i, j, k)))
            .min()
            .map(|(e, i, j, k)| (i, j, k, e))
    }
}

/// `dΘ`, exact through degree `N − 1` and stored at that truncation.
pub fn exterior_d(theta: &OneForm) -> TwoForm {
    let n = theta.nvars();
    let mut out = TwoForm::zero(n, theta.trunc().saturating_sub(1));
    for i in 0..n {
        for j in i + 1..n {
            let c = &theta.coeff(j).partial(i) - &theta.coeff(i).partial(j);
            out.add(i, j, &c);
        }
    }
    out
}

/// `d` of a 2-form.
pub fn exterior_d2(om: &TwoForm) -> ThreeForm {
    let n = om.nvars();
    let mut out = ThreeForm::zero(n, om.trunc().saturating_sub(1));
    for (&(i, j), c) in om.components() {
        for k in 0..n {
            out.add(k, i, j, &c.partial(k));
        }
    }
    out
}

fn at(s: &Series, t: usize) -> Series {
    s.truncate_to(t).with_trunc(t)
}

pub fn wedge(a: &OneForm, b: &OneForm) -> Result<TwoForm> {
    let n = a.nvars();
    if b.nvars() != n {
        return Err(Error::Shape("wedge of forms in different dimensions".into()));
    }
    let t = a.trunc().min(b.trunc());
    let mut out = TwoForm::zero(n, t);
    for i in 0..n {
        for j in i + 1..n {
            let c = &(&at(a.coeff(i), t) * &at(b.coeff(j), t)) - &(&at(a.coeff(j), t) * &at(b.coeff(i), t));
            out.add(i, j, &c);
        }
    }
    Ok(out)
}

pub fn wedge_2(a: &OneForm, b: &TwoForm) -> Result<ThreeForm> {
    let n = a.nvars();
    if b.nvars() != n {
        return Err(Error::Shape("wedge of forms in different dimensions".into()));
    }
    let t = a.trunc().min(b.trunc());
    let mut out = ThreeForm::zero(n, t);
    for i in 0..n {
        let ai = at(a.coeff(i), t);
        if ai.is_zero() {
            continue;
        }
        for (&(j, k), c) in b.components() {
            out.add(i, j, k, &(&ai * &at(c, t)));
        }
    }
    Ok(out)
}

/// `Φ*Θ = Σ_j (Σ_i a_i∘Φ · ∂_j Φ_i) dx_j`. Computed at the nominal
/// truncation `N`; the derivative factors make it exact through `N − 1`
/// only, unless `Φ` is linear.
pub fn pullback(theta: &OneForm, phi: &CoordinateChange) -> Result<OneForm> {
    let n = theta.nvars();
    if phi.nvars() != n || phi.trunc() != theta.trunc() {
        return Err(Error::Shape("pullback by change of different shape".into()));
    }
    if !phi.is_invertible() {
        return Err(Error::Hypothesis("coordinate change is not invertible".into()));
    }
    let composed: Vec<Series> = theta.coeffs().iter().map(|c| phi.apply(c)).collect::<Result<_>>()?;
    let jac = phi.jacobian();
    let out = (0..n)
        .map(|j| {
            let mut acc = Series::zero(n, theta.trunc());
            for i in 0..n {
                acc = &acc + &(&composed[i] * &jac[i][j]);
            }
            acc
        })
        .collect();
    OneForm::from_coeffs(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Integrability {
    /// Two variables: every 3-form vanishes, nothing to check.
    Vacuous,
    Pass,
    Fail { indices: (usize, usize, usize), monomial: MultiIndex },
}

/// `Θ∧dΘ ≡ 0` through degree `N − 1`.
pub fn integrability_check(theta: &OneForm) -> Integrability {
    if theta.nvars() < 3 {
        return Integrability::Vacuous;
    }
    let t3 = wedge_2(theta, &exterior_d(theta)).expect("same dimension");
    match t3.witness() {
        None => Integrability::Pass,
        Some((i, j, k, e)) => Integrability::Fail { indices: (i, j, k), monomial: e },
    }
}

pub fn describe_monomial(e: &MultiIndex) -> String {
    crate::series::monomial_name(e, false)
}

pub fn form_name(nvars: usize, i: usize) -> String {
    if i + 1 == nvars {
        "dw".into()
    } else if nvars == 2 {
        "dz".into()
    } else {
        format!("dz{}", i + 1)
    }
}

/// Primitive `f` with `df ≡ Σ θ_i dz_i` and `f(0) = 0`, where `θ_i` are the
/// coefficients of `dz_1..dz_m` (`m ≤ nvars`, the other variables absent).
pub fn integrate_closed(theta: &[Series]) -> Result<Series> {
    let first = theta.first().ok_or_else(|| Error::Shape("empty 1-form".into()))?;
    let nv = first.nvars();
    let t = first.trunc();
    let m = theta.len();
    let vars: Vec<usize> = (0..m).collect();
    for c in theta {
        c.same_shape(first)?;
        if !c.depends_only_on(&vars) {
            return Err(Error::Shape("closed form coefficient depends on extra variables".into()));
        }
    }
    for i in 0..m {
        for j in i + 1..m {
            let c = (&theta[j].partial(i) - &theta[i].partial(j)).truncate_to(t.saturating_sub(1));
            let first = c.terms().next().map(|(e, _)| e.clone());
            if let Some(e) = first {
                return Err(Error::NotClosed {
                    witness: format!("{} in {}∧{}", describe_monomial(&e), form_name(nv, i), form_name(nv, j)),
                });
            }
        }
    }
    // Homotopy formula: on a closed form, every degree-d component of θ_i
    // contributes z_i θ_i / (d + 1).
    let mut f = Series::zero(nv, t);
    for (i, c) in theta.iter().enumerate() {
        for (e, a) in c.terms() {
            let d = e.degree() as i64;
            f.add_term(e.with(i, e.get(i) + 1), &(a * &crate::coeff::Coeff::frac(1, d + 1)));
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::identity_images;

    #[test]
    fn d_examples() {
        let t = 5;
        let z = Series::var(2, t, 0);
        let w = Series::w(2, t);
        let th = OneForm::from_coeffs(vec![z.clone(), w.clone()]).unwrap();
        assert!(exterior_d(&th).is_zero());
        let dz = OneForm::from_coeffs(vec![Series::one(2, t), Series::zero(2, t)]).unwrap();
        assert!(wedge(&dz, &dz).unwrap().is_zero());
        let wdz = OneForm::from_coeffs(vec![w.clone(), Series::zero(2, t)]).unwrap();
        assert_eq!(exterior_d(&wdz).get(0, 1), -&Series::one(2, t - 1));
    }

    #[test]
    fn integrability_examples() {
        let t = 6;
        let f = Series::from_fracs(3, t, &[(&[1, 1, 1], 1, 1), (&[0, 2, 0], 3, 1), (&[2, 0, 3], -1, 2)]);
        assert_eq!(integrability_check(&OneForm::exact(&f)), Integrability::Pass);
        let w2 = Series::w(2, t);
        let th = OneForm::from_coeffs(vec![w2, Series::one(2, t)]).unwrap();
        assert_eq!(integrability_check(&th), Integrability::Vacuous);
        let bad = OneForm::from_coeffs(vec![Series::w(3, t), Series::var(3, t, 1), Series::one(3, t)]).unwrap();
        match integrability_check(&bad) {
            Integrability::Fail { indices, monomial } => {
                assert_eq!(indices, (0, 1, 2));
                assert_eq!(monomial, MultiIndex(vec![0, 1, 0]));
            }
            other => panic!("expected failure, got {:?}", other),
        }
    }

    #[test]
    fn pullback_translation() {
        let t = 6;
        let fz = Series::from_fracs(2, t, &[(&[1, 0], 1, 1), (&[3, 0], 2, 1)]);
        let dw = OneForm::from_coeffs(vec![Series::zero(2, t), Series::one(2, t)]).unwrap();
        let ch = CoordinateChange::w_only(&Series::w(2, t) + &fz).unwrap();
        let pb = pullback(&dw, &ch).unwrap();
        assert_eq!(pb, OneForm::from_coeffs(vec![fz.partial(0), Series::one(2, t)]).unwrap());
        let id = CoordinateChange::full(identity_images(2, t)).unwrap();
        let th = OneForm::from_coeffs(vec![fz.clone(), Series::w(2, t)]).unwrap();
        assert_eq!(pullback(&th, &id).unwrap(), th);
    }

    #[test]
    fn integrate_examples() {
        let t = 6;
        let dz = vec![Series::one(2, t)];
        assert_eq!(integrate_closed(&dz).unwrap(), Series::var(2, t, 0));
        let th = vec![Series::var(3, t, 1), Series::var(3, t, 0)];
        assert_eq!(integrate_closed(&th).unwrap(), Series::from_fracs(3, t, &[(&[1, 1, 0], 1, 1)]));
        let bad = vec![Series::var(3, t, 1), Series::zero(3, t)];
        assert!(matches!(integrate_closed(&bad), Err(Error::NotClosed { .. })));
    }
}
