//! Germs of planar vector fields `X = px ∂x + py ∂y` and their normal form
//! `(y + f(x))∂x + g(x)∂y`.

use num_traits::{One, Zero};

use crate::change::CoordinateChange;
use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::linalg::{self, LinearSystem, Solution};
use crate::series::{MultiIndex, Series};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField2 {
    pub px: Series,
    pub py: Series,
}

impl VectorField2 {
    pub fn new(px: Series, py: Series) -> Result<Self> {
        if px.nvars() != 2 {
            return Err(Error::Shape("planar vector field needs 2 variables".into()));
        }
        px.same_shape(&py)?;
        if !px.constant_term().is_zero() || !py.constant_term().is_zero() {
            return Err(Error::Hypothesis("vector field does not vanish at the origin".into()));
        }
        Ok(VectorField2 { px, py })
    }

    pub fn from_fracs(t: usize, px: &[(&[u32], i64, i64)], py: &[(&[u32], i64, i64)]) -> Result<Self> {
        VectorField2::new(Series::from_fracs(2, t, px), Series::from_fracs(2, t, py))
    }

    pub fn trunc(&self) -> usize {
        self.px.trunc()
    }

    pub fn components(&self) -> [&Series; 2] {
        [&self.px, &self.py]
    }

    /// Row `i` holds the linear part of component `i`.
    pub fn linear_matrix(&self) -> Vec<Vec<Coeff>> {
        self.components()
            .iter()
            .map(|s| vec![s.coeff_of(&[1, 0]), s.coeff_of(&[0, 1])])
            .collect()
    }

    /// `X(F) = px ∂x F + py ∂y F`.
    pub fn derive(&self, f: &Series) -> Series {
        &(&self.px * &f.partial(0)) + &(&self.py * &f.partial(1))
    }

    pub fn is_real(&self) -> bool {
        self.px.is_real() && self.py.is_real()
    }

    pub fn is_zero(&self) -> bool {
        self.px.is_zero() && self.py.is_zero()
    }

    pub fn truncate_to(&self, d: usize) -> VectorField2 {
        VectorField2 { px: self.px.truncate_to(d), py: self.py.truncate_to(d) }
    }

    pub fn map<F: Fn(&Series) -> Series>(&self, f: F) -> VectorField2 {
        VectorField2 { px: f(&self.px), py: f(&self.py) }
    }

    /// `X ∘ Φ`, componentwise substitution.
    pub fn compose(&self, phi: &CoordinateChange) -> Result<VectorField2> {
        Ok(VectorField2 { px: phi.apply(&self.px)?, py: phi.apply(&self.py)? })
    }

    pub fn linear(m: &[Vec<Coeff>], t: usize) -> VectorField2 {
        let comp = |row: &Vec<Coeff>| {
            Series::from_terms(2, t, [(vec![1, 0], row[0].clone()), (vec![0, 1], row[1].clone())])
        };
        VectorField2 { px: comp(&m[0]), py: comp(&m[1]) }
    }
}

impl std::ops::Sub for &VectorField2 {
    type Output = VectorField2;
    fn sub(self, o: &VectorField2) -> VectorField2 {
        VectorField2 { px: &self.px - &o.px, py: &self.py - &o.py }
    }
}

impl std::ops::Add for &VectorField2 {
    type Output = VectorField2;
    fn add(self, o: &VectorField2) -> VectorField2 {
        VectorField2 { px: &self.px + &o.px, py: &self.py + &o.py }
    }
}

/// `DΦ · X`, a field expressed in the source coordinates.
pub fn push_jacobian(x: &VectorField2, phi: &CoordinateChange) -> VectorField2 {
    let comps: Vec<Series> = phi.images().iter().map(|s| x.derive(s)).collect();
    VectorField2 { px: comps[0].clone(), py: comps[1].clone() }
}

/// Pushforward `(DΦ·X) ∘ Φ⁻¹`, exact through degree `N − 1`.
pub fn conjugate(x: &VectorField2, phi: &CoordinateChange) -> Result<VectorField2> {
    if phi.nvars() != 2 || phi.trunc() != x.trunc() {
        return Err(Error::Shape("planar change of different shape".into()));
    }
    let inv = phi.inverse()?;
    let t = x.trunc();
    Ok(push_jacobian(x, phi).compose(&inv)?.truncate_to(t - 1))
}

/// `DΦ·X − T∘Φ` through degree `N − 1`.
pub fn conjugacy_residual(x: &VectorField2, phi: &CoordinateChange, target: &VectorField2) -> Result<VectorField2> {
    let t = x.trunc();
    Ok((&push_jacobian(x, phi) - &target.compose(phi)?).truncate_to(t - 1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LinearTag {
    Radial,
    Saddle,
    SaddleNode,
    CenterType,
    Nilpotent,
    PoincareDulacDomain,
    OtherResonant,
}

impl LinearTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            LinearTag::Radial => "radial",
            LinearTag::Saddle => "saddle",
            LinearTag::SaddleNode => "saddle-node",
            LinearTag::CenterType => "center-type",
            LinearTag::Nilpotent => "nilpotent",
            LinearTag::PoincareDulacDomain => "poincare-dulac-domain",
            LinearTag::OtherResonant => "other-resonant",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearClass {
    pub matrix: Vec<Vec<Coeff>>,
    pub trace: Coeff,
    pub det: Coeff,
    pub tag: LinearTag,
}

pub fn classify(x: &VectorField2) -> LinearClass {
    let m = x.linear_matrix();
    let trace = &m[0][0] + &m[1][1];
    let det = &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]);
    let real = m.iter().flatten().all(Coeff::is_real);
    let tag = if m[0][1].is_zero() && m[1][0].is_zero() && m[0][0] == m[1][1] {
        LinearTag::Radial
    } else if trace.is_zero() && det.is_zero() {
        LinearTag::Nilpotent
    } else if det.is_zero() {
        LinearTag::SaddleNode
    } else if real {
        match (det.real_sign(), trace.is_zero()) {
            (Some(-1), _) => LinearTag::Saddle,
            (Some(1), true) => LinearTag::CenterType,
            _ => LinearTag::PoincareDulacDomain,
        }
    } else {
        // λ₂/λ₁ ∈ R⁻ ⟺ t²/d is real and ≤ 0
        let s = &(&trace * &trace) / &det;
        if s.is_real() && s.real_sign() != Some(1) {
            LinearTag::OtherResonant
        } else {
            LinearTag::PoincareDulacDomain
        }
    };
    LinearClass { matrix: m, trace, det, tag }
}

/// Rows `ℓ` and `ℓA` for the first cyclic covector among `(1,0), (0,1), (1,1)`.
pub fn companion_matrix(a: &[Vec<Coeff>]) -> Result<Vec<Vec<Coeff>>> {
    let one = Coeff::one();
    let zero = Coeff::zero();
    for l in [[one.clone(), zero.clone()], [zero.clone(), one.clone()], [one.clone(), one.clone()]] {
        let la = vec![&(&l[0] * &a[0][0]) + &(&l[1] * &a[1][0]), &(&l[0] * &a[0][1]) + &(&l[1] * &a[1][1])];
        let m = vec![l.to_vec(), la];
        if linalg::invert(&m).is_some() {
            return Ok(m);
        }
    }
    Err(Error::Hypothesis("linear part is radial; no cyclic vector".into()))
}

/// Linear change `L` with `lin(L_* X) = [[0,1],[α,β]]`, `α = −det`, `β = trace`.
pub fn companion_normalize(x: &VectorField2) -> Result<(CoordinateChange, VectorField2, Coeff, Coeff)> {
    let cls = classify(x);
    if cls.tag == LinearTag::Radial {
        return Err(Error::Hypothesis("linear part is radial".into()));
    }
    let l = companion_matrix(&cls.matrix)?;
    let ch = CoordinateChange::linear(&l, x.trunc())?;
    let inv = ch.inverse()?;
    let xp = push_jacobian(x, &ch).compose(&inv)?;
    Ok((ch, xp, -&cls.det, cls.trace))
}

/// One family member `A(σ) · V` of a normal-form template. Coefficients of
/// `A` below `free_from` are fixed; the rest are unknowns.
#[derive(Clone, Debug)]
pub struct TemplateTerm {
    pub field: VectorField2,
    pub field_degree: usize,
    pub arg: Series,
    pub coeff: Series,
    pub free_from: usize,
}

#[derive(Clone, Debug)]
pub struct Template {
    pub fixed: VectorField2,
    pub terms: Vec<TemplateTerm>,
}

impl Template {
    pub fn field_at(&self, phi: &CoordinateChange) -> Result<VectorField2> {
        let t = self.fixed.trunc();
        let zero = Series::zero(2, t);
        let mut acc = self.fixed.compose(phi)?;
        for term in &self.terms {
            let s = phi.apply(&term.arg)?;
            let a = term.coeff.substitute(&[s, zero.clone()])?;
            let v = term.field.compose(phi)?;
            acc = &acc + &v.map(|c| c * &a);
        }
        Ok(acc)
    }

    pub fn field(&self) -> VectorField2 {
        self.field_at(&CoordinateChange::identity(2, self.fixed.trunc())).expect("identity substitution")
    }

    pub fn linear_matrix(&self) -> Vec<Vec<Coeff>> {
        self.field().linear_matrix()
    }
}

fn homogeneous_basis(m: usize) -> Vec<MultiIndex> {
    MultiIndex::all_of_degree(2, m)
}

/// `Dφ · (A x) − A φ` for a homogeneous vector `φ`.
fn lin_hom(a: &[Vec<Coeff>], phi: &[Series; 2]) -> [Series; 2] {
    let t = phi[0].trunc();
    let ax = VectorField2::linear(a, t);
    let dphi = [ax.derive(&phi[0]), ax.derive(&phi[1])];
    let aphi0 = &phi[0].scale(&a[0][0]) + &phi[1].scale(&a[0][1]);
    let aphi1 = &phi[0].scale(&a[1][0]) + &phi[1].scale(&a[1][1]);
    [&dphi[0] - &aphi0, &dphi[1] - &aphi1]
}

/// Degree-by-degree search for a change `Φ = id + O(2)` and free template
/// coefficients with `DΦ·X ≡ T∘Φ` through degree `N − 1`. `X` must already
/// have the template's linear part.
pub fn homological_solve(x: &VectorField2, template: &mut Template) -> Result<CoordinateChange> {
    let t = x.trunc();
    let a = template.linear_matrix();
    if x.linear_matrix() != a {
        return Err(Error::Shape("field and template have different linear parts".into()));
    }
    let mut phi = CoordinateChange::identity(2, t);
    for m in 2..t {
        let r = &push_jacobian(x, &phi) - &template.field_at(&phi)?;
        let rm = [r.px.homogeneous(m), r.py.homogeneous(m)];
        let basis = homogeneous_basis(m);
        let params: Vec<(usize, u32)> = template
            .terms
            .iter()
            .enumerate()
            .filter_map(|(i, term)| {
                let j = m.checked_sub(term.field_degree)?;
                (j >= term.free_from).then_some((i, j as u32))
            })
            .collect();
        let ncols = params.len() + 2 * basis.len();
        let nrows = 2 * basis.len();
        let mut cols: Vec<[Series; 2]> = Vec::with_capacity(ncols);
        for &(i, j) in &params {
            let term = &template.terms[i];
            let sj = term.arg.pow(j);
            cols.push([-&(&sj * &term.field.px).homogeneous(m), -&(&sj * &term.field.py).homogeneous(m)]);
        }
        for c in 0..2 {
            for e in &basis {
                let mono = Series::monomial(2, t, e.clone(), Coeff::one());
                let v = if c == 0 { [mono, Series::zero(2, t)] } else { [Series::zero(2, t), mono] };
                cols.push(lin_hom(&a, &v));
            }
        }
        let mut matrix = vec![vec![Coeff::zero(); ncols]; nrows];
        let mut rhs = Vec::with_capacity(nrows);
        for c in 0..2 {
            for (k, e) in basis.iter().enumerate() {
                let row = c * basis.len() + k;
                for (j, col) in cols.iter().enumerate() {
                    matrix[row][j] = col[c].coeff(e);
                }
                rhs.push(-&rm[c].coeff(e));
            }
        }
        let sol = match LinearSystem::from_dense(matrix, rhs).solve() {
            Solution::Solved { solution, .. } => solution,
            Solution::Inconsistent { .. } => {
                return Err(Error::SolverFailure { degree: m, context: "homological equation".into() });
            }
        };
        for (p, &(i, j)) in params.iter().enumerate() {
            let term = &mut template.terms[i];
            term.coeff.add_term(MultiIndex(vec![j, 0]), &sol[p]);
        }
        let mut images = phi.images().to_vec();
        for c in 0..2 {
            for (k, e) in basis.iter().enumerate() {
                images[c].add_term(e.clone(), &sol[params.len() + c * basis.len() + k]);
            }
        }
        phi = CoordinateChange::full(images)?;
    }
    Ok(phi)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VFNormalForm {
    pub f: Series,
    pub g: Series,
    pub change: CoordinateChange,
    pub residual: VectorField2,
}

impl VFNormalForm {
    pub fn target(&self) -> VectorField2 {
        thm3_field(&self.f, &self.g)
    }
}

/// `(y + f(x))∂x + g(x)∂y`.
pub fn thm3_field(f: &Series, g: &Series) -> VectorField2 {
    let y = Series::var(2, f.trunc(), 1);
    VectorField2 { px: &y + f, py: g.clone() }
}

pub fn normal_form_vf(x: &VectorField2) -> Result<VFNormalForm> {
    let t = x.trunc();
    let (l, xc, alpha, beta) = companion_normalize(x)?;
    // shear v := v − βu takes [[0,1],[α,β]] to [[β,1],[α,0]]
    let shear = CoordinateChange::linear(&[vec![Coeff::one(), Coeff::zero()], vec![-&beta, Coeff::one()]], t)?;
    let xs = push_jacobian(&xc, &shear).compose(&shear.inverse()?)?;
    let xv = Series::var(2, t, 0);
    let mut template = Template {
        fixed: VectorField2 { px: Series::var(2, t, 1), py: Series::zero(2, t) },
        terms: vec![
            TemplateTerm {
                field: VectorField2 { px: Series::one(2, t), py: Series::zero(2, t) },
                field_degree: 0,
                arg: xv.clone(),
                coeff: xv.scale(&beta),
                free_from: 2,
            },
            TemplateTerm {
                field: VectorField2 { px: Series::zero(2, t), py: Series::one(2, t) },
                field_degree: 0,
                arg: xv.clone(),
                coeff: xv.scale(&alpha),
                free_from: 2,
            },
        ],
    };
    let nl = homological_solve(&xs, &mut template)?;
    let change = nl.compose(&shear.compose(&l)?)?;
    let f = template.terms[0].coeff.clone();
    let g = template.terms[1].coeff.clone();
    let cls = classify(x);
    if f.coeff_of(&[1, 0]) != cls.trace || g.coeff_of(&[1, 0]) != -&cls.det {
        return Err(Error::Verification("trace/determinant bookkeeping failed".into()));
    }
    let residual = conjugacy_residual(x, &change, &thm3_field(&f, &g))?;
    if !residual.is_zero() {
        return Err(Error::Verification("normal form conjugacy residual is nonzero".into()));
    }
    Ok(VFNormalForm { f, g, change, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_examples() {
        let t = 4;
        let sn = VectorField2::from_fracs(t, &[(&[1, 0], 1, 1)], &[(&[0, 2], 1, 1)]).unwrap();
        let c = classify(&sn);
        assert_eq!((c.tag, c.trace.clone(), c.det.clone()), (LinearTag::SaddleNode, Coeff::from_int(1), Coeff::zero()));
        let s = VectorField2::from_fracs(t, &[(&[1, 0], 1, 1)], &[(&[0, 1], -1, 1)]).unwrap();
        assert_eq!(classify(&s).tag, LinearTag::Saddle);
        let nil = VectorField2::from_fracs(t, &[(&[0, 1], 1, 1)], &[]).unwrap();
        assert_eq!(classify(&nil).tag, LinearTag::Nilpotent);
        let rad = VectorField2::from_fracs(t, &[(&[1, 0], 2, 1)], &[(&[0, 1], 2, 1)]).unwrap();
        assert_eq!(classify(&rad).tag, LinearTag::Radial);
        let cen = VectorField2::from_fracs(t, &[(&[0, 1], -1, 1)], &[(&[1, 0], 1, 1)]).unwrap();
        assert_eq!(classify(&cen).tag, LinearTag::CenterType);
    }

    #[test]
    fn companion_examples() {
        let t = 5;
        let sn = VectorField2::from_fracs(t, &[(&[1, 0], 1, 1)], &[(&[0, 2], 1, 1)]).unwrap();
        let (_, xc, a, b) = companion_normalize(&sn).unwrap();
        assert_eq!((a, b), (Coeff::zero(), Coeff::from_int(1)));
        assert_eq!(xc.linear_matrix(), vec![vec![Coeff::zero(), Coeff::one()], vec![Coeff::zero(), Coeff::one()]]);
        let node = VectorField2::from_fracs(t, &[(&[1, 0], 2, 1)], &[(&[0, 1], 3, 1)]).unwrap();
        let (_, _, a, b) = companion_normalize(&node).unwrap();
        assert_eq!((a, b), (Coeff::from_int(-6), Coeff::from_int(5)));
        let comp = VectorField2::from_fracs(t, &[(&[0, 1], 1, 1)], &[(&[1, 0], 3, 1), (&[0, 1], 2, 1)]).unwrap();
        assert!(companion_normalize(&comp).unwrap().0.is_identity());
    }

    #[test]
    fn normal_form_fixed_point() {
        let t = 7;
        let x = VectorField2::from_fracs(t, &[(&[0, 1], 1, 1), (&[2, 0], 1, 1)], &[(&[3, 0], 1, 1)]).unwrap();
        let nf = normal_form_vf(&x).unwrap();
        assert!(nf.change.is_identity());
        assert_eq!(nf.f, Series::from_fracs(2, t, &[(&[2, 0], 1, 1)]));
        assert_eq!(nf.g, Series::from_fracs(2, t, &[(&[3, 0], 1, 1)]));
    }

    #[test]
    fn normal_form_saddle_node_and_saddle() {
        let t = 8;
        let sn = VectorField2::from_fracs(t, &[(&[1, 0], 1, 1)], &[(&[0, 2], 1, 1)]).unwrap();
        let nf = normal_form_vf(&sn).unwrap();
        assert!(nf.residual.is_zero());
        assert_eq!(nf.f.coeff_of(&[1, 0]), Coeff::one());
        let s = VectorField2::from_fracs(
            t,
            &[(&[1, 0], 1, 1), (&[1, 1], 2, 1), (&[0, 3], -1, 3)],
            &[(&[0, 1], -1, 1), (&[2, 0], 1, 2)],
        )
        .unwrap();
        let nf = normal_form_vf(&s).unwrap();
        assert_eq!(nf.f.coeff_of(&[1, 0]), Coeff::zero());
        assert_eq!(nf.g.coeff_of(&[1, 0]), Coeff::one());
    }

    #[test]
    fn conjugate_identity_and_linear() {
        let t = 5;
        let x = VectorField2::from_fracs(t, &[(&[1, 0], 1, 1), (&[0, 2], 1, 1)], &[(&[0, 1], 3, 1)]).unwrap();
        assert_eq!(conjugate(&x, &CoordinateChange::identity(2, t)).unwrap(), x.truncate_to(t - 1));
        let lin = VectorField2::from_fracs(t, &[(&[1, 0], 1, 1), (&[0, 1], 2, 1)], &[(&[0, 1], 3, 1)]).unwrap();
        let p = vec![vec![Coeff::from_int(1), Coeff::from_int(1)], vec![Coeff::zero(), Coeff::from_int(1)]];
        let y = conjugate(&lin, &CoordinateChange::linear(&p, t).unwrap()).unwrap();
        let pinv = linalg::invert(&p).unwrap();
        let expect = linalg::mat_mul(&linalg::mat_mul(&p, &lin.linear_matrix()), &pinv);
        assert_eq!(y.linear_matrix(), expect);
    }
}
