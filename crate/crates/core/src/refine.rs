//! Saddle, saddle-node and center refinements of the planar normal form,
//! and their invariant-curve presentations.

use num_traits::{One, Zero};

use crate::change::CoordinateChange;
use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::linalg::{self, LinearSystem, Solution};
use crate::planar::{
    classify, companion_matrix, conjugacy_residual, homological_solve, push_jacobian, LinearTag, Template,
    TemplateTerm, VectorField2,
};
use crate::series::{MultiIndex, Series};
use crate::weierstrass::weierstrass_divide;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RefineCase {
    Saddle,
    SaddleNode,
    Center,
}

impl RefineCase {
    pub fn index(&self) -> u32 {
        match self {
            RefineCase::Saddle => 1,
            RefineCase::SaddleNode => 2,
            RefineCase::Center => 3,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RefineCase::Saddle => "saddle",
            RefineCase::SaddleNode => "saddle-node",
            RefineCase::Center => "center",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RefinedTag {
    Eigen(RefineCase),
    CurveForm(RefineCase),
}

impl RefinedTag {
    pub fn case(&self) -> RefineCase {
        match self {
            RefinedTag::Eigen(c) | RefinedTag::CurveForm(c) => *c,
        }
    }

    pub fn name(&self) -> String {
        match self {
            RefinedTag::Eigen(c) => c.as_str().to_string(),
            RefinedTag::CurveForm(c) => format!("curve-form-{}", c.index()),
        }
    }
}

/// A refined planar normal form. For `Eigen` tags `lambda` holds
/// `[λ₁, λ₂]` (saddle), `[λ₁]` (saddle-node) or `[λ]` (center); `f`, `g`
/// are series in the first variable. For `CurveForm` tags `g` is the
/// cofactor of `z^l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinedForm {
    pub tag: RefinedTag,
    pub lambda: Vec<Coeff>,
    pub f: Series,
    pub g: Series,
    pub k: Option<u32>,
    pub l: Option<u32>,
    pub curve: Option<Series>,
    pub change: CoordinateChange,
    pub residual: VectorField2,
}

fn at(f: &Series, s: &Series) -> Series {
    f.substitute(&[s.clone(), Series::zero(2, s.trunc())]).expect("planar substitution")
}

fn vf(px: Series, py: Series) -> VectorField2 {
    VectorField2 { px, py }
}

impl RefinedForm {
    pub fn target(&self) -> VectorField2 {
        let t = self.f.trunc();
        let x = Series::var(2, t, 0);
        let y = Series::var(2, t, 1);
        let c = |v: i64| Coeff::from_int(v);
        match self.tag {
            RefinedTag::Eigen(case) => {
                let (a, b) = (&self.f, &self.g);
                match case {
                    RefineCase::Saddle => {
                        let s = &x + &y;
                        let (fs, gs) = (at(a, &s), at(b, &s));
                        let px = &fs * &(&x.scale(&self.lambda[0]) + &(&gs * &x));
                        let py = &fs * &(&y.scale(&self.lambda[1]) + &(&gs * &y));
                        vf(px, py)
                    }
                    RefineCase::SaddleNode => {
                        vf(a * &(&x.scale(&self.lambda[0]) + &y), &(a * b) * &y)
                    }
                    RefineCase::Center => {
                        let lam = &self.lambda[0];
                        let px = a * &(&y.scale(&-lam) + &(b * &x));
                        let py = a * &(&x.scale(lam) + &(b * &y));
                        vf(px, py)
                    }
                }
            }
            RefinedTag::CurveForm(case) => {
                let k = self.k.unwrap_or(1);
                let l = self.l.unwrap_or(0);
                let gz = &self.g * &x.pow(l);
                let f = &self.f;
                let kc = c(k as i64);
                match case {
                    RefineCase::Saddle => {
                        let px = &(f * &y.scale(&c(2))) + &(&gz * &x.scale(&c(2)));
                        let py = &(f * &x.pow(k - 1).scale(&kc)) + &(&gz * &y.scale(&kc));
                        vf(px, py)
                    }
                    RefineCase::SaddleNode => vf(f * &(&y + &x.pow(k)), &gz * &y),
                    RefineCase::Center => {
                        let px = &(f * &-&y) + &(&gz * &x);
                        let py = &(f * &x.pow(2 * k - 1).scale(&kc)) + &(&gz * &y.scale(&kc));
                        vf(px, py)
                    }
                }
            }
        }
    }

    /// Constraints on `f(0)`, `g(0)`, `k`, `l`, the curve and the residual.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Verification(format!("{}: {}", self.tag.name(), m)));
        if !self.residual.is_zero() {
            return bad("conjugacy residual is nonzero");
        }
        match self.tag {
            RefinedTag::Eigen(_) => {
                if self.f.constant_term() != Coeff::one() {
                    return bad("f(0) != 1");
                }
                if !self.g.constant_term().is_zero() {
                    return bad("g(0) != 0");
                }
            }
            RefinedTag::CurveForm(case) => {
                if self.f.constant_term().is_zero() {
                    return bad("f(0) = 0");
                }
                let (Some(k), Some(l)) = (self.k, self.l) else {
                    return bad("missing k or l");
                };
                let ok = match case {
                    RefineCase::Saddle => 2 * (l + 1) >= k && k >= 2,
                    _ => l + 1 >= k && k >= 1,
                };
                if !ok {
                    return bad("k, l bound violated");
                }
                let Some(c) = &self.curve else {
                    return bad("missing curve");
                };
                let tan = curve_tangency(&self.target(), c)?;
                if !tan.is_zero() {
                    return bad("curve is not invariant");
                }
            }
        }
        Ok(())
    }
}

/// Remainder of `X(F)` on division by `F`, through degree `N − 1`.
pub fn curve_tangency(x: &VectorField2, f: &Series) -> Result<Series> {
    let t = x.trunc();
    let (_, r) = weierstrass_divide(&x.derive(f), f)?;
    Ok(r.to_series().truncate_to(t - 1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveShape {
    Graph,
    Quadratic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantCurve {
    pub shape: CurveShape,
    pub equation: Series,
    pub tangency: Series,
}

fn check_thm3_shape(x: &VectorField2) -> Result<(Series, Series)> {
    let t = x.trunc();
    let f = &x.px - &Series::var(2, t, 1);
    if !f.depends_only_on(&[0]) || !x.py.depends_only_on(&[0]) {
        return Err(Error::Hypothesis("field is not of the form (y + f(x))∂x + g(x)∂y".into()));
    }
    Ok((f, x.py.clone()))
}

fn solve_square(matrix: Vec<Vec<Coeff>>, rhs: Vec<Coeff>, context: &str) -> Result<Vec<Coeff>> {
    match LinearSystem::from_dense(matrix, rhs).solve() {
        Solution::Solved { solution, .. } => Ok(solution),
        Solution::Inconsistent { .. } => Err(Error::Unsupported(format!("no {} within truncation", context))),
    }
}

/// Affine probe: `eval(u)` is affine in `u`; solve `eval(u) = 0`.
fn probe_solve<F: Fn(&[Coeff]) -> Vec<Coeff>>(n: usize, eval: F, context: &str) -> Result<Vec<Coeff>> {
    let base = eval(&vec![Coeff::zero(); n]);
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut u = vec![Coeff::zero(); n];
        u[j] = Coeff::one();
        let v = eval(&u);
        cols.push(v.iter().zip(&base).map(|(a, b)| a - b).collect::<Vec<_>>());
    }
    let matrix = (0..base.len()).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect();
    solve_square(matrix, base.iter().map(|b| -b).collect(), context)
}

/// Invariant curve of a field in the form `(y + f(x))∂x + g(x)∂y`: a graph
/// `y = c(x)` tangent to the x-axis for saddle-nodes, and a curve
/// `y² + a(x)y + b(x) = 0` for saddles and centers.
pub fn invariant_curve(x: &VectorField2) -> Result<InvariantCurve> {
    let (f, g) = check_thm3_shape(x)?;
    let t = x.trunc();
    let cls = classify(x);
    let xv = Series::var(2, t, 0);
    let y = Series::var(2, t, 1);
    match cls.tag {
        LinearTag::SaddleNode => {
            let tr = cls.trace.clone();
            let mut c = Series::zero(2, t);
            for j in 2..=t {
                let cp = c.partial(0);
                let rest = (&g - &(&cp * &(&c + &f))).coeff_of(&[j as u32, 0]);
                let cj = (&rest / &(&tr * &Coeff::from_int(j as i64))).clone();
                c.add_term(MultiIndex(vec![j as u32, 0]), &cj);
            }
            let equation = &y - &c;
            let tangency = curve_tangency(x, &equation)?;
            Ok(InvariantCurve { shape: CurveShape::Graph, equation, tangency })
        }
        LinearTag::Saddle | LinearTag::CenterType | LinearTag::OtherResonant => {
            let mut a = xv.scale(&cls.trace);
            let mut b = xv.pow(2).scale(&cls.det);
            let mut k = Series::constant(2, t, cls.trace.clone());
            for m in 3..=t {
                let basis = MultiIndex::all_of_degree(2, m - 2);
                let n = 2 + basis.len();
                let target = MultiIndex::all_of_degree(2, m);
                let eval = |u: &[Coeff]| {
                    let mut aa = a.clone();
                    aa.add_term(MultiIndex(vec![(m - 1) as u32, 0]), &u[0]);
                    let mut bb = b.clone();
                    bb.add_term(MultiIndex(vec![m as u32, 0]), &u[1]);
                    let mut kk = k.clone();
                    for (i, e) in basis.iter().enumerate() {
                        kk.add_term(e.clone(), &u[2 + i]);
                    }
                    let ff = &(&y.pow(2) + &(&aa * &y)) + &bb;
                    let r = &x.derive(&ff) - &(&kk * &ff);
                    target.iter().map(|e| r.coeff(e)).collect()
                };
                let u = probe_solve(n, eval, "quadratic invariant curve")?;
                a.add_term(MultiIndex(vec![(m - 1) as u32, 0]), &u[0]);
                b.add_term(MultiIndex(vec![m as u32, 0]), &u[1]);
                for (i, e) in basis.iter().enumerate() {
                    k.add_term(e.clone(), &u[2 + i]);
                }
            }
            let equation = &(&y.pow(2) + &(&a * &y)) + &b;
            let tangency = curve_tangency(x, &equation)?;
            Ok(InvariantCurve { shape: CurveShape::Quadratic, equation, tangency })
        }
        LinearTag::Radial => Err(Error::Hypothesis("linear part is radial".into())),
        _ => Err(Error::Unsupported(format!("no supported curve shape for {} linear part", cls.tag.as_str()))),
    }
}

fn linmat(rows: [[&Coeff; 2]; 2]) -> Vec<Vec<Coeff>> {
    rows.iter().map(|r| r.iter().map(|c| (*c).clone()).collect()).collect()
}

/// Cor-4 style refinement: saddle `f(x+y){λ₁x∂x + λ₂y∂y + g(x+y)(x∂x+y∂y)}`,
/// saddle-node `f(x){(λ₁x+y)∂x + g(x)y∂y}`, center
/// `f(x){λ(−y∂x+x∂y) + g(x)(x∂x+y∂y)}`.
pub fn refine(x: &VectorField2) -> Result<RefinedForm> {
    let t = x.trunc();
    let cls = classify(x);
    let zero = Coeff::zero();
    let one = Coeff::one();
    let xv = Series::var(2, t, 0);
    let yv = Series::var(2, t, 1);
    let z2 = Series::zero(2, t);
    let term = |field: VectorField2, arg: &Series, coeff: Series| TemplateTerm {
        field,
        field_degree: 1,
        arg: arg.clone(),
        coeff,
        free_from: 1,
    };
    let (case, lambda, lin, terms) = match cls.tag {
        LinearTag::Saddle => {
            let disc = &(&cls.trace * &cls.trace) - &(&Coeff::from_int(4) * &cls.det);
            let sq = disc.nth_root(2)?;
            let half = Coeff::frac(1, 2);
            let l1 = &(&cls.trace + &sq) * &half;
            let l2 = &(&cls.trace - &sq) * &half;
            let s = &xv + &yv;
            let terms = vec![
                term(vf(xv.scale(&l1), yv.scale(&l2)), &s, Series::one(2, t)),
                term(vf(xv.clone(), yv.clone()), &s, z2.clone()),
            ];
            let lin = linmat([[&l1, &zero], [&zero, &l2]]);
            (RefineCase::Saddle, vec![l1, l2], lin, terms)
        }
        LinearTag::SaddleNode => {
            let l1 = cls.trace.clone();
            let terms = vec![
                term(vf(&xv.scale(&l1) + &yv, z2.clone()), &xv, Series::one(2, t)),
                term(vf(z2.clone(), yv.clone()), &xv, z2.clone()),
            ];
            let lin = linmat([[&l1, &one], [&zero, &zero]]);
            (RefineCase::SaddleNode, vec![l1], lin, terms)
        }
        LinearTag::CenterType => {
            let lam = cls.det.nth_root(2)?;
            let terms = vec![
                term(vf(yv.scale(&-&lam), xv.scale(&lam)), &xv, Series::one(2, t)),
                term(vf(xv.clone(), yv.clone()), &xv, z2.clone()),
            ];
            let lin = linmat([[&zero, &-&lam], [&lam, &zero]]);
            (RefineCase::Center, vec![lam], lin, terms)
        }
        LinearTag::Radial => return Err(Error::Hypothesis("linear part is radial".into())),
        other => return Err(Error::Unsupported(format!("no refinement for {} linear part", other.as_str()))),
    };
    let la = companion_matrix(&cls.matrix)?;
    let ll = companion_matrix(&lin)?;
    let ll_inv = linalg::invert(&ll).ok_or_else(|| Error::Verification("companion change is singular".into()))?;
    let pre = CoordinateChange::linear(&linalg::mat_mul(&ll_inv, &la), t)?;
    let xp = push_jacobian(x, &pre).compose(&pre.inverse()?)?;
    let mut template = Template { fixed: vf(z2.clone(), z2.clone()), terms };
    let nl = homological_solve(&xp, &mut template)?;
    let change = nl.compose(&pre)?;
    let f = template.terms[0].coeff.clone();
    let g = &template.terms[1].coeff * &f.invert_unit()?;
    let mut out = RefinedForm {
        tag: RefinedTag::Eigen(case),
        lambda,
        f,
        g,
        k: None,
        l: None,
        curve: None,
        change,
        residual: VectorField2 { px: z2.clone(), py: z2 },
    };
    out.residual = conjugacy_residual(x, &out.change, &out.target())?;
    out.validate()?;
    Ok(out)
}

fn shift_down(s: &Series, l: u32) -> Series {
    let mut out = Series::zero(2, s.trunc());
    for (e, c) in s.terms() {
        out.add_term(MultiIndex(vec![e.get(0) - l, e.get(1)]), c);
    }
    out
}

/// Presentation with an explicit invariant curve: `w² − z²` (saddle,
/// `k = 2`), `w` (saddle-node, `k = 1`), `w² + z²` (center, `k = 1`).
pub fn refine_curve_form(x: &VectorField2) -> Result<RefinedForm> {
    let r4 = refine(x)?;
    let t = x.trunc();
    let case = r4.tag.case();
    let xv = Series::var(2, t, 0);
    let yv = Series::var(2, t, 1);
    let (k, lin, e, ftilde, curve) = match case {
        RefineCase::Saddle => {
            let (l1, l2) = (&r4.lambda[0], &r4.lambda[1]);
            let h = Coeff::frac(1, 2);
            let two_z = xv.scale(&Coeff::from_int(2));
            let f2 = at(&r4.f, &two_z);
            let g2 = at(&r4.g, &two_z);
            let mean = &(l1 + l2) * &h;
            let e = &f2 * &(&g2 + &Series::constant(2, t, mean));
            let ft = f2.scale(&(&(l1 - l2) * &Coeff::frac(1, 4)));
            // z = (x+y)/2, w = (x−y)/2
            let lin = linmat([[&h, &h], [&h, &-&h]]);
            (2, lin, e.scale(&h), ft, &yv.pow(2) - &xv.pow(2))
        }
        RefineCase::SaddleNode => {
            let l1 = &r4.lambda[0];
            let zero = Coeff::zero();
            let one = Coeff::one();
            let inv = l1.inv()?;
            let lin = linmat([[&one, &zero], [&zero, &inv]]);
            (1, lin, &r4.f * &r4.g, r4.f.scale(l1), yv.clone())
        }
        RefineCase::Center => {
            let zero = Coeff::zero();
            let one = Coeff::one();
            let lin = linmat([[&one, &zero], [&zero, &one]]);
            (1, lin, &r4.f * &r4.g, r4.f.scale(&r4.lambda[0]), &yv.pow(2) + &xv.pow(2))
        }
    };
    let l = e.order().map(|o| o as u32).unwrap_or(0);
    let lmin = if case == RefineCase::Saddle { 0 } else { k - 1 };
    let l = if e.is_zero() { lmin } else { l };
    let gtilde = shift_down(&e, l);
    let change = CoordinateChange::linear(&lin, t)?.compose(&r4.change)?;
    let mut out = RefinedForm {
        tag: RefinedTag::CurveForm(case),
        lambda: r4.lambda.clone(),
        f: ftilde,
        g: gtilde,
        k: Some(k),
        l: Some(l),
        curve: Some(curve),
        change,
        residual: r4.residual.clone(),
    };
    out.residual = conjugacy_residual(x, &out.change, &out.target())?;
    out.validate()?;
    Ok(out)
}
