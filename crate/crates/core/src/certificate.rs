//! Certificate envelopes: each job echoes its input, the coordinate change,
//! the normal form and the residual. `verify` recomputes the residual from
//! the envelope alone.

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::change::CoordinateChange;
use crate::closed::{closed_form_prepare, closed_residual, MeroOneForm, RestrictionModel};
use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::foliation::{prepare_foliation, prepare_k1, proportionality_residual};
use crate::forms::{form_name, wedge, OneForm, TwoForm};
use crate::interchange::{ChangeDoc, CoeffDoc, OneFormDoc, QuotientDoc, SeriesDoc, TwoFormDoc, VectorFieldDoc};
use crate::levinson::{cleared_residual, levinson_prepare, meromorphic_prepare};
use crate::planar::{classify, conjugacy_residual, normal_form_vf, thm3_field, VectorField2};
use crate::poly::PolyInW;
use crate::refine::{refine, refine_curve_form, RefineCase, RefinedForm, RefinedTag};
use crate::series::{monomial_name, Series};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    PrepareFunction,
    PrepareMeromorphic,
    PrepareForm,
    PrepareClosedForm,
    PrepareK1,
    NormalizeVf,
    RefineVf,
    Verify,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::PrepareFunction,
        Command::PrepareMeromorphic,
        Command::PrepareForm,
        Command::PrepareClosedForm,
        Command::PrepareK1,
        Command::NormalizeVf,
        Command::RefineVf,
        Command::Verify,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Command::PrepareFunction => "prepare-function",
            Command::PrepareMeromorphic => "prepare-meromorphic",
            Command::PrepareForm => "prepare-form",
            Command::PrepareClosedForm => "prepare-closed-form",
            Command::PrepareK1 => "prepare-k1",
            Command::NormalizeVf => "normalize-vf",
            Command::RefineVf => "refine-vf",
            Command::Verify => "verify",
        }
    }

    pub fn parse(s: &str) -> Result<Command> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown command {:?}", s)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub command: String,
    pub trunc: usize,
    pub input_hash: String,
    pub input: Value,
    pub change: ChangeDoc,
    pub normal_form: Value,
    pub residual: Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub verified: String,
    pub trunc: usize,
    pub input_hash: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct FunctionNf {
    k: usize,
    coeffs: Vec<SeriesDoc>,
    polynomial: SeriesDoc,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct MeromorphicNf {
    k0: usize,
    k_inf: usize,
    numerator: SeriesDoc,
    denominator: SeriesDoc,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct FormNf {
    k: usize,
    polys: Vec<SeriesDoc>,
    q: SeriesDoc,
    form: OneFormDoc,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct K1Nf {
    f0: SeriesDoc,
    f1: SeriesDoc,
    theta0: Vec<SeriesDoc>,
    theta1: Vec<SeriesDoc>,
    form: OneFormDoc,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ModelDoc {
    name: String,
    order: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<CoeffDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ClosedNf {
    model: ModelDoc,
    numerator: OneFormDoc,
    q: SeriesDoc,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct VfNf {
    tag: String,
    trace: CoeffDoc,
    det: CoeffDoc,
    f: SeriesDoc,
    g: SeriesDoc,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RefinedDoc {
    tag: String,
    lambda: Vec<CoeffDoc>,
    f: SeriesDoc,
    g: SeriesDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    l: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    curve: Option<SeriesDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CurveFormDoc {
    form: RefinedDoc,
    change: ChangeDoc,
    residual: VectorFieldDoc,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RefineNf {
    refined: RefinedDoc,
    curve_form: CurveFormDoc,
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("documents serialize")
}

fn from_value<T: for<'de> Deserialize<'de>>(v: &Value, what: &str) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("{}: {}", what, e)))
}

pub fn hash_input(v: &Value) -> String {
    let text = serde_json::to_string(v).expect("value serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn sd(s: &Series) -> SeriesDoc {
    SeriesDoc::from(s)
}

fn series(d: &SeriesDoc) -> Result<Series> {
    Series::try_from(d)
}

fn lower(s: &Series, trunc: usize) -> Result<Series> {
    if trunc > s.trunc() {
        return Err(Error::Parse(format!("input truncation {} is below requested {}", s.trunc(), trunc)));
    }
    Ok(s.truncate_to(trunc))
}

fn lower_form(f: &OneForm, trunc: usize) -> Result<OneForm> {
    if trunc > f.trunc() {
        return Err(Error::Parse(format!("input truncation {} is below requested {}", f.trunc(), trunc)));
    }
    Ok(f.truncate_to(trunc))
}

fn has_imaginary(v: &Value) -> bool {
    match v {
        Value::Object(m) => {
            if let Some(Value::String(im)) = m.get("im") {
                if im != "0/1" {
                    return true;
                }
            }
            m.values().any(has_imaginary)
        }
        Value::Array(a) => a.iter().any(has_imaginary),
        _ => false,
    }
}

fn nonzero_series(name: &str, s: &Series, planar: bool) -> Result<()> {
    match s.terms().next() {
        None => Ok(()),
        Some((e, c)) => Err(Error::Verification(format!(
            "residual {} has coefficient {} at {}",
            name,
            c,
            monomial_name(e, planar)
        ))),
    }
}

fn check_series_zero(s: &Series) -> Result<()> {
    nonzero_series("", s, false)
}

fn check_one_form_zero(f: &OneForm) -> Result<()> {
    let nv = f.nvars();
    for (i, c) in f.coeffs().iter().enumerate() {
        nonzero_series(&format!("{}-coefficient", form_name(nv, i)), c, false)?;
    }
    Ok(())
}

fn check_two_form_zero(f: &TwoForm) -> Result<()> {
    let nv = f.nvars();
    for (&(i, j), c) in f.components() {
        nonzero_series(&format!("{}∧{}-coefficient", form_name(nv, i), form_name(nv, j)), c, false)?;
    }
    Ok(())
}

fn check_field_zero(x: &VectorField2) -> Result<()> {
    nonzero_series("∂x-component", &x.px, true)?;
    nonzero_series("∂y-component", &x.py, true)
}

fn poly_doc(p: &PolyInW) -> SeriesDoc {
    sd(&p.to_series())
}

fn poly_from(s: &Series) -> Result<PolyInW> {
    PolyInW::from_series(s, s.w_degree().unwrap_or(0) as usize)
}

fn refined_doc(r: &RefinedForm) -> RefinedDoc {
    RefinedDoc {
        tag: r.tag.name(),
        lambda: r.lambda.iter().map(CoeffDoc::from).collect(),
        f: sd(&r.f),
        g: sd(&r.g),
        k: r.k,
        l: r.l,
        curve: r.curve.as_ref().map(sd),
    }
}

fn refined_from(d: &RefinedDoc, change: CoordinateChange) -> Result<RefinedForm> {
    let case = |s: &str| match s {
        "saddle" | "curve-form-1" => Ok(RefineCase::Saddle),
        "saddle-node" | "curve-form-2" => Ok(RefineCase::SaddleNode),
        "center" | "curve-form-3" => Ok(RefineCase::Center),
        other => Err(Error::Parse(format!("unknown refined tag {:?}", other))),
    };
    let c = case(&d.tag)?;
    let tag = if d.tag.starts_with("curve-form") { RefinedTag::CurveForm(c) } else { RefinedTag::Eigen(c) };
    let f = series(&d.f)?;
    let t = f.trunc();
    Ok(RefinedForm {
        tag,
        lambda: d.lambda.iter().map(Coeff::try_from).collect::<Result<_>>()?,
        f,
        g: series(&d.g)?,
        k: d.k,
        l: d.l,
        curve: d.curve.as_ref().map(series).transpose()?,
        change,
        residual: VectorField2 { px: Series::zero(2, t), py: Series::zero(2, t) },
    })
}

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn input_field(input: &Value, trunc: Option<usize>) -> Result<(VectorField2, usize)> {
    let d: VectorFieldDoc = from_value(input, "vector field")?;
    let x = VectorField2::try_from(&d)?;
    let t = trunc.unwrap_or(x.trunc());
    if t != x.trunc() {
        if t > x.trunc() {
            return Err(Error::Parse(format!("input truncation {} is below requested {}", x.trunc(), t)));
        }
        return Ok((x.truncate_to(t), t));
    }
    Ok((x, t))
}

fn input_form(input: &Value, trunc: Option<usize>) -> Result<(OneForm, Option<Series>, usize)> {
    let d: OneFormDoc = from_value(input, "1-form")?;
    let (f, den) = d.to_form()?;
    let t = trunc.unwrap_or(f.trunc());
    let den = den.map(|s| lower(&s, t)).transpose()?;
    Ok((lower_form(&f, t)?, den, t))
}

fn check_trunc(t: usize) -> Result<()> {
    if t < 2 {
        return Err(Error::Parse(format!("truncation order {} is below 2", t)));
    }
    Ok(())
}

/// Run one job on an input document; returns the certificate.
pub fn run(command: Command, input_text: &str, trunc: Option<usize>, real: bool) -> Result<Certificate> {
    if let Some(t) = trunc {
        check_trunc(t)?;
    }
    let input = parse_json(input_text)?;
    if command == Command::Verify {
        return Err(Error::Parse("verify takes a certificate; use verify_certificate".into()));
    }
    if real && has_imaginary(&input) {
        return Err(Error::Hypothesis("--real given but the input has non-real coefficients".into()));
    }
    let (t, change, normal_form, residual) = match command {
        Command::PrepareFunction => {
            let d: SeriesDoc = from_value(&input, "series")?;
            let s = series(&d)?;
            let t = trunc.unwrap_or(s.trunc());
            let f = lower(&s, t)?;
            let p = levinson_prepare(&f)?;
            let nf = FunctionNf { k: p.k, coeffs: p.coeffs.iter().map(sd).collect(), polynomial: poly_doc(&p.polynomial()) };
            (t, p.change, to_value(&nf), to_value(&sd(&p.residual)))
        }
        Command::PrepareMeromorphic => {
            let q: QuotientDoc = from_value(&input, "quotient")?;
            let (num, den) = (series(&q.num)?, series(&q.den)?);
            num.same_shape(&den).map_err(|e| Error::Parse(e.to_string()))?;
            let t = trunc.unwrap_or(num.trunc());
            let (num, den) = (lower(&num, t)?, lower(&den, t)?);
            let p = meromorphic_prepare(&num, &den)?;
            let nf = MeromorphicNf {
                k0: p.k0,
                k_inf: p.k_inf,
                numerator: poly_doc(&p.numerator),
                denominator: poly_doc(&p.denominator),
            };
            (t, p.change, to_value(&nf), to_value(&sd(&p.residual)))
        }
        Command::PrepareForm => {
            let (theta, den, t) = input_form(&input, trunc)?;
            if den.is_some() {
                return Err(Error::Parse("prepare-form takes a holomorphic 1-form".into()));
            }
            let p = prepare_foliation(&theta)?;
            let form = p.form();
            let nf = FormNf {
                k: p.k,
                polys: p.polys.iter().map(poly_doc).collect(),
                q: poly_doc(&p.q),
                form: OneFormDoc::from(&form),
            };
            (t, p.change, to_value(&nf), to_value(&TwoFormDoc::from(&p.residual)))
        }
        Command::PrepareK1 => {
            let (theta, den, t) = input_form(&input, trunc)?;
            if den.is_some() {
                return Err(Error::Parse("prepare-k1 takes a holomorphic 1-form".into()));
            }
            let p = prepare_k1(&theta)?;
            let nf = K1Nf {
                f0: sd(&p.f0),
                f1: sd(&p.f1),
                theta0: p.theta0.iter().map(sd).collect(),
                theta1: p.theta1.iter().map(sd).collect(),
                form: OneFormDoc::from(&p.form()),
            };
            (t, p.change, to_value(&nf), to_value(&TwoFormDoc::from(&p.residual)))
        }
        Command::PrepareClosedForm => {
            let (theta, den, t) = input_form(&input, trunc)?;
            let th = match den {
                Some(d) => MeroOneForm::new(theta, d)?,
                None => MeroOneForm::holomorphic(theta),
            };
            let p = closed_form_prepare(&th)?;
            let nf = ClosedNf {
                model: ModelDoc {
                    name: p.model.name().into(),
                    order: p.model.order(),
                    lambda: match &p.model {
                        RestrictionModel::Power { .. } => None,
                        RestrictionModel::Log { lambda } | RestrictionModel::Polar { lambda, .. } => Some(CoeffDoc::from(lambda)),
                    },
                },
                numerator: OneFormDoc::from(&p.numerator()),
                q: poly_doc(&p.q),
            };
            (t, p.change, to_value(&nf), to_value(&OneFormDoc::from(&p.residual)))
        }
        Command::NormalizeVf => {
            let (x, t) = input_field(&input, trunc)?;
            let cls = classify(&x);
            let p = normal_form_vf(&x)?;
            let nf = VfNf {
                tag: cls.tag.as_str().into(),
                trace: CoeffDoc::from(&cls.trace),
                det: CoeffDoc::from(&cls.det),
                f: sd(&p.f),
                g: sd(&p.g),
            };
            (t, p.change, to_value(&nf), to_value(&VectorFieldDoc::from(&p.residual)))
        }
        Command::RefineVf => {
            let (x, t) = input_field(&input, trunc)?;
            let r = refine(&x)?;
            let c = refine_curve_form(&x)?;
            let nf = RefineNf {
                refined: refined_doc(&r),
                curve_form: CurveFormDoc {
                    form: refined_doc(&c),
                    change: ChangeDoc::from(&c.change),
                    residual: VectorFieldDoc::from(&c.residual),
                },
            };
            (t, r.change, to_value(&nf), to_value(&VectorFieldDoc::from(&r.residual)))
        }
        Command::Verify => unreachable!(),
    };
    let cert = Certificate {
        command: command.as_str().into(),
        trunc: t,
        input_hash: hash_input(&input),
        input,
        change: ChangeDoc::from(&change),
        normal_form,
        residual,
    };
    if real && (has_imaginary(&to_value(&cert.change)) || has_imaginary(&cert.normal_form)) {
        return Err(Error::FieldExtension("real input produced non-real output".into()));
    }
    Ok(cert)
}

fn residual_matches<T: Serialize>(stored: &Value, recomputed: &T) -> Result<()> {
    if *stored != to_value(recomputed) {
        return Err(Error::Verification("stored residual differs from the recomputed one".into()));
    }
    Ok(())
}

/// Recompute the residual of a certificate from its input, change and
/// normal form.
/// Truncation orders of every series document nested in `v`.
fn series_truncs(v: &Value) -> Vec<usize> {
    let mut out = Vec::new();
    let mut stack = vec![v];
    while let Some(v) = stack.pop() {
        match v {
            Value::Object(m) => {
                if let (Some(_), Some(d)) = (m.get("nvars"), m.get("trunc").and_then(Value::as_u64)) {
                    out.push(d as usize);
                }
                stack.extend(m.values());
            }
            Value::Array(a) => stack.extend(a),
            _ => {}
        }
    }
    out
}

pub fn verify_certificate(cert: &Certificate) -> Result<VerifyReport> {
    let command = Command::parse(&cert.command)?;
    if hash_input(&cert.input) != cert.input_hash {
        return Err(Error::Verification("input hash does not match the embedded input".into()));
    }
    let t = cert.trunc;
    let parts = [
        ("change", serde_json::to_value(&cert.change)),
        ("normal form", Ok(cert.normal_form.clone())),
        ("residual", serde_json::to_value(&cert.residual)),
    ];
    for (name, v) in parts {
        let v = v.map_err(|e| Error::Parse(e.to_string()))?;
        if let Some(bad) = series_truncs(&v).into_iter().find(|&d| d > t || d + 1 < t) {
            return Err(Error::Verification(format!("{} is stored at truncation {} but the certificate states {}", name, bad, t)));
        }
    }
    let change = CoordinateChange::try_from(&cert.change)?;
    let trunc = Some(t);
    let nf = &cert.normal_form;
    match command {
        Command::PrepareFunction => {
            let f = lower(&series(&from_value(&cert.input, "series")?)?, t)?;
            let d: FunctionNf = from_value(nf, "normal form")?;
            let p = series(&d.polynomial)?;
            let poly = poly_from(&p)?;
            if !poly.is_unitary() || poly.degree() != d.k {
                return Err(Error::Verification(format!("normal form is not a unitary polynomial of degree {}", d.k)));
            }
            let r = &change.apply(&f)? - &p;
            check_series_zero(&r)?;
            residual_matches(&cert.residual, &sd(&r))?;
        }
        Command::PrepareMeromorphic => {
            let q: QuotientDoc = from_value(&cert.input, "quotient")?;
            let (num, den) = (lower(&series(&q.num)?, t)?, lower(&series(&q.den)?, t)?);
            let d: MeromorphicNf = from_value(nf, "normal form")?;
            let (a, b) = (poly_from(&series(&d.numerator)?)?, poly_from(&series(&d.denominator)?)?);
            if !a.is_unitary() || !b.is_unitary() || a.degree() != d.k0 || b.degree() != d.k_inf {
                return Err(Error::Verification("numerator or denominator is not unitary of the stated degree".into()));
            }
            let r = cleared_residual(&num, &den, &change, &a, &b)?;
            check_series_zero(&r)?;
            residual_matches(&cert.residual, &sd(&r))?;
        }
        Command::PrepareForm | Command::PrepareK1 => {
            let (theta, _, _) = input_form(&cert.input, trunc)?;
            let form_doc = if command == Command::PrepareForm {
                let d: FormNf = from_value(nf, "normal form")?;
                let q = poly_from(&series(&d.q)?)?;
                if !q.is_unitary() || q.degree() != d.k {
                    return Err(Error::Verification("Q is not unitary of degree k".into()));
                }
                d.form
            } else {
                let d: K1Nf = from_value(nf, "normal form")?;
                let (f0, f1) = (series(&d.f0)?, series(&d.f1)?);
                let df = wedge(&OneForm::exact(&f0), &OneForm::exact(&f1))?;
                let top = t - 1;
                for (&(i, j), c) in df.components() {
                    nonzero_series(&format!("df₀∧df₁ {}∧{}", i, j), &c.truncate_to(top), false)?;
                }
                let nv = f0.nvars();
                let w = Series::w(nv, t);
                let expect = &(&OneForm::exact(&f0.with_trunc(t)) + &OneForm::exact(&f1.with_trunc(t)).scale_by(&w))
                    + &OneForm::new(vec![Series::zero(nv, t); nv - 1], w.clone())?;
                let (form, _) = d.form.to_form()?;
                if form.truncate_to(top) != expect.truncate_to(top) {
                    return Err(Error::Verification("form is not df₀ + w df₁ + w dw".into()));
                }
                d.form
            };
            let (form, _) = form_doc.to_form()?;
            let r = proportionality_residual(&theta, &form, &change)?;
            check_two_form_zero(&r)?;
            residual_matches(&cert.residual, &TwoFormDoc::from(&r))?;
        }
        Command::PrepareClosedForm => {
            let (theta, den, _) = input_form(&cert.input, trunc)?;
            let th = match den {
                Some(d) => MeroOneForm::new(theta, d)?,
                None => MeroOneForm::holomorphic(theta),
            };
            let d: ClosedNf = from_value(nf, "normal form")?;
            let (omega, _) = d.numerator.to_form()?;
            let q = series(&d.q)?;
            let r = closed_residual(&th, &change, &omega, &q)?;
            check_one_form_zero(&r)?;
            residual_matches(&cert.residual, &OneFormDoc::from(&r))?;
        }
        Command::NormalizeVf => {
            let (x, _) = input_field(&cert.input, trunc)?;
            let d: VfNf = from_value(nf, "normal form")?;
            let (f, g) = (series(&d.f)?, series(&d.g)?);
            if !f.depends_only_on(&[0]) || !g.depends_only_on(&[0]) {
                return Err(Error::Verification("f or g depends on y".into()));
            }
            let cls = classify(&x);
            if f.coeff_of(&[1, 0]) != cls.trace || g.coeff_of(&[1, 0]) != -&cls.det || !f.constant_term().is_zero() {
                return Err(Error::Verification("f'(0) or g'(0) disagrees with trace/determinant".into()));
            }
            let r = conjugacy_residual(&x, &change, &thm3_field(&f, &g))?;
            check_field_zero(&r)?;
            residual_matches(&cert.residual, &VectorFieldDoc::from(&r))?;
        }
        Command::RefineVf => {
            let (x, _) = input_field(&cert.input, trunc)?;
            let d: RefineNf = from_value(nf, "normal form")?;
            let mut r4 = refined_from(&d.refined, change)?;
            r4.residual = conjugacy_residual(&x, &r4.change, &r4.target())?;
            check_field_zero(&r4.residual)?;
            r4.validate()?;
            residual_matches(&cert.residual, &VectorFieldDoc::from(&r4.residual))?;
            let c_change = CoordinateChange::try_from(&d.curve_form.change)?;
            let mut c = refined_from(&d.curve_form.form, c_change)?;
            c.residual = conjugacy_residual(&x, &c.change, &c.target())?;
            check_field_zero(&c.residual)?;
            c.validate()?;
            residual_matches(&to_value(&d.curve_form.residual), &VectorFieldDoc::from(&c.residual))?;
        }
        Command::Verify => return Err(Error::Parse("a certificate cannot certify verify".into())),
    }
    Ok(VerifyReport { verified: cert.command.clone(), trunc: t, input_hash: cert.input_hash.clone() })
}

pub fn parse_certificate(text: &str) -> Result<Certificate> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("certificate: {}", e)))
}

/// Dispatch used by the command-line front end; returns the output text.
pub fn run_to_text(command: Command, input_text: &str, trunc: Option<usize>, real: bool) -> Result<String> {
    let out = if command == Command::Verify {
        let cert = parse_certificate(input_text)?;
        if let Some(t) = trunc {
            if t != cert.trunc {
                return Err(Error::Parse(format!("--trunc {} disagrees with certificate trunc {}", t, cert.trunc)));
            }
        }
        to_value(&verify_certificate(&cert)?)
    } else {
        to_value(&run(command, input_text, trunc, real)?)
    };
    let mut s = serde_json::to_string_pretty(&out).expect("value serializes");
    s.push('\n');
    Ok(s)
}
