//! Acceptance criteria 1–9. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::process::Command as Proc;
use std::time::{Duration, Instant};

use common::*;
use germnorm::certificate::{parse_certificate, run_to_text, verify_certificate, Command};
use germnorm::forms::{describe_monomial, integrability_check, wedge, Integrability, OneForm};
use germnorm::interchange::{series_to_json, OneFormDoc, VectorFieldDoc};
use germnorm::levinson::levinson_prepare;
use germnorm::planar::{classify, normal_form_vf, VectorField2};
use germnorm::refine::{refine, refine_curve_form, RefineCase, RefinedTag};
use germnorm::weierstrass::{weierstrass_divide, weierstrass_prepare};
use germnorm::{foliation, Coeff, MultiIndex, PolyInW, Series};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

type Outcome = Result<String, String>;

/// Inputs gathered along the way, rerun through the certificate layer in
/// criterion 8.
#[derive(Default)]
struct Jobs(Vec<(Command, String)>);

impl Jobs {
    fn push(&mut self, c: Command, text: String) {
        self.0.push((c, text));
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let t = 8;
    for case in 0..200 {
        let nz = r.gen_range(1..=2);
        let nv = nz + 1;
        let k = r.gen_range(1..=3);
        let nterms = r.gen_range(1..=14);
        let lead = small_rat(&mut r);
        let f = random_order_k(&mut r, nv, t, k, lead, nterms);
        let gterms = r.gen_range(1..=15);
        let g = random_series(&mut r, nv, t, gterms, 0, |_| true);
        let (q, rem) = weierstrass_divide(&g, &f).map_err(|e| format!("case {}: {}", case, e))?;
        ensure(rem.degree() < k || rem.to_series().w_degree().is_none_or(|d| (d as usize) < k), || {
            format!("case {}: remainder has w-degree ≥ k", case)
        })?;
        ensure(&(&q * &f) + &rem.to_series() == g, || format!("case {}: g ≠ q·f + r", case))?;
        let wf = weierstrass_prepare(&f).map_err(|e| format!("case {}: {}", case, e))?;
        ensure(wf.poly.is_unitary() && wf.poly.degree() == k, || format!("case {}: P not unitary of degree k", case))?;
        ensure(&wf.unit * &wf.poly.to_series() == f, || format!("case {}: f ≠ u·P", case))?;
    }
    let el = start.elapsed();
    ensure(el < Duration::from_secs(30), || format!("took {:?}", el))?;
    Ok(format!("200 inputs in {:.2?}", el))
}

fn criterion_2(jobs: &mut Jobs) -> Outcome {
    let mut r = rng(2);
    let t = 8;
    for case in 0..100 {
        let nz = r.gen_range(1..=2);
        let nv = nz + 1;
        let k = r.gen_range(1..=3);
        let nterms = r.gen_range(2..=10);
        let mut f = random_order_k(&mut r, nv, t, k, Coeff::one(), nterms);
        // unit factor on the w-axis with unit(0) = 1
        let wv = nv - 1;
        for j in 1..=2u32 {
            let e = MultiIndex::unit(nv, wv).with(wv, k as u32 + j);
            if e.degree() <= t {
                f.add_term(e, &small_rat(&mut r));
            }
        }
        let p = levinson_prepare(&f).map_err(|e| format!("case {}: {}", case, e))?;
        let composed = p.change.apply(&f).map_err(|e| e.to_string())?;
        let poly = PolyInW::from_series(&composed, composed.w_degree().unwrap_or(0) as usize).map_err(|e| e.to_string())?;
        ensure(poly.is_unitary() && poly.degree() == k, || format!("case {}: f∘Φ is not unitary of degree {}", case, k))?;
        ensure(p.residual.is_zero(), || format!("case {}: residual nonzero", case))?;
        ensure(p.change.is_real() && poly.is_real(), || format!("case {}: real input gave non-real output", case))?;
        let again = levinson_prepare(&poly.to_series()).map_err(|e| e.to_string())?;
        ensure(again.change.is_identity() && again.polynomial() == poly, || format!("case {}: not idempotent", case))?;
        jobs.push(Command::PrepareFunction, series_to_json(&f));
    }
    Ok("100 inputs; unitary, residual 0, idempotent, real".into())
}

/// `w (1 + z)^{−1/2}` by the binomial series `Σ C(−1/2, j) z^j`.
fn binomial_oracle(t: usize) -> Series {
    let mut s = Series::zero(2, t);
    let mut c = BigRational::one();
    let a = BigRational::new((-1).into(), 2.into());
    for j in 0..t {
        s.add_term(MultiIndex(vec![j as u32, 1]), &Coeff::real(c.clone()));
        c = c * (&a - BigRational::from_integer((j as i64).into())) / BigRational::from_integer((j as i64 + 1).into());
    }
    s
}

fn criterion_3(jobs: &mut Jobs) -> Outcome {
    let t = 12;
    let f = Series::from_fracs(2, t, &[(&[0, 2], 1, 1), (&[1, 2], 1, 1)]);
    let p = levinson_prepare(&f).map_err(|e| e.to_string())?;
    let composed = p.change.apply(&f).map_err(|e| e.to_string())?;
    ensure(composed == Series::w(2, t).pow(2), || format!("f∘Φ = {}", composed.pretty(false)))?;
    let oracle = binomial_oracle(t);
    ensure(*p.change.w_image() == oracle, || {
        format!("change jet differs from binomial series: {}", (p.change.w_image() - &oracle).pretty(false))
    })?;
    jobs.push(Command::PrepareFunction, series_to_json(&f));
    Ok("f∘Φ = w² through N = 12; jet equals w(1+z)^(-1/2)".into())
}

fn form_text(theta: &OneForm) -> String {
    serde_json::to_string(&OneFormDoc::from(theta)).unwrap()
}

fn integrable_family(seed: u64, count: usize, only_k1: bool) -> Vec<(usize, usize, OneForm)> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let n = r.gen_range(1..=2);
            let k = if only_k1 { 1 } else { r.gen_range(1..=2) };
            (n, k, random_integrable(&mut r, n, 8, k))
        })
        .collect()
}

fn criterion_4(jobs: &mut Jobs) -> Outcome {
    let start = Instant::now();
    for (case, (n, k, theta)) in integrable_family(4, 50, false).into_iter().enumerate() {
        let p = foliation::prepare_foliation(&theta).map_err(|e| format!("case {} (n={}, k={}): {}", case, n, k, e))?;
        ensure(p.k == k && p.q.is_unitary() && p.q.degree() == k, || format!("case {}: Q not unitary of degree {}", case, k))?;
        ensure(p.polys.iter().all(|pi| pi.degree() <= k), || format!("case {}: deg_w P_i > k", case))?;
        ensure(p.residual.is_zero(), || format!("case {}: proportionality residual nonzero", case))?;
        jobs.push(Command::PrepareForm, form_text(&theta));
    }
    let el = start.elapsed();
    ensure(el < Duration::from_secs(120), || format!("took {:?}", el))?;
    Ok(format!("50 inputs (n = 1, 2; k ≤ 2) in {:.2?}", el))
}

fn criterion_5(jobs: &mut Jobs) -> Outcome {
    let mut count = 0;
    for (case, (n, _, theta)) in integrable_family(4, 50, false)
        .into_iter()
        .chain(integrable_family(5, 20, true))
        .filter(|(_, k, _)| *k == 1)
        .enumerate()
    {
        let c = foliation::prepare_k1(&theta).map_err(|e| format!("case {} (n={}): {}", case, n, e))?;
        ensure(foliation::closedness(&c.theta0).is_zero(), || format!("case {}: dθ₀ ≠ 0", case))?;
        ensure(foliation::closedness(&c.theta1).is_zero(), || format!("case {}: dθ₁ ≠ 0", case))?;
        let nv = n + 1;
        let top = c.theta0[0].trunc();
        let zf = |v: &[Series]| OneForm::new(v.to_vec(), Series::zero(nv, top)).unwrap();
        ensure(wedge(&zf(&c.theta0), &zf(&c.theta1)).unwrap().is_zero(), || format!("case {}: θ₀∧θ₁ ≠ 0", case))?;
        ensure(c.tangency.is_zero(), || format!("case {}: df₀∧df₁ ≠ 0", case))?;
        ensure(c.residual.is_zero(), || format!("case {}: residual nonzero", case))?;
        // df_i restricted to dz agrees with θ_i
        for i in 0..n {
            ensure(c.f0.partial(i).truncate_to(top) == c.theta0[i] && c.f1.partial(i).truncate_to(top) == c.theta1[i], || {
                format!("case {}: θ ≠ df", case)
            })?;
        }
        jobs.push(Command::PrepareK1, form_text(&theta));
        count += 1;
    }
    ensure(count >= 20, || format!("only {} k = 1 inputs", count))?;
    Ok(format!("{} k = 1 inputs", count))
}

fn field_text(x: &VectorField2) -> String {
    serde_json::to_string(&VectorFieldDoc::from(x)).unwrap()
}

fn criterion_6(jobs: &mut Jobs) -> Outcome {
    let mut r = rng(6);
    let mut tags = std::collections::BTreeMap::new();
    for case in 0..100 {
        let x = random_field(&mut r, 8, case);
        let cls = classify(&x);
        *tags.entry(cls.tag.as_str()).or_insert(0) += 1;
        let nf = normal_form_vf(&x).map_err(|e| format!("case {} ({}): {}", case, cls.tag.as_str(), e))?;
        ensure(nf.residual.is_zero(), || format!("case {}: residual nonzero", case))?;
        ensure(nf.f.coeff_of(&[1, 0]) == cls.trace && nf.g.coeff_of(&[1, 0]) == -&cls.det, || {
            format!("case {}: f'(0), g'(0) disagree with trace, det", case)
        })?;
        jobs.push(Command::NormalizeVf, field_text(&x));
    }
    let sn = VectorField2::from_fracs(10, &[(&[1, 0], 1, 1)], &[(&[0, 2], 1, 1)]).unwrap();
    let nf = normal_form_vf(&sn).map_err(|e| e.to_string())?;
    ensure(nf.residual.is_zero() && nf.residual.trunc() == 9, || "saddle-node at N = 10 failed".into())?;
    jobs.push(Command::NormalizeVf, field_text(&sn));
    Ok(format!("100 inputs {:?}; x∂x + y²∂y at N = 10", tags))
}

fn criterion_7(jobs: &mut Jobs) -> Outcome {
    let t = 8;
    let cases = [
        ("linear saddle", VectorField2::from_fracs(t, &[(&[1, 0], 1, 1)], &[(&[0, 1], -2, 1)]).unwrap(), RefineCase::Saddle),
        ("linear center", VectorField2::from_fracs(t, &[(&[0, 1], -1, 1)], &[(&[1, 0], 1, 1)]).unwrap(), RefineCase::Center),
        ("x∂x + y²∂y", VectorField2::from_fracs(t, &[(&[1, 0], 1, 1)], &[(&[0, 2], 1, 1)]).unwrap(), RefineCase::SaddleNode),
    ];
    let mut report = Vec::new();
    for (name, x, case) in cases {
        let r = refine(&x).map_err(|e| format!("{}: {}", name, e))?;
        ensure(r.tag == RefinedTag::Eigen(case), || format!("{}: tag {}", name, r.tag.name()))?;
        ensure(r.f.constant_term() == Coeff::one() && r.g.constant_term().is_zero(), || format!("{}: f(0), g(0)", name))?;
        ensure(r.residual.is_zero(), || format!("{}: residual nonzero", name))?;
        let c = refine_curve_form(&x).map_err(|e| format!("{} curve form: {}", name, e))?;
        c.validate().map_err(|e| format!("{}: {}", name, e))?;
        let (k, l) = (c.k.unwrap(), c.l.unwrap());
        let bound = if case == RefineCase::Saddle { 2 * (l + 1) >= k && k >= 2 } else { l + 1 >= k && k >= 1 };
        ensure(bound, || format!("{}: k = {}, l = {} out of bounds", name, k, l))?;
        let curve = c.curve.clone().unwrap();
        let lead = curve.w_coeff(curve.w_degree().unwrap());
        ensure(lead == Series::one(2, t), || format!("{}: curve not unitary in w", name))?;
        report.push(format!("{} → {} (k={}, l={})", name, r.tag.name(), k, l));
        jobs.push(Command::RefineVf, field_text(&x));
    }
    Ok(report.join("; "))
}

fn criterion_8(jobs: &Jobs) -> Outcome {
    for (i, (cmd, text)) in jobs.0.iter().enumerate() {
        let a = run_to_text(*cmd, text, None, false).map_err(|e| format!("job {} ({}): {}", i, cmd.as_str(), e))?;
        let b = run_to_text(*cmd, text, None, false).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("job {}: outputs differ between runs", i))?;
        let cert = parse_certificate(&a).map_err(|e| e.to_string())?;
        verify_certificate(&cert).map_err(|e| format!("job {} ({}): verify: {}", i, cmd.as_str(), e))?;
    }
    Ok(format!("{} certificates verified, byte-identical reruns", jobs.0.len()))
}

fn exit_code(cmd: &str, input: &str) -> (i32, String) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("in.json");
    std::fs::write(&path, input).unwrap();
    let out = Proc::new(env!("CARGO_BIN_EXE_germnorm"))
        .args(["--command", cmd, "--input"])
        .arg(&path)
        .output()
        .unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn criterion_9() -> Outcome {
    let t = 6;
    let radial = VectorField2::from_fracs(t, &[(&[1, 0], 2, 1), (&[0, 2], 1, 1)], &[(&[0, 1], 2, 1)]).unwrap();
    let (code, msg) = exit_code("normalize-vf", &field_text(&radial));
    ensure(code == 2 && msg.contains("radial"), || format!("radial field: exit {} {}", code, msg))?;

    // Θ = z1 dz2 + (z2 + w) dw on C^3: Θ∧dΘ = (z2 + w) dz1∧dz2∧dw
    let nv = 3;
    let theta = OneForm::new(
        vec![Series::zero(nv, t), Series::var(nv, t, 0)],
        &Series::var(nv, t, 2) + &Series::var(nv, t, 1),
    )
    .unwrap();
    let witness = match integrability_check(&theta) {
        Integrability::Fail { monomial, .. } => describe_monomial(&monomial),
        other => return Err(format!("integrability check returned {:?}", other)),
    };
    let (code, msg) = exit_code("prepare-form", &form_text(&theta));
    ensure(code == 2 && msg.contains("integrable") && msg.contains(&witness), || {
        format!("non-integrable form: exit {} {} (witness {})", code, msg, witness)
    })?;

    let f = Series::from_fracs(2, t, &[(&[0, 2], 2, 1), (&[1, 1], 1, 1)]);
    let (code, msg) = exit_code("prepare-function", &series_to_json(&f));
    ensure(code == 3, || format!("2w² + zw: exit {} {}", code, msg))?;
    Ok(format!("radial → 2, non-integrable → 2 naming {}, 2w² → 3", witness))
}

fn main() {
    let mut jobs = Jobs::default();
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "Weierstrass multiply-back", criterion_1()),
        (2, "Levinson contract", criterion_2(&mut jobs)),
        (3, "worked jet identity", criterion_3(&mut jobs)),
        (4, "foliation certificate", criterion_4(&mut jobs)),
        (5, "closed normal form", criterion_5(&mut jobs)),
        (6, "planar normal form", criterion_6(&mut jobs)),
        (7, "refinements", criterion_7(&mut jobs)),
        (8, "round trip and determinism", criterion_8(&jobs)),
        (9, "negative paths", criterion_9()),
    ];
    let mut failed = 0;
    for (n, name, res) in &results {
        match res {
            Ok(d) => println!("criterion {}: PASS  {}: {}", n, name, d),
            Err(e) => {
                failed += 1;
                println!("criterion {}: FAIL  {}: {}", n, name, e)
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
