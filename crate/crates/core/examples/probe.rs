// scratch probe (will be replaced by real examples)
use hermden::closed::DerivConvention;
use hermden::herm::{AdmissibleFunction, HermMatrix, WeightVector};
use hermden::kr::Engine;
use hermden::oracle::OracleConfig;
use hermden::PrimeContext;
use std::time::Instant;

fn main() {
    let ctx = PrimeContext::new(3).unwrap();
    let eng = Engine::new(ctx, OracleConfig::default());
    let conv = DerivConvention::Column;

    let t0 = Instant::now();
    println!("== vol_K(2, h, a, b) across splits ==");
    for h in 0..=2usize {
        for a in 0..=2usize {
            let b = 2 - a;
            match eng.vol_k_at_split(2, h, a, b) {
                Ok((v, prov)) => println!("  h={h} (a,b)=({a},{b}): {} [{prov:?}]", v.at(eng.q())),
                Err(e) => println!("  h={h} (a,b)=({a},{b}): ERR {e}"),
            }
        }
    }
    println!("t = {:?}", t0.elapsed());

    println!("== vol_K(3, h, a, b) across splits ==");
    for h in 0..=3usize {
        for a in 0..=3usize {
            let b = 3 - a;
            match eng.vol_k_at_split(3, h, a, b) {
                Ok((v, prov)) => println!("  h={h} (a,b)=({a},{b}): {} [{prov:?}]", v.at(eng.q())),
                Err(e) => println!("  h={h} (a,b)=({a},{b}): ERR {e}"),
            }
        }
    }
    println!("t = {:?}", t0.elapsed());

    println!("== beta Fourier n=1, h=1, t=0 ==");
    for r in eng.verify_beta_fourier(1, 1, 0, conv).unwrap() {
        println!("  {} [{:?}] lhs={:?} rhs={:?}", r.name, r.status, r.lhs, r.rhs);
    }
    println!("== beta Fourier n=2 ==");
    for (h, t) in [(1usize, 0usize), (2, 1)] {
        match eng.verify_beta_fourier(2, h, t, conv) {
            Ok(rs) => {
                for r in rs {
                    println!("  {} [{:?}] lhs={:?} rhs={:?}", r.name, r.status, r.lhs, r.rhs)
                }
            }
            Err(e) => println!("  h={h} t={t}: ERR {e}"),
        }
    }
    println!("t = {:?}", t0.elapsed());

    println!("== Y-case: dDen((varpi^lam), 1_L[1]sharp) ==");
    for lam in [0i64, 2, 4] {
        let t = HermMatrix::diag_powers(ctx, &[lam]);
        let phi = AdmissibleFunction::new(WeightVector::parse("Y").unwrap(), 1).unwrap();
        for c in [DerivConvention::Column, DerivConvention::Plane] {
            match eng.dden(&t, &phi, c) {
                Ok(r) => println!("  lam={lam} {c:?}: {}", r.value.at(eng.q())),
                Err(e) => println!("  lam={lam} {c:?}: ERR {e}"),
            }
        }
    }
    println!("== duality n=1: dDen((w^l),Ysharp) vs dDen((w^(l+1)),L) ==");
    for lam in [0i64, 2, 4] {
        let t = HermMatrix::diag_powers(ctx, &[lam]);
        match eng.verify_duality(&t, 1, conv) {
            Ok(r) => println!("  lam={lam}: [{:?}] lhs={:?} rhs={:?}", r.status, r.lhs, r.rhs),
            Err(e) => println!("  lam={lam}: ERR {e}"),
        }
    }
    println!("t = {:?}", t0.elapsed());

    println!("== cancellation n=2 instances ==");
    // (1)(i): h=1 != n=2, val(t1)=0: T = diag(1, varpi^3), phi type 1 ZZ
    let cases: Vec<(HermMatrix, AdmissibleFunction, &str)> = vec![
        (
            HermMatrix::diag_powers(ctx, &[0, 3]),
            AdmissibleFunction::pure(2, 1).unwrap(),
            "case 1i: h=1, unit pivot",
        ),
        (
            HermMatrix::diag_powers(ctx, &[0, 1]),
            AdmissibleFunction::pure(2, 0).unwrap(),
            "case 1i: h=0, unit pivot",
        ),
        (
            HermMatrix::diag_powers(ctx, &[-1, 0]),
            AdmissibleFunction::new(WeightVector::parse("ZY").unwrap(), 1).unwrap(),
            "case 2i: h=1, codual pivot",
        ),
        (
            HermMatrix::diag_powers(ctx, &[-1, 2]),
            AdmissibleFunction::new(WeightVector::parse("ZY").unwrap(), 2).unwrap(),
            "case 2i: h=2, codual pivot",
        ),
    ];
    for (t, phi, label) in &cases {
        match eng.verify_cancellation(t, phi, conv) {
            Ok(r) => println!("  {label}: [{:?}] lhs={:?} rhs={:?}", r.status, r.lhs, r.rhs),
            Err(e) => println!("  {label}: ERR {e}"),
        }
    }
    println!("t = {:?}", t0.elapsed());

    // case (1)(ii): h=n=2, val(t1)=1: T = [[3, 2], [2, 1/3]] (det -3, odd)
    use hermden::field::FElement;
    let two = FElement::from_int(ctx, 2);
    let t_12 = HermMatrix::new(
        ctx,
        2,
        vec![
            FElement::varpi_pow(ctx, 1),
            two.clone(),
            two,
            FElement::varpi_pow(ctx, -1),
        ],
    )
    .unwrap();
    let phi_11_2 = AdmissibleFunction::new(WeightVector::parse("ZY").unwrap(), 2).unwrap();
    match eng.verify_cancellation(&t_12, &phi_11_2, conv) {
        Ok(r) => println!("  case 1ii probe: [{:?}] lhs={:?} rhs={:?}", r.status, r.lhs, r.rhs),
        Err(e) => println!("  case 1ii probe: ERR {e}"),
    }
    println!("t = {:?}", t0.elapsed());

    println!("== recursion oracle check, n=2 ==");
    let t = HermMatrix::diag_powers(ctx, &[0, 2]);
    let phi = AdmissibleFunction::pure(2, 1).unwrap();
    for r in [0u32, 1] {
        let ti = Instant::now();
        match eng.verify_recursion_oracle(&t, &phi, r) {
            Ok(rep) => println!(
                "  r={r}: [{:?}] lhs={:?} rhs={:?}  ({:?})",
                rep.status,
                rep.lhs,
                rep.rhs,
                ti.elapsed()
            ),
            Err(e) => println!("  r={r}: ERR {e} ({:?})", ti.elapsed()),
        }
    }
    println!("total t = {:?}", t0.elapsed());

    println!("== kr identity on reducible n=2 family ==");
    for (exps, ty) in [
        (vec![0i64, 3], 0usize),
        (vec![0, 2], 1),
        (vec![0, 4], 1),
        (vec![-1, 2], 1),
    ] {
        let t = HermMatrix::diag_powers(ctx, &exps);
        let phi = AdmissibleFunction::pure(2, ty).unwrap();
        match eng.verify_kr(&t, &phi, conv) {
            Ok(r) => println!("  {exps:?} type {ty}: [{:?}] Int={:?} dDen={:?}", r.status, r.lhs, r.rhs),
            Err(e) => println!("  {exps:?} type {ty}: ERR {e}"),
        }
    }
    println!("total t = {:?}", t0.elapsed());
}
