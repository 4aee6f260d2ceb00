// scratch probe 4: the h=2 pure-Z beta ingredients and KR coherence
use hermden::closed::DerivConvention;
use hermden::herm::{AdmissibleFunction, HermMatrix, WeightVector};
use hermden::kr::Engine;
use hermden::oracle::{weighted_alpha_oracle, OracleConfig};
use hermden::PrimeContext;

fn main() {
    let ctx = PrimeContext::new(3).unwrap();
    let eng = Engine::new(ctx, OracleConfig::default());
    let conv = DerivConvention::Column;

    println!("== ingredients of beta^[2]_(2,0)(1) ==");
    let pin = HermMatrix::diag_powers(ctx, &[0, 1]); // S^[1]_(2,0)
    let phi2 = AdmissibleFunction::pure(2, 2).unwrap();
    let phi1 = AdmissibleFunction::pure(2, 1).unwrap();
    // raw oracle values at the pinning point
    for r in 0..=4u32 {
        let v = weighted_alpha_oracle(&phi2, r, &pin, eng.cfg()).unwrap();
        println!(
            "  alpha_(diag(1,w))(r={r}, phi^[2]) = {} (k={}, stab={})",
            v.normalized, v.k, v.stabilized
        );
    }
    let f = eng.alpha_fn(&pin, &phi2).unwrap();
    println!("  interpolated column coeffs: {:?}", f.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>());
    println!("  center = {}, -F'(1) column = {}", f.center().at(eng.q()), f.neg_derivative(conv).at(eng.q()));
    let d = eng.alpha_fn(&pin, &phi1).unwrap();
    println!("  diag coefficient alpha(pin, phi^[1]) = {}", d.center().at(eng.q()));

    println!("== beta tables at h=2, all splits ==");
    for a in 0..=2usize {
        let w = WeightVector::sorted(a, 2 - a);
        match eng.beta_solve(2, 2, &w, conv) {
            Ok(t) => println!(
                "  (a,b)=({a},{}): weighted beta(1) = {} rep = {} [{:?}]",
                2 - a,
                t.weighted[&1],
                t.rep[&1],
                t.provenance
            ),
            Err(e) => println!("  (a,b)=({a},{}): ERR {e}", 2 - a),
        }
    }

    println!("== KR on h=2 instances ==");
    for exps in [vec![1i64, 2], vec![1, 4], vec![3, 2]] {
        let t = HermMatrix::diag_powers(ctx, &exps);
        let phi = AdmissibleFunction::pure(2, 2).unwrap();
        match eng.verify_kr(&t, &phi, conv) {
            Ok(r) => println!("  {exps:?} ZZ type2: [{:?}] Int={:?} dDen={:?}", r.status, r.lhs, r.rhs),
            Err(e) => println!("  {exps:?} ZZ type2: ERR {e}"),
        }
        // mixed weight at h=2
        let phi = AdmissibleFunction::new(WeightVector::parse("ZY").unwrap(), 2).unwrap();
        let t2 = HermMatrix::diag_powers(ctx, &[exps[0], -1]);
        match eng.verify_kr(&t2, &phi, conv) {
            Ok(r) => println!("  diag(w^{}, w^-1) ZY type2: [{:?}] Int={:?} dDen={:?}", exps[0], r.status, r.lhs, r.rhs),
            Err(e) => println!("  diag(w^{}, w^-1) ZY type2: ERR {e}", exps[0]),
        }
    }

    println!("== cancellation with aligned instances ==");
    let cases: Vec<(HermMatrix, AdmissibleFunction, &str)> = vec![
        (
            HermMatrix::diag_powers(ctx, &[0, 2]),
            AdmissibleFunction::pure(2, 1).unwrap(),
            "1i: h=1<n, unit pivot, ZZ",
        ),
        (
            HermMatrix::diag_powers(ctx, &[0, 1]),
            AdmissibleFunction::pure(2, 0).unwrap(),
            "2ii-equivalent: h=0",
        ),
        (
            HermMatrix::diag_powers(ctx, &[2, -1]),
            AdmissibleFunction::new(WeightVector::parse("ZY").unwrap(), 1).unwrap(),
            "2i: h=1, codual pivot, ZY",
        ),
        (
            HermMatrix::diag_powers(ctx, &[1, -1]),
            AdmissibleFunction::new(WeightVector::parse("ZY").unwrap(), 2).unwrap(),
            "2i: h=2=n, codual pivot, ZY",
        ),
        (
            HermMatrix::diag_powers(ctx, &[1, 2]),
            AdmissibleFunction::pure(2, 2).unwrap(),
            "1ii: h=2=n, Z varpi pivot",
        ),
    ];
    for (t, phi, label) in &cases {
        match eng.verify_cancellation(t, phi, conv) {
            Ok(r) => println!("  {label}: [{:?}] lhs={:?} rhs={:?}", r.status, r.lhs, r.rhs),
            Err(e) => println!("  {label}: ERR {e}"),
        }
    }

    println!("== recursion oracle, both cases ==");
    let recs: Vec<(HermMatrix, AdmissibleFunction, &str)> = vec![
        (
            HermMatrix::diag_powers(ctx, &[0, 1]),
            AdmissibleFunction::pure(2, 1).unwrap(),
            "Z pivot, ZZ t1",
        ),
        (
            HermMatrix::diag_powers(ctx, &[0, -1]),
            AdmissibleFunction::new(WeightVector::parse("ZY").unwrap(), 1).unwrap(),
            "Y pivot, ZY t1",
        ),
    ];
    for (t, phi, label) in &recs {
        for r in [0u32, 1] {
            match eng.verify_recursion_oracle(t, phi, r) {
                Ok(rep) => println!("  {label} r={r}: [{:?}] {} = {}", rep.status, rep.lhs.as_deref().unwrap_or(""), rep.rhs.as_deref().unwrap_or("")),
                Err(e) => println!("  {label} r={r}: ERR {e}"),
            }
        }
    }
}
