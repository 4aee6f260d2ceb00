// scratch probe 2: isolate the Y-heavy volume anomaly
use hermden::herm::{AdmissibleFunction, HermMatrix, WeightVector};
use hermden::oracle::{
    weighted_alpha_at_k, weighted_alpha_naive, weighted_alpha_oracle, weighted_rank1_oracle,
    OracleConfig,
};
use hermden::PrimeContext;

fn main() {
    let ctx = PrimeContext::new(3).unwrap();
    let cfg = OracleConfig::default();

    println!("== oracle vs naive: YY weight, T = diag(1, w^-1), type 1 ==");
    let phi_yy = AdmissibleFunction::new(WeightVector::parse("YY").unwrap(), 1).unwrap();
    let t = HermMatrix::diag_powers(ctx, &[0, -1]);
    for k in 1..=2u32 {
        let fast = weighted_alpha_at_k(&phi_yy, 0, &t, k, &cfg).unwrap();
        let slow = weighted_alpha_naive(&phi_yy, 0, &t, k, 5e8).unwrap();
        println!(
            "  k={k}: fast={} naive={} equal={}",
            fast.normalized,
            slow,
            fast.normalized == slow
        );
    }

    println!("== vol(K^[1]_2) by oracle across splits ==");
    // (2,0): T = diag(1, w), ZZ; (1,1): T = diag(1, w^-1), ZY; (0,2): diag(1, w^-1), YY
    let cases = [
        ("(2,0)", "ZZ", vec![0i64, 1]),
        ("(1,1)", "ZY", vec![0, -1]),
        ("(0,2)", "YY", vec![0, -1]),
    ];
    for (label, w, exps) in &cases {
        let phi = AdmissibleFunction::new(WeightVector::parse(w).unwrap(), 1).unwrap();
        let t = HermMatrix::diag_powers(ctx, exps);
        match weighted_alpha_oracle(&phi, 0, &t, &cfg) {
            Ok(v) => println!(
                "  {label}: {} (k={}, stabilized={})",
                v.normalized, v.k, v.stabilized
            ),
            Err(e) => println!("  {label}: ERR {e}"),
        }
    }

    println!("== vol(K^[2]_2) by oracle across splits ==");
    let cases = [
        ("(1,1)", "ZY", vec![1i64, -1]),
        ("(0,2)", "YY", vec![-1, -1]),
    ];
    for (label, w, exps) in &cases {
        let phi = AdmissibleFunction::new(WeightVector::parse(w).unwrap(), 2).unwrap();
        let t = HermMatrix::diag_powers(ctx, exps);
        match weighted_alpha_oracle(&phi, 0, &t, &cfg) {
            Ok(v) => println!(
                "  {label}: {} (k={}, stabilized={})",
                v.normalized, v.k, v.stabilized
            ),
            Err(e) => println!("  {label}: ERR {e}"),
        }
    }

    println!("== rank-2 dual factor by rank1 oracle ==");
    // alpha_{(w^-1)}(0, 1_{L^{[1],sharp}-rank-2}) : expect to compare with 4/3
    match weighted_rank1_oracle(ctx, 2, 1, true, -1, 0, &cfg) {
        Ok(v) => println!("  value={} (k={}, stab={})", v.normalized, v.k, v.stabilized),
        Err(e) => println!("  ERR {e}"),
    }
    // alpha_{(1)}(0, 1_{L^{[1]}-rank-2}): expect 4/9
    match weighted_rank1_oracle(ctx, 2, 1, false, 0, 0, &cfg) {
        Ok(v) => println!("  value={} (k={}, stab={})", v.normalized, v.k, v.stabilized),
        Err(e) => println!("  ERR {e}"),
    }

    println!("== stabilization diagnosis: alpha(ZZ type1, r=0, diag(1, w^2)) ==");
    let phi = AdmissibleFunction::pure(2, 1).unwrap();
    let t = HermMatrix::diag_powers(ctx, &[0, 2]);
    for k in 1..=3u32 {
        match weighted_alpha_at_k(&phi, 0, &t, k, &cfg) {
            Ok(v) => println!("  k={k}: {} (stab flag {})", v.normalized, v.stabilized),
            Err(e) => println!("  k={k}: ERR {e}"),
        }
    }
    let auto = weighted_alpha_oracle(&phi, 0, &t, &cfg);
    match auto {
        Ok(v) => println!("  auto: {} k={} stab={}", v.normalized, v.k, v.stabilized),
        Err(e) => println!("  auto: ERR {e}"),
    }
    println!("== rank1 factor (rank2 t1 Z lam0) stabilization ==");
    for r in [0u32] {
        match weighted_rank1_oracle(ctx, 2, 1, false, 0, r, &cfg) {
            Ok(v) => println!("  r={r}: {} k={} stab={}", v.normalized, v.k, v.stabilized),
            Err(e) => println!("  r={r}: ERR {e}"),
        }
    }
    println!("== reduced problem (rank1 type1, T=(w^2)) ==");
    let phi1 = AdmissibleFunction::pure(1, 1).unwrap();
    let t1 = HermMatrix::diag_powers(ctx, &[2]);
    match weighted_alpha_oracle(&phi1, 0, &t1, &cfg) {
        Ok(v) => println!("  {} k={} stab={}", v.normalized, v.k, v.stabilized),
        Err(e) => println!("  ERR {e}"),
    }
}
