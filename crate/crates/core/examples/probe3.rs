// scratch probe 3: pin down the codual-step measure factor and the dual
// factor's r-dependence
use hermden::closed::{sankaran_fpoly, FPoly};
use hermden::herm::{AdmissibleFunction, HermMatrix, WeightVector};
use hermden::laurent::LaurentQ;
use hermden::oracle::{weighted_alpha_at_k, weighted_alpha_oracle, weighted_rank1_oracle, OracleConfig};
use hermden::PrimeContext;
use num_rational::BigRational;

fn q3() -> BigRational {
    BigRational::from_integer(3.into())
}

fn main() {
    let ctx = PrimeContext::new(3).unwrap();
    let cfg = OracleConfig::default();

    println!("== dual factor r-dependence, rank 1: alpha_(w^lam)(r, 1_Lsharp) ==");
    // closed prediction: q^{t-1} * sankaran((0), aug 1, lam+1) for t = 1
    for lam in [0i64, 2] {
        let f: FPoly = sankaran_fpoly(&[0], 1, lam + 1).scale(&LaurentQ::q_pow(0));
        for r in 0..=3u32 {
            let closed = f.eval(&q3(), r);
            let oracle = weighted_rank1_oracle(ctx, 1, 1, true, lam, r, &cfg).unwrap();
            println!(
                "  lam={lam} r={r}: closed={closed} oracle={} stab={} equal={}",
                oracle.normalized,
                oracle.stabilized,
                closed == oracle.normalized
            );
        }
    }

    println!("== dual factor r-dependence, rank 2 (type 1): alpha_(w^-1)(r, 1_Lsharp) ==");
    // closed prediction: q^{t-1} * sankaran((1,0), aug 1, 0) = q^0 * ...
    let f = sankaran_fpoly(&[1, 0], 1, 0);
    for r in 0..=2u32 {
        let closed = f.eval(&q3(), r);
        let oracle = weighted_rank1_oracle(ctx, 2, 1, true, -1, r, &cfg).unwrap();
        println!(
            "  r={r}: closed={closed} oracle={} stab={} equal={}",
            oracle.normalized,
            oracle.stabilized,
            closed == oracle.normalized
        );
    }

    println!("== case-2 chain vs oracle with q^-(n-1) correction ==");
    // T = diag(w^2, w^-1), weight (Z,Y), type 1:
    // predicted: q^{-1} * alpha_(w^-1)(r, 1_{Lsharp rank 2}) * alpha_(w^2)(r, 1_{L0 rank 1})
    let phi = AdmissibleFunction::new(WeightVector::parse("ZY").unwrap(), 1).unwrap();
    let t = HermMatrix::diag_powers(ctx, &[2, -1]);
    for r in 0..=1u32 {
        let lhs = weighted_alpha_oracle(&phi, r, &t, &cfg).unwrap();
        let f1 = weighted_rank1_oracle(ctx, 2, 1, true, -1, r, &cfg).unwrap();
        // reduced: rank 1 type 0 target (w^2)
        let phi0 = AdmissibleFunction::pure(1, 0).unwrap();
        let t0 = HermMatrix::diag_powers(ctx, &[2]);
        let f2 = weighted_alpha_oracle(&phi0, r, &t0, &cfg).unwrap();
        let plain = &f1.normalized * &f2.normalized;
        let corrected = &plain / q3();
        println!(
            "  r={r}: lhs={} plain={} corrected={} (lhs==corr: {}) stab={},{},{}",
            lhs.normalized,
            plain,
            corrected,
            lhs.normalized == corrected,
            lhs.stabilized,
            f1.stabilized,
            f2.stabilized
        );
    }

    println!("== case-2 at rank 3? unaffordable; rank-2 non-diagonal case-2 check ==");
    // T = [[w^2, w], [w, w^-1 * u]]? keep it simple: T = [[1, 1], [1, 1 - w^-1]]
    // weight (Z, Y) type 1: codual pivot at position 1 only after checking
    use hermden::field::FElement;
    let one = FElement::one(ctx);
    let t_nd = HermMatrix::new(
        ctx,
        2,
        vec![
            FElement::from_int(ctx, 3),
            one.clone(),
            one.clone(),
            FElement::new(ctx, BigRational::new(1.into(), 3.into()), BigRational::from_integer(0.into())).unwrap(),
        ],
    )
    .unwrap();
    // det = 3/3 - 1 = 0 singular! adjust: T11 = 6
    let t_nd = HermMatrix::new(
        ctx,
        2,
        vec![
            FElement::from_int(ctx, 6),
            one.clone(),
            one,
            FElement::new(ctx, BigRational::new(1.into(), 3.into()), BigRational::from_integer(0.into())).unwrap(),
        ],
    )
    .unwrap();
    let _ = t_nd;
    println!("  (skipped non-diagonal here; grid test later)");

    println!("== n=1 beta(0,1) ingredients by pure oracle interpolation ==");
    // alpha'_{(1)}(0, 1_L[1]sharp) via oracle nodes
    let phi_y = AdmissibleFunction::new(WeightVector::parse("Y").unwrap(), 1).unwrap();
    let t1 = HermMatrix::diag_powers(ctx, &[0]);
    for r in 0..=4u32 {
        let v = weighted_alpha_oracle(&phi_y, r, &t1, &cfg).unwrap();
        println!("  alpha_(1)(r={r}, Ysharp) = {} stab={}", v.normalized, v.stabilized);
    }

    println!("== sigma=1 stabilization check: vol(2,2,(1,1)) values per k ==");
    let phi = AdmissibleFunction::new(WeightVector::parse("ZY").unwrap(), 2).unwrap();
    let t = HermMatrix::diag_powers(ctx, &[1, -1]);
    for k in 1..=3u32 {
        match weighted_alpha_at_k(&phi, 0, &t, k, &cfg) {
            Ok(v) => println!("  k={k}: {} stab={}", v.normalized, v.stabilized),
            Err(e) => println!("  k={k}: ERR {e}"),
        }
    }
}
