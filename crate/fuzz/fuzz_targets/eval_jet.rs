//! Evaluation of parsed expressions must never panic: domain violations are
//! errors, and any returned Hessian is symmetric to bit equality.

#![no_main]

use libfuzzer_sys::fuzz_target;
use metagee::exprlang::EvalPoint;
use metagee::quadring::MetallicParams;
use std::collections::BTreeMap;

fuzz_target!(|input: (&str, [f64; 3], u8, u8)| {
    let (src, point, p, q) = input;
    let Ok(expr) = metagee::exprlang::parse(src) else { return };
    let Ok(mp) = MetallicParams::new(u32::from(p % 20) + 1, u32::from(q % 20) + 1) else {
        return;
    };
    let names: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
    let consts = BTreeMap::new();
    if point.iter().any(|v| !v.is_finite()) {
        return;
    }
    let at = EvalPoint::new(&names, &point, &consts, mp);
    if let Ok(jet) = expr.eval_jet2(&at) {
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(
                    jet.hess[(i, j)].to_bits(),
                    jet.hess[(j, i)].to_bits(),
                    "Hessian must be bitwise symmetric"
                );
            }
        }
    }
});
