//! The log-space constants ledger against an exact-rational re-derivation.
//!
//! The ledger works entirely in base-10 logarithms because the recursion's
//! towers overflow linear f64 almost immediately. With the round count
//! capped, though, every quantity is a genuine rational number, so this
//! oracle replays the recursion in BigRational arithmetic — ceilings, mins,
//! table lookups and all — and demands that the ledger's logs agree to
//! 1e−9 relative even when the values themselves are around 10^±400000.

mod common;

use exlab_core::ledger::{check_constraints, ConstLogFn, ConstantsLedger, FloorTableLogFn};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

type Rat = BigRational;

fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

fn pow2(e: i32) -> Rat {
    if e >= 0 {
        Rat::from_integer(BigInt::one() << e as usize)
    } else {
        Rat::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

/// log10 of a positive BigInt via its top 53 bits; error ~1e−15 relative.
fn log10_bigint(n: &BigInt) -> f64 {
    assert!(n.is_positive());
    let bits = n.bits();
    if bits <= 53 {
        return n.to_f64().unwrap().log10();
    }
    let shift = (bits - 53) as usize;
    let top: BigInt = n >> shift;
    top.to_f64().unwrap().log10() + shift as f64 * std::f64::consts::LOG10_2
}

fn log10_rat(x: &Rat) -> f64 {
    log10_bigint(x.numer()) - log10_bigint(x.denom())
}

/// Exact positive-rational function mirroring a LogFn used by the ledger.
enum RatFn {
    Const(Rat),
    /// Ascending thresholds; value of the largest threshold ≤ input.
    Table(Vec<(Rat, Rat)>),
}

impl RatFn {
    fn eval(&self, x: &Rat) -> Rat {
        match self {
            RatFn::Const(v) => v.clone(),
            RatFn::Table(rows) => rows
                .iter()
                .rev()
                .find(|(t, _)| t <= x)
                .expect("oracle input below table range")
                .1
                .clone(),
        }
    }
}

struct OracleLevel {
    delta: Rat,
    xi: Rat,
    b: Rat,
    c: Rat,
    step: Option<OracleStep>,
}

struct OracleStep {
    eta: Rat,
    b_hat: Rat,
    r: u64,
    b_star: Rat,
    growth: Rat,
    inflation: Rat,
}

fn min_rat<'a>(terms: &'a [&'a Rat]) -> &'a Rat {
    terms.iter().copied().min().unwrap()
}

/// The recursion replayed exactly. Caller guarantees every input is an
/// exact binary fraction so the f64 build sees identical parameters.
#[allow(clippy::too_many_arguments)]
fn oracle_ledger(
    k: usize,
    k_bound: &Rat,
    delta: &Rat,
    eps_stab: &RatFn,
    b_hat_fn: &RatFn,
    beta: &Rat,
    r_cap: u64,
) -> Vec<OracleLevel> {
    let four = rat(4, 1);
    let delta_at = |i: usize| delta / four.pow((k - i) as i32);

    let d0 = delta_at(0);
    let xi0 = eps_stab.eval(&(&d0 / rat(2, 1)));
    let mut levels = vec![OracleLevel {
        delta: d0.clone(),
        xi: xi0,
        b: &d0 / rat(32, 1),
        c: Rat::one(),
        step: None,
    }];

    for t in 1..=k {
        let (xi_p, b_p, c_p) =
            (levels[t - 1].xi.clone(), levels[t - 1].b.clone(), levels[t - 1].c.clone());
        let d_t = delta_at(t);

        let eta_a = &d_t / rat(8, 1);
        let eta_b = &xi_p / rat(4, 1);
        let eta = min_rat(&[&eta_a, &eta_b]).clone();
        let b_hat = b_hat_fn.eval(&eta);

        // R = ⌈4^{k+1}·k²·K/ξ'²⌉ + 1, truncated at the cap.
        let x = four.pow(k as i32 + 1) * rat((k * k) as i64, 1) * k_bound
            / (&xi_p * &xi_p);
        let r_raw: BigInt = x.ceil().to_integer() + 1;
        let r = if r_raw > BigInt::from(r_cap) { r_cap } else { r_raw.to_u64().unwrap() };

        let bs_a = beta * &xi_p * &xi_p / rat(256, 1);
        let bs_b = &b_p / rat(4, 1);
        let bs_c = &b_hat / rat(4, 1);
        let b_star = min_rat(&[&bs_a, &bs_b, &bs_c]).clone();
        let growth = rat(3, 1) / &b_star;
        let inflation = rat(r as i64, 1) * growth.pow(r as i32);

        let xi = &xi_p * &xi_p / (rat(8 * k as i64, 1) * inflation.pow(t as i32));
        let b_a = &b_star / (rat(40, 1) * &inflation);
        let b_b = &xi_p * &xi_p / rat(256, 1);
        let b = min_rat(&[&b_a, &b_b]).clone();
        let c = &inflation * &c_p;

        levels.push(OracleLevel {
            delta: d_t,
            xi,
            b,
            c,
            step: Some(OracleStep { eta, b_hat, r, b_star, growth, inflation }),
        });
    }
    levels
}

fn assert_log_close(ledger_log10: f64, exact: &Rat, what: &str) {
    assert!(!exact.is_zero(), "{what}: oracle value is zero");
    let oracle_log10 = log10_rat(exact);
    let tol = 1e-9 * oracle_log10.abs().max(1.0);
    assert!(
        (ledger_log10 - oracle_log10).abs() <= tol,
        "{what}: ledger 10^{ledger_log10} vs oracle 10^{oracle_log10}"
    );
}

fn compare(ledger: &ConstantsLedger, oracle: &[OracleLevel]) {
    assert_eq!(ledger.levels.len(), oracle.len());
    for (entry, exact) in ledger.levels.iter().zip(oracle) {
        let lvl = entry.level;
        assert_log_close(entry.delta.log10, &exact.delta, &format!("level {lvl} delta"));
        assert_log_close(entry.xi.log10, &exact.xi, &format!("level {lvl} xi"));
        assert_log_close(entry.b.log10, &exact.b, &format!("level {lvl} b"));
        assert_log_close(entry.c.log10, &exact.c, &format!("level {lvl} C"));
        match (&entry.step, &exact.step) {
            (None, None) => {}
            (Some(step), Some(ostep)) => {
                assert_log_close(step.eta.log10, &ostep.eta, &format!("level {lvl} eta"));
                assert_log_close(step.b_hat.log10, &ostep.b_hat, &format!("level {lvl} b_hat"));
                assert_eq!(step.r.exact, Some(ostep.r), "level {lvl} R");
                assert_log_close(step.b_star.log10, &ostep.b_star, &format!("level {lvl} b*"));
                assert_log_close(step.growth.log10, &ostep.growth, &format!("level {lvl} L"));
                assert_log_close(
                    step.inflation.log10,
                    &ostep.inflation,
                    &format!("level {lvl} R·L^R"),
                );
            }
            _ => panic!("level {lvl}: step presence mismatch"),
        }
    }
}

#[test]
fn capped_tower_matches_exact_rationals() {
    // k=3 with constant stability/container inputs; cap 10 keeps the tower
    // rational while still reaching magnitudes around 10^−160000.
    let eps = ConstLogFn::new(0.125).unwrap();
    let bhat = ConstLogFn::new(1.0 / 64.0).unwrap();
    let ledger =
        ConstantsLedger::build(3, 1.0, 0.75, 0.0625, &eps, &bhat, 0.5, Some(10)).unwrap();
    let oracle = oracle_ledger(
        3,
        &Rat::one(),
        &pow2(-4),
        &RatFn::Const(pow2(-3)),
        &RatFn::Const(pow2(-6)),
        &pow2(-1),
        10,
    );
    compare(&ledger, &oracle);
    let report = check_constraints(&ledger).unwrap();
    assert!(report.violations.is_empty());
}

#[test]
fn table_backed_tower_matches_exact_rationals() {
    // k=2 with step-function inputs; exercises the table lookup path and a
    // first step whose round count stays below the cap (R = 2 exactly).
    let eps = FloorTableLogFn::from_plain(&[(pow2f(-40), 0.5)]).unwrap();
    let bhat = FloorTableLogFn::from_plain(&[
        (pow2f(-200), pow2f(-6)),
        (pow2f(-20), pow2f(-5)),
        (pow2f(-6), pow2f(-4)),
    ])
    .unwrap();
    let k_bound = pow2f(-13);
    let ledger =
        ConstantsLedger::build(2, k_bound, 0.5, 0.25, &eps, &bhat, 1.0, Some(6)).unwrap();

    let oracle = oracle_ledger(
        2,
        &pow2(-13),
        &pow2(-2),
        &RatFn::Table(vec![(pow2(-40), pow2(-1))]),
        &RatFn::Table(vec![
            (pow2(-200), pow2(-6)),
            (pow2(-20), pow2(-5)),
            (pow2(-6), pow2(-4)),
        ]),
        &Rat::one(),
        6,
    );
    compare(&ledger, &oracle);

    // The first step's R is genuinely below the cap.
    assert_eq!(ledger.levels[1].step.as_ref().unwrap().r.exact, Some(2));
    // The second step's raw R is astronomically past it.
    assert_eq!(ledger.levels[2].step.as_ref().unwrap().r.exact, Some(6));

    let report = check_constraints(&ledger).unwrap();
    assert!(report.violations.is_empty());
}

#[test]
fn deep_tower_matches_exact_rationals() {
    // k=4, cap 4: four chained steps push the exact numbers to hundreds of
    // thousands of decimal digits; the log-space ledger must stay with them.
    let eps = ConstLogFn::new(0.125).unwrap();
    let bhat = ConstLogFn::new(1.0 / 256.0).unwrap();
    let ledger =
        ConstantsLedger::build(4, 4.0, 0.75, 0.25, &eps, &bhat, 0.25, Some(4)).unwrap();
    let oracle = oracle_ledger(
        4,
        &rat(4, 1),
        &pow2(-2),
        &RatFn::Const(pow2(-3)),
        &RatFn::Const(pow2(-8)),
        &pow2(-2),
        4,
    );
    compare(&ledger, &oracle);
    let report = check_constraints(&ledger).unwrap();
    assert!(report.violations.is_empty());
}

/// 2^e as f64, exact for |e| well inside the exponent range.
fn pow2f(e: i32) -> f64 {
    (2f64).powi(e)
}
